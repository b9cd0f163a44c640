//! Property tests for the numerical invariants. Random matrices come from
//! seeds chosen by proptest so failures shrink to a reproducible seed.

use nevanlinna::agler_solver::{pick_matrix, solve_decomposition, InterpolationProblem, SolveOptions};
use nevanlinna::colligation::{haar_unitary, random_instance, Colligation};
use nevanlinna::cpkernel::CpKernel;
use nevanlinna::numerics::{
    gram_matched_unitary, hermitian_eig, max_abs, operator_norm, project_psd, psd_factor, unitarity_defect, Complex,
    ComplexMatrix, TOL_GRAM, TOL_RANK,
};
use nevanlinna::rng::SeededRng;
use nevanlinna::testfam::{make_builtin, BuiltinFamily, EvalVector};
use proptest::prelude::*;

fn hermitian(rng: &mut SeededRng, n: usize) -> ComplexMatrix {
    let g = rng.complex_gaussian_matrix(n, n);
    (&g + g.adjoint()) * Complex::new(0.5, 0.0)
}

fn random_psd(rng: &mut SeededRng, n: usize, rank: usize) -> ComplexMatrix {
    let f = rng.complex_gaussian_matrix(n, rank);
    &f * f.adjoint()
}

fn random_kernel(rng: &mut SeededRng, n: usize, d: usize, k: usize) -> CpKernel {
    let components = (0..k)
        .map(|_| {
            let rank = rng.range_inclusive(1, n * d);
            random_psd(rng, n * d, rank)
        })
        .collect();
    CpKernel::new(n, d, components).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn psd_projection_is_idempotent(seed in any::<u64>(), n in 1usize..6) {
        let h = hermitian(&mut SeededRng::new(seed), n);
        let p = project_psd(&h).unwrap();
        let pp = project_psd(&p).unwrap();
        let scale = 1.0 + operator_norm(&h);
        prop_assert!(max_abs(&(&pp - &p)) <= 1e-12 * scale);
        prop_assert!(hermitian_eig(&p).unwrap().min_eigenvalue() >= -1e-12 * scale);
    }

    #[test]
    fn psd_factor_reconstructs(seed in any::<u64>(), n in 1usize..7, rank in 1usize..7) {
        let mut rng = SeededRng::new(seed);
        let h = random_psd(&mut rng, n, rank.min(n));
        let f = psd_factor(&h, TOL_RANK).unwrap();
        prop_assert!(f.ncols() <= n);
        prop_assert!(max_abs(&(&f * f.adjoint() - &h)) <= 1e-10 * (1.0 + operator_norm(&h)));
    }

    #[test]
    fn gram_matched_unitary_is_unitary_and_matches(seed in any::<u64>(), dim in 1usize..6, count in 1usize..6) {
        let mut rng = SeededRng::new(seed);
        let xs = rng.complex_gaussian_matrix(dim, count);
        let ys = haar_unitary(dim, &mut rng) * &xs;
        let m = gram_matched_unitary(&xs, &ys, TOL_GRAM).unwrap();
        prop_assert!(unitarity_defect(&m.v) <= 1e-10);
        prop_assert!(m.match_residual <= 1e-9 * (1.0 + operator_norm(&xs)));
    }

    #[test]
    fn operator_norm_is_unitarily_invariant(seed in any::<u64>(), rows in 1usize..6, cols in 1usize..6) {
        let mut rng = SeededRng::new(seed);
        let m = rng.complex_gaussian_matrix(rows, cols);
        let u = haar_unitary(rows, &mut rng);
        let v = haar_unitary(cols, &mut rng);
        let norm = operator_norm(&m);
        prop_assert!((operator_norm(&(&u * &m * &v)) - norm).abs() <= 1e-12 * (1.0 + norm));
    }

    #[test]
    fn kernel_apply_is_hermitian_symmetric(seed in any::<u64>(), n in 1usize..4, d in 1usize..3, k in 1usize..4) {
        let mut rng = SeededRng::new(seed);
        let kernel = random_kernel(&mut rng, n, d, k);
        let delta: Vec<Complex> = (0..k).map(|_| rng.complex_gaussian()).collect();
        let conj: Vec<Complex> = delta.iter().map(|z| z.conj()).collect();
        let i = rng.below(n);
        let j = rng.below(n);
        let lhs = kernel.apply(i, j, &delta).unwrap().adjoint();
        let rhs = kernel.apply(j, i, &conj).unwrap();
        prop_assert!(max_abs(&(lhs - rhs)) <= 1e-12 * (1.0 + kernel.components().iter().map(operator_norm).fold(0.0, f64::max)));
    }

    #[test]
    fn kolmogorov_factors_reconstruct(seed in any::<u64>(), n in 1usize..4, d in 1usize..3, k in 1usize..4) {
        let kernel = random_kernel(&mut SeededRng::new(seed), n, d, k);
        let fact = kernel.kolmogorov_decompose().unwrap();
        prop_assert!(fact.reconstruction_error(&kernel) <= 1e-9);
        for i in 0..n {
            for j in 0..n {
                let delta: Vec<Complex> = (0..k).map(|m| Complex::new(1.0 + m as f64, -0.5)).collect();
                let via_factors = fact.h(i) * fact.mu(&delta) * fact.h(j).adjoint();
                let direct = kernel.apply(i, j, &delta).unwrap();
                prop_assert!(max_abs(&(via_factors - direct)) <= 1e-8);
            }
        }
    }

    #[test]
    fn rho_is_a_star_homomorphism(seed in any::<u64>(), dims in proptest::collection::vec(1usize..4, 1..4)) {
        let mut rng = SeededRng::new(seed);
        let col = Colligation::random(dims.clone(), 1, 1, &mut rng);
        let e1 = EvalVector((0..dims.len()).map(|_| rng.disc_point(0.99)).collect());
        let e2 = EvalVector((0..dims.len()).map(|_| rng.disc_point(0.99)).collect());
        let product = EvalVector(e1.values().iter().zip(e2.values()).map(|(a, b)| a * b).collect());
        let r1 = col.rho_eval(&e1).unwrap();
        let r2 = col.rho_eval(&e2).unwrap();
        prop_assert!(max_abs(&(&r1 * &r2 - col.rho_eval(&product).unwrap())) <= 1e-15);
        prop_assert!(max_abs(&(r1.adjoint() - col.rho_eval(&e1.conj()).unwrap())) == 0.0);
    }

    #[test]
    fn transfer_functions_are_contractive(seed in any::<u64>(), dims in proptest::collection::vec(1usize..4, 1..3), d_in in 1usize..3, d_out in 1usize..3) {
        let mut rng = SeededRng::new(seed);
        let col = Colligation::random(dims.clone(), d_in, d_out, &mut rng);
        let e = EvalVector((0..dims.len()).map(|_| rng.disc_point(0.999)).collect());
        let f = col.transfer_eval(&e).unwrap();
        prop_assert!(operator_norm(&f) <= 1.0 + 1e-10);
        prop_assert!(max_abs(&(f.adjoint() - col.transfer_eval_adjoint(&e).unwrap())) <= 1e-12);
    }

    #[test]
    fn recentered_family_vanishes_at_center(seed in any::<u64>(), bidisc in any::<bool>()) {
        let fam = make_builtin(if bidisc { BuiltinFamily::Bidisc } else { BuiltinFamily::Disc });
        let mut rng = SeededRng::new(seed);
        let w0: Vec<Complex> = (0..fam.dimension()).map(|_| rng.disc_point(0.95)).collect();
        let rec = fam.recenter(&w0).unwrap();
        prop_assert!(rec.evaluate(&w0).unwrap().sup_norm() <= 1e-14);
        for z in rec.sample_interior(20, seed).unwrap() {
            prop_assert!(rec.evaluate(&z).unwrap().sup_norm() < 1.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn shrinking_targets_preserves_feasibility(seed in 0u64..10_000, s in 0.0f64..1.0) {
        let fam = make_builtin(BuiltinFamily::Bidisc);
        let (problem, _) = random_instance(&fam, 3, 1, &[1, 2], seed).unwrap();
        let opts = SolveOptions::default();
        prop_assert!(solve_decomposition(&problem, &opts).unwrap().is_feasible());
        let scaled = problem.scaled(Complex::new(s, 0.0)).unwrap();
        prop_assert!(solve_decomposition(&scaled, &opts).unwrap().is_feasible());
    }

    #[test]
    fn dykstra_cone_distance_never_increases(seed in 0u64..10_000) {
        let fam = make_builtin(BuiltinFamily::Bidisc);
        let mut rng = SeededRng::new(seed);
        let dims = [rng.range_inclusive(1, 3), rng.range_inclusive(1, 3)];
        let (problem, _) = random_instance(&fam, rng.range_inclusive(2, 4), rng.range_inclusive(1, 2), &dims, seed).unwrap();
        let opts = SolveOptions { record_history: true, max_iter: 400, ..SolveOptions::default() };
        let history = solve_decomposition(&problem, &opts).unwrap().history;
        for w in history.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12, "{} then {}", w[0], w[1]);
        }
    }

    #[test]
    fn pick_matrix_decides_scalar_disc_data(seed in any::<u64>(), n in 2usize..5) {
        let mut rng = SeededRng::new(seed);
        let mut points: Vec<Complex> = Vec::new();
        while points.len() < n {
            let p = rng.disc_point(0.9);
            if points.iter().all(|q| (q - p).norm() > 1e-3) {
                points.push(p);
            }
        }
        let problem = InterpolationProblem::new(
            make_builtin(BuiltinFamily::Disc),
            points.iter().map(|&p| vec![p]).collect(),
            (0..n).map(|_| ComplexMatrix::from_element(1, 1, rng.disc_point(0.95))).collect(),
        ).unwrap();
        let lambda = hermitian_eig(&pick_matrix(&problem).unwrap()).unwrap().min_eigenvalue();
        prop_assume!(lambda.abs() > 1e-6);
        let report = solve_decomposition(&problem, &SolveOptions::default()).unwrap();
        prop_assert_eq!(report.is_feasible(), lambda > 0.0);
    }
}
