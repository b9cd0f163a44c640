//! The lurking-isometry construction.
//!
//! Given interpolation data and an Agler decomposition, the Kolmogorov
//! factorization `h` supplies two families of generators whose Gram matrices
//! agree. The unitary matching them extends to a unitary `Q` on
//! `L (+) M1 (+) Y -> L (+) M2 (+) U`, and the auxiliary function
//!
//! ```text
//! G(z) = Q22* + Q12* (I - mu(E(z)) Q11*)^{-1} mu(E(z)) Q21*
//! ```
//!
//! maps `M2 (+) U` to `M1 (+) Y`. Its `U -> Y` corner interpolates the data and
//! its `M2 -> Y` corner vanishes at the data points.

use crate::agler_solver::{residual, InterpolationProblem, DEFAULT_TOL_SOLVE};
use crate::cpkernel::{block_diagonal_rep, CpKernel, KolmogorovFactorization};
use crate::error::{Error, Result};
use crate::numerics::{
    block, gram_matched_unitary, identity, operator_norm, orthonormal_complement, put_block, solve, unitarity_defect,
    ComplexMatrix, TOL_GRAM,
};
use crate::testfam::EvalVector;

/// Unitarity required of `Q`, whether built or loaded.
pub const TOL_Q_UNITARY: f64 = 1e-9;

/// `Q` in block form together with the dimensions of its coordinate spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryFunction {
    state_dims: Vec<usize>,
    dim_m1: usize,
    dim_m2: usize,
    d_in: usize,
    d_out: usize,
    q11: ComplexMatrix,
    q12: ComplexMatrix,
    q21: ComplexMatrix,
    q22: ComplexMatrix,
    decomposition_residual: f64,
}

/// `G(z)` split along `M1 (+) Y` (rows) and `M2 (+) U` (columns).
#[derive(Debug, Clone)]
pub struct GValue {
    pub g11: ComplexMatrix,
    pub g12: ComplexMatrix,
    pub g21: ComplexMatrix,
    pub g22: ComplexMatrix,
}

impl GValue {
    pub fn assembled(&self) -> ComplexMatrix {
        let (m1, m2) = self.g11.shape();
        let (y, u) = self.g22.shape();
        let mut g = ComplexMatrix::zeros(m1 + y, m2 + u);
        put_block(&mut g, 0, 0, &self.g11);
        put_block(&mut g, 0, m2, &self.g12);
        put_block(&mut g, m1, 0, &self.g21);
        put_block(&mut g, m1, m2, &self.g22);
        g
    }
}

impl AuxiliaryFunction {
    /// Reassembles an auxiliary function from stored blocks, checking shapes
    /// and unitarity of `Q`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_blocks(
        state_dims: Vec<usize>,
        dim_m1: usize,
        dim_m2: usize,
        d_in: usize,
        d_out: usize,
        q11: ComplexMatrix,
        q12: ComplexMatrix,
        q21: ComplexMatrix,
        q22: ComplexMatrix,
        decomposition_residual: f64,
    ) -> Result<Self> {
        let aux = Self::from_blocks_unverified(
            state_dims,
            dim_m1,
            dim_m2,
            d_in,
            d_out,
            q11,
            q12,
            q21,
            q22,
            decomposition_residual,
        )?;
        let defect = aux.unitarity_defect();
        if !(defect <= TOL_Q_UNITARY) {
            return Err(Error::DecompositionInvalid(format!(
                "colligation Q is not unitary (defect {defect:e})"
            )));
        }
        Ok(aux)
    }

    /// Like [`AuxiliaryFunction::from_blocks`] but without the unitarity
    /// check, so damaged inputs can be evaluated and caught downstream.
    #[allow(clippy::too_many_arguments)]
    pub fn from_blocks_unverified(
        state_dims: Vec<usize>,
        dim_m1: usize,
        dim_m2: usize,
        d_in: usize,
        d_out: usize,
        q11: ComplexMatrix,
        q12: ComplexMatrix,
        q21: ComplexMatrix,
        q22: ComplexMatrix,
        decomposition_residual: f64,
    ) -> Result<Self> {
        let l: usize = state_dims.iter().sum();
        let expect = [
            ("Q11", q11.shape(), (l, l)),
            ("Q12", q12.shape(), (l, dim_m1 + d_out)),
            ("Q21", q21.shape(), (dim_m2 + d_in, l)),
            ("Q22", q22.shape(), (dim_m2 + d_in, dim_m1 + d_out)),
        ];
        for (name, got, want) in expect {
            if got != want {
                return Err(Error::Dimension(format!("{name} is {got:?}, expected {want:?}")));
            }
        }
        if dim_m1 + d_out != dim_m2 + d_in {
            return Err(Error::Dimension(format!(
                "domain M1+Y = {} but range M2+U = {}",
                dim_m1 + d_out,
                dim_m2 + d_in
            )));
        }
        Ok(Self {
            state_dims,
            dim_m1,
            dim_m2,
            d_in,
            d_out,
            q11,
            q12,
            q21,
            q22,
            decomposition_residual,
        })
    }

    /// Block sizes `r_k` of the factorization space `L`.
    pub fn state_dims(&self) -> &[usize] {
        &self.state_dims
    }

    pub fn state_dim(&self) -> usize {
        self.state_dims.iter().sum()
    }

    pub fn dim_m1(&self) -> usize {
        self.dim_m1
    }

    pub fn dim_m2(&self) -> usize {
        self.dim_m2
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn q11(&self) -> &ComplexMatrix {
        &self.q11
    }

    pub fn q12(&self) -> &ComplexMatrix {
        &self.q12
    }

    pub fn q21(&self) -> &ComplexMatrix {
        &self.q21
    }

    pub fn q22(&self) -> &ComplexMatrix {
        &self.q22
    }

    /// Residual of the decomposition the construction started from.
    pub fn decomposition_residual(&self) -> f64 {
        self.decomposition_residual
    }

    /// `Q` with domain `L (+) M1 (+) Y` and range `L (+) M2 (+) U`.
    pub fn q(&self) -> ComplexMatrix {
        let l = self.state_dim();
        let size = l + self.dim_m1 + self.d_out;
        let mut q = ComplexMatrix::zeros(size, size);
        put_block(&mut q, 0, 0, &self.q11);
        put_block(&mut q, 0, l, &self.q12);
        put_block(&mut q, l, 0, &self.q21);
        put_block(&mut q, l, l, &self.q22);
        q
    }

    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.q())
    }

    /// Replaces `Q` by `Q + delta` without any check. Used to build corrupted
    /// inputs for negative controls.
    pub fn perturbed(&self, delta: &ComplexMatrix) -> Result<Self> {
        let l = self.state_dim();
        let q = self.q();
        if delta.shape() != q.shape() {
            return Err(Error::Dimension(format!(
                "perturbation {:?} for Q of shape {:?}",
                delta.shape(),
                q.shape()
            )));
        }
        let q = q + delta;
        let rest = q.nrows() - l;
        Ok(Self {
            q11: block(&q, 0, 0, l, l),
            q12: block(&q, 0, l, l, rest),
            q21: block(&q, l, 0, rest, l),
            q22: block(&q, l, l, rest, rest),
            ..self.clone()
        })
    }

    /// `G(z)` from the evaluation vector `E(z)`.
    pub fn eval(&self, e: &EvalVector) -> Result<GValue> {
        if e.len() != self.state_dims.len() {
            return Err(Error::Dimension(format!(
                "evaluation vector of length {} for {} test functions",
                e.len(),
                self.state_dims.len()
            )));
        }
        if !(e.sup_norm() < 1.0) {
            return Err(Error::Domain(format!(
                "evaluation vector has sup norm {} >= 1",
                e.sup_norm()
            )));
        }
        let l = self.state_dim();
        let mu = block_diagonal_rep(&self.state_dims, e.values());
        let resolvent = identity(l) - &mu * self.q11.adjoint();
        let state = solve(&resolvent, &(mu * self.q21.adjoint()))?;
        let g = self.q22.adjoint() + self.q12.adjoint() * state;
        let (m1, m2) = (self.dim_m1, self.dim_m2);
        Ok(GValue {
            g11: block(&g, 0, 0, m1, m2),
            g12: block(&g, 0, m2, m1, self.d_in),
            g21: block(&g, m1, 0, self.d_out, m2),
            g22: block(&g, m1, m2, self.d_out, self.d_in),
        })
    }
}

/// Builds `Q` from a decomposition whose residual is at most
/// [`DEFAULT_TOL_SOLVE`].
pub fn build_aux(problem: &InterpolationProblem, decomposition: &CpKernel) -> Result<AuxiliaryFunction> {
    build_aux_with(problem, decomposition, DEFAULT_TOL_SOLVE)
}

pub fn build_aux_with(
    problem: &InterpolationProblem,
    decomposition: &CpKernel,
    tol_solve: f64,
) -> Result<AuxiliaryFunction> {
    if decomposition.len() != problem.family().len()
        || decomposition.points() != problem.len()
        || decomposition.block_size() != problem.d_out()
    {
        return Err(Error::Dimension(format!(
            "decomposition with {} components over {} points of block size {} for a problem with {} test functions, {} points, d_out {}",
            decomposition.len(),
            decomposition.points(),
            decomposition.block_size(),
            problem.family().len(),
            problem.len(),
            problem.d_out()
        )));
    }
    let res = residual(problem, decomposition)?;
    if !(res <= tol_solve) {
        return Err(Error::DecompositionInvalid(format!(
            "decomposition residual {res:e} exceeds {tol_solve:e}"
        )));
    }
    let min_eig = decomposition.min_eigenvalue();
    if min_eig < -tol_solve {
        return Err(Error::DecompositionInvalid(format!(
            "decomposition has eigenvalue {min_eig:e}"
        )));
    }
    let factorization = decomposition.kolmogorov_decompose_with(tol_solve.max(1e-12))?;
    assemble(problem, &factorization, res)
}

fn assemble(
    problem: &InterpolationProblem,
    fac: &KolmogorovFactorization,
    decomposition_residual: f64,
) -> Result<AuxiliaryFunction> {
    let (n, d_out, d_in) = (problem.len(), problem.d_out(), problem.d_in());
    let dims = fac.block_dims();
    let l = fac.total_dim();
    let (lx, lu) = (l + d_out, l + d_in);

    // Generators, data index outer and basis vector inner:
    // mu(E_i)* h_i* y (+) y  in L (+) Y  and  h_i* y (+) B_i* y  in L (+) U.
    let mut from = ComplexMatrix::zeros(lx, n * d_out);
    let mut to = ComplexMatrix::zeros(lu, n * d_out);
    for (i, (e, b)) in problem.evals().iter().zip(problem.targets()).enumerate() {
        let h_star = fac.h(i).adjoint();
        let mu_star = fac.mu(e.values()).adjoint();
        let cols = i * d_out;
        put_block(&mut from, 0, cols, &(mu_star * &h_star));
        put_block(&mut from, l, cols, &identity(d_out));
        put_block(&mut to, 0, cols, &h_star);
        put_block(&mut to, l, cols, &b.adjoint());
    }
    let tol_gram = TOL_GRAM.max(10.0 * decomposition_residual);
    let matched = gram_matched_unitary(&from, &to, tol_gram).map_err(|e| match e {
        Error::GramMismatch { mismatch, tolerance } => Error::DecompositionInvalid(format!(
            "generator Gram matrices differ by {mismatch:e} (tolerance {tolerance:e})"
        )),
        other => other,
    })?;
    let n2 = &matched.basis_domain;
    let n1 = &matched.basis_range;
    let m2 = orthonormal_complement(n2);
    let m1 = orthonormal_complement(n1);
    let (dim_m1, dim_m2) = (m1.ncols(), m2.ncols());

    // Q on (L (+) Y) (+) M1 -> (L (+) U) (+) M2:
    //   n2 + m2 + m1  |->  (V n2 + m1) (+) m2.
    let size = lx + dim_m1;
    debug_assert_eq!(size, lu + dim_m2);
    let mut q = ComplexMatrix::zeros(size, size);
    put_block(&mut q, 0, 0, &(n1 * &matched.v * n2.adjoint()));
    put_block(&mut q, 0, lx, &m1);
    put_block(&mut q, lu, 0, &m2.adjoint());

    // Reorder to domain L, M1, Y and range L, M2, U.
    let domain: Vec<usize> = (0..l).chain(lx..lx + dim_m1).chain(l..lx).collect();
    let range: Vec<usize> = (0..l).chain(lu..lu + dim_m2).chain(l..lu).collect();
    let q = ComplexMatrix::from_fn(size, size, |r, c| q[(range[r], domain[c])]);
    let rest = size - l;
    AuxiliaryFunction::from_blocks(
        dims,
        dim_m1,
        dim_m2,
        d_in,
        d_out,
        block(&q, 0, 0, l, l),
        block(&q, 0, l, l, rest),
        block(&q, l, 0, rest, l),
        block(&q, l, l, rest, rest),
        decomposition_residual,
    )
}

pub fn eval_g(aux: &AuxiliaryFunction, e: &EvalVector) -> Result<GValue> {
    aux.eval(e)
}

/// The interpolant obtained from the zero parameter, `G22(z)`.
pub fn central_interpolant(aux: &AuxiliaryFunction, e: &EvalVector) -> Result<ComplexMatrix> {
    Ok(aux.eval(e)?.g22)
}

/// Diagnostics of the identities `G` must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GIdentities {
    /// `max_i |G22(z_i) - B_i|`.
    pub g22_residual: f64,
    /// `max_i |G21(z_i)|`.
    pub g21_max: f64,
    /// `|G11(w0)|` when the family has a common zero.
    pub g11_at_common_zero: Option<f64>,
    /// Largest sampled `|G(z)|`.
    pub g_norm_max: f64,
    /// Largest sampled `|G11(z)|`.
    pub g11_norm_max: f64,
    pub samples: usize,
}

/// Checks the data-point identities and samples `|G|` and `|G11|` at
/// `samples` interior points drawn with `seed`.
pub fn g_identities(
    problem: &InterpolationProblem,
    aux: &AuxiliaryFunction,
    samples: usize,
    seed: u64,
) -> Result<GIdentities> {
    let mut g22_residual = 0.0_f64;
    let mut g21_max = 0.0_f64;
    for (e, b) in problem.evals().iter().zip(problem.targets()) {
        let g = aux.eval(e)?;
        g22_residual = g22_residual.max(operator_norm(&(&g.g22 - b)));
        g21_max = g21_max.max(operator_norm(&g.g21));
    }
    let family = problem.family();
    let g11_at_common_zero = match &family.common_zero {
        Some(w0) => Some(operator_norm(&aux.eval(&family.evaluate(w0)?)?.g11)),
        None => None,
    };
    let mut g_norm_max = 0.0_f64;
    let mut g11_norm_max = 0.0_f64;
    if samples > 0 {
        for z in family.sample_interior(samples, seed)? {
            let g = aux.eval(&family.evaluate(&z)?)?;
            g_norm_max = g_norm_max.max(operator_norm(&g.assembled()));
            g11_norm_max = g11_norm_max.max(operator_norm(&g.g11));
        }
    }
    Ok(GIdentities {
        g22_residual,
        g21_max,
        g11_at_common_zero,
        g_norm_max,
        g11_norm_max,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agler_solver::{solve_decomposition, SolveOptions, SolveStatus};
    use crate::colligation::random_instance;
    use crate::numerics::{c, cr, Complex};
    use crate::testfam::{make_builtin, BuiltinFamily};

    fn scalar(v: Complex) -> ComplexMatrix {
        ComplexMatrix::from_element(1, 1, v)
    }

    fn disc_problem(points: &[f64], targets: &[f64]) -> InterpolationProblem {
        InterpolationProblem::new(
            make_builtin(BuiltinFamily::Disc),
            points.iter().map(|&p| vec![cr(p)]).collect(),
            targets.iter().map(|&t| scalar(cr(t))).collect(),
        )
        .unwrap()
    }

    fn solved(problem: &InterpolationProblem) -> CpKernel {
        let report = solve_decomposition(problem, &SolveOptions::default()).unwrap();
        assert_eq!(report.status, SolveStatus::Feasible);
        report.decomposition.unwrap()
    }

    #[test]
    fn one_point_origin_by_hand() {
        // Gamma = [[1]]: L = C, generators 0 (+) 1 and 1 (+) 0, Q a 3x3 unitary.
        let p = disc_problem(&[0.0], &[0.0]);
        let aux = build_aux(&p, &solved(&p)).unwrap();
        assert_eq!(aux.state_dims(), &[1]);
        assert_eq!((aux.dim_m1(), aux.dim_m2()), (1, 1));
        assert_eq!(aux.q().shape(), (3, 3));
        assert!(aux.unitarity_defect() <= 1e-12);
        let g0 = aux.eval(&EvalVector(vec![cr(0.0)])).unwrap();
        assert!(operator_norm(&g0.g11) <= 1e-12);
        assert!(operator_norm(&g0.g22) <= 1e-12);
        let z = EvalVector(vec![c(0.3, -0.4)]);
        assert!(operator_norm(&aux.eval(&z).unwrap().assembled()) <= 1.0 + 1e-12);
    }

    #[test]
    fn rank_one_pick_case_completes() {
        let p = disc_problem(&[0.0, 0.5], &[0.0, 0.5]);
        let aux = build_aux(&p, &solved(&p)).unwrap();
        assert_eq!(aux.state_dims(), &[1]);
        assert!(aux.unitarity_defect() <= 1e-9);
        let ids = g_identities(&p, &aux, 50, 1).unwrap();
        assert!(ids.g22_residual <= 1e-8, "{ids:?}");
        assert!(ids.g21_max <= 1e-8, "{ids:?}");
    }

    #[test]
    fn loose_decomposition_is_rejected() {
        let p = disc_problem(&[0.0, 0.5], &[0.0, 0.25]);
        let good = solved(&p);
        let mut comps = good.components().to_vec();
        comps[0][(0, 0)] += cr(1e-4);
        let bad = CpKernel::new(2, 1, comps).unwrap();
        assert!(matches!(build_aux(&p, &bad), Err(Error::DecompositionInvalid(_))));
    }

    #[test]
    fn bidisc_identities_and_restriction() {
        let fam = make_builtin(BuiltinFamily::Bidisc);
        let (p, _) = random_instance(&fam, 3, 2, &[2, 1], 77).unwrap();
        let kernel = solved(&p);
        let aux = build_aux(&p, &kernel).unwrap();
        let ids = g_identities(&p, &aux, 100, 5).unwrap();
        assert!(aux.unitarity_defect() <= 1e-9);
        assert!(ids.g22_residual <= 1e-7, "{ids:?}");
        assert!(ids.g21_max <= 1e-7, "{ids:?}");
        assert!(ids.g11_at_common_zero.unwrap() <= 1e-10, "{ids:?}");
        assert!(ids.g_norm_max <= 1.0 + 1e-9 && ids.g11_norm_max < 1.0, "{ids:?}");

        // Q11 (mu_i* h_i* y) + Q12 (0 (+) y) = h_i* y at every data point.
        let fac = kernel.kolmogorov_decompose_with(DEFAULT_TOL_SOLVE).unwrap();
        assert_eq!(fac.block_dims(), aux.state_dims());
        for (i, e) in p.evals().iter().enumerate() {
            let h_star = fac.h(i).adjoint();
            let a = fac.mu(e.values()).adjoint() * &h_star;
            let mut lifted = ComplexMatrix::zeros(aux.dim_m1() + p.d_out(), p.d_out());
            put_block(&mut lifted, aux.dim_m1(), 0, &identity(p.d_out()));
            let lhs = aux.q11() * a + aux.q12() * lifted;
            assert!(operator_norm(&(lhs - h_star)) <= 1e-8);
        }
    }

    #[test]
    fn perturbed_q_is_no_longer_unitary() {
        let p = disc_problem(&[0.0], &[0.0]);
        let aux = build_aux(&p, &solved(&p)).unwrap();
        let delta = ComplexMatrix::from_element(3, 3, cr(1e-2));
        let bad = aux.perturbed(&delta).unwrap();
        assert!(bad.unitarity_defect() > 1e-3);
    }
}
