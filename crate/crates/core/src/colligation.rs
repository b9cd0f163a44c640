//! Unitary colligations over a test family and their transfer functions.

use crate::agler_solver::InterpolationProblem;
use crate::cpkernel::block_diagonal_rep;
use crate::error::{Error, Result};
use crate::numerics::{block, identity, solve, unitarity_defect, Complex, ComplexMatrix};
use crate::rng::SeededRng;
use crate::testfam::{DomainKind, EvalVector, Point, TestFunctionFamily};

/// Allowed deviation of `U` from unitarity (or isometry when rectangular).
pub const TOL_UNITARY: f64 = 1e-10;
/// Radius of the polydisc from which random data points are drawn.
pub const DATA_RADIUS: f64 = 0.85;

/// `U = [[A, B], [C, D]]` from `X (+) U_in` to `X (+) Y_out` with the state
/// space split as `X = C^{x_1} (+) ... (+) C^{x_K}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Colligation {
    state_dims: Vec<usize>,
    u: ComplexMatrix,
    d_in: usize,
    d_out: usize,
}

impl Colligation {
    /// Square `U` must be unitary. A rectangular `U` must be an isometry
    /// (more rows) or a co-isometry (more columns).
    pub fn new(state_dims: Vec<usize>, u: ComplexMatrix, d_in: usize, d_out: usize) -> Result<Self> {
        let x: usize = state_dims.iter().sum();
        if u.shape() != (x + d_out, x + d_in) {
            return Err(Error::Dimension(format!(
                "colligation matrix {:?}, expected {}x{}",
                u.shape(),
                x + d_out,
                x + d_in
            )));
        }
        let defect = if u.nrows() == u.ncols() {
            unitarity_defect(&u)
        } else if u.nrows() > u.ncols() {
            crate::numerics::operator_norm(&(u.adjoint() * &u - identity(u.ncols())))
        } else {
            crate::numerics::operator_norm(&(&u * u.adjoint() - identity(u.nrows())))
        };
        if defect > TOL_UNITARY {
            return Err(Error::Dimension(format!(
                "colligation matrix is not unitary (defect {defect:e})"
            )));
        }
        Ok(Self {
            state_dims,
            u,
            d_in,
            d_out,
        })
    }

    /// Haar-distributed unitary of order `x + d` cut down to the colligation
    /// shape (the cut is an isometry or co-isometry when `d_in != d_out`).
    pub fn random(state_dims: Vec<usize>, d_in: usize, d_out: usize, rng: &mut SeededRng) -> Self {
        let x: usize = state_dims.iter().sum();
        let order = x + d_in.max(d_out);
        let haar = haar_unitary(order, rng);
        let u = block(&haar, 0, 0, x + d_out, x + d_in);
        Self {
            state_dims,
            u,
            d_in,
            d_out,
        }
    }

    pub fn state_dims(&self) -> &[usize] {
        &self.state_dims
    }

    pub fn state_dim(&self) -> usize {
        self.state_dims.iter().sum()
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.u
    }

    pub fn a(&self) -> ComplexMatrix {
        let x = self.state_dim();
        block(&self.u, 0, 0, x, x)
    }

    pub fn b(&self) -> ComplexMatrix {
        let x = self.state_dim();
        block(&self.u, 0, x, x, self.d_in)
    }

    pub fn c(&self) -> ComplexMatrix {
        let x = self.state_dim();
        block(&self.u, x, 0, self.d_out, x)
    }

    pub fn d(&self) -> ComplexMatrix {
        let x = self.state_dim();
        block(&self.u, x, x, self.d_out, self.d_in)
    }

    fn check_eval(&self, e: &EvalVector) -> Result<()> {
        if e.len() != self.state_dims.len() {
            return Err(Error::Dimension(format!(
                "evaluation vector of length {} for a colligation over {} test functions",
                e.len(),
                self.state_dims.len()
            )));
        }
        Ok(())
    }

    /// `rho(E) = diag(E_1 I_{x_1}, ..., E_K I_{x_K})`.
    pub fn rho_eval(&self, e: &EvalVector) -> Result<ComplexMatrix> {
        self.check_eval(e)?;
        Ok(block_diagonal_rep(&self.state_dims, e.values()))
    }

    /// `D + C rho(E) (I - A rho(E))^{-1} B`.
    pub fn transfer_eval(&self, e: &EvalVector) -> Result<ComplexMatrix> {
        let rho = self.rho_eval(e)?;
        let x = self.state_dim();
        let resolvent = identity(x) - self.a() * &rho;
        let state = solve(&resolvent, &self.b())?;
        Ok(self.d() + self.c() * rho * state)
    }

    /// `D* + B* (I - rho(E)* A*)^{-1} rho(E)* C*`, the adjoint of
    /// [`Colligation::transfer_eval`] at the same point.
    pub fn transfer_eval_adjoint(&self, e: &EvalVector) -> Result<ComplexMatrix> {
        let rho_star = self.rho_eval(e)?.adjoint();
        let x = self.state_dim();
        let resolvent = identity(x) - &rho_star * self.a().adjoint();
        let state = solve(&resolvent, &(rho_star * self.c().adjoint()))?;
        Ok(self.d().adjoint() + self.b().adjoint() * state)
    }
}

/// Haar unitary from the QR factorization of a complex Gaussian matrix, with
/// the phases of `R`'s diagonal moved into `Q` so the factorization is unique.
pub fn haar_unitary(order: usize, rng: &mut SeededRng) -> ComplexMatrix {
    if order == 0 {
        return ComplexMatrix::zeros(0, 0);
    }
    let g = rng.complex_gaussian_matrix(order, order);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..order {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() == 0.0 {
            Complex::new(1.0, 0.0)
        } else {
            rjj / rjj.norm()
        };
        for i in 0..order {
            q[(i, j)] *= phase;
        }
    }
    q
}

fn random_points(family: &TestFunctionFamily, n: usize, rng: &mut SeededRng) -> Result<Vec<Point>> {
    if family.domain.kind == DomainKind::Custom {
        return Err(Error::Unsupported("random points in a custom domain".into()));
    }
    let m = family.dimension();
    let mut points: Vec<Point> = Vec::with_capacity(n);
    while points.len() < n {
        let p: Point = (0..m).map(|_| rng.disc_point(DATA_RADIUS)).collect();
        let distinct = points
            .iter()
            .all(|q| q.iter().zip(&p).any(|(a, b)| (a - b).norm() > 1e-6));
        if distinct && family.contains(&p) {
            points.push(p);
        }
    }
    Ok(points)
}

/// Solvable interpolation data `z_i -> f(z_i)` at given points, where `f` is
/// the transfer function of a random colligation with square `d x d` blocks.
pub fn random_instance_at(
    family: &TestFunctionFamily,
    points: Vec<Point>,
    d: usize,
    state_dims: &[usize],
    seed: u64,
) -> Result<(InterpolationProblem, Colligation)> {
    if state_dims.len() != family.len() {
        return Err(Error::Dimension(format!(
            "{} state blocks for {} test functions",
            state_dims.len(),
            family.len()
        )));
    }
    let mut rng = SeededRng::new(seed);
    let colligation = Colligation::random(state_dims.to_vec(), d, d, &mut rng);
    let targets = points
        .iter()
        .map(|p| colligation.transfer_eval(&family.evaluate(p)?))
        .collect::<Result<Vec<_>>>()?;
    let problem = InterpolationProblem::new(family.clone(), points, targets)?;
    Ok((problem, colligation))
}

/// Random solvable instance with `n` distinct random points.
pub fn random_instance(
    family: &TestFunctionFamily,
    n: usize,
    d: usize,
    state_dims: &[usize],
    seed: u64,
) -> Result<(InterpolationProblem, Colligation)> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidProblem("random instances need n >= 1 and d >= 1".into()));
    }
    // Points come from a stream separate from the colligation's.
    let mut rng = SeededRng::new(seed ^ 0x9e37_79b9_7f4a_7c15);
    let points = random_points(family, n, &mut rng)?;
    random_instance_at(family, points, d, state_dims, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{c, cr, max_abs, operator_norm};
    use crate::testfam::{make_builtin, BuiltinFamily};

    fn scalar_shift() -> Colligation {
        let u = ComplexMatrix::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)]);
        Colligation::new(vec![1], u, 1, 1).unwrap()
    }

    #[test]
    fn rho_examples() {
        let col = Colligation::random(vec![2], 1, 1, &mut SeededRng::new(0));
        assert_eq!(max_abs(&col.rho_eval(&EvalVector::zeros(1)).unwrap()), 0.0);
        let r = col.rho_eval(&EvalVector(vec![cr(0.5)])).unwrap();
        assert!(max_abs(&(r - identity(2) * cr(0.5))) == 0.0);
        let col = Colligation::random(vec![1, 1], 1, 1, &mut SeededRng::new(0));
        let r = col.rho_eval(&EvalVector(vec![cr(0.3), c(0.0, -0.4)])).unwrap();
        assert_eq!(r[(0, 0)], cr(0.3));
        assert_eq!(r[(1, 1)], c(0.0, -0.4));
        assert_eq!(r[(0, 1)], cr(0.0));
        assert!(col.rho_eval(&EvalVector::zeros(3)).is_err());
    }

    #[test]
    fn shift_colligation_is_identity_function() {
        let col = scalar_shift();
        for z in [cr(0.5), c(0.2, -0.7), cr(0.0)] {
            let f = col.transfer_eval(&EvalVector(vec![z])).unwrap();
            assert!((f[(0, 0)] - z).norm() < 1e-15);
        }
        let g = col.transfer_eval_adjoint(&EvalVector(vec![cr(0.5)])).unwrap();
        assert!((g[(0, 0)] - cr(0.5)).norm() < 1e-15);
    }

    #[test]
    fn empty_state_is_constant() {
        let mut rng = SeededRng::new(4);
        let col = Colligation::random(vec![0, 0], 2, 2, &mut rng);
        let e = EvalVector(vec![cr(0.3), cr(-0.1)]);
        assert_eq!(col.transfer_eval(&e).unwrap(), col.d());
        assert_eq!(col.transfer_eval_adjoint(&e).unwrap(), col.d().adjoint());
    }

    #[test]
    fn value_at_common_zero_is_d() {
        let col = Colligation::random(vec![2, 1], 2, 2, &mut SeededRng::new(8));
        let f = col.transfer_eval(&EvalVector::zeros(2)).unwrap();
        assert!(max_abs(&(f - col.d())) < 1e-15);
    }

    #[test]
    fn adjoint_form_agrees() {
        let mut rng = SeededRng::new(12);
        let col = Colligation::random(vec![2, 3], 2, 2, &mut rng);
        let e = EvalVector(vec![rng.disc_point(0.9), rng.disc_point(0.9)]);
        let f = col.transfer_eval(&e).unwrap();
        let g = col.transfer_eval_adjoint(&e).unwrap();
        assert!(max_abs(&(f.adjoint() - g)) < 1e-12);
        assert!(operator_norm(&f) <= 1.0 + 1e-10);
    }

    #[test]
    fn haar_is_unitary() {
        let q = haar_unitary(6, &mut SeededRng::new(1));
        assert!(unitarity_defect(&q) < 1e-13);
    }

    #[test]
    fn rectangular_colligation_is_isometric() {
        let col = Colligation::random(vec![1, 2], 1, 3, &mut SeededRng::new(3));
        assert_eq!(col.matrix().shape(), (6, 4));
        assert!(Colligation::new(vec![1, 2], col.matrix().clone(), 1, 3).is_ok());
        let e = EvalVector(vec![cr(0.6), c(0.1, 0.7)]);
        assert!(operator_norm(&col.transfer_eval(&e).unwrap()) <= 1.0 + 1e-12);
    }

    #[test]
    fn random_instances_are_contractive_and_deterministic() {
        let fam = make_builtin(BuiltinFamily::Bidisc);
        let (p, col) = random_instance(&fam, 3, 2, &[2, 1], 17).unwrap();
        assert!(p.targets().iter().all(|b| operator_norm(b) <= 1.0 + 1e-12));
        let (q, col2) = random_instance(&fam, 3, 2, &[2, 1], 17).unwrap();
        assert_eq!(p.points(), q.points());
        assert_eq!(p.targets(), q.targets());
        assert_eq!(col, col2);

        let (p, col) = random_instance_at(&fam, vec![vec![cr(0.0), cr(0.0)]], 2, &[1, 1], 3).unwrap();
        assert!(max_abs(&(&p.targets()[0] - col.d())) < 1e-15);
    }
}
