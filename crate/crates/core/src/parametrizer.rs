//! Interpolants from the auxiliary function.
//!
//! Every Schur-Agler parameter `t: M1 -> M2` yields an interpolant
//! `f_t = G22 + G21 (I - t G11)^{-1} t G12`. This module evaluates the family
//! and checks candidates against the data.

use crate::agler_solver::{solve_decomposition, InterpolationProblem, SolveOptions, SolveStatus};
use crate::aux_function::AuxiliaryFunction;
use crate::colligation::Colligation;
use crate::error::{Error, Result};
use crate::numerics::{condition_number, identity, operator_norm, solve, ComplexMatrix};
use crate::rng::SeededRng;
use crate::testfam::{EvalVector, Point};

/// Resolvent condition number above which an evaluation is flagged.
pub const NEAR_SINGULAR_CONDITION: f64 = 1e12;
/// Acceptance threshold for both the interpolation residual and the excess
/// of the sampled norm over 1.
pub const VERIFY_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub enum SchurParameter {
    /// A contraction `M1 -> M2`, i.e. a `dim_m2 x dim_m1` matrix of norm <= 1.
    Constant(ComplexMatrix),
    /// Transfer function of a colligation over the same test functions.
    Colligation(Colligation),
}

impl SchurParameter {
    pub fn constant(t: ComplexMatrix) -> Result<Self> {
        let norm = operator_norm(&t);
        if norm > 1.0 + 1e-12 {
            return Err(Error::InvalidProblem(format!("constant parameter has norm {norm} > 1")));
        }
        Ok(Self::Constant(t))
    }

    pub fn zero(aux: &AuxiliaryFunction) -> Self {
        Self::Constant(ComplexMatrix::zeros(aux.dim_m2(), aux.dim_m1()))
    }

    /// `(rows, cols)` of `t(z)`.
    pub fn shape(&self) -> (usize, usize) {
        match self {
            Self::Constant(t) => t.shape(),
            Self::Colligation(c) => (c.d_out(), c.d_in()),
        }
    }

    pub fn eval(&self, e: &EvalVector) -> Result<ComplexMatrix> {
        match self {
            Self::Constant(t) => Ok(t.clone()),
            Self::Colligation(c) => c.transfer_eval(e),
        }
    }

    fn check_against(&self, aux: &AuxiliaryFunction) -> Result<()> {
        let want = (aux.dim_m2(), aux.dim_m1());
        if self.shape() != want {
            return Err(Error::Dimension(format!(
                "parameter of shape {:?}, expected {want:?} (M1 -> M2)",
                self.shape()
            )));
        }
        if let Self::Colligation(c) = self {
            if c.state_dims().len() != aux.state_dims().len() {
                return Err(Error::Dimension(format!(
                    "parameter colligation over {} test functions, expected {}",
                    c.state_dims().len(),
                    aux.state_dims().len()
                )));
            }
        }
        Ok(())
    }
}

/// `f_t(z)` together with the conditioning of `I - t(z) G11(z)`.
#[derive(Debug, Clone)]
pub struct ParamValue {
    pub value: ComplexMatrix,
    pub resolvent_condition: f64,
}

impl ParamValue {
    pub fn near_singular(&self) -> bool {
        !(self.resolvent_condition <= NEAR_SINGULAR_CONDITION)
    }
}

pub fn param_eval(aux: &AuxiliaryFunction, t: &SchurParameter, e: &EvalVector) -> Result<ComplexMatrix> {
    Ok(param_eval_detailed(aux, t, e)?.value)
}

pub fn param_eval_detailed(aux: &AuxiliaryFunction, t: &SchurParameter, e: &EvalVector) -> Result<ParamValue> {
    t.check_against(aux)?;
    let g = aux.eval(e)?;
    let tz = t.eval(e)?;
    let resolvent = identity(aux.dim_m2()) - &tz * &g.g11;
    let resolvent_condition = condition_number(&resolvent);
    let correction = solve(&resolvent, &(tz * &g.g12))?;
    Ok(ParamValue {
        value: g.g22 + g.g21 * correction,
        resolvent_condition,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct VerificationReport {
    /// `max_i |f(z_i) - B_i|`.
    pub interp_residual: f64,
    /// Largest operator norm of `f` over the sampled points.
    pub schur_norm_max: f64,
    pub samples: usize,
    pub decomposition_residual: f64,
    /// Largest condition number of `I - t G11` met during the run.
    pub max_resolvent_condition: f64,
    pub pass: bool,
}

/// Evaluates `f_t` at the data points and at `samples` interior points.
///
/// Failures of the check are reported, not returned as errors; an `Err` means
/// the inputs could not be evaluated at all.
pub fn verify(
    problem: &InterpolationProblem,
    aux: &AuxiliaryFunction,
    t: &SchurParameter,
    samples: usize,
    seed: u64,
) -> Result<VerificationReport> {
    if (aux.d_out(), aux.d_in()) != (problem.d_out(), problem.d_in())
        || aux.state_dims().len() != problem.family().len()
    {
        return Err(Error::Dimension(format!(
            "auxiliary function for {}x{} targets over {} test functions, problem has {}x{} over {}",
            aux.d_out(),
            aux.d_in(),
            aux.state_dims().len(),
            problem.d_out(),
            problem.d_in(),
            problem.family().len()
        )));
    }
    let mut interp_residual = 0.0_f64;
    let mut max_condition = 1.0_f64;
    for (e, b) in problem.evals().iter().zip(problem.targets()) {
        let f = param_eval_detailed(aux, t, e)?;
        interp_residual = interp_residual.max(operator_norm(&(&f.value - b)));
        max_condition = max_condition.max(f.resolvent_condition);
    }
    let mut schur_norm_max = 0.0_f64;
    let family = problem.family();
    if samples > 0 {
        for z in family.sample_interior(samples, seed)? {
            let f = param_eval_detailed(aux, t, &family.evaluate(&z)?)?;
            schur_norm_max = schur_norm_max.max(operator_norm(&f.value));
            max_condition = max_condition.max(f.resolvent_condition);
        }
    }
    // NaN compares false, so a NaN anywhere fails the check.
    let pass = interp_residual <= VERIFY_TOL && schur_norm_max <= 1.0 + VERIFY_TOL;
    Ok(VerificationReport {
        interp_residual,
        schur_norm_max,
        samples,
        decomposition_residual: aux.decomposition_residual(),
        max_resolvent_condition: max_condition,
        pass,
    })
}

/// Re-solves the problem enlarged by `grid -> f_t(grid)` and returns the
/// feasibility residual. An empty grid returns the residual of the
/// decomposition `aux` was built from.
pub fn roundtrip_check(
    problem: &InterpolationProblem,
    aux: &AuxiliaryFunction,
    t: &SchurParameter,
    grid: &[Point],
) -> Result<f64> {
    roundtrip_check_with(problem, aux, t, grid, &SolveOptions::default())
}

pub fn roundtrip_check_with(
    problem: &InterpolationProblem,
    aux: &AuxiliaryFunction,
    t: &SchurParameter,
    grid: &[Point],
    opts: &SolveOptions,
) -> Result<f64> {
    if grid.is_empty() {
        return Ok(aux.decomposition_residual());
    }
    let family = problem.family();
    let mut points = problem.points().to_vec();
    let mut targets = problem.targets().to_vec();
    for g in grid {
        targets.push(param_eval(aux, t, &family.evaluate(g)?)?);
        points.push(g.clone());
    }
    let enlarged = InterpolationProblem::new(family.clone(), points, targets)?;
    let report = solve_decomposition(&enlarged, opts)?;
    Ok(match report.status {
        SolveStatus::Feasible => report.affine_residual,
        _ => report.affine_residual.max(opts.tol_solve),
    })
}

/// `count` parameters alternating between random constant contractions and
/// transfer functions of random colligations with one or two state
/// dimensions per test function.
pub fn random_parameters(aux: &AuxiliaryFunction, count: usize, seed: u64) -> Vec<SchurParameter> {
    let mut rng = SeededRng::new(seed);
    let (rows, cols) = (aux.dim_m2(), aux.dim_m1());
    (0..count)
        .map(|j| {
            if j % 2 == 0 {
                let g = rng.complex_gaussian_matrix(rows, cols);
                let norm = operator_norm(&g);
                let scale = if norm > 0.0 { rng.uniform() / norm } else { 0.0 };
                SchurParameter::Constant(g * crate::numerics::cr(scale))
            } else {
                let dims = (0..aux.state_dims().len()).map(|_| rng.range_inclusive(1, 2)).collect();
                SchurParameter::Colligation(Colligation::random(dims, cols, rows, &mut rng))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agler_solver::{solve_decomposition, SolveOptions};
    use crate::aux_function::build_aux;
    use crate::colligation::random_instance;
    use crate::numerics::{c, cr};
    use crate::testfam::{make_builtin, BuiltinFamily};

    fn bidisc_setup(seed: u64) -> (InterpolationProblem, AuxiliaryFunction) {
        let fam = make_builtin(BuiltinFamily::Bidisc);
        let (p, _) = random_instance(&fam, 3, 1, &[2, 2], seed).unwrap();
        let kernel = solve_decomposition(&p, &SolveOptions::default())
            .unwrap()
            .decomposition
            .unwrap();
        let aux = build_aux(&p, &kernel).unwrap();
        (p, aux)
    }

    #[test]
    fn zero_parameter_is_g22() {
        let (p, aux) = bidisc_setup(3);
        let e = p.family().evaluate(&[c(0.2, 0.1), c(-0.3, 0.4)]).unwrap();
        let f = param_eval(&aux, &SchurParameter::zero(&aux), &e).unwrap();
        assert_eq!(f, aux.eval(&e).unwrap().g22);
    }

    #[test]
    fn random_parameters_interpolate() {
        let (p, aux) = bidisc_setup(4);
        assert!(aux.dim_m1() >= 1);
        for t in random_parameters(&aux, 6, 11) {
            let report = verify(&p, &aux, &t, 100, 2).unwrap();
            assert!(report.pass, "{report:?}");
            assert!(report.interp_residual <= 1e-7);
        }
    }

    #[test]
    fn distinct_parameters_give_distinct_interpolants() {
        let (p, aux) = bidisc_setup(5);
        let t1 = SchurParameter::zero(&aux);
        let mut m = ComplexMatrix::zeros(aux.dim_m2(), aux.dim_m1());
        m[(0, 0)] = cr(0.9);
        let t2 = SchurParameter::constant(m).unwrap();
        let fam = p.family();
        let gap = fam
            .sample_interior(50, 9)
            .unwrap()
            .iter()
            .map(|z| {
                let e = fam.evaluate(z).unwrap();
                operator_norm(&(param_eval(&aux, &t1, &e).unwrap() - param_eval(&aux, &t2, &e).unwrap()))
            })
            .fold(0.0_f64, f64::max);
        assert!(gap > 1e-6, "gap {gap}");
    }

    #[test]
    fn continuity_in_constant_parameter() {
        let (p, aux) = bidisc_setup(6);
        let base = match &random_parameters(&aux, 1, 8)[0] {
            SchurParameter::Constant(t) => t * cr(0.5),
            _ => unreachable!(),
        };
        let eps = 1e-6;
        let bumped = &base + ComplexMatrix::from_element(base.nrows(), base.ncols(), cr(eps / base.len() as f64));
        let (t0, t1) = (
            SchurParameter::constant(base).unwrap(),
            SchurParameter::constant(bumped).unwrap(),
        );
        let fam = p.family();
        for z in fam.sample_interior(20, 4).unwrap() {
            let e = fam.evaluate(&z).unwrap();
            let d = operator_norm(&(param_eval(&aux, &t0, &e).unwrap() - param_eval(&aux, &t1, &e).unwrap()));
            assert!(d <= 1e3 * eps, "{d}");
        }
    }

    #[test]
    fn corrupted_colligation_fails_verification() {
        let (p, aux) = bidisc_setup(7);
        let size = aux.q().nrows();
        let bad = aux
            .perturbed(&ComplexMatrix::from_element(size, size, cr(1e-2)))
            .unwrap();
        let report = verify(&p, &bad, &SchurParameter::zero(&bad), 50, 1).unwrap();
        assert!(!report.pass && report.interp_residual > 1e-6, "{report:?}");
    }

    #[test]
    fn roundtrip_zero_parameter_on_disc() {
        let fam = make_builtin(BuiltinFamily::Disc);
        let p = InterpolationProblem::new(
            fam,
            vec![vec![cr(0.0)], vec![cr(0.5)]],
            vec![
                ComplexMatrix::from_element(1, 1, cr(0.1)),
                ComplexMatrix::from_element(1, 1, cr(0.3)),
            ],
        )
        .unwrap();
        let kernel = solve_decomposition(&p, &SolveOptions::default())
            .unwrap()
            .decomposition
            .unwrap();
        let aux = build_aux(&p, &kernel).unwrap();
        let t = SchurParameter::zero(&aux);
        let grid = vec![vec![c(0.1, 0.6)], vec![c(-0.5, 0.0)], vec![c(0.0, -0.7)]];
        assert!(roundtrip_check(&p, &aux, &t, &grid).unwrap() <= 1e-6);
        assert_eq!(
            roundtrip_check(&p, &aux, &t, &[]).unwrap(),
            aux.decomposition_residual()
        );
        let dup = vec![vec![cr(0.5)]];
        assert!(roundtrip_check(&p, &aux, &t, &dup).is_err());
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let (p, aux) = bidisc_setup(8);
        let t = SchurParameter::Constant(ComplexMatrix::zeros(aux.dim_m2() + 1, aux.dim_m1()));
        assert!(param_eval(&aux, &t, &p.evals()[0]).is_err());
    }
}
