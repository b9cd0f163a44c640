//! Solvability of interpolation data through Agler decompositions.
//!
//! Data `z_i -> B_i` is solvable in the Schur-Agler class exactly when there
//! are PSD block kernels `Gamma_k` with
//!
//! ```text
//! sum_k (1 - psi_k(z_i) conj(psi_k(z_j))) Gamma_k[i, j] = I - B_i B_j*
//! ```
//!
//! for all `i, j`. With a single test function the kernel is forced (the Pick
//! matrix). With several, [`solve_decomposition`] runs Dykstra's alternating
//! projections between the product of PSD cones and the affine solution set.

use crate::cpkernel::CpKernel;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

use crate::numerics::{hermitian_eig, hermitian_part, operator_norm, project_psd, Complex, ComplexMatrix};
use crate::testfam::{EvalVector, Point, TestFunctionFamily};

pub const DEFAULT_TOL_SOLVE: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 20_000;
/// Points closer than this in every coordinate are treated as equal.
pub const POINT_SEPARATION: f64 = 1e-12;
/// First Dykstra iteration at which factor refinement is attempted; later
/// attempts happen at doubling iteration counts.
const REFINE_FIRST: usize = 500;
/// Levenberg-Marquardt steps per refinement attempt.
const REFINE_STEPS: usize = 60;
/// Upper bound on the rank profiles tried per attempt.
const MAX_RANK_PROFILES: usize = 128;
/// Residual at which refinement stops improving.
const REFINE_TARGET: f64 = 1e-14;

/// Interpolation data `z_i -> B_i` over a test family.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationProblem {
    family: TestFunctionFamily,
    points: Vec<Point>,
    targets: Vec<ComplexMatrix>,
    evals: Vec<EvalVector>,
}

impl InterpolationProblem {
    pub fn new(family: TestFunctionFamily, points: Vec<Point>, targets: Vec<ComplexMatrix>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidProblem("no interpolation points".into()));
        }
        if points.len() != targets.len() {
            return Err(Error::InvalidProblem(format!(
                "{} points but {} targets",
                points.len(),
                targets.len()
            )));
        }
        let shape = targets[0].shape();
        if let Some(bad) = targets.iter().find(|b| b.shape() != shape) {
            return Err(Error::InvalidProblem(format!(
                "target of shape {:?} among targets of shape {shape:?}",
                bad.shape()
            )));
        }
        for (i, p) in points.iter().enumerate() {
            for q in &points[..i] {
                let same = p.len() == q.len() && p.iter().zip(q).all(|(a, b)| (a - b).norm() <= POINT_SEPARATION);
                if same {
                    return Err(Error::InvalidProblem(format!("repeated point {p:?}")));
                }
            }
        }
        for (i, b) in targets.iter().enumerate() {
            let norm = operator_norm(b);
            if norm > 1.0 + 1e-12 {
                return Err(Error::InvalidProblem(format!("target {i} has norm {norm} > 1")));
            }
        }
        let evals = points.iter().map(|p| family.evaluate(p)).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            family,
            points,
            targets,
            evals,
        })
    }

    pub fn family(&self) -> &TestFunctionFamily {
        &self.family
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn targets(&self) -> &[ComplexMatrix] {
        &self.targets
    }

    /// `E(z_i)` for every data point.
    pub fn evals(&self) -> &[EvalVector] {
        &self.evals
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn d_out(&self) -> usize {
        self.targets[0].nrows()
    }

    pub fn d_in(&self) -> usize {
        self.targets[0].ncols()
    }

    /// Same points with every target multiplied by `scale`.
    pub fn scaled(&self, scale: Complex) -> Result<Self> {
        let targets = self.targets.iter().map(|b| b * scale).collect();
        Self::new(self.family.clone(), self.points.clone(), targets)
    }

    /// Same data over another family of the same size (e.g. after recentering).
    pub fn with_family(&self, family: TestFunctionFamily) -> Result<Self> {
        Self::new(family, self.points.clone(), self.targets.clone())
    }

    /// `P` with blocks `I - B_i B_j*`.
    pub fn defect_matrix(&self) -> ComplexMatrix {
        let (n, d) = (self.len(), self.d_out());
        let mut p = ComplexMatrix::zeros(n * d, n * d);
        for i in 0..n {
            for j in 0..n {
                let blk = ComplexMatrix::identity(d, d) - &self.targets[i] * self.targets[j].adjoint();
                crate::numerics::put_block(&mut p, i * d, j * d, &blk);
            }
        }
        p
    }

    /// `M_k(i, j) = 1 - psi_k(z_i) conj(psi_k(z_j))`, one `n x n` matrix per `k`.
    pub fn weights(&self) -> Vec<ComplexMatrix> {
        let n = self.len();
        (0..self.family.len())
            .map(|k| {
                ComplexMatrix::from_fn(n, n, |i, j| {
                    Complex::new(1.0, 0.0) - self.evals[i].0[k] * self.evals[j].0[k].conj()
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol_solve: f64,
    pub max_iter: usize,
    /// Record the distance of each affine iterate to the PSD cones.
    pub record_history: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol_solve: DEFAULT_TOL_SOLVE,
            max_iter: DEFAULT_MAX_ITER,
            record_history: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Feasible,
    /// Verdict from a closed form without a dual certificate.
    InfeasibleCertificateFree,
    MaxIterations,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Feasible => "feasible",
            SolveStatus::InfeasibleCertificateFree => "infeasible_certificate_free",
            SolveStatus::MaxIterations => "max_iterations",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub decomposition: Option<CpKernel>,
    pub affine_residual: f64,
    pub min_eigenvalue: f64,
    pub iterations: usize,
    /// Per-iteration cone distance of the affine iterate (when requested).
    pub history: Vec<f64>,
}

impl SolveReport {
    pub fn is_feasible(&self) -> bool {
        self.status == SolveStatus::Feasible
    }
}

/// The forced single-function kernel `(I - B_i B_j*) / (1 - psi(z_i) conj(psi(z_j)))`.
pub fn pick_matrix(problem: &InterpolationProblem) -> Result<ComplexMatrix> {
    if problem.family().len() != 1 {
        return Err(Error::WrongFamily(problem.family().len()));
    }
    let weights = problem.weights();
    let mut p = problem.defect_matrix();
    divide_blocks(&mut p, &weights[0], problem.d_out());
    Ok(hermitian_part(&p))
}

fn divide_blocks(m: &mut ComplexMatrix, w: &ComplexMatrix, d: usize) {
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            m[(r, c)] /= w[(r / d, c / d)];
        }
    }
}

/// `P - sum_k M_k . Gamma_k` (blockwise weighting).
fn affine_defect(p: &ComplexMatrix, weights: &[ComplexMatrix], comps: &[ComplexMatrix], d: usize) -> ComplexMatrix {
    let mut r = p.clone();
    for (w, g) in weights.iter().zip(comps) {
        for row in 0..r.nrows() {
            for col in 0..r.ncols() {
                r[(row, col)] -= w[(row / d, col / d)] * g[(row, col)];
            }
        }
    }
    r
}

/// Max over block positions of the block's operator norm.
fn max_block_norm(r: &ComplexMatrix, n: usize, d: usize) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let blk = crate::numerics::block(r, i * d, j * d, d, d);
            worst = worst.max(operator_norm(&blk));
        }
    }
    worst
}

/// Max over block positions of the block's Frobenius norm (bounds the above).
fn max_block_frobenius(r: &ComplexMatrix, n: usize, d: usize) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for a in 0..d {
                for b in 0..d {
                    s += r[(i * d + a, j * d + b)].norm_sqr();
                }
            }
            worst = worst.max(s.sqrt());
        }
    }
    worst
}

/// `max_{i,j} |(I - B_i B_j*) - sum_k M_k(i,j) Gamma_k[i,j]|`.
pub fn residual(problem: &InterpolationProblem, kernel: &CpKernel) -> Result<f64> {
    let (n, d) = (problem.len(), problem.d_out());
    if kernel.points() != n || kernel.block_size() != d || kernel.len() != problem.family().len() {
        return Err(Error::Dimension(format!(
            "kernel with {} components on {}x{} blocks for a problem with {} functions on {n}x{d}",
            kernel.len(),
            kernel.points(),
            kernel.block_size(),
            problem.family().len()
        )));
    }
    let r = affine_defect(&problem.defect_matrix(), &problem.weights(), kernel.components(), d);
    Ok(max_block_norm(&r, n, d))
}

fn min_eigenvalue_of(comps: &[ComplexMatrix]) -> f64 {
    comps
        .iter()
        .map(|g| hermitian_eig(g).expect("square").min_eigenvalue())
        .fold(f64::INFINITY, f64::min)
}

fn cone_distance(comps: &[ComplexMatrix]) -> f64 {
    comps
        .iter()
        .map(|g| {
            let eig = hermitian_eig(g).expect("square");
            eig.eigenvalues.iter().map(|l: &f64| l.min(0.0).powi(2)).sum::<f64>()
        })
        .sum::<f64>()
        .sqrt()
}

pub fn solve_decomposition(problem: &InterpolationProblem, opts: &SolveOptions) -> Result<SolveReport> {
    let k = problem.family().len();
    let (n, d) = (problem.len(), problem.d_out());
    if k == 0 {
        let r = max_block_norm(&problem.defect_matrix(), n, d);
        let feasible = r <= opts.tol_solve;
        return Ok(SolveReport {
            status: if feasible {
                SolveStatus::Feasible
            } else {
                SolveStatus::InfeasibleCertificateFree
            },
            decomposition: feasible.then(|| CpKernel::new(n, d, Vec::new()).expect("empty kernel")),
            affine_residual: r,
            min_eigenvalue: 0.0,
            iterations: 0,
            history: Vec::new(),
        });
    }
    if k == 1 {
        let pick = pick_matrix(problem)?;
        let min = hermitian_eig(&pick)?.min_eigenvalue();
        let kernel = CpKernel::new(n, d, vec![pick])?;
        let affine_residual = residual(problem, &kernel)?;
        let feasible = min >= -opts.tol_solve && affine_residual <= opts.tol_solve;
        return Ok(SolveReport {
            status: if feasible {
                SolveStatus::Feasible
            } else {
                SolveStatus::InfeasibleCertificateFree
            },
            decomposition: feasible.then_some(kernel),
            affine_residual,
            min_eigenvalue: min,
            iterations: 0,
            history: Vec::new(),
        });
    }
    Ok(dykstra(problem, opts))
}

fn dykstra(problem: &InterpolationProblem, opts: &SolveOptions) -> SolveReport {
    let k = problem.family().len();
    let (n, d) = (problem.len(), problem.d_out());
    let p = problem.defect_matrix();
    let weights = problem.weights();
    let total_weight = ComplexMatrix::from_fn(n, n, |i, j| {
        Complex::new(weights.iter().map(|w| w[(i, j)].norm_sqr()).sum::<f64>(), 0.0)
    });

    // Equal split of the single-function formula; already affine-feasible.
    let mut x: Vec<ComplexMatrix> = weights
        .iter()
        .map(|w| {
            let mut g = p.clone() / Complex::new(k as f64, 0.0);
            divide_blocks(&mut g, w, d);
            hermitian_part(&g)
        })
        .collect();
    let mut increments: Vec<ComplexMatrix> = vec![ComplexMatrix::zeros(n * d, n * d); k];
    let mut history = Vec::new();
    let mut last_residual = f64::INFINITY;

    for iter in 1..=opts.max_iter {
        if opts.record_history {
            history.push(cone_distance(&x));
        }
        let y: Vec<ComplexMatrix> = x
            .iter()
            .zip(&increments)
            .map(|(xk, pk)| project_psd(&(xk + pk)).expect("square"))
            .collect();
        for ((pk, xk), yk) in increments.iter_mut().zip(&x).zip(&y) {
            *pk += xk - yk;
        }
        let r = affine_defect(&p, &weights, &y, d);
        last_residual = max_block_frobenius(&r, n, d);
        let checkpoint = iter >= REFINE_FIRST && (iter / REFINE_FIRST).is_power_of_two() && iter % REFINE_FIRST == 0;
        if last_residual <= opts.tol_solve || checkpoint || iter == opts.max_iter {
            if let Some(comps) = refine(&p, &weights, d, &y, opts.tol_solve, last_residual <= opts.tol_solve) {
                let affine_residual = max_block_norm(&affine_defect(&p, &weights, &comps, d), n, d);
                let min_eigenvalue = min_eigenvalue_of(&comps);
                return SolveReport {
                    status: SolveStatus::Feasible,
                    decomposition: Some(CpKernel::new(n, d, comps).expect("shapes fixed")),
                    affine_residual,
                    min_eigenvalue,
                    iterations: iter,
                    history,
                };
            }
        }
        // Closed-form projection onto the affine set, block position by position.
        x = y
            .iter()
            .zip(&weights)
            .map(|(yk, w)| {
                let mut xk = yk.clone();
                for row in 0..n * d {
                    for col in 0..n * d {
                        let (i, j) = (row / d, col / d);
                        xk[(row, col)] += w[(i, j)].conj() * r[(row, col)] / total_weight[(i, j)];
                    }
                }
                hermitian_part(&xk)
            })
            .collect();
    }
    SolveReport {
        status: SolveStatus::MaxIterations,
        decomposition: None,
        affine_residual: last_residual,
        min_eigenvalue: min_eigenvalue_of(&x),
        iterations: opts.max_iter,
        history,
    }
}

/// Turns a Dykstra iterate into an exact Gram-form decomposition.
///
/// Alternating projections crawl when every decomposition is rank deficient
/// (data from colligations with small state spaces). Gauss-Newton on factors
/// of the right width converges fast there, so after a full-width attempt the
/// rank profiles are tried in order of increasing total rank.
fn refine(
    p: &ComplexMatrix,
    weights: &[ComplexMatrix],
    d: usize,
    iterate: &[ComplexMatrix],
    tol: f64,
    converged: bool,
) -> Option<Vec<ComplexMatrix>> {
    let (comps, res) = refine_factors(p, weights, d, iterate, None, REFINE_STEPS);
    if res <= tol {
        return Some(comps);
    }
    if converged {
        // Refinement failed to improve an already acceptable iterate.
        return Some(iterate.to_vec());
    }
    for widths in rank_profiles(weights.len(), p.nrows(), MAX_RANK_PROFILES) {
        let (comps, res) = refine_factors(p, weights, d, iterate, Some(&widths), REFINE_STEPS);
        if res <= tol {
            return Some(comps);
        }
    }
    None
}

/// Width vectors in `1..=size` ordered by total, at most `limit` of them.
fn rank_profiles(k: usize, size: usize, limit: usize) -> Vec<Vec<usize>> {
    fn fill(prefix: &mut Vec<usize>, k: usize, size: usize, remaining: usize, out: &mut Vec<Vec<usize>>, limit: usize) {
        if out.len() >= limit {
            return;
        }
        if prefix.len() == k {
            if remaining == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        let slots = k - prefix.len() - 1;
        for r in 1..=size.min(remaining) {
            if remaining - r < slots || remaining - r > slots * size {
                continue;
            }
            prefix.push(r);
            fill(prefix, k, size, remaining - r, out, limit);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for total in k..=k * size {
        fill(&mut Vec::new(), k, size, total, &mut out, limit);
    }
    out
}

/// Real coordinates of the upper triangle of a Hermitian matrix, off-diagonal
/// entries scaled by sqrt(2) so the Euclidean norm equals the Frobenius norm.
fn hermitian_coords(m: &ComplexMatrix, out: &mut [f64]) {
    let size = m.nrows();
    let s2 = std::f64::consts::SQRT_2;
    let mut at = 0;
    for i in 0..size {
        out[at] = m[(i, i)].re;
        at += 1;
        for j in i + 1..size {
            out[at] = s2 * m[(i, j)].re;
            out[at + 1] = s2 * m[(i, j)].im;
            at += 2;
        }
    }
}

fn model_defect(p: &ComplexMatrix, weights: &[ComplexMatrix], factors: &[ComplexMatrix], d: usize) -> ComplexMatrix {
    let grams: Vec<ComplexMatrix> = factors.iter().map(|f| f * f.adjoint()).collect();
    hermitian_part(&affine_defect(p, weights, &grams, d))
}

/// Levenberg-Marquardt on Kolmogorov factors: starting from PSD components,
/// seeks `F_k` with `sum_k M_k . (F_k F_k*) = P`. The returned components are
/// Gram matrices and hence exactly PSD; the second value is their residual in
/// max block Frobenius norm.
fn refine_factors(
    p: &ComplexMatrix,
    weights: &[ComplexMatrix],
    d: usize,
    start: &[ComplexMatrix],
    widths: Option<&[usize]>,
    steps: usize,
) -> (Vec<ComplexMatrix>, f64) {
    let size = p.nrows();
    let n = size / d.max(1);
    // Leading eigenpairs, with a small floor on every eigenvalue so no
    // column starts at the stationary point zero.
    let mut factors: Vec<ComplexMatrix> = start
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let eig = hermitian_eig(g).expect("square");
            let width = widths.map_or(size, |w| w[k]);
            let floor = 1e-6 * eig.max_eigenvalue().max(1e-12);
            let mut f = eig.eigenvectors.columns(0, width).into_owned();
            for (j, &l) in eig.eigenvalues.iter().take(width).enumerate() {
                f.column_mut(j).scale_mut(l.max(floor).sqrt());
            }
            f
        })
        .collect();

    let eqs = size * size;
    let params: usize = factors.iter().map(|f| 2 * f.len()).sum();
    let mut rvec = vec![0.0; eqs];
    let mut defect = model_defect(p, weights, &factors, d);
    hermitian_coords(&defect, &mut rvec);
    let mut norm = rvec.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut lambda = 1e-4 * norm.max(1e-300);
    let mut jac = DMatrix::<f64>::zeros(eqs, params);
    let mut col = vec![0.0; eqs];

    for _ in 0..steps {
        if max_block_frobenius(&defect, n, d) <= REFINE_TARGET {
            break;
        }
        // Jacobian of F -> sum_k M_k . (F_k F_k*), one real parameter at a time.
        let mut c = 0;
        for (k, f) in factors.iter().enumerate() {
            let w = &weights[k];
            for a in 0..size {
                for b in 0..f.ncols() {
                    for imag in [false, true] {
                        let mut x = ComplexMatrix::zeros(size, size);
                        for r in 0..size {
                            let (row_term, col_term) = if imag {
                                (
                                    Complex::new(0.0, 1.0) * f[(r, b)].conj(),
                                    Complex::new(0.0, -1.0) * f[(r, b)],
                                )
                            } else {
                                (f[(r, b)].conj(), f[(r, b)])
                            };
                            x[(a, r)] += row_term * w[(a / d, r / d)];
                            x[(r, a)] += col_term * w[(r / d, a / d)];
                        }
                        hermitian_coords(&x, &mut col);
                        jac.column_mut(c).copy_from_slice(&col);
                        c += 1;
                    }
                }
            }
        }
        let jjt = &jac * jac.transpose();
        let r = DVector::from_column_slice(&rvec);
        let mut improved = false;
        for _ in 0..12 {
            let mut sys = jjt.clone();
            for i in 0..eqs {
                sys[(i, i)] += lambda;
            }
            let Some(chol) = sys.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let step = jac.transpose() * chol.solve(&r);
            let mut trial = factors.clone();
            let mut at = 0;
            for f in trial.iter_mut() {
                for a in 0..size {
                    for b in 0..f.ncols() {
                        f[(a, b)] += Complex::new(step[at], step[at + 1]);
                        at += 2;
                    }
                }
            }
            let trial_defect = model_defect(p, weights, &trial, d);
            let mut trial_vec = vec![0.0; eqs];
            hermitian_coords(&trial_defect, &mut trial_vec);
            let trial_norm = trial_vec.iter().map(|x| x * x).sum::<f64>().sqrt();
            if trial_norm < norm {
                factors = trial;
                defect = trial_defect;
                rvec = trial_vec;
                norm = trial_norm;
                lambda = (lambda / 5.0).max(1e-18);
                improved = true;
                break;
            }
            lambda *= 8.0;
        }
        if !improved {
            break;
        }
    }
    let comps: Vec<ComplexMatrix> = factors.iter().map(|f| hermitian_part(&(f * f.adjoint()))).collect();
    let res = max_block_frobenius(&affine_defect(p, weights, &comps, d), n, d);
    (comps, res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colligation::random_instance;
    use crate::numerics::{cr, max_abs};
    use crate::testfam::{make_builtin, BuiltinFamily};

    #[test]
    fn rank_profiles_ordered_by_total() {
        let all = rank_profiles(2, 3, usize::MAX);
        assert_eq!(all.len(), 9);
        assert_eq!(all[0], vec![1, 1]);
        assert_eq!(all[1..3], [vec![1, 2], vec![2, 1]]);
        assert_eq!(all[8], vec![3, 3]);
        let totals: Vec<usize> = all.iter().map(|p| p.iter().sum()).collect();
        assert!(totals.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(rank_profiles(3, 4, 5).len(), 5);
        assert_eq!(rank_profiles(1, 2, 10), vec![vec![1], vec![2]]);
    }

    fn scalar_disc(points: &[f64], values: &[f64]) -> InterpolationProblem {
        InterpolationProblem::new(
            make_builtin(BuiltinFamily::Disc),
            points.iter().map(|&z| vec![cr(z)]).collect(),
            values
                .iter()
                .map(|&w| ComplexMatrix::from_element(1, 1, cr(w)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn pick_single_point_at_origin() {
        let p = pick_matrix(&scalar_disc(&[0.0], &[0.0])).unwrap();
        assert_eq!(p, ComplexMatrix::from_element(1, 1, cr(1.0)));
    }

    #[test]
    fn pick_rank_one_identity_data() {
        let p = pick_matrix(&scalar_disc(&[0.0, 0.5], &[0.0, 0.5])).unwrap();
        assert!(max_abs(&p.map(|w| w - cr(1.0))) < 1e-15);
    }

    #[test]
    fn pick_detects_infeasible_data() {
        let problem = scalar_disc(&[0.0, 0.5], &[0.0, 0.9]);
        let p = pick_matrix(&problem).unwrap();
        // [[1, 1], [1, 0.19 / 0.75]]
        let t: f64 = 0.19 / 0.75;
        let lam = ((1.0 + t) - ((1.0 - t).powi(2) + 4.0).sqrt()) / 2.0;
        let eig = hermitian_eig(&p).unwrap();
        assert!((eig.min_eigenvalue() - lam).abs() < 1e-14);
        let rep = solve_decomposition(&problem, &SolveOptions::default()).unwrap();
        assert_eq!(rep.status, SolveStatus::InfeasibleCertificateFree);
        assert!((rep.min_eigenvalue - lam).abs() < 1e-14);
    }

    #[test]
    fn pick_requires_single_function() {
        let (problem, _) = random_instance(&make_builtin(BuiltinFamily::Bidisc), 2, 1, &[1, 1], 0).unwrap();
        assert!(matches!(pick_matrix(&problem), Err(Error::WrongFamily(2))));
    }

    #[test]
    fn residual_of_pick_division_is_exact() {
        let problem = scalar_disc(&[0.0, 0.5, -0.3], &[0.1, 0.2, 0.0]);
        let kern = CpKernel::new(3, 1, vec![pick_matrix(&problem).unwrap()]).unwrap();
        assert!(residual(&problem, &kern).unwrap() <= 1e-12);
        let mut broken = kern.into_components();
        broken[0][(0, 1)] = cr(0.0);
        broken[0][(1, 0)] = cr(0.0);
        let broken = CpKernel::new(3, 1, broken).unwrap();
        assert!(residual(&problem, &broken).unwrap() > 1e-3);
    }

    #[test]
    fn problem_validation() {
        let fam = make_builtin(BuiltinFamily::Disc);
        let one = ComplexMatrix::from_element(1, 1, cr(0.1));
        assert!(InterpolationProblem::new(
            fam.clone(),
            vec![vec![cr(0.1)], vec![cr(0.1)]],
            vec![one.clone(), one.clone()]
        )
        .is_err());
        assert!(InterpolationProblem::new(fam.clone(), vec![vec![cr(1.1)]], vec![one.clone()]).is_err());
        let big = ComplexMatrix::from_element(1, 1, cr(1.5));
        assert!(InterpolationProblem::new(fam.clone(), vec![vec![cr(0.1)]], vec![big]).is_err());
        let wide = ComplexMatrix::zeros(1, 2);
        assert!(InterpolationProblem::new(fam, vec![vec![cr(0.1)], vec![cr(0.2)]], vec![one, wide]).is_err());
    }

    #[test]
    fn dykstra_solves_random_bidisc_instance() {
        let fam = make_builtin(BuiltinFamily::Bidisc);
        let (problem, _) = random_instance(&fam, 3, 1, &[1, 2], 5).unwrap();
        let rep = solve_decomposition(&problem, &SolveOptions::default()).unwrap();
        assert!(
            rep.is_feasible(),
            "{:?} after {} iterations",
            rep.status,
            rep.iterations
        );
        let kern = rep.decomposition.unwrap();
        assert!(residual(&problem, &kern).unwrap() <= 1e-8);
        assert!(kern.min_eigenvalue() >= -1e-8);
    }
}
