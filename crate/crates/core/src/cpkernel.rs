//! Completely positive kernels on a finite point set.
//!
//! Over the commutative algebra `C^K` a kernel is a list of `K` positive
//! semidefinite block matrices `Gamma_k`, each of shape `(n*d) x (n*d)`. Its
//! action on `delta` at `(z_i, z_j)` is `sum_k delta_k Gamma_k[i, j]`.

use crate::error::{Error, Result};
use crate::numerics::{
    self, block, hermitian_eig, hermitian_part, max_abs, operator_norm, psd_factor, Complex, ComplexMatrix, TOL_RANK,
};
use crate::rng::SeededRng;
use crate::testfam::EvalVector;

/// Relative PSD tolerance accepted on kernel components.
pub const TOL_PSD: f64 = 1e-8;
/// Relative reconstruction tolerance of [`CpKernel::kolmogorov_decompose`].
pub const TOL_FACTOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CpKernel {
    n: usize,
    d: usize,
    components: Vec<ComplexMatrix>,
}

impl CpKernel {
    /// Components are symmetrized; shapes must be `(n*d) x (n*d)`.
    pub fn new(n: usize, d: usize, components: Vec<ComplexMatrix>) -> Result<Self> {
        let size = n * d;
        if let Some(bad) = components.iter().find(|g| g.shape() != (size, size)) {
            return Err(Error::Dimension(format!(
                "kernel component {:?}, expected {size}x{size}",
                bad.shape()
            )));
        }
        let components = components.iter().map(hermitian_part).collect();
        Ok(Self { n, d, components })
    }

    pub fn points(&self) -> usize {
        self.n
    }

    pub fn block_size(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[ComplexMatrix] {
        &self.components
    }

    pub fn into_components(self) -> Vec<ComplexMatrix> {
        self.components
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::Index { index: i, len: self.n });
        }
        Ok(())
    }

    /// `Gamma_k[i, j]`.
    pub fn block(&self, k: usize, i: usize, j: usize) -> ComplexMatrix {
        block(&self.components[k], i * self.d, j * self.d, self.d, self.d)
    }

    pub fn apply(&self, i: usize, j: usize, delta: &[Complex]) -> Result<ComplexMatrix> {
        self.check_index(i)?;
        self.check_index(j)?;
        if delta.len() != self.len() {
            return Err(Error::Dimension(format!(
                "{} coefficients for a kernel with {} components",
                delta.len(),
                self.len()
            )));
        }
        let mut out = ComplexMatrix::zeros(self.d, self.d);
        for (k, &w) in delta.iter().enumerate() {
            out += self.block(k, i, j) * w;
        }
        Ok(out)
    }

    /// Block matrix with `(i, j)` block `sum_k (1 - e_i[k] conj(e_j[k])) Gamma_k[i, j]`.
    pub fn apply_one_minus_ee(&self, e: &[EvalVector]) -> Result<ComplexMatrix> {
        if e.len() != self.n {
            return Err(Error::Dimension(format!(
                "{} evaluation vectors for {} points",
                e.len(),
                self.n
            )));
        }
        if let Some(bad) = e.iter().find(|v| v.len() != self.len()) {
            return Err(Error::Dimension(format!(
                "evaluation vector of length {} for {} components",
                bad.len(),
                self.len()
            )));
        }
        let size = self.n * self.d;
        let mut out = ComplexMatrix::zeros(size, size);
        for (k, g) in self.components.iter().enumerate() {
            for i in 0..self.n {
                for j in 0..self.n {
                    let m = Complex::new(1.0, 0.0) - e[i].0[k] * e[j].0[k].conj();
                    for a in 0..self.d {
                        for b in 0..self.d {
                            out[(i * self.d + a, j * self.d + b)] += m * g[(i * self.d + a, j * self.d + b)];
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Smallest eigenvalue over all components, each relative to its own norm.
    pub fn min_relative_eigenvalue(&self) -> f64 {
        self.components
            .iter()
            .map(|g| {
                let eig = hermitian_eig(g).expect("square by construction");
                let norm = eig.spectral_radius();
                if norm == 0.0 {
                    0.0
                } else {
                    eig.min_eigenvalue() / norm
                }
            })
            .fold(0.0_f64, f64::min)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.components
            .iter()
            .map(|g| hermitian_eig(g).expect("square by construction").min_eigenvalue())
            .fold(f64::INFINITY, f64::min)
    }

    /// Minimal factorization `Gamma_k = F_k F_k*` of every component. Negative
    /// eigenvalues within `tol_psd` (relative) are clipped before factoring.
    pub fn kolmogorov_decompose_with(&self, tol_psd: f64) -> Result<KolmogorovFactorization> {
        let mut factors = Vec::with_capacity(self.len());
        for (k, g) in self.components.iter().enumerate() {
            let eig = hermitian_eig(g)?;
            let norm = eig.spectral_radius();
            if eig.min_eigenvalue() < -tol_psd * norm {
                return Err(Error::InfeasibleKernel(format!(
                    "component {k} has eigenvalue {:e} (norm {norm:e})",
                    eig.min_eigenvalue()
                )));
            }
            let clipped = eig.reassemble(|l| l.max(0.0));
            factors.push(psd_factor(&clipped, TOL_RANK)?);
        }
        Ok(KolmogorovFactorization {
            n: self.n,
            d: self.d,
            factors,
        })
    }

    pub fn kolmogorov_decompose(&self) -> Result<KolmogorovFactorization> {
        self.kolmogorov_decompose_with(TOL_PSD)
    }

    /// Samples the inequality
    /// `|<A_ij u, v>|^2 <= <A_ii v, v> <A_jj u, u>` with `A = Gamma(delta delta*)`.
    pub fn cp_cauchy_schwarz_check(&self, trials: usize, seed: u64) -> CauchySchwarzReport {
        let mut rng = SeededRng::new(seed);
        let mut max_violation = 0.0_f64;
        for _ in 0..trials {
            if self.n == 0 || self.d == 0 {
                break;
            }
            let weights: Vec<Complex> = (0..self.len())
                .map(|_| Complex::new(rng.complex_gaussian().norm_sqr(), 0.0))
                .collect();
            let i = rng.below(self.n);
            let j = rng.below(self.n);
            let u = rng.unit_vector(self.d);
            let v = rng.unit_vector(self.d);
            let a_ij = self.apply(i, j, &weights).expect("valid indices");
            let a_ii = self.apply(i, i, &weights).expect("valid indices");
            let a_jj = self.apply(j, j, &weights).expect("valid indices");
            let lhs = (v.adjoint() * &a_ij * &u)[(0, 0)].norm_sqr();
            let rhs = (v.adjoint() * &a_ii * &v)[(0, 0)].re * (u.adjoint() * &a_jj * &u)[(0, 0)].re;
            max_violation = max_violation.max(lhs - rhs);
        }
        CauchySchwarzReport {
            trials,
            max_violation: max_violation.max(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchySchwarzReport {
    pub trials: usize,
    pub max_violation: f64,
}

/// `Gamma(z_i, z_j)(delta) = h(z_i) mu(delta) h(z_j)*` with
/// `mu(delta) = diag(delta_1 I_{r_1}, ..., delta_K I_{r_K})`.
#[derive(Debug, Clone)]
pub struct KolmogorovFactorization {
    n: usize,
    d: usize,
    /// `F_k` of shape `(n*d) x r_k`; rows `i*d..(i+1)*d` form `h_k(z_i)`.
    factors: Vec<ComplexMatrix>,
}

impl KolmogorovFactorization {
    pub fn points(&self) -> usize {
        self.n
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.ncols()).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|f| f.ncols()).sum()
    }

    pub fn factors(&self) -> &[ComplexMatrix] {
        &self.factors
    }

    /// `h_k(z_i)`, a `d x r_k` matrix.
    pub fn h_k(&self, k: usize, i: usize) -> ComplexMatrix {
        let f = &self.factors[k];
        block(f, i * self.d, 0, self.d, f.ncols())
    }

    /// `h(z_i) = [h_1(z_i) | ... | h_K(z_i)]`.
    pub fn h(&self, i: usize) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.d, self.total_dim());
        let mut col = 0;
        for k in 0..self.factors.len() {
            let hk = self.h_k(k, i);
            numerics::put_block(&mut out, 0, col, &hk);
            col += hk.ncols();
        }
        out
    }

    /// The representation `mu(delta)` on the factorization space.
    pub fn mu(&self, delta: &[Complex]) -> ComplexMatrix {
        block_diagonal_rep(&self.block_dims(), delta)
    }

    pub fn reconstruct(&self) -> Vec<ComplexMatrix> {
        self.factors.iter().map(|f| f * f.adjoint()).collect()
    }

    /// Largest relative reconstruction error against `kernel`.
    pub fn reconstruction_error(&self, kernel: &CpKernel) -> f64 {
        self.reconstruct()
            .iter()
            .zip(kernel.components())
            .map(|(r, g)| {
                let norm = operator_norm(g).max(numerics::ZERO_FLOOR);
                max_abs(&(r - g)) / norm
            })
            .fold(0.0_f64, f64::max)
    }
}

/// `diag(delta_1 I_{dims_1}, ..., delta_K I_{dims_K})`.
pub fn block_diagonal_rep(dims: &[usize], delta: &[Complex]) -> ComplexMatrix {
    let total: usize = dims.iter().sum();
    let mut out = ComplexMatrix::zeros(total, total);
    let mut at = 0;
    for (&dim, &w) in dims.iter().zip(delta) {
        for _ in 0..dim {
            out[(at, at)] = w;
            at += 1;
        }
    }
    out
}
