//! Dense complex linear algebra shared by the rest of the crate.
//!
//! Everything works on `nalgebra` dynamic matrices of `Complex64`. Matrices
//! with a zero dimension are ordinary values here: the spaces built by the
//! interpolation pipeline may collapse to nothing on degenerate data, and the
//! products below keep their shapes in that case.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Complex = Complex64;
pub type ComplexMatrix = DMatrix<Complex>;
pub type ComplexVector = DVector<Complex>;

/// Eigen-residual and orthogonality tolerance of [`hermitian_eig`].
pub const TOL_EIG: f64 = 1e-11;
/// Relative threshold below which eigenvalues/singular values count as zero.
pub const TOL_RANK: f64 = 1e-10;
/// Default Gram-agreement tolerance for [`gram_matched_unitary`].
pub const TOL_GRAM: f64 = 1e-7;
/// Absolute floor used for rank decisions on (numerically) zero matrices.
pub const ZERO_FLOOR: f64 = 1e-14;

#[inline]
pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> Complex {
    Complex::new(re, 0.0)
}

/// Spectral decomposition of a Hermitian matrix, eigenvalues non-increasing.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEig {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    /// Largest eigenvalue magnitude, i.e. the operator norm of the input.
    pub fn spectral_radius(&self) -> f64 {
        self.max_eigenvalue().abs().max(self.min_eigenvalue().abs())
    }

    /// `U diag(f(λ)) U*`.
    pub fn reassemble(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let mut scaled = self.eigenvectors.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let s = f(lambda);
            scaled.column_mut(j).scale_mut(s);
        }
        if n == 0 {
            return ComplexMatrix::zeros(0, 0);
        }
        hermitian_part(&(scaled * self.eigenvectors.adjoint()))
    }
}

pub fn ensure_square(m: &ComplexMatrix, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// `(M + M*) / 2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Largest entry modulus; 0 for empty matrices.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn hermitian_eig(h: &ComplexMatrix) -> Result<HermitianEig> {
    ensure_square(h, "hermitian_eig input")?;
    let n = h.nrows();
    if n == 0 {
        return Ok(HermitianEig {
            eigenvalues: Vec::new(),
            eigenvectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::new(hermitian_part(h));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(HermitianEig {
        eigenvalues,
        eigenvectors,
    })
}

/// Nearest positive semidefinite matrix in Frobenius norm.
pub fn project_psd(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(h)?;
    Ok(eig.reassemble(|l| l.max(0.0)))
}

/// Factor `F` with `F F* = H`, one column per retained eigenvalue.
pub fn psd_factor(h: &ComplexMatrix, tol_rank: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(h)?;
    let n = h.nrows();
    let norm = eig.spectral_radius();
    if norm <= ZERO_FLOOR {
        return Ok(ComplexMatrix::zeros(n, 0));
    }
    let min = eig.min_eigenvalue();
    if min < -tol_rank * norm {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
            norm,
        });
    }
    let cut = (tol_rank * eig.max_eigenvalue()).max(ZERO_FLOOR);
    let kept: Vec<usize> = (0..n).filter(|&j| eig.eigenvalues[j] > cut).collect();
    let mut f = ComplexMatrix::zeros(n, kept.len());
    for (dst, &j) in kept.iter().enumerate() {
        let s = eig.eigenvalues[j].sqrt();
        f.set_column(dst, &eig.eigenvectors.column(j).scale(s));
    }
    Ok(f)
}

/// Singular values in non-increasing order together with the matching left
/// singular vectors.
fn left_svd(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix, ComplexMatrix) {
    let svd = SVD::new(m.clone(), true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut us = ComplexMatrix::zeros(u.nrows(), k);
    let mut vs = ComplexMatrix::zeros(k, v_t.ncols());
    for (dst, &src) in order.iter().enumerate() {
        us.set_column(dst, &u.column(src));
        vs.set_row(dst, &v_t.row(src));
    }
    (sv, us, vs)
}

/// Orthonormal basis for the column space of `m`, one column per singular
/// value above `tol_rank * sigma_max`.
pub fn column_basis(m: &ComplexMatrix, tol_rank: f64) -> ComplexMatrix {
    if m.nrows() == 0 || m.ncols() == 0 {
        return ComplexMatrix::zeros(m.nrows(), 0);
    }
    let (sv, u, _) = left_svd(m);
    let cut = (tol_rank * sv[0]).max(ZERO_FLOOR);
    let rank = sv.iter().take_while(|&&s| s > cut).count();
    u.columns(0, rank).into_owned()
}

/// Stacks `generators` as columns. An empty list gives a `0 x 0` matrix.
pub fn stack_columns(generators: &[ComplexVector]) -> Result<ComplexMatrix> {
    let Some(first) = generators.first() else {
        return Ok(ComplexMatrix::zeros(0, 0));
    };
    let dim = first.len();
    if let Some(bad) = generators.iter().find(|g| g.len() != dim) {
        return Err(Error::Dimension(format!(
            "generator of length {} in a family of length {dim}",
            bad.len()
        )));
    }
    Ok(ComplexMatrix::from_columns(generators))
}

pub fn orthonormal_basis(generators: &[ComplexVector], tol_rank: f64) -> Result<ComplexMatrix> {
    Ok(column_basis(&stack_columns(generators)?, tol_rank))
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// orthonormal columns of `basis`.
pub fn orthonormal_complement(basis: &ComplexMatrix) -> ComplexMatrix {
    let n = basis.nrows();
    let want = n.saturating_sub(basis.ncols());
    if want == 0 {
        return ComplexMatrix::zeros(n, 0);
    }
    let projector = identity(n) - basis * basis.adjoint();
    let eig = hermitian_eig(&projector).expect("projector is square");
    eig.eigenvectors.columns(0, want).into_owned()
}

/// Closest unitary to a square matrix (the unitary polar factor).
pub fn polar_unitary(m: &ComplexMatrix) -> ComplexMatrix {
    if m.nrows() == 0 {
        return m.clone();
    }
    let (_, u, v_t) = left_svd(m);
    u * v_t
}

/// Result of [`gram_matched_unitary`].
#[derive(Debug, Clone)]
pub struct GramMatch {
    /// Unitary from coordinates in `basis_domain` to coordinates in `basis_range`.
    pub v: ComplexMatrix,
    pub basis_domain: ComplexMatrix,
    pub basis_range: ComplexMatrix,
    /// Max-entry difference of the two Gram matrices.
    pub gram_mismatch: f64,
    /// `max_j |V coords(x_j) - coords(y_j)|`.
    pub match_residual: f64,
}

/// Builds the unitary between `span(xs)` and `span(ys)` that carries each
/// column of `xs` to the matching column of `ys`.
///
/// The two families must have the same Gram matrix up to
/// `tol_gram * (1 + max squared column norm)`.
pub fn gram_matched_unitary(xs: &ComplexMatrix, ys: &ComplexMatrix, tol_gram: f64) -> Result<GramMatch> {
    if xs.ncols() != ys.ncols() {
        return Err(Error::Dimension(format!(
            "{} domain generators vs {} range generators",
            xs.ncols(),
            ys.ncols()
        )));
    }
    let gx = xs.adjoint() * xs;
    let gy = ys.adjoint() * ys;
    let mismatch = max_abs(&(&gx - &gy));
    let scale = (0..xs.ncols())
        .map(|j| gx[(j, j)].re.max(gy[(j, j)].re))
        .fold(0.0_f64, f64::max);
    let tolerance = tol_gram * (1.0 + scale);
    if mismatch > tolerance {
        return Err(Error::GramMismatch { mismatch, tolerance });
    }

    let bx = column_basis(xs, TOL_RANK);
    let by = column_basis(ys, TOL_RANK);
    // Both ranks agree away from singular values below sqrt(mismatch).
    let rank = bx.ncols().min(by.ncols());
    let bx = bx.columns(0, rank).into_owned();
    let by = by.columns(0, rank).into_owned();
    let cx = bx.adjoint() * xs;
    let cy = by.adjoint() * ys;
    let v = polar_unitary(&(&cy * cx.adjoint()));
    let diff = &v * &cx - &cy;
    let match_residual = diff.column_iter().map(|col| col.norm()).fold(0.0_f64, f64::max);
    Ok(GramMatch {
        v,
        basis_domain: bx,
        basis_range: by,
        gram_mismatch: mismatch,
        match_residual,
    })
}

/// Largest singular value; 0 for matrices with a zero dimension.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.singular_values().iter().fold(0.0_f64, |a, &s| a.max(s))
}

/// `max(|M*M - I|, |MM* - I|)` in operator norm.
pub fn unitarity_defect(m: &ComplexMatrix) -> f64 {
    let a = m.adjoint() * m - identity(m.ncols());
    let b = m * m.adjoint() - identity(m.nrows());
    operator_norm(&a).max(operator_norm(&b))
}

/// 2-norm condition number of a square matrix; infinite when singular.
pub fn condition_number(m: &ComplexMatrix) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let sv = m.singular_values();
    let max = sv.iter().fold(0.0_f64, |a, &s| a.max(s));
    let min = sv.iter().fold(f64::INFINITY, |a, &s| a.min(s));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Solves `A X = B` by LU with partial pivoting.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_square(a, "system matrix")?;
    if a.nrows() != b.nrows() {
        return Err(Error::Dimension(format!(
            "system of order {} with right-hand side of {} rows",
            a.nrows(),
            b.nrows()
        )));
    }
    if a.nrows() == 0 {
        return Ok(ComplexMatrix::zeros(0, b.ncols()));
    }
    a.clone().lu().solve(b).ok_or(Error::SingularResolvent)
}

/// Copies `src` into `dst` with its top-left corner at `(row, col)`.
pub fn put_block(dst: &mut ComplexMatrix, row: usize, col: usize, src: &ComplexMatrix) {
    if src.nrows() == 0 || src.ncols() == 0 {
        return;
    }
    dst.view_mut((row, col), (src.nrows(), src.ncols())).copy_from(src);
}

/// Owned copy of the `rows x cols` block at `(row, col)`.
pub fn block(m: &ComplexMatrix, row: usize, col: usize, rows: usize, cols: usize) -> ComplexMatrix {
    if rows == 0 || cols == 0 {
        return ComplexMatrix::zeros(rows, cols);
    }
    m.view((row, col), (rows, cols)).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn real(rows: usize, cols: usize, data: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_row_iterator(rows, cols, data.iter().map(|&x| cr(x)))
    }

    fn random_hermitian(rng: &mut SeededRng, n: usize) -> ComplexMatrix {
        let g = rng.complex_gaussian_matrix(n, n);
        hermitian_part(&g)
    }

    #[test]
    fn eig_of_diagonal_is_sorted() {
        let eig = hermitian_eig(&real(2, 2, &[2.0, 0.0, 0.0, 3.0])).unwrap();
        assert!((eig.eigenvalues[0] - 3.0).abs() < 1e-14);
        assert!((eig.eigenvalues[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn eig_of_swap_matrix() {
        let eig = hermitian_eig(&real(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        assert!((eig.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((eig.eigenvalues[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut rng = SeededRng::new(11);
        let h = random_hermitian(&mut rng, 6);
        let eig = hermitian_eig(&h).unwrap();
        let norm = operator_norm(&h);
        let rec = eig.reassemble(|l| l);
        assert!(operator_norm(&(&rec - &h)) <= 1e-10 * norm);
        assert!(unitarity_defect(&eig.eigenvectors) <= TOL_EIG);
        for (j, &l) in eig.eigenvalues.iter().enumerate() {
            let v = eig.eigenvectors.column(j).into_owned();
            let r = &h * &v - v.scale(l);
            assert!(r.norm() <= TOL_EIG * norm);
        }
        assert!(eig.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn eig_rejects_rectangular() {
        assert!(matches!(
            hermitian_eig(&ComplexMatrix::zeros(2, 3)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn projection_clips_negative_eigenvalues() {
        let p = project_psd(&real(2, 2, &[1.0, 0.0, 0.0, -1.0])).unwrap();
        assert!(max_abs(&(p - real(2, 2, &[1.0, 0.0, 0.0, 0.0]))) < 1e-14);

        let p = project_psd(&real(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        assert!(max_abs(&(p - real(2, 2, &[0.5, 0.5, 0.5, 0.5]))) < 1e-14);
    }

    #[test]
    fn projection_fixes_psd_input() {
        let mut rng = SeededRng::new(3);
        let g = rng.complex_gaussian_matrix(5, 3);
        let h = &g * g.adjoint();
        let p = project_psd(&h).unwrap();
        assert!(operator_norm(&(&p - &h)) <= 1e-12 * operator_norm(&h));
    }

    #[test]
    fn factor_identity_and_rank_one() {
        let f = psd_factor(&identity(3), TOL_RANK).unwrap();
        assert_eq!(f.ncols(), 3);
        assert!(max_abs(&(&f * f.adjoint() - identity(3))) < 1e-14);

        let v = ComplexVector::from_vec(vec![c(1.0, 1.0), c(0.5, 0.0), c(0.0, -2.0)]);
        let h = &v * v.adjoint();
        let f = psd_factor(&h, TOL_RANK).unwrap();
        assert_eq!(f.ncols(), 1);
        assert!(max_abs(&(&f * f.adjoint() - &h)) < 1e-13);
    }

    #[test]
    fn factor_of_cauchy_matrix() {
        let z = [0.0, 0.5];
        let h = ComplexMatrix::from_fn(2, 2, |i, j| cr(1.0 / (1.0 - z[i] * z[j])));
        let f = psd_factor(&h, TOL_RANK).unwrap();
        assert_eq!(f.ncols(), 2);
        assert!(max_abs(&(&f * f.adjoint() - &h)) < 1e-10);
    }

    #[test]
    fn factor_rejects_indefinite() {
        let err = psd_factor(&real(2, 2, &[1.0, 0.0, 0.0, -0.5]), TOL_RANK).unwrap_err();
        assert!(matches!(err, Error::NotPsd { .. }));
    }

    #[test]
    fn factor_of_zero_matrix_has_no_columns() {
        let f = psd_factor(&ComplexMatrix::zeros(3, 3), TOL_RANK).unwrap();
        assert_eq!(f.shape(), (3, 0));
    }

    #[test]
    fn basis_of_collinear_generators() {
        let gens = vec![
            ComplexVector::from_vec(vec![cr(1.0), cr(0.0)]),
            ComplexVector::from_vec(vec![cr(2.0), cr(0.0)]),
        ];
        let b = orthonormal_basis(&gens, TOL_RANK).unwrap();
        assert_eq!(b.ncols(), 1);
        assert!((b[(0, 0)].norm() - 1.0).abs() < 1e-14);
        assert!(b[(1, 0)].norm() < 1e-14);
    }

    #[test]
    fn basis_of_empty_and_full_families() {
        assert_eq!(orthonormal_basis(&[], TOL_RANK).unwrap().ncols(), 0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let gens = vec![
            ComplexVector::from_vec(vec![cr(s), cr(s)]),
            ComplexVector::from_vec(vec![cr(s), cr(-s)]),
        ];
        let b = orthonormal_basis(&gens, TOL_RANK).unwrap();
        assert_eq!(b.ncols(), 2);
        assert!(unitarity_defect(&b) < 1e-14);
    }

    #[test]
    fn basis_rejects_mixed_lengths() {
        let gens = vec![ComplexVector::zeros(2), ComplexVector::zeros(3)];
        assert!(matches!(orthonormal_basis(&gens, TOL_RANK), Err(Error::Dimension(_))));
    }

    #[test]
    fn complement_completes_basis() {
        let mut rng = SeededRng::new(5);
        let g = rng.complex_gaussian_matrix(5, 2);
        let b = column_basis(&g, TOL_RANK);
        let m = orthonormal_complement(&b);
        assert_eq!(m.ncols(), 3);
        let mut full = ComplexMatrix::zeros(5, 5);
        put_block(&mut full, 0, 0, &b);
        put_block(&mut full, 0, 2, &m);
        assert!(unitarity_defect(&full) < 1e-13);
    }

    #[test]
    fn gram_match_identity() {
        let gm = gram_matched_unitary(&identity(2), &identity(2), TOL_GRAM).unwrap();
        assert_eq!(gm.v.shape(), (2, 2));
        let applied = &gm.basis_range * &gm.v * gm.basis_domain.adjoint();
        assert!(max_abs(&(applied - identity(2))) < 1e-14);
    }

    #[test]
    fn gram_match_unit_vectors() {
        let xs = real(2, 1, &[1.0, 0.0]);
        let ys = real(2, 1, &[0.0, 1.0]);
        let gm = gram_matched_unitary(&xs, &ys, TOL_GRAM).unwrap();
        assert_eq!(gm.v.shape(), (1, 1));
        let mapped = &gm.basis_range * &gm.v * gm.basis_domain.adjoint() * &xs;
        assert!(max_abs(&(mapped - ys)) < 1e-14);
    }

    #[test]
    fn gram_match_rejects_mismatch() {
        let xs = real(2, 1, &[1.0, 0.0]);
        let ys = real(2, 1, &[2.0, 0.0]);
        assert!(matches!(
            gram_matched_unitary(&xs, &ys, TOL_GRAM),
            Err(Error::GramMismatch { .. })
        ));
    }

    #[test]
    fn operator_norm_examples() {
        assert!((operator_norm(&real(2, 2, &[0.0, 1.0, 0.0, 0.0])) - 1.0).abs() < 1e-14);
        assert!((operator_norm(&real(2, 2, &[3.0, 0.0, 0.0, -4.0])) - 4.0).abs() < 1e-14);
        assert_eq!(operator_norm(&ComplexMatrix::zeros(0, 3)), 0.0);
    }

    #[test]
    fn zero_dimensional_products_keep_shape() {
        let a = ComplexMatrix::zeros(2, 0);
        let b = ComplexMatrix::zeros(0, 3);
        let p = &a * &b;
        assert_eq!(p.shape(), (2, 3));
        assert_eq!(max_abs(&p), 0.0);
        assert_eq!((b.adjoint() * a.adjoint()).shape(), (3, 2));
        assert_eq!(solve(&ComplexMatrix::zeros(0, 0), &b).unwrap().shape(), (0, 3));
    }
}
