//! Finite families of test functions on a domain.
//!
//! A family `psi_1..psi_K` is evaluated pointwise into an [`EvalVector`]; with
//! finitely many test functions the algebra of bounded functions on the family
//! is just `C^K` with componentwise operations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Complex;
use crate::rng::SeededRng;

/// A point of `C^m`.
pub type Point = Vec<Complex>;

/// Default distance kept from the boundary when sampling interior points.
pub const DEFAULT_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Disc,
    Polydisc,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainDescriptor {
    pub kind: DomainKind,
    pub dimension: usize,
    pub margin: f64,
}

impl DomainDescriptor {
    pub fn disc() -> Self {
        Self {
            kind: DomainKind::Disc,
            dimension: 1,
            margin: DEFAULT_MARGIN,
        }
    }

    pub fn polydisc(m: usize) -> Self {
        Self {
            kind: DomainKind::Polydisc,
            dimension: m,
            margin: DEFAULT_MARGIN,
        }
    }

    pub fn custom(m: usize) -> Self {
        Self {
            kind: DomainKind::Custom,
            dimension: m,
            margin: DEFAULT_MARGIN,
        }
    }

    /// Coordinate-wise membership. Custom domains have no intrinsic test and
    /// are checked through the family instead (see [`TestFunctionFamily::contains`]).
    fn contains_coordinates(&self, z: &[Complex]) -> bool {
        match self.kind {
            DomainKind::Disc | DomainKind::Polydisc => z.iter().all(|w| w.norm() < 1.0),
            DomainKind::Custom => z.iter().all(|w| w.re.is_finite() && w.im.is_finite()),
        }
    }
}

/// One term `coeff * z^exponent` of a multivariate polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub exponent: Vec<u32>,
    pub coeff: Complex,
}

/// Quotient of two sparse multivariate polynomials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalFunction {
    pub numerator: Vec<Monomial>,
    pub denominator: Vec<Monomial>,
}

fn eval_poly(terms: &[Monomial], z: &[Complex]) -> Result<Complex> {
    let mut acc = Complex::new(0.0, 0.0);
    for t in terms {
        if t.exponent.len() != z.len() {
            return Err(Error::Dimension(format!(
                "monomial of arity {} at a point of dimension {}",
                t.exponent.len(),
                z.len()
            )));
        }
        let mut term = t.coeff;
        for (w, &e) in z.iter().zip(&t.exponent) {
            term *= w.powu(e);
        }
        acc += term;
    }
    Ok(acc)
}

impl RationalFunction {
    pub fn eval(&self, z: &[Complex]) -> Result<Complex> {
        let den = eval_poly(&self.denominator, z)?;
        if den.norm() == 0.0 {
            return Err(Error::Domain("pole of a rational test function".into()));
        }
        Ok(eval_poly(&self.numerator, z)? / den)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    /// `z -> z_index`.
    Coordinate(usize),
    Rational(RationalFunction),
    /// `z -> (center - inner(z)) / (1 - conj(center) inner(z))`.
    Mobius {
        center: Complex,
        inner: Box<TestFunction>,
    },
}

impl TestFunction {
    pub fn eval(&self, z: &[Complex]) -> Result<Complex> {
        match self {
            TestFunction::Coordinate(k) => z
                .get(*k)
                .copied()
                .ok_or_else(|| Error::Dimension(format!("coordinate {k} of a point of dimension {}", z.len()))),
            TestFunction::Rational(r) => r.eval(z),
            TestFunction::Mobius { center, inner } => {
                let w = inner.eval(z)?;
                Ok((center - w) / (Complex::new(1.0, 0.0) - center.conj() * w))
            }
        }
    }
}

/// Values `(psi_1(z), ..., psi_K(z))`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalVector(pub Vec<Complex>);

impl EvalVector {
    pub fn zeros(k: usize) -> Self {
        Self(vec![Complex::new(0.0, 0.0); k])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Complex] {
        &self.0
    }

    /// `max_k |psi_k(z)|`.
    pub fn sup_norm(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |a, w| a.max(w.norm()))
    }

    pub fn conj(&self) -> Self {
        Self(self.0.iter().map(|w| w.conj()).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionFamily {
    pub domain: DomainDescriptor,
    pub functions: Vec<TestFunction>,
    pub common_zero: Option<Point>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinFamily {
    Disc,
    Bidisc,
}

pub fn make_builtin(kind: BuiltinFamily) -> TestFunctionFamily {
    match kind {
        BuiltinFamily::Disc => TestFunctionFamily::polydisc_coordinates(DomainDescriptor::disc()),
        BuiltinFamily::Bidisc => TestFunctionFamily::polydisc_coordinates(DomainDescriptor::polydisc(2)),
    }
}

impl TestFunctionFamily {
    /// Coordinate functions of the unit polydisc of `domain.dimension` variables.
    pub fn polydisc_coordinates(domain: DomainDescriptor) -> Self {
        let m = domain.dimension;
        Self {
            domain,
            functions: (0..m).map(TestFunction::Coordinate).collect(),
            common_zero: Some(vec![Complex::new(0.0, 0.0); m]),
        }
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.domain.dimension
    }

    fn raw_eval(&self, z: &[Complex]) -> Result<EvalVector> {
        self.functions
            .iter()
            .map(|f| f.eval(z))
            .collect::<Result<Vec<_>>>()
            .map(EvalVector)
    }

    fn check_point(&self, z: &[Complex]) -> Result<EvalVector> {
        if z.len() != self.domain.dimension {
            return Err(Error::Dimension(format!(
                "point of dimension {} for a domain in C^{}",
                z.len(),
                self.domain.dimension
            )));
        }
        if !self.domain.contains_coordinates(z) {
            return Err(Error::Domain(format!("{z:?}")));
        }
        let e = self.raw_eval(z)?;
        if !(e.sup_norm() < 1.0) {
            return Err(Error::Domain(format!(
                "{z:?}: test functions reach modulus {}",
                e.sup_norm()
            )));
        }
        Ok(e)
    }

    pub fn contains(&self, z: &[Complex]) -> bool {
        self.check_point(z).is_ok()
    }

    /// `E(z)`; fails outside the domain.
    pub fn evaluate(&self, z: &[Complex]) -> Result<EvalVector> {
        self.check_point(z)
    }

    /// Replaces each `psi` by `(psi(w0) - psi) / (1 - conj(psi(w0)) psi)` so that
    /// every test function vanishes at `w0`.
    pub fn recenter(&self, w0: &[Complex]) -> Result<TestFunctionFamily> {
        let at_center = self.evaluate(w0)?;
        let functions = self
            .functions
            .iter()
            .zip(at_center.values())
            .map(|(f, &a)| TestFunction::Mobius {
                center: a,
                inner: Box::new(f.clone()),
            })
            .collect();
        Ok(TestFunctionFamily {
            domain: self.domain.clone(),
            functions,
            common_zero: Some(w0.to_vec()),
        })
    }

    /// Deterministic pseudo-random interior points, each coordinate of modulus
    /// at most `1 - margin`.
    pub fn sample_interior(&self, count: usize, seed: u64) -> Result<Vec<Point>> {
        if count == 0 {
            return Err(Error::InvalidProblem("sample count must be positive".into()));
        }
        if self.domain.kind == DomainKind::Custom {
            return Err(Error::Unsupported("sampling a custom domain".into()));
        }
        let radius = 1.0 - self.domain.margin;
        let mut rng = SeededRng::new(seed);
        Ok((0..count)
            .map(|_| (0..self.domain.dimension).map(|_| rng.disc_point(radius)).collect())
            .collect())
    }
}

/// Free-function form of [`TestFunctionFamily::evaluate`].
pub fn evaluate_family(fam: &TestFunctionFamily, z: &[Complex]) -> Result<EvalVector> {
    fam.evaluate(z)
}

/// Free-function form of [`TestFunctionFamily::recenter`].
pub fn recenter(fam: &TestFunctionFamily, w0: &[Complex]) -> Result<TestFunctionFamily> {
    fam.recenter(w0)
}
