//! JSON file formats.
//!
//! Complex numbers are `[re, im]` pairs and matrices are row-major lists of
//! rows. Every emitted document carries `format_version` and the generator
//! version string; output is pretty-printed with a trailing newline so equal
//! inputs give byte-identical files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agler_solver::{InterpolationProblem, SolveReport, SolveStatus};
use crate::aux_function::AuxiliaryFunction;
use crate::cpkernel::CpKernel;
use crate::error::{Error, Result};
use crate::numerics::{Complex, ComplexMatrix};
use crate::testfam::{
    make_builtin, BuiltinFamily, DomainDescriptor, Monomial, Point, RationalFunction, TestFunction, TestFunctionFamily,
};

pub const FORMAT_VERSION: u32 = 1;
pub const GENERATOR: &str = concat!("nevanlinna ", env!("CARGO_PKG_VERSION"));

pub type ComplexJson = [f64; 2];
pub type MatrixJson = Vec<Vec<ComplexJson>>;

fn format_version() -> u32 {
    FORMAT_VERSION
}

fn generator() -> String {
    GENERATOR.to_string()
}

pub fn complex_to_json(z: Complex) -> ComplexJson {
    [z.re, z.im]
}

pub fn complex_from_json(z: &ComplexJson) -> Complex {
    Complex::new(z[0], z[1])
}

pub fn point_to_json(p: &[Complex]) -> Vec<ComplexJson> {
    p.iter().copied().map(complex_to_json).collect()
}

pub fn point_from_json(p: &[ComplexJson]) -> Point {
    p.iter().map(complex_from_json).collect()
}

pub fn matrix_to_json(m: &ComplexMatrix) -> MatrixJson {
    m.row_iter()
        .map(|row| row.iter().copied().map(complex_to_json).collect())
        .collect()
}

/// Parses a matrix whose shape is read off the data; it must be non-empty
/// and rectangular.
pub fn matrix_from_json(m: &MatrixJson) -> Result<ComplexMatrix> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(Error::Parse("empty matrix".into()));
    }
    matrix_from_json_shaped(m, rows, cols)
}

/// Parses a matrix of known shape. A matrix with no rows is written as `[]`,
/// so a zero row count accepts exactly that.
pub fn matrix_from_json_shaped(m: &MatrixJson, rows: usize, cols: usize) -> Result<ComplexMatrix> {
    if m.len() != rows || m.iter().any(|r| r.len() != cols) {
        return Err(Error::Parse(format!("matrix does not have shape {rows}x{cols}")));
    }
    if m.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Parse("non-finite matrix entry".into()));
    }
    Ok(ComplexMatrix::from_fn(rows, cols, |i, j| complex_from_json(&m[i][j])))
}

fn to_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_pretty(value)?)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainName {
    Disc,
    Bidisc,
    Custom,
}

/// One `coeff * z^exponent` term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub exponent: Vec<u32>,
    pub coeff: ComplexJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalJson {
    pub numerator: Vec<TermJson>,
    pub denominator: Vec<TermJson>,
}

/// A user-supplied family of rational test functions on a domain in `C^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomFamilyJson {
    pub dimension: usize,
    pub functions: Vec<RationalJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub common_zero: Option<Vec<ComplexJson>>,
}

impl CustomFamilyJson {
    pub fn to_family(&self) -> Result<TestFunctionFamily> {
        let terms = |ts: &[TermJson]| -> Result<Vec<Monomial>> {
            ts.iter()
                .map(|t| {
                    if t.exponent.len() != self.dimension {
                        return Err(Error::Parse(format!(
                            "monomial exponent of length {} in dimension {}",
                            t.exponent.len(),
                            self.dimension
                        )));
                    }
                    Ok(Monomial {
                        exponent: t.exponent.clone(),
                        coeff: complex_from_json(&t.coeff),
                    })
                })
                .collect()
        };
        if self.functions.is_empty() {
            return Err(Error::Parse("custom family without test functions".into()));
        }
        let functions = self
            .functions
            .iter()
            .map(|f| {
                if f.denominator.is_empty() {
                    return Err(Error::Parse("rational test function with empty denominator".into()));
                }
                Ok(TestFunction::Rational(RationalFunction {
                    numerator: terms(&f.numerator)?,
                    denominator: terms(&f.denominator)?,
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TestFunctionFamily {
            domain: DomainDescriptor::custom(self.dimension),
            functions,
            common_zero: self.common_zero.as_deref().map(point_from_json),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_solve: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Recenter the family at this point before solving.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recenter_at: Option<Vec<ComplexJson>>,
}

/// An interpolation problem as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    #[serde(default = "format_version")]
    pub format_version: u32,
    pub domain: DomainName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom_family: Option<CustomFamilyJson>,
    pub points: Vec<Vec<ComplexJson>>,
    pub targets: Vec<MatrixJson>,
    #[serde(default)]
    pub options: ProblemOptions,
}

/// A parsed problem file: the (possibly recentered) problem and its options.
#[derive(Debug, Clone)]
pub struct LoadedProblem {
    pub problem: InterpolationProblem,
    pub options: ProblemOptions,
    pub recentered: bool,
}

impl ProblemFile {
    pub fn from_problem(problem: &InterpolationProblem, domain: DomainName) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            domain,
            custom_family: None,
            points: problem.points().iter().map(|p| point_to_json(p)).collect(),
            targets: problem.targets().iter().map(matrix_to_json).collect(),
            options: ProblemOptions::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }

    pub fn to_json(&self) -> Result<String> {
        to_pretty(self)
    }

    pub fn family(&self) -> Result<TestFunctionFamily> {
        match (self.domain, &self.custom_family) {
            (DomainName::Disc, None) => Ok(make_builtin(BuiltinFamily::Disc)),
            (DomainName::Bidisc, None) => Ok(make_builtin(BuiltinFamily::Bidisc)),
            (DomainName::Custom, Some(c)) => c.to_family(),
            (DomainName::Custom, None) => Err(Error::Parse("custom domain needs custom_family".into())),
            (_, Some(_)) => Err(Error::Parse(
                "custom_family is only allowed with domain \"custom\"".into(),
            )),
        }
    }

    /// Validates the file and builds the problem, recentering first when
    /// `options.recenter_at` is set.
    pub fn to_problem(&self) -> Result<LoadedProblem> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported format_version {}",
                self.format_version
            )));
        }
        let mut family = self.family()?;
        let recentered = match &self.options.recenter_at {
            Some(w0) => {
                family = family.recenter(&point_from_json(w0))?;
                true
            }
            None => false,
        };
        let targets = self.targets.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
        let points = self.points.iter().map(|p| point_from_json(p)).collect();
        let problem = InterpolationProblem::new(family, points, targets)?;
        Ok(LoadedProblem {
            problem,
            options: self.options.clone(),
            recentered,
        })
    }
}

/// Output of `solve`: the status and, when feasible, the decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionFile {
    #[serde(default = "format_version")]
    pub format_version: u32,
    #[serde(default = "generator")]
    pub generator: String,
    pub status: String,
    pub points: usize,
    pub block_size: usize,
    pub affine_residual: f64,
    pub min_eigenvalue: f64,
    pub iterations: usize,
    /// The family the decomposition refers to (after any recentering).
    pub family: TestFunctionFamily,
    /// One `(n d) x (n d)` matrix per test function; empty unless feasible.
    pub components: Vec<MatrixJson>,
}

impl DecompositionFile {
    pub fn from_report(problem: &InterpolationProblem, report: &SolveReport) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            generator: GENERATOR.to_string(),
            status: report.status.as_str().to_string(),
            points: problem.len(),
            block_size: problem.d_out(),
            affine_residual: report.affine_residual,
            min_eigenvalue: report.min_eigenvalue,
            iterations: report.iterations,
            family: problem.family().clone(),
            components: report
                .decomposition
                .as_ref()
                .map(|k| k.components().iter().map(matrix_to_json).collect())
                .unwrap_or_default(),
        }
    }

    /// The stored kernel, or `None` when the file records a failed solve.
    pub fn kernel(&self) -> Result<Option<CpKernel>> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported format_version {}",
                self.format_version
            )));
        }
        if self.status != SolveStatus::Feasible.as_str() {
            return Ok(None);
        }
        let size = self.points * self.block_size;
        let comps = self
            .components
            .iter()
            .map(|m| matrix_from_json_shaped(m, size, size))
            .collect::<Result<Vec<_>>>()?;
        Ok(Some(CpKernel::new(self.points, self.block_size, comps)?))
    }
}

/// Serialized [`AuxiliaryFunction`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxFile {
    #[serde(default = "format_version")]
    pub format_version: u32,
    #[serde(default = "generator")]
    pub generator: String,
    pub state_dims: Vec<usize>,
    pub dim_m1: usize,
    pub dim_m2: usize,
    pub d_in: usize,
    pub d_out: usize,
    pub decomposition_residual: f64,
    pub q11: MatrixJson,
    pub q12: MatrixJson,
    pub q21: MatrixJson,
    pub q22: MatrixJson,
}

impl AuxFile {
    pub fn from_aux(aux: &AuxiliaryFunction) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            generator: GENERATOR.to_string(),
            state_dims: aux.state_dims().to_vec(),
            dim_m1: aux.dim_m1(),
            dim_m2: aux.dim_m2(),
            d_in: aux.d_in(),
            d_out: aux.d_out(),
            decomposition_residual: aux.decomposition_residual(),
            q11: matrix_to_json(aux.q11()),
            q12: matrix_to_json(aux.q12()),
            q21: matrix_to_json(aux.q21()),
            q22: matrix_to_json(aux.q22()),
        }
    }

    fn blocks(&self) -> Result<[ComplexMatrix; 4]> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported format_version {}",
                self.format_version
            )));
        }
        let l: usize = self.state_dims.iter().sum();
        let (dom, ran) = (self.dim_m1 + self.d_out, self.dim_m2 + self.d_in);
        Ok([
            matrix_from_json_shaped(&self.q11, l, l)?,
            matrix_from_json_shaped(&self.q12, l, dom)?,
            matrix_from_json_shaped(&self.q21, ran, l)?,
            matrix_from_json_shaped(&self.q22, ran, dom)?,
        ])
    }

    pub fn to_json(&self) -> Result<String> {
        to_pretty(self)
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Loads and checks that `Q` is unitary.
    pub fn to_aux(&self) -> Result<AuxiliaryFunction> {
        let [q11, q12, q21, q22] = self.blocks()?;
        AuxiliaryFunction::from_blocks(
            self.state_dims.clone(),
            self.dim_m1,
            self.dim_m2,
            self.d_in,
            self.d_out,
            q11,
            q12,
            q21,
            q22,
            self.decomposition_residual,
        )
    }

    /// Loads with shape checks only, so a damaged `Q` can still be evaluated
    /// and caught by verification.
    pub fn to_aux_unverified(&self) -> Result<AuxiliaryFunction> {
        let [q11, q12, q21, q22] = self.blocks()?;
        AuxiliaryFunction::from_blocks_unverified(
            self.state_dims.clone(),
            self.dim_m1,
            self.dim_m2,
            self.d_in,
            self.d_out,
            q11,
            q12,
            q21,
            q22,
            self.decomposition_residual,
        )
    }
}
