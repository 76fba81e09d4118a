//! Finite-dimensional Banach norms on `C^d`, standing in for the space X.
//!
//! All norms act on moduli of the complex coordinates. Functionals are paired
//! with vectors through `Re sum_j conj(g_j) v_j`; [`NormSpec::ascent_direction`]
//! returns a norming functional for that pairing and [`NormSpec::dual`] the
//! norm measuring such functionals.

use std::fmt;
use std::ops::{Deref, DerefMut};
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Relative tolerance used to detect ties for the sup-norm subgradient.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NormError {
    #[error("vector has dimension {got}, norm expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("p < 1 (got {0}); not a norm")]
    ExponentBelowOne(f64),
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("weights must be finite and positive")]
    InvalidWeights,
    #[error("Gram matrix must be square, Hermitian and positive definite")]
    InvalidGram,
    #[error("inner product requires a hilbert norm, got {0}")]
    NotHilbert(String),
    #[error("zero vector has no canonical ascent direction")]
    ZeroVector,
    #[error("invalid norm spec {spec:?}: {reason}")]
    Parse { spec: String, reason: String },
}

/// An exponent `p` in `[1, inf]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn finite(p: f64) -> Result<Self, NormError> {
        if p.is_nan() || p < 1.0 {
            return Err(NormError::ExponentBelowOne(p));
        }
        if p.is_infinite() {
            return Ok(Exponent::Infinity);
        }
        Ok(Exponent::Finite(p))
    }

    /// Hoelder conjugate.
    pub fn conjugate(self) -> Self {
        match self {
            Exponent::Infinity => Exponent::Finite(1.0),
            Exponent::Finite(p) if p == 1.0 => Exponent::Infinity,
            Exponent::Finite(p) if p == 2.0 => Exponent::Finite(2.0),
            Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
        }
    }

    /// `1/p`, zero for `p = inf`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Infinity => 0.0,
            Exponent::Finite(p) => p.recip(),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Infinity => f.write_str("inf"),
            Exponent::Finite(p) => write!(f, "{p}"),
        }
    }
}

/// Hermitian positive-definite Gram matrix with its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct Gram {
    matrix: DMatrix<Complex64>,
    inverse: DMatrix<Complex64>,
}

impl Gram {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self, NormError> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(NormError::InvalidGram);
        }
        let scale = matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let asymmetry = (&matrix - matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if !(scale > 0.0) || asymmetry > 1e-12 * scale {
            return Err(NormError::InvalidGram);
        }
        let min_eigenvalue = matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if !(min_eigenvalue > 1e-14 * scale) {
            return Err(NormError::InvalidGram);
        }
        let inverse = matrix
            .clone()
            .cholesky()
            .ok_or(NormError::InvalidGram)?
            .inverse();
        Ok(Self { matrix, inverse })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim),
            inverse: DMatrix::identity(dim, dim),
        }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn is_identity(&self) -> bool {
        self.matrix == DMatrix::identity(self.matrix.nrows(), self.matrix.ncols())
    }

    fn inverted(&self) -> Self {
        Self {
            matrix: self.inverse.clone(),
            inverse: self.matrix.clone(),
        }
    }

    fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let d = v.len();
        (0..d)
            .map(|i| (0..d).map(|j| self.matrix[(i, j)] * v[j]).sum())
            .collect()
    }

    /// `(u, v) = sum_{ij} conj(v_i) G_ij u_j`.
    fn form(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        self.apply(u)
            .iter()
            .zip(v)
            .map(|(gu, vi)| vi.conj() * gu)
            .sum()
    }

    /// Extreme eigenvalues `(min, max)`.
    fn spectrum_bounds(&self) -> (f64, f64) {
        let eig = self.matrix.clone().symmetric_eigenvalues();
        let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
        let max = eig.iter().copied().fold(0.0, f64::max);
        (min, max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NormKind {
    Lp(Exponent),
    WeightedLp { p: Exponent, weights: Vec<f64> },
    Hilbert(Gram),
}

/// A norm on `C^dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NormSpec {
    kind: NormKind,
    dim: usize,
}

fn check_dim(dim: usize) -> Result<(), NormError> {
    if dim == 0 {
        Err(NormError::ZeroDimension)
    } else {
        Ok(())
    }
}

impl NormSpec {
    pub fn lp(p: f64, dim: usize) -> Result<Self, NormError> {
        check_dim(dim)?;
        Ok(Self {
            kind: NormKind::Lp(Exponent::finite(p)?),
            dim,
        })
    }

    pub fn linf(dim: usize) -> Result<Self, NormError> {
        check_dim(dim)?;
        Ok(Self {
            kind: NormKind::Lp(Exponent::Infinity),
            dim,
        })
    }

    /// `(sum_j w_j |v_j|^p)^{1/p}`, or `max_j w_j |v_j|` for `p = inf`.
    pub fn weighted(p: Exponent, weights: Vec<f64>) -> Result<Self, NormError> {
        if let Exponent::Finite(p) = p {
            Exponent::finite(p)?;
        }
        check_dim(weights.len())?;
        if weights.iter().any(|&w| !(w.is_finite() && w > 0.0)) {
            return Err(NormError::InvalidWeights);
        }
        let dim = weights.len();
        Ok(Self {
            kind: NormKind::WeightedLp { p, weights },
            dim,
        })
    }

    pub fn hilbert_identity(dim: usize) -> Result<Self, NormError> {
        check_dim(dim)?;
        Ok(Self {
            kind: NormKind::Hilbert(Gram::identity(dim)),
            dim,
        })
    }

    pub fn hilbert(gram: DMatrix<Complex64>) -> Result<Self, NormError> {
        let gram = Gram::new(gram)?;
        let dim = gram.matrix.nrows();
        Ok(Self {
            kind: NormKind::Hilbert(gram),
            dim,
        })
    }

    /// Reads a Gram matrix from JSON: an array of rows whose entries are
    /// numbers or `[re, im]` pairs.
    pub fn hilbert_from_file(path: &Path) -> Result<Self, NormError> {
        let spec = format!("hilbert:file={}", path.display());
        let text = std::fs::read_to_string(path).map_err(|e| NormError::Parse {
            spec: spec.clone(),
            reason: e.to_string(),
        })?;
        Self::hilbert_from_json(&text, &spec)
    }

    fn hilbert_from_json(text: &str, spec: &str) -> Result<Self, NormError> {
        let parse_err = |reason: String| NormError::Parse {
            spec: spec.to_string(),
            reason,
        };
        let rows: Vec<Vec<GramEntry>> =
            serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(parse_err("Gram matrix is not square".into()));
        }
        let matrix = DMatrix::from_fn(d, d, |i, j| rows[i][j].into());
        Self::hilbert(matrix)
    }

    pub fn kind(&self) -> &NormKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_hilbert(&self) -> bool {
        matches!(self.kind, NormKind::Hilbert(_))
            || matches!(self.kind, NormKind::Lp(Exponent::Finite(p)) if p == 2.0)
    }

    fn check(&self, v: &[Complex64]) -> Result<(), NormError> {
        if v.len() != self.dim {
            return Err(NormError::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok(())
    }

    pub fn norm(&self, v: &[Complex64]) -> Result<f64, NormError> {
        self.check(v)?;
        Ok(self.norm_unchecked(v))
    }

    /// `||v||^2`, read off the quadratic form for Hilbert norms so that
    /// integer data gives exact results.
    pub fn norm_squared(&self, v: &[Complex64]) -> Result<f64, NormError> {
        self.check(v)?;
        Ok(self.norm_squared_unchecked(v))
    }

    pub fn norm_squared_unchecked(&self, v: &[Complex64]) -> f64 {
        match &self.kind {
            NormKind::Lp(Exponent::Finite(p)) if *p == 2.0 => v.iter().map(|z| z.norm_sqr()).sum(),
            NormKind::Hilbert(gram) => gram.form(v, v).re.max(0.0),
            _ => self.norm_unchecked(v).powi(2),
        }
    }

    /// Norm without the dimension check; `v.len()` must equal `dim`.
    pub fn norm_unchecked(&self, v: &[Complex64]) -> f64 {
        match &self.kind {
            NormKind::Lp(p) => lp_norm(*p, v, None),
            NormKind::WeightedLp { p, weights } => lp_norm(*p, v, Some(weights)),
            NormKind::Hilbert(gram) => gram.form(v, v).re.max(0.0).sqrt(),
        }
    }

    /// The inner product `(u, v)_X`, linear in `u` and conjugate-linear in `v`.
    /// `lp:2` counts as the identity Gram matrix.
    pub fn inner_product(&self, u: &[Complex64], v: &[Complex64]) -> Result<Complex64, NormError> {
        self.check(u)?;
        self.check(v)?;
        match &self.kind {
            NormKind::Hilbert(gram) => Ok(gram.form(u, v)),
            NormKind::Lp(Exponent::Finite(p)) if *p == 2.0 => {
                Ok(u.iter().zip(v).map(|(a, b)| a * b.conj()).sum())
            }
            _ => Err(NormError::NotHilbert(self.to_string())),
        }
    }

    /// The norm of the dual space, for the pairing `Re sum conj(g_j) v_j`.
    pub fn dual(&self) -> NormSpec {
        let kind = match &self.kind {
            NormKind::Lp(p) => NormKind::Lp(p.conjugate()),
            NormKind::WeightedLp { p, weights } => {
                let q = p.conjugate();
                let weights = match (p, q) {
                    (Exponent::Finite(_), Exponent::Finite(q)) => {
                        weights.iter().map(|w| w.powf(1.0 - q)).collect()
                    }
                    _ => weights.iter().map(|w| w.recip()).collect(),
                };
                NormKind::WeightedLp { p: q, weights }
            }
            NormKind::Hilbert(gram) => NormKind::Hilbert(gram.inverted()),
        };
        NormSpec {
            kind,
            dim: self.dim,
        }
    }

    pub fn dual_norm(&self, g: &[Complex64]) -> Result<f64, NormError> {
        self.dual().norm(g)
    }

    /// A norming functional at `v`: `g` with `Re <g, v> = ||v||` and dual
    /// norm 1. For `1 < p < inf` this is the gradient of the norm at `v`.
    /// Ties of the sup norm share the functional evenly.
    pub fn ascent_direction(&self, v: &[Complex64]) -> Result<XVector, NormError> {
        self.check(v)?;
        let norm = self.norm_unchecked(v);
        if norm == 0.0 {
            return Err(NormError::ZeroVector);
        }
        let phase = |z: Complex64| {
            let r = z.norm();
            if r == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                z / r
            }
        };
        let out = match &self.kind {
            NormKind::Hilbert(gram) => gram.apply(v).into_iter().map(|z| z / norm).collect(),
            NormKind::Lp(p) => lp_ascent(*p, v, None, norm, phase),
            NormKind::WeightedLp { p, weights } => lp_ascent(*p, v, Some(weights), norm, phase),
        };
        Ok(XVector(out))
    }

    /// Constants `(a, b)` with `a ||v||_2 <= ||v|| <= b ||v||_2` for all `v`.
    pub fn euclidean_bounds(&self) -> (f64, f64) {
        let d = self.dim as f64;
        let plain = |p: Exponent| {
            let e = p.reciprocal() - 0.5;
            if e >= 0.0 {
                (1.0, d.powf(e))
            } else {
                (d.powf(e), 1.0)
            }
        };
        match &self.kind {
            NormKind::Lp(p) => plain(*p),
            NormKind::WeightedLp { p, weights } => {
                let (a, b) = plain(*p);
                let wmin = weights.iter().copied().fold(f64::INFINITY, f64::min);
                let wmax = weights.iter().copied().fold(0.0, f64::max);
                let r = p.reciprocal();
                let (lo, hi) = if r == 0.0 {
                    (wmin, wmax)
                } else {
                    (wmin.powf(r), wmax.powf(r))
                };
                (a * lo, b * hi)
            }
            NormKind::Hilbert(gram) => {
                let (min, max) = gram.spectrum_bounds();
                (min.sqrt(), max.sqrt())
            }
        }
    }

    /// Upper bound `b/a` on the distance of X to a Hilbert space, from
    /// [`euclidean_bounds`](Self::euclidean_bounds).
    pub fn hilbert_distance_bound(&self) -> f64 {
        let (a, b) = self.euclidean_bounds();
        b / a
    }
}

fn lp_norm(p: Exponent, v: &[Complex64], weights: Option<&[f64]>) -> f64 {
    let w = |j: usize| weights.map_or(1.0, |w| w[j]);
    match p {
        Exponent::Infinity => v
            .iter()
            .enumerate()
            .map(|(j, z)| w(j) * z.norm())
            .fold(0.0, f64::max),
        Exponent::Finite(p) if p == 1.0 => v.iter().enumerate().map(|(j, z)| w(j) * z.norm()).sum(),
        Exponent::Finite(p) => {
            let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if scale == 0.0 {
                return 0.0;
            }
            let sum: f64 = v
                .iter()
                .enumerate()
                .map(|(j, z)| {
                    let r = z.norm() / scale;
                    w(j) * if p == 2.0 { r * r } else { r.powf(p) }
                })
                .sum();
            scale
                * if p == 2.0 {
                    sum.sqrt()
                } else {
                    sum.powf(p.recip())
                }
        }
    }
}

fn lp_ascent(
    p: Exponent,
    v: &[Complex64],
    weights: Option<&[f64]>,
    norm: f64,
    phase: impl Fn(Complex64) -> Complex64,
) -> Vec<Complex64> {
    let w = |j: usize| weights.map_or(1.0, |w| w[j]);
    match p {
        Exponent::Infinity => {
            let max = norm;
            let ties: Vec<usize> = (0..v.len())
                .filter(|&j| w(j) * v[j].norm() >= max * (1.0 - TIE_TOLERANCE))
                .collect();
            let share = (ties.len() as f64).recip();
            let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
            for j in ties {
                out[j] = phase(v[j]) * (w(j) * share);
            }
            out
        }
        Exponent::Finite(p) if p == 1.0 => (0..v.len()).map(|j| phase(v[j]) * w(j)).collect(),
        Exponent::Finite(p) => (0..v.len())
            .map(|j| phase(v[j]) * (w(j) * (v[j].norm() / norm).powf(p - 1.0)))
            .collect(),
    }
}

/// `Re sum_j conj(g_j) v_j`.
pub fn dual_pairing(g: &[Complex64], v: &[Complex64]) -> f64 {
    g.iter().zip(v).map(|(a, b)| (a.conj() * b).re).sum()
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            NormKind::Lp(Exponent::Infinity) => write!(f, "linf:d={}", self.dim),
            NormKind::Lp(p) => write!(f, "lp:{p}:d={}", self.dim),
            NormKind::WeightedLp { p, weights } => {
                write!(f, "wlp:{p}:w=")?;
                for (i, w) in weights.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{w}")?;
                }
                Ok(())
            }
            NormKind::Hilbert(gram) if gram.is_identity() => write!(f, "hilbert:d={}", self.dim),
            NormKind::Hilbert(gram) => {
                let m = gram.matrix();
                let rows: Vec<Vec<GramEntry>> = (0..m.nrows())
                    .map(|i| {
                        (0..m.ncols())
                            .map(|j| {
                                let z = m[(i, j)];
                                if z.im == 0.0 {
                                    GramEntry::Real(z.re)
                                } else {
                                    GramEntry::Complex([z.re, z.im])
                                }
                            })
                            .collect()
                    })
                    .collect();
                let json = serde_json::to_string(&rows).map_err(|_| fmt::Error)?;
                write!(f, "hilbert:gram={json}")
            }
        }
    }
}

impl TryFrom<String> for NormSpec {
    type Error = NormError;

    fn try_from(s: String) -> Result<Self, NormError> {
        s.parse()
    }
}

impl From<NormSpec> for String {
    fn from(spec: NormSpec) -> Self {
        spec.to_string()
    }
}

impl FromStr for NormSpec {
    type Err = NormError;

    /// Grammar: `lp:<p>:d=<d>`, `linf:d=<d>`, `hilbert:d=<d>`,
    /// `hilbert:file=<path>`, `hilbert:gram=<json rows>`,
    /// `wlp:<p>:w=<w1>,<w2>,...` (`<p>` may be `inf`).
    fn from_str(s: &str) -> Result<Self, NormError> {
        let err = |reason: &str| NormError::Parse {
            spec: s.to_string(),
            reason: reason.to_string(),
        };
        let parts: Vec<&str> = s.trim().split(':').map(str::trim).collect();
        let dim = |field: &str| -> Result<usize, NormError> {
            field
                .strip_prefix("d=")
                .ok_or_else(|| err("expected d=<dimension>"))?
                .parse::<usize>()
                .map_err(|_| err("dimension is not a positive integer"))
        };
        let exponent = |field: &str| -> Result<Exponent, NormError> {
            match field {
                "inf" | "infinity" => Ok(Exponent::Infinity),
                _ => {
                    let p = field
                        .parse::<f64>()
                        .map_err(|_| err("exponent is not a number"))?;
                    Exponent::finite(p)
                }
            }
        };
        match parts.as_slice() {
            ["lp", p, d] => match exponent(p)? {
                Exponent::Infinity => NormSpec::linf(dim(d)?),
                Exponent::Finite(p) => NormSpec::lp(p, dim(d)?),
            },
            ["linf", d] => NormSpec::linf(dim(d)?),
            ["hilbert", field] => {
                if let Some(path) = field.strip_prefix("file=") {
                    NormSpec::hilbert_from_file(Path::new(path))
                } else if let Some(json) = field.strip_prefix("gram=") {
                    NormSpec::hilbert_from_json(json, s)
                } else {
                    NormSpec::hilbert_identity(dim(field)?)
                }
            }
            ["wlp", p, w] => {
                let list = w
                    .strip_prefix("w=")
                    .ok_or_else(|| err("expected w=<weights>"))?;
                let weights = list
                    .split(',')
                    .map(|x| x.trim().parse::<f64>().map_err(|_| err("bad weight")))
                    .collect::<Result<Vec<_>, _>>()?;
                NormSpec::weighted(exponent(p)?, weights)
            }
            _ => Err(err("unknown norm kind; expected lp, linf, hilbert or wlp")),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
enum GramEntry {
    Real(f64),
    Complex([f64; 2]),
}

impl From<GramEntry> for Complex64 {
    fn from(e: GramEntry) -> Self {
        match e {
            GramEntry::Real(x) => Complex64::new(x, 0.0),
            GramEntry::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

/// A vector of X. Serializes as an array of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct XVector(pub Vec<Complex64>);

impl XVector {
    pub fn zeros(dim: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); dim])
    }

    /// The standard basis vector `e_index` (zero-based).
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[index] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn from_reals(values: &[f64]) -> Self {
        Self(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl Deref for XVector {
    type Target = [Complex64];

    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

impl DerefMut for XVector {
    fn deref_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }
}

impl From<Vec<Complex64>> for XVector {
    fn from(v: Vec<Complex64>) -> Self {
        Self(v)
    }
}
