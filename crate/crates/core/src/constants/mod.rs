//! Estimators for the norm constants that separate Hilbert spaces from
//! general Banach spaces: the operator norm of the Fourier transform,
//! Khinchin-type sign averages, character systems and the torus functional.
//!
//! Every estimate carries a witness that reproduces its lower bound.

mod khinchin;
mod opnorm;
mod probe;
mod sweep;
mod torus;

pub use khinchin::{
    character_system_ratio, khinchin_estimate, khinchin_ratio_exact, khinchin_ratio_monte_carlo,
    MAX_ENUMERATION,
};
pub use opnorm::{operator_norm_lower, transform_ratio};
pub use probe::{hilbertness_probe, ProbeReport};
pub use sweep::{run_member, scaling_sweep, Experiment, Member, SweepOptions};
pub use torus::{torus_adaptive, torus_partial_sum_ratio, TorusResult, MAX_TORUS_POINTS};

use serde::{Deserialize, Serialize};

use crate::function::{FunctionError, VectorFunction};
use crate::group::{FiniteAbelianGroup, GroupError};
use crate::norms::{NormError, NormSpec, XVector};
use crate::tower::{Tower, TowerError};
use crate::transform::TransformError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConstantsError {
    #[error("budget must allow at least one {0}")]
    ZeroBudget(&'static str),
    #[error("need at least one vector")]
    NoVectors,
    #[error("all vectors are zero")]
    ZeroVectors,
    #[error("{n} vectors exceed the enumeration cap of {max}")]
    TooManyVectors { n: usize, max: usize },
    #[error("{vectors} vectors but {characters} characters")]
    LengthMismatch { vectors: usize, characters: usize },
    #[error("torus coefficients must be indexed -n..n (odd count), got {0}")]
    EvenCoefficientCount(usize),
    #[error("{points} quadrature points below the floor 4n+4 = {min}")]
    TooFewPoints { points: usize, min: usize },
    #[error("experiment {experiment} needs {field}")]
    MissingField {
        experiment: &'static str,
        field: &'static str,
    },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error(transparent)]
    Function(#[from] FunctionError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Tower(#[from] TowerError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstantName {
    /// `||F||` on `L2(G, X)`.
    OperatorNorm,
    /// `E ||sum eps_i x_i||^2 / sum ||x_i||^2`.
    KhinchinRatio,
    /// `max(r, 1/r)` over sign averages.
    KhinchinTwoSided,
    /// `max(r, 1/r)` for a character system.
    CharacterSystem,
    /// `int_0^1 ||sum_k e^{2 pi i k t} x_k||^2 dt / sum ||x_k||^2`.
    TorusPartialSum,
    /// `E ||sum_j r_{m_j} x_j||^2 / sum ||x_j||^2` against the transfer bound.
    Transfer,
}

impl ConstantName {
    pub fn as_str(self) -> &'static str {
        match self {
            ConstantName::OperatorNorm => "operator-norm",
            ConstantName::KhinchinRatio => "khinchin-ratio",
            ConstantName::KhinchinTwoSided => "khinchin-two-sided",
            ConstantName::CharacterSystem => "character-system",
            ConstantName::TorusPartialSum => "torus-partial-sum",
            ConstantName::Transfer => "transfer",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactEnumeration,
    SubgradientAscent,
    RandomSearch,
    Analytic,
    MonteCarlo,
    Quadrature,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ExactEnumeration => "exact-enumeration",
            Method::SubgradientAscent => "subgradient-ascent",
            Method::RandomSearch => "random-search",
            Method::Analytic => "analytic",
            Method::MonteCarlo => "monte-carlo",
            Method::Quadrature => "quadrature",
        }
    }
}

/// Search effort for the randomized estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budget {
    /// Ascent steps per restart.
    pub iterations: usize,
    pub restarts: usize,
    /// Random candidates or Monte Carlo draws.
    pub samples: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            iterations: 200,
            restarts: 32,
            samples: 1000,
        }
    }
}

/// Input that reproduces an estimate's lower bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// Nothing to evaluate; the value is exact by construction.
    None { value: f64 },
    /// `||F f|| / ||f||` with self-dual measures.
    Function {
        norm: NormSpec,
        function: VectorFunction,
    },
    /// Exact sign average of `xs`.
    Vectors {
        norm: NormSpec,
        xs: Vec<XVector>,
        two_sided: bool,
    },
    /// Character system ratio; `characters` are coordinate tuples.
    Characters {
        group: FiniteAbelianGroup,
        norm: NormSpec,
        characters: Vec<Vec<usize>>,
        xs: Vec<XVector>,
        two_sided: bool,
    },
    /// Torus functional, `xs[k + n]` the coefficient of `e^{2 pi i k t}`.
    Torus {
        norm: NormSpec,
        xs: Vec<XVector>,
        points: usize,
    },
    /// Rademacher average on a tower, `xs[j]` paired with `r_{targets[j]}`.
    Rademacher {
        base: usize,
        depth: u32,
        norm: NormSpec,
        targets: Vec<u32>,
        xs: Vec<XVector>,
    },
}

fn two_sided(r: f64, flag: bool) -> f64 {
    if flag {
        r.max(r.recip())
    } else {
        r
    }
}

impl Witness {
    /// Recomputes the quantity whose value is reported as the lower bound.
    pub fn evaluate(&self) -> Result<f64, ConstantsError> {
        match self {
            Witness::None { value } => Ok(*value),
            Witness::Function { norm, function } => transform_ratio(function, norm),
            Witness::Vectors {
                norm,
                xs,
                two_sided: flag,
            } => Ok(two_sided(khinchin_ratio_exact(norm, xs)?.0, *flag)),
            Witness::Characters {
                group,
                norm,
                characters,
                xs,
                two_sided: flag,
            } => {
                let chars = characters
                    .iter()
                    .map(|c| group.character(c.clone()))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(two_sided(
                    character_system_ratio(group, norm, xs, &chars)?,
                    *flag,
                ))
            }
            Witness::Torus { norm, xs, points } => torus_partial_sum_ratio(norm, xs, *points),
            Witness::Rademacher {
                base,
                depth,
                norm,
                targets,
                xs,
            } => rademacher_ratio(&Tower::new(*base, *depth)?, norm, targets, xs),
        }
    }
}

/// `E ||sum_j r_{m_j} x_j||^2 / sum_j ||x_j||^2` on a tower.
pub fn rademacher_ratio(
    tower: &Tower,
    spec: &NormSpec,
    targets: &[u32],
    xs: &[XVector],
) -> Result<f64, ConstantsError> {
    if xs.len() != targets.len() {
        return Err(ConstantsError::LengthMismatch {
            vectors: xs.len(),
            characters: targets.len(),
        });
    }
    let denom = squared_norm_sum(spec, xs)?;
    let rs = targets
        .iter()
        .map(|&m| tower.rademacher(m))
        .collect::<Result<Vec<_>, _>>()?;
    let mut acc = vec![num_complex::Complex64::new(0.0, 0.0); spec.dim()];
    let mut total = 0.0;
    for t in 0..tower.size() {
        acc.iter_mut()
            .for_each(|z| *z = num_complex::Complex64::new(0.0, 0.0));
        for (r, x) in rs.iter().zip(xs) {
            for (a, v) in acc.iter_mut().zip(x.iter()) {
                *a += v * r[t];
            }
        }
        total += spec.norm_squared(&acc)?;
    }
    Ok(total / tower.size() as f64 / denom)
}

/// `sum ||x_i||^2`, rejecting empty and all-zero families.
pub(crate) fn squared_norm_sum(spec: &NormSpec, xs: &[XVector]) -> Result<f64, ConstantsError> {
    if xs.is_empty() {
        return Err(ConstantsError::NoVectors);
    }
    let s = xs
        .iter()
        .map(|x| spec.norm_squared(x))
        .sum::<Result<f64, _>>()?;
    if s == 0.0 {
        return Err(ConstantsError::ZeroVectors);
    }
    Ok(s)
}

/// `n` vectors with independent standard Gaussian real coordinates.
pub fn random_vectors(dim: usize, n: usize, seed: u64) -> Vec<XVector> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            XVector(
                (0..dim)
                    .map(|_| {
                        num_complex::Complex64::new(rng.sample(rand_distr::StandardNormal), 0.0)
                    })
                    .collect(),
            )
        })
        .collect()
}

/// `e_{k mod d}` for `k = 0..n`.
pub fn standard_vectors(dim: usize, n: usize) -> Vec<XVector> {
    (0..n).map(|k| XVector::basis(dim, k % dim)).collect()
}

mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// Lower and upper bounds on a norm constant with reproducibility metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub constant: ConstantName,
    pub lower: f64,
    /// `+inf` when no bound is known; serialized as `null`.
    #[serde(with = "infinite_as_null")]
    pub upper: f64,
    pub method: Method,
    pub samples: u64,
    pub seed: u64,
    /// Standard error of a Monte Carlo lower bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    pub witness: Witness,
}

impl ConstantEstimate {
    /// Relative gap between the witness value and `lower`.
    pub fn witness_residual(&self) -> Result<f64, ConstantsError> {
        let value = self.witness.evaluate()?;
        Ok((value - self.lower).abs() / self.lower.abs().max(f64::MIN_POSITIVE))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_json_round_trip() {
        let est = ConstantEstimate {
            constant: ConstantName::KhinchinRatio,
            lower: 2.0,
            upper: f64::INFINITY,
            method: Method::ExactEnumeration,
            samples: 2,
            seed: 7,
            std_error: None,
            witness: Witness::Vectors {
                norm: "lp:1:d=2".parse().unwrap(),
                xs: standard_vectors(2, 2),
                two_sided: false,
            },
        };
        let json = serde_json::to_string(&est).unwrap();
        assert!(json.contains("\"upper\":null"));
        assert!(json.contains("\"norm\":\"lp:1:d=2\""));
        let back: ConstantEstimate = serde_json::from_str(&json).unwrap();
        assert_eq!(back, est);
        assert_eq!(back.witness_residual().unwrap(), 0.0);
    }

    #[test]
    fn rademacher_ratio_matches_sign_average() {
        let tower = Tower::new(2, 5).unwrap();
        let spec = NormSpec::lp(1.0, 3).unwrap();
        let xs = vec![
            XVector::from_reals(&[1.0, -2.0, 0.5]),
            XVector::from_reals(&[0.0, 1.0, 1.0]),
            XVector::from_reals(&[3.0, 0.2, -1.0]),
        ];
        let tower_value = rademacher_ratio(&tower, &spec, &[1, 2, 3], &xs).unwrap();
        let exact = khinchin_ratio_exact(&spec, &xs).unwrap().0;
        assert!((tower_value - exact).abs() < 1e-12);
    }
}
