use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Tower, TowerError};
use crate::group::root_of_unity;

/// Orderings of the characters `t -> e^{2 pi i k t / M}` of `Z/M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CharacterOrdering {
    /// `k = 0, 1, ..., M - 1`.
    #[default]
    Natural,
    /// `k = 0, 1, -1, 2, -2, ...`.
    Centered,
    /// By 2-adic valuation of `k` (odd frequencies first), then centered.
    /// The Rademacher function `r_i` only has frequencies of valuation
    /// `i - 1`, so every block pays for the whole tail of the previous one.
    Dyadic,
}

/// Which orthonormal system to approximate Rademacher functions with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemOrdering {
    /// Walsh-Paley functions; contains every Rademacher function.
    #[default]
    Walsh,
    Natural,
    Centered,
    Dyadic,
}

impl std::str::FromStr for SystemOrdering {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "walsh" => Ok(Self::Walsh),
            "natural" => Ok(Self::Natural),
            "centered" => Ok(Self::Centered),
            "dyadic" => Ok(Self::Dyadic),
            _ => Err(format!(
                "unknown ordering {s:?}; expected walsh, natural, centered or dyadic"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Source {
    /// Walsh-Paley functions on `Z/2^depth`, indexed by `k`.
    Walsh {
        depth: u32,
    },
    /// Characters of `Z/size`, indexed by frequency.
    Characters,
    Explicit(Vec<Vec<Complex64>>),
}

/// An ordered orthonormal system of scalar functions on the tower group,
/// orthonormal for the probability measure. Functions are generated on
/// demand, so large systems cost nothing until used.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalSystem {
    size: usize,
    source: Source,
    /// Position in the system -> index into the source.
    order: Vec<usize>,
    labels: Vec<i64>,
}

fn centered(k: usize, m: usize) -> i64 {
    if 2 * k > m {
        k as i64 - m as i64
    } else {
        k as i64
    }
}

fn centered_key(k: usize, m: usize) -> (u64, bool) {
    let c = centered(k, m);
    (c.unsigned_abs(), c < 0)
}

impl OrthonormalSystem {
    /// Arbitrary functions, each of length `size`. Orthonormality is the
    /// caller's responsibility; see [`OrthonormalSystem::gram_defect`].
    pub fn from_functions(
        size: usize,
        labels: Vec<i64>,
        functions: Vec<Vec<Complex64>>,
    ) -> Result<Self, TowerError> {
        if let Some(bad) = functions.iter().find(|f| f.len() != size) {
            return Err(TowerError::SystemShape {
                expected: size,
                got: bad.len(),
            });
        }
        assert_eq!(labels.len(), functions.len());
        Ok(Self {
            size,
            order: (0..functions.len()).collect(),
            source: Source::Explicit(functions),
            labels,
        })
    }

    /// Walsh-Paley functions `w_k = prod_i r_i^{b_i(k)}` on `Z/2^N`, where
    /// `b_i(k)` is bit `i - 1` of `k`. `w_{2^{i-1}} = r_i`.
    pub fn walsh(tower: &Tower) -> Result<Self, TowerError> {
        if tower.base() != 2 {
            return Err(TowerError::WalshNeedsBaseTwo(tower.base()));
        }
        let size = tower.size();
        Ok(Self {
            size,
            source: Source::Walsh {
                depth: tower.depth(),
            },
            order: (0..size).collect(),
            labels: (0..size as i64).collect(),
        })
    }

    pub fn ordered(tower: &Tower, ordering: SystemOrdering) -> Result<Self, TowerError> {
        Ok(match ordering {
            SystemOrdering::Walsh => Self::walsh(tower)?,
            SystemOrdering::Natural => Self::characters(tower, CharacterOrdering::Natural),
            SystemOrdering::Centered => Self::characters(tower, CharacterOrdering::Centered),
            SystemOrdering::Dyadic => Self::characters(tower, CharacterOrdering::Dyadic),
        })
    }

    /// The characters of the cyclic tower group in the given order.
    pub fn characters(tower: &Tower, ordering: CharacterOrdering) -> Self {
        let m = tower.size();
        let mut ks: Vec<usize> = (0..m).collect();
        match ordering {
            CharacterOrdering::Natural => {}
            CharacterOrdering::Centered => ks.sort_by_key(|&k| centered_key(k, m)),
            CharacterOrdering::Dyadic => ks.sort_by_key(|&k| {
                let valuation = if k == 0 { u32::MAX } else { k.trailing_zeros() };
                (valuation, centered_key(k, m))
            }),
        }
        Self {
            size: m,
            source: Source::Characters,
            labels: ks.iter().map(|&k| centered(k, m)).collect(),
            order: ks,
        }
    }

    /// Same functions in the order `order[0], order[1], ...`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            size: self.size,
            source: self.source.clone(),
            order: order.iter().map(|&i| self.order[i]).collect(),
            labels: order.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// A seeded uniform shuffle.
    pub fn shuffled(&self, seed: u64) -> Self {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        self.permuted(&order)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Number of points the functions live on.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Frequency (characters) or Walsh index of each function.
    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    /// Values of the `k`-th function.
    pub fn function(&self, k: usize) -> Vec<Complex64> {
        let idx = self.order[k];
        let m = self.size;
        match &self.source {
            Source::Walsh { depth } => (0..m)
                .map(|t| {
                    // Bit i - 1 of k pairs with the i-th leading binary digit of t.
                    let reversed = (t.reverse_bits() >> (usize::BITS - depth)) & idx;
                    Complex64::new(
                        if reversed.count_ones().is_multiple_of(2) {
                            1.0
                        } else {
                            -1.0
                        },
                        0.0,
                    )
                })
                .collect(),
            Source::Characters => (0..m)
                .map(|t| root_of_unity(((idx as u128 * t as u128) % m as u128) as u64, m as u64))
                .collect(),
            Source::Explicit(fs) => fs[idx].clone(),
        }
    }

    /// All functions, materialized.
    pub fn functions(&self) -> Vec<Vec<Complex64>> {
        (0..self.len()).map(|k| self.function(k)).collect()
    }

    /// `E[f conj(g)]` under the probability measure.
    pub fn inner(f: &[Complex64], g: &[Complex64]) -> Complex64 {
        f.iter()
            .zip(g)
            .map(|(a, b)| a * b.conj())
            .sum::<Complex64>()
            / f.len() as f64
    }

    /// Largest entry of `|Gram - I|`.
    pub fn gram_defect(functions: &[Vec<Complex64>]) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, f) in functions.iter().enumerate() {
            for (j, g) in functions.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((Self::inner(f, g) - target).norm());
            }
        }
        worst
    }
}
