//! Truncated profinite towers `Z/m^N`, the coset-to-interval map `tau`,
//! Rademacher functions, block approximation of Rademacher functions by an
//! orthonormal system, and the `R_alpha` conjugation on finite quotients.
//!
//! Integrals over the tower use the probability Haar measure (total mass 1).

mod blocks;
mod ralpha;
mod system;

pub use blocks::{
    block_approximation, default_system_constant, transfer_inequality_check, BlockApproximation,
    TransferReport, EXACT_BLOCK_TOLERANCE,
};
pub use ralpha::{r_alpha, ralpha_conjugation, ConjugationReport, DualIsomorphism};
pub use system::{CharacterOrdering, OrthonormalSystem, SystemOrdering};

use num_complex::Complex64;

use crate::function::{FunctionError, VectorFunction};
use crate::group::{cardinality_cap, FiniteAbelianGroup, GroupError, Subgroup};
use crate::norms::NormError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TowerError {
    #[error("tower base must be at least 2, got {0}")]
    BaseTooSmall(usize),
    #[error("tower depth must be at least 1")]
    ZeroDepth,
    #[error("level {level} exceeds tower depth {depth}")]
    LevelTooDeep { level: u32, depth: u32 },
    #[error("Rademacher index {index} is not resolved by Z/{base}^{depth}")]
    RademacherTooDeep { index: u32, base: usize, depth: u32 },
    #[error("Walsh systems need base 2, got {0}")]
    WalshNeedsBaseTwo(usize),
    #[error("approximation tolerance must be nonnegative, got {0}")]
    NegativeEpsilon(f64),
    #[error("target indices must be strictly increasing and at least 1")]
    BadTargets,
    #[error("system functions must have {expected} values, got {got}")]
    SystemShape { expected: usize, got: usize },
    #[error(
        "block {j}: squared error {best_error:e} does not reach {threshold:e} before the basis runs out"
    )]
    Unattainable {
        j: usize,
        best_error: f64,
        threshold: f64,
        partial: Box<BlockApproximation>,
    },
    #[error("expected {expected} vectors, got {got}")]
    VectorCount { expected: usize, got: usize },
    #[error("map is not a group isomorphism from the dual: {0}")]
    NotIsomorphism(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Function(#[from] FunctionError),
    #[error(transparent)]
    Norm(#[from] NormError),
}

/// `H_N = Z/m^N` with the nested subgroups `K_n = m^n H_N`, `0 <= n <= N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tower {
    base: usize,
    depth: u32,
    group: FiniteAbelianGroup,
}

impl Tower {
    pub fn new(base: usize, depth: u32) -> Result<Self, TowerError> {
        if base < 2 {
            return Err(TowerError::BaseTooSmall(base));
        }
        if depth == 0 {
            return Err(TowerError::ZeroDepth);
        }
        let cap = cardinality_cap();
        let size = (base as u128)
            .checked_pow(depth)
            .filter(|&s| s <= cap as u128);
        let size = size.ok_or(GroupError::OverCap { cap })? as usize;
        Ok(Self {
            base,
            depth,
            group: FiniteAbelianGroup::new(vec![size])?,
        })
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// The top group `H_N`.
    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn size(&self) -> usize {
        self.group.cardinality()
    }

    fn check_level(&self, level: u32) -> Result<(), TowerError> {
        if level > self.depth {
            return Err(TowerError::LevelTooDeep {
                level,
                depth: self.depth,
            });
        }
        Ok(())
    }

    /// `M_n = |H_N / K_n| = m^n`.
    pub fn index(&self, level: u32) -> Result<usize, TowerError> {
        self.check_level(level)?;
        Ok(self.base.pow(level))
    }

    /// `H_n = Z/m^n`.
    pub fn level_group(&self, level: u32) -> Result<FiniteAbelianGroup, TowerError> {
        Ok(FiniteAbelianGroup::new(vec![self.index(level)?])?)
    }

    /// `K_n = m^n H_N`, the multiples of `m^n`.
    pub fn subgroup(&self, level: u32) -> Result<Subgroup, TowerError> {
        let step = self.index(level)?;
        let gen = self.group.element(vec![step % self.size()])?;
        Ok(Subgroup::generated_by(&self.group, &[gen])?)
    }

    /// Image of `t` in the quotient `H_N / K_n = Z/m^n`.
    pub fn quotient(&self, level: u32, t: usize) -> Result<usize, TowerError> {
        Ok(t % self.index(level)?)
    }

    /// Index `j` of the level-`n` interval `[j/M_n, (j+1)/M_n)` holding `t`:
    /// the leading `n` base-`m` digits of `t`.
    pub fn interval(&self, level: u32, t: usize) -> Result<usize, TowerError> {
        self.check_level(level)?;
        Ok(t / self.base.pow(self.depth - level))
    }

    /// `tau_n(t)`: left endpoint of the level-`n` interval of `t`, the leading
    /// `n` base-`m` digits read as a fraction (most significant first).
    pub fn tau(&self, level: u32, t: usize) -> Result<f64, TowerError> {
        let j = self.interval(level, t)?;
        Ok(j as f64 / self.base.pow(level) as f64)
    }

    pub fn interval_map(&self, level: u32) -> Result<IntervalMap, TowerError> {
        let assignment = (0..self.size())
            .map(|t| self.interval(level, t))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(IntervalMap {
            level,
            intervals: self.base.pow(level),
            assignment,
        })
    }

    /// Largest `i` with `2^i | m^N`; Rademacher functions `r_1..r_i` are
    /// exactly representable on the tower.
    pub fn max_rademacher_index(&self) -> u32 {
        self.size().trailing_zeros()
    }

    /// `r_i(t) = sign sin(2^i pi tau(t))` evaluated on the half-open interval
    /// of `t`, i.e. `(-1)^{floor(2^i t / m^N)}`.
    pub fn rademacher(&self, i: u32) -> Result<Vec<f64>, TowerError> {
        if i == 0 || i > self.max_rademacher_index() {
            return Err(TowerError::RademacherTooDeep {
                index: i,
                base: self.base,
                depth: self.depth,
            });
        }
        let size = self.size() as u128;
        Ok((0..self.size())
            .map(|t| {
                let cell = (t as u128) * (1u128 << i) / size;
                if cell.is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect())
    }

    /// `r_i` as a scalar function on `H_N`.
    pub fn rademacher_function(&self, i: u32) -> Result<VectorFunction, TowerError> {
        let values = self
            .rademacher(i)?
            .into_iter()
            .map(|x| Complex64::new(x, 0.0))
            .collect();
        Ok(VectorFunction::scalar(&self.group, values)?)
    }

    /// `E || sum_i r_i x_i ||^2 / sum_i ||x_i||^2`, integrating over the tower
    /// with the probability measure.
    pub fn rademacher_average_ratio(
        &self,
        spec: &crate::norms::NormSpec,
        xs: &[crate::norms::XVector],
    ) -> Result<f64, TowerError> {
        let rs = (1..=xs.len() as u32)
            .map(|i| self.rademacher(i))
            .collect::<Result<Vec<_>, _>>()?;
        let d = spec.dim();
        let mut total = 0.0;
        let mut acc = vec![Complex64::new(0.0, 0.0); d];
        for t in 0..self.size() {
            acc.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            for (r, x) in rs.iter().zip(xs) {
                for (a, v) in acc.iter_mut().zip(x.iter()) {
                    *a += v * r[t];
                }
            }
            total += spec.norm_squared(&acc)?;
        }
        let denom: f64 = xs
            .iter()
            .map(|x| spec.norm_squared(x))
            .sum::<Result<f64, _>>()?;
        Ok(total / self.size() as f64 / denom)
    }
}

/// Assignment of the points of `H_N` to the `M_n` intervals of level `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalMap {
    pub level: u32,
    pub intervals: usize,
    /// Interval index of every point.
    pub assignment: Vec<usize>,
}

impl IntervalMap {
    pub fn interval_length(&self) -> f64 {
        (self.intervals as f64).recip()
    }

    /// Points falling in each interval.
    pub fn fibers(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.intervals];
        for (t, &j) in self.assignment.iter().enumerate() {
            out[j].push(t);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_examples() {
        let tower = Tower::new(2, 3).unwrap();
        for level in 0..=3 {
            assert_eq!(tower.tau(level, 0).unwrap(), 0.0);
        }
        assert_eq!(tower.tau(1, 4).unwrap(), 0.5);
        assert_eq!(tower.tau(2, 6).unwrap(), 0.75);
        assert!(matches!(
            tower.tau(4, 1),
            Err(TowerError::LevelTooDeep { .. })
        ));
    }

    #[test]
    fn tau_nesting() {
        let tower = Tower::new(3, 4).unwrap();
        for t in 0..tower.size() {
            for n in 0..tower.depth() {
                let coarse = tower.tau(n, t).unwrap();
                let fine = tower.tau(n + 1, t).unwrap();
                let m = tower.index(n).unwrap() as f64;
                assert!(coarse <= fine && fine < coarse + 1.0 / m);
            }
        }
    }

    #[test]
    fn interval_maps_are_balanced_bijections() {
        let tower = Tower::new(2, 5).unwrap();
        for level in 0..=5 {
            let map = tower.interval_map(level).unwrap();
            let fibers = map.fibers();
            assert_eq!(fibers.len(), 1 << level);
            assert!(fibers.iter().all(|f| f.len() == 1 << (5 - level)));
        }
    }

    #[test]
    fn nested_subgroups() {
        let tower = Tower::new(2, 4).unwrap();
        let mut previous = tower.subgroup(0).unwrap();
        assert_eq!(previous.len(), 16);
        for level in 1..=4 {
            let k = tower.subgroup(level).unwrap();
            assert!(k.is_subgroup_of(&previous));
            assert_eq!(tower.size() / k.len(), tower.index(level).unwrap());
            // Cosets of K_n are the residue classes modulo m^n.
            let (labels, count) = tower.group().coset_labels(&k).unwrap();
            assert_eq!(count, 1 << level);
            for t in 0..tower.size() {
                for s in 0..tower.size() {
                    let same = labels[t] == labels[s];
                    assert_eq!(
                        same,
                        tower.quotient(level, t).unwrap() == tower.quotient(level, s).unwrap()
                    );
                }
            }
            previous = k;
        }
    }

    #[test]
    fn rademacher_examples() {
        let tower = Tower::new(2, 3).unwrap();
        let r1 = tower.rademacher(1).unwrap();
        for t in 0..8 {
            let leading = (t >> 2) & 1;
            assert_eq!(r1[t], if leading == 0 { 1.0 } else { -1.0 });
            // Agrees with sign(sin(2 pi x)) at the interval midpoint.
            let mid = (t as f64 + 0.5) / 8.0;
            assert_eq!(r1[t], (std::f64::consts::TAU * mid).sin().signum());
        }
        for i in 1..=3 {
            assert_eq!(tower.rademacher(i).unwrap().iter().sum::<f64>(), 0.0);
        }
        assert!(matches!(
            tower.rademacher(4),
            Err(TowerError::RademacherTooDeep { .. })
        ));
        assert!(matches!(
            tower.rademacher(0),
            Err(TowerError::RademacherTooDeep { .. })
        ));
        // Base 3 never resolves a sign change at a dyadic point.
        assert!(Tower::new(3, 4).unwrap().rademacher(1).is_err());
        assert_eq!(Tower::new(6, 3).unwrap().max_rademacher_index(), 3);
    }

    #[test]
    fn rademacher_orthonormal() {
        let tower = Tower::new(2, 6).unwrap();
        let rs: Vec<_> = (1..=6).map(|i| tower.rademacher(i).unwrap()).collect();
        for (i, a) in rs.iter().enumerate() {
            for (j, b) in rs.iter().enumerate() {
                let inner: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / 64.0;
                assert_eq!(inner, if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn constructor_errors() {
        assert_eq!(Tower::new(1, 3), Err(TowerError::BaseTooSmall(1)));
        assert_eq!(Tower::new(2, 0), Err(TowerError::ZeroDepth));
        assert!(matches!(
            Tower::new(2, 40),
            Err(TowerError::Group(GroupError::OverCap { .. }))
        ));
    }
}
