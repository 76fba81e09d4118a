use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{OrthonormalSystem, Tower, TowerError};
use crate::norms::{NormSpec, XVector};

/// Squared errors at or below this count as an exact fit, so a zero
/// tolerance is met by roundoff-level residuals.
pub const EXACT_BLOCK_TOLERANCE: f64 = 1e-24;

const COMPARISON_TOLERANCE: f64 = 1e-9;

/// Normalized projections `h_j` of `r_{m_j}` onto consecutive blocks
/// `[k_j, k_{j+1})` of an orthonormal system.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockApproximation {
    pub eps: f64,
    /// Rademacher indices `m_j`.
    pub targets: Vec<u32>,
    /// Half-open index ranges into the system, one per target.
    pub blocks: Vec<(usize, usize)>,
    /// `E |r_{m_j} - h_j|^2`.
    pub errors: Vec<f64>,
    /// `eps / 2^j`.
    pub thresholds: Vec<f64>,
    #[serde(skip)]
    pub h: Vec<Vec<Complex64>>,
}

impl std::fmt::Debug for BlockApproximation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BlockApproximation")
            .field("eps", &self.eps)
            .field("targets", &self.targets)
            .field("blocks", &self.blocks)
            .field("errors", &self.errors)
            .field("thresholds", &self.thresholds)
            .finish_non_exhaustive()
    }
}

impl BlockApproximation {
    /// Number of system functions consumed.
    pub fn consumed(&self) -> usize {
        self.blocks.last().map_or(0, |b| b.1)
    }
}

fn accept(err: f64, threshold: f64) -> bool {
    err < threshold || err <= EXACT_BLOCK_TOLERANCE
}

fn mean_sq_diff(r: &[f64], p: &[Complex64], scale: f64) -> f64 {
    r.iter()
        .zip(p)
        .map(|(a, b)| (Complex64::new(*a, 0.0) - b * scale).norm_sqr())
        .sum::<f64>()
        / r.len() as f64
}

/// Greedy block approximation: block `j` grows from where block `j - 1`
/// stopped until `E |r_{m_j} - h_j|^2 < eps / 2^j`.
pub fn block_approximation(
    tower: &Tower,
    system: &OrthonormalSystem,
    targets: &[u32],
    eps: f64,
) -> Result<BlockApproximation, TowerError> {
    if targets.first().is_some_and(|&m| m == 0) || targets.windows(2).any(|w| w[0] >= w[1]) {
        return Err(TowerError::BadTargets);
    }
    if !(eps >= 0.0) {
        return Err(TowerError::NegativeEpsilon(eps));
    }
    if system.size() != tower.size() {
        return Err(TowerError::SystemShape {
            expected: tower.size(),
            got: system.size(),
        });
    }
    let size = tower.size();
    let mut out = BlockApproximation {
        eps,
        targets: Vec::new(),
        blocks: Vec::new(),
        errors: Vec::new(),
        thresholds: Vec::new(),
        h: Vec::new(),
    };
    let mut cursor = 0;
    for (j0, &m) in targets.iter().enumerate() {
        let j = j0 + 1;
        let threshold = eps / 2f64.powi(j as i32);
        let r = tower.rademacher(m)?;
        let start = cursor;
        let mut proj = vec![Complex64::new(0.0, 0.0); size];
        let mut mass = 0.0;
        let mut best = f64::INFINITY;
        let mut done = None;
        while cursor < system.len() {
            let f = system.function(cursor);
            cursor += 1;
            let c = f
                .iter()
                .zip(&r)
                .map(|(v, a)| v.conj() * *a)
                .sum::<Complex64>()
                / size as f64;
            if c.norm_sqr() == 0.0 {
                continue;
            }
            for (p, v) in proj.iter_mut().zip(&f) {
                *p += c * v;
            }
            mass += c.norm_sqr();
            // E|r - P/|P||^2 = 2 - 2 |P| for a projection of a unit vector.
            let estimate = 2.0 - 2.0 * mass.sqrt();
            best = best.min(estimate.max(0.0));
            if accept(estimate, threshold) || estimate <= 1e-12 {
                let norm = (proj.iter().map(|z| z.norm_sqr()).sum::<f64>() / size as f64).sqrt();
                let err = mean_sq_diff(&r, &proj, norm.recip());
                best = best.min(err);
                if accept(err, threshold) {
                    done = Some((norm, err));
                    break;
                }
            }
        }
        let Some((norm, err)) = done else {
            return Err(TowerError::Unattainable {
                j,
                best_error: best,
                threshold,
                partial: Box::new(out),
            });
        };
        proj.iter_mut().for_each(|z| *z /= norm);
        out.targets.push(m);
        out.blocks.push((start, cursor));
        out.errors.push(err);
        out.thresholds.push(threshold);
        out.h.push(proj);
    }
    Ok(out)
}

/// The terms of `A <= B + D <= (sqrt(eps) + sqrt(C)) S`, with
///
/// - `A = (E ||sum_j r_{m_j} x_j||^2)^{1/2}`
/// - `B = (E ||sum_j (r_{m_j} - h_j) x_j||^2)^{1/2} <= sqrt(eps) S`
/// - `D = (E ||sum_j h_j x_j||^2)^{1/2} <= sqrt(C) S`
/// - `S = (sum_j ||x_j||^2)^{1/2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    pub eps: f64,
    pub c: f64,
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub s: f64,
    pub triangle_holds: bool,
    pub approximation_holds: bool,
    pub system_holds: bool,
    /// `(sqrt(eps) + sqrt(C))^2 S^2 - A^2`.
    pub slack: f64,
    pub holds: bool,
}

fn mean_square_norm(
    spec: &NormSpec,
    xs: &[XVector],
    coeffs: &[Vec<Complex64>],
    size: usize,
) -> Result<f64, TowerError> {
    let mut acc = vec![Complex64::new(0.0, 0.0); spec.dim()];
    let mut total = 0.0;
    for t in 0..size {
        acc.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for (c, x) in coeffs.iter().zip(xs) {
            for (a, v) in acc.iter_mut().zip(x.iter()) {
                *a += c[t] * v;
            }
        }
        total += spec.norm_squared(&acc)?;
    }
    Ok(total / size as f64)
}

/// Constant valid for every orthonormal system: 1 for Hilbert norms,
/// otherwise the squared Euclidean distortion.
pub fn default_system_constant(spec: &NormSpec) -> f64 {
    if spec.is_hilbert() {
        1.0
    } else {
        spec.hilbert_distance_bound().powi(2)
    }
}

/// Evaluates each term of the transfer inequality for one vector family.
/// `c` defaults to [`default_system_constant`].
pub fn transfer_inequality_check(
    tower: &Tower,
    spec: &NormSpec,
    xs: &[XVector],
    approx: &BlockApproximation,
    c: Option<f64>,
) -> Result<TransferReport, TowerError> {
    if xs.len() != approx.targets.len() {
        return Err(TowerError::VectorCount {
            expected: approx.targets.len(),
            got: xs.len(),
        });
    }
    let size = tower.size();
    let c = c.unwrap_or_else(|| default_system_constant(spec));
    let rs: Vec<Vec<Complex64>> = approx
        .targets
        .iter()
        .map(|&m| {
            tower
                .rademacher(m)
                .map(|r| r.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
        })
        .collect::<Result<_, _>>()?;
    let diffs: Vec<Vec<Complex64>> = rs
        .iter()
        .zip(&approx.h)
        .map(|(r, h)| r.iter().zip(h).map(|(a, b)| a - b).collect())
        .collect();
    let a2 = mean_square_norm(spec, xs, &rs, size)?;
    let a = a2.sqrt();
    let b = mean_square_norm(spec, xs, &diffs, size)?.sqrt();
    let d = mean_square_norm(spec, xs, &approx.h, size)?.sqrt();
    let s2 = xs
        .iter()
        .map(|x| spec.norm_squared(x))
        .sum::<Result<f64, _>>()?;
    let s = s2.sqrt();
    let tol = COMPARISON_TOLERANCE * s.max(f64::MIN_POSITIVE);
    let bound = (approx.eps.sqrt() + c.sqrt()).powi(2) * s2;
    let slack = bound - a2;
    let triangle_holds = a <= b + d + tol;
    let approximation_holds = b <= approx.eps.sqrt() * s + tol;
    let system_holds = d <= c.sqrt() * s + tol;
    Ok(TransferReport {
        eps: approx.eps,
        c,
        a,
        b,
        d,
        s,
        triangle_holds,
        approximation_holds,
        system_holds,
        slack,
        holds: slack >= -COMPARISON_TOLERANCE * bound.max(f64::MIN_POSITIVE),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tower::CharacterOrdering;

    fn gram(h: &[Vec<Complex64>]) -> f64 {
        OrthonormalSystem::gram_defect(h)
    }

    #[test]
    fn walsh_order_is_exact() {
        let tower = Tower::new(2, 6).unwrap();
        let walsh = OrthonormalSystem::walsh(&tower).unwrap();
        let approx = block_approximation(&tower, &walsh, &[1, 2, 4], 0.0).unwrap();
        assert!(approx.errors.iter().all(|&e| e == 0.0));
        assert_eq!(approx.blocks, vec![(0, 2), (2, 3), (3, 9)]);
        assert_eq!(gram(&approx.h), 0.0);
        for (h, &m) in approx.h.iter().zip(&approx.targets) {
            let r = tower.rademacher(m).unwrap();
            assert!(h.iter().zip(&r).all(|(a, b)| a.re == *b && a.im == 0.0));
        }
    }

    #[test]
    fn dyadic_characters_meet_thresholds() {
        let tower = Tower::new(2, 10).unwrap();
        let sys = OrthonormalSystem::characters(&tower, CharacterOrdering::Dyadic);
        let approx = block_approximation(&tower, &sys, &[1, 2, 3, 4], 0.1).unwrap();
        for (e, t) in approx.errors.iter().zip(&approx.thresholds) {
            assert!(*e < *t && *e > 0.0);
        }
        assert!(gram(&approx.h) < 1e-10);
        let widths: Vec<usize> = approx.blocks.iter().map(|b| b.1 - b.0).collect();
        assert!(widths.iter().all(|&w| w > 1));
        // Blocks are consecutive.
        for w in approx.blocks.windows(2) {
            assert_eq!(w[0].1, w[1].0);
        }
    }

    #[test]
    fn unattainable_reports_best_error() {
        let tower = Tower::new(2, 4).unwrap();
        let sys = OrthonormalSystem::characters(&tower, CharacterOrdering::Natural);
        // r_1 needs odd frequencies; r_2 afterwards finds nothing left to use
        // once the first block has swallowed the whole system.
        let truncated = sys.permuted(&[1, 3, 5, 7, 9, 11, 13, 15]);
        match block_approximation(&tower, &truncated, &[1, 2], 0.01) {
            Err(TowerError::Unattainable { j, partial, .. }) => {
                assert_eq!(j, 2);
                assert_eq!(partial.targets, vec![1]);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            block_approximation(&tower, &sys, &[2, 1], 0.1),
            Err(TowerError::BadTargets)
        );
    }

    #[test]
    fn transfer_chain() {
        let tower = Tower::new(2, 6).unwrap();
        let walsh = OrthonormalSystem::walsh(&tower).unwrap();
        let approx = block_approximation(&tower, &walsh, &[1, 2, 3], 0.0).unwrap();
        let xs = vec![
            XVector::from_reals(&[1.0, 0.5]),
            XVector::from_reals(&[-0.3, 2.0]),
            XVector::from_reals(&[0.7, 0.7]),
        ];
        let hilbert = NormSpec::lp(2.0, 2).unwrap();
        let report = transfer_inequality_check(&tower, &hilbert, &xs, &approx, Some(1.0)).unwrap();
        assert!((report.a - report.s).abs() < 1e-12);
        assert_eq!(report.b, 0.0);
        assert!(report.holds && report.triangle_holds);
        let l1 = NormSpec::lp(1.0, 2).unwrap();
        let report = transfer_inequality_check(&tower, &l1, &xs, &approx, None).unwrap();
        assert!((report.c - 2.0).abs() < 1e-12);
        assert!(report.holds && report.slack > 0.0);
        assert!(report.approximation_holds && report.system_holds);
    }
}
