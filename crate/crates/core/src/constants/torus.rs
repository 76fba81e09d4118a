use serde::{Deserialize, Serialize};

use super::{squared_norm_sum, ConstantsError};
use crate::function::VectorFunction;
use crate::group::FiniteAbelianGroup;
use crate::norms::{NormSpec, XVector};
use crate::transform::TransformPlan;

/// Largest quadrature rule tried by [`torus_adaptive`].
pub const MAX_TORUS_POINTS: usize = 1 << 16;

/// `M`-point equal-spacing rule for
/// `int_0^1 ||sum_{k=-n}^{n} e^{2 pi i k t} x_k||^2 dt / sum ||x_k||^2`,
/// where `xs[k + n]` is the coefficient of frequency `k`.
pub fn torus_partial_sum_ratio(
    spec: &NormSpec,
    xs: &[XVector],
    points: usize,
) -> Result<f64, ConstantsError> {
    if xs.len().is_multiple_of(2) {
        return Err(ConstantsError::EvenCoefficientCount(xs.len()));
    }
    let n = xs.len() / 2;
    let min = 4 * n + 4;
    if points < min {
        return Err(ConstantsError::TooFewPoints { points, min });
    }
    let denom = squared_norm_sum(spec, xs)?;
    let group = FiniteAbelianGroup::cyclic(points)?;
    let d = spec.dim();
    let mut c = VectorFunction::zeros(&group, d);
    for (i, x) in xs.iter().enumerate() {
        if x.dim() != d {
            return Err(crate::norms::NormError::DimensionMismatch {
                expected: d,
                got: x.dim(),
            }
            .into());
        }
        let k = (i as i64 - n as i64).rem_euclid(points as i64) as usize;
        c.at_mut(k)
            .iter_mut()
            .zip(x.iter())
            .for_each(|(a, v)| *a += v);
    }
    // The partial sum at t = m/M is sqrt(M) (F c)(m); averaging its squared
    // norm over the M nodes cancels the sqrt(M).
    let fc = TransformPlan::fast(&group).dft(&c)?;
    let total: f64 = fc.points().map(|v| spec.norm_squared_unchecked(v)).sum();
    Ok(total / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusResult {
    pub ratio: f64,
    pub points: usize,
    /// Relative change at the last doubling; zero if no doubling happened.
    pub change: f64,
    pub converged: bool,
}

/// Doubles the rule from `4n + 4` points until successive values agree to
/// `tolerance` (relative) or [`MAX_TORUS_POINTS`] is reached.
pub fn torus_adaptive(
    spec: &NormSpec,
    xs: &[XVector],
    tolerance: f64,
) -> Result<TorusResult, ConstantsError> {
    let n = xs.len() / 2;
    let mut points = 4 * n + 4;
    let mut ratio = torus_partial_sum_ratio(spec, xs, points)?;
    let mut last_change = 0.0;
    loop {
        if 2 * points > MAX_TORUS_POINTS {
            return Ok(TorusResult {
                ratio,
                points,
                change: last_change,
                converged: false,
            });
        }
        let next = torus_partial_sum_ratio(spec, xs, 2 * points)?;
        let change = (next - ratio).abs() / next.abs().max(f64::MIN_POSITIVE);
        points *= 2;
        ratio = next;
        last_change = change;
        if change <= tolerance {
            return Ok(TorusResult {
                ratio,
                points,
                change,
                converged: true,
            });
        }
    }
}
