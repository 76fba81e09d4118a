use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{squared_norm_sum, ConstantEstimate, ConstantName, ConstantsError, Method, Witness};
use crate::function::VectorFunction;
use crate::group::{Character, FiniteAbelianGroup};
use crate::norms::{NormSpec, XVector};
use crate::transform::TransformPlan;

/// Largest family averaged over all `2^n` sign patterns.
pub const MAX_ENUMERATION: usize = 20;

/// Sign patterns summed sequentially per parallel task; fixed so that the
/// floating-point summation order does not depend on the thread count.
const CHUNK: usize = 1 << 12;

fn signed_sum(xs: &[XVector], pattern: u64, acc: &mut [Complex64]) {
    acc.copy_from_slice(&xs[0]);
    for (i, x) in xs.iter().enumerate().skip(1) {
        if (pattern >> (i - 1)) & 1 == 1 {
            acc.iter_mut().zip(x.iter()).for_each(|(a, v)| *a -= v);
        } else {
            acc.iter_mut().zip(x.iter()).for_each(|(a, v)| *a += v);
        }
    }
}

/// `E ||sum_i eps_i x_i||^2 / sum_i ||x_i||^2`, the expectation being the
/// exact average over all sign vectors. Returned twice as `(min, max)`; the
/// pair only differs for searches over several families.
pub fn khinchin_ratio_exact(spec: &NormSpec, xs: &[XVector]) -> Result<(f64, f64), ConstantsError> {
    let n = xs.len();
    if n > MAX_ENUMERATION {
        return Err(ConstantsError::TooManyVectors {
            n,
            max: MAX_ENUMERATION,
        });
    }
    let denom = squared_norm_sum(spec, xs)?;
    for x in xs {
        spec.norm(x)?;
    }
    // ||-v|| = ||v||, so eps_1 = +1 loses nothing.
    let patterns = 1u64 << (n - 1);
    let chunks = patterns.div_ceil(CHUNK as u64);
    let partial: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![Complex64::new(0.0, 0.0); spec.dim()];
            let lo = c * CHUNK as u64;
            let hi = (lo + CHUNK as u64).min(patterns);
            (lo..hi)
                .map(|p| {
                    signed_sum(xs, p, &mut acc);
                    spec.norm_squared_unchecked(&acc)
                })
                .sum()
        })
        .collect();
    let r = partial.iter().sum::<f64>() / patterns as f64 / denom;
    Ok((r, r))
}

/// Monte Carlo sign average: `(mean ratio, standard error)`.
pub fn khinchin_ratio_monte_carlo(
    spec: &NormSpec,
    xs: &[XVector],
    samples: usize,
    seed: u64,
) -> Result<(f64, f64), ConstantsError> {
    if samples < 2 {
        return Err(ConstantsError::ZeroBudget("pair of samples"));
    }
    let denom = squared_norm_sum(spec, xs)?;
    for x in xs {
        spec.norm(x)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = vec![Complex64::new(0.0, 0.0); spec.dim()];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        acc.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for x in xs {
            let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
            acc.iter_mut().zip(x.iter()).for_each(|(a, v)| *a += v * s);
        }
        let v = spec.norm_squared_unchecked(&acc) / denom;
        sum += v;
        sum_sq += v * v;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok((mean, (var / n).sqrt()))
}

/// Sign-average ratio: exact up to [`MAX_ENUMERATION`] vectors, Monte Carlo
/// with `samples` draws beyond.
pub fn khinchin_estimate(
    spec: &NormSpec,
    xs: &[XVector],
    samples: usize,
    seed: u64,
) -> Result<ConstantEstimate, ConstantsError> {
    if xs.len() <= MAX_ENUMERATION {
        let (r, _) = khinchin_ratio_exact(spec, xs)?;
        return Ok(ConstantEstimate {
            constant: ConstantName::KhinchinRatio,
            lower: r,
            upper: r,
            method: Method::ExactEnumeration,
            samples: 1u64 << (xs.len() - 1),
            seed,
            std_error: None,
            witness: Witness::Vectors {
                norm: spec.clone(),
                xs: xs.to_vec(),
                two_sided: false,
            },
        });
    }
    let (mean, se) = khinchin_ratio_monte_carlo(spec, xs, samples, seed)?;
    let bound = spec.hilbert_distance_bound().powi(2);
    Ok(ConstantEstimate {
        constant: ConstantName::KhinchinRatio,
        lower: mean,
        upper: bound.max(mean),
        method: Method::MonteCarlo,
        samples: samples as u64,
        seed,
        std_error: Some(se),
        witness: Witness::None { value: mean },
    })
}

/// `E_t ||sum_k <xi_k, t> x_k||^2 / sum_k ||x_k||^2` over the probability
/// measure on `group`. Characters may repeat.
pub fn character_system_ratio(
    group: &FiniteAbelianGroup,
    spec: &NormSpec,
    xs: &[XVector],
    characters: &[Character],
) -> Result<f64, ConstantsError> {
    if xs.len() != characters.len() {
        return Err(ConstantsError::LengthMismatch {
            vectors: xs.len(),
            characters: characters.len(),
        });
    }
    let denom = squared_norm_sum(spec, xs)?;
    let d = spec.dim();
    // h(xi) = sum of x_k with xi_k = xi; then sum_k <xi_k, t> x_k is
    // sqrt|G| (F h)(t), and the probability average of its squared norm
    // is sum_t ||(F h)(t)||^2.
    let mut h = VectorFunction::zeros(group, d);
    for (x, xi) in xs.iter().zip(characters) {
        if x.dim() != d {
            return Err(crate::norms::NormError::DimensionMismatch {
                expected: d,
                got: x.dim(),
            }
            .into());
        }
        let idx = group.character_index(xi);
        h.at_mut(idx)
            .iter_mut()
            .zip(x.iter())
            .for_each(|(a, v)| *a += v);
    }
    let fh = TransformPlan::fast(group).dft(&h)?;
    let total: f64 = fh.points().map(|v| spec.norm_squared_unchecked(v)).sum();
    Ok(total / denom)
}
