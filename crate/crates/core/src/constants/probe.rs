use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    khinchin_ratio_exact, Budget, ConstantEstimate, ConstantName, ConstantsError, Method, Witness,
};
use crate::norms::{NormSpec, XVector};

/// Largest family size tried by the probe.
const MAX_FAMILY: usize = 8;

/// Empirical two-sided Khinchin constant. Evidence only: a probe that finds
/// nothing proves nothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    /// `max(max_ratio, 1 / min_ratio)`.
    pub c_hat: f64,
    pub max_ratio: f64,
    pub min_ratio: f64,
    /// How far the upper inequality is violated: `max_ratio`.
    pub best_upper_violation: f64,
    /// How far the lower inequality is violated: `1 / min_ratio`.
    pub best_lower_violation: f64,
    pub max_witness: Vec<XVector>,
    pub min_witness: Vec<XVector>,
    pub evaluations: u64,
    pub seed: u64,
}

impl ProbeReport {
    pub fn estimate(&self, spec: &NormSpec) -> ConstantEstimate {
        let xs = if self.max_ratio >= self.min_ratio.recip() {
            &self.max_witness
        } else {
            &self.min_witness
        };
        ConstantEstimate {
            constant: ConstantName::KhinchinTwoSided,
            lower: self.c_hat,
            upper: spec.hilbert_distance_bound().powi(2).max(self.c_hat),
            method: Method::RandomSearch,
            samples: self.evaluations,
            seed: self.seed,
            std_error: None,
            witness: Witness::Vectors {
                norm: spec.clone(),
                xs: xs.clone(),
                two_sided: true,
            },
        }
    }
}

#[derive(Clone)]
struct Candidate {
    ratio: f64,
    xs: Vec<XVector>,
}

fn random_vector(d: usize, rng: &mut ChaCha8Rng) -> XVector {
    XVector(
        (0..d)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect(),
    )
}

fn structured(d: usize) -> Vec<Vec<XVector>> {
    let mut out = Vec::new();
    for n in 2..=d.min(MAX_FAMILY) {
        out.push((0..n).map(|k| XVector::basis(d, k)).collect());
    }
    let ones = XVector::from_reals(&vec![1.0; d]);
    for n in 2..=MAX_FAMILY.min(d.max(2)) {
        out.push(vec![ones.clone(); n]);
    }
    out
}

fn evaluate(spec: &NormSpec, xs: Vec<XVector>) -> Option<Candidate> {
    khinchin_ratio_exact(spec, &xs)
        .ok()
        .map(|(ratio, _)| Candidate { ratio, xs })
}

/// Searches vector families for extreme sign-average ratios: structured
/// candidates, `budget.samples` random families, then `budget.iterations`
/// rounds of coordinate perturbation around both extremes.
pub fn hilbertness_probe(
    spec: &NormSpec,
    budget: &Budget,
    seed: u64,
) -> Result<ProbeReport, ConstantsError> {
    let d = spec.dim();
    let max_n = MAX_FAMILY.min(d + 2).max(2);
    let mut candidates: Vec<Candidate> = structured(d)
        .into_iter()
        .filter_map(|xs| evaluate(spec, xs))
        .collect();
    let random: Vec<Candidate> = (0..budget.samples)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let n = rng.random_range(2..=max_n);
            let xs = (0..n).map(|_| random_vector(d, &mut rng)).collect();
            evaluate(spec, xs)
        })
        .collect();
    candidates.extend(random);
    if candidates.is_empty() {
        return Err(ConstantsError::NoVectors);
    }
    let mut evaluations = candidates.len() as u64;
    let pick = |cmp: fn(f64, f64) -> bool| {
        candidates
            .iter()
            .cloned()
            .reduce(|a, b| if cmp(b.ratio, a.ratio) { b } else { a })
            .expect("nonempty")
    };
    let mut hi = pick(|b, a| b > a);
    let mut lo = pick(|b, a| b < a);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    let mut step = 0.5;
    for _ in 0..budget.iterations {
        for (best, maximize) in [(&mut hi, true), (&mut lo, false)] {
            let mut xs = best.xs.clone();
            let i = rng.random_range(0..xs.len());
            let j = rng.random_range(0..d);
            let delta =
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * step;
            xs[i][j] += delta;
            evaluations += 1;
            if let Some(c) = evaluate(spec, xs) {
                let better = if maximize {
                    c.ratio > best.ratio
                } else {
                    c.ratio < best.ratio
                };
                if better {
                    *best = c;
                }
            }
        }
        step = (step * 0.995).max(1e-3);
    }
    let c_hat = hi.ratio.max(lo.ratio.recip());
    Ok(ProbeReport {
        c_hat,
        max_ratio: hi.ratio,
        min_ratio: lo.ratio,
        best_upper_violation: hi.ratio,
        best_lower_violation: lo.ratio.recip(),
        max_witness: hi.xs,
        min_witness: lo.xs,
        evaluations,
        seed,
    })
}
