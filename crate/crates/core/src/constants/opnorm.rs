use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{Budget, ConstantEstimate, ConstantName, ConstantsError, Method, Witness};
use crate::function::VectorFunction;
use crate::group::FiniteAbelianGroup;
use crate::norms::NormSpec;
use crate::transform::TransformPlan;

/// Relative improvement below which an ascent run counts as stationary.
const STAGNATION: f64 = 1e-10;

/// `||F f|| / ||f||` in `L2` with self-dual measures on both sides.
pub fn transform_ratio(f: &VectorFunction, spec: &NormSpec) -> Result<f64, ConstantsError> {
    let plan = TransformPlan::fast(f.group());
    let num = plan.dft(f)?.l2_norm(spec)?;
    let den = f.l2_norm(spec)?;
    if den == 0.0 {
        return Err(ConstantsError::ZeroVectors);
    }
    Ok(num / den)
}

struct Run {
    ratio: f64,
    best: VectorFunction,
    steps: usize,
}

fn random_function(group: &FiniteAbelianGroup, dim: usize, rng: &mut ChaCha8Rng) -> VectorFunction {
    let values = (0..group.cardinality() * dim)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    VectorFunction::from_flat(group, dim, values).expect("sized by construction")
}

fn normalize(f: &mut VectorFunction, spec: &NormSpec) -> Result<f64, ConstantsError> {
    let n = f.l2_norm(spec)?;
    if n > 0.0 {
        f.scale(n.recip());
    }
    Ok(n)
}

/// One alternating ascent run. Each step replaces `f` by the maximizer of
/// the functional that norms `F f`, pulled back through `F`; the ratio is
/// nondecreasing along the run.
fn ascend(
    plan: &TransformPlan,
    spec: &NormSpec,
    dual: &NormSpec,
    mut f: VectorFunction,
    iterations: usize,
) -> Result<Run, ConstantsError> {
    let d = spec.dim();
    if normalize(&mut f, spec)? == 0.0 {
        // Degenerate start: perturb to a constant function.
        f.values_mut()
            .iter_mut()
            .for_each(|z| *z = Complex64::new(1.0, 0.0));
        normalize(&mut f, spec)?;
    }
    let mut y = plan.dft(&f)?;
    let mut ratio = y.l2_norm(spec)?;
    let mut steps = 0;
    for _ in 0..iterations {
        steps += 1;
        // Norming functional of y in L2(G^, X*).
        let mut g = VectorFunction::zeros(y.group(), d);
        for xi in 0..y.group().cardinality() {
            let v = y.at(xi);
            let nv = spec.norm(v)?;
            if nv > 0.0 {
                let a = spec.ascent_direction(v)?;
                for (out, z) in g.at_mut(xi).iter_mut().zip(a.iter()) {
                    *out = z * (nv / ratio);
                }
            }
        }
        let z = plan.idft(&g)?;
        // Maximizer over the unit sphere of L2(G, X) of Re <z, f>.
        let mut next = VectorFunction::zeros(f.group(), d);
        for t in 0..f.group().cardinality() {
            let v = z.at(t);
            let nv = dual.norm(v)?;
            if nv > 0.0 {
                let u = dual.ascent_direction(v)?;
                for (out, w) in next.at_mut(t).iter_mut().zip(u.iter()) {
                    *out = w * nv;
                }
            }
        }
        if normalize(&mut next, spec)? == 0.0 {
            break;
        }
        let y_next = plan.dft(&next)?;
        let r = y_next.l2_norm(spec)?;
        if r <= ratio {
            break;
        }
        let improved = (r - ratio) / ratio;
        f = next;
        y = y_next;
        ratio = r;
        if improved < STAGNATION {
            break;
        }
    }
    Ok(Run {
        ratio,
        best: f,
        steps,
    })
}

/// Lower bound on `||F||_{L2(G,X) -> L2(G^,X)}` from seeded ascent restarts,
/// with the upper bound `min(sqrt|G|, b/a)` where `a, b` compare the norm
/// with the Euclidean one.
pub fn operator_norm_lower(
    group: &FiniteAbelianGroup,
    spec: &NormSpec,
    budget: &Budget,
    seed: u64,
) -> Result<ConstantEstimate, ConstantsError> {
    if budget.restarts == 0 {
        return Err(ConstantsError::ZeroBudget("restart"));
    }
    if budget.iterations == 0 {
        return Err(ConstantsError::ZeroBudget("iteration"));
    }
    let plan = TransformPlan::fast(group);
    let dual = spec.dual();
    let runs: Vec<Run> = (0..budget.restarts)
        .into_par_iter()
        .map(|restart| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(restart as u64);
            let start = random_function(group, spec.dim(), &mut rng);
            ascend(&plan, spec, &dual, start, budget.iterations)
        })
        .collect::<Result<_, _>>()?;
    let samples = runs.iter().map(|r| r.steps as u64).sum();
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.ratio > a.ratio { b } else { a })
        .expect("at least one restart");
    let upper = (group.cardinality() as f64)
        .sqrt()
        .min(spec.hilbert_distance_bound());
    let mut lower = transform_ratio(&best.best, spec)?;
    if lower > upper && lower <= upper * (1.0 + 1e-12) {
        lower = upper;
    }
    Ok(ConstantEstimate {
        constant: ConstantName::OperatorNorm,
        lower,
        upper,
        method: Method::SubgradientAscent,
        samples,
        seed,
        std_error: None,
        witness: Witness::Function {
            norm: spec.clone(),
            function: best.best,
        },
    })
}
