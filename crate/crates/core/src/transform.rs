//! The vector-valued Fourier transform on finite abelian groups,
//!
//! ```text
//! (F f)(xi) = |G|^{-1/2} sum_t <xi, t> f(t),
//! ```
//!
//! applied coordinatewise in X. The symmetric normalization matches the
//! self-dual Haar measure, so `F` is unitary on `L2(G, C^d)` with the
//! Euclidean norm and `F F = reflect`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fft::CyclicFft;
use crate::function::{FunctionError, Measure, VectorFunction};
use crate::group::{root_of_unity, FiniteAbelianGroup, GroupError, Subgroup};

/// Residuals at or below this count as exact.
pub const EXACT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransformError {
    #[error("function lives on {found}, plan is for {expected}")]
    GroupMismatch { expected: String, found: String },
    #[error("expected a scalar function, got dimension {0}")]
    NotScalar(usize),
    #[error("embedding factor must have unit L2 norm, got {0}")]
    NotUnitNorm(f64),
    #[error(transparent)]
    Function(#[from] FunctionError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// The defining double sum over `G x G`.
    Naive,
    /// Separable mixed-radix transform along each cyclic factor.
    #[default]
    MixedRadixFast,
}

/// Precomputed tables for transforming functions on one group.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformPlan {
    group: FiniteAbelianGroup,
    strategy: Strategy,
    factors: Vec<CyclicFft>,
    /// `e^{2 pi i k / exponent}` for the naive strategy.
    roots: Vec<Complex64>,
}

impl TransformPlan {
    pub fn new(group: &FiniteAbelianGroup, strategy: Strategy) -> Self {
        let (factors, roots) = match strategy {
            Strategy::MixedRadixFast => (
                group.orders().iter().map(|&n| CyclicFft::new(n)).collect(),
                Vec::new(),
            ),
            Strategy::Naive => {
                let l = group.exponent();
                (Vec::new(), (0..l).map(|k| root_of_unity(k, l)).collect())
            }
        };
        Self {
            group: group.clone(),
            strategy,
            factors,
            roots,
        }
    }

    pub fn fast(group: &FiniteAbelianGroup) -> Self {
        Self::new(group, Strategy::MixedRadixFast)
    }

    pub fn naive(group: &FiniteAbelianGroup) -> Self {
        Self::new(group, Strategy::Naive)
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    fn check(&self, f: &VectorFunction) -> Result<(), TransformError> {
        if f.group() != &self.group {
            return Err(TransformError::GroupMismatch {
                expected: self.group.to_string(),
                found: f.group().to_string(),
            });
        }
        Ok(())
    }

    /// `(F f)(xi) = |G|^{-1/2} sum_t <xi, t> f(t)`, a function on the dual.
    pub fn dft(&self, f: &VectorFunction) -> Result<VectorFunction, TransformError> {
        self.check(f)?;
        let mut out = self.unnormalized(f);
        out.scale(self.group.haar_weight());
        Ok(out)
    }

    /// Inverse transform, `|G|^{-1/2} sum_xi conj<xi, t> g(xi)`.
    pub fn idft(&self, g: &VectorFunction) -> Result<VectorFunction, TransformError> {
        self.check(g)?;
        let mut conj = g.clone();
        conj.values_mut().iter_mut().for_each(|z| *z = z.conj());
        let mut out = self.unnormalized(&conj);
        let w = self.group.haar_weight();
        out.values_mut().iter_mut().for_each(|z| *z = z.conj() * w);
        Ok(out)
    }

    /// `sum_t <xi, t> f(t)` without normalization.
    pub(crate) fn unnormalized(&self, f: &VectorFunction) -> VectorFunction {
        match self.strategy {
            Strategy::Naive => self.naive_sum(f),
            Strategy::MixedRadixFast => self.separable(f),
        }
    }

    fn naive_sum(&self, f: &VectorFunction) -> VectorFunction {
        let g = &self.group;
        let d = f.dim();
        let coords: Vec<Vec<usize>> = (0..g.cardinality()).map(|i| g.coords_at(i)).collect();
        let mut out = VectorFunction::zeros(&g.dual(), d);
        for (xi, xi_coords) in coords.iter().enumerate() {
            let acc = out.at_mut(xi);
            for (t, t_coords) in coords.iter().enumerate() {
                let w = self.roots[g.pairing_numerator(xi_coords, t_coords) as usize];
                for (a, v) in acc.iter_mut().zip(f.at(t)) {
                    *a += w * v;
                }
            }
        }
        out
    }

    fn separable(&self, f: &VectorFunction) -> VectorFunction {
        let d = f.dim();
        let mut data = f.values().to_vec();
        let orders = self.group.orders();
        let mut inner: usize = orders.iter().product();
        let mut line = Vec::new();
        let mut spectrum = Vec::new();
        for (axis, fft) in self.factors.iter().enumerate() {
            let n = orders[axis];
            inner /= n;
            if n == 1 {
                continue;
            }
            let outer: usize = orders[..axis].iter().product();
            line.resize(n, Complex64::new(0.0, 0.0));
            spectrum.resize(n, Complex64::new(0.0, 0.0));
            for o in 0..outer {
                for i in 0..inner {
                    let base = o * n * inner + i;
                    for j in 0..d {
                        for (k, slot) in line.iter_mut().enumerate() {
                            *slot = data[(base + k * inner) * d + j];
                        }
                        fft.process(&line, &mut spectrum);
                        for (k, value) in spectrum.iter().enumerate() {
                            data[(base + k * inner) * d + j] = *value;
                        }
                    }
                }
            }
            debug_assert_eq!(fft.len(), n);
        }
        VectorFunction::from_flat(&self.group.dual(), d, data).expect("shape preserved")
    }
}

/// One-shot transform with the fast strategy.
pub fn dft(f: &VectorFunction) -> VectorFunction {
    TransformPlan::fast(f.group())
        .dft(f)
        .expect("plan built for the function's group")
}

/// One-shot inverse transform with the fast strategy.
pub fn idft(g: &VectorFunction) -> VectorFunction {
    TransformPlan::fast(g.group())
        .idft(g)
        .expect("plan built for the function's group")
}

/// `(reflect f)(t) = f(-t)`.
pub fn reflect(f: &VectorFunction) -> VectorFunction {
    let g = f.group();
    let mut out = VectorFunction::zeros(g, f.dim());
    for t in 0..g.cardinality() {
        out.at_mut(g.neg_index(t)).copy_from_slice(f.at(t));
    }
    out
}

/// The isometric embedding `J f = f (x) psi` of `L2(G, X)` into
/// `L2(G x G', X)` for a unit-norm scalar `psi` on `G'`, and its dual
/// counterpart `J^ g = g (x) F(psi)`. The pair satisfies `F J = J^ F`.
#[derive(Debug, Clone)]
pub struct TensorEmbedding {
    psi: VectorFunction,
    psi_hat: VectorFunction,
}

impl TensorEmbedding {
    pub fn new(psi: VectorFunction) -> Result<Self, TransformError> {
        if psi.dim() != 1 {
            return Err(TransformError::NotScalar(psi.dim()));
        }
        let sum: f64 = psi.values().iter().map(|z| z.norm_sqr()).sum();
        let norm = (Measure::SelfDual.point_weight(psi.group().cardinality()) * sum).sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(TransformError::NotUnitNorm(norm));
        }
        let psi_hat = dft(&psi);
        Ok(Self { psi, psi_hat })
    }

    pub fn psi(&self) -> &VectorFunction {
        &self.psi
    }

    pub fn psi_hat(&self) -> &VectorFunction {
        &self.psi_hat
    }

    /// `J f`, a function on `G x G'`.
    pub fn embed(&self, f: &VectorFunction) -> Result<VectorFunction, TransformError> {
        tensor_with(f, &self.psi)
    }

    /// `J^ g`, a function on the dual of `G x G'`.
    pub fn embed_dual(&self, g: &VectorFunction) -> Result<VectorFunction, TransformError> {
        tensor_with(g, &self.psi_hat)
    }
}

/// `J f = f (x) psi`; `psi` must be scalar with unit self-dual `L2` norm.
pub fn tensor_embedding(
    f: &VectorFunction,
    psi: &VectorFunction,
) -> Result<VectorFunction, TransformError> {
    TensorEmbedding::new(psi.clone())?.embed(f)
}

fn tensor_with(f: &VectorFunction, psi: &VectorFunction) -> Result<VectorFunction, TransformError> {
    let group = f.group().product(psi.group())?;
    let d = f.dim();
    let mut values = Vec::with_capacity(group.cardinality() * d);
    for t in 0..f.group().cardinality() {
        let ft = f.at(t);
        for p in psi.values() {
            values.extend(ft.iter().map(|x| x * p));
        }
    }
    Ok(VectorFunction::from_flat(&group, d, values)?)
}

/// Outcome of [`support_coset_check`]. Residuals are relative to the
/// Euclidean norm of all values of `f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportCosetReport {
    /// `K` is contained in `H`.
    pub nested: bool,
    /// Largest value of `f` outside `H`.
    pub input_support_residual: f64,
    /// Largest variation of `f` within a coset of `K`.
    pub input_coset_residual: f64,
    pub precondition_holds: bool,
    /// Largest value of `F f` outside `K^perp`.
    pub support_residual: f64,
    /// Largest variation of `F f` within a coset of `H^perp`.
    pub coset_residual: f64,
    pub holds: bool,
}

/// Checks that a function supported in `H` and constant on cosets of
/// `K <= H` transforms into one supported in `K^perp` and constant on
/// cosets of `H^perp`. Violated preconditions are reported, not raised.
pub fn support_coset_check(
    f: &VectorFunction,
    h: &Subgroup,
    k: &Subgroup,
) -> Result<SupportCosetReport, TransformError> {
    let group = f.group();
    let scale = f.values().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let rel = |x: f64| if scale > 0.0 { x / scale } else { x };
    let point =
        |g: &VectorFunction, t: usize| g.at(t).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let variation = |g: &VectorFunction, labels: &[usize], count: usize| {
        let mut reps = vec![usize::MAX; count];
        let mut worst: f64 = 0.0;
        for (t, &c) in labels.iter().enumerate() {
            if reps[c] == usize::MAX {
                reps[c] = t;
                continue;
            }
            let diff = g
                .at(t)
                .iter()
                .zip(g.at(reps[c]))
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            worst = worst.max(diff);
        }
        worst
    };

    let nested = k.is_subgroup_of(h);
    let input_support_residual = rel((0..group.cardinality())
        .filter(|&t| !h.contains_index(t))
        .map(|t| point(f, t))
        .fold(0.0, f64::max));
    let (k_labels, k_count) = group.coset_labels(k)?;
    let input_coset_residual = rel(variation(f, &k_labels, k_count));
    let precondition_holds = nested
        && input_support_residual <= EXACT_TOLERANCE
        && input_coset_residual <= EXACT_TOLERANCE;

    let fhat = dft(f);
    let dual = group.dual();
    let k_perp = group.annihilator(k)?;
    let h_perp = group.annihilator(h)?;
    let support_residual = rel((0..dual.cardinality())
        .filter(|&xi| !k_perp.contains_index(xi))
        .map(|xi| point(&fhat, xi))
        .fold(0.0, f64::max));
    let (h_labels, h_count) = dual.coset_labels(&h_perp)?;
    let coset_residual = rel(variation(&fhat, &h_labels, h_count));
    Ok(SupportCosetReport {
        nested,
        input_support_residual,
        input_coset_residual,
        precondition_holds,
        support_residual,
        coset_residual,
        holds: support_residual <= EXACT_TOLERANCE && coset_residual <= EXACT_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::simple_function;
    use crate::norms::{NormSpec, XVector};

    fn group(orders: &[usize]) -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(orders.to_vec()).unwrap()
    }

    fn sample(g: &FiniteAbelianGroup, d: usize) -> VectorFunction {
        VectorFunction::from_fn(g, d, |t| {
            XVector(
                (0..d)
                    .map(|j| {
                        let s = (t * 7 + j * 3) as f64;
                        Complex64::new((s * 0.37).sin(), (s * 0.91).cos())
                    })
                    .collect(),
            )
        })
        .unwrap()
    }

    #[test]
    fn dft_examples() {
        let z2 = group(&[2]);
        let x = XVector::from_reals(&[1.0, -2.0]);
        let delta = simple_function(&z2, 2, &[(vec![z2.identity()], x.clone())]).unwrap();
        let fhat = dft(&delta);
        let s = 0.5f64.sqrt();
        for xi in 0..2 {
            assert!(
                (fhat.at(xi)[0].re - s).abs() < 1e-15
                    && (fhat.at(xi)[1].re + 2.0 * s).abs() < 1e-15
            );
        }

        let g = group(&[3, 4]);
        let constant = simple_function(&g, 2, &[(g.elements().collect(), x.clone())]).unwrap();
        let fhat = dft(&constant);
        let root = 12f64.sqrt();
        assert!((fhat.at(0)[0] - Complex64::new(root, 0.0)).norm() < 1e-13);
        assert!((fhat.at(0)[1] - Complex64::new(-2.0 * root, 0.0)).norm() < 1e-13);
        for xi in 1..12 {
            assert!(fhat.at(xi).iter().all(|z| z.norm() < 1e-13));
        }
    }

    #[test]
    fn scalar_parseval() {
        let g = group(&[6, 5]);
        let f = sample(&g, 1);
        let spec = NormSpec::hilbert_identity(1).unwrap();
        let before = f.l2_norm(&spec).unwrap();
        let after = dft(&f).l2_norm(&spec).unwrap();
        assert!((before - after).abs() < 1e-12 * before);
    }

    #[test]
    fn fast_matches_naive() {
        for orders in [vec![1], vec![7], vec![4, 9], vec![2, 3, 5], vec![16, 1, 3]] {
            let g = group(&orders);
            let f = sample(&g, 3);
            let fast = TransformPlan::fast(&g).dft(&f).unwrap();
            let naive = TransformPlan::naive(&g).dft(&f).unwrap();
            assert!(fast.max_abs_diff(&naive).unwrap() < 1e-12, "{orders:?}");
            let back = TransformPlan::naive(&g).idft(&naive).unwrap();
            assert!(back.max_abs_diff(&f).unwrap() < 1e-12);
        }
    }

    #[test]
    fn inversion_and_reflection() {
        let g = group(&[4, 6]);
        let f = sample(&g, 2);
        assert!(idft(&dft(&f)).max_abs_diff(&f).unwrap() < 1e-13);
        assert!(dft(&dft(&f)).max_abs_diff(&reflect(&f)).unwrap() < 1e-13);
        let zero = VectorFunction::zeros(&g, 2);
        assert!(idft(&zero).is_zero());
    }

    #[test]
    fn reflect_examples() {
        let z5 = group(&[5]);
        let even = VectorFunction::scalar(
            &z5,
            [1.0, 2.0, 3.0, 3.0, 2.0]
                .iter()
                .map(|&x| Complex64::new(x, 0.0))
                .collect(),
        )
        .unwrap();
        assert_eq!(reflect(&even), even);
        let x = XVector::from_reals(&[1.0]);
        let delta =
            simple_function(&z5, 1, &[(vec![z5.element(vec![2]).unwrap()], x.clone())]).unwrap();
        let expected = simple_function(&z5, 1, &[(vec![z5.element(vec![3]).unwrap()], x)]).unwrap();
        assert_eq!(reflect(&delta), expected);
    }

    #[test]
    fn plan_rejects_other_groups() {
        let plan = TransformPlan::fast(&group(&[4]));
        let f = VectorFunction::zeros(&group(&[2, 2]), 1);
        assert!(matches!(
            plan.dft(&f),
            Err(TransformError::GroupMismatch { .. })
        ));
    }

    #[test]
    fn trivial_embedding_is_identity() {
        let g = group(&[3]);
        let f = sample(&g, 2);
        let psi = VectorFunction::scalar(
            &FiniteAbelianGroup::trivial(),
            vec![Complex64::new(1.0, 0.0)],
        )
        .unwrap();
        let jf = tensor_embedding(&f, &psi).unwrap();
        assert_eq!(jf.group().orders(), &[3, 1]);
        assert_eq!(jf.values(), f.values());
    }

    #[test]
    fn embedding_requires_unit_norm() {
        let z4 = group(&[4]);
        let psi = VectorFunction::scalar(&z4, vec![Complex64::new(1.0, 0.0); 4]).unwrap();
        assert!(matches!(
            TensorEmbedding::new(psi),
            Err(TransformError::NotUnitNorm(_))
        ));
    }

    #[test]
    fn support_coset_examples() {
        let z4 = group(&[4]);
        let x = XVector::from_reals(&[1.0, 0.5]);
        let whole = Subgroup::whole(&z4);
        let constant = simple_function(&z4, 2, &[(z4.elements().collect(), x.clone())]).unwrap();
        let report = support_coset_check(&constant, &whole, &whole).unwrap();
        assert!(report.precondition_holds && report.holds);

        let f = sample(&z4, 2);
        let report = support_coset_check(&f, &whole, &Subgroup::trivial(&z4)).unwrap();
        assert!(report.precondition_holds && report.holds);

        let h = Subgroup::generated_by(&z4, &[z4.element(vec![2]).unwrap()]).unwrap();
        let indicator = simple_function(&z4, 2, &[(h.elements(), x.clone())]).unwrap();
        let report = support_coset_check(&indicator, &h, &h).unwrap();
        assert!(report.precondition_holds && report.holds, "{report:?}");
        let fhat = dft(&indicator);
        assert!(fhat
            .at(1)
            .iter()
            .chain(fhat.at(3))
            .all(|z| z.norm() < 1e-15));
        assert!(fhat.max_abs() > 0.5);

        // A generic function violates the precondition and the conclusion.
        let report = support_coset_check(&f, &h, &h).unwrap();
        assert!(!report.precondition_holds && !report.holds);
    }
}
