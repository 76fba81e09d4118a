//! Dense vector-valued functions on a finite abelian group: the computational
//! form of `L2(G, X)`.
//!
//! Values are stored flat, `values[t * dim + j]` holding coordinate `j` of
//! `f(t)`, where `t` is the row-major element index of the group.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::group::{FiniteAbelianGroup, GroupElement, GroupError};
use crate::norms::{NormError, NormSpec, XVector};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FunctionError {
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("function has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("functions live on different groups ({left} vs {right})")]
    GroupMismatch { left: String, right: String },
    #[error("pieces overlap at element {0:?}")]
    OverlappingPieces(Vec<usize>),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Norm(#[from] NormError),
}

/// How point masses are weighted when integrating over a finite group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    /// Weight `|G|^{-1/2}` per point; makes the Fourier transform unitary.
    SelfDual,
    /// Weight `1/|G|` per point; total mass one.
    Probability,
    /// Weight one per point.
    Counting,
}

impl Measure {
    pub fn point_weight(self, cardinality: usize) -> f64 {
        match self {
            Measure::SelfDual => (cardinality as f64).sqrt().recip(),
            Measure::Probability => (cardinality as f64).recip(),
            Measure::Counting => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorFunction {
    group: FiniteAbelianGroup,
    dim: usize,
    values: Vec<Complex64>,
}

impl VectorFunction {
    pub fn zeros(group: &FiniteAbelianGroup, dim: usize) -> Self {
        Self {
            group: group.clone(),
            dim,
            values: vec![Complex64::new(0.0, 0.0); group.cardinality() * dim],
        }
    }

    /// From flat values, `values[t * dim + j]`.
    pub fn from_flat(
        group: &FiniteAbelianGroup,
        dim: usize,
        values: Vec<Complex64>,
    ) -> Result<Self, FunctionError> {
        let expected = group.cardinality() * dim;
        if values.len() != expected {
            return Err(FunctionError::LengthMismatch {
                expected,
                got: values.len(),
            });
        }
        Ok(Self {
            group: group.clone(),
            dim,
            values,
        })
    }

    pub fn from_fn(
        group: &FiniteAbelianGroup,
        dim: usize,
        mut f: impl FnMut(usize) -> XVector,
    ) -> Result<Self, FunctionError> {
        let mut values = Vec::with_capacity(group.cardinality() * dim);
        for t in 0..group.cardinality() {
            let v = f(t);
            if v.dim() != dim {
                return Err(FunctionError::DimensionMismatch {
                    expected: dim,
                    got: v.dim(),
                });
            }
            values.extend_from_slice(&v);
        }
        Self::from_flat(group, dim, values)
    }

    /// A scalar function, stored with `dim = 1`.
    pub fn scalar(
        group: &FiniteAbelianGroup,
        values: Vec<Complex64>,
    ) -> Result<Self, FunctionError> {
        Self::from_flat(group, 1, values)
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// `f(t)` for the element with index `t`.
    pub fn at(&self, t: usize) -> &[Complex64] {
        &self.values[t * self.dim..(t + 1) * self.dim]
    }

    pub fn at_mut(&mut self, t: usize) -> &mut [Complex64] {
        &mut self.values[t * self.dim..(t + 1) * self.dim]
    }

    pub fn value(&self, t: &GroupElement) -> &[Complex64] {
        self.at(self.group.index_of(t))
    }

    pub fn points(&self) -> impl Iterator<Item = &[Complex64]> {
        self.values.chunks_exact(self.dim.max(1))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn check_compatible(&self, other: &Self) -> Result<(), FunctionError> {
        if self.group != other.group {
            return Err(FunctionError::GroupMismatch {
                left: self.group.to_string(),
                right: other.group.to_string(),
            });
        }
        if self.dim != other.dim {
            return Err(FunctionError::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(())
    }

    fn check_norm(&self, spec: &NormSpec) -> Result<(), FunctionError> {
        if spec.dim() != self.dim {
            return Err(FunctionError::DimensionMismatch {
                expected: spec.dim(),
                got: self.dim,
            });
        }
        Ok(())
    }

    /// Bochner `L2` norm under the self-dual Haar measure:
    /// `(|G|^{-1/2} sum_t ||f(t)||^2)^{1/2}`.
    pub fn l2_norm(&self, spec: &NormSpec) -> Result<f64, FunctionError> {
        self.l2_norm_with(spec, Measure::SelfDual)
    }

    pub fn l2_norm_with(&self, spec: &NormSpec, measure: Measure) -> Result<f64, FunctionError> {
        self.check_norm(spec)?;
        let sum: f64 = self.points().map(|v| spec.norm_squared_unchecked(v)).sum();
        Ok((measure.point_weight(self.group.cardinality()) * sum).sqrt())
    }

    /// `w sum_t (f(t), g(t))_X` with the self-dual weight `w`.
    pub fn inner_l2(&self, other: &Self, spec: &NormSpec) -> Result<Complex64, FunctionError> {
        self.check_compatible(other)?;
        self.check_norm(spec)?;
        let mut sum = Complex64::new(0.0, 0.0);
        for (u, v) in self.points().zip(other.points()) {
            sum += spec.inner_product(u, v)?;
        }
        Ok(sum * Measure::SelfDual.point_weight(self.group.cardinality()))
    }

    /// `alpha * self + other`.
    pub fn axpy(&self, alpha: Complex64, other: &Self) -> Result<Self, FunctionError> {
        self.check_compatible(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| alpha * a + b)
            .collect();
        Ok(Self {
            group: self.group.clone(),
            dim: self.dim,
            values,
        })
    }

    pub fn scale(&mut self, alpha: f64) {
        for z in &mut self.values {
            *z *= alpha;
        }
    }

    /// Maximum coordinatewise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, FunctionError> {
        self.check_compatible(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// `phi (x) x`: a scalar function on the group times a fixed vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleTensor {
    pub group: FiniteAbelianGroup,
    pub scalar_part: Vec<Complex64>,
    pub vector_part: XVector,
}

impl SimpleTensor {
    pub fn new(
        group: &FiniteAbelianGroup,
        scalar_part: Vec<Complex64>,
        vector_part: XVector,
    ) -> Result<Self, FunctionError> {
        if scalar_part.len() != group.cardinality() {
            return Err(FunctionError::LengthMismatch {
                expected: group.cardinality(),
                got: scalar_part.len(),
            });
        }
        Ok(Self {
            group: group.clone(),
            scalar_part,
            vector_part,
        })
    }

    pub fn materialize(&self) -> VectorFunction {
        let dim = self.vector_part.dim();
        let mut values = Vec::with_capacity(self.scalar_part.len() * dim);
        for phi in &self.scalar_part {
            values.extend(self.vector_part.iter().map(|x| phi * x));
        }
        VectorFunction {
            group: self.group.clone(),
            dim,
            values,
        }
    }

    /// Scalar `L2` norm of the scalar part under the self-dual measure.
    pub fn scalar_l2_norm(&self) -> f64 {
        let sum: f64 = self.scalar_part.iter().map(|z| z.norm_sqr()).sum();
        (Measure::SelfDual.point_weight(self.group.cardinality()) * sum).sqrt()
    }
}

/// `sum_k I_{A_k} x_k` for pairwise disjoint sets `A_k`.
pub fn simple_function(
    group: &FiniteAbelianGroup,
    dim: usize,
    pieces: &[(Vec<GroupElement>, XVector)],
) -> Result<VectorFunction, FunctionError> {
    let mut f = VectorFunction::zeros(group, dim);
    let mut taken = vec![false; group.cardinality()];
    for (set, x) in pieces {
        if x.dim() != dim {
            return Err(FunctionError::DimensionMismatch {
                expected: dim,
                got: x.dim(),
            });
        }
        for t in set {
            if !group.contains(t) {
                return Err(GroupError::ShapeMismatch {
                    expected: group.rank(),
                    got: t.coords().len(),
                }
                .into());
            }
            let idx = group.index_of(t);
            if std::mem::replace(&mut taken[idx], true) {
                return Err(FunctionError::OverlappingPieces(t.coords().to_vec()));
            }
            f.at_mut(idx).copy_from_slice(x);
        }
    }
    Ok(f)
}

/// JSON form: `{"group": [orders], "dim": d, "values": [[[re, im], ...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorFunctionJson {
    pub group: Vec<usize>,
    pub dim: usize,
    pub values: Vec<Vec<[f64; 2]>>,
}

impl From<&VectorFunction> for VectorFunctionJson {
    fn from(f: &VectorFunction) -> Self {
        Self {
            group: f.group.orders().to_vec(),
            dim: f.dim,
            values: f
                .points()
                .map(|v| v.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }
}

impl TryFrom<VectorFunctionJson> for VectorFunction {
    type Error = FunctionError;

    fn try_from(json: VectorFunctionJson) -> Result<Self, FunctionError> {
        let group = FiniteAbelianGroup::new(json.group)?;
        if json.values.len() != group.cardinality() {
            return Err(FunctionError::LengthMismatch {
                expected: group.cardinality(),
                got: json.values.len(),
            });
        }
        let mut values = Vec::with_capacity(group.cardinality() * json.dim);
        for point in &json.values {
            if point.len() != json.dim {
                return Err(FunctionError::DimensionMismatch {
                    expected: json.dim,
                    got: point.len(),
                });
            }
            values.extend(point.iter().map(|&[re, im]| Complex64::new(re, im)));
        }
        VectorFunction::from_flat(&group, json.dim, values)
    }
}

impl Serialize for VectorFunction {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        VectorFunctionJson::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for VectorFunction {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let json = VectorFunctionJson::deserialize(deserializer)?;
        VectorFunction::try_from(json).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group(orders: &[usize]) -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(orders.to_vec()).unwrap()
    }

    #[test]
    fn l2_norm_examples() {
        let z4 = group(&[4]);
        let l2 = NormSpec::lp(2.0, 2).unwrap();
        assert_eq!(VectorFunction::zeros(&z4, 2).l2_norm(&l2).unwrap(), 0.0);

        let x = XVector::basis(2, 0);
        let delta = simple_function(&z4, 2, &[(vec![z4.identity()], x.clone())]).unwrap();
        assert!((delta.l2_norm(&l2).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);

        let l1 = NormSpec::lp(1.0, 2).unwrap();
        let x = XVector::from_reals(&[1.0, -2.0]);
        let constant = simple_function(&z4, 2, &[(z4.elements().collect(), x.clone())]).unwrap();
        let expected = 4f64.powf(0.25) * 3.0;
        assert!((constant.l2_norm(&l1).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn l2_norm_dimension_mismatch() {
        let f = VectorFunction::zeros(&group(&[2]), 3);
        assert!(matches!(
            f.l2_norm(&NormSpec::lp(2.0, 2).unwrap()),
            Err(FunctionError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn simple_function_examples() {
        let z2 = group(&[2]);
        assert!(simple_function(&z2, 2, &[]).unwrap().is_zero());

        let e1 = XVector::basis(2, 0);
        let e2 = XVector::basis(2, 1);
        let f = simple_function(
            &z2,
            2,
            &[
                (vec![z2.element(vec![0]).unwrap()], e1.clone()),
                (vec![z2.element(vec![1]).unwrap()], e2.clone()),
            ],
        )
        .unwrap();
        assert_eq!(f.at(0), &e1[..]);
        assert_eq!(f.at(1), &e2[..]);

        let overlap = simple_function(
            &z2,
            2,
            &[
                (vec![z2.identity()], e1.clone()),
                (z2.elements().collect(), e2),
            ],
        );
        assert!(matches!(overlap, Err(FunctionError::OverlappingPieces(_))));
    }

    #[test]
    fn pointwise_inner_examples() {
        let z2 = group(&[2]);
        let h = NormSpec::hilbert_identity(2).unwrap();
        let e1 = XVector::basis(2, 0);
        let f =
            simple_function(&z2, 2, &[(vec![z2.element(vec![0]).unwrap()], e1.clone())]).unwrap();
        let g =
            simple_function(&z2, 2, &[(vec![z2.element(vec![1]).unwrap()], e1.clone())]).unwrap();
        assert_eq!(f.inner_l2(&g, &h).unwrap(), Complex64::new(0.0, 0.0));
        let ff = f.inner_l2(&f, &h).unwrap();
        assert!((ff.re - 0.5f64.sqrt()).abs() < 1e-15 && ff.im == 0.0);

        let l1 = NormSpec::lp(1.0, 2).unwrap();
        assert!(matches!(
            f.inner_l2(&f, &l1),
            Err(FunctionError::Norm(NormError::NotHilbert(_)))
        ));
    }

    #[test]
    fn json_round_trip() {
        let g = group(&[2, 3]);
        let f = VectorFunction::from_fn(&g, 2, |t| {
            XVector(vec![
                Complex64::new(t as f64, -0.5),
                Complex64::new(0.25, t as f64 * 1.5),
            ])
        })
        .unwrap();
        let text = serde_json::to_string(&f).unwrap();
        assert!(text.starts_with("{\"group\":[2,3],\"dim\":2,\"values\":[[[0.0,-0.5]"));
        let back: VectorFunction = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<VectorFunction>(
            r#"{"group":[2],"dim":1,"values":[[[1,0]]]}"#
        )
        .is_err());
    }
}
