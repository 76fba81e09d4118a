//! Transport of functions between a finite quotient `Q = H/K` and its dual
//! through a group isomorphism `alpha: Q^ -> Q`.
//!
//! `Q` carries the probability measure (it is a quotient of a compact group)
//! and `Q^` the counting measure. With those measures
//!
//! ```text
//! (R_alpha psi)(xi) = psi(alpha(xi)) |Q|^{-1/2}
//! ```
//!
//! is an isometry `L2(Q, X) -> L2(Q^, X)` and
//! `R_{alpha*} F_{Q^} R_alpha = F_Q`.

use serde::Serialize;

use super::TowerError;
use crate::function::{Measure, VectorFunction};
use crate::group::FiniteAbelianGroup;
use crate::norms::NormSpec;
use crate::transform::{TransformPlan, EXACT_TOLERANCE};

/// A group isomorphism from the dual of `group` onto `group`, stored as the
/// table `character index -> element index`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualIsomorphism {
    group: FiniteAbelianGroup,
    table: Vec<usize>,
}

impl DualIsomorphism {
    /// Componentwise identity on residues.
    pub fn identity(group: &FiniteAbelianGroup) -> Self {
        Self {
            group: group.clone(),
            table: (0..group.cardinality()).collect(),
        }
    }

    /// Validates bijectivity and additivity of an explicit table.
    pub fn from_table(group: &FiniteAbelianGroup, table: Vec<usize>) -> Result<Self, TowerError> {
        let n = group.cardinality();
        if table.len() != n {
            return Err(TowerError::NotIsomorphism(format!(
                "table has {} entries for a group of order {n}",
                table.len()
            )));
        }
        let mut seen = vec![false; n];
        for &t in &table {
            if t >= n || std::mem::replace(&mut seen[t], true) {
                return Err(TowerError::NotIsomorphism(format!(
                    "element {t} is out of range or hit twice"
                )));
            }
        }
        // Additivity on all of Q^ follows from additivity against generators.
        for j in 0..group.rank() {
            let mut coords = vec![0; group.rank()];
            coords[j] = 1 % group.orders()[j];
            let e = group.index_of_coords(&coords);
            for xi in 0..n {
                let lhs = table[group.add_index(xi, e)];
                let rhs = group.add_index(table[xi], table[e]);
                if lhs != rhs {
                    return Err(TowerError::NotIsomorphism(format!(
                        "alpha({xi} + {e}) != alpha({xi}) + alpha({e})"
                    )));
                }
            }
        }
        Ok(Self {
            group: group.clone(),
            table,
        })
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    /// `alpha(xi)` as an element index.
    pub fn apply(&self, xi: usize) -> usize {
        self.table[xi]
    }

    /// The adjoint `alpha*`, defined by `<xi1, alpha(xi2)> = <alpha*(xi1), xi2>`.
    pub fn adjoint(&self) -> Self {
        let g = &self.group;
        let l = g.exponent();
        let gens: Vec<Vec<usize>> = (0..g.rank())
            .map(|j| {
                let mut coords = vec![0; g.rank()];
                coords[j] = 1 % g.orders()[j];
                g.coords_at(self.table[g.index_of_coords(&coords)])
            })
            .collect();
        let table = (0..g.cardinality())
            .map(|xi| {
                let xi_coords = g.coords_at(xi);
                // <e_j, s> = e^{2 pi i s_j / n_j}, so s_j is the phase of
                // <xi, alpha(e_j)> measured in units of 1/n_j.
                let coords: Vec<usize> = gens
                    .iter()
                    .zip(g.orders())
                    .map(|(a, &n)| {
                        let num = g.pairing_numerator(&xi_coords, a);
                        ((num as u128 * n as u128) / l as u128) as usize
                    })
                    .collect();
                g.index_of_coords(&coords)
            })
            .collect();
        Self {
            group: g.clone(),
            table,
        }
    }
}

/// `(R_alpha psi)(xi) = psi(alpha(xi)) |Q|^{-1/2}`, a function on the dual.
pub fn r_alpha(
    alpha: &DualIsomorphism,
    psi: &VectorFunction,
) -> Result<VectorFunction, TowerError> {
    let g = alpha.group();
    if psi.group() != g {
        return Err(crate::function::FunctionError::GroupMismatch {
            left: g.to_string(),
            right: psi.group().to_string(),
        }
        .into());
    }
    let d = psi.dim();
    let w = g.haar_weight();
    let mut values = Vec::with_capacity(psi.values().len());
    for xi in 0..g.cardinality() {
        values.extend(psi.at(alpha.apply(xi)).iter().map(|z| z * w));
    }
    Ok(VectorFunction::from_flat(g, d, values)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugationReport {
    /// `R_{alpha*} F_{Q^} R_alpha psi`.
    #[serde(skip)]
    pub via_ralpha: VectorFunction,
    /// `F_Q psi`.
    #[serde(skip)]
    pub direct: VectorFunction,
    /// Largest entry of the difference, relative to the largest entry of `F_Q psi`.
    pub conjugation_residual: f64,
    /// `| ||R_alpha psi||_{L2(Q^)} - ||psi||_{L2(Q)} |` relative to `||psi||`.
    pub isometry_residual: f64,
    pub holds: bool,
}

/// Evaluates both sides of `R_{alpha*} F_{Q^} R_alpha psi = F_Q psi`. The
/// direct side uses the defining sum, the conjugated side the fast transform.
pub fn ralpha_conjugation(
    alpha: &DualIsomorphism,
    psi: &VectorFunction,
    spec: &NormSpec,
) -> Result<ConjugationReport, TowerError> {
    let g = alpha.group();
    let n = g.cardinality() as f64;
    let rpsi = r_alpha(alpha, psi)?;

    // Counting measure on Q^: F_{Q^} = sqrt|Q| * dft.
    let mut transformed = TransformPlan::fast(g)
        .dft(&rpsi)
        .map_err(|e| TowerError::NotIsomorphism(e.to_string()))?;
    transformed.scale(n.sqrt());
    let via_ralpha = r_alpha(&alpha.adjoint(), &transformed)?;

    // Probability measure on Q: F_Q = |Q|^{-1/2} * dft.
    let mut direct = TransformPlan::naive(g)
        .dft(psi)
        .map_err(|e| TowerError::NotIsomorphism(e.to_string()))?;
    direct.scale(n.sqrt().recip());

    let scale = direct.max_abs().max(f64::MIN_POSITIVE);
    let conjugation_residual = via_ralpha.max_abs_diff(&direct)? / scale;
    let lhs = rpsi.l2_norm_with(spec, Measure::Counting)?;
    let rhs = psi.l2_norm_with(spec, Measure::Probability)?;
    let isometry_residual = (lhs - rhs).abs() / rhs.max(f64::MIN_POSITIVE);
    Ok(ConjugationReport {
        via_ralpha,
        direct,
        conjugation_residual,
        isometry_residual,
        holds: conjugation_residual <= EXACT_TOLERANCE && isometry_residual <= EXACT_TOLERANCE,
    })
}
