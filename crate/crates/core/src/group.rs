//! Finite abelian groups in product-of-cyclic form, their Pontryagin duals,
//! subgroups, cosets and annihilators.
//!
//! A group `Z/n_1 x ... x Z/n_r` is stored by its factor orders. Elements and
//! characters are residue tuples; both are also addressed by a flat index,
//! row-major over the factors in declaration order (the last factor varies
//! fastest). Every dense array in the crate uses this indexing.
//!
//! The dual group has the same orders and the pairing is
//! `<xi, t> = exp(2 pi i sum_j xi_j t_j / n_j)`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Largest group cardinality accepted unless overridden.
pub const DEFAULT_CARDINALITY_CAP: usize = 1 << 20;

/// Environment variable that overrides [`DEFAULT_CARDINALITY_CAP`].
pub const CAP_ENV_VAR: &str = "LAB_GROUP_CAP";

/// The cardinality cap in effect: `LAB_GROUP_CAP` if set and parseable,
/// otherwise [`DEFAULT_CARDINALITY_CAP`].
pub fn cardinality_cap() -> usize {
    std::env::var(CAP_ENV_VAR)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&cap| cap >= 1)
        .unwrap_or(DEFAULT_CARDINALITY_CAP)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroupError {
    #[error("a group needs at least one cyclic factor")]
    NoFactors,
    #[error("cyclic factor {index} has order 0; orders must be >= 1")]
    ZeroOrder { index: usize },
    #[error("group cardinality exceeds the cap of {cap} elements")]
    OverCap { cap: usize },
    #[error("expected {expected} coordinates, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("coordinate {index} = {value} is out of range for Z/{order}")]
    OutOfRange {
        index: usize,
        value: usize,
        order: usize,
    },
    #[error("subgroup belongs to a group with orders {found:?}, expected {expected:?}")]
    ForeignSubgroup {
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error("element set is not closed under the group operation")]
    NotClosed,
    #[error("invalid group spec {spec:?}: {reason}")]
    Parse { spec: String, reason: String },
}

/// `e^{2 pi i k / n}` with exact values at quarter turns.
pub fn root_of_unity(k: u64, n: u64) -> Complex64 {
    debug_assert!(n > 0);
    let k = k % n;
    if (4 * k).is_multiple_of(n) {
        return match 4 * k / n {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    // Reduce to (-1/2, 1/2] of a turn before scaling.
    let signed = if 2 * k > n {
        k as f64 - n as f64
    } else {
        k as f64
    };
    let (s, c) = (std::f64::consts::TAU * signed / n as f64).sin_cos();
    Complex64::new(c, s)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct FiniteAbelianGroup {
    orders: Vec<usize>,
    cardinality: usize,
    exponent: u64,
}

impl TryFrom<Vec<usize>> for FiniteAbelianGroup {
    type Error = GroupError;

    fn try_from(orders: Vec<usize>) -> Result<Self, GroupError> {
        FiniteAbelianGroup::with_cap(orders, cardinality_cap())
    }
}

impl From<FiniteAbelianGroup> for Vec<usize> {
    fn from(group: FiniteAbelianGroup) -> Self {
        group.orders
    }
}

impl FiniteAbelianGroup {
    /// Builds `Z/n_1 x ... x Z/n_r` under the cap from [`cardinality_cap`].
    pub fn new(orders: Vec<usize>) -> Result<Self, GroupError> {
        Self::with_cap(orders, cardinality_cap())
    }

    pub fn with_cap(orders: Vec<usize>, cap: usize) -> Result<Self, GroupError> {
        if orders.is_empty() {
            return Err(GroupError::NoFactors);
        }
        let mut cardinality = 1usize;
        let mut exponent = 1u64;
        for (index, &n) in orders.iter().enumerate() {
            if n == 0 {
                return Err(GroupError::ZeroOrder { index });
            }
            cardinality = cardinality
                .checked_mul(n)
                .filter(|&c| c <= cap)
                .ok_or(GroupError::OverCap { cap })?;
            let n = n as u64;
            exponent = exponent / gcd(exponent, n) * n;
        }
        Ok(Self {
            orders,
            cardinality,
            exponent,
        })
    }

    pub fn cyclic(n: usize) -> Result<Self, GroupError> {
        Self::new(vec![n])
    }

    pub fn trivial() -> Self {
        Self {
            orders: vec![1],
            cardinality: 1,
            exponent: 1,
        }
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    /// Least common multiple of the factor orders.
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    /// Self-dual Haar weight of a single point, `|G|^{-1/2}`.
    pub fn haar_weight(&self) -> f64 {
        (self.cardinality as f64).sqrt().recip()
    }

    /// Self-dual Haar measure of the whole group, `|G|^{1/2}`.
    pub fn total_measure(&self) -> f64 {
        self.haar_weight() * self.cardinality as f64
    }

    /// The dual group. It has the same orders; characters and elements are
    /// identified through their residue coordinates.
    pub fn dual(&self) -> Self {
        self.clone()
    }

    /// Direct product `self x other`, factors concatenated.
    pub fn product(&self, other: &Self) -> Result<Self, GroupError> {
        let mut orders = self.orders.clone();
        orders.extend_from_slice(&other.orders);
        Self::new(orders)
    }

    fn check_coords(&self, coords: &[usize]) -> Result<(), GroupError> {
        if coords.len() != self.orders.len() {
            return Err(GroupError::ShapeMismatch {
                expected: self.orders.len(),
                got: coords.len(),
            });
        }
        for (index, (&value, &order)) in coords.iter().zip(&self.orders).enumerate() {
            if value >= order {
                return Err(GroupError::OutOfRange {
                    index,
                    value,
                    order,
                });
            }
        }
        Ok(())
    }

    pub fn element(&self, coords: Vec<usize>) -> Result<GroupElement, GroupError> {
        self.check_coords(&coords)?;
        Ok(GroupElement(coords))
    }

    /// Element from arbitrary integer coordinates, reduced modulo each order.
    pub fn element_mod(&self, coords: &[i64]) -> Result<GroupElement, GroupError> {
        if coords.len() != self.orders.len() {
            return Err(GroupError::ShapeMismatch {
                expected: self.orders.len(),
                got: coords.len(),
            });
        }
        Ok(GroupElement(
            coords
                .iter()
                .zip(&self.orders)
                .map(|(&c, &n)| c.rem_euclid(n as i64) as usize)
                .collect(),
        ))
    }

    pub fn character(&self, coords: Vec<usize>) -> Result<Character, GroupError> {
        self.check_coords(&coords)?;
        Ok(Character(coords))
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement(vec![0; self.orders.len()])
    }

    pub fn contains(&self, t: &GroupElement) -> bool {
        self.check_coords(&t.0).is_ok()
    }

    /// Row-major index of a residue tuple.
    pub fn index_of_coords(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .zip(&self.orders)
            .fold(0, |acc, (&c, &n)| acc * n + c)
    }

    pub fn index_of(&self, t: &GroupElement) -> usize {
        self.index_of_coords(&t.0)
    }

    pub fn character_index(&self, xi: &Character) -> usize {
        self.index_of_coords(&xi.0)
    }

    pub fn coords_at(&self, mut index: usize) -> Vec<usize> {
        debug_assert!(index < self.cardinality);
        let mut coords = vec![0; self.orders.len()];
        for (c, &n) in coords.iter_mut().zip(&self.orders).rev() {
            *c = index % n;
            index /= n;
        }
        coords
    }

    pub fn element_at(&self, index: usize) -> GroupElement {
        GroupElement(self.coords_at(index))
    }

    pub fn character_at(&self, index: usize) -> Character {
        Character(self.coords_at(index))
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.cardinality).map(|i| self.element_at(i))
    }

    pub fn characters(&self) -> impl Iterator<Item = Character> + '_ {
        (0..self.cardinality).map(|i| self.character_at(i))
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        GroupElement(
            a.0.iter()
                .zip(&b.0)
                .zip(&self.orders)
                .map(|((&x, &y), &n)| (x + y) % n)
                .collect(),
        )
    }

    pub fn neg(&self, a: &GroupElement) -> GroupElement {
        GroupElement(
            a.0.iter()
                .zip(&self.orders)
                .map(|(&x, &n)| (n - x) % n)
                .collect(),
        )
    }

    /// Index of `a + b` given the indices of `a` and `b`.
    pub fn add_index(&self, a: usize, b: usize) -> usize {
        let mut out = 0;
        let mut stride = 1;
        let (mut a, mut b) = (a, b);
        for &n in self.orders.iter().rev() {
            out += ((a % n + b % n) % n) * stride;
            stride *= n;
            a /= n;
            b /= n;
        }
        out
    }

    /// Index of `-a` given the index of `a`.
    pub fn neg_index(&self, a: usize) -> usize {
        let mut out = 0;
        let mut stride = 1;
        let mut a = a;
        for &n in self.orders.iter().rev() {
            out += ((n - a % n) % n) * stride;
            stride *= n;
            a /= n;
        }
        out
    }

    /// Phase numerator `k` of the pairing, `<xi, t> = e^{2 pi i k / exponent}`.
    ///
    /// Both arguments are residue tuples of this group (not validated).
    pub fn pairing_numerator(&self, xi: &[usize], t: &[usize]) -> u64 {
        let l = self.exponent as u128;
        let mut acc: u128 = 0;
        for ((&x, &y), &n) in xi.iter().zip(t).zip(&self.orders) {
            let scale = l / n as u128;
            acc = (acc + ((x * y) % n) as u128 * scale) % l;
        }
        acc as u64
    }

    /// The canonical pairing `<xi, t>`, a point on the unit circle.
    pub fn pairing(&self, xi: &Character, t: &GroupElement) -> Result<Complex64, GroupError> {
        self.check_coords(&xi.0)?;
        self.check_coords(&t.0)?;
        Ok(root_of_unity(
            self.pairing_numerator(&xi.0, &t.0),
            self.exponent,
        ))
    }

    /// Coset id of every element (indexed by element index), together with
    /// the number of cosets. Coset ids are assigned in order of their
    /// smallest element.
    pub fn coset_labels(&self, k: &Subgroup) -> Result<(Vec<usize>, usize), GroupError> {
        self.check_parent(k)?;
        const UNSET: usize = usize::MAX;
        let mut labels = vec![UNSET; self.cardinality];
        let mut next = 0;
        for t in 0..self.cardinality {
            if labels[t] != UNSET {
                continue;
            }
            for &s in &k.elements {
                labels[self.add_index(t, s)] = next;
            }
            next += 1;
        }
        Ok((labels, next))
    }

    /// Partition of the group into cosets of `k`, ordered by smallest element.
    /// The first coset is `k` itself.
    pub fn cosets(&self, k: &Subgroup) -> Result<Vec<Vec<GroupElement>>, GroupError> {
        let (labels, count) = self.coset_labels(k)?;
        let mut out = vec![Vec::with_capacity(k.len()); count];
        for (t, &label) in labels.iter().enumerate() {
            out[label].push(self.element_at(t));
        }
        Ok(out)
    }

    /// `K^perp = { xi : <xi, g> = 1 for all g in K }`, as a subgroup of the
    /// dual group.
    pub fn annihilator(&self, k: &Subgroup) -> Result<Subgroup, GroupError> {
        self.check_parent(k)?;
        let gens: Vec<Vec<usize>> = k.generators().iter().map(|&g| self.coords_at(g)).collect();
        let elements = (0..self.cardinality)
            .filter(|&xi| {
                let xi = self.coords_at(xi);
                gens.iter().all(|g| self.pairing_numerator(&xi, g) == 0)
            })
            .collect();
        Ok(Subgroup {
            parent: self.dual(),
            elements,
        })
    }

    fn check_parent(&self, k: &Subgroup) -> Result<(), GroupError> {
        if k.parent.orders != self.orders {
            return Err(GroupError::ForeignSubgroup {
                expected: self.orders.clone(),
                found: k.parent.orders.clone(),
            });
        }
        Ok(())
    }

    /// Parses a generator list: `"(1,0),(0,2)"`, or `"2,3"` for a cyclic group.
    pub fn parse_generators(&self, spec: &str) -> Result<Vec<GroupElement>, GroupError> {
        let err = |reason: &str| GroupError::Parse {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        let spec_trim = spec.trim();
        if spec_trim.is_empty() {
            return Ok(Vec::new());
        }
        let tuples: Vec<Vec<&str>> = if spec_trim.contains('(') {
            let mut out = Vec::new();
            let mut rest = spec_trim;
            while !rest.is_empty() {
                rest = rest.trim_start_matches([',', ' ']);
                if rest.is_empty() {
                    break;
                }
                let body = rest.strip_prefix('(').ok_or_else(|| err("expected '('"))?;
                let close = body.find(')').ok_or_else(|| err("unclosed '('"))?;
                out.push(body[..close].split(',').collect());
                rest = &body[close + 1..];
            }
            out
        } else {
            spec_trim.split(',').map(|c| vec![c]).collect()
        };
        tuples
            .into_iter()
            .map(|tuple| {
                let coords = tuple
                    .iter()
                    .map(|c| c.trim().parse::<i64>().map_err(|_| err("bad coordinate")))
                    .collect::<Result<Vec<_>, _>>()?;
                self.element_mod(&coords)
            })
            .collect()
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.orders.iter().enumerate() {
            if i > 0 {
                f.write_str("x")?;
            }
            write!(f, "Z{n}")?;
        }
        Ok(())
    }
}

impl FromStr for FiniteAbelianGroup {
    type Err = GroupError;

    /// Parses `"Z4xZ2xZ3"` (factors separated by `x`, each `Z<n>` or `Z/<n>`).
    fn from_str(s: &str) -> Result<Self, GroupError> {
        let err = |reason: String| GroupError::Parse {
            spec: s.to_string(),
            reason,
        };
        let trimmed = s.trim();
        if trimmed.is_empty() {
            return Err(err("empty spec".into()));
        }
        let orders = trimmed
            .split(['x', 'X', '*'])
            .map(|factor| {
                let factor = factor.trim();
                let digits = factor
                    .strip_prefix('Z')
                    .or_else(|| factor.strip_prefix('z'))
                    .ok_or_else(|| err(format!("factor {factor:?} must start with 'Z'")))?;
                let digits = digits.strip_prefix('/').unwrap_or(digits);
                digits
                    .parse::<usize>()
                    .map_err(|_| err(format!("factor {factor:?} has no valid order")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(orders)
    }
}

/// An element of a finite abelian group, as a residue tuple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElement(pub(crate) Vec<usize>);

impl GroupElement {
    pub fn coords(&self) -> &[usize] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

/// A character of a finite abelian group, as a residue tuple of the dual.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Character(pub(crate) Vec<usize>);

impl Character {
    pub fn coords(&self) -> &[usize] {
        &self.0
    }

    pub fn is_trivial(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// The group element with the same coordinates (the fixed identification
    /// of the dual with the group).
    pub fn to_element(&self) -> GroupElement {
        GroupElement(self.0.clone())
    }
}

impl From<GroupElement> for Character {
    fn from(t: GroupElement) -> Self {
        Character(t.0)
    }
}

/// A subgroup stored by its sorted element indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    parent: FiniteAbelianGroup,
    elements: Vec<usize>,
}

impl Subgroup {
    pub fn trivial(parent: &FiniteAbelianGroup) -> Self {
        Self {
            parent: parent.clone(),
            elements: vec![0],
        }
    }

    pub fn whole(parent: &FiniteAbelianGroup) -> Self {
        Self {
            parent: parent.clone(),
            elements: (0..parent.cardinality()).collect(),
        }
    }

    /// Smallest subgroup containing `gens`, by closure iteration.
    pub fn generated_by(
        parent: &FiniteAbelianGroup,
        gens: &[GroupElement],
    ) -> Result<Self, GroupError> {
        let mut indices = Vec::with_capacity(gens.len());
        for g in gens {
            parent.check_coords(&g.0)?;
            indices.push(parent.index_of(g));
        }
        let mut members = vec![false; parent.cardinality()];
        let elements =
            closure(parent, &indices, &mut members, None).expect("unbounded closure cannot fail");
        Ok(Self {
            parent: parent.clone(),
            elements,
        })
    }

    /// Validates an explicit element set.
    pub fn from_elements(
        parent: &FiniteAbelianGroup,
        elements: &[GroupElement],
    ) -> Result<Self, GroupError> {
        let mut allowed = vec![false; parent.cardinality()];
        for e in elements {
            parent.check_coords(&e.0)?;
            allowed[parent.index_of(e)] = true;
        }
        let mut members = vec![false; parent.cardinality()];
        let mut span = vec![0usize];
        members[0] = true;
        let mut gens = Vec::new();
        for (i, &ok) in allowed.iter().enumerate() {
            if ok && !members[i] {
                gens.push(i);
                span = closure(parent, &gens, &mut members, Some(&allowed))
                    .ok_or(GroupError::NotClosed)?;
            }
        }
        let count = allowed.iter().filter(|&&a| a).count();
        if span.len() != count {
            // The identity was missing from the set.
            return Err(GroupError::NotClosed);
        }
        Ok(Self {
            parent: parent.clone(),
            elements: span,
        })
    }

    pub fn parent(&self) -> &FiniteAbelianGroup {
        &self.parent
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Sorted element indices.
    pub fn indices(&self) -> &[usize] {
        &self.elements
    }

    pub fn elements(&self) -> Vec<GroupElement> {
        self.elements
            .iter()
            .map(|&i| self.parent.element_at(i))
            .collect()
    }

    pub fn contains_index(&self, index: usize) -> bool {
        self.elements.binary_search(&index).is_ok()
    }

    pub fn contains(&self, t: &GroupElement) -> bool {
        self.parent.contains(t) && self.contains_index(self.parent.index_of(t))
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.parent == other.parent && self.elements.iter().all(|&i| other.contains_index(i))
    }

    /// A small generating set, chosen greedily in index order.
    pub fn generators(&self) -> Vec<usize> {
        let mut members = vec![false; self.parent.cardinality()];
        members[0] = true;
        let mut gens = Vec::new();
        for &i in &self.elements {
            if !members[i] {
                gens.push(i);
                closure(&self.parent, &gens, &mut members, None);
            }
        }
        gens
    }
}

/// Closure of `{0} + <gens>` marking members in place. Returns the sorted
/// member list, or `None` if a member falls outside `allowed`.
fn closure(
    group: &FiniteAbelianGroup,
    gens: &[usize],
    members: &mut [bool],
    allowed: Option<&[bool]>,
) -> Option<Vec<usize>> {
    members[0] = true;
    let mut frontier: Vec<usize> = members
        .iter()
        .enumerate()
        .filter_map(|(i, &m)| m.then_some(i))
        .collect();
    let mut all: BTreeSet<usize> = frontier.iter().copied().collect();
    while let Some(t) = frontier.pop() {
        for &g in gens {
            let s = group.add_index(t, g);
            if !members[s] {
                if allowed.is_some_and(|a| !a[s]) {
                    return None;
                }
                members[s] = true;
                all.insert(s);
                frontier.push(s);
            }
        }
    }
    Some(all.into_iter().collect())
}
