use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    character_system_ratio, hilbertness_probe, khinchin_estimate, operator_norm_lower,
    rademacher_ratio, standard_vectors, torus_adaptive, Budget, ConstantEstimate, ConstantName,
    ConstantsError, Method, Witness,
};
use crate::group::FiniteAbelianGroup;
use crate::norms::{NormSpec, XVector};
use crate::tower::{
    block_approximation, transfer_inequality_check, OrthonormalSystem, SystemOrdering, Tower,
};

/// Relative agreement of successive torus rules.
const TORUS_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    #[serde(alias = "opnorm")]
    OperatorNorm,
    Khinchin,
    /// Random search for the two-sided Khinchin constant.
    Probe,
    #[serde(alias = "charsys")]
    CharacterSystem,
    Torus,
    Transfer,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::OperatorNorm => "opnorm",
            Experiment::Khinchin => "khinchin",
            Experiment::Probe => "probe",
            Experiment::CharacterSystem => "charsys",
            Experiment::Torus => "torus",
            Experiment::Transfer => "transfer",
        }
    }
}

/// One member of a sweep family.
#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub group: Option<FiniteAbelianGroup>,
    pub norm: NormSpec,
    /// Torus degree `n`.
    pub degree: Option<usize>,
    /// Tower depth for transfer experiments (base 2).
    pub depth: Option<u32>,
}

impl Member {
    pub fn new(group: Option<FiniteAbelianGroup>, norm: NormSpec) -> Self {
        Self {
            group,
            norm,
            degree: None,
            depth: None,
        }
    }
}

/// Settings shared by every member of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub budget: Budget,
    pub seed: u64,
    /// Overrides the default standard-basis families.
    pub vectors: Option<Vec<XVector>>,
    pub eps: f64,
    pub ordering: SystemOrdering,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            budget: Budget::default(),
            seed: 0,
            vectors: None,
            eps: 0.01,
            ordering: SystemOrdering::Walsh,
        }
    }
}

fn require<T: Clone>(
    value: &Option<T>,
    experiment: Experiment,
    field: &'static str,
) -> Result<T, ConstantsError> {
    value.clone().ok_or(ConstantsError::MissingField {
        experiment: experiment.as_str(),
        field,
    })
}

fn family(options: &SweepOptions, dim: usize, n: usize) -> Vec<XVector> {
    options
        .vectors
        .clone()
        .unwrap_or_else(|| standard_vectors(dim, n))
}

/// Runs `experiment` for one family member.
pub fn run_member(
    experiment: Experiment,
    member: &Member,
    options: &SweepOptions,
) -> Result<ConstantEstimate, ConstantsError> {
    let spec = &member.norm;
    let d = spec.dim();
    let seed = options.seed;
    match experiment {
        Experiment::OperatorNorm => {
            let group = require(&member.group, experiment, "group")?;
            operator_norm_lower(&group, spec, &options.budget, seed)
        }
        Experiment::Khinchin => {
            let xs = family(options, d, d);
            khinchin_estimate(spec, &xs, options.budget.samples, seed)
        }
        Experiment::Probe => Ok(hilbertness_probe(spec, &options.budget, seed)?.estimate(spec)),
        Experiment::CharacterSystem => {
            let group = require(&member.group, experiment, "group")?;
            let xs = family(options, d, d);
            let characters: Vec<_> = (0..xs.len())
                .map(|k| group.character_at(k % group.cardinality()))
                .collect();
            let r = character_system_ratio(&group, spec, &xs, &characters)?;
            let lower = r.max(r.recip());
            Ok(ConstantEstimate {
                constant: ConstantName::CharacterSystem,
                lower,
                upper: spec.hilbert_distance_bound().powi(2).max(lower),
                method: Method::ExactEnumeration,
                samples: group.cardinality() as u64,
                seed,
                std_error: None,
                witness: Witness::Characters {
                    group: group.clone(),
                    norm: spec.clone(),
                    characters: characters.iter().map(|c| c.coords().to_vec()).collect(),
                    xs,
                    two_sided: true,
                },
            })
        }
        Experiment::Torus => {
            let n = require(&member.degree, experiment, "degree")?;
            let xs = options
                .vectors
                .clone()
                .unwrap_or_else(|| (0..2 * n + 1).map(|i| XVector::basis(d, i % d)).collect());
            let result = torus_adaptive(spec, &xs, TORUS_TOLERANCE)?;
            Ok(ConstantEstimate {
                constant: ConstantName::TorusPartialSum,
                lower: result.ratio,
                upper: result.ratio,
                method: Method::Quadrature,
                samples: result.points as u64,
                seed,
                std_error: None,
                witness: Witness::Torus {
                    norm: spec.clone(),
                    xs,
                    points: result.points,
                },
            })
        }
        Experiment::Transfer => {
            let depth = require(&member.depth, experiment, "depth")?;
            let tower = Tower::new(2, depth)?;
            let xs = family(options, d, d.min(depth as usize));
            let targets: Vec<u32> = (1..=xs.len() as u32).collect();
            let system = OrthonormalSystem::ordered(&tower, options.ordering)?;
            let approx = block_approximation(&tower, &system, &targets, options.eps)?;
            let report = transfer_inequality_check(&tower, spec, &xs, &approx, None)?;
            let lower = rademacher_ratio(&tower, spec, &targets, &xs)?;
            Ok(ConstantEstimate {
                constant: ConstantName::Transfer,
                lower,
                upper: (report.eps.sqrt() + report.c.sqrt()).powi(2),
                method: Method::ExactEnumeration,
                samples: tower.size() as u64,
                seed,
                std_error: None,
                witness: Witness::Rademacher {
                    base: 2,
                    depth,
                    norm: spec.clone(),
                    targets,
                    xs,
                },
            })
        }
    }
}

/// One estimate per member, in member order. Members run in parallel and
/// share the seed.
pub fn scaling_sweep(
    experiment: Experiment,
    members: &[Member],
    options: &SweepOptions,
) -> Result<Vec<ConstantEstimate>, ConstantsError> {
    members
        .par_iter()
        .map(|m| run_member(experiment, m, options))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_budget() -> SweepOptions {
        SweepOptions {
            budget: Budget {
                iterations: 100,
                restarts: 4,
                samples: 100,
            },
            seed: 3,
            ..SweepOptions::default()
        }
    }

    #[test]
    fn opnorm_sweep_hilbert() {
        let members: Vec<Member> = (1..=6)
            .map(|m| {
                Member::new(
                    Some(FiniteAbelianGroup::cyclic(1 << m).unwrap()),
                    NormSpec::lp(2.0, 2).unwrap(),
                )
            })
            .collect();
        let rows = scaling_sweep(Experiment::OperatorNorm, &members, &small_budget()).unwrap();
        assert_eq!(rows.len(), 6);
        assert!(rows.iter().all(|r| r.lower >= 1.0 - 1e-6 && r.lower <= 1.0));
    }

    #[test]
    fn character_system_separates() {
        let run = |norm: &str, m: usize| {
            let group = FiniteAbelianGroup::new(vec![2; m]).unwrap();
            let spec: NormSpec = format!("{norm}:d={}", 1 << m).parse().unwrap();
            run_member(
                Experiment::CharacterSystem,
                &Member::new(Some(group), spec),
                &small_budget(),
            )
            .unwrap()
        };
        let mut previous = 1.0;
        for m in 1..=4 {
            let est = run("linf", m);
            assert!((est.lower - (1 << m) as f64).abs() < 1e-9);
            assert!(est.lower > previous);
            previous = est.lower;
            assert!((run("lp:2", m).lower - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn trivial_family() {
        let member = Member::new(
            Some(FiniteAbelianGroup::trivial()),
            NormSpec::lp(1.0, 2).unwrap(),
        );
        let rows = scaling_sweep(Experiment::OperatorNorm, &[member], &small_budget()).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].lower - 1.0).abs() < 1e-12);
        assert!(
            scaling_sweep(Experiment::OperatorNorm, &[], &small_budget())
                .unwrap()
                .is_empty()
        );
    }

    #[test]
    fn khinchin_torus_transfer_rows() {
        let l1 = NormSpec::lp(1.0, 2).unwrap();
        let opts = small_budget();
        let k = run_member(Experiment::Khinchin, &Member::new(None, l1.clone()), &opts).unwrap();
        assert_eq!(k.lower, 2.0);

        let mut member = Member::new(None, l1.clone());
        assert!(run_member(Experiment::Torus, &member, &opts).is_err());
        member.degree = Some(2);
        let t = run_member(Experiment::Torus, &member, &opts).unwrap();
        assert!(t.witness_residual().unwrap() < 1e-9);

        member.depth = Some(6);
        for ordering in [SystemOrdering::Walsh, SystemOrdering::Dyadic] {
            let opts = SweepOptions {
                ordering,
                ..opts.clone()
            };
            let row = run_member(Experiment::Transfer, &member, &opts).unwrap();
            assert!(row.lower <= row.upper);
            assert!(row.witness_residual().unwrap() < 1e-12);
        }
    }
}
