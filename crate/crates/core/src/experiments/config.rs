use std::fmt;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{
    Budget, Experiment, Member, SweepOptions, MAX_ENUMERATION, MAX_TORUS_POINTS,
};
use crate::group::{cardinality_cap, FiniteAbelianGroup};
use crate::norms::{NormSpec, XVector};
use crate::tower::{SystemOrdering, Tower};

/// A vector coordinate in a config file: a real number or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coordinate {
    Real(f64),
    Complex([f64; 2]),
}

impl From<Coordinate> for Complex64 {
    fn from(c: Coordinate) -> Self {
        match c {
            Coordinate::Real(x) => Complex64::new(x, 0.0),
            Coordinate::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    pub norm: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
}

/// Family members: the explicit `members` followed by the cartesian product
/// `groups x norms x degrees x depths` (an empty axis other than `norms`
/// contributes a single unset value).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub groups: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub norms: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub degrees: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub depths: Vec<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub members: Vec<MemberConfig>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

fn default_eps() -> f64 {
    0.01
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// A declarative sweep, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default)]
    pub ordering: SystemOrdering,
    /// Fill `runtime_ms` in the CSV; off by default so reruns are byte-identical.
    #[serde(default, skip_serializing_if = "is_false")]
    pub record_timing: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vectors: Option<Vec<Vec<Coordinate>>>,
    #[serde(default)]
    pub budget: Budget,
    #[serde(default)]
    pub family: FamilyConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// A problem in a config, with a location: `line:col` for syntax errors or
/// a field path such as `family.norms[1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigIssue {
    pub location: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

fn issue(location: impl Into<String>, message: impl fmt::Display) -> ConfigIssue {
    ConfigIssue {
        location: location.into(),
        message: message.to_string(),
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

impl SweepConfig {
    /// Parses TOML, reporting syntax and schema errors with `line:col`.
    pub fn parse(text: &str) -> Result<Self, ConfigIssue> {
        toml::from_str(text).map_err(|e| {
            let location = e
                .span()
                .map(|s| {
                    let (line, col) = line_col(text, s.start);
                    format!("{line}:{col}")
                })
                .unwrap_or_else(|| "config".into());
            issue(location, e.message())
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn options(&self) -> SweepOptions {
        SweepOptions {
            budget: self.budget,
            seed: self.seed,
            vectors: self.vectors.as_ref().map(|vs| {
                vs.iter()
                    .map(|v| XVector(v.iter().map(|&c| c.into()).collect()))
                    .collect()
            }),
            eps: self.eps,
            ordering: self.ordering,
        }
    }

    fn raw_members(&self) -> Vec<(String, MemberConfig)> {
        let f = &self.family;
        let mut out: Vec<(String, MemberConfig)> = f
            .members
            .iter()
            .enumerate()
            .map(|(i, m)| (format!("family.members[{i}]"), m.clone()))
            .collect();
        let axis = |v: &[String]| -> Vec<Option<String>> {
            if v.is_empty() {
                vec![None]
            } else {
                v.iter().cloned().map(Some).collect()
            }
        };
        let groups = axis(&f.groups);
        let degrees: Vec<Option<usize>> = if f.degrees.is_empty() {
            vec![None]
        } else {
            f.degrees.iter().copied().map(Some).collect()
        };
        let depths: Vec<Option<u32>> = if f.depths.is_empty() {
            vec![None]
        } else {
            f.depths.iter().copied().map(Some).collect()
        };
        for (gi, g) in groups.iter().enumerate() {
            for (ni, n) in f.norms.iter().enumerate() {
                for degree in &degrees {
                    for depth in &depths {
                        let location = match g {
                            Some(_) => format!("family.groups[{gi}] x family.norms[{ni}]"),
                            None => format!("family.norms[{ni}]"),
                        };
                        out.push((
                            location,
                            MemberConfig {
                                group: g.clone(),
                                norm: n.clone(),
                                degree: *degree,
                                depth: *depth,
                            },
                        ));
                    }
                }
            }
        }
        out
    }

    /// Every problem that would stop [`run_sweep`](super::run_sweep).
    pub fn issues(&self) -> Vec<ConfigIssue> {
        let mut issues = Vec::new();
        let f = &self.family;
        for (i, g) in f.groups.iter().enumerate() {
            if let Err(e) = g.parse::<FiniteAbelianGroup>() {
                issues.push(issue(format!("family.groups[{i}]"), e));
            }
        }
        for (i, n) in f.norms.iter().enumerate() {
            if let Err(e) = n.parse::<NormSpec>() {
                issues.push(issue(format!("family.norms[{i}]"), e));
            }
        }
        for (i, m) in f.members.iter().enumerate() {
            if let Some(g) = &m.group {
                if let Err(e) = g.parse::<FiniteAbelianGroup>() {
                    issues.push(issue(format!("family.members[{i}].group"), e));
                }
            }
            if let Err(e) = m.norm.parse::<NormSpec>() {
                issues.push(issue(format!("family.members[{i}].norm"), e));
            }
        }
        if !(self.eps >= 0.0) {
            issues.push(issue("eps", "must be a nonnegative number"));
        }
        let exp = self.experiment;
        if exp == Experiment::OperatorNorm {
            if self.budget.restarts == 0 {
                issues.push(issue("budget.restarts", "must be at least 1"));
            }
            if self.budget.iterations == 0 {
                issues.push(issue("budget.iterations", "must be at least 1"));
            }
        }
        let vectors = self.options().vectors;
        if let Some(vs) = &vectors {
            if vs.is_empty() {
                issues.push(issue("vectors", "must list at least one vector"));
            }
            if exp == Experiment::Khinchin && vs.len() > MAX_ENUMERATION && self.budget.samples < 2
            {
                issues.push(issue(
                    "budget.samples",
                    format!(
                        "more than {MAX_ENUMERATION} vectors need at least 2 Monte Carlo samples"
                    ),
                ));
            }
        }
        if !issues.is_empty() {
            return issues;
        }
        for (location, m) in self.raw_members() {
            let norm: NormSpec = m.norm.parse().expect("checked above");
            if let Some(vs) = &vectors {
                if let Some(k) = vs.iter().position(|v| v.dim() != norm.dim()) {
                    issues.push(issue(
                        format!("vectors[{k}]"),
                        format!(
                            "has dimension {}, {location} has dimension {}",
                            vs[k].dim(),
                            norm.dim()
                        ),
                    ));
                }
            }
            match exp {
                Experiment::OperatorNorm | Experiment::CharacterSystem if m.group.is_none() => {
                    issues.push(issue(
                        location.clone(),
                        format!("{} needs a group", exp.as_str()),
                    ));
                }
                Experiment::Torus => match m.degree {
                    None => issues.push(issue(location.clone(), "torus needs family.degrees")),
                    Some(n) => {
                        if 4 * n + 4 > MAX_TORUS_POINTS {
                            issues.push(issue(
                                location.clone(),
                                format!("degree {n} needs more than {MAX_TORUS_POINTS} quadrature points"),
                            ));
                        }
                        if let Some(vs) = &vectors {
                            if vs.len() != 2 * n + 1 {
                                issues.push(issue(
                                    "vectors",
                                    format!(
                                        "degree {n} needs {} coefficients, got {}",
                                        2 * n + 1,
                                        vs.len()
                                    ),
                                ));
                            }
                        }
                    }
                },
                Experiment::Transfer => match m.depth {
                    None => issues.push(issue(location.clone(), "transfer needs family.depths")),
                    Some(depth) => match Tower::new(2, depth) {
                        Err(e) => issues.push(issue(location.clone(), e)),
                        Ok(tower) => {
                            let n = vectors
                                .as_ref()
                                .map_or(norm.dim().min(depth as usize), Vec::len);
                            if n as u32 > tower.max_rademacher_index() {
                                issues.push(issue(
                                    location.clone(),
                                    format!("{n} Rademacher functions need depth at least {n}"),
                                ));
                            }
                        }
                    },
                },
                _ => {}
            }
            if exp == Experiment::OperatorNorm {
                if let Some(g) = &m.group {
                    let g: FiniteAbelianGroup = g.parse().expect("checked above");
                    let cap = cardinality_cap();
                    if g.cardinality().saturating_mul(norm.dim()) > cap {
                        issues.push(issue(
                            location.clone(),
                            format!("|G| * d exceeds the cap of {cap}"),
                        ));
                    }
                }
            }
        }
        issues
    }

    /// The family, in report order. Call after [`issues`](Self::issues)
    /// came back empty.
    pub fn members(&self) -> Result<Vec<Member>, ConfigIssue> {
        self.raw_members()
            .into_iter()
            .map(|(location, m)| {
                let group = m
                    .group
                    .as_deref()
                    .map(str::parse::<FiniteAbelianGroup>)
                    .transpose()
                    .map_err(|e| issue(location.clone(), e))?;
                let norm = m.norm.parse().map_err(|e| issue(location.clone(), e))?;
                Ok(Member {
                    group,
                    norm,
                    degree: m.degree,
                    depth: m.depth,
                })
            })
            .collect()
    }
}

/// Outcome of [`validate_config`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub path: PathBuf,
    pub issues: Vec<ConfigIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Reads and checks a config file. Only I/O failures are errors; problems
/// with the contents are listed in the report.
pub fn validate_config(path: &Path) -> std::io::Result<ValidationReport> {
    let text = std::fs::read_to_string(path)?;
    let issues = match SweepConfig::parse(&text) {
        Ok(config) => config.issues(),
        Err(e) => vec![e],
    };
    Ok(ValidationReport {
        path: path.to_path_buf(),
        issues,
    })
}
