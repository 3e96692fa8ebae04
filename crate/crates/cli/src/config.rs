use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use dirac_core::bvp::{Order, FIRST_ORDER_CASES, SECOND_ORDER_CASES};
use dirac_core::catalog::{BOREL_POMPEIU_FIELDS, FIELD_NAMES};
use dirac_core::mesh::{boundary_resolution_for, default_resolution};
use dirac_core::norms::NormSpec;
use dirac_core::{DomainTag, TransformConfig};
use serde::{Deserialize, Serialize};

/// Environment variable that overrides the output directory of a config file.
pub const OUT_DIR_ENV: &str = "DIRAC_LAB_OUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    VerifyAlgebra,
    BorelPompeiu,
    Solve,
    Norm,
    EstimateConstants,
    Convergence,
}

impl Experiment {
    pub const ALL: &'static [&'static str] =
        &["verify-algebra", "borel-pompeiu", "solve", "norm", "estimate-constants", "convergence"];

    pub fn name(self) -> &'static str {
        Self::ALL[self as usize]
    }
}

/// A usage error: bad flags or a config that fails validation.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(UsageError(msg.into()).into())
}

/// Everything an experiment needs. Optional entries are filled in by
/// [`ExperimentConfig::resolve`], and reports always carry the resolved form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub domain: DomainTag,
    /// Spatial dimension; fixed at 2 for the disk and 3 for the ball.
    pub dim: Option<usize>,
    pub resolution: Option<usize>,
    pub boundary_resolution: Option<usize>,
    /// Refinement levels of a convergence study, strictly increasing.
    pub resolutions: Vec<usize>,
    /// What a convergence study refines: `borel-pompeiu` or `solve`.
    pub study: Experiment,
    /// Manufactured fields of the Borel–Pompeiu experiment.
    pub fields: Vec<String>,
    /// Field whose norm the `norm` experiment computes.
    pub field: String,
    /// Manufactured case of the `solve` experiment.
    pub case: String,
    pub order: u8,
    pub k: usize,
    pub p: f64,
    pub norm: NormSpec,
    /// Algebra dimension for `verify-algebra`.
    pub n: usize,
    /// Interior sample points and their distance from the boundary.
    pub points: usize,
    pub margin: f64,
    pub family: String,
    pub count: usize,
    /// Measure the Hölder embedding form of the estimate.
    pub holder: bool,
    pub holder_pairs: usize,
    pub norm_resolution: usize,
    /// Attach an estimate report to `solve`; defaults to on for first order.
    pub estimate: Option<bool>,
    pub seed: u64,
    pub transform: TransformConfig,
    pub out_dir: PathBuf,
    pub dump_mesh: bool,
    pub dump_field: bool,
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: Experiment::VerifyAlgebra,
            domain: DomainTag::Disk,
            dim: None,
            resolution: None,
            boundary_resolution: None,
            resolutions: vec![32, 64, 128],
            study: Experiment::BorelPompeiu,
            fields: BOREL_POMPEIU_FIELDS.iter().map(|s| s.to_string()).collect(),
            field: "quadratic_mixed".into(),
            case: "quadratic_mixed".into(),
            order: 1,
            k: 1,
            p: 2.0,
            norm: NormSpec::Sobolev { k: 1, p: 2.0 },
            n: 2,
            points: 20,
            margin: 0.1,
            family: "random".into(),
            count: 10,
            holder: false,
            holder_pairs: 10_000,
            norm_resolution: 32,
            estimate: None,
            seed: 42,
            transform: TransformConfig::default(),
            out_dir: PathBuf::from("out"),
            dump_mesh: false,
            dump_field: false,
            threads: None,
        }
    }
}

impl ExperimentConfig {
    /// Parses a JSON config; errors name the line and the offending field.
    pub fn from_json(text: &str, origin: &str) -> anyhow::Result<Self> {
        serde_json::from_str(text).map_err(|e| UsageError(format!("{origin}: {e}")).into())
    }

    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))
            .map_err(|e| UsageError(format!("{e:#}")))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn dim(&self) -> usize {
        self.dim.unwrap_or(match self.domain {
            DomainTag::Ball => 3,
            _ => 2,
        })
    }

    pub fn order(&self) -> Order {
        Order::from_number(self.order).unwrap_or(Order::First)
    }

    /// Fills every optional entry and checks the result.
    pub fn resolve(mut self) -> anyhow::Result<Self> {
        let dim = self.dim();
        self.dim = Some(dim);
        let res = *self.resolution.get_or_insert(default_resolution(dim));
        self.boundary_resolution.get_or_insert(boundary_resolution_for(self.domain, res));
        self.estimate.get_or_insert(self.order == 1);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let dim = self.dim();
        match (self.domain, dim) {
            (DomainTag::Disk, 2) | (DomainTag::Ball, 3) => {}
            (DomainTag::Box, 2 | 3) => {}
            (tag, d) => return usage(format!("dim: {d} is not valid for domain '{}'", tag.name())),
        }
        if self.resolution == Some(0) || self.boundary_resolution == Some(0) {
            return usage("resolution: must be positive");
        }
        if self.order != 1 && self.order != 2 {
            return usage(format!("order: {} is not 1 or 2", self.order));
        }
        if !(self.p > 1.0) {
            return usage(format!("p: {} must exceed 1", self.p));
        }
        if !(self.margin > 0.0 && self.margin < 0.5) {
            return usage(format!("margin: {} must lie in (0, 0.5)", self.margin));
        }
        if self.points == 0 {
            return usage("points: must be positive");
        }
        if !(1..=12).contains(&self.n) {
            return usage(format!("n: {} outside 1..=12", self.n));
        }
        if let Some(f) = self.fields.iter().find(|f| !FIELD_NAMES.contains(&f.as_str())) {
            return usage(format!("fields: unknown field '{f}'; valid names: {}", FIELD_NAMES.join(", ")));
        }
        if !FIELD_NAMES.contains(&self.field.as_str()) {
            return usage(format!("field: unknown field '{}'; valid names: {}", self.field, FIELD_NAMES.join(", ")));
        }
        let cases = if self.order == 2 { SECOND_ORDER_CASES } else { FIRST_ORDER_CASES };
        if self.experiment == Experiment::Solve || self.study == Experiment::Solve {
            if !cases.contains(&self.case.as_str()) {
                return usage(format!("case: unknown case '{}' for order {}; valid names: {}", self.case, self.order, cases.join(", ")));
            }
        }
        if self.family != "random" {
            return usage(format!("family: unknown family '{}'; valid names: random", self.family));
        }
        if self.count == 0 {
            return usage("count: must be positive");
        }
        if self.norm_resolution == 0 {
            return usage("norm_resolution: must be positive");
        }
        if self.threads == Some(0) {
            return usage("threads: must be positive");
        }
        if let Err(e) = self.norm.validate() {
            return usage(format!("norm: {e}"));
        }
        if let Err(e) = self.transform.validate() {
            return usage(format!("transform: {e}"));
        }
        if self.experiment == Experiment::Convergence {
            if !matches!(self.study, Experiment::BorelPompeiu | Experiment::Solve) {
                return usage(format!("study: '{}' cannot be refined; valid names: borel-pompeiu, solve", self.study.name()));
            }
            if self.resolutions.len() < 2 {
                return usage("resolutions: a convergence study needs at least two levels");
            }
            if self.resolutions.windows(2).any(|w| w[0] >= w[1]) || self.resolutions[0] == 0 {
                return usage("resolutions: must be positive and strictly increasing");
            }
        }
        Ok(())
    }
}

/// Parses `32,64,128`.
pub fn parse_list(s: &str) -> anyhow::Result<Vec<usize>> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().with_context(|| format!("'{t}' is not a positive integer")))
        .collect::<anyhow::Result<Vec<_>>>()
        .or_else(|e| usage(format!("resolutions: {e:#}")))
}

pub fn parse_experiment(s: &str) -> anyhow::Result<Experiment> {
    match Experiment::ALL.iter().position(|e| *e == s) {
        Some(i) => Ok(serde_json::from_value(serde_json::Value::String(Experiment::ALL[i].into()))?),
        None => bail!(UsageError(format!("unknown experiment '{s}'; valid names: {}", Experiment::ALL.join(", ")))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_field_is_named() {
        let err = ExperimentConfig::from_json("{\n  \"experiment\": \"solve\",\n  \"resolutoin\": 3\n}", "cfg.json").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("resolutoin") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn resolve_fills_defaults() {
        let cfg = ExperimentConfig { experiment: Experiment::Solve, ..Default::default() }.resolve().unwrap();
        assert_eq!((cfg.dim, cfg.resolution, cfg.boundary_resolution, cfg.estimate), (Some(2), Some(64), Some(256), Some(true)));
    }

    #[test]
    fn resolutions_must_increase() {
        let cfg = ExperimentConfig { experiment: Experiment::Convergence, resolutions: vec![64, 32], ..Default::default() };
        assert!(cfg.resolve().unwrap_err().to_string().starts_with("resolutions"));
    }

    #[test]
    fn experiment_names_round_trip() {
        for name in Experiment::ALL {
            assert_eq!(parse_experiment(name).unwrap().name(), *name);
        }
        assert!(parse_experiment("nope").is_err());
    }
}
