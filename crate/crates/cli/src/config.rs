//! JSON experiment configs for `abplab run --config FILE`.

use crate::commands::{Command, Theorem, UKind};
use crate::error::CliError;
use crate::params::{Format, ModelKind, Params};
use abplab::EffDim;
use serde::de::{self, Deserializer};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Constants,
    Contact,
    Abp,
    Barrier,
    Doubling,
    Harnack,
    Hfun,
    Pucci,
    All,
}

/// `{"kind": "sphere", "k": 1}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub k: Option<f64>,
    pub lambda: Option<f64>,
}

fn dim<'de, D: Deserializer<'de>>(d: D) -> Result<Option<EffDim>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }
    match Option::<Raw>::deserialize(d)? {
        None => Ok(None),
        Some(Raw::Num(n)) => Ok(Some(EffDim::Finite(n))),
        Some(Raw::Text(s)) => s.parse().map(Some).map_err(de::Error::custom),
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSpec {
    #[serde(rename = "K")]
    pub big_k: Option<f64>,
    #[serde(rename = "N", default, deserialize_with = "dim")]
    pub n: Option<EffDim>,
    #[serde(rename = "R")]
    pub big_r: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub params: ParamSpec,
    pub r: Option<f64>,
    pub a: Option<f64>,
    pub resolution: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub theorem: Option<Theorem>,
    pub theta: Option<f64>,
    pub p: Option<f64>,
    pub u: Option<UKind>,
    pub b: Option<f64>,
    pub alpha: Option<f64>,
    #[serde(default)]
    pub d: Vec<f64>,
    #[serde(default)]
    pub fit: bool,
    pub dmax: Option<f64>,
    pub degree: Option<usize>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// The equivalent subcommand. Flags given on the command line win over
    /// the file.
    pub fn into_invocation(self, cli: &Params) -> (Command, Params) {
        let cmd = match self.experiment {
            Experiment::Constants => Command::Constants,
            Experiment::Contact => Command::Contact,
            Experiment::Abp => Command::AbpCheck { u: self.u.unwrap_or_default(), b: self.b.unwrap_or(1.0) },
            Experiment::Barrier => Command::BarrierCheck { alpha: self.alpha },
            Experiment::Doubling => Command::Doubling,
            Experiment::Harnack => Command::HarnackCheck { theorem: self.theorem, theta: self.theta.unwrap_or(2.0), p: self.p },
            Experiment::Hfun => Command::Hfun { d: self.d, fit: self.fit, dmax: self.dmax, degree: self.degree.unwrap_or(3) },
            Experiment::Pucci => Command::Pucci,
            Experiment::All => Command::All,
        };
        let (kind, k, lambda) = match self.model {
            Some(m) => (Some(m.kind), m.k, m.lambda),
            None => (None, None, None),
        };
        let params = Params {
            model: cli.model.or(kind),
            k: cli.k.or(k),
            lambda: cli.lambda.or(lambda),
            big_k: cli.big_k.or(self.params.big_k),
            n: cli.n.or(self.params.n),
            big_r: cli.big_r.or(self.params.big_r),
            r: cli.r.or(self.r),
            a: cli.a.or(self.a),
            resolution: cli.resolution.or(self.resolution),
            samples: cli.samples.or(self.samples),
            seed: cli.seed.or(self.seed),
            format: cli.format.or(self.format),
            out: cli.out.clone().or(self.out),
        };
        (cmd, params)
    }
}
