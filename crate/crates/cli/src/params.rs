//! Flags shared by every subcommand, also the target of `run --config`.

use crate::error::CliError;
use abplab::{CurvatureParams, EffDim, ModelSpace};
use clap::{Args, ValueEnum};
use serde::Deserialize;
use std::path::PathBuf;

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_OUT: &str = "abplab-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Euclidean,
    Sphere,
    Hyperbolic,
    #[serde(alias = "gaussian_plane")]
    Gaussian,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

fn parse_dim(s: &str) -> Result<EffDim, String> {
    s.parse::<EffDim>().map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Default, Args)]
pub struct Params {
    /// Model space.
    #[arg(long, value_enum, global = true)]
    pub model: Option<ModelKind>,
    /// Gauss curvature magnitude of the sphere or hyperbolic plane.
    #[arg(long, global = true)]
    pub k: Option<f64>,
    /// Potential coefficient of the Gaussian plane.
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// Ricci lower-bound magnitude K.
    #[arg(long = "K", global = true)]
    pub big_k: Option<f64>,
    /// Effective dimension, a real >= 2 or "inf".
    #[arg(long = "N", global = true, value_parser = parse_dim)]
    pub n: Option<EffDim>,
    /// Reference radius R.
    #[arg(long = "R", global = true)]
    pub big_r: Option<f64>,
    /// Ball radius r.
    #[arg(long, global = true)]
    pub r: Option<f64>,
    /// Paraboloid opening.
    #[arg(long, global = true)]
    pub a: Option<f64>,
    #[arg(long, global = true)]
    pub resolution: Option<usize>,
    /// Seeded samples per model.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Output directory. ABPLAB_OUT takes precedence.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl Params {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }

    pub fn out_dir(&self) -> PathBuf {
        match std::env::var_os("ABPLAB_OUT") {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        }
    }

    /// The selected model, with `k` or `lambda` defaulting to `default_k` and 1.
    pub fn model_or(&self, kind: ModelKind, default_k: f64) -> Result<ModelSpace, CliError> {
        let kind = self.model.unwrap_or(kind);
        Ok(match kind {
            ModelKind::Euclidean => ModelSpace::Euclidean,
            ModelKind::Sphere => ModelSpace::sphere(self.k.unwrap_or(default_k))?,
            ModelKind::Hyperbolic => ModelSpace::hyperbolic(self.k.unwrap_or(default_k))?,
            ModelKind::Gaussian => ModelSpace::gaussian(self.lambda.unwrap_or(1.0))?,
        })
    }

    pub fn model(&self) -> Result<Option<ModelSpace>, CliError> {
        self.model.map(|kind| self.model_or(kind, 1.0)).transpose()
    }

    /// `N`, defaulting to 4 on the Gaussian plane and 2 elsewhere.
    pub fn dim_for(&self, m: &ModelSpace) -> EffDim {
        self.n.unwrap_or(match m {
            ModelSpace::GaussianPlane { .. } => EffDim::Finite(4.0),
            _ => EffDim::Finite(2.0),
        })
    }

    /// `(K, N, R)` with `K` defaulting to the smallest bound valid on `B_reach`.
    pub fn curvature_for(&self, m: &ModelSpace, big_r: f64, reach: f64) -> Result<CurvatureParams, CliError> {
        let n = self.dim_for(m);
        let k = match self.big_k {
            Some(k) => k,
            None => m.curvature_bound(n, &m.origin(), reach)?,
        };
        Ok(CurvatureParams::new(k, n, big_r)?)
    }
}
