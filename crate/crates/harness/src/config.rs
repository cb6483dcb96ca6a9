use linkfn::{LinkFamily, LinkFunction};
use manifold::{ManifoldModel, ModelKind};
use params::{validate_practical, Mode, ParamSet, Violation};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported schema version {0}, expected {SCHEMA_VERSION}")]
    Schema(u32),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSpec {
    /// Vertex pairs compared against latent distances, per trial.
    pub pairs: usize,
    /// Probe points for the net coverage check.
    pub probes: usize,
    /// Geodesic error tolerance as a fraction of the geodesic diameter; also
    /// the distance slack of the ball-measure comparison.
    pub geodesic_tolerance: f64,
    /// Ball radii as fractions of the geodesic diameter.
    pub radius_fractions: Vec<f64>,
    /// Monte Carlo samples per kernel value in the kernel report.
    pub kernel_samples: usize,
    /// Pairs in the kernel report.
    pub kernel_pairs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcceptanceSpec {
    /// Smallest fraction of trials whose net must cover and separate.
    pub net_success: f64,
    /// Smallest fraction of pairs with Euclidean error at most `4 delta`.
    pub euclidean_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub model: ModelSpec,
    pub link: LinkFamily,
    pub params: ParamSet,
    /// Batch groups; `null` uses `ceil(n^varsigma)`.
    pub groups: Option<usize>,
    pub seed: u64,
    pub trials: usize,
    /// Accept practical sets that break the locality bounds `delta <= r_M/4`
    /// and `r <= r_M`. The ordering constraint is never waived.
    pub waive_locality: bool,
    /// Vertex count of the `generate` subcommand.
    pub generate_vertices: usize,
    pub evaluation: EvalSpec,
    pub acceptance: AcceptanceSpec,
}

/// A validated configuration with its model and link built.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub model: ManifoldModel,
    pub link: LinkFunction,
    pub params: ParamSet,
    pub groups: usize,
}

impl ExperimentConfig {
    /// The practical unit-sphere setting used by the acceptance suite.
    pub fn sphere_practical() -> Self {
        let eta = 0.35;
        let gap = 0.01;
        let delta = 0.7;
        Self {
            schema_version: SCHEMA_VERSION,
            model: ModelSpec { kind: ModelKind::Sphere2, scale: 1.0 },
            link: LinkFamily::ExpDecay { a: 0.9, b: 2.0 },
            params: ParamSet::practical(0.1, 4000, 2, eta / 2.0, eta, delta, 2.0 * delta, 2.0 * gap / (eta * eta), 0.03 / delta)
                .expect("built-in parameters are ordered"),
            groups: Some(20),
            seed: 0,
            trials: 1,
            waive_locality: true,
            generate_vertices: 2000,
            evaluation: EvalSpec {
                pairs: 10_000,
                probes: 100_000,
                geodesic_tolerance: 0.15,
                radius_fractions: vec![0.2, 0.4, 0.6, 0.8, 1.0],
                kernel_samples: 10_000,
                kernel_pairs: 200,
            },
            acceptance: AcceptanceSpec { net_success: 0.9, euclidean_fraction: 0.99 },
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text)?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::Schema(cfg.schema_version));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let invalid = |m: String| ConfigError::Invalid(m);
        let model = ManifoldModel::new(self.model.kind, self.model.scale).map_err(|e| invalid(e.to_string()))?;
        let link = LinkFunction::new(self.link, model.diam_euc()).map_err(|e| invalid(e.to_string()))?;
        let params = self.params;
        params.check_invariants().map_err(|e| invalid(e.to_string()))?;
        if params.dim != model.intrinsic_dim() {
            return Err(invalid(format!(
                "parameter dimension {} does not match the model's {}",
                params.dim,
                model.intrinsic_dim()
            )));
        }
        if params.mode == Mode::Practical {
            let blocking: Vec<Violation> = validate_practical(&params, &model)
                .into_iter()
                .filter(|v| !(self.waive_locality && matches!(v, Violation::DeltaLocality | Violation::RLocality)))
                .collect();
            if !blocking.is_empty() {
                let names: Vec<String> = blocking.iter().map(|v| v.to_string()).collect();
                return Err(invalid(format!("practical parameters violate {}", names.join(", "))));
            }
        }
        if self.trials == 0 {
            return Err(invalid("trials must be positive".into()));
        }
        if self.evaluation.pairs == 0 || self.evaluation.probes == 0 {
            return Err(invalid("evaluation pairs and probes must be positive".into()));
        }
        let groups = self.groups.unwrap_or_else(|| params.group_count());
        if groups == 0 {
            return Err(invalid("at least one batch group is needed".into()));
        }
        Ok(Resolved { config: self.clone(), model, link, params, groups })
    }
}
