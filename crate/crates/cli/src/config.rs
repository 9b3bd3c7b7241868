//! Declarative run configuration (TOML, comments allowed).
//!
//! Field names follow the documented schema: `system` (preset or a
//! custom `{formalism, hamiltonian, entropy, metric, n}`), `params`,
//! `initial`, `integrator`, `output`. See `docs/config.md`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use metriplectic::expr::{parse, Alphabet, Bindings};
use metriplectic::fields::Formalism;
use metriplectic::integrators::{IntegratorOptions, Method, Sampling};
use metriplectic::structures::{MetricField, Point, ScalarField};
use metriplectic::systems::{self, SystemSpec};
use metriplectic::VectorField;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<IntegratorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// One of the named presets; mutually exclusive with the custom
    /// fields below.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formalism: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entropy: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum MetricConfig {
    /// `"identity"`.
    Named(String),
    /// Explicit lower-index entries g_{ij}, row by row.
    Rows(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    #[serde(default)]
    pub z: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    /// `"dp45"` (default) or `"rk4"`.
    #[serde(default = "default_method")]
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default)]
    pub t0: f64,
    pub t1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
}

fn default_method() -> String {
    "dp45".to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: PathBuf,
    /// `"csv"` (default) or `"json"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => bail!("unknown output format `{other}` (expected `csv` or `json`)"),
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// A fully validated run: the system, its field, the initial state, the
/// integrator options, and where the output goes.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub spec: SystemSpec,
    pub field: VectorField,
    pub x0: Point,
    pub opts: IntegratorOptions,
    pub output_path: PathBuf,
    pub output_format: OutputFormat,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).context("failed to parse run configuration")
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).context("failed to serialize run configuration")
    }

    /// Validates everything and builds the runnable pieces.
    pub fn resolve(&self) -> Result<ResolvedRun> {
        let spec = self.build_system()?;
        let field = spec
            .build_field()
            .map_err(|e| anyhow!("cannot assemble vector field: {e}"))?;
        let x0 = match &self.initial {
            Some(init) => {
                if init.q.len() != spec.n || init.p.len() != spec.n {
                    bail!(
                        "initial.q and initial.p must each have n = {} entries (got {} and {})",
                        spec.n,
                        init.q.len(),
                        init.p.len()
                    );
                }
                Point::new(init.q.clone(), init.p.clone(), init.z)
                    .map_err(|e| anyhow!("invalid initial state: {e}"))?
            }
            None => spec.initial.clone(),
        };
        let opts = self.build_integrator()?;
        let (output_path, output_format) = self.build_output()?;
        Ok(ResolvedRun {
            spec,
            field,
            x0,
            opts,
            output_path,
            output_format,
        })
    }

    fn build_system(&self) -> Result<SystemSpec> {
        let sys = &self.system;
        let custom_fields = sys.formalism.is_some()
            || sys.hamiltonian.is_some()
            || sys.entropy.is_some()
            || sys.metric.is_some()
            || sys.n.is_some();
        match (&sys.preset, custom_fields) {
            (Some(_), true) => {
                bail!("system.preset and custom system fields are mutually exclusive")
            }
            (None, false) => bail!(
                "system needs either a preset ({}) or a custom definition",
                systems::PRESETS.join(", ")
            ),
            (Some(name), false) => {
                systems::preset(name, &self.params).map_err(|e| anyhow!("preset `{name}`: {e}"))
            }
            (None, true) => self.build_custom_system(),
        }
    }

    fn build_custom_system(&self) -> Result<SystemSpec> {
        let sys = &self.system;
        let formalism = match sys
            .formalism
            .as_deref()
            .ok_or_else(|| anyhow!("custom system needs system.formalism"))?
        {
            "poisson" => Formalism::Poisson,
            "contact" => Formalism::Contact,
            "metriplectic" => Formalism::Metriplectic,
            other => {
                bail!("unknown formalism `{other}` (expected poisson, contact, or metriplectic)")
            }
        };
        let n = sys.n.unwrap_or(1);
        if n == 0 {
            bail!("system.n must be at least 1");
        }
        let source = sys
            .hamiltonian
            .as_deref()
            .ok_or_else(|| anyhow!("custom system needs system.hamiltonian"))?;
        let hamiltonian = self.parse_field(source, n, "system.hamiltonian")?;

        let entropy = match (&sys.entropy, formalism) {
            (Some(src), Formalism::Metriplectic | Formalism::Contact) => {
                Some(self.parse_field(src, n, "system.entropy")?)
            }
            (Some(_), Formalism::Poisson) => {
                bail!("system.entropy is meaningless for the poisson formalism")
            }
            (None, Formalism::Metriplectic | Formalism::Contact) => {
                Some(ScalarField::z_coordinate(n))
            }
            (None, Formalism::Poisson) => None,
        };

        let metric = match &sys.metric {
            None => None,
            Some(MetricConfig::Named(name)) if name == "identity" => Some(MetricField::identity(n)),
            Some(MetricConfig::Named(other)) => {
                bail!("unknown metric `{other}` (expected `identity` or a matrix)")
            }
            Some(MetricConfig::Rows(rows)) => {
                if rows.len() != n {
                    bail!("metric matrix must be {n}x{n} to match system.n");
                }
                Some(
                    MetricField::from_constant(rows.clone())
                        .map_err(|e| anyhow!("system.metric: {e}"))?,
                )
            }
        };
        if metric.is_some() && formalism != Formalism::Metriplectic {
            bail!("system.metric only applies to the metriplectic formalism");
        }

        let mut q0 = vec![0.0; n];
        q0[0] = 1.0;
        Ok(SystemSpec {
            name: "custom".into(),
            formalism,
            hamiltonian,
            entropy,
            metric,
            n,
            initial: Point::new(q0, vec![0.0; n], 0.0).expect("n >= 1"),
        })
    }

    fn parse_field(&self, source: &str, n: usize, what: &str) -> Result<ScalarField> {
        let alphabet = Alphabet::jet(n).with_parameters(self.params.keys().cloned());
        let expr = parse(source, &alphabet).map_err(|e| anyhow!("{what}: {e} in `{source}`"))?;
        let bindings: Bindings = self.params.iter().map(|(k, v)| (k.clone(), *v)).collect();
        ScalarField::from_expr(&expr, n, &bindings).map_err(|e| anyhow!("{what}: {e}"))
    }

    fn build_integrator(&self) -> Result<IntegratorOptions> {
        let Some(cfg) = &self.integrator else {
            bail!("config needs an [integrator] section with at least t1");
        };
        let method = match cfg.method.as_str() {
            "dp45" => Method::Dp45 {
                abs_tol: cfg.abs_tol.unwrap_or(1e-10),
                rel_tol: cfg.rel_tol.unwrap_or(1e-10),
            },
            "rk4" => Method::Rk4 {
                step: cfg
                    .step
                    .ok_or_else(|| anyhow!("integrator.method = \"rk4\" needs integrator.step"))?,
            },
            other => bail!("unknown integrator.method `{other}` (expected dp45 or rk4)"),
        };
        let sampling = match (cfg.sample_dt, cfg.sample_stride) {
            (Some(_), Some(_)) => {
                bail!("integrator.sample_dt and integrator.sample_stride are mutually exclusive")
            }
            (Some(dt), None) => Sampling::Uniform { dt },
            (None, Some(stride)) => Sampling::EveryStep { stride },
            (None, None) => Sampling::EveryStep { stride: 1 },
        };
        Ok(IntegratorOptions {
            method,
            t0: cfg.t0,
            t1: cfg.t1,
            sampling,
            max_step: cfg.max_step,
            max_steps: 50_000_000,
        })
    }

    fn build_output(&self) -> Result<(PathBuf, OutputFormat)> {
        match &self.output {
            Some(out) => {
                let format = match &out.format {
                    Some(name) => OutputFormat::from_name(name)?,
                    None => OutputFormat::Csv,
                };
                Ok((out.path.clone(), format))
            }
            None => Ok((PathBuf::from("trajectory.csv"), OutputFormat::Csv)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEMO: &str = r#"
# decay demo
[system]
preset = "duffing-contact"

[params]
delta = 0.2
alpha = 1.0
beta = 1.0
gamma = 0.0

[integrator]
method = "dp45"
abs_tol = 1e-10
rel_tol = 1e-10
t0 = 0.0
t1 = 20.0

[output]
path = "decay.csv"
format = "csv"
"#;

    #[test]
    fn parses_and_resolves_preset_config() {
        let cfg = RunConfig::from_toml(DEMO).unwrap();
        let run = cfg.resolve().unwrap();
        assert_eq!(run.spec.name, "duffing-contact");
        assert_eq!(run.x0, Point::new3(1.0, 0.0, 0.0));
        assert_eq!(run.output_format, OutputFormat::Csv);
    }

    #[test]
    fn custom_system_with_metric_matrix() {
        let text = r#"
[system]
formalism = "metriplectic"
hamiltonian = "p1^2/2 + q1^2/2 + delta*z"
metric = [[2.0]]
n = 1

[params]
delta = 0.5

[integrator]
t1 = 1.0
"#;
        let run = RunConfig::from_toml(text).unwrap().resolve().unwrap();
        assert_eq!(run.spec.formalism, Formalism::Metriplectic);
        assert!(run.spec.metric.is_some());
    }

    #[test]
    fn preset_and_custom_fields_conflict() {
        let text = r#"
[system]
preset = "harmonic"
hamiltonian = "p1^2/2"

[integrator]
t1 = 1.0
"#;
        let err = RunConfig::from_toml(text).unwrap().resolve().unwrap_err();
        assert!(err.to_string().contains("mutually exclusive"));
    }

    #[test]
    fn bad_hamiltonian_reports_the_token() {
        let text = r#"
[system]
formalism = "contact"
hamiltonian = "p1^2/2 + bogus"

[integrator]
t1 = 1.0
"#;
        let err = RunConfig::from_toml(text).unwrap().resolve().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus"), "{msg}");
    }

    #[test]
    fn toml_round_trip_preserves_config() {
        let cfg = RunConfig::from_toml(DEMO).unwrap();
        let text = cfg.to_toml().unwrap();
        let again = RunConfig::from_toml(&text).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"
[system]
preset = "harmonic"
typo_field = 1

[integrator]
t1 = 1.0
"#;
        assert!(RunConfig::from_toml(text).is_err());
    }
}
