//! TOML run configuration. Unknown keys are rejected everywhere.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use nslab::dynamics::{BCSpec, DiffusionScheme, StepParams};
use nslab::lab::{InitialPreset, SweepConfig, SweepVariable};
use nslab::{build_domain, AnnulusDomain};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub initial: InitialConfig,
    pub boundary: BoundaryConfig,
    pub run: RunSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub r_inner: f64,
    pub r_outer: f64,
    pub n_r: usize,
    pub n_theta: usize,
    /// Extra `[n_r, n_theta]` levels simulated after the primary one.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ladder: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    PureCirculation {
        gamma: f64,
    },
    RadialBump {
        center: f64,
        half_width: f64,
        amplitude: f64,
    },
    Patch {
        rc: f64,
        #[serde(default)]
        thc: f64,
        radius: f64,
        amplitude: f64,
    },
    Random {
        k_max: usize,
        m_max: usize,
        #[serde(default)]
        vanishing_on_walls: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryConfig {
    Navier { alpha_inner: f64, alpha_outer: f64 },
    // empty braces so extra keys are rejected rather than ignored
    Lions {},
    NoSlip {},
    Euler {},
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Diffusion {
    #[default]
    SemiImplicit,
    Explicit,
}

fn default_cfl() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub nu: f64,
    pub dt: f64,
    pub horizon: f64,
    #[serde(default = "default_cfl")]
    pub cfl_max: f64,
    #[serde(default)]
    pub diffusion: Diffusion,
    /// Snapshot spacing; only the initial and final fields when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_every: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

fn default_rate_c() -> f64 {
    0.05
}

fn default_bootstrap() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Viscosities for `--kind nu`; friction comes from `[boundary]`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nu: Vec<f64>,
    /// Frictions for `--kind alpha`; viscosity comes from `[run]`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alpha: Vec<f64>,
    pub sample_every: f64,
    #[serde(default = "default_rate_c")]
    pub rate_c: f64,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
}

fn default_root() -> String {
    "nslab_out".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_root")]
    pub root: String,
    /// Run directory under the root; defaults to the config file stem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            root: default_root(),
            name: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Nu,
    Alpha,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config always serialises")
    }

    pub fn resolutions(&self) -> Vec<(usize, usize)> {
        std::iter::once((self.domain.n_r, self.domain.n_theta))
            .chain(self.domain.ladder.iter().map(|l| (l[0], l[1])))
            .collect()
    }

    pub fn build_domain(&self, n_r: usize, n_theta: usize) -> Result<Arc<AnnulusDomain>, CliError> {
        build_domain(self.domain.r_inner, self.domain.r_outer, n_r, n_theta).map_err(config_error)
    }

    pub fn initial_preset(&self) -> InitialPreset {
        match self.initial {
            InitialConfig::PureCirculation { gamma } => InitialPreset::PureCirculation { gamma },
            InitialConfig::RadialBump {
                center,
                half_width,
                amplitude,
            } => InitialPreset::RadialBump {
                center,
                half_width,
                amplitude,
            },
            InitialConfig::Patch {
                rc,
                thc,
                radius,
                amplitude,
            } => InitialPreset::Patch {
                rc,
                thc,
                radius,
                amplitude,
            },
            InitialConfig::Random {
                k_max,
                m_max,
                vanishing_on_walls,
            } => InitialPreset::Random {
                k_max,
                m_max,
                vanishing_on_walls,
            },
        }
    }

    pub fn bc(&self, domain: &AnnulusDomain) -> BCSpec {
        match self.boundary {
            BoundaryConfig::Navier {
                alpha_inner,
                alpha_outer,
            } => BCSpec::navier_uniform(domain, alpha_inner, alpha_outer),
            BoundaryConfig::Lions {} => BCSpec::Lions,
            BoundaryConfig::NoSlip {} => BCSpec::NoSlip,
            BoundaryConfig::Euler {} => BCSpec::Euler,
        }
    }

    /// Viscosity actually used: Euler walls force zero.
    pub fn nu(&self) -> f64 {
        match self.boundary {
            BoundaryConfig::Euler {} => 0.0,
            _ => self.run.nu,
        }
    }

    pub fn step_params(&self) -> StepParams {
        StepParams {
            dt: self.run.dt,
            cfl_max: self.run.cfl_max,
            diffusion: match self.run.diffusion {
                Diffusion::SemiImplicit => DiffusionScheme::SemiImplicit,
                Diffusion::Explicit => DiffusionScheme::Explicit,
            },
        }
    }

    fn whole_steps(&self, span: f64, what: &str) -> Result<usize, CliError> {
        let n = (span / self.run.dt).round();
        if !(n >= 1.0) || (n * self.run.dt - span).abs() > 1e-9 * span {
            return Err(CliError::Config(format!(
                "{what} {span} is not a whole multiple of dt = {}",
                self.run.dt
            )));
        }
        Ok(n as usize)
    }

    /// `(steps, steps between snapshots)` after checking the run section.
    pub fn schedule(&self) -> Result<(usize, usize), CliError> {
        let r = &self.run;
        if !(r.nu >= 0.0 && r.nu.is_finite()) {
            return Err(CliError::Config(format!("nu = {} must be non-negative", r.nu)));
        }
        self.step_params().validate().map_err(config_error)?;
        if !(r.horizon > 0.0 && r.horizon.is_finite()) {
            return Err(CliError::Config(format!("horizon = {} must be positive", r.horizon)));
        }
        let steps = self.whole_steps(r.horizon, "horizon")?;
        let every = match r.sample_every {
            Some(s) => self.whole_steps(s, "sample_every")?,
            None => steps,
        };
        Ok((steps, every))
    }

    pub fn sweep_config(&self, kind: SweepKind, jobs: usize) -> Result<SweepConfig, CliError> {
        let sw = self
            .sweep
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [sweep] section".into()))?;
        let (sweep, alpha) = match kind {
            SweepKind::Nu => {
                let alpha = match self.boundary {
                    BoundaryConfig::Navier {
                        alpha_inner,
                        alpha_outer,
                    } if alpha_inner == alpha_outer => alpha_inner,
                    _ => {
                        return Err(CliError::Config(
                            "viscosity sweeps need navier walls with equal friction".into(),
                        ))
                    }
                };
                (SweepVariable::Nu(sw.nu.clone()), alpha)
            }
            SweepKind::Alpha => (SweepVariable::Alpha(sw.alpha.clone()), 0.0),
        };
        let cfg = SweepConfig {
            r_inner: self.domain.r_inner,
            r_outer: self.domain.r_outer,
            n_r: self.domain.n_r,
            n_theta: self.domain.n_theta,
            initial: self.initial_preset(),
            sweep,
            alpha,
            nu: self.run.nu,
            horizon: self.run.horizon,
            dt: self.run.dt,
            cfl_max: self.run.cfl_max,
            sample_every: sw.sample_every,
            rate_c: sw.rate_c,
            seed: self.run.seed,
            bootstrap: sw.bootstrap,
            jobs,
        };
        cfg.validate().map_err(config_error)?;
        Ok(cfg)
    }
}

fn config_error(e: nslab::Error) -> CliError {
    CliError::Config(e.to_string())
}
