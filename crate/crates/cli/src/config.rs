//! Run configuration: flags override the TOML file, which overrides the
//! defaults.

use std::path::{Path, PathBuf};

use lagshrink_core::curve::DEFAULT_SAMPLES;
use lagshrink_core::surface::{ReportConfig, MIN_GRID};
use lagshrink_core::{Error, Result};
use serde::Deserialize;

pub const DEFAULT_GRID: usize = 256;
pub const DEFAULT_INDENT: usize = 2;
pub const DEFAULT_INTEGRATION_TOL: f64 = 1e-10;

/// The TOML file. Every key is optional; unknown keys are rejected.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// If set, the file may only be used with this command.
    pub command: Option<String>,
    pub out: Option<PathBuf>,
    pub json_indent: Option<usize>,
    pub threads: Option<usize>,
    /// Seed for synthetic inputs (random control polylines).
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub grid: GridConfig,
    /// Tolerances and derivative scheme of `verify-torus`.
    pub report: Option<ReportConfig>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Shooting accuracy of `solve-curve`.
    pub integration: Option<f64>,
    /// Pass/fail threshold of the verifying commands.
    pub verification: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub ns: Option<usize>,
    pub nt: Option<usize>,
    /// Samples per curve.
    pub samples: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }
}

/// Flags shared by all commands, before merging.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub json_indent: Option<usize>,
    pub threads: Option<usize>,
}

/// Effective settings of one run.
#[derive(Clone, Debug)]
pub struct Settings {
    pub out: PathBuf,
    pub json_indent: usize,
    pub threads: Option<usize>,
    pub seed: u64,
    pub integration_tol: f64,
    /// `None` leaves each command its own default.
    pub verification_tol: Option<f64>,
    pub ns: usize,
    pub nt: usize,
    pub samples: usize,
    pub report: ReportConfig,
}

impl Settings {
    pub fn resolve(command: &str, file: RunConfig, flags: Overrides) -> Result<Self> {
        if let Some(c) = &file.command {
            if c != command {
                return Err(Error::InputDomain(format!("config file is for '{c}', not '{command}'")));
            }
        }
        let s = Settings {
            out: flags.out.or(file.out).unwrap_or_else(|| PathBuf::from(".")),
            json_indent: flags.json_indent.or(file.json_indent).unwrap_or(DEFAULT_INDENT),
            threads: flags.threads.or(file.threads),
            seed: file.seed.unwrap_or(0),
            integration_tol: file.tolerances.integration.unwrap_or(DEFAULT_INTEGRATION_TOL),
            verification_tol: flags.tol.or(file.tolerances.verification),
            ns: file.grid.ns.unwrap_or(DEFAULT_GRID),
            nt: file.grid.nt.or(file.grid.ns).unwrap_or(DEFAULT_GRID),
            samples: file.grid.samples.unwrap_or(DEFAULT_SAMPLES),
            report: file.report.unwrap_or_default(),
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InputDomain(format!("{name} must be a positive number, got {v}")))
            }
        };
        positive("integration tolerance", self.integration_tol)?;
        if let Some(t) = self.verification_tol {
            positive("verification tolerance", t)?;
        }
        let r = &self.report;
        for (name, v) in [
            ("report.shrinker_tol", r.shrinker_tol),
            ("report.isothermal_tol", r.isothermal_tol),
            ("report.algebraic_tol", r.algebraic_tol),
            ("report.laplace_tol", r.laplace_tol),
            ("report.relation_tol", r.relation_tol),
            ("report.radius_tol", r.radius_tol),
            ("report.gauss_tol", r.gauss_tol),
            ("report.symmetry_spacings", r.symmetry_spacings),
        ] {
            positive(name, v)?;
        }
        for (name, n) in [
            ("grid.ns", self.ns),
            ("grid.nt", self.nt),
            ("grid.samples", self.samples),
        ] {
            if n < MIN_GRID {
                return Err(Error::InputDomain(format!(
                    "{name} must be at least {MIN_GRID}, got {n}"
                )));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::InputDomain("threads must be at least 1".into()));
        }
        Ok(())
    }
}
