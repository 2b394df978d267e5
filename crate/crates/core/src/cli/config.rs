use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::base_state::ThresholdOptions;
use crate::error::{Error, Result};
use crate::mode_dynamics::ClassifyOptions;
use crate::periodic_orbit::{ModelParams, NutrientProfile, OrbitOptions};

/// Model constants; the period comes from the profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub mu: f64,
    pub sigma_tilde: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileConfig {
    Constant { value: f64, period: f64 },
    Cosine {
        mean: f64,
        amplitude: f64,
        period: f64,
        #[serde(default)]
        phase: f64,
    },
    /// CSV with `t,phi` rows over one period; relative to the config file.
    Table { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdConfig {
    pub rel_tol: f64,
    pub max_iter: usize,
    /// Also report the planar threshold.
    pub dim2: bool,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        let d = ThresholdOptions::default();
        Self { rel_tol: d.rel_tol, max_iter: d.max_iter, dim2: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveConfig {
    pub t_end: f64,
    pub samples_per_period: usize,
    pub epsilon: f64,
    /// Truncation degree of the evolved perturbation.
    pub n_max: usize,
    /// `n,m,value` CSV of initial coefficients; random when absent.
    pub init: Option<PathBuf>,
    pub random_degree: usize,
    pub random_amplitude: f64,
    /// Success when `d(t_end) / d(0)` falls below this.
    pub decay_factor: f64,
    pub require_decay: bool,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            t_end: 10.0,
            samples_per_period: 16,
            epsilon: 0.01,
            n_max: 16,
            init: None,
            random_degree: 8,
            random_amplitude: 1.0,
            decay_factor: 0.5,
            require_decay: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    pub params: ParamsConfig,
    pub profile: ProfileConfig,
    #[serde(default)]
    pub orbit: OrbitOptions,
    #[serde(default)]
    pub threshold: ThresholdConfig,
    #[serde(default)]
    pub modes: ClassifyOptions,
    #[serde(default)]
    pub evolve: EvolveConfig,
}

fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { field, reason: reason.into() }
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be a finite positive number, got {v}")))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| invalid("config", e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// Reads and validates a config file; relative paths inside it are
    /// resolved against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid("config", format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let ProfileConfig::Table { path } = &mut cfg.profile {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
        if let Some(init) = &mut cfg.evolve.init {
            if init.is_relative() {
                *init = base.join(&*init);
            }
        }
        if let Some(out) = &mut cfg.output_dir {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        positive("params.mu", self.params.mu)?;
        positive("params.sigma_tilde", self.params.sigma_tilde)?;
        match &self.profile {
            ProfileConfig::Constant { value, period } => {
                positive("profile.value", *value)?;
                positive("profile.period", *period)?;
            }
            ProfileConfig::Cosine { mean, amplitude, period, phase } => {
                positive("profile.mean", *mean)?;
                positive("profile.period", *period)?;
                if !(amplitude.is_finite() && *amplitude >= 0.0 && amplitude < mean) {
                    return Err(invalid("profile.amplitude", format!("must lie in [0, mean), got {amplitude}")));
                }
                if !phase.is_finite() {
                    return Err(invalid("profile.phase", "must be finite"));
                }
            }
            ProfileConfig::Table { .. } => {}
        }
        self.orbit.validate()?;
        positive("threshold.rel_tol", self.threshold.rel_tol)?;
        if self.modes.n_scan < 2 {
            return Err(invalid("modes.n_scan", format!("must be at least 2, got {}", self.modes.n_scan)));
        }
        if !(self.modes.tol.is_finite() && self.modes.tol >= 0.0) {
            return Err(invalid("modes.tol", "must be finite and >= 0"));
        }
        let e = &self.evolve;
        positive("evolve.t_end", e.t_end)?;
        if e.samples_per_period == 0 || self.orbit.steps % e.samples_per_period != 0 {
            return Err(invalid(
                "evolve.samples_per_period",
                format!("must divide orbit.steps = {}, got {}", self.orbit.steps, e.samples_per_period),
            ));
        }
        if !(e.epsilon.is_finite() && e.epsilon >= 0.0) {
            return Err(invalid("evolve.epsilon", "must be finite and >= 0"));
        }
        if e.random_degree > e.n_max {
            return Err(invalid("evolve.random_degree", format!("exceeds evolve.n_max = {}", e.n_max)));
        }
        if !(e.random_amplitude.is_finite() && e.random_amplitude >= 0.0) {
            return Err(invalid("evolve.random_amplitude", "must be finite and >= 0"));
        }
        if !(e.decay_factor > 0.0 && e.decay_factor < 1.0) {
            return Err(invalid("evolve.decay_factor", format!("must lie in (0, 1), got {}", e.decay_factor)));
        }
        Ok(())
    }

    pub fn nutrient(&self) -> Result<NutrientProfile> {
        match &self.profile {
            ProfileConfig::Constant { value, period } => NutrientProfile::constant(*value, *period),
            ProfileConfig::Cosine { mean, amplitude, period, phase } => {
                NutrientProfile::cosine_with_phase(*mean, *amplitude, *period, *phase)
            }
            ProfileConfig::Table { path } => {
                let file = std::fs::File::open(path)
                    .map_err(|e| invalid("profile.path", format!("cannot open {}: {e}", path.display())))?;
                NutrientProfile::from_csv(file)
            }
        }
    }

    pub fn model_params(&self, phi: &NutrientProfile) -> Result<ModelParams> {
        ModelParams::new(self.params.mu, self.params.sigma_tilde, phi.period())
    }

    pub fn threshold_options(&self) -> ThresholdOptions {
        ThresholdOptions { orbit: self.orbit, rel_tol: self.threshold.rel_tol, max_iter: self.threshold.max_iter }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [params]
        mu = 0.1
        sigma_tilde = 1.0

        [profile]
        kind = "cosine"
        mean = 2.0
        amplitude = 0.5
        period = 1.0
    "#;

    #[test]
    fn defaults_fill_in() {
        let cfg = RunConfig::from_toml(MINIMAL).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.modes.n_scan, 64);
        assert_eq!(cfg.orbit.steps, 1024);
        assert_eq!(cfg.evolve.n_max, 16);
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn round_trip() {
        let mut cfg = RunConfig::from_toml(MINIMAL).unwrap();
        cfg.evolve.init = Some("init.csv".into());
        cfg.params.mu = 0.1 + 1e-17 * 3.0;
        let again = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(again, cfg);
        let table = RunConfig { profile: ProfileConfig::Table { path: "phi.csv".into() }, ..cfg };
        assert_eq!(RunConfig::from_toml(&table.to_toml()).unwrap(), table);
    }

    #[test]
    fn rejections_name_the_field() {
        let cases = [
            ("mu = 0.1", "mu = -1.0", "params.mu"),
            ("amplitude = 0.5", "amplitude = 3.0", "profile.amplitude"),
            ("period = 1.0", "period = 0.0", "profile.period"),
        ];
        for (from, to, field) in cases {
            let cfg = RunConfig::from_toml(&MINIMAL.replace(from, to)).unwrap();
            match cfg.validate() {
                Err(Error::InvalidParameter { field: f, .. }) => assert_eq!(f, field),
                other => panic!("{other:?}"),
            }
        }
        let err = RunConfig::from_toml(&format!("{MINIMAL}\n[modes]\nn_scam = 3\n")).unwrap_err();
        assert!(err.to_string().contains("n_scam"));
        let mut cfg = RunConfig::from_toml(MINIMAL).unwrap();
        cfg.evolve.samples_per_period = 7;
        assert!(matches!(cfg.validate(), Err(Error::InvalidParameter { field: "evolve.samples_per_period", .. })));
    }
}
