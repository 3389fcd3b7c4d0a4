use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::antenna::AntennaParams;
use crate::deployment::{DeploymentParams, Environment, NUM_SECTORS};
use crate::error::{Result, SimError};
use crate::linkbudget::{power_allocation, PowerAllocation, PowerScheme, THERMAL_NOISE_DBM_HZ};
use crate::propagation::PropagationParams;

/// Explicit bandwidth / transmit power, required for carriers outside the default table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllocationOverride {
    pub bandwidth_hz: f64,
    pub p_tx_dbm: f64,
}

/// One experiment. Every field has a default, so a config file only needs
/// the entries it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub frequency_ghz: f64,
    pub power_scheme: PowerScheme,
    pub environment: Environment,
    pub n_drops: usize,
    pub ms_per_sector: usize,
    pub seed: u64,
    pub oxygen_absorption: bool,
    pub noise_figure_db: f64,
    pub noise_density_dbm_hz: f64,
    pub g_sm_db: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub allocation: Option<AllocationOverride>,
    pub propagation: PropagationParams,
    pub antenna: AntennaParams,
    pub deployment: DeploymentParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            frequency_ghz: 30.0,
            power_scheme: PowerScheme::Scaled,
            environment: Environment::Outdoor,
            n_drops: 20,
            ms_per_sector: 10,
            seed: 1,
            oxygen_absorption: true,
            noise_figure_db: 9.0,
            noise_density_dbm_hz: THERMAL_NOISE_DBM_HZ,
            g_sm_db: 0.0,
            allocation: None,
            propagation: PropagationParams::default(),
            antenna: AntennaParams::default(),
            deployment: DeploymentParams::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.frequency_ghz.is_finite() && self.frequency_ghz > 0.0) {
            return Err(SimError::config(
                "frequency_ghz",
                format!("must be positive, got {}", self.frequency_ghz),
            ));
        }
        if self.n_drops == 0 {
            return Err(SimError::config("n_drops", "must be >= 1"));
        }
        if self.ms_per_sector == 0 {
            return Err(SimError::config("ms_per_sector", "must be >= 1"));
        }
        if self.seed > i64::MAX as u64 {
            return Err(SimError::config(
                "seed",
                "must fit in a signed 64-bit integer",
            ));
        }
        for (field, v) in [
            ("noise_figure_db", self.noise_figure_db),
            ("noise_density_dbm_hz", self.noise_density_dbm_hz),
            ("g_sm_db", self.g_sm_db),
        ] {
            if !v.is_finite() {
                return Err(SimError::config(field, "must be finite"));
            }
        }
        if let Some(a) = &self.allocation {
            if !(a.bandwidth_hz.is_finite() && a.bandwidth_hz > 0.0) {
                return Err(SimError::config(
                    "allocation.bandwidth_hz",
                    "must be positive",
                ));
            }
            if !a.p_tx_dbm.is_finite() {
                return Err(SimError::config("allocation.p_tx_dbm", "must be finite"));
            }
        }
        self.propagation.validate()?;
        self.antenna.validate()?;
        self.deployment.validate()?;
        if self.antenna.sector.downtilt_deg != self.deployment.downtilt_deg {
            return Err(SimError::config(
                "antenna.sector.downtilt_deg",
                "must equal deployment.downtilt_deg",
            ));
        }
        self.power_allocation().map(|_| ())
    }

    pub fn power_allocation(&self) -> Result<PowerAllocation> {
        match self.allocation {
            Some(a) => Ok(PowerAllocation {
                scheme: self.power_scheme,
                frequency_ghz: self.frequency_ghz,
                bandwidth_hz: a.bandwidth_hz,
                p_tx_dbm: a.p_tx_dbm,
            }),
            None => power_allocation(self.power_scheme, self.frequency_ghz),
        }
    }

    /// MS count per drop.
    pub fn ms_per_drop(&self) -> usize {
        self.ms_per_sector * NUM_SECTORS
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ScenarioConfig =
            toml::from_str(s).map_err(|e| SimError::config("<config file>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| SimError::config("<config file>", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}
