//! Sector transmit beam and MS receive element.
//!
//! The base-station beam is the parabolic-in-dB synthesized pattern: a
//! vertical cut set by the array's half-power beamwidth and electrical tilt,
//! and a horizontal cut for the 3-sector split.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AntennaPattern {
    pub g_max_dbi: f64,
    pub hpbw_v_deg: f64,
    /// Electrical tilt as a zenith angle (90° = horizon).
    pub downtilt_deg: f64,
    pub hpbw_h_deg: f64,
    pub sla_v_db: f64,
    pub front_back_db: f64,
}

impl Default for AntennaPattern {
    fn default() -> Self {
        AntennaPattern {
            g_max_dbi: 17.6,
            hpbw_v_deg: 10.2,
            downtilt_deg: 102.0,
            hpbw_h_deg: 70.0,
            sla_v_db: 20.0,
            front_back_db: 25.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AntennaParams {
    pub sector: AntennaPattern,
    pub ms_gain_dbi: f64,
}

impl Default for AntennaParams {
    fn default() -> Self {
        AntennaParams {
            sector: AntennaPattern::default(),
            ms_gain_dbi: 0.0,
        }
    }
}

impl AntennaParams {
    pub fn validate(&self) -> Result<()> {
        let s = &self.sector;
        if !s.g_max_dbi.is_finite() {
            return Err(SimError::config(
                "antenna.sector.g_max_dbi",
                "must be finite",
            ));
        }
        for (field, v) in [
            ("antenna.sector.hpbw_v_deg", s.hpbw_v_deg),
            ("antenna.sector.hpbw_h_deg", s.hpbw_h_deg),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(SimError::config(
                    field,
                    format!("must be positive, got {v}"),
                ));
            }
        }
        for (field, v) in [
            ("antenna.sector.sla_v_db", s.sla_v_db),
            ("antenna.sector.front_back_db", s.front_back_db),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(SimError::config(field, format!("must be >= 0, got {v}")));
            }
        }
        if !(0.0..=180.0).contains(&s.downtilt_deg) {
            return Err(SimError::config(
                "antenna.sector.downtilt_deg",
                "must be in [0, 180]",
            ));
        }
        if !self.ms_gain_dbi.is_finite() {
            return Err(SimError::config("antenna.ms_gain_dbi", "must be finite"));
        }
        Ok(())
    }
}

/// Sector gain toward zenith angle `theta` and azimuth `phi` off boresight.
pub fn sector_gain(pattern: &AntennaPattern, theta: f64, phi: f64) -> Result<f64> {
    if !(0.0..=180.0).contains(&theta) {
        return Err(SimError::Domain(format!(
            "zenith angle {theta} outside [0, 180]"
        )));
    }
    if !(phi > -180.0 && phi <= 180.0) {
        return Err(SimError::Domain(format!(
            "azimuth {phi} outside (-180, 180]"
        )));
    }
    let v = (12.0 * ((theta - pattern.downtilt_deg) / pattern.hpbw_v_deg).powi(2))
        .min(pattern.sla_v_db);
    let h = (12.0 * (phi / pattern.hpbw_h_deg).powi(2)).min(pattern.front_back_db);
    let floor = pattern.g_max_dbi - (pattern.sla_v_db + pattern.front_back_db);
    Ok((pattern.g_max_dbi - v - h).max(floor))
}

/// Receive gain of the single MS element; isotropic unless overridden.
pub fn ms_gain(params: &AntennaParams) -> f64 {
    params.ms_gain_dbi
}

/// Zenith angle seen from a transmitter at `h_tx` toward a receiver at
/// horizontal range `d_2d` and height `h_rx`.
pub fn zenith_angle(d_2d: f64, h_tx: f64, h_rx: f64) -> f64 {
    90.0 + (h_tx - h_rx).atan2(d_2d).to_degrees()
}

/// Wraps an angle in degrees into (-180, 180].
pub fn wrap_azimuth(deg: f64) -> f64 {
    let mut a = deg.rem_euclid(360.0);
    if a > 180.0 {
        a -= 360.0;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn boresight_and_half_power() {
        let p = AntennaPattern::default();
        assert_abs_diff_eq!(sector_gain(&p, 102.0, 0.0).unwrap(), 17.6, epsilon = 1e-12);
        assert_abs_diff_eq!(sector_gain(&p, 107.1, 0.0).unwrap(), 14.6, epsilon = 1e-9);
        assert_abs_diff_eq!(sector_gain(&p, 96.9, 0.0).unwrap(), 14.6, epsilon = 1e-9);
        assert_abs_diff_eq!(sector_gain(&p, 102.0, 35.0).unwrap(), 14.6, epsilon = 1e-9);
        assert_abs_diff_eq!(sector_gain(&p, 102.0, -35.0).unwrap(), 14.6, epsilon = 1e-9);
    }

    #[test]
    fn floors() {
        let p = AntennaPattern::default();
        assert_abs_diff_eq!(
            sector_gain(&p, 0.0, 180.0).unwrap(),
            17.6 - 45.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            sector_gain(&p, 102.0, 180.0).unwrap(),
            17.6 - 25.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn rejects_bad_angles() {
        let p = AntennaPattern::default();
        assert!(sector_gain(&p, -1.0, 0.0).is_err());
        assert!(sector_gain(&p, 181.0, 0.0).is_err());
        assert!(sector_gain(&p, 90.0, -180.0).is_err());
        assert!(sector_gain(&p, 90.0, 180.0).is_ok());
    }

    #[test]
    fn ms_gain_passthrough() {
        assert_eq!(ms_gain(&AntennaParams::default()), 0.0);
        let p = AntennaParams {
            ms_gain_dbi: 3.0,
            ..AntennaParams::default()
        };
        assert_eq!(ms_gain(&p), 3.0);
    }

    #[test]
    fn geometry_helpers() {
        assert_abs_diff_eq!(zenith_angle(10.0, 10.0, 10.0), 90.0);
        assert!(zenith_angle(50.0, 10.0, 1.5) > 90.0);
        assert!(zenith_angle(50.0, 10.0, 22.5) < 90.0);
        assert_eq!(wrap_azimuth(190.0), -170.0);
        assert_eq!(wrap_azimuth(-180.0), 180.0);
        assert_eq!(wrap_azimuth(180.0), 180.0);
        assert_eq!(wrap_azimuth(-30.0), -30.0);
    }
}
