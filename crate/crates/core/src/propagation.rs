//! Large-scale propagation: close-in (CI) LoS path loss, alpha-beta-gamma
//! (ABG) NLoS path loss, UMi LoS probability, outdoor-to-indoor penetration
//! and oxygen absorption.
//!
//! All losses are in dB and positive. Shadow-fading terms are passed in as
//! explicit draws so every function here is pure.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::units::{db_to_linear, linear_to_db, Frequency, SPEED_OF_LIGHT};

/// Frequency range over which the CI and ABG fits were made.
pub const VALID_RANGE_GHZ: (f64, f64) = (0.5, 100.0);

/// How the O2I "σ² = 3 / 5" figures are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum O2iSigmaReading {
    /// The figures are variances, σ = √3 and √5 dB.
    Variance,
    /// The figures are standard deviations, σ = 3 and 5 dB.
    StdDev,
}

/// LoS state selection. Anything but `Stochastic` is for controlled experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LosMode {
    Stochastic,
    AlwaysLos,
    AlwaysNlos,
}

/// `intercept + slope · f_GHz`, in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialCoeffs {
    pub intercept_db: f64,
    pub slope_db_per_ghz: f64,
}

impl MaterialCoeffs {
    fn at(&self, f_ghz: f64) -> f64 {
        self.intercept_db + self.slope_db_per_ghz * f_ghz
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Material {
    Glass,
    IrrGlass,
    Concrete,
}

impl std::str::FromStr for Material {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "glass" => Ok(Material::Glass),
            "irr_glass" => Ok(Material::IrrGlass),
            "concrete" => Ok(Material::Concrete),
            other => Err(SimError::Domain(format!("unknown material `{other}`"))),
        }
    }
}

/// Specific attenuation at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OxygenPoint {
    pub frequency_ghz: f64,
    pub db_per_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagationParams {
    /// 10·n of the CI model (n = 2.1).
    pub ci_ple_coeff: f64,
    pub sigma_los_db: f64,
    pub abg_alpha: f64,
    pub abg_beta_db: f64,
    pub abg_gamma: f64,
    pub sigma_nlos_db: f64,
    pub o2i_low_figure: f64,
    pub o2i_high_figure: f64,
    pub o2i_sigma_reading: O2iSigmaReading,
    pub glass: MaterialCoeffs,
    pub irr_glass: MaterialCoeffs,
    pub concrete: MaterialCoeffs,
    pub indoor_loss_db_per_m: f64,
    /// Frequencies absent from this table have no oxygen absorption.
    pub oxygen: Vec<OxygenPoint>,
    pub los_breakpoint_m: f64,
    pub los_decay_m: f64,
    pub los_mode: LosMode,
}

impl Default for PropagationParams {
    fn default() -> Self {
        PropagationParams {
            ci_ple_coeff: 21.0,
            sigma_los_db: 3.76,
            abg_alpha: 3.53,
            abg_beta_db: 22.4,
            abg_gamma: 2.13,
            sigma_nlos_db: 7.82,
            o2i_low_figure: 3.0,
            o2i_high_figure: 5.0,
            o2i_sigma_reading: O2iSigmaReading::Variance,
            glass: MaterialCoeffs {
                intercept_db: 2.0,
                slope_db_per_ghz: 0.2,
            },
            irr_glass: MaterialCoeffs {
                intercept_db: 23.0,
                slope_db_per_ghz: 0.3,
            },
            concrete: MaterialCoeffs {
                intercept_db: 5.0,
                slope_db_per_ghz: 4.0,
            },
            indoor_loss_db_per_m: 0.5,
            oxygen: vec![OxygenPoint {
                frequency_ghz: 60.0,
                db_per_km: 15.0,
            }],
            los_breakpoint_m: 18.0,
            los_decay_m: 36.0,
            los_mode: LosMode::Stochastic,
        }
    }
}

/// A path-loss value plus a flag set when the carrier is outside the model's fit range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLoss {
    pub db: f64,
    pub out_of_range: bool,
}

/// Shadow-fading draws for one MS–site pair, in dB.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ShadowDraws {
    pub x_los: f64,
    pub x_nlos: f64,
    pub x_o2i_low: f64,
    pub x_o2i_high: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub d_2d: f64,
    pub d_3d: f64,
    pub frequency: Frequency,
    pub is_los: bool,
    pub is_indoor: bool,
    pub d_2d_in: f64,
}

/// Breakdown of the link loss `pl + l_o2i + l_oa − g_sm`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkLoss {
    pub pl: f64,
    pub l_o2i: f64,
    pub l_oa: f64,
    pub g_sm: f64,
    pub out_of_range: bool,
}

impl LinkLoss {
    pub fn total(&self) -> f64 {
        self.pl + self.l_o2i + self.l_oa - self.g_sm
    }
}

/// Free-space path loss at 1 m.
pub fn fspl(f: Frequency) -> Result<f64> {
    let hz = f.hz();
    if !(hz.is_finite() && hz > 0.0) {
        return Err(SimError::Domain(format!(
            "frequency must be positive, got {hz} Hz"
        )));
    }
    Ok(20.0 * (4.0 * std::f64::consts::PI * hz / SPEED_OF_LIGHT).log10())
}

pub fn los_probability(d_2d: f64) -> f64 {
    PropagationParams::default().los_probability(d_2d)
}

fn in_valid_range(f: Frequency) -> bool {
    let g = f.ghz();
    g >= VALID_RANGE_GHZ.0 && g <= VALID_RANGE_GHZ.1
}

fn check_distance(d: f64) -> Result<()> {
    if !(d.is_finite() && d >= 1.0) {
        return Err(SimError::Domain(format!(
            "distance {d} m is below the 1 m reference distance"
        )));
    }
    Ok(())
}

impl PropagationParams {
    pub fn validate(&self) -> Result<()> {
        let non_negative = [
            ("propagation.sigma_los_db", self.sigma_los_db),
            ("propagation.sigma_nlos_db", self.sigma_nlos_db),
            ("propagation.o2i_low_figure", self.o2i_low_figure),
            ("propagation.o2i_high_figure", self.o2i_high_figure),
            (
                "propagation.indoor_loss_db_per_m",
                self.indoor_loss_db_per_m,
            ),
        ];
        for (field, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(SimError::config(field, format!("must be >= 0, got {v}")));
            }
        }
        for (field, v) in [
            ("propagation.abg_alpha", self.abg_alpha),
            ("propagation.abg_gamma", self.abg_gamma),
            ("propagation.ci_ple_coeff", self.ci_ple_coeff),
            ("propagation.los_breakpoint_m", self.los_breakpoint_m),
            ("propagation.los_decay_m", self.los_decay_m),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(SimError::config(
                    field,
                    format!("must be positive, got {v}"),
                ));
            }
        }
        if !self.abg_beta_db.is_finite() {
            return Err(SimError::config(
                "propagation.abg_beta_db",
                "must be finite",
            ));
        }
        if self
            .oxygen
            .iter()
            .any(|p| !(p.frequency_ghz > 0.0 && p.db_per_km.is_finite() && p.db_per_km >= 0.0))
        {
            return Err(SimError::config(
                "propagation.oxygen",
                "entries need a positive frequency and a non-negative rate",
            ));
        }
        Ok(())
    }

    pub fn without_oxygen(&self) -> Self {
        PropagationParams {
            oxygen: Vec::new(),
            ..self.clone()
        }
    }

    pub fn sigma_o2i_low_db(&self) -> f64 {
        self.o2i_sigma(self.o2i_low_figure)
    }

    pub fn sigma_o2i_high_db(&self) -> f64 {
        self.o2i_sigma(self.o2i_high_figure)
    }

    fn o2i_sigma(&self, figure: f64) -> f64 {
        match self.o2i_sigma_reading {
            O2iSigmaReading::Variance => figure.sqrt(),
            O2iSigmaReading::StdDev => figure,
        }
    }

    /// `FSPL(f) + ci_ple_coeff·log10(d) + x_los`, `d` in metres.
    pub fn pl_los_ci(&self, f: Frequency, d: f64, x_los: f64) -> Result<PathLoss> {
        check_distance(d)?;
        Ok(PathLoss {
            db: fspl(f)? + self.ci_ple_coeff * d.log10() + x_los,
            out_of_range: !in_valid_range(f),
        })
    }

    /// `10α·log10(d) + β + 10γ·log10(f_GHz) + x_nlos`.
    pub fn pl_nlos_abg(&self, f: Frequency, d: f64, x_nlos: f64) -> Result<PathLoss> {
        check_distance(d)?;
        let ghz = f.ghz();
        if !(ghz.is_finite() && ghz > 0.0) {
            return Err(SimError::Domain(format!(
                "frequency must be positive, got {ghz} GHz"
            )));
        }
        Ok(PathLoss {
            db: 10.0 * self.abg_alpha * d.log10()
                + self.abg_beta_db
                + 10.0 * self.abg_gamma * ghz.log10()
                + x_nlos,
            out_of_range: !in_valid_range(f),
        })
    }

    /// UMi LoS probability `min(d1/d, 1)·(1 − e^(−d/d2)) + e^(−d/d2)`.
    pub fn los_probability(&self, d_2d: f64) -> f64 {
        let d = d_2d.max(0.0);
        if d <= self.los_breakpoint_m {
            return 1.0;
        }
        let e = (-d / self.los_decay_m).exp();
        (self.los_breakpoint_m / d) * (1.0 - e) + e
    }

    pub fn material_loss(&self, material: Material, f: Frequency) -> Result<f64> {
        let ghz = f.ghz();
        if !(ghz.is_finite() && ghz > 0.0) {
            return Err(SimError::Domain(format!(
                "frequency must be positive, got {ghz} GHz"
            )));
        }
        let c = match material {
            Material::Glass => self.glass,
            Material::IrrGlass => self.irr_glass,
            Material::Concrete => self.concrete,
        };
        Ok(c.at(ghz))
    }

    /// Low-loss and high-loss composite wall penetration, shadow terms included.
    pub fn wall_losses(&self, f: Frequency, x_low: f64, x_high: f64) -> Result<(f64, f64)> {
        let l_g = self.material_loss(Material::Glass, f)?;
        let l_irr = self.material_loss(Material::IrrGlass, f)?;
        let l_c = self.material_loss(Material::Concrete, f)?;
        let low = 5.0 - linear_to_db(0.3 * db_to_linear(-l_g) + 0.7 * db_to_linear(-l_c)) + x_low;
        let high =
            5.0 - linear_to_db(0.7 * db_to_linear(-l_irr) + 0.3 * db_to_linear(-l_c)) + x_high;
        Ok((low, high))
    }

    /// Outdoor-to-indoor loss: equal-weight mix of the low and high wall
    /// models plus `indoor_loss_db_per_m · d_2d_in`.
    pub fn o2i_loss(&self, f: Frequency, d_2d_in: f64, x_low: f64, x_high: f64) -> Result<f64> {
        if !(d_2d_in.is_finite() && d_2d_in >= 0.0) {
            return Err(SimError::Domain(format!(
                "indoor depth must be >= 0, got {d_2d_in}"
            )));
        }
        let (low, high) = self.wall_losses(f, x_low, x_high)?;
        let wall = linear_to_db(0.5 * db_to_linear(low) + 0.5 * db_to_linear(high));
        Ok(wall + self.indoor_loss_db_per_m * d_2d_in)
    }

    /// Specific attenuation in dB/km; zero for frequencies not in the table.
    pub fn oxygen_rate(&self, f: Frequency) -> f64 {
        let ghz = f.ghz();
        self.oxygen
            .iter()
            .find(|p| (p.frequency_ghz - ghz).abs() <= 1e-9 * p.frequency_ghz)
            .map_or(0.0, |p| p.db_per_km)
    }

    pub fn oxygen_absorption(&self, f: Frequency, d: f64) -> f64 {
        self.oxygen_rate(f) * d.max(0.0) / 1000.0
    }

    /// Link loss `PL + L_O2I + L_OA − g_sm`. Path loss and oxygen use `d_3d`.
    pub fn link_loss(
        &self,
        geom: &LinkGeometry,
        draws: &ShadowDraws,
        g_sm: f64,
    ) -> Result<LinkLoss> {
        let pl = if geom.is_los {
            self.pl_los_ci(geom.frequency, geom.d_3d, draws.x_los)?
        } else {
            self.pl_nlos_abg(geom.frequency, geom.d_3d, draws.x_nlos)?
        };
        let l_o2i = if geom.is_indoor {
            self.o2i_loss(
                geom.frequency,
                geom.d_2d_in,
                draws.x_o2i_low,
                draws.x_o2i_high,
            )?
        } else {
            0.0
        };
        Ok(LinkLoss {
            pl: pl.db,
            l_o2i,
            l_oa: self.oxygen_absorption(geom.frequency, geom.d_3d),
            g_sm,
            out_of_range: pl.out_of_range,
        })
    }

    /// Draws the four shadow terms for one MS–site pair.
    pub fn sample_shadows<R: Rng + ?Sized>(&self, rng: &mut R) -> ShadowDraws {
        let mut n = || -> f64 { StandardNormal.sample(rng) };
        ShadowDraws {
            x_los: self.sigma_los_db * n(),
            x_nlos: self.sigma_nlos_db * n(),
            x_o2i_low: self.sigma_o2i_low_db() * n(),
            x_o2i_high: self.sigma_o2i_high_db() * n(),
        }
    }

    /// Draws the LoS state for a link at `d_2d`; `u` is a uniform in [0, 1).
    pub fn los_state(&self, d_2d: f64, u: f64) -> bool {
        match self.los_mode {
            LosMode::Stochastic => u < self.los_probability(d_2d),
            LosMode::AlwaysLos => true,
            LosMode::AlwaysNlos => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p() -> PropagationParams {
        PropagationParams::default()
    }

    fn ghz(g: f64) -> Frequency {
        Frequency::from_ghz(g)
    }

    #[test]
    fn fspl_values() {
        assert_abs_diff_eq!(fspl(ghz(2.0)).unwrap(), 38.47, epsilon = 0.005);
        assert_abs_diff_eq!(fspl(ghz(30.0)).unwrap(), 61.99, epsilon = 0.005);
        let unity = SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI);
        assert_abs_diff_eq!(
            fspl(Frequency::from_hz(unity)).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        assert!(matches!(
            fspl(Frequency::from_hz(0.0)),
            Err(SimError::Domain(_))
        ));
    }

    #[test]
    fn ci_values() {
        let pl = p().pl_los_ci(ghz(30.0), 100.0, 0.0).unwrap();
        assert_abs_diff_eq!(pl.db, 103.99, epsilon = 0.005);
        assert!(!pl.out_of_range);
        let at_ref = p().pl_los_ci(ghz(73.0), 1.0, 0.0).unwrap().db;
        assert_eq!(at_ref, fspl(ghz(73.0)).unwrap());
        assert_abs_diff_eq!(
            p().pl_los_ci(ghz(2.0), 100.0, 5.0).unwrap().db,
            85.47,
            epsilon = 0.005
        );
        assert!(p().pl_los_ci(ghz(2.0), 0.5, 0.0).is_err());
    }

    #[test]
    fn abg_values() {
        assert_abs_diff_eq!(
            p().pl_nlos_abg(ghz(30.0), 100.0, 0.0).unwrap().db,
            124.46,
            epsilon = 0.005
        );
        assert_abs_diff_eq!(
            p().pl_nlos_abg(ghz(1.0), 1.0, 0.0).unwrap().db,
            22.4,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            p().pl_nlos_abg(ghz(2.0), 100.0, 0.0).unwrap().db,
            99.41,
            epsilon = 0.005
        );
        assert!(p().pl_nlos_abg(ghz(2.0), 0.0, 0.0).is_err());
    }

    #[test]
    fn out_of_range_frequency_warns_but_evaluates() {
        let pl = p().pl_nlos_abg(ghz(150.0), 100.0, 0.0).unwrap();
        assert!(pl.out_of_range);
        assert!(pl.db.is_finite());
        assert!(p().pl_los_ci(ghz(0.3), 10.0, 0.0).unwrap().out_of_range);
        assert!(!p().pl_los_ci(ghz(100.0), 10.0, 0.0).unwrap().out_of_range);
    }

    #[test]
    fn los_probability_values() {
        assert_eq!(los_probability(10.0), 1.0);
        assert_eq!(los_probability(18.0), 1.0);
        assert_abs_diff_eq!(los_probability(36.0), 0.6839, epsilon = 5e-5);
        assert_abs_diff_eq!(los_probability(180.0), 0.1061, epsilon = 5e-5);
        assert!(los_probability(1e5) < 1e-3);
    }

    #[test]
    fn material_values() {
        assert_abs_diff_eq!(
            p().material_loss(Material::Glass, ghz(28.0)).unwrap(),
            7.6,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            p().material_loss(Material::Concrete, ghz(28.0)).unwrap(),
            117.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            p().material_loss(Material::IrrGlass, ghz(1e-12)).unwrap(),
            23.0,
            epsilon = 1e-9
        );
        assert!("wood".parse::<Material>().is_err());
        assert_eq!("irr_glass".parse::<Material>().unwrap(), Material::IrrGlass);
    }

    #[test]
    fn o2i_at_28_ghz() {
        let (low, high) = p().wall_losses(ghz(28.0), 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(low, 17.83, epsilon = 0.005);
        assert_abs_diff_eq!(high, 37.95, epsilon = 0.005);
        assert_abs_diff_eq!(
            p().o2i_loss(ghz(28.0), 0.0, 0.0, 0.0).unwrap(),
            34.98,
            epsilon = 0.005
        );
    }

    #[test]
    fn indoor_depth_adds_half_db_per_metre() {
        let a = p().o2i_loss(ghz(28.0), 0.0, 1.2, -0.7).unwrap();
        let b = p().o2i_loss(ghz(28.0), 10.0, 1.2, -0.7).unwrap();
        assert_abs_diff_eq!(b - a, 5.0, epsilon = 1e-12);
        assert!(p().o2i_loss(ghz(28.0), -1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn oxygen_values() {
        assert_abs_diff_eq!(
            p().oxygen_absorption(ghz(60.0), 200.0),
            3.0,
            epsilon = 1e-12
        );
        assert_eq!(p().oxygen_absorption(ghz(60.0), 0.0), 0.0);
        assert_eq!(p().oxygen_absorption(ghz(2.0), 1000.0), 0.0);
        assert_eq!(
            p().without_oxygen().oxygen_absorption(ghz(60.0), 200.0),
            0.0
        );
    }

    #[test]
    fn o2i_sigma_readings() {
        let v = p();
        assert_abs_diff_eq!(v.sigma_o2i_low_db(), 3f64.sqrt());
        assert_abs_diff_eq!(v.sigma_o2i_high_db(), 5f64.sqrt());
        let s = PropagationParams {
            o2i_sigma_reading: O2iSigmaReading::StdDev,
            ..p()
        };
        assert_eq!(s.sigma_o2i_low_db(), 3.0);
        assert_eq!(s.sigma_o2i_high_db(), 5.0);
    }

    fn geom(is_los: bool, is_indoor: bool, f: f64, d_3d: f64) -> LinkGeometry {
        LinkGeometry {
            d_2d: d_3d,
            d_3d,
            frequency: ghz(f),
            is_los,
            is_indoor,
            d_2d_in: 0.0,
        }
    }

    #[test]
    fn link_loss_composition() {
        let zero = ShadowDraws::default();
        let l = p()
            .link_loss(&geom(true, false, 30.0, 100.0), &zero, 0.0)
            .unwrap();
        assert_abs_diff_eq!(l.total(), 103.99, epsilon = 0.005);
        let l3 = p()
            .link_loss(&geom(true, false, 30.0, 100.0), &zero, 3.0)
            .unwrap();
        assert_abs_diff_eq!(l.total() - l3.total(), 3.0, epsilon = 1e-12);

        let g = geom(false, true, 60.0, 200.0);
        let l = p().link_loss(&g, &zero, 0.0).unwrap();
        let expect = p().pl_nlos_abg(ghz(60.0), 200.0, 0.0).unwrap().db
            + p().o2i_loss(ghz(60.0), 0.0, 0.0, 0.0).unwrap()
            + 3.0;
        assert_abs_diff_eq!(l.total(), expect, epsilon = 1e-9);
    }

    #[test]
    fn forced_los_modes() {
        let mut q = p();
        q.los_mode = LosMode::AlwaysNlos;
        assert!(!q.los_state(5.0, 0.0));
        q.los_mode = LosMode::AlwaysLos;
        assert!(q.los_state(1e4, 0.999));
        q.los_mode = LosMode::Stochastic;
        assert!(q.los_state(10.0, 0.999));
    }

    #[test]
    fn validation_names_field() {
        let q = PropagationParams {
            sigma_nlos_db: -1.0,
            ..p()
        };
        match q.validate() {
            Err(SimError::InvalidConfig { field, .. }) => {
                assert_eq!(field, "propagation.sigma_nlos_db")
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(p().validate().is_ok());
    }
}
