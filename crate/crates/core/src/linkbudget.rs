//! Coupling loss, received power, noise and serving-sector selection.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::propagation::LinkLoss;

/// Thermal noise density.
pub const THERMAL_NOISE_DBM_HZ: f64 = -174.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PowerScheme {
    /// Transmit power grows with the allocated bandwidth.
    Scaled,
    /// 44 dBm regardless of bandwidth.
    Constant,
}

impl std::fmt::Display for PowerScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PowerScheme::Scaled => "scaled",
            PowerScheme::Constant => "constant",
        })
    }
}

impl std::str::FromStr for PowerScheme {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scaled" => Ok(PowerScheme::Scaled),
            "constant" => Ok(PowerScheme::Constant),
            other => Err(SimError::config(
                "power_scheme",
                format!("unknown scheme `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    pub scheme: PowerScheme,
    pub frequency_ghz: f64,
    pub bandwidth_hz: f64,
    pub p_tx_dbm: f64,
}

const CONSTANT_P_TX_DBM: f64 = 44.0;

/// (carrier GHz, bandwidth MHz, scaled P_Tx dBm)
const ALLOCATION_TABLE: [(f64, f64, f64); 5] = [
    (2.0, 20.0, 44.0),
    (10.0, 300.0, 55.8),
    (30.0, 500.0, 58.0),
    (60.0, 1000.0, 61.0),
    (100.0, 2000.0, 64.0),
];

pub fn power_allocation(scheme: PowerScheme, frequency_ghz: f64) -> Result<PowerAllocation> {
    let &(_, bw_mhz, scaled) = ALLOCATION_TABLE
        .iter()
        .find(|(f, _, _)| (*f - frequency_ghz).abs() < 1e-9)
        .ok_or_else(|| {
            SimError::config(
                "frequency_ghz",
                format!(
                    "{frequency_ghz} GHz has no default bandwidth/power; set [allocation] explicitly"
                ),
            )
        })?;
    Ok(PowerAllocation {
        scheme,
        frequency_ghz,
        bandwidth_hz: bw_mhz * 1e6,
        p_tx_dbm: match scheme {
            PowerScheme::Scaled => scaled,
            PowerScheme::Constant => CONSTANT_P_TX_DBM,
        },
    })
}

/// Total noise power in dBm over `bandwidth_hz`.
pub fn noise_power(bandwidth_hz: f64, noise_figure_db: f64) -> Result<f64> {
    noise_power_with_density(bandwidth_hz, noise_figure_db, THERMAL_NOISE_DBM_HZ)
}

pub fn noise_power_with_density(
    bandwidth_hz: f64,
    noise_figure_db: f64,
    density_dbm_hz: f64,
) -> Result<f64> {
    if !(bandwidth_hz.is_finite() && bandwidth_hz > 0.0) {
        return Err(SimError::Domain(format!(
            "bandwidth must be positive, got {bandwidth_hz}"
        )));
    }
    Ok(density_dbm_hz + 10.0 * bandwidth_hz.log10() + noise_figure_db)
}

/// `g_tx + g_rx − (pl + l_o2i + l_oa − g_sm)`
pub fn coupling_loss(g_tx: f64, g_rx: f64, loss: &LinkLoss) -> f64 {
    g_tx + g_rx - loss.total()
}

/// Coupling loss at which received power equals the noise power.
pub fn cl_snr0_threshold(p_tx_dbm: f64, noise_total_dbm: f64) -> f64 {
    noise_total_dbm - p_tx_dbm
}

/// One sector → MS link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkRecord {
    pub ms_id: usize,
    pub sector_id: usize,
    pub d_2d: f64,
    pub d_3d: f64,
    pub is_los: bool,
    pub pl: f64,
    pub l_o2i: f64,
    pub l_oa: f64,
    pub g_tx: f64,
    pub g_rx: f64,
    pub g_sm: f64,
    pub coupling_loss: f64,
    pub p_rx: f64,
}

impl LinkRecord {
    pub fn link_loss(&self) -> f64 {
        self.pl + self.l_o2i + self.l_oa - self.g_sm
    }
}

pub const LINK_CSV_HEADER: &str =
    "ms_id,sector_id,d_2D,d_3D,is_los,pl,l_o2i,l_oa,g_tx,g_sm,coupling_loss,p_rx";

pub fn write_link_row<W: Write>(w: &mut W, r: &LinkRecord) -> std::io::Result<()> {
    writeln!(
        w,
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        r.ms_id,
        r.sector_id,
        r.d_2d,
        r.d_3d,
        u8::from(r.is_los),
        r.pl,
        r.l_o2i,
        r.l_oa,
        r.g_tx,
        r.g_sm,
        r.coupling_loss,
        r.p_rx
    )
}

/// Serving sector: largest coupling loss, lowest sector id on ties.
pub fn associate(links: &[LinkRecord]) -> Result<usize> {
    let mut best: Option<&LinkRecord> = None;
    for l in links {
        best = match best {
            None => Some(l),
            Some(b) if l.coupling_loss > b.coupling_loss => Some(l),
            Some(b) if l.coupling_loss == b.coupling_loss && l.sector_id < b.sector_id => Some(l),
            keep => keep,
        };
    }
    best.map(|l| l.sector_id)
        .ok_or_else(|| SimError::Internal("association over an empty link set".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn rec(sector_id: usize, cl: f64) -> LinkRecord {
        LinkRecord {
            ms_id: 0,
            sector_id,
            d_2d: 50.0,
            d_3d: 51.0,
            is_los: false,
            pl: 0.0,
            l_o2i: 0.0,
            l_oa: 0.0,
            g_tx: 0.0,
            g_rx: 0.0,
            g_sm: 0.0,
            coupling_loss: cl,
            p_rx: cl + 44.0,
        }
    }

    #[test]
    fn allocation_table() {
        let a = power_allocation(PowerScheme::Scaled, 60.0).unwrap();
        assert_eq!((a.bandwidth_hz, a.p_tx_dbm), (1000e6, 61.0));
        let b = power_allocation(PowerScheme::Constant, 100.0).unwrap();
        assert_eq!((b.bandwidth_hz, b.p_tx_dbm), (2000e6, 44.0));
        let s = power_allocation(PowerScheme::Scaled, 2.0).unwrap();
        let c = power_allocation(PowerScheme::Constant, 2.0).unwrap();
        assert_eq!((s.bandwidth_hz, s.p_tx_dbm), (c.bandwidth_hz, c.p_tx_dbm));
        for (f, bw, p) in [
            (10.0, 300e6, 55.8),
            (30.0, 500e6, 58.0),
            (100.0, 2000e6, 64.0),
        ] {
            let a = power_allocation(PowerScheme::Scaled, f).unwrap();
            assert_eq!((a.bandwidth_hz, a.p_tx_dbm), (bw, p));
        }
        assert!(matches!(
            power_allocation(PowerScheme::Scaled, 28.0),
            Err(SimError::InvalidConfig { .. })
        ));
    }

    #[test]
    fn noise_values() {
        assert_abs_diff_eq!(noise_power(20e6, 9.0).unwrap(), -91.99, epsilon = 0.005);
        assert_abs_diff_eq!(noise_power(1.0, 0.0).unwrap(), -174.0);
        assert_abs_diff_eq!(noise_power(2e9, 9.0).unwrap(), -71.99, epsilon = 0.005);
        assert!(noise_power(0.0, 9.0).is_err());
    }

    fn loss(pl: f64, l_o2i: f64, l_oa: f64, g_sm: f64) -> LinkLoss {
        LinkLoss {
            pl,
            l_o2i,
            l_oa,
            g_sm,
            out_of_range: false,
        }
    }

    #[test]
    fn coupling_loss_arithmetic() {
        assert_abs_diff_eq!(
            coupling_loss(17.6, 0.0, &loss(100.0, 0.0, 0.0, 0.0)),
            -82.4,
            epsilon = 1e-12
        );
        assert_eq!(coupling_loss(0.0, 0.0, &loss(0.0, 0.0, 0.0, 0.0)), 0.0);
        assert_abs_diff_eq!(
            coupling_loss(17.6, 0.0, &loss(124.46, 34.98, 3.0, 0.0)),
            -144.84,
            epsilon = 1e-9
        );
    }

    #[test]
    fn thresholds() {
        assert_abs_diff_eq!(cl_snr0_threshold(44.0, -91.99), -135.99, epsilon = 1e-12);
        assert_abs_diff_eq!(cl_snr0_threshold(44.0, -71.99), -115.99, epsilon = 1e-12);
        assert_abs_diff_eq!(cl_snr0_threshold(61.0, -81.0), -142.0, epsilon = 1e-12);
    }

    #[test]
    fn association_rules() {
        let links = vec![rec(0, -120.0), rec(1, -110.0), rec(2, -125.0)];
        assert_eq!(associate(&links).unwrap(), 1);
        let tie = vec![rec(5, -100.0), rec(3, -100.0), rec(4, -101.0)];
        assert_eq!(associate(&tie).unwrap(), 3);
        assert!(matches!(associate(&[]), Err(SimError::Internal(_))));
    }

    #[test]
    fn csv_row_matches_header() {
        let mut buf = Vec::new();
        write_link_row(&mut buf, &rec(7, -100.5)).unwrap();
        let line = String::from_utf8(buf).unwrap();
        assert_eq!(
            line.trim_end().split(',').count(),
            LINK_CSV_HEADER.split(',').count()
        );
        assert!(line.starts_with("0,7,50,51,0,"));
    }

    #[test]
    fn scheme_parsing() {
        assert_eq!(
            "scaled".parse::<PowerScheme>().unwrap(),
            PowerScheme::Scaled
        );
        assert_eq!(PowerScheme::Constant.to_string(), "constant");
        assert!("other".parse::<PowerScheme>().is_err());
    }
}
