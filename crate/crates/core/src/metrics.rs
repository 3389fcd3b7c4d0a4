//! Geometry metric and empirical CDFs.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::linkbudget::LinkRecord;
use crate::units::{db_to_linear, linear_to_db};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    NoiseLimited,
    InterferenceLimited,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryResult {
    pub ms_id: usize,
    pub gm: f64,
    pub serving_sector: usize,
    pub regime: Regime,
}

/// Long-term SINR of the serving link against noise plus all other sectors.
pub fn geometry_metric(links: &[LinkRecord], serving: usize, noise_total_dbm: f64) -> Result<f64> {
    if links.len() < 2 {
        return Err(SimError::Internal(format!(
            "geometry metric needs at least 2 links, got {}",
            links.len()
        )));
    }
    let mut signal = None;
    let mut interference = 0.0;
    for l in links {
        let p = db_to_linear(l.p_rx);
        if l.sector_id == serving {
            signal = Some(p);
        } else {
            interference += p;
        }
    }
    let signal = signal
        .ok_or_else(|| SimError::Internal(format!("serving sector {serving} not among links")))?;
    Ok(linear_to_db(
        signal / (db_to_linear(noise_total_dbm) + interference),
    ))
}

/// Noise-limited iff the coupling loss is strictly below the threshold.
pub fn classify_regime(coupling_loss: f64, threshold: f64) -> Regime {
    if coupling_loss < threshold {
        Regime::NoiseLimited
    } else {
        Regime::InterferenceLimited
    }
}

/// Sorted sample set with CDF queries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfSeries {
    sorted: Vec<f64>,
}

pub fn empirical_cdf(samples: &[f64]) -> Result<CdfSeries> {
    CdfSeries::new(samples.to_vec())
}

impl CdfSeries {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(SimError::InvalidInput(
                "empirical CDF of an empty sample set".into(),
            ));
        }
        if let Some(bad) = samples.iter().find(|v| v.is_nan()) {
            return Err(SimError::InvalidInput(format!(
                "sample {bad} is not a number"
            )));
        }
        samples.sort_by(f64::total_cmp);
        Ok(CdfSeries { sorted: samples })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    /// `|{s ≤ x}| / n`
    pub fn fraction_below(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.len() as f64
    }

    /// `|{s < x}| / n`
    pub fn fraction_strictly_below(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s < x) as f64 / self.len() as f64
    }

    /// Smallest sample `s` with `fraction_below(s) ≥ p`.
    pub fn percentile(&self, p: f64) -> f64 {
        let n = self.len();
        let p = p.clamp(0.0, 1.0);
        let mut k = (p * n as f64).ceil() as usize;
        // undo round-up from p·n landing a hair above an integer
        if k > 1 && (k - 1) as f64 / n as f64 >= p {
            k -= 1;
        }
        self.sorted[k.clamp(1, n) - 1]
    }

    pub fn median(&self) -> f64 {
        self.percentile(0.5)
    }

    /// Two-column CSV `value_dB,cdf`, one row per sample.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "value_dB,cdf")?;
        let n = self.len() as f64;
        for (i, v) in self.sorted.iter().enumerate() {
            writeln!(w, "{},{}", v, (i + 1) as f64 / n)?;
        }
        Ok(())
    }
}
