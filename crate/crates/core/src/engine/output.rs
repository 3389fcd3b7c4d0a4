use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::run::{RegimeFractions, RunResult};
use crate::error::Result;
use crate::linkbudget::{write_link_row, PowerAllocation, LINK_CSV_HEADER};
use crate::metrics::CdfSeries;

/// Percentile points reported in `summary.json`, in percent.
pub const CDF_PERCENTILES: [u32; 8] = [5, 20, 35, 48, 50, 75, 90, 95];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercentilePoint {
    pub percent: u32,
    pub value_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSummary {
    pub n: usize,
    pub median_db: f64,
    pub percentiles: Vec<PercentilePoint>,
    #[serde(rename = "fraction_below_0dB")]
    pub fraction_below_0db: f64,
}

impl SeriesSummary {
    fn of(cdf: &CdfSeries) -> Self {
        SeriesSummary {
            n: cdf.len(),
            median_db: cdf.median(),
            percentiles: CDF_PERCENTILES
                .iter()
                .map(|&p| PercentilePoint {
                    percent: p,
                    value_db: cdf.percentile(f64::from(p) / 100.0),
                })
                .collect(),
            fraction_below_0db: cdf.fraction_below(0.0),
        }
    }
}

/// Contents of `summary.json`. Excludes wall-clock and worker count so that
/// identical runs produce identical files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config: ScenarioConfig,
    pub seed: u64,
    pub drop_seeds: Vec<u64>,
    pub allocation: PowerAllocation,
    pub noise_total_dbm: f64,
    pub cl_snr0_threshold_db: f64,
    pub coupling_loss: SeriesSummary,
    pub geometry: SeriesSummary,
    pub regimes: RegimeFractions,
}

impl Summary {
    pub fn of(r: &RunResult) -> Self {
        Summary {
            config: r.config.clone(),
            seed: r.config.seed,
            drop_seeds: r.drop_seeds.clone(),
            allocation: r.allocation,
            noise_total_dbm: r.noise_total_dbm,
            cl_snr0_threshold_db: r.cl_snr0_threshold_db,
            coupling_loss: SeriesSummary::of(&r.cl),
            geometry: SeriesSummary::of(&r.gm),
            regimes: r.regimes,
        }
    }
}

/// Writes `cl_cdf.csv`, `gm_cdf.csv`, `summary.json` and, if links were
/// kept, `links.csv` into `dir`.
pub fn write_outputs(result: &RunResult, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;

    let mut w = BufWriter::new(File::create(dir.join("cl_cdf.csv"))?);
    result.cl.write_csv(&mut w)?;
    w.flush()?;

    let mut w = BufWriter::new(File::create(dir.join("gm_cdf.csv"))?);
    result.gm.write_csv(&mut w)?;
    w.flush()?;

    let mut w = BufWriter::new(File::create(dir.join("summary.json"))?);
    serde_json::to_writer_pretty(&mut w, &Summary::of(result))?;
    writeln!(w)?;
    w.flush()?;

    if let Some(links) = &result.links {
        let mut w = BufWriter::new(File::create(dir.join("links.csv"))?);
        writeln!(w, "{LINK_CSV_HEADER}")?;
        for l in links {
            write_link_row(&mut w, l)?;
        }
        w.flush()?;
    }
    Ok(())
}
