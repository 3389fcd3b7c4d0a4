use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::seeding::{child_seed, link_stream, POSITION_STREAM};
use crate::antenna::{ms_gain, sector_gain, wrap_azimuth, zenith_angle, AntennaPattern};
use crate::deployment::{
    drop_mobiles, generate_layout_with, norm, wrap_displacement, Deployment, MobileStation, Sector,
};
use crate::error::{Result, SimError};
use crate::linkbudget::{
    associate, cl_snr0_threshold, coupling_loss, noise_power_with_density, LinkRecord,
    PowerAllocation, PowerScheme,
};
use crate::metrics::{classify_regime, geometry_metric, CdfSeries, Regime};
use crate::propagation::{LinkGeometry, PropagationParams};
use crate::units::Frequency;

/// Per-link multipath/array gain `G_sm` in dB.
pub trait MultipathGain: Sync {
    fn gain_db(&self, ms: &MobileStation, sector: &Sector, is_los: bool) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantGain(pub f64);

impl MultipathGain for ConstantGain {
    fn gain_db(&self, _: &MobileStation, _: &Sector, _: bool) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global rayon pool, `Some(1)` runs inline.
    pub workers: Option<usize>,
    /// Keep every link record for `links.csv`.
    pub keep_links: bool,
}

/// Serving-link outcome for one MS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsResult {
    pub drop: usize,
    pub ms_id: usize,
    pub serving_sector: usize,
    pub coupling_loss: f64,
    pub gm: f64,
    pub regime: Regime,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeFractions {
    pub noise_limited: f64,
    pub interference_limited: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMeta {
    pub elapsed_s: f64,
    pub workers: Option<usize>,
    pub out_of_range_links: usize,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub config: ScenarioConfig,
    pub allocation: PowerAllocation,
    pub noise_total_dbm: f64,
    pub cl_snr0_threshold_db: f64,
    /// Serving-link coupling loss over all MSs of all drops.
    pub cl: CdfSeries,
    pub gm: CdfSeries,
    pub drop_seeds: Vec<u64>,
    pub regimes: RegimeFractions,
    pub per_ms: Vec<MsResult>,
    pub links: Option<Vec<LinkRecord>>,
    pub meta: RunMeta,
}

struct Context<'a> {
    config: &'a ScenarioConfig,
    deployment: Deployment,
    propagation: PropagationParams,
    frequency: Frequency,
    p_tx_dbm: f64,
    noise_total_dbm: f64,
    threshold: f64,
    g_sm: &'a dyn MultipathGain,
    keep_links: bool,
}

struct DropOutput {
    per_ms: Vec<MsResult>,
    links: Vec<LinkRecord>,
    out_of_range: usize,
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<RunResult> {
    run_scenario_with(
        config,
        &RunOptions::default(),
        &ConstantGain(config.g_sm_db),
    )
}

pub fn run_scenario_with(
    config: &ScenarioConfig,
    options: &RunOptions,
    g_sm: &dyn MultipathGain,
) -> Result<RunResult> {
    config.validate()?;
    let start = Instant::now();

    let allocation = config.power_allocation()?;
    let noise_total_dbm = noise_power_with_density(
        allocation.bandwidth_hz,
        config.noise_figure_db,
        config.noise_density_dbm_hz,
    )?;
    let ctx = Context {
        config,
        deployment: generate_layout_with(&config.deployment)?,
        propagation: if config.oxygen_absorption {
            config.propagation.clone()
        } else {
            config.propagation.without_oxygen()
        },
        frequency: Frequency::from_ghz(config.frequency_ghz),
        p_tx_dbm: allocation.p_tx_dbm,
        noise_total_dbm,
        threshold: cl_snr0_threshold(allocation.p_tx_dbm, noise_total_dbm),
        g_sm,
        keep_links: options.keep_links,
    };

    let drop_seeds: Vec<u64> = (0..config.n_drops)
        .map(|d| child_seed(config.seed, d))
        .collect();
    let run_drop = |(d, &s): (usize, &u64)| simulate_drop(&ctx, d, s);
    let drops: Vec<DropOutput> = match options.workers {
        Some(1) => drop_seeds
            .iter()
            .enumerate()
            .map(run_drop)
            .collect::<Result<_>>()?,
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| SimError::Internal(format!("thread pool: {e}")))?;
            pool.install(|| {
                drop_seeds
                    .par_iter()
                    .enumerate()
                    .map(run_drop)
                    .collect::<Result<_>>()
            })?
        }
        None => drop_seeds
            .par_iter()
            .enumerate()
            .map(run_drop)
            .collect::<Result<_>>()?,
    };

    let mut per_ms = Vec::with_capacity(config.n_drops * config.ms_per_drop());
    let mut links = options.keep_links.then(Vec::new);
    let mut out_of_range = 0;
    for d in drops {
        per_ms.extend(d.per_ms);
        out_of_range += d.out_of_range;
        if let Some(all) = links.as_mut() {
            all.extend(d.links);
        }
    }
    if out_of_range > 0 {
        log::warn!(
            "{out_of_range} links evaluated at {} GHz, outside the path-loss models' fitted range",
            config.frequency_ghz
        );
    }

    let noise_limited = per_ms
        .iter()
        .filter(|m| m.regime == Regime::NoiseLimited)
        .count();
    let nl = noise_limited as f64 / per_ms.len() as f64;
    let cl = CdfSeries::new(per_ms.iter().map(|m| m.coupling_loss).collect())?;
    let gm = CdfSeries::new(per_ms.iter().map(|m| m.gm).collect())?;

    let elapsed_s = start.elapsed().as_secs_f64();
    log::info!(
        "{} GHz {} {:?}: {} samples in {:.2} s",
        config.frequency_ghz,
        config.power_scheme,
        config.environment,
        per_ms.len(),
        elapsed_s
    );

    Ok(RunResult {
        config: config.clone(),
        allocation,
        noise_total_dbm,
        cl_snr0_threshold_db: ctx.threshold,
        cl,
        gm,
        drop_seeds,
        regimes: RegimeFractions {
            noise_limited: nl,
            interference_limited: 1.0 - nl,
        },
        per_ms,
        links,
        meta: RunMeta {
            elapsed_s,
            workers: options.workers,
            out_of_range_links: out_of_range,
        },
    })
}

fn simulate_drop(ctx: &Context<'_>, drop: usize, seed: u64) -> Result<DropOutput> {
    let cfg = ctx.config;
    let dep = &ctx.deployment;
    let prop = &ctx.propagation;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(POSITION_STREAM);
    let mobiles = drop_mobiles(
        dep,
        cfg.environment,
        cfg.ms_per_drop(),
        &cfg.deployment,
        &mut rng,
    )?;

    let g_rx = ms_gain(&cfg.antenna);
    let mut out = DropOutput {
        per_ms: Vec::with_capacity(mobiles.len()),
        links: Vec::new(),
        out_of_range: 0,
    };
    let mut links: Vec<LinkRecord> = Vec::with_capacity(dep.num_sectors());

    for ms in &mobiles {
        links.clear();
        for (site_index, site) in dep.sites.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(link_stream(ms.id, site_index));
            let u: f64 = rng.random();
            let draws = prop.sample_shadows(&mut rng);

            let disp = wrap_displacement(site.position, ms.position, dep);
            let d_2d = norm(disp);
            let d_3d = d_2d.hypot(site.height_m - ms.height_m);
            let is_los = prop.los_state(d_2d, u);
            let geom = LinkGeometry {
                d_2d,
                d_3d,
                frequency: ctx.frequency,
                is_los,
                is_indoor: ms.indoor,
                d_2d_in: ms.indoor_depth_m.min(d_2d),
            };
            let theta = zenith_angle(d_2d, site.height_m, ms.height_m);
            let azimuth = disp[1].atan2(disp[0]).to_degrees();

            for sector in &site.sectors {
                let pattern = AntennaPattern {
                    downtilt_deg: sector.downtilt_deg,
                    ..cfg.antenna.sector.clone()
                };
                let phi = wrap_azimuth(azimuth - sector.boresight_azimuth_deg);
                let g_tx = sector_gain(&pattern, theta, phi)?;
                let g_sm = ctx.g_sm.gain_db(ms, sector, is_los);
                let loss = prop.link_loss(&geom, &draws, g_sm)?;
                if loss.out_of_range {
                    out.out_of_range += 1;
                }
                let cl = coupling_loss(g_tx, g_rx, &loss);
                let record = LinkRecord {
                    ms_id: ms.id,
                    sector_id: sector.id,
                    d_2d,
                    d_3d,
                    is_los,
                    pl: loss.pl,
                    l_o2i: loss.l_o2i,
                    l_oa: loss.l_oa,
                    g_tx,
                    g_rx,
                    g_sm,
                    coupling_loss: cl,
                    p_rx: ctx.p_tx_dbm + cl,
                };
                check_finite(&record, drop)?;
                links.push(record);
            }
        }

        let serving = associate(&links)?;
        let serving_cl = links
            .iter()
            .find(|l| l.sector_id == serving)
            .map(|l| l.coupling_loss)
            .ok_or_else(|| SimError::Internal("serving link missing".into()))?;
        let gm = geometry_metric(&links, serving, ctx.noise_total_dbm)?;
        if !gm.is_finite() {
            return Err(SimError::NonFinite {
                quantity: "geometry metric",
                drop,
                ms_id: ms.id,
                sector_id: serving,
            });
        }
        out.per_ms.push(MsResult {
            drop,
            ms_id: ms.id,
            serving_sector: serving,
            coupling_loss: serving_cl,
            gm,
            regime: classify_regime(serving_cl, ctx.threshold),
        });
        if ctx.keep_links {
            out.links.extend(links.iter().cloned());
        }
    }
    Ok(out)
}

fn check_finite(r: &LinkRecord, drop: usize) -> Result<()> {
    let fields = [
        ("d_3d", r.d_3d),
        ("path loss", r.pl),
        ("o2i loss", r.l_o2i),
        ("oxygen loss", r.l_oa),
        ("tx gain", r.g_tx),
        ("g_sm", r.g_sm),
        ("coupling loss", r.coupling_loss),
        ("received power", r.p_rx),
    ];
    match fields.iter().find(|(_, v)| !v.is_finite()) {
        Some((quantity, _)) => Err(SimError::NonFinite {
            quantity,
            drop,
            ms_id: r.ms_id,
            sector_id: r.sector_id,
        }),
        None => Ok(()),
    }
}

pub struct SweepEntry {
    pub frequency_ghz: f64,
    pub scheme: PowerScheme,
    pub result: Result<RunResult>,
}

/// Runs every (frequency, scheme) pair with the base config's seed, so all
/// runs see the same drops and shadowing.
pub fn run_sweep(
    base: &ScenarioConfig,
    frequencies: &[f64],
    schemes: &[PowerScheme],
    options: &RunOptions,
) -> Result<Vec<SweepEntry>> {
    if frequencies.is_empty() {
        return Err(SimError::config(
            "frequencies",
            "sweep needs at least one frequency",
        ));
    }
    if schemes.is_empty() {
        return Err(SimError::config(
            "schemes",
            "sweep needs at least one power scheme",
        ));
    }
    let mut out = Vec::with_capacity(frequencies.len() * schemes.len());
    for &f in frequencies {
        for &scheme in schemes {
            let cfg = ScenarioConfig {
                frequency_ghz: f,
                power_scheme: scheme,
                ..base.clone()
            };
            let result = run_scenario_with(&cfg, options, &ConstantGain(cfg.g_sm_db));
            if let Err(e) = &result {
                log::error!("{f} GHz {scheme}: {e}");
            }
            out.push(SweepEntry {
                frequency_ghz: f,
                scheme,
                result,
            });
        }
    }
    Ok(out)
}
