//! Hexagonal 19-site / 57-sector layout with wrap-around, and mobile-station drops.
//!
//! Sites sit on a hexagonal lattice spanned by `a = isd·(cos 30°, sin 30°)` and
//! `b = isd·(0, 1)`. The two-ring cluster of 19 sites tiles the plane under the
//! translations `3a + 2b` and its 60° rotations, which is what makes the
//! wrap-around work: every MS sees the nearest image of each site.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

pub const NUM_SITES: usize = 19;
pub const SECTORS_PER_SITE: usize = 3;
pub const NUM_SECTORS: usize = NUM_SITES * SECTORS_PER_SITE;

const BORESIGHTS_DEG: [f64; SECTORS_PER_SITE] = [30.0, 150.0, 270.0];

pub type Point = [f64; 2];

/// Layout and drop parameters. Defaults are the 3D-UMi values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeploymentParams {
    pub isd_m: f64,
    pub bs_height_m: f64,
    pub downtilt_deg: f64,
    pub ms_height_m: f64,
    pub min_distance_m: f64,
    pub floor_height_m: f64,
    pub min_floors: u32,
    pub max_floors: u32,
    pub max_indoor_depth_m: f64,
}

impl Default for DeploymentParams {
    fn default() -> Self {
        DeploymentParams {
            isd_m: 200.0,
            bs_height_m: 10.0,
            downtilt_deg: 102.0,
            ms_height_m: 1.5,
            min_distance_m: 10.0,
            floor_height_m: 3.0,
            min_floors: 4,
            max_floors: 8,
            max_indoor_depth_m: 25.0,
        }
    }
}

impl DeploymentParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("deployment.isd_m", self.isd_m),
            ("deployment.bs_height_m", self.bs_height_m),
            ("deployment.ms_height_m", self.ms_height_m),
            ("deployment.floor_height_m", self.floor_height_m),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(SimError::config(
                    field,
                    format!("must be positive, got {v}"),
                ));
            }
        }
        if !(self.min_distance_m.is_finite() && self.min_distance_m >= 0.0) {
            return Err(SimError::config(
                "deployment.min_distance_m",
                "must be >= 0",
            ));
        }
        if self.min_distance_m >= self.isd_m / 2.0 {
            return Err(SimError::config(
                "deployment.min_distance_m",
                "must be smaller than half the inter-site distance",
            ));
        }
        if !(self.max_indoor_depth_m.is_finite() && self.max_indoor_depth_m >= 0.0) {
            return Err(SimError::config(
                "deployment.max_indoor_depth_m",
                "must be >= 0",
            ));
        }
        if self.min_floors == 0 || self.min_floors > self.max_floors {
            return Err(SimError::config(
                "deployment.min_floors",
                "need 1 <= min_floors <= max_floors",
            ));
        }
        if !(0.0..=180.0).contains(&self.downtilt_deg) {
            return Err(SimError::config(
                "deployment.downtilt_deg",
                "must be in [0, 180]",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Environment {
    Outdoor,
    Indoor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    pub id: usize,
    pub site_index: usize,
    pub boresight_azimuth_deg: f64,
    pub downtilt_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub position: Point,
    pub height_m: f64,
    pub sectors: Vec<Sector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deployment {
    pub isd_m: f64,
    pub sites: Vec<Site>,
    pub wrap_vectors: [Point; 6],
}

impl Deployment {
    pub fn sectors(&self) -> impl Iterator<Item = &Sector> {
        self.sites.iter().flat_map(|s| s.sectors.iter())
    }

    pub fn num_sectors(&self) -> usize {
        self.sites.iter().map(|s| s.sectors.len()).sum()
    }

    /// Whether `p` lies in the union of the 19 site-centred hexagonal cells.
    pub fn contains(&self, p: Point) -> bool {
        self.sites
            .iter()
            .any(|s| in_hexagon(sub(p, s.position), self.isd_m))
    }

    /// Largest |x| or |y| of any point of the footprint.
    fn footprint_extent(&self) -> f64 {
        let r = self.isd_m / 3f64.sqrt();
        self.sites
            .iter()
            .map(|s| s.position[0].abs().max(s.position[1].abs()))
            .fold(0.0, f64::max)
            + r
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MobileStation {
    pub id: usize,
    pub position: Point,
    pub height_m: f64,
    pub indoor: bool,
    /// Horizontal distance travelled inside the building, 0 outdoors.
    pub indoor_depth_m: f64,
    /// 1-based floor, 1 outdoors.
    pub floor_index: u32,
}

fn unit(deg: f64) -> Point {
    let r = deg.to_radians();
    [r.cos(), r.sin()]
}

fn scale(v: Point, k: f64) -> Point {
    [v[0] * k, v[1] * k]
}

fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub fn norm(v: Point) -> f64 {
    v[0].hypot(v[1])
}

fn rotate(v: Point, deg: f64) -> Point {
    let (s, c) = deg.to_radians().sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

/// Point-in-hexagon for a cell whose neighbours lie at 30° + k·60°, distance `isd`.
fn in_hexagon(rel: Point, isd: f64) -> bool {
    let half = isd / 2.0 * (1.0 + 1e-12);
    (0..6).all(|k| {
        let u = unit(30.0 + 60.0 * k as f64);
        rel[0] * u[0] + rel[1] * u[1] <= half
    })
}

/// Builds the 19-site layout centred at the origin.
pub fn generate_layout(isd: f64) -> Result<Deployment> {
    generate_layout_with(&DeploymentParams {
        isd_m: isd,
        ..DeploymentParams::default()
    })
}

pub fn generate_layout_with(params: &DeploymentParams) -> Result<Deployment> {
    let isd = params.isd_m;
    if !(isd.is_finite() && isd > 0.0) {
        return Err(SimError::config(
            "deployment.isd_m",
            format!("must be positive, got {isd}"),
        ));
    }

    let mut positions: Vec<Point> = vec![[0.0, 0.0]];
    // first ring
    for k in 0..6 {
        positions.push(scale(unit(30.0 + 60.0 * k as f64), isd));
    }
    // second ring: corners at 2·isd, edge midpoints at √3·isd
    for k in 0..6 {
        let corner = scale(unit(30.0 + 60.0 * k as f64), 2.0 * isd);
        let edge = scale(unit(60.0 * k as f64), 3f64.sqrt() * isd);
        positions.push(edge);
        positions.push(corner);
    }

    let sites = positions
        .into_iter()
        .enumerate()
        .map(|(site_index, position)| Site {
            position,
            height_m: params.bs_height_m,
            sectors: BORESIGHTS_DEG
                .iter()
                .enumerate()
                .map(|(k, &az)| Sector {
                    id: site_index * SECTORS_PER_SITE + k,
                    site_index,
                    boresight_azimuth_deg: az,
                    downtilt_deg: params.downtilt_deg,
                })
                .collect(),
        })
        .collect();

    let a = scale(unit(30.0), isd);
    let b = scale(unit(90.0), isd);
    let base = add(scale(a, 3.0), scale(b, 2.0));
    let mut wrap_vectors = [[0.0; 2]; 6];
    for (k, w) in wrap_vectors.iter_mut().enumerate() {
        *w = rotate(base, 60.0 * k as f64);
    }

    Ok(Deployment {
        isd_m: isd,
        sites,
        wrap_vectors,
    })
}

/// Displacement from the nearest of the seven images of `site_pos` to `ms_pos`.
pub fn wrap_displacement(site_pos: Point, ms_pos: Point, deployment: &Deployment) -> Point {
    let mut best = sub(ms_pos, site_pos);
    let mut best_norm = norm(best);
    for w in &deployment.wrap_vectors {
        let d = sub(ms_pos, add(site_pos, *w));
        let n = norm(d);
        if n < best_norm {
            best = d;
            best_norm = n;
        }
    }
    best
}

/// Drops `count` mobile stations uniformly over the cluster footprint.
pub fn drop_mobiles<R: Rng + ?Sized>(
    deployment: &Deployment,
    environment: Environment,
    count: usize,
    params: &DeploymentParams,
    rng: &mut R,
) -> Result<Vec<MobileStation>> {
    if count == 0 {
        return Err(SimError::config(
            "ms_per_sector",
            "MS count must be positive",
        ));
    }
    let extent = deployment.footprint_extent();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = [
            rng.random_range(-extent..extent),
            rng.random_range(-extent..extent),
        ];
        if !deployment.contains(p) {
            continue;
        }
        let too_close = deployment
            .sites
            .iter()
            .any(|s| norm(wrap_displacement(s.position, p, deployment)) < params.min_distance_m);
        if too_close {
            continue;
        }

        let ms = match environment {
            Environment::Outdoor => MobileStation {
                id: out.len(),
                position: p,
                height_m: params.ms_height_m,
                indoor: false,
                indoor_depth_m: 0.0,
                floor_index: 1,
            },
            Environment::Indoor => {
                let n_floors = rng.random_range(params.min_floors..=params.max_floors);
                let floor = rng.random_range(1..=n_floors);
                let depth = if params.max_indoor_depth_m > 0.0 {
                    rng.random_range(0.0..params.max_indoor_depth_m)
                } else {
                    0.0
                };
                MobileStation {
                    id: out.len(),
                    position: p,
                    height_m: params.floor_height_m * (floor - 1) as f64 + params.ms_height_m,
                    indoor: true,
                    indoor_depth_m: depth,
                    floor_index: floor,
                }
            }
        };
        out.push(ms);
    }
    Ok(out)
}
