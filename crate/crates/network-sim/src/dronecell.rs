use numerics::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::antenna::antenna_gain_db;
use crate::instance::{NetworkInstance, ScenarioTag};
use crate::{db_to_linear, dbm_to_watts, Result, SimError};

const SPEED_OF_LIGHT: f64 = 299_792_458.0;
const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

/// Hexagonal drone-cellular scenario (defaults follow the 19-cell layout:
/// ISD 500 m, 3 sectors per cell, BS height 25 m, 6 GHz carrier, 10 MHz
/// bandwidth, noise figure 7 dB, BS Tx power 46 dBm, downtilt 100 degrees,
/// drone heights uniform in [1.5, 300] m).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct DroneCellConfig {
    pub isd_meters: f64,
    /// Rings of cells around the center (2 gives the 19-cell layout).
    pub cell_rings: usize,
    pub bs_height: f64,
    pub drone_height_min: f64,
    pub drone_height_max: f64,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    pub tx_power_dbm: f64,
    pub downtilt_deg: f64,
    /// Drones dropped per realization before association; sectors with no
    /// associate are dropped from the ground set.
    pub drone_count: usize,
    pub seed: u64,
}

impl Default for DroneCellConfig {
    fn default() -> Self {
        Self {
            isd_meters: 500.0,
            cell_rings: 2,
            bs_height: 25.0,
            drone_height_min: 1.5,
            drone_height_max: 300.0,
            carrier_hz: 6e9,
            bandwidth_hz: 10e6,
            noise_figure_db: 7.0,
            tx_power_dbm: 46.0,
            downtilt_deg: 100.0,
            drone_count: 20,
            seed: 0,
        }
    }
}

impl DroneCellConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.isd_meters > 0.0) {
            return Err(SimError::Config("ISD must be positive".into()));
        }
        if !(0.0 < self.drone_height_min && self.drone_height_min < self.drone_height_max) {
            return Err(SimError::Config(
                "drone heights must satisfy 0 < min < max".into(),
            ));
        }
        if self.drone_count == 0 {
            return Err(SimError::Config("drone count must be >= 1".into()));
        }
        if !(self.carrier_hz > 0.0) || !(self.bandwidth_hz > 0.0) {
            return Err(SimError::Config("carrier and bandwidth must be positive".into()));
        }
        Ok(())
    }

    /// Thermal noise floor plus noise figure, in watts.
    pub fn noise_watts(&self) -> f64 {
        dbm_to_watts(
            THERMAL_NOISE_DBM_PER_HZ + 10.0 * self.bandwidth_hz.log10() + self.noise_figure_db,
        )
    }
}

/// One sector transmitter: a BS site position plus a boresight azimuth.
#[derive(Debug, Clone, Copy)]
struct Sector {
    pos: [f64; 3],
    azimuth_deg: f64,
}

/// Hexagonal lattice cell centers within `rings` of the origin.
fn cell_centers(isd: f64, rings: usize) -> Vec<[f64; 2]> {
    let r = rings as i64;
    let mut centers = Vec::new();
    for i in -r..=r {
        for j in -r..=r {
            // Hex distance in axial coordinates.
            let dist = i.abs().max(j.abs()).max((i + j).abs());
            if dist <= r {
                centers.push(lattice_point(isd, i as f64, j as f64));
            }
        }
    }
    centers
}

fn lattice_point(isd: f64, i: f64, j: f64) -> [f64; 2] {
    [isd * (i + 0.5 * j), isd * j * 3f64.sqrt() / 2.0]
}

/// The six wraparound displacements tiling the cluster over the plane.
fn wraparound_images(isd: f64, rings: usize) -> Vec<[f64; 2]> {
    // Coset vector (rings+1, rings) has cluster-size norm 3r^2 + 3r + 1;
    // its six 60-degree rotations give the neighboring cluster offsets.
    let (mut i, mut j) = (rings as f64 + 1.0, rings as f64);
    let mut images = Vec::with_capacity(6);
    for _ in 0..6 {
        images.push(lattice_point(isd, i, j));
        let next = (-j, i + j);
        i = next.0;
        j = next.1;
    }
    images
}

/// Point-in-hexagon test for the Voronoi cell of a lattice center
/// (inradius isd/2, flat sides facing the neighbor directions).
fn in_hexagon(p: [f64; 2], c: [f64; 2], isd: f64) -> bool {
    let dx = p[0] - c[0];
    let dy = p[1] - c[1];
    let half = isd / 2.0 + 1e-9;
    for angle in [0.0, 60.0, 120.0] {
        let rad = (angle as f64).to_radians();
        if (dx * rad.cos() + dy * rad.sin()).abs() > half {
            return false;
        }
    }
    true
}

/// Linear channel gain sector -> point, taking the minimum-distance
/// wraparound image and composing the element pattern with free-space
/// pathloss.
fn link_gain_linear(
    sector: &Sector,
    drone: [f64; 3],
    images: &[[f64; 2]],
    carrier_hz: f64,
    downtilt_deg: f64,
) -> f64 {
    let mut best_d2 = f64::INFINITY;
    let mut best_offset = [0.0, 0.0];
    for offset in std::iter::once([0.0, 0.0]).chain(images.iter().copied()) {
        let dx = drone[0] - (sector.pos[0] + offset[0]);
        let dy = drone[1] - (sector.pos[1] + offset[1]);
        let dz = drone[2] - sector.pos[2];
        let d2 = dx * dx + dy * dy + dz * dz;
        if d2 < best_d2 {
            best_d2 = d2;
            best_offset = offset;
        }
    }
    let dx = drone[0] - (sector.pos[0] + best_offset[0]);
    let dy = drone[1] - (sector.pos[1] + best_offset[1]);
    let dz = drone[2] - sector.pos[2];
    let d3 = best_d2.sqrt().max(1.0);
    let bearing = dy.atan2(dx).to_degrees();
    let mut rel_az = bearing - sector.azimuth_deg;
    while rel_az > 180.0 {
        rel_az -= 360.0;
    }
    while rel_az < -180.0 {
        rel_az += 360.0;
    }
    let zenith = (dz / d3).clamp(-1.0, 1.0).acos().to_degrees();
    let g_db = antenna_gain_db(rel_az, zenith, downtilt_deg);
    let wavelength = SPEED_OF_LIGHT / carrier_hz;
    let fspl = (wavelength / (4.0 * std::f64::consts::PI * d3)).powi(2);
    db_to_linear(g_db) * fspl
}

/// Generates a drone-cellular realization: 3 co-located sectors per cell,
/// drones uniform over the hex grid with uniform heights, max-received-power
/// association, one scheduled drone per non-empty sector.
pub fn gen_dronecell(cfg: &DroneCellConfig) -> Result<NetworkInstance> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let centers = cell_centers(cfg.isd_meters, cfg.cell_rings);
    let images = wraparound_images(cfg.isd_meters, cfg.cell_rings);

    let mut sectors = Vec::with_capacity(centers.len() * 3);
    for c in &centers {
        for s in 0..3 {
            sectors.push(Sector {
                pos: [c[0], c[1], cfg.bs_height],
                azimuth_deg: 120.0 * s as f64,
            });
        }
    }

    // Uniform drops over the union of hexagons by rejection in the bounding box.
    let reach = cfg.isd_meters * (cfg.cell_rings as f64 + 1.0);
    let mut drones: Vec<[f64; 3]> = Vec::with_capacity(cfg.drone_count);
    while drones.len() < cfg.drone_count {
        let p = [rng.gen_range(-reach..reach), rng.gen_range(-reach..reach)];
        if centers.iter().any(|c| in_hexagon(p, *c, cfg.isd_meters)) {
            let h = rng.gen_range(cfg.drone_height_min..cfg.drone_height_max);
            drones.push([p[0], p[1], h]);
        }
    }

    // Full sector x drone gain table; association by highest received power
    // (equal Tx power, so by gain), ties to the lowest sector index.
    let gains: Vec<Vec<f64>> = sectors
        .iter()
        .map(|sec| {
            drones
                .iter()
                .map(|&d| link_gain_linear(sec, d, &images, cfg.carrier_hz, cfg.downtilt_deg))
                .collect()
        })
        .collect();
    let mut associates: Vec<Vec<usize>> = vec![Vec::new(); sectors.len()];
    for (u, _) in drones.iter().enumerate() {
        let mut best_sector = 0;
        let mut best_gain = f64::NEG_INFINITY;
        for (t, col) in gains.iter().enumerate() {
            if col[u] > best_gain {
                best_gain = col[u];
                best_sector = t;
            }
        }
        associates[best_sector].push(u);
    }

    // Schedule one drone per non-empty sector, uniformly at random.
    let mut links: Vec<(usize, usize)> = Vec::new();
    for (t, assoc) in associates.iter().enumerate() {
        if !assoc.is_empty() {
            let pick = assoc[rng.gen_range(0..assoc.len())];
            links.push((t, pick));
        }
    }
    if links.is_empty() {
        return Err(SimError::Config("no schedulable links".into()));
    }

    let m = links.len();
    let mut gain = Matrix::zeros(m, m);
    for (jj, &(tj, _)) in links.iter().enumerate() {
        for (ii, &(_, ui)) in links.iter().enumerate() {
            gain[(jj, ii)] = gains[tj][ui];
        }
    }

    let inst = NetworkInstance {
        scenario: ScenarioTag::Dronecell,
        tx_pos: links.iter().map(|&(t, _)| sectors[t].pos).collect(),
        rx_pos: links.iter().map(|&(_, u)| drones[u]).collect(),
        gain,
        p_high_watts: dbm_to_watts(cfg.tx_power_dbm),
        noise_watts: cfg.noise_watts(),
        seed: cfg.seed,
        config_echo: serde_json::to_value(cfg)?,
        retries: 0,
    };
    inst.validate()?;
    Ok(inst)
}
