//! Deployment geometry: Dense-Urban and Indoor-Hotspot layouts, user
//! placement, and RSRP-based cell selection.

use crate::error::{Result, SimError};
use crate::stochastics::{RngStream, StreamPurpose};
use serde::{Deserialize, Serialize};

/// Deployment family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeploymentKind {
    /// Dense Urban: 7 three-sector macro sites on a hex grid, ISD 200 m.
    Du,
    /// Indoor Hotspot: 12 ceiling cells in a 50 x 120 m hall, 20 m spacing.
    Inh,
}

impl std::fmt::Display for DeploymentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DeploymentKind::Du => write!(f, "DU"),
            DeploymentKind::Inh => write!(f, "InH"),
        }
    }
}

pub const DU_ISD_M: f64 = 200.0;
pub const DU_BS_HEIGHT_M: f64 = 25.0;
pub const DU_DOWNTILT_DEG: f64 = 12.0;
pub const DU_SECTOR_AZIMUTHS_DEG: [f64; 3] = [30.0, 150.0, 270.0];
pub const DU_MIN_BS_UE_DIST_M: f64 = 10.0;
pub const DU_OUTDOOR_PROB: f64 = 0.2;
pub const DU_FLOOR_HEIGHT_M: f64 = 3.0;
pub const DU_MAX_FLOOR: u8 = 8;

pub const INH_ISD_M: f64 = 20.0;
pub const INH_BS_HEIGHT_M: f64 = 3.0;
pub const INH_HALL_X_M: f64 = 120.0;
pub const INH_HALL_Y_M: f64 = 50.0;

pub const UE_BODY_HEIGHT_M: f64 = 1.5;
pub const UE_SPEED_KMH: f64 = 3.0;

/// One sector/cell of a site.
#[derive(Debug, Clone, Serialize)]
pub struct Cell {
    pub cell_id: u32,
    pub site_id: u32,
    pub x_m: f64,
    pub y_m: f64,
    pub height_m: f64,
    pub azimuth_deg: f64,
    pub downtilt_deg: f64,
}

/// A dropped user terminal.
#[derive(Debug, Clone, Serialize)]
pub struct UserTerminal {
    pub ue_id: u32,
    pub x_m: f64,
    pub y_m: f64,
    pub z_m: f64,
    pub indoor: bool,
    pub floor: Option<u8>,
    pub speed_kmh: f64,
    /// Geographic cell area the UE was dropped in.
    pub drop_cell: u32,
    /// RSRP-serving cell, set by cell selection.
    pub serving_cell: Option<u32>,
}

/// Deployment geometry, immutable after construction.
#[derive(Debug, Clone)]
pub struct Layout {
    pub kind: DeploymentKind,
    pub cells: Vec<Cell>,
    pub isd_m: f64,
    pub wraparound: bool,
    /// Candidate translations for wraparound distance, (0,0) first.
    wrap_shifts: Vec<(f64, f64)>,
}

impl Layout {
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn min_bs_ue_dist_m(&self) -> f64 {
        match self.kind {
            DeploymentKind::Du => DU_MIN_BS_UE_DIST_M,
            DeploymentKind::Inh => 0.0,
        }
    }

    /// Horizontal displacement from a site to a point, taking the shortest
    /// wraparound image when enabled.
    pub fn displacement(&self, from_x: f64, from_y: f64, to_x: f64, to_y: f64) -> (f64, f64) {
        let mut best = (to_x - from_x, to_y - from_y);
        if self.wraparound {
            let mut best_sq = best.0 * best.0 + best.1 * best.1;
            for &(sx, sy) in &self.wrap_shifts[1..] {
                let dx = to_x + sx - from_x;
                let dy = to_y + sy - from_y;
                let d = dx * dx + dy * dy;
                if d < best_sq {
                    best_sq = d;
                    best = (dx, dy);
                }
            }
        }
        best
    }

    /// 2D distance from a cell's site to a UE under the layout's topology.
    pub fn distance_2d(&self, cell: &Cell, ue_x: f64, ue_y: f64) -> f64 {
        let (dx, dy) = self.displacement(cell.x_m, cell.y_m, ue_x, ue_y);
        (dx * dx + dy * dy).sqrt().max(self.min_bs_ue_dist_m())
    }
}

/// Construct the deployment geometry for `kind`.
///
/// DU wraps the 7-site cluster onto a torus by default so edge cells see
/// representative interference; `wraparound` can be disabled to study the
/// finite grid.
pub fn build_layout(kind: DeploymentKind) -> Layout {
    build_layout_with(kind, kind == DeploymentKind::Du)
}

pub fn build_layout_with(kind: DeploymentKind, wraparound: bool) -> Layout {
    match kind {
        DeploymentKind::Du => {
            let mut sites = vec![(0.0, 0.0)];
            for k in 0..6 {
                let a = (60.0 * k as f64).to_radians();
                sites.push((DU_ISD_M * a.cos(), DU_ISD_M * a.sin()));
            }
            let mut cells = Vec::with_capacity(21);
            for (site_id, &(x, y)) in sites.iter().enumerate() {
                for (s, &az) in DU_SECTOR_AZIMUTHS_DEG.iter().enumerate() {
                    cells.push(Cell {
                        cell_id: (site_id * 3 + s) as u32,
                        site_id: site_id as u32,
                        x_m: x,
                        y_m: y,
                        height_m: DU_BS_HEIGHT_M,
                        azimuth_deg: az,
                        downtilt_deg: DU_DOWNTILT_DEG,
                    });
                }
            }
            // Cluster translation vectors for the 7-site hex cluster.
            let u1 = (2.5 * DU_ISD_M, 0.5 * 3f64.sqrt() * DU_ISD_M);
            let u2 = (0.5 * DU_ISD_M, 1.5 * 3f64.sqrt() * DU_ISD_M);
            let u3 = (u1.0 - u2.0, u1.1 - u2.1);
            let wrap_shifts = vec![
                (0.0, 0.0),
                u1,
                (-u1.0, -u1.1),
                u2,
                (-u2.0, -u2.1),
                u3,
                (-u3.0, -u3.1),
            ];
            Layout {
                kind,
                cells,
                isd_m: DU_ISD_M,
                wraparound,
                wrap_shifts,
            }
        }
        DeploymentKind::Inh => {
            // Two rows of six, centered in the hall, 10 m in from each wall.
            let mut cells = Vec::with_capacity(12);
            let xs: Vec<f64> = (0..6).map(|i| -50.0 + 20.0 * i as f64).collect();
            let ys = [-10.0, 10.0];
            let mut id = 0;
            for &y in &ys {
                for &x in &xs {
                    cells.push(Cell {
                        cell_id: id,
                        site_id: id,
                        x_m: x,
                        y_m: y,
                        height_m: INH_BS_HEIGHT_M,
                        azimuth_deg: 0.0,
                        downtilt_deg: 90.0,
                    });
                    id += 1;
                }
            }
            Layout {
                kind,
                cells,
                isd_m: INH_ISD_M,
                wraparound: false,
                wrap_shifts: vec![(0.0, 0.0)],
            }
        }
    }
}

/// Point-in-hexagon test for the site cell: flat-to-flat width `isd`,
/// flat sides facing the six neighbor sites (normals at 0/60/120 degrees).
fn in_site_hex(dx: f64, dy: f64, isd: f64) -> bool {
    let half = isd / 2.0 + 1e-9;
    for k in 0..3 {
        let a = (60.0 * k as f64).to_radians();
        if (dx * a.cos() + dy * a.sin()).abs() > half {
            return false;
        }
    }
    true
}

/// Angular distance in degrees wrapped to [-180, 180).
pub fn wrap_angle_deg(a: f64) -> f64 {
    let mut r = a % 360.0;
    if r >= 180.0 {
        r -= 360.0;
    } else if r < -180.0 {
        r += 360.0;
    }
    r
}

fn in_sector(dx: f64, dy: f64, azimuth_deg: f64) -> bool {
    let ang = dy.atan2(dx).to_degrees();
    wrap_angle_deg(ang - azimuth_deg).abs() <= 60.0
}

/// InH per-cell drop rectangle: the hall partitioned into 12 equal 20 x 25 m
/// regions around each ceiling cell.
fn inh_cell_rect(cell: &Cell) -> (f64, f64, f64, f64) {
    let x0 = cell.x_m - 10.0;
    let x1 = cell.x_m + 10.0;
    let (y0, y1) = if cell.y_m < 0.0 {
        (-25.0, 0.0)
    } else {
        (0.0, 25.0)
    };
    (x0, x1, y0, y1)
}

/// Drop `n_per_cell` UEs uniformly in every cell's geographic area.
///
/// In DU each UE is outdoor with probability 0.2, otherwise indoor on a
/// uniform floor 1..=8 at 1.5 m above the floor slab. InH UEs are always
/// indoor at 1.5 m. Placement draws come from one stream per cell, so a
/// layout's drop is reproducible cell by cell.
pub fn drop_users(layout: &Layout, n_per_cell: u32, seed: u64) -> Vec<UserTerminal> {
    let mut ues = Vec::with_capacity(layout.cells.len() * n_per_cell as usize);
    let mut ue_id = 0u32;
    for cell in &layout.cells {
        let mut rng = RngStream::derive(seed, StreamPurpose::Drop, &[cell.cell_id as u64]);
        for _ in 0..n_per_cell {
            let (x, y) = sample_position_in_cell(layout, cell, &mut rng);
            let (indoor, floor, z) = match layout.kind {
                DeploymentKind::Du => {
                    if rng.chance(DU_OUTDOOR_PROB) {
                        (false, None, UE_BODY_HEIGHT_M)
                    } else {
                        let floor = 1 + (rng.uniform() * DU_MAX_FLOOR as f64) as u8;
                        let floor = floor.min(DU_MAX_FLOOR);
                        let z = UE_BODY_HEIGHT_M + DU_FLOOR_HEIGHT_M * (floor - 1) as f64;
                        (true, Some(floor), z)
                    }
                }
                DeploymentKind::Inh => (true, None, UE_BODY_HEIGHT_M),
            };
            ues.push(UserTerminal {
                ue_id,
                x_m: x,
                y_m: y,
                z_m: z,
                indoor,
                floor,
                speed_kmh: UE_SPEED_KMH,
                drop_cell: cell.cell_id,
                serving_cell: None,
            });
            ue_id += 1;
        }
    }
    ues
}

fn sample_position_in_cell(layout: &Layout, cell: &Cell, rng: &mut RngStream) -> (f64, f64) {
    match layout.kind {
        DeploymentKind::Du => {
            // Rejection sample inside hex AND sector wedge AND min distance.
            let r = layout.isd_m / 3f64.sqrt();
            loop {
                let dx = rng.uniform_range(-r, r);
                let dy = rng.uniform_range(-r, r);
                let d2 = dx * dx + dy * dy;
                if d2 < DU_MIN_BS_UE_DIST_M * DU_MIN_BS_UE_DIST_M {
                    continue;
                }
                if in_site_hex(dx, dy, layout.isd_m) && in_sector(dx, dy, cell.azimuth_deg) {
                    return (cell.x_m + dx, cell.y_m + dy);
                }
            }
        }
        DeploymentKind::Inh => {
            let (x0, x1, y0, y1) = inh_cell_rect(cell);
            (rng.uniform_range(x0, x1), rng.uniform_range(y0, y1))
        }
    }
}

/// Serving cell by RSRP argmax; ties resolve to the lowest cell id.
///
/// `rsrp_dbm(cell_id)` must be defined for every cell of the layout.
pub fn select_cell(n_cells: usize, rsrp_dbm: impl Fn(u32) -> f64) -> Result<u32> {
    if n_cells == 0 {
        return Err(SimError::run(
            "cell selection over empty layout".to_string(),
        ));
    }
    let mut best_id = 0u32;
    let mut best = f64::NEG_INFINITY;
    for cell_id in 0..n_cells as u32 {
        let v = rsrp_dbm(cell_id);
        if v > best {
            best = v;
            best_id = cell_id;
        }
    }
    Ok(best_id)
}
