//! Large-scale radio abstraction: pathloss and shadowing, RSRP, per-slot
//! wideband SINR with inter-cell interference, and the mapping from SINR to
//! transport-block capacity.
//!
//! The channel is deliberately slot-level: pathloss plus lognormal
//! shadowing, no fast fading. MIMO and beamforming are folded into
//! configurable effective gains (a serving-link beam gain and an
//! interference suppression factor), so absolute capacity is trend-level
//! while orderings between setups are preserved.

use crate::deployment::{Cell, DeploymentKind, Layout, UserTerminal};
use crate::stochastics::{RngStream, StreamPurpose};
use serde::{Deserialize, Serialize};

pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn lin_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// NR frequency range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrBand {
    Fr1,
    Fr2,
}

impl std::fmt::Display for FrBand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FrBand::Fr1 => write!(f, "FR1"),
            FrBand::Fr2 => write!(f, "FR2"),
        }
    }
}

/// Radio numerology and power/gain assumptions for one carrier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrProfile {
    pub band: FrBand,
    pub carrier_ghz: f64,
    pub scs_khz: f64,
    pub bandwidth_mhz: f64,
    pub n_prb: u32,
    pub slot_ms: f64,
    pub bs_noise_figure_db: f64,
    pub ue_noise_figure_db: f64,
    pub bs_tx_power_dbm: f64,
    pub ue_tx_power_dbm: f64,
    pub bs_antenna_gain_dbi: f64,
    pub ue_antenna_gain_dbi: f64,
    /// Effective beamforming gain applied to the serving link only.
    pub serving_beam_gain_db: f64,
    /// Linear scaling applied to non-serving (interfering) links.
    pub interference_suppression: f64,
    /// Open-loop UL power control: target received power per PRB.
    pub ul_p0_prb_dbm: f64,
    /// Open-loop UL power control: pathloss compensation factor.
    pub ul_alpha: f64,
}

impl FrProfile {
    /// FR1: 4 GHz, 30 kHz SCS, 100 MHz (273 PRB), 0.5 ms slots.
    pub fn fr1(deployment: DeploymentKind) -> Self {
        Self {
            band: FrBand::Fr1,
            carrier_ghz: 4.0,
            scs_khz: 30.0,
            bandwidth_mhz: 100.0,
            n_prb: 273,
            slot_ms: 0.5,
            bs_noise_figure_db: 5.0,
            ue_noise_figure_db: 9.0,
            bs_tx_power_dbm: match deployment {
                DeploymentKind::Du => 51.0,
                DeploymentKind::Inh => 31.0,
            },
            ue_tx_power_dbm: 23.0,
            bs_antenna_gain_dbi: 5.0,
            ue_antenna_gain_dbi: 0.0,
            serving_beam_gain_db: 13.0,
            interference_suppression: 0.3,
            ul_p0_prb_dbm: -100.0,
            ul_alpha: 1.0,
        }
    }

    /// FR2: 30 GHz, 120 kHz SCS, 100 MHz (66 PRB), 0.125 ms slots.
    pub fn fr2(deployment: DeploymentKind) -> Self {
        Self {
            band: FrBand::Fr2,
            carrier_ghz: 30.0,
            scs_khz: 120.0,
            bandwidth_mhz: 100.0,
            n_prb: 66,
            slot_ms: 0.125,
            bs_noise_figure_db: 7.0,
            ue_noise_figure_db: 13.0,
            bs_tx_power_dbm: match deployment {
                DeploymentKind::Du => 51.0,
                DeploymentKind::Inh => 24.0,
            },
            ue_tx_power_dbm: 23.0,
            bs_antenna_gain_dbi: 5.0,
            ue_antenna_gain_dbi: 5.0,
            serving_beam_gain_db: 14.0,
            interference_suppression: 0.2,
            ul_p0_prb_dbm: -100.0,
            ul_alpha: 1.0,
        }
    }

    pub fn for_band(band: FrBand, deployment: DeploymentKind) -> Self {
        match band {
            FrBand::Fr1 => Self::fr1(deployment),
            FrBand::Fr2 => Self::fr2(deployment),
        }
    }

    /// Per-PRB transmit power density of the BS.
    pub fn bs_prb_power_dbm(&self) -> f64 {
        self.bs_tx_power_dbm - lin_to_db(self.n_prb as f64)
    }

    /// Thermal noise over one PRB plus the receiver noise figure.
    pub fn noise_per_prb_dbm(&self, receiver_nf_db: f64) -> f64 {
        -174.0 + lin_to_db(self.scs_khz * 1000.0 * 12.0) + receiver_nf_db
    }
}

/// Large-scale channel model family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathlossModel {
    /// Urban macro, for the DU deployment.
    Uma,
    /// Indoor hotspot (open office), for the InH deployment.
    InhOffice,
}

impl PathlossModel {
    pub fn for_deployment(kind: DeploymentKind) -> Self {
        match kind {
            DeploymentKind::Du => PathlossModel::Uma,
            DeploymentKind::Inh => PathlossModel::InhOffice,
        }
    }

    /// Minimum 2D distance the formulas are evaluated at.
    pub fn min_distance_m(&self) -> f64 {
        match self {
            PathlossModel::Uma => 10.0,
            PathlossModel::InhOffice => 1.0,
        }
    }
}

/// Line-of-sight probability at a 2D distance.
pub fn los_probability(model: PathlossModel, d2d_m: f64, ue_height_m: f64) -> f64 {
    match model {
        PathlossModel::Uma => {
            if d2d_m <= 18.0 {
                1.0
            } else {
                let base = 18.0 / d2d_m + (-d2d_m / 63.0).exp() * (1.0 - 18.0 / d2d_m);
                let c = if ue_height_m <= 13.0 {
                    0.0
                } else {
                    ((ue_height_m - 13.0) / 10.0).powf(1.5)
                };
                let uplift = 1.0 + c * 1.25 * (d2d_m / 100.0).powi(3) * (-d2d_m / 150.0).exp();
                (base * uplift).min(1.0)
            }
        }
        PathlossModel::InhOffice => {
            if d2d_m <= 5.0 {
                1.0
            } else if d2d_m <= 49.0 {
                (-(d2d_m - 5.0) / 70.8).exp()
            } else {
                0.54 * (-(d2d_m - 49.0) / 211.7).exp()
            }
        }
    }
}

/// Distance/frequency pathloss in dB for a resolved LOS state.
///
/// Distances below the model's validity range are clamped to the minimum;
/// the caller counts clamps for reporting.
pub fn pathloss_db(
    model: PathlossModel,
    fc_ghz: f64,
    d2d_m: f64,
    d3d_m: f64,
    bs_height_m: f64,
    ue_height_m: f64,
    los: bool,
) -> f64 {
    let d2d = d2d_m.max(model.min_distance_m());
    let d3d = d3d_m.max(d2d);
    match model {
        PathlossModel::Uma => {
            let pl_los = {
                // Breakpoint with 1 m effective environment height.
                let dbp = 4.0 * (bs_height_m - 1.0) * (ue_height_m - 1.0).max(0.0) * fc_ghz * 1e9
                    / 299_792_458.0;
                if d2d <= dbp {
                    28.0 + 22.0 * d3d.log10() + 20.0 * fc_ghz.log10()
                } else {
                    28.0 + 40.0 * d3d.log10() + 20.0 * fc_ghz.log10()
                        - 9.0 * (dbp * dbp + (bs_height_m - ue_height_m).powi(2)).log10()
                }
            };
            if los {
                pl_los
            } else {
                let pl_nlos =
                    13.54 + 39.08 * d3d.log10() + 20.0 * fc_ghz.log10() - 0.6 * (ue_height_m - 1.5);
                pl_los.max(pl_nlos)
            }
        }
        PathlossModel::InhOffice => {
            let pl_los = 32.4 + 17.3 * d3d.log10() + 20.0 * fc_ghz.log10();
            if los {
                pl_los
            } else {
                let pl_nlos = 17.3 + 38.3 * d3d.log10() + 24.9 * fc_ghz.log10();
                pl_los.max(pl_nlos)
            }
        }
    }
}

/// Lognormal shadowing standard deviation in dB.
pub fn shadowing_sigma_db(model: PathlossModel, los: bool) -> f64 {
    match (model, los) {
        (PathlossModel::Uma, true) => 4.0,
        (PathlossModel::Uma, false) => 6.0,
        (PathlossModel::InhOffice, true) => 3.0,
        (PathlossModel::InhOffice, false) => 8.03,
    }
}

/// Frequency-dependent wall loss of the low/high-loss building model.
pub fn o2i_wall_loss_db(fc_ghz: f64, high_loss: bool) -> f64 {
    let glass = 2.0 + 0.2 * fc_ghz;
    let irr_glass = 23.0 + 0.3 * fc_ghz;
    let concrete = 5.0 + 4.0 * fc_ghz;
    if high_loss {
        5.0 - lin_to_db(0.7 * db_to_lin(-irr_glass) + 0.3 * db_to_lin(-concrete))
    } else {
        5.0 - lin_to_db(0.3 * db_to_lin(-glass) + 0.7 * db_to_lin(-concrete))
    }
}

/// Parabolic sector antenna envelope; disabled for ceiling-mounted InH cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorPattern {
    pub enabled: bool,
    pub hpbw_h_deg: f64,
    pub hpbw_v_deg: f64,
    pub max_att_db: f64,
}

impl SectorPattern {
    pub fn default_for(kind: DeploymentKind) -> Self {
        Self {
            enabled: kind == DeploymentKind::Du,
            hpbw_h_deg: 65.0,
            hpbw_v_deg: 65.0,
            max_att_db: 30.0,
        }
    }

    /// Attenuation in dB (>= 0) toward a UE seen at the given horizontal
    /// offset from boresight and elevation angle below the horizon.
    pub fn attenuation_db(&self, az_off_deg: f64, elev_down_deg: f64, downtilt_deg: f64) -> f64 {
        if !self.enabled {
            return 0.0;
        }
        let ah = 12.0 * (az_off_deg / self.hpbw_h_deg).powi(2);
        let av = 12.0 * ((elev_down_deg - downtilt_deg) / self.hpbw_v_deg).powi(2);
        (ah.min(self.max_att_db) + av.min(self.max_att_db)).min(self.max_att_db)
    }
}

/// Channel assembly knobs beyond the FR profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub pattern: SectorPattern,
    pub shadowing_enabled: bool,
    /// Correlation of shadowing across sites for one UE.
    pub site_correlation: f64,
    /// Use the high-loss building model for O2I penetration.
    pub o2i_high_loss: bool,
}

impl ChannelParams {
    pub fn default_for(kind: DeploymentKind) -> Self {
        Self {
            pattern: SectorPattern::default_for(kind),
            shadowing_enabled: true,
            site_correlation: 0.5,
            o2i_high_loss: false,
        }
    }
}

/// Large-scale state of one (cell, UE) link. DL and UL share it (TDD).
#[derive(Debug, Clone, Serialize)]
pub struct LinkState {
    pub pathloss_db: f64,
    pub shadowing_db: f64,
    pub penetration_db: f64,
    pub pattern_att_db: f64,
    pub los: bool,
    /// -pathloss - shadowing - penetration - pattern + antenna gains.
    pub coupling_gain_db: f64,
}

/// Immutable matrix of link states for one drop.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    n_ues: usize,
    links: Vec<LinkState>,
    clamped_links: u64,
}

impl ChannelModel {
    /// Compute every (cell, UE) link. Shadowing and LOS draw per (site, UE)
    /// so co-sited sectors share them; a per-UE common component gives the
    /// configured cross-site correlation.
    pub fn init(
        layout: &Layout,
        ues: &[UserTerminal],
        profile: &FrProfile,
        params: &ChannelParams,
        seed: u64,
    ) -> Self {
        let model = PathlossModel::for_deployment(layout.kind);
        let n_cells = layout.cells.len();
        let mut links = Vec::with_capacity(n_cells * ues.len());
        let mut clamped = 0u64;

        // Per-UE draws shared across all links of that UE.
        let mut common_shadow = Vec::with_capacity(ues.len());
        let mut o2i_extra = Vec::with_capacity(ues.len());
        for ue in ues {
            let mut rng = RngStream::derive(seed, StreamPurpose::ChannelCommon, &[ue.ue_id as u64]);
            common_shadow.push(rng.standard_normal());
            let mut prng = RngStream::derive(seed, StreamPurpose::Penetration, &[ue.ue_id as u64]);
            // Indoor depth 0..25 m into the building.
            o2i_extra.push(0.5 * prng.uniform_range(0.0, 25.0));
        }

        // Per-(site, UE) draws shared by co-sited sectors.
        let mut site_draws: std::collections::BTreeMap<(u32, u32), (bool, f64)> =
            std::collections::BTreeMap::new();
        for cell in &layout.cells {
            for ue in ues {
                site_draws
                    .entry((cell.site_id, ue.ue_id))
                    .or_insert_with(|| {
                        let mut rng = RngStream::derive(
                            seed,
                            StreamPurpose::Channel,
                            &[cell.site_id as u64, ue.ue_id as u64],
                        );
                        let d2d =
                            layout.distance_2d(&site_cell(layout, cell.site_id), ue.x_m, ue.y_m);
                        let p_los = los_probability(model, d2d, ue.z_m);
                        let los = rng.chance(p_los);
                        let z_site = rng.standard_normal();
                        (los, z_site)
                    });
            }
        }

        for cell in &layout.cells {
            for ue in ues {
                let (dx, dy) = layout.displacement(cell.x_m, cell.y_m, ue.x_m, ue.y_m);
                let mut d2d = (dx * dx + dy * dy).sqrt();
                if d2d < model.min_distance_m() {
                    clamped += 1;
                    d2d = model.min_distance_m();
                }
                let dz = cell.height_m - ue.z_m;
                let d3d = (d2d * d2d + dz * dz).sqrt();
                let (los, z_site) = site_draws[&(cell.site_id, ue.ue_id)];

                let pl = pathloss_db(
                    model,
                    profile.carrier_ghz,
                    d2d,
                    d3d,
                    cell.height_m,
                    ue.z_m,
                    los,
                );

                let shadow = if params.shadowing_enabled {
                    let rho = params.site_correlation.clamp(0.0, 1.0);
                    let z =
                        rho.sqrt() * common_shadow[ue.ue_id as usize] + (1.0 - rho).sqrt() * z_site;
                    shadowing_sigma_db(model, los) * z
                } else {
                    0.0
                };

                let penetration = if layout.kind == DeploymentKind::Du && ue.indoor {
                    o2i_wall_loss_db(profile.carrier_ghz, params.o2i_high_loss)
                        + o2i_extra[ue.ue_id as usize]
                } else {
                    0.0
                };

                let pattern_att = {
                    let az = dy.atan2(dx).to_degrees();
                    let az_off = crate::deployment::wrap_angle_deg(az - cell.azimuth_deg);
                    let elev_down = dz.atan2(d2d).to_degrees();
                    params
                        .pattern
                        .attenuation_db(az_off, elev_down, cell.downtilt_deg)
                };

                let coupling = -pl - shadow - penetration - pattern_att
                    + profile.bs_antenna_gain_dbi
                    + profile.ue_antenna_gain_dbi;
                links.push(LinkState {
                    pathloss_db: pl,
                    shadowing_db: shadow,
                    penetration_db: penetration,
                    pattern_att_db: pattern_att,
                    los,
                    coupling_gain_db: coupling,
                });
            }
        }
        Self {
            n_ues: ues.len(),
            links,
            clamped_links: clamped,
        }
    }

    pub fn link(&self, cell_id: u32, ue_id: u32) -> &LinkState {
        &self.links[cell_id as usize * self.n_ues + ue_id as usize]
    }

    pub fn clamped_links(&self) -> u64 {
        self.clamped_links
    }
}

fn site_cell(layout: &Layout, site_id: u32) -> Cell {
    layout
        .cells
        .iter()
        .find(|c| c.site_id == site_id)
        .expect("site exists")
        .clone()
}

/// RSRP in dBm: per-resource-element BS power plus coupling gain.
pub fn rsrp_dbm(profile: &FrProfile, link: &LinkState) -> f64 {
    profile.bs_tx_power_dbm - lin_to_db(profile.n_prb as f64 * 12.0) + link.coupling_gain_db
}

/// Wideband DL SINR (per PRB) for a UE served by `serving`, with binary
/// cell activity: a cell interferes in a slot iff it is transmitting.
pub fn dl_sinr_db(
    profile: &FrProfile,
    channel: &ChannelModel,
    serving: u32,
    ue: u32,
    cell_active: &[bool],
) -> f64 {
    let p_prb = profile.bs_prb_power_dbm();
    let s_dbm = p_prb + channel.link(serving, ue).coupling_gain_db + profile.serving_beam_gain_db;
    let mut interference = 0.0;
    for (cell_id, &active) in cell_active.iter().enumerate() {
        if cell_id as u32 == serving || !active {
            continue;
        }
        let c = channel.link(cell_id as u32, ue).coupling_gain_db;
        interference += db_to_lin(p_prb + c) * profile.interference_suppression;
    }
    let noise = db_to_lin(profile.noise_per_prb_dbm(profile.ue_noise_figure_db));
    s_dbm - lin_to_db(interference + noise)
}

/// Open-loop UL transmit power: `P0 + 10 log10(n_prb) + alpha * PL`,
/// capped at the UE maximum. `effective_pl_db` is the pathloss the power
/// control compensates (coupling gain negated).
pub fn ul_tx_power_dbm(profile: &FrProfile, effective_pl_db: f64, n_prb_alloc: u32) -> f64 {
    let wanted = profile.ul_p0_prb_dbm
        + lin_to_db(n_prb_alloc.max(1) as f64)
        + profile.ul_alpha * effective_pl_db;
    wanted.min(profile.ue_tx_power_dbm)
}

/// One co-scheduled uplink interferer as seen by a victim BS.
#[derive(Debug, Clone, Copy)]
pub struct UlInterferer {
    pub ue_id: u32,
    pub tx_power_dbm: f64,
    pub n_prb: u32,
}

/// Wideband UL SINR (per PRB) at the serving BS. Interfering UEs are
/// weighted by their allocation fraction of the band (expected overlap of
/// frequency allocations).
pub fn ul_sinr_db(
    profile: &FrProfile,
    channel: &ChannelModel,
    serving: u32,
    ue: u32,
    tx_power_dbm: f64,
    n_prb_alloc: u32,
    interferers: &[UlInterferer],
) -> f64 {
    let coupling = channel.link(serving, ue).coupling_gain_db;
    let s_dbm = tx_power_dbm - lin_to_db(n_prb_alloc.max(1) as f64)
        + coupling
        + profile.serving_beam_gain_db;
    let mut interference = 0.0;
    for itf in interferers {
        if itf.ue_id == ue {
            continue;
        }
        let c = channel.link(serving, itf.ue_id).coupling_gain_db;
        let per_prb = itf.tx_power_dbm - lin_to_db(itf.n_prb.max(1) as f64) + c;
        let overlap = itf.n_prb.min(profile.n_prb) as f64 / profile.n_prb as f64;
        interference += db_to_lin(per_prb) * overlap * profile.interference_suppression;
    }
    let noise = db_to_lin(profile.noise_per_prb_dbm(profile.bs_noise_figure_db));
    s_dbm - lin_to_db(interference + noise)
}

/// Attenuated-Shannon link abstraction, capped at the 256-QAM top MCS.
pub const SE_ETA_DEFAULT: f64 = 0.75;
pub const SE_MAX_DEFAULT: f64 = 8.0 * 948.0 / 1024.0;

pub fn spectral_efficiency(sinr_db: f64, eta: f64, se_max: f64) -> f64 {
    if sinr_db == f64::NEG_INFINITY {
        return 0.0;
    }
    (eta * (1.0 + db_to_lin(sinr_db)).log2()).min(se_max)
}

/// Payload bits of a transport block spanning `n_prb_alloc` PRBs for
/// `data_symbols` OFDM data symbols.
pub fn transport_block_bits(se: f64, n_prb_alloc: u32, data_symbols: f64) -> u64 {
    (se * n_prb_alloc as f64 * 12.0 * data_symbols).floor() as u64
}

/// Draw a transmission outcome at the given failure probability.
/// Returns `true` on success.
pub fn first_tx_outcome(rng: &mut RngStream, p_fail: f64) -> bool {
    !rng.chance(p_fail)
}
