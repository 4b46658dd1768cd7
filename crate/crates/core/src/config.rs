//! Hierarchical run configuration: the TOML-backed [`SimConfig`] with
//! per-section defaults, `--set section.key=value` overrides, and the
//! resolution step that turns it into concrete engine parameters.
//!
//! Unknown keys anywhere in the file or in an override are hard errors.

use crate::cdrx::{DrxConfig, PowerTable};
use crate::deployment::DeploymentKind;
use crate::error::{Result, SimError};
use crate::kpi::{PerStreamRule, SatisfactionConfig};
use crate::mac::MacParams;
use crate::radio::{ChannelParams, FrBand, FrProfile, SectorPattern};
use crate::stochastics::Truncation;
use crate::traffic::{Service, SessionOptions, SessionTemplate, StreamKind};
use serde::{Deserialize, Serialize};

/// What to simulate: deployment, carrier, service mix, and load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSection {
    pub deployment: DeploymentKind,
    pub band: FrBand,
    pub service: Service,
    pub n_ue_per_cell: u32,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            deployment: DeploymentKind::Inh,
            band: FrBand::Fr1,
            service: Service::Vr,
            n_ue_per_cell: 4,
        }
    }
}

/// Traffic model knobs (rates in Mbit/s at this layer).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrafficSection {
    pub fps: f64,
    pub dl_video_rate_mbps: f64,
    pub ul_video_rate_mbps: f64,
    pub multi_stream_video: bool,
    pub include_audio: bool,
    pub include_ul_audio: bool,
    pub audio_rate_mbps: f64,
    pub ul_video_jitter: bool,
    pub wide_jitter_window: bool,
    pub truncation: Truncation,
}

impl Default for TrafficSection {
    fn default() -> Self {
        Self {
            fps: 60.0,
            dl_video_rate_mbps: 30.0,
            ul_video_rate_mbps: 10.0,
            multi_stream_video: false,
            include_audio: false,
            include_ul_audio: false,
            audio_rate_mbps: 0.756,
            ul_video_jitter: false,
            wide_jitter_window: false,
            truncation: Truncation::Rejection,
        }
    }
}

/// Radio overrides. `None` keeps the band/deployment preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadioSection {
    pub bs_tx_power_dbm: Option<f64>,
    pub bs_antenna_gain_dbi: Option<f64>,
    pub ue_antenna_gain_dbi: Option<f64>,
    pub serving_beam_gain_db: Option<f64>,
    pub interference_suppression: Option<f64>,
    pub ul_p0_prb_dbm: f64,
    pub ul_alpha: f64,
    /// Attenuation factor of the Shannon link abstraction.
    pub se_eta: f64,
    /// Spectral-efficiency cap (256-QAM, code rate 948/1024).
    pub se_max: f64,
    /// Geographic wraparound; defaults on for DU, meaningless for InH.
    pub wraparound: Option<bool>,
    pub shadowing: bool,
    pub site_correlation: f64,
    pub o2i_high_loss: bool,
    /// Tri-sector antenna envelope; defaults on for DU, off for InH.
    pub sector_pattern: Option<bool>,
    pub pattern_hpbw_h_deg: f64,
    pub pattern_hpbw_v_deg: f64,
    pub pattern_max_att_db: f64,
}

impl Default for RadioSection {
    fn default() -> Self {
        Self {
            bs_tx_power_dbm: None,
            bs_antenna_gain_dbi: None,
            ue_antenna_gain_dbi: None,
            serving_beam_gain_db: None,
            interference_suppression: None,
            ul_p0_prb_dbm: -100.0,
            ul_alpha: 1.0,
            se_eta: 0.75,
            se_max: 8.0 * 948.0 / 1024.0,
            wraparound: None,
            shadowing: true,
            site_correlation: 0.5,
            o2i_high_loss: false,
            sector_pattern: None,
            pattern_hpbw_h_deg: 65.0,
            pattern_hpbw_v_deg: 65.0,
            pattern_max_att_db: 30.0,
        }
    }
}

/// MAC overrides. The HARQ RTT default is band-dependent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MacSection {
    pub harq_rtt_slots: Option<u64>,
    pub max_retx: u32,
    pub pf_time_constant_ms: f64,
    pub data_symbols_d: f64,
    pub data_symbols_s: f64,
    pub p_fail_first: f64,
    pub p_fail_retx: f64,
    pub bsr_delay_slots: u64,
    pub discard_late: bool,
    pub csi_period_ms: f64,
}

impl Default for MacSection {
    fn default() -> Self {
        Self {
            harq_rtt_slots: None,
            max_retx: 3,
            pf_time_constant_ms: 100.0,
            data_symbols_d: 12.0,
            data_symbols_s: 8.0,
            p_fail_first: 0.10,
            p_fail_retx: 0.01,
            bsr_delay_slots: 1,
            discard_late: false,
            csi_period_ms: 2.0,
        }
    }
}

/// DRX scheme of the run (Always-ON when disabled).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DrxSection {
    pub enabled: bool,
    pub long_cycle_ms: f64,
    pub on_duration_ms: f64,
    pub inactivity_timer_ms: f64,
}

impl Default for DrxSection {
    fn default() -> Self {
        Self {
            enabled: false,
            long_cycle_ms: 10.0,
            on_duration_ms: 5.0,
            inactivity_timer_ms: 5.0,
        }
    }
}

/// KPI thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KpiSection {
    pub x_percent: f64,
    pub y_percent: f64,
    pub per_stream_rule: PerStreamRule,
}

impl Default for KpiSection {
    fn default() -> Self {
        Self {
            x_percent: 99.0,
            y_percent: 90.0,
            per_stream_rule: PerStreamRule::AllStreams,
        }
    }
}

/// Execution horizon, seeds, and output switches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    /// Total simulated time in seconds, warm-up included.
    pub horizon_s: f64,
    /// KPI warm-up exclusion window in seconds.
    pub warmup_s: f64,
    pub seeds: Vec<u64>,
    pub out_dir: String,
    pub emit_packet_trace: bool,
    pub emit_link_dump: bool,
    /// Worker threads for sweeps; 0 picks the available parallelism.
    pub threads: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            horizon_s: 6.0,
            warmup_s: 1.0,
            seeds: vec![1, 2, 3],
            out_dir: "results".to_string(),
            emit_packet_trace: false,
            emit_link_dump: false,
            threads: 0,
        }
    }
}

/// Full run configuration, one section per subsystem.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub scenario: ScenarioSection,
    pub traffic: TrafficSection,
    pub radio: RadioSection,
    pub mac: MacSection,
    pub drx: DrxSection,
    pub power: PowerTable,
    pub kpi: KpiSection,
    pub run: RunSection,
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e| SimError::config(format!("config parse error: {e}")))?;
        Self::from_table(table)
    }

    pub fn from_table(table: toml::Table) -> Result<Self> {
        table
            .try_into()
            .map_err(|e| SimError::config(format!("invalid config: {e}")))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Apply `section.key=value` overrides on top of this config.
    /// Unknown sections or keys fail hard.
    pub fn with_overrides(&self, sets: &[String]) -> Result<Self> {
        let mut table = toml::Table::try_from(self)
            .map_err(|e| SimError::config(format!("echo failed: {e}")))?;
        for set in sets {
            let (path, raw) = set
                .split_once('=')
                .ok_or_else(|| SimError::config(format!("override '{set}' is not key=value")))?;
            let value = parse_override_value(raw.trim());
            let keys: Vec<&str> = path.trim().split('.').collect();
            if keys.len() != 2 {
                return Err(SimError::config(format!(
                    "override key '{path}' must be section.key"
                )));
            }
            let section = table
                .get_mut(keys[0])
                .and_then(|v| v.as_table_mut())
                .ok_or_else(|| SimError::config(format!("unknown config section '{}'", keys[0])))?;
            // Top-level key must already exist or deserialization would
            // accept a typo silently for Option-typed fields.
            if !section.contains_key(keys[1]) {
                return Err(SimError::config(format!(
                    "unknown config key '{}.{}'",
                    keys[0], keys[1]
                )));
            }
            section.insert(keys[1].to_string(), value);
        }
        Self::from_table(table)
    }

    /// Check cross-field invariants and produce the concrete parameters.
    pub fn resolve(&self) -> Result<SimParams> {
        if self.run.horizon_s <= self.run.warmup_s {
            return Err(SimError::config(format!(
                "horizon {} s must exceed warm-up {} s",
                self.run.horizon_s, self.run.warmup_s
            )));
        }
        if self.run.seeds.is_empty() {
            return Err(SimError::config("at least one seed required".to_string()));
        }

        let deployment = self.scenario.deployment;
        let band = self.scenario.band;
        let mut profile = FrProfile::for_band(band, deployment);
        if let Some(v) = self.radio.bs_tx_power_dbm {
            profile.bs_tx_power_dbm = v;
        }
        if let Some(v) = self.radio.bs_antenna_gain_dbi {
            profile.bs_antenna_gain_dbi = v;
        }
        if let Some(v) = self.radio.ue_antenna_gain_dbi {
            profile.ue_antenna_gain_dbi = v;
        }
        if let Some(v) = self.radio.serving_beam_gain_db {
            profile.serving_beam_gain_db = v;
        }
        if let Some(v) = self.radio.interference_suppression {
            profile.interference_suppression = v;
        }
        profile.ul_p0_prb_dbm = self.radio.ul_p0_prb_dbm;
        profile.ul_alpha = self.radio.ul_alpha;

        let channel_params = ChannelParams {
            pattern: SectorPattern {
                enabled: self
                    .radio
                    .sector_pattern
                    .unwrap_or(deployment == DeploymentKind::Du),
                hpbw_h_deg: self.radio.pattern_hpbw_h_deg,
                hpbw_v_deg: self.radio.pattern_hpbw_v_deg,
                max_att_db: self.radio.pattern_max_att_db,
            },
            shadowing_enabled: self.radio.shadowing,
            site_correlation: self.radio.site_correlation,
            o2i_high_loss: self.radio.o2i_high_loss,
        };

        let mut mac = MacParams::default_for_band(band);
        if let Some(v) = self.mac.harq_rtt_slots {
            mac.harq_rtt_slots = v;
        }
        mac.max_retx = self.mac.max_retx;
        mac.pf_time_constant_ms = self.mac.pf_time_constant_ms;
        mac.data_symbols_d = self.mac.data_symbols_d;
        mac.data_symbols_s = self.mac.data_symbols_s;
        mac.p_fail_first = self.mac.p_fail_first;
        mac.p_fail_retx = self.mac.p_fail_retx;
        mac.bsr_delay_slots = self.mac.bsr_delay_slots;
        mac.discard_late = self.mac.discard_late;
        mac.csi_period_ms = self.mac.csi_period_ms;
        mac.validate()?;

        let session_opts = SessionOptions {
            fps: self.traffic.fps,
            dl_video_rate_bps: self.traffic.dl_video_rate_mbps * 1e6,
            ul_video_rate_bps: self.traffic.ul_video_rate_mbps * 1e6,
            multi_stream_video: self.traffic.multi_stream_video,
            include_audio: self.traffic.include_audio,
            include_ul_audio: self.traffic.include_ul_audio,
            audio_rate_bps: self.traffic.audio_rate_mbps * 1e6,
            ul_video_jitter: self.traffic.ul_video_jitter,
            wide_jitter_window: self.traffic.wide_jitter_window,
            truncation: self.traffic.truncation,
        };
        let template = SessionTemplate::build(self.scenario.service, &session_opts)?;

        let drx = if self.drx.enabled {
            DrxConfig::new(
                self.drx.long_cycle_ms,
                self.drx.on_duration_ms,
                self.drx.inactivity_timer_ms,
            )?
        } else {
            DrxConfig::always_on()
        };

        let dl_video_streams: Vec<u32> = template
            .streams
            .iter()
            .enumerate()
            .filter(|(_, s)| {
                s.kind == StreamKind::Video && s.direction == crate::traffic::Direction::Dl
            })
            .map(|(i, _)| i as u32)
            .collect();
        let sat = SatisfactionConfig {
            x_percent: self.kpi.x_percent,
            y_percent: self.kpi.y_percent,
            per_stream_rule: self.kpi.per_stream_rule,
            dl_video_streams,
        };
        sat.validate()?;

        Ok(SimParams {
            deployment,
            band,
            service: self.scenario.service,
            n_ue_per_cell: self.scenario.n_ue_per_cell,
            profile,
            channel_params,
            wraparound: self
                .radio
                .wraparound
                .unwrap_or(deployment == DeploymentKind::Du),
            mac,
            template,
            drx,
            power_table: self.power.clone(),
            satisfaction: sat,
            se_eta: self.radio.se_eta,
            se_max: self.radio.se_max,
            horizon_ms: self.run.horizon_s * 1000.0,
            warmup_ms: self.run.warmup_s * 1000.0,
            emit_packet_trace: self.run.emit_packet_trace,
            emit_link_dump: self.run.emit_link_dump,
        })
    }

    /// Compact tag for result file names:
    /// deployment, band, service, DL rate, load, seed.
    pub fn file_tag(&self, n_per_cell: u32, seed: u64) -> String {
        format!(
            "{}_{}_{}_r{}_n{}_s{}",
            match self.scenario.deployment {
                DeploymentKind::Du => "du",
                DeploymentKind::Inh => "inh",
            },
            match self.scenario.band {
                FrBand::Fr1 => "fr1",
                FrBand::Fr2 => "fr2",
            },
            match self.scenario.service {
                Service::Vr => "vr",
                Service::Ar => "ar",
                Service::Cg => "cg",
            },
            self.traffic.dl_video_rate_mbps,
            n_per_cell,
            seed
        )
    }
}

fn parse_override_value(raw: &str) -> toml::Value {
    if let Ok(b) = raw.parse::<bool>() {
        return toml::Value::Boolean(b);
    }
    if let Ok(i) = raw.parse::<i64>() {
        return toml::Value::Integer(i);
    }
    if let Ok(f) = raw.parse::<f64>() {
        return toml::Value::Float(f);
    }
    if raw.starts_with('[') {
        if let Ok(v) = raw.parse::<toml::Value>() {
            return v;
        }
    }
    toml::Value::String(raw.trim_matches('"').to_string())
}

/// Fully resolved parameters for one simulation instance.
#[derive(Debug, Clone)]
pub struct SimParams {
    pub deployment: DeploymentKind,
    pub band: FrBand,
    pub service: Service,
    pub n_ue_per_cell: u32,
    pub profile: FrProfile,
    pub channel_params: ChannelParams,
    pub wraparound: bool,
    pub mac: MacParams,
    pub template: SessionTemplate,
    pub drx: DrxConfig,
    pub power_table: PowerTable,
    pub satisfaction: SatisfactionConfig,
    pub se_eta: f64,
    pub se_max: f64,
    pub horizon_ms: f64,
    pub warmup_ms: f64,
    pub emit_packet_trace: bool,
    pub emit_link_dump: bool,
}

impl SimParams {
    pub fn n_slots(&self) -> u64 {
        (self.horizon_ms / self.profile.slot_ms).round() as u64
    }

    pub fn csi_period_slots(&self) -> u64 {
        ((self.mac.csi_period_ms / self.profile.slot_ms).round() as u64).max(1)
    }
}
