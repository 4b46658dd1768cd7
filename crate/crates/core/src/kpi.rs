//! KPI computation: per-packet delay records, satisfied-UE status, the
//! network satisfaction fraction, and the capacity search.
//!
//! Boundary discipline is fixed by definition: a UE is satisfied when its
//! on-time fraction strictly exceeds X percent per evaluated stream, the
//! network passes when at least Y percent of UEs are satisfied.

use crate::error::{Result, SimError};
use crate::traffic::Direction;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Outcome of one application packet.
#[derive(Debug, Clone, Serialize)]
pub struct DelayRecord {
    pub ue_id: u32,
    pub stream_idx: u32,
    pub packet_id: u64,
    pub direction: Direction,
    pub size_bytes: u32,
    pub arrival_ms: f64,
    /// Completion instant; `None` when unfinished at the horizon.
    pub completion_ms: Option<f64>,
    /// Air-interface delay; infinite when unfinished.
    pub delay_ms: f64,
    pub on_time: bool,
    /// Transport blocks that carried bytes of this packet.
    pub n_tx: u32,
}

impl DelayRecord {
    /// Record for a completed packet. On-time keeps the inclusive
    /// boundary: `delay <= pdb` counts.
    #[allow(clippy::too_many_arguments)]
    pub fn completed(
        ue_id: u32,
        stream_idx: u32,
        packet_id: u64,
        direction: Direction,
        size_bytes: u32,
        arrival_ms: f64,
        completion_ms: f64,
        pdb_ms: f64,
        n_tx: u32,
    ) -> Self {
        let delay = completion_ms - arrival_ms;
        Self {
            ue_id,
            stream_idx,
            packet_id,
            direction,
            size_bytes,
            arrival_ms,
            completion_ms: Some(completion_ms),
            delay_ms: delay,
            on_time: delay <= pdb_ms,
            n_tx,
        }
    }

    /// Record for a packet that never finished: counted as late.
    pub fn unfinished(
        ue_id: u32,
        stream_idx: u32,
        packet_id: u64,
        direction: Direction,
        size_bytes: u32,
        arrival_ms: f64,
        n_tx: u32,
    ) -> Self {
        Self {
            ue_id,
            stream_idx,
            packet_id,
            direction,
            size_bytes,
            arrival_ms,
            completion_ms: None,
            delay_ms: f64::INFINITY,
            on_time: false,
            n_tx,
        }
    }
}

/// Which of a UE's streams must individually meet the X threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerStreamRule {
    /// Every stream with traffic must pass.
    #[default]
    AllStreams,
    /// Only DL video streams are evaluated.
    DlVideoOnly,
}

/// Satisfaction thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatisfactionConfig {
    /// Per-UE on-time percentage threshold (strict).
    pub x_percent: f64,
    /// Network satisfied-UE percentage threshold (inclusive).
    pub y_percent: f64,
    pub per_stream_rule: PerStreamRule,
    /// DL-video stream indices when the rule is `DlVideoOnly`.
    pub dl_video_streams: Vec<u32>,
}

impl Default for SatisfactionConfig {
    fn default() -> Self {
        Self {
            x_percent: 99.0,
            y_percent: 90.0,
            per_stream_rule: PerStreamRule::AllStreams,
            dl_video_streams: Vec::new(),
        }
    }
}

impl SatisfactionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.x_percent && self.x_percent <= 100.0) {
            return Err(SimError::config(format!(
                "X must be in (0, 100], got {}",
                self.x_percent
            )));
        }
        if !(0.0 < self.y_percent && self.y_percent <= 100.0) {
            return Err(SimError::config(format!(
                "Y must be in (0, 100], got {}",
                self.y_percent
            )));
        }
        Ok(())
    }
}

/// Per-UE satisfaction: every evaluated stream must have strictly more
/// than X% of its packets delivered within the PDB. Returns `None` when
/// the UE has no evaluated packets (excluded from the drop).
pub fn ue_satisfied(records: &[&DelayRecord], cfg: &SatisfactionConfig) -> Option<bool> {
    let mut per_stream: BTreeMap<u32, (u64, u64)> = BTreeMap::new();
    for r in records {
        if cfg.per_stream_rule == PerStreamRule::DlVideoOnly
            && !cfg.dl_video_streams.contains(&r.stream_idx)
        {
            continue;
        }
        let e = per_stream.entry(r.stream_idx).or_insert((0, 0));
        e.1 += 1;
        if r.on_time {
            e.0 += 1;
        }
    }
    if per_stream.is_empty() {
        return None;
    }
    Some(
        per_stream
            .values()
            .all(|&(on_time, total)| on_time as f64 * 100.0 > cfg.x_percent * total as f64),
    )
}

/// Pooled fraction of satisfied UEs. `flags` carries one satisfaction flag
/// per evaluated UE (already pooled across drops/seeds).
pub fn satisfied_fraction(flags: &[bool]) -> f64 {
    if flags.is_empty() {
        return 0.0;
    }
    flags.iter().filter(|&&s| s).count() as f64 / flags.len() as f64
}

/// One point of the satisfaction curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub n_per_cell: u32,
    pub direction: Direction,
    pub satisfied: u64,
    pub total: u64,
    pub fraction: f64,
}

/// Capacity search output: the per-direction and combined capacity plus
/// the full satisfaction curve it was read from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityResult {
    pub capacity_dl: u32,
    pub capacity_ul: u32,
    /// min(DL, UL).
    pub capacity_combined: u32,
    pub curve: Vec<CurvePoint>,
    pub y_percent: f64,
}

/// Per-direction satisfaction counts of one simulation run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RunSatisfaction {
    pub dl_satisfied: u64,
    pub dl_total: u64,
    pub ul_satisfied: u64,
    pub ul_total: u64,
}

impl RunSatisfaction {
    pub fn merge(&mut self, other: &RunSatisfaction) {
        self.dl_satisfied += other.dl_satisfied;
        self.dl_total += other.dl_total;
        self.ul_satisfied += other.ul_satisfied;
        self.ul_total += other.ul_total;
    }
}

/// Group delay records per UE and count per-direction satisfaction.
/// A UE's DL (UL) verdict pools all its DL (UL) streams under the X rule.
pub fn run_satisfaction(records: &[DelayRecord], cfg: &SatisfactionConfig) -> RunSatisfaction {
    let mut by_ue: BTreeMap<u32, Vec<&DelayRecord>> = BTreeMap::new();
    for r in records {
        by_ue.entry(r.ue_id).or_default().push(r);
    }
    let mut out = RunSatisfaction::default();
    for recs in by_ue.values() {
        let dl: Vec<&DelayRecord> = recs
            .iter()
            .copied()
            .filter(|r| r.direction == Direction::Dl)
            .collect();
        let ul: Vec<&DelayRecord> = recs
            .iter()
            .copied()
            .filter(|r| r.direction == Direction::Ul)
            .collect();
        if let Some(sat) = ue_satisfied(&dl, cfg) {
            out.dl_total += 1;
            if sat {
                out.dl_satisfied += 1;
            }
        }
        if let Some(sat) = ue_satisfied(&ul, cfg) {
            out.ul_total += 1;
            if sat {
                out.ul_satisfied += 1;
            }
        }
    }
    out
}

/// Search the capacity over an ascending UE-per-cell range.
///
/// `evaluate(n)` must return the pooled satisfaction counts over all seeds
/// for that load. Every n in the range is evaluated (the satisfaction
/// curve need not be monotone under random drops); per-direction capacity
/// is the largest n whose pooled fraction is at least Y percent.
pub fn capacity_search(
    n_range: &[u32],
    cfg: &SatisfactionConfig,
    mut evaluate: impl FnMut(u32) -> Result<RunSatisfaction>,
) -> Result<CapacityResult> {
    cfg.validate()?;
    if n_range.is_empty() {
        return Err(SimError::config(
            "capacity search over empty n range".to_string(),
        ));
    }
    if !n_range.windows(2).all(|w| w[0] < w[1]) {
        return Err(SimError::config(
            "n range must be strictly ascending".to_string(),
        ));
    }
    let y = cfg.y_percent / 100.0;
    let mut curve = Vec::new();
    let mut capacity_dl = 0;
    let mut capacity_ul = 0;
    for &n in n_range {
        let s = evaluate(n)?;
        let dl_frac = if s.dl_total > 0 {
            s.dl_satisfied as f64 / s.dl_total as f64
        } else {
            0.0
        };
        let ul_frac = if s.ul_total > 0 {
            s.ul_satisfied as f64 / s.ul_total as f64
        } else {
            0.0
        };
        // Inclusive Y threshold: "at least Y%".
        if s.dl_total > 0 && dl_frac >= y {
            capacity_dl = n;
        }
        if s.ul_total > 0 && ul_frac >= y {
            capacity_ul = n;
        }
        curve.push(CurvePoint {
            n_per_cell: n,
            direction: Direction::Dl,
            satisfied: s.dl_satisfied,
            total: s.dl_total,
            fraction: dl_frac,
        });
        curve.push(CurvePoint {
            n_per_cell: n,
            direction: Direction::Ul,
            satisfied: s.ul_satisfied,
            total: s.ul_total,
            fraction: ul_frac,
        });
    }
    Ok(CapacityResult {
        capacity_dl,
        capacity_ul,
        capacity_combined: capacity_dl.min(capacity_ul),
        curve,
        y_percent: cfg.y_percent,
    })
}
