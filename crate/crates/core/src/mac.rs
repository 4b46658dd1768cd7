//! MAC abstraction: the DDDSU slot grid, PDCP segmentation buffers,
//! proportional-fair scheduling, and HARQ retransmission timing.

use crate::error::{Result, SimError};
use crate::traffic::Direction;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// TDD slot kind in the repeating DDDSU pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SlotKind {
    D,
    S,
    U,
}

impl SlotKind {
    /// Link direction carried by this slot. The special slot carries DL on
    /// a reduced symbol budget.
    pub fn direction(&self) -> Direction {
        match self {
            SlotKind::D | SlotKind::S => Direction::Dl,
            SlotKind::U => Direction::Ul,
        }
    }
}

const PATTERN: [SlotKind; 5] = [
    SlotKind::D,
    SlotKind::D,
    SlotKind::D,
    SlotKind::S,
    SlotKind::U,
];

/// Slot kind of an absolute slot index: `pattern[i mod 5]`.
pub fn slot_type(slot: u64) -> SlotKind {
    PATTERN[(slot % 5) as usize]
}

/// First slot at or after `from` whose kind carries `direction`.
pub fn next_slot_for_direction(direction: Direction, from: u64) -> u64 {
    for s in from..from + 5 {
        if slot_type(s).direction() == direction {
            return s;
        }
    }
    unreachable!("DDDSU contains both directions");
}

/// Retransmission slot of a transport block that failed in `failed_slot`.
pub fn harq_retx_slot(direction: Direction, failed_slot: u64, rtt_slots: u64) -> u64 {
    next_slot_for_direction(direction, failed_slot + rtt_slots)
}

/// MAC-layer knobs. The HARQ RTT, retransmission cap, and PF time constant
/// are declared engineering defaults, all overridable from the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacParams {
    pub harq_rtt_slots: u64,
    pub max_retx: u32,
    /// PF averaging time constant in ms.
    pub pf_time_constant_ms: f64,
    /// Data symbols per D/U slot (2 of 14 reserved for control).
    pub data_symbols_d: f64,
    /// Data symbols of the special slot: 10-of-14 DL fraction minus control.
    pub data_symbols_s: f64,
    pub p_fail_first: f64,
    pub p_fail_retx: f64,
    /// UL buffer knowledge lags by this many slots (BSR granularity).
    pub bsr_delay_slots: u64,
    /// Drop packets already past their deadline instead of delivering late.
    pub discard_late: bool,
    /// CSI measurement period in ms.
    pub csi_period_ms: f64,
}

impl MacParams {
    pub fn default_for_band(band: crate::radio::FrBand) -> Self {
        Self {
            harq_rtt_slots: match band {
                crate::radio::FrBand::Fr1 => 10,
                crate::radio::FrBand::Fr2 => 12,
            },
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

    pub fn data_symbols(&self, kind: SlotKind) -> f64 {
        match kind {
            SlotKind::D | SlotKind::U => self.data_symbols_d,
            SlotKind::S => self.data_symbols_s,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_fail_first) || !(0.0..=1.0).contains(&self.p_fail_retx) {
            return Err(SimError::config(
                "HARQ failure probabilities must be in [0,1]",
            ));
        }
        if self.data_symbols_d <= 0.0 || self.data_symbols_d > 14.0 || self.data_symbols_s < 0.0 {
            return Err(SimError::config("data symbol budget out of range"));
        }
        if self.pf_time_constant_ms <= 0.0 {
            return Err(SimError::config("PF time constant must be positive"));
        }
        Ok(())
    }
}

/// A segment of one application packet waiting in the RLC queue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub stream_idx: u32,
    pub packet_seq: u64,
    pub bytes: u64,
}

/// Per-UE FIFO of packet segments for one direction. Packets of different
/// streams interleave in arrival order; within a stream order is FIFO.
#[derive(Debug, Clone, Default)]
pub struct UeQueue {
    segments: VecDeque<Segment>,
    queued_bytes: u64,
}

impl UeQueue {
    pub fn queued_bytes(&self) -> u64 {
        self.queued_bytes
    }

    pub fn queued_bytes_for_stream(&self, stream_idx: u32) -> u64 {
        self.segments
            .iter()
            .filter(|s| s.stream_idx == stream_idx)
            .map(|s| s.bytes)
            .sum()
    }
}

/// RLC buffers of all UEs for one link direction.
#[derive(Debug, Clone)]
pub struct RlcBuffer {
    queues: Vec<UeQueue>,
}

impl RlcBuffer {
    pub fn new(n_ues: usize) -> Self {
        Self {
            queues: vec![UeQueue::default(); n_ues],
        }
    }

    pub fn queue(&self, ue: u32) -> &UeQueue {
        &self.queues[ue as usize]
    }

    /// Enqueue a whole application packet as one segment stream.
    pub fn enqueue_packet(
        &mut self,
        ue: u32,
        stream_idx: u32,
        packet_seq: u64,
        bytes: u64,
    ) -> Result<()> {
        if bytes == 0 {
            return Err(SimError::run(format!(
                "zero-byte packet rejected (ue {ue}, stream {stream_idx}, seq {packet_seq})"
            )));
        }
        let q = &mut self.queues[ue as usize];
        q.segments.push_back(Segment {
            stream_idx,
            packet_seq,
            bytes,
        });
        q.queued_bytes += bytes;
        Ok(())
    }

    /// Pull up to `max_bytes` from the head of the queue for one transport
    /// block, splitting the head segment if needed. Returns the carried
    /// pieces in queue order.
    pub fn pop_bytes(&mut self, ue: u32, max_bytes: u64) -> Vec<Segment> {
        let q = &mut self.queues[ue as usize];
        let mut out = Vec::new();
        let mut budget = max_bytes;
        while budget > 0 {
            let Some(head) = q.segments.front_mut() else {
                break;
            };
            if head.bytes <= budget {
                budget -= head.bytes;
                q.queued_bytes -= head.bytes;
                out.push(*head);
                q.segments.pop_front();
            } else {
                head.bytes -= budget;
                q.queued_bytes -= budget;
                out.push(Segment {
                    stream_idx: head.stream_idx,
                    packet_seq: head.packet_seq,
                    bytes: budget,
                });
                budget = 0;
            }
        }
        out
    }

    /// Return pieces to the head of the queue in their original order
    /// (HARQ exhaustion path: data is re-scheduled, never dropped).
    pub fn push_front(&mut self, ue: u32, pieces: &[Segment]) {
        let q = &mut self.queues[ue as usize];
        for seg in pieces.iter().rev() {
            q.queued_bytes += seg.bytes;
            q.segments.push_front(*seg);
        }
    }

    /// Distinct (stream, packet) pairs currently queued for a UE, in
    /// queue order.
    pub fn queued_packets(&self, ue: u32) -> Vec<(u32, u64)> {
        let mut out: Vec<(u32, u64)> = Vec::new();
        for s in &self.queues[ue as usize].segments {
            if !out.contains(&(s.stream_idx, s.packet_seq)) {
                out.push((s.stream_idx, s.packet_seq));
            }
        }
        out
    }

    /// Remove every queued segment of one packet (late-discard path).
    pub fn discard_packet(&mut self, ue: u32, stream_idx: u32, packet_seq: u64) -> u64 {
        let q = &mut self.queues[ue as usize];
        let mut removed = 0;
        q.segments.retain(|s| {
            if s.stream_idx == stream_idx && s.packet_seq == packet_seq {
                removed += s.bytes;
                false
            } else {
                true
            }
        });
        q.queued_bytes -= removed;
        removed
    }
}

/// Proportional-fair state: per-UE exponentially averaged served rate.
#[derive(Debug, Clone)]
pub struct PfState {
    avg_rate_bps: Vec<f64>,
    tau_slots: f64,
}

/// Initialization floor keeping the PF ratio finite before any service.
const PF_RATE_FLOOR_BPS: f64 = 1_000.0;

impl PfState {
    pub fn new(n_ues: usize, pf_time_constant_ms: f64, slot_ms: f64) -> Self {
        Self {
            avg_rate_bps: vec![PF_RATE_FLOOR_BPS; n_ues],
            tau_slots: (pf_time_constant_ms / slot_ms).max(1.0),
        }
    }

    pub fn avg_rate_bps(&self, ue: u32) -> f64 {
        self.avg_rate_bps[ue as usize]
    }

    pub fn metric(&self, ue: u32, achievable_rate_bps: f64) -> f64 {
        achievable_rate_bps / self.avg_rate_bps[ue as usize]
    }

    /// EWMA update, run every slot of the relevant direction.
    pub fn update(&mut self, ue: u32, served_bits: u64, slot_ms: f64) {
        let served_rate = served_bits as f64 / (slot_ms / 1000.0);
        let a = 1.0 / self.tau_slots;
        let t = &mut self.avg_rate_bps[ue as usize];
        *t = ((1.0 - a) * *t + a * served_rate).max(PF_RATE_FLOOR_BPS);
    }
}

/// Scheduling input for one UE: buffered demand and the achievable
/// spectral efficiency from the latest CSI.
#[derive(Debug, Clone, Copy)]
pub struct PfCandidate {
    pub ue: u32,
    pub need_bits: u64,
    pub se: f64,
}

/// One scheduling grant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grant {
    pub ue: u32,
    pub n_prb: u32,
    /// Payload capacity of the transport block on this grant.
    pub tb_capacity_bits: u64,
}

/// Greedy proportional-fair allocation: UEs ranked by
/// `achievable rate / average served rate`, each granted PRBs up to its
/// buffer need until the slot's PRBs run out. Single user per PRB; ties
/// break to the lower UE id.
pub fn pf_schedule(
    candidates: &[PfCandidate],
    pf: &PfState,
    total_prb: u32,
    data_symbols: f64,
    slot_ms: f64,
) -> Vec<Grant> {
    let mut ranked: Vec<&PfCandidate> = candidates
        .iter()
        .filter(|c| c.need_bits > 0 && c.se > 0.0)
        .collect();
    let rate =
        |c: &PfCandidate| c.se * 12.0 * data_symbols * total_prb.max(1) as f64 / (slot_ms / 1000.0);
    ranked.sort_by(|a, b| {
        pf.metric(b.ue, rate(b))
            .partial_cmp(&pf.metric(a.ue, rate(a)))
            .unwrap()
            .then(a.ue.cmp(&b.ue))
    });

    let mut grants = Vec::new();
    let mut remaining = total_prb;
    for cand in ranked {
        if remaining == 0 {
            break;
        }
        let per_prb_bits = cand.se * 12.0 * data_symbols;
        if per_prb_bits <= 0.0 {
            continue;
        }
        let needed = (cand.need_bits as f64 / per_prb_bits).ceil() as u32;
        let n_prb = needed.min(remaining);
        let capacity = crate::radio::transport_block_bits(cand.se, n_prb, data_symbols);
        if capacity == 0 {
            continue;
        }
        grants.push(Grant {
            ue: cand.ue,
            n_prb,
            tb_capacity_bits: capacity,
        });
        remaining -= n_prb;
    }
    grants
}

/// An in-flight transport block awaiting (re)transmission outcome.
#[derive(Debug, Clone)]
pub struct HarqProcess {
    pub ue: u32,
    pub direction: Direction,
    pub n_prb: u32,
    pub payload_bytes: u64,
    pub pieces: Vec<Segment>,
    /// 1 on the first transmission.
    pub attempt: u32,
    pub next_slot: u64,
    /// Stable key for outcome draws, fixed at TB creation.
    pub draw_key: u64,
}
