//! The deterministic slot loop: one simulation instance from layout
//! construction through KPI extraction.
//!
//! Phase order within a slot is fixed and documented because KPI timing
//! depends on it: arrivals -> DRX eligibility -> scheduling (HARQ
//! retransmissions first, then proportional fair) -> transmission outcomes
//! and delivery -> CSI measurement -> PF averaging -> power attribution.
//! Identical `(config, seed)` produce bit-identical results.

use crate::cdrx::{attribute_slot_power, drx_is_eligible, drx_on_grant, DrxState, PowerLedger};
use crate::config::SimParams;
use crate::deployment::{build_layout_with, drop_users, select_cell, UserTerminal};
use crate::error::{Result, SimError};
use crate::kpi::{run_satisfaction, ue_satisfied, DelayRecord, RunSatisfaction};
use crate::mac::{
    harq_retx_slot, pf_schedule, slot_type, HarqProcess, PfCandidate, PfState, RlcBuffer, SlotKind,
};
use crate::radio::{
    dl_sinr_db, first_tx_outcome, rsrp_dbm, spectral_efficiency, ul_sinr_db, ul_tx_power_dbm,
    ChannelModel, UlInterferer,
};
use crate::stochastics::{stream_id, RngStream, StreamPurpose};
use crate::traffic::{generate_session, Direction};
use serde::Serialize;

/// Consistency counters collected during the run.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunAudit {
    /// Payload bytes that would have crossed slot-direction discipline.
    pub dl_bytes_in_u_slots: u64,
    pub ul_bytes_in_d_slots: u64,
    /// Grants issued to UEs that were not DRX-eligible (must stay 0).
    pub grants_to_sleeping: u64,
    /// Per-stream `enqueued == delivered + queued + in-flight + discarded`.
    pub byte_conservation_ok: bool,
    pub enqueued_bytes: u64,
    pub delivered_bytes: u64,
    pub queued_bytes_at_end: u64,
    pub inflight_bytes_at_end: u64,
    pub discarded_bytes: u64,
    /// Every UE ledger covers every slot exactly once.
    pub ledger_slots_ok: bool,
    pub tb_first_tx: u64,
    pub tb_first_fail: u64,
    pub tb_retx: u64,
    pub tb_retx_fail: u64,
}

/// Per-UE outcome summary.
#[derive(Debug, Clone, Serialize)]
pub struct UeSummary {
    pub ue_id: u32,
    pub serving_cell: u32,
    pub indoor: bool,
    pub dl_on_time: u64,
    pub dl_total: u64,
    pub dl_satisfied: Option<bool>,
    pub ul_on_time: u64,
    pub ul_total: u64,
    pub ul_satisfied: Option<bool>,
    pub avg_power_units: f64,
    pub slots_active: u64,
    pub slots_asleep: u64,
}

/// One row of the optional per-link calibration dump.
#[derive(Debug, Clone, Serialize)]
pub struct LinkRow {
    pub cell_id: u32,
    pub ue_id: u32,
    pub pathloss_db: f64,
    pub shadowing_db: f64,
    pub los: bool,
    pub rsrp_dbm: f64,
}

/// Everything one simulation instance produces.
#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub seed: u64,
    pub n_per_cell: u32,
    /// One record per generated packet, in (ue, stream, seq) order.
    pub records: Vec<DelayRecord>,
    /// Warm-up-trimmed satisfaction counts per direction.
    pub satisfaction: RunSatisfaction,
    pub ue_summaries: Vec<UeSummary>,
    /// Mean per-slot power over all UEs, relative units.
    pub avg_power_units: f64,
    /// Warm-up-trimmed packet counts.
    pub on_time_packets: u64,
    pub total_packets: u64,
    pub audit: RunAudit,
    pub clamped_links: u64,
    pub link_dump: Option<Vec<LinkRow>>,
    pub wallclock_s: f64,
}

struct PacketStatus {
    size_bytes: u32,
    arrival_ms: f64,
    remaining_bytes: u64,
    completion_ms: Option<f64>,
    n_tx: u32,
    tb_counter: u32,
    enqueued: bool,
    discarded: bool,
}

struct UeRuntime {
    serving_cell: u32,
    drx: DrxState,
    sleep_start_ms: Option<f64>,
    csi_dl_db: f64,
    csi_ul_db: f64,
    last_csi_dl_ms: f64,
    last_csi_ul_ms: f64,
    ledger: PowerLedger,
}

/// Run one simulation instance.
pub fn run_simulation(params: &SimParams, n_per_cell: u32, seed: u64) -> Result<RunResult> {
    let started = std::time::Instant::now();
    let layout = build_layout_with(params.deployment, params.wraparound);
    let ues = drop_users(&layout, n_per_cell, seed);
    let n_ues = ues.len();
    let n_cells = layout.cells.len();
    let profile = &params.profile;
    let mac = &params.mac;
    let slot_ms = profile.slot_ms;
    let n_slots = params.n_slots();

    let channel = ChannelModel::init(&layout, &ues, profile, &params.channel_params, seed);

    // RSRP-based cell selection.
    let mut serving = Vec::with_capacity(n_ues);
    for ue in &ues {
        serving.push(select_cell(n_cells, |c| {
            rsrp_dbm(profile, channel.link(c, ue.ue_id))
        })?);
    }
    let mut cell_ues: Vec<Vec<u32>> = vec![Vec::new(); n_cells];
    for (i, &cell) in serving.iter().enumerate() {
        cell_ues[cell as usize].push(i as u32);
    }

    // Pre-generate traffic and bucket arrivals by schedulable slot.
    let n_streams = params.template.streams.len();
    let mut packets: Vec<Vec<crate::traffic::Packet>> = Vec::with_capacity(n_ues * n_streams);
    let mut status: Vec<Vec<PacketStatus>> = Vec::with_capacity(n_ues * n_streams);
    let mut arrivals_by_slot: Vec<Vec<(u32, u32, u64)>> = vec![Vec::new(); n_slots as usize];
    for ue in 0..n_ues as u32 {
        let session = generate_session(&params.template, ue, seed, params.horizon_ms)?;
        for (stream_idx, sa) in session.into_iter().enumerate() {
            let mut st = Vec::with_capacity(sa.packets.len());
            for p in &sa.packets {
                let slot = ((p.arrival_ms / slot_ms).ceil().max(0.0)) as u64;
                if slot < n_slots {
                    arrivals_by_slot[slot as usize].push((ue, stream_idx as u32, p.packet_id));
                }
                st.push(PacketStatus {
                    size_bytes: p.size_bytes,
                    arrival_ms: p.arrival_ms,
                    remaining_bytes: p.size_bytes as u64,
                    completion_ms: None,
                    n_tx: 0,
                    tb_counter: 0,
                    enqueued: false,
                    discarded: false,
                });
            }
            packets.push(sa.packets);
            status.push(st);
        }
    }
    let sidx = |ue: u32, stream: u32| ue as usize * n_streams + stream as usize;

    // Runtime state.
    let mut rt: Vec<UeRuntime> = (0..n_ues as u32)
        .map(|ue| {
            let anchor = if params.drx.enabled {
                let mut rng = RngStream::derive(seed, StreamPurpose::Drx, &[ue as u64]);
                rng.uniform_range(0.0, params.drx.long_cycle_ms)
            } else {
                0.0
            };
            let link = channel.link(serving[ue as usize], ue);
            let snr_dl =
                profile.bs_prb_power_dbm() + link.coupling_gain_db + profile.serving_beam_gain_db
                    - profile.noise_per_prb_dbm(profile.ue_noise_figure_db);
            let rx_ul = (profile.ul_p0_prb_dbm)
                .min(profile.ue_tx_power_dbm + link.coupling_gain_db)
                + profile.serving_beam_gain_db;
            let snr_ul = rx_ul - profile.noise_per_prb_dbm(profile.bs_noise_figure_db);
            UeRuntime {
                serving_cell: serving[ue as usize],
                drx: DrxState::new(anchor),
                sleep_start_ms: None,
                csi_dl_db: snr_dl,
                csi_ul_db: snr_ul,
                last_csi_dl_ms: f64::NEG_INFINITY,
                last_csi_ul_ms: f64::NEG_INFINITY,
                ledger: PowerLedger::default(),
            }
        })
        .collect();

    let mut dl_buf = RlcBuffer::new(n_ues);
    let mut ul_buf = RlcBuffer::new(n_ues);
    let mut ul_known: Vec<u64> = vec![0; n_ues];
    let mut pf_dl = PfState::new(n_ues, mac.pf_time_constant_ms, slot_ms);
    let mut pf_ul = PfState::new(n_ues, mac.pf_time_constant_ms, slot_ms);
    let mut pending: Vec<HarqProcess> = Vec::new();
    let mut audit = RunAudit {
        byte_conservation_ok: true,
        ledger_slots_ok: true,
        ..RunAudit::default()
    };
    // Per-(ue, stream) byte accounting.
    let mut enqueued_bytes: Vec<u64> = vec![0; n_ues * n_streams];
    let mut delivered_bytes: Vec<u64> = vec![0; n_ues * n_streams];
    let mut discarded_bytes: Vec<u64> = vec![0; n_ues * n_streams];

    for slot in 0..n_slots {
        let now = slot as f64 * slot_ms;
        let kind = slot_type(slot);
        let direction = kind.direction();
        let data_symbols = mac.data_symbols(kind);

        // Phase 1: arrivals become schedulable at this slot boundary.
        for &(ue, stream, seq) in &arrivals_by_slot[slot as usize] {
            let size = status[sidx(ue, stream)][seq as usize].size_bytes as u64;
            let dir = params.template.streams[stream as usize].direction;
            let buf = match dir {
                Direction::Dl => &mut dl_buf,
                Direction::Ul => &mut ul_buf,
            };
            buf.enqueue_packet(ue, stream, seq, size)?;
            status[sidx(ue, stream)][seq as usize].enqueued = true;
            enqueued_bytes[sidx(ue, stream)] += size;
        }

        // Optional late-packet discard of queued data past its deadline.
        if mac.discard_late {
            for ue in 0..n_ues as u32 {
                for buf in [&mut dl_buf, &mut ul_buf] {
                    for (stream, seq) in buf.queued_packets(ue) {
                        let pdb = params.template.streams[stream as usize].pdb_ms;
                        let idx = sidx(ue, stream);
                        let st = &status[idx][seq as usize];
                        if st.arrival_ms + pdb < now && !st.discarded {
                            let removed = buf.discard_packet(ue, stream, seq);
                            if removed > 0 {
                                discarded_bytes[idx] += removed;
                                status[idx][seq as usize].discarded = true;
                            }
                        }
                    }
                }
            }
        }

        // Phase 2: DRX eligibility at the slot boundary.
        let eligible: Vec<bool> = (0..n_ues)
            .map(|ue| drx_is_eligible(&params.drx, &rt[ue].drx, now))
            .collect();

        // Phase 3: scheduling, cell by cell. HARQ retransmissions reserve
        // PRBs first, then proportional fair fills the rest.
        let mut tx_now: Vec<usize> = Vec::new();
        let mut new_tbs: Vec<HarqProcess> = Vec::new();
        let mut dl_granted = vec![false; n_ues];
        let mut ul_granted = vec![false; n_ues];
        let mut restart_inactivity = vec![false; n_ues];

        for cell in 0..n_cells as u32 {
            let mut remaining = profile.n_prb;

            for (i, p) in pending.iter().enumerate() {
                if remaining == 0 {
                    break;
                }
                if p.direction != direction
                    || p.next_slot > slot
                    || rt[p.ue as usize].serving_cell != cell
                {
                    continue;
                }
                if !eligible[p.ue as usize] {
                    continue;
                }
                if p.n_prb <= remaining {
                    remaining -= p.n_prb;
                    tx_now.push(i);
                    match direction {
                        Direction::Dl => {
                            dl_granted[p.ue as usize] = true;
                            restart_inactivity[p.ue as usize] = true;
                        }
                        Direction::Ul => {
                            ul_granted[p.ue as usize] = true;
                            if carries_video(&params.template, &p.pieces) {
                                restart_inactivity[p.ue as usize] = true;
                            }
                        }
                    }
                }
            }

            // New transmissions.
            let pf = match direction {
                Direction::Dl => &pf_dl,
                Direction::Ul => &pf_ul,
            };
            let mut cands: Vec<PfCandidate> = Vec::new();
            for &ue in &cell_ues[cell as usize] {
                if !eligible[ue as usize] {
                    continue;
                }
                let (need_bytes, se) = match direction {
                    Direction::Dl => (
                        dl_buf.queue(ue).queued_bytes(),
                        spectral_efficiency(
                            rt[ue as usize].csi_dl_db,
                            params.se_eta,
                            params.se_max,
                        ),
                    ),
                    Direction::Ul => (
                        ul_buf.queue(ue).queued_bytes().min(ul_known[ue as usize]),
                        spectral_efficiency(
                            rt[ue as usize].csi_ul_db,
                            params.se_eta,
                            params.se_max,
                        ),
                    ),
                };
                cands.push(PfCandidate {
                    ue,
                    need_bits: need_bytes * 8,
                    se,
                });
            }
            for grant in pf_schedule(&cands, pf, remaining, data_symbols, slot_ms) {
                let ue = grant.ue;
                let cap_bytes = grant.tb_capacity_bits / 8;
                if cap_bytes == 0 {
                    continue;
                }
                let buf = match direction {
                    Direction::Dl => &mut dl_buf,
                    Direction::Ul => &mut ul_buf,
                };
                let pieces = buf.pop_bytes(ue, cap_bytes);
                if pieces.is_empty() {
                    continue;
                }
                let payload: u64 = pieces.iter().map(|s| s.bytes).sum();
                let ul_video_grant = carries_video(&params.template, &pieces);
                let head = pieces[0];
                let tbc = {
                    let st = &mut status[sidx(ue, head.stream_idx)][head.packet_seq as usize];
                    st.tb_counter += 1;
                    st.tb_counter
                };
                let draw_key = stream_id(
                    StreamPurpose::Harq,
                    &[
                        ue as u64,
                        match direction {
                            Direction::Dl => 0,
                            Direction::Ul => 1,
                        },
                        head.stream_idx as u64,
                        head.packet_seq,
                        tbc as u64,
                    ],
                );
                new_tbs.push(HarqProcess {
                    ue,
                    direction,
                    n_prb: grant.n_prb,
                    payload_bytes: payload,
                    pieces,
                    attempt: 1,
                    next_slot: slot,
                    draw_key,
                });
                match direction {
                    Direction::Dl => {
                        dl_granted[ue as usize] = true;
                        restart_inactivity[ue as usize] = true;
                    }
                    Direction::Ul => {
                        ul_granted[ue as usize] = true;
                        if ul_video_grant {
                            restart_inactivity[ue as usize] = true;
                        }
                    }
                }
            }
        }

        // Grants scheduled on PDCCH restart the inactivity timer: every
        // DL grant, and UL grants carrying video. The periodic
        // motion/control updates ride configured-grant-style allocations
        // and do not chain the timer. Granting a sleeping UE is a
        // contract violation, counted (and asserted) here.
        for ue in 0..n_ues {
            if (dl_granted[ue] || ul_granted[ue]) && !eligible[ue] {
                audit.grants_to_sleeping += 1;
            }
            if restart_inactivity[ue] {
                drx_on_grant(&params.drx, &mut rt[ue].drx, now);
            }
        }

        // Phase 4: transmission outcomes, delivery, HARQ bookkeeping.
        let mut ul_transmissions: Vec<UlInterferer> = Vec::new();
        let mut dl_cell_active = vec![false; n_cells];
        let mut served_bits: Vec<u64> = vec![0; n_ues];

        let resolve = |p: &mut HarqProcess,
                       status: &mut Vec<Vec<PacketStatus>>,
                       dl_buf: &mut RlcBuffer,
                       ul_buf: &mut RlcBuffer,
                       delivered_bytes: &mut Vec<u64>,
                       audit: &mut RunAudit|
         -> bool {
            // Returns true when the process is finished (drop it).
            let p_fail = if p.attempt == 1 {
                mac.p_fail_first
            } else {
                mac.p_fail_retx
            };
            if p.attempt == 1 {
                audit.tb_first_tx += 1;
            } else {
                audit.tb_retx += 1;
            }
            for piece in &p.pieces {
                status[sidx(p.ue, piece.stream_idx)][piece.packet_seq as usize].n_tx += 1;
            }
            let mut rng =
                RngStream::derive(seed, StreamPurpose::Harq, &[p.draw_key, p.attempt as u64]);
            let ok = first_tx_outcome(&mut rng, p_fail);
            if ok {
                for piece in &p.pieces {
                    let idx = sidx(p.ue, piece.stream_idx);
                    let st = &mut status[idx][piece.packet_seq as usize];
                    st.remaining_bytes = st.remaining_bytes.saturating_sub(piece.bytes);
                    delivered_bytes[idx] += piece.bytes;
                    if st.remaining_bytes == 0 && st.completion_ms.is_none() && !st.discarded {
                        // Delivery completes at the end of the slot.
                        st.completion_ms = Some(now + slot_ms);
                    }
                }
                true
            } else {
                if p.attempt == 1 {
                    audit.tb_first_fail += 1;
                } else {
                    audit.tb_retx_fail += 1;
                }
                p.attempt += 1;
                if p.attempt > mac.max_retx + 1 {
                    // Exhausted: data goes back to the head of the queue.
                    let buf = match p.direction {
                        Direction::Dl => dl_buf,
                        Direction::Ul => ul_buf,
                    };
                    buf.push_front(p.ue, &p.pieces);
                    true
                } else {
                    p.next_slot = harq_retx_slot(p.direction, slot, mac.harq_rtt_slots);
                    false
                }
            }
        };

        // Transmit: retransmissions picked this slot, then new blocks.
        // Outcome draws are keyed per (TB, attempt), so processing order
        // cannot change results.
        let mut is_tx_now = vec![false; pending.len()];
        for &i in &tx_now {
            is_tx_now[i] = true;
        }
        let transmit = |p: &mut HarqProcess,
                        status: &mut Vec<Vec<PacketStatus>>,
                        dl_buf: &mut RlcBuffer,
                        ul_buf: &mut RlcBuffer,
                        delivered_bytes: &mut Vec<u64>,
                        audit: &mut RunAudit,
                        dl_cell_active: &mut Vec<bool>,
                        ul_transmissions: &mut Vec<UlInterferer>,
                        served_bits: &mut Vec<u64>|
         -> bool {
            match p.direction {
                Direction::Dl => {
                    dl_cell_active[rt[p.ue as usize].serving_cell as usize] = true;
                    if kind == SlotKind::U {
                        audit.dl_bytes_in_u_slots += p.payload_bytes;
                    }
                }
                Direction::Ul => {
                    let link = channel.link(rt[p.ue as usize].serving_cell, p.ue);
                    let tx = ul_tx_power_dbm(profile, -link.coupling_gain_db, p.n_prb);
                    ul_transmissions.push(UlInterferer {
                        ue_id: p.ue,
                        tx_power_dbm: tx,
                        n_prb: p.n_prb,
                    });
                    if kind != SlotKind::U {
                        audit.ul_bytes_in_d_slots += p.payload_bytes;
                    }
                }
            }
            served_bits[p.ue as usize] += p.payload_bytes * 8;
            resolve(p, status, dl_buf, ul_buf, delivered_bytes, audit)
        };

        let previous = std::mem::take(&mut pending);
        for (i, mut p) in previous.into_iter().enumerate() {
            if is_tx_now[i] {
                let done = transmit(
                    &mut p,
                    &mut status,
                    &mut dl_buf,
                    &mut ul_buf,
                    &mut delivered_bytes,
                    &mut audit,
                    &mut dl_cell_active,
                    &mut ul_transmissions,
                    &mut served_bits,
                );
                if !done {
                    pending.push(p);
                }
            } else {
                pending.push(p);
            }
        }
        for mut p in new_tbs {
            let done = transmit(
                &mut p,
                &mut status,
                &mut dl_buf,
                &mut ul_buf,
                &mut delivered_bytes,
                &mut audit,
                &mut dl_cell_active,
                &mut ul_transmissions,
                &mut served_bits,
            );
            if !done {
                pending.push(p);
            }
        }

        // Phase 5: CSI measurement on the slot's realized activity, for
        // active UEs, at the configured period per direction.
        match direction {
            Direction::Dl => {
                for ue in 0..n_ues {
                    if !eligible[ue] || now - rt[ue].last_csi_dl_ms < mac.csi_period_ms {
                        continue;
                    }
                    rt[ue].last_csi_dl_ms = now;
                    rt[ue].csi_dl_db = dl_sinr_db(
                        profile,
                        &channel,
                        rt[ue].serving_cell,
                        ue as u32,
                        &dl_cell_active,
                    );
                }
            }
            Direction::Ul => {
                for ue in 0..n_ues {
                    if !eligible[ue] || now - rt[ue].last_csi_ul_ms < mac.csi_period_ms {
                        continue;
                    }
                    rt[ue].last_csi_ul_ms = now;
                    let cell = rt[ue].serving_cell;
                    let link = channel.link(cell, ue as u32);
                    let ref_tx = ul_tx_power_dbm(profile, -link.coupling_gain_db, 1);
                    let others: Vec<UlInterferer> = ul_transmissions
                        .iter()
                        .filter(|t| rt[t.ue_id as usize].serving_cell != cell)
                        .copied()
                        .collect();
                    rt[ue].csi_ul_db =
                        ul_sinr_db(profile, &channel, cell, ue as u32, ref_tx, 1, &others);
                }
            }
        }

        // Phase 6: PF averages for this direction.
        let pf = match direction {
            Direction::Dl => &mut pf_dl,
            Direction::Ul => &mut pf_ul,
        };
        for (ue, &bits) in served_bits.iter().enumerate() {
            pf.update(ue as u32, bits, slot_ms);
        }

        // Phase 7: power attribution.
        for ue in 0..n_ues {
            let active = eligible[ue];
            let gap = if active {
                rt[ue].sleep_start_ms = None;
                0.0
            } else {
                let start = *rt[ue].sleep_start_ms.get_or_insert(now);
                rt[ue].drx.next_wake_ms(&params.drx, now) - start
            };
            let state = attribute_slot_power(
                active,
                dl_granted[ue],
                ul_granted[ue],
                gap,
                &params.power_table,
            );
            rt[ue].ledger.record(state);
        }

        // Phase 8: the UL scheduler's buffer knowledge for the next slot.
        if mac.bsr_delay_slots == 0 || slot % mac.bsr_delay_slots == 0 {
            for (ue, known) in ul_known.iter_mut().enumerate() {
                *known = ul_buf.queue(ue as u32).queued_bytes();
            }
        }
    }

    // Byte conservation per stream.
    for ue in 0..n_ues as u32 {
        for stream in 0..n_streams as u32 {
            let idx = sidx(ue, stream);
            let dir = params.template.streams[stream as usize].direction;
            let buf = match dir {
                Direction::Dl => &dl_buf,
                Direction::Ul => &ul_buf,
            };
            let queued = buf.queue(ue).queued_bytes_for_stream(stream);
            let inflight: u64 = pending
                .iter()
                .filter(|p| p.ue == ue)
                .flat_map(|p| p.pieces.iter())
                .filter(|s| s.stream_idx == stream)
                .map(|s| s.bytes)
                .sum();
            audit.enqueued_bytes += enqueued_bytes[idx];
            audit.delivered_bytes += delivered_bytes[idx];
            audit.queued_bytes_at_end += queued;
            audit.inflight_bytes_at_end += inflight;
            audit.discarded_bytes += discarded_bytes[idx];
            if enqueued_bytes[idx]
                != delivered_bytes[idx] + queued + inflight + discarded_bytes[idx]
            {
                audit.byte_conservation_ok = false;
            }
        }
    }

    // Delay records for every generated packet.
    let mut records = Vec::new();
    for ue in 0..n_ues as u32 {
        for stream in 0..n_streams as u32 {
            let cfg = &params.template.streams[stream as usize];
            let idx = sidx(ue, stream);
            for (seq, st) in status[idx].iter().enumerate() {
                let rec = match st.completion_ms {
                    Some(done) => DelayRecord::completed(
                        ue,
                        stream,
                        seq as u64,
                        cfg.direction,
                        st.size_bytes,
                        st.arrival_ms,
                        done,
                        cfg.pdb_ms,
                        st.n_tx,
                    ),
                    None => DelayRecord::unfinished(
                        ue,
                        stream,
                        seq as u64,
                        cfg.direction,
                        st.size_bytes,
                        st.arrival_ms,
                        st.n_tx,
                    ),
                };
                records.push(rec);
            }
        }
    }

    // Warm-up-trimmed KPI view.
    let kpi_records: Vec<DelayRecord> = records
        .iter()
        .filter(|r| r.arrival_ms >= params.warmup_ms)
        .cloned()
        .collect();
    let satisfaction = run_satisfaction(&kpi_records, &params.satisfaction);
    let on_time_packets = kpi_records.iter().filter(|r| r.on_time).count() as u64;
    let total_packets = kpi_records.len() as u64;

    // Per-UE summaries.
    let mut ue_summaries = Vec::with_capacity(n_ues);
    for ue in 0..n_ues as u32 {
        let mine: Vec<&DelayRecord> = kpi_records.iter().filter(|r| r.ue_id == ue).collect();
        let dl: Vec<&DelayRecord> = mine
            .iter()
            .copied()
            .filter(|r| r.direction == Direction::Dl)
            .collect();
        let ul: Vec<&DelayRecord> = mine
            .iter()
            .copied()
            .filter(|r| r.direction == Direction::Ul)
            .collect();
        let r = &rt[ue as usize];
        if r.ledger.total_slots() != n_slots {
            audit.ledger_slots_ok = false;
        }
        ue_summaries.push(UeSummary {
            ue_id: ue,
            serving_cell: r.serving_cell,
            indoor: ues[ue as usize].indoor,
            dl_on_time: dl.iter().filter(|r| r.on_time).count() as u64,
            dl_total: dl.len() as u64,
            dl_satisfied: ue_satisfied(&dl, &params.satisfaction),
            ul_on_time: ul.iter().filter(|r| r.on_time).count() as u64,
            ul_total: ul.len() as u64,
            ul_satisfied: ue_satisfied(&ul, &params.satisfaction),
            avg_power_units: r.ledger.avg_units_per_slot(&params.power_table),
            slots_active: r.ledger.slots_active(),
            slots_asleep: r.ledger.slots_asleep(),
        });
    }
    let avg_power_units = if n_ues > 0 {
        ue_summaries.iter().map(|u| u.avg_power_units).sum::<f64>() / n_ues as f64
    } else {
        0.0
    };

    let link_dump = if params.emit_link_dump {
        let mut rows = Vec::with_capacity(n_cells * n_ues);
        for cell in 0..n_cells as u32 {
            for ue in 0..n_ues as u32 {
                let l = channel.link(cell, ue);
                rows.push(LinkRow {
                    cell_id: cell,
                    ue_id: ue,
                    pathloss_db: l.pathloss_db,
                    shadowing_db: l.shadowing_db,
                    los: l.los,
                    rsrp_dbm: rsrp_dbm(profile, l),
                });
            }
        }
        Some(rows)
    } else {
        None
    };

    if audit.grants_to_sleeping > 0 {
        return Err(SimError::run(format!(
            "{} grants issued to sleeping UEs",
            audit.grants_to_sleeping
        )));
    }

    Ok(RunResult {
        seed,
        n_per_cell,
        records,
        satisfaction,
        ue_summaries,
        avg_power_units,
        on_time_packets,
        total_packets,
        audit,
        clamped_links: channel.clamped_links(),
        link_dump,
        wallclock_s: started.elapsed().as_secs_f64(),
    })
}

fn carries_video(
    template: &crate::traffic::SessionTemplate,
    pieces: &[crate::mac::Segment],
) -> bool {
    pieces
        .iter()
        .any(|s| template.streams[s.stream_idx as usize].kind == crate::traffic::StreamKind::Video)
}

/// Drop geometry helper for the layout dump.
pub fn dropped_users(params: &SimParams, n_per_cell: u32, seed: u64) -> Vec<UserTerminal> {
    let layout = build_layout_with(params.deployment, params.wraparound);
    drop_users(&layout, n_per_cell, seed)
}
