//! Result emission: UTF-8 CSV files with a seed-bearing header block and
//! JSON summaries carrying the full config echo, so any run is
//! reproducible from its outputs alone. Formatting is fixed-precision and
//! iteration order deterministic; identical `(config, seed)` runs produce
//! byte-identical files.

use crate::config::SimConfig;
use crate::deployment::{Cell, UserTerminal};
use crate::engine::RunResult;
use crate::error::Result;
use crate::kpi::CapacityResult;
use crate::sweep::{PowerStudyOutcome, RunKpis, SweepOutcome};
use crate::traffic::StreamStats;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

fn fnum(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v:.6}")
    }
}

fn opt_flag(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "1",
        Some(false) => "0",
        None => "",
    }
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, content)?;
    Ok(path)
}

/// Per-run files: the per-UE KPI CSV, optional packet trace and link dump,
/// and the JSON summary with the config echo.
pub fn write_run_outputs(dir: &Path, cfg: &SimConfig, result: &RunResult) -> Result<Vec<PathBuf>> {
    let tag = cfg.file_tag(result.n_per_cell, result.seed);
    let mut written = Vec::new();

    let mut kpi = String::new();
    let _ = writeln!(kpi, "# seed={}", result.seed);
    let _ = writeln!(
        kpi,
        "ue,serving_cell,indoor,dl_on_time,dl_total,dl_satisfied,ul_on_time,ul_total,ul_satisfied,avg_power_units,slots_active,slots_sleep"
    );
    for u in &result.ue_summaries {
        let _ = writeln!(
            kpi,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            u.ue_id,
            u.serving_cell,
            u8::from(u.indoor),
            u.dl_on_time,
            u.dl_total,
            opt_flag(u.dl_satisfied),
            u.ul_on_time,
            u.ul_total,
            opt_flag(u.ul_satisfied),
            fnum(u.avg_power_units),
            u.slots_active,
            u.slots_asleep,
        );
    }
    written.push(write_file(dir, &format!("kpi_{tag}.csv"), &kpi)?);

    if cfg.run.emit_packet_trace {
        let mut trace = String::new();
        let _ = writeln!(trace, "# seed={}", result.seed);
        let _ = writeln!(
            trace,
            "ue,stream,packet_id,direction,size_bytes,arrival_ms,completion_ms,delay_ms,on_time,n_tx"
        );
        for r in &result.records {
            let _ = writeln!(
                trace,
                "{},{},{},{},{},{},{},{},{},{}",
                r.ue_id,
                r.stream_idx,
                r.packet_id,
                r.direction,
                r.size_bytes,
                fnum(r.arrival_ms),
                r.completion_ms.map(fnum).unwrap_or_default(),
                fnum(r.delay_ms),
                u8::from(r.on_time),
                r.n_tx,
            );
        }
        written.push(write_file(dir, &format!("trace_{tag}.csv"), &trace)?);
    }

    if let Some(links) = &result.link_dump {
        let mut dump = String::new();
        let _ = writeln!(dump, "# seed={}", result.seed);
        let _ = writeln!(dump, "cell,ue,pathloss_db,shadowing_db,los,rsrp_dbm");
        for l in links {
            let _ = writeln!(
                dump,
                "{},{},{},{},{},{}",
                l.cell_id,
                l.ue_id,
                fnum(l.pathloss_db),
                fnum(l.shadowing_db),
                u8::from(l.los),
                fnum(l.rsrp_dbm),
            );
        }
        written.push(write_file(dir, &format!("links_{tag}.csv"), &dump)?);
    }

    #[derive(Serialize)]
    struct RunSummary<'a> {
        seed: u64,
        n_per_cell: u32,
        satisfaction: &'a crate::kpi::RunSatisfaction,
        on_time_packets: u64,
        total_packets: u64,
        avg_power_units: f64,
        clamped_links: u64,
        audit: &'a crate::engine::RunAudit,
        config: &'a SimConfig,
    }
    let summary = RunSummary {
        seed: result.seed,
        n_per_cell: result.n_per_cell,
        satisfaction: &result.satisfaction,
        on_time_packets: result.on_time_packets,
        total_packets: result.total_packets,
        avg_power_units: result.avg_power_units,
        clamped_links: result.clamped_links,
        audit: &result.audit,
        config: cfg,
    };
    let json = serde_json::to_string_pretty(&summary)?;
    written.push(write_file(dir, &format!("summary_{tag}.json"), &json)?);
    Ok(written)
}

fn seeds_meta(seeds: &[u64]) -> String {
    seeds
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Capacity sweep files: satisfaction curve CSV and summary JSON.
pub fn write_capacity_outputs(
    dir: &Path,
    cfg: &SimConfig,
    n_list: &[u32],
    seeds: &[u64],
    outcome: &SweepOutcome,
) -> Result<Vec<PathBuf>> {
    let base = cfg.file_tag(0, 0);
    let base = base.trim_end_matches("_n0_s0").to_string();
    let mut written = Vec::new();

    let mut curve = String::new();
    let _ = writeln!(curve, "# seeds={}", seeds_meta(seeds));
    let _ = writeln!(curve, "n_per_cell,direction,satisfied,total,fraction,seeds");
    for p in &outcome.capacity.curve {
        let _ = writeln!(
            curve,
            "{},{},{},{},{},{}",
            p.n_per_cell,
            p.direction,
            p.satisfied,
            p.total,
            fnum(p.fraction),
            seeds.len(),
        );
    }
    written.push(write_file(
        dir,
        &format!("capacity_curve_{base}.csv"),
        &curve,
    )?);

    #[derive(Serialize)]
    struct CapacitySummary<'a> {
        capacity_dl: u32,
        capacity_ul: u32,
        capacity_combined: u32,
        y_percent: f64,
        n_list: &'a [u32],
        seeds: &'a [u64],
        runs: &'a [RunKpis],
        capacity: &'a CapacityResult,
        config: &'a SimConfig,
    }
    let summary = CapacitySummary {
        capacity_dl: outcome.capacity.capacity_dl,
        capacity_ul: outcome.capacity.capacity_ul,
        capacity_combined: outcome.capacity.capacity_combined,
        y_percent: outcome.capacity.y_percent,
        n_list,
        seeds,
        runs: &outcome.runs,
        capacity: &outcome.capacity,
        config: cfg,
    };
    let json = serde_json::to_string_pretty(&summary)?;
    written.push(write_file(
        dir,
        &format!("capacity_summary_{base}.json"),
        &json,
    )?);
    Ok(written)
}

/// Power study files: per-scheme CSV, per-UE CSV, and JSON summary.
pub fn write_power_outputs(
    dir: &Path,
    cfg: &SimConfig,
    seeds: &[u64],
    outcome: &PowerStudyOutcome,
) -> Result<Vec<PathBuf>> {
    let base = cfg.file_tag(cfg.scenario.n_ue_per_cell, 0);
    let base = base.trim_end_matches("_s0").to_string();
    let mut written = Vec::new();

    let mut table = String::new();
    let _ = writeln!(table, "# seeds={}", seeds_meta(seeds));
    let _ = writeln!(
        table,
        "scheme,long_cycle_ms,on_duration_ms,inactivity_timer_ms,avg_power_units,gain_pct,power_ratio,dl_satisfied_fraction,ul_satisfied_fraction,dl_delta_vs_always_on,on_time_packets,total_packets"
    );
    for r in &outcome.rows {
        let _ = writeln!(
            table,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.scheme,
            fnum(r.drx.long_cycle_ms),
            fnum(r.drx.on_duration_ms),
            fnum(r.drx.inactivity_timer_ms),
            fnum(r.avg_power_units),
            fnum(r.gain_pct),
            fnum(r.power_ratio),
            fnum(r.dl_satisfied_fraction),
            fnum(r.ul_satisfied_fraction),
            fnum(r.dl_delta_vs_always_on),
            r.on_time_packets,
            r.total_packets,
        );
    }
    written.push(write_file(dir, &format!("power_study_{base}.csv"), &table)?);

    let mut per_ue = String::new();
    let _ = writeln!(per_ue, "# seeds={}", seeds_meta(seeds));
    let _ = writeln!(
        per_ue,
        "ue,scheme,seed,avg_power_units,gain_pct,slots_active,slots_sleep"
    );
    for u in &outcome.per_ue {
        let _ = writeln!(
            per_ue,
            "{},{},{},{},{},{},{}",
            u.ue_id,
            u.scheme,
            u.seed,
            fnum(u.avg_power_units),
            fnum(u.gain_pct),
            u.slots_active,
            u.slots_asleep,
        );
    }
    written.push(write_file(
        dir,
        &format!("power_per_ue_{base}.csv"),
        &per_ue,
    )?);

    #[derive(Serialize)]
    struct PowerSummary<'a> {
        seeds: &'a [u64],
        rows: &'a [crate::sweep::PowerStudyRow],
        config: &'a SimConfig,
    }
    let json = serde_json::to_string_pretty(&PowerSummary {
        seeds,
        rows: &outcome.rows,
        config: cfg,
    })?;
    written.push(write_file(
        dir,
        &format!("power_summary_{base}.json"),
        &json,
    )?);
    Ok(written)
}

/// Traffic validator CSV: one row per checked stream.
pub fn write_traffic_validation(
    dir: &Path,
    seed: u64,
    rows: &[(String, StreamStats)],
) -> Result<PathBuf> {
    let mut out = String::new();
    let _ = writeln!(out, "# seed={seed}");
    let _ = writeln!(
        out,
        "stream,n,empirical_mean_bytes,empirical_std_bytes,empirical_rate_bps,min_bytes,max_bytes,analytical_mean_bytes,analytical_rate_bps,pass"
    );
    for (name, s) in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            name,
            s.n,
            fnum(s.empirical_mean_bytes),
            fnum(s.empirical_std_bytes),
            fnum(s.empirical_rate_bps),
            s.min_bytes,
            s.max_bytes,
            fnum(s.analytical_mean_bytes),
            fnum(s.analytical_rate_bps),
            u8::from(s.pass()),
        );
    }
    write_file(dir, "traffic_validation.csv", &out)
}

/// Layout dump: cell positions and one dropped UE set.
pub fn write_layout_dump(
    dir: &Path,
    cfg: &SimConfig,
    seed: u64,
    cells: &[Cell],
    ues: &[UserTerminal],
) -> Result<Vec<PathBuf>> {
    let tag = cfg.file_tag(cfg.scenario.n_ue_per_cell, seed);
    let mut written = Vec::new();

    let mut cell_csv = String::new();
    let _ = writeln!(cell_csv, "# seed={seed}");
    let _ = writeln!(
        cell_csv,
        "cell_id,site_id,x_m,y_m,height_m,azimuth_deg,downtilt_deg"
    );
    for c in cells {
        let _ = writeln!(
            cell_csv,
            "{},{},{},{},{},{},{}",
            c.cell_id,
            c.site_id,
            fnum(c.x_m),
            fnum(c.y_m),
            fnum(c.height_m),
            fnum(c.azimuth_deg),
            fnum(c.downtilt_deg),
        );
    }
    written.push(write_file(
        dir,
        &format!("layout_cells_{tag}.csv"),
        &cell_csv,
    )?);

    let mut ue_csv = String::new();
    let _ = writeln!(ue_csv, "# seed={seed}");
    let _ = writeln!(ue_csv, "ue,x_m,y_m,z_m,indoor,floor,drop_cell");
    for u in ues {
        let _ = writeln!(
            ue_csv,
            "{},{},{},{},{},{},{}",
            u.ue_id,
            fnum(u.x_m),
            fnum(u.y_m),
            fnum(u.z_m),
            u8::from(u.indoor),
            u.floor.map(|f| f.to_string()).unwrap_or_default(),
            u.drop_cell,
        );
    }
    written.push(write_file(dir, &format!("layout_ues_{tag}.csv"), &ue_csv)?);
    Ok(written)
}
