//! Sweep orchestration: capacity searches over UE counts and the CDRX
//! power study, with optional parallel dispatch of independent runs.
//!
//! Instances share no mutable state; results are merged in job order after
//! all instances complete, so serial and parallel execution aggregate
//! identically.

use crate::cdrx::{power_saving_gain, DrxConfig};
use crate::config::SimParams;
use crate::engine::{run_simulation, RunResult};
use crate::error::{Result, SimError};
use crate::kpi::{capacity_search, CapacityResult, RunSatisfaction, SatisfactionConfig};
use serde::Serialize;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Light per-run KPI snapshot kept for reporting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunKpis {
    pub n_per_cell: u32,
    pub seed: u64,
    pub satisfaction: RunSatisfaction,
    pub on_time_packets: u64,
    pub total_packets: u64,
    pub avg_power_units: f64,
}

impl RunKpis {
    fn from_run(r: &RunResult) -> Self {
        Self {
            n_per_cell: r.n_per_cell,
            seed: r.seed,
            satisfaction: r.satisfaction,
            on_time_packets: r.on_time_packets,
            total_packets: r.total_packets,
            avg_power_units: r.avg_power_units,
        }
    }
}

/// Capacity sweep output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutcome {
    pub capacity: CapacityResult,
    pub runs: Vec<RunKpis>,
}

/// Run every job with a fixed-size worker pool. Results land at their job
/// index, so the outcome is independent of scheduling order. Returns the
/// per-job results or the list of failed jobs.
fn run_jobs<J, T>(
    jobs: &[J],
    threads: usize,
    runner: impl Fn(&J) -> Result<T> + Sync,
) -> std::result::Result<Vec<T>, Vec<(String, String)>>
where
    J: Sync + std::fmt::Debug,
    T: Send,
{
    let n_workers = if threads == 0 {
        std::thread::available_parallelism()
            .map(|p| p.get())
            .unwrap_or(1)
    } else {
        threads
    }
    .min(jobs.len().max(1));

    let slots: Mutex<Vec<Option<std::result::Result<T, String>>>> =
        Mutex::new((0..jobs.len()).map(|_| None).collect());
    let cursor = AtomicUsize::new(0);

    std::thread::scope(|scope| {
        for _ in 0..n_workers {
            scope.spawn(|| loop {
                let i = cursor.fetch_add(1, Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                let out = runner(&jobs[i]).map_err(|e| e.to_string());
                slots.lock().unwrap()[i] = Some(out);
            });
        }
    });

    let results = slots.into_inner().unwrap();
    let mut ok = Vec::with_capacity(jobs.len());
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r.expect("every job ran") {
            Ok(v) => ok.push(v),
            Err(e) => failures.push((format!("{:?}", jobs[i]), e)),
        }
    }
    if failures.is_empty() {
        Ok(ok)
    } else {
        Err(failures)
    }
}

/// Run the `(n, seed)` grid and fold it into a capacity figure.
///
/// Satisfaction counts pool across seeds per load point; per-direction
/// capacity is the largest n whose pooled fraction meets Y. Partial
/// failures abort with the failed pairs listed.
pub fn run_sweep(
    params: &SimParams,
    n_list: &[u32],
    seeds: &[u64],
    threads: usize,
) -> Result<SweepOutcome> {
    if seeds.is_empty() {
        return Err(SimError::config(
            "sweep needs at least one seed".to_string(),
        ));
    }
    let jobs: Vec<(u32, u64)> = n_list
        .iter()
        .flat_map(|&n| seeds.iter().map(move |&s| (n, s)))
        .collect();
    let results = run_jobs(&jobs, threads, |&(n, seed)| {
        run_simulation(params, n, seed).map(|r| RunKpis::from_run(&r))
    })
    .map_err(|failures| {
        SimError::run(format!(
            "sweep aborted; failed (n, seed) pairs: {}",
            failures
                .iter()
                .map(|(j, e)| format!("{j}: {e}"))
                .collect::<Vec<_>>()
                .join("; ")
        ))
    })?;

    let capacity = capacity_from_runs(n_list, &results, &params.satisfaction)?;
    Ok(SweepOutcome {
        capacity,
        runs: results,
    })
}

/// Aggregate already-computed runs into the capacity figure.
pub fn capacity_from_runs(
    n_list: &[u32],
    runs: &[RunKpis],
    sat: &SatisfactionConfig,
) -> Result<CapacityResult> {
    capacity_search(n_list, sat, |n| {
        let mut pooled = RunSatisfaction::default();
        for r in runs.iter().filter(|r| r.n_per_cell == n) {
            pooled.merge(&r.satisfaction);
        }
        Ok(pooled)
    })
}

/// One scheme of the power study.
#[derive(Debug, Clone, Serialize)]
pub struct PowerStudyRow {
    pub scheme: String,
    pub drx: DrxConfig,
    pub avg_power_units: f64,
    /// `(1 - scheme/always_on) * 100`.
    pub gain_pct: f64,
    /// Raw `scheme / always_on` power ratio.
    pub power_ratio: f64,
    pub dl_satisfied_fraction: f64,
    pub ul_satisfied_fraction: f64,
    /// Satisfied-fraction delta against Always-ON (negative = loss).
    pub dl_delta_vs_always_on: f64,
    pub on_time_packets: u64,
    pub total_packets: u64,
}

/// Per-UE power rows of the study, for the per-UE summary CSV.
#[derive(Debug, Clone, Serialize)]
pub struct UePowerRow {
    pub scheme: String,
    pub seed: u64,
    pub ue_id: u32,
    pub avg_power_units: f64,
    pub gain_pct: f64,
    pub slots_active: u64,
    pub slots_asleep: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerStudyOutcome {
    pub rows: Vec<PowerStudyRow>,
    pub per_ue: Vec<UePowerRow>,
}

/// Compare CDRX schemes against Always-ON on identical traffic (same
/// seeds). The Always-ON baseline is always run, listed first.
pub fn run_power_study(
    params: &SimParams,
    drx_configs: &[DrxConfig],
    seeds: &[u64],
    threads: usize,
) -> Result<PowerStudyOutcome> {
    let mut schemes: Vec<DrxConfig> = vec![DrxConfig::always_on()];
    for d in drx_configs {
        d.validate()?;
        if d.enabled {
            schemes.push(*d);
        }
    }

    let jobs: Vec<(usize, u64)> = (0..schemes.len())
        .flat_map(|si| seeds.iter().map(move |&s| (si, s)))
        .collect();
    let results = run_jobs(&jobs, threads, |&(si, seed)| {
        let mut p = params.clone();
        p.drx = schemes[si];
        run_simulation(&p, p.n_ue_per_cell, seed)
    })
    .map_err(|failures| {
        SimError::run(format!(
            "power study aborted; failed (scheme, seed) pairs: {}",
            failures
                .iter()
                .map(|(j, e)| format!("{j}: {e}"))
                .collect::<Vec<_>>()
                .join("; ")
        ))
    })?;

    // Baseline per-seed, per-UE powers for the per-UE gain column.
    let baseline_avg = {
        let runs: Vec<&RunResult> = results
            .iter()
            .zip(jobs.iter())
            .filter(|(_, &(si, _))| si == 0)
            .map(|(r, _)| r)
            .collect();
        mean(runs.iter().map(|r| r.avg_power_units))
    };

    let mut rows = Vec::new();
    let mut per_ue = Vec::new();
    for (si, scheme) in schemes.iter().enumerate() {
        let scheme_runs: Vec<&RunResult> = results
            .iter()
            .zip(jobs.iter())
            .filter(|(_, &(ji, _))| ji == si)
            .map(|(r, _)| r)
            .collect();
        let avg_power = mean(scheme_runs.iter().map(|r| r.avg_power_units));
        let mut sat = RunSatisfaction::default();
        let mut on_time = 0;
        let mut total = 0;
        for r in &scheme_runs {
            sat.merge(&r.satisfaction);
            on_time += r.on_time_packets;
            total += r.total_packets;
        }
        let label = scheme.label();
        for r in &scheme_runs {
            for u in &r.ue_summaries {
                let base = baseline_ue_power(&results, &jobs, r.seed, u.ue_id);
                per_ue.push(UePowerRow {
                    scheme: label.clone(),
                    seed: r.seed,
                    ue_id: u.ue_id,
                    avg_power_units: u.avg_power_units,
                    gain_pct: power_saving_gain(u.avg_power_units, base)?,
                    slots_active: u.slots_active,
                    slots_asleep: u.slots_asleep,
                });
            }
        }
        let dl_fraction = fraction(sat.dl_satisfied, sat.dl_total);
        rows.push(PowerStudyRow {
            scheme: label,
            drx: *scheme,
            avg_power_units: avg_power,
            gain_pct: power_saving_gain(avg_power, baseline_avg)?,
            power_ratio: avg_power / baseline_avg,
            dl_satisfied_fraction: dl_fraction,
            ul_satisfied_fraction: fraction(sat.ul_satisfied, sat.ul_total),
            dl_delta_vs_always_on: 0.0,
            on_time_packets: on_time,
            total_packets: total,
        });
    }
    let base_dl = rows[0].dl_satisfied_fraction;
    for row in &mut rows {
        row.dl_delta_vs_always_on = row.dl_satisfied_fraction - base_dl;
    }
    Ok(PowerStudyOutcome { rows, per_ue })
}

fn baseline_ue_power(results: &[RunResult], jobs: &[(usize, u64)], seed: u64, ue: u32) -> f64 {
    for (r, &(si, s)) in results.iter().zip(jobs.iter()) {
        if si == 0 && s == seed {
            if let Some(u) = r.ue_summaries.iter().find(|u| u.ue_id == ue) {
                return u.avg_power_units;
            }
        }
    }
    f64::NAN
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

fn fraction(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}
