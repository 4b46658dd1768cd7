//! `xrsim`: run XR-over-NR system simulations, capacity sweeps, CDRX power
//! studies, traffic validation, and layout dumps from the command line.
//!
//! Exit codes: 0 success, 2 configuration error, 3 run failure.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use xrsim_core::cdrx::DrxConfig;
use xrsim_core::config::SimConfig;
use xrsim_core::deployment::build_layout_with;
use xrsim_core::engine::{dropped_users, run_simulation};
use xrsim_core::error::SimError;
use xrsim_core::report;
use xrsim_core::sweep::{run_power_study, run_sweep};
use xrsim_core::traffic::{
    audio_data_stream, build_video_stream, motion_control_stream, stream_stats, Direction, Service,
};

#[derive(Parser)]
#[command(
    name = "xrsim",
    about = "Slot-level system simulator for XR services over 5G NR",
    version
)]
struct Cli {
    /// TOML config file; built-in defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override a config value as section.key=value (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,

    /// Output directory (overrides run.out_dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation per configured seed and write result files.
    Run {
        /// Run a single specific seed instead of the configured list.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Sweep UEs-per-cell and report the XR capacity (min of DL and UL).
    Capacity {
        /// Loads to evaluate, comma separated (default 1..=8).
        #[arg(long, value_delimiter = ',')]
        n: Vec<u32>,
        /// Seeds pooled per load point (default: config seeds).
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
    },
    /// Compare CDRX schemes against Always-ON on identical traffic.
    PowerStudy {
        /// DRX triple cycle:on_duration:inactivity in ms, repeatable
        /// (default: 4:2:2, 10:5:5, 10:8:2).
        #[arg(long = "drx", value_name = "CYCLE:ON:INACT")]
        drx: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
    },
    /// Generate the standard stream set and check empirical statistics
    /// against the analytical model.
    ValidateTraffic {
        /// Packets generated per stream.
        #[arg(long, default_value_t = 100_000)]
        packets: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Emit cell and UE positions as CSV for plotting.
    DumpLayout {
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(SimError::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

fn real_main(cli: Cli) -> xrsim_core::Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => SimConfig::load(path)?,
        None => SimConfig::default(),
    };
    if !cli.sets.is_empty() {
        cfg = cfg.with_overrides(&cli.sets)?;
    }
    if let Some(out) = &cli.out {
        cfg.run.out_dir = out.display().to_string();
    }
    let out_dir = PathBuf::from(&cfg.run.out_dir);
    let params = cfg.resolve()?;

    match cli.command {
        Command::Run { seed } => {
            let seeds: Vec<u64> = seed
                .map(|s| vec![s])
                .unwrap_or_else(|| cfg.run.seeds.clone());
            for s in seeds {
                let result = run_simulation(&params, params.n_ue_per_cell, s)?;
                let files = report::write_run_outputs(&out_dir, &cfg, &result)?;
                println!(
                    "seed {s}: {}/{} DL UEs satisfied, {}/{} UL, {}/{} packets on time, avg power {:.2} ({:.2}s)",
                    result.satisfaction.dl_satisfied,
                    result.satisfaction.dl_total,
                    result.satisfaction.ul_satisfied,
                    result.satisfaction.ul_total,
                    result.on_time_packets,
                    result.total_packets,
                    result.avg_power_units,
                    result.wallclock_s,
                );
                for f in files {
                    println!("  wrote {}", f.display());
                }
            }
        }
        Command::Capacity { n, seeds } => {
            let n_list: Vec<u32> = if n.is_empty() { (1..=8).collect() } else { n };
            let seeds = if seeds.is_empty() {
                cfg.run.seeds.clone()
            } else {
                seeds
            };
            let outcome = run_sweep(&params, &n_list, &seeds, cfg.run.threads)?;
            for p in &outcome.capacity.curve {
                println!(
                    "n={} {}: {}/{} satisfied ({:.3})",
                    p.n_per_cell, p.direction, p.satisfied, p.total, p.fraction
                );
            }
            println!(
                "capacity: DL {} UE/cell, UL {} UE/cell, combined {} UE/cell (Y={}%)",
                outcome.capacity.capacity_dl,
                outcome.capacity.capacity_ul,
                outcome.capacity.capacity_combined,
                outcome.capacity.y_percent,
            );
            for f in report::write_capacity_outputs(&out_dir, &cfg, &n_list, &seeds, &outcome)? {
                println!("  wrote {}", f.display());
            }
        }
        Command::PowerStudy { drx, seeds } => {
            let seeds = if seeds.is_empty() {
                cfg.run.seeds.clone()
            } else {
                seeds
            };
            let configs: Vec<DrxConfig> = if drx.is_empty() {
                vec![DrxConfig::cdrx1(), DrxConfig::cdrx3(), DrxConfig::cdrx4()]
            } else {
                drx.iter()
                    .map(|s| parse_drx(s))
                    .collect::<xrsim_core::Result<_>>()?
            };
            let outcome = run_power_study(&params, &configs, &seeds, cfg.run.threads)?;
            for r in &outcome.rows {
                println!(
                    "{:<16} avg power {:>8.2}  gain {:>6.2}%  DL satisfied {:.3} (delta {:+.3})",
                    r.scheme,
                    r.avg_power_units,
                    r.gain_pct,
                    r.dl_satisfied_fraction,
                    r.dl_delta_vs_always_on
                );
            }
            for f in report::write_power_outputs(&out_dir, &cfg, &seeds, &outcome)? {
                println!("  wrote {}", f.display());
            }
        }
        Command::ValidateTraffic { packets, seed } => {
            let seed = seed.unwrap_or_else(|| cfg.run.seeds.first().copied().unwrap_or(1));
            let set: Vec<(String, xrsim_core::traffic::StreamConfig)> = vec![
                (
                    "vr_dl_video_30mbps".into(),
                    build_video_stream(Service::Vr, Direction::Dl, 60.0, 30e6)?,
                ),
                (
                    "vr_dl_video_45mbps".into(),
                    build_video_stream(Service::Vr, Direction::Dl, 60.0, 45e6)?,
                ),
                (
                    "cg_dl_video_8mbps".into(),
                    build_video_stream(Service::Cg, Direction::Dl, 60.0, 8e6)?,
                ),
                (
                    "cg_dl_video_30mbps".into(),
                    build_video_stream(Service::Cg, Direction::Dl, 60.0, 30e6)?,
                ),
                (
                    "ar_ul_video_10mbps".into(),
                    build_video_stream(Service::Ar, Direction::Ul, 60.0, 10e6)?,
                ),
                ("motion_control".into(), motion_control_stream()),
                (
                    "audio_0756kbps".into(),
                    audio_data_stream(Direction::Dl, 0.756e6)?,
                ),
                (
                    "audio_1120kbps".into(),
                    audio_data_stream(Direction::Dl, 1.12e6)?,
                ),
            ];
            let mut rows = Vec::new();
            let mut all_pass = true;
            for (name, stream) in &set {
                let stats = stream_stats(stream, seed, packets)?;
                all_pass &= stats.pass();
                println!(
                    "{:<22} n={} mean {:.1} B (model {:.1}) rate {:.0} bit/s (model {:.0}) bounds [{}, {}] -> {}",
                    name,
                    stats.n,
                    stats.empirical_mean_bytes,
                    stats.analytical_mean_bytes,
                    stats.empirical_rate_bps,
                    stats.analytical_rate_bps,
                    stats.min_bytes,
                    stats.max_bytes,
                    if stats.pass() { "pass" } else { "FAIL" },
                );
                rows.push((name.clone(), stats));
            }
            let path = report::write_traffic_validation(&out_dir, seed, &rows)?;
            println!("  wrote {}", path.display());
            if !all_pass {
                return Err(SimError::run("traffic validation failed".to_string()));
            }
        }
        Command::DumpLayout { seed } => {
            let seed = seed.unwrap_or_else(|| cfg.run.seeds.first().copied().unwrap_or(1));
            let layout = build_layout_with(params.deployment, params.wraparound);
            let ues = dropped_users(&params, params.n_ue_per_cell, seed);
            println!(
                "{}: {} cells, {} UEs dropped",
                params.deployment,
                layout.cells.len(),
                ues.len()
            );
            for f in report::write_layout_dump(&out_dir, &cfg, seed, &layout.cells, &ues)? {
                println!("  wrote {}", f.display());
            }
        }
    }
    Ok(())
}

fn parse_drx(spec: &str) -> xrsim_core::Result<DrxConfig> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(SimError::config(format!(
            "DRX spec '{spec}' must be cycle:on_duration:inactivity in ms"
        )));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| SimError::config(format!("bad DRX number '{p}' in '{spec}'")))
        })
        .collect::<xrsim_core::Result<_>>()?;
    DrxConfig::new(nums[0], nums[1], nums[2])
}
