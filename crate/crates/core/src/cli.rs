//! Command-line front end. `main.rs` only forwards to [`main_with_args`].

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::caching::{assign_nearest, influence_scores};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::motif::{write_motif_report, Motif, MotifDetector};
use crate::simulator::{
    generate_link_events, load_trace, mine_window, pair_distances, resolve_event_params, run_point, run_scenario,
    write_cdf_csv, write_metrics_csv, EventGenParams, PointOutcome, ReplicationSeeds, ScenarioReport, Strategy,
};
use crate::temporal_graph::{decompose, load_edge_list, TemporalGraph, VehicleId};

#[derive(Debug, Parser)]
#[command(name = "v2v-motifs", version, about = "Temporal motif mining and V2V cache placement")]
pub struct Cli {
    /// TOML configuration; absent keys take the built-in defaults.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed, overrides the config file.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Output directory, overrides the config file.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    pub dry_run: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect motifs in a `src,dst,t_ms` edge list; writes motifs.csv.
    Mine { edge_list: PathBuf },
    /// Choose serving cars on a `t_s,vehicle_id,x_m,y_m` trace with both
    /// strategies; writes placement.csv and placement_summary.csv.
    Place {
        trace: PathBuf,
        #[arg(long, short = 'c')]
        count: usize,
    },
    /// Run the configured scenario; writes metrics.csv, cdf.csv and summary.csv.
    Simulate,
}

/// Exit status for an error: 2 for filesystem failures, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_io() {
        2
    } else {
        1
    }
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

/// File keys over defaults, flags over file keys.
pub fn resolve_config(cli: &Cli) -> Result<Config> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    Ok(cfg)
}

pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    let cfg = resolve_config(cli)?;
    if cli.dry_run {
        let text = cfg.to_toml_string()?;
        stdout.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))?;
        return Ok(());
    }
    match &cli.command {
        Command::Mine { edge_list } => {
            let motifs = cmd_mine(&cfg, edge_list)?;
            say(stdout, &format!("{} motifs written to {}", motifs.len(), cfg.out_dir.join("motifs.csv").display()))
        }
        Command::Place { trace, count } => {
            let outcome = cmd_place(&cfg, trace, *count)?;
            for o in &outcome.outcomes {
                say(
                    stdout,
                    &format!(
                        "{}: {} serving cars, average rate {:.6e} bit/s",
                        o.strategy,
                        o.serving.len(),
                        o.avg_rate_bps
                    ),
                )?;
            }
            Ok(())
        }
        Command::Simulate => {
            let report = cmd_simulate(&cfg)?;
            for s in &report.summary {
                say(
                    stdout,
                    &format!(
                        "point {:3} serving {:3}: motif {:.4e} location {:.4e} advantage {:+.2}% (kappa {:.1})",
                        s.sweep_point,
                        s.serving_count,
                        s.mean_motif_bps,
                        s.mean_location_bps,
                        100.0 * s.advantage,
                        s.mean_kappa
                    ),
                )?;
            }
            Ok(())
        }
    }
}

fn say(out: &mut dyn Write, line: &str) -> Result<()> {
    writeln!(out, "{line}").map_err(|e| Error::io("<stdout>", e))
}

fn create_file(dir: &Path, name: &str) -> Result<(PathBuf, fs::File)> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    let f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    Ok((path, f))
}

/// Decompose, enumerate, classify and score an edge list.
pub fn cmd_mine(cfg: &Config, edge_list: &Path) -> Result<Vec<Motif>> {
    let events = load_edge_list(edge_list)?;
    let graph = TemporalGraph::build(&events)?;
    let t_ms = (cfg.motif.t_constraint_s * 1000.0).round() as i64;
    if t_ms <= 0 {
        return Err(Error::invalid("time constraint T must be positive"));
    }
    let detector = MotifDetector {
        k: cfg.motif.k,
        z_threshold: cfg.motif.z_threshold,
        null_model: cfg.null_model_params(),
        count_mode: cfg.motif.count_mode,
    };
    let motifs = detector.detect(&decompose(&graph, t_ms)?)?;
    let (_, f) = create_file(&cfg.out_dir, "motifs.csv")?;
    write_motif_report(f, &motifs)?;
    Ok(motifs)
}

#[derive(Debug, Serialize)]
struct PlacementRow {
    strategy: Strategy,
    vehicle_id: VehicleId,
    role: &'static str,
    assigned_server: Option<VehicleId>,
    influence: Option<f64>,
    rate_bps: Option<f64>,
}

#[derive(Debug, Serialize)]
struct PlacementSummaryRow {
    strategy: Strategy,
    serving_count: usize,
    objective_bps: f64,
    motifs_found: usize,
    fallback: bool,
    kappa: f64,
    proximity_cutoff_m: f64,
}

/// Motif-based and location-based serving sets of size `count` on a
/// recorded trace, with their averaged objectives.
pub fn cmd_place(cfg: &Config, trace_path: &Path, count: usize) -> Result<PointOutcome> {
    let mut file_cfg = cfg.clone();
    file_cfg.trace.path = Some(trace_path.to_path_buf());
    let sc = file_cfg.to_scenario()?;
    let trace = load_trace(trace_path, sc.trace.road)?;
    let n = trace.num_vehicles();
    if count == 0 || count >= n {
        return Err(Error::invalid(format!("serving count must be in 1..{n}, got {count}")));
    }
    let needed = sc.decision_time_s() + sc.eval_step_s * (sc.eval_epochs - 1) as f64;
    if sc.events.window_start_s + 1e-9 < trace.start_s() || trace.end_s() + 1e-9 < needed {
        return Err(Error::invalid(format!(
            "trace covers {}..{} s but the run needs {}..{needed} s",
            trace.start_s(),
            trace.end_s(),
            sc.events.window_start_s
        )));
    }

    let seeds = ReplicationSeeds::new(sc.seed, 0);
    let events = EventGenParams { rng_seed: seeds.events, ..sc.events.clone() };
    let cutoff = sc.channel.threshold_range();
    let resolved =
        resolve_event_params(&pair_distances(&trace, events.window_start_s, events.window_s), &events, cutoff)?;
    let graph = generate_link_events(&trace, &events, cutoff)?;
    let motifs = mine_window(&sc, &graph, seeds.null_model(0))?;
    let outcome = run_point(&sc, &trace, &motifs, 0, count, count, seeds.fading(count), resolved)?;
    let influence = influence_scores(&motifs, &trace.vehicles(), sc.normalization).ok();
    let decision = trace.positions_at(trace.step_at(sc.decision_time_s()));

    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for o in &outcome.outcomes {
        let assignment = assign_nearest(&decision, &o.serving)?;
        for &v in decision.keys() {
            let serving = o.serving.contains(&v);
            rows.push(PlacementRow {
                strategy: o.strategy,
                vehicle_id: v,
                role: if serving { "serving" } else { "non_serving" },
                assigned_server: assignment.get(&v).copied(),
                influence: influence.as_ref().map(|t| t.score(v)),
                rate_bps: o.per_car.get(&v).copied(),
            });
        }
        summary.push(PlacementSummaryRow {
            strategy: o.strategy,
            serving_count: count,
            objective_bps: o.avg_rate_bps,
            motifs_found: outcome.motifs_found,
            fallback: o.strategy == Strategy::Motif && outcome.fallback,
            kappa: outcome.events.kappa,
            proximity_cutoff_m: outcome.events.proximity_cutoff,
        });
    }
    let (_, f) = create_file(&cfg.out_dir, "placement.csv")?;
    write_rows(f, &rows)?;
    let (_, f) = create_file(&cfg.out_dir, "placement_summary.csv")?;
    write_rows(f, &summary)?;
    Ok(outcome)
}

#[derive(Debug, Serialize)]
struct SummaryRow {
    scenario: u8,
    sweep_point: usize,
    serving_count: usize,
    mean_motif_bps: f64,
    mean_location_bps: f64,
    advantage: f64,
    dominance: &'static str,
    fallbacks: usize,
    mean_kappa: f64,
    proximity_cutoff_m: f64,
}

/// Runs the configured scenario and writes its report files.
pub fn cmd_simulate(cfg: &Config) -> Result<ScenarioReport> {
    let sc = cfg.to_scenario()?;
    let report = run_scenario(&sc)?;
    let (_, f) = create_file(&cfg.out_dir, "metrics.csv")?;
    write_metrics_csv(f, &report.metrics)?;
    let (_, f) = create_file(&cfg.out_dir, "cdf.csv")?;
    write_cdf_csv(f, &report.cdfs)?;
    let rows: Vec<SummaryRow> = report
        .summary
        .iter()
        .map(|s| SummaryRow {
            scenario: report.scenario,
            sweep_point: s.sweep_point,
            serving_count: s.serving_count,
            mean_motif_bps: s.mean_motif_bps,
            mean_location_bps: s.mean_location_bps,
            advantage: s.advantage,
            dominance: match s.dominance {
                std::cmp::Ordering::Greater => "motif",
                std::cmp::Ordering::Less => "location",
                std::cmp::Ordering::Equal => "tie",
            },
            fallbacks: s.fallbacks,
            mean_kappa: s.mean_kappa,
            proximity_cutoff_m: report.points.first().map_or(f64::NAN, |p| p.events.proximity_cutoff),
        })
        .collect();
    let (_, f) = create_file(&cfg.out_dir, "summary.csv")?;
    write_rows(f, &rows)?;
    Ok(report)
}

fn write_rows<W: Write, T: Serialize>(writer: W, rows: &[T]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush().map_err(|e| Error::io("<report>", e))?;
    Ok(())
}
