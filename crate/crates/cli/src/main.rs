//! `qkdrb` — compare relayed and switched QKD architectures on uniform rings.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qkdrb_core::ring::RingScenario;
use qkdrb_core::sim;
use qkdrb_core::{compare, relayed, switched};

use config::ToolConfig;

#[derive(Debug, Parser)]
#[command(
    name = "qkdrb",
    about = "Relayed vs switched QKD ring evaluation toolkit",
    long_about = "Computes consumed secret-key rates of the relayed and switched QKD \
                  architectures on uniform rings, sweeps (N, Le) grids, dumps TDM schedules \
                  and verifies rates with a deterministic key-management simulation."
)]
struct Cli {
    /// Path to a JSON config file (falls back to $QKDRB_CONFIG, then defaults).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample the generation curve G(A) into a CSV.
    SkrCurve(SkrCurveArgs),
    /// Sweep node counts and link lengths, emitting the comparison grid.
    CompareGrid(CompareGridArgs),
    /// Inspect the switched TDM schedule.
    Schedule(ScheduleArgs),
    /// Run the key-management simulation for one scenario.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
struct SkrCurveArgs {
    /// First attenuation sample, dB.
    #[arg(long, default_value_t = 0.0)]
    from_db: f64,
    /// Last attenuation sample, dB (inclusive).
    #[arg(long, default_value_t = 30.0)]
    to_db: f64,
    /// Sample spacing, dB.
    #[arg(long, default_value_t = 0.5)]
    step_db: f64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CompareGridArgs {
    /// Node counts: comma list or range, e.g. "5,9,13" or "5..25" (odd, step 2).
    #[arg(long)]
    nodes: String,
    /// Link lengths in km: comma list or range with step, e.g. "1,2.5,5" or "5..35:5".
    #[arg(long)]
    le: String,
    /// Override the switch optical loss O, dB.
    #[arg(long)]
    switch_loss_db: Option<f64>,
    /// Override the pairing penalty P, dB (negative allowed).
    #[arg(long, allow_negative_numbers = true)]
    penalty_db: Option<f64>,
    /// Override the reconfiguration time R (seconds, or "5min").
    #[arg(long)]
    reconfig: Option<String>,
    /// Override the schedule period T (seconds, or "180min").
    #[arg(long)]
    period: Option<String>,
    /// Override the maximum acceptable received power R_A, dBm.
    #[arg(long, allow_negative_numbers = true)]
    ra_dbm: Option<f64>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Optional SVG heatmap path.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScheduleArgs {
    #[command(subcommand)]
    command: ScheduleCommand,
}

#[derive(Debug, Subcommand)]
enum ScheduleCommand {
    /// Print the phase table as CSV on standard output.
    Show(ScheduleShowArgs),
}

#[derive(Debug, Args)]
struct ScheduleShowArgs {
    /// Node count (odd).
    #[arg(long)]
    nodes: usize,
    /// Adjacent link length, km.
    #[arg(long)]
    le: f64,
    #[arg(long)]
    switch_loss_db: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    penalty_db: Option<f64>,
    #[arg(long)]
    reconfig: Option<String>,
    #[arg(long)]
    period: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    ra_dbm: Option<f64>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Architecture to simulate.
    #[arg(long, value_parser = ["relayed", "switched"])]
    arch: String,
    /// Node count (odd).
    #[arg(long)]
    nodes: usize,
    /// Adjacent link length, km.
    #[arg(long)]
    le: f64,
    /// Demand per pair as a fraction of the analytic rate.
    #[arg(long, default_value_t = 0.99)]
    demand_factor: f64,
    /// Output JSON report path.
    #[arg(long)]
    out: PathBuf,
    /// Output per-pair CSV path (defaults to the JSON path with .csv).
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Keep exit code 1 for usage problems; 2 is reserved for starvation.
            let is_help = matches!(
                err.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = err.print();
            return if is_help { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };

    let config = match ToolConfig::load(cli.config.as_deref()) {
        Ok(config) => config,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(1);
        }
    };

    let result = match cli.command {
        Command::SkrCurve(args) => cmd_skr_curve(&config, &args),
        Command::CompareGrid(args) => cmd_compare_grid(&config, &args),
        Command::Schedule(ScheduleArgs { command: ScheduleCommand::Show(args) }) => {
            cmd_schedule_show(&config, &args)
        }
        Command::Simulate(args) => cmd_simulate(&config, &args),
    };

    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

type CmdResult = Result<ExitCode, Box<dyn std::error::Error>>;

fn cmd_skr_curve(config: &ToolConfig, args: &SkrCurveArgs) -> CmdResult {
    if args.step_db.is_nan() || args.step_db <= 0.0 {
        return Err(format!("step must be positive, got {}", args.step_db).into());
    }
    if args.from_db > args.to_db {
        return Err(format!("empty range: from {} > to {}", args.from_db, args.to_db).into());
    }
    let model = config.build_model()?;
    let mut out = String::from("attenuation_db,skr_bps\n");
    let steps = ((args.to_db - args.from_db) / args.step_db).floor() as usize;
    for i in 0..=steps {
        let a = args.from_db + i as f64 * args.step_db;
        out.push_str(&format!("{},{}\n", a, model.rate_bps(a)));
    }
    output::write_file(&args.out, &out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_compare_grid(config: &ToolConfig, args: &CompareGridArgs) -> CmdResult {
    let node_counts = output::parse_node_list(&args.nodes)?;
    let link_lengths_km = output::parse_length_list(&args.le)?;

    let mut config = config.clone();
    if let Some(ra) = args.ra_dbm {
        config.model.max_rx_power_dbm = ra;
    }
    apply_switched_overrides(
        &mut config,
        args.switch_loss_db,
        args.penalty_db,
        args.reconfig.as_deref(),
        args.period.as_deref(),
    )?;

    let spec = compare::SweepSpec {
        node_counts,
        link_lengths_km,
        switched: config.switched_config(),
        model: config.build_model()?,
        attenuation_db_per_km: config.scenario.attenuation_db_per_km,
        chord_mode: config.scenario.chord_mode,
    };
    let cells = compare::sweep(&spec)?;
    output::write_file(&args.out, &compare::grid_csv(&cells))?;
    if let Some(svg_path) = &args.svg {
        output::write_file(svg_path, &compare::heatmap_svg(&cells, &spec))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_schedule_show(config: &ToolConfig, args: &ScheduleShowArgs) -> CmdResult {
    let mut config = config.clone();
    if let Some(ra) = args.ra_dbm {
        config.model.max_rx_power_dbm = ra;
    }
    apply_switched_overrides(
        &mut config,
        args.switch_loss_db,
        args.penalty_db,
        args.reconfig.as_deref(),
        args.period.as_deref(),
    )?;

    let scenario = RingScenario::new(
        args.nodes,
        args.le,
        config.scenario.attenuation_db_per_km,
        config.scenario.chord_mode,
    )?;
    let model = config.build_model()?;
    let schedule = switched::build_schedule(&scenario, &model, &config.switched_config())?;

    let mut out = String::from("k,chord_km,attenuation_db,rate_bps,duration_s\n");
    for phase in &schedule.phases {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            phase.hop, phase.chord_km, phase.attenuation_db, phase.rate_bps, phase.duration_s
        ));
    }
    print!("{out}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(config: &ToolConfig, args: &SimulateArgs) -> CmdResult {
    if args.demand_factor.is_nan() || args.demand_factor < 0.0 {
        return Err(format!("demand factor must be non-negative, got {}", args.demand_factor).into());
    }
    let scenario = RingScenario::new(
        args.nodes,
        args.le,
        config.scenario.attenuation_db_per_km,
        config.scenario.chord_mode,
    )?;
    let model = config.build_model()?;

    let (analytic_bps, sim_config, report) = match args.arch.as_str() {
        "relayed" => {
            let analytic = relayed::consumption_bps(&scenario, &model);
            let demand = args.demand_factor * analytic;
            let sim_config = config.sim.resolve_relayed(analytic, demand)?;
            let report = sim::run_relayed(&scenario, &model, &sim_config)?;
            (analytic, sim_config, report)
        }
        "switched" => {
            let cfg = config.switched_config();
            let analytic = switched::consumption_bps(&scenario, &model, &cfg)?;
            let demand = args.demand_factor * analytic;
            let sim_config = config.sim.resolve_switched(analytic, demand, cfg.period_s)?;
            let report = sim::run_switched(&scenario, &model, &cfg, &sim_config)?;
            (analytic, sim_config, report)
        }
        other => return Err(format!("unknown architecture {other:?}").into()),
    };

    let wrapped = output::SimulateReport {
        architecture: args.arch.clone(),
        node_count: args.nodes,
        adjacent_link_km: args.le,
        analytic_rate_bps: analytic_bps,
        demand_factor: args.demand_factor,
        block_bits: sim_config.block_bits,
        warmup_s: sim_config.warmup_s,
        measure_s: sim_config.measure_s,
        consumption_rate_bps: sim_config.consumption_rate_bps,
        seed: sim_config.seed,
        report: report.clone(),
    };

    let json = serde_json::to_string_pretty(&wrapped)?;
    output::write_file(&args.out, &format!("{json}\n"))?;
    let csv_path = args.csv.clone().unwrap_or_else(|| args.out.with_extension("csv"));
    output::write_file(&csv_path, &output::pairs_csv(&report))?;

    if report.any_starved() {
        eprintln!(
            "starvation: {} events across {} pairs",
            report.total_starvation_events,
            report.pairs.iter().filter(|p| p.starved).count()
        );
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn apply_switched_overrides(
    config: &mut ToolConfig,
    switch_loss_db: Option<f64>,
    penalty_db: Option<f64>,
    reconfig: Option<&str>,
    period: Option<&str>,
) -> Result<(), Box<dyn std::error::Error>> {
    if let Some(o) = switch_loss_db {
        config.switched.switch_loss_db = o;
    }
    if let Some(p) = penalty_db {
        config.switched.pairing_penalty_db = p;
    }
    if let Some(r) = reconfig {
        config.switched.reconfig_time_s = config::parse_duration_s(r)?;
    }
    if let Some(t) = period {
        config.switched.period_s = config::parse_duration_s(t)?;
    }
    Ok(())
}
