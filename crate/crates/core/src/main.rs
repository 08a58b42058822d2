use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use relay_risk::case::{system_totals, Network};
use relay_risk::config::AssessmentConfig;
use relay_risk::error::{Error, Result};
use relay_risk::powerflow::solve_power_flow;
use relay_risk::relay::{counts_for_shape, instantiate_relays, scenario_counts, ScenarioCounts};
use relay_risk::report::{assess_network, case_name, rank_critical, write_csv, write_json, write_outputs, OutputFormat};

#[derive(Parser)]
#[command(name = "relayrisk", version, about = "Relay compromise risk assessment for transmission grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate every relay outage, score it and write the risk report.
    Assess(AssessArgs),
    /// Report the sizes of the outage scenario spaces.
    Count(CountArgs),
    /// Solve the base-case power flow only.
    Pf(PfArgs),
    /// List every relay slot with its controllability and severe sets.
    Inventory(InventoryArgs),
}

#[derive(Clone, Copy, ValueEnum, Default)]
enum Format {
    #[default]
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Args)]
struct SolverArgs {
    /// TOML configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Mismatch tolerance, per unit.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    enforce_q_limits: bool,
}

impl SolverArgs {
    fn config(&self) -> Result<AssessmentConfig> {
        let mut cfg = match &self.config {
            Some(path) => AssessmentConfig::from_file(path)?,
            None => AssessmentConfig::default(),
        };
        if let Some(tol) = self.tol {
            cfg.solver.tolerance = tol;
        }
        if let Some(n) = self.max_iter {
            cfg.solver.max_iterations = n;
        }
        cfg.solver.enforce_q_limits |= self.enforce_q_limits;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct AssessArgs {
    #[arg(long)]
    case: PathBuf,
    /// Output directory; the report goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[arg(long)]
    seed: Option<u64>,
    /// Random-scheme draws averaged per substation.
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads; 0 uses all cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Suppress progress output on stderr.
    #[arg(long, short)]
    quiet: bool,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct CountArgs {
    /// Count the inventory instantiated on this case.
    #[arg(long, required_unless_present_all = ["substations", "relays"])]
    case: Option<PathBuf>,
    /// Count a hypothetical inventory with this many substations.
    #[arg(long, requires = "relays", conflicts_with = "case")]
    substations: Option<usize>,
    #[arg(long, requires = "substations", conflicts_with = "case")]
    relays: Option<usize>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct PfArgs {
    #[arg(long)]
    case: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct InventoryArgs {
    #[arg(long)]
    case: PathBuf,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[command(flatten)]
    solver: SolverArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Assess(args) => assess(args),
        Command::Count(args) => count(args),
        Command::Pf(args) => pf(args),
        Command::Inventory(args) => inventory(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_base_case_infeasible() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn stdout_err(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn assess(args: AssessArgs) -> Result<()> {
    let mut cfg = args.solver.config()?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if let Some(workers) = args.workers {
        cfg.workers = workers;
    }
    cfg.validate()?;
    let net = Network::load(&args.case)?;
    let name = case_name(&args.case);

    let quiet = args.quiet;
    let progress = move |done: usize, total: usize| {
        if !quiet && (done == total || done.is_multiple_of(50)) {
            eprint!("\r{done}/{total} scenarios");
            if done == total {
                eprintln!();
            }
        }
    };
    let report = assess_network(&net, &name, &cfg, Some(&progress))?;

    let Some(dir) = args.out else {
        let stdout = std::io::stdout().lock();
        return match args.format {
            Format::Csv => write_csv(&report, stdout),
            Format::Json => write_json(&report, stdout),
        };
    };
    let written = write_outputs(&report, &dir, args.format.into())?;
    let ranking = rank_critical(&report);
    let mut out = std::io::stdout().lock();
    let available = report.available_rows().count();
    writeln!(
        out,
        "{name}: {} relay slots, {available} available, {} critical, {:.1}% of available within sigma 0.1",
        report.rows.len(),
        report.critical.len(),
        100.0 * report.histogram.fraction_within_tenth()
    )
    .map_err(stdout_err)?;
    for share in ranking.breakdown.iter().filter(|s| s.count > 0) {
        writeln!(out, "  {:<24}{:>4}  {:5.1}%", share.relay_type, share.count, share.percent).map_err(stdout_err)?;
    }
    for path in written {
        writeln!(out, "wrote {}", path.display()).map_err(stdout_err)?;
    }
    Ok(())
}

fn print_counts(c: &ScenarioCounts, format: Format) -> Result<()> {
    let mut out = std::io::stdout().lock();
    if let Format::Json = format {
        serde_json::to_writer_pretty(&mut out, c)?;
        return writeln!(out).map_err(stdout_err);
    }
    let mut lines = vec![
        format!("substations,{}", c.substations),
        format!("relays,{}", c.relays),
        format!("system_outages,{}", c.system),
    ];
    if let Some(n) = &c.consequences {
        lines.push(format!("single_relay_consequences,{n}"));
    }
    for (k, n) in c.substations_choose.iter().enumerate() {
        lines.push(format!("substations_choose_{},{n}", k + 1));
    }
    for (k, n) in c.relays_choose.iter().enumerate() {
        lines.push(format!("relays_choose_{},{n}", k + 1));
    }
    for (bus, k, n) in &c.per_substation {
        lines.push(format!("substation_{bus}_outages,{n} (K={k})"));
    }
    writeln!(out, "quantity,value\n{}", lines.join("\n")).map_err(stdout_err)
}

fn count(args: CountArgs) -> Result<()> {
    let counts = match (&args.case, args.substations, args.relays) {
        (Some(path), _, _) => {
            let cfg = args.solver.config()?;
            let net = Network::load(path)?;
            let base = solve_power_flow(&net, &cfg.solver)?;
            scenario_counts(&instantiate_relays(&net, &base, &cfg.relays, cfg.flow_end)?)
        }
        (None, Some(s), Some(r)) => counts_for_shape(s, r),
        _ => return Err(Error::Config("give --case or both --substations and --relays".into())),
    };
    print_counts(&counts, args.format)
}

fn pf(args: PfArgs) -> Result<()> {
    let cfg = args.solver.config()?;
    let net = Network::load(&args.case)?;
    let sol = solve_power_flow(&net, &cfg.solver)?;
    let mut out = std::io::stdout().lock();
    match args.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &sol)?;
            writeln!(out).map_err(stdout_err)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(["bus", "vm", "va_deg", "p_injection_mw"])?;
            for (v, p) in sol.bus_voltages.iter().zip(&sol.bus_injections) {
                w.write_record([v.bus.to_string(), v.vm.to_string(), v.va.to_degrees().to_string(), p.to_string()])?;
            }
            w.flush().map_err(stdout_err)?;
        }
    }
    if !sol.is_converged() {
        return Err(Error::BaseCaseInfeasible(format!(
            "power flow {} after {} iterations",
            sol.status, sol.iterations
        )));
    }
    let totals = system_totals(&net, &cfg.solver)?;
    eprintln!(
        "{}: {} in {} iterations, generation {:.2} MW, load {:.2} MW, losses {:.2} MW",
        case_name(&args.case),
        sol.status,
        sol.iterations,
        totals.generation_mw,
        totals.load_mw,
        totals.losses_mw
    );
    Ok(())
}

fn inventory(args: InventoryArgs) -> Result<()> {
    let cfg = args.solver.config()?;
    let net = Network::load(&args.case)?;
    let base = solve_power_flow(&net, &cfg.solver)?;
    let relays = instantiate_relays(&net, &base, &cfg.relays, cfg.flow_end)?;
    let mut buf = Vec::new();
    match args.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut buf, &relays)?;
            buf.push(b'\n');
        }
        Format::Csv => {
            let join = |set: &std::collections::BTreeSet<relay_risk::ComponentRef>| {
                set.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";")
            };
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(["substation", "relay_type", "available", "controlled_power_mw", "controllability", "severe_set"])?;
            for r in &relays.relays {
                w.write_record([
                    r.substation.to_string(),
                    r.relay_type.to_string(),
                    r.available.to_string(),
                    r.controlled_power_mw.to_string(),
                    join(&r.controllability),
                    join(&r.severe_set),
                ])?;
            }
            w.flush().map_err(stdout_err)?;
        }
    }
    write_to(args.out.as_deref(), &buf)
}

fn write_to(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| Error::io(p, e)),
        None => std::io::stdout().write_all(bytes).map_err(stdout_err),
    }
}
