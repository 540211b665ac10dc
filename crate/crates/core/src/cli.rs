//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cost::{self, AccountingMode, CostParams, Instance};
use crate::error::{Error, Result};
use crate::experiments::{self, ExperimentSpec, OptimizerKind, OutputFormat, SweepAxis};
use crate::optimizer::{self, PsoConfig};
use crate::popularity::Catalog;
use crate::simulator::{self, SimConfig};

#[derive(Debug, Parser)]
#[command(
    name = "edgecache",
    about = "Redundancy/diversity tradeoff for base-station caches"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate every redundant count and print the exact optimum.
    Oracle(InstanceArgs),
    /// Search the redundancy ratio with particle swarm optimization.
    Optimize(OptimizeArgs),
    /// Run a parameter sweep and write CSV or JSON rows.
    Sweep(SweepArgs),
    /// Compare Monte-Carlo request streams against the analytic cost.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    PerRequest,
    PaperLiteral,
}

impl From<ModeArg> for AccountingMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::PerRequest => AccountingMode::PerRequest,
            ModeArg::PaperLiteral => AccountingMode::PaperLiteral,
        }
    }
}

#[derive(Debug, Clone, Args)]
struct InstanceArgs {
    /// Number of base stations.
    #[arg(long = "n", default_value_t = 6)]
    bs_count: usize,
    /// Cache size per station, in files.
    #[arg(long = "m", default_value_t = 50)]
    cache_size: usize,
    /// Catalog size.
    #[arg(long = "f", default_value_t = 500)]
    file_count: usize,
    /// Zipf exponent.
    #[arg(long = "s", default_value_t = 0.8)]
    exponent: f64,
    /// Unit RAN transfer cost.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Backhaul-to-RAN unit cost ratio.
    #[arg(long = "mu-br", default_value_t = 4.0)]
    mu_br: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::PerRequest)]
    mode: ModeArg,
}

impl InstanceArgs {
    fn instance(&self) -> Result<Instance> {
        Instance::new(
            self.bs_count,
            self.cache_size,
            Catalog::new(self.file_count, self.exponent)?,
            CostParams::new(self.alpha, self.mu_br, self.mode.into())?,
        )
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    Literal,
    Practical,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_enum, default_value_t = Preset::Literal)]
    preset: Preset,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    swarm_size: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Also print the global-best trace.
    #[arg(long)]
    trace: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// JSON experiment description; replaces all instance flags.
    #[arg(long, conflicts_with_all = ["axis", "values"])]
    config: Option<PathBuf>,
    #[arg(long, required_unless_present = "config")]
    axis: Option<String>,
    /// Comma-separated axis values.
    #[arg(long, value_delimiter = ',', required_unless_present = "config")]
    values: Option<Vec<f64>>,
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value = "oracle")]
    optimizer: String,
    /// Draw the station count per point from the Poisson process.
    #[arg(long)]
    ppp: bool,
    #[arg(long, default_value_t = 100.0)]
    radius: f64,
    #[arg(long, default_value_t = 2e-4)]
    density: f64,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Redundant counts to simulate; defaults to the exact optimum.
    #[arg(long = "r", value_delimiter = ',')]
    redundant: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1_000_000)]
    requests: usize,
    /// Draw the station count per trial from the Poisson process.
    #[arg(long)]
    ppp: bool,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 100.0)]
    radius: f64,
    #[arg(long, default_value_t = 2e-4)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit status.
pub fn cli_main<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };

    let result = match cli.command {
        Command::Oracle(a) => run_oracle(&a, out),
        Command::Optimize(a) => run_optimize(&a, out),
        Command::Sweep(a) => run_sweep(&a, out, err),
        Command::Simulate(a) => run_simulate(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::invalid("output", e.to_string())
}

fn run_oracle(args: &InstanceArgs, out: &mut dyn Write) -> Result<i32> {
    let instance = args.instance()?;
    let curve = cost::cost_curve(&instance);
    let res = optimizer::exhaustive_oracle(&instance)?;

    let mut text = String::from("r,eta,c_ran,c_bh,c_total\n");
    for p in &curve {
        let eta = optimizer::eta_for(p.redundant_count, instance.cache_size);
        match p.costs {
            Some(c) => text.push_str(&format!(
                "{},{},{},{},{}\n",
                p.redundant_count, eta, c.ran, c.backhaul, c.total
            )),
            None => text.push_str(&format!("{},{},infeasible,,\n", p.redundant_count, eta)),
        }
    }
    text.push_str(&format!(
        "r_opt={} eta_opt={} cost_opt={}\n",
        res.r_opt, res.eta_opt, res.cost_opt
    ));
    out.write_all(text.as_bytes()).map_err(io_err)?;
    Ok(0)
}

fn run_optimize(args: &OptimizeArgs, out: &mut dyn Write) -> Result<i32> {
    let instance = args.instance.instance()?;
    let mut cfg = match args.preset {
        Preset::Literal => PsoConfig::literal(),
        Preset::Practical => PsoConfig::practical(),
    }
    .with_seed(args.seed);
    if let Some(m) = args.swarm_size {
        cfg.swarm_size = m;
    }
    if let Some(t) = args.max_iters {
        cfg.max_iters = t;
    }

    let res = optimizer::pso_optimize(&instance, &cfg)?;
    let oracle = optimizer::exhaustive_oracle(&instance)?;
    let gap = if oracle.cost_opt == 0.0 {
        0.0
    } else {
        100.0 * (res.cost_opt / oracle.cost_opt - 1.0)
    };

    let preset = match args.preset {
        Preset::Literal => "literal",
        Preset::Practical => "practical",
    };
    let mut text = format!(
        "preset={preset} seed={}\n\
         eta_opt={} r_opt={} cost_opt={} iterations={} evaluations={}\n\
         oracle_r_opt={} oracle_cost={} gap_pct={}\n",
        cfg.seed,
        res.eta_opt,
        res.r_opt,
        res.cost_opt,
        res.iterations_run,
        res.evaluations,
        oracle.r_opt,
        oracle.cost_opt,
        gap,
    );
    if args.trace {
        let trace: Vec<String> = res.trace.iter().flatten().map(|c| c.to_string()).collect();
        text.push_str(&format!("trace={}\n", trace.join(",")));
    }
    out.write_all(text.as_bytes()).map_err(io_err)?;
    Ok(0)
}

fn sweep_spec(args: &SweepArgs) -> Result<ExperimentSpec> {
    let mut spec = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::invalid("config", format!("{}: {e}", path.display())))?;
            ExperimentSpec::from_json(&text)?
        }
        None => {
            let axis: SweepAxis = args.axis.as_deref().unwrap_or_default().parse()?;
            let values = args.values.clone().unwrap_or_default();
            let i = &args.instance;
            ExperimentSpec {
                bs_count: i.bs_count,
                ppp: args.ppp,
                radius: args.radius,
                density: args.density,
                cache_size: i.cache_size,
                file_count: i.file_count,
                exponent: i.exponent,
                alpha: i.alpha,
                mu_br: i.mu_br,
                mode: i.mode.into(),
                optimizer: args.optimizer.parse::<OptimizerKind>()?,
                ..ExperimentSpec::new(axis, values)
            }
        }
    };
    if let Some(path) = &args.output {
        spec.output = Some(path.clone());
    }
    if let Some(f) = &args.format {
        spec.format = f.parse::<OutputFormat>()?;
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    Ok(spec)
}

fn run_sweep(args: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let spec = sweep_spec(args)?;
    let result = experiments::run_sweep(&spec)?;
    for note in &result.notes {
        let _ = writeln!(err, "note: {note}");
    }
    let doc = experiments::emit(&result.rows, spec.format);
    match &spec.output {
        Some(path) => std::fs::write(path, doc)
            .map_err(|e| Error::invalid("output", format!("{}: {e}", path.display())))?,
        None => out.write_all(doc.as_bytes()).map_err(io_err)?,
    }
    Ok(0)
}

fn run_simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<i32> {
    let instance = args.instance.instance()?;
    let cfg = SimConfig {
        radius: args.radius,
        density: args.density,
        fixed_bs_count: (!args.ppp).then_some(instance.bs_count),
        requests_per_trial: args.requests,
        trials: args.trials,
        seed: args.seed,
    };
    cfg.validate()?;
    let grid = match &args.redundant {
        Some(g) => g.clone(),
        None => vec![optimizer::exhaustive_oracle(&instance)?.r_opt],
    };

    let mut text = String::from("r,n_bs,analytic,empirical,std_error,z,status\n");
    let mut all_pass = true;
    if args.ppp {
        for (idx, &r) in grid.iter().enumerate() {
            let row_cfg = SimConfig {
                seed: simulator::derive_seed(args.seed, idx as u64),
                ..cfg.clone()
            };
            for t in simulator::run_trials(
                &row_cfg,
                instance.cache_size,
                r,
                &instance.catalog,
                &instance.cost,
            )? {
                let pass = t.z_score().abs() <= simulator::Z_THRESHOLD;
                all_pass &= pass;
                text.push_str(&trial_line(&t, if pass { "pass" } else { "fail" }));
            }
        }
    } else {
        let report = simulator::validate_model(&cfg, &instance, &grid)?;
        all_pass = report.all_pass();
        for row in &report.rows {
            match &row.trial {
                Some(t) => {
                    let status = serde_json::to_value(row.status).expect("status serializes");
                    text.push_str(&trial_line(t, status.as_str().unwrap_or_default()));
                }
                None => text.push_str(&format!(
                    "{},{},,,,,infeasible\n",
                    row.redundant_count, instance.bs_count
                )),
            }
        }
    }
    text.push_str(if all_pass {
        "summary=pass\n"
    } else {
        "summary=fail\n"
    });
    out.write_all(text.as_bytes()).map_err(io_err)?;
    Ok(if all_pass { 0 } else { 1 })
}

fn trial_line(t: &simulator::TrialResult, status: &str) -> String {
    format!(
        "{},{},{},{},{},{},{}\n",
        t.redundant_count,
        t.n_bs,
        t.analytic_cost_per_request,
        t.empirical_cost_per_request,
        t.std_error,
        t.z_score(),
        status
    )
}
