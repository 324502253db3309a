use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use jamroute_core::expt::{
    load_config, run_mc_validation, run_single, run_sweep, save_topology, sweep_csv_path, topology_path,
    ExperimentConfig, PlanDocument,
};
use jamroute_core::planner::DEFAULT_SEQUENCE_LIMIT;
use jamroute_core::{brute_force_plan, plan_with_vehicle, plan_without_vehicle, Error, PointCount, RoutePlan};

const EXIT_CONFIG: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_MISMATCH: u8 = 3;

/// Minimum-energy routing in jammed ad-hoc networks, with and without a vehicle relay.
#[derive(Parser)]
#[command(name = "jamroute", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a topology and write it as JSON.
    Generate(Common),
    /// Plan one seed with and without the vehicle and write both plans.
    Plan(Common),
    /// Run the configured T or P_max sweep and write sweep.csv.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Fill the runtime_s column (makes the CSV non-reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Compare the dynamic programs against exhaustive search.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Override the node count of the configured topology.
        #[arg(long)]
        nodes: Option<usize>,
        /// Largest hop count to enumerate (default N − 1).
        #[arg(long)]
        max_m: Option<usize>,
    },
    /// Compare simulated and closed-form link outage on random links.
    ValidateMc {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
    },
}

#[derive(Args)]
struct Common {
    /// Experiment configuration file (JSON).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Bundled configuration to use instead of a file: reference_alpha2, reference_alpha3,
    /// t_sweep_alpha{2,4,6}, pmax_sweep_alpha2 or small_oracle.
    #[arg(long)]
    preset: Option<String>,
    /// Run only this seed instead of the configured list.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overriding the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Remove the per-node power cap.
    #[arg(long)]
    pmax_infinite: bool,
}

impl Common {
    fn load(&self, default_preset: &str) -> Result<ExperimentConfig, Error> {
        let mut config = match (&self.config, &self.preset) {
            (Some(path), _) => load_config(path)?,
            (None, Some(name)) => ExperimentConfig::bundled(name)?,
            (None, None) => ExperimentConfig::bundled(default_preset)?,
        };
        if let Some(seed) = self.seed {
            config.seeds = vec![seed];
        }
        if let Some(out) = &self.out {
            config.output_dir = out.clone();
        }
        if self.pmax_infinite {
            config.qos.p_max_infinite = true;
        }
        config.validate()?;
        Ok(config)
    }
}

fn describe(doc: &PlanDocument) -> String {
    match &doc.plan {
        None => format!("{:<8} infeasible", doc.mode.as_str()),
        Some(p) => {
            let split = p.hop_split.map(|s| format!(", n={}", s.n)).unwrap_or_default();
            let audit = match &doc.audit {
                Some(a) if a.passed() => "audit ok".to_string(),
                Some(a) => format!("audit FAILED: {}", a.failures.join("; ")),
                None => String::new(),
            };
            format!(
                "{:<8} energy {:.6} J, m={}{split}, outage {:.6}, {audit}",
                doc.mode.as_str(),
                p.total_energy_j,
                p.hop_count(),
                p.end_to_end_outage
            )
        }
    }
}

fn generate(common: &Common) -> Result<u8, Error> {
    let config = common.load("reference_alpha2")?;
    for &seed in &config.seeds {
        let topology = config.topology_for(seed)?;
        let path = topology_path(&config.output_dir, seed);
        save_topology(&path, &topology)?;
        println!("seed {seed}: {} nodes, {} jammers -> {}", topology.nodes.len(), topology.jammers.len(), path.display());
    }
    Ok(0)
}

fn plan(common: &Common) -> Result<u8, Error> {
    let config = common.load("reference_alpha2")?;
    let mut any = false;
    for &seed in &config.seeds {
        let run = run_single(&config, seed)?;
        println!("seed {seed}");
        println!("  {}", describe(&run.vehicle));
        println!("  {}", describe(&run.baseline));
        any |= run.any_feasible();
    }
    println!("plans written to {}", config.output_dir.display());
    Ok(if any { 0 } else { EXIT_INFEASIBLE })
}

fn sweep(common: &Common, timing: bool) -> Result<u8, Error> {
    let config = common.load("t_sweep_alpha2")?;
    let rows = run_sweep(&config, timing)?;
    let feasible = rows.iter().filter(|r| r.feasible).count();
    println!(
        "{} rows ({feasible} feasible) -> {}",
        rows.len(),
        sweep_csv_path(&config.output_dir).display()
    );
    Ok(if !rows.is_empty() && feasible == 0 { EXIT_INFEASIBLE } else { 0 })
}

fn total(plan: &Option<RoutePlan>) -> Option<f64> {
    plan.as_ref().map(|p| p.total_energy_j)
}

fn agrees(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => (x - y).abs() <= 1e-9 * x.abs().max(y.abs()),
        _ => false,
    }
}

fn oracle(common: &Common, nodes: Option<usize>, max_m: Option<usize>) -> Result<u8, Error> {
    let mut config = common.load("small_oracle")?;
    if let Some(n) = nodes {
        config.topology.layout.nodes = PointCount::Count(n);
        config.validate()?;
    }
    let q = config.qos_params()?;
    let msg = config.message_spec()?;
    let opts = config.solver;
    let mut mismatches = 0;
    for &seed in &config.seeds {
        let topology = config.topology_for(seed)?;
        let limit = max_m.unwrap_or(topology.nodes.len().saturating_sub(1)).max(1);
        let opts = jamroute_core::PlannerOptions { max_hops: Some(limit), ..opts };
        let dp_v = plan_with_vehicle(&topology, &q, &msg, &opts)?;
        let dp_b = plan_without_vehicle(&topology, &q, &msg, &opts)?;
        let bf_v = brute_force_plan(&topology, &q, &msg, limit, true, &opts, DEFAULT_SEQUENCE_LIMIT)?;
        let bf_b = brute_force_plan(&topology, &q, &msg, limit, false, &opts, DEFAULT_SEQUENCE_LIMIT)?;
        for (mode, dp, bf) in [("vehicle", &dp_v, &bf_v), ("baseline", &dp_b, &bf_b)] {
            let ok = agrees(total(dp), total(bf));
            mismatches += usize::from(!ok);
            println!(
                "seed {seed} {mode:<8} dp {:?} oracle {:?} {}",
                total(dp),
                total(bf),
                if ok { "ok" } else { "MISMATCH" }
            );
        }
    }
    Ok(if mismatches > 0 { EXIT_MISMATCH } else { 0 })
}

fn validate_mc(common: &Common, samples: usize) -> Result<u8, Error> {
    let config = common.load("reference_alpha2")?;
    for &seed in &config.seeds {
        let report = run_mc_validation(&config, seed, samples)?;
        let path = config.output_dir.join(format!("mc_seed{seed}.json"));
        std::fs::create_dir_all(&config.output_dir)
            .map_err(|source| Error::Io { path: config.output_dir.display().to_string(), source })?;
        std::fs::write(&path, serde_json::to_string_pretty(&report)? + "\n")
            .map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        let inside = report.links.iter().filter(|l| l.within_bound()).count();
        println!(
            "seed {seed}: {inside}/{} links within 4σ, max deviation {:.3e} -> {}",
            report.links.len(),
            report.max_deviation,
            path.display()
        );
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Generate(c) => generate(c),
        Command::Plan(c) => plan(c),
        Command::Sweep { common, timing } => sweep(common, *timing),
        Command::Oracle { common, nodes, max_m } => oracle(common, *nodes, *max_m),
        Command::ValidateMc { common, samples } => validate_mc(common, *samples),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

