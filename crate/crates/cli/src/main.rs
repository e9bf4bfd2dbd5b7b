use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use modelsched::data::derive_seed;
use modelsched::engine::SubsetEvaluator;
use modelsched::harness::loader::{write_cost_profile, write_dataset};
use modelsched::harness::output::{read_schedule, write_file, write_schedule, write_staircase};
use modelsched::harness::{
    emit_outputs, load_cost_profile, load_dataset_csv, run_experiment, split_dataset, ExperimentConfig, LoadedDataset,
    Method,
};
use modelsched::oracle::{coverage_fraction, exhaustive_schedule};
use modelsched::sequences::{
    logitb_from_path, model_seq, model_seq_l, model_seq_sampled, training_path, PathEngine, RemovalRule,
};
use modelsched::synth::{sample_cost_profile, sample_mixture, MixtureSpec};
use modelsched::{msb, Cost, CostProfile, Error, ErrorKind, MsbConfig, SequenceRun, SplitData};

#[derive(Parser)]
#[command(name = "modelsched", version, about = "Cost-sensitive model schedules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the four-component Gaussian mixture
    Synth(SynthArgs),
    /// Sample a random cost profile
    Costs(CostsArgs),
    /// Build the msb schedule on one split
    Schedule(RunArgs),
    /// Run a single model-sequence generator
    Sequence(SequenceArgs),
    /// Find the best model in a schedule under a budget
    Lookup(LookupArgs),
    /// Exhaustive search over all subsets, compared with msb
    Oracle(RunArgs),
    /// msb and logitb schedules on one split
    Compare(RunArgs),
    /// Repeated msb-vs-logitb runs with random cost profiles
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    rho: f64,
    #[arg(long, default_value_t = 50_000)]
    n: usize,
    /// Multiplies n, for smaller desk runs
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CostsArgs {
    /// Number of variables; taken from --data when omitted
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value = "label")]
    label_col: String,
    #[arg(long, value_parser = parse_range, default_value = "1,100")]
    cost_range: (f64, f64),
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct CommonArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "label")]
    label_col: String,
    /// Cost profile file (feature name or index, cost)
    #[arg(long, conflicts_with = "cost_range")]
    costs: Option<PathBuf>,
    /// Sample costs uniformly from lo,hi
    #[arg(long, value_parser = parse_range)]
    cost_range: Option<(f64, f64)>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    trees: usize,
    #[arg(long, default_value_t = modelsched::sequences::DEFAULT_GAMMA)]
    gamma: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum SequenceType {
    Importance,
    Cost,
    Sampling,
    L1,
}

#[derive(Args)]
struct SequenceArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long = "type", value_enum)]
    kind: SequenceType,
    /// Drop sampled models costing more than this
    #[arg(long)]
    budget: Option<Cost>,
}

#[derive(Args)]
struct LookupArgs {
    #[arg(long)]
    schedule: PathBuf,
    #[arg(long)]
    budget: Cost,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, default_value_t = 100)]
    runs: usize,
}

fn parse_range(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected lo,hi")?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("{e}"))?;
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err("need 0 < lo <= hi".into());
    }
    Ok((lo, hi))
}

type Res<T> = modelsched::Result<T>;

fn create_dir(dir: &Path) -> Res<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Dataset, cost profile and split shared by the single-split commands.
struct Prepared {
    loaded: LoadedDataset,
    profile: CostProfile,
    split: SplitData,
    config: MsbConfig,
}

fn profile_for(common: &CommonArgs, loaded: &LoadedDataset, seed: u64) -> Res<CostProfile> {
    match &common.costs {
        Some(path) => {
            let profile = load_cost_profile(path, Some(&loaded.feature_names))?;
            if profile.len() != loaded.data.p() {
                return Err(Error::DimensionMismatch {
                    expected: loaded.data.p(),
                    got: profile.len(),
                });
            }
            Ok(profile)
        }
        None => {
            let (lo, hi) = common.cost_range.unwrap_or((1.0, 100.0));
            sample_cost_profile(loaded.data.p(), lo, hi, seed)
        }
    }
}

fn msb_config(common: &CommonArgs, seed: u64) -> Res<MsbConfig> {
    if common.trees == 0 {
        return Err(Error::InvalidConfig("--trees must be at least 1".into()));
    }
    if !(common.gamma.is_finite() && common.gamma >= 0.0) {
        return Err(Error::InvalidConfig("--gamma must be a non-negative number".into()));
    }
    let mut config = MsbConfig {
        gamma: common.gamma,
        seed,
        ..MsbConfig::default()
    };
    config.forest.n_trees = common.trees;
    Ok(config)
}

/// Seeds follow the experiment runner: stream 1 costs, 2 split, 3 msb.
fn prepare(common: &CommonArgs) -> Res<Prepared> {
    let loaded = load_dataset_csv(&common.data, &common.label_col)?;
    let profile = profile_for(common, &loaded, derive_seed(common.seed, 1))?;
    let split = split_dataset(loaded.data.n(), derive_seed(common.seed, 2))?.apply(&loaded.data);
    let config = msb_config(common, derive_seed(common.seed, 3))?;
    create_dir(&common.out)?;
    let prepared = Prepared {
        loaded,
        profile,
        split,
        config,
    };
    let out = &common.out;
    write_file(&out.join("costs.csv"), |w| write_cost_profile(&prepared.profile, w))?;
    write_file(&out.join("labels.csv"), |w| prepared.loaded.write_label_map(w))?;
    Ok(prepared)
}

fn print_schedule(title: &str, schedule: &modelsched::ModelSchedule) {
    println!("{title}");
    println!("{:>10}  {:>8}  {:>8}  variables", "cost", "val", "test");
    for r in schedule.records() {
        let test = r.test_accuracy.map_or("-".to_string(), |t| format!("{t:.4}"));
        println!("{:>10}  {:>8.4}  {:>8}  {}", r.cost.to_string(), r.val_accuracy, test, r.variables);
    }
}

fn write_msb(out: &Path, result: &modelsched::MsbResult) -> Res<()> {
    write_schedule(&out.join("msb.csv"), &result.schedule)?;
    write_staircase(&out.join("msb.svg"), &result.schedule, "msb schedule")?;
    for m in &result.members {
        write_file(&out.join(format!("trace_{}.csv", m.kind.name())), |w| m.write_trace(w))?;
    }
    write_file(&out.join("l1path.csv"), |w| result.path.write_csv(w))
}

fn cmd_synth(a: &SynthArgs) -> Res<()> {
    if !(a.scale > 0.0 && a.scale.is_finite()) {
        return Err(Error::InvalidConfig("--scale must be positive".into()));
    }
    let n = ((a.n as f64) * a.scale).round() as usize;
    let data = sample_mixture(&MixtureSpec::new(a.rho, n, a.seed))?;
    let names: Vec<String> = (1..=data.p()).map(|j| format!("x{j}")).collect();
    let file = fs::File::create(&a.out).map_err(|e| Error::io(&a.out, e))?;
    write_dataset(&data, &names, std::io::BufWriter::new(file))?;
    eprintln!("wrote {n} rows to {}", a.out.display());
    Ok(())
}

fn cmd_costs(a: &CostsArgs) -> Res<()> {
    let p = match (a.p, &a.data) {
        (Some(p), _) => p,
        (None, Some(path)) => load_dataset_csv(path, &a.label_col)?.data.p(),
        (None, None) => return Err(Error::InvalidConfig("give --p or --data".into())),
    };
    let profile = sample_cost_profile(p, a.cost_range.0, a.cost_range.1, a.seed)?;
    write_file(&a.out, |w| write_cost_profile(&profile, w))
}

fn cmd_schedule(a: &RunArgs) -> Res<()> {
    let prep = prepare(&a.common)?;
    let result = msb(&prep.split, &prep.profile, &prep.config)?;
    write_msb(&a.common.out, &result)?;
    print_schedule("msb", &result.schedule);
    Ok(())
}

fn cmd_sequence(a: &SequenceArgs) -> Res<()> {
    let prep = prepare(&a.common)?;
    let eval = SubsetEvaluator::new(&prep.split, prep.config.engine_params());
    let importance = || eval.full_model_importance(prep.config.importance_seed());
    let run: SequenceRun = match a.kind {
        SequenceType::Cost => model_seq(&eval, &prep.profile, RemovalRule::Cost)?,
        SequenceType::Importance => model_seq(&eval, &prep.profile, RemovalRule::Importance(&importance()?))?,
        SequenceType::Sampling => model_seq_sampled(
            &eval,
            &prep.profile,
            &importance()?,
            prep.config.gamma,
            a.budget,
            prep.config.sampling_seed(),
        )?,
        SequenceType::L1 => {
            let path = training_path(&prep.split, &prep.config.path)?;
            model_seq_l(&eval, &prep.profile, &path, PathEngine::Forest)?
        }
    };
    let out = &a.common.out;
    let name = run.kind.name();
    write_file(&out.join(format!("trace_{name}.csv")), |w| run.write_trace(w))?;
    let schedule = run.schedule();
    write_schedule(&out.join(format!("sequence_{name}.csv")), &schedule)?;
    print_schedule(name, &schedule);
    Ok(())
}

fn cmd_lookup(a: &LookupArgs) -> Res<()> {
    let schedule = read_schedule(&a.schedule)?;
    let r = schedule.best_under_budget(a.budget)?;
    println!("cost,val_accuracy,test_accuracy,variables,source");
    let test = r.test_accuracy.map_or(String::new(), |t| t.to_string());
    println!("{},{},{},{},{}", r.cost, r.val_accuracy, test, r.variables, r.source);
    Ok(())
}

fn cmd_oracle(a: &RunArgs) -> Res<()> {
    let prep = prepare(&a.common)?;
    let result = msb(&prep.split, &prep.profile, &prep.config)?;
    let (exhaustive, space) = exhaustive_schedule(&prep.split, &prep.profile, &prep.config.engine_params())?;
    let out = &a.common.out;
    write_msb(out, &result)?;
    write_schedule(&out.join("exhaustive.csv"), &exhaustive)?;
    write_staircase(&out.join("exhaustive.svg"), &exhaustive, "exhaustive schedule")?;
    write_file(&out.join("space.csv"), |w| space.write_csv(w))?;
    let visited = result.visited_subsets();
    let coverage = coverage_fraction(&space, &visited);
    write_file(&out.join("coverage.csv"), |w| {
        writeln!(w, "visited,space,fraction")?;
        writeln!(w, "{},{},{}", visited.len(), space.len(), coverage)
    })?;
    print_schedule("msb", &result.schedule);
    print_schedule("exhaustive", &exhaustive);
    println!("coverage {}/{} = {coverage:.4}", visited.len(), space.len());
    Ok(())
}

fn cmd_compare(a: &RunArgs) -> Res<()> {
    let prep = prepare(&a.common)?;
    let result = msb(&prep.split, &prep.profile, &prep.config)?;
    let logitb = logitb_from_path(&prep.split, &prep.profile, &result.path)?;
    let out = &a.common.out;
    write_msb(out, &result)?;
    write_schedule(&out.join("logitb.csv"), &logitb)?;
    write_staircase(&out.join("logitb.svg"), &logitb, "logitb schedule")?;
    print_schedule(Method::Msb.name(), &result.schedule);
    print_schedule(Method::LogitB.name(), &logitb);
    Ok(())
}

fn cmd_experiment(a: &ExperimentArgs) -> Res<()> {
    let c = &a.common;
    let loaded = load_dataset_csv(&c.data, &c.label_col)?;
    let fixed_costs = match &c.costs {
        Some(path) => Some(load_cost_profile(path, Some(&loaded.feature_names))?),
        None => None,
    };
    let config = ExperimentConfig {
        runs: a.runs,
        cost_range: c.cost_range.unwrap_or((1.0, 100.0)),
        fixed_costs,
        seed: c.seed,
        msb: msb_config(c, 0)?,
        ..ExperimentConfig::default()
    };
    let result = run_experiment(&loaded.data, &config)?;
    let written = emit_outputs(&result, &c.out)?;
    write_file(&c.out.join("labels.csv"), |w| loaded.write_label_map(w))?;
    eprintln!(
        "{} runs ok, {} failed, {} files in {}",
        result.runs.len(),
        result.failures.len(),
        written.len() + 1,
        c.out.display()
    );
    for (run, e) in &result.failures {
        eprintln!("run {run}: {e}");
    }
    if result.runs.is_empty() {
        return Err(result.failures.into_iter().next().map(|(_, e)| e).unwrap_or(Error::EmptyEvaluationSet));
    }
    for x in [0.25, 0.5, 0.75, 1.0] {
        let m = result.smoothed_at(Method::Msb, x);
        let l = result.smoothed_at(Method::LogitB, x);
        if let (Ok(m), Ok(l)) = (m, l) {
            println!("normalized cost {x:.2}: msb {m:.4}  logitb {l:.4}");
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Res<()> {
    match &cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Costs(a) => cmd_costs(a),
        Command::Schedule(a) => cmd_schedule(a),
        Command::Sequence(a) => cmd_sequence(a),
        Command::Lookup(a) => cmd_lookup(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Experiment(a) => cmd_experiment(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Usage => 1,
                ErrorKind::Data => 2,
                ErrorKind::Computation => 3,
            })
        }
    }
}
