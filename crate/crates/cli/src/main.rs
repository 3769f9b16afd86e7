use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};

use onebit::baselines::{biht, exhaustive_l0, lp_estimate, BihtOptions};
use onebit::bench::presets::{self, Profile};
use onebit::bench::{self, AggregateRow, DecodeSettings, ExperimentPlan, Method};
use onebit::dataset::Dataset;
use onebit::diagnostics::diagnose;
use onebit::model::{generate, ProblemConfig, SignalKind};
use onebit::report::SparseReport;
use onebit::solver::{run_gna, SolverOptions};

#[derive(Parser)]
#[command(name = "onebit", version, about = "Sparse decoding from 1-bit measurements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset into an OB1T container.
    Gen(GenArgs),
    /// Decode a container and print the report as JSON.
    Solve(SolveArgs),
    /// Run a Monte Carlo plan file.
    Bench(BenchArgs),
    /// Restricted-spectrum diagnostics of a container's matrix.
    Diag(DiagArgs),
    /// Run a named preset (fig1, fig2a..fig2d, table1a..table1c, wavelet1d).
    Repro(ReproArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Key-value config file (m, n, s, nu, sigma, flip_prob, seed).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    nu: f64,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0.0)]
    flip_prob: f64,
    /// Nonzero value distribution: sign (equal magnitudes) or gaussian.
    #[arg(long)]
    signal: Option<SignalKind>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, short)]
    out: PathBuf,
    /// Also write the ground-truth signal as JSON.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    container: PathBuf,
    #[arg(long, default_value = "gna")]
    method: Method,
    /// Sparsity; defaults to the value stored in the container.
    #[arg(long)]
    s: Option<usize>,
    #[arg(long, default_value_t = 0.9)]
    eta: f64,
    #[arg(long, default_value_t = 5)]
    max_iter: usize,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "results")]
    out_dir: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct DiagArgs {
    container: PathBuf,
    #[arg(long)]
    s: Option<usize>,
    /// Maximum number of supports to evaluate.
    #[arg(long, default_value_t = 10_000)]
    budget: usize,
    /// Random directions for the cone constants.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReproArgs {
    preset: String,
    #[arg(long, default_value = "results")]
    out_dir: PathBuf,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, default_value_t = 2019)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
    /// Include the full-size configurations.
    #[arg(long)]
    full: bool,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Bench(a) => run_bench(a),
        Command::Diag(a) => diag(a),
        Command::Repro(a) => repro(a),
    }
}

fn write_or_print(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn gen(a: GenArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(path) => ProblemConfig::load(path)?,
        None => {
            let (Some(m), Some(n), Some(s)) = (a.m, a.n, a.s) else {
                bail!("either --config or all of --m, --n, --s are required");
            };
            ProblemConfig::new(m, n, s, a.nu, a.sigma, a.flip_prob)
        }
    };
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(signal) = a.signal {
        cfg.signal = signal;
    }
    let inst = generate(&cfg, &mut ChaCha8Rng::seed_from_u64(cfg.seed))?;
    Dataset::from_observation(cfg.s, inst.ensemble.matrix, &inst.observation).save(&a.out)?;
    if let Some(path) = &a.truth {
        let text = serde_json::to_string_pretty(&inst.signal)?;
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    eprintln!(
        "wrote {} (m={}, n={}, s={}, flips={:.3})",
        a.out.display(),
        cfg.m,
        cfg.n,
        cfg.s,
        inst.observation.flip_fraction()
    );
    Ok(())
}

fn solve(a: SolveArgs) -> Result<()> {
    let ds = Dataset::load(&a.container)?;
    let s = a.s.unwrap_or(ds.s);
    let report = match a.method {
        Method::Gna => {
            let opts = SolverOptions::new(s).eta(a.eta).max_iter(a.max_iter);
            SparseReport::from(&run_gna(&ds.matrix, &ds.y, &opts, None)?)
        }
        Method::Biht => SparseReport::from(&biht(&ds.matrix, &ds.y, &BihtOptions::new(s))?),
        Method::Lp => SparseReport::from_estimate(&lp_estimate(&ds.matrix, &ds.y, s)?),
        Method::Oracle => SparseReport::from(&exhaustive_l0(&ds.matrix, &ds.y, s)?),
    };
    write_or_print(&serde_json::to_string_pretty(&report)?, a.out.as_deref())
}

fn print_rows(rows: &[AggregateRow]) {
    println!(
        "{:>6} {:>6} {:>4} {:>5} {:>6} {:>6} {:>7} {:>10} {:>10} {:>7} {:>6}",
        "m", "n", "s", "nu", "sigma", "q", "method", "time_s", "l2_err", "PrE%", "iter"
    );
    for r in rows {
        println!(
            "{:>6} {:>6} {:>4} {:>5} {:>6} {:>6} {:>7} {:>10.3e} {:>10.3e} {:>7.1} {:>6.2}",
            r.m, r.n, r.s, r.nu, r.sigma, r.flip_prob, r.method.name(), r.mean_time_s, r.mean_l2_err,
            r.pre_percent, r.mean_iterations
        );
    }
}

fn execute(plan: &ExperimentPlan, out_dir: &Path, stem: &str) -> Result<()> {
    let records = bench::run_trials(plan)?;
    let failures = records.iter().filter(|r| r.error.is_some()).count();
    if failures > 0 {
        eprintln!("warning: {failures} trials reported decoder errors");
    }
    print_rows(&bench::aggregate(&records)?);
    for path in bench::write_outputs(plan, &records, out_dir, stem)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn run_bench(a: BenchArgs) -> Result<()> {
    let mut plan = ExperimentPlan::load(&a.plan)?;
    if let Some(r) = a.reps {
        plan.replications = r;
    }
    if let Some(s) = a.seed {
        plan.base_seed = s;
    }
    if a.threads.is_some() {
        plan.threads = a.threads;
    }
    let stem = a
        .plan
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("bench")
        .to_string();
    execute(&plan, &a.out_dir, &stem)
}

fn diag(a: DiagArgs) -> Result<()> {
    let ds = Dataset::load(&a.container)?;
    let s = a.s.unwrap_or(ds.s);
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let report = diagnose(&ds.matrix, s, a.budget, a.samples, &mut rng)?;
    write_or_print(&serde_json::to_string_pretty(&report)?, a.out.as_deref())
}

fn repro(a: ReproArgs) -> Result<()> {
    let profile = if a.full { Profile::Full } else { Profile::Default };
    if a.preset == "wavelet1d" {
        return repro_wavelet(&a, profile);
    }
    let mut plan = presets::plan(&a.preset, profile, a.reps.unwrap_or(100), a.seed)?;
    plan.threads = a.threads;
    execute(&plan, &a.out_dir, &a.preset)
}

fn repro_wavelet(a: &ReproArgs, profile: Profile) -> Result<()> {
    let preset = presets::wavelet1d(profile);
    let reps = a.reps.unwrap_or(preset.replications);
    std::fs::create_dir_all(&a.out_dir)?;
    let mut totals = vec![(0.0, 0.0, 0usize); preset.methods.len()];
    let mut last = None;
    for rep in 0..reps {
        let mut rng = bench::cell_rng(a.seed, 0, rep);
        let trial = bench::wavelet_experiment(
            &preset.config,
            preset.level,
            &preset.methods,
            &DecodeSettings::default(),
            &mut rng,
        )?;
        for (t, o) in totals.iter_mut().zip(&trial.outcomes) {
            t.0 += o.record.wall_time_s;
            t.1 += o.psnr;
            t.2 += 1;
        }
        last = Some(trial);
    }
    println!("{:>7} {:>12} {:>8}", "method", "time_s", "PSNR");
    for (m, t) in preset.methods.iter().zip(&totals) {
        println!("{:>7} {:>12.3e} {:>8.2}", m.name(), t.0 / t.2 as f64, t.1 / t.2 as f64);
    }
    if let Some(trial) = last {
        let path = a.out_dir.join("wavelet1d_signals.csv");
        let mut text = String::from("index,truth");
        for m in &preset.methods {
            text.push_str(&format!(",{m}"));
        }
        text.push('\n');
        for i in 0..trial.signal.len() {
            text.push_str(&format!("{},{}", i, trial.signal[i]));
            for o in &trial.outcomes {
                text.push_str(&format!(",{}", o.reconstruction[i]));
            }
            text.push('\n');
        }
        std::fs::write(&path, text)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}
