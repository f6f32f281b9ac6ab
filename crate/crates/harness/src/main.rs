use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use msar_mc::chp::{chp_bootstrap_test, CHPReport};
use msar_mc::linearity::TestMethod;
use msar_mc::msar::{simulate_msar_path, MsarSpec, RegimeParams, TransitionMatrix};
use msar_mc::rng::rng_from_seed;
use msar_harness::config::{ExperimentConfig, Profile};
use msar_harness::data::{ingest_series, Transform};
use msar_harness::empirical::run_empirical;
use msar_harness::fit_table::regenerate_coeff_table;
use msar_harness::output::{write_table, write_table_file, RunInfo};
use msar_harness::study::{run_study, StudyRow};

#[derive(Parser)]
#[command(name = "msar-mc", version, about = "Monte Carlo linearity tests against Markov-switching AR models")]
struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// LMC/MMC linearity tests on a series.
    Test(TestArgs),
    /// Bootstrap supTS/expTS tests on a series (AR(1) null).
    Chp(ChpArgs),
    /// Size/power study over switching AR(1) designs.
    Study(StudyArgs),
    /// Regenerate the logistic p-value coefficients by simulation.
    FitTable(FitTableArgs),
    /// Simulate a Markov-switching AR(1) path.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct SeriesArgs {
    #[arg(long)]
    series: PathBuf,
    #[arg(long, default_value = "none")]
    transform: Transform,
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    input: SeriesArgs,
    #[arg(long, default_value_t = 4)]
    lags: usize,
    /// MC test size N.
    #[arg(long, default_value_t = 100)]
    mc: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// MMC grid points per dimension (odd); default depends on the lag order.
    #[arg(long)]
    grid_points: Option<usize>,
    /// Comma-separated methods.
    #[arg(long, default_value = "LMC_min,LMC_prod,MMC_min,MMC_prod", value_delimiter = ',')]
    methods: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ChpArgs {
    #[command(flatten)]
    input: SeriesArgs,
    /// Bootstrap samples B; defaults to the profile value.
    #[arg(long)]
    bootstrap: Option<usize>,
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long, default_value = "desk")]
    profile: Profile,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StudyArgs {
    /// Configuration file; command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    profile: Option<Profile>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    mc: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    lags: Option<usize>,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitTableArgs {
    #[arg(long, value_delimiter = ',', default_value = "50,100,150,200,250")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 1_000_000)]
    draws: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 100)]
    t: usize,
    #[arg(long, default_value_t = 0.1)]
    phi: f64,
    #[arg(long, default_value_t = 0.0)]
    delta_mu: f64,
    #[arg(long, default_value_t = 0.0)]
    delta_sigma: f64,
    #[arg(long, default_value_t = 0.9)]
    p11: f64,
    #[arg(long, default_value_t = 0.9)]
    p22: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(out: Option<&Path>, info: &RunInfo, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    match out {
        Some(path) => {
            write_table_file(path, info, header, rows)?;
            eprintln!("wrote {}", path.display());
        }
        None => write_table(std::io::stdout().lock(), info, header, rows)?,
    }
    Ok(())
}

fn cmd_test(a: &TestArgs) -> Result<()> {
    let data = ingest_series(&a.input.series, a.input.transform)?;
    let methods: Vec<TestMethod> = a
        .methods
        .iter()
        .map(|m| TestMethod::parse(m).with_context(|| format!("unknown method `{m}`")))
        .collect::<Result<_>>()?;
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        bail!("alpha must lie in (0, 1)");
    }
    let grid_points = a.grid_points.unwrap_or(0);
    let report = run_empirical(&data.values, a.lags, a.mc, &methods, grid_points, a.seed)?;
    let info = RunInfo::new(
        a.seed,
        vec![
            ("command".into(), "test".into()),
            ("series".into(), a.input.series.display().to_string()),
            ("transform".into(), a.input.transform.to_string()),
            ("lags".into(), a.lags.to_string()),
            ("mc".into(), a.mc.to_string()),
            ("alpha".into(), a.alpha.to_string()),
            ("grid_points".into(), grid_points.to_string()),
            ("methods".into(), a.methods.join(",")),
        ],
    );
    eprintln!(
        "{} observations ({} to {}), AR({}), N = {}, {} grid points",
        data.len(),
        data.first_label().unwrap_or("?"),
        data.last_label().unwrap_or("?"),
        a.lags,
        a.mc,
        report.grid_points
    );
    for r in &report.reports {
        let verdict = if r.p_value <= a.alpha { "reject" } else { "do not reject" };
        eprintln!("  {:<9} p = {:.3}  {verdict} at {}", r.method.as_str(), r.p_value, a.alpha);
    }
    let header = report.csv_header();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    emit(a.out.as_deref(), &info, &header, &report.csv_rows())
}

fn cmd_chp(a: &ChpArgs) -> Result<()> {
    let data = ingest_series(&a.input.series, a.input.transform)?;
    let defaults = ExperimentConfig::for_profile(a.profile);
    let b = a.bootstrap.unwrap_or(defaults.bootstrap);
    let draws = a.draws.unwrap_or(defaults.chp_draws);
    let report = chp_bootstrap_test(&data.values, b, draws, a.seed)?;
    let info = RunInfo::new(
        a.seed,
        vec![
            ("command".into(), "chp".into()),
            ("series".into(), a.input.series.display().to_string()),
            ("transform".into(), a.input.transform.to_string()),
            ("bootstrap".into(), b.to_string()),
            ("draws".into(), draws.to_string()),
        ],
    );
    eprintln!(
        "supTS = {:.4} (p = {:.3}), ln expTS = {:.4} (p = {:.3}), B = {b}",
        report.sup_ts, report.bootstrap_p_sup, report.ln_exp_ts, report.bootstrap_p_exp
    );
    let header: Vec<&str> = CHPReport::CSV_HEADER.split(',').collect();
    let rows: Vec<Vec<String>> =
        report.csv_rows().iter().map(|r| r.split(',').map(str::to_string).collect()).collect();
    emit(a.out.as_deref(), &info, &header, &rows)
}

fn cmd_study(a: &StudyArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::for_profile(a.profile.unwrap_or_default()),
    };
    if let Some(p) = a.profile {
        if a.config.is_some() {
            cfg.profile = p;
        }
    }
    if let Some(v) = a.reps {
        cfg.replications = v;
    }
    if let Some(v) = a.mc {
        cfg.mc = v;
    }
    if let Some(v) = a.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.lags {
        cfg.lags = v;
    }
    if let Some(v) = a.grid_points {
        cfg.grid_points = v;
    }
    cfg.validate()?;
    let rows = run_study(&cfg)?;
    for r in &rows {
        let rate = r.rejection_rate().map_or("failed".to_string(), |p| format!("{:5.1}%", 100.0 * p));
        eprintln!("T={:<4} phi={:<4} {:<60} {:<9} {rate}", r.t, r.phi, format!("{:?}", r.dgp), r.method.as_str());
    }
    let info = RunInfo::new(cfg.seed, cfg.to_key_values());
    let records: Vec<Vec<String>> = rows.iter().map(StudyRow::to_record).collect();
    emit(a.out.as_deref(), &info, &StudyRow::CSV_HEADER, &records)
}

fn cmd_fit_table(a: &FitTableArgs) -> Result<()> {
    let (table, _) = regenerate_coeff_table(&a.sizes, a.draws, a.seed)?;
    let info = RunInfo::new(
        a.seed,
        vec![
            ("command".into(), "fit-table".into()),
            ("sizes".into(), a.sizes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")),
            ("draws".into(), a.draws.to_string()),
        ],
    );
    let rows: Vec<Vec<String>> = table
        .entries()
        .map(|c| {
            vec![
                c.statistic.to_string(),
                c.sample_size.to_string(),
                format!("{:.3}", c.gamma0),
                format!("{:.3}", c.gamma1),
            ]
        })
        .collect();
    emit(a.out.as_deref(), &info, &["statistic", "T", "gamma0", "gamma1"], &rows)
}

fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let spec = MsarSpec::new(
        RegimeParams::from_separations(0.0, 1.0, a.delta_mu, a.delta_sigma)?,
        TransitionMatrix::new(a.p11, a.p22)?,
        vec![a.phi],
    )?;
    let path = simulate_msar_path(&spec, a.t, spec.default_burn_in(), &mut rng_from_seed(a.seed))?;
    let info = RunInfo::new(
        a.seed,
        vec![
            ("command".into(), "simulate".into()),
            ("t".into(), a.t.to_string()),
            ("phi".into(), a.phi.to_string()),
            ("delta_mu".into(), a.delta_mu.to_string()),
            ("delta_sigma".into(), a.delta_sigma.to_string()),
            ("p11".into(), a.p11.to_string()),
            ("p22".into(), a.p22.to_string()),
        ],
    );
    let rows: Vec<Vec<String>> = path
        .y
        .iter()
        .zip(&path.states)
        .enumerate()
        .map(|(i, (y, s))| vec![(i + 1).to_string(), format!("{y:.10}"), s.label().to_string()])
        .collect();
    emit(a.out.as_deref(), &info, &["t", "y", "state"], &rows)
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        rayon::ThreadPoolBuilder::new().num_threads(w).build_global().context("configuring worker pool")?;
    }
    match &cli.command {
        Command::Test(a) => cmd_test(a),
        Command::Chp(a) => cmd_chp(a),
        Command::Study(a) => cmd_study(a),
        Command::FitTable(a) => cmd_fit_table(a),
        Command::Simulate(a) => cmd_simulate(a),
    }
}
