//! Command-line front end. Exit codes: 0 success, 1 usage error, 2 runtime
//! error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bb84::secure_rate_bb84_km;
use crate::common::{PhaseErrorNorm, Profile, ProtocolParams};
use crate::error::{Error, Result};
use crate::experiment::{sweep_and_summarize, write_atomic, write_outputs, ExperimentConfig};
use crate::graph::{generate, GeneratorKind, GraphSpec, NetworkGraph};
use crate::pathloss::{build_loss_table, LossModel};
use crate::placement::{write_matrices_csv, GraphCapacities, RateModels, Solution};
use crate::tf::TfModel;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "QKDNET_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "qkdnet",
    version,
    about = "QKD network key-rate and detector placement simulator"
)]
pub struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Secret key rate against distance for one protocol and detector
    RateCurve(RateCurveArgs),
    /// Loss table and capacities of all four solutions on one graph
    AnalyzeGraph(AnalyzeArgs),
    /// Monte Carlo sweep over box sizes
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Protocol {
    Bb84,
    Tf,
}

#[derive(Debug, Args)]
struct RateCurveArgs {
    #[arg(long, value_enum)]
    protocol: Protocol,
    #[arg(long, value_enum)]
    profile: Profile,
    /// Largest distance in km (total link length for twin-field)
    #[arg(long, value_name = "KM")]
    max_km: f64,
    /// Distance step in km
    #[arg(long, value_name = "KM", default_value_t = 1.0)]
    step_km: f64,
    /// Phase-error normalisation for twin-field
    #[arg(long, value_enum, default_value_t = PhaseErrorNorm::PerClick)]
    phase_error: PhaseErrorNorm,
    /// Output CSV (default: stdout)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GraphArgs {
    /// Number of source nodes
    #[arg(long = "nodes", value_name = "N")]
    n_sources: Option<usize>,
    /// Number of candidate detector sites
    #[arg(long = "candidates", value_name = "N")]
    n_candidates: Option<usize>,
    /// Number of cooled detectors switched on
    #[arg(long = "bobs", value_name = "N")]
    n_bob: Option<usize>,
    /// Target mean node degree (edges per node, dimensionless)
    #[arg(long = "degree", value_name = "DEG")]
    target_mean_degree: Option<f64>,
    /// Loss per switch traversal in dB
    #[arg(long, value_name = "DB")]
    switch_db: Option<f64>,
    /// Fibre attenuation in dB/km
    #[arg(long, value_name = "DB_PER_KM")]
    alpha_db_per_km: Option<f64>,
    #[arg(long, value_enum)]
    generator: Option<GeneratorKind>,
    #[arg(long, value_enum)]
    phase_error: Option<PhaseErrorNorm>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Graph JSON to analyse instead of generating one
    #[arg(long, value_name = "PATH")]
    graph: Option<PathBuf>,
    /// Side of the square box in km when generating
    #[arg(long, value_name = "KM", default_value_t = 100.0)]
    box_km: f64,
    /// Generator seed
    #[arg(long, value_name = "SEED", default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    graph_args: GraphArgs,
    /// Output directory [env: QKDNET_OUT_DIR]
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Experiment JSON; flags below override its values
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(flatten)]
    graph_args: GraphArgs,
    /// Graphs per box size
    #[arg(long = "graphs", value_name = "N")]
    n_graphs: Option<usize>,
    /// Run a single box size in km
    #[arg(long = "box-km", alias = "box", value_name = "KM", conflicts_with_all = ["box_min_km", "box_max_km", "box_step_km"])]
    box_km: Option<f64>,
    /// Smallest box size in km
    #[arg(long, value_name = "KM")]
    box_min_km: Option<f64>,
    /// Largest box size in km
    #[arg(long, value_name = "KM")]
    box_max_km: Option<f64>,
    /// Box size step in km
    #[arg(long, value_name = "KM")]
    box_step_km: Option<f64>,
    /// Box size at which ratios are reported, in km
    #[arg(long, value_name = "KM")]
    reference_box_km: Option<f64>,
    #[arg(long = "seed", value_name = "SEED")]
    master_seed: Option<u64>,
    /// Output directory [env: QKDNET_OUT_DIR]
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
}

impl GraphArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { cfg.$field = v; })*
            };
        }
        set!(n_sources, n_candidates, n_bob, target_mean_degree, switch_db, generator);
        if let Some(c) = self.n_candidates {
            // A smaller site count from the command line trims the detector-count sweep.
            cfg.bob_sweep.retain(|&b| b <= c);
        }
        if let Some(a) = self.alpha_db_per_km {
            cfg.params.alpha_db_per_km = a;
        }
        if let Some(n) = self.phase_error {
            cfg.params.phase_error_norm = n;
        }
    }
}

/// Parse `args` and run. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

enum CliError {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_) | Error::Domain { .. } => CliError::Usage(e.to_string()),
            e => CliError::Runtime(e),
        }
    }
}

fn execute(cli: Cli) -> std::result::Result<(), CliError> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        // A second call in the same process (tests) keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::RateCurve(a) => rate_curve(&a),
        Command::AnalyzeGraph(a) => analyze_graph(&a),
        Command::Simulate(a) => simulate(&a),
    }
}

fn out_dir(flag: &Option<PathBuf>) -> std::result::Result<PathBuf, CliError> {
    let dir = flag
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| CliError::Runtime(Error::io(&dir, e)))?;
    Ok(dir)
}

fn check_parent(path: &Path) -> std::result::Result<(), CliError> {
    match path.parent().filter(|p| !p.as_os_str().is_empty()) {
        Some(p) if !p.is_dir() => Err(CliError::Runtime(Error::io(
            p,
            std::io::Error::new(std::io::ErrorKind::NotFound, "directory does not exist"),
        ))),
        _ => Ok(()),
    }
}

/// `(distance_km, bits_per_s)` for a rate curve. Twin-field distances are the
/// total link length with the measuring node at the midpoint.
pub fn rate_curve_rows(
    protocol_tf: bool,
    profile: Profile,
    params: &ProtocolParams,
    max_km: f64,
    step_km: f64,
) -> Result<Vec<(f64, f64)>> {
    if !(step_km > 0.0 && step_km.is_finite()) {
        return Err(Error::InvalidParams(format!("step {step_km} km must be positive")));
    }
    if !(max_km >= 0.0 && max_km.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "max distance {max_km} km must be non-negative"
        )));
    }
    let params = ProtocolParams {
        detector: profile.detector(),
        ..params.clone()
    };
    let steps = (max_km / step_km + 1e-9).floor() as usize;
    let distances = (0..=steps).map(|k| k as f64 * step_km);
    if protocol_tf {
        let model = TfModel::new(&params)?;
        distances
            .map(|d| Ok((d, model.symmetric_rate_km(d)?.bits_per_s)))
            .collect()
    } else {
        distances
            .map(|d| Ok((d, secure_rate_bb84_km(d, &params)?.bits_per_s)))
            .collect()
    }
}

fn rate_curve(a: &RateCurveArgs) -> std::result::Result<(), CliError> {
    if let Some(p) = &a.out {
        check_parent(p)?;
    }
    let params = ProtocolParams {
        phase_error_norm: a.phase_error,
        ..ProtocolParams::default()
    };
    let tf = a.protocol == Protocol::Tf;
    let rows = rate_curve_rows(tf, a.profile, &params, a.max_km, a.step_km)?;
    let label = format!("{}_{}", if tf { "tf" } else { "bb84" }, a.profile.as_str());
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Runtime(e.into());
    w.write_record(["distance_km", "solution", "bits_per_s"])
        .map_err(csv_err)?;
    for (d, r) in rows {
        w.write_record([d.to_string(), label.clone(), r.to_string()])
            .map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Runtime(Error::io("<csv>", e.into_error())))?;
    match &a.out {
        Some(p) => write_atomic(p, &bytes)?,
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| CliError::Runtime(Error::io("<stdout>", e)))?,
    }
    Ok(())
}

fn analyze_graph(a: &AnalyzeArgs) -> std::result::Result<(), CliError> {
    let mut cfg = ExperimentConfig {
        box_sizes_km: vec![a.box_km],
        reference_box_km: a.box_km,
        n_graphs: 1,
        bob_sweep: Vec::new(),
        ..Default::default()
    };
    a.graph_args.apply(&mut cfg);
    let graph = match &a.graph {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Runtime(Error::io(p, e)))?;
            let g = NetworkGraph::from_json(&text)?;
            cfg.n_sources = g.sources().len();
            cfg.n_candidates = g.candidates().len();
            g
        }
        None => {
            cfg.validate()?;
            generate(
                &GraphSpec::new(a.box_km, cfg.n_sources, cfg.n_candidates, cfg.target_mean_degree)
                    .with_generator(cfg.generator),
                a.seed,
            )?
        }
    };
    let dir = out_dir(&a.out_dir)?;
    let losses = build_loss_table(&graph, &LossModel::new(cfg.params.alpha_db_per_km, cfg.switch_db)?)?;
    let models = RateModels::with_detectors(&cfg.params, cfg.hot_detector, cfg.cold_detector, true)?;
    let caps = GraphCapacities::evaluate(&losses, &models, cfg.n_bob)?;

    write_atomic(&dir.join("graph.json"), graph.to_json()?.as_bytes())?;
    let mut buf = Vec::new();
    losses.write_csv(&mut buf)?;
    write_atomic(&dir.join("losses.csv"), &buf)?;
    let mut buf = Vec::new();
    write_matrices_csv(&Solution::ALL.map(|s| caps.matrix(s).clone()), &mut buf)?;
    write_atomic(&dir.join("capacities.csv"), &buf)?;

    println!("graph sha256 {}", graph.digest());
    println!("detectors on: {:?}", caps.placement.chosen);
    println!("{:<16}{:>18}{:>14}", "solution", "capacity_bits_per_s", "zero_pairs");
    for s in Solution::ALL {
        println!(
            "{:<16}{:>18.6e}{:>14}",
            s.as_str(),
            caps.capacity(s),
            caps.matrix(s).zero_pairs()
        );
    }
    Ok(())
}

fn simulate(a: &SimulateArgs) -> std::result::Result<(), CliError> {
    let mut cfg = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Runtime(Error::io(p, e)))?;
            serde_json::from_str::<ExperimentConfig>(&text)
                .map_err(|e| CliError::Runtime(Error::InvalidParams(format!("{}: {e}", p.display()))))?
        }
        None => ExperimentConfig::default(),
    };
    a.graph_args.apply(&mut cfg);
    if let Some(n) = a.n_graphs {
        cfg.n_graphs = n;
    }
    if let Some(s) = a.master_seed {
        cfg.master_seed = s;
    }
    if let Some(b) = a.box_km {
        cfg.box_sizes_km = vec![b];
        cfg.reference_box_km = b;
    } else if a.box_min_km.is_some() || a.box_max_km.is_some() || a.box_step_km.is_some() {
        let lo = a.box_min_km.unwrap_or(cfg.box_sizes_km[0]);
        let hi = a.box_max_km.unwrap_or(*cfg.box_sizes_km.last().unwrap_or(&lo));
        let step = a.box_step_km.unwrap_or(10.0);
        if !(step > 0.0 && hi >= lo) {
            return Err(CliError::Usage(format!("bad box grid {lo}..{hi} step {step}")));
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        cfg.box_sizes_km = (0..=n).map(|k| lo + k as f64 * step).collect();
    }
    if let Some(r) = a.reference_box_km {
        cfg.reference_box_km = r;
    } else if !cfg.box_sizes_km.contains(&cfg.reference_box_km) {
        // Fall back to the grid point closest to the configured reference.
        let target = cfg.reference_box_km;
        cfg.reference_box_km = *cfg
            .box_sizes_km
            .iter()
            .min_by(|x, y| (*x - target).abs().total_cmp(&(*y - target).abs()))
            .expect("grid is non-empty");
        log::warn!(
            "reference box {target} km is not on the grid, reporting ratios at {} km",
            cfg.reference_box_km
        );
    }
    cfg.validate()?;
    let dir = out_dir(&a.out_dir)?;
    let summary = sweep_and_summarize(&cfg)?;
    write_outputs(&summary, &dir)?;
    print!("{}", summary.render_table());
    println!("results in {}", dir.display());
    Ok(())
}
