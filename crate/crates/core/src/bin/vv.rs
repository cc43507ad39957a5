use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use vv::graph::{write_jsonl_to, PropertyKind, PropertyRegistry};
use vv::metrics::Metric;
use vv::pipeline::{
    configured_split, prepare, run_matrix, run_single_cell, run_validation, DatasetSpec,
    EvalReport, ExperimentConfig, InnerSplitSpec, ModelSpec, PropertyRef,
};
use vv::splitter::write_split_csv;
use vv::synthetic::{CommConfig, ErConfig, GroundTruth, ModelKind};
use vv::weights::Bandwidth;
use vv::Result;

const EXIT_CONFIG: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_NEFF_STALL: u8 = 4;

#[derive(Parser)]
#[command(
    name = "vv",
    version,
    about = "Property-biased splits and reweighted evaluation of graph generators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset as JSONL.
    GenSynth(GenSynthArgs),
    /// Split the dataset on the configured property and write `graph_id,label,u_value`.
    Split {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Output CSV; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Nested validation if an inner split is configured, else one cell.
    Evaluate(ExperimentArgs),
    /// Every (split property, held split, test property) cell.
    Matrix(ExperimentArgs),
    /// Audit a saved report and print its use-case tables.
    Report {
        /// JSON written by `matrix` or single-cell `evaluate`.
        input: PathBuf,
        /// Directory for `<model>.cells.csv` and `<model>.summary.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Er,
    Comm,
}

#[derive(Args)]
struct GenSynthArgs {
    #[arg(long, value_enum, default_value = "er")]
    family: Family,
    #[arg(long, default_value_t = 500)]
    count: usize,
    #[arg(long, default_value_t = 20)]
    num_nodes: usize,
    /// Edge probability (ER) or within-community probability (comm).
    #[arg(long)]
    edge_prob: Option<f64>,
    #[arg(long, default_value_t = 6)]
    min_community: usize,
    #[arg(long, default_value_t = 10)]
    max_community: usize,
    #[arg(long, env = "VV_SEED", default_value_t = 0)]
    seed: u64,
    /// Id prefix.
    #[arg(long, default_value = "g")]
    prefix: String,
    /// Output JSONL; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Config file plus per-field overrides. Without `--config` the synthetic
/// ER validation setup is the base.
#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// JSONL dataset, replacing the configured dataset.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Comma-separated property names.
    #[arg(long, value_delimiter = ',')]
    properties: Option<Vec<PropertyKind>>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    psi: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Index, name, or `auto`.
    #[arg(long)]
    split_property: Option<PropertyRef>,
    #[arg(long)]
    held: Option<usize>,
    #[arg(long)]
    inner_k: Option<usize>,
    #[arg(long)]
    inner_psi: Option<usize>,
    #[arg(long)]
    inner_epsilon: Option<f64>,
    #[arg(long)]
    inner_held: Option<usize>,
    /// Drop the inner split.
    #[arg(long)]
    no_inner: bool,
    /// Comma-separated reference model kinds.
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<ModelKind>>,
    /// Ground-truth family JSON for distributional reference models, e.g.
    /// `{"family":"er","num_nodes":20,"edge_prob":0.5}`.
    #[arg(long, value_parser = parse_truth)]
    ground_truth: Option<GroundTruth>,
    /// Directory of imported samples (`cell-l{ℓ}-j{j}.jsonl` plus manifests).
    #[arg(long)]
    imported: Option<PathBuf>,
    #[arg(long)]
    neff_cap: Option<usize>,
    #[arg(long)]
    max_batches: Option<usize>,
    /// Explicit RBF gamma instead of 10 / σ.
    #[arg(long)]
    kmm_gamma: Option<f64>,
    #[arg(long)]
    kmm_bound: Option<f64>,
    #[arg(long)]
    kmm_slack: Option<f64>,
    #[arg(long)]
    kmm_max_iters: Option<usize>,
    #[arg(long)]
    kmm_tol: Option<f64>,
    /// Comma-separated metrics (ks, mean_diff, wasserstein1).
    #[arg(long, value_delimiter = ',')]
    metrics: Option<Vec<Metric>>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long, env = "VV_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    dump_intermediates: bool,
}

impl ExperimentArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_path(path)?,
            None => ExperimentConfig::er_validation(0),
        };
        if let Some(p) = &self.dataset {
            cfg.dataset = DatasetSpec::File(p.clone());
        }
        if let Some(kinds) = &self.properties {
            cfg.properties = PropertyRegistry::new(kinds.clone())?;
        }
        let s = &mut cfg.split;
        set(&mut s.k, self.k);
        set(&mut s.psi, self.psi);
        set(&mut s.epsilon, self.epsilon);
        if let Some(p) = &self.split_property {
            s.split_property = p.clone();
        }
        if self.held.is_some() {
            s.held = self.held;
        }
        if self.no_inner {
            cfg.inner_split = None;
        } else if self.inner_k.is_some()
            || self.inner_psi.is_some()
            || self.inner_epsilon.is_some()
            || self.inner_held.is_some()
        {
            let inner = cfg.inner_split.get_or_insert(InnerSplitSpec {
                k: cfg.split.k.saturating_sub(1),
                psi: cfg.split.psi,
                epsilon: cfg.split.epsilon,
                held: None,
            });
            set(&mut inner.k, self.inner_k);
            set(&mut inner.psi, self.inner_psi);
            set(&mut inner.epsilon, self.inner_epsilon);
            if self.inner_held.is_some() {
                inner.held = self.inner_held;
            }
        }
        if let Some(kinds) = &self.models {
            cfg.models = kinds
                .iter()
                .map(|&kind| ModelSpec::Reference {
                    kind,
                    ground_truth: None,
                })
                .collect();
        }
        if let Some(truth) = self.ground_truth {
            for m in &mut cfg.models {
                if let ModelSpec::Reference { ground_truth, .. } = m {
                    *ground_truth = Some(truth);
                }
            }
        }
        if let Some(dir) = &self.imported {
            let name = dir
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            cfg.models = vec![ModelSpec::Imported {
                dir: dir.clone(),
                name,
            }];
        }
        set(&mut cfg.n_eff.cap, self.neff_cap);
        set(&mut cfg.n_eff.max_batches, self.max_batches);
        if let Some(g) = self.kmm_gamma {
            cfg.kmm.bandwidth = Bandwidth::Gamma(g);
        }
        set(&mut cfg.kmm.weight_upper_bound, self.kmm_bound);
        set(&mut cfg.kmm.constraint_slack, self.kmm_slack);
        set(&mut cfg.kmm.max_iters, self.kmm_max_iters);
        set(&mut cfg.kmm.tolerance, self.kmm_tol);
        if let Some(m) = &self.metrics {
            cfg.metrics = m.clone();
        }
        if self.output_dir.is_some() {
            cfg.output_dir = self.output_dir.clone();
        }
        set(&mut cfg.seed, self.seed);
        cfg.dump_intermediates |= self.dump_intermediates;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_truth(s: &str) -> std::result::Result<GroundTruth, String> {
    serde_json::from_str(s).map_err(|e| e.to_string())
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            Box::new(BufWriter::new(File::create(p)?))
        }
        None => Box::new(io::stdout().lock()),
    })
}

fn output_dir(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let dir = cfg
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("vv-out"));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn gen_synth(args: &GenSynthArgs) -> Result<bool> {
    let truth = match args.family {
        Family::Er => GroundTruth::Er(ErConfig {
            num_nodes: args.num_nodes,
            edge_prob: args.edge_prob.unwrap_or(0.5),
            seed: args.seed,
        }),
        Family::Comm => GroundTruth::Comm(CommConfig {
            nodes_per_community: (args.min_community, args.max_community),
            intra_prob: args.edge_prob.unwrap_or(0.7),
            seed: args.seed,
        }),
    };
    let graphs = truth.sample_range(0..args.count, &args.prefix)?;
    write_jsonl_to(output(args.out.as_deref())?, &graphs)?;
    Ok(false)
}

fn split(exp: &ExperimentArgs, out: Option<&Path>) -> Result<bool> {
    let cfg = exp.resolve()?;
    let prep = prepare(&cfg)?;
    let s = configured_split(&cfg, &prep)?;
    let ids: Vec<String> = prep.graphs.iter().map(|g| g.id().to_string()).collect();
    write_split_csv(output(out)?, &ids, &s.assignment, &s.projection)?;
    Ok(false)
}

fn write_reports(dir: &Path, file: &str, reports: &[EvalReport]) -> Result<bool> {
    fs::write(
        dir.join(file),
        serde_json::to_string_pretty(reports)? + "\n",
    )?;
    for r in reports {
        r.write_cells_csv(BufWriter::new(File::create(
            dir.join(format!("{}.cells.csv", r.model)),
        )?))?;
        r.write_summary_csv(BufWriter::new(File::create(
            dir.join(format!("{}.summary.csv", r.model)),
        )?))?;
        println!("{}: overall KS {:.4}", r.model, r.aggregations.use_case_1);
    }
    Ok(reports.iter().any(EvalReport::has_neff_stall))
}

fn evaluate(exp: &ExperimentArgs) -> Result<bool> {
    let cfg = exp.resolve()?;
    let dir = output_dir(&cfg)?;
    fs::write(dir.join("config.json"), cfg.to_json()?)?;
    if cfg.inner_split.is_some() {
        let report = run_validation(&cfg)?;
        fs::write(dir.join("validation.json"), report.to_json()?)?;
        report.write_csv(BufWriter::new(File::create(dir.join("validation.csv"))?))?;
        report.write_csv(io::stdout().lock())?;
        Ok(report.has_neff_stall())
    } else {
        write_reports(&dir, "cell.json", &run_single_cell(&cfg)?)
    }
}

fn matrix(exp: &ExperimentArgs) -> Result<bool> {
    let cfg = exp.resolve()?;
    let dir = output_dir(&cfg)?;
    fs::write(dir.join("config.json"), cfg.to_json()?)?;
    write_reports(&dir, "matrix.json", &run_matrix(&cfg)?)
}

fn report(input: &Path, out: Option<&Path>) -> Result<bool> {
    let text = fs::read_to_string(input)?;
    let reports: Vec<EvalReport> = match serde_json::from_str(&text) {
        Ok(list) => list,
        Err(_) => vec![serde_json::from_str(&text)?],
    };
    for r in &reports {
        r.audit()?;
        println!("model {} (k = {}, {} cells)", r.model, r.k, r.cells.len());
        r.write_summary_csv(io::stdout().lock())?;
        if let Some(dir) = out {
            fs::create_dir_all(dir)?;
            r.write_cells_csv(BufWriter::new(File::create(
                dir.join(format!("{}.cells.csv", r.model)),
            )?))?;
            r.write_summary_csv(BufWriter::new(File::create(
                dir.join(format!("{}.summary.csv", r.model)),
            )?))?;
        }
    }
    Ok(reports.iter().any(EvalReport::has_neff_stall))
}

fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::GenSynth(args) => gen_synth(args),
        Command::Split { exp, out } => split(exp, out.as_deref()),
        Command::Evaluate(exp) => evaluate(exp),
        Command::Matrix(exp) => matrix(exp),
        Command::Report { input, out } => report(input, out.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("warning: effective sample size stalled in at least one cell");
            ExitCode::from(EXIT_NEFF_STALL)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() {
                EXIT_CONFIG
            } else {
                EXIT_DATA
            })
        }
    }
}
