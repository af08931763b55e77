use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use progsim_core::cluster::{
    build_snapshot, dendrogram_json, flat_clusters, force_graph_json, ClusterConfig, ClusterSnapshot, DistanceMatrix,
};
use progsim_core::cparse::{dump, parse, ParseError, SourceUnit};
use progsim_core::distance::{distance, fmt_cost, program_distance, Weights};
use progsim_core::normalize::{normalize_source, LinearProgram};
use progsim_core::variance::evaluate_snapshot;
use progsim_service::{Engine, ServiceConfig};

#[derive(Parser)]
#[command(name = "progsim", version, about = "Program similarity, clustering and hints for C submissions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the syntax tree of a C file.
    Parse {
        file: PathBuf,
        /// Append `@line:col` to each node.
        #[arg(long)]
        spans: bool,
    },
    /// Print the normalized token form of a C file.
    Normalize { file: PathBuf },
    /// Distance between two C files and the edit script from the first to the second.
    Dist {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Cluster every `.c` file of a directory.
    Cluster {
        dir: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
        #[command(flatten)]
        cluster: ClusterOpts,
        /// Directory for snapshot.json, clusters.txt, dendrogram.json and forcegraph.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Marks variance with and without clustering.
    Variance {
        dir: PathBuf,
        /// CSV with header `submission_id,marks`.
        marks: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
        #[command(flatten)]
        cluster: ClusterOpts,
        /// Also write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve {
        /// TOML configuration; `PROGSIM_*` variables override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        listen: Option<String>,
        #[arg(long)]
        top_k: Option<usize>,
        #[command(flatten)]
        opts: CommonOpts,
        #[command(flatten)]
        cluster: ClusterOpts,
    },
}

#[derive(Args)]
struct CommonOpts {
    /// TOML file with edit weights.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Worker threads for distance computations (default: one per core).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct ClusterOpts {
    /// Merge height above which the tree is always split.
    #[arg(long)]
    threshold_dist: Option<f64>,
}

enum Failure {
    Input(String),
    Internal(String),
}

type CmdResult = Result<(), Failure>;

fn input<E: std::fmt::Display>(context: impl std::fmt::Display) -> impl FnOnce(E) -> Failure {
    move |e| Failure::Input(format!("{context}: {e}"))
}

fn internal<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Internal(e.to_string())
}

fn read_source(path: &Path) -> Result<SourceUnit, Failure> {
    let text = fs::read_to_string(path).map_err(input(path.display()))?;
    Ok(SourceUnit::new(path.display().to_string(), text))
}

/// `path:line:col: message`, or `path: message` without a position.
fn parse_failure(path: &Path, e: ParseError) -> Failure {
    match e.span() {
        Some(_) => Failure::Input(format!("{}:{e}", path.display())),
        None => Failure::Input(format!("{}: {e}", path.display())),
    }
}

fn load_program(path: &Path) -> Result<LinearProgram, Failure> {
    normalize_source(&read_source(path)?).map_err(|e| parse_failure(path, e))
}

fn load_weights(opts: &CommonOpts) -> Result<Weights, Failure> {
    let w: Weights = match &opts.weights {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(input(p.display()))?;
            toml::from_str(&text).map_err(input(p.display()))?
        }
        None => Weights::default(),
    };
    w.validate().map_err(|e| Failure::Input(format!("weights: {e}")))?;
    Ok(w)
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build().map_err(internal)
}

/// `.c` files of `dir` sorted by file name; the stem is the submission id.
/// Files that do not parse are reported and skipped.
fn load_corpus(dir: &Path) -> Result<Vec<(String, LinearProgram)>, Failure> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(input(dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "c") && p.is_file())
        .collect();
    paths.sort();
    let mut out = Vec::with_capacity(paths.len());
    for p in paths {
        let id = p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        match load_program(&p) {
            Ok(prog) => out.push((id, prog)),
            Err(Failure::Input(msg) | Failure::Internal(msg)) => eprintln!("warning: skipping {msg}"),
        }
    }
    if out.is_empty() {
        return Err(Failure::Input(format!("{}: no parseable .c files", dir.display())));
    }
    Ok(out)
}

fn matrix(corpus: &[(String, LinearProgram)], w: &Weights, jobs: Option<usize>) -> Result<DistanceMatrix, Failure> {
    let n = corpus.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let values: Vec<f64> =
        pool(jobs)?.install(|| pairs.par_iter().map(|&(i, j)| distance(&corpus[i].1, &corpus[j].1, w)).collect());
    let lookup: HashMap<(usize, usize), f64> = pairs.into_iter().zip(values).collect();
    Ok(DistanceMatrix::from_fn(corpus.iter().map(|(id, _)| id.clone()).collect(), |i, j| lookup[&(i, j)]))
}

fn cluster_dir(
    dir: &Path,
    opts: &CommonOpts,
    cluster: &ClusterOpts,
) -> Result<(ClusterSnapshot, DistanceMatrix), Failure> {
    let w = load_weights(opts)?;
    let corpus = load_corpus(dir)?;
    let m = matrix(&corpus, &w, opts.jobs)?;
    let problem = dir.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let config = ClusterConfig { threshold_dist: cluster.threshold_dist };
    // Timestamp fixed at 0 so reruns are byte-identical.
    let s = build_snapshot(&problem, &m, &config, 0).map_err(|e| match e {
        progsim_core::cluster::ClusterError::InvalidThreshold(_) => Failure::Input(e.to_string()),
        e => internal(e),
    })?;
    Ok((s, m))
}

fn write_file(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text).map_err(|e| Failure::Internal(format!("{}: {e}", path.display())))
}

fn read_marks(path: &Path) -> Result<HashMap<String, f64>, Failure> {
    let mut rdr = csv::Reader::from_path(path).map_err(input(path.display()))?;
    let headers = rdr.headers().map_err(input(path.display()))?;
    if headers.iter().map(str::trim).collect::<Vec<_>>() != ["submission_id", "marks"] {
        return Err(Failure::Input(format!("{}: expected header `submission_id,marks`", path.display())));
    }
    let mut marks = HashMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(input(path.display()))?;
        let line = i + 2;
        let value: f64 = rec[1]
            .trim()
            .parse()
            .map_err(|_| Failure::Input(format!("{}:{line}: bad marks value {:?}", path.display(), &rec[1])))?;
        if marks.insert(rec[0].trim().to_string(), value).is_some() {
            return Err(Failure::Input(format!("{}:{line}: duplicate id {}", path.display(), &rec[0])));
        }
    }
    Ok(marks)
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Parse { file, spans } => {
            let ast = parse(&read_source(&file)?).map_err(|e| parse_failure(&file, e))?;
            print!("{}", dump(&ast, spans));
        }
        Command::Normalize { file } => print!("{}", load_program(&file)?.to_text()),
        Command::Dist { a, b, opts } => {
            let w = load_weights(&opts)?;
            let (pa, pb) = (load_program(&a)?, load_program(&b)?);
            let r = program_distance(&pa, &pb, &w);
            println!("distance {}", fmt_cost(r.total));
            print!("{}", r.script_text());
        }
        Command::Cluster { dir, opts, cluster, out } => {
            let (s, m) = cluster_dir(&dir, &opts, &cluster)?;
            eprintln!(
                "{} programs, {} clusters, {} linkage, threshold {}",
                s.len(),
                s.clusters.len(),
                s.linkage.name(),
                fmt_cost(s.threshold_dist)
            );
            match out {
                Some(out) => {
                    fs::create_dir_all(&out).map_err(|e| Failure::Internal(format!("{}: {e}", out.display())))?;
                    write_file(&out.join("snapshot.json"), &s.to_json())?;
                    write_file(&out.join("clusters.txt"), &flat_clusters(&s))?;
                    write_file(&out.join("dendrogram.json"), &dendrogram_json(&s))?;
                    write_file(&out.join("forcegraph.json"), &force_graph_json(&s, &m))?;
                }
                None => print!("{}", flat_clusters(&s)),
            }
        }
        Command::Variance { dir, marks, opts, cluster, out } => {
            let marks = read_marks(&marks)?;
            let (s, _) = cluster_dir(&dir, &opts, &cluster)?;
            for id in marks.keys().filter(|id| !s.ids.contains(id)) {
                eprintln!("warning: marks for {id} have no matching program");
            }
            let report = evaluate_snapshot(&s, &marks);
            for id in &report.excluded {
                eprintln!("warning: no marks for {id}; excluded");
            }
            print!("{}", report.to_table());
            if let Some(out) = out {
                write_file(&out, &serde_json::to_string_pretty(&report).map_err(internal)?)?;
            }
        }
        Command::Serve { config, listen, top_k, opts, cluster } => {
            let mut c = ServiceConfig::load(config.as_deref()).map_err(|e| Failure::Input(e.to_string()))?;
            if opts.weights.is_some() {
                c.weights = load_weights(&opts)?;
            }
            if let Some(j) = opts.jobs {
                c.workers = j;
            }
            if let Some(l) = listen {
                c.listen = l;
            }
            if let Some(k) = top_k {
                c.top_k = k;
            }
            if cluster.threshold_dist.is_some() {
                c.cluster.threshold_dist = cluster.threshold_dist;
            }
            c.validate().map_err(|e| Failure::Input(e.to_string()))?;
            tracing_subscriber::fmt()
                .with_env_filter(
                    tracing_subscriber::EnvFilter::try_from_default_env()
                        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
                )
                .init();
            let engine = Engine::from_config(c).map_err(internal)?;
            let rt = tokio::runtime::Runtime::new().map_err(internal)?;
            rt.block_on(progsim_service::serve(engine)).map_err(|e| Failure::Input(format!("serve: {e}")))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
    }
}
