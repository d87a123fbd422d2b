//! The `smoothgreed` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use smoothgreed_core::instances::{generate, Family, Instance, InstanceSpec, LogDetSource};
use smoothgreed_core::online::Algorithm;
use smoothgreed_core::smoothing::{design_optimal, DesignSpec, TailMode, Variant};
use smoothgreed_core::ScalarConcave;

use crate::config::Config;
use crate::figures::{self, Figure, DEFAULT_FIGURE_GRID};
use crate::io::{self, num, provenance, with_suffix, write_csv, write_json, write_jsonl};
use crate::pipeline::{evaluate, parse_penalty, Algo, Smoothing};
use crate::sweep::{self, SweepJob};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "smoothgreed", version, about = "Greedy primal-dual online allocation with optimal smoothing")]
pub struct Cli {
    /// TOML file with defaults for any command; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Design an optimal smoothing of a scalar concave function.
    Design(DesignArgs),
    /// Generate an instance file.
    Generate(GenerateArgs),
    /// Run an online algorithm and write its trace and certificate.
    Run(RunArgs),
    /// Run an online algorithm and print its certificate.
    Certify(RunArgs),
    /// Ratio curves of optimal smoothings.
    Figures(FiguresArgs),
    /// Batch runs over instance sizes and seeds.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    /// Catalog name (cap, log1p, sqrt, three_piece, linear), inline JSON, or a JSON file.
    #[arg(long)]
    pub objective: Option<String>,
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Number of grid intervals.
    #[arg(long)]
    pub grid: Option<usize>,
    /// sim or seq.
    #[arg(long)]
    pub variant: Option<String>,
    /// Sequential constant.
    #[arg(long)]
    pub c: Option<f64>,
    /// zero or hold_last; by default zero exactly when the objective is flat from the horizon on.
    #[arg(long)]
    pub tail: Option<String>,
    /// Output prefix: writes <prefix>.csv, <prefix>.json and <prefix>.smoothing.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// adwords_triangular, lp_random or logdet_stream.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub phase_len: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub density: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    /// Base graph for logdet_stream as `i-j,i-j,...`; random vectors when absent.
    #[arg(long)]
    pub edges: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// LP objective: separable_cap (default) or lp_ball:<p>.
    #[arg(long)]
    pub objective: Option<String>,
    /// none, design, nesterov, or a smoothing JSON file.
    #[arg(long)]
    pub smoothing: Option<String>,
    /// sim or seq.
    #[arg(long)]
    pub algo: Option<Algo>,
    /// Output prefix.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FiguresArgs {
    /// 1e, 1f, 2a, 2b; all four when absent.
    #[arg(long, value_delimiter = ',')]
    pub which: Vec<Figure>,
    #[arg(long)]
    pub grid: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub n_list: Vec<usize>,
    /// Phase lengths for adwords_triangular.
    #[arg(long, value_delimiter = ',')]
    pub phase_lens: Vec<usize>,
    /// sim, seq or both.
    #[arg(long)]
    pub algo: Option<String>,
    #[arg(long)]
    pub smoothing: Option<String>,
    #[arg(long)]
    pub objective: Option<String>,
    /// Seeds 0..seeds for the random families.
    #[arg(long)]
    pub seeds: Option<u64>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub density: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (program name first), runs the command, and returns the
/// process exit code.
pub fn main_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let config = Config::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Design(a) => cmd_design(a, &config),
        Command::Generate(a) => cmd_generate(a, &config),
        Command::Run(a) => cmd_run(a, &config, true),
        Command::Certify(a) => cmd_run(a, &config, false),
        Command::Figures(a) => cmd_figures(a, &config),
        Command::Sweep(a) => cmd_sweep(a, &config),
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::BadInput(msg.into())
}

fn parse_tail(s: &str) -> Result<TailMode, CliError> {
    match s {
        "zero" => Ok(TailMode::Zero),
        "hold_last" | "hold-last" => Ok(TailMode::HoldLast),
        _ => Err(bad(format!("unknown tail {s:?} (expected zero or hold_last)"))),
    }
}

fn parse_algo(s: &str) -> Result<Algorithm, CliError> {
    s.parse::<Algo>().map(|a| a.0).map_err(bad)
}

#[derive(Serialize)]
struct DesignSummary<'a> {
    version: &'a str,
    objective: &'a ScalarConcave,
    horizon: f64,
    d: usize,
    tail: TailMode,
    variant: &'static str,
    c: Option<f64>,
    beta: f64,
    ratio: f64,
    certified: bool,
    max_residual: f64,
    verify_sup: f64,
    beta_bisect: f64,
}

fn cmd_design(a: &DesignArgs, cfg: &Config) -> Result<(), CliError> {
    let d = &cfg.design;
    let objective = a.objective.clone().or_else(|| d.objective.clone()).unwrap_or_else(|| "cap".into());
    let base = io::parse_scalar(&objective)?;
    let horizon = a.horizon.or(d.horizon).unwrap_or(1.0);
    let grid = a.grid.or(d.grid).unwrap_or(1000);
    let variant = a.variant.clone().or_else(|| d.variant.clone()).unwrap_or_else(|| "sim".into());
    let mut spec = DesignSpec::new(base.clone(), horizon, grid);
    if let Some(tail) = a.tail.as_deref().or(d.tail.as_deref()) {
        spec = spec.with_tail(parse_tail(tail)?);
    }
    spec = match variant.as_str() {
        "sim" => spec,
        "seq" => spec.sequential(a.c.or(d.c).ok_or_else(|| bad("--variant seq needs --c"))?),
        v => return Err(bad(format!("unknown variant {v:?} (expected sim or seq)"))),
    };
    let r = design_optimal(&spec)?;
    let c = spec.variant.c();
    let s = &r.smoothed;
    let y0 = s.samples()[0];
    let rows: Vec<Vec<String>> = (0..=s.d())
        .map(|t| {
            let u = t as f64 * s.h();
            let y = s.samples()[t];
            let psi = base.value(u);
            let psi_s = s.cumint()[t];
            let ratio = if psi > 0.0 { (psi_s + c.unwrap_or(0.0) * (y0 - y) - base.conjugate(y)) / psi } else { f64::NAN };
            vec![num(u), num(y), num(psi), num(psi_s), num(ratio)]
        })
        .collect();
    let flags = [
        ("objective", objective.clone()),
        ("horizon", num(horizon)),
        ("grid", grid.to_string()),
        ("variant", variant.clone()),
        ("c", c.map_or_else(|| "-".into(), num)),
        ("tail", match spec.tail { TailMode::Zero => "zero", TailMode::HoldLast => "hold_last" }.into()),
    ];
    let prov = provenance("design", None, &flags);
    write_csv(&with_suffix(&a.out, ".csv"), &prov, &["u", "y", "psi", "psiS", "beta"], &rows)?;
    let summary = DesignSummary {
        version: crate::VERSION,
        objective: &base,
        horizon,
        d: grid,
        tail: spec.tail,
        variant: match r.variant {
            Variant::Simultaneous => "sim",
            Variant::Sequential { .. } => "seq",
        },
        c,
        beta: r.beta,
        ratio: r.ratio(),
        certified: r.certified,
        max_residual: r.max_residual,
        verify_sup: r.verify_sup,
        beta_bisect: r.beta_bisect,
    };
    write_json(&with_suffix(&a.out, ".json"), &summary)?;
    write_json(&with_suffix(&a.out, ".smoothing.json"), &r.smoothed)?;
    println!("beta = {} ratio = {} certified = {}", r.beta, r.ratio(), r.certified);
    if !r.certified {
        return Err(CliError::Infeasible(format!("residual {} exceeds the feasibility tolerance", r.max_residual)));
    }
    Ok(())
}

fn parse_edges(s: &str) -> Result<Vec<(usize, usize)>, CliError> {
    s.split(',')
        .filter(|e| !e.trim().is_empty())
        .map(|e| {
            let (i, j) = e.trim().split_once('-').ok_or_else(|| bad(format!("bad edge {e:?} (expected i-j)")))?;
            let p = |v: &str| v.trim().parse::<usize>().map_err(|_| bad(format!("bad vertex in edge {e:?}")));
            Ok((p(i)?, p(j)?))
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn family_from(
    name: &str,
    n: usize,
    phase_len: usize,
    m: usize,
    k: usize,
    density: f64,
    b: f64,
    edges: Option<Vec<(usize, usize)>>,
) -> Result<Family, CliError> {
    Ok(match name {
        "adwords_triangular" => Family::AdwordsTriangular { n, phase_len },
        "lp_random" => Family::LpRandom { n, m, k, density },
        "logdet_stream" => Family::LogdetStream {
            n,
            m,
            b,
            source: edges.map_or(LogDetSource::RandomVectors, |edges| LogDetSource::GraphIncidence { edges }),
        },
        f => return Err(bad(format!("unknown family {f:?}"))),
    })
}

fn cmd_generate(a: &GenerateArgs, cfg: &Config) -> Result<(), CliError> {
    let g = &cfg.generate;
    let name = a.family.clone().or_else(|| g.family.clone()).ok_or_else(|| bad("--family is required"))?;
    let edges = a.edges.as_deref().map(parse_edges).transpose()?;
    let family = family_from(
        &name,
        a.n.or(g.n).unwrap_or(10),
        a.phase_len.or(g.phase_len).unwrap_or(10),
        a.m.or(g.m).unwrap_or(50),
        a.k.or(g.k).unwrap_or(3),
        a.density.or(g.density).unwrap_or(0.5),
        a.b.or(g.b).unwrap_or(2.0),
        edges,
    )?;
    let inst = generate(&InstanceSpec { family, seed: a.seed.or(g.seed).unwrap_or(0) })?;
    write_json(&a.out, &inst)
}

fn load_instance(path: &Path) -> Result<Instance, CliError> {
    let inst: Instance = io::read_json(path)?;
    inst.validate()?;
    Ok(inst)
}

fn cmd_run(a: &RunArgs, cfg: &Config, write_trace: bool) -> Result<(), CliError> {
    let r = &cfg.run;
    let inst = load_instance(&a.instance)?;
    let penalty = a.objective.as_deref().or(r.objective.as_deref()).map(parse_penalty).transpose()?;
    let smoothing = Smoothing::parse(a.smoothing.as_deref().or(r.smoothing.as_deref()).unwrap_or("none"))?;
    let algo = match a.algo {
        Some(algo) => algo.0,
        None => parse_algo(r.algo.as_deref().unwrap_or("sim"))?,
    };
    let (trace, summary) = evaluate(&inst, penalty, &smoothing, algo)?;
    if write_trace {
        let out = a.out.as_ref().ok_or_else(|| bad("run needs --out"))?;
        write_jsonl(&with_suffix(out, ".trace.jsonl"), &trace.steps)?;
        write_json(&with_suffix(out, ".summary.json"), &summary)?;
        println!(
            "P = {} D = {} ratio_lb = {} bound = {} passed = {}",
            summary.primal, summary.dual, summary.ratio_lb, summary.bound, summary.passed
        );
    } else {
        if let Some(out) = &a.out {
            write_json(&with_suffix(out, ".certificate.json"), &summary)?;
        }
        let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    }
    if !summary.passed {
        return Err(CliError::Breach(format!(
            "ratio_lb = {} against bound {} (lemma margin {})",
            summary.ratio_lb, summary.bound, summary.lemma.margin
        )));
    }
    Ok(())
}

fn cmd_figures(a: &FiguresArgs, cfg: &Config) -> Result<(), CliError> {
    let figs: Vec<Figure> = if a.which.is_empty() { Figure::ALL.to_vec() } else { a.which.clone() };
    let d = a.grid.or(cfg.figures.grid).unwrap_or(DEFAULT_FIGURE_GRID);
    for (fig, points) in figures::compute(&figs, d)? {
        let path = figures::write(&a.out, fig, &points, d)?;
        println!("{}: {} points -> {}", fig, points.len(), path.display());
    }
    Ok(())
}

fn cmd_sweep(a: &SweepArgs, cfg: &Config) -> Result<(), CliError> {
    let s = &cfg.sweep;
    let name = a.family.clone().or_else(|| s.family.clone()).unwrap_or_else(|| "adwords_triangular".into());
    let n_list = if a.n_list.is_empty() { s.n_list.clone().unwrap_or_else(|| vec![10]) } else { a.n_list.clone() };
    let phase_lens = if a.phase_lens.is_empty() { s.phase_lens.clone().unwrap_or_else(|| vec![1]) } else { a.phase_lens.clone() };
    let algo = a.algo.clone().or_else(|| s.algo.clone()).unwrap_or_else(|| "sim".into());
    let algos = match algo.as_str() {
        "both" => vec![Algorithm::Simultaneous, Algorithm::Sequential],
        other => vec![parse_algo(other)?],
    };
    let smoothing_name = a.smoothing.clone().or_else(|| s.smoothing.clone()).unwrap_or_else(|| "none".into());
    let smoothing = Smoothing::parse(&smoothing_name)?;
    let objective = a.objective.clone().or_else(|| s.objective.clone());
    let penalty = objective.as_deref().map(parse_penalty).transpose()?;
    let seeds = a.seeds.or(s.seeds).unwrap_or(1);
    let (m, k, density, b) = (
        a.m.or(s.m).unwrap_or(50),
        a.k.or(s.k).unwrap_or(3),
        a.density.or(s.density).unwrap_or(0.5),
        a.b.or(s.b).unwrap_or(2.0),
    );
    let mut jobs = Vec::new();
    for &n in &n_list {
        if name == "adwords_triangular" {
            for &pl in &phase_lens {
                for &algo in &algos {
                    jobs.push(SweepJob { spec: InstanceSpec { family: family_from(&name, n, pl, m, k, density, b, None)?, seed: 0 }, algo });
                }
            }
        } else {
            for seed in 0..seeds {
                for &algo in &algos {
                    jobs.push(SweepJob { spec: InstanceSpec { family: family_from(&name, n, 1, m, k, density, b, None)?, seed }, algo });
                }
            }
        }
    }
    let rows = sweep::run_jobs(&jobs, penalty, &smoothing)?;
    let list = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
    let flags = [
        ("family", name.clone()),
        ("n_list", list(&n_list)),
        ("phase_lens", list(&phase_lens)),
        ("algo", algo.clone()),
        ("smoothing", smoothing_name),
        ("objective", objective.unwrap_or_else(|| "-".into())),
        ("seeds", seeds.to_string()),
        ("m", m.to_string()),
        ("k", k.to_string()),
        ("density", num(density)),
        ("b", num(b)),
    ];
    let seed = (seeds == 1).then_some(0);
    let records: Vec<Vec<String>> = rows.iter().map(sweep::to_record).collect();
    write_csv(&a.out, &provenance("sweep", seed, &flags), &sweep::HEADER, &records)?;
    let failed = rows.iter().filter(|r| !r.summary.passed).count();
    println!("{} runs -> {} ({failed} failed certificates)", rows.len(), a.out.display());
    if failed > 0 {
        return Err(CliError::Breach(format!("{failed} of {} runs failed their certificate", rows.len())));
    }
    Ok(())
}
