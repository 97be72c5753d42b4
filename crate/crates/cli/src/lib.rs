//! Command-line front end: `check`, `solve`, `verify` and `export`.
//!
//! Exit codes are 0 on success, 1 for input errors, 2 for infeasible
//! targets, 3 when the solver does not converge and 4 when an audit fails.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sphpat::cellgraph::{parse_document, parse_targets};
use sphpat::feasibility::{exhaustive_subset_check, Certificate, MAX_EXHAUSTIVE_FACES};
use sphpat::{
    export_net, find_coherent_system, reconstruct, CurvatureTarget, Feasibility, RestartCheck, SolutionDocument,
    SolveError, SolveOptions, ValidationOptions, WeightedCellGraph,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;
pub const EXIT_AUDIT: i32 = 4;

/// Largest allowed difference between the solution and a restart from a
/// random point.
pub const RESTART_TOL: f64 = 1e-7;

#[derive(Debug, Parser)]
#[command(name = "sphpat", version, about = "Circle patterns with prescribed total geodesic curvatures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Decide whether the targets admit a pattern.
    Check(RunConfig),
    /// Solve for the pattern and write a solution document.
    Solve(RunConfig),
    /// Re-audit a solution document.
    Verify(RunConfig),
    /// Write the quadrilateral net of a solution document.
    Export(RunConfig),
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Graph document (check, solve) or solution document (verify, export).
    #[arg(long)]
    pub input: PathBuf,
    /// Targets file, or an inline JSON object such as '{"f0": 1.0}'.
    #[arg(long)]
    pub targets: Option<String>,
    #[arg(long, default_value_t = 1e-10, value_parser = positive_f64)]
    pub tol: f64,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_iter: u64,
    /// Solve even if the subset condition fails.
    #[arg(long)]
    pub skip_feasibility: bool,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: u64,
    /// Where to write the document; stdout if absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Re-solve from a random start drawn with this seed and compare.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Accept face boundaries that are not closed walks.
    #[arg(long)]
    pub lenient_walks: bool,
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("{v} is not a positive number")),
        Err(e) => Err(e.to_string()),
    }
}

/// Runs one command and returns its exit code. Documents go to `--output`
/// or `out`; reports go to `out` and diagnostics to `err`.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Check(c) => cmd_check(c, out),
        Command::Solve(c) => cmd_solve(c, out, err),
        Command::Verify(c) => cmd_verify(c, out),
        Command::Export(c) => cmd_export(c, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_INPUT
        }
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load(config: &RunConfig) -> anyhow::Result<(WeightedCellGraph, CurvatureTarget)> {
    let options = ValidationOptions { strict_walks: !config.lenient_walks, ..Default::default() };
    let (graph, inline) = parse_document(&read(&config.input)?, options)
        .with_context(|| format!("invalid graph document {}", config.input.display()))?;
    let targets = match &config.targets {
        Some(t) if t.trim_start().starts_with('{') => parse_targets(t, &graph).context("invalid inline targets")?,
        Some(path) => parse_targets(&read(Path::new(path))?, &graph).with_context(|| format!("invalid targets {path}"))?,
        None => inline.ok_or_else(|| anyhow!("no targets: pass --targets or add a \"targets\" object to the input"))?,
    };
    Ok((graph, targets))
}

fn emit(config: &RunConfig, text: &str, out: &mut dyn Write) -> anyhow::Result<()> {
    match &config.output {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => out.write_all(text.as_bytes()).context("cannot write to stdout"),
    }
}

fn face_list(graph: &WeightedCellGraph, faces: &[usize]) -> String {
    let ids: Vec<String> = faces.iter().map(|&f| graph.faces()[f].id.to_string()).collect();
    format!("{{{}}}", ids.join(", "))
}

fn print_certificate(graph: &WeightedCellGraph, c: &Option<Certificate>, out: &mut dyn Write) -> anyhow::Result<()> {
    match c {
        Some(c) => writeln!(out, "certificate {} (sum T - sum 2 theta = {:e})", face_list(graph, &c.faces), c.margin)?,
        None => writeln!(out, "certificate none found")?,
    }
    Ok(())
}

fn cmd_check(config: &RunConfig, out: &mut dyn Write) -> anyhow::Result<i32> {
    let (graph, targets) = load(config)?;
    let verdict = find_coherent_system(&graph, &targets);
    let lp_feasible = verdict.is_feasible();
    match &verdict {
        Feasibility::Feasible(system) => {
            writeln!(out, "feasible")?;
            writeln!(out, "slack {:e}", system.slack)?;
        }
        Feasibility::Infeasible { lp_slack, certificate, .. } => {
            writeln!(out, "infeasible")?;
            writeln!(out, "slack {lp_slack:e}")?;
            print_certificate(&graph, certificate, out)?;
        }
    }
    if graph.num_faces() <= MAX_EXHAUSTIVE_FACES {
        let ex = exhaustive_subset_check(&graph, &targets)?;
        // a subset exactly on the boundary may land either way
        let agrees = ex.passes == lp_feasible || ex.margin.abs() < 1e-9;
        writeln!(
            out,
            "exhaustive check {} (worst subset {}, margin {:e})",
            if agrees { "agrees" } else { "DISAGREES" },
            face_list(&graph, &ex.worst),
            ex.margin
        )?;
        if !agrees {
            return Ok(EXIT_AUDIT);
        }
    }
    Ok(if lp_feasible { EXIT_OK } else { EXIT_INFEASIBLE })
}

fn cmd_solve(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    let (graph, targets) = load(config)?;
    let threads = config.threads as usize;
    let options = SolveOptions {
        tol: config.tol,
        max_iter: config.max_iter as usize,
        skip_feasibility: config.skip_feasibility,
        threads,
        ..Default::default()
    };
    let report = match sphpat::solve(&graph, &targets, &options) {
        Ok(r) => r,
        Err(SolveError::Infeasible(Feasibility::Infeasible { lp_slack, certificate, .. })) => {
            writeln!(err, "infeasible (slack {lp_slack:e})")?;
            print_certificate(&graph, &certificate, err)?;
            return Ok(EXIT_INFEASIBLE);
        }
        Err(e @ SolveError::NonConvergence { .. }) => {
            writeln!(err, "{e}")?;
            return Ok(EXIT_NONCONVERGENCE);
        }
        Err(e) => return Err(e.into()),
    };
    let metric = reconstruct(&graph, &report.k, threads)?;
    let mut doc = SolutionDocument::new(&graph, &targets, config.tol, &report, metric);
    let mut code = EXIT_OK;

    if let Some(seed) = config.seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let start: Vec<f64> = (0..graph.num_faces()).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let again = SolveOptions { initial_k: Some(start), skip_feasibility: true, ..options.clone() };
        match sphpat::solve(&graph, &targets, &again) {
            Ok(r2) => {
                let diff = r2.k.iter().zip(&report.k).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
                writeln!(err, "restart from seed {seed}: max |dK| = {diff:e}")?;
                if !(diff <= RESTART_TOL) {
                    code = EXIT_AUDIT;
                }
                doc.restart = Some(RestartCheck { seed, max_k_difference: diff });
            }
            Err(e) => {
                writeln!(err, "restart from seed {seed} failed: {e}")?;
                code = EXIT_NONCONVERGENCE;
            }
        }
    }

    if let Some(fail) = doc.metric.audit.worst_failure() {
        writeln!(err, "audit failed: {} residual {:e} > {:e}", fail.identity, fail.residual, fail.tolerance)?;
        code = code.max(EXIT_AUDIT);
    }
    writeln!(
        err,
        "solved {} faces in {} iterations, residual {:e}, {:.3?}",
        graph.num_faces(),
        report.iterations,
        report.final_residual,
        report.wall_time
    )?;
    if threads > 1 {
        writeln!(err, "threads {threads}: per-edge work is split, sums run in edge order; output matches one thread")?;
    }
    emit(config, &doc.to_json(), out)?;
    Ok(code)
}

fn load_solution(config: &RunConfig) -> anyhow::Result<SolutionDocument> {
    SolutionDocument::parse(&read(&config.input)?).with_context(|| format!("invalid solution document {}", config.input.display()))
}

fn cmd_verify(config: &RunConfig, out: &mut dyn Write) -> anyhow::Result<i32> {
    let doc = load_solution(config)?;
    let v = doc.verify()?;
    let a = &v.metric.audit;
    writeln!(out, "bigon identity   {:e} (tolerance {:e})", a.bigon_residual, sphpat::geometry::BIGON_TOL)?;
    writeln!(out, "face identity    {:e} (tolerance {:e})", a.face_residual, sphpat::geometry::FACE_TOL)?;
    writeln!(out, "global identity  {:e} (tolerance {:e})", a.global_residual.abs(), sphpat::geometry::GLOBAL_TOL)?;
    writeln!(out, "target match     {:e} (tolerance {:e})", v.target_residual, v.target_tolerance)?;
    writeln!(out, "stored values    {:e} (tolerance {:e})", v.stored_deviation, sphpat::document::STORED_TOL)?;
    match v.worst_failure() {
        None => {
            writeln!(out, "ok")?;
            Ok(EXIT_OK)
        }
        Some(f) => {
            writeln!(out, "FAILED: {} (residual {:e})", f.identity, f.residual)?;
            Ok(EXIT_AUDIT)
        }
    }
}

fn cmd_export(config: &RunConfig, out: &mut dyn Write) -> anyhow::Result<i32> {
    let doc = load_solution(config)?;
    let (graph, _) = doc.graph_and_targets()?;
    if doc.metric.quads.len() != graph.num_edges() {
        return Err(anyhow!("solution metric has {} quadrilaterals, graph has {} edges", doc.metric.quads.len(), graph.num_edges()));
    }
    let net = export_net(&doc.metric, &graph);
    let mut text = serde_json::to_string_pretty(&net)?;
    text.push('\n');
    emit(config, &text, out)?;
    Ok(EXIT_OK)
}
