//! Newton minimisation of the convex functional
//!
//! ```text
//!     Omega(K) = sum_e Omega_{theta_e}(K_{f(e+)}, K_{f(e-)}) - sum_f T_f K_f
//! ```
//!
//! over log curvatures `K_f = log cot r_f`. Its gradient is
//! `T(dD_f)(K) - T_f`, so the minimiser is the pattern with the prescribed
//! total curvatures. Gradient and Hessian are exact; the functional value
//! itself needs quadrature and is only reported.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::cellgraph::{CurvatureTarget, WeightedCellGraph};
use crate::feasibility::{find_coherent_system, Feasibility};
use crate::linalg::{cholesky_solve, pcg_solve, LinalgError, SymmetricMatrix};
use crate::sphertrig::{gauss_legendre, primitive_value, BigonShape, TrigError};

/// Above this many faces the Newton system is solved by conjugate gradients.
pub const DENSE_LIMIT: usize = 512;

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1.0 / (1u64 << 30) as f64;
const MAX_OMEGA_PANELS: usize = 64;
/// Largest sup-norm change of `K` in one damped step.
const MAX_STEP_NORM: f64 = 2.0;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("targets violate the subset condition")]
    Infeasible(Feasibility),
    #[error("no convergence after {} iterations: {reason} (residual {:e})", .report.iterations, .report.final_residual)]
    NonConvergence { reason: String, report: Box<SolveReport> },
    #[error("initial point has {got} entries, graph has {expected} faces")]
    InitialPoint { expected: usize, got: usize },
    #[error(transparent)]
    Trig(#[from] TrigError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Stop when the sup-norm of the gradient is at most this.
    pub tol: f64,
    pub max_iter: usize,
    pub initial_k: Option<Vec<f64>>,
    pub skip_feasibility: bool,
    pub threads: usize,
    /// Extra full Newton steps taken after reaching `tol`, each kept only if
    /// it does not increase the residual.
    pub polish_steps: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-10, max_iter: 100, initial_k: None, skip_feasibility: false, threads: 1, polish_steps: 2 }
    }
}

/// One accepted Newton iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub iteration: usize,
    /// Sup-norm of the gradient.
    pub residual_norm: f64,
    /// `|grad|^2 / 2`.
    pub merit: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub k: Vec<f64>,
    pub radii: Vec<f64>,
    pub achieved: Vec<f64>,
    pub iterations: usize,
    pub final_residual: f64,
    pub history: Vec<SolverState>,
    pub wall_time: Duration,
}

impl SolveReport {
    /// `Omega` at the returned point.
    pub fn omega(&self, graph: &WeightedCellGraph, targets: &CurvatureTarget) -> Result<f64, TrigError> {
        omega(graph, &self.k, targets)
    }
}

/// Radius of each face disk, `arctan(exp(-K_f))`.
pub fn radii(k: &[f64]) -> Vec<f64> {
    k.iter().map(|&v| (-v).exp().atan()).collect()
}

/// The bigon of every edge at `K`, in edge order. With `threads > 1` the
/// edges are split into contiguous chunks; results do not depend on the
/// thread count.
pub fn edge_bigons(graph: &WeightedCellGraph, k: &[f64], threads: usize) -> Result<Vec<BigonShape>, TrigError> {
    let eval = |e: usize| {
        let (fp, fm) = graph.edge_faces(e);
        BigonShape::from_log_curvatures(graph.edges()[e].theta, k[fp], k[fm])
    };
    let n = graph.num_edges();
    let threads = threads.max(1).min(n);
    if threads == 1 {
        return (0..n).map(eval).collect();
    }
    let chunk = n.div_ceil(threads);
    let parts: Vec<Result<Vec<BigonShape>, TrigError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let eval = &eval;
                scope.spawn(move || (t * chunk..((t + 1) * chunk).min(n)).map(eval).collect())
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("bigon worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(n);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

fn face_totals(graph: &WeightedCellGraph, bigons: &[BigonShape]) -> Vec<f64> {
    let mut totals = vec![0.0; graph.num_faces()];
    for (e, b) in bigons.iter().enumerate() {
        let (fp, fm) = graph.edge_faces(e);
        totals[fp] += b.totals[0];
        totals[fm] += b.totals[1];
    }
    totals
}

/// `T(dD_f)` for every face: the sum of the sector totals on its sides.
pub fn total_curvatures(graph: &WeightedCellGraph, k: &[f64]) -> Result<Vec<f64>, TrigError> {
    Ok(face_totals(graph, &edge_bigons(graph, k, 1)?))
}

fn hessian(graph: &WeightedCellGraph, bigons: &[BigonShape]) -> SymmetricMatrix {
    let mut h = SymmetricMatrix::zeros(graph.num_faces());
    for (e, b) in bigons.iter().enumerate() {
        let (fp, fm) = graph.edge_faces(e);
        let j = b.jacobian().entries;
        if fp == fm {
            h.add_symmetric(fp, fp, j[0][0] + j[0][1] + j[1][0] + j[1][1]);
        } else {
            h.add_symmetric(fp, fp, j[0][0]);
            h.add_symmetric(fm, fm, j[1][1]);
            // mean of the two one-sided mixed derivatives
            h.add_symmetric(fp, fm, 0.5 * (j[0][1] + j[1][0]));
        }
    }
    h
}

/// Gradient `T(K) - T` and Hessian of `Omega` at `K`.
pub fn assemble_gradient_hessian(
    graph: &WeightedCellGraph,
    k: &[f64],
    targets: &CurvatureTarget,
) -> Result<(Vec<f64>, SymmetricMatrix), TrigError> {
    let bigons = edge_bigons(graph, k, 1)?;
    let grad = gradient_from(graph, &bigons, targets);
    Ok((grad, hessian(graph, &bigons)))
}

fn gradient_from(graph: &WeightedCellGraph, bigons: &[BigonShape], targets: &CurvatureTarget) -> Vec<f64> {
    face_totals(graph, bigons).into_iter().zip(targets.values()).map(|(a, t)| a - t).collect()
}

/// `Omega(K)`, with each bigon primitive integrated from the origin.
pub fn omega(graph: &WeightedCellGraph, k: &[f64], targets: &CurvatureTarget) -> Result<f64, TrigError> {
    let mut value = 0.0;
    for (e, edge) in graph.edges().iter().enumerate() {
        let (fp, fm) = graph.edge_faces(e);
        value += primitive_value(edge.theta, k[fp], k[fm])?;
    }
    Ok(value - k.iter().zip(targets.values()).map(|(a, b)| a * b).sum::<f64>())
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `Omega(K + step d) - Omega(K)`, integrating the exact gradient along the
/// segment with panel doubling.
fn omega_change(
    graph: &WeightedCellGraph,
    targets: &CurvatureTarget,
    k: &[f64],
    d: &[f64],
    step: f64,
    threads: usize,
) -> Result<f64, TrigError> {
    let (nodes, weights) = gauss_legendre();
    let estimate = |panels: usize| -> Result<f64, TrigError> {
        let h = step / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            let mut panel = 0.0;
            for (x, w) in nodes.iter().zip(weights) {
                let s = mid + 0.5 * h * x;
                let at: Vec<f64> = k.iter().zip(d).map(|(a, b)| a + s * b).collect();
                let g = gradient_from(graph, &edge_bigons(graph, &at, threads)?, targets);
                panel += w * g.iter().zip(d).map(|(a, b)| a * b).sum::<f64>();
            }
            total += 0.5 * h * panel;
        }
        Ok(total)
    };
    let mut panels = 1;
    let mut prev = estimate(panels)?;
    while panels < MAX_OMEGA_PANELS {
        panels *= 2;
        let next = estimate(panels)?;
        if (next - prev).abs() <= 1e-9 * next.abs() + 1e-15 {
            return Ok(next);
        }
        prev = next;
    }
    Ok(prev)
}

fn half_sq(v: &[f64]) -> f64 {
    0.5 * v.iter().map(|x| x * x).sum::<f64>()
}

fn newton_direction(h: &SymmetricMatrix, grad: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
    if h.dim() <= DENSE_LIMIT {
        cholesky_solve(&h.to_dense(), &rhs)
    } else {
        pcg_solve(h, &rhs, 1e-13, 10 * h.dim())
    }
}

/// Damped Newton with backtracking on `|grad|^2 / 2`.
///
/// The Newton direction is a descent direction for this merit because the
/// Hessian is positive definite. Steps are capped at sup-norm 2 and must not
/// increase the sup-norm of the gradient. They must also not increase `Omega`,
/// which keeps the iterates in a sublevel set; without this the merit
/// accepts steps toward `K -> -inf`, where `T(K) -> 0` and the merit is
/// flat. With the feasibility gate on, infeasible targets are rejected
/// before any iteration.
pub fn solve(
    graph: &WeightedCellGraph,
    targets: &CurvatureTarget,
    options: &SolveOptions,
) -> Result<SolveReport, SolveError> {
    let start = Instant::now();
    if !options.skip_feasibility {
        let verdict = find_coherent_system(graph, targets);
        if !verdict.is_feasible() {
            return Err(SolveError::Infeasible(verdict));
        }
    }
    let nf = graph.num_faces();
    let mut k = match &options.initial_k {
        Some(k0) if k0.len() != nf => return Err(SolveError::InitialPoint { expected: nf, got: k0.len() }),
        Some(k0) => k0.clone(),
        None => vec![0.0; nf],
    };

    let mut bigons = edge_bigons(graph, &k, options.threads)?;
    let mut grad = gradient_from(graph, &bigons, targets);
    let mut res = sup_norm(&grad);
    let mut history = vec![SolverState { iteration: 0, residual_norm: res, merit: half_sq(&grad), step: 0.0 }];
    let mut polished = 0;
    let mut iteration = 0;

    let report = |k: &[f64], bigons: &[BigonShape], res: f64, iteration: usize, history: &[SolverState]| SolveReport {
        k: k.to_vec(),
        radii: radii(k),
        achieved: face_totals(graph, bigons),
        iterations: iteration,
        final_residual: res,
        history: history.to_vec(),
        wall_time: start.elapsed(),
    };

    loop {
        let converged = res <= options.tol;
        if converged && polished >= options.polish_steps {
            break;
        }
        if iteration >= options.max_iter {
            if converged {
                break;
            }
            return Err(SolveError::NonConvergence {
                reason: "iteration limit reached".into(),
                report: Box::new(report(&k, &bigons, res, iteration, &history)),
            });
        }
        let h = hessian(graph, &bigons);
        let d = match newton_direction(&h, &grad) {
            Ok(d) => d,
            Err(_) if converged => break,
            Err(e) => {
                return Err(SolveError::NonConvergence {
                    reason: format!("linear solve failed: {e}"),
                    report: Box::new(report(&k, &bigons, res, iteration, &history)),
                })
            }
        };

        if converged {
            // polishing: one full step, kept only if it helps
            let trial: Vec<f64> = k.iter().zip(&d).map(|(a, b)| a + b).collect();
            polished += 1;
            let Ok(tb) = edge_bigons(graph, &trial, options.threads) else { break };
            let tg = gradient_from(graph, &tb, targets);
            let tr = sup_norm(&tg);
            if !(tr <= res) {
                break;
            }
            iteration += 1;
            k = trial;
            bigons = tb;
            grad = tg;
            res = tr;
            history.push(SolverState { iteration, residual_norm: res, merit: half_sq(&grad), step: 1.0 });
            continue;
        }

        let merit = half_sq(&grad);
        let mut step = (MAX_STEP_NORM / sup_norm(&d)).min(1.0);
        let accepted = loop {
            if step < MIN_STEP {
                break None;
            }
            let trial: Vec<f64> = k.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            if let Ok(tb) = edge_bigons(graph, &trial, options.threads) {
                let tg = gradient_from(graph, &tb, targets);
                let tm = half_sq(&tg);
                let tr = sup_norm(&tg);
                if tm <= merit * (1.0 - 2.0 * ARMIJO * step)
                    && tr <= res
                    && omega_change(graph, targets, &k, &d, step, options.threads)? <= 0.0
                {
                    break Some((trial, tb, tg, tr));
                }
            }
            step *= 0.5;
        };
        let Some((trial, tb, tg, tr)) = accepted else {
            return Err(SolveError::NonConvergence {
                reason: "line search step fell below 2^-30".into(),
                report: Box::new(report(&k, &bigons, res, iteration, &history)),
            });
        };
        iteration += 1;
        k = trial;
        bigons = tb;
        grad = tg;
        res = tr;
        history.push(SolverState { iteration, residual_norm: res, merit: half_sq(&grad), step });
    }
    Ok(report(&k, &bigons, res, iteration, &history))
}
