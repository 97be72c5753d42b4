//! Solution documents and their verification.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cellgraph::{CurvatureTarget, GraphDocument, GraphError, ValidationOptions, WeightedCellGraph};
use crate::geometry::{reconstruct, AuditFailure, GeometryError, PatternMetric};
use crate::solver::SolveReport;

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("malformed solution document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("solution document has no targets")]
    MissingTargets,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Result of re-solving from a random start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartCheck {
    pub seed: u64,
    pub max_k_difference: f64,
}

/// Everything `solve` produces. Wall time is left out so that repeated runs
/// serialize identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionDocument {
    pub graph: GraphDocument,
    pub tol: f64,
    pub log_curvatures: Vec<f64>,
    pub radii: Vec<f64>,
    pub achieved: Vec<f64>,
    pub iterations: usize,
    pub final_residual: f64,
    pub metric: PatternMetric,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restart: Option<RestartCheck>,
}

impl SolutionDocument {
    pub fn new(
        graph: &WeightedCellGraph,
        targets: &CurvatureTarget,
        tol: f64,
        report: &SolveReport,
        metric: PatternMetric,
    ) -> Self {
        SolutionDocument {
            graph: GraphDocument::from_graph(graph, Some(targets)),
            tol,
            log_curvatures: report.k.clone(),
            radii: report.radii.clone(),
            achieved: report.achieved.clone(),
            iterations: report.iterations,
            final_residual: report.final_residual,
            metric,
            restart: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self, DocumentError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("solution document serializes");
        s.push('\n');
        s
    }

    /// The embedded graph and its targets.
    pub fn graph_and_targets(&self) -> Result<(WeightedCellGraph, CurvatureTarget), DocumentError> {
        let map = self.graph.targets.clone().ok_or(DocumentError::MissingTargets)?;
        let graph = self.graph.clone().into_graph(ValidationOptions::default())?;
        let targets = CurvatureTarget::from_map(&graph, &map)?;
        Ok((graph, targets))
    }

    /// Rebuilds the metric from the stored graph and log curvatures and
    /// checks it against the targets and the stored values.
    pub fn verify(&self) -> Result<Verification, DocumentError> {
        let (graph, targets) = self.graph_and_targets()?;
        let metric = reconstruct(&graph, &self.log_curvatures, 1)?;
        let (target_residual, worst_target) = metric
            .faces
            .iter()
            .zip(targets.values())
            .map(|(f, t)| ((f.total_curvature - t).abs(), f.id.to_string()))
            .fold((0.0, None), |(r, w), (x, id)| if w.is_none() || x > r { (x, Some(id)) } else { (r, w) });
        let stored_deviation = metric
            .faces
            .iter()
            .zip(&self.metric.faces)
            .flat_map(|(a, b)| [a.radius - b.radius, a.cone_angle - b.cone_angle, a.area - b.area])
            .chain(self.radii.iter().zip(&metric.faces).map(|(r, f)| r - f.radius))
            .chain(self.achieved.iter().zip(&metric.faces).map(|(t, f)| t - f.total_curvature))
            .chain([metric.total_area - self.metric.total_area])
            .fold(0.0_f64, |m, d| m.max(d.abs()));
        let shape_matches = metric.faces.len() == self.metric.faces.len()
            && self.radii.len() == metric.faces.len()
            && self.achieved.len() == metric.faces.len();
        Ok(Verification {
            target_tolerance: self.tol.max(1e-9),
            target_residual,
            worst_target,
            stored_deviation: if shape_matches { stored_deviation } else { f64::INFINITY },
            metric,
        })
    }
}

/// Tolerance for the difference between stored and recomputed quantities.
pub const STORED_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub target_tolerance: f64,
    pub target_residual: f64,
    pub worst_target: Option<String>,
    pub stored_deviation: f64,
    pub metric: PatternMetric,
}

impl Verification {
    /// The worst failing check, scaled by its tolerance.
    pub fn worst_failure(&self) -> Option<AuditFailure> {
        let mut fails: Vec<AuditFailure> = self.metric.audit.worst_failure().into_iter().collect();
        if !(self.target_residual <= self.target_tolerance) {
            let face = self.worst_target.clone().unwrap_or_default();
            fails.push(AuditFailure {
                identity: format!("target match at face {face}"),
                residual: self.target_residual,
                tolerance: self.target_tolerance,
            });
        }
        if !(self.stored_deviation <= STORED_TOL) {
            fails.push(AuditFailure {
                identity: "stored values".into(),
                residual: self.stored_deviation,
                tolerance: STORED_TOL,
            });
        }
        fails.into_iter().max_by(|a, b| (a.residual / a.tolerance).total_cmp(&(b.residual / b.tolerance)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples::tetrahedron;
    use crate::solver::{solve, SolveOptions};

    fn solved() -> SolutionDocument {
        let g = tetrahedron(1.2);
        let t = CurvatureTarget::new(&g, vec![1.0, 2.0, 1.5, 0.5]).unwrap();
        let r = solve(&g, &t, &SolveOptions::default()).unwrap();
        let m = reconstruct(&g, &r.k, 1).unwrap();
        SolutionDocument::new(&g, &t, 1e-10, &r, m)
    }

    #[test]
    fn round_trip_and_verify() {
        let doc = solved();
        let back = SolutionDocument::parse(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        let v = back.verify().unwrap();
        assert!(v.worst_failure().is_none(), "{:?}", v.worst_failure());
    }

    #[test]
    fn tampered_k_fails_target_match() {
        let mut doc = solved();
        doc.log_curvatures[2] += 1e-3;
        let fail = doc.verify().unwrap().worst_failure().unwrap();
        assert!(fail.identity.starts_with("target match") || fail.identity == "stored values");
    }
}
