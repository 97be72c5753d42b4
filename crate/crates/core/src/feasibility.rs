//! Feasibility of prescribed total curvatures.
//!
//! Targets `(T_f)` are realisable iff for every nonempty set of faces `F'`
//!
//! ```text
//!     sum_{f in F'} T_f  <  sum_{e touching F'} 2 theta_e
//! ```
//!
//! with each edge counted once. Equivalently there is a *coherent system*:
//! positive values on the sides with `T_{e+} + T_{e-} < 2 theta_e` and face
//! sums equal to the targets. The system is found by a linear program that
//! maximises the common slack `s` of all strict inequalities; the subset
//! condition is also checked by brute force for small graphs.

use thiserror::Error;

use crate::cellgraph::{CurvatureTarget, Side, WeightedCellGraph};
use crate::simplex::{LinearProgram, LpOutcome, Relation};

/// Optimal LP slack at or below this is reported as infeasible.
pub const SLACK_EPS: f64 = 1e-10;

/// Largest face count accepted by [`exhaustive_subset_check`].
pub const MAX_EXHAUSTIVE_FACES: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeasibilityError {
    #[error("exhaustive subset check needs at most {MAX_EXHAUSTIVE_FACES} faces, graph has {0}")]
    TooManyFaces(usize),
}

/// Side values witnessing feasibility. Indexed by `2 * edge + orientation`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentSystem {
    values: Vec<f64>,
    /// Smallest margin over all strict inequalities.
    pub slack: f64,
}

impl CoherentSystem {
    pub fn value(&self, side: Side) -> f64 {
        self.values[2 * side.edge + side.orientation.index()]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Worst violation of the face-sum equalities.
    pub fn face_sum_error(&self, graph: &WeightedCellGraph, targets: &CurvatureTarget) -> f64 {
        graph
            .faces()
            .iter()
            .zip(targets.values())
            .map(|(f, t)| (f.boundary.iter().map(|&s| self.value(s)).sum::<f64>() - t).abs())
            .fold(0.0, f64::max)
    }

    fn margins(values: &[f64], graph: &WeightedCellGraph) -> f64 {
        let positive = values.iter().copied().fold(f64::INFINITY, f64::min);
        let edges = graph
            .edges()
            .iter()
            .enumerate()
            .map(|(e, edge)| 2.0 * edge.theta - values[2 * e] - values[2 * e + 1])
            .fold(f64::INFINITY, f64::min);
        positive.min(edges)
    }
}

/// A set of faces violating the subset condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub faces: Vec<usize>,
    /// `sum T_f - sum 2 theta_e` over the subset; `>= 0` for a violation.
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateSource {
    /// Level set of the optimal LP dual on the face rows.
    Dual,
    /// Brute-force enumeration of face subsets.
    Exhaustive,
    /// The graph is too large to enumerate and the dual gave nothing.
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    Feasible(CoherentSystem),
    Infeasible { lp_slack: f64, certificate: Option<Certificate>, source: CertificateSource },
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

/// `sum T_f - sum 2 theta_e` for the given face subset.
pub fn subset_margin(graph: &WeightedCellGraph, targets: &CurvatureTarget, faces: &[usize]) -> f64 {
    let mut member = vec![false; graph.num_faces()];
    for &f in faces {
        member[f] = true;
    }
    let t: f64 = faces.iter().map(|&f| targets.values()[f]).sum();
    let bound: f64 = (0..graph.num_edges())
        .filter(|&e| {
            let (a, b) = graph.edge_faces(e);
            member[a] || member[b]
        })
        .map(|e| 2.0 * graph.edges()[e].theta)
        .sum();
    t - bound
}

/// Solves `max s` subject to `T_t >= s`, `T_{e+} + T_{e-} <= 2 theta_e - s`
/// and the face sums, after substituting `T_t = s + u_t` with `u_t >= 0` and
/// splitting the free `s` into `s+ - s-`.
pub fn find_coherent_system(graph: &WeightedCellGraph, targets: &CurvatureTarget) -> Feasibility {
    let sides = 2 * graph.num_edges();
    let (sp, sm) = (sides, sides + 1);
    let mut lp = LinearProgram::new(sides + 2);
    lp.objective[sp] = 1.0;
    lp.objective[sm] = -1.0;
    for (f, face) in graph.faces().iter().enumerate() {
        let mut row = vec![0.0; sides + 2];
        for s in &face.boundary {
            row[2 * s.edge + s.orientation.index()] += 1.0;
        }
        let n = face.boundary.len() as f64;
        row[sp] = n;
        row[sm] = -n;
        lp.add(row, Relation::Eq, targets.values()[f]);
    }
    for (e, edge) in graph.edges().iter().enumerate() {
        let mut row = vec![0.0; sides + 2];
        row[2 * e] = 1.0;
        row[2 * e + 1] = 1.0;
        row[sp] = 3.0;
        row[sm] = -3.0;
        lp.add(row, Relation::Le, 2.0 * edge.theta);
    }

    let solution = match lp.solve() {
        LpOutcome::Optimal(s) => s,
        // the program is feasible for any targets (take s very negative) and
        // bounded by the face rows; anything else is numerical breakdown
        _ => return infeasible_without_dual(graph, targets, f64::NAN),
    };
    let s = solution.value;
    if s > SLACK_EPS {
        let values: Vec<f64> = solution.x[..sides].iter().map(|u| s + u).collect();
        let slack = CoherentSystem::margins(&values, graph);
        return Feasibility::Feasible(CoherentSystem { values, slack });
    }

    // Faces with negative multipliers form the violating set in the dual
    // picture; scan level sets in both orders and keep the smallest
    // violating set, larger margin first among equals.
    let face_duals = &solution.duals[..graph.num_faces()];
    let mut order: Vec<usize> = (0..graph.num_faces()).collect();
    order.sort_by(|&a, &b| face_duals[a].total_cmp(&face_duals[b]).then(a.cmp(&b)));
    let mut best: Option<Certificate> = None;
    for ordering in [order.clone(), order.into_iter().rev().collect::<Vec<_>>()] {
        for k in 1..=ordering.len() {
            let mut faces = ordering[..k].to_vec();
            let margin = subset_margin(graph, targets, &faces);
            let smaller = |b: &Certificate| k < b.faces.len() || (k == b.faces.len() && margin > b.margin);
            if margin >= 0.0 && best.as_ref().map_or(true, smaller) {
                faces.sort_unstable();
                best = Some(Certificate { faces, margin });
            }
        }
    }
    match best {
        Some(c) => Feasibility::Infeasible { lp_slack: s, certificate: Some(c), source: CertificateSource::Dual },
        None => infeasible_without_dual(graph, targets, s),
    }
}

fn infeasible_without_dual(graph: &WeightedCellGraph, targets: &CurvatureTarget, lp_slack: f64) -> Feasibility {
    match exhaustive_subset_check(graph, targets) {
        Ok(v) if v.margin >= 0.0 => Feasibility::Infeasible {
            lp_slack,
            certificate: Some(Certificate { faces: v.worst, margin: v.margin }),
            source: CertificateSource::Exhaustive,
        },
        _ => Feasibility::Infeasible { lp_slack, certificate: None, source: CertificateSource::None },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsetVerdict {
    pub passes: bool,
    /// Subset with the largest margin (sorted face indices).
    pub worst: Vec<usize>,
    pub margin: f64,
}

/// Checks the subset condition on all `2^F - 1` nonempty face subsets.
pub fn exhaustive_subset_check(
    graph: &WeightedCellGraph,
    targets: &CurvatureTarget,
) -> Result<SubsetVerdict, FeasibilityError> {
    let nf = graph.num_faces();
    if nf > MAX_EXHAUSTIVE_FACES {
        return Err(FeasibilityError::TooManyFaces(nf));
    }
    let edge_masks: Vec<(u32, f64)> = (0..graph.num_edges())
        .map(|e| {
            let (a, b) = graph.edge_faces(e);
            ((1u32 << a) | (1u32 << b), 2.0 * graph.edges()[e].theta)
        })
        .collect();
    let t = targets.values();
    let mut worst = (0u32, f64::NEG_INFINITY);
    for mask in 1u32..(1u32 << nf) {
        let mut margin = 0.0;
        for (f, tf) in t.iter().enumerate() {
            if mask & (1 << f) != 0 {
                margin += tf;
            }
        }
        for &(m, w) in &edge_masks {
            if m & mask != 0 {
                margin -= w;
            }
        }
        if margin > worst.1 {
            worst = (mask, margin);
        }
    }
    let faces = (0..nf).filter(|f| worst.0 & (1 << f) != 0).collect();
    Ok(SubsetVerdict { passes: worst.1 < 0.0, worst: faces, margin: worst.1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples::{digon_sphere, loop_face, tetrahedron};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn targets(g: &WeightedCellGraph, t: &[f64]) -> CurvatureTarget {
        CurvatureTarget::new(g, t.to_vec()).unwrap()
    }

    #[test]
    fn loop_face_feasible_below_pi() {
        let g = loop_face(FRAC_PI_2);
        let t = targets(&g, &[1.0]);
        let Feasibility::Feasible(sys) = find_coherent_system(&g, &t) else { panic!() };
        assert!(sys.face_sum_error(&g, &t) < 1e-12);
        assert!(sys.values().iter().all(|&v| v > 0.0));
        assert!(sys.values()[0] + sys.values()[1] < PI);
        assert!(sys.slack > 0.0);
        assert!(exhaustive_subset_check(&g, &t).unwrap().passes);
    }

    #[test]
    fn loop_face_boundary_is_infeasible() {
        let g = loop_face(FRAC_PI_2);
        let t = targets(&g, &[PI]);
        match find_coherent_system(&g, &t) {
            Feasibility::Infeasible { certificate: Some(c), .. } => {
                assert_eq!(c.faces, vec![0]);
                assert!(c.margin.abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        let v = exhaustive_subset_check(&g, &t).unwrap();
        assert!(!v.passes);
        assert_eq!(v.worst, vec![0]);
    }

    #[test]
    fn digon_symmetric_system() {
        let g = digon_sphere(FRAC_PI_2);
        let t = targets(&g, &[1.0, 1.0]);
        let Feasibility::Feasible(sys) = find_coherent_system(&g, &t) else { panic!() };
        // the slack optimum is unique here: every side at 1/2
        for &v in sys.values() {
            assert!((v - 0.5).abs() < 1e-12);
        }
        assert!((sys.slack - 0.5).abs() < 1e-12);
        let v = exhaustive_subset_check(&g, &t).unwrap();
        assert!(v.passes);
        assert_eq!(v.worst, vec![0, 1]);
        assert!((v.margin - (2.0 - 2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn digon_one_face_saturated() {
        let g = digon_sphere(FRAC_PI_2);
        let t = targets(&g, &[2.0 * PI, 0.1]);
        let v = exhaustive_subset_check(&g, &t).unwrap();
        assert!(!v.passes);
        // {f0} violates with equality, but {f0, f1} has the larger margin
        assert_eq!(v.worst, vec![0, 1]);
        assert!((v.margin - 0.1).abs() < 1e-12);
        assert_eq!(subset_margin(&g, &t, &[0]), 0.0);
        match find_coherent_system(&g, &t) {
            Feasibility::Infeasible { certificate: Some(c), .. } => assert_eq!(c.faces, vec![0]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_face_reduces_to_boundary_sum() {
        let g = crate::samples::one_vertex_torus(1.0);
        // two distinct edges on the boundary: bound 4
        assert!(exhaustive_subset_check(&g, &targets(&g, &[3.99])).unwrap().passes);
        assert!(!exhaustive_subset_check(&g, &targets(&g, &[4.0])).unwrap().passes);
    }

    #[test]
    fn dual_certificate_on_tetrahedron() {
        let g = tetrahedron(FRAC_PI_2);
        // faces 0 and 1 share edge 1 and touch 5 edges: bound 5 pi
        let t = targets(&g, &[8.0, 8.0, 0.5, 0.5]);
        match find_coherent_system(&g, &t) {
            Feasibility::Infeasible { certificate: Some(c), source, .. } => {
                assert_eq!(source, CertificateSource::Dual);
                assert!(c.margin >= 0.0);
                assert!((subset_margin(&g, &t, &c.faces) - c.margin).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn too_many_faces() {
        let mut rng = <rand::rngs::StdRng as rand::SeedableRng>::seed_from_u64(3);
        let mut g = crate::samples::random_cellulation(&mut rng, 30, 200);
        while g.num_faces() <= MAX_EXHAUSTIVE_FACES {
            g = crate::samples::random_cellulation(&mut rng, 30, 200);
        }
        let t = CurvatureTarget::new(&g, vec![0.1; g.num_faces()]).unwrap();
        assert_eq!(exhaustive_subset_check(&g, &t), Err(FeasibilityError::TooManyFaces(g.num_faces())));
    }
}
