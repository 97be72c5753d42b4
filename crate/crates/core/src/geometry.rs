//! Metric reconstruction from log curvatures, Gauss-Bonnet audits and the
//! quadrilateral net.
//!
//! Each edge contributes one geodesic quadrilateral: the two disk sectors
//! over that edge, glued along the segment between the two centers. Its
//! corners are the two disk centers and the two intersection points of the
//! circles, which are the endpoints of the edge.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cellgraph::{Id, Orientation, WeightedCellGraph};
use crate::solver::edge_bigons;
use crate::sphertrig::TrigError;

pub const BIGON_TOL: f64 = 1e-12;
pub const FACE_TOL: f64 = 1e-9;
pub const GLOBAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("expected {expected} log curvatures, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Trig(#[from] TrigError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceMetric {
    pub id: Id,
    pub log_curvature: f64,
    pub radius: f64,
    /// Cone angle at the disk center, the sum of its full sector angles.
    pub cone_angle: f64,
    pub area: f64,
    /// Total geodesic curvature of the boundary circle.
    pub total_curvature: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadMetric {
    pub edge_id: Id,
    pub theta: f64,
    pub face_plus: Id,
    pub face_minus: Id,
    pub r_plus: f64,
    pub r_minus: f64,
    /// Distance between the two centers.
    pub r3: f64,
    pub half_angle_plus: f64,
    pub half_angle_minus: f64,
    pub length_plus: f64,
    pub length_minus: f64,
    pub total_plus: f64,
    pub total_minus: f64,
    /// Area of the overlap of the two disks, from sectors minus the kite.
    pub bigon_area: f64,
}

/// Largest residual of each Gauss-Bonnet identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Audit {
    pub bigon_residual: f64,
    pub worst_bigon: Option<Id>,
    pub face_residual: f64,
    pub worst_face: Option<Id>,
    /// `total_area` minus `2 pi chi - sum (2 pi - alpha_p)` over vertices
    /// and centers.
    pub global_residual: f64,
}

/// The identity that failed worst relative to its tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditFailure {
    pub identity: String,
    pub residual: f64,
    pub tolerance: f64,
}

impl Audit {
    pub fn passes(&self) -> bool {
        self.worst_failure().is_none()
    }

    pub fn worst_failure(&self) -> Option<AuditFailure> {
        let name = |kind: &str, id: &Option<Id>| match id {
            Some(id) => format!("{kind} {id}"),
            None => kind.to_string(),
        };
        let checks = [
            (name("bigon", &self.worst_bigon), self.bigon_residual, BIGON_TOL),
            (name("face", &self.worst_face), self.face_residual, FACE_TOL),
            ("global".to_string(), self.global_residual.abs(), GLOBAL_TOL),
        ];
        checks
            .into_iter()
            .filter(|(_, r, tol)| !(r <= tol))
            .max_by(|a, b| (a.1 / a.2).total_cmp(&(b.1 / b.2)))
            .map(|(identity, residual, tolerance)| AuditFailure { identity, residual, tolerance })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternMetric {
    pub euler_characteristic: i64,
    pub faces: Vec<FaceMetric>,
    pub quads: Vec<QuadMetric>,
    pub vertex_cone_angles: Vec<f64>,
    /// Sum of the disk areas minus the sum of their pairwise overlaps.
    pub total_area: f64,
    pub audit: Audit,
}

impl PatternMetric {
    /// Recomputes all identities from the stored quantities.
    pub fn audit(&self) -> Audit {
        let mut bigon_residual = 0.0;
        let mut worst_bigon = None;
        for q in &self.quads {
            let r = (q.bigon_area - (2.0 * q.theta - q.total_plus - q.total_minus)).abs();
            if worst_bigon.is_none() || r > bigon_residual {
                bigon_residual = r;
                worst_bigon = Some(q.edge_id.clone());
            }
        }
        let mut face_residual = 0.0;
        let mut worst_face = None;
        for f in &self.faces {
            let r = (f.total_curvature - (f.cone_angle - f.area)).abs();
            if worst_face.is_none() || r > face_residual {
                face_residual = r;
                worst_face = Some(f.id.clone());
            }
        }
        let defect: f64 = self
            .vertex_cone_angles
            .iter()
            .chain(self.faces.iter().map(|f| &f.cone_angle))
            .map(|a| 2.0 * PI - a)
            .sum();
        let expected = 2.0 * PI * self.euler_characteristic as f64 - defect;
        Audit {
            bigon_residual,
            worst_bigon,
            face_residual,
            worst_face,
            global_residual: self.total_area - expected,
        }
    }
}

/// Builds the full metric at `K`.
pub fn reconstruct(graph: &WeightedCellGraph, k: &[f64], threads: usize) -> Result<PatternMetric, GeometryError> {
    if k.len() != graph.num_faces() {
        return Err(GeometryError::Dimension { expected: graph.num_faces(), got: k.len() });
    }
    let bigons = edge_bigons(graph, k, threads)?;
    let mut faces: Vec<FaceMetric> = graph
        .faces()
        .iter()
        .zip(k)
        .map(|(f, &kf)| FaceMetric {
            id: f.id.clone(),
            log_curvature: kf,
            radius: (-kf).exp().atan(),
            cone_angle: 0.0,
            area: 0.0,
            total_curvature: 0.0,
        })
        .collect();
    let mut quads = Vec::with_capacity(bigons.len());
    let mut overlap = 0.0;
    for (e, b) in bigons.iter().enumerate() {
        let (fp, fm) = graph.edge_faces(e);
        for (i, f) in [fp, fm].into_iter().enumerate() {
            faces[f].cone_angle += 2.0 * b.half_sector_angles[i];
            faces[f].area += b.sector_area(i);
            faces[f].total_curvature += b.totals[i];
        }
        // the kite is two triangles with angle excess a'1 + a'2 - theta
        let kite = 2.0 * (b.half_sector_angles[0] + b.half_sector_angles[1] - b.theta);
        let bigon_area = b.sector_area(0) + b.sector_area(1) - kite;
        overlap += bigon_area;
        quads.push(QuadMetric {
            edge_id: graph.edges()[e].id.clone(),
            theta: b.theta,
            face_plus: faces[fp].id.clone(),
            face_minus: faces[fm].id.clone(),
            r_plus: b.radii[0],
            r_minus: b.radii[1],
            r3: b.center_distance,
            half_angle_plus: b.half_sector_angles[0],
            half_angle_minus: b.half_sector_angles[1],
            length_plus: b.side_lengths[0],
            length_minus: b.side_lengths[1],
            total_plus: b.totals[0],
            total_minus: b.totals[1],
            bigon_area,
        });
    }
    let total_area = faces.iter().map(|f| f.area).sum::<f64>() - overlap;
    let mut metric = PatternMetric {
        euler_characteristic: graph.euler_characteristic(),
        faces,
        quads,
        vertex_cone_angles: graph.vertex_cone_angles(),
        total_area,
        audit: Audit {
            bigon_residual: 0.0,
            worst_bigon: None,
            face_residual: 0.0,
            worst_face: None,
            global_residual: 0.0,
        },
    };
    metric.audit = metric.audit();
    Ok(metric)
}

/// One of the four center-to-vertex segments of a quadrilateral: the spoke
/// from the center on `side` to the vertex where that side starts or ends in
/// its face's boundary walk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Spoke {
    pub edge_id: Id,
    pub side: Orientation,
    pub end: SpokeEnd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpokeEnd {
    Start,
    End,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Glue {
    pub spoke: Spoke,
    pub to: Spoke,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetQuad {
    pub edge_id: Id,
    pub face_plus: Id,
    pub face_minus: Id,
    pub r_plus: f64,
    pub r_minus: f64,
    pub r3: f64,
    pub half_angle_plus: f64,
    pub half_angle_minus: f64,
    /// Interior angle at both edge endpoints, `pi - theta`.
    pub vertex_angle: f64,
    /// Graph vertices at the start and end of each side, in walk order.
    pub plus_vertices: [usize; 2],
    pub minus_vertices: [usize; 2],
    pub glue: Vec<Glue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetDocument {
    pub quads: Vec<NetQuad>,
}

impl NetDocument {
    /// Cone angle at each face center, re-summed from the net.
    pub fn center_cone_angles(&self) -> Vec<(Id, f64)> {
        let mut out: Vec<(Id, f64)> = Vec::new();
        let mut add = |id: &Id, a: f64| match out.iter_mut().find(|(f, _)| f == id) {
            Some(slot) => slot.1 += a,
            None => out.push((id.clone(), a)),
        };
        for q in &self.quads {
            add(&q.face_plus, 2.0 * q.half_angle_plus);
            add(&q.face_minus, 2.0 * q.half_angle_minus);
        }
        out
    }
}

/// Lists every quadrilateral with its gluing.
///
/// Within a face the sectors follow the boundary walk: the end spoke of
/// each side is glued to the start spoke of the next side.
pub fn export_net(metric: &PatternMetric, graph: &WeightedCellGraph) -> NetDocument {
    let spoke = |e: usize, side: Orientation, end: SpokeEnd| Spoke { edge_id: graph.edges()[e].id.clone(), side, end };
    let mut quads = Vec::with_capacity(graph.num_edges());
    for (e, q) in metric.quads.iter().enumerate() {
        let mut glue = Vec::with_capacity(4);
        let mut vertices = [[0; 2]; 2];
        for o in [Orientation::Plus, Orientation::Minus] {
            let (f, pos) = graph.locate(crate::cellgraph::Side { edge: e, orientation: o });
            let face = &graph.faces()[f];
            let n = face.boundary.len();
            vertices[o.index()] = [face.corners[pos], face.end_corner(pos)];
            let prev = face.boundary[(pos + n - 1) % n];
            let next = face.boundary[(pos + 1) % n];
            glue.push(Glue { spoke: spoke(e, o, SpokeEnd::Start), to: spoke(prev.edge, prev.orientation, SpokeEnd::End) });
            glue.push(Glue { spoke: spoke(e, o, SpokeEnd::End), to: spoke(next.edge, next.orientation, SpokeEnd::Start) });
        }
        quads.push(NetQuad {
            edge_id: q.edge_id.clone(),
            face_plus: q.face_plus.clone(),
            face_minus: q.face_minus.clone(),
            r_plus: q.r_plus,
            r_minus: q.r_minus,
            r3: q.r3,
            half_angle_plus: q.half_angle_plus,
            half_angle_minus: q.half_angle_minus,
            vertex_angle: PI - q.theta,
            plus_vertices: vertices[0],
            minus_vertices: vertices[1],
            glue,
        });
    }
    NetDocument { quads }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples::{digon_sphere, loop_face, one_vertex_torus, random_cellulation, tetrahedron};
    use crate::solver::total_curvatures;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn digon_at_origin() {
        let g = digon_sphere(FRAC_PI_2);
        let m = reconstruct(&g, &[0.0, 0.0], 1).unwrap();
        for f in &m.faces {
            assert!((f.radius - FRAC_PI_4).abs() < 1e-15);
            assert!((f.cone_angle - 3.821266472498037).abs() < 1e-12);
            assert!((f.area - 1.1192230370738772).abs() < 1e-12);
            assert!((f.total_curvature - 2.70204343542416).abs() < 1e-12);
        }
        for a in &m.vertex_cone_angles {
            assert!((a - PI).abs() < 1e-15);
        }
        for q in &m.quads {
            assert!((q.bigon_area - 0.4395492181656331).abs() < 1e-12);
        }
        // two disks of area 1.1192230 overlapping in two lenses
        assert!((m.total_area - 1.359347637816488).abs() < 1e-12);
        let rhs = 4.0 * PI - (2.0 * PI + 2.0 * (2.0 * PI - 3.821266472498037));
        assert!((m.total_area - rhs).abs() < 1e-12);
        assert!(m.audit.passes());
    }

    #[test]
    fn totals_agree_with_solver() {
        let g = tetrahedron(1.3);
        let k = [0.4, -2.0, 1.1, 0.0];
        let m = reconstruct(&g, &k, 1).unwrap();
        let t = total_curvatures(&g, &k).unwrap();
        for (f, t) in m.faces.iter().zip(t) {
            assert!((f.total_curvature - t).abs() < 1e-12);
        }
    }

    #[test]
    fn audits_hold_on_fixed_graphs() {
        for g in [digon_sphere(0.7), loop_face(1.2), tetrahedron(FRAC_PI_2), one_vertex_torus(0.4)] {
            let k: Vec<f64> = (0..g.num_faces()).map(|i| 1.3 * i as f64 - 0.8).collect();
            let m = reconstruct(&g, &k, 1).unwrap();
            assert!(m.audit.passes(), "{:?}", m.audit);
        }
    }

    #[test]
    fn rejects_wrong_dimension() {
        let g = tetrahedron(1.0);
        assert_eq!(reconstruct(&g, &[0.0], 1), Err(GeometryError::Dimension { expected: 4, got: 1 }));
    }

    #[test]
    fn failure_names_worst_identity() {
        let g = digon_sphere(FRAC_PI_2);
        let mut m = reconstruct(&g, &[0.0, 0.0], 1).unwrap();
        m.faces[1].area += 1e-6;
        let a = m.audit();
        let fail = a.worst_failure().unwrap();
        assert_eq!(fail.identity, "face f1");
    }

    #[test]
    fn net_counts() {
        let g = digon_sphere(FRAC_PI_2);
        let net = export_net(&reconstruct(&g, &[0.0, 0.0], 1).unwrap(), &g);
        assert_eq!(net.quads.len(), 2);
        assert_eq!(net.quads.iter().map(|q| q.glue.len()).sum::<usize>(), 8);
        let g = tetrahedron(FRAC_PI_2);
        let net = export_net(&reconstruct(&g, &[0.0; 4], 1).unwrap(), &g);
        assert_eq!(net.quads.len(), 6);
    }

    #[test]
    fn net_gluing_is_an_involution() {
        let g = tetrahedron(1.0);
        let net = export_net(&reconstruct(&g, &[0.1, 0.2, 0.3, 0.4], 1).unwrap(), &g);
        let all: Vec<&Glue> = net.quads.iter().flat_map(|q| &q.glue).collect();
        for gl in &all {
            assert!(all.iter().any(|o| o.spoke == gl.to && o.to == gl.spoke));
        }
    }

    #[test]
    fn net_round_trip_reproduces_center_angles() {
        let g = one_vertex_torus(1.1);
        let m = reconstruct(&g, &[0.6], 1).unwrap();
        let text = serde_json::to_string(&export_net(&m, &g)).unwrap();
        let back: NetDocument = serde_json::from_str(&text).unwrap();
        for ((id, a), f) in back.center_cone_angles().iter().zip(&m.faces) {
            assert_eq!(id, &f.id);
            assert!((a - f.cone_angle).abs() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn audits_hold_at_arbitrary_k(seed in any::<u64>(), scale in 0.0f64..6.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_cellulation(&mut rng, 8, 10);
            let k: Vec<f64> = (0..g.num_faces()).map(|i| scale * ((seed as f64 + 1.7 * i as f64).sin())).collect();
            let m = reconstruct(&g, &k, 1).unwrap();
            prop_assert!(m.audit.passes(), "{:?}", m.audit);
            for (f, &kf) in m.faces.iter().zip(&k) {
                prop_assert!((f.radius - (-kf).exp().atan()).abs() < 1e-15);
            }
        }
    }
}
