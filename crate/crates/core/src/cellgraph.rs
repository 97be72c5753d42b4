//! Combinatorial model of a weighted cellular graph on a closed surface.
//!
//! Faces are given as cyclic walks of *sides*. Every edge has exactly two
//! sides, `(e, +)` and `(e, -)`, and each side lies on exactly one face (both
//! may lie on the same face). The set of all sides is the set of oriented
//! edges; each side spans one disk sector in the reconstructed pattern.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("malformed document: {0}")]
    Parse(String),
    #[error("graph has no {0}")]
    Empty(&'static str),
    #[error("duplicate {kind} id {id}")]
    DuplicateId { kind: &'static str, id: Id },
    #[error("edge {edge}: vertex {vertex} out of range (graph has {count} vertices)")]
    VertexOutOfRange { edge: Id, vertex: usize, count: usize },
    #[error("edge {edge}: theta {theta} outside (0, pi/2]")]
    ThetaOutOfRange { edge: Id, theta: f64 },
    #[error("face {face} references unknown edge {edge}")]
    UnknownEdge { face: Id, edge: Id },
    #[error("side ({edge}, {orientation}) appears {count} times; every side must appear exactly once")]
    SideCount { edge: Id, orientation: Orientation, count: usize },
    #[error("face {0} has an empty boundary")]
    EmptyFace(Id),
    #[error("boundary of face {0} is not a closed walk")]
    OpenWalk(Id),
    #[error("graph is disconnected (vertex {0} unreachable from vertex 0)")]
    Disconnected(usize),
    #[error("euler characteristic {0} is not that of a closed orientable surface")]
    EulerCharacteristic(i64),
    #[error("target for face {0}: {1}")]
    Target(String, String),
}

/// Identifier of an edge or face as written in the input document.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Id {
    Num(u64),
    Name(String),
}

impl fmt::Display for Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Id::Num(n) => write!(f, "{n}"),
            Id::Name(s) => f.write_str(s),
        }
    }
}

impl From<usize> for Id {
    fn from(n: usize) -> Self {
        Id::Num(n as u64)
    }
}

impl From<&str> for Id {
    fn from(s: &str) -> Self {
        Id::Name(s.to_owned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Orientation {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Orientation {
    pub fn index(self) -> usize {
        match self {
            Orientation::Plus => 0,
            Orientation::Minus => 1,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Orientation::Plus => Orientation::Minus,
            Orientation::Minus => Orientation::Plus,
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::Plus => "+",
            Orientation::Minus => "-",
        })
    }
}

/// One side of an edge, i.e. an oriented edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Side {
    pub edge: usize,
    pub orientation: Orientation,
}

impl Side {
    pub fn plus(edge: usize) -> Self {
        Side { edge, orientation: Orientation::Plus }
    }

    pub fn minus(edge: usize) -> Self {
        Side { edge, orientation: Orientation::Minus }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: Id,
    pub endpoints: [usize; 2],
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub id: Id,
    pub boundary: Vec<Side>,
    /// `corners[i]` is the vertex where side `i` of the walk starts.
    pub corners: Vec<usize>,
}

impl Face {
    /// Vertex where side `i` of the walk ends.
    pub fn end_corner(&self, i: usize) -> usize {
        self.corners[(i + 1) % self.corners.len()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedEdge {
    pub side: Side,
    pub face: usize,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidationOptions {
    /// Require every face boundary to be a single closed walk.
    pub strict_walks: bool,
    /// Additionally require an even euler characteristic `<= 2`.
    pub closed_orientable: bool,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions { strict_walks: true, closed_orientable: false }
    }
}

/// A validated cellular graph with edge weights in `(0, pi/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedCellGraph {
    num_vertices: usize,
    edges: Vec<Edge>,
    faces: Vec<Face>,
    // side_face[e][o] = (face, position in that face's boundary)
    side_face: Vec<[(usize, usize); 2]>,
}

impl WeightedCellGraph {
    /// Builds and validates a graph. Face boundaries refer to edges by index.
    pub fn new(
        num_vertices: usize,
        edges: Vec<Edge>,
        faces: Vec<(Id, Vec<Side>)>,
        options: ValidationOptions,
    ) -> Result<Self, GraphError> {
        if num_vertices == 0 {
            return Err(GraphError::Empty("vertices"));
        }
        if edges.is_empty() {
            return Err(GraphError::Empty("edges"));
        }
        if faces.is_empty() {
            return Err(GraphError::Empty("faces"));
        }
        check_unique("edge", edges.iter().map(|e| &e.id))?;
        check_unique("face", faces.iter().map(|f| &f.0))?;
        for e in &edges {
            if !(e.theta > 0.0 && e.theta <= FRAC_PI_2) {
                return Err(GraphError::ThetaOutOfRange { edge: e.id.clone(), theta: e.theta });
            }
            for &v in &e.endpoints {
                if v >= num_vertices {
                    return Err(GraphError::VertexOutOfRange { edge: e.id.clone(), vertex: v, count: num_vertices });
                }
            }
        }

        let mut counts = vec![[0usize; 2]; edges.len()];
        let mut side_face = vec![[(usize::MAX, 0); 2]; edges.len()];
        for (fi, (fid, boundary)) in faces.iter().enumerate() {
            if boundary.is_empty() {
                return Err(GraphError::EmptyFace(fid.clone()));
            }
            for (pos, side) in boundary.iter().enumerate() {
                if side.edge >= edges.len() {
                    return Err(GraphError::UnknownEdge { face: fid.clone(), edge: Id::from(side.edge) });
                }
                counts[side.edge][side.orientation.index()] += 1;
                side_face[side.edge][side.orientation.index()] = (fi, pos);
            }
        }
        for (e, c) in counts.iter().enumerate() {
            for o in [Orientation::Plus, Orientation::Minus] {
                if c[o.index()] != 1 {
                    return Err(GraphError::SideCount {
                        edge: edges[e].id.clone(),
                        orientation: o,
                        count: c[o.index()],
                    });
                }
            }
        }

        let mut built = Vec::with_capacity(faces.len());
        for (id, boundary) in faces {
            let corners = match closed_walk(&edges, &boundary) {
                Some(c) => c,
                None if options.strict_walks => return Err(GraphError::OpenWalk(id)),
                None => boundary.iter().map(|s| edges[s.edge].endpoints[0]).collect(),
            };
            built.push(Face { id, boundary, corners });
        }

        let graph = WeightedCellGraph { num_vertices, edges, faces: built, side_face };
        if let Some(v) = graph.unreachable_vertex() {
            return Err(GraphError::Disconnected(v));
        }
        if options.closed_orientable {
            let chi = graph.euler_characteristic();
            if chi > 2 || chi % 2 != 0 {
                return Err(GraphError::EulerCharacteristic(chi));
            }
        }
        Ok(graph)
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    /// Face containing the given side.
    pub fn face_of(&self, side: Side) -> usize {
        self.side_face[side.edge][side.orientation.index()].0
    }

    /// `(face, position)` of the side within its face's boundary walk.
    pub fn locate(&self, side: Side) -> (usize, usize) {
        self.side_face[side.edge][side.orientation.index()]
    }

    /// `(f(e+), f(e-))` for edge `e`.
    pub fn edge_faces(&self, e: usize) -> (usize, usize) {
        (self.side_face[e][0].0, self.side_face[e][1].0)
    }

    pub fn face_index(&self, id: &Id) -> Option<usize> {
        self.faces.iter().position(|f| &f.id == id)
    }

    /// All `2|E|` sides in edge order, `e+` before `e-`.
    pub fn oriented_edges(&self) -> Vec<OrientedEdge> {
        self.edges
            .iter()
            .enumerate()
            .flat_map(|(e, edge)| {
                [Side::plus(e), Side::minus(e)].map(|side| OrientedEdge {
                    side,
                    face: self.face_of(side),
                    theta: edge.theta,
                })
            })
            .collect()
    }

    /// Number of edge ends at each vertex; a loop counts twice.
    pub fn vertex_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_vertices];
        for e in &self.edges {
            deg[e.endpoints[0]] += 1;
            deg[e.endpoints[1]] += 1;
        }
        deg
    }

    /// Cone angle at each vertex: the sum of `pi - theta_e` over edge ends.
    pub fn vertex_cone_angles(&self) -> Vec<f64> {
        let mut angles = vec![0.0; self.num_vertices];
        for e in &self.edges {
            for &v in &e.endpoints {
                angles[v] += PI - e.theta;
            }
        }
        angles
    }

    fn unreachable_vertex(&self) -> Option<usize> {
        let mut adj = vec![Vec::new(); self.num_vertices];
        for e in &self.edges {
            let [a, b] = e.endpoints;
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; self.num_vertices];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().position(|s| !s)
    }
}

fn check_unique<'a>(kind: &'static str, ids: impl Iterator<Item = &'a Id>) -> Result<(), GraphError> {
    // "3" and 3 print the same and would collide as target keys
    let mut seen = HashMap::new();
    for id in ids {
        if seen.insert(id.to_string(), ()).is_some() {
            return Err(GraphError::DuplicateId { kind, id: id.clone() });
        }
    }
    Ok(())
}

/// Start vertex of each side if the sides chain into one closed walk.
fn closed_walk(edges: &[Edge], boundary: &[Side]) -> Option<Vec<usize>> {
    let first = edges[boundary[0].edge].endpoints;
    'start: for (start, mut cur) in [(first[0], first[1]), (first[1], first[0])] {
        let mut corners = Vec::with_capacity(boundary.len());
        corners.push(start);
        for side in &boundary[1..] {
            let [a, b] = edges[side.edge].endpoints;
            corners.push(cur);
            cur = if a == cur {
                b
            } else if b == cur {
                a
            } else {
                continue 'start;
            };
        }
        if cur == start {
            return Some(corners);
        }
    }
    None
}

/// Prescribed total geodesic curvature of every face boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTarget {
    values: Vec<f64>,
}

impl CurvatureTarget {
    pub fn new(graph: &WeightedCellGraph, values: Vec<f64>) -> Result<Self, GraphError> {
        if values.len() != graph.num_faces() {
            return Err(GraphError::Target(
                "*".into(),
                format!("expected {} values, got {}", graph.num_faces(), values.len()),
            ));
        }
        for (f, &t) in graph.faces().iter().zip(&values) {
            if !(t.is_finite() && t > 0.0) {
                return Err(GraphError::Target(f.id.to_string(), format!("{t} is not a positive number")));
            }
        }
        Ok(CurvatureTarget { values })
    }

    /// From a map keyed by the printed face id; the key set must match.
    pub fn from_map(graph: &WeightedCellGraph, map: &BTreeMap<String, f64>) -> Result<Self, GraphError> {
        let mut values = Vec::with_capacity(graph.num_faces());
        for f in graph.faces() {
            let key = f.id.to_string();
            match map.get(&key) {
                Some(&t) => values.push(t),
                None => return Err(GraphError::Target(key, "missing".into())),
            }
        }
        if map.len() != graph.num_faces() {
            let extra = map.keys().find(|k| graph.faces().iter().all(|f| &f.id.to_string() != *k));
            return Err(GraphError::Target(extra.cloned().unwrap_or_default(), "no such face".into()));
        }
        Self::new(graph, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_map(&self, graph: &WeightedCellGraph) -> BTreeMap<String, f64> {
        graph.faces().iter().zip(&self.values).map(|(f, &t)| (f.id.to_string(), t)).collect()
    }
}

// ---------------------------------------------------------------------------
// Document form.

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub id: Id,
    pub v: [usize; 2],
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceRecord {
    pub id: Id,
    pub boundary: Vec<(Id, Orientation)>,
}

/// Serialized graph, optionally carrying targets keyed by face id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub vertices: usize,
    pub edges: Vec<EdgeRecord>,
    pub faces: Vec<FaceRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<BTreeMap<String, f64>>,
}

impl GraphDocument {
    pub fn into_graph(self, options: ValidationOptions) -> Result<WeightedCellGraph, GraphError> {
        let index: HashMap<&Id, usize> = self.edges.iter().enumerate().map(|(i, e)| (&e.id, i)).collect();
        let mut faces = Vec::with_capacity(self.faces.len());
        for f in &self.faces {
            let mut sides = Vec::with_capacity(f.boundary.len());
            for (eid, o) in &f.boundary {
                let edge = *index
                    .get(eid)
                    .ok_or_else(|| GraphError::UnknownEdge { face: f.id.clone(), edge: eid.clone() })?;
                sides.push(Side { edge, orientation: *o });
            }
            faces.push((f.id.clone(), sides));
        }
        let edges = self
            .edges
            .into_iter()
            .map(|e| Edge { id: e.id, endpoints: e.v, theta: e.theta })
            .collect();
        WeightedCellGraph::new(self.vertices, edges, faces, options)
    }

    /// Canonical document for a graph.
    pub fn from_graph(graph: &WeightedCellGraph, targets: Option<&CurvatureTarget>) -> Self {
        GraphDocument {
            vertices: graph.num_vertices(),
            edges: graph
                .edges()
                .iter()
                .map(|e| EdgeRecord { id: e.id.clone(), v: e.endpoints, theta: e.theta })
                .collect(),
            faces: graph
                .faces()
                .iter()
                .map(|f| FaceRecord {
                    id: f.id.clone(),
                    boundary: f.boundary.iter().map(|s| (graph.edges()[s.edge].id.clone(), s.orientation)).collect(),
                })
                .collect(),
            targets: targets.map(|t| t.to_map(graph)),
        }
    }
}

/// Parses and validates a graph document with default options. Inline
/// targets, if any, are ignored; see [`parse_document`].
pub fn parse_graph(text: &str) -> Result<WeightedCellGraph, GraphError> {
    parse_document(text, ValidationOptions::default()).map(|(g, _)| g)
}

/// Parses a graph document and its optional inline targets.
pub fn parse_document(
    text: &str,
    options: ValidationOptions,
) -> Result<(WeightedCellGraph, Option<CurvatureTarget>), GraphError> {
    let doc: GraphDocument = serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))?;
    let targets = doc.targets.clone();
    let graph = doc.into_graph(options)?;
    let targets = targets.map(|m| CurvatureTarget::from_map(&graph, &m)).transpose()?;
    Ok((graph, targets))
}

/// Parses a standalone targets object `{face_id: T_f, ...}`.
pub fn parse_targets(text: &str, graph: &WeightedCellGraph) -> Result<CurvatureTarget, GraphError> {
    let map: BTreeMap<String, f64> = serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))?;
    CurvatureTarget::from_map(graph, &map)
}

pub fn to_json(graph: &WeightedCellGraph, targets: Option<&CurvatureTarget>) -> String {
    serde_json::to_string_pretty(&GraphDocument::from_graph(graph, targets)).expect("graph document serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    const DIGON: &str = r#"{
        "vertices": 2,
        "edges": [{"id": 0, "v": [0, 1], "theta": 1.5707963267948966},
                  {"id": 1, "v": [0, 1], "theta": 1.5707963267948966}],
        "faces": [{"id": "f0", "boundary": [[0, "+"], [1, "+"]]},
                  {"id": "f1", "boundary": [[0, "-"], [1, "-"]]}]
    }"#;

    const LOOP_FACE: &str = r#"{
        "vertices": 1,
        "edges": [{"id": "e", "v": [0, 0], "theta": 1.5707963267948966}],
        "faces": [{"id": "f", "boundary": [["e", "+"], ["e", "-"]]}]
    }"#;

    #[test]
    fn digon_sphere() {
        let g = parse_graph(DIGON).unwrap();
        assert_eq!(g.euler_characteristic(), 2);
        let sides = g.oriented_edges();
        assert_eq!(sides.len(), 4);
        let faces: Vec<_> = sides.iter().map(|s| g.faces()[s.face].id.to_string()).collect();
        assert_eq!(faces, ["f0", "f1", "f0", "f1"]);
        for a in g.vertex_cone_angles() {
            assert!((a - PI).abs() < 1e-15);
        }
    }

    #[test]
    fn loop_face_accepted_by_default() {
        let g = parse_graph(LOOP_FACE).unwrap();
        assert_eq!(g.euler_characteristic(), 1);
        let sides = g.oriented_edges();
        assert_eq!(sides.len(), 2);
        assert_eq!(sides[0].face, sides[1].face);
        assert_eq!(g.vertex_degrees(), vec![2]);
        assert!((g.vertex_cone_angles()[0] - PI).abs() < 1e-15);

        let strict = ValidationOptions { closed_orientable: true, ..Default::default() };
        assert_eq!(parse_document(LOOP_FACE, strict).unwrap_err(), GraphError::EulerCharacteristic(1));
    }

    #[test]
    fn duplicated_side_rejected() {
        let doc = DIGON.replace(r#"[[0, "-"], [1, "-"]]"#, r#"[[0, "+"], [1, "-"]]"#);
        match parse_graph(&doc) {
            Err(GraphError::SideCount { count, .. }) => assert!(count == 2 || count == 0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn open_walk_rejected() {
        let doc = r#"{"vertices": 3,
            "edges": [{"id": 0, "v": [0, 1], "theta": 1.0}, {"id": 1, "v": [1, 2], "theta": 1.0}],
            "faces": [{"id": 0, "boundary": [[0, "+"], [1, "+"], [0, "-"], [1, "-"]]}]}"#;
        // 0-1, 1-2, 2-? : the third side starts at 2 but edge 0 does not touch it
        assert_eq!(parse_graph(doc).unwrap_err(), GraphError::OpenWalk(Id::Num(0)));
        let lax = ValidationOptions { strict_walks: false, ..Default::default() };
        assert!(parse_document(doc, lax).is_ok());
    }

    #[test]
    fn other_validation_errors() {
        let bad_theta = DIGON.replacen("1.5707963267948966", "1.6", 1);
        assert!(matches!(parse_graph(&bad_theta), Err(GraphError::ThetaOutOfRange { .. })));
        let zero_theta = DIGON.replacen("1.5707963267948966", "0", 1);
        assert!(matches!(parse_graph(&zero_theta), Err(GraphError::ThetaOutOfRange { .. })));
        let bad_vertex = DIGON.replacen("[0, 1]", "[0, 5]", 1);
        assert!(matches!(parse_graph(&bad_vertex), Err(GraphError::VertexOutOfRange { .. })));
        let unknown = DIGON.replacen(r#"[1, "+"]"#, r#"[7, "+"]"#, 1);
        assert!(matches!(parse_graph(&unknown), Err(GraphError::UnknownEdge { .. })));
        assert!(matches!(parse_graph("{\"vertices\": 1"), Err(GraphError::Parse(_))));
        let dup = DIGON.replace(r#""id": "f1""#, r#""id": "f0""#);
        assert!(matches!(parse_graph(&dup), Err(GraphError::DuplicateId { .. })));
    }

    #[test]
    fn disconnected_rejected() {
        let doc = r#"{"vertices": 3,
            "edges": [{"id": "a", "v": [0, 0], "theta": 1.0}, {"id": "b", "v": [2, 2], "theta": 1.0}],
            "faces": [{"id": 0, "boundary": [["a", "+"], ["a", "-"]]},
                      {"id": 1, "boundary": [["b", "+"], ["b", "-"]]}]}"#;
        assert_eq!(parse_graph(doc).unwrap_err(), GraphError::Disconnected(1));
    }

    #[test]
    fn walk_corners() {
        let g = parse_graph(DIGON).unwrap();
        let f0 = &g.faces()[0];
        assert_eq!(f0.corners, vec![0, 1]);
        assert_eq!(f0.end_corner(0), 1);
        assert_eq!(f0.end_corner(1), 0);
    }

    #[test]
    fn targets_by_face_id() {
        let doc = DIGON.trim_end().trim_end_matches('}').to_owned() + r#", "targets": {"f0": 1.0, "f1": 2.0}}"#;
        let (g, t) = parse_document(&doc, ValidationOptions::default()).unwrap();
        assert_eq!(t.unwrap().values(), &[1.0, 2.0]);
        assert!(parse_targets(r#"{"f0": 1.0}"#, &g).is_err());
        assert!(parse_targets(r#"{"f0": 1.0, "f1": -2.0}"#, &g).is_err());
        assert!(parse_targets(r#"{"f0": 1.0, "f1": 2.0, "f2": 1.0}"#, &g).is_err());
    }

    #[test]
    fn canonical_round_trip() {
        for text in [DIGON, LOOP_FACE] {
            let g = parse_graph(text).unwrap();
            let again = parse_graph(&to_json(&g, None)).unwrap();
            assert_eq!(g, again);
            assert_eq!(to_json(&g, None), to_json(&again, None));
        }
    }
}
