//! Small reference graphs and a random cellulation generator.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;

use crate::cellgraph::{Edge, Id, Side, ValidationOptions, WeightedCellGraph};

fn build(num_vertices: usize, edges: Vec<([usize; 2], f64)>, faces: Vec<Vec<Side>>) -> WeightedCellGraph {
    let edges = edges
        .into_iter()
        .enumerate()
        .map(|(i, (endpoints, theta))| Edge { id: Id::Name(format!("e{i}")), endpoints, theta })
        .collect();
    let faces = faces.into_iter().enumerate().map(|(i, b)| (Id::Name(format!("f{i}")), b)).collect();
    WeightedCellGraph::new(num_vertices, edges, faces, ValidationOptions::default())
        .expect("sample graph is valid")
}

/// Two vertices joined by two edges; two faces. `chi = 2`.
pub fn digon_sphere(theta: f64) -> WeightedCellGraph {
    build(
        2,
        vec![([0, 1], theta), ([0, 1], theta)],
        vec![vec![Side::plus(0), Side::plus(1)], vec![Side::minus(0), Side::minus(1)]],
    )
}

/// One vertex, one loop, one face bounded by both sides of the loop.
pub fn loop_face(theta: f64) -> WeightedCellGraph {
    build(1, vec![([0, 0], theta)], vec![vec![Side::plus(0), Side::minus(0)]])
}

/// Boundary of a tetrahedron: 4 vertices, 6 edges, 4 triangles.
pub fn tetrahedron(theta: f64) -> WeightedCellGraph {
    // edges: 0:01 1:02 2:03 3:12 4:13 5:23
    let pairs = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];
    let faces = vec![
        vec![Side::plus(0), Side::plus(3), Side::minus(1)],  // 0 1 2
        vec![Side::plus(1), Side::plus(5), Side::minus(2)],  // 0 2 3
        vec![Side::plus(2), Side::minus(4), Side::minus(0)], // 0 3 1
        vec![Side::plus(4), Side::minus(5), Side::minus(3)], // 1 3 2
    ];
    build(4, pairs.iter().map(|&p| (p, theta)).collect(), faces)
}

/// One vertex, two loops, one square face `a b a^-1 b^-1`. `chi = 0`.
pub fn one_vertex_torus(theta: f64) -> WeightedCellGraph {
    build(
        1,
        vec![([0, 0], theta), ([0, 0], theta)],
        vec![vec![Side::plus(0), Side::plus(1), Side::minus(0), Side::minus(1)]],
    )
}

/// The four fixed examples with right-angle weights.
pub fn standard_graphs() -> Vec<(&'static str, WeightedCellGraph)> {
    vec![
        ("digon_sphere", digon_sphere(FRAC_PI_2)),
        ("loop_face", loop_face(FRAC_PI_2)),
        ("tetrahedron", tetrahedron(FRAC_PI_2)),
        ("one_vertex_torus", one_vertex_torus(FRAC_PI_2)),
    ]
}

struct Draft {
    vertices: usize,
    edges: Vec<([usize; 2], f64)>,
    faces: Vec<Vec<Side>>,
}

impl Draft {
    fn from_graph(g: &WeightedCellGraph) -> Self {
        Draft {
            vertices: g.num_vertices(),
            edges: g.edges().iter().map(|e| (e.endpoints, e.theta)).collect(),
            faces: g.faces().iter().map(|f| f.boundary.clone()).collect(),
        }
    }

    fn graph(self) -> WeightedCellGraph {
        build(self.vertices, self.edges, self.faces)
    }
}

/// Grows a random cellulation with at most `max_faces` faces from one of the
/// standard seeds by edge subdivision, face splitting and pendant edges.
/// Every move keeps the surface and its euler characteristic.
pub fn random_cellulation<R: Rng + ?Sized>(rng: &mut R, max_faces: usize, moves: usize) -> WeightedCellGraph {
    let theta = |rng: &mut R| rng.gen_range(0.2..=1.0) * FRAC_PI_2;
    let seed = match rng.gen_range(0..4) {
        0 => digon_sphere(theta(rng)),
        1 => loop_face(theta(rng)),
        2 => tetrahedron(theta(rng)),
        _ => one_vertex_torus(theta(rng)),
    };
    let mut g = seed;
    for _ in 0..moves {
        let mut d = Draft::from_graph(&g);
        let can_split = g.num_faces() < max_faces;
        match rng.gen_range(0..3) {
            0 => {
                let e = rng.gen_range(0..g.num_edges());
                let [a, b] = g.edges()[e].endpoints;
                if a == b {
                    continue;
                }
                let w = d.vertices;
                d.vertices += 1;
                d.edges[e].0 = [a, w];
                let new = d.edges.len();
                d.edges.push(([w, b], theta(rng)));
                // splice e' in after or before e depending on walk direction
                for (fi, face) in g.faces().iter().enumerate() {
                    let mut walk = Vec::with_capacity(face.boundary.len() + 1);
                    for (i, s) in face.boundary.iter().enumerate() {
                        if s.edge != e {
                            walk.push(*s);
                            continue;
                        }
                        let twin = Side { edge: new, orientation: s.orientation };
                        if face.corners[i] == a {
                            walk.extend([*s, twin]);
                        } else {
                            walk.extend([twin, *s]);
                        }
                    }
                    d.faces[fi] = walk;
                }
            }
            1 if can_split => {
                let fi = rng.gen_range(0..g.num_faces());
                let face = &g.faces()[fi];
                let n = face.boundary.len();
                let i = rng.gen_range(0..n);
                let j = rng.gen_range(0..n);
                let (i, j) = (i.min(j), i.max(j));
                let new = d.edges.len();
                d.edges.push(([face.corners[i], face.corners[j]], theta(rng)));
                // part one runs i..j and closes along the new edge from j back to i
                let mut one: Vec<Side> = face.boundary[i..j].to_vec();
                one.push(Side::minus(new));
                let mut two: Vec<Side> = face.boundary[j..].to_vec();
                two.extend_from_slice(&face.boundary[..i]);
                two.push(Side::plus(new));
                d.faces[fi] = one;
                d.faces.push(two);
            }
            _ => {
                let fi = rng.gen_range(0..g.num_faces());
                let face = &g.faces()[fi];
                let i = rng.gen_range(0..face.boundary.len());
                let w = d.vertices;
                d.vertices += 1;
                let new = d.edges.len();
                d.edges.push(([face.corners[i], w], theta(rng)));
                let mut walk = face.boundary[..i].to_vec();
                walk.extend([Side::plus(new), Side::minus(new)]);
                walk.extend_from_slice(&face.boundary[i..]);
                d.faces[fi] = walk;
            }
        }
        g = d.graph();
    }
    g
}
