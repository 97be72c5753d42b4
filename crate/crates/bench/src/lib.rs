//! Workloads for the solver benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sphpat::samples::random_cellulation;
use sphpat::{CurvatureTarget, WeightedCellGraph};

/// A random cellulation with at most `max_faces` faces and targets taken from
/// a random coherent system, so the instance is feasible.
pub fn workload(seed: u64, max_faces: usize, moves: usize) -> (WeightedCellGraph, CurvatureTarget) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_cellulation(&mut rng, max_faces, moves);
    let mut values = vec![0.0; g.num_faces()];
    for (e, edge) in g.edges().iter().enumerate() {
        let (mut u, mut v): (f64, f64) = (rng.gen_range(0.001..1.0), rng.gen_range(0.001..1.0));
        if u + v > 1.0 {
            (u, v) = (1.0 - v, 1.0 - u);
        }
        let (fp, fm) = g.edge_faces(e);
        values[fp] += 1.8 * edge.theta * u;
        values[fm] += 1.8 * edge.theta * v;
    }
    let t = CurvatureTarget::new(&g, values).expect("positive targets");
    (g, t)
}
