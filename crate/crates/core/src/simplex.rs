//! Dense two-phase tableau simplex. Entering columns follow Dantzig's rule;
//! after a run of degenerate pivots Bland's rule takes over until the
//! objective moves again.
//!
//! Sized for desk-scale problems (a few hundred rows); every pivot touches the
//! whole tableau.

const PIVOT_TOL: f64 = 1e-11;
const FEAS_TOL: f64 = 1e-9;
const DEGENERATE_RUN: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `maximize objective . x` subject to the constraints and `x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    /// One multiplier per constraint, in the sign convention of the original
    /// rows: `value = sum_i duals[i] * rhs[i]` at optimality.
    pub duals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram { objective: vec![0.0; num_vars], constraints: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        debug_assert_eq!(coeffs.len(), self.num_vars());
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).run(&self.objective)
    }
}

struct Tableau {
    rows: Vec<Vec<f64>>, // each row: columns then rhs
    basis: Vec<usize>,
    num_vars: usize,
    artificial_start: usize,
    num_cols: usize,
    // column that held the identity for each row initially, and whether the
    // row was negated to make its rhs non-negative
    identity_col: Vec<usize>,
    flipped: Vec<bool>,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let m = lp.constraints.len();
        let mut flipped = Vec::with_capacity(m);
        let mut normalized = Vec::with_capacity(m);
        for c in &lp.constraints {
            if c.rhs < 0.0 {
                let rel = match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                normalized.push((c.coeffs.iter().map(|v| -v).collect::<Vec<_>>(), rel, -c.rhs));
                flipped.push(true);
            } else {
                normalized.push((c.coeffs.clone(), c.relation, c.rhs));
                flipped.push(false);
            }
        }
        let num_slack = normalized.iter().filter(|r| r.1 != Relation::Eq).count();
        let num_art = normalized.iter().filter(|r| r.1 != Relation::Le).count();
        let artificial_start = n + num_slack;
        let num_cols = artificial_start + num_art;

        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut identity_col = Vec::with_capacity(m);
        let (mut next_slack, mut next_art) = (n, artificial_start);
        for (coeffs, rel, rhs) in normalized {
            let mut row = vec![0.0; num_cols + 1];
            row[..n].copy_from_slice(&coeffs);
            row[num_cols] = rhs;
            match rel {
                Relation::Le => {
                    row[next_slack] = 1.0;
                    basis.push(next_slack);
                    identity_col.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -1.0;
                    next_slack += 1;
                    row[next_art] = 1.0;
                    basis.push(next_art);
                    identity_col.push(next_art);
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = 1.0;
                    basis.push(next_art);
                    identity_col.push(next_art);
                    next_art += 1;
                }
            }
            rows.push(row);
        }
        Tableau { rows, basis, num_vars: n, artificial_start, num_cols, identity_col, flipped }
    }

    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.num_cols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let support: Vec<(usize, f64)> =
            self.rows[r].iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, v)| (j, *v)).collect();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for &(j, pv) in &support {
                    row[j] -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    fn reduced_costs(&self, costs: &[f64]) -> Vec<f64> {
        let mut red = costs.to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = costs[b];
            if cb != 0.0 {
                for (j, r) in red.iter_mut().enumerate() {
                    *r -= cb * self.rows[i][j];
                }
            }
        }
        red
    }

    /// Maximises `costs` over columns `< allowed`. Returns false if unbounded.
    fn optimize(&mut self, costs: &[f64], allowed: usize) -> bool {
        let mut degenerate = 0;
        loop {
            let red = self.reduced_costs(costs);
            let mut in_basis = vec![false; self.num_cols];
            for &b in &self.basis {
                in_basis[b] = true;
            }
            let mut candidates = (0..allowed).filter(|&j| red[j] > PIVOT_TOL && !in_basis[j]);
            let enter = if degenerate >= DEGENERATE_RUN {
                candidates.next()
            } else {
                candidates.fold(None, |best: Option<usize>, j| match best {
                    Some(b) if red[b] >= red[j] => Some(b),
                    _ => Some(j),
                })
            };
            let Some(enter) = enter else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][enter];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i) / a;
                    let better = match leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < lr - 1e-14 || (ratio <= lr + 1e-14 && self.basis[i] < self.basis[li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                Some((r, ratio)) => {
                    degenerate = if ratio * red[enter] <= 1e-14 { degenerate + 1 } else { 0 };
                    self.pivot(r, enter);
                }
                None => return false,
            }
        }
    }

    fn run(mut self, objective: &[f64]) -> LpOutcome {
        // phase one: drive the artificials to zero
        let mut phase1 = vec![0.0; self.num_cols];
        for c in phase1.iter_mut().skip(self.artificial_start) {
            *c = -1.0;
        }
        self.optimize(&phase1, self.num_cols);
        let infeasibility: f64 = self
            .basis
            .iter()
            .enumerate()
            .filter(|&(_, &b)| b >= self.artificial_start)
            .map(|(i, _)| self.rhs(i))
            .sum();
        if infeasibility > FEAS_TOL {
            return LpOutcome::Infeasible;
        }
        // pivot remaining zero-level artificials out where possible; a row
        // with no usable column is redundant and keeps its artificial at zero
        for i in 0..self.rows.len() {
            if self.basis[i] >= self.artificial_start {
                if let Some(c) = (0..self.artificial_start).find(|&j| self.rows[i][j].abs() > 1e-9) {
                    self.pivot(i, c);
                }
            }
        }

        let mut costs = vec![0.0; self.num_cols];
        costs[..self.num_vars].copy_from_slice(objective);
        if !self.optimize(&costs, self.artificial_start) {
            return LpOutcome::Unbounded;
        }

        let mut x = vec![0.0; self.num_vars];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.num_vars {
                x[b] = self.rhs(i);
            }
        }
        let value = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        // y = c_B B^-1; column i of B^-1 sits where the initial identity was
        let duals = (0..self.rows.len())
            .map(|i| {
                let col = self.identity_col[i];
                let y: f64 = self.basis.iter().enumerate().map(|(k, &b)| costs[b] * self.rows[k][col]).sum();
                if self.flipped[i] {
                    -y
                } else {
                    y
                }
            })
            .collect();
        LpOutcome::Optimal(LpSolution { x, value, duals })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optimal(lp: &LinearProgram) -> LpSolution {
        match lp.solve() {
            LpOutcome::Optimal(s) => s,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn textbook_max() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![3.0, 5.0];
        lp.add(vec![1.0, 0.0], Relation::Le, 4.0);
        lp.add(vec![0.0, 2.0], Relation::Le, 12.0);
        lp.add(vec![3.0, 2.0], Relation::Le, 18.0);
        let s = optimal(&lp);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
        assert!((s.value - 36.0).abs() < 1e-12);
        // duals (0, 3/2, 1) and strong duality
        assert!((s.duals[0]).abs() < 1e-12);
        assert!((s.duals[1] - 1.5).abs() < 1e-12);
        assert!((s.duals[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equality_and_ge_rows() {
        // max -x - y, x + y = 2, x >= 0.5, y >= 0.25  ->  value -2
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![-1.0, -1.0];
        lp.add(vec![1.0, 1.0], Relation::Eq, 2.0);
        lp.add(vec![1.0, 0.0], Relation::Ge, 0.5);
        lp.add(vec![0.0, 1.0], Relation::Ge, 0.25);
        let s = optimal(&lp);
        assert!((s.value + 2.0).abs() < 1e-12);
        let dual_value: f64 = s.duals.iter().zip([2.0, 0.5, 0.25]).map(|(y, b)| y * b).sum();
        assert!((dual_value - s.value).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_row() {
        // max x, -x >= -3  (i.e. x <= 3)
        let mut lp = LinearProgram::new(1);
        lp.objective = vec![1.0];
        lp.add(vec![-1.0], Relation::Ge, -3.0);
        let s = optimal(&lp);
        assert!((s.value - 3.0).abs() < 1e-12);
        assert!((s.duals[0] * -3.0 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.objective = vec![1.0];
        lp.add(vec![1.0], Relation::Le, 1.0);
        lp.add(vec![1.0], Relation::Ge, 2.0);
        assert_eq!(lp.solve(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::new(2);
        lp.objective = vec![1.0, 0.0];
        lp.add(vec![0.0, 1.0], Relation::Le, 1.0);
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example cycles under the textbook largest-coefficient rule
        let mut lp = LinearProgram::new(4);
        lp.objective = vec![0.75, -150.0, 0.02, -6.0];
        lp.add(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0);
        lp.add(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0);
        lp.add(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0);
        let s = optimal(&lp);
        assert!((s.value - 0.05).abs() < 1e-12);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![1.0, 2.0];
        lp.add(vec![1.0, 1.0], Relation::Eq, 1.0);
        lp.add(vec![2.0, 2.0], Relation::Eq, 2.0);
        let s = optimal(&lp);
        assert!((s.value - 2.0).abs() < 1e-12);
    }
}
