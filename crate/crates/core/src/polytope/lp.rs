//! Dense two-phase tableau simplex for the small systems met here (a few
//! dozen variables, a few hundred rows).
//!
//! Free variables are split into positive and negative parts. Pricing is
//! Dantzig's rule, switching to Bland's rule after a run of degenerate
//! pivots so the method cannot cycle.

use super::{Relation, Row};
use crate::error::{Error, Result};

const COST_TOL: f64 = 1e-11;
const PIVOT_TOL: f64 = 1e-11;
/// Phase-one residual above which the system is declared infeasible.
const FEASIBILITY_TOL: f64 = 1e-9;
const DEGENERATE_STREAK: usize = 50;
const MAX_PIVOTS: usize = 50_000;

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { value: f64, point: Vec<f64> },
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// Row-major, `width = cols + 1`, right-hand side last.
    cells: Vec<f64>,
    rows: usize,
    cols: usize,
    basis: Vec<usize>,
    /// Columns that may never enter (artificials in phase two).
    barred: Vec<bool>,
}

impl Tableau {
    fn width(&self) -> usize {
        self.cols + 1
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.width() + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.cols)
    }

    fn pivot(&mut self, r: usize, c: usize, reduced: &mut [f64]) {
        let w = self.width();
        let p = self.cells[r * w + c];
        for j in 0..w {
            self.cells[r * w + j] /= p;
        }
        let (before, rest) = self.cells.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        let eliminate = |row: &mut [f64]| {
            let f = row[c];
            if f != 0.0 {
                for (x, &y) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * y;
                }
                row[c] = 0.0;
            }
        };
        before.chunks_mut(w).for_each(&eliminate);
        after.chunks_mut(w).for_each(&eliminate);
        let f = reduced[c];
        if f != 0.0 {
            for (x, &y) in reduced.iter_mut().zip(prow.iter()).take(self.cols) {
                *x -= f * y;
            }
            reduced[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Reduced costs `c_j - c_B B^-1 A_j` for a maximization objective.
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for i in 0..self.rows {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (j, dj) in d.iter_mut().enumerate() {
                    *dj -= cb * self.at(i, j);
                }
            }
        }
        d
    }

    /// Runs primal simplex to optimality; returns false when unbounded.
    fn optimize(&mut self, cost: &[f64]) -> Result<bool> {
        let mut reduced = self.reduced_costs(cost);
        let mut degenerate = 0usize;
        for _ in 0..MAX_PIVOTS {
            let bland = degenerate >= DEGENERATE_STREAK;
            let mut entering = None;
            let mut best = COST_TOL;
            for (j, (&r, &barred)) in reduced.iter().zip(&self.barred).enumerate().take(self.cols) {
                if barred || r <= COST_TOL {
                    continue;
                }
                if bland {
                    entering = Some(j);
                    break;
                }
                if r > best {
                    best = r;
                    entering = Some(j);
                }
            }
            let Some(c) = entering else {
                return Ok(true);
            };
            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, c);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                leaving = match leaving {
                    None => Some((i, ratio)),
                    Some((k, best)) => {
                        if ratio < best - 1e-12
                            || (ratio <= best + 1e-12 && self.basis[i] < self.basis[k])
                        {
                            Some((i, ratio))
                        } else {
                            Some((k, best))
                        }
                    }
                };
            }
            let Some((r, ratio)) = leaving else {
                return Ok(false);
            };
            degenerate = if ratio <= 1e-12 { degenerate + 1 } else { 0 };
            self.pivot(r, c, &mut reduced);
        }
        Err(Error::Numerical("simplex exceeded its pivot budget".into()))
    }
}

/// Maximizes `objective . x` over `rows`, with every variable free.
pub(crate) fn maximize(objective: &[f64], rows: &[Row]) -> Result<LpOutcome> {
    let n = objective.len();
    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.rel == Relation::Le).count();
    let needs_art = |r: &Row| r.rel == Relation::Eq || r.rhs < 0.0;
    let n_art = rows.iter().filter(|r| needs_art(r)).count();
    let cols = 2 * n + n_slack + n_art;
    let width = cols + 1;

    let mut cells = vec![0.0; m * width];
    let mut basis = vec![0; m];
    let mut is_art = vec![false; cols];
    let (mut slack, mut art) = (2 * n, 2 * n + n_slack);
    for (i, row) in rows.iter().enumerate() {
        let sign = if row.rhs < 0.0 { -1.0 } else { 1.0 };
        let line = &mut cells[i * width..(i + 1) * width];
        for (j, &a) in row.coeffs.iter().enumerate() {
            line[j] = sign * a;
            line[n + j] = -sign * a;
        }
        line[cols] = sign * row.rhs;
        if row.rel == Relation::Le {
            line[slack] = sign;
            if sign > 0.0 {
                basis[i] = slack;
            }
            slack += 1;
        }
        if needs_art(row) {
            line[art] = 1.0;
            basis[i] = art;
            is_art[art] = true;
            art += 1;
        }
    }
    let mut t = Tableau { cells, rows: m, cols, basis, barred: vec![false; cols] };

    if n_art > 0 {
        let cost: Vec<f64> = is_art.iter().map(|&a| if a { -1.0 } else { 0.0 }).collect();
        t.optimize(&cost)?;
        let residual: f64 = (0..m).filter(|&i| is_art[t.basis[i]]).map(|i| t.rhs(i)).sum();
        if residual > FEASIBILITY_TOL {
            return Ok(LpOutcome::Infeasible);
        }
        // Drive zero-level artificials out of the basis; rows where that is
        // impossible are linear combinations of the others and are dropped.
        let mut dead = Vec::new();
        for i in 0..m {
            if !is_art[t.basis[i]] {
                continue;
            }
            let replacement = (0..cols)
                .filter(|&j| !is_art[j])
                .max_by(|&a, &b| t.at(i, a).abs().total_cmp(&t.at(i, b).abs()))
                .filter(|&j| t.at(i, j).abs() > PIVOT_TOL);
            match replacement {
                Some(j) => {
                    let mut scratch = vec![0.0; cols];
                    t.pivot(i, j, &mut scratch);
                }
                None => dead.push(i),
            }
        }
        if !dead.is_empty() {
            let keep: Vec<usize> = (0..m).filter(|i| !dead.contains(i)).collect();
            let mut cells = Vec::with_capacity(keep.len() * width);
            for &i in &keep {
                cells.extend_from_slice(&t.cells[i * width..(i + 1) * width]);
            }
            t.basis = keep.iter().map(|&i| t.basis[i]).collect();
            t.cells = cells;
            t.rows = keep.len();
        }
        t.barred = is_art;
    }

    let mut cost = vec![0.0; cols];
    for (j, &c) in objective.iter().enumerate() {
        cost[j] = c;
        cost[n + j] = -c;
    }
    if !t.optimize(&cost)? {
        return Ok(LpOutcome::Unbounded);
    }
    let mut point = vec![0.0; n];
    for i in 0..t.rows {
        let b = t.basis[i];
        if b < n {
            point[b] += t.rhs(i);
        } else if b < 2 * n {
            point[b - n] -= t.rhs(i);
        }
    }
    let value = objective.iter().zip(&point).map(|(c, x)| c * x).sum();
    Ok(LpOutcome::Optimal { value, point })
}
