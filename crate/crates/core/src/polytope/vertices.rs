use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{HalfspaceSystem, Relation};
use crate::error::{Error, Result};

/// Feasibility slack for candidate vertices.
pub const VERTEX_TOL: f64 = 1e-9;
/// Distance under which two vertices are merged.
pub const DEDUP_TOL: f64 = 1e-8;
const MAX_DIM: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexSet {
    pub points: Vec<Vec<f64>>,
    pub tol: f64,
}

impl VertexSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Whether some vertex lies within `tol` (max-norm) of `p`.
    pub fn contains_near(&self, p: &[f64], tol: f64) -> bool {
        self.points.iter().any(|q| max_dist(p, q) <= tol)
    }
}

fn max_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Solves every `dim`-subset of rows as equalities and keeps the feasible,
/// nonsingular solutions. Equalities must be among the active rows.
pub(super) fn enumerate(sys: &HalfspaceSystem) -> Result<VertexSet> {
    let dim = sys.dim();
    if dim > MAX_DIM {
        return Err(Error::Unsupported(format!(
            "vertex enumeration supports at most {MAX_DIM} variables, got {dim}"
        )));
    }
    let sys = sys.canonical();
    let mut points: Vec<Vec<f64>> = Vec::new();
    if sys.has_contradiction() {
        return Ok(VertexSet { points, tol: VERTEX_TOL });
    }
    let rows = sys.rows();
    let eqs: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].rel == Relation::Eq).collect();
    if dim == 0 {
        return Ok(VertexSet { points: vec![Vec::new()], tol: VERTEX_TOL });
    }
    for subset in combinations(rows.len(), dim) {
        if eqs.iter().any(|e| !subset.contains(e)) {
            continue;
        }
        let a = DMatrix::from_fn(dim, dim, |i, j| rows[subset[i]].coeffs[j]);
        let b = DVector::from_iterator(dim, subset.iter().map(|&i| rows[i].rhs));
        let lu = a.lu();
        if lu.determinant().abs() < 1e-12 {
            continue;
        }
        let Some(x) = lu.solve(&b) else { continue };
        let x: Vec<f64> = x.iter().map(|v| v + 0.0).collect();
        if !sys.contains(&x, VERTEX_TOL) {
            continue;
        }
        if !points.iter().any(|q| max_dist(q, &x) <= DEDUP_TOL) {
            points.push(x);
        }
    }
    points.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(VertexSet { points, tol: VERTEX_TOL })
}
