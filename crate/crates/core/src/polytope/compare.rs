//! Tolerance-based comparison of two systems over the same variables.
//!
//! `a ⊆ b` is checked three ways, stopping at the first failure: every vertex
//! of `a` must satisfy `b` (dimension at most three), the support function of
//! `a` must not exceed that of `b` on a fixed set of nonnegative directions,
//! and every row of `b` must hold over all of `a`.

use serde::{Deserialize, Serialize};

use super::lp::LpOutcome;
use super::{HalfspaceSystem, Relation, Row};
use crate::error::{domain, Result};

pub const DIRECTION_COUNT: usize = 64;
const PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Containment {
    Holds,
    /// `witness` lies in the first system and violates the second by `excess`.
    Fails { witness: Vec<f64>, excess: f64 },
}

impl Containment {
    pub fn holds(&self) -> bool {
        matches!(self, Containment::Holds)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Equal,
    ANotInB,
    BNotInA,
    Incomparable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub a_in_b: Containment,
    pub b_in_a: Containment,
}

impl Comparison {
    pub fn is_equal(&self) -> bool {
        self.a_in_b.holds() && self.b_in_a.holds()
    }

    pub fn verdict(&self) -> Verdict {
        match (self.a_in_b.holds(), self.b_in_a.holds()) {
            (true, true) => Verdict::Equal,
            (false, true) => Verdict::ANotInB,
            (true, false) => Verdict::BNotInA,
            (false, false) => Verdict::Incomparable,
        }
    }
}

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as f64;
    let mut f = 1.0 / b;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base as u64) as f64;
        i /= base as u64;
        f /= b;
    }
    r
}

/// The fixed nonnegative unit directions used for support comparisons:
/// coordinate axes, the all-ones direction, then Halton points.
pub fn search_directions(dim: usize) -> Vec<Vec<f64>> {
    if dim == 0 {
        return Vec::new();
    }
    let mut dirs = Vec::with_capacity(DIRECTION_COUNT);
    for i in 0..dim {
        let mut d = vec![0.0; dim];
        d[i] = 1.0;
        dirs.push(d);
    }
    dirs.push(vec![1.0; dim]);
    let mut k = 1u64;
    while dirs.len() < DIRECTION_COUNT {
        let d: Vec<f64> = (0..dim).map(|j| radical_inverse(k, PRIMES[j % PRIMES.len()])).collect();
        k += 1;
        if d.iter().any(|x| *x > 0.0) {
            dirs.push(d);
        }
    }
    for d in &mut dirs {
        let n = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        d.iter_mut().for_each(|x| *x /= n);
    }
    dirs
}

fn support(sys: &HalfspaceSystem, dir: &[f64]) -> Result<Option<f64>> {
    Ok(match sys.maximize(dir)? {
        LpOutcome::Optimal { value, .. } => Some(value),
        _ => None,
    })
}

fn argmax(sys: &HalfspaceSystem, dir: &[f64], cap: Option<f64>) -> Result<Vec<f64>> {
    let mut rows = sys.rows().to_vec();
    if let Some(c) = cap {
        rows.push(Row::le(dir.to_vec(), c));
    }
    match super::lp::maximize(dir, &rows)? {
        LpOutcome::Optimal { point, .. } => Ok(point),
        other => Err(crate::error::Error::Numerical(format!(
            "expected a bounded maximizer, got {other:?}"
        ))),
    }
}

fn fails(b: &HalfspaceSystem, witness: Vec<f64>) -> Containment {
    let excess = b.violation(&witness).max(0.0);
    Containment::Fails { witness, excess }
}

/// Checks `a ⊆ b` up to `tol`.
pub fn contained_in(a: &HalfspaceSystem, b: &HalfspaceSystem, tol: f64) -> Result<Containment> {
    if a.vars() != b.vars() {
        return Err(domain("compared systems must have the same variables"));
    }
    let orig = b;
    let a = a.canonical();
    let b = b.canonical();
    let Some(point) = a.feasible_point()? else {
        return Ok(Containment::Holds);
    };
    if b.is_empty()? {
        return Ok(fails(orig, point));
    }

    if a.dim() <= 3 {
        for v in a.enumerate_vertices()?.points {
            if !b.contains(&v, tol) {
                return Ok(fails(orig, v));
            }
        }
    }

    for dir in search_directions(a.dim()) {
        let hb = support(&b, &dir)?;
        match (support(&a, &dir)?, hb) {
            (_, None) => {}
            (None, Some(h)) => return Ok(fails(orig, argmax(&a, &dir, Some(h + 1.0))?)),
            (Some(ha), Some(h)) if ha > h + tol => return Ok(fails(orig, argmax(&a, &dir, None)?)),
            _ => {}
        }
    }

    for row in b.rows() {
        let mut objectives = vec![row.coeffs.clone()];
        if row.rel == Relation::Eq {
            objectives.push(row.coeffs.iter().map(|c| -c).collect());
        }
        for (k, obj) in objectives.iter().enumerate() {
            let bound = if k == 0 { row.rhs } else { -row.rhs };
            match a.maximize(obj)? {
                LpOutcome::Optimal { value, point } if value > bound + tol => {
                    return Ok(fails(orig, point));
                }
                LpOutcome::Unbounded => return Ok(fails(orig, argmax(&a, obj, Some(bound + 1.0))?)),
                _ => {}
            }
        }
    }
    Ok(Containment::Holds)
}

/// Two-sided comparison of `a` and `b`.
pub fn polytopes_equal(a: &HalfspaceSystem, b: &HalfspaceSystem, tol: f64) -> Result<Comparison> {
    Ok(Comparison { a_in_b: contained_in(a, b, tol)?, b_in_a: contained_in(b, a, tol)? })
}
