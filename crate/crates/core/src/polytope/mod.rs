//! Linear inequality systems over named rate variables.
//!
//! Rows are stored as `coeffs . x (<= | =) rhs` with finite right-hand sides.
//! All operations return new systems in canonical form: each row scaled so
//! that its largest coefficient magnitude is one, rows sorted
//! lexicographically and exact duplicates dropped. Canonical order makes
//! every result independent of how it was computed.

mod compare;
mod fme;
mod lp;
mod vertices;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

pub use compare::{
    contained_in, polytopes_equal, search_directions, Comparison, Containment, Verdict,
};
pub use lp::LpOutcome;
pub use vertices::VertexSet;

/// Magnitude below which a coefficient is treated as zero.
pub const COEF_TOL: f64 = 1e-9;
/// Slack allowed when certifying that a row is implied by the others.
pub const REDUNDANCY_TOL: f64 = 1e-9;

/// Name of a rate variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RateVar(String);

impl RateVar {
    pub fn new(name: impl Into<String>) -> Self {
        RateVar(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for RateVar {
    fn from(name: &str) -> Self {
        RateVar(name.to_owned())
    }
}

impl fmt::Display for RateVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Rate variables of the coding schemes.
pub mod rate_names {
    pub const R0: &str = "R0";
    pub const R1: &str = "R1";
    pub const R2: &str = "R2";
    /// Common part of message 1.
    pub const RC1: &str = "Rc1";
    pub const RC2: &str = "Rc2";
    /// Private part of message 1.
    pub const RP1: &str = "Rp1";
    pub const RP2: &str = "Rp2";
    /// Marton binning rate of satellite 1.
    pub const RPR1: &str = "Rpr1";
    pub const RPR2: &str = "Rpr2";
    /// Feedback (compression index) rate of receiver 1.
    pub const RH1: &str = "Rh1";
    pub const RH2: &str = "Rh2";
    /// Extra compression binning rate of receiver 1.
    pub const RT1: &str = "Rt1";
    pub const RT2: &str = "Rt2";
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub rel: Relation,
    pub rhs: f64,
}

impl Row {
    pub fn le(coeffs: Vec<f64>, rhs: f64) -> Self {
        Row { coeffs, rel: Relation::Le, rhs }
    }

    pub fn eq(coeffs: Vec<f64>, rhs: f64) -> Self {
        Row { coeffs, rel: Relation::Eq, rhs }
    }

    pub fn lhs(&self, point: &[f64]) -> f64 {
        self.coeffs.iter().zip(point).map(|(a, x)| a * x).sum()
    }

    /// Amount by which `point` violates the row (zero or negative if it holds).
    pub fn violation(&self, point: &[f64]) -> f64 {
        let gap = self.lhs(point) - self.rhs;
        match self.rel {
            Relation::Le => gap,
            Relation::Eq => gap.abs(),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().all(|c| c.abs() <= COEF_TOL)
    }

    fn cmp_canonical(&self, other: &Row) -> Ordering {
        self.rel
            .cmp(&other.rel)
            .then_with(|| {
                self.coeffs
                    .iter()
                    .zip(&other.coeffs)
                    .map(|(a, b)| a.total_cmp(b))
                    .find(|o| o.is_ne())
                    .unwrap_or(Ordering::Equal)
            })
            .then_with(|| self.rhs.total_cmp(&other.rhs))
    }

    /// Scales to unit max-magnitude coefficient and zeroes tiny coefficients.
    /// Equalities additionally get a positive leading coefficient.
    fn normalized(mut self) -> Row {
        for c in &mut self.coeffs {
            if c.abs() <= COEF_TOL {
                *c = 0.0;
            }
        }
        let scale = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if scale == 0.0 {
            return self;
        }
        let sign = match self.rel {
            Relation::Eq if self.coeffs.iter().find(|c| **c != 0.0).is_some_and(|c| *c < 0.0) => -1.0,
            _ => 1.0,
        };
        let f = sign / scale;
        for c in &mut self.coeffs {
            *c *= f;
            if *c == 0.0 {
                *c = 0.0; // no negative zeros in canonical output
            }
        }
        self.rhs *= f;
        self
    }
}

#[derive(Deserialize)]
struct RawSystem {
    variables: Vec<RateVar>,
    rows: Vec<Row>,
}

impl TryFrom<RawSystem> for HalfspaceSystem {
    type Error = Error;

    fn try_from(raw: RawSystem) -> Result<Self> {
        let mut sys = HalfspaceSystem::new(raw.variables)?;
        for row in raw.rows {
            sys.push(row)?;
        }
        Ok(sys)
    }
}

/// A system of linear rows over named variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSystem")]
pub struct HalfspaceSystem {
    variables: Vec<RateVar>,
    rows: Vec<Row>,
}

impl HalfspaceSystem {
    pub fn new(variables: Vec<RateVar>) -> Result<Self> {
        if variables.iter().collect::<BTreeSet<_>>().len() != variables.len() {
            return Err(domain("duplicate rate variable names"));
        }
        Ok(HalfspaceSystem { variables, rows: Vec::new() })
    }

    pub fn with_vars(names: &[&str]) -> Result<Self> {
        Self::new(names.iter().map(|n| RateVar::from(*n)).collect())
    }

    /// The empty set over the given variables, as the single row `0 <= -1`.
    pub fn infeasible(variables: Vec<RateVar>) -> Self {
        let n = variables.len();
        HalfspaceSystem { variables, rows: vec![Row::le(vec![0.0; n], -1.0)] }
    }

    pub fn vars(&self) -> &[RateVar] {
        &self.variables
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v.as_str() == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_owned()))
    }

    pub fn push(&mut self, row: Row) -> Result<()> {
        if row.coeffs.len() != self.dim() {
            return Err(domain(format!(
                "row has {} coefficients for {} variables",
                row.coeffs.len(),
                self.dim()
            )));
        }
        if !row.rhs.is_finite() || row.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(domain("rows must have finite coefficients and right-hand side"));
        }
        self.rows.push(row);
        Ok(())
    }

    fn dense(&self, terms: &[(&str, f64)]) -> Result<Vec<f64>> {
        let mut coeffs = vec![0.0; self.dim()];
        for &(name, c) in terms {
            coeffs[self.index_of(name)?] += c;
        }
        Ok(coeffs)
    }

    /// `sum terms <= rhs`.
    pub fn push_le(&mut self, terms: &[(&str, f64)], rhs: f64) -> Result<()> {
        let coeffs = self.dense(terms)?;
        self.push(Row::le(coeffs, rhs))
    }

    /// `sum terms >= rhs`, stored as `-sum terms <= -rhs`.
    pub fn push_ge(&mut self, terms: &[(&str, f64)], rhs: f64) -> Result<()> {
        let coeffs = self.dense(terms)?.into_iter().map(|c| -c).collect();
        self.push(Row::le(coeffs, -rhs))
    }

    pub fn push_eq(&mut self, terms: &[(&str, f64)], rhs: f64) -> Result<()> {
        let coeffs = self.dense(terms)?;
        self.push(Row::eq(coeffs, rhs))
    }

    /// Appends `v >= 0` for every variable.
    pub fn push_nonnegativity(&mut self) {
        for i in 0..self.dim() {
            let mut coeffs = vec![0.0; self.dim()];
            coeffs[i] = -1.0;
            self.rows.push(Row::le(coeffs, 0.0));
        }
    }

    /// Largest row violation at `point` (non-positive when feasible).
    pub fn violation(&self, point: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|r| r.violation(point))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, point: &[f64], tol: f64) -> bool {
        point.len() == self.dim() && self.rows.iter().all(|r| r.violation(point) <= tol)
    }

    /// Canonical copy: normalized rows, trivially true constant rows
    /// dropped, sorted, deduplicated.
    pub fn canonical(&self) -> Self {
        let mut rows: Vec<Row> = Vec::with_capacity(self.rows.len());
        for row in self.rows.iter().cloned().map(Row::normalized) {
            if row.is_constant() {
                let holds = match row.rel {
                    Relation::Le => row.rhs >= -COEF_TOL,
                    Relation::Eq => row.rhs.abs() <= COEF_TOL,
                };
                if holds {
                    continue;
                }
                let rhs = if row.rel == Relation::Eq { -row.rhs.abs() } else { row.rhs };
                rows.push(Row::le(row.coeffs, rhs));
            } else {
                rows.push(row);
            }
        }
        rows.sort_by(Row::cmp_canonical);
        rows.dedup_by(|a, b| a.cmp_canonical(b).is_eq());
        HalfspaceSystem { variables: self.variables.clone(), rows }
    }

    /// True when a constant row `0 <= c` with `c < 0` is present.
    pub fn has_contradiction(&self) -> bool {
        self.rows
            .iter()
            .any(|r| r.is_constant() && r.violation(&vec![0.0; r.coeffs.len()]) > COEF_TOL)
    }

    pub fn maximize(&self, objective: &[f64]) -> Result<LpOutcome> {
        lp::maximize(objective, &self.rows)
    }

    /// Whether the solution set is empty.
    pub fn is_empty(&self) -> Result<bool> {
        if self.has_contradiction() {
            return Ok(true);
        }
        Ok(matches!(self.maximize(&vec![0.0; self.dim()])?, LpOutcome::Infeasible))
    }

    pub fn feasible_point(&self) -> Result<Option<Vec<f64>>> {
        if self.has_contradiction() {
            return Ok(None);
        }
        match self.maximize(&vec![0.0; self.dim()])? {
            LpOutcome::Optimal { point, .. } => Ok(Some(point)),
            _ => Ok(None),
        }
    }

    /// Exact projection onto the remaining variables.
    pub fn fme_eliminate(&self, var: &str) -> Result<Self> {
        fme::eliminate(self, self.index_of(var)?)
    }

    /// Drops every row implied by the remaining ones.
    pub fn remove_redundant(&self) -> Result<Self> {
        fme::remove_redundant(self)
    }

    /// Eliminates `order` one variable at a time, removing redundant rows
    /// after every step.
    pub fn project_out(&self, order: &[&str]) -> Result<Self> {
        let mut sys = self.remove_redundant()?;
        for v in order {
            sys = sys.fme_eliminate(v)?.remove_redundant()?;
        }
        Ok(sys)
    }

    pub fn enumerate_vertices(&self) -> Result<VertexSet> {
        vertices::enumerate(self)
    }
}

impl fmt::Display for HalfspaceSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.rows {
            let mut first = true;
            for (c, v) in row.coeffs.iter().zip(&self.variables) {
                if *c == 0.0 {
                    continue;
                }
                let sign = if *c < 0.0 { "-" } else if first { "" } else { "+" };
                let mag = c.abs();
                if mag == 1.0 {
                    write!(f, "{sign}{v} ")?;
                } else {
                    write!(f, "{sign}{mag}*{v} ")?;
                }
                first = false;
            }
            if first {
                f.write_str("0 ")?;
            }
            let rel = match row.rel {
                Relation::Le => "<=",
                Relation::Eq => "=",
            };
            writeln!(f, "{rel} {}", row.rhs)?;
        }
        Ok(())
    }
}
