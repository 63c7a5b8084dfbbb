//! Jointly Gaussian variable systems with closed-form conditional mutual
//! information.
//!
//! Conditional covariances are formed by sequential Schur complements (a
//! pivoted Cholesky sweep). A variable whose conditional variance collapses
//! below [`DEGENERATE_TOL`] relative to its own variance is treated as a
//! deterministic function of what precedes it and dropped from the
//! log-determinant, which is what makes constant variables (e.g. a
//! compression output that carries nothing) evaluate to zero information.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::prob::{clamp_mi, MiAtom, VariableId};

pub const SYMMETRY_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-9;
/// Relative conditional variance below which a variable counts as determined.
pub const DEGENERATE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianSystem {
    vars: Vec<VariableId>,
    cov: DMatrix<f64>,
}

impl Default for GaussianSystem {
    fn default() -> Self {
        Self::empty()
    }
}

impl GaussianSystem {
    pub fn empty() -> Self {
        GaussianSystem { vars: Vec::new(), cov: DMatrix::zeros(0, 0) }
    }

    pub fn new(vars: Vec<VariableId>, cov: DMatrix<f64>) -> Result<Self> {
        let n = vars.len();
        if cov.nrows() != n || cov.ncols() != n {
            return Err(domain(format!(
                "covariance is {}x{} for {n} variables",
                cov.nrows(),
                cov.ncols()
            )));
        }
        if vars.iter().collect::<BTreeSet<_>>().len() != n {
            return Err(domain("duplicate variable names in Gaussian system"));
        }
        if cov.iter().any(|x| !x.is_finite()) {
            return Err(domain("covariance has non-finite entries"));
        }
        for i in 0..n {
            for j in 0..i {
                if (cov[(i, j)] - cov[(j, i)]).abs() > SYMMETRY_TOL {
                    return Err(domain(format!("covariance is not symmetric at ({i},{j})")));
                }
            }
        }
        if n > 0 {
            let min_eig = SymmetricEigen::new(cov.clone()).eigenvalues.min();
            if min_eig < -PSD_TOL {
                return Err(domain(format!(
                    "covariance is not positive semidefinite (min eigenvalue {min_eig})"
                )));
            }
        }
        Ok(GaussianSystem { vars, cov })
    }

    pub fn variables(&self) -> &[VariableId] {
        &self.vars
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn position(&self, v: &VariableId) -> Result<usize> {
        self.vars
            .iter()
            .position(|x| x == v)
            .ok_or_else(|| Error::UnknownVariable(v.to_string()))
    }

    pub fn cov(&self, a: &str, b: &str) -> Result<f64> {
        let i = self.position(&a.into())?;
        let j = self.position(&b.into())?;
        Ok(self.cov[(i, j)])
    }

    /// Adds `new = sum_i coeffs[i].1 * coeffs[i].0 + N(0, noise_var)` with the
    /// noise independent of everything already in the system.
    pub fn extend_linear(
        &self,
        new: impl Into<VariableId>,
        coeffs: &[(&str, f64)],
        noise_var: f64,
    ) -> Result<Self> {
        let new = new.into();
        if !(noise_var >= 0.0 && noise_var.is_finite()) {
            return Err(domain(format!("noise variance {noise_var} must be finite and >= 0")));
        }
        if self.vars.contains(&new) {
            return Err(domain(format!("variable `{new}` already exists")));
        }
        let n = self.vars.len();
        let mut weights = vec![0.0; n];
        for &(name, c) in coeffs {
            if !c.is_finite() {
                return Err(domain(format!("coefficient of `{name}` is not finite")));
            }
            weights[self.position(&name.into())?] += c;
        }
        let mut cov = self.cov.clone().resize(n + 1, n + 1, 0.0);
        let mut var = noise_var;
        for j in 0..n {
            let c: f64 = (0..n).map(|i| weights[i] * self.cov[(i, j)]).sum();
            cov[(n, j)] = c;
            cov[(j, n)] = c;
            var += weights[j] * c;
        }
        cov[(n, n)] = var.max(0.0);
        let mut vars = self.vars.clone();
        vars.push(new);
        Ok(GaussianSystem { vars, cov })
    }

    /// Adds a variable independent of the rest of the system.
    pub fn add_independent(&self, new: impl Into<VariableId>, variance: f64) -> Result<Self> {
        self.extend_linear(new, &[], variance)
    }

    /// Conditional variances obtained by conditioning each variable of
    /// `order` on all earlier ones; `None` marks a determined variable.
    fn sequential_pivots(&self, order: &[usize]) -> Vec<Option<f64>> {
        let n = order.len();
        let mut m = DMatrix::from_fn(n, n, |i, j| self.cov[(order[i], order[j])]);
        let mut pivots = Vec::with_capacity(n);
        for k in 0..n {
            let scale = self.cov[(order[k], order[k])];
            let pivot = m[(k, k)];
            if scale < DEGENERATE_TOL || pivot <= DEGENERATE_TOL * scale {
                pivots.push(None);
                continue;
            }
            pivots.push(Some(pivot));
            for i in k + 1..n {
                let f = m[(i, k)] / pivot;
                if f == 0.0 {
                    continue;
                }
                for j in k + 1..n {
                    m[(i, j)] -= f * m[(k, j)];
                }
            }
        }
        pivots
    }

    fn indices(&self, set: &BTreeSet<VariableId>) -> Result<Vec<usize>> {
        set.iter().map(|v| self.position(v)).collect()
    }

    /// Natural-log determinant of `Cov(targets | cond)` restricted to its
    /// non-degenerate part, plus the degeneracy flags of the targets.
    fn cond_log_det(&self, cond: &[usize], targets: &[usize]) -> (f64, Vec<bool>) {
        let order: Vec<usize> = cond.iter().chain(targets).copied().collect();
        let pivots = self.sequential_pivots(&order);
        let tail = &pivots[cond.len()..];
        let log_det = tail.iter().flatten().map(|p| p.ln()).sum();
        (log_det, tail.iter().map(Option::is_none).collect())
    }

    /// `I(A;B|C) = 0.5 log2( det S_{A|C} det S_{B|C} / det S_{AB|C} )` in bits.
    pub fn gaussian_cond_mi(&self, atom: &MiAtom) -> Result<f64> {
        let a = self.indices(atom.left())?;
        let b = self.indices(atom.right())?;
        let c = self.indices(atom.cond())?;
        let (ld_a, _) = self.cond_log_det(&c, &a);
        let (ld_b, deg_b) = self.cond_log_det(&c, &b);
        let ab: Vec<usize> = a.iter().chain(&b).copied().collect();
        let (ld_ab, deg_ab) = self.cond_log_det(&c, &ab);
        // A part of B that is free given C but pinned down once A is known
        // would carry unbounded information.
        for (k, free_given_c) in deg_b.iter().map(|d| !d).enumerate() {
            if free_given_c && deg_ab[a.len() + k] {
                return Err(Error::Numerical(format!(
                    "{atom}: conditional covariance is singular (condition number above {:e})",
                    1.0 / DEGENERATE_TOL
                )));
            }
        }
        let value = 0.5 * (ld_a + ld_b - ld_ab) / std::f64::consts::LN_2;
        clamp_mi(value, atom)
    }
}

/// Gains, powers and feedback rates of the Gaussian relay broadcast channel
///
/// `Y1 = g01 X + Z1`, `Y2 = g02 X + g12 X1 + Z2` with unit-variance noise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianRbcParams {
    pub g01: f64,
    pub g02: f64,
    pub g12: f64,
    /// Transmitter power.
    pub p: f64,
    /// Relay (receiver 1) power.
    pub p1: f64,
    #[serde(with = "crate::region::rate_serde")]
    pub rfb1: f64,
    #[serde(with = "crate::region::rate_serde")]
    pub rfb2: f64,
}

impl GaussianRbcParams {
    /// Gains from the relay position `d` on the line between transmitter and
    /// receiver 2: `g01 = 1/d`, `g02 = 1`, `g12 = 1/|1-d|`. Feedback is
    /// unlimited.
    pub fn from_position(d: f64, p: f64, p1: f64) -> Result<Self> {
        if !d.is_finite() || d == 0.0 || d == 1.0 {
            return Err(domain(format!("d must differ from 0 and 1 (got {d})")));
        }
        let params = GaussianRbcParams {
            g01: 1.0 / d,
            g02: 1.0,
            g12: 1.0 / (1.0 - d).abs(),
            p,
            p1,
            rfb1: f64::INFINITY,
            rfb2: f64::INFINITY,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_feedback(mut self, rfb1: f64, rfb2: f64) -> Self {
        self.rfb1 = rfb1;
        self.rfb2 = rfb2;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 0.0 && self.p.is_finite() && self.p1 >= 0.0 && self.p1.is_finite()) {
            return Err(domain("powers must be finite and nonnegative"));
        }
        if [self.g01, self.g02, self.g12].iter().any(|g| !g.is_finite()) {
            return Err(domain("channel gains must be finite"));
        }
        if self.rfb1.is_nan() || self.rfb2.is_nan() || self.rfb1 < 0.0 || self.rfb2 < 0.0 {
            return Err(domain("feedback rates must be nonnegative"));
        }
        Ok(())
    }
}
