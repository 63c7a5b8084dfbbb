//! Deterministic grid search with local refinement.

use rayon::prelude::*;

/// One search coordinate. Log axes are gridded uniformly in `ln x`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub log: bool,
}

impl Axis {
    pub fn linear(lo: f64, hi: f64, points: usize) -> Self {
        Axis { lo, hi, points, log: false }
    }

    pub fn logarithmic(lo: f64, hi: f64, points: usize) -> Self {
        Axis { lo, hi, points, log: true }
    }

    fn to_t(self, x: f64) -> f64 {
        if self.log {
            x.ln()
        } else {
            x
        }
    }

    fn of_t(self, t: f64) -> f64 {
        if self.log {
            t.exp()
        } else {
            t
        }
    }

    fn step(self) -> f64 {
        if self.points < 2 {
            0.0
        } else {
            (self.to_t(self.hi) - self.to_t(self.lo)) / (self.points - 1) as f64
        }
    }

    fn coarse(self) -> Vec<f64> {
        let (t0, s) = (self.to_t(self.lo), self.step());
        (0..self.points.max(1))
            .map(|i| if i + 1 == self.points { self.hi } else { self.of_t(t0 + s * i as f64) })
            .collect()
    }

    /// `2 * half + 1` points spaced `step` apart around `center`, inside the axis range.
    fn around(self, center: f64, step: f64, half: i32) -> Vec<f64> {
        if step == 0.0 {
            return vec![center];
        }
        let (lo, hi, c) = (self.to_t(self.lo), self.to_t(self.hi), self.to_t(center));
        (-half..=half)
            .filter_map(|k| {
                if k == 0 {
                    return Some(center);
                }
                let t = c + step * k as f64;
                (t >= lo - 1e-12 && t <= hi + 1e-12).then(|| self.of_t(t.clamp(lo, hi)))
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Optimum {
    pub point: Vec<f64>,
    pub value: f64,
}

/// Evaluates `f` on the Cartesian product of `grids` and returns the
/// maximizer. Ties go to the earliest point in lexicographic grid order.
/// `f` returns `None` at infeasible points.
fn best_on_product<F>(grids: &[Vec<f64>], f: &F) -> Option<Optimum>
where
    F: Fn(&[f64]) -> Option<f64> + Sync,
{
    let total: usize = grids.iter().map(Vec::len).product();
    let point_at = |mut idx: usize| {
        let mut p = vec![0.0; grids.len()];
        for (d, g) in grids.iter().enumerate().rev() {
            p[d] = g[idx % g.len()];
            idx /= g.len();
        }
        p
    };
    let values: Vec<Option<f64>> = (0..total).into_par_iter().map(|i| f(&point_at(i))).collect();
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        let Some(v) = v.filter(|v| !v.is_nan()) else { continue };
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, value)| Optimum { point: point_at(i), value })
}

/// Coarse grid search followed by `rounds` refinements, each using a step
/// ten times smaller on a `21`-point window spanning one previous step on
/// either side of the incumbent. The incumbent is only replaced by a
/// strictly better point.
pub(crate) fn maximize<F>(axes: &[Axis], rounds: usize, f: F) -> Option<Optimum>
where
    F: Fn(&[f64]) -> Option<f64> + Sync,
{
    let coarse: Vec<Vec<f64>> = axes.iter().map(|a| a.coarse()).collect();
    let mut best = best_on_product(&coarse, &f)?;
    let mut steps: Vec<f64> = axes.iter().map(|a| a.step()).collect();
    for _ in 0..rounds {
        steps.iter_mut().for_each(|s| *s /= 10.0);
        let grids: Vec<Vec<f64>> = axes
            .iter()
            .zip(&steps)
            .zip(&best.point)
            .map(|((a, &s), &c)| a.around(c, s, 10))
            .collect();
        if let Some(cand) = best_on_product(&grids, &f) {
            if cand.value > best.value {
                best = cand;
            }
        }
    }
    Some(best)
}
