//! Corner-point rates `R2*` (with `R0 = R1 = 0`) of the Gaussian relay
//! broadcast channel
//!
//! ```text
//! Y1 = g01 X + Z1,   Y2 = g02 X + g12 X1 + Z2,   Z1, Z2 ~ N(0, 1).
//! ```
//!
//! Inputs are jointly Gaussian: `X1 ~ N(0, P1)`, `V0 ~ N(0, gamma (1-beta) P)`,
//! `V2 ~ N(0, (1-gamma)(1-beta) P)` independent, `U0 = sqrt(beta P / P1) X1 + V0`
//! and `X = U0 + V2`, so `X` always has power `P`. The relay's compression is
//! `Yh1 = Y1 + N(0, nhat)`; `nhat = inf` makes `Yh1` a constant.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::gauss::{GaussianRbcParams, GaussianSystem};
use crate::prob::MiAtom;
use crate::region::rate_serde;
use crate::search::{self, Axis};

/// Coarse grid points per power-split axis (step 0.02).
pub const SPLIT_POINTS: usize = 51;
/// Coarse grid points of the compression-noise axis.
pub const NHAT_POINTS: usize = 40;
pub const NHAT_MIN: f64 = 1e-3;
pub const NHAT_MAX: f64 = 1e3;
pub const REFINE_ROUNDS: usize = 2;
/// Branch values closer than this are reported as both binding.
const TIE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianParamPoint {
    pub beta: f64,
    pub gamma: f64,
    /// Compression noise variance; `null` in JSON means no compression.
    #[serde(with = "rate_serde")]
    pub nhat: f64,
}

impl GaussianParamPoint {
    pub fn new(beta: f64, gamma: f64, nhat: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) || !(0.0..=1.0).contains(&gamma) {
            return Err(domain("beta and gamma must lie in [0, 1]"));
        }
        if nhat.is_nan() || nhat < 0.0 {
            return Err(domain("nhat must be nonnegative"));
        }
        Ok(GaussianParamPoint { beta, gamma, nhat })
    }

    /// Independent inputs, no relay compression.
    pub fn direct() -> Self {
        GaussianParamPoint { beta: 0.0, gamma: 0.0, nhat: f64::INFINITY }
    }
}

/// Which argument of the outer minimum attains it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActiveConstraint {
    /// The joint transmitter-plus-relay term at receiver 2.
    Cooperative,
    /// The term limited by what the relay decodes or conveys.
    Relay,
    Both,
    /// No minimum is involved.
    Direct,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub rate: f64,
    pub argmax: GaussianParamPoint,
    pub active_constraint: ActiveConstraint,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scheme1Options {
    /// Condition the feedback constraint on `Y2` as well.
    pub wyner_ziv: bool,
}

/// The jointly Gaussian system of one parameter point.
pub fn gaussian_system(p: &GaussianRbcParams, q: &GaussianParamPoint) -> Result<GaussianSystem> {
    let GaussianParamPoint { beta, gamma, nhat } = *q;
    let coherent = if p.p1 > 0.0 { (beta * p.p / p.p1).sqrt() } else { 0.0 };
    let sys = GaussianSystem::empty()
        .add_independent("X1", p.p1)?
        .add_independent("V0", gamma * (1.0 - beta) * p.p)?
        .add_independent("V2", (1.0 - gamma) * (1.0 - beta) * p.p)?
        .extend_linear("U0", &[("X1", coherent), ("V0", 1.0)], 0.0)?
        .extend_linear("X", &[("U0", 1.0), ("V2", 1.0)], 0.0)?
        .extend_linear("Y1", &[("X", p.g01)], 1.0)?
        .extend_linear("Y2", &[("X", p.g02), ("X1", p.g12)], 1.0)?;
    if nhat.is_infinite() {
        sys.extend_linear("Yh1", &[], 0.0)
    } else {
        sys.extend_linear("Yh1", &[("Y1", 1.0)], nhat)
    }
}

fn mi(sys: &GaussianSystem, left: &str, right: &str, cond: &str) -> Result<f64> {
    sys.gaussian_cond_mi(&MiAtom::parse_parts(left, right, cond)?)
}

/// The two arguments `(cooperative, relay)` of a bound's minimum at `q`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Branches {
    pub cooperative: f64,
    pub relay: f64,
}

impl Branches {
    pub fn min(&self) -> f64 {
        self.cooperative.min(self.relay)
    }

    fn active(&self) -> ActiveConstraint {
        if (self.cooperative - self.relay).abs() <= TIE_TOL {
            ActiveConstraint::Both
        } else if self.cooperative < self.relay {
            ActiveConstraint::Cooperative
        } else {
            ActiveConstraint::Relay
        }
    }
}

/// Partial decode-forward: `min{ I(X,X1;Y2), I(U0;Y1|X1) + I(X;Y2|X1,U0) }`.
pub fn liang_branches(p: &GaussianRbcParams, beta: f64, gamma: f64) -> Result<Branches> {
    let sys = gaussian_system(p, &GaussianParamPoint::new(beta, gamma, f64::INFINITY)?)?;
    Ok(Branches {
        cooperative: mi(&sys, "X,X1", "Y2", "")?,
        relay: mi(&sys, "U0", "Y1", "X1")? + mi(&sys, "X", "Y2", "X1,U0")?,
    })
}

/// Compress-forward with independent full-power inputs:
/// `min{ I(X,X1;Y2) - I(Yh1;Y1|X,X1,Y2), I(X;Yh1,Y2|X1) }`.
pub fn cf_branches(p: &GaussianRbcParams, nhat: f64) -> Result<Branches> {
    let sys = gaussian_system(p, &GaussianParamPoint::new(0.0, 0.0, nhat)?)?;
    Ok(Branches {
        cooperative: mi(&sys, "X,X1", "Y2", "")? - mi(&sys, "Yh1", "Y1", "X,X1,Y2")?,
        relay: mi(&sys, "X", "Yh1,Y2", "X1")?,
    })
}

/// Hybrid relaying:
/// `min{ I(X,X1;Y2) - I(Yh1;Y1|U0,X,X1,Y2), I(U0;Y1|X1) + I(X;Yh1,Y2|U0,X1) }`
/// and the feedback load `I(Yh1;Y1|U0,X1[,Y2])`.
pub fn scheme1_branches(
    p: &GaussianRbcParams,
    q: &GaussianParamPoint,
    opts: Scheme1Options,
) -> Result<(Branches, f64)> {
    let sys = gaussian_system(p, q)?;
    let branches = Branches {
        cooperative: mi(&sys, "X,X1", "Y2", "")? - mi(&sys, "Yh1", "Y1", "U0,X,X1,Y2")?,
        relay: mi(&sys, "U0", "Y1", "X1")? + mi(&sys, "X", "Yh1,Y2", "U0,X1")?,
    };
    let cond = if opts.wyner_ziv { "U0,X1,Y2" } else { "U0,X1" };
    Ok((branches, mi(&sys, "Yh1", "Y1", cond)?))
}

fn split_axes() -> [Axis; 2] {
    [Axis::linear(0.0, 1.0, SPLIT_POINTS), Axis::linear(0.0, 1.0, SPLIT_POINTS)]
}

fn nhat_axis() -> Axis {
    Axis::logarithmic(NHAT_MIN, NHAT_MAX, NHAT_POINTS)
}

fn result(rate: f64, argmax: GaussianParamPoint, branches: Branches) -> BoundResult {
    BoundResult { rate: rate.max(0.0), argmax, active_constraint: branches.active() }
}

/// Direct link only: `0.5 log2(1 + g02^2 P)`.
pub fn wu_rate(p: &GaussianRbcParams) -> Result<BoundResult> {
    p.validate()?;
    let sys = GaussianSystem::empty()
        .add_independent("X", p.p)?
        .extend_linear("Y2", &[("X", p.g02)], 1.0)?;
    Ok(BoundResult {
        rate: mi(&sys, "X", "Y2", "")?,
        argmax: GaussianParamPoint::direct(),
        active_constraint: ActiveConstraint::Direct,
    })
}

fn maximize_checked<F>(axes: &[Axis], f: F) -> Result<search::Optimum>
where
    F: Fn(&[f64]) -> Result<Option<f64>> + Sync,
{
    let failure = std::sync::Mutex::new(None);
    let best = search::maximize(axes, REFINE_ROUNDS, |x| match f(x) {
        Ok(v) => v,
        Err(e) => {
            failure.lock().expect("poisoned").get_or_insert(e);
            None
        }
    });
    if let Some(e) = failure.into_inner().expect("poisoned") {
        return Err(e);
    }
    best.ok_or_else(|| domain("no feasible parameter point"))
}

/// Partial decode-forward at the relay, maximized over `(beta, gamma)`.
pub fn liang_pdf_rate(p: &GaussianRbcParams) -> Result<BoundResult> {
    p.validate()?;
    let best = maximize_checked(&split_axes(), |x| Ok(Some(liang_branches(p, x[0], x[1])?.min())))?;
    let (beta, gamma) = (best.point[0], best.point[1]);
    let branches = liang_branches(p, beta, gamma)?;
    Ok(result(best.value, GaussianParamPoint { beta, gamma, nhat: f64::INFINITY }, branches))
}

/// Compress-forward with a fixed compression noise (`inf` disables the relay).
pub fn cf_rate_at(p: &GaussianRbcParams, nhat: f64) -> Result<BoundResult> {
    p.validate()?;
    let branches = cf_branches(p, nhat)?;
    Ok(result(branches.min(), GaussianParamPoint::new(0.0, 0.0, nhat)?, branches))
}

/// Compress-forward maximized over the compression noise.
pub fn cf_rate(p: &GaussianRbcParams) -> Result<BoundResult> {
    p.validate()?;
    let best = maximize_checked(&[nhat_axis()], |x| Ok(Some(cf_branches(p, x[0])?.min())))?;
    let no_relay = cf_rate_at(p, f64::INFINITY)?;
    if no_relay.rate > best.value {
        return Ok(no_relay);
    }
    cf_rate_at(p, best.point[0]).map(|r| BoundResult { rate: best.value.max(0.0), ..r })
}

/// Hybrid scheme at `p.rfb1` with the default feedback constraint.
pub fn scheme1_rate(p: &GaussianRbcParams) -> Result<BoundResult> {
    scheme1_rate_with(p, Scheme1Options::default())
}

/// Hybrid scheme: the best of a full `(beta, gamma, nhat)` search, the
/// uncompressed `(beta, gamma)` search, and the compress-forward optimum.
pub fn scheme1_rate_with(p: &GaussianRbcParams, opts: Scheme1Options) -> Result<BoundResult> {
    p.validate()?;
    let objective = |q: GaussianParamPoint| -> Result<Option<f64>> {
        let (branches, load) = scheme1_branches(p, &q, opts)?;
        Ok((load <= p.rfb1).then(|| branches.min()))
    };

    let mut candidates: Vec<(f64, GaussianParamPoint)> = Vec::new();
    let full = maximize_checked(&[split_axes()[0], split_axes()[1], nhat_axis()], |x| {
        objective(GaussianParamPoint { beta: x[0], gamma: x[1], nhat: x[2] })
    });
    if let Ok(best) = full {
        candidates.push((best.value, GaussianParamPoint::new(best.point[0], best.point[1], best.point[2])?));
    }
    let uncompressed = maximize_checked(&split_axes(), |x| {
        objective(GaussianParamPoint { beta: x[0], gamma: x[1], nhat: f64::INFINITY })
    })?;
    candidates.push((
        uncompressed.value,
        GaussianParamPoint::new(uncompressed.point[0], uncompressed.point[1], f64::INFINITY)?,
    ));
    let cf = cf_rate(p)?;
    if let Some(v) = objective(cf.argmax)? {
        candidates.push((v, cf.argmax));
    }

    // First strictly best candidate wins.
    let (value, argmax) = candidates
        .into_iter()
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("the uncompressed search always yields a candidate");
    let (branches, _) = scheme1_branches(p, &argmax, opts)?;
    Ok(result(value, argmax, branches))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub d: f64,
    pub liang: BoundResult,
    pub scheme1: BoundResult,
    pub wu: BoundResult,
    pub cf: BoundResult,
}

impl Table1Row {
    pub fn rates(&self) -> [f64; 4] {
        [self.liang.rate, self.scheme1.rate, self.wu.rate, self.cf.rate]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1 {
    pub rows: Vec<Table1Row>,
}

impl Table1 {
    pub const CSV_HEADER: &'static str = "d,liang,scheme1,wu,cf";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let [l, s, w, c] = r.rates();
            out.push_str(&format!("{},{l:.4},{s:.4},{w:.4},{c:.4}\n", r.d));
        }
        out
    }
}

/// The four corner rates for each relay position `d`, using the powers and
/// feedback rates of `base`.
pub fn table1(ds: &[f64], base: &GaussianRbcParams) -> Result<Table1> {
    if ds.is_empty() {
        return Err(domain("at least one relay position is required"));
    }
    let mut rows = Vec::with_capacity(ds.len());
    for &d in ds {
        let p = GaussianRbcParams::from_position(d, base.p, base.p1)?.with_feedback(base.rfb1, base.rfb2);
        rows.push(Table1Row {
            d,
            liang: liang_pdf_rate(&p)?,
            scheme1: scheme1_rate(&p)?,
            wu: wu_rate(&p)?,
            cf: cf_rate(&p)?,
        });
    }
    Ok(Table1 { rows })
}
