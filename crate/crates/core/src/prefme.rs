//! Pre-elimination achievability systems of the three coding schemes and
//! the check that their projections reproduce the theorem regions.
//!
//! Every system lives over `R0, R1, R2` plus the auxiliary split rates. The
//! cloud-center rate `Rc = R0 + Rc1 + Rc2` is expanded wherever it appears,
//! `>` conditions are stored as `<=` rows with both sides negated, and strict
//! inequalities are closed.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::polytope::{
    polytopes_equal, rate_names as rn, Containment, HalfspaceSystem, LpOutcome, Row, Verdict,
};
use crate::prob::{random_structured_pmf, JointPmf, MiAtom, Scheme, StructuredFamilySpec};
use crate::region::{
    build_region, instantiate_region, rate_serde, FeedbackRates, Link, MiAssignment, RegionId,
};

/// Support-value tolerance of the projection check.
pub const VERIFY_TOL: f64 = 1e-8;

/// Fixed elimination order; variables absent from a scheme are skipped.
pub const ELIMINATION_ORDER: [&str; 10] =
    [rn::RPR1, rn::RPR2, rn::RH1, rn::RH2, rn::RT1, rn::RT2, rn::RC1, rn::RC2, rn::RP1, rn::RP2];

/// How the two compress-forward decoding rows of Scheme 2A are read.
///
/// `AsPrinted` puts `U2` in receiver 1's compression term and `U1` in
/// receiver 2's. `Corrected` uses each receiver's own satellite, which is the
/// reading under which eliminating the compression rates yields the
/// theorem's `Delta` terms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transcription {
    #[default]
    Corrected,
    AsPrinted,
}

/// One row `lhs <= sum rhs (+ Rfb)` before numeric evaluation.
struct RowTemplate {
    lhs: Vec<(&'static str, f64)>,
    rhs: Vec<(f64, MiAtom)>,
    feedback: Option<Link>,
}

fn atom(left: &str, right: &str, cond: &str) -> MiAtom {
    MiAtom::parse_parts(left, right, cond).expect("scheme atoms are well formed")
}

fn with_rc(mut lhs: Vec<(&'static str, f64)>) -> Vec<(&'static str, f64)> {
    lhs.extend([(rn::R0, 1.0), (rn::RC1, 1.0), (rn::RC2, 1.0)]);
    lhs
}

fn le(lhs: Vec<(&'static str, f64)>, rhs: Vec<MiAtom>) -> RowTemplate {
    RowTemplate { lhs, rhs: rhs.into_iter().map(|a| (1.0, a)).collect(), feedback: None }
}

/// `sum lhs >= sum rhs`, stored negated.
fn ge(lhs: Vec<(&'static str, f64)>, rhs: Vec<MiAtom>) -> RowTemplate {
    RowTemplate {
        lhs: lhs.into_iter().map(|(v, c)| (v, -c)).collect(),
        rhs: rhs.into_iter().map(|a| (-1.0, a)).collect(),
        feedback: None,
    }
}

fn cap(var: &'static str, link: Link) -> RowTemplate {
    RowTemplate { lhs: vec![(var, 1.0)], rhs: Vec::new(), feedback: Some(link) }
}

fn scheme_vars(scheme: Scheme) -> Vec<&'static str> {
    let mut v = vec![rn::R0, rn::R1, rn::R2, rn::RC1, rn::RC2, rn::RP1, rn::RP2, rn::RPR1, rn::RPR2, rn::RH1];
    match scheme {
        Scheme::Scheme1 => {}
        Scheme::Scheme2A => v.push(rn::RH2),
        Scheme::Scheme2B => v.extend([rn::RH2, rn::RT1, rn::RT2]),
    }
    v
}

fn scheme1_rows() -> Vec<RowTemplate> {
    let (p1, p2, q1, q2) = ((rn::RP1, 1.0), (rn::RP2, 1.0), (rn::RPR1, 1.0), (rn::RPR2, 1.0));
    vec![
        ge(vec![q1, q2], vec![atom("U1", "U2", "U0,X1")]),
        cap(rn::RH1, Link::One),
        le(vec![p1, q1], vec![atom("U1", "Y1", "U0,X1")]),
        le(with_rc(vec![p1, q1]), vec![atom("U0,U1", "Y1", "X1")]),
        ge(vec![(rn::RH1, 1.0)], vec![atom("Yh1", "Y1", "U0,X1")]),
        le(vec![p2, q2], vec![atom("U2", "Y2,Yh1", "U0,X1")]),
        le(
            with_rc(vec![p2, q2, (rn::RH1, 1.0)]),
            vec![atom("U0,U2,X1", "Y2", ""), atom("Yh1", "U2,Y2", "U0,X1")],
        ),
    ]
}

fn scheme2a_rows(t: Transcription) -> Vec<RowTemplate> {
    let (p1, p2, q1, q2) = ((rn::RP1, 1.0), (rn::RP2, 1.0), (rn::RPR1, 1.0), (rn::RPR2, 1.0));
    let (own1, own2) = match t {
        Transcription::Corrected => ("U0,U2,Y2,X2", "U0,U1,Y1,X1"),
        Transcription::AsPrinted => ("U0,U1,Y2,X2", "U0,U2,Y1,X1"),
    };
    vec![
        ge(vec![q1, q2], vec![atom("U1", "U2", "U0,X1,X2")]),
        cap(rn::RH1, Link::One),
        cap(rn::RH2, Link::Two),
        ge(vec![(rn::RH1, 1.0)], vec![atom("Yh1", "Y1", "X1")]),
        ge(vec![(rn::RH2, 1.0)], vec![atom("Yh2", "Y2", "X2")]),
        le(vec![p1, q1], vec![atom("U1", "Y1,Yh2", "U0,X1,X2")]),
        le(vec![p2, q2], vec![atom("U2", "Y2,Yh1", "U0,X1,X2")]),
        le(with_rc(vec![p1, q1]), vec![atom("U0,U1", "Yh2,Y1", "X1,X2")]),
        le(with_rc(vec![p2, q2]), vec![atom("U0,U2", "Yh1,Y2", "X1,X2")]),
        le(
            with_rc(vec![p1, q1, (rn::RH2, 1.0)]),
            vec![atom("U0,U1,X2", "Y1", "X1"), atom("Yh2", own2, "X2")],
        ),
        le(
            with_rc(vec![p2, q2, (rn::RH1, 1.0)]),
            vec![atom("U0,U2,X1", "Y2", "X2"), atom("Yh1", own1, "X1")],
        ),
    ]
}

fn scheme2b_rows() -> Vec<RowTemplate> {
    let (p1, p2, q1, q2) = ((rn::RP1, 1.0), (rn::RP2, 1.0), (rn::RPR1, 1.0), (rn::RPR2, 1.0));
    let (h1, h2, t1, t2) = ((rn::RH1, 1.0), (rn::RH2, 1.0), (rn::RT1, 1.0), (rn::RT2, 1.0));
    let u1 = atom("U1", "Y1,Yh2", "U0,X1,X2");
    let u2 = atom("U2", "Y2,Yh1", "U0,X1,X2");
    let yh2_side = atom("Yh2", "U0,X1,Y1", "X2");
    let yh1_side = atom("Yh1", "Y2,U2", "U0,X1,X2");
    vec![
        ge(vec![q1, q2], vec![atom("U1", "U2", "U0,X1,X2")]),
        cap(rn::RH1, Link::One),
        // Receiver 1, sliding-window decoding.
        le(with_rc(vec![]), vec![atom("U0", "Y1", "X1,X2")]),
        le(with_rc(vec![h2]), vec![atom("U0,X2", "Y1", "X1")]),
        le(vec![t2], vec![yh2_side.clone()]),
        le(vec![p1, q1], vec![u1.clone()]),
        le(vec![p1, q1, t2], vec![u1, yh2_side]),
        ge(vec![h1, t1], vec![atom("Yh1", "Y1", "U0,X1,X2")]),
        // Receiver 2, backward decoding.
        cap(rn::RH2, Link::Two),
        le(vec![t1], vec![yh1_side.clone()]),
        le(vec![p2, q2], vec![u2.clone()]),
        le(vec![p2, q2, t1], vec![u2, atom("Yh1", "Y2", "U0,X1,X2")]),
        le(with_rc(vec![h1, p2, q2, t1]), vec![yh1_side, atom("U0,U2,X1", "Y2", "X2")]),
        ge(vec![h2, t2], vec![atom("Yh2", "Y2", "X2")]),
    ]
}

fn scheme_rows(scheme: Scheme, t: Transcription) -> Vec<RowTemplate> {
    match scheme {
        Scheme::Scheme1 => scheme1_rows(),
        Scheme::Scheme2A => scheme2a_rows(t),
        Scheme::Scheme2B => scheme2b_rows(),
    }
}

/// Atoms needed to build a scheme's system.
pub fn scheme_atoms(scheme: Scheme, t: Transcription) -> BTreeSet<MiAtom> {
    scheme_rows(scheme, t).into_iter().flat_map(|r| r.rhs).map(|(_, a)| a).collect()
}

/// The theorem region a scheme is claimed to achieve.
pub fn theorem_for(scheme: Scheme) -> RegionId {
    match scheme {
        Scheme::Scheme1 => RegionId::Theorem1,
        Scheme::Scheme2A => RegionId::Theorem2,
        Scheme::Scheme2B => RegionId::Theorem3v1,
    }
}

/// A scheme's full constraint system for one assignment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeSystem {
    pub scheme: Scheme,
    pub sys: HalfspaceSystem,
    pub assignment: MiAssignment,
    #[serde(with = "rate_serde")]
    pub rfb1: f64,
    #[serde(with = "rate_serde")]
    pub rfb2: f64,
}

impl SchemeSystem {
    /// Auxiliary variables eliminated by [`project_to_rates`], in order.
    pub fn elimination_vars(&self) -> Vec<&'static str> {
        let present = scheme_vars(self.scheme);
        ELIMINATION_ORDER.into_iter().filter(|v| present.contains(v)).collect()
    }

    pub fn rates(&self) -> FeedbackRates {
        FeedbackRates { rfb1: self.rfb1, rfb2: self.rfb2 }
    }
}

pub fn build_scheme_system(scheme: Scheme, a: &MiAssignment, rates: FeedbackRates) -> Result<SchemeSystem> {
    build_scheme_system_with(scheme, a, rates, Transcription::default())
}

/// As [`build_scheme_system`] with an explicit reading of the Scheme 2A rows.
pub fn build_scheme_system_with(
    scheme: Scheme,
    a: &MiAssignment,
    rates: FeedbackRates,
    t: Transcription,
) -> Result<SchemeSystem> {
    let rows = scheme_rows(scheme, t);
    a.require(rows.iter().flat_map(|r| r.rhs.iter().map(|(_, atom)| atom)))?;
    let mut sys = HalfspaceSystem::with_vars(&scheme_vars(scheme))?;
    for row in rows {
        let mut rhs = 0.0;
        for (c, atom) in &row.rhs {
            rhs += c * a.get(atom)?;
        }
        if let Some(link) = row.feedback {
            let r = rates.get(link);
            if r.is_infinite() {
                continue;
            }
            rhs += r;
        }
        sys.push_le(&row.lhs, rhs)?;
    }
    sys.push_eq(&[(rn::R1, 1.0), (rn::RC1, -1.0), (rn::RP1, -1.0)], 0.0)?;
    sys.push_eq(&[(rn::R2, 1.0), (rn::RC2, -1.0), (rn::RP2, -1.0)], 0.0)?;
    sys.push_nonnegativity();
    Ok(SchemeSystem { scheme, sys, assignment: a.clone(), rfb1: rates.rfb1, rfb2: rates.rfb2 })
}

/// Projects a scheme system onto `(R0, R1, R2)`.
pub fn project_to_rates(s: &SchemeSystem) -> Result<HalfspaceSystem> {
    s.sys.project_out(&s.elimination_vars())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub trials: usize,
    pub seed: u64,
    /// Alphabet size of every variable unless overridden.
    pub alphabet: usize,
    /// Per-variable alphabet sizes replacing `alphabet`.
    #[serde(default)]
    pub sizes: BTreeMap<String, usize>,
    pub rates: FeedbackRates,
    pub tol: f64,
    #[serde(default)]
    pub transcription: Transcription,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            trials: 100,
            seed: 1,
            alphabet: 2,
            sizes: BTreeMap::new(),
            rates: FeedbackRates::unlimited(),
            tol: VERIFY_TOL,
            transcription: Transcription::Corrected,
        }
    }
}

impl VerifyOptions {
    pub fn family(&self, scheme: Scheme, trial: usize) -> StructuredFamilySpec {
        let mut spec =
            StructuredFamilySpec::uniform_size(scheme, self.alphabet, self.seed.wrapping_add(trial as u64));
        for (var, &size) in &self.sizes {
            spec = spec.with_size(var, size);
        }
        spec
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// A point of the theorem region lies outside the projection.
    TheoremNotInProjection,
    /// A point of the projection lies outside the theorem region.
    ProjectionNotInTheorem,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialVerdict {
    pub trial: usize,
    pub pmf_seed: u64,
    pub verdict: Verdict,
    /// Whether the theorem's feedback conditions hold for this pmf.
    pub feasible: bool,
}

/// One failed containment between theorem region and projection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub witness: Vec<f64>,
    pub direction: Direction,
    pub excess: f64,
    /// Set when a documented cause accounts for the discrepancy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_cause: Option<String>,
    pub diagnosis: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub trial: usize,
    pub pmf_seed: u64,
    #[serde(flatten)]
    pub detail: Discrepancy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub scheme: Scheme,
    pub theorem: RegionId,
    pub trials: usize,
    pub seed: u64,
    pub verdicts: Vec<TrialVerdict>,
    pub mismatches: Vec<Mismatch>,
}

impl VerifyReport {
    pub fn equal_count(&self) -> usize {
        self.verdicts.iter().filter(|v| v.verdict == Verdict::Equal).count()
    }

    /// Trials where the theorem region is not inside the projection.
    pub fn soundness_failures(&self) -> usize {
        self.verdicts
            .iter()
            .filter(|v| matches!(v.verdict, Verdict::ANotInB | Verdict::Incomparable))
            .count()
    }

    pub fn has_mismatches(&self) -> bool {
        !self.mismatches.is_empty()
    }

    /// Mismatches without a known cause.
    pub fn unexplained(&self) -> Vec<&Mismatch> {
        self.mismatches.iter().filter(|m| m.detail.known_cause.is_none()).collect()
    }
}

/// Projection, theorem region and their comparison for one pmf.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PmfCheck {
    pub projection: HalfspaceSystem,
    pub theorem: HalfspaceSystem,
    /// Whether the theorem's feedback conditions hold for this pmf.
    pub feasible: bool,
    pub verdict: Verdict,
    pub discrepancies: Vec<Discrepancy>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub pmf_seed: u64,
    pub check: PmfCheck,
}

fn row_text(sys: &HalfspaceSystem, r: &Row) -> String {
    let mut one = HalfspaceSystem::new(sys.vars().to_vec()).expect("same variables");
    one.push(r.clone()).expect("row fits its own system");
    one.to_string().trim().to_owned()
}

fn lhs_text(sys: &HalfspaceSystem, r: &Row) -> String {
    let text = row_text(sys, r);
    text.split(" <=").next().unwrap_or(&text).to_owned()
}

fn violated_rows<'a>(sys: &'a HalfspaceSystem, witness: &[f64], tol: f64) -> Vec<&'a Row> {
    sys.rows().iter().filter(|r| r.violation(witness) > tol).collect()
}

/// Scheme-specific explanation of an empty projection, when a known cause applies.
fn known_cause(scheme: Scheme, a: &MiAssignment, projection: &HalfspaceSystem) -> Option<String> {
    if !projection.has_contradiction() {
        return None;
    }
    let get = |l: &str, r: &str, c: &str| a.get(&atom(l, r, c)).ok();
    let (cond, side1, side2) = match scheme {
        Scheme::Scheme1 => ("U0,X1", "Y1", "Y2,Yh1"),
        Scheme::Scheme2A | Scheme::Scheme2B => ("U0,X1,X2", "Y1,Yh2", "Y2,Yh1"),
    };
    let m = get("U1", "U2", cond)?;
    let slack = get("U1", side1, cond)? + get("U2", side2, cond)?;
    (m > slack).then(|| {
        format!(
            "Marton covering needs I(U1;U2|{cond}) = {m:.6} <= I(U1;{side1}|{cond}) + I(U2;{side2}|{cond}) = {slack:.6}; \
             the scheme system is infeasible while the theorem omits this condition"
        )
    })
}

fn discrepancy(
    scheme: Scheme,
    a: &MiAssignment,
    projection: &HalfspaceSystem,
    theorem: &HalfspaceSystem,
    direction: Direction,
    (witness, excess): (Vec<f64>, f64),
    tol: f64,
) -> Result<Discrepancy> {
    let (known_cause, diagnosis) = match direction {
        Direction::TheoremNotInProjection => {
            let rows: Vec<String> =
                violated_rows(projection, &witness, tol).into_iter().map(|r| row_text(projection, r)).collect();
            (known_cause(scheme, a, projection), format!("witness violates projection rows: {}", rows.join("; ")))
        }
        Direction::ProjectionNotInTheorem => {
            let mut parts = Vec::new();
            for r in violated_rows(theorem, &witness, tol) {
                let reach = match projection.maximize(&r.coeffs)? {
                    LpOutcome::Optimal { value, .. } => format!("{value}"),
                    _ => "an unbounded value".to_owned(),
                };
                parts.push(format!(
                    "projection reaches {} = {reach} where the theorem allows {}",
                    lhs_text(theorem, r),
                    r.rhs
                ));
            }
            (None, parts.join("; "))
        }
    };
    Ok(Discrepancy { witness, direction, excess, known_cause, diagnosis })
}

/// Projects the scheme system of `pmf` and compares it with the theorem region.
/// A theorem whose feedback conditions fail is compared as the empty set.
pub fn check_pmf(
    scheme: Scheme,
    pmf: &JointPmf,
    rates: FeedbackRates,
    transcription: Transcription,
    tol: f64,
) -> Result<PmfCheck> {
    let spec = build_region(theorem_for(scheme));
    let mut atoms = scheme_atoms(scheme, transcription);
    atoms.extend(spec.atoms());
    let a = MiAssignment::from_pmf(pmf, &atoms)?;

    let system = build_scheme_system_with(scheme, &a, rates, transcription)?;
    let projection = project_to_rates(&system)?;
    let inst = instantiate_region(&spec, &a, rates)?;
    let theorem = if inst.feasible {
        inst.system
    } else {
        HalfspaceSystem::infeasible(inst.system.vars().to_vec())
    };

    let cmp = polytopes_equal(&theorem, &projection, tol)?;
    let mut discrepancies = Vec::new();
    for (containment, direction) in [
        (&cmp.a_in_b, Direction::TheoremNotInProjection),
        (&cmp.b_in_a, Direction::ProjectionNotInTheorem),
    ] {
        if let Containment::Fails { witness, excess } = containment {
            discrepancies.push(discrepancy(
                scheme,
                &a,
                &projection,
                &theorem,
                direction,
                (witness.clone(), *excess),
                tol,
            )?);
        }
    }
    Ok(PmfCheck { projection, theorem, feasible: inst.feasible, verdict: cmp.verdict(), discrepancies })
}

/// Smallest pmf on which the projection is empty but the theorem region is
/// not: `U0` and `U1 = U2` are independent uniform bits, `X = Y1 = Y2 = U0`
/// and every other variable is constant. The satellites carry a full bit of
/// mutual information that neither receiver observes, so the covering
/// condition `I(U1;U2|.) <= I(U1;.) + I(U2;.)` fails while the theorem keeps
/// the origin.
pub fn marton_counterexample(scheme: Scheme) -> Result<JointPmf> {
    let vars = scheme.variables();
    let binary = ["U0", "U1", "U2", "X", "Y1", "Y2"];
    let sizes: Vec<usize> = vars.iter().map(|v| if binary.contains(v) { 2 } else { 1 }).collect();
    let at = |name: &str| vars.iter().position(|v| *v == name).expect("scheme variable");
    let total: usize = sizes.iter().product();
    let mut probs = vec![0.0; total];
    for u0 in 0..2 {
        for u1 in 0..2 {
            let mut idx = vec![0usize; vars.len()];
            idx[at("U0")] = u0;
            idx[at("U1")] = u1;
            idx[at("U2")] = u1;
            for name in ["X", "Y1", "Y2"] {
                idx[at(name)] = u0;
            }
            let flat = idx.iter().zip(&sizes).fold(0, |acc, (&i, &s)| acc * s + i);
            probs[flat] = 0.25;
        }
    }
    JointPmf::new(vars.iter().map(|v| ((*v).into(), sizes[at(v)])).collect(), probs)
}

/// Runs one seeded trial of the projection check.
pub fn verify_trial(scheme: Scheme, opts: &VerifyOptions, trial: usize) -> Result<TrialOutcome> {
    let family = opts.family(scheme, trial);
    let pmf = random_structured_pmf(&family)?;
    let check = check_pmf(scheme, &pmf, opts.rates, opts.transcription, opts.tol)?;
    Ok(TrialOutcome { trial, pmf_seed: family.seed, check })
}

/// Compares projection and theorem region on `opts.trials` seeded pmfs.
/// Trials run in parallel; the report is ordered by trial index.
pub fn verify_theorem(scheme: Scheme, opts: &VerifyOptions) -> Result<VerifyReport> {
    if opts.trials == 0 {
        return Err(domain("at least one trial is required"));
    }
    let outcomes: Vec<TrialOutcome> = (0..opts.trials)
        .into_par_iter()
        .map(|t| verify_trial(scheme, opts, t))
        .collect::<Result<_>>()?;
    let mut verdicts = Vec::with_capacity(outcomes.len());
    let mut mismatches = Vec::new();
    for o in outcomes {
        verdicts.push(TrialVerdict {
            trial: o.trial,
            pmf_seed: o.pmf_seed,
            verdict: o.check.verdict,
            feasible: o.check.feasible,
        });
        mismatches.extend(
            o.check.discrepancies.into_iter().map(|detail| Mismatch { trial: o.trial, pmf_seed: o.pmf_seed, detail }),
        );
    }
    Ok(VerifyReport {
        scheme,
        theorem: theorem_for(scheme),
        trials: opts.trials,
        seed: opts.seed,
        verdicts,
        mismatches,
    })
}
