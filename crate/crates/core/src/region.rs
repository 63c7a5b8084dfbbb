//! Symbolic region templates and their numeric instantiation.
//!
//! A template is a list of rows `c . (R0, R1, R2) <= expr` where `expr` is a
//! signed sum of mutual-information atoms plus any number of `min{0, .}`
//! corrections, together with feedback-feasibility conditions
//! `expr <= Rfb_k`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::gauss::GaussianSystem;
use crate::polytope::{rate_names, HalfspaceSystem};
use crate::prob::{JointPmf, MiAtom, VariableId};

/// Slack used when checking feedback feasibility.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// Serde adapter for rates that may be infinite: `null` means unlimited.
pub(crate) mod rate_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_some(v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// Feedback-link rate limits in bits per channel use.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeedbackRates {
    #[serde(with = "rate_serde")]
    pub rfb1: f64,
    #[serde(with = "rate_serde")]
    pub rfb2: f64,
}

impl FeedbackRates {
    pub fn new(rfb1: f64, rfb2: f64) -> Result<Self> {
        if rfb1.is_nan() || rfb2.is_nan() || rfb1 < 0.0 || rfb2 < 0.0 {
            return Err(domain("feedback rates must be nonnegative"));
        }
        Ok(FeedbackRates { rfb1, rfb2 })
    }

    pub fn unlimited() -> Self {
        FeedbackRates { rfb1: f64::INFINITY, rfb2: f64::INFINITY }
    }

    pub fn get(&self, link: Link) -> f64 {
        match link {
            Link::One => self.rfb1,
            Link::Two => self.rfb2,
        }
    }
}

impl Default for FeedbackRates {
    fn default() -> Self {
        Self::unlimited()
    }
}

/// Which receiver's feedback link a quantity refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Link {
    One,
    Two,
}

impl Link {
    fn swapped(self) -> Link {
        match self {
            Link::One => Link::Two,
            Link::Two => Link::One,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Atom(MiAtom),
    /// The feedback rate `Rfb_k`.
    Feedback(Link),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coef: f64,
    #[serde(flatten)]
    pub quantity: Quantity,
}

/// `sum terms + sum_j min{0, min_terms[j]}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MiExpr {
    pub terms: Vec<Term>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub min_terms: Vec<Vec<Term>>,
}

fn eval_terms(terms: &[Term], a: &MiAssignment, rates: FeedbackRates) -> Result<f64> {
    let mut total = 0.0;
    for t in terms {
        let v = match &t.quantity {
            Quantity::Atom(atom) => a.get(atom)?,
            Quantity::Feedback(link) => rates.get(*link),
        };
        if t.coef != 0.0 {
            total += t.coef * v;
        }
    }
    Ok(total)
}

impl MiExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn plus(mut self, coef: f64, atom: MiAtom) -> Self {
        self.terms.push(Term { coef, quantity: Quantity::Atom(atom) });
        self
    }

    pub fn add_atom(self, atom: MiAtom) -> Self {
        self.plus(1.0, atom)
    }

    pub fn sub_atom(self, atom: MiAtom) -> Self {
        self.plus(-1.0, atom)
    }

    /// Appends `min{0, inner}`; `inner` must not itself carry min-terms.
    pub fn plus_min(mut self, inner: MiExpr) -> Self {
        debug_assert!(inner.min_terms.is_empty());
        self.min_terms.push(inner.terms);
        self
    }

    pub fn plus_feedback(mut self, coef: f64, link: Link) -> Self {
        self.terms.push(Term { coef, quantity: Quantity::Feedback(link) });
        self
    }

    /// Concatenation of two expressions.
    pub fn join(mut self, other: &MiExpr) -> Self {
        self.terms.extend(other.terms.iter().cloned());
        self.min_terms.extend(other.min_terms.iter().cloned());
        self
    }

    pub fn atoms(&self) -> impl Iterator<Item = &MiAtom> {
        self.terms.iter().chain(self.min_terms.iter().flatten()).filter_map(|t| match &t.quantity {
            Quantity::Atom(a) => Some(a),
            Quantity::Feedback(_) => None,
        })
    }

    /// Value of the linear part only.
    pub fn linear_value(&self, a: &MiAssignment, rates: FeedbackRates) -> Result<f64> {
        eval_terms(&self.terms, a, rates)
    }

    /// Values of each `min{0, .}` correction, already clamped to be `<= 0`.
    pub fn min_values(&self, a: &MiAssignment, rates: FeedbackRates) -> Result<Vec<f64>> {
        self.min_terms
            .iter()
            .map(|inner| {
                let v = eval_terms(inner, a, rates)?;
                Ok(if v.is_nan() { 0.0 } else { v.min(0.0) })
            })
            .collect()
    }

    /// Numeric value; may be `+inf` when an unlimited feedback rate enters
    /// the linear part.
    pub fn evaluate(&self, a: &MiAssignment, rates: FeedbackRates) -> Result<f64> {
        let lin = self.linear_value(a, rates)?;
        let mins: f64 = self.min_values(a, rates)?.into_iter().sum();
        let v = lin + mins;
        if v.is_nan() {
            return Err(Error::Numerical("expression evaluated to NaN".into()));
        }
        Ok(v)
    }

    fn map(&self, f: &impl Fn(&Term) -> Term) -> MiExpr {
        MiExpr {
            terms: self.terms.iter().map(f).collect(),
            min_terms: self.min_terms.iter().map(|m| m.iter().map(f).collect()).collect(),
        }
    }
}

impl fmt::Display for MiExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn write_terms(f: &mut fmt::Formatter<'_>, terms: &[Term]) -> fmt::Result {
            for (i, t) in terms.iter().enumerate() {
                let sign = if t.coef < 0.0 { "- " } else if i > 0 { "+ " } else { "" };
                let mag = t.coef.abs();
                if i > 0 {
                    f.write_str(" ")?;
                }
                f.write_str(sign)?;
                if mag != 1.0 {
                    write!(f, "{mag}*")?;
                }
                match &t.quantity {
                    Quantity::Atom(a) => write!(f, "{a}")?,
                    Quantity::Feedback(Link::One) => f.write_str("Rfb1")?,
                    Quantity::Feedback(Link::Two) => f.write_str("Rfb2")?,
                }
            }
            Ok(())
        }
        if self.terms.is_empty() && self.min_terms.is_empty() {
            return f.write_str("0");
        }
        write_terms(f, &self.terms)?;
        for m in &self.min_terms {
            f.write_str(" + min{0, ")?;
            write_terms(f, m)?;
            f.write_str("}")?;
        }
        Ok(())
    }
}

/// Where the atom values of an assignment came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssignmentSource {
    Pmf,
    Gaussian,
    Manual,
}

/// Numeric values of mutual-information atoms, in bits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MiAssignment {
    #[serde(with = "atom_entries")]
    values: BTreeMap<MiAtom, f64>,
    source: AssignmentSource,
}

mod atom_entries {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::prob::MiAtom;

    #[derive(Serialize, Deserialize)]
    struct Entry {
        atom: MiAtom,
        value: f64,
    }

    pub fn serialize<S: Serializer>(m: &BTreeMap<MiAtom, f64>, s: S) -> Result<S::Ok, S::Error> {
        let entries: Vec<Entry> =
            m.iter().map(|(atom, &value)| Entry { atom: atom.clone(), value }).collect();
        entries.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<MiAtom, f64>, D::Error> {
        let entries = Vec::<Entry>::deserialize(d)?;
        Ok(entries.into_iter().map(|e| (e.atom, e.value)).collect())
    }
}

impl MiAssignment {
    pub fn new(source: AssignmentSource) -> Self {
        MiAssignment { values: BTreeMap::new(), source }
    }

    pub fn insert(&mut self, atom: MiAtom, value: f64) -> Result<()> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(domain(format!("{atom} = {value} is not a finite nonnegative value")));
        }
        self.values.insert(atom, value);
        Ok(())
    }

    /// The same value for every atom.
    pub fn constant<'a>(atoms: impl IntoIterator<Item = &'a MiAtom>, value: f64) -> Result<Self> {
        let mut a = MiAssignment::new(AssignmentSource::Manual);
        for atom in atoms {
            a.insert(atom.clone(), value)?;
        }
        Ok(a)
    }

    pub fn from_pmf<'a>(pmf: &JointPmf, atoms: impl IntoIterator<Item = &'a MiAtom>) -> Result<Self> {
        let mut a = MiAssignment::new(AssignmentSource::Pmf);
        for atom in atoms {
            if !a.values.contains_key(atom) {
                a.values.insert(atom.clone(), pmf.cond_mutual_information(atom)?);
            }
        }
        Ok(a)
    }

    pub fn from_gaussian<'a>(
        sys: &GaussianSystem,
        atoms: impl IntoIterator<Item = &'a MiAtom>,
    ) -> Result<Self> {
        let mut a = MiAssignment::new(AssignmentSource::Gaussian);
        for atom in atoms {
            if !a.values.contains_key(atom) {
                a.values.insert(atom.clone(), sys.gaussian_cond_mi(atom)?);
            }
        }
        Ok(a)
    }

    pub fn source(&self) -> AssignmentSource {
        self.source
    }

    pub fn values(&self) -> &BTreeMap<MiAtom, f64> {
        &self.values
    }

    pub fn contains(&self, atom: &MiAtom) -> bool {
        self.values.contains_key(atom)
    }

    pub fn get(&self, atom: &MiAtom) -> Result<f64> {
        self.values
            .get(atom)
            .copied()
            .ok_or_else(|| Error::MissingAtoms(vec![atom.to_string()]))
    }

    /// Every atom of `needed` lacking a value, as an error.
    pub fn require<'a>(&self, needed: impl IntoIterator<Item = &'a MiAtom>) -> Result<()> {
        let missing: BTreeSet<String> = needed
            .into_iter()
            .filter(|a| !self.values.contains_key(*a))
            .map(|a| a.to_string())
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::MissingAtoms(missing.into_iter().collect()))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionId {
    Theorem1,
    Theorem2,
    Theorem3v1,
    Theorem3v2,
    Liang,
    Wu,
}

impl RegionId {
    pub const ALL: [RegionId; 6] = [
        RegionId::Theorem1,
        RegionId::Theorem2,
        RegionId::Theorem3v1,
        RegionId::Theorem3v2,
        RegionId::Liang,
        RegionId::Wu,
    ];

    pub fn parse(name: &str) -> Result<RegionId> {
        let key = name.to_ascii_lowercase().replace(['_', '-'], "");
        RegionId::ALL
            .into_iter()
            .find(|id| id.to_string().to_ascii_lowercase() == key)
            .ok_or_else(|| domain(format!("unknown region `{name}`")))
    }
}

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// `coeffs . (R0, R1, R2) <= rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateInequality {
    pub coeffs: [f64; 3],
    pub rhs: MiExpr,
}

/// `lhs <= Rfb_link`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityConstraint {
    pub lhs: MiExpr,
    pub link: Link,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub id: RegionId,
    pub inequalities: Vec<RateInequality>,
    pub feasibility: Vec<FeasibilityConstraint>,
    /// When false the region carries no common message and `R0 = 0` is
    /// imposed on instantiation.
    pub common_message: bool,
}

impl RegionSpec {
    pub fn atoms(&self) -> BTreeSet<MiAtom> {
        self.inequalities
            .iter()
            .map(|i| &i.rhs)
            .chain(self.feasibility.iter().map(|c| &c.lhs))
            .flat_map(MiExpr::atoms)
            .cloned()
            .collect()
    }

    /// Exchanges the roles of the two receivers: indices 1 and 2 of every
    /// variable, rate and feedback link.
    pub fn swap_indices(&self, id: RegionId) -> RegionSpec {
        let swap_var = |v: &VariableId| {
            let s = v.as_str();
            let t = match s.chars().last() {
                Some('1') => format!("{}2", &s[..s.len() - 1]),
                Some('2') => format!("{}1", &s[..s.len() - 1]),
                _ => s.to_owned(),
            };
            VariableId::new(t)
        };
        let swap_term = |t: &Term| Term {
            coef: t.coef,
            quantity: match &t.quantity {
                Quantity::Atom(a) => Quantity::Atom(a.rename(swap_var)),
                Quantity::Feedback(l) => Quantity::Feedback(l.swapped()),
            },
        };
        RegionSpec {
            id,
            inequalities: self
                .inequalities
                .iter()
                .map(|i| RateInequality {
                    coeffs: [i.coeffs[0], i.coeffs[2], i.coeffs[1]],
                    rhs: i.rhs.map(&swap_term),
                })
                .collect(),
            feasibility: self
                .feasibility
                .iter()
                .map(|c| FeasibilityConstraint { lhs: c.lhs.map(&swap_term), link: c.link.swapped() })
                .collect(),
            common_message: self.common_message,
        }
    }
}

fn atom(left: &str, right: &str, cond: &str) -> MiAtom {
    MiAtom::parse_parts(left, right, cond).expect("template atoms are well formed")
}

fn one(a: MiAtom) -> MiExpr {
    MiExpr::new().add_atom(a)
}

fn ineq(coeffs: [f64; 3], rhs: MiExpr) -> RateInequality {
    RateInequality { coeffs, rhs }
}

fn theorem1_like(with_compression: bool, id: RegionId) -> RegionSpec {
    let a0 = atom("U0,U1", "Y1", "X1");
    let a1 = atom("U1", "Y1", "U0,X1");
    let m = atom("U1", "U2", "U0,X1");
    // Receiver 2's cloud-plus-relay term, reduced by the compression cost.
    let mut c2 = one(atom("U0,U2,X1", "Y2", ""));
    let private2 = if with_compression {
        c2 = c2.sub_atom(atom("Yh1", "Y1", "U0,U2,X1,Y2"));
        atom("U2", "Yh1,Y2", "U0,X1")
    } else {
        atom("U2", "Y2", "U0,X1")
    };
    let inequalities = vec![
        ineq([1.0, 1.0, 0.0], one(a0.clone())),
        ineq([1.0, 0.0, 1.0], c2.clone()),
        ineq([1.0, 1.0, 1.0], one(a1).join(&c2).sub_atom(m.clone())),
        ineq([1.0, 1.0, 1.0], one(a0.clone()).add_atom(private2).sub_atom(m.clone())),
        ineq([2.0, 1.0, 1.0], one(a0).join(&c2).sub_atom(m)),
    ];
    let feasibility = if with_compression {
        vec![FeasibilityConstraint { lhs: one(atom("Yh1", "Y1", "U0,X1")), link: Link::One }]
    } else {
        Vec::new()
    };
    RegionSpec { id, inequalities, feasibility, common_message: true }
}

fn theorem2() -> RegionSpec {
    let d1 = MiExpr::new().add_atom(atom("X2", "Y1", "X1")).sub_atom(atom("Yh2", "Y2", "X1,X2,Y1"));
    let d2 = MiExpr::new().add_atom(atom("X1", "Y2", "X2")).sub_atom(atom("Yh1", "Y1", "X1,X2,Y2"));
    let first1 = one(atom("U0,U1", "Yh2,Y1", "X1,X2")).plus_min(d1);
    let first2 = one(atom("U0,U2", "Yh1,Y2", "X1,X2")).plus_min(d2);
    let m = atom("U1", "U2", "U0,X1,X2");
    let inequalities = vec![
        ineq([1.0, 1.0, 0.0], first1.clone()),
        ineq([1.0, 0.0, 1.0], first2.clone()),
        ineq(
            [1.0, 1.0, 1.0],
            first1.clone().add_atom(atom("U2", "Y2,Yh1", "U0,X1,X2")).sub_atom(m.clone()),
        ),
        ineq(
            [1.0, 1.0, 1.0],
            first2.clone().add_atom(atom("U1", "Y1,Yh2", "U0,X1,X2")).sub_atom(m.clone()),
        ),
        ineq([2.0, 1.0, 1.0], first1.join(&first2).sub_atom(m)),
    ];
    let feasibility = vec![
        FeasibilityConstraint { lhs: one(atom("Yh1", "Y1", "X1")), link: Link::One },
        FeasibilityConstraint { lhs: one(atom("Yh2", "Y2", "X2")), link: Link::Two },
    ];
    RegionSpec { id: RegionId::Theorem2, inequalities, feasibility, common_message: true }
}

fn theorem3v1() -> RegionSpec {
    let q1 = atom("Yh1", "Y1", "U0,X1,X2,Y2");
    let q2 = atom("Yh2", "Y2", "U0,X1,X2,Y1");
    let base = one(atom("U0", "Y1", "X1,X2"))
        .plus_min(MiExpr::new().add_atom(atom("X2", "Y1", "X1")).sub_atom(q2.clone()));
    let i1 = one(atom("U1", "Yh2,Y1", "U0,X1,X2"))
        .plus_min(MiExpr::new().plus_feedback(1.0, Link::Two).sub_atom(q2.clone()));
    let i2 = one(atom("U2", "Yh1,Y2", "U0,X1,X2"))
        .plus_min(MiExpr::new().plus_feedback(1.0, Link::One).sub_atom(q1.clone()));
    let r2 = one(atom("U0,U2,X1", "Y2", "X2")).sub_atom(atom("Yh1", "Y1", "U0,U2,X1,X2,Y2"));
    let m = atom("U1", "U2", "U0,X1,X2");
    let inequalities = vec![
        ineq([1.0, 0.0, 0.0], base.clone()),
        ineq([1.0, 1.0, 0.0], base.clone().join(&i1)),
        ineq([1.0, 0.0, 1.0], base.clone().join(&i2)),
        ineq([1.0, 0.0, 1.0], r2.clone()),
        ineq([1.0, 1.0, 1.0], base.clone().join(&r2).sub_atom(m.clone())),
        ineq([1.0, 1.0, 1.0], base.join(&i1).join(&i2).sub_atom(m)),
    ];
    let feasibility = vec![
        FeasibilityConstraint { lhs: one(q1), link: Link::One },
        FeasibilityConstraint { lhs: one(q2), link: Link::Two },
    ];
    RegionSpec { id: RegionId::Theorem3v1, inequalities, feasibility, common_message: true }
}

fn wu() -> RegionSpec {
    let first1 = one(atom("U0,U1", "Y1,Yh2", "")).sub_atom(atom("Yh2", "Y2", "Y1"));
    let first2 = one(atom("U0,U2", "Y2,Yh1", "")).sub_atom(atom("Yh1", "Y1", "Y2"));
    let m = atom("U1", "U2", "U0");
    let inequalities = vec![
        ineq([0.0, 1.0, 0.0], first1.clone()),
        ineq([0.0, 0.0, 1.0], first2.clone()),
        ineq([0.0, 1.0, 1.0], first1.clone().add_atom(atom("U2", "Y2,Yh1", "U0")).sub_atom(m.clone())),
        ineq([0.0, 1.0, 1.0], first2.clone().add_atom(atom("U1", "Y1,Yh2", "U0")).sub_atom(m.clone())),
        ineq([0.0, 1.0, 1.0], first1.join(&first2).sub_atom(m)),
    ];
    let feasibility = vec![
        FeasibilityConstraint { lhs: one(atom("Yh1", "Y1", "Y2")), link: Link::One },
        FeasibilityConstraint { lhs: one(atom("Yh2", "Y2", "Y1")), link: Link::Two },
    ];
    RegionSpec { id: RegionId::Wu, inequalities, feasibility, common_message: false }
}

/// The inequality template of a region.
pub fn build_region(id: RegionId) -> RegionSpec {
    match id {
        RegionId::Theorem1 => theorem1_like(true, id),
        RegionId::Liang => theorem1_like(false, id),
        RegionId::Theorem2 => theorem2(),
        RegionId::Theorem3v1 => theorem3v1(),
        RegionId::Theorem3v2 => theorem3v1().swap_indices(RegionId::Theorem3v2),
        RegionId::Wu => wu(),
    }
}

/// Theorem 1 with the feedback condition additionally conditioned on `Y2`.
pub fn relaxed_feedback_constraint(spec: &RegionSpec) -> Result<RegionSpec> {
    if spec.id != RegionId::Theorem1 {
        return Err(domain(format!("the relaxed feedback constraint applies to Theorem1, not {}", spec.id)));
    }
    let strict = atom("Yh1", "Y1", "U0,X1");
    let relaxed = atom("Yh1", "Y1", "U0,X1,Y2");
    let mut out = spec.clone();
    for c in &mut out.feasibility {
        for t in &mut c.lhs.terms {
            if t.quantity == Quantity::Atom(strict.clone()) {
                t.quantity = Quantity::Atom(relaxed.clone());
            }
        }
    }
    Ok(out)
}

/// A region evaluated on one assignment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instantiated {
    /// Polytope over `(R0, R1, R2)`, nonnegativity included.
    pub system: HalfspaceSystem,
    /// Whether every feedback condition holds.
    pub feasible: bool,
}

/// Evaluates every row of `spec` on `a`. Rows whose bound is infinite are
/// omitted. The polytope is returned even when the feedback conditions fail.
pub fn instantiate_region(spec: &RegionSpec, a: &MiAssignment, rates: FeedbackRates) -> Result<Instantiated> {
    a.require(&spec.atoms())?;
    let rate_vars = [rate_names::R0, rate_names::R1, rate_names::R2];
    let mut system = HalfspaceSystem::with_vars(&rate_vars)?;
    for row in &spec.inequalities {
        let rhs = row.rhs.evaluate(a, rates)?;
        if rhs == f64::INFINITY {
            continue;
        }
        if !rhs.is_finite() {
            return Err(Error::Numerical(format!("row bound {} is {rhs}", row.rhs)));
        }
        let terms: Vec<(&str, f64)> = rate_vars.iter().copied().zip(row.coeffs).collect();
        system.push_le(&terms, rhs)?;
    }
    if !spec.common_message {
        system.push_le(&[(rate_names::R0, 1.0)], 0.0)?;
    }
    system.push_nonnegativity();
    let mut feasible = true;
    for c in &spec.feasibility {
        let lhs = c.lhs.evaluate(a, rates)?;
        if lhs > rates.get(c.link) + FEASIBILITY_TOL {
            feasible = false;
        }
    }
    Ok(Instantiated { system, feasible })
}

/// Adds `R0 <= 0` to a system over `(R0, R1, R2)`.
pub fn slice_r0(system: &HalfspaceSystem) -> Result<HalfspaceSystem> {
    let mut s = system.clone();
    s.push_le(&[(rate_names::R0, 1.0)], 0.0)?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_sizes() {
        let t1 = build_region(RegionId::Theorem1);
        assert_eq!((t1.inequalities.len(), t1.feasibility.len()), (5, 1));
        let l = build_region(RegionId::Liang);
        assert_eq!((l.inequalities.len(), l.feasibility.len()), (5, 0));
        assert!(l.atoms().iter().all(|a| a.variables().all(|v| !v.as_str().starts_with("Yh"))));
        let w = build_region(RegionId::Wu);
        assert_eq!((w.inequalities.len(), w.feasibility.len()), (5, 2));
        assert_eq!(build_region(RegionId::Theorem3v1).inequalities.len(), 6);
    }

    #[test]
    fn theorem2_first_row_carries_delta1() {
        let t2 = build_region(RegionId::Theorem2);
        let row = &t2.inequalities[0];
        assert_eq!(row.coeffs, [1.0, 1.0, 0.0]);
        assert_eq!(row.rhs.min_terms.len(), 1);
        let inner = MiExpr { terms: row.rhs.min_terms[0].clone(), min_terms: vec![] };
        assert_eq!(inner.to_string(), "I(X2;Y1|X1) - I(Y2;Yh2|X1,X2,Y1)");
    }

    #[test]
    fn swap_is_an_involution() {
        let v1 = build_region(RegionId::Theorem3v1);
        let v2 = build_region(RegionId::Theorem3v2);
        assert_eq!(v1.swap_indices(RegionId::Theorem3v2), v2);
        assert_eq!(v2.swap_indices(RegionId::Theorem3v1), v1);
        assert_ne!(v1.inequalities, v2.inequalities);
    }

    #[test]
    fn all_zero_atoms_give_the_origin() {
        for id in RegionId::ALL {
            let spec = build_region(id);
            let a = MiAssignment::constant(&spec.atoms(), 0.0).unwrap();
            let inst = instantiate_region(&spec, &a, FeedbackRates::unlimited()).unwrap();
            assert!(inst.feasible);
            let v = inst.system.enumerate_vertices().unwrap();
            assert_eq!(v.points, vec![vec![0.0, 0.0, 0.0]], "{id}");
        }
    }

    #[test]
    fn missing_atoms_are_all_listed() {
        let spec = build_region(RegionId::Liang);
        let err = instantiate_region(&spec, &MiAssignment::new(AssignmentSource::Manual), FeedbackRates::unlimited())
            .unwrap_err();
        let Error::MissingAtoms(list) = err else { panic!("{err}") };
        assert_eq!(list.len(), spec.atoms().len());
    }

    #[test]
    fn relaxed_constraint_is_idempotent_and_restricted() {
        let t1 = build_region(RegionId::Theorem1);
        let r = relaxed_feedback_constraint(&t1).unwrap();
        assert_eq!(r.feasibility[0].lhs.to_string(), "I(Y1;Yh1|U0,X1,Y2)");
        assert_eq!(relaxed_feedback_constraint(&r).unwrap(), r);
        assert!(relaxed_feedback_constraint(&build_region(RegionId::Wu)).is_err());
    }

    #[test]
    fn feedback_min_terms_vanish_when_unlimited() {
        let spec = build_region(RegionId::Theorem3v1);
        let a = MiAssignment::constant(&spec.atoms(), 0.25).unwrap();
        let i1 = &spec.inequalities[1].rhs;
        let vals = i1.min_values(&a, FeedbackRates::unlimited()).unwrap();
        assert_eq!(vals, vec![0.0, 0.0]);
        let capped = FeedbackRates::new(0.0, 0.0).unwrap();
        assert_eq!(i1.min_values(&a, capped).unwrap(), vec![0.0, -0.25]);
    }

    #[test]
    fn template_json_round_trip() {
        for id in RegionId::ALL {
            let spec = build_region(id);
            let text = serde_json::to_string(&spec).unwrap();
            assert!(text.contains("\"left\""));
            let back: RegionSpec = serde_json::from_str(&text).unwrap();
            assert_eq!(back, spec);
        }
    }

    #[test]
    fn rates_serialize_unlimited_as_null() {
        let text = serde_json::to_string(&FeedbackRates::new(0.5, f64::INFINITY).unwrap()).unwrap();
        assert_eq!(text, r#"{"rfb1":0.5,"rfb2":null}"#);
        let back: FeedbackRates = serde_json::from_str(&text).unwrap();
        assert_eq!(back.rfb2, f64::INFINITY);
    }

    #[test]
    fn region_id_parsing() {
        assert_eq!(RegionId::parse("theorem3v2").unwrap(), RegionId::Theorem3v2);
        assert_eq!(RegionId::parse("Liang").unwrap(), RegionId::Liang);
        assert!(RegionId::parse("theorem9").is_err());
    }
}
