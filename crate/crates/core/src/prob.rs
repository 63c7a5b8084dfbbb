//! Exact information measures over small finite alphabets.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Tolerance on the total mass of a pmf.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Negative mutual information down to this value is rounding noise and is
/// clamped to zero; anything below is reported as an inconsistency.
pub const MI_CLAMP_TOL: f64 = 1e-12;

/// Symbolic name of a random variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VariableId(String);

impl VariableId {
    pub fn new(name: impl Into<String>) -> Self {
        VariableId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for VariableId {
    fn from(name: &str) -> Self {
        VariableId(name.to_owned())
    }
}

impl fmt::Display for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Names of the variables appearing in the coding schemes.
pub mod names {
    pub const U0: &str = "U0";
    pub const U1: &str = "U1";
    pub const U2: &str = "U2";
    pub const X: &str = "X";
    pub const X1: &str = "X1";
    pub const X2: &str = "X2";
    pub const Y1: &str = "Y1";
    pub const Y2: &str = "Y2";
    /// Compressed channel output of receiver 1.
    pub const YH1: &str = "Yh1";
    /// Compressed channel output of receiver 2.
    pub const YH2: &str = "Yh2";
}

/// A conditional mutual information term `I(left; right | cond)`.
///
/// The two argument sets are stored in canonical order (`left <= right`) so
/// that `I(A;B|C)` and `I(B;A|C)` compare equal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawAtom", into = "RawAtom")]
pub struct MiAtom {
    left: BTreeSet<VariableId>,
    right: BTreeSet<VariableId>,
    cond: BTreeSet<VariableId>,
}

#[derive(Serialize, Deserialize)]
struct RawAtom {
    left: Vec<VariableId>,
    right: Vec<VariableId>,
    #[serde(default)]
    cond: Vec<VariableId>,
}

impl TryFrom<RawAtom> for MiAtom {
    type Error = Error;

    fn try_from(raw: RawAtom) -> Result<Self> {
        MiAtom::new(raw.left, raw.right, raw.cond)
    }
}

impl From<MiAtom> for RawAtom {
    fn from(atom: MiAtom) -> Self {
        RawAtom {
            left: atom.left.into_iter().collect(),
            right: atom.right.into_iter().collect(),
            cond: atom.cond.into_iter().collect(),
        }
    }
}

impl MiAtom {
    pub fn new(
        left: impl IntoIterator<Item = VariableId>,
        right: impl IntoIterator<Item = VariableId>,
        cond: impl IntoIterator<Item = VariableId>,
    ) -> Result<Self> {
        let left: BTreeSet<_> = left.into_iter().collect();
        let right: BTreeSet<_> = right.into_iter().collect();
        let cond: BTreeSet<_> = cond.into_iter().collect();
        if left.is_empty() || right.is_empty() {
            return Err(domain("mutual information needs nonempty arguments"));
        }
        let overlap = left
            .intersection(&right)
            .chain(left.intersection(&cond))
            .chain(right.intersection(&cond))
            .next();
        if let Some(v) = overlap {
            return Err(domain(format!(
                "variable `{v}` appears in more than one argument of a mutual information"
            )));
        }
        let (left, right) = if left <= right { (left, right) } else { (right, left) };
        Ok(MiAtom { left, right, cond })
    }

    /// Builds an atom from comma-separated name lists, e.g.
    /// `MiAtom::parse_parts("U0,U1", "Y1", "X1")` for `I(U0,U1;Y1|X1)`.
    pub fn parse_parts(left: &str, right: &str, cond: &str) -> Result<Self> {
        fn split(s: &str) -> Vec<VariableId> {
            s.split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(VariableId::from)
                .collect()
        }
        MiAtom::new(split(left), split(right), split(cond))
    }

    /// Parses the display form `I(A,B;C|D)`.
    pub fn parse(text: &str) -> Result<Self> {
        let body = text
            .trim()
            .strip_prefix("I(")
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| domain(format!("`{text}` is not of the form I(A;B|C)")))?;
        let (args, cond) = body.split_once('|').unwrap_or((body, ""));
        let (left, right) = args
            .split_once(';')
            .ok_or_else(|| domain(format!("`{text}` lacks a `;` separator")))?;
        MiAtom::parse_parts(left, right, cond)
    }

    pub fn left(&self) -> &BTreeSet<VariableId> {
        &self.left
    }

    pub fn right(&self) -> &BTreeSet<VariableId> {
        &self.right
    }

    pub fn cond(&self) -> &BTreeSet<VariableId> {
        &self.cond
    }

    /// All variables mentioned by the atom.
    pub fn variables(&self) -> impl Iterator<Item = &VariableId> {
        self.left.iter().chain(&self.right).chain(&self.cond)
    }

    /// Renames variables through `map`; names not covered are kept.
    pub fn rename(&self, map: impl Fn(&VariableId) -> VariableId) -> MiAtom {
        MiAtom::new(
            self.left.iter().map(&map),
            self.right.iter().map(&map),
            self.cond.iter().map(&map),
        )
        .expect("renaming by a bijection preserves disjointness")
    }

    /// The same atom with `vars` added to the conditioning set.
    pub fn with_condition(&self, vars: &[&str]) -> Result<MiAtom> {
        MiAtom::new(
            self.left.iter().cloned(),
            self.right.iter().cloned(),
            self.cond
                .iter()
                .cloned()
                .chain(vars.iter().map(|v| VariableId::from(*v))),
        )
    }
}

impl fmt::Display for MiAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn join(set: &BTreeSet<VariableId>) -> String {
            set.iter().map(VariableId::as_str).collect::<Vec<_>>().join(",")
        }
        write!(f, "I({};{}", join(&self.left), join(&self.right))?;
        if !self.cond.is_empty() {
            write!(f, "|{}", join(&self.cond))?;
        }
        f.write_str(")")
    }
}

/// Dense joint probability tensor over named finite variables.
///
/// Entries are stored row-major: the last variable varies fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPmf", into = "RawPmf")]
pub struct JointPmf {
    vars: Vec<VariableId>,
    sizes: Vec<usize>,
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawVariable {
    name: VariableId,
    size: usize,
}

#[derive(Serialize, Deserialize)]
struct RawPmf {
    variables: Vec<RawVariable>,
    probs: Vec<f64>,
}

impl TryFrom<RawPmf> for JointPmf {
    type Error = Error;

    fn try_from(raw: RawPmf) -> Result<Self> {
        JointPmf::new(
            raw.variables.into_iter().map(|v| (v.name, v.size)).collect(),
            raw.probs,
        )
    }
}

impl From<JointPmf> for RawPmf {
    fn from(p: JointPmf) -> Self {
        RawPmf {
            variables: p
                .vars
                .into_iter()
                .zip(p.sizes)
                .map(|(name, size)| RawVariable { name, size })
                .collect(),
            probs: p.probs,
        }
    }
}

impl JointPmf {
    pub fn new(variables: Vec<(VariableId, usize)>, probs: Vec<f64>) -> Result<Self> {
        let (vars, sizes): (Vec<_>, Vec<_>) = variables.into_iter().unzip();
        let unique: BTreeSet<_> = vars.iter().collect();
        if unique.len() != vars.len() {
            return Err(domain("duplicate variable names in pmf"));
        }
        if let Some(pos) = sizes.iter().position(|&s| s == 0) {
            return Err(domain(format!("variable `{}` has an empty alphabet", vars[pos])));
        }
        let total: usize = sizes.iter().product();
        if probs.len() != total {
            return Err(domain(format!(
                "pmf has {} entries but the alphabets require {total}",
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(domain(format!("pmf entry {p} is not a nonnegative number")));
        }
        let mass: f64 = probs.iter().sum();
        if (mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(domain(format!("pmf sums to {mass}, not 1")));
        }
        Ok(JointPmf { vars, sizes, probs })
    }

    pub fn uniform(variables: Vec<(VariableId, usize)>) -> Result<Self> {
        let total: usize = variables.iter().map(|v| v.1).product();
        JointPmf::new(variables, vec![1.0 / total.max(1) as f64; total])
    }

    pub fn variables(&self) -> &[VariableId] {
        &self.vars
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn position(&self, v: &VariableId) -> Result<usize> {
        self.vars
            .iter()
            .position(|x| x == v)
            .ok_or_else(|| Error::UnknownVariable(v.to_string()))
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.sizes.len()];
        for i in (0..self.sizes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.sizes[i + 1];
        }
        strides
    }

    /// Marginal mass over the given axes (in the given order), row-major.
    fn marginal_over(&self, axes: &[usize]) -> Vec<f64> {
        let strides = self.strides();
        let out_sizes: Vec<usize> = axes.iter().map(|&a| self.sizes[a]).collect();
        let mut out = vec![0.0; out_sizes.iter().product()];
        for (flat, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let mut idx = 0;
            for (&axis, &size) in axes.iter().zip(&out_sizes) {
                idx = idx * size + (flat / strides[axis]) % self.sizes[axis];
            }
            out[idx] += p;
        }
        out
    }

    /// Sums out every variable not in `keep`; the survivors keep their
    /// original relative order.
    pub fn marginalize(&self, keep: &[VariableId]) -> Result<JointPmf> {
        let mut axes = keep
            .iter()
            .map(|v| self.position(v))
            .collect::<Result<Vec<_>>>()?;
        axes.sort_unstable();
        axes.dedup();
        let probs = self.marginal_over(&axes);
        Ok(JointPmf {
            vars: axes.iter().map(|&a| self.vars[a].clone()).collect(),
            sizes: axes.iter().map(|&a| self.sizes[a]).collect(),
            probs,
        })
    }

    fn entropy_axes(&self, axes: &[usize]) -> f64 {
        if axes.is_empty() {
            return 0.0;
        }
        entropy_bits(&self.marginal_over(axes))
    }

    /// Joint entropy in bits of the given variables.
    pub fn entropy(&self, vars: &[VariableId]) -> Result<f64> {
        let axes = vars
            .iter()
            .map(|v| self.position(v))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.entropy_axes(&axes))
    }

    /// `I(left; right | cond)` in bits.
    pub fn cond_mutual_information(&self, atom: &MiAtom) -> Result<f64> {
        let axes = |set: &BTreeSet<VariableId>| {
            set.iter().map(|v| self.position(v)).collect::<Result<Vec<_>>>()
        };
        let a = axes(atom.left())?;
        let b = axes(atom.right())?;
        let c = axes(atom.cond())?;
        let join = |x: &[usize], y: &[usize]| {
            let mut v = x.to_vec();
            v.extend_from_slice(y);
            v
        };
        let ac = join(&a, &c);
        let bc = join(&b, &c);
        let abc = join(&a, &bc);
        let value = self.entropy_axes(&ac) + self.entropy_axes(&bc)
            - self.entropy_axes(&abc)
            - self.entropy_axes(&c);
        clamp_mi(value, atom)
    }
}

pub(crate) fn clamp_mi(value: f64, atom: &MiAtom) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -MI_CLAMP_TOL {
        Ok(0.0)
    } else {
        Err(Error::Consistency(format!("{atom} evaluated to {value}")))
    }
}

/// Shannon entropy in bits, with `0 log 0 = 0`.
pub fn entropy_bits(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Coding scheme whose pmf factorization a structured family follows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// Partially cooperative: receiver 1 relays and feeds back.
    Scheme1,
    /// Fully cooperative, compress-forward at both receivers.
    Scheme2A,
    /// Fully cooperative, hybrid relaying at receiver 1.
    Scheme2B,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Scheme1, Scheme::Scheme2A, Scheme::Scheme2B];

    /// Tensor axes of the scheme's pmf, in storage order.
    pub fn variables(self) -> &'static [&'static str] {
        use names::*;
        match self {
            Scheme::Scheme1 => &[U0, U1, U2, X1, X, Y1, Y2, YH1],
            Scheme::Scheme2A | Scheme::Scheme2B => &[U0, U1, U2, X1, X2, X, Y1, Y2, YH1, YH2],
        }
    }

    pub fn parse(name: &str) -> Result<Scheme> {
        match name.to_ascii_lowercase().as_str() {
            "scheme1" | "1" => Ok(Scheme::Scheme1),
            "scheme2a" | "2a" => Ok(Scheme::Scheme2A),
            "scheme2b" | "2b" => Ok(Scheme::Scheme2B),
            _ => Err(domain(format!("unknown scheme `{name}`"))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Parameters of a seeded draw from a scheme's pmf family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructuredFamilySpec {
    pub scheme: Scheme,
    /// Alphabet size per variable, aligned with [`Scheme::variables`].
    pub sizes: Vec<usize>,
    pub seed: u64,
}

impl StructuredFamilySpec {
    /// Every variable binary.
    pub fn binary(scheme: Scheme, seed: u64) -> Self {
        Self::uniform_size(scheme, 2, seed)
    }

    pub fn uniform_size(scheme: Scheme, size: usize, seed: u64) -> Self {
        StructuredFamilySpec { scheme, sizes: vec![size; scheme.variables().len()], seed }
    }

    /// Overrides the alphabet size of one variable. A size of one makes the
    /// variable a deterministic constant.
    pub fn with_size(mut self, var: &str, size: usize) -> Self {
        if let Some(pos) = self.scheme.variables().iter().position(|v| *v == var) {
            self.sizes[pos] = size;
        }
        self
    }

    pub fn size(&self, var: &str) -> Option<usize> {
        let pos = self.scheme.variables().iter().position(|v| *v == var)?;
        self.sizes.get(pos).copied()
    }

    pub fn validate(&self) -> Result<()> {
        let expected = self.scheme.variables().len();
        if self.sizes.len() != expected {
            return Err(domain(format!(
                "{} needs {expected} alphabet sizes, got {}",
                self.scheme,
                self.sizes.len()
            )));
        }
        if self.sizes.contains(&0) {
            return Err(domain("alphabet sizes must be at least 1"));
        }
        let total: usize = self.sizes.iter().product();
        if total > 1 << 20 {
            return Err(domain(format!("pmf with {total} entries is too large")));
        }
        Ok(())
    }
}

/// One factor `P(children | parents)` of a product-form pmf; a deterministic
/// map is a factor with 0/1 entries.
struct Factor {
    parents: Vec<usize>,
    children: Vec<usize>,
    /// Indexed by `parent_config * child_configs + child_config`.
    table: Vec<f64>,
}

impl Factor {
    fn configs(sizes: &[usize], axes: &[usize]) -> usize {
        axes.iter().map(|&a| sizes[a]).product()
    }

    fn random(rng: &mut ChaCha8Rng, sizes: &[usize], parents: Vec<usize>, children: Vec<usize>) -> Self {
        let n_parent = Self::configs(sizes, &parents);
        let n_child = Self::configs(sizes, &children);
        let mut table = Vec::with_capacity(n_parent * n_child);
        for _ in 0..n_parent {
            table.extend(dirichlet_uniform(rng, n_child));
        }
        Factor { parents, children, table }
    }

    fn value(&self, sizes: &[usize], idx: &[usize]) -> f64 {
        let config = |axes: &[usize]| axes.iter().fold(0, |acc, &a| acc * sizes[a] + idx[a]);
        let n_child = Self::configs(sizes, &self.children);
        self.table[config(&self.parents) * n_child + config(&self.children)]
    }
}

/// A draw from Dirichlet(1, ..., 1), i.e. uniform on the simplex.
fn dirichlet_uniform(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|e| e / total).collect()
}

/// Draws a pmf whose product form matches the scheme's achievability
/// statement:
///
/// - Scheme 1: `P(U0,U1,U2,X1) 1[X=f(U0,U1,U2)] P(Y1,Y2|X,X1) P(Yh1|U0,X1,Y1)`
/// - Scheme 2A: `P(X1)P(X2)P(U0,U1,U2|X1,X2) 1[X=f] P(Y1,Y2|X,X1,X2) P(Yh1|X1,Y1) P(Yh2|X2,Y2)`
/// - Scheme 2B: as 2A but with `P(Yh1|U0,X1,X2,Y1)`.
///
/// Every random factor is an independent Dirichlet(1,...,1) draw per parent
/// configuration and `f` is a uniformly random lookup table. The result is a
/// deterministic function of the spec.
pub fn random_structured_pmf(spec: &StructuredFamilySpec) -> Result<JointPmf> {
    spec.validate()?;
    let vars = spec.scheme.variables();
    let sizes = &spec.sizes;
    let at = |name: &str| vars.iter().position(|v| *v == name).expect("scheme variable");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    use names::*;

    let mut factors = Vec::new();
    match spec.scheme {
        Scheme::Scheme1 => {
            factors.push(Factor::random(&mut rng, sizes, vec![], vec![at(U0), at(U1), at(U2), at(X1)]));
        }
        Scheme::Scheme2A | Scheme::Scheme2B => {
            factors.push(Factor::random(&mut rng, sizes, vec![], vec![at(X1)]));
            factors.push(Factor::random(&mut rng, sizes, vec![], vec![at(X2)]));
            factors.push(Factor::random(
                &mut rng,
                sizes,
                vec![at(X1), at(X2)],
                vec![at(U0), at(U1), at(U2)],
            ));
        }
    }

    // X = f(U0, U1, U2) as a random lookup table.
    let u_axes = vec![at(U0), at(U1), at(U2)];
    let n_u = Factor::configs(sizes, &u_axes);
    let n_x = sizes[at(X)];
    let mut f_table = vec![0.0; n_u * n_x];
    for u in 0..n_u {
        f_table[u * n_x + rng.random_range(0..n_x)] = 1.0;
    }
    factors.push(Factor { parents: u_axes, children: vec![at(X)], table: f_table });

    let channel_parents = match spec.scheme {
        Scheme::Scheme1 => vec![at(X), at(X1)],
        _ => vec![at(X), at(X1), at(X2)],
    };
    factors.push(Factor::random(&mut rng, sizes, channel_parents, vec![at(Y1), at(Y2)]));

    let yh1_parents = match spec.scheme {
        Scheme::Scheme1 => vec![at(U0), at(X1), at(Y1)],
        Scheme::Scheme2A => vec![at(X1), at(Y1)],
        Scheme::Scheme2B => vec![at(U0), at(X1), at(X2), at(Y1)],
    };
    factors.push(Factor::random(&mut rng, sizes, yh1_parents, vec![at(YH1)]));
    if spec.scheme != Scheme::Scheme1 {
        factors.push(Factor::random(&mut rng, sizes, vec![at(X2), at(Y2)], vec![at(YH2)]));
    }

    let total: usize = sizes.iter().product();
    let mut probs = Vec::with_capacity(total);
    let mut idx = vec![0usize; sizes.len()];
    for _ in 0..total {
        probs.push(factors.iter().map(|f| f.value(sizes, &idx)).product::<f64>());
        // Row-major increment.
        for axis in (0..idx.len()).rev() {
            idx[axis] += 1;
            if idx[axis] < sizes[axis] {
                break;
            }
            idx[axis] = 0;
        }
    }
    // Renormalize away accumulated rounding in the products.
    let mass: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= mass);

    JointPmf::new(
        vars.iter().map(|v| VariableId::from(*v)).zip(sizes.iter().copied()).collect(),
        probs,
    )
}
