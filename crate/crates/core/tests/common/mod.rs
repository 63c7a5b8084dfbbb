//! Independent oracles shared by the integration suites.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use rbc_core::{GaussianSystem, HalfspaceSystem, JointPmf, MiAtom, Relation, Row, VariableId};

/// Reference corner rates: `(d, liang, scheme1, wu, cf)`.
pub const TABLE1: [(f64, [f64; 4]); 4] = [
    (0.73, [1.6881, 1.7069, 1.2925, 1.6908]),
    (0.74, [1.6703, 1.7111, 1.2925, 1.6971]),
    (0.75, [1.6529, 1.7153, 1.2925, 1.7033]),
    (0.76, [1.6358, 1.7195, 1.2925, 1.7094]),
];

/// Binary Scheme 2B pmf seeds on which the Theorem 3 region is not
/// contained in the projection and no covering failure explains it.
pub const THEOREM3_UNSOUND_SEEDS: [u64; 2] = [254, 263];

pub fn atom(l: &str, r: &str, c: &str) -> MiAtom {
    MiAtom::parse_parts(l, r, c).unwrap()
}

// ---------------------------------------------------------------------------
// Finite pmfs

/// Marginal over `axes` by direct summation of the flat tensor.
pub fn brute_marginal(pmf: &JointPmf, axes: &[usize]) -> Vec<f64> {
    let sizes = pmf.sizes();
    let out_len: usize = axes.iter().map(|&a| sizes[a]).product();
    let mut out = vec![0.0; out_len];
    let mut idx = vec![0usize; sizes.len()];
    for &p in pmf.probs() {
        let flat = axes.iter().fold(0, |acc, &a| acc * sizes[a] + idx[a]);
        out[flat] += p;
        for d in (0..sizes.len()).rev() {
            idx[d] += 1;
            if idx[d] < sizes[d] {
                break;
            }
            idx[d] = 0;
        }
    }
    out
}

pub fn brute_entropy(pmf: &JointPmf, axes: &[usize]) -> f64 {
    brute_marginal(pmf, axes).iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

/// `I(A;B|C)` from brute-force entropies.
pub fn brute_mi(pmf: &JointPmf, a: &[usize], b: &[usize], c: &[usize]) -> f64 {
    let cat = |xs: &[&[usize]]| xs.concat();
    brute_entropy(pmf, &cat(&[a, c])) + brute_entropy(pmf, &cat(&[b, c]))
        - brute_entropy(pmf, &cat(&[a, b, c]))
        - brute_entropy(pmf, c)
}

fn names(pmf: &JointPmf, axes: &[usize]) -> String {
    axes.iter().map(|&a| pmf.variables()[a].as_str()).collect::<Vec<_>>().join(",")
}

/// Splits a random subset of the axes into three disjoint groups `(A, B, C)`
/// with `A` and `B` nonempty.
pub fn random_groups(rng: &mut ChaCha8Rng, n: usize) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    loop {
        let (mut a, mut b, mut c) = (Vec::new(), Vec::new(), Vec::new());
        for i in 0..n {
            match rng.random_range(0..5) {
                0 => a.push(i),
                1 => b.push(i),
                2 => c.push(i),
                _ => {}
            }
        }
        if !a.is_empty() && !b.is_empty() {
            return (a, b, c);
        }
    }
}

/// Chain rule, nonnegativity, agreement with brute-force entropies and
/// marginalization consistency on one pmf, all at `tol`.
pub fn check_information_identities(pmf: &JointPmf, rng: &mut ChaCha8Rng, tol: f64) -> Result<(), String> {
    let n = pmf.variables().len();
    let mi = |a: &[usize], b: &[usize], c: &[usize]| {
        pmf.cond_mutual_information(&atom(&names(pmf, a), &names(pmf, b), &names(pmf, c)))
            .map_err(|e| e.to_string())
    };
    for _ in 0..4 {
        let (a, b, c) = random_groups(rng, n);
        let value = mi(&a, &b, &c)?;
        if value < 0.0 {
            return Err(format!("negative MI {value}"));
        }
        let oracle = brute_mi(pmf, &a, &b, &c).max(0.0);
        if (value - oracle).abs() > tol {
            return Err(format!("MI {value} vs brute force {oracle}"));
        }
        if b.len() >= 2 {
            let (b1, b2) = b.split_at(b.len() / 2);
            let bc: Vec<usize> = b1.iter().chain(&c).copied().collect();
            let split = mi(&a, b1, &c)? + mi(&a, b2, &bc)?;
            if (value - split).abs() > tol {
                return Err(format!("chain rule: {value} vs {split}"));
            }
        }
        let keep: Vec<usize> = a.iter().chain(&b).chain(&c).copied().collect();
        let keep_ids: Vec<VariableId> = keep.iter().map(|&k| pmf.variables()[k].clone()).collect();
        let marginal = pmf.marginalize(&keep_ids).map_err(|e| e.to_string())?;
        let mass: f64 = marginal.probs().iter().sum();
        if (mass - 1.0).abs() > tol {
            return Err(format!("marginal mass {mass}"));
        }
        let full_h = pmf.entropy(&keep_ids).map_err(|e| e.to_string())?;
        let marg_h = marginal.entropy(&keep_ids).map_err(|e| e.to_string())?;
        if (full_h - marg_h).abs() > tol {
            return Err(format!("entropy after marginalizing {marg_h} vs {full_h}"));
        }
        let on_marginal = marginal
            .cond_mutual_information(&atom(&names(pmf, &a), &names(pmf, &b), &names(pmf, &c)))
            .map_err(|e| e.to_string())?;
        if (on_marginal - value).abs() > tol {
            return Err(format!("MI after marginalizing {on_marginal} vs {value}"));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Gaussian systems

/// Plug-in estimate of `I(A;B|C)` in bits from `draws` samples of the system.
pub fn monte_carlo_mi(sys: &GaussianSystem, a: &MiAtom, draws: usize, seed: u64) -> f64 {
    let n = sys.variables().len();
    let chol = sys
        .covariance()
        .clone()
        .cholesky()
        .map(|c| c.l())
        .unwrap_or_else(|| sqrt_psd(sys.covariance()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scatter = DMatrix::<f64>::zeros(n, n);
    let mut z = DVector::<f64>::zeros(n);
    for _ in 0..draws {
        z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        let x = &chol * &z;
        scatter.ger(1.0, &x, &x, 1.0);
    }
    let cov = scatter / draws as f64;
    let pos = |v: &VariableId| sys.variables().iter().position(|w| w == v).unwrap();
    let idx = |set: &std::collections::BTreeSet<VariableId>| set.iter().map(pos).collect::<Vec<_>>();
    let (ia, ib, ic) = (idx(a.left()), idx(a.right()), idx(a.cond()));
    let log_det = |axes: Vec<usize>| {
        if axes.is_empty() {
            return 0.0;
        }
        let sub = DMatrix::from_fn(axes.len(), axes.len(), |r, c| cov[(axes[r], axes[c])]);
        sub.determinant().ln()
    };
    let cat = |xs: &[&[usize]]| xs.concat();
    0.5 * (log_det(cat(&[&ia, &ic])) + log_det(cat(&[&ib, &ic]))
        - log_det(cat(&[&ia, &ib, &ic]))
        - log_det(ic.clone()))
        / std::f64::consts::LN_2
}

fn sqrt_psd(cov: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = cov.clone().symmetric_eigen();
    let root = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&root)
}

// ---------------------------------------------------------------------------
// Halfspace systems

pub const FME_VARS: [&str; 5] = ["a", "b", "c", "d", "e"];

/// A bounded, nonempty system over five variables with at most 14 rows,
/// plus the variables to eliminate.
pub fn random_system(seed: u64) -> (HalfspaceSystem, Vec<&'static str>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sys = HalfspaceSystem::with_vars(&FME_VARS).unwrap();
    sys.push_nonnegativity();
    let all: Vec<(&str, f64)> = FME_VARS.iter().map(|v| (*v, 1.0)).collect();
    sys.push_le(&all, 10.0).unwrap();
    let extra = rng.random_range(2..=8);
    for k in 0..extra {
        let terms: Vec<(&str, f64)> =
            FME_VARS.iter().map(|v| (*v, rng.random_range(-3i32..=3) as f64)).collect();
        if k == 0 && rng.random_bool(0.3) {
            let i = rng.random_range(0..5);
            let j = (i + rng.random_range(1..5)) % 5;
            sys.push_eq(&[(FME_VARS[i], 1.0), (FME_VARS[j], -rng.random_range(1i32..=2) as f64)], 0.0)
                .unwrap();
        } else {
            sys.push_le(&terms, rng.random_range(1i32..=10) as f64).unwrap();
        }
    }
    let k = rng.random_range(1..=3);
    let mut order: Vec<&str> = FME_VARS.to_vec();
    for i in (1..order.len()).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    order.truncate(k);
    (sys, order)
}

/// Solutions of every square subsystem of `rows` (each row taken as an
/// equality) that satisfy all rows within `tol`.
fn basic_feasible_points(rows: &[(Vec<f64>, f64, bool)], dim: usize, tol: f64) -> Vec<Vec<f64>> {
    let feasible = |x: &DVector<f64>| {
        rows.iter().all(|(c, r, eq)| {
            let lhs: f64 = c.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
            if *eq {
                (lhs - r).abs() <= tol
            } else {
                lhs <= r + tol
            }
        })
    };
    if dim == 0 {
        return if feasible(&DVector::zeros(0)) { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    let mut pick: Vec<usize> = (0..dim).collect();
    if rows.len() < dim {
        return out;
    }
    loop {
        let m = DMatrix::from_fn(dim, dim, |r, c| rows[pick[r]].0[c]);
        let rhs = DVector::from_fn(dim, |r, _| rows[pick[r]].1);
        if m.determinant().abs() > 1e-10 {
            if let Some(x) = m.lu().solve(&rhs) {
                if feasible(&x) {
                    out.push(x.iter().copied().collect());
                }
            }
        }
        // Next combination in lexicographic order.
        let mut i = dim;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if pick[i] < rows.len() - dim + i {
                pick[i] += 1;
                for j in i + 1..dim {
                    pick[j] = pick[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn split_rows(sys: &HalfspaceSystem, free: &[usize], fixed: &[(usize, f64)]) -> Vec<(Vec<f64>, f64, bool)> {
    sys.rows()
        .iter()
        .map(|r: &Row| {
            let shift: f64 = fixed.iter().map(|&(i, v)| r.coeffs[i] * v).sum();
            (free.iter().map(|&i| r.coeffs[i]).collect(), r.rhs - shift, r.rel == Relation::Eq)
        })
        .collect()
}

/// Whether `point` (over the kept variables, in system order) extends to a
/// feasible point of `sys` after assigning the eliminated variables.
pub fn lift_exists(sys: &HalfspaceSystem, eliminated: &[&str], point: &[f64], tol: f64) -> bool {
    let elim: Vec<usize> = eliminated.iter().map(|v| sys.index_of(v).unwrap()).collect();
    let kept: Vec<usize> = (0..sys.dim()).filter(|i| !elim.contains(i)).collect();
    let fixed: Vec<(usize, f64)> = kept.iter().copied().zip(point.iter().copied()).collect();
    let rows = split_rows(sys, &elim, &fixed);
    !basic_feasible_points(&rows, elim.len(), tol).is_empty()
}

/// All vertices of a bounded system by brute force over square subsystems.
pub fn brute_vertices(sys: &HalfspaceSystem, tol: f64) -> Vec<Vec<f64>> {
    let all: Vec<usize> = (0..sys.dim()).collect();
    basic_feasible_points(&split_rows(sys, &all, &[]), sys.dim(), tol)
}

/// Projects full-space points onto the kept coordinates.
pub fn keep_coords(sys: &HalfspaceSystem, eliminated: &[&str], x: &[f64]) -> Vec<f64> {
    (0..sys.dim())
        .filter(|&i| !eliminated.iter().any(|v| sys.index_of(v).unwrap() == i))
        .map(|i| x[i])
        .collect()
}

/// Vertices satisfy the system, each is pinned by `dim` independent tight
/// rows, and every support value over the vertices matches the LP optimum.
pub fn check_vertex_consistency(sys: &HalfspaceSystem, tol: f64) -> Result<usize, String> {
    let vs = sys.enumerate_vertices().map_err(|e| e.to_string())?;
    let empty = sys.is_empty().map_err(|e| e.to_string())?;
    if empty != vs.points.is_empty() {
        return Err(format!("emptiness {empty} but {} vertices", vs.points.len()));
    }
    for v in &vs.points {
        if !sys.contains(v, tol) {
            return Err(format!("vertex {v:?} violates the system by {}", sys.violation(v)));
        }
        let tight: Vec<&Row> = sys.rows().iter().filter(|r| (r.lhs(v) - r.rhs).abs() <= 1e-7).collect();
        let m = DMatrix::from_fn(tight.len(), sys.dim(), |r, c| tight[r].coeffs[c]);
        if m.rank(1e-9) < sys.dim() {
            return Err(format!("vertex {v:?} is not pinned by its tight rows"));
        }
    }
    for dir in rbc_core::polytope::search_directions(sys.dim()) {
        let best = vs.points.iter().map(|v| v.iter().zip(&dir).map(|(a, b)| a * b).sum::<f64>());
        let best = best.fold(f64::NEG_INFINITY, f64::max);
        match sys.maximize(&dir).map_err(|e| e.to_string())? {
            rbc_core::polytope::LpOutcome::Optimal { value, .. } => {
                if (value - best).abs() > 1e-7 {
                    return Err(format!("support {value} vs vertex maximum {best}"));
                }
            }
            other if !empty => return Err(format!("LP returned {other:?} on a bounded region")),
            _ => {}
        }
    }
    Ok(vs.points.len())
}
