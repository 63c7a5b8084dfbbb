use super::lp::LpOutcome;
use super::{HalfspaceSystem, Relation, Row, COEF_TOL, REDUNDANCY_TOL};
use crate::error::Result;

fn drop_column(row: &Row, col: usize) -> Row {
    let mut coeffs = row.coeffs.clone();
    coeffs.remove(col);
    Row { coeffs, rel: row.rel, rhs: row.rhs }
}

/// `a + f * b`, coefficient-wise.
fn axpy(a: &Row, f: f64, b: &Row, rel: Relation) -> Row {
    Row {
        coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + f * y).collect(),
        rel,
        rhs: a.rhs + f * b.rhs,
    }
}

/// Projects out column `col`.
///
/// An equality containing the variable is used as a substitution. Otherwise
/// every row with a positive coefficient is paired with every row with a
/// negative one, both scaled so the eliminated coefficient is +-1.
pub(super) fn eliminate(sys: &HalfspaceSystem, col: usize) -> Result<HalfspaceSystem> {
    let mut variables = sys.variables.clone();
    variables.remove(col);
    let rows = &sys.rows;

    let pivot_eq = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.rel == Relation::Eq && r.coeffs[col].abs() > COEF_TOL)
        .max_by(|(i, a), (j, b)| {
            a.coeffs[col]
                .abs()
                .total_cmp(&b.coeffs[col].abs())
                .then_with(|| j.cmp(i))
        })
        .map(|(i, _)| i);

    let mut out = Vec::new();
    if let Some(p) = pivot_eq {
        let pivot = &rows[p];
        for (i, row) in rows.iter().enumerate() {
            if i == p {
                continue;
            }
            let c = row.coeffs[col];
            let substituted = if c.abs() > COEF_TOL {
                axpy(row, -c / pivot.coeffs[col], pivot, row.rel)
            } else {
                row.clone()
            };
            out.push(drop_column(&substituted, col));
        }
    } else {
        let mut upper = Vec::new();
        let mut lower = Vec::new();
        for row in rows {
            let c = row.coeffs[col];
            if c.abs() <= COEF_TOL {
                out.push(drop_column(row, col));
            } else {
                let scale = 1.0 / c.abs();
                let scaled = Row {
                    coeffs: row.coeffs.iter().map(|x| x * scale).collect(),
                    rel: row.rel,
                    rhs: row.rhs * scale,
                };
                if c > 0.0 {
                    upper.push(scaled);
                } else {
                    lower.push(scaled);
                }
            }
        }
        for u in &upper {
            for l in &lower {
                out.push(drop_column(&axpy(u, 1.0, l, Relation::Le), col));
            }
        }
    }
    Ok(HalfspaceSystem { variables, rows: out }.canonical())
}

/// Removes rows implied by the others. A row `a.x <= b` is dropped when
/// `max a.x` over the remaining rows is at most `b + REDUNDANCY_TOL`; an
/// unbounded maximum certifies the row as needed.
pub(super) fn remove_redundant(sys: &HalfspaceSystem) -> Result<HalfspaceSystem> {
    let canon = sys.canonical();
    if canon.is_empty()? {
        return Ok(HalfspaceSystem::infeasible(canon.variables));
    }
    let mut rows = canon.rows;
    let mut i = 0;
    while i < rows.len() {
        if rows[i].rel == Relation::Eq {
            i += 1;
            continue;
        }
        let candidate = rows.remove(i);
        let implied = match super::lp::maximize(&candidate.coeffs, &rows)? {
            LpOutcome::Optimal { value, .. } => value <= candidate.rhs + REDUNDANCY_TOL,
            LpOutcome::Unbounded => false,
            // The full system is feasible, so a relaxation of it is too.
            LpOutcome::Infeasible => false,
        };
        if !implied {
            rows.insert(i, candidate);
            i += 1;
        }
    }
    Ok(HalfspaceSystem { variables: canon.variables, rows })
}

#[cfg(test)]
mod tests {
    use crate::polytope::HalfspaceSystem;

    fn boxed() -> HalfspaceSystem {
        let mut s = HalfspaceSystem::with_vars(&["x", "y"]).unwrap();
        s.push_le(&[("x", 1.0)], 1.0).unwrap();
        s.push_le(&[("y", 1.0)], 1.0).unwrap();
        s.push_nonnegativity();
        s
    }

    fn interval(lo: f64, hi: f64) -> HalfspaceSystem {
        let mut s = HalfspaceSystem::with_vars(&["x"]).unwrap();
        s.push_le(&[("x", 1.0)], hi).unwrap();
        s.push_ge(&[("x", 1.0)], lo).unwrap();
        s.canonical()
    }

    #[test]
    fn box_projection() {
        let p = boxed().fme_eliminate("y").unwrap().remove_redundant().unwrap();
        assert_eq!(p, interval(0.0, 1.0));
    }

    #[test]
    fn simplex_shadow() {
        let mut s = HalfspaceSystem::with_vars(&["x", "y"]).unwrap();
        s.push_le(&[("x", 1.0), ("y", 1.0)], 1.0).unwrap();
        s.push_nonnegativity();
        let p = s.fme_eliminate("y").unwrap().remove_redundant().unwrap();
        assert_eq!(p, interval(0.0, 1.0));
    }

    #[test]
    fn equality_substitution() {
        // x = y + z, y <= 1, z <= 2, y,z >= 0: eliminating y then z leaves 0 <= x <= 3.
        let mut s = HalfspaceSystem::with_vars(&["x", "y", "z"]).unwrap();
        s.push_eq(&[("x", 1.0), ("y", -1.0), ("z", -1.0)], 0.0).unwrap();
        s.push_le(&[("y", 1.0)], 1.0).unwrap();
        s.push_le(&[("z", 1.0)], 2.0).unwrap();
        s.push_ge(&[("y", 1.0)], 0.0).unwrap();
        s.push_ge(&[("z", 1.0)], 0.0).unwrap();
        let p = s.project_out(&["y", "z"]).unwrap();
        assert_eq!(p, interval(0.0, 3.0));
    }

    #[test]
    fn empty_projection_keeps_a_contradiction() {
        let mut s = HalfspaceSystem::with_vars(&["x", "y"]).unwrap();
        s.push_le(&[("y", 1.0)], 1.0).unwrap();
        s.push_ge(&[("y", 1.0)], 2.0).unwrap();
        s.push_le(&[("x", 1.0)], 1.0).unwrap();
        let p = s.fme_eliminate("y").unwrap();
        assert!(p.has_contradiction());
        let r = p.remove_redundant().unwrap();
        assert_eq!(r.rows().len(), 1);
        assert!(r.is_empty().unwrap());
    }

    #[test]
    fn dominated_and_duplicate_rows() {
        let mut s = HalfspaceSystem::with_vars(&["x"]).unwrap();
        s.push_le(&[("x", 1.0)], 1.0).unwrap();
        s.push_le(&[("x", 1.0)], 2.0).unwrap();
        let r = s.remove_redundant().unwrap();
        assert_eq!(r.rows().len(), 1);
        assert_eq!(r.rows()[0].rhs, 1.0);

        let mut d = HalfspaceSystem::with_vars(&["x"]).unwrap();
        d.push_le(&[("x", 1.0)], 1.0).unwrap();
        d.push_le(&[("x", 2.0)], 2.0).unwrap();
        assert_eq!(d.remove_redundant().unwrap().rows().len(), 1);
    }

    #[test]
    fn unbounded_rows_are_kept() {
        let mut s = HalfspaceSystem::with_vars(&["x", "y"]).unwrap();
        s.push_le(&[("x", 1.0), ("y", 1.0)], 1.0).unwrap();
        assert_eq!(s.remove_redundant().unwrap().rows().len(), 1);
    }
}
