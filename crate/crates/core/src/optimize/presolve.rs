//! Removes empty rows, singleton rows, fixed columns and empty columns, and
//! maps solutions of the reduced program back to the original one.

use super::lp::{Lp, LpSolution, LpStatus, Sense};

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Detected {
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub(crate) struct Presolved {
    pub reduced: Lp,
    /// Original index of each reduced column.
    col_map: Vec<usize>,
    /// Original index of each reduced row.
    row_map: Vec<usize>,
    /// Values of removed columns.
    removed_cols: Vec<(usize, f64)>,
    /// Singleton rows `(row, column, coefficient)` in removal order.
    singletons: Vec<(usize, usize, f64)>,
}

fn at_bound(v: f64, bound: f64) -> bool {
    bound.is_finite() && (v - bound).abs() <= TOL * bound.abs().max(1.0)
}

pub(crate) fn presolve(lp: &Lp) -> Result<Presolved, Detected> {
    let n = lp.num_vars();
    let m = lp.num_rows();
    let mut lower = lp.lower.clone();
    let mut upper = lp.upper.clone();
    let mut col_alive = vec![true; n];
    let mut row_alive = vec![true; m];
    let mut value = vec![0.0; n];
    let mut removed_cols = Vec::new();
    let mut singletons = Vec::new();
    let cols = lp.columns();

    loop {
        let mut changed = false;

        for i in 0..m {
            if !row_alive[i] {
                continue;
            }
            let row = &lp.rows[i];
            let mut rhs = row.rhs;
            let mut live = Vec::new();
            for &(j, a) in &row.coeffs {
                if col_alive[j] {
                    live.push((j, a));
                } else {
                    rhs -= a * value[j];
                }
            }
            let tol = TOL * row.scale().max(rhs.abs()).max(1.0);
            match live.as_slice() {
                [] => {
                    let ok = match row.sense {
                        Sense::Le => 0.0 <= rhs + tol,
                        Sense::Ge => 0.0 >= rhs - tol,
                        Sense::Eq => rhs.abs() <= tol,
                    };
                    if !ok {
                        return Err(Detected::Infeasible);
                    }
                    row_alive[i] = false;
                    changed = true;
                }
                [(j, a)] => {
                    let (j, a) = (*j, *a);
                    let v = rhs / a;
                    let (tighten_lower, tighten_upper) = match (row.sense, a > 0.0) {
                        (Sense::Eq, _) => (true, true),
                        (Sense::Le, true) | (Sense::Ge, false) => (false, true),
                        (Sense::Le, false) | (Sense::Ge, true) => (true, false),
                    };
                    if tighten_lower && v > lower[j] {
                        lower[j] = v;
                    }
                    if tighten_upper && v < upper[j] {
                        upper[j] = v;
                    }
                    if lower[j] > upper[j] {
                        if lower[j] - upper[j] > TOL * lower[j].abs().max(1.0) {
                            return Err(Detected::Infeasible);
                        }
                        upper[j] = lower[j];
                    }
                    singletons.push((i, j, a));
                    row_alive[i] = false;
                    changed = true;
                }
                _ => {}
            }
        }

        for j in 0..n {
            if !col_alive[j] {
                continue;
            }
            let fixed = upper[j] - lower[j] <= 0.0;
            let empty = !cols[j].iter().any(|&(i, _)| row_alive[i]);
            if fixed {
                value[j] = lower[j];
            } else if empty {
                let c = lp.cost[j];
                value[j] = if c < 0.0 {
                    if !upper[j].is_finite() {
                        return Err(Detected::Unbounded);
                    }
                    upper[j]
                } else {
                    lower[j]
                };
            } else {
                continue;
            }
            col_alive[j] = false;
            removed_cols.push((j, value[j]));
            changed = true;
        }

        if !changed {
            break;
        }
    }

    let col_map: Vec<usize> = (0..n).filter(|&j| col_alive[j]).collect();
    let row_map: Vec<usize> = (0..m).filter(|&i| row_alive[i]).collect();
    let mut new_index = vec![usize::MAX; n];
    let mut reduced = Lp::default();
    for &j in &col_map {
        new_index[j] = reduced.add_var(lp.names[j].clone(), lp.cost[j], lower[j], upper[j]);
    }
    reduced.offset = lp.offset + removed_cols.iter().map(|&(j, v)| lp.cost[j] * v).sum::<f64>();
    for &i in &row_map {
        let row = &lp.rows[i];
        let mut rhs = row.rhs;
        let mut coeffs = Vec::new();
        for &(j, a) in &row.coeffs {
            if col_alive[j] {
                coeffs.push((new_index[j], a));
            } else {
                rhs -= a * value[j];
            }
        }
        reduced.add_row(row.name.clone(), coeffs, row.sense, rhs);
    }
    Ok(Presolved {
        reduced,
        col_map,
        row_map,
        removed_cols,
        singletons,
    })
}

impl Presolved {
    /// Lifts an optimal solution of the reduced program to `lp`.
    pub(crate) fn postsolve(&self, lp: &Lp, sol: &LpSolution) -> LpSolution {
        debug_assert_eq!(sol.status, LpStatus::Optimal);
        let mut x = vec![0.0; lp.num_vars()];
        for (k, &j) in self.col_map.iter().enumerate() {
            x[j] = sol.x[k];
        }
        for &(j, v) in &self.removed_cols {
            x[j] = v;
        }
        let mut y = vec![0.0; lp.num_rows()];
        for (k, &i) in self.row_map.iter().enumerate() {
            y[i] = sol.y[k];
        }
        let cols = lp.columns();
        for &(i, j, a) in self.singletons.iter().rev() {
            let d: f64 = lp.cost[j] - cols[j].iter().map(|&(k, v)| v * y[k]).sum::<f64>();
            let row = &lp.rows[i];
            let active = (row.activity(&x) - row.rhs).abs() <= TOL * row.scale().max(row.rhs.abs()).max(1.0);
            if !active || d == 0.0 {
                continue;
            }
            let at_l = at_bound(x[j], lp.lower[j]);
            let at_u = at_bound(x[j], lp.upper[j]);
            let fine = (at_l && at_u) || (at_l && d > 0.0) || (at_u && d < 0.0);
            if !fine {
                let yi = d / a;
                let sign_ok = match row.sense {
                    Sense::Le => yi <= 0.0,
                    Sense::Ge => yi >= 0.0,
                    Sense::Eq => true,
                };
                if sign_ok {
                    y[i] = yi;
                }
            }
        }
        let d = lp.reduced_costs(&y);
        LpSolution {
            status: LpStatus::Optimal,
            objective: lp.objective(&x),
            x,
            y,
            d,
            certificate: None,
            iterations: sol.iterations,
            presolved_vars: self.col_map.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn removes_singletons_and_fixed_columns() {
        let mut lp = Lp::default();
        let a = lp.add_var("a", 1.0, 0.0, f64::INFINITY);
        let b = lp.add_var("b", 1.0, 2.0, 2.0);
        let c = lp.add_var("c", 1.0, 0.0, f64::INFINITY);
        lp.add_row("s", [(a, 2.0)], Sense::Ge, 4.0);
        lp.add_row("t", [(a, 1.0), (b, 1.0), (c, 1.0)], Sense::Ge, 5.0);
        lp.add_row("e", [], Sense::Le, 1.0);
        let p = presolve(&lp).unwrap();
        assert_eq!(p.reduced.num_vars(), 2);
        assert_eq!(p.reduced.num_rows(), 1);
        assert_eq!(p.reduced.lower[0], 2.0);
        assert_eq!(p.reduced.rows[0].rhs, 3.0);
        assert_eq!(p.reduced.offset, 2.0);
    }

    #[test]
    fn detects_contradictions() {
        let mut lp = Lp::default();
        let a = lp.add_var("a", 1.0, 0.0, 1.0);
        lp.add_row("s", [(a, 1.0)], Sense::Ge, 2.0);
        assert_eq!(presolve(&lp).unwrap_err(), Detected::Infeasible);

        let mut lp = Lp::default();
        lp.add_var("a", -1.0, 0.0, f64::INFINITY);
        assert_eq!(presolve(&lp).unwrap_err(), Detected::Unbounded);
    }
}
