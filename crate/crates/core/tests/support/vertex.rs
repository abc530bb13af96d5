//! Brute-force LP oracle: enumerate every basic point, keep the cheapest
//! feasible one.

use nalgebra::{DMatrix, DVector};
use rreh_core::optimize::{Lp, Sense};

/// A constraint `a·x (sense) b` in dense form.
struct Con {
    a: Vec<f64>,
    b: f64,
    sense: Sense,
}

fn constraints(lp: &Lp) -> Vec<Con> {
    let n = lp.num_vars();
    let mut out = Vec::new();
    for r in &lp.rows {
        let mut a = vec![0.0; n];
        for &(j, v) in &r.coeffs {
            a[j] = v;
        }
        out.push(Con { a, b: r.rhs, sense: r.sense });
    }
    for j in 0..n {
        let mut a = vec![0.0; n];
        a[j] = 1.0;
        out.push(Con { a: a.clone(), b: lp.lower[j], sense: Sense::Ge });
        if lp.upper[j].is_finite() {
            out.push(Con { a, b: lp.upper[j], sense: Sense::Le });
        }
    }
    out
}

fn feasible(cons: &[Con], x: &[f64]) -> bool {
    cons.iter().all(|c| {
        let lhs: f64 = c.a.iter().zip(x).map(|(a, v)| a * v).sum();
        let tol = 1e-7 * (1.0 + c.b.abs());
        match c.sense {
            Sense::Le => lhs <= c.b + tol,
            Sense::Ge => lhs >= c.b - tol,
            Sense::Eq => (lhs - c.b).abs() <= tol,
        }
    })
}

fn combinations(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::new(), f);
}

/// Minimum objective over all basic feasible points, or `None` when there is
/// none. Every variable has a finite lower bound, so a nonempty feasible set
/// has a vertex; costs are nonnegative in these programs, so the minimum is
/// attained at one.
pub fn vertex_min(lp: &Lp) -> Option<f64> {
    let n = lp.num_vars();
    if n == 0 {
        let cons = constraints(lp);
        return feasible(&cons, &[]).then_some(lp.offset);
    }
    let cons = constraints(lp);
    let (eq, ineq): (Vec<&Con>, Vec<&Con>) = cons.iter().partition(|c| c.sense == Sense::Eq);
    let eq_rank = if eq.is_empty() {
        0
    } else {
        DMatrix::from_fn(eq.len(), n, |i, j| eq[i].a[j]).rank(1e-10)
    };
    let k = n.saturating_sub(eq_rank);
    let mut best: Option<f64> = None;
    combinations(ineq.len(), k, &mut |pick| {
        let active: Vec<&Con> = eq.iter().copied().chain(pick.iter().map(|&i| ineq[i])).collect();
        let a = DMatrix::from_fn(active.len(), n, |i, j| active[i].a[j]);
        let b = DVector::from_iterator(active.len(), active.iter().map(|c| c.b));
        let svd = a.clone().svd(true, true);
        if svd.rank(1e-10) < n {
            return;
        }
        let Ok(x) = svd.solve(&b, 1e-12) else { return };
        if (&a * &x - &b).amax() > 1e-8 * (1.0 + b.amax()) {
            return;
        }
        let x: Vec<f64> = x.iter().copied().collect();
        if feasible(&cons, &x) {
            let obj = lp.objective(&x);
            best = Some(best.map_or(obj, |v: f64| v.min(obj)));
        }
    });
    best
}
