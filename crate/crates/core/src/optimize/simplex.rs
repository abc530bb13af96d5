//! Dense bounded-variable revised simplex with a two-phase start.
//!
//! Every row `i` gets a slack `s_i` so that `a_i·x + s_i = b_i`; the slack
//! bounds encode the sense (`≤`: `[0, ∞)`, `≥`: `(−∞, 0]`, `=`: `[0, 0]`).
//! Rows whose slack cannot absorb the initial residual receive an
//! artificial variable driven to zero in phase 1. Pricing is Dantzig's rule
//! with lowest-index tie breaking; after a run of degenerate pivots the
//! method switches to Bland's rule until progress resumes.

use super::lp::{Certificate, Lp, LpSolution, LpStatus, Sense, Tolerances};
use super::OptimizeError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tolerances: Tolerances,
    pub presolve: bool,
    /// Pivots between fresh factorizations of the basis.
    pub refactor_every: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub bland_after: usize,
    /// Iteration cap; `0` means `50·(n + m) + 1000`.
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerances: Tolerances::default(),
            presolve: true,
            refactor_every: 64,
            bland_after: 50,
            max_iterations: 0,
        }
    }
}

enum PhaseEnd {
    Optimal,
    Unbounded { entering: usize, dir: f64 },
}

struct Simplex<'o> {
    opts: &'o SolverOptions,
    m: usize,
    cols: Vec<Vec<(usize, f64)>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    b: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    /// Position in `basis`, or `usize::MAX` for nonbasic variables.
    where_basic: Vec<usize>,
    binv: Vec<f64>,
    since_refactor: usize,
    iterations: usize,
    max_iterations: usize,
}

impl<'o> Simplex<'o> {
    fn binv_row(&self, r: usize) -> &[f64] {
        &self.binv[r * self.m..(r + 1) * self.m]
    }

    fn refactor(&mut self) -> Result<(), OptimizeError> {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for (k, &j) in self.basis.iter().enumerate() {
            for &(i, v) in &self.cols[j] {
                a[i * m + k] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let (p, best) = (c..m)
                .map(|r| (r, a[r * m + c].abs()))
                .fold((c, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
            if best < self.opts.tolerances.pivot {
                return Err(OptimizeError::NumericalBreakdown(format!(
                    "singular basis (pivot {best:.3e} in column {c})"
                )));
            }
            if p != c {
                for k in 0..m {
                    a.swap(p * m + k, c * m + k);
                    inv.swap(p * m + k, c * m + k);
                }
            }
            let piv = a[c * m + c];
            for k in 0..m {
                a[c * m + k] /= piv;
                inv[c * m + k] /= piv;
            }
            for r in 0..m {
                if r != c {
                    let f = a[r * m + c];
                    if f != 0.0 {
                        for k in 0..m {
                            a[r * m + k] -= f * a[c * m + k];
                            inv[r * m + k] -= f * inv[c * m + k];
                        }
                    }
                }
            }
        }
        // `inv` now maps row-space to basis positions: x_B = inv · rhs.
        self.binv = inv;
        self.since_refactor = 0;
        self.recompute_basic();
        Ok(())
    }

    fn recompute_basic(&mut self) {
        let mut rhs = self.b.clone();
        for j in 0..self.x.len() {
            if self.where_basic[j] == usize::MAX && self.x[j] != 0.0 {
                for &(i, v) in &self.cols[j] {
                    rhs[i] -= v * self.x[j];
                }
            }
        }
        for r in 0..self.m {
            let val: f64 = self.binv_row(r).iter().zip(&rhs).map(|(a, b)| a * b).sum();
            self.x[self.basis[r]] = val;
        }
    }

    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (r, &j) in self.basis.iter().enumerate() {
            let c = cost[j];
            if c != 0.0 {
                let row = self.binv_row(r);
                for k in 0..m {
                    y[k] += c * row[k];
                }
            }
        }
        y
    }

    fn column(&self, q: usize) -> Vec<f64> {
        let mut alpha = vec![0.0; self.m];
        for (r, a) in alpha.iter_mut().enumerate() {
            let row = self.binv_row(r);
            *a = self.cols[q].iter().map(|&(i, v)| row[i] * v).sum();
        }
        alpha
    }

    fn pivot(&mut self, r: usize, q: usize, alpha: &[f64]) {
        let m = self.m;
        let piv = alpha[r];
        for k in 0..m {
            self.binv[r * m + k] /= piv;
        }
        for i in 0..m {
            if i != r && alpha[i] != 0.0 {
                let f = alpha[i];
                for k in 0..m {
                    self.binv[i * m + k] -= f * self.binv[r * m + k];
                }
            }
        }
        let leaving = self.basis[r];
        self.where_basic[leaving] = usize::MAX;
        self.basis[r] = q;
        self.where_basic[q] = r;
        self.since_refactor += 1;
    }

    fn run(&mut self, cost: &[f64]) -> Result<PhaseEnd, OptimizeError> {
        let tol = self.opts.tolerances;
        let mut degenerate_run = 0usize;
        let mut bland = false;
        loop {
            if self.iterations >= self.max_iterations {
                return Err(OptimizeError::NumericalBreakdown(format!(
                    "iteration limit {} reached",
                    self.max_iterations
                )));
            }
            if self.since_refactor >= self.opts.refactor_every {
                self.refactor()?;
            }
            let y = self.duals(cost);

            // Pricing.
            let mut entering: Option<(usize, f64, f64)> = None; // (var, dir, |d|)
            for j in 0..self.x.len() {
                if self.where_basic[j] != usize::MAX || self.upper[j] - self.lower[j] <= 0.0 {
                    continue;
                }
                let d = cost[j] - self.cols[j].iter().map(|&(i, v)| v * y[i]).sum::<f64>();
                let at_upper = self.upper[j].is_finite() && self.x[j] >= self.upper[j];
                let at_lower = self.lower[j].is_finite() && self.x[j] <= self.lower[j];
                let dir = if d < -tol.reduced_cost && !at_upper {
                    1.0
                } else if d > tol.reduced_cost && !at_lower {
                    -1.0
                } else {
                    continue;
                };
                let better = match entering {
                    None => true,
                    Some((_, _, best)) => !bland && d.abs() > best,
                };
                if better {
                    entering = Some((j, dir, d.abs()));
                }
                if bland && entering.is_some() {
                    break;
                }
            }
            let Some((q, dir, _)) = entering else {
                return Ok(PhaseEnd::Optimal);
            };

            // Ratio test.
            let alpha = self.column(q);
            let mut step = f64::INFINITY;
            let mut leave: Option<(usize, bool)> = None; // (row, to_upper)
            for (r, &a) in alpha.iter().enumerate() {
                let delta = -dir * a; // rate of change of basic var r
                if delta.abs() <= tol.pivot {
                    continue;
                }
                let j = self.basis[r];
                let (limit, to_upper) = if delta < 0.0 {
                    if !self.lower[j].is_finite() {
                        continue;
                    }
                    (((self.x[j] - self.lower[j]) / -delta).max(0.0), false)
                } else {
                    if !self.upper[j].is_finite() {
                        continue;
                    }
                    (((self.upper[j] - self.x[j]) / delta).max(0.0), true)
                };
                let replace = match leave {
                    None => true,
                    Some((lr, _)) => {
                        limit < step - 1e-12
                            || (bland && limit <= step + 1e-12 && j < self.basis[lr])
                    }
                };
                if replace {
                    step = step.min(limit);
                    leave = Some((r, to_upper));
                }
            }
            let flip = self.upper[q] - self.lower[q];
            self.iterations += 1;
            if flip.is_finite() && flip <= step {
                // Bound flip: q moves to its opposite bound, basis unchanged.
                for (r, &a) in alpha.iter().enumerate() {
                    let j = self.basis[r];
                    self.x[j] -= dir * a * flip;
                }
                self.x[q] = if dir > 0.0 { self.upper[q] } else { self.lower[q] };
                degenerate_run = 0;
                bland = false;
                continue;
            }
            let Some((r, to_upper)) = leave else {
                return Ok(PhaseEnd::Unbounded { entering: q, dir });
            };
            for (i, &a) in alpha.iter().enumerate() {
                let j = self.basis[i];
                self.x[j] -= dir * a * step;
            }
            self.x[q] += dir * step;
            let leaving = self.basis[r];
            self.x[leaving] = if to_upper {
                self.upper[leaving]
            } else {
                self.lower[leaving]
            };
            self.pivot(r, q, &alpha);

            if step <= 1e-12 {
                degenerate_run += 1;
                if degenerate_run >= self.opts.bland_after {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
                bland = false;
            }
        }
    }
}

/// Solves `lp` without presolve. Duals and certificates refer to `lp`.
pub(crate) fn simplex(lp: &Lp, opts: &SolverOptions) -> Result<LpSolution, OptimizeError> {
    let n = lp.num_vars();
    let m = lp.num_rows();
    let tol = opts.tolerances;

    let scale: Vec<f64> = lp.rows.iter().map(|r| 1.0 / r.scale()).collect();
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n + 2 * m];
    for (i, row) in lp.rows.iter().enumerate() {
        for &(j, a) in &row.coeffs {
            cols[j].push((i, a * scale[i]));
        }
    }
    let b: Vec<f64> = lp.rows.iter().zip(&scale).map(|(r, s)| r.rhs * s).collect();
    let mut lower = lp.lower.clone();
    let mut upper = lp.upper.clone();
    for row in &lp.rows {
        let (l, u) = match row.sense {
            Sense::Le => (0.0, f64::INFINITY),
            Sense::Ge => (f64::NEG_INFINITY, 0.0),
            Sense::Eq => (0.0, 0.0),
        };
        lower.push(l);
        upper.push(u);
    }
    lower.extend(std::iter::repeat_n(0.0, m));
    upper.extend(std::iter::repeat_n(0.0, m));

    // Structurals start at their lower bound (finite by construction).
    let mut x = vec![0.0; n + 2 * m];
    x[..n].copy_from_slice(&lp.lower);
    let mut basis = Vec::with_capacity(m);
    let mut binv = vec![0.0; m * m];
    let mut artificial_rows = Vec::new();
    for i in 0..m {
        cols[n + i].push((i, 1.0));
        let resid = b[i] - cols_dot_row(&cols[..n], i, &x[..n]);
        let s = n + i;
        if resid >= lower[s] && resid <= upper[s] {
            x[s] = resid;
            basis.push(s);
            binv[i * m + i] = 1.0;
        } else {
            let sigma = if resid >= 0.0 { 1.0 } else { -1.0 };
            let a = n + m + i;
            cols[a].push((i, sigma));
            upper[a] = f64::INFINITY;
            x[a] = resid.abs();
            // slack stays at whichever finite bound is nearest zero
            x[s] = 0.0;
            basis.push(a);
            binv[i * m + i] = sigma;
            artificial_rows.push(i);
        }
    }
    let mut where_basic = vec![usize::MAX; n + 2 * m];
    for (r, &j) in basis.iter().enumerate() {
        where_basic[j] = r;
    }
    let max_iterations = if opts.max_iterations == 0 {
        50 * (n + m) + 1000
    } else {
        opts.max_iterations
    };
    let mut sx = Simplex {
        opts,
        m,
        cols,
        lower,
        upper,
        b,
        x,
        basis,
        where_basic,
        binv,
        since_refactor: 0,
        iterations: 0,
        max_iterations,
    };

    let unscale = |y: Vec<f64>| -> Vec<f64> { y.iter().zip(&scale).map(|(v, s)| v * s).collect() };

    if !artificial_rows.is_empty() {
        let mut c1 = vec![0.0; n + 2 * m];
        for &i in &artificial_rows {
            c1[n + m + i] = 1.0;
        }
        sx.run(&c1)?;
        sx.refactor()?;
        let worst = artificial_rows
            .iter()
            .map(|&i| sx.x[n + m + i].abs())
            .fold(0.0, f64::max);
        if worst > tol.feasibility {
            let y = unscale(sx.duals(&c1));
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: sx.x[..n].to_vec(),
                y: vec![],
                d: vec![],
                objective: f64::NAN,
                certificate: Some(Certificate::Farkas { y }),
                iterations: sx.iterations,
                presolved_vars: n,
            });
        }
        for &i in &artificial_rows {
            let a = n + m + i;
            sx.upper[a] = 0.0;
            if sx.where_basic[a] == usize::MAX {
                sx.x[a] = 0.0;
            }
        }
    }

    let mut c2 = lp.cost.clone();
    c2.extend(std::iter::repeat_n(0.0, 2 * m));
    match sx.run(&c2)? {
        PhaseEnd::Unbounded { entering, dir } => {
            let alpha = sx.column(entering);
            let mut direction = vec![0.0; n];
            if entering < n {
                direction[entering] = dir;
            }
            for (r, &a) in alpha.iter().enumerate() {
                let j = sx.basis[r];
                if j < n {
                    direction[j] = -dir * a;
                }
            }
            Ok(LpSolution {
                status: LpStatus::Unbounded,
                x: sx.x[..n].to_vec(),
                y: vec![],
                d: vec![],
                objective: f64::NEG_INFINITY,
                certificate: Some(Certificate::Ray {
                    point: sx.x[..n].to_vec(),
                    direction,
                }),
                iterations: sx.iterations,
                presolved_vars: n,
            })
        }
        PhaseEnd::Optimal => {
            sx.refactor()?;
            let mut xs = sx.x[..n].to_vec();
            for j in 0..n {
                xs[j] = xs[j].clamp(lp.lower[j], lp.upper[j]);
            }
            let y = unscale(sx.duals(&c2));
            let d = lp.reduced_costs(&y);
            Ok(LpSolution {
                status: LpStatus::Optimal,
                objective: lp.objective(&xs),
                x: xs,
                y,
                d,
                certificate: None,
                iterations: sx.iterations,
                presolved_vars: n,
            })
        }
    }
}

fn cols_dot_row(cols: &[Vec<(usize, f64)>], row: usize, x: &[f64]) -> f64 {
    let mut s = 0.0;
    for (j, col) in cols.iter().enumerate() {
        if x[j] != 0.0 {
            for &(i, v) in col {
                if i == row {
                    s += v * x[j];
                }
            }
        }
    }
    s
}
