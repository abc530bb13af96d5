//! Linear programs in the form
//! `minimize c·x + offset  s.t.  a_i·x {≤,≥,=} b_i,  l ≤ x ≤ u`
//! together with optimality and certificate checks.
//!
//! Dual sign convention (minimization): `y_i ≤ 0` on `≤` rows, `y_i ≥ 0`
//! on `≥` rows, free on `=` rows; reduced costs `d = c − Aᵀy`.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    /// Sparse coefficients, sorted by variable, no duplicates, no zeros.
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Largest absolute coefficient, or 1 for an empty row.
    pub fn scale(&self) -> f64 {
        let m = self.coeffs.iter().fold(0.0f64, |m, &(_, a)| m.max(a.abs()));
        if m > 0.0 {
            m
        } else {
            1.0
        }
    }

    /// Amount by which `x` violates the row, after dividing by [`Row::scale`].
    pub fn violation(&self, x: &[f64]) -> f64 {
        let r = (self.activity(x) - self.rhs) / self.scale();
        match self.sense {
            Sense::Le => r.max(0.0),
            Sense::Ge => (-r).max(0.0),
            Sense::Eq => r.abs(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lp {
    pub names: Vec<String>,
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Row>,
    pub offset: f64,
}

impl Lp {
    /// Adds a variable; `lower` must be finite.
    pub fn add_var(&mut self, name: impl Into<String>, cost: f64, lower: f64, upper: f64) -> usize {
        assert!(lower.is_finite(), "variable lower bounds must be finite");
        self.names.push(name.into());
        self.cost.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.names.len() - 1
    }

    /// Adds a row, merging repeated variables and dropping zero coefficients.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coeffs: impl IntoIterator<Item = (usize, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> usize {
        let mut v: Vec<(usize, f64)> = coeffs.into_iter().collect();
        v.sort_by_key(|&(j, _)| j);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(v.len());
        for (j, a) in v {
            assert!(j < self.num_vars(), "row references unknown variable {j}");
            match merged.last_mut() {
                Some((k, b)) if *k == j => *b += a,
                _ => merged.push((j, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        self.rows.push(Row {
            name: name.into(),
            coeffs: merged,
            sense,
            rhs,
        });
        self.rows.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.offset + self.cost.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    /// Column-major copy of the constraint matrix.
    pub fn columns(&self) -> Vec<Vec<(usize, f64)>> {
        let mut cols = vec![Vec::new(); self.num_vars()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                cols[j].push((i, a));
            }
        }
        cols
    }

    /// `c − Aᵀy`.
    pub fn reduced_costs(&self, y: &[f64]) -> Vec<f64> {
        let mut d = self.cost.clone();
        for (row, &yi) in self.rows.iter().zip(y) {
            if yi != 0.0 {
                for &(j, a) in &row.coeffs {
                    d[j] -= a * yi;
                }
            }
        }
        d
    }

    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.rows.iter().map(|r| r.violation(x)).fold(0.0, f64::max)
    }

    pub fn max_bound_violation(&self, x: &[f64]) -> f64 {
        (0..self.num_vars())
            .map(|j| (self.lower[j] - x[j]).max(x[j] - self.upper[j]).max(0.0))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl LpStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
        }
    }
}

/// Proof that a program has no optimum.
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// Row multipliers with `sup_{l≤x≤u} (Aᵀy)·x < b·y`.
    Farkas { y: Vec<f64> },
    /// A feasible point and a direction of unbounded descent.
    Ray { point: Vec<f64>, direction: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    /// Row duals (empty unless optimal).
    pub y: Vec<f64>,
    /// Reduced costs (empty unless optimal).
    pub d: Vec<f64>,
    pub objective: f64,
    pub certificate: Option<Certificate>,
    pub iterations: usize,
    /// Variables left after presolve (equals the original count without it).
    pub presolved_vars: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub feasibility: f64,
    pub reduced_cost: f64,
    pub pivot: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            feasibility: 1e-7,
            reduced_cost: 1e-9,
            pivot: 1e-11,
        }
    }
}

/// Worst-case optimality measures of a claimed optimum.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KktReport {
    /// Scaled row residual.
    pub primal: f64,
    pub bounds: f64,
    /// Wrong-signed row duals.
    pub dual_sign: f64,
    /// Wrong-signed reduced costs given the bound each variable sits at.
    pub reduced_cost: f64,
    pub complementarity: f64,
    /// `|primal − dual| / max(1, |primal|)`.
    pub gap: f64,
}

impl KktReport {
    pub fn passes(&self, tol: &Tolerances, gap_tol: f64) -> bool {
        self.primal <= tol.feasibility
            && self.bounds <= tol.feasibility
            && self.dual_sign <= tol.feasibility
            && self.reduced_cost <= tol.feasibility.max(tol.reduced_cost)
            && self.complementarity <= tol.feasibility
            && self.gap <= gap_tol
    }
}

/// Dual objective `b·y + Σ d_j·(bound at which d_j is attained) + offset`.
pub fn dual_objective(lp: &Lp, y: &[f64], d: &[f64], zero_tol: f64) -> f64 {
    let mut obj = lp.offset + lp.rows.iter().zip(y).map(|(r, yi)| r.rhs * yi).sum::<f64>();
    for j in 0..lp.num_vars() {
        if d[j] > zero_tol {
            obj += d[j] * lp.lower[j];
        } else if d[j] < -zero_tol {
            obj += if lp.upper[j].is_finite() {
                d[j] * lp.upper[j]
            } else {
                f64::NEG_INFINITY
            };
        }
    }
    obj
}

pub fn check_kkt(lp: &Lp, x: &[f64], y: &[f64]) -> KktReport {
    let d = lp.reduced_costs(y);
    let tol = Tolerances::default();
    let mut rep = KktReport {
        primal: lp.max_violation(x),
        bounds: lp.max_bound_violation(x),
        ..Default::default()
    };
    for (row, &yi) in lp.rows.iter().zip(y) {
        let s = row.scale();
        let wrong = match row.sense {
            Sense::Le => yi.max(0.0),
            Sense::Ge => (-yi).max(0.0),
            Sense::Eq => 0.0,
        };
        rep.dual_sign = rep.dual_sign.max(wrong / s);
        let slack = row.rhs - row.activity(x);
        rep.complementarity = rep.complementarity.max((yi * slack).abs());
    }
    for j in 0..lp.num_vars() {
        let span = (1.0f64).max(lp.lower[j].abs());
        let at_lower = x[j] - lp.lower[j] <= tol.feasibility * span;
        let at_upper = lp.upper[j].is_finite() && lp.upper[j] - x[j] <= tol.feasibility * (1.0f64).max(lp.upper[j].abs());
        let wrong = match (at_lower, at_upper) {
            (true, true) => 0.0,
            (true, false) => (-d[j]).max(0.0),
            (false, true) => d[j].max(0.0),
            (false, false) => d[j].abs(),
        };
        rep.reduced_cost = rep.reduced_cost.max(wrong);
        let comp = if d[j] > 0.0 {
            d[j] * (x[j] - lp.lower[j])
        } else if lp.upper[j].is_finite() {
            -d[j] * (lp.upper[j] - x[j])
        } else {
            -d[j] * x[j].abs().max(1.0)
        };
        rep.complementarity = rep.complementarity.max(comp.abs());
    }
    let p = lp.objective(x);
    let dual = dual_objective(lp, y, &d, tol.feasibility);
    rep.gap = (p - dual).abs() / p.abs().max(1.0);
    rep
}

/// Checks a Farkas certificate: sign-consistent `y` whose bound-wise
/// supremum of `(Aᵀy)·x` falls short of `b·y`.
pub fn verify_farkas(lp: &Lp, y: &[f64], tol: f64) -> bool {
    if y.len() != lp.num_rows() {
        return false;
    }
    let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return false;
    }
    for (row, &yi) in lp.rows.iter().zip(y) {
        let ok = match row.sense {
            Sense::Le => yi <= tol * scale,
            Sense::Ge => yi >= -tol * scale,
            Sense::Eq => true,
        };
        if !ok {
            return false;
        }
    }
    let mut g = vec![0.0; lp.num_vars()];
    for (row, &yi) in lp.rows.iter().zip(y) {
        for &(j, a) in &row.coeffs {
            g[j] += a * yi;
        }
    }
    let by: f64 = lp.rows.iter().zip(y).map(|(r, yi)| r.rhs * yi).sum();
    let mut sup = 0.0;
    for j in 0..lp.num_vars() {
        let gj = if g[j].abs() <= tol * scale { 0.0 } else { g[j] };
        if gj > 0.0 {
            if !lp.upper[j].is_finite() {
                return false;
            }
            sup += gj * lp.upper[j];
        } else if gj < 0.0 {
            sup += gj * lp.lower[j];
        }
    }
    sup < by - tol * scale.max(by.abs())
}

/// Checks an unbounded ray: `point` feasible, `direction` keeps every row
/// and bound satisfied for all step lengths and strictly lowers the cost.
pub fn verify_ray(lp: &Lp, point: &[f64], direction: &[f64], tol: f64) -> bool {
    if lp.max_violation(point) > tol || lp.max_bound_violation(point) > tol {
        return false;
    }
    let norm = direction.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if norm == 0.0 {
        return false;
    }
    let r: Vec<f64> = direction.iter().map(|v| v / norm).collect();
    for j in 0..lp.num_vars() {
        if r[j] < -tol || (lp.upper[j].is_finite() && r[j] > tol) {
            return false;
        }
    }
    for row in &lp.rows {
        let a = row.activity(&r) / row.scale();
        let ok = match row.sense {
            Sense::Le => a <= tol,
            Sense::Ge => a >= -tol,
            Sense::Eq => a.abs() <= tol,
        };
        if !ok {
            return false;
        }
    }
    let cr: f64 = lp.cost.iter().zip(&r).map(|(c, v)| c * v).sum();
    cr < -tol
}
