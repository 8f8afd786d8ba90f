//! Reference LP solver: a bounded-variable primal simplex with Bland's rule.
//!
//! Built for correctness at small scale, not speed: the basis inverse is kept
//! dense and pricing scans columns in index order (Bland), which cannot
//! cycle. Two phases; infeasibility is detected through a positive phase-1
//! optimum, unboundedness through a cost-reducing ray in phase 2.
//!
//! Tolerances: primal feasibility 1e-7, reduced cost 1e-9. The iteration cap
//! is 10 * (rows + columns) across both phases. Models beyond the documented
//! nonzero limit are refused; larger solves belong to an external solver.

#![allow(clippy::needless_range_loop)] // dense kernels read clearer with indices

use super::{MipModel, Sense, SolveResult, SolveStatus};
use crate::error::{Error, Result};

pub const FEASIBILITY_TOL: f64 = 1e-7;
pub const REDUCED_COST_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;

/// Documented size limit for the reference solver.
pub const REFERENCE_NONZERO_LIMIT: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq)]
enum State {
    Basic(usize),
    AtLo,
    AtHi,
    /// Nonbasic free variable parked at zero.
    Free,
}

struct Tableau {
    m: usize,
    /// Sparse columns, structural first, then logicals, then artificials.
    cols: Vec<Vec<(usize, f64)>>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    rhs: Vec<f64>,
    state: Vec<State>,
    /// basis[row] = column occupying that row.
    basis: Vec<usize>,
    /// Row-major dense basis inverse.
    binv: Vec<f64>,
    /// Values of basic variables by row.
    xb: Vec<f64>,
    /// Values of nonbasic variables (at a bound or zero).
    xn: Vec<f64>,
    iterations: u64,
}

impl Tableau {
    fn value(&self, j: usize) -> f64 {
        match self.state[j] {
            State::Basic(r) => self.xb[r],
            _ => self.xn[j],
        }
    }

    fn col_dot(&self, y: &[f64], j: usize) -> f64 {
        self.cols[j].iter().map(|&(r, a)| y[r] * a).sum()
    }

    /// d = B^{-1} A_j
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut d = vec![0.0; m];
        for &(r, a) in &self.cols[j] {
            let row = r;
            for i in 0..m {
                d[i] += self.binv[i * m + row] * a;
            }
        }
        d
    }

    fn btran_costs(&self) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for i in 0..m {
            let c = self.cost[self.basis[i]];
            if c != 0.0 {
                for k in 0..m {
                    y[k] += c * self.binv[i * m + k];
                }
            }
        }
        y
    }

    /// Recompute basic values from scratch to shed accumulated drift.
    fn refresh_xb(&mut self) {
        let m = self.m;
        let mut v = self.rhs.clone();
        for (j, col) in self.cols.iter().enumerate() {
            if matches!(self.state[j], State::Basic(_)) {
                continue;
            }
            let x = self.xn[j];
            if x != 0.0 {
                for &(r, a) in col {
                    v[r] -= a * x;
                }
            }
        }
        for i in 0..m {
            let mut acc = 0.0;
            for k in 0..m {
                acc += self.binv[i * m + k] * v[k];
            }
            self.xb[i] = acc;
        }
    }

    /// One phase of bounded primal simplex over columns 0..ncols with the
    /// current `cost`. Returns Optimal or Unbounded (cap handled by caller).
    fn run(&mut self, iteration_cap: u64) -> Result<SolveStatus> {
        let m = self.m;
        let ncols = self.cols.len();
        loop {
            if self.iterations >= iteration_cap {
                return Ok(SolveStatus::IterationLimit);
            }
            self.iterations += 1;
            if self.iterations.is_multiple_of(256) {
                self.refresh_xb();
            }

            let y = self.btran_costs();
            // Bland: lowest-index eligible column enters.
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..ncols {
                match self.state[j] {
                    State::Basic(_) => continue,
                    _ if self.lo[j] == self.hi[j] => continue,
                    State::AtLo => {
                        let z = self.cost[j] - self.col_dot(&y, j);
                        if z < -REDUCED_COST_TOL {
                            entering = Some((j, 1.0));
                            break;
                        }
                    }
                    State::AtHi => {
                        let z = self.cost[j] - self.col_dot(&y, j);
                        if z > REDUCED_COST_TOL {
                            entering = Some((j, -1.0));
                            break;
                        }
                    }
                    State::Free => {
                        let z = self.cost[j] - self.col_dot(&y, j);
                        if z.abs() > REDUCED_COST_TOL {
                            entering = Some((j, if z < 0.0 { 1.0 } else { -1.0 }));
                            break;
                        }
                    }
                }
            }
            let Some((j, dir)) = entering else {
                return Ok(SolveStatus::Optimal);
            };

            let d = self.ftran(j);
            // Own-range limit (bound flip).
            let own_range = if self.lo[j].is_finite() && self.hi[j].is_finite() {
                self.hi[j] - self.lo[j]
            } else {
                f64::INFINITY
            };
            // Blocking basic variable: smallest ratio; Bland tie-break on
            // the smallest column index.
            let mut best_t = f64::INFINITY;
            let mut leaving: Option<(usize, bool)> = None; // (row, leaves_at_lo)
            for i in 0..m {
                let rate = dir * d[i];
                let k = self.basis[i];
                if rate > PIVOT_TOL {
                    if self.lo[k].is_finite() {
                        let t = ((self.xb[i] - self.lo[k]) / rate).max(0.0);
                        if t < best_t - PIVOT_TOL
                            || (t < best_t + PIVOT_TOL
                                && leaving.is_some_and(|(r, _)| k < self.basis[r]))
                        {
                            best_t = t.min(best_t);
                            leaving = Some((i, true));
                        }
                    }
                } else if rate < -PIVOT_TOL
                    && self.hi[k].is_finite() {
                        let t = ((self.hi[k] - self.xb[i]) / -rate).max(0.0);
                        if t < best_t - PIVOT_TOL
                            || (t < best_t + PIVOT_TOL
                                && leaving.is_some_and(|(r, _)| k < self.basis[r]))
                        {
                            best_t = t.min(best_t);
                            leaving = Some((i, false));
                        }
                    }
            }

            if own_range < best_t {
                // Bound flip: the entering variable crosses its range.
                let t = own_range;
                for i in 0..m {
                    self.xb[i] -= dir * d[i] * t;
                }
                self.state[j] = match self.state[j] {
                    State::AtLo => State::AtHi,
                    State::AtHi => State::AtLo,
                    s => s,
                };
                self.xn[j] = if dir > 0.0 { self.hi[j] } else { self.lo[j] };
                continue;
            }

            let Some((r, leaves_at_lo)) = leaving else {
                return Ok(SolveStatus::Unbounded);
            };
            let t = best_t;
            let enter_value = self.xn[j] + dir * t;
            for i in 0..m {
                self.xb[i] -= dir * d[i] * t;
            }
            let k = self.basis[r];
            self.state[k] = if leaves_at_lo { State::AtLo } else { State::AtHi };
            self.xn[k] = if leaves_at_lo { self.lo[k] } else { self.hi[k] };

            // Pivot B^{-1} on row r.
            let piv = d[r];
            if piv.abs() < PIVOT_TOL {
                return Err(Error::solve(
                    "reference simplex hit a degenerate pivot element; model may be ill-conditioned",
                ));
            }
            for i in 0..m {
                if i == r {
                    continue;
                }
                let factor = d[i] / piv;
                if factor != 0.0 {
                    for c in 0..m {
                        self.binv[i * m + c] -= factor * self.binv[r * m + c];
                    }
                }
            }
            for c in 0..m {
                self.binv[r * m + c] /= piv;
            }
            self.basis[r] = j;
            self.state[j] = State::Basic(r);
            self.xb[r] = enter_value;
        }
    }
}

/// Solve a continuous model exactly as documented in the module header.
pub fn solve_reference(model: &MipModel) -> Result<SolveResult> {
    if model.has_integers() {
        return Err(Error::solve(
            "reference solver accepts continuous models only; relax the model first",
        ));
    }
    if model.num_nonzeros() > REFERENCE_NONZERO_LIMIT {
        return Err(Error::solve(format!(
            "model has {} nonzeros, above the reference solver limit of {}; configure an external solver",
            model.num_nonzeros(),
            REFERENCE_NONZERO_LIMIT
        )));
    }
    for v in &model.variables {
        if v.lo > v.hi {
            return Err(Error::model(format!(
                "variable `{}` has empty bound range",
                v.name
            )));
        }
    }

    let n = model.num_variables();
    let m = model.num_constraints();
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (ri, c) in model.constraints.iter().enumerate() {
        for &(ci, a) in &c.coeffs {
            cols[ci].push((ri, a));
        }
    }
    let mut lo: Vec<f64> = model.variables.iter().map(|v| v.lo).collect();
    let mut hi: Vec<f64> = model.variables.iter().map(|v| v.hi).collect();
    let mut state: Vec<State> = model
        .variables
        .iter()
        .map(|v| {
            if v.lo.is_finite() {
                State::AtLo
            } else if v.hi.is_finite() {
                State::AtHi
            } else {
                State::Free
            }
        })
        .collect();
    let mut xn: Vec<f64> = model
        .variables
        .iter()
        .map(|v| {
            if v.lo.is_finite() {
                v.lo
            } else if v.hi.is_finite() {
                v.hi
            } else {
                0.0
            }
        })
        .collect();

    // One logical column per row.
    for (ri, c) in model.constraints.iter().enumerate() {
        cols.push(vec![(ri, 1.0)]);
        let (l, h) = match c.sense {
            Sense::Le => (0.0, f64::INFINITY),
            Sense::Eq => (0.0, 0.0),
            Sense::Ge => (f64::NEG_INFINITY, 0.0),
        };
        lo.push(l);
        hi.push(h);
        state.push(State::AtLo); // placeholder, set below
        xn.push(0.0);
    }

    let rhs: Vec<f64> = model.constraints.iter().map(|c| c.rhs).collect();
    let mut residual = rhs.clone();
    for (j, col) in cols.iter().enumerate().take(n) {
        if xn[j] != 0.0 {
            for &(r, a) in col {
                residual[r] -= a * xn[j];
            }
        }
    }

    let mut basis = Vec::with_capacity(m);
    let mut xb = Vec::with_capacity(m);
    let mut artificials: Vec<usize> = Vec::new();
    for ri in 0..m {
        let logical = n + ri;
        let want = residual[ri];
        if want >= lo[logical] - FEASIBILITY_TOL && want <= hi[logical] + FEASIBILITY_TOL {
            basis.push(logical);
            state[logical] = State::Basic(ri);
            xb.push(want);
        } else {
            let clamped = want.clamp(lo[logical], hi[logical]);
            state[logical] = if clamped == lo[logical] {
                State::AtLo
            } else {
                State::AtHi
            };
            xn[logical] = clamped;
            let gap = want - clamped;
            let art = cols.len();
            cols.push(vec![(ri, gap.signum())]);
            lo.push(0.0);
            hi.push(f64::INFINITY);
            state.push(State::Basic(ri));
            xn.push(0.0);
            basis.push(art);
            xb.push(gap.abs());
            artificials.push(art);
        }
    }

    let mut binv = vec![0.0; m * m];
    for ri in 0..m {
        let j = basis[ri];
        let a = cols[j][0].1;
        binv[ri * m + ri] = 1.0 / a;
    }

    let total_cols = cols.len();
    let mut cost = vec![0.0; total_cols];
    let mut tab = Tableau {
        m,
        cols,
        lo,
        hi,
        cost,
        rhs,
        state,
        basis,
        binv,
        xb,
        xn,
        iterations: 0,
    };

    let cap = 10 * (m as u64 + n as u64);
    let solver_id = "reference-simplex".to_string();

    // Phase 1: drive artificial infeasibility to zero.
    if !artificials.is_empty() {
        for &a in &artificials {
            tab.cost[a] = 1.0;
        }
        let status = tab.run(cap)?;
        let infeas: f64 = artificials.iter().map(|&a| tab.value(a)).sum();
        if status == SolveStatus::IterationLimit {
            return Ok(finish(model, &tab, SolveStatus::IterationLimit, solver_id));
        }
        if infeas > FEASIBILITY_TOL {
            return Ok(finish(model, &tab, SolveStatus::Infeasible, solver_id));
        }
        // Freeze artificials at zero for phase 2.
        for &a in &artificials {
            tab.cost[a] = 0.0;
            tab.hi[a] = 0.0;
            tab.xn[a] = 0.0;
        }
    }

    cost = vec![0.0; total_cols];
    for &(ci, a) in &model.objective {
        cost[ci] = a;
    }
    tab.cost = cost;
    let status = tab.run(cap)?;
    Ok(finish(model, &tab, status, solver_id))
}

fn finish(model: &MipModel, tab: &Tableau, status: SolveStatus, solver_id: String) -> SolveResult {
    let n = model.num_variables();
    let mut values = Vec::with_capacity(n);
    for j in 0..n {
        let mut x = tab.value(j);
        // Snap hairline bound violations introduced by floating point.
        let (l, h) = (model.variables[j].lo, model.variables[j].hi);
        if x < l && x > l - 1e-6 {
            x = l;
        }
        if x > h && x < h + 1e-6 {
            x = h;
        }
        values.push(x);
    }
    let objective = model.objective_value(&values);
    SolveResult {
        status,
        objective,
        values,
        solver_id,
        iterations: tab.iterations,
    }
}
