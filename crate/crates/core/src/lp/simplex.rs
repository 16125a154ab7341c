//! Two-phase bounded-variable revised simplex.
//!
//! Every row `a'x (sense) b` becomes `a'x - r = 0` with a logical variable
//! `r` whose bounds encode the sense, so the starting basis is `-I` and all
//! bounds (structural and logical) are handled by the ratio test instead of
//! extra rows. Phase one minimizes the sum of bound violations of the basic
//! variables; phase two the true objective. Pricing is Dantzig's rule with a
//! fall-back to Bland's rule after a run of degenerate pivots.

use log::debug;

use super::lu::{factorize, LuFactors};
use super::{LinearProgram, LpError, LpSolution, LpStatus, Sense};

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub pivot_tol: f64,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub bland_after: usize,
    pub refactor_interval: usize,
    /// `None` picks a limit proportional to the problem size.
    pub max_iterations: Option<usize>,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-7,
            optimality_tol: 1e-9,
            pivot_tol: 1e-11,
            bland_after: 50,
            refactor_interval: 100,
            max_iterations: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable resting at zero.
    Free,
}

struct Eta {
    pos: usize,
    pivot: f64,
    entries: Vec<(usize, f64)>,
}

enum Ratio {
    Flip(f64),
    Pivot { pos: usize, step: f64, to_upper: bool },
    Unbounded,
}

struct Simplex<'a> {
    opts: &'a SimplexOptions,
    m: usize,
    n: usize,
    // Structural columns in CSC form.
    col_start: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    state: Vec<State>,
    basis: Vec<usize>,
    lu: Option<LuFactors>,
    etas: Vec<Eta>,
    work: Vec<f64>,
    iterations: usize,
    degenerate_run: usize,
}

pub(super) fn solve(lp: &LinearProgram, opts: &SimplexOptions) -> Result<LpSolution, LpError> {
    let mut s = Simplex::new(lp, opts);
    s.run()
}

impl<'a> Simplex<'a> {
    fn new(lp: &LinearProgram, opts: &'a SimplexOptions) -> Self {
        let n = lp.variables.len();
        let m = lp.constraints.len();
        // Build CSC, merging duplicate entries and dropping explicit zeros.
        let mut per_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, row) in lp.constraints.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                if a == 0.0 {
                    continue;
                }
                match per_col[j].last_mut() {
                    Some(last) if last.0 == i => last.1 += a,
                    _ => per_col[j].push((i, a)),
                }
            }
        }
        let mut col_start = Vec::with_capacity(n + 1);
        let mut col_row = Vec::new();
        let mut col_val = Vec::new();
        col_start.push(0);
        for col in &per_col {
            for &(i, a) in col {
                if a != 0.0 {
                    col_row.push(i);
                    col_val.push(a);
                }
            }
            col_start.push(col_row.len());
        }

        let total = n + m;
        let mut lower = Vec::with_capacity(total);
        let mut upper = Vec::with_capacity(total);
        for v in &lp.variables {
            lower.push(v.lower);
            upper.push(v.upper);
        }
        for row in &lp.constraints {
            let (lo, hi) = match row.sense {
                Sense::Le => (f64::NEG_INFINITY, row.rhs),
                Sense::Ge => (row.rhs, f64::INFINITY),
                Sense::Eq => (row.rhs, row.rhs),
            };
            lower.push(lo);
            upper.push(hi);
        }
        let mut cost = lp.dense_objective();
        cost.resize(total, 0.0);

        let mut x = vec![0.0; total];
        let mut state = vec![State::Basic; total];
        for j in 0..n {
            let (lo, hi) = (lower[j], upper[j]);
            if lo.is_finite() {
                x[j] = lo;
                state[j] = State::AtLower;
            } else if hi.is_finite() {
                x[j] = hi;
                state[j] = State::AtUpper;
            } else {
                state[j] = State::Free;
            }
        }
        let basis: Vec<usize> = (n..total).collect();

        Self {
            opts,
            m,
            n,
            col_start,
            col_row,
            col_val,
            lower,
            upper,
            cost,
            x,
            state,
            basis,
            lu: None,
            etas: Vec::new(),
            work: vec![0.0; m.max(1)],
            iterations: 0,
            degenerate_run: 0,
        }
    }

    fn column(&self, j: usize) -> Vec<(usize, f64)> {
        if j < self.n {
            (self.col_start[j]..self.col_start[j + 1])
                .map(|k| (self.col_row[k], self.col_val[k]))
                .collect()
        } else {
            vec![(j - self.n, -1.0)]
        }
    }

    /// `y' a_j` for any column.
    fn dot_column(&self, y: &[f64], j: usize) -> f64 {
        if j < self.n {
            (self.col_start[j]..self.col_start[j + 1])
                .map(|k| y[self.col_row[k]] * self.col_val[k])
                .sum()
        } else {
            -y[j - self.n]
        }
    }

    fn refactor(&mut self) -> Result<(), LpError> {
        self.etas.clear();
        loop {
            let cols: Vec<Vec<(usize, f64)>> = self.basis.iter().map(|&j| self.column(j)).collect();
            let (lu, deficiency) = factorize(self.m, &cols, self.opts.pivot_tol);
            match deficiency {
                None => {
                    self.lu = Some(lu);
                    break;
                }
                Some(def) => {
                    // Swap dependent columns for the logicals of unpivoted rows.
                    debug!("basis repair: {} dependent columns", def.cols.len());
                    for (&pos, &row) in def.cols.iter().zip(&def.rows) {
                        let out = self.basis[pos];
                        self.make_nonbasic(out);
                        let logical = self.n + row;
                        if self.state[logical] == State::Basic {
                            return Err(LpError::NumericalBreakdown {
                                iterations: self.iterations,
                                reason: "basis repair found a basic logical".into(),
                            });
                        }
                        self.basis[pos] = logical;
                        self.state[logical] = State::Basic;
                    }
                }
            }
        }
        self.recompute_basics();
        Ok(())
    }

    /// Park a variable leaving the basis at the bound nearest its value.
    fn make_nonbasic(&mut self, j: usize) {
        let (lo, hi, v) = (self.lower[j], self.upper[j], self.x[j]);
        let (state, value) = match (lo.is_finite(), hi.is_finite()) {
            (true, true) => {
                if (v - lo).abs() <= (hi - v).abs() {
                    (State::AtLower, lo)
                } else {
                    (State::AtUpper, hi)
                }
            }
            (true, false) => (State::AtLower, lo),
            (false, true) => (State::AtUpper, hi),
            (false, false) => (State::Free, 0.0),
        };
        self.state[j] = state;
        self.x[j] = value;
    }

    fn ftran(&mut self, v: &mut [f64]) {
        let lu = self.lu.as_ref().expect("factorized");
        lu.ftran(v, &mut self.work);
        for eta in &self.etas {
            let xp = v[eta.pos] / eta.pivot;
            v[eta.pos] = xp;
            if xp != 0.0 {
                for &(i, a) in &eta.entries {
                    v[i] -= a * xp;
                }
            }
        }
    }

    fn btran(&mut self, c: &mut [f64]) {
        for eta in self.etas.iter().rev() {
            let mut v = c[eta.pos];
            for &(i, a) in &eta.entries {
                v -= a * c[i];
            }
            c[eta.pos] = v / eta.pivot;
        }
        let lu = self.lu.as_ref().expect("factorized");
        lu.btran(c, &mut self.work);
    }

    fn recompute_basics(&mut self) {
        let mut rhs = vec![0.0; self.m];
        for j in 0..self.n {
            if self.state[j] != State::Basic && self.x[j] != 0.0 {
                let xj = self.x[j];
                for k in self.col_start[j]..self.col_start[j + 1] {
                    rhs[self.col_row[k]] -= self.col_val[k] * xj;
                }
            }
        }
        for i in 0..self.m {
            let j = self.n + i;
            if self.state[j] != State::Basic {
                rhs[i] += self.x[j];
            }
        }
        self.ftran(&mut rhs);
        for (p, &j) in self.basis.iter().enumerate() {
            self.x[j] = rhs[p];
        }
    }

    /// Phase-one cost of each basic position, or `None` if primal feasible.
    fn infeasibility_costs(&self) -> Option<Vec<f64>> {
        let tol = self.opts.feasibility_tol;
        let mut any = false;
        let costs = self
            .basis
            .iter()
            .map(|&j| {
                let v = self.x[j];
                if v < self.lower[j] - tol {
                    any = true;
                    -1.0
                } else if v > self.upper[j] + tol {
                    any = true;
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        any.then_some(costs)
    }

    fn price(&self, y: &[f64], phase_one: bool, bland: bool) -> Option<(usize, f64)> {
        let tol = self.opts.optimality_tol;
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.n + self.m {
            let st = self.state[j];
            if st == State::Basic || self.lower[j] == self.upper[j] {
                continue;
            }
            let c = if phase_one { 0.0 } else { self.cost[j] };
            let d = c - self.dot_column(y, j);
            let dir = match st {
                State::AtLower if d < -tol => 1.0,
                State::AtUpper if d > tol => -1.0,
                State::Free if d.abs() > tol => -d.signum(),
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if d.abs() > best_score {
                best_score = d.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    /// Harris two-pass ratio test along `dir * e_q`, basics moving by
    /// `-dir * alpha`.
    fn ratio_test(&self, q: usize, dir: f64, alpha: &[f64], bland: bool) -> Ratio {
        let tol = self.opts.feasibility_tol;
        let ptol = self.opts.pivot_tol;
        // (position, exact ratio, relaxed ratio, to_upper)
        let mut cands: Vec<(usize, f64, f64, bool)> = Vec::new();
        for (p, &a) in alpha.iter().enumerate() {
            if a.abs() <= ptol {
                continue;
            }
            let j = self.basis[p];
            let rate = -dir * a;
            let (v, lo, hi) = (self.x[j], self.lower[j], self.upper[j]);
            let target = if rate > 0.0 {
                if v < lo - tol {
                    Some((lo, false))
                } else if v <= hi + tol && hi.is_finite() {
                    Some((hi, true))
                } else {
                    None
                }
            } else if v > hi + tol {
                Some((hi, true))
            } else if v >= lo - tol && lo.is_finite() {
                Some((lo, false))
            } else {
                None
            };
            if let Some((bound, to_upper)) = target {
                let exact = ((bound - v) / rate).max(0.0);
                let relaxed = ((bound - v) / rate + tol / rate.abs()).max(0.0);
                cands.push((p, exact, relaxed, to_upper));
            }
        }
        let range = self.upper[q] - self.lower[q];

        if cands.is_empty() {
            return if range.is_finite() {
                Ratio::Flip(range)
            } else {
                Ratio::Unbounded
            };
        }

        let chosen = if bland {
            let min = cands.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
            cands
                .iter()
                .filter(|c| c.1 <= min)
                .min_by_key(|c| self.basis[c.0])
                .copied()
                .unwrap()
        } else {
            let bound = cands.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
            cands
                .iter()
                .filter(|c| c.1 <= bound)
                .max_by(|a, b| alpha[a.0].abs().total_cmp(&alpha[b.0].abs()))
                .copied()
                .unwrap()
        };
        if range.is_finite() && range <= chosen.1 {
            return Ratio::Flip(range);
        }
        Ratio::Pivot {
            pos: chosen.0,
            step: chosen.1,
            to_upper: chosen.3,
        }
    }

    fn max_iterations(&self) -> usize {
        self.opts
            .max_iterations
            .unwrap_or(100_000 + 50 * (self.n + self.m))
    }

    fn run(&mut self) -> Result<LpSolution, LpError> {
        if self.m == 0 {
            return self.solve_unconstrained();
        }
        self.refactor()?;
        let limit = self.max_iterations();
        let mut fresh = true;
        loop {
            if self.iterations >= limit {
                return Err(LpError::IterationLimit(limit));
            }
            if self.etas.len() >= self.opts.refactor_interval {
                self.refactor()?;
                fresh = true;
            }
            let phase_costs = self.infeasibility_costs();
            let phase_one = phase_costs.is_some();
            let mut y = match phase_costs {
                Some(c) => c,
                None => self.basis.iter().map(|&j| self.cost[j]).collect(),
            };
            self.btran(&mut y);
            let bland = self.degenerate_run >= self.opts.bland_after;
            let Some((q, dir)) = self.price(&y, phase_one, bland) else {
                if !fresh {
                    // Confirm on a fresh factorization before stopping.
                    self.refactor()?;
                    fresh = true;
                    continue;
                }
                return Ok(if phase_one {
                    LpSolution::infeasible(self.iterations)
                } else {
                    self.optimal_solution(y)
                });
            };

            let mut alpha = self.column_dense(q);
            self.ftran(&mut alpha);
            match self.ratio_test(q, dir, &alpha, bland) {
                Ratio::Unbounded => {
                    if phase_one {
                        return Err(LpError::NumericalBreakdown {
                            iterations: self.iterations,
                            reason: "unbounded ray while minimizing infeasibility".into(),
                        });
                    }
                    if !fresh {
                        self.refactor()?;
                        fresh = true;
                        continue;
                    }
                    return Ok(LpSolution::unbounded(self.iterations));
                }
                Ratio::Flip(step) => {
                    self.move_along(q, dir, step, &alpha);
                    let (st, v) = if dir > 0.0 {
                        (State::AtUpper, self.upper[q])
                    } else {
                        (State::AtLower, self.lower[q])
                    };
                    self.state[q] = st;
                    self.x[q] = v;
                    self.note_step(step);
                }
                Ratio::Pivot { pos, step, to_upper } => {
                    let pivot = alpha[pos];
                    if pivot.abs() < 1e-9 && !fresh {
                        // Suspicious pivot on an aged factorization.
                        self.refactor()?;
                        fresh = true;
                        continue;
                    }
                    self.move_along(q, dir, step, &alpha);
                    let leaving = self.basis[pos];
                    if to_upper {
                        self.state[leaving] = State::AtUpper;
                        self.x[leaving] = self.upper[leaving];
                    } else {
                        self.state[leaving] = State::AtLower;
                        self.x[leaving] = self.lower[leaving];
                    }
                    self.basis[pos] = q;
                    self.state[q] = State::Basic;
                    let entries = alpha
                        .iter()
                        .enumerate()
                        .filter(|&(i, &a)| i != pos && a != 0.0)
                        .map(|(i, &a)| (i, a))
                        .collect();
                    self.etas.push(Eta {
                        pos,
                        pivot,
                        entries,
                    });
                    fresh = false;
                    self.note_step(step);
                }
            }
            self.iterations += 1;
        }
    }

    fn note_step(&mut self, step: f64) {
        if step <= 1e-12 {
            self.degenerate_run += 1;
        } else {
            self.degenerate_run = 0;
        }
    }

    fn column_dense(&self, j: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.m];
        if j < self.n {
            for k in self.col_start[j]..self.col_start[j + 1] {
                v[self.col_row[k]] = self.col_val[k];
            }
        } else {
            v[j - self.n] = -1.0;
        }
        v
    }

    fn move_along(&mut self, q: usize, dir: f64, step: f64, alpha: &[f64]) {
        if step == 0.0 {
            return;
        }
        self.x[q] += dir * step;
        for (p, &a) in alpha.iter().enumerate() {
            if a != 0.0 {
                let j = self.basis[p];
                self.x[j] -= dir * step * a;
            }
        }
    }

    fn optimal_solution(&self, y: Vec<f64>) -> LpSolution {
        let primal: Vec<f64> = (0..self.n)
            // Adding zero turns -0.0 into 0.0.
            .map(|j| self.x[j].clamp(self.lower[j], self.upper[j]) + 0.0)
            .collect();
        let objective = (0..self.n).map(|j| self.cost[j] * primal[j]).sum();
        LpSolution {
            status: LpStatus::Optimal,
            objective,
            primal,
            duals: y,
            iterations: self.iterations,
        }
    }

    /// No rows: every variable sits at its cheapest bound.
    fn solve_unconstrained(&self) -> Result<LpSolution, LpError> {
        let mut primal = Vec::with_capacity(self.n);
        for j in 0..self.n {
            let c = self.cost[j];
            let v = if c > 0.0 {
                self.lower[j]
            } else if c < 0.0 {
                self.upper[j]
            } else if self.lower[j].is_finite() {
                self.lower[j]
            } else if self.upper[j].is_finite() {
                self.upper[j]
            } else {
                0.0
            };
            if !v.is_finite() {
                return Ok(LpSolution::unbounded(0));
            }
            primal.push(v);
        }
        let objective = (0..self.n).map(|j| self.cost[j] * primal[j]).sum();
        Ok(LpSolution {
            status: LpStatus::Optimal,
            objective,
            primal,
            duals: Vec::new(),
            iterations: 0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;

    fn one_var(lo: f64, hi: f64, c: f64) -> (LinearProgram, VarId) {
        let mut lp = LinearProgram::new();
        let x = lp.add_variable("x", lo, hi);
        lp.add_objective(x, c);
        (lp, x)
    }

    #[test]
    fn bounded_minimum() {
        let (mut lp, x) = one_var(0.0, f64::INFINITY, 1.0);
        lp.add_constraint(vec![(x, 1.0)], Sense::Ge, 3.0);
        lp.add_constraint(vec![(x, 1.0)], Sense::Le, 10.0);
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 3.0).abs() < 1e-12);
        assert!((sol.duals[0] - 1.0).abs() < 1e-12);
        assert_eq!(sol.duals[1], 0.0);
    }

    #[test]
    fn infeasible_rows() {
        let (mut lp, x) = one_var(0.0, f64::INFINITY, 0.0);
        lp.add_constraint(vec![(x, 1.0)], Sense::Ge, 3.0);
        lp.add_constraint(vec![(x, 1.0)], Sense::Le, 2.0);
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_ray() {
        let (mut lp, x) = one_var(0.0, f64::INFINITY, -1.0);
        lp.add_constraint(vec![(x, 1.0)], Sense::Ge, 0.0);
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Unbounded);
        let (lp, _) = one_var(0.0, f64::INFINITY, -1.0);
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn bound_flip_only() {
        // max x + y with box bounds and a loose row.
        let mut lp = LinearProgram::new();
        let x = lp.add_variable("x", 0.0, 2.0);
        let y = lp.add_variable("y", 1.0, 3.0);
        lp.add_objective(x, -1.0);
        lp.add_objective(y, -1.0);
        lp.add_constraint(vec![(x, 1.0), (y, 1.0)], Sense::Le, 100.0);
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.primal, vec![2.0, 3.0]);
    }

    #[test]
    fn equality_and_negative_lower_bounds() {
        // min x - y  s.t. x + y = 1, x in [-5, 5], y in [-5, 5]
        let mut lp = LinearProgram::new();
        let x = lp.add_variable("x", -5.0, 5.0);
        let y = lp.add_variable("y", -5.0, 5.0);
        lp.add_objective(x, 1.0);
        lp.add_objective(y, -1.0);
        lp.add_constraint(vec![(x, 1.0), (y, 1.0)], Sense::Eq, 1.0);
        let sol = solve(&lp).unwrap();
        assert!((sol.objective + 9.0).abs() < 1e-9);
        assert!((sol.primal[0] + 4.0).abs() < 1e-9);
    }

    #[test]
    fn free_variable() {
        // min |shape| via free x: min t s.t. t >= x - 2, t >= 2 - x
        let mut lp = LinearProgram::new();
        let x = lp.add_variable("x", f64::NEG_INFINITY, f64::INFINITY);
        let t = lp.add_variable("t", 0.0, f64::INFINITY);
        lp.add_objective(t, 1.0);
        lp.add_objective(x, 0.1);
        lp.add_constraint(vec![(t, 1.0), (x, -1.0)], Sense::Ge, -2.0);
        lp.add_constraint(vec![(t, 1.0), (x, 1.0)], Sense::Ge, 2.0);
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        // x pays 0.1 per unit, t pays 1 per unit of |x - 2|: optimum x = 2.
        assert!((sol.primal[0] - 2.0).abs() < 1e-9);
    }
}
