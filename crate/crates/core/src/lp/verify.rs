//! KKT check of a claimed optimal solution, computed directly from the
//! problem data and independent of how the solver reached it.

use serde::Serialize;

use super::{LinearProgram, LpSolution, Sense};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalityReport {
    /// Largest row violation after dividing each row by its largest
    /// coefficient, or largest bound violation, whichever is greater.
    pub primal_infeasibility: f64,
    /// Largest sign violation of a row multiplier or reduced cost.
    pub dual_infeasibility: f64,
    /// Largest complementarity product (row slack times multiplier, bound
    /// slack times reduced cost).
    pub complementarity: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `|primal - dual| / (1 + |primal|)`.
    pub duality_gap: f64,
}

impl OptimalityReport {
    pub fn max_violation(&self) -> f64 {
        self.primal_infeasibility
            .max(self.dual_infeasibility)
            .max(self.complementarity)
            .max(self.duality_gap)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_violation() <= tol
    }
}

pub fn verify_optimality(lp: &LinearProgram, solution: &LpSolution) -> OptimalityReport {
    let x = &solution.primal;
    let y = &solution.duals;
    let n = lp.variables.len();
    assert_eq!(x.len(), n, "primal vector length");
    assert_eq!(y.len(), lp.constraints.len(), "dual vector length");

    let mut primal_inf = 0.0_f64;
    let mut dual_inf = 0.0_f64;
    let mut compl = 0.0_f64;
    let mut dual_obj = 0.0;
    let mut reduced = lp.dense_objective();

    for (row, &yi) in lp.constraints.iter().zip(y) {
        let scale = row.coeffs.iter().fold(0.0_f64, |m, &(_, a)| m.max(a.abs()));
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let slack = row.activity(x) - row.rhs;
        let violation = match row.sense {
            Sense::Le => slack.max(0.0),
            Sense::Ge => (-slack).max(0.0),
            Sense::Eq => slack.abs(),
        };
        primal_inf = primal_inf.max(violation / scale);
        let sign_violation = match row.sense {
            Sense::Le => yi.max(0.0),
            Sense::Ge => (-yi).max(0.0),
            Sense::Eq => 0.0,
        };
        dual_inf = dual_inf.max(sign_violation);
        if row.sense != Sense::Eq {
            compl = compl.max((yi * slack).abs() / scale);
        }
        dual_obj += row.rhs * yi;
        for &(j, a) in &row.coeffs {
            reduced[j] -= a * yi;
        }
    }

    for (j, var) in lp.variables.iter().enumerate() {
        let xj = x[j];
        primal_inf = primal_inf
            .max(var.lower - xj)
            .max(xj - var.upper);
        let d = reduced[j];
        if d > 0.0 {
            if var.lower.is_finite() {
                dual_obj += d * var.lower;
                compl = compl.max(d * (xj - var.lower).abs());
            } else {
                dual_inf = dual_inf.max(d);
            }
        } else if d < 0.0 {
            if var.upper.is_finite() {
                dual_obj += d * var.upper;
                compl = compl.max(-d * (var.upper - xj).abs());
            } else {
                dual_inf = dual_inf.max(-d);
            }
        }
    }

    let primal_obj = lp.objective_value(x);
    OptimalityReport {
        primal_infeasibility: primal_inf,
        dual_infeasibility: dual_inf,
        complementarity: compl,
        primal_objective: primal_obj,
        dual_objective: dual_obj,
        duality_gap: (primal_obj - dual_obj).abs() / (1.0 + primal_obj.abs()),
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;

    /// min 2x + 3y  s.t.  x + y >= 4,  x + 3y >= 6,  x, y >= 0.
    /// Optimum at the intersection x = 3, y = 1 with objective 9; the
    /// multipliers solve [1 1; 1 3]' u = [2; 3], i.e. u = (1.5, 0.5).
    fn textbook() -> LinearProgram {
        let mut lp = LinearProgram::new();
        let x = lp.add_variable("x", 0.0, f64::INFINITY);
        let y = lp.add_variable("y", 0.0, f64::INFINITY);
        lp.add_objective(x, 2.0);
        lp.add_objective(y, 3.0);
        lp.add_constraint(vec![(x, 1.0), (y, 1.0)], Sense::Ge, 4.0);
        lp.add_constraint(vec![(x, 1.0), (y, 3.0)], Sense::Ge, 6.0);
        lp
    }

    #[test]
    fn textbook_duals_match_hand_solution() {
        let lp = textbook();
        let sol = solve(&lp).unwrap();
        assert!((sol.objective - 9.0).abs() < 1e-9);
        assert!((sol.primal[0] - 3.0).abs() < 1e-9);
        assert!((sol.primal[1] - 1.0).abs() < 1e-9);
        assert!((sol.duals[0] - 1.5).abs() < 1e-9);
        assert!((sol.duals[1] - 0.5).abs() < 1e-9);
        let report = verify_optimality(&lp, &sol);
        assert!(report.passes(1e-9), "{report:?}");
    }

    #[test]
    fn perturbed_primal_is_detected() {
        let lp = textbook();
        let mut sol = solve(&lp).unwrap();
        sol.primal[0] -= 1.0;
        let report = verify_optimality(&lp, &sol);
        assert!(report.primal_infeasibility > 0.5);
    }

    #[test]
    fn wrong_sign_multiplier_is_detected() {
        let lp = textbook();
        let mut sol = solve(&lp).unwrap();
        sol.duals[0] = -1.0;
        let report = verify_optimality(&lp, &sol);
        assert!(report.dual_infeasibility >= 1.0);
    }
}
