//! Fixed-format MPS export, for cross-checking instances with external
//! solvers. Rows and columns get generated names (`R<i>`, `C<j>`) so they fit
//! the eight-character fields.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use super::{LinearProgram, Sense};

fn number(v: f64) -> String {
    let s = format!("{v}");
    if s.len() <= 12 {
        s
    } else {
        format!("{v:.5e}")
    }
}

fn line(out: &mut String, code: &str, name1: &str, name2: &str, value: Option<f64>) {
    let _ = write!(out, " {code:<2} {name1:<8}  {name2:<8}");
    if let Some(v) = value {
        let _ = write!(out, "  {:>12}", number(v));
    }
    out.push('\n');
}

pub fn to_mps_string(lp: &LinearProgram, name: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME          {name}");
    out.push_str("ROWS\n");
    line(&mut out, "N", "COST", "", None);
    for (i, row) in lp.constraints.iter().enumerate() {
        let code = match row.sense {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        };
        line(&mut out, code, &format!("R{i}"), "", None);
    }

    let n = lp.variables.len();
    let mut by_col: Vec<Vec<(String, f64)>> = vec![Vec::new(); n];
    for (j, c) in lp.dense_objective().into_iter().enumerate() {
        if c != 0.0 {
            by_col[j].push(("COST".into(), c));
        }
    }
    for (i, row) in lp.constraints.iter().enumerate() {
        for &(j, a) in &row.coeffs {
            by_col[j].push((format!("R{i}"), a));
        }
    }
    out.push_str("COLUMNS\n");
    for (j, entries) in by_col.iter().enumerate() {
        for (row, v) in entries {
            line(&mut out, "", &format!("C{j}"), row, Some(*v));
        }
    }
    out.push_str("RHS\n");
    for (i, row) in lp.constraints.iter().enumerate() {
        if row.rhs != 0.0 {
            line(&mut out, "", "RHS", &format!("R{i}"), Some(row.rhs));
        }
    }
    out.push_str("BOUNDS\n");
    for (j, v) in lp.variables.iter().enumerate() {
        let col = format!("C{j}");
        match (v.lower.is_finite(), v.upper.is_finite()) {
            (true, true) if v.lower == v.upper => line(&mut out, "FX", "BND", &col, Some(v.lower)),
            (false, false) => line(&mut out, "FR", "BND", &col, None),
            (lo, hi) => {
                if !lo {
                    line(&mut out, "MI", "BND", &col, None);
                } else if v.lower != 0.0 {
                    line(&mut out, "LO", "BND", &col, Some(v.lower));
                }
                if hi {
                    line(&mut out, "UP", "BND", &col, Some(v.upper));
                }
            }
        }
    }
    out.push_str("ENDATA\n");
    out
}

pub fn write_mps(lp: &LinearProgram, name: &str, path: &Path) -> io::Result<()> {
    std::fs::write(path, to_mps_string(lp, name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_problem_layout() {
        let mut lp = LinearProgram::new();
        let x = lp.add_variable("x", 0.0, 4.0);
        let y = lp.add_variable("y", -1.0, f64::INFINITY);
        lp.add_objective(x, 1.5);
        lp.add_constraint(vec![(x, 1.0), (y, 2.0)], Sense::Ge, 3.0);
        let text = to_mps_string(&lp, "demo");
        let expected = "\
NAME          demo
ROWS
 N  COST              
 G  R0                
COLUMNS
    C0        COST               1.5
    C0        R0                   1
    C1        R0                   2
RHS
    RHS       R0                   3
BOUNDS
 UP BND       C0                   4
 LO BND       C1                  -1
ENDATA
";
        assert_eq!(text, expected);
    }
}
