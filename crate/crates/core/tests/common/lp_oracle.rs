//! Reference solvers for small LPs, written independently of the bundled
//! revised simplex: brute-force vertex enumeration and a dense textbook
//! tableau method with Bland's rule.

#![allow(dead_code)]

use rand::Rng;
use repday::lp::{LinearProgram, Sense};

/// Random bounded instance with a known interior point, so it is feasible.
pub fn random_instance<R: Rng>(rng: &mut R, n: usize, m: usize, eq_prob: f64) -> LinearProgram {
    let mut lp = LinearProgram::new();
    let mut x0 = Vec::with_capacity(n);
    let mut vars = Vec::with_capacity(n);
    for j in 0..n {
        let lo: f64 = if rng.gen_bool(0.3) { rng.gen_range(-3.0..0.0) } else { 0.0 };
        let hi = lo + rng.gen_range(0.5..6.0);
        vars.push(lp.add_variable(format!("x{j}"), lo, hi));
        x0.push(rng.gen_range(lo..hi));
        lp.add_objective(vars[j], rng.gen_range(-5.0..5.0));
    }
    for _ in 0..m {
        let coeffs: Vec<_> = vars
            .iter()
            .filter_map(|&v| rng.gen_bool(0.85).then(|| (v, rng.gen_range(-4.0..4.0))))
            .collect();
        let act: f64 = coeffs.iter().map(|&(v, a)| a * x0[v.0]).sum();
        let u: f64 = rng.gen();
        let (sense, rhs) = if u < eq_prob {
            (Sense::Eq, act)
        } else if u < 0.5 + eq_prob / 2.0 {
            (Sense::Le, act + rng.gen_range(0.0..3.0))
        } else {
            (Sense::Ge, act - rng.gen_range(0.0..3.0))
        };
        lp.add_constraint(coeffs, sense, rhs);
    }
    lp
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k].abs() < 1e-10 {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Some(x)
}

fn feasible(lp: &LinearProgram, x: &[f64], tol: f64) -> bool {
    lp.variables
        .iter()
        .zip(x)
        .all(|(v, &xj)| xj >= v.lower - tol && xj <= v.upper + tol)
        && lp.constraints.iter().all(|r| {
            let s = r.activity(x) - r.rhs;
            match r.sense {
                Sense::Le => s <= tol,
                Sense::Ge => s >= -tol,
                Sense::Eq => s.abs() <= tol,
            }
        })
}

/// Minimum objective over all vertices; `None` if no vertex is feasible.
/// Every variable is at a bound or free, and as many rows are tight as
/// there are free variables. Bounds must be finite.
pub fn vertex_enumeration(lp: &LinearProgram) -> Option<f64> {
    let n = lp.variables.len();
    let m = lp.constraints.len();
    let c = lp.dense_objective();
    let mut best: Option<f64> = None;
    // Base-3 code per variable: 0 lower, 1 upper, 2 free.
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut state = Vec::with_capacity(n);
        let mut k = code;
        for _ in 0..n {
            state.push(k % 3);
            k /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&j| state[j] == 2).collect();
        if free.len() > m {
            continue;
        }
        for rows in 0u32..(1 << m) {
            if rows.count_ones() as usize != free.len() {
                continue;
            }
            let tight: Vec<usize> = (0..m).filter(|&i| rows & (1 << i) != 0).collect();
            let mut x: Vec<f64> = (0..n)
                .map(|j| match state[j] {
                    0 => lp.variables[j].lower,
                    1 => lp.variables[j].upper,
                    _ => 0.0,
                })
                .collect();
            if !free.is_empty() {
                let mut a = vec![vec![0.0; free.len()]; free.len()];
                let mut b = vec![0.0; free.len()];
                for (r, &i) in tight.iter().enumerate() {
                    b[r] = lp.constraints[i].rhs;
                    for &(j, v) in &lp.constraints[i].coeffs {
                        if let Some(p) = free.iter().position(|&f| f == j) {
                            a[r][p] += v;
                        } else {
                            b[r] -= v * x[j];
                        }
                    }
                }
                let Some(sol) = solve_dense(a, b) else { continue };
                for (p, &j) in free.iter().enumerate() {
                    x[j] = sol[p];
                }
            }
            if feasible(lp, &x, 1e-9) {
                let obj: f64 = c.iter().zip(&x).map(|(p, q)| p * q).sum();
                best = Some(best.map_or(obj, |b: f64| b.min(obj)));
            }
        }
    }
    best
}

/// Dense standard-form tableau simplex with Bland's rule. Bounds are shifted
/// to zero and upper bounds become explicit rows. Returns the optimal
/// objective, or `None` if infeasible. Assumes a bounded problem.
pub fn tableau_simplex(lp: &LinearProgram) -> Option<f64> {
    let n = lp.variables.len();
    let c = lp.dense_objective();
    let shift: Vec<f64> = lp.variables.iter().map(|v| v.lower).collect();
    let offset: f64 = c.iter().zip(&shift).map(|(a, b)| a * b).sum();

    // Rows as (dense coeffs over structurals, sense, rhs) in shifted space.
    let mut rows: Vec<(Vec<f64>, Sense, f64)> = Vec::new();
    for r in &lp.constraints {
        let mut a = vec![0.0; n];
        for &(j, v) in &r.coeffs {
            a[j] += v;
        }
        let rhs = r.rhs - a.iter().zip(&shift).map(|(p, q)| p * q).sum::<f64>();
        rows.push((a, r.sense, rhs));
    }
    for (j, v) in lp.variables.iter().enumerate() {
        let mut a = vec![0.0; n];
        a[j] = 1.0;
        rows.push((a, Sense::Le, v.upper - v.lower));
    }
    // Normalize to nonnegative rhs.
    for row in &mut rows {
        if row.2 < 0.0 {
            row.0.iter_mut().for_each(|v| *v = -*v);
            row.2 = -row.2;
            row.1 = match row.1 {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
    }
    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Sense::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Sense::Le).count();
    let width = n + n_slack + n_art;
    let mut t = vec![vec![0.0; width + 1]; m];
    let mut basis = vec![0usize; m];
    let (mut s, mut a) = (n, n + n_slack);
    for (i, (coeffs, sense, rhs)) in rows.iter().enumerate() {
        t[i][..n].copy_from_slice(coeffs);
        t[i][width] = *rhs;
        match sense {
            Sense::Le => {
                t[i][s] = 1.0;
                basis[i] = s;
                s += 1;
            }
            Sense::Ge => {
                t[i][s] = -1.0;
                s += 1;
                t[i][a] = 1.0;
                basis[i] = a;
                a += 1;
            }
            Sense::Eq => {
                t[i][a] = 1.0;
                basis[i] = a;
                a += 1;
            }
        }
    }

    let run = |t: &mut Vec<Vec<f64>>, basis: &mut Vec<usize>, cost: &[f64], allowed: usize| {
        loop {
            // Reduced costs d_j = c_j - c_B' B^-1 a_j, read off the tableau.
            let mut entering = None;
            for j in 0..allowed {
                if basis.contains(&j) {
                    continue;
                }
                let d = cost[j] - (0..m).map(|i| cost[basis[i]] * t[i][j]).sum::<f64>();
                if d < -1e-10 {
                    entering = Some(j);
                    break;
                }
            }
            let Some(q) = entering else { return };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                if t[i][q] > 1e-10 {
                    let r = t[i][width] / t[i][q];
                    let better = match leave {
                        None => true,
                        Some((l, lr)) => r < lr - 1e-12 || (r <= lr + 1e-12 && basis[i] < basis[l]),
                    };
                    if better {
                        leave = Some((i, r));
                    }
                }
            }
            let (p, _) = leave.expect("bounded problem");
            let pv = t[p][q];
            t[p].iter_mut().for_each(|v| *v /= pv);
            let prow = t[p].clone();
            for (i, row) in t.iter_mut().enumerate() {
                if i != p && row[q] != 0.0 {
                    let f = row[q];
                    row.iter_mut().zip(&prow).for_each(|(v, pv)| *v -= f * pv);
                }
            }
            basis[p] = q;
        }
    };

    let mut phase1 = vec![0.0; width];
    phase1[n + n_slack..].iter_mut().for_each(|v| *v = 1.0);
    run(&mut t, &mut basis, &phase1, width);
    let infeas: f64 = (0..m).map(|i| phase1[basis[i]] * t[i][width]).sum();
    if infeas > 1e-8 {
        return None;
    }
    // Drive remaining zero-level artificials out where possible.
    for i in 0..m {
        if basis[i] >= n + n_slack {
            if let Some(q) = (0..n + n_slack).find(|&j| t[i][j].abs() > 1e-9 && !basis.contains(&j)) {
                let pv = t[i][q];
                t[i].iter_mut().for_each(|v| *v /= pv);
                let prow = t[i].clone();
                for (k, row) in t.iter_mut().enumerate() {
                    if k != i && row[q] != 0.0 {
                        let f = row[q];
                        row.iter_mut().zip(&prow).for_each(|(v, pv)| *v -= f * pv);
                    }
                }
                basis[i] = q;
            }
        }
    }
    let mut phase2 = vec![0.0; width];
    phase2[..n].copy_from_slice(&c);
    run(&mut t, &mut basis, &phase2, n + n_slack);
    let obj: f64 = (0..m).map(|i| phase2[basis[i]] * t[i][width]).sum();
    Some(obj + offset)
}

fn combinations(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..=n - (k - cur.len()) {
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    if k <= n {
        rec(0, n, k, &mut Vec::with_capacity(k), f);
    }
}

/// Optimal objective from the dual side, for many variables and few rows.
/// The Lagrangian dual g(y) = b.y + sum_j min(d_j l_j, d_j u_j) with
/// d = c - A^T y is concave and piecewise linear; its maximum sits where m
/// of the hyperplanes d_j = 0 and y_i = 0 meet. Each such point inside the
/// sign domain (y <= 0 for <=, y >= 0 for >=) is evaluated. Bounds must be
/// finite and the constraint matrix must have full row rank.
pub fn dual_vertex_enumeration(lp: &LinearProgram) -> Option<f64> {
    let n = lp.variables.len();
    let m = lp.constraints.len();
    let c = lp.dense_objective();
    let mut cols = vec![vec![0.0; m]; n];
    for (i, row) in lp.constraints.iter().enumerate() {
        for &(j, v) in &row.coeffs {
            cols[j][i] += v;
        }
    }
    // Hyperplanes h.y = r: one per column, one per inequality multiplier.
    let mut planes: Vec<(Vec<f64>, f64)> = cols.iter().zip(&c).map(|(a, &cj)| (a.clone(), cj)).collect();
    for (i, row) in lp.constraints.iter().enumerate() {
        if row.sense != Sense::Eq {
            let mut e = vec![0.0; m];
            e[i] = 1.0;
            planes.push((e, 0.0));
        }
    }
    let g = |y: &[f64]| -> f64 {
        let mut v: f64 = lp.constraints.iter().zip(y).map(|(r, yi)| r.rhs * yi).sum();
        for j in 0..n {
            let d = c[j] - cols[j].iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
            let var = &lp.variables[j];
            v += if d >= 0.0 { d * var.lower } else { d * var.upper };
        }
        v
    };
    let in_domain = |y: &[f64]| {
        lp.constraints.iter().zip(y).all(|(r, &yi)| match r.sense {
            Sense::Le => yi <= 1e-9,
            Sense::Ge => yi >= -1e-9,
            Sense::Eq => true,
        })
    };
    let mut best: Option<f64> = None;
    if m == 0 {
        return Some(g(&[]));
    }
    combinations(planes.len(), m, &mut |pick| {
        let a: Vec<Vec<f64>> = pick.iter().map(|&p| planes[p].0.clone()).collect();
        let b: Vec<f64> = pick.iter().map(|&p| planes[p].1).collect();
        if let Some(y) = solve_dense(a, b) {
            if in_domain(&y) {
                let v = g(&y);
                best = Some(best.map_or(v, |b: f64| b.max(v)));
            }
        }
    });
    best
}
