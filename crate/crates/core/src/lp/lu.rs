//! Sparse LU factorization of simplex bases.
//!
//! Right-looking Gaussian elimination with Markowitz pivot selection and a
//! relative threshold test. Row operations are stored as column etas, the
//! upper factor row by row in pivot order, so both solves are simple sweeps.

const THRESHOLD: f64 = 0.01;
const SEARCH_LIMIT: usize = 4;
const NONE: usize = usize::MAX;

#[derive(Debug, Clone)]
struct Step {
    row: usize,
    col: usize,
    pivot: f64,
    /// `(row, multiplier)`: row -= multiplier * pivot row.
    lower: Vec<(usize, f64)>,
    /// `(col, value)` entries of the pivot row in later-pivoted columns.
    upper: Vec<(usize, f64)>,
}

#[derive(Debug, Clone)]
pub(crate) struct LuFactors {
    steps: Vec<Step>,
    dim: usize,
}

/// Columns that could not be pivoted, paired with rows left without a pivot.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Deficiency {
    pub cols: Vec<usize>,
    pub rows: Vec<usize>,
}

/// Intrusive bucket lists keyed by nonzero count.
struct Buckets {
    head: Vec<usize>,
    next: Vec<usize>,
    prev: Vec<usize>,
    count: Vec<usize>,
}

impl Buckets {
    fn new(n: usize) -> Self {
        Self {
            head: vec![NONE; n + 2],
            next: vec![NONE; n],
            prev: vec![NONE; n],
            count: vec![0; n],
        }
    }

    fn insert(&mut self, item: usize, count: usize) {
        let count = count.min(self.head.len() - 1);
        self.count[item] = count;
        let h = self.head[count];
        self.next[item] = h;
        self.prev[item] = NONE;
        if h != NONE {
            self.prev[h] = item;
        }
        self.head[count] = item;
    }

    fn remove(&mut self, item: usize) {
        let (p, n) = (self.prev[item], self.next[item]);
        if p != NONE {
            self.next[p] = n;
        } else {
            self.head[self.count[item]] = n;
        }
        if n != NONE {
            self.prev[n] = p;
        }
        self.next[item] = NONE;
        self.prev[item] = NONE;
    }

    fn update(&mut self, item: usize, count: usize) {
        self.remove(item);
        self.insert(item, count);
    }
}

/// Factor the square matrix whose columns are given as sparse `(row, value)`
/// lists. On structural or numerical singularity the factorization of the
/// pivotable part is returned together with the deficient columns and rows.
pub(crate) fn factorize(
    dim: usize,
    columns: &[Vec<(usize, f64)>],
    abs_tol: f64,
) -> (LuFactors, Option<Deficiency>) {
    debug_assert_eq!(columns.len(), dim);
    let mut cols: Vec<Vec<(usize, f64)>> = columns
        .iter()
        .map(|c| c.iter().copied().filter(|&(_, v)| v != 0.0).collect())
        .collect();
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); dim];
    for (j, col) in cols.iter().enumerate() {
        for &(i, _) in col {
            rows[i].push(j);
        }
    }
    let mut col_buckets = Buckets::new(dim);
    let mut row_buckets = Buckets::new(dim);
    for j in 0..dim {
        col_buckets.insert(j, cols[j].len());
    }
    for i in 0..dim {
        row_buckets.insert(i, rows[i].len());
    }
    let mut col_done = vec![false; dim];
    let mut row_done = vec![false; dim];
    let mut mark = vec![NONE; dim];
    let mut steps = Vec::with_capacity(dim);

    for _ in 0..dim {
        let Some((r, c)) = find_pivot(&cols, &rows, &col_buckets, &row_buckets, dim, abs_tol)
        else {
            break;
        };
        // Pull the pivot column out of the active matrix.
        let col_c = std::mem::take(&mut cols[c]);
        let pivot = col_c.iter().find(|&&(i, _)| i == r).map(|&(_, v)| v).unwrap();
        let lower: Vec<(usize, f64)> = col_c
            .iter()
            .filter(|&&(i, _)| i != r)
            .map(|&(i, v)| (i, v / pivot))
            .collect();
        for &(i, _) in &col_c {
            if let Some(p) = rows[i].iter().position(|&j| j == c) {
                rows[i].swap_remove(p);
            }
        }
        col_buckets.remove(c);
        col_done[c] = true;

        // Pivot row entries in the other active columns.
        let row_r = std::mem::take(&mut rows[r]);
        row_buckets.remove(r);
        row_done[r] = true;
        let mut upper = Vec::with_capacity(row_r.len());
        for &j in &row_r {
            let col = &mut cols[j];
            let p = col.iter().position(|&(i, _)| i == r).unwrap();
            let (_, a_rj) = col.swap_remove(p);
            upper.push((j, a_rj));
            if lower.is_empty() {
                continue;
            }
            for (k, &(i, _)) in col.iter().enumerate() {
                mark[i] = k;
            }
            for &(i, l) in &lower {
                let k = mark[i];
                if k != NONE {
                    col[k].1 -= l * a_rj;
                } else {
                    col.push((i, -l * a_rj));
                    rows[i].push(j);
                }
            }
            for &(i, _) in col.iter() {
                mark[i] = NONE;
            }
        }
        for &(j, _) in &upper {
            col_buckets.update(j, cols[j].len());
        }
        for &(i, _) in &lower {
            row_buckets.update(i, rows[i].len());
        }
        steps.push(Step {
            row: r,
            col: c,
            pivot,
            lower,
            upper,
        });
    }

    let deficiency = if steps.len() < dim {
        Some(Deficiency {
            cols: (0..dim).filter(|&j| !col_done[j]).collect(),
            rows: (0..dim).filter(|&i| !row_done[i]).collect(),
        })
    } else {
        None
    };
    (LuFactors { steps, dim }, deficiency)
}

fn column_max(col: &[(usize, f64)]) -> f64 {
    col.iter().fold(0.0_f64, |m, &(_, v)| m.max(v.abs()))
}

fn find_pivot(
    cols: &[Vec<(usize, f64)>],
    rows: &[Vec<usize>],
    col_buckets: &Buckets,
    row_buckets: &Buckets,
    dim: usize,
    abs_tol: f64,
) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    let mut best_cost = usize::MAX;
    let mut best_mag = 0.0;
    let mut searched = 0;
    let max_count = col_buckets.head.len() - 1;

    let consider = |i: usize, j: usize, v: f64, cost: usize, best: &mut Option<(usize, usize)>,
                        best_cost: &mut usize, best_mag: &mut f64| {
        if cost < *best_cost || (cost == *best_cost && v.abs() > *best_mag) {
            *best = Some((i, j));
            *best_cost = cost;
            *best_mag = v.abs();
        }
    };

    for count in 1..=max_count.min(dim) {
        // Columns with `count` nonzeros.
        let mut j = col_buckets.head[count];
        while j != NONE {
            let col = &cols[j];
            let cmax = column_max(col);
            if cmax > abs_tol {
                for &(i, v) in col {
                    if v.abs() >= THRESHOLD * cmax && v.abs() > abs_tol {
                        let cost = (rows[i].len() - 1) * (count - 1);
                        consider(i, j, v, cost, &mut best, &mut best_cost, &mut best_mag);
                    }
                }
                searched += 1;
            }
            if best.is_some() && (best_cost <= (count - 1) * (count - 1) || searched >= SEARCH_LIMIT) {
                return best;
            }
            j = col_buckets.next[j];
        }
        // Rows with `count` nonzeros.
        let mut i = row_buckets.head[count];
        while i != NONE {
            for &j in &rows[i] {
                let col = &cols[j];
                let Some(&(_, v)) = col.iter().find(|&&(r, _)| r == i) else {
                    continue;
                };
                let cmax = column_max(col);
                if v.abs() >= THRESHOLD * cmax && v.abs() > abs_tol {
                    let cost = (count - 1) * (col.len() - 1);
                    consider(i, j, v, cost, &mut best, &mut best_cost, &mut best_mag);
                }
            }
            searched += 1;
            if best.is_some() && (best_cost <= count * (count - 1) || searched >= SEARCH_LIMIT) {
                return best;
            }
            i = row_buckets.next[i];
        }
    }
    best
}

impl LuFactors {
    /// Solve `B x = b`. `b` is indexed by row and overwritten with `x`
    /// indexed by column.
    pub(crate) fn ftran(&self, b: &mut [f64], work: &mut [f64]) {
        for s in &self.steps {
            let br = b[s.row];
            if br != 0.0 {
                for &(i, l) in &s.lower {
                    b[i] -= l * br;
                }
            }
        }
        work[..self.dim].fill(0.0);
        for s in self.steps.iter().rev() {
            let mut v = b[s.row];
            for &(j, u) in &s.upper {
                v -= u * work[j];
            }
            work[s.col] = v / s.pivot;
        }
        b[..self.dim].copy_from_slice(&work[..self.dim]);
    }

    /// Solve `B' y = c`. `c` is indexed by column and overwritten with `y`
    /// indexed by row.
    pub(crate) fn btran(&self, c: &mut [f64], work: &mut [f64]) {
        work[..self.dim].fill(0.0);
        for s in &self.steps {
            let z = c[s.col] / s.pivot;
            work[s.row] = z;
            if z != 0.0 {
                for &(j, u) in &s.upper {
                    c[j] -= u * z;
                }
            }
        }
        for s in self.steps.iter().rev() {
            let mut z = work[s.row];
            for &(i, l) in &s.lower {
                z -= l * work[i];
            }
            work[s.row] = z;
        }
        c[..self.dim].copy_from_slice(&work[..self.dim]);
    }

}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_to_cols(a: &[Vec<f64>]) -> Vec<Vec<(usize, f64)>> {
        let n = a.len();
        (0..n)
            .map(|j| (0..n).filter(|&i| a[i][j] != 0.0).map(|i| (i, a[i][j])).collect())
            .collect()
    }

    fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        a.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
    }

    #[test]
    fn solves_random_sparse_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..50 {
            let n = 2 + trial % 12;
            let mut a = vec![vec![0.0; n]; n];
            for i in 0..n {
                a[i][i] = rng.gen_range(1.0..3.0);
                for j in 0..n {
                    if i != j && rng.gen_bool(0.25) {
                        a[i][j] = rng.gen_range(-2.0..2.0);
                    }
                }
            }
            let (lu, def) = factorize(n, &dense_to_cols(&a), 1e-11);
            assert!(def.is_none());
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut b = matvec(&a, &x);
            let mut work = vec![0.0; n];
            lu.ftran(&mut b, &mut work);
            for k in 0..n {
                assert!((b[k] - x[k]).abs() < 1e-9, "ftran trial {trial}");
            }
            // transpose solve
            let at: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| a[j][i]).collect()).collect();
            let mut c = matvec(&at, &x);
            lu.btran(&mut c, &mut work);
            for k in 0..n {
                assert!((c[k] - x[k]).abs() < 1e-9, "btran trial {trial}");
            }
        }
    }

    #[test]
    fn reports_singular_columns() {
        // Second and third columns are parallel.
        let a = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 2.0],
            vec![0.0, 1.0, 2.0],
        ];
        let (_, def) = factorize(3, &dense_to_cols(&a), 1e-11);
        let def = def.expect("singular");
        assert_eq!(def.cols.len(), 1);
        assert_eq!(def.rows.len(), 1);
    }
}
