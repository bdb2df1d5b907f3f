//! Dense two-phase simplex for the small linear programs of the oracle.

use alloc::vec;
use alloc::vec::Vec;

const EPS: f64 = 1e-11;
const FEASIBILITY_TOL: f64 = 1e-9;
/// Consecutive degenerate pivots before switching to Bland's rule.
const DEGENERATE_LIMIT: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Cmp {
    Le,
    Ge,
    Eq,
}

/// `max objective . x` subject to `rows` and `x >= 0`.
#[derive(Debug, Clone, Default)]
pub(crate) struct Lp {
    pub objective: Vec<f64>,
    pub rows: Vec<(Vec<f64>, Cmp, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal { value: f64, x: Vec<f64> },
    Infeasible,
    Unbounded,
}

struct Tableau {
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.t[i][self.cols]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[row][col];
        for v in self.t[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[row].clone();
        for (i, r) in self.t.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for (v, &pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                r[col] = 0.0;
            }
        }
        self.basis[row] = col;
    }

    /// Runs simplex iterations on the objective row (last row).
    fn optimize(&mut self, allowed: &[bool]) -> bool {
        let m = self.basis.len();
        let mut degenerate = 0;
        for _ in 0..100_000 {
            let obj = &self.t[m];
            let bland = degenerate >= DEGENERATE_LIMIT;
            let mut enter = None;
            let mut best = -EPS;
            for j in 0..self.cols {
                if !allowed[j] || obj[j] >= -EPS {
                    continue;
                }
                if bland {
                    enter = Some(j);
                    break;
                }
                if obj[j] < best {
                    best = obj[j];
                    enter = Some(j);
                }
            }
            let Some(col) = enter else { return true };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = self.t[i][col];
                if a > EPS {
                    let ratio = self.rhs(i) / a;
                    let better = match leave {
                        None => true,
                        Some((k, r)) => ratio < r - 1e-15 || (ratio <= r + 1e-15 && self.basis[i] < self.basis[k]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((row, ratio)) = leave else { return false };
            degenerate = if ratio <= 1e-15 { degenerate + 1 } else { 0 };
            self.pivot(row, col);
        }
        true
    }
}

impl Lp {
    pub fn solve(&self) -> LpOutcome {
        let n = self.objective.len();
        let m = self.rows.len();
        // Normalize to b >= 0, flipping the sense of negated inequalities.
        let rows: Vec<(Vec<f64>, Cmp, f64)> = self
            .rows
            .iter()
            .map(|(coef, cmp, b)| {
                if *b >= 0.0 {
                    (coef.clone(), *cmp, *b)
                } else {
                    let cmp = match cmp {
                        Cmp::Le => Cmp::Ge,
                        Cmp::Ge => Cmp::Le,
                        Cmp::Eq => Cmp::Eq,
                    };
                    (coef.iter().map(|c| -c).collect(), cmp, -b)
                }
            })
            .collect();
        let slack_count = rows.iter().filter(|r| r.1 != Cmp::Eq).count();
        let art_count = rows.iter().filter(|r| r.1 != Cmp::Le).count();
        let cols = n + slack_count + art_count;
        let mut t = vec![vec![0.0; cols + 1]; m + 1];
        let mut basis = vec![0; m];
        let mut is_art = vec![false; cols];
        let (mut s, mut a) = (n, n + slack_count);
        for (i, (coef, cmp, b)) in rows.iter().enumerate() {
            t[i][..coef.len()].copy_from_slice(coef);
            t[i][cols] = *b;
            match cmp {
                Cmp::Le => {
                    t[i][s] = 1.0;
                    basis[i] = s;
                    s += 1;
                }
                Cmp::Ge => {
                    t[i][s] = -1.0;
                    s += 1;
                    t[i][a] = 1.0;
                    is_art[a] = true;
                    basis[i] = a;
                    a += 1;
                }
                Cmp::Eq => {
                    t[i][a] = 1.0;
                    is_art[a] = true;
                    basis[i] = a;
                    a += 1;
                }
            }
        }
        let mut tab = Tableau { t, basis, cols };

        // Phase one: maximize -(sum of artificials).
        for j in 0..cols {
            tab.t[m][j] = if is_art[j] { 1.0 } else { 0.0 };
        }
        tab.t[m][cols] = 0.0;
        for i in 0..m {
            if is_art[tab.basis[i]] {
                for j in 0..=cols {
                    let v = tab.t[i][j];
                    tab.t[m][j] -= v;
                }
            }
        }
        let all = vec![true; cols];
        tab.optimize(&all);
        if tab.t[m][cols] < -FEASIBILITY_TOL {
            return LpOutcome::Infeasible;
        }
        for i in 0..m {
            if is_art[tab.basis[i]] {
                if let Some(j) = (0..cols).find(|&j| !is_art[j] && libm::fabs(tab.t[i][j]) > 1e-9) {
                    tab.pivot(i, j);
                }
            }
        }

        // Phase two.
        for j in 0..=cols {
            tab.t[m][j] = if j < n { -self.objective[j] } else { 0.0 };
        }
        for i in 0..m {
            let b = tab.basis[i];
            let f = tab.t[m][b];
            if f != 0.0 {
                for j in 0..=cols {
                    let v = tab.t[i][j];
                    tab.t[m][j] -= f * v;
                }
            }
        }
        let allowed: Vec<bool> = is_art.iter().map(|&x| !x).collect();
        if !tab.optimize(&allowed) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![0.0; n];
        for i in 0..m {
            if tab.basis[i] < n {
                x[tab.basis[i]] = tab.rhs(i).max(0.0);
            }
        }
        let value = self.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        LpOutcome::Optimal { value, x }
    }
}
