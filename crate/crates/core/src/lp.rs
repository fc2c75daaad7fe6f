//! Dense primal simplex for `max c·x  s.t.  A x <= b, x >= 0` with `b >= 0`.
//!
//! The origin is feasible, so no phase one is needed. Dantzig's rule is used
//! until a run of degenerate pivots, then Bland's rule, which cannot cycle.

const EPS: f64 = 1e-12;
const DEGENERATE_RUN: usize = 50;

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    /// Dual value of each constraint row.
    pub duals: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

impl LpSolution {
    /// `b·y - c·x` for the given right-hand side.
    pub fn duality_gap(&self, b: &[f64]) -> f64 {
        let dual: f64 = self.duals.iter().zip(b).map(|(y, b)| y * b).sum();
        (dual - self.objective).abs()
    }
}

/// Solves the packing LP. `a` is row-major with `b.len()` rows of
/// `c.len()` entries. Panics if the problem is unbounded, which cannot happen
/// when every variable appears with a positive coefficient in some row.
pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> LpSolution {
    let n = c.len();
    let m = b.len();
    debug_assert!(b.iter().all(|&v| v >= 0.0));
    let mut t: Vec<Vec<f64>> = a.to_vec();
    let mut rhs = b.to_vec();
    let mut d = c.to_vec();
    let mut z = 0.0;
    // variables 0..n are structural, n..n+m are slacks
    let mut col_var: Vec<usize> = (0..n).collect();
    let mut row_var: Vec<usize> = (n..n + m).collect();
    let mut iterations = 0;
    let mut degenerate = 0;
    loop {
        let bland = degenerate >= DEGENERATE_RUN;
        let entering = if bland {
            (0..n).filter(|&j| d[j] > EPS).min_by_key(|&j| col_var[j])
        } else {
            (0..n).filter(|&j| d[j] > EPS).max_by(|&i, &j| d[i].total_cmp(&d[j]).then(col_var[j].cmp(&col_var[i])))
        };
        let Some(k) = entering else { break };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let p = t[i][k];
            if p > EPS {
                let ratio = rhs[i] / p;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        if ratio < best - EPS || (ratio <= best + EPS && row_var[i] < row_var[r]) {
                            Some((i, ratio))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
        }
        let (r, ratio) = leave.expect("packing LP is bounded");
        if ratio <= EPS {
            degenerate += 1;
        } else {
            degenerate = 0;
        }
        pivot(&mut t, &mut rhs, &mut d, &mut z, r, k);
        std::mem::swap(&mut col_var[k], &mut row_var[r]);
        iterations += 1;
    }
    let mut x = vec![0.0; n];
    for (i, &v) in row_var.iter().enumerate() {
        if v < n {
            x[v] = rhs[i].max(0.0);
        }
    }
    let mut duals = vec![0.0; m];
    for (j, &v) in col_var.iter().enumerate() {
        if v >= n {
            duals[v - n] = (-d[j]).max(0.0);
        }
    }
    let objective = c.iter().zip(&x).map(|(c, x)| c * x).sum();
    LpSolution { x, duals, objective, iterations }
}

fn pivot(t: &mut [Vec<f64>], rhs: &mut [f64], d: &mut [f64], z: &mut f64, r: usize, k: usize) {
    let p = t[r][k];
    let pivot_row: Vec<f64> = t[r].iter().map(|v| v / p).collect();
    let br = rhs[r] / p;
    for (i, row) in t.iter_mut().enumerate() {
        if i == r {
            continue;
        }
        let f = row[k];
        if f == 0.0 {
            continue;
        }
        for (v, pr) in row.iter_mut().zip(&pivot_row) {
            *v -= f * pr;
        }
        row[k] = -f / p;
        rhs[i] -= f * br;
        if rhs[i] < 0.0 && rhs[i] > -1e-9 {
            rhs[i] = 0.0;
        }
    }
    let f = d[k];
    for (v, pr) in d.iter_mut().zip(&pivot_row) {
        *v -= f * pr;
    }
    d[k] = -f / p;
    *z += f * br;
    t[r] = pivot_row;
    t[r][k] = 1.0 / p;
    rhs[r] = br;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let sol = maximize(&[3.0, 5.0], &[vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]], &[4.0, 12.0, 18.0]);
        assert!((sol.objective - 36.0).abs() < 1e-12);
        assert!((sol.x[0] - 2.0).abs() < 1e-12 && (sol.x[1] - 6.0).abs() < 1e-12);
        assert!(sol.duality_gap(&[4.0, 12.0, 18.0]) < 1e-12);
    }

    #[test]
    fn zero_objective_stays_at_origin() {
        let sol = maximize(&[0.0, 0.0], &[vec![1.0, 1.0]], &[1.0]);
        assert_eq!(sol.objective, 0.0);
        assert_eq!(sol.iterations, 0);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // many constraints tight at the same vertex
        let mut a = Vec::new();
        let mut b = Vec::new();
        for i in 0..30 {
            let w = 1.0 + i as f64 * 0.01;
            a.push(vec![w, 1.0, 1.0]);
            b.push(0.0);
        }
        a.push(vec![1.0, 1.0, 1.0]);
        b.push(1.0);
        let sol = maximize(&[1.0, 1.0, 1.0], &a, &b);
        assert!(sol.objective.abs() < 1e-12);
    }
}
