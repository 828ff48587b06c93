//! Dense two-phase tableau simplex for small equality-form LPs.
//!
//! Solves `min c.x  s.t.  A x = b, x >= 0`. Phase one adds one artificial
//! per row; their columns are kept through phase two so that the simplex
//! multipliers (and, on infeasibility, a Farkas vector) can be read off the
//! final reduced costs.

use crate::error::{Error, Result};

/// Entering/leaving variable selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotRule {
    /// Smallest-index rule; never cycles.
    Bland,
    /// Most negative reduced cost. Falls back to Bland after a long run of
    /// degenerate pivots.
    Dantzig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal point (phase-one point when infeasible).
    pub x: Vec<f64>,
    pub objective: f64,
    /// Simplex multipliers `y` with `c - A^T y >= 0` at optimality. When the
    /// problem is infeasible this is a Farkas vector: `A^T y <= 0`, `b.y > 0`.
    pub duals: Vec<f64>,
    /// Optimal phase-one value: the L1 norm of the residual `b - A x`.
    pub infeasibility: f64,
    pub pivots: usize,
}

/// Equality-form LP with a dense row-major constraint matrix.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub rows: usize,
    pub cols: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl LpProblem {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            a: vec![0.0; rows * cols],
            b: vec![0.0; rows],
            c: vec![0.0; cols],
        }
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.a[row * self.cols + col] = value;
    }
}

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-11;
const DEGENERATE_RUN_LIMIT: usize = 64;

struct Tableau {
    m: usize,
    width: usize,
    n_struct: usize,
    t: Vec<f64>,
    basis: Vec<usize>,
    rule: PivotRule,
    pivots: usize,
    degenerate_run: usize,
    /// Columns skipped until the next pivot because their ratio test found
    /// no usable pivot element.
    blocked: Vec<bool>,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.width - 1)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width;
        let inv = 1.0 / self.t[row * w + col];
        for j in 0..w {
            self.t[row * w + j] *= inv;
        }
        self.t[row * w + col] = 1.0;
        let pivot_row: Vec<f64> = self.t[row * w..(row + 1) * w].to_vec();
        for i in 0..=self.m {
            if i == row {
                continue;
            }
            let factor = self.t[i * w + col];
            if factor != 0.0 {
                let dst = &mut self.t[i * w..(i + 1) * w];
                for (d, s) in dst.iter_mut().zip(&pivot_row) {
                    *d -= factor * s;
                }
                dst[col] = 0.0;
            }
        }
        self.basis[row] = col;
        self.pivots += 1;
        self.blocked.iter_mut().for_each(|b| *b = false);
    }

    /// Runs simplex iterations over columns `< allowed`. Returns false when
    /// the problem is unbounded. With `bounded` set (phase one, whose
    /// objective is bounded below), a column without a pivot element is a
    /// rounding artifact and is skipped instead.
    fn run(&mut self, allowed: usize, max_pivots: usize, bounded: bool) -> Result<bool> {
        loop {
            if self.pivots > max_pivots {
                return Err(Error::SolverFailure(format!(
                    "simplex exceeded {max_pivots} pivots"
                )));
            }
            let bland = self.rule == PivotRule::Bland || self.degenerate_run > DEGENERATE_RUN_LIMIT;
            let obj = self.m;
            let mut entering = None;
            if bland {
                entering = (0..allowed).find(|&j| !self.blocked[j] && self.at(obj, j) < -COST_EPS);
            } else {
                let mut best = -COST_EPS;
                for j in 0..allowed {
                    let r = self.at(obj, j);
                    if r < best && !self.blocked[j] {
                        best = r;
                        entering = Some(j);
                    }
                }
            }
            let Some(col) = entering else { return Ok(true) };

            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let coef = self.at(i, col);
                if coef > PIVOT_EPS {
                    let ratio = self.rhs(i).max(0.0) / coef;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((r, best)) => {
                            if ratio < best - 1e-14
                                || (ratio <= best + 1e-14 && self.basis[i] < self.basis[r])
                            {
                                Some((i, ratio))
                            } else {
                                Some((r, best))
                            }
                        }
                    };
                }
            }
            let Some((row, ratio)) = leave else {
                if bounded {
                    self.blocked[col] = true;
                    continue;
                }
                return Ok(false);
            };
            if ratio <= 1e-14 {
                self.degenerate_run += 1;
            } else {
                self.degenerate_run = 0;
            }
            self.pivot(row, col);
        }
    }
}

/// Solves the LP. `feasibility_tol` bounds the accepted phase-one residual.
pub fn solve(problem: &LpProblem, rule: PivotRule, feasibility_tol: f64) -> Result<LpSolution> {
    let m = problem.rows;
    let n = problem.cols;
    if problem.a.len() != m * n || problem.b.len() != m || problem.c.len() != n {
        return Err(Error::SolverFailure("inconsistent LP dimensions".into()));
    }
    let width = n + m + 1;
    let mut t = vec![0.0; (m + 1) * width];
    let mut sign = vec![1.0; m];
    for i in 0..m {
        if problem.b[i] < 0.0 {
            sign[i] = -1.0;
        }
        for j in 0..n {
            t[i * width + j] = sign[i] * problem.a[i * n + j];
        }
        t[i * width + n + i] = 1.0;
        t[i * width + width - 1] = sign[i] * problem.b[i];
    }
    // Phase-one reduced costs: r_j = -sum_i A_ij for structural columns.
    for j in 0..n {
        t[m * width + j] = -(0..m).map(|i| t[i * width + j]).sum::<f64>();
    }
    t[m * width + width - 1] = -(0..m).map(|i| t[i * width + width - 1]).sum::<f64>();

    let mut tab = Tableau {
        m,
        width,
        n_struct: n,
        t,
        basis: (n..n + m).collect(),
        rule,
        pivots: 0,
        degenerate_run: 0,
        blocked: vec![false; width],
    };
    let max_pivots = 200 * (m + n + 10);
    tab.run(n, max_pivots, true)?;

    let infeasibility = -tab.rhs(m);
    let read_x = |tab: &Tableau| {
        let mut x = vec![0.0; n];
        for (i, &bv) in tab.basis.iter().enumerate() {
            if bv < n {
                x[bv] = tab.rhs(i).max(0.0);
            }
        }
        x
    };

    if infeasibility > feasibility_tol {
        // y_f = 1 - r_art in the sign-flipped row space.
        let duals = (0..m).map(|i| sign[i] * (1.0 - tab.at(m, n + i))).collect();
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            x: read_x(&tab),
            objective: f64::NAN,
            duals,
            infeasibility,
            pivots: tab.pivots,
        });
    }

    // Drive zero-level artificials out of the basis where possible.
    for i in 0..m {
        if tab.basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| tab.at(i, j).abs() > 1e-9) {
                tab.pivot(i, j);
            }
        }
    }

    // Phase-two reduced costs from scratch.
    let cb: Vec<f64> = tab
        .basis
        .iter()
        .map(|&bv| if bv < n { problem.c[bv] } else { 0.0 })
        .collect();
    for j in 0..width - 1 {
        let cj = if j < n { problem.c[j] } else { 0.0 };
        let z: f64 = (0..m).map(|i| cb[i] * tab.at(i, j)).sum();
        tab.t[m * width + j] = cj - z;
    }
    tab.t[m * width + width - 1] = -(0..m).map(|i| cb[i] * tab.rhs(i)).sum::<f64>();
    tab.degenerate_run = 0;
    let bounded = tab.run(tab.n_struct, max_pivots, false)?;
    let x = read_x(&tab);
    let duals = (0..m).map(|i| -sign[i] * tab.at(m, n + i)).collect();
    let status = if bounded {
        LpStatus::Optimal
    } else {
        LpStatus::Unbounded
    };
    let objective = problem.c.iter().zip(&x).map(|(c, x)| c * x).sum();
    Ok(LpSolution {
        status,
        x,
        objective,
        duals,
        infeasibility,
        pivots: tab.pivots,
    })
}
