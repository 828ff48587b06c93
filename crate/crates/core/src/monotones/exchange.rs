//! Outer maximization over input distributions by an exchange (cutting
//! plane) method.
//!
//! `g(D) = min_w F_D(w)` is concave in `D`, and every vertex-weight vector
//! `w` yields the affine upper bound `g(D) <= sum_s D_s f_s(w)`. The master
//! problem maximizes the pointwise minimum of the collected cuts, which is a
//! matrix game solved as an LP.

use super::inner::Weighted;
use crate::error::{Error, Result};
use crate::geometry::lp::{self, LpProblem, LpStatus, PivotRule};

/// Mixing toward the barycenter applied before a point is used as a cut,
/// so that every setting keeps a finite divergence.
const CUT_SMOOTHING: f64 = 1e-12;

/// Pooled cuts carried into a new exchange, per face dimension.
const WARM_CUTS_PER_DIM: usize = 4;

#[derive(Debug, Clone)]
pub(crate) struct Cut {
    /// Per-setting divergences at `w`.
    pub f: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct Evaluation {
    pub d: Vec<f64>,
    pub w: Vec<f64>,
    /// `F_D(w)`.
    pub value: f64,
    /// Frank-Wolfe gap of the inner solve.
    pub gap: f64,
}

impl Evaluation {
    /// Certified lower bound on `g(D)`.
    pub fn lower(&self) -> f64 {
        (self.value - self.gap).max(0.0)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct ExchangeOutcome {
    pub best: Evaluation,
    /// Value of the last master problem: an upper bound on the maximum of
    /// `g` over the searched face.
    pub upper: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Linear parametrization `D = M theta` of a face of the input simplex,
/// `M` stored column-major as `dim` columns of length `S`.
pub(crate) struct Face {
    pub columns: Vec<Vec<f64>>,
}

impl Face {
    pub fn full(settings: usize) -> Self {
        Self {
            columns: (0..settings)
                .map(|s| {
                    (0..settings)
                        .map(|t| if s == t { 1.0 } else { 0.0 })
                        .collect()
                })
                .collect(),
        }
    }

    /// `D(x, y) = theta(x) d_y(y)`.
    pub fn alice(s_a: usize, d_y: &[f64]) -> Self {
        let s_b = d_y.len();
        Self {
            columns: (0..s_a)
                .map(|x| {
                    let mut col = vec![0.0; s_a * s_b];
                    col[x * s_b..(x + 1) * s_b].copy_from_slice(d_y);
                    col
                })
                .collect(),
        }
    }

    /// `D(x, y) = d_x(x) theta(y)`.
    pub fn bob(d_x: &[f64], s_b: usize) -> Self {
        let s_a = d_x.len();
        Self {
            columns: (0..s_b)
                .map(|y| {
                    let mut col = vec![0.0; s_a * s_b];
                    for x in 0..s_a {
                        col[x * s_b + y] = d_x[x];
                    }
                    col
                })
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn point(&self, theta: &[f64]) -> Vec<f64> {
        let n = self.columns[0].len();
        let mut d = vec![0.0; n];
        for (col, &t) in self.columns.iter().zip(theta) {
            if t != 0.0 {
                for (dst, c) in d.iter_mut().zip(col) {
                    *dst += t * c;
                }
            }
        }
        let total: f64 = d.iter().sum();
        d.iter_mut().for_each(|v| *v /= total);
        d
    }

    fn restrict(&self, f: &[f64]) -> Vec<f64> {
        self.columns
            .iter()
            .map(|col| col.iter().zip(f).map(|(c, v)| c * v).sum())
            .collect()
    }
}

impl<'a> Weighted<'a> {
    /// Solves the inner problem at `d`, warm-started from `w` smoothed toward
    /// the barycenter.
    pub(crate) fn evaluate(
        &self,
        d: &[f64],
        w: &[f64],
        tol: f64,
        max_fw: usize,
    ) -> Result<Evaluation> {
        let start = self.smoothed(w);
        let sol = self.minimize(d, start, tol, max_fw)?;
        Ok(Evaluation {
            d: d.to_vec(),
            w: sol.w,
            value: sol.value,
            gap: sol.gap,
        })
    }

    pub(crate) fn smoothed(&self, w: &[f64]) -> Vec<f64> {
        let n = w.len() as f64;
        w.iter()
            .map(|v| (1.0 - CUT_SMOOTHING) * v + CUT_SMOOTHING / n)
            .collect()
    }

    pub(crate) fn cut(&self, w: &[f64]) -> Cut {
        let q = self.poly.combine(&self.smoothed(w));
        // Divergences are nonnegative; rounding can push zeros slightly below.
        Cut {
            f: self
                .setting_values(&q)
                .into_iter()
                .map(|v| v.max(0.0))
                .collect(),
        }
    }

    /// Maximizes `g` over the face starting at `theta0`. The pooled `cuts`
    /// tightest at the start point seed the master problem; new cuts are
    /// appended to the pool.
    pub(crate) fn exchange(
        &self,
        face: &Face,
        theta0: &[f64],
        w0: &[f64],
        cuts: &mut Vec<Cut>,
        tol: f64,
        max_rounds: usize,
        max_fw: usize,
    ) -> Result<ExchangeOutcome> {
        let inner_tol = 0.25 * tol;
        let mut theta = theta0.to_vec();
        let mut w = w0.to_vec();
        let mut best: Option<Evaluation> = None;
        let mut upper = f64::INFINITY;
        let mut active = warm_cuts(face, theta0, cuts, WARM_CUTS_PER_DIM * face.dim());
        for round in 1..=max_rounds {
            let d = face.point(&theta);
            let eval = self.evaluate(&d, &w, inner_tol, max_fw)?;
            w = eval.w.clone();
            let cut = self.cut(&eval.w);
            active.push(cut.clone());
            cuts.push(cut);
            if best.as_ref().is_none_or(|b| eval.lower() > b.lower()) {
                best = Some(eval);
            }
            let (value, next) = solve_master(face, &active)?;
            upper = value;
            let lower = best.as_ref().expect("set above").lower();
            if upper - lower <= tol {
                return Ok(ExchangeOutcome {
                    best: best.expect("set"),
                    upper,
                    iterations: round,
                    converged: true,
                });
            }
            theta = next;
        }
        Ok(ExchangeOutcome {
            best: best.expect("at least one round"),
            upper,
            iterations: max_rounds,
            converged: false,
        })
    }
}

fn warm_cuts(face: &Face, theta: &[f64], pool: &[Cut], count: usize) -> Vec<Cut> {
    if pool.len() <= count {
        return pool.to_vec();
    }
    let d = face.point(theta);
    let mut scored: Vec<(f64, usize)> = pool
        .iter()
        .enumerate()
        .map(|(i, c)| (c.f.iter().zip(&d).map(|(f, p)| f * p).sum(), i))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    scored.truncate(count);
    scored.into_iter().map(|(_, i)| pool[i].clone()).collect()
}

/// `max_theta min_j (M^T f_j) . theta` over the simplex.
///
/// With the payoffs shifted to be at least 1, the game value `v` satisfies
/// `1 / v = max sum y  s.t.  A y <= 1, y >= 0`, whose slack basis is
/// feasible; the maximizing `theta` is the normalized dual of that LP.
fn solve_master(face: &Face, cuts: &[Cut]) -> Result<(f64, Vec<f64>)> {
    let dim = face.dim();
    let j_count = cuts.len();
    let payoff: Vec<Vec<f64>> = cuts.iter().map(|c| face.restrict(&c.f)).collect();
    let lowest = payoff
        .iter()
        .flatten()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let shift = 1.0 - lowest;
    let mut problem = LpProblem::new(dim, j_count + dim);
    for (j, row) in payoff.iter().enumerate() {
        for (i, v) in row.iter().enumerate() {
            problem.set(i, j, v + shift);
        }
        problem.c[j] = -1.0;
    }
    for i in 0..dim {
        problem.set(i, j_count + i, 1.0);
        problem.b[i] = 1.0;
    }
    let sol = lp::solve(&problem, PivotRule::Dantzig, 1e-9)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::SolverFailure(format!(
            "master problem is {:?}",
            sol.status
        )));
    }
    let total: f64 = sol.x[..j_count].iter().sum();
    let game = 1.0 / total - shift;
    let mut theta: Vec<f64> = sol.duals.iter().map(|p| (-p).max(0.0)).collect();
    let mass: f64 = theta.iter().sum();
    if mass > 0.0 {
        theta.iter_mut().for_each(|v| *v /= mass);
    } else {
        theta = vec![1.0 / dim as f64; dim];
    }
    let value = payoff
        .iter()
        .map(|row| row.iter().zip(&theta).map(|(a, b)| a * b).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    Ok((value.max(game), theta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn faces_are_products() {
        let face = Face::alice(2, &[0.25, 0.75]);
        assert_eq!(face.point(&[1.0, 0.0]), vec![0.25, 0.75, 0.0, 0.0]);
        let face = Face::bob(&[0.5, 0.5], 2);
        assert_eq!(face.point(&[0.0, 1.0]), vec![0.0, 0.5, 0.0, 0.5]);
    }

    #[test]
    fn master_with_rounding_level_payoffs() {
        let rows = [
            [0.0, 0.4374706433537557],
            [9.188376904333909e-16, 0.3024048194063855],
            [0.14448715192218498, 0.13272474839672316],
            [0.1655789950474753, 0.15427388576403528],
            [2.0931019354079313e-14, 1.1772361818309683e-14],
        ];
        let cuts: Vec<Cut> = rows.iter().map(|r| Cut { f: r.to_vec() }).collect();
        let (v, theta) = solve_master(&Face::full(2), &cuts).unwrap();
        assert!(v.abs() < 1e-12);
        assert!((theta.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn master_of_matching_pennies() {
        let face = Face::full(2);
        let cuts = vec![Cut { f: vec![1.0, 0.0] }, Cut { f: vec![0.0, 1.0] }];
        let (v, theta) = solve_master(&face, &cuts).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        assert!((theta[0] - 0.5).abs() < 1e-12);
    }
}
