//! Min-max over the local polytope,
//! `min_w max_s S(P_s || Q_s(w))`, as the epigraph program
//! `min t  s.t.  f_s(w) <= t,  w >= 0,  sum w = 1`
//! solved by a log-barrier path-following method.
//!
//! The barrier multipliers `1 / (tau (t - f_s))` form an input distribution
//! `D`; a Frank-Wolfe solve of `min_w F_D(w)` then gives a certified lower
//! bound, while `max_s f_s(w)` at any feasible `w` is an upper bound.

use std::f64::consts::LN_2;

use nalgebra::{DMatrix, DVector};

use super::inner::{InnerSolution, Weighted};
use crate::error::{Error, Result};

const MAX_NEWTON_STEPS: usize = 4000;
const TAU_GROWTH: f64 = 8.0;

#[derive(Debug, Clone)]
pub(crate) struct MinMaxSolution {
    /// Vertex weights attaining `upper`.
    pub w: Vec<f64>,
    pub upper: f64,
    pub lower: f64,
    /// Saddle-point input distribution.
    pub d: Vec<f64>,
    pub iterations: usize,
}

struct State {
    w: Vec<f64>,
    t: f64,
    q: Vec<f64>,
    f: Vec<f64>,
}

impl<'a> Weighted<'a> {
    fn state(&self, w: Vec<f64>, t: f64) -> State {
        let q = self.poly.combine(&w);
        let f = self.setting_values(&q);
        State { w, t, q, f }
    }

    fn barrier_value(&self, st: &State, tau: f64) -> f64 {
        let mut phi = tau * st.t;
        for &fs in &st.f {
            let h = st.t - fs;
            if h <= 0.0 || !h.is_finite() {
                return f64::INFINITY;
            }
            phi -= h.ln();
        }
        for &wv in &st.w {
            if wv <= 0.0 {
                return f64::INFINITY;
            }
            phi -= wv.ln();
        }
        phi
    }

    /// One damped Newton step on the barrier at fixed `tau`. Returns the
    /// Newton decrement squared, or `None` if the step could not be taken.
    fn newton_step(&self, st: &mut State, tau: f64) -> Option<f64> {
        let n = self.poly.len();
        let k = self.outcomes();
        let s_count = self.settings();
        let dim = n + 1;
        let h: Vec<f64> = st.f.iter().map(|fs| st.t - fs).collect();

        // Per-(s,k) curvature weights and per-setting gradients of f_s.
        let mut grad = DVector::<f64>::zeros(dim);
        let mut grad_f = vec![0.0; s_count * k];
        for s in 0..s_count {
            for j in 0..k {
                let pj = self.p[s * k + j];
                if pj > 0.0 {
                    grad_f[s * k + j] = -pj / (st.q[s * k + j] * LN_2);
                }
            }
        }
        let mut curvature = vec![0.0; s_count * k];
        for s in 0..s_count {
            for j in 0..k {
                let pj = self.p[s * k + j];
                if pj > 0.0 {
                    let qj = st.q[s * k + j];
                    curvature[s * k + j] = (pj / (LN_2 * qj * qj * h[s])).sqrt();
                }
            }
        }
        let mut b1 = DMatrix::<f64>::zeros(dim, s_count * k);
        let mut b2 = DMatrix::<f64>::zeros(dim, s_count);
        for v in 0..n {
            let hits = self.poly.hits_of(v);
            let mut gv = 0.0;
            for (s, &hh) in hits.iter().enumerate() {
                let idx = s * k + hh as usize;
                b1[(v, idx)] = curvature[idx];
                b2[(v, s)] = grad_f[idx] / h[s];
                gv += grad_f[idx] / h[s];
            }
            grad[v] = gv - 1.0 / st.w[v];
        }
        let mut inv_h_sum = 0.0;
        for s in 0..s_count {
            b2[(n, s)] = -1.0 / h[s];
            inv_h_sum += 1.0 / h[s];
        }
        grad[n] = tau - inv_h_sum;

        let mut hess = &b1 * b1.transpose() + &b2 * b2.transpose();
        for v in 0..n {
            hess[(v, v)] += 1.0 / (st.w[v] * st.w[v]);
        }
        let chol = match hess.clone().cholesky() {
            Some(c) => c,
            None => {
                let ridge = 1e-12 * (0..dim).map(|i| hess[(i, i)]).fold(0.0, f64::max);
                for i in 0..dim {
                    hess[(i, i)] += ridge;
                }
                hess.cholesky()?
            }
        };
        let mut e = DVector::<f64>::zeros(dim);
        for v in 0..n {
            e[v] = 1.0;
        }
        let x1 = chol.solve(&grad);
        let x2 = chol.solve(&e);
        let nu = -e.dot(&x1) / e.dot(&x2);
        let delta = -(x1 + x2 * nu);
        let slope = grad.dot(&delta);
        if !slope.is_finite() || slope >= 0.0 {
            return Some(0.0);
        }
        let decrement = -slope;

        let mut step: f64 = 1.0;
        for v in 0..n {
            if delta[v] < 0.0 {
                step = step.min(-0.99 * st.w[v] / delta[v]);
            }
        }
        let phi0 = self.barrier_value(st, tau);
        while step > 1e-14 {
            let w: Vec<f64> = (0..n).map(|v| st.w[v] + step * delta[v]).collect();
            let trial = self.state(w, st.t + step * delta[n]);
            let phi = self.barrier_value(&trial, tau);
            if phi <= phi0 + 0.25 * step * slope {
                *st = trial;
                return Some(decrement);
            }
            step *= 0.5;
        }
        None
    }

    /// Solves the min-max program to certified gap `tol`.
    pub fn min_max(&self, tol: f64, max_fw_iterations: usize) -> Result<MinMaxSolution> {
        let n = self.poly.len();
        let s_count = self.settings();
        let w0 = self.barycenter();
        let q0 = self.poly.combine(&w0);
        let f0 = self.setting_values(&q0);
        let t0 = f0.iter().copied().fold(0.0, f64::max) + 1.0;
        let mut st = self.state(w0, t0);
        let m = (n + s_count) as f64;
        let mut tau = m / t0.max(1.0);
        let mut newton_steps = 0;
        let mut fw_iterations = 0;
        let mut best: Option<MinMaxSolution> = None;
        loop {
            // Centering.
            loop {
                if newton_steps >= MAX_NEWTON_STEPS {
                    let gap = best.as_ref().map_or(f64::INFINITY, |b| b.upper - b.lower);
                    return Err(Error::NoConvergence {
                        iterations: newton_steps,
                        gap,
                    });
                }
                newton_steps += 1;
                match self.newton_step(&mut st, tau) {
                    Some(dec) if dec / 2.0 > 1e-10 => continue,
                    _ => break,
                }
            }
            if m / tau <= 0.5 * tol || best.is_some() {
                let (candidate, fw) = self.certify(&st, tau, tol, max_fw_iterations)?;
                fw_iterations += fw;
                // Keep the smallest upper and the largest lower bound seen.
                let merged = match best.take() {
                    None => candidate,
                    Some(b) => {
                        let (w, upper) = if candidate.upper < b.upper {
                            (candidate.w, candidate.upper)
                        } else {
                            (b.w, b.upper)
                        };
                        let (d, lower) = if candidate.lower > b.lower {
                            (candidate.d, candidate.lower)
                        } else {
                            (b.d, b.lower)
                        };
                        MinMaxSolution {
                            w,
                            upper,
                            lower,
                            d,
                            iterations: 0,
                        }
                    }
                };
                if merged.upper - merged.lower <= tol {
                    return Ok(MinMaxSolution {
                        iterations: newton_steps + fw_iterations,
                        ..merged
                    });
                }
                best = Some(merged);
            }
            if tau > 1e16 {
                let gap = best.as_ref().map_or(f64::INFINITY, |b| b.upper - b.lower);
                return Err(Error::NoConvergence {
                    iterations: newton_steps,
                    gap,
                });
            }
            tau *= TAU_GROWTH;
        }
    }

    fn certify(
        &self,
        st: &State,
        tau: f64,
        tol: f64,
        max_fw: usize,
    ) -> Result<(MinMaxSolution, usize)> {
        let raw: Vec<f64> = st.f.iter().map(|fs| 1.0 / (tau * (st.t - fs))).collect();
        let total: f64 = raw.iter().sum();
        let d: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let inner: InnerSolution = self.minimize(&d, st.w.clone(), 0.25 * tol, max_fw)?;
        let lower = (inner.value - inner.gap).max(0.0);
        let upper_barrier = st.f.iter().copied().fold(0.0, f64::max);
        let upper_inner = self
            .setting_values(&inner.q)
            .into_iter()
            .fold(0.0, f64::max);
        let (w, upper) = if upper_inner < upper_barrier {
            (inner.w.clone(), upper_inner)
        } else {
            (st.w.clone(), upper_barrier)
        };
        Ok((
            MinMaxSolution {
                w,
                upper,
                lower,
                d,
                iterations: 0,
            },
            inner.iterations,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::{pr_box, Scenario};
    use crate::geometry::{LocalPolytope, DEFAULT_VERTEX_CAP};

    #[test]
    fn pr_box_min_max() {
        let poly = LocalPolytope::new(Scenario::chsh(), DEFAULT_VERTEX_CAP).unwrap();
        let p = pr_box();
        let problem = Weighted {
            poly: &poly,
            p: p.entries(),
        };
        let sol = problem.min_max(1e-7, 100_000).unwrap();
        let exact = (4.0f64 / 3.0).log2();
        assert!(sol.upper - sol.lower <= 1e-7);
        assert!(sol.lower <= exact + 1e-12 && sol.upper >= exact - 1e-12);
        assert!((sol.d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
