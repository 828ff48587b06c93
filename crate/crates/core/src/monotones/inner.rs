//! Pairwise Frank-Wolfe over local-vertex weights for the weighted
//! divergence `F_D(w) = sum_s D_s S(P_s || Q_s(w))`, where `Q(w)` is the
//! local behavior with vertex weights `w`.

use std::f64::consts::LN_2;

use crate::divergence::kl_unchecked;
use crate::error::{Error, Result};
use crate::geometry::LocalPolytope;

/// Per-setting divergences above this many bits are treated as this value
/// when reported for settings outside the support of `D`.
pub const KL_CEILING: f64 = 60.0;

const RECOMPUTE_EVERY: usize = 64;

/// Vertices lighter than this are not used as away vertices: a pole of the
/// objective can pin such a weight just above zero, which would stall
/// pairwise steps.
const DUST_WEIGHT: f64 = 1e-12;

#[derive(Debug, Clone)]
pub(crate) struct InnerSolution {
    pub w: Vec<f64>,
    pub q: Vec<f64>,
    /// `F_D(w)` at the returned point.
    pub value: f64,
    /// Frank-Wolfe gap: an upper bound on `F_D(w) - min F_D`.
    pub gap: f64,
    pub iterations: usize,
}

/// Problem data shared by every solve on the same behavior.
pub(crate) struct Weighted<'a> {
    pub poly: &'a LocalPolytope,
    pub p: &'a [f64],
}

impl<'a> Weighted<'a> {
    pub fn settings(&self) -> usize {
        self.poly.scenario().settings()
    }

    pub fn outcomes(&self) -> usize {
        self.poly.scenario().outcomes()
    }

    pub fn barycenter(&self) -> Vec<f64> {
        let n = self.poly.len();
        vec![1.0 / n as f64; n]
    }

    /// Unclamped per-setting divergences at `q`.
    pub fn setting_values(&self, q: &[f64]) -> Vec<f64> {
        let k = self.outcomes();
        (0..self.settings())
            .map(|s| kl_unchecked(&self.p[s * k..(s + 1) * k], &q[s * k..(s + 1) * k]))
            .collect()
    }

    pub fn weighted_value(&self, d: &[f64], q: &[f64]) -> f64 {
        let k = self.outcomes();
        let mut total = 0.0;
        for (s, &ds) in d.iter().enumerate() {
            if ds > 0.0 {
                total += ds * kl_unchecked(&self.p[s * k..(s + 1) * k], &q[s * k..(s + 1) * k]);
            }
        }
        total
    }

    /// Gradient of `F_D` with respect to vertex weights.
    pub fn gradient(&self, d: &[f64], q: &[f64], g: &mut [f64]) {
        let k = self.outcomes();
        let s_count = self.settings();
        let mut r = vec![0.0; s_count * k];
        for s in 0..s_count {
            if d[s] <= 0.0 {
                continue;
            }
            for j in 0..k {
                let pj = self.p[s * k + j];
                if pj > 0.0 {
                    r[s * k + j] = if q[s * k + j] > 0.0 {
                        -d[s] * pj / (q[s * k + j] * LN_2)
                    } else {
                        f64::NEG_INFINITY
                    };
                }
            }
        }
        for (v, gv) in g.iter_mut().enumerate() {
            let hits = self.poly.hits_of(v);
            let mut acc = 0.0;
            for (s, &h) in hits.iter().enumerate() {
                acc += r[s * k + h as usize];
            }
            *gv = acc;
        }
    }

    /// Minimizes `F_D` starting from `w0` to Frank-Wolfe gap `tol`.
    pub fn solve(
        &self,
        d: &[f64],
        w0: Vec<f64>,
        tol: f64,
        max_iterations: usize,
    ) -> Result<InnerSolution> {
        let sol = self.minimize(d, w0, tol, max_iterations)?;
        if sol.gap > tol {
            return Err(Error::NoConvergence {
                iterations: sol.iterations,
                gap: sol.gap,
            });
        }
        Ok(sol)
    }

    /// As [`Weighted::solve`], but returns the last iterate with its
    /// (still valid) gap when the iteration budget runs out.
    pub fn minimize(
        &self,
        d: &[f64],
        w0: Vec<f64>,
        tol: f64,
        max_iterations: usize,
    ) -> Result<InnerSolution> {
        let n = self.poly.len();
        let k = self.outcomes();
        let s_count = self.settings();
        let mut w = w0;
        let mut q = self.poly.combine(&w);
        let mut g = vec![0.0; n];
        for it in 0..=max_iterations {
            if it % RECOMPUTE_EVERY == 0 && it > 0 {
                q = self.poly.combine(&w);
            }
            self.gradient(d, &q, &mut g);
            let mut toward = 0;
            let mut away = usize::MAX;
            for v in 0..n {
                if g[v] < g[toward] {
                    toward = v;
                }
                if w[v] > DUST_WEIGHT && (away == usize::MAX || g[v] > g[away]) {
                    away = v;
                }
            }
            let dot: f64 = (0..n).filter(|&v| w[v] > 0.0).map(|v| g[v] * w[v]).sum();
            let gap = (dot - g[toward]).max(0.0);
            if !gap.is_finite() {
                return Err(Error::SolverFailure(
                    "objective is infinite at the current iterate".into(),
                ));
            }
            if gap <= tol || it == max_iterations {
                let q = self.poly.combine(&w);
                let value = self.weighted_value(d, &q);
                return Ok(InnerSolution {
                    w,
                    q,
                    value,
                    gap,
                    iterations: it,
                });
            }
            if away == usize::MAX || toward == away {
                self.frank_wolfe_step(d, toward, &mut w, &mut q);
                continue;
            }
            // Settings where moving mass from `away` to `toward` changes Q.
            let hits_t = self.poly.hits_of(toward);
            let hits_a = self.poly.hits_of(away);
            let mut terms: Vec<(f64, f64, f64, f64, f64)> = Vec::with_capacity(s_count);
            for s in 0..s_count {
                let (kt, ka) = (hits_t[s] as usize, hits_a[s] as usize);
                if kt == ka || d[s] <= 0.0 {
                    continue;
                }
                let (pt, pa) = (self.p[s * k + kt], self.p[s * k + ka]);
                if pt == 0.0 && pa == 0.0 {
                    continue;
                }
                terms.push((d[s] / LN_2, pt, q[s * k + kt], pa, q[s * k + ka]));
            }
            let gamma = line_search(&terms, w[away]);
            if gamma >= w[away] {
                w[toward] += w[away];
                w[away] = 0.0;
            } else {
                w[toward] += gamma;
                w[away] -= gamma;
            }
            let mut drifted = false;
            for s in 0..s_count {
                let (kt, ka) = (hits_t[s] as usize, hits_a[s] as usize);
                if kt != ka {
                    q[s * k + kt] += gamma;
                    q[s * k + ka] -= gamma;
                    drifted |= q[s * k + ka] <= 0.0;
                }
            }
            if drifted {
                q = self.poly.combine(&w);
            }
        }
        unreachable!("the last iteration returns")
    }

    /// `w <- (1 - gamma) w + gamma e_toward` with exact line search.
    fn frank_wolfe_step(&self, d: &[f64], toward: usize, w: &mut [f64], q: &mut [f64]) {
        let k = self.outcomes();
        let hits = self.poly.hits_of(toward);
        let mut terms = Vec::new();
        for (s, &ds) in d.iter().enumerate() {
            if ds <= 0.0 {
                continue;
            }
            for j in 0..k {
                let pj = self.p[s * k + j];
                if pj > 0.0 {
                    terms.push((ds * pj / LN_2, q[s * k + j], hits[s] as usize == j));
                }
            }
        }
        let derivative = |gamma: f64| -> (f64, f64) {
            let (mut d1, mut d2) = (0.0, 0.0);
            for &(c, qj, hit) in &terms {
                let target = if hit { 1.0 } else { 0.0 };
                let denom = (1.0 - gamma) * qj + gamma * target;
                if denom <= 0.0 {
                    return (f64::INFINITY, f64::INFINITY);
                }
                let slope = target - qj;
                d1 -= c * slope / denom;
                d2 += c * slope * slope / (denom * denom);
            }
            (d1, d2)
        };
        let gamma = bracketed_root(derivative, 1.0);
        if gamma <= 0.0 {
            return;
        }
        for (v, wv) in w.iter_mut().enumerate() {
            *wv *= 1.0 - gamma;
            if v == toward {
                *wv += gamma;
            }
        }
        for (s, &h) in hits.iter().enumerate() {
            for j in 0..k {
                let target = if h as usize == j { 1.0 } else { 0.0 };
                q[s * k + j] = (1.0 - gamma) * q[s * k + j] + gamma * target;
            }
        }
    }
}

/// Exact minimizer of the convex one-dimensional restriction
/// `phi(gamma) = -sum c (pt log(qt + gamma) + pa log(qa - gamma))` on `[0, hi]`.
fn line_search(terms: &[(f64, f64, f64, f64, f64)], hi: f64) -> f64 {
    bracketed_root(
        |gamma: f64| -> (f64, f64) {
            let mut d1 = 0.0;
            let mut d2 = 0.0;
            for &(c, pt, qt, pa, qa) in terms {
                if pt > 0.0 {
                    let at = qt + gamma;
                    d1 -= c * pt / at;
                    d2 += c * pt / (at * at);
                }
                if pa > 0.0 {
                    let aa = qa - gamma;
                    if aa <= 0.0 {
                        return (f64::INFINITY, f64::INFINITY);
                    }
                    d1 += c * pa / aa;
                    d2 += c * pa / (aa * aa);
                }
            }
            (d1, d2)
        },
        hi,
    )
}

/// Minimizer on `[0, hi]` of a convex function given its first two
/// derivatives, by safeguarded Newton on the derivative.
fn bracketed_root(derivative: impl Fn(f64) -> (f64, f64), hi: f64) -> f64 {
    if derivative(hi).0 <= 0.0 {
        return hi;
    }
    if derivative(0.0).0 >= 0.0 {
        return 0.0;
    }
    let (mut lo, mut up) = (0.0, hi);
    let mut x = 0.5 * hi;
    for _ in 0..100 {
        let (d1, d2) = derivative(x);
        if d1 > 0.0 {
            up = x;
        } else {
            lo = x;
        }
        if d1 == 0.0 || up - lo <= 1e-16 * hi.max(1e-300) {
            break;
        }
        let newton = x - d1 / d2;
        x = if d2.is_finite() && newton > lo && newton < up {
            newton
        } else {
            0.5 * (lo + up)
        };
    }
    // `lo` always has a finite derivative; `x` may sit on the pole.
    if derivative(x).0.is_finite() {
        x
    } else {
        lo
    }
}
