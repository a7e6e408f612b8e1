//! Brute-force minimization of the NSNR over target directions.
//!
//! Works in whitened coordinates `y = Ĉ^{-1/2}s` on the unit sphere and
//! minimizes `1 / ((yᵀQy)(yᵀQ⁻¹y))` by random multistart followed by
//! rotations of `y` inside random 2-planes. Only `Q` and `Q⁻¹` as matrices
//! are used; the extreme eigenvectors of `Q` are never consulted.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::Result;
use crate::metrics::TargetVector;
use crate::randgen::standard_normal_vector;
use crate::spd::{check_dim, SpdMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Random unit directions evaluated before refinement.
    pub n_random: usize,
    /// Cap on plane-rotation refinement steps.
    pub refine_steps: usize,
    /// Relative improvement below which a refinement step counts as stalled.
    pub tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            n_random: 100_000,
            refine_steps: 200,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    /// Smallest NSNR found after refinement.
    pub value: f64,
    /// Smallest NSNR among the random directions alone.
    pub sampled_min: f64,
    /// Target attaining `value`, `s = Ĉ^{1/2} y`.
    pub target: TargetVector,
    pub refine_steps_taken: usize,
}

/// Quadratic forms `yᵀAy` and `yᵀBy` kept in sync with `y` on rotation.
struct Forms<'a> {
    a: &'a DMatrix<f64>,
    b: &'a DMatrix<f64>,
}

impl Forms<'_> {
    fn nsnr(&self, y: &DVector<f64>) -> f64 {
        let yy = y.norm_squared();
        let fa = y.dot(&(self.a * y));
        let fb = y.dot(&(self.b * y));
        (yy / fa) * (yy / fb)
    }
}

/// `t ↦ 1/(F(t)G(t))` along `y cos t + d sin t` with `F(t) = yᵀQy cos² +
/// 2 yᵀQd cos sin + dᵀQd sin²` and `G` likewise for `Q⁻¹`.
struct PlaneObjective {
    f: [f64; 3],
    g: [f64; 3],
}

impl PlaneObjective {
    fn eval(&self, t: f64) -> f64 {
        let (s, c) = t.sin_cos();
        let quad = |k: &[f64; 3]| k[0] * c * c + 2.0 * k[1] * c * s + k[2] * s * s;
        1.0 / (quad(&self.f) * quad(&self.g))
    }

    /// Global minimizer on a grid over `[−π/2, π/2)` followed by golden
    /// section around the best grid point.
    fn minimize(&self) -> (f64, f64) {
        const GRID: usize = 64;
        let h = 2.0 * FRAC_PI_2 / GRID as f64;
        let (mut best_t, mut best_v) = (0.0, self.eval(0.0));
        for k in 0..GRID {
            let t = -FRAC_PI_2 + k as f64 * h;
            let v = self.eval(t);
            if v < best_v {
                best_t = t;
                best_v = v;
            }
        }
        let (mut lo, mut hi) = (best_t - h, best_t + h);
        let ratio = 0.5 * (5.0_f64.sqrt() - 1.0);
        let mut x1 = hi - ratio * (hi - lo);
        let mut x2 = lo + ratio * (hi - lo);
        let (mut f1, mut f2) = (self.eval(x1), self.eval(x2));
        for _ in 0..80 {
            if f1 < f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - ratio * (hi - lo);
                f1 = self.eval(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + ratio * (hi - lo);
                f2 = self.eval(x2);
            }
        }
        let t = 0.5 * (lo + hi);
        let v = self.eval(t);
        if v < best_v {
            (t, v)
        } else {
            (best_t, best_v)
        }
    }
}

pub fn brute_force_nsnr_min<R: Rng + ?Sized>(
    c: &SpdMatrix,
    c_hat: &SpdMatrix,
    cfg: &OracleConfig,
    rng: &mut R,
) -> Result<OracleResult> {
    check_dim(c.dim(), c_hat.dim())?;
    let dim = c.dim();
    let w = c_hat.inv_sqrt();
    let w_inv = c_hat.sqrt();
    let q = w.matrix() * c.matrix() * w.matrix();
    let q_inv = w_inv.matrix() * c.inverse().matrix() * w_inv.matrix();
    let forms = Forms { a: &q, b: &q_inv };

    let mut best_y = standard_normal_vector(dim, rng);
    let mut best = forms.nsnr(&best_y);
    for _ in 1..cfg.n_random.max(1) {
        let y = standard_normal_vector(dim, rng);
        let v = forms.nsnr(&y);
        if v < best {
            best = v;
            best_y = y;
        }
    }
    let sampled_min = best;

    let mut y = best_y.normalize();
    let mut qy = &q * &y;
    let mut qiy = &q_inv * &y;
    let mut current = forms.nsnr(&y);
    let mut stalled = 0;
    let mut steps = 0;
    if dim > 1 {
        while steps < cfg.refine_steps && stalled < dim {
            steps += 1;
            let mut d = standard_normal_vector(dim, rng);
            d -= &y * y.dot(&d);
            let norm = d.norm();
            if norm == 0.0 {
                continue;
            }
            d /= norm;
            let qd = &q * &d;
            let qid = &q_inv * &d;
            let plane = PlaneObjective {
                f: [y.dot(&qy), y.dot(&qd), d.dot(&qd)],
                g: [y.dot(&qiy), y.dot(&qid), d.dot(&qid)],
            };
            let (t, v) = plane.minimize();
            if v < current {
                let (s, co) = t.sin_cos();
                let improvement = (current - v) / current;
                y = &y * co + &d * s;
                let n = y.norm();
                y /= n;
                qy = (&qy * co + &qd * s) / n;
                qiy = (&qiy * co + &qid * s) / n;
                current = v;
                stalled = if improvement < cfg.tol {
                    stalled + 1
                } else {
                    0
                };
            } else {
                stalled += 1;
            }
        }
    }

    let value = forms.nsnr(&y).min(sampled_min);
    let target = TargetVector::new(w_inv.matrix() * &y)?;
    Ok(OracleResult {
        value,
        sampled_min,
        target,
        refine_steps_taken: steps,
    })
}
