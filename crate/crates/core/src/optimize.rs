//! Geometric constellation shaping.
//!
//! Each of the `Q` symbols is driven by an unconstrained real pair `z_m`,
//! mapped into the open unit disk by `c_m = tanh(|z_m|) z_m / |z_m|`. The
//! shaping objective is maximized with Adam. The hard minimum over symbol
//! pairs is replaced by a log-sum-exp soft minimum whose temperature decays
//! geometrically; the hard objective picks the best restart.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constellation::{make_psk, min_pair_distance, Constellation};
use crate::error::{check_weight, Error, Result};
use crate::kld::kld_new_raw;
use crate::rng::stream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerOptions {
    pub restarts: usize,
    pub max_iters: usize,
    pub step_size: f64,
    pub softmin_temp_initial: f64,
    pub softmin_temp_final: f64,
    pub seed: u64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            restarts: 8,
            max_iters: 2000,
            step_size: 0.05,
            softmin_temp_initial: 1.0,
            softmin_temp_final: 0.01,
            seed: 0,
        }
    }
}

impl OptimizerOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = self.restarts >= 1
            && self.max_iters >= 1
            && self.step_size > 0.0
            && self.softmin_temp_final > 0.0
            && self.softmin_temp_final <= self.softmin_temp_initial;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid optimizer options {self:?}")))
        }
    }

    /// Constant for the first 60% of iterations, then geometric decay to
    /// `1e-4` of the initial step.
    fn step_size(&self, iter: usize) -> f64 {
        let start = self.max_iters * 3 / 5;
        if iter <= start || self.max_iters <= start + 1 {
            return self.step_size;
        }
        let t = (iter - start) as f64 / (self.max_iters - 1 - start) as f64;
        self.step_size * 1e-4f64.powf(t)
    }

    fn temperature(&self, iter: usize) -> f64 {
        if self.max_iters <= 1 {
            return self.softmin_temp_final;
        }
        let t = iter as f64 / (self.max_iters - 1) as f64;
        self.softmin_temp_initial * (self.softmin_temp_final / self.softmin_temp_initial).powf(t)
    }
}

/// Amplitude retraction `z -> tanh(|z|) z / |z|`.
pub fn retract(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r < 1e-12 {
        z
    } else {
        z * (r.tanh() / r)
    }
}

/// Pulls a gradient with respect to `c = retract(z)` back to `z`.
fn retract_pullback(z: Complex64, grad_c: Complex64) -> Complex64 {
    let r = z.norm();
    // c = f(r) z with f(r) = tanh(r)/r, so dc/dz = f I + (f'(r)/r) z z^T.
    let (f, fp_over_r) = if r < 1e-6 {
        (1.0 - r * r / 3.0, -2.0 / 3.0)
    } else {
        let t = r.tanh();
        let sech2 = 1.0 - t * t;
        (t / r, (sech2 * r - t) / (r * r * r))
    };
    let proj = z.re * grad_c.re + z.im * grad_c.im;
    grad_c * f + z * (fp_over_r * proj)
}

/// Soft objective and its gradient with respect to the symbols.
fn soft_objective(c: &[Complex64], eta1: f64, temp: f64, grad: &mut [Complex64]) -> f64 {
    let q = c.len();
    let qf = q as f64;
    let mut value = 0.0;
    for (g, z) in grad.iter_mut().zip(c) {
        *g = z * (2.0 * eta1 / qf);
        value += eta1 * z.norm_sqr() / qf;
    }
    if eta1 >= 1.0 {
        return value;
    }

    let mut dists = Vec::with_capacity(q * (q - 1) / 2);
    for i in 0..q {
        for j in i + 1..q {
            dists.push((c[i] - c[j]).norm_sqr());
        }
    }
    let dmin = dists.iter().copied().fold(f64::INFINITY, f64::min);
    let mut total = 0.0;
    for d in dists.iter_mut() {
        *d = (-(*d - dmin) / temp).exp();
        total += *d;
    }
    let softmin = dmin - temp * total.ln();
    value += (1.0 - eta1) * softmin;

    let scale = 2.0 * (1.0 - eta1) / total;
    let mut k = 0;
    for i in 0..q {
        for j in i + 1..q {
            let g = (c[i] - c[j]) * (scale * dists[k]);
            grad[i] += g;
            grad[j] -= g;
            k += 1;
        }
    }
    value
}

fn run_restart(q: usize, eta1: f64, opts: &OptimizerOptions, restart: usize) -> Vec<Complex64> {
    const BETA1: f64 = 0.9;
    // Short second-moment memory: the radial gradient decays like
    // sech^2(|z|), and a long memory would stall amplitudes short of the rim.
    const BETA2: f64 = 0.9;
    const EPS: f64 = 1e-300;

    let mut rng = stream(opts.seed, "constellation-restart", restart as u64);
    let mut z: Vec<Complex64> = (0..q)
        .map(|_| Complex64::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)))
        .collect();
    let mut m1 = vec![(0.0f64, 0.0f64); q];
    let mut m2 = vec![(0.0f64, 0.0f64); q];
    let mut c = vec![Complex64::new(0.0, 0.0); q];
    let mut grad = vec![Complex64::new(0.0, 0.0); q];

    let mut best = z.iter().map(|&v| retract(v)).collect::<Vec<_>>();
    let mut best_val = kld_new_raw(&best, eta1);

    for iter in 0..opts.max_iters {
        for (ci, zi) in c.iter_mut().zip(&z) {
            *ci = retract(*zi);
        }
        let hard = kld_new_raw(&c, eta1);
        if hard > best_val {
            best_val = hard;
            best.copy_from_slice(&c);
        }
        // Temperature is relative to the current minimum squared distance.
        let dref = min_pair_distance(&c).max(1e-9);
        soft_objective(&c, eta1, opts.temperature(iter) * dref, &mut grad);
        let lr = opts.step_size(iter);

        let t = (iter + 1) as i32;
        let bc1 = 1.0 - BETA1.powi(t);
        let bc2 = 1.0 - BETA2.powi(t);
        for k in 0..q {
            let g = retract_pullback(z[k], grad[k]);
            // Moments are kept in the radial/tangential frame of z_k so the
            // vanishing radial gradient near the rim is normalized on its own.
            let r = z[k].norm();
            let radial = if r > 1e-12 { z[k] / r } else { Complex64::new(1.0, 0.0) };
            let tangential = radial * Complex64::i();
            let g_frame = (
                g.re * radial.re + g.im * radial.im,
                g.re * tangential.re + g.im * tangential.im,
            );
            m1[k].0 = m1[k].0 * BETA1 + g_frame.0 * (1.0 - BETA1);
            m1[k].1 = m1[k].1 * BETA1 + g_frame.1 * (1.0 - BETA1);
            m2[k].0 = m2[k].0 * BETA2 + g_frame.0 * g_frame.0 * (1.0 - BETA2);
            m2[k].1 = m2[k].1 * BETA2 + g_frame.1 * g_frame.1 * (1.0 - BETA2);
            let step_r = lr * (m1[k].0 / bc1) / ((m2[k].0 / bc2).sqrt() + EPS);
            let step_t = lr * (m1[k].1 / bc1) / ((m2[k].1 / bc2).sqrt() + EPS);
            // Ascent.
            z[k] += radial * step_r + tangential * step_t;
        }
    }
    for (ci, zi) in c.iter_mut().zip(&z) {
        *ci = retract(*zi);
    }
    if kld_new_raw(&c, eta1) > best_val {
        best.copy_from_slice(&c);
    }
    best
}

/// Rotates the set so its highest-power point has zero phase.
fn canonicalize(points: &mut [Complex64]) {
    let pivot = points
        .iter()
        .enumerate()
        .fold((0, -1.0), |acc, (i, z)| if z.norm_sqr() > acc.1 { (i, z.norm_sqr()) } else { acc })
        .0;
    let z = points[pivot];
    if z.norm() > 0.0 {
        let rot = z.conj() / z.norm();
        for p in points.iter_mut() {
            *p *= rot;
        }
        points[pivot] = Complex64::new(points[pivot].re, 0.0);
    }
}

/// Maximizes the shaping objective `(1-η1) d_min^2 + η1 P_avg` over `q`
/// points in the unit disk.
pub fn optimize_constellation(q: usize, eta1: f64, opts: &OptimizerOptions) -> Result<Constellation> {
    check_weight("eta1", eta1)?;
    opts.validate()?;
    if q < 2 {
        return Err(Error::DegenerateConstellation(q));
    }
    if q == 2 {
        return make_psk(2);
    }
    let runs: Vec<(f64, Vec<Complex64>)> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let pts = run_restart(q, eta1, opts, r);
            (kld_new_raw(&pts, eta1), pts)
        })
        .collect();
    // First index wins ties, independent of completion order.
    let (_, mut best) = runs
        .into_iter()
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("at least one restart");
    canonicalize(&mut best);
    Constellation::auto_labeled(best)
}
