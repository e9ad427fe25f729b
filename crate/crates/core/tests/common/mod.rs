//! Independent oracles shared by the integration and acceptance suites.
//! Nothing here calls into the solver paths it is used to check.
#![allow(dead_code)]

use isac_core::linalg::{CMatrix, CVector};
use isac_core::rng::Stream;
use isac_core::scenario::complex_gaussian;
use num_complex::Complex64;

pub fn random_unit(m: usize, rng: &mut Stream) -> CVector {
    let v = CVector::from_fn(m, |_, _| complex_gaussian(rng, 1.0));
    let n = v.norm();
    v.unscale(n)
}

fn quad(d: &CMatrix, w: &CVector) -> f64 {
    w.dotc(&(d * w)).re
}

/// `D(CN(0, λ0) || CN(0, λ1))` by trapezoidal quadrature over the complex
/// plane.
pub fn gaussian_kld_quadrature(lambda0: f64, lambda1: f64) -> f64 {
    let pdf = |l: f64, r2: f64| (-r2 / l).exp() / (std::f64::consts::PI * l);
    let half = 9.0 * lambda0.sqrt();
    let n = 1800;
    let h = 2.0 * half / n as f64;
    let mut total = 0.0;
    for i in 0..=n {
        let x = -half + i as f64 * h;
        let wx = if i == 0 || i == n { 0.5 } else { 1.0 };
        for j in 0..=n {
            let y = -half + j as f64 * h;
            let wy = if j == 0 || j == n { 0.5 } else { 1.0 };
            let r2 = x * x + y * y;
            let f0 = pdf(lambda0, r2);
            if f0 > 0.0 {
                total += wx * wy * f0 * (f0.ln() - pdf(lambda1, r2).ln());
            }
        }
    }
    total * h * h
}

/// Best objective of `max w^H D_r w s.t. |u^H w|^2 >= eta2, ||w|| = 1`
/// (`u` the unit communication direction) found by feasible random sampling
/// plus projected gradient ascent from random starts.
pub fn pareto_oracle(
    d_r: &CMatrix,
    h: &CVector,
    eta2: f64,
    starts: usize,
    samples: usize,
    rng: &mut Stream,
) -> f64 {
    let m = h.len();
    let u = h.unscale(h.norm());
    let project = |w: &CVector| -> CVector {
        let w = w.unscale(w.norm());
        let a = u.dotc(&w);
        if a.norm_sqr() >= eta2 {
            return w;
        }
        let perp = &w - &u * a;
        let phase = if a.norm() > 0.0 { a / a.norm() } else { Complex64::new(1.0, 0.0) };
        let pn = perp.norm();
        if pn == 0.0 {
            return &u * phase;
        }
        &u * (phase * eta2.sqrt()) + perp.scale((1.0 - eta2).sqrt() / pn)
    };
    let mut best = f64::NEG_INFINITY;

    for _ in 0..samples {
        let v = random_unit(m, rng);
        let perp = &v - &u * u.dotc(&v);
        let t: f64 = eta2 + (1.0 - eta2) * rand::Rng::random::<f64>(rng);
        let phase = Complex64::from_polar(1.0, rand::Rng::random::<f64>(rng) * std::f64::consts::TAU);
        let w = &u * (phase * t.sqrt()) + perp.scale((1.0 - t).sqrt() / perp.norm());
        best = best.max(quad(d_r, &w));
    }

    let scale = d_r.norm().max(1e-300);
    for _ in 0..starts {
        let mut w = project(&random_unit(m, rng));
        for it in 0..600 {
            let step = 2.0 / (1.0 + it as f64 / 100.0);
            let grad = (d_r * &w).scale(step / scale);
            w = project(&(&w + grad));
        }
        best = best.max(quad(d_r, &w));
    }
    best
}

/// Max-min squared distance of 4 points in the unit disk by grid search
/// over radii and phases; the first point is pinned at angle zero.
pub fn four_point_packing_grid() -> f64 {
    let radii = [0.5, 0.75, 0.9, 1.0];
    let phases: Vec<f64> = (0..48).map(|k| k as f64 * std::f64::consts::TAU / 48.0).collect();
    let cand: Vec<Complex64> = radii
        .iter()
        .flat_map(|&r| phases.iter().map(move |&p| Complex64::from_polar(r, p)))
        .collect();
    let first: Vec<Complex64> = radii.iter().map(|&r| Complex64::new(r, 0.0)).collect();
    let mut best = 0.0f64;
    for &a in &first {
        for (i, &b) in cand.iter().enumerate() {
            let dab = (a - b).norm_sqr();
            if dab <= best {
                continue;
            }
            for (j, &c) in cand.iter().enumerate().skip(i + 1) {
                let d1 = dab.min((a - c).norm_sqr()).min((b - c).norm_sqr());
                if d1 <= best {
                    continue;
                }
                for &d in &cand[j + 1..] {
                    let v = d1.min((a - d).norm_sqr()).min((b - d).norm_sqr()).min((c - d).norm_sqr());
                    best = best.max(v);
                }
            }
        }
    }
    best
}

/// Principal eigenvector of a Hermitian PSD matrix by shifted power
/// iteration from a fixed all-ones start.
pub fn power_iteration(d: &CMatrix, iters: usize) -> CVector {
    let m = d.nrows();
    let mut v = CVector::from_element(m, Complex64::new(1.0, 0.0)).unscale((m as f64).sqrt());
    for _ in 0..iters {
        let next = d * &v;
        let n = next.norm();
        if n == 0.0 {
            break;
        }
        v = next.unscale(n);
    }
    v
}
