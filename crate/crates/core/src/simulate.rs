//! Monte-Carlo link simulation: coherent ML demodulation BER, the
//! Neyman–Pearson energy detector, and cell-averaging CFAR on a
//! range–Doppler map.
//!
//! Trials draw from counter-derived streams (`rng::stream(seed, tag, i)`),
//! so every estimate is bit-identical for any worker count.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_ur;

use crate::beamforming::Beamformer;
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::linalg::quad_form;
use crate::rng::stream;
use crate::scenario::{complex_gaussian, CommChannel, ScenarioParams, TargetResponse};

const SPEED_OF_LIGHT: f64 = 299_792_458.0;
const BER_BLOCK: usize = 8192;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorSpec {
    pub p_fa: f64,
    pub num_pulses: usize,
    pub pulse_len_us: f64,
    /// Guard cells per dimension, split evenly on both sides of the cell under test.
    pub cfar_guard: usize,
    /// Training cells per dimension, split evenly on both sides of the guard band.
    pub cfar_train: usize,
    pub grid_ranges: usize,
    /// Doppler bins; must equal `num_pulses`.
    pub grid_dopplers: usize,
    pub carrier_ghz: f64,
    pub target_velocity_mps: f64,
}

impl Default for DetectorSpec {
    fn default() -> Self {
        Self {
            p_fa: 1e-5,
            num_pulses: 16,
            pulse_len_us: 40.0,
            cfar_guard: 2,
            cfar_train: 8,
            grid_ranges: 64,
            grid_dopplers: 16,
            carrier_ghz: 3.5,
            target_velocity_mps: 39.0,
        }
    }
}

impl DetectorSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_fa > 0.0 && self.p_fa < 1.0) {
            return Err(Error::InvalidParameter(format!("p_fa {} outside (0, 1)", self.p_fa)));
        }
        if self.num_pulses < 1 || self.grid_ranges < 1 {
            return Err(Error::InvalidParameter("empty range-Doppler grid".into()));
        }
        if self.grid_dopplers != self.num_pulses {
            return Err(Error::InvalidParameter("grid_dopplers must equal num_pulses".into()));
        }
        if !self.cfar_guard.is_multiple_of(2) || !self.cfar_train.is_multiple_of(2) || self.cfar_train == 0 {
            return Err(Error::InvalidParameter(
                "cfar_guard and cfar_train must be even, cfar_train positive".into(),
            ));
        }
        let window = self.window_len();
        for grid in [self.grid_ranges, self.grid_dopplers] {
            if window > grid {
                return Err(Error::CfarWindow { window, grid });
            }
        }
        if !(self.pulse_len_us > 0.0 && self.carrier_ghz > 0.0) {
            return Err(Error::InvalidParameter("pulse length and carrier must be positive".into()));
        }
        Ok(())
    }

    fn half_guard(&self) -> usize {
        self.cfar_guard / 2
    }

    fn half_window(&self) -> usize {
        (self.cfar_guard + self.cfar_train) / 2
    }

    /// CFAR window edge length per dimension.
    pub fn window_len(&self) -> usize {
        2 * self.half_window() + 1
    }

    pub fn training_cells(&self) -> usize {
        let g = 2 * self.half_guard() + 1;
        self.window_len().pow(2) - g * g
    }

    /// `N (p_fa^{-1/N} - 1)` for `N` training cells.
    pub fn cfar_scale(&self) -> f64 {
        let n = self.training_cells() as f64;
        n * (self.p_fa.powf(-1.0 / n) - 1.0)
    }

    pub fn doppler_hz(&self) -> f64 {
        2.0 * self.target_velocity_mps * self.carrier_ghz * 1e9 / SPEED_OF_LIGHT
    }

    fn pulse_len_s(&self) -> f64 {
        self.pulse_len_us * 1e-6
    }

    /// Doppler bin nearest to the target's Doppler shift.
    pub fn target_doppler_bin(&self) -> usize {
        let n = self.num_pulses as f64;
        let bin = (self.doppler_hz() * self.pulse_len_s() * n).round();
        bin.rem_euclid(n) as usize
    }

    pub fn target_range_cell(&self) -> usize {
        self.grid_ranges / 2
    }
}

/// Monte-Carlo outcome. Rates not estimated by a given simulation are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub ber: Option<f64>,
    pub ser: Option<f64>,
    pub pd: Option<f64>,
    pub pfa_empirical: Option<f64>,
    pub n_trials: u64,
    pub seed: u64,
}

/// Uncoded BER and SER of coherent nearest-point demodulation.
///
/// The receiver knows the composite gain `sqrt(ρ0 d_c^-2 P_t) h^H w`. Noise
/// is drawn in the frame rotated by the gain's phase, which is the same
/// distribution and keeps realizations common across beamformers.
pub fn simulate_ber(
    points: &Constellation,
    channel: &CommChannel,
    w: &Beamformer,
    params: &ScenarioParams,
    n_symbols: u64,
    seed: u64,
) -> Result<TrialResult> {
    if n_symbols == 0 {
        return Err(Error::InvalidParameter("n_symbols must be >= 1".into()));
    }
    let amp = params.comm_gain().sqrt() * channel.h.dotc(w.w()).norm();
    let noise_var = params.noise_comm_w();
    let pts = points.points();
    let labels = points.labels();
    let q = pts.len();
    let blocks = n_symbols.div_ceil(BER_BLOCK as u64);

    let (sym_err, bit_err) = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(seed, "ber", b);
            let len = (n_symbols - b * BER_BLOCK as u64).min(BER_BLOCK as u64);
            let (mut se, mut be) = (0u64, 0u64);
            for _ in 0..len {
                let tx = rng.random_range(0..q);
                let y = pts[tx] * amp + complex_gaussian(&mut rng, noise_var);
                let rx = (0..q)
                    .min_by(|&i, &j| {
                        (y - pts[i] * amp).norm_sqr().total_cmp(&(y - pts[j] * amp).norm_sqr())
                    })
                    .unwrap();
                if rx != tx {
                    se += 1;
                    be += u64::from((labels[rx] ^ labels[tx]).count_ones());
                }
            }
            (se, be)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));

    let bits = points.bits_per_symbol();
    let ber = (q.is_power_of_two() && bits > 0)
        .then(|| bit_err as f64 / (n_symbols as f64 * f64::from(bits)));
    Ok(TrialResult {
        ber,
        ser: Some(sym_err as f64 / n_symbols as f64),
        pd: None,
        pfa_empirical: None,
        n_trials: n_symbols,
        seed,
    })
}

/// Threshold `τ` with `P(Σ_{i<n} |y_i|^2 > τ) = p_fa` for `y_i ~ CN(0, λ0)`.
pub fn np_threshold(p_fa: f64, n: u32, lambda0: f64) -> Result<f64> {
    if !(p_fa > 0.0 && p_fa < 1.0) {
        return Err(Error::InvalidParameter(format!("p_fa {p_fa} outside (0, 1)")));
    }
    if n < 1 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    if n == 1 {
        return Ok(lambda0 * -p_fa.ln());
    }
    // Solve ln Q(n, x) = ln p_fa; the left side is decreasing and concave.
    let a = f64::from(n);
    let target = p_fa.ln();
    let f = |x: f64| gamma_ur(a, x).ln() - target;
    let (mut lo, mut hi) = (0.0, a - target + 10.0);
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = f(x);
        if fx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        // d/dx ln Q = -x^{a-1} e^{-x} / (Γ(a) Q).
        let ln_pdf = (a - 1.0) * x.ln() - x - statrs::function::gamma::ln_gamma(a);
        let slope = -(ln_pdf - gamma_ur(a, x).ln()).exp();
        let mut next = x - fx / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x {
            x = next;
            break;
        }
        x = next;
    }
    Ok(lambda0 * x)
}

/// `P(Σ_{i<n} |y_i|^2 > τ)` for `y_i ~ CN(0, λ1)`.
pub fn np_detection_probability(tau: f64, n: u32, lambda1: f64) -> Result<f64> {
    if !(tau > 0.0) || n < 1 || !(lambda1 > 0.0) {
        return Err(Error::InvalidParameter("need tau > 0, n >= 1, lambda1 > 0".into()));
    }
    if n == 1 {
        return Ok((-tau / lambda1).exp());
    }
    Ok(gamma_ur(f64::from(n), tau / lambda1))
}

/// Cell-averaging CFAR over a range x Doppler power map. The Doppler axis is
/// circular; only ranges whose full window fits are tested.
#[derive(Debug, Clone)]
pub struct CaCfar {
    half_window: usize,
    half_guard: usize,
    scale: f64,
    training: f64,
}

impl CaCfar {
    pub fn new(spec: &DetectorSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            half_window: spec.half_window(),
            half_guard: spec.half_guard(),
            scale: spec.cfar_scale(),
            training: spec.training_cells() as f64,
        })
    }

    /// Range cells that can be tested.
    pub fn testable_ranges(&self, ranges: usize) -> std::ops::Range<usize> {
        self.half_window..ranges.saturating_sub(self.half_window)
    }

    /// Detection mask, row-major `ranges x dopplers`; untested cells are false.
    pub fn detect(&self, power: &[f64], ranges: usize, dopplers: usize) -> Vec<bool> {
        let h = self.half_window;
        let g = self.half_guard;
        let cols = dopplers + 2 * h;
        // Prefix sums over the Doppler-wrapped map.
        let mut sat = vec![0.0; (ranges + 1) * (cols + 1)];
        for r in 0..ranges {
            let mut row = 0.0;
            for c in 0..cols {
                let d = (c + dopplers - h % dopplers) % dopplers;
                row += power[r * dopplers + d];
                sat[(r + 1) * (cols + 1) + c + 1] = sat[r * (cols + 1) + c + 1] + row;
            }
        }
        let rect = |r0: usize, r1: usize, c0: usize, c1: usize| {
            sat[r1 * (cols + 1) + c1] - sat[r0 * (cols + 1) + c1] - sat[r1 * (cols + 1) + c0]
                + sat[r0 * (cols + 1) + c0]
        };
        let mut mask = vec![false; ranges * dopplers];
        for r in self.testable_ranges(ranges) {
            for d in 0..dopplers {
                let c = d + h;
                let window = rect(r - h, r + h + 1, c - h, c + h + 1);
                let guard = rect(r - g, r + g + 1, c - g, c + g + 1);
                let noise = (window - guard) / self.training;
                mask[r * dopplers + d] = power[r * dopplers + d] > self.scale * noise;
            }
        }
        mask
    }
}

/// Ideal coherent post-integration SNR of a constant-modulus target,
/// `N ζ |s|^2 w^H A^H A w / σ_r^2`.
pub fn post_integration_snr(
    target: &TargetResponse,
    w: &Beamformer,
    symbol_energy: f64,
    det: &DetectorSpec,
    params: &ScenarioParams,
) -> f64 {
    det.num_pulses as f64 * params.radar_gain() * symbol_energy * quad_form(&target.gram(), w.w())
        / params.noise_radar_w()
}

struct MapOutcome {
    detected: bool,
    false_alarms: u64,
    tested: u64,
}

/// Empirical detection probability of CA-CFAR on synthesized range–Doppler
/// maps.
///
/// The target sits in the centre range cell with a Rayleigh-fluctuating
/// reflectivity (one draw per trial). Pulse `k` carries a symbol drawn from
/// `points`; the receiver removes the known symbol phase, leaving amplitude
/// `sqrt(ζ w^H A^H A w) |s_k|` with the target Doppler progression. A trial
/// detects when any cell of the 3x3 neighbourhood of the target cell crosses
/// its threshold. `pfa_empirical` counts crossings in cells whose CFAR
/// window does not touch the target range.
pub fn simulate_detection_cfar(
    target: &TargetResponse,
    w: &Beamformer,
    points: &Constellation,
    det: &DetectorSpec,
    params: &ScenarioParams,
    n_trials: u64,
    seed: u64,
) -> Result<TrialResult> {
    if n_trials == 0 {
        return Err(Error::InvalidParameter("n_trials must be >= 1".into()));
    }
    let cfar = CaCfar::new(det)?;
    let amp = (params.radar_gain() * quad_form(&target.gram(), w.w()).max(0.0)).sqrt();
    let noise_var = params.noise_radar_w();
    let (ranges, pulses) = (det.grid_ranges, det.num_pulses);
    let phase_step = 2.0 * PI * det.doppler_hz() * det.pulse_len_s();
    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_forward(pulses);
    let r_t = det.target_range_cell();
    let d_t = det.target_doppler_bin();
    let mags: Vec<f64> = points.points().iter().map(|z| z.norm()).collect();
    let h = cfar.half_window;

    let run = |trial: u64| -> MapOutcome {
        let mut rng = stream(seed, "cfar", trial);
        let reflect = complex_gaussian(&mut rng, 1.0);
        let mut map: Vec<Complex64> =
            (0..ranges * pulses).map(|_| complex_gaussian(&mut rng, noise_var)).collect();
        for k in 0..pulses {
            let s = mags[rng.random_range(0..mags.len())];
            map[r_t * pulses + k] += reflect * Complex64::from_polar(amp * s, phase_step * k as f64);
        }
        for row in map.chunks_mut(pulses) {
            fft.process(row);
        }
        let power: Vec<f64> = map.iter().map(|z| z.norm_sqr()).collect();
        let mask = cfar.detect(&power, ranges, pulses);

        let detected = (r_t.saturating_sub(1)..=(r_t + 1).min(ranges - 1)).any(|r| {
            [pulses - 1, 0, 1].iter().any(|&off| mask[r * pulses + (d_t + off) % pulses])
        });
        let (mut false_alarms, mut tested) = (0, 0);
        for r in cfar.testable_ranges(ranges) {
            if r.abs_diff(r_t) <= h {
                continue;
            }
            tested += pulses as u64;
            false_alarms += mask[r * pulses..(r + 1) * pulses].iter().filter(|&&m| m).count() as u64;
        }
        MapOutcome { detected, false_alarms, tested }
    };

    let (hits, fa, cells) = (0..n_trials)
        .into_par_iter()
        .map(|t| {
            let o = run(t);
            (u64::from(o.detected), o.false_alarms, o.tested)
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));

    Ok(TrialResult {
        ber: None,
        ser: None,
        pd: Some(hits as f64 / n_trials as f64),
        pfa_empirical: (cells > 0).then(|| fa as f64 / cells as f64),
        n_trials,
        seed,
    })
}
