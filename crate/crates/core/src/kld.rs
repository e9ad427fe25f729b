//! Kullback–Leibler divergence metrics for the communication and sensing
//! functions of the link.
//!
//! Communication divergence is reported in bits (base-2 logarithm), radar
//! divergence in nats. [`KldValue::in_units`] converts both to a common unit
//! before they are combined.

use std::f64::consts::LN_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constellation::{avg_power, min_pair_distance, Constellation};
use crate::error::{check_weight, Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::scenario::{CommChannel, ScenarioParams, TargetResponse};

pub const UNIT_NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogUnits {
    #[default]
    Bits,
    Nats,
}

/// Communication (bits) and radar (nats) divergences of one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KldValue {
    pub comm_bits: f64,
    pub radar_nats: f64,
}

impl KldValue {
    /// Both components expressed in `units`, as `(comm, radar)`.
    pub fn in_units(&self, units: LogUnits) -> (f64, f64) {
        match units {
            LogUnits::Bits => (self.comm_bits, self.radar_nats / LN_2),
            LogUnits::Nats => (self.comm_bits * LN_2, self.radar_nats),
        }
    }

    pub fn unified(&self, eta: f64, units: LogUnits) -> Result<f64> {
        let (c, r) = self.in_units(units);
        kld_unified(c, r, eta)
    }
}

pub(crate) fn check_unit_norm(w: &CVector) -> Result<()> {
    let n = w.norm();
    if (n - 1.0).abs() > UNIT_NORM_TOL {
        return Err(Error::NonUnitBeamformer(n));
    }
    Ok(())
}

fn check_order(points: &Constellation) -> Result<()> {
    if points.order() < 2 {
        return Err(Error::DegenerateConstellation(points.order()));
    }
    Ok(())
}

/// Minimum pairwise divergence for a known complex receive gain `gain`
/// multiplying each symbol, in bits.
pub fn kld_comm_for_gain(points: &Constellation, gain: Complex64, params: &ScenarioParams) -> Result<f64> {
    check_order(points)?;
    let snr = params.comm_gain() * gain.norm_sqr() / params.noise_comm_w();
    Ok(snr * min_pair_distance(points.points()) / (2.0 * LN_2))
}

/// Communication divergence through the composite channel `h`.
pub fn kld_comm(
    points: &Constellation,
    channel: &CommChannel,
    w: &CVector,
    params: &ScenarioParams,
) -> Result<f64> {
    check_unit_norm(w)?;
    kld_comm_for_gain(points, channel.h.dotc(w), params)
}

/// Communication divergence with symbol means formed from the line-of-sight
/// steering vector only.
pub fn kld_comm_los_only(
    points: &Constellation,
    channel: &CommChannel,
    w: &CVector,
    params: &ScenarioParams,
) -> Result<f64> {
    check_unit_norm(w)?;
    kld_comm_for_gain(points, channel.los.dotc(w), params)
}

/// Single-antenna communication divergence `g |c_m - c_n|^2 / (2 σ_c^2 ln 2)`.
pub fn kld_comm_scalar(points: &Constellation, params: &ScenarioParams) -> Result<f64> {
    kld_comm_for_gain(points, Complex64::new(1.0, 0.0), params)
}

/// `ln(1+x) + 1/(1+x) - 1`, the divergence between zero-mean complex
/// Gaussians whose variances differ by the factor `1 + x`.
pub fn radar_kld_from_snr(x: f64) -> f64 {
    x.ln_1p() + 1.0 / (1.0 + x) - 1.0
}

fn radar_beta(es: f64, params: &ScenarioParams) -> f64 {
    es * params.radar_gain() / params.noise_radar_w()
}

/// Radar divergence from the full `M x M` covariance pair.
pub fn kld_radar_full(
    target: &TargetResponse,
    w: &CVector,
    es: f64,
    params: &ScenarioParams,
) -> Result<f64> {
    check_unit_norm(w)?;
    if !(es >= 0.0) {
        return Err(Error::InvalidParameter(format!("symbol energy {es} must be nonnegative")));
    }
    let m = w.len();
    let a = &target.a_matrix;
    let ww = w * w.adjoint();
    let sigma_s = (a * ww * a.adjoint()).scale(params.radar_gain() * es);
    // Σ_n = σ_r² I, so Σ_n^{-1/2} Σ_s Σ_n^{-1/2} = Σ_s / σ_r².
    let whitened = sigma_s.unscale(params.noise_radar_w());
    let eye = CMatrix::identity(m, m);
    let k = &eye + &whitened;
    let k = (&k + k.adjoint()).scale(0.5);
    let chol = k
        .cholesky()
        .ok_or_else(|| Error::InvalidParameter("signal-plus-noise covariance not positive definite".into()))?;
    let ln_det: f64 = (0..m).map(|i| 2.0 * chol.l_dirty()[(i, i)].re.ln()).sum();
    let inv = chol.inverse();
    let trace = (inv - eye).trace().re;
    Ok(ln_det + trace)
}

/// Radar divergence through the rank-one reduction
/// `ln(1 + β w^H A^H A w) + 1/(1 + β w^H A^H A w) - 1`.
pub fn kld_radar_woodbury(
    target: &TargetResponse,
    w: &CVector,
    es: f64,
    params: &ScenarioParams,
) -> Result<f64> {
    check_unit_norm(w)?;
    let aw = &target.a_matrix * w;
    Ok(radar_kld_from_snr(radar_beta(es, params) * aw.norm_squared()))
}

/// Single-antenna radar divergence `ln(λ1/λ0) + λ0/λ1 - 1`.
pub fn kld_radar_scalar(es: f64, params: &ScenarioParams) -> f64 {
    let lambda0 = params.noise_radar_w();
    let lambda1 = params.radar_gain() * es + lambda0;
    (lambda1 / lambda0).ln() + lambda0 / lambda1 - 1.0
}

/// Weighted combination `(1-η) kc + η kr`.
pub fn kld_unified(kc: f64, kr: f64, eta: f64) -> Result<f64> {
    check_weight("eta", eta)?;
    Ok((1.0 - eta) * kc + eta * kr)
}

/// Constellation shaping objective
/// `(1-η1) min_{m≠n} |c_m - c_n|^2 + (η1/Q) Σ |c_m|^2`.
pub fn kld_new(points: &Constellation, eta1: f64) -> Result<f64> {
    check_weight("eta1", eta1)?;
    check_order(points)?;
    Ok(kld_new_raw(points.points(), eta1))
}

pub(crate) fn kld_new_raw(points: &[Complex64], eta1: f64) -> f64 {
    (1.0 - eta1) * min_pair_distance(points) + eta1 * avg_power(points)
}
