//! Physical link parameters, array steering vectors, and random channel and
//! extended-target generation.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm) / 1000.0
}

/// Uniform-linear-array response `[1, e^{j2πδ sinθ}, …]` toward `theta_deg`.
pub fn steering(theta_deg: f64, m: usize, delta: f64) -> CVector {
    let phase = 2.0 * PI * delta * theta_deg.to_radians().sin();
    CVector::from_fn(m, |k, _| Complex64::from_polar(1.0, phase * k as f64))
}

/// Circular complex Gaussian sample with variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

/// All physical parameters of the link, in dB / dBm / metres / degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioParams {
    pub tx_power_dbm: f64,
    pub pathloss_ref_db: f64,
    pub noise_comm_dbm: f64,
    pub noise_radar_dbm: f64,
    pub dist_comm_m: f64,
    pub dist_target_m: f64,
    pub angle_comm_deg: f64,
    pub angle_target_deg: f64,
    pub num_antennas: usize,
    pub antenna_spacing: f64,
    pub num_nlos: usize,
    pub num_scatterers: usize,
    pub nlos_gain_var: f64,
    pub scatterer_spread_deg: f64,
    pub mod_order: usize,
    pub seed: u64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            tx_power_dbm: 30.0,
            pathloss_ref_db: -30.0,
            noise_comm_dbm: -80.0,
            noise_radar_dbm: -100.0,
            dist_comm_m: 800.0,
            dist_target_m: 1000.0,
            angle_comm_deg: 10.0,
            angle_target_deg: 0.0,
            num_antennas: 16,
            antenna_spacing: 0.5,
            num_nlos: 4,
            num_scatterers: 10,
            nlos_gain_var: 0.1,
            scatterer_spread_deg: 5.0,
            mod_order: 16,
            seed: 1,
        }
    }
}

impl ScenarioParams {
    pub fn validate(&self) -> Result<()> {
        let powers = [
            self.tx_power_dbm,
            self.pathloss_ref_db,
            self.noise_comm_dbm,
            self.noise_radar_dbm,
        ];
        if powers.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter("powers must be finite".into()));
        }
        if !(self.dist_comm_m > 0.0 && self.dist_target_m > 0.0) {
            return Err(Error::InvalidParameter("distances must be positive".into()));
        }
        if self.num_antennas < 1 {
            return Err(Error::InvalidParameter("num_antennas must be >= 1".into()));
        }
        if self.mod_order < 2 {
            return Err(Error::InvalidParameter("mod_order must be >= 2".into()));
        }
        if !(self.antenna_spacing > 0.0) {
            return Err(Error::InvalidParameter("antenna_spacing must be positive".into()));
        }
        if self.num_scatterers < 1 {
            return Err(Error::InvalidParameter("num_scatterers must be >= 1".into()));
        }
        if !(self.nlos_gain_var >= 0.0) || !(self.scatterer_spread_deg >= 0.0) {
            return Err(Error::InvalidParameter(
                "nlos_gain_var and scatterer_spread_deg must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    pub fn tx_power_w(&self) -> f64 {
        dbm_to_watts(self.tx_power_dbm)
    }

    pub fn pathloss_ref(&self) -> f64 {
        db_to_linear(self.pathloss_ref_db)
    }

    pub fn noise_comm_w(&self) -> f64 {
        dbm_to_watts(self.noise_comm_dbm)
    }

    pub fn noise_radar_w(&self) -> f64 {
        dbm_to_watts(self.noise_radar_dbm)
    }

    /// Received communication power gain `ρ0 d_c^-2 P_t`.
    pub fn comm_gain(&self) -> f64 {
        self.pathloss_ref() * self.dist_comm_m.powi(-2) * self.tx_power_w()
    }

    /// Round-trip radar gain `ζ = ρ0 d_t^-4 P_t`.
    pub fn radar_gain(&self) -> f64 {
        self.pathloss_ref() * self.dist_target_m.powi(-4) * self.tx_power_w()
    }

    pub fn steering(&self, theta_deg: f64) -> CVector {
        steering(theta_deg, self.num_antennas, self.antenna_spacing)
    }
}

/// Composite communication channel `h = a(θ_c) + Σ α_p a(θ_p)`.
///
/// The user receives `h^H w s`.
#[derive(Debug, Clone, PartialEq)]
pub struct CommChannel {
    pub h: CVector,
    pub los: CVector,
    pub nlos_gains: Vec<Complex64>,
    pub nlos_angles: Vec<f64>,
}

impl CommChannel {
    /// Channel with no scattered paths.
    pub fn los_only(params: &ScenarioParams) -> Self {
        let los = params.steering(params.angle_comm_deg);
        Self { h: los.clone(), los, nlos_gains: vec![], nlos_angles: vec![] }
    }
}

pub fn gen_comm_channel<R: Rng + ?Sized>(params: &ScenarioParams, rng: &mut R) -> CommChannel {
    let los = params.steering(params.angle_comm_deg);
    let mut h = los.clone();
    let mut nlos_gains = Vec::with_capacity(params.num_nlos);
    let mut nlos_angles = Vec::with_capacity(params.num_nlos);
    for _ in 0..params.num_nlos {
        let gain = complex_gaussian(rng, params.nlos_gain_var);
        let angle = rng.random_range(-90.0..90.0);
        // h^H carries a^H(θ_p) scaled by α_p, so h itself holds conj(α_p).
        h += params.steering(angle) * gain.conj();
        nlos_gains.push(gain);
        nlos_angles.push(angle);
    }
    CommChannel { h, los, nlos_gains, nlos_angles }
}

/// Extended-target response `A = Σ_j b*(θ_j) a^H(θ_j)` with `b = a`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetResponse {
    pub a_matrix: CMatrix,
    pub scatterer_angles: Vec<f64>,
}

impl TargetResponse {
    pub fn from_angles(angles: &[f64], m: usize, delta: f64) -> Self {
        let mut a_matrix = CMatrix::zeros(m, m);
        for &theta in angles {
            let a = steering(theta, m, delta);
            a_matrix += a.conjugate() * a.adjoint();
        }
        Self { a_matrix, scatterer_angles: angles.to_vec() }
    }

    /// `A^H A`, the sensing quadratic form.
    pub fn gram(&self) -> CMatrix {
        self.a_matrix.adjoint() * &self.a_matrix
    }
}

pub fn gen_target_response<R: Rng + ?Sized>(params: &ScenarioParams, rng: &mut R) -> TargetResponse {
    let spread = params.scatterer_spread_deg;
    let angles: Vec<f64> = (0..params.num_scatterers)
        .map(|_| {
            if spread > 0.0 {
                params.angle_target_deg + rng.random_range(-spread..=spread)
            } else {
                params.angle_target_deg
            }
        })
        .collect();
    TargetResponse::from_angles(&angles, params.num_antennas, params.antenna_spacing)
}
