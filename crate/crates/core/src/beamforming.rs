//! Sensing-optimal, communication-optimal and Pareto-optimal transmit
//! beamformers.
//!
//! The Pareto problem
//!
//! ```text
//! max  w^H D_r w   s.t.  w^H D_c w >= η2 λ_max(D_c),  ||w|| = 1
//! ```
//!
//! has a rank-one constraint matrix `D_c = h h^H`, so its optimum is the
//! principal eigenvector of `D_r + λ D_c` for the smallest multiplier `λ >= 0`
//! meeting the constraint. The multiplier is found by bisection.

use rayon::prelude::*;

use crate::constellation::Constellation;
use crate::error::{check_weight, Error, Result};
use crate::kld::{check_unit_norm, kld_comm, kld_comm_los_only, kld_radar_woodbury, KldValue};
use crate::linalg::{outer, principal_eigen, quad_form, CMatrix, CVector};
use crate::scenario::{CommChannel, ScenarioParams, TargetResponse};

const TIE_TOL: f64 = 1e-10;

/// Unit-norm transmit beamformer.
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer {
    w: CVector,
}

impl Beamformer {
    pub fn new(w: CVector) -> Result<Self> {
        check_unit_norm(&w)?;
        Ok(Self { w })
    }

    /// Normalizes `w` to unit norm.
    pub fn normalized(w: CVector) -> Result<Self> {
        let n = w.norm();
        if n == 0.0 {
            return Err(Error::ZeroInput("beamformer"));
        }
        Ok(Self { w: w.unscale(n) })
    }

    pub fn w(&self) -> &CVector {
        &self.w
    }

    pub fn into_inner(self) -> CVector {
        self.w
    }
}

/// The sensing (`A^H A`) and communication (`h h^H`) quadratic forms.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticPair {
    pub d_r: CMatrix,
    pub d_c: CMatrix,
}

impl QuadraticPair {
    pub fn new(d_r: CMatrix, d_c: CMatrix) -> Result<Self> {
        if d_r.shape() != d_c.shape() || !d_r.is_square() {
            return Err(Error::DimensionMismatch { expected: d_r.nrows(), got: d_c.nrows() });
        }
        Ok(Self { d_r, d_c })
    }

    pub fn from_link(target: &TargetResponse, channel: &CommChannel) -> Self {
        Self { d_r: target.gram(), d_c: outer(&channel.h, &channel.h) }
    }

    pub fn sensing_objective(&self, w: &CVector) -> f64 {
        quad_form(&self.d_r, w)
    }

    pub fn comm_objective(&self, w: &CVector) -> f64 {
        quad_form(&self.d_c, w)
    }
}

/// Principal eigenvector of `A^H A` together with its eigenvalue.
pub fn sensing_beamformer(target: &TargetResponse) -> Result<(Beamformer, f64)> {
    let gram = target.gram();
    if gram.norm() == 0.0 {
        return Err(Error::ZeroInput("target response"));
    }
    let (value, w) = principal_eigen(&gram, None, TIE_TOL);
    Ok((Beamformer { w }, value))
}

/// Matched filter `h / ||h||`.
pub fn comm_beamformer(channel: &CommChannel) -> Result<Beamformer> {
    Beamformer::normalized(channel.h.clone()).map_err(|_| Error::ZeroInput("communication channel"))
}

/// Subspace alignment `|u^H v|`.
pub fn correlation_coefficient(u: &Beamformer, v: &Beamformer) -> f64 {
    u.w.dotc(&v.w).norm()
}

/// Solution of the Pareto problem at one weight.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoPoint {
    pub beamformer: Beamformer,
    pub sensing_objective: f64,
    pub comm_objective: f64,
    /// Multiplier of the communication constraint (0 when inactive).
    pub multiplier: f64,
}

impl ParetoPoint {
    fn new(pair: &QuadraticPair, w: CVector, multiplier: f64) -> Self {
        Self {
            sensing_objective: pair.sensing_objective(&w),
            comm_objective: pair.comm_objective(&w),
            beamformer: Beamformer { w },
            multiplier,
        }
    }
}

pub fn pareto_beamformer(pair: &QuadraticPair, eta2: f64) -> Result<ParetoPoint> {
    check_weight("eta2", eta2)?;
    let (lam_c, u) = principal_eigen(&pair.d_c, None, TIE_TOL);
    if lam_c <= 0.0 {
        return Err(Error::ZeroInput("communication channel"));
    }
    let target = eta2 * lam_c;
    let slack = 1e-12 * lam_c;

    let at = |lambda: f64| -> CVector {
        let m = &pair.d_r + pair.d_c.scale(lambda);
        principal_eigen(&m, Some(&pair.d_c), TIE_TOL).1
    };
    let g = |w: &CVector| pair.comm_objective(w);

    let w0 = at(0.0);
    if g(&w0) >= target - slack {
        return Ok(ParetoPoint::new(pair, w0, 0.0));
    }
    if target >= lam_c - slack {
        return Ok(ParetoPoint::new(pair, u, f64::INFINITY));
    }

    let lam_r = principal_eigen(&pair.d_r, None, TIE_TOL).0.max(f64::MIN_POSITIVE);
    let mut lo = 0.0;
    let mut g_lo = g(&w0);
    let mut hi = lam_r / lam_c;
    let mut w_hi = at(hi);
    let mut g_hi = g(&w_hi);
    let mut doublings = 0;
    while g_hi < target {
        if g_hi < g_lo - slack || doublings > 200 {
            return Ok(grid_fallback(pair, target, lam_r / lam_c, u));
        }
        lo = hi;
        g_lo = g_hi;
        hi *= 2.0;
        w_hi = at(hi);
        g_hi = g(&w_hi);
        doublings += 1;
    }

    let tol = 1e-12 * target;
    for _ in 0..300 {
        if g_hi - target <= tol {
            return Ok(ParetoPoint::new(pair, w_hi, hi));
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let w_mid = at(mid);
        let g_mid = g(&w_mid);
        if g_mid < g_lo - slack || g_mid > g_hi + slack {
            return Ok(grid_fallback(pair, target, lam_r / lam_c, u));
        }
        if g_mid >= target {
            hi = mid;
            w_hi = w_mid;
            g_hi = g_mid;
        } else {
            lo = mid;
            g_lo = g_mid;
        }
    }
    // Bisection stalled on a jump of g (an eigenvalue crossing).
    Ok(grid_fallback(pair, target, lam_r / lam_c, u))
}

/// Scans a geometric multiplier grid and keeps the feasible eigenvector with
/// the largest sensing objective. The matched filter is always feasible.
fn grid_fallback(pair: &QuadraticPair, target: f64, scale: f64, matched: CVector) -> ParetoPoint {
    const POINTS: usize = 2000;
    let (lo, hi) = (1e-6 * scale, 1e6 * scale);
    let mut best = ParetoPoint::new(pair, matched, f64::INFINITY);
    for i in 0..POINTS {
        let lambda = lo * (hi / lo).powf(i as f64 / (POINTS - 1) as f64);
        let m = &pair.d_r + pair.d_c.scale(lambda);
        let w = principal_eigen(&m, Some(&pair.d_c), TIE_TOL).1;
        let cand = ParetoPoint::new(pair, w, lambda);
        if cand.comm_objective >= target && cand.sensing_objective > best.sensing_objective {
            best = cand;
        }
    }
    best
}

/// Everything a sweep needs about one link realization.
#[derive(Debug, Clone)]
pub struct SweepInputs<'a> {
    pub params: &'a ScenarioParams,
    pub channel: &'a CommChannel,
    pub target: &'a TargetResponse,
    pub constellation: &'a Constellation,
    /// Form the communication means from the line-of-sight vector only.
    pub los_only: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub eta2: f64,
    pub point: ParetoPoint,
    pub kld: KldValue,
}

/// Solves the Pareto problem along `eta2_grid` and evaluates both
/// divergences with the given constellation. Output order follows the grid.
pub fn pareto_sweep(inputs: &SweepInputs<'_>, eta2_grid: &[f64]) -> Result<Vec<SweepPoint>> {
    for (i, &e) in eta2_grid.iter().enumerate() {
        check_weight("eta2", e)?;
        if i > 0 && e < eta2_grid[i - 1] {
            return Err(Error::InvalidParameter("eta2 grid must be ascending".into()));
        }
    }
    let pair = QuadraticPair::from_link(inputs.target, inputs.channel);
    let es = inputs.constellation.avg_power();
    eta2_grid
        .par_iter()
        .map(|&eta2| {
            let point = pareto_beamformer(&pair, eta2)?;
            let w = point.beamformer.w();
            let comm_bits = if inputs.los_only {
                kld_comm_los_only(inputs.constellation, inputs.channel, w, inputs.params)?
            } else {
                kld_comm(inputs.constellation, inputs.channel, w, inputs.params)?
            };
            let radar_nats = kld_radar_woodbury(inputs.target, w, es, inputs.params)?;
            Ok(SweepPoint { eta2, point, kld: KldValue { comm_bits, radar_nats } })
        })
        .collect()
}
