use std::fmt;
use std::fs;

use anyhow::{Context, Result};
use isac_core::beamforming::{Beamformer, QuadraticPair};
use isac_core::kld::radar_kld_from_snr;
use isac_core::rng::stream;
use isac_core::scenario::complex_gaussian;
use isac_core::{
    comm_beamformer, correlation_coefficient, gen_target_response, kld_comm, kld_comm_scalar,
    kld_new, kld_radar_full, kld_radar_scalar, kld_radar_woodbury, np_detection_probability,
    np_threshold, optimize_constellation, pareto_beamformer, sensing_beamformer, CVector,
    CommChannel, Constellation, ScenarioParams,
};

use crate::commands::Link;
use crate::config::{ConstellationSource, ExperimentConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub error: f64,
    pub tolerance: f64,
}

impl Check {
    fn new(name: impl Into<String>, error: f64, tolerance: f64) -> Self {
        Self { name: name.into(), error, tolerance }
    }

    pub fn passed(&self) -> bool {
        self.error <= self.tolerance
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {:<32} error={:.3e} tol={:.1e}", self.name, self.error, self.tolerance)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed()).count();
        write!(f, "{} checks, {failed} failed", self.checks.len())
    }
}

/// Runs the invariant suite against `cfg`. Configuration problems that
/// prevent a check from running are reported as failures of that check.
pub fn cmd_validate(cfg: &ExperimentConfig) -> Report {
    let mut r = Report::default();
    let mut record = |name: &str, tol: f64, v: Result<f64>| {
        let err = v.unwrap_or_else(|e| {
            eprintln!("{name}: {e:#}");
            f64::INFINITY
        });
        r.checks.push(Check::new(name, if err.is_nan() { f64::INFINITY } else { err }, tol));
    };

    record("config", 0.0, cfg.validate().map(|_| 0.0));
    record("woodbury_equivalence", 1e-10, woodbury(cfg.seed()));
    record("radar_scalar_closed_form", 1e-12, radar_scalar(&cfg.scenario));
    record("comm_scalar_single_antenna", 1e-12, comm_scalar(&cfg.scenario));
    record("np_threshold_single_pulse", 1e-10, np_single_pulse(cfg.detector.p_fa));
    record("np_detection_identity", 1e-10, np_identity(cfg.detector.p_fa));
    record("optimizer_four_point_square", 0.01, optimizer_square(cfg));

    match Link::generate(cfg) {
        Ok(link) => {
            let pair = QuadraticPair::from_link(&link.target, &link.channel);
            record("pareto_endpoint_sensing", 1e-6, endpoint_sensing(&pair, &link));
            record("pareto_endpoint_comm", 1e-6, endpoint_comm(&pair, &link.channel));
            record("pareto_feasibility", 1e-9, feasibility(&pair, &cfg.eta2_grid));
            record("pareto_sensing_monotone", 1e-9, monotone(&pair, &cfg.eta2_grid));
        }
        Err(e) => record("link_generation", 0.0, Err(e)),
    }

    let sources = std::iter::once(&cfg.constellation_source).chain(&cfg.baselines);
    for (i, src) in sources.enumerate() {
        record(&format!("constellation_amplitude_{i}"), 1e-9, amplitude_excess(cfg, src));
    }
    r
}

fn woodbury(seed: u64) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 0..24u64 {
        let m = [2, 4, 8, 16][i as usize % 4];
        let j = [1, 5, 10][i as usize % 3];
        let p = ScenarioParams { num_antennas: m, num_scatterers: j, ..Default::default() };
        let t = gen_target_response(&p, &mut stream(seed, "validate-target", i));
        let mut rng = stream(seed, "validate-beam", i);
        let w = CVector::from_fn(m, |_, _| complex_gaussian(&mut rng, 1.0));
        let w = w.unscale(w.norm());
        let es = 0.25 * (i % 8) as f64;
        let full = kld_radar_full(&t, &w, es, &p)?;
        let wb = kld_radar_woodbury(&t, &w, es, &p)?;
        worst = worst.max((full - wb).abs() / (1.0 + full));
    }
    Ok(worst)
}

fn radar_scalar(p: &ScenarioParams) -> Result<f64> {
    let es = 10.0 * p.noise_radar_w() / p.radar_gain();
    let exact = 11f64.ln() + 1.0 / 11.0 - 1.0;
    Ok((kld_radar_scalar(es, p) - exact).abs().max((radar_kld_from_snr(10.0) - exact).abs()))
}

fn comm_scalar(p: &ScenarioParams) -> Result<f64> {
    let p1 = ScenarioParams { num_antennas: 1, num_nlos: 0, ..p.clone() };
    let ch = CommChannel::los_only(&p1);
    let c = isac_core::make_psk(p.mod_order)?;
    let w = CVector::from_element(1, 1.0.into());
    let a = kld_comm(&c, &ch, &w, &p1)?;
    let b = kld_comm_scalar(&c, &p1)?;
    Ok((a - b).abs() / b.max(1.0))
}

fn np_single_pulse(p_fa: f64) -> Result<f64> {
    let tau = np_threshold(p_fa, 1, 2.0)?;
    Ok((tau - 2.0 * (1.0 / p_fa).ln()).abs() / tau)
}

fn np_identity(p_fa: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for lambda1 in [1.0, 3.0, 10.0, 100.0] {
        let tau = np_threshold(p_fa, 1, 1.0)?;
        let pd = np_detection_probability(tau, 1, lambda1)?;
        worst = worst.max((pd - p_fa.powf(1.0 / lambda1)).abs());
    }
    Ok(worst)
}

fn optimizer_square(cfg: &ExperimentConfig) -> Result<f64> {
    let c = optimize_constellation(4, 0.0, &cfg.optimizer_options())?;
    Ok((2.0 - kld_new(&c, 0.0)?).max(0.0))
}

fn endpoint_sensing(pair: &QuadraticPair, link: &Link) -> Result<f64> {
    let (v, _) = sensing_beamformer(&link.target)?;
    let p = pareto_beamformer(pair, 0.0)?;
    Ok((1.0 - correlation_coefficient(&p.beamformer, &v)).abs())
}

fn endpoint_comm(pair: &QuadraticPair, ch: &CommChannel) -> Result<f64> {
    let u: Beamformer = comm_beamformer(ch)?;
    let p = pareto_beamformer(pair, 1.0)?;
    Ok((1.0 - correlation_coefficient(&p.beamformer, &u)).abs())
}

fn feasibility(pair: &QuadraticPair, grid: &[f64]) -> Result<f64> {
    let lam_c = pair.d_c.trace().re;
    let mut worst = 0.0f64;
    for &e in grid {
        let p = pareto_beamformer(pair, e)?;
        worst = worst.max((e * lam_c - p.comm_objective) / lam_c);
    }
    Ok(worst)
}

fn monotone(pair: &QuadraticPair, grid: &[f64]) -> Result<f64> {
    let vals = grid
        .iter()
        .map(|&e| Ok(pareto_beamformer(pair, e)?.sensing_objective))
        .collect::<Result<Vec<_>>>()?;
    let scale = vals.first().copied().unwrap_or(1.0).max(f64::MIN_POSITIVE);
    Ok(vals.windows(2).map(|w| (w[1] - w[0]) / scale).fold(0.0, f64::max))
}

/// How far the largest symbol amplitude sits outside the unit disk.
fn amplitude_excess(cfg: &ExperimentConfig, src: &ConstellationSource) -> Result<f64> {
    let points: Vec<Constellation> = match src {
        ConstellationSource::File { path } => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            vec![Constellation::from_json(&text)?]
        }
        other => cfg.resolve(other)?.into_iter().map(|n| n.constellation).collect(),
    };
    Ok(points.iter().map(|c| (c.max_amplitude() - 1.0).max(0.0)).fold(0.0, f64::max))
}
