use isac_core::beamforming::Beamformer;
use isac_core::rng::stream;
use isac_core::scenario::complex_gaussian;
use isac_core::simulate::{post_integration_snr, CaCfar};
use isac_core::*;
use rand::Rng;
use rustfft::FftPlanner;
use statrs::function::erf::erfc;

fn single_antenna(noise_comm_dbm: f64) -> (ScenarioParams, CommChannel, Beamformer) {
    let p = ScenarioParams {
        num_antennas: 1,
        num_nlos: 0,
        angle_comm_deg: 0.0,
        noise_comm_dbm,
        ..Default::default()
    };
    let ch = CommChannel::los_only(&p);
    let w = Beamformer::normalized(ch.h.clone()).unwrap();
    (p, ch, w)
}

/// Noise level giving per-symbol SNR `gamma` for unit-energy symbols.
fn noise_for_snr(gamma: f64) -> f64 {
    let p = ScenarioParams::default();
    10.0 * (p.comm_gain() / gamma / 1e-3).log10()
}

#[test]
fn bpsk_ber_matches_erfc() {
    // erfc(sqrt(γ))/2 ≈ 1e-2.
    let gamma = 2.7055;
    let (p, ch, w) = single_antenna(noise_for_snr(gamma));
    let n = 1_000_000;
    let r = simulate_ber(&make_psk(2).unwrap(), &ch, &w, &p, n, 11).unwrap();
    let expected = 0.5 * erfc(gamma.sqrt());
    assert!((expected - 1e-2).abs() < 2e-4);
    let se = (expected * (1.0 - expected) / n as f64).sqrt();
    let ber = r.ber.unwrap();
    assert!((ber - expected).abs() <= 3.0 * se, "{ber} vs {expected} (se {se})");
}

#[test]
fn gray_qpsk_bit_errors_are_half_symbol_errors() {
    let (p, ch, w) = single_antenna(noise_for_snr(6.0));
    let r = simulate_ber(&make_psk(4).unwrap(), &ch, &w, &p, 1_000_000, 12).unwrap();
    let (ber, ser) = (r.ber.unwrap(), r.ser.unwrap());
    assert!(ser > 1e-4, "{ser}");
    assert!((ber - ser / 2.0).abs() <= 0.1 * ser / 2.0, "ber {ber} ser {ser}");
}

#[test]
fn ber_independent_of_worker_count() {
    let (p, ch, w) = single_antenna(noise_for_snr(5.0));
    let c = make_qam(16).unwrap();
    let a = simulate_ber(&c, &ch, &w, &p, 100_000, 5).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let b = pool.install(|| simulate_ber(&c, &ch, &w, &p, 100_000, 5).unwrap());
    assert_eq!(a, b);
}

#[test]
fn np_threshold_empirical_false_alarm() {
    let (p_fa, n) = (1e-3, 4u32);
    let tau = np_threshold(p_fa, n, 1.0).unwrap();
    let trials = 10_000_000u64;
    let mut rng = stream(3, "h0", 0);
    let mut hits = 0u64;
    for _ in 0..trials {
        let e: f64 = (0..n).map(|_| complex_gaussian(&mut rng, 1.0).norm_sqr()).sum();
        if e > tau {
            hits += 1;
        }
    }
    let rate = hits as f64 / trials as f64;
    let se = (p_fa * (1.0 - p_fa) / trials as f64).sqrt();
    assert!((rate - p_fa).abs() <= 3.0 * se, "{rate}");
}

/// Pure-noise range-Doppler maps through the same FFT + CFAR chain.
#[test]
fn cfar_false_alarm_rate_is_calibrated() {
    let spec = DetectorSpec { p_fa: 1e-3, ..Default::default() };
    let cfar = CaCfar::new(&spec).unwrap();
    let (ranges, pulses) = (spec.grid_ranges, spec.num_pulses);
    let fft = FftPlanner::new().plan_fft_forward(pulses);
    let mut rng = stream(8, "noise-maps", 0);
    let (mut cells, mut alarms) = (0u64, 0u64);
    while cells < 10_000_000 {
        let mut map: Vec<_> = (0..ranges * pulses).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
        for row in map.chunks_mut(pulses) {
            fft.process(row);
        }
        let power: Vec<f64> = map.iter().map(|z| z.norm_sqr()).collect();
        let mask = cfar.detect(&power, ranges, pulses);
        for r in cfar.testable_ranges(ranges) {
            cells += pulses as u64;
            alarms += mask[r * pulses..(r + 1) * pulses].iter().filter(|&&m| m).count() as u64;
        }
    }
    let rate = alarms as f64 / cells as f64;
    assert!(rate > 1e-3 / 3.0 && rate < 3e-3, "{rate}");
}

fn link(power_dbm: f64) -> (ScenarioParams, TargetResponse, Beamformer) {
    let p = ScenarioParams { tx_power_dbm: power_dbm, ..Default::default() };
    let t = gen_target_response(&p, &mut stream(2, "target", 0));
    let (w, _) = sensing_beamformer(&t).unwrap();
    (p, t, w)
}

#[test]
fn zero_power_detects_at_neighbourhood_false_alarm_level() {
    let det = DetectorSpec { p_fa: 1e-3, ..Default::default() };
    let (p, t, w) = link(-400.0);
    let n = 20_000;
    let r = simulate_detection_cfar(&t, &w, &make_psk(4).unwrap(), &det, &p, n, 4).unwrap();
    let level = 1.0 - (1.0 - det.p_fa).powi(9);
    let se = (level * (1.0 - level) / n as f64).sqrt();
    let pd = r.pd.unwrap();
    assert!((pd - level).abs() <= 3.0 * se, "{pd} vs {level}");
}

#[test]
fn very_high_power_saturates_detection() {
    let det = DetectorSpec::default();
    let (p, t, w) = link(90.0);
    let r = simulate_detection_cfar(&t, &w, &make_psk(16).unwrap(), &det, &p, 10_000, 5).unwrap();
    assert!(r.pd.unwrap() >= 0.999, "{:?}", r.pd);
}

#[test]
fn detection_grows_with_constellation_power() {
    let det = DetectorSpec::default();
    let p = ScenarioParams::default();
    let t = gen_target_response(&p, &mut stream(6, "target", 0));
    let ch = gen_comm_channel(&p, &mut stream(6, "comm", 0));
    // A beam between the two optima keeps detection off saturation.
    let pair = beamforming::QuadraticPair::from_link(&t, &ch);
    let w = pareto_beamformer(&pair, 0.97).unwrap().beamformer;
    let opts = OptimizerOptions::default();
    let mut prev_pd = 0.0;
    let mut prev_power = 0.0;
    for eta1 in [0.0, 0.5, 1.0] {
        let c = optimize_constellation(16, eta1, &opts).unwrap();
        assert!(c.avg_power() >= prev_power - 1e-3);
        let pd = simulate_detection_cfar(&t, &w, &c, &det, &p, 4000, 9).unwrap().pd.unwrap();
        assert!(pd >= prev_pd, "eta1={eta1}: {pd} < {prev_pd}");
        prev_pd = pd;
        prev_power = c.avg_power();
    }
}

#[test]
fn neyman_pearson_bounds_cfar() {
    let det = DetectorSpec { p_fa: 1e-4, ..Default::default() };
    let psk = make_psk(8).unwrap();
    let mut rng = stream(10, "configs", 0);
    for i in 0..20 {
        // Post-integration SNR spread over roughly 5..30 dB.
        let power = rng.random_range(-6.0..20.0);
        let mut p = ScenarioParams { tx_power_dbm: power, ..Default::default() };
        p.seed = i;
        let t = gen_target_response(&p, &mut stream(i, "target", 0));
        let w = Beamformer::normalized(common_beam(&t, &mut rng)).unwrap();
        let snr = post_integration_snr(&t, &w, 1.0, &det, &p);
        let tau = np_threshold(det.p_fa, 1, 1.0).unwrap();
        let pd_np = np_detection_probability(tau, 1, 1.0 + snr).unwrap();
        let n = 2000;
        let pd = simulate_detection_cfar(&t, &w, &psk, &det, &p, n, i).unwrap().pd.unwrap();
        let se = (pd_np * (1.0 - pd_np) / n as f64).sqrt().max(1.0 / n as f64);
        assert!(pd <= pd_np + 3.0 * se, "config {i}: cfar {pd} > np {pd_np} (snr {snr})");
    }
}

fn common_beam(t: &TargetResponse, rng: &mut isac_core::rng::Stream) -> CVector {
    let (s, _) = sensing_beamformer(t).unwrap();
    let m = s.w().len();
    let noise = CVector::from_fn(m, |_, _| complex_gaussian(rng, 0.05));
    s.w() + noise
}
