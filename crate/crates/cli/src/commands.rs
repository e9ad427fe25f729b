use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use isac_core::beamforming::SweepInputs;
use isac_core::record::{write_csv, TRADEOFF_COLUMNS};
use isac_core::rng::{derive_seed, stream};
use isac_core::{
    comm_beamformer, correlation_coefficient, gen_comm_channel, gen_target_response, kld_new,
    pareto_sweep, sensing_beamformer, simulate_ber, simulate_detection_cfar, CommChannel,
    TargetResponse, TradeoffRecord,
};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, NamedConstellation, OutputFormat};

/// One row of the constellation summary. `min_distance` is the squared
/// minimum pairwise distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub eta1: f64,
    pub min_distance: f64,
    pub avg_power: f64,
    pub kld_new: f64,
}

pub const SUMMARY_COLUMNS: [&str; 4] = ["eta1", "min_distance", "avg_power", "kld_new"];

/// Channel and target realization shared by every row of a run.
#[derive(Debug, Clone)]
pub struct Link {
    pub channel: CommChannel,
    pub target: TargetResponse,
    /// `|u_max^H v_max|` between the matched filter and the sensing beam.
    pub correlation_r: f64,
}

impl Link {
    pub fn generate(cfg: &ExperimentConfig) -> Result<Self> {
        let p = &cfg.scenario;
        let channel = gen_comm_channel(p, &mut stream(cfg.seed(), "comm", 0));
        let target = gen_target_response(p, &mut stream(cfg.seed(), "target", 0));
        let u = comm_beamformer(&channel)?;
        let (v, _) = sensing_beamformer(&target)?;
        let correlation_r = correlation_coefficient(&u, &v);
        Ok(Self { channel, target, correlation_r })
    }
}

pub fn run_constellation(cfg: &ExperimentConfig) -> Result<Vec<(SummaryRow, NamedConstellation)>> {
    cfg.validate()?;
    let mut out = Vec::with_capacity(cfg.eta1_grid.len());
    let opts = cfg.optimizer_options();
    for &eta1 in &cfg.eta1_grid {
        let c = isac_core::optimize_constellation(cfg.scenario.mod_order, eta1, &opts)?;
        let row = SummaryRow {
            eta1,
            min_distance: c.min_pair_distance(),
            avg_power: c.avg_power(),
            kld_new: kld_new(&c, eta1)?,
        };
        out.push((row, NamedConstellation { name: "optimized".into(), eta1: Some(eta1), constellation: c }));
    }
    Ok(out)
}

pub fn run_pareto(cfg: &ExperimentConfig) -> Result<Vec<TradeoffRecord>> {
    cfg.validate()?;
    let link = Link::generate(cfg)?;
    let mut records = Vec::new();
    for nc in cfg.constellations()? {
        let inputs = SweepInputs {
            params: &cfg.scenario,
            channel: &link.channel,
            target: &link.target,
            constellation: &nc.constellation,
            los_only: cfg.los_only,
        };
        for sp in pareto_sweep(&inputs, &cfg.eta2_grid)? {
            records.push(TradeoffRecord {
                constellation: nc.name.clone(),
                eta1: nc.eta1,
                eta2: sp.eta2,
                kld_c_bits: sp.kld.comm_bits,
                kld_r_nats: sp.kld.radar_nats,
                sensing_objective: sp.point.sensing_objective,
                comm_objective: sp.point.comm_objective,
                correlation_r: link.correlation_r,
                ber: None,
                ser: None,
                pd: None,
                pfa_empirical: None,
                n_trials: None,
                seed: cfg.seed(),
            });
        }
    }
    Ok(records)
}

/// Pareto sweep followed by BER and detection simulation at every point.
/// All rows reuse the same random streams, so differences between rows
/// come from the constellation and beamformer alone.
pub fn run_tradeoff(cfg: &ExperimentConfig) -> Result<Vec<TradeoffRecord>> {
    cfg.validate()?;
    let link = Link::generate(cfg)?;
    let ber_seed = derive_seed(cfg.seed(), "ber", 0);
    let cfar_seed = derive_seed(cfg.seed(), "cfar", 0);
    let mut records = Vec::new();
    for nc in cfg.constellations()? {
        let c = &nc.constellation;
        let inputs = SweepInputs {
            params: &cfg.scenario,
            channel: &link.channel,
            target: &link.target,
            constellation: c,
            los_only: cfg.los_only,
        };
        for sp in pareto_sweep(&inputs, &cfg.eta2_grid)? {
            let w = &sp.point.beamformer;
            let b = simulate_ber(c, &link.channel, w, &cfg.scenario, cfg.mc.n_symbols, ber_seed)?;
            let d = simulate_detection_cfar(
                &link.target,
                w,
                c,
                &cfg.detector,
                &cfg.scenario,
                cfg.mc.n_trials,
                cfar_seed,
            )?;
            records.push(TradeoffRecord {
                constellation: nc.name.clone(),
                eta1: nc.eta1,
                eta2: sp.eta2,
                kld_c_bits: sp.kld.comm_bits,
                kld_r_nats: sp.kld.radar_nats,
                sensing_objective: sp.point.sensing_objective,
                comm_objective: sp.point.comm_objective,
                correlation_r: link.correlation_r,
                ber: b.ber,
                ser: b.ser,
                pd: d.pd,
                pfa_empirical: d.pfa_empirical,
                n_trials: Some(d.n_trials),
                seed: cfg.seed(),
            });
        }
    }
    Ok(records)
}

pub fn cmd_constellation(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let rows = run_constellation(cfg)?;
    let dir = prepare_dir(cfg)?;
    let mut files = Vec::new();
    for (i, (_, nc)) in rows.iter().enumerate() {
        let path = dir.join(format!("constellation_eta1_{i}.json"));
        write_file(&path, format!("{}\n", nc.constellation.to_json()?).as_bytes())?;
        files.push(path);
        if cfg.format == OutputFormat::Csv {
            let mut buf = Vec::new();
            nc.constellation.write_csv(&mut buf)?;
            let path = dir.join(format!("constellation_eta1_{i}.csv"));
            write_file(&path, &buf)?;
            files.push(path);
        }
    }
    let summary: Vec<_> = rows.into_iter().map(|(r, _)| r).collect();
    files.push(write_table(&dir, "constellation_summary", &summary, &SUMMARY_COLUMNS, cfg.format)?);
    Ok(files)
}

pub fn cmd_pareto(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let records = run_pareto(cfg)?;
    let dir = prepare_dir(cfg)?;
    Ok(vec![write_table(&dir, "pareto", &records, &TRADEOFF_COLUMNS, cfg.format)?, dir.join("config.json")])
}

pub fn cmd_tradeoff(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let records = run_tradeoff(cfg)?;
    let dir = prepare_dir(cfg)?;
    Ok(vec![write_table(&dir, "tradeoff", &records, &TRADEOFF_COLUMNS, cfg.format)?, dir.join("config.json")])
}

/// Creates the output directory and echoes the resolved config into it.
fn prepare_dir(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let dir = cfg.output_dir.clone();
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let echo = serde_json::to_string_pretty(cfg)? + "\n";
    write_file(&dir.join("config.json"), echo.as_bytes())?;
    Ok(dir)
}

fn write_table<T: Serialize>(
    dir: &Path,
    stem: &str,
    rows: &[T],
    header: &[&str],
    format: OutputFormat,
) -> Result<PathBuf> {
    let mut buf = Vec::new();
    let path = match format {
        OutputFormat::Csv => {
            write_csv(&mut buf, rows, header)?;
            dir.join(format!("{stem}.csv"))
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut buf, rows)?;
            buf.push(b'\n');
            dir.join(format!("{stem}.json"))
        }
    };
    write_file(&path, &buf)?;
    Ok(path)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).with_context(|| format!("writing {}", path.display()))?;
    f.write_all(bytes)?;
    Ok(())
}
