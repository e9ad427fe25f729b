//! Tabular experiment output.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One sample of a sensing/communication trade-off sweep.
///
/// Fields a command does not compute are left empty in CSV and `null` in
/// JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffRecord {
    pub constellation: String,
    pub eta1: Option<f64>,
    pub eta2: f64,
    pub kld_c_bits: f64,
    pub kld_r_nats: f64,
    pub sensing_objective: f64,
    pub comm_objective: f64,
    pub correlation_r: f64,
    pub ber: Option<f64>,
    pub ser: Option<f64>,
    pub pd: Option<f64>,
    pub pfa_empirical: Option<f64>,
    pub n_trials: Option<u64>,
    pub seed: u64,
}

pub const TRADEOFF_COLUMNS: [&str; 14] = [
    "constellation",
    "eta1",
    "eta2",
    "kld_c_bits",
    "kld_r_nats",
    "sensing_objective",
    "comm_objective",
    "correlation_r",
    "ber",
    "ser",
    "pd",
    "pfa_empirical",
    "n_trials",
    "seed",
];

/// Writes records as CSV with a header row and LF line endings.
pub fn write_csv<W: Write, T: Serialize>(w: W, records: &[T], header: &[&str]) -> Result<()> {
    let mut wr = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    wr.write_record(header)?;
    for r in records {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}
