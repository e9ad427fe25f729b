//! Unified KL-divergence metrics for integrated sensing and communication
//! links, with constellation shaping, Pareto beamforming and Monte-Carlo
//! BER / detection simulation.

pub mod beamforming;
pub mod constellation;
pub mod error;
pub mod kld;
pub mod linalg;
pub mod optimize;
pub mod record;
pub mod rng;
pub mod scenario;
pub mod simulate;

pub use beamforming::{
    comm_beamformer, correlation_coefficient, pareto_beamformer, pareto_sweep, sensing_beamformer,
    Beamformer, ParetoPoint, QuadraticPair,
};
pub use constellation::{
    assign_labels, avg_power, make_apsk, make_psk, make_qam, min_pair_distance, ApskRings,
    Constellation,
};
pub use error::{Error, Result};
pub use kld::{
    kld_comm, kld_comm_los_only, kld_comm_scalar, kld_new, kld_radar_full, kld_radar_scalar,
    kld_radar_woodbury, kld_unified, KldValue, LogUnits,
};
pub use linalg::{CMatrix, CVector};
pub use optimize::{optimize_constellation, OptimizerOptions};
pub use record::TradeoffRecord;
pub use scenario::{
    db_to_linear, dbm_to_watts, gen_comm_channel, gen_target_response, steering, CommChannel,
    ScenarioParams, TargetResponse,
};
pub use simulate::{
    np_detection_probability, np_threshold, simulate_ber, simulate_detection_cfar, DetectorSpec,
    TrialResult,
};
