use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use isac_core::{
    make_apsk, make_psk, make_qam, optimize_constellation, ApskRings, Constellation, DetectorSpec,
    OptimizerOptions, ScenarioParams,
};
use isac_core::rng::derive_seed;
use serde::{Deserialize, Serialize};

/// Where the symbol alphabet comes from. The order is `scenario.mod_order`
/// except for files, which carry their own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ConstellationSource {
    Psk {},
    Qam {},
    Apsk {
        #[serde(default)]
        rings: Option<ApskRings>,
    },
    /// Shaped constellation; without `eta1` one is produced per `eta1_grid` entry.
    Optimized {
        #[serde(default)]
        eta1: Option<f64>,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSizes {
    pub n_symbols: u64,
    pub n_trials: u64,
}

impl Default for McSizes {
    fn default() -> Self {
        Self { n_symbols: 100_000, n_trials: 2000 }
    }
}

/// Optimizer knobs. Its random stream is derived from the scenario seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSettings {
    pub restarts: usize,
    pub max_iters: usize,
    pub step_size: f64,
    pub softmin_temp_initial: f64,
    pub softmin_temp_final: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        let o = OptimizerOptions::default();
        Self {
            restarts: o.restarts,
            max_iters: o.max_iters,
            step_size: o.step_size,
            softmin_temp_initial: o.softmin_temp_initial,
            softmin_temp_final: o.softmin_temp_final,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub scenario: ScenarioParams,
    pub constellation_source: ConstellationSource,
    pub eta1_grid: Vec<f64>,
    pub eta2_grid: Vec<f64>,
    pub detector: DetectorSpec,
    pub mc: McSizes,
    pub optimizer: OptimizerSettings,
    /// Evaluate the communication divergence on the line-of-sight path only.
    pub los_only: bool,
    /// Extra constellations evaluated next to the main source.
    pub baselines: Vec<ConstellationSource>,
    pub output_dir: PathBuf,
    pub format: OutputFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioParams::default(),
            constellation_source: ConstellationSource::Optimized { eta1: None },
            eta1_grid: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            eta2_grid: (0..=10).map(|k| k as f64 / 10.0).collect(),
            detector: DetectorSpec::default(),
            mc: McSizes::default(),
            optimizer: OptimizerSettings::default(),
            los_only: false,
            baselines: vec![ConstellationSource::Psk {}],
            output_dir: PathBuf::from("results"),
            format: OutputFormat::Csv,
        }
    }
}

/// A constellation together with the name and weight it is reported under.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedConstellation {
    pub name: String,
    pub eta1: Option<f64>,
    pub constellation: Constellation,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn seed(&self) -> u64 {
        self.scenario.seed
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.detector.validate()?;
        self.optimizer_options().validate()?;
        if self.eta1_grid.is_empty() || self.eta2_grid.is_empty() {
            bail!("empty grid");
        }
        for (name, grid) in [("eta1_grid", &self.eta1_grid), ("eta2_grid", &self.eta2_grid)] {
            if grid.iter().any(|e| !(0.0..=1.0).contains(e)) {
                bail!("{name} entries must lie in [0, 1]");
            }
        }
        if self.eta2_grid.windows(2).any(|w| w[1] < w[0]) {
            bail!("eta2_grid must be ascending");
        }
        if self.mc.n_symbols == 0 {
            bail!("mc.n_symbols must be at least 1");
        }
        if self.mc.n_trials == 0 {
            bail!("mc.n_trials must be at least 1");
        }
        for src in std::iter::once(&self.constellation_source).chain(&self.baselines) {
            if let ConstellationSource::Optimized { eta1: Some(e) } = src {
                if !(0.0..=1.0).contains(e) {
                    bail!("optimized eta1 must lie in [0, 1]");
                }
            }
        }
        Ok(())
    }

    pub fn optimizer_options(&self) -> OptimizerOptions {
        let o = &self.optimizer;
        OptimizerOptions {
            restarts: o.restarts,
            max_iters: o.max_iters,
            step_size: o.step_size,
            softmin_temp_initial: o.softmin_temp_initial,
            softmin_temp_final: o.softmin_temp_final,
            seed: derive_seed(self.seed(), "optimizer", 0),
        }
    }

    /// Materializes the main source followed by the baselines.
    pub fn constellations(&self) -> Result<Vec<NamedConstellation>> {
        let mut out = self.resolve(&self.constellation_source)?;
        for b in &self.baselines {
            out.extend(self.resolve(b)?);
        }
        Ok(out)
    }

    pub fn resolve(&self, source: &ConstellationSource) -> Result<Vec<NamedConstellation>> {
        let q = self.scenario.mod_order;
        let plain = |name: &str, c: Constellation| {
            vec![NamedConstellation { name: name.into(), eta1: None, constellation: c }]
        };
        Ok(match source {
            ConstellationSource::Psk {} => plain("psk", make_psk(q)?),
            ConstellationSource::Qam {} => plain("qam", make_qam(q)?),
            ConstellationSource::Apsk { rings } => {
                let rings = match rings {
                    Some(r) => r.clone(),
                    None => ApskRings::standard(q)?,
                };
                plain("apsk", make_apsk(q, &rings)?)
            }
            ConstellationSource::Optimized { eta1 } => {
                let grid = match eta1 {
                    Some(e) => vec![*e],
                    None => self.eta1_grid.clone(),
                };
                let opts = self.optimizer_options();
                grid.into_iter()
                    .map(|e| {
                        Ok(NamedConstellation {
                            name: "optimized".into(),
                            eta1: Some(e),
                            constellation: optimize_constellation(q, e, &opts)?,
                        })
                    })
                    .collect::<Result<_>>()?
            }
            ConstellationSource::File { path } => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let c = Constellation::from_json(&text)
                    .with_context(|| format!("parsing {}", path.display()))?;
                if !c.satisfies_amplitude() {
                    bail!(
                        "{}: max amplitude {} exceeds the unit disk",
                        path.display(),
                        c.max_amplitude()
                    );
                }
                plain("file", c)
            }
        })
    }
}
