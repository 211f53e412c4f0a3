//! JSON run configuration.

use serde::{Deserialize, Serialize};
use tricert::certify::{Axis, GridConfig, SweepTask};
use tricert::dist::WParams;
use tricert::lp::SolverConfig;
use tricert::qmodel::{NoiseKind, NoiseSpec, TbsmParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Dist,
    CertifyNoiseless,
    CertifyDephasing,
    CertifyNoisy,
    CertifyTvd,
    Wdist,
    Sweep,
    Volume,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Dist => "dist",
            Command::CertifyNoiseless => "certify-noiseless",
            Command::CertifyDephasing => "certify-dephasing",
            Command::CertifyNoisy => "certify-noisy",
            Command::CertifyTvd => "certify-tvd",
            Command::Wdist => "wdist",
            Command::Sweep => "sweep",
            Command::Volume => "volume",
        }
    }
}

fn default_model() -> TbsmParams {
    TbsmParams { lambda0_sq: 0.225, phi_u: 0.424, phi_w: 0.0 }
}

fn default_samples() -> usize {
    100_000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default = "default_model")]
    pub model: TbsmParams,
    /// Noise applied to the model, in order.
    #[serde(default)]
    pub noise: Vec<NoiseSpec>,
    /// certify-noisy: search the threshold of this noise kind instead of
    /// certifying at `noise`.
    #[serde(default)]
    pub scan: Option<NoiseKind>,
    #[serde(default)]
    pub grid: GridConfig,
    /// Overrides `grid.solver` when present.
    #[serde(default)]
    pub solver: Option<SolverConfig>,
    #[serde(default)]
    pub sweep_axes: Option<[Axis; 2]>,
    #[serde(default)]
    pub sweep_task: Option<SweepTask>,
    /// certify-tvd: certify this radius instead of searching for the largest.
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// wdist parameters.
    #[serde(default)]
    pub w: Option<WParams>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Fill the runtime_ms column. Off by default so output is reproducible.
    #[serde(default)]
    pub timing: bool,
}

impl RunConfig {
    pub fn grid(&self) -> GridConfig {
        let mut g = self.grid.clone();
        if let Some(s) = &self.solver {
            g.solver = s.clone();
        }
        g
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.model.validate()?;
        for n in &self.noise {
            n.validate()?;
        }
        self.grid().validate()?;
        match self.command {
            Command::Sweep => {
                let axes = self.sweep_axes.as_ref().ok_or_else(|| anyhow::anyhow!("sweep_axes: required for sweep"))?;
                for a in axes {
                    a.validate()?;
                }
                if self.sweep_task.is_none() {
                    anyhow::bail!("sweep_task: required for sweep");
                }
            }
            Command::CertifyNoisy => {
                if self.scan == Some(NoiseKind::None) {
                    anyhow::bail!("scan: a noise kind other than none is required");
                }
                if self.scan.is_none() && self.noise.is_empty() {
                    anyhow::bail!("noise: certify-noisy needs noise or a scan kind");
                }
            }
            Command::CertifyTvd => {
                if let Some(e) = self.epsilon {
                    if !(e > 0.0 && e < 1.0) {
                        anyhow::bail!("epsilon: {e} not in (0, 1)");
                    }
                }
            }
            Command::Wdist => {
                let w = self.w.ok_or_else(|| anyhow::anyhow!("w: required for wdist"))?;
                WParams::new(w.eps, w.delta)?;
                self.require_seed()?;
            }
            Command::Volume => {
                if self.samples < 10_000 {
                    anyhow::bail!("samples: {} below 10^4", self.samples);
                }
                self.require_seed()?;
            }
            _ => {}
        }
        Ok(())
    }

    fn require_seed(&self) -> anyhow::Result<()> {
        if self.seed.is_none() {
            anyhow::bail!("seed: required for {} (set it in the config or pass --seed)", self.command.name());
        }
        Ok(())
    }
}
