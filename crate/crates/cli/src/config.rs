//! Experiment configuration: TOML file, command-line overrides and η presets.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use qhyp::curve::{linear_grid, CurveSpec, EtaColumn, Orientation};
use qhyp::phase_space::parse_squeeze_param;
use serde::Deserialize;

pub const PRESETS: [&str; 3] = ["zero", "L-real-theta", "L-imag-theta"];

/// Every field is optional so a file can set only what it cares about.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub m: Option<usize>,
    pub n: Option<usize>,
    #[serde(rename = "N")]
    pub mixture: Option<f64>,
    pub alpha: Option<f64>,
    pub theta_min: Option<f64>,
    pub theta_max: Option<f64>,
    pub theta_steps: Option<usize>,
    pub eta: Option<Vec<String>>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl PartialConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Fields set in `self` win over `base`.
    pub fn over(self, base: Self) -> Self {
        Self {
            m: self.m.or(base.m),
            n: self.n.or(base.n),
            mixture: self.mixture.or(base.mixture),
            alpha: self.alpha.or(base.alpha),
            theta_min: self.theta_min.or(base.theta_min),
            theta_max: self.theta_max.or(base.theta_max),
            theta_steps: self.theta_steps.or(base.theta_steps),
            eta: self.eta.or(base.eta),
            reps: self.reps.or(base.reps),
            seed: self.seed.or(base.seed),
            out: self.out.or(base.out),
        }
    }
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    pub mixture: f64,
    pub alpha: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub theta_steps: usize,
    pub eta: Vec<String>,
    pub reps: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            m: 1,
            n: 3,
            mixture: 0.0,
            alpha: 0.05,
            theta_min: 0.0,
            theta_max: 40.0,
            theta_steps: 161,
            eta: PRESETS.iter().map(|s| s.to_string()).collect(),
            reps: 0,
            seed: 1,
            out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn resolve(partial: PartialConfig) -> Self {
        let d = Self::default();
        Self {
            m: partial.m.unwrap_or(d.m),
            n: partial.n.unwrap_or(d.n),
            mixture: partial.mixture.unwrap_or(d.mixture),
            alpha: partial.alpha.unwrap_or(d.alpha),
            theta_min: partial.theta_min.unwrap_or(d.theta_min),
            theta_max: partial.theta_max.unwrap_or(d.theta_max),
            theta_steps: partial.theta_steps.unwrap_or(d.theta_steps),
            eta: partial.eta.unwrap_or(d.eta),
            reps: partial.reps.unwrap_or(d.reps),
            seed: partial.seed.unwrap_or(d.seed),
            out: partial.out.or(d.out),
        }
    }

    /// `key = value` lines echoed at the top of the CSV.
    pub fn echo(&self) -> Vec<String> {
        let etas: Vec<String> = self.eta.iter().map(|e| format!("{e:?}")).collect();
        vec![
            format!("m = {}", self.m),
            format!("n = {}", self.n),
            format!("N = {:?}", self.mixture),
            format!("alpha = {:?}", self.alpha),
            format!("theta_min = {:?}", self.theta_min),
            format!("theta_max = {:?}", self.theta_max),
            format!("theta_steps = {}", self.theta_steps),
            format!("eta = [{}]", etas.join(", ")),
            format!("reps = {}", self.reps),
            format!("seed = {}", self.seed),
        ]
    }

    pub fn curve_spec(&self) -> Result<CurveSpec<f64>> {
        if self.eta.is_empty() {
            bail!("at least one --eta column is required");
        }
        let columns = self
            .eta
            .iter()
            .map(|e| eta_column(e, self.m))
            .collect::<Result<Vec<_>>>()?;
        let mut labels: Vec<&str> = columns.iter().map(|c| c.label.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            bail!("duplicate η column labels: {labels:?}");
        }
        Ok(CurveSpec {
            m: self.m,
            n: self.n,
            mixture: self.mixture,
            alpha: self.alpha,
            theta_grid: linear_grid(self.theta_min, self.theta_max, self.theta_steps)?,
            columns,
            reps: self.reps,
            seed: self.seed,
        })
    }
}

/// A preset name or a path to a squeezing text file; files are labelled by
/// their stem and use a real θ.
pub fn eta_column(name: &str, m: usize) -> Result<EtaColumn<f64>> {
    match name {
        "zero" => Ok(EtaColumn::zero(m)),
        "L-real-theta" => Ok(EtaColumn::swap_l(m, Orientation::Real)),
        "L-imag-theta" => Ok(EtaColumn::swap_l(m, Orientation::Imaginary)),
        path => {
            let p = Path::new(path);
            let text = std::fs::read_to_string(p).with_context(|| {
                format!(
                    "η {path:?} is neither a preset ({}) nor a readable file",
                    PRESETS.join(", ")
                )
            })?;
            let eta = parse_squeeze_param(&text)
                .with_context(|| format!("parsing squeezing file {path}"))?;
            if eta.modes() != m {
                bail!(
                    "squeezing file {path} has m = {}, experiment has m = {m}",
                    eta.modes()
                );
            }
            let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("file");
            Ok(EtaColumn {
                label: format!("eta_{stem}"),
                eta,
                orientation: Orientation::Real,
            })
        }
    }
}
