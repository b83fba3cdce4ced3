//! Model taxonomy and training configuration.

use crate::bernstein::DEFAULT_DEGREE;
use crate::error::{Error, Result};
use crate::monotone_net::NetConfig;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// How the conditional mode is linked to the covariates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkKind {
    /// Monotone positive-weight network of the index `β⊤x`.
    #[serde(rename = "gx-d")]
    GxD,
    /// Monotone Bernstein polynomial of the index `β⊤x`.
    #[serde(rename = "gx-b")]
    GxB,
    /// Unconstrained network of the full covariate vector; no index.
    #[serde(rename = "fx")]
    Fx,
}

impl LinkKind {
    pub fn has_index(self) -> bool {
        !matches!(self, LinkKind::Fx)
    }
}

/// Error distribution used in the likelihood.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorFamily {
    #[serde(rename = "st")]
    St,
    #[serde(rename = "sn")]
    Sn,
    #[serde(rename = "normal")]
    Normal,
    /// Student-t errors with `w` pinned at 0.5.
    #[serde(rename = "symmetric-t")]
    SymmetricT,
}

impl ErrorFamily {
    pub fn estimates_weight(self) -> bool {
        matches!(self, ErrorFamily::St | ErrorFamily::Sn)
    }

    pub fn estimates_delta(self) -> bool {
        matches!(self, ErrorFamily::St | ErrorFamily::SymmetricT)
    }
}

/// A fitted model variant: link, error family and link hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub link: LinkKind,
    pub family: ErrorFamily,
    /// Hidden widths for the network links.
    pub net: NetConfig,
    /// Degree of the Bernstein link (`degree + 1` coefficients).
    pub bernstein_degree: usize,
}

impl ModelSpec {
    pub fn new(link: LinkKind, family: ErrorFamily) -> Self {
        Self {
            link,
            family,
            net: NetConfig::default(),
            bernstein_degree: DEFAULT_DEGREE,
        }
    }

    pub fn with_hidden(mut self, hidden: Vec<usize>) -> Self {
        self.net = NetConfig { hidden };
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.net.validate()?;
        if self.bernstein_degree == 0 {
            return Err(Error::domain("Bernstein degree must be at least 1"));
        }
        Ok(())
    }

    /// Command-line tag, e.g. `st-gx-d`.
    pub fn tag(&self) -> String {
        let fam = match self.family {
            ErrorFamily::St => "st",
            ErrorFamily::Sn => "sn",
            ErrorFamily::Normal => "n",
            ErrorFamily::SymmetricT => "t",
        };
        let link = match self.link {
            LinkKind::GxD => "gx-d",
            LinkKind::GxB => "gx-b",
            LinkKind::Fx => "fx",
        };
        format!("{fam}-{link}")
    }

    /// Display name in the style `ST-GX-D`.
    pub fn name(&self) -> String {
        self.tag().to_uppercase()
    }
}

/// The ten supported model tags.
pub const MODEL_TAGS: [&str; 10] = [
    "st-gx-d", "sn-gx-d", "n-gx-d", "st-gx-b", "sn-gx-b", "n-gx-b", "st-fx", "sn-fx", "n-fx",
    "t-gx-d",
];

impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(tag: &str) -> Result<Self> {
        let tag = tag.trim().to_ascii_lowercase();
        if !MODEL_TAGS.contains(&tag.as_str()) {
            return Err(Error::Input(format!(
                "unknown model tag {tag:?}; expected one of {}",
                MODEL_TAGS.join(", ")
            )));
        }
        let (fam, link) = tag.split_once('-').expect("tags contain a dash");
        let family = match fam {
            "st" => ErrorFamily::St,
            "sn" => ErrorFamily::Sn,
            "n" => ErrorFamily::Normal,
            _ => ErrorFamily::SymmetricT,
        };
        let link = match link {
            "gx-d" => LinkKind::GxD,
            "gx-b" => LinkKind::GxB,
            _ => LinkKind::Fx,
        };
        Ok(ModelSpec::new(link, family))
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// First-order update rule applied to each minibatch gradient.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Optimizer {
    /// `θ ← θ − lr · g`.
    Sgd,
    /// Heavy-ball momentum.
    Momentum { beta: f64 },
    /// Adam with bias correction.
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl Optimizer {
    pub fn adam() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub optimizer: Optimizer,
    /// Independent random restarts; the lowest final loss wins.
    pub starts: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 1000,
            batch_size: 128,
            learning_rate: 1e-3,
            seed: 0,
            optimizer: Optimizer::Sgd,
            starts: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::domain("epochs must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::domain("batch size must be at least 1"));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::domain("learning rate must be positive"));
        }
        if self.starts == 0 {
            return Err(Error::domain("at least one start is required"));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}
