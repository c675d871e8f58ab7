use serde::{Deserialize, Serialize};

use crate::{ModelError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelFamily {
    Adhoc,
    Dronecell,
}

/// Provenance recorded by the trainer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TrainMeta {
    pub iterations: usize,
    pub final_log_lik: f64,
    pub seed: u64,
}

/// Learned model parameters. The ad hoc family uses a 3-vector theta
/// (serving gain, strongest and second-strongest interference weights, any
/// sign) and a positive similarity bandwidth sigma. The drone family uses a
/// single positive theta; only the product theta*sigma is identifiable
/// there, and the trainer reports it as such.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ModelParams {
    pub family: ModelFamily,
    pub theta: Vec<f64>,
    pub sigma: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub train_meta: Option<TrainMeta>,
}

impl ModelParams {
    /// Conventional starting point for training.
    pub fn init(family: ModelFamily) -> Self {
        match family {
            ModelFamily::Adhoc => Self {
                family,
                // Negative starts on the interference features: positive ones
                // blow the quality up as exp(+theta * interference power) on
                // dense realizations and break the initial normalizer.
                theta: vec![1e-2, -1e-2, -1e-2],
                // Similarity length scale on the unit deployment square; a
                // large start makes S nearly all-ones and the kernel
                // indefinite, which kills the initial likelihood.
                sigma: 0.1,
                train_meta: None,
            },
            ModelFamily::Dronecell => Self {
                family,
                theta: vec![1.0],
                sigma: 1.0,
                train_meta: None,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(ModelError::Params(format!(
                "sigma must be positive finite, got {}",
                self.sigma
            )));
        }
        match self.family {
            ModelFamily::Adhoc => {
                if self.theta.len() != 3 {
                    return Err(ModelError::Params(format!(
                        "adhoc family needs 3 theta components, got {}",
                        self.theta.len()
                    )));
                }
            }
            ModelFamily::Dronecell => {
                if self.theta.len() != 1 || !(self.theta[0] > 0.0) {
                    return Err(ModelError::Params(
                        "dronecell family needs a single positive theta".into(),
                    ));
                }
            }
        }
        if self.theta.iter().any(|t| !t.is_finite()) {
            return Err(ModelError::Params("theta must be finite".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }
}
