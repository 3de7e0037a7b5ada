use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Inverse-propensity estimate of a full vector from one observed coordinate.
///
/// All entries are zero except the played one, which holds
/// `realized / played_prob`. Averaged over the draw of the played action this
/// reproduces the true vector exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceEstimate {
    values: Vec<f64>,
}

impl ImportanceEstimate {
    pub fn new(num_actions: usize, action: usize, realized: f64, played_prob: f64) -> Result<Self> {
        if action >= num_actions {
            return Err(Error::ActionOutOfRange { index: action, num_actions });
        }
        if !(played_prob > 0.0 && played_prob <= 1.0 + crate::SIMPLEX_TOLERANCE) {
            return Err(Error::Internal(alloc::format!(
                "played action {action} has probability {played_prob}; importance weight undefined"
            )));
        }
        let mut values = alloc::vec![0.0; num_actions];
        values[action] = realized / played_prob;
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The single coordinate that may be nonzero.
    pub fn entry(&self, index: usize) -> f64 {
        self.values[index]
    }
}
