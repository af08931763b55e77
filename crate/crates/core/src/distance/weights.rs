use serde::{Deserialize, Serialize};

/// Edit-cost configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Weights {
    /// Insertion/deletion of an ordinary token.
    pub w_ad: u32,
    /// Maximum replacement cost.
    pub w_r: u32,
    /// Multiplier on `w_ad` for inserting or deleting a block marker.
    pub block_mult: u32,
    /// Penalty per token of a function left out by the pairing.
    pub leftout_factor: f64,
    /// Penalty for a pairing where every function is out of first-use order.
    pub ordering_factor: f64,
    /// Above this many functions in either program the pairing is not
    /// searched exhaustively.
    pub pairing_fn_limit: usize,
    /// Optional wall-clock budget for the exhaustive pairing search.
    pub pairing_timeout_ms: Option<u64>,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            w_ad: 20,
            w_r: 10,
            block_mult: 3,
            leftout_factor: 20.0,
            ordering_factor: 100.0,
            pairing_fn_limit: 7,
            pairing_timeout_ms: None,
        }
    }
}

impl Weights {
    pub fn block_indel(&self) -> u32 {
        self.block_mult * self.w_ad
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.w_ad == 0 || self.w_r == 0 || self.block_mult == 0 {
            return Err("w_ad, w_r and block_mult must be positive".into());
        }
        if !(self.leftout_factor > 0.0 && self.ordering_factor > 0.0) {
            return Err("leftout_factor and ordering_factor must be positive".into());
        }
        Ok(())
    }
}
