//! Neuron model parameters.

use serde::{Deserialize, Serialize};

/// Smallest legal noise shift.
pub const MIN_SHIFT: i8 = -17;
/// Largest legal noise shift.
pub const MAX_SHIFT: i8 = 17;
/// Largest legal leak exponent.
pub const MAX_LEAK: u8 = 63;

/// Neuron dynamics family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NeuronKind {
    /// Stateless threshold unit; nothing carries over between steps.
    Binary,
    /// Leaky integrate-and-fire with optional shifted noise.
    Lif,
}

impl NeuronKind {
    pub(crate) fn code(self) -> u8 {
        match self {
            NeuronKind::Binary => 0,
            NeuronKind::Lif => 1,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(NeuronKind::Binary),
            1 => Some(NeuronKind::Lif),
            _ => None,
        }
    }
}

/// Threshold, noise shift and leak for one family of neurons.
///
/// `shift` and `leak` are carried for binary neurons too but never read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeuronModelSpec {
    pub kind: NeuronKind,
    pub threshold: i32,
    #[serde(default)]
    pub shift: i8,
    #[serde(default)]
    pub leak: u8,
}

impl NeuronModelSpec {
    pub const fn lif(threshold: i32, shift: i8, leak: u8) -> Self {
        Self { kind: NeuronKind::Lif, threshold, shift, leak }
    }

    pub const fn binary(threshold: i32) -> Self {
        Self { kind: NeuronKind::Binary, threshold, shift: 0, leak: 0 }
    }

    /// Returns a description of the first violated parameter bound, if any.
    pub fn check(&self) -> Result<(), (&'static str, String)> {
        if self.threshold < 0 {
            return Err(("threshold", format!("must be >= 0, got {}", self.threshold)));
        }
        if !(MIN_SHIFT..=MAX_SHIFT).contains(&self.shift) {
            return Err(("shift", format!("must be in [{MIN_SHIFT}, {MAX_SHIFT}], got {}", self.shift)));
        }
        if self.leak > MAX_LEAK {
            return Err(("leak", format!("must be in [0, {MAX_LEAK}], got {}", self.leak)));
        }
        Ok(())
    }
}
