//! Fixed-point neuron arithmetic.
//!
//! Per step, for a membrane `v` that already holds this step's synaptic input:
//!
//! * LIF: `v += noise(shift)`; fire and reset to 0 if `v > threshold`,
//!   otherwise `v -= v / 2^leak` (division truncates toward zero).
//! * Binary: fire if `v > threshold`; `v` is 0 afterwards either way.
//!
//! All membrane arithmetic saturates at the `i32` bounds.

use crate::network::{NeuronKind, NeuronModelSpec};

/// Smallest raw noise sample (17-bit signed).
pub const NOISE_MIN: i32 = -(1 << 16);
/// Largest raw noise sample.
pub const NOISE_MAX: i32 = (1 << 16) - 1;

/// Counter-based noise generator.
///
/// Every (neuron, step) pair gets its own 17-bit sample derived from the seed
/// with splitmix64 finalizers, keyed by the neuron's index in the whole
/// network. The sample for a neuron therefore does not depend on which core
/// it lands on, its local index, or what else is simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseSource {
    seed: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl NoiseSource {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Raw sample in `[NOISE_MIN, NOISE_MAX]`.
    pub fn sample(&self, global_neuron: u32, step: u64) -> i32 {
        let stream = splitmix64(self.seed ^ (global_neuron as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
        let z = splitmix64(stream ^ step.wrapping_mul(0xC2B2_AE3D_27D4_EB4F));
        (z >> 47) as i32 + NOISE_MIN
    }
}

/// Scales a raw sample: right shift (truncating toward zero) for negative
/// `shift`, saturating left shift for positive `shift`.
pub fn scale_noise(sample: i32, shift: i8) -> i32 {
    if shift < 0 {
        sample / (1i32 << shift.unsigned_abs().min(30)) / if shift < -30 { 2 } else { 1 }
    } else {
        let scaled = (sample as i64) << shift.min(32);
        scaled.clamp(i32::MIN as i64, i32::MAX as i64) as i32
    }
}

/// `v - v / 2^leak` with the quotient truncated toward zero.
pub fn apply_leak(v: i32, leak: u8) -> i32 {
    if leak >= 63 {
        return v;
    }
    let q = v as i64 / (1i64 << leak);
    (v as i64 - q) as i32
}

/// Adds a step's total synaptic input to a membrane, saturating.
pub fn integrate(v: i32, input: i64) -> i32 {
    (v as i64).saturating_add(input).clamp(i32::MIN as i64, i32::MAX as i64) as i32
}

/// One neuron's end-of-step update. `noise_sample` is the raw 17-bit draw;
/// binary neurons ignore it.
pub fn neuron_update(v: i32, model: &NeuronModelSpec, noise_sample: i32) -> (i32, bool) {
    match model.kind {
        NeuronKind::Binary => (0, v > model.threshold),
        NeuronKind::Lif => {
            let v = v.saturating_add(scale_noise(noise_sample, model.shift));
            if v > model.threshold {
                (0, true)
            } else {
                (apply_leak(v, model.leak), false)
            }
        }
    }
}
