//! Event-driven execution of compiled images.

mod core;
mod neuron;
mod run;

pub use self::core::{AccessCounters, Core, CoreState, RuntimeError, StepReport};
pub use neuron::{apply_leak, integrate, neuron_update, scale_noise, NoiseSource, NOISE_MAX, NOISE_MIN};
pub use run::{resolve_inputs, run, RunOptions, RunOutput};
