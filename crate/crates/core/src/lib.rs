//! Compiler, event-driven emulator and reference simulator for a
//! segmented-memory neuromorphic core and its hierarchical multi-core fabric.

pub mod cli;
pub mod compiler;
pub mod generate;
pub mod metrics;
pub mod network;
pub mod oracle;
pub mod router;
pub mod runtime;
