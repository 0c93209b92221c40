//! Timestep-indexed spike records and the `<timestep> <key>` text format.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("spike train line {line}: {reason}")]
pub struct SpikeTrainError {
    pub line: usize,
    pub reason: String,
}

/// Spike events grouped by timestep. Each timestep is one millisecond of
/// modeled time; only non-empty timesteps are stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpikeRaster {
    events: BTreeMap<u64, BTreeSet<String>>,
}

impl SpikeRaster {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, timestep: u64, key: impl Into<String>) {
        self.events.entry(timestep).or_default().insert(key.into());
    }

    pub fn extend_step<I, K>(&mut self, timestep: u64, keys: I)
    where
        I: IntoIterator<Item = K>,
        K: Into<String>,
    {
        let mut keys = keys.into_iter().map(Into::into).peekable();
        if keys.peek().is_some() {
            self.events.entry(timestep).or_default().extend(keys);
        }
    }

    pub fn at(&self, timestep: u64) -> Option<&BTreeSet<String>> {
        self.events.get(&timestep)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &BTreeSet<String>)> {
        self.events.iter().map(|(t, keys)| (*t, keys))
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn event_count(&self) -> usize {
        self.events.values().map(BTreeSet::len).sum()
    }

    /// Last timestep with an event, if any.
    pub fn last_timestep(&self) -> Option<u64> {
        self.events.keys().next_back().copied()
    }

    /// Drops events at or after `steps`.
    pub fn truncated(&self, steps: u64) -> SpikeRaster {
        SpikeRaster { events: self.events.range(..steps).map(|(t, k)| (*t, k.clone())).collect() }
    }

    pub fn parse(text: &str) -> Result<Self, SpikeTrainError> {
        let mut raster = SpikeRaster::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: String| SpikeTrainError { line: i + 1, reason };
            let (step, key) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| err("expected '<timestep> <key>'".into()))?;
            let step: u64 = step.parse().map_err(|e| err(format!("bad timestep '{step}': {e}")))?;
            let key = key.trim();
            if key.contains(char::is_whitespace) {
                return Err(err(format!("key '{key}' contains whitespace")));
            }
            raster.insert(step, key);
        }
        Ok(raster)
    }

    /// One `<timestep> <key>` line per event, ordered by timestep then key.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (t, keys) in &self.events {
            for key in keys {
                let _ = writeln!(out, "{t} {key}");
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let text = "# inputs\n0 alpha\n0 beta\n\n1 beta\n1   alpha\n";
        let raster = SpikeRaster::parse(text).unwrap();
        assert_eq!(raster.event_count(), 4);
        assert_eq!(raster.to_text(), "0 alpha\n0 beta\n1 alpha\n1 beta\n");
        assert_eq!(SpikeRaster::parse(&raster.to_text()).unwrap(), raster);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = SpikeRaster::parse("0 a\nx b\n").unwrap_err();
        assert_eq!(err.line, 2);
        let err = SpikeRaster::parse("\n\n7\n").unwrap_err();
        assert_eq!(err.line, 3);
    }

    #[test]
    fn truncation() {
        let mut r = SpikeRaster::new();
        r.insert(0, "a");
        r.insert(5, "b");
        assert_eq!(r.truncated(5).event_count(), 1);
        assert_eq!(r.last_timestep(), Some(5));
        assert!(r.truncated(0).is_empty());
    }
}
