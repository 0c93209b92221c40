use std::path::Path;

use serde::Deserialize;

use super::CliError;
use crate::metrics::CostModel;
use crate::router::Topology;

/// Contents of the `--config` TOML file.
///
/// ```toml
/// [topology]
/// cores_per_board = 4
/// boards_per_server = 8
/// servers = 1
///
/// [cost]
/// energy_per_row_access_pj = 100.0
/// latency_per_row_access_ns = 5.0
/// parallel_ports = 16
/// ```
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub topology: Option<Topology>,
    pub cost: CostModel,
}

/// Board shape used when no topology is configured; servers grow to fit.
pub const DEFAULT_CORES_PER_BOARD: u32 = 4;
pub const DEFAULT_BOARDS_PER_SERVER: u32 = 8;

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = super::read_text(path)?;
        let cfg: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {}", path.display(), one_line(&e.to_string()))))?;
        cfg.cost.check().map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    pub fn topology_for(&self, cores: usize) -> Topology {
        self.topology.unwrap_or_else(|| Topology::fitting(cores, DEFAULT_CORES_PER_BOARD, DEFAULT_BOARDS_PER_SERVER))
    }
}

pub(crate) fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_and_partial() {
        let cfg: RunConfig = toml::from_str(
            "[topology]\ncores_per_board = 2\nboards_per_server = 2\nservers = 3\n[cost]\nenergy_per_row_access_pj = 7.5\n",
        )
        .unwrap();
        assert_eq!(cfg.topology.unwrap().servers, 3);
        assert_eq!(cfg.cost.energy_per_row_access_pj, 7.5);
        assert_eq!(cfg.cost.parallel_ports, 16);
        assert_eq!(RunConfig::default().topology_for(40).servers, 2);
        assert!(toml::from_str::<RunConfig>("[cost]\nbogus = 1\n").is_err());
    }
}
