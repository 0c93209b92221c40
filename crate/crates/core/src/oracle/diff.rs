//! Lock-step comparison of the compiled path against the oracle.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use super::{OracleError, OracleState};
use crate::compiler::MemoryImage;
use crate::network::{SpikeRaster, ValidatedNetwork};
use crate::router::{RouterError, RoutingTable, System};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    System(#[from] RouterError),
}

/// First point where the two paths disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divergence {
    /// `None` when the images and the network do not even hold the same neurons.
    pub step: Option<u64>,
    pub detail: String,
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.step {
            Some(t) => write!(f, "step {t}: {}", self.detail),
            None => write!(f, "{}", self.detail),
        }
    }
}

/// Steps both paths side by side, comparing every fired set (outputs or not)
/// and every membrane after each step.
pub fn diff_runs(
    net: &ValidatedNetwork,
    images: Vec<MemoryImage>,
    table: RoutingTable,
    raster: &SpikeRaster,
    steps: u64,
    seed: u64,
) -> Result<Option<Divergence>, DiffError> {
    let mut placed: Vec<(u32, &str)> = images
        .iter()
        .flat_map(|img| img.neurons().iter().map(|n| (n.global, n.key.as_str())))
        .collect();
    placed.sort_unstable();
    let expected: Vec<(u32, &str)> = net.neuron_keys().iter().enumerate().map(|(i, k)| (i as u32, k.as_str())).collect();
    if placed != expected {
        return Ok(Some(Divergence { step: None, detail: "images do not hold the network's neurons".into() }));
    }
    let mut order: Vec<(u32, usize, u32)> = images
        .iter()
        .enumerate()
        .flat_map(|(c, img)| img.neurons().iter().enumerate().map(move |(n, info)| (info.global, c, n as u32)))
        .collect();
    order.sort_unstable();

    let mut oracle = OracleState::new(net, seed);
    let mut system = System::new(images, table, seed)?;
    for t in 0..steps {
        let keys: Vec<&str> = raster.at(t).map(|s| s.iter().map(String::as_str).collect()).unwrap_or_default();
        let axons = keys
            .iter()
            .map(|k| net.axon_index(k).ok_or_else(|| OracleError::UnknownInput(k.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let user = system.route_inputs(keys.iter().copied()).map_err(RouterError::from)?;

        let want: BTreeSet<u32> = oracle.step(&axons).into_iter().collect();
        let step = system.step(user)?;
        let got: BTreeSet<u32> = step
            .fired
            .iter()
            .enumerate()
            .flat_map(|(c, list)| list.iter().map(move |&n| (c, n)))
            .map(|(c, n)| system.cores()[c].global_index(n))
            .collect();
        if want != got {
            let name = |s: &BTreeSet<u32>| {
                s.iter().map(|&i| net.neuron_keys()[i as usize].as_str()).collect::<Vec<_>>().join(",")
            };
            return Ok(Some(Divergence {
                step: Some(t),
                detail: format!("oracle fired {{{}}}, image fired {{{}}}", name(&want), name(&got)),
            }));
        }
        for &(g, c, n) in &order {
            let (o, i) = (oracle.membrane[g as usize], system.cores()[c].membranes()[n as usize]);
            if o != i {
                return Ok(Some(Divergence {
                    step: Some(t),
                    detail: format!("membrane of '{}': oracle {o}, image {i}", net.neuron_keys()[g as usize]),
                }));
            }
        }
    }
    Ok(None)
}
