//! Routes between cores and the modeled core → board → server hierarchy.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::RouterError;
use crate::compiler::{AxonLabel, MemoryImage};

/// Shape of the fabric. Cores are numbered board by board, boards server by
/// server.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Topology {
    pub cores_per_board: u32,
    pub boards_per_server: u32,
    pub servers: u32,
}

impl Default for Topology {
    fn default() -> Self {
        Self { cores_per_board: 4, boards_per_server: 8, servers: 1 }
    }
}

/// Hop class of a route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    /// Same board, on-chip network.
    Board = 0,
    /// Same server, board to board.
    Server = 1,
    /// Between servers.
    Network = 2,
}

pub const LEVELS: usize = 3;

impl Topology {
    /// Smallest topology with this board shape that holds `cores`.
    pub fn fitting(cores: usize, cores_per_board: u32, boards_per_server: u32) -> Self {
        let per_server = (cores_per_board as usize * boards_per_server as usize).max(1);
        Self { cores_per_board, boards_per_server, servers: cores.div_ceil(per_server).max(1) as u32 }
    }

    pub fn capacity(&self) -> u64 {
        self.cores_per_board as u64 * self.boards_per_server as u64 * self.servers as u64
    }

    pub fn check(&self, cores: usize) -> Result<(), RouterError> {
        if self.cores_per_board == 0 || self.boards_per_server == 0 || self.servers == 0 || cores as u64 > self.capacity() {
            return Err(RouterError::TopologyMismatch { cores, capacity: self.capacity() });
        }
        Ok(())
    }

    /// Level of the link between two cores; symmetric.
    pub fn level(&self, a: u32, b: u32) -> Level {
        let board = |c: u32| c / self.cores_per_board;
        let server = |c: u32| c / (self.cores_per_board * self.boards_per_server);
        if board(a) == board(b) {
            Level::Board
        } else if server(a) == server(b) {
            Level::Server
        } else {
            Level::Network
        }
    }
}

/// One multicast branch: a spike of `src_neuron` on `src_core` becomes an
/// input on relay axon `dst_axon` of `dst_core` at the next step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Route {
    pub src_core: u32,
    /// Local neuron index on the source core.
    pub src_neuron: u32,
    pub dst_core: u32,
    /// Local axon index on the destination core.
    pub dst_axon: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutingTable {
    routes: Vec<Route>,
    levels: Vec<Level>,
    /// Per core, per local neuron: range into `routes`.
    fanout: Vec<Vec<(u32, u32)>>,
    topology: Topology,
}

/// Derives every route from the relay axons compiled into the images.
pub fn derive_routes(images: &[MemoryImage]) -> Result<Vec<Route>, RouterError> {
    let mut home: HashMap<&str, (u32, u32)> = HashMap::new();
    for (c, img) in images.iter().enumerate() {
        for (n, info) in img.neurons().iter().enumerate() {
            if home.insert(info.key.as_str(), (c as u32, n as u32)).is_some() {
                return Err(RouterError::InvalidRoute(format!("neuron '{}' hosted on two cores", info.key)));
            }
        }
    }
    let mut routes = Vec::new();
    for (c, img) in images.iter().enumerate() {
        for (a, label) in img.axon_labels().iter().enumerate() {
            if let AxonLabel::Relay(key) = label {
                let &(src_core, src_neuron) =
                    home.get(key.as_str()).ok_or_else(|| RouterError::UnresolvedRelay { core: c, key: key.clone() })?;
                routes.push(Route { src_core, src_neuron, dst_core: c as u32, dst_axon: a as u32 });
            }
        }
    }
    Ok(routes)
}

/// Builds the routing table for a set of compiled cores.
pub fn build_routing(images: &[MemoryImage], topology: Topology) -> Result<RoutingTable, RouterError> {
    RoutingTable::new(images, derive_routes(images)?, topology)
}

impl RoutingTable {
    /// Validates explicit routes against the images: endpoints exist, every
    /// destination is a relay axon, and each (source, destination core) pair
    /// appears once.
    pub fn new(images: &[MemoryImage], mut routes: Vec<Route>, topology: Topology) -> Result<Self, RouterError> {
        topology.check(images.len())?;
        routes.sort_unstable();
        for w in routes.windows(2) {
            if (w[0].src_core, w[0].src_neuron, w[0].dst_core) == (w[1].src_core, w[1].src_neuron, w[1].dst_core) {
                return Err(RouterError::InvalidRoute(format!(
                    "neuron {} of core {} routed twice to core {}",
                    w[0].src_neuron, w[0].src_core, w[0].dst_core
                )));
            }
        }
        let mut fanout: Vec<Vec<(u32, u32)>> = images.iter().map(|img| vec![(0, 0); img.num_neurons()]).collect();
        for (i, r) in routes.iter().enumerate() {
            let bad = |why: &str| RouterError::InvalidRoute(format!("{r:?}: {why}"));
            let src = images.get(r.src_core as usize).ok_or_else(|| bad("no such source core"))?;
            let dst = images.get(r.dst_core as usize).ok_or_else(|| bad("no such destination core"))?;
            if r.src_core == r.dst_core {
                return Err(bad("route within one core"));
            }
            let Some(info) = src.neurons().get(r.src_neuron as usize) else {
                return Err(bad("no such source neuron"));
            };
            match dst.axon_labels().get(r.dst_axon as usize) {
                Some(AxonLabel::Relay(k)) if *k == info.key => {}
                _ => return Err(bad("destination is not the relay axon of the source")),
            }
            let slot = &mut fanout[r.src_core as usize][r.src_neuron as usize];
            if slot.1 == 0 {
                slot.0 = i as u32;
            }
            slot.1 += 1;
        }
        let levels = routes.iter().map(|r| topology.level(r.src_core, r.dst_core)).collect();
        Ok(Self { routes, levels, fanout, topology })
    }

    pub fn routes(&self) -> &[Route] {
        &self.routes
    }

    pub fn level_of(&self, route: usize) -> Level {
        self.levels[route]
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn cores(&self) -> usize {
        self.fanout.len()
    }

    pub fn is_empty(&self) -> bool {
        self.routes.is_empty()
    }

    /// Route indices leaving one neuron.
    pub fn routes_from(&self, core: u32, neuron: u32) -> std::ops::Range<usize> {
        let (start, len) = self.fanout[core as usize][neuron as usize];
        start as usize..start as usize + len as usize
    }
}

/// Events moved in one exchange.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepTraffic {
    /// Events sent, by [`Level`].
    pub per_level: [u64; LEVELS],
    /// Events placed in destination inboxes.
    pub received: u64,
    pub max_inbox: usize,
}

impl StepTraffic {
    pub fn total(&self) -> u64 {
        self.per_level.iter().sum()
    }
}

/// Traffic of a whole run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrafficStats {
    pub per_step: Vec<StepTraffic>,
    pub sent: u64,
    pub received: u64,
}

impl TrafficStats {
    pub fn record(&mut self, step: StepTraffic) {
        self.sent += step.total();
        self.received += step.received;
        self.per_step.push(step);
    }

    pub fn per_level(&self) -> [u64; LEVELS] {
        let mut acc = [0; LEVELS];
        for s in &self.per_step {
            for (a, x) in acc.iter_mut().zip(s.per_level) {
                *a += x;
            }
        }
        acc
    }

    pub fn max_inbox(&self) -> usize {
        self.per_step.iter().map(|s| s.max_inbox).max().unwrap_or(0)
    }
}

/// Turns this step's per-core fired sets into next step's relay inputs.
/// Inboxes come back sorted and each routed event appears exactly once.
pub fn exchange(fired: &[Vec<u32>], table: &RoutingTable) -> (Vec<Vec<u32>>, StepTraffic) {
    let mut inboxes = vec![Vec::new(); table.cores()];
    let mut traffic = StepTraffic::default();
    for (core, list) in fired.iter().enumerate() {
        for &n in list {
            for r in table.routes_from(core as u32, n) {
                let route = table.routes[r];
                inboxes[route.dst_core as usize].push(route.dst_axon);
                traffic.per_level[table.levels[r] as usize] += 1;
            }
        }
    }
    for inbox in &mut inboxes {
        inbox.sort_unstable();
        traffic.received += inbox.len() as u64;
        traffic.max_inbox = traffic.max_inbox.max(inbox.len());
    }
    (inboxes, traffic)
}
