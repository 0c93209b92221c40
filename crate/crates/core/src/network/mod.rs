//! User-facing network description: models, definitions, documents and rasters.

mod def;
mod document;
mod model;
mod raster;

pub use def::{
    validate_network, NetworkDef, NetworkError, NeuronDef, Source, SourceKey, Synapse, ValidatedNetwork,
    ValidationError,
};
pub use document::{parse_network, serialize_network, DocumentError};
pub use model::{NeuronKind, NeuronModelSpec, MAX_LEAK, MAX_SHIFT, MIN_SHIFT};
pub use raster::{SpikeRaster, SpikeTrainError};

/// The four-neuron, two-axon demonstration network.
///
/// `a`, `b`, `c` are noiseless LIF neurons with threshold 3 and no effective
/// leak; `d` has threshold 5 and leak exponent 1. Outputs are `a` and `b`.
pub fn demo_network() -> NetworkDef {
    let mut def = NetworkDef::new();
    let n1 = def.add_model(NeuronModelSpec::lif(3, -17, 63));
    let n2 = def.add_model(NeuronModelSpec::lif(5, -17, 1));
    let syn = |k: &str, w: i64| (k.to_string(), w);
    def.add_axon("alpha", [syn("a", 3), syn("c", 2)]).unwrap();
    def.add_axon("beta", [syn("b", 3)]).unwrap();
    def.add_neuron("a", n1, [syn("b", 1), syn("d", 2)]).unwrap();
    def.add_neuron("b", n1, []).unwrap();
    def.add_neuron("c", n1, []).unwrap();
    def.add_neuron("d", n2, [syn("c", 1)]).unwrap();
    def.add_output("a").unwrap();
    def.add_output("b").unwrap();
    def
}
