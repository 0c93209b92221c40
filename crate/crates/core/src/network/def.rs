//! User-level network definitions and their validation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::model::NeuronModelSpec;

/// One outgoing connection as written by the user: target neuron key and weight.
///
/// The weight is kept wide here so out-of-range values survive until validation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "(String, i64)", into = "(String, i64)")]
pub struct Synapse {
    pub target: String,
    pub weight: i64,
}

impl Synapse {
    pub fn new(target: impl Into<String>, weight: i64) -> Self {
        Self { target: target.into(), weight }
    }
}

impl From<(String, i64)> for Synapse {
    fn from((target, weight): (String, i64)) -> Self {
        Self { target, weight }
    }
}

impl From<Synapse> for (String, i64) {
    fn from(s: Synapse) -> Self {
        (s.target, s.weight)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeuronDef {
    /// Index into [`NetworkDef::models`].
    pub model: usize,
    #[serde(default)]
    pub synapses: Vec<Synapse>,
}

/// A network exactly as the user described it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NetworkDef {
    pub models: Vec<NeuronModelSpec>,
    pub axons: BTreeMap<String, Vec<Synapse>>,
    pub neurons: BTreeMap<String, NeuronDef>,
    pub outputs: BTreeSet<String>,
}

/// A single structural violation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("dangling target '{target}' (synapse from '{source_key}')")]
    DanglingTarget { source_key: String, target: String },
    #[error("duplicate key '{0}'")]
    DuplicateKey(String),
    #[error("duplicate synapse '{source_key}' -> '{target}'")]
    DuplicateSynapse { source_key: String, target: String },
    #[error("weight {weight} of synapse '{source_key}' -> '{target}' does not fit in 16 bits")]
    WeightOutOfRange { source_key: String, target: String, weight: i64 },
    #[error("output '{0}' is not a neuron")]
    UnknownOutput(String),
    #[error("neuron '{neuron}' references model {model}, but only {available} are defined")]
    UnknownModel { neuron: String, model: usize, available: usize },
    #[error("model {index}: {field} {reason}")]
    InvalidModel { index: usize, field: &'static str, reason: String },
    #[error("{0} distinct neuron models exceed the limit of 256")]
    TooManyModels(usize),
    #[error("key {0:?} must be non-empty and contain no whitespace")]
    InvalidKey(String),
    #[error("network has no axons and no neurons")]
    EmptyNetwork,
}

/// Every violation found in one pass over a network.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ValidationError {
    pub violations: Vec<NetworkError>,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        write!(f, "invalid network: {}", parts.join("; "))
    }
}

impl NetworkDef {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a model and returns its index.
    pub fn add_model(&mut self, model: NeuronModelSpec) -> usize {
        self.models.push(model);
        self.models.len() - 1
    }

    pub fn add_axon<I>(&mut self, key: impl Into<String>, synapses: I) -> Result<(), NetworkError>
    where
        I: IntoIterator<Item = (String, i64)>,
    {
        let key = key.into();
        if self.axons.contains_key(&key) {
            return Err(NetworkError::DuplicateKey(key));
        }
        self.axons.insert(key, synapses.into_iter().map(Synapse::from).collect());
        Ok(())
    }

    pub fn add_neuron<I>(&mut self, key: impl Into<String>, model: usize, synapses: I) -> Result<(), NetworkError>
    where
        I: IntoIterator<Item = (String, i64)>,
    {
        let key = key.into();
        if self.neurons.contains_key(&key) {
            return Err(NetworkError::DuplicateKey(key));
        }
        let synapses = synapses.into_iter().map(Synapse::from).collect();
        self.neurons.insert(key, NeuronDef { model, synapses });
        Ok(())
    }

    pub fn add_output(&mut self, key: impl Into<String>) -> Result<(), NetworkError> {
        let key = key.into();
        if !self.outputs.insert(key.clone()) {
            return Err(NetworkError::DuplicateKey(key));
        }
        Ok(())
    }

    pub fn synapse_count(&self) -> usize {
        self.axons.values().map(Vec::len).sum::<usize>()
            + self.neurons.values().map(|n| n.synapses.len()).sum::<usize>()
    }

    pub fn validate(&self) -> Result<ValidatedNetwork, ValidationError> {
        validate_network(self)
    }
}

/// Names a presynaptic source by namespace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SourceKey {
    Axon(String),
    Neuron(String),
}

impl fmt::Display for SourceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceKey::Axon(k) | SourceKey::Neuron(k) => f.write_str(k),
        }
    }
}

/// Presynaptic source by dense index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    Axon(u32),
    Neuron(u32),
}

/// A network that satisfies every structural rule, with dense indices.
///
/// Axons are numbered `0..A` and neurons `0..N` in lexicographic key order.
/// Model ids refer to the deduplicated model table.
#[derive(Debug, Clone)]
pub struct ValidatedNetwork {
    def: NetworkDef,
    axon_keys: Vec<String>,
    neuron_keys: Vec<String>,
    models: Vec<NeuronModelSpec>,
    neuron_model: Vec<u8>,
    axon_synapses: Vec<Vec<(u32, i16)>>,
    neuron_synapses: Vec<Vec<(u32, i16)>>,
    is_output: Vec<bool>,
}

fn key_ok(key: &str) -> bool {
    !key.is_empty() && !key.chars().any(char::is_whitespace)
}

/// Checks every structural invariant and assigns dense indices.
pub fn validate_network(def: &NetworkDef) -> Result<ValidatedNetwork, ValidationError> {
    let mut violations = Vec::new();

    if def.axons.is_empty() && def.neurons.is_empty() {
        return Err(ValidationError { violations: vec![NetworkError::EmptyNetwork] });
    }

    for (index, model) in def.models.iter().enumerate() {
        if let Err((field, reason)) = model.check() {
            violations.push(NetworkError::InvalidModel { index, field, reason });
        }
    }

    // Deduplicate models: first occurrence of each distinct spec wins.
    let mut distinct: Vec<NeuronModelSpec> = Vec::new();
    let mut remap = Vec::with_capacity(def.models.len());
    for model in &def.models {
        let id = match distinct.iter().position(|m| m == model) {
            Some(id) => id,
            None => {
                distinct.push(*model);
                distinct.len() - 1
            }
        };
        remap.push(id);
    }
    if distinct.len() > 256 {
        violations.push(NetworkError::TooManyModels(distinct.len()));
    }

    let axon_keys: Vec<String> = def.axons.keys().cloned().collect();
    let neuron_keys: Vec<String> = def.neurons.keys().cloned().collect();
    for key in axon_keys.iter().chain(&neuron_keys) {
        if !key_ok(key) {
            violations.push(NetworkError::InvalidKey(key.clone()));
        }
    }
    let neuron_index = |key: &str| neuron_keys.binary_search_by(|k| k.as_str().cmp(key)).ok();

    let resolve = |source: &str, synapses: &[Synapse], violations: &mut Vec<NetworkError>| {
        let mut out = Vec::with_capacity(synapses.len());
        let mut seen = BTreeSet::new();
        for syn in synapses {
            let Some(target) = neuron_index(&syn.target) else {
                violations.push(NetworkError::DanglingTarget {
                    source_key: source.to_owned(),
                    target: syn.target.clone(),
                });
                continue;
            };
            if !seen.insert(target) {
                violations.push(NetworkError::DuplicateSynapse {
                    source_key: source.to_owned(),
                    target: syn.target.clone(),
                });
                continue;
            }
            match i16::try_from(syn.weight) {
                Ok(w) => out.push((target as u32, w)),
                Err(_) => violations.push(NetworkError::WeightOutOfRange {
                    source_key: source.to_owned(),
                    target: syn.target.clone(),
                    weight: syn.weight,
                }),
            }
        }
        out
    };

    let axon_synapses: Vec<_> = def
        .axons
        .iter()
        .map(|(key, syns)| resolve(key, syns, &mut violations))
        .collect();

    let mut neuron_model = Vec::with_capacity(def.neurons.len());
    let mut neuron_synapses = Vec::with_capacity(def.neurons.len());
    for (key, neuron) in &def.neurons {
        match remap.get(neuron.model) {
            Some(&id) => neuron_model.push(id.min(255) as u8),
            None => {
                violations.push(NetworkError::UnknownModel {
                    neuron: key.clone(),
                    model: neuron.model,
                    available: def.models.len(),
                });
                neuron_model.push(0);
            }
        }
        neuron_synapses.push(resolve(key, &neuron.synapses, &mut violations));
    }

    let mut is_output = vec![false; neuron_keys.len()];
    for key in &def.outputs {
        match neuron_index(key) {
            Some(i) => is_output[i] = true,
            None => violations.push(NetworkError::UnknownOutput(key.clone())),
        }
    }

    if !violations.is_empty() {
        return Err(ValidationError { violations });
    }

    Ok(ValidatedNetwork {
        def: def.clone(),
        axon_keys,
        neuron_keys,
        models: distinct,
        neuron_model,
        axon_synapses,
        neuron_synapses,
        is_output,
    })
}

impl ValidatedNetwork {
    pub fn def(&self) -> &NetworkDef {
        &self.def
    }

    pub fn num_axons(&self) -> usize {
        self.axon_keys.len()
    }

    pub fn num_neurons(&self) -> usize {
        self.neuron_keys.len()
    }

    pub fn num_synapses(&self) -> usize {
        self.axon_synapses.iter().chain(&self.neuron_synapses).map(Vec::len).sum()
    }

    pub fn axon_keys(&self) -> &[String] {
        &self.axon_keys
    }

    pub fn neuron_keys(&self) -> &[String] {
        &self.neuron_keys
    }

    pub fn axon_index(&self, key: &str) -> Option<u32> {
        self.axon_keys.binary_search_by(|k| k.as_str().cmp(key)).ok().map(|i| i as u32)
    }

    pub fn neuron_index(&self, key: &str) -> Option<u32> {
        self.neuron_keys.binary_search_by(|k| k.as_str().cmp(key)).ok().map(|i| i as u32)
    }

    /// Deduplicated model table.
    pub fn models(&self) -> &[NeuronModelSpec] {
        &self.models
    }

    pub fn model_id(&self, neuron: u32) -> u8 {
        self.neuron_model[neuron as usize]
    }

    pub fn model_of(&self, neuron: u32) -> &NeuronModelSpec {
        &self.models[self.neuron_model[neuron as usize] as usize]
    }

    pub fn axon_synapses(&self, axon: u32) -> &[(u32, i16)] {
        &self.axon_synapses[axon as usize]
    }

    pub fn neuron_synapses(&self, neuron: u32) -> &[(u32, i16)] {
        &self.neuron_synapses[neuron as usize]
    }

    pub fn synapses_of(&self, source: Source) -> &[(u32, i16)] {
        match source {
            Source::Axon(a) => self.axon_synapses(a),
            Source::Neuron(n) => self.neuron_synapses(n),
        }
    }

    pub fn is_output(&self, neuron: u32) -> bool {
        self.is_output[neuron as usize]
    }

    pub fn resolve_source(&self, key: &SourceKey) -> Option<Source> {
        match key {
            SourceKey::Axon(k) => self.axon_index(k).map(Source::Axon),
            SourceKey::Neuron(k) => self.neuron_index(k).map(Source::Neuron),
        }
    }

    /// Looks up a presynaptic key in both namespaces. Returns `None` when the
    /// key is unknown or names both an axon and a neuron.
    pub fn lookup_source(&self, key: &str) -> Option<Source> {
        match (self.axon_index(key), self.neuron_index(key)) {
            (Some(a), None) => Some(Source::Axon(a)),
            (None, Some(n)) => Some(Source::Neuron(n)),
            _ => None,
        }
    }
}
