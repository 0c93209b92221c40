//! Text form of a [`NetworkDef`].
//!
//! The document is JSON with four top-level sections:
//!
//! ```json
//! {
//!   "models": [{ "kind": "lif", "threshold": 3, "shift": -17, "leak": 63 }],
//!   "axons": { "alpha": [["a", 3]] },
//!   "neurons": { "a": { "model": 0, "synapses": [["b", 1]] }, "b": { "model": 0 } },
//!   "outputs": ["a"]
//! }
//! ```
//!
//! Serialization sorts axon keys, neuron keys and outputs, so equal networks
//! always produce identical bytes. Synapse lists keep their order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::marker::PhantomData;

use serde::de::{self, Deserializer, MapAccess, SeqAccess, Visitor};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::def::{NetworkDef, NeuronDef, Synapse};
use super::model::NeuronModelSpec;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DocumentError {
    #[error("syntax error at line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("schema error at {path}: {reason}")]
    Schema { path: String, reason: String },
}

#[derive(Serialize)]
struct DocumentOut<'a> {
    models: &'a [NeuronModelSpec],
    axons: &'a BTreeMap<String, Vec<Synapse>>,
    neurons: &'a BTreeMap<String, NeuronDef>,
    outputs: &'a BTreeSet<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DocumentIn {
    #[serde(default)]
    models: Vec<NeuronModelSpec>,
    #[serde(default)]
    axons: UniqueMap<Vec<Synapse>>,
    #[serde(default)]
    neurons: UniqueMap<NeuronDef>,
    #[serde(default)]
    outputs: UniqueSet,
}

/// Map that rejects repeated keys instead of keeping the last one.
struct UniqueMap<V>(BTreeMap<String, V>);

impl<V> Default for UniqueMap<V> {
    fn default() -> Self {
        Self(BTreeMap::new())
    }
}

impl<'de, V: Deserialize<'de>> Deserialize<'de> for UniqueMap<V> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct MapVisitor<V>(PhantomData<V>);

        impl<'de, V: Deserialize<'de>> Visitor<'de> for MapVisitor<V> {
            type Value = UniqueMap<V>;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a map with unique keys")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut out = BTreeMap::new();
                while let Some(key) = access.next_key::<String>()? {
                    if out.contains_key(&key) {
                        return Err(de::Error::custom(format!("duplicate key '{key}'")));
                    }
                    let value = access.next_value()?;
                    out.insert(key, value);
                }
                Ok(UniqueMap(out))
            }
        }

        deserializer.deserialize_map(MapVisitor(PhantomData))
    }
}

#[derive(Default)]
struct UniqueSet(BTreeSet<String>);

impl<'de> Deserialize<'de> for UniqueSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct SetVisitor;

        impl<'de> Visitor<'de> for SetVisitor {
            type Value = UniqueSet;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a list of unique keys")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut out = BTreeSet::new();
                while let Some(key) = access.next_element::<String>()? {
                    if !out.insert(key.clone()) {
                        return Err(de::Error::custom(format!("duplicate key '{key}'")));
                    }
                }
                Ok(UniqueSet(out))
            }
        }

        deserializer.deserialize_seq(SetVisitor)
    }
}

/// Parses a network document. Model parameter bounds are checked here too.
pub fn parse_network(text: &str) -> Result<NetworkDef, DocumentError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let doc: DocumentIn = match serde_path_to_error::deserialize(&mut de) {
        Ok(doc) => doc,
        Err(err) => {
            let path = err.path().to_string();
            let inner = err.into_inner();
            return Err(match inner.classify() {
                serde_json::error::Category::Data => {
                    DocumentError::Schema { path, reason: strip_position(&inner) }
                }
                _ => DocumentError::Syntax { line: inner.line(), reason: strip_position(&inner) },
            });
        }
    };
    if let Err(err) = de.end() {
        return Err(DocumentError::Syntax { line: err.line(), reason: strip_position(&err) });
    }

    for (i, model) in doc.models.iter().enumerate() {
        if let Err((field, reason)) = model.check() {
            return Err(DocumentError::Schema { path: format!("models[{i}].{field}"), reason });
        }
    }

    Ok(NetworkDef {
        models: doc.models,
        axons: doc.axons.0,
        neurons: doc.neurons.0,
        outputs: doc.outputs.0,
    })
}

// serde_json appends " at line X column Y" to its messages.
fn strip_position(err: &serde_json::Error) -> String {
    let msg = err.to_string();
    match msg.rfind(" at line ") {
        Some(pos) => msg[..pos].to_owned(),
        None => msg,
    }
}

/// Canonical document text, terminated by a newline.
pub fn serialize_network(def: &NetworkDef) -> String {
    let doc = DocumentOut {
        models: &def.models,
        axons: &def.axons,
        neurons: &def.neurons,
        outputs: &def.outputs,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("network documents always serialize");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::demo_network;

    #[test]
    fn demo_round_trip() {
        let def = demo_network();
        let text = serialize_network(&def);
        let back = parse_network(&text).unwrap();
        assert_eq!(back, def);
        assert_eq!(back.axons.len(), 2);
        assert_eq!(back.neurons.len(), 4);
        assert_eq!(serialize_network(&back), text);
    }

    #[test]
    fn insertion_order_does_not_matter() {
        let model = NeuronModelSpec::lif(3, -17, 63);
        let mut x = NetworkDef::new();
        x.add_model(model);
        x.add_neuron("n2", 0, [("n1".to_string(), 4)]).unwrap();
        x.add_neuron("n1", 0, []).unwrap();
        x.add_output("n2").unwrap();
        x.add_output("n1").unwrap();
        let mut y = NetworkDef::new();
        y.add_model(model);
        y.add_neuron("n1", 0, []).unwrap();
        y.add_neuron("n2", 0, [("n1".to_string(), 4)]).unwrap();
        y.add_output("n1").unwrap();
        y.add_output("n2").unwrap();
        assert_eq!(serialize_network(&x).as_bytes(), serialize_network(&y).as_bytes());
    }

    #[test]
    fn negative_leak_is_schema_error() {
        let text = r#"{"models": [{"kind": "lif", "threshold": 3, "shift": 0, "leak": -1}],
                       "neurons": {"a": {"model": 0}}}"#;
        match parse_network(text) {
            Err(DocumentError::Schema { path, .. }) => assert_eq!(path, "models[0].leak"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn leak_above_range_is_schema_error() {
        let text = r#"{"models": [{"kind": "lif", "threshold": 3, "leak": 64}], "neurons": {"a": {"model": 0}}}"#;
        assert!(matches!(parse_network(text), Err(DocumentError::Schema { path, .. }) if path == "models[0].leak"));
    }

    #[test]
    fn minimal_document() {
        let text = r#"{"models": [{"kind": "binary", "threshold": 0}], "neurons": {"only": {"model": 0}}}"#;
        let def = parse_network(text).unwrap();
        assert_eq!(def.neurons.len(), 1);
        assert!(def.axons.is_empty());
        assert!(def.validate().is_ok());
    }

    #[test]
    fn syntax_error_reports_line() {
        let text = "{\n  \"models\": [\n  ,\n}";
        match parse_network(text) {
            Err(DocumentError::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_keys_rejected() {
        let text = r#"{"models": [{"kind": "binary", "threshold": 0}],
                       "neurons": {"a": {"model": 0}, "a": {"model": 0}}}"#;
        assert!(matches!(parse_network(text), Err(DocumentError::Schema { path, .. }) if path == "neurons"));
        let text = r#"{"models": [{"kind": "binary", "threshold": 0}],
                       "neurons": {"a": {"model": 0}}, "outputs": ["a", "a"]}"#;
        assert!(matches!(parse_network(text), Err(DocumentError::Schema { .. })));
    }

    #[test]
    fn unknown_section_rejected() {
        let text = r#"{"neurons": {}, "extra": 1}"#;
        assert!(matches!(parse_network(text), Err(DocumentError::Schema { .. })));
    }
}
