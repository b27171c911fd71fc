//! The relation graph induced by related identifiers across a corpus.
//!
//! Identifiers are compared in normalized form (see
//! [`normalize_identifier`]), so `http://hdl.handle.net/X` and `X` name the
//! same node. Only asserted relations become edges; inverses are found by
//! querying in the other direction.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::model::{InstrumentRecord, RelationType};
use crate::pid::normalize_identifier;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum NodeKind {
    Instrument,
    External,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Edge {
    pub from: String,
    #[serde(serialize_with = "relation_str")]
    pub relation: RelationType,
    pub to: String,
    pub identifier_type: String,
}

fn relation_str<S: serde::Serializer>(r: &RelationType, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(r.as_str())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Out,
    In,
    Both,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("two corpus records share the identifier `{0}`")]
    DuplicateInstrumentPid(String),
    #[error("corpus record {0} has no identifier")]
    MissingIdentifier(usize),
    #[error("`{0}` is not a node of the graph")]
    NodeNotFound(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PidGraph {
    nodes: BTreeMap<String, NodeKind>,
    /// Keyed by (from, relation, to); the value is the identifier type.
    edges: BTreeMap<(String, RelationType, String), String>,
}

pub fn build_graph(corpus: &[InstrumentRecord]) -> Result<PidGraph, GraphError> {
    let mut g = PidGraph::default();
    let mut keys = Vec::with_capacity(corpus.len());
    for (i, r) in corpus.iter().enumerate() {
        let id = r.identifier.as_ref().ok_or(GraphError::MissingIdentifier(i))?;
        let key = normalize_identifier(id.value());
        if g.nodes.insert(key.clone(), NodeKind::Instrument).is_some() {
            return Err(GraphError::DuplicateInstrumentPid(key));
        }
        keys.push(key);
    }
    for (r, from) in corpus.iter().zip(&keys) {
        for rel in &r.related_identifiers {
            let to = normalize_identifier(&rel.value);
            g.nodes.entry(to.clone()).or_insert(NodeKind::External);
            let slot = g
                .edges
                .entry((from.clone(), rel.relation_type.clone(), to))
                .or_insert_with(|| rel.identifier_type.clone());
            // Duplicate triples collapse; keep the smallest type so the
            // result does not depend on corpus order.
            if rel.identifier_type < *slot {
                *slot = rel.identifier_type.clone();
            }
        }
    }
    Ok(g)
}

impl PidGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn kind(&self, pid: &str) -> Option<NodeKind> {
        self.nodes.get(&normalize_identifier(pid)).copied()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&str, NodeKind)> {
        self.nodes.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().map(|((from, relation, to), t)| Edge {
            from: from.clone(),
            relation: relation.clone(),
            to: to.clone(),
            identifier_type: t.clone(),
        })
    }

    /// Edges touching `pid`, ordered by (relation, to, from).
    pub fn neighbors(
        &self,
        pid: &str,
        relation: Option<&RelationType>,
        direction: Direction,
    ) -> Result<Vec<Edge>, GraphError> {
        let key = normalize_identifier(pid);
        if !self.nodes.contains_key(&key) {
            return Err(GraphError::NodeNotFound(pid.to_string()));
        }
        let mut out: Vec<Edge> = self
            .edges()
            .filter(|e| relation.is_none_or(|r| &e.relation == r))
            .filter(|e| match direction {
                Direction::Out => e.from == key,
                Direction::In => e.to == key,
                Direction::Both => e.from == key || e.to == key,
            })
            .collect();
        out.sort_by(|a, b| {
            (&a.relation, &a.to, &a.from).cmp(&(&b.relation, &b.to, &b.from))
        });
        Ok(out)
    }

    /// Link targets with no record in the corpus, sorted.
    pub fn dangling(&self) -> Vec<String> {
        self.nodes
            .iter()
            .filter(|(_, k)| **k == NodeKind::External)
            .map(|(v, _)| v.clone())
            .collect()
    }

    /// One `from<TAB>relation<TAB>to` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        for (from, rel, to) in self.edges.keys() {
            let _ = writeln!(s, "{from}\t{rel}\t{to}");
        }
        s
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Node<'a> {
            pid: &'a str,
            kind: NodeKind,
        }
        #[derive(Serialize)]
        struct Dump<'a> {
            nodes: Vec<Node<'a>>,
            edges: Vec<Edge>,
        }
        let dump = Dump {
            nodes: self.nodes().map(|(pid, kind)| Node { pid, kind }).collect(),
            edges: self.edges().collect(),
        };
        let mut s = serde_json::to_string_pretty(&dump).expect("graph serializes");
        s.push('\n');
        s
    }
}
