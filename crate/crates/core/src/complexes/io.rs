//! DOT and JSON export, and JSON import of plain weighted graphs.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{EdgeLabel, GraphKind, LabeledGraph, Meta, Payload};
use crate::error::{Error, Result};
use crate::words::{Alphabet, Word};

#[derive(Serialize, Deserialize)]
struct JsonVertex {
    id: usize,
    payload: String,
}

#[derive(Serialize, Deserialize)]
struct JsonEdge {
    from: usize,
    to: usize,
    label: String,
    length: u32,
}

#[derive(Serialize, Deserialize)]
struct JsonMeta {
    r: usize,
    #[serde(rename = "R_H")]
    r_h: usize,
    scale: u32,
    exact: Option<bool>,
}

#[derive(Serialize, Deserialize)]
struct JsonGraph {
    vertices: Vec<JsonVertex>,
    edges: Vec<JsonEdge>,
    meta: JsonMeta,
}

impl LabeledGraph {
    /// JSON document `{vertices, edges, meta}` with payloads and labels
    /// rendered as text.
    pub fn to_json(&self, alphabet: &Alphabet, key_alphabet: &Alphabet) -> Result<String> {
        let doc = JsonGraph {
            vertices: (0..self.vertex_count())
                .map(|v| JsonVertex { id: v, payload: self.render_payload(v, alphabet, key_alphabet) })
                .collect(),
            edges: self
                .edges()
                .iter()
                .map(|e| JsonEdge {
                    from: e.from,
                    to: e.to,
                    label: LabeledGraph::render_label(&e.label, key_alphabet),
                    length: e.length,
                })
                .collect(),
            meta: JsonMeta {
                r: self.meta.r,
                r_h: self.meta.r_h,
                scale: self.meta.scale,
                exact: self.meta.exact,
            },
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Reads a graph written by [`LabeledGraph::to_json`] (or by hand).
    /// Payloads and labels come back as opaque text.
    pub fn from_json(s: &str) -> Result<LabeledGraph> {
        let doc: JsonGraph = serde_json::from_str(s)?;
        let mut g = LabeledGraph::new(Meta {
            kind: GraphKind::Loaded,
            r: doc.meta.r,
            r_h: doc.meta.r_h,
            scale: doc.meta.scale.max(1),
            exact: doc.meta.exact,
        });
        let mut ids: Vec<usize> = doc.vertices.iter().map(|v| v.id).collect();
        ids.sort_unstable();
        if ids.iter().enumerate().any(|(i, &id)| i != id) {
            return Err(Error::Graph("vertex ids must be 0..n".into()));
        }
        let mut vs = doc.vertices;
        vs.sort_by_key(|v| v.id);
        for v in vs {
            if g.find(&Payload::Raw(v.payload.clone())).is_some() {
                return Err(Error::Graph(format!("duplicate vertex payload {:?}", v.payload)));
            }
            g.add_vertex(Payload::Raw(v.payload), Word::empty());
        }
        let n = g.vertex_count();
        for e in doc.edges {
            if e.from >= n || e.to >= n {
                return Err(Error::Graph(format!("edge ({},{}) outside {n} vertices", e.from, e.to)));
            }
            g.add_edge(e.from, e.to, EdgeLabel::Named(e.label), e.length)?;
        }
        Ok(g)
    }

    pub fn to_dot(&self, alphabet: &Alphabet, key_alphabet: &Alphabet) -> String {
        let mut s = String::from("graph ball {\n");
        for v in 0..self.vertex_count() {
            let _ = writeln!(s, "  {v} [label={:?}];", self.render_payload(v, alphabet, key_alphabet));
        }
        for e in self.edges() {
            let label = LabeledGraph::render_label(&e.label, key_alphabet);
            let _ = writeln!(s, "  {} -- {} [label={:?}, len={}];", e.from, e.to, label, e.length);
        }
        s.push_str("}\n");
        s
    }
}
