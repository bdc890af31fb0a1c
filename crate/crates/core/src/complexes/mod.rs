//! Finite balls of the relative Cayley graph, the left coset graph, the
//! coned-off Cayley graph and the Bass–Serre tree.
//!
//! Every graph is undirected with positive integer edge lengths; `scale`
//! records how many length units make one true unit (the coned-off graph
//! uses 2 so that cone edges of length 1/2 stay integral).

mod build;
mod io;

use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};
use std::cmp::Reverse;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::groups::Element;
use crate::words::{Alphabet, Letter, Word};

pub use build::{
    bass_serre_ball, coned_off_ball, coset_ball, edge_orbit_witness, relative_ball,
    relative_ball_checked, BallParams,
};

pub const UNREACHABLE: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Payload {
    Element(Element),
    /// Left coset `rep·Hᵢ`; `rep` is the canonical key.
    Coset { index: usize, rep: Word },
    /// Cone point `v(rep·Hᵢ)`.
    Cone { index: usize, rep: Word },
    Raw(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum EdgeLabel {
    Gen(Letter),
    Parabolic { index: usize, element: Word },
    /// Left coset graph label `(i, j, x)`; `None` stands for `x = 1`.
    Triple { i: usize, j: usize, x: Option<Letter> },
    Cone(usize),
    Tree,
    Named(String),
}

impl EdgeLabel {
    /// Label of the same edge read in the opposite direction.
    pub fn reversed(&self) -> EdgeLabel {
        match self {
            EdgeLabel::Gen(l) => EdgeLabel::Gen(l.inverse()),
            EdgeLabel::Parabolic { index, element } => {
                EdgeLabel::Parabolic { index: *index, element: element.inverse() }
            }
            EdgeLabel::Triple { i, j, x } => EdgeLabel::Triple { i: *j, j: *i, x: x.map(Letter::inverse) },
            other => other.clone(),
        }
    }

    pub fn is_parabolic(&self) -> bool {
        matches!(self, EdgeLabel::Parabolic { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub label: EdgeLabel,
    pub length: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphKind {
    Relative,
    Coset,
    ConedOff,
    BassSerre,
    Loaded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Meta {
    pub kind: GraphKind,
    pub r: usize,
    pub r_h: usize,
    pub scale: u32,
    /// Whether rebuilding with a larger truncation left all distances
    /// unchanged; `None` when not checked.
    pub exact: Option<bool>,
}

/// One edge traversal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Step {
    pub edge: usize,
    pub forward: bool,
}

impl Step {
    pub fn reversed(self) -> Step {
        Step { edge: self.edge, forward: !self.forward }
    }
}

/// Edge path from `start`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    pub start: usize,
    pub steps: Vec<Step>,
}

impl Path {
    pub fn trivial(v: usize) -> Self {
        Path { start: v, steps: Vec::new() }
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn vertices(&self, g: &LabeledGraph) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        let mut v = self.start;
        out.push(v);
        for s in &self.steps {
            v = g.step_target(v, *s);
            out.push(v);
        }
        out
    }

    pub fn end(&self, g: &LabeledGraph) -> usize {
        self.steps.iter().fold(self.start, |v, s| g.step_target(v, *s))
    }

    pub fn is_closed(&self, g: &LabeledGraph) -> bool {
        self.end(g) == self.start
    }

    /// Total edge length.
    pub fn length(&self, g: &LabeledGraph) -> u64 {
        self.steps.iter().map(|s| g.edges[s.edge].length as u64).sum()
    }

    pub fn reversed(&self, g: &LabeledGraph) -> Path {
        Path { start: self.end(g), steps: self.steps.iter().rev().map(|s| s.reversed()).collect() }
    }

    pub fn then(&self, other: &Path) -> Path {
        let mut steps = self.steps.clone();
        steps.extend_from_slice(&other.steps);
        Path { start: self.start, steps }
    }

    /// Checks that consecutive steps are incident.
    pub fn validate(&self, g: &LabeledGraph) -> Result<()> {
        let mut v = self.start;
        if v >= g.vertex_count() {
            return Err(Error::Graph(format!("vertex {v} not in graph")));
        }
        for s in &self.steps {
            let e = g.edges.get(s.edge).ok_or_else(|| Error::Graph(format!("edge {} not in graph", s.edge)))?;
            let tail = if s.forward { e.from } else { e.to };
            if tail != v {
                return Err(Error::Graph(format!("step along edge {} does not start at vertex {v}", s.edge)));
            }
            v = if s.forward { e.to } else { e.from };
        }
        Ok(())
    }
}

#[derive(Debug)]
pub struct LabeledGraph {
    vertices: Vec<Payload>,
    words: Vec<Word>,
    edges: Vec<Edge>,
    witnesses: Vec<Option<(Word, Word)>>,
    adj: Vec<Vec<(usize, usize)>>,
    index: HashMap<Payload, usize>,
    edge_set: HashSet<(usize, usize, EdgeLabel)>,
    meta: Meta,
    dist: Vec<OnceLock<Vec<u32>>>,
    cached: AtomicBool,
}

impl Clone for LabeledGraph {
    fn clone(&self) -> Self {
        LabeledGraph {
            vertices: self.vertices.clone(),
            words: self.words.clone(),
            edges: self.edges.clone(),
            witnesses: self.witnesses.clone(),
            adj: self.adj.clone(),
            index: self.index.clone(),
            edge_set: self.edge_set.clone(),
            meta: self.meta.clone(),
            dist: self.dist.iter().map(|c| c.get().cloned().map(OnceLock::from).unwrap_or_default()).collect(),
            cached: AtomicBool::new(self.cached.load(Ordering::Relaxed)),
        }
    }
}

impl LabeledGraph {
    pub fn new(meta: Meta) -> Self {
        LabeledGraph {
            vertices: Vec::new(),
            words: Vec::new(),
            edges: Vec::new(),
            witnesses: Vec::new(),
            adj: Vec::new(),
            index: HashMap::new(),
            edge_set: HashSet::new(),
            meta,
            dist: Vec::new(),
            cached: AtomicBool::new(false),
        }
    }

    /// Plain graph on `n` vertices with the given weighted edges.
    pub fn from_edges(n: usize, edges: &[(usize, usize, u32)]) -> Result<Self> {
        let mut g = LabeledGraph::new(Meta { kind: GraphKind::Loaded, r: 0, r_h: 0, scale: 1, exact: None });
        for i in 0..n {
            g.add_vertex(Payload::Raw(i.to_string()), Word::empty());
        }
        for &(u, v, len) in edges {
            if u >= n || v >= n {
                return Err(Error::Graph(format!("edge ({u},{v}) outside {n} vertices")));
            }
            g.add_edge(u, v, EdgeLabel::Named(String::new()), len)?;
        }
        Ok(g)
    }

    pub fn meta(&self) -> &Meta {
        &self.meta
    }

    pub fn meta_mut(&mut self) -> &mut Meta {
        &mut self.meta
    }

    pub fn scale(&self) -> u32 {
        self.meta.scale
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn payload(&self, v: usize) -> &Payload {
        &self.vertices[v]
    }

    pub fn payloads(&self) -> &[Payload] {
        &self.vertices
    }

    /// Representative word of a vertex over the group alphabet.
    pub fn word(&self, v: usize) -> &Word {
        &self.words[v]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    /// Witness pair `(a, b)` with `b = a·x` for a coset-graph edge, oriented
    /// like the stored edge.
    pub fn witness(&self, e: usize) -> Option<&(Word, Word)> {
        self.witnesses[e].as_ref()
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    pub fn find(&self, p: &Payload) -> Option<usize> {
        self.index.get(p).copied()
    }

    /// Vertex holding the group element with this canonical key.
    pub fn find_element(&self, key: &Word) -> Option<usize> {
        self.find(&Payload::Element(Element { key: key.clone(), word: Word::empty() }))
    }

    pub fn add_vertex(&mut self, p: Payload, word: Word) -> usize {
        if let Some(&i) = self.index.get(&p) {
            return i;
        }
        let i = self.vertices.len();
        self.index.insert(p.clone(), i);
        self.vertices.push(p);
        self.words.push(word);
        self.adj.push(Vec::new());
        self.dist.push(OnceLock::new());
        self.reset_cache();
        i
    }

    fn reset_cache(&mut self) {
        if *self.cached.get_mut() {
            self.dist = (0..self.vertices.len()).map(|_| OnceLock::new()).collect();
            *self.cached.get_mut() = false;
        }
    }

    /// Adds an undirected edge unless one with the same endpoints and label
    /// already exists. Returns the edge id, or `None` for a duplicate.
    pub fn add_edge(&mut self, u: usize, v: usize, label: EdgeLabel, length: u32) -> Result<Option<usize>> {
        self.add_edge_with_witness(u, v, label, length, None)
    }

    pub fn add_edge_with_witness(
        &mut self,
        u: usize,
        v: usize,
        label: EdgeLabel,
        length: u32,
        witness: Option<(Word, Word)>,
    ) -> Result<Option<usize>> {
        if u == v {
            return Err(Error::Graph(format!("self-loop at vertex {u}")));
        }
        if length == 0 {
            return Err(Error::Graph("edge lengths must be positive".into()));
        }
        let (from, to, label, witness) = if u < v {
            (u, v, label, witness)
        } else {
            (v, u, label.reversed(), witness.map(|(a, b)| (b, a)))
        };
        if !self.edge_set.insert((from, to, label.clone())) {
            return Ok(None);
        }
        let id = self.edges.len();
        self.edges.push(Edge { from, to, label, length });
        self.witnesses.push(witness);
        self.adj[from].push((to, id));
        self.adj[to].push((from, id));
        self.reset_cache();
        Ok(Some(id))
    }

    pub fn has_edge_between(&self, u: usize, v: usize) -> bool {
        self.adj[u].iter().any(|&(w, _)| w == v)
    }

    pub fn step_target(&self, v: usize, s: Step) -> usize {
        let e = &self.edges[s.edge];
        if s.forward {
            debug_assert_eq!(e.from, v);
            e.to
        } else {
            debug_assert_eq!(e.to, v);
            e.from
        }
    }

    /// Step leaving `v` along edge `e`.
    pub fn step_from(&self, v: usize, e: usize) -> Step {
        Step { edge: e, forward: self.edges[e].from == v }
    }

    /// Label read along a step.
    pub fn step_label(&self, s: Step) -> EdgeLabel {
        let l = &self.edges[s.edge].label;
        if s.forward {
            l.clone()
        } else {
            l.reversed()
        }
    }

    fn unit_lengths(&self) -> bool {
        self.edges.iter().all(|e| e.length == 1)
    }

    fn compute_distances(&self, s: usize) -> Vec<u32> {
        let n = self.vertices.len();
        let mut d = vec![UNREACHABLE; n];
        d[s] = 0;
        if self.unit_lengths() {
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for &(v, _) in &self.adj[u] {
                    if d[v] == UNREACHABLE {
                        d[v] = d[u] + 1;
                        q.push_back(v);
                    }
                }
            }
        } else {
            let mut heap = BinaryHeap::from([Reverse((0u32, s))]);
            while let Some(Reverse((du, u))) = heap.pop() {
                if du > d[u] {
                    continue;
                }
                for &(v, e) in &self.adj[u] {
                    let nd = du + self.edges[e].length;
                    if nd < d[v] {
                        d[v] = nd;
                        heap.push(Reverse((nd, v)));
                    }
                }
            }
        }
        d
    }

    /// Distances from `s` to every vertex, computed once and cached.
    pub fn distances_from(&self, s: usize) -> &[u32] {
        self.dist[s].get_or_init(|| {
            self.cached.store(true, Ordering::Relaxed);
            self.compute_distances(s)
        })
    }

    /// Weighted distance, `None` when disconnected.
    pub fn distance(&self, u: usize, v: usize) -> Option<u32> {
        let d = self.distances_from(u)[v];
        (d != UNREACHABLE).then_some(d)
    }

    /// Fills the whole distance table using all worker threads.
    pub fn all_distances(&self) -> Vec<&[u32]> {
        (0..self.vertex_count()).into_par_iter().for_each(|s| {
            self.distances_from(s);
        });
        (0..self.vertex_count()).map(|s| self.distances_from(s)).collect()
    }

    pub fn is_connected(&self) -> bool {
        self.vertex_count() == 0 || self.distances_from(0).iter().all(|&d| d != UNREACHABLE)
    }

    /// Connected with `|E| = |V| - 1`.
    pub fn is_acyclic(&self) -> bool {
        self.is_connected() && self.edge_count() + 1 == self.vertex_count()
    }

    /// Proper 2-colouring, if one exists.
    pub fn bipartition(&self) -> Option<Vec<u8>> {
        let n = self.vertex_count();
        let mut colour = vec![u8::MAX; n];
        for s in 0..n {
            if colour[s] != u8::MAX {
                continue;
            }
            colour[s] = 0;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for &(v, _) in &self.adj[u] {
                    if colour[v] == u8::MAX {
                        colour[v] = 1 - colour[u];
                        q.push_back(v);
                    } else if colour[v] == colour[u] {
                        return None;
                    }
                }
            }
        }
        Some(colour)
    }

    pub fn is_bipartite(&self) -> bool {
        self.bipartition().is_some()
    }

    /// A shortest path, preferring at each step the incident edge of
    /// smallest id.
    pub fn geodesic(&self, u: usize, v: usize) -> Result<Path> {
        let dv = self.distances_from(v);
        if dv[u] == UNREACHABLE {
            return Err(Error::Graph(format!("vertices {u} and {v} are disconnected")));
        }
        let mut path = Path::trivial(u);
        let mut cur = u;
        while cur != v {
            let (next, e) = self.adj[cur]
                .iter()
                .filter(|&&(w, e)| dv[w] != UNREACHABLE && dv[w] + self.edges[e].length == dv[cur])
                .min_by_key(|&&(_, e)| e)
                .copied()
                .expect("distance table is consistent");
            path.steps.push(self.step_from(cur, e));
            cur = next;
        }
        Ok(path)
    }

    /// All shortest paths from `u` to `v`, stopping after `cap`; the flag is
    /// true when the list was cut short.
    pub fn all_geodesics(&self, u: usize, v: usize, cap: usize) -> Result<(Vec<Path>, bool)> {
        let dv = self.distances_from(v);
        if dv[u] == UNREACHABLE {
            return Err(Error::Graph(format!("vertices {u} and {v} are disconnected")));
        }
        let mut out = Vec::new();
        let mut truncated = false;
        let mut stack = vec![Path::trivial(u)];
        while let Some(p) = stack.pop() {
            let cur = p.end(self);
            if cur == v {
                if out.len() == cap {
                    truncated = true;
                    break;
                }
                out.push(p);
                continue;
            }
            let mut nexts: Vec<(usize, usize)> = self.adj[cur]
                .iter()
                .filter(|&&(w, e)| dv[w] != UNREACHABLE && dv[w] + self.edges[e].length == dv[cur])
                .copied()
                .collect();
            nexts.sort_by_key(|&(_, e)| std::cmp::Reverse(e));
            for (_, e) in nexts {
                let mut q = p.clone();
                q.steps.push(self.step_from(cur, e));
                stack.push(q);
            }
        }
        Ok((out, truncated))
    }

    /// Largest distance between two vertices of the list.
    pub fn diameter_of(&self, vs: &[usize]) -> u32 {
        let mut best = 0;
        for (i, &a) in vs.iter().enumerate() {
            let d = self.distances_from(a);
            for &b in &vs[i + 1..] {
                best = best.max(d[b]);
            }
        }
        best
    }

    /// Word read along a path whose edges are generator or parabolic edges.
    pub fn walk_word(&self, p: &Path) -> Result<Word> {
        let mut letters: Vec<Letter> = Vec::new();
        for s in &p.steps {
            match self.step_label(*s) {
                EdgeLabel::Gen(l) => letters.push(l),
                EdgeLabel::Parabolic { element, .. } => letters.extend_from_slice(element.letters()),
                other => return Err(Error::Graph(format!("edge label {other:?} has no group word"))),
            }
        }
        Ok(Word::new(letters))
    }

    pub fn render_payload(&self, v: usize, alphabet: &Alphabet, key_alphabet: &Alphabet) -> String {
        match &self.vertices[v] {
            Payload::Element(e) => alphabet.format(&e.word),
            Payload::Coset { index, rep } => format!("{}*H{index}", key_alphabet.format(rep)),
            Payload::Cone { index, rep } => format!("v({}*H{index})", key_alphabet.format(rep)),
            Payload::Raw(s) => s.clone(),
        }
    }

    pub fn render_label(label: &EdgeLabel, alphabet: &Alphabet) -> String {
        match label {
            EdgeLabel::Gen(l) => alphabet.format_letters(&[*l]),
            EdgeLabel::Parabolic { index, element } => format!("H{index}:{}", alphabet.format(element)),
            EdgeLabel::Triple { i, j, x } => {
                let x = x.map(|l| alphabet.format_letters(&[l])).unwrap_or_else(|| "1".into());
                format!("({i},{j},{x})")
            }
            EdgeLabel::Cone(i) => format!("cone{i}"),
            EdgeLabel::Tree => "tree".into(),
            EdgeLabel::Named(s) => s.clone(),
        }
    }
}

#[cfg(test)]
mod tests;
