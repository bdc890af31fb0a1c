//! Folded subgroup graphs of finitely generated subgroups of free groups.
//!
//! The graph is the core of the subgroup together with the path from the
//! basepoint to the core (the basepoint is never trimmed). Vertex 0 is the
//! basepoint. Vertices are numbered in shortlex order of their tree words,
//! so two folds of the same subgroup produce identical graphs.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::words::{Letter, Word};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisEdge {
    pub from: usize,
    pub gen: u32,
    pub to: usize,
    /// `rep(from) · gen · rep(to)⁻¹`.
    pub word: Word,
}

#[derive(Clone, Debug)]
pub struct SubgroupGraph {
    rank: usize,
    out: Vec<Vec<Option<usize>>>,
    inn: Vec<Vec<Option<usize>>>,
    reps: Vec<Word>,
    tree: Vec<Option<(usize, Letter)>>,
    basis: Vec<BasisEdge>,
    basis_of: HashMap<(usize, u32), usize>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        // keep the smaller id so the basepoint 0 stays a root
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        self.0[hi] = lo;
        true
    }
}

/// Stallings folding of the bouquet of `generators` over a free group of
/// the given rank.
pub fn fold(generators: &[Word], rank: usize) -> SubgroupGraph {
    let mut n_vertices = 1usize;
    let mut edges: Vec<(usize, u32, usize)> = Vec::new();
    for w in generators {
        if w.is_empty() {
            continue;
        }
        let mut cur = 0usize;
        let letters = w.letters();
        for (i, l) in letters.iter().enumerate() {
            let next = if i + 1 == letters.len() {
                0
            } else {
                n_vertices += 1;
                n_vertices - 1
            };
            if l.inv {
                edges.push((next, l.gen, cur));
            } else {
                edges.push((cur, l.gen, next));
            }
            cur = next;
        }
    }

    let mut uf = UnionFind((0..n_vertices).collect());
    loop {
        let mut changed = false;
        let mut outm: HashMap<(usize, u32), usize> = HashMap::new();
        let mut inm: HashMap<(usize, u32), usize> = HashMap::new();
        for &(u, g, v) in &edges {
            let (ru, rv) = (uf.find(u), uf.find(v));
            match outm.get(&(ru, g)) {
                Some(&w) => changed |= uf.union(w, rv),
                None => {
                    outm.insert((ru, g), rv);
                }
            }
            let rv = uf.find(v);
            let ru = uf.find(u);
            match inm.get(&(rv, g)) {
                Some(&w) => changed |= uf.union(w, ru),
                None => {
                    inm.insert((rv, g), ru);
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut folded: Vec<(usize, u32, usize)> =
        edges.iter().map(|&(u, g, v)| (uf.find(u), g, uf.find(v))).collect();
    folded.sort_unstable();
    folded.dedup();

    // trim hanging trees away from the basepoint
    loop {
        let mut degree: HashMap<usize, usize> = HashMap::new();
        for &(u, _, v) in &folded {
            *degree.entry(u).or_default() += 1;
            *degree.entry(v).or_default() += 1;
        }
        let before = folded.len();
        folded.retain(|&(u, _, v)| {
            let leaf = |x: usize| x != 0 && degree[&x] == 1;
            !(leaf(u) || leaf(v))
        });
        if folded.len() == before {
            break;
        }
    }

    SubgroupGraph::from_folded_edges(&folded, rank)
}

impl SubgroupGraph {
    fn from_folded_edges(edges: &[(usize, u32, usize)], rank: usize) -> Self {
        let mut ids: HashMap<usize, usize> = HashMap::new();
        ids.insert(0, 0);
        let mut out_raw: HashMap<(usize, u32), usize> = HashMap::new();
        let mut in_raw: HashMap<(usize, u32), usize> = HashMap::new();
        for &(u, g, v) in edges {
            out_raw.insert((u, g), v);
            in_raw.insert((v, g), u);
        }
        // shortlex BFS from the basepoint: first discovery is the shortlex
        // minimal word because parents are dequeued in shortlex order
        let mut order = vec![0usize];
        let mut reps_raw: HashMap<usize, Word> = HashMap::new();
        let mut tree_raw: HashMap<usize, (usize, Letter)> = HashMap::new();
        let mut tree_edges: Vec<(usize, u32, usize)> = Vec::new();
        reps_raw.insert(0, Word::empty());
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for g in 0..rank as u32 {
                for l in [Letter::pos(g), Letter::neg(g)] {
                    let target = if l.inv { in_raw.get(&(v, g)) } else { out_raw.get(&(v, g)) };
                    if let Some(&w) = target {
                        if let std::collections::hash_map::Entry::Vacant(e) = ids.entry(w) {
                            e.insert(order.len());
                            order.push(w);
                            let rep = reps_raw[&v].product(&Word::letter(l));
                            reps_raw.insert(w, rep);
                            tree_raw.insert(w, (v, l));
                            tree_edges.push(if l.inv { (w, g, v) } else { (v, g, w) });
                            queue.push_back(w);
                        }
                    }
                }
            }
        }
        let n = order.len();
        let mut out = vec![vec![None; rank]; n];
        let mut inn = vec![vec![None; rank]; n];
        for &(u, g, v) in edges {
            let (u, v) = (ids[&u], ids[&v]);
            out[u][g as usize] = Some(v);
            inn[v][g as usize] = Some(u);
        }
        let reps: Vec<Word> = order.iter().map(|o| reps_raw[o].clone()).collect();
        let tree: Vec<Option<(usize, Letter)>> = order
            .iter()
            .map(|o| tree_raw.get(o).map(|&(p, l)| (ids[&p], l)))
            .collect();
        let tree_set: std::collections::HashSet<(usize, u32, usize)> =
            tree_edges.iter().map(|&(u, g, v)| (ids[&u], g, ids[&v])).collect();
        let mut all: Vec<(usize, u32, usize)> =
            edges.iter().map(|&(u, g, v)| (ids[&u], g, ids[&v])).collect();
        all.sort_unstable();
        let mut basis = Vec::new();
        let mut basis_of = HashMap::new();
        for (u, g, v) in all {
            if tree_set.contains(&(u, g, v)) {
                continue;
            }
            let word = reps[u].product(&Word::gen(g)).product(&reps[v].inverse());
            basis_of.insert((u, g), basis.len());
            basis.push(BasisEdge { from: u, gen: g, to: v, word });
        }
        SubgroupGraph { rank, out, inn, reps, tree, basis, basis_of }
    }

    pub fn ambient_rank(&self) -> usize {
        self.rank
    }

    pub fn vertex_count(&self) -> usize {
        self.out.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(|o| o.iter().flatten().count()).sum()
    }

    /// Rank of the subgroup: `|E| - |V| + 1`.
    pub fn rank(&self) -> usize {
        self.edge_count() + 1 - self.vertex_count()
    }

    pub fn basis(&self) -> &[BasisEdge] {
        &self.basis
    }

    pub fn basis_words(&self) -> Vec<Word> {
        self.basis.iter().map(|b| b.word.clone()).collect()
    }

    /// Shortlex tree word of each vertex.
    pub fn tree_words(&self) -> &[Word] {
        &self.reps
    }

    pub fn tree_parent(&self, v: usize) -> Option<(usize, Letter)> {
        self.tree[v]
    }

    /// All labelled edges `(from, generator, to)` in canonical numbering.
    pub fn edges(&self) -> Vec<(usize, u32, usize)> {
        let mut e = Vec::new();
        for (u, row) in self.out.iter().enumerate() {
            for (g, t) in row.iter().enumerate() {
                if let Some(v) = t {
                    e.push((u, g as u32, *v));
                }
            }
        }
        e
    }

    fn step(&self, v: usize, l: Letter) -> Option<usize> {
        let g = l.gen as usize;
        if g >= self.rank {
            return None;
        }
        if l.inv {
            self.inn[v][g]
        } else {
            self.out[v][g]
        }
    }

    /// Reads `w` from the basepoint as far as possible. Returns the vertex
    /// reached and the number of letters read.
    pub fn read(&self, w: &Word) -> (usize, usize) {
        let mut v = 0;
        for (i, &l) in w.letters().iter().enumerate() {
            match self.step(v, l) {
                Some(x) => v = x,
                None => return (v, i),
            }
        }
        (v, w.len())
    }

    pub fn member(&self, w: &Word) -> bool {
        let (v, read) = self.read(w);
        v == 0 && read == w.len()
    }

    /// Expresses a member as a word over basis letters (generator `i` of the
    /// result stands for `basis()[i].word`).
    pub fn express_in_basis(&self, w: &Word) -> Result<Word> {
        let mut v = 0;
        let mut out = Vec::new();
        for &l in w.letters() {
            let next = self
                .step(v, l)
                .ok_or_else(|| Error::NotMember("word leaves the subgroup graph".into()))?;
            let edge = if l.inv { (next, l.gen) } else { (v, l.gen) };
            if let Some(&i) = self.basis_of.get(&edge) {
                out.push(Letter { gen: i as u32, inv: l.inv });
            }
            v = next;
        }
        if v != 0 {
            return Err(Error::NotMember("word does not return to the basepoint".into()));
        }
        Ok(Word::new(out))
    }

    /// Substitutes basis words into a basis expression.
    pub fn substitute(&self, expr: &Word) -> Word {
        expr.substitute(|l| {
            let w = &self.basis[l.gen as usize].word;
            if l.inv {
                w.inverse()
            } else {
                w.clone()
            }
        })
    }

    /// Canonical representative of the right coset `H·w`: the shortlex tree
    /// word of the vertex where reading stops, followed by the unread suffix.
    pub fn schreier_rep(&self, w: &Word) -> Word {
        let (v, read) = self.read(w);
        let suffix = Word::new(w.letters()[read..].iter().copied());
        self.reps[v].product(&suffix)
    }

    /// Checks that `gens` is a free basis of the folded subgroup in which
    /// each generator is a single basis letter; returns, for each generator,
    /// the basis index and sign.
    pub fn basis_alignment(&self, gens: &[Word]) -> Result<Vec<(usize, bool)>> {
        if self.rank() != gens.len() {
            return Err(Error::InvalidSpec(format!(
                "subgroup generators are not a free basis (rank {} from {} generators)",
                self.rank(),
                gens.len()
            )));
        }
        let mut seen = vec![false; gens.len()];
        let mut out = Vec::with_capacity(gens.len());
        for g in gens {
            let e = self.express_in_basis(g)?;
            match e.letters() {
                [l] if !seen[l.gen as usize] => {
                    seen[l.gen as usize] = true;
                    out.push((l.gen as usize, l.inv));
                }
                _ => {
                    return Err(Error::InvalidSpec(
                        "subgroup generator is not a single basis letter".into(),
                    ))
                }
            }
        }
        Ok(out)
    }

    /// Canonical invariant for isomorphism of based labelled graphs.
    pub fn canonical_edges(&self) -> Vec<(usize, u32, usize)> {
        self.edges()
    }
}
