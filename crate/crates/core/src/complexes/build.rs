use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use super::{EdgeLabel, GraphKind, LabeledGraph, Meta, Payload};
use crate::error::{Error, Result};
use crate::groups::{Element, Group, Parabolic};
use crate::words::{Letter, Word};

/// Ball radius `r`, parabolic truncation `R_H` and vertex budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BallParams {
    pub r: usize,
    pub r_h: usize,
    pub budget: usize,
}

impl BallParams {
    pub fn new(r: usize, r_h: usize) -> Self {
        BallParams { r, r_h, budget: crate::budget_from_env() }
    }

    pub fn with_budget(self, budget: usize) -> Self {
        BallParams { budget, ..self }
    }
}

/// Exact-check rebuilds are skipped above this many vertices.
const EXACT_CHECK_LIMIT: usize = 1500;

fn letters_pm(x: &[u32]) -> Vec<Letter> {
    x.iter().flat_map(|&g| [Letter::pos(g), Letter::neg(g)]).collect()
}

fn check_generators(g: &Group, x: &[u32]) -> Result<()> {
    match x.iter().find(|&&i| i as usize >= g.rank()) {
        Some(i) => Err(Error::Alphabet(format!("generator index {i} outside alphabet"))),
        None => Ok(()),
    }
}

/// Elements of each parabolic of canonical length at most `r_h`, identity
/// first.
fn parabolic_sets(g: &Group, pars: &[Parabolic], r_h: usize, budget: usize) -> Result<Vec<Vec<Word>>> {
    pars.iter()
        .map(|p| {
            let mut v = vec![Word::empty()];
            v.extend(g.parabolic_elements(p, r_h, budget)?);
            Ok(v)
        })
        .collect()
}

/// Ball of radius `r` about the identity in the Cayley graph with respect
/// to `X ∪ H₁ ∪ … ∪ Hₘ`.
///
/// Vertices are discovered by BFS along generators in `X±` and parabolic
/// elements of canonical length at most `R_H`. The finished ball then
/// carries a parabolic edge between every two of its vertices lying in a
/// common left coset of some `Hᵢ`, so distances are upper bounds on the
/// true relative distance that only depend on truncation through which
/// vertices were reached.
pub fn relative_ball(g: &Group, x: &[u32], pars: &[Parabolic], p: BallParams) -> Result<LabeledGraph> {
    check_generators(g, x)?;
    let sets = parabolic_sets(g, pars, p.r_h, p.budget)?;
    let gens = letters_pm(x);
    let mut graph = LabeledGraph::new(Meta { kind: GraphKind::Relative, r: p.r, r_h: p.r_h, scale: 1, exact: None });
    let id = g.identity();
    graph.add_vertex(Payload::Element(id.clone()), Word::empty());
    let mut elems: Vec<Element> = vec![id];
    let mut frontier = vec![0usize];
    for _ in 0..p.r {
        let mut next = Vec::new();
        for &u in &frontier {
            let moves = gens
                .iter()
                .map(|l| Word::letter(*l))
                .chain(sets.iter().flat_map(|s| s[1..].iter().cloned()));
            for m in moves {
                let e = g.multiply(&elems[u], &m);
                if graph.find(&Payload::Element(e.clone())).is_none() {
                    if graph.vertex_count() >= p.budget {
                        return Err(Error::Budget(p.budget));
                    }
                    let v = graph.add_vertex(Payload::Element(e.clone()), e.word.clone());
                    elems.push(e);
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    for u in 0..elems.len() {
        for &g_idx in x {
            let e = g.multiply(&elems[u], &Word::gen(g_idx));
            if let Some(v) = graph.find(&Payload::Element(e)) {
                graph.add_edge(u, v, EdgeLabel::Gen(Letter::pos(g_idx)), 1)?;
            }
        }
    }
    for (i, par) in pars.iter().enumerate() {
        let mut buckets: BTreeMap<Word, Vec<usize>> = BTreeMap::new();
        for (u, e) in elems.iter().enumerate() {
            buckets.entry(g.left_coset_rep(par, &e.word)?).or_default().push(u);
        }
        for members in buckets.values() {
            for (a, &u) in members.iter().enumerate() {
                for &v in &members[a + 1..] {
                    let h = g.canonical_form(&elems[u].word.inverse().product(&elems[v].word));
                    let element = if g.amalgam().is_some() { h.word } else { h.key };
                    graph.add_edge(u, v, EdgeLabel::Parabolic { index: i, element }, 1)?;
                }
            }
        }
    }
    Ok(graph)
}

/// [`relative_ball`] with the exactness flag set by comparing against a
/// rebuild with `R_H + 2` on the common vertices. The check is skipped
/// (flag `None`) when either ball is too large for it.
pub fn relative_ball_checked(g: &Group, x: &[u32], pars: &[Parabolic], p: BallParams) -> Result<LabeledGraph> {
    let mut ball = relative_ball(g, x, pars, p)?;
    if ball.vertex_count() > EXACT_CHECK_LIMIT {
        return Ok(ball);
    }
    let wider = match relative_ball(g, x, pars, BallParams { r_h: p.r_h + 2, ..p }) {
        Ok(w) if w.vertex_count() <= EXACT_CHECK_LIMIT => w,
        Ok(_) | Err(Error::Budget(_)) => return Ok(ball),
        Err(e) => return Err(e),
    };
    let map: Vec<Option<usize>> = ball.payloads().iter().map(|pl| wider.find(pl)).collect();
    let mut exact = true;
    'outer: for u in 0..ball.vertex_count() {
        let Some(wu) = map[u] else { continue };
        let du = ball.distances_from(u);
        let dw = wider.distances_from(wu);
        for v in 0..ball.vertex_count() {
            if let Some(wv) = map[v] {
                if du[v] != dw[wv] {
                    exact = false;
                    break 'outer;
                }
            }
        }
    }
    ball.meta_mut().exact = Some(exact);
    Ok(ball)
}

fn coset_payload(g: &Group, pars: &[Parabolic], i: usize, w: &Word) -> Result<Payload> {
    Ok(Payload::Coset { index: i, rep: g.left_coset_rep(&pars[i], w)? })
}

/// Ball of radius `r` about `H₁` in the left coset graph on `{gHᵢ}`.
///
/// From a coset `fHᵢ` with representative word `f` the candidates are the
/// pairs `a = f·h`, `b = a·x` with `h ∈ Hᵢ` of canonical length at most
/// `R_H` and `x ∈ X± ∪ {1}`; each gives an edge `fHᵢ → bHⱼ` labelled
/// `(i, j, x)`, self-loops excluded.
pub fn coset_ball(g: &Group, x: &[u32], pars: &[Parabolic], p: BallParams) -> Result<LabeledGraph> {
    check_generators(g, x)?;
    if pars.is_empty() {
        return Err(Error::Precondition("the coset graph needs at least one parabolic subgroup".into()));
    }
    let sets = parabolic_sets(g, pars, p.r_h, p.budget)?;
    let mut xs: Vec<Option<Letter>> = vec![None];
    xs.extend(letters_pm(x).into_iter().map(Some));
    let mut graph = LabeledGraph::new(Meta { kind: GraphKind::Coset, r: p.r, r_h: p.r_h, scale: 1, exact: None });
    graph.add_vertex(coset_payload(g, pars, 0, &Word::empty())?, Word::empty());

    let expand = |graph: &LabeledGraph, u: usize| -> Result<Vec<(Payload, Word, EdgeLabel, (Word, Word))>> {
        let Payload::Coset { index: i, .. } = graph.payload(u) else { unreachable!() };
        let i = *i;
        let f = graph.word(u).clone();
        let mut out = Vec::new();
        for h in &sets[i] {
            let a = f.product(h);
            for xl in &xs {
                let b = match xl {
                    Some(l) => a.product(&Word::letter(*l)),
                    None => a.clone(),
                };
                for j in 0..pars.len() {
                    let target = coset_payload(g, pars, j, &b)?;
                    if &target == graph.payload(u) {
                        continue;
                    }
                    out.push((target, b.clone(), EdgeLabel::Triple { i, j, x: *xl }, (a.clone(), b.clone())));
                }
            }
        }
        Ok(out)
    };

    let mut frontier = vec![0usize];
    for _ in 0..p.r {
        let mut next = Vec::new();
        for &u in &frontier {
            for (target, word, _, _) in expand(&graph, u)? {
                if graph.find(&target).is_none() {
                    if graph.vertex_count() >= p.budget {
                        return Err(Error::Budget(p.budget));
                    }
                    next.push(graph.add_vertex(target, word));
                }
            }
        }
        frontier = next;
    }
    for u in 0..graph.vertex_count() {
        for (target, _, label, wit) in expand(&graph, u)? {
            if let Some(v) = graph.find(&target) {
                graph.add_edge_with_witness(u, v, label, 1, Some(wit))?;
            }
        }
    }
    Ok(graph)
}

/// Ball of radius `r` (true units) about the identity in the coned-off
/// Cayley graph, at scale 2: generator edges have length 2 and cone edges
/// length 1.
///
/// Group vertices within scaled distance `2r` are kept, with a cone point
/// for every coset of every parabolic they meet. A cone is entered from
/// any of its group vertices and left along parabolic elements of length
/// at most `R_H` from that vertex. Requires every generator of the group
/// to lie in `X`.
pub fn coned_off_ball(g: &Group, x: &[u32], pars: &[Parabolic], p: BallParams) -> Result<LabeledGraph> {
    check_generators(g, x)?;
    let all: Vec<u32> = (0..g.rank() as u32).collect();
    if !all.iter().all(|i| x.contains(i)) {
        return Err(Error::Precondition("the coned-off graph needs X to generate the group".into()));
    }
    let sets = parabolic_sets(g, pars, p.r_h, p.budget)?;
    let gens = letters_pm(x);
    let limit = 2 * p.r as u32;

    // Dijkstra over the implicit graph; node ids index `nodes`.
    let mut nodes: Vec<(Payload, Word)> = Vec::new();
    let mut ids: HashMap<Payload, usize> = HashMap::new();
    let mut dist: Vec<u32> = Vec::new();
    let mut heap = BinaryHeap::new();
    let id = g.identity();
    nodes.push((Payload::Element(id), Word::empty()));
    ids.insert(nodes[0].0.clone(), 0);
    dist.push(0);
    heap.push(Reverse((0u32, 0usize)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if d > dist[u] || d >= limit {
            continue;
        }
        let (payload, word) = nodes[u].clone();
        let mut nbrs: Vec<(Payload, Word, u32)> = Vec::new();
        match &payload {
            Payload::Element(e) => {
                for l in &gens {
                    let n = g.multiply(e, &Word::letter(*l));
                    let w = n.word.clone();
                    nbrs.push((Payload::Element(n), w, 2));
                }
                for i in 0..pars.len() {
                    nbrs.push((coset_cone(g, pars, i, &word)?, word.clone(), 1));
                    // through the cone, as in the relative ball's discovery
                    for h in &sets[i][1..] {
                        let n = g.canonical_form(&word.product(h));
                        let w = n.word.clone();
                        nbrs.push((Payload::Element(n), w, 2));
                    }
                }
            }
            Payload::Cone { index, .. } => {
                for h in &sets[*index] {
                    let n = g.canonical_form(&word.product(h));
                    let w = n.word.clone();
                    nbrs.push((Payload::Element(n), w, 1));
                }
            }
            _ => unreachable!(),
        }
        for (pl, w, len) in nbrs {
            let nd = d + len;
            if nd > limit + 1 {
                continue;
            }
            let v = match ids.get(&pl) {
                Some(&v) => v,
                None => {
                    if nodes.len() >= p.budget {
                        return Err(Error::Budget(p.budget));
                    }
                    ids.insert(pl.clone(), nodes.len());
                    nodes.push((pl, w));
                    dist.push(u32::MAX);
                    nodes.len() - 1
                }
            };
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Reverse((nd, v)));
            }
        }
    }

    let mut graph = LabeledGraph::new(Meta { kind: GraphKind::ConedOff, r: p.r, r_h: p.r_h, scale: 2, exact: None });
    let mut order: Vec<usize> = (0..nodes.len()).filter(|&v| dist[v] <= limit).collect();
    order.sort_by_key(|&v| (dist[v], v));
    let mut group_vs = Vec::new();
    for &v in &order {
        let (pl, w) = &nodes[v];
        let gid = graph.add_vertex(pl.clone(), w.clone());
        if matches!(pl, Payload::Element(_)) {
            group_vs.push(gid);
        }
    }
    for &u in &group_vs {
        let Payload::Element(e) = graph.payload(u).clone() else { unreachable!() };
        for &gi in x {
            let n = g.multiply(&e, &Word::gen(gi));
            if let Some(v) = graph.find(&Payload::Element(n)) {
                graph.add_edge(u, v, EdgeLabel::Gen(Letter::pos(gi)), 2)?;
            }
        }
        for i in 0..pars.len() {
            let cone = coset_cone(g, pars, i, &e.word)?;
            let c = match graph.find(&cone) {
                Some(c) => c,
                None => graph.add_vertex(cone, e.word.clone()),
            };
            graph.add_edge(u, c, EdgeLabel::Cone(i), 1)?;
        }
    }
    Ok(graph)
}

fn coset_cone(g: &Group, pars: &[Parabolic], i: usize, w: &Word) -> Result<Payload> {
    Ok(Payload::Cone { index: i, rep: g.left_coset_rep(&pars[i], w)? })
}

/// Ball of radius `r` about the base vertex of the Bass–Serre tree.
///
/// For an HNN extension the vertices are the left cosets of the base
/// group and `fH` is joined to `f·h·t^±1·H`; for an amalgam `H ∗_A K`
/// the vertices are the cosets of `H` (index 0) and `K` (index 1), with
/// `fH` joined to `f·h·K`. The elements `h` range over the vertex group
/// ball of radius `R_H`, which truncates the (generally infinite) valence.
pub fn bass_serre_ball(g: &Group, p: BallParams) -> Result<LabeledGraph> {
    let (pars, moves): (Vec<Parabolic>, Vec<Vec<Word>>) = if let Some(h) = g.hnn() {
        let base = Parabolic::InBase(crate::groups::Subgroup::Whole);
        let mut elems = vec![Word::empty()];
        elems.extend(g.parabolic_elements(&base, p.r_h, p.budget)?);
        let t = Word::gen(h.stable);
        let moves: Vec<Word> = elems
            .iter()
            .flat_map(|e| [e.product(&t), e.product(&t.inverse())])
            .collect();
        (vec![base], vec![moves])
    } else if g.amalgam().is_some() {
        use crate::groups::Factor;
        let ph = Parabolic::Factor(Factor::H);
        let pk = Parabolic::Factor(Factor::K);
        let mut mh = vec![Word::empty()];
        mh.extend(g.parabolic_elements(&ph, p.r_h, p.budget)?);
        let mut mk = vec![Word::empty()];
        mk.extend(g.parabolic_elements(&pk, p.r_h, p.budget)?);
        (vec![ph, pk], vec![mh, mk])
    } else {
        return Err(Error::Unsupported("Bass–Serre trees need an HNN extension or an amalgam".into()));
    };
    let amalgam = pars.len() == 2;
    let mut graph = LabeledGraph::new(Meta { kind: GraphKind::BassSerre, r: p.r, r_h: p.r_h, scale: 1, exact: None });
    graph.add_vertex(coset_payload(g, &pars, 0, &Word::empty())?, Word::empty());
    let expand = |graph: &LabeledGraph, u: usize| -> Result<Vec<(Payload, Word)>> {
        let Payload::Coset { index, .. } = graph.payload(u) else { unreachable!() };
        let target = if amalgam { 1 - index } else { 0 };
        let f = graph.word(u);
        moves[*index]
            .iter()
            .map(|m| {
                let w = f.product(m);
                Ok((coset_payload(g, &pars, target, &w)?, w))
            })
            .collect()
    };
    let mut frontier = vec![0usize];
    for _ in 0..p.r {
        let mut next = Vec::new();
        for &u in &frontier {
            for (pl, w) in expand(&graph, u)? {
                if graph.find(&pl).is_none() {
                    if graph.vertex_count() >= p.budget {
                        return Err(Error::Budget(p.budget));
                    }
                    next.push(graph.add_vertex(pl, w));
                }
            }
        }
        frontier = next;
    }
    for u in 0..graph.vertex_count() {
        for (pl, _) in expand(&graph, u)? {
            if let Some(v) = graph.find(&pl) {
                if v != u {
                    graph.add_edge(u, v, EdgeLabel::Tree, 1)?;
                }
            }
        }
    }
    if !graph.is_acyclic() {
        return Err(Error::Verification("Bass–Serre ball is not a tree".into()));
    }
    Ok(graph)
}

/// For two coset-graph edges with equal labels, returns `w = a₂a₁⁻¹`
/// built from their witness pairs, after checking that `w` carries the
/// endpoints of `e` onto those of `f`.
pub fn edge_orbit_witness(
    g: &Group,
    pars: &[Parabolic],
    graph: &LabeledGraph,
    e: usize,
    f: usize,
) -> Result<Element> {
    let (ee, fe) = (graph.edge(e), graph.edge(f));
    let (we, wf) = match (graph.witness(e), graph.witness(f)) {
        (Some(a), Some(b)) => (a.clone(), b.clone()),
        _ => return Err(Error::Graph("edges carry no witness pairs".into())),
    };
    let (f_from, f_to, wf) = if ee.label == fe.label {
        (fe.from, fe.to, wf)
    } else if ee.label == fe.label.reversed() {
        (fe.to, fe.from, (wf.1, wf.0))
    } else {
        return Err(Error::Precondition("edge labels differ".into()));
    };
    let EdgeLabel::Triple { i, j, .. } = ee.label else {
        return Err(Error::Precondition("not a coset-graph edge".into()));
    };
    let w = wf.0.product(&we.0.inverse());
    let moved_from = coset_payload(g, pars, i, &w.product(&we.0))?;
    let moved_to = coset_payload(g, pars, j, &w.product(&we.1))?;
    if &moved_from != graph.payload(f_from) || &moved_to != graph.payload(f_to) {
        return Err(Error::Verification("witness does not map edge onto edge".into()));
    }
    Ok(g.canonical_form(&w))
}
