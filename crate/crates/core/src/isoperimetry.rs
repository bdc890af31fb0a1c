//! 1-chains on graph edges, chord-splitting of cycles into pieces of small
//! diameter, and the pinch decomposition of cycles in relative Cayley
//! graphs of HNN extensions.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::complexes::{EdgeLabel, LabeledGraph, Path, Payload, Step};
use crate::error::{Error, Result};
use crate::groups::{Direction, Group};
use crate::words::{Letter, Word};
use crate::Rational;

/// Integer combination of oriented edges; traversing an edge backwards
/// contributes −1. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Chain(BTreeMap<usize, i64>);

impl Chain {
    pub fn zero() -> Self {
        Chain::default()
    }

    pub fn add_step(&mut self, s: Step) {
        self.add_edge(s.edge, if s.forward { 1 } else { -1 });
    }

    pub fn add_edge(&mut self, e: usize, c: i64) {
        let v = self.0.entry(e).or_insert(0);
        *v += c;
        if *v == 0 {
            self.0.remove(&e);
        }
    }

    pub fn add(&mut self, other: &Chain) {
        for (&e, &c) in &other.0 {
            self.add_edge(e, c);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coefficients(&self) -> &BTreeMap<usize, i64> {
        &self.0
    }

    /// Boundary coefficients per vertex (nonzero entries only).
    pub fn boundary(&self, g: &LabeledGraph) -> BTreeMap<usize, i64> {
        let mut b = BTreeMap::new();
        for (&e, &c) in &self.0 {
            let ed = g.edge(e);
            *b.entry(ed.to).or_insert(0) += c;
            *b.entry(ed.from).or_insert(0) -= c;
        }
        b.retain(|_, v| *v != 0);
        b
    }
}

/// Signed traversal counts of a closed path.
pub fn chain_of_cycle(g: &LabeledGraph, c: &Path) -> Result<Chain> {
    c.validate(g)?;
    if !c.is_closed(g) {
        return Err(Error::Precondition("path is not closed".into()));
    }
    let mut ch = Chain::zero();
    for s in &c.steps {
        ch.add_step(*s);
    }
    Ok(ch)
}

#[derive(Clone, Debug, Serialize)]
pub struct Piece {
    pub start: usize,
    pub edges: Vec<(usize, bool)>,
    pub diameter: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionReport {
    pub k: usize,
    /// Stable-letter occurrences in the label (0 for plain filling).
    pub n: usize,
    /// Input cycle length in edges.
    pub l: usize,
    #[serde(rename = "M")]
    pub m: u32,
    pub pieces: Vec<Piece>,
    pub max_diameter: u32,
    pub chain_ok: bool,
    /// Every piece has diameter at most `M`.
    pub diameter_ok: bool,
    /// Pieces that could not be split further inside the ball.
    pub unsplittable: usize,
    /// Measured `max kᵢ / lᵢ` over base-case fillings (for `hnn_decompose`)
    /// or `k / l` (for `fill_cycle`).
    #[serde(serialize_with = "ser_rational")]
    pub l_measured: Rational,
    /// `k ≤ L·l + n` with the measured `L`.
    pub bound_ok: bool,
    /// `n₁ + n₂ + 2 = n` held at every pinch split.
    pub bookkeeping_ok: bool,
    pub splits: usize,
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

/// Removes backtracking `e e⁻¹`, including across the cyclic seam.
fn cyclically_reduce(g: &LabeledGraph, c: &Path) -> Path {
    let mut st: Vec<Step> = Vec::new();
    for &s in &c.steps {
        if st.last().is_some_and(|t| t.edge == s.edge && t.forward != s.forward) {
            st.pop();
        } else {
            st.push(s);
        }
    }
    let mut start = c.start;
    let mut lo = 0;
    let mut hi = st.len();
    while hi - lo >= 2 && st[lo].edge == st[hi - 1].edge && st[lo].forward != st[hi - 1].forward {
        start = g.step_target(start, st[lo]);
        lo += 1;
        hi -= 1;
    }
    Path { start, steps: st[lo..hi].to_vec() }
}

fn piece_of(g: &LabeledGraph, p: &Path) -> Piece {
    Piece {
        start: p.start,
        edges: p.steps.iter().map(|s| (s.edge, s.forward)).collect(),
        diameter: g.diameter_of(&p.vertices(g)),
    }
}

struct Filling {
    pieces: Vec<Path>,
    unsplittable: usize,
}

fn rotate(g: &LabeledGraph, c: &Path, i: usize) -> Path {
    let vs = c.vertices(g);
    let mut steps = c.steps[i..].to_vec();
    steps.extend_from_slice(&c.steps[..i]);
    Path { start: vs[i], steps }
}

fn fill_rec(g: &LabeledGraph, c: Path, m: u32, out: &mut Filling) -> Result<()> {
    let c = cyclically_reduce(g, &c);
    if c.is_empty() {
        return Ok(());
    }
    let vs = c.vertices(g);
    let ring = &vs[..vs.len() - 1];
    if g.diameter_of(ring) <= m {
        out.pieces.push(c);
        return Ok(());
    }
    let len = ring.len();
    let mut prefix = vec![0u64; len + 1];
    for (i, s) in c.steps.iter().enumerate() {
        prefix[i + 1] = prefix[i] + g.edge(s.edge).length as u64;
    }
    let total = prefix[len];
    // chord (i, j): geodesic shorter than both arcs; minimise the longer piece
    let mut best: Option<(u64, usize, usize, usize, usize)> = None;
    for i in 0..len {
        let di = g.distances_from(ring[i]);
        for j in i + 1..len {
            let d = di[ring[j]] as u64;
            let arc = prefix[j] - prefix[i];
            if d >= arc || d >= total - arc {
                continue;
            }
            let worst = (arc + d).max(total - arc + d);
            let (a, b) = (ring[i].min(ring[j]), ring[i].max(ring[j]));
            let cand = (worst, a, b, i, j);
            if best.is_none_or(|bst| cand < bst) {
                best = Some(cand);
            }
        }
    }
    let Some((_, _, _, i, j)) = best else {
        out.unsplittable += 1;
        out.pieces.push(c);
        return Ok(());
    };
    let chord = g.geodesic(ring[j], ring[i])?;
    let rc = rotate(g, &c, i);
    let k = j - i;
    let first = Path { start: rc.start, steps: rc.steps[..k].to_vec() }.then(&chord);
    let second = chord.reversed(g).then(&Path { start: ring[j], steps: rc.steps[k..].to_vec() });
    fill_rec(g, first, m, out)?;
    fill_rec(g, second, m, out)
}

fn finish_report(
    g: &LabeledGraph,
    c: &Path,
    m: u32,
    n: usize,
    pieces: &[Path],
    unsplittable: usize,
) -> Result<DecompositionReport> {
    let input = chain_of_cycle(g, c)?;
    let mut sum = Chain::zero();
    for p in pieces {
        sum.add(&chain_of_cycle(g, p)?);
    }
    let pieces: Vec<Piece> = pieces.iter().map(|p| piece_of(g, p)).collect();
    let max_diameter = pieces.iter().map(|p| p.diameter).max().unwrap_or(0);
    let l = c.len();
    Ok(DecompositionReport {
        k: pieces.len(),
        n,
        l,
        m,
        max_diameter,
        diameter_ok: max_diameter <= m,
        pieces,
        chain_ok: sum == input,
        unsplittable,
        l_measured: Rational::from_integer(0),
        bound_ok: true,
        bookkeeping_ok: true,
        splits: 0,
    })
}

/// Splits a cycle along geodesic chords until every piece has diameter at
/// most `M`. A cycle whose chain vanishes gives no pieces; a piece with no
/// shortening chord inside the ball is kept and counted as unsplittable.
pub fn fill_cycle(g: &LabeledGraph, c: &Path, m: u32) -> Result<DecompositionReport> {
    let ch = chain_of_cycle(g, c)?;
    let mut f = Filling { pieces: Vec::new(), unsplittable: 0 };
    if !ch.is_zero() {
        fill_rec(g, c.clone(), m, &mut f)?;
    }
    let mut r = finish_report(g, c, m, 0, &f.pieces, f.unsplittable)?;
    if r.l > 0 {
        r.l_measured = Rational::new(r.k as i64, r.l as i64);
    }
    Ok(r)
}

#[derive(Clone, Debug, Serialize)]
pub struct IpReport {
    pub samples: usize,
    pub passed: usize,
    #[serde(serialize_with = "ser_rational")]
    pub worst_ratio: Rational,
    pub worst_index: Option<usize>,
    pub unsplittable: usize,
}

/// Runs [`fill_cycle`] on each sample and checks `k ≤ L·l(c)`.
pub fn verify_ip(g: &LabeledGraph, m: u32, l_bound: Rational, cycles: &[Path]) -> Result<IpReport> {
    let mut rep = IpReport {
        samples: cycles.len(),
        passed: 0,
        worst_ratio: Rational::from_integer(0),
        worst_index: None,
        unsplittable: 0,
    };
    for (i, c) in cycles.iter().enumerate() {
        let d = fill_cycle(g, c, m)?;
        rep.unsplittable += d.unsplittable;
        let ratio = if d.l == 0 { Rational::from_integer(0) } else { Rational::new(d.k as i64, d.l as i64) };
        if ratio <= l_bound {
            rep.passed += 1;
        }
        if rep.worst_index.is_none() || ratio > rep.worst_ratio {
            rep.worst_ratio = ratio;
            rep.worst_index = Some(i);
        }
    }
    Ok(rep)
}

struct HnnCtx<'a> {
    g: &'a Group,
    graph: &'a LabeledGraph,
    ia: usize,
    ib: usize,
    m: u32,
}

struct HnnOut {
    pieces: Vec<Path>,
    unsplittable: usize,
    l_measured: Rational,
    splits: usize,
    bookkeeping_ok: bool,
}

fn stable_sign(graph: &LabeledGraph, s: Step, stable: u32) -> Option<bool> {
    match graph.step_label(s) {
        EdgeLabel::Gen(l) if l.gen == stable => Some(l.inv),
        _ => None,
    }
}

fn count_t(graph: &LabeledGraph, c: &Path, stable: u32) -> usize {
    c.steps.iter().filter(|s| stable_sign(graph, **s, stable).is_some()).count()
}

/// Parabolic edge joining `u` and `v` in parabolic `idx`, as a step from
/// `u`; `None` when `u == v`.
fn parabolic_step(graph: &LabeledGraph, idx: usize, u: usize, v: usize) -> Result<Option<Step>> {
    if u == v {
        return Ok(None);
    }
    graph
        .neighbors(u)
        .iter()
        .find(|&&(w, e)| w == v && matches!(graph.edge(e).label, EdgeLabel::Parabolic { index, .. } if index == idx))
        .map(|&(_, e)| Some(graph.step_from(u, e)))
        .ok_or_else(|| Error::Truncation("pinch shortcut edge lies outside the ball".into()))
}

fn hnn_rec(ctx: &HnnCtx, c: Path, out: &mut HnnOut) -> Result<()> {
    let h = ctx.g.hnn().expect("checked");
    let c = cyclically_reduce(ctx.graph, &c);
    if c.is_empty() {
        return Ok(());
    }
    let n = count_t(ctx.graph, &c, h.stable);
    if n == 0 {
        let before = out.pieces.len();
        let mut f = Filling { pieces: Vec::new(), unsplittable: 0 };
        if !chain_of_cycle(ctx.graph, &c)?.is_zero() {
            fill_rec(ctx.graph, c.clone(), ctx.m, &mut f)?;
        }
        let k = f.pieces.len();
        out.unsplittable += f.unsplittable;
        out.pieces.extend(f.pieces);
        debug_assert_eq!(out.pieces.len(), before + k);
        let ratio = Rational::new(k as i64, c.len() as i64);
        if ratio > out.l_measured {
            out.l_measured = ratio;
        }
        return Ok(());
    }
    // rotate so that the cycle starts right after a stable step; then a
    // pinch cannot straddle the seam
    let first_t = c.steps.iter().position(|s| stable_sign(ctx.graph, *s, h.stable).is_some()).unwrap();
    let c = rotate(ctx.graph, &c, (first_t + 1) % c.len());
    let vs = c.vertices(ctx.graph);
    let ts: Vec<usize> = (0..c.len()).filter(|&i| stable_sign(ctx.graph, c.steps[i], h.stable).is_some()).collect();
    let mut pinch = None;
    for w in ts.windows(2) {
        let (i, j) = (w[0], w[1]);
        let si = stable_sign(ctx.graph, c.steps[i], h.stable).unwrap();
        let sj = stable_sign(ctx.graph, c.steps[j], h.stable).unwrap();
        if si == sj {
            continue;
        }
        let inner = Path { start: vs[i + 1], steps: c.steps[i + 1..j].to_vec() };
        let v = ctx.graph.walk_word(&inner)?;
        let (sub, side) = if si { (&h.a, Direction::Forward) } else { (&h.b, Direction::Backward) };
        if sub.contains(&h.base, &v) {
            pinch = Some((i, j, side));
            break;
        }
    }
    let Some((i, j, side)) = pinch else {
        return Err(Error::Verification("cycle label has stable letters but no pinch".into()));
    };
    // S -y1-> P -v-> Q -y2-> E
    let (s, p, q, e) = (vs[i], vs[i + 1], vs[j], vs[j + 1]);
    let (idx_f, idx_e) = match side {
        Direction::Forward => (ctx.ia, ctx.ib),
        Direction::Backward => (ctx.ib, ctx.ia),
    };
    let e_step = parabolic_step(ctx.graph, idx_e, s, e)?;
    let f_step = parabolic_step(ctx.graph, idx_f, p, q)?;
    let single = |st: Option<Step>| st.into_iter().collect::<Vec<_>>();
    let rev = |st: Option<Step>| st.map(Step::reversed).into_iter().collect::<Vec<_>>();

    let mut q1q2 = c.steps[j + 1..].to_vec();
    q1q2.extend_from_slice(&c.steps[..i]);
    // c1 = q1 e q2, started at E so that q2 q1 is contiguous
    let mut c1 = q1q2.clone();
    c1.extend(single(e_step));
    let c1 = Path { start: e, steps: c1 };
    // c2 = e⁻¹ y1 f y2
    let mut c2 = rev(e_step);
    c2.push(c.steps[i]);
    c2.extend(single(f_step));
    c2.push(c.steps[j]);
    let c2 = Path { start: e, steps: c2 };
    // c3 = f⁻¹ v
    let mut c3 = rev(f_step);
    c3.extend_from_slice(&c.steps[i + 1..j]);
    let c3 = Path { start: q, steps: c3 };

    let n1 = count_t(ctx.graph, &c1, h.stable);
    let n2 = count_t(ctx.graph, &c3, h.stable);
    if n1 + n2 + 2 != n {
        out.bookkeeping_ok = false;
    }
    out.splits += 1;
    if !chain_of_cycle(ctx.graph, &c2)?.is_zero() {
        out.pieces.push(c2);
    }
    hnn_rec(ctx, c1, out)?;
    hnn_rec(ctx, c3, out)
}

/// Decomposes a cycle of a relative ball of an HNN extension by repeatedly cutting off pinches
/// `t⁻¹Vt` / `tUt⁻¹`. Each cut produces the quadrilateral through the two
/// shortcut edges; cycles without stable letters go to [`fill_cycle`].
///
/// The ball must have been built with [`Group::hnn_parabolics`], so that
/// parabolic 0 is `A` and parabolic 1 is `B`.
pub fn hnn_decompose(
    g: &Group,
    graph: &LabeledGraph,
    c: &Path,
    m: u32,
) -> Result<DecompositionReport> {
    let h = g.hnn().ok_or_else(|| Error::Unsupported("pinch decomposition needs an HNN extension".into()))?;
    if m < 4 * graph.scale() {
        return Err(Error::Precondition("M must be at least 4 (scaled)".into()));
    }
    let (ia, ib) = (0, 1);
    chain_of_cycle(graph, c)?;
    let label = graph.walk_word(c)?;
    if !g.is_identity(&label) {
        return Err(Error::Precondition("cycle label does not represent the identity".into()));
    }
    let ctx = HnnCtx { g, graph, ia, ib, m };
    let mut out = HnnOut {
        pieces: Vec::new(),
        unsplittable: 0,
        l_measured: Rational::from_integer(0),
        splits: 0,
        bookkeeping_ok: true,
    };
    hnn_rec(&ctx, c.clone(), &mut out)?;
    let n = count_t(graph, c, h.stable);
    let mut r = finish_report(graph, c, m, n, &out.pieces, out.unsplittable)?;
    r.l_measured = out.l_measured;
    r.bound_ok = Rational::from_integer(r.k as i64) <= out.l_measured * Rational::from_integer(r.l as i64) + Rational::from_integer(n as i64);
    r.bookkeeping_ok = out.bookkeeping_ok;
    r.splits = out.splits;
    Ok(r)
}

/// The closed path in `graph` that reads `w` from the vertex `start`,
/// following generator edges only.
pub fn path_of_word(graph: &LabeledGraph, start: usize, w: &[Letter]) -> Result<Path> {
    let mut p = Path::trivial(start);
    let mut cur = start;
    for &l in w {
        let step = graph
            .neighbors(cur)
            .iter()
            .map(|&(_, e)| graph.step_from(cur, e))
            .find(|s| graph.step_label(*s) == EdgeLabel::Gen(l))
            .ok_or_else(|| Error::Truncation(format!("word leaves the ball at step {}", p.len())))?;
        cur = graph.step_target(cur, step);
        p.steps.push(step);
    }
    Ok(p)
}

/// Vertex of the identity element.
pub fn identity_vertex(graph: &LabeledGraph) -> Result<usize> {
    graph
        .find_element(&Word::empty())
        .ok_or_else(|| Error::Graph("graph has no identity vertex".into()))
}

/// Whether a vertex holds a group element.
pub fn is_group_vertex(graph: &LabeledGraph, v: usize) -> bool {
    matches!(graph.payload(v), Payload::Element(_))
}
