//! Quasi-isometry checks between finite balls: the affine distortion and
//! density conditions for an explicit vertex map, the comparison maps
//! between relative, coset and coned-off balls, and Lipschitz bounds from
//! per-class edge displacements.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::Serialize;

use crate::complexes::{
    coned_off_ball, coset_ball, relative_ball_checked, BallParams, EdgeLabel, LabeledGraph, Payload, UNREACHABLE,
};
use crate::error::{Error, Result};
use crate::groups::{Group, Parabolic};
use crate::Rational;

fn ser_rat<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    if *r.denom() == 1 {
        s.serialize_str(&r.numer().to_string())
    } else {
        s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
    }
}

/// A pair realising the smallest slack of an inequality. Negative slack
/// means the inequality fails there.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub x: usize,
    pub y: usize,
    #[serde(serialize_with = "ser_rat")]
    pub d1: Rational,
    #[serde(serialize_with = "ser_rat")]
    pub d2: Rational,
    #[serde(serialize_with = "ser_rat")]
    pub slack: Rational,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_label: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Condition {
    pub ok: bool,
    /// Extremal pair; `None` when there was nothing to check.
    pub worst: Option<Witness>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Density {
    pub ok: bool,
    /// Vertex of the target farthest from the image, and its distance.
    pub worst_vertex: Option<usize>,
    #[serde(serialize_with = "ser_rat")]
    pub worst_distance: Rational,
    pub checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_label: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct QIVerdict {
    #[serde(serialize_with = "ser_rat")]
    pub lambda: Rational,
    #[serde(serialize_with = "ser_rat")]
    pub c: Rational,
    #[serde(serialize_with = "ser_rat")]
    pub epsilon: Rational,
    /// `d₂ ≥ d₁/λ − c`.
    pub lower: Condition,
    /// `d₂ ≤ λ·d₁ + c`.
    pub upper: Condition,
    pub density: Density,
    pub pairs: usize,
}

impl QIVerdict {
    pub fn passed(&self) -> bool {
        self.lower.ok && self.upper.ok && self.density.ok
    }

    /// Fills in witness labels with the given vertex renderers.
    pub fn label_with(&mut self, f1: impl Fn(usize) -> String, f2: impl Fn(usize) -> String) {
        for w in [&mut self.lower.worst, &mut self.upper.worst].into_iter().flatten() {
            label_witness(w, &f1);
        }
        self.density.worst_label = self.density.worst_vertex.map(&f2);
    }
}

fn label_witness(w: &mut Witness, f: impl Fn(usize) -> String) {
    w.x_label = Some(f(w.x));
    w.y_label = Some(f(w.y));
}

/// Distance in true units (raw length divided by the scale).
fn true_dist(g: &LabeledGraph, raw: u32) -> Rational {
    Rational::new(raw as i64, g.scale() as i64)
}

fn check_map(map: &[usize], g1: &LabeledGraph, g2: &LabeledGraph) -> Result<()> {
    if map.len() != g1.vertex_count() {
        return Err(Error::Precondition(format!(
            "map covers {} of {} vertices",
            map.len(),
            g1.vertex_count()
        )));
    }
    if let Some((x, &y)) = map.iter().enumerate().find(|(_, &y)| y >= g2.vertex_count()) {
        return Err(Error::Precondition(format!("vertex {x} maps to {y}, outside the target")));
    }
    if !g1.is_connected() || !g2.is_connected() {
        return Err(Error::Graph("distance checks need connected graphs".into()));
    }
    Ok(())
}

/// Smallest value of `slack(d₁, d₂)` over unordered pairs `x < y` of
/// `G₁`, with the lexicographically first pair among ties.
fn scan_pairs(
    map: &[usize],
    g1: &LabeledGraph,
    g2: &LabeledGraph,
    slack: impl Fn(Rational, Rational) -> Rational + Sync,
) -> Condition {
    let n = g1.vertex_count();
    let best = (0..n)
        .into_par_iter()
        .filter_map(|x| {
            let d1s = g1.distances_from(x);
            let d2s = g2.distances_from(map[x]);
            let mut best: Option<(Rational, usize, usize)> = None;
            for y in x + 1..n {
                let d1 = true_dist(g1, d1s[y]);
                let d2 = true_dist(g2, d2s[map[y]]);
                let s = slack(d1, d2);
                if best.is_none_or(|b| s < b.0) {
                    best = Some((s, x, y));
                }
            }
            best
        })
        .min();
    Condition {
        ok: best.is_none_or(|b| b.0 >= Rational::from_integer(0)),
        worst: best.map(|(s, x, y)| Witness {
            x,
            y,
            d1: true_dist(g1, g1.distances_from(x)[y]),
            d2: true_dist(g2, g2.distances_from(map[x])[map[y]]),
            slack: s,
            x_label: None,
            y_label: None,
        }),
    }
}

/// Multi-source weighted distances from `sources`.
fn distances_to_set(g: &LabeledGraph, sources: &[usize]) -> Vec<u32> {
    let mut dist = vec![UNREACHABLE; g.vertex_count()];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        if dist[s] != 0 {
            dist[s] = 0;
            heap.push(Reverse((0u32, s)));
        }
    }
    while let Some(Reverse((d, u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, e) in g.neighbors(u) {
            let nd = d + g.edge(e).length;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Reverse((nd, v)));
            }
        }
    }
    dist
}

fn density(map: &[usize], g2: &LabeledGraph, region: &[usize], epsilon: Rational) -> Density {
    let dist = distances_to_set(g2, map);
    let mut worst: Option<(Rational, usize)> = None;
    for &z in region {
        let d = true_dist(g2, dist[z]);
        if worst.is_none_or(|w| d > w.0) {
            worst = Some((d, z));
        }
    }
    let worst_distance = worst.map_or(Rational::from_integer(0), |w| w.0);
    Density {
        ok: worst_distance <= epsilon,
        worst_vertex: worst.map(|w| w.1),
        worst_distance,
        checked: region.len(),
        worst_label: None,
    }
}

/// Checks `(1/λ)d₁(x,y) − c ≤ d₂(αx,αy) ≤ λd₁(x,y) + c` over all pairs and
/// that every vertex of `G₂` lies within `ε` of the image. Distances are
/// in true units, so a scale-2 graph contributes halves.
pub fn check_qi_map(
    map: &[usize],
    g1: &LabeledGraph,
    g2: &LabeledGraph,
    lambda: Rational,
    c: Rational,
    epsilon: Rational,
) -> Result<QIVerdict> {
    let all: Vec<usize> = (0..g2.vertex_count()).collect();
    check_qi_map_on(map, g1, g2, lambda, c, epsilon, &all)
}

/// [`check_qi_map`] with density checked on `region` only.
pub fn check_qi_map_on(
    map: &[usize],
    g1: &LabeledGraph,
    g2: &LabeledGraph,
    lambda: Rational,
    c: Rational,
    epsilon: Rational,
    region: &[usize],
) -> Result<QIVerdict> {
    check_map(map, g1, g2)?;
    if lambda <= Rational::from_integer(0) || c < Rational::from_integer(0) || epsilon < Rational::from_integer(0) {
        return Err(Error::Precondition("need λ > 0, c ≥ 0, ε ≥ 0".into()));
    }
    let lower = scan_pairs(map, g1, g2, |d1, d2| d2 - (d1 / lambda - c));
    let upper = scan_pairs(map, g1, g2, |d1, d2| lambda * d1 + c - d2);
    let n = g1.vertex_count();
    Ok(QIVerdict {
        lambda,
        c,
        epsilon,
        lower,
        upper,
        density: density(map, g2, region, epsilon),
        pairs: n * n.saturating_sub(1) / 2,
    })
}

/// Result of comparing the relative ball with the coset ball (and, when
/// `X` generates the group, with the coned-off ball).
#[derive(Clone, Debug, Serialize)]
pub struct EqDefReport {
    /// `α(g) = gH₁` checked with `λ = 2`, `c = 1/2`, `ε = 1`.
    pub alpha: QIVerdict,
    /// `d̃(αu, αv) ≤ 2·d_rel(u, v)`.
    pub eq1: Condition,
    /// `d_rel(u, v)/2 − 1/2 ≤ d̃(αu, αv)`.
    pub eq2: Condition,
    /// The identity on group elements into the coned-off ball, checked
    /// with `λ = 1`, `c = 0`, `ε = 1`.
    pub iota: Option<QIVerdict>,
    pub relative_vertices: usize,
    pub coset_vertices: usize,
    pub coned_vertices: Option<usize>,
    /// Both balls passed their truncation checks.
    pub exact: bool,
    pub provisional: bool,
    pub notes: Vec<String>,
}

impl EqDefReport {
    pub fn passed(&self) -> bool {
        self.eq1.ok && self.eq2.ok && self.alpha.passed() && self.iota.as_ref().is_none_or(|v| v.passed())
    }
}

/// Compares two balls on their common payloads.
fn same_distances(a: &LabeledGraph, b: &LabeledGraph) -> bool {
    let map: Vec<Option<usize>> = a.payloads().iter().map(|p| b.find(p)).collect();
    (0..a.vertex_count()).all(|u| {
        let Some(bu) = map[u] else { return true };
        let da = a.distances_from(u);
        let db = b.distances_from(bu);
        (0..a.vertex_count()).all(|v| map[v].is_none_or(|bv| da[v] == db[bv]))
    })
}

/// Above this many vertices the coset ball is not rebuilt for the
/// truncation check.
const COSET_CHECK_LIMIT: usize = 1500;

/// Builds the relative ball of radius `r` and the coset ball of radius
/// `2r` (which contains every image), maps `g ↦ gH₁`, and checks both
/// comparison inequalities pairwise. Density is checked on the cosets
/// `uHᵢ` met by ball elements `u` together with every coset within
/// `⌊(r−1)/2⌋` of `H₁`; by the second inequality those contain an element
/// of the ball.
pub fn eqdef_check(g: &Group, x: &[u32], pars: &[Parabolic], r: usize, r_h: usize) -> Result<EqDefReport> {
    if pars.is_empty() {
        return Err(Error::Precondition("need at least one parabolic subgroup".into()));
    }
    let params = BallParams::new(r, r_h);
    let rel = relative_ball_checked(g, x, pars, params)?;
    let cos = coset_ball(g, x, pars, BallParams { r: 2 * r, ..params })?;
    let mut notes = vec![
        "constants λ = 2, c = 1/2 follow from the two comparison inequalities; λ = c = 1/2 would not satisfy them".to_string(),
    ];
    let cos_exact = if cos.vertex_count() <= COSET_CHECK_LIMIT {
        match coset_ball(g, x, pars, BallParams { r: 2 * r, r_h: r_h + 2, ..params }) {
            Ok(w) if w.vertex_count() <= COSET_CHECK_LIMIT => Some(same_distances(&cos, &w)),
            Ok(_) | Err(Error::Budget(_)) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let exact = rel.meta().exact == Some(true) && cos_exact == Some(true);
    if !exact {
        notes.push(format!(
            "truncation check: relative {:?}, coset {:?}; verdict is provisional",
            rel.meta().exact,
            cos_exact
        ));
    }

    let coset_of = |i: usize, w: &crate::words::Word| -> Result<Option<usize>> {
        Ok(cos.find(&Payload::Coset { index: i, rep: g.left_coset_rep(&pars[i], w)? }))
    };
    let mut map = Vec::with_capacity(rel.vertex_count());
    let mut region = Vec::new();
    for v in 0..rel.vertex_count() {
        let w = rel.word(v);
        let img = coset_of(0, w)?
            .ok_or_else(|| Error::Truncation(format!("coset of vertex {v} lies outside the coset ball")))?;
        map.push(img);
        for i in 0..pars.len() {
            if let Some(z) = coset_of(i, w)? {
                region.push(z);
            }
        }
    }
    let d0 = cos.distances_from(0);
    let near = ((r.max(1) - 1) / 2) as u32;
    region.extend((0..cos.vertex_count()).filter(|&z| d0[z] <= near));
    region.sort_unstable();
    region.dedup();

    let half = Rational::new(1, 2);
    let two = Rational::from_integer(2);
    let alpha = check_qi_map_on(&map, &rel, &cos, two, half, Rational::from_integer(1), &region)?;
    let eq1 = scan_pairs(&map, &rel, &cos, |d1, d2| two * d1 - d2);
    let eq2 = scan_pairs(&map, &rel, &cos, |d1, d2| d2 - (d1 * half - half));

    let generates = (0..g.rank() as u32).all(|i| x.contains(&i));
    let (iota, coned_vertices) = if generates {
        let coned = coned_off_ball(g, x, pars, params)?;
        let mut imap = Vec::with_capacity(rel.vertex_count());
        for v in 0..rel.vertex_count() {
            let Payload::Element(e) = rel.payload(v) else { unreachable!() };
            imap.push(
                coned
                    .find_element(&e.key)
                    .ok_or_else(|| Error::Truncation(format!("vertex {v} lies outside the coned-off ball")))?,
            );
        }
        let n = coned.vertex_count();
        let v = check_qi_map(&imap, &rel, &coned, Rational::from_integer(1), Rational::from_integer(0), Rational::from_integer(1))?;
        (Some(v), Some(n))
    } else {
        notes.push("X does not generate the group, so the coned-off comparison does not apply".into());
        (None, None)
    };

    let mut alpha = alpha;
    let render_rel = |v: usize| rel.render_payload(v, g.alphabet(), g.key_alphabet());
    let render_cos = |v: usize| cos.render_payload(v, g.alphabet(), g.key_alphabet());
    alpha.label_with(render_rel, render_cos);
    let mut eq1 = eq1;
    let mut eq2 = eq2;
    for c in [&mut eq1, &mut eq2] {
        if let Some(w) = c.worst.as_mut() {
            label_witness(w, render_rel);
        }
    }
    Ok(EqDefReport {
        alpha,
        eq1,
        eq2,
        iota,
        relative_vertices: rel.vertex_count(),
        coset_vertices: cos.vertex_count(),
        coned_vertices,
        exact,
        provisional: !exact,
        notes,
    })
}

/// Edges of `g` grouped by label (orientation-insensitive), in order of
/// first appearance.
pub fn edge_classes_by_label(g: &LabeledGraph) -> Vec<Vec<usize>> {
    let mut keys: Vec<EdgeLabel> = Vec::new();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (i, e) in g.edges().iter().enumerate() {
        let rev = e.label.reversed();
        match keys.iter().position(|k| *k == e.label || *k == rev) {
            Some(c) => classes[c].push(i),
            None => {
                keys.push(e.label.clone());
                classes.push(vec![i]);
            }
        }
    }
    classes
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassDisplacement {
    pub representative: usize,
    pub size: usize,
    #[serde(serialize_with = "ser_rat")]
    pub displacement: Rational,
    /// Every edge of the class moves by the same amount.
    pub constant: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LipschitzReport {
    /// Largest ratio `d₂(βe₋, βe₊) / length(e)` over class representatives.
    #[serde(serialize_with = "ser_rat")]
    pub m: Rational,
    pub classes: Vec<ClassDisplacement>,
    /// `d₂(βu, βv) ≤ M·d₁(u, v)` on all pairs.
    pub lipschitz: Condition,
}

impl LipschitzReport {
    pub fn class_constant(&self) -> bool {
        self.classes.iter().all(|c| c.constant)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitBound {
    pub forward: LipschitzReport,
    /// Lipschitz data for the inverse association, when given.
    pub backward: Option<LipschitzReport>,
    /// `d₁(u, v) ≤ M'·d₂(βu, βv) + 2D` on all pairs of `G₁`, where `M'` is
    /// the backward constant and `D` the largest displacement of `γ∘β`.
    pub converse: Option<Condition>,
    #[serde(serialize_with = "ser_rat")]
    pub roundtrip_displacement: Rational,
    /// `β` is constant on a ball with at least one edge.
    pub collapses: bool,
}

impl OrbitBound {
    /// Both directions hold and `β` does not collapse the ball.
    pub fn is_quasi_isometry(&self) -> bool {
        self.forward.lipschitz.ok
            && self.backward.as_ref().is_some_and(|b| b.lipschitz.ok)
            && self.converse.as_ref().is_some_and(|c| c.ok)
            && !self.collapses
    }
}

fn lipschitz_one(g1: &LabeledGraph, g2: &LabeledGraph, beta: &[usize], classes: &[Vec<usize>]) -> Result<LipschitzReport> {
    check_map(beta, g1, g2)?;
    let disp = |e: usize| {
        let ed = g1.edge(e);
        let d = g2.distances_from(beta[ed.from])[beta[ed.to]];
        true_dist(g2, d) / true_dist(g1, ed.length)
    };
    let mut m = Rational::from_integer(0);
    let mut out = Vec::new();
    for class in classes.iter().filter(|c| !c.is_empty()) {
        let rep = class[0];
        let d = disp(rep);
        m = m.max(d);
        out.push(ClassDisplacement {
            representative: rep,
            size: class.len(),
            displacement: d,
            constant: class.iter().all(|&e| disp(e) == d),
        });
    }
    let lipschitz = scan_pairs(beta, g1, g2, |d1, d2| m * d1 - d2);
    Ok(LipschitzReport { m, classes: out, lipschitz })
}

/// Takes `M` as the largest displacement of one representative edge per
/// class and checks `d₂(βu, βv) ≤ M·d₁(u, v)` for all pairs. With an
/// inverse association `γ` the same is done from `G₂` (classes by label),
/// and `d₁(u, v) ≤ M'·d₂(βu, βv) + 2D` is checked on `G₁`.
pub fn lipschitz_orbit_bound(
    g1: &LabeledGraph,
    g2: &LabeledGraph,
    beta: &[usize],
    classes: &[Vec<usize>],
    inverse: Option<&[usize]>,
) -> Result<OrbitBound> {
    let forward = lipschitz_one(g1, g2, beta, classes)?;
    let collapses = g1.edge_count() > 0 && beta.iter().all(|&b| b == beta[0]);
    let (backward, converse, roundtrip) = match inverse {
        None => (None, None, Rational::from_integer(0)),
        Some(gamma) => {
            let back = lipschitz_one(g2, g1, gamma, &edge_classes_by_label(g2))?;
            let roundtrip = (0..g1.vertex_count())
                .map(|u| true_dist(g1, g1.distances_from(u)[gamma[beta[u]]]))
                .max()
                .unwrap_or(Rational::from_integer(0));
            let mp = back.m;
            let two_d = roundtrip * 2;
            let conv = scan_pairs(beta, g1, g2, |d1, d2| mp * d2 + two_d - d1);
            (Some(back), Some(conv), roundtrip)
        }
    };
    Ok(OrbitBound { forward, backward, converse, roundtrip_displacement: roundtrip, collapses })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::{bass_serre_ball, relative_ball};
    use crate::groups::{GroupSpec, SubgroupSpec};

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn hnn_id() -> Group {
        Group::from_json(
            r#"{"type":"hnn","base":{"type":"free","rank":1},"A":{"type":"folded","generators":["a"]},"B":{"type":"folded","generators":["a"]}}"#,
        )
        .unwrap()
    }

    #[test]
    fn identity_and_constant_maps() {
        let g = Group::from_spec(&GroupSpec::free_abelian(2)).unwrap();
        let b = relative_ball(&g, &[0, 1], &[], BallParams::new(2, 0)).unwrap();
        let id: Vec<usize> = (0..b.vertex_count()).collect();
        let v = check_qi_map(&id, &b, &b, r(1, 1), r(0, 1), r(0, 1)).unwrap();
        assert!(v.passed());
        let konst = vec![0; b.vertex_count()];
        let v = check_qi_map(&konst, &b, &b, r(1, 1), r(0, 1), r(0, 1)).unwrap();
        assert!(!v.lower.ok && v.upper.ok);
        let w = v.lower.worst.unwrap();
        assert_eq!(w.slack, w.d2 - w.d1);
        assert_eq!(w.d1, b.distance(w.x, w.y).map(|d| r(d as i64, 1)).unwrap());
        assert!(check_qi_map(&[0], &b, &b, r(1, 1), r(0, 1), r(0, 1)).is_err());
    }

    #[test]
    fn alpha_on_z2() {
        let g = Group::from_spec(&GroupSpec::free_abelian(2)).unwrap();
        let a = g.parabolic(&SubgroupSpec::lattice(&[0])).unwrap();
        let rep = eqdef_check(&g, &[1], std::slice::from_ref(&a), 3, 4).unwrap();
        assert!(rep.passed(), "{rep:#?}");
        assert!(rep.iota.is_none());
        let rep = eqdef_check(&g, &[0, 1], &[a], 2, 2).unwrap();
        assert!(rep.passed(), "{rep:#?}");
        assert!(rep.iota.as_ref().unwrap().passed());
    }

    #[test]
    fn whole_parabolic_collapses() {
        let g = hnn_id();
        let rep = eqdef_check(&g, &[1], &[Parabolic::Whole], 2, 2).unwrap();
        assert_eq!(rep.coset_vertices, 1);
        assert!(rep.eq1.ok && rep.eq2.ok, "{rep:#?}");
    }

    #[test]
    fn orbit_bounds() {
        let g = hnn_id();
        let base = g.parabolic(&SubgroupSpec::Base).unwrap();
        let c = coset_ball(&g, &[1], &[base], BallParams::new(3, 2)).unwrap();
        let t = bass_serre_ball(&g, BallParams::new(3, 2)).unwrap();
        let beta: Vec<usize> = c.payloads().iter().map(|p| t.find(p).unwrap()).collect();
        let gamma: Vec<usize> = t.payloads().iter().map(|p| c.find(p).unwrap()).collect();
        let ob = lipschitz_orbit_bound(&c, &t, &beta, &edge_classes_by_label(&c), Some(&gamma)).unwrap();
        assert_eq!(ob.forward.m, r(1, 1));
        assert!(ob.is_quasi_isometry(), "{ob:#?}");
        assert!(ob.forward.class_constant());

        let id: Vec<usize> = (0..c.vertex_count()).collect();
        let ob = lipschitz_orbit_bound(&c, &c, &id, &edge_classes_by_label(&c), Some(&id)).unwrap();
        assert_eq!(ob.forward.m, r(1, 1));
        assert!(ob.is_quasi_isometry());

        let konst = vec![0; c.vertex_count()];
        let ob = lipschitz_orbit_bound(&c, &c, &konst, &edge_classes_by_label(&c), Some(&id)).unwrap();
        assert_eq!(ob.forward.m, r(0, 1));
        assert!(ob.forward.lipschitz.ok);
        assert!(!ob.is_quasi_isometry());
    }
}
