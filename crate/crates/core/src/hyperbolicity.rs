//! δ estimation on finite balls: Gromov's four-point condition (exact or
//! with a fixed basepoint), slimness of geodesic triangles, and δ series
//! over growing radii.
//!
//! Values are kept as integers: a report's `numerator` is δ in units of
//! `1 / (2·scale)`, since Gromov products on an integer-length graph are
//! half-integers.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::complexes::{LabeledGraph, Path, UNREACHABLE};
use crate::error::{Error, Result};
use crate::Rational;

pub const EXACT_LIMIT: usize = 400;
pub const BASEPOINT_LIMIT: usize = 3000;

const CAVEAT: &str = "δ of a finite ball is evidence about the infinite graph, not a proof";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaMethod {
    FourPointExact,
    FourPointBasepoint,
    SlimExhaustive,
    SlimSampled,
}

impl DeltaMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            DeltaMethod::FourPointExact => "four-point-exact",
            DeltaMethod::FourPointBasepoint => "four-point-basepoint",
            DeltaMethod::SlimExhaustive => "slim-exhaustive",
            DeltaMethod::SlimSampled => "slim-sampled",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FourPointMode {
    Exact,
    Basepoint,
    /// Exact when the ball is small enough, otherwise basepoint.
    Auto,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeltaReport {
    pub method: DeltaMethod,
    /// δ in units of `1 / (2·scale)`.
    pub numerator: u64,
    pub scale: u32,
    /// Vertex ids realising the value: a quadruple for four-point modes
    /// (base vertex last in basepoint mode), a triangle for slimness.
    pub witness: Vec<usize>,
    pub n_vertices: usize,
    /// Slimness only: false when configurations were sampled.
    pub exhaustive: bool,
    pub note: String,
}

impl DeltaReport {
    /// δ in true units.
    pub fn delta(&self) -> Rational {
        Rational::new(self.numerator as i64, 2 * self.scale as i64)
    }
}

fn check_graph(g: &LabeledGraph) -> Result<()> {
    if g.vertex_count() == 0 {
        return Err(Error::Graph("empty graph".into()));
    }
    if !g.is_connected() {
        return Err(Error::Graph("graph is disconnected".into()));
    }
    Ok(())
}

/// `S1 − S2` for the quadruple, where `S1 ≥ S2 ≥ S3` are the three pair
/// sums.
pub fn four_point_value(g: &LabeledGraph, q: [usize; 4]) -> u64 {
    let d = |a: usize, b: usize| g.distances_from(a)[b] as u64;
    let [x, y, z, w] = q;
    let mut s = [d(x, y) + d(z, w), d(x, z) + d(y, w), d(x, w) + d(y, z)];
    s.sort_unstable();
    s[2] - s[1]
}

fn better(a: (u64, [usize; 4]), b: (u64, [usize; 4])) -> (u64, [usize; 4]) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

pub fn delta_four_point(g: &LabeledGraph, mode: FourPointMode) -> Result<DeltaReport> {
    check_graph(g)?;
    let n = g.vertex_count();
    let mode = match mode {
        FourPointMode::Auto if n <= EXACT_LIMIT => FourPointMode::Exact,
        FourPointMode::Auto => FourPointMode::Basepoint,
        m => m,
    };
    let rows = g.all_distances();
    let (method, (num, quad)) = match mode {
        FourPointMode::Exact => {
            if n > EXACT_LIMIT {
                return Err(Error::TooLarge { method: "four-point-exact", n, limit: EXACT_LIMIT });
            }
            let best = (0..n)
                .into_par_iter()
                .map(|i| exact_from(&rows, i))
                .reduce(|| (0, [0, 0, 0, 0]), better);
            (DeltaMethod::FourPointExact, best)
        }
        _ => {
            if n > BASEPOINT_LIMIT {
                return Err(Error::TooLarge { method: "four-point-basepoint", n, limit: BASEPOINT_LIMIT });
            }
            let best = (0..n)
                .into_par_iter()
                .map(|i| basepoint_from(&rows, i))
                .reduce(|| (0, [0, 0, 0, 0]), better);
            (DeltaMethod::FourPointBasepoint, best)
        }
    };
    let note = match method {
        DeltaMethod::FourPointBasepoint => {
            format!("{CAVEAT}; basepoint value lies between exact/2 and exact")
        }
        _ => CAVEAT.to_string(),
    };
    Ok(DeltaReport {
        method,
        numerator: num,
        scale: g.scale(),
        witness: if num == 0 { Vec::new() } else { quad.to_vec() },
        n_vertices: n,
        exhaustive: true,
        note,
    })
}

fn exact_from(rows: &[&[u32]], i: usize) -> (u64, [usize; 4]) {
    let n = rows.len();
    let di = rows[i];
    let mut best = (0u64, [0usize; 4]);
    for j in i + 1..n {
        let dj = rows[j];
        let dij = di[j];
        for k in j + 1..n {
            let dk = rows[k];
            let (dik, djk) = (di[k], dj[k]);
            for l in k + 1..n {
                let s1 = dij + dk[l];
                let s2 = dik + dj[l];
                let s3 = di[l] + djk;
                let hi = s1.max(s2).max(s3);
                let lo = s1.min(s2).min(s3);
                let mid = s1 + s2 + s3 - hi - lo;
                let v = (hi - mid) as u64;
                if v > best.0 {
                    best = (v, [i, j, k, l]);
                }
            }
        }
    }
    best
}

/// Triples `i < j < k` against base vertex 0: with the doubled Gromov
/// products sorted `p1 ≤ p2 ≤ p3`, the defect is `p2 − p1`.
fn basepoint_from(rows: &[&[u32]], i: usize) -> (u64, [usize; 4]) {
    let n = rows.len();
    let d0 = rows[0];
    let di = rows[i];
    let mut best = (0u64, [0usize; 4]);
    for j in i + 1..n {
        let dj = rows[j];
        let pij = d0[i] + d0[j] - di[j];
        for k in j + 1..n {
            let pik = d0[i] + d0[k] - di[k];
            let pjk = d0[j] + d0[k] - dj[k];
            let lo = pij.min(pik).min(pjk);
            let hi = pij.max(pik).max(pjk);
            let mid = pij + pik + pjk - lo - hi;
            let v = (mid - lo) as u64;
            if v > best.0 {
                best = (v, [i, j, k, 0]);
            }
        }
    }
    best
}

/// Number of geodesics from `s` to every vertex (saturating).
pub fn geodesic_counts(g: &LabeledGraph, s: usize) -> Vec<u64> {
    let d = g.distances_from(s);
    let mut order: Vec<usize> = (0..g.vertex_count()).filter(|&v| d[v] != UNREACHABLE).collect();
    order.sort_by_key(|&v| d[v]);
    let mut count = vec![0u64; g.vertex_count()];
    count[s] = 1;
    for &v in &order {
        if v == s {
            continue;
        }
        let mut c = 0u64;
        for &(w, e) in g.neighbors(v) {
            if d[w] != UNREACHABLE && d[w] + g.edge(e).length == d[v] {
                c = c.saturating_add(count[w]);
            }
        }
        count[v] = c;
    }
    count
}

/// A geodesic from `u` to `v` drawn uniformly among all geodesics.
pub fn random_geodesic(g: &LabeledGraph, u: usize, v: usize, rng: &mut impl Rng) -> Result<Path> {
    let counts = geodesic_counts(g, u);
    let d = g.distances_from(u);
    if d[v] == UNREACHABLE {
        return Err(Error::Graph(format!("vertices {u} and {v} are disconnected")));
    }
    // walk backwards from v choosing predecessors weighted by their counts
    let mut rev = Vec::new();
    let mut cur = v;
    while cur != u {
        let preds: Vec<(usize, usize)> = g
            .neighbors(cur)
            .iter()
            .filter(|&&(w, e)| d[w] != UNREACHABLE && d[w] + g.edge(e).length == d[cur])
            .copied()
            .collect();
        let total: u64 = preds.iter().map(|&(w, _)| counts[w]).fold(0, u64::saturating_add);
        let mut pick = rng.gen_range(0..total.max(1));
        let mut chosen = preds[0];
        for &(w, e) in &preds {
            if pick < counts[w] {
                chosen = (w, e);
                break;
            }
            pick -= counts[w];
        }
        rev.push(g.step_from(chosen.0, chosen.1));
        cur = chosen.0;
    }
    rev.reverse();
    Ok(Path { start: u, steps: rev })
}

/// Twice the slimness of a triangle with the given sides: the largest
/// distance from a vertex of one side to the union of the other two.
pub fn triangle_slimness(g: &LabeledGraph, sides: [&Path; 3]) -> u64 {
    let vs: Vec<Vec<usize>> = sides.iter().map(|p| p.vertices(g)).collect();
    let mut worst = 0u64;
    for s in 0..3 {
        for &v in &vs[s] {
            let d = g.distances_from(v);
            let near = (0..3)
                .filter(|&o| o != s)
                .flat_map(|o| vs[o].iter())
                .map(|&w| d[w] as u64)
                .min()
                .unwrap_or(0);
            worst = worst.max(near);
        }
    }
    2 * worst
}

/// Largest slimness over geodesic triangles. All vertex triples and all
/// geodesic choices are scanned when their number is at most `budget`;
/// otherwise `budget` random configurations are drawn with the given seed.
pub fn delta_slim(g: &LabeledGraph, budget: usize, seed: u64) -> Result<DeltaReport> {
    check_graph(g)?;
    let n = g.vertex_count();
    let counts: Vec<Vec<u64>> = (0..n).map(|s| geodesic_counts(g, s)).collect();
    let mut total: u64 = 0;
    'count: for x in 0..n {
        for y in x + 1..n {
            for z in y + 1..n {
                let c = counts[x][y].saturating_mul(counts[y][z]).saturating_mul(counts[x][z]);
                total = total.saturating_add(c);
                if total > budget as u64 {
                    break 'count;
                }
            }
        }
    }
    let mut best = (0u64, Vec::new());
    let exhaustive = total <= budget as u64;
    if exhaustive {
        for x in 0..n {
            for y in x + 1..n {
                for z in y + 1..n {
                    let (pxy, _) = g.all_geodesics(x, y, usize::MAX)?;
                    let (pyz, _) = g.all_geodesics(y, z, usize::MAX)?;
                    let (pzx, _) = g.all_geodesics(z, x, usize::MAX)?;
                    for a in &pxy {
                        for b in &pyz {
                            for c in &pzx {
                                let v = triangle_slimness(g, [a, b, c]);
                                if v > best.0 {
                                    best = (v, vec![x, y, z]);
                                }
                            }
                        }
                    }
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..budget {
            let x = rng.gen_range(0..n);
            let y = rng.gen_range(0..n);
            let z = rng.gen_range(0..n);
            let a = random_geodesic(g, x, y, &mut rng)?;
            let b = random_geodesic(g, y, z, &mut rng)?;
            let c = random_geodesic(g, z, x, &mut rng)?;
            let v = triangle_slimness(g, [&a, &b, &c]);
            if v > best.0 {
                best = (v, vec![x, y, z]);
            }
        }
    }
    Ok(DeltaReport {
        method: if exhaustive { DeltaMethod::SlimExhaustive } else { DeltaMethod::SlimSampled },
        numerator: best.0,
        scale: g.scale(),
        witness: best.1,
        n_vertices: n,
        exhaustive,
        note: if exhaustive { CAVEAT.to_string() } else { format!("{CAVEAT}; sampled with seed {seed}") },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Bounded,
    Growing,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Bounded => "bounded",
            Verdict::Growing => "growing",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesRow {
    pub radius: usize,
    pub report: DeltaReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeltaSeries {
    pub rows: Vec<SeriesRow>,
    pub verdict: Verdict,
}

/// "bounded" when the last three values agree, "growing" when they
/// strictly increase.
pub fn trend(values: &[Rational]) -> Verdict {
    if values.len() < 3 {
        return Verdict::Inconclusive;
    }
    let t = &values[values.len() - 3..];
    if t[0] == t[1] && t[1] == t[2] {
        Verdict::Bounded
    } else if t[0] < t[1] && t[1] < t[2] {
        Verdict::Growing
    } else {
        Verdict::Inconclusive
    }
}

/// Four-point δ of the ball built for each radius.
pub fn delta_series(
    mut builder: impl FnMut(usize) -> Result<LabeledGraph>,
    radii: &[usize],
    mode: FourPointMode,
) -> Result<DeltaSeries> {
    if radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("radii must increase".into()));
    }
    let mut rows = Vec::new();
    for &r in radii {
        let g = builder(r)?;
        rows.push(SeriesRow { radius: r, report: delta_four_point(&g, mode)? });
    }
    let values: Vec<Rational> = rows.iter().map(|r| r.report.delta()).collect();
    Ok(DeltaSeries { verdict: trend(&values), rows })
}

impl DeltaSeries {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("radius,n_vertices,method,delta_numerator,scale,verdict\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.radius,
                r.report.n_vertices,
                r.report.method.as_str(),
                r.report.numerator,
                r.report.scale,
                self.verdict.as_str()
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::{bass_serre_ball, relative_ball, BallParams};
    use crate::groups::{Group, GroupSpec};

    fn cycle(n: usize) -> LabeledGraph {
        let e: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1)).collect();
        LabeledGraph::from_edges(n, &e).unwrap()
    }

    #[test]
    fn trees_are_zero() {
        let f2 = Group::from_spec(&GroupSpec::free(2)).unwrap();
        let b = relative_ball(&f2, &[0, 1], &[], BallParams::new(3, 0)).unwrap();
        assert_eq!(delta_four_point(&b, FourPointMode::Exact).unwrap().numerator, 0);
        assert_eq!(delta_four_point(&b, FourPointMode::Basepoint).unwrap().numerator, 0);
        let s = delta_slim(&b, 1_000_000, 0).unwrap();
        assert_eq!(s.numerator, 0);
        assert!(s.exhaustive);
    }

    #[test]
    fn cycle_four_point() {
        let c = cycle(8);
        let r = delta_four_point(&c, FourPointMode::Exact).unwrap();
        // antipodal pairs: the three pair sums at 0,2,4,6 are 4, 8, 4
        assert_eq!(r.numerator, 4);
        assert_eq!(r.delta(), Rational::from_integer(2));
        let w: [usize; 4] = r.witness.clone().try_into().unwrap();
        assert_eq!(four_point_value(&c, w), r.numerator);
        let b = delta_four_point(&c, FourPointMode::Basepoint).unwrap();
        assert!(b.numerator <= r.numerator && r.numerator <= 2 * b.numerator);
    }

    #[test]
    fn gate() {
        let c = cycle(EXACT_LIMIT + 1);
        assert!(matches!(delta_four_point(&c, FourPointMode::Exact), Err(Error::TooLarge { .. })));
        assert_eq!(delta_four_point(&c, FourPointMode::Auto).unwrap().method, DeltaMethod::FourPointBasepoint);
    }

    #[test]
    fn random_geodesics_are_geodesics() {
        let z2 = Group::from_spec(&GroupSpec::free_abelian(2)).unwrap();
        let b = relative_ball(&z2, &[0, 1], &[], BallParams::new(3, 0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let u = rng.gen_range(0..b.vertex_count());
            let v = rng.gen_range(0..b.vertex_count());
            let p = random_geodesic(&b, u, v, &mut rng).unwrap();
            assert_eq!(p.end(&b), v);
            assert_eq!(p.length(&b), b.distance(u, v).unwrap() as u64);
        }
        let counts = geodesic_counts(&b, 0);
        let (all, _) = b.all_geodesics(0, 5, usize::MAX).unwrap();
        assert_eq!(counts[5], all.len() as u64);
    }

    #[test]
    fn slim_and_four_point_vanish_together() {
        let t = bass_serre_ball(
            &Group::from_json(
                r#"{"type":"hnn","base":{"type":"free","rank":1},"A":{"type":"trivial"},"B":{"type":"trivial"}}"#,
            )
            .unwrap(),
            BallParams::new(2, 1),
        )
        .unwrap();
        assert_eq!(delta_slim(&t, 10_000, 1).unwrap().numerator, 0);
        let c = cycle(6);
        assert!(delta_slim(&c, 1_000_000, 0).unwrap().numerator > 0);
        assert!(delta_four_point(&c, FourPointMode::Exact).unwrap().numerator > 0);
    }

    #[test]
    fn trend_rules() {
        let r = |v: &[i64]| v.iter().map(|&x| Rational::from_integer(x)).collect::<Vec<_>>();
        assert_eq!(trend(&r(&[0, 1, 1, 1])), Verdict::Bounded);
        assert_eq!(trend(&r(&[1, 2, 3])), Verdict::Growing);
        assert_eq!(trend(&r(&[1, 2, 2])), Verdict::Inconclusive);
        assert_eq!(trend(&r(&[1, 1])), Verdict::Inconclusive);
    }

    #[test]
    fn free_series_bounded() {
        let f2 = Group::from_spec(&GroupSpec::free(2)).unwrap();
        let s = delta_series(
            |r| relative_ball(&f2, &[0, 1], &[], BallParams::new(r, 0)),
            &[2, 3, 4, 5],
            FourPointMode::Auto,
        )
        .unwrap();
        assert_eq!(s.verdict, Verdict::Bounded);
        assert!(s.to_csv().lines().nth(1).unwrap().ends_with(",bounded"));
    }
}
