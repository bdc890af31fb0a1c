//! Acceptance suite: one PASS/FAIL line per criterion. Runs every
//! criterion even when an earlier one fails and exits non-zero if any
//! failed.

use std::collections::{HashSet, VecDeque};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use relhyp::cli::presets::{self, COMM_HNN, ID_HNN};
use relhyp::complexes::{relative_ball, BallParams, LabeledGraph};
use relhyp::groups::{Group, GroupSpec, SubgroupSpec};
use relhyp::hyperbolicity::{delta_series, FourPointMode, Verdict};
use relhyp::isoperimetry::{hnn_decompose, identity_vertex, path_of_word};
use relhyp::qi::eqdef_check;
use relhyp::stallings::fold;
use relhyp::words::{Letter, Word};

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass_if(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

/// All-pairs distances by plain BFS/Dijkstra over the edge list.
fn oracle_distances(g: &LabeledGraph) -> Vec<Vec<u64>> {
    let n = g.vertex_count();
    let mut adj = vec![Vec::new(); n];
    for e in g.edges() {
        adj[e.from].push((e.to, e.length as u64));
        adj[e.to].push((e.from, e.length as u64));
    }
    (0..n)
        .map(|s| {
            let mut d = vec![u64::MAX; n];
            let mut heap = std::collections::BinaryHeap::new();
            d[s] = 0;
            heap.push(std::cmp::Reverse((0u64, s)));
            while let Some(std::cmp::Reverse((du, u))) = heap.pop() {
                if du > d[u] {
                    continue;
                }
                for &(v, w) in &adj[u] {
                    if du + w < d[v] {
                        d[v] = du + w;
                        heap.push(std::cmp::Reverse((d[v], v)));
                    }
                }
            }
            d
        })
        .collect()
}

/// Largest `S₁ − S₂` over all quadruples (the two largest of the three
/// pair sums), by direct enumeration.
fn oracle_four_point(g: &LabeledGraph) -> u64 {
    let d = oracle_distances(g);
    let n = d.len();
    let mut best = 0;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                for l in k + 1..n {
                    let mut s = [d[i][j] + d[k][l], d[i][k] + d[j][l], d[i][l] + d[j][k]];
                    s.sort_unstable();
                    best = best.max(s[2] - s[1]);
                }
            }
        }
    }
    best
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let t = Instant::now();
    let mut o = f();
    let el = t.elapsed();
    if el > limit {
        o.ok = false;
    }
    o.detail = format!("{} [{:.1}s, limit {}s]", o.detail, el.as_secs_f64(), limit.as_secs());
    o
}

fn criterion_1() -> Outcome {
    let z2 = Group::from_spec(&GroupSpec::free_abelian(2)).unwrap();
    let a = z2.parabolic(&SubgroupSpec::lattice(&[0])).unwrap();
    let hnn = Group::from_json(ID_HNN).unwrap();
    let base = hnn.parabolic(&SubgroupSpec::Base).unwrap();
    let mut details = Vec::new();
    let mut ok = true;
    for (name, g, x, p, r, rh) in [("Z2 rel <a>", &z2, 1u32, a, 4, 8), ("<a,t|t^-1at=a> rel base", &hnn, 1, base, 3, 6)] {
        let t = Instant::now();
        let rep = eqdef_check(g, &[x], std::slice::from_ref(&p), r, rh).unwrap();
        // independent integer re-check of both inequalities
        let rel = relative_ball(g, &[x], std::slice::from_ref(&p), BallParams::new(r, rh)).unwrap();
        let cos = relhyp::complexes::coset_ball(g, &[x], std::slice::from_ref(&p), BallParams::new(2 * r, rh)).unwrap();
        let dr = oracle_distances(&rel);
        let dc = oracle_distances(&cos);
        let img: Vec<usize> = (0..rel.vertex_count())
            .map(|v| {
                let rep = g.left_coset_rep(&p, rel.word(v)).unwrap();
                cos.find(&relhyp::complexes::Payload::Coset { index: 0, rep }).unwrap()
            })
            .collect();
        let mut indep = true;
        for u in 0..rel.vertex_count() {
            for v in 0..rel.vertex_count() {
                let (d1, d2) = (dr[u][v], dc[img[u]][img[v]]);
                indep &= d2 <= 2 * d1 && d1 <= 2 * d2 + 1;
            }
        }
        let el = t.elapsed();
        let case_ok = rep.passed() && rep.exact && indep && el < Duration::from_secs(30);
        ok &= case_ok;
        details.push(format!(
            "{name}: eq1 {} eq2 {} density {} exact {} oracle {} ({:.1}s)",
            rep.eq1.ok,
            rep.eq2.ok,
            rep.alpha.density.ok,
            rep.exact,
            indep,
            el.as_secs_f64()
        ));
    }
    pass_if(ok, details.join("; "))
}

/// Union-find acyclicity: a connected graph is a tree iff `E = V − 1`.
fn oracle_is_tree(g: &LabeledGraph) -> bool {
    let n = g.vertex_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for e in g.edges() {
        let (a, b) = (find(&mut parent, e.from), find(&mut parent, e.to));
        if a == b {
            return false;
        }
        parent[a] = b;
    }
    g.edge_count() + 1 == n
}

fn criterion_2() -> Outcome {
    timed(Duration::from_secs(60), || {
        let cases = presets::tree_comparison().unwrap();
        let mut ok = true;
        let mut details = Vec::new();
        for (c, (spec, r, rh)) in cases.iter().zip([(ID_HNN, 4, 2), (COMM_HNN, 3, 1), (presets::BS12_HNN, 3, 2)]) {
            let g = Group::from_json(spec).unwrap();
            let tree = relhyp::complexes::bass_serre_ball(&g, BallParams::new(r, rh)).unwrap();
            let tree_ok = oracle_is_tree(&tree);
            let finite_m = c
                .orbit_bound
                .as_ref()
                .is_some_and(|o| o.backward.as_ref().is_some_and(|b| b.lipschitz.ok) && o.forward.lipschitz.ok);
            let flat = c.coset_delta.as_ref().is_some_and(|d| d.numerator == 0);
            let case_ok = c.passed() && tree_ok && (flat || finite_m);
            ok &= case_ok;
            details.push(format!(
                "{}: coset {} tree {} acyclic {} delta {} M {}/{}",
                c.name,
                c.coset_vertices,
                c.tree_vertices,
                tree_ok,
                c.coset_delta.as_ref().map_or("n/a".into(), |d| d.delta().to_string()),
                c.orbit_bound.as_ref().map_or("n/a".into(), |o| o.forward.m.to_string()),
                c.orbit_bound
                    .as_ref()
                    .and_then(|o| o.backward.as_ref())
                    .map_or("n/a".into(), |b| b.m.to_string()),
            ));
        }
        pass_if(ok, details.join("; "))
    })
}

fn criterion_3() -> Outcome {
    timed(Duration::from_secs(300), || {
        let z = presets::z_chain().unwrap();
        let mut oracle_ok = true;
        let z2 = Group::from_spec(&GroupSpec::free_abelian(2)).unwrap();
        let z3 = Group::from_spec(&GroupSpec::free_abelian(3)).unwrap();
        let p2 = vec![z2.parabolic(&SubgroupSpec::lattice(&[0])).unwrap()];
        let p3 = vec![z3.parabolic(&SubgroupSpec::lattice(&[0])).unwrap()];
        for (i, r) in [3, 4, 5, 6].into_iter().enumerate() {
            let b2 = relative_ball(&z2, &[1], &p2, BallParams::new(r, 1)).unwrap();
            let b3 = relative_ball(&z3, &[1, 2], &p3, BallParams::new(r, 1)).unwrap();
            oracle_ok &= b2.vertex_count() <= 400 && b3.vertex_count() <= 400;
            oracle_ok &= oracle_four_point(&b2) == z.z2.rows[i].report.numerator;
            oracle_ok &= oracle_four_point(&b3) == z.z3.rows[i].report.numerator;
        }
        let nums = |s: &relhyp::hyperbolicity::DeltaSeries| {
            s.rows.iter().map(|r| r.report.numerator.to_string()).collect::<Vec<_>>().join(",")
        };
        pass_if(
            z.passed() && oracle_ok,
            format!(
                "Z2 rel Z: {} ({}); Z3 rel Z: {} ({}), expected growing; oracle {}",
                z.z2.verdict.as_str(),
                nums(&z.z2),
                z.z3.verdict.as_str(),
                nums(&z.z3),
                oracle_ok
            ),
        )
    })
}

fn criterion_4() -> Outcome {
    let k = presets::comm_kernel(0, 200).unwrap();
    pass_if(
        k.passed() && k.words == 200,
        format!(
            "identity/key agreement {}/{}; nonzero exponent unpinched {}/{}; zero exponent pinched {}/{}",
            k.identity_agreement, k.words, k.nonzero_unpinched, k.conjugates_nonzero, k.zero_pinched, k.conjugates_zero
        ),
    )
}

/// Identity words built from conjugated relators `t^-k V t^k U⁻¹`, randomly
/// rotated; at most 4 stable letters and 16 letters.
fn sample_identity(g: &Group, rng: &mut impl Rng, relators: &[Vec<Letter>], stable: u32) -> Vec<Letter> {
    loop {
        let mut w: Vec<Letter> = Vec::new();
        for _ in 0..rng.gen_range(1..=2) {
            let r = &relators[rng.gen_range(0..relators.len())];
            let p: Vec<Letter> = if rng.gen_bool(0.5) {
                Vec::new()
            } else {
                let gi = rng.gen_range(0..stable);
                vec![if rng.gen_bool(0.5) { Letter::pos(gi) } else { Letter::neg(gi) }]
            };
            w.extend(p.iter().copied());
            if rng.gen_bool(0.5) {
                w.extend(r.iter().rev().map(|l| l.inverse()));
            } else {
                w.extend(r.iter().copied());
            }
            w.extend(p.iter().rev().map(|l| l.inverse()));
        }
        let w = Word::new(w).letters().to_vec();
        if w.is_empty() {
            continue;
        }
        let rot = rng.gen_range(0..w.len());
        let mut c = w[rot..].to_vec();
        c.extend_from_slice(&w[..rot]);
        let n = c.iter().filter(|l| l.gen == stable).count();
        if c.len() <= 16 && (1..=4).contains(&n) {
            assert!(g.is_identity(&Word::new(c.clone())));
            return c;
        }
    }
}

fn criterion_5() -> Outcome {
    timed(Duration::from_secs(120), || {
        let cases: [(&str, &str, &[&str]); 2] = [
            (
                "commutator-hnn",
                COMM_HNN,
                &[
                    "t^-1 a b a^-1 b^-1 t b a b^-1 a^-1",
                    "t^-2 a b a^-1 b^-1 t^2 b a b^-1 a^-1",
                    "t^-1 a b^-1 a^-1 b t b^-1 a b a^-1",
                ],
            ),
            (
                "a-to-b-hnn",
                r#"{"type":"hnn","base":{"type":"free","rank":2},"A":{"type":"folded","generators":["a"]},"B":{"type":"folded","generators":["b"]}}"#,
                &["t^-1 a t b^-1", "t^-1 a^2 t b^-2", "t^-1 a^-1 t b"],
            ),
        ];
        let mut ok = true;
        let mut details = Vec::new();
        for (name, spec, rels) in cases {
            let g = Group::from_json(spec).unwrap();
            let stable = g.hnn().unwrap().stable;
            let relators: Vec<Vec<Letter>> = rels.iter().map(|s| g.alphabet().parse_raw(s).unwrap()).collect();
            let ball = relative_ball(&g, &[0, 1, 2], &g.hnn_parabolics().unwrap(), BallParams::new(7, 0)).unwrap();
            let id = identity_vertex(&ball).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let (mut good, mut worst_l) = (0, relhyp::Rational::from_integer(0));
            for _ in 0..30 {
                let w = sample_identity(&g, &mut rng, &relators, stable);
                let c = path_of_word(&ball, id, &w).unwrap();
                let rep = hnn_decompose(&g, &ball, &c, 4).unwrap();
                // independent chain sum from the reported pieces
                let mut sum = std::collections::BTreeMap::<usize, i64>::new();
                for p in &rep.pieces {
                    for &(e, fwd) in &p.edges {
                        *sum.entry(e).or_default() += if fwd { 1 } else { -1 };
                    }
                }
                let mut input = std::collections::BTreeMap::<usize, i64>::new();
                for s in &c.steps {
                    *input.entry(s.edge).or_default() += if s.forward { 1 } else { -1 };
                }
                sum.retain(|_, v| *v != 0);
                input.retain(|_, v| *v != 0);
                let bound = relhyp::Rational::from_integer(rep.k as i64)
                    <= rep.l_measured * relhyp::Rational::from_integer(rep.l as i64)
                        + relhyp::Rational::from_integer(rep.n as i64);
                let case_ok = rep.chain_ok
                    && sum == input
                    && rep.diameter_ok
                    && rep.pieces.iter().all(|p| p.diameter <= 4)
                    && rep.bookkeeping_ok
                    && rep.bound_ok
                    && bound
                    && rep.n <= 4;
                good += case_ok as usize;
                worst_l = worst_l.max(rep.l_measured);
            }
            ok &= good == 30;
            details.push(format!("{name}: {good}/30 ok, measured L ≤ {worst_l}"));
        }
        pass_if(ok, details.join("; "))
    })
}

fn all_words(max_len: usize) -> Vec<Word> {
    let letters = [Letter::pos(0), Letter::neg(0), Letter::pos(1), Letter::neg(1)];
    let mut out = vec![Word::empty()];
    let mut layer = vec![Vec::<Letter>::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for &l in &letters {
                if w.last().is_some_and(|&p| p == l.inverse()) {
                    continue;
                }
                let mut v = w.clone();
                v.push(l);
                next.push(v);
            }
        }
        out.extend(next.iter().map(|w| Word::new(w.iter().copied())));
        layer = next;
    }
    out
}

/// Subgroup elements of length at most `bound` reachable by multiplying
/// by generators while staying within the bound.
fn closure(gens: &[Word], bound: usize) -> HashSet<Word> {
    let moves: Vec<Word> = gens.iter().flat_map(|g| [g.clone(), g.inverse()]).collect();
    let mut seen = HashSet::from([Word::empty()]);
    let mut q = VecDeque::from([Word::empty()]);
    while let Some(w) = q.pop_front() {
        for m in &moves {
            let n = w.product(m);
            if n.len() <= bound && seen.insert(n.clone()) {
                q.push_back(n);
            }
        }
    }
    seen
}

fn criterion_6() -> Outcome {
    let f2 = Group::from_spec(&GroupSpec::free(2)).unwrap();
    let words = all_words(6);
    let mut ok = true;
    let mut details = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for gens in [vec!["a"], vec!["a^2", "a b"], vec!["a^2", "b^2", "a b"]] {
        let gw: Vec<Word> = gens.iter().map(|s| f2.parse(s).unwrap()).collect();
        let sg = fold(&gw, 2);
        let oracle = closure(&gw, 12);
        let agree = words.iter().filter(|w| sg.member(w) == oracle.contains(*w)).count();
        let mut subst = 0;
        for _ in 0..100 {
            let k = rng.gen_range(0..6);
            let mut m = Word::empty();
            for _ in 0..k {
                let g = &gw[rng.gen_range(0..gw.len())];
                m = m.product(&if rng.gen_bool(0.5) { g.clone() } else { g.inverse() });
            }
            let e = sg.express_in_basis(&m).unwrap();
            subst += (sg.substitute(&e) == m) as usize;
        }
        ok &= agree == words.len() && subst == 100;
        details.push(format!("{{{}}}: {agree}/{} agree, {subst}/100 substitutions", gens.join(","), words.len()));
    }
    pass_if(ok, details.join("; "))
}

fn criterion_7() -> Outcome {
    timed(Duration::from_secs(120), || {
        let s = delta_series(presets::free_relative_ball, &[3, 4, 5], FourPointMode::Auto).unwrap();
        let nums: Vec<u64> = s.rows.iter().map(|r| r.report.numerator).collect();
        // exact δ at the largest radius, by enumeration
        let big = presets::free_relative_ball(5).unwrap();
        let exact5 = oracle_four_point(&big);
        let two = relhyp::Rational::from_integer(2);
        let bounded = s.verdict == Verdict::Bounded;
        let small = s.rows.iter().all(|r| r.report.delta() <= two) && relhyp::Rational::new(exact5 as i64, 2) <= two;
        pass_if(
            bounded && small,
            format!(
                "verdict {}; numerators {:?} (delta = numerator/2); exact numerator at r=5: {exact5}",
                s.verdict.as_str(),
                nums
            ),
        )
    })
}

/// Alternating-syllable normal form in `F(a,b) ∗_{a=c} F(c,d)`: a syllable
/// that is a power of the amalgamated generator is moved into its
/// neighbour until none is left; the word is trivial iff nothing remains.
fn amalgam_oracle_is_identity(w: &[Letter]) -> bool {
    // 0, 1 are a, b (H); 2, 3 are c, d (K)
    let side = |l: &Letter| (l.gen >= 2) as u8;
    let mut syl: Vec<(u8, Vec<Letter>)> = Vec::new();
    for l in w {
        match syl.last_mut() {
            Some((s, v)) if *s == side(l) => v.push(*l),
            _ => syl.push((side(l), vec![*l])),
        }
    }
    let mut syl: Vec<(u8, Word)> = syl.into_iter().map(|(s, v)| (s, Word::new(v))).collect();
    loop {
        // merge equal-side neighbours; an emptied syllable lets its
        // neighbours meet, hence the stack
        let mut merged: Vec<(u8, Word)> = Vec::new();
        for (s, w) in syl {
            if w.is_empty() {
                continue;
            }
            match merged.last_mut() {
                Some((ps, pw)) if *ps == s => {
                    *pw = pw.product(&w);
                    if pw.is_empty() {
                        merged.pop();
                    }
                }
                _ => merged.push((s, w)),
            }
        }
        syl = merged;
        if syl.len() <= 1 {
            return syl.is_empty();
        }
        // an amalgamated syllable: a power of a (in H) or of c (in K)
        let pos = syl.iter().position(|(s, w)| {
            let g = if *s == 0 { 0 } else { 2 };
            w.letters().iter().all(|l| l.gen == g)
        });
        match pos {
            None => return false,
            Some(i) => {
                let (s, w) = syl[i].clone();
                let swapped = Word::new(w.letters().iter().map(|l| Letter { gen: if s == 0 { 2 } else { 0 }, inv: l.inv }));
                syl[i] = (1 - s, swapped);
            }
        }
    }
}

fn syllables(w: &[Letter]) -> usize {
    w.windows(2).filter(|p| (p[0].gen >= 2) != (p[1].gen >= 2)).count() + (!w.is_empty()) as usize
}

fn criterion_8() -> Outcome {
    let g = Group::from_json(
        r#"{"type":"amalgam","H":{"type":"free","rank":2},"K":{"type":"free","rank":2},"A":{"type":"folded","generators":["a"]},"B":{"type":"folded","generators":["c"]}}"#,
    )
    .unwrap();
    assert_eq!(g.alphabet().names(), ["a", "b", "c", "d"]);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut agree = 0;
    let mut identities = 0;
    let mut n = 0;
    while n < 100 {
        let len = rng.gen_range(1..=5);
        let x: Vec<Letter> = (0..len)
            .map(|_| {
                let gen = rng.gen_range(0..4);
                Letter { gen, inv: rng.gen_bool(0.5) }
            })
            .collect();
        // half the samples: x times its inverse with a and c swapped at random
        let w: Vec<Letter> = if rng.gen_bool(0.5) {
            let mut w = x.clone();
            w.extend(x.iter().rev().map(|l| {
                let l = l.inverse();
                match l.gen {
                    0 | 2 if rng.gen_bool(0.5) => Letter { gen: 2 - l.gen, inv: l.inv },
                    _ => l,
                }
            }));
            w
        } else {
            x
        };
        if syllables(&w) > 6 {
            continue;
        }
        n += 1;
        let lib = g.is_identity(&Word::new(w.clone()));
        let oracle = amalgam_oracle_is_identity(&w);
        agree += (lib == oracle) as usize;
        identities += oracle as usize;
    }
    pass_if(agree == 100, format!("{agree}/100 agree ({identities} identities)"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 comparison inequalities for relative vs coset balls", criterion_1),
        ("2 coset balls vs Bass-Serre trees", criterion_2),
        ("3 nested separation: Z2 rel Z bounded, Z3 rel Z growing", criterion_3),
        ("4 Britton reduction in the commutator-kernel HNN", criterion_4),
        ("5 pinch decomposition of identity cycles", criterion_5),
        ("6 folded subgroup graphs vs closure oracle", criterion_6),
        ("7 F2 relative to <a^2,b^2,ab> is bounded", criterion_7),
        ("8 amalgam embedding vs syllable oracle", criterion_8),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let o = f();
        println!("criterion {name}: {} | {}", if o.ok { "PASS" } else { "FAIL" }, o.detail);
        failed += !o.ok as usize;
    }
    println!("acceptance: {} of 8 passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
