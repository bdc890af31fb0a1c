use super::*;
use crate::groups::{Group, GroupSpec, Parabolic, SubgroupSpec};

fn z2() -> Group {
    Group::from_spec(&GroupSpec::free_abelian(2)).unwrap()
}

fn hnn_id() -> Group {
    Group::from_json(
        r#"{"type":"hnn","base":{"type":"free","rank":1},"A":{"type":"folded","generators":["a"]},"B":{"type":"folded","generators":["a"]}}"#,
    )
    .unwrap()
}

fn key(g: &Group, s: &str) -> Word {
    g.canonical_form(&g.parse(s).unwrap()).key
}

#[test]
fn free_cayley_ball() {
    let f2 = Group::from_spec(&GroupSpec::free(2)).unwrap();
    let b = relative_ball(&f2, &[0, 1], &[], BallParams::new(2, 0)).unwrap();
    assert_eq!(b.vertex_count(), 17);
    assert!(b.is_acyclic());
}

#[test]
fn relative_ball_counts() {
    let g = z2();
    let a = g.parabolic(&SubgroupSpec::lattice(&[0])).unwrap();
    let b = relative_ball(&g, &[1], &[a], BallParams::new(1, 3)).unwrap();
    assert_eq!(b.vertex_count(), 9);
    let plain = relative_ball(&g, &[0, 1], &[], BallParams::new(3, 0)).unwrap();
    assert_eq!(plain.vertex_count(), 25);
    let u = plain.find_element(&key(&g, "a^2 b")).unwrap();
    let v = plain.find_element(&key(&g, "b^-1")).unwrap();
    assert_eq!(plain.distance(u, v), Some(4));
    assert_eq!(plain.distance(u, u), Some(0));
}

#[test]
fn relative_ball_parabolic_cliques() {
    let g = z2();
    let a = g.parabolic(&SubgroupSpec::lattice(&[0])).unwrap();
    let b = relative_ball_checked(&g, &[1], &[a], BallParams::new(2, 2)).unwrap();
    let u = b.find_element(&key(&g, "a^2 b")).unwrap();
    let v = b.find_element(&key(&g, "a^-2 b")).unwrap();
    assert_eq!(b.distance(u, v), Some(1));
    assert!(b.meta().exact.is_some());
}

#[test]
fn ball_monotone() {
    let g = hnn_id();
    let pa = g.parabolic(&SubgroupSpec::Base).unwrap();
    let small = relative_ball(&g, &[1], std::slice::from_ref(&pa), BallParams::new(2, 2)).unwrap();
    let big = relative_ball(&g, &[1], &[pa], BallParams::new(3, 2)).unwrap();
    for p in small.payloads() {
        assert!(big.find(p).is_some());
    }
}

#[test]
fn coset_line() {
    let g = z2();
    let a = g.parabolic(&SubgroupSpec::lattice(&[0])).unwrap();
    let c = coset_ball(&g, &[1], std::slice::from_ref(&a), BallParams::new(3, 1)).unwrap();
    assert_eq!(c.vertex_count(), 7);
    assert!(c.is_acyclic());
    let id = c.edges().iter().position(|e| e.label == EdgeLabel::Triple { i: 0, j: 0, x: Some(Letter::pos(1)) }).unwrap();
    for f in 0..c.edge_count() {
        let lab = &c.edge(f).label;
        let x = Some(Letter::pos(1));
        if *lab == (EdgeLabel::Triple { i: 0, j: 0, x }) || lab.reversed() == (EdgeLabel::Triple { i: 0, j: 0, x }) {
            let w = edge_orbit_witness(&g, std::slice::from_ref(&a), &c, id, f).unwrap();
            assert_eq!(w.key.exponent_vector(2)[0], 0);
        }
    }
    let w = edge_orbit_witness(&g, &[a], &c, id, id).unwrap();
    assert!(w.is_identity());
}

#[test]
fn coset_ball_whole_is_point() {
    let g = hnn_id();
    let c = coset_ball(&g, &[0, 1], &[Parabolic::Whole], BallParams::new(3, 2)).unwrap();
    assert_eq!(c.vertex_count(), 1);
    assert_eq!(c.edge_count(), 0);
}

#[test]
fn hnn_coset_ball_matches_tree() {
    let g = hnn_id();
    let base = g.parabolic(&SubgroupSpec::Base).unwrap();
    let c = coset_ball(&g, &[1], &[base], BallParams::new(2, 2)).unwrap();
    let t = bass_serre_ball(&g, BallParams::new(2, 2)).unwrap();
    assert_eq!(c.vertex_count(), 5);
    assert_eq!(t.vertex_count(), 5);
    assert!(c.is_acyclic());
    for p in c.payloads() {
        assert!(t.find(p).is_some());
    }
}

#[test]
fn coned_off_distances() {
    let g = z2();
    let a = g.parabolic(&SubgroupSpec::lattice(&[0])).unwrap();
    let c = coned_off_ball(&g, &[0, 1], std::slice::from_ref(&a), BallParams::new(3, 3)).unwrap();
    assert_eq!(c.scale(), 2);
    let e = c.find_element(&Word::empty()).unwrap();
    for k in [-3i64, -2, -1, 1, 2, 3] {
        let v = c.find_element(&Word::gen_pow(0, k)).unwrap();
        assert_eq!(c.distance(e, v), Some(2));
    }
    let v = c.find_element(&key(&g, "a b")).unwrap();
    let cone = c.find(&Payload::Cone { index: 0, rep: g.left_coset_rep(&a, &g.parse("b").unwrap()).unwrap() }).unwrap();
    assert_eq!(c.distance(v, cone), Some(1));
    assert!(coned_off_ball(&g, &[1], &[a], BallParams::new(1, 1)).is_err());
}

#[test]
fn tree_balls() {
    let f2 = Group::from_json(
        r#"{"type":"hnn","base":{"type":"free","rank":1},"A":{"type":"trivial"},"B":{"type":"trivial"}}"#,
    )
    .unwrap();
    let t = bass_serre_ball(&f2, BallParams::new(2, 1)).unwrap();
    assert!(t.is_acyclic());
    // each coset has 3 representatives of length <= 1, each with t and t^-1
    assert_eq!(t.vertex_count(), 1 + 6 + 6 * 5);
    assert_eq!(bass_serre_ball(&f2, BallParams::new(0, 1)).unwrap().vertex_count(), 1);
    let am = Group::from_json(
        r#"{"type":"amalgam","H":{"type":"free","rank":1},"K":{"type":"free","rank":1},"A":{"type":"folded","generators":["a^2"]},"B":{"type":"folded","generators":["b^2"]}}"#,
    )
    .unwrap();
    let t = bass_serre_ball(&am, BallParams::new(2, 2)).unwrap();
    let colours = t.bipartition().unwrap();
    for (v, p) in t.payloads().iter().enumerate() {
        let Payload::Coset { index, .. } = p else { panic!() };
        assert_eq!(colours[v] as usize, *index);
    }
    assert_eq!(t.vertex_count(), 1 + 2 + 2);
}

#[test]
fn geodesics_in_tree_are_unique() {
    let f2 = Group::from_spec(&GroupSpec::free(2)).unwrap();
    let b = relative_ball(&f2, &[0, 1], &[], BallParams::new(3, 0)).unwrap();
    for v in 0..b.vertex_count() {
        let (paths, trunc) = b.all_geodesics(0, v, 10).unwrap();
        assert_eq!(paths.len(), 1);
        assert!(!trunc);
        assert_eq!(paths[0], b.geodesic(0, v).unwrap());
    }
}

#[test]
fn grid_geodesic_count() {
    let g = z2();
    let b = relative_ball(&g, &[0, 1], &[], BallParams::new(3, 0)).unwrap();
    let u = b.find_element(&Word::empty()).unwrap();
    let v = b.find_element(&key(&g, "a^2 b")).unwrap();
    let (paths, _) = b.all_geodesics(u, v, 100).unwrap();
    assert_eq!(paths.len(), 3);
    for p in &paths {
        assert_eq!(p.end(&b), v);
        assert_eq!(p.length(&b), 3);
        assert!(g.is_identity(&b.walk_word(p).unwrap().product(&g.parse("a^-2 b^-1").unwrap())));
    }
    let (few, trunc) = b.all_geodesics(u, v, 2).unwrap();
    assert_eq!(few.len(), 2);
    assert!(trunc);
}

#[test]
fn json_round_trip() {
    let g = z2();
    let a = g.parabolic(&SubgroupSpec::lattice(&[0])).unwrap();
    let c = coned_off_ball(&g, &[0, 1], &[a], BallParams::new(2, 1)).unwrap();
    let s = c.to_json(g.alphabet(), g.key_alphabet()).unwrap();
    let back = LabeledGraph::from_json(&s).unwrap();
    assert_eq!(back.vertex_count(), c.vertex_count());
    assert_eq!(back.edge_count(), c.edge_count());
    assert_eq!(back.scale(), 2);
    for u in 0..c.vertex_count() {
        for v in 0..c.vertex_count() {
            assert_eq!(back.distance(u, v), c.distance(u, v));
        }
    }
    assert!(c.to_dot(g.alphabet(), g.key_alphabet()).starts_with("graph ball {"));
}

#[test]
fn loaded_cycle() {
    let edges: Vec<(usize, usize, u32)> = (0..8).map(|i| (i, (i + 1) % 8, 1)).collect();
    let c8 = LabeledGraph::from_edges(8, &edges).unwrap();
    assert_eq!(c8.distance(0, 4), Some(4));
    assert!(!c8.is_acyclic());
    assert!(c8.is_bipartite());
}
