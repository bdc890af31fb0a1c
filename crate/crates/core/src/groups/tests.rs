use super::*;

fn hnn_id() -> Group {
    Group::from_json(
        r#"{"type":"hnn","base":{"type":"free","rank":1},"A":{"type":"folded","generators":["a"]},"B":{"type":"folded","generators":["a"]}}"#,
    )
    .unwrap()
}

fn comm_hnn() -> Group {
    Group::from_json(
        r#"{"type":"hnn","base":{"type":"free","rank":2},"A":{"type":"commutator_kernel"},"B":{"type":"commutator"}}"#,
    )
    .unwrap()
}

#[test]
fn free_and_abelian_identity() {
    let f2 = Group::from_spec(&GroupSpec::free(2)).unwrap();
    let z2 = Group::from_spec(&GroupSpec::free_abelian(2)).unwrap();
    let w = f2.parse("a b a^-1 b^-1").unwrap();
    assert!(!f2.is_identity(&w));
    assert!(z2.is_identity(&w));
    assert!(f2.is_identity(&f2.parse("a a^-1").unwrap()));
}

#[test]
fn product_names_are_sequential() {
    let g = Group::from_json(
        r#"{"type":"product","factors":[{"type":"free","rank":2},{"type":"free_abelian","rank":2}]}"#,
    )
    .unwrap();
    assert_eq!(g.alphabet().names(), &["a", "b", "c", "d"]);
    assert!(g.is_identity(&g.parse("a c a^-1 c^-1").unwrap()));
    assert!(g.is_identity(&g.parse("c d c^-1 d^-1").unwrap()));
    assert!(!g.is_identity(&g.parse("a b a^-1 b^-1").unwrap()));
}

#[test]
fn hnn_relation_holds() {
    let g = hnn_id();
    assert_eq!(g.alphabet().names(), &["a", "t"]);
    assert!(g.is_identity(&g.parse("t^-1 a t a^-1").unwrap()));
    assert_eq!(g.canonical_form(&g.parse("t^-1 a t").unwrap()), g.canonical_form(&g.parse("a").unwrap()));
    assert_eq!(g.format(&g.britton_reduce(&g.parse("t^-1 a t").unwrap()).unwrap()), "a");
    assert!(!g.is_identity(&g.parse("t a").unwrap()));
}

#[test]
fn commutator_kernel_hnn() {
    let g = comm_hnn();
    assert!(g.is_identity(&g.parse("t^-1 a b a^-1 b^-1 t b a b^-1 a^-1").unwrap()));
    assert!(!g.is_identity(&g.parse("t^-1 a t a^-1").unwrap()));
    let w = g.parse("t^-1 a b a^-1 b^-1 t").unwrap();
    assert_eq!(g.format(&g.britton_reduce(&w).unwrap()), "a b a^-1 b^-1");
}

#[test]
fn pinch_positions() {
    let g = hnn_id();
    let p = g.pinch_find(&g.parse("t^-1 a t").unwrap()).unwrap().unwrap();
    assert_eq!((p.start, p.end, p.side), (0, 2, PinchSide::A));
    assert!(g.pinch_find(&g.parse("a t a").unwrap()).unwrap().is_none());
    let p = g.pinch_find(&g.parse("t t^-1 a t t^-1").unwrap()).unwrap();
    // free reduction leaves `t t^-1 a t t^-1` as `a`
    assert!(p.is_none());
    let f2 = Group::from_json(
        r#"{"type":"hnn","base":{"type":"free","rank":2},"A":{"type":"folded","generators":["a"]},"B":{"type":"folded","generators":["a"]}}"#,
    )
    .unwrap();
    let w = f2.parse("t b t^-1 b t b^-1 t^-1").unwrap();
    assert!(f2.pinch_find(&w).unwrap().is_none());
    let w = f2.parse("t b t^-1 t^-1 a t t b^-1 t^-1").unwrap();
    // reduced form is t b t^-2 a t^2 b^-1 t^-1: the inner t^-1 a t pinches first
    let p = f2.pinch_find(&w).unwrap().unwrap();
    assert_eq!((p.start, p.end, p.side), (3, 5, PinchSide::A));
    assert!(f2.is_identity(&w.product(&f2.parse("t b a^-1 b^-1 t^-1").unwrap())));
}

#[test]
fn phi_on_generators() {
    let g = Group::from_json(
        r#"{"type":"hnn","base":{"type":"free","rank":2},"A":{"type":"folded","generators":["a"]},"B":{"type":"folded","generators":["b"]},"phi":["b"],"stable":"t"}"#,
    )
    .unwrap();
    let a3 = g.parse("a^3").unwrap();
    assert_eq!(g.format(&g.phi_apply(&a3, Direction::Forward).unwrap()), "b^3");
    assert_eq!(g.format(&g.phi_apply(&g.parse("b^-2").unwrap(), Direction::Backward).unwrap()), "a^-2");
    assert!(g.phi_apply(&g.parse("b").unwrap(), Direction::Forward).is_err());
    assert!(g.is_identity(&g.parse("t^-1 a t b^-1").unwrap()));
}

#[test]
fn phi_rank_two() {
    let g = Group::from_json(
        r#"{"type":"hnn","base":{"type":"free","rank":2},"A":{"type":"folded","generators":["a^2","a b"]},"B":{"type":"folded","generators":["b","a"]},"phi":["b","a"]}"#,
    )
    .unwrap();
    let w = g.parse("a b a^2").unwrap();
    assert_eq!(g.format(&g.phi_apply(&w, Direction::Forward).unwrap()), "a b");
    let back = g.phi_apply(&g.parse("a b").unwrap(), Direction::Backward).unwrap();
    assert_eq!(g.format(&back), "a b a^2");
}

#[test]
fn rejects_non_basis() {
    let r = Group::from_json(
        r#"{"type":"hnn","base":{"type":"free","rank":2},"A":{"type":"folded","generators":["a","a^2"]},"B":{"type":"folded","generators":["b","b^2"]}}"#,
    );
    assert!(r.is_err());
    let r = Group::from_json(
        r#"{"type":"hnn","base":{"type":"free_abelian","rank":2},"A":{"type":"commutator"},"B":{"type":"commutator"}}"#,
    );
    assert!(r.is_err());
}

#[test]
fn lattice_hnn() {
    let g = Group::from_json(
        r#"{"type":"hnn","base":{"type":"free_abelian","rank":2},"A":{"type":"lattice","coords":["a"]},"B":{"type":"lattice","coords":[1]}}"#,
    )
    .unwrap();
    assert!(g.is_identity(&g.parse("t^-1 a^2 t b^-2").unwrap()));
    assert!(!g.is_identity(&g.parse("t^-1 b t a^-1").unwrap()));
}

#[test]
fn normal_form_separates_ball() {
    let g = hnn_id();
    let ball = g.ball(4, 10_000).unwrap();
    for u in &ball {
        for v in &ball {
            let same = u.key == v.key;
            assert_eq!(same, g.is_identity(&u.word.product(&v.word.inverse())));
        }
    }
}

#[test]
fn amalgam_embedding() {
    let spec = |phi: &str| {
        format!(
            r#"{{"type":"amalgam","H":{{"type":"free","rank":2}},"K":{{"type":"free","rank":2}},"A":{{"type":"folded","generators":["a"]}},"B":{{"type":"folded","generators":["c"]}}{phi}}}"#
        )
    };
    let g = Group::from_json(&spec("")).unwrap();
    assert_eq!(g.alphabet().names(), &["a", "b", "c", "d"]);
    let w = g.parse("a c^-1").unwrap();
    let e = g.amalgam_embed_word(&w).unwrap();
    assert_eq!(g.key_alphabet().format(&e), "a t c^-1 t^-1");
    assert!(g.is_identity(&w));
    assert!(!g.is_identity(&g.parse("b d^-1").unwrap()));
    assert_eq!(g.amalgam_embed_word(&g.parse("a b").unwrap()).unwrap(), g.parse("a b").unwrap());

    let g2 = Group::from_json(&spec(r#","phi":["c^-1"]"#)).unwrap();
    assert!(!g2.is_identity(&w));
    assert!(g2.is_identity(&g2.parse("a c").unwrap()));
}

#[test]
fn coset_reps_in_hnn() {
    let g = hnn_id();
    let p = g.parabolic(&SubgroupSpec::Base).unwrap();
    let t = g.parse("t").unwrap();
    let ta = g.parse("t a^5").unwrap();
    assert_eq!(g.left_coset_rep(&p, &t).unwrap(), g.left_coset_rep(&p, &ta).unwrap());
    assert_ne!(g.left_coset_rep(&p, &t).unwrap(), g.left_coset_rep(&p, &Word::empty()).unwrap());
    // a^5 t = t a^5 in this group
    let at = g.parse("a^5 t").unwrap();
    assert_eq!(g.left_coset_rep(&p, &t).unwrap(), g.left_coset_rep(&p, &at).unwrap());
    assert!(g.parabolic_contains(&p, &g.parse("t^-1 a^3 t").unwrap()).unwrap());
}

#[test]
fn amalgam_factor_cosets() {
    let g = Group::from_json(
        r#"{"type":"amalgam","H":{"type":"free","rank":1},"K":{"type":"free","rank":1},"A":{"type":"folded","generators":["a^2"]},"B":{"type":"folded","generators":["b^2"]}}"#,
    )
    .unwrap();
    let h = g.parabolic(&SubgroupSpec::Factor { which: "H".into() }).unwrap();
    let k = g.parabolic(&SubgroupSpec::Factor { which: "K".into() }).unwrap();
    let rep = |p: &Parabolic, s: &str| g.left_coset_rep(p, &g.parse(s).unwrap()).unwrap();
    assert_eq!(rep(&h, "a^3"), rep(&h, "e"));
    assert_eq!(rep(&h, "b^2"), rep(&h, "e"));
    assert_ne!(rep(&h, "b"), rep(&h, "e"));
    assert_eq!(rep(&h, "b a"), rep(&h, "b"));
    assert_eq!(rep(&h, "b a^2"), rep(&h, "b^3"));
    assert_eq!(rep(&k, "b^7"), rep(&k, "e"));
    assert_eq!(rep(&k, "a b"), rep(&k, "a"));
    assert_ne!(rep(&k, "a"), rep(&k, "e"));
    assert_eq!(rep(&k, "a^2"), rep(&k, "e"));
    assert!(g.parabolic_contains(&k, &g.parse("a^2 b").unwrap()).unwrap());
}

#[test]
fn parabolic_element_lists() {
    let z2 = Group::from_spec(&GroupSpec::free_abelian(2)).unwrap();
    let p = z2.parabolic(&SubgroupSpec::lattice(&[0])).unwrap();
    let els = z2.parabolic_elements(&p, 3, 1000).unwrap();
    assert_eq!(els.len(), 6);
    let f2 = Group::from_spec(&GroupSpec::free(2)).unwrap();
    let p = f2.parabolic(&SubgroupSpec::folded(["a^2", "a b"])).unwrap();
    let els = f2.parabolic_elements(&p, 2, 1000).unwrap();
    let names: Vec<String> = els.iter().map(|w| f2.format(w)).collect();
    assert_eq!(names.len(), 6, "{names:?}");
}
