//! Named end-to-end experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::complexes::{bass_serre_ball, coset_ball, relative_ball, BallParams, LabeledGraph};
use crate::error::{Error, Result};
use crate::groups::{Group, GroupSpec, Parabolic, SubgroupSpec};
use crate::hyperbolicity::{delta_four_point, delta_series, DeltaReport, DeltaSeries, FourPointMode, Verdict};
use crate::qi::{edge_classes_by_label, lipschitz_orbit_bound, OrbitBound};
use crate::words::{Letter, Word};
use crate::Rational;

pub const PRESETS: [&str; 4] = ["z-chain", "tree-comparison", "comm-kernel", "free-relative"];

pub const COMM_HNN: &str =
    r#"{"type":"hnn","base":{"type":"free","rank":2},"A":{"type":"commutator"},"B":{"type":"commutator"}}"#;
pub const ID_HNN: &str = r#"{"type":"hnn","base":{"type":"free","rank":1},"A":{"type":"folded","generators":["a"]},"B":{"type":"folded","generators":["a"]}}"#;
pub const BS12_HNN: &str = r#"{"type":"hnn","base":{"type":"free","rank":1},"A":{"type":"folded","generators":["a"]},"B":{"type":"folded","generators":["a^2"]},"phi":["a^2"]}"#;

/// Parabolic generated by the given coordinates of a free abelian group.
fn lattice(g: &Group, coords: &[usize]) -> Result<Parabolic> {
    g.parabolic(&SubgroupSpec::lattice(coords))
}

#[derive(Clone, Debug, Serialize)]
pub struct ZChain {
    pub z2: DeltaSeries,
    pub z3: DeltaSeries,
}

impl ZChain {
    pub fn passed(&self) -> bool {
        self.z2.verdict == Verdict::Bounded && self.z3.verdict == Verdict::Growing
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (name, series) in [("Z2_rel_Z", &self.z2), ("Z3_rel_Z", &self.z3)] {
            let csv = series.to_csv();
            let mut lines = csv.lines();
            let header = lines.next().unwrap_or_default();
            if s.is_empty() {
                s.push_str(&format!("group,{header}\n"));
            }
            for l in lines {
                s.push_str(&format!("{name},{l}\n"));
            }
        }
        s
    }
}

/// `ℤ² = ⟨a⟩ × ⟨b⟩` relative to `⟨a⟩` with `X = {b}`, and `ℤ³` relative to
/// `⟨a⟩` with `X = {b, c}`, both at `R_H = 1` over radii 3 to 6 with
/// exact four-point δ.
pub fn z_chain() -> Result<ZChain> {
    let radii = [3, 4, 5, 6];
    let z2 = Group::from_spec(&GroupSpec::free_abelian(2))?;
    let p2 = vec![lattice(&z2, &[0])?];
    let s2 = delta_series(|r| relative_ball(&z2, &[1], &p2, BallParams::new(r, 1)), &radii, FourPointMode::Exact)?;
    let z3 = Group::from_spec(&GroupSpec::free_abelian(3))?;
    let p3 = vec![lattice(&z3, &[0])?];
    let s3 = delta_series(|r| relative_ball(&z3, &[1, 2], &p3, BallParams::new(r, 1)), &radii, FourPointMode::Exact)?;
    Ok(ZChain { z2: s2, z3: s3 })
}

#[derive(Clone, Debug, Serialize)]
pub struct TreeCase {
    pub name: String,
    pub r: usize,
    pub r_h: usize,
    pub coset_vertices: usize,
    pub tree_vertices: usize,
    pub tree_acyclic: bool,
    /// Four-point δ of the coset ball when it is small enough.
    pub coset_delta: Option<DeltaReport>,
    /// Present when every coset vertex is a tree vertex and vice versa.
    pub orbit_bound: Option<OrbitBound>,
}

impl TreeCase {
    pub fn passed(&self) -> bool {
        let flat = self.coset_delta.as_ref().is_some_and(|d| d.numerator == 0);
        let matched = self
            .orbit_bound
            .as_ref()
            .is_some_and(|o| o.is_quasi_isometry() && o.backward.is_some());
        self.tree_acyclic && (flat || matched)
    }
}

/// Compares the coset ball (`X = {t}`, base group as the only parabolic)
/// of an HNN extension with its Bass–Serre tree ball.
pub fn tree_case(name: &str, g: &Group, r: usize, r_h: usize) -> Result<TreeCase> {
    let h = g.hnn().ok_or_else(|| Error::Unsupported("tree comparison needs an HNN extension".into()))?;
    let base = g.parabolic(&SubgroupSpec::Base)?;
    let params = BallParams::new(r, r_h);
    let cos = coset_ball(g, &[h.stable], &[base], params)?;
    let tree = bass_serre_ball(g, params)?;
    let coset_delta = match delta_four_point(&cos, FourPointMode::Exact) {
        Ok(d) => Some(d),
        Err(Error::TooLarge { .. }) => None,
        Err(e) => return Err(e),
    };
    let beta: Option<Vec<usize>> = cos.payloads().iter().map(|p| tree.find(p)).collect();
    let gamma: Option<Vec<usize>> = tree.payloads().iter().map(|p| cos.find(p)).collect();
    let orbit_bound = match (beta, gamma) {
        (Some(b), Some(c)) => Some(lipschitz_orbit_bound(&cos, &tree, &b, &edge_classes_by_label(&cos), Some(&c))?),
        _ => None,
    };
    Ok(TreeCase {
        name: name.to_string(),
        r,
        r_h,
        coset_vertices: cos.vertex_count(),
        tree_vertices: tree.vertex_count(),
        tree_acyclic: tree.is_acyclic(),
        coset_delta,
        orbit_bound,
    })
}

/// Three HNN extensions: `⟨a,t | t⁻¹at = a⟩`, the commutator-kernel
/// extension of `F(a,b)`, and `⟨a,t | t⁻¹at = a²⟩`.
pub fn tree_comparison() -> Result<Vec<TreeCase>> {
    Ok(vec![
        tree_case("identity-hnn", &Group::from_json(ID_HNN)?, 4, 2)?,
        tree_case("commutator-hnn", &Group::from_json(COMM_HNN)?, 3, 1)?,
        tree_case("bs12", &Group::from_json(BS12_HNN)?, 3, 2)?,
    ])
}

#[derive(Clone, Debug, Serialize)]
pub struct CommKernel {
    pub seed: u64,
    pub words: usize,
    /// `is_identity` agreed with comparing canonical keys.
    pub identity_agreement: usize,
    pub conjugates_nonzero: usize,
    pub nonzero_unpinched: usize,
    pub conjugates_zero: usize,
    pub zero_pinched: usize,
    pub disagreements: Vec<String>,
}

impl CommKernel {
    pub fn passed(&self) -> bool {
        self.identity_agreement == self.words
            && self.nonzero_unpinched == self.conjugates_nonzero
            && self.zero_pinched == self.conjugates_zero
    }
}

/// Uniformly random letters over the first `rank` generators, freely
/// reduced; at most `max_len` letters before reduction.
pub fn random_word(rng: &mut impl Rng, rank: u32, max_len: usize) -> Word {
    let len = rng.gen_range(0..=max_len);
    Word::new((0..len).map(|_| {
        let g = rng.gen_range(0..rank);
        if rng.gen_bool(0.5) {
            Letter::pos(g)
        } else {
            Letter::neg(g)
        }
    }))
}

/// Word problem checks in the commutator-kernel HNN extension of `F(a,b)`:
/// random words, and conjugates `t⁻¹wt` of nonempty base words `w` with
/// zero and nonzero exponent sums.
pub fn comm_kernel(seed: u64, words: usize) -> Result<CommKernel> {
    let g = Group::from_json(COMM_HNN)?;
    let h = g.hnn().expect("hnn preset");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = g.canonical_form(&Word::empty()).key;
    let mut rep = CommKernel {
        seed,
        words,
        identity_agreement: 0,
        conjugates_nonzero: 0,
        nonzero_unpinched: 0,
        conjugates_zero: 0,
        zero_pinched: 0,
        disagreements: Vec::new(),
    };
    let t = Word::gen(h.stable);
    for _ in 0..words {
        let w = random_word(&mut rng, 3, 10);
        if g.is_identity(&w) == (g.canonical_form(&w).key == id) {
            rep.identity_agreement += 1;
        } else {
            rep.disagreements.push(g.format(&w));
        }
        // nonempty base word, forced into the kernel half of the time
        let into_kernel = rng.gen_bool(0.5);
        let b = loop {
            let b = random_word(&mut rng, 2, 8);
            let ev = b.exponent_vector(2);
            let b = if into_kernel {
                b.product(&Word::gen_pow(0, -ev[0])).product(&Word::gen_pow(1, -ev[1]))
            } else {
                b
            };
            if !b.is_empty() {
                break b;
            }
        };
        let conj = t.inverse().product(&b).product(&t);
        let pinched = g.pinch_find(&conj)?.is_some();
        if b.exponent_vector(2).iter().all(|&e| e == 0) {
            rep.conjugates_zero += 1;
            rep.zero_pinched += pinched as usize;
        } else {
            rep.conjugates_nonzero += 1;
            rep.nonzero_unpinched += !pinched as usize;
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug, Serialize)]
pub struct FreeRelative {
    pub series: DeltaSeries,
}

impl FreeRelative {
    pub fn passed(&self) -> bool {
        self.series.verdict == Verdict::Bounded && self.series.rows.iter().all(|r| r.report.delta() <= Rational::from_integer(2))
    }
}

/// `F(a,b)` relative to `⟨a², b², ab⟩` with `X = {a, b}`, `R_H = 1`, over
/// radii 3 to 5.
pub fn free_relative_ball(r: usize) -> Result<LabeledGraph> {
    let g = Group::from_spec(&GroupSpec::free(2))?;
    let p = g.parabolic(&SubgroupSpec::folded(["a^2", "b^2", "a b"]))?;
    relative_ball(&g, &[0, 1], &[p], BallParams::new(r, 1))
}

pub fn free_relative() -> Result<FreeRelative> {
    Ok(FreeRelative { series: delta_series(free_relative_ball, &[3, 4, 5], FourPointMode::Auto)? })
}
