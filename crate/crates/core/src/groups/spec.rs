//! JSON group and subgroup descriptions and their construction.

use serde::{Deserialize, Serialize};

use super::base::{BaseGroup, FactorKind, Subgroup};
use super::hnn::{Hnn, Iso};
use super::{Amalgam, Factor, Group, GroupKind, Parabolic};
use crate::error::{Error, Result};
use crate::stallings::fold;
use crate::words::{default_names, Alphabet, Letter, Word};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupSpec {
    Free {
        rank: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        names: Option<Vec<String>>,
    },
    FreeAbelian {
        rank: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        names: Option<Vec<String>>,
    },
    Product {
        factors: Vec<GroupSpec>,
    },
    Hnn {
        base: Box<GroupSpec>,
        #[serde(rename = "A")]
        a: SubgroupSpec,
        #[serde(rename = "B")]
        b: SubgroupSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        phi: Option<Vec<String>>,
        #[serde(default = "default_stable")]
        stable: String,
    },
    Amalgam {
        #[serde(rename = "H")]
        h: Box<GroupSpec>,
        #[serde(rename = "K")]
        k: Box<GroupSpec>,
        #[serde(rename = "A")]
        a: SubgroupSpec,
        #[serde(rename = "B")]
        b: SubgroupSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        phi: Option<Vec<String>>,
        #[serde(default = "default_stable")]
        stable: String,
    },
}

fn default_stable() -> String {
    "t".to_string()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoordRef {
    Index(usize),
    Name(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SubgroupSpec {
    Folded { generators: Vec<String> },
    #[serde(alias = "commutator_kernel")]
    Commutator,
    Lattice { coords: Vec<CoordRef> },
    Trivial,
    Whole,
    /// The base group of an HNN extension.
    Base,
    /// A factor (`"H"` or `"K"`) of an amalgamated product.
    Factor { which: String },
}

impl GroupSpec {
    pub fn free(rank: usize) -> Self {
        GroupSpec::Free { rank, names: None }
    }

    pub fn free_abelian(rank: usize) -> Self {
        GroupSpec::FreeAbelian { rank, names: None }
    }
}

impl SubgroupSpec {
    pub fn folded<S: Into<String>>(gens: impl IntoIterator<Item = S>) -> Self {
        SubgroupSpec::Folded { generators: gens.into_iter().map(Into::into).collect() }
    }

    pub fn lattice(coords: &[usize]) -> Self {
        SubgroupSpec::Lattice { coords: coords.iter().map(|&c| CoordRef::Index(c)).collect() }
    }
}

/// Flattens a spec into base-group factors with optional explicit names.
fn base_factors(spec: &GroupSpec, out: &mut Vec<(FactorKind, usize, Option<Vec<String>>)>) -> Result<()> {
    match spec {
        GroupSpec::Free { rank, names } => out.push((FactorKind::Free, *rank, names.clone())),
        GroupSpec::FreeAbelian { rank, names } => out.push((FactorKind::Abelian, *rank, names.clone())),
        GroupSpec::Product { factors } => {
            for f in factors {
                base_factors(f, out)?;
            }
        }
        _ => {
            return Err(Error::Unsupported(
                "base groups must be free, free abelian, or products of these".into(),
            ))
        }
    }
    Ok(())
}

fn build_base(spec: &GroupSpec, reserved: &[&str]) -> Result<(BaseGroup, Alphabet)> {
    let mut factors = Vec::new();
    base_factors(spec, &mut factors)?;
    let explicit: Vec<String> = factors.iter().filter_map(|f| f.2.clone()).flatten().collect();
    let mut pool = default_names(256, 0)
        .into_iter()
        .filter(|n| !explicit.contains(n) && !reserved.contains(&n.as_str()));
    let mut names = Vec::new();
    for (_, rank, given) in &factors {
        match given {
            Some(g) if g.len() != *rank => {
                return Err(Error::InvalidSpec(format!("{} names given for rank {rank}", g.len())))
            }
            Some(g) => names.extend(g.iter().cloned()),
            None => {
                for _ in 0..*rank {
                    names.push(pool.next().ok_or_else(|| Error::InvalidSpec("rank too large".into()))?);
                }
            }
        }
    }
    let merged: Vec<(FactorKind, usize)> = factors.iter().map(|f| (f.0, f.1)).collect();
    // adjacent free factors would not commute, so keep them separate;
    // adjacent abelian factors merge into one
    let mut norm: Vec<(FactorKind, usize)> = Vec::new();
    for (k, r) in merged {
        if r == 0 {
            continue;
        }
        match norm.last_mut() {
            Some((FactorKind::Abelian, n)) if k == FactorKind::Abelian => *n += r,
            _ => norm.push((k, r)),
        }
    }
    if norm.is_empty() {
        norm.push((FactorKind::Free, 0));
    }
    Ok((BaseGroup::new(norm), Alphabet::new(names)?))
}

pub(super) fn build(spec: &GroupSpec) -> Result<Group> {
    match spec {
        GroupSpec::Free { .. } | GroupSpec::FreeAbelian { .. } | GroupSpec::Product { .. } => {
            let (b, alphabet) = build_base(spec, &[])?;
            Ok(Group::base(b, alphabet))
        }
        GroupSpec::Hnn { base, a, b, phi, stable } => {
            let (bg, balpha) = build_base(base, &[stable.as_str()])?;
            let alphabet = balpha.with(stable)?;
            let stable_idx = balpha.len() as u32;
            let hnn = build_hnn(bg, &balpha, stable_idx, a, b, phi.as_deref())?;
            Ok(Group { alphabet, embed_alphabet: None, kind: GroupKind::Hnn(hnn) })
        }
        GroupSpec::Amalgam { h, k, a, b, phi, stable } => build_amalgam(h, k, a, b, phi.as_deref(), stable),
    }
}

fn subgroup_in_base(spec: &SubgroupSpec, base: &BaseGroup, alphabet: &Alphabet) -> Result<Subgroup> {
    let s = match spec {
        SubgroupSpec::Folded { generators } => {
            let gens = generators.iter().map(|g| alphabet.parse(g)).collect::<Result<Vec<_>>>()?;
            Subgroup::folded(gens, base)?
        }
        SubgroupSpec::Commutator => Subgroup::Commutator,
        SubgroupSpec::Lattice { coords } => {
            let mut idx = Vec::new();
            for c in coords {
                let i = match c {
                    CoordRef::Index(i) => *i,
                    CoordRef::Name(n) => alphabet
                        .index(n)
                        .ok_or_else(|| Error::Alphabet(format!("unknown generator {n:?}")))?
                        as usize,
                };
                if idx.contains(&i) {
                    return Err(Error::InvalidSpec("repeated lattice coordinate".into()));
                }
                idx.push(i);
            }
            Subgroup::Lattice(idx)
        }
        SubgroupSpec::Trivial => Subgroup::Trivial,
        SubgroupSpec::Whole | SubgroupSpec::Base => Subgroup::Whole,
        SubgroupSpec::Factor { .. } => {
            return Err(Error::Unsupported("factor subgroups exist only in amalgams".into()))
        }
    };
    s.validate(base)?;
    Ok(s)
}

fn parse_all(alphabet: &Alphabet, words: &[String]) -> Result<Vec<Word>> {
    words.iter().map(|w| alphabet.parse(w)).collect()
}

fn build_hnn(
    base: BaseGroup,
    alphabet: &Alphabet,
    stable: u32,
    a: &SubgroupSpec,
    b: &SubgroupSpec,
    phi: Option<&[String]>,
) -> Result<Hnn> {
    let sa = subgroup_in_base(a, &base, alphabet)?;
    let sb = subgroup_in_base(b, &base, alphabet)?;
    let iso = match (&sa, &sb) {
        (Subgroup::Folded { generators: ga, graph: g_a }, Subgroup::Folded { generators: gb, graph: g_b }) => {
            let images = match phi {
                Some(p) => parse_all(alphabet, p)?,
                None => gb.clone(),
            };
            if images.len() != ga.len() {
                return Err(Error::InvalidSpec(format!(
                    "phi lists {} images for {} generators of A",
                    images.len(),
                    ga.len()
                )));
            }
            if images.iter().any(|w| !g_b.member(w)) || gb.iter().any(|w| !fold(&images, base.rank()).member(w)) {
                return Err(Error::InvalidSpec("phi images do not generate B".into()));
            }
            let img_graph = fold(&images, base.rank());
            let align_a = g_a.basis_alignment(ga)?;
            // φ must be defined on the basis of B's own graph, so B's basis
            // letters are re-expressed through the image generators.
            let mut forward = vec![Word::empty(); ga.len()];
            for (i, &(idx, inv)) in align_a.iter().enumerate() {
                forward[idx] = if inv { images[i].inverse() } else { images[i].clone() };
            }
            let img_alignment = img_graph.basis_alignment(&images)?;
            let mut backward = Vec::with_capacity(g_b.rank());
            for bw in g_b.basis_words() {
                let expr = img_graph.express_in_basis(&bw)?;
                backward.push(expr.substitute(|l| {
                    let i = img_alignment.iter().position(|&(idx, _)| idx == l.gen as usize).unwrap();
                    let flip = img_alignment[i].1 ^ l.inv;
                    if flip {
                        ga[i].inverse()
                    } else {
                        ga[i].clone()
                    }
                }));
            }
            Iso::Folded { forward, backward }
        }
        (Subgroup::Commutator, Subgroup::Commutator) => {
            if phi.is_some() {
                return Err(Error::Unsupported("phi on the commutator subgroup must be the identity".into()));
            }
            Iso::Identity
        }
        (Subgroup::Whole, Subgroup::Whole) if phi.is_none() => Iso::Identity,
        (Subgroup::Lattice(ca), Subgroup::Lattice(cb)) => {
            if ca.len() != cb.len() {
                return Err(Error::InvalidSpec("lattices of different rank".into()));
            }
            let cb = match phi {
                None => cb.clone(),
                Some(p) => {
                    let mut out = Vec::new();
                    for w in parse_all(alphabet, p)? {
                        match w.letters() {
                            [l] if !l.inv && cb.contains(&(l.gen as usize)) => out.push(l.gen as usize),
                            _ => return Err(Error::InvalidSpec("lattice phi must map coordinates to coordinates of B".into())),
                        }
                    }
                    out
                }
            };
            Iso::Lattice { a: ca.clone(), b: cb }
        }
        (Subgroup::Trivial, Subgroup::Trivial) => Iso::Trivial,
        _ => return Err(Error::Unsupported(format!(
            "associated subgroups of kinds {} and {}",
            sa.kind_name(),
            sb.kind_name()
        ))),
    };
    Ok(Hnn { base, stable, a: sa, b: sb, iso })
}

fn free_names(spec: &GroupSpec, which: &str) -> Result<(usize, Option<Vec<String>>)> {
    match spec {
        GroupSpec::Free { rank, names } => Ok((*rank, names.clone())),
        _ => Err(Error::Unsupported(format!("amalgam factor {which} must be a free group"))),
    }
}

fn build_amalgam(
    h: &GroupSpec,
    k: &GroupSpec,
    a: &SubgroupSpec,
    b: &SubgroupSpec,
    phi: Option<&[String]>,
    stable: &str,
) -> Result<Group> {
    let (hr, hn) = free_names(h, "H")?;
    let (kr, kn) = free_names(k, "K")?;
    let combined = GroupSpec::Product {
        factors: vec![GroupSpec::Free { rank: hr, names: hn }, GroupSpec::Free { rank: kr, names: kn }],
    };
    let (_, alphabet) = build_base(&combined, &[stable])?;
    let key_alphabet = alphabet.with(stable)?;
    let base = BaseGroup::free(hr + kr);
    let in_factor = |spec: &SubgroupSpec, lo: usize, hi: usize, which: &str| -> Result<Vec<Word>> {
        let SubgroupSpec::Folded { generators } = spec else {
            return Err(Error::Unsupported("amalgamated subgroups must be folded".into()));
        };
        let gens = parse_all(&alphabet, generators)?;
        check_range(&gens, lo, hi, which)?;
        Ok(gens)
    };
    let ga = in_factor(a, 0, hr, "H")?;
    let gb = in_factor(b, hr, hr + kr, "K")?;
    if let Some(p) = phi {
        check_range(&parse_all(&alphabet, p)?, hr, hr + kr, "K")?;
    }
    let ga_s: Vec<String> = ga.iter().map(|w| alphabet.format(w)).collect();
    let gb_s: Vec<String> = gb.iter().map(|w| alphabet.format(w)).collect();
    let hnn = build_hnn(
        base.clone(),
        &alphabet,
        (hr + kr) as u32,
        &SubgroupSpec::Folded { generators: ga_s },
        &SubgroupSpec::Folded { generators: gb_s },
        phi,
    )?;
    let h_factor = Subgroup::folded((0..hr as u32).map(Word::gen).collect(), &base)?;
    let k_factor = Subgroup::folded((hr as u32..(hr + kr) as u32).map(Word::gen).collect(), &base)?;
    let am = Amalgam { h_rank: hr, k_rank: kr, hnn, h_factor, k_factor };
    Ok(Group { alphabet, embed_alphabet: Some(key_alphabet), kind: GroupKind::Amalgam(Box::new(am)) })
}

fn check_range(words: &[Word], lo: usize, hi: usize, which: &str) -> Result<()> {
    let ok = |l: &Letter| (lo..hi).contains(&(l.gen as usize));
    if words.iter().all(|w| w.letters().iter().all(ok)) {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("subgroup words must lie in factor {which}")))
    }
}

pub(super) fn resolve_parabolic(g: &Group, spec: &SubgroupSpec) -> Result<Parabolic> {
    match (spec, g.kind()) {
        (SubgroupSpec::Whole, _) => Ok(Parabolic::Whole),
        (SubgroupSpec::Trivial, _) => Ok(Parabolic::Trivial),
        (SubgroupSpec::Factor { which }, GroupKind::Amalgam(_)) => match which.as_str() {
            "H" | "h" => Ok(Parabolic::Factor(Factor::H)),
            "K" | "k" => Ok(Parabolic::Factor(Factor::K)),
            _ => Err(Error::InvalidSpec(format!("unknown factor {which:?}"))),
        },
        (_, GroupKind::Base(b)) => {
            if matches!(spec, SubgroupSpec::Base) {
                return Ok(Parabolic::Whole);
            }
            Ok(Parabolic::InBase(subgroup_in_base(spec, b, g.alphabet())?))
        }
        (_, GroupKind::Hnn(h)) => {
            let names = &g.alphabet().names()[..h.base.rank()];
            let balpha = Alphabet::new(names.iter().cloned())?;
            Ok(Parabolic::InBase(subgroup_in_base(spec, &h.base, &balpha)?))
        }
        (_, GroupKind::Amalgam(_)) => Err(Error::Unsupported(
            "parabolic subgroups of amalgams must be whole, trivial, or a factor".into(),
        )),
    }
}
