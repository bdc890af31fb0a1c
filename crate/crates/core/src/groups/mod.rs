//! Group constructions with exact word problems and canonical normal forms.
//!
//! Supported: free and free abelian groups and direct products of these
//! ("base groups"), HNN extensions of a base group, and amalgamated
//! products of two free groups. Amalgams are handled entirely through
//! their embedding into the HNN extension of `H ∗ K` with associated
//! subgroups `A` and `B`: a `K`-letter `k` maps to `t k t⁻¹`.

mod base;
mod hnn;
mod spec;

use std::collections::{HashMap, VecDeque};
use std::hash::{Hash, Hasher};

pub use base::{BaseGroup, FactorKind, Subgroup};
pub use hnn::{Direction, Hnn, NormalForm, Pinch, PinchSide};
pub use spec::{CoordRef, GroupSpec, SubgroupSpec};

use crate::error::{Error, Result};
use crate::words::{Alphabet, Letter, Word};

/// A group element: a canonical key (equal iff the elements are equal) and
/// a word over the group's own alphabet representing it.
#[derive(Clone, Debug)]
pub struct Element {
    pub key: Word,
    pub word: Word,
}

impl PartialEq for Element {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}

impl Eq for Element {}

impl Hash for Element {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key.hash(state)
    }
}

impl Element {
    pub fn is_identity(&self) -> bool {
        self.key.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct Amalgam {
    pub h_rank: usize,
    pub k_rank: usize,
    /// HNN extension of `H ∗ K`; its stable letter is generator `h_rank + k_rank`.
    pub hnn: Hnn,
    pub(crate) h_factor: Subgroup,
    pub(crate) k_factor: Subgroup,
}

impl Amalgam {
    pub fn is_k_letter(&self, l: Letter) -> bool {
        (l.gen as usize) >= self.h_rank && (l.gen as usize) < self.h_rank + self.k_rank
    }

    /// Every `K`-letter `k` becomes `t k t⁻¹`.
    pub fn embed_word(&self, w: &Word) -> Word {
        let t = self.hnn.stable;
        let mut v = Vec::with_capacity(w.len() * 3);
        for &l in w.letters() {
            if self.is_k_letter(l) {
                v.extend([Letter::pos(t), l, Letter::neg(t)]);
            } else {
                v.push(l);
            }
        }
        Word::new(v)
    }
}

#[derive(Clone, Debug)]
pub enum GroupKind {
    Base(BaseGroup),
    Hnn(Hnn),
    Amalgam(Box<Amalgam>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factor {
    H,
    K,
}

/// A subgroup of a constructed group, used as a parabolic (peripheral)
/// subgroup or as a vertex group of the Bass–Serre tree.
#[derive(Clone, Debug)]
pub enum Parabolic {
    /// Subgroup of the base group (the group itself unless it is an HNN
    /// extension).
    InBase(Subgroup),
    Whole,
    Trivial,
    /// A factor of an amalgamated product.
    Factor(Factor),
}

#[derive(Clone, Debug)]
pub struct Group {
    alphabet: Alphabet,
    embed_alphabet: Option<Alphabet>,
    kind: GroupKind,
}

impl Group {
    pub fn from_spec(spec: &GroupSpec) -> Result<Group> {
        spec::build(spec)
    }

    pub fn from_json(s: &str) -> Result<Group> {
        let spec: GroupSpec = serde_json::from_str(s)?;
        Group::from_spec(&spec)
    }

    pub fn base(base: BaseGroup, alphabet: Alphabet) -> Self {
        Group { alphabet, embed_alphabet: None, kind: GroupKind::Base(base) }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Alphabet of the words used as canonical keys (includes the extra
    /// stable letter for amalgams).
    pub fn key_alphabet(&self) -> &Alphabet {
        self.embed_alphabet.as_ref().unwrap_or(&self.alphabet)
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn hnn(&self) -> Option<&Hnn> {
        match &self.kind {
            GroupKind::Hnn(h) => Some(h),
            _ => None,
        }
    }

    /// `[A, B]` of an HNN extension, in the order expected by the pinch
    /// decomposition.
    pub fn hnn_parabolics(&self) -> Option<Vec<Parabolic>> {
        self.hnn().map(|h| vec![Parabolic::InBase(h.a.clone()), Parabolic::InBase(h.b.clone())])
    }

    pub fn amalgam(&self) -> Option<&Amalgam> {
        match &self.kind {
            GroupKind::Amalgam(a) => Some(a),
            _ => None,
        }
    }

    pub fn rank(&self) -> usize {
        self.alphabet.len()
    }

    pub fn parse(&self, s: &str) -> Result<Word> {
        self.alphabet.parse(s)
    }

    pub fn format(&self, w: &Word) -> String {
        self.alphabet.format(w)
    }

    pub fn generators(&self) -> Vec<Word> {
        (0..self.rank() as u32).map(Word::gen).collect()
    }

    pub fn is_identity(&self, w: &Word) -> bool {
        match &self.kind {
            GroupKind::Base(b) => b.is_identity(w),
            GroupKind::Hnn(h) => h.is_identity(w),
            GroupKind::Amalgam(a) => a.hnn.is_identity(&a.embed_word(w)),
        }
    }

    pub fn canonical_form(&self, w: &Word) -> Element {
        match &self.kind {
            GroupKind::Base(b) => {
                let key = b.normal_form(w);
                Element { word: key.clone(), key }
            }
            GroupKind::Hnn(h) => {
                let key = h.canonical_word(w);
                Element { word: key.clone(), key }
            }
            GroupKind::Amalgam(a) => {
                Element { key: a.hnn.canonical_word(&a.embed_word(w)), word: w.clone() }
            }
        }
    }

    pub fn multiply(&self, g: &Element, w: &Word) -> Element {
        self.canonical_form(&g.word.product(w))
    }

    pub fn identity(&self) -> Element {
        Element { key: Word::empty(), word: Word::empty() }
    }

    pub fn britton_reduce(&self, w: &Word) -> Result<Word> {
        self.hnn()
            .map(|h| h.britton_reduce(w))
            .ok_or_else(|| Error::Unsupported("Britton reduction needs an HNN extension".into()))
    }

    pub fn pinch_find(&self, w: &Word) -> Result<Option<Pinch>> {
        self.hnn()
            .map(|h| h.pinch_find(w))
            .ok_or_else(|| Error::Unsupported("pinches exist only in HNN extensions".into()))
    }

    pub fn phi_apply(&self, w: &Word, dir: Direction) -> Result<Word> {
        self.hnn()
            .ok_or_else(|| Error::Unsupported("phi is defined for HNN extensions".into()))?
            .phi_apply(w, dir)
    }

    pub fn amalgam_embed_word(&self, w: &Word) -> Result<Word> {
        self.amalgam()
            .map(|a| a.embed_word(w))
            .ok_or_else(|| Error::Unsupported("not an amalgamated product".into()))
    }

    /// Elements of word length at most `radius` in BFS order.
    pub fn ball(&self, radius: usize, budget: usize) -> Result<Vec<Element>> {
        let mut seen: HashMap<Word, ()> = HashMap::new();
        let id = self.identity();
        seen.insert(id.key.clone(), ());
        let mut out = vec![id.clone()];
        let mut queue = VecDeque::from([(id, 0usize)]);
        let gens: Vec<Word> = (0..self.rank() as u32)
            .flat_map(|g| [Word::letter(Letter::pos(g)), Word::letter(Letter::neg(g))])
            .collect();
        while let Some((g, d)) = queue.pop_front() {
            if d == radius {
                continue;
            }
            for x in &gens {
                let n = self.multiply(&g, x);
                if seen.insert(n.key.clone(), ()).is_none() {
                    if out.len() >= budget {
                        return Err(Error::Budget(budget));
                    }
                    out.push(n.clone());
                    queue.push_back((n, d + 1));
                }
            }
        }
        Ok(out)
    }

    // ---- parabolic subgroups ----

    pub fn parabolic(&self, spec: &SubgroupSpec) -> Result<Parabolic> {
        spec::resolve_parabolic(self, spec)
    }

    fn hnn_right_rep(h: &Hnn, s: &Subgroup, x: &Word) -> Word {
        let nf = h.normal_form(x);
        s.right_rep(&h.base, &nf.head).product(&nf.tail_word(h.stable))
    }

    /// Canonical key of the left coset `w·P`.
    pub fn left_coset_rep(&self, p: &Parabolic, w: &Word) -> Result<Word> {
        Ok(match (p, &self.kind) {
            (Parabolic::Whole, _) => Word::empty(),
            (Parabolic::Trivial, _) => self.canonical_form(w).key,
            (Parabolic::InBase(s), GroupKind::Base(b)) => s.left_rep(b, w),
            (Parabolic::InBase(s), GroupKind::Hnn(h)) => {
                Self::hnn_right_rep(h, s, &w.inverse()).inverse()
            }
            (Parabolic::Factor(f), GroupKind::Amalgam(a)) => {
                let x = a.embed_word(w);
                let t = Word::gen(a.hnn.stable);
                match f {
                    Factor::H => Self::hnn_right_rep(&a.hnn, &a.h_factor, &x.inverse()).inverse(),
                    Factor::K => {
                        let xt = x.product(&t);
                        Self::hnn_right_rep(&a.hnn, &a.k_factor, &xt.inverse())
                            .inverse()
                            .product(&t.inverse())
                    }
                }
            }
            _ => return Err(Error::Unsupported("parabolic subgroup does not fit this group".into())),
        })
    }

    pub fn parabolic_contains(&self, p: &Parabolic, w: &Word) -> Result<bool> {
        Ok(match (p, &self.kind) {
            (Parabolic::Whole, _) => true,
            (Parabolic::Trivial, _) => self.is_identity(w),
            (Parabolic::InBase(s), GroupKind::Base(b)) => s.contains(b, w),
            (Parabolic::InBase(s), GroupKind::Hnn(h)) => {
                let nf = h.normal_form(w);
                nf.tail.is_empty() && s.contains(&h.base, &nf.head)
            }
            _ => self.left_coset_rep(p, w)? == self.left_coset_rep(p, &Word::empty())?,
        })
    }

    /// Non-identity elements of `P` whose canonical length is at most
    /// `max_len`, as words over the group alphabet.
    pub fn parabolic_elements(&self, p: &Parabolic, max_len: usize, budget: usize) -> Result<Vec<Word>> {
        let mut out: Vec<Word> = match (p, &self.kind) {
            (Parabolic::Trivial, _) => Vec::new(),
            (Parabolic::Whole, _) => {
                self.ball(max_len, budget)?.into_iter().map(|e| e.word).collect()
            }
            (Parabolic::InBase(s), GroupKind::Base(b)) => {
                b.ball(max_len, budget)?.into_iter().filter(|w| s.contains(b, w)).collect()
            }
            (Parabolic::InBase(s), GroupKind::Hnn(h)) => {
                h.base.ball(max_len, budget)?.into_iter().filter(|w| s.contains(&h.base, w)).collect()
            }
            (Parabolic::Factor(f), GroupKind::Amalgam(a)) => {
                let (rank, shift) = match f {
                    Factor::H => (a.h_rank, 0u32),
                    Factor::K => (a.k_rank, a.h_rank as u32),
                };
                BaseGroup::free(rank)
                    .ball(max_len, budget)?
                    .into_iter()
                    .map(|w| Word::new(w.letters().iter().map(|l| Letter { gen: l.gen + shift, inv: l.inv })))
                    .collect()
            }
            _ => return Err(Error::Unsupported("parabolic subgroup does not fit this group".into())),
        };
        out.retain(|w| !w.is_empty());
        Ok(out)
    }

    /// Checks whether `x` contains every generator (a sufficient test for
    /// ordinary generation used by the coned-off construction).
    pub fn generated_by(&self, x: &[Word]) -> bool {
        (0..self.rank() as u32).all(|g| x.iter().any(|w| *w == Word::gen(g) || *w == Word::gen(g).inverse()))
    }
}

#[cfg(test)]
mod tests;
