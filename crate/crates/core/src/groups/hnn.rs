//! HNN extensions `⟨H, t | t⁻¹at = φ(a), a ∈ A⟩` over a base group with a
//! decidable word problem: Britton reduction and the right-to-left normal
//! form `h₀ t^ε₁ r₁ … t^εₙ rₙ`, where each `rᵢ` is the canonical
//! representative of a right coset of `B` (after `t`) or `A` (after `t⁻¹`).

use std::collections::VecDeque;

use super::base::{BaseGroup, Subgroup};
use crate::error::{Error, Result};
use crate::words::{Letter, Word};

/// Which way to apply the associating isomorphism.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `A → B`, i.e. `a ↦ t⁻¹ a t`.
    Forward,
    /// `B → A`.
    Backward,
}

#[derive(Clone, Debug)]
pub(crate) enum Iso {
    /// Image of each basis letter of the source subgroup graph.
    Folded { forward: Vec<Word>, backward: Vec<Word> },
    Identity,
    Lattice { a: Vec<usize>, b: Vec<usize> },
    Trivial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PinchSide {
    /// `t⁻¹ V t` with `V ∈ A`.
    A,
    /// `t U t⁻¹` with `U ∈ B`.
    B,
}

/// A pinch occupying letters `start..=end` of a word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pinch {
    pub start: usize,
    pub end: usize,
    pub side: PinchSide,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalForm {
    pub head: Word,
    /// `(t-letter is inverted, coset representative following it)`.
    pub tail: Vec<(bool, Word)>,
}

impl NormalForm {
    pub fn tail_word(&self, stable: u32) -> Word {
        let mut v: Vec<Letter> = Vec::new();
        for (inv, r) in &self.tail {
            v.push(Letter { gen: stable, inv: *inv });
            v.extend_from_slice(r.letters());
        }
        Word::new(v)
    }

    pub fn to_word(&self, stable: u32) -> Word {
        self.head.product(&self.tail_word(stable))
    }

    pub fn t_length(&self) -> usize {
        self.tail.len()
    }
}

#[derive(Clone, Debug)]
pub struct Hnn {
    pub base: BaseGroup,
    pub stable: u32,
    pub a: Subgroup,
    pub b: Subgroup,
    pub(crate) iso: Iso,
}

impl Hnn {
    pub fn is_stable(&self, l: Letter) -> bool {
        l.gen == self.stable
    }

    fn source(&self, dir: Direction) -> &Subgroup {
        match dir {
            Direction::Forward => &self.a,
            Direction::Backward => &self.b,
        }
    }

    /// Extends the isomorphism from the listed generators to the whole
    /// associated subgroup.
    pub fn phi_apply(&self, w: &Word, dir: Direction) -> Result<Word> {
        let src = self.source(dir);
        if !src.contains(&self.base, w) {
            return Err(Error::NotMember("phi applied outside its domain".into()));
        }
        Ok(match &self.iso {
            Iso::Folded { forward, backward } => {
                let Subgroup::Folded { graph, .. } = src else { unreachable!() };
                let images = if dir == Direction::Forward { forward } else { backward };
                let expr = graph.express_in_basis(w)?;
                expr.substitute(|l| {
                    let x = &images[l.gen as usize];
                    if l.inv {
                        x.inverse()
                    } else {
                        x.clone()
                    }
                })
            }
            Iso::Identity => self.base.normal_form(w),
            Iso::Trivial => Word::empty(),
            Iso::Lattice { a, b } => {
                let (from, to) = if dir == Direction::Forward { (a, b) } else { (b, a) };
                let e = self.base.exponents(w);
                let mut img = vec![0i64; self.base.rank()];
                for (p, &c) in from.iter().enumerate() {
                    img[to[p]] += e[c];
                }
                Word::new(img.iter().enumerate().flat_map(|(i, &k)| {
                    Word::gen_pow(i as u32, k).letters().to_vec()
                }))
            }
        })
    }

    /// Leftmost pinch between consecutive stable letters.
    pub fn pinch_find(&self, w: &Word) -> Option<Pinch> {
        let letters = w.letters();
        let ts: Vec<usize> = (0..letters.len()).filter(|&i| self.is_stable(letters[i])).collect();
        for p in ts.windows(2) {
            let (i, j) = (p[0], p[1]);
            let (li, lj) = (letters[i], letters[j]);
            if li.inv == lj.inv {
                continue;
            }
            let inner = Word::new(letters[i + 1..j].iter().copied());
            let side = if li.inv { PinchSide::A } else { PinchSide::B };
            let sub = if li.inv { &self.a } else { &self.b };
            if sub.contains(&self.base, &inner) {
                return Some(Pinch { start: i, end: j, side });
            }
        }
        None
    }

    /// Removes pinches leftmost-innermost first until none remain.
    pub fn britton_reduce(&self, w: &Word) -> Word {
        let mut cur = w.clone();
        while let Some(p) = self.pinch_find(&cur) {
            let letters = cur.letters();
            let inner = Word::new(letters[p.start + 1..p.end].iter().copied());
            let dir = match p.side {
                PinchSide::A => Direction::Forward,
                PinchSide::B => Direction::Backward,
            };
            let img = self.phi_apply(&inner, dir).expect("pinch interior lies in the subgroup");
            let mut v: Vec<Letter> = letters[..p.start].to_vec();
            v.extend_from_slice(img.letters());
            v.extend_from_slice(&letters[p.end + 1..]);
            cur = Word::new(v);
        }
        cur
    }

    pub fn is_identity(&self, w: &Word) -> bool {
        let r = self.britton_reduce(w);
        r.count_gen(self.stable) == 0 && self.base.is_identity(&r)
    }

    /// Normal form computed by pushing subgroup elements leftwards across
    /// stable letters, processing syllables from right to left.
    pub fn normal_form(&self, w: &Word) -> NormalForm {
        let letters = w.letters();
        let mut syllables: Vec<(Option<bool>, Vec<Letter>)> = vec![(None, Vec::new())];
        for &l in letters {
            if self.is_stable(l) {
                syllables.push((Some(l.inv), Vec::new()));
            } else {
                syllables.last_mut().unwrap().1.push(l);
            }
        }
        let last = syllables.pop().unwrap();
        let mut head = self.base.normal_form(&Word::new(last.1));
        let mut tail: VecDeque<(bool, Word)> = VecDeque::new();
        let mut t_inv = last.0;
        while let Some(inv) = t_inv {
            self.prepend_stable(inv, &mut head, &mut tail);
            let (next_t, h) = syllables.pop().unwrap();
            head = self.base.normal_form(&Word::new(h).product(&head));
            t_inv = next_t;
        }
        NormalForm { head, tail: tail.into() }
    }

    fn prepend_stable(&self, inv: bool, head: &mut Word, tail: &mut VecDeque<(bool, Word)>) {
        // t·b = φ⁻¹(b)·t and t⁻¹·a = φ(a)·t⁻¹
        let (sub, dir) = if inv { (&self.a, Direction::Forward) } else { (&self.b, Direction::Backward) };
        let rep = sub.right_rep(&self.base, head);
        let elem = self.base.normal_form(&head.product(&rep.inverse()));
        let img = self.phi_apply(&elem, dir).expect("coset decomposition lands in the subgroup");
        match tail.front() {
            Some((next_inv, next_rep)) if rep.is_empty() && *next_inv != inv => {
                let next_rep = next_rep.clone();
                tail.pop_front();
                *head = self.base.normal_form(&img.product(&next_rep));
            }
            _ => {
                tail.push_front((inv, rep));
                *head = img;
            }
        }
    }

    pub fn canonical_word(&self, w: &Word) -> Word {
        self.normal_form(w).to_word(self.stable)
    }
}
