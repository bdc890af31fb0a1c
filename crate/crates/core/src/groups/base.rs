//! Base groups with a solvable-by-construction word problem (free, free
//! abelian, and direct products of these) and the subgroup types an HNN
//! extension can be amalgamated along.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::stallings::{fold, SubgroupGraph};
use crate::words::{Letter, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorKind {
    Free,
    Abelian,
}

/// A direct product of free and free abelian factors. Generators are
/// numbered consecutively across factors; letters of different factors
/// commute.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseGroup {
    factors: Vec<(FactorKind, usize)>,
    owner: Vec<usize>,
}

impl BaseGroup {
    pub fn new(factors: Vec<(FactorKind, usize)>) -> Self {
        let owner = factors
            .iter()
            .enumerate()
            .flat_map(|(i, &(_, r))| std::iter::repeat_n(i, r))
            .collect();
        BaseGroup { factors, owner }
    }

    pub fn free(rank: usize) -> Self {
        BaseGroup::new(vec![(FactorKind::Free, rank)])
    }

    pub fn free_abelian(rank: usize) -> Self {
        BaseGroup::new(vec![(FactorKind::Abelian, rank)])
    }

    pub fn rank(&self) -> usize {
        self.owner.len()
    }

    pub fn factors(&self) -> &[(FactorKind, usize)] {
        &self.factors
    }

    /// True when the group is a single free factor (or trivial).
    pub fn is_free(&self) -> bool {
        self.factors.iter().all(|(k, r)| *k == FactorKind::Free || *r == 0) && self.factors.len() <= 1
    }

    pub fn is_free_abelian(&self) -> bool {
        self.factors.len() == 1 && self.factors[0].0 == FactorKind::Abelian
    }

    /// Canonical normal form: factor by factor, free factors freely
    /// reduced, abelian factors as `a^p b^q ...`.
    pub fn normal_form(&self, w: &Word) -> Word {
        if self.factors.len() == 1 && self.factors[0].0 == FactorKind::Free {
            return w.clone();
        }
        let mut out: Vec<Letter> = Vec::with_capacity(w.len());
        let mut offset = 0u32;
        for (fi, &(kind, r)) in self.factors.iter().enumerate() {
            let part = w.letters().iter().filter(|l| self.owner.get(l.gen as usize) == Some(&fi));
            match kind {
                FactorKind::Free => out.extend(Word::new(part.copied()).letters()),
                FactorKind::Abelian => {
                    let mut e = vec![0i64; r];
                    for l in part {
                        e[(l.gen - offset) as usize] += l.sign();
                    }
                    for (i, k) in e.iter().enumerate() {
                        out.extend(Word::gen_pow(offset + i as u32, *k).letters());
                    }
                }
            }
            offset += r as u32;
        }
        Word::new(out)
    }

    pub fn is_identity(&self, w: &Word) -> bool {
        self.normal_form(w).is_empty()
    }

    pub fn multiply(&self, u: &Word, v: &Word) -> Word {
        self.normal_form(&u.product(v))
    }

    /// Exponent vector, meaningful for free abelian factors.
    pub fn exponents(&self, w: &Word) -> Vec<i64> {
        w.exponent_vector(self.rank())
    }

    /// Elements of word length at most `radius`, in BFS discovery order.
    pub fn ball(&self, radius: usize, budget: usize) -> Result<Vec<Word>> {
        let mut seen = std::collections::HashSet::new();
        let mut order = vec![Word::empty()];
        seen.insert(Word::empty());
        let mut frontier = vec![Word::empty()];
        for _ in 0..radius {
            let mut next = Vec::new();
            for w in &frontier {
                for g in 0..self.rank() as u32 {
                    for l in [Letter::pos(g), Letter::neg(g)] {
                        let x = self.normal_form(&w.product(&Word::letter(l)));
                        if seen.insert(x.clone()) {
                            if order.len() >= budget {
                                return Err(Error::Budget(budget));
                            }
                            order.push(x.clone());
                            next.push(x);
                        }
                    }
                }
            }
            frontier = next;
        }
        Ok(order)
    }
}

/// Subgroup of a [`BaseGroup`].
#[derive(Clone, Debug)]
pub enum Subgroup {
    /// Finitely generated subgroup of a free base, held as a folded graph.
    Folded { generators: Vec<Word>, graph: Arc<SubgroupGraph> },
    /// The commutator subgroup of a free base.
    Commutator,
    /// Coordinate sublattice of a free abelian base.
    Lattice(Vec<usize>),
    Trivial,
    Whole,
}

impl Subgroup {
    pub fn folded(generators: Vec<Word>, base: &BaseGroup) -> Result<Self> {
        if !base.is_free() {
            return Err(Error::Unsupported("folded subgroups need a free base group".into()));
        }
        let graph = Arc::new(fold(&generators, base.rank()));
        Ok(Subgroup::Folded { generators, graph })
    }

    pub fn validate(&self, base: &BaseGroup) -> Result<()> {
        match self {
            Subgroup::Folded { .. } | Subgroup::Commutator if !base.is_free() => Err(
                Error::Unsupported("folded and commutator subgroups need a free base".into()),
            ),
            Subgroup::Lattice(c) => {
                if !base.is_free_abelian() {
                    return Err(Error::Unsupported("lattice subgroups need a free abelian base".into()));
                }
                if c.iter().any(|&i| i >= base.rank()) {
                    return Err(Error::InvalidSpec("lattice coordinate out of range".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn contains(&self, base: &BaseGroup, w: &Word) -> bool {
        match self {
            Subgroup::Folded { graph, .. } => graph.member(w),
            Subgroup::Commutator => base.exponents(w).iter().all(|&e| e == 0),
            Subgroup::Lattice(coords) => base
                .exponents(w)
                .iter()
                .enumerate()
                .all(|(i, &e)| e == 0 || coords.contains(&i)),
            Subgroup::Trivial => base.is_identity(w),
            Subgroup::Whole => true,
        }
    }

    /// Canonical representative of the right coset `S·w`, as a base normal
    /// form. The identity coset is represented by the empty word.
    pub fn right_rep(&self, base: &BaseGroup, w: &Word) -> Word {
        match self {
            Subgroup::Folded { graph, .. } => graph.schreier_rep(w),
            Subgroup::Commutator => {
                let e = base.exponents(w);
                Word::new(e.iter().enumerate().flat_map(|(i, &k)| {
                    Word::gen_pow(i as u32, k).letters().to_vec()
                }))
            }
            Subgroup::Lattice(coords) => {
                let e = base.exponents(w);
                Word::new(e.iter().enumerate().flat_map(|(i, &k)| {
                    let k = if coords.contains(&i) { 0 } else { k };
                    Word::gen_pow(i as u32, k).letters().to_vec()
                }))
            }
            Subgroup::Trivial => base.normal_form(w),
            Subgroup::Whole => Word::empty(),
        }
    }

    /// Canonical representative of the left coset `w·S`.
    pub fn left_rep(&self, base: &BaseGroup, w: &Word) -> Word {
        self.right_rep(base, &w.inverse()).inverse()
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Subgroup::Folded { .. } => "folded",
            Subgroup::Commutator => "commutator",
            Subgroup::Lattice(_) => "lattice",
            Subgroup::Trivial => "trivial",
            Subgroup::Whole => "whole",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::Alphabet;

    #[test]
    fn abelian_normal_form() {
        let g = BaseGroup::free_abelian(2);
        let a = Alphabet::standard(2);
        assert!(g.is_identity(&a.parse("a b a^-1 b^-1").unwrap()));
        assert!(!BaseGroup::free(2).is_identity(&a.parse("a b a^-1 b^-1").unwrap()));
        assert_eq!(a.format(&g.normal_form(&a.parse("b a b a^-2").unwrap())), "a^-1 b^2");
    }

    #[test]
    fn product_normal_form() {
        let g = BaseGroup::new(vec![(FactorKind::Free, 2), (FactorKind::Abelian, 1)]);
        let a = Alphabet::standard(3);
        let w = a.parse("c a c b c^-3").unwrap();
        assert_eq!(a.format(&g.normal_form(&w)), "a b c^-1");
    }

    #[test]
    fn coset_reps() {
        let g = BaseGroup::free(2);
        let a = Alphabet::standard(2);
        let w = a.parse("a b a^-1 b^-1 a^3").unwrap();
        assert_eq!(a.format(&Subgroup::Commutator.right_rep(&g, &w)), "a^3");
        let z2 = BaseGroup::free_abelian(2);
        let l = Subgroup::Lattice(vec![0]);
        assert_eq!(a.format(&l.right_rep(&z2, &a.parse("a^4 b^-2").unwrap())), "b^-2");
        assert!(l.contains(&z2, &a.parse("a^7").unwrap()));
    }

    #[test]
    fn ball_sizes() {
        assert_eq!(BaseGroup::free(2).ball(2, 100).unwrap().len(), 17);
        assert_eq!(BaseGroup::free_abelian(2).ball(3, 100).unwrap().len(), 25);
        assert!(matches!(BaseGroup::free(2).ball(3, 10), Err(Error::Budget(10))));
    }
}
