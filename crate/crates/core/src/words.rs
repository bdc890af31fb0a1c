//! Free-group word algebra.
//!
//! A [`Word`] is always freely reduced. Letters are `(generator index, sign)`
//! pairs so that alphabets can carry arbitrary multi-character names; the
//! [`Alphabet`] owns the names and handles parsing and printing.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// A generator or its inverse.
///
/// The derived order is the shortlex letter order used everywhere in the
/// crate: generators in alphabet order, and `x < x^-1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Letter {
    pub gen: u32,
    pub inv: bool,
}

impl Letter {
    pub const fn pos(gen: u32) -> Self {
        Letter { gen, inv: false }
    }

    pub const fn neg(gen: u32) -> Self {
        Letter { gen, inv: true }
    }

    pub fn inverse(self) -> Self {
        Letter { gen: self.gen, inv: !self.inv }
    }

    /// +1 or -1.
    pub fn sign(self) -> i64 {
        if self.inv {
            -1
        } else {
            1
        }
    }
}

/// Freely reduced word in a free group.
#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct Word(Vec<Letter>);

/// Free reduction of a raw letter sequence.
pub fn free_reduce(raw: &[Letter]) -> Word {
    let mut out: Vec<Letter> = Vec::with_capacity(raw.len());
    for &l in raw {
        if out.last() == Some(&l.inverse()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    Word(out)
}

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(raw: impl IntoIterator<Item = Letter>) -> Self {
        let v: Vec<Letter> = raw.into_iter().collect();
        free_reduce(&v)
    }

    pub fn letter(l: Letter) -> Self {
        Word(vec![l])
    }

    pub fn gen(g: u32) -> Self {
        Word(vec![Letter::pos(g)])
    }

    /// `g^k` for a single generator.
    pub fn gen_pow(g: u32, k: i64) -> Self {
        let l = if k >= 0 { Letter::pos(g) } else { Letter::neg(g) };
        Word(vec![l; k.unsigned_abs() as usize])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn product(&self, other: &Word) -> Word {
        // Only the junction can cancel.
        let mut k = 0;
        let n = self.0.len();
        while k < n && k < other.0.len() && self.0[n - 1 - k] == other.0[k].inverse() {
            k += 1;
        }
        let mut v = Vec::with_capacity(n - k + other.0.len() - k);
        v.extend_from_slice(&self.0[..n - k]);
        v.extend_from_slice(&other.0[k..]);
        Word(v)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut acc = Word::empty();
        for _ in 0..k.unsigned_abs() {
            acc = acc.product(&base);
        }
        acc
    }

    /// Splits `self` as `conjugator · core · conjugator⁻¹` with `core`
    /// cyclically reduced.
    pub fn cyclic_reduce(&self) -> (Word, Word) {
        let n = self.0.len();
        let mut k = 0;
        while 2 * k + 1 < n && self.0[k] == self.0[n - 1 - k].inverse() {
            k += 1;
        }
        (Word(self.0[k..n - k].to_vec()), Word(self.0[..k].to_vec()))
    }

    /// Signed letter counts, indexed by generator.
    pub fn exponent_vector(&self, rank: usize) -> Vec<i64> {
        let mut v = vec![0i64; rank];
        for l in &self.0 {
            let g = l.gen as usize;
            if g >= v.len() {
                v.resize(g + 1, 0);
            }
            v[g] += l.sign();
        }
        v
    }

    /// Number of letters whose generator is `gen`.
    pub fn count_gen(&self, gen: u32) -> usize {
        self.0.iter().filter(|l| l.gen == gen).count()
    }

    pub fn max_gen(&self) -> Option<u32> {
        self.0.iter().map(|l| l.gen).max()
    }

    pub fn is_freely_reduced(letters: &[Letter]) -> bool {
        letters.windows(2).all(|w| w[0] != w[1].inverse())
    }

    /// Rewrites every letter through `f` and reduces.
    pub fn substitute(&self, mut f: impl FnMut(Letter) -> Word) -> Word {
        let mut acc = Word::empty();
        for &l in &self.0 {
            acc = acc.product(&f(l));
        }
        acc
    }
}

impl Ord for Word {
    /// Shortlex.
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Ordered list of distinct generator names.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() || n == "e" || n.contains(|c: char| c.is_whitespace() || c == '^') {
                return Err(Error::Alphabet(format!("invalid generator name {n:?}")));
            }
            if names[..i].contains(n) {
                return Err(Error::Alphabet(format!("duplicate generator name {n:?}")));
            }
        }
        Ok(Alphabet { names })
    }

    /// `a, b, c, ...` skipping `e` (empty word) and `t` (stable letter).
    pub fn standard(rank: usize) -> Self {
        let names = default_names(rank, 0);
        Alphabet { names }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index(&self, name: &str) -> Option<u32> {
        self.names.iter().position(|n| n == name).map(|i| i as u32)
    }

    pub fn name(&self, gen: u32) -> &str {
        &self.names[gen as usize]
    }

    pub fn concat(&self, other: &Alphabet) -> Result<Alphabet> {
        Alphabet::new(self.names.iter().chain(other.names.iter()).cloned())
    }

    pub fn with(&self, extra: &str) -> Result<Alphabet> {
        Alphabet::new(self.names.iter().cloned().chain(std::iter::once(extra.to_string())))
    }

    /// Parses `a b^-1 a^2` without reducing. `e` is the empty word.
    pub fn parse_raw(&self, s: &str) -> Result<Vec<Letter>> {
        let mut out = Vec::new();
        for tok in s.split_whitespace() {
            if tok == "e" || tok == "1" {
                continue;
            }
            let (name, exp) = match tok.split_once('^') {
                Some((n, e)) => {
                    let k: i64 = e
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad exponent in {tok:?}")))?;
                    (n, k)
                }
                None => (tok, 1),
            };
            let g = self
                .index(name)
                .ok_or_else(|| Error::Alphabet(format!("unknown generator {name:?}")))?;
            let l = if exp < 0 { Letter::neg(g) } else { Letter::pos(g) };
            out.extend(std::iter::repeat_n(l, exp.unsigned_abs() as usize));
        }
        Ok(out)
    }

    pub fn parse(&self, s: &str) -> Result<Word> {
        Ok(free_reduce(&self.parse_raw(s)?))
    }

    pub fn check(&self, w: &Word) -> Result<()> {
        match w.max_gen() {
            Some(g) if g as usize >= self.len() => {
                Err(Error::Alphabet(format!("generator index {g} outside alphabet")))
            }
            _ => Ok(()),
        }
    }

    pub fn format_letters(&self, letters: &[Letter]) -> String {
        if letters.is_empty() {
            return "e".to_string();
        }
        let mut parts: Vec<String> = Vec::new();
        let mut i = 0;
        while i < letters.len() {
            let l = letters[i];
            let mut j = i;
            while j < letters.len() && letters[j] == l {
                j += 1;
            }
            let k = (j - i) as i64 * l.sign();
            let name = self.names.get(l.gen as usize).map(String::as_str).unwrap_or("?");
            parts.push(if k == 1 { name.to_string() } else { format!("{name}^{k}") });
            i = j;
        }
        parts.join(" ")
    }

    pub fn format(&self, w: &Word) -> String {
        self.format_letters(w.letters())
    }

    pub fn display<'a>(&'a self, w: &'a Word) -> DisplayWord<'a> {
        DisplayWord { alphabet: self, word: w }
    }
}

pub struct DisplayWord<'a> {
    alphabet: &'a Alphabet,
    word: &'a Word,
}

impl fmt::Display for DisplayWord<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.alphabet.format(self.word))
    }
}

pub(crate) fn default_names(rank: usize, skip: usize) -> Vec<String> {
    let pool: Vec<char> = ('a'..='z').filter(|c| *c != 'e' && *c != 't').collect();
    (skip..skip + rank)
        .map(|i| {
            if i < pool.len() {
                pool[i].to_string()
            } else {
                format!("x{i}")
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::standard(3)
    }

    #[test]
    fn cancellation() {
        let a = ab();
        assert!(a.parse("a a^-1").unwrap().is_empty());
        assert_eq!(a.format(&a.parse("a b b^-1 a").unwrap()), "a^2");
    }

    #[test]
    fn product_and_inverse() {
        let a = ab();
        let u = a.parse("a b").unwrap();
        let v = a.parse("b^-1 c").unwrap();
        assert_eq!(a.format(&u.product(&v)), "a c");
        assert_eq!(u.product(&Word::empty()), u);
        assert_eq!(a.format(&u.inverse()), "b^-1 a^-1");
        assert!(Word::empty().inverse().is_empty());
    }

    #[test]
    fn cyclic_reduction() {
        let a = ab();
        let (core, conj) = a.parse("a b a^-1").unwrap().cyclic_reduce();
        assert_eq!(a.format(&core), "b");
        assert_eq!(a.format(&conj), "a");
        let w = a.parse("a b c").unwrap();
        assert_eq!(w.cyclic_reduce(), (w.clone(), Word::empty()));
        // a a^-1 never survives reduction, but a single letter is its own core
        let (core, conj) = a.parse("a").unwrap().cyclic_reduce();
        assert_eq!((core.len(), conj.len()), (1, 0));
    }

    #[test]
    fn exponents() {
        let a = ab();
        assert_eq!(a.parse("a b a^-1 b^-1").unwrap().exponent_vector(2), vec![0, 0]);
        assert_eq!(a.parse("a^2 b^-1").unwrap().exponent_vector(2), vec![2, -1]);
    }

    #[test]
    fn parse_errors_and_names() {
        let a = ab();
        assert!(matches!(a.parse("z"), Err(Error::Alphabet(_))));
        assert!(matches!(a.parse("a^x"), Err(Error::Parse(_))));
        assert!(Alphabet::new(["a", "a"]).is_err());
        let multi = Alphabet::new(["x1", "x2", "t"]).unwrap();
        let w = multi.parse("x1^3 t^-1 x2").unwrap();
        assert_eq!(multi.format(&w), "x1^3 t^-1 x2");
        assert_eq!(a.format(&Word::empty()), "e");
        assert!(a.parse("e").unwrap().is_empty());
    }

    #[test]
    fn shortlex_letter_order() {
        assert!(Letter::pos(0) < Letter::neg(0));
        assert!(Letter::neg(0) < Letter::pos(1));
        let a = ab();
        assert!(a.parse("b").unwrap() < a.parse("a a").unwrap());
        assert!(a.parse("a b").unwrap() < a.parse("a^-1 a^-1").unwrap());
    }
}
