//! Classical propositional engine over a fixed, ordered atom universe.
//!
//! A [`Valuation`] is a bit pattern where bit `i` is the truth value of the
//! signature's `i`-th atom. Formulas are compiled to truth tables
//! ([`ValSet`]) by bitwise operations, so every query below is exact.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::syntax::{Atom, Bool, Literal, Signature, DEFAULT_ATOM_CAP};

/// A total assignment: bit `i` holds the value of atom `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Valuation(pub u32);

impl Valuation {
    pub fn get(self, atom: usize) -> bool {
        self.0 >> atom & 1 == 1
    }

    /// The valuation with the value of `atom` flipped.
    pub fn flip(self, atom: usize) -> Valuation {
        Valuation(self.0 ^ (1 << atom))
    }

    /// Builds a valuation from literals; atoms not mentioned are false.
    pub fn from_literals(lits: &[Literal], sig: &Signature) -> Result<Valuation> {
        let mut v = 0u32;
        let mut seen = 0u32;
        for l in lits {
            let i = sig
                .atom_index(&l.atom)
                .ok_or_else(|| Error::Argument(format!("unknown atom `{}`", l.atom)))?;
            if seen >> i & 1 == 1 {
                return Err(Error::Argument(format!("atom `{}` assigned twice", l.atom)));
            }
            seen |= 1 << i;
            if l.positive {
                v |= 1 << i;
            }
        }
        Ok(Valuation(v))
    }

    /// Parses a comma-separated literal list such as `t,~c,h`. Every atom of
    /// the signature must be assigned.
    pub fn parse(text: &str, sig: &Signature) -> Result<Valuation> {
        let mut lits = Vec::new();
        for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (positive, name) = match part.strip_prefix('~').or_else(|| part.strip_prefix('!')) {
                Some(rest) => (false, rest.trim()),
                None => (true, part),
            };
            lits.push(Literal::new(name, positive));
        }
        if lits.len() != sig.num_atoms() {
            return Err(Error::Argument(format!(
                "valuation `{text}` must assign all {} atoms",
                sig.num_atoms()
            )));
        }
        Valuation::from_literals(&lits, sig)
    }

    /// The literals of this valuation in atom order.
    pub fn literals(self, sig: &Signature) -> Vec<Literal> {
        sig.atoms().iter().enumerate().map(|(i, a)| Literal::new(a.clone(), self.get(i))).collect()
    }

    /// The full term (conjunction of all literals) of this valuation.
    pub fn term(self, sig: &Signature) -> Term {
        Term::full(self, sig.num_atoms())
    }

    /// Compact text form, e.g. `t,~c,h`.
    pub fn display(self, sig: &Signature) -> String {
        self.literals(sig).iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",")
    }
}

/// A set of valuations over `n` atoms, stored as a bitset of size `2^n`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ValSet {
    n: usize,
    words: Vec<u64>,
}

impl fmt::Debug for ValSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|v| v.0)).finish()
    }
}

impl ValSet {
    fn word_count(n: usize) -> usize {
        ((1usize << n) + 63) / 64
    }

    pub fn empty(n: usize) -> ValSet {
        ValSet { n, words: vec![0; Self::word_count(n)] }
    }

    pub fn full(n: usize) -> ValSet {
        let mut s = ValSet { n, words: vec![!0; Self::word_count(n)] };
        s.trim();
        s
    }

    fn trim(&mut self) {
        let size = 1usize << self.n;
        if size < 64 {
            self.words[0] &= (1u64 << size) - 1;
        }
    }

    pub fn from_iter(n: usize, vals: impl IntoIterator<Item = Valuation>) -> ValSet {
        let mut s = ValSet::empty(n);
        for v in vals {
            s.insert(v);
        }
        s
    }

    /// The valuations where atom `i` is true.
    pub fn atom(n: usize, i: usize) -> ValSet {
        let mut s = ValSet::empty(n);
        for v in 0..(1u32 << n) {
            if v >> i & 1 == 1 {
                s.insert(Valuation(v));
            }
        }
        s
    }

    pub fn num_atoms(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, v: Valuation) {
        let i = v.0 as usize;
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, v: Valuation) {
        let i = v.0 as usize;
        self.words[i / 64] &= !(1 << (i % 64));
    }

    pub fn contains(&self, v: Valuation) -> bool {
        let i = v.0 as usize;
        i < (1usize << self.n) && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn is_full(&self) -> bool {
        *self == ValSet::full(self.n)
    }

    /// Valuations in ascending bit-pattern order.
    pub fn iter(&self) -> impl Iterator<Item = Valuation> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros();
                w &= w - 1;
                Some(Valuation((wi * 64) as u32 + b))
            })
        })
    }

    pub fn union(&self, other: &ValSet) -> ValSet {
        self.zip(other, |a, b| a | b)
    }

    pub fn intersect(&self, other: &ValSet) -> ValSet {
        self.zip(other, |a, b| a & b)
    }

    pub fn minus(&self, other: &ValSet) -> ValSet {
        self.zip(other, |a, b| a & !b)
    }

    pub fn complement(&self) -> ValSet {
        let mut s = ValSet { n: self.n, words: self.words.iter().map(|w| !w).collect() };
        s.trim();
        s
    }

    pub fn is_subset(&self, other: &ValSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &ValSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    fn zip(&self, other: &ValSet, f: impl Fn(u64, u64) -> u64) -> ValSet {
        assert_eq!(self.n, other.n, "valuation sets over different universes");
        ValSet { n: self.n, words: self.words.iter().zip(&other.words).map(|(a, b)| f(*a, *b)).collect() }
    }

    /// Universally quantifies atom `i` away: keeps `v` iff both `v` and
    /// `v` with atom `i` flipped are members.
    pub fn forall(&self, i: usize) -> ValSet {
        ValSet::from_iter(self.n, self.iter().filter(|v| self.contains(v.flip(i))))
    }

    pub fn to_btree(&self) -> BTreeSet<Valuation> {
        self.iter().collect()
    }
}

/// A consistent conjunction of literals, equivalently a partial valuation
/// (subvaluation): atom `i` is assigned iff bit `i` of `mask` is set, and its
/// value is bit `i` of `bits`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    pub mask: u32,
    pub bits: u32,
}

/// Partial valuations are represented exactly like terms.
pub type Subvaluation = Term;

impl Term {
    /// The empty term, equivalent to `true`.
    pub const EMPTY: Term = Term { mask: 0, bits: 0 };

    pub fn new(mask: u32, bits: u32) -> Term {
        Term { mask, bits: bits & mask }
    }

    /// The term assigning every one of `n` atoms as `v` does.
    pub fn full(v: Valuation, n: usize) -> Term {
        let mask = if n == 32 { !0 } else { (1u32 << n) - 1 };
        Term::new(mask, v.0)
    }

    /// Builds a term from literals, failing on unknown atoms or clashes.
    pub fn from_literals(lits: &[Literal], sig: &Signature) -> Result<Term> {
        let mut t = Term::EMPTY;
        for l in lits {
            let i = sig
                .atom_index(&l.atom)
                .ok_or_else(|| Error::Argument(format!("unknown atom `{}`", l.atom)))?;
            let bit = 1u32 << i;
            let val = if l.positive { bit } else { 0 };
            if t.mask & bit != 0 && t.bits & bit != val {
                return Err(Error::Argument(format!("inconsistent term on atom `{}`", l.atom)));
            }
            t.mask |= bit;
            t.bits |= val;
        }
        Ok(t)
    }

    pub fn len(self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.mask == 0
    }

    /// Whether the valuation satisfies every literal of the term.
    pub fn satisfied_by(self, v: Valuation) -> bool {
        v.0 & self.mask == self.bits
    }

    /// Whether `self` is a sub-map of `other` (every literal of `self` is in `other`).
    pub fn is_subterm_of(self, other: Term) -> bool {
        self.mask & !other.mask == 0 && other.bits & self.mask == self.bits
    }

    /// Whether the term contains the literal on atom `i` with the given polarity.
    pub fn has_literal(self, i: usize, positive: bool) -> bool {
        self.mask >> i & 1 == 1 && (self.bits >> i & 1 == 1) == positive
    }

    /// Literals of the term in atom order.
    pub fn literals(self, sig: &Signature) -> Vec<Literal> {
        sig.atoms()
            .iter()
            .enumerate()
            .filter(|(i, _)| self.mask >> i & 1 == 1)
            .map(|(i, a)| Literal::new(a.clone(), self.bits >> i & 1 == 1))
            .collect()
    }

    /// The conjunction of the literals in atom order; `true` when empty.
    pub fn to_bool(self, sig: &Signature) -> Bool {
        Bool::conj(self.literals(sig).iter().map(Literal::to_bool))
    }

    /// The set of valuations over `n` atoms satisfying the term.
    pub fn valuations(self, n: usize) -> ValSet {
        ValSet::from_iter(n, (0..(1u32 << n)).map(Valuation).filter(|v| self.satisfied_by(*v)))
    }
}

/// Fails if the signature exceeds the atom cap.
pub fn check_cap(sig: &Signature) -> Result<()> {
    check_cap_with(sig, DEFAULT_ATOM_CAP)
}

/// Fails if the signature has more than `cap` atoms.
pub fn check_cap_with(sig: &Signature, cap: usize) -> Result<()> {
    if sig.num_atoms() > cap.min(DEFAULT_ATOM_CAP) {
        return Err(Error::Resource(format!(
            "{} atoms exceed the cap of {}",
            sig.num_atoms(),
            cap.min(DEFAULT_ATOM_CAP)
        )));
    }
    Ok(())
}

/// Compiles a formula to its truth table over the signature's atoms.
pub fn table(phi: &Bool, sig: &Signature) -> Result<ValSet> {
    check_cap(sig)?;
    compile(phi, sig)
}

fn compile(phi: &Bool, sig: &Signature) -> Result<ValSet> {
    let n = sig.num_atoms();
    Ok(match phi {
        Bool::True => ValSet::full(n),
        Bool::False => ValSet::empty(n),
        Bool::Atom(a) => {
            let i = sig.atom_index(a).ok_or_else(|| Error::Argument(format!("unknown atom `{a}`")))?;
            ValSet::atom(n, i)
        }
        Bool::Not(a) => compile(a, sig)?.complement(),
        Bool::And(a, b) => compile(a, sig)?.intersect(&compile(b, sig)?),
        Bool::Or(a, b) => compile(a, sig)?.union(&compile(b, sig)?),
        Bool::Implies(a, b) => compile(a, sig)?.complement().union(&compile(b, sig)?),
        Bool::Iff(a, b) => {
            let (x, y) = (compile(a, sig)?, compile(b, sig)?);
            x.intersect(&y).union(&x.complement().intersect(&y.complement()))
        }
    })
}

/// Whether the valuation satisfies the formula.
pub fn eval(phi: &Bool, v: Valuation, sig: &Signature) -> Result<bool> {
    fn go(phi: &Bool, v: Valuation, sig: &Signature) -> Result<bool> {
        Ok(match phi {
            Bool::True => true,
            Bool::False => false,
            Bool::Atom(a) => {
                v.get(sig.atom_index(a).ok_or_else(|| Error::Argument(format!("unknown atom `{a}`")))?)
            }
            Bool::Not(a) => !go(a, v, sig)?,
            Bool::And(a, b) => go(a, v, sig)? && go(b, v, sig)?,
            Bool::Or(a, b) => go(a, v, sig)? || go(b, v, sig)?,
            Bool::Implies(a, b) => !go(a, v, sig)? || go(b, v, sig)?,
            Bool::Iff(a, b) => go(a, v, sig)? == go(b, v, sig)?,
        })
    }
    go(phi, v, sig)
}

/// `val(phi)`: every valuation over the signature satisfying `phi`.
pub fn valuations_of(phi: &Bool, sig: &Signature) -> Result<BTreeSet<Valuation>> {
    Ok(table(phi, sig)?.to_btree())
}

/// `Gamma |- phi` in classical propositional logic.
pub fn cpl_entails(gamma: &[Bool], phi: &Bool, sig: &Signature) -> Result<bool> {
    let mut models = ValSet::full(sig.num_atoms());
    check_cap(sig)?;
    for g in gamma {
        models = models.intersect(&compile(g, sig)?);
    }
    Ok(models.is_subset(&compile(phi, sig)?))
}

/// Whether the formula is satisfiable.
pub fn is_satisfiable(phi: &Bool, sig: &Signature) -> Result<bool> {
    Ok(!table(phi, sig)?.is_empty())
}

/// Whether the formula is a tautology.
pub fn is_tautology(phi: &Bool, sig: &Signature) -> Result<bool> {
    Ok(table(phi, sig)?.is_full())
}

/// Whether two formulas are classically equivalent.
pub fn equivalent(a: &Bool, b: &Bool, sig: &Signature) -> Result<bool> {
    Ok(table(a, sig)? == table(b, sig)?)
}

/// Prime implicants of the Boolean function given by its truth table,
/// obtained by iterated merging of adjacent cubes.
pub fn prime_implicants_of_set(set: &ValSet) -> BTreeSet<Term> {
    use std::collections::HashSet;
    let n = set.num_atoms();
    let full_mask = if n == 0 { 0 } else { (1u32 << n) - 1 };
    let mut level: HashSet<Term> = set.iter().map(|v| Term::new(full_mask, v.0)).collect();
    let mut primes = BTreeSet::new();
    while !level.is_empty() {
        let mut next = HashSet::new();
        let mut merged = HashSet::new();
        for &c in &level {
            let mut m = c.mask;
            while m != 0 {
                let bit = m & m.wrapping_neg();
                m &= m - 1;
                let partner = Term::new(c.mask, c.bits ^ bit);
                if level.contains(&partner) {
                    merged.insert(c);
                    next.insert(Term::new(c.mask & !bit, c.bits));
                }
            }
        }
        primes.extend(level.iter().copied().filter(|c| !merged.contains(c)));
        level = next;
    }
    primes
}

/// `IP(phi)`: the prime implicants of `phi`. Empty when `phi` is
/// unsatisfiable; the single empty term when `phi` is a tautology.
pub fn prime_implicants(phi: &Bool, sig: &Signature) -> Result<BTreeSet<Term>> {
    Ok(prime_implicants_of_set(&table(phi, sig)?))
}

/// Bitmask of atoms the function depends on.
pub fn essential_mask(set: &ValSet) -> u32 {
    let mut mask = 0;
    for i in 0..set.num_atoms() {
        if set.iter().any(|v| !set.contains(v.flip(i))) {
            mask |= 1 << i;
        }
    }
    mask
}

/// Atoms the formula essentially depends on. An atom is inessential iff the
/// two cofactors of the formula on it are equivalent.
pub fn essential_atoms(phi: &Bool, sig: &Signature) -> Result<BTreeSet<Atom>> {
    let mask = essential_mask(&table(phi, sig)?);
    Ok(sig.atoms().iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, a)| a.clone()).collect())
}

/// A formula over exactly the essential atoms with the given truth table:
/// `false`, `true`, or the disjunction of the prime implicants.
pub fn least_formula_of_set(set: &ValSet, sig: &Signature) -> Bool {
    if set.is_empty() {
        return Bool::False;
    }
    if set.is_full() {
        return Bool::True;
    }
    Bool::disj(prime_implicants_of_set(set).into_iter().map(|t| t.to_bool(sig)))
}

/// An equivalent of `phi` that mentions only its essential atoms.
pub fn least_equivalent(phi: &Bool, sig: &Signature) -> Result<Bool> {
    Ok(least_formula_of_set(&table(phi, sig)?, sig))
}

/// `base(phi, W)` for a formula given as a truth table.
///
/// A subvaluation `v` over the essential atoms of `phi` satisfies `phi`
/// modulo `W` iff every world of `W` extending `v` satisfies `phi`. Those
/// subvaluations are exactly the implicants of `phi | ~W` with the
/// inessential atoms universally quantified away, so the minimal ones are
/// the prime implicants of that projection.
pub fn prime_subvaluations_of_set(phi: &ValSet, w: &ValSet) -> BTreeSet<Term> {
    let ess = essential_mask(phi);
    let mut g = phi.union(&w.complement());
    for i in 0..phi.num_atoms() {
        if ess >> i & 1 == 0 {
            g = g.forall(i);
        }
    }
    prime_implicants_of_set(&g)
}

/// `base(phi, W)`: the prime subvaluations of `phi` modulo the world set `W`.
pub fn prime_subvaluations(phi: &Bool, w: &ValSet, sig: &Signature) -> Result<BTreeSet<Term>> {
    Ok(prime_subvaluations_of_set(&table(phi, sig)?, w))
}
