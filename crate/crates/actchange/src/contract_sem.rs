//! Semantic contraction: minimal changes of models that falsify a law.
//!
//! Contracting a law from a set of models `𝓜` adds to `𝓜` one minimally
//! changed model of some member in which the law fails:
//!
//! * executability laws lose every `a`-arrow leaving one `phi`-world;
//! * effect laws gain one `a`-arrow into a relevant target world;
//! * static laws gain one world falsifying the law.

use std::collections::{BTreeMap, BTreeSet};

use crate::boolean::{self, Term, Valuation};
use crate::entail::{CompiledTheory, Entailer, NonModular};
use crate::error::{Error, Result};
use crate::kripke::{is_model_of_law, minimal_under, KripkeModel, Metric, ModelSet};
use crate::syntax::{Bool, EffectLaw, ExecLaw, Law, Signature, Theory};

/// The `a`-successors that a set of reference models assigns to each world.
///
/// `successors(w)` is the union of the `a`-successors of `w` over the
/// reference models containing `w`; `all()` is the union of every
/// `a`-successor in every reference model.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SuccessorReference {
    per_action: BTreeMap<String, (BTreeMap<Valuation, BTreeSet<Valuation>>, BTreeSet<Valuation>)>,
}

impl SuccessorReference {
    pub fn from_models<'a>(models: impl IntoIterator<Item = &'a KripkeModel>) -> SuccessorReference {
        let mut per_action: BTreeMap<String, (BTreeMap<Valuation, BTreeSet<Valuation>>, BTreeSet<Valuation>)> =
            BTreeMap::new();
        for m in models {
            for (a, arrows) in m.relations() {
                let entry = per_action.entry(a.clone()).or_default();
                for (x, y) in arrows {
                    entry.0.entry(*x).or_default().insert(*y);
                    entry.1.insert(*y);
                }
            }
        }
        SuccessorReference { per_action }
    }

    /// The reference given by all models of a theory. Every model's arrows
    /// are arrows of the largest model on the possible worlds, so that model
    /// alone carries the union of all successors.
    pub fn from_theory(theory: &Theory) -> Result<SuccessorReference> {
        let e = Entailer::new(theory, NonModular::Oracle)?;
        let ct: &CompiledTheory = e.compiled();
        let star = e.possible_worlds();
        let mut m = KripkeModel::default();
        for w in star.iter() {
            m.add_world(w);
        }
        for a in theory.signature().actions() {
            for w in star.iter() {
                for u in ct.allowed(a, w)?.intersect(star).iter() {
                    m.add_arrow(a, (w, u))?;
                }
            }
        }
        Ok(SuccessorReference::from_models([&m]))
    }

    /// Successors of `w` for `action` in the reference models.
    pub fn successors(&self, action: &str, w: Valuation) -> BTreeSet<Valuation> {
        self.per_action.get(action).and_then(|(m, _)| m.get(&w)).cloned().unwrap_or_default()
    }

    /// Every `action`-successor in the reference models.
    pub fn all(&self, action: &str) -> BTreeSet<Valuation> {
        self.per_action.get(action).map(|(_, s)| s.clone()).unwrap_or_default()
    }

    /// Successors used to judge which literals `action` preserves or
    /// produces at `w`: those of `w` itself, or every successor when `w` has
    /// none in any reference model.
    fn witness(&self, action: &str, w: Valuation) -> BTreeSet<Valuation> {
        let own = self.successors(action, w);
        if own.is_empty() {
            self.all(action)
        } else {
            own
        }
    }
}

/// Relevant target worlds of `w` for the effect law in model `m`.
///
/// A world `w'` of `m` qualifies when `w |= phi`, `w' |/= psi`, and:
///
/// * every literal `l` true in `w'` and false in `w` is forced, or holds in
///   every reference successor of `w` (the effect `[a] l` is preserved);
/// * every literal `l` shared by `w` and `w'` is forced, or holds in some
///   reference successor of `w` (so `[a] ~l` did not hold).
///
/// A literal is forced when some `v` in `base(~psi, W)` with `v ⊆ w'`
/// satisfies it modulo `W`.
pub fn relevant_target_worlds(
    w: Valuation,
    law: &EffectLaw,
    m: &KripkeModel,
    reference: &SuccessorReference,
    sig: &Signature,
) -> Result<BTreeSet<Valuation>> {
    if !m.has_world(w) {
        return Err(Error::Argument(format!("{} is not a world of the model", w.display(sig))));
    }
    let n = sig.num_atoms();
    let worlds = m.world_set(n);
    if !boolean::eval(&law.pre, w, sig)? {
        return Ok(BTreeSet::new());
    }
    let post = boolean::table(&law.post, sig)?;
    let neg_post = post.complement();
    let base = boolean::prime_subvaluations_of_set(&neg_post, &worlds);
    let witness = reference.witness(&law.action, w);

    let entails_lit = |v: Term, i: usize, positive: bool| -> bool {
        worlds.iter().filter(|x| v.satisfied_by(*x)).all(|x| x.get(i) == positive)
    };
    let mut out = BTreeSet::new();
    for target in worlds.iter().filter(|x| !post.contains(*x)) {
        let inside: Vec<Term> = base.iter().copied().filter(|v| v.satisfied_by(target)).collect();
        let forced = |i: usize, positive: bool| inside.iter().any(|v| entails_lit(*v, i, positive));
        let ok = (0..n).all(|i| {
            let positive = target.get(i);
            if forced(i, positive) {
                return true;
            }
            if w.get(i) != positive {
                witness.iter().all(|u| u.get(i) == positive)
            } else {
                witness.iter().any(|u| u.get(i) == positive)
            }
        });
        if ok {
            out.insert(target);
        }
    }
    Ok(out)
}

/// Contraction of an executability law from one model.
pub fn contract_exec_model(m: &KripkeModel, law: &ExecLaw, metric: Metric, sig: &Signature) -> Result<ModelSet> {
    if !is_model_of_law(m, &Law::Exec(law.clone()), sig)? {
        return Ok([m.clone()].into_iter().collect());
    }
    let pre = boolean::table(&law.pre, sig)?;
    let mut candidates = ModelSet::new();
    for w in m.worlds().iter().filter(|w| pre.contains(**w)) {
        let mut c = m.clone();
        c.remove_arrows_from(&law.action, *w);
        candidates.insert(c);
    }
    Ok(minimal_under(m, &candidates, metric))
}

/// Contraction of an effect law from one model, with relevant targets
/// judged against `reference`.
pub fn contract_effect_model(
    m: &KripkeModel,
    reference: &SuccessorReference,
    law: &EffectLaw,
    metric: Metric,
    sig: &Signature,
) -> Result<ModelSet> {
    if !is_model_of_law(m, &Law::Effect(law.clone()), sig)? {
        return Ok([m.clone()].into_iter().collect());
    }
    let pre = boolean::table(&law.pre, sig)?;
    let mut candidates = ModelSet::new();
    for w in m.worlds().iter().copied().filter(|w| pre.contains(*w)) {
        for t in relevant_target_worlds(w, law, m, reference, sig)? {
            if !m.has_arrow(&law.action, (w, t)) {
                let mut c = m.clone();
                c.add_arrow(&law.action, (w, t))?;
                candidates.insert(c);
            }
        }
    }
    Ok(minimal_under(m, &candidates, metric))
}

/// Contraction of a static law from one model.
pub fn contract_static_model(m: &KripkeModel, phi: &Bool, metric: Metric, sig: &Signature) -> Result<ModelSet> {
    let table = boolean::table(phi, sig)?;
    if m.worlds().iter().any(|w| !table.contains(*w)) {
        return Ok([m.clone()].into_iter().collect());
    }
    let mut candidates = ModelSet::new();
    for v in table.complement().iter() {
        let mut c = m.clone();
        c.add_world(v);
        candidates.insert(c);
    }
    Ok(minimal_under(m, &candidates, metric))
}

/// Contraction of a law from one model; effect laws use `reference`.
pub fn contract_model(
    m: &KripkeModel,
    reference: &SuccessorReference,
    law: &Law,
    metric: Metric,
    sig: &Signature,
) -> Result<ModelSet> {
    sig.check_law(law)?;
    match law {
        Law::Static(phi) => contract_static_model(m, phi, metric, sig),
        Law::Effect(e) => contract_effect_model(m, reference, e, metric, sig),
        Law::Exec(x) => contract_exec_model(m, x, metric, sig),
    }
}

/// Set-level contraction: every `𝓜 ∪ {M'}` with `M'` a minimal
/// contraction of some `M ∈ 𝓜`. Empty when no member can be contracted.
pub fn contract_model_set(
    mset: &ModelSet,
    law: &Law,
    metric: Metric,
    sig: &Signature,
) -> Result<BTreeSet<ModelSet>> {
    let reference = SuccessorReference::from_models(mset);
    let mut out = BTreeSet::new();
    for m in mset {
        for c in contract_model(m, &reference, law, metric, sig)? {
            let mut s = mset.clone();
            s.insert(c);
            out.insert(s);
        }
    }
    Ok(out)
}
