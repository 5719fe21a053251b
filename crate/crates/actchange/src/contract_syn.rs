//! Syntactic contraction of laws from action theories.
//!
//! Executability laws are weakened outside one context, effect laws are
//! weakened inside one context and static laws are contracted classically,
//! with the action laws specialised to the worlds still allowed. A context
//! is a full valuation `pi & phi_A` extending a prime implicant `pi` of
//! `S & phi` that is consistent with `S`.
//!
//! Emitted laws keep the literal shapes of the construction (no
//! simplification). Results are sorted by their rendering.

use std::collections::BTreeSet;

use crate::boolean::{self, Term, ValSet, Valuation};
use crate::entail::{statics_and_effects_entail, Entailer, NonModular};
use crate::error::{Error, Result};
use crate::syntax::{render_theory, Bool, EffectLaw, ExecLaw, Law, Literal, Signature, Theory};

/// The theories produced by one contraction, sorted by rendering.
pub type TheoryFamily = Vec<Theory>;

/// Largest number of effect laws for one action examined by
/// [`minimum_effect_supports`].
pub const MAX_SUPPORT_LAWS: usize = 20;

/// Sorts and deduplicates a collection of theories by rendering.
pub fn family(theories: impl IntoIterator<Item = Theory>) -> TheoryFamily {
    let mut keyed: Vec<(String, Theory)> = theories.into_iter().map(|t| (render_theory(&t), t)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.dedup_by(|a, b| a.0 == b.0);
    keyed.into_iter().map(|(_, t)| t).collect()
}

/// The contexts of `phi`: every full valuation `pi & phi_A` with
/// `pi ∈ IP(S & phi)` and `A` a subset of the atoms outside `pi`, kept when
/// it satisfies `S`. Returned in valuation order without duplicates.
pub fn contexts(theory: &Theory, phi: &Bool) -> Result<Vec<Valuation>> {
    let sig = theory.signature();
    boolean::check_cap(sig)?;
    let n = sig.num_atoms();
    let statics = boolean::table(&theory.static_conjunction(), sig)?;
    let target = statics.intersect(&boolean::table(phi, sig)?);
    let mut out = BTreeSet::new();
    for pi in boolean::prime_implicants_of_set(&target) {
        for v in pi.valuations(n).iter() {
            if statics.contains(v) {
                out.insert(v);
            }
        }
    }
    Ok(out.into_iter().collect())
}

fn context_bool(ctx: Valuation, sig: &Signature) -> Bool {
    ctx.term(sig).to_bool(sig)
}

fn entailer_for(theory: &Theory, policy: NonModular) -> Result<Entailer> {
    let e = Entailer::new(theory, policy)?;
    if !e.is_modular() && policy == NonModular::Reject {
        let r = e.report();
        let laws: Vec<String> = r.implicit_statics.iter().map(crate::syntax::render_bool).collect();
        return Err(Error::Precondition(format!(
            "theory is not modular; implicit static laws: {} (summary: {})",
            laws.join("; "),
            crate::syntax::render_bool(&r.summary)
        )));
    }
    Ok(e)
}

/// Contraction of an executability law `phi -> <a> true`.
///
/// When the law is entailed, each context yields a theory whose
/// executability laws for `a` are all restricted to the complement of that
/// context. Otherwise the result is `{Θ}`, as it is when no context exists.
pub fn contract_exec(theory: &Theory, law: &ExecLaw, policy: NonModular) -> Result<TheoryFamily> {
    let sig = theory.signature();
    sig.check_law(&Law::Exec(law.clone()))?;
    let ent = entailer_for(theory, policy)?;
    if !ent.entails(&Law::Exec(law.clone()))? {
        return Ok(vec![theory.clone()]);
    }
    let ctxs = contexts(theory, &law.pre)?;
    if ctxs.is_empty() {
        return Ok(vec![theory.clone()]);
    }
    let mut out = Vec::new();
    for ctx in ctxs {
        let not_ctx = Bool::not(context_bool(ctx, sig));
        let mut t = theory.clone();
        t.clear_execs_for(&law.action);
        for x in theory.execs_for(&law.action) {
            t.insert(Law::exec(Bool::and(x.pre.clone(), not_ctx.clone()), &law.action))?;
        }
        out.push(t);
    }
    Ok(family(out))
}

/// Inclusion-minimal sets `F` of effect laws for the law's action such that
/// `S ∪ F` entails the law, together with their union.
pub fn minimum_effect_supports(theory: &Theory, law: &EffectLaw) -> Result<(Vec<BTreeSet<EffectLaw>>, BTreeSet<EffectLaw>)> {
    let sig = theory.signature();
    sig.check_law(&Law::Effect(law.clone()))?;
    let pool: Vec<&EffectLaw> = theory.effects_for(&law.action).collect();
    if pool.len() > MAX_SUPPORT_LAWS {
        return Err(Error::Resource(format!(
            "{} effect laws for `{}` exceed the support search limit of {MAX_SUPPORT_LAWS}",
            pool.len(),
            law.action
        )));
    }
    let mut masks: Vec<u32> = (0..(1u32 << pool.len())).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    let mut found: Vec<u32> = Vec::new();
    for mask in masks {
        if found.iter().any(|f| f & mask == *f) {
            continue;
        }
        let chosen: Vec<&EffectLaw> = pool.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, e)| *e).collect();
        if statics_and_effects_entail(sig, theory.statics(), &chosen, law)? {
            found.push(mask);
        }
    }
    let supports: Vec<BTreeSet<EffectLaw>> = found
        .iter()
        .map(|m| pool.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, e)| (*e).clone()).collect())
        .collect();
    let union = supports.iter().flatten().cloned().collect();
    Ok((supports, union))
}

/// Contraction of an effect law `phi -> [a] psi`.
///
/// For each context `ctx` and each `pi' ∈ IP(S & ~psi)` the laws of the
/// support union `E-` are replaced by `(phi_i & ~ctx) -> [a] psi_i` and
/// `(phi_i & ctx) -> [a] (psi_i | pi')`, and literals `l` of `ctx`
/// consistent with `pi'` under `S` are kept by `(ctx & l) -> [a] (psi | l)`
/// unless `Θ` already forces `~l` after `a` from `ctx & l` and `l` is not
/// a literal of `pi'`.
pub fn contract_effect(theory: &Theory, law: &EffectLaw, policy: NonModular) -> Result<TheoryFamily> {
    let sig = theory.signature();
    sig.check_law(&Law::Effect(law.clone()))?;
    let ent = entailer_for(theory, policy)?;
    if !ent.entails(&Law::Effect(law.clone()))? {
        return Ok(vec![theory.clone()]);
    }
    let ctxs = contexts(theory, &law.pre)?;
    let statics = boolean::table(&theory.static_conjunction(), sig)?;
    let not_psi = statics.intersect(&boolean::table(&law.post, sig)?.complement());
    let alternatives = boolean::prime_implicants_of_set(&not_psi);
    if ctxs.is_empty() || alternatives.is_empty() {
        return Ok(vec![theory.clone()]);
    }
    let (_, removed) = minimum_effect_supports(theory, law)?;
    let a = law.action.as_str();
    let mut out = Vec::new();
    for &ctx in &ctxs {
        let ctx_b = context_bool(ctx, sig);
        for &alt in &alternatives {
            let alt_b = alt.to_bool(sig);
            let mut t = theory.clone();
            for e in &removed {
                t.remove(&Law::Effect(e.clone()));
            }
            for e in &removed {
                t.insert(Law::effect(Bool::and(e.pre.clone(), Bool::not(ctx_b.clone())), a, e.post.clone()))?;
                t.insert(Law::effect(Bool::and(e.pre.clone(), ctx_b.clone()), a, Bool::or(e.post.clone(), alt_b.clone())))?;
            }
            for lit in ctx.literals(sig) {
                if !keeps_literal(&ent, &statics, ctx, alt, &lit, a, sig)? {
                    continue;
                }
                let l = lit.to_bool();
                t.insert(Law::effect(Bool::and(ctx_b.clone(), l.clone()), a, Bool::or(law.post.clone(), l)))?;
            }
            out.push(t);
        }
    }
    Ok(family(out))
}

fn keeps_literal(
    ent: &Entailer,
    statics: &ValSet,
    ctx: Valuation,
    alt: Term,
    lit: &Literal,
    action: &str,
    sig: &Signature,
) -> Result<bool> {
    let i = sig.atom_index(&lit.atom).expect("context literal over the signature");
    let lit_term = Term::new(1 << i, if lit.positive { 1 << i } else { 0 });
    if alt.mask & lit_term.mask != 0 && alt.bits & lit_term.mask != lit_term.bits {
        return Ok(false);
    }
    let joint = Term::new(alt.mask | lit_term.mask, alt.bits | lit_term.bits);
    if !joint.valuations(sig.num_atoms()).intersects(statics) {
        return Ok(false);
    }
    if alt.has_literal(i, lit.positive) {
        return Ok(true);
    }
    let ctx_lit = Bool::and(context_bool(ctx, sig), lit.to_bool());
    Ok(!ent.entails(&Law::effect(ctx_lit, action, lit.negate().to_bool()))?)
}

/// Classical contraction of a set of static laws by `phi`.
///
/// When `S` entails `phi`, one result per valuation `v` falsifying `phi`,
/// each a single formula equivalent to `S | term(v)` so that its models are
/// exactly `val(S) ∪ {v}`. Otherwise `{S}`.
pub fn classical_contract(statics: &BTreeSet<Bool>, phi: &Bool, sig: &Signature) -> Result<Vec<BTreeSet<Bool>>> {
    boolean::check_cap(sig)?;
    let phi_t = boolean::table(phi, sig)?;
    if phi_t.is_full() {
        return Err(Error::Argument(format!("tautology not contractible: {}", crate::syntax::render_bool(phi))));
    }
    let s = Bool::conj(statics.iter().cloned());
    let s_t = boolean::table(&s, sig)?;
    if !s_t.is_subset(&phi_t) {
        return Ok(vec![statics.clone()]);
    }
    Ok(phi_t
        .complement()
        .iter()
        .map(|v| {
            let mut w = s_t.clone();
            w.insert(v);
            [boolean::least_formula_of_set(&w, sig)].into_iter().collect()
        })
        .collect())
}

/// Contraction of a static law `phi`.
///
/// For each classical contraction `S-` of `S`, the statics become `S-`,
/// every executability law is restricted to `phi` and every action becomes
/// inexecutable in `~phi`-worlds. Effect laws are unchanged.
pub fn contract_static(theory: &Theory, phi: &Bool) -> Result<TheoryFamily> {
    let sig = theory.signature();
    sig.check_law(&Law::Static(phi.clone()))?;
    let results = classical_contract(theory.statics(), phi, sig)?;
    if results.len() == 1 && &results[0] == theory.statics() {
        return Ok(vec![theory.clone()]);
    }
    let mut out = Vec::new();
    for s in results {
        let mut t = theory.clone();
        t.set_statics(s)?;
        for a in sig.actions() {
            t.clear_execs_for(a);
            for x in theory.execs_for(a) {
                t.insert(Law::exec(Bool::and(x.pre.clone(), phi.clone()), a))?;
            }
            t.insert(Law::effect(Bool::not(phi.clone()), a, Bool::False))?;
        }
        out.push(t);
    }
    Ok(family(out))
}

/// Contraction of any law, dispatching on its kind. Static contraction has
/// no modularity requirement and ignores `policy`.
pub fn contract(theory: &Theory, law: &Law, policy: NonModular) -> Result<TheoryFamily> {
    match law {
        Law::Static(phi) => contract_static(theory, phi),
        Law::Effect(e) => contract_effect(theory, e, policy),
        Law::Exec(x) => contract_exec(theory, x, policy),
    }
}

/// Whether each theory entails every law of the other.
pub fn theory_equiv(a: &Theory, b: &Theory, policy: NonModular) -> Result<bool> {
    if a.signature() != b.signature() {
        return Err(Error::Argument("theories are over different signatures".into()));
    }
    let ea = Entailer::new(a, policy)?;
    let eb = Entailer::new(b, policy)?;
    Ok(ea.entails_all(b)? && eb.entails_all(a)?)
}
