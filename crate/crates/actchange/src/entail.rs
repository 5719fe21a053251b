//! Entailment of laws from theories, modularity checking, implicit static
//! laws and an exact semantic oracle.
//!
//! A model of a theory `S ∪ E ∪ X` is any `<W, R>` with `W ⊆ val(S)` such
//! that every `a`-successor of a world `w` lies in `Allowed_a(w)`, the
//! valuations satisfying `S` and every `psi` of an effect law
//! `phi -> [a] psi` with `w |= phi`, and such that `w` has an `a`-successor
//! whenever some executability law for `a` fires at `w`.
//!
//! The oracle works with the greatest world set `W*` in which every world
//! that needs a successor has one inside the set. `W*` is the union of the
//! world sets of all models, and a world of `W*` can take any admissible
//! successor set inside `W*` independently of the other worlds. Formulas of
//! modal depth at most one are decided from these successor choices, which
//! gives exact global consequence without enumerating whole models.

use std::collections::{BTreeMap, BTreeSet};

use crate::boolean::{self, ValSet, Valuation};
use crate::error::{Error, Result};
use crate::kripke::KripkeModel;
use crate::syntax::{render_bool, Bool, EffectLaw, ExecLaw, Law, Modal, Signature, Theory};

/// Per-action truth tables of a theory.
#[derive(Clone, Debug)]
struct ActionTable {
    name: String,
    effects: Vec<(ValSet, ValSet)>,
    exec_cover: ValSet,
}

/// A theory compiled to truth tables.
#[derive(Clone, Debug)]
pub struct CompiledTheory {
    sig: Signature,
    statics: ValSet,
    actions: Vec<ActionTable>,
}

impl CompiledTheory {
    pub fn new(theory: &Theory) -> Result<CompiledTheory> {
        let sig = theory.signature().clone();
        boolean::check_cap(&sig)?;
        let n = sig.num_atoms();
        let mut statics = ValSet::full(n);
        for s in theory.statics() {
            statics = statics.intersect(&boolean::table(s, &sig)?);
        }
        let mut actions = Vec::new();
        for a in sig.actions() {
            let mut effects = Vec::new();
            for e in theory.effects_for(a) {
                effects.push((boolean::table(&e.pre, &sig)?, boolean::table(&e.post, &sig)?));
            }
            let mut exec_cover = ValSet::empty(n);
            for x in theory.execs_for(a) {
                exec_cover = exec_cover.union(&boolean::table(&x.pre, &sig)?);
            }
            actions.push(ActionTable { name: a.clone(), effects, exec_cover });
        }
        Ok(CompiledTheory { sig, statics, actions })
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    /// `val(S)`.
    pub fn statics(&self) -> &ValSet {
        &self.statics
    }

    fn action(&self, name: &str) -> Result<usize> {
        self.sig.action_index(name).ok_or_else(|| Error::Argument(format!("unknown action `{name}`")))
    }

    /// `Allowed_a(w)`: the valuations of `S` satisfying every effect of `a`
    /// that fires at `w`.
    pub fn allowed(&self, action: &str, w: Valuation) -> Result<ValSet> {
        Ok(self.allowed_idx(self.action(action)?, w))
    }

    fn allowed_idx(&self, a: usize, w: Valuation) -> ValSet {
        let mut out = self.statics.clone();
        for (pre, post) in &self.actions[a].effects {
            if pre.contains(w) {
                out = out.intersect(post);
            }
        }
        out
    }

    /// Whether some executability law for `action` fires at `w`.
    pub fn exec_required(&self, action: &str, w: Valuation) -> Result<bool> {
        Ok(self.actions[self.action(action)?].exec_cover.contains(w))
    }

    /// The valuations where some executability law for `action` fires.
    pub fn exec_cover(&self, action: &str) -> Result<&ValSet> {
        Ok(&self.actions[self.action(action)?].exec_cover)
    }

    /// The big model of the theory.
    pub fn big_model(&self) -> KripkeModel {
        let mut m = KripkeModel::default();
        for w in self.statics.iter() {
            m.add_world(w);
        }
        for (ai, t) in self.actions.iter().enumerate() {
            for w in self.statics.iter() {
                for u in self.allowed_idx(ai, w).iter() {
                    m.add_arrow(&t.name, (w, u)).expect("targets lie in val(S)");
                }
            }
        }
        m
    }

    /// Pairs `(w, a)` of the big model where `a` must be executable at `w`
    /// but `w` has no `a`-successor.
    fn big_model_failures(&self) -> Vec<(Valuation, usize)> {
        let mut out = Vec::new();
        for w in self.statics.iter() {
            for (ai, t) in self.actions.iter().enumerate() {
                if t.exec_cover.contains(w) && self.allowed_idx(ai, w).is_empty() {
                    out.push((w, ai));
                }
            }
        }
        out
    }

    /// `W*`: the greatest subset of `val(S)` in which every world that must
    /// execute an action has an allowed successor inside the subset.
    pub fn supported_worlds(&self) -> ValSet {
        let allowed: BTreeMap<(Valuation, usize), ValSet> = self
            .statics
            .iter()
            .flat_map(|w| (0..self.actions.len()).map(move |ai| (w, ai)))
            .filter(|(w, ai)| self.actions[*ai].exec_cover.contains(*w))
            .map(|(w, ai)| ((w, ai), self.allowed_idx(ai, w)))
            .collect();
        let mut ws = self.statics.clone();
        loop {
            let dead: Vec<Valuation> = ws
                .iter()
                .filter(|w| {
                    (0..self.actions.len()).any(|ai| allowed.get(&(*w, ai)).is_some_and(|s| !s.intersects(&ws)))
                })
                .collect();
            if dead.is_empty() {
                return ws;
            }
            for w in dead {
                ws.remove(w);
            }
        }
    }
}

/// Outcome of a modularity check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModularityReport {
    /// Whether the big model is a model of the theory.
    pub modular: bool,
    /// Worlds of the big model violating an executability law, with the law.
    pub failing_worlds: BTreeSet<(Valuation, ExecLaw)>,
    /// `~term(w)` for each failing world `w`.
    pub implicit_statics: BTreeSet<Bool>,
    /// A simplified formula equivalent, modulo `S`, to the conjunction of
    /// the implicit static laws (`true` when modular).
    pub summary: Bool,
}

/// Checks modularity by testing whether the big model satisfies the theory.
pub fn is_modular(theory: &Theory) -> Result<ModularityReport> {
    let ct = CompiledTheory::new(theory)?;
    Ok(modularity_report(theory, &ct))
}

fn modularity_report(theory: &Theory, ct: &CompiledTheory) -> ModularityReport {
    let sig = theory.signature();
    let failures = ct.big_model_failures();
    let mut failing_worlds = BTreeSet::new();
    let mut failing = ValSet::empty(sig.num_atoms());
    for (w, ai) in &failures {
        failing.insert(*w);
        let a = &sig.actions()[*ai];
        for x in theory.execs_for(a) {
            if boolean::eval(&x.pre, *w, sig).expect("law symbols checked") {
                failing_worlds.insert((*w, x.clone()));
            }
        }
    }
    let implicit_statics =
        failing.iter().map(|w| Bool::not(w.term(sig).to_bool(sig))).collect::<BTreeSet<_>>();
    let kept = ct.statics.minus(&failing);
    let summary = separating_summary(&failing, &kept, sig);
    ModularityReport { modular: failures.is_empty(), failing_worlds, implicit_statics, summary }
}

/// A formula false on `bad`, true on `good`, over a smallest atom set that
/// tells them apart; valuations outside both sets are mapped to true.
fn separating_summary(bad: &ValSet, good: &ValSet, sig: &Signature) -> Bool {
    let n = sig.num_atoms();
    if bad.is_empty() {
        return Bool::True;
    }
    let mut masks: Vec<u32> = (0..(1u32 << n)).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    for mask in masks {
        let bad_proj: BTreeSet<u32> = bad.iter().map(|v| v.0 & mask).collect();
        if good.iter().any(|v| bad_proj.contains(&(v.0 & mask))) {
            continue;
        }
        let g = ValSet::from_iter(n, (0..(1u32 << n)).map(Valuation).filter(|v| !bad_proj.contains(&(v.0 & mask))));
        return boolean::least_formula_of_set(&g, sig);
    }
    unreachable!("the full atom set always separates disjoint world sets")
}

/// What to do when a law-level query meets a non-modular theory.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NonModular {
    /// Fail with a precondition error naming the implicit static laws.
    Reject,
    /// Answer with the exact oracle.
    #[default]
    Oracle,
}

/// Size limits for the oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleCaps {
    /// Largest atom universe accepted.
    pub atoms: usize,
    /// Largest number of successor-set combinations examined per world when
    /// deciding a general formula.
    pub choices: usize,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps { atoms: 12, choices: 1 << 20 }
    }
}

/// Exact global consequence of a modal formula of depth at most one.
///
/// Returns true iff every world of every model of the theory satisfies `phi`.
pub fn oracle_entails(theory: &Theory, phi: &Modal, caps: OracleCaps) -> Result<bool> {
    boolean::check_cap_with(theory.signature(), caps.atoms)?;
    let ct = CompiledTheory::new(theory)?;
    let star = ct.supported_worlds();
    oracle_on(&ct, &star, phi, caps)
}

fn oracle_on(ct: &CompiledTheory, star: &ValSet, phi: &Modal, caps: OracleCaps) -> Result<bool> {
    let sig = &ct.sig;
    sig.check_modal(phi)?;
    if phi.modal_depth() > 1 {
        return Err(Error::Argument("the oracle supports modal depth at most one".into()));
    }
    if let Some(law) = Law::from_modal(phi) {
        return Ok(oracle_law(ct, star, &law));
    }
    // Collect the modal subformulas and, per action, the Boolean bodies.
    let mut boxes: Vec<(usize, bool, ValSet)> = Vec::new();
    collect_modal(phi, ct, &mut boxes)?;
    for w in star.iter() {
        // For each action, the distinct successor types available at w.
        let mut per_action: Vec<(usize, Vec<u32>, bool)> = Vec::new();
        let mentioned: BTreeSet<usize> = boxes.iter().map(|(a, _, _)| *a).collect();
        for &ai in &mentioned {
            let idx: Vec<usize> = (0..boxes.len()).filter(|i| boxes[*i].0 == ai).collect();
            let avail = ct.allowed_idx(ai, w).intersect(star);
            let types: BTreeSet<u32> = avail
                .iter()
                .map(|u| idx.iter().enumerate().fold(0u32, |acc, (k, i)| acc | (u32::from(boxes[*i].2.contains(u)) << k)))
                .collect();
            per_action.push((ai, types.into_iter().collect(), ct.actions[ai].exec_cover.contains(w)));
        }
        let total: f64 = per_action.iter().map(|(_, t, _)| (t.len() as f64).exp2()).product();
        if total > caps.choices as f64 {
            return Err(Error::Resource(format!("more than {} successor choices at one world", caps.choices)));
        }
        let mut choice = vec![0u64; per_action.len()];
        'choices: loop {
            let valid = per_action.iter().zip(&choice).all(|((_, _, req), c)| !*req || *c != 0);
            if valid {
                let eval_box = |ai: usize, is_box: bool, k: usize| -> bool {
                    let pos = per_action.iter().position(|(a, _, _)| *a == ai).expect("mentioned");
                    let (_, types, _) = &per_action[pos];
                    let c = choice[pos];
                    let mut chosen = types.iter().enumerate().filter(|(j, _)| c >> j & 1 == 1).map(|(_, t)| *t);
                    if is_box {
                        chosen.all(|t| t >> k & 1 == 1)
                    } else {
                        chosen.any(|t| t >> k & 1 == 1)
                    }
                };
                let mut counter = 0usize;
                if !eval_depth1(phi, w, sig, &boxes, &mut counter, &eval_box) {
                    return Ok(false);
                }
            }
            // Advance the mixed-radix counter over successor-type subsets.
            let mut i = 0;
            loop {
                if i == choice.len() {
                    break 'choices;
                }
                choice[i] += 1;
                if choice[i] < 1u64 << per_action[i].1.len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
        }
    }
    Ok(true)
}

fn collect_modal(phi: &Modal, ct: &CompiledTheory, out: &mut Vec<(usize, bool, ValSet)>) -> Result<()> {
    match phi {
        Modal::True | Modal::False | Modal::Atom(_) => Ok(()),
        Modal::Not(a) => collect_modal(a, ct, out),
        Modal::And(a, b) | Modal::Or(a, b) | Modal::Implies(a, b) | Modal::Iff(a, b) => {
            collect_modal(a, ct, out)?;
            collect_modal(b, ct, out)
        }
        Modal::Nec(act, body) | Modal::Poss(act, body) => {
            let b = body.to_bool().expect("depth checked");
            out.push((ct.action(act)?, matches!(phi, Modal::Nec(..)), boolean::table(&b, &ct.sig)?));
            Ok(())
        }
    }
}

/// Evaluates a depth-one formula at `w`; modal subformulas are answered by
/// `modal(action, is_box, index_within_action)` in collection order.
fn eval_depth1(
    phi: &Modal,
    w: Valuation,
    sig: &Signature,
    boxes: &[(usize, bool, ValSet)],
    counter: &mut usize,
    modal: &dyn Fn(usize, bool, usize) -> bool,
) -> bool {
    match phi {
        Modal::True => true,
        Modal::False => false,
        Modal::Atom(a) => w.get(sig.atom_index(a).expect("checked")),
        Modal::Not(a) => !eval_depth1(a, w, sig, boxes, counter, modal),
        Modal::And(a, b) => {
            let x = eval_depth1(a, w, sig, boxes, counter, modal);
            let y = eval_depth1(b, w, sig, boxes, counter, modal);
            x && y
        }
        Modal::Or(a, b) => {
            let x = eval_depth1(a, w, sig, boxes, counter, modal);
            let y = eval_depth1(b, w, sig, boxes, counter, modal);
            x || y
        }
        Modal::Implies(a, b) => {
            let x = eval_depth1(a, w, sig, boxes, counter, modal);
            let y = eval_depth1(b, w, sig, boxes, counter, modal);
            !x || y
        }
        Modal::Iff(a, b) => {
            let x = eval_depth1(a, w, sig, boxes, counter, modal);
            let y = eval_depth1(b, w, sig, boxes, counter, modal);
            x == y
        }
        Modal::Nec(..) | Modal::Poss(..) => {
            let i = *counter;
            *counter += 1;
            let (ai, is_box, _) = &boxes[i];
            let k = boxes[..i].iter().filter(|(a, _, _)| a == ai).count();
            modal(*ai, *is_box, k)
        }
    }
}

/// Law-shaped queries answered directly from `W*`.
fn oracle_law(ct: &CompiledTheory, star: &ValSet, law: &Law) -> bool {
    let sig = &ct.sig;
    match law {
        Law::Static(phi) => star.is_subset(&boolean::table(phi, sig).expect("checked")),
        Law::Effect(e) => {
            let ai = ct.action(&e.action).expect("checked");
            let pre = boolean::table(&e.pre, sig).expect("checked");
            let bad_post = boolean::table(&e.post, sig).expect("checked").complement();
            star.intersect(&pre).iter().all(|w| !ct.allowed_idx(ai, w).intersect(star).intersects(&bad_post))
        }
        Law::Exec(x) => {
            let ai = ct.action(&x.action).expect("checked");
            let pre = boolean::table(&x.pre, sig).expect("checked");
            star.intersect(&pre).is_subset(&ct.actions[ai].exec_cover)
        }
    }
}

/// Decides law entailment for one theory, caching compiled tables.
#[derive(Clone, Debug)]
pub struct Entailer {
    theory: Theory,
    compiled: CompiledTheory,
    report: ModularityReport,
    policy: NonModular,
    star: ValSet,
}

impl Entailer {
    pub fn new(theory: &Theory, policy: NonModular) -> Result<Entailer> {
        let compiled = CompiledTheory::new(theory)?;
        let report = modularity_report(theory, &compiled);
        let star = if report.modular { compiled.statics.clone() } else { compiled.supported_worlds() };
        Ok(Entailer { theory: theory.clone(), compiled, report, policy, star })
    }

    pub fn theory(&self) -> &Theory {
        &self.theory
    }

    pub fn compiled(&self) -> &CompiledTheory {
        &self.compiled
    }

    pub fn report(&self) -> &ModularityReport {
        &self.report
    }

    pub fn is_modular(&self) -> bool {
        self.report.modular
    }

    /// `W*`, the worlds occurring in some model of the theory.
    pub fn possible_worlds(&self) -> &ValSet {
        &self.star
    }

    fn precondition(&self) -> Error {
        let laws: Vec<String> = self.report.implicit_statics.iter().map(render_bool).collect();
        Error::Precondition(format!(
            "theory is not modular; implicit static laws: {} (summary: {})",
            laws.join("; "),
            render_bool(&self.report.summary)
        ))
    }

    /// `Theta |= law`.
    pub fn entails(&self, law: &Law) -> Result<bool> {
        self.theory.signature().check_law(law)?;
        if !self.report.modular {
            return match self.policy {
                NonModular::Reject => Err(self.precondition()),
                NonModular::Oracle => Ok(oracle_law(&self.compiled, &self.star, law)),
            };
        }
        let sig = self.theory.signature();
        let ct = &self.compiled;
        Ok(match law {
            Law::Static(phi) => ct.statics.is_subset(&boolean::table(phi, sig)?),
            Law::Effect(e) => {
                let post = boolean::table(&e.post, sig)?;
                let pre = boolean::table(&e.pre, sig)?;
                let ai = ct.action(&e.action)?;
                ct.statics.intersect(&pre).iter().all(|w| ct.allowed_idx(ai, w).is_subset(&post))
            }
            Law::Exec(x) => {
                let pre = boolean::table(&x.pre, sig)?;
                ct.statics.intersect(&pre).is_subset(ct.exec_cover(&x.action)?)
            }
        })
    }

    /// `Theta |= phi` for a modal formula of depth at most one, by the oracle.
    /// Non-modular theories are refused under [`NonModular::Reject`].
    pub fn entails_formula(&self, phi: &Modal, caps: OracleCaps) -> Result<bool> {
        if !self.report.modular && self.policy == NonModular::Reject {
            return Err(self.precondition());
        }
        oracle_on(&self.compiled, &self.star, phi, caps)
    }

    /// Whether every law of `other` is entailed.
    pub fn entails_all(&self, other: &Theory) -> Result<bool> {
        for l in other.laws() {
            if !self.entails(&l)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// `Theta |= law`, falling back to the oracle for non-modular theories.
pub fn entails(theory: &Theory, law: &Law) -> Result<bool> {
    Entailer::new(theory, NonModular::Oracle)?.entails(law)
}

/// `Theta |= law` with an explicit non-modularity policy.
pub fn entails_with(theory: &Theory, law: &Law, policy: NonModular) -> Result<bool> {
    Entailer::new(theory, policy)?.entails(law)
}

/// Whether `S ∪ F` entails the effect law, decided on the big model of
/// `S ∪ F` (used for minimal effect supports).
pub fn statics_and_effects_entail(
    sig: &Signature,
    statics: &BTreeSet<Bool>,
    effects: &[&EffectLaw],
    law: &EffectLaw,
) -> Result<bool> {
    let mut t = Theory::new(sig.clone());
    t.set_statics(statics.iter().cloned())?;
    for e in effects {
        t.insert(Law::Effect((*e).clone()))?;
    }
    Entailer::new(&t, NonModular::Oracle)?.entails(&Law::Effect(law.clone()))
}

/// Every model of the theory with a nonempty world set, by brute force.
///
/// Intended for tiny signatures only; fails when more than `limit` models
/// would be produced.
pub fn enumerate_models(theory: &Theory, limit: usize) -> Result<Vec<KripkeModel>> {
    let ct = CompiledTheory::new(theory)?;
    let sig = theory.signature();
    let base: Vec<Valuation> = ct.statics.iter().collect();
    if base.len() > 16 {
        return Err(Error::Resource("too many candidate worlds to enumerate models".into()));
    }
    let mut out = Vec::new();
    for wmask in 1u32..(1u32 << base.len()) {
        let worlds: Vec<Valuation> = base.iter().enumerate().filter(|(i, _)| wmask >> i & 1 == 1).map(|(_, w)| *w).collect();
        let wset = ValSet::from_iter(sig.num_atoms(), worlds.iter().copied());
        // Each (world, action) slot chooses a successor subset.
        let mut slots: Vec<(usize, Valuation, Vec<Valuation>, bool)> = Vec::new();
        let mut dead = false;
        for (ai, t) in ct.actions.iter().enumerate() {
            for &w in &worlds {
                let opts: Vec<Valuation> = ct.allowed_idx(ai, w).intersect(&wset).iter().collect();
                let req = t.exec_cover.contains(w);
                if req && opts.is_empty() {
                    dead = true;
                }
                slots.push((ai, w, opts, req));
            }
        }
        if dead {
            continue;
        }
        let mut choice = vec![0u64; slots.len()];
        'outer: loop {
            if slots.iter().zip(&choice).all(|((_, _, _, req), c)| !*req || *c != 0) {
                if out.len() >= limit {
                    return Err(Error::Resource(format!("more than {limit} models")));
                }
                let mut m = KripkeModel::default();
                for w in &worlds {
                    m.add_world(*w);
                }
                for ((ai, w, opts, _), c) in slots.iter().zip(&choice) {
                    for (j, u) in opts.iter().enumerate() {
                        if c >> j & 1 == 1 {
                            m.add_arrow(&ct.actions[*ai].name, (*w, *u)).expect("inside W");
                        }
                    }
                }
                out.push(m);
            }
            let mut i = 0;
            loop {
                if i == choice.len() {
                    break 'outer;
                }
                choice[i] += 1;
                if choice[i] < 1u64 << slots[i].2.len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
        }
    }
    Ok(out)
}
