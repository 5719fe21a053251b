//! Semantic revision: minimal changes of models that make a law valid.
//!
//! * static laws remove the worlds falsifying them, keeping every arrow
//!   between surviving worlds;
//! * effect laws remove the `a`-arrows from `phi`-worlds into
//!   `~psi`-worlds;
//! * executability laws give each `phi`-world without an `a`-successor one
//!   new arrow into a relevant target world for `phi -> [a] false`.
//!
//! A set of models is revised by expansion when some member already
//! satisfies the law, and by revising every member otherwise.

use crate::boolean;
use crate::contract_sem::{relevant_target_worlds, SuccessorReference};
use crate::error::{Error, Result};
use crate::kripke::{is_model_of_law, minimal_under, KripkeModel, Metric, ModelSet};
use crate::syntax::{Bool, EffectLaw, ExecLaw, Law, Signature};

/// The models produced by revising a set of models; each satisfies the law.
pub type RevisionOutcome = ModelSet;

/// Largest number of candidate models built by [`revise_exec_model`].
pub const MAX_REVISION_CANDIDATES: usize = 1 << 16;

/// Revision of one model by a static law.
///
/// When some world satisfies `phi`, the result is the submodel on those
/// worlds. Otherwise each `phi`-valuation alone forms a candidate world set,
/// and the candidates closest to `m` are returned.
pub fn revise_static_model(m: &KripkeModel, phi: &Bool, metric: Metric, sig: &Signature) -> Result<ModelSet> {
    let table = boolean::table(phi, sig)?;
    if table.is_empty() {
        return Err(Error::Impossible(format!(
            "no model satisfies the static law {}",
            crate::syntax::render_bool(phi)
        )));
    }
    let mut kept = m.clone();
    for w in m.worlds().iter().filter(|w| !table.contains(**w)) {
        kept.remove_world(*w);
    }
    if !kept.worlds().is_empty() {
        return Ok([kept].into_iter().collect());
    }
    let candidates: ModelSet = table
        .iter()
        .map(|v| {
            let mut c = KripkeModel::default();
            c.add_world(v);
            c
        })
        .collect();
    Ok(minimal_under(m, &candidates, metric))
}

/// Revision of one model by an effect law: the unique closest submodel
/// without `a`-arrows from `phi`-worlds into `~psi`-worlds.
pub fn revise_effect_model(m: &KripkeModel, law: &EffectLaw, _metric: Metric, sig: &Signature) -> Result<ModelSet> {
    let pre = boolean::table(&law.pre, sig)?;
    let post = boolean::table(&law.post, sig)?;
    let mut out = m.clone();
    for (x, y) in m.arrows(&law.action).collect::<Vec<_>>() {
        if pre.contains(x) && !post.contains(y) {
            out.remove_arrow(&law.action, (x, y));
        }
    }
    Ok([out].into_iter().collect())
}

/// Revision of one model by an executability law, with relevant targets
/// judged against `reference`.
///
/// Every `phi`-world without an `a`-successor receives one arrow into one of
/// its relevant target worlds for `phi -> [a] false`. The result is empty
/// when some such world has no relevant target.
pub fn revise_exec_model(
    m: &KripkeModel,
    reference: &SuccessorReference,
    law: &ExecLaw,
    metric: Metric,
    sig: &Signature,
) -> Result<ModelSet> {
    if is_model_of_law(m, &Law::Exec(law.clone()), sig)? {
        return Ok([m.clone()].into_iter().collect());
    }
    let pre = boolean::table(&law.pre, sig)?;
    let inexec = EffectLaw::new(law.pre.clone(), law.action.clone(), Bool::False);
    let mut choices = Vec::new();
    for w in m.worlds().iter().copied().filter(|w| pre.contains(*w) && !m.has_successor(&law.action, *w)) {
        let targets: Vec<_> = relevant_target_worlds(w, &inexec, m, reference, sig)?.into_iter().collect();
        if targets.is_empty() {
            return Ok(ModelSet::new());
        }
        choices.push((w, targets));
    }
    let total = choices.iter().try_fold(1usize, |acc, (_, t)| acc.checked_mul(t.len()).filter(|n| *n <= MAX_REVISION_CANDIDATES));
    if total.is_none() {
        return Err(Error::Resource(format!("more than {MAX_REVISION_CANDIDATES} candidate revisions")));
    }
    let mut candidates = ModelSet::new();
    let mut index = vec![0usize; choices.len()];
    loop {
        let mut c = m.clone();
        for (k, (w, targets)) in choices.iter().enumerate() {
            c.add_arrow(&law.action, (*w, targets[index[k]]))?;
        }
        candidates.insert(c);
        let mut k = 0;
        loop {
            if k == index.len() {
                return Ok(minimal_under(m, &candidates, metric));
            }
            index[k] += 1;
            if index[k] < choices[k].1.len() {
                break;
            }
            index[k] = 0;
            k += 1;
        }
    }
}

/// Revision of one model by any law; executability laws use `reference`.
pub fn revise_model(
    m: &KripkeModel,
    reference: &SuccessorReference,
    law: &Law,
    metric: Metric,
    sig: &Signature,
) -> Result<ModelSet> {
    sig.check_law(law)?;
    match law {
        Law::Static(phi) => revise_static_model(m, phi, metric, sig),
        Law::Effect(e) => revise_effect_model(m, e, metric, sig),
        Law::Exec(x) => revise_exec_model(m, reference, x, metric, sig),
    }
}

/// Revision of a set of models.
///
/// If some member satisfies the law, the members violating it are dropped.
/// Otherwise the result is the union of the single-model revisions, which
/// must not be empty.
pub fn revise_model_set(mset: &ModelSet, law: &Law, metric: Metric, sig: &Signature) -> Result<RevisionOutcome> {
    sig.check_law(law)?;
    if mset.is_empty() {
        return Err(Error::Argument("cannot revise an empty set of models".into()));
    }
    let mut satisfying = ModelSet::new();
    for m in mset {
        if is_model_of_law(m, law, sig)? {
            satisfying.insert(m.clone());
        }
    }
    if !satisfying.is_empty() {
        return Ok(satisfying);
    }
    let reference = SuccessorReference::from_models(mset);
    let mut out = ModelSet::new();
    for m in mset {
        out.extend(revise_model(m, &reference, law, metric, sig)?);
    }
    if out.is_empty() {
        return Err(Error::Impossible("revision impossible at fixed worlds".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolean::Valuation;
    use crate::kripke::{big_model, globally_satisfies, strictly_closer};
    use crate::syntax::{parse_bool, parse_law, parse_theory};

    fn token_kept_model() -> (Signature, KripkeModel) {
        let t = parse_theory(
            "atoms: token, coffee, hot; actions: buy;
             coffee -> hot; token -> <buy> true;
             ~coffee -> [buy] coffee; ~token -> [buy] false;
             coffee -> [buy] coffee; hot -> [buy] hot;",
        )
        .unwrap();
        let m = big_model(&t).unwrap();
        (t.signature().clone(), m)
    }

    fn v(s: &str, sig: &Signature) -> Valuation {
        Valuation::parse(s, sig).unwrap()
    }

    fn model(worlds: &[&str], arrows: &[(&str, &str)], sig: &Signature) -> KripkeModel {
        KripkeModel::new(
            worlds.iter().map(|w| v(w, sig)),
            arrows.iter().map(|(x, y)| ("buy".to_string(), (v(x, sig), v(y, sig)))),
        )
        .unwrap()
    }

    #[test]
    fn reference_model_shape() {
        let (_, m) = token_kept_model();
        assert_eq!(m.worlds().len(), 6);
        assert_eq!(m.num_arrows(), 6);
    }

    #[test]
    fn static_revision_drops_worlds() {
        let (sig, m) = token_kept_model();
        let out = revise_static_model(&m, &parse_bool("~coffee -> ~hot").unwrap(), Metric::Inclusion, &sig).unwrap();
        let want = model(
            &["token,coffee,hot", "~token,coffee,hot", "~token,~coffee,~hot", "token,~coffee,~hot"],
            &[
                ("token,coffee,hot", "~token,coffee,hot"),
                ("token,coffee,hot", "token,coffee,hot"),
                ("token,~coffee,~hot", "~token,coffee,hot"),
                ("token,~coffee,~hot", "token,coffee,hot"),
            ],
            &sig,
        );
        assert_eq!(out, [want].into_iter().collect());
        assert!(revise_static_model(&m, &Bool::False, Metric::Inclusion, &sig).is_err());
        let same = revise_static_model(&m, &parse_bool("coffee -> hot").unwrap(), Metric::Inclusion, &sig).unwrap();
        assert_eq!(same, [m].into_iter().collect());
    }

    #[test]
    fn static_revision_of_fully_violating_model() {
        let sig = Signature::new(["p", "q"], ["a"]).unwrap();
        let m = KripkeModel::new([Valuation(0), Valuation(1)], [("a".to_string(), (Valuation(0), Valuation(1)))]).unwrap();
        let phi = parse_bool("q").unwrap();
        let out = revise_static_model(&m, &phi, Metric::Inclusion, &sig).unwrap();
        // Brute force: every nonempty world set of q-valuations, no arrows.
        let qs: Vec<Valuation> = (0..4).map(Valuation).filter(|w| w.get(1)).collect();
        let cands: ModelSet = (1u32..(1 << qs.len()))
            .map(|mask| KripkeModel::new(qs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, w)| *w), []).unwrap())
            .collect();
        let want: ModelSet = cands.iter().filter(|c| !cands.iter().any(|d| strictly_closer(&m, d, c, Metric::Inclusion))).cloned().collect();
        assert_eq!(out, want);
        assert!(out.iter().all(|o| o.worlds().len() == 1));
    }

    #[test]
    fn effect_revision_removes_offending_arrows() {
        let (sig, m) = token_kept_model();
        let law = match parse_law("token -> [buy] ~token").unwrap() {
            Law::Effect(e) => e,
            _ => unreachable!(),
        };
        let out = revise_effect_model(&m, &law, Metric::Inclusion, &sig).unwrap();
        let want = model(
            &["token,coffee,hot", "~token,coffee,hot", "token,~coffee,hot", "~token,~coffee,~hot", "~token,~coffee,hot", "token,~coffee,~hot"],
            &[
                ("token,coffee,hot", "~token,coffee,hot"),
                ("token,~coffee,hot", "~token,coffee,hot"),
                ("token,~coffee,~hot", "~token,coffee,hot"),
            ],
            &sig,
        );
        assert_eq!(out, [want].into_iter().collect());
    }

    #[test]
    fn exec_revision_targets_relevant_worlds() {
        let (sig, m) = token_kept_model();
        let law = parse_law("~token -> <buy> true").unwrap();
        let mset: ModelSet = [m.clone()].into_iter().collect();
        let out = revise_model_set(&mset, &law, Metric::Inclusion, &sig).unwrap();
        let mut want = m.clone();
        for w in ["~token,~coffee,~hot", "~token,~coffee,hot", "~token,coffee,hot"] {
            want.add_arrow("buy", (v(w, &sig), v("~token,coffee,hot", &sig))).unwrap();
        }
        assert_eq!(out, [want].into_iter().collect());
    }

    #[test]
    fn set_level_expansion_and_revision() {
        let (sig, m) = token_kept_model();
        let law = parse_law("token -> [buy] ~token").unwrap();
        let fixed = revise_effect_model(&m, &match &law {
            Law::Effect(e) => e.clone(),
            _ => unreachable!(),
        }, Metric::Inclusion, &sig)
        .unwrap();
        let good = fixed.iter().next().unwrap().clone();
        let both: ModelSet = [m.clone(), good.clone()].into_iter().collect();
        assert_eq!(revise_model_set(&both, &law, Metric::Inclusion, &sig).unwrap(), [good.clone()].into_iter().collect());
        let only_bad: ModelSet = [m.clone()].into_iter().collect();
        assert_eq!(revise_model_set(&only_bad, &law, Metric::Inclusion, &sig).unwrap(), [good.clone()].into_iter().collect());
        let only_good: ModelSet = [good.clone()].into_iter().collect();
        assert_eq!(revise_model_set(&only_good, &law, Metric::Inclusion, &sig).unwrap(), only_good);
        assert!(revise_model_set(&ModelSet::new(), &law, Metric::Inclusion, &sig).is_err());
    }

    // Brute force over every model on two atoms, one action and at most
    // three worlds: effect revision equals the closest arrow-removal
    // satisfying the raw clauses, and every output satisfies the law.
    #[test]
    fn effect_revision_matches_brute_force() {
        let sig = Signature::new(["p", "q"], ["a"]).unwrap();
        let laws = ["p -> [a] q", "[a] false", "~q -> [a] (p & q)", "(p | q) -> [a] ~p"];
        let all_arrows: Vec<(Valuation, Valuation)> = (0..4).flat_map(|x| (0..4).map(move |y| (Valuation(x), Valuation(y)))).collect();
        for wmask in (1u32..16).filter(|m| m.count_ones() <= 3) {
            let worlds: Vec<Valuation> = (0..4).filter(|i| wmask >> i & 1 == 1).map(Valuation).collect();
            let arrows: Vec<_> = all_arrows.iter().filter(|(x, y)| worlds.contains(x) && worlds.contains(y)).copied().collect();
            for rmask in 0u32..(1 << arrows.len()) {
                let m = KripkeModel::new(
                    worlds.iter().copied(),
                    arrows.iter().enumerate().filter(|(i, _)| rmask >> i & 1 == 1).map(|(_, a)| ("a".to_string(), *a)),
                )
                .unwrap();
                for text in laws {
                    let Law::Effect(e) = parse_law(text).unwrap() else { unreachable!() };
                    let got = revise_effect_model(&m, &e, Metric::Inclusion, &sig).unwrap();
                    let pre = boolean::table(&e.pre, &sig).unwrap();
                    let have: Vec<_> = m.arrows("a").collect();
                    let mut legal = ModelSet::new();
                    for sub in 0u32..(1 << have.len()) {
                        let removed_ok = have.iter().enumerate().all(|(i, (x, _))| sub >> i & 1 == 1 || pre.contains(*x));
                        if !removed_ok {
                            continue;
                        }
                        let c = KripkeModel::new(
                            worlds.iter().copied(),
                            have.iter().enumerate().filter(|(i, _)| sub >> i & 1 == 1).map(|(_, a)| ("a".to_string(), *a)),
                        )
                        .unwrap();
                        if is_model_of_law(&c, &Law::Effect(e.clone()), &sig).unwrap() {
                            legal.insert(c);
                        }
                    }
                    let want = minimal_under(&m, &legal, Metric::Inclusion);
                    assert_eq!(got, want);
                    for o in &got {
                        assert!(globally_satisfies(o, &[Law::Effect(e.clone()).to_modal()], &sig).unwrap());
                    }
                }
            }
        }
    }
}
