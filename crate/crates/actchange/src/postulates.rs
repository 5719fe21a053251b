//! Checks of the postulates for contraction on concrete instances, and a
//! seeded generator running them over random theories.
//!
//! Every check contracts with the syntactic operators and decides the
//! resulting entailments exactly, using the oracle for non-modular theories.
//! The disjunctive rule is checked on model sets, since a disjunction of two
//! theories is not itself a theory.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::boolean;
use crate::contract_sem::contract_model_set;
use crate::contract_syn::{contract, theory_equiv, TheoryFamily};
use crate::entail::{enumerate_models, is_modular, Entailer, NonModular};
use crate::error::{Error, Result};
use crate::kripke::{Metric, ModelSet};
use crate::syntax::{render_law, render_theory, Bool, EffectLaw, ExecLaw, Law, Signature, Theory};

/// The postulates that can be checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Postulate {
    /// `Θ |= Θ'` for every result.
    Monotonicity,
    /// If `Θ |/= Ψ`, every result is equivalent to `Θ`.
    Preservation,
    /// If `Θ` is consistent and `Ψ` is not valid, no result entails `Ψ`.
    Success,
    /// Success restricted to modular `Θ` and laws not entailed by `S` alone.
    SuccessNontrivial,
    /// Equivalent inputs give pairwise equivalent results.
    Equivalences,
    /// `Θ' ∪ {Ψ} |= Θ` for every result.
    Recovery,
    /// Contracting from the union of two model classes equals the union of
    /// the separate contractions.
    Disjunctive,
    /// Modular inputs give modular results.
    ModularityPreservation,
}

impl Postulate {
    pub const ALL: [Postulate; 8] = [
        Postulate::Monotonicity,
        Postulate::Preservation,
        Postulate::Success,
        Postulate::SuccessNontrivial,
        Postulate::Equivalences,
        Postulate::Recovery,
        Postulate::Disjunctive,
        Postulate::ModularityPreservation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Postulate::Monotonicity => "monotonicity",
            Postulate::Preservation => "preservation",
            Postulate::Success => "success",
            Postulate::SuccessNontrivial => "success-nontrivial",
            Postulate::Equivalences => "equivalences",
            Postulate::Recovery => "recovery",
            Postulate::Disjunctive => "disjunctive",
            Postulate::ModularityPreservation => "modularity-preservation",
        }
    }
}

impl fmt::Display for Postulate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Postulate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Postulate::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown postulate `{s}`")))
    }
}

/// A counter-instance to a postulate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub theory: String,
    pub law: String,
    /// The offending result theory or model, when there is one.
    pub detail: String,
}

/// Outcome of checking one postulate on one instance. A witness is present
/// exactly when the postulate fails.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PostulateReport {
    pub postulate: Postulate,
    pub holds: bool,
    pub witness: Option<Witness>,
}

impl PostulateReport {
    fn pass(postulate: Postulate) -> Self {
        PostulateReport { postulate, holds: true, witness: None }
    }

    fn fail(postulate: Postulate, theory: &Theory, law: &Law, detail: String) -> Self {
        PostulateReport {
            postulate,
            holds: false,
            witness: Some(Witness { theory: render_theory(theory), law: render_law(law), detail }),
        }
    }
}

/// Largest number of models per theory enumerated by the disjunctive check.
pub const DISJUNCTIVE_MODEL_LIMIT: usize = 1 << 14;

fn contracted(theory: &Theory, law: &Law) -> Result<TheoryFamily> {
    contract(theory, law, NonModular::Oracle)
}

fn valid(sig: &Signature, law: &Law) -> Result<bool> {
    Entailer::new(&Theory::new(sig.clone()), NonModular::Oracle)?.entails(law)
}

fn consistent(theory: &Theory) -> Result<bool> {
    Ok(!Entailer::new(theory, NonModular::Oracle)?.possible_worlds().is_empty())
}

fn statics_only(theory: &Theory) -> Result<Theory> {
    let mut t = Theory::new(theory.signature().clone());
    t.set_statics(theory.statics().iter().cloned())?;
    Ok(t)
}

/// An equivalent restatement of a theory: its static laws collapsed into
/// one simplified formula and every antecedent and consequent simplified.
pub fn restate_theory(theory: &Theory) -> Result<Theory> {
    let sig = theory.signature();
    let mut t = Theory::new(sig.clone());
    t.insert(Law::Static(boolean::least_equivalent(&theory.static_conjunction(), sig)?))?;
    for l in theory.laws() {
        if !matches!(l, Law::Static(_)) {
            t.insert(restate_law(&l, sig)?)?;
        }
    }
    Ok(t)
}

/// An equivalent restatement of a law with simplified formulas.
pub fn restate_law(law: &Law, sig: &Signature) -> Result<Law> {
    Ok(match law {
        Law::Static(phi) => Law::Static(boolean::least_equivalent(phi, sig)?),
        Law::Effect(e) => Law::Effect(EffectLaw::new(
            boolean::least_equivalent(&e.pre, sig)?,
            e.action.clone(),
            boolean::least_equivalent(&e.post, sig)?,
        )),
        Law::Exec(x) => Law::Exec(ExecLaw::new(boolean::least_equivalent(&x.pre, sig)?, x.action.clone())),
    })
}

/// Checks one postulate on `(Θ, Ψ)`.
///
/// `other` is the second theory for the equivalences postulate (defaulting
/// to [`restate_theory`] of `Θ`, contracted by [`restate_law`] of `Ψ`) and
/// for the disjunctive rule, where it is required.
pub fn check_postulate(theory: &Theory, law: &Law, which: Postulate, other: Option<&Theory>) -> Result<PostulateReport> {
    let sig = theory.signature();
    sig.check_law(law)?;
    match which {
        Postulate::Monotonicity => {
            let ent = Entailer::new(theory, NonModular::Oracle)?;
            for t in contracted(theory, law)? {
                if !ent.entails_all(&t)? {
                    return Ok(PostulateReport::fail(which, theory, law, render_theory(&t)));
                }
            }
            Ok(PostulateReport::pass(which))
        }
        Postulate::Preservation => {
            if Entailer::new(theory, NonModular::Oracle)?.entails(law)? {
                return Ok(PostulateReport::pass(which));
            }
            for t in contracted(theory, law)? {
                if !theory_equiv(theory, &t, NonModular::Oracle)? {
                    return Ok(PostulateReport::fail(which, theory, law, render_theory(&t)));
                }
            }
            Ok(PostulateReport::pass(which))
        }
        Postulate::Success | Postulate::SuccessNontrivial => {
            if !consistent(theory)? || valid(sig, law)? {
                return Ok(PostulateReport::pass(which));
            }
            if which == Postulate::SuccessNontrivial
                && (!is_modular(theory)?.modular || Entailer::new(&statics_only(theory)?, NonModular::Oracle)?.entails(law)?)
            {
                return Ok(PostulateReport::pass(which));
            }
            for t in contracted(theory, law)? {
                if Entailer::new(&t, NonModular::Oracle)?.entails(law)? {
                    return Ok(PostulateReport::fail(which, theory, law, render_theory(&t)));
                }
            }
            Ok(PostulateReport::pass(which))
        }
        Postulate::Equivalences => {
            let (t2, l2) = match other {
                Some(t2) => (t2.clone(), law.clone()),
                None => (restate_theory(theory)?, restate_law(law, sig)?),
            };
            check_equivalences(theory, &t2, law, &l2)
        }
        Postulate::Recovery => {
            for t in contracted(theory, law)? {
                let mut back = t.clone();
                back.insert(law.clone())?;
                if !Entailer::new(&back, NonModular::Oracle)?.entails_all(theory)? {
                    return Ok(PostulateReport::fail(which, theory, law, render_theory(&t)));
                }
            }
            Ok(PostulateReport::pass(which))
        }
        Postulate::Disjunctive => {
            let t2 = other.ok_or_else(|| Error::Argument("the disjunctive rule needs a second theory".into()))?;
            check_disjunctive(theory, t2, law, Metric::Inclusion)
        }
        Postulate::ModularityPreservation => {
            if !is_modular(theory)?.modular {
                return Ok(PostulateReport::pass(which));
            }
            for t in contracted(theory, law)? {
                if !is_modular(&t)?.modular {
                    return Ok(PostulateReport::fail(which, theory, law, render_theory(&t)));
                }
            }
            Ok(PostulateReport::pass(which))
        }
    }
}

/// The equivalences postulate on explicit inputs: when `Θ1 ≡ Θ2` and
/// `Ψ1 ≡ Ψ2`, each result of contracting `Ψ2` from `Θ1` has an equivalent
/// result of contracting `Ψ1` from `Θ2`, and conversely.
pub fn check_equivalences(t1: &Theory, t2: &Theory, l1: &Law, l2: &Law) -> Result<PostulateReport> {
    let which = Postulate::Equivalences;
    let laws_equiv = Entailer::new(&Theory::from_laws(t1.signature().clone(), [l1.clone()])?, NonModular::Oracle)?
        .entails(l2)?
        && Entailer::new(&Theory::from_laws(t1.signature().clone(), [l2.clone()])?, NonModular::Oracle)?.entails(l1)?;
    if !theory_equiv(t1, t2, NonModular::Oracle)? || !laws_equiv {
        return Ok(PostulateReport::pass(which));
    }
    let r1 = contracted(t1, l2)?;
    let r2 = contracted(t2, l1)?;
    for (xs, ys) in [(&r1, &r2), (&r2, &r1)] {
        for x in xs {
            let mut matched = false;
            for y in ys {
                if theory_equiv(x, y, NonModular::Oracle)? {
                    matched = true;
                    break;
                }
            }
            if !matched {
                return Ok(PostulateReport::fail(which, t1, l1, render_theory(x)));
            }
        }
    }
    Ok(PostulateReport::pass(which))
}

fn union_of_contractions(models: &ModelSet, law: &Law, metric: Metric, sig: &Signature) -> Result<ModelSet> {
    Ok(contract_model_set(models, law, metric, sig)?.into_iter().flatten().collect())
}

/// The disjunctive rule on model classes: the models obtainable by
/// contracting `Ψ` from the models of `Θ1` or `Θ2` together are those
/// obtainable from each class separately.
pub fn check_disjunctive(t1: &Theory, t2: &Theory, law: &Law, metric: Metric) -> Result<PostulateReport> {
    if t1.signature() != t2.signature() {
        return Err(Error::Argument("theories are over different signatures".into()));
    }
    let sig = t1.signature();
    let m1: ModelSet = enumerate_models(t1, DISJUNCTIVE_MODEL_LIMIT)?.into_iter().collect();
    let m2: ModelSet = enumerate_models(t2, DISJUNCTIVE_MODEL_LIMIT)?.into_iter().collect();
    let both: ModelSet = m1.union(&m2).cloned().collect();
    let joint = union_of_contractions(&both, law, metric, sig)?;
    let mut separate = union_of_contractions(&m1, law, metric, sig)?;
    separate.extend(union_of_contractions(&m2, law, metric, sig)?);
    if joint == separate {
        return Ok(PostulateReport::pass(Postulate::Disjunctive));
    }
    let diff = joint.symmetric_difference(&separate).next().expect("sets differ");
    Ok(PostulateReport::fail(
        Postulate::Disjunctive,
        t1,
        law,
        format!("model in only one side:\n{}", crate::kripke::render_model(diff, sig)),
    ))
}

/// Settings for [`fuzz_postulates`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuzzConfig {
    pub seed: u64,
    /// Number of theories checked.
    pub count: usize,
    /// Number of atoms, 1 to 3.
    pub atoms: usize,
    /// Number of actions, 1 or 2.
    pub actions: usize,
    /// Largest number of laws in a generated theory.
    pub max_laws: usize,
    /// Whether to discard non-modular theories.
    pub modular_only: bool,
    pub postulates: Vec<Postulate>,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            seed: 0,
            count: 200,
            atoms: 3,
            actions: 1,
            max_laws: 5,
            modular_only: true,
            postulates: vec![
                Postulate::Monotonicity,
                Postulate::Preservation,
                Postulate::SuccessNontrivial,
                Postulate::Equivalences,
                Postulate::Recovery,
                Postulate::ModularityPreservation,
            ],
        }
    }
}

/// One line of a fuzzing report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FuzzRecord {
    pub theory_id: usize,
    pub theory: String,
    pub law: String,
    pub modular: bool,
    pub postulate: Postulate,
    pub holds: bool,
    pub witness: Option<Witness>,
}

/// All records of a fuzzing run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FuzzSummary {
    pub records: Vec<FuzzRecord>,
}

impl FuzzSummary {
    /// Failures on modular theories, which the postulates are claimed for.
    pub fn modular_failures(&self) -> Vec<&FuzzRecord> {
        self.records.iter().filter(|r| r.modular && !r.holds).collect()
    }

    /// Number of failures of one postulate on modular theories.
    pub fn failures_of(&self, p: Postulate) -> usize {
        self.records.iter().filter(|r| r.modular && !r.holds && r.postulate == p).count()
    }

    /// Number of distinct theories checked.
    pub fn theories(&self) -> usize {
        self.records.iter().map(|r| r.theory_id).collect::<BTreeSet<_>>().len()
    }

    /// Writes one JSON object per record.
    pub fn write_json_lines(&self, out: &mut dyn Write) -> std::io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut *out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

fn random_bool(rng: &mut ChaCha8Rng, atoms: &[String], depth: usize) -> Bool {
    if depth == 0 || rng.gen_bool(0.4) {
        let a = Bool::atom(atoms.choose(rng).expect("nonempty signature"));
        return if rng.gen_bool(0.5) { a } else { Bool::not(a) };
    }
    let l = random_bool(rng, atoms, depth - 1);
    let r = random_bool(rng, atoms, depth - 1);
    match rng.gen_range(0..3) {
        0 => Bool::and(l, r),
        1 => Bool::or(l, r),
        _ => Bool::implies(l, r),
    }
}

fn random_law(rng: &mut ChaCha8Rng, sig: &Signature) -> Law {
    let atoms = sig.atoms();
    let action = sig.actions().choose(rng).expect("nonempty signature").clone();
    let pre = if rng.gen_bool(0.2) { Bool::True } else { random_bool(rng, atoms, 1) };
    match rng.gen_range(0..10) {
        0..=1 => Law::Static(random_bool(rng, atoms, 1)),
        2..=6 => {
            let post = if rng.gen_bool(0.15) { Bool::False } else { random_bool(rng, atoms, 1) };
            Law::effect(pre, &action, post)
        }
        _ => Law::exec(pre, &action),
    }
}

/// Generates a theory and a contraction target. Half of the targets are
/// laws of the theory, the others are fresh random laws.
pub fn random_instance(rng: &mut ChaCha8Rng, sig: &Signature, max_laws: usize) -> Result<(Theory, Law)> {
    let n = rng.gen_range(1..=max_laws.max(1));
    let laws: Vec<Law> = (0..n).map(|_| random_law(rng, sig)).collect();
    let theory = Theory::from_laws(sig.clone(), laws.clone())?;
    let mut target = if rng.gen_bool(0.5) { laws.choose(rng).expect("nonempty").clone() } else { random_law(rng, sig) };
    if let Law::Static(phi) = &target {
        if boolean::is_tautology(phi, sig)? {
            target = Law::Static(Bool::atom(&sig.atoms()[0]));
        }
    }
    Ok((theory, target))
}

/// Runs the configured postulates over seeded random theories.
///
/// Non-modular theories are skipped when `modular_only` is set and are
/// otherwise reported with `modular: false`.
pub fn fuzz_postulates(config: &FuzzConfig) -> Result<FuzzSummary> {
    if !(1..=3).contains(&config.atoms) || !(1..=2).contains(&config.actions) {
        return Err(Error::Argument("fuzzing supports 1 to 3 atoms and 1 or 2 actions".into()));
    }
    let atoms: Vec<String> = ["p", "q", "r"][..config.atoms].iter().map(|s| s.to_string()).collect();
    let actions: Vec<String> = ["a", "b"][..config.actions].iter().map(|s| s.to_string()).collect();
    let sig = Signature::new(atoms, actions)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut summary = FuzzSummary::default();
    let mut accepted = 0;
    let mut attempts = 0;
    while accepted < config.count {
        attempts += 1;
        if attempts > config.count.saturating_mul(1000).max(1000) {
            return Err(Error::Resource("could not generate enough modular theories".into()));
        }
        let (theory, law) = random_instance(&mut rng, &sig, config.max_laws)?;
        let modular = is_modular(&theory)?.modular;
        if config.modular_only && !modular {
            continue;
        }
        for &p in &config.postulates {
            let other = if p == Postulate::Disjunctive { Some(restate_theory(&theory)?) } else { None };
            let report = check_postulate(&theory, &law, p, other.as_ref())?;
            summary.records.push(FuzzRecord {
                theory_id: accepted,
                theory: render_theory(&theory),
                law: render_law(&law),
                modular,
                postulate: p,
                holds: report.holds,
                witness: report.witness,
            });
        }
        accepted += 1;
    }
    Ok(summary)
}
