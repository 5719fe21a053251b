//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Expected models and theories are written out by hand from the worked
//! coffee-machine examples; cross-checks use brute-force enumerators that
//! live in this file and share no code with the library's deciders.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;

use actchange::boolean::{self, ValSet, Valuation};
use actchange::contract_sem::{contract_model, contract_model_set, SuccessorReference};
use actchange::contract_syn::{contract, contract_effect, contract_exec, contract_static, theory_equiv};
use actchange::entail::{enumerate_models, is_modular, oracle_entails, Entailer, NonModular, OracleCaps};
use actchange::kripke::{big_model, is_model_of, KripkeModel, Metric, ModelSet};
use actchange::postulates::{check_postulate, fuzz_postulates, random_instance, FuzzConfig, Postulate};
use actchange::revise::revise_model_set;
use actchange::syntax::{parse_bool, parse_law, parse_theory, render_law, render_theory, Bool, Law, LawKind, Signature, Theory};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

const COFFEE: &str = "atoms: token, coffee, hot; actions: buy;
    coffee -> hot;
    token -> <buy> true;
    ~coffee -> [buy] coffee;
    token -> [buy] ~token;
    ~token -> [buy] false;
    coffee -> [buy] coffee;
    hot -> [buy] hot;";

const COFFEE_EFFECTS: &str = "
    ~coffee -> [buy] coffee;
    token -> [buy] ~token;
    ~token -> [buy] false;
    coffee -> [buy] coffee;
    hot -> [buy] hot;";

fn coffee() -> Theory {
    parse_theory(COFFEE).unwrap()
}

fn th(body: &str) -> Theory {
    parse_theory(&format!("atoms: token, coffee, hot; actions: buy;\n{body}")).unwrap()
}

fn v(s: &str, sig: &Signature) -> Valuation {
    Valuation::parse(s, sig).unwrap()
}

fn model(sig: &Signature, action: &str, worlds: &[&str], arrows: &[(&str, &str)]) -> KripkeModel {
    KripkeModel::new(
        worlds.iter().map(|w| v(w, sig)),
        arrows.iter().map(|(x, y)| (action.to_string(), (v(x, sig), v(y, sig)))),
    )
    .unwrap()
}

const COFFEE_WORLDS: [&str; 6] =
    ["token,coffee,hot", "~token,coffee,hot", "token,~coffee,hot", "~token,~coffee,~hot", "~token,~coffee,hot", "token,~coffee,~hot"];

const COFFEE_ARROWS: [(&str, &str); 3] = [
    ("token,coffee,hot", "~token,coffee,hot"),
    ("token,~coffee,hot", "~token,coffee,hot"),
    ("token,~coffee,~hot", "~token,coffee,hot"),
];

fn coffee_big_model() -> KripkeModel {
    model(coffee().signature(), "buy", &COFFEE_WORLDS, &COFFEE_ARROWS)
}

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// Each expected theory is equivalent to exactly one output.
fn matches_each(out: &[Theory], expected: &[Theory]) -> Result<(), String> {
    check(out.len() == expected.len(), format!("{} theories, expected {}", out.len(), expected.len()))?;
    for e in expected {
        let hits = out.iter().filter(|o| theory_equiv(o, e, NonModular::Oracle).unwrap()).count();
        check(hits == 1, format!("{hits} outputs equivalent to\n{}", render_theory(e)))?;
    }
    Ok(())
}

fn has_effect_equivalent(t: &Theory, pre: &str, post: &str) -> bool {
    let sig = t.signature();
    let (pre, post) = (parse_bool(pre).unwrap(), parse_bool(post).unwrap());
    t.effects()
        .iter()
        .any(|e| boolean::equivalent(&e.pre, &pre, sig).unwrap() && boolean::equivalent(&e.post, &post, sig).unwrap())
}

fn big_model_reproduction() -> Outcome {
    let got = big_model(&coffee()).map_err(|e| e.to_string())?;
    check(got == coffee_big_model(), "big model differs")?;
    Ok("6 worlds, 3 buy-arrows".into())
}

fn semantic_exec_contraction() -> Outcome {
    let t = coffee();
    let m = coffee_big_model();
    let got = contract_model_set(&[m.clone()].into(), &parse_law("token -> <buy> true").unwrap(), Metric::Inclusion, t.signature())
        .map_err(|e| e.to_string())?;
    let want: BTreeSet<ModelSet> = (0..3)
        .map(|i| {
            let kept: Vec<_> = (0..3).filter(|j| *j != i).map(|j| COFFEE_ARROWS[j]).collect();
            [m.clone(), model(t.signature(), "buy", &COFFEE_WORLDS, &kept)].into()
        })
        .collect();
    check(got == want, format!("{} model-sets differing from the expected three", got.len()))?;
    Ok("three model-sets, each dropping one token arrow".into())
}

fn semantic_effect_contraction() -> Outcome {
    let t = coffee();
    let m = coffee_big_model();
    let got = contract_model_set(&[m.clone()].into(), &parse_law("token -> [buy] hot").unwrap(), Metric::Inclusion, t.signature())
        .map_err(|e| e.to_string())?;
    let want: BTreeSet<ModelSet> = ["token,coffee,hot", "token,~coffee,~hot", "token,~coffee,hot"]
        .iter()
        .map(|src| {
            let mut arrows = COFFEE_ARROWS.to_vec();
            arrows.push((src, "~token,~coffee,~hot"));
            [m.clone(), model(t.signature(), "buy", &COFFEE_WORLDS, &arrows)].into()
        })
        .collect();
    check(got == want, format!("{} model-sets differing from the expected three", got.len()))?;
    Ok("three models, one added arrow into ~token,~coffee,~hot each".into())
}

fn semantic_static_contraction() -> Outcome {
    let t = coffee();
    let m = coffee_big_model();
    let got = contract_model_set(&[m.clone()].into(), &parse_law("coffee -> hot").unwrap(), Metric::Inclusion, t.signature())
        .map_err(|e| e.to_string())?;
    let want: BTreeSet<ModelSet> = ["token,coffee,~hot", "~token,coffee,~hot"]
        .iter()
        .map(|extra| {
            let mut worlds = COFFEE_WORLDS.to_vec();
            worlds.push(extra);
            [m.clone(), model(t.signature(), "buy", &worlds, &COFFEE_ARROWS)].into()
        })
        .collect();
    check(got == want, format!("{} model-sets differing from the expected two", got.len()))?;
    Ok("two models with one added world each, relation unchanged".into())
}

fn exec_golden() -> Outcome {
    let Law::Exec(x) = parse_law("token -> <buy> true").unwrap() else { unreachable!() };
    let out = contract_exec(&coffee(), &x, NonModular::Reject).map_err(|e| e.to_string())?;
    let ctxs = ["token & ~coffee & hot", "token & coffee & hot", "token & ~coffee & ~hot"];
    let expected: Vec<Theory> = (0..3)
        .map(|i| {
            let kept: Vec<String> = (0..3).filter(|j| *j != i).map(|j| format!("({}) -> <buy> true;", ctxs[j])).collect();
            th(&format!("coffee -> hot;{COFFEE_EFFECTS}\n{}", kept.join("\n")))
        })
        .collect();
    matches_each(&out, &expected)?;
    Ok("3 theories".into())
}

fn effect_golden() -> Outcome {
    let Law::Effect(e) = parse_law("token -> [buy] hot").unwrap() else { unreachable!() };
    let out = contract_effect(&coffee(), &e, NonModular::Reject).map_err(|e| e.to_string())?;
    let common = "coffee -> hot; token -> <buy> true; token -> [buy] ~token; ~token -> [buy] false;";
    let weakened = |ctx: &str| {
        format!("(coffee & ~({ctx})) -> [buy] coffee; (hot & ~({ctx})) -> [buy] hot; (~coffee & ~({ctx})) -> [buy] coffee;")
    };
    let e1 = th(&format!(
        "{common}{}(token & coffee & hot) -> [buy] (coffee | ~hot); (token & coffee & hot) -> [buy] (hot | ~coffee);",
        weakened("token & coffee & hot")
    ));
    let e2 = th(&format!("{common}{}(token & ~coffee & ~hot) -> [buy] (coffee | ~hot);", weakened("token & ~coffee & ~hot")));
    let e3 = th(&format!(
        "{common}{}(token & ~coffee & hot) -> [buy] (hot | ~coffee); (token & ~coffee & hot) -> [buy] (coffee | ~hot);",
        weakened("token & ~coffee & hot")
    ));
    matches_each(&out, &[e1, e2, e3])?;
    let excluded = out.iter().any(|o| o.effects().iter().any(|x| render_law(&Law::Effect(x.clone())).contains("(hot | token)")));
    check(!excluded, "an excluded token-preserving law was emitted")?;
    check(!out.iter().any(|o| has_effect_equivalent(o, "token & coffee & hot", "hot | token")), "excluded law present up to equivalence")?;
    Ok("3 theories, exclusion holds".into())
}

fn static_golden() -> Outcome {
    let out = contract_static(&coffee(), &parse_bool("coffee -> hot").unwrap()).map_err(|e| e.to_string())?;
    let rest = "(token & (coffee -> hot)) -> <buy> true;
        ~coffee -> [buy] coffee; token -> [buy] ~token; ~token -> [buy] false;
        coffee -> [buy] coffee; hot -> [buy] hot; (coffee & ~hot) -> [buy] false;";
    let e1 = th(&format!("~(~token & coffee & ~hot);{rest}"));
    let e2 = th(&format!("~(token & coffee & ~hot);{rest}"));
    matches_each(&out, &[e1, e2])?;
    check(out.iter().all(|o| has_effect_equivalent(o, "coffee & ~hot", "false")), "missing (coffee & ~hot) -> [buy] false")?;
    Ok("2 theories, each blocking buy in coffee & ~hot".into())
}

fn counterexamples() -> Outcome {
    // (a) The frame law is emitted and the semantic result is not a model.
    let t = parse_theory("atoms: p1, p2; actions: a; p1 -> <a> true; (~p1 | p2) -> [a] false; [a] ~p2;").unwrap();
    let sig = t.signature();
    let law = parse_law("p1 -> [a] ~p2").unwrap();
    let out = contract(&t, &law, NonModular::Oracle).map_err(|e| e.to_string())?;
    check(out.iter().any(|o| has_effect_equivalent(o, "p1 & ~p2", "~p2 | p1")), "frame law (p1 & ~p2) -> [a] (~p2 | p1) missing")?;
    let m = model(sig, "a", &["p1,~p2", "~p1,~p2", "~p1,p2"], &[("p1,~p2", "~p1,~p2"), ("p1,~p2", "p1,~p2")]);
    let m2 = model(sig, "a", &["p1,~p2", "~p1,~p2", "~p1,p2"], &[("p1,~p2", "~p1,~p2"), ("p1,~p2", "p1,~p2"), ("p1,~p2", "~p1,p2")]);
    check(is_model_of(&m, &t).unwrap(), "M is not a model of the theory")?;
    let reference = SuccessorReference::from_models([&m]);
    let sem = contract_model(&m, &reference, &law, Metric::Inclusion, sig).map_err(|e| e.to_string())?;
    check(sem == [m2.clone()].into(), "semantic contraction of M differs from M'")?;
    check(out.iter().all(|o| !is_model_of(&m2, o).unwrap()), "M' is a model of a contracted theory")?;

    // (b) A model of the contracted theory no semantic contraction reaches.
    let t = parse_theory("atoms: p; actions: a; p -> [a] false; <a> true;").unwrap();
    let sig = t.signature();
    check(!is_modular(&t).unwrap().modular, "theory should be non-modular")?;
    let law = parse_law("p -> <a> true").unwrap();
    let out = contract(&t, &law, NonModular::Oracle).map_err(|e| e.to_string())?;
    let m2 = model(sig, "a", &["~p", "p"], &[("~p", "~p")]);
    check(out.iter().any(|o| is_model_of(&m2, o).unwrap()), "M' is not a model of the contracted theory")?;
    let models: ModelSet = enumerate_models(&t, 1 << 10).map_err(|e| e.to_string())?.into_iter().collect();
    check(models == [model(sig, "a", &["~p"], &[("~p", "~p")])].into(), "unexpected models of the theory")?;
    let sem = contract_model_set(&models, &law, Metric::Inclusion, sig).map_err(|e| e.to_string())?;
    check(sem.iter().all(|s| !s.contains(&m2)), "M' reached semantically")?;
    Ok(format!("(a) M' is a model of none of the {} results; (b) M' is a model of a result, {} semantic outcomes", out.len(), sem.len()))
}

fn modularity() -> Outcome {
    let bad = th("coffee -> hot; <buy> true; ~coffee -> [buy] coffee; token -> [buy] ~token;
        ~token -> [buy] false; coffee -> [buy] coffee; hot -> [buy] hot;");
    let report = is_modular(&bad).map_err(|e| e.to_string())?;
    check(!report.modular, "variant reported modular")?;
    let sig = bad.signature();
    let token = parse_bool("token").unwrap();
    check(boolean::equivalent(&report.summary, &token, sig).unwrap(), format!("summary is {:?}", report.summary))?;
    let s = bad.static_conjunction();
    let joint = Bool::conj(report.implicit_statics.iter().cloned());
    check(
        boolean::equivalent(&Bool::and(s.clone(), joint), &Bool::and(s, token), sig).unwrap(),
        "implicit statics not equivalent to token modulo S",
    )?;
    check(is_modular(&coffee()).unwrap().modular, "coffee theory reported non-modular")?;
    Ok("variant non-modular with implicit static token; coffee modular".into())
}

/// Every model whose worlds are exactly `val(S)`, by brute force over
/// per-world successor sets.
fn full_world_models(t: &Theory) -> Vec<KripkeModel> {
    let sig = t.signature();
    let n = sig.num_atoms();
    let statics = boolean::table(&t.static_conjunction(), sig).unwrap();
    let worlds: Vec<Valuation> = statics.iter().collect();
    let mut out = vec![KripkeModel::new(worlds.iter().copied(), Vec::new()).unwrap()];
    for a in sig.actions() {
        for &w in &worlds {
            let mut allowed = statics.clone();
            let mut required = false;
            for e in t.effects_for(a) {
                if boolean::eval(&e.pre, w, sig).unwrap() {
                    allowed = allowed.intersect(&boolean::table(&e.post, sig).unwrap());
                }
            }
            for x in t.execs_for(a) {
                required |= boolean::eval(&x.pre, w, sig).unwrap();
            }
            let allowed: Vec<Valuation> = allowed.iter().collect();
            let mut next = Vec::new();
            for m in &out {
                for mask in 0u32..(1 << allowed.len()) {
                    if required && mask == 0 {
                        continue;
                    }
                    let mut c = m.clone();
                    for (i, u) in allowed.iter().enumerate() {
                        if mask >> i & 1 == 1 {
                            c.add_arrow(a, (w, *u)).unwrap();
                        }
                    }
                    next.push(c);
                }
            }
            out = next;
        }
    }
    debug_assert!(out.iter().all(|m| m.world_set(n) == statics));
    out
}

#[derive(Default)]
struct Tally {
    pairs: usize,
    incomplete: usize,
    unsound: usize,
    witnesses: Vec<String>,
}

fn correctness_cross_check() -> Outcome {
    let sig = Signature::new(["p", "q"], ["a"]).unwrap();
    let pool = [
        "p -> q", "p | q", "p -> <a> true", "<a> true", "q -> <a> true", "p -> [a] q", "[a] ~p", "q -> [a] false", "~p -> [a] p",
        "p -> [a] p", "q -> [a] q",
    ];
    let targets = ["p -> q", "p", "q | p", "p -> <a> true", "<a> true", "p -> [a] q", "[a] q", "q -> [a] p", "p -> [a] p"];
    let laws: Vec<Law> = pool.iter().map(|s| parse_law(s).unwrap()).collect();
    let targets: Vec<Law> = targets.iter().map(|s| parse_law(s).unwrap()).collect();
    let mut tallies: BTreeMap<&str, Tally> = BTreeMap::new();
    let mut theories = 0;
    for mask in 0u32..(1 << laws.len()) {
        if mask.count_ones() > 3 {
            continue;
        }
        let chosen = laws.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, l)| l.clone());
        let t = Theory::from_laws(sig.clone(), chosen).unwrap();
        if !is_modular(&t).unwrap().modular {
            continue;
        }
        theories += 1;
        let models = full_world_models(&t);
        let model_set: BTreeSet<&KripkeModel> = models.iter().collect();
        let reference = SuccessorReference::from_theory(&t).unwrap();
        let ent = Entailer::new(&t, NonModular::Reject).unwrap();
        for law in &targets {
            if !ent.entails(law).unwrap() {
                continue;
            }
            let out = match contract(&t, law, NonModular::Reject) {
                Ok(o) => o,
                Err(_) => continue,
            };
            let mut sem = ModelSet::new();
            for m in &models {
                sem.extend(contract_model(m, &reference, law, Metric::Inclusion, &sig).unwrap());
            }
            let incomplete = sem.iter().filter(|m| !out.iter().any(|o| is_model_of(m, o).unwrap())).count();
            let unsound: usize = out
                .iter()
                .map(|o| full_world_models(o).iter().filter(|m| !model_set.contains(m) && !sem.contains(*m)).count())
                .sum();
            let kind = match law.kind() {
                LawKind::Static => "static",
                LawKind::Effect => "effect",
                LawKind::Exec => "executability",
            };
            let tally = tallies.entry(kind).or_default();
            tally.pairs += 1;
            let case = format!("{{{}}} minus {}", render_theory(&t).replace('\n', " "), render_law(law));
            if incomplete > 0 {
                tally.incomplete += 1;
                if tally.incomplete == 1 {
                    tally.witnesses.push(format!("{case}: a semantic outcome is a model of no result"));
                }
            }
            if unsound > 0 {
                tally.unsound += 1;
                if tally.unsound == 1 {
                    tally.witnesses.push(format!("{case}: a model of a result is not a semantic outcome"));
                }
            }
        }
    }
    let summary: Vec<String> = tallies
        .iter()
        .map(|(k, t)| format!("{k}: {} pairs, {} incomplete, {} unsound", t.pairs, t.incomplete, t.unsound))
        .collect();
    let bad = tallies.values().any(|t| t.incomplete + t.unsound > 0);
    let detail = format!("{theories} modular theories; {}", summary.join("; "));
    if bad {
        let witnesses: Vec<String> = tallies.values().flat_map(|t| t.witnesses.iter().cloned()).collect();
        return Err(format!("{detail}\n      e.g. {}", witnesses.join("\n      e.g. ")));
    }
    Ok(detail)
}

fn postulate_suite() -> Outcome {
    let checked = [Postulate::Monotonicity, Postulate::Preservation, Postulate::Recovery, Postulate::ModularityPreservation];
    let config = FuzzConfig { seed: 2024, count: 200, atoms: 3, postulates: checked.to_vec(), ..FuzzConfig::default() };
    let summary = fuzz_postulates(&config).map_err(|e| e.to_string())?;
    check(summary.theories() >= 200, format!("only {} theories", summary.theories()))?;
    for p in checked {
        let n = summary.failures_of(p);
        check(n == 0, format!("{} fails on {n} instances", p.name()))?;
    }
    let t = parse_theory("atoms: p; actions: a; ~p; <a> true; p -> [a] false;").unwrap();
    let law = parse_law("p -> <a> true").unwrap();
    let r = check_postulate(&t, &law, Postulate::Success, None).map_err(|e| e.to_string())?;
    check(!r.holds, "success unexpectedly holds on the trivial-law example")?;
    check(contract(&t, &law, NonModular::Reject).unwrap() == vec![t.clone()], "contraction should return the theory unchanged")?;
    Ok(format!("{} modular theories, 0 failures; success fails on the trivial-law example", summary.theories()))
}

fn revision_figures() -> Outcome {
    let t = parse_theory(
        "atoms: token, coffee, hot; actions: buy;
         coffee -> hot; token -> <buy> true;
         ~coffee -> [buy] coffee; ~token -> [buy] false;
         coffee -> [buy] coffee; hot -> [buy] hot;",
    )
    .unwrap();
    let sig = t.signature();
    let m = big_model(&t).unwrap();
    let start: ModelSet = [m.clone()].into();
    let tch = "token,coffee,hot";
    let ntch = "~token,coffee,hot";
    let want_static = model(
        sig,
        "buy",
        &[tch, ntch, "~token,~coffee,~hot", "token,~coffee,~hot"],
        &[(tch, ntch), (tch, tch), ("token,~coffee,~hot", ntch), ("token,~coffee,~hot", tch)],
    );
    let got = revise_model_set(&start, &parse_law("~coffee -> ~hot").unwrap(), Metric::Inclusion, sig).map_err(|e| e.to_string())?;
    check(got == [want_static].into(), "static revision differs")?;
    let want_effect = model(sig, "buy", &COFFEE_WORLDS, &COFFEE_ARROWS);
    let got = revise_model_set(&start, &parse_law("token -> [buy] ~token").unwrap(), Metric::Inclusion, sig).map_err(|e| e.to_string())?;
    check(got == [want_effect].into(), "effect revision differs")?;
    let mut want_exec = m.clone();
    for w in ["~token,~coffee,~hot", "~token,~coffee,hot", ntch] {
        want_exec.add_arrow("buy", (v(w, sig), v(ntch, sig))).unwrap();
    }
    let got = revise_model_set(&start, &parse_law("~token -> <buy> true").unwrap(), Metric::Inclusion, sig).map_err(|e| e.to_string())?;
    check(got == [want_exec].into(), "executability revision differs")?;
    Ok("static, effect and executability revisions reproduced".into())
}

fn metric_divergence() -> Outcome {
    let sig = Signature::new(["p1", "p2"], ["a"]).unwrap();
    let worlds = ["p1,p2", "p1,~p2", "~p1,~p2"];
    let m = model(&sig, "a", &worlds, &[("p1,p2", "p1,~p2"), ("p1,~p2", "p1,p2"), ("p1,~p2", "~p1,~p2")]);
    let m1 = model(&sig, "a", &worlds, &[("p1,~p2", "p1,p2"), ("p1,~p2", "~p1,~p2")]);
    let m2 = model(&sig, "a", &worlds, &[("p1,p2", "p1,~p2")]);
    let law = parse_law("p1 -> <a> true").unwrap();
    let start: ModelSet = [m.clone()].into();
    let inc = contract_model_set(&start, &law, Metric::Inclusion, &sig).map_err(|e| e.to_string())?;
    let card = contract_model_set(&start, &law, Metric::Cardinality, &sig).map_err(|e| e.to_string())?;
    check(inc == [[m.clone(), m1.clone()].into(), [m.clone(), m2].into()].into(), "inclusion result differs")?;
    check(card == [[m, m1].into()].into(), "cardinality result differs")?;
    Ok("inclusion gives {M, M'} and {M, M''}; cardinality only {M, M'}".into())
}

/// Brute-force global consequence for one action: the pairs (w, X) of a
/// world and its successor set that occur in some model.
fn realizable_pairs(t: &Theory) -> Vec<(u32, u32)> {
    let sig = t.signature();
    let nv = 1u32 << sig.num_atoms();
    let mask_of = |s: &ValSet| s.iter().fold(0u32, |acc, v| acc | 1 << v.0);
    let stat = mask_of(&boolean::table(&t.static_conjunction(), sig).unwrap());
    let a = &sig.actions()[0];
    let effects: Vec<(u32, u32)> = t
        .effects_for(a)
        .map(|e| (mask_of(&boolean::table(&e.pre, sig).unwrap()), mask_of(&boolean::table(&e.post, sig).unwrap())))
        .collect();
    let execs: Vec<u32> = t.execs_for(a).map(|x| mask_of(&boolean::table(&x.pre, sig).unwrap())).collect();
    let local_ok = |w: u32, x: u32| {
        effects.iter().all(|(pre, post)| pre >> w & 1 == 0 || x & !post == 0) && execs.iter().all(|pre| pre >> w & 1 == 0 || x != 0)
    };
    let subsets = |m: u32| (0..=m).filter(move |x| x & !m == 0);
    let mut pairs = BTreeSet::new();
    for wmask in 1u32..(1 << nv) {
        if wmask & !stat != 0 {
            continue;
        }
        let worlds: Vec<u32> = (0..nv).filter(|w| wmask >> w & 1 == 1).collect();
        let viable = worlds.iter().all(|&w| subsets(wmask).any(|x| local_ok(w, x)));
        if viable {
            for &w in &worlds {
                pairs.extend(subsets(wmask).filter(|&x| local_ok(w, x)).map(|x| (w, x)));
            }
        }
    }
    pairs.into_iter().collect()
}

fn brute_entails(pairs: &[(u32, u32)], law: &Law, sig: &Signature) -> bool {
    let mask_of = |b: &Bool| boolean::table(b, sig).unwrap().iter().fold(0u32, |acc, v| acc | 1 << v.0);
    match law {
        Law::Static(phi) => {
            let s = mask_of(phi);
            pairs.iter().all(|(w, _)| s >> w & 1 == 1)
        }
        Law::Effect(e) => {
            let (pre, post) = (mask_of(&e.pre), mask_of(&e.post));
            pairs.iter().all(|(w, x)| pre >> w & 1 == 0 || x & !post == 0)
        }
        Law::Exec(x) => {
            let pre = mask_of(&x.pre);
            pairs.iter().all(|(w, succ)| pre >> w & 1 == 0 || *succ != 0)
        }
    }
}

/// Every law over two atoms and one action up to equivalence.
fn all_laws(sig: &Signature) -> Vec<Law> {
    let n = sig.num_atoms();
    let bodies: Vec<Bool> = (0u32..16)
        .map(|m| boolean::least_formula_of_set(&ValSet::from_iter(n, (0..4).filter(|i| m >> i & 1 == 1).map(Valuation)), sig))
        .collect();
    let mut out: Vec<Law> = bodies.iter().map(|b| Law::Static(b.clone())).collect();
    out.extend(bodies.iter().map(|b| Law::exec(b.clone(), "a")));
    for pre in &bodies {
        out.extend(bodies.iter().map(|post| Law::effect(pre.clone(), "a", post.clone())));
    }
    out
}

fn oracle_agreement() -> Outcome {
    let sig = Signature::new(["p", "q"], ["a"]).unwrap();
    let pool = [
        "p -> q", "p | q", "~p", "<a> true", "p -> <a> true", "q -> <a> true", "p -> [a] q", "[a] ~p", "q -> [a] false", "~p -> [a] p",
    ];
    let pool: Vec<Law> = pool.iter().map(|s| parse_law(s).unwrap()).collect();
    let laws = all_laws(&sig);
    let caps = OracleCaps::default();
    let mut pairs_checked = 0usize;
    let mut modular = 0usize;
    for mask in 0u32..(1 << pool.len()) {
        let t = Theory::from_laws(sig.clone(), pool.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, l)| l.clone())).unwrap();
        let ent = Entailer::new(&t, NonModular::Oracle).unwrap();
        modular += usize::from(ent.is_modular());
        let pairs = realizable_pairs(&t);
        for law in &laws {
            let fast = ent.entails(law).unwrap();
            let slow = oracle_entails(&t, &law.to_modal(), caps).unwrap();
            let brute = brute_entails(&pairs, law, &sig);
            check(
                fast == slow && slow == brute,
                format!("{} |= {}: entails {fast}, oracle {slow}, brute force {brute}", render_theory(&t), render_law(&law)),
            )?;
            pairs_checked += 1;
        }
    }
    let sig3 = Signature::new(["p", "q", "r"], ["a"]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..500 {
        let (t, law) = random_instance(&mut rng, &sig3, 5).unwrap();
        let fast = Entailer::new(&t, NonModular::Oracle).unwrap().entails(&law).unwrap();
        let slow = oracle_entails(&t, &law.to_modal(), caps).unwrap();
        let brute = brute_entails(&realizable_pairs(&t), &law, &sig3);
        check(
            fast == slow && slow == brute,
            format!("{} |= {}: entails {fast}, oracle {slow}, brute force {brute}", render_theory(&t), render_law(&law)),
        )?;
    }
    Ok(format!("{pairs_checked} pairs at 2 atoms ({modular} modular theories of {}), 500 samples at 3 atoms", 1 << pool.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 14] = [
        ("big model of the coffee theory", big_model_reproduction),
        ("semantic executability contraction", semantic_exec_contraction),
        ("semantic effect contraction", semantic_effect_contraction),
        ("semantic static contraction", semantic_static_contraction),
        ("executability contraction golden", exec_golden),
        ("effect contraction golden", effect_golden),
        ("static contraction golden", static_golden),
        ("counterexamples to correctness", counterexamples),
        ("modularity detection", modularity),
        ("syntactic vs semantic contraction", correctness_cross_check),
        ("postulate suite", postulate_suite),
        ("revision of the token-kept model", revision_figures),
        ("metric divergence", metric_divergence),
        ("entailment oracle agreement", oracle_agreement),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
