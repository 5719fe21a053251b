//! Kripke models whose worlds are distinct valuations, truth checking, the
//! big model of a theory, closeness orders and text/DOT formats.
//!
//! Model text format:
//!
//! ```text
//! atoms: t, c, h;
//! actions: buy;
//! w0: ~t,c,h
//! w1: t,c,h
//! buy: w1 -> w0
//! ```
//!
//! A model set lists several models, each introduced by a line starting
//! with `---`. Lines starting with `#` are comments.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::boolean::{ValSet, Valuation};
use crate::entail::CompiledTheory;
use crate::error::{Error, Result};
use crate::syntax::{ActionName, Law, Modal, Signature, Theory};

/// An arrow of one accessibility relation.
pub type Arrow = (Valuation, Valuation);

/// A model `<W, R>` with `R` given per action.
///
/// Empty relations are not stored, so structural equality is model equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KripkeModel {
    worlds: BTreeSet<Valuation>,
    rel: BTreeMap<ActionName, BTreeSet<Arrow>>,
}

/// A finite set of models.
pub type ModelSet = BTreeSet<KripkeModel>;

impl KripkeModel {
    /// Builds a model, checking that every arrow joins two worlds.
    pub fn new(
        worlds: impl IntoIterator<Item = Valuation>,
        rel: impl IntoIterator<Item = (ActionName, Arrow)>,
    ) -> Result<KripkeModel> {
        let mut m = KripkeModel { worlds: worlds.into_iter().collect(), rel: BTreeMap::new() };
        for (a, arrow) in rel {
            m.add_arrow(&a, arrow)?;
        }
        Ok(m)
    }

    pub fn worlds(&self) -> &BTreeSet<Valuation> {
        &self.worlds
    }

    /// The world set as a truth table over `n` atoms.
    pub fn world_set(&self, n: usize) -> ValSet {
        ValSet::from_iter(n, self.worlds.iter().copied())
    }

    pub fn has_world(&self, w: Valuation) -> bool {
        self.worlds.contains(&w)
    }

    /// The non-empty relations, keyed by action.
    pub fn relations(&self) -> &BTreeMap<ActionName, BTreeSet<Arrow>> {
        &self.rel
    }

    /// The arrows of one action (empty if it has none).
    pub fn arrows(&self, action: &str) -> impl Iterator<Item = Arrow> + '_ {
        self.rel.get(action).into_iter().flat_map(|s| s.iter().copied())
    }

    pub fn has_arrow(&self, action: &str, arrow: Arrow) -> bool {
        self.rel.get(action).is_some_and(|s| s.contains(&arrow))
    }

    /// The `action`-successors of `w`.
    pub fn successors(&self, action: &str, w: Valuation) -> impl Iterator<Item = Valuation> + '_ {
        let lo = (w, Valuation(0));
        let hi = (w, Valuation(u32::MAX));
        self.rel.get(action).into_iter().flat_map(move |s| s.range(lo..=hi).map(|(_, t)| *t))
    }

    pub fn has_successor(&self, action: &str, w: Valuation) -> bool {
        self.successors(action, w).next().is_some()
    }

    /// Total number of arrows over all actions.
    pub fn num_arrows(&self) -> usize {
        self.rel.values().map(BTreeSet::len).sum()
    }

    pub fn add_world(&mut self, w: Valuation) -> bool {
        self.worlds.insert(w)
    }

    /// Removes a world together with its incident arrows.
    pub fn remove_world(&mut self, w: Valuation) -> bool {
        if !self.worlds.remove(&w) {
            return false;
        }
        for arrows in self.rel.values_mut() {
            arrows.retain(|(s, t)| *s != w && *t != w);
        }
        self.rel.retain(|_, s| !s.is_empty());
        true
    }

    /// Adds an arrow between two existing worlds.
    pub fn add_arrow(&mut self, action: &str, arrow: Arrow) -> Result<bool> {
        if !self.has_world(arrow.0) || !self.has_world(arrow.1) {
            return Err(Error::Argument(format!(
                "arrow {:?} -> {:?} for `{action}` leaves the world set",
                arrow.0, arrow.1
            )));
        }
        Ok(self.rel.entry(action.to_string()).or_default().insert(arrow))
    }

    pub fn remove_arrow(&mut self, action: &str, arrow: Arrow) -> bool {
        let removed = self.rel.get_mut(action).is_some_and(|s| s.remove(&arrow));
        if self.rel.get(action).is_some_and(BTreeSet::is_empty) {
            self.rel.remove(action);
        }
        removed
    }

    /// Removes every `action`-arrow leaving `w`.
    pub fn remove_arrows_from(&mut self, action: &str, w: Valuation) {
        if let Some(s) = self.rel.get_mut(action) {
            s.retain(|(src, _)| *src != w);
            if s.is_empty() {
                self.rel.remove(action);
            }
        }
    }

    /// All arrows tagged with their action.
    fn tagged_arrows(&self) -> BTreeSet<(&str, Valuation, Valuation)> {
        self.rel.iter().flat_map(|(a, s)| s.iter().map(move |(x, y)| (a.as_str(), *x, *y))).collect()
    }
}

/// Truth of a modal formula at world `w` of `m`.
pub fn satisfies(m: &KripkeModel, w: Valuation, phi: &Modal, sig: &Signature) -> Result<bool> {
    if !m.has_world(w) {
        return Err(Error::Argument(format!("{} is not a world of the model", w.display(sig))));
    }
    sig.check_modal(phi)?;
    Ok(holds(m, w, phi, sig))
}

fn holds(m: &KripkeModel, w: Valuation, phi: &Modal, sig: &Signature) -> bool {
    match phi {
        Modal::True => true,
        Modal::False => false,
        Modal::Atom(a) => w.get(sig.atom_index(a).expect("atom checked against signature")),
        Modal::Not(a) => !holds(m, w, a, sig),
        Modal::And(a, b) => holds(m, w, a, sig) && holds(m, w, b, sig),
        Modal::Or(a, b) => holds(m, w, a, sig) || holds(m, w, b, sig),
        Modal::Implies(a, b) => !holds(m, w, a, sig) || holds(m, w, b, sig),
        Modal::Iff(a, b) => holds(m, w, a, sig) == holds(m, w, b, sig),
        Modal::Nec(act, a) => m.successors(act, w).all(|u| holds(m, u, a, sig)),
        Modal::Poss(act, a) => m.successors(act, w).any(|u| holds(m, u, a, sig)),
    }
}

/// `|=_M Sigma`: every formula holds at every world.
pub fn globally_satisfies(m: &KripkeModel, sigma: &[Modal], sig: &Signature) -> Result<bool> {
    for phi in sigma {
        sig.check_modal(phi)?;
        if !m.worlds.iter().all(|w| holds(m, *w, phi, sig)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether the law holds at world `w`.
pub fn law_holds_at(m: &KripkeModel, w: Valuation, law: &Law, sig: &Signature) -> Result<bool> {
    satisfies(m, w, &law.to_modal(), sig)
}

/// Whether the model globally satisfies the law.
pub fn is_model_of_law(m: &KripkeModel, law: &Law, sig: &Signature) -> Result<bool> {
    globally_satisfies(m, &[law.to_modal()], sig)
}

/// Whether the model globally satisfies every law of the theory.
pub fn is_model_of(m: &KripkeModel, theory: &Theory) -> Result<bool> {
    let sigma: Vec<Modal> = theory.laws().iter().map(Law::to_modal).collect();
    globally_satisfies(m, &sigma, theory.signature())
}

/// The big model: `W = val(S)` and `(w, u)` in `R_a` iff `u` satisfies every
/// `psi` with `phi -> [a] psi` in `E_a` and `w |= phi`.
pub fn big_model(theory: &Theory) -> Result<KripkeModel> {
    Ok(CompiledTheory::new(theory)?.big_model())
}

/// How candidate models are compared against a reference model.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    /// Symmetric differences compared by set inclusion, worlds first.
    #[default]
    Inclusion,
    /// Symmetric differences compared by size, worlds first.
    Cardinality,
}

impl std::str::FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Metric> {
        match s {
            "inclusion" => Ok(Metric::Inclusion),
            "cardinality" => Ok(Metric::Cardinality),
            other => Err(Error::Argument(format!("unknown metric `{other}`"))),
        }
    }
}

struct Diff<'a> {
    worlds: BTreeSet<Valuation>,
    arrows: BTreeSet<(&'a str, Valuation, Valuation)>,
}

fn diff<'a>(reference: &'a KripkeModel, m: &'a KripkeModel) -> Diff<'a> {
    let worlds = reference.worlds.symmetric_difference(&m.worlds).copied().collect();
    let (ra, rb) = (reference.tagged_arrows(), m.tagged_arrows());
    let arrows = ra.symmetric_difference(&rb).copied().collect();
    Diff { worlds, arrows }
}

/// `m1 <=_ref m2`: `m1` is at least as close to `reference` as `m2`.
///
/// Under [`Metric::Inclusion`] the world differences are compared first by
/// strict inclusion; on equal world differences the arrow differences are
/// compared by inclusion. [`Metric::Cardinality`] does the same with sizes.
pub fn closeness_leq(reference: &KripkeModel, m1: &KripkeModel, m2: &KripkeModel, metric: Metric) -> bool {
    let (d1, d2) = (diff(reference, m1), diff(reference, m2));
    match metric {
        Metric::Inclusion => {
            (d1.worlds != d2.worlds && d1.worlds.is_subset(&d2.worlds))
                || (d1.worlds == d2.worlds && d1.arrows.is_subset(&d2.arrows))
        }
        Metric::Cardinality => {
            d1.worlds.len() < d2.worlds.len()
                || (d1.worlds.len() == d2.worlds.len() && d1.arrows.len() <= d2.arrows.len())
        }
    }
}

/// `m1 <_ref m2`: at least as close and not conversely.
pub fn strictly_closer(reference: &KripkeModel, m1: &KripkeModel, m2: &KripkeModel, metric: Metric) -> bool {
    closeness_leq(reference, m1, m2, metric) && !closeness_leq(reference, m2, m1, metric)
}

/// The candidates not strictly dominated by another candidate.
pub fn minimal_under(reference: &KripkeModel, candidates: &ModelSet, metric: Metric) -> ModelSet {
    candidates
        .iter()
        .filter(|c| !candidates.iter().any(|d| strictly_closer(reference, d, c, metric)))
        .cloned()
        .collect()
}

// ---------------------------------------------------------------------------
// Text and DOT formats

fn world_names(m: &KripkeModel) -> BTreeMap<Valuation, String> {
    m.worlds.iter().enumerate().map(|(i, w)| (*w, format!("w{i}"))).collect()
}

fn header(sig: &Signature, out: &mut String) {
    let _ = writeln!(out, "atoms: {};", sig.atoms().join(", "));
    if !sig.actions().is_empty() {
        let _ = writeln!(out, "actions: {};", sig.actions().join(", "));
    }
}

fn body(m: &KripkeModel, sig: &Signature, out: &mut String) {
    let names = world_names(m);
    for w in &m.worlds {
        let _ = writeln!(out, "{}: {}", names[w], w.display(sig));
    }
    for (a, arrows) in &m.rel {
        for (x, y) in arrows {
            let _ = writeln!(out, "{a}: {} -> {}", names[x], names[y]);
        }
    }
}

/// Text form of one model, with a signature header.
pub fn render_model(m: &KripkeModel, sig: &Signature) -> String {
    let mut out = String::new();
    header(sig, &mut out);
    body(m, sig, &mut out);
    out
}

/// Text form of a model set; models are numbered from 1.
pub fn render_model_set<'a>(models: impl IntoIterator<Item = &'a KripkeModel>, sig: &Signature) -> String {
    let mut out = String::new();
    header(sig, &mut out);
    for (i, m) in models.into_iter().enumerate() {
        let _ = writeln!(out, "--- model {}", i + 1);
        body(m, sig, &mut out);
    }
    out
}

/// Parses model text. The signature comes from the `atoms:` / `actions:`
/// header when present, else from `sig`.
pub fn parse_models(text: &str, sig: Option<&Signature>) -> Result<(Signature, Vec<KripkeModel>)> {
    let mut atoms: Option<Vec<String>> = None;
    let mut actions: Option<Vec<String>> = None;
    let mut sections: Vec<Vec<(usize, &str)>> = vec![Vec::new()];
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with("---") {
            sections.push(Vec::new());
            continue;
        }
        let list = |rest: &str| -> Vec<String> {
            rest.trim_end_matches(';').split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
        };
        if let Some(rest) = line.strip_prefix("atoms:") {
            atoms = Some(list(rest));
        } else if let Some(rest) = line.strip_prefix("actions:") {
            actions = Some(list(rest));
        } else {
            sections.last_mut().expect("nonempty").push((no + 1, line));
        }
    }
    let sig = match (atoms, sig) {
        (Some(a), _) => Signature::new(a, actions.unwrap_or_default())?,
        (None, Some(s)) => s.clone(),
        (None, None) => return Err(Error::Argument("model text lacks an `atoms:` header".into())),
    };
    let first_empty = sections[0].is_empty();
    let mut models = Vec::new();
    for (i, sec) in sections.iter().enumerate() {
        if i == 0 && first_empty && sections.len() > 1 {
            continue;
        }
        models.push(parse_section(sec, &sig)?);
    }
    Ok((sig, models))
}

fn parse_section(lines: &[(usize, &str)], sig: &Signature) -> Result<KripkeModel> {
    let bad = |no: usize, msg: String| Error::Argument(format!("line {no}: {msg}"));
    let mut names: BTreeMap<String, Valuation> = BTreeMap::new();
    let mut m = KripkeModel::default();
    let mut edges = Vec::new();
    for &(no, line) in lines {
        let (head, rest) = line.split_once(':').ok_or_else(|| bad(no, format!("expected `name: ...`, got `{line}`")))?;
        let (head, rest) = (head.trim(), rest.trim());
        if let Some((from, to)) = rest.split_once("->") {
            if !sig.has_action(head) {
                return Err(bad(no, format!("unknown action `{head}`")));
            }
            edges.push((no, head.to_string(), from.trim().to_string(), to.trim().to_string()));
        } else {
            let v = Valuation::parse(rest, sig).map_err(|e| bad(no, e.to_string()))?;
            if names.insert(head.to_string(), v).is_some() {
                return Err(bad(no, format!("world `{head}` defined twice")));
            }
            if !m.add_world(v) {
                return Err(bad(no, format!("two worlds share valuation {}", v.display(sig))));
            }
        }
    }
    for (no, a, from, to) in edges {
        let x = *names.get(&from).ok_or_else(|| bad(no, format!("unknown world `{from}`")))?;
        let y = *names.get(&to).ok_or_else(|| bad(no, format!("unknown world `{to}`")))?;
        m.add_arrow(&a, (x, y))?;
    }
    Ok(m)
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn dot_body(m: &KripkeModel, sig: &Signature, prefix: &str, indent: &str, out: &mut String) {
    let names = world_names(m);
    for w in &m.worlds {
        let _ = writeln!(out, "{indent}{prefix}{} [label=\"{}\"];", names[w], dot_escape(&w.display(sig)));
    }
    for (a, arrows) in &m.rel {
        for (x, y) in arrows {
            let _ = writeln!(out, "{indent}{prefix}{} -> {prefix}{} [label=\"{}\"];", names[x], names[y], dot_escape(a));
        }
    }
}

/// Graphviz rendering of one model.
pub fn export_dot(m: &KripkeModel, sig: &Signature) -> String {
    let mut out = String::from("digraph M {\n");
    dot_body(m, sig, "", "  ", &mut out);
    out.push_str("}\n");
    out
}

/// Graphviz rendering of a model set, one cluster per model.
pub fn export_dot_set<'a>(models: impl IntoIterator<Item = &'a KripkeModel>, sig: &Signature) -> String {
    let mut out = String::from("digraph M {\n");
    for (i, m) in models.into_iter().enumerate() {
        let _ = writeln!(out, "  subgraph cluster_{} {{", i + 1);
        let _ = writeln!(out, "    label=\"model {}\";", i + 1);
        dot_body(m, sig, &format!("m{}_", i + 1), "    ", &mut out);
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}
