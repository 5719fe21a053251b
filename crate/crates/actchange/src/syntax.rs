//! Formula and law ASTs, the theory DSL parser and canonical rendering.
//!
//! Theory files are UTF-8 text made of `;`-terminated statements, optionally
//! preceded by an `atoms:` / `actions:` header that fixes the symbol universe:
//!
//! ```text
//! atoms: token, coffee, hot;
//! actions: buy;
//! coffee -> hot;
//! ~coffee -> [buy] coffee;
//! token -> <buy> true;
//! ```
//!
//! Operator precedence, tightest first: `~ [a] <a>`, `&`, `|`, `->` (right
//! associative), `<->`. `&`, `|` and `<->` associate to the left.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, ParseError};

/// Largest atom universe accepted by the valuation engine.
pub const DEFAULT_ATOM_CAP: usize = 20;

/// A propositional atom name.
pub type Atom = String;

/// An action name. Actions live in a namespace disjoint from atoms.
pub type ActionName = String;

/// A literal over a named atom.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn new(atom: impl Into<Atom>, positive: bool) -> Self {
        Literal { atom: atom.into(), positive }
    }

    /// The complementary literal.
    pub fn negate(&self) -> Self {
        Literal { atom: self.atom.clone(), positive: !self.positive }
    }

    pub fn to_bool(&self) -> Bool {
        let a = Bool::atom(&self.atom);
        if self.positive {
            a
        } else {
            Bool::not(a)
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.atom)
        } else {
            write!(f, "~{}", self.atom)
        }
    }
}

/// Boolean formula.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bool {
    True,
    False,
    Atom(Atom),
    Not(Box<Bool>),
    And(Box<Bool>, Box<Bool>),
    Or(Box<Bool>, Box<Bool>),
    Implies(Box<Bool>, Box<Bool>),
    Iff(Box<Bool>, Box<Bool>),
}

impl Bool {
    pub fn atom(name: &str) -> Bool {
        Bool::Atom(name.to_string())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Bool) -> Bool {
        Bool::Not(Box::new(a))
    }

    pub fn and(a: Bool, b: Bool) -> Bool {
        Bool::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Bool, b: Bool) -> Bool {
        Bool::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Bool, b: Bool) -> Bool {
        Bool::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Bool, b: Bool) -> Bool {
        Bool::Iff(Box::new(a), Box::new(b))
    }

    /// Left-nested conjunction of the given formulas; `true` when empty.
    pub fn conj(items: impl IntoIterator<Item = Bool>) -> Bool {
        let mut it = items.into_iter();
        match it.next() {
            None => Bool::True,
            Some(first) => it.fold(first, Bool::and),
        }
    }

    /// Left-nested disjunction of the given formulas; `false` when empty.
    pub fn disj(items: impl IntoIterator<Item = Bool>) -> Bool {
        let mut it = items.into_iter();
        match it.next() {
            None => Bool::False,
            Some(first) => it.fold(first, Bool::or),
        }
    }

    /// Atom names occurring in the formula.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        match self {
            Bool::True | Bool::False => {}
            Bool::Atom(a) => {
                out.insert(a.clone());
            }
            Bool::Not(a) => a.collect_atoms(out),
            Bool::And(a, b) | Bool::Or(a, b) | Bool::Implies(a, b) | Bool::Iff(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Evaluates the formula under an assignment given as a lookup function.
    pub fn eval_with(&self, value: &dyn Fn(&str) -> bool) -> bool {
        match self {
            Bool::True => true,
            Bool::False => false,
            Bool::Atom(a) => value(a),
            Bool::Not(a) => !a.eval_with(value),
            Bool::And(a, b) => a.eval_with(value) && b.eval_with(value),
            Bool::Or(a, b) => a.eval_with(value) || b.eval_with(value),
            Bool::Implies(a, b) => !a.eval_with(value) || b.eval_with(value),
            Bool::Iff(a, b) => a.eval_with(value) == b.eval_with(value),
        }
    }
}

impl fmt::Display for Bool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_modal(&Modal::from(self.clone())))
    }
}

/// Modal formula: Boolean connectives plus `[a]` and `<a>`.
///
/// `<a>Φ` is kept as its own node and evaluated as `~[a]~Φ`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Modal {
    True,
    False,
    Atom(Atom),
    Not(Box<Modal>),
    And(Box<Modal>, Box<Modal>),
    Or(Box<Modal>, Box<Modal>),
    Implies(Box<Modal>, Box<Modal>),
    Iff(Box<Modal>, Box<Modal>),
    Nec(ActionName, Box<Modal>),
    Poss(ActionName, Box<Modal>),
}

impl From<Bool> for Modal {
    fn from(b: Bool) -> Modal {
        match b {
            Bool::True => Modal::True,
            Bool::False => Modal::False,
            Bool::Atom(a) => Modal::Atom(a),
            Bool::Not(a) => Modal::Not(Box::new(Modal::from(*a))),
            Bool::And(a, b) => Modal::And(Box::new(Modal::from(*a)), Box::new(Modal::from(*b))),
            Bool::Or(a, b) => Modal::Or(Box::new(Modal::from(*a)), Box::new(Modal::from(*b))),
            Bool::Implies(a, b) => {
                Modal::Implies(Box::new(Modal::from(*a)), Box::new(Modal::from(*b)))
            }
            Bool::Iff(a, b) => Modal::Iff(Box::new(Modal::from(*a)), Box::new(Modal::from(*b))),
        }
    }
}

impl Modal {
    /// The Boolean formula this is, if it contains no modal operator.
    pub fn to_bool(&self) -> Option<Bool> {
        Some(match self {
            Modal::True => Bool::True,
            Modal::False => Bool::False,
            Modal::Atom(a) => Bool::Atom(a.clone()),
            Modal::Not(a) => Bool::not(a.to_bool()?),
            Modal::And(a, b) => Bool::and(a.to_bool()?, b.to_bool()?),
            Modal::Or(a, b) => Bool::or(a.to_bool()?, b.to_bool()?),
            Modal::Implies(a, b) => Bool::implies(a.to_bool()?, b.to_bool()?),
            Modal::Iff(a, b) => Bool::iff(a.to_bool()?, b.to_bool()?),
            Modal::Nec(..) | Modal::Poss(..) => return None,
        })
    }

    /// Maximum nesting depth of modal operators.
    pub fn modal_depth(&self) -> usize {
        match self {
            Modal::True | Modal::False | Modal::Atom(_) => 0,
            Modal::Not(a) => a.modal_depth(),
            Modal::And(a, b) | Modal::Or(a, b) | Modal::Implies(a, b) | Modal::Iff(a, b) => {
                a.modal_depth().max(b.modal_depth())
            }
            Modal::Nec(_, a) | Modal::Poss(_, a) => 1 + a.modal_depth(),
        }
    }

    /// Atom and action names occurring in the formula.
    pub fn symbols(&self) -> (BTreeSet<Atom>, BTreeSet<ActionName>) {
        let mut atoms = BTreeSet::new();
        let mut actions = BTreeSet::new();
        self.collect(&mut atoms, &mut actions);
        (atoms, actions)
    }

    fn collect(&self, atoms: &mut BTreeSet<Atom>, actions: &mut BTreeSet<ActionName>) {
        match self {
            Modal::True | Modal::False => {}
            Modal::Atom(a) => {
                atoms.insert(a.clone());
            }
            Modal::Not(a) => a.collect(atoms, actions),
            Modal::And(a, b) | Modal::Or(a, b) | Modal::Implies(a, b) | Modal::Iff(a, b) => {
                a.collect(atoms, actions);
                b.collect(atoms, actions);
            }
            Modal::Nec(act, a) | Modal::Poss(act, a) => {
                actions.insert(act.clone());
                a.collect(atoms, actions);
            }
        }
    }
}

impl fmt::Display for Modal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_modal(self))
    }
}

/// Effect law `pre -> [action] post`. With `post = false` it is an
/// inexecutability law.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EffectLaw {
    pub pre: Bool,
    pub action: ActionName,
    pub post: Bool,
}

/// Executability law `pre -> <action> true`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExecLaw {
    pub pre: Bool,
    pub action: ActionName,
}

impl EffectLaw {
    pub fn new(pre: Bool, action: impl Into<ActionName>, post: Bool) -> Self {
        EffectLaw { pre, action: action.into(), post }
    }
}

impl ExecLaw {
    pub fn new(pre: Bool, action: impl Into<ActionName>) -> Self {
        ExecLaw { pre, action: action.into() }
    }
}

/// A law of an action theory.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Law {
    Static(Bool),
    Effect(EffectLaw),
    Exec(ExecLaw),
}

impl Law {
    pub fn effect(pre: Bool, action: &str, post: Bool) -> Law {
        Law::Effect(EffectLaw::new(pre, action, post))
    }

    pub fn exec(pre: Bool, action: &str) -> Law {
        Law::Exec(ExecLaw::new(pre, action))
    }

    /// The law as a modal formula.
    pub fn to_modal(&self) -> Modal {
        match self {
            Law::Static(phi) => Modal::from(phi.clone()),
            Law::Effect(e) => Modal::Implies(
                Box::new(Modal::from(e.pre.clone())),
                Box::new(Modal::Nec(e.action.clone(), Box::new(Modal::from(e.post.clone())))),
            ),
            Law::Exec(x) => Modal::Implies(
                Box::new(Modal::from(x.pre.clone())),
                Box::new(Modal::Poss(x.action.clone(), Box::new(Modal::True))),
            ),
        }
    }

    /// Reads a modal formula as a law, if it has one of the three law shapes.
    ///
    /// A bare `[a] psi` is read as `true -> [a] psi` and a bare `<a> true` as
    /// `true -> <a> true`.
    pub fn from_modal(m: &Modal) -> Option<Law> {
        if let Some(b) = m.to_bool() {
            return Some(Law::Static(b));
        }
        let (pre, cons) = match m {
            Modal::Implies(a, b) => (a.to_bool()?, b.as_ref()),
            other => (Bool::True, other),
        };
        match cons {
            Modal::Nec(act, post) => Some(Law::Effect(EffectLaw::new(pre, act.clone(), post.to_bool()?))),
            Modal::Poss(act, inner) if **inner == Modal::True => {
                Some(Law::Exec(ExecLaw::new(pre, act.clone())))
            }
            _ => None,
        }
    }

    pub fn action(&self) -> Option<&str> {
        match self {
            Law::Static(_) => None,
            Law::Effect(e) => Some(&e.action),
            Law::Exec(x) => Some(&x.action),
        }
    }

    pub fn kind(&self) -> LawKind {
        match self {
            Law::Static(_) => LawKind::Static,
            Law::Effect(_) => LawKind::Effect,
            Law::Exec(_) => LawKind::Exec,
        }
    }

    fn atoms(&self) -> BTreeSet<Atom> {
        match self {
            Law::Static(phi) => phi.atoms(),
            Law::Effect(e) => {
                let mut s = e.pre.atoms();
                s.extend(e.post.atoms());
                s
            }
            Law::Exec(x) => x.pre.atoms(),
        }
    }
}

/// The three law kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LawKind {
    Static,
    Effect,
    Exec,
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_law(self))
    }
}

/// Ordered atom and action universes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Signature {
    atoms: Vec<Atom>,
    actions: Vec<ActionName>,
}

impl Signature {
    /// Builds a signature, rejecting duplicate names, bad identifiers and
    /// names used both as atom and action.
    pub fn new<A, B>(atoms: A, actions: B) -> Result<Self, Error>
    where
        A: IntoIterator,
        A::Item: Into<String>,
        B: IntoIterator,
        B::Item: Into<String>,
    {
        let mut sig = Signature::default();
        for a in atoms {
            sig.add_atom(&a.into())?;
        }
        for b in actions {
            sig.add_action(&b.into())?;
        }
        Ok(sig)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn actions(&self) -> &[ActionName] {
        &self.actions
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn atom_index(&self, name: &str) -> Option<usize> {
        self.atoms.iter().position(|a| a == name)
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a == name)
    }

    pub fn has_atom(&self, name: &str) -> bool {
        self.atom_index(name).is_some()
    }

    pub fn has_action(&self, name: &str) -> bool {
        self.action_index(name).is_some()
    }

    /// Adds an atom if absent. Fails when the name is an action or invalid.
    pub fn add_atom(&mut self, name: &str) -> Result<(), Error> {
        check_ident(name)?;
        if self.has_action(name) {
            return Err(Error::Argument(format!("`{name}` is already an action name")));
        }
        if !self.has_atom(name) {
            self.atoms.push(name.to_string());
        }
        Ok(())
    }

    /// Adds an action if absent. Fails when the name is an atom or invalid.
    pub fn add_action(&mut self, name: &str) -> Result<(), Error> {
        check_ident(name)?;
        if self.has_atom(name) {
            return Err(Error::Argument(format!("`{name}` is already an atom name")));
        }
        if !self.has_action(name) {
            self.actions.push(name.to_string());
        }
        Ok(())
    }

    /// Fails unless every symbol of the law belongs to this signature.
    pub fn check_law(&self, law: &Law) -> Result<(), Error> {
        for a in law.atoms() {
            if !self.has_atom(&a) {
                return Err(Error::Argument(format!("unknown atom `{a}`")));
            }
        }
        if let Some(act) = law.action() {
            if !self.has_action(act) {
                return Err(Error::Argument(format!("unknown action `{act}`")));
            }
        }
        Ok(())
    }

    /// Fails unless every symbol of the formula belongs to this signature.
    pub fn check_modal(&self, m: &Modal) -> Result<(), Error> {
        let (atoms, actions) = m.symbols();
        if let Some(a) = atoms.iter().find(|a| !self.has_atom(a)) {
            return Err(Error::Argument(format!("unknown atom `{a}`")));
        }
        if let Some(a) = actions.iter().find(|a| !self.has_action(a)) {
            return Err(Error::Argument(format!("unknown action `{a}`")));
        }
        Ok(())
    }
}

fn check_ident(name: &str) -> Result<(), Error> {
    let mut chars = name.chars();
    let ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && name != "true"
        && name != "false";
    if ok {
        Ok(())
    } else {
        Err(Error::Argument(format!("`{name}` is not a valid identifier")))
    }
}

/// An action theory `S ∪ E ∪ X` over a fixed signature.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Theory {
    sig: Signature,
    statics: BTreeSet<Bool>,
    effects: BTreeSet<EffectLaw>,
    execs: BTreeSet<ExecLaw>,
}

impl Theory {
    /// An empty theory over the given signature.
    pub fn new(sig: Signature) -> Self {
        Theory { sig, statics: BTreeSet::new(), effects: BTreeSet::new(), execs: BTreeSet::new() }
    }

    /// Builds a theory from laws, checking their symbols against `sig`.
    pub fn from_laws(sig: Signature, laws: impl IntoIterator<Item = Law>) -> Result<Self, Error> {
        let mut t = Theory::new(sig);
        for l in laws {
            t.insert(l)?;
        }
        Ok(t)
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    /// Inserts a law. Returns `false` if it was already present.
    pub fn insert(&mut self, law: Law) -> Result<bool, Error> {
        self.sig.check_law(&law)?;
        Ok(match law {
            Law::Static(b) => self.statics.insert(b),
            Law::Effect(e) => self.effects.insert(e),
            Law::Exec(x) => self.execs.insert(x),
        })
    }

    /// Removes a law. Returns `true` if it was present.
    pub fn remove(&mut self, law: &Law) -> bool {
        match law {
            Law::Static(b) => self.statics.remove(b),
            Law::Effect(e) => self.effects.remove(e),
            Law::Exec(x) => self.execs.remove(x),
        }
    }

    pub fn contains(&self, law: &Law) -> bool {
        match law {
            Law::Static(b) => self.statics.contains(b),
            Law::Effect(e) => self.effects.contains(e),
            Law::Exec(x) => self.execs.contains(x),
        }
    }

    pub fn statics(&self) -> &BTreeSet<Bool> {
        &self.statics
    }

    pub fn effects(&self) -> &BTreeSet<EffectLaw> {
        &self.effects
    }

    pub fn execs(&self) -> &BTreeSet<ExecLaw> {
        &self.execs
    }

    /// Effect laws for one action (`E_a`).
    pub fn effects_for<'a>(&'a self, action: &'a str) -> impl Iterator<Item = &'a EffectLaw> + 'a {
        self.effects.iter().filter(move |e| e.action == action)
    }

    /// Executability laws for one action (`X_a`).
    pub fn execs_for<'a>(&'a self, action: &'a str) -> impl Iterator<Item = &'a ExecLaw> + 'a {
        self.execs.iter().filter(move |x| x.action == action)
    }

    /// All laws: statics, then effects, then executabilities.
    pub fn laws(&self) -> Vec<Law> {
        let mut out: Vec<Law> = self.statics.iter().cloned().map(Law::Static).collect();
        out.extend(self.effects.iter().cloned().map(Law::Effect));
        out.extend(self.execs.iter().cloned().map(Law::Exec));
        out
    }

    /// The conjunction of the static laws.
    pub fn static_conjunction(&self) -> Bool {
        Bool::conj(self.statics.iter().cloned())
    }

    /// Replaces the static laws.
    pub fn set_statics(&mut self, statics: impl IntoIterator<Item = Bool>) -> Result<(), Error> {
        let new: BTreeSet<Bool> = statics.into_iter().collect();
        for s in &new {
            self.sig.check_law(&Law::Static(s.clone()))?;
        }
        self.statics = new;
        Ok(())
    }

    /// Removes every executability law for `action`.
    pub fn clear_execs_for(&mut self, action: &str) {
        self.execs.retain(|x| x.action != action);
    }

    pub fn len(&self) -> usize {
        self.statics.len() + self.effects.len() + self.execs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_theory(self))
    }
}

// ---------------------------------------------------------------------------
// Rendering

const PREC_IFF: u8 = 1;
const PREC_IMP: u8 = 2;
const PREC_OR: u8 = 3;
const PREC_AND: u8 = 4;
const PREC_UNARY: u8 = 5;

fn prec(m: &Modal) -> u8 {
    match m {
        Modal::Iff(..) => PREC_IFF,
        Modal::Implies(..) => PREC_IMP,
        Modal::Or(..) => PREC_OR,
        Modal::And(..) => PREC_AND,
        _ => PREC_UNARY,
    }
}

fn render_into(m: &Modal, out: &mut String) {
    let wrap = |child: &Modal, needs: bool, out: &mut String| {
        if needs {
            out.push('(');
            render_into(child, out);
            out.push(')');
        } else {
            render_into(child, out);
        }
    };
    match m {
        Modal::True => out.push_str("true"),
        Modal::False => out.push_str("false"),
        Modal::Atom(a) => out.push_str(a),
        Modal::Not(a) => {
            out.push('~');
            wrap(a, prec(a) < PREC_UNARY, out);
        }
        Modal::Nec(act, a) => {
            out.push('[');
            out.push_str(act);
            out.push_str("] ");
            wrap(a, prec(a) < PREC_UNARY, out);
        }
        Modal::Poss(act, a) => {
            out.push('<');
            out.push_str(act);
            out.push_str("> ");
            wrap(a, prec(a) < PREC_UNARY, out);
        }
        Modal::And(a, b) | Modal::Or(a, b) | Modal::Iff(a, b) => {
            let (p, op) = match m {
                Modal::And(..) => (PREC_AND, " & "),
                Modal::Or(..) => (PREC_OR, " | "),
                _ => (PREC_IFF, " <-> "),
            };
            wrap(a, prec(a) < p, out);
            out.push_str(op);
            wrap(b, prec(b) <= p, out);
        }
        Modal::Implies(a, b) => {
            wrap(a, prec(a) <= PREC_IMP, out);
            out.push_str(" -> ");
            wrap(b, prec(b) < PREC_IMP, out);
        }
    }
}

/// Canonical text of a modal formula with minimal parentheses.
pub fn render_modal(m: &Modal) -> String {
    let mut s = String::new();
    render_into(m, &mut s);
    s
}

/// Canonical text of a Boolean formula.
pub fn render_bool(b: &Bool) -> String {
    render_modal(&Modal::from(b.clone()))
}

/// Canonical text of a law. Executability laws always end in `<a> true`.
pub fn render_law(l: &Law) -> String {
    render_modal(&l.to_modal())
}

/// Canonical text of a theory: header, then statics, effects and
/// executabilities, each group sorted by rendered text.
pub fn render_theory(t: &Theory) -> String {
    let mut out = String::new();
    out.push_str("atoms: ");
    out.push_str(&t.sig.atoms.join(", "));
    out.push_str(";\n");
    if !t.sig.actions.is_empty() {
        out.push_str("actions: ");
        out.push_str(&t.sig.actions.join(", "));
        out.push_str(";\n");
    }
    let mut group = |laws: Vec<Law>| {
        let mut lines: Vec<String> = laws.iter().map(render_law).collect();
        lines.sort();
        for l in lines {
            out.push_str(&l);
            out.push_str(";\n");
        }
    };
    group(t.statics.iter().cloned().map(Law::Static).collect());
    group(t.effects.iter().cloned().map(Law::Effect).collect());
    group(t.execs.iter().cloned().map(Law::Exec).collect());
    out
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    True,
    False,
    Tilde,
    Amp,
    Pipe,
    Arrow,
    Iff,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Lt,
    Gt,
    Semi,
    Colon,
    Comma,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::True => "`true`",
            Tok::False => "`false`",
            Tok::Tilde => "`~`",
            Tok::Amp => "`&`",
            Tok::Pipe => "`|`",
            Tok::Arrow => "`->`",
            Tok::Iff => "`<->`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBrack => "`[`",
            Tok::RBrack => "`]`",
            Tok::Lt => "`<`",
            Tok::Gt => "`>`",
            Tok::Semi => "`;`",
            Tok::Colon => "`:`",
            Tok::Comma => "`,`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let adv = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            adv(1, &mut i, &mut col);
            continue;
        }
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let push = |tok: Tok, out: &mut Vec<Spanned>| out.push(Spanned { tok, line: tl, col: tc });
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
                col += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let tok = match word.as_str() {
                "true" => Tok::True,
                "false" => Tok::False,
                _ => Tok::Ident(word),
            };
            push(tok, &mut out);
            continue;
        }
        let next = chars.get(i + 1).copied();
        let next2 = chars.get(i + 2).copied();
        let (tok, n) = match c {
            '~' | '!' => (Tok::Tilde, 1),
            '&' => (Tok::Amp, 1),
            '|' => (Tok::Pipe, 1),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '[' => (Tok::LBrack, 1),
            ']' => (Tok::RBrack, 1),
            ';' => (Tok::Semi, 1),
            ':' => (Tok::Colon, 1),
            ',' => (Tok::Comma, 1),
            '>' => (Tok::Gt, 1),
            '-' if next == Some('>') => (Tok::Arrow, 2),
            '<' if next == Some('-') && next2 == Some('>') => (Tok::Iff, 3),
            '<' => (Tok::Lt, 1),
            other => {
                return Err(ParseError {
                    line: tl,
                    col: tc,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        push(tok, &mut out);
        adv(n, &mut i, &mut col);
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parser

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: lex(src)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        let s = &self.toks[self.pos];
        ParseError { line: s.line, col: s.col, message: message.into() }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error_here(format!("expected {want}, found {}", self.peek())))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => Err(self.error_here(format!("expected identifier, found {other}"))),
        }
    }

    fn formula(&mut self) -> Result<Modal, ParseError> {
        let mut lhs = self.implication()?;
        while *self.peek() == Tok::Iff {
            self.bump();
            let rhs = self.implication()?;
            lhs = Modal::Iff(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Modal, ParseError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.implication()?;
            return Ok(Modal::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Modal, ParseError> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            let rhs = self.conjunction()?;
            lhs = Modal::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Modal, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.unary()?;
            lhs = Modal::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Modal, ParseError> {
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                Ok(Modal::Not(Box::new(self.unary()?)))
            }
            Tok::LBrack => {
                self.bump();
                let a = self.ident()?;
                self.expect(Tok::RBrack)?;
                Ok(Modal::Nec(a, Box::new(self.unary()?)))
            }
            Tok::Lt => {
                self.bump();
                let a = self.ident()?;
                self.expect(Tok::Gt)?;
                Ok(Modal::Poss(a, Box::new(self.unary()?)))
            }
            Tok::True => {
                self.bump();
                Ok(Modal::True)
            }
            Tok::False => {
                self.bump();
                Ok(Modal::False)
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(Modal::Atom(s))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            other => Err(self.error_here(format!("expected a formula, found {other}"))),
        }
    }

    fn ident_list(&mut self) -> Result<Vec<(String, usize, usize)>, ParseError> {
        let mut out = Vec::new();
        if *self.peek() == Tok::Semi {
            return Ok(out);
        }
        loop {
            let s = &self.toks[self.pos];
            let (line, col) = (s.line, s.col);
            out.push((self.ident()?, line, col));
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        Ok(out)
    }
}

/// Parses a single modal formula.
pub fn parse_formula(text: &str) -> Result<Modal, ParseError> {
    let mut p = Parser::new(text)?;
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error_here(format!("unexpected {} after formula", p.peek())));
    }
    Ok(f)
}

/// Parses a single Boolean formula.
pub fn parse_bool(text: &str) -> Result<Bool, ParseError> {
    let m = parse_formula(text)?;
    m.to_bool().ok_or_else(|| ParseError {
        line: 1,
        col: 1,
        message: "modal operators are not allowed here".into(),
    })
}

/// Parses a single law (`phi`, `phi -> [a] psi` or `phi -> <a> true`).
/// An optional trailing `;` is accepted.
pub fn parse_law(text: &str) -> Result<Law, ParseError> {
    let mut p = Parser::new(text)?;
    let f = p.formula()?;
    if *p.peek() == Tok::Semi {
        p.bump();
    }
    if *p.peek() != Tok::Eof {
        return Err(p.error_here(format!("unexpected {} after law", p.peek())));
    }
    Law::from_modal(&f).ok_or_else(|| ParseError {
        line: 1,
        col: 1,
        message: format!("`{}` is not a static, effect or executability law", render_modal(&f)),
    })
}

/// A parsed theory together with non-fatal diagnostics.
#[derive(Clone, Debug)]
pub struct ParsedTheory {
    pub theory: Theory,
    pub warnings: Vec<String>,
}

/// Parses a theory file.
pub fn parse_theory(text: &str) -> Result<Theory, ParseError> {
    parse_theory_with_warnings(text).map(|p| p.theory)
}

/// Parses a theory file, reporting duplicate laws as warnings.
pub fn parse_theory_with_warnings(text: &str) -> Result<ParsedTheory, ParseError> {
    let mut p = Parser::new(text)?;
    let mut sig = Signature::default();
    let sig_err = |e: Error, line: usize, col: usize| ParseError { line, col, message: e.to_string() };

    // Optional header.
    if matches!(p.peek(), Tok::Ident(s) if s == "atoms") && *p.peek_at(1) == Tok::Colon {
        p.bump();
        p.bump();
        for (a, l, c) in p.ident_list()? {
            if sig.has_atom(&a) {
                return Err(ParseError { line: l, col: c, message: format!("atom `{a}` declared twice") });
            }
            sig.add_atom(&a).map_err(|e| sig_err(e, l, c))?;
        }
        p.expect(Tok::Semi)?;
    }
    if matches!(p.peek(), Tok::Ident(s) if s == "actions") && *p.peek_at(1) == Tok::Colon {
        p.bump();
        p.bump();
        for (a, l, c) in p.ident_list()? {
            if sig.has_action(&a) {
                return Err(ParseError { line: l, col: c, message: format!("action `{a}` declared twice") });
            }
            sig.add_action(&a).map_err(|e| sig_err(e, l, c))?;
        }
        p.expect(Tok::Semi)?;
    }

    let mut laws: Vec<(Law, usize, usize)> = Vec::new();
    while *p.peek() != Tok::Eof {
        let s = &p.toks[p.pos];
        let (line, col) = (s.line, s.col);
        let f = p.formula()?;
        p.expect(Tok::Semi)?;
        let law = Law::from_modal(&f).ok_or_else(|| ParseError {
            line,
            col,
            message: format!("`{}` is not a static, effect or executability law", render_modal(&f)),
        })?;
        // Register symbols in order of first appearance: actions first so that
        // an identifier used in both roles is reported as a clash.
        if let Some(act) = law.action() {
            sig.add_action(act).map_err(|e| sig_err(e, line, col))?;
        }
        let mut order = Vec::new();
        collect_atoms_in_order(&law.to_modal(), &mut order);
        for a in order {
            sig.add_atom(&a).map_err(|e| sig_err(e, line, col))?;
        }
        laws.push((law, line, col));
    }

    let mut theory = Theory::new(sig);
    let mut warnings = Vec::new();
    for (law, line, col) in laws {
        let rendered = render_law(&law);
        let fresh = theory.insert(law).map_err(|e| sig_err(e, line, col))?;
        if !fresh {
            warnings.push(format!("{line}:{col}: duplicate law `{rendered}` ignored"));
        }
    }
    Ok(ParsedTheory { theory, warnings })
}

fn collect_atoms_in_order(m: &Modal, out: &mut Vec<String>) {
    match m {
        Modal::True | Modal::False => {}
        Modal::Atom(a) => {
            if !out.contains(a) {
                out.push(a.clone());
            }
        }
        Modal::Not(a) | Modal::Nec(_, a) | Modal::Poss(_, a) => collect_atoms_in_order(a, out),
        Modal::And(a, b) | Modal::Or(a, b) | Modal::Implies(a, b) | Modal::Iff(a, b) => {
            collect_atoms_in_order(a, out);
            collect_atoms_in_order(b, out);
        }
    }
}
