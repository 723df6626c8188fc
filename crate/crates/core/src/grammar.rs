//! Static analysis of content models: first sets, empty-match admissibility,
//! `@` insertion, LL(1) checks and per-kind operator validation.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::GrammarError;
use crate::model::{DefTable, Definition, Expr, Ident, Kind, Path};

/// Something that can start a match: an opening tag or character data.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Chars,
    Tag(Ident),
}

impl Symbol {
    pub fn tag(name: &str) -> Symbol {
        Symbol::Tag(Ident::must(name))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Chars => f.write_str("#chars"),
            Symbol::Tag(t) => t.fmt(f),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FirstSet(pub BTreeSet<Symbol>);

impl FirstSet {
    pub fn contains(&self, s: &Symbol) -> bool {
        self.0.contains(s)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn union_with(&mut self, other: FirstSet) {
        self.0.extend(other.0);
    }

    pub fn intersection(&self, other: &FirstSet) -> FirstSet {
        FirstSet(self.0.intersection(&other.0).cloned().collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Symbol> {
        self.0.iter()
    }
}

impl FromIterator<Symbol> for FirstSet {
    fn from_iter<I: IntoIterator<Item = Symbol>>(iter: I) -> Self {
        FirstSet(iter.into_iter().collect())
    }
}

impl fmt::Display for FirstSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            s.fmt(f)?;
        }
        f.write_str("}")
    }
}

struct Analyzer<'a> {
    defs: &'a DefTable,
    inserting: Vec<String>,
}

impl<'a> Analyzer<'a> {
    fn new(defs: &'a DefTable) -> Self {
        Analyzer {
            defs,
            inserting: Vec::new(),
        }
    }

    fn lookup(&self, p: &Path) -> Result<&'a Definition, GrammarError> {
        self.defs.get(p).ok_or_else(|| GrammarError::Unresolved { path: p.to_string() })
    }

    fn with_insert<T>(
        &mut self,
        p: &Path,
        f: impl FnOnce(&mut Self, &'a Expr) -> Result<T, GrammarError>,
    ) -> Result<T, GrammarError> {
        let key = p.key();
        if let Some(at) = self.inserting.iter().position(|k| *k == key) {
            let mut cycle = self.inserting[at..].to_vec();
            cycle.push(key);
            return Err(GrammarError::InsertCycle { cycle });
        }
        let def = self.lookup(p)?;
        self.inserting.push(key);
        let out = f(self, &def.expr);
        self.inserting.pop();
        out
    }

    fn first(&mut self, e: &Expr) -> Result<FirstSet, GrammarError> {
        Ok(match e {
            Expr::Ref(p) => FirstSet::from_iter([Symbol::Tag(self.lookup(p)?.tag.clone())]),
            Expr::Insert(p) => self.with_insert(p, |a, inner| a.first(inner))?,
            Expr::Chars => FirstSet::from_iter([Symbol::Chars]),
            Expr::Seq(items) => {
                let mut out = FirstSet::default();
                for item in items {
                    out.union_with(self.first(item)?);
                    if !self.pot_eps(item)? {
                        break;
                    }
                }
                out
            }
            Expr::Alt(items) | Expr::Perm(items) => {
                let mut out = FirstSet::default();
                for item in items {
                    out.union_with(self.first(item)?);
                }
                out
            }
            Expr::Plus(b) | Expr::Star(b) | Expr::Opt(b) => self.first(b)?,
            Expr::LocalSubst { .. } => self.first(&crate::ddf::apply_local_subst(e).0)?,
            // Character-level operators never start a tag-level match.
            _ => FirstSet::default(),
        })
    }

    fn pot_eps(&mut self, e: &Expr) -> Result<bool, GrammarError> {
        Ok(match e {
            Expr::Ref(p) => {
                self.lookup(p)?;
                false
            }
            Expr::Insert(p) => self.with_insert(p, |a, inner| a.pot_eps(inner))?,
            Expr::Chars | Expr::None => false,
            Expr::Empty | Expr::Star(_) | Expr::Opt(_) => true,
            Expr::Seq(items) | Expr::Perm(items) => {
                for item in items {
                    if !self.pot_eps(item)? {
                        return Ok(false);
                    }
                }
                true
            }
            Expr::Alt(items) => {
                for item in items {
                    if self.pot_eps(item)? {
                        return Ok(true);
                    }
                }
                false
            }
            Expr::Plus(b) => self.pot_eps(b)?,
            Expr::LocalSubst { .. } => self.pot_eps(&crate::ddf::apply_local_subst(e).0)?,
            _ => false,
        })
    }

    fn expand(&mut self, e: &Expr) -> Result<Expr, GrammarError> {
        let mut err = None;
        let out = e.map_bottom_up(&mut |node| match node {
            Expr::Insert(ref p) if err.is_none() => {
                match self.with_insert(p, |a, inner| a.expand(inner)) {
                    Ok(x) => x,
                    Err(e) => {
                        err = Some(e);
                        node
                    }
                }
            }
            other => other,
        });
        match err {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }
}

/// Tags (or `#chars`) that can begin a match of `e`.
pub fn first(e: &Expr, defs: &DefTable) -> Result<FirstSet, GrammarError> {
    Analyzer::new(defs).first(e)
}

/// Whether `e` accepts the empty token sequence. A reference is never
/// empty: an element always yields a node.
pub fn pot_eps(e: &Expr, defs: &DefTable) -> Result<bool, GrammarError> {
    Analyzer::new(defs).pot_eps(e)
}

/// Replaces every `@path` by the referenced definition's expression,
/// recursively.
pub fn expand_inserts(e: &Expr, defs: &DefTable) -> Result<Expr, GrammarError> {
    Analyzer::new(defs).expand(e)
}

/// LL(1) conflict found in a tags definition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub def: String,
    /// Child indices from the definition's root expression, `/`-separated.
    pub path: String,
    pub overlap: FirstSet,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.overlap.is_empty() {
            write!(f, "{}: {}", self.def, self.message)
        } else {
            write!(f, "{}: overlapping first set {} ({} at {})", self.def, self.overlap, self.message, self.path)
        }
    }
}

struct Ll1<'a> {
    defs: &'a DefTable,
    def: String,
    out: Vec<Diagnostic>,
}

impl Ll1<'_> {
    fn first(&self, e: &Expr) -> FirstSet {
        first(e, self.defs).unwrap_or_default()
    }

    fn pot_eps(&self, e: &Expr) -> bool {
        pot_eps(e, self.defs).unwrap_or(false)
    }

    fn report(&mut self, path: &str, overlap: FirstSet, message: &str) {
        if !overlap.is_empty() {
            self.out.push(Diagnostic {
                def: self.def.clone(),
                path: if path.is_empty() { "/".into() } else { path.into() },
                overlap,
                message: message.into(),
            });
        }
    }

    fn pairwise(&self, items: &[Expr]) -> FirstSet {
        let firsts: Vec<FirstSet> = items.iter().map(|i| self.first(i)).collect();
        let mut overlap = FirstSet::default();
        for (i, a) in firsts.iter().enumerate() {
            for b in &firsts[i + 1..] {
                overlap.union_with(a.intersection(b));
            }
        }
        overlap
    }

    fn check(&mut self, e: &Expr, follow: &FirstSet, path: &str) {
        let sub = |i: usize| format!("{path}/{i}");
        match e {
            Expr::Alt(items) => {
                let overlap = self.pairwise(items);
                self.report(path, overlap, "alternatives");
                if items.iter().any(|i| self.pot_eps(i)) {
                    let mut starts = FirstSet::default();
                    for i in items.iter().filter(|i| !self.pot_eps(i)) {
                        starts.union_with(self.first(i));
                    }
                    self.report(path, starts.intersection(follow), "optional alternative and its follower");
                }
                for (i, item) in items.iter().enumerate() {
                    self.check(item, follow, &sub(i));
                }
            }
            Expr::Perm(items) => {
                let overlap = self.pairwise(items);
                self.report(path, overlap, "permutation branches");
                for (i, item) in items.iter().enumerate() {
                    let mut f = follow.clone();
                    for (j, other) in items.iter().enumerate() {
                        if i != j {
                            f.union_with(self.first(other));
                        }
                    }
                    self.check(item, &f, &sub(i));
                }
            }
            Expr::Seq(items) => {
                let mut f = follow.clone();
                let mut followers = vec![FirstSet::default(); items.len()];
                for i in (0..items.len()).rev() {
                    followers[i] = f.clone();
                    let item_first = self.first(&items[i]);
                    if self.pot_eps(&items[i]) {
                        f.union_with(item_first);
                    } else {
                        f = item_first;
                    }
                }
                for (i, item) in items.iter().enumerate() {
                    self.check(item, &followers[i], &sub(i));
                }
            }
            Expr::Opt(b) => {
                self.report(path, self.first(b).intersection(follow), "optional part and its follower");
                self.check(b, follow, &sub(0));
            }
            Expr::Star(b) | Expr::Plus(b) => {
                let body = self.first(b);
                self.report(path, body.intersection(follow), "repetition and its follower");
                let mut f = follow.clone();
                f.union_with(body);
                self.check(b, &f, &sub(0));
            }
            _ => {}
        }
    }
}

/// LL(1) check of a tags definition. An empty result means every choice the
/// tag parser makes (alternative, permutation branch, another repetition,
/// optional part, or leaving the construct) is decided by the next token.
pub fn validate_ll1(def: &Definition, defs: &DefTable) -> Vec<Diagnostic> {
    let name = def.tag.to_string();
    let expr = match expand_inserts(&def.expr, defs) {
        Ok(e) => e,
        Err(err) => {
            return vec![Diagnostic {
                def: name,
                path: "/".into(),
                overlap: FirstSet::default(),
                message: err.to_string(),
            }]
        }
    };
    let mut ll1 = Ll1 {
        defs,
        def: name,
        out: Vec::new(),
    };
    ll1.check(&expr, &FirstSet::default(), "");
    ll1.out
}

fn is_char_level(e: &Expr) -> bool {
    matches!(
        e,
        Expr::Literal(_)
            | Expr::CharSet(_)
            | Expr::NumericChar(_)
            | Expr::Range(..)
            | Expr::Union(..)
            | Expr::Intersect(..)
            | Expr::Minus(..)
            | Expr::TightSeq(_)
            | Expr::TightPlus(_)
            | Expr::TightStar(_)
            | Expr::Greedy(_)
            | Expr::Capture(..)
    )
}

/// Checks operator usage against the definition's kind and that every
/// reference resolves. Call on expressions with insertions expanded.
pub fn validate_definition(key: &str, def: &Definition, defs: &DefTable) -> Vec<GrammarError> {
    let mut errors = Vec::new();
    let invalid = |message: String| GrammarError::Invalid {
        def: key.to_string(),
        message,
    };
    def.expr.walk(&mut |e| {
        match e {
            Expr::Ref(p) | Expr::Insert(p) => match defs.get(p) {
                None => errors.push(GrammarError::Unresolved { path: p.to_string() }),
                Some(target) if def.kind == Kind::Chars && matches!(e, Expr::Ref(_)) => {
                    if target.kind != Kind::Chars {
                        errors.push(invalid(format!(
                            "character parser refers to tags definition {p}"
                        )));
                    }
                }
                _ => {}
            },
            Expr::LocalSubst { .. } => {
                errors.push(invalid("unresolved local substitution".into()))
            }
            _ => {}
        }
        match def.kind {
            Kind::Tags if is_char_level(e) => errors.push(invalid(format!(
                "character-level operator in tags definition: {e}"
            ))),
            Kind::Chars => match e {
                Expr::Perm(_) => errors.push(invalid(
                    "permutation is not supported on the character level".into(),
                )),
                Expr::Chars => errors.push(invalid("#chars inside a character parser".into())),
                _ => {}
            },
            _ => {}
        }
        match e {
            Expr::Union(a, b) | Expr::Intersect(a, b) | Expr::Minus(a, b) => {
                for operand in [a, b] {
                    if !operand.is_char_class() {
                        errors.push(invalid(format!(
                            "set operator applied to a non-class operand: {operand}"
                        )));
                    }
                }
            }
            Expr::Range(lo, hi) => {
                if !e.is_char_class() {
                    errors.push(invalid(format!("range bounds must be single characters: {lo}..{hi}")));
                }
            }
            _ => {}
        }
    });
    errors
}

/// A definition table with all insertions expanded and all references
/// checked; what the parsers run against.
#[derive(Debug, Clone)]
pub struct Grammar {
    defs: DefTable,
}

impl Grammar {
    pub fn new(defs: &DefTable) -> Result<Self, GrammarError> {
        let mut expanded = defs.clone();
        let mut failure = None;
        expanded.map_exprs(|_, e| match expand_inserts(&crate::ddf::apply_local_subst(e).0, defs) {
            Ok(x) => x,
            Err(err) => {
                failure.get_or_insert(err);
                e.clone()
            }
        });
        if let Some(err) = failure {
            return Err(err);
        }
        for (_, def) in expanded.iter() {
            let mut missing = None;
            def.expr.walk(&mut |e| {
                if let Expr::Ref(p) = e {
                    if expanded.get(p).is_none() && missing.is_none() {
                        missing = Some(p.to_string());
                    }
                }
            });
            if let Some(path) = missing {
                return Err(GrammarError::Unresolved { path });
            }
        }
        Ok(Grammar { defs: expanded })
    }

    pub fn defs(&self) -> &DefTable {
        &self.defs
    }

    pub fn def(&self, p: &Path) -> &Definition {
        self.defs.get(p).expect("references are checked when the grammar is built")
    }

    pub fn first(&self, e: &Expr) -> FirstSet {
        first(e, &self.defs).expect("validated grammar")
    }

    pub fn pot_eps(&self, e: &Expr) -> bool {
        pot_eps(e, &self.defs).expect("validated grammar")
    }

    pub fn accepts_first(&self, e: &Expr, s: &Symbol) -> bool {
        self.first(e).contains(s)
    }
}
