//! Shared domain types: tokens, content-model expressions, result trees and
//! definitions. Nothing in here parses anything.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::ModelError;

/// An element or definition name.
///
/// Identifiers start with an ASCII letter and continue with ASCII letters,
/// digits, `-` or `_`. They never contain whitespace, the command character
/// or any of the default parenthesis characters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ident(String);

impl Ident {
    pub fn new(name: impl Into<String>) -> Result<Self, ModelError> {
        let name = name.into();
        if Self::is_valid(&name) {
            Ok(Ident(name))
        } else {
            Err(ModelError::InvalidIdent(name))
        }
    }

    /// Builds an identifier from a string known to be valid.
    ///
    /// Panics on invalid input; meant for literals in code and tests.
    pub fn must(name: &str) -> Self {
        Self::new(name).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn is_valid(name: &str) -> bool {
        let mut chars = name.chars();
        match chars.next() {
            Some(c) if c.is_ascii_alphabetic() => chars.all(is_ident_continue),
            _ => false,
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

pub(crate) fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '-' || c == '_'
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Ident {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// A dotted reference such as `k1.k2.def`. Import keys are leading segments.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path(Vec<Ident>);

impl Path {
    pub fn new(segments: Vec<Ident>) -> Result<Self, ModelError> {
        if segments.is_empty() {
            return Err(ModelError::EmptyPath);
        }
        Ok(Path(segments))
    }

    pub fn single(id: Ident) -> Self {
        Path(vec![id])
    }

    /// Parses `a.b.c`. Panics on invalid input.
    pub fn must(dotted: &str) -> Self {
        Self::parse(dotted).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn parse(dotted: &str) -> Result<Self, ModelError> {
        let segments = dotted
            .split('.')
            .map(Ident::new)
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(segments)
    }

    pub fn segments(&self) -> &[Ident] {
        &self.0
    }

    pub fn last(&self) -> &Ident {
        self.0.last().expect("paths are non-empty")
    }

    pub fn prefixed(&self, prefix: &[Ident]) -> Path {
        let mut segments = prefix.to_vec();
        segments.extend(self.0.iter().cloned());
        Path(segments)
    }

    /// The lookup key used by [`DefTable`].
    pub fn key(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, seg) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            f.write_str(seg.as_str())?;
        }
        Ok(())
    }
}

/// Source location of a token: 1-based line and column, 0-based byte offset.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: u32,
    pub column: u32,
    pub offset: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// Target of a closing tag: a named element or the innermost one (`#/`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CloseTarget {
    Tag(Ident),
    Wildcard,
}

impl fmt::Display for CloseTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CloseTarget::Tag(t) => t.fmt(f),
            CloseTarget::Wildcard => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Chars(String),
    Comment(String),
    Open(Ident),
    Close(CloseTarget),
    CloseForced(CloseTarget),
    Empty(Ident),
    EmptyForced(Ident),
    Warning(String),
    Error(String),
    Eof,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub kind: TokenKind,
    pub pos: Pos,
}

impl Token {
    pub fn new(kind: TokenKind, pos: Pos) -> Self {
        Token { kind, pos }
    }

    /// A token at the default position, for building streams by hand.
    pub fn bare(kind: TokenKind) -> Self {
        Token { kind, pos: Pos::default() }
    }

    /// Short kind name used by the token dump.
    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            TokenKind::Chars(_) => "CHARS",
            TokenKind::Comment(_) => "COMMENT",
            TokenKind::Open(_) => "OPEN",
            TokenKind::Close(_) => "CLOSE",
            TokenKind::CloseForced(_) => "CLOSE_FORCED",
            TokenKind::Empty(_) => "EMPTY",
            TokenKind::EmptyForced(_) => "EMPTY_FORCED",
            TokenKind::Warning(_) => "WARNING",
            TokenKind::Error(_) => "ERROR",
            TokenKind::Eof => "EOF",
        }
    }

    /// Tag name or text payload, unescaped.
    pub fn payload(&self) -> String {
        match &self.kind {
            TokenKind::Chars(s)
            | TokenKind::Comment(s)
            | TokenKind::Warning(s)
            | TokenKind::Error(s) => s.clone(),
            TokenKind::Open(t) | TokenKind::Empty(t) | TokenKind::EmptyForced(t) => t.to_string(),
            TokenKind::Close(t) | TokenKind::CloseForced(t) => match t {
                CloseTarget::Tag(t) => t.to_string(),
                CloseTarget::Wildcard => "_".to_string(),
            },
            TokenKind::Eof => String::new(),
        }
    }

    /// Approximate source spelling, used when a token is reported as skipped.
    pub fn source_text(&self, command: char) -> String {
        match &self.kind {
            TokenKind::Chars(s) => s.clone(),
            TokenKind::Comment(s) => format!("/*{s}*/"),
            TokenKind::Open(t) => format!("{command}{t}"),
            TokenKind::Close(t) => format!("{command}/{t}"),
            TokenKind::CloseForced(t) => format!("{command}///{t}"),
            TokenKind::Empty(t) => format!("{command}{t}/"),
            TokenKind::EmptyForced(t) => format!("{command}{t}///"),
            TokenKind::Warning(m) => format!("warning: {m}"),
            TokenKind::Error(m) => format!("error: {m}"),
            TokenKind::Eof => format!("{command}eof"),
        }
    }
}

/// Content-model expression, shared by tag-level and character-level parsers.
///
/// `Seq`, `Alt` and `TightSeq` are kept flat: the smart constructors splice
/// nested chains of the same operator into one list. `Perm` is not
/// associative (`(a&b)&c` differs from `a&b&c`) and is never spliced.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    /// `"…"`: matches the exact string.
    Literal(String),
    /// `'…'`: matches one character out of the listed ones.
    CharSet(String),
    /// `0x41`: matches one character given by code point.
    NumericChar(char),
    /// `lo .. hi`
    Range(Box<Expr>, Box<Expr>),
    /// `U`
    Union(Box<Expr>, Box<Expr>),
    /// `A`
    Intersect(Box<Expr>, Box<Expr>),
    /// `-`
    Minus(Box<Expr>, Box<Expr>),
    /// `~`
    TightSeq(Vec<Expr>),
    /// `~+`
    TightPlus(Box<Expr>),
    /// `~*`
    TightStar(Box<Expr>),
    /// `> T`
    Greedy(Box<Expr>),
    /// `[ id T ]`
    Capture(Ident, Box<Expr>),
    /// `#chars`
    Chars,
    /// `,`
    Seq(Vec<Expr>),
    Plus(Box<Expr>),
    Star(Box<Expr>),
    Opt(Box<Expr>),
    /// `&`
    Perm(Vec<Expr>),
    /// `|`
    Alt(Vec<Expr>),
    /// `base ^( replacement / target )`
    LocalSubst {
        base: Box<Expr>,
        replacement: Box<Expr>,
        target: Ident,
    },
    Ref(Path),
    /// `@path`
    Insert(Path),
    /// `#empty`
    Empty,
    /// `#none`
    None,
}

impl Expr {
    pub fn reference(dotted: &str) -> Expr {
        Expr::Ref(Path::must(dotted))
    }

    pub fn insert(dotted: &str) -> Expr {
        Expr::Insert(Path::must(dotted))
    }

    pub fn literal(s: &str) -> Expr {
        Expr::Literal(s.to_string())
    }

    pub fn charset(s: &str) -> Expr {
        Expr::CharSet(s.to_string())
    }

    pub fn seq(items: impl IntoIterator<Item = Expr>) -> Expr {
        Self::flat(items, Expr::Seq, |e| match e {
            Expr::Seq(v) => Ok(v),
            other => Err(other),
        })
    }

    pub fn alt(items: impl IntoIterator<Item = Expr>) -> Expr {
        Self::flat(items, Expr::Alt, |e| match e {
            Expr::Alt(v) => Ok(v),
            other => Err(other),
        })
    }

    pub fn tight_seq(items: impl IntoIterator<Item = Expr>) -> Expr {
        Self::flat(items, Expr::TightSeq, |e| match e {
            Expr::TightSeq(v) => Ok(v),
            other => Err(other),
        })
    }

    /// Builds a permutation. A single branch collapses to itself; no
    /// splicing of nested permutations.
    pub fn perm(items: impl IntoIterator<Item = Expr>) -> Expr {
        let mut items: Vec<Expr> = items.into_iter().collect();
        match items.len() {
            0 => Expr::Empty,
            1 => items.pop().unwrap(),
            _ => Expr::Perm(items),
        }
    }

    fn flat(
        items: impl IntoIterator<Item = Expr>,
        build: fn(Vec<Expr>) -> Expr,
        split: fn(Expr) -> Result<Vec<Expr>, Expr>,
    ) -> Expr {
        let mut out = Vec::new();
        for item in items {
            match split(item) {
                Ok(inner) => out.extend(inner),
                Err(other) => out.push(other),
            }
        }
        match out.len() {
            0 => Expr::Empty,
            1 => out.pop().unwrap(),
            _ => build(out),
        }
    }

    pub fn plus(e: Expr) -> Expr {
        Expr::Plus(Box::new(e))
    }

    pub fn star(e: Expr) -> Expr {
        Expr::Star(Box::new(e))
    }

    pub fn opt(e: Expr) -> Expr {
        Expr::Opt(Box::new(e))
    }

    pub fn tight_star(e: Expr) -> Expr {
        Expr::TightStar(Box::new(e))
    }

    pub fn tight_plus(e: Expr) -> Expr {
        Expr::TightPlus(Box::new(e))
    }

    pub fn greedy(e: Expr) -> Expr {
        Expr::Greedy(Box::new(e))
    }

    pub fn capture(id: &str, e: Expr) -> Expr {
        Expr::Capture(Ident::must(id), Box::new(e))
    }

    /// Items of a sequence; any other expression is a sequence of one.
    pub fn seq_items(&self) -> &[Expr] {
        match self {
            Expr::Seq(items) => items,
            other => std::slice::from_ref(other),
        }
    }

    /// True for the character-class fragment: sets, code points, ranges and
    /// set algebra over those.
    pub fn is_char_class(&self) -> bool {
        match self {
            Expr::CharSet(_) | Expr::NumericChar(_) => true,
            Expr::Range(lo, hi) => lo.is_single_char() && hi.is_single_char(),
            Expr::Union(a, b) | Expr::Intersect(a, b) | Expr::Minus(a, b) => {
                a.is_char_class() && b.is_char_class()
            }
            _ => false,
        }
    }

    /// A class denoting exactly one code point, usable as a range bound.
    pub fn single_char(&self) -> Option<char> {
        match self {
            Expr::NumericChar(c) => Some(*c),
            Expr::CharSet(s) | Expr::Literal(s) => {
                let mut it = s.chars();
                match (it.next(), it.next()) {
                    (Some(c), None) => Some(c),
                    _ => None,
                }
            }
            _ => None,
        }
    }

    fn is_single_char(&self) -> bool {
        matches!(self, Expr::CharSet(_) | Expr::NumericChar(_)) && self.single_char().is_some()
    }

    /// Membership test for character-class expressions. Non-class
    /// expressions contain nothing.
    pub fn class_contains(&self, c: char) -> bool {
        match self {
            Expr::CharSet(s) => s.contains(c),
            Expr::NumericChar(x) => *x == c,
            Expr::Range(lo, hi) => match (lo.single_char(), hi.single_char()) {
                (Some(lo), Some(hi)) => lo <= c && c <= hi,
                _ => false,
            },
            Expr::Union(a, b) => a.class_contains(c) || b.class_contains(c),
            Expr::Intersect(a, b) => a.class_contains(c) && b.class_contains(c),
            Expr::Minus(a, b) => a.class_contains(c) && !b.class_contains(c),
            _ => false,
        }
    }

    /// Calls `f` on every direct sub-expression.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Literal(_)
            | Expr::CharSet(_)
            | Expr::NumericChar(_)
            | Expr::Chars
            | Expr::Ref(_)
            | Expr::Insert(_)
            | Expr::Empty
            | Expr::None => Vec::new(),
            Expr::Range(a, b) | Expr::Union(a, b) | Expr::Intersect(a, b) | Expr::Minus(a, b) => {
                vec![a, b]
            }
            Expr::TightSeq(v) | Expr::Seq(v) | Expr::Perm(v) | Expr::Alt(v) => v.iter().collect(),
            Expr::TightPlus(e)
            | Expr::TightStar(e)
            | Expr::Greedy(e)
            | Expr::Capture(_, e)
            | Expr::Plus(e)
            | Expr::Star(e)
            | Expr::Opt(e) => vec![e],
            Expr::LocalSubst {
                base, replacement, ..
            } => vec![base, replacement],
        }
    }

    /// Rebuilds the expression bottom-up, letting `f` replace any node after
    /// its children were rebuilt. Smart constructors re-flatten lists.
    pub fn map_bottom_up(&self, f: &mut impl FnMut(Expr) -> Expr) -> Expr {
        let rebuilt = match self {
            Expr::Literal(_)
            | Expr::CharSet(_)
            | Expr::NumericChar(_)
            | Expr::Chars
            | Expr::Ref(_)
            | Expr::Insert(_)
            | Expr::Empty
            | Expr::None => self.clone(),
            Expr::Range(a, b) => Expr::Range(bx(a.map_bottom_up(f)), bx(b.map_bottom_up(f))),
            Expr::Union(a, b) => Expr::Union(bx(a.map_bottom_up(f)), bx(b.map_bottom_up(f))),
            Expr::Intersect(a, b) => {
                Expr::Intersect(bx(a.map_bottom_up(f)), bx(b.map_bottom_up(f)))
            }
            Expr::Minus(a, b) => Expr::Minus(bx(a.map_bottom_up(f)), bx(b.map_bottom_up(f))),
            Expr::TightSeq(v) => Expr::tight_seq(v.iter().map(|e| e.map_bottom_up(f))),
            Expr::Seq(v) => Expr::seq(v.iter().map(|e| e.map_bottom_up(f))),
            Expr::Alt(v) => Expr::alt(v.iter().map(|e| e.map_bottom_up(f))),
            Expr::Perm(v) => Expr::Perm(v.iter().map(|e| e.map_bottom_up(f)).collect()),
            Expr::TightPlus(e) => Expr::TightPlus(bx(e.map_bottom_up(f))),
            Expr::TightStar(e) => Expr::TightStar(bx(e.map_bottom_up(f))),
            Expr::Greedy(e) => Expr::Greedy(bx(e.map_bottom_up(f))),
            Expr::Capture(id, e) => Expr::Capture(id.clone(), bx(e.map_bottom_up(f))),
            Expr::Plus(e) => Expr::Plus(bx(e.map_bottom_up(f))),
            Expr::Star(e) => Expr::Star(bx(e.map_bottom_up(f))),
            Expr::Opt(e) => Expr::Opt(bx(e.map_bottom_up(f))),
            Expr::LocalSubst {
                base,
                replacement,
                target,
            } => Expr::LocalSubst {
                base: bx(base.map_bottom_up(f)),
                replacement: bx(replacement.map_bottom_up(f)),
                target: target.clone(),
            },
        };
        f(rebuilt)
    }

    /// Visits the expression and all sub-expressions, pre-order.
    pub fn walk(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    /// Re-normalizes list operators after manual construction.
    pub fn normalized(&self) -> Expr {
        self.map_bottom_up(&mut |e| e)
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }
}

fn bx(e: Expr) -> Box<Expr> {
    Box::new(e)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_expr(self))
    }
}

// Binding strength, loosest first.
const P_ALT: u8 = 1;
const P_PERM: u8 = 2;
const P_SEQ: u8 = 3;
const P_TIGHT: u8 = 4;
const P_PREFIX: u8 = 5;
const P_POSTFIX: u8 = 6;
const P_SET: u8 = 7;
const P_RANGE: u8 = 8;
const P_ATOM: u8 = 9;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Alt(_) => P_ALT,
        Expr::Perm(_) => P_PERM,
        Expr::Seq(_) => P_SEQ,
        Expr::TightSeq(_) => P_TIGHT,
        Expr::Union(..) | Expr::Intersect(..) | Expr::Minus(..) => P_SET,
        Expr::Range(..) => P_RANGE,
        Expr::Greedy(_) => P_PREFIX,
        Expr::TightPlus(_)
        | Expr::TightStar(_)
        | Expr::Plus(_)
        | Expr::Star(_)
        | Expr::Opt(_)
        | Expr::LocalSubst { .. } => P_POSTFIX,
        _ => P_ATOM,
    }
}

/// Renders an expression in concrete ddf syntax with minimal parentheses.
///
/// `parse_expr(&render_expr(e))` yields `e` back for normalized input.
pub fn render_expr(e: &Expr) -> String {
    let mut out = String::new();
    render_into(e, &mut out);
    out
}

fn render_at(e: &Expr, min: u8, out: &mut String) {
    if precedence(e) < min {
        out.push('(');
        render_into(e, out);
        out.push(')');
    } else {
        render_into(e, out);
    }
}

fn render_list(items: &[Expr], sep: &str, level: u8, out: &mut String) {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(sep);
        }
        // Same-level children need parentheses: flat lists never nest
        // themselves, and a nested permutation must stay grouped.
        render_at(item, level + 1, out);
    }
}

fn render_quoted(s: &str, quote: char, out: &mut String) {
    out.push(quote);
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if c == quote => {
                out.push('\\');
                out.push(c);
            }
            c => out.push(c),
        }
    }
    out.push(quote);
}

fn render_into(e: &Expr, out: &mut String) {
    match e {
        Expr::Literal(s) => render_quoted(s, '"', out),
        Expr::CharSet(s) => render_quoted(s, '\'', out),
        Expr::NumericChar(c) => out.push_str(&format!("0x{:X}", *c as u32)),
        Expr::Range(lo, hi) => {
            render_at(lo, P_RANGE + 1, out);
            out.push_str("..");
            render_at(hi, P_RANGE + 1, out);
        }
        Expr::Union(a, b) | Expr::Intersect(a, b) | Expr::Minus(a, b) => {
            let op = match e {
                Expr::Union(..) => " U ",
                Expr::Intersect(..) => " A ",
                _ => " - ",
            };
            render_at(a, P_SET, out);
            out.push_str(op);
            render_at(b, P_SET + 1, out);
        }
        Expr::TightSeq(items) => render_list(items, "~", P_TIGHT, out),
        Expr::Seq(items) => render_list(items, ",", P_SEQ, out),
        Expr::Perm(items) => render_list(items, "&", P_PERM, out),
        Expr::Alt(items) => render_list(items, "|", P_ALT, out),
        Expr::TightPlus(b) => {
            render_at(b, P_POSTFIX, out);
            out.push_str("~+");
        }
        Expr::TightStar(b) => {
            render_at(b, P_POSTFIX, out);
            out.push_str("~*");
        }
        Expr::Plus(b) => {
            render_at(b, P_POSTFIX, out);
            out.push('+');
        }
        Expr::Star(b) => {
            render_at(b, P_POSTFIX, out);
            out.push('*');
        }
        Expr::Opt(b) => {
            render_at(b, P_POSTFIX, out);
            out.push('?');
        }
        Expr::LocalSubst {
            base,
            replacement,
            target,
        } => {
            render_at(base, P_POSTFIX, out);
            out.push_str("^(");
            render_into(replacement, out);
            out.push('/');
            out.push_str(target.as_str());
            out.push(')');
        }
        Expr::Greedy(b) => {
            out.push('>');
            render_at(b, P_PREFIX, out);
        }
        Expr::Capture(id, b) => {
            out.push('[');
            out.push_str(id.as_str());
            out.push(' ');
            render_into(b, out);
            out.push(']');
        }
        Expr::Chars => out.push_str("#chars"),
        Expr::Ref(p) => out.push_str(&p.to_string()),
        Expr::Insert(p) => {
            out.push('@');
            out.push_str(&p.to_string());
        }
        Expr::Empty => out.push_str("#empty"),
        Expr::None => out.push_str("#none"),
    }
}

/// Vertex of a result tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Element(Element),
    Chars(String),
    Perm(PermRecord),
    /// Mandatory content that was not found; carries the unmatched model.
    Missing(Expr),
    /// Input that could not be placed anywhere; also carries tokenizer
    /// warnings and errors.
    Skipped(Token),
    /// Only produced when comments are kept.
    Comment(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Element {
    pub tag: Ident,
    pub children: Vec<Node>,
    /// Closed with a forced (`///`) tag.
    pub incomplete: bool,
    /// Element name to emit instead of `tag`.
    pub xml_name: Option<String>,
}

impl Element {
    pub fn new(tag: Ident, children: Vec<Node>) -> Self {
        Element {
            tag,
            children,
            incomplete: false,
            xml_name: None,
        }
    }
}

/// Result of a permutation: per-branch content in arrival order, keyed by
/// the branch index into `model`'s list.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PermRecord {
    pub model: Expr,
    pub filled: Vec<(usize, Vec<Node>)>,
}

impl Node {
    pub fn element(tag: &str, children: Vec<Node>) -> Node {
        Node::Element(Element::new(Ident::must(tag), children))
    }

    pub fn chars(s: &str) -> Node {
        Node::Chars(s.to_string())
    }

    pub fn as_element(&self) -> Option<&Element> {
        match self {
            Node::Element(e) => Some(e),
            _ => None,
        }
    }

    /// Pre-order traversal over this node and all descendants.
    pub fn walk(&self, f: &mut impl FnMut(&Node)) {
        f(self);
        match self {
            Node::Element(e) => e.children.iter().for_each(|c| c.walk(f)),
            Node::Perm(p) => p
                .filled
                .iter()
                .flat_map(|(_, nodes)| nodes)
                .for_each(|c| c.walk(f)),
            _ => {}
        }
    }

    /// Counts `Missing` and `Skipped` nodes.
    pub fn diagnostic_count(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |node| {
            if matches!(node, Node::Missing(_) | Node::Skipped(_)) {
                n += 1;
            }
        });
        n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Tags,
    Chars,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Tags => "tags",
            Kind::Chars => "chars",
        })
    }
}

/// Representation hints attached to a definition.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Repr {
    /// Element name written to XML instead of the definition's tag.
    pub xml_tag: Option<String>,
    /// Recorded only; emission ignores it.
    pub namespace: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Definition {
    pub tag: Ident,
    pub kind: Kind,
    pub expr: Expr,
    pub repr: Repr,
    pub pos: Option<Pos>,
}

impl Definition {
    pub fn tags(tag: &str, expr: Expr) -> Self {
        Definition {
            tag: Ident::must(tag),
            kind: Kind::Tags,
            expr,
            repr: Repr::default(),
            pos: None,
        }
    }

    pub fn chars(tag: &str, expr: Expr) -> Self {
        Definition {
            kind: Kind::Chars,
            ..Self::tags(tag, expr)
        }
    }
}

/// The definition table: lookup key (a dotted path) to definition.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DefTable {
    defs: BTreeMap<String, Definition>,
}

impl DefTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Table keyed by each definition's own tag.
    pub fn from_defs(defs: impl IntoIterator<Item = Definition>) -> Self {
        let mut table = DefTable::new();
        for d in defs {
            table.insert(d.tag.to_string(), d);
        }
        table
    }

    pub fn insert(&mut self, key: impl Into<String>, def: Definition) -> Option<Definition> {
        self.defs.insert(key.into(), def)
    }

    pub fn get(&self, path: &Path) -> Option<&Definition> {
        self.defs.get(&path.key())
    }

    pub fn get_key(&self, key: &str) -> Option<&Definition> {
        self.defs.get(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Definition)> {
        self.defs.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    pub(crate) fn map_exprs(&mut self, mut f: impl FnMut(&str, &Expr) -> Expr) {
        for (k, d) in self.defs.iter_mut() {
            d.expr = f(k, &d.expr);
        }
    }
}
