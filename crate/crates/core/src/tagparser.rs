//! Stack-driven LL(1) parsing of the token stream with closing-tag
//! inference. Every input is accepted: tokens that fit nowhere become
//! `Skipped` nodes, absent mandatory content becomes `Missing`.
//!
//! The stack holds four kinds of frames. An element frame stands for an open
//! element. A continuation frame holds what remains of a content model at
//! its level. A repetition frame allows another round of its body. A
//! permutation frame records the branches already seen.

use crate::charparser::{run_char_parser, CharParserConfig};
use crate::error::GrammarError;
use crate::grammar::{Grammar, Symbol};
use crate::model::{
    CloseTarget, Element, Expr, Ident, Kind, Node, Path, PermRecord, Token, TokenKind,
};

/// What to do when an element is closed with a forced (`///`) tag.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum IncompletePolicy {
    /// Mark the element; nothing else.
    #[default]
    Mark,
    /// Mark it and add a warning.
    Warn,
    /// Mark it and count it as a diagnostic.
    Error,
}

#[derive(Debug, Clone)]
pub struct ParseOptions {
    pub keep_comments: bool,
    pub incomplete: IncompletePolicy,
    pub trace: bool,
    pub chars: CharParserConfig,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            keep_comments: false,
            incomplete: IncompletePolicy::Mark,
            trace: false,
            chars: CharParserConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParseOutput {
    pub root: Node,
    /// One line per token: `TOKEN | STACK-DEPTH | ACTION`, then any
    /// character parser frontiers.
    pub trace: Vec<String>,
    pub warnings: Vec<String>,
    /// Forced closes counted as errors under [`IncompletePolicy::Error`].
    pub incomplete_errors: usize,
}

#[derive(Debug, Clone)]
enum FrameKind {
    Element {
        tag: Ident,
        xml_name: Option<String>,
        /// Key of the definition when it is a character parser.
        chars_def: Option<String>,
    },
    Cont(Expr),
    Repeat(Expr),
    Perm {
        model: Expr,
        filled: Vec<(usize, Vec<Node>)>,
        current: usize,
    },
}

#[derive(Debug, Clone)]
struct Frame {
    kind: FrameKind,
    children: Vec<Node>,
}

impl Frame {
    fn new(kind: FrameKind) -> Self {
        Frame {
            kind,
            children: Vec::new(),
        }
    }
}

enum Accept {
    Cont(usize),
    Repeat,
    Perm(usize),
}

/// Appends `node`, merging adjacent character data.
fn push_node(children: &mut Vec<Node>, node: Node) {
    if let Node::Chars(s) = &node {
        if let Some(Node::Chars(last)) = children.last_mut() {
            last.push_str(s);
            return;
        }
    }
    children.push(node);
}

fn describe(tok: &Token) -> String {
    let payload = tok.payload();
    if payload.is_empty() {
        tok.kind_name().to_string()
    } else {
        format!("{} {}", tok.kind_name(), payload.escape_debug())
    }
}

struct TagParser<'a> {
    grammar: &'a Grammar,
    opts: &'a ParseOptions,
    root_tag: Ident,
    stack: Vec<Frame>,
    started: bool,
    root_closed: bool,
    root_forced: bool,
    /// Tag of a character parser element that just ended at the end of a
    /// chars token; an explicit close for it may follow.
    chars_closed: Option<Ident>,
    out: ParseOutput,
}

impl<'a> TagParser<'a> {
    fn first_contains(&self, e: &Expr, s: &Symbol) -> bool {
        self.grammar.first(e).contains(s)
    }

    fn trace(&mut self, tok: &Token, depth: usize, action: &str) {
        if self.opts.trace {
            self.out.trace.push(format!("{} | {} | {}", describe(tok), depth, action));
        }
    }

    fn top(&mut self) -> &mut Frame {
        self.stack.last_mut().expect("the root frame stays until the end")
    }

    fn accepts(&self, frame: &Frame, s: &Symbol, skip_ahead: bool) -> Option<Accept> {
        match &frame.kind {
            FrameKind::Cont(rest) => {
                for (k, item) in rest.seq_items().iter().enumerate() {
                    if self.first_contains(item, s) {
                        return Some(Accept::Cont(k));
                    }
                    if !skip_ahead && !self.grammar.pot_eps(item) {
                        return None;
                    }
                }
                None
            }
            FrameKind::Repeat(body) => self.first_contains(body, s).then_some(Accept::Repeat),
            FrameKind::Perm {
                model,
                filled,
                current,
            } => {
                let Expr::Perm(items) = model else { return None };
                (0..items.len())
                    .find(|k| {
                        k != current
                            && !filled.iter().any(|(f, _)| f == k)
                            && self.first_contains(&items[*k], s)
                    })
                    .map(Accept::Perm)
            }
            FrameKind::Element { .. } => None,
        }
    }

    fn apply(&mut self, accept: Accept, s: &Symbol) {
        let grammar = self.grammar;
        let frame = self.top();
        let next = match (&mut frame.kind, accept) {
            (FrameKind::Cont(rest), Accept::Cont(k)) => {
                let items = rest.seq_items().to_vec();
                for skipped in &items[..k] {
                    if !grammar.pot_eps(skipped) {
                        push_node(&mut frame.children, Node::Missing(skipped.clone()));
                    }
                }
                *rest = if k + 1 < items.len() {
                    Expr::seq(items[k + 1..].iter().cloned())
                } else {
                    Expr::Empty
                };
                items[k].clone()
            }
            (FrameKind::Repeat(body), Accept::Repeat) => body.clone(),
            (
                FrameKind::Perm {
                    model,
                    filled,
                    current,
                },
                Accept::Perm(k),
            ) => {
                filled.push((*current, std::mem::take(&mut frame.children)));
                *current = k;
                let Expr::Perm(items) = model else { unreachable!() };
                items[k].clone()
            }
            _ => unreachable!("accept computed for this frame"),
        };
        self.descend(&next, s);
    }

    /// Pushes the frames for entering `e` on symbol `s`, which must be in
    /// `first(e)`.
    fn descend(&mut self, e: &Expr, s: &Symbol) {
        match e {
            Expr::Seq(items) => {
                let k = items
                    .iter()
                    .position(|i| self.first_contains(i, s))
                    .expect("symbol is in the first set");
                if k + 1 < items.len() {
                    self.stack.push(Frame::new(FrameKind::Cont(Expr::seq(items[k + 1..].iter().cloned()))));
                }
                self.descend(&items[k], s);
            }
            Expr::Alt(items) => {
                let branch = items
                    .iter()
                    .find(|i| self.first_contains(i, s))
                    .expect("symbol is in the first set");
                self.descend(branch, s);
            }
            Expr::Perm(items) => {
                let k = items
                    .iter()
                    .position(|i| self.first_contains(i, s))
                    .expect("symbol is in the first set");
                self.stack.push(Frame::new(FrameKind::Perm {
                    model: e.clone(),
                    filled: Vec::new(),
                    current: k,
                }));
                self.descend(&items[k], s);
            }
            Expr::Plus(b) | Expr::Star(b) => {
                self.stack.push(Frame::new(FrameKind::Repeat((**b).clone())));
                self.descend(b, s);
            }
            Expr::Opt(b) => self.descend(b, s),
            Expr::Ref(p) => {
                let def = self.grammar.def(p);
                self.stack.push(Frame::new(FrameKind::Element {
                    tag: def.tag.clone(),
                    xml_name: def.repr.xml_tag.clone(),
                    chars_def: (def.kind == Kind::Chars).then(|| p.key()),
                }));
                if def.kind == Kind::Tags {
                    self.stack.push(Frame::new(FrameKind::Cont(def.expr.clone())));
                }
            }
            _ => {}
        }
    }

    /// Pops the top frame and hands its content to the frame below.
    fn close_top(&mut self, forced: bool) {
        let frame = self.stack.pop().expect("non-empty stack");
        let mut children = frame.children;
        let nodes = match frame.kind {
            FrameKind::Cont(rest) => {
                if !self.grammar.pot_eps(&rest) {
                    push_node(&mut children, Node::Missing(rest));
                }
                children
            }
            FrameKind::Repeat(_) => children,
            FrameKind::Perm {
                model,
                mut filled,
                current,
            } => {
                let Expr::Perm(items) = &model else { unreachable!() };
                let unfilled: Vec<Expr> = items
                    .iter()
                    .enumerate()
                    .filter(|(k, item)| {
                        *k != current
                            && !filled.iter().any(|(f, _)| f == k)
                            && !self.grammar.pot_eps(item)
                    })
                    .map(|(_, item)| item.clone())
                    .collect();
                if !unfilled.is_empty() {
                    push_node(&mut children, Node::Missing(Expr::perm(unfilled)));
                }
                filled.push((current, children));
                vec![Node::Perm(PermRecord { model, filled })]
            }
            FrameKind::Element { tag, xml_name, .. } => {
                if forced {
                    match self.opts.incomplete {
                        IncompletePolicy::Mark => {}
                        IncompletePolicy::Warn => {
                            self.out.warnings.push(format!("element {tag} closed as incomplete"))
                        }
                        IncompletePolicy::Error => self.out.incomplete_errors += 1,
                    }
                }
                vec![Node::Element(Element {
                    tag,
                    children,
                    incomplete: forced,
                    xml_name,
                })]
            }
        };
        let below = self.top();
        for n in nodes {
            push_node(&mut below.children, n);
        }
    }

    fn close_above(&mut self, level: usize) {
        while self.stack.len() > level + 1 {
            self.close_top(false);
        }
    }

    fn skip(&mut self, tok: &Token, depth: usize) {
        self.trace(tok, depth, "skip");
        self.top().children.push(Node::Skipped(tok.clone()));
    }

    /// Runs the character parser of the open element on top of the stack
    /// over `text` and closes the element. Returns the number of characters
    /// consumed, or `None` when the parser failed.
    fn finish_chars_element(&mut self, text: &str, forced: bool) -> Option<usize> {
        let frame = self.stack.last().expect("non-empty stack");
        let FrameKind::Element {
            tag,
            chars_def: Some(key),
            ..
        } = &frame.kind
        else {
            unreachable!("called on a character parser element")
        };
        let tag = tag.clone();
        let def = self.grammar.defs().get_key(key).expect("definition exists").clone();
        let key = key.clone();
        let result = run_char_parser(&key, &def, Some(self.grammar), text, 0, &self.opts.chars);
        let (found, trace) = match result {
            Ok(x) => x,
            Err(e) => {
                self.out.warnings.push(e.to_string());
                (None, Vec::new())
            }
        };
        if self.opts.trace {
            self.out.trace.extend(trace.into_iter().map(|l| format!("  {tag}: {l}")));
        }
        let consumed = match found {
            Some(m) => {
                self.top().children = m.element.children;
                Some(m.consumed)
            }
            None => {
                self.top().children = vec![Node::Missing(def.expr.clone())];
                None
            }
        };
        self.close_top(forced);
        consumed
    }

    fn top_chars_element(&self) -> Option<Ident> {
        match &self.stack.last()?.kind {
            FrameKind::Element {
                tag,
                chars_def: Some(_),
                ..
            } => Some(tag.clone()),
            _ => None,
        }
    }

    fn token(&mut self, tok: &Token) {
        let depth = self.stack.len();
        let after_chars = self.chars_closed.take();
        if let Some(tag) = self.top_chars_element() {
            match &tok.kind {
                TokenKind::Chars(text) => {
                    self.trace(tok, depth, "chars-parser");
                    match self.finish_chars_element(text, false) {
                        Some(n) => {
                            let rest: String = text.chars().skip(n).collect();
                            if rest.is_empty() {
                                self.chars_closed = Some(tag);
                            } else {
                                self.token(&Token::new(TokenKind::Chars(rest), tok.pos));
                            }
                        }
                        None => self.token(tok),
                    }
                    return;
                }
                TokenKind::Close(CloseTarget::Tag(t)) | TokenKind::CloseForced(CloseTarget::Tag(t))
                    if *t == tag =>
                {
                    self.trace(tok, depth, "chars-parser");
                    let forced = matches!(tok.kind, TokenKind::CloseForced(_));
                    self.finish_chars_element("", forced);
                    return;
                }
                _ => {
                    self.finish_chars_element("", false);
                }
            }
        }
        let depth = self.stack.len();
        match &tok.kind {
            TokenKind::Comment(text) => {
                self.trace(tok, depth, "comment");
                if self.opts.keep_comments {
                    self.top().children.push(Node::Comment(text.clone()));
                }
            }
            TokenKind::Warning(_) | TokenKind::Error(_) => {
                self.trace(tok, depth, "diagnostic");
                self.top().children.push(Node::Skipped(tok.clone()));
            }
            TokenKind::Empty(j) | TokenKind::EmptyForced(j) => {
                let close = if matches!(tok.kind, TokenKind::Empty(_)) {
                    TokenKind::Close(CloseTarget::Tag(j.clone()))
                } else {
                    TokenKind::CloseForced(CloseTarget::Tag(j.clone()))
                };
                let s = Symbol::Tag(j.clone());
                let placed = !self.root_closed
                    && ((!self.started && *j == self.root_tag)
                        || self.stack.iter().any(|f| self.accepts(f, &s, true).is_some()));
                if !placed {
                    self.started = true;
                    return self.skip(tok, depth);
                }
                self.token(&Token::new(TokenKind::Open(j.clone()), tok.pos));
                self.token(&Token::new(close, tok.pos));
            }
            TokenKind::Open(j) => {
                let s = Symbol::Tag(j.clone());
                if !self.started {
                    self.started = true;
                    if *j == self.root_tag && self.accepts(self.stack.last().unwrap(), &s, false).is_none() {
                        self.trace(tok, depth, "root");
                        return;
                    }
                }
                self.offer(s, tok, depth);
            }
            TokenKind::Chars(text) => {
                if text.chars().all(char::is_whitespace) {
                    let top = self.stack.last().unwrap();
                    match self.accepts(top, &Symbol::Chars, false) {
                        Some(a) if !self.root_closed => {
                            self.trace(tok, depth, "descend");
                            self.apply(a, &Symbol::Chars);
                            push_node(&mut self.top().children, Node::Chars(text.clone()));
                        }
                        _ => self.trace(tok, depth, "drop"),
                    }
                    return;
                }
                self.started = true;
                self.offer(Symbol::Chars, tok, depth);
            }
            TokenKind::Close(target) | TokenKind::CloseForced(target) => {
                self.started = true;
                let forced = matches!(tok.kind, TokenKind::CloseForced(_));
                if let (CloseTarget::Tag(t), Some(prev)) = (target, &after_chars) {
                    if t == prev {
                        self.trace(tok, depth, "chars-parser");
                        return;
                    }
                }
                self.close(target, forced, tok, depth);
            }
            TokenKind::Eof => {
                self.trace(tok, depth, "eof");
            }
        }
    }

    fn offer(&mut self, s: Symbol, tok: &Token, depth: usize) {
        if self.root_closed {
            return self.skip(tok, depth);
        }
        let found = (0..self.stack.len())
            .rev()
            .find_map(|i| self.accepts(&self.stack[i], &s, true).map(|a| (i, a)));
        let Some((level, accept)) = found else {
            return self.skip(tok, depth);
        };
        let action = if level + 1 == self.stack.len() { "descend" } else { "ascend_O" };
        self.trace(tok, depth, action);
        self.close_above(level);
        self.apply(accept, &s);
        if let (Symbol::Chars, TokenKind::Chars(text)) = (&s, &tok.kind) {
            push_node(&mut self.top().children, Node::Chars(text.clone()));
        }
    }

    fn close(&mut self, target: &CloseTarget, forced: bool, tok: &Token, depth: usize) {
        if self.root_closed {
            return self.skip(tok, depth);
        }
        let level = (0..self.stack.len()).rev().find(|i| match &self.stack[*i].kind {
            FrameKind::Element { tag, .. } => match target {
                CloseTarget::Wildcard => true,
                CloseTarget::Tag(t) => t == tag,
            },
            _ => false,
        });
        let Some(level) = level else {
            return self.skip(tok, depth);
        };
        self.trace(tok, depth, "ascend_C");
        self.close_above(level);
        if level == 0 {
            self.root_closed = true;
            self.root_forced = forced;
        } else {
            self.close_top(forced);
        }
    }
}

/// Parses a token stream against the definition `root` (a table key).
pub fn parse_tokens(
    tokens: &[Token],
    root: &Path,
    grammar: &Grammar,
    opts: &ParseOptions,
) -> Result<ParseOutput, GrammarError> {
    let def = grammar
        .defs()
        .get(root)
        .ok_or_else(|| GrammarError::Unresolved { path: root.to_string() })?;
    if def.kind != Kind::Tags {
        return Err(GrammarError::Invalid {
            def: root.to_string(),
            message: "the document root must be a tags definition".into(),
        });
    }
    let mut p = TagParser {
        grammar,
        opts,
        root_tag: def.tag.clone(),
        stack: vec![
            Frame::new(FrameKind::Element {
                tag: def.tag.clone(),
                xml_name: def.repr.xml_tag.clone(),
                chars_def: None,
            }),
            Frame::new(FrameKind::Cont(def.expr.clone())),
        ],
        started: false,
        root_closed: false,
        root_forced: false,
        chars_closed: None,
        out: ParseOutput {
            root: Node::Chars(String::new()),
            trace: Vec::new(),
            warnings: Vec::new(),
            incomplete_errors: 0,
        },
    };
    for tok in tokens {
        let eof = tok.kind == TokenKind::Eof;
        p.token(tok);
        if eof {
            break;
        }
    }
    p.close_above(0);
    let root = p.stack.pop().expect("root frame");
    let FrameKind::Element { tag, xml_name, .. } = root.kind else {
        unreachable!("bottom frame is the root element")
    };
    p.out.root = Node::Element(Element {
        tag,
        children: root.children,
        incomplete: p.root_forced,
        xml_name,
    });
    Ok(p.out)
}

/// The document tree for `tokens` with default options. Panics when `root`
/// is not a tags definition of `grammar`.
pub fn text2tree(tokens: &[Token], root: &str, grammar: &Grammar) -> Node {
    parse_tokens(tokens, &Path::must(root), grammar, &ParseOptions::default())
        .expect("root is a tags definition")
        .root
}
