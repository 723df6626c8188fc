//! Non-deterministic character-level parsing over hypothesis sets.
//!
//! A hypothesis is an input position plus the nodes produced so far. Each
//! operator maps a set of hypotheses to the set reachable by matching it;
//! the caller keeps the longest match.

use std::collections::{BTreeSet, HashSet};

use thiserror::Error;

use crate::grammar::Grammar;
use crate::model::{render_expr, Definition, Element, Expr, Ident, Node};

/// Characters skipped by `,` and by the untight repetitions `*` and `+`.
pub fn is_gap_char(c: char) -> bool {
    matches!(c, ' ' | '\t' | '\n' | '\r')
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Hypothesis {
    pub pos: usize,
    pub results: Vec<Node>,
}

impl Hypothesis {
    pub fn start(pos: usize) -> Self {
        Hypothesis {
            pos,
            results: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CharParseError {
    #[error("character parser {def}: step budget of {budget} exceeded")]
    Budget { def: String, budget: usize },
}

#[derive(Debug, Clone)]
pub struct CharParserConfig {
    /// Maximum number of hypotheses produced by one parser invocation.
    pub budget: usize,
    pub trace: bool,
}

impl Default for CharParserConfig {
    fn default() -> Self {
        CharParserConfig {
            budget: 1_000_000,
            trace: false,
        }
    }
}

pub fn end_positions(hs: &[Hypothesis]) -> BTreeSet<usize> {
    hs.iter().map(|h| h.pos).collect()
}

struct Dedup {
    seen: HashSet<Hypothesis>,
    out: Vec<Hypothesis>,
}

impl Dedup {
    fn new() -> Self {
        Dedup {
            seen: HashSet::new(),
            out: Vec::new(),
        }
    }

    fn push(&mut self, h: Hypothesis) -> bool {
        if self.seen.contains(&h) {
            return false;
        }
        self.seen.insert(h.clone());
        self.out.push(h);
        true
    }
}

struct Exhausted;

pub struct CharParser<'a> {
    grammar: Option<&'a Grammar>,
    buf: Vec<char>,
    budget: usize,
    steps: usize,
    expanding: Vec<(String, usize)>,
    trace: Option<Vec<String>>,
}

impl<'a> CharParser<'a> {
    /// `grammar` is needed only when expressions contain references.
    pub fn new(grammar: Option<&'a Grammar>, text: &str) -> Self {
        CharParser {
            grammar,
            buf: text.chars().collect(),
            budget: usize::MAX,
            steps: 0,
            expanding: Vec::new(),
            trace: None,
        }
    }

    pub fn with_config(mut self, cfg: &CharParserConfig) -> Self {
        self.budget = cfg.budget;
        if cfg.trace {
            self.trace = Some(Vec::new());
        }
        self
    }

    pub fn buffer(&self) -> &[char] {
        &self.buf
    }

    pub fn take_trace(&mut self) -> Vec<String> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    /// All hypotheses reachable by matching `e` from `h`.
    pub fn parse(&mut self, e: &Expr, h: &Hypothesis) -> Vec<Hypothesis> {
        self.try_parse(e, h).unwrap_or_default()
    }

    /// Pointwise union of [`parse`](Self::parse) over `hs`.
    pub fn parse_m(&mut self, e: &Expr, hs: &[Hypothesis]) -> Vec<Hypothesis> {
        self.try_parse_m(e, hs).unwrap_or_default()
    }

    fn try_parse_m(&mut self, e: &Expr, hs: &[Hypothesis]) -> Result<Vec<Hypothesis>, Exhausted> {
        let mut out = Dedup::new();
        for h in hs {
            for r in self.try_parse(e, h)? {
                out.push(r);
            }
        }
        Ok(out.out)
    }

    fn count(&mut self, n: usize) -> Result<(), Exhausted> {
        self.steps = self.steps.saturating_add(n);
        if self.steps > self.budget {
            Err(Exhausted)
        } else {
            Ok(())
        }
    }

    fn class_run(&self, class: &Expr, from: usize) -> usize {
        self.buf[from..]
            .iter()
            .take_while(|c| class.class_contains(**c))
            .count()
    }

    fn gap_end(&self, from: usize) -> usize {
        from + self.buf[from..].iter().take_while(|c| is_gap_char(**c)).count()
    }

    fn try_parse(&mut self, e: &Expr, h: &Hypothesis) -> Result<Vec<Hypothesis>, Exhausted> {
        let out = self.dispatch(e, h)?;
        self.count(out.len().max(1))?;
        if let Some(t) = self.trace.as_mut() {
            let ends: Vec<String> = out.iter().map(|h| h.pos.to_string()).collect();
            t.push(format!("{} @ {} -> {{{}}}", render_expr(e), h.pos, ends.join(",")));
        }
        Ok(out)
    }

    fn dispatch(&mut self, e: &Expr, h: &Hypothesis) -> Result<Vec<Hypothesis>, Exhausted> {
        let at = |pos: usize| Hypothesis {
            pos,
            results: h.results.clone(),
        };
        Ok(match e {
            Expr::Literal(s) => {
                let lit: Vec<char> = s.chars().collect();
                if self.buf[h.pos..].starts_with(&lit) {
                    vec![at(h.pos + lit.len())]
                } else {
                    Vec::new()
                }
            }
            _ if e.is_char_class() => match self.buf.get(h.pos) {
                Some(c) if e.class_contains(*c) => vec![at(h.pos + 1)],
                _ => Vec::new(),
            },
            Expr::Empty => vec![h.clone()],
            Expr::TightSeq(items) => {
                let mut hs = vec![h.clone()];
                for item in items {
                    hs = self.try_parse_m(item, &hs)?;
                    if hs.is_empty() {
                        break;
                    }
                }
                hs
            }
            Expr::Seq(items) => {
                let mut hs = self.try_parse(&items[0], h)?;
                for item in &items[1..] {
                    let gapped: Vec<Hypothesis> = {
                        let mut d = Dedup::new();
                        for x in hs {
                            let end = self.gap_end(x.pos);
                            for p in x.pos..=end {
                                d.push(Hypothesis {
                                    pos: p,
                                    results: x.results.clone(),
                                });
                            }
                        }
                        d.out
                    };
                    hs = self.try_parse_m(item, &gapped)?;
                    if hs.is_empty() {
                        break;
                    }
                }
                hs
            }
            Expr::Alt(items) => {
                let mut d = Dedup::new();
                for item in items {
                    for r in self.try_parse(item, h)? {
                        d.push(r);
                    }
                }
                d.out
            }
            Expr::Opt(b) => {
                let mut d = Dedup::new();
                for r in self.try_parse(b, h)? {
                    d.push(r);
                }
                d.push(h.clone());
                d.out
            }
            Expr::TightStar(b) | Expr::TightPlus(b) if b.is_char_class() => {
                let n = self.class_run(b, h.pos);
                if n == 0 && matches!(e, Expr::TightPlus(_)) {
                    Vec::new()
                } else {
                    vec![at(h.pos + n)]
                }
            }
            Expr::TightStar(b) => self.repeat(b, h, false, true)?,
            Expr::TightPlus(b) => self.repeat(b, h, false, false)?,
            Expr::Star(b) => self.repeat(b, h, true, true)?,
            Expr::Plus(b) => self.repeat(b, h, true, false)?,
            Expr::Greedy(b) => {
                let hs = self.try_parse(b, h)?;
                match hs.iter().map(|x| x.pos).max() {
                    Some(max) => hs.into_iter().find(|x| x.pos == max).into_iter().collect(),
                    None => Vec::new(),
                }
            }
            Expr::Capture(id, b) => {
                let inner = self.try_parse(b, &Hypothesis::start(h.pos))?;
                pack(id, inner, h, &self.buf)
            }
            Expr::Ref(p) => {
                let Some(def) = self.grammar.and_then(|g| g.defs().get(p)) else {
                    return Ok(Vec::new());
                };
                let key = (p.key(), h.pos);
                if self.expanding.contains(&key) {
                    // Left recursion at the same position adds nothing new.
                    return Ok(Vec::new());
                }
                self.expanding.push(key);
                let expr = def.expr.clone();
                let out = self.try_parse(&expr, h);
                self.expanding.pop();
                out?
            }
            // `#none`, and anything validation rejects on this level.
            _ => Vec::new(),
        })
    }

    /// Repetition to a fixpoint. Iterations that consume nothing are dropped,
    /// which bounds the hypothesis set.
    fn repeat(
        &mut self,
        body: &Expr,
        h: &Hypothesis,
        gaps: bool,
        allow_zero: bool,
    ) -> Result<Vec<Hypothesis>, Exhausted> {
        let mut all = Dedup::new();
        if allow_zero {
            all.push(h.clone());
        }
        let mut frontier = Vec::new();
        for r in self.try_parse(body, h)? {
            if r.pos > h.pos {
                if all.push(r.clone()) {
                    frontier.push(r);
                }
            } else if !allow_zero {
                all.push(r);
            }
        }
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for x in &frontier {
                let starts: Vec<Hypothesis> = if gaps {
                    (x.pos..=self.gap_end(x.pos))
                        .map(|p| Hypothesis {
                            pos: p,
                            results: x.results.clone(),
                        })
                        .collect()
                } else {
                    vec![x.clone()]
                };
                for s in &starts {
                    for r in self.try_parse(body, s)? {
                        if r.pos > x.pos && all.push(r.clone()) {
                            next.push(r);
                        }
                    }
                }
            }
            frontier = next;
        }
        Ok(all.out)
    }
}

/// Wraps each inner hypothesis of a capture: the matched text, or the
/// elements the body produced, becomes the content of an element `tag`.
pub fn pack(tag: &Ident, inner: Vec<Hypothesis>, start: &Hypothesis, buf: &[char]) -> Vec<Hypothesis> {
    inner
        .into_iter()
        .map(|h| {
            let mut results = start.results.clone();
            results.push(Node::Element(Element::new(tag.clone(), pack_res(h.results, start.pos, h.pos, buf))));
            Hypothesis { pos: h.pos, results }
        })
        .collect()
}

fn pack_res(results: Vec<Node>, from: usize, to: usize, buf: &[char]) -> Vec<Node> {
    if results.is_empty() {
        vec![Node::Chars(buf[from..to].iter().collect())]
    } else {
        results
    }
}

pub fn cparse(e: &Expr, h: &Hypothesis, text: &str) -> Vec<Hypothesis> {
    CharParser::new(None, text).parse(e, h)
}

pub fn cparse_m(e: &Expr, hs: &[Hypothesis], text: &str) -> Vec<Hypothesis> {
    CharParser::new(None, text).parse_m(e, hs)
}

/// Longest match of a character parser definition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharMatch {
    /// Number of characters consumed from the start position.
    pub consumed: usize,
    pub element: Element,
}

/// Runs `def` on `text` from character position `start` and keeps the
/// longest match; among equally long matches the first derived one wins.
/// `Ok(None)` means no hypothesis survived.
pub fn run_char_parser(
    def_name: &str,
    def: &Definition,
    grammar: Option<&Grammar>,
    text: &str,
    start: usize,
    cfg: &CharParserConfig,
) -> Result<(Option<CharMatch>, Vec<String>), CharParseError> {
    let mut p = CharParser::new(grammar, text).with_config(cfg);
    let hs = p
        .try_parse(&def.expr, &Hypothesis::start(start))
        .map_err(|_| CharParseError::Budget {
            def: def_name.to_string(),
            budget: cfg.budget,
        })?;
    let trace = p.take_trace();
    let Some(max) = hs.iter().map(|h| h.pos).max() else {
        return Ok((None, trace));
    };
    let best = hs.into_iter().find(|h| h.pos == max).expect("max exists");
    let mut element = Element::new(def.tag.clone(), pack_res(best.results, start, max, p.buffer()));
    element.xml_name = def.repr.xml_tag.clone();
    Ok((
        Some(CharMatch {
            consumed: max - start,
            element,
        }),
        trace,
    ))
}
