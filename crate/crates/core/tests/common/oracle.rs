//! Brute-force reference semantics. Exhaustive recursion, no memoization,
//! small inputs only.

use std::collections::BTreeSet;

use d2d_core::grammar::Symbol;
use d2d_core::model::{DefTable, Expr};

/// Result of matching an expression from some input position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Outcome {
    /// The expression matched the input up to this position.
    End(usize),
    /// The input ran out while the expression could still go on.
    Exhausted,
}

use Outcome::{End, Exhausted};

/// Content-level matching. `Ref` is one child element; `@` inlines the
/// inserted definition. With `skip`, items of a sequence that has already
/// consumed input may be left out (how recovery can complete a sequence).
struct TokenMatcher<'a> {
    defs: &'a DefTable,
    input: &'a [Symbol],
    skip: bool,
}

impl TokenMatcher<'_> {
    fn leaf(&self, want: Symbol, i: usize) -> BTreeSet<Outcome> {
        match self.input.get(i) {
            None => [Exhausted].into(),
            Some(s) if *s == want => [End(i + 1)].into(),
            Some(_) => BTreeSet::new(),
        }
    }

    fn go(&self, e: &Expr, i: usize, top: bool) -> BTreeSet<Outcome> {
        match e {
            Expr::Empty => [End(i)].into(),
            Expr::Chars => self.leaf(Symbol::Chars, i),
            Expr::Ref(p) => match self.defs.get(p) {
                Some(d) => self.leaf(Symbol::Tag(d.tag.clone()), i),
                None => BTreeSet::new(),
            },
            Expr::Insert(p) => match self.defs.get(p) {
                Some(d) => self.go(&d.expr, i, false),
                None => BTreeSet::new(),
            },
            Expr::Seq(items) => self.seq(items, 0, i, top && self.skip),
            Expr::Alt(items) => items.iter().flat_map(|x| self.go(x, i, false)).collect(),
            Expr::Opt(b) => {
                let mut out = self.go(b, i, false);
                out.insert(End(i));
                out
            }
            Expr::Star(b) => self.star(b, i),
            Expr::Plus(b) => {
                let mut out = BTreeSet::new();
                for o in self.go(b, i, false) {
                    match o {
                        End(j) => out.extend(self.star(b, j)),
                        Exhausted => {
                            out.insert(Exhausted);
                        }
                    }
                }
                out
            }
            Expr::Perm(items) => self.perm(items, &vec![false; items.len()], i),
            _ => BTreeSet::new(),
        }
    }

    fn seq(&self, items: &[Expr], k: usize, i: usize, started: bool) -> BTreeSet<Outcome> {
        let Some(item) = items.get(k) else {
            return [End(i)].into();
        };
        let mut out = BTreeSet::new();
        for o in self.go(item, i, false) {
            match o {
                End(j) => out.extend(self.seq(items, k + 1, j, started || (self.skip && j > i))),
                Exhausted => {
                    out.insert(Exhausted);
                }
            }
        }
        if started {
            out.extend(self.seq(items, k + 1, i, started));
        }
        out
    }

    fn star(&self, b: &Expr, i: usize) -> BTreeSet<Outcome> {
        let mut out: BTreeSet<Outcome> = [End(i)].into();
        for o in self.go(b, i, false) {
            match o {
                End(j) if j > i => out.extend(self.star(b, j)),
                End(_) => {}
                Exhausted => {
                    out.insert(Exhausted);
                }
            }
        }
        out
    }

    fn perm(&self, items: &[Expr], used: &[bool], i: usize) -> BTreeSet<Outcome> {
        if used.iter().all(|u| *u) {
            return [End(i)].into();
        }
        let mut out = BTreeSet::new();
        for k in (0..items.len()).filter(|k| !used[*k]) {
            let mut next = used.to_vec();
            next[k] = true;
            for o in self.go(&items[k], i, false) {
                match o {
                    End(j) => out.extend(self.perm(items, &next, j)),
                    Exhausted => {
                        out.insert(Exhausted);
                    }
                }
            }
        }
        out
    }
}

pub fn outcomes(e: &Expr, defs: &DefTable, input: &[Symbol]) -> BTreeSet<Outcome> {
    TokenMatcher { defs, input, skip: false }.go(e, 0, true)
}

/// Whether the whole of `input` is a word of `e`.
pub fn naive_match(e: &Expr, defs: &DefTable, input: &[Symbol]) -> bool {
    outcomes(e, defs, input).contains(&End(input.len()))
}

/// Whether `input` can be continued to a word of `e`.
pub fn viable_prefix(e: &Expr, defs: &DefTable, input: &[Symbol]) -> bool {
    let o = outcomes(e, defs, input);
    o.contains(&End(input.len())) || o.contains(&Exhausted)
}

/// Like [`viable_prefix`], but sequences that have consumed input may drop
/// later items, and so may the top-level sequence of `e`.
pub fn viable_with_skips(e: &Expr, defs: &DefTable, input: &[Symbol]) -> bool {
    let o = TokenMatcher { defs, input, skip: true }.go(e, 0, true);
    o.contains(&End(input.len())) || o.contains(&Exhausted)
}

/// The symbols that can start a word of `e`.
pub fn naive_first(e: &Expr, defs: &DefTable, alphabet: &[Symbol]) -> BTreeSet<Symbol> {
    alphabet
        .iter()
        .filter(|s| viable_prefix(e, defs, std::slice::from_ref(*s)))
        .cloned()
        .collect()
}

pub fn naive_pot_eps(e: &Expr, defs: &DefTable) -> bool {
    naive_match(e, defs, &[])
}

fn single(e: &Expr) -> Option<char> {
    match e {
        Expr::NumericChar(c) => Some(*c),
        Expr::CharSet(s) if s.chars().count() == 1 => s.chars().next(),
        _ => None,
    }
}

/// Character class membership, or `None` when `e` is not a class.
pub fn in_class(e: &Expr, c: char) -> Option<bool> {
    Some(match e {
        Expr::CharSet(s) => s.chars().any(|x| x == c),
        Expr::NumericChar(x) => *x == c,
        Expr::Range(lo, hi) => (single(lo)?..=single(hi)?).contains(&c),
        Expr::Union(a, b) => in_class(a, c)? | in_class(b, c)?,
        Expr::Intersect(a, b) => in_class(a, c)? & in_class(b, c)?,
        Expr::Minus(a, b) => in_class(a, c)? & !in_class(b, c)?,
        _ => return None,
    })
}

fn gap(c: char) -> bool {
    matches!(c, ' ' | '\t' | '\n' | '\r')
}

/// End positions of matching `e` against `text` from `i`, at the
/// character level.
pub fn naive_char_ends(e: &Expr, text: &[char], i: usize) -> BTreeSet<usize> {
    if in_class(e, 'a').is_some() {
        return match text.get(i) {
            Some(c) if in_class(e, *c) == Some(true) => [i + 1].into(),
            _ => BTreeSet::new(),
        };
    }
    let gaps_after = |j: usize| {
        let mut k = j;
        let mut out = vec![j];
        while text.get(k).is_some_and(|c| gap(*c)) {
            k += 1;
            out.push(k);
        }
        out
    };
    match e {
        Expr::Literal(s) => {
            let lit: Vec<char> = s.chars().collect();
            if text[i..].starts_with(&lit) {
                [i + lit.len()].into()
            } else {
                BTreeSet::new()
            }
        }
        Expr::Empty => [i].into(),
        Expr::TightSeq(items) | Expr::Seq(items) => {
            let tight = matches!(e, Expr::TightSeq(_));
            let mut cur: BTreeSet<usize> = [i].into();
            for (k, item) in items.iter().enumerate() {
                let starts: BTreeSet<usize> = if tight || k == 0 {
                    cur
                } else {
                    cur.into_iter().flat_map(gaps_after).collect()
                };
                cur = starts.into_iter().flat_map(|j| naive_char_ends(item, text, j)).collect();
            }
            cur
        }
        Expr::Alt(items) => items.iter().flat_map(|x| naive_char_ends(x, text, i)).collect(),
        Expr::Opt(b) => {
            let mut out = naive_char_ends(b, text, i);
            out.insert(i);
            out
        }
        Expr::TightStar(b) | Expr::TightPlus(b) if in_class(b, 'a').is_some() => {
            let mut j = i;
            while text.get(j).is_some_and(|c| in_class(b, *c) == Some(true)) {
                j += 1;
            }
            if j == i && matches!(e, Expr::TightPlus(_)) {
                BTreeSet::new()
            } else {
                [j].into()
            }
        }
        Expr::TightStar(b) | Expr::Star(b) => {
            let gaps = matches!(e, Expr::Star(_));
            let mut out: BTreeSet<usize> = [i].into();
            repeat_ends(b, text, i, gaps, &mut out, &gaps_after);
            out
        }
        Expr::TightPlus(b) | Expr::Plus(b) => {
            let gaps = matches!(e, Expr::Plus(_));
            let mut out = BTreeSet::new();
            for j in naive_char_ends(b, text, i) {
                out.insert(j);
                if j > i {
                    repeat_ends(b, text, j, gaps, &mut out, &gaps_after);
                }
            }
            out
        }
        Expr::Greedy(b) => naive_char_ends(b, text, i).into_iter().max().into_iter().collect(),
        Expr::Capture(_, b) => naive_char_ends(b, text, i),
        _ => BTreeSet::new(),
    }
}

/// Adds every end reachable by further consuming iterations after `j`.
fn repeat_ends(
    b: &Expr,
    text: &[char],
    j: usize,
    gaps: bool,
    out: &mut BTreeSet<usize>,
    gaps_after: &dyn Fn(usize) -> Vec<usize>,
) {
    let starts = if gaps { gaps_after(j) } else { vec![j] };
    for s in starts {
        for k in naive_char_ends(b, text, s) {
            if k > j {
                out.insert(k);
                repeat_ends(b, text, k, gaps, out, gaps_after);
            }
        }
    }
}
