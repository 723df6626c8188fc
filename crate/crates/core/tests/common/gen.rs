//! Seeded random grammars, documents, expressions and token streams.

use std::collections::BTreeMap;

use d2d_core::grammar::{validate_ll1, Grammar};
use d2d_core::model::{CloseTarget, DefTable, Definition, Expr, Ident, Path, Token, TokenKind};
use d2d_core::syntax::parse_expr;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn rng(seed: u64) -> StdRng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Content-model expression over `atoms`, at most `depth` operators deep.
pub fn tag_expr(rng: &mut StdRng, depth: usize, atoms: &[Expr]) -> Expr {
    if depth == 0 || rng.gen_bool(0.3) {
        return atoms.choose(rng).unwrap().clone();
    }
    let sub = |rng: &mut StdRng| tag_expr(rng, depth - 1, atoms);
    match rng.gen_range(0..7) {
        0 => Expr::seq((0..rng.gen_range(2..=3)).map(|_| sub(rng)).collect::<Vec<_>>()),
        1 => Expr::alt((0..rng.gen_range(2..=3)).map(|_| sub(rng)).collect::<Vec<_>>()),
        2 => Expr::Perm((0..rng.gen_range(2..=3)).map(|_| sub(rng)).collect()),
        3 => Expr::opt(sub(rng)),
        4 => Expr::star(sub(rng)),
        5 => Expr::plus(sub(rng)),
        _ => Expr::Empty,
    }
}

/// Three-symbol expressions for first-set checks.
pub fn abc_expr(rng: &mut StdRng, depth: usize) -> Expr {
    let atoms = [Expr::reference("a"), Expr::reference("b"), Expr::reference("c"), Expr::Empty];
    let mut e = tag_expr(rng, depth, &atoms);
    if rng.gen_bool(0.2) {
        e = Expr::seq([Expr::insert("ins"), e]);
    }
    e
}

pub fn abc_table() -> DefTable {
    DefTable::from_defs([
        Definition::tags("a", Expr::Empty),
        Definition::tags("b", Expr::Empty),
        Definition::tags("c", Expr::Chars),
        Definition::tags("ins", parse_expr("a? , c*").unwrap()),
    ])
}

/// Minimal nesting depth of a document for each definition; `None` when a
/// definition has no finite document.
pub fn min_depths(defs: &DefTable) -> BTreeMap<String, usize> {
    let mut known: BTreeMap<String, usize> = BTreeMap::new();
    loop {
        let mut changed = false;
        for (key, def) in defs.iter() {
            if let Some(h) = expr_depth(&def.expr, defs, &known) {
                if known.get(&key.to_string()).is_none_or(|old| h + 1 < *old) {
                    known.insert(key.to_string(), h + 1);
                    changed = true;
                }
            }
        }
        if !changed {
            return known;
        }
    }
}

pub fn expr_depth(e: &Expr, defs: &DefTable, known: &BTreeMap<String, usize>) -> Option<usize> {
    match e {
        Expr::Empty | Expr::Chars => Some(0),
        Expr::Ref(p) => known.get(&p.key()).copied(),
        Expr::Seq(items) | Expr::Perm(items) => {
            items.iter().map(|x| expr_depth(x, defs, known)).try_fold(0, |m, d| Some(m.max(d?)))
        }
        Expr::Alt(items) => items.iter().filter_map(|x| expr_depth(x, defs, known)).min(),
        Expr::Opt(_) | Expr::Star(_) => Some(0),
        Expr::Plus(b) => expr_depth(b, defs, known),
        _ => None,
    }
}

pub struct RandomGrammar {
    pub defs: DefTable,
    pub grammar: Grammar,
    pub root: String,
    pub depths: BTreeMap<String, usize>,
}

/// A random grammar of at most `max_defs` tags definitions that passes the
/// LL(1) check and where every definition has a finite document.
pub fn ll1_grammar(rng: &mut StdRng, max_defs: usize) -> RandomGrammar {
    loop {
        let n = rng.gen_range(1..=max_defs);
        let names: Vec<String> = (0..n).map(|i| format!("d{i}")).collect();
        let mut atoms: Vec<Expr> = names.iter().map(|n| Expr::reference(n)).collect();
        atoms.push(Expr::Chars);
        let defs = DefTable::from_defs(names.iter().map(|name| {
            let depth = rng.gen_range(0..=3);
            Definition::tags(name, tag_expr(rng, depth, &atoms))
        }));
        let depths = min_depths(&defs);
        if depths.len() != n {
            continue;
        }
        if defs.iter().any(|(_, d)| !validate_ll1(d, &defs).is_empty()) {
            continue;
        }
        let Ok(grammar) = Grammar::new(&defs) else { continue };
        return RandomGrammar {
            defs,
            grammar,
            root: "d0".into(),
            depths,
        };
    }
}

/// A document for the content model of the root, with every element closed
/// explicitly; the root itself is neither opened nor closed.
pub fn document(rng: &mut StdRng, g: &RandomGrammar) -> Vec<Token> {
    let root = g.defs.get(&Path::must(&g.root)).unwrap();
    let budget = g.depths[&g.root] + rng.gen_range(1..6);
    let mut out = Vec::new();
    emit(rng, g, &root.expr, budget - 1, &mut out);
    out.push(Token::bare(TokenKind::Eof));
    out
}

fn emit(rng: &mut StdRng, g: &RandomGrammar, e: &Expr, budget: usize, out: &mut Vec<Token>) {
    let fits = |x: &Expr| expr_depth(x, &g.defs, &g.depths).is_some_and(|d| d <= budget);
    match e {
        Expr::Empty => {}
        Expr::Chars => out.push(Token::bare(TokenKind::Chars("x".into()))),
        Expr::Ref(p) => {
            let def = g.defs.get(p).unwrap();
            out.push(Token::bare(TokenKind::Open(def.tag.clone())));
            emit(rng, g, &def.expr, budget - 1, out);
            out.push(Token::bare(TokenKind::Close(CloseTarget::Tag(def.tag.clone()))));
        }
        Expr::Seq(items) => items.iter().for_each(|x| emit(rng, g, x, budget, out)),
        Expr::Perm(items) => {
            let mut order: Vec<&Expr> = items.iter().collect();
            order.shuffle(rng);
            order.into_iter().for_each(|x| emit(rng, g, x, budget, out));
        }
        Expr::Alt(items) => {
            let ok: Vec<&Expr> = items.iter().filter(|x| fits(x)).collect();
            let pick = *ok.choose(rng).unwrap();
            emit(rng, g, pick, budget, out);
        }
        Expr::Opt(b) => {
            if fits(b) && rng.gen_bool(0.5) {
                emit(rng, g, b, budget, out);
            }
        }
        Expr::Star(b) | Expr::Plus(b) => {
            let min = usize::from(matches!(e, Expr::Plus(_)));
            let n = if fits(b) { rng.gen_range(min..=3) } else { min };
            (0..n).for_each(|_| emit(rng, g, b, budget, out));
        }
        other => panic!("not generated: {other:?}"),
    }
}

/// Character-level expression over the alphabet {a, b, c}.
pub fn char_expr(rng: &mut StdRng, depth: usize) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..6) {
            0 => Expr::literal(["a", "b", "c", "ab", "ba", "abc"].choose(rng).unwrap()),
            1 => Expr::charset(["a", "b", "ab", "bc", "abc"].choose(rng).unwrap()),
            2 => Expr::Range(Box::new(Expr::charset("a")), Box::new(Expr::charset("b"))),
            3 => Expr::Minus(Box::new(Expr::charset("abc")), Box::new(Expr::charset("b"))),
            4 => Expr::Empty,
            _ => Expr::NumericChar('c'),
        };
    }
    let sub = |rng: &mut StdRng| char_expr(rng, depth - 1);
    match rng.gen_range(0..11) {
        0 => Expr::tight_seq([sub(rng), sub(rng)]),
        1 => Expr::seq([sub(rng), sub(rng)]),
        2 => Expr::alt([sub(rng), sub(rng)]),
        3 => Expr::opt(sub(rng)),
        4 => Expr::tight_star(sub(rng)),
        5 => Expr::tight_plus(sub(rng)),
        6 => Expr::star(sub(rng)),
        7 => Expr::plus(sub(rng)),
        8 => Expr::greedy(sub(rng)),
        9 => Expr::capture("k", sub(rng)),
        _ => Expr::tight_star(Expr::charset(["a", "ab", "abc"].choose(rng).unwrap())),
    }
}

/// Every string over {a, b, c} of length at most `n`.
pub fn abc_strings(n: usize) -> Vec<String> {
    let mut all = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..n {
        layer = layer
            .iter()
            .flat_map(|s| ['a', 'b', 'c'].map(|c| format!("{s}{c}")))
            .collect();
        all.extend(layer.iter().cloned());
    }
    all
}

/// A token stream with unknown tags, stray and forced closes, comments,
/// tokenizer diagnostics, whitespace, and possibly no end token.
pub fn fuzz_tokens(rng: &mut StdRng, tags: &[Ident]) -> Vec<Token> {
    let len = rng.gen_range(0..40);
    let mut pool: Vec<Ident> = tags.to_vec();
    pool.push(Ident::must("zz"));
    let mut out = Vec::new();
    for _ in 0..len {
        let tag = pool.choose(rng).unwrap().clone();
        let target = if rng.gen_bool(0.2) {
            CloseTarget::Wildcard
        } else {
            CloseTarget::Tag(tag.clone())
        };
        let kind = match rng.gen_range(0..12) {
            0..=2 => TokenKind::Open(tag),
            3 | 4 => TokenKind::Close(target),
            5 => TokenKind::CloseForced(target),
            6 => TokenKind::Empty(tag),
            7 => TokenKind::EmptyForced(tag),
            8 => TokenKind::Chars([" ", "\n", "x", "12", "2013-07", "a b"].choose(rng).unwrap().to_string()),
            9 => TokenKind::Comment("c".into()),
            10 => TokenKind::Warning("w".into()),
            _ => TokenKind::Error("e".into()),
        };
        out.push(Token::bare(kind));
    }
    if rng.gen_bool(0.8) {
        out.push(Token::bare(TokenKind::Eof));
    }
    out
}
