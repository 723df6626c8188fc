//! Which explicit closing tags of a document the parser can do without.

use d2d_core::grammar::Symbol;
use d2d_core::model::{CloseTarget, DefTable, Ident, Path, Token, TokenKind};

use super::oracle::viable_with_skips;

struct Open {
    tag: Ident,
    key: Path,
    children: Vec<Symbol>,
}

/// Whether closing `elements` (innermost first) can be left implicit when
/// `next` follows them.
fn implicit_ok(defs: &DefTable, elements: &[&Open], next: &Token) -> bool {
    match &next.kind {
        TokenKind::Eof => true,
        TokenKind::Close(CloseTarget::Tag(x)) => elements.iter().all(|e| e.tag != *x),
        TokenKind::Open(t) => no_frame_takes(defs, elements, Symbol::Tag(t.clone())),
        TokenKind::Chars(_) => no_frame_takes(defs, elements, Symbol::Chars),
        _ => false,
    }
}

fn no_frame_takes(defs: &DefTable, elements: &[&Open], s: Symbol) -> bool {
    elements.iter().all(|e| {
        let mut input = e.children.clone();
        input.push(s.clone());
        !viable_with_skips(&defs.get(&e.key).unwrap().expr, defs, &input)
    })
}

/// Removes every closing tag that can be inferred from what follows it.
/// `doc` is the content of `root` with all other elements closed
/// explicitly, ending in the end token. Returns the reduced stream and the
/// number of closes removed.
pub fn delete_inferable(doc: &[Token], defs: &DefTable, root: &str) -> (Vec<Token>, usize) {
    let root_def = defs.get(&Path::must(root)).unwrap();
    let mut stack = vec![Open {
        tag: root_def.tag.clone(),
        key: Path::must(root),
        children: Vec::new(),
    }];
    let mut out = Vec::new();
    let mut deleted = 0;
    let mut i = 0;
    while i < doc.len() {
        let tok = &doc[i];
        match &tok.kind {
            TokenKind::Open(t) => {
                stack.last_mut().unwrap().children.push(Symbol::Tag(t.clone()));
                stack.push(Open {
                    tag: t.clone(),
                    key: Path::single(t.clone()),
                    children: Vec::new(),
                });
                out.push(tok.clone());
                i += 1;
            }
            TokenKind::Chars(_) => {
                stack.last_mut().unwrap().children.push(Symbol::Chars);
                out.push(tok.clone());
                i += 1;
            }
            TokenKind::Close(_) => {
                let run = doc[i..].iter().take_while(|t| matches!(t.kind, TokenKind::Close(_))).count();
                let next = &doc[i + run];
                let closing: Vec<&Open> = stack.iter().rev().take(run).collect();
                let m = (0..=run)
                    .rev()
                    .find(|&m| {
                        let follower = if m < run { &doc[i + m] } else { next };
                        implicit_ok(defs, &closing[..m], follower)
                    })
                    .unwrap();
                deleted += m;
                out.extend(doc[i + m..i + run].iter().cloned());
                stack.truncate(stack.len() - run);
                i += run;
            }
            _ => {
                out.push(tok.clone());
                i += 1;
            }
        }
    }
    (out, deleted)
}
