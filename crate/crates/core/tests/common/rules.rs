//! One hand-derived token stream per tokenizer rewrite rule.

use d2d_core::model::{CloseTarget, Ident, TokenKind};
use d2d_core::tokenizer::{tokenize_traced, Rule, TokenizerConfig, DISCARDING_TRAILING, INVALID_COMMAND, PENDING_PARENTHESES, PREMATURE_EOF};

pub fn id(s: &str) -> Ident {
    Ident::must(s)
}
pub fn chars(s: &str) -> TokenKind {
    TokenKind::Chars(s.into())
}
pub fn open(s: &str) -> TokenKind {
    TokenKind::Open(id(s))
}
pub fn close(s: &str) -> TokenKind {
    TokenKind::Close(CloseTarget::Tag(id(s)))
}
pub fn forced(s: &str) -> TokenKind {
    TokenKind::CloseForced(CloseTarget::Tag(id(s)))
}
pub const ANY: TokenKind = TokenKind::Close(CloseTarget::Wildcard);
pub const ANY_FORCED: TokenKind = TokenKind::CloseForced(CloseTarget::Wildcard);
pub const EOF: TokenKind = TokenKind::Eof;

pub fn warning(m: &str) -> TokenKind {
    TokenKind::Warning(m.into())
}
pub fn error(m: &str) -> TokenKind {
    TokenKind::Error(m.into())
}

pub fn cases() -> Vec<(Rule, &'static str, Vec<TokenKind>)> {
    vec![
        (Rule::LiteralCommand, "a ## b#eof", vec![chars("a "), chars("#b"), EOF]),
        (
            Rule::LineComment,
            "x // note\ny#eof",
            vec![chars("x "), TokenKind::Comment(" note".into()), chars("\ny"), EOF],
        ),
        (
            Rule::BlockComment,
            "x/* a\nb */y#eof",
            vec![chars("x"), TokenKind::Comment(" a\nb ".into()), chars("y"), EOF],
        ),
        (Rule::OpenWs, "#p\ntext#eof", vec![open("p"), chars("text"), EOF]),
        (Rule::OpenParen, "#em(x)#eof", vec![open("em"), chars("x"), close("em"), EOF]),
        (
            Rule::ParenClose,
            "#a[#b<x>y]#eof",
            vec![open("a"), open("b"), chars("x"), close("b"), chars("y"), close("a"), EOF],
        ),
        (Rule::EmptyTag, "#br/x#eof", vec![TokenKind::Empty(id("br")), chars("x"), EOF]),
        (Rule::EmptyForced, "#br///x#eof", vec![TokenKind::EmptyForced(id("br")), chars("x"), EOF]),
        (Rule::OpenBare, "#b#eof", vec![open("b"), EOF]),
        (Rule::NumericSlash, "#41/x#eof", vec![chars("A"), chars("x"), EOF]),
        (Rule::Numeric, "#263a x#eof", vec![chars("\u{263a}"), chars(" x"), EOF]),
        (Rule::CloseWs, "#/p x#eof", vec![close("p"), chars("x"), EOF]),
        (Rule::CloseForcedWs, "#///p\nx#eof", vec![forced("p"), chars("x"), EOF]),
        (Rule::CloseAnyWs, "#/ x#eof", vec![ANY, chars("x"), EOF]),
        (Rule::CloseBare, "#/p,x#eof", vec![close("p"), chars(",x"), EOF]),
        (Rule::CloseForcedBare, "#///p#eof", vec![forced("p"), EOF]),
        (Rule::CloseAny, "#/,#eof", vec![ANY, chars(","), EOF]),
        (Rule::CloseAnyForcedWs, "#/// #eof", vec![ANY_FORCED, EOF]),
        (Rule::CloseAnyForced, "#///,#eof", vec![ANY_FORCED, chars(","), EOF]),
        (Rule::Chars, "plain text#eof", vec![chars("plain text"), EOF]),
        (
            Rule::PendingParens,
            "#em<x#eof",
            vec![open("em"), chars("x"), warning(PENDING_PARENTHESES), EOF],
        ),
        (
            Rule::TrailingChars,
            "x#eof junk",
            vec![chars("x"), warning(DISCARDING_TRAILING), EOF],
        ),
        (Rule::Eof, "#eof", vec![EOF]),
        (Rule::PrematureEnd, "text", vec![chars("text"), error(PREMATURE_EOF)]),
        (
            Rule::InvalidCommand,
            "#%x#eof",
            vec![error(INVALID_COMMAND), chars("%x"), EOF],
        ),
    ]
}


/// Runs the case for `rule`: the token stream must match and the rule must
/// fire.
pub fn check_rule(rule: Rule) -> Result<(), String> {
    let (_, input, expected) = cases()
        .into_iter()
        .find(|(r, _, _)| *r == rule)
        .ok_or_else(|| format!("no case for {rule:?}"))?;
    let (tokens, fired) = tokenize_traced(input, &TokenizerConfig::default());
    let got: Vec<_> = tokens.into_iter().map(|t| t.kind).collect();
    if got != expected {
        return Err(format!("tokens for {input:?}: got {got:?}, expected {expected:?}"));
    }
    if !fired.contains(&rule) {
        return Err(format!("{rule:?} did not fire on {input:?}: {fired:?}"));
    }
    Ok(())
}

/// Every rule has exactly one case.
pub fn checklist() -> Result<(), String> {
    let cases = cases();
    for rule in Rule::ALL {
        let n = cases.iter().filter(|(r, _, _)| *r == rule).count();
        if n != 1 {
            return Err(format!("rule {rule:?} has {n} cases"));
        }
    }
    if cases.len() != Rule::ALL.len() {
        return Err("cases for unknown rules".into());
    }
    Ok(())
}
