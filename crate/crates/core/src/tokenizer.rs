//! Text corpus to token stream.
//!
//! Each step looks at the remaining input, finds every rewrite rule that
//! matches a prefix of it, and applies the one with the longest match; ties
//! go to the rule listed first in [`Rule::ALL`].

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::model::{is_ident_continue, CloseTarget, Ident, Pos, Token, TokenKind};

pub const PENDING_PARENTHESES: &str = "pending parentheses";
pub const DISCARDING_TRAILING: &str = "discarding trailing characters";
pub const PREMATURE_EOF: &str = "premature end of file";
pub const INVALID_COMMAND: &str = "invalid command";
pub const INVALID_CHAR_REF: &str = "invalid character reference";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizerConfig {
    pub command_char: char,
    pub comment_char: char,
    /// Opening to closing character of the one-character parentheses.
    pub parens: BTreeMap<char, char>,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        let parens = [
            ('(', ')'),
            ('<', '>'),
            ('[', ']'),
            ('{', '}'),
            ('.', '.'),
            ('!', '!'),
            ('\\', '\\'),
            (':', ':'),
            ('$', '$'),
            ('^', '^'),
        ]
        .into_iter()
        .collect();
        TokenizerConfig {
            command_char: '#',
            comment_char: '/',
            parens,
        }
    }
}

impl TokenizerConfig {
    pub fn with_chars(command_char: char, comment_char: char) -> Self {
        TokenizerConfig {
            command_char,
            comment_char,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let (cmd, cmt) = (self.command_char, self.comment_char);
        if cmd == cmt {
            return Err(format!("command and comment character are both {cmd:?}"));
        }
        for c in [cmd, cmt] {
            if c.is_whitespace() || is_ident_continue(c) {
                return Err(format!("{c:?} cannot be used as command or comment character"));
            }
        }
        for (&open, &close) in &self.parens {
            for c in [open, close] {
                if c == cmd || c == cmt {
                    return Err(format!("{c:?} is both a parenthesis and a command/comment character"));
                }
                if c.is_whitespace() || is_ident_continue(c) || c == '/' {
                    return Err(format!("{c:?} cannot be a parenthesis character"));
                }
            }
        }
        Ok(())
    }
}

/// The rewrite rules, in tie-breaking order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    /// `#` followed by more `#`, blanks or newlines: a literal command char.
    LiteralCommand,
    /// `//…` up to (not including) the newline.
    LineComment,
    /// `/*…*/`
    BlockComment,
    /// `#tag` plus one blank or newline.
    OpenWs,
    /// `#tag` plus an opening parenthesis character.
    OpenParen,
    /// The closing character of the innermost pending parenthesis.
    ParenClose,
    /// `#tag/`
    EmptyTag,
    /// `#tag///`
    EmptyForced,
    /// `#tag`
    OpenBare,
    /// `#41/`
    NumericSlash,
    /// `#41`
    Numeric,
    /// `#/tag` plus blank or newline.
    CloseWs,
    /// `#///tag` plus blank or newline.
    CloseForcedWs,
    /// `#/` plus blank or newline.
    CloseAnyWs,
    /// `#/tag`
    CloseBare,
    /// `#///tag`
    CloseForcedBare,
    /// `#/`
    CloseAny,
    /// `#///` plus blank or newline.
    CloseAnyForcedWs,
    /// `#///`
    CloseAnyForced,
    /// Plain character data.
    Chars,
    /// `#eof` while parentheses are still open.
    PendingParens,
    /// `#eof` followed by more input.
    TrailingChars,
    /// `#eof` at the very end.
    Eof,
    /// Input exhausted without `#eof`.
    PrematureEnd,
    /// Command character that starts nothing known.
    InvalidCommand,
}

impl Rule {
    pub const ALL: [Rule; 25] = [
        Rule::LiteralCommand,
        Rule::LineComment,
        Rule::BlockComment,
        Rule::OpenWs,
        Rule::OpenParen,
        Rule::ParenClose,
        Rule::EmptyTag,
        Rule::EmptyForced,
        Rule::OpenBare,
        Rule::NumericSlash,
        Rule::Numeric,
        Rule::CloseWs,
        Rule::CloseForcedWs,
        Rule::CloseAnyWs,
        Rule::CloseBare,
        Rule::CloseForcedBare,
        Rule::CloseAny,
        Rule::CloseAnyForcedWs,
        Rule::CloseAnyForced,
        Rule::Chars,
        Rule::PendingParens,
        Rule::TrailingChars,
        Rule::Eof,
        Rule::PrematureEnd,
        Rule::InvalidCommand,
    ];
}

/// What a matched rule does besides consuming its prefix.
#[derive(Debug, Clone)]
enum Action {
    Emit(TokenKind),
    OpenParen(Ident, char),
    CloseParen,
    Literal,
    ClearParens,
    Truncate,
    Finish,
    CharRef(String),
}

/// Tokenizer state: tokens emitted so far, the unread input and the
/// stack of pending parentheses (expected closer, tag).
#[derive(Debug, Clone)]
pub struct TokenizerState {
    pub emitted: Vec<Token>,
    pub paren_stack: Vec<(char, Ident)>,
    input: Vec<char>,
    cursor: usize,
    pos: Pos,
    literal_prefix: Option<(Pos, char)>,
    finished: bool,
}

impl TokenizerState {
    pub fn new(input: &str) -> Self {
        TokenizerState {
            emitted: Vec::new(),
            paren_stack: Vec::new(),
            input: input.chars().collect(),
            cursor: 0,
            pos: Pos {
                line: 1,
                column: 1,
                offset: 0,
            },
            literal_prefix: None,
            finished: false,
        }
    }

    /// State with a pre-populated parenthesis stack, for driving single steps.
    pub fn with_parens(input: &str, parens: Vec<(char, Ident)>) -> Self {
        TokenizerState {
            paren_stack: parens,
            ..Self::new(input)
        }
    }

    pub fn remaining(&self) -> String {
        self.input[self.cursor..].iter().collect()
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    fn rest(&self) -> &[char] {
        &self.input[self.cursor..]
    }

    fn advance(&mut self, n: usize) {
        for &c in &self.input[self.cursor..self.cursor + n] {
            self.pos.offset += c.len_utf8();
            if c == '\n' {
                self.pos.line += 1;
                self.pos.column = 1;
            } else {
                self.pos.column += 1;
            }
        }
        self.cursor += n;
    }

    fn push(&mut self, kind: TokenKind, pos: Pos) {
        self.flush_literal();
        self.emitted.push(Token::new(kind, pos));
    }

    fn flush_literal(&mut self) {
        if let Some((p, c)) = self.literal_prefix.take() {
            self.emitted.push(Token::new(TokenKind::Chars(c.to_string()), p));
        }
    }
}

fn is_blank(c: char) -> bool {
    c == ' ' || c == '\t'
}

fn is_newline(c: char) -> bool {
    c == '\n' || c == '\r'
}

fn is_blank_or_newline(c: char) -> bool {
    is_blank(c) || is_newline(c)
}

/// Reads an identifier at the start of `s`; returns it with its length.
fn read_ident(s: &[char]) -> Option<(Ident, usize)> {
    if !s.first()?.is_ascii_alphabetic() {
        return None;
    }
    let len = 1 + s[1..].iter().take_while(|&&c| is_ident_continue(c)).count();
    let name: String = s[..len].iter().collect();
    Some((Ident::new(name).ok()?, len))
}

fn starts_with(s: &[char], prefix: &[char]) -> bool {
    s.len() >= prefix.len() && &s[..prefix.len()] == prefix
}

struct Candidate {
    rule: Rule,
    len: usize,
    action: Action,
}

fn candidates(state: &TokenizerState, cfg: &TokenizerConfig) -> Vec<Candidate> {
    let s = state.rest();
    let cmd = cfg.command_char;
    let cmt = cfg.comment_char;
    let mut out = Vec::new();
    let mut add = |rule, len, action| out.push(Candidate { rule, len, action });

    if s.is_empty() {
        add(Rule::PrematureEnd, 0, Action::Finish);
        return out;
    }

    let top_closer = state.paren_stack.last().map(|&(c, _)| c);

    if s[0] == cmd {
        let eof_word = ['e', 'o', 'f'];
        if starts_with(&s[1..], &eof_word) {
            // `#eof` is reserved; it is never an element name.
            let word_len = 1 + s[1..].iter().take_while(|&&c| is_ident_continue(c)).count();
            if word_len == 4 {
                if !state.paren_stack.is_empty() {
                    add(Rule::PendingParens, s.len(), Action::ClearParens);
                } else if s[4..].iter().any(|c| !c.is_whitespace()) {
                    add(Rule::TrailingChars, s.len(), Action::Truncate);
                } else {
                    add(Rule::Eof, 4, Action::Emit(TokenKind::Eof));
                }
            }
        }

        let lit_len = s[1..]
            .iter()
            .take_while(|&&c| c == cmd || is_blank_or_newline(c))
            .count();
        if lit_len > 0 {
            add(Rule::LiteralCommand, 1 + lit_len, Action::Literal);
        }

        if let Some((tag, n)) = read_ident(&s[1..]).filter(|(t, _)| t.as_str() != "eof") {
            let after = &s[1 + n..];
            match after.first() {
                Some(&c) if is_blank_or_newline(c) => {
                    add(Rule::OpenWs, n + 2, Action::Emit(TokenKind::Open(tag.clone())))
                }
                Some(c) if cfg.parens.contains_key(c) => {
                    add(Rule::OpenParen, n + 2, Action::OpenParen(tag.clone(), cfg.parens[c]))
                }
                _ => {}
            }
            if starts_with(after, &['/', '/', '/']) {
                add(Rule::EmptyForced, n + 4, Action::Emit(TokenKind::EmptyForced(tag.clone())));
            }
            if after.first() == Some(&'/') {
                add(Rule::EmptyTag, n + 2, Action::Emit(TokenKind::Empty(tag.clone())));
            }
            add(Rule::OpenBare, n + 1, Action::Emit(TokenKind::Open(tag)));
        }

        if s.get(1).is_some_and(|c| c.is_ascii_digit()) {
            let n = 1 + s[2..]
                .iter()
                .take_while(|c| c.is_ascii_digit() || ('a'..='f').contains(c))
                .count();
            let digits: String = s[1..1 + n].iter().collect();
            if s.get(1 + n) == Some(&'/') {
                add(Rule::NumericSlash, n + 2, Action::CharRef(digits.clone()));
            }
            add(Rule::Numeric, n + 1, Action::CharRef(digits));
        }

        if s.get(1) == Some(&'/') {
            let forced = starts_with(&s[1..], &['/', '/', '/']);
            let closes = |body: usize| -> Option<(Ident, usize, bool)> {
                let (tag, n) = read_ident(&s[body..])?;
                let ws = s.get(body + n).is_some_and(|&c| is_blank_or_newline(c));
                Some((tag, n, ws))
            };
            if let Some((tag, n, ws)) = closes(2) {
                let target = CloseTarget::Tag(tag);
                if ws {
                    add(Rule::CloseWs, n + 3, Action::Emit(TokenKind::Close(target.clone())));
                }
                add(Rule::CloseBare, n + 2, Action::Emit(TokenKind::Close(target)));
            }
            if forced {
                if let Some((tag, n, ws)) = closes(4) {
                    let target = CloseTarget::Tag(tag);
                    if ws {
                        add(
                            Rule::CloseForcedWs,
                            n + 5,
                            Action::Emit(TokenKind::CloseForced(target.clone())),
                        );
                    }
                    add(Rule::CloseForcedBare, n + 4, Action::Emit(TokenKind::CloseForced(target)));
                }
                let wildcard = TokenKind::CloseForced(CloseTarget::Wildcard);
                if s.get(4).is_some_and(|&c| is_blank_or_newline(c)) {
                    add(Rule::CloseAnyForcedWs, 5, Action::Emit(wildcard.clone()));
                }
                add(Rule::CloseAnyForced, 4, Action::Emit(wildcard));
            }
            let wildcard = TokenKind::Close(CloseTarget::Wildcard);
            if s.get(2).is_some_and(|&c| is_blank_or_newline(c)) {
                add(Rule::CloseAnyWs, 3, Action::Emit(wildcard.clone()));
            }
            add(Rule::CloseAny, 2, Action::Emit(wildcard));
        }

        add(Rule::InvalidCommand, 1, Action::Emit(TokenKind::Error(INVALID_COMMAND.into())));
    }

    if s[0] == cmt && s.get(1) == Some(&cmt) {
        if let Some(nl) = s.iter().position(|&c| c == '\n') {
            let text: String = s[2..nl].iter().collect();
            let text = text.strip_suffix('\r').map(str::to_string).unwrap_or(text);
            add(Rule::LineComment, nl, Action::Emit(TokenKind::Comment(text)));
        }
    }

    if s[0] == cmt && s.get(1) == Some(&'*') {
        if let Some(end) = (2..s.len().saturating_sub(1)).find(|&i| s[i] == '*' && s[i + 1] == cmt) {
            let text: String = s[2..end].iter().collect();
            add(Rule::BlockComment, end + 2, Action::Emit(TokenKind::Comment(text)));
        }
    }

    if top_closer == Some(s[0]) {
        add(Rule::ParenClose, 1, Action::CloseParen);
    }

    let chars_len = s
        .iter()
        .enumerate()
        .take_while(|&(i, &c)| {
            let comment_start =
                c == cmt && i + 1 < s.len() && (s[i + 1] == cmt || s[i + 1] == '*');
            c != cmd && Some(c) != top_closer && !comment_start
        })
        .count();
    if chars_len > 0 {
        let text: String = s[..chars_len].iter().collect();
        add(Rule::Chars, chars_len, Action::Emit(TokenKind::Chars(text)));
    }

    // A comment start that never terminates is plain text.
    if out.is_empty() {
        let text: String = s[..1].iter().collect();
        out.push(Candidate {
            rule: Rule::Chars,
            len: 1,
            action: Action::Emit(TokenKind::Chars(text)),
        });
    }
    out
}

/// Applies one rewrite rule. Returns the rule applied, or `None` once the
/// stream is complete.
pub fn step(state: &mut TokenizerState, cfg: &TokenizerConfig) -> Option<Rule> {
    if state.finished {
        return None;
    }
    let best = candidates(state, cfg)
        .into_iter()
        .min_by(|a, b| b.len.cmp(&a.len).then(a.rule.cmp(&b.rule)))
        .expect("some rule always matches");
    let start = state.pos;
    match best.action {
        Action::Emit(TokenKind::Chars(mut text)) => {
            let pos = match state.literal_prefix.take() {
                Some((p, c)) => {
                    text.insert(0, c);
                    p
                }
                None => start,
            };
            state.emitted.push(Token::new(TokenKind::Chars(text), pos));
            state.advance(best.len);
        }
        Action::Emit(kind) => {
            let is_eof = kind == TokenKind::Eof;
            state.push(kind, start);
            state.advance(best.len);
            if is_eof {
                state.finished = true;
            }
        }
        Action::OpenParen(tag, closer) => {
            state.push(TokenKind::Open(tag.clone()), start);
            state.paren_stack.push((closer, tag));
            state.advance(best.len);
        }
        Action::CloseParen => {
            let (_, tag) = state.paren_stack.pop().expect("guarded by rule");
            state.push(TokenKind::Close(CloseTarget::Tag(tag)), start);
            state.advance(best.len);
        }
        Action::Literal => {
            state.flush_literal();
            state.literal_prefix = Some((start, cfg.command_char));
            state.advance(best.len);
        }
        Action::ClearParens => {
            state.push(TokenKind::Warning(PENDING_PARENTHESES.into()), start);
            state.paren_stack.clear();
        }
        Action::Truncate => {
            state.push(TokenKind::Warning(DISCARDING_TRAILING.into()), start);
            state.input.truncate(state.cursor + 4);
        }
        Action::Finish => {
            state.push(TokenKind::Error(PREMATURE_EOF.into()), start);
            state.paren_stack.clear();
            state.finished = true;
        }
        Action::CharRef(digits) => {
            let kind = u32::from_str_radix(&digits, 16)
                .ok()
                .filter(|&v| v != 0)
                .and_then(char::from_u32)
                .map(|c| TokenKind::Chars(c.to_string()))
                .unwrap_or_else(|| TokenKind::Error(format!("{INVALID_CHAR_REF} #{digits}")));
            state.push(kind, start);
            state.advance(best.len);
        }
    }
    Some(best.rule)
}

/// Tokenizes a whole text corpus. The last token is `Eof` or the
/// "premature end of file" error.
pub fn tokenize(input: &str, cfg: &TokenizerConfig) -> Vec<Token> {
    tokenize_traced(input, cfg).0
}

/// Like [`tokenize`], also returning the rule applied at each step.
pub fn tokenize_traced(input: &str, cfg: &TokenizerConfig) -> (Vec<Token>, Vec<Rule>) {
    let mut state = TokenizerState::new(input);
    let mut rules = Vec::new();
    while let Some(rule) = step(&mut state, cfg) {
        rules.push(rule);
    }
    (state.emitted, rules)
}

fn escape_dump(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

/// One token per line: `KIND<TAB>payload` with `\n`, `\t`, `\r`, `\\` escaped.
pub fn dump_tokens(tokens: &[Token]) -> String {
    let mut out = String::new();
    for t in tokens {
        let _ = writeln!(out, "{}\t{}", t.kind_name(), escape_dump(&t.payload()));
    }
    out
}
