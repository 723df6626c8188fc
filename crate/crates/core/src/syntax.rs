//! Lexer and recursive-descent parser for the concrete expression syntax,
//! shared with the ddf module parser.
//!
//! Operators from loosest to tightest: `|`, `&`, `,`, `~`, prefix `>`,
//! postfix `* + ? ~* ~+ ^(T/id)`, the set operators `U A -`
//! (left-associative), `..`, then atoms.

use crate::error::SyntaxError;
use crate::model::{is_ident_continue, Expr, Ident, Path, Pos};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Str(String),
    Set(String),
    Hex(char),
    Keyword(String), // #chars, #empty, #none
    Dot,
    DotDot,
    Bar,
    Amp,
    Comma,
    Tilde,
    TildeStar,
    TildePlus,
    Star,
    Plus,
    Question,
    Greater,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Caret,
    Slash,
    At,
    Minus,
    Arrow,
    Equals,
    Semi,
    Colon,
    LBrace,
    RBrace,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Str(_) => "string literal".into(),
            Tok::Set(_) => "character set".into(),
            Tok::Hex(_) => "character code".into(),
            Tok::Keyword(k) => format!("`{k}`"),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", punct(other)),
        }
    }
}

fn punct(t: &Tok) -> &'static str {
    match t {
        Tok::Dot => ".",
        Tok::DotDot => "..",
        Tok::Bar => "|",
        Tok::Amp => "&",
        Tok::Comma => ",",
        Tok::Tilde => "~",
        Tok::TildeStar => "~*",
        Tok::TildePlus => "~+",
        Tok::Star => "*",
        Tok::Plus => "+",
        Tok::Question => "?",
        Tok::Greater => ">",
        Tok::LBracket => "[",
        Tok::RBracket => "]",
        Tok::LParen => "(",
        Tok::RParen => ")",
        Tok::Caret => "^",
        Tok::Slash => "/",
        Tok::At => "@",
        Tok::Minus => "-",
        Tok::Arrow => "->",
        Tok::Equals => "=",
        Tok::Semi => ";",
        Tok::Colon => ":",
        Tok::LBrace => "{",
        Tok::RBrace => "}",
        _ => "?",
    }
}

pub(crate) fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, SyntaxError> {
    Lexer::new(src).run()
}

struct Lexer<'a> {
    src: &'a str,
    chars: Vec<(usize, char)>,
    i: usize,
    line: u32,
    column: u32,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            chars: src.char_indices().collect(),
            i: 0,
            line: 1,
            column: 1,
        }
    }

    fn peek(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.i + ahead).map(|&(_, c)| c)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek(0)?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            column: self.column,
            offset: self.chars.get(self.i).map_or(self.src.len(), |&(o, _)| o),
        }
    }

    fn err(&self, pos: Pos, message: impl Into<String>) -> SyntaxError {
        SyntaxError {
            line: pos.line,
            column: pos.column,
            message: message.into(),
        }
    }

    fn run(mut self) -> Result<Vec<(Tok, Pos)>, SyntaxError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia()?;
            let pos = self.pos();
            let Some(c) = self.peek(0) else {
                out.push((Tok::Eof, pos));
                return Ok(out);
            };
            let tok = match c {
                '"' | '\'' => {
                    self.bump();
                    let body = self.quoted(c, pos)?;
                    if c == '"' {
                        Tok::Str(body)
                    } else {
                        Tok::Set(body)
                    }
                }
                '#' => {
                    self.bump();
                    let word = self.word();
                    match word.as_str() {
                        "chars" | "empty" | "none" => Tok::Keyword(format!("#{word}")),
                        _ => return Err(self.err(pos, format!("unknown keyword `#{word}`"))),
                    }
                }
                '0' if self.peek(1) == Some('x') => {
                    self.bump();
                    self.bump();
                    let mut digits = String::new();
                    while let Some(d) = self.peek(0).filter(|d| d.is_ascii_hexdigit()) {
                        digits.push(d);
                        self.bump();
                    }
                    let ch = u32::from_str_radix(&digits, 16)
                        .ok()
                        .and_then(char::from_u32)
                        .ok_or_else(|| self.err(pos, format!("invalid character code 0x{digits}")))?;
                    Tok::Hex(ch)
                }
                c if c.is_ascii_alphabetic() => Tok::Ident(self.word()),
                _ => {
                    self.bump();
                    match (c, self.peek(0)) {
                        ('.', Some('.')) => {
                            self.bump();
                            Tok::DotDot
                        }
                        ('~', Some('*')) => {
                            self.bump();
                            Tok::TildeStar
                        }
                        ('~', Some('+')) => {
                            self.bump();
                            Tok::TildePlus
                        }
                        ('-', Some('>')) => {
                            self.bump();
                            Tok::Arrow
                        }
                        ('.', _) => Tok::Dot,
                        ('|', _) => Tok::Bar,
                        ('&', _) => Tok::Amp,
                        (',', _) => Tok::Comma,
                        ('~', _) => Tok::Tilde,
                        ('*', _) => Tok::Star,
                        ('+', _) => Tok::Plus,
                        ('?', _) => Tok::Question,
                        ('>', _) => Tok::Greater,
                        ('[', _) => Tok::LBracket,
                        (']', _) => Tok::RBracket,
                        ('(', _) => Tok::LParen,
                        (')', _) => Tok::RParen,
                        ('^', _) => Tok::Caret,
                        ('/', _) => Tok::Slash,
                        ('@', _) => Tok::At,
                        ('-', _) => Tok::Minus,
                        ('=', _) => Tok::Equals,
                        (';', _) => Tok::Semi,
                        (':', _) => Tok::Colon,
                        ('{', _) => Tok::LBrace,
                        ('}', _) => Tok::RBrace,
                        _ => return Err(self.err(pos, format!("unexpected character {c:?}"))),
                    }
                }
            };
            out.push((tok, pos));
        }
    }

    fn word(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek(0).filter(|&c| is_ident_continue(c)) {
            s.push(c);
            self.bump();
        }
        s
    }

    fn quoted(&mut self, quote: char, start: Pos) -> Result<String, SyntaxError> {
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(self.err(start, "unterminated quoted text")),
                Some(c) if c == quote => return Ok(s),
                Some('\\') => match self.bump() {
                    Some('n') => s.push('\n'),
                    Some('t') => s.push('\t'),
                    Some('r') => s.push('\r'),
                    Some(c @ ('\\' | '"' | '\'')) => s.push(c),
                    _ => return Err(self.err(start, "invalid escape in quoted text")),
                },
                Some(c) => s.push(c),
            }
        }
    }

    fn skip_trivia(&mut self) -> Result<(), SyntaxError> {
        loop {
            match (self.peek(0), self.peek(1)) {
                (Some(c), _) if c.is_whitespace() => {
                    self.bump();
                }
                (Some('/'), Some('/')) => {
                    while !matches!(self.peek(0), None | Some('\n')) {
                        self.bump();
                    }
                }
                (Some('/'), Some('*')) => {
                    let start = self.pos();
                    self.bump();
                    self.bump();
                    loop {
                        match (self.peek(0), self.peek(1)) {
                            (Some('*'), Some('/')) => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            (Some(_), _) => {
                                self.bump();
                            }
                            (None, _) => return Err(self.err(start, "unterminated comment")),
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }
}

/// Token cursor with the expression grammar. The ddf parser drives the same
/// cursor for its statements.
pub(crate) struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
}

impl Parser {
    pub(crate) fn new(src: &str) -> Result<Self, SyntaxError> {
        Ok(Parser { toks: lex(src)?, i: 0 })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    pub(crate) fn peek_at(&self, ahead: usize) -> &Tok {
        let idx = (self.i + ahead).min(self.toks.len() - 1);
        &self.toks[idx].0
    }

    pub(crate) fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    pub(crate) fn next(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    pub(crate) fn at(&self, t: &Tok) -> bool {
        self.peek() == t
    }

    pub(crate) fn eat(&mut self, t: &Tok) -> bool {
        if self.at(t) {
            self.next();
            true
        } else {
            false
        }
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> SyntaxError {
        let pos = self.pos();
        SyntaxError {
            line: pos.line,
            column: pos.column,
            message: message.into(),
        }
    }

    pub(crate) fn unexpected(&self, wanted: &str) -> SyntaxError {
        self.error(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    pub(crate) fn expect(&mut self, t: &Tok) -> Result<(), SyntaxError> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(self.unexpected(&t.describe()))
        }
    }

    pub(crate) fn at_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == w)
    }

    pub(crate) fn ident(&mut self) -> Result<Ident, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let id = Ident::new(s).map_err(|e| self.error(e.to_string()))?;
                self.next();
                Ok(id)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    pub(crate) fn path(&mut self) -> Result<Path, SyntaxError> {
        let mut segs = vec![self.ident()?];
        while self.at(&Tok::Dot) && matches!(self.peek_at(1), Tok::Ident(_)) {
            self.next();
            segs.push(self.ident()?);
        }
        Ok(Path::new(segs).expect("non-empty"))
    }

    pub(crate) fn string(&mut self) -> Result<String, SyntaxError> {
        match self.next() {
            Tok::Str(s) => Ok(s),
            _ => {
                self.i -= 1;
                Err(self.unexpected("string literal"))
            }
        }
    }

    pub(crate) fn at_eof(&self) -> bool {
        self.at(&Tok::Eof)
    }

    pub(crate) fn expr(&mut self) -> Result<Expr, SyntaxError> {
        self.alt()
    }

    fn list(
        &mut self,
        sep: Tok,
        inner: fn(&mut Self) -> Result<Expr, SyntaxError>,
    ) -> Result<Vec<Expr>, SyntaxError> {
        let mut items = vec![inner(self)?];
        while self.eat(&sep) {
            items.push(inner(self)?);
        }
        Ok(items)
    }

    fn alt(&mut self) -> Result<Expr, SyntaxError> {
        Ok(Expr::alt(self.list(Tok::Bar, Self::perm)?))
    }

    fn perm(&mut self) -> Result<Expr, SyntaxError> {
        Ok(Expr::perm(self.list(Tok::Amp, Self::seq)?))
    }

    fn seq(&mut self) -> Result<Expr, SyntaxError> {
        Ok(Expr::seq(self.list(Tok::Comma, Self::tight)?))
    }

    fn tight(&mut self) -> Result<Expr, SyntaxError> {
        Ok(Expr::tight_seq(self.list(Tok::Tilde, Self::prefix)?))
    }

    fn set_expr(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.range()?;
        loop {
            let build: fn(Box<Expr>, Box<Expr>) -> Expr = if self.at_word("U") {
                Expr::Union
            } else if self.at_word("A") {
                Expr::Intersect
            } else if self.at(&Tok::Minus) {
                Expr::Minus
            } else {
                return Ok(lhs);
            };
            self.next();
            let rhs = self.range()?;
            lhs = build(Box::new(lhs), Box::new(rhs));
        }
    }

    fn range(&mut self) -> Result<Expr, SyntaxError> {
        let lo = self.atom()?;
        if self.eat(&Tok::DotDot) {
            let hi = self.atom()?;
            return Ok(Expr::Range(Box::new(lo), Box::new(hi)));
        }
        Ok(lo)
    }

    fn prefix(&mut self) -> Result<Expr, SyntaxError> {
        if self.eat(&Tok::Greater) {
            return Ok(Expr::greedy(self.prefix()?));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expr, SyntaxError> {
        let mut e = self.set_expr()?;
        loop {
            e = match self.peek() {
                Tok::Star => Expr::star(e),
                Tok::Plus => Expr::plus(e),
                Tok::Question => Expr::opt(e),
                Tok::TildeStar => Expr::tight_star(e),
                Tok::TildePlus => Expr::tight_plus(e),
                Tok::Caret => {
                    self.next();
                    self.expect(&Tok::LParen)?;
                    let replacement = self.expr()?;
                    self.expect(&Tok::Slash)?;
                    let target = self.ident()?;
                    self.expect(&Tok::RParen)?;
                    e = Expr::LocalSubst {
                        base: Box::new(e),
                        replacement: Box::new(replacement),
                        target,
                    };
                    continue;
                }
                _ => return Ok(e),
            };
            self.next();
        }
    }

    fn atom(&mut self) -> Result<Expr, SyntaxError> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.next();
                Ok(Expr::Literal(s))
            }
            Tok::Set(s) => {
                self.next();
                Ok(Expr::CharSet(s))
            }
            Tok::Hex(c) => {
                self.next();
                Ok(Expr::NumericChar(c))
            }
            Tok::Keyword(k) => {
                self.next();
                Ok(match k.as_str() {
                    "#chars" => Expr::Chars,
                    "#empty" => Expr::Empty,
                    _ => Expr::None,
                })
            }
            Tok::Ident(_) => Ok(Expr::Ref(self.path()?)),
            Tok::At => {
                self.next();
                Ok(Expr::Insert(self.path()?))
            }
            Tok::LParen => {
                self.next();
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Tok::LBracket => {
                self.next();
                let id = self.ident()?;
                let body = self.expr()?;
                self.expect(&Tok::RBracket)?;
                Ok(Expr::Capture(id, Box::new(body)))
            }
            _ => Err(self.unexpected("expression")),
        }
    }
}

/// Parses a complete content-model expression.
pub fn parse_expr(src: &str) -> Result<Expr, SyntaxError> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    if !p.at_eof() {
        return Err(p.unexpected("end of expression"));
    }
    Ok(e)
}
