//! Tokenizer. Unicode logical symbols have ASCII spellings (`/\`, `->`, `<=`).

use super::ast::Span;
use super::ParseError;
use crate::num::Integer;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Num(Integer),
    Str(String),
    Char(char),
    // keywords
    Def,
    Method,
    Return,
    Require,
    Ensures,
    Do,
    End,
    Let,
    Mut,
    If,
    Then,
    Else,
    While,
    Invariant,
    Decreasing,
    True,
    False,
    Fun,
    Forall,
    Exists,
    Not,
    Prop,
    // punctuation
    LParen,
    RParen,
    LBracket,
    HashBracket,
    RBracket,
    Comma,
    Colon,
    Semi,
    Dot,
    Bang,
    Walrus,
    FatArrow,
    Times,
    // operators
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Implies,
    Iff,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Num(n) => format!("number `{n}`"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Char(c) => format!("char {c:?}"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Def => "def",
            Tok::Method => "method",
            Tok::Return => "return",
            Tok::Require => "require",
            Tok::Ensures => "ensures",
            Tok::Do => "do",
            Tok::End => "end",
            Tok::Let => "let",
            Tok::Mut => "mut",
            Tok::If => "if",
            Tok::Then => "then",
            Tok::Else => "else",
            Tok::While => "while",
            Tok::Invariant => "invariant",
            Tok::Decreasing => "decreasing",
            Tok::True => "true",
            Tok::False => "false",
            Tok::Fun => "fun",
            Tok::Forall => "∀",
            Tok::Exists => "∃",
            Tok::Not => "¬",
            Tok::Prop => "Prop",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::HashBracket => "#[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::Semi => ";",
            Tok::Dot => ".",
            Tok::Bang => "!",
            Tok::Walrus => ":=",
            Tok::FatArrow => "=>",
            Tok::Times => "×",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Percent => "%",
            Tok::Eq => "=",
            Tok::Ne => "≠",
            Tok::Lt => "<",
            Tok::Le => "≤",
            Tok::Gt => ">",
            Tok::Ge => "≥",
            Tok::And => "∧",
            Tok::Or => "∨",
            Tok::Implies => "→",
            Tok::Iff => "↔",
            _ => "?",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "def" => Tok::Def,
        "method" => Tok::Method,
        "return" => Tok::Return,
        "require" | "requires" => Tok::Require,
        "ensures" => Tok::Ensures,
        "do" => Tok::Do,
        "end" => Tok::End,
        "let" => Tok::Let,
        "mut" => Tok::Mut,
        "if" => Tok::If,
        "then" => Tok::Then,
        "else" => Tok::Else,
        "while" => Tok::While,
        "invariant" => Tok::Invariant,
        "decreasing" => Tok::Decreasing,
        "true" => Tok::True,
        "false" => Tok::False,
        "fun" => Tok::Fun,
        "forall" => Tok::Forall,
        "exists" => Tok::Exists,
        "not" => Tok::Not,
        "Prop" => Tok::Prop,
        _ => return None,
    })
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl Lexer<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error(&self, span: Span, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax { line: span.line, col: span.col, msg: msg.into() }
    }

    fn escape(&mut self, span: Span) -> Result<char, ParseError> {
        match self.bump() {
            Some('n') => Ok('\n'),
            Some('t') => Ok('\t'),
            Some('\\') => Ok('\\'),
            Some('"') => Ok('"'),
            Some('\'') => Ok('\''),
            Some(c) => Err(self.error(span, format!("unknown escape `\\{c}`"))),
            None => Err(self.error(span, "unterminated literal")),
        }
    }

    fn next_token(&mut self) -> Result<Token, ParseError> {
        // whitespace and `--` comments
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('-') => {
                    let mut look = self.chars.clone();
                    look.next();
                    if look.next() == Some('-') {
                        while let Some(c) = self.peek() {
                            if c == '\n' {
                                break;
                            }
                            self.bump();
                        }
                    } else {
                        break;
                    }
                }
                _ => break,
            }
        }
        let span = Span::new(self.line, self.col);
        let Some(c) = self.bump() else {
            return Ok(Token { tok: Tok::Eof, span });
        };
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            '.' => Tok::Dot,
            '+' => Tok::Plus,
            '*' => Tok::Star,
            '%' => Tok::Percent,
            '×' => Tok::Times,
            '≠' => Tok::Ne,
            '≤' => Tok::Le,
            '≥' => Tok::Ge,
            '∧' => Tok::And,
            '∨' => Tok::Or,
            '¬' => Tok::Not,
            '→' => Tok::Implies,
            '↔' => Tok::Iff,
            '∀' => Tok::Forall,
            '∃' => Tok::Exists,
            '#' => {
                if self.eat('[') {
                    Tok::HashBracket
                } else {
                    return Err(self.error(span, "expected `[` after `#`"));
                }
            }
            ':' => {
                if self.eat('=') {
                    Tok::Walrus
                } else {
                    Tok::Colon
                }
            }
            '=' => {
                if self.eat('>') {
                    Tok::FatArrow
                } else {
                    self.eat('=');
                    Tok::Eq
                }
            }
            '!' => {
                if self.eat('=') {
                    Tok::Ne
                } else {
                    Tok::Bang
                }
            }
            '-' => {
                if self.eat('>') {
                    Tok::Implies
                } else {
                    Tok::Minus
                }
            }
            '<' => {
                if self.eat('=') {
                    Tok::Le
                } else if self.eat('-') {
                    if self.eat('>') {
                        Tok::Iff
                    } else {
                        return Err(self.error(span, "expected `<->`"));
                    }
                } else {
                    Tok::Lt
                }
            }
            '>' => {
                if self.eat('=') {
                    Tok::Ge
                } else {
                    Tok::Gt
                }
            }
            '/' => {
                if self.eat('\\') {
                    Tok::And
                } else {
                    Tok::Slash
                }
            }
            '\\' => {
                if self.eat('/') {
                    Tok::Or
                } else {
                    return Err(self.error(span, "unexpected `\\`"));
                }
            }
            '&' => {
                if self.eat('&') {
                    Tok::And
                } else {
                    return Err(self.error(span, "expected `&&`"));
                }
            }
            '|' => {
                if self.eat('|') {
                    Tok::Or
                } else {
                    return Err(self.error(span, "expected `||`"));
                }
            }
            '"' => {
                let mut s = String::new();
                loop {
                    match self.bump() {
                        Some('"') => break,
                        Some('\\') => s.push(self.escape(span)?),
                        Some(c) => s.push(c),
                        None => return Err(self.error(span, "unterminated string")),
                    }
                }
                Tok::Str(s)
            }
            '\'' => {
                let c = match self.bump() {
                    Some('\\') => self.escape(span)?,
                    Some(c) => c,
                    None => return Err(self.error(span, "unterminated char")),
                };
                if !self.eat('\'') {
                    return Err(self.error(span, "unterminated char"));
                }
                Tok::Char(c)
            }
            c if c.is_ascii_digit() => {
                let mut s = String::from(c);
                while let Some(d) = self.peek().filter(|d| d.is_ascii_digit() || *d == '_') {
                    self.bump();
                    if d != '_' {
                        s.push(d);
                    }
                }
                Tok::Num(s.parse().map_err(|_| self.error(span, "bad number"))?)
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut s = String::from(c);
                while let Some(d) = self
                    .peek()
                    .filter(|d| d.is_alphanumeric() || *d == '_' || *d == '\'')
                {
                    self.bump();
                    s.push(d);
                }
                keyword(&s).unwrap_or(Tok::Ident(s))
            }
            other => return Err(self.error(span, format!("unexpected character `{other}`"))),
        };
        Ok(Token { tok, span })
    }
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut lx = Lexer { chars: source.chars().peekable(), line: 1, col: 1 };
    let mut out = Vec::new();
    loop {
        let t = lx.next_token()?;
        let eof = t.tok == Tok::Eof;
        out.push(t);
        if eof {
            return Ok(out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn ascii_and_unicode_agree() {
        assert_eq!(toks("a /\\ b -> c <-> d"), toks("a ∧ b → c ↔ d"));
        assert_eq!(toks("a <= b >= c != d"), toks("a ≤ b ≥ c ≠ d"));
    }

    #[test]
    fn comments_and_positions() {
        let t = tokenize("-- note\n  x - 1").unwrap();
        assert_eq!(t[0].tok, Tok::Ident("x".into()));
        assert_eq!((t[0].span.line, t[0].span.col), (2, 3));
        assert_eq!(t[1].tok, Tok::Minus);
    }

    #[test]
    fn index_bang_and_walrus() {
        assert_eq!(
            toks("a[i]! := #[1]"),
            vec![
                Tok::Ident("a".into()),
                Tok::LBracket,
                Tok::Ident("i".into()),
                Tok::RBracket,
                Tok::Bang,
                Tok::Walrus,
                Tok::HashBracket,
                Tok::Num(1.into()),
                Tok::RBracket,
                Tok::Eof
            ]
        );
    }
}
