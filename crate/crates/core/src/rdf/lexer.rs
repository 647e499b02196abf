//! Tokenizer shared by the Turtle, N-Quads and SPARQL-subset parsers.

use std::fmt;

use thiserror::Error;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at {position}")]
pub struct SyntaxError {
    pub message: String,
    pub position: Position,
}

impl SyntaxError {
    pub fn new(message: impl Into<String>, position: Position) -> Self {
        Self {
            message: message.into(),
            position,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Token {
    /// `<...>` with escapes decoded; may be relative.
    IriRef(String),
    PrefixedName { prefix: String, local: String },
    BlankNode(String),
    Variable(String),
    String(String),
    /// `@word`, either a directive keyword or a language tag.
    At(String),
    Integer(String),
    Decimal(String),
    Double(String),
    /// A bare word such as `a`, `true`, `SELECT`.
    Word(String),
    Dot,
    Semicolon,
    Comma,
    OpenBracket,
    CloseBracket,
    OpenParen,
    CloseParen,
    OpenBrace,
    CloseBrace,
    DoubleCaret,
    Star,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
    Bang,
}

impl Token {
    pub fn describe(&self) -> String {
        match self {
            Token::IriRef(s) => format!("<{s}>"),
            Token::PrefixedName { prefix, local } => format!("{prefix}:{local}"),
            Token::BlankNode(s) => format!("_:{s}"),
            Token::Variable(s) => format!("?{s}"),
            Token::String(s) => format!("{s:?}"),
            Token::At(s) => format!("@{s}"),
            Token::Integer(s) | Token::Decimal(s) | Token::Double(s) | Token::Word(s) => s.clone(),
            other => format!("{other:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spanned {
    pub token: Token,
    pub position: Position,
}

pub struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
    _src: &'a str,
}

impl<'a> Lexer<'a> {
    pub fn new(src: &'a str) -> Self {
        Self {
            chars: src.chars().collect(),
            pos: 0,
            line: 1,
            column: 1,
            _src: src,
        }
    }

    /// Starts numbering lines at `line` (used by the line-oriented N-Quads reader).
    pub fn at_line(src: &'a str, line: usize) -> Self {
        let mut lexer = Self::new(src);
        lexer.line = line;
        lexer
    }

    pub fn tokenize(mut self) -> Result<Vec<Spanned>, SyntaxError> {
        let mut out = Vec::new();
        while let Some(tok) = self.next_token()? {
            out.push(tok);
        }
        Ok(out)
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn position(&self) -> Position {
        Position {
            line: self.line,
            column: self.column,
        }
    }

    fn error(&self, message: impl Into<String>) -> SyntaxError {
        SyntaxError::new(message, self.position())
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
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
    }

    fn next_token(&mut self) -> Result<Option<Spanned>, SyntaxError> {
        self.skip_trivia();
        let position = self.position();
        let Some(c) = self.peek() else {
            return Ok(None);
        };
        let token = match c {
            '<' => {
                if let Some(iri) = self.try_iri_ref()? {
                    Token::IriRef(iri)
                } else {
                    self.bump();
                    if self.peek() == Some('=') {
                        self.bump();
                        Token::Le
                    } else {
                        Token::Lt
                    }
                }
            }
            '>' => {
                self.bump();
                if self.peek() == Some('=') {
                    self.bump();
                    Token::Ge
                } else {
                    Token::Gt
                }
            }
            '=' => {
                self.bump();
                Token::Eq
            }
            '!' => {
                self.bump();
                if self.peek() == Some('=') {
                    self.bump();
                    Token::Ne
                } else {
                    Token::Bang
                }
            }
            '&' => {
                self.bump();
                if self.bump() != Some('&') {
                    return Err(SyntaxError::new("expected '&&'", position));
                }
                Token::And
            }
            '|' => {
                self.bump();
                if self.bump() != Some('|') {
                    return Err(SyntaxError::new("expected '||'", position));
                }
                Token::Or
            }
            '"' | '\'' => Token::String(self.string_literal()?),
            '@' => {
                self.bump();
                let word = self.take_while(|c| c.is_ascii_alphanumeric() || c == '-');
                if word.is_empty() {
                    return Err(SyntaxError::new("expected a word after '@'", position));
                }
                Token::At(word)
            }
            '?' | '$' => {
                self.bump();
                let name = self.take_while(|c| c.is_alphanumeric() || c == '_');
                if name.is_empty() {
                    return Err(SyntaxError::new("empty variable name", position));
                }
                Token::Variable(name)
            }
            '_' if self.peek_at(1) == Some(':') => {
                self.bump();
                self.bump();
                let label = self.take_name_chars();
                if label.is_empty() {
                    return Err(SyntaxError::new("empty blank node label", position));
                }
                Token::BlankNode(label)
            }
            '.' if !self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) => {
                self.bump();
                Token::Dot
            }
            ';' => {
                self.bump();
                Token::Semicolon
            }
            ',' => {
                self.bump();
                Token::Comma
            }
            '[' => {
                self.bump();
                Token::OpenBracket
            }
            ']' => {
                self.bump();
                Token::CloseBracket
            }
            '(' => {
                self.bump();
                Token::OpenParen
            }
            ')' => {
                self.bump();
                Token::CloseParen
            }
            '{' => {
                self.bump();
                Token::OpenBrace
            }
            '}' => {
                self.bump();
                Token::CloseBrace
            }
            '*' => {
                self.bump();
                Token::Star
            }
            '^' => {
                self.bump();
                if self.bump() != Some('^') {
                    return Err(SyntaxError::new("expected '^^'", position));
                }
                Token::DoubleCaret
            }
            c if c.is_ascii_digit() || c == '.' || ((c == '+' || c == '-') && self.number_follows()) => {
                self.number()?
            }
            ':' => {
                self.bump();
                let local = self.local_name()?;
                Token::PrefixedName {
                    prefix: String::new(),
                    local,
                }
            }
            c if c.is_alphabetic() || c == '_' => {
                let word = self.take_name_chars();
                if self.peek() == Some(':') {
                    self.bump();
                    let local = self.local_name()?;
                    Token::PrefixedName { prefix: word, local }
                } else {
                    Token::Word(word)
                }
            }
            other => return Err(SyntaxError::new(format!("unexpected character {other:?}"), position)),
        };
        Ok(Some(Spanned { token, position }))
    }

    fn number_follows(&self) -> bool {
        match self.peek_at(1) {
            Some(c) if c.is_ascii_digit() => true,
            Some('.') => self.peek_at(2).is_some_and(|c| c.is_ascii_digit()),
            _ => false,
        }
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let mut out = String::new();
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            out.push(c);
            self.bump();
        }
        out
    }

    /// Name characters with dots allowed inside but not at the end.
    fn take_name_chars(&mut self) -> String {
        let mut out = String::new();
        loop {
            match self.peek() {
                Some(c) if c.is_alphanumeric() || c == '_' || c == '-' => {
                    out.push(c);
                    self.bump();
                }
                Some('.') if self.peek_at(1).is_some_and(|n| n.is_alphanumeric() || n == '_' || n == '-') => {
                    out.push('.');
                    self.bump();
                }
                _ => break,
            }
        }
        out
    }

    fn local_name(&mut self) -> Result<String, SyntaxError> {
        let mut out = String::new();
        loop {
            match self.peek() {
                Some(c) if c.is_alphanumeric() || c == '_' || c == '-' || c == ':' => {
                    out.push(c);
                    self.bump();
                }
                Some('%') => {
                    let (a, b) = (self.peek_at(1), self.peek_at(2));
                    if !(a.is_some_and(|c| c.is_ascii_hexdigit()) && b.is_some_and(|c| c.is_ascii_hexdigit())) {
                        return Err(self.error("invalid percent escape in local name"));
                    }
                    for _ in 0..3 {
                        out.push(self.bump().unwrap_or_default());
                    }
                }
                Some('\\') => {
                    let escaped = self.peek_at(1);
                    match escaped {
                        Some(
                            c @ ('_' | '~' | '.' | '-' | '!' | '$' | '&' | '\'' | '(' | ')' | '*' | '+' | ','
                            | ';' | '=' | '/' | '?' | '#' | '@' | '%'),
                        ) => {
                            self.bump();
                            self.bump();
                            out.push(c);
                        }
                        _ => return Err(self.error("invalid escape in local name")),
                    }
                }
                Some('.') => {
                    // A dot continues the name only when more name characters follow.
                    let continues = self
                        .peek_at(1)
                        .is_some_and(|n| n.is_alphanumeric() || matches!(n, '_' | '-' | ':' | '%' | '\\' | '.'));
                    if continues && self.dots_then_name() {
                        out.push('.');
                        self.bump();
                    } else {
                        break;
                    }
                }
                _ => break,
            }
        }
        Ok(out)
    }

    /// True when the run of dots at the cursor is followed by a name character.
    fn dots_then_name(&self) -> bool {
        let mut i = 0;
        while self.peek_at(i) == Some('.') {
            i += 1;
        }
        self.peek_at(i)
            .is_some_and(|n| n.is_alphanumeric() || matches!(n, '_' | '-' | ':' | '%' | '\\'))
    }

    fn try_iri_ref(&mut self) -> Result<Option<String>, SyntaxError> {
        // Look ahead for a closing '>' with no whitespace in between; otherwise
        // the '<' is a comparison operator.
        let mut i = 1;
        loop {
            match self.peek_at(i) {
                Some('>') => break,
                Some(c) if c.is_whitespace() || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`') => {
                    return Ok(None)
                }
                Some(_) => i += 1,
                None => return Ok(None),
            }
        }
        self.bump();
        let mut out = String::new();
        loop {
            let c = self.bump().ok_or_else(|| self.error("unterminated IRI"))?;
            match c {
                '>' => break,
                '\\' => out.push(self.unicode_escape()?),
                c => out.push(c),
            }
        }
        Ok(Some(out))
    }

    fn unicode_escape(&mut self) -> Result<char, SyntaxError> {
        let kind = self.bump().ok_or_else(|| self.error("dangling escape"))?;
        let len = match kind {
            'u' => 4,
            'U' => 8,
            other => return Err(self.error(format!("invalid escape \\{other}"))),
        };
        let mut hex = String::new();
        for _ in 0..len {
            hex.push(self.bump().ok_or_else(|| self.error("truncated unicode escape"))?);
        }
        u32::from_str_radix(&hex, 16)
            .ok()
            .and_then(char::from_u32)
            .ok_or_else(|| self.error(format!("invalid unicode escape {hex}")))
    }

    fn string_literal(&mut self) -> Result<String, SyntaxError> {
        let quote = self.bump().unwrap_or('"');
        let long = self.peek() == Some(quote) && self.peek_at(1) == Some(quote);
        if long {
            self.bump();
            self.bump();
        } else if self.peek() == Some(quote) {
            self.bump();
            return Ok(String::new());
        }
        let mut out = String::new();
        loop {
            let c = self.bump().ok_or_else(|| self.error("unterminated string"))?;
            if c == quote {
                if !long {
                    break;
                }
                if self.peek() == Some(quote) && self.peek_at(1) == Some(quote) {
                    self.bump();
                    self.bump();
                    // Extra quotes right before the terminator belong to the content.
                    while self.peek() == Some(quote) {
                        out.push(quote);
                        self.bump();
                    }
                    break;
                }
                out.push(c);
                continue;
            }
            match c {
                '\\' => {
                    let esc = self.peek().ok_or_else(|| self.error("dangling escape"))?;
                    match esc {
                        't' | 'b' | 'n' | 'r' | 'f' | '"' | '\'' | '\\' => {
                            self.bump();
                            out.push(match esc {
                                't' => '\t',
                                'b' => '\u{8}',
                                'n' => '\n',
                                'r' => '\r',
                                'f' => '\u{c}',
                                other => other,
                            });
                        }
                        'u' | 'U' => out.push(self.unicode_escape()?),
                        other => return Err(self.error(format!("invalid escape \\{other}"))),
                    }
                }
                '\n' | '\r' if !long => return Err(self.error("newline in short string")),
                c => out.push(c),
            }
        }
        Ok(out)
    }

    fn number(&mut self) -> Result<Token, SyntaxError> {
        let mut text = String::new();
        if matches!(self.peek(), Some('+' | '-')) {
            text.push(self.bump().unwrap_or_default());
        }
        text.push_str(&self.take_while(|c| c.is_ascii_digit()));
        let mut is_decimal = false;
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            is_decimal = true;
            self.bump();
            text.push('.');
            text.push_str(&self.take_while(|c| c.is_ascii_digit()));
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let sign = matches!(self.peek_at(1), Some('+' | '-'));
            let digit_at = if sign { 2 } else { 1 };
            if self.peek_at(digit_at).is_some_and(|c| c.is_ascii_digit()) {
                text.push(self.bump().unwrap_or_default());
                if sign {
                    text.push(self.bump().unwrap_or_default());
                }
                text.push_str(&self.take_while(|c| c.is_ascii_digit()));
                return Ok(Token::Double(text));
            }
        }
        if text.is_empty() || text == "+" || text == "-" {
            return Err(self.error("malformed number"));
        }
        Ok(if is_decimal { Token::Decimal(text) } else { Token::Integer(text) })
    }
}

pub fn tokenize(src: &str) -> Result<Vec<Spanned>, SyntaxError> {
    Lexer::new(src).tokenize()
}
