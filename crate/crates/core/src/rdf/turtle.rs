//! Turtle subset reader and writer.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::LazyLock;

use regex::Regex;
use thiserror::Error;

use super::lexer::{Lexer, Position, Spanned, SyntaxError, Token};
use super::prefix::PrefixMap;
use super::term::{escape_string_into, GraphId, Iri, Literal, Quad, Term, TermError};
use crate::ns::{rdf, xsd};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TurtleError {
    #[error("syntax error: {0}")]
    Syntax(#[from] SyntaxError),
    #[error("undefined prefix {prefix:?} at {position}")]
    UndefinedPrefix { prefix: String, position: Position },
    #[error("relative IRI <{iri}> with no base at {position}")]
    RelativeIri { iri: String, position: Position },
    #[error("{source} at {position}")]
    Term { source: TermError, position: Position },
}

impl TurtleError {
    pub fn position(&self) -> Position {
        match self {
            TurtleError::Syntax(e) => e.position,
            TurtleError::UndefinedPrefix { position, .. }
            | TurtleError::RelativeIri { position, .. }
            | TurtleError::Term { position, .. } => *position,
        }
    }
}

static PARSE_CALLS: AtomicU64 = AtomicU64::new(0);

static ABSOLUTE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[A-Za-z][A-Za-z0-9+.\-]*:").unwrap());

/// Parses a Turtle document into quads of `target`, in document order.
///
/// Blank node labels are scoped to this call: each label gets a fresh
/// suffix so two documents never share a blank node.
pub fn parse_turtle(text: &str, base: Option<&Iri>, target: GraphId) -> Result<Vec<Quad>, TurtleError> {
    parse_turtle_with_prefixes(text, base, target).map(|(quads, _)| quads)
}

/// Like [`parse_turtle`], also returning the prefixes the document declared.
pub fn parse_turtle_with_prefixes(
    text: &str,
    base: Option<&Iri>,
    target: GraphId,
) -> Result<(Vec<Quad>, PrefixMap), TurtleError> {
    let tokens = Lexer::new(text).tokenize()?;
    let call = PARSE_CALLS.fetch_add(1, Ordering::Relaxed);
    let mut parser = Parser {
        tokens,
        pos: 0,
        prefixes: PrefixMap::empty(),
        base: base.map(|b| b.as_str().to_string()),
        graph: target,
        call,
        blank_labels: HashMap::new(),
        anon: 0,
        out: Vec::new(),
    };
    parser.document()?;
    Ok((parser.out, parser.prefixes))
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    prefixes: PrefixMap,
    base: Option<String>,
    graph: GraphId,
    call: u64,
    blank_labels: HashMap<String, String>,
    anon: u64,
    out: Vec<Quad>,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|s| &s.token)
    }

    fn position(&self) -> Position {
        self.tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .map(|s| s.position)
            .unwrap_or_default()
    }

    fn next(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.pos).map(|s| s.token.clone());
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn syntax(&self, message: impl Into<String>) -> TurtleError {
        TurtleError::Syntax(SyntaxError::new(message, self.position()))
    }

    fn unexpected(&self, expected: &str) -> TurtleError {
        match self.peek() {
            Some(tok) => self.syntax(format!("expected {expected}, found {}", tok.describe())),
            None => self.syntax(format!("expected {expected}, found end of input")),
        }
    }

    fn expect(&mut self, token: Token, what: &str) -> Result<(), TurtleError> {
        if self.peek() == Some(&token) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn document(&mut self) -> Result<(), TurtleError> {
        while self.peek().is_some() {
            self.statement()?;
        }
        Ok(())
    }

    fn statement(&mut self) -> Result<(), TurtleError> {
        match self.peek() {
            Some(Token::At(word)) if word == "prefix" => {
                self.pos += 1;
                self.prefix_decl()?;
                self.expect(Token::Dot, "'.'")
            }
            Some(Token::At(word)) if word == "base" => {
                self.pos += 1;
                self.base_decl()?;
                self.expect(Token::Dot, "'.'")
            }
            Some(Token::Word(word)) if word.eq_ignore_ascii_case("prefix") => {
                self.pos += 1;
                self.prefix_decl()
            }
            Some(Token::Word(word)) if word.eq_ignore_ascii_case("base") => {
                self.pos += 1;
                self.base_decl()
            }
            _ => {
                self.triples()?;
                self.expect(Token::Dot, "'.'")
            }
        }
    }

    fn prefix_decl(&mut self) -> Result<(), TurtleError> {
        let prefix = match self.next() {
            Some(Token::PrefixedName { prefix, local }) if local.is_empty() => prefix,
            _ => {
                self.pos = self.pos.saturating_sub(1);
                return Err(self.unexpected("a prefix label such as 'ex:'"));
            }
        };
        let position = self.position();
        let iri = match self.next() {
            Some(Token::IriRef(iri)) => self.resolve_iri(iri, position)?,
            _ => {
                self.pos = self.pos.saturating_sub(1);
                return Err(self.unexpected("an IRI"));
            }
        };
        self.prefixes.insert(prefix, iri.as_str());
        Ok(())
    }

    fn base_decl(&mut self) -> Result<(), TurtleError> {
        let position = self.position();
        match self.next() {
            Some(Token::IriRef(iri)) => {
                let resolved = self.resolve_iri(iri, position)?;
                self.base = Some(resolved.as_str().to_string());
                Ok(())
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.unexpected("an IRI"))
            }
        }
    }

    fn triples(&mut self) -> Result<(), TurtleError> {
        if self.peek() == Some(&Token::OpenBracket) {
            let subject = self.blank_node_property_list()?;
            if self.peek() != Some(&Token::Dot) {
                self.predicate_object_list(&subject)?;
            }
            return Ok(());
        }
        let subject = self.subject()?;
        self.predicate_object_list(&subject)
    }

    fn subject(&mut self) -> Result<Term, TurtleError> {
        let position = self.position();
        match self.next() {
            Some(Token::IriRef(iri)) => Ok(Term::Iri(self.resolve_iri(iri, position)?)),
            Some(Token::PrefixedName { prefix, local }) => Ok(Term::Iri(self.expand(&prefix, &local, position)?)),
            Some(Token::BlankNode(label)) => Ok(self.blank(&label)),
            Some(Token::OpenParen) => Err(TurtleError::Syntax(SyntaxError::new(
                "collections are not supported",
                position,
            ))),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.unexpected("a subject"))
            }
        }
    }

    fn predicate_object_list(&mut self, subject: &Term) -> Result<(), TurtleError> {
        loop {
            let predicate = self.verb()?;
            self.object_list(subject, &predicate)?;
            if self.peek() != Some(&Token::Semicolon) {
                return Ok(());
            }
            while self.peek() == Some(&Token::Semicolon) {
                self.pos += 1;
            }
            // A trailing ';' may close the list.
            if matches!(self.peek(), Some(Token::Dot | Token::CloseBracket) | None) {
                return Ok(());
            }
        }
    }

    fn verb(&mut self) -> Result<Iri, TurtleError> {
        let position = self.position();
        match self.next() {
            Some(Token::Word(w)) if w == "a" => Ok(Iri::from_static(rdf::TYPE)),
            Some(Token::IriRef(iri)) => self.resolve_iri(iri, position),
            Some(Token::PrefixedName { prefix, local }) => self.expand(&prefix, &local, position),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.unexpected("a predicate"))
            }
        }
    }

    fn object_list(&mut self, subject: &Term, predicate: &Iri) -> Result<(), TurtleError> {
        loop {
            let object = self.object()?;
            self.emit(subject.clone(), predicate.clone(), object);
            if self.peek() == Some(&Token::Comma) {
                self.pos += 1;
            } else {
                return Ok(());
            }
        }
    }

    fn emit(&mut self, subject: Term, predicate: Iri, object: Term) {
        self.out.push(Quad {
            graph: self.graph,
            subject,
            predicate,
            object,
        });
    }

    fn object(&mut self) -> Result<Term, TurtleError> {
        let position = self.position();
        let Some(tok) = self.next() else {
            return Err(self.unexpected("an object"));
        };
        let term = match tok {
            Token::IriRef(iri) => Term::Iri(self.resolve_iri(iri, position)?),
            Token::PrefixedName { prefix, local } => Term::Iri(self.expand(&prefix, &local, position)?),
            Token::BlankNode(label) => self.blank(&label),
            Token::OpenBracket => {
                self.pos -= 1;
                self.blank_node_property_list()?
            }
            Token::OpenParen => {
                return Err(TurtleError::Syntax(SyntaxError::new(
                    "collections are not supported",
                    position,
                )))
            }
            Token::String(lexical) => self.literal_tail(lexical)?,
            Token::Integer(n) => self.shorthand(n, xsd::INTEGER, position)?,
            Token::Decimal(n) => self.shorthand(n, xsd::DECIMAL, position)?,
            Token::Double(n) => self.shorthand(n, xsd::DOUBLE, position)?,
            Token::Word(w) if w == "true" || w == "false" => self.shorthand(w, xsd::BOOLEAN, position)?,
            _ => {
                self.pos -= 1;
                return Err(self.unexpected("an object"));
            }
        };
        Ok(term)
    }

    fn shorthand(&self, lexical: String, datatype: &'static str, position: Position) -> Result<Term, TurtleError> {
        Literal::typed(lexical, Iri::from_static(datatype))
            .map(Term::Literal)
            .map_err(|source| TurtleError::Term { source, position })
    }

    fn literal_tail(&mut self, lexical: String) -> Result<Term, TurtleError> {
        let position = self.position();
        match self.peek() {
            Some(Token::At(lang)) => {
                let lang = lang.clone();
                self.pos += 1;
                Literal::lang_string(lexical, lang)
                    .map(Term::Literal)
                    .map_err(|source| TurtleError::Term { source, position })
            }
            Some(Token::DoubleCaret) => {
                self.pos += 1;
                let dt_pos = self.position();
                let datatype = match self.next() {
                    Some(Token::IriRef(iri)) => self.resolve_iri(iri, dt_pos)?,
                    Some(Token::PrefixedName { prefix, local }) => self.expand(&prefix, &local, dt_pos)?,
                    _ => {
                        self.pos = self.pos.saturating_sub(1);
                        return Err(self.unexpected("a datatype IRI"));
                    }
                };
                Literal::typed(lexical, datatype)
                    .map(Term::Literal)
                    .map_err(|source| TurtleError::Term { source, position: dt_pos })
            }
            _ => Ok(Term::Literal(Literal::string(lexical))),
        }
    }

    fn blank_node_property_list(&mut self) -> Result<Term, TurtleError> {
        self.expect(Token::OpenBracket, "'['")?;
        let node = self.fresh_blank();
        if self.peek() != Some(&Token::CloseBracket) {
            self.predicate_object_list(&node)?;
        }
        self.expect(Token::CloseBracket, "']'")?;
        Ok(node)
    }

    fn blank(&mut self, label: &str) -> Term {
        let call = self.call;
        let fresh = self
            .blank_labels
            .entry(label.to_string())
            .or_insert_with(|| format!("b{call}_{label}"));
        Term::BlankNode(fresh.clone())
    }

    fn fresh_blank(&mut self) -> Term {
        self.anon += 1;
        Term::BlankNode(format!("b{}-{}", self.call, self.anon))
    }

    fn expand(&self, prefix: &str, local: &str, position: Position) -> Result<Iri, TurtleError> {
        let ns = self.prefixes.get(prefix).ok_or_else(|| TurtleError::UndefinedPrefix {
            prefix: prefix.to_string(),
            position,
        })?;
        Iri::new(format!("{ns}{local}")).map_err(|source| TurtleError::Term { source, position })
    }

    fn resolve_iri(&self, iri: String, position: Position) -> Result<Iri, TurtleError> {
        let absolute = if ABSOLUTE.is_match(&iri) {
            iri
        } else {
            let base = self
                .base
                .as_deref()
                .ok_or_else(|| TurtleError::RelativeIri { iri: iri.clone(), position })?;
            url::Url::parse(base)
                .and_then(|b| b.join(&iri))
                .map(String::from)
                .map_err(|_| TurtleError::RelativeIri { iri: iri.clone(), position })?
        };
        Iri::new(absolute).map_err(|source| TurtleError::Term { source, position })
    }
}

/// Writes quads as a Turtle document. Graph membership is not encoded; the
/// caller decides the target graph on re-parse.
pub fn serialize_turtle(quads: &[Quad], prefixes: &PrefixMap) -> String {
    let mut out = String::new();
    for (prefix, ns) in prefixes.iter() {
        out.push_str(&format!("@prefix {prefix}: <{ns}> .\n"));
    }

    let mut by_subject: BTreeMap<&Term, BTreeMap<&Iri, Vec<&Term>>> = BTreeMap::new();
    for q in quads {
        let objects = by_subject.entry(&q.subject).or_default().entry(&q.predicate).or_default();
        if !objects.contains(&&q.object) {
            objects.push(&q.object);
        }
    }
    if !by_subject.is_empty() {
        out.push('\n');
    }
    for (subject, predicates) in by_subject {
        out.push_str(&write_term(subject, prefixes));
        let mut first = true;
        for (predicate, mut objects) in predicates {
            objects.sort();
            out.push_str(if first { " " } else { " ;\n    " });
            first = false;
            if predicate == &rdf::TYPE {
                out.push('a');
            } else {
                out.push_str(&write_iri(predicate, prefixes));
            }
            let rendered: Vec<String> = objects.iter().map(|o| write_term(o, prefixes)).collect();
            out.push(' ');
            out.push_str(&rendered.join(" , "));
        }
        out.push_str(" .\n");
    }
    out
}

fn write_iri(iri: &Iri, prefixes: &PrefixMap) -> String {
    prefixes
        .compact(iri.as_str())
        .unwrap_or_else(|| format!("<{}>", iri.as_str()))
}

fn write_term(term: &Term, prefixes: &PrefixMap) -> String {
    match term {
        Term::Iri(iri) => write_iri(iri, prefixes),
        Term::BlankNode(label) => format!("_:{label}"),
        Term::Literal(lit) => {
            let mut out = String::from("\"");
            escape_string_into(lit.lexical(), &mut out);
            out.push('"');
            if let Some(lang) = lit.language() {
                out.push('@');
                out.push_str(lang);
            } else if lit.datatype() != &xsd::STRING {
                out.push_str("^^");
                out.push_str(&write_iri(lit.datatype(), prefixes));
            }
            out
        }
    }
}
