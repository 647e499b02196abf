//! Line-oriented N-Quads, the persistence format.

use thiserror::Error;

use super::lexer::{Lexer, Token};
use super::term::{GraphId, Iri, Literal, Quad, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NQuadsError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: unknown graph IRI <{iri}>")]
    UnknownGraph { line: usize, iri: String },
}

pub fn parse_nquads(text: &str) -> Result<Vec<Quad>, NQuadsError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        out.push(parse_line(raw, line)?);
    }
    Ok(out)
}

fn parse_line(raw: &str, line: usize) -> Result<Quad, NQuadsError> {
    let malformed = |message: String| NQuadsError::Malformed { line, message };
    let tokens = Lexer::at_line(raw, line)
        .tokenize()
        .map_err(|e| malformed(e.to_string()))?;
    let mut it = tokens.into_iter().map(|s| s.token).peekable();

    let iri = |s: String| Iri::new(s).map_err(|e| malformed(e.to_string()));
    let subject = match it.next() {
        Some(Token::IriRef(s)) => Term::Iri(iri(s)?),
        Some(Token::BlankNode(b)) => Term::BlankNode(b),
        _ => return Err(malformed("expected subject".into())),
    };
    let predicate = match it.next() {
        Some(Token::IriRef(s)) => iri(s)?,
        _ => return Err(malformed("expected predicate IRI".into())),
    };
    let object = match it.next() {
        Some(Token::IriRef(s)) => Term::Iri(iri(s)?),
        Some(Token::BlankNode(b)) => Term::BlankNode(b),
        Some(Token::String(lexical)) => match it.peek() {
            Some(Token::At(_)) => {
                let Some(Token::At(lang)) = it.next() else { unreachable!() };
                Term::Literal(Literal::lang_string(lexical, lang).map_err(|e| malformed(e.to_string()))?)
            }
            Some(Token::DoubleCaret) => {
                it.next();
                let Some(Token::IriRef(dt)) = it.next() else {
                    return Err(malformed("expected datatype IRI".into()));
                };
                Term::Literal(Literal::typed(lexical, iri(dt)?).map_err(|e| malformed(e.to_string()))?)
            }
            _ => Term::Literal(Literal::string(lexical)),
        },
        _ => return Err(malformed("expected object".into())),
    };
    let graph = match it.next() {
        Some(Token::IriRef(g)) => GraphId::from_iri(&g).ok_or(NQuadsError::UnknownGraph { line, iri: g })?,
        _ => return Err(malformed("expected graph IRI".into())),
    };
    if it.next() != Some(Token::Dot) {
        return Err(malformed("expected '.'".into()));
    }
    if it.next().is_some() {
        return Err(malformed("trailing content after '.'".into()));
    }
    Quad::new(subject, predicate, object, graph).map_err(|e| malformed(e.to_string()))
}

pub fn quad_to_nquad(q: &Quad) -> String {
    format!(
        "{} <{}> {} <{}> .",
        q.subject.to_ntriples(),
        q.predicate.as_str(),
        q.object.to_ntriples(),
        q.graph.iri()
    )
}

/// Canonical form: one statement per line, lines sorted, LF endings.
pub fn serialize_nquads(quads: &[Quad]) -> String {
    let mut lines: Vec<String> = quads.iter().map(quad_to_nquad).collect();
    lines.sort();
    lines.dedup();
    let mut out = String::new();
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
    out
}
