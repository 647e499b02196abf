//! SPARQL-subset queries: parsing, evaluation and consent enforcement.

mod ast;
mod enforce;
mod eval;
mod parser;

use std::collections::BTreeSet;

use serde_json::{json, Map, Value as Json};
use thiserror::Error;

use crate::ns::xsd;
use crate::rdf::{Iri, Literal, Position, SyntaxError, Term};

pub use ast::{CmpOp, Element, Expr, GroupPattern, Projection, Query, TermPattern, TriplePattern};
pub use enforce::{augment, classify, execute_as, AugmentationMode, Guard};
pub use eval::{evaluate, Solution};
pub use parser::{parse_internal_query, parse_query};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("unknown prefix '{prefix}:' at {position}")]
    UnknownPrefix { prefix: String, position: Position },
    #[error("{message} at {position}")]
    InvalidTerm { message: String, position: Position },
    #[error("queries may not reference the privacy vocabulary ({0})")]
    PrivacyTermInUserQuery(Iri),
    #[error("{feature} is not supported at {position}")]
    Unsupported { feature: String, position: Position },
    #[error("blank nodes are not allowed in queries (at {position})")]
    BlankNodeInQuery { position: Position },
    #[error("?{0} is selected but never used")]
    UnknownVariable(String),
    #[error("{0} has no registered interest")]
    NoRegisteredInterest(Iri),
    #[error("{0}")]
    Unauthorized(String),
}

/// Query answers: selected variables and a multiset of rows.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ResultSet {
    pub vars: Vec<String>,
    /// Each row holds the bound selected variables; rows are sorted by their
    /// N-Triples rendering.
    pub rows: Vec<Solution>,
}

impl ResultSet {
    pub fn empty(vars: Vec<String>) -> Self {
        Self { vars, rows: Vec::new() }
    }

    pub(crate) fn from_solutions(vars: Vec<String>, solutions: Vec<Solution>, distinct: bool) -> Self {
        let mut rows: Vec<Solution> = solutions
            .into_iter()
            .map(|s| s.into_iter().filter(|(k, _)| vars.contains(k)).collect())
            .collect();
        if distinct {
            let set: BTreeSet<Solution> = rows.into_iter().collect();
            rows = set.into_iter().collect();
        }
        let mut out = Self { vars, rows };
        out.sort();
        out
    }

    fn sort(&mut self) {
        let vars = self.vars.clone();
        let key = |row: &Solution| -> Vec<String> {
            vars.iter()
                .map(|v| row.get(v).map(Term::to_ntriples).unwrap_or_default())
                .collect()
        };
        self.rows.sort_by_cached_key(key);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Values bound to `var`, row by row.
    pub fn column(&self, var: &str) -> Vec<Option<&Term>> {
        self.rows.iter().map(|r| r.get(var)).collect()
    }

    /// SPARQL JSON results layout.
    pub fn to_json(&self) -> Json {
        let bindings: Vec<Json> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for v in &self.vars {
                    if let Some(t) = row.get(v) {
                        obj.insert(v.clone(), term_json(t));
                    }
                }
                Json::Object(obj)
            })
            .collect();
        json!({"head": {"vars": self.vars}, "results": {"bindings": bindings}})
    }

    pub fn from_json(value: &Json) -> Result<Self, String> {
        let vars = value["head"]["vars"]
            .as_array()
            .ok_or("missing head.vars")?
            .iter()
            .map(|v| v.as_str().map(str::to_string).ok_or("variable names are strings"))
            .collect::<Result<Vec<_>, _>>()?;
        let mut rows = Vec::new();
        for b in value["results"]["bindings"].as_array().ok_or("missing results.bindings")? {
            let obj = b.as_object().ok_or("a binding is an object")?;
            let mut row = Solution::new();
            for (k, v) in obj {
                row.insert(k.clone(), json_term(v)?);
            }
            rows.push(row);
        }
        let mut out = Self { vars, rows };
        out.sort();
        Ok(out)
    }
}

fn term_json(t: &Term) -> Json {
    match t {
        Term::Iri(i) => json!({"type": "uri", "value": i.as_str()}),
        Term::BlankNode(b) => json!({"type": "bnode", "value": b}),
        Term::Literal(l) => {
            let mut obj = Map::new();
            obj.insert("type".into(), json!("literal"));
            obj.insert("value".into(), json!(l.lexical()));
            if let Some(lang) = l.language() {
                obj.insert("xml:lang".into(), json!(lang));
            } else if l.datatype() != xsd::STRING {
                obj.insert("datatype".into(), json!(l.datatype().as_str()));
            }
            Json::Object(obj)
        }
    }
}

fn json_term(v: &Json) -> Result<Term, String> {
    let value = v["value"].as_str().ok_or("binding without value")?;
    match v["type"].as_str() {
        Some("uri") => Term::iri(value).map_err(|e| e.to_string()),
        Some("bnode") => Term::blank(value).map_err(|e| e.to_string()),
        Some("literal") | Some("typed-literal") => {
            if let Some(lang) = v["xml:lang"].as_str() {
                return Literal::lang_string(value, lang).map(Term::Literal).map_err(|e| e.to_string());
            }
            match v["datatype"].as_str() {
                Some(dt) => {
                    let dt = Iri::new(dt).map_err(|e| e.to_string())?;
                    Literal::typed(value, dt).map(Term::Literal).map_err(|e| e.to_string())
                }
                None => Ok(Term::Literal(Literal::string(value))),
            }
        }
        other => Err(format!("unknown binding type {other:?}")),
    }
}
