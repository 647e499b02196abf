use crate::ns::{is_privacy_term, rdf, xsd};
use crate::rdf::lexer::{tokenize, Spanned, Token};
use crate::rdf::{Iri, Literal, PrefixMap, Position, Term};

use super::ast::{CmpOp, Element, Expr, GroupPattern, Projection, Query, TermPattern, TriplePattern};
use super::QueryError;

/// Which grammar to accept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dialect {
    /// Conjunctive queries over data graphs only.
    User,
    /// Adds GRAPH, OPTIONAL, sub-selects, `||`, `!` and `bound`; used for
    /// rewritten queries.
    Internal,
}

/// Parses a user query. Privacy-vocabulary terms are rejected.
pub fn parse_query(text: &str) -> Result<Query, QueryError> {
    Parser::new(text, Dialect::User)?.query()
}

/// Parses the extended grammar produced by query rewriting.
pub fn parse_internal_query(text: &str) -> Result<Query, QueryError> {
    Parser::new(text, Dialect::Internal)?.query()
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    end: Position,
    prefixes: PrefixMap,
    declared: Vec<(String, Iri)>,
    dialect: Dialect,
}

fn keyword(token: &Token, word: &str) -> bool {
    matches!(token, Token::Word(w) if w.eq_ignore_ascii_case(word))
}

impl Parser {
    fn new(text: &str, dialect: Dialect) -> Result<Self, QueryError> {
        let tokens = tokenize(text)?;
        let end = match text.lines().count() {
            0 => Position { line: 1, column: 1 },
            n => Position {
                line: n,
                column: text.lines().last().map_or(0, |l| l.chars().count()) + 1,
            },
        };
        Ok(Self {
            tokens,
            pos: 0,
            end,
            prefixes: PrefixMap::empty(),
            declared: Vec::new(),
            dialect,
        })
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|s| &s.token)
    }

    fn position(&self) -> Position {
        self.tokens.get(self.pos).map_or(self.end, |s| s.position)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn syntax(&self, message: impl Into<String>) -> QueryError {
        QueryError::Syntax(crate::rdf::SyntaxError::new(message, self.position()))
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<(), QueryError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn unexpected(&self, what: &str) -> QueryError {
        match self.peek() {
            Some(t) => self.syntax(format!("expected {what}, found {}", t.describe())),
            None => self.syntax(format!("expected {what}, found end of input")),
        }
    }

    fn eat_keyword(&mut self, word: &str) -> bool {
        if self.peek().is_some_and(|t| keyword(t, word)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn unsupported(&self, feature: &str) -> QueryError {
        QueryError::Unsupported {
            feature: feature.to_string(),
            position: self.position(),
        }
    }

    fn query(mut self) -> Result<Query, QueryError> {
        while self.eat_keyword("PREFIX") {
            let position = self.position();
            let Some(Spanned {
                token: Token::PrefixedName { prefix, local },
                ..
            }) = self.next()
            else {
                self.pos -= 1;
                return Err(self.unexpected("a prefix name"));
            };
            if !local.is_empty() {
                return Err(QueryError::Syntax(crate::rdf::SyntaxError::new(
                    "a prefix declaration ends with ':'",
                    position,
                )));
            }
            let Some(Spanned {
                token: Token::IriRef(ns),
                position,
            }) = self.next()
            else {
                self.pos -= 1;
                return Err(self.unexpected("a namespace IRI"));
            };
            let ns = Iri::new(ns).map_err(|e| QueryError::InvalidTerm {
                message: e.to_string(),
                position,
            })?;
            self.prefixes.insert(prefix.clone(), ns.as_str());
            self.declared.retain(|(p, _)| p != &prefix);
            self.declared.push((prefix, ns));
        }
        let mut q = self.select()?;
        if self.pos < self.tokens.len() {
            return Err(self.unexpected("end of query"));
        }
        q.prefixes = std::mem::take(&mut self.declared);
        Ok(q)
    }

    fn select(&mut self) -> Result<Query, QueryError> {
        if !self.eat_keyword("SELECT") {
            return Err(self.unexpected("SELECT"));
        }
        let distinct = self.eat_keyword("DISTINCT");
        if distinct && self.dialect == Dialect::User {
            self.pos -= 1;
            return Err(self.unsupported("DISTINCT"));
        }
        let projection = if self.peek() == Some(&Token::Star) {
            self.pos += 1;
            Projection::All
        } else {
            let mut vars = Vec::new();
            while let Some(Token::Variable(v)) = self.peek() {
                if !vars.contains(v) {
                    vars.push(v.clone());
                }
                self.pos += 1;
            }
            if vars.is_empty() {
                return Err(self.unexpected("'*' or a variable"));
            }
            Projection::Vars(vars)
        };
        self.eat_keyword("WHERE");
        let where_clause = self.group()?;
        for word in ["ORDER", "LIMIT", "OFFSET", "GROUP", "HAVING"] {
            if self.peek().is_some_and(|t| keyword(t, word)) {
                return Err(self.unsupported(word));
            }
        }
        let q = Query {
            prefixes: Vec::new(),
            distinct,
            projection,
            where_clause,
        };
        if let Projection::Vars(vars) = &q.projection {
            let known = q.pattern_vars();
            if let Some(v) = vars.iter().find(|v| !known.contains(v)) {
                return Err(QueryError::UnknownVariable(v.clone()));
            }
        }
        Ok(q)
    }

    fn group(&mut self) -> Result<GroupPattern, QueryError> {
        self.expect(Token::OpenBrace, "'{'")?;
        let mut group = GroupPattern::default();
        loop {
            match self.peek() {
                None => return Err(self.unexpected("'}'")),
                Some(Token::CloseBrace) => {
                    self.pos += 1;
                    return Ok(group);
                }
                Some(Token::Dot) => self.pos += 1,
                Some(t) if keyword(t, "FILTER") => {
                    self.pos += 1;
                    let expr = self.constraint()?;
                    group.elements.push(Element::Filter(expr));
                }
                Some(t) if keyword(t, "OPTIONAL") => {
                    if self.dialect == Dialect::User {
                        return Err(self.unsupported("OPTIONAL"));
                    }
                    self.pos += 1;
                    let inner = self.group()?;
                    group.elements.push(Element::Optional(inner));
                }
                Some(t) if keyword(t, "GRAPH") => {
                    if self.dialect == Dialect::User {
                        return Err(self.unsupported("GRAPH"));
                    }
                    self.pos += 1;
                    let name = match self.term_or_var()? {
                        TermPattern::Term(Term::Iri(i)) => i,
                        _ => return Err(self.syntax("GRAPH needs an IRI")),
                    };
                    let inner = self.group()?;
                    group.elements.push(Element::Graph(name, inner));
                }
                Some(t) if keyword(t, "UNION") || keyword(t, "MINUS") || keyword(t, "BIND") || keyword(t, "VALUES") => {
                    let Some(Token::Word(w)) = self.peek() else { unreachable!() };
                    let w = w.to_ascii_uppercase();
                    return Err(self.unsupported(&w));
                }
                Some(Token::OpenBrace) => {
                    if self.dialect == Dialect::User {
                        return Err(self.unsupported("nested groups"));
                    }
                    self.pos += 1;
                    let sub = self.select()?;
                    self.expect(Token::CloseBrace, "'}'")?;
                    group.elements.push(Element::SubSelect(Box::new(sub)));
                }
                Some(_) => self.triples(&mut group)?,
            }
        }
    }

    fn triples(&mut self, group: &mut GroupPattern) -> Result<(), QueryError> {
        let subject = self.term_or_var()?;
        if matches!(subject, TermPattern::Term(Term::Literal(_))) {
            return Err(self.syntax("a literal cannot be a subject"));
        }
        loop {
            let predicate = self.verb()?;
            loop {
                let object = self.term_or_var()?;
                let t = TriplePattern::new(subject.clone(), predicate.clone(), object);
                self.check_pattern(&t)?;
                group.elements.push(Element::Triple(t));
                if self.peek() == Some(&Token::Comma) {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            if self.peek() == Some(&Token::Semicolon) {
                while self.peek() == Some(&Token::Semicolon) {
                    self.pos += 1;
                }
                if matches!(self.peek(), Some(Token::Dot | Token::CloseBrace)) {
                    break;
                }
            } else {
                break;
            }
        }
        match self.peek() {
            Some(Token::Dot) => {
                self.pos += 1;
                Ok(())
            }
            Some(Token::CloseBrace) => Ok(()),
            Some(t) if keyword(t, "FILTER") || keyword(t, "OPTIONAL") || keyword(t, "GRAPH") => Ok(()),
            _ => Err(self.unexpected("'.', ';', ',' or '}'")),
        }
    }

    fn check_pattern(&self, t: &TriplePattern) -> Result<(), QueryError> {
        if self.dialect == Dialect::Internal {
            return Ok(());
        }
        for slot in [&t.subject, &t.predicate, &t.object] {
            if let TermPattern::Term(Term::Iri(i)) = slot {
                if is_privacy_term(i.as_str()) {
                    return Err(QueryError::PrivacyTermInUserQuery(i.clone()));
                }
            }
        }
        Ok(())
    }

    fn verb(&mut self) -> Result<TermPattern, QueryError> {
        if self.peek().is_some_and(|t| matches!(t, Token::Word(w) if w == "a")) {
            self.pos += 1;
            return Ok(TermPattern::Term(Term::Iri(Iri::from_static(rdf::TYPE))));
        }
        match self.term_or_var()? {
            p @ (TermPattern::Var(_) | TermPattern::Term(Term::Iri(_))) => Ok(p),
            _ => Err(self.syntax("a predicate must be an IRI or a variable")),
        }
    }

    fn iri(&self, token: &Token, position: Position) -> Result<Option<Iri>, QueryError> {
        match token {
            Token::IriRef(s) => Iri::new(s.clone()).map(Some).map_err(|_| QueryError::InvalidTerm {
                message: format!("relative or invalid IRI <{s}>"),
                position,
            }),
            Token::PrefixedName { prefix, local } => {
                let Some(ns) = self.prefixes.get(prefix) else {
                    return Err(QueryError::UnknownPrefix {
                        prefix: prefix.clone(),
                        position,
                    });
                };
                Iri::new(format!("{ns}{local}")).map(Some).map_err(|e| QueryError::InvalidTerm {
                    message: e.to_string(),
                    position,
                })
            }
            _ => Ok(None),
        }
    }

    fn term_or_var(&mut self) -> Result<TermPattern, QueryError> {
        let position = self.position();
        let Some(Spanned { token, .. }) = self.next() else {
            return Err(self.unexpected("a term"));
        };
        if let Some(iri) = self.iri(&token, position)? {
            return Ok(TermPattern::Term(Term::Iri(iri)));
        }
        let term = match token {
            Token::Variable(v) => return Ok(TermPattern::Var(v)),
            Token::BlankNode(_) | Token::OpenBracket => return Err(QueryError::BlankNodeInQuery { position }),
            Token::String(s) => self.literal_tail(s)?,
            Token::Integer(n) => self.typed(n, xsd::INTEGER, position)?,
            Token::Decimal(n) => self.typed(n, xsd::DECIMAL, position)?,
            Token::Double(n) => self.typed(n, xsd::DOUBLE, position)?,
            Token::Word(w) if w == "true" || w == "false" => self.typed(w, xsd::BOOLEAN, position)?,
            other => {
                self.pos -= 1;
                return Err(self.syntax(format!("expected a term, found {}", other.describe())));
            }
        };
        Ok(TermPattern::Term(term))
    }

    fn typed(&self, lexical: String, datatype: &'static str, position: Position) -> Result<Term, QueryError> {
        Literal::typed(lexical, Iri::from_static(datatype))
            .map(Term::Literal)
            .map_err(|e| QueryError::InvalidTerm {
                message: e.to_string(),
                position,
            })
    }

    fn literal_tail(&mut self, lexical: String) -> Result<Term, QueryError> {
        let position = self.position();
        match self.peek() {
            Some(Token::At(lang)) => {
                let lang = lang.clone();
                self.pos += 1;
                Literal::lang_string(lexical, lang)
                    .map(Term::Literal)
                    .map_err(|e| QueryError::InvalidTerm {
                        message: e.to_string(),
                        position,
                    })
            }
            Some(Token::DoubleCaret) => {
                self.pos += 1;
                let position = self.position();
                let Some(Spanned { token, .. }) = self.next() else {
                    return Err(self.unexpected("a datatype IRI"));
                };
                let Some(dt) = self.iri(&token, position)? else {
                    self.pos -= 1;
                    return Err(self.unexpected("a datatype IRI"));
                };
                Literal::typed(lexical, dt)
                    .map(Term::Literal)
                    .map_err(|e| QueryError::InvalidTerm {
                        message: e.to_string(),
                        position,
                    })
            }
            _ => Ok(Term::Literal(Literal::string(lexical))),
        }
    }

    fn constraint(&mut self) -> Result<Expr, QueryError> {
        let expr = if self.peek() == Some(&Token::OpenParen) {
            self.pos += 1;
            let e = self.or_expr()?;
            self.expect(Token::CloseParen, "')'")?;
            e
        } else if self.peek().is_some_and(|t| keyword(t, "bound")) {
            self.primary()?
        } else {
            return Err(self.unexpected("'('"));
        };
        if self.dialect == Dialect::User {
            let mut constants = Vec::new();
            expr.constants(&mut constants);
            for c in constants {
                if let Term::Iri(i) = c {
                    if is_privacy_term(i.as_str()) {
                        return Err(QueryError::PrivacyTermInUserQuery(i.clone()));
                    }
                }
            }
        }
        Ok(expr)
    }

    fn or_expr(&mut self) -> Result<Expr, QueryError> {
        let mut left = self.and_expr()?;
        while self.peek() == Some(&Token::Or) {
            if self.dialect == Dialect::User {
                return Err(self.unsupported("'||'"));
            }
            self.pos += 1;
            let right = self.and_expr()?;
            left = Expr::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn and_expr(&mut self) -> Result<Expr, QueryError> {
        let mut left = self.relational()?;
        while self.peek() == Some(&Token::And) {
            self.pos += 1;
            let right = self.relational()?;
            left = Expr::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn relational(&mut self) -> Result<Expr, QueryError> {
        let left = self.unary()?;
        let op = match self.peek() {
            Some(Token::Lt) => CmpOp::Lt,
            Some(Token::Le) => CmpOp::Le,
            Some(Token::Gt) => CmpOp::Gt,
            Some(Token::Ge) => CmpOp::Ge,
            Some(Token::Eq) => CmpOp::Eq,
            Some(Token::Ne) => CmpOp::Ne,
            _ => return Ok(left),
        };
        self.pos += 1;
        let right = self.unary()?;
        Ok(Expr::cmp(op, left, right))
    }

    fn unary(&mut self) -> Result<Expr, QueryError> {
        if self.peek() == Some(&Token::Bang) {
            if self.dialect == Dialect::User {
                return Err(self.unsupported("'!'"));
            }
            self.pos += 1;
            return Ok(Expr::Not(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, QueryError> {
        if self.peek() == Some(&Token::OpenParen) {
            self.pos += 1;
            let e = self.or_expr()?;
            self.expect(Token::CloseParen, "')'")?;
            return Ok(e);
        }
        if self.peek().is_some_and(|t| keyword(t, "bound")) {
            if self.dialect == Dialect::User {
                return Err(self.unsupported("bound()"));
            }
            self.pos += 1;
            self.expect(Token::OpenParen, "'('")?;
            let Some(Token::Variable(v)) = self.peek().cloned() else {
                return Err(self.unexpected("a variable"));
            };
            self.pos += 1;
            self.expect(Token::CloseParen, "')'")?;
            return Ok(Expr::Bound(v));
        }
        match self.term_or_var()? {
            TermPattern::Var(v) => Ok(Expr::Var(v)),
            TermPattern::Term(t) => Ok(Expr::Const(t)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_select() {
        let q = parse_query("PREFIX sosa: <http://www.w3.org/ns/sosa/> SELECT ?s WHERE { ?s a sosa:Sensor }").unwrap();
        assert_eq!(q.patterns().count(), 1);
        assert_eq!(q.projected_vars(), vec!["s".to_string()]);
    }

    #[test]
    fn privacy_terms_are_rejected() {
        let err = parse_query(
            "PREFIX priv: <http://purl.org/iot/ontology/fiesta-priv#> SELECT ?x WHERE { ?x priv:hasPermission ?p }",
        )
        .unwrap_err();
        assert!(matches!(err, QueryError::PrivacyTermInUserQuery(_)));
    }

    #[test]
    fn unknown_prefix_has_position() {
        let err = parse_query("SELECT ?s WHERE {\n  ?s a foo:Bar }").unwrap_err();
        match err {
            QueryError::UnknownPrefix { prefix, position } => {
                assert_eq!(prefix, "foo");
                assert_eq!(position.line, 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn user_dialect_refuses_extensions() {
        for q in [
            "SELECT ?s WHERE { ?s ?p ?o OPTIONAL { ?s ?q ?r } }",
            "SELECT ?s WHERE { GRAPH <http://e/g> { ?s ?p ?o } }",
            "SELECT ?s WHERE { ?s ?p ?o FILTER(?o = 1 || ?o = 2) }",
            "SELECT DISTINCT ?s WHERE { ?s ?p ?o }",
        ] {
            assert!(matches!(parse_query(q), Err(QueryError::Unsupported { .. })), "{q}");
            assert!(parse_internal_query(q).is_ok(), "{q}");
        }
    }

    #[test]
    fn blank_nodes_are_rejected() {
        assert!(matches!(
            parse_query("SELECT ?s WHERE { ?s <http://e/p> _:b }"),
            Err(QueryError::BlankNodeInQuery { .. })
        ));
    }
}
