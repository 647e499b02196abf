use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use crate::ns::{rdf, xsd};
use crate::rdf::{Iri, Literal, PrefixMap, Term};

/// A subject, predicate or object slot.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TermPattern {
    Var(String),
    Term(Term),
}

impl TermPattern {
    pub fn var(name: &str) -> Self {
        TermPattern::Var(name.to_string())
    }

    pub fn iri(iri: &Iri) -> Self {
        TermPattern::Term(Term::Iri(iri.clone()))
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            TermPattern::Var(v) => Some(v),
            TermPattern::Term(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TriplePattern {
    pub subject: TermPattern,
    pub predicate: TermPattern,
    pub object: TermPattern,
}

impl TriplePattern {
    pub fn new(subject: TermPattern, predicate: TermPattern, object: TermPattern) -> Self {
        Self {
            subject,
            predicate,
            object,
        }
    }

    pub fn is_type(&self) -> bool {
        matches!(&self.predicate, TermPattern::Term(Term::Iri(p)) if p == rdf::TYPE)
    }

    fn vars(&self) -> impl Iterator<Item = &str> {
        [&self.subject, &self.predicate, &self.object]
            .into_iter()
            .filter_map(TermPattern::as_var)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Var(String),
    Const(Term),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    Bound(String),
}

impl Expr {
    pub fn cmp(op: CmpOp, left: Expr, right: Expr) -> Self {
        Expr::Cmp(op, Box::new(left), Box::new(right))
    }

    pub fn or(left: Expr, right: Expr) -> Self {
        Expr::Or(Box::new(left), Box::new(right))
    }

    /// Variables the expression mentions.
    pub fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Var(v) | Expr::Bound(v) => {
                out.insert(v.clone());
            }
            Expr::Const(_) => {}
            Expr::Cmp(_, a, b) | Expr::And(a, b) | Expr::Or(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            Expr::Not(e) => e.vars(out),
        }
    }

    /// Constant terms the expression mentions.
    pub fn constants<'a>(&'a self, out: &mut Vec<&'a Term>) {
        match self {
            Expr::Const(t) => out.push(t),
            Expr::Var(_) | Expr::Bound(_) => {}
            Expr::Cmp(_, a, b) | Expr::And(a, b) | Expr::Or(a, b) => {
                a.constants(out);
                b.constants(out);
            }
            Expr::Not(e) => e.constants(out),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    Triple(TriplePattern),
    Filter(Expr),
    Optional(GroupPattern),
    Graph(Iri, GroupPattern),
    SubSelect(Box<Query>),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroupPattern {
    pub elements: Vec<Element>,
}

impl GroupPattern {
    pub fn triples(&self) -> impl Iterator<Item = &TriplePattern> {
        self.elements.iter().filter_map(|e| match e {
            Element::Triple(t) => Some(t),
            _ => None,
        })
    }

    pub fn filters(&self) -> impl Iterator<Item = &Expr> {
        self.elements.iter().filter_map(|e| match e {
            Element::Filter(f) => Some(f),
            _ => None,
        })
    }

    /// Variables in order of first appearance, including nested groups.
    pub fn vars_in_order(&self, out: &mut Vec<String>) {
        let push = |v: &str, out: &mut Vec<String>| {
            if !out.iter().any(|x| x == v) {
                out.push(v.to_string());
            }
        };
        for e in &self.elements {
            match e {
                Element::Triple(t) => t.vars().for_each(|v| push(v, out)),
                Element::Filter(_) => {}
                Element::Optional(g) | Element::Graph(_, g) => g.vars_in_order(out),
                Element::SubSelect(q) => q.projected_vars().iter().for_each(|v| push(v, out)),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Projection {
    All,
    Vars(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    /// Declared prefixes, in declaration order.
    pub prefixes: Vec<(String, Iri)>,
    pub distinct: bool,
    pub projection: Projection,
    pub where_clause: GroupPattern,
}

impl Query {
    pub fn patterns(&self) -> impl Iterator<Item = &TriplePattern> {
        self.where_clause.triples()
    }

    pub fn filters(&self) -> impl Iterator<Item = &Expr> {
        self.where_clause.filters()
    }

    /// All variables of the WHERE clause in order of first appearance.
    pub fn pattern_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.where_clause.vars_in_order(&mut out);
        out
    }

    pub fn projected_vars(&self) -> Vec<String> {
        match &self.projection {
            Projection::All => self.pattern_vars(),
            Projection::Vars(v) => v.clone(),
        }
    }

    pub fn prefix_map(&self) -> PrefixMap {
        let mut map = PrefixMap::empty();
        for (p, ns) in &self.prefixes {
            map.insert(p.clone(), ns.as_str());
        }
        map
    }

    /// SPARQL text; IRIs are compacted with the declared prefixes.
    pub fn render(&self) -> String {
        let map = self.prefix_map();
        let mut out = String::new();
        for (p, ns) in &self.prefixes {
            let _ = writeln!(out, "PREFIX {p}: <{}>", ns.as_str());
        }
        render_select(self, &map, 0, &mut out);
        out.push('\n');
        out
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn render_select(q: &Query, map: &PrefixMap, depth: usize, out: &mut String) {
    out.push_str("SELECT ");
    if q.distinct {
        out.push_str("DISTINCT ");
    }
    match &q.projection {
        Projection::All => out.push('*'),
        Projection::Vars(vars) => {
            let list: Vec<String> = vars.iter().map(|v| format!("?{v}")).collect();
            out.push_str(&list.join(" "));
        }
    }
    out.push_str(" WHERE ");
    render_group(&q.where_clause, map, depth, out);
}

fn render_group(g: &GroupPattern, map: &PrefixMap, depth: usize, out: &mut String) {
    out.push_str("{\n");
    for e in &g.elements {
        indent(out, depth + 1);
        match e {
            Element::Triple(t) => {
                let _ = write!(
                    out,
                    "{} {} {} .",
                    render_slot(&t.subject, map, false),
                    render_slot(&t.predicate, map, true),
                    render_slot(&t.object, map, false)
                );
            }
            Element::Filter(expr) => {
                out.push_str("FILTER(");
                render_expr(expr, map, out);
                out.push(')');
            }
            Element::Optional(inner) => {
                out.push_str("OPTIONAL ");
                render_group(inner, map, depth + 1, out);
            }
            Element::Graph(name, inner) => {
                let _ = write!(out, "GRAPH {} ", render_iri(name, map));
                render_group(inner, map, depth + 1, out);
            }
            Element::SubSelect(q) => {
                out.push_str("{ ");
                render_select(q, map, depth + 1, out);
                out.push_str(" }");
            }
        }
        out.push('\n');
    }
    indent(out, depth);
    out.push('}');
}

fn render_iri(iri: &Iri, map: &PrefixMap) -> String {
    map.compact(iri.as_str()).unwrap_or_else(|| format!("<{}>", iri.as_str()))
}

pub(crate) fn render_term(t: &Term, map: &PrefixMap) -> String {
    match t {
        Term::Iri(i) => render_iri(i, map),
        Term::Literal(l) => render_literal(l, map),
        Term::BlankNode(_) => t.to_ntriples(),
    }
}

fn render_literal(l: &Literal, map: &PrefixMap) -> String {
    let quoted = Term::Literal(Literal::string(l.lexical())).to_ntriples();
    if let Some(lang) = l.language() {
        return format!("{quoted}@{lang}");
    }
    if l.datatype() == xsd::STRING {
        return quoted;
    }
    let lex = l.lexical();
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    let unsigned = lex.strip_prefix(['-', '+']).unwrap_or(lex);
    let bare = match l.datatype().as_str() {
        xsd::INTEGER => digits(unsigned),
        xsd::DECIMAL => unsigned
            .split_once('.')
            .is_some_and(|(a, b)| digits(a) && digits(b)),
        xsd::BOOLEAN => lex == "true" || lex == "false",
        _ => false,
    };
    if bare {
        return lex.to_string();
    }
    format!("{quoted}^^{}", render_iri(l.datatype(), map))
}

fn render_slot(p: &TermPattern, map: &PrefixMap, predicate: bool) -> String {
    match p {
        TermPattern::Var(v) => format!("?{v}"),
        TermPattern::Term(Term::Iri(i)) if predicate && i == rdf::TYPE => "a".to_string(),
        TermPattern::Term(t) => render_term(t, map),
    }
}

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Or(..) => 1,
        Expr::And(..) => 2,
        Expr::Cmp(..) => 3,
        _ => 4,
    }
}

fn render_expr(e: &Expr, map: &PrefixMap, out: &mut String) {
    let level = precedence(e);
    match e {
        Expr::Var(v) => {
            let _ = write!(out, "?{v}");
        }
        Expr::Const(t) => out.push_str(&render_term(t, map)),
        Expr::Cmp(op, a, b) => {
            render_operand(a, level + 1, map, out);
            let _ = write!(out, " {} ", op.symbol());
            render_operand(b, level + 1, map, out);
        }
        Expr::And(a, b) | Expr::Or(a, b) => {
            let symbol = if level == 1 { " || " } else { " && " };
            render_operand(a, level, map, out);
            out.push_str(symbol);
            render_operand(b, level + 1, map, out);
        }
        Expr::Not(inner) => {
            out.push('!');
            render_operand(inner, 4, map, out);
        }
        Expr::Bound(v) => {
            let _ = write!(out, "bound(?{v})");
        }
    }
}

/// Parenthesizes `e` when it binds looser than `min`.
fn render_operand(e: &Expr, min: u8, map: &PrefixMap, out: &mut String) {
    if precedence(e) < min {
        out.push('(');
        render_expr(e, map, out);
        out.push(')');
    } else {
        render_expr(e, map, out);
    }
}
