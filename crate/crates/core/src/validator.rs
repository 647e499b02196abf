//! Structural linting of the vocabulary and of instance data, plus a report of
//! what the reasoner infers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::ns::{con, dul, iot_lite, rdf, sosa, ssn_system, xsd};
use crate::rdf::{Dataset, GraphId, Iri, Term};
use crate::vocab::{PropertyKind, Vocabulary};

/// Metadata links a subject may carry before it is flagged.
pub const DEFAULT_METADATA_CAP: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum FindingCode {
    CardinalitySchemaViolation,
    DatatypeMismatch,
    MetadataAbuse,
    MissingDomainRange,
    MissingInverse,
    MissingLabelOrComment,
    NamingConvention,
    SuspiciousInverse,
    UnconnectedElement,
}

impl fmt::Display for FindingCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Severity {
    Error,
    Warning,
    Info,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Finding {
    pub code: FindingCode,
    pub severity: Severity,
    /// Offending entity. Instance findings may point at a blank node.
    pub subject: Term,
    pub message: String,
}

impl Finding {
    fn new(code: FindingCode, severity: Severity, subject: Term, message: impl Into<String>) -> Self {
        Self {
            code,
            severity,
            subject,
            message: message.into(),
        }
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}",
            self.severity,
            self.code,
            self.subject.to_ntriples(),
            self.message
        )
    }
}

fn sorted(mut findings: Vec<Finding>) -> Vec<Finding> {
    findings.sort();
    findings.dedup();
    findings
}

pub fn has_errors(findings: &[Finding]) -> bool {
    findings.iter().any(|f| f.severity == Severity::Error)
}

pub fn lint_vocabulary(v: &Vocabulary) -> Vec<Finding> {
    let mut out = Vec::new();
    unconnected(v, &mut out);
    missing_domain_range(v, &mut out);
    suspicious_inverses(v, &mut out);
    naming(v, &mut out);
    labels(v, &mut out);
    sorted(out)
}

fn is_metadata(v: &Vocabulary, class: &Iri) -> bool {
    v.is_subclass(class.as_str(), iot_lite::METADATA)
}

fn unconnected(v: &Vocabulary, out: &mut Vec<Finding>) {
    let touched: BTreeSet<&Iri> = v
        .properties()
        .flat_map(|p| p.domain_includes.iter().chain(&p.range_includes))
        .collect();
    for c in v.concepts() {
        if is_metadata(v, &c.iri) {
            continue;
        }
        let mut related = v.superclasses(&c.iri).into_iter().chain(v.subclasses(&c.iri));
        if !related.any(|r| touched.contains(&r)) {
            out.push(Finding::new(
                FindingCode::UnconnectedElement,
                Severity::Warning,
                Term::Iri(c.iri.clone()),
                "no property has this class, a superclass or a subclass in its domain or range",
            ));
        }
    }
}

fn missing_domain_range(v: &Vocabulary, out: &mut Vec<Finding>) {
    for p in v.properties() {
        let open_domain = p.range_includes.iter().any(|r| is_metadata(v, r));
        let missing = match (p.domain_includes.is_empty() && !open_domain, p.range_includes.is_empty()) {
            (true, true) => "domain and range",
            (true, false) => "domain",
            (false, true) => "range",
            (false, false) => continue,
        };
        out.push(Finding::new(
            FindingCode::MissingDomainRange,
            Severity::Error,
            Term::Iri(p.iri.clone()),
            format!("no {missing} declared, neither strict nor includes-style"),
        ));
    }
}

fn suspicious_inverses(v: &Vocabulary, out: &mut Vec<Finding>) {
    let declared = v.inverse_closure();
    let props: Vec<_> = v
        .properties()
        .filter(|p| p.kind == PropertyKind::Object && !p.domain_includes.is_empty() && !p.range_includes.is_empty())
        .collect();
    for (i, p) in props.iter().enumerate() {
        for q in &props[i + 1..] {
            let crosswise = p.domain_includes == q.range_includes && p.range_includes == q.domain_includes;
            if crosswise && !declared.contains(&(p.iri.clone(), q.iri.clone())) {
                out.push(Finding::new(
                    FindingCode::SuspiciousInverse,
                    Severity::Info,
                    Term::Iri(p.iri.clone()),
                    format!("domain and range mirror {} but no inverse is declared", q.iri),
                ));
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Style {
    Snake,
    Camel,
}

impl fmt::Display for Style {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Style::Snake => "snake_case",
            Style::Camel => "camelCase",
        })
    }
}

/// Style of a property local name; single lowercase words have none.
fn style_of(local: &str) -> Option<Style> {
    if local.contains('_') {
        Some(Style::Snake)
    } else if local.chars().skip(1).any(|c| c.is_ascii_uppercase()) {
        Some(Style::Camel)
    } else {
        None
    }
}

/// Splits an IRI after its last `#` or `/`.
fn split_namespace(iri: &str) -> (&str, &str) {
    match iri.rfind(['#', '/']) {
        Some(i) => iri.split_at(i + 1),
        None => ("", iri),
    }
}

fn naming(v: &Vocabulary, out: &mut Vec<Finding>) {
    let mut by_ns: BTreeMap<&str, BTreeMap<Style, Vec<&str>>> = BTreeMap::new();
    for p in v.properties() {
        let (ns, local) = split_namespace(p.iri.as_str());
        if let Some(style) = style_of(local) {
            by_ns.entry(ns).or_default().entry(style).or_default().push(local);
        }
    }
    let mut totals: BTreeMap<Style, usize> = BTreeMap::new();
    for styles in by_ns.values() {
        for (s, names) in styles {
            *totals.entry(*s).or_default() += names.len();
        }
    }
    let dominant = totals.iter().max_by_key(|(s, n)| (**n, std::cmp::Reverse(**s))).map(|(s, _)| *s);
    for (ns, styles) in &by_ns {
        let Ok(subject) = Iri::new(*ns) else { continue };
        let message = if styles.len() > 1 {
            let parts: Vec<String> = styles.iter().map(|(s, names)| format!("{s} ({})", names.join(", "))).collect();
            format!("mixes naming styles: {}", parts.join(" and "))
        } else {
            let (style, names) = styles.iter().next().expect("non-empty");
            match dominant {
                Some(d) if d != *style => {
                    format!("uses {style} ({}) while the rest of the vocabulary uses {d}", names.join(", "))
                }
                _ => continue,
            }
        };
        out.push(Finding::new(
            FindingCode::NamingConvention,
            Severity::Warning,
            Term::Iri(subject),
            message,
        ));
    }
}

fn labels(v: &Vocabulary, out: &mut Vec<Finding>) {
    let concepts = v.concepts().map(|c| (&c.iri, &c.label, &c.comment));
    let props = v.properties().map(|p| (&p.iri, &p.label, &p.comment));
    for (iri, label, comment) in concepts.chain(props) {
        let missing = match (label.trim().is_empty(), comment.trim().is_empty()) {
            (true, true) => "label and comment",
            (true, false) => "label",
            (false, true) => "comment",
            (false, false) => continue,
        };
        out.push(Finding::new(
            FindingCode::MissingLabelOrComment,
            Severity::Warning,
            Term::Iri(iri.clone()),
            format!("no {missing}"),
        ));
    }
}

/// Instance checks with the default metadata cap.
pub fn lint_instances(d: &Dataset, v: &Vocabulary) -> Vec<Finding> {
    lint_instances_with_cap(d, v, DEFAULT_METADATA_CAP)
}

pub fn lint_instances_with_cap(d: &Dataset, v: &Vocabulary, metadata_cap: usize) -> Vec<Finding> {
    let mut out = Vec::new();
    let graphs: Vec<GraphId> = GraphId::ALL
        .into_iter()
        .filter(|g| *g != GraphId::VocabularyGraph)
        .collect();
    datatypes(d, v, &graphs, &mut out);
    inverses(d, v, &graphs, &mut out);
    cardinalities(d, v, &graphs, &mut out);
    metadata(d, &graphs, metadata_cap, &mut out);
    sorted(out)
}

/// Datatype ancestors per XSD derivation, the type itself included.
fn datatype_ancestors(dt: &str) -> &'static [&'static str] {
    match dt {
        xsd::INT => &[xsd::INT, xsd::LONG, xsd::INTEGER, xsd::DECIMAL],
        xsd::LONG => &[xsd::LONG, xsd::INTEGER, xsd::DECIMAL],
        xsd::NON_NEGATIVE_INTEGER => &[xsd::NON_NEGATIVE_INTEGER, xsd::INTEGER, xsd::DECIMAL],
        xsd::INTEGER => &[xsd::INTEGER, xsd::DECIMAL],
        rdf::LANG_STRING => &[rdf::LANG_STRING, xsd::STRING],
        _ => &[],
    }
}

fn datatype_fits(dt: &Iri, allowed: &[&str]) -> bool {
    allowed.contains(&dt.as_str()) || datatype_ancestors(dt.as_str()).iter().any(|a| allowed.contains(a))
}

/// Narrower value ranges for a property on instances of a given class.
const CONTEXT_RANGES: [(&str, &str, &[&str]); 3] = [
    (dul::HAS_DATA_VALUE, sosa::RESULT, &[xsd::INT, xsd::DOUBLE]),
    (dul::HAS_DATA_VALUE, ssn_system::SYSTEM_PROPERTY, &[xsd::INT, xsd::DOUBLE]),
    (dul::HAS_DATA_VALUE, con::PERMISSION, &[xsd::DATE_TIME]),
];

fn types_of(d: &Dataset, graphs: &[GraphId], s: &Term) -> BTreeSet<Iri> {
    let ty = Iri::from_static(rdf::TYPE);
    graphs
        .iter()
        .flat_map(|g| d.objects(*g, s, &ty))
        .filter_map(|t| t.as_iri().cloned())
        .collect()
}

fn datatypes(d: &Dataset, v: &Vocabulary, graphs: &[GraphId], out: &mut Vec<Finding>) {
    for g in graphs {
        for q in d.graph(*g) {
            let Some(p) = v.property(q.predicate.as_str()) else { continue };
            match (p.kind, &q.object) {
                (PropertyKind::Object, Term::Literal(l)) => out.push(Finding::new(
                    FindingCode::DatatypeMismatch,
                    Severity::Error,
                    q.subject.clone(),
                    format!("{} expects a resource, found literal \"{}\"", p.iri, l.lexical()),
                )),
                (PropertyKind::Data, Term::Literal(l)) => {
                    let types = types_of(d, graphs, &q.subject);
                    let context: Vec<&str> = CONTEXT_RANGES
                        .iter()
                        .filter(|(prop, class, _)| {
                            *prop == p.iri.as_str() && types.iter().any(|t| v.is_subclass(t.as_str(), class))
                        })
                        .flat_map(|(_, _, allowed)| allowed.iter().copied())
                        .collect();
                    let allowed: Vec<&str> = if context.is_empty() {
                        p.range_includes.iter().map(Iri::as_str).collect()
                    } else {
                        context
                    };
                    if !allowed.is_empty() && !datatype_fits(l.datatype(), &allowed) {
                        out.push(Finding::new(
                            FindingCode::DatatypeMismatch,
                            Severity::Error,
                            q.subject.clone(),
                            format!(
                                "{} value \"{}\" has datatype {}, expected one of {}",
                                p.iri,
                                l.lexical(),
                                l.datatype(),
                                allowed.join(", ")
                            ),
                        ));
                    }
                }
                (PropertyKind::Data, other) => out.push(Finding::new(
                    FindingCode::DatatypeMismatch,
                    Severity::Error,
                    q.subject.clone(),
                    format!("{} expects a literal, found {}", p.iri, other.to_ntriples()),
                )),
                (PropertyKind::Object, _) => {}
            }
        }
    }
}

fn inverses(d: &Dataset, v: &Vocabulary, graphs: &[GraphId], out: &mut Vec<Finding>) {
    for g in graphs {
        for q in d.graph(*g) {
            if q.object.is_literal() {
                continue;
            }
            for inv in v.inverses_of(q.predicate.as_str()) {
                let mut present = false;
                d.match_in(*g, Some(&q.object), Some(inv), Some(&q.subject), &mut |_, _, _| present = true);
                if !present {
                    out.push(Finding::new(
                        FindingCode::MissingInverse,
                        Severity::Warning,
                        q.object.clone(),
                        format!("{} {} is not mirrored by {}", q.predicate, q.subject.to_ntriples(), inv),
                    ));
                }
            }
        }
    }
}

fn cardinalities(d: &Dataset, v: &Vocabulary, graphs: &[GraphId], out: &mut Vec<Finding>) {
    for p in v.properties() {
        let Some(max) = p.cardinality.and_then(|c| c.max) else { continue };
        let mut objects: BTreeMap<Term, BTreeSet<Term>> = BTreeMap::new();
        for g in graphs {
            d.match_in(*g, None, Some(&p.iri), None, &mut |s, _, o| {
                objects.entry(s.clone()).or_default().insert(o.clone());
            });
            for inv in v.inverses_of(p.iri.as_str()) {
                d.match_in(*g, None, Some(inv), None, &mut |s, _, o| {
                    objects.entry(o.clone()).or_default().insert(s.clone());
                });
            }
        }
        for (subject, objs) in objects {
            if objs.len() > max as usize {
                out.push(Finding::new(
                    FindingCode::CardinalitySchemaViolation,
                    Severity::Error,
                    subject,
                    format!("{} has {} values, at most {max} allowed", p.iri, objs.len()),
                ));
            }
        }
    }
}

fn metadata(d: &Dataset, graphs: &[GraphId], cap: usize, out: &mut Vec<Finding>) {
    let link = Iri::from_static(iot_lite::HAS_METADATA);
    let mut records: BTreeMap<Term, BTreeSet<Term>> = BTreeMap::new();
    for g in graphs {
        d.match_in(*g, None, Some(&link), None, &mut |s, _, o| {
            records.entry(s.clone()).or_default().insert(o.clone());
        });
    }
    for (subject, recs) in records {
        if recs.len() > cap {
            out.push(Finding::new(
                FindingCode::MetadataAbuse,
                Severity::Warning,
                subject,
                format!("{} metadata records, the cap is {cap}", recs.len()),
            ));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Axiom {
    SubClassOf(Iri, Iri),
    SubPropertyOf(Iri, Iri),
    InverseOf(Iri, Iri),
    /// The first property is a sub-property of the inverse of the second.
    SubPropertyOfInverse(Iri, Iri),
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axiom::SubClassOf(a, b) => write!(f, "{a} subClassOf {b}"),
            Axiom::SubPropertyOf(a, b) => write!(f, "{a} subPropertyOf {b}"),
            Axiom::InverseOf(a, b) => write!(f, "{a} inverseOf {b}"),
            Axiom::SubPropertyOfInverse(a, b) => write!(f, "{a} subPropertyOf inverse of {b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntailmentReport {
    /// Derived axioms that were not asserted, reflexive pairs left out.
    pub inferred: BTreeSet<Axiom>,
    pub satisfiable: bool,
    pub cycles: Vec<Vec<Iri>>,
}

pub fn check_entailments(v: &Vocabulary) -> EntailmentReport {
    let mut asserted = BTreeSet::new();
    for c in v.concepts() {
        for s in &c.direct_superclasses {
            asserted.insert(Axiom::SubClassOf(c.iri.clone(), s.clone()));
        }
        for e in &c.equivalents {
            asserted.insert(Axiom::SubClassOf(c.iri.clone(), e.clone()));
            asserted.insert(Axiom::SubClassOf(e.clone(), c.iri.clone()));
        }
    }
    for p in v.properties() {
        for s in &p.super_properties {
            asserted.insert(Axiom::SubPropertyOf(p.iri.clone(), s.clone()));
        }
        for e in &p.equivalents {
            asserted.insert(Axiom::SubPropertyOf(p.iri.clone(), e.clone()));
            asserted.insert(Axiom::SubPropertyOf(e.clone(), p.iri.clone()));
        }
        if let Some(q) = &p.inverse {
            asserted.insert(Axiom::InverseOf(p.iri.clone(), q.clone()));
            asserted.insert(Axiom::InverseOf(q.clone(), p.iri.clone()));
        }
    }

    let mut inferred = BTreeSet::new();
    for (a, b) in v.closure_pairs() {
        if a != b {
            inferred.insert(Axiom::SubClassOf(a, b));
        }
    }
    for p in v.properties() {
        for s in v.super_properties(&p.iri) {
            if s != p.iri {
                inferred.insert(Axiom::SubPropertyOf(p.iri.clone(), s));
            }
        }
    }
    for (a, b) in v.inverse_closure() {
        inferred.insert(Axiom::InverseOf(a, b));
    }
    for (a, c) in v.sub_property_inverse_pairs() {
        inferred.insert(Axiom::SubPropertyOfInverse(a, c));
    }
    let inferred = inferred.difference(&asserted).cloned().collect();
    EntailmentReport {
        inferred,
        satisfiable: v.cycles().is_empty(),
        cycles: v.cycles().to_vec(),
    }
}
