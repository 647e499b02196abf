use std::cmp::Ordering;
use std::fmt;
use std::sync::{Arc, LazyLock};

use chrono::{DateTime, FixedOffset, NaiveDateTime, TimeZone, Utc};
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ns::{priv_, rdf, xsd};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("IRI <{0}> is not absolute")]
    RelativeIri(String),
    #[error("IRI <{0}> contains a forbidden character")]
    InvalidIri(String),
    #[error("invalid lexical form {lexical:?} for datatype <{datatype}>")]
    InvalidLexical { lexical: String, datatype: String },
    #[error("invalid language tag {0:?}")]
    InvalidLanguage(String),
    #[error("invalid blank node label {0:?}")]
    InvalidBlankNode(String),
    #[error("quad subject must be an IRI or blank node, found {0}")]
    LiteralSubject(String),
}

static SCHEME: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[A-Za-z][A-Za-z0-9+.\-]*:").unwrap());

/// An absolute IRI. Cheap to clone.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Iri(Arc<str>);

impl Iri {
    pub fn new(value: impl Into<String>) -> Result<Self, TermError> {
        let value = value.into();
        if value
            .chars()
            .any(|c| c <= ' ' || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\'))
        {
            return Err(TermError::InvalidIri(value));
        }
        if !SCHEME.is_match(&value) {
            return Err(TermError::RelativeIri(value));
        }
        Ok(Self(value.into()))
    }

    /// Builds an IRI from a compile-time constant. Panics on an invalid constant.
    pub fn from_static(value: &'static str) -> Self {
        Self::new(value).expect("static IRI must be absolute")
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

impl TryFrom<String> for Iri {
    type Error = TermError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        Iri::new(value)
    }
}

impl From<Iri> for String {
    fn from(value: Iri) -> Self {
        value.0.to_string()
    }
}

impl std::borrow::Borrow<str> for Iri {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl PartialEq<str> for Iri {
    fn eq(&self, other: &str) -> bool {
        &*self.0 == other
    }
}

impl PartialEq<&str> for Iri {
    fn eq(&self, other: &&str) -> bool {
        &*self.0 == *other
    }
}

static LANG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[A-Za-z]{1,8}(-[A-Za-z0-9]{1,8})*$").unwrap());
static BOOLEAN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^(true|false|1|0)$").unwrap());
static INTEGER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[+-]?[0-9]+$").unwrap());
static DECIMAL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[+-]?([0-9]+(\.[0-9]*)?|\.[0-9]+)$").unwrap());
static DOUBLE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^([+-]?([0-9]+(\.[0-9]*)?|\.[0-9]+)([eE][+-]?[0-9]+)?|-?INF|\+INF|NaN)$").unwrap()
});
static DATE_TIME: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^-?[0-9]{4,}-[0-9]{2}-[0-9]{2}T[0-9]{2}:[0-9]{2}:[0-9]{2}(\.[0-9]+)?(Z|[+-][0-9]{2}:[0-9]{2})?$")
        .unwrap()
});

/// A literal: lexical form plus datatype, with an optional language tag.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal {
    lexical: String,
    datatype: Iri,
    language: Option<String>,
}

impl Literal {
    /// A plain `xsd:string` literal.
    pub fn string(lexical: impl Into<String>) -> Self {
        Self {
            lexical: lexical.into(),
            datatype: Iri::from_static(xsd::STRING),
            language: None,
        }
    }

    /// A typed literal. Lexical forms of the XSD datatypes the hub understands
    /// are validated; other datatypes are accepted as opaque.
    pub fn typed(lexical: impl Into<String>, datatype: Iri) -> Result<Self, TermError> {
        let lexical = lexical.into();
        if datatype == rdf::LANG_STRING {
            return Err(TermError::InvalidLexical {
                lexical,
                datatype: datatype.as_str().into(),
            });
        }
        if !lexical_is_valid(&lexical, datatype.as_str()) {
            return Err(TermError::InvalidLexical {
                lexical,
                datatype: datatype.as_str().into(),
            });
        }
        Ok(Self {
            lexical,
            datatype,
            language: None,
        })
    }

    pub fn lang_string(lexical: impl Into<String>, language: impl Into<String>) -> Result<Self, TermError> {
        let language = language.into();
        if !LANG.is_match(&language) {
            return Err(TermError::InvalidLanguage(language));
        }
        Ok(Self {
            lexical: lexical.into(),
            datatype: Iri::from_static(rdf::LANG_STRING),
            language: Some(language.to_ascii_lowercase()),
        })
    }

    pub fn date_time(value: DateTime<Utc>) -> Self {
        Self {
            lexical: value.to_rfc3339_opts(chrono::SecondsFormat::AutoSi, true),
            datatype: Iri::from_static(xsd::DATE_TIME),
            language: None,
        }
    }

    pub fn double(value: f64) -> Self {
        Self {
            lexical: format_double(value),
            datatype: Iri::from_static(xsd::DOUBLE),
            language: None,
        }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> &Iri {
        &self.datatype
    }

    pub fn language(&self) -> Option<&str> {
        self.language.as_deref()
    }

    /// The typed value used by FILTER comparisons.
    pub fn value(&self) -> Value<'_> {
        let dt = self.datatype.as_str();
        if self.language.is_some() {
            return Value::LangString(&self.lexical, self.language.as_deref().unwrap_or_default());
        }
        match dt {
            xsd::STRING => Value::String(&self.lexical),
            xsd::BOOLEAN => Value::Boolean(matches!(self.lexical.as_str(), "true" | "1")),
            xsd::INT | xsd::INTEGER | xsd::LONG | xsd::NON_NEGATIVE_INTEGER | xsd::DECIMAL => self
                .lexical
                .parse::<f64>()
                .map(Value::Numeric)
                .unwrap_or(Value::Other),
            xsd::DOUBLE | xsd::FLOAT => parse_double(&self.lexical).map(Value::Numeric).unwrap_or(Value::Other),
            xsd::DATE_TIME => parse_date_time(&self.lexical).map(Value::DateTime).unwrap_or(Value::Other),
            _ => Value::Other,
        }
    }
}

/// Typed value of a literal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value<'a> {
    Numeric(f64),
    Boolean(bool),
    DateTime(DateTime<FixedOffset>),
    String(&'a str),
    LangString(&'a str, &'a str),
    Other,
}

impl Value<'_> {
    /// Compares two values of compatible types. `None` means the comparison is
    /// a type error.
    pub fn partial_cmp_typed(&self, other: &Value<'_>) -> Option<Ordering> {
        match (self, other) {
            (Value::Numeric(a), Value::Numeric(b)) => a.partial_cmp(b),
            (Value::Boolean(a), Value::Boolean(b)) => Some(a.cmp(b)),
            (Value::DateTime(a), Value::DateTime(b)) => Some(a.cmp(b)),
            (Value::String(a), Value::String(b)) => Some(a.cmp(b)),
            (Value::LangString(a, la), Value::LangString(b, lb)) if la == lb => Some(a.cmp(b)),
            _ => None,
        }
    }
}

fn lexical_is_valid(lexical: &str, datatype: &str) -> bool {
    match datatype {
        xsd::BOOLEAN => BOOLEAN.is_match(lexical),
        xsd::INT => INTEGER.is_match(lexical) && lexical.parse::<i32>().is_ok(),
        xsd::LONG => INTEGER.is_match(lexical) && lexical.parse::<i64>().is_ok(),
        xsd::INTEGER => INTEGER.is_match(lexical),
        xsd::NON_NEGATIVE_INTEGER => INTEGER.is_match(lexical) && !lexical.starts_with('-'),
        xsd::DECIMAL => DECIMAL.is_match(lexical),
        xsd::DOUBLE | xsd::FLOAT => DOUBLE.is_match(lexical),
        xsd::DATE_TIME => DATE_TIME.is_match(lexical) && parse_date_time(lexical).is_some(),
        _ => true,
    }
}

fn parse_double(lexical: &str) -> Option<f64> {
    match lexical {
        "INF" | "+INF" => Some(f64::INFINITY),
        "-INF" => Some(f64::NEG_INFINITY),
        "NaN" => Some(f64::NAN),
        other => other.parse().ok(),
    }
}

fn format_double(value: f64) -> String {
    if value.is_nan() {
        "NaN".into()
    } else if value.is_infinite() {
        if value > 0.0 { "INF".into() } else { "-INF".into() }
    } else {
        format!("{value:?}")
    }
}

/// Parses an `xsd:dateTime` lexical form. A missing timezone is read as UTC.
pub fn parse_date_time(lexical: &str) -> Option<DateTime<FixedOffset>> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(lexical) {
        return Some(dt);
    }
    let naive = NaiveDateTime::parse_from_str(lexical, "%Y-%m-%dT%H:%M:%S%.f").ok()?;
    Some(FixedOffset::east_opt(0)?.from_utc_datetime(&naive))
}

/// An RDF term.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Iri(Iri),
    BlankNode(String),
    Literal(Literal),
}

impl Term {
    pub fn iri(value: &str) -> Result<Self, TermError> {
        Iri::new(value).map(Term::Iri)
    }

    pub fn blank(label: impl Into<String>) -> Result<Self, TermError> {
        let label = label.into();
        let valid = !label.is_empty()
            && label.chars().all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))
            && !label.ends_with('.')
            && !label.starts_with(['-', '.']);
        if valid {
            Ok(Term::BlankNode(label))
        } else {
            Err(TermError::InvalidBlankNode(label))
        }
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(lit) => Some(lit),
            _ => None,
        }
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }

    /// N-Triples rendering, also used as the deterministic sort key for results.
    pub fn to_ntriples(&self) -> String {
        match self {
            Term::Iri(iri) => format!("<{}>", iri.as_str()),
            Term::BlankNode(label) => format!("_:{label}"),
            Term::Literal(lit) => {
                let mut out = String::with_capacity(lit.lexical.len() + 2);
                out.push('"');
                escape_string_into(&lit.lexical, &mut out);
                out.push('"');
                if let Some(lang) = &lit.language {
                    out.push('@');
                    out.push_str(lang);
                } else if lit.datatype != xsd::STRING {
                    out.push_str("^^<");
                    out.push_str(lit.datatype.as_str());
                    out.push('>');
                }
                out
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_ntriples())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_ntriples())
    }
}

impl From<Iri> for Term {
    fn from(value: Iri) -> Self {
        Term::Iri(value)
    }
}

impl From<Literal> for Term {
    fn from(value: Literal) -> Self {
        Term::Literal(value)
    }
}

pub(crate) fn escape_string_into(value: &str, out: &mut String) {
    for c in value.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            '\u{8}' => out.push_str("\\b"),
            '\u{c}' => out.push_str("\\f"),
            c if (c as u32) < 0x20 || c == '\u{7f}' => out.push_str(&format!("\\u{:04X}", c as u32)),
            c => out.push(c),
        }
    }
}

/// The five named graphs of the hub.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphId {
    ResourceGraph,
    ObservationGraph,
    ConsentGraph,
    UserPermissionsGraph,
    VocabularyGraph,
}

impl GraphId {
    pub const ALL: [GraphId; 5] = [
        GraphId::ResourceGraph,
        GraphId::ObservationGraph,
        GraphId::ConsentGraph,
        GraphId::UserPermissionsGraph,
        GraphId::VocabularyGraph,
    ];

    pub fn iri(self) -> &'static str {
        match self {
            GraphId::ResourceGraph => priv_::RESOURCE_GRAPH,
            GraphId::ObservationGraph => priv_::OBSERVATION_GRAPH,
            GraphId::ConsentGraph => priv_::CONSENT_GRAPH,
            GraphId::UserPermissionsGraph => priv_::USER_PERMISSIONS_GRAPH,
            GraphId::VocabularyGraph => priv_::VOCABULARY_GRAPH,
        }
    }

    pub fn from_iri(iri: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|g| g.iri() == iri)
    }

    pub(crate) fn index(self) -> usize {
        self as usize
    }

    pub fn is_privacy(self) -> bool {
        matches!(self, GraphId::ConsentGraph | GraphId::UserPermissionsGraph)
    }

    pub fn is_data(self) -> bool {
        matches!(self, GraphId::ResourceGraph | GraphId::ObservationGraph)
    }
}

impl fmt::Display for GraphId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            GraphId::ResourceGraph => "resource",
            GraphId::ObservationGraph => "observation",
            GraphId::ConsentGraph => "consent",
            GraphId::UserPermissionsGraph => "user-permissions",
            GraphId::VocabularyGraph => "vocabulary",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for GraphId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "resource" => Ok(GraphId::ResourceGraph),
            "observation" => Ok(GraphId::ObservationGraph),
            "consent" => Ok(GraphId::ConsentGraph),
            "user-permissions" | "userPermissions" => Ok(GraphId::UserPermissionsGraph),
            "vocabulary" => Ok(GraphId::VocabularyGraph),
            other => Err(format!("unknown graph {other:?}")),
        }
    }
}

/// A statement in one of the hub's named graphs.
///
/// Field order matters: quads sort by graph first, then subject, predicate
/// and object.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Quad {
    pub graph: GraphId,
    pub subject: Term,
    pub predicate: Iri,
    pub object: Term,
}

impl Quad {
    pub fn new(subject: Term, predicate: Iri, object: Term, graph: GraphId) -> Result<Self, TermError> {
        if subject.is_literal() {
            return Err(TermError::LiteralSubject(subject.to_ntriples()));
        }
        Ok(Self {
            graph,
            subject,
            predicate,
            object,
        })
    }

    /// Convenience for IRI-only statements built from trusted parts.
    pub fn iris(subject: &Iri, predicate: &str, object: &Iri, graph: GraphId) -> Self {
        Self {
            graph,
            subject: Term::Iri(subject.clone()),
            predicate: Iri::new(predicate).expect("predicate IRI"),
            object: Term::Iri(object.clone()),
        }
    }

    pub fn with_graph(mut self, graph: GraphId) -> Self {
        self.graph = graph;
        self
    }
}

impl fmt::Debug for Quad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} [{}]",
            self.subject.to_ntriples(),
            self.predicate,
            self.object.to_ntriples(),
            self.graph
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iri_must_be_absolute() {
        assert!(Iri::new("http://www.w3.org/ns/sosa/Sensor").is_ok());
        assert!(matches!(Iri::new("sensor/1"), Err(TermError::RelativeIri(_))));
        assert!(matches!(Iri::new("http://a b"), Err(TermError::InvalidIri(_))));
    }

    #[test]
    fn xsd_lexical_forms_are_checked() {
        let dt = |s: &'static str| Iri::from_static(s);
        assert!(Literal::typed("1", dt(xsd::BOOLEAN)).is_ok());
        assert!(Literal::typed("yes", dt(xsd::BOOLEAN)).is_err());
        assert!(Literal::typed("90", dt(xsd::DOUBLE)).is_ok());
        assert!(Literal::typed("9.0e1", dt(xsd::DOUBLE)).is_ok());
        assert!(Literal::typed("high", dt(xsd::DOUBLE)).is_err());
        assert!(Literal::typed("2147483648", dt(xsd::INT)).is_err());
        assert!(Literal::typed("-12", dt(xsd::INT)).is_ok());
        assert!(Literal::typed("2016-10-27T10:20:16.570Z", dt(xsd::DATE_TIME)).is_ok());
        // transcription artifact in the source timestamp is rejected
        assert!(Literal::typed("2016-10-27T0-10:20:16.570Z", dt(xsd::DATE_TIME)).is_err());
        assert!(Literal::typed("2016-02-30T10:00:00Z", dt(xsd::DATE_TIME)).is_err());
    }

    #[test]
    fn literal_defaults_and_language() {
        let plain = Literal::string("x");
        assert_eq!(plain.datatype().as_str(), xsd::STRING);
        let tagged = Literal::lang_string("bonjour", "FR").unwrap();
        assert_eq!(tagged.datatype().as_str(), rdf::LANG_STRING);
        assert_eq!(tagged.language(), Some("fr"));
    }

    #[test]
    fn numeric_values_compare_by_value() {
        let a = Literal::typed("90", Iri::from_static(xsd::DOUBLE)).unwrap();
        let b = Literal::typed("100", Iri::from_static(xsd::INTEGER)).unwrap();
        assert_eq!(a.value().partial_cmp_typed(&b.value()), Some(Ordering::Less));
        let s = Literal::string("90");
        assert_eq!(a.value().partial_cmp_typed(&s.value()), None);
    }

    #[test]
    fn graph_iris_round_trip() {
        for g in GraphId::ALL {
            assert_eq!(GraphId::from_iri(g.iri()), Some(g));
        }
        assert_eq!(GraphId::from_iri("http://example.org/g"), None);
    }

    #[test]
    fn literal_subject_rejected() {
        let err = Quad::new(
            Term::Literal(Literal::string("x")),
            Iri::from_static(rdf::TYPE),
            Term::iri("http://e/x").unwrap(),
            GraphId::ResourceGraph,
        );
        assert!(matches!(err, Err(TermError::LiteralSubject(_))));
    }
}
