use std::collections::BTreeMap;

use thiserror::Error;

use super::term::{Iri, TermError};
use crate::ns;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrefixError {
    #[error("unknown prefix {0:?}")]
    UnknownPrefix(String),
    #[error("{0:?} is not a prefixed name")]
    NotPrefixed(String),
    #[error(transparent)]
    Term(#[from] TermError),
}

/// Prefix label to namespace IRI bindings.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PrefixMap {
    bindings: BTreeMap<String, String>,
}

impl PrefixMap {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The hub's namespaces.
    pub fn builtin() -> Self {
        let mut map = Self::empty();
        for (prefix, ns) in [
            ("ssn", ns::ssn::NS),
            ("ssn-system", ns::ssn_system::NS),
            ("sosa", ns::sosa::NS),
            ("iot-lite", ns::iot_lite::NS),
            ("iot-taxonomy", ns::iot_taxonomy::NS),
            ("qu", ns::qu::NS),
            ("geo", ns::geo::NS),
            ("sf", ns::sf::NS),
            ("schema", ns::schema::NS),
            ("dul", ns::dul::NS),
            ("con", ns::con::NS),
            ("gdprtext", ns::gdprtext::NS),
            ("priv", ns::priv_::NS),
            ("rdf", ns::rdf::NS),
            ("rdfs", ns::rdfs::NS),
            ("owl", ns::owl::NS),
            ("xsd", ns::xsd::NS),
        ] {
            map.insert(prefix, ns);
        }
        map
    }

    pub fn insert(&mut self, prefix: impl Into<String>, namespace: impl Into<String>) {
        self.bindings.insert(prefix.into(), namespace.into());
    }

    pub fn get(&self, prefix: &str) -> Option<&str> {
        self.bindings.get(prefix).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Adds every binding of `other` that is not already bound here.
    pub fn merge_missing(&mut self, other: &PrefixMap) {
        for (k, v) in other.iter() {
            self.bindings.entry(k.to_string()).or_insert_with(|| v.to_string());
        }
    }

    /// Expands `prefix:local` to a full IRI.
    pub fn resolve(&self, prefixed_name: &str) -> Result<Iri, PrefixError> {
        let (prefix, local) = prefixed_name
            .split_once(':')
            .ok_or_else(|| PrefixError::NotPrefixed(prefixed_name.to_string()))?;
        let ns = self
            .get(prefix)
            .ok_or_else(|| PrefixError::UnknownPrefix(prefix.to_string()))?;
        Ok(Iri::new(format!("{ns}{local}"))?)
    }

    /// Shortens `iri` to `prefix:local` using the longest matching namespace,
    /// when the local part is safe to write unescaped.
    pub fn compact(&self, iri: &str) -> Option<String> {
        self.bindings
            .iter()
            .filter(|(_, ns)| iri.starts_with(ns.as_str()))
            .max_by_key(|(_, ns)| ns.len())
            .and_then(|(prefix, ns)| {
                let local = &iri[ns.len()..];
                is_safe_local(local).then(|| format!("{prefix}:{local}"))
            })
    }
}

/// Conservative subset of PN_LOCAL that needs no escaping.
fn is_safe_local(local: &str) -> bool {
    if local.is_empty() {
        return true;
    }
    let ok_chars = local
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'));
    ok_chars && !local.starts_with(['-', '.']) && !local.ends_with('.')
}

/// Resolves a prefixed name against `prefixes`.
pub fn resolve(prefixed_name: &str, prefixes: &PrefixMap) -> Result<Iri, PrefixError> {
    prefixes.resolve(prefixed_name)
}
