//! RDF terms, quads, the indexed dataset and the Turtle / N-Quads codecs.

mod dataset;
pub mod lexer;
mod nquads;
mod prefix;
mod term;
mod turtle;

pub use dataset::Dataset;
pub use lexer::{Position, SyntaxError};
pub use nquads::{parse_nquads, quad_to_nquad, serialize_nquads, NQuadsError};
pub use prefix::{resolve, PrefixError, PrefixMap};
pub use term::{parse_date_time, GraphId, Iri, Literal, Quad, Term, TermError, Value};
pub use turtle::{parse_turtle, parse_turtle_with_prefixes, serialize_turtle, TurtleError};

