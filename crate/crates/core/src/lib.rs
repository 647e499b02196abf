pub mod ns;
pub mod rdf;
pub mod vocab;
pub mod store;
pub mod consent;
pub mod query;
pub mod fixtures;
pub mod validator;
