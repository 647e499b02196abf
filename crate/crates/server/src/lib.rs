//! HTTP service and command line for the privgraph hub.

pub mod cli;
pub mod clock;
pub mod config;
pub mod http;
pub mod hub;

pub use clock::{Clock, ManualClock, SystemClock};
pub use config::Config;
pub use hub::{Hub, HubError, IngestTarget};
