use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand, ValueEnum};
use privgraph::consent::RequestStatus;
use privgraph::query::AugmentationMode;
use privgraph::rdf::Iri;
use privgraph::store::Role;
use privgraph::validator::has_errors;

use crate::clock::SystemClock;
use crate::config::{Config, PORT_ENV};
use crate::hub::{finding_json, parse_iri, Hub, HubError, IngestTarget, PolicyRequest};

#[derive(Debug, Parser)]
#[command(name = "privgraph", version, about = "Consent-aware semantic IoT data hub")]
pub struct Cli {
    /// Configuration file (key = value lines).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Snapshot file; overrides `data_path` from the configuration.
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP service.
    Serve,
    /// Load a Turtle document into one graph.
    Ingest {
        file: PathBuf,
        #[arg(long)]
        graph: IngestTarget,
        #[command(flatten)]
        who: As,
    },
    /// Run a query file on behalf of a user.
    Query {
        file: PathBuf,
        #[command(flatten)]
        who: As,
        #[arg(long)]
        mode: Option<AugmentationMode>,
        /// Print the rewritten query instead of running it.
        #[arg(long)]
        explain: bool,
    },
    /// Register a consenting and/or allowed party.
    Party {
        iri: String,
        #[arg(long = "role", required = true)]
        roles: Vec<PartyRole>,
        #[command(flatten)]
        who: As,
    },
    /// Record `owner` as the owner of the given subjects.
    Own {
        owner: String,
        #[arg(required = true)]
        subjects: Vec<String>,
        #[command(flatten)]
        who: As,
    },
    /// Declare what the user intends to do with data.
    Interest {
        #[arg(long)]
        action: String,
        #[arg(long)]
        purpose: String,
        #[command(flatten)]
        who: As,
    },
    /// Ask for access to resources or properties.
    Request {
        #[arg(long)]
        action: String,
        #[arg(long)]
        purpose: String,
        #[arg(required = true)]
        targets: Vec<String>,
        #[command(flatten)]
        who: As,
    },
    #[command(subcommand)]
    Consent(ConsentCommand),
    #[command(subcommand)]
    Policy(PolicyCommand),
    /// Lint the vocabulary and the stored data. Exits 1 if any finding is an error.
    Lint {
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Write the store as N-Quads.
    Snapshot { out: PathBuf },
    /// Replace the store with an N-Quads snapshot.
    Restore { input: PathBuf },
    #[command(subcommand)]
    Vocab(VocabCommand),
}

#[derive(Debug, Subcommand)]
pub enum ConsentCommand {
    List {
        #[arg(long)]
        status: Option<StatusArg>,
        #[command(flatten)]
        who: As,
    },
    Grant {
        request: String,
        #[arg(long)]
        expires: DateTime<Utc>,
        #[command(flatten)]
        who: As,
    },
    Deny {
        request: String,
        #[command(flatten)]
        who: As,
    },
    Revoke {
        permission: String,
        #[command(flatten)]
        who: As,
    },
}

#[derive(Debug, Subcommand)]
pub enum PolicyCommand {
    Set {
        #[arg(long)]
        action: String,
        #[arg(long)]
        purpose: String,
        #[arg(long = "target", required = true)]
        targets: Vec<String>,
        /// Lifetime of the permissions the policy grants, in seconds.
        #[arg(long)]
        expires_in: i64,
        #[arg(long)]
        future_parties: bool,
        #[command(flatten)]
        who: As,
    },
}

#[derive(Debug, Subcommand)]
pub enum VocabCommand {
    /// Print the vocabulary as Turtle.
    Export {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct As {
    /// Acting user; defaults to the configured controller.
    #[arg(long = "as")]
    pub user: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PartyRole {
    ConsentingParty,
    AllowedParty,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StatusArg {
    Pending,
    Granted,
    Denied,
    Expired,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Hub(#[from] HubError),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn load_config(cli: &Cli) -> Result<Config, CliError> {
    let mut config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    config = config.with_env(std::env::var(PORT_ENV).ok().as_deref())?;
    if let Some(data) = &cli.data {
        config.data_path = Some(data.clone());
    }
    Ok(config)
}

fn user(hub: &Hub, who: &As) -> Result<Option<Iri>, CliError> {
    match &who.user {
        Some(u) => Ok(Some(parse_iri(u)?)),
        None => Ok(hub.config().controller.clone()),
    }
}

fn json_line(out: &mut dyn Write, value: &impl serde::Serialize) {
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(value).expect("serializable"));
}

/// Runs one command against an opened hub and returns the exit code.
pub fn execute(hub: &Hub, command: Command, out: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Serve => unreachable!("serve is handled by the binary"),
        Command::Ingest { file, graph, who } => {
            let u = user(hub, &who)?;
            let report = hub.ingest(u.as_ref(), graph, &read(&file)?)?;
            hub.persist()?;
            json_line(out, &report);
        }
        Command::Query { file, who, mode, explain } => {
            let u = user(hub, &who)?;
            let text = read(&file)?;
            if explain {
                let _ = writeln!(out, "{}", hub.augmented_query(u.as_ref(), &text)?);
            } else {
                let rs = hub.query(u.as_ref(), &text, mode)?;
                json_line(out, &rs.to_json());
            }
        }
        Command::Party { iri, roles, who } => {
            let u = user(hub, &who)?;
            let roles: Vec<Role> = roles
                .iter()
                .map(|r| match r {
                    PartyRole::ConsentingParty => Role::ConsentingParty,
                    PartyRole::AllowedParty => Role::AllowedParty,
                })
                .collect();
            hub.register_party(u.as_ref(), &parse_iri(&iri)?, &roles)?;
            hub.persist()?;
        }
        Command::Own { owner, subjects, who } => {
            let u = user(hub, &who)?;
            let subjects = subjects.iter().map(|s| parse_iri(s)).collect::<Result<_, _>>()?;
            let n = hub.declare_ownership(u.as_ref(), &parse_iri(&owner)?, &subjects)?;
            hub.persist()?;
            let _ = writeln!(out, "{n} ownership link(s) written");
        }
        Command::Interest { action, purpose, who } => {
            let u = user(hub, &who)?;
            hub.register_interest(u.as_ref(), &action, &purpose)?;
            hub.persist()?;
        }
        Command::Request { action, purpose, targets, who } => {
            let u = user(hub, &who)?;
            let outcome = hub.request_access(u.as_ref(), &action, &purpose, &targets)?;
            hub.persist()?;
            json_line(out, &outcome);
        }
        Command::Consent(c) => consent(hub, c, out)?,
        Command::Policy(PolicyCommand::Set {
            action,
            purpose,
            targets,
            expires_in,
            future_parties,
            who,
        }) => {
            let u = user(hub, &who)?;
            let req = PolicyRequest {
                action,
                purpose,
                targets,
                expires_in_secs: expires_in,
                future_parties,
            };
            let rule = hub.set_policy(u.as_ref(), &req)?;
            hub.persist()?;
            json_line(out, &rule);
        }
        Command::Lint { format } => {
            let findings = hub.lint();
            match format {
                Format::Json => {
                    let items: Vec<_> = findings.iter().map(finding_json).collect();
                    json_line(out, &items);
                }
                Format::Text => {
                    for f in &findings {
                        let _ = writeln!(out, "{f}");
                    }
                }
            }
            return Ok(i32::from(has_errors(&findings)));
        }
        Command::Snapshot { out: path } => hub.snapshot_to(&path)?,
        Command::Restore { input } => {
            hub.restore_from(&input)?;
            hub.persist()?;
        }
        Command::Vocab(VocabCommand::Export { out: path }) => {
            let text = hub.vocabulary_turtle();
            match path {
                Some(p) => write(&p, &text)?,
                None => {
                    let _ = write!(out, "{text}");
                }
            }
        }
    }
    Ok(0)
}

fn consent(hub: &Hub, command: ConsentCommand, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        ConsentCommand::List { status, who } => {
            let u = user(hub, &who)?;
            let status = status.map(|s| match s {
                StatusArg::Pending => RequestStatus::Pending,
                StatusArg::Granted => RequestStatus::Granted,
                StatusArg::Denied => RequestStatus::Denied,
                StatusArg::Expired => RequestStatus::Expired,
            });
            json_line(out, &hub.consent_requests(u.as_ref(), status)?);
        }
        ConsentCommand::Grant { request, expires, who } => {
            let u = user(hub, &who)?;
            let perm = hub.grant(u.as_ref(), &request, expires)?;
            hub.persist()?;
            json_line(out, &perm);
        }
        ConsentCommand::Deny { request, who } => {
            let u = user(hub, &who)?;
            json_line(out, &hub.deny(u.as_ref(), &request)?);
            hub.persist()?;
        }
        ConsentCommand::Revoke { permission, who } => {
            let u = user(hub, &who)?;
            hub.revoke(u.as_ref(), &permission)?;
            hub.persist()?;
        }
    }
    Ok(())
}

pub fn open(config: Config) -> Result<Arc<Hub>, CliError> {
    Ok(Arc::new(Hub::open(config, Arc::new(SystemClock))?))
}
