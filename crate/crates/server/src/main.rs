use std::process::ExitCode;

use clap::Parser;
use privgraph_server::cli::{self, Cli, Command};
use privgraph_server::http;

fn main() -> ExitCode {
    let args = Cli::parse();
    match run(args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(args: Cli) -> Result<i32, Box<dyn std::error::Error>> {
    let config = cli::load_config(&args)?;
    let hub = cli::open(config)?;
    if let Command::Serve = args.command {
        let rt = tokio::runtime::Runtime::new()?;
        eprintln!("listening on {}", hub.config().listen);
        rt.block_on(http::serve(hub))?;
        return Ok(0);
    }
    let mut out = std::io::stdout().lock();
    Ok(cli::execute(&hub, args.command, &mut out)?)
}
