//! TOML configuration: one table per subcommand, keyed by its name, with the
//! same keys as the long flags. Values given on the command line win.

use clap::CommandFactory;
use serde::de::DeserializeOwned;

use crate::args::{Cli, Command};
use crate::commands::Failure;

pub fn apply(cli: Cli) -> Result<Command, Failure> {
    let Some(path) = cli.config else {
        return Ok(cli.command);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Failure::Input(format!("cannot read config {}: {e}", path.display())))?;
    let mut table: toml::Table =
        toml::from_str(&text).map_err(|e| Failure::Input(format!("config {}: {e}", path.display())))?;
    let name = cli.command.name();
    if let Some(other) = table.keys().find(|k| !is_command(k)) {
        return Err(Failure::Input(format!("config: unknown table `{other}`")));
    }
    let section = table
        .remove(name)
        .unwrap_or_else(|| toml::Value::Table(Default::default()));
    check_keys(name, &section)?;
    Ok(match cli.command {
        Command::CheckType(mut a) => {
            a.merge(section_as(name, section)?);
            Command::CheckType(a)
        }
        Command::Trace(mut a) => {
            a.merge(section_as(name, section)?);
            Command::Trace(a)
        }
        Command::Transport(mut a) => {
            a.merge(section_as(name, section)?);
            Command::Transport(a)
        }
        Command::Gauge(mut a) => {
            a.merge(section_as(name, section)?);
            Command::Gauge(a)
        }
        Command::Synth(mut a) => {
            a.merge(section_as(name, section)?);
            Command::Synth(a)
        }
        Command::Estimate(mut a) => {
            a.merge(section_as(name, section)?);
            Command::Estimate(a)
        }
        Command::Compare(mut a) => {
            a.merge(section_as(name, section)?);
            Command::Compare(a)
        }
    })
}

fn is_command(name: &str) -> bool {
    matches!(
        name,
        "check-type" | "trace" | "transport" | "gauge" | "synth" | "estimate" | "compare"
    )
}

/// Keys must be long flags of the subcommand (serde's own unknown-field check
/// does not work through flattened argument groups).
fn check_keys(name: &str, section: &toml::Value) -> Result<(), Failure> {
    let toml::Value::Table(t) = section else {
        return Err(Failure::Input(format!("config: `{name}` must be a table")));
    };
    let cmd = Cli::command();
    let sub = cmd.find_subcommand(name).expect("known subcommand");
    for key in t.keys() {
        let known = sub
            .get_arguments()
            .any(|a| a.get_long() == Some(key.as_str()) && key != "config");
        if !known {
            return Err(Failure::Input(format!("config [{name}]: unknown key `{key}`")));
        }
    }
    Ok(())
}

fn section_as<T: DeserializeOwned>(name: &str, v: toml::Value) -> Result<T, Failure> {
    v.try_into()
        .map_err(|e| Failure::Input(format!("config [{name}]: {e}")))
}
