use std::io::{IsTerminal, Read};
use std::process::ExitCode;

use clap::Parser;
use twistroot::cli::{run, Cli, InputMode};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let input = match read_input(&cli) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let outcome = run(&cli, input.as_deref());
    let text = serde_json::to_string_pretty(&outcome.body).expect("serializable") + "\n";
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if outcome.code != 0 {
        if let Some(detail) = outcome.body.get("detail").or_else(|| outcome.body.get("error")) {
            eprintln!("error: {}", detail.as_str().unwrap_or_default());
        }
    }
    ExitCode::from(outcome.code as u8)
}

fn read_input(cli: &Cli) -> std::io::Result<Option<String>> {
    if let Some(path) = &cli.input {
        return std::fs::read_to_string(path).map(Some);
    }
    let stdin = std::io::stdin();
    if cli.command.input_mode() == InputMode::None || stdin.is_terminal() {
        return Ok(None);
    }
    let mut s = String::new();
    stdin.lock().read_to_string(&mut s)?;
    Ok(Some(s))
}
