use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wgqed_cli::{config, preset, preset_description, PRESETS};

#[derive(Parser)]
#[command(name = "wgqed", version, about = "Photon correlations of emitters coupled to a waveguide")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config (TOML, or a previous summary.json)
    Run {
        config: PathBuf,
        /// Output directory, overriding output.dir
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads, 0 = one per core
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print the config JSON schema
    Schema,
    /// List bundled presets, or print one
    Presets { name: Option<String> },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Schema => println!("{}", config::schema_json()),
        Command::Presets { name: None } => {
            for (name, text) in PRESETS {
                println!("{name:<22} {}", preset_description(text));
            }
        }
        Command::Presets { name: Some(n) } => match preset(&n) {
            Some(text) => print!("{text}"),
            None => {
                eprintln!("no preset named {n}; `wgqed presets` lists them");
                return ExitCode::from(2);
            }
        },
        Command::Run { config: path, out, threads } => {
            let result = config::load(&path).and_then(|l| wgqed_cli::run(&l, out.as_deref(), threads));
            match result {
                Ok((dir, _)) => println!("wrote {}", dir.display()),
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(e.exit_code() as u8);
                }
            }
        }
    }
    ExitCode::SUCCESS
}
