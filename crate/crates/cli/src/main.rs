use clap::Parser;
use ume_cli::commands::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("ume: {e}");
        std::process::exit(e.exit_code());
    }
}
