use clap::Parser;
use erkn_wave_cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = execute(&cli) {
        eprintln!("erkn-wave: {e}");
        std::process::exit(e.exit_code());
    }
}
