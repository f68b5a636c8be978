use clap::Parser;

use synrep::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error[{}]: {e}", e.code());
        std::process::exit(1);
    }
}
