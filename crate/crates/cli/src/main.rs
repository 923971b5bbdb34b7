use clap::Parser;
use pickbatch::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(_) => {}
        Err(e) => {
            eprintln!("{}", e.to_stderr_json());
            std::process::exit(e.exit_code());
        }
    }
}
