use clap::Parser;
use spm_eis::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((written, table)) => {
            if let Some(t) = table {
                print!("{t}");
            }
            for p in written {
                eprintln!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
