use clap::Parser;
use kwg_cli::{invoke, Cli, ErrorRecord, EXIT_CONFIG};

fn main() {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            let rec = ErrorRecord {
                status: "error",
                exit_code: EXIT_CONFIG,
                kind: "config",
                message: format!("thread pool: {e}"),
                line: None,
            };
            eprintln!("{}", rec.to_json());
            std::process::exit(EXIT_CONFIG);
        }
    }
    let inv = invoke(&cli, std::env::vars());
    print!("{}", inv.stdout);
    if let Some(rec) = &inv.error {
        eprintln!("{}", rec.to_json());
    }
    std::process::exit(inv.exit_code);
}
