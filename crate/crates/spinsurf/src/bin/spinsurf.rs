use clap::Parser;
use spinsurf::cli::{run, Cli};
use spinsurf::error::exit;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors are validation failures; 2 is reserved for convergence
            std::process::exit(if e.use_stderr() {
                exit::VALIDATION
            } else {
                exit::OK
            });
        }
    };
    std::process::exit(run(cli));
}
