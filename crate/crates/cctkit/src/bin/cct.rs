use clap::error::ErrorKind;
use clap::Parser;

fn main() {
    // Usage problems exit 1 like validation failures; only help and
    // version requests are a successful exit.
    let cli = match cctkit::cli::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = cctkit::cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
