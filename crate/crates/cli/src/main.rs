use clap::Parser;

fn main() {
    let cli = match inharmo_cli::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { inharmo_cli::EXIT_FATAL } else { inharmo_cli::EXIT_OK };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    std::process::exit(inharmo_cli::run(cli));
}
