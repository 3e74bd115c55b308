use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use tardis::cli::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let quiet = cli.quiet;
    let result = cli.command.into_config().and_then(|cfg| tardis::execute(&cfg, !quiet));
    match result {
        Ok(summary) => {
            print!("{}", summary.stdout);
            let _ = std::io::stdout().flush();
            if !quiet {
                for path in &summary.outputs {
                    eprintln!("wrote {}", path.display());
                }
                if summary.failed > 0 {
                    eprintln!("{} of {} points failed; see the failure column", summary.failed, summary.failed + summary.processed);
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
