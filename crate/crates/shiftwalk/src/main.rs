use std::process::ExitCode;

fn main() -> ExitCode {
    match shiftwalk::cli::run(std::env::args().collect()) {
        Ok(outcome) => {
            for a in &outcome.artifacts {
                println!("{}", outcome.out.join(a).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("shiftwalk: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
