use std::path::PathBuf;
use std::process::ExitCode;

use bfcalc::cli::{execute, render, run_document, Op};
use bfcalc::doc::Document;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "bfcalc", version, about = "Bordered Floer algebra and CLF calculus over GF(2)")]
struct Cli {
    /// Document holding the declarations that commands refer to.
    #[arg(short, long, global = true)]
    file: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text", global = true)]
    format: Format,
    /// Worker threads; reports do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Top,
}

#[derive(Debug, Subcommand)]
enum Top {
    /// Executes every RUN line of a document.
    Run { file: PathBuf },
    #[command(flatten)]
    Op(Op),
}

fn load(path: &PathBuf) -> Result<Document, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Document::parse(&text).map_err(|e| format!("{}:{e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let (reports, status) = match &cli.cmd {
        Top::Run { file } => match load(file) {
            Ok(doc) => run_document(&doc),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        Top::Op(op) => {
            let Some(path) = &cli.file else {
                eprintln!("error: this command needs --file");
                return ExitCode::from(2);
            };
            let doc = match load(path) {
                Ok(d) => d,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let r = execute(&doc, op);
            let s = r.status;
            (vec![r], s)
        }
    };
    print!("{}", render(&reports, status, matches!(cli.format, Format::Json)));
    ExitCode::from(status.exit_code() as u8)
}
