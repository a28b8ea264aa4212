//! Stand-in servers for the classifier and external-model protocols, reading
//! requests on stdin and answering on stdout.

use std::io::{self, BufWriter};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sentitrade::models::external::{knn_predictor, serve_model};
use sentitrade::sentiment::protocol::{serve_with, ServeMode};
use sentitrade::sentiment::{Lexicon, Polarity, SentimentLabel};

#[derive(Parser)]
#[command(name = "protocol-stub", about = "Protocol conformance stub servers")]
struct Args {
    #[command(subcommand)]
    server: Server,
}

#[derive(Subcommand)]
enum Server {
    /// Sentiment classifier server.
    Classifier {
        #[arg(long, value_enum, default_value = "lexicon")]
        mode: Mode,
    },
    /// Regression server predicting the mean target of the nearest rows.
    Model {
        #[arg(long, default_value_t = 5)]
        k: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    /// Label with the built-in lexicon.
    Lexicon,
    /// Label everything neutral.
    Neutral,
    /// Lexicon labels, each batch answered in reverse order.
    Shuffle,
    /// Lexicon labels with the last answer of every batch missing.
    Drop,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let stdin = io::stdin().lock();
    let stdout = BufWriter::new(io::stdout().lock());
    let result = match args.server {
        Server::Classifier { mode } => {
            let lex = Lexicon::builtin();
            let serve_mode = match mode {
                Mode::Shuffle => ServeMode::Reversed,
                Mode::Drop => ServeMode::DropLast,
                _ => ServeMode::InOrder,
            };
            serve_with(
                stdin,
                stdout,
                |req| match mode {
                    Mode::Neutral => SentimentLabel::new(Polarity::Neutral),
                    _ => lex.classify(&req.text),
                },
                serve_mode,
            )
        }
        Server::Model { k } => serve_model(stdin, stdout, |_, rows, target| {
            if rows.is_empty() {
                return Err("no training rows".to_string());
            }
            Ok(knn_predictor(rows.to_vec(), target.to_vec(), k))
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("protocol-stub: {e}");
            ExitCode::from(4)
        }
    }
}
