use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gdakit::pipeline::commands::{cmd_ingest, cmd_reduce, cmd_report, cmd_run, cmd_train_eval};
use gdakit::pipeline::{PipelineConfig, RunReport};
use gdakit::Result;

/// Discriminant-analysis feature reduction and classification pipeline.
#[derive(Parser)]
#[command(name = "gdakit", version)]
struct Cli {
    /// Pipeline config (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for subsampling and network initialization.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides `paths.out`).
    #[arg(long, global = true, env = "GDAKIT_OUT")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, label and encode the train/test files.
    Ingest,
    /// Fit the configured reducer and write the reduced datasets.
    Reduce,
    /// Train the classifier on reduced data and write the run report.
    TrainEval,
    /// ingest, reduce and train-eval in sequence.
    Run,
    /// Compare run reports: SVG charts plus a summary CSV.
    Report {
        /// `report.json` files from `train-eval`.
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::from_file(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    Ok(cfg)
}

fn print_report(r: &RunReport) {
    println!("variant {}  dataset {}  accuracy {}", r.variant, r.dataset, fmt(r.accuracy.map(|a| a * 100.0)));
    println!("{:<8} {:>8} {:>12} {:>12}", "class", "DR", "FAR_tabular", "FAR_textual");
    for c in &r.classes {
        println!(
            "{:<8} {:>8} {:>12} {:>12}",
            c.class,
            fmt(c.detection_rate),
            fmt(c.far_tabular),
            fmt(c.far_textual)
        );
    }
    println!(
        "train {:.3}s  test {:.3}s",
        r.timings.classifier_train_s, r.timings.classifier_test_s
    );
}

fn fmt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.2}"))
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Ingest => {
            let cfg = load_config(cli)?;
            let s = cmd_ingest(&cfg)?;
            println!("{:<8} {:>10} {:>10}", "category", "train", "test");
            for (i, name) in s.categories.iter().enumerate() {
                println!("{name:<8} {:>10} {:>10}", s.train_histogram[i], s.test_histogram[i]);
            }
            println!(
                "encoded width {} from {} features; kept train {} / test {} rows",
                s.encoded_width,
                s.features,
                s.train_class_sizes.iter().sum::<usize>(),
                s.test_class_sizes.iter().sum::<usize>()
            );
        }
        Command::Reduce => {
            let cfg = load_config(cli)?;
            let s = cmd_reduce(&cfg)?;
            println!(
                "{}: {} -> {} columns ({} features in)",
                s.dataset, s.input_width, s.output_width, s.input_features
            );
            if !s.eigenvalues.is_empty() {
                println!("eigenvalues {:?}", s.eigenvalues);
            }
            for f in &s.ranked_features {
                println!("  {:<28} {:.6e}", f.name, f.score);
            }
        }
        Command::TrainEval => print_report(&cmd_train_eval(&load_config(cli)?)?),
        Command::Run => print_report(&cmd_run(&load_config(cli)?)?),
        Command::Report { reports } => {
            let out = match &cli.out {
                Some(o) => o.clone(),
                None => load_config(cli)?.out,
            };
            for p in cmd_report(reports, &out)? {
                println!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.kind().exit_code() as u8)
        }
    }
}
