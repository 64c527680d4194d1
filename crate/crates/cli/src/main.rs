mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Settings;

/// Hierarchical flow-based intrusion detection.
#[derive(Parser, Debug)]
#[command(name = "hids", version)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Report format printed to stdout.
    #[arg(long, global = true, value_parser = ["table", "kv"])]
    format: Option<String>,
    /// Override any config key, e.g. `--set stage3.tree_count=10`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Concatenate CSVs, drop marker rows and constant features.
    Clean {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// `auto`, `cicids`, `none`, or a comma-separated list of names.
        #[arg(long)]
        constant_features: Option<String>,
    },
    /// Split a cleaned CSV into train.csv and test.csv.
    Split {
        input: PathBuf,
        /// `table2` or a split-spec file.
        #[arg(long)]
        spec: Option<String>,
        #[arg(long, value_parser = ["first", "random"])]
        train_policy: Option<String>,
        #[arg(long, value_parser = ["first", "random"])]
        test_policy: Option<String>,
    },
    /// Train the three-stage model.
    Train {
        input: PathBuf,
        /// Label space of the final stage.
        #[arg(long, value_parser = ["fine", "category"])]
        stage3_view: Option<String>,
    },
    /// Score a trained model on a labelled CSV.
    Evaluate {
        model: PathBuf,
        input: PathBuf,
        /// Include wall-clock times in the written reports.
        #[arg(long)]
        timing: bool,
    },
    /// Append stage outputs and the final label to each row.
    Predict { model: PathBuf, input: PathBuf },
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Config(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Config(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<hids_core::Error> for CliError {
    fn from(e: hids_core::Error) -> Self {
        use hids_core::Error as E;
        let msg = e.to_string();
        match e.root() {
            E::InvalidParam(_) | E::UnknownLearner(_) => CliError::Config(msg),
            E::ZeroCounts | E::NoSplit(_) | E::DeadRefinement | E::NoPositives | E::Undefined(_) => {
                CliError::Internal(msg)
            }
            _ => CliError::Input(msg),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut settings = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            Settings::from_toml(&text, path)?
        }
        None => Settings::default(),
    };
    for o in &cli.overrides {
        settings.apply_override(o)?;
    }
    if let Some(s) = cli.seed {
        settings.set("seed", s.to_string());
    }
    if let Some(t) = cli.threads {
        settings.set("threads", t.to_string());
    }
    if let Some(d) = &cli.out_dir {
        settings.set("out_dir", d.to_string_lossy());
    }
    if let Some(f) = &cli.format {
        settings.set("format", f.as_str());
    }
    match &cli.command {
        Command::Clean {
            constant_features: Some(c),
            ..
        } => settings.set("clean.constant_features", c.as_str()),
        Command::Split {
            spec,
            train_policy,
            test_policy,
            ..
        } => {
            if let Some(s) = spec {
                settings.set("split.spec", s.as_str());
            }
            if let Some(p) = train_policy {
                settings.set("split.train_policy", p.as_str());
            }
            if let Some(p) = test_policy {
                settings.set("split.test_policy", p.as_str());
            }
        }
        Command::Train {
            stage3_view: Some(v), ..
        } => settings.set("stage3.view", v.as_str()),
        Command::Evaluate { timing: true, .. } => settings.set("timing", "true"),
        _ => {}
    }
    let config = settings.into_config()?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Internal(e.to_string()))?;

    pool.install(|| match &cli.command {
        Command::Clean { inputs, .. } => commands::clean(&config, inputs),
        Command::Split { input, .. } => commands::split(&config, input),
        Command::Train { input, .. } => commands::train(&config, input),
        Command::Evaluate { model, input, .. } => commands::evaluate(&config, model, input),
        Command::Predict { model, input } => commands::predict(&config, model, input),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hids: {e}");
            ExitCode::from(e.code())
        }
    }
}
