use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qsar_kernel::config::ModelSpec;
use qsar_kernel::csv_io::{read_dataset_path, read_descriptors_path, write_dataset_path};
use qsar_kernel::gram_io::{read_gram_path, write_gram_path};
use qsar_kernel::model_io::{load_model, save_model, SavedModel};
use qsar_kernel::parallel::gram_parallel;
use qsar_kernel::pipeline::{evaluate, prepare, run_prepared, train_model};
use qsar_kernel::{AppError, AppResult, ExperimentConfig};
use qsar_kernel_core::eval::class_counts;
use qsar_kernel_core::svm;

#[derive(Parser)]
#[command(name = "qsar-kernel", version, about = "Quantum-kernel QSAR classification experiments")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Only report errors.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Filter, label, split and scale a descriptor CSV into train.csv and test.csv.
    Preprocess {
        /// Descriptor CSV; defaults to the configured input.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Compute the Gram matrix of a configured model's kernel over a dataset CSV.
    Gram {
        #[arg(long)]
        model: String,
        #[arg(long)]
        input: PathBuf,
    },
    /// Train a configured model on a dataset CSV and write a model file.
    Train {
        #[arg(long)]
        model: String,
        #[arg(long)]
        input: PathBuf,
        /// Precomputed Gram matrix for SVM models.
        #[arg(long)]
        gram: Option<PathBuf>,
    },
    /// Score a model file on a dataset CSV.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
    },
    /// Run the full configured experiment and write the report.
    Run,
}

fn load_config(g: &Global) -> AppResult<ExperimentConfig> {
    let path = g
        .config
        .as_ref()
        .ok_or_else(|| AppError::invalid("config", "--config is required for this command"))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn out_dir(g: &Global) -> AppResult<PathBuf> {
    let dir = g.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| AppError::io("output", &dir, e))?;
    Ok(dir)
}

fn write_file(path: &Path, s: &str) -> AppResult<()> {
    fs::write(path, s).map_err(|e| AppError::io("output", path, e))
}

fn run(cli: Cli) -> AppResult<()> {
    let g = &cli.global;
    match cli.command {
        Command::Preprocess { input } => {
            let cfg = load_config(g)?;
            let path = input.unwrap_or_else(|| cfg.input_path());
            let data = prepare(&cfg, &read_descriptors_path(&path)?)?;
            let dir = out_dir(g)?;
            write_dataset_path(&dir.join("train.csv"), &data.train)?;
            write_dataset_path(&dir.join("test.csv"), &data.test)?;
            if !g.quiet {
                println!(
                    "train {} rows, test {} rows, {} dropped -> {}",
                    data.train.len(),
                    data.test.len(),
                    data.dropped.len(),
                    dir.display()
                );
            }
        }
        Command::Gram { model, input } => {
            let cfg = load_config(g)?;
            let ModelSpec::Svm { kernel, .. } = cfg.model(&model)? else {
                return Err(AppError::invalid("gram", format!("model '{model}' has no kernel")));
            };
            let ds = read_dataset_path(&input)?;
            let gram = gram_parallel(kernel, &ds.features, cfg.workers)?;
            let path = out_dir(g)?.join(format!("gram_{model}.txt"));
            write_gram_path(&path, &gram)?;
            if !g.quiet {
                println!("{}x{} gram -> {}", gram.size(), gram.size(), path.display());
            }
        }
        Command::Train { model, input, gram } => {
            let cfg = load_config(g)?;
            let spec = cfg.model(&model)?;
            let ds = read_dataset_path(&input)?;
            let saved = match (spec, gram) {
                (
                    ModelSpec::Svm {
                        kernel,
                        solver,
                        jitter,
                        ..
                    },
                    Some(gpath),
                ) => {
                    let mut gm = read_gram_path(&gpath)?;
                    if gm.kernel_config() != kernel {
                        return Err(AppError::invalid(
                            "train",
                            format!("gram kernel does not match model '{model}'"),
                        ));
                    }
                    if *jitter > 0.0 {
                        gm.add_diagonal_jitter(*jitter);
                    }
                    let m = svm::train(&gm, &ds.labels, &ds.features, solver)
                        .map_err(|e| AppError::from_core("train", e))?;
                    SavedModel::Svm(m)
                }
                (_, Some(_)) => {
                    return Err(AppError::invalid("train", "--gram only applies to svm models"))
                }
                (spec, None) => train_model(spec, &ds, &vec![None; ds.len()], &cfg)?,
            };
            let path = out_dir(g)?.join(format!("{model}.model"));
            save_model(&path, &saved)?;
            if !g.quiet {
                println!("trained {model} on {} rows -> {}", ds.len(), path.display());
            }
        }
        Command::Eval { model, input } => {
            let m = load_model(&model)?;
            let ds = read_dataset_path(&input)?;
            let acc = evaluate(&m, &ds)?;
            let (pos, neg) = class_counts(&ds.labels);
            let line = format!(
                "{{\"n\":{},\"active\":{},\"inactive\":{},\"acc\":{}}}",
                ds.len(),
                pos,
                neg,
                acc
            );
            if let Some(dir) = &g.out {
                fs::create_dir_all(dir).map_err(|e| AppError::io("output", dir, e))?;
                write_file(&dir.join("metrics.json"), &format!("{line}\n"))?;
            }
            if !g.quiet {
                println!("{line}");
            }
        }
        Command::Run => {
            let cfg = load_config(g)?;
            let data = prepare(&cfg, &read_descriptors_path(&cfg.input_path())?)?;
            let report = run_prepared(&cfg, &data)?;
            let dir = out_dir(g)?;
            let text = report.to_text();
            write_file(&dir.join("report.txt"), &text)?;
            write_file(&dir.join("report.jsonl"), &report.to_json_lines())?;
            if !g.quiet {
                print!("{text}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.global.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
