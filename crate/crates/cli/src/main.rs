use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use flasep::attention::{AttentionKind, AttentionMode};
use flasep::bench::{self, BenchConfig, Cell};
use flasep::checks::gradient_checks;
use flasep::sepnet::io::{load_model, read_pcm_f32, save_model, write_pcm_f32};
use flasep::sepnet::{evaluate, synth_dataset, train, SepNetConfig, TrainOptions};

#[derive(Parser)]
#[command(
    name = "flasep",
    version,
    about = "Focused linear attention for toy speech separation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Forward-pass scaling benchmark.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Overfit the toy separator on synthetic two-speaker mixtures.
    TrainToy(TrainArgs),
    /// Separate a raw f32 mixture into two sources.
    Separate(SeparateArgs),
    /// Compare tape gradients against central differences.
    Gradcheck {
        #[arg(long, default_value = "tiny")]
        config: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Time every (mode, N) cell and write CSV.
    Run(RunArgs),
    /// Refit time exponents from an existing CSV.
    Slope {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_delimiter = ',', default_value = "softmax,vla,fla")]
    modes: Vec<AttentionKind>,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "1024,2048,4096,8192,16384,32768,65536"
    )]
    lens: Vec<usize>,
    #[arg(long, default_value_t = 32)]
    dim: usize,
    #[arg(long, default_value_t = 4)]
    heads: usize,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Live-element cap per cell; 0 disables it.
    #[arg(long, default_value_t = bench::DEFAULT_MEMORY_LIMIT)]
    max_elements: usize,
    /// Benchmark the attention blocks without the gate.
    #[arg(long)]
    no_gate: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, default_value_t = 4)]
    items: usize,
    #[arg(long, default_value_t = 3000)]
    steps: usize,
    #[arg(long, default_value_t = 0.1)]
    lr: f64,
    #[arg(long, default_value_t = 8000)]
    len: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    no_gate: bool,
    #[arg(long, default_value_t = 100)]
    log_every: usize,
    /// Write the per-step loss history here, one value per line.
    #[arg(long)]
    history: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SeparateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out1: PathBuf,
    #[arg(long)]
    out2: PathBuf,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Bench(BenchCommand::Run(args)) => bench_run(args),
        Command::Bench(BenchCommand::Slope { input }) => {
            let text = fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let rows = bench::parse_csv(&text)?;
            for (mode, fit) in bench::summary_rows(&rows) {
                let name = mode_label(mode);
                match fit {
                    Some(f) => println!("{name},SLOPE,{:.4},{:.4}", f.exponent, f.r2),
                    None => println!("{name},SLOPE,NA,NA"),
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::TrainToy(args) => train_toy(args),
        Command::Separate(args) => separate(args),
        Command::Gradcheck { config, seed } => {
            if config != "tiny" {
                bail!("unknown gradcheck config {config:?} (only \"tiny\" is available)");
            }
            let mut ok = true;
            for c in gradient_checks(seed)? {
                let verdict = if c.passed() { "ok" } else { "FAIL" };
                println!(
                    "{verdict:4} {:<45} {:.3e} (tol {:.0e})",
                    c.name, c.max_rel_error, c.tolerance
                );
                ok &= c.passed();
            }
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}

fn mode_label(mode: AttentionMode) -> String {
    if mode.gated {
        mode.kind.name().to_string()
    } else {
        format!("{}-nogate", mode.kind.name())
    }
}

fn bench_run(args: RunArgs) -> Result<ExitCode> {
    let config = BenchConfig {
        modes: args
            .modes
            .iter()
            .map(|&kind| AttentionMode {
                kind,
                gated: !args.no_gate,
            })
            .collect(),
        lengths: args.lens,
        dim: args.dim,
        heads: args.heads,
        reps: args.reps,
        seed: args.seed,
        memory_limit: (args.max_elements > 0).then_some(args.max_elements),
    };
    let result = bench::run_suite(&config, |cell| match cell {
        Cell::Ok(r) => eprintln!(
            "{:<10} N={:<6} {:.4e} s  peak {} elements",
            mode_label(r.mode),
            r.n,
            r.median_seconds,
            r.peak_elements
        ),
        Cell::Failed {
            mode, n, reason, ..
        } => eprintln!("{:<10} N={n:<6} FAILED: {reason}", mode_label(*mode)),
    })?;
    let csv = bench::write_csv(&result);
    match &args.out {
        Some(path) => {
            fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{csv}"),
    }
    Ok(if result.all_ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn train_toy(args: TrainArgs) -> Result<ExitCode> {
    let config = SepNetConfig {
        gated: !args.no_gate,
        ..SepNetConfig::toy()
    };
    let dataset = synth_dataset(args.items, args.len, config.sample_rate);
    let options = TrainOptions {
        seed: args.seed,
        ..TrainOptions::default()
    };
    let log_every = args.log_every.max(1);
    let (net, history) = train(
        config,
        &dataset,
        args.steps,
        args.lr,
        &options,
        |step, loss| {
            if step % log_every == 0 {
                eprintln!("step {step:>5}  loss {loss:.4}");
            }
        },
    )?;
    let improvement = evaluate(&net, &dataset)?;
    println!(
        "initial loss {:.4}, final loss {:.4}, training-set SI-SNRi {improvement:.2} dB",
        history[0],
        history[history.len() - 1]
    );
    save_model(&net, &args.out)?;
    if let Some(path) = &args.history {
        let text: String = history.iter().map(|l| format!("{l}\n")).collect();
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn separate(args: SeparateArgs) -> Result<ExitCode> {
    let net = load_model(&args.model)?;
    let bytes =
        fs::read(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let mixture = read_pcm_f32(&bytes)?;
    let [a, b] = net.separate(&mixture)?;
    fs::write(&args.out1, write_pcm_f32(&a))
        .with_context(|| format!("writing {}", args.out1.display()))?;
    fs::write(&args.out2, write_pcm_f32(&b))
        .with_context(|| format!("writing {}", args.out2.display()))?;
    Ok(ExitCode::SUCCESS)
}
