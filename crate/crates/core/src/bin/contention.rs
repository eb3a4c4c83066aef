use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use contention_core::channel::ChannelModel;
use contention_core::codebook::{CodebookBuilder, DEFAULT_EPSILON, DEFAULT_MAX_ENTRIES};
use contention_core::oracles::discrete_exact_delay;
use contention_core::report::{
    codebook_json, write_codebook_csv, write_json_line, write_rows_csv, BatchRow, Provenance,
    TraceLine,
};
use contention_core::sim::{for_each_slot, run_batch, BatchConfig, DEFAULT_MAX_MINISLOTS};
use contention_core::strategy::StrategyKind;
use contention_core::svg::{line_chart, Series};
use contention_core::verify::{run_all, VerifyConfig};
use contention_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "contention",
    version,
    about = "Threshold codes and simulations for opportunistic contention resolution"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the MPA code for N users and write its entries.
    Codebook(CodebookArgs),
    /// Simulated OSA and MPA delays with exact MPA delay and entropy, per N.
    Sweep(SweepArgs),
    /// Run one strategy on one channel.
    Simulate(SimulateArgs),
    /// The constant three-user and correlated discrete examples.
    Example(ExampleArgs),
    /// Run the acceptance checks; exits nonzero if any fails.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Serialize)]
struct Output {
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct Batch {
    /// Slots per simulated batch.
    #[arg(long, default_value_t = 1_000_000)]
    slots: u64,
    /// Minislot budget K per slot.
    #[arg(long, default_value_t = DEFAULT_MAX_MINISLOTS)]
    max_minislots: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

impl Batch {
    fn config(&self) -> BatchConfig {
        BatchConfig::new(self.slots, self.max_minislots, self.seed)
    }
}

#[derive(Args, Serialize)]
struct CodebookArgs {
    #[arg(long, default_value_t = 2)]
    n_users: u32,
    /// Stop enumerating once the unresolved mass is below this.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Cap on enumerated entries; the rest is closed analytically.
    #[arg(long, default_value_t = DEFAULT_MAX_ENTRIES)]
    max_entries: usize,
    /// Write only the most probable entries.
    #[arg(long)]
    limit: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    output: Output,
}

#[derive(Args, Serialize)]
struct SweepArgs {
    #[arg(long, default_value_t = 2)]
    n_min: usize,
    #[arg(long, default_value_t = 16)]
    n_max: usize,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    #[command(flatten)]
    #[serde(flatten)]
    batch: Batch,
    /// Also draw the delay curves as SVG.
    #[arg(long)]
    svg: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    output: Output,
}

#[derive(Args, Serialize)]
struct SimulateArgs {
    #[arg(long, default_value_t = 2)]
    n_users: usize,
    /// iid, constant, correlated[:eps] or chain:<k>[:eps].
    #[arg(long, default_value = "iid")]
    channel: String,
    /// osa, mpa, two-sided, discrete-mpa or discrete-bisect.
    #[arg(long, default_value = "osa")]
    strategy: String,
    #[command(flatten)]
    #[serde(flatten)]
    batch: Batch,
    /// Write per-slot traces as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Number of leading slots to trace.
    #[arg(long, default_value_t = 1000)]
    trace_slots: u64,
    #[command(flatten)]
    #[serde(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ExampleName {
    Constant3,
    Correlated,
}

#[derive(Args, Serialize)]
struct ExampleArgs {
    #[arg(value_enum)]
    name: ExampleName,
    /// Probability skew of the correlated channel.
    #[arg(long, default_value_t = 1e-6)]
    channel_epsilon: f64,
    #[command(flatten)]
    #[serde(flatten)]
    batch: Batch,
    #[command(flatten)]
    #[serde(flatten)]
    output: Output,
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    #[arg(long, default_value_t = 1_000_000)]
    slots: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Also write the results as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|source| {
            Error::Io {
                context: format!("creating {}", p.display()),
                source,
            }
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(path: Option<&Path>, value: &serde_json::Value) -> Result<()> {
    let mut w = sink(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Io {
        context: "writing json".into(),
        source: e.into(),
    })?;
    writeln!(w)
        .and_then(|_| w.flush())
        .map_err(|source| Error::Io {
            context: "writing json".into(),
            source,
        })
}

fn meta<T: Serialize>(command: &str, args: &T) -> Provenance {
    Provenance::new(command, serde_json::to_value(args).expect("plain args"))
}

fn codebook(args: &CodebookArgs) -> Result<()> {
    let cb = CodebookBuilder::new(args.n_users)
        .epsilon(args.epsilon)
        .max_entries(args.max_entries)
        .build()?;
    let meta = meta("codebook", args);
    let out = args.output.out.as_deref();
    match args.output.format {
        Format::Json => write_json(out, &codebook_json(&cb, &meta, args.limit)),
        Format::Csv => write_codebook_csv(sink(out)?, &cb, &meta, args.limit),
    }
}

#[derive(Serialize)]
struct SweepRow {
    n_users: usize,
    osa_delay: f64,
    osa_std_error: f64,
    mpa_delay: f64,
    mpa_std_error: f64,
    mpa_exact_delay: f64,
    mpa_exact_lower: f64,
    mpa_exact_upper: f64,
    mpa_entropy_bits: f64,
}

fn sweep(args: &SweepArgs) -> Result<()> {
    if !(2 <= args.n_min && args.n_min <= args.n_max) {
        return Err(Error::Domain {
            what: "n-min/n-max",
            range: "2 <= n-min <= n-max",
            value: args.n_min as f64,
        });
    }
    let mut rows = Vec::new();
    for n in args.n_min..=args.n_max {
        let ch = ChannelModel::iid(n)?;
        let osa = run_batch(&ch, StrategyKind::Osa, args.batch.config())?;
        let mpa = run_batch(&ch, StrategyKind::Mpa, args.batch.config())?;
        let cb = CodebookBuilder::new(n as u32)
            .epsilon(args.epsilon)
            .build()?;
        let d = cb.expected_delay();
        rows.push(SweepRow {
            n_users: n,
            osa_delay: osa.mean_delay_charged,
            osa_std_error: osa.delay_std_error,
            mpa_delay: mpa.mean_delay_charged,
            mpa_std_error: mpa.delay_std_error,
            mpa_exact_delay: d.estimate,
            mpa_exact_lower: d.lower,
            mpa_exact_upper: d.upper,
            mpa_entropy_bits: cb.entropy().estimate_bits,
        });
        eprintln!("N={n} done");
    }
    let meta = meta("sweep", args);
    if let Some(path) = &args.svg {
        let pts = |f: fn(&SweepRow) -> f64| rows.iter().map(|r| (r.n_users as f64, f(r))).collect();
        let svg = line_chart(
            "Mean resolution delay",
            "users N",
            "minislots",
            &[
                Series {
                    label: "OSA (sim)",
                    color: "#c0392b",
                    points: pts(|r| r.osa_delay),
                },
                Series {
                    label: "MPA (sim)",
                    color: "#2471a3",
                    points: pts(|r| r.mpa_delay),
                },
                Series {
                    label: "MPA (exact)",
                    color: "#1e8449",
                    points: pts(|r| r.mpa_exact_delay),
                },
                Series {
                    label: "MPA entropy",
                    color: "#7d3c98",
                    points: pts(|r| r.mpa_entropy_bits),
                },
            ],
        );
        std::fs::write(path, svg).map_err(|source| Error::Io {
            context: format!("writing {}", path.display()),
            source,
        })?;
    }
    let out = args.output.out.as_deref();
    match args.output.format {
        Format::Json => write_json(out, &json!({ "meta": meta, "rows": rows })),
        Format::Csv => write_rows_csv(sink(out)?, &meta, &rows),
    }
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let ch = ChannelModel::parse(&args.channel, args.n_users)?;
    let kind: StrategyKind = args.strategy.parse()?;
    let stats = run_batch(&ch, kind, args.batch.config())?;
    if let Some(path) = &args.trace {
        let mut w = sink(Some(path))?;
        let cfg = BatchConfig {
            slots: args.trace_slots.min(args.batch.slots),
            ..args.batch.config()
        };
        let mut result = Ok(());
        for_each_slot(&ch, kind, cfg, |i, sample, trace| {
            if result.is_ok() {
                result = write_json_line(&mut w, &TraceLine::new(i, sample, trace));
            }
        })?;
        result?;
        w.flush().map_err(|source| Error::Io {
            context: "writing trace".into(),
            source,
        })?;
    }
    let row = BatchRow::new(ch.n_users(), &args.channel, kind.name(), &stats);
    let meta = meta("simulate", args);
    let out = args.output.out.as_deref();
    match args.output.format {
        Format::Json => write_json(out, &json!({ "meta": meta, "stats": row })),
        Format::Csv => write_rows_csv(sink(out)?, &meta, &[row]),
    }
}

#[derive(Serialize)]
struct StateRow {
    strategy: String,
    state: usize,
    gains: String,
    probability: f64,
    depth: usize,
    winner: Option<usize>,
    declared: bool,
}

fn example(args: &ExampleArgs) -> Result<()> {
    let meta = meta("example", args);
    let out = args.output.out.as_deref();
    match args.name {
        ExampleName::Constant3 => {
            let ch = ChannelModel::constant(3)?;
            let mut rows = Vec::new();
            for kind in [StrategyKind::Osa, StrategyKind::TwoSided] {
                let stats = run_batch(&ch, kind, args.batch.config())?;
                rows.push(BatchRow::new(3, "constant", kind.name(), &stats));
            }
            if rows[1].empirical_entropy_bits >= rows[0].empirical_entropy_bits {
                eprintln!("warning: two-sided transcript entropy is not below OSA's");
            }
            match args.output.format {
                Format::Json => write_json(out, &json!({ "meta": meta, "rows": rows })),
                Format::Csv => write_rows_csv(sink(out)?, &meta, &rows),
            }
        }
        ExampleName::Correlated => {
            let ch = ChannelModel::correlated(args.channel_epsilon)?;
            let reports = [StrategyKind::DiscreteMpa, StrategyKind::DiscreteBisect]
                .into_iter()
                .map(|k| discrete_exact_delay(&ch, k))
                .collect::<Result<Vec<_>>>()?;
            match args.output.format {
                Format::Json => write_json(out, &json!({ "meta": meta, "reports": reports })),
                Format::Csv => {
                    let mut w = sink(out)?;
                    for r in &reports {
                        writeln!(w, "# {} expected_delay {}", r.strategy, r.expected_delay)
                            .map_err(|source| Error::Io {
                                context: "writing csv".into(),
                                source,
                            })?;
                    }
                    let rows: Vec<StateRow> = reports
                        .iter()
                        .flat_map(|r| {
                            r.states.iter().map(|s| StateRow {
                                strategy: r.strategy.clone(),
                                state: s.state,
                                gains: s
                                    .gains
                                    .iter()
                                    .map(|g| g.to_string())
                                    .collect::<Vec<_>>()
                                    .join(" "),
                                probability: s.probability,
                                depth: s.depth,
                                winner: s.winner,
                                declared: s.declared,
                            })
                        })
                        .collect();
                    write_rows_csv(w, &meta, &rows)
                }
            }
        }
    }
}

fn verify(args: &VerifyArgs) -> Result<bool> {
    let cfg = VerifyConfig {
        slots: args.slots,
        seed: args.seed,
        ..VerifyConfig::default()
    };
    let results = run_all(&cfg);
    for r in &results {
        println!("{r}");
    }
    let passed = results.iter().filter(|r| r.passed).count();
    println!("{passed}/{} criteria passed", results.len());
    if let Some(path) = &args.out {
        write_json(
            Some(path),
            &json!({ "meta": meta("verify", args), "criteria": results }),
        )?;
    }
    Ok(passed == results.len())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Codebook(a) => codebook(a).map(|_| true),
        Command::Sweep(a) => sweep(a).map(|_| true),
        Command::Simulate(a) => simulate(a).map(|_| true),
        Command::Example(a) => example(a).map(|_| true),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
