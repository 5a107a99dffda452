//! `dfq`: event-log ingestion, directly-follows computation, DFG export,
//! SQL queries, synthetic log generation, and benchmarks from one binary.

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dfq::baselines::{nested_join_dfr, nested_join_dfr_indexed, sorted_stream_dfr, FlatTable};
use dfq::bench::{parse_config, run_bench};
use dfq::dfg::{build_dfg, to_dot, to_json};
use dfq::dfr::{brute_force_dfr, directly_follows};
use dfq::event_model::{dfr_to_rows, EventLog};
use dfq::incremental::DfrMaintainer;
use dfq::ingestion::{
    gen_merge_cases, gen_relabel, read_csv, synth_base_log, write_csv, CsvConfig, TimeFormat,
};
use dfq::query::{execute, parse, Catalog, ResultTable, TableDef};

#[derive(Parser)]
#[command(name = "dfq", version, about = "Event-log query engine with a native directly-follows operator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TimeFormatArg {
    Epoch,
    Iso8601,
}

impl From<TimeFormatArg> for TimeFormat {
    fn from(arg: TimeFormatArg) -> Self {
        match arg {
            TimeFormatArg::Epoch => TimeFormat::EpochMicros,
            TimeFormatArg::Iso8601 => TimeFormat::Iso8601Utc,
        }
    }
}

#[derive(Args)]
struct CsvArgs {
    /// Case-id column name.
    #[arg(long = "case", default_value = "case")]
    case_column: String,
    /// Activity column name.
    #[arg(long = "activity", default_value = "activity")]
    activity_column: String,
    /// Timestamp column name.
    #[arg(long = "time", default_value = "time")]
    time_column: String,
    #[arg(long = "time-format", value_enum, default_value = "epoch")]
    time_format: TimeFormatArg,
    #[arg(long, default_value = ",")]
    delimiter: char,
    /// Treat the first row as data instead of a header; column names are
    /// then 0-based indices.
    #[arg(long)]
    no_header: bool,
}

impl CsvArgs {
    fn config(&self) -> CsvConfig {
        CsvConfig {
            case_column: self.case_column.clone(),
            activity_column: self.activity_column.clone(),
            time_column: self.time_column.clone(),
            time_format: self.time_format.into(),
            delimiter: self.delimiter as u8,
            has_header: !self.no_header,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ApproachArg {
    Native,
    Nested,
    NestedIndexed,
    SortedStream,
    Oracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Load a CSV event log and report counts.
    Ingest {
        csv: PathBuf,
        #[command(flatten)]
        csv_args: CsvArgs,
        /// Replay events one by one through the incremental maintainer and
        /// check the final snapshot against the batch result.
        #[arg(long)]
        incremental: bool,
    },
    /// Generate a synthetic event log.
    Gen {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        cases: u64,
        #[arg(long, default_value_t = 30)]
        activities: u64,
        #[arg(long = "mean-len", default_value_t = 10)]
        mean_len: u64,
        /// Replace each trace by k time-shifted copies of itself.
        #[arg(long, conflicts_with = "relabel")]
        merge: Option<u64>,
        /// Partition cases into k groups with suffixed activity labels.
        #[arg(long)]
        relabel: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute the directly-follows relation of a CSV log.
    Dfr {
        csv: PathBuf,
        #[command(flatten)]
        csv_args: CsvArgs,
        #[arg(long, value_enum, default_value = "native")]
        approach: ApproachArg,
    },
    /// Build the directly-follows graph and write it as DOT or JSON.
    Dfg {
        csv: PathBuf,
        #[command(flatten)]
        csv_args: CsvArgs,
        /// Output path; the extension (.dot or .json) picks the format.
        #[arg(long)]
        out: PathBuf,
    },
    /// Execute a query over registered CSV tables.
    Query {
        /// Query text; read from stdin when omitted.
        #[arg(short = 'e')]
        expr: Option<String>,
        /// Table registration, repeatable: name=path.csv
        #[arg(long = "table")]
        tables: Vec<String>,
        #[command(flatten)]
        csv_args: CsvArgs,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
    },
    /// Run the benchmark matrix from a config file.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

enum CliError {
    Usage(String),
    Data(String),
}

impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Data(e.to_string())
    }
}

fn load_log(path: &Path, csv_args: &CsvArgs) -> Result<EventLog, CliError> {
    read_csv(path, &csv_args.config()).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn print_dfr_csv(rows: &[(String, String, u64)]) {
    let mut writer = csv::Writer::from_writer(std::io::stdout());
    let _ = writer.write_record(["Event_Label_P", "Event_Label_S", "Frequency"]);
    for (p, s, n) in rows {
        let _ = writer.write_record([p.as_str(), s.as_str(), &n.to_string()]);
    }
    let _ = writer.flush();
}

fn print_result(result: &ResultTable, format: OutputFormat) {
    match format {
        OutputFormat::Csv => {
            let mut writer = csv::Writer::from_writer(std::io::stdout());
            let _ = writer.write_record(&result.columns);
            for row in &result.rows {
                let _ = writer.write_record(row);
            }
            let _ = writer.flush();
        }
        OutputFormat::Table => {
            let mut widths: Vec<usize> = result.columns.iter().map(|c| c.len()).collect();
            for row in &result.rows {
                for (i, cell) in row.iter().enumerate() {
                    widths[i] = widths[i].max(cell.len());
                }
            }
            let line = |cells: &[String]| {
                cells
                    .iter()
                    .enumerate()
                    .map(|(i, c)| format!("{:width$}", c, width = widths[i]))
                    .collect::<Vec<_>>()
                    .join(" | ")
            };
            println!("{}", line(&result.columns));
            println!("{}", widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-+-"));
            for row in &result.rows {
                println!("{}", line(row));
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest {
            csv,
            csv_args,
            incremental,
        } => {
            let log = load_log(&csv, &csv_args)?;
            println!(
                "cases: {}\nevents: {}\nactivities: {}",
                log.case_count(),
                log.event_count(),
                log.activities().len()
            );
            if incremental {
                let mut maintainer = DfrMaintainer::new();
                for trace in log.traces() {
                    for event in &trace.events {
                        maintainer.insert_event(event)?;
                    }
                }
                let snapshot = maintainer.snapshot();
                let batch = directly_follows(&log);
                if snapshot != batch {
                    return Err(CliError::Data(
                        "incremental snapshot diverged from batch result".into(),
                    ));
                }
                println!("incremental replay: snapshot matches batch ({} pairs)", snapshot.pair_count());
            }
            Ok(())
        }
        Command::Gen {
            seed,
            cases,
            activities,
            mean_len,
            merge,
            relabel,
            out,
        } => {
            let mut log = synth_base_log(seed, cases, activities, mean_len);
            if let Some(k) = merge {
                if k < 1 {
                    return Err(CliError::Usage("--merge must be >= 1".into()));
                }
                log = gen_merge_cases(&log, k);
            }
            if let Some(k) = relabel {
                if k < 1 {
                    return Err(CliError::Usage("--relabel must be >= 1".into()));
                }
                log = gen_relabel(&log, k);
            }
            write_csv(&log, &out)?;
            println!(
                "wrote {} events, {} cases to {}",
                log.event_count(),
                log.case_count(),
                out.display()
            );
            Ok(())
        }
        Command::Dfr {
            csv,
            csv_args,
            approach,
        } => {
            let log = load_log(&csv, &csv_args)?;
            let dfr = match approach {
                ApproachArg::Native => directly_follows(&log),
                ApproachArg::Oracle => brute_force_dfr(&log),
                ApproachArg::Nested => nested_join_dfr(&FlatTable::from_log(&log)),
                ApproachArg::NestedIndexed => {
                    let mut table = FlatTable::from_log(&log);
                    table.build_index();
                    nested_join_dfr_indexed(&table)?
                }
                ApproachArg::SortedStream => sorted_stream_dfr(&FlatTable::from_log(&log)).0,
            };
            print_dfr_csv(&dfr_to_rows(&dfr));
            Ok(())
        }
        Command::Dfg {
            csv,
            csv_args,
            out,
        } => {
            let log = load_log(&csv, &csv_args)?;
            let dfg = build_dfg(&log);
            let content = match out.extension().and_then(|e| e.to_str()) {
                Some("dot") => to_dot(&dfg),
                Some("json") => to_json(&dfg),
                _ => {
                    return Err(CliError::Usage(
                        "--out must end in .dot or .json".into(),
                    ))
                }
            };
            std::fs::write(&out, content)?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Query {
            expr,
            tables,
            csv_args,
            format,
        } => {
            let text = match expr {
                Some(text) => text,
                None => {
                    let mut buf = String::new();
                    std::io::stdin().read_to_string(&mut buf)?;
                    buf
                }
            };
            let mut catalog = Catalog::new();
            for spec in &tables {
                let (name, path) = spec.split_once('=').ok_or_else(|| {
                    CliError::Usage(format!("--table expects name=path, got {spec:?}"))
                })?;
                let log = load_log(Path::new(path), &csv_args)?;
                catalog.register(
                    name,
                    TableDef {
                        log,
                        case_column: csv_args.case_column.clone(),
                        activity_column: csv_args.activity_column.clone(),
                        time_column: csv_args.time_column.clone(),
                    },
                );
            }
            let ast = parse(&text)?;
            let result = execute(&ast, &catalog)?;
            print_result(&result, format);
            Ok(())
        }
        Command::Bench { config, out } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| CliError::Data(format!("{}: {e}", config.display())))?;
            let cfg = parse_config(&text)?;
            let report = run_bench(&cfg)?;
            std::fs::write(&out, report.to_csv())?;
            print!("{}", report.summary());
            println!("report written to {}", out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(message)) => {
            eprintln!("usage error: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Data(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
