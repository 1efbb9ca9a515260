use canonflex::catalog::{
    cache_load, cache_store, compute_table, read_csv, reference_diff, tool_version, write_csv,
    CacheEntry,
};
use canonflex::generator::{random_canon, valid_continuations, GenOptions};
use canonflex::graph::scc_decompose;
use canonflex::spectral::char_poly;
use canonflex::melody::realize;
use canonflex::{
    count_valid_oracle, flexibility, format_lambda, validate, Error, Melody, OracleOptions,
    Scheme, Transform,
};
use clap::{Parser, Subcommand, ValueEnum};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "canonflex", version, about = "Flexibility of canonic schemes over the 7-tone scale")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MelodyFormat {
    Digits,
    Letters,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Flexibility of a scheme (dominant eigenvalue of its window graph)
    Flex {
        scheme: String,
        /// Skip the lossless time-axis reduction by the gcd of the voice gaps
        #[arg(long)]
        raw: bool,
        /// Also print the node table and edge list of the window graph
        #[arg(long)]
        dump_graph: bool,
        #[arg(long)]
        json: bool,
    },
    /// Exact number of valid n-note canons
    Count {
        scheme: String,
        #[arg(long)]
        n: usize,
        /// Use the depth-first oracle instead of the window graph
        #[arg(long)]
        oracle: bool,
    },
    /// Check a melody against the two counterpoint rules
    Validate {
        scheme: String,
        #[arg(long)]
        melody: String,
    },
    /// Canonical representative of a scheme's equivalence class
    Normalize { scheme: String },
    /// Whether two schemes are related by the transform group
    Equiv { a: String, b: String },
    /// Flexibility of every normalized three-voice scheme up to max-t3
    Table {
        #[arg(long, default_value_t = 8)]
        max_t3: u32,
        /// 0 picks the number of available cores
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
        format: TableFormat,
        /// JSONL result cache (default: $CANONFLEX_CACHE if set)
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Compare a table CSV (stdin or --input) against the published values
    Diff {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Exact characteristic polynomial of each strongly connected component
    Charpoly {
        scheme: String,
        /// Only the component with this index (topological order)
        #[arg(long)]
        component: Option<usize>,
        #[arg(long, default_value_t = 64)]
        cap: usize,
    },
    /// Extend a seed prefix to a valid canon by seeded random walk
    Generate {
        scheme: String,
        #[arg(long, default_value_t = 16)]
        length: usize,
        #[arg(long, default_value = "")]
        seed_prefix: String,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
        #[arg(long)]
        avoid_parallel_perfects: bool,
        #[arg(long, default_value_t = 100_000)]
        max_retries: u64,
        #[arg(long, value_enum, default_value_t = MelodyFormat::Digits)]
        format: MelodyFormat,
    },
    /// The pitches that keep a prefix extendable
    Continuations {
        scheme: String,
        #[arg(long)]
        prefix: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_resource_limit() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn parse_scheme(text: &str) -> Result<Scheme, Error> {
    text.parse()
}

fn run(command: Command) -> Result<ExitCode, Error> {
    let mut out = std::io::stdout().lock();
    match command {
        Command::Flex {
            scheme,
            raw,
            dump_graph,
            json,
        } => {
            let mut scheme = parse_scheme(&scheme)?;
            if !raw {
                scheme = reduce_by_gcd(&scheme)?;
            }
            let result = flexibility(&scheme)?;
            if dump_graph {
                let g = canonflex::TransferGraph::build(&scheme, OracleOptions::default())?;
                g.dump(&mut out).map_err(io_err)?;
            }
            if json {
                serde_json::to_writer(&mut out, &result).map_err(|e| io_err(e.into()))?;
                writeln!(out).map_err(io_err)?;
            } else {
                writeln!(out, "lambda = {}", format_lambda(result.lambda)).map_err(io_err)?;
                if let Some(exact) = result.exact_hint {
                    writeln!(out, "exact = {exact}").map_err(io_err)?;
                }
            }
        }
        Command::Count { scheme, n, oracle } => {
            let scheme = parse_scheme(&scheme)?;
            let count = if oracle {
                count_valid_oracle(&scheme, n, OracleOptions::default())?
            } else {
                canonflex::TransferGraph::build(&scheme, OracleOptions::default())?
                    .count_valid_fast(n)
            };
            writeln!(out, "{count}").map_err(io_err)?;
        }
        Command::Validate { scheme, melody } => {
            let scheme = parse_scheme(&scheme)?;
            let melody = Melody::parse(&melody)?;
            let violations = validate(&scheme, &melody);
            if violations.is_empty() {
                writeln!(out, "valid").map_err(io_err)?;
            } else {
                for v in violations {
                    writeln!(out, "t={} voices=({},{}) {:?}", v.t, v.i, v.j, v.kind)
                        .map_err(io_err)?;
                }
                return Ok(ExitCode::from(1));
            }
        }
        Command::Normalize { scheme } => {
            let scheme = parse_scheme(&scheme)?;
            writeln!(out, "{}", scheme.canonical_form().0).map_err(io_err)?;
        }
        Command::Equiv { a, b } => {
            let a = parse_scheme(&a)?.canonical_form().0;
            let b = parse_scheme(&b)?.canonical_form().0;
            let same = a.to_string() == b.to_string();
            writeln!(out, "{}", if same { "equivalent" } else { "inequivalent" })
                .map_err(io_err)?;
            if !same {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Table {
            max_t3,
            workers,
            format,
            cache,
        } => {
            let cache = cache.or_else(|| std::env::var_os("CANONFLEX_CACHE").map(Into::into));
            let output = compute_table(max_t3, workers);
            if let Some((key, msg)) = output.errors.first() {
                eprintln!("error: cell {key:?}: {msg}");
                return Ok(ExitCode::from(2));
            }
            if let Some(path) = cache {
                let (known, _) = cache_load(&path).map_err(io_err)?;
                let fresh: Vec<CacheEntry> = output
                    .rows
                    .iter()
                    .filter(|r| !known.contains_key(&r.canonical))
                    .map(|r| CacheEntry {
                        canonical: r.canonical.clone(),
                        lambda: r.lambda,
                        nodes: 0,
                        scc_count: 0,
                        version: tool_version().to_string(),
                    })
                    .collect();
                cache_store(&path, &fresh).map_err(io_err)?;
            }
            match format {
                TableFormat::Csv => {
                    write_csv(&output.rows, &mut out).map_err(|e| io_err(e.into()))?
                }
                TableFormat::Json => {
                    serde_json::to_writer(&mut out, &output.rows)
                        .map_err(|e| io_err(e.into()))?;
                    writeln!(out).map_err(io_err)?;
                }
                TableFormat::Text => {
                    for row in &output.rows {
                        writeln!(
                            out,
                            "({},{}) bass {} p3={}  lambda {}  {}",
                            row.t2,
                            row.t3,
                            row.bass,
                            row.p3,
                            format_lambda(row.lambda),
                            row.canonical
                        )
                        .map_err(io_err)?;
                    }
                }
            }
        }
        Command::Diff { input, json } => {
            let rows = match input {
                Some(path) => read_csv(std::fs::File::open(&path).map_err(io_err)?),
                None => read_csv(std::io::stdin().lock()),
            }
            .map_err(Error::Parse)?;
            let report = reference_diff(&rows);
            if json {
                serde_json::to_writer(&mut out, &report).map_err(|e| io_err(e.into()))?;
                writeln!(out).map_err(io_err)?;
            } else {
                for m in &report.mismatches {
                    writeln!(
                        out,
                        "mismatch {:?}: computed {} printed {}",
                        m.key,
                        format_lambda(m.computed),
                        m.printed
                    )
                    .map_err(io_err)?;
                }
                for key in &report.missing {
                    writeln!(out, "missing {key:?}").map_err(io_err)?;
                }
            }
            if !report.is_clean() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Charpoly {
            scheme,
            component,
            cap,
        } => {
            let scheme = parse_scheme(&scheme)?;
            let g = canonflex::TransferGraph::build(&scheme, OracleOptions::default())?;
            let sccs = scc_decompose(&g);
            for (idx, comp) in sccs.components.iter().enumerate() {
                if component.is_some_and(|want| want != idx) {
                    continue;
                }
                let poly = char_poly(&g, comp, cap)?;
                writeln!(out, "component {idx} (size {}): {poly}", comp.len())
                    .map_err(io_err)?;
            }
        }
        Command::Generate {
            scheme,
            length,
            seed_prefix,
            rng_seed,
            avoid_parallel_perfects,
            max_retries,
            format,
        } => {
            let scheme = parse_scheme(&scheme)?;
            let prefix = Melody::parse(&seed_prefix)?;
            let opts = GenOptions {
                length,
                rng_seed,
                avoid_parallel_perfects,
                max_retries,
            };
            let canon = random_canon(&scheme, &prefix, opts)?;
            match format {
                MelodyFormat::Digits => writeln!(out, "{canon}").map_err(io_err)?,
                MelodyFormat::Letters => {
                    let text: Vec<String> =
                        canon.notes().iter().map(|n| n.letter().to_string()).collect();
                    writeln!(out, "{}", text.join(" ")).map_err(io_err)?;
                }
                MelodyFormat::Csv => write_realization_csv(&scheme, &canon, &mut out)?,
            }
        }
        Command::Continuations { scheme, prefix } => {
            let scheme = parse_scheme(&scheme)?;
            let prefix = Melody::parse(&prefix)?;
            let pitches = valid_continuations(&scheme, &prefix)?;
            let text: Vec<String> = pitches.iter().map(|p| p.value().to_string()).collect();
            writeln!(out, "{}", text.join(" ")).map_err(io_err)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Shrinks the time axis by the gcd of the voice gaps; the flexibility is
/// unchanged and the window graph can be exponentially smaller.
fn reduce_by_gcd(scheme: &Scheme) -> Result<Scheme, Error> {
    let mut gcd = 0i64;
    let t0 = scheme.voices()[0].t;
    for v in scheme.voices() {
        gcd = num_integer::gcd(gcd, v.t - t0);
    }
    if gcd > 1 {
        scheme
            .transform(Transform::TimeTranslate(-t0))?
            .transform(Transform::TimeDilate {
                numerator: 1,
                denominator: gcd,
            })
    } else {
        Ok(scheme.clone())
    }
}

/// The realization grid as CSV: one row per time, one column per voice,
/// blank where a voice is silent.
fn write_realization_csv(
    scheme: &Scheme,
    melody: &Melody,
    out: &mut impl Write,
) -> Result<(), Error> {
    let r = realize(scheme, melody);
    let header: Vec<String> = (0..scheme.voices().len())
        .map(|i| format!("voice{i}"))
        .collect();
    writeln!(out, "t,{}", header.join(",")).map_err(io_err)?;
    for t in r.time_range() {
        let cells: Vec<String> = (0..scheme.voices().len())
            .map(|i| r.note(t, i).map_or(String::new(), |n| n.value().to_string()))
            .collect();
        writeln!(out, "{t},{}", cells.join(",")).map_err(io_err)?;
    }
    Ok(())
}

fn io_err(e: std::io::Error) -> Error {
    Error::Parse(e.to_string())
}
