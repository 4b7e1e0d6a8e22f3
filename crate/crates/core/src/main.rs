//! Command-line front end: parameter search, file-based aggregation with
//! differential oracle checking, circuit cost benchmarks, training runs, and
//! config sweeps. All outputs are plain text (key=value or CSV).

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use hragg::circuit::{cost_report, hts};
use hragg::encoding::{decode_packed, pack, param_search, EncodingParams, ParamSpec};
use hragg::error::Error;
use hragg::numt::{is_prime, multiplicative_order, prime_factors};
use hragg::oracle::{cwmed, cwts};
use hragg::protocol::{run_training_synth, METRICS_HEADER};
use hragg::slot::{OpCounts, RingParams, SlotVector, TrackedVector, Tracker};

#[derive(Parser)]
#[command(name = "hragg", about = "Robust aggregation over packed slot encodings", version)]
struct Cli {
    /// Worker threads for coordinate-block parallelism (aggregation only).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for (m, p) ring parameters meeting the given constraints.
    Params(ParamsArgs),
    /// Aggregate integer vectors from a file with the slot-circuit engine.
    Agg(AggArgs),
    /// Measure depth and operation counts of one trimmed-sum circuit.
    Bench(BenchArgs),
    /// Run a training experiment from a config file; writes a metrics CSV.
    Train(TrainArgs),
    /// Run one training experiment per value of a swept config key.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct ParamsArgs {
    /// Digits per slot (slot degree).
    #[arg(long = "N", default_value_t = 3)]
    slot_degree: usize,
    /// Minimum slot count d.
    #[arg(long = "min-d", default_value_t = 1)]
    min_d: usize,
    /// Digit base; defaults to the minimal base covering the range.
    #[arg(long = "B")]
    base: Option<u64>,
    #[arg(long, default_value_t = 15)]
    n: usize,
    #[arg(long, default_value_t = 5)]
    f: usize,
    /// Signed bit precision; range becomes 2^delta - 1 centered values.
    #[arg(long, default_value_t = 8, conflicts_with = "range")]
    delta: u32,
    /// Explicit number of representable raw values (offset 0).
    #[arg(long)]
    range: Option<u64>,
    #[arg(long = "max-p", default_value_t = 100_000)]
    max_p: u64,
    #[arg(long = "max-m", default_value_t = 10_000_000)]
    max_m: u64,
}

#[derive(Args)]
struct AggArgs {
    /// Circuit to run: hts or hmed.
    #[arg(long, default_value = "hts")]
    op: String,
    /// Trim parameter (hts only; hmed fixes f = floor(n/2)).
    #[arg(long, default_value_t = 0)]
    f: usize,
    /// Input file: one whitespace-separated integer vector per line.
    #[arg(long)]
    input: PathBuf,
    /// Also run the cleartext oracle and print MATCH or MISMATCH.
    #[arg(long)]
    oracle: bool,
    /// Digit base; defaults to the minimal base covering the inputs.
    #[arg(long = "B")]
    base: Option<u64>,
    /// Digits per slot.
    #[arg(long = "N", default_value_t = 2)]
    slot_degree: usize,
    /// Write the aggregate here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    f: usize,
    #[arg(long = "B", default_value_t = 7)]
    base: u64,
    #[arg(long = "N", default_value_t = 3)]
    slot_degree: usize,
    /// Fixed plaintext modulus; searched if omitted.
    #[arg(long)]
    p: Option<u64>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "metrics.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Config key to sweep, e.g. clamp.
    #[arg(long)]
    key: String,
    /// Comma-separated values substituted for the key.
    #[arg(long)]
    values: String,
    #[arg(long = "out-dir", default_value = ".")]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads < 1 {
        eprintln!("error: --threads must be at least 1");
        return ExitCode::from(2);
    }
    let result = match cli.command {
        Command::Params(a) => cmd_params(a),
        Command::Agg(a) => cmd_agg(a, cli.threads),
        Command::Bench(a) => cmd_bench(a),
        Command::Train(a) => cmd_train(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                // engine-invariant violations
                Error::RingMismatch
                | Error::ExtIndexOutOfRange { .. }
                | Error::DuplicatePoints
                | Error::TooManyPoints(..) => 3,
                // everything else is bad input or an infeasible request
                _ => 2,
            })
        }
    }
}

fn cmd_params(a: ParamsArgs) -> Result<ExitCode, Error> {
    let (range, offset) = match a.range {
        Some(r) => (r, 0),
        None => {
            if a.delta < 2 {
                return Err(Error::Config("delta must be at least 2".into()));
            }
            let half = (1i64 << (a.delta - 1)) - 1;
            ((2 * half + 1) as u64, half)
        }
    };
    let spec = ParamSpec {
        range,
        offset,
        base: a.base,
        n: a.n,
        f: a.f,
        slot_degree: a.slot_degree,
        min_slots: a.min_d,
        max_p: a.max_p,
        max_m: a.max_m,
    };
    let enc = param_search(&spec)?;
    print!(
        "m={}\np={}\nN={}\nd={}\nB={}\noffset={}\nsum_width={}\n",
        enc.ring.m,
        enc.ring.p,
        enc.ring.slot_degree,
        enc.ring.slot_count,
        enc.base,
        enc.offset,
        enc.sum_width
    );
    Ok(ExitCode::SUCCESS)
}

fn read_vectors(path: &Path) -> Result<Vec<Vec<i64>>, Error> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Result<Vec<i64>, _> = line.split_whitespace().map(str::parse).collect();
        let row = row.map_err(|_| {
            Error::Config(format!("input line {}: expected integers", lineno + 1))
        })?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    let dim = rows[0].len();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(Error::Config("input rows have differing lengths".into()));
    }
    Ok(rows)
}

/// Encoding covering the observed input values for an n-input trimmed sum.
fn encoding_for_values(
    rows: &[Vec<i64>],
    f: usize,
    base: Option<u64>,
    slot_degree: usize,
) -> Result<EncodingParams, Error> {
    let min = rows.iter().flatten().copied().min().unwrap_or(0);
    let max = rows.iter().flatten().copied().max().unwrap_or(0);
    let offset = (-min).max(0);
    let spec = ParamSpec {
        range: (max + offset) as u64 + 1,
        offset,
        base,
        n: rows.len(),
        f,
        slot_degree,
        min_slots: 1,
        max_p: 100_000,
        max_m: 10_000_000,
    };
    param_search(&spec)
}

/// Evaluates the trimmed-sum circuit over the packed chunks, optionally
/// splitting the independent chunks across threads.
fn hts_packed(
    rows: &[Vec<i64>],
    f: usize,
    enc: &EncodingParams,
    threads: usize,
) -> Result<Vec<i64>, Error> {
    let batches: Vec<_> = rows
        .iter()
        .map(|v| pack(v, enc))
        .collect::<Result<Vec<_>, _>>()?;
    let chunks = batches[0].vectors.len();
    let window = rows.len() - 2 * f;
    let eval_chunk = |chunk: usize| -> Result<SlotVector, Error> {
        let inputs: Vec<TrackedVector> = batches
            .iter()
            .map(|b| TrackedVector::fresh(b.vectors[chunk].clone()))
            .collect();
        let mut t = Tracker::new();
        Ok(hts(&inputs, f, enc, &mut t)?.value)
    };
    let out_vectors: Vec<SlotVector> = if threads <= 1 || chunks <= 1 {
        (0..chunks).map(eval_chunk).collect::<Result<_, _>>()?
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..chunks)
                .map(|c| scope.spawn(move || eval_chunk(c)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("worker panicked"))
                .collect::<Result<_, _>>()
        })?
    };
    Ok(decode_packed(&out_vectors, rows[0].len(), enc, window as u64))
}

fn cmd_agg(a: AggArgs, threads: usize) -> Result<ExitCode, Error> {
    let rows = read_vectors(&a.input)?;
    let n = rows.len();
    let f = match a.op.as_str() {
        "hts" => {
            if 2 * a.f >= n {
                return Err(Error::InvalidTrim { n, f: a.f });
            }
            a.f
        }
        "hmed" => {
            if n % 2 == 0 {
                return Err(Error::EvenMedian(n));
            }
            n / 2
        }
        other => return Err(Error::Config(format!("unknown op '{other}'"))),
    };
    let enc = encoding_for_values(&rows, f, a.base, a.slot_degree)?;
    println!(
        "n={n} f={f} op={} m={} p={} N={} d={} B={}",
        a.op, enc.ring.m, enc.ring.p, enc.ring.slot_degree, enc.ring.slot_count, enc.base
    );
    let result = hts_packed(&rows, f, &enc, threads)?;
    let line = result
        .iter()
        .map(i64::to_string)
        .collect::<Vec<_>>()
        .join(" ");
    match &a.out {
        Some(path) => std::fs::write(path, format!("{line}\n"))?,
        None => println!("{line}"),
    }
    if a.oracle {
        let expect = match a.op.as_str() {
            "hts" => cwts(&rows, f)?,
            _ => cwmed(&rows)?,
        };
        if result == expect {
            println!("MATCH");
        } else {
            println!("MISMATCH");
            eprintln!("engine {result:?} vs oracle {expect:?}");
            return Ok(ExitCode::from(3));
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Smallest prime m admitting slot degree `slot_degree` for a fixed p.
fn ring_for_p(p: u64, slot_degree: usize) -> Result<Arc<RingParams>, Error> {
    if !is_prime(p) {
        return Err(Error::InvalidRing(format!("p={p} is not prime")));
    }
    let pn = (p as u128).pow(slot_degree as u32) - 1;
    let mut candidates: Vec<u64> = prime_factors(pn)
        .into_iter()
        .filter(|&m| m < u64::MAX as u128)
        .map(|m| m as u64)
        .collect();
    candidates.sort_unstable();
    for m in candidates {
        if m == 2 && slot_degree > 1 {
            continue;
        }
        if multiplicative_order(p, m) == slot_degree as u64 {
            return RingParams::new(m, p);
        }
    }
    Err(Error::InvalidRing(format!(
        "no prime m gives slot degree {slot_degree} for p={p}"
    )))
}

fn cmd_bench(a: BenchArgs) -> Result<ExitCode, Error> {
    if a.n < 1 {
        return Err(Error::EmptyInput);
    }
    if 2 * a.f >= a.n {
        return Err(Error::InvalidTrim { n: a.n, f: a.f });
    }
    let sum_width = a.n - 2 * a.f;
    let enc = match a.p {
        Some(p) => {
            let ring = ring_for_p(p, a.slot_degree)?;
            EncodingParams::new(ring, a.base, 0, sum_width)?
        }
        None => {
            let spec = ParamSpec {
                range: a.base.pow(a.slot_degree as u32),
                offset: 0,
                base: Some(a.base),
                n: a.n,
                f: a.f,
                slot_degree: a.slot_degree,
                min_slots: 1,
                max_p: 100_000,
                max_m: 10_000_000,
            };
            param_search(&spec)?
        }
    };
    println!("m={}\nd={}", enc.ring.m, enc.ring.slot_count);
    print!("{}", cost_report(a.n, a.f, &enc)?.to_kv_lines());
    Ok(ExitCode::SUCCESS)
}

fn load_config(path: &Path) -> Result<hragg::config::ExperimentConfig, Error> {
    let text = std::fs::read_to_string(path)?;
    hragg::config::ExperimentConfig::parse(&text)
}

fn write_metrics(path: &Path, rows: &[hragg::protocol::MetricRow]) -> Result<(), Error> {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn print_ops(ops: &OpCounts) {
    println!(
        "ops.ct_ct_mults={}\nops.ct_pt_mults={}\nops.adds={}\nops.extractions={}",
        ops.ct_ct_mults, ops.ct_pt_mults, ops.adds, ops.extractions
    );
}

fn cmd_train(a: TrainArgs) -> Result<ExitCode, Error> {
    let cfg = load_config(&a.config)?;
    print!("{}", cfg.to_kv_string());
    let result = run_training_synth(&cfg, false)?;
    write_metrics(&a.out, &result.rows)?;
    println!("final_train_acc={:.6}", result.final_train_acc);
    println!("final_test_acc={:.6}", result.final_test_acc);
    print_ops(&result.total_ops);
    println!("metrics={}", a.out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(a: SweepArgs) -> Result<ExitCode, Error> {
    let base_text = std::fs::read_to_string(&a.config)?;
    let values: Vec<&str> = a.values.split(',').map(str::trim).collect();
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    std::fs::create_dir_all(&a.out_dir)?;
    for value in values {
        // drop any existing line for the swept key, then append the value
        let mut text: String = base_text
            .lines()
            .filter(|l| l.split_once('=').map(|(k, _)| k.trim()) != Some(a.key.as_str()))
            .map(|l| format!("{l}\n"))
            .collect();
        text.push_str(&format!("{}={value}\n", a.key));
        let cfg = hragg::config::ExperimentConfig::parse(&text)?;
        let result = run_training_synth(&cfg, false)?;
        let fname = format!("metrics_{}_{}.csv", a.key, value.replace(['/', ' '], "_"));
        let path = a.out_dir.join(fname);
        write_metrics(&path, &result.rows)?;
        println!(
            "{}={value} final_test_acc={:.6} metrics={}",
            a.key,
            result.final_test_acc,
            path.display()
        );
    }
    Ok(ExitCode::SUCCESS)
}
