//! Command-line front end: `analyze`, `fit`, `sweep`, `fetch`, `report`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Arg, ArgMatches, Command};

use crate::config::{RunConfig, KEYS};
use crate::dynamics::{bootstrap_ks, exceedance, fit_power_law, rank_size};
use crate::error::{Error, Result};
use crate::ingest::{parse_csv, write_csv, CsvOptions};
use crate::output::{self, fmt_g6, FitReport};
use crate::pipeline::{analyze_prices, Analysis};
use crate::sensitivity::{sweep_et, sweep_rr};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

const SUBCOMMANDS: &[(&str, &str)] = &[
    (
        "analyze",
        "Identify and score resilience cycles; writes cycles.csv and metrics.csv",
    ),
    (
        "fit",
        "Fit a power law to the RI upper tail; writes fit.json, rank_size.csv, exceedance.csv",
    ),
    (
        "sweep",
        "RR and ET sensitivity sweeps; writes sensitivity_rr.csv and sensitivity_et.csv",
    ),
    ("fetch", "Download a daily history CSV"),
    ("report", "Summarize every artifact in the output directory"),
];

fn command() -> Command {
    let mut shared = vec![
        Arg::new("config")
            .long("config")
            .value_name("FILE")
            .help("flat `key = value` config file"),
        Arg::new("input")
            .long("input")
            .value_name("CSV")
            .help("daily history CSV (Date,...,Close,...)"),
        Arg::new("out_dir")
            .long("out-dir")
            .value_name("DIR")
            .help("output directory [default: out]"),
    ];
    for (key, help) in KEYS {
        if matches!(*key, "input" | "out_dir") {
            continue;
        }
        shared.push(Arg::new(*key).long(*key).value_name("VALUE").help(*help));
    }

    let mut cmd = Command::new("resicycle")
        .about("Quantify consecutive resilience cycles in daily performance series")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for (name, about) in SUBCOMMANDS {
        cmd = cmd.subcommand(Command::new(*name).about(*about).args(shared.clone()));
    }
    cmd
}

fn load_config(m: &ArgMatches) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = m.get_one::<String>("config") {
        cfg.apply_file(Path::new(path))?;
    }
    for (key, _) in KEYS {
        if let Some(value) = m.get_one::<String>(key) {
            cfg.set(key, value)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_USAGE,
        e if e.is_data_error() => EXIT_DATA,
        _ => EXIT_INTERNAL,
    }
}

/// Runs the CLI with `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{rendered}")
            } else {
                write!(stdout, "{rendered}")
            };
            return code;
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let result = load_config(sub).and_then(|cfg| match name {
        "analyze" => cmd_analyze(&cfg, stdout, stderr),
        "fit" => cmd_fit(&cfg, stdout),
        "sweep" => cmd_sweep(&cfg, stdout),
        "fetch" => cmd_fetch(&cfg, stdout),
        "report" => cmd_report(&cfg, stdout),
        _ => unreachable!("unknown subcommand {name}"),
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn input_path(cfg: &RunConfig) -> Result<&Path> {
    cfg.input
        .as_deref()
        .ok_or_else(|| Error::Config("no input CSV; pass --input or set `input`".into()))
}

fn symbol_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "series".into())
}

/// Runs ingest through scoring on the configured input.
pub fn load_analysis(cfg: &RunConfig) -> Result<Analysis> {
    let path = input_path(cfg)?;
    let file = File::open(path)?;
    let parsed = parse_csv(
        file,
        &symbol_of(path),
        CsvOptions::for_tau(cfg.pipeline.tau_days),
    )?;
    analyze_prices(&parsed, &cfg.pipeline)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn summary(values: &[f64]) -> Option<(f64, f64, f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let mean = sorted.iter().sum::<f64>() / n as f64;
    Some((sorted[0], median, mean, sorted[n - 1]))
}

pub fn cmd_analyze(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let analysis = load_analysis(cfg)?;
    let scores = &analysis.report.scores;
    output::write_cycles_csv(
        scores,
        &analysis.series,
        create(&cfg.out_dir, output::CYCLES_CSV)?,
    )?;
    output::write_metrics_csv(
        scores,
        &analysis.series,
        create(&cfg.out_dir, output::METRICS_CSV)?,
    )?;

    if analysis.dropped_rows > 0 {
        writeln!(
            stderr,
            "warning: dropped {} rows with a missing close",
            analysis.dropped_rows
        )?;
    }
    for skipped in &analysis.report.skipped {
        writeln!(
            stderr,
            "warning: cycle {} skipped: {}",
            skipped.index, skipped.reason
        )?;
    }
    writeln!(stdout, "observations: {}", analysis.series.len())?;
    writeln!(stdout, "cycles: {}", scores.len())?;
    let ri = analysis.report.ri_values();
    match summary(&ri) {
        Some((min, median, mean, max)) => writeln!(
            stdout,
            "RI min {} median {} mean {} max {}",
            fmt_g6(min),
            fmt_g6(median),
            fmt_g6(mean),
            fmt_g6(max)
        )?,
        None => writeln!(stderr, "warning: no resilience cycles found")?,
    }
    Ok(())
}

pub fn cmd_fit(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let metrics = File::open(cfg.out_dir.join(output::METRICS_CSV)).map_err(|e| {
        Error::Config(format!(
            "cannot read {} (run `analyze` first): {e}",
            cfg.out_dir.join(output::METRICS_CSV).display()
        ))
    })?;
    let ri = output::read_metrics_ri(metrics)?;
    let positive: Vec<f64> = ri.iter().copied().filter(|&v| v > 0.0).collect();

    let fit = fit_power_law(&positive)?;
    let fit = bootstrap_ks(&positive, &fit, &cfg.dynamics)?;
    let report = FitReport::new(ri.len(), positive.len(), &fit, &cfg.dynamics);
    output::write_fit_json(&report, create(&cfg.out_dir, output::FIT_JSON)?)?;
    output::write_rank_size_csv(
        &rank_size(&positive),
        create(&cfg.out_dir, output::RANK_SIZE_CSV)?,
    )?;
    output::write_exceedance_csv(
        &exceedance(&positive),
        create(&cfg.out_dir, output::EXCEEDANCE_CSV)?,
    )?;

    let p_mean = fit.p_mean.unwrap_or(f64::NAN);
    writeln!(
        stdout,
        "alpha {} x_min {} n_tail {}/{} ks {} p_mean {} ({})",
        fmt_g6(fit.alpha),
        fmt_g6(fit.x_min),
        fit.n_tail,
        fit.n,
        fmt_g6(fit.ks_stat),
        fmt_g6(p_mean),
        if p_mean < 0.05 {
            "power law rejected at 0.05"
        } else {
            "power law not rejected at 0.05"
        }
    )?;
    Ok(())
}

pub fn cmd_sweep(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let analysis = load_analysis(cfg)?;
    let tol = &cfg.pipeline.tolerance;
    let rr = sweep_rr(&analysis.cycles, &analysis.series, tol, cfg.sweep.rr)?;
    let et = sweep_et(
        &analysis.cycles,
        &analysis.series,
        tol,
        cfg.sweep.et,
        cfg.sweep.et_micro,
    )?;
    output::write_sweep_csv(&rr, create(&cfg.out_dir, output::SENSITIVITY_RR_CSV)?)?;
    output::write_sweep_csv(&et, create(&cfg.out_dir, output::SENSITIVITY_ET_CSV)?)?;
    writeln!(
        stdout,
        "swept {} cycles: {} RR rows, {} ET rows",
        rr.columns.len(),
        rr.row_count(),
        et.row_count()
    )?;
    Ok(())
}

fn fetch_output(cfg: &RunConfig) -> PathBuf {
    cfg.fetch.output.clone().unwrap_or_else(|| {
        let name: String = cfg
            .fetch
            .symbol
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                    c
                } else {
                    '_'
                }
            })
            .collect();
        cfg.out_dir.join(format!("{name}.csv"))
    })
}

#[cfg(feature = "live-fetch")]
pub fn cmd_fetch(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    fetch_with(cfg, &crate::ingest::LiveTransport, stdout)
}

#[cfg(not(feature = "live-fetch"))]
pub fn cmd_fetch(_cfg: &RunConfig, _stdout: &mut dyn Write) -> Result<()> {
    Err(Error::Config(
        "built without the `live-fetch` feature".into(),
    ))
}

/// `fetch` against an arbitrary transport.
pub fn fetch_with(
    cfg: &RunConfig,
    transport: &dyn crate::ingest::HttpGet,
    stdout: &mut dyn Write,
) -> Result<()> {
    let f = &cfg.fetch;
    let parsed = crate::ingest::fetch_history(
        &f.symbol,
        f.start,
        f.end,
        transport,
        &f.url_template,
        CsvOptions::for_tau(cfg.pipeline.tau_days),
    )?;
    let path = fetch_output(cfg);
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut file = BufWriter::new(File::create(&path)?);
    write_csv(&parsed.series, &mut file)?;
    file.flush()?;
    writeln!(
        stdout,
        "{}: {} observations ({} dropped) -> {}",
        f.symbol,
        parsed.series.len(),
        parsed.dropped_rows,
        path.display()
    )?;
    Ok(())
}

fn csv_summary(path: &Path, out: &mut String) -> Result<()> {
    let mut reader = csv::Reader::from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(String::from).collect();
    let rows: Vec<csv::StringRecord> = reader.records().collect::<std::result::Result<_, _>>()?;
    out.push_str(&format!(
        "  rows: {}, columns: {}\n",
        rows.len(),
        header.len()
    ));
    let shown: Vec<&str> = header.iter().take(8).map(String::as_str).collect();
    let more = if header.len() > 8 { ", ..." } else { "" };
    out.push_str(&format!("  header: {}{more}\n", shown.join(", ")));
    for row in rows.iter().take(3) {
        let fields: Vec<&str> = row.iter().take(8).collect();
        out.push_str(&format!("  | {}\n", fields.join(", ")));
    }
    if let Some(idx) = header.iter().position(|h| h == "recovery_type") {
        let mut counts = std::collections::BTreeMap::new();
        for row in &rows {
            *counts
                .entry(row.get(idx).unwrap_or("").to_string())
                .or_insert(0usize) += 1;
        }
        let parts: Vec<String> = counts.iter().map(|(k, v)| format!("{k} {v}")).collect();
        out.push_str(&format!("  recovery types: {}\n", parts.join(", ")));
    }
    Ok(())
}

pub fn cmd_report(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let files = [
        output::CYCLES_CSV,
        output::METRICS_CSV,
        output::FIT_JSON,
        output::RANK_SIZE_CSV,
        output::EXCEEDANCE_CSV,
        output::SENSITIVITY_RR_CSV,
        output::SENSITIVITY_ET_CSV,
    ];
    let mut text = String::new();
    let mut found = 0;
    for name in files {
        let path = cfg.out_dir.join(name);
        if !path.exists() {
            continue;
        }
        found += 1;
        text.push_str(&format!("== {name}\n"));
        if name.ends_with(".json") {
            let value: serde_json::Value = serde_json::from_reader(File::open(&path)?)?;
            for key in [
                "alpha", "x_min", "n_tail", "n", "ks_stat", "p_mean", "reps", "seed",
            ] {
                if let Some(v) = value.get(key) {
                    let shown = v.as_f64().map_or_else(|| v.to_string(), fmt_g6);
                    text.push_str(&format!("  {key}: {shown}\n"));
                }
            }
        } else {
            csv_summary(&path, &mut text)?;
        }
    }
    if found == 0 {
        return Err(Error::Config(format!(
            "no artifacts in {}; run `analyze` first",
            cfg.out_dir.display()
        )));
    }
    fs::write(cfg.out_dir.join("report.txt"), &text)?;
    stdout.write_all(text.as_bytes())?;
    Ok(())
}
