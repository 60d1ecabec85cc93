use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ic_rates::ensemble::{GaussianEnsemble, DEFAULT_SEED};
use ic_rates::format::{fmt_g12, map_csv, region_csv};
use ic_rates::protocol::{audit, run_algorithm, Algorithm};
use ic_rates::region::capacity_region;
use ic_rates::sum_rate::{
    candidates, classify, classify_map, oracle_generalized, sumrate_12_minmax, Mode, SweepSpec,
};
use ic_rates::{Assignment, Channel, Classification, DecodeConfig, SumRateResult, TOLERANCE};
use serde_json::json;

const SEED_ENV: &str = "IC_RATES_SEED";

/// Achievable rates and sum-rate regimes of two-user interference channels.
#[derive(Parser)]
#[command(name = "ic-rates", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Achievable rate region as four convex pieces.
    Region(Common),
    /// Sum rate of every message assignment and decoding configuration.
    Sumrate(Common),
    /// Closed-form sum-rate regime of one channel.
    Classify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = ModeArg::Traditional)]
        mode: ModeArg,
    },
    /// Regime map along one channel parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// `<var>:<min>:<max>:<steps>[:log]`, var one of cross, h12, h21, power.
        #[arg(long)]
        sweep: String,
        #[arg(long, value_enum, default_value_t = ModeArg::Traditional)]
        mode: ModeArg,
    },
    /// Run a rate-determination protocol and audit it. Prints the message
    /// trace as JSON lines followed by the audit report.
    Protocol {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        algorithm: u8,
    },
    /// Check the closed-form classifiers against exhaustive search on a
    /// seeded random ensemble of Gaussian channels.
    Check {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value = "-")]
        out: String,
    },
}

#[derive(Args)]
struct Common {
    /// Channel JSON: a file path, `-` for stdin, or the document itself.
    #[arg(long)]
    channel: String,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file, or `-` for stdout.
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Traditional,
    Generalized,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Traditional => Mode::Traditional,
            ModeArg::Generalized => Mode::Generalized,
        }
    }
}

fn read_channel(arg: &str) -> anyhow::Result<Channel> {
    let text = if arg == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).context("reading channel from stdin")?;
        s
    } else if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(PathBuf::from(arg)).with_context(|| format!("reading channel file {arg}"))?
    };
    let ch = Channel::from_json(&text).context("malformed channel")?;
    let violations = ch.validate();
    if !violations.is_empty() {
        return Err(ic_rates::Error::InvalidChannel(violations).into());
    }
    Ok(ch)
}

fn write_output(out: &str, text: &str) -> anyhow::Result<()> {
    if out == "-" {
        let mut stdout = io::stdout().lock();
        stdout.write_all(text.as_bytes())?;
        stdout.flush()?;
    } else {
        fs::write(out, text).with_context(|| format!("writing {out}"))?;
    }
    Ok(())
}

fn json_line<T: serde::Serialize>(value: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn assignment_label(a: Assignment) -> String {
    format!("({},{})", a.a1(), a.a2())
}

fn config_label(c: Option<DecodeConfig>) -> String {
    c.map(|c| c.code()).unwrap_or_else(|| "none".into())
}

fn regime_label(r: &SumRateResult) -> &'static str {
    r.regime.map(|r| r.label()).unwrap_or("none")
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn cmd_region(common: &Common) -> anyhow::Result<ExitCode> {
    let region = capacity_region(&read_channel(&common.channel)?.primitives()?);
    let text = match common.format {
        Format::Csv => region_csv(&region)?,
        Format::Json => json_line(&region)?,
    };
    write_output(&common.out, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sumrate(common: &Common) -> anyhow::Result<ExitCode> {
    let p = read_channel(&common.channel)?.primitives()?;
    let all = candidates(&p);
    let text = match common.format {
        Format::Csv => csv_text(
            &["assignment", "config", "value"],
            all.iter()
                .map(|&(a, c, v)| vec![assignment_label(a), config_label(c), fmt_g12(v)])
                .collect(),
        ),
        Format::Json => json_line(&json!({
            "traditional": sumrate_12_minmax(&p),
            "generalized": oracle_generalized(&p),
            "candidates": all
                .iter()
                .map(|&(a, c, v)| json!({ "assignment": a, "config": config_label(c), "value": v }))
                .collect::<Vec<_>>(),
        }))?,
    };
    write_output(&common.out, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_classify(common: &Common, mode: Mode) -> anyhow::Result<ExitCode> {
    let p = read_channel(&common.channel)?.primitives()?;
    let c: Classification = classify(&p, mode);
    let text = match common.format {
        Format::Csv => csv_text(
            &["regime", "value", "assignment", "config", "tie_flag", "tie_comparison"],
            vec![vec![
                regime_label(&c.result).to_string(),
                fmt_g12(c.result.value),
                assignment_label(c.result.assignment),
                config_label(c.result.config),
                c.tie.is_some().to_string(),
                c.tie.as_ref().map(|t| t.comparison.clone()).unwrap_or_default(),
            ]],
        ),
        Format::Json => json_line(&c)?,
    };
    write_output(&common.out, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(common: &Common, sweep: &str, mode: Mode) -> anyhow::Result<ExitCode> {
    let spec: SweepSpec = sweep.parse()?;
    let template = match read_channel(&common.channel)? {
        Channel::Gaussian(ch) => ch,
        Channel::Dmc(_) => bail!("sweeps need a gaussian channel template"),
    };
    let rows = classify_map(&template, spec.axis, &spec.values(), mode)?;
    let text = match common.format {
        Format::Csv => map_csv(&rows)?,
        Format::Json => json_line(&rows)?,
    };
    write_output(&common.out, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_protocol(common: &Common, algorithm: u8) -> anyhow::Result<ExitCode> {
    if common.format == Format::Csv {
        bail!("protocol output is JSON lines only");
    }
    let ch = read_channel(&common.channel)?;
    let outcome = run_algorithm(&ch, Algorithm::from_number(algorithm)?)?;
    let report = audit(&outcome, &ch.primitives()?);
    let mut text = outcome.trace_json_lines();
    text.push_str(&report.to_json());
    text.push('\n');
    write_output(&common.out, &text)?;
    Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn resolve_seed(flag: Option<u64>) -> anyhow::Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().with_context(|| format!("{SEED_ENV}={v:?} is not an unsigned integer")),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn cmd_check(seed: Option<u64>, samples: usize, out: &str) -> anyhow::Result<ExitCode> {
    let seed = resolve_seed(seed)?;
    let mut ensemble = GaussianEnsemble::new(seed, 3.0, (0.1, 100.0), 1e-6);
    let mut worst = [0.0f64; 2];
    let mut failures = 0usize;
    for (_, p) in ensemble.by_ref().take(samples) {
        let gaps = [
            (classify(&p, Mode::Traditional).result.value - sumrate_12_minmax(&p).value).abs(),
            (classify(&p, Mode::Generalized).result.value - oracle_generalized(&p).value).abs(),
        ];
        if gaps.iter().any(|&g| g > TOLERANCE) {
            failures += 1;
        }
        worst = [worst[0].max(gaps[0]), worst[1].max(gaps[1])];
    }
    let pass = failures == 0;
    let text = json_line(&json!({
        "seed": seed,
        "samples": samples,
        "resampled": ensemble.resampled,
        "max_gap_traditional": worst[0],
        "max_gap_generalized": worst[1],
        "failures": failures,
        "pass": pass,
    }))?;
    write_output(out, &text)?;
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Region(common) => cmd_region(&common),
        Command::Sumrate(common) => cmd_sumrate(&common),
        Command::Classify { common, mode } => cmd_classify(&common, mode.into()),
        Command::Sweep { common, sweep, mode } => cmd_sweep(&common, &sweep, mode.into()),
        Command::Protocol { common, algorithm } => cmd_protocol(&common, algorithm),
        Command::Check { seed, samples, out } => cmd_check(seed, samples, &out),
    }
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
