//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::domain::{HorizonScenario, MarketConfig, PriceSequence};
use crate::error::{Error, Result};
use crate::harness::{
    evaluate, run_sweep, sweep_to_csv, sweep_to_json, AlphaSpec, Evaluation, SweepAxis, SweepBase,
    SweepMode, SweepSource, SweepSpec,
};
use crate::instances::{load_csv, write_csv, GeneratorKind, GeneratorSpec, PrefixSpec};
use crate::oracle::opt_offline;
use crate::ratios::{
    bounds_augmented, cr_known, cr_known_no_box, cr_notice, cr_unknown, tau_min,
};

/// Environment variable naming the directory that relative `--out` paths
/// are resolved against.
pub const OUT_DIR_ENV: &str = "OCONV_OUT_DIR";

const DEFAULT_T: usize = 288;
const DEFAULT_K: f64 = 68.0;
const DEFAULT_B: f64 = 6.0;
const DEFAULT_P_MIN: f64 = 5.0;
const DEFAULT_P_MAX: f64 = 1000.0;

#[derive(Debug, Parser)]
#[command(name = "oconv", version, about = "Online conversion traders, offline optimum and ratio experiments")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Base seed for generated instances.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// TOML file with default values for the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    Known,
    Notice,
    Unknown,
    Prediction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenName {
    GeometricLadder,
    UniformRandom,
    WorstCaseIncreasing,
    SwitchFamily,
    AllMin,
    AllMax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Axis {
    #[value(name = "T", alias = "t")]
    T,
    B,
    Theta,
    Lambda,
    PredictionError,
}

#[derive(Debug, Default, Args)]
struct MarketArgs {
    /// Horizon in steps.
    #[arg(long = "T")]
    horizon: Option<usize>,
    /// Budget.
    #[arg(long)]
    k: Option<f64>,
    /// Rate limit per step.
    #[arg(long)]
    b: Option<f64>,
    #[arg(long = "p-min")]
    p_min: Option<f64>,
    #[arg(long = "p-max")]
    p_max: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the worst-case ratios for a parameter set.
    Ratio {
        /// Fluctuation ratio; defaults to p_max / p_min.
        #[arg(long)]
        theta: Option<f64>,
        #[command(flatten)]
        market: MarketArgs,
        #[arg(long)]
        lambda: Option<f64>,
        /// Predicted horizon for the augmented bounds (defaults to T).
        #[arg(long)]
        tpred: Option<usize>,
    },
    /// Run one trader and the offline optimum on the same prices.
    Simulate {
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[command(flatten)]
        market: MarketArgs,
        /// CSV price file; otherwise prices come from --generator.
        #[arg(long)]
        prices: Option<PathBuf>,
        /// Split the price file into days of this many slots.
        #[arg(long)]
        slots_per_day: Option<usize>,
        #[arg(long, value_enum, default_value = "geometric-ladder")]
        generator: GenName,
        /// Switch step for the switch-family generator.
        #[arg(long)]
        tau: Option<usize>,
        /// Balance parameter: `auto` or a number >= 1.
        #[arg(long)]
        alpha: Option<String>,
        /// Balance of the unknown-horizon share in prediction mode.
        #[arg(long)]
        alpha2: Option<String>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        tpred: Option<usize>,
        /// Step at which the horizon notice arrives (notice mode).
        #[arg(long)]
        notify_step: Option<usize>,
    },
    /// Mean and worst empirical ratio over seeded instances along one axis.
    Sweep {
        #[arg(long, value_enum)]
        axis: Axis,
        /// Comma-separated axis values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Comma-separated modes.
        #[arg(long, value_enum, value_delimiter = ',', default_value = "known,notice,unknown")]
        modes: Vec<Mode>,
        #[command(flatten)]
        market: MarketArgs,
        #[arg(long)]
        lambda: Option<f64>,
        /// Predicted horizon as a multiple of T.
        #[arg(long, default_value_t = 1.0)]
        tpred_factor: f64,
        #[arg(long, default_value_t = 20)]
        replications: usize,
        #[arg(long, value_enum, default_value = "geometric-ladder")]
        generator: GenName,
        #[arg(long)]
        alpha: Option<String>,
    },
    /// Offline optimum for the prices in a CSV file.
    Oracle {
        #[arg(long)]
        prices: PathBuf,
        #[arg(long)]
        slots_per_day: Option<usize>,
        #[command(flatten)]
        market: MarketArgs,
    },
    /// Emit generated price sequences as CSV.
    Gen {
        #[arg(long, value_enum, default_value = "geometric-ladder")]
        generator: GenName,
        #[command(flatten)]
        market: MarketArgs,
        #[arg(long)]
        tau: Option<usize>,
        /// Level parameter of the worst-case generator.
        #[arg(long)]
        alpha: Option<f64>,
        /// Number of sequences; they are concatenated with running step indices.
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
}

/// Keys accepted in the `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    mode: Option<Mode>,
    #[serde(rename = "T")]
    horizon: Option<usize>,
    k: Option<f64>,
    b: Option<f64>,
    p_min: Option<f64>,
    p_max: Option<f64>,
    alpha: Option<toml::Value>,
    lambda: Option<f64>,
    tpred: Option<usize>,
    seed: Option<u64>,
    format: Option<Format>,
    out: Option<PathBuf>,
}

impl FileConfig {
    fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Parse {
            line: e.span().map_or(0, |s| text[..s.start].lines().count().max(1)),
            reason: format!("{}: {}", path.display(), e.message()),
        })
    }

    fn alpha_text(&self) -> Option<String> {
        match &self.alpha {
            Some(toml::Value::String(s)) => Some(s.clone()),
            Some(toml::Value::Float(f)) => Some(f.to_string()),
            Some(toml::Value::Integer(i)) => Some(i.to_string()),
            Some(other) => Some(other.to_string()),
            None => None,
        }
    }
}

/// `auto` (or absent) gives `None`.
fn parse_alpha(text: Option<&str>) -> Result<Option<f64>> {
    match text.map(str::trim) {
        None | Some("auto") => Ok(None),
        Some(t) => {
            let v: f64 = t
                .parse()
                .map_err(|_| Error::BadScenario(format!("alpha must be `auto` or a number, got {t:?}")))?;
            if !(v >= 1.0) {
                return Err(Error::BadAlpha(v));
            }
            Ok(Some(v))
        }
    }
}

/// Flag values after applying the config file and defaults.
struct Settings {
    horizon: Option<usize>,
    cfg: MarketConfig,
    format: Format,
    seed: u64,
    out: Option<PathBuf>,
}

fn settings(market: &MarketArgs, global: &Cli, file: &FileConfig) -> Result<Settings> {
    let cfg = MarketConfig::new(
        market.k.or(file.k).unwrap_or(DEFAULT_K),
        market.b.or(file.b).unwrap_or(DEFAULT_B),
        market.p_min.or(file.p_min).unwrap_or(DEFAULT_P_MIN),
        market.p_max.or(file.p_max).unwrap_or(DEFAULT_P_MAX),
    )?;
    Ok(Settings {
        horizon: market.horizon.or(file.horizon),
        cfg,
        format: global.format.or(file.format).unwrap_or(Format::Csv),
        seed: global.seed.or(file.seed).unwrap_or(0),
        out: global.out.clone().or_else(|| file.out.clone()),
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => {
            let path = match std::env::var_os(OUT_DIR_ENV) {
                Some(dir) if path.is_relative() => Path::new(&dir).join(path),
                _ => path.to_path_buf(),
            };
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)
                    .map_err(|e| Error::Io(format!("{}: {e}", parent.display())))?;
            }
            std::fs::write(&path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
        }
    }
}

fn generator_kind(name: GenName, seed: u64, tau: Option<usize>, alpha: Option<f64>, horizon: usize) -> GeneratorKind {
    match name {
        GenName::GeometricLadder => GeneratorKind::GeometricLadder { seed },
        GenName::UniformRandom => GeneratorKind::UniformRandom { seed },
        GenName::WorstCaseIncreasing => GeneratorKind::WorstCaseIncreasing { alpha },
        GenName::SwitchFamily => GeneratorKind::SwitchFamily {
            tau: tau.unwrap_or(horizon.div_ceil(2).max(1)),
            prefix: PrefixSpec::Random { seed },
        },
        GenName::AllMin => GeneratorKind::AllMin,
        GenName::AllMax => GeneratorKind::AllMax,
    }
}

fn sweep_source(name: GenName) -> Result<SweepSource> {
    match name {
        GenName::GeometricLadder => Ok(SweepSource::GeometricLadder),
        GenName::UniformRandom => Ok(SweepSource::UniformRandom),
        GenName::SwitchFamily => Ok(SweepSource::SwitchFamily),
        GenName::WorstCaseIncreasing => Ok(SweepSource::WorstCaseIncreasing),
        GenName::AllMin | GenName::AllMax => Err(Error::BadScenario(
            "constant generators are not available for sweeps".into(),
        )),
    }
}

fn cmd_ratio(
    s: &Settings,
    theta: Option<f64>,
    lambda: Option<f64>,
    tpred: Option<usize>,
) -> Result<String> {
    let theta = theta.unwrap_or(s.cfg.theta());
    let mut rows: Vec<(&str, String)> = vec![
        ("theta", theta.to_string()),
        ("cr_unknown", cr_unknown(theta)?.to_string()),
        ("cr_notice", cr_notice(theta)?.to_string()),
    ];
    if let Some(t) = s.horizon {
        rows.push(("cr_known_no_box", cr_known_no_box(theta, t)?.to_string()));
        rows.push(("tau_min", tau_min(t, s.cfg.k, s.cfg.b).to_string()));
        rows.push(("cr_known", cr_known(theta, t, s.cfg.k, s.cfg.b)?.to_string()));
    }
    if let Some(lambda) = lambda {
        let predicted = tpred.or(s.horizon).ok_or_else(|| {
            Error::BadScenario("augmented bounds need --tpred or --T".into())
        })?;
        let split = MarketConfig {
            k: s.cfg.k * (1.0 - lambda),
            b: s.cfg.b * (1.0 - lambda),
            ..s.cfg
        };
        let (k1, b1) = if lambda < 1.0 { (split.k, split.b) } else { (s.cfg.k, s.cfg.b) };
        let bounds = bounds_augmented(theta, predicted, k1, b1, lambda)?;
        rows.push(("lambda", lambda.to_string()));
        rows.push(("consistency", bounds.consistency.to_string()));
        rows.push(("robustness", bounds.robustness.to_string()));
    }
    Ok(match s.format {
        Format::Csv => {
            let mut out = String::from("quantity,value\n");
            for (q, v) in &rows {
                let _ = writeln!(out, "{q},{v}");
            }
            out
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Row<'a> {
                quantity: &'a str,
                value: serde_json::Value,
            }
            let json: Vec<Row> = rows
                .iter()
                .map(|(q, v)| Row {
                    quantity: q,
                    value: v
                        .parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .map(serde_json::Value::from)
                        .unwrap_or_else(|| serde_json::Value::from(v.as_str())),
                })
                .collect();
            serde_json::to_string_pretty(&json).expect("rows serialize") + "\n"
        }
    })
}

fn read_days(path: &Path, cfg: &MarketConfig, slots: Option<usize>) -> Result<Vec<PriceSequence>> {
    load_csv(path, cfg, slots)
}

#[derive(Serialize)]
struct DayResult<'a> {
    day: usize,
    report: &'a crate::harness::EcrReport,
    allocations: &'a [f64],
}

fn render_simulation(format: Format, days: &[(PriceSequence, Evaluation)]) -> String {
    match format {
        Format::Json => {
            let rows: Vec<DayResult> = days
                .iter()
                .enumerate()
                .map(|(i, (_, e))| DayResult {
                    day: i,
                    report: &e.report,
                    allocations: &e.schedule.allocations,
                })
                .collect();
            serde_json::to_string_pretty(&rows).expect("reports serialize") + "\n"
        }
        Format::Csv => {
            let mut out = String::from(
                "day,mode,opt_revenue,alg_revenue,ecr,bound,consistency_bound,alpha,alpha2,box_class,stranded,warnings\n",
            );
            for (i, (_, e)) in days.iter().enumerate() {
                let r = &e.report;
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{}",
                    i,
                    r.scenario.label(),
                    r.opt_revenue,
                    r.alg_revenue,
                    r.ecr,
                    r.bound,
                    r.consistency_bound.map(|v| v.to_string()).unwrap_or_default(),
                    r.alpha_used,
                    r.alpha2_used.map(|v| v.to_string()).unwrap_or_default(),
                    r.box_class,
                    r.stranded_budget,
                    r.warnings.join("; ").replace(',', ";"),
                );
            }
            out.push_str("\nday,t,price,allocation\n");
            for (i, (prices, e)) in days.iter().enumerate() {
                for (t, (p, x)) in prices.iter().zip(&e.schedule.allocations).enumerate() {
                    let _ = writeln!(out, "{},{},{},{}", i, t + 1, p, x);
                }
            }
            out
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    s: &Settings,
    mode: Mode,
    prices: Option<&Path>,
    slots_per_day: Option<usize>,
    generator: GenName,
    tau: Option<usize>,
    alphas: AlphaSpec,
    lambda: Option<f64>,
    tpred: Option<usize>,
    notify_step: Option<usize>,
) -> Result<String> {
    let days: Vec<(PriceSequence, Option<GeneratorSpec>)> = match prices {
        Some(path) => read_days(path, &s.cfg, slots_per_day)?
            .into_iter()
            .map(|d| (d, None))
            .collect(),
        None => {
            let horizon = s.horizon.unwrap_or(DEFAULT_T);
            let spec = GeneratorSpec::new(
                generator_kind(generator, s.seed, tau, None, horizon),
                horizon,
            );
            vec![(spec.generate(&s.cfg)?, Some(spec))]
        }
    };
    let mut results = Vec::with_capacity(days.len());
    for (prices, spec) in days {
        let horizon = prices.len();
        if let Some(t) = s.horizon {
            if t != horizon && mode != Mode::Unknown && mode != Mode::Prediction {
                return Err(Error::HorizonMismatch {
                    expected: t,
                    got: horizon,
                });
            }
        }
        let scenario = match mode {
            Mode::Known => HorizonScenario::Known { horizon },
            Mode::Notice => HorizonScenario::Notice {
                notify_step,
                horizon,
            },
            Mode::Unknown => HorizonScenario::Unknown,
            Mode::Prediction => HorizonScenario::Prediction {
                predicted: tpred.or(s.horizon).unwrap_or(horizon),
                lambda: lambda.unwrap_or(0.5),
            },
        };
        let eval = evaluate(&s.cfg, &scenario, alphas, &prices, spec)?;
        results.push((prices, eval));
    }
    Ok(render_simulation(s.format, &results))
}

fn cmd_oracle(s: &Settings, path: &Path, slots: Option<usize>) -> Result<String> {
    let days = read_days(path, &s.cfg, slots)?;
    let schedules: Vec<_> = days.iter().map(|d| opt_offline(&s.cfg, d)).collect();
    Ok(match s.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Row<'a> {
                day: usize,
                opt_revenue: f64,
                sold: f64,
                allocations: &'a [f64],
            }
            let rows: Vec<Row> = schedules
                .iter()
                .enumerate()
                .map(|(i, sch)| Row {
                    day: i,
                    opt_revenue: sch.revenue,
                    sold: sch.total(),
                    allocations: &sch.allocations,
                })
                .collect();
            serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n"
        }
        Format::Csv => {
            let mut out = String::from("day,opt_revenue,sold\n");
            for (i, sch) in schedules.iter().enumerate() {
                let _ = writeln!(out, "{},{},{}", i, sch.revenue, sch.total());
            }
            out.push_str("\nday,t,price,allocation\n");
            for (i, (d, sch)) in days.iter().zip(&schedules).enumerate() {
                for (t, (p, x)) in d.iter().zip(&sch.allocations).enumerate() {
                    let _ = writeln!(out, "{},{},{},{}", i, t + 1, p, x);
                }
            }
            out
        }
    })
}

fn cmd_gen(
    s: &Settings,
    generator: GenName,
    tau: Option<usize>,
    alpha: Option<f64>,
    count: usize,
) -> Result<String> {
    let horizon = s.horizon.unwrap_or(DEFAULT_T);
    let mut all = Vec::with_capacity(count);
    for i in 0..count {
        let seed = s.seed.wrapping_add(i as u64);
        let spec = GeneratorSpec::new(generator_kind(generator, seed, tau, alpha, horizon), horizon);
        all.push(spec.generate(&s.cfg)?.into_inner());
    }
    Ok(match s.format {
        Format::Csv => write_csv(&all.concat()),
        Format::Json => serde_json::to_string_pretty(&all).expect("prices serialize") + "\n",
    })
}

fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let file_alpha = file.alpha_text();
    let text = match &cli.command {
        Command::Ratio {
            theta,
            market,
            lambda,
            tpred,
        } => {
            let s = settings(market, &cli, &file)?;
            let out = cmd_ratio(&s, *theta, lambda.or(file.lambda), tpred.or(file.tpred))?;
            emit(s.out.as_deref(), &out)?;
            return Ok(());
        }
        Command::Simulate {
            mode,
            market,
            prices,
            slots_per_day,
            generator,
            tau,
            alpha,
            alpha2,
            lambda,
            tpred,
            notify_step,
        } => {
            let s = settings(market, &cli, &file)?;
            let alphas = AlphaSpec {
                alpha: parse_alpha(alpha.as_deref().or(file_alpha.as_deref()))?,
                alpha2: parse_alpha(alpha2.as_deref())?,
            };
            let mode = mode.or(file.mode).unwrap_or(Mode::Known);
            let out = cmd_simulate(
                &s,
                mode,
                prices.as_deref(),
                *slots_per_day,
                *generator,
                *tau,
                alphas,
                lambda.or(file.lambda),
                tpred.or(file.tpred),
                *notify_step,
            )?;
            (s, out)
        }
        Command::Sweep {
            axis,
            values,
            modes,
            market,
            lambda,
            tpred_factor,
            replications,
            generator,
            alpha,
        } => {
            let s = settings(market, &cli, &file)?;
            let spec = SweepSpec {
                axis: match axis {
                    Axis::T => SweepAxis::T,
                    Axis::B => SweepAxis::B,
                    Axis::Theta => SweepAxis::Theta,
                    Axis::Lambda => SweepAxis::Lambda,
                    Axis::PredictionError => SweepAxis::PredictionError,
                },
                values: values.clone(),
                modes: modes
                    .iter()
                    .map(|m| match m {
                        Mode::Known => SweepMode::Known,
                        Mode::Notice => SweepMode::Notice,
                        Mode::Unknown => SweepMode::Unknown,
                        Mode::Prediction => SweepMode::Prediction,
                    })
                    .collect(),
                base: SweepBase {
                    horizon: s.horizon.unwrap_or(DEFAULT_T),
                    k: s.cfg.k,
                    b: s.cfg.b,
                    p_min: s.cfg.p_min,
                    p_max: s.cfg.p_max,
                    lambda: lambda.or(file.lambda).unwrap_or(0.5),
                    tpred_factor: *tpred_factor,
                    alphas: AlphaSpec {
                        alpha: parse_alpha(alpha.as_deref().or(file_alpha.as_deref()))?,
                        alpha2: None,
                    },
                },
                source: sweep_source(*generator)?,
                replications: *replications,
                seed: s.seed,
            };
            let rows = run_sweep(&spec)?;
            let out = match s.format {
                Format::Csv => sweep_to_csv(&rows),
                Format::Json => sweep_to_json(&rows),
            };
            (s, out)
        }
        Command::Oracle {
            prices,
            slots_per_day,
            market,
        } => {
            let s = settings(market, &cli, &file)?;
            let out = cmd_oracle(&s, prices, *slots_per_day)?;
            (s, out)
        }
        Command::Gen {
            generator,
            market,
            tau,
            alpha,
            count,
        } => {
            let s = settings(market, &cli, &file)?;
            let out = cmd_gen(&s, *generator, *tau, *alpha, *count)?;
            (s, out)
        }
    };
    let (s, out) = text;
    emit(s.out.as_deref(), &out)
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code: 0 on success, 1 for invalid input, 2 for I/O
/// failures.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            eprintln!("oconv: {}", first.trim_start_matches("error: "));
            return 1;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("oconv: {e}");
            if e.is_io() {
                2
            } else {
                1
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_parsing() {
        assert_eq!(parse_alpha(None).unwrap(), None);
        assert_eq!(parse_alpha(Some("auto")).unwrap(), None);
        assert_eq!(parse_alpha(Some("2.5")).unwrap(), Some(2.5));
        assert!(matches!(parse_alpha(Some("0.5")), Err(Error::BadAlpha(_))));
        assert!(parse_alpha(Some("fast")).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(cli_main(["oconv", "ratio", "--theta", "200"]), 0);
        assert_eq!(cli_main(["oconv", "ratio", "--theta", "0.5"]), 1);
        assert_eq!(cli_main(["oconv", "bogus"]), 1);
        assert_eq!(
            cli_main(["oconv", "oracle", "--prices", "/nonexistent/prices.csv"]),
            2
        );
    }

    #[test]
    fn config_file_supplies_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.toml");
        std::fs::write(
            &cfg,
            "mode = \"unknown\"\nT = 12\nk = 10.0\nb = 2.0\np_min = 1.0\np_max = 20.0\nalpha = \"auto\"\nseed = 3\nformat = \"json\"\n",
        )
        .unwrap();
        let out = dir.path().join("sim.json");
        let code = cli_main([
            "oconv".into(),
            "simulate".into(),
            "--config".into(),
            cfg.clone().into_os_string(),
            "--out".into(),
            out.clone().into_os_string(),
        ]);
        assert_eq!(code, 0);
        let text = std::fs::read_to_string(&out).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v[0]["report"]["scenario"]["mode"], "unknown");
        assert_eq!(v[0]["allocations"].as_array().unwrap().len(), 12);

        std::fs::write(&cfg, "speed = 3\n").unwrap();
        let code = cli_main(["oconv".into(), "ratio".into(), "--config".into(), cfg.into_os_string()]);
        assert_eq!(code, 1);
    }
}
