//! Price-sequence generators and CSV ingestion.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{HorizonScenario, MarketConfig, PriceSequence};
use crate::error::{Error, Result};
use crate::oracle::opt_offline;
use crate::ratios::alpha_tau;
use crate::trader::run_trader;

/// How the first `tau - 1` prices of a switch-family instance are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "prefix", rename_all = "snake_case")]
pub enum PrefixSpec {
    Random { seed: u64 },
    /// Geometric ramp from just above `p_min` to `p_max`.
    Increasing,
    Explicit { prices: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    /// `alpha = None` builds the levels for the box-free known-horizon ratio.
    WorstCaseIncreasing { alpha: Option<f64> },
    SwitchFamily { tau: usize, prefix: PrefixSpec },
    AllMin,
    AllMax,
    UniformRandom { seed: u64 },
    /// Log-uniform prices.
    GeometricLadder { seed: u64 },
    /// Day `day` (0-based) of a CSV file split into `length`-slot days.
    CsvFile { path: PathBuf, day: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub kind: GeneratorKind,
    pub length: usize,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, length: usize) -> Self {
        GeneratorSpec { kind, length }
    }

    pub fn generate(&self, cfg: &MarketConfig) -> Result<PriceSequence> {
        let t = self.length;
        match &self.kind {
            GeneratorKind::WorstCaseIncreasing { alpha } => {
                let alpha = match alpha {
                    Some(a) => *a,
                    None => alpha_tau(cfg.theta(), t)?,
                };
                gen_worst_increasing(cfg, t, alpha)
            }
            GeneratorKind::SwitchFamily { tau, prefix } => gen_switch_family(cfg, t, *tau, prefix),
            GeneratorKind::AllMin => PriceSequence::new(vec![cfg.p_min; t]),
            GeneratorKind::AllMax => PriceSequence::new(vec![cfg.p_max; t]),
            GeneratorKind::UniformRandom { seed } => gen_random(cfg, t, RandomKind::Uniform, *seed),
            GeneratorKind::GeometricLadder { seed } => {
                gen_random(cfg, t, RandomKind::LogUniform, *seed)
            }
            GeneratorKind::CsvFile { path, day } => {
                let days = load_csv(path, cfg, Some(t))?;
                days.into_iter().nth(*day).ok_or_else(|| Error::Parse {
                    line: 0,
                    reason: format!("file has no day {day}"),
                })
            }
        }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            GeneratorKind::WorstCaseIncreasing { .. } => "worst_case_increasing".into(),
            GeneratorKind::SwitchFamily { tau, .. } => format!("switch_family_{tau}"),
            GeneratorKind::AllMin => "all_min".into(),
            GeneratorKind::AllMax => "all_max".into(),
            GeneratorKind::UniformRandom { .. } => "uniform_random".into(),
            GeneratorKind::GeometricLadder { .. } => "geometric_ladder".into(),
            GeneratorKind::CsvFile { .. } => "csv_file".into(),
        }
    }
}

/// Strictly increasing prices ending at `p_max`, placed on the pseudo-cost
/// levels of a trader with balance `alpha` that sells the same amount at
/// every step: `p_t = p_min + (alpha - 1) p_min r^(-t)` with
/// `r = ((alpha - 1)/(theta - 1))^(1/T)`.
pub fn gen_worst_increasing(cfg: &MarketConfig, horizon: usize, alpha: f64) -> Result<PriceSequence> {
    let theta = cfg.theta();
    if !(theta > 1.0) {
        return Err(Error::BadTheta(theta));
    }
    if horizon == 0 {
        return Err(Error::EmptyPrices);
    }
    if horizon == 1 {
        return PriceSequence::new(vec![cfg.p_max]);
    }
    if !(alpha > 1.0) || alpha > theta {
        return Err(Error::BadAlpha(alpha));
    }
    let q = (alpha - 1.0) / (theta - 1.0);
    let log_r = q.ln() / horizon as f64;
    let mut prices: Vec<f64> = (1..=horizon)
        .map(|t| cfg.p_min + (alpha - 1.0) * cfg.p_min * (-(t as f64) * log_r).exp())
        .map(|p| p.min(cfg.p_max))
        .collect();
    *prices.last_mut().expect("horizon >= 2") = cfg.p_max;
    PriceSequence::new(prices)
}

/// Ratio of the offline optimum to a known-horizon trader run at `alpha`.
fn known_ecr(cfg: &MarketConfig, alpha: f64, prices: &[f64]) -> Result<f64> {
    let run = run_trader(
        cfg,
        &HorizonScenario::Known {
            horizon: prices.len(),
        },
        alpha,
        prices,
    )?;
    Ok(opt_offline(cfg, prices).revenue / run.schedule.revenue)
}

/// Searches the level parameter of [`gen_worst_increasing`] for the
/// sequence that is hardest for a known-horizon trader at `alpha`. Starts
/// at the trader's own balance and stops early once the ratio reaches
/// `target`; otherwise runs a golden-section search over `(1, theta]`.
/// Deterministic. Returns the sequence and the ratio it achieves.
pub fn tune_worst_increasing(
    cfg: &MarketConfig,
    horizon: usize,
    alpha: f64,
    target: f64,
) -> Result<(PriceSequence, f64)> {
    let theta = cfg.theta();
    if horizon == 1 || alpha <= 1.0 {
        let seq = gen_worst_increasing(cfg, horizon, alpha.max(theta.sqrt()).min(theta))?;
        let ecr = known_ecr(cfg, alpha, &seq)?;
        return Ok((seq, ecr));
    }
    let eval = |level: f64| -> Result<(PriceSequence, f64)> {
        let seq = gen_worst_increasing(cfg, horizon, level)?;
        let ecr = known_ecr(cfg, alpha, &seq)?;
        Ok((seq, ecr))
    };
    let mut best = eval(alpha)?;
    if best.1 >= target {
        return Ok(best);
    }
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (1.0 + 1e-9 * (theta - 1.0), theta);
    let mut a = hi - golden * (hi - lo);
    let mut b = lo + golden * (hi - lo);
    let mut fa = eval(a)?;
    let mut fb = eval(b)?;
    for _ in 0..80 {
        if fa.1 >= fb.1 {
            hi = b;
            b = a;
            fb = fa;
            a = hi - golden * (hi - lo);
            fa = eval(a)?;
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + golden * (hi - lo);
            fb = eval(b)?;
        }
        let cand = if fa.1 >= fb.1 { &fa } else { &fb };
        if cand.1 > best.1 {
            best = cand.clone();
        }
        if best.1 >= target || hi - lo < 1e-10 * theta {
            break;
        }
    }
    Ok(best)
}

/// Arbitrary prefix of length `tau - 1` followed by `p_min` up to `horizon`.
pub fn gen_switch_family(
    cfg: &MarketConfig,
    horizon: usize,
    tau: usize,
    prefix: &PrefixSpec,
) -> Result<PriceSequence> {
    if tau == 0 || tau > horizon {
        return Err(Error::BadScenario(format!(
            "switch step {tau} must lie in [1, {horizon}]"
        )));
    }
    let n = tau - 1;
    let mut prices = match prefix {
        PrefixSpec::Random { seed } => {
            gen_random(cfg, n.max(1), RandomKind::LogUniform, *seed)?.into_inner()
        }
        PrefixSpec::Increasing => (1..=n.max(1))
            .map(|i| cfg.p_min * cfg.theta().powf(i as f64 / n.max(1) as f64))
            .map(|p| p.min(cfg.p_max))
            .collect(),
        PrefixSpec::Explicit { prices } => {
            if prices.len() != n {
                return Err(Error::BadScenario(format!(
                    "prefix has {} prices, expected {n}",
                    prices.len()
                )));
            }
            prices.clone()
        }
    };
    prices.truncate(n);
    prices.resize(horizon, cfg.p_min);
    PriceSequence::checked(cfg, prices)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RandomKind {
    Uniform,
    LogUniform,
}

/// Seeded i.i.d. prices on `[p_min, p_max]`.
pub fn gen_random(
    cfg: &MarketConfig,
    horizon: usize,
    kind: RandomKind,
    seed: u64,
) -> Result<PriceSequence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let log_theta = cfg.theta().ln();
    let prices = (0..horizon)
        .map(|_| {
            let u: f64 = rng.gen();
            let p = match kind {
                RandomKind::Uniform => cfg.p_min + u * (cfg.p_max - cfg.p_min),
                RandomKind::LogUniform => cfg.p_min * (u * log_theta).exp(),
            };
            p.clamp(cfg.p_min, cfg.p_max)
        })
        .collect();
    PriceSequence::new(prices)
}

fn is_header(fields: &[&str]) -> bool {
    let lower: Vec<String> = fields.iter().map(|f| f.trim().to_ascii_lowercase()).collect();
    matches!(lower.as_slice(), [p] if p == "price")
        || matches!(lower.as_slice(), [t, p] if t == "t" && p == "price")
}

/// Parses CSV text with one `price` or `t,price` column layout and an
/// optional header. With `slots_per_day`, the prices are split into days of
/// that length and a trailing partial day is rejected.
pub fn parse_csv(
    text: &str,
    cfg: &MarketConfig,
    slots_per_day: Option<usize>,
) -> Result<Vec<PriceSequence>> {
    let mut prices = Vec::new();
    let mut columns = None;
    let mut last_line = 0;
    for (i, raw) in text.split('\n').enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw).trim();
        if line.is_empty() {
            continue;
        }
        last_line = line_no;
        let fields: Vec<&str> = line.split(',').collect();
        if columns.is_none() && prices.is_empty() && is_header(&fields) {
            columns = Some(fields.len());
            continue;
        }
        let width = *columns.get_or_insert(fields.len());
        if fields.len() != width || !(1..=2).contains(&width) {
            return Err(Error::Parse {
                line: line_no,
                reason: format!("expected {width} column(s), found {}", fields.len()),
            });
        }
        let field = fields[width - 1].trim();
        let value: f64 = field.parse().map_err(|_| Error::Parse {
            line: line_no,
            reason: format!("not a number: {field:?}"),
        })?;
        if width == 2 && fields[0].trim().parse::<f64>().is_err() {
            return Err(Error::Parse {
                line: line_no,
                reason: format!("bad step index {:?}", fields[0].trim()),
            });
        }
        if !value.is_finite() || !cfg.contains(value) {
            return Err(Error::CsvPriceOutOfBounds {
                line: line_no,
                value,
            });
        }
        prices.push(value);
    }
    if prices.is_empty() {
        return Err(Error::EmptyPrices);
    }
    match slots_per_day {
        None => Ok(vec![PriceSequence::new(prices)?]),
        Some(0) => Err(Error::BadScenario("slots per day must be >= 1".into())),
        Some(n) => {
            if prices.len() % n != 0 {
                return Err(Error::Parse {
                    line: last_line,
                    reason: format!("{} prices do not fill whole {n}-slot days", prices.len()),
                });
            }
            prices
                .chunks(n)
                .map(|day| PriceSequence::new(day.to_vec()))
                .collect()
        }
    }
}

pub fn load_csv(
    path: &Path,
    cfg: &MarketConfig,
    slots_per_day: Option<usize>,
) -> Result<Vec<PriceSequence>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_csv(&text, cfg, slots_per_day)
}

/// `t,price` CSV with shortest round-trip float formatting.
pub fn write_csv(prices: &[f64]) -> String {
    let mut out = String::from("t,price\n");
    for (i, p) in prices.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i + 1, p));
    }
    out
}
