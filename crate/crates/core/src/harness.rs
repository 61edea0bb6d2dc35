//! Empirical competitive ratios, parameter sweeps and their serialization.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::augmented::{default_alphas, run_augmented};
use crate::domain::{classify_box, BoxClass, HorizonScenario, MarketConfig, TradeSchedule};
use crate::error::{Error, Result};
use crate::instances::{GeneratorKind, GeneratorSpec, PrefixSpec};
use crate::oracle::opt_offline;
use crate::ratios::{alpha_known_auto, bounds_from_alphas, cr_notice, cr_unknown, Ratio};
use crate::trader::run_trader;

/// Balance parameters; `None` picks the value prescribed for the mode.
/// For prediction scenarios `alpha` is the known share's balance and
/// `alpha2` the unknown share's.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AlphaSpec {
    pub alpha: Option<f64>,
    pub alpha2: Option<f64>,
}

impl AlphaSpec {
    pub fn auto() -> Self {
        AlphaSpec::default()
    }

    pub fn fixed(alpha: f64) -> Self {
        AlphaSpec {
            alpha: Some(alpha),
            alpha2: None,
        }
    }
}

/// Number of steps the box class and known-horizon ratio refer to.
fn scenario_horizon(scenario: &HorizonScenario, len: usize) -> usize {
    match *scenario {
        HorizonScenario::Known { horizon } | HorizonScenario::Notice { horizon, .. } => horizon,
        HorizonScenario::Prediction { predicted, .. } => predicted,
        HorizonScenario::Unknown => len,
    }
}

/// Ratio bound for the mode with its prescribed balance: the known-horizon
/// ratio (1 when the rate limit cannot place the budget), `1 + W((theta-1)/e)`,
/// or `1 + ln theta`. Prediction scenarios use [`bounds_from_alphas`].
pub fn mode_bound(cfg: &MarketConfig, scenario: &HorizonScenario) -> Result<f64> {
    let theta = cfg.theta();
    match *scenario {
        HorizonScenario::Known { horizon } => alpha_known_auto(theta, horizon, cfg.k, cfg.b),
        HorizonScenario::Notice { .. } => cr_notice(theta),
        HorizonScenario::Unknown => cr_unknown(theta),
        HorizonScenario::Prediction { predicted, lambda } => {
            let (a1, a2) = default_alphas(cfg, predicted, lambda)?;
            Ok(bounds_from_alphas(a1, a2, lambda)?.robustness.as_f64())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcrReport {
    pub opt_revenue: f64,
    pub alg_revenue: f64,
    pub ecr: Ratio,
    pub scenario: HorizonScenario,
    pub generator: Option<GeneratorSpec>,
    pub alpha_used: f64,
    pub alpha2_used: Option<f64>,
    pub bound: Ratio,
    /// Bound that applies when the predicted horizon is exact.
    pub consistency_bound: Option<f64>,
    pub box_class: BoxClass,
    pub stranded_budget: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub report: EcrReport,
    pub schedule: TradeSchedule,
}

/// `opt / alg`, with the infinite sentinel when the algorithm earned nothing.
pub fn ecr_of(opt: f64, alg: f64) -> Ratio {
    if alg > 0.0 {
        Ratio::Finite(opt / alg)
    } else if opt > 0.0 {
        Ratio::Infinite
    } else {
        Ratio::Finite(1.0)
    }
}

/// Runs the trader for `scenario` and the offline optimum on the same prices.
pub fn evaluate(
    cfg: &MarketConfig,
    scenario: &HorizonScenario,
    alphas: AlphaSpec,
    prices: &[f64],
    generator: Option<GeneratorSpec>,
) -> Result<Evaluation> {
    crate::domain::validate_config(cfg)?;
    crate::domain::validate_prices(cfg, prices)?;
    if prices.is_empty() {
        return Err(Error::EmptyPrices);
    }
    scenario.validate()?;
    let theta = cfg.theta();
    let mut warnings = Vec::new();

    let (schedule, alpha_used, alpha2_used, stranded, bound, consistency) = match *scenario {
        HorizonScenario::Prediction { predicted, lambda } => {
            let (d1, d2) = default_alphas(cfg, predicted, lambda)?;
            let a1 = alphas.alpha.unwrap_or(d1);
            let a2 = alphas.alpha2.unwrap_or(d2);
            let run = run_augmented(cfg, predicted, lambda, a1, a2, prices)?;
            let bounds = bounds_from_alphas(a1, a2, lambda)?;
            let stranded = run.stranded_known + run.stranded_unknown;
            if run.stranded_known > 0.0 {
                warnings.push(format!("known share left {} units", run.stranded_known));
            }
            (
                run.schedule,
                a1,
                Some(a2),
                stranded,
                bounds.robustness,
                Some(bounds.consistency),
            )
        }
        _ => {
            let prescribed = mode_bound(cfg, scenario)?;
            let alpha = alphas.alpha.unwrap_or(prescribed);
            let run = run_trader(cfg, scenario, alpha, prices)?;
            warnings.extend(run.warnings);
            (
                run.schedule,
                alpha,
                None,
                run.stranded,
                Ratio::Finite(prescribed),
                None,
            )
        }
    };

    let opt = opt_offline(cfg, prices).revenue;
    let ecr = ecr_of(opt, schedule.revenue);
    if ecr == Ratio::Infinite {
        warnings.push("algorithm earned nothing; ratio is unbounded".into());
    }
    if stranded > crate::domain::BUDGET_SLACK {
        warnings.push(format!("{stranded} units unsold at the end"));
    }
    if theta == 1.0 {
        warnings.push("p_min = p_max: every feasible schedule is optimal".into());
    }
    let box_class = classify_box(cfg, scenario_horizon(scenario, prices.len()));
    Ok(Evaluation {
        report: EcrReport {
            opt_revenue: opt,
            alg_revenue: schedule.revenue,
            ecr,
            scenario: scenario.clone(),
            generator,
            alpha_used,
            alpha2_used,
            bound,
            consistency_bound: consistency,
            box_class,
            stranded_budget: stranded,
            warnings,
        },
        schedule,
    })
}

pub fn compute_ecr(
    cfg: &MarketConfig,
    scenario: &HorizonScenario,
    alphas: AlphaSpec,
    prices: &[f64],
) -> Result<EcrReport> {
    evaluate(cfg, scenario, alphas, prices, None).map(|e| e.report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    T,
    B,
    Theta,
    Lambda,
    PredictionError,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::T => "T",
            SweepAxis::B => "b",
            SweepAxis::Theta => "theta",
            SweepAxis::Lambda => "lambda",
            SweepAxis::PredictionError => "prediction_error",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    Known,
    Notice,
    Unknown,
    Prediction,
}

impl SweepMode {
    pub fn name(self) -> &'static str {
        match self {
            SweepMode::Known => "known",
            SweepMode::Notice => "notice",
            SweepMode::Unknown => "unknown",
            SweepMode::Prediction => "prediction",
        }
    }
}

/// Which seeded instance family a sweep draws its days from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepSource {
    GeometricLadder,
    UniformRandom,
    /// Random prefix then `p_min`, switching at a seeded step.
    SwitchFamily,
    WorstCaseIncreasing,
}

impl SweepSource {
    pub fn label(&self) -> &'static str {
        match self {
            SweepSource::GeometricLadder => "synthetic:geometric_ladder",
            SweepSource::UniformRandom => "synthetic:uniform_random",
            SweepSource::SwitchFamily => "synthetic:switch_family",
            SweepSource::WorstCaseIncreasing => "adversarial:worst_case_increasing",
        }
    }
}

/// Parameters held fixed while one axis varies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepBase {
    pub horizon: usize,
    pub k: f64,
    pub b: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub lambda: f64,
    /// Predicted horizon as a multiple of the actual one.
    pub tpred_factor: f64,
    pub alphas: AlphaSpec,
}

impl Default for SweepBase {
    fn default() -> Self {
        SweepBase {
            horizon: 288,
            k: 68.0,
            b: 6.0,
            p_min: 5.0,
            p_max: 1000.0,
            lambda: 0.5,
            tpred_factor: 1.0,
            alphas: AlphaSpec::auto(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub modes: Vec<SweepMode>,
    pub base: SweepBase,
    pub source: SweepSource,
    pub replications: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: String,
    pub value: f64,
    pub mode: String,
    pub mean_ecr: Option<f64>,
    pub max_ecr: Option<Ratio>,
    pub bound: Ratio,
    pub consistency_bound: Option<f64>,
    pub n: usize,
    pub n_infinite: usize,
    /// Notice runs whose horizon cannot be reached at the rate limit.
    pub n_skipped: usize,
    pub source: String,
}

/// Everything one cell of a sweep needs to build and score an instance.
#[derive(Debug, Clone)]
struct Cell {
    value: f64,
    mode: SweepMode,
    cfg: MarketConfig,
    horizon: usize,
    scenario: HorizonScenario,
}

fn build_cell(spec: &SweepSpec, value: f64, mode: SweepMode) -> Result<Cell> {
    let base = &spec.base;
    let mut horizon = base.horizon;
    let mut b = base.b;
    let mut p_max = base.p_max;
    let mut lambda = base.lambda;
    let mut tpred = base.tpred_factor;
    match spec.axis {
        SweepAxis::T => {
            if !(value >= 1.0) || value.fract() != 0.0 {
                return Err(Error::BadScenario(format!("horizon {value} is not a positive integer")));
            }
            horizon = value as usize;
        }
        SweepAxis::B => b = value,
        SweepAxis::Theta => p_max = base.p_min * value,
        SweepAxis::Lambda => lambda = value,
        SweepAxis::PredictionError => tpred = 1.0 + value,
    }
    let cfg = MarketConfig::new(base.k, b, base.p_min, p_max)?;
    let predicted = ((horizon as f64 * tpred).round() as usize).max(1);
    let scenario = match mode {
        SweepMode::Known => HorizonScenario::Known { horizon },
        SweepMode::Notice => HorizonScenario::Notice {
            notify_step: None,
            horizon,
        },
        SweepMode::Unknown => HorizonScenario::Unknown,
        SweepMode::Prediction => HorizonScenario::Prediction { predicted, lambda },
    };
    scenario.validate()?;
    Ok(Cell {
        value,
        mode,
        cfg,
        horizon,
        scenario,
    })
}

fn instance_seed(base: u64, rep: usize) -> u64 {
    base.wrapping_add(rep as u64)
}

fn cell_generator(source: &SweepSource, cell: &Cell, seed: u64) -> GeneratorSpec {
    let kind = match source {
        SweepSource::GeometricLadder => GeneratorKind::GeometricLadder { seed },
        SweepSource::UniformRandom => GeneratorKind::UniformRandom { seed },
        SweepSource::SwitchFamily => GeneratorKind::SwitchFamily {
            tau: 1 + (seed as usize % cell.horizon),
            prefix: PrefixSpec::Random { seed },
        },
        SweepSource::WorstCaseIncreasing => GeneratorKind::WorstCaseIncreasing { alpha: None },
    };
    GeneratorSpec::new(kind, cell.horizon)
}

/// Runs every (value, mode) cell with `replications` seeded instances.
/// Instance `r` of every cell uses seed `seed + r`, so cells compare the same
/// days. Rows follow the order of `values`, then `modes`.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if spec.values.is_empty() {
        return Err(Error::BadScenario("sweep needs at least one value".into()));
    }
    if spec.replications == 0 || spec.modes.is_empty() {
        return Err(Error::BadScenario("sweep needs replications and modes".into()));
    }
    let cells: Vec<Cell> = spec
        .values
        .iter()
        .flat_map(|&v| spec.modes.iter().map(move |&m| (v, m)))
        .map(|(v, m)| build_cell(spec, v, m))
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..spec.replications).map(move |r| (c, r)))
        .collect();
    let results: Vec<Result<Option<EcrReport>>> = jobs
        .par_iter()
        .map(|&(c, r)| {
            let cell = &cells[c];
            let gen = cell_generator(&spec.source, cell, instance_seed(spec.seed, r));
            let prices = gen.generate(&cell.cfg)?;
            match evaluate(&cell.cfg, &cell.scenario, spec.base.alphas, &prices, Some(gen)) {
                Ok(e) => Ok(Some(e.report)),
                Err(Error::InfeasibleHorizon { .. }) if cell.mode == SweepMode::Notice => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();

    let mut rows = Vec::with_capacity(cells.len());
    let mut it = results.into_iter();
    for cell in &cells {
        let mut sum = 0.0;
        let mut finite = 0;
        let mut max: Option<Ratio> = None;
        let mut n_infinite = 0;
        let mut n_skipped = 0;
        let mut bound = Ratio::Finite(mode_bound(&cell.cfg, &cell.scenario)?);
        let mut consistency = None;
        for _ in 0..spec.replications {
            let Some(report) = it.next().expect("one result per job")? else {
                n_skipped += 1;
                continue;
            };
            bound = report.bound;
            consistency = report.consistency_bound;
            match report.ecr {
                Ratio::Finite(v) => {
                    sum += v;
                    finite += 1;
                    max = match max {
                        None => Some(Ratio::Finite(v)),
                        Some(Ratio::Finite(m)) => Some(Ratio::Finite(m.max(v))),
                        inf => inf,
                    };
                }
                Ratio::Infinite => {
                    n_infinite += 1;
                    max = Some(Ratio::Infinite);
                }
            }
        }
        rows.push(SweepRow {
            axis: spec.axis.name().into(),
            value: cell.value,
            mode: cell.mode.name().into(),
            mean_ecr: (finite > 0).then(|| sum / finite as f64),
            max_ecr: max,
            bound,
            consistency_bound: consistency,
            n: spec.replications - n_skipped,
            n_infinite,
            n_skipped,
            source: spec.source.label().into(),
        });
    }
    Ok(rows)
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out =
        String::from("axis,value,mode,mean_ecr,max_ecr,bound,consistency_bound,n,n_infinite,n_skipped,source\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.axis,
            r.value,
            r.mode,
            opt_cell(r.mean_ecr),
            r.max_ecr.map(|m| m.to_string()).unwrap_or_default(),
            r.bound,
            opt_cell(r.consistency_bound),
            r.n,
            r.n_infinite,
            r.n_skipped,
            r.source
        ));
    }
    out
}

pub fn sweep_to_json(rows: &[SweepRow]) -> String {
    let mut s = serde_json::to_string_pretty(rows).expect("rows serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(k: f64, b: f64, p_min: f64, p_max: f64) -> MarketConfig {
        MarketConfig { k, b, p_min, p_max }
    }

    #[test]
    fn ecr_examples() {
        let c = cfg(10.0, 3.0, 1.0, 50.0);
        let r = compute_ecr(&c, &HorizonScenario::Known { horizon: 5 }, AlphaSpec::auto(), &[50.0; 5])
            .unwrap();
        assert!((r.ecr.as_f64() - 1.0).abs() < 1e-12);

        let flat = cfg(10.0, 3.0, 4.0, 4.0);
        for scen in [
            HorizonScenario::Known { horizon: 5 },
            HorizonScenario::Notice { notify_step: None, horizon: 5 },
            HorizonScenario::Unknown,
            HorizonScenario::Prediction { predicted: 5, lambda: 0.5 },
        ] {
            let r = compute_ecr(&flat, &scen, AlphaSpec::auto(), &[4.0; 5]).unwrap();
            assert!((r.ecr.as_f64() - 1.0).abs() < 1e-12, "{scen:?}: {:?}", r.ecr);
        }
    }

    #[test]
    fn unbounded_ratio_is_a_sentinel() {
        assert_eq!(ecr_of(3.0, 0.0), Ratio::Infinite);
        let c = cfg(10.0, 10.0, 1.0, 20.0);
        let r = compute_ecr(
            &c,
            &HorizonScenario::Unknown,
            AlphaSpec::fixed(3.0),
            &[1.0],
        )
        .unwrap();
        assert!(r.ecr.as_f64() >= 1.0);
        let r = compute_ecr(&c, &HorizonScenario::Known { horizon: 2 }, AlphaSpec::auto(), &[2.0, 1.0]);
        assert!(r.unwrap().alpha_used > 1.0);
    }

    #[test]
    fn worst_case_known_is_near_the_bound() {
        let c = cfg(1.0, 1.0, 1.0, 100.0);
        let gen = GeneratorSpec::new(GeneratorKind::WorstCaseIncreasing { alpha: None }, 20);
        let prices = gen.generate(&c).unwrap();
        let r = compute_ecr(&c, &HorizonScenario::Known { horizon: 20 }, AlphaSpec::auto(), &prices)
            .unwrap();
        let bound = r.bound.as_f64();
        assert!(r.ecr.as_f64() >= 0.95 * bound && r.ecr.as_f64() <= bound + 1e-6);
    }

    fn small_spec(axis: SweepAxis, values: Vec<f64>, modes: Vec<SweepMode>) -> SweepSpec {
        SweepSpec {
            axis,
            values,
            modes,
            base: SweepBase {
                horizon: 24,
                k: 10.0,
                b: 2.0,
                p_min: 1.0,
                p_max: 50.0,
                ..SweepBase::default()
            },
            source: SweepSource::GeometricLadder,
            replications: 4,
            seed: 7,
        }
    }

    #[test]
    fn sweep_bounds_follow_the_mode() {
        let spec = small_spec(SweepAxis::T, vec![5.0, 10.0, 20.0, 40.0], vec![SweepMode::Unknown]);
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 4);
        for r in &rows {
            assert!((r.bound.as_f64() - (1.0 + 50f64.ln())).abs() < 1e-12);
        }
        let spec = small_spec(SweepAxis::B, vec![0.1, 0.2, 0.4], vec![SweepMode::Known]);
        for r in run_sweep(&spec).unwrap() {
            assert_eq!(r.bound, Ratio::Finite(1.0));
        }
    }

    #[test]
    fn prediction_error_rows_respect_robustness() {
        let mut spec = small_spec(
            SweepAxis::PredictionError,
            vec![-0.5, 0.0, 0.5],
            vec![SweepMode::Prediction],
        );
        for lambda in [0.0, 0.5, 1.0] {
            spec.base.lambda = lambda;
            for r in run_sweep(&spec).unwrap() {
                if lambda > 0.0 {
                    assert!(r.max_ecr.unwrap().as_f64() <= r.bound.as_f64() + 1e-6);
                } else {
                    assert_eq!(r.bound, Ratio::Infinite);
                }
            }
        }
    }

    #[test]
    fn sweep_output_is_deterministic() {
        let spec = small_spec(
            SweepAxis::Lambda,
            vec![0.0, 0.5, 1.0],
            vec![SweepMode::Prediction, SweepMode::Known],
        );
        let a = run_sweep(&spec).unwrap();
        let b = run_sweep(&spec).unwrap();
        assert_eq!(sweep_to_csv(&a), sweep_to_csv(&b));
        assert_eq!(sweep_to_json(&a), sweep_to_json(&b));
        assert_eq!(a[0].mode, "prediction");
        assert_eq!(a[1].mode, "known");
        assert!(sweep_to_csv(&a).starts_with("axis,value,mode"));
    }
}
