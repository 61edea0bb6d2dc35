//! Cross-module properties: feasibility, switching structure and weak duality.

use oconv::domain::{snapped_ceil, HorizonScenario, MarketConfig};
use oconv::instances::{gen_random, gen_switch_family, PrefixSpec, RandomKind};
use oconv::oracle::opt_offline;
use oconv::ratios::{alpha_known_auto, cr_notice, cr_unknown};
use oconv::trader::{run_trader, Phase, Trader, TraderMode};
use proptest::prelude::*;

fn market() -> impl Strategy<Value = (MarketConfig, usize)> {
    (1usize..60, 1.0f64..200.0, 0.0f64..1.0).prop_map(|(horizon, theta, u)| {
        let k = 10.0;
        let edge = k / horizon as f64;
        let b = edge * 0.5 + u * (1.5 * k - edge * 0.5);
        (MarketConfig::new(k, b, 1.0, theta).unwrap(), horizon)
    })
}

/// Dual objective `k phi + b sum max(0, p_t - phi)` for any `phi >= 0`
/// bounds the offline optimum from above.
fn dual_value(cfg: &MarketConfig, prices: &[f64], phi: f64) -> f64 {
    cfg.k * phi + cfg.b * prices.iter().map(|p| (p - phi).max(0.0)).sum::<f64>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn every_mode_stays_within_box_and_budget((cfg, horizon) in market(), seed in any::<u64>()) {
        let prices = gen_random(&cfg, horizon, RandomKind::LogUniform, seed).unwrap();
        let theta = cfg.theta();
        let runs = [
            (HorizonScenario::Known { horizon }, alpha_known_auto(theta, horizon, cfg.k, cfg.b).unwrap()),
            (HorizonScenario::Unknown, cr_unknown(theta).unwrap()),
        ];
        for (scen, alpha) in runs {
            let run = run_trader(&cfg, &scen, alpha, &prices).unwrap();
            prop_assert!(run.schedule.check(&cfg).is_ok());
            if let HorizonScenario::Known { .. } = scen {
                if cfg.b * horizon as f64 >= cfg.k {
                    prop_assert!(run.stranded <= 1e-9);
                }
            }
        }
        if cfg.b * horizon as f64 >= cfg.k {
            let scen = HorizonScenario::Notice { notify_step: None, horizon };
            let run = run_trader(&cfg, &scen, cr_notice(theta).unwrap(), &prices).unwrap();
            prop_assert!(run.schedule.check(&cfg).is_ok());
            prop_assert!(run.stranded <= 1e-9);
        }
    }

    #[test]
    fn switching_happens_once_and_not_too_early((cfg, horizon) in market(), seed in any::<u64>(),
                                                tau_f in 0.0f64..1.0) {
        prop_assume!(cfg.b * horizon as f64 > cfg.k && cfg.b < cfg.k);
        let tau = 1 + ((horizon - 1) as f64 * tau_f) as usize;
        let prices = gen_switch_family(&cfg, horizon, tau, &PrefixSpec::Random { seed }).unwrap();
        let alpha = 1.0 + cfg.theta().ln() / 2.0;
        let mut tr = Trader::new(cfg, TraderMode::Known { horizon }, alpha).unwrap();
        let mut switches = 0;
        let mut last = tr.phase();
        for &p in prices.iter() {
            tr.step(p, None).unwrap();
            if tr.phase() != last {
                switches += 1;
                let forced = matches!(tr.phase(), Phase::Forced { .. });
                prop_assert!(forced);
            }
            last = tr.phase();
        }
        prop_assert!(switches <= 1);
        if let Some(s) = tr.switch_step() {
            let earliest = horizon as i64 - snapped_ceil(cfg.k / cfg.b) + 1;
            prop_assert!(s as i64 >= earliest);
        }
    }

    #[test]
    fn final_pseudo_cost_certifies_an_upper_bound((cfg, horizon) in market(), seed in any::<u64>()) {
        prop_assume!(cfg.b * horizon as f64 >= cfg.k);
        let prices = gen_random(&cfg, horizon, RandomKind::Uniform, seed).unwrap();
        let alpha = alpha_known_auto(cfg.theta(), horizon, cfg.k, cfg.b).unwrap();
        let mut tr = Trader::new(cfg, TraderMode::Known { horizon }, alpha).unwrap();
        for &p in prices.iter() {
            tr.step(p, None).unwrap();
        }
        let opt = opt_offline(&cfg, &prices).revenue;
        prop_assert!(dual_value(&cfg, &prices, tr.threshold()) >= opt - 1e-9 * opt);
    }
}

#[test]
fn notified_runs_finish_exactly_at_the_horizon() {
    let cfg = MarketConfig::new(12.0, 3.0, 1.0, 10.0).unwrap();
    for notify in 1..=3 {
        let prices = vec![1.0; 6];
        // all-floor prices sell nothing proactively, so the notice must come
        // when four steps remain
        let scen = HorizonScenario::Notice {
            notify_step: Some(notify),
            horizon: 6,
        };
        let res = run_trader(&cfg, &scen, 2.0, &prices);
        if notify == 3 {
            let run = res.unwrap();
            assert_eq!(run.schedule.allocations, vec![0.0, 0.0, 3.0, 3.0, 3.0, 3.0]);
        } else {
            assert!(res.is_err());
        }
    }
}
