use csma_ecgame::game::{self, Evaluator, GameConfig, StrategyProfile};
use csma_ecgame::harness::{self, validate, Scenario, ScenarioConfig};
use csma_ecgame::model::NetworkParams;
use csma_ecgame::sim::{self, SimConfig};

#[test]
fn redundancy_raises_recovery_on_erasure_channel() {
    let base = SimConfig { erasure_prob: 0.3, slots: 50_000, ..SimConfig::default() }.with_offered_load(0.05);
    let plain = sim::simulate(&SimConfig { r: 0, ..base.clone() }).unwrap();
    for r in 1..=4 {
        let coded = sim::simulate(&SimConfig { r, ..base.clone() }).unwrap();
        assert!(coded.recovery_rate > plain.recovery_rate, "r={r}: {} vs {}", coded.recovery_rate, plain.recovery_rate);
    }
}

#[test]
fn delay_grows_past_the_knee() {
    let template = SimConfig { slots: 50_000, ..SimConfig::default() };
    let curve = sim::measured_delay_curve(&template, &[0.2, 0.3, 0.4, 0.5]).unwrap();
    let delays: Vec<f64> = curve.iter().map(|(_, d)| d.unwrap()).collect();
    assert!(delays.windows(2).all(|w| w[1] >= w[0]), "{delays:?}");
}

#[test]
fn verified_decodes_never_fail() {
    for r in [0, 2, 5] {
        let cfg = SimConfig { r, verify_decode: true, slots: 100_000, lambda_slot: 0.01, ..SimConfig::default() };
        let res = sim::simulate(&cfg).unwrap();
        assert_eq!(res.decode_failures, 0);
        assert!(res.verified_decodes > 0, "r={r}");
    }
}

#[test]
fn converged_profiles_pass_nash_check() {
    for (m, lambda, k) in [(3usize, 0.5, 2usize), (4, 1.0, 4), (5, 0.8, 4), (6, 0.6, 3)] {
        let cfg = GameConfig::new(NetworkParams::new(m, lambda, k, 0), 12, Evaluator::Analytic(Default::default()));
        for init in [0, 12] {
            let rep = game::best_response_dynamics(&StrategyProfile::symmetric(m, init), &cfg).unwrap();
            if rep.converged {
                assert!(rep.is_nash && rep.deviation_margin >= -cfg.tolerance);
                assert!(rep.profile.is_symmetric(), "{}", rep.profile);
            } else {
                assert!(rep.cycle_detected || rep.iterations == cfg.max_iters);
            }
        }
    }
}

#[test]
fn sweep_table_reproduces_game_sweep() {
    let cfg = ScenarioConfig::default();
    let out = harness::run_scenario(&cfg).unwrap();
    let sweep = game::sweep_symmetric(&harness::game_config(&cfg)).unwrap();
    let delays = out.table.column("delay").unwrap();
    for (cell, point) in delays.iter().zip(&sweep.points) {
        assert_eq!(cell.as_f64(), Some(point.delay));
    }
    assert_eq!(out.table.metadata_value("r_star"), Some(sweep.r_star.to_string().as_str()));
}

#[test]
fn sweep_delays_match_direct_model() {
    let cfg = harness::game_config(&ScenarioConfig::default());
    let checks = validate::sweep_checks(&cfg, Default::default()).unwrap();
    assert_eq!(checks.len(), 17);
    assert!(checks.iter().all(validate::Check::passed));
}

#[test]
fn simulated_equilibrium_scenario_runs() {
    let cfg = ScenarioConfig {
        scenario: Scenario::Equilibrium,
        evaluator: harness::EvaluatorKind::Simulated,
        lambda: 0.02,
        r_max: 4,
        slots: 5_000,
        ..ScenarioConfig::default()
    };
    let out = harness::run_scenario(&cfg).unwrap();
    assert_eq!(out.table.rows.len(), 2);
}
