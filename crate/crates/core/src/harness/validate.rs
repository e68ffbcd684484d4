//! Oracle checks: closed forms against exhaustive enumeration and Monte Carlo.

use crate::game::{self, GameConfig};
use crate::model::{self, ModelVariant};
use crate::sim::{self, SimConfig, SimError};

use super::table::{Cell, ResultTable};

/// Largest code length enumerated exhaustively.
pub const ENUM_MAX_N: usize = 10;
pub const ENUM_TOLERANCE: f64 = 1e-12;
/// Monte Carlo agreement bound, in standard errors.
pub const MC_Z: f64 = 3.0;
pub const MC_TRIALS: u64 = 1_000_000;

/// Exact reception statistics from all `2^n` patterns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Enumerated {
    pub at_least_k: f64,
    /// Mean recovery score.
    pub score: f64,
    /// Mean squared recovery score.
    pub score_sq: f64,
}

impl Enumerated {
    /// Standard deviation of one trial's score.
    pub fn score_sd(&self) -> f64 {
        (self.score_sq - self.score * self.score).max(0.0).sqrt()
    }
}

/// Walks every reception pattern of `n` packets, each arriving with
/// probability `p`. Packets `0..k` are the systematic ones.
pub fn enumerate_recovery(p: f64, n: usize, k: usize) -> Enumerated {
    assert!(n <= 20 && k >= 1 && k <= n);
    let sys_mask = (1u32 << k) - 1;
    let mut e = Enumerated { at_least_k: 0.0, score: 0.0, score_sq: 0.0 };
    for pattern in 0u32..(1 << n) {
        let got = pattern.count_ones() as i32;
        let prob = p.powi(got) * (1.0 - p).powi(n as i32 - got);
        let s = if got as usize >= k {
            e.at_least_k += prob;
            1.0
        } else {
            (pattern & sys_mask).count_ones() as f64 / k as f64
        };
        e.score += prob * s;
        e.score_sq += prob * s * s;
    }
    e
}

/// The `(N, k, p)` grid shared by the enumeration and Monte Carlo checks.
pub fn oracle_grid() -> Vec<(usize, usize, f64)> {
    let mut grid = Vec::new();
    for n in 1..=ENUM_MAX_N {
        for k in 1..=n {
            for step in 0..=10 {
                grid.push((n, k, step as f64 / 10.0));
            }
        }
    }
    grid
}

/// One comparison row.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub check: &'static str,
    pub case: String,
    pub analytic: f64,
    pub oracle: f64,
    pub stderr: Option<f64>,
    /// Allowed absolute difference.
    pub bound: f64,
}

impl Check {
    pub fn abs_diff(&self) -> f64 {
        (self.analytic - self.oracle).abs()
    }

    pub fn passed(&self) -> bool {
        self.abs_diff() <= self.bound
    }
}

pub fn enumeration_checks() -> Vec<Check> {
    let mut out = Vec::new();
    for (n, k, p) in oracle_grid() {
        let e = enumerate_recovery(p, n, k);
        let case = format!("N={n} k={k} p={p}");
        out.push(Check {
            check: "p_at_least_k",
            case: case.clone(),
            analytic: model::p_at_least_k(p, n, k),
            oracle: e.at_least_k,
            stderr: None,
            bound: ENUM_TOLERANCE,
        });
        out.push(Check {
            check: "p_recover",
            case,
            analytic: model::p_recover_from(p, n, k),
            oracle: e.score,
            stderr: None,
            bound: ENUM_TOLERANCE,
        });
    }
    out
}

/// `estimate_p_recover` against the closed form on the oracle grid. Grid
/// point `j` is seeded with `seed + j`.
///
/// The bound is a z-test under the closed form: the standard error is the
/// exact score deviation over `sqrt(trials)`. The sample deviation would be
/// zero wherever no loss pattern happens to be drawn, even though the true
/// mean sits a hair below 1.
pub fn monte_carlo_checks(trials: u64, seed: u64) -> Vec<Check> {
    oracle_grid()
        .into_iter()
        .enumerate()
        .map(|(j, (n, k, p))| {
            let est = sim::estimate_p_recover(n, k, p, trials, seed.wrapping_add(j as u64));
            let se = enumerate_recovery(p, n, k).score_sd() / (trials.max(1) as f64).sqrt();
            Check {
                check: "mc_p_recover",
                case: format!("N={n} k={k} p={p}"),
                analytic: model::p_recover_from(p, n, k),
                oracle: est.mean,
                stderr: Some(se),
                bound: MC_Z * se,
            }
        })
        .collect()
}

/// Single-node success fraction under erasures against the exact `1 - p_e`.
pub fn sim_success_check(seed: u64) -> Result<Check, SimError> {
    let cfg = SimConfig {
        m_nodes: 1,
        lambda_slot: 0.05,
        erasure_prob: 0.3,
        slots: 50_000,
        seed,
        ..SimConfig::default()
    };
    let est = sim::estimate_p_success(&cfg, 4)?.expect("arrivals at a positive rate");
    Ok(Check {
        check: "sim_p_success",
        case: "M=1 p_e=0.3".to_string(),
        analytic: 0.7,
        oracle: est.mean,
        stderr: Some(est.stderr),
        bound: MC_Z * est.stderr,
    })
}

/// Recomputes every symmetric-sweep delay straight from the model chain.
pub fn sweep_checks(cfg: &GameConfig, variant: ModelVariant) -> Result<Vec<Check>, game::GameError> {
    let sweep = game::sweep_symmetric(cfg)?;
    Ok(sweep
        .points
        .iter()
        .filter(|p| p.valid)
        .map(|p| {
            let direct = model::evaluate(&cfg.params.with_redundancy(p.r), variant);
            Check {
                check: "sweep_delay",
                case: format!("r={}", p.r),
                analytic: p.delay,
                oracle: direct.delay,
                stderr: None,
                bound: ENUM_TOLERANCE * direct.delay.abs().max(1.0),
            }
        })
        .collect())
}

pub const COLUMNS: [&str; 8] = ["check", "case", "analytic", "oracle", "abs_diff", "stderr", "bound", "pass"];

pub fn push_rows(table: &mut ResultTable, checks: &[Check]) {
    for c in checks {
        table
            .push(vec![
                Cell::from(c.check),
                Cell::Text(c.case.clone()),
                Cell::Num(c.analytic),
                Cell::Num(c.oracle),
                Cell::Num(c.abs_diff()),
                Cell::opt(c.stderr),
                Cell::Num(c.bound),
                Cell::Bool(c.passed()),
            ])
            .expect("row matches the column list");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_oracle_pinned_cases() {
        assert!((enumerate_recovery(0.5, 4, 2).at_least_k - 0.6875).abs() < 1e-15);
        let e = enumerate_recovery(0.5, 3, 2);
        assert!((e.score - 0.625).abs() < 1e-15);
        // Scores 1, 1/2, 0 with probabilities 1/2, 1/4, 1/4.
        assert!((e.score_sq - 0.5625).abs() < 1e-15);
        let sure = enumerate_recovery(1.0, 5, 5);
        assert_eq!((sure.at_least_k, sure.score, sure.score_sd()), (1.0, 1.0, 0.0));
        let never = enumerate_recovery(0.0, 5, 2);
        assert_eq!((never.at_least_k, never.score), (0.0, 0.0));
    }

    #[test]
    fn grid_size() {
        assert_eq!(oracle_grid().len(), 55 * 11);
    }

    #[test]
    fn small_monte_carlo_run_is_reasonable() {
        let checks = monte_carlo_checks(2_000, 3);
        let fails = checks.iter().filter(|c| !c.passed()).count();
        // Degenerate p in {0, 1} must be exact.
        for c in checks.iter().filter(|c| c.case.ends_with("p=0") || c.case.ends_with("p=1")) {
            assert_eq!(c.abs_diff(), 0.0, "{}", c.case);
        }
        assert!(fails < 10, "{fails} failures out of {}", checks.len());
    }
}
