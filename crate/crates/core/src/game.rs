//! The redundancy game.
//!
//! Each of the `M` nodes picks how many parity packets `r_i` to add per
//! generation and wants to minimise its own overall delay. Redundancy is
//! coupled through the channel: the offered load seen by every player is the
//! base load scaled by the mean coded-load multiplier `mean_j (1 + r_j / k)`,
//! while player `i`'s own success and recovery probabilities use `r_i`.
//!
//! Utilities are delays, so lower is better and an invalid model point maps
//! to `f64::INFINITY`. Ties always go to the smallest `r`.
//!
//! Tolerance comparisons are relative: `a` beats `b` by more than `tol` when
//! `a < b - tol * max(1, |b|)`. Delays span many orders of magnitude, and a
//! relative slack keeps every verdict unchanged when all utilities are scaled
//! by a positive constant.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::model::{self, ModelVariant, NetworkParams};
use crate::sim::{self, SimConfig, SimError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("profile has {got} entries for {expected} players")]
    ProfileLength { expected: usize, got: usize },
    #[error("player {player} plays r = {r} outside 0..={r_max}")]
    StrategyOutOfRange { player: usize, r: usize, r_max: usize },
    #[error("player index {0} out of range")]
    NoSuchPlayer(usize),
    #[error("every response of player {0} has infinite delay")]
    NoFeasibleResponse(usize),
    #[error("no valid point on the symmetric sweep")]
    NoOptimum,
    #[error("invalid game setting `{name}`: {value}")]
    InvalidParam { name: &'static str, value: f64 },
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// One redundancy count per player.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StrategyProfile {
    pub r: Vec<usize>,
}

impl StrategyProfile {
    pub fn new(r: Vec<usize>) -> Self {
        Self { r }
    }

    pub fn symmetric(players: usize, r: usize) -> Self {
        Self { r: vec![r; players] }
    }

    pub fn players(&self) -> usize {
        self.r.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.r.windows(2).all(|w| w[0] == w[1])
    }

    /// The same profile with player `i` switched to `r`.
    pub fn with(&self, i: usize, r: usize) -> Self {
        let mut next = self.clone();
        next.r[i] = r;
        next
    }
}

impl fmt::Display for StrategyProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.r.iter().map(|r| r.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Utility hook for tests and experiments: `(player, profile) -> delay`.
pub type UtilityFn = dyn Fn(usize, &[usize]) -> f64 + Send + Sync;

type SimCache = Arc<Mutex<HashMap<Vec<usize>, Arc<SimSummary>>>>;

/// How utilities are computed.
#[derive(Clone)]
pub enum Evaluator {
    Analytic(ModelVariant),
    /// Per-node mean delay from the simulator, pooled over `replications`
    /// runs seeded `seed, seed + 1, ...`. Every profile reuses those seeds.
    Simulated { template: SimConfig, replications: u32, cache: SimCache },
    Custom(Arc<UtilityFn>),
}

impl Evaluator {
    pub fn simulated(template: SimConfig, replications: u32) -> Self {
        Evaluator::Simulated { template, replications: replications.max(1), cache: SimCache::default() }
    }

    pub fn custom(f: impl Fn(usize, &[usize]) -> f64 + Send + Sync + 'static) -> Self {
        Evaluator::Custom(Arc::new(f))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Evaluator::Analytic(_) => "analytic",
            Evaluator::Simulated { .. } => "simulated",
            Evaluator::Custom(_) => "custom",
        }
    }
}

impl fmt::Debug for Evaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Evaluator::Analytic(v) => f.debug_tuple("Analytic").field(v).finish(),
            Evaluator::Simulated { template, replications, .. } => f
                .debug_struct("Simulated")
                .field("template", template)
                .field("replications", replications)
                .finish(),
            Evaluator::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GameConfig {
    /// Template for the analytic evaluator; `m_nodes` fixes the player count.
    pub params: NetworkParams,
    pub r_max: usize,
    pub evaluator: Evaluator,
    pub max_iters: usize,
    pub tolerance: f64,
}

impl GameConfig {
    pub fn new(params: NetworkParams, r_max: usize, evaluator: Evaluator) -> Self {
        Self { params, r_max, evaluator, max_iters: 100, tolerance: 1e-9 }
    }

    pub fn players(&self) -> usize {
        match &self.evaluator {
            Evaluator::Simulated { template, .. } => template.m_nodes,
            _ => self.params.m_nodes,
        }
    }

    pub fn validate(&self) -> Result<(), GameError> {
        if self.max_iters < 1 {
            return Err(GameError::InvalidParam { name: "max_iters", value: self.max_iters as f64 });
        }
        if !(self.tolerance >= 0.0 && self.tolerance.is_finite()) {
            return Err(GameError::InvalidParam { name: "tolerance", value: self.tolerance });
        }
        if self.players() < 1 {
            return Err(GameError::InvalidParam { name: "m_nodes", value: 0.0 });
        }
        Ok(())
    }

    pub fn check_profile(&self, profile: &StrategyProfile) -> Result<(), GameError> {
        let expected = self.players();
        if profile.players() != expected {
            return Err(GameError::ProfileLength { expected, got: profile.players() });
        }
        for (player, &r) in profile.r.iter().enumerate() {
            if r > self.r_max {
                return Err(GameError::StrategyOutOfRange { player, r, r_max: self.r_max });
            }
        }
        Ok(())
    }

    /// Whether `a` is lower than `b` by more than the tolerance.
    pub fn improves(&self, a: f64, b: f64) -> bool {
        improves(a, b, self.tolerance)
    }
}

fn improves(a: f64, b: f64, tol: f64) -> bool {
    if a == b {
        return false;
    }
    if b.is_infinite() || a.is_infinite() {
        return a < b;
    }
    a < b - tol * b.abs().max(1.0)
}

/// Pooled statistics for one profile under the simulated evaluator.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSummary {
    pub node_delay: Vec<Option<f64>>,
    pub mean_delay: Option<f64>,
    pub throughput: f64,
    pub p_success: Option<f64>,
    pub recovery_rate: f64,
}

fn summarize(template: &SimConfig, replications: u32, profile: &[usize]) -> Result<SimSummary, SimError> {
    let m = template.m_nodes;
    let mut delay_sum = vec![0u64; m];
    let mut recovered = vec![0u64; m];
    let mut throughput = 0.0;
    let (mut attempts, mut delivered, mut arrived) = (0u64, 0u64, 0u64);
    for j in 0..replications {
        let cfg = SimConfig {
            seed: template.seed.wrapping_add(j as u64),
            node_redundancy: Some(profile.to_vec()),
            ..template.clone()
        };
        let res = sim::simulate(&cfg)?;
        for (i, n) in res.nodes.iter().enumerate() {
            delay_sum[i] += n.delay_sum;
            recovered[i] += n.recovered;
        }
        throughput += res.throughput;
        attempts += res.attempts;
        delivered += res.packets_delivered;
        arrived += res.generations_arrived;
    }
    let total_rec: u64 = recovered.iter().sum();
    let total_delay: u64 = delay_sum.iter().sum();
    Ok(SimSummary {
        node_delay: (0..m).map(|i| (recovered[i] > 0).then(|| delay_sum[i] as f64 / recovered[i] as f64)).collect(),
        mean_delay: (total_rec > 0).then(|| total_delay as f64 / total_rec as f64),
        throughput: throughput / replications as f64,
        p_success: (attempts > 0).then(|| delivered as f64 / attempts as f64),
        recovery_rate: if arrived > 0 { total_rec as f64 / arrived as f64 } else { 0.0 },
    })
}

fn sim_summary(cfg: &GameConfig, profile: &[usize]) -> Result<Arc<SimSummary>, GameError> {
    let Evaluator::Simulated { template, replications, cache } = &cfg.evaluator else {
        unreachable!("only called for the simulated evaluator");
    };
    if let Some(hit) = cache.lock().expect("cache lock").get(profile) {
        return Ok(hit.clone());
    }
    let summary = Arc::new(summarize(template, *replications, profile)?);
    cache.lock().expect("cache lock").insert(profile.to_vec(), summary.clone());
    Ok(summary)
}

/// Analytic outputs for player `i` under the coupled load.
fn analytic_outputs(cfg: &GameConfig, v: ModelVariant, i: usize, profile: &[usize]) -> model::ModelOutputs {
    let k = cfg.params.k as f64;
    let mult = profile.iter().map(|&r| 1.0 + r as f64 / k).sum::<f64>() / profile.len() as f64;
    let own = cfg.params.with_redundancy(profile[i]);
    model::evaluate_at_load(&own, v, cfg.params.load * mult)
}

/// Player `i`'s delay under `profile`; `f64::INFINITY` when undefined.
pub fn utility(i: usize, profile: &StrategyProfile, cfg: &GameConfig) -> Result<f64, GameError> {
    cfg.check_profile(profile)?;
    if i >= profile.players() {
        return Err(GameError::NoSuchPlayer(i));
    }
    let d = match &cfg.evaluator {
        Evaluator::Analytic(v) => {
            let out = analytic_outputs(cfg, *v, i, &profile.r);
            if out.valid { out.delay } else { f64::INFINITY }
        }
        Evaluator::Simulated { .. } => sim_summary(cfg, &profile.r)?.node_delay[i].unwrap_or(f64::INFINITY),
        Evaluator::Custom(f) => f(i, &profile.r),
    };
    Ok(if d.is_nan() { f64::INFINITY } else { d })
}

/// Utilities of player `i` for every own strategy `0..=r_max`.
pub fn utility_scan(i: usize, profile: &StrategyProfile, cfg: &GameConfig) -> Result<Vec<f64>, GameError> {
    (0..=cfg.r_max).map(|r| utility(i, &profile.with(i, r), cfg)).collect()
}

/// Exhaustive argmin of player `i`'s delay; ties go to the smallest `r`.
pub fn best_response(i: usize, profile: &StrategyProfile, cfg: &GameConfig) -> Result<usize, GameError> {
    cfg.check_profile(profile)?;
    if i >= profile.players() {
        return Err(GameError::NoSuchPlayer(i));
    }
    let scan = utility_scan(i, profile, cfg)?;
    let mut best: Option<(usize, f64)> = None;
    for (r, &d) in scan.iter().enumerate() {
        if d.is_finite() && best.is_none_or(|(_, b)| d < b) {
            best = Some((r, d));
        }
    }
    best.map(|(r, _)| r).ok_or(GameError::NoFeasibleResponse(i))
}

/// Outcome of an equilibrium check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NashCheck {
    pub is_nash: bool,
    /// Minimum over players and deviations of `D(deviate) - D(stay)`;
    /// `+inf` when nobody can deviate.
    pub deviation_margin: f64,
}

/// Unilateral-deviation scan over every player and every alternative `r`.
pub fn is_nash(profile: &StrategyProfile, cfg: &GameConfig) -> Result<NashCheck, GameError> {
    cfg.check_profile(profile)?;
    let mut margin = f64::INFINITY;
    let mut nash = true;
    for i in 0..profile.players() {
        let stay = utility(i, profile, cfg)?;
        for r in (0..=cfg.r_max).filter(|&r| r != profile.r[i]) {
            let dev = utility(i, &profile.with(i, r), cfg)?;
            let gap = if dev == stay { 0.0 } else { dev - stay };
            margin = margin.min(gap);
            if cfg.improves(dev, stay) {
                nash = false;
            }
        }
    }
    Ok(NashCheck { is_nash: nash, deviation_margin: margin })
}

/// Unimodality of a player's payoff `-D` in its own strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub unimodal: bool,
    /// Payoff `-D` for `r_i = 0..=r_max`.
    pub payoffs: Vec<f64>,
    /// Indices `r` where the payoff rises again after having fallen.
    pub violations: Vec<usize>,
}

/// Checks that `-D` is non-decreasing then non-increasing along `r_i`.
pub fn quasiconcavity_probe(cfg: &GameConfig, profile: &StrategyProfile, i: usize) -> Result<ProbeReport, GameError> {
    cfg.check_profile(profile)?;
    if i >= profile.players() {
        return Err(GameError::NoSuchPlayer(i));
    }
    let payoffs: Vec<f64> = utility_scan(i, profile, cfg)?.into_iter().map(|d| -d).collect();
    let violations = unimodality_violations(&payoffs, cfg.tolerance);
    Ok(ProbeReport { unimodal: violations.is_empty(), payoffs, violations })
}

/// Positions where a sequence climbs after it has started to fall.
pub fn unimodality_violations(values: &[f64], tol: f64) -> Vec<usize> {
    let mut falling = false;
    let mut out = Vec::new();
    for (j, w) in values.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        // Payoff b above a is delay -b below -a.
        if improves(-b, -a, tol) {
            if falling {
                out.push(j + 1);
            }
        } else if improves(-a, -b, tol) {
            falling = true;
        }
    }
    out
}

/// Result of best-response dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub profile: StrategyProfile,
    pub converged: bool,
    /// Rounds run, counting the final round that changed nothing.
    pub iterations: usize,
    /// Set when a round ended on a profile seen at the end of an earlier one.
    pub cycle_detected: bool,
    pub utilities: Vec<f64>,
    pub deviation_margin: f64,
    pub is_nash: bool,
    /// Probe verdict for every player at the final profile.
    pub quasiconcave: bool,
}

/// Round-robin best-response dynamics from `init`.
pub fn best_response_dynamics(init: &StrategyProfile, cfg: &GameConfig) -> Result<EquilibriumReport, GameError> {
    cfg.validate()?;
    cfg.check_profile(init)?;
    let mut profile = init.clone();
    let mut seen: HashSet<StrategyProfile> = HashSet::from([profile.clone()]);
    let mut converged = false;
    let mut cycle = false;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        iterations += 1;
        let mut changed = false;
        for i in 0..profile.players() {
            let br = best_response(i, &profile, cfg)?;
            if br != profile.r[i] {
                profile.r[i] = br;
                changed = true;
            }
        }
        if !changed {
            converged = true;
            break;
        }
        if !seen.insert(profile.clone()) {
            cycle = true;
            break;
        }
    }
    let utilities = (0..profile.players()).map(|i| utility(i, &profile, cfg)).collect::<Result<Vec<_>, _>>()?;
    let check = is_nash(&profile, cfg)?;
    let mut quasiconcave = true;
    for i in 0..profile.players() {
        quasiconcave &= quasiconcavity_probe(cfg, &profile, i)?.unimodal;
    }
    Ok(EquilibriumReport {
        profile,
        converged,
        iterations,
        cycle_detected: cycle,
        utilities,
        deviation_margin: check.deviation_margin,
        is_nash: check.is_nash,
        quasiconcave,
    })
}

/// One point of the symmetric sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub r: usize,
    pub p_success: Option<f64>,
    pub p_recover: Option<f64>,
    pub throughput: Option<f64>,
    pub delay: f64,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub points: Vec<SweepPoint>,
    /// Argmin of delay over valid points, smallest `r` on ties.
    pub r_star: usize,
}

impl Sweep {
    pub fn at(&self, r: usize) -> &SweepPoint {
        &self.points[r]
    }
}

/// Evaluates every symmetric profile `(r, ..., r)` for `r = 0..=r_max`.
pub fn sweep_symmetric(cfg: &GameConfig) -> Result<Sweep, GameError> {
    cfg.validate()?;
    let m = cfg.players();
    let mut points = Vec::with_capacity(cfg.r_max + 1);
    for r in 0..=cfg.r_max {
        let profile = StrategyProfile::symmetric(m, r);
        let point = match &cfg.evaluator {
            Evaluator::Analytic(v) => {
                let out = analytic_outputs(cfg, *v, 0, &profile.r);
                SweepPoint {
                    r,
                    p_success: Some(out.p_success),
                    p_recover: Some(out.p_recover),
                    throughput: Some(out.throughput),
                    delay: out.delay,
                    valid: out.valid,
                }
            }
            Evaluator::Simulated { .. } => {
                let s = sim_summary(cfg, &profile.r)?;
                SweepPoint {
                    r,
                    p_success: s.p_success,
                    p_recover: Some(s.recovery_rate),
                    throughput: Some(s.throughput),
                    delay: s.mean_delay.unwrap_or(f64::INFINITY),
                    valid: s.mean_delay.is_some(),
                }
            }
            Evaluator::Custom(f) => {
                let d = f(0, &profile.r);
                SweepPoint { r, p_success: None, p_recover: None, throughput: None, delay: d, valid: d.is_finite() }
            }
        };
        points.push(point);
    }
    let mut best: Option<(usize, f64)> = None;
    for p in points.iter().filter(|p| p.valid) {
        if best.is_none_or(|(_, d)| p.delay < d) {
            best = Some((p.r, p.delay));
        }
    }
    let (r_star, _) = best.ok_or(GameError::NoOptimum)?;
    Ok(Sweep { points, r_star })
}

/// Documented default: literal variant, five nodes at `lambda = 0.8`, `k = 4`,
/// strategies `0..=16`.
pub fn default_config() -> GameConfig {
    GameConfig::new(NetworkParams::new(5, 0.8, 4, 0), 16, Evaluator::Analytic(ModelVariant::Literal))
}
