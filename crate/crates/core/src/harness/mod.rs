//! Scenario runner: configuration, experiment drivers and file output.
//!
//! Four scenarios exist:
//!
//! * `sweep-r`: symmetric sweep of `r = 0..=r_max` with success, recovery,
//!   throughput and delay per point.
//! * `modes`: per offered load, delay without coding, at the fixed
//!   off-equilibrium redundancy `r* + random_r_offset` and at the sweep
//!   optimum `r*`.
//! * `equilibrium`: best-response dynamics from all-0 and all-`r_max`.
//! * `validate`: closed forms against enumeration and Monte Carlo oracles.
//!
//! Outputs are written as `<scenario>-<seed>.csv` (and `.svg`) and depend
//! only on the configuration.

pub mod config;
pub mod svg;
pub mod table;
pub mod validate;

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::game::{self, Evaluator, GameConfig, GameError, StrategyProfile, Sweep};
use crate::sim::{self, SimError};

pub use config::{ConfigError, EvaluatorKind, Scenario, ScenarioConfig};
pub use svg::{emit_svg, PlotSpec};
pub use table::{Cell, ResultTable, TableError};

pub const TOOL: &str = concat!("ecgame ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Table, optional plot and pass/fail verdict of one scenario run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutput {
    pub table: ResultTable,
    pub plot: Option<PlotSpec>,
    /// False only for a `validate` run with a failing check.
    pub passed: bool,
}

/// Legend labels of the three operating modes.
pub const MODE_LABELS: [&str; 3] = ["conventional (without EC)", "random MDS EC (out of NE)", "at equilibrium (NE)"];

/// Game configuration for the scenario's evaluator at its configured rate.
pub fn game_config(cfg: &ScenarioConfig) -> GameConfig {
    let evaluator = match cfg.evaluator {
        EvaluatorKind::Analytic => Evaluator::Analytic(cfg.model_variant),
        EvaluatorKind::Simulated => Evaluator::simulated(cfg.sim_config(), 1),
    };
    GameConfig {
        max_iters: cfg.max_iters,
        tolerance: cfg.tolerance,
        ..GameConfig::new(cfg.network_params(), cfg.r_max, evaluator)
    }
}

/// The off-equilibrium redundancy: `r* + offset`, clamped to `r_max`, or
/// `r* - offset` (floored at 0) when the clamp lands back on `r*`.
pub fn random_r(r_star: usize, offset: usize, r_max: usize) -> usize {
    let up = (r_star + offset).min(r_max);
    if up != r_star { up } else { r_star.saturating_sub(offset) }
}

fn base_table(cfg: &ScenarioConfig, columns: &[&str]) -> ResultTable {
    let mut t = ResultTable::new(columns);
    t.meta("tool", TOOL);
    t.meta("scenario", cfg.scenario);
    t.meta("seed", cfg.seed);
    t.meta("evaluator", cfg.evaluator.name());
    for (k, v) in cfg.entries() {
        t.meta("param", format!("{k} = {v}"));
    }
    if cfg.load_grid.is_none() && cfg.scenario == Scenario::Modes {
        let parts: Vec<String> = cfg.loads().iter().map(|g| g.to_string()).collect();
        t.meta("param", format!("load_grid = {} (default)", parts.join(", ")));
    }
    t
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutput, HarnessError> {
    cfg.validate()?;
    match cfg.scenario {
        Scenario::SweepR => sweep_r(cfg),
        Scenario::Modes => modes(cfg),
        Scenario::Equilibrium => equilibrium(cfg),
        Scenario::Validate => validate_scenario(cfg),
    }
}

fn sweep_r(cfg: &ScenarioConfig) -> Result<ScenarioOutput, HarnessError> {
    let sweep = game::sweep_symmetric(&game_config(cfg))?;
    let mut t = base_table(cfg, &["r", "p_success", "p_recover", "throughput", "delay", "valid"]);
    t.meta("r_star", sweep.r_star);
    for p in &sweep.points {
        t.push(vec![
            p.r.into(),
            Cell::opt(p.p_success),
            Cell::opt(p.p_recover),
            Cell::opt(p.throughput),
            Cell::Num(p.delay),
            p.valid.into(),
        ])?;
    }
    let plot = PlotSpec::new("Throughput vs redundancy", "r", "redundant packets r", "throughput", false)
        .series("throughput", "symmetric sweep");
    Ok(ScenarioOutput { table: t, plot: Some(plot), passed: true })
}

/// Delay of the three modes at one load.
#[derive(Debug, Clone, PartialEq)]
pub struct ModesRow {
    pub load: f64,
    pub r_star: usize,
    pub r_random: usize,
    pub d_conventional: Option<f64>,
    pub d_random: Option<f64>,
    pub d_ne: Option<f64>,
}

impl ModesRow {
    /// `D_NE <= D_random` and `D_NE <= D_conventional`, or `None` when any
    /// of the three is undefined.
    pub fn ordered(&self) -> Option<bool> {
        match (self.d_conventional, self.d_random, self.d_ne) {
            (Some(c), Some(r), Some(ne)) => Some(ne <= r && ne <= c),
            _ => None,
        }
    }
}

fn point_delay(sweep: &Sweep, r: usize) -> Option<f64> {
    let p = sweep.at(r);
    (p.valid && p.delay.is_finite()).then_some(p.delay)
}

pub fn modes_rows(cfg: &ScenarioConfig) -> Result<Vec<ModesRow>, HarnessError> {
    let base = game_config(cfg);
    let mut rows = Vec::new();
    for load in cfg.loads() {
        let (game_cfg, conventional) = match cfg.evaluator {
            EvaluatorKind::Analytic => {
                let params = base.params.with_lambda(load / cfg.m_nodes as f64);
                (GameConfig { params, ..base.clone() }, None)
            }
            EvaluatorKind::Simulated => {
                let template = cfg.sim_config().with_offered_load(load);
                let conv = sim::simulate(&sim::SimConfig { coding_enabled: false, ..template.clone() })?;
                let evaluator = Evaluator::simulated(template, 1);
                (GameConfig { evaluator, ..base.clone() }, Some(conv.mean_delay))
            }
        };
        let sweep = game::sweep_symmetric(&game_cfg)?;
        let r_random = random_r(sweep.r_star, cfg.random_r_offset, cfg.r_max);
        rows.push(ModesRow {
            load,
            r_star: sweep.r_star,
            r_random,
            // Analytically, coding off is the r = 0 point of the same model.
            d_conventional: conventional.unwrap_or_else(|| point_delay(&sweep, 0)),
            d_random: point_delay(&sweep, r_random),
            d_ne: point_delay(&sweep, sweep.r_star),
        });
    }
    Ok(rows)
}

fn modes(cfg: &ScenarioConfig) -> Result<ScenarioOutput, HarnessError> {
    let rows = modes_rows(cfg)?;
    let mut t = base_table(cfg, &["load", "r_star", "r_random", "d_conventional", "d_random", "d_ne", "ordered"]);
    for row in &rows {
        t.push(vec![
            row.load.into(),
            row.r_star.into(),
            row.r_random.into(),
            Cell::opt(row.d_conventional),
            Cell::opt(row.d_random),
            Cell::opt(row.d_ne),
            row.ordered().map_or(Cell::None, Cell::Bool),
        ])?;
    }
    let plot = PlotSpec::new("Overall delay by operating mode", "load", "offered load", "delay (slots)", true)
        .series("d_conventional", MODE_LABELS[0])
        .series("d_random", MODE_LABELS[1])
        .series("d_ne", MODE_LABELS[2]);
    Ok(ScenarioOutput { table: t, plot: Some(plot), passed: true })
}

fn equilibrium(cfg: &ScenarioConfig) -> Result<ScenarioOutput, HarnessError> {
    let gc = game_config(cfg);
    let sweep = game::sweep_symmetric(&gc)?;
    let mut t = base_table(
        cfg,
        &[
            "init",
            "profile",
            "symmetric",
            "converged",
            "iterations",
            "cycle_detected",
            "is_nash",
            "deviation_margin",
            "quasiconcave",
            "mean_delay",
            "sweep_r_star",
        ],
    );
    let m = gc.players();
    for init in [0, cfg.r_max] {
        let rep = game::best_response_dynamics(&StrategyProfile::symmetric(m, init), &gc)?;
        let mean = rep.utilities.iter().sum::<f64>() / m as f64;
        t.push(vec![
            Cell::Text(format!("all-{init}")),
            Cell::Text(rep.profile.to_string()),
            rep.profile.is_symmetric().into(),
            rep.converged.into(),
            rep.iterations.into(),
            rep.cycle_detected.into(),
            rep.is_nash.into(),
            Cell::Num(rep.deviation_margin),
            rep.quasiconcave.into(),
            Cell::Num(mean),
            sweep.r_star.into(),
        ])?;
    }
    Ok(ScenarioOutput { table: t, plot: None, passed: true })
}

fn validate_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutput, HarnessError> {
    let mut checks = validate::enumeration_checks();
    checks.extend(validate::monte_carlo_checks(validate::MC_TRIALS, cfg.seed));
    checks.push(validate::sim_success_check(cfg.seed)?);
    let analytic = GameConfig {
        evaluator: Evaluator::Analytic(cfg.model_variant),
        ..game_config(cfg)
    };
    checks.extend(validate::sweep_checks(&analytic, cfg.model_variant)?);
    let failures = checks.iter().filter(|c| !c.passed()).count();
    let mut t = base_table(cfg, &validate::COLUMNS);
    t.meta("checks", checks.len());
    t.meta("failures", failures);
    validate::push_rows(&mut t, &checks);
    Ok(ScenarioOutput { table: t, plot: None, passed: failures == 0 })
}

/// File stem shared by the CSV and SVG outputs.
pub fn output_stem(cfg: &ScenarioConfig) -> String {
    format!("{}-{}", cfg.scenario, cfg.seed)
}

/// Writes the CSV, plus the SVG when requested and available.
pub fn write_outputs(cfg: &ScenarioConfig, out: &ScenarioOutput) -> Result<Vec<PathBuf>, HarnessError> {
    let dir: &Path = &cfg.output_dir;
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| HarnessError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let stem = output_stem(cfg);
    let csv = dir.join(format!("{stem}.csv"));
    fs::write(&csv, out.table.to_csv()).map_err(io(&csv))?;
    let mut written = vec![csv];
    if let (true, Some(plot)) = (cfg.emit_svg, &out.plot) {
        let path = dir.join(format!("{stem}.svg"));
        fs::write(&path, emit_svg(&out.table, plot)?).map_err(io(&path))?;
        written.push(path);
    }
    Ok(written)
}
