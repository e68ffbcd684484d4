//! Closed-form delay/throughput model for coded non-persistent CSMA.
//!
//! The chain evaluated by [`evaluate`] is:
//!
//! 1. coded offered load `G' = G (1 + r/k)`,
//! 2. per-packet success probability `P_p` from `x = alpha * lambda * (1 + r/k)`,
//! 3. recovery probability `P_f = P_k + sum_{n<k} sum_{m<=n} (m/k) P(n, m)`,
//!    where `P_k` is the probability of receiving at least `k` of `N` coded
//!    packets and `P(n, m)` the probability that exactly `n` arrive of which
//!    `m` are systematic,
//! 4. throughput
//!    `Th = (1 - e^{-aG'})^M P_f e^{-aG'(M-1)} / (1 + a - e^{-aG'})`,
//! 5. aggregate `X = (1 + M R) Th` and delay
//!    `D = ((X / (M R))^(1 - M) - 1) / (q R)`, in slots.
//!
//! Two forms of `P_p` are available through [`ModelVariant`]: `Literal`
//! evaluates `e^{-x} (1 - e^{-x})^(M-1)`; `Swapped` evaluates
//! `(1 - e^{-x}) e^{-x (M-1)}` (this node transmits and all others stay
//! silent), which behaves sensibly as `lambda -> 0`.
//!
//! Combinatorics are plain floating point; binomial terms switch to the log
//! domain above `N = 50`.

use thiserror::Error;

/// Normalized sensing time used unless configured otherwise.
pub const DEFAULT_ALPHA: f64 = 0.2;
/// Delay-model constant used unless configured otherwise.
pub const DEFAULT_Q: f64 = 1.53;
/// Probing rate used unless configured otherwise.
pub const DEFAULT_PROBING_RATE: f64 = 1.0;

const LOG_DOMAIN_ABOVE: usize = 50;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("parameter `{name}` out of range: {value}")]
    InvalidParam { name: &'static str, value: f64 },
    #[error("invalid partial-reception indices: N={n_total}, k={k}, n={n}, m={m}")]
    PartialBounds { n_total: usize, k: usize, n: usize, m: usize },
}

/// Which printed form of the per-packet success probability to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ModelVariant {
    #[default]
    Literal,
    Swapped,
}

impl ModelVariant {
    pub fn name(self) -> &'static str {
        match self {
            ModelVariant::Literal => "literal",
            ModelVariant::Swapped => "swapped",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "literal" => Some(ModelVariant::Literal),
            "swapped" => Some(ModelVariant::Swapped),
            _ => None,
        }
    }
}

/// All inputs of the analytic model.
///
/// `load` is the offered load `G` in packets per slot. [`NetworkParams::new`]
/// derives it as `m_nodes * lambda` (slot length 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkParams {
    /// Number of active users.
    pub m_nodes: usize,
    /// Probing rate `R`.
    pub probing_rate: f64,
    /// Sensing time normalized to the slot.
    pub alpha: f64,
    pub q: f64,
    /// Per-node Poisson arrival rate.
    pub lambda: f64,
    /// Offered load `G` before coding.
    pub load: f64,
    pub k: usize,
    pub r: usize,
}

impl NetworkParams {
    pub fn new(m_nodes: usize, lambda: f64, k: usize, r: usize) -> Self {
        Self {
            m_nodes,
            probing_rate: DEFAULT_PROBING_RATE,
            alpha: DEFAULT_ALPHA,
            q: DEFAULT_Q,
            lambda,
            load: m_nodes as f64 * lambda,
            k,
            r,
        }
    }

    pub fn with_redundancy(mut self, r: usize) -> Self {
        self.r = r;
        self
    }

    pub fn with_load(mut self, load: f64) -> Self {
        self.load = load;
        self
    }

    /// Sets `lambda` and re-derives `load = m_nodes * lambda`.
    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self.load = self.m_nodes as f64 * lambda;
        self
    }

    /// Code word length `k + r`.
    pub fn n(&self) -> usize {
        self.k + self.r
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let check = |ok: bool, name: &'static str, value: f64| {
            if ok {
                Ok(())
            } else {
                Err(ModelError::InvalidParam { name, value })
            }
        };
        check(self.m_nodes >= 1, "m_nodes", self.m_nodes as f64)?;
        check(self.probing_rate > 0.0 && self.probing_rate.is_finite(), "probing_rate", self.probing_rate)?;
        check(self.alpha > 0.0 && self.alpha.is_finite(), "alpha", self.alpha)?;
        check(self.q > 0.0 && self.q.is_finite(), "q", self.q)?;
        check(self.lambda >= 0.0 && self.lambda.is_finite(), "lambda", self.lambda)?;
        check(self.load >= 0.0 && self.load.is_finite(), "load", self.load)?;
        check(self.k >= 1, "k", self.k as f64)?;
        Ok(())
    }
}

/// One evaluation of the full model chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelOutputs {
    pub p_success: f64,
    pub q_fail: f64,
    pub p_at_least_k: f64,
    pub p_recover: f64,
    pub throughput: f64,
    /// `X = (1 + M R) Th`.
    pub aggregate: f64,
    pub delay: f64,
    pub valid: bool,
}

/// Result of the delay stage alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayOutputs {
    pub aggregate: f64,
    pub delay: f64,
    pub valid: bool,
}

/// Offered load after coding, `load * (k + r) / k`.
pub fn coded_load(base_load: f64, k: usize, r: usize) -> f64 {
    base_load * (1.0 + r as f64 / k as f64)
}

/// Per-packet success probability for the given variant.
pub fn p_success(p: &NetworkParams, v: ModelVariant) -> f64 {
    let x = p.alpha * p.lambda * (1.0 + p.r as f64 / p.k as f64);
    let silent = (-x).exp();
    let busy = -(-x).exp_m1();
    let others = (p.m_nodes - 1) as i32;
    let pp = match v {
        ModelVariant::Literal => silent * busy.powi(others),
        ModelVariant::Swapped => busy * (-x * others as f64).exp(),
    };
    pp.clamp(0.0, 1.0)
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Binomial coefficient as a float; zero when `i > n`.
pub fn binomial(n: usize, i: usize) -> f64 {
    if i > n {
        return 0.0;
    }
    let i = i.min(n - i);
    if n > LOG_DOMAIN_ABOVE {
        return (ln_factorial(n) - ln_factorial(i) - ln_factorial(n - i)).exp().round();
    }
    let mut c = 1.0;
    for j in 0..i {
        c = c * (n - j) as f64 / (j + 1) as f64;
    }
    c.round()
}

/// `p^a (1-p)^b` with `0^0 = 1`.
fn pq_power(p: f64, a: usize, b: usize) -> f64 {
    p.powi(a as i32) * (1.0 - p).powi(b as i32)
}

/// `C(n, i) p^i (1-p)^(n-i)`.
fn binom_term(n: usize, i: usize, p: f64) -> f64 {
    if i > n {
        return 0.0;
    }
    if n <= LOG_DOMAIN_ABOVE {
        return binomial(n, i) * pq_power(p, i, n - i);
    }
    if p <= 0.0 {
        return if i == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if i == n { 1.0 } else { 0.0 };
    }
    let ln = ln_factorial(n) - ln_factorial(i) - ln_factorial(n - i)
        + i as f64 * p.ln()
        + (n - i) as f64 * (-p).ln_1p();
    ln.exp()
}

/// Probability that at least `k` of `n_total` independent packets arrive.
pub fn p_at_least_k(p_p: f64, n_total: usize, k: usize) -> f64 {
    debug_assert!(k >= 1 && k <= n_total);
    if p_p >= 1.0 {
        return 1.0;
    }
    // Sum the shorter tail for accuracy.
    let upper = k..=n_total;
    let lower = 0..k;
    let v = if upper.clone().count() <= lower.clone().count() {
        upper.map(|i| binom_term(n_total, i, p_p)).sum::<f64>()
    } else {
        1.0 - lower.map(|i| binom_term(n_total, i, p_p)).sum::<f64>()
    };
    v.clamp(0.0, 1.0)
}

/// Probability that exactly `n` packets arrive, `m` of them systematic.
///
/// Requires `1 <= n < k <= n_total`, `m <= n` and `n - m <= n_total - k`.
pub fn p_partial(p_p: f64, n_total: usize, k: usize, n: usize, m: usize) -> Result<f64, ModelError> {
    let bad = || ModelError::PartialBounds { n_total, k, n, m };
    if k > n_total || n == 0 || n >= k || m > n || n - m > n_total - k {
        return Err(bad());
    }
    Ok(partial_term(p_p, n_total, k, n, m))
}

fn partial_term(p_p: f64, n_total: usize, k: usize, n: usize, m: usize) -> f64 {
    let ways = binomial(k, m) * binomial(n_total - k, n - m);
    if n_total <= LOG_DOMAIN_ABOVE || p_p <= 0.0 || p_p >= 1.0 {
        return ways * pq_power(p_p, n, n_total - n);
    }
    (ways.ln() + n as f64 * p_p.ln() + (n_total - n) as f64 * (-p_p).ln_1p()).exp()
}

/// Recovery probability from a per-packet success probability.
///
/// Full credit when at least `k` of `n_total` arrive; otherwise credit
/// `m / k` for the `m` systematic packets that did arrive.
pub fn p_recover_from(p_p: f64, n_total: usize, k: usize) -> f64 {
    let mut pf = p_at_least_k(p_p, n_total, k);
    for n in 1..k {
        let m_lo = n.saturating_sub(n_total - k).max(1);
        for m in m_lo..=n {
            pf += (m as f64 / k as f64) * partial_term(p_p, n_total, k, n, m);
        }
    }
    pf.clamp(0.0, 1.0)
}

/// Recovery probability `P_f` for the parameters' code shape.
pub fn p_recover(p: &NetworkParams, v: ModelVariant) -> f64 {
    p_recover_from(p_success(p, v), p.n(), p.k)
}

/// Throughput given the (already coded) offered load in `p.load`.
pub fn throughput(p: &NetworkParams, p_f: f64) -> f64 {
    let ag = p.alpha * p.load;
    let idle = (-ag).exp();
    let m = p.m_nodes as f64;
    let busy = -(-ag).exp_m1();
    busy.powf(m) * p_f * (-ag * (m - 1.0)).exp() / (1.0 + p.alpha - idle)
}

/// Aggregate `X` and overall delay `D` for a throughput.
///
/// `valid` is false when `X <= 0` or `D` is negative or not finite. `D = 0`
/// (single user, or `X = M R`) counts as valid.
pub fn delay(p: &NetworkParams, th: f64) -> DelayOutputs {
    let mr = p.m_nodes as f64 * p.probing_rate;
    let aggregate = (1.0 + mr) * th;
    let exponent = 1.0 - p.m_nodes as f64;
    let d = ((aggregate / mr).powf(exponent) - 1.0) / (p.q * p.probing_rate);
    let valid = aggregate > 0.0 && d.is_finite() && d >= 0.0;
    DelayOutputs { aggregate, delay: d, valid }
}

/// Runs the model with an explicit coded offered load.
pub fn evaluate_at_load(p: &NetworkParams, v: ModelVariant, coded: f64) -> ModelOutputs {
    let p_success = p_success(p, v);
    let n = p.n();
    let p_at_least_k = p_at_least_k(p_success, n, p.k);
    let p_recover = p_recover_from(p_success, n, p.k);
    let th = throughput(&p.with_load(coded), p_recover);
    let d = delay(p, th);
    ModelOutputs {
        p_success,
        q_fail: 1.0 - p_success,
        p_at_least_k,
        p_recover,
        throughput: th,
        aggregate: d.aggregate,
        delay: d.delay,
        valid: d.valid,
    }
}

/// Full chain: coded load, success, recovery, throughput, delay.
pub fn evaluate(p: &NetworkParams, v: ModelVariant) -> ModelOutputs {
    evaluate_at_load(p, v, coded_load(p.load, p.k, p.r))
}
