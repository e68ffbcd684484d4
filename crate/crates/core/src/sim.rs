//! Slot-level simulator of non-persistent CSMA with coded generations.
//!
//! Time advances in slots of one packet transmission. In every slot:
//!
//! 1. Each node draws `Poisson(lambda_slot)` new generations. A generation is
//!    queued as `N = k + r` coded packets, or as `k` plain packets when coding
//!    is disabled.
//! 2. A node with a nonempty queue whose backoff has expired senses the
//!    previous slot. If it was idle the node transmits its head packet. If it
//!    was busy the node defers: it draws `b` uniformly from `[1, W]` and
//!    senses again at slot `t + b`.
//! 3. One transmitter is a success, which the channel then erases with
//!    probability `p_e`. Two or more transmitters collide and every one of
//!    them draws a fresh backoff from `[1, W]`.
//! 4. With coding, a lost packet is dropped and a generation is recovered in
//!    the slot its `k`-th packet arrives. Without coding, a lost packet stays
//!    at the head of the queue and is sent again; the generation is recovered
//!    when all `k` packets are through.
//!
//! A generation recovered in slot `t` has `recovered_at = t + 1` (the end of
//! that slot), so an immediate success costs one slot of delay.
//!
//! # Randomness
//!
//! Every random draw comes from a ChaCha8 stream seeded with `seed`. Node `i`
//! uses stream `2i` for arrivals and `2i + 1` for backoff draws; stream `2M`
//! drives channel erasures and `2M + 1` the decode verification sampler.
//! Keeping arrivals on their own stream means runs that differ only in
//! redundancy see the same arrival process.

use std::collections::{HashMap, VecDeque};

use rand::distr::{Bernoulli, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Poisson;
use thiserror::Error;

use crate::erasure::{CodeParams, Codec, Generation, Packet, MAX_CODE_LEN};

/// Fraction of recovered generations decoded end to end in verify mode.
pub const VERIFY_SAMPLE_RATE: f64 = 0.01;
const VERIFY_PAYLOAD_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("simulation parameter `{name}` out of range: {value}")]
    InvalidParam { name: &'static str, value: f64 },
    #[error("per-node redundancy list has {got} entries for {expected} nodes")]
    RedundancyLength { expected: usize, got: usize },
}

/// A full simulator scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub m_nodes: usize,
    /// Mean new generations per slot per node.
    pub lambda_slot: f64,
    pub k: usize,
    pub r: usize,
    /// Optional per-node redundancy overriding `r`.
    pub node_redundancy: Option<Vec<usize>>,
    /// Per-packet channel erasure probability.
    pub erasure_prob: f64,
    /// Backoff window `W`; draws are uniform on `[1, W]`.
    pub backoff_window: u32,
    pub slots: u64,
    pub seed: u64,
    /// `false` runs the conventional retransmission mode.
    pub coding_enabled: bool,
    /// Decode a sample of recovered generations through the real codec.
    pub verify_decode: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            m_nodes: 5,
            lambda_slot: 0.01,
            k: 4,
            r: 2,
            node_redundancy: None,
            erasure_prob: 0.1,
            backoff_window: 16,
            slots: 20_000,
            seed: 1,
            coding_enabled: true,
            verify_decode: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |name: &'static str, value: f64| Err(SimError::InvalidParam { name, value });
        if self.m_nodes < 1 {
            return bad("m_nodes", self.m_nodes as f64);
        }
        if !(self.lambda_slot >= 0.0 && self.lambda_slot.is_finite()) {
            return bad("lambda_slot", self.lambda_slot);
        }
        if self.k < 1 {
            return bad("k", self.k as f64);
        }
        if !(0.0..=1.0).contains(&self.erasure_prob) {
            return bad("erasure_prob", self.erasure_prob);
        }
        if self.backoff_window < 1 {
            return bad("backoff_window", self.backoff_window as f64);
        }
        if self.slots < 1 {
            return bad("slots", self.slots as f64);
        }
        if let Some(rs) = &self.node_redundancy {
            if rs.len() != self.m_nodes {
                return Err(SimError::RedundancyLength { expected: self.m_nodes, got: rs.len() });
            }
        }
        for i in 0..self.m_nodes {
            let n = self.k + self.redundancy_of(i);
            if self.coding_enabled && n > MAX_CODE_LEN {
                return bad("r", self.redundancy_of(i) as f64);
            }
        }
        Ok(())
    }

    /// Redundancy used by node `i`.
    pub fn redundancy_of(&self, i: usize) -> usize {
        self.node_redundancy.as_ref().map_or(self.r, |rs| rs[i])
    }

    /// Packets queued per generation by node `i`.
    pub fn packets_per_generation(&self, i: usize) -> usize {
        if self.coding_enabled {
            self.k + self.redundancy_of(i)
        } else {
            self.k
        }
    }

    /// Sets the per-node generation rate from a network-wide offered load in
    /// source packets per slot.
    pub fn with_offered_load(mut self, load: f64) -> Self {
        self.lambda_slot = load / (self.m_nodes * self.k) as f64;
        self
    }
}

/// What happened on the channel in one slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SlotKind {
    Idle,
    Success(usize),
    Collision(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotOutcome {
    pub kind: SlotKind,
    /// A success that the channel erased.
    pub erased: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct QueuedPacket {
    generation: usize,
    index: u16,
}

/// Per-node counters.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeStats {
    pub attempts: u64,
    pub deliveries: u64,
    pub collisions: u64,
    pub erasures: u64,
    pub deferrals: u64,
    pub generations: u64,
    pub recovered: u64,
    pub delay_sum: u64,
}

impl NodeStats {
    pub fn mean_delay(&self) -> Option<f64> {
        (self.recovered > 0).then(|| self.delay_sum as f64 / self.recovered as f64)
    }
}

/// Live state of one node.
#[derive(Debug, Clone, Default)]
pub struct NodeState {
    queue: VecDeque<QueuedPacket>,
    /// First slot at which the node may sense the channel again.
    eligible_at: u64,
    pub stats: NodeStats,
}

impl NodeState {
    pub fn queue_len(&self) -> usize {
        self.queue.len()
    }

    /// Remaining deferral slots as seen from slot `t`.
    pub fn backoff(&self, t: u64) -> u64 {
        self.eligible_at.saturating_sub(t)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationRecord {
    pub id: usize,
    pub owner: usize,
    pub arrival_slot: u64,
    /// Packets queued for this generation (`N` coded or `k` plain).
    pub packets: usize,
    pub sent: usize,
    pub received: usize,
    pub recovered_at: Option<u64>,
    /// Indices of the first `k` packets to arrive.
    pub received_indices: Vec<u16>,
}

impl GenerationRecord {
    pub fn delay(&self) -> Option<u64> {
        self.recovered_at.map(|t| t - self.arrival_slot)
    }
}

/// Measured statistics of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub slots: u64,
    /// Recovered source packets per slot.
    pub throughput: f64,
    /// Mean arrival-to-recovery time over recovered generations, in slots.
    pub mean_delay: Option<f64>,
    pub collision_rate: f64,
    pub recovery_rate: f64,
    pub idle_slots: u64,
    pub success_slots: u64,
    pub collision_slots: u64,
    pub erased_slots: u64,
    pub generations_arrived: u64,
    pub generations_recovered: u64,
    pub packets_enqueued: u64,
    pub packets_delivered: u64,
    /// Coded packets lost and not retransmitted.
    pub packets_dropped: u64,
    pub packets_queued: u64,
    /// Transmissions, counting every node in a collision.
    pub attempts: u64,
    /// Transmissions lost to collision or erasure.
    pub failed_attempts: u64,
    pub verified_decodes: u64,
    pub decode_failures: u64,
    pub nodes: Vec<NodeStats>,
    pub records: Vec<GenerationRecord>,
}

impl SimResult {
    /// Packet and transmission accounting balance exactly.
    pub fn conservation_holds(&self) -> bool {
        self.packets_enqueued == self.packets_delivered + self.packets_dropped + self.packets_queued
            && self.attempts == self.packets_delivered + self.failed_attempts
            && self.slots == self.idle_slots + self.success_slots + self.collision_slots
    }

    /// Pooled mean delay of node `i`'s recovered generations.
    pub fn node_mean_delay(&self, i: usize) -> Option<f64> {
        self.nodes.get(i).and_then(NodeStats::mean_delay)
    }
}

/// Stream ids for the ChaCha8 generators.
fn arrival_stream(node: usize) -> u64 {
    2 * node as u64
}
fn backoff_stream(node: usize) -> u64 {
    2 * node as u64 + 1
}
fn channel_stream(m: usize) -> u64 {
    2 * m as u64
}
fn verify_stream(m: usize) -> u64 {
    2 * m as u64 + 1
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs one deterministic simulation.
pub fn simulate(cfg: &SimConfig) -> Result<SimResult, SimError> {
    cfg.validate()?;
    let m = cfg.m_nodes;
    let w = cfg.backoff_window;
    let mut arrivals: Vec<ChaCha8Rng> = (0..m).map(|i| stream_rng(cfg.seed, arrival_stream(i))).collect();
    let mut backoffs: Vec<ChaCha8Rng> = (0..m).map(|i| stream_rng(cfg.seed, backoff_stream(i))).collect();
    let mut channel = stream_rng(cfg.seed, channel_stream(m));
    let mut verify_rng = stream_rng(cfg.seed, verify_stream(m));
    let poisson = (cfg.lambda_slot > 0.0).then(|| Poisson::new(cfg.lambda_slot).expect("positive finite rate"));
    let erasure = Bernoulli::new(cfg.erasure_prob).expect("probability in [0, 1]");
    let sampler = Bernoulli::new(VERIFY_SAMPLE_RATE).expect("constant rate");
    let mut codecs: HashMap<usize, Codec> = HashMap::new();

    let mut nodes: Vec<NodeState> = vec![NodeState::default(); m];
    let mut records: Vec<GenerationRecord> = Vec::new();
    let mut res = SimResult {
        slots: cfg.slots,
        throughput: 0.0,
        mean_delay: None,
        collision_rate: 0.0,
        recovery_rate: 0.0,
        idle_slots: 0,
        success_slots: 0,
        collision_slots: 0,
        erased_slots: 0,
        generations_arrived: 0,
        generations_recovered: 0,
        packets_enqueued: 0,
        packets_delivered: 0,
        packets_dropped: 0,
        packets_queued: 0,
        attempts: 0,
        failed_attempts: 0,
        verified_decodes: 0,
        decode_failures: 0,
        nodes: Vec::new(),
        records: Vec::new(),
    };

    let mut prev_busy = false;
    let mut transmitters: Vec<usize> = Vec::with_capacity(m);
    for t in 0..cfg.slots {
        if let Some(poisson) = &poisson {
            for (i, node) in nodes.iter_mut().enumerate() {
                let count = poisson.sample(&mut arrivals[i]) as u64;
                for _ in 0..count {
                    let id = records.len();
                    let packets = cfg.packets_per_generation(i);
                    records.push(GenerationRecord {
                        id,
                        owner: i,
                        arrival_slot: t,
                        packets,
                        sent: 0,
                        received: 0,
                        recovered_at: None,
                        received_indices: Vec::new(),
                    });
                    node.queue
                        .extend((0..packets).map(|index| QueuedPacket { generation: id, index: index as u16 }));
                    node.stats.generations += 1;
                    res.packets_enqueued += packets as u64;
                }
            }
        }

        transmitters.clear();
        for (i, node) in nodes.iter_mut().enumerate() {
            if node.queue.is_empty() || t < node.eligible_at {
                continue;
            }
            if prev_busy {
                node.eligible_at = t + backoffs[i].random_range(1..=w) as u64;
                node.stats.deferrals += 1;
            } else {
                transmitters.push(i);
            }
        }

        let outcome = match transmitters.len() {
            0 => SlotOutcome { kind: SlotKind::Idle, erased: false },
            1 => {
                let erased = erasure.sample(&mut channel);
                SlotOutcome { kind: SlotKind::Success(transmitters[0]), erased }
            }
            _ => SlotOutcome { kind: SlotKind::Collision(transmitters.clone()), erased: false },
        };

        match outcome.kind {
            SlotKind::Idle => res.idle_slots += 1,
            SlotKind::Success(i) => {
                res.success_slots += 1;
                res.attempts += 1;
                let node = &mut nodes[i];
                node.stats.attempts += 1;
                if outcome.erased {
                    res.erased_slots += 1;
                    res.failed_attempts += 1;
                    node.stats.erasures += 1;
                    if cfg.coding_enabled {
                        let pkt = node.queue.pop_front().expect("transmitter has a packet");
                        records[pkt.generation].sent += 1;
                        res.packets_dropped += 1;
                    }
                } else {
                    let pkt = node.queue.pop_front().expect("transmitter has a packet");
                    res.packets_delivered += 1;
                    node.stats.deliveries += 1;
                    let rec = &mut records[pkt.generation];
                    rec.sent += 1;
                    rec.received += 1;
                    if rec.received_indices.len() < cfg.k {
                        rec.received_indices.push(pkt.index);
                    }
                    if rec.received == cfg.k && rec.recovered_at.is_none() {
                        rec.recovered_at = Some(t + 1);
                        node.stats.recovered += 1;
                        node.stats.delay_sum += t + 1 - rec.arrival_slot;
                        res.generations_recovered += 1;
                        if cfg.coding_enabled && cfg.verify_decode && sampler.sample(&mut verify_rng) {
                            let ok = verify_recovery(cfg, rec, &mut codecs, &mut verify_rng);
                            res.verified_decodes += 1;
                            if !ok {
                                res.decode_failures += 1;
                            }
                        }
                    }
                }
            }
            SlotKind::Collision(ref who) => {
                res.collision_slots += 1;
                for &i in who {
                    res.attempts += 1;
                    res.failed_attempts += 1;
                    let node = &mut nodes[i];
                    node.stats.attempts += 1;
                    node.stats.collisions += 1;
                    if cfg.coding_enabled {
                        let pkt = node.queue.pop_front().expect("transmitter has a packet");
                        records[pkt.generation].sent += 1;
                        res.packets_dropped += 1;
                    }
                    node.eligible_at = t + backoffs[i].random_range(1..=w) as u64;
                }
            }
        }
        prev_busy = !transmitters.is_empty();
    }

    res.packets_queued = nodes.iter().map(|n| n.queue.len() as u64).sum();
    res.generations_arrived = records.len() as u64;
    let slots = cfg.slots as f64;
    res.throughput = (res.generations_recovered * cfg.k as u64) as f64 / slots;
    res.collision_rate = res.collision_slots as f64 / slots;
    if res.generations_arrived > 0 {
        res.recovery_rate = res.generations_recovered as f64 / res.generations_arrived as f64;
    }
    if res.generations_recovered > 0 {
        let total: u64 = nodes.iter().map(|n| n.stats.delay_sum).sum();
        res.mean_delay = Some(total as f64 / res.generations_recovered as f64);
    }
    res.nodes = nodes.into_iter().map(|n| n.stats).collect();
    res.records = records;
    Ok(res)
}

/// Encodes random payloads for `rec`'s code shape, keeps only the packets the
/// simulator saw arrive, and checks the decoder returns the source.
fn verify_recovery(
    cfg: &SimConfig,
    rec: &GenerationRecord,
    codecs: &mut HashMap<usize, Codec>,
    rng: &mut ChaCha8Rng,
) -> bool {
    let r = cfg.redundancy_of(rec.owner);
    let codec = codecs
        .entry(r)
        .or_insert_with(|| Codec::new(CodeParams::new(cfg.k, r).expect("validated code shape")));
    let source: Vec<Vec<u8>> =
        (0..cfg.k).map(|_| (0..VERIFY_PAYLOAD_LEN).map(|_| rng.random()).collect()).collect();
    let gen = Generation::new(source);
    let Ok(word) = codec.encode(&gen) else {
        return false;
    };
    let rx: Vec<Packet> = rec.received_indices.iter().map(|&i| word.coded[i as usize].clone()).collect();
    codec.decode(&rx).is_ok_and(|g| g == gen)
}

/// A Monte Carlo estimate with its binomial or sample standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl Estimate {
    /// Whether `value` lies within `z` standard errors of the estimate.
    /// A zero standard error demands exact agreement.
    pub fn within(&self, value: f64, z: f64) -> bool {
        (self.mean - value).abs() <= z * self.stderr
    }
}

/// Fraction of transmissions delivered clean, pooled over `trials` runs with
/// seeds `seed, seed + 1, ...`.
pub fn estimate_p_success(cfg: &SimConfig, trials: u32) -> Result<Option<Estimate>, SimError> {
    let mut attempts = 0u64;
    let mut delivered = 0u64;
    for j in 0..trials.max(1) {
        let run = SimConfig { seed: cfg.seed.wrapping_add(j as u64), ..cfg.clone() };
        let res = simulate(&run)?;
        attempts += res.attempts;
        delivered += res.packets_delivered;
    }
    if attempts == 0 {
        return Ok(None);
    }
    let p = delivered as f64 / attempts as f64;
    Ok(Some(Estimate { mean: p, stderr: (p * (1.0 - p) / attempts as f64).sqrt(), samples: attempts }))
}

/// Channel-level Monte Carlo of the recovery score: each of `n_total` packets
/// arrives independently with probability `p`; a trial scores 1 when at
/// least `k` arrive and `(systematic arrivals) / k` otherwise.
pub fn estimate_p_recover(n_total: usize, k: usize, p: f64, trials: u64, seed: u64) -> Estimate {
    assert!(k >= 1 && k <= n_total, "need 1 <= k <= N");
    assert!((0.0..=1.0).contains(&p), "p must be a probability");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let arrive = Bernoulli::new(p).expect("probability in [0, 1]");
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..trials {
        let sys = (0..k).filter(|_| arrive.sample(&mut rng)).count();
        let par = (k..n_total).filter(|_| arrive.sample(&mut rng)).count();
        let score = if sys + par >= k { 1.0 } else { sys as f64 / k as f64 };
        sum += score;
        sum_sq += score * score;
    }
    let n = trials.max(1) as f64;
    let mean = sum / n;
    let var = if trials > 1 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    Estimate { mean, stderr: (var / n).sqrt(), samples: trials }
}

/// Mean delay at each offered load (source packets per slot, network-wide).
pub fn measured_delay_curve(template: &SimConfig, loads: &[f64]) -> Result<Vec<(f64, Option<f64>)>, SimError> {
    loads
        .iter()
        .map(|&load| {
            let res = simulate(&template.clone().with_offered_load(load))?;
            let d = if res.recovery_rate > 0.0 { res.mean_delay } else { None };
            Ok((load, d))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SimConfig {
        SimConfig { slots: 5_000, ..SimConfig::default() }
    }

    #[test]
    fn single_node_never_collides() {
        for coding in [true, false] {
            for lambda in [0.01, 0.2, 1.0] {
                let c = SimConfig { m_nodes: 1, lambda_slot: lambda, coding_enabled: coding, ..cfg() };
                let res = simulate(&c).unwrap();
                assert_eq!(res.collision_rate, 0.0);
                assert_eq!(res.collision_slots, 0);
                assert!(res.conservation_holds());
            }
        }
    }

    #[test]
    fn full_erasure_recovers_nothing() {
        for coding in [true, false] {
            let c = SimConfig { erasure_prob: 1.0, coding_enabled: coding, ..cfg() };
            let res = simulate(&c).unwrap();
            assert!(res.generations_arrived > 0);
            assert_eq!(res.recovery_rate, 0.0);
            assert_eq!(res.mean_delay, None);
            assert!(res.conservation_holds());
        }
    }

    #[test]
    fn same_seed_same_result() {
        let c = SimConfig { lambda_slot: 0.05, ..cfg() };
        assert_eq!(simulate(&c).unwrap(), simulate(&c).unwrap());
        let other = simulate(&SimConfig { seed: 2, ..c.clone() }).unwrap();
        assert_ne!(simulate(&c).unwrap().records, other.records);
    }

    #[test]
    fn no_arrivals_gives_empty_statistics() {
        let res = simulate(&SimConfig { lambda_slot: 0.0, ..cfg() }).unwrap();
        assert_eq!(res.generations_arrived, 0);
        assert_eq!(res.recovery_rate, 0.0);
        assert_eq!(res.mean_delay, None);
        assert_eq!(res.throughput, 0.0);
        assert_eq!(res.idle_slots, res.slots);
    }

    #[test]
    fn uncontended_packet_takes_one_slot() {
        let c = SimConfig {
            m_nodes: 1,
            lambda_slot: 0.001,
            k: 1,
            r: 0,
            erasure_prob: 0.0,
            backoff_window: 1,
            coding_enabled: false,
            slots: 20_000,
            ..SimConfig::default()
        };
        let res = simulate(&c).unwrap();
        assert!(res.generations_recovered > 5);
        assert_eq!(res.mean_delay, Some(1.0));
        assert!(res.records.iter().all(|r| r.delay() == Some(1)));
        let curve = measured_delay_curve(&c, &[0.0, 0.001]).unwrap();
        assert_eq!(curve, vec![(0.0, None), (0.001, Some(1.0))]);
    }

    #[test]
    fn recovery_happens_at_kth_arrival() {
        let c = SimConfig { lambda_slot: 0.03, erasure_prob: 0.2, ..cfg() };
        let res = simulate(&c).unwrap();
        for rec in &res.records {
            assert!(rec.received <= rec.packets);
            assert!(rec.sent <= rec.packets);
            assert_eq!(rec.recovered_at.is_some(), rec.received >= c.k);
        }
    }

    #[test]
    fn conventional_mode_delivers_every_packet_eventually() {
        let c = SimConfig { coding_enabled: false, lambda_slot: 0.01, erasure_prob: 0.3, ..cfg() };
        let res = simulate(&c).unwrap();
        assert_eq!(res.packets_dropped, 0);
        assert!(res.failed_attempts > 0);
        for rec in &res.records {
            assert_eq!(rec.packets, c.k);
            assert_eq!(rec.recovered_at.is_some(), rec.received == c.k);
        }
        assert!(res.conservation_holds());
    }

    #[test]
    fn verification_decodes_sampled_recoveries() {
        let c = SimConfig {
            lambda_slot: 0.02,
            erasure_prob: 0.2,
            slots: 50_000,
            verify_decode: true,
            ..SimConfig::default()
        };
        let res = simulate(&c).unwrap();
        assert!(res.verified_decodes > 0);
        assert_eq!(res.decode_failures, 0);
        // Sampling must not perturb the rest of the run.
        let plain = simulate(&SimConfig { verify_decode: false, ..c }).unwrap();
        assert_eq!(plain.records, res.records);
    }

    #[test]
    fn per_node_redundancy() {
        let c = SimConfig { node_redundancy: Some(vec![0, 1, 2, 3, 4]), lambda_slot: 0.02, ..cfg() };
        let res = simulate(&c).unwrap();
        for rec in &res.records {
            assert_eq!(rec.packets, c.k + rec.owner);
        }
        let bad = SimConfig { node_redundancy: Some(vec![1, 2]), ..cfg() };
        assert_eq!(simulate(&bad), Err(SimError::RedundancyLength { expected: 5, got: 2 }));
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(simulate(&SimConfig { m_nodes: 0, ..cfg() }).is_err());
        assert!(simulate(&SimConfig { backoff_window: 0, ..cfg() }).is_err());
        assert!(simulate(&SimConfig { slots: 0, ..cfg() }).is_err());
        assert!(simulate(&SimConfig { erasure_prob: 1.5, ..cfg() }).is_err());
        assert!(simulate(&SimConfig { k: 200, r: 100, ..cfg() }).is_err());
        assert!(simulate(&SimConfig { k: 200, r: 100, coding_enabled: false, ..cfg() }).is_ok());
    }

    #[test]
    fn p_success_estimates() {
        let c = SimConfig { m_nodes: 1, erasure_prob: 0.0, lambda_slot: 0.05, ..cfg() };
        let e = estimate_p_success(&c, 2).unwrap().unwrap();
        assert_eq!(e.mean, 1.0);
        let c = SimConfig { m_nodes: 1, erasure_prob: 0.3, lambda_slot: 0.05, ..cfg() };
        let e = estimate_p_success(&c, 4).unwrap().unwrap();
        assert!(e.within(0.7, 3.0), "{e:?}");
        let c = SimConfig { m_nodes: 2, erasure_prob: 0.0, lambda_slot: 2.0, ..cfg() };
        let e = estimate_p_success(&c, 1).unwrap().unwrap();
        assert!(e.mean < 1.0);
        let c = SimConfig { lambda_slot: 0.0, ..cfg() };
        assert_eq!(estimate_p_success(&c, 3).unwrap(), None);
    }

    #[test]
    fn p_recover_estimates() {
        assert_eq!(estimate_p_recover(5, 3, 1.0, 1000, 7).mean, 1.0);
        assert_eq!(estimate_p_recover(5, 3, 0.0, 1000, 7).mean, 0.0);
        let e = estimate_p_recover(3, 2, 0.5, 200_000, 11);
        assert!(e.within(0.625, 3.0), "{e:?}");
    }
}
