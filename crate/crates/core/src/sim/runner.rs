use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::scenario::{Scenario, ScenarioKind};
use super::topology::{gen_random_topology, gen_relay_topology, RandomTopology};
use crate::error::Result;
use crate::geometry::{NodeId, Topology};
use crate::mac::{HopOutcome, MacConfig, PACKET_BYTES};
use crate::phy::{simulate_symbol, CoopLinks, LinkStats, PhyConfig, QamParams, Transmission};
use crate::relaysel::relay_metric;
use crate::routing::{route, HopMode, RouteConfig, RouteFailure, RouteResult};
use crate::time::Micros;

/// Random stream `stream` of the generator seeded with `seed`. Streams do not
/// overlap, so every trial draws the same numbers whatever the execution order.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream of packet `packet` on topology `topology` at sweep point `point`;
/// packet 0 draws the topology itself.
pub fn stream_id(point: usize, topology: usize, packet: usize) -> u64 {
    ((point as u64) << 44) | ((topology as u64) << 22) | packet as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arm {
    CoopGeo,
    Baseline,
}

impl Arm {
    pub fn name(self) -> &'static str {
        match self {
            Arm::CoopGeo => "coopgeo",
            Arm::Baseline => "baseline",
        }
    }
}

/// One packet carried end to end.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    /// Value of the swept quantity.
    pub x: f64,
    pub arm: Arm,
    pub topology: usize,
    pub packet: usize,
    pub delivered: bool,
    pub hops: usize,
    pub modes: Vec<HopMode>,
    pub hop_attempts: usize,
    /// Attempts in which a forwarder was selected.
    pub hops_with_forwarder: usize,
    /// Attempts whose forwarder was left without a decoded packet.
    pub undecoded_hops: usize,
    /// The packet was dropped because a hop kept colliding.
    pub collision_failure: bool,
    pub symbol_errors: u64,
    pub rounds: usize,
    pub collided_rounds: usize,
    pub elapsed: Micros,
    pub bits_delivered: f64,
    pub bits_per_symbol: f64,
}

impl TrialRecord {
    pub fn from_route(x: f64, arm: Arm, topology: usize, packet: usize, r: &RouteResult, qam: &QamParams) -> Self {
        let attempts = &r.attempts;
        Self {
            x,
            arm,
            topology,
            packet,
            delivered: r.delivered,
            hops: r.hops.len(),
            modes: r.hops.iter().map(|h| h.mode).collect(),
            hop_attempts: attempts.len(),
            hops_with_forwarder: attempts.iter().filter(|a| a.forwarder.is_some()).count(),
            undecoded_hops: attempts
                .iter()
                .filter(|a| matches!(a.outcome, HopOutcome::ResidualError | HopOutcome::CoopFailNoRelay))
                .count(),
            collision_failure: r.failure_reason == Some(RouteFailure::RetriesExhausted(HopOutcome::CollisionAbort)),
            symbol_errors: attempts.iter().map(|a| a.symbol_errors as u64).sum(),
            rounds: attempts.iter().map(|a| a.rounds.len()).sum(),
            collided_rounds: attempts.iter().map(|a| a.rounds.iter().filter(|x| x.collided).count()).sum(),
            elapsed: r.elapsed,
            bits_delivered: if r.delivered { (PACKET_BYTES * 8) as f64 } else { 0.0 },
            bits_per_symbol: qam.bits_per_symbol(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SerArm {
    /// The relay ranked `k` by metric, 1 being the best.
    Rank(usize),
    Direct,
    Random,
}

impl SerArm {
    pub fn name(self) -> String {
        match self {
            SerArm::Rank(k) => format!("ser_rank{k}"),
            SerArm::Direct => "ser_direct".into(),
            SerArm::Random => "ser_random".into(),
        }
    }
}

/// Symbol error count of one arm at one SNR, summed over topologies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SerRecord {
    pub snr_db: f64,
    pub arm: SerArm,
    pub errors: u64,
    pub symbols: u64,
}

impl SerRecord {
    pub fn ser(&self) -> f64 {
        if self.symbols == 0 {
            0.0
        } else {
            self.errors as f64 / self.symbols as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub scenario: Scenario,
    /// Sorted by (x, arm, topology, packet).
    pub trials: Vec<TrialRecord>,
    /// Sorted by (snr, arm).
    pub ser: Vec<SerRecord>,
}

impl RunResult {
    pub fn empty(scenario: Scenario) -> Self {
        Self { scenario, trials: Vec::new(), ser: Vec::new() }
    }

    /// Associative, order-independent union of two results of the same scenario.
    pub fn merge(mut self, other: RunResult) -> RunResult {
        self.trials.extend(other.trials);
        self.trials.sort_by(|a, b| {
            a.x.total_cmp(&b.x).then(a.arm.cmp(&b.arm)).then(a.topology.cmp(&b.topology)).then(a.packet.cmp(&b.packet))
        });
        for rec in other.ser {
            match self.ser.iter_mut().find(|r| r.snr_db == rec.snr_db && r.arm == rec.arm) {
                Some(r) => {
                    r.errors += rec.errors;
                    r.symbols += rec.symbols;
                }
                None => self.ser.push(rec),
            }
        }
        self.ser.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db).then(a.arm.cmp(&b.arm)));
        self
    }

    pub fn ser_of(&self, snr_db: f64, arm: SerArm) -> Option<&SerRecord> {
        self.ser.iter().find(|r| r.snr_db == snr_db && r.arm == arm)
    }
}

/// Relays of a relay-ordering topology sorted by metric, best first.
pub fn rank_relays(topology: &Topology, qam: &QamParams, path_loss_exp: f64) -> Vec<NodeId> {
    let (s, f) = (topology.position(NodeId(0)), topology.position(NodeId(1)));
    let mut relays: Vec<(NodeId, f64)> = (2..topology.len())
        .map(|i| (NodeId(i), relay_metric(s, f, topology.position(NodeId(i)), path_loss_exp, qam)))
        .collect();
    relays.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    relays.into_iter().map(|(id, _)| id).collect()
}

/// Symbol errors of `symbols` draws of one transmission scheme.
pub fn count_symbol_errors<R: Rng + ?Sized>(
    tx: Transmission,
    cfg: &PhyConfig,
    qam: &QamParams,
    symbols: u64,
    rng: &mut R,
) -> u64 {
    (0..symbols).filter(|_| simulate_symbol(tx, cfg, qam, rng)).count() as u64
}

fn relay_ordering_topology(s: &Scenario, t: usize) -> Vec<SerRecord> {
    let qam = QamParams::new(s.qam_m[0]).expect("validated");
    let mut rng = substream(s.seed, stream_id(0, t, 0));
    let topo = gen_relay_topology(s.neighbors[0], &mut rng);
    let ranked = rank_relays(&topo, &qam, 2.0);
    let random = ranked[rng.gen_range(0..ranked.len())];
    let (sp, fp) = (topo.position(NodeId(0)), topo.position(NodeId(1)));
    let coop = |id: NodeId| {
        let rp = topo.position(id);
        Transmission::Cooperative(CoopLinks::from_distances(
            1.0,
            crate::geometry::distance(sp, rp),
            crate::geometry::distance(rp, fp),
            2.0,
        ))
    };
    let mut arms: Vec<(SerArm, Transmission)> =
        ranked.iter().enumerate().map(|(k, &id)| (SerArm::Rank(k + 1), coop(id))).collect();
    arms.push((SerArm::Direct, Transmission::Direct { source_forwarder: LinkStats::new(1.0) }));
    arms.push((SerArm::Random, coop(random)));

    let mut out = Vec::new();
    for (k, snr_db) in s.snr_grid().into_iter().enumerate() {
        let cfg = PhyConfig::from_snr_db(snr_db);
        for &(arm, tx) in &arms {
            // Every arm replays the same stream.
            let mut sym_rng = substream(s.seed, stream_id(k + 1, t, 0));
            let errors = count_symbol_errors(tx, &cfg, &qam, s.symbols as u64, &mut sym_rng);
            out.push(SerRecord { snr_db, arm, errors, symbols: s.symbols as u64 });
        }
    }
    out
}

fn run_relay_ordering(s: &Scenario) -> RunResult {
    (0..s.trials)
        .into_par_iter()
        .map(|t| RunResult { scenario: s.clone(), trials: Vec::new(), ser: relay_ordering_topology(s, t) })
        .reduce(|| RunResult::empty(s.clone()), RunResult::merge)
}

/// Route configuration of sweep point `x`.
pub fn point_config(s: &Scenario, x: f64) -> Result<(RouteConfig, RandomTopology)> {
    let mut neighbors = s.neighbors[0] as f64;
    let mut t_max = s.tmax_us[0];
    let mut order = s.qam_m[0];
    let mut snr = s.snr_db_min;
    match s.kind {
        ScenarioKind::PerVsDensity => neighbors = x,
        ScenarioKind::TmaxSweep => t_max = x,
        ScenarioKind::ThroughputVsConstellation => order = x as u32,
        ScenarioKind::Custom => snr = x,
        ScenarioKind::RelayOrdering => {}
    }
    let qam = QamParams::new(order)?;
    let mac = MacConfig { t_max: Micros(t_max), nsa: s.nsa, ..MacConfig::for_constellation(order) };
    mac.validate()?;
    let cfg = RouteConfig::new(PhyConfig::from_snr_db(snr), qam, mac);
    let placement = RandomTopology::with_degree(s.nodes, s.radio_range, neighbors)?;
    Ok((cfg, placement))
}

fn run_protocol(s: &Scenario, arms: &[Arm]) -> Result<RunResult> {
    let points = s.axis_values();
    let jobs: Vec<(usize, usize)> = (0..points.len()).flat_map(|p| (0..s.topologies).map(move |t| (p, t))).collect();
    // Only the density sweep changes the topologies; other sweeps replay the
    // same topologies and packet streams at every point.
    let shared = s.kind != ScenarioKind::PerVsDensity;
    let parts: Vec<Result<RunResult>> = jobs
        .into_par_iter()
        .map(|(p, t)| {
            let x = points[p];
            let sp = if shared { 0 } else { p };
            let (cfg, spec) = point_config(s, x)?;
            let placement = gen_random_topology(&spec, &mut substream(s.seed, stream_id(sp, t, 0)))?;
            let mut trials = Vec::new();
            for &arm in arms {
                let arm_cfg = if arm == Arm::Baseline { cfg.baseline() } else { cfg };
                for k in 0..s.trials {
                    let mut rng = substream(s.seed, stream_id(sp, t, k + 1));
                    let r = route(&placement.topology, placement.source, placement.dest, &arm_cfg, &mut rng);
                    trials.push(TrialRecord::from_route(x, arm, t, k, &r, &cfg.qam));
                }
            }
            Ok(RunResult { scenario: s.clone(), trials, ser: Vec::new() })
        })
        .collect();
    let mut out = RunResult::empty(s.clone());
    for part in parts {
        out = out.merge(part?);
    }
    Ok(out)
}

/// Runs every trial of a scenario. Protocol scenarios run CoopGeo, plus the
/// baseline when `s.baseline` is set; both arms see the same topologies and
/// random streams.
pub fn run_scenario(s: &Scenario) -> Result<RunResult> {
    s.validate()?;
    if s.kind == ScenarioKind::RelayOrdering {
        return Ok(run_relay_ordering(s));
    }
    let arms: &[Arm] = if s.baseline { &[Arm::CoopGeo, Arm::Baseline] } else { &[Arm::CoopGeo] };
    run_protocol(s, arms)
}

/// The direct-transmission baseline alone: same greedy contention and timers,
/// cooperation never requested, failed hops retried up to the restart cap.
pub fn run_baseline(s: &Scenario) -> Result<RunResult> {
    s.validate()?;
    if s.kind == ScenarioKind::RelayOrdering {
        return Err(crate::error::ConfigError::Invalid("the baseline is a protocol scenario".into()).into());
    }
    run_protocol(s, &[Arm::Baseline])
}
