//! Slot-synchronous simulation of the randomized transmission procedures.
//!
//! A round has `2m` slots with `m = ceil(μΔ)`. Every transmitter picks one
//! slot `x` in `[1, m]` from its own random stream and sends its data there;
//! the second half carries error echoes (with collision detection) or
//! acknowledgements (without). The simulator runs on the bidirectional
//! sub-relation of the graph.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::backbone::{Backbone, PropagationTree};
use crate::error::{Error, Result};
use crate::model::{NetworkGraph, NodeId};
use crate::schedule::{Batch, Phase, Rumor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Cd,
    NoCd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "max_degree")]
pub enum DegreeKnowledge {
    /// Nodes know the true maximum degree.
    #[default]
    Exact,
    /// Nodes use the given value as the maximum degree.
    Supplied(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub mu: f64,
    pub mode: Mode,
    pub seed: u64,
    pub max_rounds: usize,
    #[serde(default)]
    pub degree_knowledge: DegreeKnowledge,
}

impl SimConfig {
    pub fn new(mode: Mode, mu: f64, seed: u64) -> Self {
        Self {
            mu,
            mode,
            seed,
            max_rounds: 10_000,
            degree_knowledge: DegreeKnowledge::Exact,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(Error::InvalidConfig(format!("mu must be positive, got {}", self.mu)));
        }
        if self.max_rounds < 1 {
            return Err(Error::InvalidConfig("max_rounds must be at least 1".into()));
        }
        if self.degree_knowledge == DegreeKnowledge::Supplied(0) {
            return Err(Error::InvalidConfig("supplied max degree must be positive".into()));
        }
        Ok(())
    }

    /// Slots per half round, `ceil(μΔ)`, at least 1.
    pub fn slots(&self, g: &NetworkGraph) -> usize {
        let delta = match self.degree_knowledge {
            DegreeKnowledge::Exact => g.max_degree(),
            DegreeKnowledge::Supplied(d) => d,
        };
        ((self.mu * delta as f64).ceil() as usize).max(1)
    }
}

/// A batch waiting to be delivered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pending {
    pub batch: Batch,
    pub phase: Phase,
    /// Neighbors that still have to acknowledge (used without collision detection).
    pub targets: BTreeSet<usize>,
    pub attempts: u32,
}

#[derive(Debug, Clone)]
pub struct NodeState {
    pub held: BTreeSet<Rumor>,
    pub pending: VecDeque<Pending>,
    rng: ChaCha8Rng,
}

impl NodeState {
    /// Neighbors the node is still waiting on for its current batch.
    pub fn awaiting_ack(&self) -> Option<&BTreeSet<usize>> {
        self.pending.front().map(|p| &p.targets)
    }

    pub fn enqueue(&mut self, batch: Batch, phase: Phase, targets: BTreeSet<usize>) {
        self.pending.push_back(Pending {
            batch,
            phase,
            targets,
            attempts: 0,
        });
    }
}

/// One state per node, in graph order. Node `v` draws from stream `id(v)` of
/// a generator seeded with `cfg.seed`.
pub fn init_states(g: &NetworkGraph, cfg: &SimConfig) -> Result<Vec<NodeState>> {
    cfg.validate()?;
    Ok(g.ids()
        .map(|id| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(id.0 as u64);
            NodeState {
                held: BTreeSet::new(),
                pending: VecDeque::new(),
                rng,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MessageKind {
    Data,
    Error,
    Ack,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub round: usize,
    pub slot: usize,
    pub transmitter: NodeId,
    pub kind: MessageKind,
    pub receivers_ok: Vec<NodeId>,
    pub receivers_collided: Vec<NodeId>,
}

/// Serializes trace records as JSON lines.
pub fn trace_jsonl(records: &[TraceRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("trace record serializes"));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TxOutcome {
    pub node: NodeId,
    pub slot: usize,
    /// The current batch is finished and left the queue.
    pub success: bool,
    /// Error echoes from neighbors in this transmitter's echo slot.
    pub errors_heard: usize,
    /// Transmissions of the finished batch, set on success.
    pub attempts: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reception {
    pub receiver: usize,
    pub sender: usize,
    pub batch: Batch,
    pub phase: Phase,
}

#[derive(Debug, Clone, Default)]
pub struct RoundLog {
    pub round: usize,
    pub outcomes: Vec<TxOutcome>,
    pub receptions: Vec<Reception>,
    pub records: Vec<TraceRecord>,
    pub data_messages: usize,
    pub control_messages: usize,
}

/// Number of emitters in the closed neighborhood of every node.
fn closed_counts(adj: &[Vec<usize>], emitters: &[usize]) -> Vec<usize> {
    let mut cnt = vec![0; adj.len()];
    for &t in emitters {
        cnt[t] += 1;
        for &w in &adj[t] {
            cnt[w] += 1;
        }
    }
    cnt
}

fn slot_records(
    g: &NetworkGraph,
    round: usize,
    slot: usize,
    emitters: &[usize],
    cnt: &[usize],
    kind: MessageKind,
) -> Vec<TraceRecord> {
    let adj = g.sym_adj();
    let mut sorted = emitters.to_vec();
    sorted.sort_unstable();
    sorted
        .into_iter()
        .map(|t| {
            let (ok, bad): (Vec<usize>, Vec<usize>) = adj[t].iter().partition(|&&w| cnt[w] == 1);
            TraceRecord {
                round,
                slot,
                transmitter: g.id(t),
                kind,
                receivers_ok: ok.into_iter().map(|w| g.id(w)).collect(),
                receivers_collided: bad.into_iter().map(|w| g.id(w)).collect(),
            }
        })
        .collect()
}

struct DataHalf {
    m: usize,
    slot_of: BTreeMap<usize, usize>,
    by_slot: Vec<Vec<usize>>,
    counts: Vec<Vec<usize>>,
}

/// Draws data slots and resolves the first half of the round. A node
/// receives cleanly from `t` in slot `s` when `t` is the only emitter in its
/// closed neighborhood there.
fn data_half(
    g: &NetworkGraph,
    states: &mut [NodeState],
    transmitters: &BTreeSet<NodeId>,
    cfg: &SimConfig,
    log: &mut RoundLog,
) -> Result<DataHalf> {
    if states.len() != g.len() {
        return Err(Error::InvalidConfig("one state per node required".into()));
    }
    let m = cfg.slots(g);
    let mut slot_of = BTreeMap::new();
    let mut by_slot = vec![Vec::new(); m + 1];
    for &id in transmitters {
        let u = g.idx(id)?;
        if states[u].pending.is_empty() {
            return Err(Error::NoPendingBatch(id));
        }
        let x = states[u].rng.gen_range(1..=m);
        slot_of.insert(u, x);
        by_slot[x].push(u);
    }
    let adj = g.sym_adj();
    let mut counts = vec![Vec::new(); m + 1];
    for s in 1..=m {
        if by_slot[s].is_empty() {
            continue;
        }
        let cnt = closed_counts(adj, &by_slot[s]);
        log.records
            .extend(slot_records(g, log.round, s, &by_slot[s], &cnt, MessageKind::Data));
        for &t in &by_slot[s] {
            let front = states[t].pending.front().expect("checked above");
            let (batch, phase) = (front.batch.clone(), front.phase);
            for &w in &adj[t] {
                if cnt[w] == 1 {
                    log.receptions.push(Reception {
                        receiver: w,
                        sender: t,
                        batch: batch.clone(),
                        phase,
                    });
                }
            }
        }
        counts[s] = cnt;
    }
    log.data_messages += transmitters.len();
    for r in &log.receptions {
        let rumors = r.batch.rumors().clone();
        states[r.receiver].held.extend(rumors);
    }
    Ok(DataHalf {
        m,
        slot_of,
        by_slot,
        counts,
    })
}

/// One round of the collision-detection procedure.
///
/// Every node that senses a collision in data slot `x` (two or more
/// emitters in its closed neighborhood) echoes an error in slot `m + x`.
/// A transmitter succeeds iff it sensed no collision in its own slot and
/// its echo slot is silent; otherwise its batch stays queued.
pub fn run_round_cd(
    g: &NetworkGraph,
    states: &mut [NodeState],
    transmitters: &BTreeSet<NodeId>,
    cfg: &SimConfig,
    round: usize,
) -> Result<RoundLog> {
    if cfg.mode != Mode::Cd {
        return Err(Error::InvalidConfig(
            "collision-detection round requires mode cd".into(),
        ));
    }
    let mut log = RoundLog {
        round,
        ..Default::default()
    };
    let half = data_half(g, states, transmitters, cfg, &mut log)?;
    let adj = g.sym_adj();
    let mut echo: Vec<Vec<bool>> = vec![Vec::new(); half.m + 1];
    for (s, slot_echo) in echo.iter_mut().enumerate().skip(1) {
        if half.by_slot[s].is_empty() {
            continue;
        }
        let senders: Vec<usize> = (0..g.len()).filter(|&v| half.counts[s][v] >= 2).collect();
        if !senders.is_empty() {
            let cnt = closed_counts(adj, &senders);
            log.records
                .extend(slot_records(g, round, half.m + s, &senders, &cnt, MessageKind::Error));
            log.control_messages += senders.len();
        }
        let mut mask = vec![false; g.len()];
        for v in senders {
            mask[v] = true;
        }
        *slot_echo = mask;
    }
    for (&u, &x) in &half.slot_of {
        let errors_heard = adj[u].iter().filter(|&&w| echo[x][w]).count();
        let success = half.counts[x][u] < 2 && errors_heard == 0;
        let p = states[u].pending.front_mut().expect("transmitter has a batch");
        p.attempts += 1;
        let attempts = p.attempts;
        if success {
            states[u].pending.pop_front();
        }
        log.outcomes.push(TxOutcome {
            node: g.id(u),
            slot: x,
            success,
            errors_heard,
            attempts: success.then_some(attempts),
        });
    }
    Ok(log)
}

/// One round of the acknowledgement procedure.
///
/// A transmitter sends its batch with the list of neighbors still to
/// acknowledge. Each listed neighbor that received cleanly picks an ack slot
/// `m + y`. The ack reaches the transmitter iff `y` differs from the
/// transmitter's data slot and no other node in the closed neighborhoods of
/// the transmitter or the acker sends in slot `m + y`. A node acknowledges
/// all transmitters it heard in a single ack message. The batch finishes
/// when its list is empty.
pub fn run_round_nocd(
    g: &NetworkGraph,
    states: &mut [NodeState],
    transmitters: &BTreeSet<NodeId>,
    cfg: &SimConfig,
    round: usize,
) -> Result<RoundLog> {
    if cfg.mode != Mode::NoCd {
        return Err(Error::InvalidConfig("acknowledgement round requires mode no-cd".into()));
    }
    let mut log = RoundLog {
        round,
        ..Default::default()
    };
    let half = data_half(g, states, transmitters, cfg, &mut log)?;
    let adj = g.sym_adj();

    // acker -> transmitters it heard while listed
    let mut owed: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for r in &log.receptions {
        let listed = states[r.sender]
            .pending
            .front()
            .is_some_and(|p| p.targets.contains(&r.receiver));
        if listed {
            owed.entry(r.receiver).or_default().push(r.sender);
        }
    }
    let mut ack_slot = BTreeMap::new();
    let mut ack_by_slot = vec![Vec::new(); half.m + 1];
    for &w in owed.keys() {
        let y = states[w].rng.gen_range(1..=half.m);
        ack_slot.insert(w, y);
        ack_by_slot[y].push(w);
    }
    log.control_messages += ack_slot.len();
    let mut ack_count = vec![Vec::new(); half.m + 1];
    for y in 1..=half.m {
        if !ack_by_slot[y].is_empty() {
            let cnt = closed_counts(adj, &ack_by_slot[y]);
            log.records.extend(slot_records(
                g,
                round,
                half.m + y,
                &ack_by_slot[y],
                &cnt,
                MessageKind::Ack,
            ));
            ack_count[y] = cnt;
        }
    }
    let mut acked: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (&w, sources) in &owed {
        let y = ack_slot[&w];
        // cnt[v] counts ackers in N[v]; w itself is one of them for v in N[w]
        let busy_at_acker = ack_count[y][w] > 1;
        for &u in sources {
            let busy_at_source = ack_count[y][u] > 1;
            if y != half.slot_of[&u] && !busy_at_acker && !busy_at_source {
                acked.entry(u).or_default().push(w);
            }
        }
    }
    for (&u, &x) in &half.slot_of {
        let p = states[u].pending.front_mut().expect("transmitter has a batch");
        p.attempts += 1;
        if let Some(ws) = acked.get(&u) {
            for w in ws {
                p.targets.remove(w);
            }
        }
        let success = p.targets.is_empty();
        let attempts = p.attempts;
        if success {
            states[u].pending.pop_front();
        }
        log.outcomes.push(TxOutcome {
            node: g.id(u),
            slot: x,
            success,
            errors_heard: 0,
            attempts: success.then_some(attempts),
        });
    }
    Ok(log)
}

/// Dispatches on `cfg.mode`.
pub fn run_round(
    g: &NetworkGraph,
    states: &mut [NodeState],
    transmitters: &BTreeSet<NodeId>,
    cfg: &SimConfig,
    round: usize,
) -> Result<RoundLog> {
    match cfg.mode {
        Mode::Cd => run_round_cd(g, states, transmitters, cfg, round),
        Mode::NoCd => run_round_nocd(g, states, transmitters, cfg, round),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HopRecord {
    pub node: NodeId,
    pub degree: usize,
    pub attempts: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Undelivered {
    pub node: NodeId,
    pub rumor: Rumor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistMetrics {
    /// Rounds until every node held every rumor, or rounds run if that never happened.
    pub rounds: usize,
    /// Rounds until every queue drained (or the guard fired).
    pub rounds_run: usize,
    pub slots_per_round: usize,
    pub data_messages: usize,
    /// Error echoes or acknowledgements.
    pub control_messages: usize,
    /// Retransmissions (attempts beyond the first) per node.
    pub retransmissions_per_node: BTreeMap<NodeId, u32>,
    /// One record per finished batch.
    pub hop_attempts: Vec<HopRecord>,
    pub undelivered: Vec<Undelivered>,
    pub complete: bool,
}

impl DistMetrics {
    /// Number of finished batches per attempt count.
    pub fn attempt_histogram(&self) -> BTreeMap<u32, usize> {
        let mut h = BTreeMap::new();
        for r in &self.hop_attempts {
            *h.entry(r.attempts).or_insert(0) += 1;
        }
        h
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialize")
    }
}

#[derive(Debug, Clone)]
pub struct DistRun {
    pub metrics: DistMetrics,
    pub trace: Vec<TraceRecord>,
}

/// Two-phase multi-broadcast where every hop is a randomized round.
///
/// Convergecast batches are addressed to the tree parent. Once the root
/// holds every rumor it queues the `ceil(k/c)` sorted chunks for the
/// children that miss them, and every node that hears a chunk from its
/// parent queues it for its own children in turn. A node's knowledge of a
/// child is the set of rumors sourced in that child's subtree; a child that
/// already holds a chunk passes it on to its own children at once. Nodes with a
/// queued batch contend in every round. The run stops once every queue has
/// drained, or after `cfg.max_rounds` rounds with a partial result.
pub fn run_distributed_multibroadcast(
    g: &NetworkGraph,
    bb: &Backbone,
    sources: &BTreeSet<NodeId>,
    c: usize,
    cfg: &SimConfig,
) -> Result<DistRun> {
    let k = sources.len();
    if k == 0 {
        return Err(Error::NoSources);
    }
    if c < 1 || c > k {
        return Err(Error::InvalidCompression { c, k });
    }
    let tree = PropagationTree::new(g, bb)?;
    let mut states = init_states(g, cfg)?;
    let n = g.len();
    let root = tree.root_idx();

    let mut got: Vec<BTreeSet<Rumor>> = vec![BTreeSet::new(); n];
    let mut unsent: Vec<BTreeSet<Rumor>> = vec![BTreeSet::new(); n];
    for &s in sources {
        let v = g.idx(s)?;
        let r = Rumor::of(s);
        states[v].held.insert(r);
        got[v].insert(r);
        if v != root {
            unsent[v].insert(r);
        }
    }
    let sub_rumors: Vec<BTreeSet<Rumor>> = (0..n)
        .map(|v| {
            tree.subtree_idx(v)
                .into_iter()
                .filter(|&u| sources.contains(&g.id(u)))
                .map(|u| Rumor::of(g.id(u)))
                .collect()
        })
        .collect();
    let mut chunks_seen: Vec<BTreeSet<Batch>> = vec![BTreeSet::new(); n];
    // A child that already holds the chunk relays it below without a message.
    let relay = |states: &mut [NodeState], seen: &mut [BTreeSet<Batch>], v: usize, chunk: &Batch| {
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            if !seen[u].insert(chunk.clone()) {
                continue;
            }
            let (have, lack): (Vec<usize>, Vec<usize>) = tree
                .children_idx(u)
                .iter()
                .partition(|&&ch| chunk.rumors().is_subset(&sub_rumors[ch]));
            if !lack.is_empty() {
                states[u].enqueue(chunk.clone(), Phase::Dissemination, lack.into_iter().collect());
            }
            stack.extend(have);
        }
    };

    let mut metrics = DistMetrics {
        rounds: 0,
        rounds_run: 0,
        slots_per_round: 2 * cfg.slots(g),
        data_messages: 0,
        control_messages: 0,
        retransmissions_per_node: BTreeMap::new(),
        hop_attempts: Vec::new(),
        undelivered: Vec::new(),
        complete: false,
    };
    let mut trace = Vec::new();
    let mut dissemination = false;
    let mut delivered_at = None;
    let all_held = |states: &[NodeState]| states.iter().all(|s| s.held.len() == k);
    if all_held(&states) {
        delivered_at = Some(0);
    }

    let mut round = 0;
    loop {
        for v in (0..n).filter(|&v| v != root) {
            let parent = tree.parent_idx(v).expect("non-root has a parent");
            let expected = sub_rumors[v].len();
            while unsent[v].len() >= c || (got[v].len() == expected && !unsent[v].is_empty()) {
                let picked: Vec<Rumor> = unsent[v].iter().take(c).copied().collect();
                for r in &picked {
                    unsent[v].remove(r);
                }
                states[v].enqueue(Batch::new(picked, c)?, Phase::Convergecast, BTreeSet::from([parent]));
            }
        }
        if !dissemination && got[root].len() == k {
            dissemination = true;
            let all: Vec<Rumor> = got[root].iter().copied().collect();
            for chunk in all.chunks(c) {
                let batch = Batch::new(chunk.iter().copied(), c)?;
                relay(&mut states, &mut chunks_seen, root, &batch);
            }
        }

        let transmitters: BTreeSet<NodeId> = (0..n)
            .filter(|&v| !states[v].pending.is_empty())
            .map(|v| g.id(v))
            .collect();
        if transmitters.is_empty() {
            if delivered_at.is_none() {
                return Err(Error::InvalidBackbone("distributed run stalled".into()));
            }
            break;
        }
        if round >= cfg.max_rounds {
            break;
        }
        round += 1;

        let log = run_round(g, &mut states, &transmitters, cfg, round)?;
        metrics.data_messages += log.data_messages;
        metrics.control_messages += log.control_messages;
        for o in &log.outcomes {
            if let Some(attempts) = o.attempts {
                let degree = g.sym_adj()[g.idx(o.node)?].len();
                metrics.hop_attempts.push(HopRecord {
                    node: o.node,
                    degree,
                    attempts,
                });
                *metrics.retransmissions_per_node.entry(o.node).or_insert(0) += attempts - 1;
            }
        }
        for r in &log.receptions {
            let w = r.receiver;
            match r.phase {
                Phase::Convergecast if tree.parent_idx(r.sender) == Some(w) => {
                    let fresh: Vec<Rumor> = r.batch.rumors().difference(&got[w]).copied().collect();
                    got[w].extend(fresh.iter().copied());
                    if w != root {
                        unsent[w].extend(fresh);
                    }
                }
                Phase::Dissemination if tree.parent_idx(w) == Some(r.sender) => {
                    relay(&mut states, &mut chunks_seen, w, &r.batch);
                }
                _ => {}
            }
        }
        trace.extend(log.records);
        if delivered_at.is_none() && all_held(&states) {
            delivered_at = Some(round);
        }
    }

    metrics.rounds_run = round;
    metrics.complete = delivered_at.is_some();
    metrics.rounds = delivered_at.unwrap_or(round);
    let everything: BTreeSet<Rumor> = sources.iter().map(|&s| Rumor::of(s)).collect();
    for (v, s) in states.iter().enumerate() {
        for &rumor in everything.difference(&s.held) {
            metrics.undelivered.push(Undelivered { node: g.id(v), rumor });
        }
    }
    Ok(DistRun { metrics, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backbone::greedy_cds;

    fn graph(n: u32, edges: &[(u32, u32)]) -> NetworkGraph {
        let e: Vec<_> = edges.iter().map(|&(a, b)| (NodeId(a), NodeId(b))).collect();
        NetworkGraph::from_edges((0..n).map(NodeId), &e).unwrap()
    }

    fn clique(n: u32) -> NetworkGraph {
        let mut e = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                e.push((a, b));
            }
        }
        graph(n, &e)
    }

    fn ids(v: &[u32]) -> BTreeSet<NodeId> {
        v.iter().map(|&i| NodeId(i)).collect()
    }

    fn load(states: &mut [NodeState], who: &[usize], targets: impl Fn(usize) -> BTreeSet<usize>) {
        for &u in who {
            let r = Rumor::of(NodeId(u as u32));
            states[u].held.insert(r);
            let b = Batch::new([r], 1).unwrap();
            states[u].enqueue(b, Phase::Convergecast, targets(u));
        }
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(Mode::Cd, 0.0, 1).validate().is_err());
        assert!(SimConfig::new(Mode::Cd, f64::NAN, 1).validate().is_err());
        let mut cfg = SimConfig::new(Mode::Cd, 1.0, 1);
        cfg.max_rounds = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn slot_count_rounds_up() {
        let g = clique(4);
        assert_eq!(SimConfig::new(Mode::Cd, 1.5, 0).slots(&g), 5);
        let mut cfg = SimConfig::new(Mode::Cd, 1.0, 0);
        cfg.degree_knowledge = DegreeKnowledge::Supplied(6);
        assert_eq!(cfg.slots(&g), 6);
    }

    #[test]
    fn lone_transmitter_succeeds() {
        let g = clique(5);
        let cfg = SimConfig::new(Mode::Cd, 2.0, 7);
        let mut st = init_states(&g, &cfg).unwrap();
        load(&mut st, &[2], |_| BTreeSet::new());
        let log = run_round_cd(&g, &mut st, &ids(&[2]), &cfg, 1).unwrap();
        assert!(log.outcomes[0].success);
        assert_eq!(log.control_messages, 0);
        assert_eq!(log.receptions.len(), 4);
        assert!(st.iter().all(|s| s.held.contains(&Rumor::of(NodeId(2)))));
    }

    #[test]
    fn transmitter_without_batch_is_rejected() {
        let g = clique(3);
        let cfg = SimConfig::new(Mode::Cd, 1.0, 0);
        let mut st = init_states(&g, &cfg).unwrap();
        assert_eq!(
            run_round_cd(&g, &mut st, &ids(&[1]), &cfg, 1).unwrap_err(),
            Error::NoPendingBatch(NodeId(1))
        );
    }

    #[test]
    fn same_slot_neighbors_both_fail() {
        let g = graph(2, &[(0, 1)]);
        let cfg = SimConfig::new(Mode::Cd, 1.0, 0);
        // with a single slot both must pick it
        let mut st = init_states(&g, &cfg).unwrap();
        load(&mut st, &[0, 1], |_| BTreeSet::new());
        let log = run_round_cd(&g, &mut st, &ids(&[0, 1]), &cfg, 1).unwrap();
        assert!(log.outcomes.iter().all(|o| !o.success));
        assert_eq!(log.control_messages, 2);
        assert!(log.receptions.is_empty());
        assert!(st.iter().all(|s| s.pending.len() == 1));
    }

    #[test]
    fn seeded_collision_is_replayable() {
        let g = graph(2, &[(0, 1)]);
        let cfg_for = |seed| SimConfig::new(Mode::Cd, 4.0, seed);
        let seed = (0..1000)
            .find(|&seed| {
                let cfg = cfg_for(seed);
                let mut st = init_states(&g, &cfg).unwrap();
                load(&mut st, &[0, 1], |_| BTreeSet::new());
                let log = run_round_cd(&g, &mut st, &ids(&[0, 1]), &cfg, 1).unwrap();
                log.outcomes[0].slot == log.outcomes[1].slot
            })
            .expect("some seed collides");
        for _ in 0..2 {
            let cfg = cfg_for(seed);
            let mut st = init_states(&g, &cfg).unwrap();
            load(&mut st, &[0, 1], |_| BTreeSet::new());
            let log = run_round_cd(&g, &mut st, &ids(&[0, 1]), &cfg, 1).unwrap();
            assert!(log.outcomes.iter().all(|o| !o.success));
            assert!(log.control_messages >= 1);
        }
    }

    #[test]
    fn single_listed_neighbor_acks() {
        let g = graph(2, &[(0, 1)]);
        let cfg = SimConfig::new(Mode::NoCd, 4.0, 3);
        // the ack slot must differ from the data slot; retry a few seeds
        let ok = (0..20).any(|seed| {
            let cfg = SimConfig { seed, ..cfg };
            let mut st = init_states(&g, &cfg).unwrap();
            load(&mut st, &[0], |_| BTreeSet::from([1]));
            let log = run_round_nocd(&g, &mut st, &ids(&[0]), &cfg, 1).unwrap();
            assert!(st[1].held.contains(&Rumor::of(NodeId(0))));
            assert_eq!(log.control_messages, 1);
            log.outcomes[0].success
        });
        assert!(ok);
    }

    #[test]
    fn mode_mismatch_is_rejected() {
        let g = clique(2);
        let cfg = SimConfig::new(Mode::NoCd, 1.0, 0);
        let mut st = init_states(&g, &cfg).unwrap();
        assert!(run_round_cd(&g, &mut st, &BTreeSet::new(), &cfg, 1).is_err());
    }

    #[test]
    fn single_edge_broadcast() {
        let g = graph(2, &[(0, 1)]);
        let bb = greedy_cds(&g).unwrap();
        let cfg = SimConfig::new(Mode::Cd, 1.0, 11);
        let run = run_distributed_multibroadcast(&g, &bb, &ids(&[0]), 1, &cfg).unwrap();
        let m = run.metrics;
        assert!(m.complete);
        assert_eq!((m.data_messages, m.control_messages, m.rounds), (1, 0, 1));
    }

    #[test]
    fn identical_seed_identical_run() {
        let g = clique(6);
        let bb = greedy_cds(&g).unwrap();
        for mode in [Mode::Cd, Mode::NoCd] {
            let cfg = SimConfig::new(mode, 1.0, 42);
            let a = run_distributed_multibroadcast(&g, &bb, &ids(&[1, 3, 5]), 2, &cfg).unwrap();
            let b = run_distributed_multibroadcast(&g, &bb, &ids(&[1, 3, 5]), 2, &cfg).unwrap();
            assert_eq!(a.metrics, b.metrics);
            assert_eq!(trace_jsonl(&a.trace), trace_jsonl(&b.trace));
            assert!(a.metrics.complete);
        }
    }

    #[test]
    fn chunk_reaches_below_a_child_that_already_holds_it() {
        // tree 2 -> {0, 3}, 3 -> 1: node 3 gathers both rumors, node 1 still lacks rumor 3
        let g = graph(4, &[(0, 2), (2, 3), (3, 1)]);
        let bb = greedy_cds(&g).unwrap();
        for mode in [Mode::Cd, Mode::NoCd] {
            for seed in 0..20 {
                let cfg = SimConfig::new(mode, 2.0, seed);
                let run = run_distributed_multibroadcast(&g, &bb, &ids(&[1, 3]), 2, &cfg).unwrap();
                assert!(run.metrics.complete, "{mode:?} seed {seed}");
            }
        }
    }

    #[test]
    fn guard_yields_partial_metrics() {
        let g = clique(6);
        let bb = greedy_cds(&g).unwrap();
        let mut cfg = SimConfig::new(Mode::Cd, 1.0, 5);
        cfg.max_rounds = 1;
        let run = run_distributed_multibroadcast(&g, &bb, &ids(&[1, 2, 3, 4, 5]), 1, &cfg).unwrap();
        assert!(!run.metrics.complete);
        assert!(!run.metrics.undelivered.is_empty());
        assert_eq!(run.metrics.rounds_run, 1);
    }

    #[test]
    fn trace_records_are_json_lines() {
        let g = graph(2, &[(0, 1)]);
        let bb = greedy_cds(&g).unwrap();
        let cfg = SimConfig::new(Mode::Cd, 1.0, 0);
        let run = run_distributed_multibroadcast(&g, &bb, &ids(&[1]), 1, &cfg).unwrap();
        let line = trace_jsonl(&run.trace);
        let v: serde_json::Value = serde_json::from_str(line.lines().next().unwrap()).unwrap();
        assert_eq!(v["kind"], "data");
        assert_eq!(v["transmitter"], 1);
        assert_eq!(v["receivers_ok"], serde_json::json!([0]));
    }
}
