//! Centralized broadcast and multi-broadcast schedules.
//!
//! A schedule is a sequence of rounds. In each round every listed sender
//! transmits one batch of at most `c` rumors, and every out-neighbor of the
//! sender is a recipient. Rounds are numbered from 1; round 0 is the initial
//! state in which each source holds its own rumor.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::backbone::{Backbone, PropagationTree};
use crate::error::{Error, Result};
use crate::model::{NetworkGraph, NodeId, Subgraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Rumor {
    pub source: NodeId,
    pub seq: u32,
}

impl Rumor {
    pub fn of(source: NodeId) -> Self {
        Self { source, seq: 0 }
    }
}

impl fmt::Display for Rumor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.source, self.seq)
    }
}

/// Up to `c` rumors sent as a single message.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Batch(BTreeSet<Rumor>);

impl Batch {
    pub fn new(rumors: impl IntoIterator<Item = Rumor>, capacity: usize) -> Result<Self> {
        let set: BTreeSet<Rumor> = rumors.into_iter().collect();
        if set.is_empty() {
            return Err(Error::EmptyBatch);
        }
        if set.len() > capacity {
            return Err(Error::BatchTooLarge {
                len: set.len(),
                capacity,
            });
        }
        Ok(Self(set))
    }

    pub fn rumors(&self) -> &BTreeSet<Rumor> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Batch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|r| r.to_string()).collect();
        f.write_str(&parts.join(";"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Broadcast,
    Convergecast,
    Dissemination,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transmission {
    pub sender: NodeId,
    pub batch: Batch,
    pub phase: Phase,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    /// Compression factor: the batch capacity.
    pub c: usize,
    /// Every rumor in play; each starts at its source.
    pub rumors: Vec<Rumor>,
    pub rounds: Vec<Vec<Transmission>>,
}

impl Schedule {
    pub fn messages(&self) -> usize {
        self.rounds.iter().map(Vec::len).sum()
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    /// Every (sender, batch) pair in round order.
    pub fn transmissions(&self) -> impl Iterator<Item = &Transmission> {
        self.rounds.iter().flatten()
    }

    /// Round (1-based) of the first dissemination transmission, if any.
    pub fn dissemination_start(&self) -> Option<usize> {
        self.rounds
            .iter()
            .position(|r| r.iter().any(|t| t.phase == Phase::Dissemination))
            .map(|i| i + 1)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Delivery {
    pub node: NodeId,
    pub rumor: Rumor,
    pub round: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundLogEntry {
    pub round: usize,
    pub sender: NodeId,
    pub batch_rumors: String,
    pub recipients_reached: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metrics {
    pub messages: usize,
    /// Rounds until every node holds every rumor; the schedule length when
    /// delivery is incomplete.
    pub makespan: usize,
    /// Failed (receiver, sender) receptions under interference.
    pub collisions: usize,
    pub complete: bool,
    /// First round at which each node held each rumor, sorted by node then rumor.
    pub delivery: Vec<Delivery>,
    pub log: Vec<RoundLogEntry>,
}

impl Metrics {
    pub fn delivery_time(&self, node: NodeId, rumor: Rumor) -> Option<usize> {
        self.delivery
            .iter()
            .find(|d| d.node == node && d.rumor == rumor)
            .map(|d| d.round)
    }

    /// Per-round transmission log as CSV.
    pub fn round_log_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for e in &self.log {
            w.serialize(e).expect("in-memory csv write");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
    }
}

fn out_of(g: &NetworkGraph, v: usize) -> &[usize] {
    &g.out_adj()[v]
}

/// Single-source broadcast over the backbone. The source and every member
/// transmit once, in the round after they first hear the rumor, unless all
/// of their out-neighbors already hold it by then.
pub fn broadcast_schedule(g: &NetworkGraph, bb: &Backbone, s: NodeId) -> Result<Schedule> {
    bb.validate(g)?;
    let src = g.idx(s)?;
    let n = g.len();
    let relay: Vec<bool> = (0..n).map(|v| v == src || bb.contains(g.id(v))).collect();
    let mut informed = vec![false; n];
    informed[src] = true;
    let mut fresh = vec![src];
    let rumor = Rumor::of(s);
    let batch = Batch::new([rumor], 1)?;
    let mut rounds = Vec::new();
    while !fresh.is_empty() {
        fresh.sort_unstable();
        let senders: Vec<usize> = fresh
            .iter()
            .copied()
            .filter(|&v| relay[v] && out_of(g, v).iter().any(|&w| !informed[w]))
            .collect();
        if senders.is_empty() {
            break;
        }
        fresh.clear();
        for &u in &senders {
            for &w in out_of(g, u) {
                if !informed[w] {
                    informed[w] = true;
                    fresh.push(w);
                }
            }
        }
        rounds.push(
            senders
                .iter()
                .map(|&u| Transmission {
                    sender: g.id(u),
                    batch: batch.clone(),
                    phase: Phase::Broadcast,
                })
                .collect(),
        );
    }
    if let Some(v) = informed.iter().position(|&i| !i) {
        return Err(Error::Disconnected { from: s, to: g.id(v) });
    }
    Ok(Schedule {
        c: 1,
        rumors: vec![rumor],
        rounds,
    })
}

/// Two-phase multi-broadcast over the backbone arborescence.
///
/// Convergecast: every node forwards the rumors of its subtree to its tree
/// parent, lowest rumors first, as soon as it holds `c` unsent ones or its
/// whole subtree has reported. Dissemination starts once the root holds all
/// `k` rumors: the sorted rumors are cut into `ceil(k/c)` fixed chunks and a
/// node sends a chunk it holds, at most once and one chunk per round, while
/// some tree child is still missing part of it.
pub fn multibroadcast_schedule(
    g: &NetworkGraph,
    bb: &Backbone,
    sources: &BTreeSet<NodeId>,
    c: usize,
) -> Result<Schedule> {
    let k = sources.len();
    if k == 0 {
        return Err(Error::NoSources);
    }
    if c < 1 || c > k {
        return Err(Error::InvalidCompression { c, k });
    }
    if k == 1 {
        return broadcast_schedule(g, bb, *sources.first().unwrap());
    }
    let tree = PropagationTree::new(g, bb)?;
    let n = g.len();
    let root = tree.root_idx();

    let mut held: Vec<BTreeSet<Rumor>> = vec![BTreeSet::new(); n];
    let mut got: Vec<BTreeSet<Rumor>> = vec![BTreeSet::new(); n];
    let mut unsent: Vec<BTreeSet<Rumor>> = vec![BTreeSet::new(); n];
    let mut is_source = vec![false; n];
    for &s in sources {
        let v = g.idx(s)?;
        is_source[v] = true;
        let r = Rumor::of(s);
        held[v].insert(r);
        got[v].insert(r);
        if v != root {
            unsent[v].insert(r);
        }
    }
    let expected: Vec<usize> = (0..n)
        .map(|v| tree.subtree_idx(v).iter().filter(|&&u| is_source[u]).count())
        .collect();

    let mut rounds: Vec<Vec<Transmission>> = Vec::new();
    let guard = n * k + n + 1;

    while got[root].len() < k {
        let mut txs = Vec::new();
        for v in (0..n).filter(|&v| v != root) {
            let complete = got[v].len() == expected[v];
            if unsent[v].len() >= c || (complete && !unsent[v].is_empty()) {
                let picked: Vec<Rumor> = unsent[v].iter().take(c).copied().collect();
                for r in &picked {
                    unsent[v].remove(r);
                }
                txs.push((v, Batch::new(picked, c)?));
            }
        }
        if txs.is_empty() || rounds.len() > guard {
            return Err(Error::InvalidBackbone("convergecast stalled".into()));
        }
        for (v, b) in &txs {
            let p = tree.parent_idx(*v).expect("non-root has a parent");
            got[p].extend(b.rumors());
            if p != root {
                unsent[p].extend(b.rumors());
            }
            for &w in out_of(g, *v) {
                held[w].extend(b.rumors());
            }
        }
        rounds.push(emit(g, txs, Phase::Convergecast));
    }

    let mut all: Vec<Rumor> = got[root].iter().copied().collect();
    all.sort();
    let chunks: Vec<BTreeSet<Rumor>> = all.chunks(c).map(|ch| ch.iter().copied().collect()).collect();
    let mut forwarded = vec![vec![false; chunks.len()]; n];
    let everyone_done = |held: &Vec<BTreeSet<Rumor>>| held.iter().all(|h| h.len() == k);
    let start = rounds.len();

    while !everyone_done(&held) {
        let mut txs = Vec::new();
        for v in 0..n {
            let kids = tree.children_idx(v);
            if kids.is_empty() {
                continue;
            }
            let pick = (0..chunks.len()).find(|&j| {
                !forwarded[v][j]
                    && chunks[j].is_subset(&held[v])
                    && kids.iter().any(|&ch| !chunks[j].is_subset(&held[ch]))
            });
            if let Some(j) = pick {
                forwarded[v][j] = true;
                txs.push((v, Batch::new(chunks[j].iter().copied(), c)?));
            }
        }
        if txs.is_empty() || rounds.len() - start > guard {
            return Err(Error::InvalidBackbone("dissemination stalled".into()));
        }
        for (v, b) in &txs {
            for &w in out_of(g, *v) {
                held[w].extend(b.rumors());
            }
        }
        rounds.push(emit(g, txs, Phase::Dissemination));
    }

    Ok(Schedule { c, rumors: all, rounds })
}

fn emit(g: &NetworkGraph, txs: Vec<(usize, Batch)>, phase: Phase) -> Vec<Transmission> {
    txs.into_iter()
        .map(|(v, batch)| Transmission {
            sender: g.id(v),
            batch,
            phase,
        })
        .collect()
}

/// Largest conflict set over all nodes of `g`.
pub fn max_conflict(g: &NetworkGraph) -> usize {
    let t = Subgraph::whole(g);
    (0..g.len()).map(|u| t.conflicts_of(g, u).len()).max().unwrap_or(0)
}

/// Splits every round into sub-rounds so that no two senders of a
/// sub-round share a recipient. Senders of a round are colored greedily in
/// ascending id order against the conflict relation of the whole graph, and
/// the sub-rounds are emitted in color order.
pub fn make_collision_free(g: &NetworkGraph, sched: &Schedule) -> Result<Schedule> {
    let t = Subgraph::whole(g);
    let mut rounds = Vec::new();
    for round in &sched.rounds {
        let mut order: Vec<(usize, &Transmission)> = round
            .iter()
            .map(|tx| Ok((g.idx(tx.sender)?, tx)))
            .collect::<Result<_>>()?;
        order.sort_by_key(|(u, _)| *u);
        let mut color_of: BTreeMap<usize, usize> = BTreeMap::new();
        let mut layers: Vec<Vec<Transmission>> = Vec::new();
        for (u, tx) in order {
            let conflicts = t.conflicts_of(g, u);
            let used: BTreeSet<usize> = conflicts.iter().filter_map(|w| color_of.get(w).copied()).collect();
            let color = (0..).find(|c| !used.contains(c)).unwrap();
            color_of.insert(u, color);
            if layers.len() <= color {
                layers.resize_with(color + 1, Vec::new);
            }
            layers[color].push(tx.clone());
        }
        rounds.extend(layers);
    }
    Ok(Schedule {
        c: sched.c,
        rumors: sched.rumors.clone(),
        rounds,
    })
}

/// Replays `sched` on `g`.
///
/// The schedule is first checked for causality with every transmission
/// succeeding. With `interference` on, a recipient `v` of `u` misses the
/// batch when another in-neighbor of `v` transmits in the same round; each
/// such miss counts as one collision. Nodes are full duplex.
pub fn simulate_schedule(g: &NetworkGraph, sched: &Schedule, interference: bool) -> Result<Metrics> {
    replay(g, sched, false, true)?;
    replay(g, sched, interference, false)
}

fn replay(g: &NetworkGraph, sched: &Schedule, interference: bool, strict: bool) -> Result<Metrics> {
    let n = g.len();
    let mut held: Vec<BTreeSet<Rumor>> = vec![BTreeSet::new(); n];
    let mut time: BTreeMap<(usize, Rumor), usize> = BTreeMap::new();
    for &r in &sched.rumors {
        let v = g.idx(r.source)?;
        held[v].insert(r);
        time.insert((v, r), 0);
    }
    let mut collisions = 0;
    let mut log = Vec::new();
    for (i, round) in sched.rounds.iter().enumerate() {
        let rno = i + 1;
        let mut transmitting = vec![false; n];
        let mut senders = Vec::with_capacity(round.len());
        for tx in round {
            let u = g.idx(tx.sender)?;
            if transmitting[u] {
                return Err(Error::DuplicateSender {
                    round: rno,
                    sender: tx.sender,
                });
            }
            if tx.batch.len() > sched.c {
                return Err(Error::BatchTooLarge {
                    len: tx.batch.len(),
                    capacity: sched.c,
                });
            }
            if strict {
                if let Some(r) = tx.batch.rumors().iter().find(|r| !held[u].contains(r)) {
                    return Err(Error::Causality {
                        round: rno,
                        sender: tx.sender,
                        rumor: r.to_string(),
                    });
                }
            }
            transmitting[u] = true;
            senders.push(u);
        }
        let mut incoming: Vec<(usize, Vec<Rumor>)> = Vec::new();
        for (tx, &u) in round.iter().zip(&senders) {
            let carried: Vec<Rumor> = tx.batch.rumors().intersection(&held[u]).copied().collect();
            let mut reached = 0;
            for &v in out_of(g, u) {
                if interference && g.in_adj()[v].iter().any(|&w| w != u && transmitting[w]) {
                    collisions += 1;
                    continue;
                }
                reached += 1;
                incoming.push((v, carried.clone()));
            }
            log.push(RoundLogEntry {
                round: rno,
                sender: tx.sender,
                batch_rumors: tx.batch.to_string(),
                recipients_reached: reached,
            });
        }
        for (v, rumors) in incoming {
            for r in rumors {
                if held[v].insert(r) {
                    time.insert((v, r), rno);
                }
            }
        }
    }
    let complete = held.iter().all(|h| h.len() == sched.rumors.len());
    let makespan = if complete {
        time.values().copied().max().unwrap_or(0)
    } else {
        sched.rounds.len()
    };
    let delivery = time
        .into_iter()
        .map(|((v, rumor), round)| Delivery {
            node: g.id(v),
            rumor,
            round,
        })
        .collect();
    Ok(Metrics {
        messages: sched.messages(),
        makespan,
        collisions,
        complete,
        delivery,
        log,
    })
}

/// Upper bound on multi-broadcast messages: `2|D| ceil(k/c) + k(1 + 1/c)`.
pub fn multibroadcast_message_bound(backbone_size: usize, k: usize, c: usize) -> f64 {
    let batches = k.div_ceil(c) as f64;
    2.0 * backbone_size as f64 * batches + k as f64 * (1.0 + 1.0 / c as f64)
}
