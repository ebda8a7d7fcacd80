//! Exhaustive search oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet, VecDeque};

use mbcast_core::generate::gen_random_udg;
use mbcast_core::{NetworkGraph, NodeId};

pub const SWEEP_SIZE: u64 = 200;

/// Connected random UDGs with 5 to 12 nodes, one per seed.
pub fn sweep() -> Vec<(u64, NetworkGraph)> {
    (0..SWEEP_SIZE)
        .map(|seed| {
            let n = 5 + (seed % 8) as usize;
            (
                seed,
                gen_random_udg(n, 4.0, 10.0, seed, 1000).expect("sweep instance connects"),
            )
        })
        .collect()
}

/// Rumor knowledge per node as bit masks; node order follows `g.ids()`.
/// A transmission reaches every out-neighbor.
struct Search {
    adj: Vec<Vec<usize>>,
    start: Vec<u16>,
    full: u16,
    c: usize,
}

impl Search {
    fn new(g: &NetworkGraph, sources: &BTreeSet<NodeId>, c: usize) -> Self {
        let ids: Vec<NodeId> = g.ids().collect();
        let pos = |id: NodeId| ids.iter().position(|&x| x == id).unwrap();
        assert!(sources.len() <= 16);
        let adj = ids
            .iter()
            .map(|&u| g.out_neighbors(u).unwrap().into_iter().map(pos).collect())
            .collect();
        let mut start = vec![0u16; ids.len()];
        for (bit, &s) in sources.iter().enumerate() {
            start[pos(s)] |= 1 << bit;
        }
        Self {
            adj,
            start,
            full: ((1u32 << sources.len()) - 1) as u16,
            c,
        }
    }

    fn done(&self, state: &[u16]) -> bool {
        state.iter().all(|&m| m == self.full)
    }

    /// Batches worth sending from `u`: rumors it holds that some neighbor
    /// lacks. Sending more never hurts, so only maximal batches are listed.
    fn choices(&self, state: &[u16], u: usize) -> Vec<u16> {
        let missing = self.adj[u].iter().fold(0u16, |m, &w| m | (!state[w] & self.full));
        let useful = state[u] & missing;
        if useful == 0 {
            return Vec::new();
        }
        if useful.count_ones() as usize <= self.c {
            return vec![useful];
        }
        (1..=useful)
            .filter(|&s| s & !useful == 0 && s.count_ones() as usize == self.c)
            .collect()
    }

    fn send(&self, state: &mut [u16], u: usize, batch: u16) {
        for &w in &self.adj[u] {
            state[w] |= batch;
        }
    }
}

/// Fewest transmissions after which every node holds every rumor; one
/// transmission is one batch of at most `c` rumors heard by all neighbors.
pub fn min_messages(g: &NetworkGraph, sources: &BTreeSet<NodeId>, c: usize) -> usize {
    let s = Search::new(g, sources, c);
    let mut seen = HashSet::from([s.start.clone()]);
    let mut queue = VecDeque::from([(s.start.clone(), 0)]);
    while let Some((state, cost)) = queue.pop_front() {
        if s.done(&state) {
            return cost;
        }
        for u in 0..state.len() {
            for batch in s.choices(&state, u) {
                let mut next = state.clone();
                s.send(&mut next, u, batch);
                if seen.insert(next.clone()) {
                    queue.push_back((next, cost + 1));
                }
            }
        }
    }
    panic!("some node is unreachable from the sources")
}

/// Fewest rounds when every node may send one batch per round and
/// receptions never collide.
pub fn min_rounds(g: &NetworkGraph, sources: &BTreeSet<NodeId>, c: usize) -> usize {
    let s = Search::new(g, sources, c);
    let mut frontier = HashSet::from([s.start.clone()]);
    for round in 0.. {
        if frontier.iter().any(|st| s.done(st)) {
            return round;
        }
        let mut next = HashSet::new();
        for state in &frontier {
            let options: Vec<(usize, Vec<u16>)> = (0..state.len())
                .map(|u| (u, s.choices(state, u)))
                .filter(|(_, ch)| !ch.is_empty())
                .collect();
            let mut pick = vec![0usize; options.len()];
            loop {
                let mut after = state.clone();
                for (i, (u, ch)) in options.iter().enumerate() {
                    s.send(&mut after, *u, ch[pick[i]]);
                }
                next.insert(after);
                // odometer over the per-node choices
                let mut i = 0;
                while i < pick.len() {
                    pick[i] += 1;
                    if pick[i] < options[i].1.len() {
                        break;
                    }
                    pick[i] = 0;
                    i += 1;
                }
                if i == pick.len() {
                    break;
                }
            }
        }
        assert!(next != frontier, "some node is unreachable from the sources");
        frontier = next;
    }
    unreachable!()
}
