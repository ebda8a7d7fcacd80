//! Geometric wireless network model.
//!
//! A node `u` with power `P(u)` reaches every node within radius
//! `P(u)^(1/alpha)` unless an obstacle segment lies across the line of sight.
//! Edges are therefore directed; when all powers are equal the graph is a unit
//! disk graph and the relation is symmetric.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{segments_cross, Point, EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for NodeId {
    fn from(v: u32) -> Self {
        NodeId(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: NodeId,
    pub position: Point,
    pub power: f64,
}

impl NodeSpec {
    pub fn new(id: u32, x: f64, y: f64, power: f64) -> Self {
        Self {
            id: NodeId(id),
            position: Point::new(x, y),
            power,
        }
    }
}

/// A closed line segment that blocks transmissions crossing it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub a: Point,
    pub b: Point,
}

impl Obstacle {
    pub fn new(a: Point, b: Point) -> Result<Self> {
        if a.distance(&b) <= EPS {
            return Err(Error::DegenerateObstacle);
        }
        Ok(Self { a, b })
    }

    /// True iff the open segment between `p` and `q` properly crosses this obstacle.
    pub fn blocks(&self, p: Point, q: Point) -> bool {
        segments_cross(p, q, self.a, self.b)
    }
}

/// How the distance is compared against the transmission radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeRule {
    /// `d(u,v) <= r(u)`
    #[default]
    Inclusive,
    /// `d(u,v) < r(u)`
    Strict,
}

#[derive(Debug, Clone, Default)]
pub struct BuildOptions {
    pub edge_rule: EdgeRule,
    /// When set, every radius must lie in `[1, max_radius]`.
    pub max_radius: Option<f64>,
}

/// Directed communication graph. Immutable once built.
#[derive(Debug, Clone)]
pub struct NetworkGraph {
    nodes: Vec<NodeSpec>,
    obstacles: Vec<Obstacle>,
    alpha: f64,
    udg: bool,
    index: HashMap<NodeId, usize>,
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
    sym: Vec<Vec<usize>>,
}

/// Builds the communication graph with the default (inclusive) edge rule.
pub fn build_network(nodes: Vec<NodeSpec>, obstacles: Vec<Obstacle>, alpha: f64) -> Result<NetworkGraph> {
    NetworkGraph::build(nodes, obstacles, alpha, &BuildOptions::default())
}

impl NetworkGraph {
    pub fn build(mut nodes: Vec<NodeSpec>, obstacles: Vec<Obstacle>, alpha: f64, opts: &BuildOptions) -> Result<Self> {
        if !(2.0..=4.0).contains(&alpha) {
            return Err(Error::InvalidAlpha(alpha));
        }
        nodes.sort_by_key(|n| n.id);
        for pair in nodes.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::DuplicateId(pair[0].id));
            }
        }
        for n in &nodes {
            if n.power.is_nan() || n.power <= 0.0 {
                return Err(Error::NonPositivePower(n.id, n.power));
            }
            if let Some(max) = opts.max_radius {
                let r = n.power.powf(1.0 / alpha);
                if r < 1.0 - EPS || r > max + EPS {
                    return Err(Error::RadiusOutOfRange {
                        id: n.id,
                        radius: r,
                        max,
                    });
                }
            }
        }
        for o in &obstacles {
            if o.a.distance(&o.b) <= EPS {
                return Err(Error::DegenerateObstacle);
            }
        }

        let radii: Vec<f64> = nodes.iter().map(|n| n.power.powf(1.0 / alpha)).collect();
        let n = nodes.len();
        let mut arcs = Vec::new();
        for u in 0..n {
            for v in 0..n {
                if u == v {
                    continue;
                }
                let (pu, pv) = (nodes[u].position, nodes[v].position);
                let d = pu.distance(&pv);
                let in_range = match opts.edge_rule {
                    EdgeRule::Inclusive => d <= radii[u] + EPS,
                    EdgeRule::Strict => d < radii[u] - EPS,
                };
                if in_range && !obstacles.iter().any(|o| o.blocks(pu, pv)) {
                    arcs.push((u, v));
                }
            }
        }
        let udg = nodes.windows(2).all(|w| w[0].power == w[1].power);
        Ok(Self::assemble(nodes, obstacles, alpha, udg, &arcs))
    }

    /// Builds a graph from an explicit undirected edge list. Nodes are laid
    /// out on a line and given unit power; geometry carries no meaning.
    pub fn from_edges(ids: impl IntoIterator<Item = NodeId>, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let arcs: Vec<_> = edges.iter().flat_map(|&(u, v)| [(u, v), (v, u)]).collect();
        Self::from_arcs(ids, &arcs)
    }

    /// Builds a graph from explicit directed arcs.
    pub fn from_arcs(ids: impl IntoIterator<Item = NodeId>, arcs: &[(NodeId, NodeId)]) -> Result<Self> {
        let mut ids: Vec<NodeId> = ids.into_iter().collect();
        ids.sort();
        for pair in ids.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::DuplicateId(pair[0]));
            }
        }
        let nodes: Vec<NodeSpec> = ids
            .iter()
            .enumerate()
            .map(|(i, &id)| NodeSpec {
                id,
                position: Point::new(i as f64, 0.0),
                power: 1.0,
            })
            .collect();
        let index: HashMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let mut idx_arcs = Vec::with_capacity(arcs.len());
        for &(u, v) in arcs {
            let iu = *index.get(&u).ok_or(Error::UnknownNode(u))?;
            let iv = *index.get(&v).ok_or(Error::UnknownNode(v))?;
            if iu != iv {
                idx_arcs.push((iu, iv));
            }
        }
        let mut g = Self::assemble(nodes, Vec::new(), 2.0, false, &idx_arcs);
        g.udg = g.out == g.sym;
        Ok(g)
    }

    fn assemble(
        nodes: Vec<NodeSpec>,
        obstacles: Vec<Obstacle>,
        alpha: f64,
        udg: bool,
        arcs: &[(usize, usize)],
    ) -> Self {
        let n = nodes.len();
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        for &(u, v) in arcs {
            out[u].push(v);
            inc[v].push(u);
        }
        for list in out.iter_mut().chain(inc.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        let sym = out
            .iter()
            .enumerate()
            .map(|(u, list)| {
                list.iter()
                    .copied()
                    .filter(|&v| out[v].binary_search(&u).is_ok())
                    .collect()
            })
            .collect();
        let index = nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
        Self {
            nodes,
            obstacles,
            alpha,
            udg,
            index,
            out,
            inc,
            sym,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[NodeSpec] {
        &self.nodes
    }

    pub fn obstacles(&self) -> &[Obstacle] {
        &self.obstacles
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// True when every node has the same power (unit disk graph).
    pub fn is_udg(&self) -> bool {
        self.udg
    }

    /// Node ids in ascending order.
    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().map(|n| n.id)
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn radius(&self, id: NodeId) -> Result<f64> {
        Ok(self.nodes[self.idx(id)?].power.powf(1.0 / self.alpha))
    }

    pub(crate) fn idx(&self, id: NodeId) -> Result<usize> {
        self.index.get(&id).copied().ok_or(Error::UnknownNode(id))
    }

    pub(crate) fn id(&self, idx: usize) -> NodeId {
        self.nodes[idx].id
    }

    pub(crate) fn out_adj(&self) -> &[Vec<usize>] {
        &self.out
    }

    pub(crate) fn in_adj(&self) -> &[Vec<usize>] {
        &self.inc
    }

    pub(crate) fn sym_adj(&self) -> &[Vec<usize>] {
        &self.sym
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        match (self.idx(u), self.idx(v)) {
            (Ok(a), Ok(b)) => self.out[a].binary_search(&b).is_ok(),
            _ => false,
        }
    }

    /// Out-neighbors of `u` in ascending id order.
    pub fn out_neighbors(&self, u: NodeId) -> Result<Vec<NodeId>> {
        Ok(self.out[self.idx(u)?].iter().map(|&v| self.id(v)).collect())
    }

    pub fn in_neighbors(&self, u: NodeId) -> Result<Vec<NodeId>> {
        Ok(self.inc[self.idx(u)?].iter().map(|&v| self.id(v)).collect())
    }

    /// Neighbors over bidirectional links only.
    pub fn neighbors(&self, u: NodeId) -> Result<Vec<NodeId>> {
        Ok(self.sym[self.idx(u)?].iter().map(|&v| self.id(v)).collect())
    }

    /// Degree over bidirectional links, `delta(v)`.
    pub fn degree(&self, u: NodeId) -> Result<usize> {
        Ok(self.sym[self.idx(u)?].len())
    }

    pub fn out_degree(&self, u: NodeId) -> Result<usize> {
        Ok(self.out[self.idx(u)?].len())
    }

    /// Maximum degree over bidirectional links.
    pub fn max_degree(&self) -> usize {
        self.sym.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn max_out_degree(&self) -> usize {
        self.out.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Directed edges in ascending `(u, v)` order.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().map(move |&v| (u, v)))
            .map(|(u, v)| (self.id(u), self.id(v)))
            .collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.out == self.sym
    }

    /// True when the bidirectional relation connects every node.
    pub fn is_connected(&self) -> bool {
        self.is_empty() || bfs(&self.sym, 0).iter().all(Option::is_some)
    }
}

/// Breadth-first hop counts from `src` over `adj`.
pub(crate) fn bfs(adj: &[Vec<usize>], src: usize) -> Vec<Option<u32>> {
    let mut dist = vec![None; adj.len()];
    let mut queue = VecDeque::new();
    dist[src] = Some(0);
    queue.push_back(src);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        for &v in &adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

fn diameter_over(g: &NetworkGraph, adj: &[Vec<usize>]) -> Result<u32> {
    let mut best = 0;
    for u in 0..g.len() {
        for (v, d) in bfs(adj, u).into_iter().enumerate() {
            match d {
                Some(d) => best = best.max(d),
                None => {
                    return Err(Error::Disconnected {
                        from: g.id(u),
                        to: g.id(v),
                    })
                }
            }
        }
    }
    Ok(best)
}

/// Shortest directed path length from `u` to `v` in hops, or `None` when
/// `v` cannot be reached.
pub fn hop_distance(g: &NetworkGraph, u: NodeId, v: NodeId) -> Result<Option<u32>> {
    let (a, b) = (g.idx(u)?, g.idx(v)?);
    Ok(bfs(&g.out, a)[b])
}

/// Largest hop distance over all ordered pairs of the directed graph.
pub fn diameter(g: &NetworkGraph) -> Result<u32> {
    diameter_over(g, &g.out)
}

/// Diameter of the bidirectional sub-relation; equals [`diameter`] on unit
/// disk graphs.
pub fn symmetric_diameter(g: &NetworkGraph) -> Result<u32> {
    diameter_over(g, &g.sym)
}

/// A node subset of a graph together with every edge of the graph between
/// its members.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgraph {
    member: Vec<bool>,
}

impl Subgraph {
    pub fn induced(g: &NetworkGraph, ids: impl IntoIterator<Item = NodeId>) -> Result<Self> {
        let mut member = vec![false; g.len()];
        for id in ids {
            member[g.idx(id)?] = true;
        }
        Ok(Self { member })
    }

    pub fn whole(g: &NetworkGraph) -> Self {
        Self {
            member: vec![true; g.len()],
        }
    }

    pub fn contains(&self, g: &NetworkGraph, id: NodeId) -> bool {
        g.idx(id).map(|i| self.member[i]).unwrap_or(false)
    }

    pub(crate) fn has(&self, idx: usize) -> bool {
        self.member[idx]
    }

    /// Largest in- or out-degree within the subgraph.
    pub fn max_degree(&self, g: &NetworkGraph) -> usize {
        let deg = |adj: &[Vec<usize>], u: usize| adj[u].iter().filter(|&&v| self.member[v]).count();
        (0..g.len())
            .filter(|&u| self.member[u])
            .map(|u| deg(g.out_adj(), u).max(deg(g.in_adj(), u)))
            .max()
            .unwrap_or(0)
    }

    pub(crate) fn conflicts_of(&self, g: &NetworkGraph, u: usize) -> BTreeSet<usize> {
        let mut set = BTreeSet::new();
        for &v in g.out_adj()[u].iter().filter(|&&v| self.member[v]) {
            for &w in &g.in_adj()[v] {
                if w != u && self.member[w] {
                    set.insert(w);
                }
            }
        }
        set
    }
}

/// Nodes of `t` whose transmission in the same round as `u` would collide
/// at one of `u`'s recipients in `t`.
pub fn conflict_set(g: &NetworkGraph, t: &Subgraph, u: NodeId) -> Result<BTreeSet<NodeId>> {
    let iu = g.idx(u)?;
    if !t.has(iu) {
        return Err(Error::NotInSubgraph(u));
    }
    Ok(t.conflicts_of(g, iu).into_iter().map(|w| g.id(w)).collect())
}
