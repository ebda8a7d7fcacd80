//! Connected-dominating-set backbones.
//!
//! All routines work on the bidirectional sub-relation of the network graph:
//! a backbone link must carry traffic both up and down the arborescence.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{bfs, symmetric_diameter, NetworkGraph, NodeId};

/// Largest graph the exact oracle accepts.
pub const ORACLE_NODE_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackboneOrigin {
    Greedy,
    BoundedDiameter,
    Oracle,
    #[default]
    Explicit,
}

/// A connected dominating set with a root and parent links forming a
/// breadth-first arborescence over the members.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Backbone {
    pub members: BTreeSet<NodeId>,
    pub root: NodeId,
    pub parent: BTreeMap<NodeId, NodeId>,
    #[serde(default)]
    pub origin: BackboneOrigin,
}

impl Backbone {
    /// Validates `members` and roots the arborescence at the lowest id.
    pub fn new(g: &NetworkGraph, members: BTreeSet<NodeId>, origin: BackboneOrigin) -> Result<Self> {
        let root = *members
            .first()
            .ok_or_else(|| Error::InvalidBackbone("empty member set".into()))?;
        Self::with_root(g, members, root, origin)
    }

    pub fn with_root(
        g: &NetworkGraph,
        members: BTreeSet<NodeId>,
        root: NodeId,
        origin: BackboneOrigin,
    ) -> Result<Self> {
        if !members.contains(&root) {
            return Err(Error::InvalidBackbone(format!("root {root} is not a member")));
        }
        let mask = member_mask(g, &members)?;
        check_domination(g, &mask)?;
        let parent_idx = bfs_parents(g, &mask, g.idx(root)?);
        let mut parent = BTreeMap::new();
        for (v, p) in parent_idx.iter().enumerate() {
            if !mask[v] || v == g.idx(root)? {
                continue;
            }
            match p {
                Some(p) => {
                    parent.insert(g.id(v), g.id(*p));
                }
                None => {
                    return Err(Error::InvalidBackbone(format!(
                        "member {} is not connected to root {root}",
                        g.id(v)
                    )))
                }
            }
        }
        Ok(Self {
            members,
            root,
            parent,
            origin,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.members.contains(&id)
    }

    /// Checks domination, connectivity and the arborescence against `g`.
    pub fn validate(&self, g: &NetworkGraph) -> Result<()> {
        if !self.members.contains(&self.root) {
            return Err(Error::InvalidBackbone(format!("root {} is not a member", self.root)));
        }
        let mask = member_mask(g, &self.members)?;
        check_domination(g, &mask)?;
        if self.parent.contains_key(&self.root) {
            return Err(Error::InvalidBackbone("root has a parent".into()));
        }
        for &m in &self.members {
            if m == self.root {
                continue;
            }
            let mut cur = m;
            let mut steps = 0;
            while cur != self.root {
                let p = *self
                    .parent
                    .get(&cur)
                    .ok_or_else(|| Error::InvalidBackbone(format!("member {cur} has no parent")))?;
                if !self.members.contains(&p) {
                    return Err(Error::InvalidBackbone(format!("parent {p} of {cur} is not a member")));
                }
                if !g.neighbors(cur)?.contains(&p) {
                    return Err(Error::InvalidBackbone(format!(
                        "{cur} and its parent {p} are not linked"
                    )));
                }
                cur = p;
                steps += 1;
                if steps > self.members.len() {
                    return Err(Error::InvalidBackbone(format!("parent links from {m} form a cycle")));
                }
            }
        }
        if self.parent.len() + 1 != self.members.len() {
            return Err(Error::InvalidBackbone("parent links mention non-members".into()));
        }
        Ok(())
    }

    /// Hop diameter of the subgraph induced by the members.
    pub fn member_diameter(&self, g: &NetworkGraph) -> Result<u32> {
        let mask = member_mask(g, &self.members)?;
        let adj = induced_adj(g, &mask);
        let mut best = 0;
        for u in (0..g.len()).filter(|&u| mask[u]) {
            for (v, d) in bfs(&adj, u).into_iter().enumerate() {
                if mask[v] {
                    let d = d.ok_or_else(|| Error::InvalidBackbone("members are disconnected".into()))?;
                    best = best.max(d);
                }
            }
        }
        Ok(best)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("backbone serializes")
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

fn member_mask(g: &NetworkGraph, members: &BTreeSet<NodeId>) -> Result<Vec<bool>> {
    let mut mask = vec![false; g.len()];
    for &m in members {
        mask[g.idx(m)?] = true;
    }
    Ok(mask)
}

fn check_domination(g: &NetworkGraph, mask: &[bool]) -> Result<()> {
    for v in 0..g.len() {
        if !mask[v] && !g.sym_adj()[v].iter().any(|&u| mask[u]) {
            return Err(Error::InvalidBackbone(format!("node {} is not dominated", g.id(v))));
        }
    }
    Ok(())
}

fn induced_adj(g: &NetworkGraph, mask: &[bool]) -> Vec<Vec<usize>> {
    g.sym_adj()
        .iter()
        .enumerate()
        .map(|(u, list)| {
            if mask[u] {
                list.iter().copied().filter(|&v| mask[v]).collect()
            } else {
                Vec::new()
            }
        })
        .collect()
}

/// BFS parents over the member-induced subgraph; neighbors are scanned in
/// ascending id order so the lowest-id parent wins ties.
fn bfs_parents(g: &NetworkGraph, mask: &[bool], root: usize) -> Vec<Option<usize>> {
    let adj = induced_adj(g, mask);
    let mut parent = vec![None; g.len()];
    let mut seen = vec![false; g.len()];
    let mut queue = std::collections::VecDeque::from([root]);
    seen[root] = true;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                parent[v] = Some(u);
                queue.push_back(v);
            }
        }
    }
    parent
}

fn require_connected(g: &NetworkGraph) -> Result<()> {
    if g.is_empty() {
        return Err(Error::InvalidBackbone("empty graph".into()));
    }
    if let Some((v, _)) = bfs(g.sym_adj(), 0).iter().enumerate().find(|(_, d)| d.is_none()) {
        return Err(Error::Disconnected {
            from: g.id(0),
            to: g.id(v),
        });
    }
    Ok(())
}

fn is_cds(g: &NetworkGraph, mask: &[bool]) -> bool {
    let Some(start) = mask.iter().position(|&m| m) else {
        return false;
    };
    if check_domination(g, mask).is_err() {
        return false;
    }
    let adj = induced_adj(g, mask);
    bfs(&adj, start)
        .iter()
        .enumerate()
        .all(|(v, d)| !mask[v] || d.is_some())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Color {
    White,
    Gray,
    Black,
}

/// Greedy connected dominating set.
///
/// Phase one grows a dominating tree from the highest-degree node: at each
/// step a gray node, or a gray node together with one of its white
/// neighbors, is blackened, whichever dominates the most white nodes per
/// added node. Ties prefer a single node, then lower ids. Phase two drops
/// black nodes, highest id first, whose removal keeps a connected
/// dominating set.
pub fn greedy_cds(g: &NetworkGraph) -> Result<Backbone> {
    require_connected(g)?;
    let n = g.len();
    let adj = g.sym_adj();
    let mut color = vec![Color::White; n];
    let mut white = n;

    let blacken = |u: usize, color: &mut Vec<Color>, white: &mut usize| {
        if color[u] == Color::White {
            *white -= 1;
        }
        color[u] = Color::Black;
        for &v in &adj[u] {
            if color[v] == Color::White {
                color[v] = Color::Gray;
                *white -= 1;
            }
        }
    };

    let start = (0..n).max_by_key(|&u| (adj[u].len(), std::cmp::Reverse(u))).unwrap();
    blacken(start, &mut color, &mut white);

    while white > 0 {
        // (yield, size, u, v)
        let mut best: Option<(usize, usize, usize, Option<usize>)> = None;
        let better = |cand: (usize, usize, usize, Option<usize>),
                      cur: &Option<(usize, usize, usize, Option<usize>)>| {
            match cur {
                None => true,
                Some(b) => {
                    // compare yield per node by cross-multiplication
                    let lhs = cand.0 * b.1;
                    let rhs = b.0 * cand.1;
                    lhs > rhs || (lhs == rhs && cand.1 < b.1)
                }
            }
        };
        for u in (0..n).filter(|&u| color[u] == Color::Gray) {
            let single = adj[u].iter().filter(|&&w| color[w] == Color::White).count();
            if single > 0 && better((single, 1, u, None), &best) {
                best = Some((single, 1, u, None));
            }
            for &v in adj[u].iter().filter(|&&v| color[v] == Color::White) {
                let mut covered: BTreeSet<usize> =
                    adj[u].iter().copied().filter(|&w| color[w] == Color::White).collect();
                covered.extend(adj[v].iter().copied().filter(|&w| color[w] == Color::White));
                covered.insert(v);
                let y = covered.len();
                if better((y, 2, u, Some(v)), &best) {
                    best = Some((y, 2, u, Some(v)));
                }
            }
        }
        let (_, _, u, v) = best.expect("a connected graph always has a gray frontier");
        blacken(u, &mut color, &mut white);
        if let Some(v) = v {
            blacken(v, &mut color, &mut white);
        }
    }

    let mut mask: Vec<bool> = color.iter().map(|&c| c == Color::Black).collect();
    for u in (0..n).rev() {
        if mask[u] && mask.iter().filter(|&&m| m).count() > 1 {
            mask[u] = false;
            if !is_cds(g, &mask) {
                mask[u] = true;
            }
        }
    }
    let members = (0..n).filter(|&u| mask[u]).map(|u| g.id(u)).collect();
    Backbone::new(g, members, BackboneOrigin::Greedy)
}

/// Minimum connected dominating set by exhaustive enumeration in order of
/// size, then lexicographic member sequence.
pub fn brute_force_mcds(g: &NetworkGraph) -> Result<Backbone> {
    let n = g.len();
    if n > ORACLE_NODE_LIMIT {
        return Err(Error::OracleTooLarge {
            n,
            limit: ORACLE_NODE_LIMIT,
        });
    }
    require_connected(g)?;
    let adj = g.sym_adj();
    let closed: Vec<u32> = (0..n)
        .map(|u| adj[u].iter().fold(1u32 << u, |m, &v| m | (1 << v)))
        .collect();
    let open: Vec<u32> = (0..n).map(|u| closed[u] & !(1 << u)).collect();
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };

    let connected = |set: u32| {
        let mut reached = set & set.wrapping_neg();
        loop {
            let mut next = reached;
            let mut bits = reached;
            while bits != 0 {
                let u = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                next |= open[u] & set;
            }
            if next == reached {
                return reached == set;
            }
            reached = next;
        }
    };

    for size in 1..=n {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            let set = combo.iter().fold(0u32, |m, &u| m | (1 << u));
            let dominated = combo.iter().fold(0u32, |m, &u| m | closed[u]);
            if dominated == full && connected(set) {
                let members = combo.iter().map(|&u| g.id(u)).collect();
                return Backbone::new(g, members, BackboneOrigin::Oracle);
            }
            // next combination in lexicographic order
            let mut i = size;
            while i > 0 && combo[i - 1] == n - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            combo[i - 1] += 1;
            for j in i..size {
                combo[j] = combo[j - 1] + 1;
            }
        }
    }
    unreachable!("the full node set of a connected graph is a CDS")
}

/// Depth-band clustering of a backbone along a depth-first traversal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    /// Traversal root: the lowest-id member.
    pub root: NodeId,
    /// Graph diameter used as the band width.
    pub band: u32,
    /// Depth of each member in the depth-first traversal tree.
    pub dfs_depth: BTreeMap<NodeId, u32>,
    pub cluster_of: BTreeMap<NodeId, usize>,
    pub leaders: BTreeMap<usize, NodeId>,
}

impl ClusterAssignment {
    pub fn cluster_count(&self) -> usize {
        self.leaders.len()
    }
}

/// Runs a depth-first traversal over the members from the lowest-id member
/// and assigns member `v` to cluster `floor(depth(v) / diam(G))`. Each
/// member keeps the depth of its first visit; neighbors are explored in
/// ascending id order.
pub fn dfs_cluster(g: &NetworkGraph, base: &Backbone) -> Result<ClusterAssignment> {
    base.validate(g)?;
    let band = symmetric_diameter(g)?;
    let mask = member_mask(g, &base.members)?;
    let adj = induced_adj(g, &mask);
    let root = *base.members.first().expect("validated backbone is non-empty");
    let r = g.idx(root)?;

    let mut depth: Vec<Option<u32>> = vec![None; g.len()];
    depth[r] = Some(0);
    let mut stack = vec![(r, 0usize)];
    while let Some(&mut (u, ref mut next)) = stack.last_mut() {
        if let Some(&v) = adj[u].get(*next) {
            *next += 1;
            if depth[v].is_none() {
                depth[v] = Some(depth[u].unwrap() + 1);
                stack.push((v, 0));
            }
        } else {
            stack.pop();
        }
    }

    let mut dfs_depth = BTreeMap::new();
    let mut cluster_of = BTreeMap::new();
    let mut leaders: BTreeMap<usize, NodeId> = BTreeMap::new();
    for &m in &base.members {
        let d = depth[g.idx(m)?].expect("members are connected");
        let j = d.checked_div(band).unwrap_or(0) as usize;
        dfs_depth.insert(m, d);
        cluster_of.insert(m, j);
        leaders.entry(j).and_modify(|l| *l = (*l).min(m)).or_insert(m);
    }
    Ok(ClusterAssignment {
        root,
        band,
        dfs_depth,
        cluster_of,
        leaders,
    })
}

/// Shortest path from `from` to `to` over bidirectional links, choosing the
/// lexicographically smallest id sequence among shortest paths.
fn lex_shortest_path(g: &NetworkGraph, from: usize, to: usize) -> Vec<usize> {
    let dist = bfs(g.sym_adj(), to);
    let mut path = vec![from];
    let mut cur = from;
    while cur != to {
        let d = dist[cur].expect("graph is connected");
        cur = *g.sym_adj()[cur]
            .iter()
            .find(|&&w| dist[w] == Some(d - 1))
            .expect("a shortest-path predecessor exists");
        path.push(cur);
    }
    path
}

/// Refines `base` so the member diameter stays within four times the graph
/// diameter: members are clustered by depth-first depth bands and every
/// cluster leader is joined to the root by a shortest path in the graph.
pub fn bounded_diameter_cds(g: &NetworkGraph, base: &Backbone) -> Result<Backbone> {
    let clusters = dfs_cluster(g, base)?;
    let r = g.idx(clusters.root)?;
    let mut members = base.members.clone();
    for &leader in clusters.leaders.values() {
        let l = g.idx(leader)?;
        if l != r {
            members.extend(lex_shortest_path(g, l, r).into_iter().map(|v| g.id(v)));
        }
    }
    Backbone::with_root(g, members, clusters.root, BackboneOrigin::BoundedDiameter)
}

/// Spanning tree over every node: members follow the backbone parent links,
/// every other node hangs off its lowest-id member neighbor.
#[derive(Debug, Clone)]
pub struct PropagationTree {
    root: usize,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    depth: Vec<u32>,
}

impl PropagationTree {
    pub fn new(g: &NetworkGraph, bb: &Backbone) -> Result<Self> {
        bb.validate(g)?;
        let n = g.len();
        let member = member_mask(g, &bb.members)?;
        let mut parent = vec![None; n];
        for (&c, &p) in &bb.parent {
            parent[g.idx(c)?] = Some(g.idx(p)?);
        }
        for v in 0..n {
            if !member[v] {
                parent[v] = g.sym_adj()[v].iter().copied().find(|&u| member[u]);
            }
        }
        let mut children = vec![Vec::new(); n];
        for (v, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                children[p].push(v);
            }
        }
        let root = g.idx(bb.root)?;
        let mut depth = vec![0; n];
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for &c in &children[u] {
                depth[c] = depth[u] + 1;
                stack.push(c);
            }
        }
        Ok(Self {
            root,
            parent,
            children,
            depth,
        })
    }

    pub(crate) fn root_idx(&self) -> usize {
        self.root
    }

    pub(crate) fn parent_idx(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub(crate) fn children_idx(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn depth(&self, g: &NetworkGraph, v: NodeId) -> Result<u32> {
        Ok(self.depth[g.idx(v)?])
    }

    pub fn height(&self) -> u32 {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// Nodes of the subtree rooted at `v`, `v` included.
    pub(crate) fn subtree_idx(&self, v: usize) -> Vec<usize> {
        let mut out = vec![v];
        let mut i = 0;
        while i < out.len() {
            out.extend_from_slice(&self.children[out[i]]);
            i += 1;
        }
        out
    }

    pub fn parent(&self, g: &NetworkGraph, v: NodeId) -> Result<Option<NodeId>> {
        Ok(self.parent[g.idx(v)?].map(|p| g.id(p)))
    }

    pub fn children(&self, g: &NetworkGraph, v: NodeId) -> Result<Vec<NodeId>> {
        Ok(self.children[g.idx(v)?].iter().map(|&c| g.id(c)).collect())
    }
}
