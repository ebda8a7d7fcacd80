//! Network fixtures: random unit disk graphs and structured instances.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::model::{build_network, NetworkGraph, NodeId, NodeSpec, Obstacle};

/// Path-loss exponent used by every generated geometric fixture.
pub const FIXTURE_ALPHA: f64 = 2.0;

/// `n` nodes placed uniformly in `[0, area_side]^2`, all with transmission
/// radius `radius`. Placement is redrawn from the same stream up to
/// `connect_retry` times until the graph is connected.
pub fn gen_random_udg(n: usize, radius: f64, area_side: f64, seed: u64, connect_retry: usize) -> Result<NetworkGraph> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !(radius > 0.0 && area_side >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "radius {radius} must be positive and area side {area_side} non-negative"
        )));
    }
    let power = radius.powf(FIXTURE_ALPHA);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let attempts = connect_retry.max(1);
    for _ in 0..attempts {
        let nodes: Vec<NodeSpec> = (0..n as u32)
            .map(|id| {
                let x = rng.gen::<f64>() * area_side;
                let y = rng.gen::<f64>() * area_side;
                NodeSpec::new(id, x, y, power)
            })
            .collect();
        let g = build_network(nodes, Vec::new(), FIXTURE_ALPHA)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::ConnectivityNotAchieved { attempts })
}

/// Hub-and-ring fixture.
///
/// Node 0 is the hub. Nodes `1..=m` form the inner ring, an open chain whose
/// every node is also attached to the hub, and outer node `m+i` hangs off
/// inner node `i` as a leaf. Any two nodes are within 4 hops through the hub,
/// while each leaf forces its inner node into every dominating set: the
/// minimum CDS is the whole inner chain, with hop diameter `m - 1`.
pub fn gen_ring_fixture(ring_size: usize) -> Result<NetworkGraph> {
    if ring_size < 6 {
        return Err(Error::InvalidParameter(format!("ring size {ring_size} is below 6")));
    }
    let m = ring_size as u32;
    let mut edges = Vec::new();
    for i in 1..=m {
        edges.push((NodeId(0), NodeId(i)));
        edges.push((NodeId(i), NodeId(m + i)));
        if i < m {
            edges.push((NodeId(i), NodeId(i + 1)));
        }
    }
    NetworkGraph::from_edges((0..=2 * m).map(NodeId), &edges)
}

/// The unique minimum CDS of the ring fixture: the inner chain.
pub fn ring_fixture_mcds(ring_size: usize) -> BTreeSet<NodeId> {
    (1..=ring_size as u32).map(NodeId).collect()
}

#[derive(Debug, Clone)]
pub struct StarPath {
    pub graph: NetworkGraph,
    pub sources: BTreeSet<NodeId>,
    /// The end of the path, farthest from the leaves.
    pub far: NodeId,
}

/// Star with `k` source leaves (ids `1..=k`) around center 0, plus a path of
/// `d` further nodes hanging off the center.
pub fn gen_star_path(k: usize, d: usize) -> Result<StarPath> {
    if k < 1 || d < 1 {
        return Err(Error::InvalidParameter(format!(
            "k = {k} and d = {d} must be at least 1"
        )));
    }
    let (k, d) = (k as u32, d as u32);
    let mut edges: Vec<(NodeId, NodeId)> = (1..=k).map(|i| (NodeId(0), NodeId(i))).collect();
    let mut prev = 0;
    for j in k + 1..=k + d {
        edges.push((NodeId(prev), NodeId(j)));
        prev = j;
    }
    Ok(StarPath {
        graph: NetworkGraph::from_edges((0..=k + d).map(NodeId), &edges)?,
        sources: (1..=k).map(NodeId).collect(),
        far: NodeId(k + d),
    })
}

/// Four nodes on a unit-spaced line with unit radius. Used with source 0
/// (a leaf) and source 2 (inside the backbone `{1, 2}`).
pub fn four_node_line() -> NetworkGraph {
    let nodes = (0..4).map(|i| NodeSpec::new(i, i as f64, 0.0, 1.0)).collect();
    build_network(nodes, Vec::new(), FIXTURE_ALPHA).expect("fixture is valid")
}

/// Three sets over three elements: `{e1, e2}`, `{e2}`, `{e2, e3}`.
pub fn three_set_cover() -> (BTreeSet<u32>, Vec<BTreeSet<u32>>) {
    (
        BTreeSet::from([1, 2, 3]),
        vec![BTreeSet::from([1, 2]), BTreeSet::from([2]), BTreeSet::from([2, 3])],
    )
}

#[derive(Debug, Clone)]
pub struct SetCoverInstance {
    pub graph: NetworkGraph,
    pub sources: BTreeSet<NodeId>,
    /// One node per subset, in input order.
    pub set_nodes: Vec<NodeId>,
    /// One node per universe element, in ascending element order.
    pub element_nodes: Vec<NodeId>,
}

/// Three-tier geometric instance built from a set cover problem.
///
/// Sources (ids `0..k`) sit far to the left with just enough power to reach
/// every set node and each other. Set nodes sit on the line `x = 0` and
/// reach every element; element nodes sit on a distant vertical line with
/// unit radius and reach nothing. A short obstacle in front of each element
/// cuts the links from the sets that do not contain it.
pub fn gen_set_cover_reduction(
    universe: &BTreeSet<u32>,
    subsets: &[BTreeSet<u32>],
    gossip_k: usize,
) -> Result<SetCoverInstance> {
    if gossip_k < 1 {
        return Err(Error::InvalidParameter("gossip_k must be at least 1".into()));
    }
    if universe.is_empty() || subsets.is_empty() {
        return Err(Error::InvalidParameter("universe and subsets must be non-empty".into()));
    }
    for s in subsets {
        if let Some(e) = s.iter().find(|e| !universe.contains(e)) {
            return Err(Error::InvalidParameter(format!("element {e} is not in the universe")));
        }
    }
    if let Some(&e) = universe.iter().find(|e| !subsets.iter().any(|s| s.contains(e))) {
        return Err(Error::NotCovered(e as usize));
    }

    let (ns, ne) = (subsets.len(), universe.len());
    let span = 10.0 * (ns.max(ne) - 1) as f64;
    let x_el = 10.0 * span + 100.0;
    let set_pos: Vec<Point> = (0..ns).map(|i| Point::new(0.0, 10.0 * i as f64)).collect();
    let el_pos: Vec<Point> = (0..ne).map(|j| Point::new(x_el, 10.0 * j as f64)).collect();
    let set_radius = (x_el * x_el + span * span).sqrt() + 1.0;
    let src_x = -(set_radius + 10.0);
    let src_pos: Vec<Point> = (0..gossip_k)
        .map(|q| Point::new(src_x, span / 2.0 + q as f64))
        .collect();

    let mut nodes = Vec::new();
    let mut id = 0u32;
    let mut sources = BTreeSet::new();
    for p in &src_pos {
        let reach = set_pos.iter().map(|s| p.distance(s)).fold(0.0, f64::max) + 1.0;
        nodes.push(NodeSpec::new(id, p.x, p.y, reach.powf(FIXTURE_ALPHA)));
        sources.insert(NodeId(id));
        id += 1;
    }
    let mut set_nodes = Vec::new();
    for p in &set_pos {
        nodes.push(NodeSpec::new(id, p.x, p.y, set_radius.powf(FIXTURE_ALPHA)));
        set_nodes.push(NodeId(id));
        id += 1;
    }
    let mut element_nodes = Vec::new();
    for p in &el_pos {
        nodes.push(NodeSpec::new(id, p.x, p.y, 1.0));
        element_nodes.push(NodeId(id));
        id += 1;
    }

    let half = 2.0 / x_el;
    let mut obstacles = Vec::new();
    for (i, s) in subsets.iter().enumerate() {
        for (j, e) in universe.iter().enumerate() {
            if s.contains(e) {
                continue;
            }
            let (a, b) = (el_pos[j], set_pos[i]);
            let len = a.distance(&b);
            let (ux, uy) = ((b.x - a.x) / len, (b.y - a.y) / len);
            let c = Point::new(a.x + ux, a.y + uy);
            obstacles.push(Obstacle::new(
                Point::new(c.x - uy * half, c.y + ux * half),
                Point::new(c.x + uy * half, c.y - ux * half),
            )?);
        }
    }
    Ok(SetCoverInstance {
        graph: build_network(nodes, obstacles, FIXTURE_ALPHA)?,
        sources,
        set_nodes,
        element_nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{diameter, symmetric_diameter};

    #[test]
    fn random_udg_single_node() {
        let g = gen_random_udg(1, 1.0, 5.0, 3, 1).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(diameter(&g).unwrap(), 0);
    }

    #[test]
    fn random_udg_large_radius_is_complete() {
        let g = gen_random_udg(10, 3.0, 2.0, 9, 1).unwrap();
        assert_eq!(g.edges().len(), 90);
        assert!(g.is_udg());
    }

    #[test]
    fn random_udg_is_seeded() {
        let a = gen_random_udg(12, 1.2, 3.0, 77, 50).unwrap();
        let b = gen_random_udg(12, 1.2, 3.0, 77, 50).unwrap();
        assert_eq!(a.nodes(), b.nodes());
        assert_eq!(a.edges(), b.edges());
    }

    #[test]
    fn random_udg_reports_failure() {
        assert!(matches!(
            gen_random_udg(20, 0.01, 100.0, 1, 3),
            Err(Error::ConnectivityNotAchieved { attempts: 3 })
        ));
    }

    #[test]
    fn ring_diameter_is_four() {
        for m in [6, 7, 9, 17, 33] {
            let g = gen_ring_fixture(m).unwrap();
            assert_eq!(g.len(), 2 * m + 1);
            assert_eq!(symmetric_diameter(&g).unwrap(), 4, "ring size {m}");
        }
        assert!(gen_ring_fixture(5).is_err());
    }

    #[test]
    fn ring_minimum_cds_is_the_inner_chain() {
        let g = gen_ring_fixture(9).unwrap();
        let oracle = crate::backbone::brute_force_mcds(&g).unwrap();
        assert_eq!(oracle.members, ring_fixture_mcds(9));
        assert_eq!(oracle.member_diameter(&g).unwrap(), 8);
    }

    #[test]
    fn star_path_shapes() {
        let sp = gen_star_path(1, 1).unwrap();
        assert_eq!(sp.graph.len(), 3);
        assert_eq!(sp.graph.edges().len(), 4);
        assert_eq!(sp.far, NodeId(2));
        let sp = gen_star_path(4, 3).unwrap();
        assert_eq!(sp.graph.len(), 8);
        assert_eq!(symmetric_diameter(&sp.graph).unwrap(), 4);
        assert_eq!(sp.sources.len(), 4);
    }

    #[test]
    fn set_cover_wiring_matches_membership() {
        let (u, sets) = three_set_cover();
        for k in [1, 3] {
            let inst = gen_set_cover_reduction(&u, &sets, k).unwrap();
            let g = &inst.graph;
            for (i, s) in sets.iter().enumerate() {
                for (j, e) in u.iter().enumerate() {
                    assert_eq!(
                        g.has_edge(inst.set_nodes[i], inst.element_nodes[j]),
                        s.contains(e),
                        "set {i} element {e}"
                    );
                }
            }
            for &src in &inst.sources {
                for &s in &inst.set_nodes {
                    assert!(g.has_edge(src, s));
                    assert!(!g.has_edge(s, src));
                }
                for &e in &inst.element_nodes {
                    assert!(!g.has_edge(src, e));
                }
                for &other in &inst.sources {
                    assert_eq!(g.has_edge(src, other), src != other);
                }
            }
            for &e in &inst.element_nodes {
                assert_eq!(g.out_degree(e).unwrap(), 0);
            }
        }
    }

    #[test]
    fn set_cover_wiring_on_wider_instance() {
        let u: BTreeSet<u32> = (0..7).collect();
        let sets: Vec<BTreeSet<u32>> = vec![
            BTreeSet::from([0, 1, 2]),
            BTreeSet::from([2, 3]),
            BTreeSet::from([3, 4, 5, 6]),
            BTreeSet::from([0, 6]),
            BTreeSet::from([1, 5]),
        ];
        let inst = gen_set_cover_reduction(&u, &sets, 2).unwrap();
        for (i, s) in sets.iter().enumerate() {
            for (j, e) in u.iter().enumerate() {
                assert_eq!(
                    inst.graph.has_edge(inst.set_nodes[i], inst.element_nodes[j]),
                    s.contains(e)
                );
            }
        }
    }

    #[test]
    fn set_cover_rejects_uncovered_element() {
        let u = BTreeSet::from([1, 2, 3]);
        let sets = vec![BTreeSet::from([1, 2])];
        assert_eq!(gen_set_cover_reduction(&u, &sets, 1).unwrap_err(), Error::NotCovered(3));
    }
}
