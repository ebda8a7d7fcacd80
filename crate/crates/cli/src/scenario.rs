//! Scenario and network files.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use mbcast_core::dist::DegreeKnowledge;
use mbcast_core::generate::{gen_random_udg, gen_ring_fixture, gen_star_path};
use mbcast_core::model::{BuildOptions, EdgeRule};
use mbcast_core::{NetworkGraph, NodeId, NodeSpec, Obstacle, Point};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleRecord {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

/// Network file contents. When `edges` is present the network is
/// combinatorial: the listed pairs become bidirectional links and the
/// geometry is ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    pub alpha: f64,
    pub nodes: Vec<NodeRecord>,
    #[serde(default)]
    pub obstacles: Vec<ObstacleRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(u32, u32)>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub strict_edges: bool,
}

impl NetworkFile {
    pub fn from_graph(g: &NetworkGraph) -> Self {
        let nodes = g
            .nodes()
            .iter()
            .map(|n| NodeRecord {
                id: n.id.0,
                x: n.position.x,
                y: n.position.y,
                power: n.power,
            })
            .collect();
        let obstacles = g
            .obstacles()
            .iter()
            .map(|o| ObstacleRecord {
                x1: o.a.x,
                y1: o.a.y,
                x2: o.b.x,
                y2: o.b.y,
            })
            .collect();
        Self {
            alpha: g.alpha(),
            nodes,
            obstacles,
            edges: None,
            strict_edges: false,
        }
    }

    /// Combinatorial form of a graph whose links are all bidirectional.
    pub fn combinatorial(g: &NetworkGraph) -> Self {
        let mut f = Self::from_graph(g);
        f.obstacles.clear();
        f.edges = Some(
            g.edges()
                .into_iter()
                .filter(|(u, v)| u < v)
                .map(|(u, v)| (u.0, v.0))
                .collect(),
        );
        f
    }

    pub fn build(&self) -> Result<NetworkGraph, CliError> {
        let ids = self.nodes.iter().map(|n| NodeId(n.id));
        if let Some(edges) = &self.edges {
            let e: Vec<_> = edges.iter().map(|&(u, v)| (NodeId(u), NodeId(v))).collect();
            return Ok(NetworkGraph::from_edges(ids, &e)?);
        }
        let nodes = self
            .nodes
            .iter()
            .map(|n| NodeSpec::new(n.id, n.x, n.y, n.power))
            .collect();
        let obstacles = self
            .obstacles
            .iter()
            .map(|o| Obstacle::new(Point::new(o.x1, o.y1), Point::new(o.x2, o.y2)))
            .collect::<Result<Vec<_>, _>>()?;
        let opts = BuildOptions {
            edge_rule: if self.strict_edges {
                EdgeRule::Strict
            } else {
                EdgeRule::Inclusive
            },
            max_radius: None,
        };
        Ok(NetworkGraph::build(nodes, obstacles, self.alpha, &opts)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serializes")
    }
}

/// Seeded network generators usable from a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generate", rename_all = "kebab-case")]
pub enum Generator {
    RandomUdg {
        n: usize,
        radius: f64,
        area_side: f64,
        #[serde(default = "default_retry")]
        connect_retry: usize,
    },
    Ring {
        ring_size: usize,
    },
    StarPath {
        k: usize,
        d: usize,
    },
}

fn default_retry() -> usize {
    100
}

impl Generator {
    pub fn generate(&self, seed: u64) -> Result<NetworkGraph, CliError> {
        Ok(match *self {
            Generator::RandomUdg {
                n,
                radius,
                area_side,
                connect_retry,
            } => gen_random_udg(n, radius, area_side, seed, connect_retry)?,
            Generator::Ring { ring_size } => gen_ring_fixture(ring_size)?,
            Generator::StarPath { k, d } => gen_star_path(k, d)?.graph,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NetworkSource {
    Path(PathBuf),
    Generated(Generator),
    Inline(NetworkFile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SourceSpec {
    /// Explicit source ids.
    Ids(BTreeSet<u32>),
    /// The `k` lowest ids.
    Count(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RunMode {
    Centralized,
    DistributedCd,
    DistributedNocd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BackboneKind {
    Greedy,
    BoundedDiameter,
    Oracle,
}

/// Distributed simulation settings; the seed comes from the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistSettings {
    /// Slot multiplier; defaults to the maximum degree.
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: usize,
    #[serde(default)]
    pub degree_knowledge: DegreeKnowledge,
}

fn default_max_rounds() -> usize {
    10_000
}

impl Default for DistSettings {
    fn default() -> Self {
        Self {
            mu: None,
            max_rounds: default_max_rounds(),
            degree_knowledge: DegreeKnowledge::Exact,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default = "default_name")]
    pub name: String,
    pub network: NetworkSource,
    pub sources: SourceSpec,
    pub c: usize,
    #[serde(default = "default_mode")]
    pub mode: RunMode,
    #[serde(default)]
    pub cfg: DistSettings,
    #[serde(default = "default_backbone")]
    pub backbone_kind: BackboneKind,
    /// Centralized runs only: make the schedule collision free and replay it
    /// with interference.
    #[serde(default)]
    pub interference: bool,
}

fn default_name() -> String {
    "scenario".into()
}

fn default_mode() -> RunMode {
    RunMode::Centralized
}

fn default_backbone() -> BackboneKind {
    BackboneKind::BoundedDiameter
}

impl Scenario {
    /// Reads a scenario; relative network paths resolve against the
    /// scenario's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let mut s: Scenario =
            serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        if let NetworkSource::Path(p) = &mut s.network {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(s)
    }

    pub fn network(&self, seed: u64) -> Result<NetworkGraph, CliError> {
        match &self.network {
            NetworkSource::Inline(f) => f.build(),
            NetworkSource::Generated(gen) => gen.generate(seed),
            NetworkSource::Path(p) => {
                let text = fs::read_to_string(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
                let f: NetworkFile =
                    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
                f.build()
            }
        }
    }

    pub fn source_ids(&self, g: &NetworkGraph) -> Result<BTreeSet<NodeId>, CliError> {
        let ids: BTreeSet<NodeId> = match &self.sources {
            SourceSpec::Ids(ids) => ids.iter().map(|&i| NodeId(i)).collect(),
            SourceSpec::Count(k) => {
                if *k > g.len() {
                    return Err(CliError::Input(format!(
                        "{k} sources requested but the network has {} nodes",
                        g.len()
                    )));
                }
                g.ids().take(*k).collect()
            }
        };
        if let Some(bad) = ids.iter().find(|id| !g.contains(**id)) {
            return Err(CliError::Input(format!("source {bad} is not a node of the network")));
        }
        if ids.is_empty() {
            return Err(CliError::Input("no sources given".into()));
        }
        if self.c < 1 || self.c > ids.len() {
            return Err(CliError::Input(format!(
                "compression factor {} must lie in [1, {}]",
                self.c,
                ids.len()
            )));
        }
        Ok(ids)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn network_file_round_trip() {
        let text = r#"{"alpha": 2.0,
            "nodes": [{"id": 0, "x": 0, "y": 0, "power": 1}, {"id": 1, "x": 1, "y": 0, "power": 1}],
            "obstacles": []}"#;
        let f: NetworkFile = serde_json::from_str(text).unwrap();
        let g = f.build().unwrap();
        assert!(g.has_edge(NodeId(0), NodeId(1)));
        let again: NetworkFile = serde_json::from_str(&NetworkFile::from_graph(&g).to_json()).unwrap();
        assert_eq!(again, f);
    }

    #[test]
    fn obstacle_removes_link() {
        let text = r#"{"alpha": 2.0,
            "nodes": [{"id": 0, "x": 0, "y": 0, "power": 1}, {"id": 1, "x": 1, "y": 0, "power": 1}],
            "obstacles": [{"x1": 0.5, "y1": -1, "x2": 0.5, "y2": 1}]}"#;
        let g = serde_json::from_str::<NetworkFile>(text).unwrap().build().unwrap();
        assert!(g.edges().is_empty());
    }

    #[test]
    fn scenario_variants_parse() {
        let s: Scenario =
            serde_json::from_str(r#"{"network": {"generate": "ring", "ring_size": 9}, "sources": 3, "c": 2}"#).unwrap();
        assert_eq!(s.network, NetworkSource::Generated(Generator::Ring { ring_size: 9 }));
        assert_eq!(s.mode, RunMode::Centralized);
        let g = s.network(0).unwrap();
        assert_eq!(s.source_ids(&g).unwrap().len(), 3);

        let s: Scenario = serde_json::from_str(
            r#"{"network": "net.json", "sources": [4, 5], "c": 1, "mode": "distributed-nocd",
                "cfg": {"mu": 2.0}, "backbone_kind": "oracle"}"#,
        )
        .unwrap();
        assert_eq!(s.network, NetworkSource::Path("net.json".into()));
        assert_eq!(s.cfg.mu, Some(2.0));
        assert_eq!(s.cfg.max_rounds, 10_000);
    }

    #[test]
    fn bad_sources_are_input_errors() {
        let s: Scenario = serde_json::from_str(
            r#"{"network": {"generate": "star-path", "k": 2, "d": 1}, "sources": [1, 9], "c": 1}"#,
        )
        .unwrap();
        let g = s.network(0).unwrap();
        assert!(matches!(s.source_ids(&g), Err(CliError::Input(_))));
        let s = Scenario {
            sources: SourceSpec::Ids(BTreeSet::from([1, 2])),
            c: 3,
            ..s
        };
        assert!(matches!(s.source_ids(&g), Err(CliError::Input(_))));
    }
}
