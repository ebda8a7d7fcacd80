//! Running a scenario across seeds.

use mbcast_core::backbone::{bounded_diameter_cds, brute_force_mcds, greedy_cds, ORACLE_NODE_LIMIT};
use mbcast_core::bounds::schedule_time_bound;
use mbcast_core::dist::run_distributed_multibroadcast;
use mbcast_core::model::symmetric_diameter;
use mbcast_core::schedule::{
    make_collision_free, multibroadcast_message_bound, multibroadcast_schedule, simulate_schedule,
};
use mbcast_core::{Backbone, BoundReport, DistMetrics, Metrics, Mode, NetworkGraph, SimConfig};
use serde::{Deserialize, Serialize};

use crate::scenario::{BackboneKind, RunMode, Scenario};
use crate::CliError;

pub const CSV_HEADER: [&str; 8] = [
    "scenario",
    "seed",
    "messages",
    "makespan",
    "collisions",
    "msg_lb",
    "time_lb",
    "ratio",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RunMetrics {
    Centralized(Metrics),
    Distributed(DistMetrics),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub nodes: usize,
    pub diameter: u32,
    pub backbone: Backbone,
    pub messages: usize,
    pub makespan: usize,
    /// Failed receptions (centralized) or failed attempts (distributed).
    pub collisions: usize,
    pub bounds: BoundReport,
    /// Messages over the real-valued message lower bound.
    pub ratio: f64,
    pub metrics: RunMetrics,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    fn of(values: impl Iterator<Item = f64>) -> Option<Self> {
        let v: Vec<f64> = values.collect();
        if v.is_empty() {
            return None;
        }
        Some(Self {
            mean: v.iter().sum::<f64>() / v.len() as f64,
            min: v.iter().copied().fold(f64::INFINITY, f64::min),
            max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub messages: Option<Summary>,
    pub makespan: Option<Summary>,
    pub collisions: Option<Summary>,
    pub ratio: Option<Summary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: String,
    pub runs: Vec<SeedResult>,
    pub aggregate: Aggregate,
}

impl Report {
    pub fn violations(&self) -> impl Iterator<Item = (u64, &str)> {
        self.runs
            .iter()
            .flat_map(|r| r.violations.iter().map(move |v| (r.seed, v.as_str())))
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory csv write");
        for r in &self.runs {
            w.write_record([
                self.scenario.clone(),
                r.seed.to_string(),
                r.messages.to_string(),
                r.makespan.to_string(),
                r.collisions.to_string(),
                r.bounds.message_lb.to_string(),
                r.bounds.time_lb.to_string(),
                format!("{:.6}", r.ratio),
            ])
            .expect("in-memory csv write");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn build_backbone(g: &NetworkGraph, kind: BackboneKind) -> Result<Backbone, CliError> {
    Ok(match kind {
        BackboneKind::Greedy => greedy_cds(g)?,
        BackboneKind::BoundedDiameter => bounded_diameter_cds(g, &greedy_cds(g)?)?,
        BackboneKind::Oracle => brute_force_mcds(g)?,
    })
}

/// Exact minimum backbone size when the oracle applies, else the greedy size.
fn mcds_size(g: &NetworkGraph, greedy: &Backbone) -> Result<(usize, bool), CliError> {
    if g.len() <= ORACLE_NODE_LIMIT {
        Ok((brute_force_mcds(g)?.len(), true))
    } else {
        Ok((greedy.len(), false))
    }
}

pub fn run_seed(scenario: &Scenario, seed: u64) -> Result<SeedResult, CliError> {
    let g = scenario.network(seed)?;
    let sources = scenario.source_ids(&g)?;
    let (k, c) = (sources.len(), scenario.c);
    let diameter = symmetric_diameter(&g)?;
    let backbone = build_backbone(&g, scenario.backbone_kind)?;
    let greedy = greedy_cds(&g)?;
    let (mcds, exact) = mcds_size(&g, &greedy)?;
    let bounds = BoundReport::compute(&g, k, c, mcds, exact)?;
    let mut violations = Vec::new();

    let (messages, makespan, collisions, complete, metrics) = match scenario.mode {
        RunMode::Centralized => {
            let sched = multibroadcast_schedule(&g, &backbone, &sources, c)?;
            let free = simulate_schedule(&g, &sched, false)?;
            let limit = multibroadcast_message_bound(backbone.len(), k, c);
            if free.messages as f64 > limit {
                violations.push(format!("{} messages exceed the bound {limit}", free.messages));
            }
            if scenario.backbone_kind == BackboneKind::BoundedDiameter {
                let t = schedule_time_bound(diameter, k, c);
                if free.makespan > t {
                    violations.push(format!("makespan {} exceeds the bound {t}", free.makespan));
                }
            }
            let m = if scenario.interference {
                let m = simulate_schedule(&g, &make_collision_free(&g, &sched)?, true)?;
                if m.collisions > 0 {
                    violations.push(format!(
                        "{} collisions after the collision-free transform",
                        m.collisions
                    ));
                }
                m
            } else {
                free
            };
            (
                m.messages,
                m.makespan,
                m.collisions,
                m.complete,
                RunMetrics::Centralized(m),
            )
        }
        RunMode::DistributedCd | RunMode::DistributedNocd => {
            let mode = if scenario.mode == RunMode::DistributedCd {
                Mode::Cd
            } else {
                Mode::NoCd
            };
            let mu = scenario.cfg.mu.unwrap_or(g.max_degree().max(1) as f64);
            let cfg = SimConfig {
                mu,
                mode,
                seed,
                max_rounds: scenario.cfg.max_rounds,
                degree_knowledge: scenario.cfg.degree_knowledge,
            };
            let run = run_distributed_multibroadcast(&g, &backbone, &sources, c, &cfg)?;
            let m = run.metrics;
            let failed: u32 = m.retransmissions_per_node.values().sum();
            (
                m.data_messages,
                m.rounds,
                failed as usize,
                m.complete,
                RunMetrics::Distributed(m),
            )
        }
    };

    if !complete {
        violations.push("some rumors were not delivered".into());
    }
    if exact && (messages as f64) < bounds.message_lb_real {
        violations.push(format!(
            "{messages} messages are below the lower bound {}",
            bounds.message_lb_real
        ));
    }
    Ok(SeedResult {
        seed,
        nodes: g.len(),
        diameter,
        backbone,
        messages,
        makespan,
        collisions,
        ratio: messages as f64 / bounds.message_lb_real,
        bounds,
        metrics,
        violations,
    })
}

/// Runs every seed in order and aggregates the results.
pub fn run_experiment(scenario: &Scenario, seeds: impl IntoIterator<Item = u64>) -> Result<Report, CliError> {
    let runs = seeds
        .into_iter()
        .map(|seed| {
            run_seed(scenario, seed).map_err(|e| match e {
                CliError::Input(msg) => CliError::Input(format!("{} seed {seed}: {msg}", scenario.name)),
                other => other,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let aggregate = Aggregate {
        messages: Summary::of(runs.iter().map(|r| r.messages as f64)),
        makespan: Summary::of(runs.iter().map(|r| r.makespan as f64)),
        collisions: Summary::of(runs.iter().map(|r| r.collisions as f64)),
        ratio: Summary::of(runs.iter().map(|r| r.ratio)),
    };
    Ok(Report {
        scenario: scenario.name.clone(),
        runs,
        aggregate,
    })
}

/// Parses `7`, `0..10` (exclusive) or `0..=9` (inclusive).
pub fn parse_seeds(text: &str) -> Result<Vec<u64>, CliError> {
    let bad = || CliError::Input(format!("invalid seed range {text:?}"));
    let num = |s: &str| s.trim().parse::<u64>().map_err(|_| bad());
    if let Some((a, b)) = text.split_once("..=") {
        let (a, b) = (num(a)?, num(b)?);
        return if a <= b { Ok((a..=b).collect()) } else { Err(bad()) };
    }
    if let Some((a, b)) = text.split_once("..") {
        let (a, b) = (num(a)?, num(b)?);
        return if a < b { Ok((a..b).collect()) } else { Err(bad()) };
    }
    Ok(vec![num(text)?])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_ranges() {
        assert_eq!(parse_seeds("4").unwrap(), vec![4]);
        assert_eq!(parse_seeds("2..5").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_seeds("2..=3").unwrap(), vec![2, 3]);
        assert!(parse_seeds("5..5").is_err());
        assert!(parse_seeds("x").is_err());
    }

    #[test]
    fn csv_has_fixed_header() {
        let s: Scenario = serde_json::from_str(
            r#"{"name": "star", "network": {"generate": "star-path", "k": 3, "d": 1}, "sources": [1, 2, 3], "c": 3}"#,
        )
        .unwrap();
        let report = run_experiment(&s, [0]).unwrap();
        let csv = report.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next(),
            Some("scenario,seed,messages,makespan,collisions,msg_lb,time_lb,ratio")
        );
        assert!(lines.next().unwrap().starts_with("star,0,"));
        assert_eq!(report.violations().count(), 0);
    }
}
