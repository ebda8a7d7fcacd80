use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mbcast_cli::experiment::{build_backbone, parse_seeds, run_experiment};
use mbcast_cli::scenario::{BackboneKind, NetworkFile, RunMode, Scenario};
use mbcast_cli::CliError;
use mbcast_core::bounds::{message_ratio_bound, schedule_time_bound};
use mbcast_core::generate::{
    four_node_line, gen_random_udg, gen_ring_fixture, gen_set_cover_reduction, gen_star_path, three_set_cover,
};
use mbcast_core::model::symmetric_diameter;
use mbcast_core::BoundReport;
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(
    name = "mbcast",
    version,
    about = "Backbone construction and multi-broadcast simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a network file.
    Gen(GenArgs),
    /// Run a scenario over one or more seeds.
    Run(RunArgs),
    /// Print the lower bounds and guarantees for a scenario.
    Bounds(ScenarioArgs),
    /// Check that a scenario loads and its network is usable.
    Validate(ScenarioArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    RandomUdg,
    Ring,
    StarPath,
    SetCover,
    Line4,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(clap::Args)]
struct GenArgs {
    kind: GenKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 3.0)]
    radius: f64,
    #[arg(long, default_value_t = 10.0)]
    area_side: f64,
    #[arg(long, default_value_t = 100)]
    connect_retry: usize,
    #[arg(long, default_value_t = 9)]
    ring_size: usize,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 3)]
    d: usize,
    /// Set-cover instance as `{"universe": [..], "subsets": [[..], ..]}`;
    /// defaults to the three-set example.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    gossip_k: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct ScenarioArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// `a..b` or `a..=b`.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct RunArgs {
    #[command(flatten)]
    common: ScenarioArgs,
    #[arg(long, value_enum)]
    mode: Option<RunMode>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long, value_enum)]
    backbone: Option<BackboneKind>,
}

#[derive(Deserialize)]
struct SetCoverFile {
    universe: BTreeSet<u32>,
    subsets: Vec<BTreeSet<u32>>,
}

#[derive(Serialize)]
struct BoundsRow {
    seed: u64,
    nodes: usize,
    k: usize,
    c: usize,
    diameter: u32,
    #[serde(flatten)]
    report: BoundReport,
    message_ratio_bound: f64,
    schedule_time_bound: usize,
}

fn input<E: std::fmt::Display>(ctx: &Path) -> impl Fn(E) -> CliError + '_ {
    move |e| CliError::Input(format!("{}: {e}", ctx.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(input(p)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

impl ScenarioArgs {
    fn seeds(&self) -> Result<Vec<u64>, CliError> {
        match (&self.seeds, self.seed) {
            (Some(r), _) => parse_seeds(r),
            (None, s) => Ok(vec![s.unwrap_or(0)]),
        }
    }
}

fn gen(args: &GenArgs) -> Result<(), CliError> {
    let file = match args.kind {
        GenKind::RandomUdg => NetworkFile::from_graph(&gen_random_udg(
            args.n,
            args.radius,
            args.area_side,
            args.seed,
            args.connect_retry,
        )?),
        GenKind::Ring => NetworkFile::combinatorial(&gen_ring_fixture(args.ring_size)?),
        GenKind::StarPath => NetworkFile::combinatorial(&gen_star_path(args.k, args.d)?.graph),
        GenKind::Line4 => NetworkFile::from_graph(&four_node_line()),
        GenKind::SetCover => {
            let (universe, subsets) = match &args.instance {
                Some(p) => {
                    let text = fs::read_to_string(p).map_err(input(p))?;
                    let f: SetCoverFile = serde_json::from_str(&text).map_err(input(p))?;
                    (f.universe, f.subsets)
                }
                None => three_set_cover(),
            };
            NetworkFile::from_graph(&gen_set_cover_reduction(&universe, &subsets, args.gossip_k)?.graph)
        }
    };
    emit(args.out.as_deref(), &(file.to_json() + "\n"))
}

fn run(args: &RunArgs) -> Result<bool, CliError> {
    let mut scenario = Scenario::load(&args.common.scenario)?;
    if let Some(m) = args.mode {
        scenario.mode = m;
    }
    if let Some(mu) = args.mu {
        scenario.cfg.mu = Some(mu);
    }
    if let Some(b) = args.backbone {
        scenario.backbone_kind = b;
    }
    let report = run_experiment(&scenario, args.common.seeds()?)?;
    let text = match args.common.format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv(),
    };
    emit(args.common.out.as_deref(), &text)?;
    let mut clean = true;
    for (seed, v) in report.violations() {
        eprintln!("seed {seed}: {v}");
        clean = false;
    }
    Ok(clean)
}

fn bounds(args: &ScenarioArgs) -> Result<(), CliError> {
    let scenario = Scenario::load(&args.scenario)?;
    let mut rows = Vec::new();
    for seed in args.seeds()? {
        let g = scenario.network(seed)?;
        let k = scenario.source_ids(&g)?.len();
        let c = scenario.c;
        let diameter = symmetric_diameter(&g)?;
        let (mcds, exact) = if g.len() <= mbcast_core::backbone::ORACLE_NODE_LIMIT {
            (build_backbone(&g, BackboneKind::Oracle)?.len(), true)
        } else {
            (build_backbone(&g, BackboneKind::Greedy)?.len(), false)
        };
        rows.push(BoundsRow {
            seed,
            nodes: g.len(),
            k,
            c,
            diameter,
            report: BoundReport::compute(&g, k, c, mcds, exact)?,
            message_ratio_bound: message_ratio_bound(g.max_degree(), c),
            schedule_time_bound: schedule_time_bound(diameter, k, c),
        });
    }
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&rows).expect("bounds serialize") + "\n",
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "seed",
                "nodes",
                "k",
                "c",
                "diameter",
                "msg_lb",
                "msg_lb_real",
                "time_lb",
                "mcds",
                "mcds_exact",
                "msg_ratio_bound",
                "time_bound",
            ])
            .expect("in-memory csv write");
            for r in &rows {
                w.write_record([
                    r.seed.to_string(),
                    r.nodes.to_string(),
                    r.k.to_string(),
                    r.c.to_string(),
                    r.diameter.to_string(),
                    r.report.message_lb.to_string(),
                    format!("{:.6}", r.report.message_lb_real),
                    r.report.time_lb.to_string(),
                    r.report.mcds_size.to_string(),
                    r.report.mcds_exact.to_string(),
                    format!("{:.6}", r.message_ratio_bound),
                    r.schedule_time_bound.to_string(),
                ])
                .expect("in-memory csv write");
            }
            String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
        }
    };
    emit(args.out.as_deref(), &text)
}

fn validate(args: &ScenarioArgs) -> Result<(), CliError> {
    let scenario = Scenario::load(&args.scenario)?;
    let mut lines = String::new();
    for seed in args.seeds()? {
        let g = scenario.network(seed)?;
        let sources = scenario.source_ids(&g)?;
        if !g.is_connected() {
            return Err(CliError::Input(format!("seed {seed}: network is not connected")));
        }
        if !g.is_symmetric() {
            lines += &format!("seed {seed}: warning: asymmetric links are ignored by the algorithms\n");
        }
        lines += &format!(
            "seed {seed}: ok ({} nodes, {} links, {} sources, c = {})\n",
            g.len(),
            g.edges().len(),
            sources.len(),
            scenario.c
        );
    }
    emit(args.out.as_deref(), &lines)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(a) => gen(a).map(|_| true),
        Command::Run(a) => run(a),
        Command::Bounds(a) => bounds(a).map(|_| true),
        Command::Validate(a) => validate(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
