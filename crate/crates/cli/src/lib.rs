//! Experiment harness: generates grid scenarios, runs the solvers and
//! collects one record per (trial, algorithm, granularity).

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use mmsched_core::{
    generate_grid, max_tput_baseline, solve, solve_ec, verify_schedule, EcConfig, Network, ScenarioConfig,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Version of the JSON output layout.
pub const SCHEMA_VERSION: u32 = 1;

/// CSV column order. Empty cells mean "not applicable".
pub const CSV_COLUMNS: [&str; 17] = [
    "trial",
    "seed",
    "n",
    "enb_rf",
    "mmbs_rf",
    "ues_per_mmbs",
    "algo",
    "t_g",
    "theta",
    "network_tput",
    "max_tput_baseline",
    "slots",
    "kappa",
    "max_degree",
    "theta_relaxed",
    "runtime_ms",
    "error",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    Opt,
    Ec,
    MaxTput,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Grid side; the scenario has n*n mmBSs [default: 4]
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// Grid spacing in meters [default: 100]
    #[arg(long)]
    pub dg: Option<f64>,
    /// RF chains at the eNB [default: 10]
    #[arg(long)]
    pub enb_rf: Option<u32>,
    /// RF chains at each mmBS [default: 1]
    #[arg(long)]
    pub mmbs_rf: Option<u32>,
    /// UEs per mmBS; non-zero switches to the access problem [default: 0]
    #[arg(long)]
    pub ues_per_mmbs: Option<usize>,
    #[arg(long, value_enum, default_value_t = Algo::All)]
    pub algo: Algo,
    /// EC granularity; repeat for several values
    #[arg(long = "granularity", default_values_t = [0.01])]
    pub granularity: Vec<f64>,
    #[arg(long, default_value_t = 30)]
    pub trials: usize,
    /// Scenario seed of the first trial; trial i uses seed + i
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
    pub out: OutFormat,
    /// Scenario and channel config (JSON); flags given explicitly override it
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Write results here instead of stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Report runtime_ms as 0 so that output depends only on the inputs
    #[arg(long)]
    pub no_timing: bool,
}

impl Default for RunArgs {
    fn default() -> Self {
        RunArgs {
            grid_n: None,
            dg: None,
            enb_rf: None,
            mmbs_rf: None,
            ues_per_mmbs: None,
            algo: Algo::All,
            granularity: vec![0.01],
            trials: 30,
            seed: 1,
            out: OutFormat::Csv,
            params: None,
            output: None,
            no_timing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    pub enb_rf: u32,
    pub mmbs_rf: u32,
    pub ues_per_mmbs: usize,
    pub algo: Algo,
    pub t_g: Option<f64>,
    /// Max-min throughput; for EC the realized value of its schedule.
    pub theta: Option<f64>,
    pub network_tput: Option<f64>,
    pub max_tput_baseline: Option<f64>,
    /// Non-idle slots in the schedule.
    pub slots: Option<usize>,
    pub kappa: Option<usize>,
    pub max_degree: Option<usize>,
    pub theta_relaxed: Option<f64>,
    pub runtime_ms: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JsonOutput {
    pub schema_version: u32,
    pub config: ScenarioConfig,
    pub records: Vec<Record>,
}

/// Base config from `--params` with explicit flags applied on top.
pub fn scenario_config(args: &RunArgs) -> Result<ScenarioConfig> {
    let mut cfg = match &args.params {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            ScenarioConfig::from_json(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => ScenarioConfig::default(),
    };
    let s = &mut cfg.scenario;
    if let Some(n) = args.grid_n {
        s.n = n;
    }
    if let Some(d) = args.dg {
        s.d_g = d;
    }
    if let Some(r) = args.enb_rf {
        s.enb_rf = r;
    }
    if let Some(r) = args.mmbs_rf {
        s.mmbs_rf = r;
    }
    if let Some(u) = args.ues_per_mmbs {
        s.ues_per_mmbs = u;
    }
    s.validate()?;
    cfg.channel.validate()?;
    Ok(cfg)
}

fn validate(args: &RunArgs) -> Result<()> {
    if args.trials == 0 {
        bail!("--trials must be at least 1");
    }
    let needs_ec = matches!(args.algo, Algo::Ec | Algo::All);
    if needs_ec && args.granularity.is_empty() {
        bail!("at least one --granularity is needed for EC");
    }
    for &g in &args.granularity {
        EcConfig::new(g).with_context(|| format!("--granularity {g}"))?;
    }
    Ok(())
}

struct Timer {
    start: Instant,
    enabled: bool,
}

impl Timer {
    fn start(enabled: bool) -> Self {
        Timer { start: Instant::now(), enabled }
    }

    fn ms(&self) -> f64 {
        if self.enabled {
            self.start.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        }
    }
}

fn run_trial(cfg: &ScenarioConfig, args: &RunArgs, trial: usize) -> Vec<Record> {
    let mut scn = cfg.scenario.clone();
    scn.seed = args.seed.wrapping_add(trial as u64);
    let base = Record {
        trial,
        seed: scn.seed,
        n: scn.n,
        enb_rf: scn.enb_rf,
        mmbs_rf: scn.mmbs_rf,
        ues_per_mmbs: scn.ues_per_mmbs,
        algo: Algo::Opt,
        t_g: None,
        theta: None,
        network_tput: None,
        max_tput_baseline: None,
        slots: None,
        kappa: None,
        max_degree: None,
        theta_relaxed: None,
        runtime_ms: 0.0,
        error: None,
    };
    let net = match generate_grid(&scn, &cfg.channel) {
        Ok(net) => net,
        Err(e) => return vec![Record { error: Some(e.to_string()), ..base }],
    };
    let baseline = max_tput_baseline(&net).ok();
    let base = Record { max_tput_baseline: baseline, ..base };
    let timing = !args.no_timing;
    let mut out = Vec::new();

    if matches!(args.algo, Algo::Opt | Algo::All) {
        out.push(run_opt(&net, Record { algo: Algo::Opt, ..base.clone() }, timing));
    }
    if matches!(args.algo, Algo::Ec | Algo::All) {
        for &tg in &args.granularity {
            out.push(run_ec(&net, tg, Record { algo: Algo::Ec, t_g: Some(tg), ..base.clone() }, timing));
        }
    }
    if matches!(args.algo, Algo::MaxTput | Algo::All) {
        let timer = Timer::start(timing);
        let tput = max_tput_baseline(&net);
        let ms = timer.ms();
        out.push(match tput {
            Ok(t) => Record {
                algo: Algo::MaxTput,
                network_tput: Some(t),
                slots: Some(1),
                runtime_ms: ms,
                ..base.clone()
            },
            Err(e) => Record { algo: Algo::MaxTput, error: Some(e.to_string()), ..base.clone() },
        });
    }
    out
}

fn run_opt(net: &Network, rec: Record, timing: bool) -> Record {
    let timer = Timer::start(timing);
    let res = solve(net).and_then(|sol| {
        let report = verify_schedule(&sol.expanded, &sol.schedule);
        match report.first() {
            Some(v) => Err(mmsched_core::Error::InvalidNetwork(format!("invalid schedule: {v}"))),
            None => Ok(sol),
        }
    });
    let ms = timer.ms();
    match res {
        Ok(sol) => Record {
            theta: Some(sol.theta),
            network_tput: Some(sol.network_throughput),
            slots: Some(sol.schedule.active_slots()),
            runtime_ms: ms,
            ..rec
        },
        Err(e) => Record { error: Some(e.to_string()), runtime_ms: ms, ..rec },
    }
}

fn run_ec(net: &Network, tg: f64, rec: Record, timing: bool) -> Record {
    let timer = Timer::start(timing);
    let res = EcConfig::for_network(net, tg).and_then(|cfg| solve_ec(net, &cfg));
    let ms = timer.ms();
    match res {
        Ok(sol) => Record {
            theta: Some(sol.metrics.realized_theta),
            network_tput: Some(sol.metrics.network_throughput),
            slots: Some(sol.schedule().active_slots()),
            kappa: Some(sol.metrics.kappa),
            max_degree: Some(sol.metrics.max_degree),
            theta_relaxed: Some(sol.metrics.theta_relaxed),
            runtime_ms: ms,
            ..rec
        },
        Err(e) => Record { error: Some(e.to_string()), runtime_ms: ms, ..rec },
    }
}

/// Runs every trial, in parallel, and returns records ordered by trial and
/// then by algorithm (opt, ec per granularity in flag order, max-tput).
pub fn run_records(args: &RunArgs) -> Result<(ScenarioConfig, Vec<Record>)> {
    validate(args)?;
    let cfg = scenario_config(args)?;
    let records = (0..args.trials)
        .into_par_iter()
        .map(|t| run_trial(&cfg, args, t))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    Ok((cfg, records))
}

/// Ordering checks for `--algo all`: EC never beats the optimum and the
/// optimum never beats the throughput-only baseline. Returns one message
/// per violated trial.
pub fn ordering_violations(records: &[Record]) -> Vec<String> {
    let mut msgs = Vec::new();
    let mut i = 0;
    while i < records.len() {
        let trial = records[i].trial;
        let group: Vec<&Record> = records[i..].iter().take_while(|r| r.trial == trial).collect();
        i += group.len();
        let opt = group.iter().find(|r| r.algo == Algo::Opt).and_then(|r| r.theta.zip(r.network_tput));
        let Some((opt_theta, opt_tput)) = opt else { continue };
        for r in group.iter().filter(|r| r.algo == Algo::Ec) {
            if let Some(th) = r.theta {
                if th > opt_theta * (1.0 + 1e-6) {
                    msgs.push(format!("trial {trial}: EC theta {th} above optimum {opt_theta}"));
                }
            }
        }
        if let Some(base) = group.first().and_then(|r| r.max_tput_baseline) {
            if opt_tput > base * (1.0 + 1e-9) + 1e-9 {
                msgs.push(format!("trial {trial}: optimal throughput {opt_tput} above baseline {base}"));
            }
        }
    }
    msgs
}

fn fmt_opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

fn algo_name(a: Algo) -> &'static str {
    match a {
        Algo::Opt => "opt",
        Algo::Ec => "ec",
        Algo::MaxTput => "max-tput",
        Algo::All => "all",
    }
}

pub fn write_csv<W: Write>(w: W, records: &[Record]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(CSV_COLUMNS)?;
    for r in records {
        wr.write_record([
            r.trial.to_string(),
            r.seed.to_string(),
            r.n.to_string(),
            r.enb_rf.to_string(),
            r.mmbs_rf.to_string(),
            r.ues_per_mmbs.to_string(),
            algo_name(r.algo).to_string(),
            fmt_opt(&r.t_g),
            fmt_opt(&r.theta),
            fmt_opt(&r.network_tput),
            fmt_opt(&r.max_tput_baseline),
            fmt_opt(&r.slots),
            fmt_opt(&r.kappa),
            fmt_opt(&r.max_degree),
            fmt_opt(&r.theta_relaxed),
            r.runtime_ms.to_string(),
            fmt_opt(&r.error),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(mut w: W, cfg: &ScenarioConfig, records: &[Record]) -> Result<()> {
    let out = JsonOutput { schema_version: SCHEMA_VERSION, config: cfg.clone(), records: records.to_vec() };
    serde_json::to_writer_pretty(&mut w, &out)?;
    writeln!(w)?;
    Ok(())
}

/// Runs the experiment and writes the results in the requested format.
pub fn run<W: Write>(args: &RunArgs, w: W) -> Result<Vec<Record>> {
    let (cfg, records) = run_records(args)?;
    match args.out {
        OutFormat::Csv => write_csv(w, &records)?,
        OutFormat::Json => write_json(w, &cfg, &records)?,
    }
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolveAlgo {
    Opt,
    Ec,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// Network JSON file
    #[arg(long)]
    pub network: PathBuf,
    #[arg(long, value_enum, default_value_t = SolveAlgo::Opt)]
    pub algo: SolveAlgo,
    #[arg(long, default_value_t = 0.01)]
    pub granularity: f64,
}

/// Solves one network and returns its schedule and metrics as JSON.
pub fn solve_network(args: &SolveArgs) -> Result<serde_json::Value> {
    let text = std::fs::read_to_string(&args.network).with_context(|| format!("reading {}", args.network.display()))?;
    let net = Network::from_json(&text).with_context(|| format!("parsing {}", args.network.display()))?;
    Ok(match args.algo {
        SolveAlgo::Opt => {
            let sol = solve(&net)?;
            serde_json::json!({
                "schema_version": SCHEMA_VERSION,
                "algo": "opt",
                "theta": sol.theta,
                "network_tput": sol.network_throughput,
                "throughput": sol.throughput,
                "expanded": sol.expanded,
                "schedule": sol.schedule,
                "log": sol.log,
            })
        }
        SolveAlgo::Ec => {
            let cfg = EcConfig::for_network(&net, args.granularity)?;
            let sol = solve_ec(&net, &cfg)?;
            serde_json::json!({
                "schema_version": SCHEMA_VERSION,
                "algo": "ec",
                "theta": sol.metrics.realized_theta,
                "network_tput": sol.metrics.network_throughput,
                "throughput": sol.throughput,
                "expanded": sol.expanded(),
                "schedule": sol.schedule(),
                "metrics": sol.metrics,
                "structure": sol.structure,
            })
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RunArgs {
        RunArgs { grid_n: Some(2), trials: 2, no_timing: true, ..RunArgs::default() }
    }

    #[test]
    fn all_rows_in_order() {
        let args = RunArgs { granularity: vec![0.1, 0.01], ..small() };
        let (_, recs) = run_records(&args).unwrap();
        let algos: Vec<Algo> = recs.iter().map(|r| r.algo).collect();
        assert_eq!(algos, [Algo::Opt, Algo::Ec, Algo::Ec, Algo::MaxTput].repeat(2));
        assert_eq!(recs[1].t_g, Some(0.1));
        assert!(ordering_violations(&recs).is_empty());
        assert!(recs.iter().all(|r| r.error.is_none()));
    }

    #[test]
    fn csv_header_and_rows() {
        let mut buf = Vec::new();
        run(&RunArgs { algo: Algo::Opt, ..small() }, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn bad_granularity_rejected() {
        assert!(run_records(&RunArgs { granularity: vec![0.0], ..small() }).is_err());
        assert!(run_records(&RunArgs { grid_n: Some(1), ..small() }).is_err());
        assert!(run_records(&RunArgs { trials: 0, ..small() }).is_err());
    }

    #[test]
    fn flags_override_params() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.json");
        let mut cfg = ScenarioConfig::default();
        cfg.scenario.n = 3;
        cfg.scenario.enb_rf = 2;
        std::fs::write(&path, cfg.to_json()).unwrap();
        let got = scenario_config(&RunArgs { params: Some(path), enb_rf: Some(4), ..RunArgs::default() }).unwrap();
        assert_eq!(got.scenario.n, 3);
        assert_eq!(got.scenario.enb_rf, 4);
    }
}
