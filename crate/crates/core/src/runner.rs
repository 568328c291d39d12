//! Experiment orchestration: runs one subcommand on a validated spec and
//! writes its report files.
//!
//! Every subcommand writes `<name>.json` holding the header, a summary and,
//! with `Format::Json`, all tables. With `Format::Csv` each table goes to
//! `<name>_<table>.csv` instead, preceded by a `#` comment line carrying the
//! header fields. Files never contain timings, so reruns with the same spec
//! and seed are byte-identical for any worker count.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Value};

use crate::circle::CirclePoint;
use crate::clt::{self, Centering, StartMode};
use crate::config::{SystemSpec, VALIDATION_GRID};
use crate::coupling::{self, PairingParams, Side};
use crate::diagnostics::{self, ContractionCertificate, ProfileOptions};
use crate::error::{IfsError, Result};
use crate::ifs::{Ifs, StationaryOptions};
use crate::measure::{max_gap, w1_circle, EmpiricalMeasure};
use crate::observable::Observable;
use crate::rng::Streams;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subcommand {
    Validate,
    Simulate,
    Stationary,
    Dual,
    Eprop,
    Sync,
    Stability,
    Unique,
    Mw,
    Clt,
    Couple,
}

impl Subcommand {
    pub const ALL: [Subcommand; 11] = [
        Subcommand::Validate,
        Subcommand::Simulate,
        Subcommand::Stationary,
        Subcommand::Dual,
        Subcommand::Eprop,
        Subcommand::Sync,
        Subcommand::Stability,
        Subcommand::Unique,
        Subcommand::Mw,
        Subcommand::Clt,
        Subcommand::Couple,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Validate => "validate",
            Subcommand::Simulate => "simulate",
            Subcommand::Stationary => "stationary",
            Subcommand::Dual => "dual",
            Subcommand::Eprop => "eprop",
            Subcommand::Sync => "sync",
            Subcommand::Stability => "stability",
            Subcommand::Unique => "unique",
            Subcommand::Mw => "mw",
            Subcommand::Clt => "clt",
            Subcommand::Couple => "couple",
        }
    }
}

impl FromStr for Subcommand {
    type Err = IfsError;
    fn from_str(s: &str) -> Result<Self> {
        Subcommand::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| IfsError::Invalid(format!("unknown subcommand {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = IfsError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(IfsError::Invalid(format!("unknown format {s:?} (expected csv or json)"))),
        }
    }
}

/// Files written by a run and whether its scientific checks held.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    /// Failed checks; empty when every verdict passed.
    pub failures: Vec<String>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            0
        } else {
            2
        }
    }
}

/// 0 on success, 2 on a failed verdict, 1 on an operational error.
pub fn exit_code(result: &Result<RunOutcome>) -> i32 {
    match result {
        Ok(o) => o.exit_code(),
        Err(IfsError::NoContractionFound | IfsError::NotReached { .. }) => 2,
        Err(_) => 1,
    }
}

struct Table {
    name: &'static str,
    rows: Vec<serde_json::Map<String, Value>>,
}

impl Table {
    fn new<T: Serialize>(name: &'static str, rows: &[T]) -> Self {
        let rows = rows
            .iter()
            .map(|r| match serde_json::to_value(r).expect("rows serialize") {
                Value::Object(m) => m,
                other => panic!("table row is not a record: {other}"),
            })
            .collect();
        Table { name, rows }
    }
}

#[derive(Default)]
struct Report {
    summary: serde_json::Map<String, Value>,
    tables: Vec<Table>,
    failures: Vec<String>,
}

impl Report {
    fn set<T: Serialize>(&mut self, key: &str, value: T) {
        self.summary.insert(key.to_string(), serde_json::to_value(value).expect("summary serializes"));
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }
}

#[derive(Serialize)]
struct Header<'a> {
    schema_version: u32,
    tool: &'static str,
    version: &'static str,
    subcommand: &'a str,
    spec_sha256: &'a str,
    seed: u64,
}

/// Runs `sub` with the current rayon pool.
pub fn run(sub: Subcommand, spec: &SystemSpec, out_dir: &Path, format: Format, seed: u64) -> Result<RunOutcome> {
    spec.validate()?;
    let streams = Streams::new(seed).derive_named(sub.name());
    let report = match sub {
        Subcommand::Validate => validate(spec)?,
        Subcommand::Simulate => simulate(spec, &streams)?,
        Subcommand::Stationary => stationary(spec, &streams)?,
        Subcommand::Dual => dual(spec, &streams)?,
        Subcommand::Eprop => eprop(spec, &streams)?,
        Subcommand::Sync => sync(spec, seed)?,
        Subcommand::Stability => stability(spec, &streams)?,
        Subcommand::Unique => unique(spec, &streams)?,
        Subcommand::Mw => mw(spec, &streams)?,
        Subcommand::Clt => clt_cmd(spec, &streams)?,
        Subcommand::Couple => couple(spec, seed, &streams)?,
    };
    write_report(sub, spec, seed, format, out_dir, report)
}

/// Runs `sub` on a dedicated pool of `workers` threads (all cores if `None`).
pub fn run_with_workers(
    sub: Subcommand,
    spec: &SystemSpec,
    out_dir: &Path,
    format: Format,
    seed: u64,
    workers: Option<usize>,
) -> Result<RunOutcome> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(IfsError::Invalid("--workers must be positive".into()));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| IfsError::Invalid(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run(sub, spec, out_dir, format, seed))
}

fn write_report(sub: Subcommand, spec: &SystemSpec, seed: u64, format: Format, out_dir: &Path, report: Report) -> Result<RunOutcome> {
    fs::create_dir_all(out_dir)?;
    let hash = spec.hash();
    let header = Header { schema_version: SCHEMA_VERSION, tool: "ifslab", version: TOOL_VERSION, subcommand: sub.name(), spec_sha256: &hash, seed };
    let mut doc = match serde_json::to_value(&header)? {
        Value::Object(m) => m,
        _ => unreachable!(),
    };
    doc.insert("summary".into(), Value::Object(report.summary));
    doc.insert("failures".into(), json!(report.failures));
    let mut files = Vec::new();
    match format {
        Format::Json => {
            let tables: serde_json::Map<String, Value> = report
                .tables
                .into_iter()
                .map(|t| (t.name.to_string(), Value::Array(t.rows.into_iter().map(Value::Object).collect())))
                .collect();
            doc.insert("tables".into(), Value::Object(tables));
        }
        Format::Csv => {
            let comment = format!(
                "# tool=ifslab version={TOOL_VERSION} schema_version={SCHEMA_VERSION} subcommand={} spec_sha256={hash} seed={seed}\n",
                sub.name()
            );
            for t in &report.tables {
                let path = out_dir.join(format!("{}_{}.csv", sub.name(), t.name));
                fs::write(&path, csv_bytes(&comment, t)?)?;
                files.push(path);
            }
        }
    }
    let path = out_dir.join(format!("{}.json", sub.name()));
    let mut text = serde_json::to_string_pretty(&Value::Object(doc))?;
    text.push('\n');
    fs::write(&path, text)?;
    files.insert(0, path);
    Ok(RunOutcome { files, failures: report.failures })
}

fn csv_bytes(comment: &str, t: &Table) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(comment.as_bytes().to_vec());
    if let Some(first) = t.rows.first() {
        w.write_record(first.keys())?;
    }
    for row in &t.rows {
        w.write_record(row.values().map(|v| match v {
            Value::Null => String::new(),
            Value::String(s) => s.clone(),
            other => other.to_string(),
        }))?;
    }
    w.into_inner().map_err(|e| IfsError::Io(e.into_error()))
}

// --- subcommands ---------------------------------------------------------

fn validate(spec: &SystemSpec) -> Result<Report> {
    #[derive(Serialize)]
    struct MapRow {
        map: usize,
        passed: bool,
        grid_n: usize,
        monotonicity_margin: f64,
        degree_error: f64,
    }
    #[derive(Serialize)]
    struct ObsRow {
        observable: usize,
        lipschitz: f64,
        sup_norm: f64,
    }
    let ifs = spec.build_ifs()?;
    let mut maps = Vec::new();
    for (i, m) in spec.maps.iter().enumerate() {
        let r = m.build()?.validate(VALIDATION_GRID);
        maps.push(MapRow { map: i, passed: r.passed, grid_n: r.grid_n, monotonicity_margin: r.monotonicity_margin, degree_error: r.degree_error });
    }
    let obs = (0..spec.observables.len())
        .map(|i| spec.observable(i).map(|o| ObsRow { observable: i, lipschitz: o.lipschitz, sup_norm: o.sup_norm() }))
        .collect::<Result<Vec<_>>>()?;
    let mut r = Report::default();
    r.set("k", ifs.k());
    r.set("equal_weight", ifs.is_equal_weight());
    r.set("all_rotations", ifs.all_rotations());
    r.set("config", spec);
    r.tables.push(Table::new("maps", &maps));
    r.tables.push(Table::new("observables", &obs));
    Ok(r)
}

fn simulate(spec: &SystemSpec, streams: &Streams) -> Result<Report> {
    #[derive(Serialize)]
    struct Row {
        path: usize,
        t: usize,
        x: f64,
    }
    let ifs = spec.build_ifs()?;
    let p = &spec.simulate;
    let mut rows = Vec::with_capacity(p.paths * (p.n + 1));
    for path in 0..p.paths {
        let traj = ifs.simulate_chain(spec.x0(), p.n, &mut streams.stream(path as u64));
        rows.extend(traj.into_iter().enumerate().map(|(t, x)| Row { path, t, x: x.value() }));
    }
    let mut r = Report::default();
    r.set("paths", p.paths);
    r.set("n", p.n);
    r.set("x0", spec.x0);
    r.tables.push(Table::new("trajectory", &rows));
    Ok(r)
}

fn stationary_measure(ifs: &Ifs, spec: &SystemSpec, streams: &Streams) -> Result<EmpiricalMeasure> {
    let p = &spec.stationary;
    let opts = StationaryOptions { x0: spec.x0(), burn_in: p.burn_in, count: p.count, thinning: p.thinning, chains: p.chains };
    ifs.stationary_sample(&opts, streams)
}

fn stationary(spec: &SystemSpec, streams: &Streams) -> Result<Report> {
    #[derive(Serialize)]
    struct Atom {
        position: f64,
        weight: f64,
    }
    let ifs = spec.build_ifs()?;
    let mu = stationary_measure(&ifs, spec, streams)?;
    let pushed = ifs.markov_push(&mu, spec.budgets.atom_cap)?;
    let (gap, arc) = max_gap(&mu);
    let means = (0..spec.observables.len()).map(|i| spec.observable(i).map(|o| mu.integrate(&o))).collect::<Result<Vec<_>>>()?;
    let mut r = Report::default();
    r.set("samples", mu.len());
    r.set("invariance_residual_w1", w1_circle(&mu, &pushed));
    r.set("max_gap", gap);
    r.set("max_gap_arc", arc);
    r.set("observable_means", means);
    let atoms: Vec<Atom> = mu.atoms().iter().map(|&(x, w)| Atom { position: x.value(), weight: w }).collect();
    r.tables.push(Table::new("measure", &atoms));
    Ok(r)
}

fn dual(spec: &SystemSpec, streams: &Streams) -> Result<Report> {
    #[derive(Serialize)]
    struct Row {
        x: f64,
        n: usize,
        value: f64,
        stderr: f64,
    }
    let ifs = spec.build_ifs()?;
    let p = &spec.dual;
    let f = spec.observable(p.observable)?;
    let mut rows = Vec::new();
    for (i, &xv) in p.points.iter().enumerate() {
        let x = CirclePoint::new(xv);
        match p.mode {
            diagnostics::DualMode::Exact => {
                let levels = ifs.dual_levels(&f, x, p.n, spec.budgets.node_budget)?;
                rows.extend(levels.into_iter().enumerate().map(|(n, value)| Row { x: xv, n, value, stderr: 0.0 }));
            }
            diagnostics::DualMode::Mc => {
                let s = streams.derive(i as u64);
                for n in 0..=p.n {
                    let e = ifs.dual_mc(&f, x, n, p.samples, &s.derive(n as u64));
                    rows.push(Row { x: xv, n, value: e.estimate, stderr: e.stderr });
                }
            }
        }
    }
    let mut r = Report::default();
    r.set("mode", p.mode);
    r.set("observable", p.observable);
    r.tables.push(Table::new("levels", &rows));
    Ok(r)
}

fn eprop(spec: &SystemSpec, streams: &Streams) -> Result<Report> {
    #[derive(Serialize)]
    struct Row {
        delta: f64,
        e_value: f64,
        e_argmax_n: usize,
        cesaro_value: f64,
        cesaro_argmax_n: usize,
        lipschitz_bound: f64,
    }
    let ifs = spec.build_ifs()?;
    let p = &spec.eprop;
    let f = spec.observable(p.observable)?;
    let opts = ProfileOptions { n_max: p.n_max, mode: p.mode, samples: p.samples, node_budget: spec.budgets.node_budget };
    let x = CirclePoint::new(p.x);
    let e = diagnostics::e_property_profile(&ifs, &f, x, &p.deltas, &opts, &streams.derive_named("e"))?;
    let c = diagnostics::cesaro_profile(&ifs, &f, x, &p.deltas, &opts, &streams.derive_named("cesaro"))?;
    let rows: Vec<Row> = e
        .iter()
        .zip(&c)
        .map(|(e, c)| Row {
            delta: e.delta,
            e_value: e.value,
            e_argmax_n: e.argmax_n,
            cesaro_value: c.value,
            cesaro_argmax_n: c.argmax_n,
            lipschitz_bound: f.lipschitz * e.delta,
        })
        .collect();
    let mut r = Report::default();
    r.set("x", p.x);
    r.set("n_max", p.n_max);
    r.set("mode", p.mode);
    r.tables.push(Table::new("profile", &rows));
    Ok(r)
}

fn certificate(ifs: &Ifs, spec: &SystemSpec, seed: u64) -> Result<(ContractionCertificate, Vec<diagnostics::ArcScore>)> {
    let p = &spec.sync;
    let arcs = diagnostics::default_candidate_arcs(p.arcs, p.arc_length);
    diagnostics::certify_synchronization(ifs, &arcs, p.depth, p.trials, p.m_max, p.x_grid, spec.budgets.node_budget, seed)
}

fn sync(spec: &SystemSpec, seed: u64) -> Result<Report> {
    let ifs = spec.build_ifs()?;
    let p = &spec.sync;
    let mut r = Report::default();
    let min = diagnostics::minimality_evidence(&ifs, spec.x0(), p.minimality_depth, p.minimality_eps, p.minimality_points, &Streams::new(seed).derive_named("minimality"));
    r.check(min.verdict, format!("orbit max gap {} is not below {}", min.max_gap, min.eps));
    r.set("minimality", &min);
    match certificate(&ifs, spec, seed) {
        Ok((cert, scores)) => {
            r.check(cert.q_upper < 1.0, "q_hat confidence interval reaches 1");
            r.check(cert.mass_hat.lower > 0.0, "mass_hat confidence interval reaches 0");
            r.set("certificate", &cert);
            r.tables.push(Table::new("arcs", &scores));
        }
        Err(e @ (IfsError::NoContractionFound | IfsError::NotReached { .. })) => {
            r.set("certificate", Value::Null);
            r.set("error", e.to_string());
            r.set("remediation", e.remediation());
            r.failures.push(e.to_string());
        }
        Err(e) => return Err(e),
    }
    Ok(r)
}

fn stability(spec: &SystemSpec, streams: &Streams) -> Result<Report> {
    #[derive(Serialize)]
    struct Row {
        n: usize,
        w1: f64,
        noise_floor: f64,
    }
    let ifs = spec.build_ifs()?;
    let p = &spec.stability;
    let (x, y) = (CirclePoint::new(p.x), CirclePoint::new(p.y));
    let gap = diagnostics::stability_gap(&ifs, x, y, &p.n_list, p.samples, &streams.derive_named("gap"))?;
    let floor = diagnostics::stability_noise_floor(&ifs, x, &p.n_list, p.samples, &streams.derive_named("floor"));
    let rows: Vec<Row> = gap.iter().zip(&floor).map(|(g, f)| Row { n: g.n, w1: g.w1, noise_floor: f.w1 }).collect();
    let mut r = Report::default();
    r.set("x", p.x);
    r.set("y", p.y);
    r.set("samples", p.samples);
    r.tables.push(Table::new("gap", &rows));
    Ok(r)
}

fn unique(spec: &SystemSpec, streams: &Streams) -> Result<Report> {
    #[derive(Serialize)]
    struct Row {
        i: usize,
        j: usize,
        start_i: f64,
        start_j: f64,
        w1: f64,
    }
    let ifs = spec.build_ifs()?;
    let p = &spec.unique;
    let starts: Vec<CirclePoint> = p.starts.iter().map(|&s| CirclePoint::new(s)).collect();
    let u = diagnostics::uniqueness_evidence(&ifs, &starts, p.n, streams)?;
    let rows: Vec<Row> = u.pairs.iter().map(|&(i, j, w1)| Row { i, j, start_i: p.starts[i], start_j: p.starts[j], w1 }).collect();
    let mut r = Report::default();
    r.set("max_w1", u.max_w1);
    r.set("n", u.n);
    r.set("burn_in", u.burn_in);
    r.tables.push(Table::new("pairs", &rows));
    Ok(r)
}

/// `count` start points at evenly spaced ranks of a stationary sample.
fn stationary_quantiles(mu: &EmpiricalMeasure, count: usize) -> Vec<CirclePoint> {
    let step = (mu.len() / count).max(1);
    mu.atoms().iter().step_by(step).take(count).map(|a| a.0).collect()
}

fn mw(spec: &SystemSpec, streams: &Streams) -> Result<Report> {
    #[derive(Serialize)]
    struct Row {
        n: usize,
        a_n: f64,
        partial_series: f64,
        uniform_sum_gap: f64,
    }
    let ifs = spec.build_ifs()?;
    let p = &spec.mw;
    let f = spec.observable(p.observable)?;
    let sample = clt::centering_sample(&ifs, spec.x0(), p.centering_count, spec.stationary.burn_in, &streams.derive_named("centering"))?;
    let centered = clt::center_observable(&f, &sample);
    let xs = stationary_quantiles(&sample, p.x_count);
    let report = clt::mw_statistic(&ifs, &centered, &p.n_list, &xs, p.mode, spec.budgets.node_budget, p.mc_samples, &streams.derive_named("mw"))?;
    let gaps = clt::uniform_sum_gap(&ifs, &centered, CirclePoint::new(p.pair[0]), CirclePoint::new(p.pair[1]), &p.n_list, spec.budgets.node_budget)?;
    let gap_values: Vec<f64> = gaps.iter().map(|g| g.gap).collect();
    let rows: Vec<Row> = (0..p.n_list.len())
        .map(|i| Row { n: p.n_list[i], a_n: report.a_n[i], partial_series: report.partial_series[i], uniform_sum_gap: gap_values[i] })
        .collect();
    let mut r = Report::default();
    r.set("centering_offset", centered.offset);
    r.set("beta_growth_hat", report.beta_growth_hat);
    r.set("sum_gap_growth_hat", clt::growth_exponent(&p.n_list, &gap_values));
    r.set("tail_fraction", report.tail_fraction());
    r.set("x_sample_count", report.x_sample_count);
    r.set("mode", report.mode);
    r.set("pair", p.pair);
    r.tables.push(Table::new("growth", &rows));
    Ok(r)
}

/// Centres `f` with two independent stationary samples.
pub fn centering(ifs: &Ifs, f: &Observable, x0: CirclePoint, count: usize, burn_in: usize, streams: &Streams) -> Result<Centering> {
    let a = clt::centering_sample(ifs, x0, count, burn_in, &streams.derive_named("a"))?;
    let b = clt::centering_sample(ifs, x0, count, burn_in, &streams.derive_named("b"))?;
    Ok(clt::center_with_error(f, &a, &b))
}

fn clt_cmd(spec: &SystemSpec, streams: &Streams) -> Result<Report> {
    #[derive(Serialize)]
    struct Row {
        n: usize,
        start_mode: &'static str,
        start_x: Option<f64>,
        replicates: usize,
        sigma2_hat: Option<f64>,
        sigma2_ci_half_width: Option<f64>,
        sample_mean: Option<f64>,
        ks_stat: Option<f64>,
        p_value: Option<f64>,
        status: String,
    }
    let ifs = spec.build_ifs()?;
    let p = &spec.clt;
    let f = spec.observable(p.observable)?;
    let c = centering(&ifs, &f, spec.x0(), p.centering_count, p.burn_in, &streams.derive_named("centering"))?;
    let stationary = StartMode::Stationary { x0: spec.x0(), burn_in: p.burn_in };
    let fixed = StartMode::Fixed { x: CirclePoint::new(p.fixed_x) };
    let mut rows = Vec::new();
    for &n in &p.n_list {
        for start in [stationary, fixed] {
            let res = clt::clt_report(&ifs, &c.observable, n, p.replicates, start, c.centering_error, &streams.derive(n as u64));
            rows.push(match res {
                Ok(rep) => Row {
                    n,
                    start_mode: start.label(),
                    start_x: rep.start_x,
                    replicates: rep.replicates,
                    sigma2_hat: Some(rep.sigma2_hat),
                    sigma2_ci_half_width: Some(rep.sigma2_ci_half_width),
                    sample_mean: Some(rep.sample_mean),
                    ks_stat: Some(rep.ks_stat),
                    p_value: Some(rep.p_value),
                    status: "ok".into(),
                },
                Err(e @ IfsError::DegenerateSample { .. }) => Row {
                    n,
                    start_mode: start.label(),
                    start_x: match start {
                        StartMode::Fixed { x } => Some(x.value()),
                        StartMode::Stationary { .. } => None,
                    },
                    replicates: p.replicates,
                    sigma2_hat: None,
                    sigma2_ci_half_width: None,
                    sample_mean: None,
                    ks_stat: None,
                    p_value: None,
                    status: e.to_string(),
                },
                Err(e) => return Err(e),
            });
        }
    }
    // consecutive sum lengths agree within their combined 95% half-widths
    let stat_rows: Vec<&Row> = rows.iter().filter(|r| r.start_mode == "stationary").collect();
    let sigma2_stable = stat_rows.windows(2).all(|w| match (w[0].sigma2_hat, w[1].sigma2_hat, w[0].sigma2_ci_half_width, w[1].sigma2_ci_half_width) {
        (Some(a), Some(b), Some(ha), Some(hb)) => (a - b).abs() < ha + hb,
        _ => false,
    });
    let charfn = if p.charfn_n_list.is_empty() {
        Vec::new()
    } else {
        match clt::charfn_gap(&ifs, &c.observable, CirclePoint::new(p.fixed_x), stationary, &p.charfn_n_list, &p.t_list, p.replicates, &streams.derive_named("charfn")) {
            Ok(rows) => rows,
            Err(IfsError::DegenerateSample { .. }) => Vec::new(),
            Err(e) => return Err(e),
        }
    };
    let mut r = Report::default();
    r.set("centering_offset", c.offset);
    r.set("centering_error", c.centering_error);
    r.set("sigma2_stable", sigma2_stable);
    r.tables.push(Table::new("normality", &rows));
    r.tables.push(Table::new("charfn", &charfn));
    Ok(r)
}

fn couple(spec: &SystemSpec, seed: u64, streams: &Streams) -> Result<Report> {
    #[derive(Serialize)]
    struct Summary {
        transcripts: usize,
        coupled: usize,
        p3_violations: usize,
        p3_worst_ratio: f64,
        p5_violations: usize,
        alpha_hat: f64,
        chi_square_omega: coupling::ChiSquareResult,
        chi_square_partner: coupling::ChiSquareResult,
        paired_gap_slope: f64,
    }
    let base = spec.build_ifs()?;
    let ifs = if base.is_equal_weight() {
        base
    } else {
        let d = spec
            .denominators
            .as_ref()
            .ok_or_else(|| IfsError::Validation("couple needs equal weights or `denominators` for uniformization".into()))?;
        base.uniformize(d)?
    };
    let p = &spec.couple;
    let mut r = Report::default();
    let cert = match certificate(&ifs, spec, seed) {
        Ok((cert, _)) => cert,
        Err(e @ (IfsError::NoContractionFound | IfsError::NotReached { .. })) => {
            r.set("certificate", Value::Null);
            r.set("error", e.to_string());
            r.set("remediation", e.remediation());
            r.failures.push(e.to_string());
            return Ok(r);
        }
        Err(e) => return Err(e),
    };
    let m = cert.m.expect("certified");
    let params = PairingParams { arc: cert.arc, m, n: p.n, q: cert.q_hat, tail_horizon: p.tail_horizon };
    let (x, y) = (CirclePoint::new(p.x), CirclePoint::new(p.y));
    let f = spec.observable(p.observable)?.lipschitz_normalized();
    let ts_streams = streams.derive_named("transcripts");
    let ts = coupling::pairing_transcripts(&ifs, x, y, &params, p.transcripts, &ts_streams)?;
    let mut p3_violations = 0;
    let mut worst: f64 = 0.0;
    for t in &ts {
        let c = coupling::verify_p3(t, &ifs, &f)?;
        p3_violations += usize::from(!c.ok);
        worst = worst.max(c.worst_ratio);
    }
    // the transcript of a shorter horizon must be a prefix of the full one
    let short = PairingParams { n: p.n / 2, ..params };
    let mut p5_violations = 0;
    for (i, t) in ts.iter().enumerate() {
        let s = coupling::pairing_sampler(&ifs, x, y, &short, &mut ts_streams.stream(i as u64))?;
        p5_violations += usize::from(!coupling::prefix_consistent(&s, t));
    }
    let alpha_hat = cert.hit_mass_hat.expect("certified") * cert.mass_hat.estimate;
    let survival = coupling::block_tail_stats(&ts, p.l_max, alpha_hat)?;
    let len = (2 * m).min(p.n);
    let chi = coupling::prefix_uniformity(&ts, ifs.k(), len, Side::Omega)?;
    let chi_partner = coupling::prefix_uniformity(&ts, ifs.k(), len, Side::Partner)?;
    let gaps = coupling::paired_sum_gap(&ifs, &f, x, y, &p.gap_n_list, p.gap_replicates, &params, &streams.derive_named("gap"))?;
    let lo = p.gap_n_list.iter().copied().filter(|&n| n >= 50).min().unwrap_or(0);
    let hi = p.gap_n_list.iter().copied().max().unwrap_or(0);
    r.check(p3_violations == 0, format!("{p3_violations} transcripts violate the block distance bound"));
    r.check(p5_violations == 0, format!("{p5_violations} transcripts are not prefix consistent"));
    r.check(survival.iter().all(|s| s.lower <= s.envelope), "block survival exceeds the geometric envelope");
    for (c, side) in [(&chi, "omega"), (&chi_partner, "partner")] {
        r.check(c.p_value > 1e-3, format!("first {len} {side} symbols fail the uniformity test (p = {})", c.p_value));
    }
    r.set("certificate", &cert);
    r.set("params", params);
    r.set(
        "coupling",
        Summary {
            transcripts: ts.len(),
            coupled: ts.iter().filter(|t| t.coupled).count(),
            p3_violations,
            p3_worst_ratio: worst,
            p5_violations,
            alpha_hat,
            chi_square_omega: chi,
            chi_square_partner: chi_partner,
            paired_gap_slope: coupling::paired_gap_slope(&gaps, lo, hi),
        },
    );
    r.set("sample_transcripts", &ts[..p.dump.min(ts.len())]);
    r.tables.push(Table::new("survival", &survival));
    r.tables.push(Table::new("paired_gap", &gaps));
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> SystemSpec {
        SystemSpec::from_json(
            r#"{"maps": [{"type": "arnold", "theta": 0.0, "eps": 0.9}, {"type": "arnold", "theta": 0.41421356, "eps": 0.5}],
                "probs": [0.5, 0.5],
                "stationary": {"count": 2000, "chains": 4},
                "simulate": {"n": 50, "paths": 2}}"#,
        )
        .unwrap()
    }

    #[test]
    fn subcommand_names_round_trip() {
        for c in Subcommand::ALL {
            assert_eq!(c.name().parse::<Subcommand>().unwrap(), c);
        }
        assert!("nope".parse::<Subcommand>().is_err());
    }

    #[test]
    fn csv_files_carry_the_header() {
        let dir = tempfile::tempdir().unwrap();
        let spec = small_spec();
        let out = run(Subcommand::Simulate, &spec, dir.path(), Format::Csv, 5).unwrap();
        assert_eq!(out.exit_code(), 0);
        let text = fs::read_to_string(dir.path().join("simulate_trajectory.csv")).unwrap();
        let mut lines = text.lines();
        let first = lines.next().unwrap();
        assert!(first.starts_with("# tool=ifslab") && first.contains(&spec.hash()) && first.ends_with("seed=5"));
        assert_eq!(lines.next().unwrap(), "path,t,x");
        assert_eq!(text.lines().count(), 2 + 2 * 51);
        let json: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("simulate.json")).unwrap()).unwrap();
        assert_eq!(json["schema_version"], SCHEMA_VERSION);
        assert_eq!(json["seed"], 5);
    }

    #[test]
    fn json_format_embeds_tables() {
        let dir = tempfile::tempdir().unwrap();
        let out = run(Subcommand::Stationary, &small_spec(), dir.path(), Format::Json, 1).unwrap();
        assert_eq!(out.files.len(), 1);
        let json: Value = serde_json::from_str(&fs::read_to_string(&out.files[0]).unwrap()).unwrap();
        assert_eq!(json["tables"]["measure"].as_array().unwrap().len(), json["summary"]["samples"].as_u64().unwrap() as usize);
        assert!(json["summary"]["invariance_residual_w1"].as_f64().unwrap() < 0.05);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Err(IfsError::NoContractionFound)), 2);
        assert_eq!(exit_code(&Err(IfsError::Validation("x".into()))), 1);
        assert_eq!(exit_code(&Ok(RunOutcome { files: vec![], failures: vec!["f".into()] })), 2);
    }
}
