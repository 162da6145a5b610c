//! The pipelines behind each CLI command and the run report.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use multiflow_core::boxmap::default_tau;
use multiflow_core::continuation::{
    continue_decomposition_in, semicontinuity_check, sweep_isolating_in, DecompositionStatus, SweepPlan, SweepReport,
};
use multiflow_core::dynamics::{decompose, default_k_max, invariant_part, is_isolating, restrict, IsolationCertificate};
use multiflow_core::{BoxMapGraph, BoxSet, ContinuationError, DynamicsError, Params, StepScheme};
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, SystemConfig};
use crate::export::{self, ExportError};
use crate::parallel::{build_graph_parallel, Rayon};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    BuildMap,
    Invariant,
    Isolate,
    Decompose,
    Sweep,
    Continue,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::BuildMap => "build-map",
            Command::Invariant => "invariant",
            Command::Isolate => "isolate",
            Command::Decompose => "decompose",
            Command::Sweep => "sweep",
            Command::Continue => "continue",
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("box map construction failed: {0}")]
    Build(#[from] multiflow_core::BoxMapError),
    #[error(transparent)]
    Continuation(ContinuationError),
    #[error(transparent)]
    Inclusion(#[from] multiflow_core::InclusionError),
    #[error("writing outputs: {0}")]
    Export(#[from] ExportError),
}

/// Command-line values that replace configuration fields.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub lambda: Option<f64>,
    pub tau: Option<f64>,
    pub grid: Option<Vec<usize>>,
}

impl Overrides {
    /// Applies the overrides. A `lambda` override also collapses the
    /// sample list to that single value.
    pub fn apply(&self, cfg: &mut SystemConfig) -> Result<(), ConfigError> {
        if let Some(l) = self.lambda {
            if !cfg.inclusion.lambda_range().contains(l) {
                return Err(ConfigError::Validation(format!("--lambda {l} lies outside lambda_range")));
            }
            cfg.run.lambda = l;
            cfg.run.samples = vec![l];
            cfg.run.anchor = None;
        }
        if let Some(t) = self.tau {
            if !(t > 0.0 && t.is_finite()) {
                return Err(ConfigError::Validation("--tau must be positive".into()));
            }
            cfg.tau = Some(t);
        }
        if let Some(g) = &self.grid {
            cfg.with_subdivisions(g.clone())?;
        }
        for name in cfg.sets.keys() {
            cfg.set(name)?;
        }
        Ok(())
    }
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeReport {
    FirstOrder,
    Centered { substeps: usize, subdivisions: usize },
}

#[derive(Debug, Serialize)]
pub struct GridReport {
    pub subdivisions: Vec<usize>,
    pub domain: Vec<[f64; 2]>,
    pub cells: usize,
}

#[derive(Debug, Serialize)]
pub struct GraphReport {
    pub lambda: [f64; 2],
    pub edges: usize,
    pub exit_cells: usize,
    pub edge_list: String,
    pub binary: String,
}

#[derive(Debug, Serialize)]
pub struct SetReport {
    pub name: String,
    pub cells: usize,
    pub file: String,
    pub table: String,
}

#[derive(Debug, Serialize)]
pub struct IsolationReport {
    pub neighborhood: String,
    pub passed: bool,
    pub invariant_cells: usize,
}

#[derive(Debug, Serialize)]
pub struct DecompositionReport {
    pub k_star: usize,
    pub attractor_cells: usize,
    pub repeller_cells: usize,
    pub connecting_cells: usize,
}

#[derive(Debug, Serialize)]
pub struct RecordReport {
    pub lambda: [f64; 2],
    pub isolation_n: bool,
    pub isolation_n_a: Option<bool>,
    pub isolation_n_r: Option<bool>,
    pub invariant_cells: usize,
    pub in_verified_run: bool,
    pub status: String,
    pub decomposition: Option<DecompositionReport>,
    pub invariant_file: String,
}

#[derive(Debug, Serialize)]
pub struct SweepSummary {
    pub anchor: usize,
    pub verified: Option<[f64; 2]>,
    pub semicontinuity: Option<bool>,
    pub slope: f64,
    pub table: String,
    pub text: String,
    pub records: Vec<RecordReport>,
}

/// Machine-readable results. Field order is the JSON key order; timings
/// are kept out so that reruns produce identical files.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub certified: bool,
    pub failure: Option<String>,
    pub grid: GridReport,
    pub tau: f64,
    pub scheme: SchemeReport,
    pub graph: Option<GraphReport>,
    pub isolation: Vec<IsolationReport>,
    pub decomposition: Option<DecompositionReport>,
    pub sweep: Option<SweepSummary>,
    pub sets: Vec<SetReport>,
}

/// Result of a command: the report, files to write, and a human summary.
pub struct Outcome {
    pub report: RunReport,
    pub files: Vec<(String, Vec<u8>)>,
    pub summary: String,
}

impl Outcome {
    /// Process exit code: 0 when every certificate passed, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.report.certified {
            0
        } else {
            2
        }
    }

    /// Writes every export plus `report.json` and `summary.txt` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), ExportError> {
        std::fs::create_dir_all(dir)?;
        for (name, bytes) in &self.files {
            std::fs::write(dir.join(name), bytes)?;
        }
        let json = serde_json::to_string_pretty(&self.report).map_err(|e| ExportError::Format(e.to_string()))?;
        std::fs::write(dir.join("report.json"), json + "\n")?;
        std::fs::write(dir.join("summary.txt"), &self.summary)?;
        Ok(())
    }
}

struct Ctx<'a> {
    cfg: &'a SystemConfig,
    tau: f64,
    files: Vec<(String, Vec<u8>)>,
    sets: Vec<SetReport>,
    summary: String,
    started: Instant,
}

impl Ctx<'_> {
    fn file(&mut self, name: String, bytes: Vec<u8>) -> String {
        self.files.push((name.clone(), bytes));
        name
    }

    fn export_set(&mut self, name: &str, set: &BoxSet) {
        let grid = &self.cfg.grid;
        let file = self.file(format!("{name}.cells"), export::boxset_text(grid, set).into_bytes());
        let table = self.file(format!("{name}.table"), export::boxset_table(grid, set).into_bytes());
        writeln!(self.summary, "{name}: {} cells ({file})", set.len()).unwrap();
        self.sets.push(SetReport {
            name: name.to_string(),
            cells: set.len(),
            file,
            table,
        });
    }

    fn graph(&mut self, params: Params) -> Result<(BoxMapGraph, GraphReport), RunError> {
        let t = Instant::now();
        let g = build_graph_parallel(&self.cfg.grid, &self.cfg.inclusion, params, self.tau, self.cfg.scheme)?;
        writeln!(
            self.summary,
            "box map at lambda {}: {} edges, {} exit cells, built in {:.2?}",
            params.lambda,
            g.edge_count(),
            g.flagged_cells().len(),
            t.elapsed()
        )
        .unwrap();
        let edge_list = self.file("graph.edges".into(), export::edge_list(&g).into_bytes());
        let binary = self.file("graph.bin".into(), export::graph_to_bytes(&g));
        let report = GraphReport {
            lambda: [params.lambda.lo(), params.lambda.hi()],
            edges: g.edge_count(),
            exit_cells: g.flagged_cells().len(),
            edge_list,
            binary,
        };
        Ok((g, report))
    }
}

fn isolation_report(name: &str, c: &IsolationCertificate) -> IsolationReport {
    IsolationReport {
        neighborhood: name.to_string(),
        passed: c.passed(),
        invariant_cells: c.invariant.len(),
    }
}

fn decomposition_report(d: &multiflow_core::ARDecomposition) -> DecompositionReport {
    DecompositionReport {
        k_star: d.k_star,
        attractor_cells: d.a.len(),
        repeller_cells: d.r.len(),
        connecting_cells: d.c.len(),
    }
}

fn is_certificate_failure(e: &DynamicsError) -> bool {
    matches!(
        e,
        DynamicsError::NoAttractor { .. } | DynamicsError::DecompositionInconsistent { .. } | DynamicsError::PreconditionViolated
    )
}

/// Executes `cmd` on the current rayon pool.
pub fn run(cfg: &SystemConfig, cmd: Command) -> Result<Outcome, RunError> {
    let samples = &cfg.run.samples;
    let family = match cmd {
        Command::Sweep | Command::Continue => Params::over(samples[0], *samples.last().unwrap())?,
        _ => Params::at(cfg.run.lambda)?,
    };
    let tau = match cfg.tau {
        Some(t) => t,
        None => default_tau(&cfg.grid, &cfg.inclusion, &family)?,
    };
    let mut ctx = Ctx {
        cfg,
        tau,
        files: Vec::new(),
        sets: Vec::new(),
        summary: String::new(),
        started: Instant::now(),
    };
    writeln!(ctx.summary, "command: {}", cmd.name()).unwrap();
    writeln!(ctx.summary, "grid: {:?} cells over {}, tau = {tau:?}", cfg.grid.subdivisions(), cfg.grid.domain()).unwrap();

    let full = BoxSet::full(cfg.grid.cell_count());
    let params = Params::at(cfg.run.lambda)?;
    let mut graph = None;
    let mut isolation = Vec::new();
    let mut decomposition = None;
    let mut sweep = None;
    let mut failure = None;

    match cmd {
        Command::BuildMap => {
            graph = Some(ctx.graph(params)?.1);
        }
        Command::Invariant => {
            let (g, gr) = ctx.graph(params)?;
            graph = Some(gr);
            let n = cfg.set_or("N", full)?;
            let s = invariant_part(&g, &n);
            ctx.export_set("S", &s);
        }
        Command::Isolate => {
            let (g, gr) = ctx.graph(params)?;
            graph = Some(gr);
            let mut sets = vec![("N", cfg.set_or("N", full.clone())?)];
            for name in ["N_A", "N_R"] {
                if cfg.sets.contains_key(name) {
                    sets.push((name, cfg.set(name)?));
                }
            }
            for (name, set) in sets {
                let cert = is_isolating(&g, &set);
                writeln!(ctx.summary, "isolation of {name}: {}", if cert.passed() { "pass" } else { "FAIL" }).unwrap();
                ctx.export_set(&format!("Inv_{name}"), &cert.invariant);
                isolation.push(isolation_report(name, &cert));
            }
            if isolation.iter().any(|c| !c.passed) {
                failure = Some("isolation certificate failed".to_string());
            }
        }
        Command::Decompose => {
            let u = cfg.set("U")?;
            let (g, gr) = ctx.graph(params)?;
            graph = Some(gr);
            let n = cfg.set_or("N", full)?;
            let s = invariant_part(&g, &n);
            ctx.export_set("S", &s);
            let rg = restrict(&g, &s);
            let k_max = cfg.run.k_max.unwrap_or_else(|| default_k_max(&rg));
            match decompose(&rg, &u, k_max) {
                Ok(d) => {
                    writeln!(ctx.summary, "attractor certified at k* = {}", d.k_star).unwrap();
                    ctx.export_set("A", &d.a);
                    ctx.export_set("R", &d.r);
                    ctx.export_set("C", &d.c);
                    decomposition = Some(decomposition_report(&d));
                }
                Err(e) if is_certificate_failure(&e) => {
                    writeln!(ctx.summary, "decomposition FAILED: {e}").unwrap();
                    failure = Some(e.to_string());
                }
                Err(e) => failure = Some(e.to_string()),
            }
        }
        Command::Sweep | Command::Continue => {
            let plan = SweepPlan {
                inclusion: &cfg.inclusion,
                grid: cfg.grid.clone(),
                tau,
                scheme: cfg.scheme,
                samples: samples.clone(),
                mode: cfg.run.mode,
                anchor: cfg.run.anchor,
                n: cfg.set_or("N", full)?,
                n_a: cfg.sets.contains_key("N_A").then(|| cfg.set("N_A")).transpose()?,
                n_r: cfg.sets.contains_key("N_R").then(|| cfg.set("N_R")).transpose()?,
            };
            let result = if cmd == Command::Sweep {
                sweep_isolating_in(&plan, &Rayon)
            } else {
                let u = cfg.set("U")?;
                continue_decomposition_in(&plan, &u, cfg.run.k_max, &Rayon)
            };
            match result {
                Ok(report) => {
                    let semi = (cmd == Command::Continue).then(|| semicontinuity_check(&cfg.grid, &report, cfg.run.slope));
                    let passed = report.all_passed() && semi != Some(false);
                    if !passed {
                        failure = Some(sweep_failure(&report, semi));
                    }
                    sweep = Some(sweep_summary(&mut ctx, &report, semi));
                }
                Err(ContinuationError::AnchorFailure(e)) => {
                    writeln!(ctx.summary, "anchor decomposition FAILED: {e}").unwrap();
                    failure = Some(format!("anchor decomposition failed: {e}"));
                }
                Err(e) => return Err(RunError::Continuation(e)),
            }
        }
    }

    let certified = failure.is_none();
    writeln!(ctx.summary, "result: {}", if certified { "all certificates passed" } else { "certificate failed" }).unwrap();
    writeln!(ctx.summary, "elapsed: {:.2?}", ctx.started.elapsed()).unwrap();
    let report = RunReport {
        command: cmd.name().to_string(),
        certified,
        failure,
        grid: GridReport {
            subdivisions: cfg.grid.subdivisions().to_vec(),
            domain: cfg.grid.domain().iter().map(|c| [c.lo(), c.hi()]).collect(),
            cells: cfg.grid.cell_count(),
        },
        tau,
        scheme: match cfg.scheme {
            StepScheme::FirstOrder => SchemeReport::FirstOrder,
            StepScheme::Centered { substeps, subdivisions } => SchemeReport::Centered { substeps, subdivisions },
        },
        graph,
        isolation,
        decomposition,
        sweep,
        sets: ctx.sets,
    };
    Ok(Outcome {
        report,
        files: ctx.files,
        summary: ctx.summary,
    })
}

fn sweep_failure(report: &SweepReport, semi: Option<bool>) -> String {
    if let Some(r) = report.records.iter().find(|r| !r.isolated()) {
        return format!("isolation fails at lambda {}", r.lambda);
    }
    if let Some(r) = report
        .records
        .iter()
        .find(|r| matches!(r.decomposition, DecompositionStatus::Breakdown(_) | DecompositionStatus::NotIsolated))
    {
        return format!("decomposition breaks down at lambda {}: {}", r.lambda, export::status_name(&r.decomposition));
    }
    if semi == Some(false) {
        return "semicontinuity check failed".into();
    }
    "certificate failed".into()
}

fn sweep_summary(ctx: &mut Ctx<'_>, report: &SweepReport, semi: Option<bool>) -> SweepSummary {
    let grid = &ctx.cfg.grid;
    let table = ctx.file("sweep.table".into(), export::sweep_table(report).into_bytes());
    let text = ctx.file("sweep.txt".into(), export::sweep_text(grid, report).into_bytes());
    let mut records = Vec::new();
    for (i, r) in report.records.iter().enumerate() {
        let invariant_file = ctx.file(format!("S_{i}.cells"), export::boxset_text(grid, &r.invariant).into_bytes());
        if let Some(d) = r.decomposition.decomposition() {
            for (name, set) in [("A", &d.a), ("R", &d.r), ("C", &d.c)] {
                ctx.file(format!("{name}_{i}.cells"), export::boxset_text(grid, set).into_bytes());
            }
        }
        records.push(RecordReport {
            lambda: [r.lambda.lo(), r.lambda.hi()],
            isolation_n: r.isolation.passed(),
            isolation_n_a: r.isolation_a.as_ref().map(|c| c.passed()),
            isolation_n_r: r.isolation_r.as_ref().map(|c| c.passed()),
            invariant_cells: r.invariant.len(),
            in_verified_run: report.in_verified_run(i),
            status: export::status_name(&r.decomposition),
            decomposition: r.decomposition.decomposition().map(decomposition_report),
            invariant_file,
        });
        writeln!(
            ctx.summary,
            "lambda {}: isolation {}, |S| = {}, {}",
            r.lambda,
            if r.isolated() { "pass" } else { "FAIL" },
            r.invariant.len(),
            export::status_name(&r.decomposition)
        )
        .unwrap();
    }
    let verified = report.verified_interval().map(|v| [v.lo(), v.hi()]);
    match verified {
        Some([lo, hi]) => writeln!(ctx.summary, "verified lambda interval: [{lo:?}, {hi:?}]").unwrap(),
        None => writeln!(ctx.summary, "verified lambda interval: none").unwrap(),
    }
    if let Some(s) = semi {
        writeln!(ctx.summary, "semicontinuity: {}", if s { "pass" } else { "FAIL" }).unwrap();
    }
    SweepSummary {
        anchor: report.anchor,
        verified,
        semicontinuity: semi,
        slope: ctx.cfg.run.slope,
        table,
        text,
        records,
    }
}
