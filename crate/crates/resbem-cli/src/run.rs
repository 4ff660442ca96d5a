//! Task execution and the run manifest.

use crate::config::{ConfigError, Region, RunConfig, Task};
use crate::oracle::{disk_dispersion_oracle, winding_count, RESIDUAL_TOL};
use crate::output::{write_csv, OracleRow, PolarizationRow, ResonanceRow, SweepRow};
use crate::validate::run_suite;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use resbem::asymptotics::{loglog_slope, predict_shift_simple, PerturbationSetup, PredictionMode, MAX_GRAM_CONDITION};
use resbem::geometry::{build_grid, Scene, Shape};
use resbem::nep::{find_in_rectangle, find_resonances, track_resonance, ContourSpec, OperatorFamily, SearchReport};
use resbem::polarization::{compute_polarization, DEGENERATE_CONTRAST};
use resbem::transfer::{PerturbedFamily, TransferFamily};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<resbem::Error> for RunError {
    fn from(e: resbem::Error) -> Self {
        RunError::Numerical(e.to_string())
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            _ => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Numerical(_) => "numerical",
            RunError::Io(_) => "io",
        }
    }
}

/// What a task produced: files written and a task-specific summary.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<String>,
    pub summary: Value,
    /// Set when the task ran to completion but some check or branch failed.
    pub failed: bool,
}

pub struct Run {
    pub task: Task,
    pub config: RunConfig,
    pub out: PathBuf,
    pub threads: Option<usize>,
}

impl Run {
    pub fn new(task: Task, mut config: RunConfig, out: Option<PathBuf>, seed: Option<u64>, threads: Option<usize>) -> Self {
        if let Some(s) = seed {
            config.solver.seed = s;
        }
        let out = out.or_else(|| config.out.clone().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"));
        Self { task, config, out, threads }
    }

    /// Run the task, always writing `manifest.json`. Returns the exit code.
    pub fn execute(&self) -> i32 {
        let start = Instant::now();
        let result = std::fs::create_dir_all(&self.out).map_err(RunError::from).and_then(|_| self.in_pool());
        let elapsed = start.elapsed().as_secs_f64();
        let (code, status, outcome, error) = match result {
            Ok(o) if o.failed => (1, "failed", o, Value::Null),
            Ok(o) => (0, "ok", o, Value::Null),
            Err(e) => {
                let err = json!({ "kind": e.kind(), "message": e.to_string() });
                eprintln!("{}", serde_json::to_string(&err).unwrap_or_default());
                (e.exit_code(), "error", Outcome::default(), err)
            }
        };
        let manifest = self.manifest(status, &outcome, error, elapsed);
        let path = self.out.join("manifest.json");
        if let Err(e) = std::fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap_or_default()) {
            eprintln!("cannot write {}: {e}", path.display());
            return code.max(1);
        }
        code
    }

    fn in_pool(&self) -> Result<Outcome, RunError> {
        match self.threads {
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| ConfigError { path: "--threads".into(), message: e.to_string() })?;
                pool.install(|| self.dispatch())
            }
            None => self.dispatch(),
        }
    }

    fn dispatch(&self) -> Result<Outcome, RunError> {
        match self.task {
            Task::Resonances => resonances(&self.config, &self.out),
            Task::Polarization => polarization(&self.config, &self.out),
            Task::Sweep => sweep(&self.config, &self.out),
            Task::Validate => validate(&self.config, &self.out),
            Task::OracleDisk => oracle(&self.config, &self.out),
        }
    }

    fn manifest(&self, status: &str, o: &Outcome, error: Value, elapsed: f64) -> Value {
        let c = &self.config;
        json!({
            "tool": "resbem",
            "version": env!("CARGO_PKG_VERSION"),
            "config_version": c.version,
            "task": self.task.name(),
            "status": status,
            "error": error,
            "seed": c.solver.seed,
            "threads": self.threads.unwrap_or_else(rayon::current_num_threads),
            "grid": c.grid,
            "jump_mode": c.jump_mode,
            "thresholds": {
                "solver": c.solver,
                "contour": c.contour,
                "oracle_residual": RESIDUAL_TOL,
                "gram_condition_max": MAX_GRAM_CONDITION,
                "polarization_condition_max": resbem::polarization::MAX_CONDITION,
                "degenerate_contrast": DEGENERATE_CONTRAST,
            },
            "config": c,
            "files": o.files,
            "summary": o.summary,
            "timing_seconds": elapsed,
        })
    }
}

fn outer_family(c: &RunConfig) -> Result<TransferFamily, RunError> {
    Ok(TransferFamily { grid: build_grid(&c.scene.outer, c.grid.n_outer)?, gamma1: c.scene.gamma1, gamma2: c.scene.gamma2, mode: c.jump_mode })
}

fn search<F: OperatorFamily>(fam: &F, c: &RunConfig) -> Result<SearchReport, RunError> {
    let mut all = SearchReport::default();
    for r in &c.search {
        let rep = match r {
            Region::Rectangle(rect) => find_in_rectangle(fam, rect, c.contour.rho, c.contour.nodes, c.contour.probes, &c.solver)?,
            Region::Circle { center, radius } => {
                let spec = ContourSpec { center: *center, radius: *radius, nodes: c.contour.nodes, probes: c.contour.probes };
                find_resonances(fam, &spec, &c.solver)?
            }
        };
        all.failures.extend(rep.failures);
        all.spurious.extend(rep.spurious);
        for r in rep.results {
            if !all.results.iter().any(|q| (q.lambda - r.lambda).norm() < 1e-7 * r.lambda.norm().max(1.0)) {
                all.results.push(r);
            }
        }
    }
    all.results.sort_by(|a, b| a.lambda.re.total_cmp(&b.lambda.re).then(a.lambda.im.total_cmp(&b.lambda.im)));
    Ok(all)
}

fn resonances(c: &RunConfig, out: &Path) -> Result<Outcome, RunError> {
    let perturbed = !c.scene.inclusions.is_empty() && c.scene.epsilon > 0.0;
    let rep = if perturbed {
        search(&PerturbedFamily::new(c.scene.clone(), c.grid.n_outer, c.grid.n_inclusion, c.jump_mode)?, c)?
    } else {
        search(&outer_family(c)?, c)?
    };
    let rows: Vec<ResonanceRow> = rep
        .results
        .iter()
        .map(|r| ResonanceRow {
            n_outer: c.grid.n_outer,
            n_inclusion: if perturbed { c.grid.n_inclusion } else { 0 },
            tol: c.solver.residual_tol,
            lambda_re: r.lambda.re,
            lambda_im: r.lambda.im,
            m_geo: r.m_geo,
            p: r.p,
            alpha: r.alpha,
            residual: r.residual / r.norm,
            newton_steps: r.newton_steps,
        })
        .collect();
    write_csv(&out.join("resonances.csv"), &rows)?;
    Ok(Outcome {
        files: vec!["resonances.csv".into()],
        summary: json!({
            "count": rows.len(),
            "perturbed": perturbed,
            "failures": rep.failures.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
            "spurious": rep.spurious.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        }),
        failed: false,
    })
}

fn polarization(c: &RunConfig, out: &Path) -> Result<Outcome, RunError> {
    let mut rows = Vec::new();
    for (i, inc) in c.scene.inclusions.iter().enumerate() {
        let grid = build_grid(&inc.shape, c.grid.n_polarization)?;
        for (mode, t) in [("published", inc.trace()), ("corrected", inc.trace() / 2.0)] {
            let p = compute_polarization(&grid, c.scene.gamma1, t)?;
            rows.push(PolarizationRow {
                inclusion: i,
                mode,
                n_polarization: c.grid.n_polarization,
                tol: c.solver.residual_tol,
                gamma_bg: c.scene.gamma1,
                trace: t,
                m: p.m,
                eigenvalues: p.eigenvalues(),
                quad_error: p.quad_error,
            });
        }
    }
    write_csv(&out.join("polarization.csv"), &rows)?;
    Ok(Outcome { files: vec!["polarization.csv".into()], summary: json!({ "inclusions": c.scene.inclusions.len() }), failed: false })
}

fn c2(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn sweep(c: &RunConfig, out: &Path) -> Result<Outcome, RunError> {
    let s = c.sweep.ok_or_else(|| ConfigError { path: "sweep".into(), message: "required by the sweep task".into() })?;
    if c.epsilons.is_empty() {
        return Err(ConfigError { path: "epsilons".into(), message: "required by the sweep task".into() }.into());
    }
    if c.scene.inclusions.is_empty() {
        return Err(ConfigError { path: "scene.inclusions".into(), message: "required by the sweep task".into() }.into());
    }
    let fam = outer_family(c)?;
    let contour = ContourSpec { center: s.lambda0, radius: s.radius, nodes: c.contour.nodes, probes: c.contour.probes };
    let rep = find_resonances(&fam, &contour, &c.solver)?;
    let [res] = rep.results.as_slice() else {
        return Err(RunError::Numerical(format!("expected one resonance near {:?}, found {}", s.lambda0, rep.results.len())));
    };
    let setup = PerturbationSetup::new(&fam, res, &c.scene, c.grid.n_polarization)?;

    struct Point {
        eps: f64,
        corrected: Option<C64>,
        published: Option<C64>,
        tracked: Result<Vec<C64>, String>,
    }
    let points: Vec<Point> = c
        .epsilons
        .par_iter()
        .map(|&eps| {
            let corrected = predict_shift_simple(&setup, eps, PredictionMode::Corrected).ok().map(|p| p.shift);
            let published = predict_shift_simple(&setup, eps, PredictionMode::Published).ok().map(|p| p.shift);
            let radius = corrected.or(published).map_or(s.radius, |d| d.norm());
            let make = |e: f64| PerturbedFamily::new(Scene { epsilon: e, ..c.scene.clone() }, c.grid.n_outer, c.grid.n_inclusion, c.jump_mode);
            let track = track_resonance(make, res.lambda, res.m_geo, &[eps], &|_| radius, &c.solver);
            let tracked = match track.into_iter().next().map(|t| t.outcome) {
                Some(Ok(v)) => Ok(v.iter().flat_map(|r| std::iter::repeat(r.lambda).take(r.m_geo)).collect()),
                Some(Err(e)) => Err(e.to_string()),
                None => Err("no track".into()),
            };
            Point { eps, corrected, published, tracked }
        })
        .collect();

    let pick = |p: &Point| match s.prediction {
        PredictionMode::Corrected => p.corrected,
        PredictionMode::Published => p.published,
    };
    // averaged measured shift and its distance to the prediction, per ε
    let mut fit_eps = Vec::new();
    let mut fit_shift = Vec::new();
    let mut fit_res = Vec::new();
    let mut residuals = Vec::new();
    for p in &points {
        let r = match (&p.tracked, pick(p)) {
            (Ok(l), Some(d)) if !l.is_empty() => {
                let mean = l.iter().sum::<C64>() / l.len() as f64 - res.lambda;
                fit_eps.push(p.eps);
                fit_shift.push(mean.norm());
                fit_res.push((mean - d).norm());
                (mean - d).norm()
            }
            _ => f64::NAN,
        };
        residuals.push(r);
    }
    let (slope_shift, slope_residual) = if fit_eps.len() >= 2 {
        (loglog_slope(&fit_eps, &fit_shift), loglog_slope(&fit_eps, &fit_res))
    } else {
        (f64::NAN, f64::NAN)
    };
    let nan = [f64::NAN, f64::NAN];
    let mut rows = Vec::new();
    let mut failed = false;
    for (p, &residual) in points.iter().zip(&residuals) {
        let base = |branch: usize, lambda_eps: [f64; 2], status: String| SweepRow {
            n_outer: c.grid.n_outer,
            n_inclusion: c.grid.n_inclusion,
            tol: c.solver.residual_tol,
            epsilon: p.eps,
            branch,
            lambda: c2(res.lambda),
            lambda_eps,
            predicted: pick(p).map_or(nan, c2),
            corrected: p.corrected.map_or(nan, c2),
            published: p.published.map_or(nan, c2),
            residual,
            slope_shift,
            slope_residual,
            status,
        };
        match &p.tracked {
            Ok(l) => rows.extend(l.iter().enumerate().map(|(j, z)| base(j, c2(*z), "ok".into()))),
            Err(e) => {
                failed = true;
                rows.push(base(0, nan, e.clone()));
            }
        }
    }
    write_csv(&out.join("sweep.csv"), &rows)?;
    Ok(Outcome {
        files: vec!["sweep.csv".into()],
        summary: json!({
            "lambda": c2(res.lambda),
            "m_geo": res.m_geo,
            "alpha": res.alpha,
            "prediction": s.prediction,
            "slope_shift": slope_shift,
            "slope_residual": slope_residual,
        }),
        failed,
    })
}

fn validate(c: &RunConfig, out: &Path) -> Result<Outcome, RunError> {
    let checks = run_suite(&c.solver)?;
    write_csv(&out.join("validation.csv"), &checks)?;
    let failed = checks.iter().any(|k| !k.pass);
    Ok(Outcome { files: vec!["validation.csv".into()], summary: json!({ "checks": checks }), failed })
}

fn oracle(c: &RunConfig, out: &Path) -> Result<Outcome, RunError> {
    let o = c.oracle.as_ref().ok_or_else(|| ConfigError { path: "oracle".into(), message: "required by the oracle-disk task".into() })?;
    let Shape::Circle { radius } = c.scene.outer.shape else {
        return Err(ConfigError { path: "scene.outer".into(), message: "the disk oracle needs a circular outer boundary".into() }.into());
    };
    let radius = radius * c.scene.outer.scale;
    let (g1, g2) = (c.scene.gamma1, c.scene.gamma2);
    let mut rows = Vec::new();
    let mut counts = Vec::new();
    let mut failed = false;
    for &m in &o.modes {
        let roots = disk_dispersion_oracle(g1, g2, radius, m, &o.region)?;
        let winding = winding_count(g1, g2, radius, m, &o.region)?;
        failed |= winding != roots.len() as i64;
        counts.push(json!({ "mode": m, "roots": roots.len(), "winding": winding }));
        rows.extend(roots.iter().map(|r| OracleRow {
            n_outer: c.grid.n_outer,
            tol: RESIDUAL_TOL,
            mode: m,
            omega: c2(r.omega),
            multiplicity: r.multiplicity(),
            residual: r.residual,
        }));
    }
    write_csv(&out.join("oracle.csv"), &rows)?;
    Ok(Outcome { files: vec!["oracle.csv".into()], summary: json!({ "modes": counts }), failed })
}
