//! Experiment drivers behind the command-line front end.
//!
//! Each `cmd_*` function writes its CSVs, a run log and `config_echo.toml`
//! (the fully resolved configuration) into the output directory, and returns
//! the in-memory results.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;

use crate::conditioning::{
    argmax_first, calibrate_zeta, classify_regime, equation_report, system_condition, Classification,
    ConditionReport, NormsSq, RegimeCase, ReportLabel, TimestepRegime, ZetaConstants,
};
use crate::config::{ExperimentConfig, FULL_HORIZON, SCHEME_DIFF_HORIZON};
use crate::error::{Error, Result};
use crate::linalg::EigenOptions;
use crate::model::{initial_state, Equation, ModelParams, StateFields};
use crate::stepper::{l2_field_difference, SchemeVariant, Stepper};
use crate::Mesh;

/// Lossless float formatting used in every CSV.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    let mut s = String::with_capacity(64 * (rows.len() + 1));
    s.push_str(header);
    s.push('\n');
    for r in rows {
        s.push_str(r);
        s.push('\n');
    }
    fs::write(path, s)?;
    Ok(())
}

fn prepare_out(cfg: &ExperimentConfig, resolved: &ExperimentConfig) -> Result<PathBuf> {
    fs::create_dir_all(&cfg.out)?;
    fs::write(cfg.out.join("config_echo.toml"), resolved.to_toml())?;
    Ok(cfg.out.clone())
}

/// Number of steps to reach `t_end`.
pub fn step_count(t_end: f64, dt: f64) -> usize {
    (t_end / dt).round() as usize
}

fn build_mesh(cfg: &ExperimentConfig, n: usize) -> Result<Arc<Mesh>> {
    Ok(Arc::new(Mesh::new(n, cfg.domain_rect())?))
}

fn range(v: &[f64]) -> f64 {
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    hi - lo
}

fn field_mins(s: &StateFields) -> [f64; 4] {
    Equation::ALL.map(|eq| s.field(eq).coeffs().iter().copied().fold(f64::INFINITY, f64::min))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotSummary {
    pub step: usize,
    pub t: f64,
    /// Max minus min nodal ECM value.
    pub ecm_range: f64,
    pub min_value: f64,
}

#[derive(Clone, Debug)]
pub struct SimulateSummary {
    pub steps: usize,
    pub t_end: f64,
    pub snapshots: Vec<SnapshotSummary>,
    /// Smallest nodal value of any field at any step, including the start.
    pub min_value: f64,
    pub final_state: StateFields,
}

fn snapshot_rows(s: &StateFields) -> Vec<String> {
    let mesh = s.mesh();
    (0..mesh.node_count())
        .map(|i| {
            let p = mesh.node(i);
            let mut r = format!("{i},{},{}", fmt_f(p[0]), fmt_f(p[1]));
            for eq in Equation::ALL {
                let _ = write!(r, ",{}", fmt_f(s.field(eq).coeffs()[i]));
            }
            r
        })
        .collect()
}

fn snapshot_name(step: usize) -> String {
    format!("snapshot_step{step:05}.csv")
}

/// Runs the model to `cfg.t_end` (default the full horizon), writing
/// snapshots, per-step norms and the ECM range summary.
pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<SimulateSummary> {
    let t_end = cfg.t_end.unwrap_or(FULL_HORIZON);
    let resolved = cfg.resolved(t_end);
    let out = prepare_out(cfg, &resolved)?;
    let params = resolved.model_params()?;
    let mesh = build_mesh(cfg, cfg.n)?;
    let stepper = Stepper::new(mesh.clone(), params, cfg.stepper_options())?;
    let steps = step_count(t_end, cfg.dt);
    let mut snap_steps: Vec<usize> = cfg
        .snapshots
        .iter()
        .map(|&t| step_count(t, cfg.dt))
        .filter(|&k| k <= steps)
        .collect();
    snap_steps.sort_unstable();
    snap_steps.dedup();

    let mut log = String::new();
    let _ = writeln!(log, "simulate n={} dt={} t_end={} steps={steps}", cfg.n, cfg.dt, t_end);
    let mut state = initial_state(&mesh, &params);
    let mut norms = Vec::with_capacity(steps + 1);
    let mut snapshots = Vec::new();
    let mut min_value = state.min_value();
    let norm_row = |k: usize, s: &StateFields, iters: [usize; 4]| {
        let mut r = format!("{k},{}", fmt_f(s.t));
        for eq in Equation::ALL {
            let c = s.field(eq).coeffs();
            let _ = write!(r, ",{}", fmt_f(stepper.mass().quadratic_form(c).max(0.0).sqrt()));
        }
        for m in field_mins(s) {
            let _ = write!(r, ",{}", fmt_f(m));
        }
        let _ = write!(r, ",{}", fmt_f(range(s.e.coeffs())));
        for i in iters {
            let _ = write!(r, ",{i}");
        }
        r
    };
    norms.push(norm_row(0, &state, [0; 4]));
    for k in 0..=steps {
        if k > 0 {
            let (next, report) = stepper.advance(&state).map_err(|e| Error::Step {
                step: k,
                source: Box::new(e),
            })?;
            state = next;
            min_value = min_value.min(state.min_value());
            norms.push(norm_row(k, &state, report.stats.map(|s| s.iterations)));
        }
        if snap_steps.binary_search(&k).is_ok() {
            write_csv(&out.join(snapshot_name(k)), "node,x,y,g,f,m,e", &snapshot_rows(&state))?;
            snapshots.push(SnapshotSummary {
                step: k,
                t: state.t,
                ecm_range: range(state.e.coeffs()),
                min_value: state.min_value(),
            });
            let _ = writeln!(log, "snapshot step={k} t={} ecm_range={:e}", state.t, range(state.e.coeffs()));
        }
    }
    write_csv(
        &out.join("norms.csv"),
        "step,t,l2_g,l2_f,l2_m,l2_e,min_g,min_f,min_m,min_e,ecm_range,iter_g,iter_f,iter_m,iter_e",
        &norms,
    )?;
    let rows: Vec<String> = snapshots
        .iter()
        .map(|s| format!("{},{},{},{}", s.step, fmt_f(s.t), fmt_f(s.ecm_range), fmt_f(s.min_value)))
        .collect();
    write_csv(&out.join("summary.csv"), "step,t,ecm_range,min_value", &rows)?;
    let _ = writeln!(log, "min nodal value over run: {min_value:e}");
    fs::write(out.join("run.log"), log)?;
    Ok(SimulateSummary {
        steps,
        t_end,
        snapshots,
        min_value,
        final_state: state,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeDiffRow {
    pub step: usize,
    pub t: f64,
    /// L2 norms of amended minus original, in `g, f, m, e` order.
    pub diff: [f64; 4],
}

/// Runs both scheme variants from identical data; `t_end` defaults to the
/// short horizon unless `full_horizon` is set.
pub fn cmd_scheme_diff(cfg: &ExperimentConfig, full_horizon: bool) -> Result<Vec<SchemeDiffRow>> {
    let t_end = cfg
        .t_end
        .unwrap_or(if full_horizon { FULL_HORIZON } else { SCHEME_DIFF_HORIZON });
    let resolved = cfg.resolved(t_end);
    let out = prepare_out(cfg, &resolved)?;
    let params = resolved.model_params()?;
    let mesh = build_mesh(cfg, cfg.n)?;
    let mut opts = cfg.stepper_options();
    opts.variant = SchemeVariant::Amended;
    let amended = Stepper::new(mesh.clone(), params, opts)?;
    opts.variant = SchemeVariant::Original;
    let original = Stepper::new(mesh.clone(), params, opts)?;
    let steps = step_count(t_end, cfg.dt);
    let mut a = initial_state(&mesh, &params);
    let mut b = a.clone();
    let mut rows = Vec::with_capacity(steps);
    for k in 1..=steps {
        let wrap = |e| Error::Step {
            step: k,
            source: Box::new(e),
        };
        let ((na, _), (nb, _)) = if cfg.parallel {
            let (ra, rb) = rayon::join(|| amended.advance(&a), || original.advance(&b));
            (ra.map_err(wrap)?, rb.map_err(wrap)?)
        } else {
            (amended.advance(&a).map_err(wrap)?, original.advance(&b).map_err(wrap)?)
        };
        a = na;
        b = nb;
        let diff = Equation::ALL.map(|eq| l2_field_difference(amended.mass(), a.field(eq), b.field(eq)));
        rows.push(SchemeDiffRow { step: k, t: a.t, diff });
    }
    let text: Vec<String> = rows
        .iter()
        .map(|r| {
            let d = r.diff.map(fmt_f);
            format!("{},{},{}", r.step, fmt_f(r.t), d.join(","))
        })
        .collect();
    write_csv(&out.join("scheme_diff.csv"), "step,t,diff_g,diff_f,diff_m,diff_e", &text)?;
    let mut log = format!("scheme-diff n={} dt={} t_end={t_end} steps={steps}\n", cfg.n, cfg.dt);
    if let Some(last) = rows.last() {
        let _ = writeln!(log, "final differences g,f,m,e: {:?}", last.diff);
    }
    fs::write(out.join("run.log"), log)?;
    Ok(rows)
}

/// Per-equation reports, the system report and the bound-based
/// classification for the systems built from `state` (step `step`).
pub fn condition_at(
    stepper: &Stepper,
    state: &StateFields,
    step: usize,
    zeta: &ZetaConstants,
    eig: &EigenOptions,
) -> Result<([ConditionReport; 4], ConditionReport, Classification)> {
    let p = stepper.params();
    let h = stepper.mesh().h();
    let norms = NormsSq::of(state);
    let class = classify_regime(p, h, p.dt, norms, zeta);
    let mut reports = Vec::with_capacity(4);
    for (i, eq) in Equation::ALL.into_iter().enumerate() {
        let sys = match eq {
            Equation::F => stepper.build_system_f(state, SchemeVariant::Amended)?,
            Equation::M => stepper.build_system_m(state, SchemeVariant::Amended)?,
            _ => stepper.build_system(state, eq)?,
        };
        reports.push(equation_report(eq, &sys.matrix, class.bounds[i], h, p.dt, step, eig)?);
    }
    let mut reports: [ConditionReport; 4] = reports.try_into().expect("four equations");
    let system = system_condition(&reports);
    for r in reports.iter_mut() {
        r.dominant = system.dominant;
    }
    Ok((reports, system, class))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub h: f64,
    pub dt: f64,
    /// Index into the configured scalings.
    pub scaling: usize,
    pub step: usize,
    pub label: ReportLabel,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub k_empirical: f64,
    pub bound_corrected: f64,
    pub bound_paper_literal: f64,
    /// Arg-max of the empirical condition numbers.
    pub dominant: Equation,
    /// Arg-max of the corrected bounds.
    pub dominant_bound: Equation,
    pub case: RegimeCase,
    pub regime: TimestepRegime,
}

impl SweepRow {
    fn from_report(n: usize, scaling: usize, r: &ConditionReport, c: &Classification) -> Self {
        Self {
            n,
            h: r.h,
            dt: r.dt,
            scaling,
            step: r.step,
            label: r.label,
            lambda_min: r.lambda_min,
            lambda_max: r.lambda_max,
            k_empirical: r.k_empirical,
            bound_corrected: r.bound_corrected,
            bound_paper_literal: r.bound_paper_literal,
            dominant: r.dominant,
            dominant_bound: c.dominant,
            case: c.case,
            regime: c.regime,
        }
    }

    pub fn violates(&self) -> bool {
        self.bound_corrected < self.k_empirical
    }

    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            fmt_f(self.h),
            fmt_f(self.dt),
            self.scaling,
            self.step,
            self.label,
            fmt_f(self.lambda_min),
            fmt_f(self.lambda_max),
            fmt_f(self.k_empirical),
            fmt_f(self.bound_corrected),
            fmt_f(self.bound_paper_literal),
            self.dominant,
            self.dominant_bound,
            self.case,
            self.regime
        )
    }
}

pub const SWEEP_HEADER: &str = "n,h,dt,scaling,step,equation,lambda_min,lambda_max,k_empirical,\
bound_corrected,bound_paper_literal,dominant,dominant_bound,case_label,dt_regime";

fn scaled_params(base: &ModelParams, scaling: &std::collections::BTreeMap<String, f64>) -> Result<ModelParams> {
    let mut p = *base;
    for (k, v) in scaling {
        let x = p.get(k)?;
        p.set(k, x * v)?;
    }
    Ok(p)
}

/// Sweep over `(n, dt, scaling)` tuples with the given constants.
pub fn condition_sweep(cfg: &ExperimentConfig, zeta: &ZetaConstants) -> Result<Vec<SweepRow>> {
    let base = cfg.model_params()?;
    let eig = cfg.eigen_options();
    let mut tuples = Vec::new();
    for &n in &cfg.sweep.n {
        for &dt in &cfg.sweep.dt {
            for s in 0..cfg.sweep.scalings.len() {
                tuples.push((n, dt, s));
            }
        }
    }
    let run = |&(n, dt, si): &(usize, f64, usize)| -> Result<Vec<SweepRow>> {
        let mut p = scaled_params(&base, &cfg.sweep.scalings[si])?;
        p.dt = dt;
        let mesh = build_mesh(cfg, n)?;
        let mut opts = cfg.stepper_options();
        opts.variant = SchemeVariant::Amended;
        opts.parallel = false;
        let stepper = Stepper::new(mesh.clone(), p, opts)?;
        let mut state = initial_state(&mesh, &p);
        let mut rows = Vec::new();
        for step in 1..=cfg.sweep.steps {
            let (reports, system, class) = condition_at(&stepper, &state, step, zeta, &eig)?;
            for r in reports.iter().chain(std::iter::once(&system)) {
                rows.push(SweepRow::from_report(n, si, r, &class));
            }
            if step < cfg.sweep.steps {
                state = stepper
                    .advance(&state)
                    .map_err(|e| Error::Step {
                        step,
                        source: Box::new(e),
                    })?
                    .0;
            }
        }
        Ok(rows)
    };
    let results: Vec<Result<Vec<SweepRow>>> = if cfg.parallel {
        tuples.par_iter().map(run).collect()
    } else {
        tuples.iter().map(run).collect()
    };
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    let order = |r: &SweepRow| match r.label {
        ReportLabel::Equation(e) => e as usize,
        ReportLabel::System => 4,
    };
    rows.sort_by(|a, b| {
        (a.n, a.scaling, a.step, order(a))
            .cmp(&(b.n, b.scaling, b.step, order(b)))
            .then(a.dt.total_cmp(&b.dt))
    });
    Ok(rows)
}

/// Share of tuples where empirical and bound arg-max agree, with the mismatches.
pub fn dominance_agreement(rows: &[SweepRow]) -> (f64, Vec<SweepRow>) {
    let sys: Vec<&SweepRow> = rows.iter().filter(|r| r.label == ReportLabel::System).collect();
    let bad: Vec<SweepRow> = sys.iter().filter(|r| r.dominant != r.dominant_bound).map(|r| (*r).clone()).collect();
    let share = if sys.is_empty() {
        1.0
    } else {
        1.0 - bad.len() as f64 / sys.len() as f64
    };
    (share, bad)
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn calibrate(cfg: &ExperimentConfig) -> Result<ZetaConstants> {
    calibrate_zeta(&cfg.calibration.n, cfg.seed, &cfg.eigen_options())
}

fn write_zeta(out: &Path, z: &ZetaConstants) -> Result<()> {
    fs::write(out.join("zeta.txt"), z.to_text())?;
    let rows: Vec<String> = z
        .samples
        .iter()
        .map(|s| {
            format!(
                "{},{},{},{},{},{},{},{},{}",
                s.n,
                fmt_f(s.h),
                fmt_f(s.mass_min),
                fmt_f(s.mass_max),
                fmt_f(s.inverse),
                fmt_f(s.inverse_sup),
                fmt_f(s.weighted_min),
                fmt_f(s.weighted_max),
                fmt_f(s.stiffness_max)
            )
        })
        .collect();
    write_csv(
        &out.join("zeta_samples.csv"),
        "n,h,mass_min_h2,mass_max_h2,inverse,inverse_sup,weighted_min_h2,weighted_max_h2,stiffness_max",
        &rows,
    )
}

/// Calibrates the constants, then writes the sweep CSV.
pub fn cmd_cond_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let out = prepare_out(cfg, &cfg.resolved(cfg.t_end.unwrap_or(FULL_HORIZON)))?;
    let zeta = calibrate(cfg)?;
    write_zeta(&out, &zeta)?;
    let rows = condition_sweep(cfg, &zeta)?;
    let text: Vec<String> = rows.iter().map(SweepRow::csv).collect();
    write_csv(&out.join("cond_sweep.csv"), SWEEP_HEADER, &text)?;
    let (share, bad) = dominance_agreement(&rows);
    let violations = rows.iter().filter(|r| r.violates()).count();
    let mut log = format!(
        "cond-sweep rows={} bound violations={violations} dominance agreement={:.1}%\n",
        rows.len(),
        100.0 * share
    );
    for r in &bad {
        let _ = writeln!(
            log,
            "mismatch n={} dt={} scaling={} step={}: empirical {} vs bound {}",
            r.n, r.dt, r.scaling, r.step, r.dominant, r.dominant_bound
        );
    }
    fs::write(out.join("run.log"), log)?;
    Ok(rows)
}

pub fn cmd_calibrate(cfg: &ExperimentConfig) -> Result<ZetaConstants> {
    let out = prepare_out(cfg, &cfg.resolved(cfg.t_end.unwrap_or(FULL_HORIZON)))?;
    let zeta = calibrate(cfg)?;
    write_zeta(&out, &zeta)?;
    Ok(zeta)
}

/// Classifies `(params, h, dt)` with the norms of the initial state.
pub fn cmd_classify(cfg: &ExperimentConfig) -> Result<Classification> {
    let out = prepare_out(cfg, &cfg.resolved(cfg.t_end.unwrap_or(FULL_HORIZON)))?;
    let zeta = calibrate(cfg)?;
    let p = cfg.model_params()?;
    let mesh = build_mesh(cfg, cfg.n)?;
    let state = initial_state(&mesh, &p);
    let c = classify_regime(&p, mesh.h(), p.dt, NormsSq::of(&state), &zeta);
    let mut s = format!(
        "case = {}\nregime = {}\ndominant = {}\nh = {}\ndt = {}\n",
        c.case,
        c.regime,
        c.dominant,
        fmt_f(mesh.h()),
        fmt_f(p.dt)
    );
    for (eq, b) in Equation::ALL.iter().zip(&c.bounds) {
        let _ = writeln!(s, "bound_{eq} = {} (literal {})", fmt_f(b.corrected), fmt_f(b.paper_literal));
    }
    fs::write(out.join("classify.txt"), s)?;
    Ok(c)
}

/// Plot-script flavours.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    /// Semilog-y differences against time.
    SchemeDiff,
    /// Log-log condition number against `h`.
    CondSweep,
    /// Filled contours of one snapshot.
    Snapshot,
}

impl std::str::FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scheme-diff" => Ok(PlotKind::SchemeDiff),
            "cond-sweep" => Ok(PlotKind::CondSweep),
            "snapshot" => Ok(PlotKind::Snapshot),
            _ => Err(Error::Config(format!("unknown plot kind `{s}`"))),
        }
    }
}

impl PlotKind {
    /// Guess from the CSV header.
    pub fn detect(header: &str) -> Option<Self> {
        if header.starts_with("step,t,diff_g") {
            Some(PlotKind::SchemeDiff)
        } else if header.starts_with("n,h,dt,scaling") {
            Some(PlotKind::CondSweep)
        } else if header.starts_with("node,x,y") {
            Some(PlotKind::Snapshot)
        } else {
            None
        }
    }
}

const SCHEME_DIFF_PLOT: &str = r#"
rows = list(csv.DictReader(open(CSV)))
t = [float(r["t"]) for r in rows]
for name in ("g", "f", "m", "e"):
    plt.semilogy(t, [float(r["diff_" + name]) for r in rows], label=name)
plt.xlabel("t")
plt.ylabel("L2 norm of amended - original")
plt.legend()
"#;

const COND_SWEEP_PLOT: &str = r#"
rows = list(csv.DictReader(open(CSV)))
series = {}
for r in rows:
    if r["step"] != "1":
        continue
    key = (r["equation"], r["dt"], r["scaling"])
    series.setdefault(key, []).append((float(r["h"]), float(r["k_empirical"]), float(r["bound_corrected"])))
for (eq, dt, sc), pts in sorted(series.items()):
    pts.sort()
    line, = plt.loglog([p[0] for p in pts], [p[1] for p in pts], "o-", label=f"{eq} dt={float(dt):g} s{sc}")
    plt.loglog([p[0] for p in pts], [p[2] for p in pts], "--", color=line.get_color())
plt.xlabel("h")
plt.ylabel("condition number (dashed: bound)")
plt.legend(fontsize="small")
"#;

const SNAPSHOT_PLOT: &str = r#"
rows = list(csv.DictReader(open(CSV)))
x = [float(r["x"]) for r in rows]
y = [float(r["y"]) for r in rows]
fig, axes = plt.subplots(2, 2, figsize=(9, 8))
for ax, name in zip(axes.flat, ("g", "f", "m", "e")):
    c = ax.tricontourf(x, y, [float(r[name]) for r in rows], levels=20)
    fig.colorbar(c, ax=ax)
    ax.set_title(name)
    ax.set_aspect("equal")
"#;

/// Standalone matplotlib script that renders `csv`.
pub fn emit_plot_script(csv: &Path, kind: PlotKind) -> Result<String> {
    if !csv.is_file() {
        return Err(Error::Config(format!("CSV file {} not found", csv.display())));
    }
    let body = match kind {
        PlotKind::SchemeDiff => SCHEME_DIFF_PLOT,
        PlotKind::CondSweep => COND_SWEEP_PLOT,
        PlotKind::Snapshot => SNAPSHOT_PLOT,
    };
    let png = csv.with_extension("png");
    Ok(format!(
        "import csv\nimport matplotlib\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\n\nCSV = {:?}\n{body}\
plt.tight_layout()\nplt.savefig({:?}, dpi=150)\n",
        csv.display().to_string(),
        png.display().to_string()
    ))
}

/// Writes the plot script next to the CSV and returns its path.
pub fn cmd_plot(csv: &Path, kind: Option<PlotKind>) -> Result<PathBuf> {
    let header = fs::read_to_string(csv)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", csv.display())))?
        .lines()
        .next()
        .unwrap_or_default()
        .to_string();
    let kind = match kind.or_else(|| PlotKind::detect(&header)) {
        Some(k) => k,
        None => return Err(Error::Config(format!("cannot infer plot kind from {}", csv.display()))),
    };
    let script = emit_plot_script(csv, kind)?;
    let path = csv.with_extension("py");
    fs::write(&path, script)?;
    Ok(path)
}

/// Index of the largest empirical condition number among four reports.
pub fn empirical_dominant(reports: &[ConditionReport; 4]) -> Equation {
    Equation::ALL[argmax_first(&reports.map(|r| r.k_empirical))]
}
