//! CSV tables, the text summary and the JSON report.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use radial_mfg_core::first_order::{Nonexistence, RadialSolution};
use serde::Serialize;

use crate::config::{Order, ScenarioConfig};
use crate::format::{csv_number, exact};
use crate::scenario::{mass_target, AlphaRun, Outcome, ScenarioRun, SecondOrderSolution};

pub const FIRST_ORDER_HEADER: &str = "r,m,u,hj_residual,current_dev";
pub const SECOND_ORDER_HEADER: &str = "r,rho,m,u,ode_residual";

/// The `#` block shared by every solution table.
pub fn metadata(cfg: &ScenarioConfig, alpha: f64, h: f64) -> String {
    let g = &cfg.grid;
    let order = match cfg.solver.order {
        Order::First => "first",
        Order::Second => "second",
    };
    let grading = serde_json::to_value(g.grading)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default();
    format!(
        "# scenario = {}\n# order = {order}\n# H = {}\n# j = {}\n# alpha = {}\n# beta = {}\n# d = {}\n\
         # grid = {grading} [{}, {}] n = {}\n# potential = {}\n# solver = radial-mfg {}\n",
        cfg.name,
        exact(h),
        exact(cfg.problem.current),
        exact(alpha),
        exact(cfg.problem.beta),
        cfg.problem.dim,
        exact(g.r_min),
        exact(g.r_max),
        g.n,
        cfg.potential.describe(),
        env!("CARGO_PKG_VERSION"),
    )
}

fn row(out: &mut impl Write, cells: &[f64]) -> io::Result<()> {
    let line: Vec<String> = cells.iter().map(|&x| csv_number(x)).collect();
    writeln!(out, "{}", line.join(","))
}

pub fn write_first_order_csv(out: &mut impl Write, cfg: &ScenarioConfig, sol: &RadialSolution) -> io::Result<()> {
    out.write_all(metadata(cfg, sol.alpha, sol.h).as_bytes())?;
    writeln!(out, "{FIRST_ORDER_HEADER}")?;
    for (i, &r) in sol.grid.nodes().iter().enumerate() {
        row(out, &[r, sol.m[i], sol.u[i], sol.hj_residual[i], sol.current_deviation[i]])?;
    }
    Ok(())
}

pub fn write_second_order_csv(out: &mut impl Write, cfg: &ScenarioConfig, sol: &SecondOrderSolution) -> io::Result<()> {
    let s = &sol.state;
    out.write_all(metadata(cfg, s.alpha, s.h).as_bytes())?;
    let boundary = serde_json::to_string(&cfg.solver.boundary).expect("boundary serializes");
    writeln!(out, "# boundary = {boundary}")?;
    writeln!(out, "{SECOND_ORDER_HEADER}")?;
    for (i, &r) in s.grid.nodes().iter().enumerate() {
        row(out, &[r, s.rho[i], sol.m[i], sol.u[i], sol.residual[i]])?;
    }
    Ok(())
}

pub fn write_phi_csv(out: &mut impl Write, runs: &[AlphaRun]) -> io::Result<()> {
    writeln!(out, "alpha,h,phi")?;
    for run in runs {
        for &(h, phi) in &run.phi {
            row(out, &[run.alpha, h, phi])?;
        }
    }
    Ok(())
}

fn write_nonexistence_csv(out: &mut impl Write, cfg: &ScenarioConfig, alpha: f64, none: &Nonexistence) -> io::Result<()> {
    writeln!(out, "# scenario = {}\n# alpha = {}\n# reason = {}", cfg.name, exact(alpha), none.reason)?;
    writeln!(out, "# target = {}", exact(none.target))?;
    if let Some(m) = none.critical_mass {
        writeln!(out, "# critical_mass = {}", exact(m))?;
    }
    writeln!(out, "h,mass")?;
    for &(h, m) in &none.curve {
        row(out, &[h, m])?;
    }
    Ok(())
}

/// Per-`alpha` entry of `report.json`.
#[derive(Clone, Debug, Serialize)]
pub struct ReportEntry {
    pub alpha: f64,
    pub status: &'static str,
    pub h: Option<f64>,
    pub max_hj_residual: Option<f64>,
    pub max_current_deviation: Option<f64>,
    pub max_ode_residual: Option<f64>,
    pub mass_error: Option<f64>,
    pub truncation_shift: Option<f64>,
    pub truncation_warning: bool,
    pub critical_h: Option<f64>,
    pub critical_mass: Option<f64>,
    pub target_mass: f64,
    pub message: Option<String>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub scenario: String,
    pub version: &'static str,
    pub exit_code: i32,
    pub entries: Vec<ReportEntry>,
}

fn interior_max(v: &[f64]) -> f64 {
    if v.len() < 3 {
        return v.iter().fold(0.0, |a, x| a.max(x.abs()));
    }
    v[1..v.len() - 1].iter().fold(0.0, |a, x| a.max(x.abs()))
}

pub fn report(run: &ScenarioRun) -> Report {
    let target = mass_target(&run.config);
    let entries = run
        .runs
        .iter()
        .map(|r| {
            let mut e = ReportEntry {
                alpha: r.alpha,
                status: "solved",
                h: r.h(),
                max_hj_residual: None,
                max_current_deviation: None,
                max_ode_residual: None,
                mass_error: None,
                truncation_shift: None,
                truncation_warning: false,
                critical_h: None,
                critical_mass: None,
                target_mass: target,
                message: None,
                warnings: Vec::new(),
            };
            match &r.outcome {
                Outcome::First(s) => {
                    e.max_hj_residual = Some(s.max_hj_residual());
                    e.max_current_deviation = Some(s.max_current_deviation());
                    e.mass_error = Some((s.mass - 1.0).abs());
                    e.truncation_shift = s.truncation.as_ref().map(|t| t.shift);
                    e.truncation_warning = s.truncation.as_ref().is_some_and(|t| t.warn);
                    e.warnings = s.warnings.clone();
                }
                Outcome::Second(s) => {
                    e.max_ode_residual = Some(interior_max(&s.residual));
                    e.mass_error = Some(s.mass_error);
                    e.warnings = s.state.diagnostics.warnings.clone();
                }
                Outcome::NoSolution(n) => {
                    e.status = "no_solution";
                    e.critical_h = n.critical_h;
                    e.critical_mass = n.critical_mass;
                    e.target_mass = n.target;
                    e.message = Some(n.reason.clone());
                }
                Outcome::Failed(msg) => {
                    e.status = "numerical_failure";
                    e.message = Some(msg.clone());
                }
            }
            e
        })
        .collect();
    Report {
        scenario: run.config.name.clone(),
        version: env!("CARGO_PKG_VERSION"),
        exit_code: run.exit_code(),
        entries,
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(exact).unwrap_or_else(|| "-".into())
}

/// Human-readable summary; `H` is printed exactly as in the CSV metadata.
pub fn summary(run: &ScenarioRun) -> String {
    let rep = report(run);
    let mut s = format!("scenario {} (radial-mfg {})\n", rep.scenario, rep.version);
    for e in &rep.entries {
        s += &format!("alpha = {}: {}\n", exact(e.alpha), e.status);
        if let Some(h) = e.h {
            s += &format!("  H = {}\n", exact(h));
        }
        for (label, v) in [
            ("max hj residual", e.max_hj_residual),
            ("max current deviation", e.max_current_deviation),
            ("max ode residual", e.max_ode_residual),
            ("mass error", e.mass_error),
            ("truncation shift", e.truncation_shift),
        ] {
            if v.is_some() {
                s += &format!("  {label} = {}\n", opt(v));
            }
        }
        if e.status == "no_solution" {
            s += &format!("  boundary mass = {} vs target = {}\n", opt(e.critical_mass), exact(e.target_mass));
        }
        if let Some(m) = &e.message {
            s += &format!("  {m}\n");
        }
        if e.truncation_warning {
            s += "  warning: H is sensitive to the truncation radius\n";
        }
        for w in &e.warnings {
            s += &format!("  warning: {w}\n");
        }
    }
    s += &format!("exit code {}\n", rep.exit_code);
    s
}

pub fn alpha_stem(name: &str, alpha: f64) -> String {
    format!("{name}_alpha_{}", exact(alpha))
}

fn create(path: &Path, write: impl FnOnce(&mut io::BufWriter<std::fs::File>) -> io::Result<()>) -> io::Result<()> {
    let mut f = io::BufWriter::new(std::fs::File::create(path)?);
    write(&mut f)?;
    f.flush()
}

/// Writes the CSV tables plus summary and report as configured; returns the paths written.
pub fn write_tables(run: &ScenarioRun, dir: &Path) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let cfg = &run.config;
    let mut written = Vec::new();
    if cfg.output.emit_csv {
        for r in &run.runs {
            let stem = alpha_stem(&cfg.name, r.alpha);
            let path = match &r.outcome {
                Outcome::First(s) => {
                    let p = dir.join(format!("{stem}.csv"));
                    create(&p, |f| write_first_order_csv(f, cfg, s))?;
                    Some(p)
                }
                Outcome::Second(s) => {
                    let p = dir.join(format!("{stem}.csv"));
                    create(&p, |f| write_second_order_csv(f, cfg, s))?;
                    Some(p)
                }
                Outcome::NoSolution(n) => {
                    let p = dir.join(format!("{stem}_nonexistence.csv"));
                    create(&p, |f| write_nonexistence_csv(f, cfg, r.alpha, n))?;
                    Some(p)
                }
                Outcome::Failed(_) => None,
            };
            written.extend(path);
        }
        if run.runs.iter().any(|r| !r.phi.is_empty()) {
            let p = dir.join(format!("{}_phi.csv", cfg.name));
            create(&p, |f| write_phi_csv(f, &run.runs))?;
            written.push(p);
        }
    }
    if cfg.output.emit_report {
        let p = dir.join(format!("{}_summary.txt", cfg.name));
        std::fs::write(&p, summary(run))?;
        written.push(p);
        let p = dir.join(format!("{}_report.json", cfg.name));
        let json = serde_json::to_string_pretty(&report(run)).expect("report serializes");
        std::fs::write(&p, json + "\n")?;
        written.push(p);
    }
    Ok(written)
}
