//! Self-contained SVG line plots: polylines, axes, ticks and a legend.

use std::fmt::Write as _;
use std::path::Path;

use radial_mfg_core::Potential;
use serde::{Deserialize, Serialize};

use crate::format::{exact, sig};
use crate::scenario::{mass_target, Outcome, ScenarioRun};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PanelKind {
    Potential,
    Phi,
    Value,
    Density,
}

impl PanelKind {
    pub const ALL: [PanelKind; 4] = [PanelKind::Potential, PanelKind::Phi, PanelKind::Value, PanelKind::Density];

    pub fn name(self) -> &'static str {
        match self {
            PanelKind::Potential => "potential",
            PanelKind::Phi => "phi",
            PanelKind::Value => "value",
            PanelKind::Density => "density",
        }
    }

    fn axes(self) -> (&'static str, &'static str) {
        match self {
            PanelKind::Potential => ("r", "V(r)"),
            PanelKind::Phi => ("H", "phi(H)"),
            PanelKind::Value => ("r", "u(r)"),
            PanelKind::Density => ("r", "m(r)"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug)]
pub enum SvgError {
    Empty(PanelKind),
    Io(std::io::Error),
}

impl std::fmt::Display for SvgError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SvgError::Empty(k) => write!(f, "no curves for the {} panel", k.name()),
            SvgError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for SvgError {}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 52.0;
const MAX_POINTS: usize = 1500;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn within(range: Option<[f64; 2]>, x: f64) -> bool {
    range.map_or(true, |[lo, hi]| x >= lo && x <= hi)
}

/// Curves of one panel, one per solved `alpha` (a single curve for the potential).
pub fn panel_curves(run: &ScenarioRun, kind: PanelKind) -> Vec<Curve> {
    let range = if kind == PanelKind::Phi { None } else { run.config.output.plot_range };
    let radial = |values: &[f64]| -> Vec<(f64, f64)> {
        run.grid
            .nodes()
            .iter()
            .zip(values)
            .filter(|(r, _)| within(range, **r))
            .map(|(&r, &v)| (r, v))
            .collect()
    };
    let solved = || {
        run.runs.iter().filter_map(|r| match &r.outcome {
            Outcome::First(s) => Some((r.alpha, s.m.clone(), s.u.clone())),
            Outcome::Second(s) => Some((r.alpha, s.m.clone(), s.u.clone())),
            _ => None,
        })
    };
    let label = |a: f64| format!("alpha = {}", exact(a));
    match kind {
        PanelKind::Potential => {
            if !run.runs.iter().any(|r| matches!(r.outcome, Outcome::First(_) | Outcome::Second(_) | Outcome::NoSolution(_))) {
                return Vec::new();
            }
            let v: Vec<f64> = run.grid.nodes().iter().map(|&r| run.config.potential.value(r)).collect();
            vec![Curve {
                label: "V".into(),
                points: radial(&v),
            }]
        }
        PanelKind::Phi => run
            .runs
            .iter()
            .filter(|r| !r.phi.is_empty())
            .map(|r| Curve {
                label: label(r.alpha),
                points: r.phi.clone(),
            })
            .collect(),
        PanelKind::Value => solved()
            .map(|(a, _, u)| Curve {
                label: label(a),
                points: radial(&u),
            })
            .collect(),
        PanelKind::Density => solved()
            .map(|(a, m, _)| Curve {
                label: label(a),
                points: radial(&m),
            })
            .collect(),
    }
}

fn thin(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let finite: Vec<(f64, f64)> = points.iter().copied().filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
    if finite.len() <= MAX_POINTS {
        return finite;
    }
    let step = finite.len().div_ceil(MAX_POINTS);
    let mut out: Vec<(f64, f64)> = finite.iter().copied().step_by(step).collect();
    if out.last() != finite.last() {
        out.push(*finite.last().unwrap());
    }
    out
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-12 * lo.abs().max(hi.abs()).max(1e-300) {
        let pad = 0.5 * lo.abs().max(1.0);
        return (lo - pad, hi + pad);
    }
    let pad = 0.04 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Renders one panel; `reference` draws a dashed horizontal line (the phi target).
pub fn render(kind: PanelKind, title: &str, curves: &[Curve], reference: Option<f64>) -> Result<String, SvgError> {
    if curves.is_empty() || curves.iter().all(|c| c.points.is_empty()) {
        return Err(SvgError::Empty(kind));
    }
    let curves: Vec<(String, Vec<(f64, f64)>)> = curves.iter().map(|c| (c.label.clone(), thin(&c.points))).collect();
    let (x0, x1) = bounds(curves.iter().flat_map(|c| c.1.iter().map(|p| p.0)));
    let (y0, y1) = bounds(curves.iter().flat_map(|c| c.1.iter().map(|p| p.1)).chain(reference));
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;
    let (xlabel, ylabel) = kind.axes();

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="13">{}</text>"#, LEFT + pw / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 18.0,
            sig(xv, 4)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            py + 4.0,
            sig(yv, 4)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{xlabel}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{ylabel}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );
    if let Some(y) = reference {
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#555" stroke-dasharray="4 3"/>"##,
            sy(y),
            LEFT + pw,
            sy(y)
        );
    }
    for (k, (label, pts)) in curves.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        );
        let ly = TOP + 14.0 + 18.0 * k as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the panel for a run and writes it; nothing is written when the panel is empty.
pub fn emit_svg(run: &ScenarioRun, kind: PanelKind, path: &Path) -> Result<(), SvgError> {
    let curves = panel_curves(run, kind);
    let reference = (kind == PanelKind::Phi).then(|| mass_target(&run.config));
    let title = format!("{}: {}", run.config.name, kind.name());
    let text = render(kind, &title, &curves, reference)?;
    std::fs::write(path, text).map_err(SvgError::Io)
}
