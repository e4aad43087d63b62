//! SVG plot of both loss curves over the parameter space, with the
//! relevance partition shaded and loss crossings marked.
//!
//! The document has a fixed `viewBox`, five ticks per axis and one polyline
//! per action sampled on a uniform grid. `a0` is drawn dotted, `a1` solid.
//! Output is deterministic except for the version comment on line 2.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::loss::{Action, ActionPair, LossSpec};
use crate::partition::RelevancePartition;
use crate::region::RegionSet;

pub const DEFAULT_WIDTH: u32 = 720;
pub const DEFAULT_HEIGHT: u32 = 440;
const TICKS: usize = 5;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 56.0;
const NEGLIGIBLE_FILL: &str = "#d9ead3";
const RELEVANT_FILL: &str = "#f4cccc";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlotSpec {
    pub width: u32,
    pub height: u32,
    /// Points at which each curve is sampled, space ends included.
    pub grid: usize,
}

impl Default for PlotSpec {
    fn default() -> Self {
        PlotSpec {
            width: DEFAULT_WIDTH,
            height: DEFAULT_HEIGHT,
            grid: crate::config::DEFAULT_PLOT_GRID,
        }
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Tick label: at most three decimals, trailing zeros dropped.
fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    match s {
        "-0" | "" => "0".to_string(),
        s => s.to_string(),
    }
}

struct Frame {
    lo: f64,
    hi: f64,
    ymax: f64,
    width: f64,
    height: f64,
}

impl Frame {
    fn x(&self, theta: f64) -> f64 {
        MARGIN_LEFT + (theta - self.lo) / (self.hi - self.lo) * (self.width - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, loss: f64) -> f64 {
        self.height - MARGIN_BOTTOM - loss / self.ymax * (self.height - MARGIN_TOP - MARGIN_BOTTOM)
    }

    fn bottom(&self) -> f64 {
        self.height - MARGIN_BOTTOM
    }

    fn right(&self) -> f64 {
        self.width - MARGIN_RIGHT
    }
}

fn shade(out: &mut String, frame: &Frame, set: &RegionSet, fill: &str, class: &str) {
    for iv in set.intervals() {
        let (x0, x1) = (frame.x(iv.lo), frame.x(iv.hi));
        // Single points get a hairline so they stay visible.
        let w = (x1 - x0).max(1.0);
        let _ = writeln!(
            out,
            r#"  <rect class="{class}" x="{x0:.3}" y="{MARGIN_TOP:.3}" width="{w:.3}" height="{:.3}" fill="{fill}"/>"#,
            frame.bottom() - MARGIN_TOP
        );
    }
}

pub fn render_svg(
    spec: &LossSpec,
    partition: &RelevancePartition,
    actions: &ActionPair,
    plot: &PlotSpec,
) -> Result<String> {
    if plot.grid < 2 {
        return Err(Error::parameter(format!(
            "plot grid needs at least 2 points, got {}",
            plot.grid
        )));
    }
    if plot.width < 200 || plot.height < 150 {
        return Err(Error::parameter("plot must be at least 200×150 pixels"));
    }
    let grid = spec.space.uniform_grid(plot.grid);
    let mut curves = Vec::with_capacity(2);
    for action in [Action::A0, Action::A1] {
        let values = grid
            .iter()
            .map(|&t| spec.evaluate(t, action))
            .collect::<Result<Vec<f64>>>()?;
        curves.push(values);
    }
    let peak = curves.iter().flatten().fold(0.0f64, |m, v| m.max(*v));
    let frame = Frame {
        lo: spec.space.lo,
        hi: spec.space.hi,
        ymax: if peak > 0.0 { peak * 1.05 } else { 1.0 },
        width: plot.width as f64,
        height: plot.height as f64,
    };

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(out, "<!-- relevance {} -->", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w} {h}" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#,
        w = plot.width,
        h = plot.height
    );
    let _ = writeln!(
        out,
        r#"  <rect x="0" y="0" width="{}" height="{}" fill="white"/>"#,
        plot.width, plot.height
    );

    shade(
        &mut out,
        &frame,
        &partition.negligible,
        NEGLIGIBLE_FILL,
        "region-negligible",
    );
    shade(&mut out, &frame, &partition.relevant, RELEVANT_FILL, "region-relevant");

    // Axes and ticks.
    let _ = writeln!(
        out,
        r#"  <path class="axes" d="M{l:.3},{t:.3} L{l:.3},{b:.3} L{r:.3},{b:.3}" fill="none" stroke="black"/>"#,
        l = MARGIN_LEFT,
        t = MARGIN_TOP,
        b = frame.bottom(),
        r = frame.right()
    );
    for i in 0..TICKS {
        let frac = i as f64 / (TICKS - 1) as f64;
        let theta = frame.lo + frac * (frame.hi - frame.lo);
        let x = frame.x(theta);
        let _ = writeln!(
            out,
            r#"  <line class="xtick" x1="{x:.3}" y1="{b:.3}" x2="{x:.3}" y2="{:.3}" stroke="black"/>"#,
            frame.bottom() + 5.0,
            b = frame.bottom()
        );
        let _ = writeln!(
            out,
            r#"  <text x="{x:.3}" y="{:.3}" text-anchor="middle">{}</text>"#,
            frame.bottom() + 19.0,
            tick_label(theta)
        );
        let loss = frac * frame.ymax;
        let y = frame.y(loss);
        let _ = writeln!(
            out,
            r#"  <line class="ytick" x1="{:.3}" y1="{y:.3}" x2="{MARGIN_LEFT:.3}" y2="{y:.3}" stroke="black"/>"#,
            MARGIN_LEFT - 5.0
        );
        let _ = writeln!(
            out,
            r#"  <text x="{:.3}" y="{:.3}" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 8.0,
            y + 4.0,
            tick_label(loss)
        );
    }
    let _ = writeln!(
        out,
        r#"  <text x="{:.3}" y="{:.3}" text-anchor="middle">effect θ</text>"#,
        0.5 * (MARGIN_LEFT + frame.right()),
        frame.height - 12.0
    );
    let _ = writeln!(
        out,
        r#"  <text x="16" y="{:.3}" text-anchor="middle" transform="rotate(-90 16 {:.3})">loss</text>"#,
        0.5 * (MARGIN_TOP + frame.bottom()),
        0.5 * (MARGIN_TOP + frame.bottom())
    );

    // Curves.
    for (idx, (action, label)) in [(Action::A0, &actions.a0_label), (Action::A1, &actions.a1_label)]
        .into_iter()
        .enumerate()
    {
        let points: Vec<String> = grid
            .iter()
            .zip(&curves[idx])
            .map(|(&t, &v)| format!("{:.3},{:.3}", frame.x(t), frame.y(v)))
            .collect();
        let dash = if action == Action::A0 {
            r#" stroke-dasharray="2,4""#
        } else {
            ""
        };
        let _ = writeln!(
            out,
            r#"  <polyline class="curve-{action}" points="{}" fill="none" stroke="black" stroke-width="2"{dash}><title>{action}: {}</title></polyline>"#,
            points.join(" "),
            escape(label)
        );
        let ly = MARGIN_TOP - 22.0 + 12.0 * idx as f64;
        let lx = frame.right() - 220.0;
        let _ = writeln!(
            out,
            r#"  <line x1="{lx:.3}" y1="{ly:.3}" x2="{:.3}" y2="{ly:.3}" stroke="black" stroke-width="2"{dash}/>"#,
            lx + 24.0
        );
        let _ = writeln!(
            out,
            r#"  <text class="legend" x="{:.3}" y="{:.3}">{action}: {}</text>"#,
            lx + 30.0,
            ly + 4.0,
            escape(label)
        );
    }

    // Crossings.
    for &c in &partition.crossings {
        let v = spec.evaluate(c, Action::A0)?;
        let (x, y) = (frame.x(c), frame.y(v));
        let _ = writeln!(
            out,
            r#"  <circle class="crossing" cx="{x:.3}" cy="{y:.3}" r="4" fill="white" stroke="black"/>"#
        );
        let _ = writeln!(
            out,
            r#"  <text class="crossing-label" x="{x:.3}" y="{:.3}" text-anchor="middle">{c:.3}</text>"#,
            y - 9.0
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
