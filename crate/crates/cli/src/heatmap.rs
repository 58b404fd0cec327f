//! SVG heatmaps of a metric over two factors of the experiment grid.

use std::fmt::{self, Write};
use std::path::Path;

use friction_marl::MetricsRecord;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::io::write_atomic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factor {
    Alpha,
    Sigma,
    Epsilon,
}

impl Factor {
    fn level(self, r: &MetricsRecord) -> f64 {
        match self {
            Factor::Alpha => r.alpha,
            Factor::Sigma => r.sigma,
            Factor::Epsilon => r.epsilon,
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Factor::Alpha => "alpha",
            Factor::Sigma => "sigma",
            Factor::Epsilon => "epsilon",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    RewardGap,
    ConvergenceTime,
    PolicyVariance,
    ParetoInefficiency,
    MeasuredAlignment,
    TheoreticalFriction,
}

impl Metric {
    /// Value of the metric for one run; "never" converges at `horizon`.
    fn value(self, r: &MetricsRecord, horizon: usize) -> Option<f64> {
        let v = match self {
            Metric::RewardGap => r.reward_gap,
            Metric::ConvergenceTime => r.convergence_time.map(|c| c.or_horizon(horizon) as f64),
            Metric::PolicyVariance => r.policy_variance,
            Metric::ParetoInefficiency => r.pareto_inefficiency,
            Metric::MeasuredAlignment => r.measured_alignment,
            Metric::TheoreticalFriction => Some(r.theoretical_friction),
        };
        v.filter(|x| x.is_finite())
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::RewardGap => "reward_gap",
            Metric::ConvergenceTime => "convergence_time",
            Metric::PolicyVariance => "policy_variance",
            Metric::ParetoInefficiency => "pareto_inefficiency",
            Metric::MeasuredAlignment => "measured_alignment",
            Metric::TheoreticalFriction => "theoretical_friction",
        })
    }
}

/// Mean metric per cell of a two-factor grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub x: Factor,
    pub y: Factor,
    pub metric: Metric,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// `cells[j][i]` is the mean at `(xs[i], ys[j])`.
    pub cells: Vec<Vec<f64>>,
}

fn levels(records: &[MetricsRecord], f: Factor) -> Vec<f64> {
    let mut v: Vec<f64> = records.iter().map(|r| f.level(r)).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

impl Heatmap {
    /// Average `metric` over replications and the third factor. Every
    /// `(x, y)` pair of observed levels must hold at least one value.
    pub fn from_records(records: &[MetricsRecord], x: Factor, y: Factor, metric: Metric, horizon: usize) -> Result<Self> {
        if x == y {
            return Err(CliError::config(format!("heatmap axes must differ (both {x})")));
        }
        if records.is_empty() {
            return Err(CliError::config("no records to plot"));
        }
        let xs = levels(records, x);
        let ys = levels(records, y);
        let mut sums = vec![vec![(0.0, 0usize); xs.len()]; ys.len()];
        for r in records {
            let Some(v) = metric.value(r, horizon) else { continue };
            let i = xs.iter().position(|&l| l == x.level(r)).expect("level present");
            let j = ys.iter().position(|&l| l == y.level(r)).expect("level present");
            sums[j][i].0 += v;
            sums[j][i].1 += 1;
        }
        let mut missing = Vec::new();
        for (j, row) in sums.iter().enumerate() {
            for (i, &(_, n)) in row.iter().enumerate() {
                if n == 0 {
                    missing.push((xs[i], ys[j]));
                }
            }
        }
        if !missing.is_empty() {
            return Err(CliError::Grid { missing });
        }
        let cells = sums
            .into_iter()
            .map(|row| row.into_iter().map(|(s, n)| s / n as f64).collect())
            .collect();
        Ok(Self {
            x,
            y,
            metric,
            xs,
            ys,
            cells,
        })
    }

    pub fn range(&self) -> (f64, f64) {
        self.cells.iter().flatten().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    pub fn to_svg(&self) -> String {
        const CELL_W: usize = 80;
        const CELL_H: usize = 44;
        const LEFT: usize = 110;
        const TOP: usize = 56;
        const BOTTOM: usize = 64;
        const BAR_W: usize = 18;

        let (nx, ny) = (self.xs.len(), self.ys.len());
        let grid_w = nx * CELL_W;
        let grid_h = ny * CELL_H;
        let bar_x = LEFT + grid_w + 30;
        let width = bar_x + BAR_W + 100;
        let height = TOP + grid_h + BOTTOM;
        let (lo, hi) = self.range();
        let span = hi - lo;
        let shade = |v: f64| if span > 0.0 { (v - lo) / span } else { 0.0 };

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r##"<rect width="{width}" height="{height}" fill="#ffffff"/>"##);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="28" text-anchor="middle" font-size="15">{} by {} and {}</text>"#,
            LEFT + grid_w / 2,
            self.metric,
            self.x,
            self.y
        );
        // rows run upward so larger y levels sit on top
        for (j, row) in self.cells.iter().enumerate() {
            let top = TOP + (ny - 1 - j) * CELL_H;
            for (i, &v) in row.iter().enumerate() {
                let left = LEFT + i * CELL_W;
                let t = shade(v);
                let _ = writeln!(
                    s,
                    r##"<rect x="{left}" y="{top}" width="{CELL_W}" height="{CELL_H}" fill="{}" stroke="#ffffff"/>"##,
                    color(t)
                );
                let _ = writeln!(
                    s,
                    r#"<text x="{}" y="{}" text-anchor="middle" fill="{}">{}</text>"#,
                    left + CELL_W / 2,
                    top + CELL_H / 2 + 4,
                    if t > 0.5 { "#ffffff" } else { "#1a1a1a" },
                    fmt_value(v)
                );
            }
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
                LEFT - 8,
                top + CELL_H / 2 + 4,
                self.ys[j]
            );
        }
        for (i, x) in self.xs.iter().enumerate() {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle">{x}</text>"#,
                LEFT + i * CELL_W + CELL_W / 2,
                TOP + grid_h + 18
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#,
            LEFT + grid_w / 2,
            TOP + grid_h + 44,
            self.x
        );
        let (yx, yy) = (LEFT - 70, TOP + grid_h / 2);
        let _ = writeln!(
            s,
            r#"<text x="{yx}" y="{yy}" text-anchor="middle" font-size="13" transform="rotate(-90 {yx} {yy})">{}</text>"#,
            self.y
        );

        if span > 0.0 {
            let _ = writeln!(
                s,
                r#"<defs><linearGradient id="scale" x1="0" y1="1" x2="0" y2="0"><stop offset="0" stop-color="{}"/><stop offset="1" stop-color="{}"/></linearGradient></defs>"#,
                color(0.0),
                color(1.0)
            );
            let _ = writeln!(
                s,
                r##"<rect x="{bar_x}" y="{TOP}" width="{BAR_W}" height="{grid_h}" fill="url(#scale)" stroke="#999999"/>"##
            );
            let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, bar_x + BAR_W + 6, TOP + 10, fmt_value(hi));
            let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, bar_x + BAR_W + 6, TOP + grid_h, fmt_value(lo));
        } else {
            let _ = writeln!(
                s,
                r##"<rect x="{bar_x}" y="{TOP}" width="{BAR_W}" height="{CELL_H}" fill="{}" stroke="#999999"/>"##,
                color(0.0)
            );
            let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, bar_x + BAR_W + 6, TOP + 16, fmt_value(lo));
            let _ = writeln!(s, r#"<text x="{}" y="{}">constant</text>"#, bar_x + BAR_W + 6, TOP + 32);
        }
        s.push_str("</svg>\n");
        s
    }
}

/// Linear ramp from near-white to dark blue.
fn color(t: f64) -> String {
    const LIGHT: [f64; 3] = [247.0, 251.0, 255.0];
    const DARK: [f64; 3] = [8.0, 48.0, 107.0];
    let t = t.clamp(0.0, 1.0);
    let c: Vec<u8> = LIGHT.iter().zip(DARK).map(|(a, b)| (a + (b - a) * t).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn fmt_value(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

pub fn emit_heatmap(
    records: &[MetricsRecord],
    x: Factor,
    y: Factor,
    metric: Metric,
    horizon: usize,
    out: &Path,
) -> Result<Heatmap> {
    let map = Heatmap::from_records(records, x, y, metric, horizon)?;
    write_atomic(out, map.to_svg().as_bytes())?;
    Ok(map)
}
