//! Phase portraits near Σ rendered to SVG, with the polylines as CSV.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cycles::LimitCycle;
use crate::field::{sigma_regions, PiecewiseField, SegmentKind, SigmaSegment, Side};
use crate::flow::{IntegratorConfig, ReturnMap};
use crate::format::g17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Orbit,
    Cycle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub label: String,
    pub kind: CurveKind,
    pub side: Side,
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fold {
    pub x: f64,
    pub side: Side,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Portrait {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub segments: Vec<SigmaSegment>,
    pub folds: Vec<Fold>,
    pub curves: Vec<Curve>,
}

/// Σ partition, fold points, `orbits` half-return arcs per side around each
/// center and the two arcs of every cycle.
pub fn build_portrait(
    z: &PiecewiseField,
    centers: &[f64],
    radius: f64,
    cycles: &[LimitCycle],
    orbits: usize,
    cfg: &IntegratorConfig,
) -> Portrait {
    let lo = centers.iter().copied().fold(f64::INFINITY, f64::min) - radius;
    let hi = centers.iter().copied().fold(f64::NEG_INFINITY, f64::max) + radius;
    let segments = sigma_regions(z, (lo, hi));
    let mut folds: Vec<Fold> = [Side::Upper, Side::Lower]
        .into_iter()
        .flat_map(|side| {
            z.side(side)
                .y
                .restrict_sigma()
                .real_roots(lo, hi)
                .into_iter()
                .map(move |x| Fold { x, side })
        })
        .collect();
    folds.sort_by(|a, b| a.x.total_cmp(&b.x));

    let mut curves = Vec::new();
    let mut push_arc = |map: &ReturnMap, side: Side, x: f64, kind: CurveKind, label: String| {
        if let Ok(arc) = map.arc(side, x) {
            if arc.states.len() > 1 {
                curves.push(Curve {
                    label,
                    kind,
                    side,
                    points: arc.states,
                });
            }
        }
    };
    for (w, &c) in centers.iter().enumerate() {
        let Ok(map) = ReturnMap::new(z.clone(), c, *cfg) else {
            continue;
        };
        let map = map.with_window(c - 1.5 * radius, c + 1.5 * radius);
        for i in 1..=orbits {
            let x = c + 0.9 * radius * i as f64 / orbits as f64;
            for side in [Side::Upper, Side::Lower] {
                push_arc(&map, side, x, CurveKind::Orbit, format!("w{w}-o{i}"));
            }
        }
    }
    for (n, cyc) in cycles.iter().enumerate() {
        if let Ok(map) = ReturnMap::new(z.clone(), cyc.window_center, *cfg) {
            for side in [Side::Upper, Side::Lower] {
                push_arc(&map, side, cyc.x_star, CurveKind::Cycle, format!("cycle{n}"));
            }
        }
    }

    let ymax = curves
        .iter()
        .flat_map(|c| c.points.iter().map(|p| p[1].abs()))
        .fold(0.0, f64::max);
    let ymax = if ymax > 0.0 { 1.1 * ymax } else { 0.1 * radius };
    Portrait {
        x_range: (lo, hi),
        y_range: (-ymax, ymax),
        segments,
        folds,
        curves,
    }
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 24.0;

impl Portrait {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x_range.0) / (self.x_range.1 - self.x_range.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        MARGIN + (self.y_range.1 - y) / (self.y_range.1 - self.y_range.0) * (HEIGHT - 2.0 * MARGIN)
    }

    /// Sliding pieces of Σ are solid, crossing pieces dashed. The vertical
    /// axis is scaled independently of the horizontal one.
    pub fn to_svg(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        for c in &self.curves {
            let pts: Vec<String> = c
                .points
                .iter()
                .map(|p| format!("{:.2},{:.2}", self.px(p[0]), self.py(p[1])))
                .collect();
            let style = match c.kind {
                CurveKind::Orbit => r##"stroke="#8c8c8c" stroke-width="1""##,
                CurveKind::Cycle => r##"stroke="#c0392b" stroke-width="2""##,
            };
            let _ = writeln!(
                s,
                r#"<polyline class="{}" points="{}" fill="none" {style}/>"#,
                match c.kind {
                    CurveKind::Orbit => "orbit",
                    CurveKind::Cycle => "cycle",
                },
                pts.join(" ")
            );
        }
        let y0 = self.py(0.0);
        for seg in &self.segments {
            let dash = match seg.kind {
                SegmentKind::Crossing => r#" stroke-dasharray="6 4""#,
                SegmentKind::Degenerate => r#" stroke-dasharray="1 3""#,
                _ => "",
            };
            let _ = writeln!(
                s,
                r#"<line class="{}" x1="{:.2}" y1="{y0:.2}" x2="{:.2}" y2="{y0:.2}" stroke="black" stroke-width="2.5"{dash}/>"#,
                seg.kind.as_str(),
                self.px(seg.lo),
                self.px(seg.hi)
            );
        }
        for f in &self.folds {
            let color = match f.side {
                Side::Upper => "#1f618d",
                Side::Lower => "#b9770e",
            };
            let _ = writeln!(
                s,
                r#"<circle class="fold" cx="{:.2}" cy="{y0:.2}" r="4" fill="{color}"/>"#,
                self.px(f.x)
            );
        }
        s.push_str("</svg>\n");
        s
    }

    /// CSV with header `curve,kind,side,x,y`, one row per vertex.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "curve,kind,side,x,y")?;
        for c in &self.curves {
            let kind = match c.kind {
                CurveKind::Orbit => "orbit",
                CurveKind::Cycle => "cycle",
            };
            let side = match c.side {
                Side::Upper => "upper",
                Side::Lower => "lower",
            };
            for p in &c.points {
                writeln!(w, "{},{kind},{side},{},{}", c.label, g17(p[0]), g17(p[1]))?;
            }
        }
        Ok(())
    }
}
