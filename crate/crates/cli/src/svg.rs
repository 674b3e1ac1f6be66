//! Static SVG renderings: unfolded layouts and run overviews (start squares,
//! per-module path traces, final assembly footprint).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use assembly_core::layout::{UnfoldedLayout, MODULE_WIDTH};
use assembly_core::math::Pose2;
use assembly_core::scenario::Scenario;
use assembly_core::sim::RunResult;
use assembly_core::topology::ModuleId;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

fn color(id: ModuleId) -> &'static str {
    PALETTE[id.0 as usize % PALETTE.len()]
}

/// Scale: meters to SVG user units.
const SCALE: f64 = 1000.0;

struct Canvas {
    body: String,
    min_x: f64,
    min_y: f64,
    max_x: f64,
    max_y: f64,
}

impl Canvas {
    fn new() -> Self {
        Self {
            body: String::new(),
            min_x: f64::INFINITY,
            min_y: f64::INFINITY,
            max_x: f64::NEG_INFINITY,
            max_y: f64::NEG_INFINITY,
        }
    }

    fn cover(&mut self, x: f64, y: f64) {
        // SVG y grows downward; flip so +y is up in the figures.
        let (sx, sy) = (x * SCALE, -y * SCALE);
        self.min_x = self.min_x.min(sx);
        self.min_y = self.min_y.min(sy);
        self.max_x = self.max_x.max(sx);
        self.max_y = self.max_y.max(sy);
    }

    fn square(&mut self, pose: Pose2, fill: &str, opacity: f64, label: Option<ModuleId>) {
        let h = MODULE_WIDTH / 2.0;
        let corners = [(-h, -h), (h, -h), (h, h), (-h, h)];
        let mut points = String::new();
        for (cx, cy) in corners {
            let p = pose.transform_point(assembly_core::math::Vec2::new(cx, cy));
            self.cover(p.x, p.y);
            let _ = write!(points, "{:.2},{:.2} ", p.x * SCALE, -p.y * SCALE);
        }
        let _ = writeln!(
            self.body,
            r#"<polygon points="{}" fill="{fill}" fill-opacity="{opacity}" stroke="{fill}" stroke-width="1"/>"#,
            points.trim_end()
        );
        // Heading tick toward the TOP face.
        let tip = pose.transform_point(assembly_core::math::Vec2::new(h, 0.0));
        let _ = writeln!(
            self.body,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{fill}" stroke-width="1.5"/>"#,
            pose.x * SCALE,
            -pose.y * SCALE,
            tip.x * SCALE,
            -tip.y * SCALE
        );
        if let Some(id) = label {
            let _ = writeln!(
                self.body,
                r##"<text x="{:.2}" y="{:.2}" font-size="20" text-anchor="middle" fill="#333">{id}</text>"##,
                pose.x * SCALE,
                -pose.y * SCALE + 7.0
            );
        }
    }

    fn polyline(&mut self, points: &[(f64, f64)], stroke: &str) {
        if points.len() < 2 {
            return;
        }
        let mut attr = String::new();
        for &(x, y) in points {
            self.cover(x, y);
            let _ = write!(attr, "{:.2},{:.2} ", x * SCALE, -y * SCALE);
        }
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="2" stroke-opacity="0.8"/>"#,
            attr.trim_end()
        );
    }

    fn finish(self) -> String {
        let pad = 40.0;
        let (min_x, min_y) = (self.min_x - pad, self.min_y - pad);
        let (w, h) = (
            (self.max_x - self.min_x) + 2.0 * pad,
            (self.max_y - self.min_y) + 2.0 * pad,
        );
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{min_x:.2} {min_y:.2} {w:.2} {h:.2}\">\n\
             <rect x=\"{min_x:.2}\" y=\"{min_y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"#fdfdfd\"/>\n\
             {}</svg>\n",
            self.body
        )
    }
}

/// Diagram of the unfolded target: one square per module at its goal pose.
pub fn render_layout(layout: &UnfoldedLayout) -> String {
    let mut canvas = Canvas::new();
    for (&id, &pose) in layout.poses() {
        canvas.square(pose, color(id), 0.45, Some(id));
    }
    canvas.finish()
}

/// Run overview: faint start squares, path traces, solid final squares.
pub fn render_run(scenario: &Scenario, result: &RunResult) -> String {
    let mut canvas = Canvas::new();
    for (&id, &pose) in &scenario.modules {
        canvas.square(pose, color(id), 0.15, None);
    }
    let mut traces: BTreeMap<ModuleId, Vec<(f64, f64)>> = BTreeMap::new();
    for s in &result.trajectory {
        // Sample every 10th tick to keep files small; motion is smooth.
        if s.tick % 10 == 0 {
            traces
                .entry(s.module)
                .or_default()
                .push((s.pose.x, s.pose.y));
        }
    }
    for (&id, points) in &traces {
        canvas.polyline(points, color(id));
    }
    for (&id, &pose) in result.world.poses() {
        canvas.square(pose, color(id), 0.8, Some(id));
    }
    canvas.finish()
}
