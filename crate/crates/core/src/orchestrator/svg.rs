//! Plain SVG figures for run directories: the best drawing or block layout,
//! and best-so-far cost curves.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{OrchestratorError, RolloutRecord, RunRecord};
use crate::scene::{Frame, SceneState};

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn write(path: &Path, text: &str) -> Result<(), OrchestratorError> {
    std::fs::write(path, text).map_err(|e| OrchestratorError::io(path, e))
}

/// Draws the best rollout and the cost curve of one run into `dir`.
pub fn write_run_svgs(record: &RunRecord, dir: &Path) -> Result<Vec<PathBuf>, OrchestratorError> {
    let mut out = Vec::new();
    if let Some(rollout) = &record.best().best_rollout {
        let (name, text) = match rollout {
            RolloutRecord::Drawing { .. } => ("drawing.svg", drawing_svg(rollout)),
            RolloutRecord::Pushing { .. } => ("layout.svg", layout_svg(rollout)),
        };
        let path = dir.join(name);
        write(&path, &text)?;
        out.push(path);
    }
    let path = dir.join("curve.svg");
    write(&path, &curve_svg(&[run_curve(record)], &format!("{} seed {}", record.task, record.seed)))?;
    out.push(path);
    Ok(out)
}

/// Re-renders the figures of a persisted run.
pub fn render_run(dir: &Path) -> Result<Vec<PathBuf>, OrchestratorError> {
    let record = RunRecord::load(dir)?;
    write_run_svgs(&record, dir)
}

/// Cost curves of all seeds and the cost after each feedback round.
pub(crate) fn write_group_svgs(records: &[RunRecord], dir: &Path) -> Result<(), OrchestratorError> {
    std::fs::create_dir_all(dir).map_err(|e| OrchestratorError::io(dir, e))?;
    let Some(first) = records.first() else { return Ok(()) };
    let title = format!("{} / {} / {}", first.task, first.optimizer.name(), first.proposer);
    let curves: Vec<Vec<f64>> = records.iter().map(run_curve).collect();
    write(&dir.join("curves.svg"), &curve_svg(&curves, &title))?;
    let rounds = first.config.max_feedback + 1;
    let per_round: Vec<Vec<f64>> =
        records.iter().map(|r| (0..rounds).map(|k| r.cost_after_iteration(k)).collect()).collect();
    write(&dir.join("feedback.svg"), &feedback_svg(&per_round, &title))
}

/// Best-so-far cost over every evaluation of the run, across iterations.
fn run_curve(record: &RunRecord) -> Vec<f64> {
    let mut best = f64::INFINITY;
    record
        .iterations
        .iter()
        .flat_map(|i| i.evaluations.iter())
        .map(|e| {
            best = best.min(e.cost);
            best
        })
        .collect()
}

fn header(w: f64, h: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" \
         font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    )
}

fn drawing_svg(rollout: &RolloutRecord) -> String {
    let RolloutRecord::Drawing { strokes } = rollout else { return String::new() };
    let mut s = header(640.0, 480.0);
    s.push_str("<rect x=\"0.5\" y=\"0.5\" width=\"639\" height=\"479\" fill=\"none\" stroke=\"#ccc\"/>\n");
    for (i, k) in strokes.iter().enumerate() {
        let e = k.end();
        let _ = writeln!(
            s,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{}\" stroke-width=\"3\" stroke-linecap=\"round\"/>",
            k.start[0],
            k.start[1],
            e[0],
            e[1],
            PALETTE[i % PALETTE.len()]
        );
    }
    s.push_str("</svg>\n");
    s
}

fn color(f: &Frame) -> String {
    match f.color.as_slice() {
        [r, g, b, ..] => format!(
            "rgb({},{},{})",
            (r.clamp(0.0, 1.0) * 255.0) as u8,
            (g.clamp(0.0, 1.0) * 255.0) as u8,
            (b.clamp(0.0, 1.0) * 255.0) as u8
        ),
        _ => "#888".into(),
    }
}

fn layout_svg(rollout: &RolloutRecord) -> String {
    let RolloutRecord::Pushing { pusher, initial, final_scene, .. } = rollout else { return String::new() };
    let [[x0, x1], [y0, y1]] = initial.table_bounds;
    let scale = 600.0 / (x1 - x0).max(y1 - y0);
    let (w, h) = ((x1 - x0) * scale + 40.0, (y1 - y0) * scale + 40.0);
    // table y points up
    let px = |p: [f64; 2]| [20.0 + (p[0] - x0) * scale, 20.0 + (y1 - p[1]) * scale];
    let mut s = header(w, h);
    let _ = writeln!(
        s,
        "<rect x=\"20\" y=\"20\" width=\"{:.1}\" height=\"{:.1}\" fill=\"#f4f1ea\" stroke=\"#999\"/>",
        w - 40.0,
        h - 40.0
    );
    let frames = |scene: &SceneState, s: &mut String, dashed: bool| {
        for f in scene.frames.iter().filter(|f| f.size.len() >= 2) {
            let c = px(f.xy());
            let (sw, sh) = (f.size[0] * scale, f.size[1] * scale);
            let style = if dashed {
                "fill=\"none\" stroke=\"#777\" stroke-dasharray=\"4 3\"".to_string()
            } else {
                format!("fill=\"{}\" fill-opacity=\"0.85\" stroke=\"#333\"", color(f))
            };
            let _ = writeln!(
                s,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{sw:.2}\" height=\"{sh:.2}\" {style} \
                 transform=\"rotate({:.2} {:.2} {:.2})\"><title>{}</title></rect>",
                c[0] - sw / 2.0,
                c[1] - sh / 2.0,
                -f.z_rot.to_degrees(),
                c[0],
                c[1],
                f.name
            );
        }
    };
    frames(initial, &mut s, true);
    frames(final_scene, &mut s, false);
    if !pusher.is_empty() {
        let pts: Vec<String> = pusher
            .iter()
            .map(|&p| {
                let q = px(p);
                format!("{:.2},{:.2}", q[0], q[1])
            })
            .collect();
        let _ = writeln!(
            s,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>",
            pts.join(" ")
        );
    }
    s.push_str("</svg>\n");
    s
}

struct Axes {
    w: f64,
    h: f64,
    left: f64,
    top: f64,
    xmax: f64,
    ymax: f64,
}

impl Axes {
    fn new(xmax: f64, ymax: f64) -> Self {
        Self { w: 560.0, h: 320.0, left: 60.0, top: 30.0, xmax: xmax.max(1.0), ymax: ymax.max(1e-9) }
    }

    fn point(&self, x: f64, y: f64) -> [f64; 2] {
        [self.left + x / self.xmax * self.w, self.top + self.h - y / self.ymax * self.h]
    }

    fn frame(&self, title: &str, xlabel: &str) -> String {
        let mut s = header(self.left + self.w + 20.0, self.top + self.h + 50.0);
        let _ = writeln!(
            s,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333\"/>",
            self.left, self.top, self.w, self.h
        );
        let _ = writeln!(s, "<text x=\"{}\" y=\"18\">{}</text>", self.left, escape(title));
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{xlabel}</text>",
            self.left + self.w / 2.0,
            self.top + self.h + 36.0
        );
        let _ = writeln!(
            s,
            "<text x=\"14\" y=\"{}\" transform=\"rotate(-90 14 {})\" text-anchor=\"middle\">log10(1 + cost)</text>",
            self.top + self.h / 2.0,
            self.top + self.h / 2.0
        );
        for k in 0..=4 {
            let y = self.ymax * k as f64 / 4.0;
            let p = self.point(0.0, y);
            let _ = writeln!(
                s,
                "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{y:.2}</text>",
                self.left - 4.0,
                p[1] + 4.0
            );
        }
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>",
            self.left + self.w,
            self.top + self.h + 16.0,
            self.xmax
        );
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn log_cost(c: f64) -> f64 {
    if c.is_finite() {
        c.max(0.0).ln_1p() / std::f64::consts::LN_10
    } else {
        0.0
    }
}

fn curve_svg(curves: &[Vec<f64>], title: &str) -> String {
    let xmax = curves.iter().map(Vec::len).max().unwrap_or(1) as f64;
    let ymax = curves.iter().flatten().map(|&c| log_cost(c)).fold(0.0, f64::max);
    let axes = Axes::new(xmax, ymax);
    let mut s = axes.frame(title, "evaluations");
    for (i, c) in curves.iter().enumerate() {
        let pts: Vec<String> = c
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let p = axes.point((k + 1) as f64, log_cost(v));
                format!("{:.1},{:.1}", p[0], p[1])
            })
            .collect();
        let _ = writeln!(
            s,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>",
            pts.join(" "),
            PALETTE[i % PALETTE.len()]
        );
    }
    s.push_str("</svg>\n");
    s
}

fn feedback_svg(per_round: &[Vec<f64>], title: &str) -> String {
    let rounds = per_round.first().map_or(1, Vec::len);
    let ymax = per_round.iter().flatten().map(|&c| log_cost(c)).fold(0.0, f64::max);
    let axes = Axes::new((rounds.max(2) - 1) as f64, ymax);
    let mut s = axes.frame(title, "feedback rounds");
    for (i, r) in per_round.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<[f64; 2]> = r.iter().enumerate().map(|(k, &c)| axes.point(k as f64, log_cost(c))).collect();
        let line: Vec<String> = pts.iter().map(|p| format!("{:.1},{:.1}", p[0], p[1])).collect();
        let _ = writeln!(
            s,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-opacity=\"0.6\"/>",
            line.join(" ")
        );
        for p in pts {
            let _ = writeln!(s, "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"{color}\"/>", p[0], p[1]);
        }
    }
    s.push_str("</svg>\n");
    s
}
