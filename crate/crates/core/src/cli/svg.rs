//! Gantt chart of a schedule as standalone SVG.

use std::collections::HashMap;
use std::fmt::Write;

use crate::packing::Schedule;

/// Width of the time axis in pixels.
pub const PLOT_WIDTH: f64 = 1000.0;
const LABEL_WIDTH: f64 = 70.0;
const LANE_HEIGHT: f64 = 24.0;
const LANE_GAP: f64 = 6.0;
const TOP: f64 = 10.0;
const AXIS_HEIGHT: f64 = 30.0;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Renders one lane per core, big cores on top. Each process keeps one
/// colour across all of its segments.
pub fn render(s: &Schedule) -> String {
    let span = if s.makespan > 0.0 { s.makespan } else { 1.0 };
    let scale = PLOT_WIDTH / span;
    let lanes = s.big_cores.len() + s.small_cores.len();
    let plot_height = lanes as f64 * (LANE_HEIGHT + LANE_GAP);
    let width = LABEL_WIDTH + PLOT_WIDTH + 20.0;
    let height = TOP + plot_height + AXIS_HEIGHT;

    let mut colours: HashMap<&str, String> = HashMap::new();
    for (_, _, segs) in s.cores() {
        for seg in segs {
            let n = colours.len();
            colours
                .entry(seg.process.as_str())
                .or_insert_with(|| format!("hsl({:.1},65%,60%)", (n as f64 * 137.508) % 360.0));
        }
    }

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    for (lane, (kind, index, segs)) in s.cores().enumerate() {
        let y = TOP + lane as f64 * (LANE_HEIGHT + LANE_GAP);
        let _ = writeln!(
            out,
            r#"<text x="4" y="{:.3}">{kind} {index}</text>"#,
            y + LANE_HEIGHT * 0.7
        );
        let _ = writeln!(
            out,
            r##"<rect class="lane" x="{LABEL_WIDTH}" y="{y:.3}" width="{PLOT_WIDTH}" height="{LANE_HEIGHT}" fill="#f2f2f2"/>"##
        );
        for seg in segs {
            let id = escape(&seg.process);
            let _ = writeln!(
                out,
                r#"<rect class="segment" data-process="{id}" x="{:.3}" y="{y:.3}" width="{:.3}" height="{LANE_HEIGHT}" fill="{}" stroke="black" stroke-width="0.5"><title>{id} [{}, {}]</title></rect>"#,
                LABEL_WIDTH + seg.start * scale,
                seg.duration() * scale,
                colours[seg.process.as_str()],
                seg.start,
                seg.end,
            );
        }
    }
    let axis_y = TOP + plot_height;
    let end_x = LABEL_WIDTH + s.makespan * scale;
    let _ = writeln!(
        out,
        r#"<line class="axis" x1="{LABEL_WIDTH}" y1="{axis_y:.3}" x2="{:.3}" y2="{axis_y:.3}" stroke="black"/>"#,
        LABEL_WIDTH + PLOT_WIDTH
    );
    for i in 0..=4 {
        let t = span * i as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">{}</text>"#,
            LABEL_WIDTH + t * scale,
            axis_y + 15.0,
            format_tick(t)
        );
    }
    let _ = writeln!(
        out,
        r#"<line class="makespan" x1="{end_x:.3}" y1="{TOP}" x2="{end_x:.3}" y2="{axis_y:.3}" stroke="red" stroke-dasharray="4 2"/>"#
    );
    out.push_str("</svg>\n");
    out
}

fn format_tick(t: f64) -> String {
    let s = format!("{t:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}
