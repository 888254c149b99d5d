//! Deterministic SVG output for a [`DlLayout`].
//!
//! The figure has a scatter panel (level against jittered height, gray
//! parent-child segments under colored dots), a right sidebar with the
//! 100-cell color bar and a per-bin count bar chart, and the thickness range
//! in the top-right corner. Only `svg`, `g`, `circle`, `line`, `rect` and
//! `text` elements are emitted: one `line` per tree edge, one `circle` per
//! node, one `rect` per color cell and per non-empty histogram bin. Axes are
//! labelled with text only, so those counts hold exactly.

use std::fmt::Write as _;

use crate::layout::{ColorMap, DlLayout, BIN_COUNT};

#[derive(Debug, Clone, PartialEq)]
pub struct RenderOptions {
    pub width: u32,
    pub height: u32,
    pub dot_radius: f64,
    pub margin_left: u32,
    pub margin_right: u32,
    pub margin_top: u32,
    pub margin_bottom: u32,
    pub sidebar_width: u32,
    pub axis_labels: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            width: 1000,
            height: 800,
            dot_radius: 4.0,
            margin_left: 70,
            margin_right: 20,
            margin_top: 50,
            margin_bottom: 60,
            sidebar_width: 220,
            axis_labels: true,
        }
    }
}

impl RenderOptions {
    pub fn validate(&self) -> Result<(), String> {
        let min_w = self.margin_left + self.margin_right + self.sidebar_width + 20;
        let min_h = self.margin_top + self.margin_bottom + 20;
        if self.width < min_w {
            return Err(format!("width must be at least {min_w}px"));
        }
        if self.height < min_h {
            return Err(format!("height must be at least {min_h}px"));
        }
        if !(self.dot_radius > 0.0 && self.dot_radius.is_finite()) {
            return Err("dot radius must be positive".into());
        }
        Ok(())
    }
}

const EDGE_GRAY: &str = "#9a9a9a";
const PHANTOM_GRAY: &str = "#808080";

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Formats the corner annotation, e.g. `0.58–3.97 mm`.
pub fn range_label(range: Option<(f64, f64)>) -> String {
    match range {
        Some((lo, hi)) => format!("{lo:.2}\u{2013}{hi:.2} mm"),
        None => "no thickness".to_string(),
    }
}

struct Frame {
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
    pad: f64,
    max_level: usize,
    y_lo: f64,
    y_hi: f64,
}

impl Frame {
    fn x(&self, level: f64) -> f64 {
        if self.max_level == 0 {
            (self.left + self.right) / 2.0
        } else {
            self.left + self.pad + level / self.max_level as f64 * (self.right - self.left - 2.0 * self.pad)
        }
    }

    fn y(&self, v: f64) -> f64 {
        self.bottom - self.pad - (v - self.y_lo) / (self.y_hi - self.y_lo) * (self.bottom - self.top - 2.0 * self.pad)
    }
}

pub fn render_svg(layout: &DlLayout, options: &RenderOptions) -> String {
    let colormap = ColorMap::new();
    let w = options.width as f64;
    let h = options.height as f64;
    let plot_right = w - options.margin_right as f64 - options.sidebar_width as f64;
    let (y_lo, y_hi) = layout
        .placements
        .iter()
        .fold((0.0f64, 1.0f64), |(lo, hi), p| (lo.min(p.y_jittered), hi.max(p.y_jittered)));
    let frame = Frame {
        left: options.margin_left as f64,
        right: plot_right,
        top: options.margin_top as f64,
        bottom: h - options.margin_bottom as f64,
        pad: options.dot_radius * 2.0,
        max_level: layout.max_level(),
        y_lo,
        y_hi,
    };

    let mut s = String::with_capacity(4096 + layout.placements.len() * 96);
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        options.width, options.height, options.width, options.height
    );

    s.push_str(&format!("<g id=\"edges\" stroke=\"{EDGE_GRAY}\" stroke-width=\"1\">\n"));
    for &(p, c) in &layout.edges {
        let (a, b) = (&layout.placements[p], &layout.placements[c]);
        let _ = writeln!(
            s,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\"/>",
            frame.x(a.x as f64),
            frame.y(a.y_jittered),
            frame.x(b.x as f64),
            frame.y(b.y_jittered)
        );
    }
    s.push_str("</g>\n");

    s.push_str("<g id=\"nodes\">\n");
    for p in &layout.placements {
        let (cx, cy) = (frame.x(p.x as f64), frame.y(p.y_jittered));
        match p.color_bin {
            Some(bin) => {
                let _ = writeln!(
                    s,
                    "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"{:.2}\" fill=\"{}\"/>",
                    options.dot_radius,
                    colormap.color(bin).hex()
                );
            }
            None => {
                let _ = writeln!(
                    s,
                    "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"{:.2}\" fill=\"none\" stroke=\"{PHANTOM_GRAY}\" stroke-width=\"1.5\"/>",
                    options.dot_radius
                );
            }
        }
    }
    s.push_str("</g>\n");

    // Sidebar: color bar with bin 0 at the bottom, then the count bars.
    let bar_x = plot_right + 30.0;
    let bar_w = 18.0;
    let cell_h = (frame.bottom - frame.top) / BIN_COUNT as f64;
    let cell_top = |bin: usize| frame.bottom - (bin + 1) as f64 * cell_h;
    s.push_str("<g id=\"colorbar\">\n");
    for bin in 0..BIN_COUNT {
        let _ = writeln!(
            s,
            "<rect x=\"{bar_x:.2}\" y=\"{:.2}\" width=\"{bar_w:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
            cell_top(bin),
            cell_h,
            colormap.color(bin as u8).hex()
        );
    }
    s.push_str("</g>\n");

    let hist_x = bar_x + bar_w + 8.0;
    let hist_max_len = (w - options.margin_right as f64 - hist_x - 30.0).max(1.0);
    let max_count = layout.histogram.iter().copied().max().unwrap_or(0).max(1) as f64;
    s.push_str("<g id=\"histogram\" fill=\"#4d4d4d\">\n");
    for (bin, &count) in layout.histogram.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let _ = writeln!(
            s,
            "<rect x=\"{hist_x:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\"/>",
            cell_top(bin),
            count as f64 / max_count * hist_max_len,
            cell_h
        );
    }
    s.push_str("</g>\n");

    s.push_str("<g id=\"labels\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#202020\">\n");
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"16\">{} {}</text>",
        frame.left,
        frame.top - 20.0,
        escape(&layout.subject_id),
        layout.region.name()
    );
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-size=\"14\">{}</text>",
        w - options.margin_right as f64,
        frame.top - 20.0,
        range_label(layout.thickness_range)
    );
    for level in 0..=frame.max_level {
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{level}</text>",
            frame.x(level as f64),
            frame.bottom + 18.0
        );
    }
    let first_tick = frame.y_lo.ceil() as i64;
    let last_tick = frame.y_hi.floor() as i64;
    for tick in first_tick..=last_tick {
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{tick}</text>",
            frame.left - 8.0,
            frame.y(tick as f64) + 4.0
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">0</text>",
        bar_x + bar_w / 2.0,
        frame.bottom + 18.0
    );
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">4 mm</text>",
        bar_x + bar_w / 2.0,
        frame.top - 4.0
    );
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\">max {}</text>",
        hist_x,
        frame.bottom + 18.0,
        max_count as u32
    );
    if options.axis_labels {
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">level</text>",
            (frame.left + frame.right) / 2.0,
            h - 15.0
        );
        let ly = (frame.top + frame.bottom) / 2.0;
        let _ = writeln!(
            s,
            "<text x=\"20\" y=\"{ly:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {ly:.2})\">log2(descendants + 1)</text>"
        );
    }
    s.push_str("</g>\n</svg>\n");
    s
}
