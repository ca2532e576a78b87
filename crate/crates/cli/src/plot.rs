//! Static SVG plots, built by hand so reports stay self-contained.
//!
//! Three curve kinds cover the report figures: accuracy against training
//! size, train+classify seconds against size on a log axis, and MSE
//! against epoch. A grouped bar chart summarizes cross-validation
//! accuracy and macro F-measure per algorithm. Output is deterministic:
//! same series, same bytes.

use std::fmt::Write as _;

use crate::error::CliError;

/// One named curve. Points are (x, y) in data coordinates.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    AccuracyVsSize,
    TimeVsSize,
    MseVsEpoch,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 60.0;

/// Stroke colors, one per series, cycling past the end.
const PALETTE: [&str; 13] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#4b0082", "#a0522d", "#006400",
];

fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Maps a data interval onto a pixel interval.
struct Scale {
    lo: f64,
    hi: f64,
    pixel_lo: f64,
    pixel_hi: f64,
}

impl Scale {
    fn map(&self, v: f64) -> f64 {
        let span = self.hi - self.lo;
        let t = if span == 0.0 { 0.5 } else { (v - self.lo) / span };
        self.pixel_lo + t * (self.pixel_hi - self.pixel_lo)
    }
}

struct Frame {
    title: String,
    x_label: String,
    y_label: String,
    x: Scale,
    y: Scale,
    body: String,
}

impl Frame {
    fn new(title: &str, x_label: &str, y_label: &str, x: Scale, y: Scale) -> Frame {
        Frame {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            x,
            y,
            body: String::new(),
        }
    }

    fn x_tick(&mut self, v: f64, label: &str) {
        let px = self.x.map(v);
        let base = HEIGHT - MARGIN_BOTTOM;
        writeln!(
            self.body,
            "<line x1=\"{px:.2}\" y1=\"{base:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"#999\"/>",
            base + 5.0
        )
        .unwrap();
        writeln!(
            self.body,
            "<text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\" class=\"tick\">{}</text>",
            base + 20.0,
            escape(label)
        )
        .unwrap();
    }

    fn y_tick(&mut self, v: f64, label: &str) {
        let py = self.y.map(v);
        writeln!(
            self.body,
            "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{:.2}\" y2=\"{py:.2}\" stroke=\"#ddd\"/>",
            MARGIN_LEFT,
            WIDTH - MARGIN_RIGHT
        )
        .unwrap();
        writeln!(
            self.body,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" class=\"tick\">{}</text>",
            MARGIN_LEFT - 8.0,
            py + 4.0,
            escape(label)
        )
        .unwrap();
    }

    fn polyline(&mut self, points: &[(f64, f64)], stroke: &str) {
        let coords: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", self.x.map(x), self.y.map(y)))
            .collect();
        writeln!(
            self.body,
            "<polyline fill=\"none\" stroke=\"{stroke}\" stroke-width=\"2\" points=\"{}\"/>",
            coords.join(" ")
        )
        .unwrap();
        for &(x, y) in points {
            writeln!(
                self.body,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{stroke}\"/>",
                self.x.map(x),
                self.y.map(y)
            )
            .unwrap();
        }
    }

    fn legend(&mut self, labels: &[String]) {
        let x = WIDTH - MARGIN_RIGHT + 16.0;
        for (i, label) in labels.iter().enumerate() {
            let y = MARGIN_TOP + 18.0 * i as f64 + 10.0;
            writeln!(
                self.body,
                "<line x1=\"{x:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"{}\" stroke-width=\"3\"/>",
                x + 22.0,
                color(i)
            )
            .unwrap();
            writeln!(
                self.body,
                "<text x=\"{:.2}\" y=\"{:.2}\" class=\"tick\">{}</text>",
                x + 28.0,
                y + 4.0,
                escape(label)
            )
            .unwrap();
        }
    }

    fn render(self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
             font-family=\"sans-serif\">"
        )
        .unwrap();
        out.push_str("<style>.tick{font-size:12px;fill:#333}.label{font-size:14px;fill:#111}</style>\n");
        writeln!(out, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>").unwrap();
        writeln!(
            out,
            "<text x=\"{:.2}\" y=\"28\" text-anchor=\"middle\" class=\"label\" font-weight=\"bold\">{}</text>",
            (MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0,
            escape(&self.title)
        )
        .unwrap();
        // Axes.
        writeln!(
            out,
            "<line x1=\"{l:.2}\" y1=\"{b:.2}\" x2=\"{r:.2}\" y2=\"{b:.2}\" stroke=\"#333\"/>\
             <line x1=\"{l:.2}\" y1=\"{t:.2}\" x2=\"{l:.2}\" y2=\"{b:.2}\" stroke=\"#333\"/>",
            l = MARGIN_LEFT,
            r = WIDTH - MARGIN_RIGHT,
            t = MARGIN_TOP,
            b = HEIGHT - MARGIN_BOTTOM,
        )
        .unwrap();
        writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" class=\"label\">{}</text>",
            (MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0,
            HEIGHT - 16.0,
            escape(&self.x_label)
        )
        .unwrap();
        writeln!(
            out,
            "<text x=\"20\" y=\"{:.2}\" text-anchor=\"middle\" class=\"label\" \
             transform=\"rotate(-90 20 {mid:.2})\">{}</text>",
            (MARGIN_TOP + HEIGHT - MARGIN_BOTTOM) / 2.0,
            escape(&self.y_label),
            mid = (MARGIN_TOP + HEIGHT - MARGIN_BOTTOM) / 2.0,
        )
        .unwrap();
        out.push_str(&self.body);
        out.push_str("</svg>\n");
        out
    }
}

fn check_series(series: &[Series]) -> Result<(), CliError> {
    if series.is_empty() {
        return Err(CliError::runtime("plot needs at least one series"));
    }
    for s in series {
        if s.points.is_empty() {
            return Err(CliError::runtime(format!("series {:?} has no points", s.label)));
        }
    }
    Ok(())
}

fn data_range(series: &[Series], pick: impl Fn(&(f64, f64)) -> f64) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in series {
        for p in &s.points {
            lo = lo.min(pick(p));
            hi = hi.max(pick(p));
        }
    }
    if lo == hi {
        // Degenerate interval: widen symmetrically so the point is centered.
        (lo - 1.0, hi + 1.0)
    } else {
        (lo, hi)
    }
}

/// Evenly spaced ticks over [lo, hi], endpoints included.
fn linear_ticks(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..=count).map(|i| lo + (hi - lo) * i as f64 / count as f64).collect()
}

fn format_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let magnitude = v.abs();
    if (1e-3..1e6).contains(&magnitude) {
        let text = format!("{v:.3}");
        let trimmed = text.trim_end_matches('0').trim_end_matches('.');
        trimmed.to_string()
    } else {
        format!("{v:e}")
    }
}

/// Renders one figure with one polyline per series. The time axis is
/// log-scaled with gridlines and labels at every decade.
pub fn plot_curves(series: &[Series], kind: CurveKind) -> Result<String, CliError> {
    check_series(series)?;

    let (title, x_label, y_label) = match kind {
        CurveKind::AccuracyVsSize => (
            "Average accuracy vs. dataset size",
            "dataset size (rows)",
            "mean per-class recall (training subsample)",
        ),
        CurveKind::TimeVsSize => (
            "Train + classify time vs. dataset size",
            "dataset size (rows)",
            "seconds (log scale)",
        ),
        CurveKind::MseVsEpoch => ("Training MSE by epoch", "epoch", "mean squared error"),
    };

    // Time plots transform y to log10 before scaling.
    let transformed: Vec<Series> = if kind == CurveKind::TimeVsSize {
        series
            .iter()
            .map(|s| Series {
                label: s.label.clone(),
                points: s.points.iter().map(|&(x, y)| (x, y.max(1e-12).log10())).collect(),
            })
            .collect()
    } else {
        series.to_vec()
    };

    let (x_lo, x_hi) = data_range(&transformed, |p| p.0);
    let (y_lo, y_hi) = match kind {
        CurveKind::AccuracyVsSize => (0.0, 1.0),
        CurveKind::TimeVsSize => {
            let (lo, hi) = data_range(&transformed, |p| p.1);
            (lo.floor(), hi.ceil().max(lo.floor() + 1.0))
        }
        CurveKind::MseVsEpoch => {
            let (_, hi) = data_range(&transformed, |p| p.1);
            (0.0, hi * 1.05)
        }
    };

    let x = Scale { lo: x_lo, hi: x_hi, pixel_lo: MARGIN_LEFT, pixel_hi: WIDTH - MARGIN_RIGHT };
    let y = Scale { lo: y_lo, hi: y_hi, pixel_lo: HEIGHT - MARGIN_BOTTOM, pixel_hi: MARGIN_TOP };
    let mut frame = Frame::new(title, x_label, y_label, x, y);

    match kind {
        CurveKind::TimeVsSize => {
            // One gridline and label per decade.
            let mut decade = y_lo as i32;
            while f64::from(decade) <= y_hi {
                frame.y_tick(f64::from(decade), &format_tick(10f64.powi(decade)));
                decade += 1;
            }
        }
        _ => {
            for v in linear_ticks(y_lo, y_hi, 4) {
                frame.y_tick(v, &format_tick(v));
            }
        }
    }
    for v in linear_ticks(x_lo, x_hi, 4) {
        frame.x_tick(v, &format_tick(v));
    }

    for (i, s) in transformed.iter().enumerate() {
        frame.polyline(&s.points, color(i));
    }
    frame.legend(&transformed.iter().map(|s| s.label.clone()).collect::<Vec<_>>());
    Ok(frame.render())
}

/// Grouped bar chart: per algorithm, one accuracy bar and one macro
/// F-measure bar on a [0, 1] axis.
pub fn bar_chart(entries: &[(String, f64, f64)]) -> Result<String, CliError> {
    if entries.is_empty() {
        return Err(CliError::runtime("bar chart needs at least one algorithm"));
    }
    let x = Scale {
        lo: 0.0,
        hi: entries.len() as f64,
        pixel_lo: MARGIN_LEFT,
        pixel_hi: WIDTH - MARGIN_RIGHT,
    };
    let y = Scale { lo: 0.0, hi: 1.0, pixel_lo: HEIGHT - MARGIN_BOTTOM, pixel_hi: MARGIN_TOP };
    let mut frame = Frame::new(
        "Cross-validated accuracy and macro F-measure",
        "",
        "score",
        x,
        y,
    );
    for v in linear_ticks(0.0, 1.0, 4) {
        frame.y_tick(v, &format_tick(v));
    }

    let group_width = (WIDTH - MARGIN_RIGHT - MARGIN_LEFT) / entries.len() as f64;
    let bar_width = (group_width * 0.3).min(40.0);
    let base = HEIGHT - MARGIN_BOTTOM;
    for (i, (name, accuracy, f_measure)) in entries.iter().enumerate() {
        let center = MARGIN_LEFT + group_width * (i as f64 + 0.5);
        for (j, (&value, fill)) in [(accuracy, PALETTE[0]), (f_measure, PALETTE[1])]
            .iter()
            .enumerate()
        {
            let top = frame.y.map(value.clamp(0.0, 1.0));
            let left = center - bar_width + j as f64 * bar_width;
            writeln!(
                frame.body,
                "<rect class=\"bar\" x=\"{left:.2}\" y=\"{top:.2}\" width=\"{bar_width:.2}\" \
                 height=\"{:.2}\" fill=\"{fill}\"/>",
                base - top
            )
            .unwrap();
        }
        writeln!(
            frame.body,
            "<text x=\"{center:.2}\" y=\"{:.2}\" text-anchor=\"middle\" class=\"tick\">{}</text>",
            base + 20.0,
            escape(name)
        )
        .unwrap();
    }
    frame.legend(&["accuracy".to_string(), "macro F-measure".to_string()]);
    Ok(frame.render())
}
