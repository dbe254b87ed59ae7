//! Self-contained SVG scatter plots. No graphics dependency: the plots are
//! deterministic text, byte-identical for identical inputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use qdse_core::explorer::{DesignPoint, PointObjective};
use qdse_core::{Error, Result};

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 540.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 680.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 480.0;

/// Fixed series palette, keyed by canonical precision name.
const PALETTE: [(&str, &str); 6] = [
    ("binary", "#1f77b4"),
    ("int2", "#ff7f0e"),
    ("int4", "#2ca02c"),
    ("int8", "#d62728"),
    ("int16", "#9467bd"),
    ("fp32", "#8c564b"),
];

fn color_for(name: &str) -> &'static str {
    PALETTE
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, c)| *c)
        .unwrap_or("#7f7f7f")
}

fn fmt2(v: f64) -> String {
    format!("{v:.2}")
}

fn fmt_tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && (a < 0.01 || a >= 10_000.0) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

struct Drawable {
    index: usize,
    x: f64,
    y: f64,
    name: String,
    scale: f64,
    on_front: bool,
}

/// Render one accuracy-versus-`x_obj` scatter. Returns the SVG text and a
/// plain CSV sidecar of exactly the plotted values.
pub fn scatter(
    points: &[DesignPoint],
    frontier_flags: &[bool],
    x_obj: PointObjective,
    log_x: bool,
    title: &str,
) -> Result<(String, String)> {
    let mut drawable = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let (Some(y), Some(x)) = (p.test_error, x_obj.value(p)) else {
            continue;
        };
        if log_x && x <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "cannot log-scale non-positive {x_obj} value {x}"
            )));
        }
        drawable.push(Drawable {
            index: i,
            x,
            y,
            name: p.precision.to_string(),
            scale: p.scale,
            on_front: frontier_flags.get(i).copied().unwrap_or(false),
        });
    }
    if drawable.is_empty() {
        return Err(Error::DataFormat(
            "results contain no trained points to plot (every test_error is missing)".into(),
        ));
    }

    let tx = |x: f64| if log_x { x.log10() } else { x };
    let (mut x_lo, mut x_hi) = drawable
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| {
            (lo.min(tx(d.x)), hi.max(tx(d.x)))
        });
    if x_hi - x_lo < 1e-12 {
        let pad = if log_x { 0.5 } else { (x_lo.abs() * 0.1).max(1e-12) };
        x_lo -= pad;
        x_hi += pad;
    } else {
        let pad = (x_hi - x_lo) * 0.06;
        x_lo -= pad;
        x_hi += pad;
    }
    let y_hi = drawable
        .iter()
        .map(|d| d.y)
        .fold(0.0f64, f64::max)
        .mul_add(1.15, 1e-6)
        .min(1.0);

    let px = |x: f64| LEFT + (tx(x) - x_lo) / (x_hi - x_lo) * (RIGHT - LEFT);
    let py = |y: f64| BOTTOM - y / y_hi * (BOTTOM - TOP);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"13\">"
    );
    let _ = writeln!(svg, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">{title}</text>",
        (LEFT + RIGHT) / 2.0
    );

    // Ticks: decade marks on log axes, five even divisions otherwise.
    let x_ticks: Vec<f64> = if log_x {
        let lo = x_lo.ceil() as i64;
        let hi = x_hi.floor() as i64;
        if lo <= hi {
            (lo..=hi).map(|e| 10f64.powi(e as i32)).collect()
        } else {
            vec![10f64.powf(x_lo), 10f64.powf((x_lo + x_hi) / 2.0), 10f64.powf(x_hi)]
        }
    } else {
        (0..=4)
            .map(|i| x_lo + (x_hi - x_lo) * i as f64 / 4.0)
            .collect()
    };
    for &t in &x_ticks {
        let x = fmt2(px(t));
        let _ = writeln!(
            svg,
            "<line x1=\"{x}\" y1=\"{TOP}\" x2=\"{x}\" y2=\"{BOTTOM}\" stroke=\"#dddddd\"/>"
        );
        let label = if log_x { format!("{t:.0e}") } else { fmt_tick(t) };
        let _ = writeln!(
            svg,
            "<text x=\"{x}\" y=\"{}\" text-anchor=\"middle\">{label}</text>",
            BOTTOM + 20.0
        );
    }
    for i in 0..=4 {
        let v = y_hi * i as f64 / 4.0;
        let y = fmt2(py(v));
        let _ = writeln!(
            svg,
            "<line x1=\"{LEFT}\" y1=\"{y}\" x2=\"{RIGHT}\" y2=\"{y}\" stroke=\"#dddddd\"/>"
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{y}\" text-anchor=\"end\" dominant-baseline=\"middle\">{}</text>",
            LEFT - 8.0,
            fmt_tick(v)
        );
    }
    let _ = writeln!(
        svg,
        "<rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        RIGHT - LEFT,
        BOTTOM - TOP
    );
    let x_caption = format!("{x_obj}{}", if log_x { " (log scale)" } else { "" });
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{x_caption}</text>",
        (LEFT + RIGHT) / 2.0,
        BOTTOM + 42.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"22\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 22 {})\">test error</text>",
        (TOP + BOTTOM) / 2.0,
        (TOP + BOTTOM) / 2.0
    );

    // Frontier polyline, drawn under the markers.
    let mut front: Vec<&Drawable> = drawable.iter().filter(|d| d.on_front).collect();
    front.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.index.cmp(&b.index)));
    if front.len() >= 2 {
        let pts: Vec<String> = front
            .iter()
            .map(|d| format!("{},{}", fmt2(px(d.x)), fmt2(py(d.y))))
            .collect();
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#333333\" stroke-dasharray=\"5 3\" stroke-width=\"1.5\"/>",
            pts.join(" ")
        );
    }

    // Series markers grouped per precision for the legend.
    let mut series: BTreeMap<String, Vec<&Drawable>> = BTreeMap::new();
    for d in &drawable {
        series.entry(d.name.clone()).or_default().push(d);
    }
    for (name, ds) in &series {
        let color = color_for(name);
        for d in ds {
            let _ = writeln!(
                svg,
                "<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"{color}\" stroke=\"{}\"><title>{} s={} {}={} err={}</title></circle>",
                fmt2(px(d.x)),
                fmt2(py(d.y)),
                if d.on_front { "black" } else { "none" },
                name,
                d.scale,
                x_obj,
                d.x,
                d.y
            );
        }
    }
    for (i, name) in series.keys().enumerate() {
        let y = TOP + 14.0 + i as f64 * 20.0;
        let _ = writeln!(
            svg,
            "<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"{}\"/>",
            RIGHT + 18.0,
            fmt2(y),
            color_for(name)
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" dominant-baseline=\"middle\">{name}</text>",
            RIGHT + 30.0,
            fmt2(y)
        );
    }
    svg.push_str("</svg>\n");

    let mut sidecar = format!("precision,scale,{x_obj},test_error,on_frontier\n");
    for d in &drawable {
        let _ = writeln!(
            sidecar,
            "{},{},{},{},{}",
            d.name, d.scale, d.x, d.y, d.on_front
        );
    }
    Ok((svg, sidecar))
}
