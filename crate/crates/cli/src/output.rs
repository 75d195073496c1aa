//! File writing helpers shared by the subcommands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// `dir/run.json` with suffix `bars.csv` becomes `dir/run.bars.csv`.
pub fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}.{suffix}"))
}

pub fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

/// A self-contained SVG bar chart; one bar per `(label, value)`.
pub fn bar_chart_svg(title: &str, y_label: &str, bars: &[(String, f64)]) -> String {
    const BAR: f64 = 14.0;
    const GAP: f64 = 4.0;
    const LEFT: f64 = 60.0;
    const TOP: f64 = 30.0;
    const PLOT_H: f64 = 240.0;
    const BOTTOM: f64 = 40.0;
    let width = LEFT + bars.len() as f64 * (BAR + GAP) + 20.0;
    let height = TOP + PLOT_H + BOTTOM;
    let max = bars.iter().map(|b| b.1).fold(0.0, f64::max);
    let scale = if max > 0.0 { PLOT_H / max } else { 0.0 };
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="10">"#
    );
    let _ = writeln!(svg, r#"<text x="{LEFT}" y="18" font-size="13">{}</text>"#, escape(title));
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{}" transform="rotate(-90 14 {})">{}</text>"#,
        TOP + PLOT_H / 2.0,
        TOP + PLOT_H / 2.0,
        escape(y_label)
    );
    let base = TOP + PLOT_H;
    let _ = writeln!(svg, r#"<line x1="{LEFT}" y1="{base}" x2="{}" y2="{base}" stroke="black"/>"#, width - 10.0);
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{max}</text>"#, LEFT - 4.0, TOP + 4.0);
    for (k, (label, value)) in bars.iter().enumerate() {
        let x = LEFT + k as f64 * (BAR + GAP) + GAP;
        let h = value * scale;
        let _ = writeln!(
            svg,
            r#"<rect x="{x}" y="{}" width="{BAR}" height="{h}" fill="steelblue"><title>{}: {value}</title></rect>"#,
            base - h,
            escape(label)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" transform="rotate(90 {} {})">{}</text>"#,
            x + 3.0,
            base + 4.0,
            x + 3.0,
            base + 4.0,
            escape(label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
