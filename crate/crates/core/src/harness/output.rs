use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{ResultRow, ResultTable, SweepVar};
use crate::{Error, Result};

pub const CSV_HEADER: &str =
    "sweep_var,value,scheme,precoder,mean_rate_bps_hz,mean_sinr_db,ci95,drops,blocks";

/// Formats with six significant digits, `%g` style.
pub fn format_sig6(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.into();
    }
    if v == 0.0 {
        return "0".into();
    }
    // Exponent after rounding to six digits.
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn render_csv(table: &ResultTable) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &table.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.sweep_var,
            format_sig6(r.value),
            r.scheme,
            r.precoder,
            format_sig6(r.mean_rate),
            format_sig6(r.mean_sinr_db),
            format_sig6(r.ci95),
            r.drops,
            r.blocks
        )
        .expect("write to string");
    }
    out
}

fn series_label(r: &ResultRow) -> String {
    if r.sweep_var == SweepVar::Reuse {
        format!("{}/{}", r.precoder, r.scheme.family())
    } else {
        format!("{}/{}", r.precoder, r.scheme)
    }
}

/// Rows grouped by scheme family.
fn families(table: &ResultTable) -> BTreeMap<&'static str, Vec<&ResultRow>> {
    let mut map: BTreeMap<_, Vec<_>> = BTreeMap::new();
    for r in &table.rows {
        map.entry(r.scheme.family()).or_default().push(r);
    }
    map
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Line plot of mean rate against the swept value, one path per series.
pub fn render_svg(rows: &[&ResultRow], title: &str) -> String {
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (60.0, 160.0, 40.0, 50.0);
    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows {
        series.entry(series_label(r)).or_default().push((r.value, r.mean_rate));
    }
    let xs = rows.iter().map(|r| r.value);
    let ys = rows.iter().map(|r| r.mean_rate);
    let (xmin, xmax) = bounds(xs);
    let (_, ymax) = bounds(ys);
    let ymax = if ymax > 0.0 { ymax * 1.1 } else { 1.0 };
    let sx = |x: f64| left + (x - xmin) / (xmax - xmin) * (w - left - right);
    let sy = |y: f64| h - bottom - y / ymax * (h - top - bottom);
    let xlabel = rows.first().map(|r| r.sweep_var.to_string()).unwrap_or_default();

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{title}</text>"#,
        (w - right + left) / 2.0
    );
    let (x0, y0, x1, y1) = (left, h - bottom, w - right, top);
    let _ = writeln!(
        s,
        r#"<path class="axes" d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" stroke="black" fill="none"/>"#
    );
    for i in 0..=4 {
        let v = ymax * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end" font-size="11">{}</text>"#,
            x0 - 6.0,
            sy(v) + 4.0,
            format_sig6((v * 100.0).round() / 100.0)
        );
    }
    let mut ticks: Vec<f64> = rows.iter().map(|r| r.value).collect();
    ticks.sort_by(f64::total_cmp);
    ticks.dedup();
    for t in ticks {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle" font-size="11">{}</text>"#,
            sx(t),
            y0 + 16.0,
            format_sig6(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{xlabel}</text>"#,
        (x0 + x1) / 2.0,
        h - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" font-size="12" transform="rotate(-90 16 {})">rate (bit/s/Hz)</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
    for (i, (label, mut pts)) in series.into_iter().enumerate() {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let color = PALETTE[i % PALETTE.len()];
        let d: Vec<String> = pts
            .iter()
            .enumerate()
            .map(|(n, &(x, y))| format!("{}{:.1} {:.1}", if n == 0 { "M" } else { "L" }, sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<path class="series" data-label="{label}" d="{}" stroke="{color}" stroke-width="2" fill="none"/>"#,
            d.join(" ")
        );
        for &(x, y) in &pts {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>"#,
                sx(x),
                sy(y)
            );
        }
        let ly = top + 10.0 + 18.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<g class="legend"><line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}" font-size="11">{label}</text></g>"#,
            x1 + 12.0,
            x1 + 32.0,
            x1 + 38.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

/// Writes `results.csv` and, when asked, one `plot_<family>.svg` per scheme
/// family. Returns the written paths.
pub fn write_results(table: &ResultTable, out_dir: &Path, emit_plots: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    let csv = out_dir.join("results.csv");
    fs::write(&csv, render_csv(table)).map_err(|e| Error::io(&csv, e))?;
    written.push(csv);
    if emit_plots {
        for (family, rows) in families(table) {
            let path = out_dir.join(format!("plot_{family}.svg"));
            let title = format!("mean downlink rate, {family} pilots");
            fs::write(&path, render_svg(&rows, &title)).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
    }
    Ok(written)
}
