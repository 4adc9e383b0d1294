//! Static SVG band chart of a bound series: date on x, the [lo, hi] band on
//! y. Purely a rendering of computed output; the band polygon carries the
//! exact values, so tests can parse the markup back and compare against the
//! CSV.

use std::io::Write;

use crate::bounds::BoundRow;
use crate::error::{ConfigError, Error};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 20.0;
const MARGIN_BOTTOM: f64 = 50.0;

fn x_pos(i: usize, n: usize) -> f64 {
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    if n <= 1 {
        MARGIN_LEFT + plot_w / 2.0
    } else {
        MARGIN_LEFT + plot_w * i as f64 / (n - 1) as f64
    }
}

fn y_pos(value: f64) -> f64 {
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    MARGIN_TOP + plot_h * (1.0 - value)
}

/// Inverse of the y transform, exposed so a parse-back check can recover
/// band values from pixel coordinates.
pub fn value_from_y(y: f64) -> f64 {
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    1.0 - (y - MARGIN_TOP) / plot_h
}

/// Render the band chart. Rows must be non-empty; a single date renders a
/// degenerate (vertical) band.
pub fn render_band_svg<W: Write>(rows: &[BoundRow], out: &mut W) -> Result<(), Error> {
    if rows.is_empty() {
        return Err(ConfigError::Invalid("empty bound series; nothing to plot".into()).into());
    }
    let n = rows.len();
    let mut points = String::new();
    for (i, row) in rows.iter().enumerate() {
        points.push_str(&format!("{},{} ", x_pos(i, n), y_pos(row.lo)));
    }
    for (i, row) in rows.iter().enumerate().rev() {
        points.push_str(&format!("{},{} ", x_pos(i, n), y_pos(row.hi)));
    }
    let points = points.trim_end();

    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )?;
    writeln!(
        out,
        r#"  <rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    )?;
    // axes
    writeln!(
        out,
        r#"  <line x1="{MARGIN_LEFT}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        y_pos(0.0),
        WIDTH - MARGIN_RIGHT,
        y_pos(0.0)
    )?;
    writeln!(
        out,
        r#"  <line x1="{MARGIN_LEFT}" y1="{}" x2="{MARGIN_LEFT}" y2="{}" stroke="black"/>"#,
        y_pos(1.0),
        y_pos(0.0)
    )?;
    for tick in 0..=5 {
        let v = tick as f64 / 5.0;
        writeln!(
            out,
            r#"  <text x="{}" y="{}" font-size="11" text-anchor="end">{v:.1}</text>"#,
            MARGIN_LEFT - 6.0,
            y_pos(v) + 4.0
        )?;
    }
    writeln!(
        out,
        r#"  <polygon class="bound-band" points="{points}" fill="steelblue" fill-opacity="0.35" stroke="steelblue"/>"#
    )?;
    // first/last date labels
    writeln!(
        out,
        r#"  <text x="{}" y="{}" font-size="11" text-anchor="middle">{}</text>"#,
        x_pos(0, n),
        HEIGHT - MARGIN_BOTTOM + 20.0,
        rows[0].date
    )?;
    if n > 1 {
        writeln!(
            out,
            r#"  <text x="{}" y="{}" font-size="11" text-anchor="middle">{}</text>"#,
            x_pos(n - 1, n),
            HEIGHT - MARGIN_BOTTOM + 20.0,
            rows[n - 1].date
        )?;
    }
    writeln!(
        out,
        r#"  <text x="{}" y="{}" font-size="12" text-anchor="middle">{} bound band</text>"#,
        MARGIN_LEFT + (WIDTH - MARGIN_LEFT - MARGIN_RIGHT) / 2.0,
        HEIGHT - 8.0,
        rows[0].method.as_str()
    )?;
    writeln!(out, "</svg>")?;
    Ok(())
}

/// Extract the band polygon's (x, y) pairs from rendered SVG text. Test
/// helper for the parse-back check; returns lower-edge then reversed
/// upper-edge points, as emitted.
pub fn extract_band_points(svg: &str) -> Option<Vec<(f64, f64)>> {
    let marker = r#"class="bound-band" points=""#;
    let start = svg.find(marker)? + marker.len();
    let end = svg[start..].find('"')? + start;
    let mut points = Vec::new();
    for pair in svg[start..end].split_whitespace() {
        let (x, y) = pair.split_once(',')?;
        points.push((x.parse().ok()?, y.parse().ok()?));
    }
    Some(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::BoundMethod;
    use chrono::NaiveDate;

    fn row(day: u32, lo: f64, hi: f64) -> BoundRow {
        BoundRow {
            date: NaiveDate::from_ymd_opt(2020, 3, day).unwrap(),
            method: BoundMethod::TemporalEnvelope,
            lo,
            hi,
            clamped: false,
        }
    }

    #[test]
    fn band_points_invert_to_the_input_values() {
        let rows = vec![row(16, 0.001, 0.51), row(17, 0.002, 0.51), row(18, 0.0031872, 0.5104)];
        let mut svg = Vec::new();
        render_band_svg(&rows, &mut svg).unwrap();
        let svg = String::from_utf8(svg).unwrap();
        let points = extract_band_points(&svg).unwrap();
        assert_eq!(points.len(), 6);
        for (i, r) in rows.iter().enumerate() {
            let lo = value_from_y(points[i].1);
            let hi = value_from_y(points[rows.len() * 2 - 1 - i].1);
            assert!((lo - r.lo).abs() < 1e-9, "lo mismatch at {i}");
            assert!((hi - r.hi).abs() < 1e-9, "hi mismatch at {i}");
        }
    }

    #[test]
    fn single_date_band_renders() {
        let rows = vec![row(16, 0.1, 0.4)];
        let mut svg = Vec::new();
        render_band_svg(&rows, &mut svg).unwrap();
        let svg = String::from_utf8(svg).unwrap();
        assert!(svg.contains("polygon"));
        assert_eq!(extract_band_points(&svg).unwrap().len(), 2);
    }

    #[test]
    fn empty_series_is_an_error() {
        let mut svg = Vec::new();
        assert!(render_band_svg(&[], &mut svg).is_err());
    }
}
