//! Artifact writers: CSV tables, SVG line charts and atomic file output.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use polarsim::SimulationTrace;
use tempfile::NamedTempFile;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 50.0;
const MAX_POINTS: usize = 500;
const PALETTE: [&str; 8] =
    ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> io::Result<Vec<u8>> {
    w.into_inner().map_err(|e| e.into_error())
}

/// `t,b0,...,b{n-1}`, one row per recorded state.
pub fn beliefs_csv(trace: &SimulationTrace) -> io::Result<Vec<u8>> {
    let mut w = csv_writer();
    let header = std::iter::once("t".to_string()).chain((0..trace.n()).map(|i| format!("b{i}")));
    w.write_record(header)?;
    for (t, state) in trace.states().iter().enumerate() {
        let row = std::iter::once(t.to_string()).chain(state.values().iter().map(f64::to_string));
        w.write_record(row)?;
    }
    finish(w)
}

/// `t,rho`, one row per recorded state.
pub fn series_csv(name: &str, series: &[f64]) -> io::Result<Vec<u8>> {
    let mut w = csv_writer();
    w.write_record(["t", name])?;
    for (t, v) in series.iter().enumerate() {
        w.write_record([t.to_string(), v.to_string()])?;
    }
    finish(w)
}

/// Line chart with one polyline per series over `t = 0..len`.
pub fn line_chart(title: &str, series: &[Vec<f64>], y_max: f64) -> String {
    let len = series.iter().map(Vec::len).max().unwrap_or(0);
    let t_max = len.saturating_sub(1).max(1) as f64;
    let y_max = if y_max > 0.0 && y_max.is_finite() { y_max } else { 1.0 };
    let (plot_w, plot_h) = (WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN);
    let x = |t: usize| MARGIN + t as f64 / t_max * plot_w;
    let y = |v: f64| HEIGHT - MARGIN - v / y_max * plot_h;
    let stride = len.div_ceil(MAX_POINTS).max(1);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="30" text-anchor="middle" font-family="sans-serif" font-size="16">{title}</text>"#,
        WIDTH / 2.0
    );
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        svg,
        r#"<polyline points="{left},{top} {left},{bottom} {right},{bottom}" fill="none" stroke="black"/>"#
    );
    let label = r#"font-family="sans-serif" font-size="12""#;
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end" {label}>0</text>"#, left - 6.0, bottom);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="end" {label}>{y_max}</text>"#,
        left - 6.0,
        top + 4.0
    );
    let _ = writeln!(svg, r#"<text x="{left}" y="{}" text-anchor="middle" {label}>0</text>"#, bottom + 18.0);
    let _ = writeln!(
        svg,
        r#"<text x="{right}" y="{}" text-anchor="middle" {label}>{}</text>"#,
        bottom + 18.0,
        len.saturating_sub(1)
    );

    for (k, values) in series.iter().enumerate() {
        let mut points = String::new();
        let last = values.len().saturating_sub(1);
        for t in (0..values.len()).step_by(stride).chain((last % stride != 0).then_some(last)) {
            let _ = write!(points, "{:.2},{:.2} ", x(t), y(values[t]));
        }
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1"/>"#,
            points.trim_end(),
            PALETTE[k % PALETTE.len()]
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Per-agent belief trajectories.
pub fn beliefs_svg(trace: &SimulationTrace) -> String {
    let series: Vec<Vec<f64>> =
        (0..trace.n()).map(|i| trace.states().iter().map(|s| s.get(i)).collect()).collect();
    line_chart("beliefs", &series, 1.0)
}

pub fn polarization_svg(rho: &[f64]) -> String {
    let top = rho.iter().copied().fold(0.0, f64::max);
    line_chart("polarization", &[rho.to_vec()], top)
}

#[cfg(test)]
mod tests {
    use super::*;
    use polarsim::{gen_influence, run, BeliefState, InfluenceKind, UpdateKind};

    fn small_trace(steps: usize) -> SimulationTrace {
        let b = BeliefState::new(vec![0.0, 0.5, 1.0]).unwrap();
        let g = gen_influence(InfluenceKind::Clique(0.5), 3).unwrap();
        run(&b, &g, UpdateKind::Regular, steps, None).unwrap()
    }

    #[test]
    fn beliefs_table_layout() {
        let csv = String::from_utf8(beliefs_csv(&small_trace(1)).unwrap()).unwrap();
        assert_eq!(csv, "t,b0,b1,b2\n0,0,0.5,1\n1,0.25,0.5,0.75\n");
    }

    #[test]
    fn series_values_round_trip() {
        let v = [0.1 + 0.2, 1.0 / 3.0, 1e-20];
        let csv = String::from_utf8(series_csv("rho", &v).unwrap()).unwrap();
        let parsed: Vec<f64> =
            csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
        assert_eq!(parsed, v);
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn chart_has_fixed_viewport_and_one_line_per_series() {
        let svg = beliefs_svg(&small_trace(4));
        assert!(svg.starts_with("<svg") && svg.contains(r#"viewBox="0 0 800 500""#));
        assert_eq!(svg.matches("stroke-width=\"1\"").count(), 3);
    }

    #[test]
    fn long_series_are_thinned_but_keep_endpoints() {
        let values: Vec<f64> = (0..2001).map(|t| t as f64 / 2000.0).collect();
        let svg = line_chart("x", &[values], 1.0);
        let line = svg.lines().find(|l| l.contains("stroke-width")).unwrap();
        let points = line.split('"').nth(1).unwrap();
        assert!(points.split(' ').count() <= MAX_POINTS + 1);
        assert!(points.ends_with("750.00,50.00"));
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
