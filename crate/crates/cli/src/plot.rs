//! Plot data as plain SVG 1.1 or CSV. Polytope coordinates are those of the
//! selected chart; a segment polytope is drawn on the horizontal axis.

use std::f64::consts::PI;
use std::fmt::Write as _;

use wpshms::flow::build_gradient_tree;
use wpshms::homs::{weighted_compositions, LatticeK};
use wpshms::lattice::{chart_polytope, Weights};
use wpshms::morse::{canonical_lift, intersection_point, rat_f64};

use crate::commands::{emit, weights};
use crate::{CliError, CliResult, Format, PlotArgs};

#[derive(Debug, Clone, PartialEq)]
enum Mark {
    Dot { label: String, at: [f64; 2] },
    Segment { label: String, from: [f64; 2], to: [f64; 2], style: Style },
    Text { label: String, at: [f64; 2] },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Style {
    Outline,
    Flow,
    Guide,
}

#[derive(Debug, Clone, PartialEq)]
struct Figure {
    title: String,
    x_axis: String,
    y_axis: String,
    x_range: [f64; 2],
    y_range: [f64; 2],
    marks: Vec<Mark>,
}

pub fn run(args: &PlotArgs) -> CliResult<bool> {
    let c = &args.common;
    let w = weights(c)?;
    if w.dim() > 2 {
        return Err(CliError::Usage(format!("plots require n ≤ 2, got n = {}", w.dim())));
    }
    let fig = match &args.sections {
        Some(spec) => {
            if w.dim() != 1 {
                return Err(CliError::Usage(format!("section plots require n = 1, got n = {}", w.dim())));
            }
            sections_figure(&w, c.chart, &parse_range(spec)?)
        }
        None => polytope_figure(&w, c.chart, args)?,
    };
    let body = match c.format.unwrap_or(Format::Svg) {
        Format::Svg => render_svg(&fig).into_bytes(),
        Format::Csv => render_csv(&fig)?,
        other => return Err(CliError::Usage(format!("plots are svg or csv, not {other:?}").to_lowercase())),
    };
    emit(c, &body)?;
    Ok(true)
}

/// `A..B` (inclusive), a single degree, or a comma-separated list.
fn parse_range(spec: &str) -> CliResult<Vec<i64>> {
    let bad = || CliError::Usage(format!("cannot read degree range {spec:?}; use e.g. 0..4"));
    if let Some((lo, hi)) = spec.split_once("..") {
        let lo: i64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: i64 = hi.trim().parse().map_err(|_| bad())?;
        if lo > hi || hi - lo > 1000 {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    spec.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
}

fn to_plane(p: &[f64]) -> [f64; 2] {
    [p[0], p.get(1).copied().unwrap_or(0.0)]
}

fn k_label(k: &[i64]) -> String {
    let parts: Vec<String> = k.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

fn polytope_figure(w: &Weights, chart: usize, args: &PlotArgs) -> CliResult<Figure> {
    let poly = chart_polytope(w, chart)?;
    let verts: Vec<[f64; 2]> = poly.vertices.iter().map(|v| to_plane(&v.iter().map(rat_f64).collect::<Vec<_>>())).collect();
    let mut marks = Vec::new();
    let cycle = if verts.len() == 2 { 1 } else { verts.len() };
    for i in 0..cycle {
        let (from, to) = (verts[i], verts[(i + 1) % verts.len()]);
        marks.push(Mark::Segment { label: "facet".into(), from, to, style: Style::Outline });
    }
    for (k, v) in verts.iter().enumerate() {
        let label = format!("v{chart}{k}");
        marks.push(Mark::Text { label, at: *v });
    }
    if let Some(d) = args.dist {
        if d <= 0 {
            return Err(CliError::Usage("--dist must be positive".into()));
        }
        for k in weighted_compositions(w, d) {
            let v = intersection_point(w, 0, d, &k, chart)?;
            let at = to_plane(&v.iter().map(rat_f64).collect::<Vec<_>>());
            marks.push(Mark::Dot { label: k_label(k.k()), at });
        }
    }
    let mut title = format!("P{} chart {chart}", k_label(w.q()));
    if !args.tree.is_empty() {
        if args.tree.len() != 3 {
            return Err(CliError::Usage("--tree takes 3 comma-separated integers".into()));
        }
        let (a, b, c) = (args.tree[0], args.tree[1], args.tree[2]);
        let k_ab = LatticeK::new(w, args.k.clone())?;
        let k_bc = LatticeK::new(w, args.k2.clone())?;
        let tree = build_gradient_tree(w, a, b, c, &k_ab, &k_bc, chart, 1e-3)?;
        for (edge, name) in tree.edges.iter().zip(["grad f_ab", "grad f_bc"]) {
            marks.push(Mark::Segment { label: name.into(), from: to_plane(&edge.from), to: to_plane(&edge.to), style: Style::Flow });
        }
        let k_ac = k_ab.add(&k_bc);
        for (lo, hi, k, name) in [(a, b, &k_ab, "ab"), (b, c, &k_bc, "bc"), (a, c, &k_ac, "ac")] {
            let v = intersection_point(w, lo, hi, k, chart)?;
            let at = to_plane(&v.iter().map(rat_f64).collect::<Vec<_>>());
            marks.push(Mark::Dot { label: format!("v_{name};{}", k_label(k.k())), at });
        }
        title = format!("{title}, gradient tree {a} < {b} < {c}");
    } else if let Some(d) = args.dist {
        title = format!("{title}, generators at distance {d}");
    }
    let max = |i: usize| verts.iter().map(|v| v[i]).fold(0.0, f64::max);
    Ok(Figure {
        title,
        x_axis: "x1".into(),
        y_axis: if w.dim() == 2 { "x2".into() } else { String::new() },
        x_range: [0.0, max(0)],
        y_range: [0.0, max(1)],
        marks,
    })
}

/// Lifts `y = 2π a x / S - 2π K_j` over one fiber period `2π q_i`, wrapped
/// into the fundamental window. Shifting by one period changes the lift by
/// `q_j e_i - q_i e_j`.
fn sections_figure(w: &Weights, chart: usize, degrees: &[i64]) -> Figure {
    let i = chart;
    let j = 1 - chart;
    let s = w.scale() as f64;
    let width = s / w.q()[j] as f64;
    let period = 2.0 * PI * w.q()[i] as f64;
    let mut marks = Vec::new();
    for m in 1..w.q()[i] {
        let y = 2.0 * PI * m as f64;
        marks.push(Mark::Segment { label: format!("{}pi", 2 * m), from: [0.0, y], to: [width, y], style: Style::Guide });
    }
    for &a in degrees {
        let lift = canonical_lift(w, a);
        let slope = 2.0 * PI * a as f64 / s;
        let intercept = -2.0 * PI * lift.ka[j] as f64;
        let (lo, hi) = {
            let (y0, y1) = (intercept, intercept + slope * width);
            (y0.min(y1), y0.max(y1))
        };
        let m_lo = ((-hi) / period).floor() as i64;
        let m_hi = ((period - lo) / period).ceil() as i64;
        for m in m_lo..=m_hi {
            let y0 = intercept + m as f64 * period;
            let clip = if slope == 0.0 {
                (-1e-9..=period + 1e-9).contains(&y0).then_some((0.0, width))
            } else {
                let (ta, tb) = ((0.0 - y0) / slope, (period - y0) / slope);
                let (enter, exit) = (ta.min(tb).max(0.0), ta.max(tb).min(width));
                (enter < exit - 1e-12).then_some((enter, exit))
            };
            if let Some((x0, x1)) = clip {
                let mut k = lift.ka.clone();
                k[i] += m * w.q()[j];
                k[j] -= m * w.q()[i];
                let from = [x0, (y0 + slope * x0).clamp(0.0, period)];
                let to = [x1, (y0 + slope * x1).clamp(0.0, period)];
                marks.push(Mark::Segment { label: format!("s_{a};{}", k_label(&k)), from, to, style: Style::Flow });
            }
        }
    }
    Figure {
        title: format!("lifts of sections on P{}, fiber period {}pi", k_label(w.q()), 2 * w.q()[i]),
        x_axis: format!("x{i}{j}"),
        y_axis: format!("y{i}{j}"),
        x_range: [0.0, width],
        y_range: [0.0, period],
        marks,
    }
}

fn render_csv(fig: &Figure) -> CliResult<Vec<u8>> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["kind", "label", "x0", "y0", "x1", "y1"])?;
    for m in &fig.marks {
        let row = match m {
            Mark::Dot { label, at } => ["dot".into(), label.clone(), at[0].to_string(), at[1].to_string(), String::new(), String::new()],
            Mark::Text { label, at } => ["vertex".into(), label.clone(), at[0].to_string(), at[1].to_string(), String::new(), String::new()],
            Mark::Segment { label, from, to, style } => {
                let kind = match style {
                    Style::Outline => "outline",
                    Style::Flow => "segment",
                    Style::Guide => "guide",
                };
                [kind.into(), label.clone(), from[0].to_string(), from[1].to_string(), to[0].to_string(), to[1].to_string()]
            }
        };
        wtr.write_record(&row)?;
    }
    wtr.into_inner().map_err(|e| CliError::Io(e.into_error()))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

fn render_svg(fig: &Figure) -> String {
    let [x_lo, x_hi] = fig.x_range;
    let [y_lo, y_hi] = fig.y_range;
    let flat = y_hi - y_lo <= 0.0;
    let span_x = (x_hi - x_lo).max(1e-12);
    let span_y = if flat { 1.0 } else { y_hi - y_lo };
    // equal aspect ratio when both directions carry data
    let scale = ((WIDTH - 2.0 * MARGIN) / span_x).min(if flat { f64::INFINITY } else { (HEIGHT - 2.0 * MARGIN) / span_y });
    let px = |p: [f64; 2]| {
        let x = MARGIN + (p[0] - x_lo) * scale;
        let y = if flat { HEIGHT / 2.0 } else { HEIGHT - MARGIN - (p[1] - y_lo) * scale };
        (x, y)
    };
    let mut s = String::new();
    writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(s, r#"<title>{}</title>"#, escape(&fig.title)).unwrap();
    writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#, WIDTH / 2.0, escape(&fig.title)).unwrap();

    // axes through the origin of the chart
    let (ox, oy) = px([x_lo, y_lo]);
    let (ex, _) = px([x_hi, y_lo]);
    writeln!(s, r#"<line x1="{:.2}" y1="{oy:.2}" x2="{:.2}" y2="{oy:.2}" stroke="gray" stroke-width="1"/>"#, ox - 10.0, ex + 20.0).unwrap();
    writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{}</text>"#, ex + 24.0, oy + 4.0, escape(&fig.x_axis)).unwrap();
    if !flat {
        let (_, ey) = px([x_lo, y_hi]);
        writeln!(s, r#"<line x1="{ox:.2}" y1="{:.2}" x2="{ox:.2}" y2="{:.2}" stroke="gray" stroke-width="1"/>"#, oy + 10.0, ey - 20.0).unwrap();
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{}</text>"#, ox - 6.0, ey - 24.0, escape(&fig.y_axis)).unwrap();
    }
    writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#, ex, oy + 16.0, trim(x_hi)).unwrap();
    if !flat {
        let (_, ty) = px([x_lo, y_hi]);
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#, ox - 4.0, ty + 4.0, trim(y_hi)).unwrap();
    }

    for m in &fig.marks {
        match m {
            Mark::Segment { label, from, to, style } => {
                let (x1, y1) = px(*from);
                let (x2, y2) = px(*to);
                let attrs = match style {
                    Style::Outline => r#"stroke="black" stroke-width="2""#,
                    Style::Flow => r#"stroke="steelblue" stroke-width="1.5""#,
                    Style::Guide => r#"stroke="gray" stroke-width="1" stroke-dasharray="4 3""#,
                };
                writeln!(s, r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" {attrs}><title>{}</title></line>"#, escape(label)).unwrap();
                match style {
                    Style::Guide => {
                        writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#, x1 - 4.0, y1 + 4.0, escape(label)).unwrap();
                    }
                    Style::Flow => {
                        let (mx, my) = ((x1 + x2) / 2.0, (y1 + y2) / 2.0);
                        writeln!(s, r#"<text x="{mx:.2}" y="{:.2}" font-family="sans-serif" font-size="10" fill="steelblue">{}</text>"#, my - 4.0, escape(label)).unwrap();
                    }
                    Style::Outline => {}
                }
            }
            Mark::Dot { label, at } => {
                let (x, y) = px(*at);
                writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="black"/>"#).unwrap();
                writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11">{}</text>"#, x + 6.0, y - 6.0, escape(label)).unwrap();
            }
            Mark::Text { label, at } => {
                let (x, y) = px(*at);
                writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" fill="gray">{}</text>"#, x - 6.0, y + 14.0, escape(label)).unwrap();
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

fn trim(x: f64) -> String {
    let s = format!("{x:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0..4").unwrap(), vec![0, 1, 2, 3, 4]);
        assert_eq!(parse_range("-1..1").unwrap(), vec![-1, 0, 1]);
        assert_eq!(parse_range("2,5").unwrap(), vec![2, 5]);
        assert!(parse_range("4..0").is_err());
        assert!(parse_range("x").is_err());
    }

    #[test]
    fn sections_of_p32_match_the_lifts() {
        let w = Weights::new(&[3, 2]).unwrap();
        let fig = sections_figure(&w, 0, &[0, 1, 2, 3, 4]);
        assert!((fig.y_range[1] - 6.0 * PI).abs() < 1e-12);
        assert_eq!(fig.x_range, [0.0, 6.0]);
        let labels: Vec<&str> = fig
            .marks
            .iter()
            .filter_map(|m| match m {
                Mark::Segment { label, style: Style::Flow, .. } => Some(label.as_str()),
                _ => None,
            })
            .collect();
        for expected in ["s_0;(0,0)", "s_0;(2,-3)", "s_1;(1,-1)", "s_2;(2,-2)", "s_3;(1,0)", "s_4;(2,-1)"] {
            assert!(labels.contains(&expected), "{expected} missing from {labels:?}");
        }
    }
}
