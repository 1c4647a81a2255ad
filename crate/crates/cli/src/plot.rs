//! Chiral joint image along one epipolar line of a two-camera arrangement.

use std::fmt::Write as _;
use std::io::Write;

use chiralkit::joint_image::{ca_satisfied, ca_values};
use chiralkit::{CameraArrangement, ImagePoint, ImageTuple, Sign};
use nalgebra::{Vector2, Vector3};
use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

/// Half-width of the square image window.
pub const PLOT_WINDOW: f64 = 10.0;
/// Evenly spaced samples along the clipped line.
pub const PLOT_SAMPLES: usize = 4001;
/// Raster cells per side for the inequality regions.
pub const REGION_CELLS: usize = 120;
const VIEW: f64 = 600.0;
const BISECTIONS: usize = 60;
const GUARD: f64 = 1e-9;
const REGION_COLORS: [&str; 3] = ["#1f77b4", "#ff7f0e", "#2ca02c"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleKind {
    Sample,
    Boundary,
}

/// One point of image 2 on the epipolar line, with the normalized
/// inequality values and the combined verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineSample {
    pub x: f64,
    pub y: f64,
    pub forward: f64,
    pub backward: f64,
    pub joint: f64,
    pub inside: bool,
    pub kind: SampleKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpipolarPlot {
    pub p1: [f64; 3],
    /// Epipolar line `l` in image 2, scaled so that `l0^2 + l1^2 = 1`.
    pub line: [f64; 3],
    pub window: f64,
    /// Endpoints of the line clipped to the window.
    pub span: Option<[[f64; 2]; 2]>,
    pub samples: Vec<LineSample>,
    /// Maximal runs of the line satisfying every inequality.
    pub segments: Vec<[[f64; 2]; 2]>,
}

impl EpipolarPlot {
    pub fn summary(&self) -> Value {
        json!({
            "p1": self.p1,
            "epipolar_line": self.line,
            "window": self.window,
            "span": self.span,
            "segments": self.segments,
            "samples": self.samples.iter().filter(|s| s.kind == SampleKind::Sample).count(),
        })
    }
}

struct Evaluator<'a> {
    arrangement: &'a CameraArrangement,
    p1: ImagePoint,
}

impl Evaluator<'_> {
    fn tuple(&self, x: f64, y: f64) -> Result<ImageTuple, CliError> {
        let p2 = ImagePoint::from_array([x, y, 1.0]).map_err(|e| CliError::Argument(e.to_string()))?;
        Ok(ImageTuple::new(vec![self.p1, p2]))
    }

    fn inside(&self, x: f64, y: f64) -> Result<bool, CliError> {
        ca_satisfied(self.arrangement, &self.tuple(x, y)?).map_err(|e| CliError::Argument(e.to_string()))
    }

    fn signs(&self, x: f64, y: f64) -> Result<[Sign; 3], CliError> {
        let v = ca_values(self.arrangement, &self.tuple(x, y)?).map_err(|e| CliError::Argument(e.to_string()))?;
        Ok(v[0].signs(self.arrangement.tolerances().sign))
    }

    fn sample(&self, x: f64, y: f64, kind: SampleKind) -> Result<LineSample, CliError> {
        let v = ca_values(self.arrangement, &self.tuple(x, y)?).map_err(|e| CliError::Argument(e.to_string()))?[0];
        let norm = |k: usize| {
            let s = v.scales[k];
            if s > 0.0 {
                v.values()[k] / s
            } else {
                0.0
            }
        };
        Ok(LineSample {
            x,
            y,
            forward: norm(0),
            backward: norm(1),
            joint: norm(2),
            inside: self.inside(x, y)?,
            kind,
        })
    }
}

/// Parameter interval of `p0 + t d` inside `[-w, w]^2`.
fn clip(p0: &Vector2<f64>, d: &Vector2<f64>, w: f64) -> Option<(f64, f64)> {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for k in 0..2 {
        if d[k].abs() < 1e-15 {
            if p0[k].abs() > w {
                return None;
            }
        } else {
            let a = (-w - p0[k]) / d[k];
            let b = (w - p0[k]) / d[k];
            lo = lo.max(a.min(b));
            hi = hi.min(a.max(b));
        }
    }
    (lo < hi).then_some((lo, hi))
}

/// Samples the epipolar line of `p1` in image 2 over `[-window, window]^2`
/// and extracts the segments where every inequality holds. Segment ends
/// inside the window are refined by bisection.
pub fn epipolar_plot(
    arrangement: &CameraArrangement,
    p1: [f64; 3],
    window: f64,
    samples: usize,
) -> Result<EpipolarPlot, CliError> {
    if arrangement.len() != 2 {
        return Err(CliError::Argument(format!("plots need exactly two cameras, got {}", arrangement.len())));
    }
    let p1_point = ImagePoint::from_array(p1).map_err(|e| CliError::Argument(e.to_string()))?;
    let cams = arrangement.cameras();
    let e = cams[1].apply(arrangement.centers()[0].coords());
    let d = cams[1].g() * (cams[0].g_inv() * Vector3::from(p1));
    let l = e.cross(&d);
    if l.norm() <= 1e-12 * e.norm() * d.norm() {
        return Err(CliError::Argument("p1 is the epipole, so its epipolar line is undefined".into()));
    }
    let n = l.xy().norm();
    let ev = Evaluator {
        arrangement,
        p1: p1_point,
    };
    let mut plot = EpipolarPlot {
        p1,
        line: [l[0], l[1], l[2]],
        window,
        span: None,
        samples: Vec::new(),
        segments: Vec::new(),
    };
    if n <= 1e-12 * l.norm() {
        return Ok(plot);
    }
    let l = l / n;
    plot.line = [l[0], l[1], l[2]];
    let p0 = -l[2] * l.xy();
    let dir = Vector2::new(-l[1], l[0]);
    let Some((t0, t1)) = clip(&p0, &dir, window) else {
        return Ok(plot);
    };
    let at = |t: f64| p0 + dir * t;
    plot.span = Some([at(t0).into(), at(t1).into()]);

    let count = samples.max(2);
    let ts: Vec<f64> = (0..count).map(|i| t0 + (t1 - t0) * i as f64 / (count - 1) as f64).collect();
    let mut inside = Vec::with_capacity(count);
    for &t in &ts {
        let p = at(t);
        let s = ev.sample(p.x, p.y, SampleKind::Sample)?;
        inside.push(s.inside);
        plot.samples.push(s);
    }

    // Bisection lands on the edge of the sign band; the reported end is
    // pulled inward so that it stays inside under rounding.
    let guard = GUARD * (t1 - t0);
    let refine = |mut t_out: f64, mut t_in: f64| -> Result<f64, CliError> {
        let inward = (t_in - t_out).signum();
        for _ in 0..BISECTIONS {
            let mid = 0.5 * (t_out + t_in);
            let p = at(mid);
            if ev.inside(p.x, p.y)? {
                t_in = mid;
            } else {
                t_out = mid;
            }
        }
        let pulled = t_in + inward * guard;
        let p = at(pulled);
        Ok(if ev.inside(p.x, p.y)? { pulled } else { t_in })
    };

    let mut intervals: Vec<(f64, f64)> = Vec::new();
    let mut boundary = Vec::new();
    let mut i = 0;
    while i < count {
        if !inside[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < count && inside[i + 1] {
            i += 1;
        }
        let end = i;
        let ta = if start == 0 { ts[0] } else { refine(ts[start - 1], ts[start])? };
        let tb = if end == count - 1 { ts[count - 1] } else { refine(ts[end + 1], ts[end])? };
        if start > 0 {
            boundary.push(ta);
        }
        if end < count - 1 {
            boundary.push(tb);
        }
        intervals.push((ta, tb));
        i += 1;
    }

    // Every epipolar line passes through the epipole, where all three
    // values vanish; it can be an isolated solution.
    if e[2].abs() > 1e-12 * e.norm() {
        let ep = Vector2::new(e[0] / e[2], e[1] / e[2]);
        let te = (ep - p0).dot(&dir);
        let covered = intervals.iter().any(|&(a, b)| a - 2.0 * guard <= te && te <= b + 2.0 * guard);
        if (t0..=t1).contains(&te) && !covered && ev.inside(ep.x, ep.y)? {
            intervals.push((te, te));
            intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
    }

    for t in boundary {
        let p = at(t);
        plot.samples.push(ev.sample(p.x, p.y, SampleKind::Boundary)?);
    }
    plot.segments = intervals.iter().map(|&(a, b)| [at(a).into(), at(b).into()]).collect();
    Ok(plot)
}

fn to_view(window: f64, p: [f64; 2]) -> (f64, f64) {
    let s = VIEW / (2.0 * window);
    ((p[0] + window) * s, (window - p[1]) * s)
}

fn fmt_num(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

/// Deterministic SVG: shaded inequality regions for the fixed `p1`, the
/// epipolar line dashed and the chiral segments solid.
pub fn render_svg(arrangement: &CameraArrangement, plot: &EpipolarPlot) -> Result<String, CliError> {
    let ev = Evaluator {
        arrangement,
        p1: ImagePoint::from_array(plot.p1).map_err(|e| CliError::Argument(e.to_string()))?,
    };
    let w = plot.window;
    let cell = 2.0 * w / REGION_CELLS as f64;
    let px = VIEW / REGION_CELLS as f64;
    let mut grid = vec![[false; 3]; REGION_CELLS * REGION_CELLS];
    for r in 0..REGION_CELLS {
        for c in 0..REGION_CELLS {
            let x = -w + (c as f64 + 0.5) * cell;
            let y = w - (r as f64 + 0.5) * cell;
            let s = ev.signs(x, y)?;
            grid[r * REGION_CELLS + c] = std::array::from_fn(|k| s[k] != Sign::Negative);
        }
    }

    let mut svg = String::new();
    let v = fmt_num(VIEW);
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {v} {v}" width="{v}" height="{v}">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect x="0" y="0" width="{v}" height="{v}" fill="white"/>"#).unwrap();
    let names = ["forward", "backward", "joint"];
    for k in 0..3 {
        writeln!(
            svg,
            r#"<g id="{}" fill="{}" fill-opacity="0.18" stroke="none">"#,
            names[k], REGION_COLORS[k]
        )
        .unwrap();
        for r in 0..REGION_CELLS {
            let mut c = 0;
            while c < REGION_CELLS {
                if !grid[r * REGION_CELLS + c][k] {
                    c += 1;
                    continue;
                }
                let start = c;
                while c < REGION_CELLS && grid[r * REGION_CELLS + c][k] {
                    c += 1;
                }
                writeln!(
                    svg,
                    r#"<rect x="{}" y="{}" width="{}" height="{}"/>"#,
                    fmt_num(start as f64 * px),
                    fmt_num(r as f64 * px),
                    fmt_num((c - start) as f64 * px),
                    fmt_num(px)
                )
                .unwrap();
            }
        }
        writeln!(svg, "</g>").unwrap();
    }
    let (ox, oy) = to_view(w, [0.0, 0.0]);
    writeln!(
        svg,
        r##"<g stroke="#999999" stroke-width="0.5"><line x1="0.000" y1="{y}" x2="{v}" y2="{y}"/><line x1="{x}" y1="0.000" x2="{x}" y2="{v}"/></g>"##,
        x = fmt_num(ox),
        y = fmt_num(oy)
    )
    .unwrap();
    if let Some([a, b]) = plot.span {
        let (x1, y1) = to_view(w, a);
        let (x2, y2) = to_view(w, b);
        writeln!(
            svg,
            r#"<line id="epipolar-line" x1="{}" y1="{}" x2="{}" y2="{}" stroke="black" stroke-width="1" stroke-dasharray="6 4"/>"#,
            fmt_num(x1),
            fmt_num(y1),
            fmt_num(x2),
            fmt_num(y2)
        )
        .unwrap();
    }
    writeln!(svg, r#"<g id="segments" stroke="black" stroke-width="3" fill="black">"#).unwrap();
    for [a, b] in &plot.segments {
        let (x1, y1) = to_view(w, *a);
        let (x2, y2) = to_view(w, *b);
        if a == b {
            writeln!(svg, r#"<circle cx="{}" cy="{}" r="3"/>"#, fmt_num(x1), fmt_num(y1)).unwrap();
        } else {
            writeln!(
                svg,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
                fmt_num(x1),
                fmt_num(y1),
                fmt_num(x2),
                fmt_num(y2)
            )
            .unwrap();
        }
    }
    writeln!(svg, "</g>").unwrap();
    writeln!(
        svg,
        r#"<text x="10.000" y="20.000" font-family="monospace" font-size="14">p1 = ({}, {}, {})</text>"#,
        plot.p1[0], plot.p1[1], plot.p1[2]
    )
    .unwrap();
    writeln!(svg, "</svg>").unwrap();
    Ok(svg)
}

/// Line samples and refined boundary points as CSV.
pub fn write_csv<W: Write>(plot: &EpipolarPlot, out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    for s in &plot.samples {
        w.serialize(s).map_err(|e| CliError::Numerical(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Numerical(e.to_string()))?;
    Ok(())
}
