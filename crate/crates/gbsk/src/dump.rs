//! CSV and SVG dumps of balls, peak statistics and the skeleton forest.

use std::fmt::Write as _;
use std::io::{self, Write};

use gbsk_core::peaks::peak_stats;
use gbsk_core::{Dataset, GranularBall, SkeletonForest};

fn coord_header(d: usize) -> String {
    (0..d).map(|j| format!(",c{j}")).collect()
}

fn coords(c: &[f64]) -> String {
    c.iter().map(|x| format!(",{x:?}")).collect()
}

/// `id,c0..c{d-1},radius,density,members`
pub fn write_balls_csv<W: Write>(w: &mut W, balls: &[GranularBall]) -> io::Result<()> {
    let d = balls.first().map_or(0, |b| b.center.len());
    writeln!(w, "id{},radius,density,members", coord_header(d))?;
    for (id, b) in balls.iter().enumerate() {
        writeln!(
            w,
            "{id}{},{:?},{:?},{}",
            coords(&b.center),
            b.radius,
            b.density,
            b.member_count()
        )?;
    }
    Ok(())
}

/// `id,density,delta,gamma`
pub fn write_peaks_csv<W: Write>(w: &mut W, balls: &[GranularBall]) -> io::Result<()> {
    writeln!(w, "id,density,delta,gamma")?;
    if balls.is_empty() {
        return Ok(());
    }
    let stats = peak_stats(balls).map_err(io::Error::other)?;
    for (id, b) in balls.iter().enumerate() {
        writeln!(w, "{id},{:?},{:?},{:?}", b.density, stats.delta[id], stats.gamma[id])?;
    }
    Ok(())
}

/// `child,parent,c0..c{d-1},label`, one row per key ball, parent `-1` for roots.
pub fn write_skeleton_csv<W: Write>(w: &mut W, key_balls: &[GranularBall], forest: &SkeletonForest) -> io::Result<()> {
    let d = key_balls.first().map_or(0, |b| b.center.len());
    writeln!(w, "child,parent{},label", coord_header(d))?;
    for (id, (b, parent)) in key_balls.iter().zip(forest.parent_ids()).enumerate() {
        writeln!(w, "{id},{parent}{},{}", coords(&b.center), forest.labels[id])?;
    }
    Ok(())
}

#[derive(Debug, thiserror::Error)]
#[error("SVG output needs 1 to 3 dimensions, data has {0}")]
pub struct SvgDimension(pub usize);

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

/// Scatter of the data (light grey), key balls as circles coloured by label,
/// and one line per parent edge. Three-dimensional data is drawn on its
/// first two axes.
pub fn skeleton_svg(
    dataset: Option<&Dataset>,
    key_balls: &[GranularBall],
    forest: &SkeletonForest,
) -> Result<String, SvgDimension> {
    let d = key_balls.first().map_or(2, |b| b.center.len());
    if !(1..=3).contains(&d) {
        return Err(SvgDimension(d));
    }
    let xy = |p: &[f64]| (p[0], if d > 1 { p[1] } else { 0.0 });

    let mut lo = (f64::INFINITY, f64::INFINITY);
    let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut grow = |(x, y): (f64, f64), r: f64| {
        lo = (lo.0.min(x - r), lo.1.min(y - r));
        hi = (hi.0.max(x + r), hi.1.max(y + r));
    };
    if let Some(ds) = dataset {
        ds.points().rows().for_each(|p| grow(xy(p), 0.0));
    }
    key_balls.iter().for_each(|b| grow(xy(&b.center), b.radius));
    let span = (hi.0 - lo.0).max(hi.1 - lo.1).max(1e-9);
    let size = 800.0;
    let pad = 20.0;
    let scale = (size - 2.0 * pad) / span;
    // flip y so larger values are drawn higher
    let map = |(x, y): (f64, f64)| (pad + (x - lo.0) * scale, size - pad - (y - lo.1) * scale);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"##
    );
    let _ = writeln!(svg, r##"<rect width="100%" height="100%" fill="white"/>"##);
    if let Some(ds) = dataset {
        let _ = writeln!(svg, r##"<g class="points" fill="#c8c8c8">"##);
        for p in ds.points().rows() {
            let (x, y) = map(xy(p));
            let _ = writeln!(svg, r##"<circle cx="{x:.2}" cy="{y:.2}" r="1"/>"##);
        }
        let _ = writeln!(svg, "</g>");
    }
    let _ = writeln!(svg, r##"<g class="balls" fill="none" stroke-width="1">"##);
    for (id, b) in key_balls.iter().enumerate() {
        let (x, y) = map(xy(&b.center));
        let colour = PALETTE[(forest.labels[id] as usize).saturating_sub(1) % PALETTE.len()];
        let r = (b.radius * scale).max(2.0);
        let _ = writeln!(
            svg,
            r##"<circle class="ball" data-id="{id}" cx="{x:.2}" cy="{y:.2}" r="{r:.2}" stroke="{colour}"/>"##
        );
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, r##"<g class="edges" stroke="black" stroke-width="1.2">"##);
    for (child, parent) in forest.parents.iter().enumerate() {
        if let Some(p) = parent {
            let (x1, y1) = map(xy(&key_balls[child].center));
            let (x2, y2) = map(xy(&key_balls[*p].center));
            let _ = writeln!(
                svg,
                r##"<line class="edge" x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"##
            );
        }
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, r##"<g class="roots" fill="black">"##);
    for &r in &forest.roots {
        let (x, y) = map(xy(&key_balls[r].center));
        let _ = writeln!(svg, r##"<circle class="root" cx="{x:.2}" cy="{y:.2}" r="4"/>"##);
    }
    let _ = writeln!(svg, "</g>\n</svg>");
    Ok(svg)
}
