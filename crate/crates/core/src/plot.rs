//! Deterministic SVG scatter plots of MDS layouts.
//!
//! Each paper is drawn as a circle with its group letter inside. When
//! weights are given the circle *area* is proportional to the weight, so a
//! paper with weight 0.5 covers half the area of a sole-authored paper.
//! Numbers are written with fixed precision and elements in input order,
//! so identical input gives identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mds::Layout2D;

/// One glyph.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotPoint {
    pub x: f64,
    pub y: f64,
    /// Group tag, e.g. `"T"` or `"C"`.
    pub group: String,
    /// Relative contribution in `(0, 1]`; drives glyph area.
    pub weight: f64,
}

/// A titled set of points sharing one coordinate frame.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotPanel {
    pub title: String,
    pub points: Vec<PlotPoint>,
}

impl PlotPanel {
    /// Labels every point of `layout`; weights default to 1.
    pub fn from_layout(
        title: impl Into<String>,
        layout: &Layout2D,
        groups: &[&str],
        weights: Option<&[f64]>,
    ) -> Result<Self> {
        let n = layout.points.len();
        if groups.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: groups.len(),
            });
        }
        if let Some(w) = weights {
            if w.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: w.len(),
                });
            }
        }
        let points = layout
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| PlotPoint {
                x: p.x,
                y: p.y,
                group: groups[i].to_owned(),
                weight: weights.map_or(1.0, |w| w[i]),
            })
            .collect();
        Ok(Self {
            title: title.into(),
            points,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotStyle {
    /// Width and height of one panel, in pixels.
    pub panel_size: f64,
    pub margin: f64,
    /// Radius of a weight-1 glyph.
    pub max_radius: f64,
}

impl Default for PlotStyle {
    fn default() -> Self {
        Self {
            panel_size: 480.0,
            margin: 40.0,
            max_radius: 10.0,
        }
    }
}

fn group_color(group: &str) -> &'static str {
    match group {
        "T" => "#c0392b",
        "C" => "#2471a3",
        _ => "#555555",
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Glyph radius for `weight`: area proportional to weight.
pub fn glyph_radius(weight: f64, style: &PlotStyle) -> f64 {
    style.max_radius * weight.max(0.0).sqrt()
}

/// Renders panels side by side into one SVG document.
pub fn render_svg(panels: &[PlotPanel], style: &PlotStyle) -> Result<String> {
    if panels.is_empty() || panels.iter().all(|p| p.points.is_empty()) {
        return Err(Error::InvalidArgument("nothing to plot".into()));
    }
    if let Some(p) = panels
        .iter()
        .flat_map(|p| &p.points)
        .find(|p| !(p.x.is_finite() && p.y.is_finite() && p.weight.is_finite() && p.weight > 0.0))
    {
        return Err(Error::InvalidArgument(format!("unplottable point {p:?}")));
    }
    let width = style.panel_size * panels.len() as f64;
    let height = style.panel_size;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="white"/>"#
    );

    for (k, panel) in panels.iter().enumerate() {
        let x0 = k as f64 * style.panel_size;
        let inner = style.panel_size - 2.0 * style.margin;
        // One scale for both axes keeps distances comparable.
        let extent = panel
            .points
            .iter()
            .map(|p| p.x.abs().max(p.y.abs()))
            .fold(0.0, f64::max);
        let scale = if extent > 0.0 { inner / (2.0 * extent) } else { 0.0 };
        let cx = x0 + style.panel_size / 2.0;
        let cy = style.panel_size / 2.0;

        let _ = writeln!(svg, r#"<g id="panel-{k}">"#);
        let _ = writeln!(
            svg,
            r##"<rect x="{:.2}" y="{:.2}" width="{inner:.2}" height="{inner:.2}" fill="none" stroke="#cccccc"/>"##,
            x0 + style.margin,
            style.margin
        );
        let _ = writeln!(
            svg,
            r#"<text x="{cx:.2}" y="{:.2}" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
            style.margin / 2.0 + 5.0,
            escape(&panel.title)
        );
        for p in &panel.points {
            let (px, py) = (cx + p.x * scale, cy - p.y * scale);
            let r = glyph_radius(p.weight, style);
            let color = group_color(&p.group);
            let _ = writeln!(
                svg,
                r#"<circle cx="{px:.3}" cy="{py:.3}" r="{r:.4}" fill="{color}" fill-opacity="0.35" stroke="{color}"/>"#
            );
            let _ = writeln!(
                svg,
                r#"<text x="{px:.3}" y="{:.3}" font-family="sans-serif" font-size="{:.2}" text-anchor="middle" fill="{color}">{}</text>"#,
                py + r * 0.35,
                r.max(4.0),
                escape(&p.group)
            );
        }
        svg.push_str("</g>\n");
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Renders and writes the plot to `out_path`.
pub fn emit_plot(panels: &[PlotPanel], style: &PlotStyle, out_path: impl AsRef<Path>) -> Result<()> {
    let svg = render_svg(panels, style)?;
    std::fs::write(out_path, svg)?;
    Ok(())
}
