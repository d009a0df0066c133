//! Text renderers for caustic geometry: CSV point dumps, SVG drawings of
//! two-parameter caustics and ASCII PLY meshes of three-parameter ones.

use std::fmt::Write as _;

use crate::caustic::{CausticGeometry, Component, ComponentKind};

/// Fixed palette, indexed by the position of the kind in the canonical order.
const PALETTE: [&str; 10] = [
    "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
];

fn colour(kinds: &[ComponentKind], kind: &ComponentKind) -> &'static str {
    let i = kinds.iter().position(|k| k == kind).unwrap_or(0);
    PALETTE[i % PALETTE.len()]
}

/// Labels of every component kind a family with `r` corner variables can have.
pub fn all_kinds(r: usize) -> Vec<ComponentKind> {
    use crate::caustic::{quasi_pairs, Stratum};
    let mut out: Vec<ComponentKind> = Stratum::all(r).into_iter().map(ComponentKind::Caustic).collect();
    out.extend(quasi_pairs(r).into_iter().map(|(s, t)| ComponentKind::Quasi(s, t)));
    out
}

fn num(v: f64) -> String {
    // Round-trippable and stable across runs.
    let s = format!("{v:.12e}");
    if v == 0.0 {
        "0".into()
    } else {
        s
    }
}

/// Quotes a CSV field when it contains a separator, quote or newline.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One line per point: component, kind, q1..qn, witness coordinates, residual.
pub fn geometry_csv(geom: &CausticGeometry) -> String {
    let sp = geom.family.space();
    let (r, k, n) = geom.family.rkn();
    let mut out = String::from("component,kind");
    for j in 0..n {
        let _ = write!(out, ",{}", sp.name(r + k + j));
    }
    for i in 0..r + k {
        let _ = write!(out, ",{}", sp.name(i));
    }
    out.push_str(",residual\n");
    for c in &geom.components {
        let kind = if c.kind.is_quasi() { "quasi" } else { "caustic" };
        for ((q, w), res) in c.points.iter().zip(&c.witnesses).zip(&c.residuals) {
            let _ = write!(out, "{},{kind}", csv_field(&c.label()));
            for v in q.iter().chain(w) {
                let _ = write!(out, ",{}", num(*v));
            }
            let _ = writeln!(out, ",{}", num(*res));
        }
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// SVG drawing of a two-parameter caustic with a legend. Each component is
/// one `<g>` group of line segments (isolated points become dots).
pub fn svg(geom: &CausticGeometry, title: &str) -> String {
    let (w, h, pad, legend) = (520.0, 520.0, 30.0, 170.0);
    let ranges = geom.window.ranges();
    let (x0, x1) = ranges.first().copied().unwrap_or((0.0, 1.0));
    let (y0, y1) = ranges.get(1).copied().unwrap_or((0.0, 1.0));
    let sx = |x: f64| if x1 > x0 { pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad) } else { w / 2.0 };
    let sy = |y: f64| if y1 > y0 { h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad) } else { h / 2.0 };
    let kinds = all_kinds(geom.family.rkn().0);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{h}" viewBox="0 0 {} {h}">"#,
        w + legend,
        w + legend
    );
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{}" height="{h}" fill="white"/>"#, w + legend);
    let _ = writeln!(
        out,
        r##"<rect x="{pad}" y="{pad}" width="{}" height="{}" fill="none" stroke="#444" stroke-width="0.5"/>"##,
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    // Axes through the origin when visible.
    if x0 <= 0.0 && 0.0 <= x1 {
        let _ = writeln!(out, r##"<line x1="{0:.3}" y1="{pad}" x2="{0:.3}" y2="{1}" stroke="#bbb" stroke-width="0.5"/>"##, sx(0.0), h - pad);
    }
    if y0 <= 0.0 && 0.0 <= y1 {
        let _ = writeln!(out, r##"<line x1="{pad}" y1="{0:.3}" x2="{1}" y2="{0:.3}" stroke="#bbb" stroke-width="0.5"/>"##, sy(0.0), w - pad);
    }
    let sp = geom.family.space();
    let (r, k, _) = geom.family.rkn();
    let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="12">{}</text>"#, w - pad - 12.0, h - pad + 16.0, sp.name(r + k));
    let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="12">{}</text>"#, pad - 22.0, pad + 4.0, sp.name(r + k + 1));
    for c in &geom.components {
        let col = colour(&kinds, &c.kind);
        let dash = if c.kind.is_quasi() { r#" stroke-dasharray="5,3""# } else { "" };
        let _ = writeln!(out, r#"<g id="{}" stroke="{col}" stroke-width="2"{dash} fill="none">"#, escape(&c.label()));
        for s in &c.segments {
            let (a, b) = (&c.points[s[0]], &c.points[s[1]]);
            let _ = writeln!(
                out,
                r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#,
                sx(a[0]),
                sy(a[1]),
                sx(b[0]),
                sy(b[1])
            );
        }
        let mut used = vec![false; c.points.len()];
        for s in &c.segments {
            used[s[0]] = true;
            used[s[1]] = true;
        }
        for (p, _) in c.points.iter().zip(&used).filter(|(_, u)| !**u) {
            let _ = writeln!(out, r#"<circle cx="{:.3}" cy="{:.3}" r="1.5" fill="{col}"/>"#, sx(p[0]), sy(p[1]));
        }
        out.push_str("</g>\n");
    }
    for (i, c) in geom.components.iter().enumerate() {
        let y = pad + 20.0 * i as f64;
        let col = colour(&kinds, &c.kind);
        let dash = if c.kind.is_quasi() { r#" stroke-dasharray="5,3""# } else { "" };
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="{col}" stroke-width="2"{dash}/>"#,
            w + 5.0,
            w + 35.0
        );
        let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="13">{}</text>"#, w + 42.0, y + 4.0, escape(&c.label()));
    }
    out.push_str("</svg>\n");
    out
}

/// ASCII PLY with all components; each component's vertex and face ranges
/// are announced in a comment header. Polyline segments go to an `edge`
/// element.
pub fn ply(geom: &CausticGeometry, title: &str) -> String {
    let nv: usize = geom.components.iter().map(|c| c.points.len()).sum();
    let nf: usize = geom.components.iter().map(|c| c.triangles.len()).sum();
    let ne: usize = geom.components.iter().map(|c| c.segments.len()).sum();
    let mut out = String::from("ply\nformat ascii 1.0\n");
    let _ = writeln!(out, "comment {title}");
    let (mut v0, mut f0, mut e0) = (0usize, 0usize, 0usize);
    for c in &geom.components {
        let _ = writeln!(
            out,
            "comment component {} vertices {}..{} faces {}..{} edges {}..{} max_residual {}",
            c.label(),
            v0,
            v0 + c.points.len(),
            f0,
            f0 + c.triangles.len(),
            e0,
            e0 + c.segments.len(),
            num(c.max_residual())
        );
        v0 += c.points.len();
        f0 += c.triangles.len();
        e0 += c.segments.len();
    }
    let _ = writeln!(out, "element vertex {nv}");
    out.push_str("property double x\nproperty double y\nproperty double z\nproperty uchar component\n");
    let _ = writeln!(out, "element face {nf}");
    out.push_str("property list uchar int vertex_indices\n");
    let _ = writeln!(out, "element edge {ne}");
    out.push_str("property int vertex1\nproperty int vertex2\nend_header\n");
    let coord = |p: &[f64], i: usize| p.get(i).copied().unwrap_or(0.0);
    for (ci, c) in geom.components.iter().enumerate() {
        for p in &c.points {
            let _ = writeln!(out, "{} {} {} {ci}", num(coord(p, 0)), num(coord(p, 1)), num(coord(p, 2)));
        }
    }
    let mut base = 0;
    for c in &geom.components {
        for t in &c.triangles {
            let _ = writeln!(out, "3 {} {} {}", base + t[0], base + t[1], base + t[2]);
        }
        base += c.points.len();
    }
    base = 0;
    for c in &geom.components {
        for s in &c.segments {
            let _ = writeln!(out, "{} {}", base + s[0], base + s[1]);
        }
        base += c.points.len();
    }
    out
}

/// Component counts by kind, for summaries.
pub fn summary(geom: &CausticGeometry) -> Vec<(String, usize, usize, usize, f64)> {
    geom.components
        .iter()
        .map(|c: &Component| (c.label(), c.points.len(), c.segments.len(), c.triangles.len(), c.max_residual()))
        .collect()
}

/// File-name-safe form of a label: `B_{2,2}^{+,+,1}` becomes `B_2_2_p_p_1`.
pub fn file_stem(label: &str) -> String {
    let mut out = String::new();
    for ch in label.chars() {
        match ch {
            '+' => out.push('p'),
            '-' => out.push('m'),
            '\'' => out.push('q'),
            '∅' => out.push('e'),
            c if c.is_ascii_alphanumeric() => out.push(c),
            _ => {
                if !out.ends_with('_') {
                    out.push('_');
                }
            }
        }
    }
    out.trim_end_matches('_').to_string()
}

/// A rendered catalog figure.
#[derive(Clone, Debug)]
pub struct Figure {
    pub label: String,
    /// `svg` or `ply`.
    pub format: &'static str,
    pub file_name: String,
    pub contents: String,
    pub geometry: CausticGeometry,
    /// Parameter fixed to zero to reach three parameters, if any.
    pub sliced: Option<usize>,
}

/// Figure of one catalog entry on the cube `[-bound, bound]^n`: SVG for two
/// parameters, PLY for three. Four-parameter families are sliced first.
pub fn catalog_figure(
    entry: &crate::classify::NormalFormEntry,
    bound: f64,
    resolution: usize,
) -> Result<Figure, crate::error::CausticError> {
    use crate::caustic::{full_caustic, three_parameter_slice, CausticOptions, Window};
    let (family, sliced) = if entry.n() > 3 {
        let (f, j) = three_parameter_slice(&entry.family)?;
        (f, Some(j))
    } else {
        (entry.family.clone(), None)
    };
    let n = family.rkn().2;
    let window = Window::cube(n, -bound, bound)?;
    let geometry = full_caustic(&family, &window, resolution, &CausticOptions::default())?;
    let mut title = entry.label.clone();
    if let Some(j) = sliced {
        let _ = write!(title, " ({} = 0)", entry.family.space().name(entry.r() + entry.k() + j));
    }
    let (format, contents) = if n == 2 { ("svg", svg(&geometry, &title)) } else { ("ply", ply(&geometry, &title)) };
    Ok(Figure {
        label: entry.label.clone(),
        format,
        file_name: format!("{}.{format}", file_stem(&entry.label)),
        contents,
        geometry,
        sliced,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::caustic::{full_caustic, CausticOptions, Window};
    use crate::germ::GeneratingFamily;

    fn morse() -> CausticGeometry {
        let f = GeneratingFamily::parse("x1^2+x1*x2+x2^2+q1*x1+q2*x2", 2, 0, 2).unwrap();
        full_caustic(&f, &Window::cube(2, -2.0, 2.0).unwrap(), 20, &CausticOptions::default()).unwrap()
    }

    #[test]
    fn csv_has_header_and_rows() {
        let g = morse();
        let csv = geometry_csv(&g);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("component,kind,q1,q2,x1,x2,residual"));
        assert_eq!(csv.lines().count(), 1 + g.point_count());
        assert!(csv.contains("\"Q_{∅,1}\",quasi"));
    }

    #[test]
    fn svg_lists_every_component() {
        let g = morse();
        let s = svg(&g, "morse");
        for c in &g.components {
            assert!(s.contains(&format!(r#"<g id="{}""#, c.label())));
        }
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
    }

    #[test]
    fn ply_header_counts() {
        let g = morse();
        let p = ply(&g, "morse");
        assert!(p.contains(&format!("element vertex {}", g.point_count())));
        assert!(p.contains("element face 0"));
    }

    #[test]
    fn stems_are_distinct_and_safe() {
        use std::collections::BTreeSet;
        let stems: BTreeSet<String> = crate::classify::catalog().iter().map(|e| file_stem(&e.label)).collect();
        assert_eq!(stems.len(), crate::classify::catalog().len());
        assert_eq!(file_stem("B_{2,2}^{+,+,1}"), "B_2_2_p_p_1");
        assert_eq!(file_stem("B_{2,3'}^{-,+}"), "B_2_3q_m_p");
    }
}
