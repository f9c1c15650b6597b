use std::fmt::Write as _;

use super::ChartError;
use crate::stats::CorrelationMatrix;

pub type Rgb = [u8; 3];

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapStyle {
    /// Color at -1.
    pub cold: Rgb,
    /// Color at 0.
    pub neutral: Rgb,
    /// Color at +1.
    pub warm: Rgb,
    /// Decimals in cell annotations.
    pub precision: usize,
    pub cell_size: u32,
    pub font_size: u32,
    pub hatch: Rgb,
    pub title: Option<String>,
}

impl Default for HeatmapStyle {
    fn default() -> Self {
        Self {
            cold: [59, 76, 192],
            neutral: [221, 221, 221],
            warm: [180, 4, 38],
            precision: 2,
            cell_size: 56,
            font_size: 11,
            hatch: [136, 136, 136],
            title: None,
        }
    }
}

/// Position of a coefficient on the ramp, 0 at -1 and 1 at +1.
pub fn ramp_position(r: f64) -> f64 {
    ((r.clamp(-1.0, 1.0) + 1.0) / 2.0).clamp(0.0, 1.0)
}

fn lerp(a: Rgb, b: Rgb, t: f64) -> Rgb {
    let mut out = [0; 3];
    for k in 0..3 {
        out[k] = (a[k] as f64 + (b[k] as f64 - a[k] as f64) * t).round() as u8;
    }
    out
}

/// Linear interpolation cold→neutral on [-1, 0] and neutral→warm on [0, 1].
pub fn ramp_color(r: f64, style: &HeatmapStyle) -> Rgb {
    let p = ramp_position(r);
    if p <= 0.5 {
        lerp(style.cold, style.neutral, p * 2.0)
    } else {
        lerp(style.neutral, style.warm, (p - 0.5) * 2.0)
    }
}

fn hex(c: Rgb) -> String {
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Perceived lightness, used to pick annotation color.
fn is_dark(c: Rgb) -> bool {
    0.299 * c[0] as f64 + 0.587 * c[1] as f64 + 0.114 * (c[2] as f64) < 140.0
}

/// Standalone SVG: one `rect.cell` per matrix entry, annotations, row and
/// column labels and a vertical color legend. Undefined cells are hatched.
pub fn render_heatmap_svg(
    m: &CorrelationMatrix,
    style: &HeatmapStyle,
) -> Result<String, ChartError> {
    let k = m.size();
    if k == 0 {
        return Err(ChartError::EmptyMatrix);
    }
    let cs = style.cell_size;
    let fs = style.font_size;
    // rough label width; monospace-ish estimate keeps layout deterministic
    let label_w = m
        .labels()
        .iter()
        .map(|l| l.chars().count())
        .max()
        .unwrap_or(0) as u32
        * fs
        * 6
        / 10
        + 12;
    let title_h = if style.title.is_some() { fs * 2 + 8 } else { 8 };
    let left = label_w;
    let top = title_h + label_w;
    let grid = cs * k as u32;
    let legend_x = left + grid + 24;
    let legend_w = 16;
    let width = legend_x + legend_w + 48;
    let height = top + grid + 16;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="{fs}">"#
    );
    let _ = writeln!(s, "<defs>");
    let _ = writeln!(
        s,
        r##"<pattern id="hatch" patternUnits="userSpaceOnUse" width="6" height="6" patternTransform="rotate(45)"><rect width="6" height="6" fill="#ffffff"/><line x1="0" y1="0" x2="0" y2="6" stroke="{}" stroke-width="2"/></pattern>"##,
        hex(style.hatch)
    );
    let _ = writeln!(
        s,
        r#"<linearGradient id="ramp" x1="0" y1="1" x2="0" y2="0">"#
    );
    for step in 0..=20 {
        let r = -1.0 + step as f64 * 0.1;
        let _ = writeln!(
            s,
            r#"<stop offset="{:.2}" stop-color="{}"/>"#,
            ramp_position(r),
            hex(ramp_color(r, style))
        );
    }
    let _ = writeln!(s, "</linearGradient>");
    let _ = writeln!(s, "</defs>");
    let _ = writeln!(
        s,
        r##"<rect width="{width}" height="{height}" fill="#ffffff"/>"##
    );
    if let Some(t) = &style.title {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="{}">{}</text>"#,
            width / 2,
            fs + 8,
            fs + 3,
            escape(t)
        );
    }

    for (i, label) in m.labels().iter().enumerate() {
        let cy = top + cs * i as u32 + cs / 2;
        let _ = writeln!(
            s,
            r#"<text class="row-label" x="{}" y="{cy}" text-anchor="end" dominant-baseline="middle">{}</text>"#,
            left - 6,
            escape(label)
        );
        let cx = left + cs * i as u32 + cs / 2;
        let _ = writeln!(
            s,
            r#"<text class="col-label" x="{cx}" y="{}" text-anchor="start" transform="rotate(-90 {cx} {})" dominant-baseline="middle">{}</text>"#,
            top - 6,
            top - 6,
            escape(label)
        );
    }

    for i in 0..k {
        for j in 0..k {
            let x = left + cs * j as u32;
            let y = top + cs * i as u32;
            match m.get(i, j) {
                Some(v) => {
                    let fill = ramp_color(v, style);
                    let ink = if is_dark(fill) { "#ffffff" } else { "#000000" };
                    let _ = writeln!(
                        s,
                        r#"<rect class="cell" data-row="{i}" data-col="{j}" x="{x}" y="{y}" width="{cs}" height="{cs}" fill="{}"/>"#,
                        hex(fill)
                    );
                    let text = format!("{:.*}", style.precision, v);
                    let text = if text.starts_with('-')
                        && text[1..].chars().all(|c| c == '0' || c == '.')
                    {
                        text[1..].to_string()
                    } else {
                        text
                    };
                    let _ = writeln!(
                        s,
                        r#"<text class="value" x="{}" y="{}" text-anchor="middle" dominant-baseline="middle" fill="{ink}">{text}</text>"#,
                        x + cs / 2,
                        y + cs / 2
                    );
                }
                None => {
                    let _ = writeln!(
                        s,
                        r#"<rect class="cell undefined" data-row="{i}" data-col="{j}" x="{x}" y="{y}" width="{cs}" height="{cs}" fill="url(#hatch)"/>"#
                    );
                }
            }
        }
    }

    let _ = writeln!(
        s,
        r##"<rect class="legend" x="{legend_x}" y="{top}" width="{legend_w}" height="{grid}" fill="url(#ramp)" stroke="#444444" stroke-width="0.5"/>"##
    );
    for tick in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        let ty = top as f64 + grid as f64 * (1.0 - ramp_position(tick));
        let _ = writeln!(
            s,
            r#"<text class="legend-tick" x="{}" y="{ty:.1}" dominant-baseline="middle">{tick:.1}</text>"#,
            legend_x + legend_w + 4
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
