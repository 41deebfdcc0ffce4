//! Plain-SVG emission for barcodes: persistence diagrams for one parameter,
//! and the planar hook convention for signed barcodes (a finite hook `[p,q)`
//! draws the segment from `p` to `q`, a principal upset the diagonal ray from
//! its origin; positive bars blue, negative red).

use crate::grid::SignedBarcode;
use crate::persistence::{Bar, Barcode};

const SIZE: f64 = 400.0;
const MARGIN: f64 = 40.0;

struct Frame {
    min: f64,
    max: f64,
}

impl Frame {
    fn around(values: impl Iterator<Item = f64>) -> Frame {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for v in values {
            min = min.min(v);
            max = max.max(v);
        }
        if !min.is_finite() || !max.is_finite() {
            (min, max) = (0.0, 1.0);
        }
        if min == max {
            max = min + 1.0;
        }
        let pad = 0.05 * (max - min);
        Frame { min: min - pad, max: max + pad }
    }

    fn x(&self, v: f64) -> f64 {
        MARGIN + (v - self.min) / (self.max - self.min) * (SIZE - 2.0 * MARGIN)
    }

    fn y(&self, v: f64) -> f64 {
        SIZE - MARGIN - (v - self.min) / (self.max - self.min) * (SIZE - 2.0 * MARGIN)
    }
}

fn header(out: &mut String) {
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n"
    ));
}

/// Persistence diagram of a one-parameter barcode: one dot per finite bar,
/// one arrow-head dot on the top rail per infinite bar, plus the diagonal.
pub fn persistence_diagram(barcode: &Barcode) -> String {
    let values = barcode
        .bars
        .iter()
        .flat_map(|b| {
            let mut v = vec![b.birth[0]];
            if let Some(d) = &b.death {
                v.push(d[0]);
            }
            v
        })
        .chain([0.0]);
    let frame = Frame::around(values);
    let mut out = String::new();
    header(&mut out);
    out.push_str(&format!(
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#888\"/>\n",
        frame.x(frame.min),
        frame.y(frame.min),
        frame.x(frame.max),
        frame.y(frame.max)
    ));
    let top = frame.y(frame.max) - 8.0;
    for bar in &barcode.bars {
        let bx = frame.x(bar.birth[0]);
        match &bar.death {
            Some(d) => out.push_str(&format!(
                "  <circle cx=\"{bx}\" cy=\"{}\" r=\"3\" fill=\"#1f77b4\"/>\n",
                frame.y(d[0])
            )),
            None => out.push_str(&format!(
                "  <circle cx=\"{bx}\" cy=\"{top}\" r=\"3\" fill=\"#1f77b4\" stroke=\"#000\"/>\n"
            )),
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Signed barcode drawing. Two parameters use the planar hook convention;
/// one parameter falls back to stacked horizontal bars, positive above
/// negative.
pub fn signed_barcode_figure(barcode: &SignedBarcode) -> String {
    if barcode.n == 2 {
        planar_hooks(barcode)
    } else {
        stacked_bars(barcode)
    }
}

fn color(sign: i8) -> &'static str {
    if sign >= 0 { "#1f77b4" } else { "#d62728" }
}

fn planar_hooks(barcode: &SignedBarcode) -> String {
    let values = barcode
        .positive
        .iter()
        .chain(&barcode.negative)
        .flat_map(|b| {
            let mut v = b.birth.clone();
            if let Some(d) = &b.death {
                v.extend_from_slice(d);
            }
            v
        })
        .chain([0.0]);
    let frame = Frame::around(values);
    let mut out = String::new();
    header(&mut out);
    for bar in barcode.positive.iter().chain(&barcode.negative) {
        let (x1, y1) = (frame.x(bar.birth[0]), frame.y(bar.birth[1]));
        let (x2, y2) = match &bar.death {
            Some(d) => (frame.x(d[0]), frame.y(d[1])),
            // diagonal ray, clipped at the frame border
            None => {
                let reach = frame.max - bar.birth[0].max(bar.birth[1]);
                (frame.x(bar.birth[0] + reach), frame.y(bar.birth[1] + reach))
            }
        };
        let dash = if bar.death.is_none() { " stroke-dasharray=\"6 3\"" } else { "" };
        out.push_str(&format!(
            "  <line x1=\"{x1}\" y1=\"{y1}\" x2=\"{x2}\" y2=\"{y2}\" stroke=\"{}\" stroke-width=\"2\"{dash}/>\n",
            color(bar.sign)
        ));
    }
    out.push_str("</svg>\n");
    out
}

fn stacked_bars(barcode: &SignedBarcode) -> String {
    let bars: Vec<&Bar> = barcode.positive.iter().chain(&barcode.negative).collect();
    let values = bars
        .iter()
        .flat_map(|b| {
            let mut v = vec![b.birth[0]];
            if let Some(d) = &b.death {
                v.push(d[0]);
            }
            v
        })
        .chain([0.0]);
    let frame = Frame::around(values);
    let mut out = String::new();
    header(&mut out);
    let step = (SIZE - 2.0 * MARGIN) / (bars.len().max(1) as f64 + 1.0);
    for (i, bar) in bars.iter().enumerate() {
        let y = MARGIN + step * (i as f64 + 1.0);
        let x1 = frame.x(bar.birth[0]);
        let x2 = match &bar.death {
            Some(d) => frame.x(d[0]),
            None => frame.x(frame.max),
        };
        let dash = if bar.death.is_none() { " stroke-dasharray=\"6 3\"" } else { "" };
        out.push_str(&format!(
            "  <line x1=\"{x1}\" y1=\"{y}\" x2=\"{x2}\" y2=\"{y}\" stroke=\"{}\" stroke-width=\"3\"{dash}/>\n",
            color(bar.sign)
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Scatter plot of a planar point cloud.
pub fn cloud_figure(points: &[Vec<f64>]) -> String {
    let frame = Frame::around(points.iter().flat_map(|p| p.iter().copied()).chain([-1.0, 1.0]));
    let mut out = String::new();
    header(&mut out);
    out.push_str(&format!(
        "  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#bbb\"/>\n",
        frame.x(-1.0),
        frame.y(1.0),
        frame.x(1.0) - frame.x(-1.0),
        frame.y(-1.0) - frame.y(1.0)
    ));
    for p in points {
        out.push_str(&format!(
            "  <circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"#2ca02c\"/>\n",
            frame.x(p[0]),
            frame.y(p.get(1).copied().unwrap_or(0.0))
        ));
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(haystack: &str, needle: &str) -> usize {
        haystack.matches(needle).count()
    }

    #[test]
    fn diagram_has_one_element_per_bar() {
        let b = Barcode::new(
            1,
            vec![
                Bar::finite(vec![0.0], vec![2.0]),
                Bar::finite(vec![1.0], vec![4.0]),
                Bar::infinite(vec![0.5]),
            ],
        );
        let svg = persistence_diagram(&b);
        assert_eq!(count(&svg, "<circle"), 3);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn signed_figure_draws_hooks_and_rays() {
        let sb = SignedBarcode::new(
            2,
            vec![Bar::finite(vec![0.0, 0.0], vec![1.0, 2.0]), Bar::infinite(vec![0.5, 0.5])],
            vec![Bar::finite(vec![0.0, 0.0], vec![2.0, 2.0])],
        );
        let svg = signed_barcode_figure(&sb);
        assert_eq!(count(&svg, "<line"), 3);
        assert_eq!(count(&svg, "#d62728"), 1);
        assert_eq!(count(&svg, "stroke-dasharray"), 1);
    }

    #[test]
    fn one_parameter_signed_figure_stacks() {
        let sb = SignedBarcode::new(
            1,
            vec![Bar::finite(vec![0.0], vec![2.0])],
            vec![Bar::finite(vec![1.0], vec![3.0])],
        );
        let svg = signed_barcode_figure(&sb);
        assert_eq!(count(&svg, "<line"), 2);
    }
}
