//! Self-contained SVG log-log convergence plot.
//!
//! The picture contains exactly two data `<polyline>` elements (the L2 and
//! H1 error curves against the mesh size) and two reference slope lines
//! marked `class="guide"` for first and second order.

use lvem_core::analyze::ConvergenceRecord;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 460.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 30.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 55.0;

struct Axis {
    lo: f64,
    hi: f64,
    from: f64,
    to: f64,
}

impl Axis {
    /// Map log10(value) to a pixel coordinate.
    fn map(&self, v: f64) -> f64 {
        let t = (v.log10() - self.lo) / (self.hi - self.lo);
        self.from + t * (self.to - self.from)
    }

    fn decades(&self) -> Vec<i32> {
        let a = self.lo.floor() as i32;
        let b = self.hi.ceil() as i32;
        (a..=b).collect()
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

/// Render a log-log error-vs-h plot for a finished convergence study.
pub fn convergence_svg(records: &[ConvergenceRecord]) -> String {
    assert!(!records.is_empty(), "plot needs at least one record");
    let hs: Vec<f64> = records.iter().map(|r| r.h_max).collect();
    let tiny = 1e-16;
    let errs: Vec<f64> = records
        .iter()
        .flat_map(|r| [r.e_l2.max(tiny), r.e_h1.max(tiny)])
        .collect();
    let min_log = |v: &[f64]| v.iter().fold(f64::INFINITY, |a, &b| a.min(b)).log10();
    let max_log = |v: &[f64]| v.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)).log10();

    let x = Axis {
        lo: (min_log(&hs) - 0.1).floor(),
        hi: (max_log(&hs) + 0.1).ceil(),
        from: MARGIN_L,
        to: WIDTH - MARGIN_R,
    };
    let y = Axis {
        lo: (min_log(&errs) - 0.1).floor(),
        hi: (max_log(&errs) + 0.1).ceil(),
        from: HEIGHT - MARGIN_B,
        to: MARGIN_T,
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // axes
    svg.push_str(&format!(
        "<path d=\"M {l} {t} L {l} {b} L {r} {b}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n",
        l = fmt(MARGIN_L),
        r = fmt(WIDTH - MARGIN_R),
        t = fmt(MARGIN_T),
        b = fmt(HEIGHT - MARGIN_B)
    ));

    // decade ticks and labels
    for d in x.decades() {
        let px = x.map(10f64.powi(d));
        if px < MARGIN_L - 0.5 || px > WIDTH - MARGIN_R + 0.5 {
            continue;
        }
        svg.push_str(&format!(
            "<path d=\"M {px} {b0} L {px} {b1}\" stroke=\"black\"/>\n<text x=\"{px}\" y=\"{ty}\" text-anchor=\"middle\">1e{d}</text>\n",
            px = fmt(px),
            b0 = fmt(HEIGHT - MARGIN_B),
            b1 = fmt(HEIGHT - MARGIN_B + 6.0),
            ty = fmt(HEIGHT - MARGIN_B + 20.0)
        ));
    }
    for d in y.decades() {
        let py = y.map(10f64.powi(d));
        if py < MARGIN_T - 0.5 || py > HEIGHT - MARGIN_B + 0.5 {
            continue;
        }
        svg.push_str(&format!(
            "<path d=\"M {x0} {py} L {x1} {py}\" stroke=\"black\"/>\n<text x=\"{tx}\" y=\"{tyy}\" text-anchor=\"end\">1e{d}</text>\n",
            py = fmt(py),
            x0 = fmt(MARGIN_L - 6.0),
            x1 = fmt(MARGIN_L),
            tx = fmt(MARGIN_L - 10.0),
            tyy = fmt(py + 4.0)
        ));
    }

    // guide lines with slopes 1 and 2, anchored near the finest-mesh errors
    let finest = records.last().unwrap();
    let h0 = hs.iter().cloned().fold(f64::INFINITY, f64::min);
    let h1 = hs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for (slope, anchor) in [(1.0, finest.e_h1.max(tiny)), (2.0, finest.e_l2.max(tiny))] {
        let e0 = anchor * 0.5;
        let e1 = e0 * (h1 / h0).powf(slope);
        svg.push_str(&format!(
            "<line class=\"guide\" x1=\"{x1}\" y1=\"{y1}\" x2=\"{x2}\" y2=\"{y2}\" \
             stroke=\"gray\" stroke-dasharray=\"5 4\"/>\n<text x=\"{lx}\" y=\"{ly}\" fill=\"gray\">slope {slope}</text>\n",
            x1 = fmt(x.map(h0)),
            y1 = fmt(y.map(e0)),
            x2 = fmt(x.map(h1)),
            y2 = fmt(y.map(e1)),
            lx = fmt(x.map(h1) - 60.0),
            ly = fmt(y.map(e1) + 16.0),
        ));
    }

    // data curves
    for (err, color, label) in [
        (records.iter().map(|r| r.e_l2).collect::<Vec<_>>(), "#1f77b4", "L2 error"),
        (records.iter().map(|r| r.e_h1).collect::<Vec<_>>(), "#d62728", "H1 error"),
    ] {
        let pts: Vec<String> = hs
            .iter()
            .zip(&err)
            .map(|(&h, &e)| format!("{},{}", fmt(x.map(h)), fmt(y.map(e.max(tiny)))))
            .collect();
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            pts.join(" ")
        ));
        for p in &pts {
            let (px, py) = p.split_once(',').unwrap();
            svg.push_str(&format!(
                "<circle cx=\"{px}\" cy=\"{py}\" r=\"3\" fill=\"{color}\"/>\n"
            ));
        }
        let (lx, ly) = pts[0].split_once(',').unwrap();
        svg.push_str(&format!(
            "<text x=\"{lx}\" y=\"{}\" fill=\"{color}\">{label}</text>\n",
            fmt(ly.parse::<f64>().unwrap() - 8.0)
        ));
    }

    // axis labels
    svg.push_str(&format!(
        "<text x=\"{x}\" y=\"{y}\" text-anchor=\"middle\">h_max</text>\n",
        x = fmt((MARGIN_L + WIDTH - MARGIN_R) / 2.0),
        y = fmt(HEIGHT - 12.0)
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{y}\" transform=\"rotate(-90 16 {y})\" text-anchor=\"middle\">error</text>\n",
        y = fmt((MARGIN_T + HEIGHT - MARGIN_B) / 2.0)
    ));

    svg.push_str("</svg>\n");
    svg
}
