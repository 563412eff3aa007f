//! Self-contained SVG scatter plots of PCA projections: circles for source
//! samples, crosses for target samples, one color per digit class.

use dda_core::dataset::DomainTag;
use dda_core::pca::ProjectionRow;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 540.0;
const MARGIN: f64 = 50.0;

/// One distinguishable color per digit.
const PALETTE: [&str; 10] = [
    "#e6194b", "#3cb44b", "#ffe119", "#4363d8", "#f58231", "#911eb4", "#46f0f0", "#f032e6",
    "#bcf60c", "#008080",
];

pub fn scatter_svg(rows: &[ProjectionRow], title: &str) -> String {
    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in rows {
        min_x = min_x.min(r.pc1);
        max_x = max_x.max(r.pc1);
        min_y = min_y.min(r.pc2);
        max_y = max_y.max(r.pc2);
    }
    if rows.is_empty() || !(max_x > min_x) {
        min_x = -1.0;
        max_x = 1.0;
    }
    if rows.is_empty() || !(max_y > min_y) {
        min_y = -1.0;
        max_y = 1.0;
    }
    let sx = (WIDTH - 2.0 * MARGIN) / (max_x - min_x);
    let sy = (HEIGHT - 2.0 * MARGIN) / (max_y - min_y);
    let px = |x: f64| MARGIN + (x - min_x) * sx;
    let py = |y: f64| HEIGHT - MARGIN - (y - min_y) * sy;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    out.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" \
         text-anchor=\"middle\">{title}</text>\n",
        WIDTH / 2.0
    ));
    out.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"#444\"/>\n\
         <line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"#444\"/>\n\
         <text x=\"{cx}\" y=\"{lx}\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"middle\">pc1</text>\n\
         <text x=\"14\" y=\"{cy}\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"middle\" transform=\"rotate(-90 14 {cy})\">pc2</text>\n",
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN,
        t = MARGIN,
        cx = WIDTH / 2.0,
        lx = HEIGHT - 14.0,
        cy = HEIGHT / 2.0,
    ));
    for r in rows {
        let color = PALETTE[(r.label as usize) % PALETTE.len()];
        let (x, y) = (px(r.pc1), py(r.pc2));
        match r.domain {
            DomainTag::Source => out.push_str(&format!(
                "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"none\" \
                 stroke=\"{color}\" stroke-width=\"1.2\"/>\n"
            )),
            DomainTag::Target => out.push_str(&format!(
                "<path d=\"M{:.2} {:.2} L{:.2} {:.2} M{:.2} {:.2} L{:.2} {:.2}\" \
                 stroke=\"{color}\" stroke-width=\"1.2\"/>\n",
                x - 3.0,
                y - 3.0,
                x + 3.0,
                y + 3.0,
                x - 3.0,
                y + 3.0,
                x + 3.0,
                y - 3.0,
            )),
        }
    }
    // Legend: shapes for domains, colors for digits.
    out.push_str(&format!(
        "<circle cx=\"{x}\" cy=\"34\" r=\"3\" fill=\"none\" stroke=\"#444\"/>\
         <text x=\"{tx}\" y=\"38\" font-family=\"sans-serif\" font-size=\"11\">source</text>\n\
         <path d=\"M{x2} 31 L{x3} 37 M{x2} 37 L{x3} 31\" stroke=\"#444\"/>\
         <text x=\"{tx2}\" y=\"38\" font-family=\"sans-serif\" font-size=\"11\">target</text>\n",
        x = WIDTH - 170.0,
        tx = WIDTH - 162.0,
        x2 = WIDTH - 110.0,
        x3 = WIDTH - 104.0,
        tx2 = WIDTH - 98.0,
    ));
    for (digit, color) in PALETTE.iter().enumerate() {
        let x = MARGIN + digit as f64 * 34.0;
        out.push_str(&format!(
            "<rect x=\"{x}\" y=\"{y}\" width=\"10\" height=\"10\" fill=\"{color}\"/>\
             <text x=\"{tx}\" y=\"{ty}\" font-family=\"sans-serif\" font-size=\"11\">{digit}</text>\n",
            y = HEIGHT - 34.0,
            tx = x + 13.0,
            ty = HEIGHT - 25.0,
        ));
    }
    out.push_str("</svg>\n");
    out
}
