//! Pareto scatter plot. Plain string building with fixed precision, so
//! equal scores give equal bytes.

use std::fmt::Write;

use tms_core::metrics::ArchScore;

const W: f64 = 720.0;
const H: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 90.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn range(values: impl Iterator<Item = f64>, min_pad: f64) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = ((hi - lo) * 0.08).max(min_pad);
    (lo - pad, hi + pad)
}

/// Complexity across, performance objective up. Front members are red and
/// joined by a dashed staircase; unscored architectures are listed below
/// the axes.
pub fn pareto_svg(scores: &[ArchScore]) -> String {
    let mut pts: Vec<(&ArchScore, f64)> = scores.iter().filter_map(|s| s.performance.map(|p| (s, p))).collect();
    pts.sort_by(|a, b| a.0.id.cmp(&b.0.id));
    let (x0, x1) = range(pts.iter().map(|p| p.0.complexity as f64), 1.0);
    let (y0, y1) = range(pts.iter().map(|p| p.1), 0.05);
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * (W - LEFT - RIGHT);
    let py = |y: f64| H - BOTTOM - (y - y0) / (y1 - y0) * (H - TOP - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {W} {H}" width="{W}" height="{H}" font-family="sans-serif">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="28" text-anchor="middle" font-size="16">Complexity vs performance</text>"#,
        W / 2.0
    );
    let (ax, ay) = (LEFT, H - BOTTOM);
    let _ = writeln!(s, r#"<path d="M{ax:.1},{TOP:.1} V{ay:.1} H{:.1}" stroke="black" fill="none"/>"#, W - RIGHT);
    for k in 0..=4 {
        let x = x0 + (x1 - x0) * k as f64 / 4.0;
        let y = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="10">{x:.1}</text>"#,
            px(x),
            ay + 15.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="10">{y:.2}</text>"#,
            ax - 6.0,
            py(y) + 3.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">Complexity factor (valves + junctions)</text>"#,
        (LEFT + W - RIGHT) / 2.0,
        ay + 35.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.1}" text-anchor="middle" font-size="12" transform="rotate(-90 20 {:.1})">Performance objective</text>"#,
        (TOP + ay) / 2.0,
        (TOP + ay) / 2.0
    );

    let mut front: Vec<(f64, f64)> =
        pts.iter().filter(|p| p.0.pareto_member).map(|p| (p.0.complexity as f64, p.1)).collect();
    front.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if front.len() > 1 {
        let mut d = format!("M{:.1},{:.1}", px(front[0].0), py(front[0].1));
        for w in front.windows(2) {
            let _ = write!(d, " H{:.1} V{:.1}", px(w[1].0), py(w[1].1));
        }
        let _ = writeln!(s, r##"<path d="{d}" stroke="#d62728" stroke-dasharray="4 3" fill="none"/>"##);
    }
    for (a, p) in &pts {
        let (cx, cy) = (px(a.complexity as f64), py(*p));
        let (class, fill) = if a.pareto_member { ("member", "#d62728") } else { ("other", "#7f7f7f") };
        let id = escape(&a.id);
        let _ = writeln!(
            s,
            r#"<circle class="{class}" data-id="{id}" cx="{cx:.1}" cy="{cy:.1}" r="5" fill="{fill}"><title>{id}: complexity {}, performance {p:.4}</title></circle>"#,
            a.complexity
        );
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-size="9">{id}</text>"#, cx + 7.0, cy - 7.0);
    }
    let mut excluded: Vec<String> = scores.iter().filter(|s| s.performance.is_none()).map(|s| escape(&s.id)).collect();
    excluded.sort();
    if !excluded.is_empty() {
        let _ = writeln!(
            s,
            r#"<text class="excluded" x="{LEFT:.1}" y="{:.1}" font-size="10">Excluded, never reached comfort: {}</text>"#,
            H - 20.0,
            excluded.join(", ")
        );
    }
    s.push_str("</svg>\n");
    s
}
