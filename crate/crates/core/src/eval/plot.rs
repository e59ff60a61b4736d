use std::fmt::Write as _;

use super::EvalReport;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 50.0;

/// A line chart of the three curves against `t`, percent on the y axis.
pub fn render_svg(report: &EvalReport) -> String {
    let pw = WIDTH - 2.0 * MARGIN;
    let ph = HEIGHT - 2.0 * MARGIN;
    let x = |t: f64| MARGIN + t * pw;
    let y = |v: f64| HEIGHT - MARGIN - v / 100.0 * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for k in 0..=10 {
        let f = k as f64 / 10.0;
        let (gx, gy) = (x(f), y(f * 100.0));
        let _ = writeln!(
            s,
            r##"<line x1="{gx:.1}" y1="{:.1}" x2="{gx:.1}" y2="{:.1}" stroke="#ddd"/><line x1="{:.1}" y1="{gy:.1}" x2="{:.1}" y2="{gy:.1}" stroke="#ddd"/>"##,
            y(0.0),
            y(100.0),
            x(0.0),
            x(1.0)
        );
        let _ = writeln!(
            s,
            r#"<text x="{gx:.1}" y="{:.1}" text-anchor="middle">{f:.1}</text><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            y(0.0) + 16.0,
            x(0.0) - 6.0,
            gy + 4.0,
            k * 10
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">threshold t (fraction of radius)</text>"#,
        x(0.5),
        HEIGHT - 10.0
    );
    let series = [
        ("precision", "#1f77b4", &report.precision, report.precision_auc),
        ("recall", "#d62728", &report.recall, report.recall_auc),
        ("F1", "#2ca02c", &report.f1, report.f1_auc),
    ];
    for (i, (name, color, curve, auc)) in series.iter().enumerate() {
        let pts: Vec<String> = report
            .thresholds
            .iter()
            .zip(curve.iter())
            .map(|(&t, &v)| format!("{:.2},{:.2}", x(t), y(v)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = MARGIN + 10.0 + 18.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{name} (AUC {auc:.3})</text>"#,
            x(0.62),
            x(0.68),
            x(0.7),
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}
