//! Hand-emitted SVG: estimator points with error bars over the analytic
//! curves. No external renderer; legibility over polish.

use aotoc_core::sweep::ResultRow;
use aotoc_core::Error;

const W: f64 = 800.0;
const H: f64 = 560.0;
const ML: f64 = 70.0;
const MR: f64 = 30.0;
const MT: f64 = 30.0;
const MB: f64 = 60.0;

pub fn render(rows: &[ResultRow]) -> Result<String, Error> {
    if rows.is_empty() {
        return Err(Error::Config("no data rows to plot".into()));
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.parameter).collect();
    let xmin = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let xmax = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if (xmax - xmin).abs() < 1e-30 { 1.0 } else { xmax - xmin };
    let mut ymax = 0.0f64;
    for r in rows {
        ymax = ymax.max(r.estimate + r.stderr).max(r.g_finite).max(r.g_thermo);
    }
    let ymax = (ymax * 1.08).max(0.1);

    let px = |x: f64| ML + (x - xmin) / span * (W - ML - MR);
    let py = |y: f64| H - MB - (y / ymax) * (H - MT - MB);

    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // axes
    s.push_str(&format!(
        "<line x1=\"{ML}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n",
        H - MB,
        W - MR
    ));
    s.push_str(&format!(
        "<line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MB
    ));
    for i in 0..=5 {
        let xv = xmin + span * i as f64 / 5.0;
        let x = px(xv);
        s.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{0}\" x2=\"{x}\" y2=\"{1}\" stroke=\"black\"/>\n",
            H - MB,
            H - MB + 6.0
        ));
        s.push_str(&format!(
            "<text x=\"{x}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{xv:.3}</text>\n",
            H - MB + 20.0
        ));
        let yv = ymax * i as f64 / 5.0;
        let y = py(yv);
        s.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{y}\" x2=\"{ML}\" y2=\"{y}\" stroke=\"black\"/>\n",
            ML - 6.0
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">{yv:.3}</text>\n",
            ML - 10.0,
            y + 4.0
        ));
    }
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\">parameter</text>\n",
        (ML + W - MR) / 2.0,
        H - 15.0
    ));
    s.push_str(&format!(
        "<text x=\"18\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">A-OTOC</text>\n",
        (MT + H - MB) / 2.0
    ));

    // analytic curves, sorted by parameter
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| rows[a].parameter.partial_cmp(&rows[b].parameter).unwrap());
    let polyline = |f: &dyn Fn(&ResultRow) -> f64| -> String {
        order
            .iter()
            .map(|&i| format!("{:.2},{:.2}", px(rows[i].parameter), py(f(&rows[i]))))
            .collect::<Vec<_>>()
            .join(" ")
    };
    s.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\n",
        polyline(&|r| r.g_finite)
    ));
    s.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>\n",
        polyline(&|r| r.g_thermo)
    ));

    // data points with error bars
    for r in rows {
        let x = px(r.parameter);
        let (ylo, yhi) = (py(r.estimate - r.stderr), py(r.estimate + r.stderr));
        s.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{ylo:.2}\" x2=\"{x}\" y2=\"{yhi:.2}\" stroke=\"#d62728\"/>\n"
        ));
        for ye in [ylo, yhi] {
            s.push_str(&format!(
                "<line x1=\"{:.2}\" y1=\"{ye:.2}\" x2=\"{:.2}\" y2=\"{ye:.2}\" stroke=\"#d62728\"/>\n",
                x - 4.0,
                x + 4.0
            ));
        }
        s.push_str(&format!(
            "<circle cx=\"{x:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"#d62728\"/>\n",
            py(r.estimate)
        ));
    }

    // legend
    let legend = [
        ("#1f77b4", "finite-L closed form"),
        ("#2ca02c", "thermodynamic limit"),
        ("#d62728", &format!("{} estimate", rows[0].ensemble)[..]),
    ];
    for (i, (color, label)) in legend.iter().enumerate() {
        let y = MT + 16.0 + 18.0 * i as f64;
        s.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{y}\" x2=\"{1}\" y2=\"{y}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            ML + 12.0,
            ML + 40.0
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\">{label}</text>\n",
            ML + 46.0,
            y + 4.0
        ));
    }

    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(p: f64, e: f64) -> ResultRow {
        ResultRow {
            parameter: p,
            estimate: e,
            stderr: 0.01,
            g_finite: e,
            g_thermo: e * 0.98,
            ensemble: "brickwork-haar".into(),
            l: 8,
            k: 1,
            seed: 1,
        }
    }

    #[test]
    fn renders_points_and_curves() {
        let rows: Vec<ResultRow> = (0..10).map(|i| row(i as f64 / 9.0, (i as f64 / 9.0).sin())).collect();
        let svg = render(&rows).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 10);
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn empty_rows_error() {
        assert!(render(&[]).is_err());
    }
}
