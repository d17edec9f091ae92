//! Self-contained SVG convergence charts.
//!
//! Hand-drawn line charts — one polyline per solver, log₁₀ of the
//! relative residual against the iteration index — kept free of any
//! plotting dependency so the artifact is a single portable file. All
//! coordinates are formatted with fixed precision, which keeps repeated
//! runs byte-identical.

const WIDTH: f64 = 780.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 52.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

/// Smallest relative residual the chart resolves; anything below is
/// clamped so exact zeros stay plottable.
const LOG_CLAMP: f64 = -16.0;

struct Frame {
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, iter: f64) -> f64 {
        MARGIN_LEFT + (WIDTH - MARGIN_LEFT - MARGIN_RIGHT) * iter / self.x_max
    }

    fn y(&self, log_res: f64) -> f64 {
        let span = self.y_max - self.y_min;
        MARGIN_TOP + (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM) * (self.y_max - log_res) / span
    }
}

fn log_rel(norms: &[f64]) -> Vec<f64> {
    let r0 = norms.first().copied().unwrap_or(1.0).max(f64::MIN_POSITIVE);
    norms.iter().map(|&r| ((r / r0).log10()).max(LOG_CLAMP)).collect()
}

/// Evenly spaced "nice" tick step covering `span` with at most `max_ticks`.
fn tick_step(span: f64, max_ticks: usize) -> f64 {
    let raw = span / max_ticks as f64;
    let mag = 10f64.powf(raw.log10().floor());
    for mult in [1.0, 2.0, 5.0, 10.0] {
        if mag * mult >= raw {
            return mag * mult;
        }
    }
    mag * 10.0
}

/// Renders residual histories as a complete SVG document.
///
/// `series` pairs a solver name with its residual-norm history
/// (including the initial residual at index 0).
pub fn render_convergence(title: &str, series: &[(String, Vec<f64>)]) -> String {
    let x_max = series.iter().map(|(_, n)| n.len().saturating_sub(1)).max().unwrap_or(1).max(1);
    let logs: Vec<(&str, Vec<f64>)> =
        series.iter().map(|(name, norms)| (name.as_str(), log_rel(norms))).collect();
    let mut y_min = 0.0_f64;
    let mut y_max = 0.0_f64;
    for (_, l) in &logs {
        for &v in l {
            y_min = y_min.min(v);
            y_max = y_max.max(v);
        }
    }
    // Round out to whole decades and keep at least one of visible span.
    let y_min = (y_min - 0.5).floor();
    let y_max = (y_max + 0.5).ceil();
    let frame = Frame { x_max: x_max as f64, y_min, y_max };

    let mut svg = String::with_capacity(8 * 1024);
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"13\">\n"
    ));
    svg.push_str(&format!(
        "  <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        (MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0,
        escape(title)
    ));

    // Horizontal grid and y tick labels: one line per whole decade step.
    let y_step = tick_step(y_max - y_min, 8).max(1.0);
    let mut tick = y_min;
    while tick <= y_max + 1e-9 {
        let y = frame.y(tick);
        svg.push_str(&format!(
            "  <line x1=\"{MARGIN_LEFT}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" \
             stroke=\"#dddddd\" stroke-width=\"1\"/>\n",
            WIDTH - MARGIN_RIGHT
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">1e{}</text>\n",
            MARGIN_LEFT - 8.0,
            y + 4.0,
            tick as i64
        ));
        tick += y_step;
    }

    // Vertical grid and x tick labels.
    let x_step = tick_step(frame.x_max, 10).max(1.0);
    let mut tick = 0.0;
    while tick <= frame.x_max + 1e-9 {
        let x = frame.x(tick);
        svg.push_str(&format!(
            "  <line x1=\"{x:.1}\" y1=\"{MARGIN_TOP}\" x2=\"{x:.1}\" y2=\"{:.1}\" \
             stroke=\"#eeeeee\" stroke-width=\"1\"/>\n",
            HEIGHT - MARGIN_BOTTOM
        ));
        svg.push_str(&format!(
            "  <text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
            HEIGHT - MARGIN_BOTTOM + 18.0,
            tick as i64
        ));
        tick += x_step;
    }

    // Axes on top of the grid.
    svg.push_str(&format!(
        "  <line x1=\"{MARGIN_LEFT}\" y1=\"{MARGIN_TOP}\" x2=\"{MARGIN_LEFT}\" y2=\"{y0:.1}\" \
         stroke=\"black\" stroke-width=\"1.5\"/>\n  <line x1=\"{MARGIN_LEFT}\" y1=\"{y0:.1}\" \
         x2=\"{x1:.1}\" y2=\"{y0:.1}\" stroke=\"black\" stroke-width=\"1.5\"/>\n",
        y0 = HEIGHT - MARGIN_BOTTOM,
        x1 = WIDTH - MARGIN_RIGHT
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">iteration</text>\n",
        (MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0,
        HEIGHT - 12.0
    ));
    svg.push_str(&format!(
        "  <text x=\"18\" y=\"{:.1}\" text-anchor=\"middle\" \
         transform=\"rotate(-90 18 {:.1})\">relative residual</text>\n",
        (MARGIN_TOP + HEIGHT - MARGIN_BOTTOM) / 2.0,
        (MARGIN_TOP + HEIGHT - MARGIN_BOTTOM) / 2.0
    ));

    // One polyline and legend entry per series.
    for (idx, (name, l)) in logs.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let points: Vec<String> = l
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.1},{:.1}", frame.x(i as f64), frame.y(v)))
            .collect();
        svg.push_str(&format!(
            "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\" points=\"{}\"/>\n",
            points.join(" ")
        ));
        let ly = MARGIN_TOP + 14.0 + 20.0 * idx as f64;
        svg.push_str(&format!(
            "  <rect x=\"{:.1}\" y=\"{:.1}\" width=\"14\" height=\"4\" fill=\"{color}\"/>\n",
            WIDTH - MARGIN_RIGHT + 12.0,
            ly - 4.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{ly:.1}\">{}</text>\n",
            WIDTH - MARGIN_RIGHT + 32.0,
            escape(name)
        ));
    }

    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_contains_a_polyline_per_series() {
        let svg = render_convergence(
            "two solvers",
            &[
                ("gmres".into(), vec![1.0, 0.1, 0.01, 1e-9]),
                ("ngmres-1".into(), vec![1.0, 0.2, 0.01]),
            ],
        );
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("gmres"));
        assert!(svg.contains("ngmres-1"));
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn zero_residuals_are_clamped_not_infinite() {
        let svg = render_convergence("stalls at zero", &[("gmres".into(), vec![1.0, 0.0])]);
        assert!(!svg.contains("inf"));
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn rendering_is_deterministic() {
        let series = vec![("mr".into(), vec![2.0, 1.5, 0.7, 0.3])];
        assert_eq!(
            render_convergence("repeat", &series),
            render_convergence("repeat", &series)
        );
    }
}
