//! Minimal SVG writer for the boundary staircase: axes, a few ticks, the
//! piecewise-constant trajectory, and recorded jumps drawn as dashed
//! vertical segments. No external renderer.

use stefan_gt::boundary::BoundaryPath;

const W: f64 = 880.0;
const H: f64 = 660.0;
const MARGIN: f64 = 60.0;

fn coord(v: f64, lo: f64, hi: f64, out_lo: f64, out_hi: f64) -> f64 {
    if hi <= lo {
        return 0.5 * (out_lo + out_hi);
    }
    out_lo + (v - lo) / (hi - lo) * (out_hi - out_lo)
}

pub fn render(path: &BoundaryPath, jump_threshold: f64) -> String {
    let times = path.times();
    let t_max = *times.last().unwrap_or(&1.0);
    let r_max = path.radii.iter().cloned().fold(0.0f64, f64::max).max(1e-12);
    let x_of = |t: f64| coord(t, 0.0, t_max.max(1e-12), MARGIN, W - MARGIN);
    let y_of = |r: f64| coord(r, 0.0, 1.05 * r_max, H - MARGIN, MARGIN);

    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {W} {H}\" font-family=\"monospace\" font-size=\"13\">\n"
    ));
    s.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    ));
    // axes
    s.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN
    ));
    s.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{m}\" y2=\"{t}\" stroke=\"black\"/>\n",
        m = MARGIN,
        b = H - MARGIN,
        t = MARGIN
    ));
    for i in 0..=5 {
        let t = t_max * i as f64 / 5.0;
        let r = 1.05 * r_max * i as f64 / 5.0;
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{:.3}</text>\n",
            x_of(t),
            H - MARGIN + 22.0,
            t
        ));
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{:.3}</text>\n",
            MARGIN - 8.0,
            y_of(r) + 4.0,
            r
        ));
    }
    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">t</text>\n",
        0.5 * W,
        H - 14.0
    ));

    if path.radii.len() == 1 {
        s.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"black\"/>\n",
            x_of(0.0),
            y_of(path.radii[0])
        ));
        s.push_str("</svg>\n");
        return s;
    }

    // staircase: horizontal runs; vertical connectors solid when small,
    // dashed when the step is a recorded/over-threshold jump
    for m in 0..path.radii.len() - 1 {
        let (t0, t1) = (times[m], times[m + 1]);
        let (r0, r1) = (path.radii[m], path.radii[m + 1]);
        s.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\" stroke-width=\"1.4\"/>\n",
            x_of(t0),
            y_of(r0),
            x_of(t1),
            y_of(r0)
        ));
        if (r1 - r0).abs() > 0.0 {
            let is_jump = path.jumps.iter().any(|j| j.step == m)
                || (jump_threshold > 0.0 && (r1 - r0).abs() > jump_threshold);
            let dash = if is_jump { " stroke-dasharray=\"6 4\"" } else { "" };
            s.push_str(&format!(
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\" stroke-width=\"1.1\"{dash}/>\n",
                x_of(t1),
                y_of(r0),
                x_of(t1),
                y_of(r1)
            ));
        }
    }
    s.push_str("</svg>\n");
    s
}
