//! Hand-emitted SVG polyline charts for monitor time series.

use hypermcf_core::flow::{FlowTrace, TraceRow};
use hypermcf_core::report::write_atomic;
use hypermcf_core::Result;
use std::path::Path;

const W: f64 = 800.0;
const H: f64 = 500.0;
const MARGIN: f64 = 60.0;

/// Writes one chart per monitor column under `dir`.
pub fn write_plots(dir: &Path, trace: &FlowTrace) -> Result<()> {
    let columns: [(&str, fn(&TraceRow) -> f64); 11] = [
        ("H_min", |r| r.h_min),
        ("H_max", |r| r.h_max),
        ("h_sq_max", |r| r.h_sq_max),
        ("ho_sq_max", |r| r.ho_sq_max),
        ("pinch_margin_min", |r| r.pinch_margin_min),
        ("f_sigma_max", |r| r.f_sigma_max),
        ("thm41_ratio_max", |r| r.thm41_ratio_max),
        ("grad_ratio_max", |r| r.grad_ratio_max),
        ("diam", |r| r.diam),
        ("x0_max", |r| r.x0_max),
        ("x0_bound", |r| r.x0_bound),
    ];
    for (name, get) in columns {
        let pts: Vec<(f64, f64)> = trace
            .rows
            .iter()
            .map(|r| (r.t, get(r)))
            .filter(|(t, v)| t.is_finite() && v.is_finite())
            .collect();
        if pts.len() < 2 {
            continue;
        }
        let svg = polyline_chart(name, &pts);
        write_atomic(&dir.join(format!("{name}.svg")), svg.as_bytes())?;
    }
    Ok(())
}

fn polyline_chart(name: &str, pts: &[(f64, f64)]) -> String {
    let (t0, t1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
        (a.min(p.0), b.max(p.0))
    });
    let (v0, v1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
        (a.min(p.1), b.max(p.1))
    });
    let t_span = (t1 - t0).max(1e-300);
    let v_span = (v1 - v0).max(1e-300 * v1.abs().max(1.0));
    let x = |t: f64| MARGIN + (t - t0) / t_span * (W - 2.0 * MARGIN);
    let y = |v: f64| H - MARGIN - (v - v0) / v_span * (H - 2.0 * MARGIN);

    let mut path = String::with_capacity(pts.len() * 16);
    for (t, v) in pts {
        path.push_str(&format!("{:.2},{:.2} ", x(*t), y(*v)));
    }
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {w} {h}\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "<line x1=\"{m}\" y1=\"{ybot}\" x2=\"{xr}\" y2=\"{ybot}\" stroke=\"black\"/>\n",
            "<line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{ybot}\" stroke=\"black\"/>\n",
            "<text x=\"{m}\" y=\"30\" font-size=\"18\" font-family=\"monospace\">{name} vs t</text>\n",
            "<text x=\"{m}\" y=\"{lbl}\" font-size=\"12\" font-family=\"monospace\">t in [{t0:.6e}, {t1:.6e}]</text>\n",
            "<text x=\"8\" y=\"{m}\" font-size=\"12\" font-family=\"monospace\">max {v1:.6e}</text>\n",
            "<text x=\"8\" y=\"{ybot}\" font-size=\"12\" font-family=\"monospace\">min {v0:.6e}</text>\n",
            "<polyline fill=\"none\" stroke=\"#1761a0\" stroke-width=\"1.5\" points=\"{path}\"/>\n",
            "</svg>\n"
        ),
        w = W,
        h = H,
        m = MARGIN,
        xr = W - MARGIN,
        ybot = H - MARGIN,
        lbl = H - 20.0,
        name = name,
        t0 = t0,
        t1 = t1,
        v0 = v0,
        v1 = v1,
        path = path.trim_end(),
    )
}
