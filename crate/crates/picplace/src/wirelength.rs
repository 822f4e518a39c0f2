//! Differentiable wirelength objectives.
//!
//! The primary model multiplies a smooth weighted-average span per axis,
//! raised to an exponent, by a bending penalty that grows when a port's
//! orientation disagrees with the pin-to-pin vector. WA, LSE and quadratic
//! baselines share the same evaluation interface.

use crate::geom::Point;
use crate::netlist::{Design, PortDir};

/// Below this pin separation the bending penalty and its gradient are zero.
pub const DEGENERATE_EPS: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WlModel {
    CosWa,
    Wa,
    Lse,
    Quadratic,
}

#[derive(Clone, Copy, Debug)]
pub struct WirelengthParams {
    pub model: WlModel,
    /// Smoothing length, micrometers. Annealed by the placer.
    pub gamma: f64,
    /// Span exponent in [1, 2].
    pub alpha: f64,
    /// Angle margin c in [0, 1]; no penalty while cos(theta) >= c.
    pub angle_margin: f64,
    /// Evaluate the second pin's angle against +w instead of -w.
    pub theta2_raw: bool,
}

impl Default for WirelengthParams {
    fn default() -> Self {
        WirelengthParams {
            model: WlModel::CosWa,
            gamma: 1.0,
            alpha: 1.4,
            angle_margin: 0.0,
            theta2_raw: false,
        }
    }
}

/// Per-net cost and gradient with respect to the two pin coordinates.
#[derive(Clone, Copy, Debug)]
pub struct NetEval {
    pub cost: f64,
    pub grad: [Point; 2],
}

/// Bending penalty split by the axis each port constrains.
#[derive(Clone, Copy, Debug, Default)]
struct BendTerms {
    wx: f64,
    wy: f64,
    /// Gradients of wx/wy with respect to w = pin2 - pin1.
    dwx: Point,
    dwy: Point,
}

fn bend_terms(w: Point, dirs: [PortDir; 2], c: f64, theta2_raw: bool) -> BendTerms {
    let mut out = BendTerms::default();
    let n = w.norm();
    if n < DEGENERATE_EPS {
        return out;
    }
    for (i, dir) in dirs.iter().enumerate() {
        // The route arrives at the second pin traveling against that port's
        // orientation, so its angle is measured against -w by default.
        let sigma = if i == 1 && !theta2_raw { -1.0 } else { 1.0 };
        let v = dir.vector();
        let wv = w.dot(v);
        let cos_t = sigma * wv / n;
        let t = (c - cos_t).max(0.0);
        if t > 0.0 {
            // d cos / d w = sigma * (v - (w.v) w / n^2) / n
            let dcos = (v - w * (wv / (n * n))) * (sigma / n);
            let term = t * t;
            let dterm = dcos * (-2.0 * t);
            if dir.is_horizontal() {
                out.wx += term;
                out.dwx += dterm;
            } else {
                out.wy += term;
                out.dwy += dterm;
            }
        }
    }
    out
}

/// Bending penalty of a net vector: value and gradient with respect to w.
///
/// Zero whenever both port angles are within the margin; zero with zero
/// gradient for degenerate (near-coincident) pins.
pub fn bend_penalty(w: Point, v1: PortDir, v2: PortDir, c: f64, theta2_raw: bool) -> (f64, Point) {
    let b = bend_terms(w, [v1, v2], c, theta2_raw);
    (b.wx + b.wy, b.dwx + b.dwy)
}

/// Smooth span of two coordinates: value and derivative per coordinate.
struct Span {
    value: f64,
    d: [f64; 2],
}

/// Weighted-average span, computed with max-subtracted exponentials.
fn wa_span(x: [f64; 2], gamma: f64) -> Span {
    let mx = x[0].max(x[1]);
    let mn = x[0].min(x[1]);
    let e = [((x[0] - mx) / gamma).exp(), ((x[1] - mx) / gamma).exp()];
    let f = [((mn - x[0]) / gamma).exp(), ((mn - x[1]) / gamma).exp()];
    let se = e[0] + e[1];
    let sf = f[0] + f[1];
    let s_plus = (x[0] * e[0] + x[1] * e[1]) / se;
    let s_minus = (x[0] * f[0] + x[1] * f[1]) / sf;
    let value = (s_plus - s_minus).max(0.0);
    let d = [
        e[0] / se * (1.0 + (x[0] - s_plus) / gamma) - f[0] / sf * (1.0 - (x[0] - s_minus) / gamma),
        e[1] / se * (1.0 + (x[1] - s_plus) / gamma) - f[1] / sf * (1.0 - (x[1] - s_minus) / gamma),
    ];
    Span { value, d }
}

/// Log-sum-exp span, max-subtracted.
fn lse_span(x: [f64; 2], gamma: f64) -> Span {
    let mx = x[0].max(x[1]);
    let mn = x[0].min(x[1]);
    let e = [((x[0] - mx) / gamma).exp(), ((x[1] - mx) / gamma).exp()];
    let f = [((mn - x[0]) / gamma).exp(), ((mn - x[1]) / gamma).exp()];
    let se = e[0] + e[1];
    let sf = f[0] + f[1];
    let value = (mx - mn) + gamma * (se.ln() + sf.ln());
    let d = [e[0] / se - f[0] / sf, e[1] / se - f[1] / sf];
    Span { value, d }
}

/// span^alpha and alpha * span^(alpha-1), handling span = 0.
fn pow_terms(span: f64, alpha: f64) -> (f64, f64) {
    if span <= 0.0 {
        let slope = if alpha == 1.0 { 1.0 } else { 0.0 };
        (0.0, slope)
    } else {
        (span.powf(alpha), alpha * span.powf(alpha - 1.0))
    }
}

/// Bending-aware wirelength of one two-pin net.
pub fn coswa_net(pins: [Point; 2], dirs: [PortDir; 2], p: &WirelengthParams) -> NetEval {
    let w = pins[1] - pins[0];
    let b = bend_terms(w, dirs, p.angle_margin, p.theta2_raw);
    let sx = wa_span([pins[0].x, pins[1].x], p.gamma);
    let sy = wa_span([pins[0].y, pins[1].y], p.gamma);
    let (px, dpx) = pow_terms(sx.value, p.alpha);
    let (py, dpy) = pow_terms(sy.value, p.alpha);
    let cost = (1.0 + b.wx) * px + (1.0 + b.wy) * py;
    // The bend factors depend on both coordinates through w; dw/dpin1 = -I.
    let mut grad = [Point::ZERO; 2];
    for k in 0..2 {
        let sign = if k == 0 { -1.0 } else { 1.0 };
        grad[k] = (b.dwx * px + b.dwy * py) * sign
            + Point::new(
                (1.0 + b.wx) * dpx * sx.d[k],
                (1.0 + b.wy) * dpy * sy.d[k],
            );
    }
    NetEval { cost, grad }
}

/// WA / LSE / quadratic baselines.
pub fn baseline_net(pins: [Point; 2], p: &WirelengthParams) -> NetEval {
    match p.model {
        WlModel::Wa => {
            let sx = wa_span([pins[0].x, pins[1].x], p.gamma);
            let sy = wa_span([pins[0].y, pins[1].y], p.gamma);
            NetEval {
                cost: sx.value + sy.value,
                grad: [
                    Point::new(sx.d[0], sy.d[0]),
                    Point::new(sx.d[1], sy.d[1]),
                ],
            }
        }
        WlModel::Lse => {
            let sx = lse_span([pins[0].x, pins[1].x], p.gamma);
            let sy = lse_span([pins[0].y, pins[1].y], p.gamma);
            NetEval {
                cost: sx.value + sy.value,
                grad: [
                    Point::new(sx.d[0], sy.d[0]),
                    Point::new(sx.d[1], sy.d[1]),
                ],
            }
        }
        WlModel::Quadratic => {
            let d = pins[1] - pins[0];
            NetEval {
                cost: d.x * d.x + d.y * d.y,
                grad: [d * -2.0, d * 2.0],
            }
        }
        WlModel::CosWa => unreachable!("cosWA is not a baseline"),
    }
}

fn net_eval(pins: [Point; 2], dirs: [PortDir; 2], p: &WirelengthParams) -> NetEval {
    match p.model {
        WlModel::CosWa => coswa_net(pins, dirs, p),
        _ => baseline_net(pins, p),
    }
}

/// Weighted sum over all nets; gradient per component (fixed components
/// included in the vector, masked out by the caller).
pub fn total_wirelength(
    design: &Design,
    positions: &[Point],
    p: &WirelengthParams,
) -> (f64, Vec<Point>) {
    let mut total = 0.0;
    let mut grad = vec![Point::ZERO; design.components.len()];
    for net in &design.nets {
        let pins = [
            design.pin_world(net.pins[0], positions),
            design.pin_world(net.pins[1], positions),
        ];
        let dirs = [design.port_dir(net.pins[0]), design.port_dir(net.pins[1])];
        let ev = net_eval(pins, dirs, p);
        total += net.weight * ev.cost;
        for k in 0..2 {
            grad[net.pins[k].component] += ev.grad[k] * net.weight;
        }
    }
    (total, grad)
}

/// Plain half-perimeter wirelength, for reporting.
pub fn hpwl(design: &Design, positions: &[Point]) -> f64 {
    design
        .nets
        .iter()
        .map(|net| {
            let a = design.pin_world(net.pins[0], positions);
            let b = design.pin_world(net.pins[1], positions);
            (a.x - b.x).abs() + (a.y - b.y).abs()
        })
        .sum()
}
