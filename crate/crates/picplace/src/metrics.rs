//! Post-placement quality metrics: crossings, HPWL, predicted bends, total
//! bending angle, pre-routing insertion loss, and spacing violations.

use crate::geom::Point;
use crate::netlist::{Design, PortDir, SignalFlow};
use crate::spacing::{self, NetSpacing, SpacingVariant};
use serde::Serialize;

/// Analytical waveguide insertion loss coefficients. Engineering defaults,
/// fully configurable.
#[derive(Clone, Copy, Debug)]
pub struct LossModel {
    pub prop_db_per_cm: f64,
    pub bend_db: f64,
    pub crossing_db: f64,
}

impl Default for LossModel {
    fn default() -> Self {
        LossModel { prop_db_per_cm: 2.0, bend_db: 0.01, crossing_db: 0.2 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MetricsReport {
    #[serde(rename = "#CR")]
    pub crossings: usize,
    #[serde(rename = "HPWL")]
    pub hpwl: f64,
    /// Total predicted bending angle in degrees.
    #[serde(rename = "BA_tot")]
    pub ba_tot: f64,
    #[serde(rename = "IL_max")]
    pub il_max: f64,
    pub spacing_violations: usize,
    /// Filled by the caller when timing is wanted; kept at zero for
    /// reproducible reports.
    pub wall_time_s: f64,
    /// True when the signal-flow graph had a cycle and the worst single net
    /// was reported instead of a path accumulation.
    pub cyclic_flow: bool,
}

/// Minimum number of 90-degree turns of any Manhattan route that leaves
/// `p1` along `v1` and arrives at `p2` traveling against `v2`.
pub fn predict_bends(p1: Point, v1: PortDir, p2: Point, v2: PortDir) -> u8 {
    let w = p2 - p1;
    if w.x == 0.0 && w.y == 0.0 {
        return 0;
    }
    // Rotate the frame so the start heading is east.
    let rotate = |p: Point| -> Point {
        match v1 {
            PortDir::E => p,
            PortDir::N => Point::new(p.y, -p.x),
            PortDir::W => Point::new(-p.x, -p.y),
            PortDir::S => Point::new(-p.y, p.x),
        }
    };
    let mut d = rotate(w);
    let arrive = rotate(v2.opposite().vector());
    let mut h2 = heading_of(arrive);
    // Reflect so the target sits on or above the axis.
    if d.y < 0.0 {
        d.y = -d.y;
        h2 = match h2 {
            PortDir::N => PortDir::S,
            PortDir::S => PortDir::N,
            other => other,
        };
    }
    match h2 {
        PortDir::E => {
            if d.y == 0.0 && d.x > 0.0 {
                0
            } else if d.y > 0.0 && d.x > 0.0 {
                2
            } else {
                4
            }
        }
        PortDir::N => {
            if d.x > 0.0 && d.y > 0.0 {
                1
            } else {
                3
            }
        }
        PortDir::W => {
            if d.y > 0.0 {
                2
            } else {
                4
            }
        }
        PortDir::S => 3,
    }
}

fn heading_of(v: Point) -> PortDir {
    if v.x > 0.5 {
        PortDir::E
    } else if v.x < -0.5 {
        PortDir::W
    } else if v.y > 0.5 {
        PortDir::N
    } else {
        PortDir::S
    }
}

/// Estimated routed length: Manhattan distance with a per-bend arc
/// correction, never below the straight-line distance.
fn estimated_length(a: Point, b: Point, bends: u8, bend_radius: f64) -> f64 {
    let manhattan = (a.x - b.x).abs() + (a.y - b.y).abs();
    let corrected = manhattan + bends as f64 * (std::f64::consts::FRAC_PI_2 - 2.0) * bend_radius;
    corrected.max((b - a).norm())
}

/// Nets whose axis clearance falls short of the full-model spacing demand
/// at these positions.
pub fn spacing_violations(design: &Design, positions: &[Point]) -> usize {
    let mut ns = NetSpacing::new(design, SpacingVariant::Full);
    ns.refresh(design, positions, SpacingVariant::Full);
    count_deficits(design, positions, &ns)
}

fn count_deficits(design: &Design, positions: &[Point], ns: &NetSpacing) -> usize {
    design
        .nets
        .iter()
        .enumerate()
        .filter(|(e, net)| {
            let a = ns.anchor[*e];
            let pin_a = design.pin_world(net.pins[a], positions);
            let pin_b = design.pin_world(net.pins[1 - a], positions);
            let v = design.port_dir(net.pins[a]).vector();
            let d = pin_b - pin_a;
            let clearance = v.x * d.x + v.y * d.y;
            ns.demand[*e] - clearance > 0.0
        })
        .count()
}

/// Evaluate the report at the given positions.
pub fn evaluate(design: &Design, positions: &[Point], loss: &LossModel) -> MetricsReport {
    let segments = spacing::net_segments(design, positions);
    let (crossings, per_net_cr) = spacing::count_crossings(&segments);
    let mut hpwl = 0.0;
    let mut ba_tot = 0.0;
    let mut per_net_il = Vec::with_capacity(design.nets.len());
    for (e, net) in design.nets.iter().enumerate() {
        let (a, b) = segments[e];
        hpwl += (a.x - b.x).abs() + (a.y - b.y).abs();
        let bends = predict_bends(a, design.port_dir(net.pins[0]), b, design.port_dir(net.pins[1]));
        ba_tot += bends as f64 * 90.0;
        let length = estimated_length(a, b, bends, design.tech.bend_radius);
        let il = loss.prop_db_per_cm * length * 1e-4
            + loss.bend_db * bends as f64
            + loss.crossing_db * per_net_cr[e] as f64;
        per_net_il.push(il);
    }

    let (il_max, cyclic_flow) = accumulate_il(design, positions, &per_net_il);

    MetricsReport {
        crossings,
        hpwl,
        ba_tot,
        il_max,
        spacing_violations: spacing_violations(design, positions),
        wall_time_s: 0.0,
        cyclic_flow,
    }
}

/// Longest accumulated loss over any directed source-to-sink path, with
/// nets oriented along the signal-flow axis. Falls back to the worst single
/// net when the orientation produces a cycle.
fn accumulate_il(design: &Design, positions: &[Point], per_net_il: &[f64]) -> (f64, bool) {
    let n = design.components.len();
    let worst_single = per_net_il.iter().cloned().fold(0.0, f64::max);
    let mut edges: Vec<(usize, usize, f64)> = Vec::with_capacity(design.nets.len());
    for (e, net) in design.nets.iter().enumerate() {
        let a = design.pin_world(net.pins[0], positions);
        let b = design.pin_world(net.pins[1], positions);
        let key = |p: Point| match design.signal_flow {
            SignalFlow::X => p.x,
            SignalFlow::Y => p.y,
        };
        let (src, dst) = if key(a) <= key(b) {
            (net.pins[0].component, net.pins[1].component)
        } else {
            (net.pins[1].component, net.pins[0].component)
        };
        edges.push((src, dst, per_net_il[e]));
    }
    let mut indeg = vec![0usize; n];
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &(s, d, il) in &edges {
        indeg[d] += 1;
        adj[s].push((d, il));
    }
    let mut queue: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut dist = vec![0.0_f64; n];
    let mut seen = 0;
    let mut best = 0.0_f64;
    let mut head = 0;
    while head < queue.len() {
        let u = queue[head];
        head += 1;
        seen += 1;
        for &(v, il) in &adj[u] {
            dist[v] = dist[v].max(dist[u] + il);
            best = best.max(dist[v]);
            indeg[v] -= 1;
            if indeg[v] == 0 {
                queue.push(v);
            }
        }
    }
    if seen < n {
        (worst_single, true)
    } else {
        (best.max(worst_single), false)
    }
}
