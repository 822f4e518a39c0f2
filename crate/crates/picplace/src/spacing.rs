//! Routing-informed net spacing: per-net spacing demand from port density
//! and estimated crossings, straight-line crossing counting, and the
//! differentiable spacing penalty.

use crate::geom::Point;
use crate::netlist::{Component, Design, Port, Tech};

/// Segment count above which crossing counting switches from the all-pairs
/// check to a sorted sweep over x-intervals.
const BRUTE_FORCE_LIMIT: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpacingVariant {
    /// No spacing term at all.
    None,
    /// No penalty; derate via port-count halo inflation instead.
    PortInflation,
    /// Demand = bend radius only.
    RbendOnly,
    /// Demand = half port count times crossing size only.
    PortCountOnly,
    /// Demand = port density plus crossing congestion.
    Full,
}

#[derive(Clone, Copy, Debug)]
pub struct SpacingParams {
    pub lambda: f64,
    pub refresh_period: usize,
    pub refresh_start: usize,
    pub variant: SpacingVariant,
    /// Penalize clearance exceeding the demand instead of falling short.
    pub literal_form: bool,
}

impl Default for SpacingParams {
    fn default() -> Self {
        SpacingParams {
            lambda: 1.0,
            refresh_period: 100,
            refresh_start: 100,
            variant: SpacingVariant::Full,
            literal_form: false,
        }
    }
}

impl SpacingParams {
    pub fn penalty_active(&self) -> bool {
        !matches!(self.variant, SpacingVariant::None | SpacingVariant::PortInflation)
    }

    /// True when iteration `k` is a scheduled congestion refresh point.
    pub fn is_refresh_iter(&self, k: usize) -> bool {
        self.variant == SpacingVariant::Full
            && k >= self.refresh_start
            && (k - self.refresh_start) % self.refresh_period == 0
    }
}

/// Spacing needed for feasible access to one port: the bend radius plus half
/// the same-direction port count times the crossing footprint.
pub fn port_density(component: &Component, port: &Port, tech: &Tech) -> f64 {
    let p_num = component.ports_in_dir(port.dir) as f64;
    tech.bend_radius + 0.5 * p_num * tech.crossing_size
}

fn endpoint_demand(component: &Component, port: &Port, tech: &Tech, variant: SpacingVariant) -> f64 {
    match variant {
        SpacingVariant::None | SpacingVariant::PortInflation => 0.0,
        SpacingVariant::RbendOnly => tech.bend_radius,
        SpacingVariant::PortCountOnly => {
            0.5 * component.ports_in_dir(port.dir) as f64 * tech.crossing_size
        }
        SpacingVariant::Full => port_density(component, port, tech),
    }
}

/// Crossing-driven extra spacing per net.
pub fn congestion(per_net_crossings: &[usize], tech: &Tech) -> Vec<f64> {
    per_net_crossings
        .iter()
        .map(|&c| c as f64 * tech.crossing_size)
        .collect()
}

/// Cached per-net spacing state, refreshed on the congestion schedule.
#[derive(Clone, Debug)]
pub struct NetSpacing {
    /// S_i per net.
    pub demand: Vec<f64>,
    /// Endpoint (0 or 1) whose port drives the demand.
    pub anchor: Vec<usize>,
    pub per_net_crossings: Vec<usize>,
    pub total_crossings: usize,
}

impl NetSpacing {
    /// Demands before any crossing estimate is available.
    pub fn new(design: &Design, variant: SpacingVariant) -> Self {
        let mut ns = NetSpacing {
            demand: vec![0.0; design.nets.len()],
            anchor: vec![0; design.nets.len()],
            per_net_crossings: vec![0; design.nets.len()],
            total_crossings: 0,
        };
        ns.rebuild(design, variant);
        ns
    }

    fn rebuild(&mut self, design: &Design, variant: SpacingVariant) {
        let r_cong = congestion(&self.per_net_crossings, &design.tech);
        for (e, net) in design.nets.iter().enumerate() {
            let mut best = 0usize;
            let mut best_demand = f64::NEG_INFINITY;
            for (k, pin) in net.pins.iter().enumerate() {
                let comp = &design.components[pin.component];
                let d = endpoint_demand(comp, &comp.ports[pin.port], &design.tech, variant);
                if d > best_demand {
                    best_demand = d;
                    best = k;
                }
            }
            let extra = if variant == SpacingVariant::Full { r_cong[e] } else { 0.0 };
            self.demand[e] = best_demand + extra;
            self.anchor[e] = best;
        }
    }

    /// Recount straight-line crossings at the given positions and fold the
    /// congestion term back into the demands.
    pub fn refresh(&mut self, design: &Design, positions: &[Point], variant: SpacingVariant) {
        let segments = net_segments(design, positions);
        let (total, per_net) = count_crossings(&segments);
        self.total_crossings = total;
        self.per_net_crossings = per_net;
        self.rebuild(design, variant);
    }
}

/// Pin-to-pin segment per net at the given positions.
pub fn net_segments(design: &Design, positions: &[Point]) -> Vec<(Point, Point)> {
    design
        .nets
        .iter()
        .map(|n| (design.pin_world(n.pins[0], positions), design.pin_world(n.pins[1], positions)))
        .collect()
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn within(a: f64, q: f64, b: f64) -> bool {
    q >= a.min(b) && q <= a.max(b)
}

/// Collinear point-on-segment check.
fn on_segment(a: Point, b: Point, q: Point) -> bool {
    within(a.x, q.x, b.x) && within(a.y, q.y, b.y)
}

fn shares_endpoint(s: &(Point, Point), t: &(Point, Point)) -> bool {
    s.0 == t.0 || s.0 == t.1 || s.1 == t.0 || s.1 == t.1
}

/// True when two segments cross for the purpose of crossing counting:
/// any intersection counts except pairs touching only at a shared endpoint;
/// collinear overlapping pairs count once.
pub fn segments_cross(s: &(Point, Point), t: &(Point, Point)) -> bool {
    if shares_endpoint(s, t) {
        return false;
    }
    let o1 = orient(s.0, s.1, t.0);
    let o2 = orient(s.0, s.1, t.1);
    let o3 = orient(t.0, t.1, s.0);
    let o4 = orient(t.0, t.1, s.1);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0))
        && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0))
    {
        return true;
    }
    (o1 == 0.0 && on_segment(s.0, s.1, t.0))
        || (o2 == 0.0 && on_segment(s.0, s.1, t.1))
        || (o3 == 0.0 && on_segment(t.0, t.1, s.0))
        || (o4 == 0.0 && on_segment(t.0, t.1, s.1))
}

/// Count crossing pairs: total and per-net partner counts.
pub fn count_crossings(segments: &[(Point, Point)]) -> (usize, Vec<usize>) {
    if segments.len() <= BRUTE_FORCE_LIMIT {
        count_brute(segments)
    } else {
        count_sweep(segments)
    }
}

pub(crate) fn count_brute(segments: &[(Point, Point)]) -> (usize, Vec<usize>) {
    let mut per_net = vec![0usize; segments.len()];
    let mut total = 0;
    for i in 0..segments.len() {
        for j in i + 1..segments.len() {
            if segments_cross(&segments[i], &segments[j]) {
                total += 1;
                per_net[i] += 1;
                per_net[j] += 1;
            }
        }
    }
    (total, per_net)
}

/// Sorted sweep over x-intervals; identical pair predicate to the brute
/// force path, just pruned.
pub(crate) fn count_sweep(segments: &[(Point, Point)]) -> (usize, Vec<usize>) {
    let n = segments.len();
    let min_x: Vec<f64> = segments.iter().map(|s| s.0.x.min(s.1.x)).collect();
    let max_x: Vec<f64> = segments.iter().map(|s| s.0.x.max(s.1.x)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| min_x[a].total_cmp(&min_x[b]).then(a.cmp(&b)));
    let mut per_net = vec![0usize; n];
    let mut total = 0;
    for a in 0..n {
        let i = order[a];
        for &j in &order[a + 1..] {
            if min_x[j] > max_x[i] {
                break;
            }
            let (lo_i, hi_i) = (segments[i].0.y.min(segments[i].1.y), segments[i].0.y.max(segments[i].1.y));
            let (lo_j, hi_j) = (segments[j].0.y.min(segments[j].1.y), segments[j].0.y.max(segments[j].1.y));
            if lo_j > hi_i || lo_i > hi_j {
                continue;
            }
            if segments_cross(&segments[i], &segments[j]) {
                total += 1;
                per_net[i] += 1;
                per_net[j] += 1;
            }
        }
    }
    (total, per_net)
}

/// Spacing penalty and gradient per component. The demand is a frozen
/// constant; only pin positions differentiate.
pub fn spacing_penalty(
    design: &Design,
    positions: &[Point],
    spacing: &NetSpacing,
    params: &SpacingParams,
) -> (f64, Vec<Point>) {
    let mut grad = vec![Point::ZERO; design.components.len()];
    if !params.penalty_active() {
        return (0.0, grad);
    }
    let mut total = 0.0;
    for (e, net) in design.nets.iter().enumerate() {
        let a = spacing.anchor[e];
        let b = 1 - a;
        let s_i = spacing.demand[e];
        let pin_a = design.pin_world(net.pins[a], positions);
        let pin_b = design.pin_world(net.pins[b], positions);
        let v = design.port_dir(net.pins[a]).vector();
        let d = pin_b - pin_a;
        // Only the axis the port constrains contributes.
        for axis in 0..2 {
            let (va, da) = if axis == 0 { (v.x, d.x) } else { (v.y, d.y) };
            if va == 0.0 {
                continue;
            }
            let clearance = va * da;
            let (term, dterm_dclr) = if params.literal_form {
                let t = (clearance - s_i).max(0.0);
                (t * t, 2.0 * t)
            } else {
                let t = (s_i - clearance).max(0.0);
                (t * t, -2.0 * t)
            };
            total += term;
            let dclr = dterm_dclr * va;
            let (ca, cb) = (net.pins[a].component, net.pins[b].component);
            if axis == 0 {
                grad[cb].x += dclr;
                grad[ca].x -= dclr;
            } else {
                grad[cb].y += dclr;
                grad[ca].y -= dclr;
            }
        }
    }
    for g in &mut grad {
        *g = *g * params.lambda;
    }
    (params.lambda * total, grad)
}

/// Halo increment per component for the port-inflation ablation: port count
/// on the densest edge times the bend radius.
pub fn inflate_for_ports(design: &Design) -> Vec<f64> {
    design
        .components
        .iter()
        .map(|c| {
            let densest = [crate::netlist::PortDir::E, crate::netlist::PortDir::N, crate::netlist::PortDir::W, crate::netlist::PortDir::S]
                .into_iter()
                .map(|d| c.ports_in_dir(d))
                .max()
                .unwrap_or(0);
            densest as f64 * design.tech.bend_radius
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{parse_design, PortDir};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn pt(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    fn comp_with_ports(dirs: &[PortDir]) -> Component {
        let ports = dirs
            .iter()
            .enumerate()
            .map(|(i, &dir)| {
                let off = match dir {
                    PortDir::E => pt(10.0, 1.0 + i as f64),
                    PortDir::W => pt(0.0, 1.0 + i as f64),
                    PortDir::N => pt(1.0 + i as f64, 10.0),
                    PortDir::S => pt(1.0 + i as f64, 0.0),
                };
                Port { name: format!("p{i}"), offset: off, dir }
            })
            .collect();
        Component {
            name: "c".into(),
            cell: "cell".into(),
            width: 10.0,
            height: 10.0,
            position: None,
            fixed: false,
            halo: 0.0,
            ports,
        }
    }

    #[test]
    fn port_density_examples() {
        let tech = Tech { bend_radius: 5.0, crossing_size: 10.0, waveguide_width: 0.5 };
        let c1 = comp_with_ports(&[PortDir::E]);
        assert_eq!(port_density(&c1, &c1.ports[0], &tech), 10.0);
        let c3 = comp_with_ports(&[PortDir::E, PortDir::E, PortDir::E]);
        assert_eq!(port_density(&c3, &c3.ports[0], &tech), 20.0);
        let tech10 = Tech { bend_radius: 10.0, ..tech };
        let c16 = comp_with_ports(&[PortDir::E; 16]);
        assert_eq!(port_density(&c16, &c16.ports[0], &tech10), 90.0);
    }

    #[test]
    fn crossing_examples() {
        let x_config = vec![(pt(0.0, 0.0), pt(10.0, 10.0)), (pt(0.0, 10.0), pt(10.0, 0.0))];
        assert_eq!(count_crossings(&x_config).0, 1);
        let parallel = vec![(pt(0.0, 0.0), pt(10.0, 0.0)), (pt(0.0, 5.0), pt(10.0, 5.0))];
        assert_eq!(count_crossings(&parallel).0, 0);
    }

    #[test]
    fn shared_endpoint_not_counted() {
        let segs = vec![(pt(0.0, 0.0), pt(10.0, 10.0)), (pt(10.0, 10.0), pt(20.0, 0.0))];
        assert_eq!(count_crossings(&segs).0, 0);
    }

    #[test]
    fn t_junction_counted() {
        let segs = vec![(pt(0.0, 0.0), pt(10.0, 0.0)), (pt(5.0, -5.0), pt(5.0, 0.0))];
        assert_eq!(count_crossings(&segs).0, 1);
    }

    #[test]
    fn collinear_overlap_counts_once() {
        let segs = vec![(pt(0.0, 0.0), pt(10.0, 0.0)), (pt(5.0, 0.0), pt(15.0, 0.0))];
        let (total, per_net) = count_crossings(&segs);
        assert_eq!(total, 1);
        assert_eq!(per_net, vec![1, 1]);
    }

    /// Independent oracle: parametric line-line solve plus projection
    /// overlap for the collinear case.
    fn oracle_cross(s: &(Point, Point), t: &(Point, Point)) -> bool {
        if s.0 == t.0 || s.0 == t.1 || s.1 == t.0 || s.1 == t.1 {
            return false;
        }
        let r = s.1 - s.0;
        let q = t.1 - t.0;
        let denom = r.x * q.y - r.y * q.x;
        let diff = t.0 - s.0;
        if denom != 0.0 {
            let u = (diff.x * q.y - diff.y * q.x) / denom;
            let v = (diff.x * r.y - diff.y * r.x) / denom;
            return (0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v);
        }
        // Parallel: cross only if collinear with overlapping projections.
        if diff.x * r.y - diff.y * r.x != 0.0 {
            return false;
        }
        let len2 = r.dot(r);
        if len2 == 0.0 {
            return on_segment(t.0, t.1, s.0);
        }
        let t0 = (t.0 - s.0).dot(r) / len2;
        let t1 = (t.1 - s.0).dot(r) / len2;
        let (lo, hi) = (t0.min(t1), t0.max(t1));
        hi >= 0.0 && lo <= 1.0
    }

    #[test]
    fn crossings_match_brute_force_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let segs: Vec<(Point, Point)> = (0..50)
                .map(|_| {
                    (
                        pt(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)),
                        pt(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)),
                    )
                })
                .collect();
            let mut expect = 0;
            for i in 0..segs.len() {
                for j in i + 1..segs.len() {
                    if oracle_cross(&segs[i], &segs[j]) {
                        expect += 1;
                    }
                }
            }
            let (total, per_net) = count_crossings(&segs);
            assert_eq!(total, expect);
            assert_eq!(per_net.iter().sum::<usize>(), 2 * total);
        }
    }

    #[test]
    fn sweep_matches_brute() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let segs: Vec<(Point, Point)> = (0..400)
            .map(|_| {
                let a = pt(rng.gen_range(0.0..1000.0), rng.gen_range(0.0..1000.0));
                let d = pt(rng.gen_range(-40.0..40.0), rng.gen_range(-40.0..40.0));
                (a, a + d)
            })
            .collect();
        let (tb, pb) = count_brute(&segs);
        let (ts, ps) = count_sweep(&segs);
        assert_eq!(tb, ts);
        assert_eq!(pb, ps);
    }

    #[test]
    fn dispatcher_takes_the_sweep_path_above_the_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let segs: Vec<(Point, Point)> = (0..2100)
            .map(|_| {
                let a = pt(rng.gen_range(0.0..3000.0), rng.gen_range(0.0..3000.0));
                let d = pt(rng.gen_range(-25.0..25.0), rng.gen_range(-25.0..25.0));
                (a, a + d)
            })
            .collect();
        let (tb, pb) = count_brute(&segs);
        let (td, pd) = count_crossings(&segs);
        assert_eq!(tb, td);
        assert_eq!(pb, pd);
    }

    #[test]
    fn crossings_translation_invariant_and_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut segs: Vec<(Point, Point)> = (0..60)
            .map(|_| {
                (
                    pt(rng.gen_range(0.0..50.0), rng.gen_range(0.0..50.0)),
                    pt(rng.gen_range(0.0..50.0), rng.gen_range(0.0..50.0)),
                )
            })
            .collect();
        let (base, _) = count_crossings(&segs);
        let shift = pt(311.0, -97.0);
        let shifted: Vec<_> = segs.iter().map(|(a, b)| (*a + shift, *b + shift)).collect();
        assert_eq!(count_crossings(&shifted).0, base);
        segs.reverse();
        assert_eq!(count_crossings(&segs).0, base);
    }

    #[test]
    fn congestion_values() {
        let tech = Tech { bend_radius: 5.0, crossing_size: 10.0, waveguide_width: 0.5 };
        assert_eq!(congestion(&[0], &tech), vec![0.0]);
        assert_eq!(congestion(&[3], &tech), vec![30.0]);
    }

    const PAIR: &str = r#"
design: {name: t, die: {width: 1000, height: 1000}, tech: {bend_radius: 5, crossing_size: 10, waveguide_width: 0.5}}
components:
  - {name: a, cell: c, width: 10, height: 10,
     ports: [{name: o, dx: 10, dy: 5, dir: E}, {name: o2, dx: 10, dy: 8, dir: E}]}
  - {name: b, cell: c, width: 10, height: 10,
     ports: [{name: i, dx: 0, dy: 5, dir: W}]}
nets:
  - {name: n1, pins: [{comp: a, port: o}, {comp: b, port: i}]}
"#;

    #[test]
    fn penalty_clearance_satisfied() {
        let d = parse_design(PAIR).unwrap();
        let ns = NetSpacing::new(&d, SpacingVariant::Full);
        // Anchor is endpoint 0 (two east ports): S = 5 + 0.5*2*10 = 15.
        assert_eq!(ns.demand[0], 15.0);
        assert_eq!(ns.anchor[0], 0);
        let params = SpacingParams::default();
        // Pin separation 16 exceeds the demand of 15 (pin a sits at x=10).
        let positions = vec![pt(0.0, 0.0), pt(26.0, 0.0)];
        let (v, _) = spacing_penalty(&d, &positions, &ns, &params);
        assert_eq!(v, 0.0);
    }

    #[test]
    fn penalty_deficit_squared() {
        let d = parse_design(PAIR).unwrap();
        let ns = NetSpacing::new(&d, SpacingVariant::Full);
        let s = ns.demand[0];
        let params = SpacingParams::default();
        // Pin-to-pin dx = s - 2: deficit 2, penalty 4; the y-term is gated
        // off because the anchor port is horizontal (pin a sits at x=10).
        let positions = vec![pt(0.0, 0.0), pt(10.0 + s - 2.0, 37.0)];
        let (v, _) = spacing_penalty(&d, &positions, &ns, &params);
        assert!((v - 4.0).abs() < 1e-12, "expected 4, got {v}");
    }

    #[test]
    fn penalty_zero_weight() {
        let d = parse_design(PAIR).unwrap();
        let ns = NetSpacing::new(&d, SpacingVariant::Full);
        let params = SpacingParams { lambda: 0.0, ..Default::default() };
        let positions = vec![pt(0.0, 0.0), pt(-500.0, 2.0)];
        let (v, g) = spacing_penalty(&d, &positions, &ns, &params);
        assert_eq!(v, 0.0);
        assert!(g.iter().all(|p| *p == Point::ZERO));
    }

    #[test]
    fn penalty_gradient_matches_finite_differences() {
        let d = parse_design(PAIR).unwrap();
        let ns = NetSpacing::new(&d, SpacingVariant::Full);
        let params = SpacingParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let h = 1e-4;
        let mut checked = 0;
        while checked < 100 {
            let positions = vec![
                pt(rng.gen_range(-30.0..30.0), rng.gen_range(-30.0..30.0)),
                pt(rng.gen_range(-30.0..30.0), rng.gen_range(-30.0..30.0)),
            ];
            // Skip configurations near the hinge.
            let pin_a = d.pin_world(d.nets[0].pins[0], &positions);
            let pin_b = d.pin_world(d.nets[0].pins[1], &positions);
            if ((pin_b.x - pin_a.x) - ns.demand[0]).abs() < 1e-2 {
                continue;
            }
            let (_, grad) = spacing_penalty(&d, &positions, &ns, &params);
            for ci in 0..2 {
                for axis in 0..2 {
                    let mut hi = positions.clone();
                    let mut lo = positions.clone();
                    if axis == 0 {
                        hi[ci].x += h;
                        lo[ci].x -= h;
                    } else {
                        hi[ci].y += h;
                        lo[ci].y -= h;
                    }
                    let fhi = spacing_penalty(&d, &hi, &ns, &params).0;
                    let flo = spacing_penalty(&d, &lo, &ns, &params).0;
                    let fd = (fhi - flo) / (2.0 * h);
                    let an = if axis == 0 { grad[ci].x } else { grad[ci].y };
                    let scale = fd.abs().max(1.0);
                    assert!(
                        (an - fd).abs() / scale < 1e-5,
                        "component {ci} axis {axis}: analytic {an} vs fd {fd}"
                    );
                }
            }
            checked += 1;
        }
    }

    #[test]
    fn literal_form_flips_the_hinge() {
        let d = parse_design(PAIR).unwrap();
        let ns = NetSpacing::new(&d, SpacingVariant::Full);
        let s = ns.demand[0];
        let literal = SpacingParams { literal_form: true, ..Default::default() };
        // Clearance s + 3 exceeds the demand: literal form penalizes 9.
        let positions = vec![pt(0.0, 0.0), pt(10.0 + s + 3.0, 0.0)];
        let (v, _) = spacing_penalty(&d, &positions, &ns, &literal);
        assert!((v - 9.0).abs() < 1e-12);
        let (v2, _) = spacing_penalty(&d, &positions, &ns, &SpacingParams::default());
        assert_eq!(v2, 0.0);
    }

    #[test]
    fn variant_lattice_rbend_subset_of_full() {
        let d = crate::benchgen::gen_butterfly(&crate::benchgen::ButterflySpec::new(8, crate::benchgen::SizeClass::S)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let positions: Vec<Point> = d
            .components
            .iter()
            .map(|_| pt(rng.gen_range(0.0..400.0), rng.gen_range(0.0..200.0)))
            .collect();
        let mut rbend = NetSpacing::new(&d, SpacingVariant::RbendOnly);
        rbend.refresh(&d, &positions, SpacingVariant::RbendOnly);
        let mut full = NetSpacing::new(&d, SpacingVariant::Full);
        full.refresh(&d, &positions, SpacingVariant::Full);
        let penalized = |ns: &NetSpacing, variant| -> Vec<usize> {
            let params = SpacingParams { variant, ..Default::default() };
            (0..d.nets.len())
                .filter(|&e| {
                    let single = NetSpacing {
                        demand: vec![ns.demand[e]],
                        anchor: vec![ns.anchor[e]],
                        per_net_crossings: vec![0],
                        total_crossings: 0,
                    };
                    let sub = Design { nets: vec![d.nets[e].clone()], ..d.clone() };
                    spacing_penalty(&sub, &positions, &single, &params).0 > 0.0
                })
                .collect()
        };
        let pr = penalized(&rbend, SpacingVariant::RbendOnly);
        let pf = penalized(&full, SpacingVariant::Full);
        for e in &pr {
            assert!(pf.contains(e), "net {e} penalized under rbend-only but not full");
        }
    }

    #[test]
    fn port_inflation_rules() {
        let text = r#"
design: {name: t, die: {width: 100, height: 100}, tech: {bend_radius: 5, crossing_size: 10, waveguide_width: 0.5}}
components:
  - {name: dummy, cell: c, width: 4, height: 4}
  - {name: quad, cell: c, width: 10, height: 10,
     ports: [{name: a, dx: 10, dy: 2, dir: E}, {name: b, dx: 10, dy: 4, dir: E},
             {name: c, dx: 10, dy: 6, dir: E}, {name: d, dx: 10, dy: 8, dir: E}]}
"#;
        let d = parse_design(text).unwrap();
        let inflation = inflate_for_ports(&d);
        assert_eq!(inflation[0], 0.0);
        assert_eq!(inflation[1], 20.0);
        assert!(inflation.iter().all(|&h| h >= 0.0));
    }
}
