//! Greedy macro legalization: snap components in area order onto a grid of
//! abutment candidates induced by already-placed rectangle edges, then
//! refine with axis-aligned shifts back toward the global-placement
//! positions. Keep-out halos and die bounds are hard constraints.

use crate::geom::{Point, Rect};
use crate::netlist::Design;
use serde::Serialize;

const TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LegalizeStatus {
    Success,
    Failure,
}

#[derive(Clone, Debug)]
pub struct LegalizeResult {
    /// Positions for every component (fixed ones unchanged).
    pub positions: Vec<Point>,
    pub total_displacement: f64,
    pub max_displacement: f64,
    pub status: LegalizeStatus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    West,
    East,
    South,
    North,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Overlap { a: String, b: String, area: f64 },
    OutOfDie { comp: String, side: Side },
}

/// Pairwise keep-out distance: the larger of the two halos. Halos may
/// overlap each other, but no cell may intrude into another's halo.
fn clearance(halos: &[f64], i: usize, j: usize) -> f64 {
    halos[i].max(halos[j])
}

fn pair_conflicts(a: &Rect, b: &Rect, c: f64) -> bool {
    a.gap_x(b).max(a.gap_y(b)) < c - TOL
}

/// Overlap area of the conflict region, expanding each rectangle by half
/// the required clearance so a bare overlap reports its exact area.
fn conflict_area(a: &Rect, b: &Rect, c: f64) -> f64 {
    a.inflated(0.5 * c).intersection_area(&b.inflated(0.5 * c))
}

/// List every clearance violation and out-of-die component.
pub fn verify_legal(design: &Design, positions: &[Point], halos: &[f64]) -> Vec<Violation> {
    let rects: Vec<Rect> = design
        .components
        .iter()
        .zip(positions)
        .map(|(c, p)| c.rect(*p))
        .collect();
    let mut out = Vec::new();
    for i in 0..rects.len() {
        for j in i + 1..rects.len() {
            let c = clearance(halos, i, j);
            if pair_conflicts(&rects[i], &rects[j], c) {
                out.push(Violation::Overlap {
                    a: design.components[i].name.clone(),
                    b: design.components[j].name.clone(),
                    area: conflict_area(&rects[i], &rects[j], c),
                });
            }
        }
    }
    for (i, r) in rects.iter().enumerate() {
        let name = &design.components[i].name;
        if r.x < -TOL {
            out.push(Violation::OutOfDie { comp: name.clone(), side: Side::West });
        }
        if r.right() > design.die.width + TOL {
            out.push(Violation::OutOfDie { comp: name.clone(), side: Side::East });
        }
        if r.y < -TOL {
            out.push(Violation::OutOfDie { comp: name.clone(), side: Side::South });
        }
        if r.top() > design.die.height + TOL {
            out.push(Violation::OutOfDie { comp: name.clone(), side: Side::North });
        }
    }
    out
}

struct Workspace<'a> {
    design: &'a Design,
    halos: &'a [f64],
    targets: Vec<Point>,
    order: Vec<usize>,
}

impl Workspace<'_> {
    fn rect(&self, i: usize, pos: Point) -> Rect {
        self.design.components[i].rect(pos)
    }

    fn legal_against(&self, i: usize, pos: Point, others: &[usize], positions: &[Point]) -> bool {
        let r = self.rect(i, pos);
        let die = &self.design.die;
        if r.x < -TOL || r.y < -TOL || r.right() > die.width + TOL || r.top() > die.height + TOL {
            return false;
        }
        for &j in others {
            if j == i {
                continue;
            }
            let c = clearance(self.halos, i, j);
            if pair_conflicts(&r, &self.rect(j, positions[j]), c) {
                return false;
            }
        }
        true
    }

    /// Snap each movable, in area order, to the nearest legal candidate on
    /// the abutment grid of already-placed rectangles plus its own target.
    fn snap_stage(&self, positions: &mut [Point]) -> bool {
        let die = &self.design.die;
        let mut placed: Vec<usize> = (0..self.design.components.len())
            .filter(|&i| self.design.components[i].fixed)
            .collect();
        let mut feasible = true;
        for &i in &self.order {
            let comp = &self.design.components[i];
            let (w, h) = (comp.width, comp.height);
            let target = self.targets[i];
            let mut xs = vec![target.x, positions[i].x, 0.0, die.width - w];
            let mut ys = vec![target.y, positions[i].y, 0.0, die.height - h];
            for &j in &placed {
                let r = self.rect(j, positions[j]);
                let c = clearance(self.halos, i, j);
                xs.extend_from_slice(&[r.right() + c, r.x - c - w, r.x]);
                ys.extend_from_slice(&[r.top() + c, r.y - c - h, r.y]);
            }
            let clamp_keep = |vals: &mut Vec<f64>, hi: f64| {
                vals.retain(|v| v.is_finite() && *v >= -TOL && *v <= hi + TOL);
                vals.sort_by(f64::total_cmp);
                vals.dedup_by(|a, b| (*a - *b).abs() < TOL);
            };
            clamp_keep(&mut xs, die.width - w);
            clamp_keep(&mut ys, die.height - h);

            let mut candidates: Vec<(f64, f64, f64)> = Vec::with_capacity(xs.len() * ys.len());
            for &x in &xs {
                for &y in &ys {
                    let dx = x - target.x;
                    let dy = y - target.y;
                    candidates.push((dx * dx + dy * dy, y, x));
                }
            }
            candidates.sort_by(|a, b| {
                a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.total_cmp(&b.2))
            });
            let mut chosen = None;
            for &(_, y, x) in &candidates {
                let p = Point::new(x.max(0.0).min(die.width - w), y.max(0.0).min(die.height - h));
                if self.legal_against(i, p, &placed, positions) {
                    chosen = Some(p);
                    break;
                }
            }
            match chosen {
                Some(p) => positions[i] = p,
                None => {
                    // No legal spot; keep a clamped best effort.
                    positions[i] = Point::new(
                        target.x.clamp(0.0, (die.width - w).max(0.0)),
                        target.y.clamp(0.0, (die.height - h).max(0.0)),
                    );
                    feasible = false;
                }
            }
            placed.push(i);
        }
        feasible
    }

    /// Slide a component along one axis toward its target, stopping at the
    /// first blocking clearance interval.
    fn slide(&self, i: usize, positions: &[Point], horizontal: bool) -> f64 {
        let comp = &self.design.components[i];
        let (w, h) = (comp.width, comp.height);
        let die = &self.design.die;
        let cur = if horizontal { positions[i].x } else { positions[i].y };
        let target = if horizontal { self.targets[i].x } else { self.targets[i].y };
        let hi_bound = if horizontal { die.width - w } else { die.height - h };
        let mut goal = target.clamp(0.0, hi_bound.max(0.0));
        if (goal - cur).abs() <= TOL {
            return cur;
        }
        let rightward = goal > cur;
        for j in 0..self.design.components.len() {
            if j == i {
                continue;
            }
            let other = self.rect(j, positions[j]);
            let c = clearance(self.halos, i, j);
            // Does the orthogonal extent conflict regardless of the slide?
            let r = self.rect(i, positions[i]);
            let ortho_gap = if horizontal { r.gap_y(&other) } else { r.gap_x(&other) };
            if ortho_gap >= c - TOL {
                continue;
            }
            let (o_lo, o_len) = if horizontal { (other.x, other.w) } else { (other.y, other.h) };
            let my_len = if horizontal { w } else { h };
            // Forbidden open interval for this axis coordinate.
            let lo = o_lo - c - my_len;
            let hi = o_lo + o_len + c;
            if rightward {
                if lo >= cur - TOL && lo < goal {
                    goal = lo;
                }
            } else if hi <= cur + TOL && hi > goal {
                goal = hi;
            }
        }
        goal
    }

    fn refine_stage(&self, positions: &mut [Point]) {
        for _pass in 0..20 {
            let mut moved = 0.0;
            for &i in &self.order {
                let nx = self.slide(i, positions, true);
                moved += (nx - positions[i].x).abs();
                positions[i].x = nx;
                let ny = self.slide(i, positions, false);
                moved += (ny - positions[i].y).abs();
                positions[i].y = ny;
            }
            if moved < 1e-9 {
                break;
            }
        }
    }

    fn displacement(&self, positions: &[Point]) -> (f64, f64) {
        let mut total = 0.0;
        let mut max = 0.0_f64;
        for &i in &self.order {
            let d = (positions[i] - self.targets[i]).norm();
            total += d;
            max = max.max(d);
        }
        (total, max)
    }
}

/// Legalize all movable components; fixed components are obstacles.
pub fn legalize(design: &Design, positions: &[Point], halos: &[f64]) -> LegalizeResult {
    let mut order: Vec<usize> = (0..design.components.len())
        .filter(|&i| !design.components[i].fixed)
        .collect();
    // Area-major order; equal-area ties processed in spatial order so that
    // bump cascades displace neighbors by one slot instead of scrambling.
    order.sort_by(|&a, &b| {
        let ca = &design.components[a];
        let cb = &design.components[b];
        cb.area()
            .total_cmp(&ca.area())
            .then(positions[a].y.total_cmp(&positions[b].y))
            .then(positions[a].x.total_cmp(&positions[b].x))
            .then(ca.name.cmp(&cb.name))
    });
    let ws = Workspace { design, halos, targets: positions.to_vec(), order };

    let mut current = positions.to_vec();
    let mut best: Option<(Vec<Point>, f64, f64)> = None;
    let mut feasible_any = false;
    for _round in 0..3 {
        let prev = current.clone();
        let feasible = ws.snap_stage(&mut current);
        ws.refine_stage(&mut current);
        let (total, max) = ws.displacement(&current);
        let legal = feasible && verify_legal(design, &current, halos).is_empty();
        if legal {
            feasible_any = true;
            if best.as_ref().map_or(true, |(_, t, _)| total < *t) {
                best = Some((current.clone(), total, max));
            }
        }
        if current == prev {
            break;
        }
    }

    match best {
        Some((positions, total_displacement, max_displacement)) => LegalizeResult {
            positions,
            total_displacement,
            max_displacement,
            status: LegalizeStatus::Success,
        },
        None => {
            let (total, max) = ws.displacement(&current);
            debug_assert!(!feasible_any);
            LegalizeResult {
                positions: current,
                total_displacement: total,
                max_displacement: max,
                status: LegalizeStatus::Failure,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_design;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn boxes_design(names: &[(&str, f64, f64, f64)], die: f64) -> Design {
        // (name, w, h, halo)
        let comps: String = names
            .iter()
            .map(|(n, w, h, halo)| {
                format!("  - {{name: {n}, cell: c, width: {w}, height: {h}, halo: {halo}}}\n")
            })
            .collect();
        parse_design(&format!(
            "design: {{name: t, die: {{width: {die}, height: {die}}}, tech: {{bend_radius: 5, crossing_size: 10, waveguide_width: 0.5}}}}\ncomponents:\n{comps}"
        ))
        .unwrap()
    }

    #[test]
    fn already_legal_is_fixed_point() {
        let d = boxes_design(&[("a", 10.0, 10.0, 0.0), ("b", 10.0, 10.0, 0.0)], 100.0);
        let pos = vec![Point::new(10.0, 10.0), Point::new(40.0, 40.0)];
        let halos = vec![0.0, 0.0];
        let r = legalize(&d, &pos, &halos);
        assert_eq!(r.status, LegalizeStatus::Success);
        assert_eq!(r.positions, pos);
        assert_eq!(r.total_displacement, 0.0);
    }

    #[test]
    fn coincident_unit_squares_separate_by_one() {
        let d = boxes_design(&[("a", 1.0, 1.0, 0.0), ("b", 1.0, 1.0, 0.0)], 100.0);
        let pos = vec![Point::new(50.0, 50.0), Point::new(50.0, 50.0)];
        let halos = vec![0.0, 0.0];
        let r = legalize(&d, &pos, &halos);
        assert_eq!(r.status, LegalizeStatus::Success);
        assert!(verify_legal(&d, &r.positions, &halos).is_empty());
        // One stays, the other shifts by exactly one unit along an axis.
        assert!((r.total_displacement - 1.0).abs() < 1e-9, "displacement {}", r.total_displacement);
        assert!((r.max_displacement - 1.0).abs() < 1e-9);
    }

    #[test]
    fn halo_clearance_enforced() {
        let d = boxes_design(&[("a", 10.0, 10.0, 50.0), ("b", 10.0, 10.0, 0.0)], 400.0);
        let pos = vec![Point::new(200.0, 200.0), Point::new(205.0, 200.0)];
        let halos = vec![50.0, 0.0];
        let r = legalize(&d, &pos, &halos);
        assert_eq!(r.status, LegalizeStatus::Success);
        let a = d.components[0].rect(r.positions[0]);
        let b = d.components[1].rect(r.positions[1]);
        assert!(a.gap_x(&b).max(a.gap_y(&b)) >= 50.0 - 1e-9);
        // Center distance along the separating axis covers the half widths
        // plus the halo.
        let sep = (a.center().x - b.center().x).abs().max((a.center().y - b.center().y).abs());
        assert!(sep >= 10.0 + 50.0 - 1e-9);
    }

    #[test]
    fn verify_reports_expected_violations() {
        let d = boxes_design(&[("a", 10.0, 10.0, 0.0), ("b", 10.0, 10.0, 0.0)], 100.0);
        let halos = vec![0.0, 0.0];
        // Legal layout: empty.
        assert!(verify_legal(&d, &[Point::new(0.0, 0.0), Point::new(20.0, 0.0)], &halos).is_empty());
        // Half-overlapped pair: exact area.
        let v = verify_legal(&d, &[Point::new(0.0, 0.0), Point::new(5.0, 0.0)], &halos);
        assert_eq!(v.len(), 1);
        match &v[0] {
            Violation::Overlap { area, .. } => assert!((area - 50.0).abs() < 1e-9),
            other => panic!("expected overlap, got {other:?}"),
        }
        // Component sticking out west.
        let v = verify_legal(&d, &[Point::new(-5.0, 0.0), Point::new(20.0, 0.0)], &halos);
        assert!(v.iter().any(|v| matches!(v, Violation::OutOfDie { side: Side::West, .. })));
    }

    #[test]
    fn fixed_components_never_move() {
        let text = r#"
design: {name: t, die: {width: 100, height: 100}, tech: {bend_radius: 5, crossing_size: 10, waveguide_width: 0.5}}
components:
  - {name: anchor, cell: c, width: 20, height: 20, fixed: true, x: 40, y: 40}
  - {name: m, cell: c, width: 10, height: 10}
"#;
        let d = parse_design(text).unwrap();
        let halos = vec![0.0, 0.0];
        let pos = vec![Point::new(40.0, 40.0), Point::new(45.0, 45.0)];
        let r = legalize(&d, &pos, &halos);
        assert_eq!(r.status, LegalizeStatus::Success);
        assert_eq!(r.positions[0], Point::new(40.0, 40.0));
        assert!(verify_legal(&d, &r.positions, &halos).is_empty());
    }

    #[test]
    fn idempotent() {
        let d = boxes_design(
            &[("a", 12.0, 8.0, 0.0), ("b", 9.0, 9.0, 0.0), ("c", 7.0, 13.0, 0.0), ("d", 6.0, 6.0, 2.0)],
            200.0,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let halos: Vec<f64> = d.components.iter().map(|c| c.halo).collect();
        for _ in 0..20 {
            let pos: Vec<Point> = (0..4)
                .map(|_| Point::new(rng.gen_range(80.0..120.0), rng.gen_range(80.0..120.0)))
                .collect();
            let first = legalize(&d, &pos, &halos);
            assert_eq!(first.status, LegalizeStatus::Success);
            assert!(verify_legal(&d, &first.positions, &halos).is_empty());
            let second = legalize(&d, &first.positions, &halos);
            assert_eq!(second.positions, first.positions);
            assert_eq!(second.total_displacement, 0.0);
        }
    }

    #[test]
    fn infeasible_reports_failure_with_best_effort() {
        // Two 10x10 components cannot fit a 12-unit die.
        let d = boxes_design(&[("a", 10.0, 10.0, 0.0), ("b", 10.0, 10.0, 0.0)], 12.0);
        let halos = vec![0.0, 0.0];
        let r = legalize(&d, &[Point::new(1.0, 1.0), Point::new(1.0, 1.0)], &halos);
        assert_eq!(r.status, LegalizeStatus::Failure);
        assert!(!verify_legal(&d, &r.positions, &halos).is_empty());
    }
}
