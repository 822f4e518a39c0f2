//! Conditional projection for alignment and uniform-spacing groups, the
//! sharpness schedule, die clamping, and halo bookkeeping.

use crate::geom::Point;
use crate::netlist::{Component, ConstraintGroup, Design, Die, GroupKind};

#[derive(Clone, Copy, Debug)]
pub struct ProjectionSchedule {
    pub s0: f64,
    pub s_final: f64,
    pub total_iters: usize,
}

impl Default for ProjectionSchedule {
    fn default() -> Self {
        ProjectionSchedule { s0: 0.05, s_final: 1.0, total_iters: 1500 }
    }
}

/// Cosine ramp from the initial to the final sharpness.
pub fn sharpness(t: usize, sched: &ProjectionSchedule) -> f64 {
    let total = sched.total_iters.max(1) as f64;
    let phase = (std::f64::consts::PI * t as f64 / total).cos();
    sched.s0 + (sched.s_final - sched.s0) * (1.0 - phase) / 2.0
}

fn lerp(current: f64, target: f64, s: f64) -> f64 {
    (1.0 - s) * current + s * target
}

/// Project one group at sharpness `s`, touching only the constrained axis.
pub fn project_group(
    positions: &mut [Point],
    components: &[Component],
    group: &ConstraintGroup,
    s: f64,
) {
    if s == 0.0 || group.members.len() < 2 {
        return;
    }
    match group.kind {
        GroupKind::AlignLeft => {
            let target = group
                .members
                .iter()
                .map(|&i| positions[i].x)
                .fold(f64::INFINITY, f64::min);
            for &i in &group.members {
                positions[i].x = lerp(positions[i].x, target, s);
            }
        }
        GroupKind::AlignXCenter => {
            let centroid = group
                .members
                .iter()
                .map(|&i| positions[i].x + 0.5 * components[i].width)
                .sum::<f64>()
                / group.members.len() as f64;
            for &i in &group.members {
                let target = centroid - 0.5 * components[i].width;
                positions[i].x = lerp(positions[i].x, target, s);
            }
        }
        GroupKind::AlignYCenter => {
            let centroid = group
                .members
                .iter()
                .map(|&i| positions[i].y + 0.5 * components[i].height)
                .sum::<f64>()
                / group.members.len() as f64;
            for &i in &group.members {
                let target = centroid - 0.5 * components[i].height;
                positions[i].y = lerp(positions[i].y, target, s);
            }
        }
        GroupKind::UniformX => {
            uniform(positions, components, group, s, true);
        }
        GroupKind::UniformY => {
            uniform(positions, components, group, s, false);
        }
    }
}

/// Snap member centers to the regular grid spanned by the group's extent.
fn uniform(
    positions: &mut [Point],
    components: &[Component],
    group: &ConstraintGroup,
    s: f64,
    on_x: bool,
) {
    let center = |i: usize, positions: &[Point]| {
        if on_x {
            positions[i].x + 0.5 * components[i].width
        } else {
            positions[i].y + 0.5 * components[i].height
        }
    };
    let centers: Vec<f64> = group.members.iter().map(|&i| center(i, positions)).collect();
    let cmin = centers.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let cmax = centers.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    if cmax - cmin <= 1e-12 {
        return;
    }
    let pitch = (cmax - cmin) / (group.members.len() - 1) as f64;
    for (k, &i) in group.members.iter().enumerate() {
        let snapped = cmin + pitch * ((centers[k] - cmin) / pitch).round();
        let half = if on_x { 0.5 * components[i].width } else { 0.5 * components[i].height };
        let target = snapped - half;
        if on_x {
            positions[i].x = lerp(positions[i].x, target, s);
        } else {
            positions[i].y = lerp(positions[i].y, target, s);
        }
    }
}

/// Project every group at sharpness `s`.
pub fn project_groups(design: &Design, positions: &mut [Point], s: f64) {
    for group in &design.groups {
        project_group(positions, &design.components, group, s);
    }
}

/// Clamp a lower-left anchored rectangle of the given dimensions into the die.
pub fn clamp_into_die(die: &Die, pos: Point, w: f64, h: f64) -> Point {
    Point::new(
        pos.x.clamp(0.0, (die.width - w).max(0.0)),
        pos.y.clamp(0.0, (die.height - h).max(0.0)),
    )
}

/// Effective keep-out margin per component: the netlist halo plus any
/// inflation contributed by the spacing model.
pub fn apply_halos(design: &Design, extra: &[f64]) -> Vec<f64> {
    design
        .components
        .iter()
        .enumerate()
        .map(|(i, c)| c.halo + extra.get(i).copied().unwrap_or(0.0))
        .collect()
}

/// Worst alignment residual over all alignment groups (used by tests and
/// the acceptance suite).
pub fn alignment_residual(design: &Design, positions: &[Point]) -> f64 {
    let mut worst = 0.0_f64;
    for group in &design.groups {
        match group.kind {
            GroupKind::AlignLeft => {
                let xs: Vec<f64> = group.members.iter().map(|&i| positions[i].x).collect();
                let lo = xs.iter().fold(f64::INFINITY, |a, &b| a.min(b));
                let hi = xs.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
                worst = worst.max(hi - lo);
            }
            GroupKind::AlignXCenter => {
                let cs: Vec<f64> = group
                    .members
                    .iter()
                    .map(|&i| positions[i].x + 0.5 * design.components[i].width)
                    .collect();
                let lo = cs.iter().fold(f64::INFINITY, |a, &b| a.min(b));
                let hi = cs.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
                worst = worst.max(hi - lo);
            }
            GroupKind::AlignYCenter => {
                let cs: Vec<f64> = group
                    .members
                    .iter()
                    .map(|&i| positions[i].y + 0.5 * design.components[i].height)
                    .collect();
                let lo = cs.iter().fold(f64::INFINITY, |a, &b| a.min(b));
                let hi = cs.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
                worst = worst.max(hi - lo);
            }
            _ => {}
        }
    }
    worst
}

/// Worst deviation of uniform-spacing gaps from their group pitch.
pub fn uniform_gap_residual(design: &Design, positions: &[Point]) -> f64 {
    let mut worst = 0.0_f64;
    for group in &design.groups {
        let on_x = match group.kind {
            GroupKind::UniformX => true,
            GroupKind::UniformY => false,
            _ => continue,
        };
        let mut centers: Vec<f64> = group
            .members
            .iter()
            .map(|&i| {
                if on_x {
                    positions[i].x + 0.5 * design.components[i].width
                } else {
                    positions[i].y + 0.5 * design.components[i].height
                }
            })
            .collect();
        centers.sort_by(f64::total_cmp);
        let span = centers[centers.len() - 1] - centers[0];
        let pitch = span / (centers.len() - 1) as f64;
        for w in centers.windows(2) {
            worst = worst.max(((w[1] - w[0]) - pitch).abs());
        }
    }
    worst
}
