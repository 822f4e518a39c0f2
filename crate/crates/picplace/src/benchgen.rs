//! Benchmark generators: Clements MZI meshes and crossing-heavy butterfly
//! interconnects, both emitted as regular netlists with constraint groups.

use crate::geom::Point;
use crate::netlist::{
    Component, ConstraintGroup, Design, Die, GroupKind, Net, PinRef, Port, PortDir, SignalFlow,
    Tech,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid spec: {0}")]
    BadSpec(String),
    #[error("die too small: component area utilization {utilization:.3} exceeds 0.85")]
    Utilization { utilization: f64 },
}

/// Die size class. S is compact with a tight bend radius, L is relaxed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SizeClass {
    S,
    L,
}

impl SizeClass {
    pub fn bend_radius(self) -> f64 {
        match self {
            SizeClass::S => 5.0,
            SizeClass::L => 10.0,
        }
    }

    fn target_utilization(self) -> f64 {
        match self {
            SizeClass::S => 0.5,
            SizeClass::L => 0.35,
        }
    }
}

const TERMINAL_SIZE: f64 = 5.0;
const CROSSING_SIZE: f64 = 10.0;
const WAVEGUIDE_WIDTH: f64 = 0.5;

#[derive(Clone, Debug)]
pub struct ClementsSpec {
    /// Mode count; must be even and at least 2.
    pub n: usize,
    pub mzi_w: f64,
    pub mzi_h: f64,
    /// Optional column pitch; capped so all columns fit the die.
    pub column_pitch: Option<f64>,
    pub class: SizeClass,
    /// Overrides the class utilization target when set.
    pub utilization: Option<f64>,
}

impl ClementsSpec {
    pub fn new(n: usize, class: SizeClass) -> Self {
        ClementsSpec {
            n,
            mzi_w: 300.0,
            mzi_h: 50.0,
            column_pitch: None,
            class,
            utilization: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ButterflySpec {
    /// Port count; must be a power of two and at least 2.
    pub n: usize,
    /// Defaults to log2(n) when unset.
    pub stages: Option<usize>,
    pub coupler_w: f64,
    pub coupler_h: f64,
    /// Nonzero seeds shuffle the inter-stage wiring for extra crossings.
    pub pattern_seed: u64,
    pub class: SizeClass,
    pub utilization: Option<f64>,
}

impl ButterflySpec {
    pub fn new(n: usize, class: SizeClass) -> Self {
        ButterflySpec {
            n,
            stages: None,
            coupler_w: 20.0,
            coupler_h: 10.0,
            pattern_seed: 0,
            class,
            utilization: None,
        }
    }
}

fn tech_for(class: SizeClass) -> Tech {
    Tech {
        bend_radius: class.bend_radius(),
        crossing_size: CROSSING_SIZE,
        waveguide_width: WAVEGUIDE_WIDTH,
    }
}

/// Two west ports and two east ports, separated by half the cell height so
/// both land exactly on adjacent mode rows.
fn two_by_two_ports(w: f64, h: f64) -> Vec<Port> {
    vec![
        Port { name: "w0".into(), offset: Point::new(0.0, 0.25 * h), dir: PortDir::W },
        Port { name: "w1".into(), offset: Point::new(0.0, 0.75 * h), dir: PortDir::W },
        Port { name: "e0".into(), offset: Point::new(w, 0.25 * h), dir: PortDir::E },
        Port { name: "e1".into(), offset: Point::new(w, 0.75 * h), dir: PortDir::E },
    ]
}

fn terminal(name: &str, cell: &str, pos: Point, dir: PortDir) -> Component {
    let t = TERMINAL_SIZE;
    let offset = match dir {
        PortDir::E => Point::new(t, 0.5 * t),
        PortDir::W => Point::new(0.0, 0.5 * t),
        PortDir::N => Point::new(0.5 * t, t),
        PortDir::S => Point::new(0.5 * t, 0.0),
    };
    Component {
        name: name.into(),
        cell: cell.into(),
        width: t,
        height: t,
        position: Some(pos),
        fixed: true,
        halo: 0.0,
        ports: vec![Port { name: "p".into(), offset, dir }],
    }
}

/// Die dimensions from a target utilization, stretched if needed so a grid
/// footprint of `min_w` x `min_h` fits.
fn size_die(total_area: f64, target_util: f64, min_w: f64, min_h: f64) -> Result<Die, BenchError> {
    if target_util > 0.85 {
        return Err(BenchError::Utilization { utilization: target_util });
    }
    let area = total_area / target_util;
    let aspect = min_w / min_h;
    let mut w = (area * aspect).sqrt();
    let mut h = (area / aspect).sqrt();
    if w < min_w {
        w = min_w;
        h = (area / w).max(min_h);
    }
    if h < min_h {
        h = min_h;
        w = w.max(area / h).max(min_w);
    }
    let utilization = total_area / (w * h);
    if utilization > 0.85 {
        return Err(BenchError::Utilization { utilization });
    }
    Ok(Die { width: w, height: h })
}

/// Clements mesh: N(N-1)/2 MZIs in N columns, odd columns pairing modes
/// (1,2),(3,4),... and even columns (2,3),(4,5),..., with fixed terminals on
/// the west and east die edges. Deterministic for a given spec.
pub fn gen_clements(spec: &ClementsSpec) -> Result<Design, BenchError> {
    let n = spec.n;
    if n < 2 || n % 2 != 0 {
        return Err(BenchError::BadSpec(format!("mode count must be even and >= 2, got {n}")));
    }
    if !(spec.mzi_w > 0.0) || !(spec.mzi_h > 0.0) {
        return Err(BenchError::BadSpec("mzi dimensions must be positive".into()));
    }
    let tech = tech_for(spec.class);
    let (w, h) = (spec.mzi_w, spec.mzi_h);
    let row_pitch = 0.5 * h;

    // Column -> list of lower mode indices.
    let columns: Vec<Vec<usize>> = (0..n)
        .map(|c| (c % 2..n.saturating_sub(1)).step_by(2).collect())
        .collect();
    let mzi_count: usize = columns.iter().map(|c| c.len()).sum();
    debug_assert_eq!(mzi_count, n * (n - 1) / 2);

    let total_area =
        mzi_count as f64 * w * h + 2.0 * n as f64 * TERMINAL_SIZE * TERMINAL_SIZE;
    let edge = TERMINAL_SIZE + 8.0 * tech.bend_radius;
    let min_w = n as f64 * w + 2.0 * edge;
    let min_h = n as f64 * row_pitch + 4.0 * h;
    let util = spec.utilization.unwrap_or_else(|| spec.class.target_utilization());
    let die = size_die(total_area, util, min_w, min_h)?;

    // Mode rows centered vertically; ideal column positions spread evenly.
    let rows_extent = (n - 1) as f64 * row_pitch;
    let y_base = 0.5 * (die.height - rows_extent);
    let row = |m: usize| y_base + m as f64 * row_pitch;
    let usable = die.width - 2.0 * edge - w;
    let spread = if n > 1 { usable / (n - 1) as f64 } else { 0.0 };
    let pitch = spec.column_pitch.map(|p| p.clamp(w, spread.max(w))).unwrap_or(spread);
    let col_x = |c: usize| edge + c as f64 * pitch;

    let mut components = Vec::new();
    let mut comp_index = std::collections::HashMap::new();
    let mut push = |comp: Component, components: &mut Vec<Component>| {
        comp_index.insert(comp.name.clone(), components.len());
        components.push(comp);
    };

    for m in 0..n {
        let y = row(m) - 0.5 * TERMINAL_SIZE;
        push(terminal(&format!("in{m}"), "io_west", Point::new(2.0, y), PortDir::E), &mut components);
    }
    for m in 0..n {
        let y = row(m) - 0.5 * TERMINAL_SIZE;
        let x = die.width - 2.0 - TERMINAL_SIZE;
        push(terminal(&format!("out{m}"), "io_east", Point::new(x, y), PortDir::W), &mut components);
    }

    let mut column_members: Vec<Vec<String>> = vec![Vec::new(); n];
    let mut row_members: Vec<Vec<String>> = vec![Vec::new(); n.saturating_sub(1)];
    for (c, modes) in columns.iter().enumerate() {
        for &m in modes {
            let name = format!("mzi_c{c}_m{m}");
            column_members[c].push(name.clone());
            row_members[m].push(name.clone());
            push(
                Component {
                    name,
                    cell: "mzi".into(),
                    width: w,
                    height: h,
                    position: Some(Point::new(col_x(c), row(m) - 0.25 * h)),
                    fixed: false,
                    halo: 0.0,
                    ports: two_by_two_ports(w, h),
                },
                &mut components,
            );
        }
    }

    // Walk each mode through the columns to wire the mesh.
    let port_of = |components: &[Component], comp: usize, port: &str| PinRef {
        component: comp,
        port: components[comp].ports.iter().position(|p| p.name == port).unwrap(),
    };
    let mut open: Vec<PinRef> = (0..n).map(|m| port_of(&components, comp_index[&format!("in{m}")], "p")).collect();
    let mut nets = Vec::new();
    let mut seq = 0usize;
    let connect = |a: PinRef, b: PinRef, nets: &mut Vec<Net>, seq: &mut usize| {
        nets.push(Net { name: format!("n{seq}"), weight: 1.0, pins: [a, b] });
        *seq += 1;
    };
    for (c, modes) in columns.iter().enumerate() {
        for &m in modes {
            let mzi = comp_index[&format!("mzi_c{c}_m{m}")];
            connect(open[m], port_of(&components, mzi, "w0"), &mut nets, &mut seq);
            connect(open[m + 1], port_of(&components, mzi, "w1"), &mut nets, &mut seq);
            open[m] = port_of(&components, mzi, "e0");
            open[m + 1] = port_of(&components, mzi, "e1");
        }
    }
    for m in 0..n {
        let out = comp_index[&format!("out{m}")];
        connect(open[m], port_of(&components, out, "p"), &mut nets, &mut seq);
    }

    let mut groups = Vec::new();
    for members in &column_members {
        if members.len() >= 2 {
            groups.push(ConstraintGroup {
                kind: GroupKind::AlignLeft,
                members: members.iter().map(|m| comp_index[m]).collect(),
            });
        }
    }
    for members in &row_members {
        if members.len() >= 2 {
            groups.push(ConstraintGroup {
                kind: GroupKind::AlignYCenter,
                members: members.iter().map(|m| comp_index[m]).collect(),
            });
        }
    }

    Ok(Design {
        name: format!("clements_{n}x{n}_{:?}", spec.class),
        die,
        tech,
        signal_flow: SignalFlow::X,
        components,
        nets,
        groups,
        placement_meta: None,
    })
}

/// Butterfly interconnect: log2(N) stages of 2x2 couplers, crossing-prone by
/// construction, with one uniform-spacing group per stage.
pub fn gen_butterfly(spec: &ButterflySpec) -> Result<Design, BenchError> {
    let n = spec.n;
    if n < 2 || !n.is_power_of_two() {
        return Err(BenchError::BadSpec(format!("port count must be a power of two >= 2, got {n}")));
    }
    let max_stages = n.trailing_zeros() as usize;
    let stages = spec.stages.unwrap_or(max_stages);
    if stages == 0 || stages > max_stages {
        return Err(BenchError::BadSpec(format!("stage count must be in 1..={max_stages}")));
    }
    let tech = tech_for(spec.class);
    let (w, h) = (spec.coupler_w, spec.coupler_h);
    let couplers_per_stage = n / 2;
    let total = stages * couplers_per_stage;

    let total_area = total as f64 * w * h + 2.0 * n as f64 * TERMINAL_SIZE * TERMINAL_SIZE;
    let edge = TERMINAL_SIZE + 8.0 * tech.bend_radius;
    // One full coupler height per line keeps distinct ports at distinct
    // coordinates even when a coupler spans far-apart lines.
    let row_pitch = h;
    let min_w = stages as f64 * w + 2.0 * edge;
    let min_h = n as f64 * row_pitch + 4.0 * h;
    let util = spec.utilization.unwrap_or_else(|| spec.class.target_utilization());
    let die = size_die(total_area, util, min_w, min_h)?;

    let rows_extent = (n - 1) as f64 * row_pitch;
    let y_base = 0.5 * (die.height - rows_extent);
    let line_y = |l: usize| y_base + l as f64 * row_pitch;
    let usable = die.width - 2.0 * edge - w;
    let spread = if stages > 1 { usable / (stages - 1) as f64 } else { 0.0 };
    let col_x = |s: usize| edge + s as f64 * spread;

    let mut components = Vec::new();
    for l in 0..n {
        let y = line_y(l) - 0.5 * TERMINAL_SIZE;
        components.push(terminal(&format!("in{l}"), "io_west", Point::new(2.0, y), PortDir::E));
    }
    for l in 0..n {
        let y = line_y(l) - 0.5 * TERMINAL_SIZE;
        let x = die.width - 2.0 - TERMINAL_SIZE;
        components.push(terminal(&format!("out{l}"), "io_east", Point::new(x, y), PortDir::W));
    }

    let mut stage_members: Vec<Vec<usize>> = Vec::new();
    let mut coupler_idx = vec![vec![0usize; couplers_per_stage]; stages];
    for s in 0..stages {
        let mut members = Vec::new();
        for k in 0..couplers_per_stage {
            let group = k >> s;
            let offset = k & ((1 << s) - 1);
            let l0 = (group << (s + 1)) + offset;
            let l1 = l0 + (1 << s);
            let cy = 0.5 * (line_y(l0) + line_y(l1));
            let idx = components.len();
            coupler_idx[s][k] = idx;
            members.push(idx);
            components.push(Component {
                name: format!("cpl_s{s}_k{k}"),
                cell: "coupler".into(),
                width: w,
                height: h,
                position: Some(Point::new(col_x(s), cy - 0.5 * h)),
                fixed: false,
                halo: 0.0,
                ports: two_by_two_ports(w, h),
            });
        }
        stage_members.push(members);
    }

    // line -> (stage-local coupler, lower/upper port) for stage s.
    let line_slot = |s: usize, l: usize| -> (usize, usize) {
        let group = l >> (s + 1);
        let rem = l & ((1 << (s + 1)) - 1);
        let offset = rem & ((1 << s) - 1);
        let upper = (rem >> s) & 1;
        (((group << s) + offset), upper)
    };
    let port_pin = |components: &Vec<Component>, comp: usize, name: &str| PinRef {
        component: comp,
        port: components[comp].ports.iter().position(|p| p.name == name).unwrap(),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(spec.pattern_seed);
    let mut open: Vec<PinRef> = (0..n).map(|l| port_pin(&components, l, "p")).collect();
    let mut nets = Vec::new();
    let mut seq = 0usize;
    for s in 0..stages {
        if spec.pattern_seed != 0 {
            open.shuffle(&mut rng);
        }
        let mut next = Vec::with_capacity(n);
        for l in 0..n {
            let (k, upper) = line_slot(s, l);
            let comp = coupler_idx[s][k];
            let wport = if upper == 1 { "w1" } else { "w0" };
            let eport = if upper == 1 { "e1" } else { "e0" };
            nets.push(Net {
                name: format!("n{seq}"),
                weight: 1.0,
                pins: [open[l], port_pin(&components, comp, wport)],
            });
            seq += 1;
            next.push(port_pin(&components, comp, eport));
        }
        open = next;
    }
    for l in 0..n {
        nets.push(Net {
            name: format!("n{seq}"),
            weight: 1.0,
            pins: [open[l], port_pin(&components, n + l, "p")],
        });
        seq += 1;
    }

    let groups = stage_members
        .into_iter()
        .filter(|m| m.len() >= 2)
        .map(|members| ConstraintGroup { kind: GroupKind::UniformY, members })
        .collect();

    Ok(Design {
        name: format!("butterfly_{n}_{:?}", spec.class),
        die,
        tech,
        signal_flow: SignalFlow::X,
        components,
        nets,
        groups,
        placement_meta: None,
    })
}
