//! Design data model and the YAML netlist / placement file formats.
//!
//! All lengths are micrometers with double precision. Components are
//! anchored at their lower-left corner; port offsets are corner-relative.

use crate::geom::{Point, Rect};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use std::fmt;

#[derive(Debug, thiserror::Error)]
pub enum NetlistError {
    #[error("yaml: {0}")]
    Yaml(#[from] serde_yaml::Error),
    #[error("{path}: {msg}")]
    Invalid { path: String, msg: String },
    #[error("placement has {got} movable positions, design has {want} movable components")]
    DimensionMismatch { got: usize, want: usize },
}

fn invalid(path: impl Into<String>, msg: impl Into<String>) -> NetlistError {
    NetlistError::Invalid {
        path: path.into(),
        msg: msg.into(),
    }
}

/// Layout region; the origin is fixed at (0, 0).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Die {
    pub width: f64,
    pub height: f64,
}

impl Die {
    pub fn area(&self) -> f64 {
        self.width * self.height
    }
}

/// Technology scalars shared by the whole design.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Tech {
    pub bend_radius: f64,
    pub crossing_size: f64,
    pub waveguide_width: f64,
}

/// One of the four axis-aligned port orientations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PortDir {
    E,
    N,
    W,
    S,
}

impl PortDir {
    pub fn vector(self) -> Point {
        match self {
            PortDir::E => Point::new(1.0, 0.0),
            PortDir::N => Point::new(0.0, 1.0),
            PortDir::W => Point::new(-1.0, 0.0),
            PortDir::S => Point::new(0.0, -1.0),
        }
    }

    pub fn is_horizontal(self) -> bool {
        matches!(self, PortDir::E | PortDir::W)
    }

    pub fn opposite(self) -> PortDir {
        match self {
            PortDir::E => PortDir::W,
            PortDir::N => PortDir::S,
            PortDir::W => PortDir::E,
            PortDir::S => PortDir::N,
        }
    }
}

impl fmt::Display for PortDir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PortDir::E => "E",
            PortDir::N => "N",
            PortDir::W => "W",
            PortDir::S => "S",
        };
        f.write_str(s)
    }
}

/// Open-ended waveguide stub on a component boundary.
#[derive(Clone, Debug)]
pub struct Port {
    pub name: String,
    /// Offset of the port from the component's lower-left corner.
    pub offset: Point,
    pub dir: PortDir,
}

#[derive(Clone, Debug)]
pub struct Component {
    pub name: String,
    pub cell: String,
    pub width: f64,
    pub height: f64,
    /// Lower-left corner. Mandatory for fixed components, optional otherwise.
    pub position: Option<Point>,
    pub fixed: bool,
    pub halo: f64,
    pub ports: Vec<Port>,
}

impl Component {
    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn rect(&self, pos: Point) -> Rect {
        Rect::new(pos.x, pos.y, self.width, self.height)
    }

    /// Number of ports sharing `dir` (used by the spacing model).
    pub fn ports_in_dir(&self, dir: PortDir) -> usize {
        self.ports.iter().filter(|p| p.dir == dir).count()
    }
}

/// Resolved pin: indices into `Design::components` and its port list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PinRef {
    pub component: usize,
    pub port: usize,
}

/// Two-pin waveguide connection.
#[derive(Clone, Debug)]
pub struct Net {
    pub name: String,
    pub weight: f64,
    pub pins: [PinRef; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupKind {
    AlignLeft,
    AlignXCenter,
    AlignYCenter,
    UniformX,
    UniformY,
}

impl GroupKind {
    /// Axis the group constrains: true for x, false for y.
    pub fn on_x_axis(self) -> bool {
        matches!(
            self,
            GroupKind::AlignLeft | GroupKind::AlignXCenter | GroupKind::UniformX
        )
    }
}

#[derive(Clone, Debug)]
pub struct ConstraintGroup {
    pub kind: GroupKind,
    /// Indices into `Design::components`; all movable.
    pub members: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalFlow {
    X,
    Y,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PlacementMeta {
    pub iterations: usize,
    pub final_overflow: f64,
    pub seed: u64,
}

/// Fully validated, immutable design.
#[derive(Clone, Debug)]
pub struct Design {
    pub name: String,
    pub die: Die,
    pub tech: Tech,
    pub signal_flow: SignalFlow,
    pub components: Vec<Component>,
    pub nets: Vec<Net>,
    pub groups: Vec<ConstraintGroup>,
    pub placement_meta: Option<PlacementMeta>,
}

impl Design {
    pub fn component_index(&self, name: &str) -> Option<usize> {
        self.components.iter().position(|c| c.name == name)
    }

    /// Indices of movable components in design order.
    pub fn movable_indices(&self) -> Vec<usize> {
        (0..self.components.len())
            .filter(|&i| !self.components[i].fixed)
            .collect()
    }

    pub fn movable_area(&self) -> f64 {
        self.components
            .iter()
            .filter(|c| !c.fixed)
            .map(|c| c.area())
            .sum()
    }

    /// World coordinate of a pin given per-component positions.
    pub fn pin_world(&self, pin: PinRef, positions: &[Point]) -> Point {
        let comp = &self.components[pin.component];
        positions[pin.component] + comp.ports[pin.port].offset
    }

    pub fn port_dir(&self, pin: PinRef) -> PortDir {
        self.components[pin.component].ports[pin.port].dir
    }

    /// Positions as stored in the file (fixed always present; movables must
    /// have been placed). Errors name the first unplaced component.
    pub fn stored_positions(&self) -> Result<Vec<Point>, NetlistError> {
        self.components
            .iter()
            .enumerate()
            .map(|(i, c)| {
                c.position
                    .ok_or_else(|| invalid(format!("components[{i}]"), "missing x/y position"))
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// YAML document mirror
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct HeaderDoc {
    name: String,
    die: Die,
    tech: Tech,
    #[serde(default = "default_flow")]
    signal_flow: SignalFlow,
}

fn default_flow() -> SignalFlow {
    SignalFlow::X
}

#[derive(Serialize, Deserialize)]
struct PortDoc {
    name: String,
    dx: f64,
    dy: f64,
    dir: PortDir,
}

#[derive(Serialize, Deserialize)]
struct ComponentDoc {
    name: String,
    cell: String,
    width: f64,
    height: f64,
    #[serde(default)]
    fixed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    halo: Option<f64>,
    #[serde(default)]
    ports: Vec<PortDoc>,
}

#[derive(Serialize, Deserialize)]
struct PinDoc {
    comp: String,
    port: String,
}

#[derive(Serialize, Deserialize)]
struct NetDoc {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight: Option<f64>,
    pins: Vec<PinDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type")]
enum ConstraintDoc {
    #[serde(rename = "alignment")]
    Alignment { mode: AlignMode, members: Vec<String> },
    #[serde(rename = "uniform-spacing")]
    UniformSpacing { axis: AxisDoc, members: Vec<String> },
}

#[derive(Serialize, Deserialize, Clone, Copy)]
enum AlignMode {
    #[serde(rename = "left")]
    Left,
    #[serde(rename = "x-center")]
    XCenter,
    #[serde(rename = "y-center")]
    YCenter,
}

#[derive(Serialize, Deserialize, Clone, Copy)]
enum AxisDoc {
    #[serde(rename = "x")]
    X,
    #[serde(rename = "y")]
    Y,
}

#[derive(Serialize, Deserialize)]
struct NetlistDoc {
    design: HeaderDoc,
    components: Vec<ComponentDoc>,
    #[serde(default)]
    nets: Vec<NetDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    constraints: Vec<ConstraintDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    placement_meta: Option<PlacementMeta>,
}

/// Tolerance for "port lies on the boundary" checks, in micrometers.
const BOUNDARY_EPS: f64 = 1e-6;

/// Parse and fully validate a YAML netlist document.
pub fn parse_design(text: &str) -> Result<Design, NetlistError> {
    let doc: NetlistDoc = serde_yaml::from_str(text)?;
    build_design(doc)
}

fn build_design(doc: NetlistDoc) -> Result<Design, NetlistError> {
    if !(doc.design.die.width > 0.0) || !(doc.design.die.height > 0.0) {
        return Err(invalid("design.die", "width and height must be positive"));
    }
    let tech = doc.design.tech;
    if !(tech.bend_radius > 0.0) || !(tech.crossing_size > 0.0) || !(tech.waveguide_width > 0.0) {
        return Err(invalid("design.tech", "all tech values must be positive"));
    }

    let mut components = Vec::with_capacity(doc.components.len());
    let mut comp_names: HashMap<String, usize> = HashMap::new();
    for (i, c) in doc.components.into_iter().enumerate() {
        let path = format!("components[{i}]");
        if comp_names.insert(c.name.clone(), i).is_some() {
            return Err(invalid(path, format!("duplicate component name '{}'", c.name)));
        }
        if !(c.width > 0.0) || !(c.height > 0.0) {
            return Err(invalid(path, "width and height must be positive"));
        }
        let halo = c.halo.unwrap_or(0.0);
        if halo < 0.0 {
            return Err(invalid(format!("{path}.halo"), "halo must be nonnegative"));
        }
        let position = match (c.x, c.y) {
            (Some(x), Some(y)) => Some(Point::new(x, y)),
            (None, None) => None,
            _ => return Err(invalid(path, "x and y must be given together")),
        };
        if c.fixed && position.is_none() {
            return Err(invalid(path, "fixed component requires a position"));
        }
        let mut port_names = HashSet::new();
        let mut ports = Vec::with_capacity(c.ports.len());
        for (j, p) in c.ports.into_iter().enumerate() {
            let ppath = format!("{path}.ports[{j}]");
            if !port_names.insert(p.name.clone()) {
                return Err(invalid(ppath, format!("duplicate port name '{}'", p.name)));
            }
            check_port_on_boundary(&ppath, p.dx, p.dy, p.dir, c.width, c.height)?;
            ports.push(Port {
                name: p.name,
                offset: Point::new(p.dx, p.dy),
                dir: p.dir,
            });
        }
        components.push(Component {
            name: c.name,
            cell: c.cell,
            width: c.width,
            height: c.height,
            position,
            fixed: c.fixed,
            halo,
            ports,
        });
    }

    let mut nets = Vec::with_capacity(doc.nets.len());
    let mut net_names = HashSet::new();
    let mut used_ports: HashSet<(usize, usize)> = HashSet::new();
    for (i, n) in doc.nets.into_iter().enumerate() {
        let path = format!("nets[{i}]");
        if !net_names.insert(n.name.clone()) {
            return Err(invalid(path, format!("duplicate net name '{}'", n.name)));
        }
        if n.pins.len() != 2 {
            return Err(invalid(
                path,
                format!("net '{}' must have exactly 2 pins, found {}", n.name, n.pins.len()),
            ));
        }
        let mut pins = [PinRef { component: 0, port: 0 }; 2];
        for (j, pin) in n.pins.iter().enumerate() {
            let ppath = format!("{path}.pins[{j}]");
            let ci = *comp_names.get(&pin.comp).ok_or_else(|| {
                invalid(&ppath, format!("net '{}' references unknown component '{}'", n.name, pin.comp))
            })?;
            let pi = components[ci]
                .ports
                .iter()
                .position(|p| p.name == pin.port)
                .ok_or_else(|| {
                    invalid(
                        &ppath,
                        format!("net '{}' references unknown port '{}.{}'", n.name, pin.comp, pin.port),
                    )
                })?;
            if !used_ports.insert((ci, pi)) {
                return Err(invalid(
                    &ppath,
                    format!("port '{}.{}' is used by more than one net", pin.comp, pin.port),
                ));
            }
            pins[j] = PinRef { component: ci, port: pi };
        }
        if pins[0].component == pins[1].component {
            return Err(invalid(path, format!("net '{}' connects a component to itself", n.name)));
        }
        let weight = n.weight.unwrap_or(1.0);
        if weight < 0.0 {
            return Err(invalid(format!("{path}.weight"), "weight must be nonnegative"));
        }
        nets.push(Net { name: n.name, weight, pins });
    }

    let mut groups = Vec::with_capacity(doc.constraints.len());
    // A component may join at most one group per axis.
    let mut claimed_x: HashMap<usize, usize> = HashMap::new();
    let mut claimed_y: HashMap<usize, usize> = HashMap::new();
    for (i, g) in doc.constraints.into_iter().enumerate() {
        let path = format!("constraints[{i}]");
        let (kind, names) = match g {
            ConstraintDoc::Alignment { mode, members } => {
                let kind = match mode {
                    AlignMode::Left => GroupKind::AlignLeft,
                    AlignMode::XCenter => GroupKind::AlignXCenter,
                    AlignMode::YCenter => GroupKind::AlignYCenter,
                };
                (kind, members)
            }
            ConstraintDoc::UniformSpacing { axis, members } => {
                let kind = match axis {
                    AxisDoc::X => GroupKind::UniformX,
                    AxisDoc::Y => GroupKind::UniformY,
                };
                (kind, members)
            }
        };
        if names.len() < 2 {
            return Err(invalid(path, "constraint group needs at least 2 members"));
        }
        let mut members = Vec::with_capacity(names.len());
        let mut seen = HashSet::new();
        for (j, name) in names.iter().enumerate() {
            let mpath = format!("{path}.members[{j}]");
            let ci = *comp_names
                .get(name)
                .ok_or_else(|| invalid(&mpath, format!("unknown component '{name}'")))?;
            if components[ci].fixed {
                return Err(invalid(&mpath, format!("member '{name}' is fixed")));
            }
            if !seen.insert(ci) {
                return Err(invalid(&mpath, format!("duplicate member '{name}'")));
            }
            let claimed = if kind.on_x_axis() { &mut claimed_x } else { &mut claimed_y };
            if let Some(prev) = claimed.insert(ci, i) {
                return Err(invalid(
                    &mpath,
                    format!("member '{name}' already constrained on this axis by constraints[{prev}]"),
                ));
            }
            members.push(ci);
        }
        groups.push(ConstraintGroup { kind, members });
    }

    Ok(Design {
        name: doc.design.name,
        die: doc.design.die,
        tech,
        signal_flow: doc.design.signal_flow,
        components,
        nets,
        groups,
        placement_meta: doc.placement_meta,
    })
}

fn check_port_on_boundary(
    path: &str,
    dx: f64,
    dy: f64,
    dir: PortDir,
    w: f64,
    h: f64,
) -> Result<(), NetlistError> {
    let inside_x = (-BOUNDARY_EPS..=w + BOUNDARY_EPS).contains(&dx);
    let inside_y = (-BOUNDARY_EPS..=h + BOUNDARY_EPS).contains(&dy);
    let on_edge = match dir {
        PortDir::E => (dx - w).abs() <= BOUNDARY_EPS && inside_y,
        PortDir::W => dx.abs() <= BOUNDARY_EPS && inside_y,
        PortDir::N => (dy - h).abs() <= BOUNDARY_EPS && inside_x,
        PortDir::S => dy.abs() <= BOUNDARY_EPS && inside_x,
    };
    if on_edge {
        Ok(())
    } else {
        Err(invalid(
            path,
            format!("port offset ({dx}, {dy}) does not lie on the {dir}-facing boundary of a {w}x{h} component"),
        ))
    }
}

// ---------------------------------------------------------------------------
// Placement output
// ---------------------------------------------------------------------------

/// Serialize the design with positions filled for every component.
///
/// `movable_positions` pairs with `Design::movable_indices()` in order. The
/// document round-trips through `parse_design` with bit-exact positions.
pub fn write_placement(
    design: &Design,
    movable_positions: &[Point],
    meta: PlacementMeta,
) -> Result<String, NetlistError> {
    let movable = design.movable_indices();
    if movable.len() != movable_positions.len() {
        return Err(NetlistError::DimensionMismatch {
            got: movable_positions.len(),
            want: movable.len(),
        });
    }
    let mut positions: Vec<Option<Point>> =
        design.components.iter().map(|c| c.position).collect();
    for (k, &ci) in movable.iter().enumerate() {
        positions[ci] = Some(movable_positions[k]);
    }
    let doc = design_to_doc(design, &positions, Some(meta))?;
    Ok(serde_yaml::to_string(&doc)?)
}

/// Serialize a design as-is (used by the benchmark generator).
pub fn write_design(design: &Design) -> Result<String, NetlistError> {
    let positions: Vec<Option<Point>> = design.components.iter().map(|c| c.position).collect();
    let doc = design_to_doc(design, &positions, design.placement_meta)?;
    Ok(serde_yaml::to_string(&doc)?)
}

fn design_to_doc(
    design: &Design,
    positions: &[Option<Point>],
    meta: Option<PlacementMeta>,
) -> Result<NetlistDoc, NetlistError> {
    let components = design
        .components
        .iter()
        .zip(positions)
        .map(|(c, pos)| ComponentDoc {
            name: c.name.clone(),
            cell: c.cell.clone(),
            width: c.width,
            height: c.height,
            fixed: c.fixed,
            x: pos.map(|p| p.x),
            y: pos.map(|p| p.y),
            halo: if c.halo != 0.0 { Some(c.halo) } else { None },
            ports: c
                .ports
                .iter()
                .map(|p| PortDoc {
                    name: p.name.clone(),
                    dx: p.offset.x,
                    dy: p.offset.y,
                    dir: p.dir,
                })
                .collect(),
        })
        .collect();
    let nets = design
        .nets
        .iter()
        .map(|n| NetDoc {
            name: n.name.clone(),
            weight: if n.weight != 1.0 { Some(n.weight) } else { None },
            pins: n
                .pins
                .iter()
                .map(|pin| PinDoc {
                    comp: design.components[pin.component].name.clone(),
                    port: design.components[pin.component].ports[pin.port].name.clone(),
                })
                .collect(),
        })
        .collect();
    let constraints = design
        .groups
        .iter()
        .map(|g| {
            let members = g
                .members
                .iter()
                .map(|&ci| design.components[ci].name.clone())
                .collect();
            match g.kind {
                GroupKind::AlignLeft => ConstraintDoc::Alignment { mode: AlignMode::Left, members },
                GroupKind::AlignXCenter => {
                    ConstraintDoc::Alignment { mode: AlignMode::XCenter, members }
                }
                GroupKind::AlignYCenter => {
                    ConstraintDoc::Alignment { mode: AlignMode::YCenter, members }
                }
                GroupKind::UniformX => ConstraintDoc::UniformSpacing { axis: AxisDoc::X, members },
                GroupKind::UniformY => ConstraintDoc::UniformSpacing { axis: AxisDoc::Y, members },
            }
        })
        .collect();
    Ok(NetlistDoc {
        design: HeaderDoc {
            name: design.name.clone(),
            die: design.die,
            tech: design.tech,
            signal_flow: design.signal_flow,
        },
        components,
        nets,
        constraints,
        placement_meta: meta,
    })
}
