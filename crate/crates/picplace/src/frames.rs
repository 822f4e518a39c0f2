//! SVG frame emission for placement animations.

use crate::density::FillerSet;
use crate::netlist::Design;
use crate::placer::{full_positions, PlacementState, Snapshot};
use std::fmt::Write as _;
use std::io;
use std::path::Path;

/// Write one SVG per snapshot into `dir`, zero-padded by iteration.
/// Returns the number of files written.
pub fn emit_frames(
    design: &Design,
    snapshots: &[Snapshot],
    fillers: &FillerSet,
    dir: &Path,
) -> io::Result<usize> {
    std::fs::create_dir_all(dir)?;
    for snap in snapshots {
        let state = PlacementState {
            movable: snap.movable.clone(),
            filler: snap.filler.clone(),
            iteration: snap.iter,
            seed: 0,
        };
        let svg = render_frame(design, &state, fillers);
        std::fs::write(dir.join(format!("frame_{:06}.svg", snap.iter)), svg)?;
    }
    Ok(snapshots.len())
}

/// Render the die, components, fillers and nets at one state.
pub fn render_frame(design: &Design, state: &PlacementState, fillers: &FillerSet) -> String {
    let die = &design.die;
    let positions = full_positions(design, state);
    let mut s = String::new();
    let (w, h) = (die.width, die.height);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.3} {:.3} {:.3} {:.3}">"#,
        -0.02 * w,
        -0.02 * h,
        1.04 * w,
        1.04 * h
    );
    // Flip y so the die origin sits at the lower left.
    let _ = writeln!(s, r#"<g transform="translate(0,{h:.3}) scale(1,-1)">"#);
    let _ = writeln!(
        s,
        r##"<rect x="0" y="0" width="{w:.3}" height="{h:.3}" fill="none" stroke="#333" stroke-width="{:.3}"/>"##,
        0.002 * w.max(h)
    );
    for (k, p) in state.filler.iter().enumerate() {
        let _ = k;
        let _ = writeln!(
            s,
            r##"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="#9ecae1" opacity="0.25"/>"##,
            p.x, p.y, fillers.w, fillers.h
        );
    }
    for (i, c) in design.components.iter().enumerate() {
        let p = positions[i];
        let fill = if c.fixed { "#bdbdbd" } else { "#fdae6b" };
        let _ = writeln!(
            s,
            r##"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{fill}" stroke="#663" stroke-width="{:.3}" opacity="0.85"/>"##,
            p.x,
            p.y,
            c.width,
            c.height,
            0.0005 * w.max(h)
        );
    }
    for net in &design.nets {
        let a = design.pin_world(net.pins[0], &positions);
        let b = design.pin_world(net.pins[1], &positions);
        let _ = writeln!(
            s,
            r##"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="#2b8cbe" stroke-width="{:.3}" opacity="0.7"/>"##,
            a.x,
            a.y,
            b.x,
            b.y,
            0.001 * w.max(h)
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchgen::{gen_clements, ClementsSpec, SizeClass};
    use crate::density::FillerSet;
    use crate::geom::Point;

    #[test]
    fn empty_trace_writes_nothing() {
        let d = gen_clements(&ClementsSpec::new(2, SizeClass::S)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let n = emit_frames(&d, &[], &FillerSet::empty(), dir.path()).unwrap();
        assert_eq!(n, 0);
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn frames_zero_padded_and_well_formed() {
        let d = gen_clements(&ClementsSpec::new(2, SizeClass::S)).unwrap();
        let movable: Vec<Point> = d
            .movable_indices()
            .iter()
            .map(|&i| d.components[i].position.unwrap())
            .collect();
        let snaps = vec![
            Snapshot { iter: 0, movable: movable.clone(), filler: vec![] },
            Snapshot { iter: 10, movable, filler: vec![] },
        ];
        let dir = tempfile::tempdir().unwrap();
        let n = emit_frames(&d, &snaps, &FillerSet::empty(), dir.path()).unwrap();
        assert_eq!(n, 2);
        let frame = std::fs::read_to_string(dir.path().join("frame_000000.svg")).unwrap();
        assert!(frame.starts_with("<svg"));
        assert!(frame.contains("<line"));
        assert!(dir.path().join("frame_000010.svg").exists());
    }
}
