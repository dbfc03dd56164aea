use super::*;
use crate::brep::BrepBuilder;
use crate::geom::{Point3, Vec3};
use crate::synth::primitives::{add_box, cube, seam_cut_cylinder, through_hole_box};
use proptest::prelude::*;

const TOP: usize = 5;

fn halfedge_between(m: &BrepModel, a: Point3, b: Point3, face: usize) -> usize {
    (0..m.halfedges.len())
        .find(|&h| {
            m.face_of(h) == face
                && m.vertices[m.halfedges[h].origin].dist(a) < 1e-12
                && m.vertices[m.destination(h)].dist(b) < 1e-12
        })
        .expect("half-edge exists")
}

fn seg_dist(p: Point3, a: Point3, b: Point3) -> f64 {
    let d = b - a;
    let t = ((p - a).dot(d) / d.norm_sq()).clamp(0.0, 1.0);
    p.dist(a + d * t)
}

#[test]
fn square_face_pcurves_trace_the_rectangle() {
    let m = cube(1.0);
    let pcs = boundary_pcurves(&m, TOP, 17).unwrap();
    assert_eq!(pcs.len(), 4);
    for pc in &pcs {
        let [a, b] = [pc.points[0], *pc.points.last().unwrap()];
        assert!(a[0] == b[0] || a[1] == b[1], "axis aligned: {a:?} {b:?}");
        for p in [a, b] {
            assert!((p[0] == 0.0 || p[0] == 1.0) && (p[1] == 0.0 || p[1] == 1.0));
        }
    }
}

#[test]
fn cylinder_lateral_face_has_two_circles_and_two_seams() {
    let m = seam_cut_cylinder(0.5, 1.0, false);
    let lateral = 0;
    let pcs = boundary_pcurves(&m, lateral, 17).unwrap();
    assert_eq!(pcs.len(), 4);
    let (mut horizontal, mut vertical) = (0, 0);
    for pc in &pcs {
        let us: Vec<f64> = pc.points.iter().map(|p| p[0]).collect();
        let vs: Vec<f64> = pc.points.iter().map(|p| p[1]).collect();
        if vs.iter().all(|&v| (v - vs[0]).abs() < 1e-12) {
            horizontal += 1;
            assert!((us[0] - us[us.len() - 1]).abs() > std::f64::consts::TAU - 1e-2);
            // Analytic pcurve of a circle on its cylinder: u linear in t.
            for (k, &u) in us.iter().enumerate() {
                let t = k as f64 / (us.len() - 1) as f64;
                let expect = us[0] + t * (us[us.len() - 1] - us[0]);
                assert!((u - expect).abs() < 1e-12);
            }
        } else {
            vertical += 1;
            assert!(us.iter().all(|&u| u.abs() < 1e-12 || (u - std::f64::consts::TAU).abs() < 1e-12));
        }
    }
    assert_eq!((horizontal, vertical), (2, 2));
    let seam_us: Vec<f64> = pcs.iter().filter(|p| p.points[0][1] != p.points[1][1]).map(|p| p.points[0][0]).collect();
    assert!((seam_us[0] - seam_us[1]).abs() > std::f64::consts::TAU - 1e-2, "seam copies land on opposite sides");
}

#[test]
fn inner_loop_face_has_eight_pcurves() {
    let m = through_hole_box();
    let top = m.faces.len() - 1;
    assert_eq!(boundary_pcurves(&m, top, 17).unwrap().len(), 8);
}

#[test]
fn unit_square_cells_meet_at_the_diagonals() {
    let m = cube(1.0);
    let map = voronoi_assign(&m, TOP, &SamplingConfig::default()).unwrap();
    let bottom = halfedge_between(&m, Point3::new(0.0, 0.0, 1.0), Point3::new(1.0, 0.0, 1.0), TOP);
    let right = halfedge_between(&m, Point3::new(1.0, 0.0, 1.0), Point3::new(1.0, 1.0, 1.0), TOP);
    for j in 0..64 {
        for i in 0..64 {
            let [x, y] = map.cell_uv(i, j);
            let label = map.get(i, j).expect("inside");
            if y < x.min(1.0 - x) {
                assert_eq!(label, bottom);
            }
            if 1.0 - x < y.min(1.0 - y) {
                assert_eq!(label, right);
            }
        }
    }
}

fn face_segments(m: &BrepModel, face: usize) -> Vec<(usize, Point3, Point3)> {
    let f = &m.faces[face];
    std::iter::once(f.outer)
        .chain(f.inners.iter().copied())
        .flat_map(|l| m.loops[l].halfedges.clone())
        .map(|h| (h, m.vertices[m.halfedges[h].origin], m.vertices[m.destination(h)]))
        .collect()
}

/// Nearest boundary segment computed in 3D on a planar cap, independent of the UV machinery.
fn check_cells_against_3d(m: &BrepModel, face: usize, res: usize) {
    let cfg = SamplingConfig { uv_grid: res, ..SamplingConfig::default() };
    let map = voronoi_assign(m, face, &cfg).unwrap();
    let segs = face_segments(m, face);
    let z = segs[0].1.z;
    let mut labeled = 0;
    for j in 0..res {
        for i in 0..res {
            let [x, y] = map.cell_uv(i, j);
            let p = Point3::new(x, y, z);
            let Some(label) = map.get(i, j) else { continue };
            labeled += 1;
            let own = segs.iter().find(|s| s.0 == label).map(|s| seg_dist(p, s.1, s.2)).unwrap();
            for &(h, a, b) in &segs {
                let d = seg_dist(p, a, b);
                assert!(own < d + 1e-12 || (own <= d + 1e-12 && label < h), "cell ({i},{j}) labeled {label}, {h} nearer");
            }
        }
    }
    assert!(labeled > 0);
}

#[test]
fn rectangle_two_to_one_cells_match_brute_force() {
    let mut b = BrepBuilder::new();
    add_box(&mut b, Point3::ZERO, Vec3::new(2.0, 1.0, 1.0));
    let m = b.build().unwrap();
    check_cells_against_3d(&m, TOP, 48);
    // Long edges own trapezoids: the bottom cell reaches y = 1/2 at x = 1.
    let map = voronoi_assign(&m, TOP, &SamplingConfig { uv_grid: 48, ..SamplingConfig::default() }).unwrap();
    let bottom = halfedge_between(&m, Point3::new(0.0, 0.0, 1.0), Point3::new(2.0, 0.0, 1.0), TOP);
    let bottom_cells = (0..48).filter(|&j| map.get(24, j) == Some(bottom)).count();
    assert_eq!(bottom_cells, 24);
}

#[test]
fn hole_band_cells_match_brute_force() {
    let m = through_hole_box();
    let top = m.faces.len() - 1;
    check_cells_against_3d(&m, top, 64);
    let map = voronoi_assign(&m, top, &SamplingConfig::default()).unwrap();
    let hole_center = map.labels[32 * 64 + 32];
    assert_eq!(hole_center, None, "hole is outside the trim");
    let inner: Vec<usize> = m.loops[m.faces[top].inners[0]].halfedges.clone();
    let band = map.labels.iter().flatten().filter(|h| inner.contains(h)).count();
    assert!(band > 0);
}

#[test]
fn square_half_patch_marches_to_the_diagonal() {
    let m = cube(1.0);
    let cfg = SamplingConfig::default();
    let h = halfedge_between(&m, Point3::new(0.0, 0.0, 1.0), Point3::new(1.0, 0.0, 1.0), TOP);
    let hp = sample_half_patch(&m, h, &cfg).unwrap();
    assert_eq!(hp.rows.len(), 6);
    assert!(!hp.collapsed);
    let map = voronoi_assign(&m, TOP, &cfg).unwrap();
    let chart = FaceChart::new(&m, TOP, cfg.pcurve_samples).unwrap();
    for (k, row) in hp.rows.iter().enumerate() {
        let x = (k + 1) as f64 / 7.0;
        let depth = x.min(1.0 - x);
        assert_eq!(row.len(), 4);
        assert!((row[0].x - x).abs() < 1e-15 && row[0].y == 0.0);
        for (s, p) in row.iter().enumerate() {
            assert_eq!(p.z, 1.0);
            assert!((p.x - x).abs() < 1e-12);
            assert!((p.y - depth * s as f64 / 3.0).abs() < 1e-9, "row {k} col {s}: {p:?}");
            if s > 0 && s < 3 {
                assert_eq!(chart.nearest([p.x, p.y]).0, h);
            }
        }
    }
    assert_eq!(map.resolution, 64);
}

#[test]
fn cylinder_half_patch_climbs_constant_u_lines() {
    let (r, ht) = (0.5, 1.0);
    let m = seam_cut_cylinder(r, ht, true);
    let cfg = SamplingConfig::default();
    // Bottom arc from angle 0 to π, used forward by the lateral face.
    let h = (0..m.halfedges.len())
        .find(|&h| m.face_of(h) == 0 && m.halfedges[h].forward && m.halfedges[h].edge == 0)
        .unwrap();
    let hp = sample_half_patch(&m, h, &cfg).unwrap();
    let width = std::f64::consts::TAU * r;
    for (k, row) in hp.rows.iter().enumerate() {
        let u = std::f64::consts::PI * (k + 1) as f64 / 7.0;
        let xm = r * u;
        let depth = xm.min(width - xm).min(ht / 2.0);
        for (s, p) in row.iter().enumerate() {
            assert!((p.y.atan2(p.x) - u).abs() < 1e-9, "constant u");
            assert!(((p.x * p.x + p.y * p.y).sqrt() - r).abs() < 1e-12);
            assert!((p.z - depth * s as f64 / 3.0).abs() < 1e-9, "row {k} col {s}: z={} want {}", p.z, depth * s as f64 / 3.0);
        }
    }
}

#[test]
fn sliver_face_collapses_with_warning_flag() {
    let mut b = BrepBuilder::new();
    add_box(&mut b, Point3::ZERO, Vec3::new(1.0, 1.0, 1e-7));
    let m = b.build().unwrap();
    let recs = extract_vhp(&m, &SamplingConfig::default()).unwrap();
    let side = recs.iter().find(|r| m.face_of(r.halfedge) == 0 && m.halfedges[r.halfedge].edge == 0).unwrap();
    assert!(side.half_patch.collapsed);
    for row in &side.half_patch.rows {
        assert!(row.iter().all(|p| p.dist(row[0]) <= 1e-6));
    }
}

#[test]
fn next_samples_on_ascending_right_edge() {
    let m = cube(1.0);
    let h = (0..m.halfedges.len())
        .find(|&h| {
            m.vertices[m.destination(h)] == Point3::new(1.0, 0.0, 0.0)
                && m.vertices[m.destination(m.next(h))] == Point3::new(1.0, 1.0, 0.0)
        })
        .unwrap();
    let ns = sample_next_pointers(&m, h, &SamplingConfig::default()).unwrap();
    for (k, p) in ns.iter().enumerate() {
        assert_eq!(*p, Point3::new(1.0, (k + 1) as f64 / 7.0, 0.0));
    }
}

#[test]
fn self_loop_successor_is_itself() {
    let m = seam_cut_cylinder(0.5, 1.0, false);
    let cfg = SamplingConfig::default();
    let cap = m.faces.len() - 1;
    let h = m.loops[m.faces[cap].outer].halfedges[0];
    assert_eq!(m.next(h), h);
    let ns = sample_next_pointers(&m, h, &cfg).unwrap();
    assert_eq!(ns, m.sample_halfedge(h, 6).unwrap()[..4].to_vec());
}

#[test]
fn arc_successor_samples_from_near_end() {
    let m = seam_cut_cylinder(0.5, 1.0, true);
    let cap = m.faces.len() - 1;
    let h = m.loops[m.faces[cap].outer].halfedges[0];
    let ns = sample_next_pointers(&m, h, &SamplingConfig::default()).unwrap();
    let shared = m.vertices[m.destination(h)];
    let d: Vec<f64> = ns.iter().map(|p| p.dist(shared)).collect();
    assert!(d.windows(2).all(|w| w[0] < w[1]));
    // chord of the arc at parameter k/7 of a half circle
    for (k, &dk) in d.iter().enumerate() {
        let angle = std::f64::consts::PI * (k + 1) as f64 / 7.0;
        assert!((dk - 2.0 * 0.5 * (angle / 2.0).sin()).abs() < 1e-12);
    }
}

#[test]
fn cube_records_are_all_outer() {
    let recs = extract_vhp(&cube(1.0), &SamplingConfig::default()).unwrap();
    assert_eq!(recs.len(), 24);
    assert!(recs.iter().all(|r| r.label == LoopKind::Outer));
    assert!(recs.iter().all(|r| r.descriptor().len() == 85));
}

#[test]
fn through_hole_has_sixteen_inner_records() {
    let m = through_hole_box();
    let recs = extract_vhp(&m, &SamplingConfig::default()).unwrap();
    assert_eq!(recs.len(), 48);
    // Two inner loops of four half-edges; their twins run along the hole walls.
    assert_eq!(recs.iter().filter(|r| r.label == LoopKind::Inner).count(), 8);
    let hole_edges: Vec<usize> = m.loops.iter().filter(|l| l.kind == LoopKind::Inner).flat_map(|l| l.halfedges.iter().map(|&h| m.halfedges[h].edge)).collect();
    assert_eq!(recs.iter().filter(|r| hole_edges.contains(&m.halfedges[r.halfedge].edge)).count(), 16);
}

#[test]
fn descriptor_dimension_at_defaults() {
    let cfg = SamplingConfig::default();
    assert_eq!((cfg.n_curve + 1) * cfg.n_surface * 3 + 1, 85);
    assert_eq!(cfg.descriptor_len(), 85);
}

#[test]
fn descriptor_roundtrips_through_record() {
    let cfg = SamplingConfig::default();
    let recs = extract_vhp(&through_hole_box(), &cfg).unwrap();
    for r in &recs {
        let back = VhpRecord::from_descriptor(r.halfedge, &r.descriptor(), &cfg).unwrap();
        assert_eq!(back.half_patch.rows, r.half_patch.rows);
        assert_eq!(back.next_samples, r.next_samples);
        assert_eq!(back.label, r.label);
    }
    assert!(VhpRecord::from_descriptor(0, &[0.0; 3], &cfg).is_err());
}

#[test]
fn extraction_rejects_broken_topology() {
    let mut m = cube(1.0);
    m.halfedges[0].twin = 0;
    assert!(extract_vhp(&m, &SamplingConfig::default()).is_err());
}

fn corpus_models() -> Vec<BrepModel> {
    vec![cube(1.0), through_hole_box(), seam_cut_cylinder(0.5, 1.0, true), seam_cut_cylinder(0.3, 0.4, false), crate::synth::primitives::l_bracket(), crate::synth::primitives::triangular_prism()]
}

#[test]
fn record_invariants_on_primitives() {
    let cfg = SamplingConfig::default();
    for m in corpus_models() {
        let recs = extract_vhp(&m, &cfg).unwrap();
        assert_eq!(recs.len(), 2 * m.edges.len());
        for r in &recs {
            let h = r.halfedge;
            let f = &m.faces[m.face_of(h)];
            // column 0 on the curve
            assert_eq!(r.half_patch.curve_points(), m.sample_halfedge(h, cfg.n_curve).unwrap());
            // all samples on the surface
            for p in r.half_patch.rows.iter().flatten() {
                let (_, _, d) = f.surface.closest_point(*p);
                assert!(d <= 1e-6, "sample {p:?} off surface by {d}");
            }
            // next samples are a prefix of the successor's samples
            let succ = m.sample_halfedge(m.next(h), cfg.n_curve).unwrap();
            assert_eq!(r.next_samples[..], succ[..cfg.n_next]);
            // twin symmetry
            let mut tw = recs[m.halfedges[h].twin].half_patch.curve_points();
            tw.reverse();
            assert_eq!(tw, r.half_patch.curve_points());
        }
    }
}

#[test]
fn coverage_of_curve_samples_per_face() {
    let cfg = SamplingConfig::default();
    let m = through_hole_box();
    let recs = extract_vhp(&m, &cfg).unwrap();
    for fi in 0..m.faces.len() {
        let mut from_patches: Vec<[u64; 3]> = recs
            .iter()
            .filter(|r| m.face_of(r.halfedge) == fi)
            .flat_map(|r| r.half_patch.curve_points())
            .map(|p| p.to_array().map(f64::to_bits))
            .collect();
        let mut from_edges: Vec<[u64; 3]> = face_segments(&m, fi)
            .iter()
            .flat_map(|s| m.sample_curve(m.halfedges[s.0].edge, cfg.n_curve, false).unwrap())
            .map(|p| p.to_array().map(f64::to_bits))
            .collect();
        from_patches.sort();
        from_edges.sort();
        assert_eq!(from_patches, from_edges);
    }
}

#[test]
fn extraction_is_deterministic() {
    let cfg = SamplingConfig::default();
    let m = seam_cut_cylinder(0.5, 1.0, true);
    assert_eq!(extract_vhp(&m, &cfg).unwrap(), extract_vhp(&m, &cfg).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn voronoi_cells_are_nearest_on_random_boxes(w in 0.2f64..3.0, h in 0.2f64..3.0) {
        let mut b = BrepBuilder::new();
        add_box(&mut b, Point3::ZERO, Vec3::new(w, h, 1.0));
        let m = b.build().unwrap();
        check_cells_against_3d(&m, TOP, 24);
    }
}
