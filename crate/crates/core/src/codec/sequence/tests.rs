use super::*;
use crate::brep::{normalize, BrepBuilder};
use crate::codec::{train_codebook, validity_mask, Phase};
use crate::geom::Vec3;
use crate::synth::primitives::{add_box, cube, seam_cut_cylinder, through_hole_box};

fn norm(m: &BrepModel) -> BrepModel {
    normalize(m).unwrap().0
}

fn codebook_for(models: &[BrepModel], levels: usize, size: usize) -> Codebook {
    let cfg = SamplingConfig::default();
    let corpus: Vec<Vec<f64>> =
        models.iter().flat_map(|m| extract_vhp(m, &cfg).unwrap()).map(|r| r.descriptor()).collect();
    train_codebook(&corpus, levels, size, 1).unwrap()
}

fn two_cubes() -> BrepModel {
    let mut b = BrepBuilder::new();
    add_box(&mut b, Point3::new(0.1, 0.1, 0.1), Vec3::new(0.3, 0.3, 0.3));
    add_box(&mut b, Point3::new(0.5, 0.5, 0.6), Vec3::new(0.3, 0.3, 0.3));
    b.build().unwrap()
}

#[test]
fn layout_arithmetic() {
    assert_eq!(expected_length(2, 1, 4), 17);
    assert_eq!(expected_length(8, 12, 4), 134);
}

#[test]
fn cube_has_134_tokens() {
    let m = norm(&cube(1.0));
    let cb = codebook_for(&[m.clone()], 4, 8);
    let seq = tokenize(&m, &cb, &CodecConfig::default()).unwrap();
    assert_eq!(seq.tokens.len(), 12 * 9 + 8 * 3 + 2);
}

#[test]
fn two_cubes_have_267_tokens_and_pointers_reset() {
    let m = two_cubes();
    let cb = codebook_for(&[m.clone()], 4, 8);
    let cfg = CodecConfig::default();
    let seq = tokenize(&m, &cb, &cfg).unwrap();
    assert_eq!(seq.tokens.len(), 2 * 132 + 1 + 2);
    let layout = cfg.layout(&cb);
    let sep = seq.tokens.iter().position(|&t| t == layout.sep()).unwrap();
    assert_eq!(sep, 133);
    let max_ptr = |ts: &[u32]| ts.iter().filter_map(|&t| match layout.classify(t) {
        Some(TokenKind::Pointer(p)) => Some(p),
        _ => None,
    }).max();
    assert_eq!(max_ptr(&seq.tokens[..sep]), Some(6));
    assert_eq!(max_ptr(&seq.tokens[sep..]), Some(6));
}

#[test]
fn single_edge_sequence_parses() {
    let m = norm(&cube(1.0));
    let cb = codebook_for(&[m], 4, 8);
    let cfg = CodecConfig::default();
    let l = cfg.layout(&cb);
    let mut toks = vec![l.start(), 1, 2, 3, 4, 5, 6, l.pointer_base()];
    for j in 0..8 {
        toks.push(l.level_range(j % 4).start);
    }
    toks.push(l.end());
    assert_eq!(toks.len(), 17);
    let rs = parse(&toks, &cb, &cfg).unwrap();
    assert_eq!((rs.vertex_count(), rs.edge_count()), (2, 1));
    assert_eq!((rs.components[0].edges[0].from, rs.components[0].edges[0].to), (0, 1));
}

#[test]
fn cube_adjacency_survives_parse() {
    let m = norm(&cube(1.0));
    let cb = codebook_for(&[m.clone()], 4, 8);
    let cfg = CodecConfig::default();
    let seq = tokenize(&m, &cb, &cfg).unwrap();
    let rs = parse(&seq.tokens, &cb, &cfg).unwrap();
    let order = canonical_order(&m).unwrap();
    let mut source: Vec<(usize, usize)> = m
        .edges
        .iter()
        .map(|e| {
            let (a, b) = (order.position[e.vertices[0]].1, order.position[e.vertices[1]].1);
            (a.min(b), a.max(b))
        })
        .collect();
    let mut parsed: Vec<(usize, usize)> = rs.components[0].edges.iter().map(|e| (e.from, e.to)).collect();
    source.sort();
    parsed.sort();
    assert_eq!(source, parsed);
    for (k, &v) in order.components[0].iter().enumerate() {
        let (p, q) = (rs.components[0].vertices[k], m.vertices[v]);
        for a in 0..3 {
            assert!((p.axis(a) - q.axis(a)).abs() <= 1.0 / 256.0);
        }
    }
}

#[test]
fn decoded_descriptors_equal_codebook_reconstruction() {
    let m = norm(&through_hole_box());
    let cb = codebook_for(&[m.clone()], 4, 16);
    let cfg = CodecConfig::default();
    let seq = tokenize(&m, &cb, &cfg).unwrap();
    let rs = parse(&seq.tokens, &cb, &cfg).unwrap();
    let (exact, _) = records_from_model(&m, &cfg.sampling).unwrap();
    let mut decoded: Vec<Vec<u64>> = rs.components[0]
        .edges
        .iter()
        .flat_map(|e| [e.forward.clone(), e.backward.clone()])
        .map(|d| d.iter().map(|x| x.to_bits()).collect())
        .collect();
    let mut expected: Vec<Vec<u64>> = exact.components[0]
        .edges
        .iter()
        .flat_map(|e| [e.forward.clone(), e.backward.clone()])
        .map(|d| cb.decode(&cb.encode(&d).unwrap()).unwrap().iter().map(|x| x.to_bits()).collect())
        .collect();
    decoded.sort();
    expected.sort();
    assert_eq!(decoded, expected);
}

#[test]
fn empty_model_sequence() {
    let m = norm(&cube(1.0));
    let cb = codebook_for(&[m], 1, 4);
    let cfg = CodecConfig::default();
    let l = cfg.layout(&cb);
    let rs = parse(&[l.start(), l.end()], &cb, &cfg).unwrap();
    assert_eq!(rs.vertex_count(), 0);
    assert!(parse(&[l.start()], &cb, &cfg).is_err());
}

#[test]
fn self_loop_pointer_is_accepted() {
    let m = norm(&seam_cut_cylinder(0.5, 1.0, false));
    let cb = codebook_for(&[m.clone()], 2, 4);
    let cfg = CodecConfig::default();
    let seq = tokenize(&m, &cb, &cfg).unwrap();
    let rs = parse(&seq.tokens, &cb, &cfg).unwrap();
    let loops = rs.components[0].edges.iter().filter(|e| e.from == e.to).count();
    assert_eq!(loops, 2);
}

#[test]
fn every_emitted_token_is_in_the_mask() {
    for m in [norm(&cube(1.0)), two_cubes(), norm(&through_hole_box()), norm(&seam_cut_cylinder(0.5, 1.0, true))] {
        let cb = codebook_for(&[m.clone()], 4, 8);
        let cfg = CodecConfig::default();
        let l = cfg.layout(&cb);
        let seq = tokenize(&m, &cb, &cfg).unwrap();
        let mut s = GrammarState::default();
        for &t in &seq.tokens {
            assert!(validity_mask(&s, &l).contains(t));
            s = step(&s, t, &l).unwrap();
        }
        assert_eq!(s.phase, Phase::Done);
    }
}

#[test]
fn capacity_limits_are_enforced() {
    let m = two_cubes();
    let cb = codebook_for(&[m.clone()], 4, 8);
    let small_ptr = CodecConfig { pointer_max: 7, ..CodecConfig::default() };
    assert!(matches!(tokenize(&m, &cb, &small_ptr), Err(Error::Capacity { got: 8, limit: 7, .. })));
    let short = CodecConfig { max_len: 266, ..CodecConfig::default() };
    assert!(matches!(tokenize(&m, &cb, &short), Err(Error::Capacity { got: 267, .. })));
}

#[test]
fn codebook_dimension_must_match() {
    let m = norm(&cube(1.0));
    let cb = train_codebook(&vec![vec![0.0; 10]; 4], 1, 2, 0).unwrap();
    assert!(matches!(tokenize(&m, &cb, &CodecConfig::default()), Err(Error::DescriptorLength { .. })));
}

#[test]
fn unnormalized_model_is_a_range_error() {
    let m = cube(2.0);
    let cb = codebook_for(&[norm(&m)], 1, 4);
    assert!(matches!(tokenize(&m, &cb, &CodecConfig::default()), Err(Error::Range { .. })));
}

#[test]
fn tokenize_is_deterministic() {
    let m = norm(&through_hole_box());
    let cb = codebook_for(&[m.clone()], 4, 8);
    let cfg = CodecConfig::default();
    assert_eq!(tokenize(&m, &cb, &cfg).unwrap(), tokenize(&m, &cb, &cfg).unwrap());
}
