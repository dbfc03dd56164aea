use super::*;
use crate::brep::{normalize, BrepBuilder, BrepModel};
use crate::codec::{parse, step, tokenize, validity_mask, CodecConfig, GrammarState, VocabLayout};
use crate::geom::{Point3, Vec3};
use crate::pipeline::codebook_for_models;
use crate::synth::primitives::add_box;

fn cube_at(x: f64, y: f64, z: f64, s: f64) -> BrepModel {
    let mut b = BrepBuilder::new();
    add_box(&mut b, Point3::new(x, y, z), Vec3::new(s, s, s));
    add_box(&mut b, Point3::new(0.0, 0.0, 0.0), Vec3::new(0.01, 0.01, 0.01));
    b.build().unwrap()
}

struct Fixture {
    layout: VocabLayout,
    cb: crate::codec::Codebook,
    cfg: CodecConfig,
    corpus: Vec<Vec<u32>>,
}

/// Cubes of side 1 at assorted offsets (normalized) and their sequences.
fn cube_fixture(n: usize) -> Fixture {
    let cfg = CodecConfig::default();
    let models: Vec<BrepModel> = (0..n)
        .map(|k| {
            let s = 0.2 + 0.05 * (k % 5) as f64;
            let mut b = BrepBuilder::new();
            add_box(&mut b, Point3::new(0.1 * (k % 3) as f64, 0.1 * (k % 4) as f64, 0.0), Vec3::new(s, s, 0.6));
            normalize(&b.build().unwrap()).unwrap().0
        })
        .collect();
    let cb = codebook_for_models(&models, &cfg, 2, 16, 0).unwrap();
    let corpus = models.iter().map(|m| tokenize(m, &cb, &cfg).unwrap().tokens).collect();
    Fixture { layout: cfg.layout(&cb), cb, cfg, corpus }
}

fn fit(fx: &Fixture, order: usize) -> NGramModel {
    fit_ngram(&fx.corpus, fx.layout.size(), &fx.layout.hash(), order, DEFAULT_SMOOTHING).unwrap()
}

#[test]
fn conditionals_sum_to_one() {
    let fx = cube_fixture(6);
    let m = fit(&fx, DEFAULT_ORDER);
    let seq = &fx.corpus[0];
    for end in [0, 1, 5, 40, seq.len()] {
        let total: f64 = (0..m.vocab_size).map(|t| m.prob(&seq[..end], t)).sum();
        assert!((total - 1.0).abs() < 1e-12, "{total}");
    }
    let unseen = [fx.layout.end(), fx.layout.end(), fx.layout.end()];
    let total: f64 = (0..m.vocab_size).map(|t| m.prob(&unseen, t)).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn greedy_reproduces_a_repeated_sequence() {
    let fx = cube_fixture(1);
    let corpus = vec![fx.corpus[0].clone(); 3];
    let seq = &corpus[0];
    // The order must see enough context to make every continuation unique.
    let order = (1..=seq.len())
        .find(|&n| {
            let mut seen = std::collections::HashMap::new();
            let mut padded = vec![u32::MAX; n - 1];
            padded.extend_from_slice(seq);
            padded.windows(n).all(|w| *seen.entry(w[..n - 1].to_vec()).or_insert(w[n - 1]) == w[n - 1])
        })
        .unwrap();
    let m = fit_ngram(&corpus, fx.layout.size(), &fx.layout.hash(), order.max(DEFAULT_ORDER), DEFAULT_SMOOTHING).unwrap();
    let cfg = SamplerConfig { greedy: true, ..SamplerConfig::default() };
    let s = sample_sequence(&m, &fx.layout, &cfg).unwrap();
    assert_eq!(&s.tokens, seq);
    assert!(s.complete && !s.truncated);
}

#[test]
fn samples_replay_through_the_grammar_and_parse() {
    let fx = cube_fixture(12);
    let m = fit(&fx, DEFAULT_ORDER);
    let cfg = SamplerConfig { seed: 5, max_len: 600, ..SamplerConfig::default() };
    for s in sample_many(&m, &fx.layout, &cfg, 200).unwrap() {
        let mut st = GrammarState::default();
        for &t in &s.tokens {
            assert!(validity_mask(&st, &fx.layout).contains(t));
            st = step(&st, t, &fx.layout).unwrap();
        }
        assert!(s.tokens.len() <= 600);
        if s.complete {
            parse(&s.tokens, &fx.cb, &fx.cfg).unwrap();
        } else {
            assert!(s.truncated);
        }
    }
}

#[test]
fn hot_and_cold_sampling_stay_in_the_mask() {
    let fx = cube_fixture(4);
    let m = fit(&fx, DEFAULT_ORDER);
    for temperature in [0.5, 2.0] {
        let cfg = SamplerConfig { temperature, max_len: 400, ..SamplerConfig::default() };
        for s in sample_many(&m, &fx.layout, &cfg, 20).unwrap() {
            let st = s.tokens.iter().try_fold(GrammarState::default(), |st, &t| step(&st, t, &fx.layout));
            assert!(st.is_ok());
        }
    }
    assert!(sample_sequence(&m, &fx.layout, &SamplerConfig { temperature: 0.0, ..SamplerConfig::default() }).is_err());
}

#[test]
fn sampling_is_deterministic() {
    let fx = cube_fixture(6);
    let m = fit(&fx, DEFAULT_ORDER);
    let cfg = SamplerConfig { seed: 42, ..SamplerConfig::default() };
    assert_eq!(sample_many(&m, &fx.layout, &cfg, 8).unwrap(), sample_many(&m, &fx.layout, &cfg, 8).unwrap());
    let other = SamplerConfig { seed: 43, ..cfg };
    assert_ne!(sample_sequence(&m, &fx.layout, &cfg).unwrap(), sample_sequence(&m, &fx.layout, &other).unwrap());
}

#[test]
fn truncation_forces_end_when_allowed() {
    let fx = cube_fixture(6);
    let m = fit(&fx, DEFAULT_ORDER);
    let l = &fx.layout;
    // After one vertex the grammar accepts <end>; after two coordinates it does not.
    let s = sample_sequence(&m, l, &SamplerConfig { max_len: 5, ..SamplerConfig::default() }).unwrap();
    assert_eq!(s.tokens.len(), 5);
    assert_eq!(*s.tokens.last().unwrap(), l.end());
    assert!(s.truncated && s.complete);
    let s = sample_sequence(&m, l, &SamplerConfig { max_len: 3, ..SamplerConfig::default() }).unwrap();
    assert_eq!(s.tokens.len(), 3);
    assert!(s.truncated && !s.complete);
}

#[test]
fn vertex_cap_limits_components() {
    let fx = cube_fixture(6);
    let m = fit(&fx, DEFAULT_ORDER);
    let cfg = SamplerConfig { max_vertices: 3, max_len: 800, ..SamplerConfig::default() };
    for s in sample_many(&m, &fx.layout, &cfg, 30).unwrap().into_iter().filter(|s| s.complete) {
        let rs = parse(&s.tokens, &fx.cb, &fx.cfg).unwrap();
        assert!(rs.components.iter().all(|c| c.vertices.len() <= 3));
    }
}

#[test]
fn autocomplete_keeps_the_prefix() {
    let fx = cube_fixture(6);
    let m = fit(&fx, DEFAULT_ORDER);
    let l = &fx.layout;
    let two = normalize(&cube_at(0.5, 0.5, 0.5, 0.4)).unwrap().0;
    let seq = tokenize(&two, &fx.cb, &fx.cfg).unwrap().tokens;
    let sep = seq.iter().position(|&t| t == l.sep()).unwrap();
    let prefix = &seq[..=sep];
    let cfg = SamplerConfig { max_len: 1200, ..SamplerConfig::default() };
    let a = autocomplete(prefix, &m, l, &cfg).unwrap();
    let b = autocomplete(prefix, &m, l, &SamplerConfig { seed: 1, ..cfg }).unwrap();
    assert!(a.tokens.starts_with(prefix) && b.tokens.starts_with(prefix));
    assert_ne!(a.tokens, b.tokens);
    for s in [&a, &b] {
        if s.complete {
            let rs = parse(&s.tokens, &fx.cb, &fx.cfg).unwrap();
            let head = parse(&[&seq[..sep], &[l.end()][..]].concat(), &fx.cb, &fx.cfg).unwrap();
            assert_eq!(rs.components[0], head.components[0]);
        }
    }
    let from_start = autocomplete(&[l.start()], &m, l, &cfg).unwrap();
    assert_eq!(from_start, sample_sequence(&m, l, &cfg).unwrap());
    assert!(autocomplete(&seq[..sep], &m, l, &cfg).is_err());
    assert!(autocomplete(&[], &m, l, &cfg).is_err());
}

#[test]
fn model_file_roundtrip() {
    let fx = cube_fixture(3);
    let m = fit(&fx, 3);
    let json = serde_json::to_string(&m).unwrap();
    let back: NGramModel = serde_json::from_str(&json).unwrap();
    assert_eq!(back, m);
    assert_eq!(serde_json::to_string(&back).unwrap(), json);
    back.check().unwrap();
    let mut broken = back.clone();
    broken.tables.pop();
    assert!(broken.check().is_err());
    let mut broken = back;
    broken.tables[0].clear();
    assert!(broken.check().is_err());
    assert!(sample_sequence(&broken, &fx.layout, &SamplerConfig::default()).is_err());
}

#[test]
fn fitting_rejects_bad_input() {
    let l = VocabLayout::new(8, 1, 4);
    assert!(fit_ngram(&[], l.size(), &l.hash(), 4, 0.1).is_err());
    assert!(fit_ngram(&[vec![l.size()]], l.size(), &l.hash(), 4, 0.1).is_err());
    assert!(fit_ngram(&[vec![1]], l.size(), &l.hash(), 0, 0.1).is_err());
    let other = VocabLayout::new(9, 1, 4);
    let m = fit_ngram(&[vec![l.start(), 1, 2, 3, l.end()]], l.size(), &l.hash(), 2, 0.1).unwrap();
    assert!(sample_sequence(&m, &other, &SamplerConfig::default()).is_err());
}
