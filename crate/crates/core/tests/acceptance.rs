//! End-to-end acceptance checks. Runs as one sequential test so the timed
//! criteria are not measured against each other, and writes one result line per
//! criterion straight to stdout so it shows without `--nocapture`.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::time::{Duration, Instant};

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use vhp_core::brep::{euler_report, normalize, pair_counts, ShellEuler};
use vhp_core::codec::{parse, records_from_model, train_codebook_weighted, CodecConfig, HalfEdgeSlot, VertexRecordSet};
use vhp_core::geom::{CurveGeom, Point3, Vec3};
use vhp_core::lm::{fit_ngram, sample_many, SamplerConfig, DEFAULT_ORDER, DEFAULT_SMOOTHING};
use vhp_core::metrics::{chamfer_table, chord_deviation, clouds, cov_mmd_from_table, jsd, CHORDAL_SEGMENTS, CURVE_SAMPLES};
use vhp_core::pipeline::{codebook_for_models, descriptor_weights, encode_model, roundtrip, VERTEX_TOL};
use vhp_core::recon::{assign_next, materialize_half_edges, reconstruct, solve_assignment, AssignmentProblem};
use vhp_core::synth::{synth_corpus, synth_vertex_budget, CorpusSpec};
use vhp_core::vhp::extract_vhp;
use vhp_core::{BrepModel, Codebook};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn line(n: usize, name: &str, o: &Outcome) {
    let verdict = if o.pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "criterion {n} [{verdict}] {name}: {}", o.detail);
    let _ = out.flush();
}

/// Default corpus, its codebook and the round-trip rebuilds, shared by later criteria.
struct Corpus {
    models: Vec<BrepModel>,
    cb: Codebook,
    cfg: CodecConfig,
    rebuilt: Vec<(BrepModel, bool)>,
}

fn roundtrip_fidelity() -> (Outcome, Corpus) {
    let t = Instant::now();
    let cfg = CodecConfig::default();
    let models = synth_corpus(&CorpusSpec::default()).expect("corpus");
    let norm: Vec<BrepModel> = models.par_iter().map(|m| normalize(m).expect("normalize").0).collect();
    let cb = codebook_for_models(&norm, &cfg, 4, 256, 0).expect("codebook");
    let results: Vec<_> = models.par_iter().map(|m| roundtrip(m, &cb, &cfg)).collect();
    let elapsed = t.elapsed();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let mut rebuilt = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok((m, r)) => {
                worst = worst.max(r.comparison.max_vertex_error);
                if !r.comparison.ok(VERTEX_TOL) {
                    failures.push(i);
                }
                rebuilt.push((m, r.report.success));
            }
            Err(_) => failures.push(i),
        }
    }
    let pass = failures.is_empty() && models.len() == 500 && elapsed < Duration::from_secs(120);
    let o = outcome(
        pass,
        format!(
            "{}/{} models exact, max vertex error {worst:.3e} (limit {VERTEX_TOL:.3e}), {:.1} s (limit 120 s){}",
            models.len() - failures.len(),
            models.len(),
            elapsed.as_secs_f64(),
            if failures.is_empty() { String::new() } else { format!(", failing {:?}", &failures[..failures.len().min(10)]) }
        ),
    );
    (o, Corpus { models, cb, cfg, rebuilt })
}

fn brute_force(cost: &[Vec<f64>]) -> Option<f64> {
    let n = cost.len();
    (0..n)
        .permutations(n)
        .filter(|p| p.iter().enumerate().all(|(i, &j)| i != j))
        .map(|p| p.iter().enumerate().map(|(i, &j)| cost[i][j]).sum::<f64>())
        .min_by(f64::total_cmp)
}

fn assignment_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let stars: Vec<Vec<Vec<f64>>> = (0..1000)
        .map(|_| {
            let n = rng.gen_range(1..=6);
            (0..n).map(|_| (0..n).map(|_| rng.gen::<f64>()).collect()).collect()
        })
        .collect();
    let t = Instant::now();
    let mut mismatches = 0;
    for cost in &stars {
        let n = cost.len();
        let p = AssignmentProblem {
            vertex: 0,
            incoming: (0..n).collect(),
            outgoing: (0..n).collect(),
            cost: cost.clone(),
            forbidden: (0..n).map(|i| (i, i)).collect(),
        };
        let a = solve_assignment(&p);
        let ok = match brute_force(cost) {
            Some(best) => !a.infeasible && (a.cost - best).abs() <= 1e-12,
            None => a.infeasible,
        };
        mismatches += usize::from(!ok);
    }
    let elapsed = t.elapsed();
    outcome(
        mismatches == 0 && elapsed < Duration::from_secs(5),
        format!("{mismatches} mismatches over {} stars of degree 1..=6, {:.3} s (limit 5 s)", stars.len(), elapsed.as_secs_f64()),
    )
}

/// Draft id of every source half-edge.
fn draft_ids(rs: &VertexRecordSet, slots: &[HalfEdgeSlot]) -> Vec<usize> {
    let offsets: Vec<usize> = rs
        .components
        .iter()
        .scan(0, |acc, c| {
            let o = *acc;
            *acc += c.edges.len();
            Some(o)
        })
        .collect();
    slots.iter().map(|s| 2 * (offsets[s.component] + s.edge) + usize::from(!s.forward)).collect()
}

fn tuple_distance(a: &[Point3], b: &[Point3]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p.dist(*q).powi(2)).sum::<f64>().sqrt()
}

/// Perturbs every next-pointer tuple by uniform per-coordinate noise whose
/// norm stays below a quarter of the closest pair of candidate tuples at the
/// destination vertex, then checks the recovered successor map.
fn next_map_survives_noise(m: &BrepModel, seed: u64) -> Result<bool, String> {
    let cfg = CodecConfig::default().sampling;
    let (mut rs, slots) = records_from_model(m, &cfg).map_err(|e| e.to_string())?;
    let ids = draft_ids(&rs, &slots);
    let mut truth = vec![0; ids.len()];
    for (h, &n) in m.next_map().iter().enumerate() {
        truth[ids[h]] = ids[n];
    }
    let clean = materialize_half_edges(&rs).map_err(|e| e.to_string())?;
    let k = cfg.n_next;
    let mut gap = vec![f64::INFINITY; rs.vertex_count()];
    let mut outgoing: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for d in &clean {
        outgoing.entry(d.origin).or_default().push(d.id);
    }
    for (&v, outs) in &outgoing {
        for (&a, &b) in outs.iter().tuple_combinations() {
            gap[v] = gap[v].min(tuple_distance(&clean[a].curve[..k], &clean[b].curve[..k]));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = cfg.descriptor_len();
    let next_range = len - 1 - 3 * k..len - 1;
    let mut edge = 0;
    for comp in &mut rs.components {
        for e in &mut comp.edges {
            for (dir, desc) in [&mut e.forward, &mut e.backward].into_iter().enumerate() {
                let dest = clean[2 * edge + dir].destination;
                let bound = gap[dest].min(1.0) / 4.0;
                // Per-coordinate amplitude keeping the tuple norm strictly under `bound`.
                let amp = 0.999 * bound / ((3 * k) as f64).sqrt();
                for x in &mut desc[next_range.clone()] {
                    *x += rng.gen_range(-amp..amp);
                }
            }
            edge += 1;
        }
    }
    let noisy = materialize_half_edges(&rs).map_err(|e| e.to_string())?;
    let (next, _) = assign_next(&noisy, rs.vertex_count());
    Ok(next == truth)
}

fn noise_robustness(models: &[BrepModel]) -> Outcome {
    let subset = &models[..200];
    let results: Vec<Result<bool, String>> = subset
        .par_iter()
        .enumerate()
        .map(|(i, m)| next_map_survives_noise(&normalize(m).map_err(|e| e.to_string())?.0, i as u64))
        .collect();
    let bad: Vec<usize> = results.iter().enumerate().filter(|(_, r)| !matches!(r, Ok(true))).map(|(i, _)| i).collect();
    outcome(
        bad.is_empty(),
        format!("{}/{} next maps recovered under sub-quarter-gap noise{}", subset.len() - bad.len(), subset.len(), if bad.is_empty() { String::new() } else { format!(", failing {bad:?}") }),
    )
}

fn rq_behavior(models: &[BrepModel], cfg: &CodecConfig) -> Outcome {
    let corpus: Vec<Vec<f64>> = models[..60]
        .par_iter()
        .map(|m| extract_vhp(&normalize(m).unwrap().0, &cfg.sampling).unwrap().iter().map(|r| r.descriptor()).collect::<Vec<_>>())
        .collect::<Vec<_>>()
        .concat();
    let w = descriptor_weights(&cfg.sampling);
    let train = |levels, size| train_codebook_weighted(&corpus, levels, size, 0, &w).expect("codebook");
    let d1 = train(1, 256);
    let d4 = train(4, 256);
    let e1 = d1.mean_error(&corpus, 1).unwrap();
    let e4 = d4.mean_error(&corpus, 4).unwrap();
    let increases = corpus
        .par_iter()
        .filter(|x| {
            let errs: Vec<f64> = (0..=4).map(|l| d4.error(x, l).unwrap()).collect();
            errs.windows(2).any(|p| p[1] > p[0])
        })
        .count();
    let k64 = train(4, 64).mean_error(&corpus, 4).unwrap();
    let k512 = train(4, 512).mean_error(&corpus, 4).unwrap();
    outcome(
        e4 < e1 && increases == 0 && k512 <= k64,
        format!(
            "{} descriptors; K=256 mean error D=1 {e1:.4e} vs D=4 {e4:.4e}; {increases} vectors with error rising in D; D=4 K=64 {k64:.4e} vs K=512 {k512:.4e}",
            corpus.len()
        ),
    )
}

fn curve_discretization() -> Outcome {
    let c = CurveGeom::Arc {
        center: Point3::ZERO,
        radius: 0.4,
        x_dir: Vec3::new(1.0, 0.0, 0.0),
        y_dir: Vec3::new(0.0, 1.0, 0.0),
        start_angle: 0.0,
        sweep: TAU,
    };
    let sampled = chord_deviation(&c, CURVE_SAMPLES);
    let chordal = chord_deviation(&c, CHORDAL_SEGMENTS + 1);
    let sagitta = 0.4 * (1.0 - (PI / CHORDAL_SEGMENTS as f64).cos());
    outcome(
        sampled.mean < 5e-4 && sampled.mean < chordal.mean,
        format!(
            "r=0.4: {CURVE_SAMPLES}-point mean {:.3e} (max {:.3e}) vs {CHORDAL_SEGMENTS}-segment mean {:.3e} (max {:.3e}, sagitta {sagitta:.3e})",
            sampled.mean, sampled.max, chordal.mean, chordal.max
        ),
    )
}

/// Parsed samples and their reconstructions, for the structural check.
fn grammar_soundness(corpus: &Corpus) -> (Outcome, Vec<BrepModel>) {
    let layout = corpus.cfg.layout(&corpus.cb);
    let seqs: Vec<Vec<u32>> = corpus
        .models
        .par_iter()
        .map(|m| encode_model(m, &corpus.cb, &corpus.cfg).expect("tokenize").1.tokens)
        .collect();
    let lm = fit_ngram(&seqs, layout.size(), &layout.hash(), DEFAULT_ORDER, DEFAULT_SMOOTHING).expect("n-gram");
    let scfg = SamplerConfig { seed: 0, max_len: corpus.cfg.max_len, ..SamplerConfig::default() };
    let samples = sample_many(&lm, &layout, &scfg, 10_000).expect("samples");
    let truncated = samples.iter().filter(|s| s.truncated).count();
    let kept: Vec<&Vec<u32>> = samples.iter().filter(|s| !s.truncated).map(|s| &s.tokens).collect();
    let parsed: Vec<_> = kept.par_iter().map(|t| parse(t, &corpus.cb, &corpus.cfg)).collect();
    let failures = parsed.iter().filter(|r| r.is_err()).count();
    let rebuilt: Vec<BrepModel> = parsed
        .into_par_iter()
        .take(1000)
        .filter_map(|r| r.ok())
        .map(|rs| reconstruct(&rs))
        .filter(|(_, rep)| rep.success)
        .map(|(m, _)| m)
        .collect();
    let share = truncated as f64 / samples.len() as f64;
    let o = outcome(
        failures == 0 && share < 0.05,
        format!(
            "{}/{} untruncated samples parse, {truncated} truncated ({:.2}%, limit 5%)",
            kept.len() - failures,
            kept.len(),
            100.0 * share
        ),
    );
    (o, rebuilt)
}

fn euler_ok(s: &ShellEuler) -> bool {
    let g = s.genus.round();
    g >= 0.0 && s.chi() == 2 - 2 * g as i64 && s.v <= s.e
}

fn structural_invariants(corpus: &Corpus, budget: &[BrepModel], generated: &[BrepModel]) -> Outcome {
    let rebuilt: Vec<&BrepModel> = corpus.rebuilt.iter().filter(|(_, ok)| *ok).map(|(m, _)| m).collect();
    let groups: [(&str, Vec<&BrepModel>); 4] = [
        ("synthetic", corpus.models.iter().collect()),
        ("vertex-budget", budget.iter().collect()),
        ("round-trip", rebuilt),
        ("sampled", generated.iter().collect()),
    ];
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, models) in &groups {
        let bad = models.par_iter().filter(|m| !euler_report(m).iter().all(euler_ok)).count();
        pass &= bad == 0;
        parts.push(format!("{name} {}/{}", models.len() - bad, models.len()));
    }
    outcome(pass, format!("models with zero Euler residual and V <= E per shell: {}", parts.join(", ")))
}

fn pair_reduction(budget: &[BrepModel]) -> Outcome {
    let ratios: Vec<f64> = budget
        .iter()
        .map(|m| {
            let (intra, total) = pair_counts(m);
            intra as f64 / total as f64
        })
        .collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let (intra, total) = budget.iter().map(pair_counts).fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    outcome(
        mean <= 0.5 && budget.len() == 100 && budget.iter().all(|m| m.vertices.len() == 100),
        format!(
            "{} models of 100 vertices, mean intra/total pair ratio {:.1}% (limit 50%), {:.0} of {:.0} pairs per model",
            budget.len(),
            100.0 * mean,
            intra as f64 / budget.len() as f64,
            total as f64 / budget.len() as f64
        ),
    )
}

fn digest<T: Serialize>(v: &T) -> String {
    hex::encode(Sha256::digest(serde_json::to_vec(v).expect("serialize")))
}

/// Digest of every pipeline stage on a small corpus.
fn stage_hashes() -> Vec<(&'static str, String)> {
    let cfg = CodecConfig::default();
    let spec = CorpusSpec { seed: 9, ..CorpusSpec::default() };
    let models: Vec<BrepModel> = synth_corpus(&spec).unwrap().into_iter().step_by(25).collect();
    let norm: Vec<BrepModel> = models.iter().map(|m| normalize(m).unwrap().0).collect();
    let vhp: Vec<_> = norm.par_iter().map(|m| extract_vhp(m, &cfg.sampling).unwrap()).collect();
    let cb = codebook_for_models(&norm, &cfg, 4, 64, 3).unwrap();
    let seqs: Vec<Vec<u32>> = models.par_iter().map(|m| encode_model(m, &cb, &cfg).unwrap().1.tokens).collect();
    let records: Vec<_> = seqs.par_iter().map(|t| parse(t, &cb, &cfg).unwrap()).collect();
    let rebuilt: Vec<_> = records.par_iter().map(reconstruct).collect();
    let layout = cfg.layout(&cb);
    let lm = fit_ngram(&seqs, layout.size(), &layout.hash(), DEFAULT_ORDER, DEFAULT_SMOOTHING).unwrap();
    let samples = sample_many(&lm, &layout, &SamplerConfig { seed: 5, ..SamplerConfig::default() }, 50).unwrap();
    let budget = synth_vertex_budget(100, [2, 5], 5, 4).unwrap();
    let gc: Vec<_> = clouds(&models[..4], 500, 1).into_iter().map(Result::unwrap).collect();
    let rc: Vec<_> = clouds(&models[4..], 500, 2).into_iter().map(Result::unwrap).collect();
    let table = chamfer_table(&gc, &rc).unwrap();
    let metrics = (cov_mmd_from_table(&table).unwrap(), jsd(&gc, &rc, 28).unwrap());
    vec![
        ("synth", digest(&models)),
        ("vertex-budget", digest(&budget)),
        ("vhp", digest(&vhp)),
        ("codebook", cb.id()),
        ("tokens", digest(&seqs)),
        ("parse", digest(&records)),
        ("reconstruct", digest(&rebuilt)),
        ("n-gram", digest(&lm)),
        ("samples", digest(&samples)),
        ("clouds", digest(&(&gc, &rc))),
        ("metrics", digest(&(&table, metrics))),
    ]
}

fn determinism() -> Outcome {
    let first = stage_hashes();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(stage_hashes);
    let multi = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(stage_hashes);
    let differing: Vec<&str> = first
        .iter()
        .zip(single.iter().zip(&multi))
        .filter(|(a, (b, c))| a.1 != b.1 || a.1 != c.1)
        .map(|(a, _)| a.0)
        .collect();
    outcome(
        differing.is_empty(),
        format!(
            "{} stages hashed over 3 runs (default, 1 and 4 threads), {} differing{}",
            first.len(),
            differing.len(),
            if differing.is_empty() { String::new() } else { format!(": {differing:?}") }
        ),
    )
}

#[test]
fn acceptance_criteria() {
    let mut results = Vec::new();
    let mut record = |n: usize, name: &'static str, o: Outcome| {
        line(n, name, &o);
        results.push((n, name, o.pass));
    };
    let (o, corpus) = roundtrip_fidelity();
    record(1, "round-trip fidelity", o);
    record(2, "assignment oracle", assignment_oracle());
    record(3, "next-map noise robustness", noise_robustness(&corpus.models));
    record(4, "residual quantization", rq_behavior(&corpus.models, &corpus.cfg));
    record(5, "curve discretization", curve_discretization());
    let (o, generated) = grammar_soundness(&corpus);
    record(6, "grammar/mask soundness", o);
    let budget = synth_vertex_budget(100, [2, 5], 100, 0).expect("vertex-budget models");
    record(7, "structural invariants", structural_invariants(&corpus, &budget, &generated));
    record(8, "pair-count reduction", pair_reduction(&budget));
    record(9, "determinism", determinism());
    let failed: Vec<_> = results.iter().filter(|r| !r.2).map(|r| format!("{} ({})", r.0, r.1)).collect();
    assert!(failed.is_empty(), "failed criteria: {}", failed.join(", "));
}
