use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;
use vhp_core::brep::{normalize, transform_model, validate as validate_model, BrepModel, ValidationReport};
use vhp_core::codec::{parse, tokenize as tokenize_model, Codebook, CodecConfig, TokenSequence, VocabLayout};
use vhp_core::geom::Similarity;
use vhp_core::io::{
    load_codebook, load_json, load_model, load_ngram, load_tokens, save_codebook, save_json, save_model, save_ngram, save_obj,
    save_tokens, save_vhp_debug, write_atomic, CodebookFile, ModelFile, NGramFile, TokenFile,
};
use vhp_core::lm::{autocomplete as complete, fit_ngram, sample_many, Sample, SamplerConfig};
use vhp_core::metrics::{evaluate, MetricConfig};
use vhp_core::pipeline::{codebook_for_models, encode_model, roundtrip as roundtrip_model, RoundtripResult, VERTEX_TOL};
use vhp_core::recon::{reconstruct, ReconstructionReport};
use vhp_core::synth::{synth_corpus, CorpusSpec};

use crate::failure::{AtPath, Failure};
use crate::{
    AutocompleteArgs, DetokenizeArgs, EvalArgs, ExportArgs, FitLmArgs, GenerateArgs, RoundtripArgs, SamplingArgs, SynthArgs,
    TokenizeArgs, TrainCodebookArgs, ValidateArgs,
};

type Outcome = Result<(), Failure>;

/// Suffix of model files inside directories.
pub const MODEL_SUFFIX: &str = ".brep.json";

/// Files given directly plus the model files of given directories, each directory sorted.
fn expand(paths: &[PathBuf]) -> Result<Vec<PathBuf>, Failure> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(p)
                .at(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.to_string_lossy().ends_with(MODEL_SUFFIX) && f.is_file())
                .collect();
            files.sort();
            out.extend(files);
        } else {
            out.push(p.clone());
        }
    }
    if out.is_empty() {
        return Err(Failure::usage("no input models"));
    }
    Ok(out)
}

fn load_models(paths: &[PathBuf]) -> Result<Vec<(PathBuf, ModelFile)>, Failure> {
    expand(paths)?.into_par_iter().map(|p| load_model(&p).at(&p).map(|m| (p, m))).collect()
}

fn mkdir(dir: &Path) -> Outcome {
    fs::create_dir_all(dir).at(dir)
}

fn model_name(prefix: &str, i: usize) -> String {
    format!("{prefix}_{i:04}{MODEL_SUFFIX}")
}

fn write_report<T: Serialize>(path: Option<&PathBuf>, value: &T) -> Outcome {
    match path {
        Some(p) => save_json(p, value).at(p),
        None => Ok(()),
    }
}

fn summary<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string(value).expect("serializable summary"));
}

struct Codec {
    file: CodebookFile,
    layout: VocabLayout,
}

impl Codec {
    fn load(path: &Path) -> Result<Self, Failure> {
        let file = load_codebook(path).at(path)?;
        let layout = file.codec.layout(&file.codebook);
        Ok(Codec { file, layout })
    }

    fn cb(&self) -> &Codebook {
        &self.file.codebook
    }

    fn cfg(&self) -> &CodecConfig {
        &self.file.codec
    }
}

pub fn synth(a: SynthArgs) -> Outcome {
    let mut spec: CorpusSpec = match &a.spec {
        Some(p) => load_json(p).at(p)?,
        None => CorpusSpec::default(),
    };
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    let models = synth_corpus(&spec)?;
    mkdir(&a.out)?;
    models.par_iter().enumerate().try_for_each(|(i, m)| {
        let p = a.out.join(model_name("model", i));
        save_model(&p, &ModelFile::new(m.clone(), None)).at(&p)
    })?;
    summary(&serde_json::json!({ "models": models.len(), "seed": spec.seed }));
    Ok(())
}

#[derive(Serialize)]
struct ValidateEntry {
    path: String,
    report: ValidationReport,
}

pub fn validate(a: ValidateArgs) -> Outcome {
    let models = load_models(&a.models)?;
    let entries: Vec<ValidateEntry> = models
        .par_iter()
        .map(|(p, f)| ValidateEntry { path: p.display().to_string(), report: validate_model(&f.model) })
        .collect();
    write_report(a.report.as_ref(), &entries)?;
    let bad: Vec<&str> = entries.iter().filter(|e| !e.report.watertight).map(|e| e.path.as_str()).collect();
    summary(&serde_json::json!({ "models": entries.len(), "watertight": entries.len() - bad.len() }));
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Failure::validation(format!("{} model(s) not watertight: {}", bad.len(), bad.join(", "))))
    }
}

pub fn tokenize(a: TokenizeArgs) -> Outcome {
    let codec = Codec::load(&a.codebook)?;
    let models = load_models(&a.models)?;
    let seqs: Vec<TokenSequence> = models
        .par_iter()
        .map(|(p, f)| encode_model(&f.model, codec.cb(), codec.cfg()).map(|(_, s)| s).at(p))
        .collect::<Result<_, _>>()?;
    let n = seqs.len();
    save_tokens(&a.out, &TokenFile::from_sequences(seqs)?).at(&a.out)?;
    summary(&serde_json::json!({ "sequences": n }));
    Ok(())
}

fn normalized(models: &[(PathBuf, ModelFile)]) -> Result<Vec<BrepModel>, Failure> {
    models.par_iter().map(|(p, f)| normalize(&f.model).map(|n| n.0).at(p)).collect()
}

pub fn train_codebook(a: TrainCodebookArgs) -> Outcome {
    let models = load_models(&a.inputs)?;
    let cfg = CodecConfig::default();
    let cb = codebook_for_models(&normalized(&models)?, &cfg, a.levels, a.size, a.seed)?;
    if cb.size < a.size {
        warn!("codebook size reduced to {} (corpus size)", cb.size);
    }
    let f = CodebookFile::new(cb, cfg);
    save_codebook(&a.out, &f).at(&a.out)?;
    summary(&serde_json::json!({ "id": f.id, "levels": f.levels, "size": f.size }));
    Ok(())
}

#[derive(Serialize)]
struct DecodeEntry {
    line: usize,
    file: String,
    report: ReconstructionReport,
}

/// Parse and rebuild one sequence; the model is mapped back through `transform`.
fn decode(tokens: &[u32], transform: Option<Similarity>, codec: &Codec) -> Result<(BrepModel, ReconstructionReport), Failure> {
    let records = parse(tokens, codec.cb(), codec.cfg())?;
    let (m, report) = reconstruct(&records);
    Ok((transform.map_or(m.clone(), |t| transform_model(&m, &t)), report))
}

pub fn detokenize(a: DetokenizeArgs) -> Outcome {
    let codec = Codec::load(&a.codebook)?;
    let tf = load_tokens(&a.tokens, Some(&codec.layout)).at(&a.tokens)?;
    if tf.codebook_id != codec.file.id {
        return Err(Failure::usage(format!("tokens use codebook {}, given {}", tf.codebook_id, codec.file.id)).at(&a.tokens));
    }
    mkdir(&a.out)?;
    let entries: Vec<DecodeEntry> = tf
        .sequences
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let (m, report) = decode(&s.tokens, s.transform, &codec).map_err(|f| Failure { line: Some(i + 2), ..f }.at(&a.tokens))?;
            let name = model_name("model", i);
            let p = a.out.join(&name);
            save_model(&p, &ModelFile::new(m, None)).at(&p)?;
            Ok(DecodeEntry { line: i + 2, file: name, report })
        })
        .collect::<Result<_, Failure>>()?;
    write_report(a.report.as_ref(), &entries)?;
    let failed = entries.iter().filter(|e| !e.report.success).count();
    summary(&serde_json::json!({ "sequences": entries.len(), "failed": failed }));
    if failed > 0 {
        return Err(Failure::validation(format!("{failed} sequence(s) did not rebuild a watertight model")));
    }
    Ok(())
}

#[derive(Serialize)]
struct RoundtripEntry {
    path: String,
    ok: bool,
    result: RoundtripResult,
}

pub fn roundtrip(a: RoundtripArgs) -> Outcome {
    let t0 = Instant::now();
    let models = load_models(&a.models)?;
    let codec = match &a.codebook {
        Some(p) => Codec::load(p)?,
        None => {
            let cfg = CodecConfig::default();
            let cb = codebook_for_models(&normalized(&models)?, &cfg, a.levels, a.size, a.seed)?;
            info!("trained codebook {} in {:.1?}", cb.id(), t0.elapsed());
            let layout = cfg.layout(&cb);
            Codec { file: CodebookFile::new(cb, cfg), layout }
        }
    };
    let entries: Vec<RoundtripEntry> = models
        .par_iter()
        .map(|(p, f)| {
            let (_, result) = roundtrip_model(&f.model, codec.cb(), codec.cfg()).at(p)?;
            Ok(RoundtripEntry { path: p.display().to_string(), ok: result.comparison.ok(VERTEX_TOL), result })
        })
        .collect::<Result<_, Failure>>()?;
    write_report(a.report.as_ref(), &entries)?;
    let failed: Vec<&str> = entries.iter().filter(|e| !e.ok).map(|e| e.path.as_str()).collect();
    summary(&serde_json::json!({
        "models": entries.len(),
        "passed": entries.len() - failed.len(),
        "codebook": codec.file.id,
        "seconds": t0.elapsed().as_secs_f64(),
    }));
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::validation(format!("{} model(s) did not round-trip: {}", failed.len(), failed.join(", "))))
    }
}

pub fn fit_lm(a: FitLmArgs) -> Outcome {
    let codec = Codec::load(&a.codebook)?;
    let tf = load_tokens(&a.tokens, Some(&codec.layout)).at(&a.tokens)?;
    if tf.codebook_id != codec.file.id {
        return Err(Failure::usage(format!("tokens use codebook {}, given {}", tf.codebook_id, codec.file.id)).at(&a.tokens));
    }
    let corpus: Vec<Vec<u32>> = tf.sequences.into_iter().map(|s| s.tokens).collect();
    let model = fit_ngram(&corpus, codec.layout.size(), &codec.layout.hash(), a.order, a.smoothing)?;
    let contexts: usize = model.tables.iter().map(|t| t.len()).sum();
    save_ngram(&a.out, &NGramFile::new(model, codec.file.id.clone(), *codec.cfg())).at(&a.out)?;
    summary(&serde_json::json!({ "sequences": corpus.len(), "order": a.order, "contexts": contexts }));
    Ok(())
}

fn load_lm(path: &Path, codec: &Codec) -> Result<NGramFile, Failure> {
    let lm = load_ngram(path).at(path)?;
    if lm.codebook_id != codec.file.id {
        return Err(Failure::usage(format!("model fitted with codebook {}, given {}", lm.codebook_id, codec.file.id)).at(path));
    }
    Ok(lm)
}

fn sampler(s: &SamplingArgs) -> SamplerConfig {
    SamplerConfig { seed: s.seed, temperature: s.temperature, greedy: s.greedy, max_len: s.max_len, ..SamplerConfig::default() }
}

#[derive(Serialize)]
struct SampleEntry {
    index: usize,
    seed: u64,
    tokens: usize,
    truncated: bool,
    complete: bool,
    file: Option<String>,
    watertight: bool,
    error: Option<String>,
}

#[derive(Serialize)]
struct SampleReport {
    count: usize,
    truncated: usize,
    decoded: usize,
    watertight: usize,
    samples: Vec<SampleEntry>,
}

/// Decode samples into `out`, writing models, the complete sequences and a report.
fn write_samples(samples: &[Sample], codec: &Codec, out: &Path, prefix: &str) -> Outcome {
    mkdir(out)?;
    let entries: Vec<SampleEntry> = samples
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let mut e = SampleEntry {
                index: i,
                seed: s.seed,
                tokens: s.tokens.len(),
                truncated: s.truncated,
                complete: s.complete,
                file: None,
                watertight: false,
                error: None,
            };
            if s.complete {
                match decode(&s.tokens, None, codec) {
                    Ok((m, report)) => {
                        let name = model_name(prefix, i);
                        let p = out.join(&name);
                        save_model(&p, &ModelFile::new(m, None)).at(&p)?;
                        e.file = Some(name);
                        e.watertight = report.success;
                    }
                    Err(f) => e.error = Some(f.message),
                }
            }
            Ok(e)
        })
        .collect::<Result<_, Failure>>()?;
    let complete: Vec<TokenSequence> = samples
        .iter()
        .filter(|s| s.complete)
        .map(|s| TokenSequence {
            tokens: s.tokens.clone(),
            layout_hash: codec.layout.hash(),
            codebook_id: codec.file.id.clone(),
            transform: None,
        })
        .collect();
    if !complete.is_empty() {
        let p = out.join("samples.tokens");
        save_tokens(&p, &TokenFile::from_sequences(complete)?).at(&p)?;
    }
    let report = SampleReport {
        count: entries.len(),
        truncated: entries.iter().filter(|e| e.truncated).count(),
        decoded: entries.iter().filter(|e| e.file.is_some()).count(),
        watertight: entries.iter().filter(|e| e.watertight).count(),
        samples: entries,
    };
    save_json(&out.join("report.json"), &report).at(out)?;
    summary(&serde_json::json!({
        "count": report.count,
        "truncated": report.truncated,
        "decoded": report.decoded,
        "watertight": report.watertight,
    }));
    Ok(())
}

pub fn generate(a: GenerateArgs) -> Outcome {
    let codec = Codec::load(&a.codebook)?;
    let lm = load_lm(&a.lm, &codec)?;
    let samples = sample_many(&lm.model, &codec.layout, &sampler(&a.sampling), a.count)?;
    write_samples(&samples, &codec, &a.out, "gen")
}

/// The first `keep` components of a sequence, ending at their `<sep>` (or at `<start>`).
fn component_prefix(tokens: &[u32], layout: &VocabLayout, keep: usize) -> Vec<u32> {
    let last = *tokens.last().unwrap_or(&layout.start());
    if last == layout.start() || last == layout.sep() {
        return tokens.to_vec();
    }
    let mut cut = 1;
    let mut seen = 0;
    for (i, &t) in tokens.iter().enumerate() {
        if seen == keep {
            break;
        }
        if t == layout.sep() {
            seen += 1;
            cut = i + 1;
        }
    }
    tokens[..cut.min(tokens.len())].to_vec()
}

pub fn autocomplete(a: AutocompleteArgs) -> Outcome {
    let codec = Codec::load(&a.codebook)?;
    let lm = load_lm(&a.lm, &codec)?;
    let tf = load_tokens(&a.prefix, Some(&codec.layout)).at(&a.prefix)?;
    let first = tf.sequences.first().ok_or_else(|| Failure::usage("prefix file holds no sequence").at(&a.prefix))?;
    let prefix = component_prefix(&first.tokens, &codec.layout, a.keep);
    info!("prefix of {} tokens", prefix.len());
    let base = sampler(&a.sampling);
    let samples: Vec<Sample> = (0..a.count as u64)
        .into_par_iter()
        .map(|i| complete(&prefix, &lm.model, &codec.layout, &SamplerConfig { seed: base.seed.wrapping_add(i), ..base }))
        .collect::<Result<_, _>>()?;
    write_samples(&samples, &codec, &a.out, "completion")
}

fn tokens_or_marker(models: &[BrepModel], codec: &Codec, tag: u32) -> Vec<Vec<u32>> {
    models
        .par_iter()
        .enumerate()
        .map(|(i, m)| {
            normalize(m)
                .and_then(|(n, _)| tokenize_model(&n, codec.cb(), codec.cfg()))
                .map(|s| s.tokens)
                // Models without a canonical sequence never match anything.
                .unwrap_or_else(|_| vec![u32::MAX, tag, i as u32])
        })
        .collect()
}

pub fn eval(a: EvalArgs) -> Outcome {
    let gen = load_models(std::slice::from_ref(&a.gen))?;
    let reference = load_models(std::slice::from_ref(&a.reference))?;
    let gm: Vec<BrepModel> = gen.iter().map(|g| g.1.model.clone()).collect();
    let rm: Vec<BrepModel> = reference.iter().map(|r| r.1.model.clone()).collect();
    let tokens = match &a.codebook {
        Some(p) => {
            let codec = Codec::load(p)?;
            Some((tokens_or_marker(&gm, &codec, 0), tokens_or_marker(&rm, &codec, 1)))
        }
        None => None,
    };
    let cfg = MetricConfig { points: a.points, resolution: a.resolution, seed: a.seed };
    let ev = evaluate(&gm, &rm, tokens.as_ref().map(|(g, r)| (g.as_slice(), r.as_slice())), &cfg)?;
    save_json(&a.report, &ev.report).at(&a.report)?;
    if let Some(csv) = &a.csv {
        let name = |p: &Path| p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let argmin = |v: &mut dyn Iterator<Item = f64>| v.enumerate().fold((0, f64::INFINITY), |b, (i, x)| if x < b.1 { (i, x) } else { b });
        let mut out = String::from("set,file,nearest,chamfer\n");
        for (k, row) in ev.table.iter().enumerate() {
            let (r, d) = argmin(&mut row.iter().copied());
            out.push_str(&format!("gen,{},{},{d}\n", name(&gen[ev.sampled[k]].0), name(&reference[r].0)));
        }
        for (r, (p, _)) in reference.iter().enumerate() {
            let (k, d) = argmin(&mut ev.table.iter().map(|row| row[r]));
            out.push_str(&format!("ref,{},{},{d}\n", name(p), name(&gen[ev.sampled[k]].0)));
        }
        write_atomic(csv, out.as_bytes()).at(csv)?;
    }
    summary(&ev.report);
    Ok(())
}

pub fn export_obj(a: ExportArgs) -> Outcome {
    let f = load_model(&a.model).at(&a.model)?;
    save_obj(&a.out, &f.model).at(&a.out)
}

pub fn export_vhp_debug(a: ExportArgs) -> Outcome {
    let f = load_model(&a.model).at(&a.model)?;
    save_vhp_debug(&a.out, &f.model, &CodecConfig::default().sampling).at(&a.model)
}
