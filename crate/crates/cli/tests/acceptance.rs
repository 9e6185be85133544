//! Acceptance suite: one PASS/FAIL line per criterion, each checked at its
//! stated tolerance and runtime budget. Run with
//! `cargo test -p treeprobe-cli --test acceptance`.

mod common;
#[path = "../../core/tests/common/mod.rs"]
mod oracles;

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use oracles::{
    all_trees, brute_max, floyd_warshall, is_projective, random_aspect, random_heads,
    random_matrix, rng, weight,
};
use rand::RngExt;
use treeprobe::corpus::{parse_semeval_xml, read_jsonl, write_jsonl, AlignOptions, AspectSpan};
use treeprobe::decode::{
    best_root_tree, chu_liu_edmonds, crossing_arcs, eisner, import_conllu, left_chain, right_chain,
    write_conllu, Scoring,
};
use treeprobe::metrics::{asd, neighboring_proportion, Pooling};
use treeprobe::perturb::{impact_matrix, MatrixReader, MatrixWriter, DEFAULT_LAYER};
use treeprobe::treefeat::{proximity, reshape_aspect_oriented, ReshapedTree};
use treeprobe::{
    DepTree, Encoder, EncoderConfig, ImpactMatrix, Polarity, Sample, SentimentLexicon, Split,
    TreeSource,
};

type Check = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixture_samples() -> Vec<Sample> {
    let raw = std::fs::read(common::fixture("restaurants_fixture.xml")).expect("fixture corpus");
    parse_semeval_xml(&raw, "fx", Split::Test, &AlignOptions::default())
        .expect("fixture parses")
        .samples
}

fn random_corpus(r: &mut oracles::Rng) -> Vec<Sample> {
    let vocab = [
        "great", "food", "bad", "the", "wait", "too", "long", "staff", "nice", "was", "love",
    ];
    (0..r.random_range(1..10))
        .map(|k| {
            let n = r.random_range(1..20);
            Sample {
                id: format!("r{k}"),
                tokens: (0..n)
                    .map(|_| vocab[r.random_range(0..vocab.len())].to_owned())
                    .collect(),
                aspect: random_aspect(r, n),
                polarity: Polarity::Neutral,
                language: "en".into(),
            }
        })
        .collect()
}

fn chain_sanity() -> Check {
    let mut corpora = vec![fixture_samples()];
    let mut r = rng(101);
    corpora.extend((0..50).map(|_| random_corpus(&mut r)));
    for samples in &corpora {
        let left: Vec<_> = samples
            .iter()
            .map(|s| left_chain(s.tokens.len()).unwrap())
            .collect();
        let right: Vec<_> = samples
            .iter()
            .map(|s| right_chain(s.tokens.len()).unwrap())
            .collect();
        for pooling in [Pooling::Pooled, Pooling::PerSentence] {
            for trees in [&left, &right] {
                let Ok(v) = neighboring_proportion(trees, pooling) else {
                    continue; // single-word-only corpora have no arcs
                };
                ensure(v == 1.0, || format!("neighboring {v} on a chain corpus"))?;
            }
        }
    }
    Ok(format!("left/right = 1.000 on {} corpora", corpora.len()))
}

fn decoder_optimality() -> Check {
    let trees: HashMap<usize, _> = (3..=6).map(|n| (n, all_trees(n))).collect();
    let mut r = rng(103);
    for k in 0..200 {
        let n = 3 + k % 4;
        let m = random_matrix(&mut r, n);
        let cle = best_root_tree(&m, Scoring::default()).map_err(|e| e.to_string())?;
        let best = brute_max(&m, &trees[&n], |_| true);
        ensure(weight(&m, cle.heads()) == best, || {
            format!("matrix {k}: cle {} < {best}", weight(&m, cle.heads()))
        })?;
        let root = r.random_range(0..n);
        let fixed = chu_liu_edmonds(&m, root, Scoring::default()).map_err(|e| e.to_string())?;
        let best_fixed = brute_max(&m, &trees[&n], |t| t[root].is_none());
        ensure(weight(&m, fixed.heads()) == best_fixed, || {
            format!("matrix {k}: cle rooted at {root} is suboptimal")
        })?;
        let proj = eisner(&m, Scoring::default()).map_err(|e| e.to_string())?;
        let best_proj = brute_max(&m, &trees[&n], is_projective);
        ensure(weight(&m, proj.heads()) == best_proj, || {
            format!(
                "matrix {k}: eisner {} < {best_proj}",
                weight(&m, proj.heads())
            )
        })?;
    }
    Ok("200 matrices, exact weight equality".into())
}

fn projectivity() -> Check {
    let mut r = rng(107);
    for k in 0..500 {
        let n = r.random_range(1..25);
        let tree =
            eisner(&random_matrix(&mut r, n), Scoring::default()).map_err(|e| e.to_string())?;
        ensure(
            crossing_arcs(tree.heads()) == 0 && is_projective(tree.heads()),
            || format!("instance {k} crosses"),
        )?;
    }
    Ok("500 instances, 0 crossing arcs".into())
}

/// The same toy encoder the CLI builds by default.
fn toy_encoder(samples: &[Sample], seed: u64) -> Encoder {
    let mut cfg = EncoderConfig::with_words(samples.iter().flat_map(|s| s.tokens.iter()));
    cfg.num_layers = 12;
    cfg.seed = seed;
    Encoder::new(cfg).expect("toy config is valid")
}

fn naive_entry(enc: &Encoder, tokens: &[String], i: usize, j: usize, layer: usize) -> f64 {
    let masked = |set: &[usize]| -> Vec<String> {
        tokens
            .iter()
            .enumerate()
            .map(|(k, t)| {
                if set.contains(&k) {
                    "[MASK]".into()
                } else {
                    t.clone()
                }
            })
            .collect()
    };
    let a = enc.encode(&masked(&[i])).unwrap();
    let b = enc.encode(&masked(&[i, j])).unwrap();
    a.layer(layer)
        .row(i)
        .iter()
        .zip(b.layer(layer).row(i))
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn impact_invariants() -> Check {
    let samples = fixture_samples();
    let mut sentences: BTreeMap<&str, &Sample> = BTreeMap::new();
    for s in &samples {
        sentences
            .entry(s.id.split('#').next().unwrap())
            .or_insert(s);
    }
    ensure(sentences.len() == 20, || {
        format!("fixture has {} sentences", sentences.len())
    })?;
    let enc = toy_encoder(&samples, 0);
    let mut r = rng(109);
    let mut checked = 0;
    let mut worst = 0.0f64;
    for (id, s) in &sentences {
        let m = impact_matrix(&enc, id, &s.tokens, DEFAULT_LAYER).map_err(|e| e.to_string())?;
        m.validate().map_err(|e| e.to_string())?;
        let n = m.len();
        for i in 0..n {
            ensure(m.values[[i, i]] == 0.0, || {
                format!("{id}: diagonal ({i},{i}) = {}", m.values[[i, i]])
            })?;
        }
        ensure(m.values.iter().all(|v| v.is_finite() && *v >= 0.0), || {
            format!("{id}: negative or non-finite entry")
        })?;
        let again = impact_matrix(&enc, id, &s.tokens, DEFAULT_LAYER).map_err(|e| e.to_string())?;
        ensure(
            m.values
                .iter()
                .zip(again.values.iter())
                .all(|(a, b)| a.to_bits() == b.to_bits()),
            || format!("{id}: recomputation differs"),
        )?;
        let mut spots = vec![(0, 1 % n)];
        spots.extend((0..3).map(|_| (r.random_range(0..n), r.random_range(0..n))));
        for (i, j) in spots {
            let want = naive_entry(&enc, &s.tokens, i, j, DEFAULT_LAYER);
            let got = m.values[[i, j]];
            let rel = if want == 0.0 {
                got.abs()
            } else {
                (got - want).abs() / want.abs()
            };
            worst = worst.max(rel);
            ensure(rel <= 1e-12, || {
                format!("{id} ({i},{j}): {got} vs naive {want}")
            })?;
            checked += 1;
        }
    }
    let reseeded = toy_encoder(&samples, 0);
    let s = sentences.values().next().unwrap();
    let a = impact_matrix(&enc, "a", &s.tokens, DEFAULT_LAYER).unwrap();
    let b = impact_matrix(&reseeded, "a", &s.tokens, DEFAULT_LAYER).unwrap();
    ensure(a.values == b.values, || {
        "fresh encoder with the same seed differs".into()
    })?;
    Ok(format!(
        "20 sentences, {checked} spot entries, max rel err {worst:.1e}"
    ))
}

fn metric_correctness() -> Check {
    let lex = SentimentLexicon::default();
    let sample = |tokens: &[&str], aspect: (usize, usize)| Sample {
        id: tokens.join("_"),
        tokens: tokens.iter().map(|t| t.to_string()).collect(),
        aspect: AspectSpan::new(aspect.0, aspect.1),
        polarity: Polarity::Positive,
        language: "en".into(),
    };
    let tree =
        |heads: &[Option<usize>]| DepTree::new(heads.to_vec(), TreeSource::DepParser).unwrap();
    // Paths: food-is-great = 2; service-bad 1, service-wine-good 2;
    // wine..too 3, wine..long 2, list..too 2, list..long 1.
    let samples = vec![
        sample(&["the", "food", "is", "great"], (1, 2)),
        sample(&["bad", "service", "but", "good", "wine"], (1, 2)),
        sample(&["wine", "list", "too", "long"], (0, 2)),
    ];
    let trees = vec![
        tree(&[Some(1), Some(2), None, Some(2)]),
        tree(&[Some(1), None, Some(3), Some(4), Some(1)]),
        tree(&[Some(1), None, Some(3), Some(1)]),
    ];
    let expected = (2.0 + 1.5 + 2.0) / 3.0;
    let got = asd(&samples, &trees, &lex)
        .map_err(|e| e.to_string())?
        .value
        .unwrap_or(f64::NAN);
    ensure((got - expected).abs() <= 1e-12, || {
        format!("hand fixture AsD {got} vs {expected}")
    })?;

    let mut r = rng(113);
    for k in 0..100 {
        let corpus = random_corpus(&mut r);
        let left: Vec<_> = corpus
            .iter()
            .map(|s| left_chain(s.tokens.len()).unwrap())
            .collect();
        let right: Vec<_> = corpus
            .iter()
            .map(|s| right_chain(s.tokens.len()).unwrap())
            .collect();
        let (a, b) = (
            asd(&corpus, &left, &lex).unwrap(),
            asd(&corpus, &right, &lex).unwrap(),
        );
        ensure(a == b, || format!("corpus {k}: left {a:?} vs right {b:?}"))?;
    }
    for k in 0..500 {
        let n = r.random_range(1..=8);
        let heads = random_heads(&mut r, n);
        let aspect = random_aspect(&mut r, n);
        let d = floyd_warshall(&heads);
        let want: Vec<usize> = (0..n)
            .map(|i| aspect.range().map(|a| d[i][a]).min().unwrap())
            .collect();
        let got = proximity(&tree(&heads), aspect).map_err(|e| e.to_string())?;
        ensure(got == want, || {
            format!("tree {k}: proximity {got:?} vs {want:?}")
        })?;
    }
    Ok("hand AsD exact, 100 chain corpora, 500 proximity trees".into())
}

fn cross_module() -> Check {
    let mut r = rng(127);
    let mut words = 0;
    for k in 0..200 {
        let n = r.random_range(1..=15);
        let heads = random_heads(&mut r, n);
        let mut t = DepTree::new(
            heads,
            if k % 2 == 0 {
                TreeSource::DepParser
            } else {
                TreeSource::Induced
            },
        )
        .unwrap();
        if k % 2 == 0 {
            t = t
                .with_relations((0..n).map(|i| format!("rel{i}")).collect())
                .unwrap();
        }
        let aspect = random_aspect(&mut r, n);
        let prox = proximity(&t, aspect).map_err(|e| e.to_string())?;
        let reshaped = reshape_aspect_oriented(&t, aspect).map_err(|e| e.to_string())?;
        for i in (0..n).filter(|&i| !aspect.contains(i)) {
            let d = ReshapedTree::tag_distance(&reshaped.tags[i]);
            ensure(d == prox[i], || {
                format!(
                    "fixture {k} word {i}: tag {} vs proximity {}",
                    reshaped.tags[i], prox[i]
                )
            })?;
            words += 1;
        }
    }
    Ok(format!("200 fixtures, {words} non-aspect words"))
}

fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

fn round_trips() -> Check {
    let mut r = rng(131);
    let matrices: Vec<ImpactMatrix> = (1..40)
        .map(|n| {
            let mut m = random_matrix(&mut r, n);
            m.sample_id = format!("m{n}");
            m
        })
        .collect();
    let mut w = MatrixWriter::new(Vec::new());
    for m in &matrices {
        w.write(m).map_err(|e| e.to_string())?;
    }
    let bytes = w.finish().map_err(|e| e.to_string())?;
    let back: Vec<ImpactMatrix> = MatrixReader::new(bytes.as_slice())
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    ensure(back.len() == matrices.len(), || {
        "matrix count changed".into()
    })?;
    for (a, b) in back.iter().zip(&matrices) {
        ensure(
            a.sample_id == b.sample_id && a.words == b.words && a.layer == b.layer,
            || format!("{}: metadata changed", b.sample_id),
        )?;
        ensure(
            a.values
                .iter()
                .zip(b.values.iter())
                .all(|(x, y)| sig9(*x) == sig9(*y) && x == y),
            || format!("{}: values changed", b.sample_id),
        )?;
    }

    let samples = fixture_samples();
    let mut buf = Vec::new();
    write_jsonl(&mut buf, &samples).map_err(|e| e.to_string())?;
    let back = read_jsonl(buf.as_slice(), "fx", Split::Test).map_err(|e| e.to_string())?;
    ensure(back.samples == samples, || {
        "JSON Lines samples changed".into()
    })?;

    let trees: Vec<DepTree> = samples
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let source = TreeSource::ALL[k % TreeSource::ALL.len()];
            DepTree::new(random_heads(&mut r, s.tokens.len()), source).unwrap()
        })
        .collect();
    let mut text = Vec::new();
    write_conllu(
        &mut text,
        samples
            .iter()
            .zip(&trees)
            .map(|(s, t)| (s.id.as_str(), s.tokens.as_slice(), t)),
    )
    .map_err(|e| e.to_string())?;
    let parsed = import_conllu(std::str::from_utf8(&text).unwrap()).map_err(|e| e.to_string())?;
    ensure(parsed.len() == samples.len(), || {
        "CoNLL-U sentence count changed".into()
    })?;
    for ((p, s), t) in parsed.iter().zip(&samples).zip(&trees) {
        ensure(
            p.id.as_deref() == Some(s.id.as_str())
                && p.tokens == s.tokens
                && p.tree.heads() == t.heads()
                && p.tree.source() == t.source(),
            || format!("CoNLL-U sentence {} changed", s.id),
        )?;
    }
    Ok(format!(
        "{} matrices, {} samples, {} trees",
        matrices.len(),
        samples.len(),
        trees.len()
    ))
}

fn artifacts(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect()
}

fn end_to_end_determinism() -> Check {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    common::full_pipeline(a.path(), "7");
    common::full_pipeline(b.path(), "7");
    let (fa, fb) = (artifacts(a.path()), artifacts(b.path()));
    ensure(fa.keys().eq(fb.keys()), || {
        format!("file sets differ: {:?} vs {:?}", fa.keys(), fb.keys())
    })?;
    for (name, bytes) in &fa {
        ensure(fb[name] == *bytes, || {
            format!("{name} differs between runs")
        })?;
    }
    Ok(format!("{} artifacts byte-identical", fa.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("chain sanity", Duration::from_secs(1), chain_sanity),
        (
            "decoder optimality",
            Duration::from_secs(30),
            decoder_optimality,
        ),
        ("projectivity", Duration::from_secs(10), projectivity),
        (
            "impact matrix invariants",
            Duration::from_secs(30),
            impact_invariants,
        ),
        (
            "metric correctness",
            Duration::from_secs(20),
            metric_correctness,
        ),
        (
            "cross-module consistency",
            Duration::from_secs(10),
            cross_module,
        ),
        ("format round-trips", Duration::from_secs(10), round_trips),
        (
            "end-to-end determinism",
            Duration::from_secs(30),
            end_to_end_determinism,
        ),
    ];
    let mut failed = 0;
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if took > budget => Err(format!("{detail}; over budget")),
            other => other,
        };
        let timing = format!("{:.2}s / {}s", took.as_secs_f64(), budget.as_secs());
        match outcome {
            Ok(detail) => println!("PASS  {name:<26} [{timing}] {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name:<26} [{timing}] {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
