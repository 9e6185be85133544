use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::BufReader;
use std::path::Path;

use rayon::prelude::*;
use treeprobe::corpus::{self, AlignOptions, PolarityCounts};
use treeprobe::decode::{self, DecodeOptions, Scoring};
use treeprobe::metrics::{read_pairs, Agreement, OpinionPair};
use treeprobe::perturb::{
    aggregate_subwords, read_alignments, read_matrices, ImpactSource, MatrixFileSource,
    MatrixWriter, PerturbedMasking,
};
use treeprobe::treefeat::{write_features, TreeFeatures};
use treeprobe::{
    Dataset, DepTree, Encoder, EncoderConfig, ImpactMatrix, MetricsReport, Sample,
    SentimentLexicon, Split, TreeSource,
};

use crate::error::CliError;
use crate::manifest::{check_fresh, OutputSet};
use crate::{AnalyzeArgs, DecodeArgs, FeaturesArgs, IngestArgs, InputFormat, MatricesArgs};

/// Layers of the built-in encoder, deep enough for the default layer.
const TOY_LAYERS: usize = 12;

type Inputs = BTreeMap<String, String>;

fn config_value<T: serde::Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).expect("arguments serialize")
}

fn read_input(path: &Path, force: bool, inputs: &mut Inputs) -> Result<Vec<u8>, CliError> {
    let digest = check_fresh(path, force)?;
    inputs.insert(display_name(path), digest);
    fs::read(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn read_text(path: &Path, force: bool, inputs: &mut Inputs) -> Result<String, CliError> {
    String::from_utf8(read_input(path, force, inputs)?)
        .map_err(|_| CliError::input(format!("{} is not valid UTF-8", path.display())))
}

fn display_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// `rest14.test.jsonl` -> `rest14.test`.
fn stem_of(path: &Path) -> String {
    let name = display_name(path);
    name.strip_suffix(".jsonl")
        .map(str::to_owned)
        .unwrap_or(name)
}

fn load_samples(
    path: &Path,
    force: bool,
    inputs: &mut Inputs,
) -> Result<(String, Vec<Sample>), CliError> {
    let stem = stem_of(path);
    let split = if stem.ends_with(".test") {
        Split::Test
    } else {
        Split::Train
    };
    let bytes = read_input(path, force, inputs)?;
    let dataset = corpus::read_jsonl(bytes.as_slice(), &stem, split)?;
    if dataset.samples.is_empty() {
        return Err(CliError::input(format!(
            "{} contains no samples",
            path.display()
        )));
    }
    Ok((stem, dataset.samples))
}

fn parse_raw(
    args: &IngestArgs,
    raw: &[u8],
    split: Split,
    path: &Path,
) -> Result<Dataset, CliError> {
    let dataset = match args.format {
        InputFormat::Semeval => {
            let opts = AlignOptions {
                lenient: args.lenient_align,
                language: args.language.clone(),
            };
            corpus::parse_semeval_xml(raw, &args.name, split, &opts)?
        }
        InputFormat::Twitter => {
            let text = std::str::from_utf8(raw)
                .map_err(|_| CliError::input(format!("{} is not valid UTF-8", path.display())))?;
            corpus::parse_twitter(text, &args.name, split)?
        }
        InputFormat::Jsonl => corpus::read_jsonl(raw, &args.name, split)?,
    };
    Ok(dataset)
}

pub fn ingest(args: &IngestArgs, force: bool) -> Result<(), CliError> {
    if args.train.is_none() && args.test.is_none() {
        return Err(CliError::config("give at least one of --train and --test"));
    }
    if let Some(f) = args.dev_fraction {
        if !(f > 0.0 && f < 1.0) {
            return Err(CliError::config(format!(
                "--dev-fraction must lie in (0, 1), got {f}"
            )));
        }
        if args.train.is_none() {
            return Err(CliError::config("--dev-fraction needs --train"));
        }
    }
    let mut inputs = Inputs::new();
    let mut out = OutputSet::new(&args.out)?;
    let mut rows: Vec<(&str, PolarityCounts)> = Vec::new();
    let mut emit =
        |label: &'static str, dataset: &Dataset, out: &mut OutputSet| -> Result<(), CliError> {
            let mut buf = Vec::new();
            corpus::write_jsonl(&mut buf, &dataset.samples)?;
            out.add(format!("{}.{label}.jsonl", args.name), &buf)?;
            rows.push((label, dataset.stats()));
            log::info!("{} {label}: {} samples", args.name, dataset.samples.len());
            Ok(())
        };

    if let Some(path) = &args.train {
        let raw = read_input(path, force, &mut inputs)?;
        let train = parse_raw(args, &raw, Split::Train, path)?;
        match args.dev_fraction {
            Some(f) => {
                let (train, dev) = train.split_dev(f, args.seed)?;
                emit("train", &train, &mut out)?;
                emit("dev", &dev, &mut out)?;
            }
            None => emit("train", &train, &mut out)?,
        }
    }
    if let Some(path) = &args.test {
        let raw = read_input(path, force, &mut inputs)?;
        let test = parse_raw(args, &raw, Split::Test, path)?;
        emit("test", &test, &mut out)?;
    }

    let mut csv = String::from("split,positive,negative,neutral\n");
    for (label, c) in &rows {
        csv.push_str(&format!(
            "{label},{},{},{}\n",
            c.positive, c.negative, c.neutral
        ));
    }
    out.add(format!("{}.stats.csv", args.name), csv.as_bytes())?;
    out.commit(
        &format!("ingest:{}", args.name),
        "ingest",
        &config_value(args),
        inputs,
    )?;
    Ok(())
}

fn encoder_config(
    args: &MatricesArgs,
    samples: &[Sample],
    inputs: &mut Inputs,
    force: bool,
) -> Result<EncoderConfig, CliError> {
    let mut cfg = match &args.encoder_config {
        Some(path) => EncoderConfig::from_json(&read_text(path, force, inputs)?)?,
        None => {
            let mut cfg = EncoderConfig::with_words(samples.iter().flat_map(|s| s.tokens.iter()));
            cfg.num_layers = TOY_LAYERS;
            cfg
        }
    };
    cfg.seed = args.seed;
    Ok(cfg)
}

fn import_subwords(
    args: &MatricesArgs,
    samples: &[Sample],
    force: bool,
    inputs: &mut Inputs,
) -> Result<Vec<ImpactMatrix>, CliError> {
    let (Some(sub_path), Some(align_path)) = (&args.subwords, &args.alignments) else {
        unreachable!("clap enforces both flags together");
    };
    check_fresh(sub_path, force).map(|d| inputs.insert(display_name(sub_path), d))?;
    let align_bytes = read_input(align_path, force, inputs)?;
    let alignments: HashMap<String, _> = read_alignments(BufReader::new(align_bytes.as_slice()))?
        .into_iter()
        .map(|a| (a.id.clone(), a))
        .collect();
    let mut by_id = HashMap::new();
    for m in read_matrices(sub_path)? {
        let m = m?;
        let alignment = alignments
            .get(&m.sample_id)
            .ok_or_else(|| CliError::input(format!("no alignment for sample {}", m.sample_id)))?;
        let word_level = aggregate_subwords(&m, alignment, args.aggregation)?;
        by_id.insert(word_level.sample_id.clone(), word_level);
    }
    samples
        .iter()
        .map(|s| {
            let mut m = by_id
                .remove(&s.id)
                .ok_or_else(|| CliError::input(format!("no subword matrix for sample {}", s.id)))?;
            if m.len() != s.tokens.len() {
                return Err(CliError::input(format!(
                    "sample {}: alignment yields {} words but the sample has {} tokens",
                    s.id,
                    m.len(),
                    s.tokens.len()
                )));
            }
            for (piece, token) in m.words.iter().zip(&s.tokens) {
                if !piece.eq_ignore_ascii_case(token) {
                    log::warn!(
                        "sample {}: subword word {piece:?} differs from token {token:?}",
                        s.id
                    );
                }
            }
            m.words = s.tokens.clone();
            m.layer = args.layer;
            Ok(m)
        })
        .collect()
}

pub fn matrices(args: &MatricesArgs, force: bool) -> Result<(), CliError> {
    let mut inputs = Inputs::new();
    let (stem, samples) = load_samples(&args.samples, force, &mut inputs)?;
    let mut out = OutputSet::new(&args.out)?;

    let mut computed = if args.subwords.is_some() {
        import_subwords(args, &samples, force, &mut inputs)?
    } else {
        let cfg = encoder_config(args, &samples, &mut inputs, force)?;
        let encoder = Encoder::new(cfg)?;
        out.add(
            format!("{stem}.encoder.json"),
            encoder.config().to_json().as_bytes(),
        )?;
        if args.layer > encoder.config().num_layers {
            return Err(CliError::config(format!(
                "layer {} exceeds encoder depth {}",
                args.layer,
                encoder.config().num_layers
            )));
        }
        let source = PerturbedMasking {
            provider: encoder,
            layer: args.layer,
        };
        // Aspects of one sentence share its tokens, hence its matrix.
        let mut distinct: Vec<&Sample> = Vec::new();
        let mut slot: HashMap<&[String], usize> = HashMap::new();
        for s in &samples {
            slot.entry(s.tokens.as_slice()).or_insert_with(|| {
                distinct.push(s);
                distinct.len() - 1
            });
        }
        let unique = distinct
            .par_iter()
            .map(|s| source.matrix_for(&s.id, &s.tokens))
            .collect::<treeprobe::Result<Vec<_>>>()?;
        samples
            .iter()
            .map(|s| ImpactMatrix {
                sample_id: s.id.clone(),
                ..unique[slot[s.tokens.as_slice()]].clone()
            })
            .collect()
    };
    if args.symmetrize {
        computed = computed.iter().map(ImpactMatrix::symmetrized).collect();
    }

    let mut writer = MatrixWriter::new(Vec::new());
    for m in &computed {
        writer.write(m)?;
    }
    out.add(format!("{stem}.matrices.jsonl"), &writer.finish()?)?;
    out.commit(
        &format!("matrices:{stem}"),
        "matrices",
        &config_value(args),
        inputs,
    )?;
    log::info!("wrote {} matrices for {stem}", computed.len());
    Ok(())
}

fn induce(
    samples: &[Sample],
    path: &Path,
    opts: &DecodeOptions,
    source: TreeSource,
    force: bool,
    inputs: &mut Inputs,
) -> Result<Vec<DepTree>, CliError> {
    inputs.insert(display_name(path), check_fresh(path, force)?);
    let matrices = MatrixFileSource::open(path)?;
    let trees = samples
        .par_iter()
        .map(|s| {
            let m = matrices.matrix_for(&s.id, &s.tokens)?;
            Ok(decode::decode(&m, opts)?.with_source(source))
        })
        .collect::<treeprobe::Result<Vec<_>>>()?;
    Ok(trees)
}

pub fn decode(args: &DecodeArgs, force: bool) -> Result<(), CliError> {
    let opts = DecodeOptions {
        decoder: args.decoder,
        scoring: Scoring {
            direction: args.direction,
            minimize: args.minimize,
        },
        root: args.root,
    };
    let run_config = treeprobe::config::RunConfig {
        sources: args.sources.clone(),
        decode: opts,
        ..Default::default()
    };
    run_config.validate()?;

    let mut inputs = Inputs::new();
    let (stem, samples) = load_samples(&args.samples, force, &mut inputs)?;
    let mut out = OutputSet::new(&args.out)?;
    for &source in &args.sources {
        let missing = |flag: &str| CliError::config(format!("source {source} needs {flag}"));
        let trees = match source {
            TreeSource::LeftChain => samples
                .iter()
                .map(|s| decode::left_chain(s.tokens.len()))
                .collect::<treeprobe::Result<Vec<_>>>()?,
            TreeSource::RightChain => samples
                .iter()
                .map(|s| decode::right_chain(s.tokens.len()))
                .collect::<treeprobe::Result<Vec<_>>>()?,
            TreeSource::Induced => {
                let path = args
                    .matrices
                    .as_deref()
                    .ok_or_else(|| missing("--matrices"))?;
                induce(&samples, path, &opts, source, force, &mut inputs)?
            }
            TreeSource::FtInduced => {
                let path = args
                    .ft_matrices
                    .as_deref()
                    .ok_or_else(|| missing("--ft-matrices"))?;
                induce(&samples, path, &opts, source, force, &mut inputs)?
            }
            TreeSource::DepParser => {
                let path = args.conllu.as_deref().ok_or_else(|| missing("--conllu"))?;
                let text = read_text(path, force, &mut inputs)?;
                align_trees(&samples, &text, path)?
                    .into_iter()
                    .map(|t| t.with_source(TreeSource::DepParser))
                    .collect()
            }
        };
        let mut buf = Vec::new();
        decode::write_conllu(
            &mut buf,
            samples
                .iter()
                .zip(&trees)
                .map(|(s, t)| (s.id.as_str(), s.tokens.as_slice(), t)),
        )?;
        out.add(format!("{stem}.{source}.conllu"), &buf)?;
    }
    out.commit(
        &format!("decode:{stem}"),
        "decode",
        &config_value(args),
        inputs,
    )?;
    Ok(())
}

/// Match trees in a CoNLL-U document to samples by `sent_id`.
fn align_trees(samples: &[Sample], text: &str, path: &Path) -> Result<Vec<DepTree>, CliError> {
    let mut by_id = HashMap::new();
    for sentence in decode::import_conllu(text)? {
        let Some(id) = sentence.id else {
            return Err(CliError::input(format!(
                "{}: sentence without sent_id",
                path.display()
            )));
        };
        by_id.insert(id, (sentence.tokens, sentence.tree));
    }
    samples
        .iter()
        .map(|s| {
            // Parsers see sentences, so `fx1` also covers samples `fx1#0`, `fx1#1`.
            let sentence_id = s.id.split_once('#').map_or(s.id.as_str(), |(sid, _)| sid);
            let (tokens, tree) = by_id
                .get(&s.id)
                .or_else(|| by_id.get(sentence_id))
                .cloned()
                .ok_or_else(|| {
                    CliError::input(format!("{}: no tree for sample {}", path.display(), s.id))
                })?;
            if tokens != s.tokens {
                return Err(CliError::input(format!(
                    "{}: tokens of sentence {} do not match the sample",
                    path.display(),
                    s.id
                )));
            }
            Ok(tree)
        })
        .collect()
}

/// Load each tree file; all sentences in a file must share one source.
fn load_tree_sets(
    samples: &[Sample],
    paths: &[std::path::PathBuf],
    force: bool,
    inputs: &mut Inputs,
) -> Result<Vec<(TreeSource, Vec<DepTree>)>, CliError> {
    let mut sets: Vec<(TreeSource, Vec<DepTree>)> = Vec::new();
    for path in paths {
        let text = read_text(path, force, inputs)?;
        let trees = align_trees(samples, &text, path)?;
        let source = trees[0].source();
        if trees.iter().any(|t| t.source() != source) {
            return Err(CliError::input(format!(
                "{} mixes tree sources",
                path.display()
            )));
        }
        if sets.iter().any(|(s, _)| *s == source) {
            return Err(CliError::config(format!(
                "tree source {source} given twice"
            )));
        }
        sets.push((source, trees));
    }
    Ok(sets)
}

pub fn features(args: &FeaturesArgs, force: bool) -> Result<(), CliError> {
    let mut inputs = Inputs::new();
    let (stem, samples) = load_samples(&args.samples, force, &mut inputs)?;
    let sets = load_tree_sets(&samples, &args.trees, force, &mut inputs)?;
    let mut out = OutputSet::new(&args.out)?;
    for (source, trees) in &sets {
        let features = samples
            .par_iter()
            .zip(trees)
            .map(|(s, t)| TreeFeatures::compute(&s.id, t, s.aspect))
            .collect::<treeprobe::Result<Vec<_>>>()?;
        let mut buf = Vec::new();
        write_features(&mut buf, &features)?;
        out.add(format!("{stem}.{source}.features.jsonl"), &buf)?;
    }
    out.commit(
        &format!("features:{stem}"),
        "features",
        &config_value(args),
        inputs,
    )?;
    Ok(())
}

pub fn analyze(args: &AnalyzeArgs, force: bool) -> Result<(), CliError> {
    let mut inputs = Inputs::new();
    let (stem, samples) = load_samples(&args.samples, force, &mut inputs)?;
    let lexicon = match &args.lexicon {
        Some(path) => SentimentLexicon::from_json(&read_text(path, force, &mut inputs)?)?,
        None => SentimentLexicon::default(),
    };
    let pairs: Option<Vec<Vec<OpinionPair>>> = match &args.pairs {
        Some(path) => {
            let bytes = read_input(path, force, &mut inputs)?;
            let mut by_id: HashMap<String, Vec<OpinionPair>> = read_pairs(bytes.as_slice())?
                .into_iter()
                .map(|p| (p.id, p.pairs))
                .collect();
            Some(
                samples
                    .iter()
                    .map(|s| by_id.remove(&s.id).unwrap_or_default())
                    .collect(),
            )
        }
        None => None,
    };
    let sets = load_tree_sets(&samples, &args.trees, force, &mut inputs)?;

    let mut report = MetricsReport {
        pooling: args.pooling,
        ..Default::default()
    };
    for (source, trees) in &sets {
        report.sources.push(MetricsReport::measure(
            *source,
            &samples,
            trees,
            &lexicon,
            pairs.as_deref(),
            args.pooling,
        )?);
    }
    for (i, (a, ta)) in sets.iter().enumerate() {
        for (b, tb) in &sets[i + 1..] {
            report.agreement.push(Agreement {
                a: *a,
                b: *b,
                value: treeprobe::metrics::attachment_agreement(ta, tb)?,
            });
        }
    }

    let mut out = OutputSet::new(&args.out)?;
    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    out.add(format!("{stem}.report.csv"), &csv)?;
    out.add(
        format!("{stem}.report.json"),
        format!("{}\n", report.to_json()).as_bytes(),
    )?;
    out.commit(
        &format!("analyze:{stem}"),
        "analyze",
        &config_value(args),
        inputs,
    )?;
    print!("{report}");
    Ok(())
}
