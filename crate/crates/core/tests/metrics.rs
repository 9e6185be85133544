mod common;

use common::{floyd_warshall, manual_sample_asd, random_aspect, random_heads, random_tree, rng};
use rand::RngExt;
use treeprobe::corpus::AspectSpan;
use treeprobe::decode::{left_chain, right_chain};
use treeprobe::metrics::{
    asd, attachment_agreement, neighboring_proportion, pasd, OpinionPair, Pooling,
};
use treeprobe::treefeat::{proximity, reshape_aspect_oriented, ReshapedTree};
use treeprobe::{DepTree, Polarity, Sample, SentimentLexicon, TreeSource};

fn sample(id: &str, tokens: &[&str], aspect: (usize, usize)) -> Sample {
    Sample {
        id: id.into(),
        tokens: tokens.iter().map(|t| t.to_string()).collect(),
        aspect: AspectSpan::new(aspect.0, aspect.1),
        polarity: Polarity::Positive,
        language: "en".into(),
    }
}

fn tree(heads: &[Option<usize>]) -> DepTree {
    DepTree::new(heads.to_vec(), TreeSource::DepParser).unwrap()
}

/// Three scored samples plus one without lexicon words.
fn hand_fixture() -> (Vec<Sample>, Vec<DepTree>) {
    let samples = vec![
        sample("a", &["the", "food", "is", "great"], (1, 2)),
        sample("b", &["bad", "service", "but", "good", "wine"], (1, 2)),
        sample("c", &["wine", "list", "too", "long"], (0, 2)),
        sample("d", &["the", "menu"], (1, 2)),
    ];
    let trees = vec![
        tree(&[Some(1), Some(2), None, Some(2)]),
        tree(&[Some(1), None, Some(3), Some(4), Some(1)]),
        tree(&[Some(1), None, Some(3), Some(1)]),
        tree(&[Some(1), None]),
    ];
    (samples, trees)
}

#[test]
fn asd_matches_hand_computation() {
    let (samples, trees) = hand_fixture();
    // a: food-is-great = 2
    // b: service-bad = 1, service-wine-good = 2, mean 1.5
    // c: wine..too 3, wine..long 2, list..too 2, list..long 1, mean 2
    let expected = (2.0 + 1.5 + 2.0) / 3.0;
    let summary = asd(&samples, &trees, &SentimentLexicon::default()).unwrap();
    assert_eq!(summary.coverage, 3);
    assert!((summary.value.unwrap() - expected).abs() < 1e-12);
}

#[test]
fn pasd_matches_hand_computation() {
    let (samples, trees) = hand_fixture();
    let pair = |s, e, o| OpinionPair {
        aspect: AspectSpan::new(s, e),
        opinion: o,
    };
    let pairs = vec![
        vec![],
        vec![pair(1, 2, 0), pair(1, 2, 3)],
        vec![pair(0, 2, 2), pair(0, 2, 3)],
        vec![],
    ];
    // b: (1 + 2) / 2 = 1.5; c: ((3+2)/2 + (2+1)/2) / 2 = 2
    let summary = pasd(&samples, &trees, &pairs).unwrap();
    assert_eq!(summary.coverage, 2);
    assert!((summary.value.unwrap() - 1.75).abs() < 1e-12);
}

#[test]
fn pasd_equals_asd_when_pairs_are_the_lexicon_matches() {
    let (samples, trees) = hand_fixture();
    let lex = SentimentLexicon::default();
    // Single-word aspects make the two normalizations coincide.
    let keep = [0, 1];
    let samples: Vec<_> = keep.iter().map(|&k| samples[k].clone()).collect();
    let trees: Vec<_> = keep.iter().map(|&k| trees[k].clone()).collect();
    let pairs: Vec<Vec<OpinionPair>> = samples
        .iter()
        .map(|s| {
            lex.matches(&s.tokens)
                .into_iter()
                .map(|o| OpinionPair {
                    aspect: s.aspect,
                    opinion: o,
                })
                .collect()
        })
        .collect();
    let a = asd(&samples, &trees, &lex).unwrap().value.unwrap();
    let p = pasd(&samples, &trees, &pairs).unwrap().value.unwrap();
    assert!((a - p).abs() < 1e-12);
}

fn random_corpus(r: &mut common::Rng) -> Vec<Sample> {
    let vocab = [
        "great", "food", "bad", "the", "wait", "too", "long", "staff", "nice", "was",
    ];
    let count = r.random_range(1..8);
    (0..count)
        .map(|k| {
            let n = r.random_range(1..15);
            let tokens: Vec<&str> = (0..n)
                .map(|_| vocab[r.random_range(0..vocab.len())])
                .collect();
            let a = random_aspect(r, n);
            sample(&format!("s{k}"), &tokens, (a.start, a.end))
        })
        .collect()
}

#[test]
fn chains_agree_on_asd_over_random_corpora() {
    let lex = SentimentLexicon::default();
    let mut r = rng(23);
    for _ in 0..100 {
        let samples = random_corpus(&mut r);
        let left: Vec<_> = samples
            .iter()
            .map(|s| left_chain(s.tokens.len()).unwrap())
            .collect();
        let right: Vec<_> = samples
            .iter()
            .map(|s| right_chain(s.tokens.len()).unwrap())
            .collect();
        assert_eq!(
            asd(&samples, &left, &lex).unwrap(),
            asd(&samples, &right, &lex).unwrap()
        );
    }
}

#[test]
fn asd_matches_all_pairs_oracle_on_random_trees() {
    let lex = SentimentLexicon::default();
    let mut r = rng(29);
    for _ in 0..100 {
        let samples = random_corpus(&mut r);
        let trees: Vec<_> = samples
            .iter()
            .map(|s| random_tree(&mut r, s.tokens.len()))
            .collect();
        let per: Vec<f64> = samples
            .iter()
            .zip(&trees)
            .filter_map(|(s, t)| manual_sample_asd(t.heads(), s.aspect, &lex.matches(&s.tokens)))
            .collect();
        let summary = asd(&samples, &trees, &lex).unwrap();
        assert_eq!(summary.coverage, per.len());
        match summary.value {
            None => assert!(per.is_empty()),
            Some(v) => assert!((v - per.iter().sum::<f64>() / per.len() as f64).abs() < 1e-12),
        }
    }
}

#[test]
fn asd_ignores_edge_direction() {
    // Re-rooting a tree flips directions along one path but keeps edges.
    let (samples, _) = hand_fixture();
    let a = vec![tree(&[Some(1), Some(2), None, Some(2)])];
    let b = vec![tree(&[Some(1), None, Some(1), Some(2)])];
    let lex = SentimentLexicon::default();
    assert_eq!(
        asd(&samples[..1], &a, &lex).unwrap(),
        asd(&samples[..1], &b, &lex).unwrap()
    );
}

#[test]
fn chains_are_fully_neighboring() {
    let mut r = rng(31);
    let trees: Vec<DepTree> = (0..50)
        .flat_map(|_| {
            let n = r.random_range(1..30);
            [left_chain(n).unwrap(), right_chain(n).unwrap()]
        })
        .collect();
    for pooling in [Pooling::Pooled, Pooling::PerSentence] {
        assert_eq!(neighboring_proportion(&trees, pooling).unwrap(), 1.0);
    }
}

#[test]
fn star_against_chain_agreement() {
    // Star rooted at 1: word 0 keeps neighbor set {1} as in the chain; the
    // others differ.
    let star = vec![tree(&[Some(1), None, Some(1), Some(1)])];
    let chain = vec![right_chain(4).unwrap()];
    assert_eq!(attachment_agreement(&star, &chain).unwrap(), 0.25);
    assert_eq!(attachment_agreement(&chain, &chain).unwrap(), 1.0);
}

#[test]
fn proximity_matches_floyd_warshall() {
    let mut r = rng(37);
    for _ in 0..300 {
        let n = r.random_range(1..=8);
        let heads = random_heads(&mut r, n);
        let t = tree(&heads);
        let aspect = random_aspect(&mut r, n);
        let d = floyd_warshall(&heads);
        let expected: Vec<usize> = (0..n)
            .map(|i| aspect.range().map(|a| d[i][a]).min().unwrap())
            .collect();
        assert_eq!(proximity(&t, aspect).unwrap(), expected);
    }
}

#[test]
fn reshaped_tags_encode_proximity() {
    let mut r = rng(41);
    for k in 0..200 {
        let n = r.random_range(1..=12);
        let heads = random_heads(&mut r, n);
        // Mix labelled parser trees and unlabelled induced trees.
        let t = if k % 2 == 0 {
            let rels = (0..n).map(|i| format!("rel{i}")).collect();
            tree(&heads).with_relations(rels).unwrap()
        } else {
            DepTree::new(heads, TreeSource::Induced).unwrap()
        };
        let aspect = random_aspect(&mut r, n);
        let prox = proximity(&t, aspect).unwrap();
        let reshaped = reshape_aspect_oriented(&t, aspect).unwrap();
        for (i, &want) in prox.iter().enumerate() {
            if aspect.contains(i) {
                assert_eq!(reshaped.heads[i], None);
                continue;
            }
            assert_eq!(
                ReshapedTree::tag_distance(&reshaped.tags[i]),
                want,
                "fixture {k} word {i}"
            );
            assert!(aspect.contains(reshaped.heads[i].unwrap()));
        }
    }
}
