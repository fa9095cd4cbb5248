#![allow(dead_code)]

use std::path::PathBuf;

use keyframe_select::{normalize_embeddings, EmbeddingSet, RelevanceVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Fixed default seed for randomized suites; override with `KFS_TEST_SEED`.
pub fn base_seed() -> u64 {
    std::env::var("KFS_TEST_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0x5eed_2024)
}

pub fn rng(stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(base_seed() ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// `n` Gaussian rows of dimension `d`, normalized.
pub fn unit_rows(rng: &mut ChaCha8Rng, n: usize, d: usize) -> EmbeddingSet {
    let data: Vec<f64> = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();
    normalize_embeddings(&EmbeddingSet::new(n, d, data).unwrap()).unwrap()
}

pub fn uniform_scores(rng: &mut ChaCha8Rng, n: usize) -> RelevanceVector {
    RelevanceVector::new((0..n).map(|_| rng.random::<f64>()).collect()).unwrap()
}

/// Random distinct indices from `0..n`.
pub fn distinct(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    for i in 0..count {
        let j = rng.random_range(i..n);
        all.swap(i, j);
    }
    all.truncate(count);
    all
}

/// CLI invocations with a checked-in expected output under `fixtures/golden`.
pub fn golden_cases() -> Vec<(&'static str, Vec<String>)> {
    let f = |name: &str| fixture(name).display().to_string();
    let case = |name: &'static str, rest: &[&str]| {
        let mut args: Vec<String> = vec!["keyframe-select".into(), "--zero-duration".into()];
        args.extend(rest.iter().map(|s| {
            if [".rdmv", ".txt", ".json"].iter().any(|ext| s.ends_with(ext)) {
                f(s)
            } else {
                s.to_string()
            }
        }));
        (name, args)
    };
    vec![
        case("small_k2", &["--embeddings", "small.rdmv", "--scores", "small_scores.txt", "--k", "2"]),
        case(
            "small_k3_trace",
            &["--embeddings", "small.rdmv", "--scores", "small_scores.txt", "--k", "3", "--trace"],
        ),
        case("medium_k8", &["--embeddings", "medium.rdmv", "--scores", "medium_scores.json", "--k", "8"]),
        case("medium_gated_k6", &["--embeddings", "medium.rdmv", "--scores", "low_scores.txt", "--k", "6"]),
        case("medium_diversity_k6", &["--embeddings", "medium.rdmv", "--force-mode", "diversity", "--k", "6"]),
        case(
            "medium_fixed_lambda_k12",
            &["--embeddings", "medium.rdmv", "--scores", "medium_scores.json", "--k", "12", "--lambda", "0.25"],
        ),
    ]
}

pub fn golden_path(name: &str) -> PathBuf {
    fixture("golden").join(format!("{name}.json"))
}

/// Runs the CLI in process; returns (exit code, stdout, stderr).
pub fn run(args: &[String]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = keyframe_select::cli::run_cli_with(args, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}
