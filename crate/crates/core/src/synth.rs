//! Synthetic long-video instances with planted evidence spans, baseline
//! samplers, and coverage metrics.
//!
//! A video is split into contiguous scenes. Each scene has a centroid
//! direction and its frames are the centroid plus isotropic Gaussian noise,
//! normalized. Relevance is a per-span peak inside evidence spans and a flat
//! baseline elsewhere, plus clipped Gaussian noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::adaptive::{plan_selection_with, ForceMode, PlanOptions};
use crate::config::SelectionConfig;
use crate::embedding::{dot, EmbeddingSet, RelevanceVector};
use crate::error::{Error, Result};
use crate::selector::SelectOptions;

fn default_baseline() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub n_frames: usize,
    pub dim: usize,
    /// Number of contiguous scenes.
    pub n_segments: usize,
    /// Half-open `[start, end)` frame ranges.
    pub evidence_spans: Vec<(usize, usize)>,
    pub relevance_peak: f64,
    /// Per-span peaks; empty means every span uses `relevance_peak`.
    #[serde(default)]
    pub span_peaks: Vec<f64>,
    #[serde(default = "default_baseline")]
    pub relevance_baseline: f64,
    pub relevance_noise_std: f64,
    pub embedding_noise_std: f64,
    /// Every frame inside a span repeats the span's first frame exactly.
    #[serde(default)]
    pub freeze_spans: bool,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Spec(m));
        if self.n_frames == 0 || self.dim == 0 {
            return bad("n_frames and dim must be positive".into());
        }
        if self.n_segments == 0 || self.n_segments > self.n_frames {
            return bad(format!(
                "n_segments must be in 1..={} (got {})",
                self.n_frames, self.n_segments
            ));
        }
        let mut spans = self.evidence_spans.clone();
        spans.sort_unstable();
        for &(s, e) in &spans {
            if s >= e || e > self.n_frames {
                return bad(format!(
                    "span [{s}, {e}) is empty or exceeds {} frames",
                    self.n_frames
                ));
            }
        }
        if spans.windows(2).any(|w| w[1].0 < w[0].1) {
            return bad("evidence spans overlap".into());
        }
        if !self.span_peaks.is_empty() && self.span_peaks.len() != self.evidence_spans.len() {
            return bad("span_peaks must be empty or one per span".into());
        }
        let peaks = std::iter::once(self.relevance_peak).chain(self.span_peaks.iter().copied());
        for p in peaks {
            if !(p > 0.0 && p <= 1.0) {
                return bad(format!("relevance peak {p} outside (0, 1]"));
            }
            if p <= self.relevance_baseline {
                return bad(format!("peak {p} does not exceed the baseline"));
            }
        }
        if !(0.0..=1.0).contains(&self.relevance_baseline) {
            return bad("relevance_baseline must lie in [0, 1]".into());
        }
        if !(self.relevance_noise_std >= 0.0) || !(self.embedding_noise_std >= 0.0) {
            return bad("noise standard deviations must be >= 0".into());
        }
        Ok(())
    }

    fn peak_of(&self, span: usize) -> f64 {
        self.span_peaks.get(span).copied().unwrap_or(self.relevance_peak)
    }

    pub fn segment_of(&self, frame: usize) -> usize {
        frame * self.n_segments / self.n_frames
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticInstance {
    /// Unit-norm rows.
    pub embeddings: EmbeddingSet,
    pub relevance: RelevanceVector,
    pub spans: Vec<(usize, usize)>,
}

fn gaussian_vec(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn normalize(v: &mut [f64]) -> bool {
    let norm = dot(v, v).sqrt();
    if norm < 1e-12 {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    true
}

/// Orthonormal centroids when they fit in `dim`, random unit ones otherwise.
fn centroids(rng: &mut ChaCha8Rng, count: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(count);
    while out.len() < count {
        let mut v = gaussian_vec(rng, dim);
        if out.len() < dim {
            for c in &out {
                let p = dot(&v, c);
                v.iter_mut().zip(c).for_each(|(x, y)| *x -= p * y);
            }
        }
        if normalize(&mut v) {
            out.push(v);
        }
    }
    out
}

/// Builds an instance; identical specs give identical instances.
pub fn generate_instance(spec: &InstanceSpec) -> Result<SyntheticInstance> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let cents = centroids(&mut rng, spec.n_segments, spec.dim);

    let span_of = |i: usize| spec.evidence_spans.iter().position(|&(s, e)| s <= i && i < e);

    let mut data = Vec::with_capacity(spec.n_frames * spec.dim);
    for i in 0..spec.n_frames {
        let c = &cents[spec.segment_of(i)];
        let noise = gaussian_vec(&mut rng, spec.dim);
        let frozen = spec.freeze_spans
            && span_of(i).is_some_and(|s| spec.evidence_spans[s].0 != i);
        if frozen {
            let first = spec.evidence_spans[span_of(i).unwrap()].0;
            let start = first * spec.dim;
            let copy = data[start..start + spec.dim].to_vec();
            data.extend(copy);
            continue;
        }
        let mut v: Vec<f64> = c
            .iter()
            .zip(&noise)
            .map(|(a, z)| a + spec.embedding_noise_std * z)
            .collect();
        if !normalize(&mut v) {
            v = c.clone();
        }
        data.extend(v);
    }
    let embeddings = EmbeddingSet::new(spec.n_frames, spec.dim, data)?;

    let scores = (0..spec.n_frames)
        .map(|i| {
            let base = span_of(i).map_or(spec.relevance_baseline, |s| spec.peak_of(s));
            let z: f64 = rng.sample(StandardNormal);
            (base + spec.relevance_noise_std * z).clamp(0.0, 1.0)
        })
        .collect();

    Ok(SyntheticInstance {
        embeddings,
        relevance: RelevanceVector::new(scores)?,
        spans: spec.evidence_spans.clone(),
    })
}

/// Evenly spaced bin centres `floor((j + 0.5)·n / k)`.
pub fn baseline_uniform(n: usize, k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > n {
        return Err(Error::config(format!("uniform sampling needs 1 <= k <= n (k={k}, n={n})")));
    }
    Ok((0..k).map(|j| (2 * j + 1) * n / (2 * k)).collect())
}

/// The `k` highest scores, ties to the lower index, returned ascending.
pub fn baseline_topk(r: &RelevanceVector, k: usize) -> Result<Vec<usize>> {
    let s = r.as_slice();
    if k > s.len() {
        return Err(Error::config(format!("top-k needs k <= {} (got {k})", s.len())));
    }
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
    order.truncate(k);
    order.sort_unstable();
    Ok(order)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchMetrics {
    /// Fraction of spans with at least one selected frame.
    pub span_recall: f64,
    /// Selected frames inside any span.
    pub hits_in_spans: usize,
    /// Mean cosine over distinct selected pairs; 0 with fewer than two frames.
    pub mean_pairwise_cosine: f64,
}

pub fn evaluate(selected: &[usize], spans: &[(usize, usize)], e: &EmbeddingSet) -> BenchMetrics {
    let inside = |i: usize, &(s, t): &(usize, usize)| s <= i && i < t;
    let covered = spans
        .iter()
        .filter(|sp| selected.iter().any(|&i| inside(i, sp)))
        .count();
    let span_recall = if spans.is_empty() {
        1.0
    } else {
        covered as f64 / spans.len() as f64
    };
    let hits_in_spans = selected
        .iter()
        .filter(|&&i| spans.iter().any(|sp| inside(i, sp)))
        .count();

    let mut total = 0.0;
    let mut pairs = 0usize;
    for (a, &i) in selected.iter().enumerate() {
        for &j in &selected[a + 1..] {
            let (u, v) = (e.row(i), e.row(j));
            total += dot(u, v) / (dot(u, u).sqrt() * dot(v, v).sqrt());
            pairs += 1;
        }
    }
    BenchMetrics {
        span_recall,
        hits_in_spans,
        mean_pairwise_cosine: if pairs == 0 { 0.0 } else { total / pairs as f64 },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Uniform,
    TopK,
    /// The full adaptive pipeline.
    RdMv,
    /// Relevance + diversity path with `λ = 0`.
    RdMvLambdaZero,
    DiversityOnly,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Uniform,
        Strategy::TopK,
        Strategy::RdMv,
        Strategy::RdMvLambdaZero,
        Strategy::DiversityOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Uniform => "uniform",
            Strategy::TopK => "top_k",
            Strategy::RdMv => "rd_mv",
            Strategy::RdMvLambdaZero => "rd_mv_lambda0",
            Strategy::DiversityOnly => "diversity_only",
        }
    }

    pub fn select(self, inst: &SyntheticInstance, cfg: &SelectionConfig) -> Result<Vec<usize>> {
        let n = inst.embeddings.count();
        let k = cfg.k.min(n);
        let plan = |opts: PlanOptions| {
            plan_selection_with(&inst.embeddings, &inst.relevance, cfg, &opts).map(|(_, r)| r.indices)
        };
        match self {
            Strategy::Uniform => baseline_uniform(n, k),
            Strategy::TopK => baseline_topk(&inst.relevance, k),
            Strategy::RdMv => plan(PlanOptions::default()),
            Strategy::RdMvLambdaZero => plan(PlanOptions {
                force: ForceMode::RelevanceDiversity,
                lambda_override: Some(0.0),
                select: SelectOptions::default(),
            }),
            Strategy::DiversityOnly => plan(PlanOptions {
                force: ForceMode::DiversityOnly,
                ..Default::default()
            }),
        }
    }
}

/// One named benchmark case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchCase {
    pub name: String,
    pub k: usize,
    pub instance: InstanceSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSpec {
    pub cases: Vec<BenchCase>,
    #[serde(default)]
    pub config: Option<SelectionConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Population mean and standard deviation.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len().max(1) as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Self {
            mean,
            std: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub case: String,
    pub strategy: Strategy,
    pub seeds: usize,
    pub span_recall: MeanStd,
    pub hits_in_spans: MeanStd,
    pub mean_pairwise_cosine: MeanStd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<StrategySummary>,
}

impl BenchReport {
    pub fn row(&self, case: &str, strategy: Strategy) -> Option<&StrategySummary> {
        self.rows.iter().find(|r| r.case == case && r.strategy == strategy)
    }

    /// Comma-separated table, one row per (case, strategy).
    pub fn to_csv(&self) -> String {
        use crate::io::format_sig9 as f;
        let mut out = String::from(
            "case,strategy,seeds,span_recall_mean,span_recall_std,hits_mean,hits_std,cosine_mean,cosine_std\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.case,
                r.strategy.name(),
                r.seeds,
                f(r.span_recall.mean),
                f(r.span_recall.std),
                f(r.hits_in_spans.mean),
                f(r.hits_in_spans.std),
                f(r.mean_pairwise_cosine.mean),
                f(r.mean_pairwise_cosine.std),
            ));
        }
        out
    }
}

/// Per-seed metrics of one case, seed `s` drawing from `instance.seed + s`.
pub fn run_case(
    case: &BenchCase,
    strategies: &[Strategy],
    seeds: u64,
    base: &SelectionConfig,
) -> Result<Vec<Vec<BenchMetrics>>> {
    let cfg = base.with_k(case.k);
    let one_seed = |s: u64| -> Result<Vec<BenchMetrics>> {
        let spec = InstanceSpec {
            seed: case.instance.seed.wrapping_add(s),
            ..case.instance.clone()
        };
        let inst = generate_instance(&spec)?;
        strategies
            .iter()
            .map(|st| Ok(evaluate(&st.select(&inst, &cfg)?, &inst.spans, &inst.embeddings)))
            .collect()
    };

    #[cfg(feature = "parallel")]
    let per_seed: Result<Vec<_>> = {
        use rayon::prelude::*;
        (0..seeds).into_par_iter().map(one_seed).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let per_seed: Result<Vec<_>> = (0..seeds).map(one_seed).collect();

    per_seed
}

/// Mean ± std of every metric per (case, strategy) across seeds.
pub fn run_benchmark(spec: &BenchSpec, strategies: &[Strategy], seeds: u64) -> Result<BenchReport> {
    if seeds == 0 {
        return Err(Error::config("need at least one seed"));
    }
    let base = spec.config.unwrap_or_default();
    let mut rows = Vec::new();
    for case in &spec.cases {
        let per_seed = run_case(case, strategies, seeds, &base)?;
        for (si, &strategy) in strategies.iter().enumerate() {
            let col = |f: fn(&BenchMetrics) -> f64| -> Vec<f64> {
                per_seed.iter().map(|m| f(&m[si])).collect()
            };
            rows.push(StrategySummary {
                case: case.name.clone(),
                strategy,
                seeds: per_seed.len(),
                span_recall: MeanStd::of(&col(|m| m.span_recall)),
                hits_in_spans: MeanStd::of(&col(|m| m.hits_in_spans as f64)),
                mean_pairwise_cosine: MeanStd::of(&col(|m| m.mean_pairwise_cosine)),
            });
        }
    }
    Ok(BenchReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> InstanceSpec {
        InstanceSpec {
            n_frames: 40,
            dim: 8,
            n_segments: 4,
            evidence_spans: vec![(10, 20)],
            relevance_peak: 0.9,
            span_peaks: vec![],
            relevance_baseline: 0.1,
            relevance_noise_std: 0.0,
            embedding_noise_std: 0.0,
            freeze_spans: false,
            seed: 3,
        }
    }

    #[test]
    fn zero_noise_scores_are_exact() {
        let inst = generate_instance(&spec()).unwrap();
        for (i, &s) in inst.relevance.as_slice().iter().enumerate() {
            let want = if (10..20).contains(&i) { 0.9 } else { 0.1 };
            assert_eq!(s, want, "frame {i}");
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let s = InstanceSpec {
            relevance_noise_std: 0.1,
            embedding_noise_std: 0.2,
            ..spec()
        };
        assert_eq!(generate_instance(&s).unwrap(), generate_instance(&s).unwrap());
        let other = InstanceSpec { seed: 4, ..s.clone() };
        assert_ne!(generate_instance(&s).unwrap(), generate_instance(&other).unwrap());
    }

    #[test]
    fn orthogonal_segments() {
        let s = InstanceSpec { n_frames: 10, n_segments: 2, evidence_spans: vec![], ..spec() };
        let inst = generate_instance(&s).unwrap();
        let e = &inst.embeddings;
        assert!(e.similarity(0, 9).abs() < 1e-12);
        assert!((e.similarity(0, 4) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn freeze_spans_duplicates_frames() {
        let s = InstanceSpec { embedding_noise_std: 0.3, freeze_spans: true, ..spec() };
        let inst = generate_instance(&s).unwrap();
        assert_eq!(inst.embeddings.row(10), inst.embeddings.row(19));
        assert_ne!(inst.embeddings.row(9), inst.embeddings.row(10));
    }

    #[test]
    fn infeasible_specs() {
        assert!(matches!(
            generate_instance(&InstanceSpec { evidence_spans: vec![(30, 50)], ..spec() }),
            Err(Error::Spec(_))
        ));
        assert!(generate_instance(&InstanceSpec {
            evidence_spans: vec![(0, 10), (5, 15)],
            ..spec()
        })
        .is_err());
        assert!(generate_instance(&InstanceSpec { relevance_peak: 0.05, ..spec() }).is_err());
    }

    #[test]
    fn uniform_examples() {
        assert_eq!(baseline_uniform(10, 2).unwrap(), vec![2, 7]);
        assert_eq!(baseline_uniform(5, 5).unwrap(), vec![0, 1, 2, 3, 4]);
        assert_eq!(baseline_uniform(100, 4).unwrap(), vec![12, 37, 62, 87]);
        assert!(baseline_uniform(3, 4).is_err());
    }

    #[test]
    fn topk_examples() {
        let r = |v: &[f64]| RelevanceVector::new(v.to_vec()).unwrap();
        assert_eq!(baseline_topk(&r(&[0.9, 0.9, 0.1]), 1).unwrap(), vec![0]);
        assert_eq!(baseline_topk(&r(&[0.2, 0.9, 0.1]), 3).unwrap(), vec![0, 1, 2]);
        assert_eq!(baseline_topk(&r(&[0.9, 0.8, 0.7, 0.1]), 3).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn metric_examples() {
        let e = EmbeddingSet::from_rows(&[[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let m = evaluate(&[0, 1], &[(0, 2)], &e);
        assert_eq!((m.span_recall, m.hits_in_spans), (1.0, 2));
        assert_eq!(m.mean_pairwise_cosine, 1.0);
        let m = evaluate(&[2], &[(0, 2)], &e);
        assert_eq!(m.span_recall, 0.0);
        assert_eq!(m.mean_pairwise_cosine, 0.0);
    }

    #[test]
    fn single_span_zero_noise_full_recall() {
        let case = BenchCase { name: "single".into(), k: 4, instance: spec() };
        let report = run_benchmark(
            &BenchSpec { cases: vec![case], config: None },
            &[Strategy::TopK, Strategy::RdMv],
            3,
        )
        .unwrap();
        assert_eq!(report.row("single", Strategy::TopK).unwrap().span_recall.mean, 1.0);
        assert_eq!(report.row("single", Strategy::RdMv).unwrap().span_recall.mean, 1.0);
        assert!(report.to_csv().lines().count() == 3);
    }
}
