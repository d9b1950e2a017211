//! Weight-informed sampling distribution, momentum, and projection masks.
//!
//! For experiment `s` a single scalar `p_s ~ U(0, 1)` is drawn and the
//! coordinates are scored with a softmax over `p_s·|w_j|` (or `-p_s·w_j` in
//! [`ScoreMode::PaperLiteral`]). The result is blended with the previous
//! step's distribution, then a binary mask is selected from it.
//!
//! Each experiment owns the random sub-stream `(fork, s)` where `fork` is one
//! `u64` drawn from the caller's generator, so a batch of experiments gives the
//! same masks whatever order they are evaluated in.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::{ceil_count, ensure_finite, softmax_in_place, Rng};

/// How weights are turned into sampling scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoreMode {
    /// softmax(p_s·|w_j|): larger magnitudes are more likely to be picked.
    #[default]
    MagnitudeIncreasing,
    /// softmax(-p_s·w_j), the exponent sign as originally written.
    PaperLiteral,
}

/// How a mask is cut from a probability vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionMode {
    /// The `ceil(s_p·N)` most probable coordinates, ties to the lower index.
    TopK,
    /// `ceil(s_p·N)` coordinates drawn without replacement, each draw
    /// proportional to the distribution.
    #[default]
    Sampled,
    /// Coordinates with probability above `T / N`.
    ProbabilityThreshold,
    /// Ignores the weights: coordinate `j` is kept iff an independent
    /// uniform draw exceeds `T`.
    UniformThreshold,
}

impl ScoreMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ScoreMode::MagnitudeIncreasing => "magnitude",
            ScoreMode::PaperLiteral => "literal",
        }
    }
}

impl SelectionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SelectionMode::TopK => "top-k",
            SelectionMode::Sampled => "sampled",
            SelectionMode::ProbabilityThreshold => "probability-threshold",
            SelectionMode::UniformThreshold => "uniform-threshold",
        }
    }
}

impl fmt::Display for ScoreMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for SelectionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScoreMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "magnitude" | "magnitude-increasing" => Ok(ScoreMode::MagnitudeIncreasing),
            "literal" | "paper-literal" => Ok(ScoreMode::PaperLiteral),
            other => Err(Error::InvalidConfig(format!(
                "unknown score mode `{other}`"
            ))),
        }
    }
}

impl FromStr for SelectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "top-k" | "topk" => Ok(SelectionMode::TopK),
            "sampled" => Ok(SelectionMode::Sampled),
            "probability-threshold" => Ok(SelectionMode::ProbabilityThreshold),
            "uniform-threshold" => Ok(SelectionMode::UniformThreshold),
            other => Err(Error::InvalidConfig(format!(
                "unknown selection mode `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    /// Sampling density `s_p` in (0, 1]: target fraction of kept coordinates.
    pub density: f64,
    /// Number of experiments `S` per penalty evaluation.
    pub experiments: usize,
    /// Threshold `T` in [0, 1).
    pub threshold: f64,
    /// Momentum coefficient in [0, 1]; 1 ignores the previous distribution.
    pub alpha: f64,
    pub score_mode: ScoreMode,
    pub selection: SelectionMode,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            density: 0.01,
            experiments: 10,
            threshold: 0.5,
            alpha: 0.9,
            score_mode: ScoreMode::MagnitudeIncreasing,
            selection: SelectionMode::Sampled,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "sampling density must be in (0, 1], got {}",
                self.density
            )));
        }
        if self.experiments == 0 {
            return Err(Error::InvalidConfig(
                "number of experiments must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.threshold) {
            return Err(Error::InvalidConfig(format!(
                "threshold must be in [0, 1), got {}",
                self.threshold
            )));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidConfig(format!(
                "momentum must be in [0, 1], got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    /// Mask size used by the fixed-size selection modes.
    pub fn selected_per_mask(&self, len: usize) -> usize {
        ceil_count(self.density, len)
    }
}

/// The previous step's distribution, blended in by [`apply_momentum`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SamplerState {
    prev: Option<Vec<f64>>,
}

impl SamplerState {
    pub fn new() -> Self {
        SamplerState::default()
    }

    pub fn is_initialized(&self) -> bool {
        self.prev.is_some()
    }

    pub fn prev_distribution(&self) -> Option<&[f64]> {
        self.prev.as_deref()
    }

    /// Replaces the retained distribution. Called once per optimizer step.
    pub fn commit(&mut self, distribution: Vec<f64>) -> Result<()> {
        check_probability_vector(&distribution)?;
        self.prev = Some(distribution);
        Ok(())
    }
}

fn check_probability_vector(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::EmptyVector);
    }
    ensure_finite(p)?;
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 || p.iter().any(|v| *v < 0.0) {
        return Err(Error::InvalidConfig(format!(
            "not a probability vector (sum {total})"
        )));
    }
    Ok(())
}

/// Binary selection vector for one experiment, stored as sorted indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectionMask {
    len: usize,
    selected: Vec<usize>,
}

impl ProjectionMask {
    /// `selected` must be strictly increasing and below `len`.
    pub fn from_sorted_indices(len: usize, selected: Vec<usize>) -> Result<Self> {
        let ordered = selected.windows(2).all(|w| w[0] < w[1]);
        if !ordered || selected.last().is_some_and(|&j| j >= len) {
            return Err(Error::InvalidConfig(format!(
                "mask indices must be strictly increasing and below {len}"
            )));
        }
        Ok(ProjectionMask { len, selected })
    }

    pub fn from_indicators(indicators: &[bool]) -> Self {
        ProjectionMask {
            len: indicators.len(),
            selected: indicators
                .iter()
                .enumerate()
                .filter_map(|(j, &on)| on.then_some(j))
                .collect(),
        }
    }

    pub fn full(len: usize) -> Self {
        ProjectionMask {
            len,
            selected: (0..len).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn selected_count(&self) -> usize {
        self.selected.len()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.selected.binary_search(&j).is_ok()
    }

    pub fn indicators(&self) -> Vec<bool> {
        let mut out = vec![false; self.len];
        for &j in &self.selected {
            out[j] = true;
        }
        out
    }

    /// `||w ⊙ I||₂²`
    pub fn projected_sq_norm(&self, w: &[f64]) -> f64 {
        self.selected.iter().map(|&j| w[j] * w[j]).sum()
    }
}

/// How many times each coordinate was selected across a set of masks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexCounter {
    counts: Vec<usize>,
}

impl IndexCounter {
    pub fn new(len: usize) -> Self {
        IndexCounter {
            counts: vec![0; len],
        }
    }

    pub fn from_masks(len: usize, masks: &[ProjectionMask]) -> Result<Self> {
        let mut counter = IndexCounter::new(len);
        for mask in masks {
            counter.add(mask)?;
        }
        Ok(counter)
    }

    pub fn add(&mut self, mask: &ProjectionMask) -> Result<()> {
        if mask.len() != self.counts.len() {
            return Err(Error::LengthMismatch {
                expected: self.counts.len(),
                found: mask.len(),
            });
        }
        for &j in mask.selected() {
            self.counts[j] += 1;
        }
        Ok(())
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// L∞ norm of the counter.
    pub fn max(&self) -> usize {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Sampling probability of every coordinate for one experiment.
pub fn score_distribution(w: &[f64], p_s: f64, mode: ScoreMode) -> Result<Vec<f64>> {
    let mut scores: Vec<f64> = match mode {
        ScoreMode::MagnitudeIncreasing => w.iter().map(|v| p_s * v.abs()).collect(),
        ScoreMode::PaperLiteral => w.iter().map(|v| -p_s * v).collect(),
    };
    softmax_in_place(&mut scores)?;
    Ok(scores)
}

/// `alpha·current + (1 - alpha)·previous`, with a uniform previous
/// distribution when the state has not been committed yet.
pub fn apply_momentum(current: &[f64], state: &SamplerState, alpha: f64) -> Result<Vec<f64>> {
    let n = current.len();
    match state.prev_distribution() {
        Some(prev) => {
            if prev.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: prev.len(),
                });
            }
            Ok(current
                .iter()
                .zip(prev)
                .map(|(c, p)| alpha * c + (1.0 - alpha) * p)
                .collect())
        }
        None => {
            let uniform = 1.0 / n as f64;
            Ok(current
                .iter()
                .map(|c| alpha * c + (1.0 - alpha) * uniform)
                .collect())
        }
    }
}

/// Masks and bookkeeping from one call to [`draw_masks`].
#[derive(Debug, Clone)]
pub struct MaskDraw {
    pub masks: Vec<ProjectionMask>,
    pub counter: IndexCounter,
    /// Mean of the per-experiment (momentum-adjusted) distributions; what the
    /// caller commits to the sampler state after the step. `None` in
    /// uniform-threshold mode, which never builds a distribution.
    pub distribution: Option<Vec<f64>>,
}

/// One experiment on its own stream. Returns the mask and the distribution it
/// was cut from (if any).
pub fn draw_one(
    w: &[f64],
    cfg: &SamplerConfig,
    state: Option<&SamplerState>,
    rng: &mut Rng,
) -> Result<(ProjectionMask, Option<Vec<f64>>)> {
    let n = w.len();
    let p_s = rng.uniform();
    if cfg.selection == SelectionMode::UniformThreshold {
        let selected = (0..n).filter(|_| rng.uniform() > cfg.threshold).collect();
        return Ok((ProjectionMask { len: n, selected }, None));
    }

    let mut dist = score_distribution(w, p_s, cfg.score_mode)?;
    if let Some(state) = state {
        dist = apply_momentum(&dist, state, cfg.alpha)?;
    }

    let selected = match cfg.selection {
        SelectionMode::TopK => {
            let k = fixed_size(cfg, n)?;
            top_k(&dist, k)
        }
        SelectionMode::Sampled => {
            let k = fixed_size(cfg, n)?;
            weighted_without_replacement(&dist, k, rng)
        }
        SelectionMode::ProbabilityThreshold => {
            let cut = cfg.threshold / n as f64;
            dist.iter()
                .enumerate()
                .filter_map(|(j, &p)| (p > cut).then_some(j))
                .collect()
        }
        SelectionMode::UniformThreshold => unreachable!(),
    };
    Ok((ProjectionMask { len: n, selected }, Some(dist)))
}

fn fixed_size(cfg: &SamplerConfig, n: usize) -> Result<usize> {
    let k = cfg.selected_per_mask(n);
    if k > n {
        return Err(Error::DensityExceedsLength {
            selected: k,
            len: n,
        });
    }
    Ok(k)
}

/// Heap entry ordered so that the heap's maximum is the weakest kept
/// candidate: lowest score, and among equal scores the highest index.
struct Kept {
    score: f64,
    index: usize,
}

impl PartialEq for Kept {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Kept {}

impl PartialOrd for Kept {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Kept {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .score
            .total_cmp(&self.score)
            .then(self.index.cmp(&other.index))
    }
}

/// Indices of the `k` largest scores, ties to the lower index, ascending.
fn top_k(scores: &[f64], k: usize) -> Vec<usize> {
    if k == 0 {
        return Vec::new();
    }
    let mut out: Vec<usize> = if k >= scores.len() {
        (0..scores.len()).collect()
    } else if k * 8 < scores.len() {
        // One pass with a bounded heap; later indices only displace on a
        // strictly larger score, which keeps the lower-index tie rule.
        let mut heap: BinaryHeap<Kept> = (0..k)
            .map(|index| Kept {
                score: scores[index],
                index,
            })
            .collect();
        for (index, &score) in scores.iter().enumerate().skip(k) {
            let mut weakest = heap.peek_mut().expect("k > 0");
            if score.total_cmp(&weakest.score) == Ordering::Greater {
                *weakest = Kept { score, index };
            }
        }
        heap.into_iter().map(|kept| kept.index).collect()
    } else {
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.select_nth_unstable_by(k - 1, |&a, &b| {
            scores[b].total_cmp(&scores[a]).then(a.cmp(&b))
        });
        order.truncate(k);
        order
    };
    out.sort_unstable();
    out
}

/// Weighted draw of `k` distinct indices without replacement
/// (Efraimidis-Spirakis keys `ln(u)/p`, with exponential jumps so that only
/// about `k·ln(n/k)` keys are ever drawn). Zero weights are never picked
/// unless fewer than `k` weights are positive. Returns ascending indices.
fn weighted_without_replacement(weights: &[f64], k: usize, rng: &mut Rng) -> Vec<usize> {
    let n = weights.len();
    if k >= n {
        return (0..n).collect();
    }
    if k == 0 {
        return Vec::new();
    }
    let key = |p: f64, rng: &mut Rng| {
        if p > 0.0 {
            -rng.exponential() / p
        } else {
            f64::NEG_INFINITY
        }
    };
    let mut heap: BinaryHeap<Kept> = (0..k)
        .map(|index| Kept {
            score: key(weights[index], rng),
            index,
        })
        .collect();
    let mut threshold = heap.peek().expect("k > 0").score;
    // Weight mass to skip before the next replacement: P(skip > x) = e^{threshold·x}.
    let mut skip = rng.exponential() / -threshold;
    for (index, &p) in weights.iter().enumerate().skip(k) {
        if p.is_nan() || p <= 0.0 {
            continue;
        }
        skip -= p;
        if skip > 0.0 {
            continue;
        }
        // This item's key is conditioned to beat the threshold.
        let floor = (threshold * p).exp();
        let u = floor + (1.0 - floor) * rng.uniform();
        *heap.peek_mut().expect("k > 0") = Kept {
            score: u.ln() / p,
            index,
        };
        threshold = heap.peek().expect("k > 0").score;
        skip = rng.exponential() / -threshold;
    }
    let mut out: Vec<usize> = heap.into_iter().map(|kept| kept.index).collect();
    out.sort_unstable();
    out
}

/// Draws `cfg.experiments` masks for `w`. `state` of `None` disables momentum.
pub fn draw_masks(
    w: &[f64],
    cfg: &SamplerConfig,
    state: Option<&SamplerState>,
    rng: &mut Rng,
) -> Result<MaskDraw> {
    if w.is_empty() {
        return Err(Error::EmptyVector);
    }
    ensure_finite(w)?;
    cfg.validate()?;
    let n = w.len();
    let family = rng.fork();
    let mut masks = Vec::with_capacity(cfg.experiments);
    let mut counter = IndexCounter::new(n);
    let mut mean: Option<Vec<f64>> = None;
    for s in 0..cfg.experiments {
        let mut stream = family.substream(s as u64);
        let (mask, dist) = draw_one(w, cfg, state, &mut stream)?;
        counter.add(&mask)?;
        if let Some(dist) = dist {
            let acc = mean.get_or_insert_with(|| vec![0.0; n]);
            for (a, p) in acc.iter_mut().zip(&dist) {
                *a += p;
            }
        }
        masks.push(mask);
    }
    let distribution = mean.map(|mut acc| {
        let s = cfg.experiments as f64;
        for a in &mut acc {
            *a /= s;
        }
        // Renormalize away accumulated rounding so commit() accepts it.
        let total: f64 = acc.iter().sum();
        for a in &mut acc {
            *a /= total;
        }
        acc
    });
    Ok(MaskDraw {
        masks,
        counter,
        distribution,
    })
}
