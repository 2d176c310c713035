//! Tournament model: parameters, half-point scores and sampling.
//!
//! Scores are kept as integer half-points (a win is 2, a draw 1, a loss 0)
//! up to the point where they are normalized, so totals and ties are exact.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::Serialize;

use crate::error::{domain, Error, Result};

/// Warning attached to parameters outside the proven Poisson-limit region.
pub const OPEN_REGION_WARNING: &str = "theorem coverage open for p in (0,1/3)";

/// Whether the limit theorems are known to hold for a given draw probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Applicability {
    /// `p = 0` or `p` in `[1/3, 1)`.
    Covered,
    /// `p` in `(0, 1/3)`: simulation is allowed, the limit laws are unproven.
    Open,
}

impl Applicability {
    pub fn of(p: f64) -> Self {
        if p == 0.0 || p >= 1.0 / 3.0 {
            Applicability::Covered
        } else {
            Applicability::Open
        }
    }

    pub fn warning(self) -> Option<&'static str> {
        match self {
            Applicability::Covered => None,
            Applicability::Open => Some(OPEN_REGION_WARNING),
        }
    }
}

/// Player count and draw probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    n: usize,
    p: f64,
}

/// Checks `n >= 2` and `0 <= p < 1`.
pub fn validate_params(n: usize, p: f64) -> Result<ModelParams> {
    ModelParams::new(n, p)
}

impl ModelParams {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        if n < 2 {
            return Err(domain(format!("player count n = {n} must be at least 2")));
        }
        if !(0.0..1.0).contains(&p) {
            return Err(domain(format!("draw probability p = {p} must lie in [0, 1)")));
        }
        // Largest total is n(n-1) half-points; keep it inside u32 per player
        // and u64 overall.
        if n > u32::MAX as usize / 2 {
            return Err(Error::Capacity(format!("player count n = {n} is too large")));
        }
        Ok(ModelParams { n, p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn applicability(&self) -> Applicability {
        Applicability::of(self.p)
    }

    pub fn is_covered(&self) -> bool {
        self.applicability() == Applicability::Covered
    }

    /// Number of games, `n(n-1)/2`.
    pub fn games(&self) -> u64 {
        let n = self.n as u64;
        n * (n - 1) / 2
    }

    /// Sum of all scores in half-points, `n(n-1)`.
    pub fn total_half_points(&self) -> u64 {
        let n = self.n as u64;
        n * (n - 1)
    }

    /// Expected score of one player in points, `(n-1)/2`.
    pub fn mean_score(&self) -> f64 {
        (self.n - 1) as f64 / 2.0
    }

    /// Standard deviation of one player's score in points.
    pub fn score_sd(&self) -> f64 {
        ((self.n - 1) as f64 * (1.0 - self.p)).sqrt() / 2.0
    }

    /// Smallest half-point score whose normalized value is strictly above
    /// `x_star`.
    ///
    /// A player exceeds `x_star` iff their half-point total is at least this
    /// value. The result may lie outside `[0, 2(n-1)]`.
    pub fn exceedance_cutoff(&self, x_star: f64) -> i64 {
        // raw threshold in half-points: 2(E_n + sigma_n x)
        let raw = (self.n - 1) as f64 + 2.0 * self.score_sd() * x_star;
        let top = 2 * (self.n as i64 - 1) + 1;
        if raw.is_nan() || raw >= top as f64 {
            return top;
        }
        if raw < 0.0 {
            return 0;
        }
        raw.floor() as i64 + 1
    }
}

/// `(E_n, sigma_n)` in points.
pub fn score_moments(params: &ModelParams) -> (f64, f64) {
    (params.mean_score(), params.score_sd())
}

/// A score measured in half-points.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[repr(transparent)]
pub struct HalfPoints(pub u32);

impl HalfPoints {
    pub const LOSS: HalfPoints = HalfPoints(0);
    pub const DRAW: HalfPoints = HalfPoints(1);
    pub const WIN: HalfPoints = HalfPoints(2);

    pub fn points(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl std::ops::Add for HalfPoints {
    type Output = HalfPoints;

    fn add(self, rhs: HalfPoints) -> HalfPoints {
        HalfPoints(self.0 + rhs.0)
    }
}

/// Deterministic random stream addressed by `(master seed, stream index)`.
///
/// The generator state is derived from both words through SplitMix64, so
/// replication `i` of a run can be regenerated without touching any other
/// replication.
#[derive(Debug, Clone)]
pub struct RngStream {
    inner: Xoshiro256PlusPlus,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, index: u64) -> Self {
        let mut a = seed;
        let mut salt = seed.rotate_left(17);
        let mut b = index ^ splitmix64(&mut salt);
        let words = [
            splitmix64(&mut a),
            splitmix64(&mut a),
            splitmix64(&mut b),
            splitmix64(&mut b),
        ];
        let mut bytes = [0u8; 32];
        for (chunk, w) in bytes.chunks_exact_mut(8).zip(words) {
            chunk.copy_from_slice(&w.to_le_bytes());
        }
        if bytes.iter().all(|&x| x == 0) {
            bytes[0] = 1;
        }
        RngStream {
            inner: Xoshiro256PlusPlus::from_seed(bytes),
        }
    }

    #[inline(always)]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Maps 32-bit uniforms onto game outcomes.
///
/// `[0, T)` is a win for the first player, `[2^32 - T, 2^32)` a loss, and the
/// middle is a draw, with `T = round(2^32 (1-p)/2)`. Wins and losses are
/// therefore exactly equally likely.
#[derive(Debug, Clone, Copy)]
pub struct GameSampler {
    win_below: u32,
    // last value of the draw band; losses are strictly above it
    draw_through: u32,
}

impl GameSampler {
    pub fn new(p: f64) -> Self {
        let span = (1u64 << 32) as f64;
        // at most 2^31, reached at p = 0
        let win_below = ((1.0 - p) / 2.0 * span).round() as u64;
        GameSampler {
            win_below: win_below as u32,
            draw_through: ((1u64 << 32) - win_below - 1) as u32,
        }
    }

    /// Half-points won by the first player for a 32-bit uniform `u`.
    #[inline(always)]
    pub fn outcome(&self, u: u32) -> u32 {
        2 - (u >= self.win_below) as u32 - (u > self.draw_through) as u32
    }
}

/// Samples one game; the two half-point scores always sum to 2.
pub fn sample_game(p: f64, rng: &mut RngStream) -> (HalfPoints, HalfPoints) {
    let k = GameSampler::new(p).outcome((rng.next_u64() >> 32) as u32);
    (HalfPoints(k), HalfPoints(2 - k))
}

/// Per-player totals of one tournament, indexed by player.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScoreVector {
    scores: Vec<HalfPoints>,
}

impl ScoreVector {
    pub fn zeros(n: usize) -> Self {
        ScoreVector {
            scores: vec![HalfPoints(0); n],
        }
    }

    pub fn try_zeros(n: usize) -> Result<Self> {
        let mut scores = Vec::new();
        scores
            .try_reserve_exact(n)
            .map_err(|e| Error::Capacity(format!("score buffer for {n} players: {e}")))?;
        scores.resize(n, HalfPoints(0));
        Ok(ScoreVector { scores })
    }

    /// Builds a vector from scores given in points; each must be a multiple of 1/2.
    pub fn from_points(points: &[f64]) -> Result<Self> {
        let scores = points
            .iter()
            .map(|&x| {
                let h = 2.0 * x;
                if h >= 0.0 && h.fract() == 0.0 && h <= u32::MAX as f64 {
                    Ok(HalfPoints(h as u32))
                } else {
                    Err(domain(format!("score {x} is not a nonnegative multiple of 1/2")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ScoreVector { scores })
    }

    pub fn from_half_points(scores: Vec<HalfPoints>) -> Self {
        ScoreVector { scores }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn as_slice(&self) -> &[HalfPoints] {
        &self.scores
    }

    pub fn get(&self, player: usize) -> HalfPoints {
        self.scores[player]
    }

    pub fn total(&self) -> u64 {
        self.scores.iter().map(|s| s.0 as u64).sum()
    }

    /// Checks length and the conservation identity against `params`.
    pub fn check(&self, params: &ModelParams) -> Result<()> {
        if self.len() != params.n() {
            return Err(domain(format!(
                "score vector has {} entries, expected {}",
                self.len(),
                params.n()
            )));
        }
        let limit = 2 * (params.n() as u32 - 1);
        if let Some(s) = self.scores.iter().find(|s| s.0 > limit) {
            return Err(domain(format!("score {} half-points exceeds {limit}", s.0)));
        }
        if self.total() != params.total_half_points() {
            return Err(Error::Invariant(format!(
                "scores sum to {} half-points, expected {}",
                self.total(),
                params.total_half_points()
            )));
        }
        Ok(())
    }
}

/// Samples every game of a tournament independently.
pub fn sample_tournament(params: &ModelParams, rng: &mut RngStream) -> ScoreVector {
    let mut scores = ScoreVector::zeros(params.n());
    sample_tournament_into(params, &GameSampler::new(params.p()), rng, &mut scores);
    scores
}

/// Refills `out` (which must hold `n` entries) with a fresh tournament.
///
/// Each 64-bit draw decides two games, one per 32-bit half. Games are
/// visited row by row: player `i` against players `i+1..n`.
pub fn sample_tournament_into(
    params: &ModelParams,
    sampler: &GameSampler,
    rng: &mut RngStream,
    out: &mut ScoreVector,
) {
    let n = params.n();
    debug_assert_eq!(out.len(), n);
    let scores = &mut out.scores;
    scores.fill(HalfPoints(0));
    for i in 0..n - 1 {
        let (head, tail) = scores.split_at_mut(i + 1);
        let mut row = 0u32;
        let mut pairs = tail.chunks_exact_mut(2);
        for pair in &mut pairs {
            let r = rng.next_u64();
            let k0 = sampler.outcome(r as u32);
            let k1 = sampler.outcome((r >> 32) as u32);
            row += k0 + k1;
            pair[0].0 += 2 - k0;
            pair[1].0 += 2 - k1;
        }
        if let [last] = pairs.into_remainder() {
            let k = sampler.outcome(rng.next_u64() as u32);
            row += k;
            last.0 += 2 - k;
        }
        head[i].0 += row;
    }
}

/// Normalized scores `(s_i - E_n) / sigma_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizedScoreVector {
    pub values: Vec<f64>,
}

impl NormalizedScoreVector {
    /// Maps back to points: `E_n + sigma_n * z`.
    pub fn to_points(&self, params: &ModelParams) -> Vec<f64> {
        let (mean, sd) = score_moments(params);
        self.values.iter().map(|z| mean + sd * z).collect()
    }
}

pub fn normalize_scores(scores: &ScoreVector, params: &ModelParams) -> Result<NormalizedScoreVector> {
    scores.check(params)?;
    let centre = params.n() as i64 - 1;
    let two_sd = 2.0 * params.score_sd();
    let values = scores
        .as_slice()
        .iter()
        .map(|s| (s.0 as i64 - centre) as f64 / two_sd)
        .collect();
    Ok(NormalizedScoreVector { values })
}

/// Ascending stable sort. Rejects empty input and NaN.
pub fn order_statistics<T: PartialOrd + Copy>(values: &[T]) -> Result<Vec<T>> {
    if values.is_empty() {
        return Err(domain("order statistics of an empty sequence"));
    }
    #[allow(clippy::eq_op)]
    if values.iter().any(|v| v.partial_cmp(v).is_none()) {
        return Err(domain("order statistics of unordered values (NaN)"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("checked comparable"));
    Ok(sorted)
}
