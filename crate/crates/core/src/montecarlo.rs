//! Replication engine.
//!
//! Replication `i` always draws from `RngStream::new(master_seed, i)`.
//! Replications are grouped into fixed-size blocks; each block is folded in
//! index order and the block states are merged in block order, so the result
//! does not depend on how many worker threads ran the blocks.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{approx_moments, threshold};
use crate::error::{domain, Error, Result};
use crate::exact::exact_tv;
use crate::model::{sample_tournament_into, GameSampler, ModelParams, RngStream, ScoreVector};

/// Replications folded sequentially before a merge.
pub const BLOCK_SIZE: u64 = 256;
/// One replication in this many has its score total verified.
pub const CONSERVATION_CHECK_EVERY: u64 = 1000;

/// Default replication count by tournament size.
pub fn default_reps(n: usize) -> u64 {
    match n {
        0..=100 => 100_000,
        101..=1000 => 10_000,
        _ => 500,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McConfig {
    pub reps: u64,
    pub master_seed: u64,
    pub t_grid: Vec<f64>,
    /// Worker threads; `None` uses the global rayon pool.
    pub worker_hint: Option<usize>,
}

impl McConfig {
    pub fn new(reps: u64, master_seed: u64) -> Self {
        McConfig {
            reps,
            master_seed,
            t_grid: Vec::new(),
            worker_hint: None,
        }
    }

    pub fn with_t_grid(mut self, t_grid: Vec<f64>) -> Self {
        self.t_grid = t_grid;
        self
    }

    pub fn with_workers(mut self, workers: Option<usize>) -> Self {
        self.worker_hint = workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(domain("reps must be at least 1"));
        }
        if self.t_grid.iter().any(|t| !t.is_finite()) {
            return Err(domain("t grid values must be finite"));
        }
        if self.worker_hint == Some(0) {
            return Err(domain("worker count must be at least 1"));
        }
        Ok(())
    }
}

/// A mergeable per-replication accumulator.
///
/// `merge` is called with states covering consecutive index ranges, the
/// earlier range on the left.
pub trait Collector: Send {
    fn observe(&mut self, index: u64, scores: &ScoreVector);
    fn merge(&mut self, later: Self);
}

/// Runs `cfg.reps` tournaments and folds them into collectors built by `make`.
pub fn run_replications<C, F>(params: &ModelParams, cfg: &McConfig, make: F) -> Result<C>
where
    C: Collector,
    F: Fn() -> C + Sync,
{
    cfg.validate()?;
    let blocks = cfg.reps.div_ceil(BLOCK_SIZE);
    let sampler = GameSampler::new(params.p());
    let run_block = |b: u64| -> Result<C> {
        let mut state = make();
        let mut scores = ScoreVector::try_zeros(params.n())?;
        let end = ((b + 1) * BLOCK_SIZE).min(cfg.reps);
        for index in b * BLOCK_SIZE..end {
            let mut rng = RngStream::new(cfg.master_seed, index);
            sample_tournament_into(params, &sampler, &mut rng, &mut scores);
            if index % CONSERVATION_CHECK_EVERY == 0 && scores.total() != params.total_half_points() {
                return Err(Error::Invariant(format!(
                    "replication {index}: scores sum to {} half-points, expected {}",
                    scores.total(),
                    params.total_half_points()
                )));
            }
            state.observe(index, &scores);
        }
        Ok(state)
    };
    let run_all = || {
        (0..blocks)
            .into_par_iter()
            .map(run_block)
            .collect::<Result<Vec<C>>>()
    };
    let states = match cfg.worker_hint {
        Some(workers) => rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Capacity(format!("thread pool with {workers} workers: {e}")))?
            .install(run_all)?,
        None => run_all()?,
    };
    let mut states = states.into_iter();
    let mut merged = states.next().expect("at least one block");
    for s in states {
        merged.merge(s);
    }
    Ok(merged)
}

/// Single-pass mean and second central moment with pairwise merging.
#[derive(Debug, Default, Clone, Copy, PartialEq)]
pub struct MomentAccumulator {
    count: u64,
    mean: f64,
    m2: f64,
}

impl MomentAccumulator {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &MomentAccumulator) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let weight = other.count as f64 / count as f64;
        self.mean += delta * weight;
        self.m2 += other.m2 + delta * delta * self.count as f64 * weight;
        self.count = count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample variance (`count - 1` denominator); zero for a single value.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    pub fn estimate(&self) -> MomentEstimate {
        MomentEstimate::new(self.mean, self.variance().sqrt(), self.count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub mean: f64,
    pub sd: f64,
    pub se_mean: f64,
    pub reps: u64,
}

impl MomentEstimate {
    pub fn new(mean: f64, sd: f64, reps: u64) -> Self {
        MomentEstimate {
            mean,
            sd,
            se_mean: sd / (reps as f64).sqrt(),
            reps,
        }
    }
}

/// Streams `s_(n-j)` (in points) for a set of rank offsets.
#[derive(Debug, Clone)]
pub struct OrderStatCollector {
    offsets: Vec<usize>,
    accs: Vec<MomentAccumulator>,
    top: Vec<u32>,
}

impl OrderStatCollector {
    pub fn new(offsets: &[usize], n: usize) -> Result<Self> {
        if offsets.is_empty() {
            return Err(domain("no rank offsets requested"));
        }
        if let Some(&j) = offsets.iter().find(|&&j| j >= n) {
            return Err(domain(format!("rank offset {j} needs more than {n} players")));
        }
        let depth = offsets.iter().max().unwrap() + 1;
        Ok(OrderStatCollector {
            offsets: offsets.to_vec(),
            accs: vec![MomentAccumulator::default(); offsets.len()],
            top: vec![0; depth],
        })
    }

    pub fn estimates(&self) -> BTreeMap<usize, MomentEstimate> {
        self.offsets
            .iter()
            .zip(&self.accs)
            .map(|(&j, acc)| (j, acc.estimate()))
            .collect()
    }
}

/// Fills `top` (descending) with the `top.len()` largest half-point scores.
fn largest_scores(scores: &ScoreVector, top: &mut [u32]) {
    let depth = top.len();
    let mut filled = 0;
    for s in scores.as_slice() {
        let v = s.0;
        if filled == depth {
            if v <= top[depth - 1] {
                continue;
            }
        } else {
            filled += 1;
        }
        let mut pos = filled - 1;
        while pos > 0 && top[pos - 1] < v {
            top[pos] = top[pos - 1];
            pos -= 1;
        }
        top[pos] = v;
    }
}

impl Collector for OrderStatCollector {
    fn observe(&mut self, _index: u64, scores: &ScoreVector) {
        largest_scores(scores, &mut self.top);
        for (acc, &j) in self.accs.iter_mut().zip(&self.offsets) {
            acc.push(self.top[j] as f64 / 2.0);
        }
    }

    fn merge(&mut self, later: Self) {
        for (a, b) in self.accs.iter_mut().zip(&later.accs) {
            a.merge(b);
        }
    }
}

/// MC moments of `s_(n-j)` for each requested offset.
pub fn estimate_order_stat_moments(
    params: &ModelParams,
    offsets: &[usize],
    cfg: &McConfig,
) -> Result<BTreeMap<usize, MomentEstimate>> {
    let proto = OrderStatCollector::new(offsets, params.n())?;
    let state = run_replications(params, cfg, || proto.clone())?;
    Ok(state.estimates())
}

/// Number of players with at least `cutoff` half-points.
pub fn count_exceedances(scores: &ScoreVector, cutoff: i64) -> usize {
    scores.as_slice().iter().filter(|s| s.0 as i64 >= cutoff).count()
}

/// Number of players whose normalized score is strictly above `x_star`,
/// computed in floating point.
pub fn count_exceedances_normalized(scores: &ScoreVector, params: &ModelParams, x_star: f64) -> Result<usize> {
    let z = crate::model::normalize_scores(scores, params)?;
    Ok(z.values.iter().filter(|&&v| v > x_star).count())
}

/// Empirical law of the exceedance count at one threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExceedanceHistogram {
    pub t: f64,
    pub x: f64,
    pub cutoff: i64,
    /// Exceedance count -> number of replications.
    pub counts: BTreeMap<usize, u64>,
    pub reps: u64,
    /// Indicators summed over players and replications.
    pub total_exceedances: u64,
    /// Replications in which player 1 exceeded.
    pub first_player_exceedances: u64,
}

impl ExceedanceHistogram {
    /// Dense empirical pmf on `0..=max observed count`.
    pub fn pmf(&self) -> Vec<f64> {
        let top = self.counts.keys().next_back().copied().unwrap_or(0);
        let mut out = vec![0.0; top + 1];
        for (&k, &c) in &self.counts {
            out[k] = c as f64 / self.reps as f64;
        }
        out
    }

    pub fn mean(&self) -> f64 {
        let s: u64 = self.counts.iter().map(|(&k, &c)| k as u64 * c).sum();
        s as f64 / self.reps as f64
    }

    /// Sample variance of the count.
    pub fn variance(&self) -> f64 {
        if self.reps < 2 {
            return 0.0;
        }
        let m = self.mean();
        let ss: f64 = self
            .counts
            .iter()
            .map(|(&k, &c)| c as f64 * (k as f64 - m).powi(2))
            .sum();
        ss / (self.reps - 1) as f64
    }

    pub fn se_mean(&self) -> f64 {
        (self.variance() / self.reps as f64).sqrt()
    }

    /// Pooled exceedance frequency over all players.
    pub fn pooled_pi1(&self, n: usize) -> f64 {
        self.total_exceedances as f64 / (n as f64 * self.reps as f64)
    }
}

#[derive(Debug, Clone)]
pub struct ExceedanceCollector {
    cutoffs: Vec<i64>,
    counts: Vec<Vec<u64>>,
    totals: Vec<u64>,
    first: Vec<u64>,
    reps: u64,
}

impl ExceedanceCollector {
    pub fn new(params: &ModelParams, t_grid: &[f64]) -> Result<Self> {
        let cutoffs = t_grid
            .iter()
            .map(|&t| Ok(params.exceedance_cutoff(threshold(params.n(), t)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(ExceedanceCollector {
            counts: vec![vec![0; params.n() + 1]; cutoffs.len()],
            totals: vec![0; cutoffs.len()],
            first: vec![0; cutoffs.len()],
            cutoffs,
            reps: 0,
        })
    }

    pub fn histograms(&self, params: &ModelParams, t_grid: &[f64]) -> Result<Vec<ExceedanceHistogram>> {
        t_grid
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                Ok(ExceedanceHistogram {
                    t,
                    x: threshold(params.n(), t)?,
                    cutoff: self.cutoffs[i],
                    counts: self.counts[i]
                        .iter()
                        .enumerate()
                        .filter(|(_, &c)| c > 0)
                        .map(|(k, &c)| (k, c))
                        .collect(),
                    reps: self.reps,
                    total_exceedances: self.totals[i],
                    first_player_exceedances: self.first[i],
                })
            })
            .collect()
    }
}

impl Collector for ExceedanceCollector {
    fn observe(&mut self, _index: u64, scores: &ScoreVector) {
        self.reps += 1;
        let first = scores.get(0).0 as i64;
        for (i, &cut) in self.cutoffs.iter().enumerate() {
            let k = count_exceedances(scores, cut);
            self.counts[i][k] += 1;
            self.totals[i] += k as u64;
            self.first[i] += (first >= cut) as u64;
        }
    }

    fn merge(&mut self, later: Self) {
        self.reps += later.reps;
        for (a, b) in self.counts.iter_mut().zip(&later.counts) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        self.totals.iter_mut().zip(&later.totals).for_each(|(x, y)| *x += y);
        self.first.iter_mut().zip(&later.first).for_each(|(x, y)| *x += y);
    }
}

/// Exceedance-count histograms at every `t` in `cfg.t_grid`, in grid order.
pub fn estimate_exceedance_histogram(params: &ModelParams, cfg: &McConfig) -> Result<Vec<ExceedanceHistogram>> {
    if cfg.t_grid.is_empty() {
        return Err(domain("t grid is empty"));
    }
    let proto = ExceedanceCollector::new(params, &cfg.t_grid)?;
    let state = run_replications(params, cfg, || proto.clone())?;
    state.histograms(params, &cfg.t_grid)
}

/// [`exact_tv`] of the empirical pmf against Poisson(`lambda`).
pub fn empirical_tv(h: &ExceedanceHistogram, lambda: f64) -> Result<f64> {
    if h.reps == 0 {
        return Err(domain("empty histogram"));
    }
    exact_tv(&h.pmf(), lambda)
}

/// Exact integer power sums of `(s_1 - c, s_2 - c)` up to total degree 4,
/// with `c = n - 1` half-points. Addition of integers makes merging exactly
/// associative and commutative.
#[derive(Debug, Clone, Default)]
pub struct PairCorrelationCollector {
    centre: i64,
    count: u64,
    // sums[a][b] = sum d1^a d2^b, a + b <= 4
    sums: [[i128; 5]; 5],
}

impl PairCorrelationCollector {
    pub fn new(params: &ModelParams) -> Self {
        PairCorrelationCollector {
            centre: params.n() as i64 - 1,
            ..Default::default()
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    #[allow(clippy::needless_range_loop)]
    fn central_moments(&self) -> [[f64; 5]; 5] {
        // raw moments of the shifted pair, then re-centred at the sample means
        let n = self.count as f64;
        let raw = |a: usize, b: usize| self.sums[a][b] as f64 / n;
        let (m1, m2) = (raw(1, 0), raw(0, 1));
        let binom = |n: usize, k: usize| -> f64 {
            (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
        };
        let mut mu = [[0.0; 5]; 5];
        for a in 0..5 {
            for b in 0..5 - a {
                let mut v = 0.0;
                for i in 0..=a {
                    for j in 0..=b {
                        v += binom(a, i)
                            * binom(b, j)
                            * raw(i, j)
                            * (-m1).powi((a - i) as i32)
                            * (-m2).powi((b - j) as i32);
                    }
                }
                mu[a][b] = v;
            }
        }
        mu
    }

    /// Sample correlation with a delta-method standard error.
    pub fn estimate(&self) -> MomentEstimate {
        if self.count == 0 {
            return MomentEstimate::new(f64::NAN, f64::NAN, 0);
        }
        let n = self.count as f64;
        let raw = |a: usize, b: usize| self.sums[a][b] as f64;
        let sxx = raw(2, 0) - raw(1, 0) * raw(1, 0) / n;
        let syy = raw(0, 2) - raw(0, 1) * raw(0, 1) / n;
        let sxy = raw(1, 1) - raw(1, 0) * raw(0, 1) / n;
        let r = sxy / (sxx * syy).sqrt();
        let mu = self.central_moments();
        let (vx, vy) = (mu[2][0], mu[0][2]);
        // standardized moments z_ab = mu_ab / (sx^a sy^b)
        let z = |a: usize, b: usize| mu[a][b] / (vx.powf(a as f64 / 2.0) * vy.powf(b as f64 / 2.0));
        // influence function of r: xy - r (x^2 + y^2) / 2
        let var_if = z(2, 2) - r * (z(3, 1) + z(1, 3)) + r * r / 4.0 * (z(4, 0) + 2.0 * z(2, 2) + z(0, 4));
        MomentEstimate::new(r, var_if.max(0.0).sqrt(), self.count)
    }
}

impl Collector for PairCorrelationCollector {
    fn observe(&mut self, _index: u64, scores: &ScoreVector) {
        let d1 = scores.get(0).0 as i64 - self.centre;
        let d2 = scores.get(1).0 as i64 - self.centre;
        self.count += 1;
        let mut pa: i128 = 1;
        for a in 0..5 {
            let mut pb: i128 = 1;
            for b in 0..5 - a {
                self.sums[a][b] += pa * pb;
                pb *= d2 as i128;
            }
            pa *= d1 as i128;
        }
    }

    fn merge(&mut self, later: Self) {
        self.count += later.count;
        for a in 0..5 {
            for b in 0..5 {
                self.sums[a][b] += later.sums[a][b];
            }
        }
    }
}

/// Correlation of players 1 and 2 across replications.
pub fn estimate_pair_correlation(params: &ModelParams, cfg: &McConfig) -> Result<MomentEstimate> {
    let proto = PairCorrelationCollector::new(params);
    Ok(run_replications(params, cfg, || proto.clone())?.estimate())
}

/// Relative deviation `|hat / mc - 1| * 100`.
pub fn relative_error_pct(hat: f64, mc: f64) -> f64 {
    (hat / mc - 1.0).abs() * 100.0
}

/// One row of a simulation-versus-approximation comparison table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    /// Rank offset: 0 for the maximum, 1 for the second largest, ...
    pub j: usize,
    pub n: usize,
    pub reps: u64,
    pub mc_e: f64,
    pub hat_e: f64,
    pub rel_e_pct: f64,
    pub mc_sd: f64,
    pub hat_sd: f64,
    pub rel_sd_pct: f64,
    /// Standard error of `mc_e`.
    pub se_e: f64,
}

/// Simulates the offsets in `offsets` and pairs them with the Gumbel-limit
/// approximations. One row per offset, in the order given.
pub fn table_rows(params: &ModelParams, offsets: &[usize], cfg: &McConfig) -> Result<Vec<TableRow>> {
    let mc = estimate_order_stat_moments(params, offsets, cfg)?;
    offsets
        .iter()
        .map(|&j| {
            let hat = approx_moments(j as i64, params)?;
            let est = mc[&j];
            Ok(TableRow {
                j,
                n: params.n(),
                reps: est.reps,
                mc_e: est.mean,
                hat_e: hat.e_hat,
                rel_e_pct: relative_error_pct(hat.e_hat, est.mean),
                mc_sd: est.sd,
                hat_sd: hat.sd_hat,
                rel_sd_pct: relative_error_pct(hat.sd_hat, est.sd),
                se_e: est.se_mean,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_tournament, validate_params, HalfPoints};
    use approx::assert_abs_diff_eq;

    #[test]
    fn welford_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.5 + 1e3).collect();
        let mut all = MomentAccumulator::default();
        xs.iter().for_each(|&x| all.push(x));
        let (mut a, mut b) = (MomentAccumulator::default(), MomentAccumulator::default());
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert_eq!(a.count(), 1000);
        assert_abs_diff_eq!(a.mean(), all.mean(), epsilon = 1e-10);
        assert_abs_diff_eq!(a.variance(), all.variance(), epsilon = 1e-9);
        let mut e = MomentAccumulator::default();
        e.merge(&all);
        assert_eq!(e, all);
    }

    #[test]
    fn single_rep_equals_single_update() {
        let params = validate_params(8, 0.5).unwrap();
        let cfg = McConfig::new(1, 9);
        let est = estimate_order_stat_moments(&params, &[0], &cfg).unwrap();
        let s = sample_tournament(&params, &mut RngStream::new(9, 0));
        let max = s.as_slice().iter().max().unwrap().points();
        assert_eq!(est[&0].mean, max);
        assert_eq!(est[&0].sd, 0.0);
        assert_eq!(est[&0].reps, 1);
    }

    #[test]
    fn top_scores_selection() {
        let s = ScoreVector::from_half_points([3, 9, 1, 9, 4, 0].map(HalfPoints).to_vec());
        let mut top = [0; 3];
        largest_scores(&s, &mut top);
        assert_eq!(top, [9, 9, 4]);
        let mut top = [0; 1];
        largest_scores(&s, &mut top);
        assert_eq!(top, [9]);
    }

    #[test]
    fn worker_count_does_not_matter() {
        let params = validate_params(12, 2.0 / 3.0).unwrap();
        let base = McConfig::new(3000, 17);
        let one = estimate_order_stat_moments(&params, &[0, 1, 2], &base.clone().with_workers(Some(1))).unwrap();
        let many = estimate_order_stat_moments(&params, &[0, 1, 2], &base.with_workers(Some(8))).unwrap();
        for j in 0..3 {
            assert_eq!(one[&j].mean.to_bits(), many[&j].mean.to_bits());
            assert_eq!(one[&j].sd.to_bits(), many[&j].sd.to_bits());
        }
    }

    #[test]
    fn se_relation() {
        let params = validate_params(5, 0.3).unwrap();
        let est = estimate_order_stat_moments(&params, &[0], &McConfig::new(5000, 1)).unwrap()[&0];
        assert_abs_diff_eq!(est.se_mean, est.sd / (est.reps as f64).sqrt(), epsilon = 1e-12);
        assert!(est.sd >= 0.0);
    }

    #[test]
    fn offsets_validated() {
        let params = validate_params(2, 0.0).unwrap();
        assert!(estimate_order_stat_moments(&params, &[2], &McConfig::new(10, 1)).is_err());
        assert!(estimate_order_stat_moments(&params, &[], &McConfig::new(10, 1)).is_err());
        assert!(estimate_order_stat_moments(&params, &[0], &McConfig::new(0, 1)).is_err());
    }

    #[test]
    fn two_player_histogram() {
        let params = validate_params(2, 0.0).unwrap();
        let nc = crate::asymptotics::NormConstants::new(2).unwrap();
        let cfg = McConfig::new(1000, 3).with_t_grid(vec![-nc.b / nc.a]);
        let h = &estimate_exceedance_histogram(&params, &cfg).unwrap()[0];
        assert_eq!(h.counts, BTreeMap::from([(1, 1000)]));
        assert_eq!(h.mean(), 1.0);
    }

    #[test]
    fn histogram_bookkeeping() {
        let params = validate_params(20, 2.0 / 3.0).unwrap();
        let cfg = McConfig::new(4000, 5).with_t_grid(vec![-1.0, 0.0, 1.0, 2.0]);
        for h in estimate_exceedance_histogram(&params, &cfg).unwrap() {
            assert_eq!(h.counts.values().sum::<u64>(), h.reps);
            assert!(h.counts.keys().all(|&k| k <= 20));
            assert_abs_diff_eq!(h.mean(), 20.0 * h.pooled_pi1(20), epsilon = 1e-12);
        }
    }

    #[test]
    fn integer_and_float_exceedance_paths_agree() {
        for (n, p) in [(10, 2.0 / 3.0), (37, 0.0), (100, 0.5), (6, 0.2)] {
            let params = validate_params(n, p).unwrap();
            let ts = [-1.0, 0.0, 0.5, 1.0, 2.0];
            for idx in 0..300 {
                let s = sample_tournament(&params, &mut RngStream::new(8, idx));
                for &t in &ts {
                    let x = threshold(n, t).unwrap();
                    let a = count_exceedances(&s, params.exceedance_cutoff(x));
                    let b = count_exceedances_normalized(&s, &params, x).unwrap();
                    assert_eq!(a, b, "n={n} t={t}");
                }
            }
        }
    }

    #[test]
    fn tv_of_degenerate_histogram() {
        let h = ExceedanceHistogram {
            t: 0.0,
            x: 0.0,
            cutoff: 0,
            counts: BTreeMap::from([(0, 500)]),
            reps: 500,
            total_exceedances: 0,
            first_player_exceedances: 0,
        };
        assert_abs_diff_eq!(empirical_tv(&h, 1.0).unwrap(), 0.632_120_558_828_558, epsilon = 1e-14);
    }

    #[test]
    fn two_players_perfectly_anticorrelated() {
        let params = validate_params(2, 0.0).unwrap();
        let est = estimate_pair_correlation(&params, &McConfig::new(500, 2)).unwrap();
        assert_eq!(est.mean, -1.0);
        assert_eq!(est.se_mean, 0.0);
    }

    #[test]
    fn correlation_merge_is_exact() {
        let params = validate_params(9, 0.4).unwrap();
        let mut whole = PairCorrelationCollector::new(&params);
        let mut left = PairCorrelationCollector::new(&params);
        let mut right = PairCorrelationCollector::new(&params);
        for i in 0..700 {
            let s = sample_tournament(&params, &mut RngStream::new(4, i));
            whole.observe(i, &s);
            if i < 250 { left.observe(i, &s) } else { right.observe(i, &s) }
        }
        left.merge(right);
        assert_eq!(left.sums, whole.sums);
        assert_eq!(left.estimate(), whole.estimate());
    }

    #[test]
    fn conservation_spot_check_runs() {
        let params = validate_params(31, 0.5).unwrap();
        assert!(run_replications(&params, &McConfig::new(2500, 0), || {
            OrderStatCollector::new(&[0], 31).unwrap()
        })
        .is_ok());
    }

    #[test]
    fn default_reps_follow_tables() {
        assert_eq!(default_reps(10), 100_000);
        assert_eq!(default_reps(100), 100_000);
        assert_eq!(default_reps(1000), 10_000);
        assert_eq!(default_reps(10_000), 500);
    }
}
