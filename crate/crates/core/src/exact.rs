//! Exact finite-`n` distributions.
//!
//! Two independent routes are provided: the single-score marginal by
//! repeated convolution of the per-game law, and brute-force enumeration of
//! every game-outcome assignment for small tournaments. The enumeration also
//! yields the joint quantities (order statistics, exceedance counts, pair
//! probabilities) that the convolution cannot.

use serde::Serialize;

use crate::asymptotics::{poisson_pmf, threshold};
use crate::error::{domain, Error, Result};
use crate::model::ModelParams;

/// Default largest `n` accepted by [`enumerate_small`]; `3^15` assignments.
pub const DEFAULT_N_MAX: usize = 6;

const RENORMALIZE_EVERY: usize = 64;

/// Probability mass function on consecutive half-point values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticePmf {
    origin: i64,
    probs: Vec<f64>,
}

impl LatticePmf {
    pub fn new(origin: i64, probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(domain("empty pmf"));
        }
        if probs.iter().any(|&q| q.is_nan() || q < 0.0 || q.is_infinite()) {
            return Err(domain("pmf entries must be finite and nonnegative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(domain(format!("pmf mass {total} differs from 1")));
        }
        Ok(LatticePmf { origin, probs })
    }

    /// Half-point value of the first entry.
    pub fn origin(&self) -> i64 {
        self.origin
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Last half-point value with a stored entry.
    pub fn last(&self) -> i64 {
        self.origin + self.probs.len() as i64 - 1
    }

    /// Mass at half-point value `k` (zero off the stored support).
    pub fn get(&self, k: i64) -> f64 {
        if k < self.origin {
            return 0.0;
        }
        self.probs.get((k - self.origin) as usize).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, &q)| (self.origin + i as i64, q))
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean_half_points(&self) -> f64 {
        self.iter().map(|(k, q)| k as f64 * q).sum()
    }

    pub fn variance_half_points(&self) -> f64 {
        let m = self.mean_half_points();
        self.iter().map(|(k, q)| (k as f64 - m).powi(2) * q).sum()
    }

    pub fn mean_points(&self) -> f64 {
        self.mean_half_points() / 2.0
    }

    pub fn sd_points(&self) -> f64 {
        self.variance_half_points().sqrt() / 2.0
    }

    /// `P(value >= cutoff)`, summed from the top so small tails keep their
    /// relative precision.
    pub fn mass_at_or_above(&self, cutoff: i64) -> f64 {
        let start = (cutoff - self.origin).max(0) as usize;
        self.probs.iter().skip(start).rev().sum()
    }

    /// Largest deviation from symmetry about `centre` half-points.
    pub fn asymmetry_about(&self, centre: i64) -> f64 {
        self.iter()
            .map(|(k, q)| (q - self.get(2 * centre - k)).abs())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise difference to `other` over the union of supports.
    pub fn max_abs_diff(&self, other: &LatticePmf) -> f64 {
        let lo = self.origin.min(other.origin);
        let hi = self.last().max(other.last());
        (lo..=hi)
            .map(|k| (self.get(k) - other.get(k)).abs())
            .fold(0.0, f64::max)
    }
}

/// Compensated (Neumaier) running sum.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Law of one player's score: the `(n-1)`-fold convolution of
/// `{0: (1-p)/2, 1: p, 2: (1-p)/2}` on half-points.
pub fn single_score_pmf(params: &ModelParams) -> LatticePmf {
    let games = params.n() - 1;
    let q = (1.0 - params.p()) / 2.0;
    let p = params.p();
    let mut probs = vec![0.0; 2 * games + 1];
    probs[0] = 1.0;
    let mut len = 1;
    for step in 1..=games {
        // in place, from the top: new[k] = q old[k] + p old[k-1] + q old[k-2]
        for k in (0..len + 2).rev() {
            let old = |i: usize, probs: &[f64]| if i < len { probs[i] } else { 0.0 };
            let mut v = q * old(k, &probs);
            if k >= 1 {
                v += p * old(k - 1, &probs);
            }
            if k >= 2 {
                v += q * old(k - 2, &probs);
            }
            probs[k] = v;
        }
        len += 2;
        if step % RENORMALIZE_EVERY == 0 {
            let total: f64 = probs[..len].iter().sum();
            probs[..len].iter_mut().for_each(|x| *x /= total);
        }
    }
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|x| *x /= total);
    LatticePmf { origin: 0, probs }
}

/// `P(s* > x_star)` on the lattice, strict inequality.
pub fn tail_probability(pmf: &LatticePmf, params: &ModelParams, x_star: f64) -> f64 {
    pmf.mass_at_or_above(params.exceedance_cutoff(x_star))
}

/// `lambda_n = n P(s*_1 > x_n(t))`.
pub fn lambda_n(params: &ModelParams, t: f64) -> Result<f64> {
    lambda_n_from(&single_score_pmf(params), params, t)
}

/// As [`lambda_n`] with a precomputed single-score pmf.
pub fn lambda_n_from(pmf: &LatticePmf, params: &ModelParams, t: f64) -> Result<f64> {
    let x = threshold(params.n(), t)?;
    Ok(params.n() as f64 * tail_probability(pmf, params, x))
}

/// Exact law of one order statistic `s_(n-j)`.
#[derive(Debug, Clone, Serialize)]
pub struct OrderStatExact {
    /// Rank offset from the top: 0 is the maximum.
    pub j: usize,
    pub pmf: LatticePmf,
    /// Mean in points.
    pub mean: f64,
    /// Standard deviation in points.
    pub sd: f64,
}

/// Enumeration results at one threshold `x_n(t)`.
#[derive(Debug, Clone, Serialize)]
pub struct ExactSummary {
    pub n: usize,
    pub p: f64,
    pub t: f64,
    /// Normalized threshold `x_n(t)`.
    pub x: f64,
    /// Smallest half-point score counted as an exceedance.
    pub cutoff: i64,
    /// `s_(n)`, `s_(n-1)`, `s_(n-2)` (fewer when `n < 3`).
    pub top: Vec<OrderStatExact>,
    /// Marginal of player 1's score from the enumeration.
    pub first_marginal: LatticePmf,
    /// `P(W_n = k)` for `k = 0..=n`.
    pub exceedance_pmf: Vec<f64>,
    /// `P(s*_1 > x)` from the enumeration.
    pub first_exceedance: f64,
    /// `P(s*_1 > x, s*_2 > x)`.
    pub pair_exceedance: f64,
    /// `corr(s_1, s_2)`.
    pub corr_12: f64,
    /// Total enumerated probability; 1 up to round-off.
    pub total_weight: f64,
}

impl ExactSummary {
    pub fn mean_w(&self) -> f64 {
        self.exceedance_pmf
            .iter()
            .enumerate()
            .map(|(k, q)| k as f64 * q)
            .sum()
    }

    pub fn var_w(&self) -> f64 {
        let m = self.mean_w();
        self.exceedance_pmf
            .iter()
            .enumerate()
            .map(|(k, q)| (k as f64 - m).powi(2) * q)
            .sum()
    }
}

/// Full enumeration at a single `t` with the default size limit.
pub fn enumerate_small(params: &ModelParams, t: f64) -> Result<ExactSummary> {
    let mut all = enumerate_grid(params, &[t], DEFAULT_N_MAX)?;
    Ok(all.pop().expect("one threshold requested"))
}

struct Tally {
    n: usize,
    cutoffs: Vec<u32>,
    top: Vec<Vec<CompensatedSum>>,
    first: Vec<CompensatedSum>,
    exceed: Vec<Vec<CompensatedSum>>,
    first_exceed: Vec<CompensatedSum>,
    pair: Vec<CompensatedSum>,
    s1: CompensatedSum,
    s2: CompensatedSum,
    s11: CompensatedSum,
    s22: CompensatedSum,
    s12: CompensatedSum,
    total: CompensatedSum,
}

impl Tally {
    fn leaf(&mut self, scores: &[u32], w: f64) {
        let n = self.n;
        let mut sorted = [0u32; DEFAULT_MAX_PLAYERS];
        sorted[..n].copy_from_slice(scores);
        sorted[..n].sort_unstable();
        for (j, bins) in self.top.iter_mut().enumerate() {
            bins[sorted[n - 1 - j] as usize].add(w);
        }
        let (a, b) = (scores[0] as f64, scores[1] as f64);
        self.first[scores[0] as usize].add(w);
        self.s1.add(w * a);
        self.s2.add(w * b);
        self.s11.add(w * a * a);
        self.s22.add(w * b * b);
        self.s12.add(w * a * b);
        self.total.add(w);
        for (ti, &cut) in self.cutoffs.iter().enumerate() {
            let count = scores.iter().filter(|&&s| s >= cut).count();
            self.exceed[ti][count].add(w);
            if scores[0] >= cut {
                self.first_exceed[ti].add(w);
                if scores[1] >= cut {
                    self.pair[ti].add(w);
                }
            }
        }
    }
}

// Hard ceiling for the fixed-size scratch buffers; the runtime limit is
// the `n_max` argument.
const DEFAULT_MAX_PLAYERS: usize = 8;

/// Enumerates all `3^(n(n-1)/2)` outcome assignments once and evaluates the
/// threshold-dependent quantities for every `t` in `ts`.
///
/// Weights are built incrementally along the enumeration tree, one factor
/// per game.
pub fn enumerate_grid(params: &ModelParams, ts: &[f64], n_max: usize) -> Result<Vec<ExactSummary>> {
    let n = params.n();
    let limit = n_max.min(DEFAULT_MAX_PLAYERS);
    if n > limit {
        return Err(Error::Capacity(format!(
            "n = {n} exceeds the enumeration limit n_max = {limit}"
        )));
    }
    let cutoffs = ts
        .iter()
        .map(|&t| {
            let x = threshold(n, t)?;
            let c = params.exceedance_cutoff(x).clamp(0, u32::MAX as i64);
            Ok((x, c))
        })
        .collect::<Result<Vec<_>>>()?;

    let bins = 2 * (n - 1) + 1;
    let zeros = |len| vec![CompensatedSum::default(); len];
    let mut tally = Tally {
        n,
        cutoffs: cutoffs.iter().map(|&(_, c)| c as u32).collect(),
        top: (0..n.min(3)).map(|_| zeros(bins)).collect(),
        first: zeros(bins),
        exceed: ts.iter().map(|_| zeros(n + 1)).collect(),
        first_exceed: zeros(ts.len()),
        pair: zeros(ts.len()),
        s1: Default::default(),
        s2: Default::default(),
        s11: Default::default(),
        s22: Default::default(),
        s12: Default::default(),
        total: Default::default(),
    };

    let games: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let decisive = (1.0 - params.p()) / 2.0;
    // (half-points to the first player, weight); zero-weight branches pruned
    let outcomes: Vec<(u32, f64)> = [(2, decisive), (1, params.p()), (0, decisive)]
        .into_iter()
        .filter(|&(_, w)| w > 0.0)
        .collect();

    let mut scores = [0u32; DEFAULT_MAX_PLAYERS];
    descend(&games, &outcomes, 0, 1.0, &mut scores, &mut tally);

    let total = tally.total.value();
    let to_pmf = |sums: &[CompensatedSum]| LatticePmf {
        origin: 0,
        probs: sums.iter().map(|s| s.value() / total).collect(),
    };
    let top: Vec<OrderStatExact> = tally
        .top
        .iter()
        .enumerate()
        .map(|(j, sums)| {
            let pmf = to_pmf(sums);
            OrderStatExact {
                j,
                mean: pmf.mean_points(),
                sd: pmf.sd_points(),
                pmf,
            }
        })
        .collect();
    let first_marginal = to_pmf(&tally.first);
    let m1 = tally.s1.value() / total;
    let m2 = tally.s2.value() / total;
    let v1 = tally.s11.value() / total - m1 * m1;
    let v2 = tally.s22.value() / total - m2 * m2;
    let cov = tally.s12.value() / total - m1 * m2;
    let corr_12 = cov / (v1 * v2).sqrt();

    Ok(ts
        .iter()
        .zip(&cutoffs)
        .enumerate()
        .map(|(ti, (&t, &(x, cutoff)))| ExactSummary {
            n,
            p: params.p(),
            t,
            x,
            cutoff,
            top: top.clone(),
            first_marginal: first_marginal.clone(),
            exceedance_pmf: tally.exceed[ti].iter().map(|s| s.value() / total).collect(),
            first_exceedance: tally.first_exceed[ti].value() / total,
            pair_exceedance: tally.pair[ti].value() / total,
            corr_12,
            total_weight: total,
        })
        .collect())
}

fn descend(
    games: &[(usize, usize)],
    outcomes: &[(u32, f64)],
    depth: usize,
    weight: f64,
    scores: &mut [u32; DEFAULT_MAX_PLAYERS],
    tally: &mut Tally,
) {
    let Some(&(i, j)) = games.get(depth) else {
        tally.leaf(&scores[..tally.n], weight);
        return;
    };
    for &(k, w) in outcomes {
        scores[i] += k;
        scores[j] += 2 - k;
        descend(games, outcomes, depth + 1, weight * w, scores, tally);
        scores[i] -= k;
        scores[j] -= 2 - k;
    }
}

/// Total-variation distance between `dist` (a pmf on `0, 1, ...`) and
/// Poisson(`lambda`), including the Poisson mass beyond `dist`'s support.
pub fn exact_tv(dist: &[f64], lambda: f64) -> Result<f64> {
    if lambda.is_nan() || lambda <= 0.0 || lambda.is_infinite() {
        return Err(domain(format!("Poisson mean {lambda} must be positive")));
    }
    let mut l1 = 0.0;
    let mut covered = 0.0;
    for (k, &d) in dist.iter().enumerate() {
        let q = poisson_pmf(k as u64, lambda)?;
        covered += q;
        l1 += (d - q).abs();
    }
    // Poisson tail past the support, summed until the cumulative mass passes
    // 1 - 1e-15 (or the terms die out past the mode).
    let mut k = dist.len() as u64;
    let mut tail = 0.0;
    while covered + tail < 1.0 - 1e-15 {
        let q = poisson_pmf(k, lambda)?;
        tail += q;
        if (k as f64) > lambda && q < 1e-18 {
            break;
        }
        k += 1;
    }
    Ok((0.5 * (l1 + tail)).clamp(0.0, 1.0))
}

/// Chen–Stein type bound `((1 - e^-lambda) / lambda) (lambda - Var W)` for
/// negatively related indicators.
pub fn tv_bound_a1(lambda: f64, var_w: f64) -> Result<f64> {
    if lambda.is_nan() || lambda <= 0.0 || lambda.is_infinite() {
        return Err(domain(format!("Poisson mean {lambda} must be positive")));
    }
    if var_w.is_nan() || var_w < 0.0 {
        return Err(domain(format!("variance {var_w} must be nonnegative")));
    }
    Ok(-(-lambda).exp_m1() / lambda * (lambda - var_w))
}
