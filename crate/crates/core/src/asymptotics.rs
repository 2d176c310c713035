//! Limit laws for the top scores.
//!
//! With `x_n(t) = a_n t + b_n`, the number of players whose normalized score
//! exceeds `x_n(t)` is asymptotically Poisson with mean `e^-t`, and the
//! `(j+1)`-th largest normalized score has limit CDF
//! `G(t) (1 + e^-t + ... + e^-jt / j!)` with `G` the Gumbel CDF.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::exact::{single_score_pmf, tail_probability};
use crate::model::ModelParams;

/// Euler–Mascheroni constant, the mean of the standard Gumbel law.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// `pi^2 / 6`, the variance of the standard Gumbel law.
pub const PI_SQ_OVER_6: f64 = 1.644_934_066_848_226_4;
/// Largest rank offset accepted by the extrapolated harmonic-offset moments.
pub const MAX_EXTENDED_J: u32 = 30;

/// Centering and scaling for the maximum of `n` normalized scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormConstants {
    pub n: usize,
    pub a: f64,
    pub b: f64,
}

impl NormConstants {
    /// `a_n = (2 ln n)^(-1/2)`,
    /// `b_n = (2 ln n)^(1/2) - a_n (ln ln n + ln 4 pi) / 2`.
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(domain(format!("normalizing constants need n >= 2, got {n}")));
        }
        let ln_n = (n as f64).ln();
        let root = (2.0 * ln_n).sqrt();
        let a = 1.0 / root;
        let b = root - 0.5 * a * (ln_n.ln() + (4.0 * std::f64::consts::PI).ln());
        Ok(NormConstants { n, a, b })
    }

    pub fn threshold(&self, t: f64) -> f64 {
        self.a * t + self.b
    }
}

pub fn norm_constants(n: usize) -> Result<NormConstants> {
    NormConstants::new(n)
}

/// `x_n(t) = a_n t + b_n`.
pub fn threshold(n: usize, t: f64) -> Result<f64> {
    Ok(NormConstants::new(n)?.threshold(t))
}

pub fn gumbel_cdf(t: f64) -> f64 {
    (-(-t).exp()).exp()
}

/// Limit CDF of the `(j+1)`-th largest normalized score.
pub fn limit_cdf_order(j: i64, t: f64) -> Result<f64> {
    if j < 0 {
        return Err(domain(format!("rank offset j = {j} must be nonnegative")));
    }
    let lambda = (-t).exp();
    if lambda.is_infinite() {
        return Ok(0.0);
    }
    if lambda == 0.0 {
        return Ok(1.0);
    }
    // G(t) sum_{k<=j} lambda^k / k! = P(Poisson(lambda) <= j)
    let j = j as u64;
    if lambda < (j + 1) as f64 {
        // upper tail is the small side; the complement keeps monotone rounding near 1
        let mut k = j + 1;
        let mut term = poisson_pmf(k, lambda)?;
        let mut tail = 0.0;
        while term > tail * 1e-17 {
            tail += term;
            k += 1;
            term *= lambda / k as f64;
        }
        Ok((1.0 - tail).clamp(0.0, 1.0))
    } else {
        let mut k = j;
        let mut term = poisson_pmf(k, lambda)?;
        let mut acc = 0.0;
        while term > acc * 1e-17 {
            acc += term;
            if k == 0 {
                break;
            }
            term *= k as f64 / lambda;
            k -= 1;
        }
        Ok(acc.min(1.0))
    }
}

/// `e^-lambda lambda^k / k!`, evaluated in log space.
pub fn poisson_pmf(k: u64, lambda: f64) -> Result<f64> {
    if lambda.is_nan() || lambda <= 0.0 || lambda.is_infinite() {
        return Err(domain(format!("Poisson mean {lambda} must be positive")));
    }
    let kf = k as f64;
    let log_p = kf * lambda.ln() - lambda - ln_factorial(k);
    Ok(log_p.exp())
}

fn ln_factorial(k: u64) -> f64 {
    if k < 2 {
        return 0.0;
    }
    if k <= 170 {
        return (2..=k).map(|i| (i as f64).ln()).sum();
    }
    // Stirling series; relative error far below 1e-15 for k > 170
    let x = k as f64;
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + 1.0 / (12.0 * x)
        - 1.0 / (360.0 * x.powi(3))
}

/// `1 - Phi(x)` through the complementary error function.
pub fn std_normal_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Normal-approximation moments of `s_(n-j)`, on the normalized and the
/// points scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentApprox {
    pub j: u32,
    pub e_star: f64,
    pub sd_star: f64,
    pub e_hat: f64,
    pub sd_hat: f64,
    /// True when `j > 2`: the harmonic offsets are extrapolated.
    pub extrapolated: bool,
}

/// `(H_j, H^(2)_j)` with `H_j = sum 1/k` and `H^(2)_j = sum 1/k^2`, summed as
/// exact fractions.
pub fn harmonic_offsets(j: u32) -> (f64, f64) {
    fn gcd(mut a: u128, mut b: u128) -> u128 {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    }
    let (mut num1, mut den1) = (0u128, 1u128);
    let (mut num2, mut den2) = (0u128, 1u128);
    for k in 1..=j as u128 {
        num1 = num1 * k + den1;
        den1 *= k;
        let g = gcd(num1, den1);
        (num1, den1) = (num1 / g, den1 / g);
        num2 = num2 * k * k + den2;
        den2 *= k * k;
        let g = gcd(num2, den2);
        (num2, den2) = (num2 / g, den2 / g);
    }
    (num1 as f64 / den1 as f64, num2 as f64 / den2 as f64)
}

/// Gumbel-limit moments of `s_(n-j)` for `j` in `{0, 1, 2}`.
///
/// `e_star = b_n + (gamma - H_j) a_n`, `sd_star = sqrt(pi^2/6 - H^(2)_j) a_n`,
/// mapped to points by `e_hat = E_n + sigma_n e_star`, `sd_hat = sigma_n sd_star`.
pub fn approx_moments(j: i64, params: &ModelParams) -> Result<MomentApprox> {
    if !(0..=2).contains(&j) {
        return Err(domain(format!(
            "rank offset j = {j} outside {{0, 1, 2}}; use approx_moments_extended"
        )));
    }
    approx_moments_extended(j as u32, params)
}

/// [`approx_moments`] for any `j <= MAX_EXTENDED_J`. Values for `j > 2`
/// follow the same harmonic pattern and are flagged `extrapolated`.
pub fn approx_moments_extended(j: u32, params: &ModelParams) -> Result<MomentApprox> {
    if j > MAX_EXTENDED_J {
        return Err(domain(format!("rank offset j = {j} exceeds {MAX_EXTENDED_J}")));
    }
    if j as usize >= params.n() {
        return Err(domain(format!(
            "rank offset j = {j} needs at least {} players",
            j + 1
        )));
    }
    let nc = NormConstants::new(params.n())?;
    let (h1, h2) = harmonic_offsets(j);
    let e_star = nc.b + (EULER_GAMMA - h1) * nc.a;
    let sd_star = (PI_SQ_OVER_6 - h2).sqrt() * nc.a;
    let (mean, sd) = (params.mean_score(), params.score_sd());
    Ok(MomentApprox {
        j,
        e_star,
        sd_star,
        e_hat: mean + sd * e_star,
        sd_hat: sd * sd_star,
        extrapolated: j > 2,
    })
}

/// The expanded form of the maximum's mean approximation:
/// `(n-1)/2 + sqrt((n-1) ln n (1-p) / 2)
///  + sqrt((n-1)(1-p) / (2 ln n)) (gamma/2 - (ln ln n + ln 4 pi)/4)`.
pub fn expanded_max_mean(params: &ModelParams) -> f64 {
    let n = params.n() as f64;
    let q = 1.0 - params.p();
    let ln_n = n.ln();
    (n - 1.0) / 2.0
        + ((n - 1.0) * ln_n * q / 2.0).sqrt()
        + ((n - 1.0) * q / (2.0 * ln_n)).sqrt()
            * (EULER_GAMMA / 2.0 - 0.25 * (ln_n.ln() + (4.0 * std::f64::consts::PI).ln()))
}

/// Finite-`n` versus limit comparison at one `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssertionDiagnostics {
    pub t: f64,
    pub x: f64,
    /// `P(s*_1 > x_n(t))`, exact.
    pub pi1: f64,
    /// `1 - Phi(x_n(t))`.
    pub normal_tail: f64,
    pub ratio_a2: f64,
    pub n_pi1: f64,
    /// `e^-t`.
    pub limit_e_t: f64,
}

pub fn assertion_diagnostics(params: &ModelParams, t: f64) -> Result<AssertionDiagnostics> {
    let pmf = single_score_pmf(params);
    let x = threshold(params.n(), t)?;
    let pi1 = tail_probability(&pmf, params, x);
    let normal_tail = std_normal_tail(x);
    Ok(AssertionDiagnostics {
        t,
        x,
        pi1,
        normal_tail,
        ratio_a2: pi1 / normal_tail,
        n_pi1: params.n() as f64 * pi1,
        limit_e_t: (-t).exp(),
    })
}
