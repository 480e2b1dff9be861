//! Correlation statistics and the hypergeometric enrichment tail.
//!
//! Everything here is a pure function over `f64`. Special functions
//! (log-gamma, regularized incomplete beta) are implemented locally so the
//! numerics are fully under our control.

use crate::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural logarithm of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1−x) = π / sin(πx)
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).abs().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// `ln C(n, k)`; `-inf` when `k > n`.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Counts for a hypergeometric enrichment test: a population of `population`
/// items of which `successes_in_population` are successes; a sample of
/// `sample` items contains `successes_in_sample` successes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ContingencyCounts {
    pub population: u64,
    pub successes_in_population: u64,
    pub sample: u64,
    pub successes_in_sample: u64,
}

impl ContingencyCounts {
    pub fn new(
        population: u64,
        successes_in_population: u64,
        sample: u64,
        successes_in_sample: u64,
    ) -> Result<Self> {
        let c = ContingencyCounts {
            population,
            successes_in_population,
            sample,
            successes_in_sample,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let ContingencyCounts {
            population: n_pop,
            successes_in_population: k_pop,
            sample: n,
            successes_in_sample: k,
        } = *self;
        if k_pop > n_pop {
            return Err(invalid(format!("K={k_pop} exceeds N={n_pop}")));
        }
        if n > n_pop {
            return Err(invalid(format!("n={n} exceeds N={n_pop}")));
        }
        if k > n.min(k_pop) {
            return Err(invalid(format!("k={k} exceeds min(n={n}, K={k_pop})")));
        }
        if n - k > n_pop - k_pop {
            return Err(invalid(format!(
                "n−k={} exceeds N−K={}",
                n - k,
                n_pop - k_pop
            )));
        }
        Ok(())
    }

    /// Smallest and largest attainable values of the sample success count.
    pub fn support(&self) -> (u64, u64) {
        let failures = self.population - self.successes_in_population;
        let lo = self.sample.saturating_sub(failures);
        let hi = self.sample.min(self.successes_in_population);
        (lo, hi)
    }
}

fn invalid(message: String) -> Error {
    Error::InvalidArgument(format!("contingency counts: {message}"))
}

/// `ln P(X = x)` for `X ~ Hypergeometric(N, K, n)` taken from `c` (the
/// observed `k` in `c` is ignored).
pub fn hypergeom_ln_pmf(c: &ContingencyCounts, x: u64) -> f64 {
    let (lo, hi) = c.support();
    if x < lo || x > hi {
        return f64::NEG_INFINITY;
    }
    ln_choose(c.successes_in_population, x)
        + ln_choose(c.population - c.successes_in_population, c.sample - x)
        - ln_choose(c.population, c.sample)
}

pub fn hypergeom_pmf(c: &ContingencyCounts, x: u64) -> f64 {
    hypergeom_ln_pmf(c, x).exp()
}

/// Inclusive upper tail `P(X ≥ k)` of the hypergeometric distribution.
///
/// Terms are accumulated from the top of the support downwards, so the
/// result is exactly non-increasing in `k` and tiny tails keep their
/// relative precision.
pub fn hypergeom_sf(c: &ContingencyCounts) -> Result<f64> {
    c.validate()?;
    let (lo, hi) = c.support();
    let k = c.successes_in_sample;
    if k <= lo {
        return Ok(1.0);
    }
    let mut tail = 0.0;
    for x in (k..=hi).rev() {
        tail += hypergeom_pmf(c, x);
    }
    Ok(tail.clamp(0.0, 1.0))
}

fn check_pair(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::UndefinedCorrelation(format!(
            "need at least 2 observations, got {}",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::UndefinedCorrelation("non-finite input".into()));
    }
    Ok(())
}

/// Pearson product-moment correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_pair(xs, ys)?;
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("constant input".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the mean of the positions they occupy.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len()
            && values[order[end]] == values[order[start]]
        {
            end += 1;
        }
        // positions start+1 ..= end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_pair(xs, ys)?;
    pearson(&average_ranks(xs), &average_ranks(ys))
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Two-tailed p-value of a Pearson correlation `r` over `n` observations,
/// from Student's t with `n − 2` degrees of freedom.
///
/// With `t = r·sqrt((n−2)/(1−r²))` the two-tailed mass is
/// `I_{ν/(ν+t²)}(ν/2, 1/2)`, and `ν/(ν+t²)` reduces to `1 − r²`.
pub fn pearson_pvalue_two_tailed(r: f64, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "p-value needs n ≥ 3 observations, got {n}"
        )));
    }
    if !r.is_finite() || r.abs() > 1.0 {
        return Err(Error::InvalidArgument(format!("correlation {r} outside [-1, 1]")));
    }
    if r.abs() == 1.0 {
        return Ok(0.0);
    }
    let dof = (n - 2) as f64;
    let x = 1.0 - r * r;
    Ok(regularized_incomplete_beta(dof / 2.0, 0.5, x).clamp(0.0, 1.0))
}
