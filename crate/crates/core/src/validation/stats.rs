//! Effect sizes, correlations and their confidence intervals.

use std::collections::HashMap;

use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};
use crate::validation::matching::MatchedPair;

/// Two-sided standard-normal critical value for a confidence `level`.
pub fn normal_critical(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "confidence level {level} not in (0, 1)"
        )));
    }
    let std = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(std.inverse_cdf(0.5 + level / 2.0))
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance with `n - 1` denominator.
fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Standardized mean difference with a normal-approximation interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectSize {
    pub d: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_treatment: usize,
    pub n_control: usize,
}

/// Interval `d ± z * sqrt((n_t + n_c)/(n_t n_c) + d²/(2(n_t + n_c)))`.
pub fn cohens_d_interval(d: f64, n_treatment: usize, n_control: usize, level: f64) -> Result<(f64, f64)> {
    let z = normal_critical(level)?;
    let (nt, nc) = (n_treatment as f64, n_control as f64);
    let se = ((nt + nc) / (nt * nc) + d * d / (2.0 * (nt + nc))).sqrt();
    Ok((d - z * se, d + z * se))
}

/// Cohen's d of `treatment` against `control`, pooled standard deviation,
/// with a 95% interval.
pub fn cohens_d(treatment: &[f64], control: &[f64]) -> Result<EffectSize> {
    cohens_d_at(treatment, control, 0.95)
}

pub fn cohens_d_at(treatment: &[f64], control: &[f64], level: f64) -> Result<EffectSize> {
    let smallest = treatment.len().min(control.len());
    if smallest < 2 {
        return Err(Error::GroupTooSmall {
            needed: 2,
            found: smallest,
        });
    }
    let (nt, nc) = (treatment.len() as f64, control.len() as f64);
    let pooled = (((nt - 1.0) * variance(treatment) + (nc - 1.0) * variance(control)) / (nt + nc - 2.0)).sqrt();
    if pooled == 0.0 || !pooled.is_finite() {
        return Err(Error::ZeroVariance("pooled standard deviation is zero"));
    }
    let d = (mean(treatment) - mean(control)) / pooled;
    let (ci_low, ci_high) = cohens_d_interval(d, treatment.len(), control.len(), level)?;
    Ok(EffectSize {
        d,
        ci_low,
        ci_high,
        n_treatment: treatment.len(),
        n_control: control.len(),
    })
}

/// Converts d to a point-biserial correlation, `d / sqrt(d² + (n_t+n_c)²/(n_t n_c))`.
pub fn d_to_r(d: f64, n_treatment: usize, n_control: usize) -> Result<f64> {
    if n_treatment == 0 || n_control == 0 {
        return Err(Error::GroupTooSmall { needed: 1, found: 0 });
    }
    let (nt, nc) = (n_treatment as f64, n_control as f64);
    let a = (nt + nc).powi(2) / (nt * nc);
    Ok(d / (d * d + a).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationResult {
    pub r: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
    /// Two-sided p-value of the t-test on `r` with `n - 2` degrees of freedom.
    pub p_value: f64,
}

impl CorrelationResult {
    pub fn significance_note(&self) -> &'static str {
        match self.p_value {
            p if p < 0.001 => "p < 0.001",
            p if p < 0.01 => "p < 0.01",
            p if p < 0.05 => "p < 0.05",
            _ => "n.s.",
        }
    }
}

/// Fisher-z interval `tanh(atanh(r) ± z / sqrt(n - 3))`.
pub fn fisher_interval(r: f64, n: usize, level: f64) -> Result<(f64, f64)> {
    if n < 4 {
        return Err(Error::GroupTooSmall { needed: 4, found: n });
    }
    if r.abs() >= 1.0 {
        return Ok((r, r));
    }
    let half = normal_critical(level)? / ((n - 3) as f64).sqrt();
    let z = r.atanh();
    Ok(((z - half).tanh(), (z + half).tanh()))
}

fn correlation_p_value(r: f64, n: usize) -> f64 {
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let df = (n - 2) as f64;
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    2.0 * (1.0 - dist.cdf(t.abs()))
}

/// Pearson product-moment correlation with a Fisher-z interval.
pub fn pearson_with_ci(x: &[f64], y: &[f64], level: f64) -> Result<CorrelationResult> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    let n = x.len();
    if n < 4 {
        return Err(Error::GroupTooSmall { needed: 4, found: n });
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance("correlation input has no variance"));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let (ci_low, ci_high) = fisher_interval(r, n, level)?;
    Ok(CorrelationResult {
        r,
        ci_low,
        ci_high,
        n,
        p_value: correlation_p_value(r, n),
    })
}

/// Ranks with ties sharing their average rank, 1-based.
fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation: Pearson correlation of the ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    pearson_with_ci(&ranks(x), &ranks(y), 0.95).map(|c| c.r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dominance {
    /// Share of pairs in which the control scores strictly higher.
    pub fraction: f64,
    pub control_higher: usize,
    pub ties: usize,
    pub pairs: usize,
}

/// Fraction of pairs whose control scored strictly above the treatment author.
///
/// Ties count as not dominant and are reported separately.
pub fn pair_dominance_fraction(pairs: &[MatchedPair], scores: &HashMap<String, f64>) -> Result<Dominance> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("no pairs".into()));
    }
    let score = |id: &String| scores.get(id).copied().ok_or_else(|| Error::MissingScore(id.clone()));
    let (mut higher, mut ties) = (0, 0);
    for pair in pairs {
        let (t, c) = (score(&pair.treatment_id)?, score(&pair.control_id)?);
        if c > t {
            higher += 1;
        } else if c == t {
            ties += 1;
        }
    }
    Ok(Dominance {
        fraction: higher as f64 / pairs.len() as f64,
        control_higher: higher,
        ties,
        pairs: pairs.len(),
    })
}
