//! Descriptive and inferential statistics: sample summaries, Student's and
//! Welch's two-sample t-tests from raw data or published summary statistics,
//! and an exact Student-t CDF via the regularized incomplete beta function
//! (Lentz continued fraction), so p-values need no table lookup.

use serde::{Deserialize, Serialize};
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("invalid summary statistics: {0}")]
    BadSummary(String),
    #[error("both samples have zero variance; the t statistic is undefined")]
    DegenerateVariance,
    #[error("degrees of freedom must be positive, got {0}")]
    BadDf(f64),
}

/// Sample mean, n-1 standard deviation, and size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mean: f64,
    pub stdev: f64,
    pub n: u64,
}

impl SummaryStats {
    pub fn new(mean: f64, stdev: f64, n: u64) -> Result<Self, StatsError> {
        if n < 2 {
            return Err(StatsError::TooFewSamples(n as usize));
        }
        if !mean.is_finite() || !stdev.is_finite() {
            return Err(StatsError::BadSummary(format!(
                "non-finite mean {mean} or stdev {stdev}"
            )));
        }
        if stdev < 0.0 {
            return Err(StatsError::BadSummary(format!("negative stdev {stdev}")));
        }
        Ok(SummaryStats { mean, stdev, n })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TTestKind {
    Student,
    Welch,
}

impl TTestKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TTestKind::Student => "student",
            TTestKind::Welch => "welch",
        }
    }
}

impl FromStr for TTestKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "student" => Ok(TTestKind::Student),
            "welch" => Ok(TTestKind::Welch),
            _ => Err(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t: f64,
    pub df: f64,
    pub p_two_sided: f64,
    pub kind: TTestKind,
}

/// Mean and n-1 sample standard deviation. Errors below two samples.
pub fn summarize(sample: &[f64]) -> Result<SummaryStats, StatsError> {
    let n = sample.len();
    if n < 2 {
        return Err(StatsError::TooFewSamples(n));
    }
    let mean = sample.iter().sum::<f64>() / n as f64;
    let ss: f64 = sample.iter().map(|x| (x - mean) * (x - mean)).sum();
    let stdev = (ss / (n - 1) as f64).sqrt();
    Ok(SummaryStats { mean, stdev, n: n as u64 })
}

/// Mean and n-1 stdev without the n >= 2 requirement: a single observation
/// has standard deviation zero. Used for descriptive reports.
pub fn mean_and_stdev(sample: &[f64]) -> (f64, f64) {
    if sample.is_empty() {
        return (0.0, 0.0);
    }
    let n = sample.len();
    let mean = sample.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = sample.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

/// Independent two-sample t-test from summary statistics. Student pools the
/// variances with df = n1+n2-2; Welch uses per-sample variances with the
/// Welch-Satterthwaite df. The two-sided p-value comes from the exact t CDF.
pub fn t_test(
    a: &SummaryStats,
    b: &SummaryStats,
    kind: TTestKind,
) -> Result<TTestResult, StatsError> {
    if a.n < 2 || b.n < 2 {
        return Err(StatsError::TooFewSamples(a.n.min(b.n) as usize));
    }
    let (n1, n2) = (a.n as f64, b.n as f64);
    let (var1, var2) = (a.stdev * a.stdev, b.stdev * b.stdev);
    let (se, df) = match kind {
        TTestKind::Student => {
            let pooled = ((n1 - 1.0) * var1 + (n2 - 1.0) * var2) / (n1 + n2 - 2.0);
            let se = (pooled * (1.0 / n1 + 1.0 / n2)).sqrt();
            (se, n1 + n2 - 2.0)
        }
        TTestKind::Welch => {
            let (w1, w2) = (var1 / n1, var2 / n2);
            let se = (w1 + w2).sqrt();
            let df = (w1 + w2) * (w1 + w2) / (w1 * w1 / (n1 - 1.0) + w2 * w2 / (n2 - 1.0));
            (se, df)
        }
    };
    if se == 0.0 || !df.is_finite() {
        return Err(StatsError::DegenerateVariance);
    }
    let t = (a.mean - b.mean) / se;
    // Two-sided p = P(|T| >= |t|) = I_x(df/2, 1/2) with x = df/(df + t^2).
    let p_two_sided = inc_beta(df / (df + t * t), df / 2.0, 0.5);
    Ok(TTestResult { t, df, p_two_sided, kind })
}

/// Raw-sample variant: summarizes both samples, then delegates to [`t_test`].
pub fn t_test_raw(a: &[f64], b: &[f64], kind: TTestKind) -> Result<TTestResult, StatsError> {
    t_test(&summarize(a)?, &summarize(b)?, kind)
}

/// Cumulative probability of Student's t distribution at `t` with `df`
/// degrees of freedom, absolute error below 1e-10.
pub fn student_t_cdf(t: f64, df: f64) -> Result<f64, StatsError> {
    if df.is_nan() || df <= 0.0 {
        return Err(StatsError::BadDf(df));
    }
    if t == 0.0 {
        return Ok(0.5);
    }
    let x = df / (df + t * t);
    let both_tails = inc_beta(x, df / 2.0, 0.5);
    Ok(if t > 0.0 {
        1.0 - 0.5 * both_tails
    } else {
        0.5 * both_tails
    })
}

// Lanczos approximation (g = 607/128, 15 terms), accurate to ~1e-15 in the
// range the CDF needs.
const LANCZOS_G: f64 = 4.7421875;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 15] = [
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
];

pub(crate) fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection keeps the small-argument case accurate.
        let s = (std::f64::consts::PI * x).sin();
        return std::f64::consts::PI.ln() - s.ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let tmp = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * tmp.ln() - tmp + acc.ln()
}

/// Regularized incomplete beta function I_x(a, b) via the Lentz-evaluated
/// continued fraction, switched at the symmetry point for convergence.
pub(crate) fn inc_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front =
        ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(x, a, b) / a
    } else {
        1.0 - front * beta_cf(1.0 - x, b, a) / b
    }
}

fn beta_cf(x: f64, a: f64, b: f64) -> f64 {
    const MAX_ITER: usize = 500;
    const EPS: f64 = 1e-16;
    const FPMIN: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summarize_constant_and_two_point_samples() {
        let s = summarize(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(s.mean, 1.0);
        assert_eq!(s.stdev, 0.0);

        let s = summarize(&[0.0, 2.0]).unwrap();
        assert_eq!(s.mean, 1.0);
        assert!((s.stdev - 2.0_f64.sqrt()).abs() < 1e-15);

        let s = summarize(&[0.8, 1.0]).unwrap();
        assert!((s.mean - 0.9).abs() < 1e-15);
        assert!((s.stdev - 0.1414213562373095).abs() < 1e-12);

        assert!(matches!(
            summarize(&[1.0]),
            Err(StatsError::TooFewSamples(1))
        ));
    }

    #[test]
    fn identical_summaries_give_t_zero_p_one() {
        let s = SummaryStats::new(0.5, 0.1, 100).unwrap();
        for kind in [TTestKind::Student, TTestKind::Welch] {
            let r = t_test(&s, &s, kind).unwrap();
            assert_eq!(r.t, 0.0);
            assert_eq!(r.p_two_sided, 1.0);
        }
    }

    #[test]
    fn welch_reproduces_ratio_statistics_from_rounded_summaries() {
        let eno = SummaryStats::new(0.92, 0.33, 2000).unwrap();
        let ptt = SummaryStats::new(0.71, 0.28, 2000).unwrap();
        let pto = SummaryStats::new(0.75, 0.32, 2000).unwrap();

        let r = t_test(&eno, &ptt, TTestKind::Welch).unwrap();
        assert!((r.t - 21.700).abs() < 0.01, "t = {}", r.t);
        assert!(r.p_two_sided < 0.001);

        let r = t_test(&eno, &pto, TTestKind::Welch).unwrap();
        assert!((r.t - 16.539).abs() < 0.01, "t = {}", r.t);
        assert!(r.p_two_sided < 0.001);
    }

    #[test]
    fn student_reproduces_mode_comparison_from_rounded_summaries() {
        let vwc = SummaryStats::new(0.43, 0.13, 1000).unwrap();
        let vwoc = SummaryStats::new(0.38, 0.12, 1000).unwrap();
        let r = t_test(&vwc, &vwoc, TTestKind::Student).unwrap();
        assert!((r.t - 8.937).abs() < 0.01, "t = {}", r.t);
        assert_eq!(r.df, 1998.0);
        assert!(r.p_two_sided < 0.001);
    }

    #[test]
    fn hand_computed_two_point_t() {
        // a = [0, 2]: mean 1, var 2; b = [5, 7]: mean 6, var 2.
        // pooled var 2, se = sqrt(2 * (1/2 + 1/2)) = sqrt(2),
        // t = (1 - 6)/sqrt(2) = -3.5355339059327378, df = 2.
        let r = t_test_raw(&[0.0, 2.0], &[5.0, 7.0], TTestKind::Student).unwrap();
        assert!((r.t + 3.5355339059327378).abs() < 1e-12);
        assert_eq!(r.df, 2.0);
    }

    #[test]
    fn antisymmetry_is_exact() {
        let a = SummaryStats::new(0.51, 0.14, 2000).unwrap();
        let b = SummaryStats::new(0.43, 0.2, 2000).unwrap();
        for kind in [TTestKind::Student, TTestKind::Welch] {
            let ab = t_test(&a, &b, kind).unwrap();
            let ba = t_test(&b, &a, kind).unwrap();
            assert_eq!(ab.t.to_bits(), (-ba.t).to_bits());
            assert_eq!(ab.df.to_bits(), ba.df.to_bits());
            assert_eq!(ab.p_two_sided.to_bits(), ba.p_two_sided.to_bits());
        }
    }

    #[test]
    fn welch_df_within_bounds() {
        let a = SummaryStats::new(0.0, 1.0, 10).unwrap();
        let b = SummaryStats::new(1.0, 3.0, 25).unwrap();
        let r = t_test(&a, &b, TTestKind::Welch).unwrap();
        assert!(r.df >= 9.0 - 1e-9);
        assert!(r.df <= 33.0 + 1e-9);
    }

    #[test]
    fn degenerate_variances_error() {
        let a = SummaryStats::new(1.0, 0.0, 10).unwrap();
        let b = SummaryStats::new(2.0, 0.0, 10).unwrap();
        assert!(matches!(
            t_test(&a, &b, TTestKind::Welch),
            Err(StatsError::DegenerateVariance)
        ));
        assert!(matches!(
            t_test(&a, &b, TTestKind::Student),
            Err(StatsError::DegenerateVariance)
        ));
    }

    #[test]
    fn cdf_symmetry_and_midpoint() {
        assert_eq!(student_t_cdf(0.0, 7.0).unwrap(), 0.5);
        for df in [1.0, 2.0, 5.0, 30.0, 1000.0] {
            for t in [0.3, 1.0, 2.5, 9.0] {
                let hi = student_t_cdf(t, df).unwrap();
                let lo = student_t_cdf(-t, df).unwrap();
                assert!((hi + lo - 1.0).abs() < 1e-14, "df={df} t={t}");
            }
        }
    }

    #[test]
    fn cdf_df1_matches_arctangent_closed_form() {
        for t in [-10.0f64, -2.0, -1.0, -0.25, 0.5, 1.0, 3.0, 10.0] {
            let exact = 0.5 + t.atan() / std::f64::consts::PI;
            let got = student_t_cdf(t, 1.0).unwrap();
            assert!((got - exact).abs() < 1e-10, "t={t}: {got} vs {exact}");
        }
        assert!((student_t_cdf(1.0, 1.0).unwrap() - 0.75).abs() < 1e-10);
    }

    #[test]
    fn cdf_approaches_normal_for_large_df() {
        let v = student_t_cdf(1.96, 1e6).unwrap();
        assert!((0.9749..=0.9751).contains(&v), "got {v}");
    }

    #[test]
    fn non_positive_df_is_an_error() {
        assert!(matches!(student_t_cdf(1.0, 0.0), Err(StatsError::BadDf(_))));
        assert!(matches!(student_t_cdf(1.0, -3.0), Err(StatsError::BadDf(_))));
    }

    #[test]
    fn ln_gamma_spot_checks() {
        assert!((ln_gamma(0.5) - 0.5723649429247001).abs() < 1e-13);
        assert!((ln_gamma(1.0)).abs() < 1e-13);
        assert!((ln_gamma(5.0) - 24.0_f64.ln()).abs() < 1e-12);
    }
}
