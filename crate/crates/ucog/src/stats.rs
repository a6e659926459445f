//! Correlation and significance machinery applied to mined patterns.
//!
//! The core move: correlations are computed over *patterns*, not raw rows,
//! so `n` is the pattern count. Patterns weight every cluster of the input
//! domain equally, which removes the bias a heavily sampled cluster would
//! otherwise exert on the correlation.
//!
//! Numeric targets pair each feature with the patterns' running target mean
//! (plain Pearson). Categorical targets get one point-biserial correlation
//! per class, against the indicator "this pattern's single class is `c`".

use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dataset::TargetKind;
use crate::error::{Error, Result};
use crate::patterns::Pattern;

/// One correlation with its two-tailed significance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub p: f64,
    /// Number of points the correlation was computed over.
    pub n: usize,
    /// True when either input vector was constant; degenerate entries carry
    /// `r = 0`, `p = 1` so they can never pass a selection filter.
    pub degenerate: bool,
}

/// Correlation entries for a single feature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureCorrelation {
    Numeric(CorrelationResult),
    /// One entry per class, parallel to [`FeatureCorrelationReport::classes`].
    Categorical(Vec<CorrelationResult>),
}

impl FeatureCorrelation {
    /// All correlation entries for this feature, regardless of target kind.
    pub fn results(&self) -> &[CorrelationResult] {
        match self {
            FeatureCorrelation::Numeric(r) => std::slice::from_ref(r),
            FeatureCorrelation::Categorical(rs) => rs,
        }
    }
}

/// Per-feature correlations over a pattern set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureCorrelationReport {
    pub target_kind: TargetKind,
    /// Sorted class labels (empty for numeric targets).
    pub classes: Vec<String>,
    pub pattern_count: usize,
    /// One entry per feature, in feature order.
    pub features: Vec<FeatureCorrelation>,
}

impl FeatureCorrelationReport {
    pub fn feature_count(&self) -> usize {
        self.features.len()
    }

    /// CSV rows: feature, class, r, p, degenerate.
    pub fn write_csv<W: Write>(&self, feature_names: &[String], w: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(w);
        writer.write_record(["feature", "class", "r", "p", "degenerate"])?;
        for (j, entry) in self.features.iter().enumerate() {
            let name = feature_names
                .get(j)
                .map(String::as_str)
                .unwrap_or("")
                .to_string();
            match entry {
                FeatureCorrelation::Numeric(c) => {
                    writer.write_record([
                        name.clone(),
                        String::new(),
                        c.r.to_string(),
                        c.p.to_string(),
                        c.degenerate.to_string(),
                    ])?;
                }
                FeatureCorrelation::Categorical(cs) => {
                    for (class, c) in self.classes.iter().zip(cs) {
                        writer.write_record([
                            name.clone(),
                            class.clone(),
                            c.r.to_string(),
                            c.p.to_string(),
                            c.degenerate.to_string(),
                        ])?;
                    }
                }
            }
        }
        writer.flush()?;
        Ok(())
    }
}

/// Sample Pearson correlation with its two-tailed t-test p-value.
///
/// A constant input vector makes the correlation undefined; such calls
/// return a degenerate result (`r = 0`, `p = 1`) instead of an error.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::TooFewPoints(n));
    }
    if is_constant(x) || is_constant(y) {
        return Ok(CorrelationResult {
            r: 0.0,
            p: 1.0,
            n,
            degenerate: true,
        });
    }
    let mx = mean(x);
    let my = mean(y);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(CorrelationResult {
            r: 0.0,
            p: 1.0,
            n,
            degenerate: true,
        });
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    Ok(CorrelationResult {
        r,
        p: p_value(r, n)?,
        n,
        degenerate: false,
    })
}

/// Point-biserial correlation of real values against a binary indicator.
///
/// Identically Pearson on the 0/1 encoding of the indicator.
pub fn point_biserial(values: &[f64], indicator: &[bool]) -> Result<CorrelationResult> {
    if values.len() != indicator.len() {
        return Err(Error::LengthMismatch {
            left: values.len(),
            right: indicator.len(),
        });
    }
    let ind: Vec<f64> = indicator.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    pearson(values, &ind)
}

/// Two-tailed p-value of a sample correlation under the Student-t null.
///
/// With `t = r * sqrt((n-2) / (1-r^2))` and `df = n - 2`, the two-tailed
/// probability `2 * (1 - F_t(|t|))` reduces to the regularized incomplete
/// beta `I_{1-r^2}(df/2, 1/2)`, which is what this evaluates.
pub fn p_value(r: f64, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::TooFewPoints(n));
    }
    let r = r.clamp(-1.0, 1.0);
    // (1-r)(1+r) keeps precision near |r| = 1 where 1 - r*r cancels.
    let one_minus_r2 = (1.0 - r) * (1.0 + r);
    if one_minus_r2 <= 0.0 {
        return Ok(0.0);
    }
    let df = (n - 2) as f64;
    Ok(reg_inc_beta(df / 2.0, 0.5, one_minus_r2).clamp(0.0, 1.0))
}

/// Correlates every feature of a pattern set with the target.
///
/// Numeric targets: Pearson of the feature values against the patterns'
/// target means. Categorical targets: one point-biserial per class, which
/// requires every pattern to carry a single class.
pub fn correlate_patterns(
    patterns: &[Pattern],
    target_kind: TargetKind,
) -> Result<FeatureCorrelationReport> {
    if patterns.len() < 3 {
        return Err(Error::TooFewPatterns(patterns.len()));
    }
    let feature_count = patterns[0].vector.len();
    for p in patterns {
        if p.vector.len() != feature_count {
            return Err(Error::LengthMismatch {
                left: p.vector.len(),
                right: feature_count,
            });
        }
    }
    match target_kind {
        TargetKind::Numeric => {
            let targets: Vec<f64> = patterns
                .iter()
                .map(|p| {
                    p.target_mean.ok_or_else(|| {
                        Error::KindMismatch("pattern has no numeric target mean".into())
                    })
                })
                .collect::<Result<_>>()?;
            let features = (0..feature_count)
                .map(|j| {
                    let col: Vec<f64> = patterns.iter().map(|p| p.vector[j]).collect();
                    Ok(FeatureCorrelation::Numeric(pearson(&col, &targets)?))
                })
                .collect::<Result<_>>()?;
            Ok(FeatureCorrelationReport {
                target_kind,
                classes: Vec::new(),
                pattern_count: patterns.len(),
                features,
            })
        }
        TargetKind::Categorical => {
            let pure: Vec<&str> = patterns
                .iter()
                .enumerate()
                .map(|(i, p)| p.pure_class.as_deref().ok_or(Error::ImpurePattern(i)))
                .collect::<Result<_>>()?;
            let classes: Vec<String> = patterns
                .iter()
                .flat_map(|p| p.label_hist.keys().cloned())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let features = (0..feature_count)
                .map(|j| {
                    let col: Vec<f64> = patterns.iter().map(|p| p.vector[j]).collect();
                    let per_class = classes
                        .iter()
                        .map(|c| {
                            let ind: Vec<bool> = pure.iter().map(|&pc| pc == c).collect();
                            point_biserial(&col, &ind)
                        })
                        .collect::<Result<_>>()?;
                    Ok(FeatureCorrelation::Categorical(per_class))
                })
                .collect::<Result<_>>()?;
            Ok(FeatureCorrelationReport {
                target_kind,
                classes,
                pattern_count: patterns.len(),
                features,
            })
        }
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn is_constant(xs: &[f64]) -> bool {
    xs.iter().all(|&v| v == xs[0])
}

/// Regularized incomplete beta function `I_x(a, b)`.
///
/// Continued-fraction evaluation (modified Lentz), accurate to machine
/// precision for the moderate `a`, `b` used by the t-test.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let front = (a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b)).exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Lanczos approximation of `ln Γ(x)` (g = 7, 9 coefficients).
fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection: Γ(x) Γ(1-x) = π / sin(πx)
        return std::f64::consts::PI.ln()
            - (std::f64::consts::PI * x).sin().ln()
            - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Continued fraction for the incomplete beta (Numerical-Recipes style).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;

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
    for m in 1..=MAX_ITER {
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

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Independent raw-moment oracle for Pearson, used nowhere in the
    /// implementation path above.
    pub(crate) fn pearson_oracle(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let sx: f64 = x.iter().sum();
        let sy: f64 = y.iter().sum();
        let sxx: f64 = x.iter().map(|v| v * v).sum();
        let syy: f64 = y.iter().map(|v| v * v).sum();
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
    }

    #[test]
    fn pearson_matches_hand_computed_value() {
        // deviations: cov-sum 4, var-sums 5 and 5 -> r = 4 / 5
        let c = pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert_abs_diff_eq!(c.r, 0.8, epsilon = 1e-15);
        assert!(!c.degenerate);
    }

    #[test]
    fn pearson_perfect_and_degenerate() {
        let x = [1.0, 2.0, 3.0];
        let c = pearson(&x, &x).unwrap();
        assert_abs_diff_eq!(c.r, 1.0, epsilon = 1e-15);
        assert_eq!(c.p, 0.0);

        let c = pearson(&x, &[5.0, 5.0, 5.0]).unwrap();
        assert!(c.degenerate);
        assert_eq!((c.r, c.p), (0.0, 1.0));
    }

    #[test]
    fn pearson_rejects_bad_shapes() {
        assert!(matches!(
            pearson(&[1.0, 2.0], &[1.0]).unwrap_err(),
            Error::LengthMismatch { .. }
        ));
        assert!(matches!(
            pearson(&[1.0, 2.0], &[1.0, 2.0]).unwrap_err(),
            Error::TooFewPoints(2)
        ));
    }

    #[test]
    fn p_value_closed_form_df2() {
        // df = 2: F(t) = 1/2 + t / (2 sqrt(t^2 + 2)); r = 0.8, n = 4 gives
        // t = 1.8856.., F = 0.9, p = 0.2
        assert_abs_diff_eq!(p_value(0.8, 4).unwrap(), 0.2, epsilon = 1e-12);
    }

    #[test]
    fn p_value_limits() {
        assert_abs_diff_eq!(p_value(0.0, 17).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(p_value(1.0, 5).unwrap(), 0.0);
        assert_eq!(p_value(-1.0, 5).unwrap(), 0.0);
    }

    #[test]
    fn incomplete_beta_matches_df1_df2_closed_forms() {
        // df = 1: p = 1 - (2/pi) atan(t); df = 2: p = 1 - t / sqrt(t^2 + 2)
        for i in 1..50 {
            let r = i as f64 / 50.0;
            let t1 = r * (1.0 / (1.0 - r * r)).sqrt();
            let expect1 = 1.0 - 2.0 / std::f64::consts::PI * t1.atan();
            assert_abs_diff_eq!(p_value(r, 3).unwrap(), expect1, epsilon = 1e-10);

            let t2 = r * (2.0 / (1.0 - r * r)).sqrt();
            let expect2 = 1.0 - t2 / (t2 * t2 + 2.0).sqrt();
            assert_abs_diff_eq!(p_value(r, 4).unwrap(), expect2, epsilon = 1e-10);
        }
    }

    #[test]
    fn point_biserial_matches_hand_computed_value() {
        // group means 3.5 and 1.5, population sd sqrt(1.25) -> r = 2/sqrt(5)
        let c = point_biserial(&[1.0, 2.0, 3.0, 4.0], &[false, false, true, true]).unwrap();
        assert_abs_diff_eq!(c.r, 2.0 / 5f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn point_biserial_perfect_separation_and_degenerate() {
        let c = point_biserial(&[1.0, 1.0, 2.0, 2.0], &[false, false, true, true]).unwrap();
        assert_abs_diff_eq!(c.r, 1.0, epsilon = 1e-15);

        let c = point_biserial(&[1.0, 2.0, 3.0], &[false, false, false]).unwrap();
        assert!(c.degenerate);
        assert_eq!((c.r, c.p), (0.0, 1.0));
    }

    fn pattern(vector: Vec<f64>, class: Option<&str>, target_mean: Option<f64>) -> Pattern {
        let mut label_hist = std::collections::BTreeMap::new();
        if let Some(c) = class {
            label_hist.insert(c.to_string(), 1);
        }
        Pattern {
            denorm_vector: vector.clone(),
            vector,
            count: 1,
            depth: 0,
            label_hist,
            pure_class: class.map(str::to_string),
            target_mean,
            absorbed: Vec::new(),
        }
    }

    #[test]
    fn correlate_numeric_feature_equal_to_target() {
        let patterns: Vec<Pattern> = [0.1, 0.5, 0.9]
            .iter()
            .map(|&v| pattern(vec![v, 0.3], None, Some(v)))
            .collect();
        let report = correlate_patterns(&patterns, TargetKind::Numeric).unwrap();
        match &report.features[0] {
            FeatureCorrelation::Numeric(c) => {
                assert_abs_diff_eq!(c.r, 1.0, epsilon = 1e-12);
                assert_eq!(c.p, 0.0);
            }
            _ => panic!("expected numeric entry"),
        }
        match &report.features[1] {
            FeatureCorrelation::Numeric(c) => assert!(c.degenerate),
            _ => panic!("expected numeric entry"),
        }
    }

    #[test]
    fn correlate_categorical_reuses_point_biserial() {
        let patterns = vec![
            pattern(vec![1.0], Some("A"), None),
            pattern(vec![2.0], Some("A"), None),
            pattern(vec![3.0], Some("B"), None),
            pattern(vec![4.0], Some("B"), None),
        ];
        let report = correlate_patterns(&patterns, TargetKind::Categorical).unwrap();
        assert_eq!(report.classes, ["A", "B"]);
        match &report.features[0] {
            FeatureCorrelation::Categorical(cs) => {
                assert_abs_diff_eq!(cs[1].r, 2.0 / 5f64.sqrt(), epsilon = 1e-12);
            }
            _ => panic!("expected categorical entry"),
        }
    }

    #[test]
    fn correlate_rejects_small_or_impure_inputs() {
        let small = vec![pattern(vec![1.0], Some("A"), None); 2];
        assert!(matches!(
            correlate_patterns(&small, TargetKind::Categorical).unwrap_err(),
            Error::TooFewPatterns(2)
        ));

        let mut mixed = vec![
            pattern(vec![1.0], Some("A"), None),
            pattern(vec![2.0], Some("B"), None),
            pattern(vec![3.0], None, None),
        ];
        mixed[2].label_hist.insert("A".into(), 1);
        mixed[2].label_hist.insert("B".into(), 1);
        assert!(matches!(
            correlate_patterns(&mixed, TargetKind::Categorical).unwrap_err(),
            Error::ImpurePattern(2)
        ));
    }

    proptest! {
        #[test]
        fn pearson_is_symmetric_and_matches_oracle(
            pairs in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..40)
        ) {
            let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let a = pearson(&x, &y).unwrap();
            let b = pearson(&y, &x).unwrap();
            prop_assert!((a.r - b.r).abs() <= 1e-14);
            if !a.degenerate {
                prop_assert!((a.r - pearson_oracle(&x, &y)).abs() <= 1e-12);
            }
        }

        #[test]
        fn pearson_invariant_under_positive_affine_maps(
            pairs in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..30),
            scale in 0.01f64..100.0,
            shift in -50.0f64..50.0,
        ) {
            let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let xs: Vec<f64> = x.iter().map(|v| v * scale + shift).collect();
            let a = pearson(&x, &y).unwrap();
            let b = pearson(&xs, &y).unwrap();
            prop_assert!((a.r - b.r).abs() <= 1e-12, "dr = {}", (a.r - b.r).abs());
        }

        #[test]
        fn point_biserial_equals_pearson_on_indicator(
            values in proptest::collection::vec(-10.0f64..10.0, 3..30),
            flags in proptest::collection::vec(proptest::bool::ANY, 3..30),
        ) {
            let n = values.len().min(flags.len());
            let v = &values[..n];
            let f = &flags[..n];
            let ind: Vec<f64> = f.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
            let a = point_biserial(v, f).unwrap();
            let b = pearson(v, &ind).unwrap();
            prop_assert_eq!(a.r.to_bits(), b.r.to_bits());
            prop_assert_eq!(a.p.to_bits(), b.p.to_bits());
        }
    }
}
