//! Closed-form expressions of the potential-reliability law.
//!
//! A symmetric system of `n` elements operates while more than `s` of them
//! operate. With coverage `c = s/n` and a reference operating probability
//! `p`, the failure intensity is bracketed by
//!
//! ```text
//! -ln(1 - exp(-k_L·n) + O)  <=  λ  <=  -ln(1 - exp(-k_U·n))
//! ```
//!
//! where `k_L` and `k_U` are binary Kullback-Leibler divergences between
//! `Bernoulli(c)` and `Bernoulli(p_M)` / `Bernoulli(p_S)`. Reliability over
//! one unit of math time is `R = exp(-λ)`.
//!
//! Everything here is a pure function of its arguments.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest system size accepted by [`exact_operating_probability_enumerated`].
pub const MAX_ENUMERATION_ELEMENTS: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LawError {
    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("{0}")]
    Domain(String),
    #[error("no test count reaches failure intensity {target} with n = {n}")]
    NoSolution { n: u64, target: f64 },
}

fn open_unit(name: &'static str, value: f64) -> Result<f64, LawError> {
    if value > 0.0 && value < 1.0 {
        Ok(value)
    } else {
        Err(LawError::OutOfRange {
            name,
            value,
            range: "(0, 1)",
        })
    }
}

fn closed_unit(name: &'static str, value: f64) -> Result<f64, LawError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(LawError::OutOfRange {
            name,
            value,
            range: "[0, 1]",
        })
    }
}

fn element_count(n: f64) -> Result<f64, LawError> {
    if n.is_finite() && n >= 1.0 {
        Ok(n)
    } else {
        Err(LawError::OutOfRange {
            name: "n",
            value: n,
            range: "[1, inf)",
        })
    }
}

/// `x·ln(x) - x + 1` evaluated at `x = 1 + u`.
///
/// Non-negative, zero only at `u = 0`. Near zero the closed form cancels to
/// `O(u²)`, so the alternating series `Σ_{k≥2} (-u)^k / (k(k-1))` is used.
fn entropy_excess(u: f64) -> f64 {
    if u == -1.0 {
        return 1.0;
    }
    if u.abs() < 0.1 {
        let mut power = u * u;
        let mut sum = 0.0;
        let mut k = 2.0_f64;
        loop {
            let term = power / (k * (k - 1.0));
            sum += term;
            if term.abs() <= f64::EPSILON * 0.25 * sum.abs() || k > 60.0 {
                break;
            }
            power *= -u;
            k += 1.0;
        }
        sum
    } else {
        (1.0 + u) * u.ln_1p() - u
    }
}

/// Binary KL divergence `KL(Bernoulli(c) || Bernoulli(p))` for `c` in `[0, 1]`
/// and `p` in `(0, 1)`.
///
/// Written as `p·φ(c/p) + (1-p)·φ((1-c)/(1-p))` with `φ(x) = x ln x - x + 1`.
/// The linear parts of the two log terms cancel exactly in this form, so
/// both summands are non-negative and nothing cancels. The endpoints give
/// the limits `-ln(1-p)` at `c = 0` and `-ln(p)` at `c = 1`.
pub(crate) fn bernoulli_divergence(c: f64, p: f64) -> f64 {
    let delta = c - p;
    p * entropy_excess(delta / p) + (1.0 - p) * entropy_excess(-delta / (1.0 - p))
}

/// `-ln(1 - exp(-x))` for `x > 0`.
fn neg_ln_one_minus_exp(x: f64) -> f64 {
    if x > std::f64::consts::LN_2 {
        -(-(-x).exp()).ln_1p()
    } else {
        -(-(-x).exp_m1()).ln()
    }
}

/// Upper-bound divergence `k_U` between coverage `c` and the semantic mean `p_s`.
pub fn k_upper(c: f64, p_s: f64) -> Result<f64, LawError> {
    let c = open_unit("c", c)?;
    let p_s = open_unit("p_s", p_s)?;
    Ok(bernoulli_divergence(c, p_s))
}

/// Lower-bound divergence `k_L` between coverage `c` and `p_M`.
pub fn k_lower(c: f64, p_m: f64) -> Result<f64, LawError> {
    let c = open_unit("c", c)?;
    let p_m = open_unit("p_m", p_m)?;
    Ok(bernoulli_divergence(c, p_m))
}

/// `p_M = p_L / (1 + p_L - p_U)`, defined for `0 < p_L <= p_U < 0.5`.
pub fn p_mid(p_l: f64, p_u: f64) -> Result<f64, LawError> {
    let p_l = open_unit("p_l", p_l)?;
    let p_u = open_unit("p_u", p_u)?;
    if p_u >= 0.5 {
        return Err(LawError::OutOfRange {
            name: "p_u",
            value: p_u,
            range: "(0, 0.5)",
        });
    }
    if p_l > p_u {
        return Err(LawError::Domain(format!(
            "p_l = {p_l} exceeds p_u = {p_u}"
        )));
    }
    Ok(p_l / (1.0 + p_l - p_u))
}

/// Sum of `probs` divided by an explicit `divisor`.
///
/// The divisor is the element count for the plain mean and the sensitive
/// site count for the initial semantic mean; callers choose.
pub fn p_mean(probs: &ElementProbabilities, divisor: u64) -> Result<f64, LawError> {
    if divisor == 0 {
        return Err(LawError::Domain("divisor must be positive".into()));
    }
    let mean = probs.values.iter().sum::<f64>() / divisor as f64;
    open_unit("p_s", mean)
}

/// Result of the upper failure-intensity bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaMax {
    Finite(f64),
    /// Coverage has not yet passed the semantic mean; the bound is unbounded
    /// and reliability has not started to grow.
    NotGrowing,
}

impl LambdaMax {
    pub fn finite(self) -> Option<f64> {
        match self {
            LambdaMax::Finite(v) => Some(v),
            LambdaMax::NotGrowing => None,
        }
    }

    pub fn is_not_growing(self) -> bool {
        matches!(self, LambdaMax::NotGrowing)
    }
}

/// Upper failure-intensity bound `λ_max = -ln(1 - exp(-k_U·n))`.
///
/// Returns [`LambdaMax::NotGrowing`] for `c <= p_s`.
pub fn lambda_max(n: f64, c: f64, p_s: f64) -> Result<LambdaMax, LawError> {
    let n = element_count(n)?;
    let c = closed_unit("c", c)?;
    let p_s = open_unit("p_s", p_s)?;
    if c <= p_s {
        return Ok(LambdaMax::NotGrowing);
    }
    let exponent = bernoulli_divergence(c, p_s) * n;
    if exponent <= 0.0 {
        return Ok(LambdaMax::NotGrowing);
    }
    Ok(LambdaMax::Finite(neg_ln_one_minus_exp(exponent)))
}

/// Lower failure-intensity bound `λ_min = -ln(1 - exp(-k_L·n) + o_constant)`.
///
/// `o_constant` stands in for the `O(ln n)` term; with zero it is the same
/// expression as [`lambda_max`] on `p_m`.
pub fn lambda_min(n: f64, c: f64, p_m: f64, o_constant: f64) -> Result<f64, LawError> {
    let n = element_count(n)?;
    let c = closed_unit("c", c)?;
    let p_m = open_unit("p_m", p_m)?;
    if !(o_constant.is_finite() && o_constant >= 0.0) {
        return Err(LawError::OutOfRange {
            name: "o_constant",
            value: o_constant,
            range: "[0, inf)",
        });
    }
    let exponent = bernoulli_divergence(c, p_m) * n;
    if o_constant == 0.0 {
        if exponent <= 0.0 {
            return Err(LawError::Domain(format!(
                "lambda_min diverges at c = p_m = {p_m}"
            )));
        }
        return Ok(neg_ln_one_minus_exp(exponent));
    }
    let argument = -(-exponent).exp_m1() + o_constant;
    if !(argument > 0.0 && argument <= 1.0) {
        return Err(LawError::Domain(format!(
            "lambda_min log argument {argument} is outside (0, 1]"
        )));
    }
    Ok(-argument.ln())
}

/// `R = exp(-λ)`.
pub fn reliability_from_lambda(lambda: f64) -> Result<f64, LawError> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(LawError::OutOfRange {
            name: "lambda",
            value: lambda,
            range: "[0, inf)",
        });
    }
    Ok((-lambda).exp())
}

/// Content relevance `R = 1 - exp(-k_U·n)`.
///
/// `c` may sit on either side of `p_s`; it is exactly zero at `c = p_s`.
pub fn relevance(n: f64, c: f64, p_s: f64) -> Result<f64, LawError> {
    let n = element_count(n)?;
    let c = closed_unit("c", c)?;
    let p_s = open_unit("p_s", p_s)?;
    Ok(-(-bernoulli_divergence(c, p_s) * n).exp_m1())
}

/// Per-element operating probabilities of a system.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementProbabilities {
    values: Vec<f64>,
}

impl ElementProbabilities {
    pub fn new(values: Vec<f64>) -> Result<Self, LawError> {
        if values.is_empty() {
            return Err(LawError::Domain("no element probabilities".into()));
        }
        for &v in &values {
            open_unit("p_v", v)?;
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `p_L`
    pub fn lower(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `p_U`
    pub fn upper(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `p_M` from the extremes; requires `p_U < 0.5`.
    pub fn mid(&self) -> Result<f64, LawError> {
        p_mid(self.lower(), self.upper())
    }

    /// Arithmetic mean over all elements.
    pub fn mean(&self) -> Result<f64, LawError> {
        p_mean(self, self.values.len() as u64)
    }
}

/// Probability that more than `degree` of the independent elements operate
/// (Poisson-binomial upper tail), by dynamic programming in `O(n²)`.
pub fn exact_operating_probability(
    probs: &ElementProbabilities,
    degree: usize,
) -> Result<f64, LawError> {
    let n = probs.len();
    if degree >= n {
        return Err(LawError::Domain(format!(
            "degree {degree} must be below the element count {n}"
        )));
    }
    // pmf[k] = P(exactly k operating among the elements seen so far)
    let mut pmf = vec![0.0_f64; n + 1];
    pmf[0] = 1.0;
    for (seen, &p) in probs.values().iter().enumerate() {
        for k in (1..=seen + 1).rev() {
            pmf[k] = pmf[k] * (1.0 - p) + pmf[k - 1] * p;
        }
        pmf[0] *= 1.0 - p;
    }
    Ok(pmf[degree + 1..].iter().sum())
}

/// Same quantity as [`exact_operating_probability`], summed over every one
/// of the `2ⁿ` system states. Limited to [`MAX_ENUMERATION_ELEMENTS`].
pub fn exact_operating_probability_enumerated(
    probs: &ElementProbabilities,
    degree: usize,
) -> Result<f64, LawError> {
    let n = probs.len();
    if degree >= n {
        return Err(LawError::Domain(format!(
            "degree {degree} must be below the element count {n}"
        )));
    }
    if n > MAX_ENUMERATION_ELEMENTS {
        return Err(LawError::Domain(format!(
            "enumeration limited to {MAX_ENUMERATION_ELEMENTS} elements, got {n}"
        )));
    }

    fn walk(values: &[f64], degree: usize, operating: usize, weight: f64) -> f64 {
        match values.split_first() {
            None => {
                if operating > degree {
                    weight
                } else {
                    0.0
                }
            }
            Some((&p, rest)) => {
                walk(rest, degree, operating + 1, weight * p)
                    + walk(rest, degree, operating, weight * (1.0 - p))
            }
        }
    }

    Ok(walk(probs.values(), degree, 0, 1.0))
}

fn check_instants(instant_probs: &[f64]) -> Result<(), LawError> {
    for &p in instant_probs {
        closed_unit("P_v", p)?;
    }
    Ok(())
}

/// `R(t) = Π P_v(τ)` over the instants.
pub fn lifetime_reliability(instant_probs: &[f64]) -> Result<f64, LawError> {
    check_instants(instant_probs)?;
    Ok(instant_probs.iter().product())
}

/// `(1 - Σ(1-P), exp(-Σ(1-P)))`, which bracket [`lifetime_reliability`].
/// The lower value can be negative.
pub fn lifetime_bounds(instant_probs: &[f64]) -> Result<(f64, f64), LawError> {
    check_instants(instant_probs)?;
    let failures: f64 = instant_probs.iter().map(|p| 1.0 - p).sum();
    Ok((1.0 - failures, (-failures).exp()))
}

/// Minimal number of tested sites `s` for which `λ_max(n, s/n, p_s)` is
/// finite and at most `lambda_target`.
///
/// `λ_max` is strictly decreasing in coverage once coverage exceeds `p_s`,
/// so the predicate is monotone in `s` and a bisection over `[0, n]` finds
/// the boundary in at most 64 steps.
pub fn required_coverage(n: u64, p_s: f64, lambda_target: f64) -> Result<u64, LawError> {
    if n == 0 {
        return Err(LawError::OutOfRange {
            name: "n",
            value: 0.0,
            range: "[1, inf)",
        });
    }
    let p_s = open_unit("p_s", p_s)?;
    if !(lambda_target.is_finite() && lambda_target > 0.0) {
        return Err(LawError::OutOfRange {
            name: "lambda_target",
            value: lambda_target,
            range: "(0, inf)",
        });
    }
    let total = n as f64;
    let meets = |s: u64| -> Result<bool, LawError> {
        Ok(match lambda_max(total, s as f64 / total, p_s)? {
            LambdaMax::Finite(lambda) => lambda <= lambda_target,
            LambdaMax::NotGrowing => false,
        })
    };

    if !meets(n)? {
        return Err(LawError::NoSolution {
            n,
            target: lambda_target,
        });
    }
    // Everything at or below n·p_s is NOT_GROWING; start there when it holds.
    let mut lo = ((total * p_s).floor() as u64).min(n - 1);
    if meets(lo)? {
        lo = 0;
    }
    let mut hi = n;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if meets(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// A finite pair of failure-intensity bounds with the reliability interval
/// they induce.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub reliability_min: f64,
    pub reliability_max: f64,
}

/// Either a [`BoundsReport`] or the not-growing marker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bounds {
    Finite(BoundsReport),
    NotGrowing,
}

impl Bounds {
    pub fn report(&self) -> Option<&BoundsReport> {
        match self {
            Bounds::Finite(r) => Some(r),
            Bounds::NotGrowing => None,
        }
    }
}

impl Serialize for Bounds {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Bounds::Finite(report) => report.serialize(serializer),
            Bounds::NotGrowing => serializer.serialize_str("NOT_GROWING"),
        }
    }
}

/// Both bounds at coverage `c`, with `p_s` for the upper one and `p_m` for
/// the lower one. Requires `p_m <= p_s`.
pub fn evaluate_bounds(
    n: f64,
    c: f64,
    p_s: f64,
    p_m: f64,
    o_constant: f64,
) -> Result<Bounds, LawError> {
    let p_m = open_unit("p_m", p_m)?;
    if p_m > p_s {
        return Err(LawError::Domain(format!(
            "p_m = {p_m} must not exceed p_s = {p_s}"
        )));
    }
    let upper = match lambda_max(n, c, p_s)? {
        LambdaMax::Finite(v) => v,
        LambdaMax::NotGrowing => return Ok(Bounds::NotGrowing),
    };
    let lower = lambda_min(n, c, p_m, o_constant)?;
    Ok(Bounds::Finite(BoundsReport {
        lambda_min: lower,
        lambda_max: upper,
        reliability_min: reliability_from_lambda(upper)?,
        reliability_max: reliability_from_lambda(lower)?,
    }))
}

/// Rounds to `digits` significant decimal digits.
pub fn round_significant(value: f64, digits: u32) -> f64 {
    if value == 0.0 || !value.is_finite() {
        return value;
    }
    let magnitude = value.abs().log10().floor() as i32;
    let scale = 10f64.powi(digits as i32 - 1 - magnitude);
    (value * scale).round() / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    // Reference values below come from a 60-digit mpmath evaluation of the
    // textbook formulas.

    #[test]
    fn k_upper_examples() {
        assert_eq!(k_upper(0.25, 0.25).unwrap(), 0.0);
        assert!(close(k_upper(0.2, 0.25).unwrap(), 0.007_002_106_647_215, 1e-15));
        assert!(close(k_upper(0.4, 0.25).unwrap(), 0.054_115_320_909_768, 1e-15));
        assert!(k_upper(0.0, 0.25).is_err());
        assert!(k_upper(0.3, 1.0).is_err());
    }

    #[test]
    fn k_lower_examples() {
        assert_eq!(k_lower(0.3, 0.3).unwrap(), 0.0);
        let direct = 0.5 * 2f64.ln() + 0.5 * (0.5f64 / 0.75).ln();
        assert!(close(k_lower(0.5, 0.25).unwrap(), direct, 1e-15));
        assert!(close(k_lower(0.5, 0.25).unwrap(), 0.143_841_036_225_890, 1e-15));
        assert!(close(k_lower(0.55, 0.25).unwrap(), 0.203_780_017_505_653, 1e-15));
        assert!(k_lower(1.2, 0.25).is_err());
    }

    #[test]
    fn divergence_survives_cancellation() {
        // mpmath: 5.11455250806361924755
        let scaled = k_upper(1.0032e-6, 1e-6).unwrap() * 1e12;
        assert!(close(scaled, 5.114_552_508_063_619, 1e-6), "{scaled}");
    }

    #[test]
    fn divergence_endpoint_limits() {
        let p = 0.25_f64;
        assert!(close(bernoulli_divergence(0.0, p), -(1.0 - p).ln(), 1e-15));
        assert!(close(bernoulli_divergence(1.0, p), -p.ln(), 1e-15));
    }

    #[test]
    fn p_mid_examples() {
        assert!(close(p_mid(0.3, 0.3).unwrap(), 0.3, 1e-15));
        assert!(close(p_mid(0.1, 0.4).unwrap(), 0.1 / 0.7, 1e-15));
        assert!(close(p_mid(0.05, 0.45).unwrap(), 0.05 / 0.6, 1e-15));
        assert!(p_mid(0.1, 0.5).is_err());
        assert!(p_mid(0.3, 0.2).is_err());
    }

    #[test]
    fn p_mean_examples() {
        let fig = ElementProbabilities::new(vec![0.2, 0.2, 0.05, 0.45]).unwrap();
        assert!(close(p_mean(&fig, 4).unwrap(), 0.225, 1e-15));
        assert!(close(fig.mean().unwrap(), 0.225, 1e-15));
        let single = ElementProbabilities::new(vec![0.5]).unwrap();
        assert_eq!(p_mean(&single, 1).unwrap(), 0.5);
        assert!(p_mean(&fig, 0).is_err());
        let heavy = ElementProbabilities::new(vec![0.9, 0.9]).unwrap();
        assert!(p_mean(&heavy, 1).is_err());
    }

    #[test]
    fn p_mean_semantic_mean_form() {
        // s0 sites each with probability 1/s0 sum to one; dividing by s0
        // yields the initial semantic mean 1/s0.
        let s0 = 4u64;
        let sum_to_one = ElementProbabilities::new(vec![0.25; 4]).unwrap();
        assert_eq!(p_mean(&sum_to_one, s0).unwrap(), 1.0 / s0 as f64);
    }

    #[test]
    fn element_statistics() {
        let fig = ElementProbabilities::new(vec![0.2, 0.2, 0.05, 0.45]).unwrap();
        assert_eq!(fig.lower(), 0.05);
        assert_eq!(fig.upper(), 0.45);
        assert!(close(fig.mid().unwrap(), 0.05 / 0.6, 1e-15));
        assert!(ElementProbabilities::new(vec![]).is_err());
        assert!(ElementProbabilities::new(vec![0.0]).is_err());
        assert!(ElementProbabilities::new(vec![1.0]).is_err());
    }

    #[test]
    fn lambda_max_examples() {
        let l = lambda_max(20.0, 0.55, 0.25).unwrap().finite().unwrap();
        assert!(close(l, 0.017_127_864_455_542, 1e-12), "{l}");
        let l = lambda_max(20.0, 0.50, 0.25).unwrap().finite().unwrap();
        assert!(close(l, 0.057_961_281_038_081, 1e-12), "{l}");
        assert_eq!(lambda_max(20.0, 0.25, 0.25).unwrap(), LambdaMax::NotGrowing);
        assert_eq!(lambda_max(20.0, 0.1, 0.25).unwrap(), LambdaMax::NotGrowing);
        assert!(lambda_max(20.0, 1.0, 0.25).unwrap().finite().is_some());
        assert!(lambda_max(20.0, 1.5, 0.25).is_err());
        assert!(lambda_max(20.0, 0.5, 0.0).is_err());
        assert!(lambda_max(0.0, 0.5, 0.25).is_err());
    }

    #[test]
    fn lambda_min_examples() {
        let coincide = lambda_min(20.0, 0.55, 0.25, 0.0).unwrap();
        let upper = lambda_max(20.0, 0.55, 0.25).unwrap().finite().unwrap();
        assert_eq!(coincide, upper);
        let wider = lambda_min(20.0, 0.55, 0.05 / 0.6, 0.0).unwrap();
        assert!(wider < upper);
        assert!(matches!(
            lambda_min(20.0, 0.55, 0.25, 0.5),
            Err(LawError::Domain(_))
        ));
        assert!(lambda_min(20.0, 0.25, 0.25, 0.0).is_err());
        assert!(lambda_min(20.0, 0.55, 0.25, -1.0).is_err());
        let small_o = lambda_min(20.0, 0.55, 0.25, 1e-3).unwrap();
        assert!(small_o < coincide);
    }

    #[test]
    fn reliability_examples() {
        assert_eq!(reliability_from_lambda(0.0).unwrap(), 1.0);
        assert!(close(reliability_from_lambda(0.05).unwrap(), 0.951_229_424_500_714, 1e-15));
        assert!(close(reliability_from_lambda(0.00621).unwrap(), 0.993_809_242_198_046, 1e-15));
        assert!(reliability_from_lambda(-0.1).is_err());
        assert!(reliability_from_lambda(f64::NAN).is_err());
    }

    #[test]
    fn relevance_examples() {
        let r1 = relevance(20.0, 0.2, 0.25).unwrap();
        let r2 = relevance(20.0, 0.4, 0.25).unwrap();
        let r3 = relevance(20.0, 0.8, 0.25).unwrap();
        assert!(close(r1, 0.1306, 5e-4), "{r1}");
        assert!(close(r2, 0.6611, 5e-4), "{r2}");
        assert!(r3 >= 0.9999, "{r3}");
        assert_eq!(relevance(20.0, 0.25, 0.25).unwrap(), 0.0);
        assert!(relevance(20.0, 0.25, 1.0).is_err());
    }

    #[test]
    fn exact_probability_examples() {
        let one = ElementProbabilities::new(vec![0.4]).unwrap();
        assert!(close(exact_operating_probability(&one, 0).unwrap(), 0.4, 1e-15));
        let fair = ElementProbabilities::new(vec![0.5; 3]).unwrap();
        assert!(close(exact_operating_probability(&fair, 1).unwrap(), 0.5, 1e-15));
        let pair = ElementProbabilities::new(vec![0.3, 0.6]).unwrap();
        assert!(close(exact_operating_probability(&pair, 0).unwrap(), 0.72, 1e-15));
        assert!(close(
            exact_operating_probability_enumerated(&pair, 0).unwrap(),
            0.72,
            1e-15
        ));
        assert!(exact_operating_probability(&pair, 2).is_err());
        assert!(exact_operating_probability_enumerated(&pair, 2).is_err());
        let big = ElementProbabilities::new(vec![0.5; 21]).unwrap();
        assert!(exact_operating_probability_enumerated(&big, 3).is_err());
        assert!(exact_operating_probability(&big, 3).is_ok());
    }

    #[test]
    fn exact_probability_large_system() {
        let probs = ElementProbabilities::new(vec![0.3; 10_000]).unwrap();
        // Far above the mean 3000 the tail is negligible; far below it is one.
        let low = exact_operating_probability(&probs, 2000).unwrap();
        let high = exact_operating_probability(&probs, 4000).unwrap();
        assert!(close(low, 1.0, 1e-9));
        assert!(high < 1e-9);
    }

    #[test]
    fn lifetime_examples() {
        assert_eq!(lifetime_reliability(&[1.0, 1.0, 1.0]).unwrap(), 1.0);
        assert!(close(lifetime_reliability(&[0.9, 0.9]).unwrap(), 0.81, 1e-15));
        assert_eq!(lifetime_reliability(&[]).unwrap(), 1.0);
        assert!(lifetime_reliability(&[1.1]).is_err());

        let (lo, hi) = lifetime_bounds(&[0.9, 0.9]).unwrap();
        assert!(close(lo, 0.8, 1e-15));
        assert!(close(hi, 0.818_730_753_077_982, 1e-15));
        assert_eq!(lifetime_bounds(&[1.0, 1.0]).unwrap(), (1.0, 1.0));
        let (lo, hi) = lifetime_bounds(&[0.5, 0.5, 0.5]).unwrap();
        assert!(close(lo, -0.5, 1e-15));
        assert!(close(hi, (-1.5f64).exp(), 1e-15));
        assert!(lo <= 0.125 && 0.125 <= hi);
        assert!(lifetime_bounds(&[-0.1]).is_err());
    }

    #[test]
    fn required_coverage_small_example() {
        assert_eq!(required_coverage(20, 0.25, 0.05).unwrap(), 11);
    }

    #[test]
    fn required_coverage_errors() {
        assert!(matches!(
            required_coverage(20, 0.25, 1e-30),
            Err(LawError::NoSolution { n: 20, .. })
        ));
        assert!(required_coverage(0, 0.25, 0.05).is_err());
        assert!(required_coverage(20, 0.25, 0.0).is_err());
        assert!(required_coverage(20, 1.0, 0.05).is_err());
    }

    #[test]
    fn required_coverage_is_minimal() {
        for &(n, p, target) in &[
            (20u64, 0.25, 0.05),
            (100, 0.1, 0.01),
            (1000, 1.0 / 3.0, 1e-4),
            (37, 0.2, 0.3),
        ] {
            let s = required_coverage(n, p, target).unwrap();
            let at = lambda_max(n as f64, s as f64 / n as f64, p).unwrap();
            assert!(at.finite().unwrap() <= target);
            let before = lambda_max(n as f64, (s - 1) as f64 / n as f64, p).unwrap();
            assert!(before.finite().map_or(true, |l| l > target));
        }
    }

    #[test]
    fn bounds_report_pairs_reliabilities() {
        let b = evaluate_bounds(20.0, 0.55, 0.25, 0.05 / 0.6, 0.0).unwrap();
        let r = b.report().unwrap();
        assert!(r.lambda_min <= r.lambda_max);
        assert_eq!(r.reliability_min, (-r.lambda_max).exp());
        assert_eq!(r.reliability_max, (-r.lambda_min).exp());
        assert_eq!(
            evaluate_bounds(20.0, 0.2, 0.25, 0.25, 0.0).unwrap(),
            Bounds::NotGrowing
        );
        assert!(evaluate_bounds(20.0, 0.55, 0.25, 0.3, 0.0).is_err());
        assert_eq!(
            serde_json::to_string(&Bounds::NotGrowing).unwrap(),
            "\"NOT_GROWING\""
        );
    }

    #[test]
    fn significant_rounding() {
        assert_eq!(round_significant(0.130_678, 4), 0.1307);
        assert_eq!(round_significant(0.017_127_86, 4), 0.01713);
        assert_eq!(round_significant(1_003_191.0, 4), 1_003_000.0);
        assert_eq!(round_significant(0.0, 4), 0.0);
    }
}
