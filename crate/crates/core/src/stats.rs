//! Estimation and testing of per-basis contributions.
//!
//! For a basis M the upstream contribution is a linear functional
//!
//! ```text
//! tau = sum_t a_t sum_b chi_t(b) p_t(b)
//! ```
//!
//! over joint outcome eigenstrings b, with chi in {-1, 0, +1}. Each term's
//! distribution comes from an independent batch of executions, so term
//! variances add; the plug-in estimator and its standard error are
//!
//! ```text
//! tau_hat = sum_t a_t sum_b chi_t(b) p_hat_t(b)
//! se^2    = sum_t (a_t^2 / m_t) [ sum_b chi_t(b)^2 p_hat_t(b)
//!                                 - (sum_b chi_t(b) p_hat_t(b))^2 ]
//! ```
//!
//! A basis is dropped when the two-sided normal test fails to reject
//! tau = 0 at level alpha.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::cutting::BasisElement;
use crate::pauli::Eigenstring;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("counts sum to {got} but shots is {expected}")]
    CountMismatch { got: u64, expected: u64 },
    #[error("distribution has zero shots")]
    ZeroShots,
    #[error("eigenstring length {got} does not match distribution width {expected}")]
    WidthMismatch { got: usize, expected: usize },
    #[error("alpha must lie strictly between 0 and 1, got {0}")]
    BadAlpha(f64),
    #[error("quantile argument must lie strictly in (0, 1), got {0}")]
    BadQuantileArg(f64),
    #[error("{name} must be positive and finite, got {value}")]
    BadPlanParameter { name: &'static str, value: f64 },
    #[error("estimate is not finite")]
    NonFiniteEstimate,
}

/// Empirical distribution over eigenstrings of a fixed width.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenstringDistribution {
    counts: BTreeMap<Eigenstring, u64>,
    shots: u64,
    width: usize,
}

impl EigenstringDistribution {
    pub fn new(
        counts: BTreeMap<Eigenstring, u64>,
        shots: u64,
    ) -> Result<EigenstringDistribution, StatsError> {
        if shots == 0 {
            return Err(StatsError::ZeroShots);
        }
        let total: u64 = counts.values().sum();
        if total != shots {
            return Err(StatsError::CountMismatch {
                got: total,
                expected: shots,
            });
        }
        let width = counts.keys().next().map_or(0, Eigenstring::len);
        for key in counts.keys() {
            if key.len() != width {
                return Err(StatsError::WidthMismatch {
                    got: key.len(),
                    expected: width,
                });
            }
        }
        Ok(EigenstringDistribution {
            counts,
            shots,
            width,
        })
    }

    pub fn counts(&self) -> &BTreeMap<Eigenstring, u64> {
        &self.counts
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Empirical probability of one eigenstring.
    pub fn probability(&self, e: &Eigenstring) -> f64 {
        *self.counts.get(e).unwrap_or(&0) as f64 / self.shots as f64
    }
}

/// Sparse {-1, 0, +1} functional over eigenstrings: zero unless the signs
/// at `select_mask` positions equal `select_bits` (bit set = minus), else
/// the parity of the signs at `parity_mask` positions.
///
/// `chi(b) = [b & select_mask == select_bits] * Par(b & parity_mask)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Chi {
    pub select_mask: u32,
    pub select_bits: u32,
    pub parity_mask: u32,
}

impl Chi {
    /// Plain parity over all positions of a width-n eigenstring.
    pub fn parity(n: usize) -> Chi {
        Chi {
            select_mask: 0,
            select_bits: 0,
            parity_mask: if n == 0 { 0 } else { (1u32 << n) - 1 },
        }
    }

    /// Parity restricted to the given positions.
    pub fn parity_over(mask: u32) -> Chi {
        Chi {
            select_mask: 0,
            select_bits: 0,
            parity_mask: mask,
        }
    }

    /// Indicator of fixed signs on `mask` times parity over `parity_mask`.
    pub fn selected(mask: u32, bits: u32, parity_mask: u32) -> Chi {
        debug_assert_eq!(bits & !mask, 0);
        Chi {
            select_mask: mask,
            select_bits: bits,
            parity_mask,
        }
    }

    pub fn eval(&self, e: &Eigenstring) -> f64 {
        let m = e.mask();
        if m & self.select_mask != self.select_bits {
            return 0.0;
        }
        if (m & self.parity_mask).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// One term of the estimated functional: coefficient, its empirical
/// distribution, and the functional applied to outcomes.
#[derive(Clone, Debug)]
pub struct TauTerm {
    pub coeff: f64,
    pub dist: EigenstringDistribution,
    pub chi: Chi,
}

/// Estimated basis contribution with its plug-in standard error.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TauEstimate {
    pub basis: BasisElement,
    pub tau_hat: f64,
    pub std_err: f64,
    /// Total executions across all terms.
    pub shots: u64,
    /// The per-term coefficients the estimate was built from.
    pub coeffs: Vec<f64>,
}

fn accumulate(terms: &[TauTerm]) -> (f64, f64, u64) {
    let mut tau_hat = 0.0;
    let mut var = 0.0;
    let mut shots = 0u64;
    for term in terms {
        let m = term.dist.shots() as f64;
        let mut mean = 0.0;
        let mut mean_sq = 0.0;
        for (e, &c) in term.dist.counts() {
            let p = c as f64 / m;
            let x = term.chi.eval(e);
            mean += x * p;
            mean_sq += x * x * p;
        }
        tau_hat += term.coeff * mean;
        var += term.coeff * term.coeff / m * (mean_sq - mean * mean);
        shots += term.dist.shots();
    }
    (tau_hat, var, shots)
}

/// Point estimate and standard error of sum_t a_t E[chi_t] from
/// independent per-term samples.
pub fn estimate_tau(basis: &BasisElement, terms: &[TauTerm]) -> Result<TauEstimate, StatsError> {
    let (tau_hat, var, shots) = accumulate(terms);
    if !tau_hat.is_finite() || !var.is_finite() {
        return Err(StatsError::NonFiniteEstimate);
    }
    // Guard against tiny negative values from cancellation.
    let std_err = var.max(0.0).sqrt();
    Ok(TauEstimate {
        basis: basis.clone(),
        tau_hat,
        std_err,
        shots,
        coeffs: terms.iter().map(|t| t.coeff).collect(),
    })
}

/// Standard error alone; the same plug-in variance as [`estimate_tau`].
pub fn std_error(terms: &[TauTerm]) -> Result<f64, StatsError> {
    let (_, var, _) = accumulate(terms);
    if !var.is_finite() {
        return Err(StatsError::NonFiniteEstimate);
    }
    Ok(var.max(0.0).sqrt())
}

/// Inverse of the standard normal CDF (Wichura's PPND16 rational
/// approximations), accurate to ~1e-15 over (0, 1).
pub fn normal_quantile(p: f64) -> Result<f64, StatsError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(StatsError::BadQuantileArg(p));
    }
    const A: [f64; 8] = [
        3.387_132_872_796_366_5e0,
        1.331_416_678_917_843_8e2,
        1.971_590_950_306_551_3e3,
        1.373_169_376_550_946_1e4,
        4.592_195_393_154_987e4,
        6.726_577_092_700_87e4,
        3.343_057_558_358_813e4,
        2.509_080_928_730_122_7e3,
    ];
    const B: [f64; 8] = [
        1.0,
        4.231_333_070_160_091e1,
        6.871_870_074_920_579e2,
        5.394_196_021_424_751e3,
        2.121_379_430_158_659_6e4,
        3.930_789_580_009_271e4,
        2.872_908_573_572_194_3e4,
        5.226_495_278_852_854_6e3,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_5e0,
        4.630_337_846_156_546e0,
        5.769_497_221_460_691e0,
        3.647_848_324_763_204_5e0,
        1.270_458_252_452_368_4e0,
        2.417_807_251_774_506e-1,
        2.272_384_498_926_918_4e-2,
        7.745_450_142_783_414e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_759e0,
        1.676_384_830_183_803_8e0,
        6.897_673_349_851e-1,
        1.481_039_764_274_800_8e-1,
        1.519_866_656_361_645_7e-2,
        5.475_938_084_995_345e-4,
        1.050_750_071_644_416_9e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103e0,
        5.463_784_911_164_114e0,
        1.784_826_539_917_291_3e0,
        2.965_605_718_285_048_7e-1,
        2.653_218_952_657_612_4e-2,
        1.242_660_947_388_078_4e-3,
        2.711_555_568_743_487_6e-5,
        2.010_334_399_292_288_1e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        5.998_322_065_558_88e-1,
        1.369_298_809_227_358e-1,
        1.487_536_129_085_061_5e-2,
        7.868_691_311_456_133e-4,
        1.846_318_317_510_054_8e-5,
        1.421_511_758_316_446e-7,
        2.044_263_103_389_939_7e-15,
    ];

    fn poly(c: &[f64; 8], x: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, &v| acc * x + v)
    }

    let q = p - 0.5;
    let x = if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        q * poly(&A, r) / poly(&B, r)
    } else {
        let mut r = if q < 0.0 { p } else { 1.0 - p };
        r = (-r.ln()).sqrt();
        let value = if r <= 5.0 {
            let r = r - 1.6;
            poly(&C, r) / poly(&D, r)
        } else {
            let r = r - 5.0;
            poly(&E, r) / poly(&F, r)
        };
        if q < 0.0 {
            -value
        } else {
            value
        }
    };
    Ok(x)
}

/// Decision for one basis: `rejected` means the contribution is
/// statistically distinguishable from zero, so the basis must be kept.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisOutcome {
    pub basis: BasisElement,
    pub estimate: TauEstimate,
    pub alpha: f64,
    pub rejected: bool,
}

impl fmt::Display for HypothesisOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: tau_hat={:+.6} se={:.6} -> {}",
            self.basis,
            self.estimate.tau_hat,
            self.estimate.std_err,
            if self.rejected { "keep" } else { "skip" }
        )
    }
}

/// Two-sided level-alpha test of tau = 0: rejects when
/// |tau_hat| > z_{1-alpha/2} * se. With a degenerate sample (se = 0) any
/// nonzero estimate rejects. Not rejecting marks the basis as golden.
pub fn test_golden(estimate: &TauEstimate, alpha: f64) -> Result<HypothesisOutcome, StatsError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::BadAlpha(alpha));
    }
    let rejected = if estimate.std_err == 0.0 {
        estimate.tau_hat != 0.0
    } else {
        let z = normal_quantile(1.0 - alpha / 2.0)?;
        estimate.tau_hat.abs() > z * estimate.std_err
    };
    Ok(HypothesisOutcome {
        basis: estimate.basis.clone(),
        estimate: estimate.clone(),
        alpha,
        rejected,
    })
}

/// Shot budget guaranteeing P(|tau_hat - tau| > epsilon) <= delta when the
/// per-shot values are bounded by `bound` in absolute value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShotPlan {
    pub epsilon: f64,
    pub delta: f64,
    pub bound: f64,
    pub required_shots: u64,
}

/// Bound on |tau| for a single-cut upstream fragment with n output qubits
/// under a distribution-mode functional: each of the 2^n components lies
/// in [-1, 1] scaled by its probability mass and the half of the mass can
/// oppose the other half, giving 1.5 * (1 - 2^-n) as a safe envelope.
pub fn b_upper_bound(n_output_qubits: u32) -> f64 {
    1.5 * (1.0 - 0.5f64.powi(n_output_qubits as i32))
}

/// Shots per execution so that P(|tau_hat - tau| > epsilon) <= delta for a
/// mean of m i.i.d. values bounded by `bound`, via the two-sided Hoeffding
/// inequality: m >= (2 bound^2 / epsilon^2) ln(2 / delta), rounded up.
pub fn required_shots(epsilon: f64, delta: f64, bound: f64) -> Result<ShotPlan, StatsError> {
    for (name, value) in [("epsilon", epsilon), ("bound", bound)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(StatsError::BadPlanParameter { name, value });
        }
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(StatsError::BadPlanParameter {
            name: "delta",
            value: delta,
        });
    }
    let m = (2.0 * bound * bound / (epsilon * epsilon)) * (2.0 / delta).ln();
    Ok(ShotPlan {
        epsilon,
        delta,
        bound,
        required_shots: m.ceil() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Pauli;
    use approx::assert_abs_diff_eq;

    fn basis1() -> BasisElement {
        BasisElement::new(vec![Pauli::X])
    }

    fn dist(pairs: &[(u32, u64)], width: usize) -> EigenstringDistribution {
        let counts = pairs
            .iter()
            .map(|&(mask, c)| (Eigenstring::from_mask(mask, width), c))
            .collect();
        let shots = pairs.iter().map(|p| p.1).sum();
        EigenstringDistribution::new(counts, shots).unwrap()
    }

    #[test]
    fn distribution_validation() {
        let mut counts = BTreeMap::new();
        counts.insert(Eigenstring::from_mask(0, 2), 3u64);
        assert!(matches!(
            EigenstringDistribution::new(counts.clone(), 4),
            Err(StatsError::CountMismatch { got: 3, expected: 4 })
        ));
        counts.insert(Eigenstring::from_mask(1, 1), 1);
        assert!(matches!(
            EigenstringDistribution::new(counts, 4),
            Err(StatsError::WidthMismatch { .. })
        ));
        assert!(matches!(
            EigenstringDistribution::new(BTreeMap::new(), 0),
            Err(StatsError::ZeroShots)
        ));
    }

    #[test]
    fn chi_eval() {
        let par = Chi::parity(2);
        assert_eq!(par.eval(&Eigenstring::from_mask(0b00, 2)), 1.0);
        assert_eq!(par.eval(&Eigenstring::from_mask(0b01, 2)), -1.0);
        assert_eq!(par.eval(&Eigenstring::from_mask(0b11, 2)), 1.0);
        let sel = Chi::selected(0b01, 0b01, 0b10);
        assert_eq!(sel.eval(&Eigenstring::from_mask(0b00, 2)), 0.0);
        assert_eq!(sel.eval(&Eigenstring::from_mask(0b01, 2)), 1.0);
        assert_eq!(sel.eval(&Eigenstring::from_mask(0b11, 2)), -1.0);
    }

    #[test]
    fn deterministic_sample_has_zero_error() {
        // All mass on the +1 outcome: tau_hat = 1, se = 0.
        let term = TauTerm {
            coeff: 1.0,
            dist: dist(&[(0, 100)], 1),
            chi: Chi::parity(1),
        };
        let est = estimate_tau(&basis1(), &[term]).unwrap();
        assert_eq!(est.tau_hat, 1.0);
        assert_eq!(est.std_err, 0.0);
        assert_eq!(est.shots, 100);
    }

    #[test]
    fn balanced_sample_standard_error() {
        // 50/50 outcomes, m = 100: tau_hat = 0, se = sqrt(1/100) = 0.1.
        let term = TauTerm {
            coeff: 1.0,
            dist: dist(&[(0, 50), (1, 50)], 1),
            chi: Chi::parity(1),
        };
        let est = estimate_tau(&basis1(), &[term]).unwrap();
        assert_eq!(est.tau_hat, 0.0);
        assert_abs_diff_eq!(est.std_err, 0.1, epsilon = 1e-15);
    }

    #[test]
    fn half_coefficient_standard_error() {
        // a = 0.5, balanced, m = 400: se = 0.5 * sqrt(1/400) = 0.025...
        // and with chi values +-1, variance is 1, so se = |a|/sqrt(m).
        let term = TauTerm {
            coeff: 0.5,
            dist: dist(&[(0, 200), (1, 200)], 1),
            chi: Chi::parity(1),
        };
        let est = estimate_tau(&basis1(), &[term]).unwrap();
        assert_abs_diff_eq!(est.std_err, 0.025, epsilon = 1e-15);
    }

    #[test]
    fn independent_terms_add_in_variance() {
        // Two unit-coefficient balanced terms with m = 400 each:
        // se = sqrt(2) * 0.05 ~ 0.0707.
        let mk = || TauTerm {
            coeff: 1.0,
            dist: dist(&[(0, 200), (1, 200)], 1),
            chi: Chi::parity(1),
        };
        let est = estimate_tau(&basis1(), &[mk(), mk()]).unwrap();
        assert_abs_diff_eq!(est.std_err, (2.0f64).sqrt() * 0.05, epsilon = 1e-12);
        assert_eq!(est.shots, 800);
    }

    /// Independent slow-but-sure quantile: bisection against a CDF built
    /// from the erf Taylor series (alternating, converges for the |x| <= 6
    /// range bisection visits).
    fn quantile_oracle(p: f64) -> f64 {
        fn erf(x: f64) -> f64 {
            let mut term = x;
            let mut sum = x;
            let mut n = 0u32;
            while term.abs() > 1e-18 && n < 400 {
                n += 1;
                term *= -x * x / n as f64;
                sum += term / (2 * n + 1) as f64;
            }
            sum * 2.0 / std::f64::consts::PI.sqrt()
        }
        let cdf = |x: f64| 0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2));
        let (mut lo, mut hi) = (-6.0, 6.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn quantile_matches_oracle() {
        for &p in &[
            0.001, 0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.975, 0.99, 0.995, 0.999,
        ] {
            let got = normal_quantile(p).unwrap();
            let want = quantile_oracle(p);
            assert_abs_diff_eq!(got, want, epsilon = 1e-8);
        }
    }

    #[test]
    fn quantile_reference_values() {
        assert_abs_diff_eq!(
            normal_quantile(0.95).unwrap(),
            1.6448536269514722,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            normal_quantile(0.975).unwrap(),
            1.959963984540054,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            normal_quantile(0.99).unwrap(),
            2.3263478740408408,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            normal_quantile(0.999).unwrap(),
            3.090232306167813,
            epsilon = 1e-12
        );
        assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
        assert_abs_diff_eq!(
            normal_quantile(0.025).unwrap(),
            -normal_quantile(0.975).unwrap(),
            epsilon = 1e-12
        );
        assert!(normal_quantile(0.0).is_err());
        assert!(normal_quantile(1.0).is_err());
    }

    #[test]
    fn quantile_roundtrips_through_cdf() {
        fn cdf(x: f64) -> f64 {
            // Same series-based CDF as the oracle.
            fn erf(x: f64) -> f64 {
                let mut term = x;
                let mut sum = x;
                let mut n = 0u32;
                while term.abs() > 1e-18 && n < 400 {
                    n += 1;
                    term *= -x * x / n as f64;
                    sum += term / (2 * n + 1) as f64;
                }
                sum * 2.0 / std::f64::consts::PI.sqrt()
            }
            0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
        }
        let mut p = 0.02;
        while p < 0.99 {
            let x = normal_quantile(p).unwrap();
            assert_abs_diff_eq!(cdf(x), p, epsilon = 1e-7);
            p += 0.034;
        }
    }

    #[test]
    fn standalone_standard_error() {
        // Uniform 2-outcome, m = 400, chi = (+1, -1), a = 1: 1/sqrt(400).
        let term = TauTerm {
            coeff: 1.0,
            dist: dist(&[(0, 200), (1, 200)], 1),
            chi: Chi::parity(1),
        };
        assert_abs_diff_eq!(std_error(&[term]).unwrap(), 0.05, epsilon = 1e-15);
    }

    #[test]
    fn test_golden_worked_examples() {
        // |0.5| > 1.96 * 0.1 -> keep the basis.
        let keep = TauEstimate {
            basis: basis1(),
            tau_hat: 0.5,
            std_err: 0.1,
            shots: 100,
            coeffs: vec![1.0],
        };
        let out = test_golden(&keep, 0.05).unwrap();
        assert!(out.rejected);
        // |0.1| < 1.96 * 0.1 -> golden, skip it.
        let skip = TauEstimate {
            tau_hat: 0.1,
            ..keep.clone()
        };
        let out = test_golden(&skip, 0.05).unwrap();
        assert!(!out.rejected);
        assert_eq!(out.alpha, 0.05);
        // Degenerate sample: se = 0 rejects exactly when tau_hat != 0.
        let exact_zero = TauEstimate {
            tau_hat: 0.0,
            std_err: 0.0,
            ..keep.clone()
        };
        assert!(!test_golden(&exact_zero, 0.05).unwrap().rejected);
        let exact_one = TauEstimate {
            tau_hat: 1.0,
            std_err: 0.0,
            ..keep
        };
        assert!(test_golden(&exact_one, 0.05).unwrap().rejected);
        assert!(test_golden(&exact_one, 0.0).is_err());
        assert!(test_golden(&exact_one, 1.0).is_err());
    }

    #[test]
    fn shot_plan_examples() {
        // 2 * 1.5^2 / 0.1^2 * ln(2/0.05) = 450 * ln 40 = 1659.9957...
        let plan = required_shots(0.1, 0.05, 1.5).unwrap();
        assert_eq!(plan.required_shots, 1660);
        // ln(2 / (2/e)) = 1 exactly, so the bound-1 epsilon-1 case gives 2.
        let plan = required_shots(1.0, 2.0 / std::f64::consts::E, 1.0).unwrap();
        assert_eq!(plan.required_shots, 2);
        // Doubling the bound quadruples the requirement (up to rounding).
        let base = required_shots(0.05, 0.01, 1.0).unwrap().required_shots;
        let quad = required_shots(0.05, 0.01, 2.0).unwrap().required_shots;
        assert!((quad as f64 - 4.0 * base as f64).abs() <= 4.0);
        assert!(required_shots(0.0, 0.05, 1.0).is_err());
        assert!(required_shots(0.1, 0.0, 1.0).is_err());
        assert!(required_shots(0.1, 1.5, 1.0).is_err());
    }

    #[test]
    fn tau_bound_grows_with_output_count() {
        assert_abs_diff_eq!(b_upper_bound(1), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(b_upper_bound(2), 1.125, epsilon = 1e-15);
        assert_abs_diff_eq!(b_upper_bound(10), 1.5 * (1.0 - 1.0 / 1024.0), epsilon = 1e-15);
        let mut prev = 0.0;
        for n in 1..=20 {
            let b = b_upper_bound(n);
            assert!(b > prev && b < 1.5);
            prev = b;
        }
    }

    proptest::proptest! {
        #[test]
        fn quantile_is_symmetric_and_monotone(p in 1e-9f64..0.5, q in 1e-9f64..0.5) {
            let lo = normal_quantile(p).unwrap();
            let hi = normal_quantile(1.0 - p).unwrap();
            assert!((lo + hi).abs() <= 1e-9 * hi.abs().max(1.0));
            assert!(lo < 0.0 && hi > 0.0);
            let (small, large) = if p < q { (p, q) } else { (q, p) };
            if small < large {
                assert!(normal_quantile(small).unwrap() < normal_quantile(large).unwrap());
            }
        }

        // A single summand with coefficient a satisfies |tau_hat| <= |a|
        // and 0 <= std_err <= |a| (chi is ±1-valued and shots >= 1).
        #[test]
        fn estimates_respect_the_coefficient_budget(
            counts in proptest::collection::vec(0u64..50, 4),
            coeff in -2.0f64..2.0,
            mask in 0u32..4,
        ) {
            let shots: u64 = counts.iter().sum();
            if shots == 0 {
                return Ok(());
            }
            let pairs: Vec<(u32, u64)> = counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(i, &c)| (i as u32, c))
                .collect();
            let term = TauTerm {
                coeff,
                dist: dist(&pairs, 2),
                chi: Chi::parity_over(mask),
            };
            let est = estimate_tau(&basis1(), &[term]).unwrap();
            assert!(est.tau_hat.abs() <= coeff.abs() + 1e-12);
            assert!(est.std_err >= 0.0);
            assert!(est.std_err <= coeff.abs() + 1e-12);
        }
    }
}
