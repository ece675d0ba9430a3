//! Required projection dimension for random subspace sampling.
//!
//! With `B = c² · ln(N²/δ) / (2ε²)`, the basic (Hoeffding) bound asks for
//! `k ≥ B`. The without-replacement (Serfling) bound asks for
//! `k / (1 − f_k) ≥ B` with sampling fraction `f_k = (k − 1)/d`, i.e.
//! `k · d / (d − k + 1) ≥ B`, which never needs more coordinates than the
//! basic bound.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundVariant {
    Basic,
    Serfling,
}

impl BoundVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundVariant::Basic => "basic",
            BoundVariant::Serfling => "serfling",
        }
    }
}

impl std::str::FromStr for BoundVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "basic" => Ok(BoundVariant::Basic),
            "serfling" => Ok(BoundVariant::Serfling),
            other => Err(Error::invalid(format!(
                "unknown bound variant {other:?} (expected basic or serfling)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundQuery {
    /// Regularity constant, `c ≥ 1`.
    pub c: f64,
    /// Relative squared-distance distortion, in `(0, 1]`.
    pub epsilon: f64,
    /// Failure probability, in `(0, 1]`.
    pub delta: f64,
    /// Number of points `N ≥ 1`.
    pub n_points: u64,
    /// Ambient dimension. Required for the Serfling variant; optional for the
    /// basic one, where it only drives `feasible`.
    pub d: Option<u64>,
    pub variant: BoundVariant,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundResult {
    pub k: u64,
    /// False when the requirement cannot be met with `k ≤ d`.
    pub feasible: bool,
    /// The unrounded threshold `B`.
    pub raw_bound: f64,
}

fn validate_common(c: f64, delta: f64, n_points: u64) -> Result<()> {
    if !(c.is_finite() && c >= 1.0) {
        return Err(Error::invalid(format!("c must be >= 1, got {c}")));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::invalid(format!("delta must be in (0, 1], got {delta}")));
    }
    if n_points == 0 {
        return Err(Error::invalid("n_points must be at least 1"));
    }
    Ok(())
}

fn validate(q: &BoundQuery) -> Result<()> {
    validate_common(q.c, q.delta, q.n_points)?;
    if !(q.epsilon > 0.0 && q.epsilon <= 1.0) {
        return Err(Error::invalid(format!(
            "epsilon must be in (0, 1], got {}",
            q.epsilon
        )));
    }
    if q.d == Some(0) {
        return Err(Error::invalid("d must be at least 1"));
    }
    if q.variant == BoundVariant::Serfling && q.d.is_none() {
        return Err(Error::invalid("the serfling bound needs the dimension d"));
    }
    Ok(())
}

/// `ln(N² / δ)`, taken from the union bound over all `N²` ordered pairs.
pub fn log_term(n_points: u64, delta: f64) -> f64 {
    2.0 * (n_points as f64).ln() - delta.ln()
}

/// The threshold `B = c² · ln(N²/δ) / (2ε²)`.
pub fn raw_bound(c: f64, epsilon: f64, delta: f64, n_points: u64) -> f64 {
    c * c * log_term(n_points, delta) / (2.0 * epsilon * epsilon)
}

/// `k / (1 − f_k) = k·d / (d − k + 1)` for `1 ≤ k ≤ d`.
#[inline]
pub fn serfling_effective_k(k: u64, d: u64) -> f64 {
    debug_assert!(k >= 1 && k <= d);
    // k·d is exact in u128; one rounding on conversion, one on division
    ((k as u128 * d as u128) as f64) / ((d - k + 1) as f64)
}

#[inline]
fn serfling_holds(k: u64, d: u64, bound: f64) -> bool {
    serfling_effective_k(k, d) >= bound
}

pub fn required_k_basic(q: &BoundQuery) -> Result<BoundResult> {
    validate(q)?;
    let b = raw_bound(q.c, q.epsilon, q.delta, q.n_points);
    let k = (b.ceil() as u64).max(1);
    Ok(BoundResult {
        k,
        feasible: q.d.is_none_or(|d| k <= d),
        raw_bound: b,
    })
}

pub fn required_k_serfling(q: &BoundQuery) -> Result<BoundResult> {
    validate(q)?;
    let d = q.d.expect("validated");
    let b = raw_bound(q.c, q.epsilon, q.delta, q.n_points);

    if !serfling_holds(d, d, b) {
        return Ok(BoundResult {
            k: d,
            feasible: false,
            raw_bound: b,
        });
    }
    // k(d + B) ≥ B(d + 1) is the linear form of k·d/(d − k + 1) ≥ B
    let guess = b * (d as f64 + 1.0) / (d as f64 + b);
    let mut k = (guess.ceil() as u64).clamp(1, d);
    while k < d && !serfling_holds(k, d, b) {
        k += 1;
    }
    while k > 1 && serfling_holds(k - 1, d, b) {
        k -= 1;
    }
    Ok(BoundResult {
        k,
        feasible: true,
        raw_bound: b,
    })
}

pub fn required_k(q: &BoundQuery) -> Result<BoundResult> {
    match q.variant {
        BoundVariant::Basic => required_k_basic(q),
        BoundVariant::Serfling => required_k_serfling(q),
    }
}

/// Smallest ε the chosen bound certifies at dimension `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AchievableEpsilon {
    pub epsilon: f64,
    /// False when `epsilon > 1`, outside the range the bounds cover.
    pub guaranteed: bool,
}

pub fn achievable_epsilon(
    c: f64,
    k: u64,
    delta: f64,
    n_points: u64,
    d: Option<u64>,
    variant: BoundVariant,
) -> Result<AchievableEpsilon> {
    validate_common(c, delta, n_points)?;
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let effective_k = match variant {
        BoundVariant::Basic => k as f64,
        BoundVariant::Serfling => {
            let d = d.ok_or_else(|| Error::invalid("the serfling bound needs the dimension d"))?;
            if k > d {
                return Err(Error::invalid(format!("k={k} exceeds d={d}")));
            }
            serfling_effective_k(k, d)
        }
    };
    let epsilon = c * (log_term(n_points, delta) / (2.0 * effective_k)).sqrt();
    Ok(AchievableEpsilon {
        epsilon,
        guaranteed: epsilon <= 1.0,
    })
}

/// Half-width `ε‖X_i‖‖X_j‖` of the band that the rescaled projected dot
/// product `(d/k)(PX_i)ᵀ(PX_j)` stays in around `X_iᵀX_j`, with probability
/// at least `1 − 2δ` when `k` satisfies the norm bound.
pub fn dot_product_band(xi_norm: f64, xj_norm: f64, epsilon: f64) -> Result<f64> {
    if !(xi_norm >= 0.0 && xj_norm >= 0.0) {
        return Err(Error::invalid("norms must be non-negative"));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::invalid(format!("epsilon must be in (0, 1], got {epsilon}")));
    }
    Ok(epsilon * xi_norm * xj_norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn query(c: f64, epsilon: f64, delta: f64, n: u64, d: Option<u64>, variant: BoundVariant) -> BoundQuery {
        BoundQuery {
            c,
            epsilon,
            delta,
            n_points: n,
            d,
            variant,
        }
    }

    #[test]
    fn log_term_vanishes_clamps_to_one() {
        let r = required_k_basic(&query(1.0, 0.5, 1.0, 1, None, BoundVariant::Basic)).unwrap();
        assert_eq!(r.raw_bound, 0.0);
        assert_eq!(r.k, 1);
        assert!(r.feasible);
    }

    // Expected values from a 40-digit mpmath evaluation of the closed form:
    // B(c=2) = 97.648581164241389836, B(c=4) = 390.594324656965559344.
    #[test]
    fn worked_basic_values() {
        let r = required_k_basic(&query(2.0, 0.5, 0.05, 100, None, BoundVariant::Basic)).unwrap();
        assert!((r.raw_bound - 97.648_581_164_241_39).abs() < 1e-11);
        assert_eq!(r.k, 98);
        let r = required_k_basic(&query(4.0, 0.5, 0.05, 100, None, BoundVariant::Basic)).unwrap();
        assert!((r.raw_bound - 390.594_324_656_965_56).abs() < 1e-10);
        assert_eq!(r.k, 391);
    }

    #[test]
    fn basic_reports_infeasible_above_d() {
        let r = required_k_basic(&query(2.0, 0.5, 0.05, 100, Some(50), BoundVariant::Basic)).unwrap();
        assert_eq!(r.k, 98);
        assert!(!r.feasible);
    }

    #[test]
    fn worked_serfling_values() {
        let r = required_k_serfling(&query(2.0, 0.5, 0.05, 100, Some(1000), BoundVariant::Serfling))
            .unwrap();
        assert_eq!(r.k, 90);
        assert!(r.feasible);
        let r = required_k_serfling(&query(
            2.0,
            0.5,
            0.05,
            100,
            Some(1_000_000_000),
            BoundVariant::Serfling,
        ))
        .unwrap();
        assert_eq!(r.k, 98);
    }

    #[test]
    fn serfling_infeasible_when_bound_exceeds_d_squared() {
        // B = 100·ln(10⁴/0.01)/0.02 ≈ 69078 > d² = 10⁴
        let r = required_k_serfling(&query(10.0, 0.1, 0.01, 100, Some(100), BoundVariant::Serfling))
            .unwrap();
        assert!(!r.feasible);
        assert_eq!(r.k, 100);
    }

    #[test]
    fn serfling_requires_d() {
        assert!(required_k_serfling(&query(2.0, 0.5, 0.05, 100, None, BoundVariant::Serfling)).is_err());
    }

    #[test]
    fn validation() {
        let ok = query(2.0, 0.5, 0.05, 100, Some(10), BoundVariant::Basic);
        assert!(required_k(&BoundQuery { c: 0.5, ..ok }).is_err());
        assert!(required_k(&BoundQuery { epsilon: 0.0, ..ok }).is_err());
        assert!(required_k(&BoundQuery { epsilon: 1.5, ..ok }).is_err());
        assert!(required_k(&BoundQuery { delta: 0.0, ..ok }).is_err());
        assert!(required_k(&BoundQuery { delta: 1.1, ..ok }).is_err());
        assert!(required_k(&BoundQuery { n_points: 0, ..ok }).is_err());
        assert!(required_k(&BoundQuery { d: Some(0), ..ok }).is_err());
        assert!(required_k(&BoundQuery { c: f64::NAN, ..ok }).is_err());
    }

    // mpmath: 2·sqrt(ln(2e5)/196) = 0.49910272, 2·sqrt(ln(2e5)/(2·90000/911)) = 0.49709673
    #[test]
    fn achievable_epsilon_inverts_worked_examples() {
        let e = achievable_epsilon(2.0, 98, 0.05, 100, None, BoundVariant::Basic).unwrap();
        assert!((e.epsilon - 0.499_102_718_263_652_4).abs() < 1e-12);
        assert!(e.guaranteed);
        let e = achievable_epsilon(2.0, 90, 0.05, 100, Some(1000), BoundVariant::Serfling).unwrap();
        assert!((e.epsilon - 0.497_096_730_583_986_7).abs() < 1e-12);
    }

    #[test]
    fn achievable_epsilon_at_full_dimension() {
        let d = 400;
        let basic = achievable_epsilon(3.0, d, 0.1, 50, None, BoundVariant::Basic).unwrap();
        let serf = achievable_epsilon(3.0, d, 0.1, 50, Some(d), BoundVariant::Serfling).unwrap();
        let shrink = (1.0 / d as f64).sqrt();
        assert!((serf.epsilon - basic.epsilon * shrink).abs() < 1e-14);
    }

    #[test]
    fn achievable_epsilon_flags_large_values() {
        let e = achievable_epsilon(10.0, 1, 0.05, 100, None, BoundVariant::Basic).unwrap();
        assert!(e.epsilon > 1.0 && !e.guaranteed);
        assert!(achievable_epsilon(2.0, 0, 0.05, 100, None, BoundVariant::Basic).is_err());
        assert!(achievable_epsilon(2.0, 11, 0.05, 100, Some(10), BoundVariant::Serfling).is_err());
    }

    #[test]
    fn dot_band() {
        assert_eq!(dot_product_band(1.0, 1.0, 0.5).unwrap(), 0.5);
        assert_eq!(dot_product_band(0.0, 3.0, 0.5).unwrap(), 0.0);
        assert!(dot_product_band(-1.0, 1.0, 0.5).is_err());
        assert!(dot_product_band(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn dot_band_on_identical_vectors_is_the_norm_band() {
        // X_i = X_j: the dot product is ‖X‖² and the band is ε‖X‖²
        let norm = 2.5f64;
        assert_eq!(dot_product_band(norm, norm, 0.3).unwrap(), 0.3 * norm * norm);
    }
}
