//! Closed-form pointwise proximal maps.
//!
//! Every IHT step decouples into independent scalar problems of the form
//!
//! ```text
//!     min_{|u| ≤ b}  g·u + (L/2)(u − u_k)² + (α/2)u² + β|u|₀
//! ```
//!
//! which reduce to the box-constrained hard-thresholding map `H_{s,b}` below.
//! Solution sets have at most two elements; when there are two, one of them is
//! zero and zero is the canonical (measurable) selection.

use crate::error::{invalid, Result};

/// Absolute tolerance for detecting exact ties in the threshold conditions.
pub const TIE_TOL: f64 = 1e-12;

#[inline]
fn le(a: f64, b: f64) -> bool {
    a <= b + TIE_TOL
}

/// Solution set of a scalar thresholding problem: one value, or `{0, v}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarSolutionSet {
    values: [f64; 2],
    len: usize,
}

impl ScalarSolutionSet {
    pub fn single(v: f64) -> Self {
        Self { values: [v, 0.0], len: 1 }
    }

    /// The set `{0, v}`; collapses to `{0}` when `v == 0`.
    pub fn with_zero(v: f64) -> Self {
        if v == 0.0 {
            Self::single(0.0)
        } else {
            Self { values: [0.0, v], len: 2 }
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values[..self.len]
    }

    /// Tie-broken representative: zero whenever the set is multi-valued.
    pub fn canonical(&self) -> f64 {
        if self.len == 2 {
            0.0
        } else {
            self.values[0]
        }
    }

    pub fn is_multivalued(&self) -> bool {
        self.len == 2
    }

    pub fn contains(&self, u: f64, tol: f64) -> bool {
        self.values().iter().any(|v| (v - u).abs() <= tol)
    }

    /// Distance from `u` to the closest element.
    pub fn distance(&self, u: f64) -> f64 {
        self.values()
            .iter()
            .map(|v| (v - u).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Parameters of the pointwise `L⁰` prox: prox weight `L`, Tikhonov weight `α`,
/// sparsity weight `β` and box bound `b` (`f64::INFINITY` for no bound).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxParams {
    pub l: f64,
    pub alpha: f64,
    pub beta: f64,
    pub bound: f64,
}

impl ProxParams {
    pub fn new(l: f64, alpha: f64, beta: f64, bound: f64) -> Result<Self> {
        let p = Self { l, alpha, beta, bound };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l.is_finite() && self.l >= 0.0) {
            return invalid(format!("prox weight L must be finite and >= 0, got {}", self.l));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return invalid(format!("alpha must be finite and >= 0, got {}", self.alpha));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return invalid(format!("beta must be finite and > 0, got {}", self.beta));
        }
        if !(self.bound > 0.0) {
            return invalid(format!("bound must be in (0, inf], got {}", self.bound));
        }
        if self.l + self.alpha <= 0.0 {
            return invalid("L + alpha must be positive");
        }
        Ok(())
    }

    pub fn with_l(self, l: f64) -> Self {
        Self { l, ..self }
    }

    /// `L + α`.
    pub fn weight(&self) -> f64 {
        self.l + self.alpha
    }

    /// Threshold parameter `s = β/(L+α)`.
    pub fn s(&self) -> f64 {
        self.beta / self.weight()
    }
}

/// A point of the two-control switching problem.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SwitchingPoint {
    pub u1: f64,
    pub u2: f64,
}

impl SwitchingPoint {
    pub fn new(u1: f64, u2: f64) -> Self {
        Self { u1, u2 }
    }

    pub fn product_is_zero(&self) -> bool {
        self.u1 == 0.0 || self.u2 == 0.0
    }
}

/// Hard-thresholding operator `H_t`: `{q}` if `|q| > t`, `{0, q}` if `|q| = t`,
/// `{0}` otherwise.
pub fn hard_threshold(q: f64, t: f64) -> Result<ScalarSolutionSet> {
    if !q.is_finite() {
        return invalid(format!("threshold argument must be finite, got {q}"));
    }
    if !(t.is_finite() && t > 0.0) {
        return invalid(format!("threshold must be finite and > 0, got {t}"));
    }
    let gap = q.abs() - t;
    Ok(if gap.abs() <= TIE_TOL {
        ScalarSolutionSet::with_zero(q)
    } else if gap > 0.0 {
        ScalarSolutionSet::single(q)
    } else {
        ScalarSolutionSet::single(0.0)
    })
}

/// Box-constrained hard threshold `H_{s,b}(q)`: all global minimizers of
/// `−q·u + ½u² + s|u|₀` over `|u| ≤ b`.
///
/// The case analysis distinguishes the bound-active regime `b < √(2s)`, where the
/// switch between `0` and `±b` happens at `|q| = b/2 + s/b`, from the regime
/// `b ≥ √(2s)` where the threshold is `√(2s)` and values in `[√(2s), b]` pass
/// through unchanged.
pub fn box_hard_threshold(q: f64, s: f64, b: f64) -> Result<ScalarSolutionSet> {
    if !q.is_finite() {
        return invalid(format!("threshold argument must be finite, got {q}"));
    }
    if !(s.is_finite() && s >= 0.0) {
        return invalid(format!("s must be finite and >= 0, got {s}"));
    }
    if !(b > 0.0) {
        return invalid(format!("bound must be in (0, inf], got {b}"));
    }
    let root = (2.0 * s).sqrt();
    if b == f64::INFINITY {
        // Bound-active branches are void; max(+inf, +inf/2) = +inf.
        return if s == 0.0 {
            Ok(ScalarSolutionSet::single(q))
        } else {
            hard_threshold(q, root)
        };
    }

    let a = q.abs();
    let knee = b / 2.0 + s / b;
    let mut nonzero = None;
    if le(b.max(knee), a) {
        nonzero = Some(b.copysign(q));
    } else if le(root, a) && le(a, b) && q != 0.0 {
        nonzero = Some(q.clamp(-b, b));
    }
    let zero = (le(b, root) && le(a, knee)) || (le(root, b) && le(a, root));

    Ok(match (nonzero, zero) {
        (Some(v), true) => ScalarSolutionSet::with_zero(v),
        (Some(v), false) => ScalarSolutionSet::single(v),
        // The conditions cover the real line, so `nonzero == None` implies zero.
        (None, _) => ScalarSolutionSet::single(0.0),
    })
}

/// Solution set of `min_{|u|≤b} g_k·u + (L/2)(u−u_k)² + (α/2)u² + β|u|₀`.
pub fn prox_l0(g_k: f64, u_k: f64, p: &ProxParams) -> Result<ScalarSolutionSet> {
    p.validate()?;
    if !(g_k.is_finite() && u_k.is_finite()) {
        return invalid("gradient and previous iterate must be finite");
    }
    let w = p.weight();
    box_hard_threshold((p.l * u_k - g_k) / w, p.beta / w, p.bound)
}

/// Objective of the scalar `L⁰` prox subproblem.
pub fn prox_l0_objective(u: f64, g_k: f64, u_k: f64, p: &ProxParams) -> f64 {
    let d = u - u_k;
    g_k * u + 0.5 * p.l * d * d + 0.5 * p.alpha * u * u + if u != 0.0 { p.beta } else { 0.0 }
}

/// Minimal magnitude of a nonzero prox output: `min(b, √(2β/(L+α)))`.
pub fn sigma(p: &ProxParams) -> Result<f64> {
    p.validate()?;
    Ok(p.bound.min((2.0 * p.s()).sqrt()))
}

/// Soft threshold `sign(z)·max(|z| − γ, 0)`.
pub fn soft_threshold(z: f64, gamma: f64) -> f64 {
    z.signum() * (z.abs() - gamma).max(0.0)
}

/// Unique minimizer of `g_k·u + (L/2)(u−u_k)² + (α/2)u² + γ|u|` over `|u| ≤ b`.
pub fn prox_l1(g_k: f64, u_k: f64, l: f64, alpha: f64, gamma: f64, b: f64) -> Result<f64> {
    if !(l >= 0.0 && alpha >= 0.0 && l.is_finite() && alpha.is_finite()) {
        return invalid("L and alpha must be finite and >= 0");
    }
    if l + alpha <= 0.0 {
        return invalid("L + alpha must be positive");
    }
    if !(gamma.is_finite() && gamma >= 0.0) {
        return invalid(format!("gamma must be finite and >= 0, got {gamma}"));
    }
    if !(b > 0.0) {
        return invalid(format!("bound must be in (0, inf], got {b}"));
    }
    let z = l * u_k - g_k;
    if z == 0.0 {
        return Ok(0.0);
    }
    Ok((soft_threshold(z, gamma) / (l + alpha)).clamp(-b, b))
}

/// Global minimizer of `gᵀu + (L/2)‖u−u_k‖² + (α/2)‖u‖² + β|u₁u₂|₀` over `ℝ²`.
///
/// Up to a constant the objective is `((L+α)/2)‖u − m‖² + β|u₁u₂|₀` with
/// `m = (L·u_k − g)/(L+α)`, so the minimizer is one of `m`, `(0, m₂)` or
/// `(m₁, 0)`. Ties prefer a zero product, then `(0, m₂)`.
pub fn prox_switch(
    g: SwitchingPoint,
    u_k: SwitchingPoint,
    l: f64,
    alpha: f64,
    beta: f64,
) -> Result<SwitchingPoint> {
    if !(l >= 0.0 && alpha >= 0.0 && l.is_finite() && alpha.is_finite()) {
        return invalid("L and alpha must be finite and >= 0");
    }
    if l + alpha <= 0.0 {
        return invalid("L + alpha must be positive");
    }
    if !(beta.is_finite() && beta > 0.0) {
        return invalid(format!("beta must be finite and > 0, got {beta}"));
    }
    let w = l + alpha;
    let m1 = (l * u_k.u1 - g.u1) / w;
    let m2 = (l * u_k.u2 - g.u2) / w;

    let drop_first = 0.5 * w * m1 * m1;
    let drop_second = 0.5 * w * m2 * m2;
    let (mut best, mut best_val) = (SwitchingPoint::new(0.0, m2), drop_first);
    if drop_second < best_val - TIE_TOL {
        best = SwitchingPoint::new(m1, 0.0);
        best_val = drop_second;
    }
    if m1 != 0.0 && m2 != 0.0 && beta < best_val - TIE_TOL {
        best = SwitchingPoint::new(m1, m2);
    }
    Ok(best)
}

/// Membership `u ∈ H^FP_{α,β,L,b}(g)`: whether `u` is a fixed point of the
/// thresholding step with gradient value `g` and prox weight `L`.
///
/// Equivalent to `u ∈ prox_l0(g, u, p)` with ties included. With `L = 0` this is
/// the pointwise maximum principle.
pub fn fp_membership(u: f64, g: f64, p: &ProxParams) -> Result<bool> {
    p.validate()?;
    let (l, alpha, b) = (p.l, p.alpha, p.bound);
    let w = p.weight();
    let s = p.s();
    let root = (2.0 * s).sqrt();
    let eq = |x: f64, y: f64| (x - y).abs() <= TIE_TOL * (1.0 + y.abs());

    let interior = if alpha > 0.0 {
        eq(alpha * u, -g) && le(alpha * root, g.abs()) && le(g.abs(), alpha * b)
    } else {
        g.abs() <= TIE_TOL && le(root, u.abs()) && le(u.abs(), b)
    };
    if interior {
        return Ok(true);
    }

    let finite_bound = b.is_finite();
    let member = if le(root, b) {
        (finite_bound && eq(u, -b) && le(alpha * b, g))
            || (finite_bound && eq(u, b) && le(g, -alpha * b))
            || (u == 0.0 && le(g.abs(), w * root))
    } else {
        let knee = b / 2.0 + s / b;
        let edge = w * knee - l * b;
        (eq(u, -b) && le(edge, g)) || (eq(u, b) && le(g, -edge)) || (u == 0.0 && le(g.abs(), w * knee))
    };
    Ok(member)
}

/// Convex envelope of `u ↦ (α/2)u² + β|u|₀`: linear with slope `√(2αβ)` for
/// `|u| ≤ √(2β/α)`, equal to the original integrand outside.
pub fn biconjugate_value(u: f64, alpha: f64, beta: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return invalid(format!("alpha must be finite and > 0, got {alpha}"));
    }
    if !(beta.is_finite() && beta > 0.0) {
        return invalid(format!("beta must be finite and > 0, got {beta}"));
    }
    let a = u.abs();
    Ok(if a >= (2.0 * beta / alpha).sqrt() {
        beta + 0.5 * alpha * u * u
    } else {
        (2.0 * alpha * beta).sqrt() * a
    })
}

/// Numerical check that a minimizer `ū` of the convexified scalar problem
/// `g·u + g_α(u)` with `0 < |ū| < √(2β/α)` is not a fixed point of the
/// thresholding step for prox weight `L > 0`.
///
/// Returns `true` when `ū` is not in the prox set and the canonical prox step
/// strictly decreases `g(u−ū) + (L/2)(u−ū)² + (α/2)u² + β|u|₀`.
pub fn convexified_not_fixed_point_check(
    u_bar: f64,
    g: f64,
    alpha: f64,
    beta: f64,
    bound: f64,
    l: f64,
) -> Result<bool> {
    let p = ProxParams::new(l, alpha, beta, bound)?;
    if !(alpha > 0.0 && l > 0.0) {
        return invalid("alpha and L must be positive");
    }
    let slope = (2.0 * alpha * beta).sqrt();
    if (g.abs() - slope).abs() > TIE_TOL {
        return invalid(format!("|g| must equal sqrt(2 alpha beta) = {slope}, got {g}"));
    }
    let kink = (2.0 * beta / alpha).sqrt();
    let a = u_bar.abs();
    if !(a > 0.0 && a < kink && a <= bound) {
        return invalid(format!("u_bar must satisfy 0 < |u_bar| < {kink} and |u_bar| <= b"));
    }
    if u_bar * g > 0.0 {
        return invalid("u_bar does not minimize g*u + g_alpha(u): sign must oppose g");
    }

    let set = prox_l0(g, u_bar, &p)?;
    let objective = |u: f64| {
        let d = u - u_bar;
        g * d + 0.5 * l * d * d + 0.5 * alpha * u * u + if u != 0.0 { beta } else { 0.0 }
    };
    let moved = !set.contains(u_bar, TIE_TOL);
    Ok(moved && objective(set.canonical()) < objective(u_bar))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(l: f64, alpha: f64, beta: f64, bound: f64) -> ProxParams {
        ProxParams::new(l, alpha, beta, bound).unwrap()
    }

    #[test]
    fn hard_threshold_cases() {
        assert_eq!(hard_threshold(2.0, 1.0).unwrap().values(), &[2.0]);
        assert_eq!(hard_threshold(0.0, 1.0).unwrap().values(), &[0.0]);
        let tie = hard_threshold(1.0, 1.0).unwrap();
        assert_eq!(tie.values(), &[0.0, 1.0]);
        assert_eq!(tie.canonical(), 0.0);
        assert_eq!(hard_threshold(-1.0, 1.0).unwrap().values(), &[0.0, -1.0]);
    }

    #[test]
    fn hard_threshold_rejects_bad_input() {
        assert!(hard_threshold(f64::NAN, 1.0).is_err());
        assert!(hard_threshold(1.0, 0.0).is_err());
        assert!(hard_threshold(1.0, -2.0).is_err());
    }

    #[test]
    fn box_hard_threshold_cases() {
        // values frozen from the brute-force grid oracle in tests/common
        assert_eq!(box_hard_threshold(1.5, 1.0, 2.0).unwrap().values(), &[1.5]);
        assert_eq!(box_hard_threshold(3.0, 1.0, 2.0).unwrap().values(), &[2.0]);
        assert_eq!(box_hard_threshold(-3.0, 1.0, 2.0).unwrap().values(), &[-2.0]);
        assert_eq!(box_hard_threshold(0.0, 1.0, 2.0).unwrap().values(), &[0.0]);
        assert!(box_hard_threshold(1.0, -1.0, 2.0).is_err());
        assert!(box_hard_threshold(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn box_hard_threshold_bound_active_regime() {
        // s = 3, b = 1: sqrt(2s) > b, zero up to |q| = b/2 + s/b = 3.5
        assert_eq!(box_hard_threshold(3.4, 3.0, 1.0).unwrap().values(), &[0.0]);
        assert_eq!(box_hard_threshold(3.5, 3.0, 1.0).unwrap().values(), &[0.0, 1.0]);
        assert_eq!(box_hard_threshold(-3.6, 3.0, 1.0).unwrap().values(), &[-1.0]);
    }

    #[test]
    fn unbounded_box_matches_hard_threshold() {
        for &q in &[-3.0, -1.0, 0.0, 0.5, 2.0_f64.sqrt(), 4.0] {
            let a = box_hard_threshold(q, 1.0, f64::INFINITY).unwrap();
            let b = hard_threshold(q, 2.0_f64.sqrt()).unwrap();
            assert_eq!(a, b, "q = {q}");
        }
        assert_eq!(box_hard_threshold(0.3, 0.0, f64::INFINITY).unwrap().values(), &[0.3]);
    }

    #[test]
    fn exceptional_case_root_equals_bound() {
        // sqrt(2s) = b = 2 -> both zero branches agree; tie at |q| = 2
        let set = box_hard_threshold(2.0, 2.0, 2.0).unwrap();
        assert_eq!(set.values(), &[0.0, 2.0]);
        assert_eq!(box_hard_threshold(1.99, 2.0, 2.0).unwrap().values(), &[0.0]);
        assert_eq!(box_hard_threshold(2.01, 2.0, 2.0).unwrap().values(), &[2.0]);
    }

    #[test]
    fn prox_l0_examples() {
        let p = params(1.0, 1.0, 1.0, 2.0);
        assert_eq!(prox_l0(-3.0, 0.0, &p).unwrap().values(), &[1.5]);
        assert_eq!(prox_l0(0.0, 0.0, &p).unwrap().values(), &[0.0]);
        let tie = prox_l0(-2.0, 0.0, &p).unwrap();
        assert_eq!(tie.values(), &[0.0, 1.0]);
        assert_eq!(tie.canonical(), 0.0);
        let obj = |u| prox_l0_objective(u, -2.0, 0.0, &p);
        assert!((obj(0.0) - obj(1.0)).abs() < 1e-15);
    }

    #[test]
    fn prox_l0_rejects_zero_weight() {
        let p = ProxParams { l: 0.0, alpha: 0.0, beta: 1.0, bound: 1.0 };
        assert!(prox_l0(1.0, 0.0, &p).is_err());
        assert!(ProxParams::new(0.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma(&params(1.0, 1.0, 1.0, 2.0)).unwrap(), 1.0);
        assert_eq!(sigma(&params(1.0, 1.0, 1.0, 0.5)).unwrap(), 0.5);
        let s = sigma(&params(0.0, 0.01, 0.01, 4.0)).unwrap();
        assert!((s - 2.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn prox_l1_examples() {
        assert_eq!(prox_l1(0.0, 0.0, 1.0, 1.0, 1.0, 2.0).unwrap(), 0.0);
        assert_eq!(prox_l1(-3.0, 0.0, 1.0, 1.0, 1.0, 2.0).unwrap(), 1.0);
        assert_eq!(prox_l1(-10.0, 0.0, 1.0, 1.0, 1.0, 2.0).unwrap(), 2.0);
        assert_eq!(prox_l1(10.0, 0.0, 1.0, 1.0, 1.0, f64::INFINITY).unwrap(), -4.5);
        assert!(prox_l1(1.0, 0.0, 0.0, 0.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn prox_switch_examples() {
        let z = SwitchingPoint::default();
        assert_eq!(prox_switch(z, z, 1.0, 1.0, 1.0).unwrap(), z);

        let u = prox_switch(SwitchingPoint::new(-1.0, -1.0), z, 1.0, 1.0, 10.0).unwrap();
        assert!(u.product_is_zero());
        assert_eq!(u, SwitchingPoint::new(0.0, 0.5));

        let u = prox_switch(SwitchingPoint::new(-4.0, -4.0), z, 1.0, 1.0, 0.01).unwrap();
        assert_eq!(u, SwitchingPoint::new(2.0, 2.0));
    }

    #[test]
    fn prox_switch_prefers_larger_component() {
        let z = SwitchingPoint::default();
        let u = prox_switch(SwitchingPoint::new(-3.0, -1.0), z, 1.0, 1.0, 10.0).unwrap();
        assert_eq!(u, SwitchingPoint::new(1.5, 0.0));
    }

    #[test]
    fn fp_membership_examples() {
        let p = params(1.0, 1.0, 1.0, 2.0);
        assert!(fp_membership(0.0, 0.0, &p).unwrap());
        assert!(fp_membership(1.5, -1.5, &p).unwrap());
        assert!(prox_l0(-1.5, 1.5, &p).unwrap().contains(1.5, 0.0));
        assert!(!fp_membership(0.1, 0.0, &p).unwrap());
        assert!(!prox_l0(0.0, 0.1, &p).unwrap().contains(0.1, TIE_TOL));
    }

    #[test]
    fn fp_membership_at_bound() {
        let p = params(1.0, 1.0, 1.0, 2.0);
        assert!(fp_membership(2.0, -2.5, &p).unwrap());
        assert!(fp_membership(-2.0, 2.0, &p).unwrap());
        assert!(!fp_membership(2.0, -1.0, &p).unwrap());
        // bound-active regime (alpha, beta, L, b) = (1, 3, 1, 1)
        let q = params(1.0, 1.0, 3.0, 1.0);
        let edge = 2.0 * (0.5 + 1.5) - 1.0;
        assert!(fp_membership(-1.0, edge, &q).unwrap());
        assert!(!fp_membership(-1.0, edge - 0.1, &q).unwrap());
        assert!(fp_membership(0.0, 4.0, &q).unwrap());
    }

    #[test]
    fn biconjugate_examples() {
        assert_eq!(biconjugate_value(2.0, 2.0, 1.0).unwrap(), 5.0);
        assert_eq!(biconjugate_value(0.0, 2.0, 1.0).unwrap(), 0.0);
        assert_eq!(biconjugate_value(0.5, 2.0, 1.0).unwrap(), 1.0);
        assert!(biconjugate_value(1.0, 0.0, 1.0).is_err());
        // continuity at the kink sqrt(2 beta / alpha) = 1
        let below = biconjugate_value(1.0 - 1e-12, 2.0, 1.0).unwrap();
        let above = biconjugate_value(1.0, 2.0, 1.0).unwrap();
        assert!((below - above).abs() < 1e-11);
    }

    #[test]
    fn convexified_solution_is_not_a_fixed_point() {
        assert!(convexified_not_fixed_point_check(1.0, -2.0, 1.0, 2.0, 10.0, 1.0).unwrap());
        assert!(convexified_not_fixed_point_check(-0.5, 1.0, 1.0, 0.5, 10.0, 0.5).unwrap());
        assert!(convexified_not_fixed_point_check(1.0, -2.0, 1.0, 2.0, 10.0, 100.0).unwrap());
    }

    #[test]
    fn convexified_check_validates_preconditions() {
        // |g| != sqrt(2 alpha beta)
        assert!(convexified_not_fixed_point_check(1.0, -1.0, 1.0, 2.0, 10.0, 1.0).is_err());
        // u_bar outside the linear region
        assert!(convexified_not_fixed_point_check(3.0, -2.0, 1.0, 2.0, 10.0, 1.0).is_err());
        // wrong sign
        assert!(convexified_not_fixed_point_check(1.0, 2.0, 1.0, 2.0, 10.0, 1.0).is_err());
        assert!(convexified_not_fixed_point_check(1.0, -2.0, 1.0, 2.0, 10.0, 0.0).is_err());
    }
}
