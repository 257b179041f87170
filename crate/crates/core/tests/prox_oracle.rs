mod common;

use common::*;
use iht_core::scalar_prox::*;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = ProxParams> {
    (0.0..5.0f64, 0.0..2.0f64, 0.01..3.0f64, prop_oneof![Just(f64::INFINITY), 0.1..5.0f64])
        .prop_filter("L + alpha > 0", |(l, a, _, _)| l + a > 1e-3)
        .prop_map(|(l, alpha, beta, bound)| ProxParams { l, alpha, beta, bound })
}

#[test]
fn derived_examples_agree_with_oracle() {
    let step = 1e-4;
    let r = oracle_box_threshold(1.5, 1.0, 2.0, step);
    assert_eq!(r.minimizers, vec![1.5]);
    let r = oracle_box_threshold(3.0, 1.0, 2.0, step);
    assert_eq!(r.minimizers, vec![2.0]);

    let r = oracle_prox_l0(-3.0, 0.0, 1.0, 1.0, 1.0, 2.0, step);
    assert_eq!(r.minimizers, vec![1.5]);
    let r = oracle_prox_l0(-2.0, 0.0, 1.0, 1.0, 1.0, 2.0, step);
    assert_eq!(r.minimizers, vec![0.0, 1.0]);

    let r = oracle_prox_l1(-3.0, 0.0, 1.0, 1.0, 1.0, 2.0, step);
    assert_eq!(r.minimizers, vec![1.0]);
    let r = oracle_prox_l1(-10.0, 0.0, 1.0, 1.0, 1.0, 2.0, step);
    assert_eq!(r.minimizers, vec![2.0]);

    let r = oracle_prox_switch([-1.0, -1.0], [0.0, 0.0], 1.0, 1.0, 10.0, 1e-2, 1e-3);
    assert!(r.minimizers.iter().all(|m| m[0] == 0.0 || m[1] == 0.0));
    let r = oracle_prox_switch([-4.0, -4.0], [0.0, 0.0], 1.0, 1.0, 0.01, 1e-2, 1e-3);
    assert!(r.minimizers.iter().all(|m| (m[0] - 2.0).abs() < 1e-12 && (m[1] - 2.0).abs() < 1e-12));
}

#[test]
fn fixed_point_examples_via_self_map() {
    let p = ProxParams::new(1.0, 1.0, 1.0, 2.0).unwrap();
    assert!(prox_l0(-1.5, 1.5, &p).unwrap().contains(1.5, 0.0));
    assert!(fp_membership(1.5, -1.5, &p).unwrap());
    assert!(!prox_l0(0.0, 0.1, &p).unwrap().contains(0.1, 1e-12));
    assert!(!fp_membership(0.1, 0.0, &p).unwrap());
}

#[test]
fn pontryagin_consistency_at_zero_prox_weight() {
    // With L = 0, membership means u minimizes g·v + (α/2)v² + β|v|₀ over |v| ≤ b.
    let (alpha, beta, b) = (0.5, 0.3, 2.0);
    let p = ProxParams::new(0.0, alpha, beta, b).unwrap();
    for i in -40..=40 {
        let g = i as f64 * 0.05;
        let scan = oracle_prox_l0(g, 0.0, 0.0, alpha, beta, b, 1e-4);
        for j in -40..=40 {
            let u = j as f64 * 0.05;
            let optimal = l0_objective(u, g, 0.0, 0.0, alpha, beta) <= scan.value + 1e-10;
            assert_eq!(fp_membership(u, g, &p).unwrap(), optimal, "u = {u}, g = {g}");
        }
    }
}

#[test]
fn exceptional_case_branches_agree() {
    // sqrt(2s) = b: the two branch families of the fixed-point set coincide.
    let (l, alpha) = (1.0, 1.0);
    let b = 1.5;
    let beta = b * b / 2.0 * (l + alpha);
    let p = ProxParams::new(l, alpha, beta, b).unwrap();
    for i in -60..=60 {
        let g = i as f64 * 0.1;
        for u in [-b, 0.0, b] {
            let by_self_map = prox_l0(g, u, &p).unwrap().contains(u, 1e-12);
            assert_eq!(fp_membership(u, g, &p).unwrap(), by_self_map, "u = {u}, g = {g}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn prox_l0_is_global_minimizer(p in params(), g in -6.0..6.0f64, u_k in -3.0..3.0f64) {
        let set = prox_l0(g, u_k, &p).unwrap();
        let scan = oracle_prox_l0(g, u_k, p.l, p.alpha, p.beta, p.bound, 1e-3);
        for &v in set.values() {
            prop_assert!(l0_objective(v, g, u_k, p.l, p.alpha, p.beta) <= scan.value + 1e-10);
        }
    }

    #[test]
    fn sigma_separation(p in params(), g in -6.0..6.0f64, u_k in -3.0..3.0f64) {
        let s = sigma(&p).unwrap();
        for &v in prox_l0(g, u_k, &p).unwrap().values() {
            prop_assert!(v == 0.0 || v.abs() >= s - 1e-12);
            prop_assert!(v.abs() <= p.bound);
        }
    }

    #[test]
    fn variational_inequality(p in params(), g in -6.0..6.0f64, u_k in -3.0..3.0f64) {
        for &u in prox_l0(g, u_k, &p).unwrap().values() {
            if u == 0.0 {
                continue;
            }
            let lhs = g + p.l * (u - u_k) + p.alpha * u;
            let b = p.bound;
            let mut tests = vec![0.0, u + 1e-3, u - 1e-3];
            if b.is_finite() {
                tests.extend([-b, b]);
            }
            for v in tests {
                let v = v.clamp(-b, b);
                prop_assert!(lhs * (v - u) >= -1e-12, "u = {}, v = {}", u, v);
            }
        }
    }

    #[test]
    fn threshold_is_monotone(q1 in -6.0..6.0f64, q2 in -6.0..6.0f64, s in 0.0..3.0f64,
                             b in prop_oneof![Just(f64::INFINITY), 0.1..5.0f64]) {
        let a = box_hard_threshold(q1, s, b).unwrap();
        let c = box_hard_threshold(q2, s, b).unwrap();
        for &v1 in a.values() {
            for &v2 in c.values() {
                prop_assert!((v1 - v2) * (q1 - q2) >= 0.0);
            }
        }
    }

    #[test]
    fn threshold_has_closed_graph(s in 0.05..3.0f64, b in 0.1..5.0f64, side in prop::bool::ANY,
                                  k in 1u32..12) {
        // Approach the switching point from either side; limits of selections
        // must belong to the set at the tie point.
        let root = (2.0 * s).sqrt();
        let tie = if root <= b { root } else { b / 2.0 + s / b };
        let eps = 10f64.powi(-(k as i32));
        let q = if side { tie + eps } else { tie - eps };
        let at_tie = box_hard_threshold(tie, s, b).unwrap();
        for &v in box_hard_threshold(q, s, b).unwrap().values() {
            let limit = if v == 0.0 { 0.0 } else if root <= b { tie } else { b };
            prop_assert!(at_tie.contains(limit, 1e-12));
            prop_assert!((v - limit).abs() <= eps + 1e-12);
        }
    }

    #[test]
    fn fixed_points_persist_for_larger_l(p in params(), u in -5.0..5.0f64, g in -5.0..5.0f64,
                                         factor in 1.0..20.0f64) {
        if fp_membership(u, g, &p).unwrap() {
            prop_assert!(fp_membership(u, g, &p.with_l(p.l * factor + 1e-6)).unwrap());
        }
    }

    #[test]
    fn membership_matches_self_map(p in params(), u_k in -3.0..3.0f64, g in -5.0..5.0f64) {
        // Points produced by the prox are natural candidates for membership.
        let u = prox_l0(g, u_k, &p).unwrap().canonical();
        let by_self_map = prox_l0(g, u, &p).unwrap().contains(u, 1e-12);
        prop_assert_eq!(fp_membership(u, g, &p).unwrap(), by_self_map);
    }

    #[test]
    fn envelope_property(u in -6.0..6.0f64, alpha in 0.01..3.0f64, beta in 0.01..3.0f64) {
        let env = biconjugate_value(u, alpha, beta).unwrap();
        let orig = alpha / 2.0 * u * u + if u != 0.0 { beta } else { 0.0 };
        prop_assert!(env <= orig + 1e-12);
        prop_assert!(env >= alpha / 2.0 * u * u - 1e-12);
        let kink = (2.0 * beta / alpha).sqrt();
        let equal = (env - orig).abs() <= 1e-12;
        prop_assert_eq!(equal, u == 0.0 || u.abs() >= kink - 1e-12);
    }

    #[test]
    fn convexified_minimizers_are_never_fixed(alpha in 0.05..2.0f64, beta in 0.05..2.0f64,
                                              frac in 0.05..0.95f64, l in 0.01..50.0f64,
                                              negative in prop::bool::ANY) {
        let kink = (2.0 * beta / alpha).sqrt();
        let slope = (2.0 * alpha * beta).sqrt();
        let (u_bar, g) = if negative { (-frac * kink, slope) } else { (frac * kink, -slope) };
        prop_assert!(convexified_not_fixed_point_check(u_bar, g, alpha, beta, 10.0 * kink, l).unwrap());
    }
}
