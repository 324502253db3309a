use approx::assert_relative_eq;
use jamroute_core::{
    approx_link_outage, end_to_end_outage, link_outage, mc_link_outage, sir_threshold, JammerLink, LinkGeometry,
    QosParams,
};
use proptest::prelude::*;

fn jammer() -> impl Strategy<Value = JammerLink> {
    (0.0..2.0f64, 0.5..150.0f64).prop_map(|(power_w, distance)| JammerLink { power_w, distance })
}

fn link() -> impl Strategy<Value = LinkGeometry> {
    (0.5..150.0f64, prop::collection::vec(jammer(), 0..20))
        .prop_map(|(d, js)| LinkGeometry::new(d, js).unwrap())
}

fn qos() -> impl Strategy<Value = QosParams> {
    (0.05..3.0f64, 2.0..6.0f64).prop_map(|(rho, alpha)| QosParams::new(rho, alpha, 0.1, 15.0).unwrap())
}

/// Closed-form outage written out from distances, independent of the library's weights.
fn reference_outage(power: f64, link: &LinkGeometry, q: &QosParams) -> f64 {
    let signal = link.tx_rx_distance.powf(-q.alpha) * power;
    let mut success = 1.0;
    for j in &link.jammers {
        success /= 1.0 + q.gamma * j.power_w * j.distance.powf(-q.alpha) / signal;
    }
    1.0 - success
}

fn total_weight(l: &LinkGeometry, q: &QosParams) -> f64 {
    l.jammers.iter().map(|j| j.power_w * (l.tx_rx_distance / j.distance).powf(q.alpha)).sum()
}

proptest! {
    #[test]
    fn matches_reference_formula(l in link(), q in qos(), power in 1e-3..100.0f64) {
        let p = link_outage(power, &l, &q).unwrap();
        assert_relative_eq!(p, reference_outage(power, &l, &q), max_relative = 1e-9, epsilon = 1e-14);
    }

    #[test]
    fn outage_is_a_probability_decreasing_in_power(l in link(), q in qos(), power in 1e-3..100.0f64, k in 1.01..10.0f64) {
        let lo = link_outage(power, &l, &q).unwrap();
        let hi = link_outage(power * k, &l, &q).unwrap();
        prop_assert!((0.0..=1.0).contains(&lo));
        prop_assert!(hi <= lo);
        // Strict unless one side has saturated in floating point.
        if l.jammers.iter().any(|j| j.power_w > 0.0) && lo < 1.0 - 1e-9 && hi > 1e-9 {
            prop_assert!(hi < lo);
        }
    }

    #[test]
    fn power_limits(l in link(), q in qos()) {
        let w = total_weight(&l, &q);
        prop_assume!(w > 0.0);
        // Outage → 0 as P/γΣw → ∞ and → 1 as it → 0.
        prop_assert!(link_outage(1e9 * q.gamma * w, &l, &q).unwrap() < 1e-8);
        prop_assert!(link_outage(1e-9 * q.gamma * w, &l, &q).unwrap() > 0.99);
    }

    #[test]
    fn approximation_upper_bounds_exact(l in link(), q in qos(), power in 1e-3..100.0f64) {
        let exact = link_outage(power, &l, &q).unwrap();
        let approx = approx_link_outage(power, &l, &q).unwrap();
        prop_assert!(approx >= exact - 1e-15, "{approx} < {exact}");
    }

    #[test]
    fn invariant_under_uniform_scaling(l in link(), q in qos(), power in 1e-3..100.0f64, c in 0.1..10.0f64) {
        let scaled = LinkGeometry::new(
            l.tx_rx_distance * c,
            l.jammers.iter().map(|j| JammerLink { power_w: j.power_w, distance: j.distance * c }).collect(),
        ).unwrap();
        assert_relative_eq!(
            link_outage(power, &l, &q).unwrap(),
            link_outage(power, &scaled, &q).unwrap(),
            max_relative = 1e-9,
            epsilon = 1e-14
        );
    }

    #[test]
    fn composition_of_equal_links(p in 0.0..0.9f64, m in 1usize..64) {
        let e2e = end_to_end_outage(&vec![p; m]);
        assert_relative_eq!(e2e, 1.0 - (1.0 - p).powi(m as i32), epsilon = 1e-12);
    }

    #[test]
    fn composition_is_order_free_and_monotone(ps in prop::collection::vec(0.0..1.0f64, 1..10)) {
        let mut rev = ps.clone();
        rev.reverse();
        assert_relative_eq!(end_to_end_outage(&ps), end_to_end_outage(&rev), epsilon = 1e-15);
        let max = ps.iter().cloned().fold(0.0, f64::max);
        prop_assert!(end_to_end_outage(&ps) >= max - 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn monte_carlo_within_clt_bound(l in link(), q in qos(), target in 0.02..0.6f64, seed in any::<u64>()) {
        // Pick the power that hits `target` under the single-weight lower bound
        // so that the simulated outage is well inside (0, 1).
        let w = total_weight(&l, &q);
        prop_assume!(w > 0.0);
        let power = q.gamma * w * (1.0 - target) / target;
        let samples = 200_000;
        let p = link_outage(power, &l, &q).unwrap();
        let mc = mc_link_outage(power, &l, &q, samples, seed).unwrap();
        let bound = 4.0 * (p * (1.0 - p) / samples as f64).sqrt();
        prop_assert!((mc - p).abs() <= bound, "mc {mc} closed {p} bound {bound}");
    }
}

#[test]
fn threshold_matches_shannon_inversion() {
    for rho in [0.0, 0.1, 0.5, 1.0, 2.0, 4.0] {
        assert_relative_eq!(sir_threshold(rho).unwrap(), 2f64.powf(rho) - 1.0, epsilon = 1e-15);
        let q = QosParams::new(rho, 2.0, 0.1, 1.0).unwrap();
        assert_eq!(q.gamma, sir_threshold(rho).unwrap());
    }
    assert!(sir_threshold(-1.0).is_err());
}

#[test]
fn monte_carlo_is_deterministic() {
    let l = LinkGeometry::new(10.0, vec![JammerLink { power_w: 0.1, distance: 7.0 }]).unwrap();
    let q = QosParams::new(1.0, 2.0, 0.1, 15.0).unwrap();
    assert_eq!(
        mc_link_outage(0.5, &l, &q, 50_000, 9).unwrap(),
        mc_link_outage(0.5, &l, &q, 50_000, 9).unwrap()
    );
}
