use fel_core::exponent::{
    e_fc_gamma, e_fcs, forney_exponent, multilevel_exponent, one_level_exponent, one_level_lower_bound, random_fountain_exponent,
    suboptimal_outer_rate, OptimizerGrid,
};
use fel_core::{Channel, Nats};
use proptest::prelude::*;

fn grid() -> OptimizerGrid {
    OptimizerGrid::default()
}

#[test]
fn exponents_vanish_near_capacity_and_grow_below_it() {
    let ch = Channel::bsc(0.05).unwrap();
    let c = 0.693147 - 0.198515; // ln 2 - h(0.05), nats
    let lo = one_level_exponent(Nats(0.2 * c), &ch, &grid()).unwrap().value.get();
    let hi = one_level_exponent(Nats(0.98 * c), &ch, &grid()).unwrap().value.get();
    assert!(lo > hi && hi >= 0.0 && hi < 1e-3, "{lo} {hi}");
}

#[test]
fn rates_at_or_above_capacity_are_rejected() {
    let ch = Channel::bsc(0.1).unwrap();
    assert!(one_level_exponent(Nats(0.37), &ch, &grid()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bracket_ordering(p in 0.02f64..0.3, frac in 0.1f64..0.9) {
        let ch = Channel::bsc(p).unwrap();
        let c = std::f64::consts::LN_2 + p * p.ln() + (1.0 - p) * (1.0 - p).ln();
        let r = Nats(frac * c);
        let g = grid();
        let lower = one_level_lower_bound(r, &ch, &g).unwrap().value.get();
        let one = one_level_exponent(r, &ch, &g).unwrap().value.get();
        let forney = forney_exponent(r, &ch, &g).unwrap().value.get();
        let m4 = multilevel_exponent(r, &ch, 4, &g).unwrap().value.get();
        let fountain = random_fountain_exponent(r, &ch, &g).unwrap().value.get();
        prop_assert!(lower <= one + 1e-9);
        prop_assert!(one <= forney + 1e-6);
        prop_assert!(one <= m4 + 1e-9);
        prop_assert!(m4 <= fountain + 1e-9);
    }

    #[test]
    fn suboptimal_outer_rate_is_the_fixed_ro_exponent(gamma in 0.05f64..0.99, t in 0.0f64..1.0) {
        let ro = gamma + t * (1.0 - gamma);
        let ch = Channel::bsc(0.1).unwrap();
        let px = fel_core::InputDistribution::uniform(2);
        let v = e_fcs(gamma, &ch, &px, &grid()).unwrap().get();
        let at_sub = e_fc_gamma(gamma, &ch, &px, suboptimal_outer_rate(gamma), &grid()).unwrap().get();
        let other = e_fc_gamma(gamma, &ch, &px, ro, &grid()).unwrap().get();
        prop_assert!(v > 0.0);
        prop_assert!((v - at_sub).abs() <= 1e-9 * v.max(1.0));
        // never far from the best fixed r_o
        prop_assert!(other <= v * 1.01 + 1e-9);
    }
}
