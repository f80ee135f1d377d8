mod common;

use frp_core::requirements::{NetLoadProfile, RampRequirements, TerminalRule};
use proptest::prelude::*;

fn profile_strategy() -> impl Strategy<Value = NetLoadProfile> {
    (1usize..=24)
        .prop_flat_map(|h| {
            (
                proptest::collection::vec(0.0f64..5000.0, h),
                proptest::collection::vec(0.0f64..5000.0, 4 * h),
                proptest::collection::vec(0.0f64..200.0, h),
                0.1f64..3.0,
            )
        })
        .prop_map(|(hourly, quarterly, sigma, z)| NetLoadProfile::with_hourly_sigma(hourly, quarterly, sigma, z).unwrap())
}

proptest! {
    #[test]
    fn matches_independent_evaluator(p in profile_strategy()) {
        let got = RampRequirements::compute(&p, TerminalRule::Zero);
        let want = common::oracle_requirements(&p);
        prop_assert_eq!(&got.up, &want.up);
        prop_assert_eq!(&got.down, &want.down);
        prop_assert_eq!(&got.up_quarters, &want.up_quarters);
        prop_assert_eq!(&got.down_quarters, &want.down_quarters);
        prop_assert_eq!(&got.up_intra_rhs, &want.up_rhs);
        prop_assert_eq!(&got.down_intra_rhs, &want.down_rhs);
    }

    #[test]
    fn requirements_are_non_negative(p in profile_strategy()) {
        for rule in [TerminalRule::Zero, TerminalRule::RepeatLast] {
            let r = RampRequirements::compute(&p, rule);
            let all = r.up.iter().chain(&r.down).chain(&r.up_intra_rhs).chain(&r.down_intra_rhs)
                .chain(r.up_quarters.iter().flatten()).chain(r.down_quarters.iter().flatten());
            for &x in all {
                prop_assert!(x >= 0.0);
            }
        }
    }

    #[test]
    fn requirements_grow_with_z(p in profile_strategy(), dz in 0.0f64..2.0) {
        let lo = RampRequirements::compute(&p, TerminalRule::Zero);
        let hi = RampRequirements::compute(&p.with_z(p.z() + dz).unwrap(), TerminalRule::Zero);
        let pairs = [(&lo.up, &hi.up), (&lo.down, &hi.down), (&lo.up_intra_rhs, &hi.up_intra_rhs), (&lo.down_intra_rhs, &hi.down_intra_rhs)];
        for (a, b) in pairs {
            for (x, y) in a.iter().zip(b) {
                prop_assert!(x <= y);
            }
        }
    }

    #[test]
    fn zero_sigma_is_the_forecast_step(p in profile_strategy()) {
        let flat = NetLoadProfile::with_hourly_sigma(p.hourly().to_vec(), p.quarterly().to_vec(), vec![0.0; p.hours()], p.z()).unwrap();
        let r = RampRequirements::compute(&flat, TerminalRule::Zero);
        let nl = flat.hourly();
        for t in 0..nl.len() - 1 {
            prop_assert_eq!(r.up[t], (nl[t + 1] - nl[t]).max(0.0));
            prop_assert_eq!(r.down[t], (nl[t] - nl[t + 1]).max(0.0));
        }
    }

    #[test]
    fn quarter_sigma_is_half_hourly(p in profile_strategy()) {
        for (i, s) in p.sigma_quarterly().iter().enumerate() {
            prop_assert_eq!(*s * 2.0, p.sigma_hourly()[i / 4]);
        }
    }
}
