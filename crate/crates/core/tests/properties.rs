//! Property tests over randomized configurations.

use proptest::prelude::*;

use rainbowdp::offline::build_table;
use rainbowdp::{CounterSet, OneWayFn, Point, PrecompTable, SpaceParams};

fn arb_params() -> impl Strategy<Value = SpaceParams> {
    (
        8u32..=14,
        2u32..=6,
        0.5f64..3.0,
        1u64..=192,
        any::<u64>(),
        prop::bool::ANY,
    )
        .prop_map(|(n_bits, k_bits, c, m0, seed, md5)| {
            let k_bits = k_bits.min(n_bits - 1);
            let function = if md5 {
                OneWayFn::Md5Trunc
            } else {
                OneWayFn::PrfTest
            };
            SpaceParams::new(n_bits, k_bits, c, 2, m0, seed, function).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Build -> serialize -> parse is the identity, and serialization is
    /// byte-stable.
    #[test]
    fn storage_roundtrip(params in arb_params()) {
        let table = build_table(&params, 1).unwrap();
        let bytes = table.to_bytes();
        let back = PrecompTable::from_bytes(&bytes).unwrap();
        prop_assert_eq!(&back, &table);
        prop_assert_eq!(back.to_bytes(), bytes);
    }

    /// The reduction family is a bijection on the space for any (i, s), and
    /// chain stepping is pure.
    #[test]
    fn reduce_bijective_and_step_pure(params in arb_params(), s_frac in 0.0f64..1.0) {
        let s = 1 + (s_frac * (params.t_hat() - 1) as f64) as u32;
        let mut seen = vec![false; params.n() as usize];
        for x in 0..params.n() {
            let y = params.reduce(1, s, Point(x));
            prop_assert!(!std::mem::replace(&mut seen[y.0 as usize], true));
        }
        let mut c1 = CounterSet::default();
        let mut c2 = CounterSet::default();
        for x in (0..params.n()).step_by(97) {
            prop_assert_eq!(
                params.step(0, s, Point(x), &mut c1),
                params.step(0, s, Point(x), &mut c2)
            );
        }
        prop_assert_eq!(c1, c2);
    }
}
