use proptest::prelude::*;

use nttmul::modarith::{half_mod, mod_add, mod_sub, reduce_builtin, Modulus, Variant};
use nttmul::ntt::{intt_gs_scaled, ntt_ct, Polynomial};
use nttmul::params::{build_plan, NttPlan, PrimeSource};
use nttmul::polymul::{multiply, negacyclic_naive, Method};
use nttmul::NoCount;

fn odd_modulus(bits: u32) -> impl Strategy<Value = u64> {
    ((1u64 << (bits - 1))..(1u64 << bits)).prop_map(|q| q | 1)
}

prop_compose! {
    fn reduction_case()(bits in 2u32..=62)(q in odd_modulus(bits), a in any::<u64>(), b in any::<u64>()) -> (u64, u64, u64) {
        (q.max(3), a % q.max(3), b % q.max(3))
    }
}

fn plan(log_n: u32, bits: u32, seed: u64) -> NttPlan {
    build_plan(
        1 << log_n,
        PrimeSource::Generate { bits, seed },
        Variant::Proposed,
    )
    .unwrap()
}

prop_compose! {
    fn poly_case(max_log: u32)(log_n in 1..=max_log, bits in prop::sample::select(vec![20u32, 30, 62]), seed in 0u64..8)
        (plan in Just(plan(log_n, bits, seed)), va in prop::collection::vec(any::<u64>(), 1 << log_n),
         vb in prop::collection::vec(any::<u64>(), 1 << log_n), vc in prop::collection::vec(any::<u64>(), 1 << log_n))
        -> (NttPlan, Vec<u64>, Vec<u64>, Vec<u64>) {
        let q = plan.q();
        let r = |v: Vec<u64>| v.into_iter().map(|x| x % q).collect::<Vec<_>>();
        (plan, r(va), r(vb), r(vc))
    }
}

proptest! {
    #[test]
    fn every_variant_matches_native_division((q, a, b) in reduction_case()) {
        let md = Modulus::new(q).unwrap();
        let want = reduce_builtin(a as u128 * b as u128, q).unwrap();
        for v in Variant::ALL {
            if md.check_variant(v).is_ok() {
                let got = md.mul(a, b, v);
                prop_assert_eq!(got, want, "variant {}", v);
                prop_assert!(got < q);
            }
        }
    }

    #[test]
    fn add_sub_half_are_consistent((q, a, b) in reduction_case()) {
        let md = Modulus::new(q).unwrap();
        let s = mod_add(a, b, &md);
        prop_assert_eq!(s as u128, (a as u128 + b as u128) % q as u128);
        prop_assert_eq!(mod_sub(s, b, &md), a);
        let h = half_mod(a, &md);
        prop_assert!(h < q);
        prop_assert_eq!(mod_add(h, h, &md), a);
    }

    #[test]
    fn transform_roundtrip((plan, a, _, _) in poly_case(10)) {
        let mut p = Polynomial::new(a.clone(), &plan).unwrap();
        ntt_ct(&mut p, &plan, &mut NoCount).unwrap();
        prop_assert!(p.coeffs().iter().all(|&x| x < plan.q()));
        intt_gs_scaled(&mut p, &plan, &mut NoCount).unwrap();
        prop_assert_eq!(p.coeffs(), &a[..]);
    }

    #[test]
    fn ring_laws((plan, a, b, c) in poly_case(6)) {
        let q = plan.q();
        let mul = |x: &[u64], y: &[u64]| multiply(x, y, &plan, Method::Fused, &mut NoCount).unwrap();
        let ab = mul(&a, &b);
        prop_assert_eq!(&ab, &mul(&b, &a));
        prop_assert_eq!(&ab, &negacyclic_naive(&a, &b, q).unwrap());
        prop_assert_eq!(mul(&ab, &c), mul(&a, &mul(&b, &c)));
        let md = plan.modulus();
        let bc: Vec<u64> = b.iter().zip(&c).map(|(&x, &y)| mod_add(x, y, md)).collect();
        let lhs = mul(&a, &bc);
        let rhs: Vec<u64> = ab.iter().zip(mul(&a, &c)).map(|(&x, y)| mod_add(x, y, md)).collect();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn methods_agree((plan, a, b, _) in poly_case(8)) {
        let want = multiply(&a, &b, &plan, Method::Naive, &mut NoCount).unwrap();
        for m in Method::ALL {
            prop_assert_eq!(&multiply(&a, &b, &plan, m, &mut NoCount).unwrap(), &want, "method {}", m);
        }
    }

    #[test]
    fn multiplying_by_x_shifts_negacyclically((plan, a, _, _) in poly_case(8)) {
        let n = plan.n();
        let mut x = vec![0; n];
        x[1] = 1;
        let got = multiply(&a, &x, &plan, Method::Fused, &mut NoCount).unwrap();
        let md = plan.modulus();
        prop_assert_eq!(got[0], md.neg(a[n - 1]));
        prop_assert_eq!(&got[1..], &a[..n - 1]);
    }
}
