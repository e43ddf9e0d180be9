//! Property tests for the exact core: region algebra, partitions, sums.

use gauge_lab::integrand::PiecewisePoly;
use gauge_lab::integrators::riemann_sum;
use gauge_lab::partition::{
    cousin_partition, is_partition, is_subordinate, Flavor, TagStrategy, TaggedPartition,
};
use gauge_lab::region::SetOp;
use gauge_lab::stability::{z_member, FunctionFamily, Member};
use gauge_lab::values::{NormKind, ValueSpace, VectorValue};
use gauge_lab::{Dyadic, Gauge, Rational, Region};
use proptest::prelude::*;

const DEPTH: u32 = 10;

fn unit_point() -> impl Strategy<Value = Dyadic> {
    (0i64..=1 << DEPTH).prop_map(|j| Dyadic::ratio(j, DEPTH))
}

fn region() -> impl Strategy<Value = Region> {
    prop::collection::vec((unit_point(), unit_point()), 0..6).prop_map(|pairs| {
        Region::from_pairs(
            pairs
                .into_iter()
                .map(|(a, b)| if a <= b { (a, b) } else { (b, a) }),
        )
        .unwrap()
    })
}

fn gauge() -> impl Strategy<Value = Gauge> {
    prop::collection::btree_set(1i64..1 << DEPTH, 0..5).prop_flat_map(|breaks| {
        let n = breaks.len() + 1;
        (Just(breaks), prop::collection::vec(1u32..9, n)).prop_map(|(breaks, exps)| {
            let breaks = breaks
                .into_iter()
                .map(|j| Dyadic::ratio(j, DEPTH))
                .collect();
            let values = exps
                .into_iter()
                .map(|k| Dyadic::pow2_neg(k).to_rational())
                .collect();
            Gauge::piecewise(breaks, values).unwrap()
        })
    })
}

fn strategy() -> impl Strategy<Value = TagStrategy> {
    prop_oneof![
        Just(TagStrategy::Mid),
        Just(TagStrategy::Left),
        any::<u64>().prop_map(TagStrategy::Sampled)
    ]
}

fn flavor() -> impl Strategy<Value = Flavor> {
    prop_oneof![Just(Flavor::McShane), Just(Flavor::Henstock)]
}

fn poly(coeffs: &[i64]) -> PiecewisePoly<Rational> {
    let sp = ValueSpace::finite(1, NormKind::L1);
    let cs = coeffs
        .iter()
        .map(|c| VectorValue::from_data(&sp, vec![Rational::from_integer((*c).into())]).unwrap())
        .collect();
    PiecewisePoly::polynomial(&sp, cs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn inclusion_exclusion_is_exact(a in region(), b in region()) {
        let union = a.combine(&b, SetOp::Union);
        let inter = a.combine(&b, SetOp::Intersect);
        prop_assert_eq!(union.measure() + inter.measure(), a.measure() + b.measure());
        prop_assert_eq!(a.combine(&b, SetOp::Subtract).measure(), a.measure() - inter.measure());
        let sym = a.combine(&b, SetOp::SymmetricDifference);
        prop_assert_eq!(sym.measure(), union.measure() - inter.measure());
    }

    #[test]
    fn normalize_is_idempotent(a in region()) {
        prop_assert_eq!(Region::normalize(a.parts().to_vec()), a.clone());
        prop_assert!(a.parts().windows(2).all(|w| w[0].hi() < w[1].lo()));
    }

    #[test]
    fn cousin_partitions_are_subordinate(g in gauge(), f in flavor(), s in strategy()) {
        let p = cousin_partition(&g, f, s, 40).unwrap();
        prop_assert!(is_partition(&p));
        prop_assert!(is_subordinate(&p, &g).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn partitions_round_trip_through_json(g in gauge(), s in strategy()) {
        let p = cousin_partition(&g, Flavor::McShane, s, 40).unwrap();
        let back = TaggedPartition::from_json(&p.to_json(), Flavor::McShane).unwrap();
        prop_assert_eq!(back.to_json(), p.to_json());
        prop_assert_eq!(back, p);
    }

    #[test]
    fn dyadics_round_trip_through_text(j in any::<i64>(), k in 0u32..80) {
        let d = Dyadic::ratio(j, k);
        prop_assert_eq!(d.to_string().parse::<Dyadic>().unwrap(), d);
    }

    #[test]
    fn riemann_sums_are_linear(
        c in prop::collection::vec(-8i64..8, 1..4),
        e in prop::collection::vec(-8i64..8, 1..4),
        g in gauge(),
        s in strategy(),
    ) {
        let p = cousin_partition(&g, Flavor::McShane, s, 40).unwrap();
        let n = c.len().max(e.len());
        let sum: Vec<i64> = (0..n).map(|i| c.get(i).unwrap_or(&0) + e.get(i).unwrap_or(&0)).collect();
        let lhs = riemann_sum(&poly(&sum), &p);
        let rhs = riemann_sum(&poly(&c), &p).add(&riemann_sum(&poly(&e), &p)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn z_membership_is_monotone_and_order_free(
        parts in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..4),
        t in prop::collection::vec(0.0f64..1.0, 1..3),
        u in prop::collection::vec(0.0f64..1.0, 1..3),
        alpha in 0.0f64..0.5,
        beta in 0.5f64..1.0,
        widen in 0.0f64..0.4,
    ) {
        let fam = FunctionFamily::new()
            .with("ind", Member::Indicator(parts.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect()))
            .with("id", Member::Evaluator(std::sync::Arc::new(|x: f64| x)));
        let base = z_member(&fam, &t, &u, alpha, beta);
        if base {
            prop_assert!(z_member(&fam, &t, &u, alpha + widen, (beta - widen).max(0.0)));
        }
        let (mut tr, mut ur) = (t.clone(), u.clone());
        tr.reverse();
        ur.reverse();
        prop_assert_eq!(z_member(&fam, &tr, &ur, alpha, beta), base);
    }
}
