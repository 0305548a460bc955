use proptest::prelude::*;
use teichlab::crowned::*;

fn mobius() -> impl Strategy<Value = MobiusMap> {
    (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64)
        .prop_filter("well-conditioned", |(a, b, c, d)| (a * d - b * c).abs() > 0.25)
        .prop_map(|(a, b, c, d)| {
            // An orientation-reversing matrix is turned around by negating a row.
            if a * d - b * c > 0.0 {
                MobiusMap::new(a, b, c, d).unwrap()
            } else {
                MobiusMap::new(-a, -b, c, d).unwrap()
            }
        })
}

fn shears(max: f64) -> impl Strategy<Value = Vec<f64>> {
    (4usize..=10).prop_flat_map(move |n| prop::collection::vec(-max..max, n - 3))
}

fn even_polygon() -> impl Strategy<Value = IdealPolygon> {
    prop_oneof![Just(4usize), Just(6), Just(8)]
        .prop_flat_map(|n| prop::collection::vec(-3.0..3.0f64, n - 3))
        .prop_map(|s| polygon_from_shears(s.len() + 3, &s).unwrap())
}

/// Horocycles small enough that no two of them meet.
fn tiny_sizes(cusps: &[IdealPoint]) -> Vec<f64> {
    let finite: Vec<f64> = cusps.iter().filter_map(|p| if let IdealPoint::Finite(x) = p { Some(*x) } else { None }).collect();
    let gap = finite.iter().flat_map(|a| finite.iter().map(move |b| (a - b).abs())).filter(|&d| d > 0.0).fold(f64::INFINITY, f64::min);
    let reach = finite.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    cusps.iter().map(|p| if matches!(p, IdealPoint::Infinity) { 1e3 * reach * reach } else { 1e-3 * gap.min(1.0) }).collect()
}

proptest! {
    #[test]
    fn shears_survive_a_round_trip(s in shears(5.0)) {
        let p = polygon_from_shears(s.len() + 3, &s).unwrap();
        prop_assert_eq!(p.shear_count(), s.len());
        for (a, b) in shears_from_polygon(&p).iter().zip(&s) {
            prop_assert!((a - b).abs() <= 1e-10, "{} vs {}", a, b);
        }
    }

    #[test]
    fn shears_and_cross_ratios_are_mobius_invariant(s in shears(3.0), g in mobius()) {
        let p = polygon_from_shears(s.len() + 3, &s).unwrap();
        let q = p.transform(&g);
        for (a, b) in p.shears().iter().zip(q.shears()) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "{} vs {}", a, b);
        }
        for (a, b) in p.cyclic_cross_ratios().iter().zip(q.cyclic_cross_ratios()) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "{} vs {}", a, b);
        }
    }

    #[test]
    fn crown_residue_ignores_horocycle_sizes(p in even_polygon(), shrink in prop::collection::vec(0.1..1.0f64, 8), g in mobius()) {
        let crown = CrownEnd::polygon(&p).transform(&g);
        let base = tiny_sizes(&crown.cusps);
        let moved: Vec<f64> = crown
            .cusps
            .iter()
            .zip(&base)
            .zip(&shrink)
            .map(|((c, &s), &f)| if matches!(c, IdealPoint::Infinity) { s / f } else { s * f })
            .collect();
        let (a, b) = (crown_residue(&crown, &base).unwrap(), crown_residue(&crown, &moved).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a), "{} vs {}", a, b);
    }

    #[test]
    fn crowns_with_holonomy_have_invariant_residues(
        l in 0.5..4.0f64,
        mut ts in prop::collection::vec(0.0..1.0f64, 2..=6),
        shrink in prop::collection::vec(0.1..1.0f64, 6),
    ) {
        if ts.len() % 2 == 1 {
            ts.pop();
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        prop_assume!(ts.len() >= 2 && ts.windows(2).all(|w| w[1] - w[0] > 1e-3));
        // Cusps on the ray (1, e^l) between a cusp and its translate.
        let cusps: Vec<IdealPoint> = ts.iter().map(|t| IdealPoint::Finite((l * t).exp())).collect();
        let m = cusps.len();
        let crown = CrownEnd::new(cusps, MobiusMap::hyperbolic(l)).unwrap();
        let base = vec![1e-4; m];
        let moved: Vec<f64> = base.iter().zip(&shrink).map(|(s, f)| s * f).collect();
        let (a, b) = (crown_residue(&crown, &base).unwrap(), crown_residue(&crown, &moved).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a), "{} vs {}", a, b);
    }

    #[test]
    fn odd_crowns_have_zero_residue(s in prop_oneof![Just(2usize), Just(4)].prop_flat_map(|k| prop::collection::vec(-3.0..3.0f64, k)), g in mobius()) {
        let p = polygon_from_shears(s.len() + 3, &s).unwrap();
        let crown = CrownEnd::polygon(&p).transform(&g);
        prop_assert_eq!(crown_residue(&crown, &tiny_sizes(&crown.cusps)).unwrap(), 0.0);
    }
}
