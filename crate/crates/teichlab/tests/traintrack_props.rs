use num_rational::BigRational;
use proptest::prelude::*;
use teichlab::catalog;
use teichlab::flatsurf::{build_surface, stretch};
use teichlab::traintrack::*;

fn rational() -> impl Strategy<Value = BigRational> {
    (1i64..500, 1i64..60).prop_map(|(p, q)| BigRational::new(p.into(), q.into()))
}

fn datum(which: usize) -> RayAssemblySpec {
    match which {
        0 => catalog::slit_torus_ray_datum(50.0).unwrap(),
        1 => strebel_datum(&build_surface(&catalog::strebel_one_cylinder()).unwrap(), 50.0).unwrap(),
        _ => strebel_datum(&build_surface(&catalog::strebel_two_cylinders()).unwrap(), 50.0).unwrap(),
    }
}

proptest! {
    #[test]
    fn split_sequences_keep_the_switch_conditions(b in rational(), c in rational(), picks in prop::collection::vec(any::<prop::sample::Index>(), 1..25)) {
        let mut track = catalog::torus_track();
        let mut w = vec![&b + &c, b, c];
        for pick in picks {
            let large = large_branches(&track);
            if large.is_empty() {
                break;
            }
            let e = large[pick.index(large.len())];
            let (t2, w2, rec) = match split(&track, &w, e) {
                Ok(r) => r,
                Err(SplitError::Valence(_) | SplitError::Loop(_)) => break,
                Err(other) => return Err(TestCaseError::fail(other.to_string())),
            };
            prop_assert!(check_switch_conditions(&t2, &w2).unwrap().pass());
            prop_assert!(validate(&t2).is_ok());
            // Every branch other than the one split keeps its weight.
            for (new, old) in rec.old_of_new.iter().enumerate() {
                match old {
                    Some(old) if *old != e => prop_assert_eq!(&w2[new], &w[*old]),
                    _ => {}
                }
            }
            track = t2;
            w = w2;
        }
    }

    #[test]
    fn dimension_ignores_the_order_of_the_crowns(
        g in 0u32..5,
        l in 0u32..5,
        m in prop::collection::vec(1u32..9, 0..5),
        order in Just(()).prop_perturb(|_, mut rng| rng.next_u64()),
    ) {
        let mut shuffled = m.clone();
        // A deterministic shuffle driven by one random word.
        let mut state = order;
        for i in (1..shuffled.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (state >> 33) as usize % (i + 1));
        }
        prop_assert_eq!(crowned_dimension(g, m.len(), l, &m), crowned_dimension(g, m.len(), l, &shuffled));
    }

    #[test]
    fn assembly_commutes_with_stretching(which in 0usize..3, t in 0.1..10.0f64, s in 0.1..10.0f64) {
        let d = datum(which);
        let at = |t: f64| assemble_ray_surface(&RayAssemblySpec { t, ..d.clone() }).unwrap().surface;
        let (stretched, direct) = (stretch(&at(t), s).unwrap(), at(s * t));
        for (p, q) in stretched.polygons().iter().zip(direct.polygons()) {
            for (u, v) in p.vertices.iter().zip(&q.vertices) {
                prop_assert_eq!(u.x, v.x);
                prop_assert!((u.y - v.y).abs() <= 1e-12 * v.y.abs().max(1.0), "{} vs {}", u.y, v.y);
            }
        }
    }

    #[test]
    fn rectangles_span_their_branch_length_at_every_time(which in 0usize..3, t in 0.1..10.0f64) {
        let d = datum(which);
        let a = assemble_ray_surface(&RayAssemblySpec { t, ..d.clone() }).unwrap();
        for (b, name) in d.track.names.iter().enumerate() {
            let p = a.surface.polygons().iter().find(|p| &p.id == name).unwrap();
            let (lo, hi) = p.vertices.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v.x), hi.max(v.x)));
            prop_assert_eq!(hi - lo, d.lengths[b]);
            let (bot, top) = p.vertices.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v.y), hi.max(v.y)));
            let (_, width, _) = branch_rectangle(d.lengths[b], d.weights[b], t);
            prop_assert!((top - bot - width).abs() <= 1e-12 * width);
        }
    }
}
