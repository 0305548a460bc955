use num_complex::Complex64;
use proptest::prelude::*;
use std::sync::OnceLock;
use teichlab::crowned::{hyperbolic_distance, MobiusMap};
use teichlab::harmonic::*;

const GRID: usize = 64;

fn solve(q: &PolynomialHopf) -> BochnerField {
    solve_bochner(q, 3.0, &SolverConfig { grid: GRID, ..Default::default() }).unwrap()
}

/// `z²` and a cubic with three distinct zeros.
fn field(which: usize) -> &'static BochnerField {
    static FIELDS: [OnceLock<BochnerField>; 2] = [OnceLock::new(), OnceLock::new()];
    FIELDS[which].get_or_init(|| {
        let q = match which {
            0 => PolynomialHopf::monomial(Complex64::new(1.0, 0.0), 2),
            _ => PolynomialHopf::new(vec![Complex64::new(-0.5, 0.2), Complex64::new(0.3, 0.0), Complex64::new(0.0, 0.4), Complex64::new(1.0, 0.0)]),
        };
        solve(&q.unwrap())
    })
}

fn point(r: f64) -> impl Strategy<Value = Complex64> {
    (0.0..1.0f64, 0.0..std::f64::consts::TAU).prop_map(move |(s, a)| Complex64::from_polar(r * s.sqrt(), a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn a_monomial_field_has_the_square_symmetry(i in 0..GRID, j in 0..GRID) {
        let f = field(0);
        let n = f.nodes_per_side();
        let g = f.log_density(i, j);
        // Quarter turn and the two reflections of the square.
        for other in [f.log_density(n - 1 - j, i), f.log_density(n - 1 - i, j), f.log_density(j, i)] {
            prop_assert!((g - other).abs() <= 1e-6 * (1.0 + g.abs()), "{} vs {}", g, other);
        }
    }

    #[test]
    fn the_density_dominates_the_hopf_differential(which in 0usize..2, z in point(2.4)) {
        let f = field(which);
        let s = f.sample(z).unwrap();
        prop_assert!(s.g.is_finite());
        prop_assert!(s.u > 0.0, "u = {} at {}", s.u, z);
    }

    #[test]
    fn energy_is_at_least_twice_the_area(which in 0usize..2, c in point(1.5), r in 0.1..0.9f64, w in 0.1..1.5f64, h in 0.1..1.5f64) {
        let f = field(which);
        let regions = [
            Region::Disk { center: c, radius: r },
            Region::Rect { x0: c.re - w / 2.0, x1: c.re + w / 2.0, y0: c.im - h / 2.0, y1: c.im + h / 2.0 },
        ];
        for region in regions {
            let e = energy(f, region).unwrap();
            prop_assert!(e.energy >= 2.0 * e.norm_phi * (1.0 - 1e-6), "{} < 2·{}", e.energy, e.norm_phi);
            prop_assert!(e.lower_bound_holds);
        }
    }

    #[test]
    fn developing_from_another_frame_is_an_isometry(which in 0usize..2, c in point(1.5), vertical in any::<bool>(), a in -2.0..2.0f64, b in 0.2..3.0f64) {
        let f = field(which);
        let kind = if vertical { Trajectory::Vertical } else { Trajectory::Horizontal };
        let path = CoordinatePath::centered(f, c, kind, 0.6);
        prop_assume!(path.is_ok());
        let path = path.unwrap();
        let (p, q) = (
            develop_map(f, &path, &MobiusMap::identity()),
            develop_map(f, &path, &MobiusMap::new(b, a, 0.0, 1.0).unwrap()),
        );
        prop_assume!(p.is_ok() && q.is_ok());
        let (p, q) = (p.unwrap(), q.unwrap());
        let picks = [0, p.image.len() / 3, p.image.len() - 1];
        for &x in &picks {
            for &y in &picks {
                let (d1, d2) = (hyperbolic_distance(p.image[x], p.image[y]), hyperbolic_distance(q.image[x], q.image[y]));
                prop_assert!((d1 - d2).abs() <= 1e-8 * (1.0 + d1), "{} vs {}", d1, d2);
            }
        }
    }
}

#[test]
fn the_phase_of_the_coefficient_does_not_change_the_density() {
    let base = field(0);
    for theta in [0.7, 2.0, -1.3] {
        let f = solve(&PolynomialHopf::monomial(Complex64::from_polar(1.0, theta), 2).unwrap());
        for (a, b) in base.log_densities().iter().zip(f.log_densities()) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{a} vs {b}");
        }
    }
}
