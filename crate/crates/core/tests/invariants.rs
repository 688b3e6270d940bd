use fracstep::analysis::ring_analytic_state;
use fracstep::grid::{apply_hamiltonian, riesz_apply, Grid, Spectral, WaveField};
use fracstep::potentials::PotentialSpec;
use fracstep::solver::{deflate, project_parity, real_time_propagate, Parity};
use fracstep::splitting::{scheme_lie, scheme_sixth, scheme_strang};
use num_complex::Complex64;
use proptest::prelude::*;

const N: usize = 64;

fn grid() -> Grid {
    Grid::new(N, -5.0, 5.0).unwrap()
}

fn field() -> impl Strategy<Value = WaveField> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), N)
        .prop_filter("nonzero", |v| {
            v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3)
        })
        .prop_map(|v| {
            WaveField::new(
                grid(),
                v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect(),
            )
            .unwrap()
        })
}

fn alpha() -> impl Strategy<Value = f64> {
    0.2..4.0f64
}

fn close(a: Complex64, b: Complex64, scale: f64) -> bool {
    (a - b).norm() <= 1e-11 * scale.max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mirror_is_an_involution(n in 2usize..300, half in 0.5..20.0f64) {
        let n = n & !1;
        let g = Grid::new(n, -half, half).unwrap();
        prop_assert!(g.is_symmetric());
        for j in 0..n {
            let m = g.mirror_index(j);
            prop_assert_eq!(g.mirror_index(m), j);
            if j != 0 {
                prop_assert!((g.x(m) + g.x(j)).abs() < 1e-12 * half);
            }
        }
    }

    #[test]
    fn riesz_is_linear(f in field(), h in field(), a in alpha(), c in (-2.0..2.0f64, -2.0..2.0f64)) {
        let c = Complex64::new(c.0, c.1);
        let mut sum = f.clone();
        sum.axpy(c, &h);
        let lhs = riesz_apply(&sum, a).unwrap();
        let mut rhs = riesz_apply(&f, a).unwrap();
        rhs.axpy(c, &riesz_apply(&h, a).unwrap());
        let scale = rhs.max_abs();
        for (l, r) in lhs.values().iter().zip(rhs.values()) {
            prop_assert!(close(*l, *r, scale));
        }
    }

    #[test]
    fn riesz_is_symmetric_and_nonpositive(f in field(), h in field(), a in alpha()) {
        let rf = riesz_apply(&f, a).unwrap();
        let rh = riesz_apply(&h, a).unwrap();
        let lhs = f.inner(&rh);
        let rhs = rf.inner(&h);
        prop_assert!(close(lhs, rhs, lhs.norm()));
        let q = f.inner(&rf);
        prop_assert!(q.im.abs() <= 1e-11 * q.norm().max(1.0));
        prop_assert!(q.re <= 1e-12);
    }

    #[test]
    fn hamiltonian_is_hermitian(f in field(), h in field(), a in alpha()) {
        let g = grid();
        let v: Vec<f64> = g.xs().iter().map(|x| 0.5 * x * x).collect();
        let sp = Spectral::for_grid(&g);
        let hf = apply_hamiltonian(&f, &v, a, &sp).unwrap();
        let hh = apply_hamiltonian(&h, &v, a, &sp).unwrap();
        let lhs = f.inner(&hh);
        let rhs = hf.inner(&h);
        prop_assert!(close(lhs, rhs, lhs.norm()));
    }

    #[test]
    fn deflation_is_an_orthogonal_projection(f in field(), k in 1usize..6) {
        let g = grid();
        let basis: Vec<WaveField> = (0..k).map(|n| ring_analytic_state(n, &g).unwrap()).collect();
        let once = deflate(&f, &basis).unwrap();
        for b in &basis {
            prop_assert!(b.inner(&once).norm() < 1e-12);
        }
        let twice = deflate(&once, &basis).unwrap();
        prop_assert!(once.sup_distance(&twice) < 1e-12);
        prop_assert!(once.norm() <= f.norm() * (1.0 + 1e-12));
    }

    #[test]
    fn parity_parts_split_the_field(f in field()) {
        // the projections come back normalized
        let even = project_parity(&f, Parity::Even).unwrap();
        let odd = project_parity(&f, Parity::Odd).unwrap();
        prop_assert!(even.inner(&odd).norm() < 1e-12);
        let mut sum = even.clone();
        sum.scale(even.inner(&f));
        sum.axpy(odd.inner(&f), &odd);
        prop_assert!(sum.sup_distance(&f) < 1e-12);
        prop_assert!(project_parity(&even, Parity::Even).unwrap().sup_distance(&even) < 1e-13);
        prop_assert!(project_parity(&odd, Parity::Even).is_err());
        let none = project_parity(&f, Parity::None).unwrap();
        prop_assert!((none.norm() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn real_time_keeps_the_norm(f in field(), a in alpha(), steps in 1usize..50, dt in 1e-3..0.1f64) {
        for scheme in [scheme_lie(), scheme_strang()] {
            let out = real_time_propagate(&f, &PotentialSpec::Harmonic, a, dt, steps, &scheme).unwrap();
            prop_assert!((out.norm() / f.norm() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn schemes_are_consistent() {
    for s in [scheme_lie(), scheme_strang(), scheme_sixth()] {
        let (a, b) = s.coefficient_sums();
        assert!(
            (a - 1.0).norm() < 1e-12 && (b - 1.0).norm() < 1e-12,
            "{}",
            s.name()
        );
    }
    assert!(!scheme_sixth().is_real());
    let f = WaveField::from_real_fn(grid(), |x| (-x * x).exp());
    assert!(
        real_time_propagate(&f, &PotentialSpec::Harmonic, 2.0, 0.01, 1, &scheme_sixth()).is_err()
    );
}
