use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use solenoidk_abelian::{
    cokernel, colimit, kernel_basis, kernel_rank, smith_normal_form, IntMatrix, Presentation,
};

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, bound: i64) -> IntMatrix {
    let data: Vec<Vec<i64>> = (0..rows)
        .map(|_| (0..cols).map(|_| rng.gen_range(-bound..=bound)).collect())
        .collect();
    IntMatrix::from_rows(&data, cols)
}

/// Product of random elementary matrices, so unimodular by construction.
fn random_unimodular(rng: &mut ChaCha8Rng, n: usize) -> IntMatrix {
    let mut u = IntMatrix::identity(n);
    for _ in 0..3 * n {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i == j {
            continue;
        }
        let mut e = IntMatrix::identity(n);
        e[(i, j)] = BigInt::from(rng.gen_range(-2..=2));
        u = u.mul(&e);
    }
    u
}

#[test]
fn smith_round_trip_on_rectangular_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let rows = rng.gen_range(1..=5);
        let cols = rng.gen_range(1..=5);
        let a = random_matrix(&mut rng, rows, cols, 20);
        let f = smith_normal_form(&a);
        assert!(f.verify(&a), "failed on {a:?}");
        assert_eq!(f.rank + kernel_rank(&a), cols);
        let k = kernel_basis(&a);
        assert!(a.mul(&k).is_zero());
    }
}

#[test]
fn smith_on_dense_six_by_six() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..500 {
        let a = random_matrix(&mut rng, 6, 6, 100);
        let f = smith_normal_form(&a);
        assert!(f.verify(&a), "failed on {a:?}");
        assert_eq!(f.rank + kernel_rank(&a), 6);
        let det = a.determinant();
        if !det.is_zero() {
            assert_eq!(cokernel(&a).order(), Some(det.abs()));
        }
    }
}

#[test]
fn low_rank_products_keep_divisibility() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..50 {
        let a = random_matrix(&mut rng, 5, 2, 9);
        let b = random_matrix(&mut rng, 2, 5, 9);
        let c = a.mul(&b);
        let f = smith_normal_form(&c);
        assert!(f.verify(&c));
        assert!(f.rank <= 2);
    }
}

#[test]
fn cokernel_order_is_absolute_determinant() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut checked = 0;
    while checked < 100 {
        let a = random_matrix(&mut rng, 4, 4, 15);
        let det = a.determinant();
        if det.is_zero() {
            continue;
        }
        assert_eq!(cokernel(&a).order(), Some(det.abs()));
        checked += 1;
    }
}

/// `(v, j)` in `colim(Z, ×m)` is the rational `v / mʲ`.
#[test]
fn dyadic_like_equality_matches_rationals() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for m in [2i64, 3, 6, -2] {
        let g = colimit(Presentation::free(1), IntMatrix::from_i64(&[&[m]])).unwrap();
        for _ in 0..250 {
            let j = rng.gen_range(0..5u32);
            let k = rng.gen_range(0..5u32);
            let v = BigInt::from(rng.gen_range(-40..=40i64));
            // bias towards equal pairs half the time
            let w = if rng.gen_bool(0.5) && k >= j {
                &v * BigInt::from(m).pow(k - j)
            } else {
                BigInt::from(rng.gen_range(-40..=40i64))
            };
            // v / m^j == w / m^k  <=>  v m^k == w m^j
            let expected = &v * BigInt::from(m).pow(k) == &w * BigInt::from(m).pow(j);
            assert_eq!(
                g.element_eq(std::slice::from_ref(&v), j, std::slice::from_ref(&w), k),
                expected,
                "m={m} ({v},{j}) ({w},{k})"
            );
        }
    }
}

#[test]
fn unimodular_endomorphism_colimit_is_base() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for n in 1..=4 {
        let h = random_unimodular(&mut rng, n);
        let g = colimit(Presentation::free(n), h).unwrap();
        assert!(g.is_free_finitely_generated());
        assert_eq!(g.as_fg_group().unwrap().rank(), n);
    }
}

#[test]
fn colimit_torsion_is_invariant_part() {
    // Z/12 under ×2: eventual image 4·Z/12 ≅ Z/3
    let g = colimit(Presentation::cyclic(12), IntMatrix::from_i64(&[&[2]])).unwrap();
    assert_eq!(g.pretty(), Some("Z/3"));
    // Z ⊕ Z/4 under diag(5, 1): Z[1/5] ⊕ Z/4
    let base = Presentation::new(2, IntMatrix::from_i64(&[&[0], &[4]]));
    let g = colimit(base, IntMatrix::from_i64(&[&[5, 0], &[0, 1]])).unwrap();
    assert_eq!(g.pretty(), Some("Z[1/5] ⊕ Z/4"));
}

#[test]
fn unrecognized_colimit_is_described_structurally() {
    let g = colimit(
        Presentation::free(2),
        IntMatrix::from_i64(&[&[2, 0], &[0, 3]]),
    )
    .unwrap();
    assert_eq!(g.pretty(), None);
    assert!(g.describe().starts_with("colim(Z^2"));
    assert_eq!(g.rank(), 2);
}

proptest! {
    #[test]
    fn smith_invariants_are_conjugation_invariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, 3, 3, 10);
        let u = random_unimodular(&mut rng, 3);
        let v = random_unimodular(&mut rng, 3);
        let b = u.mul(&a).mul(&v);
        prop_assert_eq!(smith_normal_form(&a).invariant_factors(), smith_normal_form(&b).invariant_factors());
    }

    #[test]
    fn hermite_kernel_columns_are_primitive(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, 2, 4, 6);
        let k = kernel_basis(&a);
        prop_assert!(a.mul(&k).is_zero());
        // the kernel is saturated: its cokernel in Z^4 is free
        prop_assert!(cokernel(&k).is_free());
        for col in k.columns() {
            let g = col.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
            prop_assert!(g == BigInt::from(1));
        }
    }
}
