use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use solenoidk::dynamics::expansive::{forward_expansive_witness, min_branch_slope, CoverSpec};
use solenoidk::dynamics::solenoid::p_map_with;
use solenoidk::dynamics::{fix_count, fix_count_oracle, fix_count_rose, SolenoidPoint};
use solenoidk::examples;
use solenoidk::germ::{
    admissible_germs, circle_cover_degree, is_hausdorff, is_local_homeomorphism, k0_constant,
    periodic_germs, Lift,
};
use solenoidk::ktheory::{
    circle_rule, quotient_ktheory, rose_heuristic, ruelle_ktheory, stable_ktheory,
    wrongway_matrices, Provenance, WrongWayData,
};
use solenoidk::point::{apply_g, apply_g_y, collapse, PLPoint};
use solenoidk::poly::Q;
use solenoidk::substitution::rat;
use solenoidk::{EdgeLabel, Orientation, SubstitutionSystem};
use solenoidk_abelian::IntMatrix;

fn all_systems() -> Vec<SubstitutionSystem> {
    let mut v: Vec<_> = examples::bundled().into_iter().map(|(_, s)| s).collect();
    v.push(examples::thue_morse());
    v.push(examples::n_solenoid(3));
    v
}

/// Random expanding, surjective rose substitution with 1 to 3 edges.
fn random_system(seed: u64) -> SubstitutionSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n = rng.gen_range(1..=3);
        let labels: Vec<EdgeLabel> = (0..n)
            .map(|i| EdgeLabel::new(((b'a' + i as u8) as char).to_string()))
            .collect();
        let images: Vec<Vec<usize>> = (0..n)
            .map(|_| {
                let len = rng.gen_range(2..=4);
                (0..len).map(|_| rng.gen_range(0..n)).collect()
            })
            .collect();
        let s = SubstitutionSystem::new(labels, images, Orientation::Preserving).unwrap();
        if s.validate().is_ok() {
            return s;
        }
    }
}

/// The substitution `gⁿ`.
fn power(sys: &SubstitutionSystem, n: usize) -> SubstitutionSystem {
    SubstitutionSystem::new(
        sys.labels().to_vec(),
        sys.edges().map(|e| sys.iterate_word(e, n)).collect(),
        Orientation::Preserving,
    )
    .unwrap()
}

/// Relabel edges by the permutation `perm` (new index of old edge `e` is `perm[e]`).
fn relabel(sys: &SubstitutionSystem, perm: &[usize]) -> SubstitutionSystem {
    let n = sys.edge_count();
    let mut labels = vec![EdgeLabel::new("x"); n];
    let mut images = vec![Vec::new(); n];
    for e in sys.edges() {
        labels[perm[e]] = sys.label(e).clone();
        images[perm[e]] = sys.image(e).iter().map(|&f| perm[f]).collect();
    }
    SubstitutionSystem::new(labels, images, Orientation::Preserving).unwrap()
}

#[test]
fn matrix_of_power_is_power_of_matrix() {
    for s in all_systems() {
        for n in 1..=5 {
            assert_eq!(
                power(&s, n).substitution_matrix(),
                s.substitution_matrix().pow(n as u32)
            );
        }
    }
}

#[test]
fn column_sums_are_word_lengths() {
    for s in all_systems() {
        let m = s.substitution_matrix();
        for f in s.edges() {
            let sum: BigInt = (0..m.rows()).map(|e| m[(e, f)].clone()).sum();
            assert_eq!(sum, BigInt::from(s.image(f).len()));
        }
    }
}

#[test]
fn entropy_enclosures_certified() {
    let width = rat(1, 1_000_000_000);
    let two = 2f64.ln();
    let golden = ((3.0 + 5f64.sqrt()) / 2.0).ln();
    for (s, expect) in [
        (examples::two_solenoid(), two),
        (examples::aab_ab(), golden),
        (examples::ab_ab(), two),
    ] {
        let h = s.entropy(&width).unwrap();
        assert!(&h.log_lambda.1 - &h.log_lambda.0 <= width);
        let lo = h.log_lambda.0.to_f64().unwrap();
        let hi = h.log_lambda.1.to_f64().unwrap();
        assert!(
            lo - 1e-12 <= expect && expect <= hi + 1e-12,
            "{lo} {expect} {hi}"
        );
        assert!(h.certified_by_sign_change());
    }
}

#[test]
fn germ_facts_on_every_system() {
    for s in all_systems() {
        let germs = admissible_germs(&s);
        for g in &germs {
            assert!(germs.contains(&g.tau(&s)), "closure");
        }
        if let Ok(k) = k0_constant(&s) {
            let image: BTreeSet<_> = germs.iter().map(|g| g.tau_n(&s, k.value())).collect();
            assert_eq!(image.len(), 1, "cluster collapse");
            assert_eq!(periodic_germs(&s).len(), 1);
        }
        if is_hausdorff(&s) {
            assert!(is_local_homeomorphism(&s) || circle_cover_degree(&s).is_some());
        }
    }
}

#[test]
fn oracle_agrees_with_closed_form() {
    for s in all_systems() {
        for n in 1..=8 {
            assert_eq!(fix_count(&s, n), fix_count_oracle(&s, n), "{s:?} n={n}");
        }
    }
}

#[test]
fn rose_and_quotient_have_same_counts() {
    for (_, s) in examples::bundled() {
        for n in 1..=8 {
            assert_eq!(fix_count_rose(&s, n), fix_count(&s, n));
        }
    }
}

#[test]
fn circle_covers_count_d_to_the_n_minus_one() {
    for d in [2u32, 3] {
        let s = examples::n_solenoid(d as usize);
        for n in 1..=10u32 {
            let expect = BigInt::from(d).pow(n) - 1;
            assert_eq!(fix_count(&s, n as usize), expect);
            assert_eq!(fix_count_oracle(&s, n as usize), expect);
        }
    }
}

#[test]
fn collapse_intertwines_pointwise() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for s in all_systems() {
        for _ in 0..300 {
            let den: i64 = rng.gen_range(2..500);
            let p = PLPoint::interior(
                rng.gen_range(0..s.edge_count()),
                rat(rng.gen_range(1..den), den),
            );
            assert_eq!(collapse(&apply_g(&s, &p)), apply_g_y(&s, &collapse(&p)));
        }
    }
}

#[test]
fn branches_expand_at_least_geometrically() {
    for s in all_systems() {
        let min_len = s.edges().map(|e| s.image(e).len()).min().unwrap();
        for n in 1..=5 {
            let bound = Q::from_integer(BigInt::from(min_len).pow(n as u32));
            assert!(min_branch_slope(&s, n) >= bound);
            assert!(bound >= Q::from_integer(BigInt::from(2).pow(n as u32)));
        }
    }
}

#[test]
fn refining_the_cover_never_slows_separation() {
    let s = examples::aab_ab();
    let coarse = forward_expansive_witness(&s, &CoverSpec::new(&s, 2), 20, 24);
    let fine = forward_expansive_witness(&s, &CoverSpec::new(&s, 3), 20, 24);
    assert!(coarse.all_separated() && fine.all_separated());
    for (a, b) in coarse.times.iter().zip(&fine.times) {
        assert!(b.unwrap() <= a.unwrap());
    }
}

#[test]
fn projection_and_phi_compatibility() {
    for (_, s) in examples::bundled() {
        let lift = Lift::new(&s).unwrap();
        for x in SolenoidPoint::random_batch(&s, lift.k0() + 3, 1000, 17) {
            let px = p_map_with(&lift, &x).unwrap();
            assert_eq!(collapse(&px), *x.head());
            // p∘φ = g̃∘p
            let phx = p_map_with(&lift, &x.phi(&s)).unwrap();
            assert_eq!(phx, apply_g(&s, &px));
        }
    }
}

#[test]
fn rules_agree_on_single_edge_systems() {
    for d in 2..=6 {
        let s = examples::n_solenoid(d);
        let kg = quotient_ktheory(&s);
        let circle = circle_rule(&s, &kg).unwrap();
        let rose = rose_heuristic(&s, &kg).unwrap();
        assert_eq!(circle.a0, rose.a0);
        assert_eq!(circle.a1, rose.a1);
        assert_eq!(
            wrongway_matrices(&s, &kg, None).unwrap().provenance,
            Provenance::CircleCoverRule
        );
    }
}

fn random_unimodular(rng: &mut ChaCha8Rng, n: usize) -> IntMatrix {
    let mut u = IntMatrix::identity(n);
    for _ in 0..4 * n {
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if i != j {
            let mut e = IntMatrix::identity(n);
            e[(i, j)] = BigInt::from(rng.gen_range(-2..=2));
            u = u.mul(&e);
        }
    }
    u
}

/// Inverse of a unimodular `u = U·S·V`: here `S = I`, so `u⁻¹ = V⁻¹·U⁻¹`.
fn inverse(u: &IntMatrix) -> IntMatrix {
    let f = solenoidk_abelian::smith_normal_form(u);
    assert_eq!(f.s, IntMatrix::identity(u.rows()));
    f.v_inv.mul(&f.u_inv)
}

#[test]
fn stable_groups_are_basis_independent() {
    let s = examples::aab_ab();
    let kg = quotient_ktheory(&s);
    let ww = wrongway_matrices(&s, &kg, None).unwrap();
    let base = stable_ktheory(&kg, &ww).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let u = random_unimodular(&mut rng, 2);
        let conj = WrongWayData {
            a0: u.mul(&ww.a0).mul(&inverse(&u)),
            ..ww.clone()
        };
        let st = stable_ktheory(&kg, &conj).unwrap();
        assert_eq!(st.k0.describe(), base.k0.describe());
        assert_eq!(st.k1.describe(), base.k1.describe());
        let r = ruelle_ktheory(&st, &conj).unwrap();
        assert_eq!((r.k0.describe(), r.k1.describe()), ("Z".into(), "Z".into()));
    }
    // a stretching user matrix is not unimodular and changes the answer
    let dbl = solenoidk::ktheory::stable_ktheory(
        &kg,
        &WrongWayData {
            a0: IntMatrix::from_i64(&[&[2, 0], &[0, 2]]),
            ..ww
        },
    )
    .unwrap();
    assert!(dbl.k0.pretty().is_none());
}

#[test]
fn boundary_rank_nullity() {
    for s in all_systems() {
        let kg = quotient_ktheory(&s);
        let germs = admissible_germs(&s).len() as isize;
        let arcs = s.edge_count() as isize;
        assert_eq!(kg.k0.rank() as isize - kg.k1.rank() as isize, germs - arcs);
        for col in kg.boundary.matrix.columns() {
            assert_eq!(col.iter().sum::<BigInt>(), BigInt::from(0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn iteration_composes(seed in any::<u64>(), n in 0usize..3, m in 0usize..3) {
        let s = random_system(seed);
        for e in s.edges() {
            let lhs = s.iterate_word(e, n + m);
            let mut rhs = s.iterate_word(e, n);
            for _ in 0..m {
                rhs = s.substitute(&rhs);
            }
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn mixing_survives_relabeling(seed in any::<u64>()) {
        let s = random_system(seed);
        let n = s.edge_count();
        let perm: Vec<usize> = (0..n).rev().collect();
        prop_assert_eq!(s.is_mixing(), relabel(&s, &perm).is_mixing());
    }

    #[test]
    fn random_oracle_agreement(seed in any::<u64>(), n in 1usize..5) {
        let s = random_system(seed);
        prop_assert_eq!(fix_count(&s, n), fix_count_oracle(&s, n));
    }

    #[test]
    fn random_germ_closure(seed in any::<u64>()) {
        let s = random_system(seed);
        let germs = admissible_germs(&s);
        for g in &germs {
            prop_assert!(germs.contains(&g.tau(&s)));
        }
        if let Ok(k) = k0_constant(&s) {
            prop_assert!(k.value() <= germs.len());
            prop_assert_eq!(periodic_germs(&s).len(), 1);
        }
    }

    #[test]
    fn random_boundary_rank_nullity(seed in any::<u64>()) {
        let s = random_system(seed);
        let kg = quotient_ktheory(&s);
        let germs = admissible_germs(&s).len() as isize;
        prop_assert_eq!(
            kg.k0.rank() as isize - kg.k1.rank() as isize,
            germs - s.edge_count() as isize
        );
    }

    #[test]
    fn random_pimsner_bookkeeping(seed in any::<u64>()) {
        let s = random_system(seed);
        let kg = quotient_ktheory(&s);
        if let Ok(ww) = wrongway_matrices(&s, &kg, None) {
            let st = stable_ktheory(&kg, &ww).unwrap();
            let r = ruelle_ktheory(&st, &ww).unwrap();
            prop_assert!(r.bookkeeping_ok);
        }
    }

    #[test]
    fn entropy_brackets_perron_root(seed in any::<u64>()) {
        let s = random_system(seed);
        let h = s.entropy(&rat(1, 1_000_000)).unwrap();
        prop_assert!(h.certified_by_sign_change());
        prop_assert!(h.lambda.0 >= Q::one());
    }
}
