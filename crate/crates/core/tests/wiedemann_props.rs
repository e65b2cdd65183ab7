use num_bigint::BigUint;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rnsla::matrix::{gen_ffs_like, plant_dependent_row, CooMatrix, GeneratorParams};
use rnsla::oracle::{oracle_iterate, oracle_spmv_mod};
use rnsla::rns::{Flavor, RnsBasis};
use rnsla::spmv::{SpmvOptions, SpmvPlan};
use rnsla::wiedemann::{
    berlekamp_massey, check_kernel, krylov, mksol, random_vector, solve, SolveOptions, SEQUENCE_SLACK,
};

fn ell() -> BigUint {
    BigUint::parse_bytes(b"1400000000000000000000000000000000000000000000000000017", 16).unwrap()
}

fn plan_for(m: &CooMatrix) -> SpmvPlan {
    let basis = RnsBasis::build(&ell(), m.to_csr().max_row_norm().max(1), Flavor::Integer).unwrap();
    SpmvPlan::new(m, &basis, SpmvOptions::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn planted_recurrence_is_recovered(coeffs in proptest::collection::vec(0u64..1000, 1..8), start in proptest::collection::vec(0u64..1000, 8)) {
        // a_{i+d} = -(c_0 a_i + ... + c_{d-1} a_{i+d-1})
        let l = ell();
        let d = coeffs.len();
        let mut a: Vec<BigUint> = start[..d].iter().map(|&x| BigUint::from(x)).collect();
        for i in 0..3 * d {
            let s: BigUint = (0..d).map(|j| BigUint::from(coeffs[j]) * &a[i + j]).sum::<BigUint>() % &l;
            a.push((&l - s) % &l);
        }
        let f = berlekamp_massey(&a, &l).unwrap();
        prop_assert!(f.degree() <= d);
        prop_assert!(f.annihilates(&a, &l));
        prop_assert_eq!(f.coeffs.last().unwrap(), &BigUint::one());
        if f.degree() == d {
            let expected: Vec<BigUint> = coeffs.iter().map(|&c| BigUint::from(c)).chain([BigUint::one()]).collect();
            prop_assert_eq!(f.coeffs, expected);
        }
    }

    #[test]
    fn krylov_terms_match_the_oracle(n in 2usize..30, w in 1usize..4, seed in any::<u64>(), x in any::<prop::sample::Index>()) {
        prop_assume!(w < n);
        let m = gen_ffs_like(&GeneratorParams::ffs_like(n, w, seed)).unwrap();
        let plan = plan_for(&m);
        let y = random_vector(&ell(), n, seed, 0);
        let xi = x.index(n);
        let len = 2 * n + SEQUENCE_SLACK;
        let seq = krylov(&plan, xi, &y, len).unwrap();
        for (i, a) in seq.terms.iter().enumerate().step_by(5) {
            prop_assert_eq!(a, &oracle_iterate(&m, &y, &ell(), i).unwrap()[xi]);
        }
        let f = berlekamp_massey(&seq.terms, &ell()).unwrap();
        prop_assert!(f.annihilates(&seq.terms, &ell()));
        prop_assert!(f.degree() <= n);
    }

    #[test]
    fn mksol_matches_horner_oracle(n in 2usize..20, seed in any::<u64>(), coeffs in proptest::collection::vec(0u64..1 << 40, 1..6)) {
        let m = gen_ffs_like(&GeneratorParams::ffs_like(n, 1, seed)).unwrap();
        let plan = plan_for(&m);
        let l = ell();
        let y = random_vector(&l, n, seed, 1);
        let f = rnsla::wiedemann::GeneratorPoly { coeffs: coeffs.iter().map(|&c| BigUint::from(c)).collect() };
        let mut expected = vec![BigUint::zero(); n];
        for (i, c) in f.coeffs.iter().enumerate() {
            let ai = oracle_iterate(&m, &y, &l, i).unwrap();
            for (e, v) in expected.iter_mut().zip(ai) {
                *e = (&*e + c * v) % &l;
            }
        }
        prop_assert_eq!(mksol(&plan, &f, &y).unwrap(), expected);
    }
}

#[test]
fn solves_planted_singular_matrices() {
    for seed in 0..4u64 {
        let m = gen_ffs_like(&GeneratorParams::ffs_like(60, 6, seed)).unwrap();
        let m = plant_dependent_row(&m, seed).unwrap();
        let plan = plan_for(&m);
        let (w, report) = solve(&plan, &SolveOptions::new(seed)).unwrap();
        assert!(check_kernel(&m, &w, &ell()));
        assert!(w.iter().any(|x| !x.is_zero()));
        assert!(oracle_spmv_mod(&m, &w, &ell()).unwrap().iter().all(Zero::is_zero));
        assert_eq!(report.sequence_length, 2 * 60 + SEQUENCE_SLACK);
        assert!(report.attempts >= 1);
        let (w2, report2) = solve(&plan, &SolveOptions::new(seed)).unwrap();
        assert_eq!(w, w2);
        assert_eq!(report.generator_degree, report2.generator_degree);
    }
}
