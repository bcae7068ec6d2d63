mod common;

use common::{pow2, rho_constant, rho_even, rho_linear};
use hvtorus::exactla::{int, rank, rat, Rational, SparseMatrix};
use hvtorus::exppoly::{
    characteristic_recurrence, g_to_rho, is_exp_polynomial_over_h, rho_to_g, table_from_g, ExpPolynomial, ExpTerm,
    ExpVerdict,
};
use hvtorus::lattice::{lv, BasisPair};
use proptest::prelude::*;

fn base() -> impl Strategy<Value = Rational> {
    prop::sample::select(vec![int(1), int(-1), int(2), int(-2), rat(1, 2), int(3), rat(-1, 3)])
}

fn exppoly() -> impl Strategy<Value = ExpPolynomial> {
    prop::collection::vec((-4i64..=4, 1i64..=3, 0u32..=2, base()), 1..=3).prop_filter_map("nonzero", |ts| {
        let terms: Vec<ExpTerm> = ts
            .into_iter()
            .filter(|(c, ..)| *c != 0)
            .map(|(c, d, m, a)| ExpTerm { c: rat(c, d), m, a })
            .collect();
        let f = ExpPolynomial::new(terms).ok()?;
        (!f.is_zero()).then_some(f)
    })
}

fn hankel_rank(f: &ExpPolynomial, size: usize) -> usize {
    let rows: Vec<Vec<Rational>> =
        (0..size).map(|i| (0..size).map(|j| f.eval(i as i64 + j as i64 - 6)).collect()).collect();
    rank(&SparseMatrix::from_dense(&rows))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn characteristic_recurrence_annihilates(f in exppoly()) {
        let rec = characteristic_recurrence(&f).unwrap();
        let n = rec.order() as i64;
        for m in -20..=20 - n {
            let s: Rational = rec.coeffs().iter().enumerate().map(|(i, c)| c * f.eval(m + i as i64)).sum();
            prop_assert_eq!(s, int(0));
        }
        prop_assert!(rec.coeffs()[0] != int(0));
        prop_assert!(rec.coeffs()[rec.order()] != int(0));
    }

    #[test]
    fn recurrence_order_is_minimal(f in exppoly()) {
        let rec = characteristic_recurrence(&f).unwrap();
        prop_assert_eq!(hankel_rank(&f, 10), rec.order());
        prop_assert_eq!(f.recurrence_order(), rec.order());
    }

    #[test]
    fn rho_g_roundtrip(g1 in exppoly(), g2 in exppoly(), swap in any::<bool>()) {
        let b = if swap { BasisPair::new(lv(0, 1), lv(1, 0)).unwrap() } else { BasisPair::standard() };
        let rho = g_to_rho(&g1, &g2, &b);
        let (h1, h2) = rho_to_g(&rho, &b);
        for m in -12..=12 {
            prop_assert_eq!(h1(m), g1.eval(m));
            prop_assert_eq!(h2(m), g2.eval(m));
        }
        let tab = table_from_g(&|m| g1.eval(m), &|m| g2.eval(m), 12, &b);
        for m in -12..=12 {
            prop_assert_eq!(tab.g1(m, &b), g1.eval(m));
            prop_assert_eq!(tab.g2(m, &b), g2.eval(m));
        }
    }

    #[test]
    fn search_finds_a_witness_within_the_true_order(g1 in exppoly()) {
        let b = BasisPair::standard();
        let rho = g_to_rho(&g1, &ExpPolynomial::zero(), &b);
        let order = g1.recurrence_order();
        match is_exp_polynomial_over_h(&rho, &b, 9, -14, 14).unwrap() {
            ExpVerdict::Yes(w) => prop_assert!(w.order() <= order),
            ExpVerdict::Undetermined => prop_assert!(false, "no witness for {}", g1),
        }
    }
}

#[test]
fn named_fixture_witnesses() {
    let b = BasisPair::standard();
    let cases = [(rho_linear(), 2), (rho_constant(), 1), (rho_even(), 4)];
    for (rho, order) in cases {
        match is_exp_polynomial_over_h(&rho, &b, 6, -12, 12).unwrap() {
            ExpVerdict::Yes(w) => assert_eq!(w.order(), order),
            ExpVerdict::Undetermined => panic!("expected a witness"),
        }
    }
}

#[test]
fn super_exponential_table_is_undetermined() {
    let b = BasisPair::standard();
    let rho = table_from_g(&|m| pow2(m * m), &|_| int(0), 20, &b);
    assert_eq!(is_exp_polynomial_over_h(&rho, &b, 6, -10, 10).unwrap(), ExpVerdict::Undetermined);
}
