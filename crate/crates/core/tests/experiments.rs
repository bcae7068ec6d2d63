mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use common::{pow2, rho_constant, rho_even, rho_linear, rho_three};
use hvtorus::constructions::{
    extend_to_l0, fock, induce, irreducible_quotient, laurent_t, t_rho, trivial_module, Epsilon, LaurentAlg,
};
use hvtorus::exactla::{int, Rational};
use hvtorus::experiments::{
    decomposition_check, ghw_scan, growth_experiment, heisenberg_irreducibility_probe, stabilization_experiment,
    support_properties_check, support_properties_of_quotient, witness_ranks, Verdict,
};
use hvtorus::exppoly::{central_values, table_from_g};
use hvtorus::gradmod::{Directions, ModuleError, Scope, Truncation};
use hvtorus::lattice::{lv, BasisPair};

fn zero2() -> (Rational, Rational) {
    (int(0), int(0))
}

fn m_t_rho_induced(window: i64, depth: u32) -> hvtorus::gradmod::TruncatedModule {
    let b = BasisPair::standard();
    let top = extend_to_l0(&t_rho(&rho_linear(), LaurentAlg::H, b, window, 0).unwrap(), zero2(), &b).unwrap();
    induce(b, Arc::new(top), Truncation::new(depth, window)).unwrap()
}

#[test]
fn stabilization_small_sweeps() {
    let b = BasisPair::standard();
    let r = stabilization_experiment(&rho_linear(), b, 1, &[2, 4, 6]).unwrap();
    assert_eq!(r.verdict, Verdict::Stabilized { at: 2, value: vec![2] });
    assert_eq!(r.tables.len(), 3);
    let r = stabilization_experiment(&rho_constant(), b, 1, &[2, 4, 6]).unwrap();
    assert_eq!(r.verdict, Verdict::Stabilized { at: 2, value: vec![1] });
    let r = stabilization_experiment(&rho_even(), b, 1, &[4, 6, 8]).unwrap();
    assert_eq!(r.verdict.name(), "stabilized");
}

#[test]
fn super_exponential_growth_skips_deeper_levels() {
    let b = BasisPair::standard();
    let rho = table_from_g(&|m| pow2(m * m), &|_| int(0), 16, &b);
    let r = stabilization_experiment(&rho, b, 2, &[2, 4, 6]).unwrap();
    assert_eq!(r.verdict, Verdict::Growing);
    assert_eq!(r.levels_computed, 1);
    assert_eq!(r.notes.len(), 1);
}

#[test]
fn sweep_needs_three_settings() {
    assert!(stabilization_experiment(&rho_linear(), BasisPair::standard(), 1, &[2, 4]).is_err());
}

#[test]
fn growth_both_branches() {
    let b = BasisPair::standard();
    let r = growth_experiment(&[0, 1, 0, 0].map(int), Epsilon::Plus, b, &[1, 2, 3], zero2()).unwrap();
    assert_eq!(r.verdict, Verdict::Growing);
    let r = growth_experiment(&[1, 0, 0, 0].map(int), Epsilon::Minus, b, &[1, 2, 3], zero2()).unwrap();
    assert_eq!(r.verdict, Verdict::Growing);
    let e = growth_experiment(&[0, 0, 1, 0].map(int), Epsilon::Plus, b, &[1, 2, 3], zero2()).unwrap_err();
    assert!(matches!(e, ModuleError::CaseMismatch { .. }));
    assert!(e.to_string().contains("case mismatch"));
}

#[test]
fn witness_family_has_full_rank() {
    for eps in [Epsilon::Plus, Epsilon::Minus] {
        let b = BasisPair::new(lv(1, 1), lv(0, 1)).unwrap();
        let w = witness_ranks(&[0, 1, 0, 0].map(int), eps, b, 4).unwrap();
        assert!(w.full_rank, "{w:?}");
        assert_eq!(w.ranks.len(), 4);
    }
}

#[test]
fn irreducibility_probe_examples() {
    let b = BasisPair::standard();
    assert!(heisenberg_irreducibility_probe(&fock(Epsilon::Plus, &int(1), b, 6), &int(1)).unwrap());
    assert!(!heisenberg_irreducibility_probe(&fock(Epsilon::Plus, &int(0), b, 3), &int(0)).unwrap());
    let t1 = laurent_t(&rho_linear(), LaurentAlg::H, b, 6).unwrap();
    assert!(heisenberg_irreducibility_probe(&t1, &int(0)).unwrap());
    assert!(heisenberg_irreducibility_probe(&fock(Epsilon::Plus, &int(1), b, 3), &int(2)).is_err());
    let one_sided = hvtorus::exppoly::RhoSpec::table(BTreeMap::from([(1, int(1))]), BTreeMap::new(), int(0), int(0));
    let t = laurent_t(&one_sided, LaurentAlg::H, b, 4).unwrap();
    assert!(!heisenberg_irreducibility_probe(&t, &int(0)).unwrap());
}

#[test]
fn support_checks() {
    let b = BasisPair::standard();
    let bp = BasisPair::new(lv(1, 1), lv(1, 2)).unwrap();
    let m = m_t_rho_induced(3, 2);
    for check in [b, bp] {
        let rep = support_properties_of_quotient(&m, &check).unwrap();
        assert!(rep.ok(), "{rep:?}");
        assert!(rep.interior_weights > 10);
    }
    let triv = trivial_module(b, central_values(&[int(0), int(0), int(0), int(0)], &b), Scope { basis: b, e: Directions::All, t: Directions::All, derivations: false });
    let dims = triv.dims();
    assert!(support_properties_check(&dims, &b, &b).ok());
    let mut q = hvtorus::gradmod::quotient_dims_by_rank(&m).unwrap();
    q.insert(b.from_coords(0, -1), 0);
    let rep = support_properties_check(&q, &b, &b);
    assert!(!rep.ok());
    assert!(rep.violations.iter().any(|v| v.weight == (0, -1)));
}

#[test]
fn decomposition_fixtures() {
    let b = BasisPair::standard();
    for (rho, r) in [(rho_linear(), 1), (rho_even(), 2), (rho_three(), 3)] {
        let rep = decomposition_check(&rho, b, Truncation::new(1, 5)).unwrap();
        assert_eq!(rep.r, r);
        assert!(rep.ok(), "{:?}", rep.mismatches);
        assert_eq!(rep.slices.len(), r as usize);
    }
    let rep = decomposition_check(&rho_even(), b, Truncation::new(2, 4)).unwrap();
    assert!(rep.ok(), "{:?}", rep.mismatches);
    assert!(rep.compared > 0);
    let zero = hvtorus::exppoly::RhoSpec::zero();
    assert!(decomposition_check(&zero, b, Truncation::new(1, 3)).is_err());
}

#[test]
fn ghw_scan_examples() {
    let b = BasisPair::standard();
    let bp = BasisPair::new(lv(1, 1), lv(1, 2)).unwrap();
    let q = irreducible_quotient(Arc::new(m_t_rho_induced(3, 1))).unwrap();
    let hits = ghw_scan(&q, &[bp, b]).unwrap();
    assert!(hits.iter().any(|h| h.basis == bp && h.offset == (0, 0) && h.exact));
    assert!(!hits.iter().any(|h| h.basis == b && h.exact), "{hits:?}");
    let e = ghw_scan(&fock(Epsilon::Plus, &int(1), b, 3), &[b]).unwrap_err();
    assert!(e.to_string().contains("not applicable"));
    let scope = Scope { basis: b, e: Directions::All, t: Directions::All, derivations: false };
    let triv = trivial_module(b, [int(0), int(0), int(0), int(0)], scope);
    let hits = ghw_scan(&triv, &[b, bp]).unwrap();
    assert_eq!(hits.len(), 2 * triv.offsets().len());
}
