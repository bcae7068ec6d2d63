//! [x, y] v = x (y v) - y (x v) on window labels, with the exact label action.

mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use common::{act_element, rho_linear, sub, sym};
use hvtorus::constructions::{
    extend_to_l0, fock, highest_weight_v_rho_bar, induce, laurent_t, m_verma_induced, t_rho, tensor_m_rho, verma_h,
    Epsilon, LaurentAlg,
};
use hvtorus::exactla::{int, rat};
use hvtorus::exppoly::RhoSpec;
use hvtorus::gradmod::{combo_single, TruncatedModule, Truncation};
use hvtorus::hvr2::{bracket, BasisSymbol};
use hvtorus::lattice::{lv, BasisPair};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn check_axioms(m: &TruncatedModule, trials: usize, seed: u64) {
    let mut pool = m.retained_generators();
    pool.extend((1..=4).map(BasisSymbol::K));
    if m.scope().derivations {
        pool.extend((1..=2).map(BasisSymbol::D));
    }
    let labels: Vec<_> = m.all_labels().cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    for _ in 0..trials {
        let x = pool[rng.gen_range(0..pool.len())];
        let y = pool[rng.gen_range(0..pool.len())];
        let br = bracket(&sym(x), &sym(y));
        if br.terms().any(|(s, _)| !m.scope().accepts(s)) {
            continue;
        }
        let v = combo_single(labels[rng.gen_range(0..labels.len())].clone(), int(1));
        let xy = act_element(m, &sym(x), &act_element(m, &sym(y), &v).unwrap()).unwrap();
        let yx = act_element(m, &sym(y), &act_element(m, &sym(x), &v).unwrap()).unwrap();
        let lhs = act_element(m, &br, &v).unwrap();
        assert_eq!(lhs, sub(&xy, &yx), "module {} x {x} y {y} v {v:?}", m.name());
        checked += 1;
    }
    assert!(checked > trials / 4, "too few admissible pairs for {}", m.name());
}

#[test]
fn laurent_modules() {
    let rho = RhoSpec::table(
        BTreeMap::from([(1, int(2)), (-2, rat(1, 2))]),
        BTreeMap::from([(1, int(-1)), (3, int(1))]),
        int(0),
        int(0),
    );
    for alg in [LaurentAlg::H, LaurentAlg::E, LaurentAlg::T] {
        check_axioms(&laurent_t(&rho, alg, BasisPair::standard(), 6).unwrap(), 200, 1);
    }
}

#[test]
fn heisenberg_modules() {
    let b = BasisPair::new(lv(2, 1), lv(1, 1)).unwrap();
    check_axioms(&fock(Epsilon::Plus, &int(2), b, 5), 300, 2);
    check_axioms(&fock(Epsilon::Minus, &rat(1, 3), BasisPair::standard(), 5), 300, 3);
    let c = [int(1), int(2), int(-1), int(3)];
    check_axioms(&verma_h(&c, Epsilon::Plus, b, 4), 300, 4);
    check_axioms(&verma_h(&c, Epsilon::Minus, BasisPair::standard(), 4), 300, 5);
}

#[test]
fn tensor_module() {
    let rho = RhoSpec::table(BTreeMap::new(), BTreeMap::from([(1, int(1)), (-1, int(2))]), int(1), int(0));
    let m = tensor_m_rho(&rho, Epsilon::Plus, &int(1), BasisPair::standard(), 3, 3).unwrap();
    check_axioms(&m, 300, 6);
}

#[test]
fn highest_weight_module() {
    let m = highest_weight_v_rho_bar(&rho_linear(), BasisPair::standard(), Truncation::new(2, 3)).unwrap();
    check_axioms(&m, 300, 7);
}

#[test]
fn induced_modules() {
    let b = BasisPair::standard();
    let top = extend_to_l0(&t_rho(&rho_linear(), LaurentAlg::H, b, 3, 0).unwrap(), (rat(1, 2), int(0)), &b).unwrap();
    let m = induce(b, Arc::new(top), Truncation::new(2, 3)).unwrap();
    check_axioms(&m, 300, 8);
    let c = [int(0), int(1), int(1), int(0)];
    let m = m_verma_induced(&c, Epsilon::Plus, b, Truncation::new(1, 2), 2, (int(0), int(1))).unwrap();
    check_axioms(&m, 300, 9);
}
