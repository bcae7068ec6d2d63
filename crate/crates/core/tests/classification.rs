mod common;

use std::collections::BTreeMap;

use common::{reachable, slow_gcd};
use hvtorus::constructions::{classify_t_rho, laurent_t, monoid_contains, t_rho, LaurentAlg};
use hvtorus::exactla::{int, rat};
use hvtorus::exppoly::RhoSpec;
use hvtorus::gradmod::generated_submodule;
use hvtorus::lattice::BasisPair;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_rho(rng: &mut ChaCha8Rng, window: i64) -> (RhoSpec, Vec<i64>) {
    let n = rng.gen_range(1..=4);
    let mut e = BTreeMap::new();
    let mut t = BTreeMap::new();
    for _ in 0..n {
        let mut k = 0;
        while k == 0 {
            k = rng.gen_range(-window..=window);
        }
        let v = rat(rng.gen_range(1..=5) * if rng.gen_bool(0.5) { 1 } else { -1 }, rng.gen_range(1..=3));
        if rng.gen_bool(0.5) {
            e.insert(k, v);
        } else {
            t.insert(k, v);
        }
    }
    let mut support: Vec<i64> = e.keys().chain(t.keys()).copied().collect();
    support.sort();
    support.dedup();
    (RhoSpec::table(e, t, int(0), int(0)), support)
}

#[test]
fn classification_matches_reachability_oracle() {
    let window = 24;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let b = BasisPair::standard();
    for _ in 0..50 {
        let (rho, support) = random_rho(&mut rng, window);
        let class = classify_t_rho(&rho, LaurentAlg::H, &b, window).unwrap();
        let r = support.iter().fold(0, |g, k| slow_gcd(g, *k));
        let reach = reachable(&support, 2 * window);
        let irreducible = reach.contains(&r) && reach.contains(&-r);
        assert_eq!(class.support, support);
        assert_eq!(class.r as i64, r, "support {support:?}");
        assert_eq!(class.irreducible, irreducible, "support {support:?}");
    }
}

#[test]
fn monoid_membership_matches_reachability() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..40 {
        let k = rng.gen_range(1..=3);
        let steps: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=6) * if rng.gen_bool(0.3) { -1 } else { 1 }).collect();
        let reach = reachable(&steps, 200);
        for n in -30..=30 {
            assert_eq!(monoid_contains(&steps, n), reach.contains(&n), "steps {steps:?} n {n}");
        }
    }
}

#[test]
fn named_examples() {
    let b = BasisPair::standard();
    let two = RhoSpec::table(BTreeMap::from([(2, int(1)), (-2, int(1))]), BTreeMap::new(), int(0), int(0));
    let c = classify_t_rho(&two, LaurentAlg::H, &b, 24).unwrap();
    assert_eq!((c.r, c.irreducible), (2, true));
    let one = RhoSpec::table(BTreeMap::from([(1, int(1))]), BTreeMap::new(), int(0), int(0));
    let c = classify_t_rho(&one, LaurentAlg::H, &b, 24).unwrap();
    assert_eq!((c.r, c.irreducible), (1, false));
    let only_t = RhoSpec::table(BTreeMap::new(), BTreeMap::from([(3, int(2)), (-6, int(1))]), int(0), int(0));
    assert_eq!(classify_t_rho(&only_t, LaurentAlg::E, &b, 24).unwrap().r, 0);
    assert_eq!(classify_t_rho(&only_t, LaurentAlg::T, &b, 24).unwrap().r, 3);
}

#[test]
fn generated_submodule_of_t0_is_t_r() {
    let b = BasisPair::standard();
    let rho = RhoSpec::table(BTreeMap::from([(2, int(1)), (-4, rat(1, 2))]), BTreeMap::new(), int(0), int(0));
    let full = laurent_t(&rho, LaurentAlg::H, b, 8).unwrap();
    let seed = full.vec_from_label(&hvtorus::gradmod::Label::Laurent(0)).unwrap();
    let gen = generated_submodule(&full, &[seed]).unwrap();
    for w in full.offsets() {
        let k = b.coords(w).0;
        assert_eq!(gen.dim_at(w), usize::from(k % 2 == 0), "t^{k}");
    }
    let t0 = t_rho(&rho, LaurentAlg::H, b, 8, 0).unwrap();
    assert_eq!(t0.total_dim(), 9);
    let t1 = t_rho(&rho, LaurentAlg::H, b, 8, 1).unwrap();
    assert_eq!(t1.total_dim(), 8);
}

#[test]
fn one_sided_support_is_reducible() {
    let b = BasisPair::standard();
    let rho = RhoSpec::table(BTreeMap::from([(1, int(1))]), BTreeMap::new(), int(0), int(0));
    let full = laurent_t(&rho, LaurentAlg::H, b, 6).unwrap();
    let seed = full.vec_from_label(&hvtorus::gradmod::Label::Laurent(2)).unwrap();
    let gen = generated_submodule(&full, &[seed]).unwrap();
    assert_eq!(gen.total_dim(), 5);
}
