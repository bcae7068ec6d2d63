//! Independent oracles and shared fixtures for the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use hvtorus::exactla::{int, rat, Rational};
use hvtorus::exppoly::{ExpPolynomial, RhoSpec};
use hvtorus::gradmod::{Combo, ModuleError, TruncatedModule};
use hvtorus::hvr2::{BasisSymbol, LieElement};

/// p(0..=n) by the coin-change recurrence over parts 1..=n.
pub fn partitions(n: usize) -> Vec<u64> {
    let mut p = vec![0u64; n + 1];
    p[0] = 1;
    for part in 1..=n {
        for k in part..=n {
            p[k] += p[k - part];
        }
    }
    p
}

/// Coefficients of prod_{k>=1} (1 - q^k)^{-2} by squaring the partition series.
pub fn two_colored(n: usize) -> Vec<u64> {
    let p = partitions(n);
    (0..=n).map(|k| (0..=k).map(|i| p[i] * p[k - i]).sum()).collect()
}

/// gcd by repeated subtraction, independent of library gcd helpers.
pub fn slow_gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while a != 0 && b != 0 {
        if a > b {
            a -= b;
        } else {
            b -= a;
        }
    }
    a + b
}

/// Values reachable from 0 by adding elements of `steps`, staying in [-bound, bound].
pub fn reachable(steps: &[i64], bound: i64) -> BTreeSet<i64> {
    let mut seen = BTreeSet::from([0]);
    let mut queue = VecDeque::from([0]);
    while let Some(x) = queue.pop_front() {
        for s in steps {
            let y = x + s;
            if y.abs() <= bound && seen.insert(y) {
                queue.push_back(y);
            }
        }
    }
    seen
}

pub fn rho_g1(g1: ExpPolynomial) -> RhoSpec {
    RhoSpec::exppoly(g1, ExpPolynomial::zero())
}

/// g1(m) = m.
pub fn rho_linear() -> RhoSpec {
    rho_g1(ExpPolynomial::monomial(int(1), 1, int(1)))
}

/// g1 = 1.
pub fn rho_constant() -> RhoSpec {
    rho_g1(ExpPolynomial::monomial(int(1), 0, int(1)))
}

/// g1(m) = m on even m, 0 on odd m.
pub fn rho_even() -> RhoSpec {
    rho_g1(ExpPolynomial::monomial(rat(1, 2), 1, int(1)).add(&ExpPolynomial::monomial(rat(1, 2), 1, int(-1))))
}

/// E-values 1 at ±3 only.
pub fn rho_three() -> RhoSpec {
    let e = BTreeMap::from([(3, int(1)), (-3, int(1))]);
    RhoSpec::table(e, BTreeMap::new(), int(0), int(0))
}

pub fn pow2(e: i64) -> Rational {
    Rational::from_integer(num_bigint::BigInt::from(1) << (e as usize))
}

/// x acting on a combination, term by term.
pub fn act_element(m: &TruncatedModule, x: &LieElement, v: &Combo) -> Result<Combo, ModuleError> {
    let mut out = Combo::new();
    for (s, c) in x.terms() {
        for (l, y) in m.act_exact_combo(s, v)? {
            let e = out.entry(l).or_insert_with(|| int(0));
            *e += c * y;
        }
    }
    out.retain(|_, y| y != &int(0));
    Ok(out)
}

pub fn sub(a: &Combo, b: &Combo) -> Combo {
    let mut out = a.clone();
    for (l, y) in b {
        let e = out.entry(l.clone()).or_insert_with(|| int(0));
        *e -= y;
    }
    out.retain(|_, y| y != &int(0));
    out
}

pub fn sym(s: BasisSymbol) -> LieElement {
    LieElement::sym(s)
}
