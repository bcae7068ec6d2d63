//! Exp-polynomial functions, linear recurrences and linear functions ρ on H_{b1}.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactla::{fmt_rational, int, kernel_basis, serde_rational, Rational, SparseMatrix, SparseVector};
use crate::hvr2::{BasisSymbol, LieElement};
use crate::lattice::{BasisPair, LatticeVector};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExpPolyError {
    #[error("the zero function has no characteristic recurrence")]
    ZeroFunction,
    #[error("invalid recurrence: need n >= 1 and a0*an != 0")]
    InvalidRecurrence,
    #[error("invalid exp-polynomial term: {0}")]
    InvalidTerm(String),
    #[error("range [{lo}, {hi}] is shorter than 3*order_bound = {need}")]
    RangeTooShort { lo: i64, hi: i64, need: i64 },
    #[error("declared {name} = {declared} disagrees with the value {derived} derived from g(0)/det")]
    InconsistentLevel { name: &'static str, declared: String, derived: String },
    #[error("{0} is not in H_b1")]
    NotInH(String),
    #[error("rho has E-values but the construction needs rho supported on t^(k b1) only")]
    NotTOnly,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExpTerm {
    #[serde(with = "serde_rational")]
    pub c: Rational,
    pub m: u32,
    #[serde(with = "serde_rational")]
    pub a: Rational,
}

/// f(n) = sum c n^m a^n with distinct (m, a) and nonzero c, a.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<ExpTerm>", into = "Vec<ExpTerm>")]
pub struct ExpPolynomial {
    terms: Vec<ExpTerm>,
}

impl TryFrom<Vec<ExpTerm>> for ExpPolynomial {
    type Error = ExpPolyError;
    fn try_from(v: Vec<ExpTerm>) -> Result<Self, ExpPolyError> {
        ExpPolynomial::new(v)
    }
}

impl From<ExpPolynomial> for Vec<ExpTerm> {
    fn from(f: ExpPolynomial) -> Self {
        f.terms
    }
}

impl ExpPolynomial {
    /// Merges repeated (m, a) pairs and drops vanishing terms.
    pub fn new(terms: Vec<ExpTerm>) -> Result<Self, ExpPolyError> {
        let mut map: BTreeMap<(u32, Rational), Rational> = BTreeMap::new();
        for t in terms {
            if t.a.is_zero() {
                return Err(ExpPolyError::InvalidTerm(format!("base a = 0 in term c={}", t.c)));
            }
            *map.entry((t.m, t.a)).or_insert_with(Rational::zero) += t.c;
        }
        let terms = map
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((m, a), c)| ExpTerm { c, m, a })
            .collect();
        Ok(ExpPolynomial { terms })
    }

    pub fn zero() -> Self {
        ExpPolynomial::default()
    }

    /// c n^m a^n.
    pub fn monomial(c: Rational, m: u32, a: Rational) -> Self {
        ExpPolynomial::new(vec![ExpTerm { c, m, a }]).expect("valid term")
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, n: i64) -> Rational {
        let mut s = Rational::zero();
        let nn = int(n);
        for t in &self.terms {
            let e = i32::try_from(n).expect("exponent fits in i32");
            let mut v = &t.c * t.a.pow(e);
            for _ in 0..t.m {
                v *= &nn;
            }
            s += v;
        }
        s
    }

    pub fn add(&self, other: &ExpPolynomial) -> ExpPolynomial {
        let mut v = self.terms.clone();
        v.extend(other.terms.iter().cloned());
        ExpPolynomial::new(v).expect("valid terms")
    }

    /// Sum over distinct bases of (m_max + 1).
    pub fn recurrence_order(&self) -> usize {
        self.annihilator_factors().values().map(|&e| e as usize).sum()
    }

    fn annihilator_factors(&self) -> BTreeMap<Rational, u32> {
        let mut f: BTreeMap<Rational, u32> = BTreeMap::new();
        for t in &self.terms {
            let e = f.entry(t.a.clone()).or_insert(0);
            *e = (*e).max(t.m + 1);
        }
        f
    }
}

impl fmt::Display for ExpPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|t| format!("{}*n^{}*({})^n", fmt_rational(&t.c), t.m, fmt_rational(&t.a)))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// sum_{i=0}^{n} a_i f(m + i) = 0 with a0 an != 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RecRaw", into = "RecRaw")]
pub struct Recurrence {
    coeffs: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
struct RecRaw {
    #[serde(with = "crate::exactla::serde_rational_vec")]
    coeffs: Vec<Rational>,
}

impl TryFrom<RecRaw> for Recurrence {
    type Error = ExpPolyError;
    fn try_from(r: RecRaw) -> Result<Self, ExpPolyError> {
        Recurrence::new(r.coeffs)
    }
}

impl From<Recurrence> for RecRaw {
    fn from(r: Recurrence) -> Self {
        RecRaw { coeffs: r.coeffs }
    }
}

impl Recurrence {
    pub fn new(coeffs: Vec<Rational>) -> Result<Self, ExpPolyError> {
        if coeffs.len() < 2 || coeffs[0].is_zero() || coeffs[coeffs.len() - 1].is_zero() {
            return Err(ExpPolyError::InvalidRecurrence);
        }
        Ok(Recurrence { coeffs })
    }

    pub fn from_i64(c: &[i64]) -> Result<Self, ExpPolyError> {
        Recurrence::new(c.iter().map(|&x| int(x)).collect())
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn apply(&self, g: &dyn Fn(i64) -> Rational, m: i64) -> Rational {
        let mut s = Rational::zero();
        for (i, a) in self.coeffs.iter().enumerate() {
            if !a.is_zero() {
                s += a * g(m + i as i64);
            }
        }
        s
    }
}

impl fmt::Display for Recurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(fmt_rational).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Coefficients (lowest degree first) of prod_a (x - a)^(m_max(a) + 1).
pub fn characteristic_recurrence(f: &ExpPolynomial) -> Result<Recurrence, ExpPolyError> {
    if f.is_zero() {
        return Err(ExpPolyError::ZeroFunction);
    }
    let mut poly = vec![Rational::one()];
    for (a, e) in f.annihilator_factors() {
        for _ in 0..e {
            let mut next = vec![Rational::zero(); poly.len() + 1];
            for (i, p) in poly.iter().enumerate() {
                next[i + 1] += p;
                next[i] -= p * &a;
            }
            poly = next;
        }
    }
    Recurrence::new(poly)
}

/// True iff the recurrence vanishes on every window [m, m+n] inside [lo, hi].
pub fn satisfies_recurrence(g: &dyn Fn(i64) -> Rational, rec: &Recurrence, lo: i64, hi: i64) -> bool {
    let n = rec.order() as i64;
    (lo..=hi - n).all(|m| rec.apply(g, m).is_zero())
}

/// A linear function ρ on H_{b1} with ρ(f(b1)) = ρ(h(b1)) = 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RhoSpec {
    /// Finite tables ρ(E(k b1)), ρ(t^{k b1}); absent entries are zero.
    Table {
        e: BTreeMap<i64, Rational>,
        t: BTreeMap<i64, Rational>,
        f_b2: Rational,
        h_b2: Rational,
    },
    /// ρ determined by g1, g2; optional declared values of ρ(f(b2)), ρ(h(b2)) are checked.
    ExpPoly {
        g1: ExpPolynomial,
        g2: ExpPolynomial,
        f_b2: Option<Rational>,
        h_b2: Option<Rational>,
    },
}

impl RhoSpec {
    pub fn zero() -> Self {
        RhoSpec::table(BTreeMap::new(), BTreeMap::new(), Rational::zero(), Rational::zero())
    }

    pub fn table(
        e: BTreeMap<i64, Rational>,
        t: BTreeMap<i64, Rational>,
        f_b2: Rational,
        h_b2: Rational,
    ) -> Self {
        let clean = |m: BTreeMap<i64, Rational>| {
            m.into_iter().filter(|(k, v)| *k != 0 && !v.is_zero()).collect()
        };
        RhoSpec::Table { e: clean(e), t: clean(t), f_b2, h_b2 }
    }

    pub fn exppoly(g1: ExpPolynomial, g2: ExpPolynomial) -> Self {
        RhoSpec::ExpPoly { g1, g2, f_b2: None, h_b2: None }
    }

    /// Exp-polynomial ρ with explicitly declared ρ(f(b2)), ρ(h(b2)); rejected if inconsistent.
    pub fn exppoly_declared(
        g1: ExpPolynomial,
        g2: ExpPolynomial,
        f_b2: Rational,
        h_b2: Rational,
        b: &BasisPair,
    ) -> Result<Self, ExpPolyError> {
        let r = RhoSpec::ExpPoly { g1, g2, f_b2: Some(f_b2), h_b2: Some(h_b2) };
        r.validate(b)?;
        Ok(r)
    }

    pub fn is_table(&self) -> bool {
        matches!(self, RhoSpec::Table { .. })
    }

    pub fn validate(&self, b: &BasisPair) -> Result<(), ExpPolyError> {
        if let RhoSpec::ExpPoly { f_b2, h_b2, .. } = self {
            for (name, declared, derived) in
                [("f_b2", f_b2, self.f_b2(b)), ("h_b2", h_b2, self.h_b2(b))]
            {
                if let Some(d) = declared {
                    if *d != derived {
                        return Err(ExpPolyError::InconsistentLevel {
                            name,
                            declared: fmt_rational(d),
                            derived: fmt_rational(&derived),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// ρ(E(k b1)); zero at k = 0.
    pub fn e_value(&self, k: i64) -> Rational {
        if k == 0 {
            return Rational::zero();
        }
        match self {
            RhoSpec::Table { e, .. } => e.get(&k).cloned().unwrap_or_else(Rational::zero),
            RhoSpec::ExpPoly { g1, .. } => g1.eval(k) / int(k),
        }
    }

    /// ρ(t^{k b1}); zero at k = 0.
    pub fn t_value(&self, k: i64) -> Rational {
        if k == 0 {
            return Rational::zero();
        }
        match self {
            RhoSpec::Table { t, .. } => t.get(&k).cloned().unwrap_or_else(Rational::zero),
            RhoSpec::ExpPoly { g2, .. } => g2.eval(k) / int(k),
        }
    }

    pub fn f_b2(&self, b: &BasisPair) -> Rational {
        match self {
            RhoSpec::Table { f_b2, .. } => f_b2.clone(),
            RhoSpec::ExpPoly { g1, .. } => g1.eval(0) / int(b.det()),
        }
    }

    pub fn h_b2(&self, b: &BasisPair) -> Rational {
        match self {
            RhoSpec::Table { h_b2, .. } => h_b2.clone(),
            RhoSpec::ExpPoly { g2, .. } => g2.eval(0) / int(b.det()),
        }
    }

    pub fn g1(&self, m: i64, b: &BasisPair) -> Rational {
        if m == 0 {
            int(b.det()) * self.f_b2(b)
        } else {
            int(m) * self.e_value(m)
        }
    }

    pub fn g2(&self, m: i64, b: &BasisPair) -> Rational {
        if m == 0 {
            int(b.det()) * self.h_b2(b)
        } else {
            int(m) * self.t_value(m)
        }
    }

    /// The level (c1, c2, c3, c4) = (ρ f(b1), ρ h(b1), ρ f(b2), ρ h(b2)).
    pub fn level(&self, b: &BasisPair) -> [Rational; 4] {
        [Rational::zero(), Rational::zero(), self.f_b2(b), self.h_b2(b)]
    }

    /// Nonzero indices k in [-window, window] of the E- and/or t-values.
    pub fn support(&self, use_e: bool, use_t: bool, window: i64) -> Vec<i64> {
        (-window..=window)
            .filter(|&k| {
                k != 0
                    && ((use_e && !self.e_value(k).is_zero()) || (use_t && !self.t_value(k).is_zero()))
            })
            .collect()
    }

    pub fn has_e_values(&self) -> bool {
        match self {
            RhoSpec::Table { e, .. } => !e.is_empty(),
            RhoSpec::ExpPoly { g1, .. } => !g1.is_zero(),
        }
    }

    /// ρ(x) for x in H_{b1}.
    pub fn apply(&self, x: &LieElement, b: &BasisPair) -> Result<Rational, ExpPolyError> {
        let mut s = Rational::zero();
        for (sym, c) in x.terms() {
            match sym {
                BasisSymbol::E(m) | BasisSymbol::T(m) => {
                    let (k, l) = b.coords(*m);
                    if l != 0 {
                        return Err(ExpPolyError::NotInH(sym.to_string()));
                    }
                    let v = if matches!(sym, BasisSymbol::E(_)) { self.e_value(k) } else { self.t_value(k) };
                    s += c * v;
                }
                BasisSymbol::K(_) => {}
                BasisSymbol::D(_) => return Err(ExpPolyError::NotInH(sym.to_string())),
            }
        }
        let lvl = self.level(b);
        let kv = central_values(&lvl, b);
        for (i, v) in x.central_part().iter().enumerate() {
            s += v * &kv[i];
        }
        Ok(s)
    }
}

/// Values of K1..K4 from a level (f(b1), h(b1), f(b2), h(b2)).
pub fn central_values(c: &[Rational; 4], b: &BasisPair) -> [Rational; 4] {
    let inv = b.inverse();
    let (p1, q1, p2, q2) = (int(inv.p1), int(inv.q1), int(inv.p2), int(inv.q2));
    [
        &p1 * &c[1] + &q1 * &c[3],
        &p2 * &c[1] + &q2 * &c[3],
        &p1 * &c[0] + &q1 * &c[2],
        &p2 * &c[0] + &q2 * &c[2],
    ]
}

/// Level (f(b1), h(b1), f(b2), h(b2)) from values of K1..K4.
pub fn level_from_central(k: &[Rational; 4], b: &BasisPair) -> [Rational; 4] {
    let ev = |v: LatticeVector, x: &Rational, y: &Rational| int(v.m1) * x + int(v.m2) * y;
    [
        ev(b.b1(), &k[2], &k[3]),
        ev(b.b1(), &k[0], &k[1]),
        ev(b.b2(), &k[2], &k[3]),
        ev(b.b2(), &k[0], &k[1]),
    ]
}

pub type Evaluator = Box<dyn Fn(i64) -> Rational + Send + Sync>;

/// g1(m) = m ρ(E(m b1)), g2(m) = m ρ(t^{m b1}), with g(0) = det ρ(f(b2)), det ρ(h(b2)).
pub fn rho_to_g(rho: &RhoSpec, b: &BasisPair) -> (Evaluator, Evaluator) {
    let (r1, r2, b1, b2) = (rho.clone(), rho.clone(), *b, *b);
    (Box::new(move |m| r1.g1(m, &b1)), Box::new(move |m| r2.g2(m, &b2)))
}

pub fn g_to_rho(g1: &ExpPolynomial, g2: &ExpPolynomial, _b: &BasisPair) -> RhoSpec {
    RhoSpec::exppoly(g1.clone(), g2.clone())
}

/// Table-kind ρ reproducing given g-values on 0 < |m| <= width (and at m = 0).
pub fn table_from_g(
    g1: &dyn Fn(i64) -> Rational,
    g2: &dyn Fn(i64) -> Rational,
    width: i64,
    b: &BasisPair,
) -> RhoSpec {
    let mut e = BTreeMap::new();
    let mut t = BTreeMap::new();
    for m in (-width..=width).filter(|&m| m != 0) {
        e.insert(m, g1(m) / int(m));
        t.insert(m, g2(m) / int(m));
    }
    let det = int(b.det());
    RhoSpec::table(e, t, g1(0) / &det, g2(0) / &det)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "witness", rename_all = "lowercase")]
pub enum ExpVerdict {
    Yes(Recurrence),
    Undetermined,
}

/// Searches for one recurrence of order <= order_bound annihilating g1 and g2 on [lo, hi].
pub fn is_exp_polynomial_over_h(
    rho: &RhoSpec,
    b: &BasisPair,
    order_bound: usize,
    lo: i64,
    hi: i64,
) -> Result<ExpVerdict, ExpPolyError> {
    let need = 3 * order_bound as i64;
    if hi - lo + 1 < need {
        return Err(ExpPolyError::RangeTooShort { lo, hi, need });
    }
    let g1: Vec<Rational> = (lo..=hi).map(|m| rho.g1(m, b)).collect();
    let g2: Vec<Rational> = (lo..=hi).map(|m| rho.g2(m, b)).collect();
    for n in 1..=order_bound {
        let mut rows = Vec::new();
        for g in [&g1, &g2] {
            for s in 0..g.len().saturating_sub(n) {
                rows.push(g[s..=s + n].to_vec());
            }
        }
        let ker = if rows.is_empty() {
            (0..=n).map(|i| SparseVector::unit(n + 1, i)).collect()
        } else {
            kernel_basis(&SparseMatrix::from_dense(&rows))
        };
        if let Some(w) = extreme_nonzero_combination(&ker, n) {
            return Ok(ExpVerdict::Yes(w));
        }
    }
    Ok(ExpVerdict::Undetermined)
}

/// A kernel vector with a0 an != 0, scaled so an = 1, if the kernel has one.
fn extreme_nonzero_combination(ker: &[SparseVector], n: usize) -> Option<Recurrence> {
    let with_a0 = ker.iter().find(|v| !v.get(0).is_zero())?;
    let with_an = ker.iter().find(|v| !v.get(n).is_zero())?;
    for lambda in 0..3 {
        let v = with_a0.add_scaled(with_an, &int(lambda));
        let (a0, an) = (v.get(0), v.get(n));
        if !a0.is_zero() && !an.is_zero() {
            let inv = an.recip();
            return Recurrence::new(v.to_dense().iter().map(|x| x * &inv).collect()).ok();
        }
    }
    None
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RhoRaw {
    kind: String,
    #[serde(rename = "E", default, skip_serializing_if = "Option::is_none")]
    e: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    f_b2: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    h_b2: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g1: Option<ExpPolynomial>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g2: Option<ExpPolynomial>,
}

impl Serialize for RhoSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let fmt_map = |m: &BTreeMap<i64, Rational>| {
            let mut out: Vec<(i64, String)> = m.iter().map(|(k, v)| (*k, fmt_rational(v))).collect();
            out.sort();
            out.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<BTreeMap<_, _>>()
        };
        let raw = match self {
            RhoSpec::Table { e, t, f_b2, h_b2 } => RhoRaw {
                kind: "table".into(),
                e: Some(fmt_map(e)),
                t: Some(fmt_map(t)),
                f_b2: Some(fmt_rational(f_b2)),
                h_b2: Some(fmt_rational(h_b2)),
                g1: None,
                g2: None,
            },
            RhoSpec::ExpPoly { g1, g2, f_b2, h_b2 } => RhoRaw {
                kind: "exppoly".into(),
                e: None,
                t: None,
                f_b2: f_b2.as_ref().map(fmt_rational),
                h_b2: h_b2.as_ref().map(fmt_rational),
                g1: Some(g1.clone()),
                g2: Some(g2.clone()),
            },
        };
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RhoSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = RhoRaw::deserialize(d)?;
        let q = |s: &str| crate::exactla::parse_rational(s).map_err(D::Error::custom);
        let table = |m: Option<BTreeMap<String, String>>| -> Result<BTreeMap<i64, Rational>, D::Error> {
            let mut out = BTreeMap::new();
            for (k, v) in m.unwrap_or_default() {
                let k: i64 = k.trim().parse().map_err(|_| D::Error::custom(format!("bad index {k:?}")))?;
                if k == 0 {
                    return Err(D::Error::custom("table index 0 is not allowed (E(0) = t^0 = 0)"));
                }
                out.insert(k, q(&v)?);
            }
            Ok(out)
        };
        match raw.kind.as_str() {
            "table" => {
                if raw.g1.is_some() || raw.g2.is_some() {
                    return Err(D::Error::custom("table-kind rho does not take g1/g2"));
                }
                let f_b2 = raw.f_b2.as_deref().map(q).transpose()?.unwrap_or_else(Rational::zero);
                let h_b2 = raw.h_b2.as_deref().map(q).transpose()?.unwrap_or_else(Rational::zero);
                Ok(RhoSpec::table(table(raw.e)?, table(raw.t)?, f_b2, h_b2))
            }
            "exppoly" => {
                if raw.e.is_some() || raw.t.is_some() {
                    return Err(D::Error::custom("exppoly-kind rho does not take E/t tables"));
                }
                Ok(RhoSpec::ExpPoly {
                    g1: raw.g1.unwrap_or_default(),
                    g2: raw.g2.unwrap_or_default(),
                    f_b2: raw.f_b2.as_deref().map(q).transpose()?,
                    h_b2: raw.h_b2.as_deref().map(q).transpose()?,
                })
            }
            other => Err(D::Error::custom(format!("unknown rho kind {other:?}"))),
        }
    }
}
