//! The algebra L~ = L + Cd1 + Cd2: symbols, bracket, element syntax,
//! triangular decomposition, subalgebras and PBW straightening.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::exactla::{int, parse_rational, Rational};
use crate::lattice::{det2, lv, BasisPair, LatticeVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisSymbol {
    E(LatticeVector),
    T(LatticeVector),
    K(u8),
    D(u8),
}

impl BasisSymbol {
    /// Bidegree in Γ; central and derivation symbols have degree zero.
    pub fn degree(&self) -> LatticeVector {
        match self {
            BasisSymbol::E(m) | BasisSymbol::T(m) => *m,
            _ => LatticeVector::ZERO,
        }
    }

    pub fn is_valid(&self) -> bool {
        match self {
            BasisSymbol::E(m) | BasisSymbol::T(m) => !m.is_zero(),
            BasisSymbol::K(i) => (1..=4).contains(i),
            BasisSymbol::D(i) => (1..=2).contains(i),
        }
    }

    pub fn is_central(&self) -> bool {
        matches!(self, BasisSymbol::K(_))
    }
}

impl fmt::Display for BasisSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisSymbol::E(m) => write!(f, "E[{},{}]", m.m1, m.m2),
            BasisSymbol::T(m) => write!(f, "t[{},{}]", m.m1, m.m2),
            BasisSymbol::K(i) => write!(f, "K{i}"),
            BasisSymbol::D(i) => write!(f, "d{i}"),
        }
    }
}

/// Finite rational combination of basis symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct LieElement {
    terms: BTreeMap<BasisSymbol, Rational>,
}

impl LieElement {
    pub fn zero() -> Self {
        LieElement::default()
    }

    /// `c * sym`; E(0), t^0 and zero coefficients give the zero element.
    pub fn term(c: Rational, sym: BasisSymbol) -> Self {
        let mut x = LieElement::zero();
        x.add_term(sym, c);
        x
    }

    pub fn sym(sym: BasisSymbol) -> Self {
        LieElement::term(Rational::one(), sym)
    }

    pub fn e(m: LatticeVector) -> Self {
        LieElement::sym(BasisSymbol::E(m))
    }

    pub fn t(m: LatticeVector) -> Self {
        LieElement::sym(BasisSymbol::T(m))
    }

    pub fn k(i: u8) -> Self {
        LieElement::sym(BasisSymbol::K(i))
    }

    pub fn d(i: u8) -> Self {
        LieElement::sym(BasisSymbol::D(i))
    }

    pub fn add_term(&mut self, sym: BasisSymbol, c: Rational) {
        assert!(
            matches!(sym, BasisSymbol::E(_) | BasisSymbol::T(_)) || sym.is_valid(),
            "invalid symbol {sym:?}"
        );
        if c.is_zero() || !sym.is_valid() {
            return;
        }
        let slot = self.terms.entry(sym).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&sym);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BasisSymbol, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, sym: &BasisSymbol) -> Rational {
        self.terms.get(sym).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = LieElement::zero();
        for (s, x) in &self.terms {
            out.add_term(*s, x * c);
        }
        out
    }

    pub fn add_scaled(&mut self, other: &LieElement, c: &Rational) {
        for (s, x) in &other.terms {
            self.add_term(*s, x * c);
        }
    }

    /// Coefficients of K1..K4.
    pub fn central_part(&self) -> [Rational; 4] {
        [1u8, 2, 3, 4].map(|i| self.coeff(&BasisSymbol::K(i)))
    }
}

impl From<BasisSymbol> for LieElement {
    fn from(s: BasisSymbol) -> Self {
        LieElement::sym(s)
    }
}

impl Add for &LieElement {
    type Output = LieElement;
    fn add(self, o: &LieElement) -> LieElement {
        let mut x = self.clone();
        x.add_scaled(o, &Rational::one());
        x
    }
}

impl Sub for &LieElement {
    type Output = LieElement;
    fn sub(self, o: &LieElement) -> LieElement {
        let mut x = self.clone();
        x.add_scaled(o, &-Rational::one());
        x
    }
}

impl Neg for &LieElement {
    type Output = LieElement;
    fn neg(self) -> LieElement {
        self.scale(&-Rational::one())
    }
}

impl Mul<&LieElement> for &Rational {
    type Output = LieElement;
    fn mul(self, x: &LieElement) -> LieElement {
        x.scale(self)
    }
}

impl fmt::Display for LieElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (s, c)) in self.terms.iter().enumerate() {
            match (k, c.is_negative()) {
                (0, _) => write!(f, "{c}*{s}")?,
                (_, true) => write!(f, " - {}*{s}", -c)?,
                (_, false) => write!(f, " + {c}*{s}")?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at position {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl FromStr for LieElement {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, ParseError> {
        Parser { src: s.as_bytes(), pos: 0 }.element()
    }
}

pub fn parse_element(s: &str) -> Result<LieElement, ParseError> {
    s.parse()
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { position: self.pos, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected '{}'", c as char))
        }
    }

    fn element(&mut self) -> Result<LieElement, ParseError> {
        let mut out = LieElement::zero();
        let mut first = true;
        loop {
            let mut sign = Rational::one();
            match self.peek() {
                None if first => return self.err("empty expression"),
                None => return Ok(out),
                Some(b'+') if !first => self.pos += 1,
                Some(b'-') => {
                    self.pos += 1;
                    sign = -sign;
                }
                Some(_) if first => {}
                Some(_) => return self.err("expected '+' or '-'"),
            }
            let (c, sym) = self.term()?;
            if let Some(sym) = sym {
                out.add_term(sym, sign * c);
            } else if !c.is_zero() {
                return self.err("bare scalar is not an element");
            }
            first = false;
        }
    }

    fn term(&mut self) -> Result<(Rational, Option<BasisSymbol>), ParseError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let c = self.rational()?;
                if self.peek() == Some(b'*') {
                    self.pos += 1;
                    let s = self.symbol()?;
                    Ok((c, Some(s)))
                } else {
                    Ok((c, None))
                }
            }
            Some(_) => Ok((Rational::one(), Some(self.symbol()?))),
            None => self.err("expected term"),
        }
    }

    fn digits(&mut self) -> Result<&str, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected digits");
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).expect("ascii"))
    }

    fn rational(&mut self) -> Result<Rational, ParseError> {
        let start = self.pos;
        let mut text = self.digits()?.to_string();
        if self.peek() == Some(b'/') {
            self.pos += 1;
            text.push('/');
            text.push_str(self.digits()?);
        }
        parse_rational(&text).map_err(|e| ParseError { position: start, message: e.to_string() })
    }

    fn integer(&mut self) -> Result<i64, ParseError> {
        let neg = if self.peek() == Some(b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let start = self.pos;
        let v: i64 = self
            .digits()?
            .parse()
            .map_err(|_| ParseError { position: start, message: "integer overflow".into() })?;
        Ok(if neg { -v } else { v })
    }

    fn symbol(&mut self) -> Result<BasisSymbol, ParseError> {
        let start = self.pos;
        match self.peek() {
            Some(b'E') | Some(b't') => {
                let is_e = self.src[self.pos] == b'E';
                self.pos += 1;
                self.expect(b'[')?;
                let m1 = self.integer()?;
                self.expect(b',')?;
                let m2 = self.integer()?;
                self.expect(b']')?;
                let m = lv(m1, m2);
                Ok(if is_e { BasisSymbol::E(m) } else { BasisSymbol::T(m) })
            }
            Some(b'K') | Some(b'd') => {
                let is_k = self.src[self.pos] == b'K';
                self.pos += 1;
                let i = self.src.get(self.pos).copied().unwrap_or(0);
                let max = if is_k { b'4' } else { b'2' };
                if !(b'1'..=max).contains(&i) {
                    self.pos = start;
                    return self.err("bad central or derivation index");
                }
                self.pos += 1;
                let i = i - b'0';
                Ok(if is_k { BasisSymbol::K(i) } else { BasisSymbol::D(i) })
            }
            _ => self.err("expected a basis symbol"),
        }
    }
}

/// h(m) = m1 K1 + m2 K2.
pub fn h_of(m: LatticeVector) -> LieElement {
    let mut x = LieElement::zero();
    x.add_term(BasisSymbol::K(1), int(m.m1));
    x.add_term(BasisSymbol::K(2), int(m.m2));
    x
}

/// f(m) = m1 K3 + m2 K4.
pub fn f_of(m: LatticeVector) -> LieElement {
    let mut x = LieElement::zero();
    x.add_term(BasisSymbol::K(3), int(m.m1));
    x.add_term(BasisSymbol::K(4), int(m.m2));
    x
}

/// Bracket of two basis symbols.
pub fn bracket_symbols(x: &BasisSymbol, y: &BasisSymbol) -> LieElement {
    use BasisSymbol::*;
    match (x, y) {
        (K(_), _) | (_, K(_)) | (D(_), D(_)) | (T(_), T(_)) => LieElement::zero(),
        (D(i), E(m)) => LieElement::term(int(component(*m, *i)), E(*m)),
        (D(i), T(m)) => LieElement::term(int(component(*m, *i)), T(*m)),
        (E(_), D(_)) | (T(_), D(_)) => -&bracket_symbols(y, x),
        (T(m), E(n)) | (E(m), T(n)) => {
            let mut out = LieElement::term(int(det2(*n, *m)), T(*m + *n));
            if (*m + *n).is_zero() {
                out.add_scaled(&h_of(*m), &Rational::one());
            }
            out
        }
        (E(m), E(n)) => {
            let mut out = LieElement::term(int(det2(*n, *m)), E(*m + *n));
            if (*m + *n).is_zero() {
                out.add_scaled(&f_of(*m), &Rational::one());
            }
            out
        }
    }
}

fn component(m: LatticeVector, i: u8) -> i64 {
    if i == 1 {
        m.m1
    } else {
        m.m2
    }
}

pub fn bracket(x: &LieElement, y: &LieElement) -> LieElement {
    let mut out = LieElement::zero();
    for (a, ca) in x.terms() {
        for (b, cb) in y.terms() {
            out.add_scaled(&bracket_symbols(a, b), &(ca * cb));
        }
    }
    out
}

pub type BracketFn = fn(&LieElement, &LieElement) -> LieElement;

/// [x,[y,z]] + [y,[z,x]] + [z,[x,y]] for a given bracket.
pub fn jacobi_defect_with(br: BracketFn, x: &LieElement, y: &LieElement, z: &LieElement) -> LieElement {
    let a = br(x, &br(y, z));
    let b = br(y, &br(z, x));
    let c = br(z, &br(x, y));
    &(&a + &b) + &c
}

pub fn jacobi_defect(x: &LieElement, y: &LieElement, z: &LieElement) -> LieElement {
    jacobi_defect_with(bracket, x, y, z)
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TriangularSplit {
    pub plus: LieElement,
    pub zero: LieElement,
    pub minus: LieElement,
}

/// Routes each E/t term by the sign of its b2-coordinate.
pub fn triangular_part(x: &LieElement, b: &BasisPair) -> TriangularSplit {
    let mut s = TriangularSplit::default();
    for (sym, c) in x.terms() {
        let part = match b.level(sym.degree()) {
            l if l > 0 => &mut s.plus,
            l if l < 0 => &mut s.minus,
            _ => &mut s.zero,
        };
        part.add_term(*sym, c.clone());
    }
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Subalgebra {
    /// <E(k b1), t^{k b1}, K_i>.
    HB1,
    /// <E(±k b1), f(b1)>.
    EB1,
    /// <t^{±k b1}>.
    TB1,
    /// The Virasoro-like subalgebra <E(m), K3, K4>.
    EScript,
    /// <E(k b1), t^{-k b1}, h(b1) | k > 0>.
    HeisenbergPlus,
    /// <E(-k b1), t^{k b1}, h(b1) | k > 0>.
    HeisenbergMinus,
}

impl FromStr for Subalgebra {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "H_b1" => Ok(Subalgebra::HB1),
            "E_b1" => Ok(Subalgebra::EB1),
            "t_b1" => Ok(Subalgebra::TB1),
            "E_script" => Ok(Subalgebra::EScript),
            "heisenberg_plus" => Ok(Subalgebra::HeisenbergPlus),
            "heisenberg_minus" => Ok(Subalgebra::HeisenbergMinus),
            _ => Err(format!("unknown subalgebra {s:?}")),
        }
    }
}

/// Membership of x in the span of the subalgebra's spanning set.
pub fn in_subalgebra(x: &LieElement, which: Subalgebra, b: &BasisPair) -> bool {
    let along_b1 = |m: &LatticeVector| b.level(*m) == 0;
    let k1 = |m: &LatticeVector| b.coords(*m).0;
    let mut central = [Rational::zero(), Rational::zero(), Rational::zero(), Rational::zero()];
    for (sym, c) in x.terms() {
        let ok = match (which, sym) {
            (_, BasisSymbol::D(_)) => false,
            (_, BasisSymbol::K(i)) => {
                central[(*i - 1) as usize] = c.clone();
                true
            }
            (Subalgebra::HB1, BasisSymbol::E(m) | BasisSymbol::T(m)) => along_b1(m),
            (Subalgebra::EB1, BasisSymbol::E(m)) => along_b1(m),
            (Subalgebra::TB1, BasisSymbol::T(m)) => along_b1(m),
            (Subalgebra::EScript, BasisSymbol::E(_)) => true,
            (Subalgebra::HeisenbergPlus, BasisSymbol::E(m)) => along_b1(m) && k1(m) > 0,
            (Subalgebra::HeisenbergPlus, BasisSymbol::T(m)) => along_b1(m) && k1(m) < 0,
            (Subalgebra::HeisenbergMinus, BasisSymbol::E(m)) => along_b1(m) && k1(m) < 0,
            (Subalgebra::HeisenbergMinus, BasisSymbol::T(m)) => along_b1(m) && k1(m) > 0,
            _ => false,
        };
        if !ok {
            return false;
        }
    }
    let zero = |i: usize| central[i].is_zero();
    let multiple_of = |p: &Rational, q: &Rational, v: LatticeVector| {
        // (p, q) proportional to (v.m1, v.m2)
        p * int(v.m2) == q * int(v.m1)
    };
    let b1 = b.b1();
    match which {
        Subalgebra::HB1 => true,
        Subalgebra::EScript => zero(0) && zero(1),
        Subalgebra::EB1 => zero(0) && zero(1) && multiple_of(&central[2], &central[3], b1),
        Subalgebra::TB1 => (0..4).all(zero),
        Subalgebra::HeisenbergPlus | Subalgebra::HeisenbergMinus => {
            zero(2) && zero(3) && multiple_of(&central[0], &central[1], b1)
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PbwError {
    #[error("symbol {0} is outside the ordered part (mixed triangular parts do not straighten)")]
    MixedParts(BasisSymbol),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PbwPart {
    /// L~_- : negative b2-coordinate.
    Lower,
    /// L~_+ : positive b2-coordinate.
    Upper,
    /// Creation half of H_{b1} for a one-sided module: degrees k b1 with sign -eps.
    Heisenberg { eps_plus: bool },
}

/// Total order on the generators of one nilpotent part.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PbwOrder {
    pub basis: BasisPair,
    pub part: PbwPart,
}

impl PbwOrder {
    pub fn lower(basis: BasisPair) -> Self {
        PbwOrder { basis, part: PbwPart::Lower }
    }

    pub fn upper(basis: BasisPair) -> Self {
        PbwOrder { basis, part: PbwPart::Upper }
    }

    pub fn heisenberg(basis: BasisPair, eps_plus: bool) -> Self {
        PbwOrder { basis, part: PbwPart::Heisenberg { eps_plus } }
    }

    pub fn admits(&self, s: &BasisSymbol) -> bool {
        let (BasisSymbol::E(m) | BasisSymbol::T(m)) = s else { return false };
        let (x1, x2) = self.basis.coords(*m);
        match self.part {
            PbwPart::Lower => x2 < 0,
            PbwPart::Upper => x2 > 0,
            PbwPart::Heisenberg { eps_plus } => x2 == 0 && if eps_plus { x1 < 0 } else { x1 > 0 },
        }
    }

    /// Sort key: distance from level zero, then b1-coordinate, then E before t.
    pub fn key(&self, s: &BasisSymbol) -> (i64, i64, u8) {
        let (m, kind) = match s {
            BasisSymbol::E(m) => (*m, 0),
            BasisSymbol::T(m) => (*m, 1),
            _ => (LatticeVector::ZERO, 2),
        };
        let (x1, x2) = self.basis.coords(m);
        match self.part {
            PbwPart::Lower | PbwPart::Upper => (x2.abs(), x1, kind),
            PbwPart::Heisenberg { .. } => (x1.abs(), 0, kind),
        }
    }

    pub fn le(&self, a: &BasisSymbol, b: &BasisSymbol) -> bool {
        self.key(a) <= self.key(b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SwapSchedule {
    LeftmostFirst,
    RightmostFirst,
}

pub type Monomial = Vec<BasisSymbol>;

pub fn pbw_normal_form(
    word: &[BasisSymbol],
    order: &PbwOrder,
) -> Result<BTreeMap<Monomial, Rational>, PbwError> {
    pbw_normal_form_scheduled(word, order, SwapSchedule::LeftmostFirst)
}

/// Straightens a word by swapping adjacent out-of-order factors,
/// `ab = ba + [a,b]`, until every monomial is sorted.
pub fn pbw_normal_form_scheduled(
    word: &[BasisSymbol],
    order: &PbwOrder,
    schedule: SwapSchedule,
) -> Result<BTreeMap<Monomial, Rational>, PbwError> {
    if let Some(bad) = word.iter().find(|s| !order.admits(s)) {
        return Err(PbwError::MixedParts(*bad));
    }
    let mut out: BTreeMap<Monomial, Rational> = BTreeMap::new();
    let mut work: Vec<(Monomial, Rational)> = vec![(word.to_vec(), Rational::one())];
    while let Some((w, c)) = work.pop() {
        let bad: Vec<usize> =
            (0..w.len().saturating_sub(1)).filter(|&i| !order.le(&w[i], &w[i + 1])).collect();
        let pick = match schedule {
            SwapSchedule::LeftmostFirst => bad.first(),
            SwapSchedule::RightmostFirst => bad.last(),
        };
        let Some(&i) = pick else {
            let slot = out.entry(w).or_insert_with(Rational::zero);
            *slot += c;
            continue;
        };
        let mut swapped = w.clone();
        swapped.swap(i, i + 1);
        work.push((swapped, c.clone()));
        for (z, cz) in bracket_symbols(&w[i], &w[i + 1]).terms() {
            if !order.admits(z) {
                return Err(PbwError::MixedParts(*z));
            }
            let mut shorter = w[..i].to_vec();
            shorter.push(*z);
            shorter.extend_from_slice(&w[i + 2..]);
            work.push((shorter, &c * cz));
        }
    }
    out.retain(|_, c| !c.is_zero());
    Ok(out)
}
