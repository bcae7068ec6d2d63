//! Concrete modules: Laurent modules T_ρ, Fock modules M^ε(a), Verma-type
//! modules V^ε(c), tensor modules T_ρ(t_b1) ⊗ M^ε(c1), extensions to L~_0,
//! induced modules and their irreducible quotients, V(ρ) and V(ρ) ⊗ C[t^±1].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::exactla::{serde_rational, serde_rational_vec, Rational};
use crate::exppoly::{central_values, ExpPolyError, RhoSpec};
use crate::gradmod::{
    combo_add, combo_single, generated_submodule, quotient_module, radical, ActionEngine, Combo, Directions,
    Label, ModuleError, Scope, SubmoduleSlice, TruncatedModule, Truncation,
};
use crate::hvr2::{bracket_symbols, BasisSymbol, PbwOrder, Subalgebra};
use crate::lattice::{BasisPair, LatticeVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Epsilon {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Epsilon {
    pub fn is_plus(self) -> bool {
        self == Epsilon::Plus
    }

    pub fn sign(self) -> i64 {
        if self.is_plus() {
            1
        } else {
            -1
        }
    }
}

/// The subalgebras a Laurent module can be taken over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LaurentAlg {
    #[serde(rename = "H_b1")]
    H,
    #[serde(rename = "E_b1")]
    E,
    #[serde(rename = "t_b1")]
    T,
}

impl LaurentAlg {
    fn uses(self) -> (bool, bool) {
        match self {
            LaurentAlg::H => (true, true),
            LaurentAlg::E => (true, false),
            LaurentAlg::T => (false, true),
        }
    }

    pub fn subalgebra(self) -> Subalgebra {
        match self {
            LaurentAlg::H => Subalgebra::HB1,
            LaurentAlg::E => Subalgebra::EB1,
            LaurentAlg::T => Subalgebra::TB1,
        }
    }
}

fn origin() -> (Rational, Rational) {
    (Rational::zero(), Rational::zero())
}

fn along_b1(b: BasisPair, e: bool, t: bool) -> Scope {
    let d = |on: bool| if on { Directions::AlongB1 } else { Directions::None };
    Scope { basis: b, e: d(e), t: d(t), derivations: false }
}

fn full_scope(b: BasisPair, derivations: bool) -> Scope {
    Scope { basis: b, e: Directions::All, t: Directions::All, derivations }
}

fn central_scalar(central: &[Rational; 4], i: u8, l: &Label) -> Combo {
    combo_single(l.clone(), central[(i - 1) as usize].clone())
}

/// One-dimensional module C v0 ; H_b1 acts through ρ when given.
struct VacuumEngine {
    basis: BasisPair,
    rho: Option<RhoSpec>,
    central: [Rational; 4],
}

impl ActionEngine for VacuumEngine {
    fn act(&self, sym: &BasisSymbol, label: &Label) -> Result<Combo, ModuleError> {
        match sym {
            BasisSymbol::K(i) => Ok(central_scalar(&self.central, *i, label)),
            BasisSymbol::E(m) | BasisSymbol::T(m) => {
                let (k, l) = self.basis.coords(*m);
                if l != 0 {
                    return Ok(Combo::new());
                }
                let v = match &self.rho {
                    None => Rational::zero(),
                    Some(r) if matches!(sym, BasisSymbol::E(_)) => r.e_value(k),
                    Some(r) => r.t_value(k),
                };
                Ok(combo_single(label.clone(), v))
            }
            BasisSymbol::D(_) => Ok(Combo::new()),
        }
    }
    fn offset(&self, _: &Label) -> LatticeVector {
        LatticeVector::ZERO
    }
    fn level(&self, _: &Label) -> i64 {
        0
    }
    fn raising(&self, _: i64, _: i64) -> Vec<BasisSymbol> {
        Vec::new()
    }
}

/// The one-dimensional module with every E/t acting by zero and K by `central`.
pub fn trivial_module(b: BasisPair, central: [Rational; 4], scope: Scope) -> TruncatedModule {
    let eng = Arc::new(VacuumEngine { basis: b, rho: None, central: central.clone() });
    TruncatedModule::new("trivial", eng, b, origin(), Truncation::new(0, 0), central, scope, vec![Label::Vacuum])
}

/// C v0 with x v0 = ρ(x) v0 for x in H_b1.
pub fn rho_line(rho: &RhoSpec, b: BasisPair) -> TruncatedModule {
    let central = central_values(&rho.level(&b), &b);
    let eng = Arc::new(VacuumEngine { basis: b, rho: Some(rho.clone()), central: central.clone() });
    TruncatedModule::new(
        "rho_line",
        eng,
        b,
        origin(),
        Truncation::new(0, 0),
        central,
        along_b1(b, true, true),
        vec![Label::Vacuum],
    )
}

struct LaurentEngine {
    basis: BasisPair,
    rho: RhoSpec,
}

impl ActionEngine for LaurentEngine {
    fn act(&self, sym: &BasisSymbol, label: &Label) -> Result<Combo, ModuleError> {
        let Label::Laurent(n) = label else {
            return Err(ModuleError::Precondition(format!("{label} is not a Laurent label")));
        };
        match sym {
            BasisSymbol::K(i) => {
                let c = central_values(&self.rho.level(&self.basis), &self.basis);
                Ok(central_scalar(&c, *i, label))
            }
            BasisSymbol::E(m) | BasisSymbol::T(m) => {
                let (k, l) = self.basis.coords(*m);
                if l != 0 {
                    return Err(ModuleError::UnknownGenerator {
                        symbol: sym.to_string(),
                        module: "laurent_T".into(),
                    });
                }
                let v = if matches!(sym, BasisSymbol::E(_)) { self.rho.e_value(k) } else { self.rho.t_value(k) };
                Ok(combo_single(Label::Laurent(n + k), v))
            }
            BasisSymbol::D(_) => Ok(Combo::new()),
        }
    }
    fn offset(&self, label: &Label) -> LatticeVector {
        match label {
            Label::Laurent(n) => self.basis.from_coords(*n, 0),
            _ => LatticeVector::ZERO,
        }
    }
    fn level(&self, _: &Label) -> i64 {
        0
    }
    fn raising(&self, _: i64, _: i64) -> Vec<BasisSymbol> {
        Vec::new()
    }
}

/// T with basis t^n, |n| <= N: E(k b1) t^n = ρ(E(k b1)) t^{n+k}, t^{k b1} t^n = ρ(t^{k b1}) t^{n+k}.
pub fn laurent_t(rho: &RhoSpec, alg: LaurentAlg, b: BasisPair, window: i64) -> Result<TruncatedModule, ModuleError> {
    rho.validate(&b)?;
    let (ue, ut) = alg.uses();
    let central = central_values(&rho.level(&b), &b);
    let eng = Arc::new(LaurentEngine { basis: b, rho: rho.clone() });
    let labels = (-window..=window).map(Label::Laurent).collect();
    Ok(TruncatedModule::new(
        "laurent_T",
        eng,
        b,
        origin(),
        Truncation::new(0, window),
        central,
        along_b1(b, ue, ut),
        labels,
    ))
}

/// Result of classifying T_ρ over one of H_b1, E_b1, t_b1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TClass {
    pub r: u64,
    pub irreducible: bool,
    pub support: Vec<i64>,
}

/// Membership in the additive monoid generated by `support`.
pub fn monoid_contains(support: &[i64], n: i64) -> bool {
    if n == 0 {
        return true;
    }
    let g = support.iter().fold(0i64, |g, k| g.gcd(k));
    if g == 0 || n % g != 0 {
        return false;
    }
    let pos = support.iter().any(|k| *k > 0);
    let neg = support.iter().any(|k| *k < 0);
    if pos && neg {
        return true;
    }
    if (n > 0) != pos {
        return false;
    }
    let target = (n / g).unsigned_abs() as usize;
    let steps: Vec<usize> = support.iter().map(|k| (k / g).unsigned_abs() as usize).collect();
    let mut reach = vec![false; target + 1];
    reach[0] = true;
    for i in 1..=target {
        reach[i] = steps.iter().any(|&s| s <= i && reach[i - s]);
    }
    reach[target]
}

/// r = gcd of the support of ρ; irreducible iff the generated monoid is the group rZ.
pub fn classify_t_rho(rho: &RhoSpec, alg: LaurentAlg, b: &BasisPair, window: i64) -> Result<TClass, ModuleError> {
    rho.validate(b)?;
    let (ue, ut) = alg.uses();
    let support = rho.support(ue, ut, window);
    let r = support.iter().fold(0i64, |g, k| g.gcd(k)).unsigned_abs();
    let pos = support.iter().any(|k| *k > 0);
    let neg = support.iter().any(|k| *k < 0);
    Ok(TClass { r, irreducible: support.is_empty() || (pos && neg), support })
}

/// T_{ρ,i}: the submodule generated by t^i, realized on the window labels it contains.
pub fn t_rho(rho: &RhoSpec, alg: LaurentAlg, b: BasisPair, window: i64, i: i64) -> Result<TruncatedModule, ModuleError> {
    let full = laurent_t(rho, alg, b, window)?;
    let (ue, ut) = alg.uses();
    let support = rho.support(ue, ut, 2 * window);
    Ok(full.restrict_labels("T_rho", |l| matches!(l, Label::Laurent(n) if monoid_contains(&support, n - i))))
}

/// Which E/t symbols lie in the creation, annihilation or neutral part.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Split {
    /// By the sign of the b2-coordinate: L~_-, L~_+, L~_0.
    Triangular,
    /// Inside H_b1: creation along -eps b1, annihilation along +eps b1.
    Heisenberg { eps_plus: bool, with_t: bool },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Grading {
    /// Weight offset = total degree.
    Full,
    /// Weight offset = level times b2 (modules over L without derivations).
    LevelOnly,
}

enum Role {
    Creation,
    Annihilation,
    Neutral,
    Central(u8),
}

/// Induced module U(g) ⊗ top, with basis sorted creation monomials applied to top labels.
pub struct InducedEngine {
    name: String,
    basis: BasisPair,
    split: Split,
    order: PbwOrder,
    grading: Grading,
    central: [Rational; 4],
    top: Arc<TruncatedModule>,
    memo_act: Mutex<HashMap<(BasisSymbol, Label), Arc<Combo>>>,
    memo_ins: Mutex<HashMap<(BasisSymbol, Label), Arc<Combo>>>,
}

impl InducedEngine {
    pub fn new(
        name: impl Into<String>,
        basis: BasisPair,
        split: Split,
        grading: Grading,
        central: [Rational; 4],
        top: Arc<TruncatedModule>,
    ) -> Self {
        let order = match split {
            Split::Triangular => PbwOrder::lower(basis),
            Split::Heisenberg { eps_plus, .. } => PbwOrder::heisenberg(basis, eps_plus),
        };
        InducedEngine {
            name: name.into(),
            basis,
            split,
            order,
            grading,
            central,
            top,
            memo_act: Mutex::new(HashMap::new()),
            memo_ins: Mutex::new(HashMap::new()),
        }
    }

    fn unknown(&self, sym: &BasisSymbol) -> ModuleError {
        ModuleError::UnknownGenerator { symbol: sym.to_string(), module: self.name.clone() }
    }

    fn role(&self, sym: &BasisSymbol) -> Result<Role, ModuleError> {
        let m = match sym {
            BasisSymbol::K(i) => return Ok(Role::Central(*i)),
            BasisSymbol::D(_) => return Err(self.unknown(sym)),
            BasisSymbol::E(m) | BasisSymbol::T(m) => *m,
        };
        let (x1, x2) = self.basis.coords(m);
        match self.split {
            Split::Triangular => Ok(match x2 {
                l if l < 0 => Role::Creation,
                l if l > 0 => Role::Annihilation,
                _ => Role::Neutral,
            }),
            Split::Heisenberg { eps_plus, with_t } => {
                if x2 != 0 || (!with_t && matches!(sym, BasisSymbol::T(_))) {
                    return Err(self.unknown(sym));
                }
                Ok(if (x1 < 0) == eps_plus { Role::Creation } else { Role::Annihilation })
            }
        }
    }

    fn split_label<'a>(&self, label: &'a Label) -> Result<(&'a [BasisSymbol], &'a Label), ModuleError> {
        match label {
            Label::Word(w, inner) => Ok((w.as_slice(), inner.as_ref())),
            _ => Err(ModuleError::Precondition(format!("{label} is not an induced-module label"))),
        }
    }

    fn insert(&self, y: &BasisSymbol, label: &Label) -> Result<Arc<Combo>, ModuleError> {
        let (w, inner) = self.split_label(label)?;
        if w.is_empty() || self.order.le(y, &w[0]) {
            let mut nw = Vec::with_capacity(w.len() + 1);
            nw.push(*y);
            nw.extend_from_slice(w);
            return Ok(Arc::new(combo_single(Label::word(nw, inner.clone()), Rational::one())));
        }
        let key = (*y, label.clone());
        if let Some(c) = self.memo_ins.lock().expect("memo lock").get(&key) {
            return Ok(c.clone());
        }
        let z = w[0];
        let rest = Label::word(w[1..].to_vec(), inner.clone());
        let mut out = Combo::new();
        for (l, c) in self.insert(y, &rest)?.iter() {
            for (l2, c2) in self.insert(&z, l)?.iter() {
                combo_add(&mut out, l2.clone(), c * c2);
            }
        }
        for (u, cu) in bracket_symbols(y, &z).terms() {
            for (l, c) in self.act_inner(u, &rest)?.iter() {
                combo_add(&mut out, l.clone(), cu * c);
            }
        }
        let out = Arc::new(out);
        self.memo_ins.lock().expect("memo lock").insert(key, out.clone());
        Ok(out)
    }

    fn act_inner(&self, sym: &BasisSymbol, label: &Label) -> Result<Arc<Combo>, ModuleError> {
        let role = self.role(sym)?;
        let (w, inner) = self.split_label(label)?;
        match role {
            Role::Central(i) => return Ok(Arc::new(central_scalar(&self.central, i, label))),
            Role::Creation => return self.insert(sym, label),
            _ => {}
        }
        if w.is_empty() {
            if let Role::Annihilation = role {
                return Ok(Arc::new(Combo::new()));
            }
            let mut out = Combo::new();
            for (l, c) in self.top.act_exact(sym, inner)? {
                combo_add(&mut out, Label::word(Vec::new(), l), c);
            }
            return Ok(Arc::new(out));
        }
        let key = (*sym, label.clone());
        if let Some(c) = self.memo_act.lock().expect("memo lock").get(&key) {
            return Ok(c.clone());
        }
        let y = w[0];
        let rest = Label::word(w[1..].to_vec(), inner.clone());
        let mut out = Combo::new();
        for (l, c) in self.act_inner(sym, &rest)?.iter() {
            for (l2, c2) in self.insert(&y, l)?.iter() {
                combo_add(&mut out, l2.clone(), c * c2);
            }
        }
        for (z, cz) in bracket_symbols(sym, &y).terms() {
            for (l, c) in self.act_inner(z, &rest)?.iter() {
                combo_add(&mut out, l.clone(), cz * c);
            }
        }
        let out = Arc::new(out);
        self.memo_act.lock().expect("memo lock").insert(key, out.clone());
        Ok(out)
    }
}

impl ActionEngine for InducedEngine {
    fn act(&self, sym: &BasisSymbol, label: &Label) -> Result<Combo, ModuleError> {
        Ok(self.act_inner(sym, label)?.as_ref().clone())
    }

    fn offset(&self, label: &Label) -> LatticeVector {
        let Label::Word(w, inner) = label else { return LatticeVector::ZERO };
        match self.grading {
            Grading::Full => w.iter().fold(self.top.engine().offset(inner), |acc, s| acc + s.degree()),
            Grading::LevelOnly => {
                let l: i64 = w.iter().map(|s| self.basis.level(s.degree())).sum();
                self.basis.from_coords(0, l)
            }
        }
    }

    fn weight_shift(&self, sym: &BasisSymbol) -> LatticeVector {
        match self.grading {
            Grading::Full => sym.degree(),
            Grading::LevelOnly => self.basis.from_coords(0, self.basis.level(sym.degree())),
        }
    }

    fn level(&self, label: &Label) -> i64 {
        let Label::Word(w, _) = label else { return 0 };
        match self.split {
            Split::Triangular => w.iter().map(|s| self.basis.level(s.degree())).sum(),
            Split::Heisenberg { .. } => -w.iter().map(|s| self.basis.coords(s.degree()).0.abs()).sum::<i64>(),
        }
    }

    fn raising(&self, gap: i64, bound: i64) -> Vec<BasisSymbol> {
        match self.split {
            Split::Triangular => (-bound..=bound)
                .flat_map(|s| {
                    let m = self.basis.from_coords(s, gap);
                    [BasisSymbol::E(m), BasisSymbol::T(m)]
                })
                .collect(),
            Split::Heisenberg { eps_plus, with_t } => {
                let m = self.basis.from_coords(if eps_plus { gap } else { -gap }, 0);
                let mut v = vec![BasisSymbol::E(m)];
                if with_t {
                    v.push(BasisSymbol::T(m));
                }
                v
            }
        }
    }

    fn clear_cache(&self) {
        self.memo_act.lock().expect("memo lock").clear();
        self.memo_ins.lock().expect("memo lock").clear();
        self.top.engine().clear_cache();
    }
}

/// All sorted words over `gens` (already in PBW order) with total weight <= budget.
fn sorted_words(gens: &[(BasisSymbol, i64)], budget: i64) -> Vec<Vec<BasisSymbol>> {
    fn rec(
        gens: &[(BasisSymbol, i64)],
        start: usize,
        budget: i64,
        cur: &mut Vec<BasisSymbol>,
        out: &mut Vec<Vec<BasisSymbol>>,
    ) {
        out.push(cur.clone());
        for i in start..gens.len() {
            let (g, c) = gens[i];
            if c <= budget {
                cur.push(g);
                rec(gens, i, budget - c, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(gens, 0, budget, &mut Vec::new(), &mut out);
    out
}

fn heisenberg_words(b: &BasisPair, eps: Epsilon, with_t: bool, depth: u32) -> Vec<Vec<BasisSymbol>> {
    let order = PbwOrder::heisenberg(*b, eps.is_plus());
    let mut gens = Vec::new();
    for k in 1..=depth as i64 {
        let m = b.from_coords(-eps.sign() * k, 0);
        gens.push((BasisSymbol::E(m), k));
        if with_t {
            gens.push((BasisSymbol::T(m), k));
        }
    }
    gens.sort_by_key(|(g, _)| order.key(g));
    sorted_words(&gens, depth as i64)
}

fn heisenberg_module(
    name: &str,
    eps: Epsilon,
    with_t: bool,
    central: [Rational; 4],
    b: BasisPair,
    depth: u32,
) -> TruncatedModule {
    let top = Arc::new(trivial_module(b, central.clone(), along_b1(b, false, false)));
    let eng = Arc::new(InducedEngine::new(
        name,
        b,
        Split::Heisenberg { eps_plus: eps.is_plus(), with_t },
        Grading::Full,
        central.clone(),
        top,
    ));
    let labels = heisenberg_words(&b, eps, with_t, depth).into_iter().map(|w| Label::word(w, Label::Vacuum)).collect();
    TruncatedModule::new(name, eng, b, origin(), Truncation::new(depth, 0), central, along_b1(b, true, with_t), labels)
}

/// Fock module M^ε(a) over E_b1 with f(b1) acting by a, to depth D.
pub fn fock(eps: Epsilon, a: &Rational, b: BasisPair, depth: u32) -> TruncatedModule {
    let central = central_values(&[a.clone(), Rational::zero(), Rational::zero(), Rational::zero()], &b);
    heisenberg_module("fock", eps, false, central, b, depth)
}

/// Verma-type module V^ε(c) over H_b1 built with the generic straightening engine.
pub fn verma_h_generic(c: &[Rational; 4], eps: Epsilon, b: BasisPair, depth: u32) -> TruncatedModule {
    heisenberg_module("verma_H", eps, true, central_values(c, &b), b, depth)
}

/// V^ε(c) using that the creation half of H_b1 is abelian: creation sorts,
/// annihilation acts as a derivation through the central pairings.
struct VermaEngine {
    basis: BasisPair,
    eps: Epsilon,
    central: [Rational; 4],
    order: PbwOrder,
}

impl ActionEngine for VermaEngine {
    fn act(&self, sym: &BasisSymbol, label: &Label) -> Result<Combo, ModuleError> {
        let Label::Word(w, inner) = label else {
            return Err(ModuleError::Precondition(format!("{label} is not a Verma label")));
        };
        let m = match sym {
            BasisSymbol::K(i) => return Ok(central_scalar(&self.central, *i, label)),
            BasisSymbol::D(_) => return Ok(Combo::new()),
            BasisSymbol::E(m) | BasisSymbol::T(m) => *m,
        };
        let (k, l) = self.basis.coords(m);
        if l != 0 {
            return Err(ModuleError::UnknownGenerator { symbol: sym.to_string(), module: "verma_H".into() });
        }
        let mut out = Combo::new();
        if k * self.eps.sign() < 0 {
            let mut nw = w.clone();
            let pos = nw.partition_point(|s| self.order.key(s) <= self.order.key(sym));
            nw.insert(pos, *sym);
            combo_add(&mut out, Label::word(nw, inner.as_ref().clone()), Rational::one());
            return Ok(out);
        }
        for (i, y) in w.iter().enumerate() {
            if y.degree() != -m {
                continue;
            }
            let br = bracket_symbols(sym, y);
            let mut s = Rational::zero();
            for (z, c) in br.terms() {
                if let BasisSymbol::K(j) = z {
                    s += c * &self.central[(*j - 1) as usize];
                }
            }
            if !s.is_zero() {
                let mut nw = w.clone();
                nw.remove(i);
                combo_add(&mut out, Label::word(nw, inner.as_ref().clone()), s);
            }
        }
        Ok(out)
    }
    fn offset(&self, label: &Label) -> LatticeVector {
        match label {
            Label::Word(w, _) => w.iter().fold(LatticeVector::ZERO, |a, s| a + s.degree()),
            _ => LatticeVector::ZERO,
        }
    }
    fn level(&self, label: &Label) -> i64 {
        match label {
            Label::Word(w, _) => -w.iter().map(|s| self.basis.coords(s.degree()).0.abs()).sum::<i64>(),
            _ => 0,
        }
    }
    fn raising(&self, gap: i64, _: i64) -> Vec<BasisSymbol> {
        let m = self.basis.from_coords(self.eps.sign() * gap, 0);
        vec![BasisSymbol::E(m), BasisSymbol::T(m)]
    }
}

/// Verma-type module V^ε(c) over H_b1: commuting monomials in E(-ε k b1), t^{-ε k b1}, k >= 1.
pub fn verma_h(c: &[Rational; 4], eps: Epsilon, b: BasisPair, depth: u32) -> TruncatedModule {
    let central = central_values(c, &b);
    let eng = Arc::new(VermaEngine { basis: b, eps, central: central.clone(), order: PbwOrder::heisenberg(b, eps.is_plus()) });
    let labels = heisenberg_words(&b, eps, true, depth).into_iter().map(|w| Label::word(w, Label::Vacuum)).collect();
    TruncatedModule::new("verma_H", eng, b, origin(), Truncation::new(depth, 0), central, along_b1(b, true, true), labels)
}

/// T_ρ(t_b1) ⊗ M^ε(c1): E's act on the Fock factor, t's shift the Laurent factor.
struct TensorEngine {
    basis: BasisPair,
    fock: Arc<TruncatedModule>,
    rho: RhoSpec,
    central: [Rational; 4],
}

impl ActionEngine for TensorEngine {
    fn act(&self, sym: &BasisSymbol, label: &Label) -> Result<Combo, ModuleError> {
        let Label::Shift(u, n) = label else {
            return Err(ModuleError::Precondition(format!("{label} is not a tensor label")));
        };
        match sym {
            BasisSymbol::K(i) => Ok(central_scalar(&self.central, *i, label)),
            BasisSymbol::D(_) => Ok(Combo::new()),
            BasisSymbol::E(_) => {
                let mut out = Combo::new();
                for (l, c) in self.fock.act_exact(sym, u)? {
                    combo_add(&mut out, Label::shift(l, *n), c);
                }
                Ok(out)
            }
            BasisSymbol::T(m) => {
                let (k, l) = self.basis.coords(*m);
                if l != 0 {
                    return Err(ModuleError::UnknownGenerator { symbol: sym.to_string(), module: "tensor_M_rho".into() });
                }
                Ok(combo_single(Label::shift(u.as_ref().clone(), n + k), self.rho.t_value(k)))
            }
        }
    }
    fn offset(&self, label: &Label) -> LatticeVector {
        match label {
            Label::Shift(u, n) => self.fock.engine().offset(u) + self.basis.from_coords(*n, 0),
            _ => LatticeVector::ZERO,
        }
    }
    fn level(&self, label: &Label) -> i64 {
        match label {
            Label::Shift(u, _) => self.fock.level(u),
            _ => 0,
        }
    }
    fn raising(&self, gap: i64, bound: i64) -> Vec<BasisSymbol> {
        self.fock.engine().raising(gap, bound)
    }
    fn clear_cache(&self) {
        self.fock.engine().clear_cache()
    }
}

/// T_ρ(t_b1) ⊗ M^ε(c1) with Laurent powers in T_{ρ,0} ∩ [-window, window].
pub fn tensor_m_rho(
    rho: &RhoSpec,
    eps: Epsilon,
    c1: &Rational,
    b: BasisPair,
    depth: u32,
    window: i64,
) -> Result<TruncatedModule, ModuleError> {
    if c1.is_zero() {
        return Err(ModuleError::CaseMismatch {
            case: "c1 != 0 and c2 = 0",
            detail: "tensor_M_rho needs c1 != 0; with c1 = 0 the module falls under another case".into(),
        });
    }
    if rho.has_e_values() {
        return Err(ExpPolyError::NotTOnly.into());
    }
    rho.validate(&b)?;
    let level = [c1.clone(), Rational::zero(), rho.f_b2(&b), rho.h_b2(&b)];
    let central = central_values(&level, &b);
    let f = Arc::new(fock(eps, c1, b, depth));
    let support = rho.support(false, true, 2 * window);
    let mut labels = Vec::new();
    for u in f.all_labels() {
        for n in -window..=window {
            if monoid_contains(&support, n) {
                labels.push(Label::shift(u.clone(), n));
            }
        }
    }
    let eng = Arc::new(TensorEngine { basis: b, fock: f, rho: rho.clone(), central: central.clone() });
    Ok(TruncatedModule::new(
        "tensor_M_rho",
        eng,
        b,
        origin(),
        Truncation::new(depth, window),
        central,
        along_b1(b, true, true),
        labels,
    ))
}

/// Adds diagonal d1, d2: the grade-j space gets eigenvalues λ + j b1.
pub fn extend_to_l0(h_mod: &TruncatedModule, lambda: (Rational, Rational), b: &BasisPair) -> Result<TruncatedModule, ModuleError> {
    if h_mod.basis() != b {
        return Err(ModuleError::Precondition(format!(
            "module is graded along {} but extension requested for {}",
            h_mod.basis(),
            b
        )));
    }
    if h_mod.offsets().iter().any(|o| b.level(*o) != 0) {
        return Err(ModuleError::Precondition("module is not graded along b1 only".into()));
    }
    Ok(h_mod.with_derivations(lambda))
}

/// PBW monomials in L~_- generators with levels -1..-D and b1-coordinates in [-N, N].
fn lower_words(b: &BasisPair, trunc: &Truncation) -> Vec<Vec<BasisSymbol>> {
    let order = PbwOrder::lower(*b);
    let n = trunc.window;
    let mut gens = Vec::new();
    for j in 1..=trunc.depth as i64 {
        for s in -n..=n {
            let m = b.from_coords(s, -j);
            gens.push((BasisSymbol::E(m), j));
            gens.push((BasisSymbol::T(m), j));
        }
    }
    gens.sort_by_key(|(g, _)| order.key(g));
    sorted_words(&gens, trunc.depth as i64)
}

/// Ind from L~_+ + L~_0 of `v0_mod`, with L~_+ killing it.
pub fn induce(b: BasisPair, v0_mod: Arc<TruncatedModule>, trunc: Truncation) -> Result<TruncatedModule, ModuleError> {
    if v0_mod.basis() != &b {
        return Err(ModuleError::Precondition("top module and induction use different bases".into()));
    }
    let words = lower_words(&b, &trunc);
    let mut labels = Vec::new();
    for w in &words {
        for u in v0_mod.all_labels() {
            labels.push(Label::word(w.clone(), u.clone()));
        }
    }
    let central = v0_mod.central().clone();
    let base = v0_mod.base().clone();
    let scope = full_scope(b, v0_mod.scope().derivations);
    let eng = Arc::new(InducedEngine::new("induced", b, Split::Triangular, Grading::Full, central.clone(), v0_mod));
    Ok(TruncatedModule::new("induced", eng, b, base, trunc, central, scope, labels))
}

/// Quotient by the radical.
pub fn irreducible_quotient(induced: Arc<TruncatedModule>) -> Result<TruncatedModule, ModuleError> {
    let rad = radical(&induced)?;
    let name = format!("{}/radical", induced.name());
    Ok(quotient_module(induced, rad, name))
}

/// V̄(ρ) = Ind from H_b1 + L~_+ of C v0 over L, graded by level.
pub fn highest_weight_v_rho_bar(rho: &RhoSpec, b: BasisPair, trunc: Truncation) -> Result<TruncatedModule, ModuleError> {
    rho.validate(&b)?;
    let top = Arc::new(rho_line(rho, b));
    let central = top.central().clone();
    let labels = lower_words(&b, &trunc).into_iter().map(|w| Label::word(w, Label::Vacuum)).collect();
    let eng = Arc::new(InducedEngine::new("V_rho_bar", b, Split::Triangular, Grading::LevelOnly, central.clone(), top));
    Ok(TruncatedModule::new("V_rho_bar", eng, b, origin(), trunc, central, full_scope(b, false), labels))
}

/// V(ρ): the irreducible quotient of V̄(ρ).
pub fn highest_weight_v_rho(rho: &RhoSpec, b: BasisPair, trunc: Truncation) -> Result<TruncatedModule, ModuleError> {
    irreducible_quotient(Arc::new(highest_weight_v_rho_bar(rho, b, trunc)?))
}

/// M(b1, b2, T_ρ) for the level-zero top T_{ρ,0} extended by λ.
pub fn m_t_rho(rho: &RhoSpec, b: BasisPair, trunc: Truncation, lambda: (Rational, Rational)) -> Result<TruncatedModule, ModuleError> {
    let top = extend_to_l0(&t_rho(rho, LaurentAlg::H, b, trunc.window, 0)?, lambda, &b)?;
    irreducible_quotient(Arc::new(induce(b, Arc::new(top), trunc)?))
}

/// M(b1, b2, V^ε(c, λ)) with top grades down to -`top_depth`.
pub fn m_verma(
    c: &[Rational; 4],
    eps: Epsilon,
    b: BasisPair,
    trunc: Truncation,
    top_depth: u32,
    lambda: (Rational, Rational),
) -> Result<TruncatedModule, ModuleError> {
    let induced = m_verma_induced(c, eps, b, trunc, top_depth, lambda)?;
    irreducible_quotient(Arc::new(induced))
}

/// The induced module before taking the quotient.
pub fn m_verma_induced(
    c: &[Rational; 4],
    eps: Epsilon,
    b: BasisPair,
    trunc: Truncation,
    top_depth: u32,
    lambda: (Rational, Rational),
) -> Result<TruncatedModule, ModuleError> {
    let top = extend_to_l0(&verma_h(c, eps, b, top_depth), lambda, &b)?;
    induce(b, Arc::new(top), trunc)
}

/// V(ρ) ⊗ C[t^±1]: E(m b1 + n b2) and t^{m b1 + n b2} raise the exponent by m.
struct HatEngine {
    basis: BasisPair,
    inner: Arc<TruncatedModule>,
}

impl ActionEngine for HatEngine {
    fn act(&self, sym: &BasisSymbol, label: &Label) -> Result<Combo, ModuleError> {
        let Label::Shift(u, k) = label else {
            return Err(ModuleError::Precondition(format!("{label} is not a tensor label")));
        };
        let s = match sym {
            BasisSymbol::E(m) | BasisSymbol::T(m) => self.basis.coords(*m).0,
            _ => 0,
        };
        let mut out = Combo::new();
        for (l, c) in self.inner.act_exact(sym, u)? {
            combo_add(&mut out, Label::shift(l, k + s), c);
        }
        Ok(out)
    }
    fn offset(&self, label: &Label) -> LatticeVector {
        match label {
            Label::Shift(u, k) => self.inner.engine().offset(u) + self.basis.from_coords(*k, 0),
            _ => LatticeVector::ZERO,
        }
    }
    fn level(&self, label: &Label) -> i64 {
        match label {
            Label::Shift(u, _) => self.inner.level(u),
            _ => 0,
        }
    }
    fn raising(&self, gap: i64, bound: i64) -> Vec<BasisSymbol> {
        self.inner.engine().raising(gap, bound)
    }
    fn clear_cache(&self) {
        self.inner.engine().clear_cache()
    }
}

/// V(ρ) ⊗ C[t^±1] with exponents in [-N, N]; d1, d2 act diagonally by the weight.
pub fn hat_v(rho: &RhoSpec, b: BasisPair, trunc: Truncation) -> Result<TruncatedModule, ModuleError> {
    let inner = Arc::new(highest_weight_v_rho(rho, b, trunc)?);
    hat_v_over(inner, trunc)
}

/// V ⊗ C[t^±1] over an already computed V(ρ).
pub fn hat_v_over(inner: Arc<TruncatedModule>, trunc: Truncation) -> Result<TruncatedModule, ModuleError> {
    let b = *inner.basis();
    let n = trunc.window;
    let mut labels = Vec::new();
    for u in inner.all_labels() {
        for k in -n..=n {
            labels.push(Label::shift(u.clone(), k));
        }
    }
    let central = inner.central().clone();
    let eng = Arc::new(HatEngine { basis: b, inner });
    Ok(TruncatedModule::new("hat_V", eng, b, origin(), trunc, central, full_scope(b, true), labels))
}

/// The top vector v0 of V(ρ), as a label.
pub fn v0_label() -> Label {
    Label::word(Vec::new(), Label::Vacuum)
}

/// W(i): the submodule of V(ρ) ⊗ C[t^±1] generated by v0 ⊗ t^i.
pub fn w_submodule(hat: &TruncatedModule, i: i64) -> Result<SubmoduleSlice, ModuleError> {
    let seed = hat.vec_from_label(&Label::shift(v0_label(), i))?;
    generated_submodule(hat, &[seed])
}

fn default_lambda() -> [Rational; 2] {
    [Rational::zero(), Rational::zero()]
}

fn default_alg() -> LaurentAlg {
    LaurentAlg::H
}

pub(crate) mod rational4 {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational; 4], s: S) -> Result<S::Ok, S::Error> {
        serde_rational_vec::serialize(v, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[Rational; 4], D::Error> {
        let v = serde_rational_vec::deserialize(d)?;
        v.try_into().map_err(|v: Vec<Rational>| serde::de::Error::custom(format!("expected 4 values, got {}", v.len())))
    }
}

pub(crate) mod rational2 {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational; 2], s: S) -> Result<S::Ok, S::Error> {
        serde_rational_vec::serialize(v, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[Rational; 2], D::Error> {
        let v = serde_rational_vec::deserialize(d)?;
        v.try_into().map_err(|v: Vec<Rational>| serde::de::Error::custom(format!("expected 2 values, got {}", v.len())))
    }
}

/// A named construction with its parameters, as read from run configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "construction", deny_unknown_fields)]
pub enum ConstructionDescriptor {
    #[serde(rename = "laurent_T")]
    LaurentT {
        rho: RhoSpec,
        #[serde(default = "default_alg")]
        alg: LaurentAlg,
        #[serde(default)]
        basis: BasisPair,
        truncation: Truncation,
    },
    #[serde(rename = "T_rho")]
    TRho {
        rho: RhoSpec,
        #[serde(default = "default_alg")]
        alg: LaurentAlg,
        #[serde(default)]
        i: i64,
        #[serde(default)]
        basis: BasisPair,
        truncation: Truncation,
    },
    #[serde(rename = "fock")]
    Fock {
        epsilon: Epsilon,
        #[serde(with = "serde_rational")]
        a: Rational,
        #[serde(default)]
        basis: BasisPair,
        truncation: Truncation,
        #[serde(default)]
        quotient: bool,
    },
    #[serde(rename = "verma_H")]
    VermaH {
        #[serde(with = "rational4")]
        c: [Rational; 4],
        epsilon: Epsilon,
        #[serde(default)]
        basis: BasisPair,
        truncation: Truncation,
        #[serde(default)]
        quotient: bool,
    },
    #[serde(rename = "tensor_M_rho")]
    TensorMRho {
        rho: RhoSpec,
        epsilon: Epsilon,
        #[serde(with = "serde_rational")]
        c1: Rational,
        #[serde(default)]
        basis: BasisPair,
        truncation: Truncation,
    },
    #[serde(rename = "M_T_rho")]
    MTRho {
        rho: RhoSpec,
        #[serde(default = "default_lambda", with = "rational2")]
        lambda: [Rational; 2],
        #[serde(default)]
        basis: BasisPair,
        truncation: Truncation,
    },
    #[serde(rename = "M_verma")]
    MVerma {
        #[serde(with = "rational4")]
        c: [Rational; 4],
        epsilon: Epsilon,
        #[serde(default = "default_lambda", with = "rational2")]
        lambda: [Rational; 2],
        #[serde(default)]
        top_depth: Option<u32>,
        #[serde(default)]
        basis: BasisPair,
        truncation: Truncation,
    },
    #[serde(rename = "highest_weight_V_rho")]
    HighestWeightVRho {
        rho: RhoSpec,
        #[serde(default)]
        basis: BasisPair,
        truncation: Truncation,
    },
    #[serde(rename = "hat_V")]
    HatV {
        rho: RhoSpec,
        #[serde(default)]
        basis: BasisPair,
        truncation: Truncation,
        #[serde(default)]
        i: Option<i64>,
    },
}

/// A built construction: the module and its per-weight dimensions.
pub struct Built {
    pub module: Arc<TruncatedModule>,
    pub dims: BTreeMap<LatticeVector, usize>,
}

impl ConstructionDescriptor {
    pub fn basis(&self) -> BasisPair {
        use ConstructionDescriptor::*;
        match self {
            LaurentT { basis, .. }
            | TRho { basis, .. }
            | Fock { basis, .. }
            | VermaH { basis, .. }
            | TensorMRho { basis, .. }
            | MTRho { basis, .. }
            | MVerma { basis, .. }
            | HighestWeightVRho { basis, .. }
            | HatV { basis, .. } => *basis,
        }
    }

    /// The module before passing to the irreducible quotient, for constructions defined as quotients.
    pub fn build_unreduced(&self) -> Result<Option<TruncatedModule>, ModuleError> {
        use ConstructionDescriptor::*;
        Ok(Some(match self {
            Fock { epsilon, a, basis, truncation, quotient: true } => fock(*epsilon, a, *basis, truncation.depth),
            VermaH { c, epsilon, basis, truncation, quotient: true } => verma_h(c, *epsilon, *basis, truncation.depth),
            MTRho { rho, lambda, basis, truncation } => {
                let top = t_rho(rho, LaurentAlg::H, *basis, truncation.window, 0)?;
                let top = extend_to_l0(&top, (lambda[0].clone(), lambda[1].clone()), basis)?;
                induce(*basis, Arc::new(top), *truncation)?
            }
            MVerma { c, epsilon, lambda, top_depth, basis, truncation } => m_verma_induced(
                c,
                *epsilon,
                *basis,
                *truncation,
                top_depth.unwrap_or(truncation.window as u32),
                (lambda[0].clone(), lambda[1].clone()),
            )?,
            HighestWeightVRho { rho, basis, truncation } => highest_weight_v_rho_bar(rho, *basis, *truncation)?,
            _ => return Ok(None),
        }))
    }

    pub fn build(&self) -> Result<Built, ModuleError> {
        use ConstructionDescriptor::*;
        let quotient_of = |m: TruncatedModule, q: bool| -> Result<TruncatedModule, ModuleError> {
            if q {
                irreducible_quotient(Arc::new(m))
            } else {
                Ok(m)
            }
        };
        let module = match self {
            LaurentT { rho, alg, basis, truncation } => laurent_t(rho, *alg, *basis, truncation.window)?,
            TRho { rho, alg, i, basis, truncation } => t_rho(rho, *alg, *basis, truncation.window, *i)?,
            Fock { epsilon, a, basis, truncation, quotient } => {
                quotient_of(fock(*epsilon, a, *basis, truncation.depth), *quotient)?
            }
            VermaH { c, epsilon, basis, truncation, quotient } => {
                quotient_of(verma_h(c, *epsilon, *basis, truncation.depth), *quotient)?
            }
            TensorMRho { rho, epsilon, c1, basis, truncation } => {
                tensor_m_rho(rho, *epsilon, c1, *basis, truncation.depth, truncation.window)?
            }
            MTRho { rho, lambda, basis, truncation } => {
                m_t_rho(rho, *basis, *truncation, (lambda[0].clone(), lambda[1].clone()))?
            }
            MVerma { c, epsilon, lambda, top_depth, basis, truncation } => m_verma(
                c,
                *epsilon,
                *basis,
                *truncation,
                top_depth.unwrap_or(truncation.window as u32),
                (lambda[0].clone(), lambda[1].clone()),
            )?,
            HighestWeightVRho { rho, basis, truncation } => highest_weight_v_rho(rho, *basis, *truncation)?,
            HatV { rho, basis, truncation, i } => {
                let hat = hat_v(rho, *basis, *truncation)?;
                if let Some(i) = i {
                    let w = w_submodule(&hat, *i)?;
                    let module = Arc::new(hat);
                    return Ok(Built { dims: w.dims(), module });
                }
                hat
            }
        };
        let dims = module.dims();
        Ok(Built { module: Arc::new(module), dims })
    }
}

/// Residues i in [0, r) indexing the W(i); {0} when r = 0.
pub fn residues(r: u64) -> Vec<i64> {
    (0..r.max(1) as i64).collect()
}

/// Grades present in a module, in its basis coordinates.
pub fn grade_set(m: &TruncatedModule) -> BTreeSet<(i64, i64)> {
    m.offsets().into_iter().map(|o| m.basis().coords(o)).collect()
}
