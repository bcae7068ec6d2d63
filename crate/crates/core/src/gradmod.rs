//! Truncated graded weight modules.
//!
//! A module is an [`ActionEngine`] (exact, unbounded action on basis labels)
//! plus a finite window of labels grouped by weight. Action matrices on the
//! window drop components that leave it; radicals are computed from the exact
//! action so that the window boundary never creates spurious radical vectors.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactla::{Echelon, LinalgError, Rational, SparseMatrix, SparseVector, Subspace};
use crate::exppoly::ExpPolyError;
use crate::hvr2::{BasisSymbol, LieElement};
use crate::lattice::{BasisPair, ConeMode, LatticeError, LatticeVector};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModuleError {
    #[error("unknown generator {symbol} for module {module}")]
    UnknownGenerator { symbol: String, module: String },
    #[error("case mismatch ({case}): {detail}")]
    CaseMismatch { case: &'static str, detail: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("label {0} is not in the truncation window")]
    NotInWindow(String),
    #[error(transparent)]
    Rho(#[from] ExpPolyError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Base point λ plus a lattice offset; equality is on the sum.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Weight {
    #[serde(with = "pair_serde")]
    pub base: (Rational, Rational),
    pub offset: LatticeVector,
}

mod pair_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &(Rational, Rational), s: S) -> Result<S::Ok, S::Error> {
        let v = [p.0.to_string(), p.1.to_string()];
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(Rational, Rational), D::Error> {
        use serde::de::Error;
        let v: [String; 2] = Deserialize::deserialize(d)?;
        let p = |s: &str| crate::exactla::parse_rational(s).map_err(D::Error::custom);
        Ok((p(&v[0])?, p(&v[1])?))
    }
}

impl Weight {
    pub fn new(base: (Rational, Rational), offset: LatticeVector) -> Self {
        Weight { base, offset }
    }

    pub fn value(&self) -> (Rational, Rational) {
        (
            &self.base.0 + Rational::from_integer(self.offset.m1.into()),
            &self.base.1 + Rational::from_integer(self.offset.m2.into()),
        )
    }
}

impl PartialEq for Weight {
    fn eq(&self, o: &Weight) -> bool {
        self.value() == o.value()
    }
}

impl Eq for Weight {}

impl std::hash::Hash for Weight {
    fn hash<H: std::hash::Hasher>(&self, h: &mut H) {
        self.value().hash(h)
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.value();
        write!(f, "({a}, {b})")
    }
}

/// Depth D (levels 0..-D), window N (b1-coordinates in [-N, N]),
/// raising bound S >= N for generators used in radical computations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Truncation {
    pub depth: u32,
    pub window: i64,
    pub raising_bound: i64,
}

#[derive(Deserialize)]
struct TruncationRaw {
    depth: u32,
    window: i64,
    raising_bound: Option<i64>,
}

impl<'de> Deserialize<'de> for Truncation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = TruncationRaw::deserialize(d)?;
        let s = r.raising_bound.unwrap_or(2 * r.window);
        Truncation::with_bound(r.depth, r.window, s).map_err(serde::de::Error::custom)
    }
}

impl Truncation {
    /// Default raising bound S = 2N.
    pub fn new(depth: u32, window: i64) -> Self {
        Truncation::with_bound(depth, window, 2 * window).expect("valid truncation")
    }

    pub fn with_bound(depth: u32, window: i64, raising_bound: i64) -> Result<Self, ModuleError> {
        if window < 0 || raising_bound < window {
            return Err(ModuleError::Precondition(format!(
                "truncation needs S >= N >= 0, got N = {window}, S = {raising_bound}"
            )));
        }
        Ok(Truncation { depth, window, raising_bound })
    }
}

/// Basis labels of the constructed modules.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    /// The generating vector of a one-dimensional top.
    Vacuum,
    /// t^n in a Laurent module.
    Laurent(i64),
    /// A sorted PBW monomial applied to a label of the top module.
    Word(Vec<BasisSymbol>, Box<Label>),
    /// label ⊗ t^k.
    Shift(Box<Label>, i64),
}

impl Label {
    pub fn word(w: Vec<BasisSymbol>, inner: Label) -> Label {
        Label::Word(w, Box::new(inner))
    }

    pub fn shift(inner: Label, k: i64) -> Label {
        Label::Shift(Box::new(inner), k)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Vacuum => write!(f, "v0"),
            Label::Laurent(n) => write!(f, "t^{n}"),
            Label::Word(w, inner) => {
                for s in w {
                    write!(f, "{s}")?;
                }
                if !w.is_empty() {
                    write!(f, ".")?;
                }
                write!(f, "{inner}")
            }
            Label::Shift(inner, k) => write!(f, "{inner}(x)t^{k}"),
        }
    }
}

/// A finite combination of labels.
pub type Combo = BTreeMap<Label, Rational>;

pub fn combo_add(c: &mut Combo, l: Label, x: Rational) {
    if x.is_zero() {
        return;
    }
    match c.get_mut(&l) {
        Some(v) => {
            *v += x;
            if v.is_zero() {
                c.remove(&l);
            }
        }
        None => {
            c.insert(l, x);
        }
    }
}

pub fn combo_single(l: Label, x: Rational) -> Combo {
    let mut c = Combo::new();
    combo_add(&mut c, l, x);
    c
}

/// Which E/t directions act on a module.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Directions {
    None,
    AlongB1,
    All,
}

/// The generators accepted by a module; K's always act by their declared values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Scope {
    pub basis: BasisPair,
    pub e: Directions,
    pub t: Directions,
    pub derivations: bool,
}

impl Scope {
    pub fn accepts(&self, s: &BasisSymbol) -> bool {
        let dir_ok = |d: Directions, m: &LatticeVector| match d {
            Directions::None => false,
            Directions::AlongB1 => self.basis.level(*m) == 0,
            Directions::All => true,
        };
        match s {
            BasisSymbol::E(m) => dir_ok(self.e, m),
            BasisSymbol::T(m) => dir_ok(self.t, m),
            BasisSymbol::K(_) => true,
            BasisSymbol::D(_) => self.derivations,
        }
    }

    pub fn has_b2_direction(&self) -> bool {
        self.e == Directions::All && self.t == Directions::All
    }
}

/// Exact action on basis labels. Implementations handle E, t and K symbols;
/// derivations are diagonal and handled by [`TruncatedModule`].
pub trait ActionEngine: Send + Sync {
    fn act(&self, sym: &BasisSymbol, label: &Label) -> Result<Combo, ModuleError>;
    /// Weight offset of a label.
    fn offset(&self, label: &Label) -> LatticeVector;
    /// Weight offset change caused by a symbol.
    fn weight_shift(&self, sym: &BasisSymbol) -> LatticeVector {
        sym.degree()
    }
    /// Generation level: 0 on the top, negative below.
    fn level(&self, label: &Label) -> i64;
    /// Raising generators moving up by `gap` levels, with b1-coordinates bounded by `bound`.
    fn raising(&self, gap: i64, bound: i64) -> Vec<BasisSymbol>;
    /// Drops memoized data.
    fn clear_cache(&self) {}
    /// True when `act` discards components that fall outside the window.
    fn drops(&self, _sym: &BasisSymbol, _label: &Label) -> Result<bool, ModuleError> {
        Ok(false)
    }
}

/// A vector of a truncated module: per-weight local coordinates.
pub type ModVec = BTreeMap<LatticeVector, SparseVector>;

pub struct TruncatedModule {
    name: String,
    engine: Arc<dyn ActionEngine>,
    basis: BasisPair,
    base: (Rational, Rational),
    truncation: Truncation,
    central: [Rational; 4],
    scope: Scope,
    labels: BTreeMap<LatticeVector, Vec<Label>>,
    index: HashMap<Label, (LatticeVector, usize)>,
    cache: Mutex<HashMap<(BasisSymbol, LatticeVector), Arc<SparseMatrix>>>,
}

impl fmt::Debug for TruncatedModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TruncatedModule")
            .field("name", &self.name)
            .field("weights", &self.labels.len())
            .field("dim", &self.total_dim())
            .finish()
    }
}

impl TruncatedModule {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        engine: Arc<dyn ActionEngine>,
        basis: BasisPair,
        base: (Rational, Rational),
        truncation: Truncation,
        central: [Rational; 4],
        scope: Scope,
        window_labels: Vec<Label>,
    ) -> Self {
        let mut labels: BTreeMap<LatticeVector, Vec<Label>> = BTreeMap::new();
        for l in window_labels {
            labels.entry(engine.offset(&l)).or_default().push(l);
        }
        let mut index = HashMap::new();
        for (w, ls) in labels.iter_mut() {
            ls.sort();
            ls.dedup();
            for (i, l) in ls.iter().enumerate() {
                index.insert(l.clone(), (*w, i));
            }
        }
        TruncatedModule {
            name: name.into(),
            engine,
            basis,
            base,
            truncation,
            central,
            scope,
            labels,
            index,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn engine(&self) -> &Arc<dyn ActionEngine> {
        &self.engine
    }

    pub fn basis(&self) -> &BasisPair {
        &self.basis
    }

    pub fn base(&self) -> &(Rational, Rational) {
        &self.base
    }

    pub fn truncation(&self) -> &Truncation {
        &self.truncation
    }

    pub fn central(&self) -> &[Rational; 4] {
        &self.central
    }

    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    /// Same engine and window with a new base point and diagonal derivations.
    pub fn with_derivations(&self, base: (Rational, Rational)) -> TruncatedModule {
        let mut scope = self.scope;
        scope.derivations = true;
        let labels = self.labels.values().flatten().cloned().collect();
        TruncatedModule::new(
            self.name.clone(),
            self.engine.clone(),
            self.basis,
            base,
            self.truncation,
            self.central.clone(),
            scope,
            labels,
        )
    }

    /// Same engine, window restricted to labels satisfying `keep`.
    /// Valid when the kept labels span a submodule.
    pub fn restrict_labels(&self, name: impl Into<String>, keep: impl Fn(&Label) -> bool) -> TruncatedModule {
        let labels = self.labels.values().flatten().filter(|l| keep(l)).cloned().collect();
        TruncatedModule::new(
            name,
            self.engine.clone(),
            self.basis,
            self.base.clone(),
            self.truncation,
            self.central.clone(),
            self.scope,
            labels,
        )
    }

    pub fn offsets(&self) -> Vec<LatticeVector> {
        self.labels.keys().copied().collect()
    }

    pub fn weight(&self, offset: LatticeVector) -> Weight {
        Weight::new(self.base.clone(), offset)
    }

    pub fn weights(&self) -> Vec<Weight> {
        self.offsets().into_iter().map(|o| self.weight(o)).collect()
    }

    pub fn labels_at(&self, offset: LatticeVector) -> &[Label] {
        self.labels.get(&offset).map_or(&[], |v| v.as_slice())
    }

    pub fn all_labels(&self) -> impl Iterator<Item = &Label> {
        self.labels.values().flatten()
    }

    pub fn dim_at(&self, offset: LatticeVector) -> usize {
        self.labels_at(offset).len()
    }

    pub fn total_dim(&self) -> usize {
        self.labels.values().map(|v| v.len()).sum()
    }

    pub fn locate(&self, l: &Label) -> Option<(LatticeVector, usize)> {
        self.index.get(l).copied()
    }

    pub fn level(&self, l: &Label) -> i64 {
        self.engine.level(l)
    }

    pub fn level_of_offset(&self, offset: LatticeVector) -> Option<i64> {
        self.labels_at(offset).first().map(|l| self.engine.level(l))
    }

    /// Dimensions per weight of the whole window.
    pub fn dims(&self) -> BTreeMap<LatticeVector, usize> {
        self.labels.iter().map(|(w, v)| (*w, v.len())).collect()
    }

    /// Exact action on a label; output may leave the window.
    pub fn act_exact(&self, sym: &BasisSymbol, l: &Label) -> Result<Combo, ModuleError> {
        if !self.scope.accepts(sym) {
            return Err(ModuleError::UnknownGenerator { symbol: sym.to_string(), module: self.name.clone() });
        }
        match sym {
            BasisSymbol::K(i) => Ok(combo_single(l.clone(), self.central[(*i - 1) as usize].clone())),
            BasisSymbol::D(i) => {
                let w = self.weight(self.engine.offset(l)).value();
                let v = if *i == 1 { w.0 } else { w.1 };
                Ok(combo_single(l.clone(), v))
            }
            _ => self.engine.act(sym, l),
        }
    }

    pub fn act_exact_combo(&self, sym: &BasisSymbol, c: &Combo) -> Result<Combo, ModuleError> {
        let mut out = Combo::new();
        for (l, x) in c {
            for (l2, y) in self.act_exact(sym, l)? {
                combo_add(&mut out, l2, x * y);
            }
        }
        Ok(out)
    }

    pub fn vec_from_label(&self, l: &Label) -> Result<ModVec, ModuleError> {
        let (w, i) = self.locate(l).ok_or_else(|| ModuleError::NotInWindow(l.to_string()))?;
        let mut v = ModVec::new();
        v.insert(w, SparseVector::unit(self.dim_at(w), i));
        Ok(v)
    }

    /// In-window part of a combination, and whether anything was dropped.
    pub fn vec_from_combo(&self, c: &Combo) -> (ModVec, bool) {
        let mut parts: BTreeMap<LatticeVector, Vec<(usize, Rational)>> = BTreeMap::new();
        let mut dropped = false;
        for (l, x) in c {
            match self.locate(l) {
                Some((w, i)) => parts.entry(w).or_default().push((i, x.clone())),
                None => dropped = true,
            }
        }
        let v = parts
            .into_iter()
            .map(|(w, e)| (w, SparseVector::from_entries(self.dim_at(w), e)))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        (v, dropped)
    }

    pub fn combo_from_vec(&self, v: &ModVec) -> Combo {
        let mut c = Combo::new();
        for (w, sv) in v {
            let ls = self.labels_at(*w);
            for (i, x) in sv.entries() {
                combo_add(&mut c, ls[*i].clone(), x.clone());
            }
        }
        c
    }

    /// Matrix of `sym` from the weight space at `offset` to its target weight space.
    pub fn action_matrix(&self, sym: &BasisSymbol, offset: LatticeVector) -> Result<Arc<SparseMatrix>, ModuleError> {
        if let Some(m) = self.cache.lock().expect("cache lock").get(&(*sym, offset)) {
            return Ok(m.clone());
        }
        let target = offset + self.shift_of(sym);
        let src = self.labels_at(offset);
        let rows = self.dim_at(target);
        let mut trip = Vec::new();
        for (j, l) in src.iter().enumerate() {
            for (l2, x) in self.act_exact(sym, l)? {
                if let Some((w2, i)) = self.locate(&l2) {
                    debug_assert_eq!(w2, target, "action must respect the grading");
                    trip.push((i, j, x));
                }
            }
        }
        let m = Arc::new(SparseMatrix::from_triplets(rows, src.len(), trip));
        self.cache.lock().expect("cache lock").insert((*sym, offset), m.clone());
        Ok(m)
    }

    pub fn shift_of(&self, sym: &BasisSymbol) -> LatticeVector {
        match sym {
            BasisSymbol::K(_) | BasisSymbol::D(_) => LatticeVector::ZERO,
            _ => self.engine.weight_shift(sym),
        }
    }

    /// Lossy action of a symbol on a window vector.
    pub fn act_symbol(&self, sym: &BasisSymbol, v: &ModVec) -> Result<ModVec, ModuleError> {
        let mut out = ModVec::new();
        let sh = self.shift_of(sym);
        for (w, sv) in v {
            let target = *w + sh;
            if !self.labels.contains_key(&target) {
                let _ = self.action_matrix(sym, *w)?;
                continue;
            }
            let m = self.action_matrix(sym, *w)?;
            let img = m.mul_vec(sv)?;
            if img.is_zero() {
                continue;
            }
            let slot = out.entry(target).or_insert_with(|| SparseVector::zero(img.dim()));
            *slot = slot.add(&img);
        }
        out.retain(|_, v| !v.is_zero());
        Ok(out)
    }

    /// Lossy action of an element: components leaving the window are dropped.
    pub fn act(&self, x: &LieElement, v: &ModVec) -> Result<ModVec, ModuleError> {
        let mut out = ModVec::new();
        for (s, c) in x.terms() {
            for (w, sv) in self.act_symbol(s, v)? {
                let slot = out.entry(w).or_insert_with(|| SparseVector::zero(sv.dim()));
                *slot = slot.add_scaled(&sv, c);
            }
        }
        out.retain(|_, v| !v.is_zero());
        Ok(out)
    }

    /// Level-0 labels, or the label at offset zero when every label is at level 0.
    pub fn top_seeds(&self) -> Vec<Label> {
        let deeper = self.all_labels().any(|l| self.level(l) < 0);
        if deeper {
            self.all_labels().filter(|l| self.level(l) == 0).cloned().collect()
        } else {
            self.labels_at(LatticeVector::ZERO).to_vec()
        }
    }

    /// E/t symbols acting on the module with window-bounded bidegrees.
    pub fn retained_generators(&self) -> Vec<BasisSymbol> {
        let s = self.truncation.raising_bound.max(self.truncation.depth as i64);
        let d = self.truncation.depth as i64 + 1;
        let mut out = Vec::new();
        for j in -d..=d {
            for i in -s..=s {
                let m = self.basis.from_coords(i, j);
                if m.is_zero() {
                    continue;
                }
                for sym in [BasisSymbol::E(m), BasisSymbol::T(m)] {
                    if self.scope.accepts(&sym) {
                        out.push(sym);
                    }
                }
            }
        }
        out
    }
}

/// A subspace of each retained weight space.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SubmoduleSlice {
    pub spaces: BTreeMap<LatticeVector, Subspace>,
}

impl SubmoduleSlice {
    pub fn zero(m: &TruncatedModule) -> Self {
        let spaces = m.offsets().into_iter().map(|w| (w, Subspace::zero(m.dim_at(w)))).collect();
        SubmoduleSlice { spaces }
    }

    pub fn full(m: &TruncatedModule) -> Self {
        let spaces = m.offsets().into_iter().map(|w| (w, Subspace::full(m.dim_at(w)))).collect();
        SubmoduleSlice { spaces }
    }

    pub fn dim_at(&self, w: LatticeVector) -> usize {
        self.spaces.get(&w).map_or(0, |s| s.dim())
    }

    pub fn dims(&self) -> BTreeMap<LatticeVector, usize> {
        self.spaces.iter().map(|(w, s)| (*w, s.dim())).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.spaces.values().map(|s| s.dim()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.total_dim() == 0
    }

    pub fn contains(&self, v: &ModVec) -> Result<bool, ModuleError> {
        for (w, sv) in v {
            match self.spaces.get(w) {
                Some(s) => {
                    if !s.contains(sv)? {
                        return Ok(false);
                    }
                }
                None => {
                    if !sv.is_zero() {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    pub fn intersect(&self, other: &SubmoduleSlice) -> Result<SubmoduleSlice, ModuleError> {
        let mut spaces = BTreeMap::new();
        for (w, a) in &self.spaces {
            let s = match other.spaces.get(w) {
                Some(b) => a.intersect(b)?,
                None => Subspace::zero(a.ambient()),
            };
            spaces.insert(*w, s);
        }
        Ok(SubmoduleSlice { spaces })
    }

    pub fn sum(&self, other: &SubmoduleSlice) -> Result<SubmoduleSlice, ModuleError> {
        let mut spaces = self.spaces.clone();
        for (w, b) in &other.spaces {
            let s = match spaces.get(w) {
                Some(a) => a.sum(b)?,
                None => b.clone(),
            };
            spaces.insert(*w, s);
        }
        Ok(SubmoduleSlice { spaces })
    }
}

/// Smallest slice containing the seeds and closed under all retained generators.
pub fn generated_submodule(m: &TruncatedModule, seeds: &[ModVec]) -> Result<SubmoduleSlice, ModuleError> {
    let gens = m.retained_generators();
    let mut ech: BTreeMap<LatticeVector, Echelon> =
        m.offsets().into_iter().map(|w| (w, Echelon::new(m.dim_at(w)))).collect();
    let mut queue: Vec<(LatticeVector, SparseVector)> = Vec::new();
    let push = |ech: &mut BTreeMap<LatticeVector, Echelon>,
                    queue: &mut Vec<(LatticeVector, SparseVector)>,
                    w: LatticeVector,
                    v: SparseVector| {
        if let Some(e) = ech.get_mut(&w) {
            let r = e.reduce(&v);
            if !r.is_zero() {
                e.insert(r.clone());
                queue.push((w, r));
            }
        }
    };
    for s in seeds {
        for (w, v) in s {
            push(&mut ech, &mut queue, *w, v.clone());
        }
    }
    while let Some((w, v)) = queue.pop() {
        let single: ModVec = std::iter::once((w, v)).collect();
        for g in &gens {
            for (w2, img) in m.act_symbol(g, &single)? {
                push(&mut ech, &mut queue, w2, img);
            }
        }
    }
    Ok(SubmoduleSlice { spaces: ech.into_iter().map(|(w, e)| (w, Subspace::from_echelon(e))).collect() })
}

/// Output of the radical recursion.
#[derive(Clone, Debug, Default)]
pub struct RadicalData {
    /// Quotient dimension per retained weight.
    pub quotient_dims: BTreeMap<LatticeVector, usize>,
    /// Radical slice, when requested.
    pub slice: Option<SubmoduleSlice>,
}

/// The maximal graded submodule meeting level 0 trivially, within the window.
///
/// A vector at level l lies in the radical iff every raising generator g
/// (gap j in [1, -l], |b1-coordinate| <= S) maps it into the radical at level
/// l + j. This is evaluated through functionals Φ_l whose kernels are the
/// radical: Φ_0 is the identity on top labels and Φ_l(v) = (Φ'_{l+j}(g v))_g,
/// where Φ' is Φ restricted to pivot coordinates of its image, which is
/// injective on every vector that deeper levels feed into it.
pub fn radical(m: &TruncatedModule) -> Result<SubmoduleSlice, ModuleError> {
    Ok(radical_data(m, true)?.slice.expect("slice requested"))
}

/// Quotient dimensions without materializing the radical.
pub fn quotient_dims_by_rank(m: &TruncatedModule) -> Result<BTreeMap<LatticeVector, usize>, ModuleError> {
    Ok(radical_data(m, false)?.quotient_dims)
}

pub fn radical_data(m: &TruncatedModule, want_slice: bool) -> Result<RadicalData, ModuleError> {
    let eng = m.engine();
    let s_bound = m.truncation().raising_bound;
    let mut window_by_level: BTreeMap<i64, BTreeMap<LatticeVector, Vec<Label>>> = BTreeMap::new();
    for w in m.offsets() {
        for l in m.labels_at(w) {
            window_by_level.entry(m.level(l)).or_default().entry(w).or_default().push(l.clone());
        }
    }
    let deepest = window_by_level.keys().next().copied().unwrap_or(0).min(0);
    let raising: Vec<Vec<BasisSymbol>> = (1..=-deepest).map(|j| eng.raising(j, s_bound)).collect();

    // labels at each negative level whose Φ' is needed
    let mut reach: BTreeMap<i64, BTreeSet<Label>> = BTreeMap::new();
    for (l, ws) in &window_by_level {
        if *l < 0 {
            reach.entry(*l).or_default().extend(ws.values().flatten().cloned());
        }
    }
    for lvl in deepest..0 {
        let xs: Vec<Label> = reach.get(&lvl).map(|s| s.iter().cloned().collect()).unwrap_or_default();
        for x in &xs {
            for j in 1..-lvl {
                for g in &raising[(j - 1) as usize] {
                    for y in eng.act(g, x)?.into_keys() {
                        reach.entry(lvl + j).or_default().insert(y);
                    }
                }
            }
        }
    }

    let mut quotient_dims = BTreeMap::new();
    let mut slices: BTreeMap<LatticeVector, Subspace> = BTreeMap::new();
    for (l, ws) in &window_by_level {
        if *l == 0 {
            for (w, v) in ws {
                quotient_dims.insert(*w, v.len());
                slices.insert(*w, Subspace::zero(v.len()));
            }
        }
    }

    let mut top_ids: HashMap<Label, usize> = HashMap::new();
    let mut phi: HashMap<Label, Vec<(usize, Rational)>> = HashMap::new();
    let gid_base: Vec<usize> = {
        let mut acc = 0;
        raising
            .iter()
            .map(|r| {
                let b = acc;
                acc += r.len();
                b
            })
            .collect()
    };

    for lvl in (deepest..0).rev() {
        let Some(xs) = reach.get(&lvl) else { continue };
        let need_phi = lvl > deepest;
        let mut groups: BTreeMap<LatticeVector, (Vec<Label>, Vec<Label>)> = BTreeMap::new();
        let window = window_by_level.get(&lvl);
        if let Some(ws) = window {
            for (w, v) in ws {
                groups.entry(*w).or_default().0 = v.clone();
            }
        }
        if need_phi {
            for x in xs {
                let w = eng.offset(x);
                if m.locate(x).is_none() {
                    groups.entry(w).or_default().1.push(x.clone());
                }
            }
        }
        for (w, (win, extra)) in groups {
            let mut keys: BTreeMap<(usize, usize), usize> = BTreeMap::new();
            let mut raws: Vec<BTreeMap<(usize, usize), Rational>> = Vec::new();
            for x in win.iter().chain(extra.iter()) {
                let mut raw: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
                for (jj, gens) in raising.iter().enumerate() {
                    let j = jj as i64 + 1;
                    if j > -lvl {
                        break;
                    }
                    for (gi, g) in gens.iter().enumerate() {
                        let gid = gid_base[jj] + gi;
                        for (y, c) in eng.act(g, x)? {
                            if lvl + j == 0 {
                                let n = top_ids.len();
                                let id = *top_ids.entry(y).or_insert(n);
                                add_raw(&mut raw, (gid, id), c);
                            } else {
                                let p = phi.get(&y).ok_or_else(|| {
                                    ModuleError::Precondition(format!("missing functional for {y}"))
                                })?;
                                for (k, v) in p {
                                    add_raw(&mut raw, (gid, *k), &c * v);
                                }
                            }
                        }
                    }
                }
                for k in raw.keys() {
                    let n = keys.len();
                    keys.entry(*k).or_insert(n);
                }
                raws.push(raw);
            }
            // deterministic coordinate order
            let mut sorted: Vec<(usize, usize)> = keys.keys().copied().collect();
            sorted.sort();
            let pos: HashMap<(usize, usize), usize> = sorted.iter().enumerate().map(|(i, k)| (*k, i)).collect();
            let nk = sorted.len();
            let track = if want_slice { win.len() } else { 0 };
            let mut ech = Echelon::new(nk + track);
            let mut rank = 0;
            let mut kernel = Vec::new();
            for (i, raw) in raws.iter().enumerate() {
                let mut entries: Vec<(usize, Rational)> = raw.iter().map(|(k, v)| (pos[k], v.clone())).collect();
                entries.sort_by_key(|e| e.0);
                let is_win = i < win.len();
                if is_win && want_slice {
                    entries.push((nk + i, Rational::one()));
                }
                let v = SparseVector::from_entries(nk + track, entries);
                let r = ech.reduce(&v);
                match r.leading() {
                    Some(p) if p < nk => {
                        ech.insert(r);
                        if is_win {
                            rank += 1;
                        }
                    }
                    Some(_) => kernel.push(SparseVector::from_entries(
                        win.len(),
                        r.entries().iter().map(|(k, x)| (k - nk, x.clone())),
                    )),
                    None => {}
                }
            }
            if !win.is_empty() {
                quotient_dims.insert(w, rank);
                if want_slice {
                    slices.insert(w, Subspace::span(win.len(), &kernel)?);
                }
            }
            if need_phi {
                let pivots: Vec<usize> = ech.pivots().into_iter().filter(|p| *p < nk).collect();
                let ppos: HashMap<usize, usize> = pivots.iter().enumerate().map(|(i, p)| (*p, i)).collect();
                for (x, raw) in win.iter().chain(extra.iter()).zip(&raws) {
                    let mut v: Vec<(usize, Rational)> = raw
                        .iter()
                        .filter_map(|(k, val)| ppos.get(&pos[k]).map(|i| (*i, val.clone())))
                        .collect();
                    v.sort_by_key(|e| e.0);
                    phi.insert(x.clone(), v);
                }
            }
        }
    }
    eng.clear_cache();
    let slice = want_slice.then(|| {
        for w in m.offsets() {
            slices.entry(w).or_insert_with(|| Subspace::zero(m.dim_at(w)));
        }
        SubmoduleSlice { spaces: slices }
    });
    Ok(RadicalData { quotient_dims, slice })
}

fn add_raw(raw: &mut BTreeMap<(usize, usize), Rational>, k: (usize, usize), c: Rational) {
    if c.is_zero() {
        return;
    }
    let e = raw.entry(k).or_insert_with(Rational::zero);
    *e += c;
    if e.is_zero() {
        raw.remove(&k);
    }
}

/// Rank in the irreducible quotient of level -1 combinations, from Φ_{-1}(v) = (g v)_g.
pub fn level_one_quotient_rank(m: &TruncatedModule, vecs: &[Combo]) -> Result<usize, ModuleError> {
    let eng = m.engine();
    let gens = eng.raising(1, m.truncation().raising_bound);
    let mut ids: BTreeMap<(usize, Label), usize> = BTreeMap::new();
    let mut raws = Vec::new();
    for v in vecs {
        let mut raw: BTreeMap<(usize, Label), Rational> = BTreeMap::new();
        for (l, c) in v {
            if eng.level(l) != -1 {
                return Err(ModuleError::Precondition(format!("{l} is not at level -1")));
            }
            for (gi, g) in gens.iter().enumerate() {
                for (y, x) in eng.act(g, l)? {
                    let e = raw.entry((gi, y)).or_insert_with(Rational::zero);
                    *e += c * x;
                }
            }
        }
        raw.retain(|_, x| !x.is_zero());
        for k in raw.keys() {
            let n = ids.len();
            ids.entry(k.clone()).or_insert(n);
        }
        raws.push(raw);
    }
    let mut ech = Echelon::new(ids.len());
    for raw in raws {
        ech.insert(SparseVector::from_entries(ids.len(), raw.into_iter().map(|(k, x)| (ids[&k], x))));
    }
    Ok(ech.rank())
}

pub fn quotient_dims(m: &TruncatedModule, rad: &SubmoduleSlice) -> BTreeMap<LatticeVector, usize> {
    m.offsets().into_iter().map(|w| (w, m.dim_at(w) - rad.dim_at(w))).collect()
}

pub fn support(m: &TruncatedModule, rad: &SubmoduleSlice) -> BTreeSet<LatticeVector> {
    quotient_dims(m, rad).into_iter().filter(|(_, d)| *d > 0).map(|(w, _)| w).collect()
}

/// Quotient engine: labels are the non-pivot labels of the radical per weight.
struct QuotientEngine {
    parent: Arc<TruncatedModule>,
    radical: SubmoduleSlice,
}

impl QuotientEngine {
    /// Rewrites a parent combination in representative labels. Top-level labels
    /// outside the window are kept (the radical is zero there); other
    /// out-of-window components are dropped.
    fn reduce(&self, c: Combo) -> Result<Combo, ModuleError> {
        let mut out = Combo::new();
        let mut per_weight: BTreeMap<LatticeVector, Vec<(usize, Rational)>> = BTreeMap::new();
        for (l, x) in c {
            match self.parent.locate(&l) {
                Some((w, i)) => per_weight.entry(w).or_default().push((i, x)),
                None => {
                    if self.parent.level(&l) == 0 {
                        combo_add(&mut out, l, x);
                    }
                }
            }
        }
        for (w, entries) in per_weight {
            let v = SparseVector::from_entries(self.parent.dim_at(w), entries);
            let r = match self.radical.spaces.get(&w) {
                Some(s) => s.reduce(&v)?,
                None => v,
            };
            let ls = self.parent.labels_at(w);
            for (i, x) in r.entries() {
                combo_add(&mut out, ls[*i].clone(), x.clone());
            }
        }
        Ok(out)
    }
}

impl ActionEngine for QuotientEngine {
    fn act(&self, sym: &BasisSymbol, label: &Label) -> Result<Combo, ModuleError> {
        self.reduce(self.parent.engine().act(sym, label)?)
    }
    fn offset(&self, label: &Label) -> LatticeVector {
        self.parent.engine().offset(label)
    }
    fn weight_shift(&self, sym: &BasisSymbol) -> LatticeVector {
        self.parent.engine().weight_shift(sym)
    }
    fn level(&self, label: &Label) -> i64 {
        self.parent.engine().level(label)
    }
    fn raising(&self, gap: i64, bound: i64) -> Vec<BasisSymbol> {
        self.parent.engine().raising(gap, bound)
    }
    fn clear_cache(&self) {
        self.parent.engine().clear_cache()
    }
    fn drops(&self, sym: &BasisSymbol, label: &Label) -> Result<bool, ModuleError> {
        let img = self.parent.engine().act(sym, label)?;
        Ok(img.keys().any(|l| self.parent.locate(l).is_none() && self.parent.level(l) != 0))
    }
}

/// The quotient of a module by a slice of it (normally its radical).
pub fn quotient_module(parent: Arc<TruncatedModule>, rad: SubmoduleSlice, name: impl Into<String>) -> TruncatedModule {
    let mut reps = Vec::new();
    for w in parent.offsets() {
        let ls = parent.labels_at(w);
        let keep: Vec<usize> = match rad.spaces.get(&w) {
            Some(s) => s.complement_indices(),
            None => (0..ls.len()).collect(),
        };
        reps.extend(keep.into_iter().map(|i| ls[i].clone()));
    }
    let (basis, base, trunc, central, scope) =
        (*parent.basis(), parent.base().clone(), *parent.truncation(), parent.central().clone(), *parent.scope());
    let eng = Arc::new(QuotientEngine { parent, radical: rad });
    TruncatedModule::new(name, eng, basis, base, trunc, central, scope, reps)
}

/// True iff E(m) v = t^m v = 0 for all retained m in Z+ b1 + Z+ b2 minus the origin.
pub fn is_ghw_vector(m: &TruncatedModule, v: &Combo, b: &BasisPair) -> Result<bool, ModuleError> {
    let bound = m.truncation().raising_bound.max(m.truncation().depth as i64 + 1);
    for x1 in 0..=bound {
        for x2 in 0..=bound {
            if x1 == 0 && x2 == 0 {
                continue;
            }
            let mm = b.from_coords(x1, x2);
            if !within_retained(m, mm) {
                continue;
            }
            debug_assert!(b.cone_contains(mm, ConeMode::Nonneg));
            for sym in [BasisSymbol::E(mm), BasisSymbol::T(mm)] {
                if !m.scope().accepts(&sym) {
                    return Err(ModuleError::Precondition(format!(
                        "module {} has no action of {sym}; the GHW condition is not applicable",
                        m.name()
                    )));
                }
                if !m.act_exact_combo(&sym, v)?.is_empty() {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn within_retained(m: &TruncatedModule, mm: LatticeVector) -> bool {
    let (s, j) = m.basis().coords(mm);
    s.abs() <= m.truncation().raising_bound && j.abs() <= m.truncation().depth as i64 + 1
}

/// Smallest p with E(i b1 + j b2) v = t^{i b1 + j b2} v = 0 for all retained (i, j) >= (p, p).
pub fn annihilation_bound(m: &TruncatedModule, v: &Combo) -> Result<Option<i64>, ModuleError> {
    let s = m.truncation().raising_bound;
    let d = m.truncation().depth as i64 + 1;
    let b = *m.basis();
    let mut bad: Vec<(i64, i64)> = Vec::new();
    for i in 1..=s {
        for j in 1..=d {
            let mm = b.from_coords(i, j);
            for sym in [BasisSymbol::E(mm), BasisSymbol::T(mm)] {
                if m.scope().accepts(&sym) && !m.act_exact_combo(&sym, v)?.is_empty() {
                    bad.push((i, j));
                }
            }
        }
    }
    Ok((1..=s).find(|&p| bad.iter().all(|&(i, j)| i < p || j < p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::{int, rat};
    use crate::lattice::lv;

    #[test]
    fn weight_equality_is_on_values() {
        let a = Weight::new((rat(1, 2), int(0)), lv(1, 0));
        let b = Weight::new((rat(3, 2), int(0)), lv(0, 0));
        let c = Weight::new((rat(3, 2), int(1)), lv(0, 0));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn truncation_defaults() {
        let t: Truncation = serde_json::from_str(r#"{"depth":4,"window":8}"#).unwrap();
        assert_eq!(t.raising_bound, 16);
        assert!(serde_json::from_str::<Truncation>(r#"{"depth":1,"window":8,"raising_bound":3}"#).is_err());
    }

    #[test]
    fn combos_cancel() {
        let mut c = Combo::new();
        combo_add(&mut c, Label::Laurent(1), int(2));
        combo_add(&mut c, Label::Laurent(1), int(-2));
        assert!(c.is_empty());
    }
}
