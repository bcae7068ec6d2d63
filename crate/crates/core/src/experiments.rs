//! Window-sweep experiments: stabilization, growth, irreducibility probes,
//! support properties, decompositions and GHW scans.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::constructions::{
    classify_t_rho, extend_to_l0, hat_v_over, highest_weight_v_rho, highest_weight_v_rho_bar, induce,
    m_verma_induced, tensor_m_rho, w_submodule, Epsilon, LaurentAlg,
};
use crate::exactla::{Echelon, Rational, SparseVector};
use crate::exppoly::{level_from_central, RhoSpec};
use crate::gradmod::{
    combo_single, generated_submodule, level_one_quotient_rank, quotient_dims_by_rank, radical, Combo, Label,
    ModuleError, TruncatedModule, Truncation,
};
use crate::hvr2::BasisSymbol;
use crate::lattice::{dominates, BasisPair, LatticeVector};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Verdict {
    Stabilized { at: i64, value: Vec<usize> },
    Growing,
    Inconclusive,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Stabilized { .. } => "stabilized",
            Verdict::Growing => "growing",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// One weight of a dimension table, in the module basis coordinates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DimRow {
    pub offset_b1: i64,
    pub offset_b2: i64,
    pub dim: usize,
}

/// Rows sorted by level (top first), then b1-coordinate.
pub fn dim_rows(dims: &BTreeMap<LatticeVector, usize>, b: &BasisPair) -> Vec<DimRow> {
    let mut rows: Vec<DimRow> = dims
        .iter()
        .map(|(w, d)| {
            let (x1, x2) = b.coords(*w);
            DimRow { offset_b1: x1, offset_b2: x2, dim: *d }
        })
        .collect();
    rows.sort_by_key(|r| (-r.offset_b2, r.offset_b1));
    rows
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepReport {
    pub experiment: String,
    pub parameter: String,
    pub values: Vec<i64>,
    /// One table per setting.
    pub tables: Vec<Vec<DimRow>>,
    /// Observed levels (negative b2-coordinates) and, per level, the dim at `-level b2` per setting.
    pub observed: BTreeMap<i64, Vec<usize>>,
    pub levels_requested: u32,
    pub levels_computed: u32,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

fn check_sweep(sweep: &[i64]) -> Result<(), ModuleError> {
    if sweep.len() < 3 {
        return Err(ModuleError::Precondition(format!("a sweep needs at least 3 settings, got {}", sweep.len())));
    }
    if sweep.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ModuleError::Precondition("sweep values must be strictly increasing".into()));
    }
    if sweep[0] < 0 {
        return Err(ModuleError::Precondition("sweep values must be non-negative".into()));
    }
    Ok(())
}

fn strictly_increasing(xs: &[usize]) -> bool {
    xs.windows(2).all(|w| w[0] < w[1])
}

/// Stabilized when the last three settings agree on every series; growing when
/// some series increases strictly along the sweep.
pub fn verdict_of(values: &[i64], series: &[Vec<usize>]) -> Verdict {
    let n = values.len();
    if series.iter().any(|s| strictly_increasing(s)) {
        return Verdict::Growing;
    }
    let constant_from = |i: usize| series.iter().all(|s| s[i..].iter().all(|x| *x == s[i]));
    if n >= 3 && !series.is_empty() && constant_from(n - 3) {
        let mut i = n - 3;
        while i > 0 && constant_from(i - 1) {
            i -= 1;
        }
        return Verdict::Stabilized { at: values[i], value: series.iter().map(|s| s[i]).collect() };
    }
    Verdict::Inconclusive
}

/// Quotient dims of V̄(ρ) at levels -1..-L over a window sweep.
///
/// Levels are computed in order; the dims at a level do not depend on deeper
/// levels, so once some level grows strictly the deeper ones are skipped.
pub fn stabilization_experiment(rho: &RhoSpec, b: BasisPair, levels: u32, sweep: &[i64]) -> Result<SweepReport, ModuleError> {
    check_sweep(sweep)?;
    if levels == 0 {
        return Err(ModuleError::Precondition("at least one level is required".into()));
    }
    rho.validate(&b)?;
    let mut observed: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    let mut tables = vec![Vec::new(); sweep.len()];
    let mut computed = 0;
    let mut notes = Vec::new();
    for depth in 1..=levels {
        let mut series = Vec::new();
        for (k, &n) in sweep.iter().enumerate() {
            let m = highest_weight_v_rho_bar(rho, b, Truncation::new(depth, n))?;
            let q = quotient_dims_by_rank(&m)?;
            series.push(q.get(&b.from_coords(0, -(depth as i64))).copied().unwrap_or(0));
            tables[k] = dim_rows(&q, &b);
        }
        let grows = strictly_increasing(&series);
        observed.insert(-(depth as i64), series);
        computed = depth;
        if grows && depth < levels {
            notes.push(format!("level -{depth} grows strictly; levels below it were not computed"));
            break;
        }
    }
    let series: Vec<Vec<usize>> = observed.values().rev().cloned().collect();
    Ok(SweepReport {
        experiment: "stabilization".into(),
        parameter: "window".into(),
        values: sweep.to_vec(),
        tables,
        verdict: verdict_of(sweep, &series),
        observed,
        levels_requested: levels,
        levels_computed: computed,
        notes,
    })
}

/// The induced module M̃(b1, b2, V) at depth 1 and window N whose quotient is
/// M(b1, b2, V) for the level c: a Verma top when c2 != 0, and
/// T_0 ⊗ M^ε(c1) when c2 = 0, c1 != 0.
pub fn growth_module(
    c: &[Rational; 4],
    eps: Epsilon,
    b: BasisPair,
    n: i64,
    lambda: (Rational, Rational),
) -> Result<TruncatedModule, ModuleError> {
    let trunc = Truncation::new(1, n);
    if !c[1].is_zero() {
        return m_verma_induced(c, eps, b, trunc, n as u32, lambda);
    }
    if c[0].is_zero() {
        return Err(ModuleError::CaseMismatch {
            case: "growth module needs c1 != 0 or c2 != 0",
            detail: "level (0, 0, c3, c4) falls under the level-zero T_rho case".into(),
        });
    }
    let rho = RhoSpec::table(BTreeMap::new(), BTreeMap::new(), c[2].clone(), c[3].clone());
    let top = tensor_m_rho(&rho, eps, &c[0], b, n as u32, 0)?;
    let top = extend_to_l0(&top, lambda, &b)?;
    induce(b, Arc::new(top), trunc)
}

/// Quotient dim at the weight λ - b2 of M(b1, b2, V) over a window sweep.
pub fn growth_experiment(
    c: &[Rational; 4],
    eps: Epsilon,
    b: BasisPair,
    sweep: &[i64],
    lambda: (Rational, Rational),
) -> Result<SweepReport, ModuleError> {
    check_sweep(sweep)?;
    let mut tables = Vec::new();
    let mut series = Vec::new();
    for &n in sweep {
        let m = growth_module(c, eps, b, n, lambda.clone())?;
        let q = quotient_dims_by_rank(&m)?;
        series.push(q.get(&b.from_coords(0, -1)).copied().unwrap_or(0));
        let row: BTreeMap<LatticeVector, usize> = q.into_iter().filter(|(w, _)| b.level(*w) == -1).collect();
        tables.push(dim_rows(&row, &b));
    }
    let mut observed = BTreeMap::new();
    observed.insert(-1, series.clone());
    Ok(SweepReport {
        experiment: "growth".into(),
        parameter: "window".into(),
        values: sweep.to_vec(),
        tables,
        verdict: verdict_of(sweep, &[series]),
        observed,
        levels_requested: 1,
        levels_computed: 1,
        notes: Vec::new(),
    })
}

/// The label of E(ε k b1 - b2) t^{-ε k b1} v0 in the induced module over a Verma top.
pub fn witness_label(eps: Epsilon, b: &BasisPair, k: i64) -> Label {
    let s = eps.sign();
    let inner = Label::word(vec![BasisSymbol::T(b.from_coords(-s * k, 0))], Label::Vacuum);
    Label::word(vec![BasisSymbol::E(b.from_coords(s * k, -1))], inner)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub window: i64,
    /// (n, rank of the first n witnesses in the quotient).
    pub ranks: Vec<(usize, usize)>,
    pub full_rank: bool,
}

/// Ranks in the irreducible quotient of the witness vectors k = 1..n, n <= N.
pub fn witness_ranks(c: &[Rational; 4], eps: Epsilon, b: BasisPair, n: i64) -> Result<WitnessReport, ModuleError> {
    if c[1].is_zero() {
        return Err(ModuleError::CaseMismatch {
            case: "witness family needs c2 != 0",
            detail: "the witness family lives over a Verma top".into(),
        });
    }
    let m = m_verma_induced(c, eps, b, Truncation::new(1, n), n as u32, (Rational::zero(), Rational::zero()))?;
    let mut vecs: Vec<Combo> = Vec::new();
    let mut ranks = Vec::new();
    for k in 1..=n {
        let l = witness_label(eps, &b, k);
        if m.locate(&l).is_none() {
            return Err(ModuleError::NotInWindow(l.to_string()));
        }
        vecs.push(combo_single(l, Rational::from_integer(1.into())));
        ranks.push((k as usize, level_one_quotient_rank(&m, &vecs)?));
    }
    let full_rank = ranks.iter().all(|(n, r)| n == r);
    Ok(WitnessReport { window: n, ranks, full_rank })
}

/// Irreducibility witness within the truncation: zero radical and the top
/// generates every retained weight space.
pub fn heisenberg_irreducibility_probe(m: &TruncatedModule, a: &Rational) -> Result<bool, ModuleError> {
    let b = *m.basis();
    if m.offsets().iter().any(|w| b.level(*w) != 0) || m.scope().has_b2_direction() {
        return Err(ModuleError::Precondition(format!("module {} is not graded along b1 only", m.name())));
    }
    let level = level_from_central(m.central(), &b);
    if &level[0] != a {
        return Err(ModuleError::Precondition(format!(
            "declared level {a} differs from the module's f(b1) value {}",
            level[0]
        )));
    }
    if !radical(m)?.is_zero() {
        return Ok(false);
    }
    let seeds = m.top_seeds().iter().map(|l| m.vec_from_label(l)).collect::<Result<Vec<_>, _>>()?;
    let gen = generated_submodule(m, &seeds)?;
    Ok(gen.dims() == m.dims())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportViolation {
    pub kind: String,
    /// Coordinates in the checking basis.
    pub weight: (i64, i64),
    pub witness: (i64, i64),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportReport {
    pub basis: BasisPair,
    pub interior_weights: usize,
    pub supported: usize,
    pub violations: Vec<SupportViolation>,
    /// Rows (fixed second coordinate) with a gap between supported interior weights.
    pub ray_gaps: usize,
}

impl SupportReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks on a dims table that includes zero-dimensional retained weights.
///
/// A weight is interior when both neighbours w ± b1 (module basis) are
/// retained. Among interior weights, with coordinates in `check`: the support
/// is downward closed, its complement is upward closed, and each row of fixed
/// second coordinate meets the support in an interval without gaps.
pub fn support_properties_check(
    dims: &BTreeMap<LatticeVector, usize>,
    module_basis: &BasisPair,
    check: &BasisPair,
) -> SupportReport {
    let interior: Vec<(LatticeVector, bool)> = dims
        .iter()
        .filter(|(w, _)| {
            dims.contains_key(&(**w + module_basis.b1())) && dims.contains_key(&(**w - module_basis.b1()))
        })
        .map(|(w, d)| (*w, *d > 0))
        .collect();
    let mut violations = Vec::new();
    for (i, si) in &interior {
        let ci = check.coords(*i);
        for (k, sk) in &interior {
            let ck = check.coords(*k);
            if k == i || !dominates(ci, ck) {
                continue;
            }
            if *si && !*sk {
                violations.push(SupportViolation { kind: "support_not_downward_closed".into(), weight: ck, witness: ci });
            }
            if !*sk && *si {
                violations.push(SupportViolation {
                    kind: "complement_not_upward_closed".into(),
                    weight: ci,
                    witness: ck,
                });
            }
        }
    }
    let mut rows: BTreeMap<i64, Vec<(i64, bool)>> = BTreeMap::new();
    for (w, s) in &interior {
        let (x1, x2) = check.coords(*w);
        rows.entry(x2).or_default().push((x1, *s));
    }
    let mut ray_gaps = 0;
    for (x2, mut row) in rows {
        row.sort();
        let sup: Vec<i64> = row.iter().filter(|(_, s)| *s).map(|(x, _)| *x).collect();
        if let (Some(lo), Some(hi)) = (sup.first(), sup.last()) {
            if let Some((x1, _)) = row.iter().find(|(x, s)| x > lo && x < hi && !*s) {
                ray_gaps += 1;
                violations.push(SupportViolation { kind: "ray_gap".into(), weight: (*x1, x2), witness: (*lo, x2) });
            }
        }
    }
    SupportReport {
        basis: *check,
        interior_weights: interior.len(),
        supported: interior.iter().filter(|(_, s)| *s).count(),
        violations,
        ray_gaps,
    }
}

/// Support check of the irreducible quotient of an induced module.
pub fn support_properties_of_quotient(induced: &TruncatedModule, check: &BasisPair) -> Result<SupportReport, ModuleError> {
    let q = quotient_dims_by_rank(induced)?;
    Ok(support_properties_check(&q, induced.basis(), check))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub r: u64,
    pub hat_dims: Vec<DimRow>,
    pub slices: Vec<Vec<DimRow>>,
    pub pairwise_trivial: bool,
    pub dims_sum: bool,
    pub tables_match: bool,
    /// Weights compared for the table match.
    pub compared: usize,
    pub mismatches: Vec<String>,
}

impl DecompositionReport {
    pub fn ok(&self) -> bool {
        self.pairwise_trivial && self.dims_sum && self.tables_match
    }
}

/// W(0), ..., W(r-1) inside V(ρ) ⊗ C[t^±1].
///
/// Tables are compared through the shift t^k -> t^{k+i}, which maps W(0) onto
/// W(i): dim W(i) at w must equal dim W(0) at w - i b1 whenever both weights
/// carry the full dimension of their level in V̂(ρ).
pub fn decomposition_check(rho: &RhoSpec, b: BasisPair, trunc: Truncation) -> Result<DecompositionReport, ModuleError> {
    let class = classify_t_rho(rho, LaurentAlg::H, &b, 2 * trunc.window)?;
    if class.r == 0 {
        return Err(ModuleError::Precondition("decomposition needs r >= 1 (ρ vanishes on H_b1)".into()));
    }
    let inner = Arc::new(highest_weight_v_rho(rho, b, trunc)?);
    let hat = hat_v_over(inner, trunc)?;
    let r = class.r as i64;
    let slices = (0..r).map(|i| w_submodule(&hat, i)).collect::<Result<Vec<_>, _>>()?;
    let mut mismatches = Vec::new();
    let mut pairwise_trivial = true;
    for i in 0..slices.len() {
        for j in i + 1..slices.len() {
            let d = slices[i].intersect(&slices[j])?.total_dim();
            if d != 0 {
                pairwise_trivial = false;
                mismatches.push(format!("W({i}) and W({j}) meet in dimension {d}"));
            }
        }
    }
    let hat_dims = hat.dims();
    let mut dims_sum = true;
    for (w, d) in &hat_dims {
        let s: usize = slices.iter().map(|x| x.dim_at(*w)).sum();
        if s != *d {
            dims_sum = false;
            mismatches.push(format!("weight {:?}: slices sum to {s}, hat dim {d}", b.coords(*w)));
        }
    }
    let mut level_max: BTreeMap<i64, usize> = BTreeMap::new();
    for (w, d) in &hat_dims {
        let e = level_max.entry(b.level(*w)).or_default();
        *e = (*e).max(*d);
    }
    let full = |w: &LatticeVector| hat_dims.get(w).is_some_and(|d| *d == level_max[&b.level(*w)]);
    let mut tables_match = true;
    let mut compared = 0;
    for i in 1..r {
        for w in hat_dims.keys() {
            let src = *w - b.from_coords(i, 0);
            if !full(w) || !full(&src) {
                continue;
            }
            compared += 1;
            let (di, d0) = (slices[i as usize].dim_at(*w), slices[0].dim_at(src));
            if di != d0 {
                tables_match = false;
                mismatches.push(format!("W({i}) at {:?} has dim {di}, W(0) at {:?} has {d0}", b.coords(*w), b.coords(src)));
            }
        }
    }
    Ok(DecompositionReport {
        r: class.r,
        hat_dims: dim_rows(&hat_dims, &b),
        slices: slices.iter().map(|s| dim_rows(&s.dims(), &b)).collect(),
        pairwise_trivial,
        dims_sum,
        tables_match,
        compared,
        mismatches,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GhwHit {
    /// Weight offset in the module basis coordinates.
    pub offset: (i64, i64),
    pub basis: BasisPair,
    pub kernel_dim: usize,
    /// False when the quotient action dropped out-of-window components at this weight.
    pub exact: bool,
}

/// Common kernels of E(b1'), E(b2'), t^{b1'} on each retained weight space, per candidate basis.
pub fn ghw_scan(m: &TruncatedModule, bases: &[BasisPair]) -> Result<Vec<GhwHit>, ModuleError> {
    let mut hits = Vec::new();
    for bp in bases {
        let gens = [BasisSymbol::E(bp.b1()), BasisSymbol::E(bp.b2()), BasisSymbol::T(bp.b1())];
        if let Some(g) = gens.iter().find(|g| !m.scope().accepts(g)) {
            return Err(ModuleError::Precondition(format!(
                "module {} has no action of {g}; GHW detection for {bp} is not applicable",
                m.name()
            )));
        }
        for w in m.offsets() {
            let labels = m.labels_at(w);
            let mut ids: BTreeMap<(usize, Label), usize> = BTreeMap::new();
            let mut cols: Vec<Vec<((usize, Label), Rational)>> = Vec::new();
            let mut exact = true;
            for l in labels {
                let mut col = Vec::new();
                for (gi, g) in gens.iter().enumerate() {
                    if m.engine().drops(g, l)? {
                        exact = false;
                    }
                    for (y, x) in m.act_exact(g, l)? {
                        col.push(((gi, y), x));
                    }
                }
                for (k, _) in &col {
                    let n = ids.len();
                    ids.entry(k.clone()).or_insert(n);
                }
                cols.push(col);
            }
            let mut ech = Echelon::new(ids.len());
            for col in cols {
                ech.insert(SparseVector::from_entries(ids.len(), col.into_iter().map(|(k, x)| (ids[&k], x))));
            }
            let kernel_dim = labels.len() - ech.rank();
            if kernel_dim > 0 {
                hits.push(GhwHit { offset: m.basis().coords(w), basis: *bp, kernel_dim, exact });
            }
        }
    }
    Ok(hits)
}

/// Offsets of the scan hits per basis.
pub fn hit_offsets(hits: &[GhwHit], b: &BasisPair) -> BTreeSet<(i64, i64)> {
    hits.iter().filter(|h| &h.basis == b).map(|h| h.offset).collect()
}
