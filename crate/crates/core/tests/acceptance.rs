//! Acceptance suite: one PASS/FAIL line per criterion; exits nonzero on any failure.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::{partitions, pow2, reachable, rho_constant, rho_even, rho_linear, rho_three, slow_gcd, two_colored};
use hvtorus::cli::jacobi_fuzz_with;
use hvtorus::constructions::{
    classify_t_rho, extend_to_l0, fock, induce, irreducible_quotient, t_rho, verma_h, Epsilon, LaurentAlg,
};
use hvtorus::exactla::{int, rat, Rational};
use hvtorus::experiments::{
    decomposition_check, ghw_scan, growth_experiment, stabilization_experiment, witness_ranks, Verdict,
};
use hvtorus::exppoly::{
    characteristic_recurrence, g_to_rho, is_exp_polynomial_over_h, rho_to_g, table_from_g, ExpPolynomial, ExpTerm,
    ExpVerdict, RhoSpec,
};
use hvtorus::gradmod::{quotient_dims_by_rank, radical, TruncatedModule, Truncation};
use hvtorus::hvr2::bracket;
use hvtorus::lattice::{is_zbasis, lv, BasisPair, LatticeVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(t: Duration, limit_s: u64) -> Result<(), String> {
    ensure(t <= Duration::from_secs(limit_s), format!("took {:.1}s, limit {limit_s}s", t.as_secs_f64()))
}

fn by_grade(m: &TruncatedModule, dims: &BTreeMap<LatticeVector, usize>) -> Vec<usize> {
    let mut out = vec![0; m.truncation().depth as usize + 1];
    for (w, d) in dims {
        out[m.basis().coords(*w).0.unsigned_abs() as usize] += d;
    }
    out
}

fn c1_bracket_validity() -> Check {
    let t = Instant::now();
    let rep = jacobi_fuzz_with(bracket, 5, 1000, 20240601).map_err(|e| e.to_string())?;
    ensure(rep.pass, format!("failure {:?}", rep.failure))?;
    within(t.elapsed(), 10)?;
    Ok(format!("1000 triples, window 5, {:.2}s", t.elapsed().as_secs_f64()))
}

fn c2_zbasis() -> Check {
    let t = Instant::now();
    let mut n = 0;
    for a in -3..=3 {
        for b in -3..=3 {
            for c in -3..=3 {
                for d in -3..=3 {
                    let d_oracle: i64 = a * d - b * c;
                    let want = d_oracle == 1 || d_oracle == -1;
                    ensure(is_zbasis(lv(a, b), lv(c, d)) == want, format!("({a},{b}),({c},{d})"))?;
                    ensure(BasisPair::new(lv(a, b), lv(c, d)).is_ok() == want, "BasisPair::new disagrees")?;
                    n += 1;
                }
            }
        }
    }
    within(t.elapsed(), 5)?;
    Ok(format!("{n} tuples"))
}

fn c3_fock() -> Check {
    let t = Instant::now();
    let want: Vec<usize> = partitions(10).iter().map(|x| *x as usize).collect();
    for b in [BasisPair::standard(), BasisPair::new(lv(2, 1), lv(1, 1)).unwrap()] {
        for eps in [Epsilon::Plus, Epsilon::Minus] {
            for a in [int(1), rat(-2, 3)] {
                let m = fock(eps, &a, b, 10);
                let got = by_grade(&m, &m.dims());
                ensure(got == want, format!("eps {eps:?} a {a}: {got:?}"))?;
            }
        }
    }
    within(t.elapsed(), 10)?;
    Ok(format!("depth 10 dims {want:?}"))
}

fn c4_verma() -> Check {
    let want: Vec<usize> = two_colored(8).iter().map(|x| *x as usize).collect();
    for b in [BasisPair::standard(), BasisPair::new(lv(2, 1), lv(1, 1)).unwrap()] {
        for eps in [Epsilon::Plus, Epsilon::Minus] {
            for c in [[1, 1, 0, 0], [0, 0, 0, 0], [2, -1, 1, 3]] {
                let m = verma_h(&c.map(int), eps, b, 8);
                let got = by_grade(&m, &m.dims());
                ensure(got == want, format!("c {c:?}: {got:?}"))?;
            }
        }
    }
    Ok(format!("depth 8 dims {want:?}"))
}

fn c5_radical() -> Check {
    let b = BasisPair::standard();
    let m = fock(Epsilon::Plus, &int(1), b, 6);
    ensure(radical(&m).map_err(|e| e.to_string())?.is_zero(), "radical of M+(1) is nonzero")?;
    let m = verma_h(&[0, 0, 0, 0].map(int), Epsilon::Plus, b, 3);
    let q = by_grade(&m, &quotient_dims_by_rank(&m).map_err(|e| e.to_string())?);
    ensure(q == vec![1, 0, 0, 0], format!("V+(0) quotient {q:?}"))?;
    let m = verma_h(&[1, 0, 0, 0].map(int), Epsilon::Plus, b, 6);
    let q = by_grade(&m, &quotient_dims_by_rank(&m).map_err(|e| e.to_string())?);
    let p: Vec<usize> = partitions(6).iter().map(|x| *x as usize).collect();
    ensure(q == p, format!("V+(1,0,0,0) quotient {q:?}"))?;
    Ok("M+(1) radical 0 to depth 6; V+(0) quotient 1,0,0,0; V+(1,0,0,0) quotient partitions".into())
}

fn c6_classification() -> Check {
    let b = BasisPair::standard();
    let window = 24;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..50 {
        let mut e = BTreeMap::new();
        let mut t = BTreeMap::new();
        for _ in 0..rng.gen_range(1..=4) {
            let mut k = 0;
            while k == 0 {
                k = rng.gen_range(-window..=window);
            }
            let v = rat(rng.gen_range(1..=4), rng.gen_range(1..=3));
            if rng.gen_bool(0.5) {
                e.insert(k, v);
            } else {
                t.insert(k, v);
            }
        }
        let mut support: Vec<i64> = e.keys().chain(t.keys()).copied().collect();
        support.sort();
        support.dedup();
        let rho = RhoSpec::table(e, t, int(0), int(0));
        let class = classify_t_rho(&rho, LaurentAlg::H, &b, window).map_err(|e| e.to_string())?;
        let r = support.iter().fold(0, |g, k| slow_gcd(g, *k));
        let reach = reachable(&support, 2 * window);
        let irr = reach.contains(&r) && reach.contains(&-r);
        ensure(class.r as i64 == r && class.irreducible == irr, format!("case {i}: support {support:?}"))?;
    }
    let two = RhoSpec::table(BTreeMap::from([(2, int(1)), (-2, int(1))]), BTreeMap::new(), int(0), int(0));
    let c = classify_t_rho(&two, LaurentAlg::H, &b, window).map_err(|e| e.to_string())?;
    ensure(c.r == 2 && c.irreducible, "support {2,-2}")?;
    let one = RhoSpec::table(BTreeMap::from([(1, int(1))]), BTreeMap::new(), int(0), int(0));
    let c = classify_t_rho(&one, LaurentAlg::H, &b, window).map_err(|e| e.to_string())?;
    ensure(!c.irreducible, "support {1}")?;
    Ok("50 random supports agree with BFS; {2,-2} r=2 irreducible; {1} reducible".into())
}

fn random_exppoly(rng: &mut ChaCha8Rng) -> ExpPolynomial {
    let bases = [int(1), int(-1), int(2), rat(1, 2), int(-3)];
    loop {
        let terms: Vec<ExpTerm> = (0..rng.gen_range(1..=3))
            .map(|_| ExpTerm {
                c: rat(rng.gen_range(1..=5) * if rng.gen_bool(0.5) { 1 } else { -1 }, rng.gen_range(1..=3)),
                m: rng.gen_range(0..=2),
                a: bases[rng.gen_range(0..bases.len())].clone(),
            })
            .collect();
        if let Ok(f) = ExpPolynomial::new(terms) {
            if !f.is_zero() {
                return f;
            }
        }
    }
}

fn c7_exppoly() -> Check {
    let b = BasisPair::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let f = random_exppoly(&mut rng);
        let rec = characteristic_recurrence(&f).map_err(|e| e.to_string())?;
        let n = rec.order() as i64;
        for m in -20..=20 - n {
            let s: Rational = rec.coeffs().iter().enumerate().map(|(i, c)| c * f.eval(m + i as i64)).sum();
            ensure(s == int(0), format!("{f} not annihilated at {m}"))?;
        }
        let g2 = random_exppoly(&mut rng);
        let (h1, h2) = rho_to_g(&g_to_rho(&f, &g2, &b), &b);
        ensure((-20..=20).all(|m| h1(m) == f.eval(m) && h2(m) == g2.eval(m)), "g/rho round trip")?;
        let tab = table_from_g(&|m| f.eval(m), &|m| g2.eval(m), 20, &b);
        ensure((-20..=20).all(|m| tab.g1(m, &b) == f.eval(m) && tab.g2(m, &b) == g2.eval(m)), "table round trip")?;
    }
    let n2n = ExpPolynomial::monomial(int(1), 1, int(2));
    let fixtures = [
        ("g1=m", rho_linear(), 2usize),
        ("g1=1", rho_constant(), 1),
        ("g1=m on even m", rho_even(), 4),
        ("g1=n 2^n", RhoSpec::exppoly(n2n.clone(), ExpPolynomial::zero()), 2),
    ];
    for (name, rho, order) in fixtures {
        match is_exp_polynomial_over_h(&rho, &b, 6, -12, 12).map_err(|e| e.to_string())? {
            ExpVerdict::Yes(w) => ensure(w.order() == order, format!("{name}: witness order {}", w.order()))?,
            ExpVerdict::Undetermined => return Err(format!("{name}: undetermined")),
        }
    }
    let w = characteristic_recurrence(&n2n).map_err(|e| e.to_string())?;
    ensure(w.coeffs() == [int(4), int(-4), int(1)], "n 2^n witness (4,-4,1)")?;
    let sq = table_from_g(&|m| pow2(m * m), &|_| int(0), 20, &b);
    let v = is_exp_polynomial_over_h(&sq, &b, 6, -10, 10).map_err(|e| e.to_string())?;
    ensure(v == ExpVerdict::Undetermined, "2^(m^2) detected as exp-polynomial")?;
    Ok("20 random recurrences annihilate; round trips exact; fixtures yes, 2^(m^2) undetermined".into())
}

fn c8_quasi_finiteness() -> Check {
    let t = Instant::now();
    let b = BasisPair::standard();
    let sweep = [4, 8, 12, 16];
    let mut notes = Vec::new();
    for (name, rho) in [("g1=m", rho_linear()), ("g1=1", rho_constant())] {
        let r = stabilization_experiment(&rho, b, 2, &sweep).map_err(|e| e.to_string())?;
        ensure(matches!(r.verdict, Verdict::Stabilized { .. }), format!("{name}: {:?} {:?}", r.verdict, r.observed))?;
        ensure(r.levels_computed == 2, format!("{name}: only {} levels", r.levels_computed))?;
        notes.push(format!("{name} {:?}", r.observed));
    }
    let sq = table_from_g(&|m| pow2(m * m), &|_| int(0), 48, &b);
    let r = stabilization_experiment(&sq, b, 2, &sweep).map_err(|e| e.to_string())?;
    ensure(r.verdict == Verdict::Growing, format!("2^(m^2): {:?} {:?}", r.verdict, r.observed))?;
    notes.push(format!("2^(m^2) {:?}", r.observed));
    within(t.elapsed(), 120)?;
    Ok(format!("{}; {:.1}s", notes.join("; "), t.elapsed().as_secs_f64()))
}

fn c9_growth() -> Check {
    let b = BasisPair::standard();
    let c = [0, 1, 0, 0].map(int);
    let sweep = [2, 4, 6, 8];
    let r = growth_experiment(&c, Epsilon::Plus, b, &sweep, (int(0), int(0))).map_err(|e| e.to_string())?;
    let s = &r.observed[&-1];
    ensure(s.windows(2).all(|w| w[0] < w[1]), format!("dims {s:?}"))?;
    for n in sweep {
        let w = witness_ranks(&c, Epsilon::Plus, b, n).map_err(|e| e.to_string())?;
        ensure(w.full_rank, format!("N={n}: ranks {:?}", w.ranks))?;
    }
    Ok(format!("-b2 row dims {s:?}; witness ranks n for all n <= N"))
}

fn c10_decomposition() -> Check {
    let b = BasisPair::standard();
    let mut notes = Vec::new();
    for (name, rho) in [("r=1", rho_linear()), ("r=2", rho_even()), ("r=3", rho_three())] {
        let rep = decomposition_check(&rho, b, Truncation::new(2, 4)).map_err(|e| e.to_string())?;
        ensure(rep.ok(), format!("{name}: {:?}", rep.mismatches))?;
        notes.push(format!("{name} ({} weights compared)", rep.compared));
    }
    Ok(notes.join(", "))
}

fn c11_ghw() -> Check {
    let b = BasisPair::standard();
    let bp = BasisPair::new(lv(1, 1), lv(1, 2)).unwrap();
    let rho = rho_linear();
    let trunc = Truncation::new(2, 4);
    let top = extend_to_l0(&t_rho(&rho, LaurentAlg::H, b, 4, 0).map_err(|e| e.to_string())?, (int(0), int(0)), &b)
        .map_err(|e| e.to_string())?;
    let ind = induce(b, Arc::new(top), trunc).map_err(|e| e.to_string())?;
    let q = irreducible_quotient(Arc::new(ind)).map_err(|e| e.to_string())?;
    let hits = ghw_scan(&q, &[bp, b]).map_err(|e| e.to_string())?;
    ensure(hits.iter().any(|h| h.basis == bp && h.offset == (0, 0) && h.exact), "top not found for {b1+b2, b1+2b2}")?;
    ensure(rho.e_value(1) != int(0), "fixture needs rho(E(b1)) != 0")?;
    let bad: Vec<_> = hits.iter().filter(|h| h.basis == b && h.exact).collect();
    ensure(bad.is_empty(), format!("exact hits for {{b1, b2}}: {bad:?}"))?;
    Ok("top is a GHW vector for {b1+b2, b1+2b2}; no exact hit for {b1, b2}".into())
}

fn c12_determinism() -> Check {
    let dir = std::path::PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let cfg = dir.join("growth.json");
    std::fs::write(
        &cfg,
        r#"{"experiment": {"experiment": "growth", "c": [0, 1, 0, 0], "epsilon": "+", "sweep": [1, 2, 3], "witness": true}}"#,
    )
    .map_err(|e| e.to_string())?;
    let dims = dir.join("verma.json");
    std::fs::write(
        &dims,
        r#"{"construction": {"construction": "verma_H", "epsilon": "-", "c": [1, 0, 0, 0], "quotient": true, "truncation": {"depth": 5, "window": 0}}}"#,
    )
    .map_err(|e| e.to_string())?;
    let cases: Vec<Vec<String>> = vec![
        vec!["jacobi-fuzz".into(), "--seed".into(), "99".into()],
        vec!["experiment".into(), "--config".into(), cfg.display().to_string()],
        vec!["dims".into(), "--config".into(), dims.display().to_string(), "--format".into(), "csv".into()],
    ];
    for args in &cases {
        let mut outs = Vec::new();
        for k in 0..2 {
            let out = dir.join(format!("out{k}"));
            let st = Command::new(env!("CARGO_BIN_EXE_hvtorus"))
                .args(args)
                .arg("--out")
                .arg(&out)
                .status()
                .map_err(|e| e.to_string())?;
            ensure(st.success(), format!("{args:?} exited with {st}"))?;
            outs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
        }
        ensure(outs[0] == outs[1], format!("{args:?} differs between runs"))?;
    }
    Ok("jacobi-fuzz, experiment and dims outputs byte-identical".into())
}

fn main() {
    let criteria: [(&str, fn() -> Check); 12] = [
        ("bracket validity", c1_bracket_validity),
        ("Z-basis criterion", c2_zbasis),
        ("Fock dimensions", c3_fock),
        ("Verma-type dimensions", c4_verma),
        ("radical correctness", c5_radical),
        ("T_rho classification", c6_classification),
        ("exp-polynomial machinery", c7_exppoly),
        ("quasi-finiteness dichotomy", c8_quasi_finiteness),
        ("non-quasi-finiteness", c9_growth),
        ("decomposition", c10_decomposition),
        ("GHW detection", c11_ghw),
        ("determinism", c12_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("PASS criterion {:2} {name}: {detail} [{secs:.2}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:2} {name}: {detail} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
