//! Acceptance criteria 1-10. Prints one `criterion N: PASS|FAIL` line each
//! and exits nonzero if any fails.

mod common;

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::panic;
use std::time::{Duration, Instant};

use gapos::bwb::{
    bott_formula, bwb_cohomology, canonical_weight, full_flag, line_bundle_cohomology,
    verify_tangent_counterexample, WeightVector,
};
use gapos::dsl::{parse, pretty_print, validate};
use gapos::engine::{run_queries, Options, Outcome};
use gapos::harness::{self, DEFAULT_SEED};
use gapos::schur::{littlewood_richardson, pieri, schur_apply, schur_dim, schur_quotient};
use gapos::symalg::{young_idempotent, DEFAULT_TENSOR_CAP};
use gapos::{Partition, Rational};

type Check = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration, what: &str) -> Check {
    let t = start.elapsed();
    ensure(t < limit, || format!("{what} took {t:?}, limit {limit:?}"))
}

fn nonzero_partitions(max: usize) -> Vec<Partition> {
    (1..=max).flat_map(Partition::all_of).collect()
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let shapes = nonzero_partitions(5);
    ensure(shapes.len() == 18, || {
        format!("{} partitions", shapes.len())
    })?;
    for lam in &shapes {
        let e = young_idempotent::<Rational>(lam).map_err(|e| e.to_string())?;
        let sq = e.product(&e).map_err(|e| e.to_string())?;
        ensure(sq == e, || format!("e_({lam}) is not idempotent"))?;
    }
    within(start, Duration::from_secs(30), "idempotency")
}

fn criterion_2() -> Check {
    for n in 1..=5 {
        for lam in Partition::all_of(n) {
            for e in 1..=4usize {
                let image = schur_apply::<Rational>(&lam, e, DEFAULT_TENSOR_CAP)
                    .map_err(|x| x.to_string())?
                    .dim as u128;
                let coker = schur_quotient::<Rational>(&lam, e, DEFAULT_TENSOR_CAP)
                    .map_err(|x| x.to_string())? as u128;
                let hook = schur_dim(&lam, e);
                ensure(image == coker && coker == hook, || {
                    format!("({lam}), e={e}: image {image}, cokernel {coker}, hook-content {hook}")
                })?;
                if lam.length() > e {
                    ensure(hook == 0, || format!("({lam}) on rank {e} should vanish"))?;
                }
            }
        }
    }
    Ok(())
}

/// Standard tableaux counted by removing corners, independently of hooks.
fn syt(lam: &[usize], memo: &mut HashMap<Vec<usize>, u128>) -> u128 {
    if lam.iter().all(|&x| x == 0) {
        return 1;
    }
    if let Some(&v) = memo.get(lam) {
        return v;
    }
    let mut total = 0;
    for i in 0..lam.len() {
        let corner = lam[i] > 0 && (i + 1 == lam.len() || lam[i + 1] < lam[i]);
        if corner {
            let mut smaller = lam.to_vec();
            smaller[i] -= 1;
            while smaller.last() == Some(&0) {
                smaller.pop();
            }
            total += syt(&smaller, memo);
        }
    }
    memo.insert(lam.to_vec(), total);
    total
}

fn criterion_3() -> Check {
    let mut memo = HashMap::new();
    for n in 1..=6usize {
        for e in 1..=5usize {
            let sum: u128 = Partition::all_of(n)
                .iter()
                .map(|l| syt(l.parts(), &mut memo) * schur_dim(l, e))
                .sum();
            let want = (e as u128).pow(n as u32);
            ensure(sum == want, || format!("n={n}, e={e}: {sum} != {want}"))?;
        }
    }
    Ok(())
}

fn horizontal_strip(nu: &Partition, lam: &Partition) -> bool {
    let len = nu.length().max(lam.length());
    (1..=len).all(|i| nu.part(i) >= lam.part(i) && nu.part(i + 1) <= lam.part(i))
}

fn criterion_4() -> Check {
    let shapes = nonzero_partitions(5);
    for lam in &shapes {
        for mu in &shapes {
            if lam.weight() + mu.weight() > 6 {
                continue;
            }
            let d = littlewood_richardson(lam, mu);
            for e in 1..=4usize {
                let lhs: u128 = d.iter().map(|(nu, c)| c as u128 * schur_dim(nu, e)).sum();
                let rhs = schur_dim(lam, e) * schur_dim(mu, e);
                ensure(lhs == rhs, || {
                    format!("({lam})x({mu}), e={e}: {lhs} != {rhs}")
                })?;
            }
        }
    }
    for lam in std::iter::once(Partition::zero()).chain(nonzero_partitions(4)) {
        for k in 1..=6 - lam.weight().min(5) {
            let got = pieri(&lam, k);
            let mut want = BTreeMap::new();
            for nu in Partition::all_of(lam.weight() + k) {
                if horizontal_strip(&nu, &lam) {
                    want.insert(nu, 1u64);
                }
            }
            let got_map: BTreeMap<Partition, u64> =
                got.iter().map(|(p, m)| (p.clone(), m)).collect();
            ensure(got_map == want, || format!("Pieri ({lam}) x ({k}): {got}"))?;
            ensure(
                got == littlewood_richardson(&lam, &Partition::row(k)),
                || format!("Pieri and LR disagree on ({lam}) x ({k})"),
            )?;
        }
    }
    Ok(())
}

fn weights(e: usize, lo: i64, hi: i64) -> Vec<WeightVector> {
    let mut out = vec![vec![]];
    for _ in 0..e {
        out = out
            .into_iter()
            .flat_map(|v: Vec<i64>| {
                (lo..=hi).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out.into_iter().map(WeightVector).collect()
}

fn criterion_5() -> Check {
    let start = Instant::now();
    for e in 1..=4usize {
        let flag_dim = e * (e - 1) / 2;
        let canonical = canonical_weight(&full_flag(e), e).map_err(|x| x.to_string())?;
        let rho = WeightVector::rho(e);
        for w in weights(e, -3, 3) {
            let t = bwb_cohomology(&w);
            // (a) dominant with nonnegative last entry: a partition.
            if w.is_dominant() && w.0[e - 1] >= 0 {
                let lam = Partition::new(w.0.iter().map(|&x| x as usize).collect()).unwrap();
                ensure(
                    t.dim(0) == schur_dim(&lam, e) && t.nonzero_degrees().count() == 1,
                    || format!("dominant {w}: {t}"),
                )?;
            }
            // (b) singular weights.
            let mut shifted = w.add(&rho).0;
            shifted.sort_unstable();
            if shifted.windows(2).any(|p| p[0] == p[1]) {
                ensure(t.is_zero(), || format!("singular {w}: {t}"))?;
            }
            // (c) Serre duality against the canonical weight.
            let dual = bwb_cohomology(&canonical.sub(&w));
            for q in 0..=flag_dim {
                ensure(t.dim(q) == dual.dim(flag_dim - q), || {
                    format!("Serre duality fails for {w} in degree {q}: {t} vs {dual}")
                })?;
            }
        }
    }
    within(start, Duration::from_secs(60), "BWB sweep")
}

/// `h^q(P^n, Ω^1)` from the Euler sequence `0 → Ω^1 → O(−1)^{n+1} → O → 0`:
/// `O(−1)` has no cohomology, so `H^q(Ω^1) ≅ H^{q−1}(O)`.
fn euler_omega1(n: usize, q: usize) -> u128 {
    assert!((0..=n).all(|k| line_bundle_cohomology(n, -1).dim(k) == 0));
    if q == 0 {
        0
    } else {
        line_bundle_cohomology(n, 0).dim(q - 1)
    }
}

fn criterion_6() -> Check {
    for n in 1..=4usize {
        for p in 0..=n {
            let t = bott_formula(n, p, 0);
            for q in 0..=n {
                let want = u128::from(p == q);
                ensure(t.dim(q) == want, || {
                    format!("H^{q}(P^{n}, Ω^{p}) = {}", t.dim(q))
                })?;
            }
        }
        for i in 1..n {
            let v = verify_tangent_counterexample(n, i);
            ensure(v == 1, || format!("n={n}, i={i}: {v}"))?;
            if n <= 2 {
                // ω ⊗ ∧^i T = Ω^{n−i}; at n = 2 that is Ω^1.
                let oracle = euler_omega1(n, n - i);
                ensure(oracle == v, || {
                    format!("Euler sequence gives {oracle}, formula {v}")
                })?;
            }
        }
    }
    Ok(())
}

fn criterion_7() -> Check {
    let files = common::gad_files("corpus");
    ensure(files.len() >= 10, || {
        format!("only {} corpus files", files.len())
    })?;
    let mut seen = String::new();
    for f in &files {
        common::check_golden(f)?;
        seen += &fs::read_to_string(common::golden_path(f)).unwrap();
    }
    for rule in [
        "GA1", "GA2", "GA3", "GA4", "EX1", "EX2", "EX3", "THM2a", "THM2b", "POSCOR", "SS-COR",
        "UNIF", "HDI", "CORVAN", "KAMPLE", "KOSZUL", "CONNECT", "BASELOC",
    ] {
        ensure(seen.contains(&format!("\"rule\": \"{rule}\"")), || {
            format!("{rule} is not exercised")
        })?;
    }
    Ok(())
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn criterion_8() -> Check {
    for n in 2..=4usize {
        for i in 1..n {
            let src = format!(
                "variety P {{ dim={n}, smooth, projective, irreducible }}\n\
                 bundle E on P {{ rank={}, ample }}\nquery positive(E)\n",
                binomial(n, i)
            );
            let doc = parse(&src).map_err(|e| e.to_string())?;
            let val = validate(&doc);
            let r = run_queries(&doc, &val, Options::default());
            ensure(matches!(r[0].outcome, Outcome::Unknown { .. }), || {
                format!("wedge^{i} T on P^{n} was certified positive")
            })?;
            ensure(verify_tangent_counterexample(n, i) >= 1, || {
                format!("no obstruction at n={n}, i={i}")
            })?;
        }
    }
    Ok(())
}

fn criterion_9() -> Check {
    let start = Instant::now();
    let reports = harness::run(DEFAULT_SEED, 50, 5, Options::default());
    ensure(reports.len() == 55, || {
        format!("{} instances", reports.len())
    })?;
    for r in &reports {
        let c = &r.case;
        ensure(c.n <= 3 && c.lambda.weight() <= 4 && c.twist >= 0, || {
            format!("out of range: {c:?}")
        })?;
        ensure(r.ok, || format!("{}", r.to_json()))?;
    }
    within(start, Duration::from_secs(120), "split harness")
}

fn criterion_10() -> Check {
    for f in common::gad_files("corpus") {
        let doc =
            parse(&fs::read_to_string(&f).unwrap()).map_err(|e| format!("{}: {e}", f.display()))?;
        let once = pretty_print(&doc);
        let again = parse(&once).map_err(|e| format!("{} reprint: {e}", f.display()))?;
        ensure(pretty_print(&again) == once, || {
            format!("{} does not round-trip", f.display())
        })?;
    }
    for f in common::gad_files("malformed") {
        common::check_malformed(&f)?;
    }
    Ok(())
}

fn main() {
    let criteria: [(usize, fn() -> Check); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (n, f) in criteria {
        let start = Instant::now();
        let res = panic::catch_unwind(f).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match res {
            Ok(()) => println!("criterion {n}: PASS ({:.2?})", start.elapsed()),
            Err(why) => {
                failed += 1;
                println!("criterion {n}: FAIL ({why})");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
