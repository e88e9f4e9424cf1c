//! Seeded split-bundle instances on `P^n` for checking emitted claims.
//!
//! Each instance is a small `.gad` document declaring `E = ⊕ O(d_i)` and
//! `H = O(t)`, queried for the vanishing of `ω ⊗ S^λ(E) ⊗ H`. Claims the
//! engine emits are checked with [`verify_split`]. Necessity instances take
//! every degree zero and declare `E` nef only: the engine must stay silent and
//! the claim, forced through anyway, must fail.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::dsl::{parse, validate};
use crate::engine::{
    forced_claim, run_queries, verify_split, Options, SplitInstance, SplitVerdict,
};
use crate::partitions::Partition;

pub const DEFAULT_SEED: u64 = 20_240_501;

#[derive(Clone, Debug)]
pub struct SplitCase {
    pub n: usize,
    pub degrees: Vec<i64>,
    pub lambda: Partition,
    pub twist: i64,
    /// All degrees zero and `E` only nef.
    pub necessity: bool,
}

impl SplitCase {
    pub fn source(&self) -> String {
        let e_flags = if self.necessity { "nef" } else { "ample" };
        format!(
            "variety P {{ dim={}, smooth, projective, irreducible }}\n\
             bundle E on P {{ rank={}, {e_flags} }}\n\
             linebundle H on P {{ nef }}\n\
             query vanishing_range(omega(P) * schur([{}], E) * H)\n",
            self.n,
            self.degrees.len(),
            self.lambda,
        )
    }

    pub fn instance(&self) -> SplitInstance {
        let join = |v: &[i64]| v.iter().map(i64::to_string).collect::<Vec<_>>().join(",");
        format!("n={};E={};H={}", self.n, join(&self.degrees), self.twist)
            .parse()
            .expect("generated instances are well formed")
    }
}

#[derive(Clone, Debug)]
pub struct CaseReport {
    pub case: SplitCase,
    /// One verdict per emitted claim; for necessity cases, the forced claim.
    pub verdicts: Vec<(String, SplitVerdict)>,
    pub emitted: usize,
    pub ok: bool,
}

impl CaseReport {
    pub fn to_json(&self) -> Value {
        json!({
            "n": self.case.n,
            "degrees": self.case.degrees,
            "lambda": self.case.lambda.to_string(),
            "twist": self.case.twist,
            "necessity": self.case.necessity,
            "emitted": self.emitted,
            "verdicts": self.verdicts.iter().map(|(c, v)| json!({"claim": c, "verdict": v.to_string()})).collect::<Vec<_>>(),
            "ok": self.ok,
        })
    }
}

fn pos_partitions(r: usize, max_weight: usize) -> Vec<Partition> {
    (1..=max_weight)
        .flat_map(Partition::all_of)
        .filter(|l| l.length() <= r && l.pos_excess(r).is_some())
        .collect()
}

/// `count` positive cases followed by `necessity` necessity cases.
pub fn generate(seed: u64, count: usize, necessity: usize) -> Vec<SplitCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for k in 0..count + necessity {
        let n = rng.gen_range(1..=3);
        let r = rng.gen_range(1..=3);
        let shapes = pos_partitions(r, 4);
        let lambda = shapes[rng.gen_range(0..shapes.len())].clone();
        let nec = k >= count;
        let (degrees, twist) = if nec {
            (vec![0; r], 0)
        } else {
            let mut d: Vec<i64> = (0..r).map(|_| rng.gen_range(1..=3)).collect();
            d.sort_unstable_by(|a, b| b.cmp(a));
            (d, rng.gen_range(0..=2))
        };
        out.push(SplitCase {
            n,
            degrees,
            lambda,
            twist,
            necessity: nec,
        });
    }
    out
}

pub fn check(case: &SplitCase, opts: Options) -> CaseReport {
    let doc = parse(&case.source()).expect("generated documents parse");
    let val = validate(&doc);
    let inst = case.instance();
    let results = run_queries(&doc, &val, opts);
    let claims = &results[0].claims;
    let mut verdicts: Vec<(String, SplitVerdict)> = claims
        .iter()
        .map(|(c, _)| (c.to_string(), verify_split(c, &val.context, &inst)))
        .collect();
    let ok = if case.necessity {
        let forced = forced_claim(&doc.queries[0].subject, "P");
        let v = verify_split(&forced, &val.context, &inst);
        let failed = matches!(v, SplitVerdict::Fail { .. });
        verdicts.push((format!("forced: {forced}"), v));
        claims.is_empty() && failed
    } else {
        !claims.is_empty() && verdicts.iter().all(|(_, v)| *v == SplitVerdict::Pass)
    };
    CaseReport {
        case: case.clone(),
        emitted: claims.len(),
        verdicts,
        ok,
    }
}

pub fn run(seed: u64, count: usize, necessity: usize, opts: Options) -> Vec<CaseReport> {
    generate(seed, count, necessity)
        .iter()
        .map(|c| check(c, opts))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_seeded() {
        let a: Vec<String> = generate(7, 5, 1).iter().map(SplitCase::source).collect();
        let b: Vec<String> = generate(7, 5, 1).iter().map(SplitCase::source).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn small_run_passes() {
        for r in run(DEFAULT_SEED, 6, 2, Options::default()) {
            assert!(r.ok, "{:?}", r.to_json());
        }
    }
}
