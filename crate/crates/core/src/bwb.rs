//! Exact cohomology on homogeneous instances.
//!
//! Line bundles on the full flag variety of a rank-`e` space are indexed by
//! integer weights. Grassmannians parametrize quotients and `O(1)` is the
//! Plücker polarization, so a nonincreasing weight `λ` has `H^0 = S^λ(E)`.
//! Projective space is `Flag_{1}(S^{n+1})`; its twisted differentials and
//! split bundles are handled in closed form.

use std::collections::BTreeMap;
use std::fmt;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::partitions::Partition;
use crate::schur::{monomial_expansion, schur_dim};

/// An integer weight of length `e`, possibly non-monotone or negative.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeightVector(pub Vec<i64>);

impl WeightVector {
    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn is_dominant(&self) -> bool {
        self.0.windows(2).all(|w| w[0] >= w[1])
    }

    /// `ρ = (e−1, e−2, …, 0)`.
    pub fn rho(e: usize) -> Self {
        WeightVector((0..e as i64).rev().collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        WeightVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        WeightVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        f.write_str(&s.join(","))
    }
}

/// Degree ↦ dimension, with zero entries omitted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CohomologyTable {
    dims: BTreeMap<usize, u128>,
    /// Highest weight of the representation in the nonzero degree, if any.
    pub label: Option<WeightVector>,
}

impl CohomologyTable {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn single(degree: usize, dim: u128) -> Self {
        let mut t = Self::zero();
        t.add(degree, dim);
        t
    }

    pub fn add(&mut self, degree: usize, dim: u128) {
        if dim > 0 {
            *self.dims.entry(degree).or_insert(0) += dim;
        }
    }

    pub fn add_scaled(&mut self, other: &CohomologyTable, mult: u128) {
        for (&q, &d) in &other.dims {
            self.add(q, d * mult);
        }
    }

    pub fn dim(&self, degree: usize) -> u128 {
        self.dims.get(&degree).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn nonzero_degrees(&self) -> impl Iterator<Item = (usize, u128)> + '_ {
        self.dims.iter().map(|(&q, &d)| (q, d))
    }

    pub fn euler_characteristic(&self) -> i128 {
        self.dims
            .iter()
            .map(|(&q, &d)| if q % 2 == 0 { d as i128 } else { -(d as i128) })
            .sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("table serializes")
    }
}

impl Serialize for CohomologyTable {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        let h: BTreeMap<String, u128> =
            self.dims.iter().map(|(q, d)| (q.to_string(), *d)).collect();
        let mut m = s.serialize_map(None)?;
        m.serialize_entry("h", &h)?;
        if let Some(l) = &self.label {
            m.serialize_entry("label", &l.to_string())?;
        }
        m.end()
    }
}

impl fmt::Display for CohomologyTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dims.is_empty() {
            return f.write_str("all cohomology vanishes");
        }
        let parts: Vec<String> = self
            .dims
            .iter()
            .map(|(q, d)| format!("H^{q} = {d}"))
            .collect();
        f.write_str(&parts.join(", "))?;
        if let Some(l) = &self.label {
            write!(f, "  [highest weight ({l})]")?;
        }
        Ok(())
    }
}

/// Dimension of the irreducible representation with nonincreasing highest
/// weight `ν`: shift by `−ν_e` to a partition and use the hook-content value.
pub fn weyl_dim(nu: &WeightVector) -> u128 {
    debug_assert!(nu.is_dominant());
    let Some(&last) = nu.0.last() else {
        return 1;
    };
    let parts: Vec<usize> = nu.0.iter().map(|&x| (x - last) as usize).collect();
    let shape = Partition::new(parts).expect("dominant weight shifts to a partition");
    schur_dim(&shape, nu.rank())
}

/// Borel–Weil–Bott on the full flag variety of a rank-`e` space.
pub fn bwb_cohomology(w: &WeightVector) -> CohomologyTable {
    let e = w.rank();
    let v = w.add(&WeightVector::rho(e));
    let mut sorted = v.0.clone();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    if sorted.windows(2).any(|p| p[0] == p[1]) {
        return CohomologyTable::zero();
    }
    let inversions = (0..e)
        .flat_map(|i| (i + 1..e).map(move |j| (i, j)))
        .filter(|&(i, j)| v.0[i] < v.0[j])
        .count();
    let nu = WeightVector(sorted).sub(&WeightVector::rho(e));
    let mut t = CohomologyTable::single(inversions, weyl_dim(&nu));
    t.label = Some(nu);
    t
}

/// The weight of `⊗_i π_{k_i}^* O(a_i)`: consecutive differences `a_i` at
/// the positions `k_i`, zero elsewhere. A twist at `k = e` is the exponent
/// of `det`, i.e. the last entry.
pub fn twists_to_weight(twists: &[(usize, i64)], e: usize) -> Result<WeightVector> {
    if let Some(&(k, _)) = twists.iter().find(|(k, _)| *k == 0 || *k > e) {
        return Err(Error::TwistIndex { index: k, rank: e });
    }
    Ok(WeightVector(
        (1..=e)
            .map(|j| twists.iter().filter(|(k, _)| *k >= j).map(|(_, a)| a).sum())
            .collect(),
    ))
}

/// Weight of the canonical bundle of `Flag_{k_1<…<k_m}(S^e)` over a point:
/// `det^{k_m} ⊗ ⊗_i π_i^* O(k_{i−1} − k_{i+1})` with `k_0 = 0`, `k_{m+1} = e`.
pub fn canonical_weight(flag_indices: &[usize], e: usize) -> Result<WeightVector> {
    let bad = flag_indices.first() == Some(&0)
        || flag_indices.windows(2).any(|w| w[0] >= w[1])
        || flag_indices.last().is_some_and(|&k| k >= e);
    if bad {
        return Err(Error::FlagIndices {
            indices: flag_indices.to_vec(),
            rank: e,
        });
    }
    let mut ks = vec![0];
    ks.extend_from_slice(flag_indices);
    ks.push(e);
    let m = flag_indices.len();
    let mut twists: Vec<(usize, i64)> = (1..=m)
        .map(|i| (ks[i], ks[i - 1] as i64 - ks[i + 1] as i64))
        .collect();
    twists.push((e, ks[m] as i64));
    twists_to_weight(&twists, e)
}

/// The full flag `1 < 2 < … < e−1`.
pub fn full_flag(e: usize) -> Vec<usize> {
    (1..e).collect()
}

fn binomial(n: i64, k: i64) -> u128 {
    if k < 0 || n < k || n < 0 {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `H^*(P^n, O(m))`.
pub fn line_bundle_cohomology(n: usize, m: i64) -> CohomologyTable {
    let n_i = n as i64;
    if m >= 0 {
        CohomologyTable::single(0, binomial(m + n_i, n_i))
    } else if m < -n_i {
        CohomologyTable::single(n, binomial(-m - 1, n_i))
    } else {
        CohomologyTable::zero()
    }
}

/// Bott's formula for `H^q(P^n, Ω^p(k))`.
pub fn bott_formula(n: usize, p: usize, k: i64) -> CohomologyTable {
    assert!(p <= n, "Ω^p on P^n needs p ≤ n");
    let (n_i, p_i) = (n as i64, p as i64);
    let mut t = CohomologyTable::zero();
    if k > p_i {
        t.add(0, binomial(k + n_i - p_i, k) * binomial(k - 1, p_i));
    }
    if k == 0 {
        t.add(p, 1);
    }
    if k < p_i - n_i {
        t.add(n, binomial(-k + p_i, -k) * binomial(-k - 1, n_i - p_i));
    }
    t
}

/// `dim H^{n−i}(P^n, ω ⊗ ∧^i T) = dim H^{n−i}(P^n, Ω^{n−i})`, which is the
/// obstruction to `∧^i T` being geometrically positive.
pub fn verify_tangent_counterexample(n: usize, i: usize) -> u128 {
    assert!(0 < i && i < n, "needs 0 < i < n");
    bott_formula(n, n - i, 0).dim(n - i)
}

/// Cohomology of `⊕ O(m)^{mult}` on `P^n`.
pub fn line_sum_cohomology(n: usize, degrees: &BTreeMap<i64, u128>) -> CohomologyTable {
    let mut t = CohomologyTable::zero();
    for (&m, &mult) in degrees {
        t.add_scaled(&line_bundle_cohomology(n, m), mult);
    }
    t
}

/// Line-bundle degrees of `S^λ(⊕ O(d_i))`, with multiplicity.
pub fn schur_split_degrees(degrees: &[i64], lambda: &Partition) -> BTreeMap<i64, u128> {
    let mut out = BTreeMap::new();
    for (alpha, mult) in monomial_expansion(lambda, degrees.len()) {
        let m: i64 = alpha.iter().zip(degrees).map(|(&a, &d)| a as i64 * d).sum();
        *out.entry(m).or_insert(0) += mult as u128;
    }
    out
}

/// `H^*(P^n, S^λ(⊕ O(d_i)) ⊗ O(twist) [⊗ ω])`.
pub fn split_bundle_cohomology(
    n: usize,
    degrees: &[i64],
    lambda: &Partition,
    twist: i64,
    with_canonical: bool,
) -> CohomologyTable {
    let shift = twist - if with_canonical { n as i64 + 1 } else { 0 };
    let shifted = schur_split_degrees(degrees, lambda)
        .into_iter()
        .map(|(m, k)| (m + shift, k))
        .collect();
    line_sum_cohomology(n, &shifted)
}
