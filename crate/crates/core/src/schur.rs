//! Schur–Weyl functors on coordinate spaces and the decomposition
//! combinatorics that goes with them.
//!
//! `S^λ(E)` is realized as the image of the Young idempotent acting on the
//! `|λ|`-th tensor power, and also as the cokernel of `1 − e_λ`. Both
//! constructions are capped; [`schur_dim`] is the closed form used above the cap.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::partitions::Partition;
use crate::scalar::Field;
use crate::symalg::{action_rank, weight_blocks, young_idempotent, GroupAlgebraElement};

/// Hook-content formula: `∏ (e + j − i) / hook(i, j)`, zero when
/// `length(λ) > e`.
pub fn schur_dim(shape: &Partition, e: usize) -> u128 {
    if shape.length() > e {
        return 0;
    }
    let hooks = shape.hook_lengths();
    let (num, den) = shape
        .cells()
        .zip(hooks)
        .fold((BigUint::one(), BigUint::one()), |(n, d), (c, h)| {
            (n * BigUint::from(e + c.col - c.row), d * BigUint::from(h))
        });
    (num / den).to_u128().expect("dimension overflows u128")
}

/// An explicitly constructed Schur–Weyl power of `S^e`.
#[derive(Clone, Debug)]
pub struct SchurModule<S> {
    pub shape: Partition,
    pub ambient_dim: usize,
    pub dim: usize,
    /// Basis vectors inside `(S^e)^{⊗|λ|}`, lexicographic tensor coordinates.
    pub basis: Option<Vec<Vec<S>>>,
    blocks: Vec<ProjectedBlock<S>>,
}

/// One weight space of the image of `e_λ`. The basis is the pivot columns of
/// the block; since `P = B·R` with `R` the nonzero rows of `rref(P)` and
/// `Pv = v` on the image, `coords = R` reads off coordinates directly.
#[derive(Clone, Debug)]
struct ProjectedBlock<S> {
    words: Vec<usize>,
    coords: Matrix<S>,
}

impl<S: Field> SchurModule<S> {
    /// Coordinates of a vector lying in the image, in the module's basis.
    pub fn coordinates(&self, v: &[S]) -> Vec<S> {
        let mut out = Vec::with_capacity(self.dim);
        for b in &self.blocks {
            let local: Vec<S> = b.words.iter().map(|&w| v[w].clone()).collect();
            for r in 0..b.coords.rows() {
                let x = b
                    .coords
                    .row(r)
                    .iter()
                    .zip(&local)
                    .fold(S::zero(), |acc, (a, x)| acc + a.clone() * x.clone());
                out.push(x);
            }
        }
        out
    }
}

fn idempotent_or_unit<S: Field>(shape: &Partition) -> Result<GroupAlgebraElement<S>> {
    if shape.is_zero() {
        Ok(GroupAlgebraElement::one(0))
    } else {
        young_idempotent(shape)
    }
}

/// Image of `e_λ` on `(S^e)^{⊗|λ|}`.
pub fn schur_apply<S: Field>(shape: &Partition, e: usize, cap: u128) -> Result<SchurModule<S>> {
    let n = shape.weight();
    let idem = idempotent_or_unit::<S>(shape)?;
    let full = e.checked_pow(n as u32).unwrap_or(usize::MAX);
    let mut blocks = Vec::new();
    let mut basis = Vec::new();
    for wb in weight_blocks(&idem, e, n, cap)? {
        let (red, pivots) = wb.matrix.rref();
        for &p in &pivots {
            let col = wb.matrix.column(p);
            let mut v = vec![S::zero(); full];
            for (k, &w) in wb.words.iter().enumerate() {
                v[w] = col[k].clone();
            }
            basis.push(v);
        }
        let mut coords = Matrix::zeros(pivots.len(), wb.words.len());
        for r in 0..pivots.len() {
            for (c, x) in red.row(r).iter().enumerate() {
                coords[(r, c)] = x.clone();
            }
        }
        blocks.push(ProjectedBlock {
            words: wb.words,
            coords,
        });
    }
    Ok(SchurModule {
        shape: shape.clone(),
        ambient_dim: e,
        dim: basis.len(),
        basis: Some(basis),
        blocks,
    })
}

/// `dim (S^e)^{⊗|λ|} / (1 − e_λ)(S^e)^{⊗|λ|}`.
pub fn schur_quotient<S: Field>(shape: &Partition, e: usize, cap: u128) -> Result<usize> {
    let n = shape.weight();
    let idem = idempotent_or_unit::<S>(shape)?;
    let comp = &GroupAlgebraElement::one(n) - &idem;
    let total = e.pow(n as u32);
    Ok(total - action_rank(&comp, e, n, cap)?)
}

/// Applies `M^{⊗n}` to a tensor in lexicographic coordinates. `m` maps
/// `S^k → S^r` (an `r × k` matrix).
fn tensor_power_apply<S: Field>(m: &Matrix<S>, v: &[S], n: usize) -> Vec<S> {
    let (r, k) = (m.rows(), m.cols());
    let mut dims = vec![k; n];
    let mut cur = v.to_vec();
    for axis in 0..n {
        let before: usize = dims[..axis].iter().product();
        let after: usize = dims[axis + 1..].iter().product();
        let mut next = vec![S::zero(); before * r * after];
        for b in 0..before {
            for j in 0..k {
                for a in 0..after {
                    let x = &cur[(b * k + j) * after + a];
                    if x.is_zero() {
                        continue;
                    }
                    for i in 0..r {
                        let c = &m[(i, j)];
                        if !c.is_zero() {
                            next[(b * r + i) * after + a] += c.clone() * x.clone();
                        }
                    }
                }
            }
        }
        dims[axis] = r;
        cur = next;
    }
    cur
}

/// The map `S^λ(M): S^λ(S^k) → S^λ(S^r)` in the bases chosen by [`schur_apply`].
pub fn schur_of_map<S: Field>(shape: &Partition, m: &Matrix<S>, cap: u128) -> Result<Matrix<S>> {
    let n = shape.weight();
    let source = schur_apply::<S>(shape, m.cols(), cap)?;
    let target = schur_apply::<S>(shape, m.rows(), cap)?;
    let src_basis = source.basis.as_ref().expect("explicit construction");
    let mut out = Matrix::zeros(target.dim, source.dim);
    for (j, v) in src_basis.iter().enumerate() {
        let image = tensor_power_apply(m, v, n);
        for (i, c) in target.coordinates(&image).into_iter().enumerate() {
            out[(i, j)] = c;
        }
    }
    Ok(out)
}

/// A finite multiset of partitions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DecompositionMultiset {
    entries: BTreeMap<Partition, u64>,
}

impl DecompositionMultiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, p: Partition, mult: u64) {
        if mult > 0 {
            *self.entries.entry(p).or_insert(0) += mult;
        }
    }

    pub fn multiplicity(&self, p: &Partition) -> u64 {
        self.entries.get(p).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries with the largest first part first, i.e. `(2)` before `(1,1)`.
    pub fn iter(&self) -> impl Iterator<Item = (&Partition, u64)> {
        self.entries.iter().rev().map(|(p, &m)| (p, m))
    }

    /// `Σ mult · schur_dim(ν, e)`.
    pub fn total_dim(&self, e: usize) -> u128 {
        self.iter().map(|(p, m)| m as u128 * schur_dim(p, e)).sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .iter()
            .map(|(p, m)| (p.to_string(), serde_json::Value::from(m)))
            .collect();
        serde_json::Value::Object(map)
    }
}

impl fmt::Display for DecompositionMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.iter().map(|(p, m)| format!("({p}):{m}")).collect();
        f.write_str(&items.join(" "))
    }
}

/// `λ ↦ f^λ` over the partitions of `n`.
pub fn tensor_power_multiplicities(n: usize) -> DecompositionMultiset {
    let mut d = DecompositionMultiset::new();
    for p in Partition::all_of(n) {
        d.add(p.clone(), p.num_standard_tableaux() as u64);
    }
    d
}

/// Counts LR tableaux of shape `ν/λ` and content `μ`: semistandard fillings
/// whose reverse reading word (rows top to bottom, right to left) is a
/// lattice word.
pub fn lr_coefficient(outer: &Partition, inner: &Partition, content: &Partition) -> u64 {
    if !outer.contains(inner) || outer.weight() != inner.weight() + content.weight() {
        return 0;
    }
    let cells: Vec<(usize, usize)> = (1..=outer.length())
        .flat_map(|r| {
            (inner.part(r) + 1..=outer.part(r))
                .rev()
                .map(move |c| (r, c))
        })
        .collect();
    let mut filling: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut counts = vec![0usize; content.length() + 1];

    fn go(
        k: usize,
        cells: &[(usize, usize)],
        inner: &Partition,
        content: &Partition,
        filling: &mut BTreeMap<(usize, usize), usize>,
        counts: &mut Vec<usize>,
    ) -> u64 {
        if k == cells.len() {
            return 1;
        }
        let (r, c) = cells[k];
        let max_right = filling.get(&(r, c + 1)).copied().unwrap_or(usize::MAX);
        let min_above = if r > 1 && c > inner.part(r - 1) {
            filling[&(r - 1, c)] + 1
        } else {
            1
        };
        let mut total = 0;
        for v in min_above..=content.length().min(max_right) {
            if counts[v] >= content.part(v) {
                continue;
            }
            if v > 1 && counts[v] + 1 > counts[v - 1] {
                continue;
            }
            counts[v] += 1;
            filling.insert((r, c), v);
            total += go(k + 1, cells, inner, content, filling, counts);
            filling.remove(&(r, c));
            counts[v] -= 1;
        }
        total
    }
    go(0, &cells, inner, content, &mut filling, &mut counts)
}

/// `S^λ ⊗ S^μ = ⊕ c^ν_{λμ} S^ν`.
pub fn littlewood_richardson(lambda: &Partition, mu: &Partition) -> DecompositionMultiset {
    let total = lambda.weight() + mu.weight();
    let mut d = DecompositionMultiset::new();
    for nu in Partition::all_of(total) {
        if nu.length() > lambda.length() + mu.length() || !nu.contains(lambda) {
            continue;
        }
        d.add(nu.clone(), lr_coefficient(&nu, lambda, mu));
    }
    d
}

/// `S^λ ⊗ S^k`: every `ν ⊇ λ` with `ν/λ` a horizontal strip of size `k`, once.
pub fn pieri(lambda: &Partition, k: usize) -> DecompositionMultiset {
    let mut d = DecompositionMultiset::new();
    for nu in Partition::all_of(lambda.weight() + k) {
        let horizontal = nu.contains(lambda)
            && (1..=nu.length()).all(|i| i == 1 || nu.part(i) <= lambda.part(i - 1));
        if horizontal {
            d.add(nu, 1);
        }
    }
    d
}

/// One graded piece `S^a(E_1) ⊗ S^b(E_2)` of `S^n(E_1 ⊕ E_2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CauchyPiece {
    pub a: usize,
    pub b: usize,
    pub dim: u128,
}

/// Pieces ordered by decreasing `a`.
pub fn cauchy_sum_decomposition(n: usize, e1: usize, e2: usize) -> Vec<CauchyPiece> {
    (0..=n)
        .rev()
        .map(|a| {
            let b = n - a;
            CauchyPiece {
                a,
                b,
                dim: schur_dim(&Partition::row(a), e1) * schur_dim(&Partition::row(b), e2),
            }
        })
        .collect()
}

/// Whether `S^λ(E)` is a summand of `S^{λ_1}(E) ⊗ … ⊗ S^{λ_r}(E)` for rank
/// `e`, found by iterating Pieri products over partitions of length `≤ e`.
/// Returns the exponents `(λ_1, …, λ_r)` as the witness.
pub fn summand_in_symmetric_product(lambda: &Partition, e: usize) -> Option<Vec<usize>> {
    if lambda.is_zero() {
        return Some(Vec::new());
    }
    let mut acc = DecompositionMultiset::new();
    acc.add(Partition::zero(), 1);
    for &k in lambda.parts() {
        let mut next = DecompositionMultiset::new();
        for (p, m) in acc.iter() {
            for (q, c) in pieri(p, k).iter() {
                if q.length() <= e {
                    next.add(q.clone(), m * c);
                }
            }
        }
        acc = next;
    }
    (acc.multiplicity(lambda) >= 1).then(|| lambda.parts().to_vec())
}

/// Coefficients of `s_λ(x_1, …, x_r)` in the monomial basis, by enumerating
/// semistandard tableaux with entries in `1..=r`.
pub fn monomial_expansion(lambda: &Partition, r: usize) -> BTreeMap<Vec<usize>, u64> {
    let mut out = BTreeMap::new();
    if lambda.length() > r {
        return out;
    }
    let cells: Vec<(usize, usize)> = lambda.cells().map(|c| (c.row, c.col)).collect();
    let mut filling: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut content = vec![0usize; r];

    fn go(
        k: usize,
        cells: &[(usize, usize)],
        r: usize,
        filling: &mut BTreeMap<(usize, usize), usize>,
        content: &mut Vec<usize>,
        out: &mut BTreeMap<Vec<usize>, u64>,
    ) {
        if k == cells.len() {
            *out.entry(content.clone()).or_insert(0) += 1;
            return;
        }
        let (row, col) = cells[k];
        let lo_left = filling
            .get(&(row, col.wrapping_sub(1)))
            .copied()
            .unwrap_or(1);
        let lo_above = filling
            .get(&(row.wrapping_sub(1), col))
            .map_or(1, |v| v + 1);
        for v in lo_left.max(lo_above)..=r {
            filling.insert((row, col), v);
            content[v - 1] += 1;
            go(k + 1, cells, r, filling, content, out);
            content[v - 1] -= 1;
            filling.remove(&(row, col));
        }
    }
    go(0, &cells, r, &mut filling, &mut content, &mut out);
    out
}

/// Rejects shapes that would not fit under the construction cap.
pub fn check_construction(shape: &Partition, e: usize, cap: u128) -> Result<()> {
    let dim = (e as u128)
        .checked_pow(shape.weight() as u32)
        .unwrap_or(u128::MAX);
    if dim > cap {
        return Err(Error::CapExceeded { dim, cap });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symalg::DEFAULT_TENSOR_CAP;
    use crate::Rational;
    use proptest::prelude::*;

    type Q = Rational;
    const CAP: u128 = DEFAULT_TENSOR_CAP;

    fn p(v: &[usize]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    fn qi(n: i64) -> Q {
        Q::from_ratio(n, 1)
    }

    fn dm(entries: &[(&[usize], u64)]) -> DecompositionMultiset {
        let mut d = DecompositionMultiset::new();
        for (k, m) in entries {
            d.add(p(k), *m);
        }
        d
    }

    #[test]
    fn closed_form_dimensions() {
        assert_eq!(schur_dim(&p(&[1]), 5), 5);
        assert_eq!(schur_dim(&p(&[1, 1, 1]), 2), 0);
        assert_eq!(schur_dim(&p(&[2, 1]), 3), 8);
        assert_eq!(schur_dim(&Partition::zero(), 3), 1);
    }

    #[test]
    fn explicit_constructions() {
        assert_eq!(schur_apply::<Q>(&p(&[2]), 2, CAP).unwrap().dim, 3);
        assert_eq!(schur_apply::<Q>(&p(&[1, 1]), 2, CAP).unwrap().dim, 1);
        assert_eq!(schur_apply::<Q>(&p(&[2, 1]), 2, CAP).unwrap().dim, 2);
        assert_eq!(schur_apply::<Q>(&p(&[2, 1]), 3, CAP).unwrap().dim, 8);
        assert_eq!(schur_quotient::<Q>(&p(&[2]), 2, CAP).unwrap(), 3);
        assert_eq!(schur_quotient::<Q>(&p(&[1, 1, 1]), 2, CAP).unwrap(), 0);
        assert_eq!(schur_quotient::<Q>(&p(&[2, 1]), 3, CAP).unwrap(), 8);
        assert!(matches!(
            schur_apply::<Q>(&p(&[3, 3]), 5, CAP),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn three_way_agreement() {
        for n in 1..=4 {
            for lam in Partition::all_of(n) {
                for e in 1..=3 {
                    let closed = schur_dim(&lam, e) as usize;
                    assert_eq!(
                        schur_apply::<Q>(&lam, e, CAP).unwrap().dim,
                        closed,
                        "{lam} {e}"
                    );
                    assert_eq!(
                        schur_quotient::<Q>(&lam, e, CAP).unwrap(),
                        closed,
                        "{lam} {e}"
                    );
                }
            }
        }
    }

    #[test]
    fn induced_maps() {
        for lam in [p(&[2]), p(&[1, 1]), p(&[2, 1])] {
            let id = schur_of_map::<Q>(&lam, &Matrix::identity(3), CAP).unwrap();
            assert!(id.is_identity());
            assert_eq!(id.rows() as u128, schur_dim(&lam, 3));
        }
        let surj =
            Matrix::from_rows(vec![vec![qi(1), qi(0), qi(1)], vec![qi(0), qi(1), qi(2)]]).unwrap();
        let s = schur_of_map::<Q>(&p(&[2]), &surj, CAP).unwrap();
        assert_eq!(s.rank(), 3);
        let two = Matrix::<Q>::identity(2).scale(&qi(2));
        let det = schur_of_map::<Q>(&p(&[1, 1]), &two, CAP).unwrap();
        assert_eq!(det, Matrix::from_rows(vec![vec![qi(4)]]).unwrap());
    }

    #[test]
    fn tensor_powers() {
        assert_eq!(
            tensor_power_multiplicities(2),
            dm(&[(&[2], 1), (&[1, 1], 1)])
        );
        assert_eq!(
            tensor_power_multiplicities(3),
            dm(&[(&[3], 1), (&[2, 1], 2), (&[1, 1, 1], 1)])
        );
        assert_eq!(tensor_power_multiplicities(3).total_dim(2), 8);
    }

    #[test]
    fn lr_examples() {
        let d = littlewood_richardson(&p(&[1]), &p(&[1]));
        assert_eq!(d, dm(&[(&[2], 1), (&[1, 1], 1)]));
        assert_eq!(d.to_string(), "(2):1 (1,1):1");
        assert_eq!(
            littlewood_richardson(&p(&[2, 1]), &p(&[1])),
            dm(&[(&[3, 1], 1), (&[2, 2], 1), (&[2, 1, 1], 1)])
        );
        // c^{(3,2,1)}_{(2,1),(2,1)} = 2 is the classic first multiplicity above one.
        assert_eq!(
            littlewood_richardson(&p(&[2, 1]), &p(&[2, 1])).multiplicity(&p(&[3, 2, 1])),
            2
        );
        let d = littlewood_richardson(&p(&[2, 1]), &p(&[1, 1]));
        assert_eq!(
            d.total_dim(3),
            schur_dim(&p(&[2, 1]), 3) * schur_dim(&p(&[1, 1]), 3)
        );
    }

    #[test]
    fn pieri_matches_lr() {
        for n in 0..=4 {
            for lam in Partition::all_of(n) {
                for k in 1..=3 {
                    assert_eq!(
                        pieri(&lam, k),
                        littlewood_richardson(&lam, &Partition::row(k))
                    );
                }
            }
        }
    }

    #[test]
    fn cauchy_pieces() {
        let dims: Vec<u128> = cauchy_sum_decomposition(2, 2, 2)
            .iter()
            .map(|c| c.dim)
            .collect();
        assert_eq!(dims, vec![3, 4, 3]);
        let dims: Vec<u128> = cauchy_sum_decomposition(1, 3, 5)
            .iter()
            .map(|c| c.dim)
            .collect();
        assert_eq!(dims, vec![3, 5]);
        assert_eq!(
            cauchy_sum_decomposition(0, 3, 5),
            vec![CauchyPiece { a: 0, b: 0, dim: 1 }]
        );
        for n in 0..=5 {
            let total: u128 = cauchy_sum_decomposition(n, 2, 3)
                .iter()
                .map(|c| c.dim)
                .sum();
            assert_eq!(total, schur_dim(&Partition::row(n), 5));
        }
    }

    #[test]
    fn symmetric_product_summands() {
        assert_eq!(
            summand_in_symmetric_product(&p(&[2, 1]), 3),
            Some(vec![2, 1])
        );
        assert_eq!(summand_in_symmetric_product(&p(&[4]), 1), Some(vec![4]));
        assert_eq!(
            summand_in_symmetric_product(&p(&[1, 1]), 2),
            Some(vec![1, 1])
        );
        assert_eq!(summand_in_symmetric_product(&p(&[1, 1, 1]), 2), None);
    }

    #[test]
    fn monomial_examples() {
        let m = monomial_expansion(&p(&[1]), 2);
        assert_eq!(m, BTreeMap::from([(vec![1, 0], 1), (vec![0, 1], 1)]));
        let m = monomial_expansion(&p(&[2]), 2);
        assert_eq!(
            m,
            BTreeMap::from([(vec![2, 0], 1), (vec![1, 1], 1), (vec![0, 2], 1)])
        );
        let m = monomial_expansion(&p(&[2, 1]), 2);
        assert_eq!(m, BTreeMap::from([(vec![2, 1], 1), (vec![1, 2], 1)]));
        assert!(monomial_expansion(&p(&[1, 1, 1]), 2).is_empty());
    }

    #[test]
    fn duality_count() {
        for n in 0..=6 {
            for e in 1..=5usize {
                let total = tensor_power_multiplicities(n).total_dim(e);
                assert_eq!(total, (e as u128).pow(n as u32));
            }
        }
    }

    fn arb_matrix(r: usize, c: usize) -> impl Strategy<Value = Matrix<Q>> {
        prop::collection::vec(-2i64..=2, r * c).prop_map(move |v| {
            Matrix::from_rows(
                v.chunks(c)
                    .map(|row| row.iter().map(|&x| qi(x)).collect())
                    .collect(),
            )
            .unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn functoriality(m in arb_matrix(2, 3), n in arb_matrix(3, 2), which in 0usize..4) {
            let lam = [p(&[2]), p(&[1, 1]), p(&[2, 1]), p(&[3])][which].clone();
            let mn = m.matmul(&n).unwrap();
            let lhs = schur_of_map(&lam, &mn, CAP).unwrap();
            let rhs = schur_of_map(&lam, &m, CAP).unwrap()
                .matmul(&schur_of_map(&lam, &n, CAP).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn monomial_sum_is_dimension(n in 0usize..6, r in 1usize..4) {
            for lam in Partition::all_of(n) {
                let total: u64 = monomial_expansion(&lam, r).values().sum();
                prop_assert_eq!(total as u128, schur_dim(&lam, r));
            }
        }
    }
}
