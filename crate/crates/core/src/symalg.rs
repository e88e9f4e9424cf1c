//! The rational group algebra of the symmetric group: permutations, Young
//! symmetrizers and their idempotent normalizations, and the right action of
//! `S_n` on the `n`-th tensor power of a coordinate space.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::partitions::Partition;
use crate::scalar::{factorial, parse_ratio, Field};

/// Default ceiling on `e^n` for explicit tensor-power constructions.
pub const DEFAULT_TENSOR_CAP: u128 = 4096;

/// Reads the construction cap from `GAD_MAX_TENSOR_DIM`, falling back to
/// [`DEFAULT_TENSOR_CAP`].
pub fn tensor_cap_from_env() -> u128 {
    std::env::var("GAD_MAX_TENSOR_DIM")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_TENSOR_CAP)
}

/// A bijection of `{1..n}`, stored 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n).collect(),
        }
    }

    /// From one-line notation, 1-based.
    pub fn from_one_line(images: &[usize]) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in images {
            if i == 0 || i > n || seen[i - 1] {
                return Err(Error::NotAPermutation(images.to_vec()));
            }
            seen[i - 1] = true;
        }
        Ok(Permutation {
            images: images.iter().map(|i| i - 1).collect(),
        })
    }

    /// The transposition of `a` and `b` (1-based) in `S_n`.
    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut p = Self::identity(n);
        p.images.swap(a - 1, b - 1);
        p
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    /// Image of `i`, 0-based.
    pub fn image(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn one_line(&self) -> Vec<usize> {
        self.images.iter().map(|i| i + 1).collect()
    }

    /// `(self · other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.degree(), other.degree());
        Permutation {
            images: other.images.iter().map(|&i| self.images[i]).collect(),
        }
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.degree()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j] = i;
        }
        Permutation { images: inv }
    }

    pub fn inversions(&self) -> usize {
        let n = self.degree();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.images[i] > self.images[j])
            .count()
    }

    pub fn sign(&self) -> i64 {
        if self.inversions().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    pub fn all(n: usize) -> Vec<Permutation> {
        fn go(n: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Permutation>) {
            if cur.len() == n {
                out.push(Permutation {
                    images: cur.clone(),
                });
                return;
            }
            for i in 0..n {
                if !used[i] {
                    used[i] = true;
                    cur.push(i);
                    go(n, cur, used, out);
                    cur.pop();
                    used[i] = false;
                }
            }
        }
        let mut out = Vec::new();
        go(n, &mut Vec::new(), &mut vec![false; n], &mut out);
        out
    }

    /// All permutations that map each block of `blocks` (0-based labels) to itself.
    pub fn stabilizing(n: usize, blocks: &[Vec<usize>]) -> Vec<Permutation> {
        let mut out = vec![Permutation::identity(n)];
        for block in blocks {
            let block_perms = Permutation::all(block.len());
            let mut next = Vec::with_capacity(out.len() * block_perms.len());
            for base in &out {
                for bp in &block_perms {
                    let mut images = base.images.clone();
                    for (k, &label) in block.iter().enumerate() {
                        images[label] = block[bp.images[k]];
                    }
                    next.push(Permutation { images });
                }
            }
            out = next;
        }
        out
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.one_line().iter().map(|i| i.to_string()).collect();
        f.write_str(&s.join(","))
    }
}

impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let images = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad permutation entry {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Permutation::from_one_line(&images)
    }
}

/// A formal `S`-linear combination of permutations of a fixed degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupAlgebraElement<S> {
    degree: usize,
    terms: BTreeMap<Permutation, S>,
}

impl<S: Field> GroupAlgebraElement<S> {
    pub fn zero(degree: usize) -> Self {
        GroupAlgebraElement {
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(degree: usize) -> Self {
        Self::from_perm(Permutation::identity(degree), S::one())
    }

    pub fn from_perm(p: Permutation, c: S) -> Self {
        let mut x = Self::zero(p.degree());
        x.add_term(p, c);
        x
    }

    pub fn from_terms(
        degree: usize,
        terms: impl IntoIterator<Item = (Permutation, S)>,
    ) -> Result<Self> {
        let mut x = Self::zero(degree);
        for (p, c) in terms {
            if p.degree() != degree {
                return Err(Error::DegreeMismatch {
                    expected: degree,
                    found: p.degree(),
                });
            }
            x.add_term(p, c);
        }
        Ok(x)
    }

    fn add_term(&mut self, p: Permutation, c: S) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(p);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Permutation, &S)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, p: &Permutation) -> S {
        self.terms.get(p).cloned().unwrap_or_else(S::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut x = Self::zero(self.degree);
        for (p, c) in &self.terms {
            x.add_term(p.clone(), c.clone() * s.clone());
        }
        x
    }

    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                found: other.degree,
            });
        }
        let mut x = Self::zero(self.degree);
        for (p, a) in &self.terms {
            for (q, b) in &other.terms {
                x.add_term(p.compose(q), a.clone() * b.clone());
            }
        }
        Ok(x)
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                found: other.degree,
            });
        }
        let mut x = self.clone();
        for (p, c) in &other.terms {
            x.add_term(p.clone(), c.clone());
        }
        Ok(x)
    }

    /// JSON object from one-line notation to `"p/q"` strings.
    pub fn to_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .terms
            .iter()
            .map(|(p, c)| {
                (
                    p.to_string(),
                    serde_json::Value::String(c.to_ratio_string()),
                )
            })
            .collect();
        serde_json::Value::Object(map)
    }

    pub fn from_json(degree: usize, v: &serde_json::Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Parse("group algebra element must be an object".into()))?;
        let mut terms = Vec::new();
        for (k, c) in obj {
            let p: Permutation = k.parse()?;
            let c = c
                .as_str()
                .and_then(parse_ratio::<S>)
                .ok_or_else(|| Error::Parse(format!("bad coefficient for {k}")))?;
            terms.push((p, c));
        }
        Self::from_terms(degree, terms)
    }
}

impl<S: Field> Add for &GroupAlgebraElement<S> {
    type Output = GroupAlgebraElement<S>;

    fn add(self, rhs: Self) -> GroupAlgebraElement<S> {
        self.sum(rhs).expect("degree mismatch")
    }
}

impl<S: Field> Sub for &GroupAlgebraElement<S> {
    type Output = GroupAlgebraElement<S>;

    fn sub(self, rhs: Self) -> GroupAlgebraElement<S> {
        self.sum(&-rhs).expect("degree mismatch")
    }
}

impl<S: Field> Neg for &GroupAlgebraElement<S> {
    type Output = GroupAlgebraElement<S>;

    fn neg(self) -> GroupAlgebraElement<S> {
        self.scale(&-S::one())
    }
}

impl<S: Field> Mul for &GroupAlgebraElement<S> {
    type Output = GroupAlgebraElement<S>;

    fn mul(self, rhs: Self) -> GroupAlgebraElement<S> {
        self.product(rhs).expect("degree mismatch")
    }
}

impl<S: Field> fmt::Display for GroupAlgebraElement<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(p, c)| format!("{c}·[{p}]"))
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// A filling of a Young diagram by `1..=|λ|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct YoungTableau {
    shape: Partition,
    rows: Vec<Vec<usize>>,
}

impl YoungTableau {
    /// Row-major filling: left to right, top to bottom.
    pub fn canonical(shape: &Partition) -> Self {
        let mut next = 1;
        let rows = shape
            .parts()
            .iter()
            .map(|&len| {
                let row: Vec<usize> = (next..next + len).collect();
                next += len;
                row
            })
            .collect();
        YoungTableau {
            shape: shape.clone(),
            rows,
        }
    }

    pub fn shape(&self) -> &Partition {
        &self.shape
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn columns(&self) -> Vec<Vec<usize>> {
        let width = self.shape.part(1);
        (0..width)
            .map(|c| {
                self.rows
                    .iter()
                    .take_while(|r| r.len() > c)
                    .map(|r| r[c])
                    .collect()
            })
            .collect()
    }

    fn zero_based(blocks: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
        blocks
            .into_iter()
            .map(|b| b.into_iter().map(|l| l - 1).collect())
            .collect()
    }

    pub fn row_group(&self) -> Vec<Permutation> {
        Permutation::stabilizing(self.shape.weight(), &Self::zero_based(self.rows.clone()))
    }

    pub fn column_group(&self) -> Vec<Permutation> {
        Permutation::stabilizing(self.shape.weight(), &Self::zero_based(self.columns()))
    }
}

/// `a_T`: the sum of all row-preserving permutations.
pub fn row_symmetrizer<S: Field>(t: &YoungTableau) -> GroupAlgebraElement<S> {
    let n = t.shape().weight();
    GroupAlgebraElement::from_terms(n, t.row_group().into_iter().map(|p| (p, S::one())))
        .expect("row group lives in S_n")
}

/// `b_T`: the signed sum of all column-preserving permutations.
pub fn column_antisymmetrizer<S: Field>(t: &YoungTableau) -> GroupAlgebraElement<S> {
    let n = t.shape().weight();
    GroupAlgebraElement::from_terms(
        n,
        t.column_group().into_iter().map(|p| {
            let s = S::from_i64(p.sign()).expect("sign");
            (p, s)
        }),
    )
    .expect("column group lives in S_n")
}

/// `e_λ = (f^λ / |λ|!) · a_T · b_T` on the canonical tableau.
pub fn young_idempotent<S: Field>(shape: &Partition) -> Result<GroupAlgebraElement<S>> {
    if shape.is_zero() {
        return Err(Error::ZeroPartition("young_idempotent"));
    }
    let t = YoungTableau::canonical(shape);
    let c = row_symmetrizer::<S>(&t).product(&column_antisymmetrizer(&t))?;
    let f = S::from_u128(shape.num_standard_tableaux()).expect("f fits");
    let norm = f / factorial::<S>(shape.weight());
    Ok(c.scale(&norm))
}

/// Index of the word `(i_1, …, i_n)` in the lexicographic tensor basis.
fn word_index(word: &[usize], e: usize) -> usize {
    word.iter().fold(0, |acc, &i| acc * e + i)
}

fn index_word(mut idx: usize, e: usize, n: usize) -> Vec<usize> {
    let mut w = vec![0; n];
    for k in (0..n).rev() {
        w[k] = idx % e;
        idx /= e;
    }
    w
}

/// `(i_1, …, i_n)·σ = (i_{σ(1)}, …, i_{σ(n)})`.
fn act_on_word(word: &[usize], p: &Permutation) -> Vec<usize> {
    (0..word.len()).map(|k| word[p.image(k)]).collect()
}

fn check_cap(e: usize, n: usize, cap: u128) -> Result<usize> {
    let dim = (e as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if dim > cap {
        return Err(Error::CapExceeded { dim, cap });
    }
    Ok(dim as usize)
}

/// The `e^n × e^n` matrix of the right action of `x ∈ S[S_n]` on `(S^e)^{⊗n}`,
/// in the lexicographic tensor basis (column `j` is the image of basis vector `j`).
pub fn act_on_tensor_power<S: Field>(
    x: &GroupAlgebraElement<S>,
    e: usize,
    n: usize,
    cap: u128,
) -> Result<Matrix<S>> {
    if x.degree() != n {
        return Err(Error::DegreeMismatch {
            expected: n,
            found: x.degree(),
        });
    }
    let dim = check_cap(e, n, cap)?;
    let mut m = Matrix::zeros(dim, dim);
    for j in 0..dim {
        let w = index_word(j, e, n);
        for (p, c) in x.terms() {
            let i = word_index(&act_on_word(&w, p), e);
            m[(i, j)] += c.clone();
        }
    }
    Ok(m)
}

/// The action restricted to each weight space of the tensor power. The
/// permutation action preserves the multiset of letters in a word, so the
/// full matrix is block diagonal with one block per content vector.
pub struct WeightBlock<S> {
    pub words: Vec<usize>,
    pub matrix: Matrix<S>,
}

pub fn weight_blocks<S: Field>(
    x: &GroupAlgebraElement<S>,
    e: usize,
    n: usize,
    cap: u128,
) -> Result<Vec<WeightBlock<S>>> {
    if x.degree() != n {
        return Err(Error::DegreeMismatch {
            expected: n,
            found: x.degree(),
        });
    }
    let dim = check_cap(e, n, cap)?;
    let mut by_content: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for j in 0..dim {
        let w = index_word(j, e, n);
        let mut content = vec![0; e];
        for &l in &w {
            content[l] += 1;
        }
        by_content.entry(content).or_default().push(j);
    }
    let mut blocks = Vec::with_capacity(by_content.len());
    for words in by_content.into_values() {
        let pos: HashMap<usize, usize> = words.iter().enumerate().map(|(k, &w)| (w, k)).collect();
        let mut m = Matrix::zeros(words.len(), words.len());
        for (col, &j) in words.iter().enumerate() {
            let w = index_word(j, e, n);
            for (p, c) in x.terms() {
                let row = pos[&word_index(&act_on_word(&w, p), e)];
                m[(row, col)] += c.clone();
            }
        }
        blocks.push(WeightBlock { words, matrix: m });
    }
    Ok(blocks)
}

/// Rank of the tensor action, computed block by block.
pub fn action_rank<S: Field>(
    x: &GroupAlgebraElement<S>,
    e: usize,
    n: usize,
    cap: u128,
) -> Result<usize> {
    Ok(weight_blocks(x, e, n, cap)?
        .iter()
        .map(|b| b.matrix.rank())
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use proptest::prelude::*;

    type Q = Rational;

    fn p(v: &[usize]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    fn perm(v: &[usize]) -> Permutation {
        Permutation::from_one_line(v).unwrap()
    }

    fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    #[test]
    fn canonical_tableaux() {
        assert_eq!(
            YoungTableau::canonical(&p(&[2, 1])).rows(),
            &[vec![1, 2], vec![3]]
        );
        assert_eq!(YoungTableau::canonical(&p(&[3])).rows(), &[vec![1, 2, 3]]);
        assert_eq!(
            YoungTableau::canonical(&p(&[1, 1])).rows(),
            &[vec![1], vec![2]]
        );
    }

    #[test]
    fn symmetrizers() {
        let t2 = YoungTableau::canonical(&p(&[2]));
        let t11 = YoungTableau::canonical(&p(&[1, 1]));
        let t21 = YoungTableau::canonical(&p(&[2, 1]));

        let id2 = GroupAlgebraElement::<Q>::one(2);
        let sw = GroupAlgebraElement::from_perm(perm(&[2, 1]), Q::from_ratio(1, 1));
        assert_eq!(row_symmetrizer::<Q>(&t2), &id2 + &sw);
        assert_eq!(row_symmetrizer::<Q>(&t11), id2.clone());
        assert_eq!(column_antisymmetrizer::<Q>(&t11), &id2 - &sw);
        assert_eq!(column_antisymmetrizer::<Q>(&t2), id2);

        let id3 = GroupAlgebraElement::<Q>::one(3);
        let s12 = GroupAlgebraElement::from_perm(Permutation::transposition(3, 1, 2), q(1, 1));
        let s13 = GroupAlgebraElement::from_perm(Permutation::transposition(3, 1, 3), q(1, 1));
        assert_eq!(row_symmetrizer::<Q>(&t21), &id3 + &s12);
        assert_eq!(column_antisymmetrizer::<Q>(&t21), &id3 - &s13);
    }

    #[test]
    fn small_idempotents() {
        let e2 = young_idempotent::<Q>(&p(&[2])).unwrap();
        assert_eq!(e2.coefficient(&Permutation::identity(2)), q(1, 2));
        assert_eq!(e2.coefficient(&perm(&[2, 1])), q(1, 2));
        let e11 = young_idempotent::<Q>(&p(&[1, 1])).unwrap();
        assert_eq!(e11.coefficient(&perm(&[2, 1])), q(-1, 2));

        // (1/3)(id + (1 2))(id − (1 3)) multiplied out by hand in S_3.
        let id3 = GroupAlgebraElement::<Q>::one(3);
        let s12 = GroupAlgebraElement::from_perm(Permutation::transposition(3, 1, 2), q(1, 1));
        let s13 = GroupAlgebraElement::from_perm(Permutation::transposition(3, 1, 3), q(1, 1));
        let by_hand = (&(&id3 + &s12) * &(&id3 - &s13)).scale(&q(1, 3));
        let e21 = young_idempotent::<Q>(&p(&[2, 1])).unwrap();
        assert_eq!(e21, by_hand);
        assert_eq!(&e21 * &e21, e21);
        assert!(young_idempotent::<Q>(&Partition::zero()).is_err());
    }

    #[test]
    fn idempotent_up_to_five() {
        for n in 1..=5 {
            for lam in Partition::all_of(n) {
                let e = young_idempotent::<Q>(&lam).unwrap();
                assert_eq!(&e * &e, e, "{lam}");
            }
        }
    }

    #[test]
    fn tensor_action_examples() {
        let id = GroupAlgebraElement::<Q>::one(3);
        assert!(act_on_tensor_power(&id, 2, 3, DEFAULT_TENSOR_CAP)
            .unwrap()
            .is_identity());

        let sw = GroupAlgebraElement::from_perm(perm(&[2, 1]), q(1, 1));
        let m = act_on_tensor_power(&sw, 2, 2, DEFAULT_TENSOR_CAP).unwrap();
        let expect = Matrix::from_rows(vec![
            vec![q(1, 1), q(0, 1), q(0, 1), q(0, 1)],
            vec![q(0, 1), q(0, 1), q(1, 1), q(0, 1)],
            vec![q(0, 1), q(1, 1), q(0, 1), q(0, 1)],
            vec![q(0, 1), q(0, 1), q(0, 1), q(1, 1)],
        ])
        .unwrap();
        assert_eq!(m, expect);

        let e11 = young_idempotent::<Q>(&p(&[1, 1])).unwrap();
        let proj = act_on_tensor_power(&e11, 2, 2, DEFAULT_TENSOR_CAP).unwrap();
        assert_eq!(proj.rank(), 1);
        assert_eq!(&proj * &proj, proj);

        assert!(act_on_tensor_power(&id, 2, 2, DEFAULT_TENSOR_CAP).is_err());
        assert!(matches!(
            act_on_tensor_power(&GroupAlgebraElement::<Q>::one(7), 4, 7, DEFAULT_TENSOR_CAP),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn block_rank_matches_dense_rank() {
        for n in 1..=3 {
            for lam in Partition::all_of(n) {
                let e = young_idempotent::<Q>(&lam).unwrap();
                for dim in 1..=3 {
                    let dense = act_on_tensor_power(&e, dim, n, DEFAULT_TENSOR_CAP)
                        .unwrap()
                        .rank();
                    assert_eq!(action_rank(&e, dim, n, DEFAULT_TENSOR_CAP).unwrap(), dense);
                }
            }
        }
    }

    #[test]
    fn projector_ranks_split() {
        for n in 1..=4 {
            for lam in Partition::all_of(n) {
                let e = young_idempotent::<Q>(&lam).unwrap();
                let comp = &GroupAlgebraElement::one(n) - &e;
                for dim in 1..=4usize {
                    let r1 = action_rank(&e, dim, n, DEFAULT_TENSOR_CAP).unwrap();
                    let r2 = action_rank(&comp, dim, n, DEFAULT_TENSOR_CAP).unwrap();
                    assert_eq!(r1 + r2, dim.pow(n as u32), "{lam} e={dim}");
                }
            }
        }
    }

    #[test]
    fn json_form() {
        let e = young_idempotent::<Q>(&p(&[1, 1])).unwrap();
        let j = e.to_json();
        assert_eq!(j["1,2"], "1/2");
        assert_eq!(j["2,1"], "-1/2");
        assert_eq!(GroupAlgebraElement::<Q>::from_json(2, &j).unwrap(), e);
    }

    fn arb_element(n: usize) -> impl Strategy<Value = GroupAlgebraElement<Q>> {
        let perms = Permutation::all(n);
        prop::collection::vec((0..perms.len(), -3i64..=3, 1i64..=3), 0..5).prop_map(move |ts| {
            GroupAlgebraElement::from_terms(
                n,
                ts.into_iter()
                    .map(|(k, a, b)| (perms[k].clone(), Q::from_ratio(a, b))),
            )
            .unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn algebra_laws((x, y, z) in (1usize..=5).prop_flat_map(|n| (arb_element(n), arb_element(n), arb_element(n)))) {
            prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
            prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        }

        #[test]
        fn right_action_homomorphism(x in arb_element(3), y in arb_element(3)) {
            let ax = act_on_tensor_power(&x, 2, 3, DEFAULT_TENSOR_CAP).unwrap();
            let ay = act_on_tensor_power(&y, 2, 3, DEFAULT_TENSOR_CAP).unwrap();
            let axy = act_on_tensor_power(&(&x * &y), 2, 3, DEFAULT_TENSOR_CAP).unwrap();
            prop_assert_eq!(axy, &ay * &ax);
        }
    }
}
