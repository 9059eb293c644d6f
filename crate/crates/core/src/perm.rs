//! Permutations of `[1..n]` in the classical vector representation.
//!
//! A [`Permutation`] stores `(σ(1), …, σ(n))`. Positions and values are
//! 1-based everywhere in the public API. Elementary moves act on positions,
//! i.e. they are right-compositions `σ ∘ m` of the move `m` onto `σ`.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A bijection of `[1..n]`, `n ≥ 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Permutation {
    // values[k] holds σ(k + 1)
    values: Vec<u32>,
}

/// Elementary move family used by the permutation mutation operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MoveScheme {
    /// Exchange the values at two distinct positions.
    Transposition,
    /// Exchange the values at positions `i` and `i + 1`.
    AdjacentSwap,
    /// `jump(i, j)`: move the value at position `i` to position `j`.
    Insertion,
}

impl FromStr for MoveScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "transposition" => Ok(MoveScheme::Transposition),
            "adjacent-swap" => Ok(MoveScheme::AdjacentSwap),
            "insertion" | "jump" => Ok(MoveScheme::Insertion),
            other => Err(Error::invalid(format!("unknown move scheme `{other}`"))),
        }
    }
}

impl Permutation {
    /// Validates `values` as a permutation of `[1..values.len()]`.
    pub fn new(values: Vec<u32>) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::invalid("permutation must have at least one element"));
        }
        let mut seen = vec![false; n];
        for &v in &values {
            let v = v as usize;
            if v == 0 || v > n {
                return Err(Error::invalid(format!("value {v} outside [1..{n}]")));
            }
            if std::mem::replace(&mut seen[v - 1], true) {
                return Err(Error::invalid(format!("value {v} occurs twice")));
            }
        }
        Ok(Permutation { values })
    }

    pub(crate) fn from_vec_unchecked(values: Vec<u32>) -> Self {
        debug_assert!(Permutation::new(values.clone()).is_ok());
        Permutation { values }
    }

    /// Overwrites the values with another permutation of the same size.
    pub(crate) fn set_values_unchecked(&mut self, values: &[u32]) {
        self.values.copy_from_slice(values);
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "permutation size must be positive");
        Permutation {
            values: (1..=n as u32).collect(),
        }
    }

    /// Reversal `(n, n-1, …, 1)`.
    pub fn reversed(n: usize) -> Self {
        assert!(n >= 1, "permutation size must be positive");
        Permutation {
            values: (1..=n as u32).rev().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `σ(i)` for a 1-based position `i`.
    pub fn get(&self, i: usize) -> u32 {
        self.values[i - 1]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<u32> {
        self.values
    }

    pub fn is_identity(&self) -> bool {
        self.values.iter().enumerate().all(|(k, &v)| v as usize == k + 1)
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u32; self.len()];
        for (k, &v) in self.values.iter().enumerate() {
            inv[v as usize - 1] = k as u32 + 1;
        }
        Permutation { values: inv }
    }

    /// Number of inversions, counted with a merge sort in `O(n log n)`.
    pub fn inversions(&self) -> u64 {
        let mut buf = self.values.clone();
        let mut scratch = vec![0u32; buf.len()];
        merge_count(&mut buf, &mut scratch)
    }

    pub fn apply_adjacent_swap(&self, i: usize) -> Result<Permutation> {
        let n = self.len();
        if i == 0 || i >= n {
            return Err(Error::invalid(format!(
                "adjacent swap index {i} outside [1..{}]",
                n.saturating_sub(1)
            )));
        }
        let mut values = self.values.clone();
        values.swap(i - 1, i);
        Ok(Permutation { values })
    }

    pub fn apply_jump(&self, i: usize, j: usize) -> Result<Permutation> {
        self.check_pair(i, j)?;
        let mut values = self.values.clone();
        jump_in_place(&mut values, i - 1, j - 1);
        Ok(Permutation { values })
    }

    pub fn apply_transposition(&self, i: usize, j: usize) -> Result<Permutation> {
        self.check_pair(i, j)?;
        let mut values = self.values.clone();
        values.swap(i - 1, j - 1);
        Ok(Permutation { values })
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        let n = self.len();
        if i == 0 || j == 0 || i > n || j > n {
            return Err(Error::invalid(format!("positions ({i}, {j}) outside [1..{n}]")));
        }
        if i == j {
            return Err(Error::invalid(format!("positions must differ, got ({i}, {i})")));
        }
        Ok(())
    }
}

/// `(τ ∘ σ)(i) = τ(σ(i))`.
pub fn compose(tau: &Permutation, sigma: &Permutation) -> Result<Permutation> {
    if tau.len() != sigma.len() {
        return Err(Error::invalid(format!(
            "cannot compose permutations of sizes {} and {}",
            tau.len(),
            sigma.len()
        )));
    }
    let values = sigma
        .values
        .iter()
        .map(|&s| tau.values[s as usize - 1])
        .collect();
    Ok(Permutation { values })
}

/// Applies `k` independently and uniformly sampled moves of `scheme`
/// to `sigma`, left to right.
pub fn mutate_permutation<R: Rng + ?Sized>(
    sigma: &Permutation,
    scheme: MoveScheme,
    k: usize,
    rng: &mut R,
) -> Permutation {
    let mut values = sigma.values.clone();
    for _ in 0..k {
        apply_random_move(&mut values, scheme, rng);
    }
    Permutation { values }
}

/// Fisher–Yates sample from the uniform distribution on `S_n`.
pub fn sample_uniform_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Permutation {
    assert!(n >= 1, "permutation size must be positive");
    let mut values: Vec<u32> = (1..=n as u32).collect();
    values.shuffle(rng);
    Permutation { values }
}

/// One uniformly random elementary move applied in place to 0-based storage.
///
/// Transpositions draw an unordered pair uniformly, jumps an ordered pair
/// `(i, j)`, `i ≠ j`, uniformly. Sizes below 2 admit no move and are left
/// untouched.
pub(crate) fn apply_random_move<R: Rng + ?Sized>(values: &mut [u32], scheme: MoveScheme, rng: &mut R) {
    let n = values.len();
    if n < 2 {
        return;
    }
    match scheme {
        MoveScheme::AdjacentSwap => {
            let i = rng.gen_range(0..n - 1);
            values.swap(i, i + 1);
        }
        MoveScheme::Transposition => {
            let (i, j) = distinct_pair(n, rng);
            values.swap(i, j);
        }
        MoveScheme::Insertion => {
            let (i, j) = distinct_pair(n, rng);
            jump_in_place(values, i, j);
        }
    }
}

fn distinct_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let i = rng.gen_range(0..n);
    let mut j = rng.gen_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    (i, j)
}

/// 0-based jump: the value at `i` lands at `j`, the values in between shift
/// one place towards `i`.
pub(crate) fn jump_in_place(values: &mut [u32], i: usize, j: usize) {
    if i < j {
        values[i..=j].rotate_left(1);
    } else if j < i {
        values[j..=i].rotate_right(1);
    }
}

fn merge_count(buf: &mut [u32], scratch: &mut [u32]) -> u64 {
    let n = buf.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = {
        let (left, right) = buf.split_at_mut(mid);
        let (sl, sr) = scratch.split_at_mut(mid);
        merge_count(left, sl) + merge_count(right, sr)
    };
    let (mut a, mut b, mut out) = (0, mid, 0);
    while a < mid && b < n {
        if buf[a] <= buf[b] {
            scratch[out] = buf[a];
            a += 1;
        } else {
            scratch[out] = buf[b];
            b += 1;
            count += (mid - a) as u64;
        }
        out += 1;
    }
    scratch[out..out + mid - a].copy_from_slice(&buf[a..mid]);
    out += mid - a;
    scratch[out..out + n - b].copy_from_slice(&buf[b..n]);
    buf.copy_from_slice(&scratch[..n]);
    count
}

impl TryFrom<Vec<u32>> for Permutation {
    type Error = Error;

    fn try_from(values: Vec<u32>) -> Result<Self> {
        Permutation::new(values)
    }
}

impl From<Permutation> for Vec<u32> {
    fn from(p: Permutation) -> Self {
        p.values
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_joined(f, &self.values)
    }
}

/// Parses a comma-separated literal such as `3,5,4,1,2`.
impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Permutation::new(parse_u32_list(s)?)
    }
}

pub(crate) fn parse_u32_list(s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .map(|tok| {
            let tok = tok.trim();
            tok.parse::<u32>()
                .map_err(|_| Error::invalid(format!("`{tok}` is not a non-negative integer")))
        })
        .collect()
}

pub(crate) fn write_joined(f: &mut fmt::Formatter<'_>, values: &[u32]) -> fmt::Result {
    for (k, v) in values.iter().enumerate() {
        if k > 0 {
            f.write_str(",")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(v: &[u32]) -> Permutation {
        Permutation::new(v.to_vec()).unwrap()
    }

    fn naive_inversions(values: &[u32]) -> u64 {
        let mut c = 0;
        for i in 0..values.len() {
            for j in i + 1..values.len() {
                if values[i] > values[j] {
                    c += 1;
                }
            }
        }
        c
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::new(vec![]).is_err());
        assert!(Permutation::new(vec![1, 1]).is_err());
        assert!(Permutation::new(vec![0, 1]).is_err());
        assert!(Permutation::new(vec![1, 3]).is_err());
        assert!("3,1,2".parse::<Permutation>().is_ok());
        assert!("3,x,2".parse::<Permutation>().is_err());
    }

    #[test]
    fn compose_examples() {
        let sigma = p(&[3, 1, 2]);
        assert_eq!(compose(&Permutation::identity(3), &sigma).unwrap(), sigma);
        let t = p(&[2, 3, 1]);
        assert_eq!(compose(&t, &t).unwrap(), p(&[3, 1, 2]));
        assert!(compose(&Permutation::identity(2), &sigma).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let s = sample_uniform_permutation(6, &mut rng);
            assert!(compose(&s, &s.inverse()).unwrap().is_identity());
        }
    }

    #[test]
    fn inversion_examples() {
        assert_eq!(Permutation::identity(5).inversions(), 0);
        assert_eq!(p(&[5, 4, 3, 2, 1]).inversions(), 10);
        assert_eq!(p(&[3, 5, 4, 1, 2]).inversions(), 7);
    }

    #[test]
    fn merge_count_matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let n = rng.gen_range(1..=200);
            let s = sample_uniform_permutation(n, &mut rng);
            assert_eq!(s.inversions(), naive_inversions(s.as_slice()));
        }
    }

    #[test]
    fn adjacent_swap_examples() {
        assert_eq!(p(&[1, 2, 3]).apply_adjacent_swap(1).unwrap(), p(&[2, 1, 3]));
        assert_eq!(
            p(&[3, 5, 4, 1, 2]).apply_adjacent_swap(1).unwrap(),
            p(&[5, 3, 4, 1, 2])
        );
        assert!(p(&[1, 2, 3]).apply_adjacent_swap(0).is_err());
        assert!(p(&[1, 2, 3]).apply_adjacent_swap(3).is_err());
    }

    #[test]
    fn adjacent_swap_changes_inversions_by_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let s = sample_uniform_permutation(20, &mut rng);
            let i = rng.gen_range(1..20);
            let t = s.apply_adjacent_swap(i).unwrap();
            let diff = t.inversions() as i64 - s.inversions() as i64;
            assert!(diff == 1 || diff == -1);
        }
    }

    #[test]
    fn jump_examples() {
        let id = Permutation::identity(4);
        assert_eq!(id.apply_jump(1, 3).unwrap(), p(&[2, 3, 1, 4]));
        assert_eq!(id.apply_jump(3, 1).unwrap(), p(&[3, 1, 2, 4]));
        assert!(id.apply_jump(2, 2).is_err());
        assert!(id.apply_jump(0, 2).is_err());
        assert!(id.apply_jump(1, 5).is_err());
    }

    #[test]
    fn transposition_examples() {
        let id = Permutation::identity(4);
        assert_eq!(id.apply_transposition(1, 4).unwrap(), p(&[4, 2, 3, 1]));
        assert!(id.apply_transposition(3, 3).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let s = sample_uniform_permutation(8, &mut rng);
            let i = rng.gen_range(1..=8);
            let j = (i % 8) + 1;
            let back = s
                .apply_transposition(i, j)
                .unwrap()
                .apply_transposition(i, j)
                .unwrap();
            assert_eq!(back, s);
        }
    }

    #[test]
    fn zero_moves_is_identity_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = sample_uniform_permutation(9, &mut rng);
        for scheme in [MoveScheme::Transposition, MoveScheme::AdjacentSwap, MoveScheme::Insertion] {
            assert_eq!(mutate_permutation(&s, scheme, 0, &mut rng), s);
        }
    }

    #[test]
    fn one_adjacent_swap_from_identity_has_one_inversion() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let t = mutate_permutation(&Permutation::identity(7), MoveScheme::AdjacentSwap, 1, &mut rng);
            assert_eq!(t.inversions(), 1);
        }
    }

    #[test]
    fn moves_preserve_bijection() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut s = sample_uniform_permutation(30, &mut rng);
        for step in 0..10_000 {
            let scheme = [MoveScheme::Transposition, MoveScheme::AdjacentSwap, MoveScheme::Insertion][step % 3];
            s = mutate_permutation(&s, scheme, 1, &mut rng);
            assert!(Permutation::new(s.as_slice().to_vec()).is_ok());
        }
    }

    #[test]
    fn singleton_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10 {
            assert_eq!(sample_uniform_permutation(1, &mut rng), Permutation::identity(1));
        }
        let big = sample_uniform_permutation(100, &mut rng);
        assert!(Permutation::new(big.into_vec()).is_ok());
    }

    #[test]
    fn serde_validates() {
        let s: Permutation = serde_json::from_str("[2,1,3]").unwrap();
        assert_eq!(s, p(&[2, 1, 3]));
        assert!(serde_json::from_str::<Permutation>("[2,2,3]").is_err());
    }
}
