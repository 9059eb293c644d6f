//! Lehmer codes (inversion vectors) and the search operators defined on them.
//!
//! The code of `σ ∈ S_n` has one entry per label `i ∈ [n..1]`; the entry at
//! label `n - p + 1` counts the positions after `p` holding a smaller value.
//! Label `i` ranges over `[0..i-1]`, so label 1 is always zero and is not
//! stored. Entries are kept label-descending: `entries()[0]` is label `n`,
//! which is also the entry of permutation position 1.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{parse_u32_list, write_joined, Permutation};

/// An element of `L_n = [n] × [n-1] × ⋯ × [2]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LehmerCode {
    entries: Vec<u32>,
}

impl LehmerCode {
    /// Builds a code from label-descending entries (label `n` first).
    pub fn new(n: usize, entries: Vec<u32>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("Lehmer code size must be positive"));
        }
        if entries.len() != n - 1 {
            return Err(Error::invalid(format!(
                "a code for n = {n} has {} entries, got {}",
                n - 1,
                entries.len()
            )));
        }
        for (k, &e) in entries.iter().enumerate() {
            let label = n - k;
            if e as usize >= label {
                return Err(Error::invalid(format!(
                    "entry {e} at label {label} outside [0..{}]",
                    label - 1
                )));
            }
        }
        Ok(LehmerCode { entries })
    }

    pub fn zero(n: usize) -> Self {
        assert!(n >= 1, "Lehmer code size must be positive");
        LehmerCode {
            entries: vec![0; n - 1],
        }
    }

    /// The code of the reversal, `i - 1` at every label `i`.
    pub fn max(n: usize) -> Self {
        assert!(n >= 1, "Lehmer code size must be positive");
        LehmerCode {
            entries: (1..n as u32).rev().collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.entries.len() + 1
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub(crate) fn entries_mut(&mut self) -> &mut [u32] {
        &mut self.entries
    }

    /// Entry at `label ∈ [2..n]`; label 1 reads as zero.
    pub fn at_label(&self, label: usize) -> u32 {
        let n = self.n();
        assert!((1..=n).contains(&label), "label {label} outside [1..{n}]");
        if label == 1 {
            0
        } else {
            self.entries[n - label]
        }
    }

    /// Entry belonging to permutation position `i ∈ [1..n]`, i.e. label `n - i + 1`.
    pub fn at_position(&self, i: usize) -> u32 {
        self.at_label(self.n() + 1 - i)
    }

    pub fn sum(&self) -> u64 {
        self.entries.iter().map(|&e| e as u64).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    /// Independent uniform draws per label; uniform on `L_n`.
    pub fn sample_uniform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        assert!(n >= 1, "Lehmer code size must be positive");
        let entries = (2..=n as u32).rev().map(|label| rng.gen_range(0..label)).collect();
        LehmerCode { entries }
    }
}

impl fmt::Display for LehmerCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_joined(f, &self.entries)
    }
}

/// Parses the label-descending literal, e.g. `2,3,2,0` for `n = 5`.
/// The empty string is the code of size 1.
impl FromStr for LehmerCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().is_empty() {
            return Ok(LehmerCode::zero(1));
        }
        let entries = parse_u32_list(s)?;
        LehmerCode::new(entries.len() + 1, entries)
    }
}

impl Serialize for LehmerCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LehmerCode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Binary indexed tree over `[0..n)` holding 0/1 occupancy counts.
struct Fenwick {
    tree: Vec<u32>,
}

impl Fenwick {
    fn empty(n: usize) -> Self {
        Fenwick { tree: vec![0; n + 1] }
    }

    fn full(n: usize) -> Self {
        let mut tree = vec![0u32; n + 1];
        for k in 1..=n {
            tree[k] += 1;
            let parent = k + (k & k.wrapping_neg());
            if parent <= n {
                tree[parent] += tree[k];
            }
        }
        Fenwick { tree }
    }

    fn add(&mut self, idx: usize, delta: i32) {
        let mut k = idx + 1;
        while k < self.tree.len() {
            self.tree[k] = (self.tree[k] as i32 + delta) as u32;
            k += k & k.wrapping_neg();
        }
    }

    /// Occupied count in `[0..idx)`.
    fn prefix(&self, idx: usize) -> u32 {
        let mut k = idx;
        let mut s = 0;
        while k > 0 {
            s += self.tree[k];
            k -= k & k.wrapping_neg();
        }
        s
    }

    /// Index of the occupied slot with exactly `rank` occupied slots before it.
    fn select(&self, rank: u32) -> usize {
        let n = self.tree.len() - 1;
        let mut pos = 0;
        let mut remaining = rank;
        let mut step = n.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= remaining {
                pos = next;
                remaining -= self.tree[next];
            }
            step >>= 1;
        }
        pos
    }
}

/// `L(σ)`: for each position, the number of later positions with a smaller value.
pub fn encode(sigma: &Permutation) -> LehmerCode {
    let n = sigma.len();
    let values = sigma.as_slice();
    let mut seen = Fenwick::empty(n);
    let mut entries = vec![0u32; n - 1];
    for p in (0..n).rev() {
        let v = values[p] as usize - 1;
        if p < n - 1 {
            entries[p] = seen.prefix(v);
        }
        seen.add(v, 1);
    }
    LehmerCode { entries }
}

/// Inverse of [`encode`]: position `p` receives the `(c_p + 1)`-th smallest
/// value not yet used.
pub fn decode(code: &LehmerCode) -> Permutation {
    let n = code.n();
    let mut free = Fenwick::full(n);
    let mut values = Vec::with_capacity(n);
    for p in 0..n {
        let c = if p < n - 1 { code.entries[p] } else { 0 };
        let v = free.select(c);
        free.add(v, -1);
        values.push(v as u32 + 1);
    }
    Permutation::from_vec_unchecked(values)
}

/// Per-label mutation rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepOperator {
    /// Resample uniformly among the other `i - 1` values.
    Uniform,
    /// `±1` with equal probability, clamped to `[0..i-1]`.
    Unit,
    /// Step size `j ∈ [1..i-1]` with probability `∝ 1/j`, random direction,
    /// clamped to `[0..i-1]`.
    Harmonic,
}

impl FromStr for StepOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(StepOperator::Uniform),
            "unit" => Ok(StepOperator::Unit),
            "harmonic" => Ok(StepOperator::Harmonic),
            other => Err(Error::invalid(format!("unknown step operator `{other}`"))),
        }
    }
}

impl StepOperator {
    /// Applies the operator to value `x` of a domain of size `domain ≥ 2`
    /// (the label, for Lehmer codes).
    pub fn step<R: Rng + ?Sized>(self, domain: usize, x: u32, rng: &mut R) -> Result<u32> {
        if domain < 2 {
            return Err(Error::invalid(format!("step needs a domain of size ≥ 2, got {domain}")));
        }
        if x as usize >= domain {
            return Err(Error::invalid(format!("value {x} outside [0..{}]", domain - 1)));
        }
        Ok(self.step_unchecked(domain as u32, x, rng))
    }

    #[inline]
    pub(crate) fn step_unchecked<R: Rng + ?Sized>(self, domain: u32, x: u32, rng: &mut R) -> u32 {
        let top = domain - 1;
        match self {
            StepOperator::Uniform => {
                let y = rng.gen_range(0..top);
                if y >= x {
                    y + 1
                } else {
                    y
                }
            }
            StepOperator::Unit => {
                if rng.gen::<bool>() {
                    x.saturating_sub(1)
                } else {
                    (x + 1).min(top)
                }
            }
            StepOperator::Harmonic => {
                let j = harmonic_step_size(top, rng);
                if rng.gen::<bool>() {
                    x.saturating_sub(j)
                } else {
                    (x + j).min(top)
                }
            }
        }
    }
}

/// Draws `j ∈ [1..max]` with `P[j] = (1/j) / H_max` by sequential search.
fn harmonic_step_size<R: Rng + ?Sized>(max: u32, rng: &mut R) -> u32 {
    if max == 1 {
        return 1;
    }
    let total: f64 = (1..=max).map(|j| 1.0 / j as f64).sum();
    let mut u = rng.gen::<f64>() * total;
    for j in 1..max {
        u -= 1.0 / j as f64;
        if u < 0.0 {
            return j;
        }
    }
    max
}

/// Distribution over labels used by RLS to pick the label to mutate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelSelection {
    /// `p_i = 1/(n-1)`.
    Uniform,
    /// `p_i = 2(i-1)/(n(n-1))`, proportional to the number of alternatives.
    Proportional,
}

impl FromStr for LabelSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(LabelSelection::Uniform),
            "proportional" => Ok(LabelSelection::Proportional),
            other => Err(Error::invalid(format!("unknown probability vector `{other}`"))),
        }
    }
}

impl LabelSelection {
    /// Probabilities for labels `2, 3, …, n` (in that order).
    pub fn probabilities(self, n: usize) -> Result<Vec<f64>> {
        if n < 2 {
            return Err(Error::invalid(format!("probability vector needs n ≥ 2, got {n}")));
        }
        Ok(match self {
            LabelSelection::Uniform => vec![1.0 / (n - 1) as f64; n - 1],
            LabelSelection::Proportional => {
                let denom = (n * (n - 1)) as f64;
                (2..=n).map(|i| 2.0 * (i - 1) as f64 / denom).collect()
            }
        })
    }

    /// Samples a label in `[2..n]`, `n ≥ 2`.
    #[inline]
    pub fn sample_label<R: Rng + ?Sized>(self, n: usize, rng: &mut R) -> usize {
        match self {
            LabelSelection::Uniform => rng.gen_range(2..=n),
            LabelSelection::Proportional => {
                // weight w = i - 1 ∈ [1..n-1]; pick the smallest w with
                // w(w+1)/2 > r for r uniform in [0, (n-1)n/2)
                let m = (n - 1) as u64;
                let r = rng.gen_range(0..m * (m + 1) / 2);
                let mut w = (((8 * r + 1) as f64).sqrt() as u64).saturating_sub(1) / 2;
                while w * (w + 1) / 2 <= r {
                    w += 1;
                }
                while w > 1 && (w - 1) * w / 2 > r {
                    w -= 1;
                }
                w as usize + 1
            }
        }
    }
}

/// Code of `decode(code)` with positions `i` and `i + 1` exchanged, computed
/// directly on the two affected labels.
pub fn adjacent_swap_effect(code: &LehmerCode, i: usize) -> Result<LehmerCode> {
    let n = code.n();
    if i == 0 || i >= n {
        return Err(Error::invalid(format!(
            "adjacent swap index {i} outside [1..{}]",
            n.saturating_sub(1)
        )));
    }
    let left = code.at_position(i);
    let right = code.at_position(i + 1);
    let (new_left, new_right) = if left <= right {
        (right + 1, left)
    } else {
        (right, left - 1)
    };
    let mut entries = code.entries.clone();
    entries[i - 1] = new_left;
    // position n maps to the implicit label 1 and is always zero
    if i < n - 1 {
        entries[i] = new_right;
    } else {
        debug_assert_eq!(new_right, 0);
    }
    Ok(LehmerCode { entries })
}

/// An element of `[r]^len`, indexed `x_1 … x_len`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundedIntVector {
    bound: u32,
    entries: Vec<u32>,
}

impl BoundedIntVector {
    /// `entries[k]` is `x_{k+1}`.
    pub fn new(bound: u32, entries: Vec<u32>) -> Result<Self> {
        if bound == 0 || entries.is_empty() {
            return Err(Error::invalid("bounded vector needs positive length and bound"));
        }
        if let Some(&bad) = entries.iter().find(|&&e| e >= bound) {
            return Err(Error::invalid(format!("entry {bad} outside [0..{}]", bound - 1)));
        }
        Ok(BoundedIntVector { bound, entries })
    }

    pub fn zero(len: usize, bound: u32) -> Self {
        assert!(len >= 1 && bound >= 1);
        BoundedIntVector {
            bound,
            entries: vec![0; len],
        }
    }

    pub fn sample_uniform<R: Rng + ?Sized>(len: usize, bound: u32, rng: &mut R) -> Self {
        assert!(len >= 1 && bound >= 1);
        BoundedIntVector {
            bound,
            entries: (0..len).map(|_| rng.gen_range(0..bound)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub(crate) fn entries_mut(&mut self) -> &mut [u32] {
        &mut self.entries
    }

    /// `x_i` for `i ∈ [1..len]`.
    pub fn get(&self, i: usize) -> u32 {
        self.entries[i - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::sample_uniform_permutation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn perm(v: &[u32]) -> Permutation {
        Permutation::new(v.to_vec()).unwrap()
    }

    /// Direct reading of the definition: count later smaller values.
    fn encode_naive(sigma: &Permutation) -> Vec<u32> {
        let v = sigma.as_slice();
        let n = v.len();
        (0..n - 1)
            .map(|p| v[p + 1..].iter().filter(|&&w| w < v[p]).count() as u32)
            .collect()
    }

    /// List-removal decoder.
    fn decode_naive(code: &LehmerCode) -> Vec<u32> {
        let n = code.n();
        let mut free: Vec<u32> = (1..=n as u32).collect();
        (1..=n).map(|p| free.remove(code.at_position(p) as usize)).collect()
    }

    #[test]
    fn encodes_reference_example() {
        let code = encode(&perm(&[3, 5, 4, 1, 2]));
        assert_eq!(code.entries(), &[2, 3, 2, 0]);
        assert_eq!(code.at_label(5), 2);
        assert_eq!(code.at_label(4), 3);
        assert_eq!(code.at_label(3), 2);
        assert_eq!(code.at_label(2), 0);
        assert_eq!(code.at_label(1), 0);
        assert_eq!(code.to_string(), "2,3,2,0");
        assert_eq!(decode(&code), perm(&[3, 5, 4, 1, 2]));
    }

    #[test]
    fn identity_and_reversal() {
        assert!(encode(&Permutation::identity(7)).is_zero());
        let rev = encode(&Permutation::reversed(7));
        for label in 2..=7 {
            assert_eq!(rev.at_label(label), label as u32 - 1);
        }
        assert_eq!(rev, LehmerCode::max(7));
        assert_eq!(decode(&LehmerCode::zero(5)), Permutation::identity(5));
        assert_eq!(decode(&LehmerCode::zero(1)), Permutation::identity(1));
    }

    #[test]
    fn fast_paths_match_naive_oracles() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..500 {
            let n = rng.gen_range(1..=120);
            let s = sample_uniform_permutation(n, &mut rng);
            assert_eq!(encode(&s).entries(), encode_naive(&s).as_slice());
            let c = LehmerCode::sample_uniform(n, &mut rng);
            assert_eq!(decode(&c).as_slice(), decode_naive(&c).as_slice());
        }
    }

    #[test]
    fn validates_entries() {
        assert!(LehmerCode::new(3, vec![2, 1]).is_ok());
        assert!(LehmerCode::new(3, vec![3, 0]).is_err());
        assert!(LehmerCode::new(3, vec![0, 2]).is_err());
        assert!(LehmerCode::new(3, vec![0]).is_err());
        assert!("2,3,2,0".parse::<LehmerCode>().is_ok());
        assert!("2,4,2,0".parse::<LehmerCode>().is_err());
    }

    #[test]
    fn step_domain_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for op in [StepOperator::Uniform, StepOperator::Unit, StepOperator::Harmonic] {
            assert!(op.step(1, 0, &mut rng).is_err());
            assert!(op.step(0, 0, &mut rng).is_err());
            assert!(op.step(3, 3, &mut rng).is_err());
        }
    }

    #[test]
    fn uniform_step_binary_domain_flips() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(StepOperator::Uniform.step(2, 0, &mut rng).unwrap(), 1);
            assert_eq!(StepOperator::Uniform.step(2, 1, &mut rng).unwrap(), 0);
        }
    }

    #[test]
    fn steps_stay_in_domain() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for op in [StepOperator::Uniform, StepOperator::Unit, StepOperator::Harmonic] {
            for _ in 0..20_000 {
                let domain = rng.gen_range(2..40u32);
                let x = rng.gen_range(0..domain);
                let y = op.step(domain as usize, x, &mut rng).unwrap();
                assert!(y < domain);
                if op == StepOperator::Uniform {
                    assert_ne!(x, y);
                }
            }
        }
    }

    #[test]
    fn probability_vectors() {
        assert_eq!(LabelSelection::Uniform.probabilities(5).unwrap(), vec![0.25; 4]);
        let prop = LabelSelection::Proportional.probabilities(5).unwrap();
        for (p, expect) in prop.iter().zip([0.1, 0.2, 0.3, 0.4]) {
            assert!((p - expect).abs() < 1e-12);
        }
        for kind in [LabelSelection::Uniform, LabelSelection::Proportional] {
            assert_eq!(kind.probabilities(2).unwrap(), vec![1.0]);
            assert!(kind.probabilities(1).is_err());
            for n in 2..60 {
                let total: f64 = kind.probabilities(n).unwrap().iter().sum();
                assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn proportional_sampler_hits_every_label() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..30 {
            let mut seen = vec![false; n + 1];
            for _ in 0..20 * n * n {
                let l = LabelSelection::Proportional.sample_label(n, &mut rng);
                assert!((2..=n).contains(&l));
                seen[l] = true;
            }
            assert!(seen[2..].iter().all(|&s| s));
        }
    }

    #[test]
    fn adjacent_swap_effect_examples() {
        let code = encode(&perm(&[3, 5, 4, 1, 2]));
        let swapped = adjacent_swap_effect(&code, 1).unwrap();
        assert_eq!(swapped.entries(), &[4, 2, 2, 0]);
        assert_eq!(swapped, encode(&perm(&[5, 3, 4, 1, 2])));

        let z = adjacent_swap_effect(&LehmerCode::zero(6), 1).unwrap();
        assert_eq!(z.at_label(6), 1);
        assert_eq!(z, encode(&Permutation::identity(6).apply_adjacent_swap(1).unwrap()));

        assert!(adjacent_swap_effect(&code, 0).is_err());
        assert!(adjacent_swap_effect(&code, 5).is_err());
    }

    #[test]
    fn bounded_vector_validation() {
        assert!(BoundedIntVector::new(3, vec![2, 0, 1]).is_ok());
        assert!(BoundedIntVector::new(3, vec![3, 0, 1]).is_err());
        assert!(BoundedIntVector::new(3, vec![]).is_err());
        assert_eq!(BoundedIntVector::new(3, vec![2, 0, 1]).unwrap().get(3), 1);
    }

    #[test]
    fn serde_as_literal() {
        let c: LehmerCode = serde_json::from_str("\"2,3,2,0\"").unwrap();
        assert_eq!(serde_json::to_string(&c).unwrap(), "\"2,3,2,0\"");
    }
}
