//! Benchmark functions over `L_n`, `S_n` and `[r]^n`.
//!
//! Factorially and exponentially weighted functions (FacVal, LexVal, NVal)
//! are returned as lexicographic keys. Each digit of such a sum outweighs all
//! lower digits combined, so comparing keys lexicographically is the same as
//! comparing the sums, with no overflow for any `n`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lehmer::{encode, BoundedIntVector, LehmerCode};
use crate::perm::Permutation;

/// An exact, totally ordered objective value.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FitnessValue {
    Scalar(i64),
    /// Digits, most significant first.
    Key(Vec<u32>),
}

impl FitnessValue {
    pub fn as_scalar(&self) -> Option<i64> {
        match self {
            FitnessValue::Scalar(v) => Some(*v),
            FitnessValue::Key(_) => None,
        }
    }
}

impl fmt::Display for FitnessValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitnessValue::Scalar(v) => write!(f, "{v}"),
            FitnessValue::Key(digits) => {
                for (k, d) in digits.iter().enumerate() {
                    if k > 0 {
                        f.write_str(":")?;
                    }
                    write!(f, "{d}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Minimize,
    Maximize,
}

impl Direction {
    /// Elitist acceptance: `candidate` is at least as good as `incumbent`.
    #[inline]
    pub fn not_worse(self, candidate: &FitnessValue, incumbent: &FitnessValue) -> bool {
        match self {
            Direction::Minimize => candidate <= incumbent,
            Direction::Maximize => candidate >= incumbent,
        }
    }

    #[inline]
    pub fn better(self, candidate: &FitnessValue, incumbent: &FitnessValue) -> bool {
        match self {
            Direction::Minimize => candidate < incumbent,
            Direction::Maximize => candidate > incumbent,
        }
    }

    /// Orders values so that `Less` means "better".
    pub fn rank_cmp(self, a: &FitnessValue, b: &FitnessValue) -> Ordering {
        match self {
            Direction::Minimize => a.cmp(b),
            Direction::Maximize => b.cmp(a),
        }
    }
}

/// A function to be optimized over the search space `S`.
pub trait Objective<S: ?Sized>: Sync {
    fn direction(&self) -> Direction;
    fn evaluate(&self, x: &S) -> FitnessValue;
}

impl<S: ?Sized, O: Objective<S> + ?Sized> Objective<S> for &O {
    fn direction(&self) -> Direction {
        (**self).direction()
    }

    fn evaluate(&self, x: &S) -> FitnessValue {
        (**self).evaluate(x)
    }
}

/// `Σ_{i=2}^n l_i`, minimized.
pub fn l_onemax(code: &LehmerCode) -> FitnessValue {
    FitnessValue::Scalar(code.sum() as i64)
}

/// Length of the all-zero prefix read from label `n` downwards, counting the
/// implicit zero at label 1; maximized. Never equals `n - 1`.
pub fn l_leadingzeros(code: &LehmerCode) -> FitnessValue {
    let entries = code.entries();
    let zeros = entries.iter().take_while(|&&e| e == 0).count();
    let value = if zeros == entries.len() { code.n() } else { zeros };
    FitnessValue::Scalar(value as i64)
}

/// `Σ (i-1)!·l_i` as the key `(l_n, …, l_2)`; minimized.
pub fn facval(code: &LehmerCode) -> FitnessValue {
    FitnessValue::Key(code.entries().to_vec())
}

/// Exact `Σ (i-1)!·l_i`; available for `n ≤ 20`.
pub fn facval_scalar(code: &LehmerCode) -> Result<u64> {
    let n = code.n();
    if n > 20 {
        return Err(Error::unsupported(format!(
            "FacVal scalar exceeds 64 bits for n = {n} > 20; compare keys instead"
        )));
    }
    let mut factorial = 1u64;
    let mut total = 0u64;
    for label in 2..=n {
        factorial *= label as u64 - 1;
        total += factorial * code.at_label(label) as u64;
    }
    Ok(total)
}

/// Number of inversions; minimized.
pub fn inv(sigma: &Permutation) -> FitnessValue {
    FitnessValue::Scalar(sigma.inversions() as i64)
}

/// Longest prefix of fixed points; maximized. Never equals `n - 1`.
pub fn pleadingones(sigma: &Permutation) -> FitnessValue {
    let prefix = sigma
        .as_slice()
        .iter()
        .enumerate()
        .take_while(|(k, &v)| v as usize == k + 1)
        .count();
    FitnessValue::Scalar(prefix as i64)
}

/// Lexicographic rank of `sigma` in `S_n`, as the FacVal key of its code.
pub fn lexval(sigma: &Permutation) -> FitnessValue {
    facval(&encode(sigma))
}

pub fn lexval_scalar(sigma: &Permutation) -> Result<u64> {
    facval_scalar(&encode(sigma))
}

/// `Σ_{i=1}^{len} r^{i-1}·x_i` with `r` the vector's bound, as the key
/// `(x_len, …, x_1)`; minimized. With `r = len = n` this is NVal.
pub fn nval(x: &BoundedIntVector) -> FitnessValue {
    FitnessValue::Key(x.entries().iter().rev().copied().collect())
}

/// Exact NVal sum; fails when `r^len` does not fit into 63 bits
/// (for `r = len = n`, `n ≤ 15` is supported).
pub fn nval_scalar(x: &BoundedIntVector) -> Result<u64> {
    let base = x.bound() as i64;
    let overflow = || {
        Error::unsupported(format!(
            "NVal scalar with base {base} and length {} exceeds 64 bits; compare keys instead",
            x.len()
        ))
    };
    let mut capacity = 1i64;
    for _ in 0..x.len() {
        capacity = capacity.checked_mul(base).ok_or_else(overflow)?;
    }
    let mut total = 0i64;
    for &d in x.entries().iter().rev() {
        total = total * base + d as i64;
    }
    Ok(total as u64)
}

/// The theoretical benchmarks, selectable by stable name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Benchmark {
    LOnemax,
    LLeadingzeros,
    Facval,
    Inv,
    Pleadingones,
    Lexval,
    Nval,
}

/// Which search space a benchmark is defined on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    Lehmer,
    Permutation,
    MultiValued,
}

impl Benchmark {
    pub const ALL: [Benchmark; 7] = [
        Benchmark::LOnemax,
        Benchmark::LLeadingzeros,
        Benchmark::Facval,
        Benchmark::Inv,
        Benchmark::Pleadingones,
        Benchmark::Lexval,
        Benchmark::Nval,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::LOnemax => "l-onemax",
            Benchmark::LLeadingzeros => "l-leadingzeros",
            Benchmark::Facval => "facval",
            Benchmark::Inv => "inv",
            Benchmark::Pleadingones => "pleadingones",
            Benchmark::Lexval => "lexval",
            Benchmark::Nval => "nval",
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            Benchmark::LLeadingzeros | Benchmark::Pleadingones => Direction::Maximize,
            _ => Direction::Minimize,
        }
    }

    pub fn space(self) -> Space {
        match self {
            Benchmark::LOnemax | Benchmark::LLeadingzeros | Benchmark::Facval => Space::Lehmer,
            Benchmark::Inv | Benchmark::Pleadingones | Benchmark::Lexval => Space::Permutation,
            Benchmark::Nval => Space::MultiValued,
        }
    }

    /// Optimal value at size `n`.
    pub fn optimum(self, n: usize) -> FitnessValue {
        match self {
            Benchmark::LOnemax | Benchmark::Inv => FitnessValue::Scalar(0),
            Benchmark::LLeadingzeros | Benchmark::Pleadingones => FitnessValue::Scalar(n as i64),
            Benchmark::Facval | Benchmark::Lexval => FitnessValue::Key(vec![0; n.saturating_sub(1)]),
            Benchmark::Nval => FitnessValue::Key(vec![0; n]),
        }
    }

    pub fn evaluate_code(self, code: &LehmerCode) -> Result<FitnessValue> {
        match self {
            Benchmark::LOnemax => Ok(l_onemax(code)),
            Benchmark::LLeadingzeros => Ok(l_leadingzeros(code)),
            Benchmark::Facval => Ok(facval(code)),
            other => Err(Error::invalid(format!("{} is not defined on Lehmer codes", other.name()))),
        }
    }

    pub fn evaluate_permutation(self, sigma: &Permutation) -> Result<FitnessValue> {
        match self {
            Benchmark::Inv => Ok(inv(sigma)),
            Benchmark::Pleadingones => Ok(pleadingones(sigma)),
            Benchmark::Lexval => Ok(lexval(sigma)),
            other => Err(Error::invalid(format!("{} is not defined on permutations", other.name()))),
        }
    }

    pub fn evaluate_vector(self, x: &BoundedIntVector) -> Result<FitnessValue> {
        match self {
            Benchmark::Nval => Ok(nval(x)),
            other => Err(Error::invalid(format!("{} is not defined on bounded vectors", other.name()))),
        }
    }
}

impl FromStr for Benchmark {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Benchmark::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown benchmark `{s}`")))
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

macro_rules! function_objective {
    ($name:ident, $space:ty, $func:path, $dir:expr) => {
        #[derive(Clone, Copy, Debug, Default)]
        pub struct $name;

        impl Objective<$space> for $name {
            fn direction(&self) -> Direction {
                $dir
            }

            #[inline]
            fn evaluate(&self, x: &$space) -> FitnessValue {
                $func(x)
            }
        }
    };
}

function_objective!(LOneMax, LehmerCode, l_onemax, Direction::Minimize);
function_objective!(LLeadingZeros, LehmerCode, l_leadingzeros, Direction::Maximize);
function_objective!(FacVal, LehmerCode, facval, Direction::Minimize);
function_objective!(Inv, Permutation, inv, Direction::Minimize);
function_objective!(PLeadingOnes, Permutation, pleadingones, Direction::Maximize);
function_objective!(LexVal, Permutation, lexval, Direction::Minimize);
function_objective!(NVal, BoundedIntVector, nval, Direction::Minimize);

/// Evaluates a permutation objective on Lehmer codes through `decode`.
#[derive(Clone, Debug)]
pub struct ViaDecode<O>(pub O);

impl<O: Objective<Permutation>> Objective<LehmerCode> for ViaDecode<O> {
    fn direction(&self) -> Direction {
        self.0.direction()
    }

    fn evaluate(&self, x: &LehmerCode) -> FitnessValue {
        self.0.evaluate(&crate::lehmer::decode(x))
    }
}
