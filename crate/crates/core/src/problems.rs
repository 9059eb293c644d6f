//! Linear ordering and quadratic assignment instances.
//!
//! Both problems are minimized over `S_n`. Weights are 64-bit integers;
//! constructors reject matrices whose worst-case objective could overflow,
//! so evaluation of a validated instance never fails on arithmetic.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::benchmarks::{Direction, FitnessValue, Objective};
use crate::error::{Error, Result};
use crate::perm::Permutation;

/// Square integer matrix in row-major order, 1-based accessors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Matrix {
    n: usize,
    data: Vec<i64>,
}

impl Matrix {
    pub fn new(n: usize, data: Vec<i64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("matrix size must be positive"));
        }
        if data.len() != n * n {
            return Err(Error::invalid(format!(
                "{n}×{n} matrix needs {} entries, got {}",
                n * n,
                data.len()
            )));
        }
        Ok(Matrix { n, data })
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("matrix rows must all have length n"));
        }
        Matrix::new(n, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry `(i, j)`, both 1-based.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[(i - 1) * self.n + (j - 1)]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[i64]> {
        self.data.chunks(self.n)
    }

    fn abs_sum(&self) -> Option<i64> {
        self.data
            .iter()
            .try_fold(0i64, |acc, v| acc.checked_add(v.checked_abs()?))
    }

    fn abs_max(&self) -> Option<i64> {
        self.data
            .iter()
            .try_fold(0i64, |acc, v| Some(acc.max(v.checked_abs()?)))
    }

    /// Principal submatrix on the sorted 1-based `indices`.
    fn principal(&self, indices: &[usize]) -> Matrix {
        let data = indices
            .iter()
            .flat_map(|&i| indices.iter().map(move |&j| self.get(i, j)))
            .collect();
        Matrix {
            n: indices.len(),
            data,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LopInstance {
    b: Matrix,
}

impl LopInstance {
    pub fn new(b: Matrix) -> Result<Self> {
        if b.abs_sum().is_none() {
            return Err(Error::Overflow(
                "LOP weights may overflow a 64-bit objective".into(),
            ));
        }
        Ok(LopInstance { b })
    }

    pub fn n(&self) -> usize {
        self.b.n
    }

    pub fn matrix(&self) -> &Matrix {
        &self.b
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QapInstance {
    a: Matrix,
    b: Matrix,
}

impl QapInstance {
    pub fn new(a: Matrix, b: Matrix) -> Result<Self> {
        if a.n != b.n {
            return Err(Error::invalid(format!(
                "QAP matrices differ in size: {} vs {}",
                a.n, b.n
            )));
        }
        let fits = match (a.abs_sum(), b.abs_max()) {
            (Some(sa), Some(mb)) => sa.checked_mul(mb).is_some(),
            _ => false,
        };
        if !fits {
            return Err(Error::Overflow(
                "QAP weights may overflow a 64-bit objective".into(),
            ));
        }
        Ok(QapInstance { a, b })
    }

    pub fn n(&self) -> usize {
        self.a.n
    }

    pub fn flow(&self) -> &Matrix {
        &self.a
    }

    pub fn distance(&self) -> &Matrix {
        &self.b
    }
}

fn check_size(n: usize, sigma: &Permutation) -> Result<()> {
    if sigma.len() != n {
        return Err(Error::invalid(format!(
            "permutation of size {} for an instance of size {n}",
            sigma.len()
        )));
    }
    Ok(())
}

fn overflow() -> Error {
    Error::Overflow("objective sum exceeds 64 bits".into())
}

/// `Σ_{i>j} b_{σ(i),σ(j)}`: the weight below the diagonal after reordering.
pub fn lop_eval(inst: &LopInstance, sigma: &Permutation) -> Result<i64> {
    check_size(inst.n(), sigma)?;
    let s = sigma.as_slice();
    let mut total = 0i64;
    for i in 1..s.len() {
        let row = s[i] as usize;
        for &col in &s[..i] {
            total = total
                .checked_add(inst.b.get(row, col as usize))
                .ok_or_else(overflow)?;
        }
    }
    Ok(total)
}

/// `Σ_{i,j} a_{ij}·b_{σ(i),σ(j)}`, diagonal terms included.
pub fn qap_eval(inst: &QapInstance, sigma: &Permutation) -> Result<i64> {
    check_size(inst.n(), sigma)?;
    let s = sigma.as_slice();
    let mut total = 0i64;
    for (i, &si) in s.iter().enumerate() {
        for (j, &sj) in s.iter().enumerate() {
            let term = inst
                .a
                .get(i + 1, j + 1)
                .checked_mul(inst.b.get(si as usize, sj as usize))
                .ok_or_else(overflow)?;
            total = total.checked_add(term).ok_or_else(overflow)?;
        }
    }
    Ok(total)
}

/// A loaded LOP or QAP instance.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemInstance {
    Lop(LopInstance),
    Qap(QapInstance),
}

impl ProblemInstance {
    pub fn n(&self) -> usize {
        match self {
            ProblemInstance::Lop(i) => i.n(),
            ProblemInstance::Qap(i) => i.n(),
        }
    }

    pub fn eval(&self, sigma: &Permutation) -> Result<i64> {
        match self {
            ProblemInstance::Lop(i) => lop_eval(i, sigma),
            ProblemInstance::Qap(i) => qap_eval(i, sigma),
        }
    }

    pub fn subsample<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Result<ProblemInstance> {
        let idx = subsample_indices(self.n(), m, rng)?;
        Ok(match self {
            ProblemInstance::Lop(i) => ProblemInstance::Lop(LopInstance {
                b: i.b.principal(&idx),
            }),
            ProblemInstance::Qap(i) => ProblemInstance::Qap(QapInstance {
                a: i.a.principal(&idx),
                b: i.b.principal(&idx),
            }),
        })
    }
}

impl Objective<Permutation> for ProblemInstance {
    fn direction(&self) -> Direction {
        Direction::Minimize
    }

    #[inline]
    fn evaluate(&self, sigma: &Permutation) -> FitnessValue {
        // validated instances cannot overflow; a size mismatch is a caller bug
        FitnessValue::Scalar(self.eval(sigma).expect("instance evaluation failed"))
    }
}

impl Objective<Permutation> for LopInstance {
    fn direction(&self) -> Direction {
        Direction::Minimize
    }

    fn evaluate(&self, sigma: &Permutation) -> FitnessValue {
        FitnessValue::Scalar(lop_eval(self, sigma).expect("LOP evaluation failed"))
    }
}

impl Objective<Permutation> for QapInstance {
    fn direction(&self) -> Direction {
        Direction::Minimize
    }

    fn evaluate(&self, sigma: &Permutation) -> FitnessValue {
        FitnessValue::Scalar(qap_eval(self, sigma).expect("QAP evaluation failed"))
    }
}

/// Uniformly random `m`-subset of `[1..n]`, sorted ascending.
pub fn subsample_indices<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Vec<usize>> {
    if m == 0 || m > n {
        return Err(Error::invalid(format!("subsample size {m} outside [1..{n}]")));
    }
    let mut idx: Vec<usize> = rand::seq::index::sample(rng, n, m)
        .into_iter()
        .map(|k| k + 1)
        .collect();
    idx.sort_unstable();
    Ok(idx)
}

pub fn subsample_lop<R: Rng + ?Sized>(inst: &LopInstance, m: usize, rng: &mut R) -> Result<LopInstance> {
    let idx = subsample_indices(inst.n(), m, rng)?;
    Ok(LopInstance {
        b: inst.b.principal(&idx),
    })
}

pub fn subsample_qap<R: Rng + ?Sized>(inst: &QapInstance, m: usize, rng: &mut R) -> Result<QapInstance> {
    let idx = subsample_indices(inst.n(), m, rng)?;
    Ok(QapInstance {
        a: inst.a.principal(&idx),
        b: inst.b.principal(&idx),
    })
}

/// Largest size accepted by [`exhaustive_optimum`].
pub const EXHAUSTIVE_MAX_N: usize = 11;

/// Minimum over all of `S_n` by enumeration in lexicographic order; the
/// lexicographically smallest minimizer is returned.
pub fn exhaustive_optimum(inst: &ProblemInstance) -> Result<(i64, Permutation)> {
    let n = inst.n();
    if n > EXHAUSTIVE_MAX_N {
        return Err(Error::unsupported(format!(
            "exhaustive search limited to n ≤ {EXHAUSTIVE_MAX_N}, got {n}"
        )));
    }
    let mut current: Vec<u32> = (1..=n as u32).collect();
    let mut best_value = i64::MAX;
    let mut best = current.clone();
    loop {
        let sigma = Permutation::from_vec_unchecked(current.clone());
        let value = inst.eval(&sigma)?;
        if value < best_value {
            best_value = value;
            best.clone_from(&current);
        }
        if !next_permutation(&mut current) {
            break;
        }
    }
    Ok((best_value, Permutation::from_vec_unchecked(best)))
}

/// Advances to the lexicographic successor; `false` after the last one.
pub(crate) fn next_permutation(v: &mut [u32]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

struct Tokens<'a> {
    items: Vec<(&'a str, usize, usize)>,
    pos: usize,
    last_line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let mut items = Vec::new();
        let mut last_line = 1;
        for (l, line) in text.lines().enumerate() {
            last_line = l + 1;
            let mut offset = 0;
            for tok in line.split_whitespace() {
                let col = line[offset..].find(tok).unwrap() + offset;
                offset = col + tok.len();
                items.push((tok, l + 1, col + 1));
            }
        }
        Tokens {
            items,
            pos: 0,
            last_line,
        }
    }

    fn peek_line(&self) -> Option<usize> {
        self.items.get(self.pos).map(|t| t.1)
    }

    fn line_len(&self, line: usize) -> usize {
        self.items[self.pos..]
            .iter()
            .take_while(|t| t.1 == line)
            .count()
    }

    fn next_int(&mut self, what: &str) -> Result<i64> {
        let Some(&(tok, line, column)) = self.items.get(self.pos) else {
            return Err(Error::Parse {
                line: self.last_line,
                column: 0,
                message: format!("unexpected end of input, expected {what}"),
            });
        };
        self.pos += 1;
        tok.parse::<i64>().map_err(|_| Error::Parse {
            line,
            column,
            message: format!("expected integer {what}, found `{tok}`"),
        })
    }

    fn finish(&self) -> Result<()> {
        match self.items.get(self.pos) {
            None => Ok(()),
            Some(&(tok, line, column)) => Err(Error::Parse {
                line,
                column,
                message: format!("unexpected trailing token `{tok}`"),
            }),
        }
    }

    fn read_size(&mut self) -> Result<usize> {
        let (line, column) = self
            .items
            .get(self.pos)
            .map(|t| (t.1, t.2))
            .unwrap_or((self.last_line, 0));
        let n = self.next_int("instance size")?;
        if n <= 0 {
            return Err(Error::Parse {
                line,
                column,
                message: format!("instance size must be positive, got {n}"),
            });
        }
        usize::try_from(n)
            .ok()
            .filter(|&n| n.checked_mul(n).is_some())
            .ok_or(Error::Parse {
                line,
                column,
                message: format!("instance size {n} too large"),
            })
    }

    fn read_matrix(&mut self, n: usize, name: &str) -> Result<Matrix> {
        let mut data = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                data.push(self.next_int(&format!("entry ({}, {}) of {name}", r + 1, c + 1))?);
            }
        }
        Matrix::new(n, data)
    }
}

fn utf8(bytes: &[u8]) -> Result<&str> {
    std::str::from_utf8(bytes).map_err(|e| {
        let line = bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1;
        Error::Parse {
            line,
            column: 0,
            message: "input is not valid UTF-8".into(),
        }
    })
}

fn reject_overflow(result: Result<LopInstance>) -> Result<LopInstance> {
    result.map_err(|e| match e {
        Error::Overflow(message) => Error::Parse {
            line: 0,
            column: 0,
            message,
        },
        other => other,
    })
}

/// Parses a LOLIB file: an optional name line, a line holding `n`, then
/// `n²` integers in row-major order.
pub fn parse_lolib(bytes: &[u8]) -> Result<LopInstance> {
    let mut toks = Tokens::new(utf8(bytes)?);
    // a first line that is not a lone integer is the instance name
    if let Some(line) = toks.peek_line() {
        let lone_int = toks.line_len(line) == 1 && toks.items[toks.pos].0.parse::<i64>().is_ok();
        if !lone_int {
            toks.pos += toks.line_len(line);
        }
    }
    let n = toks.read_size()?;
    let b = toks.read_matrix(n, "B")?;
    toks.finish()?;
    reject_overflow(LopInstance::new(b))
}

/// Parses a QAPLIB file: `n`, then the `n×n` matrix A, then B.
pub fn parse_qaplib(bytes: &[u8]) -> Result<QapInstance> {
    let mut toks = Tokens::new(utf8(bytes)?);
    let n = toks.read_size()?;
    let a = toks.read_matrix(n, "A")?;
    let b = toks.read_matrix(n, "B")?;
    toks.finish()?;
    QapInstance::new(a, b).map_err(|e| match e {
        Error::Overflow(message) => Error::Parse {
            line: 0,
            column: 0,
            message,
        },
        other => other,
    })
}

pub fn load_lolib(path: impl AsRef<Path>) -> Result<LopInstance> {
    parse_lolib(&std::fs::read(path)?)
}

pub fn load_qaplib(path: impl AsRef<Path>) -> Result<QapInstance> {
    parse_qaplib(&std::fs::read(path)?)
}

fn render_matrix(out: &mut String, m: &Matrix) {
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
}

/// Canonical LOLIB text, optionally preceded by a name line.
pub fn render_lolib(inst: &LopInstance, name: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(name) = name {
        out.push_str(name);
        out.push('\n');
    }
    out.push_str(&format!("{}\n", inst.n()));
    render_matrix(&mut out, &inst.b);
    out
}

pub fn render_qaplib(inst: &QapInstance) -> String {
    let mut out = format!("{}\n\n", inst.n());
    render_matrix(&mut out, &inst.a);
    out.push('\n');
    render_matrix(&mut out, &inst.b);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lop(rows: &[Vec<i64>]) -> LopInstance {
        LopInstance::new(Matrix::from_rows(rows).unwrap()).unwrap()
    }

    fn perm(v: &[u32]) -> Permutation {
        Permutation::new(v.to_vec()).unwrap()
    }

    fn small_qap() -> QapInstance {
        QapInstance::new(
            Matrix::from_rows(&[vec![0, 1], vec![1, 0]]).unwrap(),
            Matrix::from_rows(&[vec![0, 2], vec![2, 0]]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn lop_examples() {
        assert_eq!(lop_eval(&lop(&[vec![7]]), &Permutation::identity(1)).unwrap(), 0);
        let inst = lop(&[vec![0, 5], vec![3, 0]]);
        assert_eq!(lop_eval(&inst, &perm(&[1, 2])).unwrap(), 3);
        assert_eq!(lop_eval(&inst, &perm(&[2, 1])).unwrap(), 5);
        assert!(lop_eval(&inst, &Permutation::identity(3)).is_err());
    }

    #[test]
    fn lop_lower_plus_upper_is_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 10;
        let rows: Vec<Vec<i64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.gen_range(-50..100)).collect())
            .collect();
        let inst = lop(&rows);
        let off_diag: i64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| rows[i][j])
            .sum();
        for _ in 0..100 {
            let s = crate::perm::sample_uniform_permutation(n, &mut rng);
            let v = s.as_slice();
            let upper: i64 = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .map(|(i, j)| rows[v[i] as usize - 1][v[j] as usize - 1])
                .sum();
            assert_eq!(lop_eval(&inst, &s).unwrap() + upper, off_diag);
        }
    }

    #[test]
    fn qap_examples() {
        let inst = small_qap();
        assert_eq!(qap_eval(&inst, &perm(&[1, 2])).unwrap(), 4);
        assert_eq!(qap_eval(&inst, &perm(&[2, 1])).unwrap(), 4);
        let zero = QapInstance::new(
            Matrix::new(3, vec![0; 9]).unwrap(),
            Matrix::new(3, (1..=9).collect()).unwrap(),
        )
        .unwrap();
        assert_eq!(qap_eval(&zero, &perm(&[3, 1, 2])).unwrap(), 0);
    }

    #[test]
    fn qap_includes_diagonal() {
        let inst = QapInstance::new(
            Matrix::from_rows(&[vec![1, 0], vec![0, 0]]).unwrap(),
            Matrix::from_rows(&[vec![10, 0], vec![0, 20]]).unwrap(),
        )
        .unwrap();
        assert_eq!(qap_eval(&inst, &perm(&[1, 2])).unwrap(), 10);
        assert_eq!(qap_eval(&inst, &perm(&[2, 1])).unwrap(), 20);
    }

    #[test]
    fn overflow_guards() {
        let m = Matrix::new(2, vec![i64::MAX, 1, 0, 0]).unwrap();
        assert!(matches!(LopInstance::new(m.clone()), Err(Error::Overflow(_))));
        let big = Matrix::new(2, vec![1 << 40; 4]).unwrap();
        assert!(matches!(QapInstance::new(big.clone(), big), Err(Error::Overflow(_))));
        assert!(Matrix::new(2, vec![0; 3]).is_err());
        assert!(Matrix::new(2, vec![i64::MIN, 0, 0, 0]).is_ok());
        assert!(LopInstance::new(Matrix::new(2, vec![i64::MIN, 0, 0, 0]).unwrap()).is_err());
    }

    #[test]
    fn parse_lolib_examples() {
        let inst = parse_lolib(b"2\n0 5\n3 0\n").unwrap();
        assert_eq!(inst, lop(&[vec![0, 5], vec![3, 0]]));
        let named = parse_lolib(b"be75eec\n2\n0 5\n3 0\n").unwrap();
        assert_eq!(named, inst);
        assert_eq!(parse_lolib(b"1\n0\n").unwrap().n(), 1);
    }

    #[test]
    fn parse_lolib_errors_carry_position() {
        match parse_lolib(b"2\n0 5\n3\n") {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 3);
                assert!(message.contains("end of input"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse_lolib(b"2\n0 5\n3 x\n") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (3, 3)),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(parse_lolib(b"0\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_lolib(b"-3\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_lolib(b"1\n0 0\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_lolib(b""), Err(Error::Parse { .. })));
        assert!(matches!(parse_lolib(&[0xff, 0xfe]), Err(Error::Parse { .. })));
    }

    #[test]
    fn parse_qaplib_examples() {
        let inst = parse_qaplib(b"2\n\n0 1\n1 0\n\n0 2\n2 0\n").unwrap();
        assert_eq!(inst, small_qap());
        assert_eq!(parse_qaplib(b"1\n3\n4\n").unwrap().n(), 1);
        assert!(matches!(
            parse_qaplib(b"2\n0 1\n1 0\n0 2\n2\n"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn render_parse_round_trip() {
        let inst = lop(&[vec![0, -5], vec![3, 0]]);
        assert_eq!(parse_lolib(render_lolib(&inst, Some("x")).as_bytes()).unwrap(), inst);
        assert_eq!(parse_qaplib(render_qaplib(&small_qap()).as_bytes()).unwrap(), small_qap());
    }

    #[test]
    fn subsample_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let inst = lop(&[vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]]);
        assert_eq!(subsample_lop(&inst, 3, &mut rng).unwrap(), inst);
        let one = subsample_lop(&inst, 1, &mut rng).unwrap();
        assert!([1, 5, 9].contains(&one.matrix().get(1, 1)));
        assert!(subsample_lop(&inst, 0, &mut rng).is_err());
        assert!(subsample_lop(&inst, 4, &mut rng).is_err());
    }

    #[test]
    fn subsample_pinned_seed() {
        let rows: Vec<Vec<i64>> = (0..4).map(|i| (0..4).map(|j| 10 * i + j).collect()).collect();
        let inst = lop(&rows);
        let idx = subsample_indices(4, 2, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let sub = subsample_lop(&inst, 2, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let expected: Vec<Vec<i64>> = idx
            .iter()
            .map(|&i| idx.iter().map(|&j| rows[i - 1][j - 1]).collect())
            .collect();
        assert_eq!(sub, lop(&expected));
        assert!(idx.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn qap_subsample_uses_one_index_set() {
        let a = Matrix::new(4, (0..16).collect()).unwrap();
        let b = Matrix::new(4, (100..116).collect()).unwrap();
        let inst = QapInstance::new(a, b).unwrap();
        let idx = subsample_indices(4, 2, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let sub = subsample_qap(&inst, 2, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                assert_eq!(sub.flow().get(r + 1, c + 1), inst.flow().get(i, j));
                assert_eq!(sub.distance().get(r + 1, c + 1), inst.distance().get(i, j));
            }
        }
    }

    #[test]
    fn exhaustive_examples() {
        let inst = ProblemInstance::Lop(lop(&[vec![0, 5], vec![3, 0]]));
        assert_eq!(exhaustive_optimum(&inst).unwrap(), (3, perm(&[1, 2])));
        let zero = ProblemInstance::Qap(
            QapInstance::new(
                Matrix::new(4, vec![0; 16]).unwrap(),
                Matrix::new(4, (0..16).collect()).unwrap(),
            )
            .unwrap(),
        );
        assert_eq!(exhaustive_optimum(&zero).unwrap(), (0, Permutation::identity(4)));
        let big = ProblemInstance::Lop(LopInstance::new(Matrix::new(12, vec![0; 144]).unwrap()).unwrap());
        assert!(matches!(exhaustive_optimum(&big), Err(Error::Unsupported(_))));
    }

    #[test]
    fn next_permutation_enumerates_in_order() {
        let mut v = vec![1, 2, 3, 4];
        let mut all = vec![v.clone()];
        while next_permutation(&mut v) {
            all.push(v.clone());
        }
        assert_eq!(all.len(), 24);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }
}
