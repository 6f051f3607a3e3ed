//! Exact arithmetic on half-integral symmetric matrices.
//!
//! A Fourier index of degree `n` is a half-integral matrix `T`: integer
//! diagonal, half-integer off-diagonal entries. We store `2T` as an integer
//! matrix with even diagonal, so every operation stays in integer (or exact
//! rational) arithmetic. No floating point enters this module.

use crate::{rat_int, Rat};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatrixError {
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("doubled matrix has an odd diagonal entry")]
    OddDiagonal,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("matrix is not unimodular (det must be ±1)")]
    NotUnimodular,
    #[error("class enumeration is only implemented for degree <= 2, got {0}")]
    UnsupportedDegree(usize),
    #[error("incompatible shapes: {0}")]
    IncompatibleShapes(String),
    #[error("block index M is singular; Schur route unavailable")]
    SingularBlock,
}

/// Definiteness class of a half-integral symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Definiteness {
    PositiveDefinite,
    SemidefiniteSingular,
    Indefinite,
}

/// A half-integral symmetric matrix `T`, stored as the integer matrix `2T`.
///
/// Invariants: `doubled` is symmetric with even diagonal. The degree-0
/// (empty) matrix is allowed and counts as positive definite.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct HalfIntMatrix {
    n: usize,
    doubled: Vec<i64>,
}

impl fmt::Debug for HalfIntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HalfInt2T{:?}", self.rows_doubled())
    }
}

/// Ordering: by trace of `2T`, then lexicographically on the doubled
/// entries. This is the canonical order used for file records, support
/// scans, and witnesses.
impl Ord for HalfIntMatrix {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.trace_doubled(), &self.doubled, self.n).cmp(&(
            other.trace_doubled(),
            &other.doubled,
            other.n,
        ))
    }
}

impl PartialOrd for HalfIntMatrix {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl HalfIntMatrix {
    /// Construct from the doubled matrix `2T` in row-major order.
    pub fn from_doubled(n: usize, doubled: Vec<i64>) -> Result<Self, MatrixError> {
        if doubled.len() != n * n {
            return Err(MatrixError::IncompatibleShapes(format!(
                "expected {} entries, got {}",
                n * n,
                doubled.len()
            )));
        }
        for i in 0..n {
            if doubled[i * n + i] % 2 != 0 {
                return Err(MatrixError::OddDiagonal);
            }
            for j in 0..i {
                if doubled[i * n + j] != doubled[j * n + i] {
                    return Err(MatrixError::NotSymmetric);
                }
            }
        }
        Ok(Self { n, doubled })
    }

    /// The zero matrix of degree `n`.
    pub fn zero(n: usize) -> Self {
        Self { n, doubled: vec![0; n * n] }
    }

    /// The identity `T = I_n`, i.e. `2T = 2·I_n`.
    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1; n])
    }

    /// Diagonal matrix with the given `T`-diagonal (integer) entries.
    pub fn diag(t_diag: &[i64]) -> Self {
        let n = t_diag.len();
        let mut doubled = vec![0; n * n];
        for (i, &t) in t_diag.iter().enumerate() {
            doubled[i * n + i] = 2 * t;
        }
        Self { n, doubled }
    }

    /// Scalar matrix `m·I_n`.
    pub fn scalar(n: usize, m: i64) -> Self {
        Self::diag(&vec![m; n])
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    /// Entry of `2T` at `(i, j)`.
    pub fn doubled_entry(&self, i: usize, j: usize) -> i64 {
        self.doubled[i * self.n + j]
    }

    /// The doubled matrix `2T`, row-major.
    pub fn doubled(&self) -> &[i64] {
        &self.doubled
    }

    pub fn rows_doubled(&self) -> Vec<Vec<i64>> {
        (0..self.n)
            .map(|i| self.doubled[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    /// Trace of `2T` (always even).
    pub fn trace_doubled(&self) -> i64 {
        (0..self.n).map(|i| self.doubled_entry(i, i)).sum()
    }

    /// Trace of `T` itself (an integer for half-integral matrices).
    pub fn trace(&self) -> i64 {
        self.trace_doubled() / 2
    }

    /// Exact determinant of `T`, i.e. `det(2T)/2^n`.
    pub fn det(&self) -> Rat {
        let d2 = int_det(self.n, &self.doubled);
        BigRational::new(d2, BigInt::from(2).pow(self.n as u32))
    }

    /// Exact determinant of the doubled matrix `2T`.
    pub fn det_doubled(&self) -> BigInt {
        int_det(self.n, &self.doubled)
    }

    /// Scale the matrix by a positive integer: `T ↦ c·T`.
    pub fn scaled(&self, c: i64) -> Self {
        assert!(c >= 0, "index scaling must be nonnegative");
        Self {
            n: self.n,
            doubled: self.doubled.iter().map(|&x| x * c).collect(),
        }
    }

    /// Evaluate the quadratic form: `v^t (2T) v`.
    pub fn eval_doubled(&self, v: &[i64]) -> i64 {
        let mut acc: i128 = 0;
        for i in 0..self.n {
            for j in 0..self.n {
                acc += self.doubled[i * self.n + j] as i128 * v[i] as i128 * v[j] as i128;
            }
        }
        i64::try_from(acc).expect("quadratic form value overflows i64")
    }

    /// Classify by exact principal-minor computation.
    ///
    /// Positive definite iff all leading principal minors of `2T` are
    /// positive; positive semi-definite iff all principal minors (over
    /// every index subset) are nonnegative.
    pub fn definiteness(&self) -> Definiteness {
        if self.n == 0 {
            return Definiteness::PositiveDefinite;
        }
        if self.n <= 2 {
            // Hot path for the degrees the detectors live in.
            let r = self.doubled[0];
            if self.n == 1 {
                return if r > 0 {
                    Definiteness::PositiveDefinite
                } else if r == 0 {
                    Definiteness::SemidefiniteSingular
                } else {
                    Definiteness::Indefinite
                };
            }
            let s = self.doubled[1];
            let u = self.doubled[3];
            let d = r as i128 * u as i128 - s as i128 * s as i128;
            if r > 0 && d > 0 {
                return Definiteness::PositiveDefinite;
            }
            if r >= 0 && u >= 0 && d >= 0 {
                return Definiteness::SemidefiniteSingular;
            }
            return Definiteness::Indefinite;
        }
        let mut all_leading_positive = true;
        for k in 1..=self.n {
            let sub = self.leading_minor(k);
            if sub <= BigInt::zero() {
                all_leading_positive = false;
                break;
            }
        }
        if all_leading_positive {
            return Definiteness::PositiveDefinite;
        }
        // PSD requires every principal minor (not only the leading ones)
        // to be nonnegative.
        for mask in 1u32..(1 << self.n) {
            let idx: Vec<usize> = (0..self.n).filter(|&i| mask >> i & 1 == 1).collect();
            let m = idx.len();
            let sub: Vec<i64> = idx
                .iter()
                .flat_map(|&i| idx.iter().map(move |&j| self.doubled_entry(i, j)))
                .collect();
            if int_det(m, &sub) < BigInt::zero() {
                return Definiteness::Indefinite;
            }
        }
        Definiteness::SemidefiniteSingular
    }

    fn leading_minor(&self, k: usize) -> BigInt {
        let sub: Vec<i64> = (0..k)
            .flat_map(|i| (0..k).map(move |j| self.doubled_entry(i, j)))
            .collect();
        int_det(k, &sub)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.definiteness() == Definiteness::PositiveDefinite
    }

    pub fn is_semi_definite(&self) -> bool {
        self.definiteness() != Definiteness::Indefinite
    }

    /// Upper-left principal block of size `k` as a half-integral matrix.
    pub fn leading_block(&self, k: usize) -> HalfIntMatrix {
        let doubled: Vec<i64> = (0..k)
            .flat_map(|i| (0..k).map(move |j| self.doubled_entry(i, j)))
            .collect();
        HalfIntMatrix { n: k, doubled }
    }

    /// Lower-right principal block of size `k`.
    pub fn trailing_block(&self, k: usize) -> HalfIntMatrix {
        let off = self.n - k;
        let doubled: Vec<i64> = (0..k)
            .flat_map(|i| (0..k).map(move |j| self.doubled_entry(off + i, off + j)))
            .collect();
        HalfIntMatrix { n: k, doubled }
    }

    /// The matrix as an exact rational dense matrix (entries of `T`).
    pub fn to_rat(&self) -> RatMat {
        RatMat {
            rows: self.n,
            cols: self.n,
            data: self
                .doubled
                .iter()
                .map(|&x| BigRational::new(BigInt::from(x), BigInt::from(2)))
                .collect(),
        }
    }
}

/// An element of `GL_n(Z)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UnimodularMatrix {
    n: usize,
    entries: Vec<i64>,
}

impl UnimodularMatrix {
    pub fn new(n: usize, entries: Vec<i64>) -> Result<Self, MatrixError> {
        if entries.len() != n * n {
            return Err(MatrixError::IncompatibleShapes(format!(
                "expected {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        let d = int_det(n, &entries);
        if d.abs() != BigInt::one() {
            return Err(MatrixError::NotUnimodular);
        }
        Ok(Self { n, entries })
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1;
        }
        Self { n, entries }
    }

    /// Permutation matrix with 1's on the anti-diagonal.
    pub fn antidiagonal(n: usize) -> Self {
        let mut entries = vec![0; n * n];
        for i in 0..n {
            entries[i * n + (n - 1 - i)] = 1;
        }
        Self { n, entries }
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn det(&self) -> i64 {
        let d = int_det(self.n, &self.entries);
        if d.is_positive() {
            1
        } else {
            -1
        }
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &UnimodularMatrix) -> UnimodularMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut entries = vec![0i64; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc: i128 = 0;
                for k in 0..n {
                    acc += self.entries[i * n + k] as i128 * other.entries[k * n + j] as i128;
                }
                entries[i * n + j] = i64::try_from(acc).expect("unimodular product overflow");
            }
        }
        UnimodularMatrix { n, entries }
    }
}

/// Output of Minkowski reduction: `reduced = T[transform]`.
#[derive(Debug, Clone)]
pub struct ReductionResult {
    pub reduced: HalfIntMatrix,
    pub transform: UnimodularMatrix,
}

/// The Gram transform `T[U] = U^t T U`. Determinant and definiteness are
/// invariant; the result is again half-integral.
pub fn gram_transform(t: &HalfIntMatrix, u: &UnimodularMatrix) -> HalfIntMatrix {
    assert_eq!(t.degree(), u.degree(), "gram_transform size mismatch");
    let n = t.degree();
    // 2·T[U] = U^t (2T) U, computed in i128 then checked back to i64.
    let mut tmp = vec![0i128; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc: i128 = 0;
            for k in 0..n {
                acc += u.entry(k, i) as i128 * t.doubled_entry(k, j) as i128;
            }
            tmp[i * n + j] = acc;
        }
    }
    let mut doubled = vec![0i64; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc: i128 = 0;
            for k in 0..n {
                acc += tmp[i * n + k] * u.entry(k, j) as i128;
            }
            doubled[i * n + j] = i64::try_from(acc).expect("gram transform overflow");
        }
    }
    HalfIntMatrix { n, doubled }
}

/// Minkowski reduction.
///
/// Exact for degree <= 2: the result satisfies
/// `0 <= 2|offdiag(2T)| <= diag_1(2T) <= diag_2(2T)` with nonnegative
/// off-diagonal, the unique reduced representative of the `GL_2(Z)`-class.
/// For degree >= 3 a rational-arithmetic LLL pass is applied instead; the
/// output is size-reduced but not guaranteed Minkowski-minimal.
pub fn minkowski_reduce(t: &HalfIntMatrix) -> Result<ReductionResult, MatrixError> {
    if !t.is_positive_definite() {
        return Err(MatrixError::NotPositiveDefinite);
    }
    let n = t.degree();
    match n {
        0 | 1 => Ok(ReductionResult {
            reduced: t.clone(),
            transform: UnimodularMatrix::identity(n),
        }),
        2 => Ok(reduce_binary(t)),
        _ => Ok(lll_reduce(t)),
    }
}

fn reduce_binary(t: &HalfIntMatrix) -> ReductionResult {
    let mut cur = t.clone();
    let mut u = UnimodularMatrix::identity(2);
    loop {
        let r = cur.doubled_entry(0, 0);
        let s = cur.doubled_entry(0, 1);
        let q = cur.doubled_entry(1, 1);
        if r > q {
            let swap = UnimodularMatrix::new(2, vec![0, 1, 1, 0]).unwrap();
            cur = gram_transform(&cur, &swap);
            u = u.mul(&swap);
            continue;
        }
        if 2 * s.abs() > r {
            // Shear e2 -> e2 - k·e1 with k = round(s/r).
            let k = round_div(s, r);
            let shear = UnimodularMatrix::new(2, vec![1, -k, 0, 1]).unwrap();
            cur = gram_transform(&cur, &shear);
            u = u.mul(&shear);
            continue;
        }
        break;
    }
    if cur.doubled_entry(0, 1) < 0 {
        let flip = UnimodularMatrix::new(2, vec![1, 0, 0, -1]).unwrap();
        cur = gram_transform(&cur, &flip);
        u = u.mul(&flip);
    }
    ReductionResult { reduced: cur, transform: u }
}

/// Nearest-integer division, ties toward even magnitude not required:
/// any rounding with |s - k·r| <= r/2 terminates the Gauss loop.
fn round_div(s: i64, r: i64) -> i64 {
    debug_assert!(r > 0);
    let (q, rem) = (s.div_euclid(r), s.rem_euclid(r));
    if 2 * rem > r {
        q + 1
    } else {
        q
    }
}

/// LLL (delta = 3/4) on the Gram matrix in exact rational arithmetic.
fn lll_reduce(t: &HalfIntMatrix) -> ReductionResult {
    let n = t.degree();
    let gram = t.to_rat();
    let mut basis = UnimodularMatrix::identity(n);
    let half = Rat::new(BigInt::one(), BigInt::from(2));
    let delta = Rat::new(BigInt::from(3), BigInt::from(4));

    // Inner products with respect to the form: <x, y> = x^t T y.
    let ip = |b: &UnimodularMatrix, i: usize, j: usize| -> Rat {
        let mut acc = Rat::zero();
        for p in 0..n {
            for q in 0..n {
                acc += gram.get(p, q) * rat_int(b.entry(p, i)) * rat_int(b.entry(q, j));
            }
        }
        acc
    };

    let mut k = 1;
    let mut guard = 0usize;
    while k < n {
        guard += 1;
        assert!(guard < 100_000, "LLL failed to terminate");
        // Gram-Schmidt data for columns 0..=k of the current basis.
        let (mu, b_star_norm) = gram_schmidt(&basis, &ip, k, n);
        // Size-reduce column k against j < k.
        let mut changed = false;
        for j in (0..k).rev() {
            let m = &mu[k][j];
            if m.abs() > half {
                let r = rat_round(m);
                let shear = column_shear(n, j, k, -r);
                basis = basis.mul(&shear);
                changed = true;
            }
        }
        let (mu, b_star_norm) = if changed {
            gram_schmidt(&basis, &ip, k, n)
        } else {
            (mu, b_star_norm)
        };
        // Lovász condition.
        let lhs = b_star_norm[k].clone();
        let rhs = (delta.clone() - mu[k][k - 1].clone() * mu[k][k - 1].clone())
            * b_star_norm[k - 1].clone();
        if lhs < rhs {
            let swap = column_swap(n, k - 1, k);
            basis = basis.mul(&swap);
            k = k.max(2) - 1;
        } else {
            k += 1;
        }
    }
    let reduced = gram_transform(t, &basis);
    ReductionResult { reduced, transform: basis }
}

fn gram_schmidt(
    basis: &UnimodularMatrix,
    ip: &dyn Fn(&UnimodularMatrix, usize, usize) -> Rat,
    upto: usize,
    n: usize,
) -> (Vec<Vec<Rat>>, Vec<Rat>) {
    let mut mu = vec![vec![Rat::zero(); n]; n];
    let mut norm = vec![Rat::zero(); n];
    for i in 0..=upto {
        let mut ni = ip(basis, i, i);
        for j in 0..i {
            let mut proj = ip(basis, i, j);
            for l in 0..j {
                proj -= mu[i][l].clone() * mu[j][l].clone() * norm[l].clone();
            }
            mu[i][j] = proj / norm[j].clone();
            ni -= mu[i][j].clone() * mu[i][j].clone() * norm[j].clone();
        }
        norm[i] = ni;
    }
    (mu, norm)
}

fn rat_round(x: &Rat) -> i64 {
    let fl = x.floor();
    let frac = x - fl.clone();
    let fl_i = fl.to_integer();
    let k = if frac > Rat::new(BigInt::one(), BigInt::from(2)) {
        fl_i + BigInt::one()
    } else {
        fl_i
    };
    i64::try_from(&k).expect("rounding overflow")
}

fn column_shear(n: usize, from: usize, to: usize, c: i64) -> UnimodularMatrix {
    let mut m = UnimodularMatrix::identity(n);
    m.entries[from * n + to] = c;
    m
}

fn column_swap(n: usize, a: usize, b: usize) -> UnimodularMatrix {
    let mut m = UnimodularMatrix::identity(n);
    m.entries[a * n + a] = 0;
    m.entries[b * n + b] = 0;
    m.entries[a * n + b] = 1;
    m.entries[b * n + a] = 1;
    m
}

/// Unit count `ε(T) = #{U in GL_n(Z) : T[U] = T}`.
///
/// Candidate columns are enumerated inside the exact box bound
/// `|v_i|^2 <= maxdiag(2T)·tr(2T)^{n-1}/det(2T)`, which dominates
/// `1/λ_min(2T)` by rational eigenvalue bracketing; each assembled matrix
/// is verified exactly, so the count is complete.
pub fn automorph_count(t: &HalfIntMatrix) -> Result<u64, MatrixError> {
    if !t.is_positive_definite() {
        return Err(MatrixError::NotPositiveDefinite);
    }
    let n = t.degree();
    if n == 0 {
        return Ok(1);
    }
    if n == 1 {
        return Ok(2);
    }
    let bound = column_entry_bound(t);
    let diag: Vec<i64> = (0..n).map(|i| t.doubled_entry(i, i)).collect();
    // For each diagonal target, the candidate columns of that norm.
    let mut candidates: Vec<Vec<Vec<i64>>> = Vec::with_capacity(n);
    for &d in &diag {
        let mut cands = Vec::new();
        enumerate_box(n, bound, &mut |v| {
            if t.eval_doubled(v) == d {
                cands.push(v.to_vec());
            }
        });
        candidates.push(cands);
    }
    let mut count = 0u64;
    let mut cols: Vec<&Vec<i64>> = Vec::with_capacity(n);
    assemble(t, &candidates, &mut cols, &mut count);
    Ok(count)
}

fn assemble<'a>(
    t: &HalfIntMatrix,
    candidates: &'a [Vec<Vec<i64>>],
    cols: &mut Vec<&'a Vec<i64>>,
    count: &mut u64,
) {
    // SAFETY of recursion: depth = degree, tiny.
    let j = cols.len();
    let n = t.degree();
    if j == n {
        *count += 1;
        return;
    }
    'next: for cand in &candidates[j] {
        for (i, prev) in cols.iter().enumerate() {
            if bilinear_doubled(t, prev, cand) != t.doubled_entry(i, j) {
                continue 'next;
            }
        }
        // The Gram conditions force det U = ±1 for positive definite T,
        // so no extra determinant check is needed.
        cols.push(cand);
        assemble(t, candidates, cols, count);
        cols.pop();
    }
}

fn bilinear_doubled(t: &HalfIntMatrix, v: &[i64], w: &[i64]) -> i64 {
    let n = t.degree();
    let mut acc: i128 = 0;
    for i in 0..n {
        for j in 0..n {
            acc += t.doubled_entry(i, j) as i128 * v[i] as i128 * w[j] as i128;
        }
    }
    i64::try_from(acc).expect("bilinear form overflow")
}

fn column_entry_bound(t: &HalfIntMatrix) -> i64 {
    let n = t.degree() as u32;
    let maxdiag = (0..t.degree())
        .map(|i| t.doubled_entry(i, i))
        .max()
        .unwrap_or(0);
    let tr = BigInt::from(t.trace_doubled());
    let num = BigInt::from(maxdiag) * tr.pow(n - 1);
    let det = t.det_doubled();
    // ceil(sqrt(num/det)) + 1
    let q = num / det; // floor; +1 below absorbs the truncation
    let mut b = q.sqrt();
    b += 1;
    i64::try_from(&b).expect("entry bound overflow")
}

fn enumerate_box(n: usize, bound: i64, f: &mut dyn FnMut(&[i64])) {
    let mut v = vec![-bound; n];
    loop {
        f(&v);
        let mut i = 0;
        loop {
            if i == n {
                return;
            }
            v[i] += 1;
            if v[i] <= bound {
                break;
            }
            v[i] = -bound;
            i += 1;
        }
    }
}

/// One Minkowski-reduced representative per `GL_n(Z)`-class with
/// `det(T) <= det_bound`, in lexicographic order on the doubled entries.
pub fn enumerate_classes(
    n: usize,
    det_bound: &Rat,
) -> Result<Vec<HalfIntMatrix>, MatrixError> {
    match n {
        1 => {
            let mut out = Vec::new();
            let mut t = 1i64;
            while &rat_int(t) <= det_bound {
                out.push(HalfIntMatrix::diag(&[t]));
                t += 1;
            }
            Ok(out)
        }
        2 => {
            // Reduced domain: 0 <= 2s <= r <= u on 2T = [[r, s], [s, u]],
            // with det(2T) = ru - s^2 <= 4·det_bound.
            let four_d = det_bound * rat_int(4);
            let mut out = Vec::new();
            let mut r = 2i64;
            loop {
                // Minimal det(2T) at this r is r·r - (r/2)^2 = 3r^2/4.
                if rat_int(3 * r * r) > four_d.clone() * rat_int(4) {
                    break;
                }
                let mut u = r;
                loop {
                    let min_det = rat_int(r * u - (r / 2) * (r / 2));
                    if min_det > four_d {
                        break;
                    }
                    for s in 0..=(r / 2) {
                        let d2 = r * u - s * s;
                        if d2 > 0 && rat_int(d2) <= four_d {
                            out.push(
                                HalfIntMatrix::from_doubled(2, vec![r, s, s, u]).unwrap(),
                            );
                        }
                    }
                    u += 2;
                }
                r += 2;
            }
            out.sort_by(|a, b| a.doubled.cmp(&b.doubled));
            Ok(out)
        }
        _ => Err(MatrixError::UnsupportedDegree(n)),
    }
}

/// Block embedding `[[A, μ/2], [μ^t/2, M]]` of sizes `(n-r) + r`.
///
/// `mu` is an integer `(n-r) × r` matrix, row-major.
pub fn embed_block(
    a: &HalfIntMatrix,
    mu: &[i64],
    m: &HalfIntMatrix,
) -> Result<HalfIntMatrix, MatrixError> {
    let p = a.degree();
    let r = m.degree();
    if mu.len() != p * r {
        return Err(MatrixError::IncompatibleShapes(format!(
            "mu must be {}x{}",
            p, r
        )));
    }
    let n = p + r;
    let mut doubled = vec![0i64; n * n];
    for i in 0..p {
        for j in 0..p {
            doubled[i * n + j] = a.doubled_entry(i, j);
        }
    }
    for i in 0..r {
        for j in 0..r {
            doubled[(p + i) * n + (p + j)] = m.doubled_entry(i, j);
        }
    }
    for i in 0..p {
        for j in 0..r {
            doubled[i * n + (p + j)] = mu[i * r + j];
            doubled[(p + j) * n + i] = mu[i * r + j];
        }
    }
    Ok(HalfIntMatrix { n, doubled })
}

/// Determinant of the block embedding via the Schur complement:
/// `det(M) · det(A - ¼·μ M^{-1} μ^t)`. Errors if `det(M) = 0`.
pub fn schur_det(
    a: &HalfIntMatrix,
    mu: &[i64],
    m: &HalfIntMatrix,
) -> Result<Rat, MatrixError> {
    let p = a.degree();
    let r = m.degree();
    if mu.len() != p * r {
        return Err(MatrixError::IncompatibleShapes(format!(
            "mu must be {}x{}",
            p, r
        )));
    }
    schur_det_rat(&a.to_rat(), mu, &m.to_rat())
}

/// Schur determinant on exact rational blocks (shared with tests that use
/// arbitrary rational inputs).
pub fn schur_det_rat(a: &RatMat, mu: &[i64], m: &RatMat) -> Result<Rat, MatrixError> {
    let det_m = m.det();
    if det_m.is_zero() {
        return Err(MatrixError::SingularBlock);
    }
    let m_inv = m.inverse().ok_or(MatrixError::SingularBlock)?;
    let p = a.rows;
    let r = m.rows;
    let mu_rat = RatMat::from_ints(p, r, mu);
    let inner = mu_rat
        .mul(&m_inv)
        .mul(&mu_rat.transpose())
        .scale(&Rat::new(BigInt::one(), BigInt::from(4)));
    let schur = a.sub(&inner);
    Ok(det_m * schur.det())
}

/// Dense exact rational matrix. Small sizes only; used for Schur
/// complements, theta-component offsets, and determinant cross-checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Rat>,
}

impl RatMat {
    pub fn new(rows: usize, cols: usize, data: Vec<Rat>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }

    pub fn from_ints(rows: usize, cols: usize, v: &[i64]) -> Self {
        Self::new(rows, cols, v.iter().map(|&x| rat_int(x)).collect())
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> RatMat {
        let mut out = RatMat::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn mul(&self, other: &RatMat) -> RatMat {
        assert_eq!(self.cols, other.rows);
        let mut out = RatMat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Rat::zero();
                for k in 0..self.cols {
                    acc += self.get(i, k) * other.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn sub(&self, other: &RatMat) -> RatMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        RatMat::new(
            self.rows,
            self.cols,
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn scale(&self, c: &Rat) -> RatMat {
        RatMat::new(
            self.rows,
            self.cols,
            self.data.iter().map(|a| a * c).collect(),
        )
    }

    pub fn trace(&self) -> Rat {
        (0..self.rows).map(|i| self.get(i, i).clone()).sum()
    }

    /// Exact determinant by fraction-free Gaussian elimination.
    pub fn det(&self) -> Rat {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return Rat::one();
        }
        let mut m = self.data.clone();
        let mut det = Rat::one();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m[r * n + col].is_zero());
            let pivot = match pivot {
                Some(p) => p,
                None => return Rat::zero(),
            };
            if pivot != col {
                for j in 0..n {
                    m.swap(col * n + j, pivot * n + j);
                }
                det = -det;
            }
            let p = m[col * n + col].clone();
            det *= p.clone();
            for r in (col + 1)..n {
                let factor = m[r * n + col].clone() / p.clone();
                for j in col..n {
                    let sub = factor.clone() * m[col * n + j].clone();
                    m[r * n + j] -= sub;
                }
            }
        }
        det
    }

    /// Exact inverse by Gauss-Jordan; `None` when singular.
    pub fn inverse(&self) -> Option<RatMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.data.clone();
        let mut inv = RatMat::zero(n, n);
        for i in 0..n {
            inv.set(i, i, Rat::one());
        }
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m[r * n + col].is_zero())?;
            if pivot != col {
                for j in 0..n {
                    m.swap(col * n + j, pivot * n + j);
                    inv.data.swap(col * n + j, pivot * n + j);
                }
            }
            let p = m[col * n + col].clone();
            for j in 0..n {
                m[col * n + j] /= p.clone();
                inv.data[col * n + j] /= p.clone();
            }
            for r in 0..n {
                if r == col || m[r * n + col].is_zero() {
                    continue;
                }
                let factor = m[r * n + col].clone();
                for j in 0..n {
                    let a = factor.clone() * m[col * n + j].clone();
                    m[r * n + j] -= a;
                    let b = factor.clone() * inv.data[col * n + j].clone();
                    inv.data[r * n + j] -= b;
                }
            }
        }
        Some(inv)
    }

    /// Positive semi-definiteness by principal minors (small sizes).
    pub fn is_psd(&self) -> bool {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        for mask in 1u32..(1 << n) {
            let idx: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            let k = idx.len();
            let sub = RatMat::new(
                k,
                k,
                idx.iter()
                    .flat_map(|&i| idx.iter().map(move |&j| self.get(i, j).clone()))
                    .collect(),
            );
            if sub.det() < Rat::zero() {
                return false;
            }
        }
        true
    }
}

/// Exact integer determinant via the Bareiss algorithm.
pub(crate) fn int_det(n: usize, m: &[i64]) -> BigInt {
    if n == 0 {
        return BigInt::one();
    }
    if n == 1 {
        return BigInt::from(m[0]);
    }
    if n == 2 {
        return BigInt::from(m[0] as i128 * m[3] as i128 - m[1] as i128 * m[2] as i128);
    }
    let mut a: Vec<BigInt> = m.iter().map(|&x| BigInt::from(x)).collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..(n - 1) {
        if a[k * n + k].is_zero() {
            let swap = ((k + 1)..n).find(|&r| !a[r * n + k].is_zero());
            match swap {
                Some(r) => {
                    for j in 0..n {
                        a.swap(k * n + j, r * n + j);
                    }
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                let num = &a[i * n + j] * &a[k * n + k] - &a[i * n + k] * &a[k * n + j];
                a[i * n + j] = num / &prev;
            }
        }
        prev = a[k * n + k].clone();
    }
    sign * a[(n - 1) * n + (n - 1)].clone()
}


#[cfg(test)]
mod tests {
    use super::test_support::{random_pd_deg2, random_unimodular};
    use super::*;
    use crate::rat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hm(n: usize, d: &[i64]) -> HalfIntMatrix {
        HalfIntMatrix::from_doubled(n, d.to_vec()).unwrap()
    }

    #[test]
    fn definiteness_examples() {
        assert_eq!(
            HalfIntMatrix::identity(2).definiteness(),
            Definiteness::PositiveDefinite
        );
        assert_eq!(
            HalfIntMatrix::diag(&[1, 0]).definiteness(),
            Definiteness::SemidefiniteSingular
        );
        // det(2T) = 4 - 9 = -5 < 0.
        assert_eq!(
            hm(2, &[2, 3, 3, 2]).definiteness(),
            Definiteness::Indefinite
        );
        // Degree 3: a semidefinite matrix whose leading minors alone would
        // not expose indefiniteness of a variant.
        assert_eq!(
            hm(3, &[0, 0, 0, 0, 0, 0, 0, 0, -2]).definiteness(),
            Definiteness::Indefinite
        );
        assert_eq!(
            hm(3, &[2, 0, 0, 0, 0, 0, 0, 0, 2]).definiteness(),
            Definiteness::SemidefiniteSingular
        );
    }

    #[test]
    fn rejects_bad_construction() {
        assert_eq!(
            HalfIntMatrix::from_doubled(2, vec![1, 0, 0, 2]).unwrap_err(),
            MatrixError::OddDiagonal
        );
        assert_eq!(
            HalfIntMatrix::from_doubled(2, vec![2, 1, 0, 2]).unwrap_err(),
            MatrixError::NotSymmetric
        );
    }

    #[test]
    fn gram_transform_examples() {
        let t = HalfIntMatrix::identity(2);
        let u = UnimodularMatrix::new(2, vec![1, 1, 0, 1]).unwrap();
        let tu = gram_transform(&t, &u);
        assert_eq!(tu.doubled(), &[2, 2, 2, 4]);
        let id = UnimodularMatrix::identity(2);
        assert_eq!(gram_transform(&t, &id), t);
    }

    #[test]
    fn gram_transform_invariants_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let t = random_pd_deg2(&mut rng);
            let u = random_unimodular(&mut rng, 2);
            let tu = gram_transform(&t, &u);
            assert_eq!(tu.det(), t.det());
            assert_eq!(tu.definiteness(), t.definiteness());
            assert_eq!(
                automorph_count(&tu).unwrap(),
                automorph_count(&t).unwrap()
            );
        }
    }

    /// Brute-force reduction oracle: scan unimodular matrices with small
    /// entries and return the lexicographically least reduced image.
    fn reduce_oracle(t: &HalfIntMatrix) -> HalfIntMatrix {
        let mut best: Option<HalfIntMatrix> = None;
        for a in -3i64..=3 {
            for b in -3i64..=3 {
                for c in -3i64..=3 {
                    for d in -3i64..=3 {
                        if (a * d - b * c).abs() != 1 {
                            continue;
                        }
                        let u = UnimodularMatrix::new(2, vec![a, b, c, d]).unwrap();
                        let img = gram_transform(t, &u);
                        let r = img.doubled_entry(0, 0);
                        let s = img.doubled_entry(0, 1);
                        let q = img.doubled_entry(1, 1);
                        if 0 <= s && 2 * s <= r && r <= q {
                            if best.as_ref().map_or(true, |m| img.doubled() < m.doubled()) {
                                best = Some(img);
                            }
                        }
                    }
                }
            }
        }
        best.expect("oracle found no reduced image")
    }

    #[test]
    fn minkowski_reduce_examples() {
        let t = hm(2, &[2, 0, 0, 2]);
        let r = minkowski_reduce(&t).unwrap();
        assert_eq!(r.reduced, t);
        assert_eq!(r.transform, UnimodularMatrix::identity(2));

        for d in [&[2i64, 2, 2, 4][..], &[4, 2, 2, 2][..]] {
            let t = hm(2, d);
            let r = minkowski_reduce(&t).unwrap();
            assert_eq!(r.reduced.doubled(), &[2, 0, 0, 2]);
            assert_eq!(r.reduced, reduce_oracle(&t));
            assert_eq!(gram_transform(&t, &r.transform), r.reduced);
        }
    }

    #[test]
    fn minkowski_reduce_matches_oracle_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let t = random_pd_deg2(&mut rng);
            let r = minkowski_reduce(&t).unwrap();
            assert_eq!(gram_transform(&t, &r.transform), r.reduced);
            assert_eq!(r.reduced.det(), t.det());
            let red = &r.reduced;
            let (p, s, q) = (
                red.doubled_entry(0, 0),
                red.doubled_entry(0, 1),
                red.doubled_entry(1, 1),
            );
            assert!(0 <= s && 2 * s <= p && p <= q, "not reduced: {:?}", red);
        }
    }

    #[test]
    fn minkowski_reduce_rejects_non_pd() {
        assert_eq!(
            minkowski_reduce(&hm(2, &[2, 3, 3, 2])).unwrap_err(),
            MatrixError::NotPositiveDefinite
        );
    }

    #[test]
    fn lll_reduce_degree3_preserves_class_data() {
        let t = hm(3, &[4, 3, 1, 3, 6, 2, 1, 2, 8]);
        let r = minkowski_reduce(&t).unwrap();
        assert_eq!(gram_transform(&t, &r.transform), r.reduced);
        assert_eq!(r.reduced.det(), t.det());
        assert!(r.reduced.is_positive_definite());
        // Size reduction: diagonal dominates off-diagonal pairs.
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(
                        r.reduced.doubled_entry(i, j).abs()
                            <= r.reduced.doubled_entry(i, i).max(r.reduced.doubled_entry(j, j))
                    );
                }
            }
        }
    }

    /// Enumeration oracle with a fixed entry bound.
    fn automorph_oracle(t: &HalfIntMatrix, bound: i64) -> u64 {
        let n = t.degree();
        let mut count = 0u64;
        let total = (2 * bound + 1).pow((n * n) as u32);
        for code in 0..total {
            let mut c = code;
            let mut entries = vec![0i64; n * n];
            for e in entries.iter_mut() {
                *e = c % (2 * bound + 1) - bound;
                c /= 2 * bound + 1;
            }
            if int_det(n, &entries).abs() != BigInt::one() {
                continue;
            }
            let u = UnimodularMatrix { n, entries };
            if gram_transform(t, &u) == *t {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn automorph_count_examples() {
        assert_eq!(automorph_count(&HalfIntMatrix::identity(1)).unwrap(), 2);
        let i2 = HalfIntMatrix::identity(2);
        assert_eq!(automorph_count(&i2).unwrap(), 8);
        assert_eq!(automorph_oracle(&i2, 2), 8);
        // Generic reduced binary form: distinct diagonal, nonzero
        // off-diagonal -> only ±identity survives.
        let generic = hm(2, &[4, 1, 1, 6]);
        assert_eq!(automorph_count(&generic).unwrap(), 2);
        assert_eq!(automorph_oracle(&generic, 2), 2);
    }

    #[test]
    fn automorph_count_matches_oracle_small_det() {
        for t in enumerate_classes(2, &rat_int(4)).unwrap() {
            let fast = automorph_count(&t).unwrap();
            assert_eq!(fast, automorph_oracle(&t, 4), "mismatch at {:?}", t);
            assert!(fast % 2 == 0);
        }
    }

    #[test]
    fn enumerate_classes_degree1() {
        let cls = enumerate_classes(1, &rat_int(3)).unwrap();
        let expect: Vec<_> = [1i64, 2, 3].iter().map(|&t| HalfIntMatrix::diag(&[t])).collect();
        assert_eq!(cls, expect);
    }

    #[test]
    fn enumerate_classes_degree2_small() {
        let cls = enumerate_classes(2, &rat_int(1)).unwrap();
        assert_eq!(cls.len(), 2);
        assert_eq!(cls[0].doubled(), &[2, 0, 0, 2]);
        assert_eq!(cls[1].doubled(), &[2, 1, 1, 2]);

        // The minimal binary class has det(T) = 3/4, so a bound below it
        // yields nothing and the bound 3/4 yields exactly that class.
        assert!(enumerate_classes(2, &rat(1, 2)).unwrap().is_empty());
        let cls = enumerate_classes(2, &rat(3, 4)).unwrap();
        assert_eq!(cls.len(), 1);
        assert_eq!(cls[0].doubled(), &[2, 1, 1, 2]);

        assert_eq!(
            enumerate_classes(3, &rat_int(1)).unwrap_err(),
            MatrixError::UnsupportedDegree(3)
        );
    }

    /// All-matrices-then-dedupe oracle for the class count.
    fn class_count_oracle(det_bound: i64) -> usize {
        let mut reps = std::collections::BTreeSet::new();
        let lim = 2 * det_bound + 2;
        for r in 1..=lim {
            for u in 1..=lim {
                for s in -lim..=lim {
                    let t2 = [2 * r, s, s, 2 * u];
                    let m = hm(2, &t2);
                    if !m.is_positive_definite() {
                        continue;
                    }
                    if m.det() > rat_int(det_bound) {
                        continue;
                    }
                    let red = minkowski_reduce(&m).unwrap().reduced;
                    reps.insert(red.doubled().to_vec());
                }
            }
        }
        reps.len()
    }

    #[test]
    fn class_count_matches_bruteforce_oracle() {
        for d in 1..=4 {
            let fast = enumerate_classes(2, &rat_int(d)).unwrap().len();
            assert_eq!(fast, class_count_oracle(d), "det bound {}", d);
        }
    }

    #[test]
    fn reduced_representatives_are_canonical() {
        // Reducing any transform of a class rep returns the identical rep.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for t in enumerate_classes(2, &rat_int(6)).unwrap() {
            for _ in 0..20 {
                let u = random_unimodular(&mut rng, 2);
                let moved = gram_transform(&t, &u);
                assert_eq!(minkowski_reduce(&moved).unwrap().reduced, t);
            }
        }
    }

    #[test]
    fn embed_block_examples() {
        // Block-diagonal case.
        let a = HalfIntMatrix::diag(&[2]);
        let m = HalfIntMatrix::diag(&[3]);
        let t = embed_block(&a, &[0], &m).unwrap();
        assert_eq!(t.det(), rat_int(6));
        // n=2, A=(1), mu=(1), M=(1): 2T = [[2,1],[1,2]], det 3/4.
        let one = HalfIntMatrix::diag(&[1]);
        let t = embed_block(&one, &[1], &one).unwrap();
        assert_eq!(t.doubled(), &[2, 1, 1, 2]);
        assert_eq!(t.det(), rat(3, 4));
        assert_eq!(schur_det(&one, &[1], &one).unwrap(), rat(3, 4));
    }

    #[test]
    fn schur_det_rejects_singular_block() {
        let a = HalfIntMatrix::diag(&[1]);
        let m = HalfIntMatrix::zero(1);
        assert_eq!(
            schur_det(&a, &[0], &m).unwrap_err(),
            MatrixError::SingularBlock
        );
    }

    #[test]
    fn schur_identity_random_rational() {
        let mut rng = ChaCha8Rng::seed_from_u64(20260809);
        for _ in 0..1000 {
            let p = rng.gen_range(1..=2usize);
            let r = rng.gen_range(1..=2usize);
            let a = random_rat_sym(&mut rng, p);
            let mut m = random_rat_sym(&mut rng, r);
            if m.det().is_zero() {
                m.set(0, 0, m.get(0, 0) + rat_int(7));
            }
            if m.det().is_zero() {
                continue;
            }
            let mu: Vec<i64> = (0..p * r).map(|_| rng.gen_range(-5..=5)).collect();
            // Direct determinant of the full rational block matrix.
            let n = p + r;
            let mut full = RatMat::zero(n, n);
            for i in 0..p {
                for j in 0..p {
                    full.set(i, j, a.get(i, j).clone());
                }
            }
            for i in 0..r {
                for j in 0..r {
                    full.set(p + i, p + j, m.get(i, j).clone());
                }
            }
            for i in 0..p {
                for j in 0..r {
                    let half = rat(mu[i * r + j], 2);
                    full.set(i, p + j, half.clone());
                    full.set(p + j, i, half);
                }
            }
            assert_eq!(full.det(), schur_det_rat(&a, &mu, &m).unwrap());
        }
    }

    fn random_rat_sym(rng: &mut ChaCha8Rng, n: usize) -> RatMat {
        let mut m = RatMat::zero(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = rat(rng.gen_range(-8..=8), rng.gen_range(1..=4));
                m.set(i, j, v.clone());
                m.set(j, i, v);
            }
        }
        m
    }

    #[test]
    fn det_invariance_under_random_words() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = hm(2, &[4, 1, 1, 6]);
        for _ in 0..100 {
            let u = random_unimodular(&mut rng, 2);
            assert_eq!(gram_transform(&t, &u).det(), t.det());
        }
    }
}
