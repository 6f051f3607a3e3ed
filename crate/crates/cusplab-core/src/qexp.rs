//! Truncated Fourier expansions with exact rational coefficients.
//!
//! An expansion represents `F(Z) = Σ_T a_F(T) e(tr(T Z)/M)` with indices
//! `T` half-integral positive semi-definite and `tr(T) <= trace_bound`.
//! Truncation is graded by trace: trace is additive under index addition,
//! so products of truncated expansions are exactly correct below the
//! common bound. Coefficients are exact rationals throughout; floats only
//! appear in [`FourierExpansion::evaluate`].

use crate::matrix::{gram_transform, Definiteness, HalfIntMatrix, UnimodularMatrix};
use crate::Rat;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QexpError {
    #[error("incompatible shapes: {0}")]
    IncompatibleShapes(String),
    #[error("index is not positive semi-definite: {0:?}")]
    IndefiniteIndex(HalfIntMatrix),
    #[error("index trace {got} exceeds trace bound {bound}")]
    TraceBound { got: i64, bound: i64 },
    #[error("Y is not positive definite")]
    NonPositiveY,
}

/// A weight `k ∈ ½Z`, stored as `2k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfWeight {
    twice_k: i64,
}

impl HalfWeight {
    pub fn from_twice(twice_k: i64) -> Self {
        Self { twice_k }
    }

    pub fn integral(k: i64) -> Self {
        Self { twice_k: 2 * k }
    }

    pub fn twice(&self) -> i64 {
        self.twice_k
    }

    /// The weight as an exact rational.
    pub fn as_rat(&self) -> Rat {
        crate::rat(self.twice_k, 2)
    }

    pub fn add(&self, other: HalfWeight) -> HalfWeight {
        Self { twice_k: self.twice_k + other.twice_k }
    }

    /// `k - r/2`, the weight of a theta component over an `r`-slice.
    pub fn minus_half(&self, r: i64) -> HalfWeight {
        Self { twice_k: self.twice_k - r }
    }
}

/// Verdict of the positive-definite-support scan at the cusp at infinity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportVerdict {
    pub all_positive_definite: bool,
    /// First (in canonical index order) non-PD index carrying a nonzero
    /// coefficient; present iff `all_positive_definite` is false.
    pub witness: Option<HalfIntMatrix>,
}

/// A truncated exact Fourier expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FourierExpansion {
    degree: usize,
    weight: HalfWeight,
    denom_m: u64,
    trace_bound: i64,
    coeffs: BTreeMap<HalfIntMatrix, Rat>,
}

impl FourierExpansion {
    pub fn zero(degree: usize, weight: HalfWeight, denom_m: u64, trace_bound: i64) -> Self {
        assert!(denom_m >= 1);
        assert!(trace_bound >= 0);
        Self { degree, weight, denom_m, trace_bound, coeffs: BTreeMap::new() }
    }

    /// The constant expansion with `a(0) = c`.
    pub fn constant(degree: usize, weight: HalfWeight, trace_bound: i64, c: Rat) -> Self {
        let mut f = Self::zero(degree, weight, 1, trace_bound);
        f.set(HalfIntMatrix::zero(degree), c);
        f
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn weight(&self) -> HalfWeight {
        self.weight
    }

    pub fn denom_m(&self) -> u64 {
        self.denom_m
    }

    pub fn trace_bound(&self) -> i64 {
        self.trace_bound
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Iterate stored (index, coefficient) pairs in canonical order
    /// (trace, then lexicographic on doubled entries).
    pub fn iter(&self) -> impl Iterator<Item = (&HalfIntMatrix, &Rat)> {
        self.coeffs.iter()
    }

    /// Coefficient at `T` (zero when absent).
    pub fn coeff(&self, t: &HalfIntMatrix) -> Rat {
        self.coeffs.get(t).cloned().unwrap_or_else(Rat::zero)
    }

    /// Set a coefficient. Panics on indices outside the contract; zero
    /// values erase the entry to keep the canonical form.
    pub fn set(&mut self, t: HalfIntMatrix, value: Rat) {
        self.try_set(t, value).unwrap()
    }

    pub fn try_set(&mut self, t: HalfIntMatrix, value: Rat) -> Result<(), QexpError> {
        if t.degree() != self.degree {
            return Err(QexpError::IncompatibleShapes(format!(
                "index degree {} vs expansion degree {}",
                t.degree(),
                self.degree
            )));
        }
        if t.definiteness() == Definiteness::Indefinite {
            return Err(QexpError::IndefiniteIndex(t));
        }
        if t.trace() > self.trace_bound {
            return Err(QexpError::TraceBound { got: t.trace(), bound: self.trace_bound });
        }
        if value.is_zero() {
            self.coeffs.remove(&t);
        } else {
            self.coeffs.insert(t, value);
        }
        Ok(())
    }

    /// Add into a coefficient, dropping indices beyond the trace bound.
    pub fn accumulate(&mut self, t: HalfIntMatrix, value: Rat) {
        if t.trace() > self.trace_bound || value.is_zero() {
            return;
        }
        match self.coeffs.entry(t) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(value);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += value;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<(), QexpError> {
        if self.degree != other.degree {
            return Err(QexpError::IncompatibleShapes(format!(
                "degree {} vs {}",
                self.degree, other.degree
            )));
        }
        Ok(())
    }

    /// Coefficient-wise sum. Requires equal degree, weight, and M; the
    /// result's trace bound is the minimum of the operands'.
    pub fn add(&self, other: &Self) -> Result<Self, QexpError> {
        self.check_compatible(other)?;
        if self.weight != other.weight {
            return Err(QexpError::IncompatibleShapes(format!(
                "weight 2k={} vs 2k={}",
                self.weight.twice(),
                other.weight.twice()
            )));
        }
        if self.denom_m != other.denom_m {
            return Err(QexpError::IncompatibleShapes(format!(
                "denominator M={} vs M={}",
                self.denom_m, other.denom_m
            )));
        }
        let bound = self.trace_bound.min(other.trace_bound);
        let mut out = Self::zero(self.degree, self.weight, self.denom_m, bound);
        for (t, a) in self.coeffs.iter().chain(other.coeffs.iter()) {
            if t.trace() <= bound {
                out.accumulate(t.clone(), a.clone());
            }
        }
        Ok(out)
    }

    /// Scalar multiple.
    pub fn scale(&self, q: &Rat) -> Self {
        let mut out = Self::zero(self.degree, self.weight, self.denom_m, self.trace_bound);
        if q.is_zero() {
            return out;
        }
        for (t, a) in &self.coeffs {
            out.coeffs.insert(t.clone(), a * q);
        }
        out
    }

    /// Exact series product. Weights add; mixed denominators combine by
    /// rescaling both operands to `lcm(M1, M2)`. Every coefficient with
    /// trace below the resulting bound is exact.
    pub fn multiply(&self, other: &Self) -> Result<Self, QexpError> {
        self.check_compatible(other)?;
        let m = self.denom_m.lcm(&other.denom_m);
        let f = self.rescaled_to(m);
        let g = other.rescaled_to(m);
        let bound = f.trace_bound.min(g.trace_bound);
        let weight = f.weight.add(g.weight);
        let mut out = Self::zero(self.degree, weight, m, bound);
        // Convolution over stored support; PSD indices have nonnegative
        // trace, so the trace grading prunes exactly.
        for (t1, a1) in &f.coeffs {
            if t1.trace() > bound {
                continue;
            }
            for (t2, a2) in &g.coeffs {
                if t1.trace() + t2.trace() > bound {
                    continue;
                }
                let sum = add_indices(t1, t2);
                out.accumulate(sum, a1 * a2);
            }
        }
        Ok(out)
    }

    /// Rescale the stored indices so the expansion is expressed with
    /// denominator `m` (a multiple of the current one).
    pub fn rescaled_to(&self, m: u64) -> Self {
        assert!(m % self.denom_m == 0, "target denominator must be a multiple");
        let c = (m / self.denom_m) as i64;
        if c == 1 {
            return self.clone();
        }
        let mut out = Self::zero(self.degree, self.weight, m, self.trace_bound * c);
        for (t, a) in &self.coeffs {
            out.coeffs.insert(t.scaled(c), a.clone());
        }
        out
    }

    /// Reduce the denominator when every stored index (and M itself) is
    /// divisible by `d`. Returns `None` if any index fails to divide.
    pub fn reduced_denom(&self, d: u64) -> Option<Self> {
        if d == 0 || self.denom_m % d != 0 {
            return None;
        }
        let di = d as i64;
        let mut out = Self::zero(
            self.degree,
            self.weight,
            self.denom_m / d,
            self.trace_bound / di,
        );
        for (t, a) in &self.coeffs {
            let doubled = t.doubled();
            if doubled.iter().any(|&x| x % di != 0) {
                return None;
            }
            let down: Vec<i64> = doubled.iter().map(|&x| x / di).collect();
            let idx = HalfIntMatrix::from_doubled(self.degree, down).ok()?;
            out.coeffs.insert(idx, a.clone());
        }
        Some(out)
    }

    /// Argument dilation `τ ↦ d·τ` (degree 1): index map `n ↦ d·n`.
    /// The trace bound is unchanged, so indices pushed above it are
    /// dropped — lossy near the bound by the truncation contract.
    pub fn dilate(&self, d: u64) -> Self {
        assert_eq!(self.degree, 1, "dilate is a degree-1 operation");
        assert!(d >= 1);
        if d == 1 {
            return self.clone();
        }
        let mut out = Self::zero(self.degree, self.weight, self.denom_m, self.trace_bound);
        for (t, a) in &self.coeffs {
            let scaled = t.scaled(d as i64);
            if scaled.trace() <= self.trace_bound {
                out.coeffs.insert(scaled, a.clone());
            }
        }
        out
    }

    /// Coefficient pullback under `U`: the result has coefficient
    /// `a_F(T[U])` at `T`. Indices landing outside the truncation are
    /// dropped.
    pub fn pullback(&self, u: &UnimodularMatrix) -> Self {
        assert_eq!(self.degree, u.degree(), "pullback size mismatch");
        let mut out = Self::zero(self.degree, self.weight, self.denom_m, self.trace_bound);
        // The stored support maps bijectively through U^{-1}; iterating it
        // avoids scanning the whole index cone.
        let u_inv = invert_unimodular(u);
        for (t, a) in &self.coeffs {
            // T' with T'[U] = T, i.e. T' = T[U^{-1}].
            let t_new = gram_transform(t, &u_inv);
            if t_new.trace() <= self.trace_bound {
                out.coeffs.insert(t_new, a.clone());
            }
        }
        out
    }

    /// Scan stored indices in canonical order for the first non-PD index
    /// with nonzero coefficient.
    pub fn support_verdict(&self) -> SupportVerdict {
        for (t, _) in &self.coeffs {
            if t.definiteness() != Definiteness::PositiveDefinite {
                return SupportVerdict { all_positive_definite: false, witness: Some(t.clone()) };
            }
        }
        SupportVerdict { all_positive_definite: true, witness: None }
    }

    /// Numeric evaluation of the truncated series at `Z = X + iY` in
    /// double precision. Truncation error is not estimated here.
    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> Result<Complex64, QexpError> {
        let n = self.degree;
        assert_eq!(x.len(), n * n, "X must be n×n row-major");
        assert_eq!(y.len(), n * n, "Y must be n×n row-major");
        if !sym_pd_float(n, y) {
            return Err(QexpError::NonPositiveY);
        }
        let m = self.denom_m as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (t, a) in &self.coeffs {
            // tr(T·(X+iY)) with T = doubled/2.
            let mut tr_x = 0.0;
            let mut tr_y = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let tv = t.doubled_entry(i, j) as f64 / 2.0;
                    tr_x += tv * x[j * n + i];
                    tr_y += tv * y[j * n + i];
                }
            }
            let phase = 2.0 * std::f64::consts::PI * tr_x / m;
            let decay = (-2.0 * std::f64::consts::PI * tr_y / m).exp();
            let av = a.to_f64().unwrap_or(f64::NAN);
            acc += Complex64::new(phase.cos(), phase.sin()) * decay * av;
        }
        Ok(acc)
    }
}

/// Index sum `T1 + T2` (the convolution index of a series product).
pub fn add_indices(t1: &HalfIntMatrix, t2: &HalfIntMatrix) -> HalfIntMatrix {
    assert_eq!(t1.degree(), t2.degree());
    let n = t1.degree();
    let doubled: Vec<i64> = t1
        .doubled()
        .iter()
        .zip(t2.doubled())
        .map(|(a, b)| a + b)
        .collect();
    HalfIntMatrix::from_doubled(n, doubled).expect("sum of half-integral is half-integral")
}

/// Exact inverse of a unimodular matrix (again unimodular).
pub fn invert_unimodular(u: &UnimodularMatrix) -> UnimodularMatrix {
    let n = u.degree();
    if n == 0 {
        return UnimodularMatrix::identity(0);
    }
    // Adjugate divided by det; det = ±1 keeps everything integral.
    let det = u.det();
    let mut inv = vec![0i64; n * n];
    for i in 0..n {
        for j in 0..n {
            // Cofactor C_{ji}.
            let minor: Vec<i64> = (0..n)
                .filter(|&r| r != j)
                .flat_map(|r| {
                    (0..n)
                        .filter(|&c| c != i)
                        .map(move |c| u.entry(r, c))
                        .collect::<Vec<_>>()
                })
                .collect();
            let md = int_det_small(n - 1, &minor);
            let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
            inv[i * n + j] = sign * md * det;
        }
    }
    UnimodularMatrix::new(n, inv).expect("inverse of unimodular is unimodular")
}

fn int_det_small(n: usize, m: &[i64]) -> i64 {
    match n {
        0 => 1,
        1 => m[0],
        2 => m[0] * m[3] - m[1] * m[2],
        _ => {
            // Laplace expansion; fine for the tiny sizes used here.
            let mut acc: i128 = 0;
            for j in 0..n {
                let minor: Vec<i64> = (1..n)
                    .flat_map(|r| {
                        (0..n)
                            .filter(|&c| c != j)
                            .map(move |c| m[r * n + c])
                            .collect::<Vec<_>>()
                    })
                    .collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                acc += sign as i128 * m[j] as i128 * int_det_small(n - 1, &minor) as i128;
            }
            i64::try_from(acc).expect("determinant overflow")
        }
    }
}

fn sym_pd_float(n: usize, y: &[f64]) -> bool {
    // Cholesky without pivoting; fails iff not (numerically) PD.
    let mut a = y.to_vec();
    for k in 0..n {
        let mut d = a[k * n + k];
        for j in 0..k {
            d -= a[k * n + j] * a[k * n + j];
        }
        if d <= 0.0 {
            return false;
        }
        let d = d.sqrt();
        a[k * n + k] = d;
        for i in (k + 1)..n {
            let mut v = a[i * n + k];
            for j in 0..k {
                v -= a[i * n + j] * a[k * n + j];
            }
            a[i * n + k] = v / d;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::test_support::{random_unimodular, random_psd_index_deg2};
    use crate::{rat, rat_int};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unary_theta_for_test(bound: i64) -> FourierExpansion {
        let mut f = FourierExpansion::zero(1, HalfWeight::from_twice(1), 1, bound);
        let mut m = 0i64;
        while m * m <= bound {
            let c = if m == 0 { 1 } else { 2 };
            f.set(HalfIntMatrix::diag(&[m * m]), rat_int(c));
            m += 1;
        }
        f
    }

    #[test]
    fn add_and_scale_identities() {
        let f = unary_theta_for_test(30);
        let zero = FourierExpansion::zero(1, f.weight(), 1, 30);
        assert_eq!(f.add(&zero).unwrap(), f);
        assert!(f.scale(&Rat::zero()).is_zero());
        assert!(f.add(&f.scale(&rat_int(-1))).unwrap().is_zero());
    }

    #[test]
    fn add_rejects_incompatible() {
        let f = unary_theta_for_test(10);
        let g = FourierExpansion::zero(1, HalfWeight::integral(2), 1, 10);
        assert!(matches!(f.add(&g), Err(QexpError::IncompatibleShapes(_))));
        let h = FourierExpansion::zero(2, f.weight(), 1, 10);
        assert!(matches!(f.add(&h), Err(QexpError::IncompatibleShapes(_))));
    }

    #[test]
    fn rejects_indefinite_index() {
        let mut f = FourierExpansion::zero(2, HalfWeight::integral(2), 1, 10);
        let bad = HalfIntMatrix::from_doubled(2, vec![2, 3, 3, 2]).unwrap();
        assert!(matches!(
            f.try_set(bad, rat_int(1)),
            Err(QexpError::IndefiniteIndex(_))
        ));
    }

    #[test]
    fn theta_square_pair_count() {
        // (Σ q^{n^2})^2 has coefficient r_2(1) = 4 at n=1.
        let th = unary_theta_for_test(20);
        let sq = th.multiply(&th).unwrap();
        assert_eq!(sq.coeff(&HalfIntMatrix::diag(&[1])), rat_int(4));
        // Brute-force pair count oracle across the shared range.
        for n in 0..=20i64 {
            let mut count = 0;
            for a in -5..=5i64 {
                for b in -5..=5i64 {
                    if a * a + b * b == n {
                        count += 1;
                    }
                }
            }
            assert_eq!(sq.coeff(&HalfIntMatrix::diag(&[n])), rat_int(count), "n={}", n);
        }
        assert_eq!(sq.weight(), HalfWeight::from_twice(2));
    }

    #[test]
    fn multiply_by_constant_one_is_identity() {
        let th = unary_theta_for_test(25);
        let one = FourierExpansion::constant(1, HalfWeight::from_twice(0), 25, rat_int(1));
        assert_eq!(th.multiply(&one).unwrap(), th);
    }

    #[test]
    fn dilate_examples() {
        let th = unary_theta_for_test(64);
        assert_eq!(th.dilate(1), th);
        let th4 = th.dilate(4);
        for (t, _) in th4.iter() {
            let n = t.trace();
            assert!(n % 4 == 0);
            let m = ((n / 4) as f64).sqrt().round() as i64;
            assert_eq!(m * m * 4, n);
        }
        // Dilating relabels the index.
        let mut f = FourierExpansion::zero(1, HalfWeight::integral(12), 1, 10);
        f.set(HalfIntMatrix::diag(&[1]), rat_int(1));
        let f2 = f.dilate(2);
        assert_eq!(f2.coeff(&HalfIntMatrix::diag(&[2])), rat_int(1));
        assert_eq!(f2.coeff(&HalfIntMatrix::diag(&[1])), rat_int(0));
    }

    #[test]
    fn dilate_commutes_with_multiply_on_common_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for _ in 0..50 {
            let f = random_exp_deg1(&mut rng, 10);
            let g = random_exp_deg1(&mut rng, 10);
            // With source bound 10 and dilation 3, both routes retain all
            // indices up to 30, so equality is exact.
            let fg = f.multiply(&g).unwrap();
            let lifted = raise_bound_deg1(&fg, 30).dilate(3);
            let rhs = raise_bound_deg1(&f, 30)
                .dilate(3)
                .multiply(&raise_bound_deg1(&g, 30).dilate(3))
                .unwrap();
            assert_eq!(lifted, rhs);
        }
    }

    fn raise_bound_deg1(f: &FourierExpansion, bound: i64) -> FourierExpansion {
        let mut out = FourierExpansion::zero(1, f.weight(), f.denom_m(), bound);
        for (t, a) in f.iter() {
            out.set(t.clone(), a.clone());
        }
        out
    }

    #[test]
    fn ring_laws_random_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..200 {
            let f = random_exp_deg1(&mut rng, 16);
            let g = random_exp_deg1(&mut rng, 16);
            let h = random_exp_deg1(&mut rng, 16);
            let fg = f.multiply(&g).unwrap();
            let gf = g.multiply(&f).unwrap();
            assert_eq!(fg, gf);
            let assoc_l = fg.multiply(&h).unwrap();
            let assoc_r = f.multiply(&g.multiply(&h).unwrap()).unwrap();
            assert_eq!(assoc_l, assoc_r);
            let dist_l = f.multiply(&g.add(&h).unwrap()).unwrap();
            let dist_r = f.multiply(&g).unwrap().add(&f.multiply(&h).unwrap()).unwrap();
            assert_eq!(dist_l, dist_r);
        }
    }

    #[test]
    fn pullback_examples() {
        let mut f = FourierExpansion::zero(2, HalfWeight::integral(4), 1, 12);
        f.set(HalfIntMatrix::identity(2), rat_int(5));
        let id = UnimodularMatrix::identity(2);
        assert_eq!(f.pullback(&id), f);
        // Single index I2, U = [[1,1],[0,1]]: the coefficient moves to the
        // preimage class I2[U^{-1}].
        let u = UnimodularMatrix::new(2, vec![1, 1, 0, 1]).unwrap();
        let pb = f.pullback(&u);
        let u_inv = invert_unimodular(&u);
        let target = gram_transform(&HalfIntMatrix::identity(2), &u_inv);
        assert_eq!(pb.coeff(&target), rat_int(5));
        assert_eq!(pb.support_len(), 1);
        // And the defining property: a_pb(T) = a_F(T[U]) on the moved index.
        assert_eq!(pb.coeff(&target), f.coeff(&gram_transform(&target, &u)));
    }

    #[test]
    fn pullback_composition_is_matrix_product() {
        // With a_pb(T) = a_F(T[U]), composing pullbacks multiplies the
        // transforms in reverse: pullback(pullback(F,U),V) = pullback(F,VU).
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let f = random_exp_deg2(&mut rng, 14);
            let u = random_unimodular(&mut rng, 2);
            let v = random_unimodular(&mut rng, 2);
            let lhs = f.pullback(&u).pullback(&v);
            let rhs = f.pullback(&v.mul(&u));
            for (t, a) in lhs.iter() {
                assert_eq!(rhs.coeff(t), *a);
            }
            // The two-step route drops indices whose intermediate image
            // T[V] exceeds the trace bound; equality holds where it stays
            // inside.
            for (t, a) in rhs.iter() {
                if gram_transform(t, &v).trace() <= f.trace_bound() {
                    assert_eq!(lhs.coeff(t), *a);
                }
            }
        }
    }

    #[test]
    fn support_verdict_examples() {
        let zero = FourierExpansion::zero(1, HalfWeight::integral(12), 1, 10);
        assert!(zero.support_verdict().all_positive_definite);

        let mut e4ish = FourierExpansion::zero(1, HalfWeight::integral(4), 1, 10);
        e4ish.set(HalfIntMatrix::zero(1), rat_int(1));
        e4ish.set(HalfIntMatrix::diag(&[1]), rat_int(240));
        let v = e4ish.support_verdict();
        assert!(!v.all_positive_definite);
        assert_eq!(v.witness, Some(HalfIntMatrix::zero(1)));
    }

    #[test]
    fn evaluate_examples() {
        let zero = FourierExpansion::zero(1, HalfWeight::integral(12), 1, 10);
        let z = zero.evaluate(&[0.0], &[1.0]).unwrap();
        assert_eq!(z, Complex64::new(0.0, 0.0));

        let one = FourierExpansion::constant(1, HalfWeight::from_twice(0), 10, rat_int(1));
        for y in [0.3, 1.0, 2.5] {
            let v = one.evaluate(&[0.7], &[y]).unwrap();
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }

        // Theta at X=0, Y=(1): independent float summation oracle.
        let th = unary_theta_for_test(400);
        let got = th.evaluate(&[0.0], &[1.0]).unwrap();
        let mut oracle = 0.0f64;
        for m in -20i64..=20 {
            oracle += (-2.0 * std::f64::consts::PI * (m * m) as f64).exp();
        }
        assert!((got.re - oracle).abs() < 1e-14);
        assert!(got.im.abs() < 1e-14);

        let err = th.evaluate(&[0.0], &[-1.0]);
        assert_eq!(err, Err(QexpError::NonPositiveY));
    }

    #[test]
    fn mixed_denominator_multiply() {
        // f with M=2 support {1/2}, g with M=1 support {1}:
        // product lives at M=2 with exponent 3/2.
        let mut f = FourierExpansion::zero(1, HalfWeight::from_twice(1), 2, 8);
        f.set(HalfIntMatrix::diag(&[1]), rat_int(3));
        let mut g = FourierExpansion::zero(1, HalfWeight::from_twice(1), 1, 8);
        g.set(HalfIntMatrix::diag(&[1]), rat_int(5));
        let prod = f.multiply(&g).unwrap();
        assert_eq!(prod.denom_m(), 2);
        assert_eq!(prod.coeff(&HalfIntMatrix::diag(&[3])), rat_int(15));
    }

    #[test]
    fn reduced_denom_roundtrip() {
        let mut f = FourierExpansion::zero(1, HalfWeight::from_twice(1), 8, 80);
        f.set(HalfIntMatrix::diag(&[8]), rat(1, 3));
        f.set(HalfIntMatrix::diag(&[16]), rat_int(2));
        let g = f.reduced_denom(8).unwrap();
        assert_eq!(g.denom_m(), 1);
        assert_eq!(g.coeff(&HalfIntMatrix::diag(&[1])), rat(1, 3));
        assert_eq!(g.coeff(&HalfIntMatrix::diag(&[2])), rat_int(2));
        // Non-divisible support refuses.
        let mut h = FourierExpansion::zero(1, HalfWeight::from_twice(1), 8, 80);
        h.set(HalfIntMatrix::diag(&[3]), rat_int(1));
        assert!(h.reduced_denom(8).is_none());
    }

    fn random_exp_deg1(rng: &mut ChaCha8Rng, bound: i64) -> FourierExpansion {
        let mut f = FourierExpansion::zero(1, HalfWeight::from_twice(0), 1, bound);
        for _ in 0..rng.gen_range(0..6) {
            let n = rng.gen_range(0..=bound);
            let c = rat(rng.gen_range(-9..=9), rng.gen_range(1..=4));
            f.set(HalfIntMatrix::diag(&[n]), c);
        }
        f
    }

    fn random_exp_deg2(rng: &mut ChaCha8Rng, bound: i64) -> FourierExpansion {
        let mut f = FourierExpansion::zero(2, HalfWeight::from_twice(0), 1, bound);
        for _ in 0..rng.gen_range(0..6) {
            let idx = random_psd_index_deg2(rng, bound);
            let v = rat(rng.gen_range(-9..=9), rng.gen_range(1..=4));
            f.set(idx, v);
        }
        f
    }
}
