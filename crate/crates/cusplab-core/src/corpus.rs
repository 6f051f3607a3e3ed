//! Ground-truth corpus generators, built from first principles.
//!
//! Every form here is constructed by direct counting or exact series
//! manipulation: square counting for the unary theta, a divisor sieve for
//! Eisenstein coefficients, the pentagonal-number product for the
//! discriminant form, lattice-vector enumeration for theta series, and
//! characteristic sums for the genus-2 theta constants. No coefficient
//! table is imported from the literature.

use crate::jacobi::siegel_phi;
use crate::lattice::{enumerate_shells, pair_counts, LatticeGram};
use crate::matrix::HalfIntMatrix;
use crate::qexp::{FourierExpansion, HalfWeight};
use crate::{rat_int, Rat};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CorpusError {
    #[error("Eisenstein weight must be even and >= 4, got {0}")]
    BadWeight(i64),
    #[error("theta characteristic is odd")]
    OddCharacteristic,
}

/// The unary theta `θ(τ) = Σ_{n∈Z} q^{n²}`: degree 1, weight 1/2, M = 1.
pub fn unary_theta(trace_bound: i64) -> FourierExpansion {
    let mut f = FourierExpansion::zero(1, HalfWeight::from_twice(1), 1, trace_bound);
    let mut m = 0i64;
    while m * m <= trace_bound {
        let c = if m == 0 { 1 } else { 2 };
        f.set(HalfIntMatrix::diag(&[m * m]), rat_int(c));
        m += 1;
    }
    f
}

/// Bernoulli number `B_k` (B_1 = -1/2 convention), exact.
pub fn bernoulli(k: u32) -> Rat {
    let mut b: Vec<Rat> = Vec::with_capacity(k as usize + 1);
    for m in 0..=k {
        // B_m = -1/(m+1) Σ_{j<m} C(m+1, j) B_j
        let mut acc = Rat::zero();
        for (j, bj) in b.iter().enumerate() {
            acc += Rat::from(binomial(m as u64 + 1, j as u64)) * bj;
        }
        let val = if m == 0 {
            Rat::one()
        } else {
            -acc / Rat::from(BigInt::from(m + 1))
        };
        b.push(val);
    }
    b[k as usize].clone()
}

fn binomial(n: u64, k: u64) -> BigInt {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k.min(n - k) {
        num *= BigInt::from(n - i);
        den *= BigInt::from(i + 1);
    }
    num / den
}

/// Divisor power sums `σ_e(n)` for `1 <= n <= bound` by sieve.
pub fn sigma_sieve(e: u32, bound: i64) -> Vec<BigInt> {
    let b = bound as usize;
    let mut sigma = vec![BigInt::zero(); b + 1];
    for d in 1..=b {
        let pow = BigInt::from(d).pow(e);
        let mut m = d;
        while m <= b {
            sigma[m] += &pow;
            m += d;
        }
    }
    sigma
}

/// Normalization of the degree-1 Eisenstein series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EisensteinNormalization {
    /// `a(0) = -B_k/(2k)`, `a(n) = σ_{k-1}(n)`: the variant whose
    /// Rankin-Selberg series carries the clean zeta factorization.
    RawSigma,
    /// `a(0) = 1`, `a(n) = (-2k/B_k)·σ_{k-1}(n)`: the classical series.
    Classical,
}

/// Degree-1 level-1 Eisenstein series of even weight `k >= 4`.
pub fn eisenstein_deg1(
    k: i64,
    trace_bound: i64,
    norm: EisensteinNormalization,
) -> Result<FourierExpansion, CorpusError> {
    if k < 4 || k % 2 != 0 {
        return Err(CorpusError::BadWeight(k));
    }
    let mut f = FourierExpansion::zero(1, HalfWeight::integral(k), 1, trace_bound);
    let bk = bernoulli(k as u32);
    let a0 = -bk.clone() / rat_int(2 * k);
    let sigma = sigma_sieve(k as u32 - 1, trace_bound);
    let scale = match norm {
        EisensteinNormalization::RawSigma => Rat::one(),
        EisensteinNormalization::Classical => rat_int(-2 * k) / bk,
    };
    f.set(HalfIntMatrix::zero(1), a0 * &scale);
    for n in 1..=trace_bound {
        f.set(
            HalfIntMatrix::diag(&[n]),
            Rat::from(sigma[n as usize].clone()) * &scale,
        );
    }
    Ok(f)
}

/// The discriminant cusp form `Δ = q·Π(1-q^n)^24`: degree 1, weight 12.
///
/// The Euler product is expanded sparsely by the pentagonal-number
/// theorem and raised to the 24th power by repeated squaring over i128
/// coefficients (|τ(n)| stays far below the i128 range for any reachable
/// bound), then converted to exact rationals.
pub fn delta(trace_bound: i64) -> FourierExpansion {
    let b = trace_bound as usize;
    // Euler product Π(1-q^n) = Σ (-1)^k q^{k(3k-1)/2}.
    let mut euler = vec![0i128; b + 1];
    let mut k = 0i64;
    loop {
        let mut hit = false;
        for s in [k, -k] {
            let e = s * (3 * s - 1) / 2;
            if (0..=trace_bound).contains(&e) {
                let sign = if s.rem_euclid(2) == 0 { 1 } else { -1 };
                euler[e as usize] += sign;
                hit = true;
            }
            if s == 0 {
                break;
            }
        }
        if !hit && k > 0 {
            break;
        }
        k += 1;
    }
    // 24 = 16 + 8: square up to E^16, keep E^8 on the way.
    let e2 = conv_i128(&euler, &euler, b);
    let e4 = conv_i128(&e2, &e2, b);
    let e8 = conv_i128(&e4, &e4, b);
    let e16 = conv_i128(&e8, &e8, b);
    let e24 = conv_i128(&e16, &e8, b);

    let mut f = FourierExpansion::zero(1, HalfWeight::integral(12), 1, trace_bound);
    for (n, &c) in e24.iter().enumerate() {
        let idx = n as i64 + 1; // leading factor q
        if idx <= trace_bound && c != 0 {
            f.set(
                HalfIntMatrix::diag(&[idx]),
                Rat::from(BigInt::from(c)),
            );
        }
    }
    f
}

fn conv_i128(a: &[i128], b: &[i128], bound: usize) -> Vec<i128> {
    let mut out = vec![0i128; bound + 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 || i > bound {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            if i + j > bound {
                break;
            }
            if bj == 0 {
                continue;
            }
            let prod = ai.checked_mul(bj).expect("series coefficient overflow");
            out[i + j] = out[i + j].checked_add(prod).expect("series coefficient overflow");
        }
    }
    out
}

/// Degree-`n` theta series of an even lattice: `a(T)` counts integer
/// matrices `X` with `½ X^t G X = T`. Weight is `rank/2`, M = 1.
pub fn lattice_theta(gram: &LatticeGram, degree: usize, trace_bound: i64) -> FourierExpansion {
    let weight = HalfWeight::from_twice(gram.rank() as i64);
    let mut f = FourierExpansion::zero(degree, weight, 1, trace_bound);
    match degree {
        0 => {
            f.set(HalfIntMatrix::zero(0), Rat::one());
        }
        1 => {
            let shells = enumerate_shells(gram, trace_bound);
            for t in 0..=trace_bound {
                let c = shells.count(t as usize);
                if c > 0 {
                    f.set(HalfIntMatrix::diag(&[t]), rat_int(c as i64));
                }
            }
        }
        2 => {
            let counts = pair_counts(gram, trace_bound);
            for (&(t1, t2, b), &c) in &counts {
                let idx = HalfIntMatrix::from_doubled(2, vec![2 * t1, b, b, 2 * t2]).unwrap();
                f.set(idx, rat_int(c as i64));
                if t1 != t2 {
                    // (x, y) -> (y, x) transposes the index.
                    let swapped =
                        HalfIntMatrix::from_doubled(2, vec![2 * t2, b, b, 2 * t1]).unwrap();
                    f.set(swapped, rat_int(c as i64));
                }
            }
        }
        _ => {
            // Plain tuple recursion; exponential in the degree, intended
            // for small bounds only.
            let shells = enumerate_shells(gram, trace_bound);
            let all: Vec<(i64, Vec<i16>)> = (0..=trace_bound)
                .flat_map(|t| {
                    shells
                        .vectors(t as usize)
                        .map(move |v| (t, v.to_vec()))
                        .collect::<Vec<_>>()
                })
                .collect();
            let mut counts: HashMap<Vec<i64>, u64> = HashMap::new();
            let mut chosen: Vec<&(i64, Vec<i16>)> = Vec::new();
            tuple_scan(gram, &all, degree, trace_bound, &mut chosen, &mut counts);
            for (doubled, c) in counts {
                let idx = HalfIntMatrix::from_doubled(degree, doubled).unwrap();
                f.set(idx, rat_int(c as i64));
            }
        }
    }
    f
}

fn tuple_scan<'a>(
    gram: &LatticeGram,
    all: &'a [(i64, Vec<i16>)],
    degree: usize,
    budget: i64,
    chosen: &mut Vec<&'a (i64, Vec<i16>)>,
    counts: &mut HashMap<Vec<i64>, u64>,
) {
    if chosen.len() == degree {
        let n = degree;
        let mut doubled = vec![0i64; n * n];
        for i in 0..n {
            for j in 0..n {
                doubled[i * n + j] = gram.inner(&chosen[i].1, &chosen[j].1);
            }
        }
        *counts.entry(doubled).or_insert(0) += 1;
        return;
    }
    let used: i64 = chosen.iter().map(|(t, _)| t).sum();
    for item in all {
        if used + item.0 > budget {
            continue;
        }
        chosen.push(item);
        tuple_scan(gram, all, degree, budget, chosen, counts);
        chosen.pop();
    }
}

/// A genus-2 theta characteristic `(a, b)` with entries in `{0, 1/2}`,
/// stored as 0/1 flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThetaCharacteristic {
    pub a: [u8; 2],
    pub b: [u8; 2],
}

impl ThetaCharacteristic {
    pub fn new(a: [u8; 2], b: [u8; 2]) -> Self {
        assert!(a.iter().chain(&b).all(|&v| v <= 1));
        Self { a, b }
    }

    /// Even iff `4·a^t b ≡ 0 (mod 2)`.
    pub fn is_even(&self) -> bool {
        (self.a[0] * self.b[0] + self.a[1] * self.b[1]) % 2 == 0
    }

    /// The ten even characteristics, in lexicographic (a, b) order.
    pub fn all_even() -> Vec<Self> {
        let mut out = Vec::new();
        for code in 0..16u8 {
            let c = Self::new(
                [code >> 3 & 1, code >> 2 & 1],
                [code >> 1 & 1, code & 1],
            );
            if c.is_even() {
                out.push(c);
            }
        }
        out
    }
}

/// Genus-2 theta constant with characteristic `c`:
/// `Σ_{x∈Z²} e(½(x+a)^t Z (x+a) + (x+a)^t b)`, exact with M = 8.
///
/// Stored index: `T = 4(x+a)(x+a)^t` (so the exponent is `tr(TZ)/8`);
/// coefficient `(-1)^{x·b + a·b}` where the dot products use the 0/1
/// flags (evenness makes `a^t b` an integer multiple of 1/2, hence the
/// sign is rational).
pub fn theta_constant(
    c: ThetaCharacteristic,
    trace_bound: i64,
) -> Result<FourierExpansion, CorpusError> {
    if !c.is_even() {
        return Err(CorpusError::OddCharacteristic);
    }
    let mut f = FourierExpansion::zero(2, HalfWeight::from_twice(1), 8, trace_bound);
    // y = 2x + a ranges over the coset (2Z + a0) × (2Z + a1); the stored
    // trace is tr(2T)/2 = |y|^2, so |y|^2 <= trace_bound.
    let lim = (trace_bound as f64).sqrt() as i64 + 1;
    for x0 in -lim..=lim {
        let y0 = 2 * x0 + c.a[0] as i64;
        for x1 in -lim..=lim {
            let y1 = 2 * x1 + c.a[1] as i64;
            if y0 * y0 + y1 * y1 > trace_bound {
                continue;
            }
            // T = y y^t / ... : 2T = 2 y y^t.
            let doubled = vec![2 * y0 * y0, 2 * y0 * y1, 2 * y0 * y1, 2 * y1 * y1];
            let idx = HalfIntMatrix::from_doubled(2, doubled).unwrap();
            // sign = (-1)^{x·b} · i^{a·b}; a·b even makes the i-power ±1.
            let xb = x0 * c.b[0] as i64 + x1 * c.b[1] as i64;
            let ab = (c.a[0] * c.b[0] + c.a[1] * c.b[1]) as i64;
            let sign = if (xb + ab / 2).rem_euclid(2) == 0 { 1 } else { -1 };
            let cur = f.coeff(&idx);
            f.set(idx, cur + rat_int(sign));
        }
    }
    Ok(f)
}

/// The genus-2 cusp-form candidate: the product of the squares of the ten
/// even theta constants (weight 10), renormalized to denominator M = 1
/// and leading coefficient 1.
///
/// `trace_bound` is the bound of the final M = 1 expansion; the internal
/// product runs at the 8-fold stored bound. The constructor asserts the
/// internal cuspidality certificate: zero constant term, all-PD support,
/// and vanishing Siegel Φ within truncation.
pub fn genus2_cusp_candidate(trace_bound: i64) -> FourierExpansion {
    let stored_bound = 8 * trace_bound;
    // Fast path over integer coefficients keyed by doubled entries
    // (r, s, u); the theta-constant signs are ±1 and the partial products
    // stay far below i64.
    let mut acc: HashMap<(i64, i64, i64), i64> = HashMap::new();
    acc.insert((0, 0, 0), 1);
    for c in ThetaCharacteristic::all_even() {
        let theta = theta_constant(c, stored_bound).expect("even characteristic");
        let flat: Vec<((i64, i64, i64), i64)> = theta
            .iter()
            .map(|(t, v)| {
                let d = t.doubled();
                let num = v.to_integer();
                ((d[0], d[1], d[3]), i64::try_from(&num).expect("theta coeff fits i64"))
            })
            .collect();
        let sq = mul_deg2_int(&flat, &flat, stored_bound);
        let acc_flat: Vec<((i64, i64, i64), i64)> = acc.into_iter().collect();
        acc = mul_deg2_int(&acc_flat, &sq, stored_bound)
            .into_iter()
            .collect();
    }

    let mut prod = FourierExpansion::zero(2, HalfWeight::integral(10), 8, stored_bound);
    for (&(r, s, u), &v) in &acc {
        if v != 0 {
            let idx = HalfIntMatrix::from_doubled(2, vec![r, s, s, u]).unwrap();
            prod.set(idx, rat_int(v));
        }
    }
    // A level-1 integral-weight form lives on integral indices: every
    // surviving index must be divisible by 8.
    let reduced = prod
        .reduced_denom(8)
        .expect("theta-constant product must renormalize to M = 1");
    // Normalize the first nonzero coefficient (canonical order) to 1.
    let leading = reduced
        .iter()
        .next()
        .map(|(_, v)| v.clone())
        .expect("candidate is nonzero");
    let normalized = reduced.scale(&(Rat::one() / leading));

    // Internal cuspidality certificate; these hold by construction and
    // guard the entire theta-constant pipeline.
    assert!(normalized.coeff(&HalfIntMatrix::zero(2)).is_zero());
    assert!(normalized.support_verdict().all_positive_definite);
    assert!(siegel_phi(&normalized).is_zero());
    normalized
}

fn mul_deg2_int(
    a: &[((i64, i64, i64), i64)],
    b: &[((i64, i64, i64), i64)],
    stored_bound: i64,
) -> HashMap<(i64, i64, i64), i64> {
    let mut out: HashMap<(i64, i64, i64), i64> = HashMap::new();
    for &((r1, s1, u1), v1) in a {
        let t1 = (r1 + u1) / 2;
        for &((r2, s2, u2), v2) in b {
            let t2 = (r2 + u2) / 2;
            if t1 + t2 > stored_bound {
                continue;
            }
            let key = (r1 + r2, s1 + s2, u1 + u2);
            let prod = v1.checked_mul(v2).expect("product coefficient overflow");
            let slot = out.entry(key).or_insert(0);
            *slot = slot.checked_add(prod).expect("product coefficient overflow");
        }
    }
    out.retain(|_, v| *v != 0);
    out
}
