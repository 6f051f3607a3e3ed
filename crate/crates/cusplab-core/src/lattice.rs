//! Lattice vector enumeration and representation-number counting.
//!
//! Shells are enumerated with a float Cholesky bound that is padded and
//! then verified exactly in integer arithmetic, so the shell lists are
//! complete. Degree-2 representation numbers use the reflection group
//! generated by the lattice's roots (norm-2 vectors): inner-product
//! distributions against a fixed vector only depend on its orbit, which
//! collapses the quadratic pair count to one pass per orbit
//! representative. On lattices without roots this degrades gracefully to
//! the plain pair count.

use std::collections::HashMap;

/// An even positive definite integer Gram matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeGram {
    rank: usize,
    gram: Vec<i64>,
}

impl LatticeGram {
    pub fn new(rank: usize, gram: Vec<i64>) -> Self {
        assert_eq!(gram.len(), rank * rank);
        for i in 0..rank {
            assert!(gram[i * rank + i] % 2 == 0, "lattice must be even");
            for j in 0..i {
                assert_eq!(gram[i * rank + j], gram[j * rank + i], "gram must be symmetric");
            }
        }
        let g = Self { rank, gram };
        assert!(g.is_positive_definite_float(), "gram must be positive definite");
        g
    }

    /// The standard even unimodular E8 Gram matrix, in the basis
    /// `2e1, e2-e1, ..., e8-e7, (e1+...+e8)/2` of the even coordinate
    /// model.
    pub fn e8() -> Self {
        #[rustfmt::skip]
        let gram = vec![
             4, -2,  0,  0,  0,  0,  0,  1,
            -2,  2, -1,  0,  0,  0,  0,  0,
             0, -1,  2, -1,  0,  0,  0,  0,
             0,  0, -1,  2, -1,  0,  0,  0,
             0,  0,  0, -1,  2, -1,  0,  0,
             0,  0,  0,  0, -1,  2, -1,  0,
             0,  0,  0,  0,  0, -1,  2,  0,
             1,  0,  0,  0,  0,  0,  0,  2,
        ];
        Self::new(8, gram)
    }

    /// Rank-1 lattice with Gram (2): its theta series is the unary theta.
    pub fn a1() -> Self {
        Self::new(1, vec![2])
    }

    /// Hexagonal lattice, Gram [[2,1],[1,2]].
    pub fn a2() -> Self {
        Self::new(2, vec![2, 1, 1, 2])
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn gram(&self) -> &[i64] {
        &self.gram
    }

    /// `x^t G y` in exact integer arithmetic.
    pub fn inner(&self, x: &[i16], y: &[i16]) -> i64 {
        let m = self.rank;
        let mut acc: i64 = 0;
        for i in 0..m {
            let mut row = 0i64;
            for j in 0..m {
                row += self.gram[i * m + j] * y[j] as i64;
            }
            acc += x[i] as i64 * row;
        }
        acc
    }

    /// `G x` as an i64 vector.
    pub fn apply(&self, x: &[i16]) -> Vec<i64> {
        let m = self.rank;
        (0..m)
            .map(|i| (0..m).map(|j| self.gram[i * m + j] * x[j] as i64).sum())
            .collect()
    }

    /// `x^t G x`.
    pub fn norm(&self, x: &[i16]) -> i64 {
        self.inner(x, x)
    }

    fn is_positive_definite_float(&self) -> bool {
        cholesky(self.rank, &self.gram.iter().map(|&x| x as f64).collect::<Vec<_>>()).is_some()
    }
}

/// All lattice vectors grouped by half-norm `t = x^t G x / 2`, for
/// `t = 0..=max_t`. Each shell is a flat coordinate array of stride
/// `rank`; shell 0 contains exactly the zero vector.
pub struct Shells {
    pub rank: usize,
    pub by_halfnorm: Vec<Vec<i16>>,
}

impl Shells {
    pub fn count(&self, t: usize) -> usize {
        self.by_halfnorm[t].len() / self.rank
    }

    pub fn vectors(&self, t: usize) -> impl Iterator<Item = &[i16]> {
        self.by_halfnorm[t].chunks_exact(self.rank)
    }
}

/// Enumerate every `x` with `x^t G x <= 2·max_t`, bucketed by half-norm.
///
/// Pruning bounds come from a float Cholesky factor padded by a relative
/// epsilon; membership is decided by the exact integer norm, so padding
/// only costs a few extra leaf visits.
pub fn enumerate_shells(gram: &LatticeGram, max_t: i64) -> Shells {
    let m = gram.rank();
    let gf: Vec<f64> = gram.gram().iter().map(|&x| x as f64).collect();
    let r = cholesky(m, &gf).expect("gram must be positive definite");
    let budget = (2 * max_t) as f64;
    let pad = 1e-7 * (budget + 1.0);

    let mut shells: Vec<Vec<i16>> = vec![Vec::new(); (max_t + 1) as usize];
    let mut x = vec![0i64; m];
    // Depth-first over coordinates m-1 .. 0; partial[i] = Σ_{j>i} R_ij x_j.
    fn descend(
        level: usize,
        m: usize,
        r: &[f64],
        x: &mut [i64],
        used: f64,
        budget: f64,
        pad: f64,
        gram: &LatticeGram,
        max_t: i64,
        shells: &mut [Vec<i16>],
    ) {
        let i = level;
        let mut center = 0.0;
        for j in (i + 1)..m {
            center += r[i * m + j] * x[j] as f64;
        }
        let rii = r[i * m + i];
        let rem = budget - used + pad;
        if rem < 0.0 {
            return;
        }
        let w = rem.max(0.0).sqrt() / rii;
        let c = -center / rii;
        let lo = (c - w - 1e-9).ceil() as i64;
        let hi = (c + w + 1e-9).floor() as i64;
        for xi in lo..=hi {
            x[i] = xi;
            let term = rii * xi as f64 + center;
            let used2 = used + term * term;
            if i == 0 {
                let xv: Vec<i16> = x
                    .iter()
                    .map(|&v| i16::try_from(v).expect("coordinate overflows i16"))
                    .collect();
                let q = gram.norm(&xv);
                debug_assert!(q % 2 == 0);
                let t = q / 2;
                if t <= max_t {
                    shells[t as usize].extend_from_slice(&xv);
                }
            } else {
                descend(i - 1, m, r, x, used2, budget, pad, gram, max_t, shells);
            }
        }
        x[i] = 0;
    }
    descend(m - 1, m, &r, &mut x, 0.0, budget, pad, gram, max_t, &mut shells);
    Shells { rank: m, by_halfnorm: shells }
}

/// Upper-triangular Cholesky factor `R` with `G = R^t R`; `None` when the
/// matrix is not positive definite.
fn cholesky(n: usize, g: &[f64]) -> Option<Vec<f64>> {
    let mut r = vec![0.0f64; n * n];
    for i in 0..n {
        for j in i..n {
            let mut s = g[i * n + j];
            for k in 0..i {
                s -= r[k * n + i] * r[k * n + j];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                r[i * n + i] = s.sqrt();
            } else {
                r[i * n + j] = s / r[i * n + i];
            }
        }
    }
    Some(r)
}

/// Decompose a shell into orbits of the reflection group generated by the
/// lattice's roots. Returns `(representative, orbit_size)` pairs. With no
/// roots every vector is its own orbit.
pub fn shell_orbits(
    gram: &LatticeGram,
    roots: &[Vec<i16>],
    shell: &[i16],
) -> Vec<(Vec<i16>, u64)> {
    let m = gram.rank();
    if shell.is_empty() {
        return Vec::new();
    }
    assert!(m <= 8, "orbit packing supports rank <= 8");
    let pack = |v: &[i16]| -> u128 {
        let mut key: u128 = 0;
        for (i, &c) in v.iter().enumerate() {
            key |= (c as u16 as u128) << (16 * i);
        }
        key
    };
    let mut remaining: std::collections::HashSet<u128> =
        shell.chunks_exact(m).map(pack).collect();
    let index: HashMap<u128, Vec<i16>> = shell
        .chunks_exact(m)
        .map(|v| (pack(v), v.to_vec()))
        .collect();
    let mut orbits = Vec::new();
    while let Some(&start) = remaining.iter().next() {
        let rep = index[&start].clone();
        let mut stack = vec![rep.clone()];
        remaining.remove(&start);
        let mut size = 1u64;
        while let Some(v) = stack.pop() {
            for alpha in roots {
                // s_α(v) = v - (v^t G α) α for a root (norm 2).
                let c = gram.inner(&v, alpha);
                let mut img = v.clone();
                for i in 0..m {
                    let e = img[i] as i64 - c * alpha[i] as i64;
                    img[i] = i16::try_from(e).expect("reflection coordinate overflow");
                }
                let key = pack(&img);
                if remaining.remove(&key) {
                    size += 1;
                    stack.push(img);
                }
            }
        }
        orbits.push((rep, size));
    }
    orbits
}

/// Degree-2 representation counts: the number of ordered pairs `(x, y)`
/// with half-norms `(t1, t2)` and inner product `x^t G y = b`, for all
/// `t1 <= t2`, `t1 + t2 <= max_trace`. Keys are `(t1, t2, b)`.
pub fn pair_counts(gram: &LatticeGram, max_trace: i64) -> HashMap<(i64, i64, i64), u64> {
    let shells = enumerate_shells(gram, max_trace);
    let m = gram.rank();
    let roots: Vec<Vec<i16>> = shells.vectors(1).map(|v| v.to_vec()).collect();

    let mut counts: HashMap<(i64, i64, i64), u64> = HashMap::new();
    for t1 in 0..=(max_trace / 2) {
        let orbits = shell_orbits(gram, &roots, &shells.by_halfnorm[t1 as usize]);
        for (rep, size) in orbits {
            let w = gram.apply(&rep);
            for t2 in t1..=(max_trace - t1) {
                // |b| <= 2·sqrt(t1·t2) by Cauchy-Schwarz.
                let bmax = (2.0 * ((t1 * t2) as f64).sqrt()).ceil() as i64 + 1;
                let mut hist = vec![0u64; (2 * bmax + 1) as usize];
                for y in shells.vectors(t2 as usize) {
                    let b: i64 = (0..m).map(|i| w[i] * y[i] as i64).sum();
                    hist[(b + bmax) as usize] += 1;
                }
                for (off, &c) in hist.iter().enumerate() {
                    if c > 0 {
                        let b = off as i64 - bmax;
                        *counts.entry((t1, t2, b)).or_insert(0) += size * c;
                    }
                }
            }
        }
    }
    counts
}
