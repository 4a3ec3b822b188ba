//! Exact integer combinatorics for the dimension bounds: binary digit
//! sums, binomial parity, flag-manifold and projective-Stiefel
//! non-immersion bounds, and the explicit upper-bound formulas of the
//! measurement constructions. No floating point anywhere in this module.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of ones in the binary expansion of `n`.
pub fn alpha(n: u64) -> u64 {
    n.count_ones() as u64
}

/// `alpha_1(n) = sum_{i=0}^{n-1} alpha(i)`.
pub fn alpha1(n: u64) -> u64 {
    (0..n).map(alpha).sum()
}

/// `beta(n, k) = alpha_1(n) - alpha_1(k) - alpha_1(n - k)`; counts the
/// carries when adding `k` and `n - k` in binary, doubled appears in the
/// flag-manifold bound.
pub fn beta(n: u64, k: u64) -> Result<u64> {
    if k > n {
        return Err(Error::OutOfRange(format!("beta requires k <= n, got ({n}, {k})")));
    }
    Ok(alpha1(n) - alpha1(k) - alpha1(n - k))
}

/// Binomial coefficient parity via the Lucas/Kummer criterion:
/// `C(n, k)` is odd iff the binary digits of `k` are dominated by those of `n`,
/// i.e. `(n - k) & k == 0`.
pub fn binom_parity(n: u64, k: u64) -> Result<u8> {
    if k > n {
        return Err(Error::OutOfRange(format!(
            "binom_parity requires k <= n, got ({n}, {k})"
        )));
    }
    Ok(if (n - k) & k == 0 { 1 } else { 0 })
}

fn binom_is_odd(n: u64, k: u64) -> bool {
    k <= n && (n - k) & k == 0
}

/// A multiplicity partition `(n_1, ..., n_k)` of `n`; descriptor for the
/// flag manifold `U(n)/U(n_1) x ... x U(n_k)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlagPartition {
    parts: Vec<u64>,
}

impl FlagPartition {
    pub fn new(parts: Vec<u64>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::OutOfRange("partition needs at least one part".into()));
        }
        if parts.iter().any(|&p| p == 0) {
            return Err(Error::OutOfRange("partition parts must be positive".into()));
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    pub fn total(&self) -> u64 {
        self.parts.iter().sum()
    }

    pub fn block_count(&self) -> usize {
        self.parts.len()
    }
}

/// Stiefel-orbit descriptor: `n` is the dimension of the second subsystem,
/// `k` the Schmidt rank of the orbit's base state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StiefelParams {
    pub n: u64,
    pub k: u64,
}

impl StiefelParams {
    pub fn new(n: u64, k: u64) -> Result<Self> {
        if k < 1 || k > n {
            return Err(Error::OutOfRange(format!(
                "Stiefel parameters require 1 <= k <= n, got ({n}, {k})"
            )));
        }
        Ok(Self { n, k })
    }
}

/// `N(n, k) = min{ n-k < i <= n : C(n, i) odd }`. Always exists because
/// `C(n, n) = 1`.
pub fn cap_n(s: StiefelParams) -> u64 {
    let (n, k) = (s.n, s.k);
    (n - k + 1..=n)
        .find(|&i| binom_is_odd(n, i))
        .expect("C(n, n) = 1 is odd")
}

/// `sigma(n, k) = 2 * max{ 0 <= i < N(n, k) : C(nk + i - 1, i) odd }`.
/// The `i = 0` term is `C(nk - 1, 0) = 1`, so the maximum always exists.
pub fn sigma(s: StiefelParams) -> u64 {
    let cap = cap_n(s);
    let nk = s.n * s.k;
    let best = (0..cap)
        .rev()
        .find(|&i| binom_is_odd(nk + i - 1, i))
        .unwrap_or(0);
    2 * best
}

/// Independent route to `sigma` via truncated power-series inversion over
/// GF(2): invert `(1 + x)^{nk}` below degree `N(n, k)` and report twice the
/// top nonzero degree. Must agree with [`sigma`] everywhere.
pub fn sigma_series_oracle(s: StiefelParams) -> u64 {
    let cap = cap_n(s) as usize;
    let nk = s.n * s.k;
    // f_j = C(nk, j) mod 2 for j < cap.
    let f: Vec<u8> = (0..cap as u64)
        .map(|j| if binom_is_odd(nk, j) { 1 } else { 0 })
        .collect();
    // g = f^{-1} in GF(2)[[x]] truncated below cap; f_0 = 1 so
    // g_m = sum_{j=1..m} f_j g_{m-j} in characteristic two.
    let mut g = vec![0u8; cap];
    g[0] = 1;
    for m in 1..cap {
        let mut acc = 0u8;
        for j in 1..=m {
            if j < f.len() {
                acc ^= f[j] & g[m - j];
            }
        }
        g[m] = acc;
    }
    let top = (0..cap).rev().find(|&m| g[m] == 1).unwrap_or(0);
    2 * top as u64
}

/// Real dimension of the flag manifold `U(n)/prod U(n_i)`: `n^2 - sum n_i^2`.
pub fn flag_dim(p: &FlagPartition) -> u64 {
    let n = p.total();
    n * n - p.parts().iter().map(|&m| m * m).sum::<u64>()
}

/// Real dimension of the projective Stiefel orbit: `2nk - k^2 - 1`.
pub fn stiefel_dim(s: StiefelParams) -> u64 {
    2 * s.n * s.k - s.k * s.k - 1
}

/// Named upper-bound value attached to a [`BoundReport`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpperBound {
    pub name: String,
    pub dimension: i64,
}

/// Which manifold family a report describes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BoundDescriptor {
    Flag { partition: Vec<u64> },
    FlagProduct { partitions: Vec<Vec<u64>> },
    Stiefel { n: u64, k: u64 },
}

/// Lower/upper bound summary for one manifold.
///
/// `max_non_immersion_dim` is the largest `D` such that the manifold cannot
/// be immersed in `R^D`; `-1` means the characteristic classes give no
/// obstruction. `max_non_embedding_dim` is always one larger.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub descriptor: BoundDescriptor,
    pub manifold_dim: i64,
    pub max_non_immersion_dim: i64,
    pub max_non_embedding_dim: i64,
    pub upper_bounds: Vec<UpperBound>,
    pub provenance: Vec<String>,
}

impl BoundReport {
    /// Smallest dimension not excluded for an immersion; what the flag
    /// reference table prints as "lower bound on immersion dimension".
    pub fn min_immersion_dim(&self) -> i64 {
        self.max_non_immersion_dim + 1
    }

    pub fn upper_bound(&self, name: &str) -> Option<i64> {
        self.upper_bounds
            .iter()
            .find(|u| u.name == name)
            .map(|u| u.dimension)
    }
}

/// All distinct subset sums of the partition parts (the admissible `m`
/// values of the flag bound). `2^k` subsets; desk-scale `k` only.
fn subset_sums(parts: &[u64]) -> Vec<u64> {
    let mut sums = vec![0u64];
    for &p in parts {
        let mut next: Vec<u64> = sums.iter().map(|&s| s + p).collect();
        sums.append(&mut next);
        sums.sort_unstable();
        sums.dedup();
    }
    sums
}

/// Best (largest) value of `4m(n-m) - 2*beta(n, m)` over admissible subset
/// sums `m`; ties broken toward smaller `m`.
fn best_flag_term(parts: &[u64]) -> (u64, i64) {
    let n: u64 = parts.iter().sum();
    let mut best_m = 0u64;
    let mut best = i64::MIN;
    for m in subset_sums(parts) {
        let value = 4 * (m * (n - m)) as i64 - 2 * beta(n, m).expect("m <= n") as i64;
        if value > best {
            best = value;
            best_m = m;
        }
    }
    (best_m, best)
}

/// POVM dimension of the rank-bounded measurement for states of rank at
/// most `r` on `C^n`: `4r(n-r) - 1` when `2r < n`, degenerating to the
/// full POVM of dimension `n^2 - 1` otherwise.
pub fn upper_fixed_spectrum(n: u64, r: u64) -> Result<i64> {
    if r < 1 || r >= n {
        return Err(Error::OutOfRange(format!(
            "upper_fixed_spectrum requires 1 <= r <= n-1, got ({n}, {r})"
        )));
    }
    Ok(if 2 * r < n {
        (4 * r * (n - r)) as i64 - 1
    } else {
        (n * n) as i64 - 1
    })
}

/// POVM dimension of the two-stage orbit measurement: spectral stage plus a
/// phase-retrieval stage of `4n - 5` extra outcomes.
pub fn upper_bob_up1(n: u64, r: u64) -> Result<i64> {
    if r < 1 || r > n {
        return Err(Error::OutOfRange(format!(
            "upper_bob_up1 requires 1 <= r <= n, got ({n}, {r})"
        )));
    }
    Ok(if 2 * r < n {
        (4 * r * (n - r)) as i64 - 1 + (4 * n) as i64 - 5
    } else {
        (n * n) as i64 - 1 + (4 * n) as i64 - 5
    })
}

/// Variant of [`upper_bob_up1`] for `r >= n/2` that reads `n^2 + 4n - 5`;
/// this is the value the reference table prints, one above the stated
/// formula. Both are always reported, never silently substituted.
pub fn upper_bob_up1_table_variant(n: u64, r: u64) -> Result<i64> {
    if 2 * r < n {
        upper_bob_up1(n, r)
    } else {
        if r > n {
            return Err(Error::OutOfRange(format!(
                "upper_bob_up1 requires 1 <= r <= n, got ({n}, {r})"
            )));
        }
        Ok((n * n) as i64 + (4 * n) as i64 - 5)
    }
}

/// POVM dimension of the quadratic-form orbit measurement: `2nr + 2n - 3`.
pub fn upper_bob_up2(n: u64, r: u64) -> Result<i64> {
    if r < 1 || r > n {
        return Err(Error::OutOfRange(format!(
            "upper_bob_up2 requires 1 <= r <= n, got ({n}, {r})"
        )));
    }
    Ok((2 * n * r + 2 * n) as i64 - 3)
}

/// Bounds for one flag manifold: maximize `4m(n-m) - 2*beta(n, m)` over all
/// subset sums `m` of the partition parts.
pub fn flag_bounds(p: &FlagPartition) -> BoundReport {
    let n = p.total();
    let (_, best) = best_flag_term(p.parts());
    let mut upper_bounds = Vec::new();
    let max_mult = *p.parts().iter().max().expect("nonempty");
    let r = n - max_mult;
    if r >= 1 && r < n {
        if let Ok(u) = upper_fixed_spectrum(n, r) {
            upper_bounds.push(UpperBound {
                name: "fixed_spectrum_povm".into(),
                dimension: u,
            });
        }
    } else {
        // Point manifold: the trivial POVM suffices.
        upper_bounds.push(UpperBound {
            name: "fixed_spectrum_povm".into(),
            dimension: 0,
        });
    }
    BoundReport {
        descriptor: BoundDescriptor::Flag {
            partition: p.parts().to_vec(),
        },
        manifold_dim: flag_dim(p) as i64,
        max_non_immersion_dim: best - 1,
        max_non_embedding_dim: best,
        upper_bounds,
        provenance: vec![
            "subset-sum maximization of 4m(n-m) - 2*beta(n,m) over block sums".into(),
            "upper bound from the rank-bounded measurement construction".into(),
        ],
    }
}

/// Bounds for a product of flag manifolds: per-factor maximizing terms are
/// chosen independently and summed, with a single trailing `-1` for the
/// immersion clause. Each factor uses its own total `n_i`.
pub fn flag_product_bounds(ps: &[FlagPartition]) -> Result<BoundReport> {
    if ps.is_empty() {
        return Err(Error::OutOfRange("product of zero flag factors".into()));
    }
    let mut sum = 0i64;
    let mut dim = 0i64;
    for p in ps {
        let (_, best) = best_flag_term(p.parts());
        sum += best;
        dim += flag_dim(p) as i64;
    }
    let mut upper = 0i64;
    for p in ps {
        let n = p.total();
        let max_mult = *p.parts().iter().max().expect("nonempty");
        let r = n - max_mult;
        if r >= 1 && r < n {
            // Combining the per-factor measurements costs one extra outcome
            // per factor beyond the first; report the plain sum of POVM
            // dimensions as the construction size.
            upper += upper_fixed_spectrum(n, r)?;
        }
    }
    Ok(BoundReport {
        descriptor: BoundDescriptor::FlagProduct {
            partitions: ps.iter().map(|p| p.parts().to_vec()).collect(),
        },
        manifold_dim: dim,
        max_non_immersion_dim: sum - 1,
        max_non_embedding_dim: sum,
        upper_bounds: vec![UpperBound {
            name: "fixed_spectrum_povm_sum".into(),
            dimension: upper,
        }],
        provenance: vec![
            "per-factor subset-sum terms summed with a single -1 for the immersion clause".into(),
        ],
    })
}

/// Bounds for a projective Stiefel orbit.
pub fn stiefel_bounds(s: StiefelParams) -> BoundReport {
    let lower = (2 * s.n - s.k) as i64 * s.k as i64 - 1 + sigma(s) as i64;
    let up1 = upper_bob_up1(s.n, s.k).expect("validated params");
    let up1_table = upper_bob_up1_table_variant(s.n, s.k).expect("validated params");
    let up2 = upper_bob_up2(s.n, s.k).expect("validated params");
    let mut upper_bounds = vec![
        UpperBound {
            name: "bob_up1".into(),
            dimension: up1,
        },
        UpperBound {
            name: "bob_up2".into(),
            dimension: up2,
        },
    ];
    if up1_table != up1 {
        upper_bounds.push(UpperBound {
            name: "bob_up1_table_variant".into(),
            dimension: up1_table,
        });
    }
    BoundReport {
        descriptor: BoundDescriptor::Stiefel { n: s.n, k: s.k },
        manifold_dim: stiefel_dim(s) as i64,
        max_non_immersion_dim: lower,
        max_non_embedding_dim: lower + 1,
        upper_bounds,
        provenance: vec![
            "dual-class bound (2n-k)k - 1 + sigma(n,k) for the projective Stiefel orbit".into(),
            "upper bounds from the two-stage and quadratic-form constructions".into(),
        ],
    }
}
