//! Dense complex linear algebra on `C^n` and on the real inner-product
//! space `H(C^n)` of Hermitian operators with the Hilbert-Schmidt inner
//! product. Everything here is pure and seeded; no global RNG state.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Relative tolerance for the Hermiticity check.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Eigenvalue floor for positive semidefiniteness checks.
pub const PSD_TOL: f64 = 1e-10;
/// Tolerance on `tr(rho) = 1`.
pub const TRACE_TOL: f64 = 1e-10;
/// Tolerance on the squared norm of a unit vector.
pub const UNIT_TOL: f64 = 1e-12;
/// Singular values below this are treated as zero when computing ranks.
pub const SINGULAR_CUTOFF: f64 = 1e-10;

/// Splits a base seed into a stream of independent per-item seeds.
///
/// SplitMix64 finalizer; cheap, stateless and stable across platforms.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One standard normal sample via Box-Muller.
pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Standard complex Gaussian: real and imaginary parts N(0, 1/2).
pub fn complex_normal<R: Rng>(rng: &mut R) -> C64 {
    C64::new(
        standard_normal(rng) / f64::sqrt(2.0),
        standard_normal(rng) / f64::sqrt(2.0),
    )
}

/// A Hermitian operator on `C^n`, validated on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    dim: usize,
    entries: CMatrix,
}

impl HermitianOperator {
    /// Validates Hermiticity relative to the largest entry magnitude.
    pub fn new(entries: CMatrix) -> Result<Self> {
        let n = entries.nrows();
        if entries.ncols() != n || n == 0 {
            return Err(Error::DimensionMismatch {
                expected: n.max(1),
                got: entries.ncols(),
            });
        }
        let scale = entries
            .iter()
            .map(|z| z.norm())
            .fold(0.0_f64, f64::max)
            .max(1.0);
        let mut deviation = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                let d = (entries[(i, j)] - entries[(j, i)].conj()).norm();
                deviation = deviation.max(d);
            }
        }
        if deviation > HERMITICITY_TOL * scale {
            return Err(Error::NotHermitian {
                deviation: deviation / scale,
                tol: HERMITICITY_TOL,
            });
        }
        // Symmetrize so downstream arithmetic sees an exactly Hermitian matrix.
        let sym = (&entries + entries.adjoint()) * C64::new(0.5, 0.0);
        Ok(Self { dim: n, entries: sym })
    }

    /// Hermitian part `(m + m†)/2` of an arbitrary square matrix.
    pub fn hermitian_part(m: &CMatrix) -> Self {
        let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
        Self {
            dim: sym.nrows(),
            entries: sym,
        }
    }

    /// Anti-Hermitian part divided by `i`, i.e. `(m - m†)/(2i)`, which is Hermitian.
    pub fn antihermitian_part(m: &CMatrix) -> Self {
        let a = (m - m.adjoint()) * C64::new(0.0, -0.5);
        Self {
            dim: a.nrows(),
            entries: a,
        }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            dim: n,
            entries: CMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            dim: n,
            entries: CMatrix::identity(n, n),
        }
    }

    /// `c * 1` for real `c`.
    pub fn scaled_identity(n: usize, c: f64) -> Self {
        Self {
            dim: n,
            entries: CMatrix::identity(n, n) * C64::new(c, 0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    /// Hilbert-Schmidt norm `sqrt(tr(a^2))`.
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            entries: &self.entries * C64::new(c, 0.0),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            dim: self.dim,
            entries: &self.entries + &other.entries,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            dim: self.dim,
            entries: &self.entries - &other.entries,
        }
    }

    /// `self - tr(self)/n * 1`.
    pub fn traceless_part(&self) -> Self {
        let t = self.trace() / self.dim as f64;
        self.sub(&Self::scaled_identity(self.dim, t))
    }

    /// Eigenvalues in descending order with matching eigenvector columns.
    pub fn eigen_desc(&self) -> (Vec<f64>, CMatrix) {
        let eig = nalgebra::SymmetricEigen::new(self.entries.clone());
        let n = self.dim;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vectors = CMatrix::zeros(n, n);
        for (col, &i) in order.iter().enumerate() {
            vectors.set_column(col, &eig.eigenvectors.column(i));
        }
        (values, vectors)
    }

    pub fn eigenvalues_desc(&self) -> Vec<f64> {
        let eig = nalgebra::SymmetricEigen::new(self.entries.clone());
        let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues_desc().last().copied().unwrap_or(0.0)
    }

    /// Number of eigenvalues with `|lambda| > cutoff`.
    pub fn numerical_rank(&self, cutoff: f64) -> usize {
        self.eigenvalues_desc()
            .iter()
            .filter(|l| l.abs() > cutoff)
            .count()
    }
}

/// Hilbert-Schmidt inner product `tr(a b)` of two Hermitian operators.
///
/// Real, symmetric and positive definite on nonzero inputs.
pub fn hs_inner(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    // tr(ab) = sum_{ij} a_ij b_ji = sum_{ij} a_ij conj(b_ij) for Hermitian b.
    let mut acc = 0.0;
    for j in 0..a.dim() {
        for i in 0..a.dim() {
            let x = a.entries[(i, j)];
            let y = b.entries[(i, j)];
            acc += x.re * y.re + x.im * y.im;
        }
    }
    Ok(acc)
}

/// A density operator: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    base: HermitianOperator,
}

impl DensityOperator {
    pub fn new(base: HermitianOperator) -> Result<Self> {
        let min = base.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        let t = base.trace();
        if (t - 1.0).abs() > TRACE_TOL {
            return Err(Error::TraceNotOne { trace: t });
        }
        Ok(Self { base })
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::new(HermitianOperator::new(m)?)
    }

    /// Rank-one projector onto a unit vector.
    pub fn pure(v: &UnitVector) -> Self {
        let m = v.entries() * v.entries().adjoint();
        Self {
            base: HermitianOperator::hermitian_part(&m),
        }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self {
            base: HermitianOperator::scaled_identity(n, 1.0 / n as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.base
    }

    pub fn entries(&self) -> &CMatrix {
        self.base.entries()
    }
}

/// A normalized vector in `C^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector {
    entries: CVector,
}

impl UnitVector {
    pub fn new(entries: CVector) -> Result<Self> {
        let norm_sq: f64 = entries.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit { norm_sq });
        }
        Ok(Self { entries })
    }

    /// Normalizes a nonzero vector.
    pub fn normalize(entries: CVector) -> Result<Self> {
        let norm_sq: f64 = entries.iter().map(|z| z.norm_sqr()).sum();
        if norm_sq < 1e-28 {
            return Err(Error::ZeroVector);
        }
        Ok(Self {
            entries: entries / C64::new(norm_sq.sqrt(), 0.0),
        })
    }

    pub fn basis_vector(n: usize, i: usize) -> Self {
        let mut v = CVector::zeros(n);
        v[i] = C64::new(1.0, 0.0);
        Self { entries: v }
    }

    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let v = CVector::from_fn(n, |_, _| complex_normal(&mut rng));
        Self::normalize(v).expect("Gaussian vector is nonzero almost surely")
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &CVector {
        &self.entries
    }
}

/// Haar-distributed unitary on `C^n`, deterministic per seed.
///
/// Ginibre matrix followed by QR; the phase ambiguity is fixed by making
/// the diagonal of the triangular factor positive, which is the standard
/// correctness condition for Haar sampling.
pub fn haar_unitary(n: usize, seed: u64) -> CMatrix {
    let mut rng = rng_from_seed(seed);
    haar_unitary_with(n, &mut rng)
}

/// Haar unitary drawn from a caller-provided generator.
pub fn haar_unitary_with<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    assert!(n >= 1, "haar_unitary requires n >= 1");
    let g = CMatrix::from_fn(n, n, |_, _| complex_normal(rng));
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / C64::new(d.norm(), 0.0)
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..n {
            u[(i, j)] *= phase;
        }
    }
    u
}

/// `max |(U†U - 1)_ij|`, a unitarity defect used by tests and validators.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    let d = u.adjoint() * u - CMatrix::identity(n, n);
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Result of a Schmidt decomposition of a bipartite unit vector.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    /// Nonzero Schmidt coefficients in descending order.
    pub coefficients: Vec<f64>,
    /// Schmidt rank (number of coefficients above the singular-value cutoff).
    pub rank: usize,
    /// Unitary on the A side; the first `rank` columns are the left Schmidt vectors.
    pub left: CMatrix,
    /// Unitary on the B side; the first `rank` columns are the right Schmidt vectors.
    pub right: CMatrix,
}

impl SchmidtDecomposition {
    pub fn left_vector(&self, i: usize) -> CVector {
        self.left.column(i).into_owned()
    }

    pub fn right_vector(&self, i: usize) -> CVector {
        self.right.column(i).into_owned()
    }

    /// Reassembles `sum_i lambda_i e_i ⊗ f_i`.
    pub fn reassemble(&self) -> CVector {
        let da = self.left.nrows();
        let db = self.right.nrows();
        let mut v = CVector::zeros(da * db);
        for (k, &lam) in self.coefficients.iter().enumerate() {
            let e = self.left.column(k);
            let f = self.right.column(k);
            for i in 0..da {
                for j in 0..db {
                    v[i * db + j] += C64::new(lam, 0.0) * e[i] * f[j];
                }
            }
        }
        v
    }
}

/// Singular value decomposition `m = U diag(s) V†` of a complex matrix by
/// one-sided Jacobi column orthogonalization. Singular values come back in
/// descending order with high relative accuracy even when tiny, which the
/// rank cutoffs rely on. Desk-scale matrices only.
pub fn jacobi_svd(m: &CMatrix) -> (Vec<f64>, CMatrix, CMatrix) {
    let rows = m.nrows();
    let cols = m.ncols();
    let mut a = m.clone();
    let mut v = CMatrix::identity(cols, cols);
    let tol = 1e-15;
    for _sweep in 0..64 {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let mut app = 0.0_f64;
                let mut aqq = 0.0_f64;
                let mut apq = C64::new(0.0, 0.0);
                for i in 0..rows {
                    let x = a[(i, p)];
                    let y = a[(i, q)];
                    app += x.norm_sqr();
                    aqq += y.norm_sqr();
                    apq += x.conj() * y;
                }
                let g = apq.norm();
                // Columns this small are numerically zero for unit-scale
                // inputs; rotating them further only churns denormals.
                if app < 1e-280 || aqq < 1e-280 {
                    continue;
                }
                if g <= tol * (app * aqq).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                // Absorb the phase of the cross term, then a real Jacobi
                // rotation orthogonalizes the column pair. Componentwise
                // division keeps the phase finite for tiny g.
                let phase = C64::new(apq.re / g, apq.im / g);
                let tau = (aqq - app) / (2.0 * g);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (cc, ss) = (C64::new(c, 0.0), C64::new(s, 0.0));
                for i in 0..rows {
                    let x = a[(i, p)];
                    let y = a[(i, q)] * phase.conj();
                    a[(i, p)] = cc * x - ss * y;
                    a[(i, q)] = (ss * x + cc * y) * phase;
                }
                for i in 0..cols {
                    let x = v[(i, p)];
                    let y = v[(i, q)] * phase.conj();
                    v[(i, p)] = cc * x - ss * y;
                    v[(i, q)] = (ss * x + cc * y) * phase;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    // Column norms are the singular values; sort descending.
    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<f64> = (0..cols)
        .map(|j| a.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let k = rows.min(cols);
    let mut singular = Vec::with_capacity(k);
    let mut u = CMatrix::zeros(rows, k);
    let mut v_sorted = CMatrix::zeros(cols, cols);
    let mut u_cols: Vec<CVector> = Vec::new();
    for (slot, &j) in order.iter().enumerate() {
        if slot < k {
            singular.push(norms[j]);
            if norms[j] > 1e-300 {
                u_cols.push(a.column(j).into_owned() / C64::new(norms[j], 0.0));
            }
        }
        v_sorted.set_column(slot, &v.column(j));
    }
    let u_full = complete_unitary(&u_cols, rows);
    for slot in 0..k {
        u.set_column(slot, &u_full.column(slot));
    }
    (singular, u, v_sorted)
}

/// Schmidt decomposition of `alpha` in `C^dA ⊗ C^dB` (row-major tensor index
/// `i*dB + j`). Coefficients below the singular-value cutoff are dropped.
pub fn schmidt_decompose(alpha: &UnitVector, da: usize, db: usize) -> Result<SchmidtDecomposition> {
    if alpha.dim() != da * db {
        return Err(Error::DimensionMismatch {
            expected: da * db,
            got: alpha.dim(),
        });
    }
    let m = CMatrix::from_fn(da, db, |i, j| alpha.entries()[i * db + j]);
    let (singular, u, v) = jacobi_svd(&m);

    let mut coefficients = Vec::new();
    let mut left_cols: Vec<CVector> = Vec::new();
    let mut right_cols: Vec<CVector> = Vec::new();
    for (k, &s) in singular.iter().enumerate() {
        if s <= SINGULAR_CUTOFF {
            break; // sorted descending
        }
        coefficients.push(s);
        left_cols.push(u.column(k).into_owned());
        // alpha_{(i,j)} = sum_k s_k u_k[i] conj(v_k[j]).
        right_cols.push(v.column(k).map(|z| z.conj()));
    }
    if coefficients.is_empty() {
        return Err(Error::ZeroVector);
    }
    let rank = coefficients.len();
    let left = complete_unitary(&left_cols, da);
    let right = complete_unitary(&right_cols, db);
    Ok(SchmidtDecomposition {
        coefficients,
        rank,
        left,
        right,
    })
}

/// Extends orthonormal columns to a full unitary by Gram-Schmidt against
/// the standard basis.
pub fn complete_unitary(cols: &[CVector], n: usize) -> CMatrix {
    let mut basis: Vec<CVector> = cols.to_vec();
    let mut candidate = 0;
    while basis.len() < n {
        assert!(candidate < n, "failed to complete an orthonormal system");
        let mut v = CVector::zeros(n);
        v[candidate] = C64::new(1.0, 0.0);
        candidate += 1;
        // Two Gram-Schmidt passes for numerical orthogonality.
        for _ in 0..2 {
            for b in &basis {
                let overlap: C64 = b.dotc(&v);
                v -= b * overlap;
            }
        }
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            basis.push(v / C64::new(norm, 0.0));
        }
    }
    let mut m = CMatrix::zeros(n, n);
    for (j, b) in basis.iter().enumerate() {
        m.set_column(j, b);
    }
    m
}

/// Orthonormal basis of `H(C^n)` with the normalized identity first and all
/// remaining elements traceless: the diagonal ladder elements followed by
/// the symmetric and antisymmetric off-diagonal pairs.
pub fn hermitian_basis(n: usize) -> Vec<HermitianOperator> {
    let mut basis = Vec::with_capacity(n * n);
    basis.push(HermitianOperator::scaled_identity(n, 1.0 / (n as f64).sqrt()));
    // Diagonal: diag(1,...,1,-k,0,...)/sqrt(k(k+1)) with k ones.
    for k in 1..n {
        let norm = 1.0 / ((k * (k + 1)) as f64).sqrt();
        let mut m = CMatrix::zeros(n, n);
        for i in 0..k {
            m[(i, i)] = C64::new(norm, 0.0);
        }
        m[(k, k)] = C64::new(-(k as f64) * norm, 0.0);
        basis.push(HermitianOperator { dim: n, entries: m });
    }
    let s = 1.0 / f64::sqrt(2.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut x = CMatrix::zeros(n, n);
            x[(i, j)] = C64::new(s, 0.0);
            x[(j, i)] = C64::new(s, 0.0);
            basis.push(HermitianOperator { dim: n, entries: x });
            let mut y = CMatrix::zeros(n, n);
            y[(i, j)] = C64::new(0.0, -s);
            y[(j, i)] = C64::new(0.0, s);
            basis.push(HermitianOperator { dim: n, entries: y });
        }
    }
    basis
}

/// Random Hermitian matrix with independent Gaussian entries (GUE-like).
pub fn random_hermitian<R: Rng>(n: usize, rng: &mut R) -> HermitianOperator {
    let g = CMatrix::from_fn(n, n, |_, _| complex_normal(rng));
    HermitianOperator::hermitian_part(&g)
}

/// Random traceless Hermitian matrix normalized to unit Hilbert-Schmidt norm.
pub fn random_unit_traceless<R: Rng>(n: usize, rng: &mut R) -> HermitianOperator {
    loop {
        let h = random_hermitian(n, rng).traceless_part();
        let norm = h.norm();
        if norm > 1e-12 {
            return h.scale(1.0 / norm);
        }
    }
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `exp(i t h)` for Hermitian `h`, via the eigendecomposition.
pub fn unitary_from_hermitian(h: &HermitianOperator, t: f64) -> CMatrix {
    let n = h.dim();
    let (vals, vecs) = h.eigen_desc();
    let mut u = CMatrix::zeros(n, n);
    for (k, &lam) in vals.iter().enumerate() {
        let phase = C64::new((t * lam).cos(), (t * lam).sin());
        let col = vecs.column(k);
        u += (col * col.adjoint()) * phase;
    }
    u
}

/// Partial trace over the A factor of an operator on `C^dA ⊗ C^dB`.
pub fn partial_trace_a(m: &CMatrix, da: usize, db: usize) -> CMatrix {
    let mut out = CMatrix::zeros(db, db);
    for j in 0..db {
        for jp in 0..db {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..da {
                acc += m[(i * db + j, i * db + jp)];
            }
            out[(j, jp)] = acc;
        }
    }
    out
}

/// Partial trace over the B factor of an operator on `C^dA ⊗ C^dB`.
pub fn partial_trace_b(m: &CMatrix, da: usize, db: usize) -> CMatrix {
    let mut out = CMatrix::zeros(da, da);
    for i in 0..da {
        for ip in 0..da {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..db {
                acc += m[(i * db + j, ip * db + j)];
            }
            out[(i, ip)] = acc;
        }
    }
    out
}
