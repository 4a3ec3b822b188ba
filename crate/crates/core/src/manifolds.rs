//! State-manifold families and their tangent data: fixed-spectrum unitary
//! orbits, states invariant under a unitary symmetry group, Bob-unitary
//! orbits of bipartite pure states, and the k-copy tensor-power map.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    haar_unitary, hermitian_basis, hs_inner, rng_from_seed, schmidt_decompose, C64, CMatrix,
    CVector, DensityOperator, HermitianOperator, SchmidtDecomposition, UnitVector,
};
use crate::opsys::{system_to_povm, OperatorSystem, Povm};

/// Eigenvalues are grouped into multiplicities at this absolute tolerance;
/// spectra are user inputs and exact by intent.
pub const SPECTRUM_GROUP_TOL: f64 = 1e-9;
/// Tolerance when matching a state's spectrum against a target spectrum.
pub const SPECTRUM_MATCH_TOL: f64 = 1e-8;
/// Hard cap on the dimension of materialized tensor powers.
pub const TENSOR_DIM_CAP: usize = 4096;

/// A sorted spectrum with its multiplicity profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
    multiplicities: Vec<usize>,
}

impl Spectrum {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSpectrum("empty spectrum".into()));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        if values.last().copied().unwrap_or(0.0) < -1e-12 {
            return Err(Error::InvalidSpectrum(format!(
                "negative eigenvalue {}",
                values.last().unwrap()
            )));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSpectrum(format!("eigenvalues sum to {sum}")));
        }
        let mut multiplicities = Vec::new();
        let mut run = 1usize;
        for i in 1..values.len() {
            if (values[i - 1] - values[i]).abs() <= SPECTRUM_GROUP_TOL {
                run += 1;
            } else {
                multiplicities.push(run);
                run = 1;
            }
        }
        multiplicities.push(run);
        Ok(Self {
            values,
            multiplicities,
        })
    }

    pub fn pure(n: usize) -> Self {
        let mut values = vec![0.0; n];
        values[0] = 1.0;
        Self::new(values).expect("valid pure spectrum")
    }

    pub fn uniform(n: usize) -> Self {
        Self::new(vec![1.0 / n as f64; n]).expect("valid uniform spectrum")
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn max_multiplicity(&self) -> usize {
        self.multiplicities.iter().copied().max().unwrap_or(1)
    }

    /// The rank parameter of the measurement constructions:
    /// `n` minus the largest eigenvalue multiplicity.
    pub fn rank_parameter(&self) -> usize {
        self.n() - self.max_multiplicity()
    }

    pub fn partition(&self) -> crate::bounds::FlagPartition {
        crate::bounds::FlagPartition::new(self.multiplicities.iter().map(|&m| m as u64).collect())
            .expect("multiplicities are positive")
    }

    pub fn diag_matrix(&self) -> CMatrix {
        let n = self.n();
        CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(self.values[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Orbit dimension `n^2 - sum n_i^2` of the fixed-spectrum manifold.
    pub fn orbit_dim(&self) -> usize {
        let n = self.n();
        n * n - self.multiplicities.iter().map(|&m| m * m).sum::<usize>()
    }
}

/// Haar-uniform point on the fixed-spectrum orbit: `U D_s U†`.
pub fn sample_fixed_spectrum(s: &Spectrum, seed: u64) -> DensityOperator {
    let n = s.n();
    let u = haar_unitary(n, seed);
    let m = &u * s.diag_matrix() * u.adjoint();
    DensityOperator::from_matrix(m).expect("conjugation preserves the spectrum")
}

/// Orthonormal tangent basis at a point of the fixed-spectrum orbit.
///
/// The tangent space is spanned by the commutator directions `i[h, rho]`;
/// in the eigenbasis of `rho` these are exactly the off-block pairs, two
/// directions per pair of eigenvectors with distinct eigenvalues. The count
/// is the orbit dimension `n^2 - sum n_i^2`.
pub fn tangent_basis_fixed_spectrum(
    rho: &DensityOperator,
    s: &Spectrum,
) -> Result<Vec<HermitianOperator>> {
    let n = rho.dim();
    if n != s.n() {
        return Err(Error::DimensionMismatch {
            expected: s.n(),
            got: n,
        });
    }
    let (eigs, vecs) = rho.operator().eigen_desc();
    let mut deviation = 0.0_f64;
    for (a, b) in eigs.iter().zip(s.values()) {
        deviation = deviation.max((a - b).abs());
    }
    if deviation > SPECTRUM_MATCH_TOL {
        return Err(Error::IncompatibleSpectrum { deviation });
    }
    // Group eigenvector indices by the declared multiplicities.
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut idx = 0usize;
    for &m in s.multiplicities() {
        groups.push((idx..idx + m).collect());
        idx += m;
    }
    let inv_sqrt2 = 1.0 / f64::sqrt(2.0);
    let mut basis = Vec::with_capacity(s.orbit_dim());
    for ga in 0..groups.len() {
        for gb in (ga + 1)..groups.len() {
            for &a in &groups[ga] {
                for &b in &groups[gb] {
                    let u = vecs.column(a);
                    let v = vecs.column(b);
                    let uv = u * v.adjoint();
                    // (|u><v| + |v><u|)/sqrt(2)
                    let sym = (&uv + uv.adjoint()) * C64::new(inv_sqrt2, 0.0);
                    // i(|u><v| - |v><u|)/sqrt(2)
                    let asym = (&uv - uv.adjoint()) * C64::new(0.0, inv_sqrt2);
                    basis.push(HermitianOperator::hermitian_part(&sym));
                    basis.push(HermitianOperator::hermitian_part(&asym));
                }
            }
        }
    }
    Ok(basis)
}

/// A Bob-unitary orbit descriptor: the base state with its Schmidt data.
#[derive(Debug, Clone)]
pub struct BobOrbitSpec {
    alpha: UnitVector,
    da: usize,
    db: usize,
    schmidt: SchmidtDecomposition,
    /// `P_alpha = sum_i lambda_i |e_i><f_i|` as a dA x dB matrix.
    p_alpha: CMatrix,
}

impl BobOrbitSpec {
    pub fn new(alpha: UnitVector, da: usize, db: usize) -> Result<Self> {
        let schmidt = schmidt_decompose(&alpha, da, db)?;
        let mut p_alpha = CMatrix::zeros(da, db);
        for (k, &lam) in schmidt.coefficients.iter().enumerate() {
            let e = schmidt.left.column(k);
            let f = schmidt.right.column(k);
            p_alpha += (e * f.adjoint()) * C64::new(lam, 0.0);
        }
        Ok(Self {
            alpha,
            da,
            db,
            schmidt,
            p_alpha,
        })
    }

    /// Base state with the given Schmidt coefficients on the computational
    /// bases of both factors. Coefficients are normalized internally.
    pub fn from_schmidt_coefficients(lambdas: &[f64], da: usize, db: usize) -> Result<Self> {
        let r = lambdas.len();
        if r == 0 || r > da.min(db) {
            return Err(Error::OutOfRange(format!(
                "Schmidt rank {r} incompatible with dimensions {da}x{db}"
            )));
        }
        if lambdas.iter().any(|&l| l <= 0.0) {
            return Err(Error::InvalidSpectrum(
                "Schmidt coefficients must be positive".into(),
            ));
        }
        let norm: f64 = lambdas.iter().map(|l| l * l).sum::<f64>().sqrt();
        let mut v = CVector::zeros(da * db);
        for (i, &l) in lambdas.iter().enumerate() {
            v[i * db + i] = C64::new(l / norm, 0.0);
        }
        Self::new(UnitVector::new(v).expect("normalized"), da, db)
    }

    /// Maximally entangled base state on `C^n ⊗ C^n`.
    pub fn maximally_entangled(n: usize) -> Self {
        Self::from_schmidt_coefficients(&vec![1.0; n], n, n).expect("valid")
    }

    /// Random base state of the requested Schmidt rank.
    pub fn random(da: usize, db: usize, rank: usize, seed: u64) -> Result<Self> {
        if rank == 0 || rank > da.min(db) {
            return Err(Error::OutOfRange(format!(
                "Schmidt rank {rank} incompatible with dimensions {da}x{db}"
            )));
        }
        let mut rng = rng_from_seed(seed);
        let e = haar_unitary(da, crate::linalg::derive_seed(seed, 1));
        let f = haar_unitary(db, crate::linalg::derive_seed(seed, 2));
        let mut lams: Vec<f64> = (0..rank).map(|_| 0.2 + rng.gen::<f64>()).collect();
        let norm: f64 = lams.iter().map(|l| l * l).sum::<f64>().sqrt();
        for l in &mut lams {
            *l /= norm;
        }
        let mut v = CVector::zeros(da * db);
        for (k, &l) in lams.iter().enumerate() {
            for i in 0..da {
                for j in 0..db {
                    v[i * db + j] += C64::new(l, 0.0) * e[(i, k)] * f[(j, k)];
                }
            }
        }
        Self::new(UnitVector::normalize(v)?, da, db)
    }

    pub fn alpha(&self) -> &UnitVector {
        &self.alpha
    }

    pub fn da(&self) -> usize {
        self.da
    }

    pub fn db(&self) -> usize {
        self.db
    }

    pub fn rank(&self) -> usize {
        self.schmidt.rank
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.schmidt.coefficients
    }

    pub fn schmidt(&self) -> &SchmidtDecomposition {
        &self.schmidt
    }

    pub fn p_alpha(&self) -> &CMatrix {
        &self.p_alpha
    }

    /// `(1 ⊗ M) v` without materializing the Kronecker product.
    pub(crate) fn apply_b_side(&self, m: &CMatrix, vec: &CVector) -> CVector {
        let mut out = CVector::zeros(self.da * self.db);
        for i in 0..self.da {
            for j in 0..self.db {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..self.db {
                    acc += m[(j, k)] * vec[i * self.db + k];
                }
                out[i * self.db + j] = acc;
            }
        }
        out
    }

    /// Matrix of an A-side operator in the Schmidt left basis.
    pub fn to_left_basis(&self, o: &CMatrix) -> CMatrix {
        self.schmidt.left.adjoint() * o * &self.schmidt.left
    }

    /// Matrix of a B-side operator in the Schmidt right basis.
    pub fn to_right_basis(&self, s: &CMatrix) -> CMatrix {
        self.schmidt.right.adjoint() * s * &self.schmidt.right
    }
}

/// The orbit state `|beta><beta|` with `beta = (1 ⊗ U) alpha`.
pub fn bob_state(spec: &BobOrbitSpec, u: &CMatrix) -> Result<DensityOperator> {
    if u.nrows() != spec.db() || u.ncols() != spec.db() {
        return Err(Error::DimensionMismatch {
            expected: spec.db(),
            got: u.nrows(),
        });
    }
    let beta = spec.apply_b_side(u, spec.alpha().entries());
    Ok(DensityOperator::pure(
        &UnitVector::new(beta).expect("unitaries preserve the norm"),
    ))
}

/// Left side of the trace identity: `tr(O ⊗ U S U† |alpha><alpha|)`,
/// evaluated directly on the bipartite space.
pub fn lemtr_lhs(spec: &BobOrbitSpec, o: &CMatrix, s: &CMatrix, u: &CMatrix) -> f64 {
    let w = u * s * u.adjoint();
    let a = spec.alpha().entries();
    let (da, db) = (spec.da(), spec.db());
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..da {
        for j in 0..db {
            for ip in 0..da {
                for jp in 0..db {
                    acc += a[i * db + j].conj() * o[(i, ip)] * w[(j, jp)] * a[ip * db + jp];
                }
            }
        }
    }
    acc.re
}

/// Right side of the trace identity:
/// `tr((P_alpha U)† O^T (P_alpha U) S)` with every operator written in the
/// Schmidt bases, where `P_alpha` is the diagonal coefficient matrix. The
/// transpose is taken in the Schmidt left basis.
pub fn lemtr_rhs(spec: &BobOrbitSpec, o: &CMatrix, s: &CMatrix, u: &CMatrix) -> f64 {
    let (da, db) = (spec.da(), spec.db());
    let o_s = spec.to_left_basis(o);
    let s_s = spec.to_right_basis(s);
    let u_s = spec.to_right_basis(u);
    let mut p = CMatrix::zeros(da, db);
    for (k, &lam) in spec.coefficients().iter().enumerate() {
        p[(k, k)] = C64::new(lam, 0.0);
    }
    let pu = &p * &u_s;
    let m = pu.adjoint() * o_s.transpose() * pu * s_s;
    m.trace().re
}

/// Orthonormal tangent frame of the Bob-unitary orbit at the point `U`.
///
/// Tangent vectors are `i[(1 ⊗ U h U†), beta beta†]` for `h` running over a
/// traceless Hermitian basis of the B side; the frame dimension is
/// `2 dB r - r^2 - 1`.
pub fn bob_tangent_basis(spec: &BobOrbitSpec, u: &CMatrix) -> Result<Vec<HermitianOperator>> {
    if u.nrows() != spec.db() {
        return Err(Error::DimensionMismatch {
            expected: spec.db(),
            got: u.nrows(),
        });
    }
    let beta = spec.apply_b_side(u, spec.alpha().entries());
    let mut candidates = Vec::new();
    for h in hermitian_basis(spec.db()).iter().skip(1) {
        let m = u * h.entries() * u.adjoint();
        let w = spec.apply_b_side(&m, &beta);
        // i(w beta† - beta w†), a rank <= 2 Hermitian tangent direction.
        let outer = &w * beta.adjoint();
        let t = (&outer - outer.adjoint()) * C64::new(0.0, 1.0);
        candidates.push(HermitianOperator::hermitian_part(&t));
    }
    // Orthonormalize, dropping the dependent directions (the stabilizer).
    let scale = candidates
        .iter()
        .map(|c| c.norm())
        .fold(0.0_f64, f64::max)
        .max(1e-300);
    let mut frame: Vec<HermitianOperator> = Vec::new();
    for cand in candidates {
        let mut v = cand;
        for _ in 0..2 {
            for b in &frame {
                let c = hs_inner(b, &v).expect("dims equal");
                v = v.sub(&b.scale(c));
            }
        }
        let res = v.norm();
        if res > 1e-9 * scale {
            frame.push(v.scale(1.0 / res));
        }
    }
    Ok(frame)
}

/// A finite set of unitary generators of a symmetry subgroup.
#[derive(Debug, Clone)]
pub struct SymmetryGroup {
    n: usize,
    generators: Vec<CMatrix>,
}

impl SymmetryGroup {
    pub fn new(n: usize, generators: Vec<CMatrix>) -> Result<Self> {
        for g in &generators {
            if g.nrows() != n || g.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: g.nrows(),
                });
            }
            let defect = crate::linalg::unitarity_defect(g);
            if defect > 1e-10 {
                return Err(Error::OutOfRange(format!(
                    "generator is not unitary (defect {defect:.3e})"
                )));
            }
        }
        Ok(Self { n, generators })
    }

    pub fn trivial(n: usize) -> Self {
        Self {
            n,
            generators: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }
}

/// Orthonormal Hermitian basis (identity first) of the Hermitian part of
/// the commutant `{B : U B U† = B for all generators}`.
///
/// The commutation constraints are stacked as a real linear system over the
/// real and imaginary parts of `B`; the kernel is a complex subspace closed
/// under the conjugate transpose, so its Hermitian parts span the result.
pub fn commutant(g: &SymmetryGroup) -> Vec<HermitianOperator> {
    let n = g.n();
    if g.generators().is_empty() {
        return hermitian_basis(n);
    }
    let vars = 2 * n * n; // re/im of each entry of B
    let rows_per_gen = 2 * n * n;
    let gens = g.generators();
    let mut a = DMatrix::<f64>::zeros(rows_per_gen * gens.len(), vars);
    // Constraint per generator U: (U B - B U)_{pq} = 0.
    // B_{ij} = x_{ij} + i y_{ij}; column layout: all x, then all y.
    for (gi, u) in gens.iter().enumerate() {
        for p in 0..n {
            for q in 0..n {
                let row_re = gi * rows_per_gen + 2 * (p * n + q);
                let row_im = row_re + 1;
                for k in 0..n {
                    // +U_{pk} B_{kq}
                    let c = u[(p, k)];
                    let col_x = k * n + q;
                    let col_y = n * n + k * n + q;
                    a[(row_re, col_x)] += c.re;
                    a[(row_re, col_y)] -= c.im;
                    a[(row_im, col_x)] += c.im;
                    a[(row_im, col_y)] += c.re;
                    // -B_{pk} U_{kq}
                    let d = u[(k, q)];
                    let col_x = p * n + k;
                    let col_y = n * n + p * n + k;
                    a[(row_re, col_x)] -= d.re;
                    a[(row_re, col_y)] += d.im;
                    a[(row_im, col_x)] -= d.im;
                    a[(row_im, col_y)] -= d.re;
                }
            }
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let smax = svd
        .singular_values
        .iter()
        .fold(0.0_f64, |acc, &s| acc.max(s));
    let cutoff = 1e-9 * smax.max(1.0);
    let mut hermitian_candidates = Vec::new();
    for (i, &sv) in svd.singular_values.iter().enumerate() {
        if sv > cutoff {
            continue;
        }
        let row = v_t.row(i);
        let b = CMatrix::from_fn(n, n, |p, q| C64::new(row[p * n + q], row[n * n + p * n + q]));
        hermitian_candidates.push(HermitianOperator::hermitian_part(&b));
        hermitian_candidates.push(HermitianOperator::antihermitian_part(&b));
    }
    OperatorSystem::from_span(n, &hermitian_candidates)
        .expect("dimensions agree")
        .basis()
        .to_vec()
}

/// POVM whose operator system is the Hermitian part of the commutant; its
/// dimension is the commutant's Hermitian dimension minus one and it
/// separates invariant states.
pub fn invariant_state_povm(g: &SymmetryGroup) -> Result<Povm> {
    let basis = commutant(g);
    let sigma = OperatorSystem::from_span(g.n(), &basis)?;
    system_to_povm(&sigma)
}

/// Random invariant state: a random combination of the commutant basis,
/// shifted and scaled into the state simplex (the shift stays inside the
/// commutant because the identity belongs to it).
pub fn sample_invariant_state(
    commutant_basis: &[HermitianOperator],
    seed: u64,
) -> DensityOperator {
    let n = commutant_basis[0].dim();
    let mut rng = rng_from_seed(seed);
    let mut a = HermitianOperator::zero(n);
    for b in commutant_basis {
        a = a.add(&b.scale(crate::linalg::standard_normal(&mut rng)));
    }
    let min = a.min_eigenvalue();
    let shifted = a.add(&HermitianOperator::scaled_identity(
        n,
        -min + 0.1 * (a.norm() / (n as f64).sqrt() + 1e-3),
    ));
    let rho = shifted.scale(1.0 / shifted.trace());
    DensityOperator::new(rho).expect("shifted into the simplex")
}

/// Tensor power of a Hermitian operator (no state validation).
pub fn hermitian_tensor_power(a: &HermitianOperator, k: u32) -> Result<HermitianOperator> {
    if k == 0 {
        return Err(Error::OutOfRange("tensor power needs k >= 1".into()));
    }
    let dim = a.dim().checked_pow(k).unwrap_or(usize::MAX);
    if dim > TENSOR_DIM_CAP {
        return Err(Error::SizeOverflow {
            dim: a.dim(),
            copies: k,
            cap: TENSOR_DIM_CAP,
        });
    }
    let mut m = a.entries().clone();
    for _ in 1..k {
        m = m.kronecker(a.entries());
    }
    Ok(HermitianOperator::hermitian_part(&m))
}

/// `rho^{⊗k}` as a density operator.
pub fn tensor_power(rho: &DensityOperator, k: u32) -> Result<DensityOperator> {
    let m = hermitian_tensor_power(rho.operator(), k)?;
    DensityOperator::new(m)
}

/// Differential of the tensor-power map:
/// `sum_i a^{⊗(i-1)} ⊗ v ⊗ a^{⊗(k-i)}`.
pub fn tensor_power_differential(
    a: &HermitianOperator,
    v: &HermitianOperator,
    k: u32,
) -> Result<HermitianOperator> {
    if a.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: v.dim(),
        });
    }
    if k == 0 {
        return Err(Error::OutOfRange("tensor power needs k >= 1".into()));
    }
    let dim = a.dim().checked_pow(k).unwrap_or(usize::MAX);
    if dim > TENSOR_DIM_CAP {
        return Err(Error::SizeOverflow {
            dim: a.dim(),
            copies: k,
            cap: TENSOR_DIM_CAP,
        });
    }
    let mut total: Option<CMatrix> = None;
    for i in 0..k {
        let mut term: Option<CMatrix> = None;
        for j in 0..k {
            let factor = if j == i { v.entries() } else { a.entries() };
            term = Some(match term {
                None => factor.clone(),
                Some(t) => t.kronecker(factor),
            });
        }
        let term = term.expect("k >= 1");
        total = Some(match total {
            None => term,
            Some(t) => t + term,
        });
    }
    Ok(HermitianOperator::hermitian_part(&total.expect("k >= 1")))
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 1 {
        return vec![vec![0]];
    }
    let mut out = Vec::new();
    for rest in permutations(k - 1) {
        for first in 0..k {
            let mut q = Vec::with_capacity(k);
            q.push(first);
            q.extend(rest.iter().map(|&x| x + usize::from(x >= first)));
            out.push(q);
        }
    }
    out
}

/// Symmetric product `(1/k!) sum_pi op_{pi(1)} ⊗ ... ⊗ op_{pi(k)}`.
pub fn symmetric_product(ops: &[HermitianOperator]) -> Result<HermitianOperator> {
    let k = ops.len();
    if k == 0 {
        return Err(Error::OutOfRange("symmetric product of zero factors".into()));
    }
    let n = ops[0].dim();
    for o in ops {
        if o.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: o.dim(),
            });
        }
    }
    let dim = n.checked_pow(k as u32).unwrap_or(usize::MAX);
    if dim > TENSOR_DIM_CAP {
        return Err(Error::SizeOverflow {
            dim: n,
            copies: k as u32,
            cap: TENSOR_DIM_CAP,
        });
    }
    let mut total: Option<CMatrix> = None;
    for perm in permutations(k) {
        let mut term: Option<CMatrix> = None;
        for &idx in &perm {
            let f = ops[idx].entries();
            term = Some(match term {
                None => f.clone(),
                Some(t) => t.kronecker(f),
            });
        }
        let term = term.expect("k >= 1");
        total = Some(match total {
            None => term,
            Some(t) => t + term,
        });
    }
    let fact: f64 = (1..=k).map(|x| x as f64).product();
    Ok(HermitianOperator::hermitian_part(
        &(total.expect("k >= 1") / C64::new(fact, 0.0)),
    ))
}

/// Evaluates the degree-k polynomial associated with a symmetric k-tensor:
/// `tr(eta (sum_i x_i sigma_i)^{⊗k})` with `sigma` the identity-first
/// orthonormal basis of `H(C^n)`.
pub fn kcopy_poly_eval(eta: &HermitianOperator, n: usize, k: u32, x: &[f64]) -> Result<f64> {
    let basis = hermitian_basis(n);
    if x.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            got: x.len(),
        });
    }
    let mut a = HermitianOperator::zero(n);
    for (xi, b) in x.iter().zip(&basis) {
        a = a.add(&b.scale(*xi));
    }
    let power = hermitian_tensor_power(&a, k)?;
    if power.dim() != eta.dim() {
        return Err(Error::DimensionMismatch {
            expected: power.dim(),
            got: eta.dim(),
        });
    }
    hs_inner(eta, &power)
}
