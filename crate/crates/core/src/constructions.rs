//! Explicit measurement constructions matching the upper bounds: operator
//! systems whose complement avoids low-rank operators (separating states of
//! bounded rank and fixed spectrum), the two-stage orbit measurement, and
//! the quadratic-form orbit measurement with its reconstruction recursion.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::error::{Error, Result};
use crate::linalg::{
    complex_normal, derive_seed, hermitian_basis, hs_inner, rng_from_seed, C64,
    CMatrix, CVector, DensityOperator, HermitianOperator, UnitVector,
};
use crate::manifolds::{BobOrbitSpec, Spectrum};
use crate::opsys::OperatorSystem;

/// Certification passes when the minimized singular value stays above this.
pub const CERTIFY_THRESHOLD: f64 = 1e-6;
/// Default number of multi-start descent runs.
pub const CERTIFY_RESTARTS: usize = 200;

/// How the rank-bounded system picks its complement subspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankBoundedMode {
    /// Seeded Haar-random complement, accepted only after certification.
    RandomCertified,
    /// Deterministic complement built from a totally nonsingular
    /// (Vandermonde) conjugation stream; must pass the same certification.
    Vandermonde,
}

/// Outcome of the complement-rank certification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificationReport {
    pub pass: bool,
    /// Minimum over restarts (and grid, when used) of the (2r+1)-th
    /// singular value over unit-norm complement elements.
    pub min_singular_value: f64,
    pub threshold: f64,
    pub restarts: usize,
    pub grid_checked: bool,
    pub complement_dim: usize,
    /// Elements of rank at most this bound must be avoided.
    pub rank_bound: usize,
    /// Coordinates of the minimizing complement element when it fails.
    pub witness: Option<Vec<f64>>,
}

impl CertificationReport {
    pub fn vacuous(rank_bound: usize) -> Self {
        Self {
            pass: true,
            min_singular_value: f64::INFINITY,
            threshold: CERTIFY_THRESHOLD,
            restarts: 0,
            grid_checked: false,
            complement_dim: 0,
            rank_bound,
            witness: None,
        }
    }

    /// One-line digest for construction metadata.
    pub fn digest(&self) -> String {
        format!(
            "pass={} min_sv={:.3e} restarts={} grid={} complement_dim={}",
            self.pass, self.min_singular_value, self.restarts, self.grid_checked,
            self.complement_dim
        )
    }
}

fn assemble(basis: &[HermitianOperator], w: &[f64]) -> HermitianOperator {
    let n = basis[0].dim();
    let mut a = HermitianOperator::zero(n);
    for (b, &c) in basis.iter().zip(w) {
        a = a.add(&b.scale(c));
    }
    a
}

/// The (k+1)-th largest singular value (0-indexed `k`) of a Hermitian
/// matrix and its gradient with respect to the combination coordinates.
fn singular_value_and_grad(
    basis: &[HermitianOperator],
    w: &[f64],
    k: usize,
) -> (f64, Vec<f64>) {
    let a = assemble(basis, w);
    let (vals, vecs) = a.eigen_desc();
    let n = vals.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[j].abs().total_cmp(&vals[i].abs()));
    let idx = order[k.min(n - 1)];
    let lam = vals[idx];
    let x = vecs.column(idx);
    let sign = if lam >= 0.0 { 1.0 } else { -1.0 };
    let grad: Vec<f64> = basis
        .iter()
        .map(|b| {
            let bx = b.entries() * x;
            let v: C64 = x.dotc(&bx);
            sign * v.re
        })
        .collect();
    (lam.abs(), grad)
}

fn normalize(w: &mut [f64]) -> f64 {
    let norm: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in w.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

/// One projected-gradient descent run on the unit sphere of the complement,
/// minimizing the (2r+1)-th singular value. Returns the best value found
/// and its coordinates.
fn descend(basis: &[HermitianOperator], k: usize, seed: u64, iters: usize) -> (f64, Vec<f64>) {
    let d = basis.len();
    let mut rng = rng_from_seed(seed);
    let mut w: Vec<f64> = (0..d)
        .map(|_| crate::linalg::standard_normal(&mut rng))
        .collect();
    normalize(&mut w);
    let (mut best_f, _) = singular_value_and_grad(basis, &w, k);
    let mut best_w = w.clone();
    let mut step = 0.2;
    for _ in 0..iters {
        let (f, g) = singular_value_and_grad(basis, &w, k);
        if f < best_f {
            best_f = f;
            best_w = w.clone();
        }
        // Project the gradient on the sphere tangent.
        let dot: f64 = g.iter().zip(&*w).map(|(a, b)| a * b).sum();
        let tangent: Vec<f64> = g.iter().zip(&*w).map(|(a, b)| a - dot * b).collect();
        let tnorm: f64 = tangent.iter().map(|x| x * x).sum::<f64>().sqrt();
        if tnorm < 1e-13 || step < 1e-13 {
            break;
        }
        let mut trial: Vec<f64> = w
            .iter()
            .zip(&tangent)
            .map(|(x, t)| x - step * t)
            .collect();
        normalize(&mut trial);
        let (ft, _) = singular_value_and_grad(basis, &trial, k);
        if ft < f {
            w = trial;
            step *= 1.2;
        } else {
            step *= 0.5;
        }
    }
    (best_f, best_w)
}

/// Certifies that no nonzero element of the spanned complement has rank at
/// most `2r`: multi-start projected gradient descent on the (2r+1)-th
/// singular value, plus a dense grid sweep for tiny problems.
pub fn certify_complement(
    complement: &[HermitianOperator],
    r: usize,
    restarts: usize,
    seed: u64,
) -> CertificationReport {
    let rank_bound = 2 * r;
    if complement.is_empty() {
        return CertificationReport::vacuous(rank_bound);
    }
    let n = complement[0].dim();
    let k = rank_bound; // 0-indexed position of the (2r+1)-th singular value
    if k >= n {
        // Every operator on C^n has rank <= n <= 2r; nothing can pass.
        return CertificationReport {
            pass: false,
            min_singular_value: 0.0,
            threshold: CERTIFY_THRESHOLD,
            restarts: 0,
            grid_checked: false,
            complement_dim: complement.len(),
            rank_bound,
            witness: None,
        };
    }
    let mut results: Vec<(usize, f64, Vec<f64>)> = (0..restarts)
        .into_par_iter()
        .map(|i| {
            let (f, w) = descend(complement, k, derive_seed(seed, i as u64), 160);
            (i, f, w)
        })
        .collect();
    results.sort_by_key(|r| r.0); // deterministic reduction by index
    let mut min_sv = f64::INFINITY;
    let mut min_w: Option<Vec<f64>> = None;
    for (_, f, w) in results {
        if f < min_sv {
            min_sv = f;
            min_w = Some(w);
        }
    }

    // Dense sweep for small ambient dimension and a low-dimensional sphere.
    let mut grid_checked = false;
    if n <= 3 && complement.len() <= 3 {
        grid_checked = true;
        let d = complement.len();
        let mut check = |w: &[f64]| {
            let (f, _) = singular_value_and_grad(complement, w, k);
            if f < min_sv {
                min_sv = f;
                min_w = Some(w.to_vec());
            }
        };
        match d {
            1 => {
                check(&[1.0]);
                check(&[-1.0]);
            }
            2 => {
                for i in 0..4000 {
                    let th = std::f64::consts::TAU * i as f64 / 4000.0;
                    check(&[th.cos(), th.sin()]);
                }
            }
            _ => {
                // Fibonacci sphere.
                let m = 20_000;
                let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
                for i in 0..m {
                    let y = 1.0 - 2.0 * (i as f64 + 0.5) / m as f64;
                    let rad = (1.0 - y * y).sqrt();
                    let th = golden * i as f64;
                    check(&[rad * th.cos(), y, rad * th.sin()]);
                }
            }
        }
    }

    let pass = min_sv > CERTIFY_THRESHOLD;
    CertificationReport {
        pass,
        min_singular_value: min_sv,
        threshold: CERTIFY_THRESHOLD,
        restarts,
        grid_checked,
        complement_dim: complement.len(),
        rank_bound,
        witness: if pass { None } else { min_w },
    }
}

/// Orthonormal traceless complement directions for the random mode.
fn random_complement(n: usize, dim: usize, seed: u64) -> Vec<HermitianOperator> {
    let mut rng = rng_from_seed(seed);
    let mut out: Vec<HermitianOperator> = Vec::new();
    while out.len() < dim {
        let mut v = crate::linalg::random_unit_traceless(n, &mut rng);
        for _ in 0..2 {
            for b in &out {
                let c = hs_inner(b, &v).expect("dims equal");
                v = v.sub(&b.scale(c));
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            out.push(v.scale(1.0 / norm));
        }
    }
    out
}

/// Deterministic complement from weighted-Hankel directions: symmetric
/// totally nonsingular weights `xi^{ij}` on single anti-diagonal supports,
/// restricted to the window where every anti-diagonal has length at least
/// `2r + 1`. Any combination within one weight family keeps rank above `2r`
/// by a triangular-minor argument; further families extend the dimension
/// when the window is not enough. Reference-derived recipe; certification
/// remains the contract either way.
fn vandermonde_complement(n: usize, dim: usize, r: usize) -> Vec<HermitianOperator> {
    let mut out: Vec<HermitianOperator> = Vec::new();
    if 2 * n < 2 + 4 * r {
        return out; // window empty
    }
    for family in 0..16usize {
        if out.len() >= dim {
            break;
        }
        let xi: f64 = 1.25 + 0.5 * family as f64;
        for s in (2 * r)..=(2 * (n - 1) - 2 * r) {
            if out.len() >= dim {
                break;
            }
            let mut m = CMatrix::zeros(n, n);
            let mut scale = 0.0_f64;
            for i in 0..n {
                for j in 0..n {
                    if i + j == s {
                        let w = xi.powi((i * j) as i32);
                        m[(i, j)] = C64::new(w, 0.0);
                        scale = scale.max(w);
                    }
                }
            }
            m /= C64::new(scale, 0.0);
            let mut v = HermitianOperator::hermitian_part(&m).traceless_part();
            for _ in 0..2 {
                for u in &out {
                    let c = hs_inner(u, &v).expect("dims equal");
                    v = v.sub(&u.scale(c));
                }
            }
            let norm = v.norm();
            if norm > 1e-9 {
                out.push(v.scale(1.0 / norm));
            }
        }
    }
    out
}

/// Operator system orthogonal to the given traceless complement directions
/// (the identity plus everything the complement leaves free).
fn system_from_complement(n: usize, complement: &[HermitianOperator]) -> OperatorSystem {
    let mut occupied: Vec<HermitianOperator> =
        vec![HermitianOperator::scaled_identity(n, 1.0 / (n as f64).sqrt())];
    occupied.extend(complement.iter().cloned());
    let mut extra: Vec<HermitianOperator> = Vec::new();
    for b in hermitian_basis(n).into_iter().skip(1) {
        let mut v = b;
        for _ in 0..2 {
            for u in occupied.iter().chain(extra.iter()) {
                let c = hs_inner(u, &v).expect("dims equal");
                v = v.sub(&u.scale(c));
            }
        }
        let norm = v.norm();
        if norm > 1e-9 {
            extra.push(v.scale(1.0 / norm));
        }
    }
    OperatorSystem::from_span(n, &extra).expect("dimensions agree")
}

/// Operator system of dimension `4r(n-r) + 1` whose orthogonal complement
/// in `H(C^n)` contains no nonzero element of rank at most `2r`, certified
/// before being returned. Degenerates to the full system for `2r >= n`.
pub fn rank_bounded_system(
    n: usize,
    r: usize,
    mode: RankBoundedMode,
    seed: u64,
) -> Result<(OperatorSystem, CertificationReport)> {
    if n < 2 || r < 1 {
        return Err(Error::OutOfRange(format!(
            "rank-bounded system needs n >= 2 and r >= 1, got ({n}, {r})"
        )));
    }
    let target = 4 * r * (n - r) + 1;
    if 2 * r >= n || target >= n * n {
        return Ok((
            OperatorSystem::full(n),
            CertificationReport::vacuous(2 * r),
        ));
    }
    let complement_dim = n * n - target;
    match mode {
        RankBoundedMode::RandomCertified => {
            let attempts = 6;
            let mut last = None;
            for a in 0..attempts {
                let complement =
                    random_complement(n, complement_dim, derive_seed(seed, 7_000 + a));
                let report = certify_complement(
                    &complement,
                    r,
                    CERTIFY_RESTARTS,
                    derive_seed(seed, 8_000 + a),
                );
                if report.pass {
                    return Ok((system_from_complement(n, &complement), report));
                }
                last = Some(report);
            }
            Err(Error::CertificationFailed(format!(
                "random complement failed after {attempts} attempts: {}",
                last.map(|r| r.digest()).unwrap_or_default()
            )))
        }
        RankBoundedMode::Vandermonde => {
            let complement = vandermonde_complement(n, complement_dim, r);
            if complement.len() < complement_dim {
                return Err(Error::CertificationFailed(
                    "deterministic complement stream ran out of directions".into(),
                ));
            }
            let report =
                certify_complement(&complement, r, CERTIFY_RESTARTS, derive_seed(seed, 9_000));
            if report.pass {
                Ok((system_from_complement(n, &complement), report))
            } else {
                Err(Error::CertificationFailed(format!(
                    "deterministic complement failed certification: {}",
                    report.digest()
                )))
            }
        }
    }
}

/// System separating the fixed-spectrum orbit: delegates to the
/// rank-bounded construction with `r` the spectrum's rank parameter.
pub fn fixed_spectrum_system(
    s: &Spectrum,
    mode: RankBoundedMode,
    seed: u64,
) -> Result<(OperatorSystem, CertificationReport)> {
    let n = s.n();
    let r = s.rank_parameter();
    if r == 0 {
        // Point orbit; the trivial system suffices.
        return Ok((OperatorSystem::trivial(n), CertificationReport::vacuous(0)));
    }
    rank_bounded_system(n, r, mode, seed)
}

/// Random rank-bounded density operator (Ginibre factor normalization).
pub fn sample_rank_bounded_state(n: usize, r: usize, seed: u64) -> DensityOperator {
    let mut rng = rng_from_seed(seed);
    let g = CMatrix::from_fn(n, r, |_, _| complex_normal(&mut rng));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityOperator::from_matrix(m / C64::new(tr, 0.0)).expect("Wishart state")
}

/// The two-stage orbit measurement: a spectral stage seeing the reweighted
/// reduced operator and a phase-retrieval stage fixing the residual
/// diagonal phases.
#[derive(Debug, Clone)]
pub struct Up1Construction {
    pub system: OperatorSystem,
    /// A-side reweighting effect making the effective spectrum simple.
    pub o1: HermitianOperator,
    /// A-side rank-one-sum effect steering the phase stage.
    pub o2: HermitianOperator,
    /// Phase-retrieval frame vectors on the B side (4 dB - 4 of them).
    pub frame: Vec<CVector>,
    /// Simple effective spectrum seen by the spectral stage.
    pub effective_spectrum: Spectrum,
    /// Dimension of the spectral-stage operator system on the B side.
    pub phi1_dimension: usize,
    /// Outcome count of the phase stage (frame cardinality).
    pub phi2_outcomes: usize,
    /// POVM dimension stated by the closed-form bound, for reports.
    pub formula_povm_dimension: i64,
    pub certification: CertificationReport,
}

/// Builds the two-stage measurement system on the bipartite space.
///
/// Repeated Schmidt coefficients are handled by the reweighting device: the
/// first-stage effect `O1` rescales the squared coefficients to the simple
/// profile `(r, r-1, ..., 1)/Z`, so the reduced operator seen by the
/// spectral stage always has distinct nonzero eigenvalues.
pub fn bob_up1_system(spec: &BobOrbitSpec, seed: u64) -> Result<Up1Construction> {
    let db = spec.db();
    let r = spec.rank();
    let lams = spec.coefficients();

    // Effective squared spectrum: mu_i^2 = (r + 1 - i)/Z, strictly
    // decreasing; c_i = mu_i^2 / lambda_i^2 defines the reweighting.
    let z: f64 = (1..=r).map(|i| i as f64).sum();
    let mu_sq: Vec<f64> = (0..r).map(|i| (r - i) as f64 / z).collect();
    let c: Vec<f64> = mu_sq
        .iter()
        .zip(lams)
        .map(|(m, l)| m / (l * l))
        .collect();

    let e = &spec.schmidt().left;
    let da = spec.da();
    let mut o1_s = CMatrix::zeros(da, da);
    for i in 0..r {
        o1_s[(i, i)] = C64::new(c[i], 0.0);
    }
    let o1 = HermitianOperator::hermitian_part(&(e * o1_s * e.adjoint()));

    // Phase-stage A-side effect: (O2')_{ij} = 1/(lambda_i lambda_j) on the
    // Schmidt block, steering the measurement onto a rank-one B-side vector.
    let mut o2_s = CMatrix::zeros(da, da);
    for i in 0..r {
        for j in 0..r {
            o2_s[(i, j)] = C64::new(1.0 / (lams[i] * lams[j]), 0.0);
        }
    }
    let o2 = HermitianOperator::hermitian_part(&(e * o2_s * e.adjoint()));

    // Spectral stage on the B side for {mu_i^2} plus zeros.
    let mut eff_values = mu_sq.clone();
    eff_values.extend(std::iter::repeat(0.0).take(db - r));
    let effective_spectrum = Spectrum::new(eff_values)?;
    let (b_system, certification) = fixed_spectrum_system(
        &effective_spectrum,
        RankBoundedMode::RandomCertified,
        derive_seed(seed, 1),
    )?;

    // Phase-retrieval frame: seeded generic vectors, accepted after a
    // sampling-based injectivity check on rank-one differences.
    let frame_size = 4 * db - 4;
    let mut frame = Vec::new();
    for attempt in 0..6u64 {
        let mut rng = rng_from_seed(derive_seed(seed, 100 + attempt));
        let candidate: Vec<CVector> = (0..frame_size)
            .map(|_| CVector::from_fn(db, |_, _| complex_normal(&mut rng)))
            .collect();
        if frame_separates_rank_ones(&candidate, db, derive_seed(seed, 200 + attempt)) {
            frame = candidate;
            break;
        }
    }
    if frame.is_empty() {
        return Err(Error::CertificationFailed(
            "phase-retrieval frame failed the injectivity sampling check".into(),
        ));
    }

    // Assemble the bipartite operator system.
    let ambient = da * db;
    let mut generators: Vec<HermitianOperator> = Vec::new();
    for s in b_system.basis() {
        let m = o1.entries().kronecker(s.entries());
        generators.push(HermitianOperator::hermitian_part(&m));
    }
    for zv in &frame {
        let s = zv * zv.adjoint();
        let m = o2.entries().kronecker(&s);
        generators.push(HermitianOperator::hermitian_part(&m));
    }
    let system = OperatorSystem::from_span(ambient, &generators)?;
    let formula_povm_dimension = bounds::upper_bob_up1(db as u64, r as u64)?;
    Ok(Up1Construction {
        system,
        o1,
        o2,
        frame,
        effective_spectrum,
        phi1_dimension: b_system.dimension(),
        phi2_outcomes: frame_size,
        formula_povm_dimension,
        certification,
    })
}

/// Sampling check that the frame separates rank-one projectors.
fn frame_separates_rank_ones(frame: &[CVector], db: usize, seed: u64) -> bool {
    let pairs = 300;
    for t in 0..pairs {
        let x = UnitVector::random(db, derive_seed(seed, 2 * t));
        let y = UnitVector::random(db, derive_seed(seed, 2 * t + 1));
        let px = DensityOperator::pure(&x);
        let py = DensityOperator::pure(&y);
        let diff = px.operator().sub(py.operator()).norm();
        if diff < 1e-8 {
            continue;
        }
        let d: f64 = frame
            .iter()
            .map(|z| {
                let mx: C64 = z.dotc(x.entries());
                let my: C64 = z.dotc(y.entries());
                (mx.norm_sqr() - my.norm_sqr()).powi(2)
            })
            .sum::<f64>()
            .sqrt();
        if d / diff <= 1e-6 {
            return false;
        }
    }
    true
}

/// Reconstructs the B-side unitary from exact two-stage outcomes of a
/// maximally entangled orbit: eigendecomposition of the reweighted reduced
/// operator recovers the columns up to phases, Gauss-Newton phase retrieval
/// on the frame outcomes recovers the phase-linking vector, and the two are
/// stitched together. Returns a unitary equal to the true one up to a
/// global phase.
pub fn bob_up1_reconstruct_unitary(
    spec: &BobOrbitSpec,
    con: &Up1Construction,
    rho: &DensityOperator,
    seed: u64,
) -> Result<CMatrix> {
    let db = spec.db();
    let r = spec.rank();
    if r != db || spec.da() != db {
        return Err(Error::OutOfRange(
            "unitary reconstruction requires a maximally entangled base state".into(),
        ));
    }
    let f = &spec.schmidt().right;
    // Reweighted reduced operator tr_A[(O1 ⊗ 1) rho] = V' diag(mu^2) V'†
    // in the Schmidt right basis.
    let da = spec.da();
    let o1rho = {
        // (O1 ⊗ 1) rho, then the partial trace over A.
        let mut m = CMatrix::zeros(db, db);
        for j in 0..db {
            for jp in 0..db {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..da {
                    for ip in 0..da {
                        acc += con.o1.entries()[(i, ip)]
                            * rho.entries()[(ip * db + j, i * db + jp)];
                    }
                }
                m[(j, jp)] = acc;
            }
        }
        m
    };
    let reduced = f.adjoint() * o1rho * f;
    let (vals, vecs) = HermitianOperator::hermitian_part(&reduced).eigen_desc();
    // Guard: the effective spectrum must be simple for the columns to be
    // recoverable one by one.
    for w in vals.windows(2) {
        if (w[0] - w[1]).abs() < 1e-9 {
            return Err(Error::InconsistentOutcomes(
                "reduced operator spectrum is degenerate".into(),
            ));
        }
    }
    let u_hat = vecs; // = V' Phi for a diagonal phase matrix Phi

    // Frame outcomes y_b = |<w_b, V' q>|^2 with q the all-ones vector.
    let w_frame: Vec<CVector> = con.frame.iter().map(|z| f.adjoint() * z).collect();
    let y: Vec<f64> = con
        .frame
        .iter()
        .map(|z| {
            let s = z * z.adjoint();
            let m = con.o2.entries().kronecker(&s);
            hs_inner(
                &HermitianOperator::hermitian_part(&m),
                rho.operator(),
            )
            .expect("dims equal")
        })
        .collect();
    let phi = phase_retrieve(&w_frame, &y, seed)?;

    // Stitch: zeta = U_hat† phi = e^{i theta} conj(Phi) q entrywise.
    let zeta = u_hat.adjoint() * &phi;
    let mut v_rec = CMatrix::zeros(db, db);
    for col in 0..db {
        let z = zeta[col];
        let mag = z.norm();
        if mag < 1e-8 {
            return Err(Error::InconsistentOutcomes(
                "phase link vanished; outcomes inconsistent".into(),
            ));
        }
        let phase = z / C64::new(mag, 0.0);
        for row in 0..db {
            v_rec[(row, col)] = u_hat[(row, col)] * phase;
        }
    }
    // Back to the computational basis.
    Ok(f * v_rec * f.adjoint())
}

/// Gauss-Newton phase retrieval: find x with |<w_b, x>|^2 = y_b.
fn phase_retrieve(frame: &[CVector], y: &[f64], seed: u64) -> Result<CVector> {
    let n = frame[0].len();
    let m = frame.len();
    let mut best: Option<(f64, CVector)> = None;
    for start in 0..40u64 {
        let mut rng = rng_from_seed(derive_seed(seed, start));
        let mut x = CVector::from_fn(n, |_, _| complex_normal(&mut rng));
        let mut lambda = 1e-3;
        for _ in 0..120 {
            // Residuals and Jacobian over the 2n real coordinates of x.
            let mut jac = DMatrix::<f64>::zeros(m, 2 * n);
            let mut res = nalgebra::DVector::<f64>::zeros(m);
            for (b, w) in frame.iter().enumerate() {
                let inner: C64 = w.dotc(&x);
                res[b] = inner.norm_sqr() - y[b];
                // d|<w,x>|^2 over the re/im parts of each coordinate of x.
                for i in 0..n {
                    let g = inner.conj() * w[i].conj();
                    jac[(b, 2 * i)] = 2.0 * g.re;
                    jac[(b, 2 * i + 1)] = -2.0 * g.im;
                }
            }
            let sq: f64 = res.iter().map(|v| v * v).sum();
            if sq < 1e-24 {
                break;
            }
            let jt = jac.transpose();
            let mut h = &jt * &jac;
            for i in 0..2 * n {
                h[(i, i)] += lambda;
            }
            let rhs = &jt * &res;
            let Some(delta) = h.lu().solve(&rhs) else {
                break;
            };
            let mut trial = x.clone();
            for i in 0..n {
                trial[i] -= C64::new(delta[2 * i], delta[2 * i + 1]);
            }
            // Accept on improvement, otherwise damp harder.
            let sq_trial: f64 = frame
                .iter()
                .zip(y)
                .map(|(w, &yb)| {
                    let inner: C64 = w.dotc(&trial);
                    (inner.norm_sqr() - yb).powi(2)
                })
                .sum();
            if sq_trial < sq {
                x = trial;
                lambda = (lambda * 0.3).max(1e-12);
            } else {
                lambda = (lambda * 10.0).min(1e6);
            }
        }
        let sq: f64 = frame
            .iter()
            .zip(y)
            .map(|(w, &yb)| {
                let inner: C64 = w.dotc(&x);
                (inner.norm_sqr() - yb).powi(2)
            })
            .sum();
        if best.as_ref().map(|(b, _)| sq < *b).unwrap_or(true) {
            best = Some((sq, x));
        }
        if best.as_ref().map(|(b, _)| *b < 1e-20).unwrap_or(false) {
            break;
        }
    }
    let (sq, x) = best.expect("at least one start");
    if sq > 1e-12 {
        return Err(Error::InconsistentOutcomes(format!(
            "phase retrieval residual {sq:.3e} too large"
        )));
    }
    Ok(x)
}

/// The quadratic-form orbit measurement: entries of the framed unitary and
/// the anti-diagonal quadratic forms built from them.
#[derive(Debug, Clone)]
pub struct Up2Measurement {
    spec: BobOrbitSpec,
    /// Number of quadratic forms `G_1..G_K`, `K = dB r + dB - 1`.
    k_max: usize,
}

impl Up2Measurement {
    pub fn spec(&self) -> &BobOrbitSpec {
        &self.spec
    }

    pub fn form_count(&self) -> usize {
        self.k_max
    }

    /// Real outcome length: `2 dB r + 2 dB - 3`.
    pub fn outcome_len(&self) -> usize {
        2 * self.k_max - 1
    }

    pub fn m_len(&self) -> usize {
        self.spec.db() * self.spec.rank()
    }
}

/// Builds the quadratic-form measurement for an orbit. The internal map
/// normalizes all Schmidt coefficients to one, which reparametrizes but
/// does not change the orbit.
pub fn bob_up2_build(spec: &BobOrbitSpec) -> Up2Measurement {
    let k_max = spec.db() * spec.rank() + spec.db() - 1;
    Up2Measurement {
        spec: spec.clone(),
        k_max,
    }
}

/// The entry vector `M`: `M_{dB (i-1) + j} = <e_i| P U |f_j>` with unit
/// coefficients, i.e. the first `r` rows of the B-side unitary written in
/// the Schmidt bases.
pub fn bob_up2_entries(meas: &Up2Measurement, u: &CMatrix) -> Result<Vec<C64>> {
    let spec = &meas.spec;
    if u.nrows() != spec.db() || u.ncols() != spec.db() {
        return Err(Error::DimensionMismatch {
            expected: spec.db(),
            got: u.nrows(),
        });
    }
    let u_s = spec.to_right_basis(u);
    let (db, r) = (spec.db(), spec.rank());
    let mut m = Vec::with_capacity(db * r);
    for i in 0..r {
        for j in 0..db {
            m.push(u_s[(i, j)]);
        }
    }
    Ok(m)
}

/// The complex quadratic forms `G_k = sum_{i <= k+1-i} M_i M*_{k+1-i}`.
pub fn bob_up2_forms(meas: &Up2Measurement, m: &[C64]) -> Vec<C64> {
    let len = m.len();
    let get = |idx: usize| -> C64 {
        // 1-based index with zero padding beyond the entry vector.
        if idx >= 1 && idx <= len {
            m[idx - 1]
        } else {
            C64::new(0.0, 0.0)
        }
    };
    (1..=meas.k_max)
        .map(|k| {
            let mut acc = C64::new(0.0, 0.0);
            let mut i = 1;
            while i <= k + 1 - i {
                acc += get(i) * get(k + 1 - i).conj();
                i += 1;
            }
            acc
        })
        .collect()
}

/// Real outcome vector: `Re G_1` followed by `(Re G_k, Im G_k)` for
/// `k >= 2`. `Im G_1` is identically zero and dropped; for rank-one orbits
/// the trailing `Im G_{2 dB - 1}` is also identically zero but retained so
/// the outcome length is `2 dB r + 2 dB - 3` for every rank.
pub fn bob_up2_values(meas: &Up2Measurement, u: &CMatrix) -> Result<Vec<f64>> {
    let m = bob_up2_entries(meas, u)?;
    let g = bob_up2_forms(meas, &m);
    let mut out = Vec::with_capacity(meas.outcome_len());
    out.push(g[0].re);
    for gk in g.iter().skip(1) {
        out.push(gk.re);
        out.push(gk.im);
    }
    Ok(out)
}

/// Reassembles the complex forms from the real outcome layout.
pub fn bob_up2_forms_from_values(meas: &Up2Measurement, values: &[f64]) -> Result<Vec<C64>> {
    if values.len() != meas.outcome_len() {
        return Err(Error::DimensionMismatch {
            expected: meas.outcome_len(),
            got: values.len(),
        });
    }
    let mut g = Vec::with_capacity(meas.k_max);
    g.push(C64::new(values[0], 0.0));
    for k in 1..meas.k_max {
        g.push(C64::new(values[2 * k - 1], values[2 * k]));
    }
    Ok(g)
}

/// The operator system measuring the quadratic forms on the bipartite
/// space: Hermitian and anti-Hermitian parts of the form operators.
pub fn bob_up2_system(meas: &Up2Measurement) -> Result<OperatorSystem> {
    let spec = &meas.spec;
    let (da, db, r) = (spec.da(), spec.db(), spec.rank());
    let lams = spec.coefficients();
    let e = &spec.schmidt().left;
    let f = &spec.schmidt().right;
    let ambient = da * db;
    let mut generators = Vec::new();
    for k in 1..=meas.k_max {
        let mut form = CMatrix::zeros(ambient, ambient);
        let mut i = 1usize;
        let mut nonzero = false;
        while i <= k + 1 - i {
            let p = i;
            let q = k + 1 - i;
            i += 1;
            if p > db * r || q > db * r {
                continue;
            }
            let (a, c) = ((p - 1) / db, (p - 1) % db);
            let (b, d) = ((q - 1) / db, (q - 1) % db);
            nonzero = true;
            let ea = e.column(a);
            let eb = e.column(b);
            let fc = f.column(c);
            let fd = f.column(d);
            let x = ea * eb.adjoint();
            let y = fc * fd.adjoint();
            form += x.kronecker(&y) * C64::new(1.0 / (lams[a] * lams[b]), 0.0);
        }
        if !nonzero {
            continue;
        }
        generators.push(HermitianOperator::hermitian_part(&form));
        generators.push(HermitianOperator::antihermitian_part(&form));
    }
    OperatorSystem::from_span(ambient, &generators)
}

/// Recovers the entry vector from exact outcomes, up to a global phase.
///
/// The leading nonvanishing square `G_{2m-1} = |M_m|^2` fixes the gauge
/// (`M_m` real positive); the remaining entries follow from the recursion
/// `M*_{l+1} = (G_{m+l} - sum_{i=m+1, i<=m+l+1-i} M_i M*_{m+l+1-i}) / M_m`.
pub fn bob_up2_reconstruct(meas: &Up2Measurement, values: &[f64]) -> Result<Vec<C64>> {
    let g = bob_up2_forms_from_values(meas, values)?;
    let scale = g.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
    if scale <= 0.0 {
        return Err(Error::InconsistentOutcomes("all forms vanish".into()));
    }
    let threshold = 1e-9 * scale;
    let n = meas.spec.db();
    let m_len = meas.m_len();
    // Smallest m with G_{2m-1} above threshold; the zero prefix cannot be
    // longer than dB because the framed unitary has full rank.
    let mut m0 = None;
    for m in 1..=n {
        let idx = 2 * m - 1;
        if idx > meas.k_max {
            break;
        }
        if g[idx - 1].norm() > threshold {
            m0 = Some(m);
            break;
        }
    }
    let Some(m0) = m0 else {
        return Err(Error::InconsistentOutcomes(
            "no nonvanishing leading square found".into(),
        ));
    };
    let mut m = vec![C64::new(0.0, 0.0); m_len];
    let lead = g[2 * m0 - 2].re.max(0.0).sqrt();
    if lead <= threshold.sqrt() * 0.1 {
        return Err(Error::InconsistentOutcomes(
            "leading entry too small to divide by".into(),
        ));
    }
    m[m0 - 1] = C64::new(lead, 0.0);
    for l in m0..m_len {
        // Solve for M_{l+1} from G_{m0 + l}.
        let gk = g[m0 + l - 1];
        let mut cross = C64::new(0.0, 0.0);
        let k = m0 + l;
        let mut i = m0 + 1;
        while i <= k + 1 - i {
            let q = k + 1 - i;
            if i <= m_len && q <= m_len {
                cross += m[i - 1] * m[q - 1].conj();
            }
            i += 1;
        }
        let m_conj = (gk - cross) / C64::new(lead, 0.0);
        m[l] = m_conj.conj();
        // The forward substitution amplifies roundoff at a rate of about
        // 1/|M_m| per step; polishing the recovered prefix against its
        // fully determined forms (G_1..G_{m0+l} touch no later entry)
        // keeps the recursion anchored at working precision.
        if (l - m0) % 4 == 3 || l == m_len - 1 {
            refine_against_forms(meas, &g, &mut m, l + 1, (m0 + l).min(meas.k_max));
        }
    }
    // Final polish on the manifold: the entry vector is the first r rows
    // of a unitary, so project back onto row orthonormality (killing the
    // off-manifold flat directions of the form system) and refine.
    for _ in 0..3 {
        project_rows_orthonormal(meas, &mut m);
        refine_against_forms(meas, &g, &mut m, m_len, meas.k_max);
    }
    Ok(m)
}

/// Polar projection of the reshaped entry vector onto row-orthonormal
/// matrices: `R <- (R R†)^{-1/2} R`.
fn project_rows_orthonormal(meas: &Up2Measurement, m: &mut [C64]) {
    let db = meas.spec.db();
    let r = meas.spec.rank();
    let mat = CMatrix::from_fn(r, db, |i, j| m[i * db + j]);
    let gram = HermitianOperator::hermitian_part(&(&mat * mat.adjoint()));
    let (vals, vecs) = gram.eigen_desc();
    if vals.iter().any(|&v| v < 1e-12) {
        return; // too degenerate to project safely
    }
    let mut inv_sqrt = CMatrix::zeros(r, r);
    for (k, &v) in vals.iter().enumerate() {
        let col = vecs.column(k);
        inv_sqrt += (col * col.adjoint()) * C64::new(1.0 / v.sqrt(), 0.0);
    }
    let fixed = inv_sqrt * mat;
    for i in 0..r {
        for j in 0..db {
            m[i * db + j] = fixed[(i, j)];
        }
    }
}

/// Levenberg-damped Gauss-Newton on the residuals `G_k(M) - G_k^target`
/// over the real coordinates of the first `active_len` entries, using the
/// first `form_count` forms.
fn refine_against_forms(
    meas: &Up2Measurement,
    target: &[C64],
    m_full: &mut [C64],
    active_len: usize,
    form_count: usize,
) {
    let len = active_len.min(m_full.len());
    let m = &mut m_full[..len];
    let residual = |mv: &[C64]| -> (Vec<f64>, f64) {
        let g = bob_up2_forms(meas, mv);
        let mut res = Vec::with_capacity(2 * form_count);
        let mut sq = 0.0;
        for (gk, tk) in g.iter().zip(target).take(form_count) {
            let d = gk - tk;
            res.push(d.re);
            res.push(d.im);
            sq += d.norm_sqr();
        }
        (res, sq)
    };
    let (_, mut sq) = residual(m);
    let mut lambda = 1e-8;
    for _ in 0..25 {
        if sq < 1e-30 {
            break;
        }
        let (res, _) = residual(m);
        let rows = res.len();
        // Jacobian of G_k = sum_{i <= k+1-i} M_i M*_{k+1-i} over the real
        // coordinates (x_t, y_t) of M_t.
        let mut jac = DMatrix::<f64>::zeros(rows, 2 * len);
        for k in 1..=form_count {
            let mut i = 1usize;
            while i <= k + 1 - i {
                let q = k + 1 - i;
                i += 1;
                if i - 1 > len || q > len {
                    continue;
                }
                let p = i - 1; // current pair is (p, q), 1-based
                let (row_re, row_im) = (2 * (k - 1), 2 * (k - 1) + 1);
                let mp = m[p - 1];
                let mq = m[q - 1];
                // d(M_p M*_q)/dM_p parts.
                jac[(row_re, 2 * (p - 1))] += mq.re;
                jac[(row_re, 2 * (p - 1) + 1)] += mq.im;
                jac[(row_im, 2 * (p - 1))] += -mq.im;
                jac[(row_im, 2 * (p - 1) + 1)] += mq.re;
                // d(M_p M*_q)/dM_q parts.
                jac[(row_re, 2 * (q - 1))] += mp.re;
                jac[(row_re, 2 * (q - 1) + 1)] += mp.im;
                jac[(row_im, 2 * (q - 1))] += mp.im;
                jac[(row_im, 2 * (q - 1) + 1)] += -mp.re;
            }
        }
        let r_vec = nalgebra::DVector::<f64>::from_vec(res);
        let jt = jac.transpose();
        let mut h = &jt * &jac;
        for d in 0..2 * len {
            h[(d, d)] += lambda;
        }
        let rhs = &jt * &r_vec;
        let Some(delta) = h.lu().solve(&rhs) else {
            break;
        };
        let mut trial: Vec<C64> = m.to_vec();
        for t in 0..len {
            trial[t] -= C64::new(delta[2 * t], delta[2 * t + 1]);
        }
        let (_, sq_trial) = residual(&trial);
        if sq_trial < sq {
            m.copy_from_slice(&trial);
            sq = sq_trial;
            lambda = (lambda * 0.25).max(1e-14);
        } else {
            lambda = (lambda * 8.0).min(1e8);
        }
    }
}

/// `min_phi |a - e^{i phi} b|` for complex vectors of equal length. The
/// optimal phase is applied explicitly; the closed form via norms loses
/// half the significant digits to cancellation near zero distance.
pub fn phase_aligned_distance(a: &[C64], b: &[C64]) -> f64 {
    let cross: C64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| x.conj() * y)
        .fold(C64::new(0.0, 0.0), |acc, z| acc + z);
    let phase = if cross.norm() > 0.0 {
        cross.conj() / C64::new(cross.norm(), 0.0)
    } else {
        C64::new(1.0, 0.0)
    };
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - phase * y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}
