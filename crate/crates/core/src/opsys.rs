//! POVMs and operator systems: interconversion, the orthogonal projection
//! onto a system's Hermitian span, the operator-norm metric between
//! systems, identity-fixing rotations and validity-preserving POVM
//! perturbations.
//!
//! An operator system is stored by its Hermitian part only (an orthonormal
//! basis with the normalized identity first); the complex span is never
//! materialized since the Hermitian part determines it.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_basis, hs_inner, random_hermitian, rng_from_seed, DensityOperator,
    HermitianOperator,
};

/// Tolerance on `sum_i P_i = 1`.
pub const EFFECT_SUM_TOL: f64 = 1e-9;
/// Smallest admissible singular value of the effect Gram matrix.
pub const EFFECT_INDEPENDENCE_TOL: f64 = 1e-9;
/// Gram-Schmidt residual cutoff (relative) when orthonormalizing spans.
pub const SPAN_CUTOFF: f64 = 1e-9;

/// A positive operator valued measure with linearly independent effects.
#[derive(Debug, Clone)]
pub struct Povm {
    dim: usize,
    effects: Vec<HermitianOperator>,
}

impl Povm {
    pub fn new(effects: Vec<HermitianOperator>) -> Result<Self> {
        let m = effects.len();
        if m == 0 {
            return Err(Error::OutOfRange("a POVM needs at least one effect".into()));
        }
        let n = effects[0].dim();
        for e in &effects {
            if e.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: e.dim(),
                });
            }
            let min = e.min_eigenvalue();
            if min < -1e-10 {
                return Err(Error::NotPositive { min_eigenvalue: min });
            }
        }
        let mut sum = HermitianOperator::zero(n);
        for e in &effects {
            sum = sum.add(e);
        }
        let deviation = sum.sub(&HermitianOperator::identity(n)).norm();
        if deviation > EFFECT_SUM_TOL {
            return Err(Error::EffectSumNotIdentity { deviation });
        }
        // Independence over the reals coincides with independence over the
        // complex numbers for Hermitian effects; test the Gram spectrum.
        let gram = DMatrix::<f64>::from_fn(m, m, |i, j| {
            hs_inner(&effects[i], &effects[j]).expect("dims equal")
        });
        let min_sv = nalgebra::SymmetricEigen::new(gram)
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b))
            .max(0.0)
            .sqrt();
        if min_sv <= EFFECT_INDEPENDENCE_TOL {
            return Err(Error::DependentEffects { min_sv });
        }
        Ok(Self { dim: n, effects })
    }

    /// The trivial POVM `{1}`.
    pub fn trivial(n: usize) -> Self {
        Self {
            dim: n,
            effects: vec![HermitianOperator::identity(n)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn effects(&self) -> &[HermitianOperator] {
        &self.effects
    }

    pub fn outcome_count(&self) -> usize {
        self.effects.len()
    }

    /// POVM dimension convention: number of effects minus one.
    pub fn dimension(&self) -> usize {
        self.effects.len() - 1
    }
}

/// Outcome vector of a measurement together with reproducibility metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub outcomes: Vec<f64>,
    pub system_id: String,
    pub seed: Option<u64>,
    pub copies: u32,
}

impl MeasurementRecord {
    /// Outcome-vector sanity for a POVM applied to a state.
    pub fn validate_probabilities(&self) -> Result<()> {
        let sum: f64 = self.outcomes.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InconsistentOutcomes(format!(
                "outcomes sum to {sum}, not 1"
            )));
        }
        if let Some(&bad) = self.outcomes.iter().find(|&&o| o < -1e-9) {
            return Err(Error::InconsistentOutcomes(format!(
                "negative outcome probability {bad}"
            )));
        }
        Ok(())
    }
}

/// Applies a POVM to a state: `outcome_i = tr(P_i rho)`.
pub fn measure(p: &Povm, rho: &DensityOperator) -> Result<MeasurementRecord> {
    if p.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: rho.dim(),
        });
    }
    let outcomes = p
        .effects()
        .iter()
        .map(|e| hs_inner(e, rho.operator()).expect("dims equal"))
        .collect();
    Ok(MeasurementRecord {
        outcomes,
        system_id: String::new(),
        seed: None,
        copies: 1,
    })
}

/// An operator system stored as an orthonormal basis of its Hermitian part,
/// with the normalized identity always first.
#[derive(Debug, Clone)]
pub struct OperatorSystem {
    n: usize,
    basis: Vec<HermitianOperator>,
}

impl OperatorSystem {
    /// Orthonormalizes `span{1} + span{ops}`. Deterministic in the input
    /// order; near-dependent directions are dropped at the span cutoff.
    pub fn from_span(n: usize, ops: &[HermitianOperator]) -> Result<Self> {
        let mut basis = vec![HermitianOperator::scaled_identity(n, 1.0 / (n as f64).sqrt())];
        for op in ops {
            if op.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: op.dim(),
                });
            }
            let scale = op.norm();
            if scale < 1e-14 {
                continue;
            }
            let mut v = op.clone();
            // Two passes of modified Gram-Schmidt for orthogonality.
            for _ in 0..2 {
                for b in &basis {
                    let c = hs_inner(b, &v).expect("dims equal");
                    v = v.sub(&b.scale(c));
                }
            }
            let res = v.norm();
            if res > SPAN_CUTOFF * scale.max(1.0) {
                basis.push(v.scale(1.0 / res));
            }
        }
        Ok(Self { n, basis })
    }

    /// Adopts an already-orthonormal identity-first basis, validating the
    /// pairwise inner products and the leading normalized identity.
    pub fn from_orthonormal_basis(n: usize, basis: Vec<HermitianOperator>) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::OutOfRange("empty operator-system basis".into()));
        }
        for b in &basis {
            if b.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: b.dim(),
                });
            }
        }
        let id = HermitianOperator::scaled_identity(n, 1.0 / (n as f64).sqrt());
        if basis[0].sub(&id).norm() > 1e-9 {
            return Err(Error::Document(
                "operator-system basis must start with the normalized identity".into(),
            ));
        }
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate().skip(i) {
                let want = if i == j { 1.0 } else { 0.0 };
                let got = hs_inner(a, b).expect("dims equal");
                if (got - want).abs() > 1e-10 {
                    return Err(Error::Document(format!(
                        "basis not orthonormal at ({i}, {j}): inner product {got}"
                    )));
                }
            }
        }
        Ok(Self { n, basis })
    }

    /// The one-dimensional system spanned by the identity.
    pub fn trivial(n: usize) -> Self {
        Self {
            n,
            basis: vec![HermitianOperator::scaled_identity(n, 1.0 / (n as f64).sqrt())],
        }
    }

    /// The full system `H(C^n)`.
    pub fn full(n: usize) -> Self {
        Self {
            n,
            basis: hermitian_basis(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Real dimension of the Hermitian part.
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[HermitianOperator] {
        &self.basis
    }

    /// Coordinates of `a` on the orthonormal basis.
    pub fn coords(&self, a: &HermitianOperator) -> Result<Vec<f64>> {
        self.basis.iter().map(|b| hs_inner(b, a)).collect()
    }

    /// Norm of the orthogonal projection of `a` onto the system.
    pub fn projection_norm(&self, a: &HermitianOperator) -> Result<f64> {
        Ok(self.coords(a)?.iter().map(|c| c * c).sum::<f64>().sqrt())
    }

    /// Orthogonal projection onto the Hermitian part of the system.
    pub fn project(&self, a: &HermitianOperator) -> Result<HermitianOperator> {
        if a.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: a.dim(),
            });
        }
        let mut out = HermitianOperator::zero(self.n);
        for b in &self.basis {
            let c = hs_inner(b, a).expect("dims equal");
            out = out.add(&b.scale(c));
        }
        Ok(out)
    }

    /// The projector represented on the orthonormal basis of `H(C^n)`:
    /// an `n^2 x n^2` real symmetric matrix.
    pub fn projector_matrix(&self) -> DMatrix<f64> {
        let global = hermitian_basis(self.n);
        let d = global.len();
        let k = self.basis.len();
        let mut c = DMatrix::<f64>::zeros(d, k);
        for (j, b) in self.basis.iter().enumerate() {
            for (i, g) in global.iter().enumerate() {
                c[(i, j)] = hs_inner(g, b).expect("dims equal");
            }
        }
        &c * c.transpose()
    }
}

/// Associated operator system of a POVM: the span of the effects and the
/// identity. The effect independence invariant makes its dimension equal
/// to the number of effects.
pub fn povm_to_system(p: &Povm) -> OperatorSystem {
    OperatorSystem::from_span(p.dim(), p.effects()).expect("effects share the POVM dimension")
}

/// Generates a POVM spanning the same operator system.
///
/// With the traceless orthonormal basis `F_1..F_{d-1}` beyond the identity,
/// the effects are `P_i = 1/d + c (F_i - s)` for `i < d` and
/// `P_d = 1/d - c s`, where `s = (1/d) sum_j F_j` and `c` is half the
/// largest value keeping every eigenvalue nonnegative.
pub fn system_to_povm(sigma: &OperatorSystem) -> Result<Povm> {
    let n = sigma.n();
    let d = sigma.dimension();
    if d == 1 {
        return Ok(Povm::trivial(n));
    }
    let f = &sigma.basis()[1..];
    let mut s = HermitianOperator::zero(n);
    for fi in f {
        s = s.add(fi);
    }
    s = s.scale(1.0 / d as f64);
    let mut directions: Vec<HermitianOperator> = f.iter().map(|fi| fi.sub(&s)).collect();
    directions.push(s.scale(-1.0));

    let mut c_max = f64::INFINITY;
    for dir in &directions {
        let min = dir.min_eigenvalue();
        if min < -1e-14 {
            c_max = c_max.min((1.0 / d as f64) / (-min));
        }
    }
    let c = 0.5 * c_max;
    let base = HermitianOperator::scaled_identity(n, 1.0 / d as f64);
    let effects: Vec<HermitianOperator> = directions
        .iter()
        .map(|dir| base.add(&dir.scale(c)))
        .collect();
    Povm::new(effects)
}

/// Operator-norm distance between the projectors of two systems,
/// `max |eigenvalue|` of the represented difference.
pub fn system_distance(sigma: &OperatorSystem, tau: &OperatorSystem) -> Result<f64> {
    if sigma.n() != tau.n() {
        return Err(Error::DimensionMismatch {
            expected: sigma.n(),
            got: tau.n(),
        });
    }
    let diff = sigma.projector_matrix() - tau.projector_matrix();
    let eig = nalgebra::SymmetricEigen::new(diff);
    Ok(eig.eigenvalues.iter().fold(0.0_f64, |a, &b| a.max(b.abs())))
}

/// Spectral norm of `1 - O` for a square real matrix `O`.
pub fn deviation_from_identity(o: &DMatrix<f64>) -> f64 {
    let n = o.nrows();
    let d = DMatrix::<f64>::identity(n, n) - o;
    d.svd(false, false)
        .singular_values
        .iter()
        .fold(0.0_f64, |a, &b| a.max(b))
}

/// Random antisymmetric generator on `H(C^n)` (identity-first coordinates)
/// that annihilates the identity direction, normalized to unit spectral norm.
pub fn random_identity_fixing_generator(n: usize, seed: u64) -> DMatrix<f64> {
    let d = n * n;
    let mut rng = rng_from_seed(seed);
    let mut g = DMatrix::<f64>::zeros(d, d);
    for i in 1..d {
        for j in (i + 1)..d {
            let x = crate::linalg::standard_normal(&mut rng);
            g[(i, j)] = x;
            g[(j, i)] = -x;
        }
    }
    let top = g
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0_f64, |a, &b| a.max(b));
    if top > 0.0 {
        g /= top;
    }
    g
}

/// Scales an antisymmetric generator so that `|1 - exp(g)|_op = delta`
/// (clamped to the reachable range).
pub fn scale_generator_to_deviation(g: &DMatrix<f64>, delta: f64) -> DMatrix<f64> {
    let top = g
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0_f64, |a, &b| a.max(b));
    if top <= 0.0 {
        return g.clone();
    }
    // For antisymmetric g, |1 - exp(g)|_op = 2 sin(theta_max / 2).
    let theta = 2.0 * (delta.clamp(0.0, 2.0) / 2.0).asin();
    g * (theta / top)
}

/// Rotates an operator system by `exp(t G)` acting on the identity-first
/// coordinates of `H(C^n)`. The generator must annihilate the identity
/// direction so the image is again an operator system.
pub fn rotate_system(
    sigma: &OperatorSystem,
    generator: &DMatrix<f64>,
    t: f64,
) -> Result<OperatorSystem> {
    let n = sigma.n();
    let d = n * n;
    if generator.nrows() != d || generator.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: generator.nrows(),
        });
    }
    let scale = generator
        .iter()
        .map(|x| x.abs())
        .fold(0.0_f64, f64::max)
        .max(1.0);
    let fixed = generator
        .column(0)
        .iter()
        .chain(generator.row(0).iter())
        .map(|x| x.abs())
        .fold(0.0_f64, f64::max);
    if fixed > 1e-10 * scale {
        return Err(Error::GeneratorMovesIdentity { norm: fixed / scale });
    }
    let o = (generator * t).exp();
    let global = hermitian_basis(n);
    let rotated: Vec<HermitianOperator> = sigma
        .basis()
        .iter()
        .skip(1) // identity stays fixed
        .map(|b| {
            let coords: Vec<f64> = global
                .iter()
                .map(|g| hs_inner(g, b).expect("dims equal"))
                .collect();
            let v = nalgebra::DVector::<f64>::from_vec(coords);
            let w = &o * v;
            let mut m = HermitianOperator::zero(n);
            for (i, g) in global.iter().enumerate() {
                m = m.add(&g.scale(w[i]));
            }
            m
        })
        .collect();
    OperatorSystem::from_span(n, &rotated)
}

/// Mixes every effect toward the identity direction, keeping the sum equal
/// to the identity: `P~_i = sqrt(n)/(sqrt(n) + m*eta) * (P_i + eta/sqrt(n))`.
/// At `m = 1` this is the single-effect smoothing formula; the `m`-aware
/// denominator is what keeps `sum_i P~_i = 1` for every outcome count.
pub fn smooth_povm_effects(p: &Povm, eta: f64) -> Vec<HermitianOperator> {
    let n = p.dim();
    let m = p.outcome_count() as f64;
    let sqrt_n = (n as f64).sqrt();
    let scale = sqrt_n / (sqrt_n + m * eta);
    p.effects()
        .iter()
        .map(|e| {
            e.add(&HermitianOperator::scaled_identity(n, eta / sqrt_n))
                .scale(scale)
        })
        .collect()
}

/// Smooths a POVM toward the maximally mixed direction and adds a seeded
/// sum-zero random deviation, keeping the result a valid POVM and the
/// induced-map deviation below `epsilon`.
pub fn perturb_povm(p: &Povm, epsilon: f64, seed: u64) -> Result<Povm> {
    if epsilon < 0.0 {
        return Err(Error::OutOfRange(
            "perturbation size must be nonnegative".into(),
        ));
    }
    if epsilon == 0.0 {
        return Ok(p.clone());
    }
    let n = p.dim();
    let m = p.outcome_count();
    let sqrt_m = (m as f64).sqrt();
    // Half the budget on the smoothing, half on the random direction; the
    // total induced-map deviation is at most sqrt(sum_i |P_i - Q_i|^2).
    let mut eta = (epsilon / (2.0 * sqrt_m)).min(0.5);
    let mut smoothed = smooth_povm_effects(p, eta);
    for _ in 0..60 {
        let dev: f64 = p
            .effects()
            .iter()
            .zip(&smoothed)
            .map(|(a, b)| a.sub(b).norm().powi(2))
            .sum::<f64>()
            .sqrt();
        if dev <= epsilon / 2.0 {
            break;
        }
        eta *= 0.5;
        smoothed = smooth_povm_effects(p, eta);
    }

    for attempt in 0..8u64 {
        let mut rng = rng_from_seed(crate::linalg::derive_seed(seed, attempt));
        let raw: Vec<HermitianOperator> = (0..m).map(|_| random_hermitian(n, &mut rng)).collect();
        let mut mean = HermitianOperator::zero(n);
        for g in &raw {
            mean = mean.add(g);
        }
        mean = mean.scale(1.0 / m as f64);
        let centered: Vec<HermitianOperator> = raw.iter().map(|g| g.sub(&mean)).collect();

        // Common scale so the per-effect budgets hold and the sum stays zero.
        let mut factor = f64::INFINITY;
        for (g, s) in centered.iter().zip(&smoothed) {
            let budget = (epsilon / (2.0 * sqrt_m)).min(0.5 * s.min_eigenvalue().max(0.0));
            let norm = g.norm();
            if norm > 1e-14 {
                factor = factor.min(budget / norm);
            }
        }
        if !factor.is_finite() {
            factor = 0.0;
        }
        let effects: Vec<HermitianOperator> = smoothed
            .iter()
            .zip(&centered)
            .map(|(s, g)| s.add(&g.scale(factor)))
            .collect();
        match Povm::new(effects) {
            Ok(q) => return Ok(q),
            Err(_) if attempt + 1 < 8 => continue,
            Err(_) => break,
        }
    }
    Err(Error::PositivityUnrecoverable { epsilon })
}

/// Largest deviation `|(h_P - h_Q) v|` over sampled unit-norm Hermitian `v`.
pub fn induced_map_deviation(p: &Povm, q: &Povm, samples: usize, seed: u64) -> Result<f64> {
    if p.dim() != q.dim() || p.outcome_count() != q.outcome_count() {
        return Err(Error::DimensionMismatch {
            expected: p.outcome_count(),
            got: q.outcome_count(),
        });
    }
    let n = p.dim();
    let mut worst = 0.0_f64;
    for s in 0..samples {
        let mut rng = rng_from_seed(crate::linalg::derive_seed(seed, s as u64));
        let mut v = random_hermitian(n, &mut rng);
        let norm = v.norm();
        if norm < 1e-14 {
            continue;
        }
        v = v.scale(1.0 / norm);
        let dev: f64 = p
            .effects()
            .iter()
            .zip(q.effects())
            .map(|(a, b)| {
                let d = hs_inner(a, &v).expect("dims") - hs_inner(b, &v).expect("dims");
                d * d
            })
            .sum::<f64>()
            .sqrt();
        worst = worst.max(dev);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_unit_traceless, C64, CMatrix, UnitVector};

    fn diag_povm2() -> Povm {
        let mut p0 = CMatrix::zeros(2, 2);
        p0[(0, 0)] = C64::new(1.0, 0.0);
        let mut p1 = CMatrix::zeros(2, 2);
        p1[(1, 1)] = C64::new(1.0, 0.0);
        Povm::new(vec![
            HermitianOperator::new(p0).unwrap(),
            HermitianOperator::new(p1).unwrap(),
        ])
        .unwrap()
    }

    fn random_system(n: usize, extra: usize, seed: u64) -> OperatorSystem {
        let mut rng = rng_from_seed(seed);
        let ops: Vec<HermitianOperator> = (0..extra)
            .map(|_| random_unit_traceless(n, &mut rng))
            .collect();
        OperatorSystem::from_span(n, &ops).unwrap()
    }

    #[test]
    fn measure_trivial_povm() {
        let p = Povm::trivial(3);
        let rho = DensityOperator::maximally_mixed(3);
        let rec = measure(&p, &rho).unwrap();
        assert_eq!(rec.outcomes.len(), 1);
        assert!((rec.outcomes[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn measure_diagonal_readout() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = C64::new(0.3, 0.0);
        m[(1, 1)] = C64::new(0.7, 0.0);
        let rho = DensityOperator::from_matrix(m).unwrap();
        let rec = measure(&diag_povm2(), &rho).unwrap();
        assert!((rec.outcomes[0] - 0.3).abs() < 1e-12);
        assert!((rec.outcomes[1] - 0.7).abs() < 1e-12);
        rec.validate_probabilities().unwrap();
    }

    #[test]
    fn measure_matches_naive_trace_oracle() {
        // Random POVM from a random system, random mixed state; compare
        // against an entrywise triple-loop trace.
        let sigma = random_system(3, 4, 11);
        let p = system_to_povm(&sigma).unwrap();
        let u = crate::linalg::haar_unitary(3, 5);
        let mut d = CMatrix::zeros(3, 3);
        d[(0, 0)] = C64::new(0.5, 0.0);
        d[(1, 1)] = C64::new(0.3, 0.0);
        d[(2, 2)] = C64::new(0.2, 0.0);
        let rho = DensityOperator::from_matrix(&u * d * u.adjoint()).unwrap();
        let rec = measure(&p, &rho).unwrap();
        for (e, &o) in p.effects().iter().zip(rec.outcomes.iter()) {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..3 {
                for k in 0..3 {
                    acc += e.entries()[(i, k)] * rho.entries()[(k, i)];
                }
            }
            assert!((acc.re - o).abs() < 1e-12);
            assert!(acc.im.abs() < 1e-12);
        }
    }

    #[test]
    fn povm_to_system_trivial() {
        let s = povm_to_system(&Povm::trivial(4));
        assert_eq!(s.dimension(), 1);
        let id = HermitianOperator::scaled_identity(4, 0.25);
        let p = s.project(&id).unwrap();
        assert!(p.sub(&id).norm() < 1e-12);
    }

    #[test]
    fn povm_to_system_qubit_x_span() {
        // Effects (1 ± sigma_x)/2 span {1, sigma_x}.
        let mut x = CMatrix::zeros(2, 2);
        x[(0, 1)] = C64::new(1.0, 0.0);
        x[(1, 0)] = C64::new(1.0, 0.0);
        let sx = HermitianOperator::new(x).unwrap();
        let id = HermitianOperator::identity(2);
        let p = Povm::new(vec![id.add(&sx).scale(0.5), id.sub(&sx).scale(0.5)]).unwrap();
        let s = povm_to_system(&p);
        assert_eq!(s.dimension(), 2);
        // Second basis element proportional to sigma_x.
        let c = hs_inner(&s.basis()[1], &sx).unwrap();
        assert!((c.abs() - sx.norm()).abs() < 1e-10);
        // Projecting each effect reproduces it.
        for e in p.effects() {
            assert!(s.project(e).unwrap().sub(e).norm() < 1e-10);
        }
    }

    #[test]
    fn system_to_povm_trivial_and_full() {
        let t = system_to_povm(&OperatorSystem::trivial(3)).unwrap();
        assert_eq!(t.outcome_count(), 1);

        let f = system_to_povm(&OperatorSystem::full(2)).unwrap();
        assert_eq!(f.outcome_count(), 4);
        let s = povm_to_system(&f);
        assert_eq!(s.dimension(), 4);
    }

    /// Principal-angle oracle: the sine of the largest principal angle
    /// between equal-dimension spans is the largest projection residual of
    /// one orthonormal basis on the other span. (The cosine saturates at 1
    /// in double precision, the sine does not.)
    fn max_principal_angle_sin(a: &OperatorSystem, b: &OperatorSystem) -> f64 {
        assert_eq!(a.dimension(), b.dimension());
        let mut worst = 0.0_f64;
        for basis_el in a.basis() {
            let res = basis_el.sub(&b.project(basis_el).unwrap()).norm();
            worst = worst.max(res);
        }
        for basis_el in b.basis() {
            let res = basis_el.sub(&a.project(basis_el).unwrap()).norm();
            worst = worst.max(res);
        }
        worst
    }

    #[test]
    fn system_povm_roundtrip_preserves_span() {
        for seed in 0..20 {
            let n = 2 + (seed as usize % 4); // n = 2..5
            let sigma = random_system(n, (seed as usize % (n * n - 1)) + 1, 100 + seed);
            let p = system_to_povm(&sigma).unwrap();
            assert_eq!(p.outcome_count(), sigma.dimension());
            let back = povm_to_system(&p);
            assert_eq!(back.dimension(), sigma.dimension());
            assert!(
                max_principal_angle_sin(&sigma, &back) < 1e-8,
                "span drifted at seed {seed}"
            );
        }
    }

    #[test]
    fn project_is_orthogonal_and_idempotent() {
        let sigma = random_system(3, 3, 7);
        let mut rng = rng_from_seed(3);
        for _ in 0..20 {
            let a = random_hermitian(3, &mut rng);
            let pa = sigma.project(&a).unwrap();
            let ppa = sigma.project(&pa).unwrap();
            assert!(ppa.sub(&pa).norm() < 1e-12);
            // Pythagoras
            let res = a.sub(&pa);
            let total = hs_inner(&a, &a).unwrap();
            let split = hs_inner(&pa, &pa).unwrap() + hs_inner(&res, &res).unwrap();
            assert!((total - split).abs() < 1e-10);
            // Residual orthogonal to every basis element.
            for b in sigma.basis() {
                assert!(hs_inner(&res, b).unwrap().abs() < 1e-10);
            }
            // Self-adjointness of the projection map.
            let b = random_hermitian(3, &mut rng);
            let pb = sigma.project(&b).unwrap();
            let lhs = hs_inner(&pa, &b).unwrap();
            let rhs = hs_inner(&a, &pb).unwrap();
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn distance_zero_on_equal_spans() {
        let sigma = random_system(2, 2, 5);
        assert!(system_distance(&sigma, &sigma).unwrap() < 1e-12);
    }

    #[test]
    fn distance_orthogonal_extensions_is_one() {
        // span{1, A} vs span{1, B} with A, B orthonormal traceless and
        // mutually orthogonal: the projector difference has eigenvalues ±1.
        let basis = hermitian_basis(2);
        let a = basis[1].clone();
        let b = basis[2].clone();
        let sa = OperatorSystem::from_span(2, &[a]).unwrap();
        let sb = OperatorSystem::from_span(2, &[b]).unwrap();
        let d = system_distance(&sa, &sb).unwrap();
        assert!((d - 1.0).abs() < 1e-10, "distance {d}");
    }

    #[test]
    fn distance_triangle_inequality() {
        for seed in 0..10 {
            let a = random_system(2, 2, 300 + seed);
            let b = random_system(2, 2, 400 + seed);
            let c = random_system(2, 2, 500 + seed);
            let ab = system_distance(&a, &b).unwrap();
            let bc = system_distance(&b, &c).unwrap();
            let ac = system_distance(&a, &c).unwrap();
            assert!(ac <= ab + bc + 1e-9);
        }
    }

    #[test]
    fn rotation_at_zero_is_identity() {
        let sigma = random_system(2, 2, 9);
        let g = random_identity_fixing_generator(2, 1);
        let rotated = rotate_system(&sigma, &g, 0.0).unwrap();
        assert!(system_distance(&sigma, &rotated).unwrap() < 1e-10);
    }

    #[test]
    fn rotation_distance_bounded_by_generator() {
        let sigma = random_system(2, 2, 13);
        let g = random_identity_fixing_generator(2, 2);
        for &t in &[0.05, 0.1, 0.3] {
            let rotated = rotate_system(&sigma, &g, t).unwrap();
            let o = (&g * t).exp();
            let bound = 2.0 * deviation_from_identity(&o);
            let d = system_distance(&sigma, &rotated).unwrap();
            assert!(d <= bound + 1e-9, "d = {d}, bound = {bound}");
        }
    }

    #[test]
    fn rotating_full_system_returns_full_system() {
        let sigma = OperatorSystem::full(2);
        let g = random_identity_fixing_generator(2, 3);
        let rotated = rotate_system(&sigma, &g, 0.7).unwrap();
        assert_eq!(rotated.dimension(), 4);
        assert!(system_distance(&sigma, &rotated).unwrap() < 1e-9);
    }

    #[test]
    fn rotation_rejects_generator_moving_identity() {
        let sigma = random_system(2, 2, 15);
        let mut g = random_identity_fixing_generator(2, 4);
        g[(0, 1)] = 0.5;
        g[(1, 0)] = -0.5;
        assert!(matches!(
            rotate_system(&sigma, &g, 0.1),
            Err(Error::GeneratorMovesIdentity { .. })
        ));
    }

    #[test]
    fn perturb_zero_is_identity_map() {
        let p = diag_povm2();
        let q = perturb_povm(&p, 0.0, 1).unwrap();
        for (a, b) in p.effects().iter().zip(q.effects()) {
            assert!(a.sub(b).norm() < 1e-15);
        }
    }

    #[test]
    fn perturb_deviation_within_budget() {
        let p = diag_povm2();
        for &eps in &[1e-3, 1e-2, 0.1] {
            let q = perturb_povm(&p, eps, 7).unwrap();
            let dev = induced_map_deviation(&p, &q, 100, 99).unwrap();
            assert!(dev <= eps + 1e-12, "deviation {dev} over budget {eps}");
        }
    }

    #[test]
    fn perturb_moves_the_povm() {
        let p = diag_povm2();
        let q = perturb_povm(&p, 0.05, 21).unwrap();
        let moved: f64 = p
            .effects()
            .iter()
            .zip(q.effects())
            .map(|(a, b)| a.sub(b).norm())
            .sum();
        assert!(moved > 1e-6);
    }

    #[test]
    fn smoothing_preserves_identity_sum() {
        // The eta-smoothing map keeps sum = 1 and makes effects full rank.
        let p = diag_povm2();
        let smoothed = smooth_povm_effects(&p, 0.3);
        let mut sum = HermitianOperator::zero(2);
        for e in &smoothed {
            sum = sum.add(e);
            assert!(e.min_eigenvalue() > 0.0);
        }
        assert!(sum.sub(&HermitianOperator::identity(2)).norm() < 1e-12);
    }

    #[test]
    fn pure_state_measurement_is_probability_vector() {
        let sigma = random_system(4, 7, 31);
        let p = system_to_povm(&sigma).unwrap();
        let rho = DensityOperator::pure(&UnitVector::random(4, 8));
        let rec = measure(&p, &rho).unwrap();
        rec.validate_probabilities().unwrap();
    }
}
