//! Sampling-based verification probes: completeness (injectivity of the
//! projection on sampled state pairs), immersion (tangent-frame singular
//! values), stability under identity-fixing rotations, separation-constant
//! estimates across noise scales, and noise-ball containment.
//!
//! Probes never claim proof; every report carries its sample counts and
//! seeds, and reported minima are over the declared sample sets only.
//! Per-sample seeds are derived by counter, so minima are monotone when
//! samples are appended under an extended count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    derive_seed, haar_unitary, hs_inner, rng_from_seed, unitary_from_hermitian,
    DensityOperator, HermitianOperator,
};
use crate::manifolds::{
    bob_state, bob_tangent_basis, sample_fixed_spectrum, sample_invariant_state,
    tangent_basis_fixed_spectrum, BobOrbitSpec, Spectrum,
};
use crate::opsys::{
    measure, random_identity_fixing_generator, rotate_system, scale_generator_to_deviation,
    OperatorSystem, Povm,
};

/// Default pass threshold on injectivity separation ratios.
pub const INJECTIVITY_THRESHOLD: f64 = 1e-7;
/// Default pass threshold on tangent singular values.
pub const IMMERSION_THRESHOLD: f64 = 1e-6;

/// A sampled state manifold with optional tangent data.
pub trait ManifoldSampler: Sync {
    /// Ambient Hilbert-space dimension.
    fn ambient_dim(&self) -> usize;
    /// One manifold point, deterministic per seed.
    fn state(&self, seed: u64) -> DensityOperator;
    /// A pair of nearby points: the second is re-sampled with a small
    /// parameter offset of the given scale.
    fn local_pair(&self, seed: u64, scale: f64) -> (DensityOperator, DensityOperator);
    /// Point with an orthonormal tangent frame, when the family provides one.
    fn tangent_frame(&self, seed: u64) -> Option<(DensityOperator, Vec<HermitianOperator>)>;
}

/// Fixed-spectrum unitary orbit.
pub struct FixedSpectrumManifold {
    pub spectrum: Spectrum,
}

impl ManifoldSampler for FixedSpectrumManifold {
    fn ambient_dim(&self) -> usize {
        self.spectrum.n()
    }

    fn state(&self, seed: u64) -> DensityOperator {
        sample_fixed_spectrum(&self.spectrum, seed)
    }

    fn local_pair(&self, seed: u64, scale: f64) -> (DensityOperator, DensityOperator) {
        let n = self.spectrum.n();
        let u = haar_unitary(n, derive_seed(seed, 1));
        let mut rng = rng_from_seed(derive_seed(seed, 2));
        let h = crate::linalg::random_unit_traceless(n, &mut rng);
        let v = &u * unitary_from_hermitian(&h, scale);
        let d = self.spectrum.diag_matrix();
        let a = DensityOperator::from_matrix(&u * &d * u.adjoint()).expect("orbit point");
        let b = DensityOperator::from_matrix(&v * &d * v.adjoint()).expect("orbit point");
        (a, b)
    }

    fn tangent_frame(&self, seed: u64) -> Option<(DensityOperator, Vec<HermitianOperator>)> {
        let rho = self.state(seed);
        let frame = tangent_basis_fixed_spectrum(&rho, &self.spectrum).ok()?;
        Some((rho, frame))
    }
}

/// Bob-unitary orbit of a bipartite pure state.
pub struct BobOrbitManifold {
    pub spec: BobOrbitSpec,
}

impl ManifoldSampler for BobOrbitManifold {
    fn ambient_dim(&self) -> usize {
        self.spec.da() * self.spec.db()
    }

    fn state(&self, seed: u64) -> DensityOperator {
        let u = haar_unitary(self.spec.db(), seed);
        bob_state(&self.spec, &u).expect("matching dimension")
    }

    fn local_pair(&self, seed: u64, scale: f64) -> (DensityOperator, DensityOperator) {
        let db = self.spec.db();
        let u = haar_unitary(db, derive_seed(seed, 1));
        let mut rng = rng_from_seed(derive_seed(seed, 2));
        let h = crate::linalg::random_unit_traceless(db, &mut rng);
        let v = &u * unitary_from_hermitian(&h, scale);
        (
            bob_state(&self.spec, &u).expect("matching dimension"),
            bob_state(&self.spec, &v).expect("matching dimension"),
        )
    }

    fn tangent_frame(&self, seed: u64) -> Option<(DensityOperator, Vec<HermitianOperator>)> {
        let u = haar_unitary(self.spec.db(), seed);
        let rho = bob_state(&self.spec, &u).ok()?;
        let frame = bob_tangent_basis(&self.spec, &u).ok()?;
        Some((rho, frame))
    }
}

/// States invariant under a symmetry group, spanned by a commutant basis.
pub struct InvariantManifold {
    pub commutant_basis: Vec<HermitianOperator>,
}

impl ManifoldSampler for InvariantManifold {
    fn ambient_dim(&self) -> usize {
        self.commutant_basis[0].dim()
    }

    fn state(&self, seed: u64) -> DensityOperator {
        sample_invariant_state(&self.commutant_basis, seed)
    }

    fn local_pair(&self, seed: u64, scale: f64) -> (DensityOperator, DensityOperator) {
        let a = self.state(derive_seed(seed, 1));
        let n = self.ambient_dim();
        let mut rng = rng_from_seed(derive_seed(seed, 2));
        // Perturb inside the commutant span, then renormalize the trace.
        let mut d = HermitianOperator::zero(n);
        for b in &self.commutant_basis {
            d = d.add(&b.scale(scale * crate::linalg::standard_normal(&mut rng)));
        }
        let shifted = a.operator().add(&d);
        let min = shifted.min_eigenvalue();
        let fixed = if min < 1e-12 {
            shifted.add(&HermitianOperator::scaled_identity(n, -min + 1e-9))
        } else {
            shifted
        };
        let b = DensityOperator::new(fixed.scale(1.0 / fixed.trace())).expect("in the simplex");
        (a, b)
    }

    fn tangent_frame(&self, _seed: u64) -> Option<(DensityOperator, Vec<HermitianOperator>)> {
        None
    }
}

/// Report of one verification probe. Serializable; minima are over the
/// declared sample sets; deterministic per seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub pass: bool,
    pub samples: usize,
    pub threshold: f64,
    pub min_separation_ratio: Option<f64>,
    pub min_tangent_singular_value: Option<f64>,
    /// `l = max over points of |pi_sigma ∘ pi_T - pi_T|_op`, the tangent
    /// steepness statistic.
    pub steepness: Option<f64>,
    /// Per-epsilon separation-constant estimates `(epsilon, C_est)`.
    pub c_estimates: Option<Vec<(f64, f64)>>,
    pub violations: Option<usize>,
    pub seed: u64,
    pub notes: String,
}

impl VerificationReport {
    fn new(check: &str, samples: usize, threshold: f64, seed: u64) -> Self {
        Self {
            check: check.to_string(),
            pass: false,
            samples,
            threshold,
            min_separation_ratio: None,
            min_tangent_singular_value: None,
            steepness: None,
            c_estimates: None,
            violations: None,
            seed,
            notes: "sampling evidence only, not a proof".to_string(),
        }
    }

    /// Plain-text summary for terminal use.
    pub fn summary(&self) -> String {
        let mut parts = vec![format!(
            "[{}] {} over {} samples (seed {})",
            if self.pass { "pass" } else { "FAIL" },
            self.check,
            self.samples,
            self.seed
        )];
        if let Some(v) = self.min_separation_ratio {
            parts.push(format!("min separation ratio {v:.3e} (threshold {:.1e})", self.threshold));
        }
        if let Some(v) = self.min_tangent_singular_value {
            parts.push(format!("min tangent singular value {v:.3e}"));
        }
        if let Some(v) = self.steepness {
            parts.push(format!("steepness {v:.3e}"));
        }
        if let Some(cs) = &self.c_estimates {
            let s: Vec<String> = cs.iter().map(|(e, c)| format!("C({e:.2e})={c:.3}")).collect();
            parts.push(s.join(" "));
        }
        if let Some(v) = self.violations {
            parts.push(format!("{v} violations"));
        }
        parts.join("; ")
    }
}

/// Ratio data for one sampled pair.
fn pair_ratio(
    sigma: &OperatorSystem,
    sampler: &dyn ManifoldSampler,
    index: u64,
    seed: u64,
) -> Option<(f64, f64)> {
    let (a, b) = if index % 2 == 0 {
        (
            sampler.state(derive_seed(seed, 2 * index)),
            sampler.state(derive_seed(seed, 2 * index + 1)),
        )
    } else {
        // Local pair; the offset scale sweeps decades per sample.
        let scale = 10f64.powf(-1.0 - 3.0 * ((index % 97) as f64 / 96.0));
        sampler.local_pair(derive_seed(seed, 2 * index), scale)
    };
    let diff = a.operator().sub(b.operator());
    let dist = diff.norm();
    if dist < 1e-8 {
        return None;
    }
    let proj = sigma.projection_norm(&diff).expect("dims equal");
    Some((dist, proj / dist))
}

/// Completeness probe: minimum over sampled pairs (half global, half
/// local) of `|pi_sigma(rho - rho')| / |rho - rho'|`.
pub fn check_injectivity(
    sigma: &OperatorSystem,
    sampler: &dyn ManifoldSampler,
    pairs: usize,
    seed: u64,
    threshold: f64,
) -> Result<VerificationReport> {
    let results: Vec<Option<(f64, f64)>> = (0..pairs as u64)
        .into_par_iter()
        .map(|i| pair_ratio(sigma, sampler, i, seed))
        .collect();
    let mut min_ratio = f64::INFINITY;
    let mut used = 0usize;
    for r in results.into_iter().flatten() {
        used += 1;
        min_ratio = min_ratio.min(r.1);
    }
    if used == 0 {
        return Err(Error::DegenerateSampler);
    }
    let mut report = VerificationReport::new("injectivity", used, threshold, seed);
    report.min_separation_ratio = Some(min_ratio);
    report.pass = min_ratio > threshold;
    Ok(report)
}

/// Per-point immersion data: smallest singular value of the projection
/// restricted to an orthonormal tangent frame, and the point steepness.
/// The two satisfy `s^2 + l^2 = 1` exactly in the frame's Gram geometry.
pub fn immersion_at_point(
    sigma: &OperatorSystem,
    frame: &[HermitianOperator],
) -> Result<(f64, f64)> {
    let m = frame.len();
    if m == 0 {
        return Err(Error::OutOfRange("empty tangent frame".into()));
    }
    let coords: Vec<Vec<f64>> = frame
        .iter()
        .map(|t| sigma.coords(t))
        .collect::<Result<_>>()?;
    let gram = nalgebra::DMatrix::<f64>::from_fn(m, m, |i, j| {
        coords[i].iter().zip(&coords[j]).map(|(a, b)| a * b).sum()
    });
    let eig = nalgebra::SymmetricEigen::new(gram);
    let min = eig
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, &b| a.min(b))
        .max(0.0);
    let s = min.sqrt();
    let l = (1.0 - min).max(0.0).sqrt();
    Ok((s, l))
}

/// Immersion probe: minimum tangent singular value and maximum steepness
/// over sampled points with tangent frames.
pub fn check_immersion(
    sigma: &OperatorSystem,
    sampler: &dyn ManifoldSampler,
    points: usize,
    seed: u64,
    threshold: f64,
) -> Result<VerificationReport> {
    let data: Vec<Option<(f64, f64)>> = (0..points as u64)
        .into_par_iter()
        .map(|i| {
            let (_, frame) = sampler.tangent_frame(derive_seed(seed, i))?;
            immersion_at_point(sigma, &frame).ok()
        })
        .collect();
    let mut min_s = f64::INFINITY;
    let mut max_l = 0.0_f64;
    let mut used = 0usize;
    for d in data.into_iter().flatten() {
        used += 1;
        min_s = min_s.min(d.0);
        max_l = max_l.max(d.1);
    }
    if used == 0 {
        return Err(Error::OutOfRange(
            "sampler provides no tangent frames".into(),
        ));
    }
    let mut report = VerificationReport::new("immersion", used, threshold, seed);
    report.min_tangent_singular_value = Some(min_s);
    report.steepness = Some(max_l);
    report.pass = min_s > threshold;
    Ok(report)
}

/// Stability probe: re-run the injectivity check on randomly rotated
/// copies of the system, rotations drawn in the identity-fixing orthogonal
/// group with `|1 - O|_op <= delta`. Reports the worst ratio seen.
pub fn stability_probe(
    sigma: &OperatorSystem,
    sampler: &dyn ManifoldSampler,
    delta: f64,
    trials: usize,
    pairs_per_trial: usize,
    seed: u64,
    threshold: f64,
) -> Result<VerificationReport> {
    if delta <= 0.0 {
        return Err(Error::OutOfRange("rotation magnitude must be positive".into()));
    }
    let n = sigma.n();
    let mut worst = f64::INFINITY;
    for t in 0..trials as u64 {
        let g = random_identity_fixing_generator(n, derive_seed(seed, 10_000 + t));
        let mut rng = rng_from_seed(derive_seed(seed, 20_000 + t));
        let magnitude: f64 = delta * rand::Rng::gen::<f64>(&mut rng).max(1e-3);
        let g = scale_generator_to_deviation(&g, magnitude);
        let rotated = rotate_system(sigma, &g, 1.0)?;
        let sub = check_injectivity(
            &rotated,
            sampler,
            pairs_per_trial,
            derive_seed(seed, 30_000 + t),
            threshold,
        )?;
        worst = worst.min(sub.min_separation_ratio.unwrap_or(f64::INFINITY));
    }
    let mut report = VerificationReport::new("stability", trials, threshold, seed);
    report.min_separation_ratio = Some(worst);
    report.pass = worst > threshold;
    Ok(report)
}

/// Separation-constant probe: per epsilon,
/// `C_est(eps) = 2 max dist/|pi(diff)|` over a pair pool probing that noise
/// scale. The pool mixes global pairs (restricted to the ball-scale cutoff
/// `ball_scale_factor * eps`) with local pairs re-offset at parameter scale
/// `eps` from base points and directions shared across the whole list, so
/// the per-epsilon estimates form a genuine trend: flat for an embedding,
/// growing without bound toward small epsilon when the projection fails to
/// be an immersion.
pub fn separation_probe(
    sigma: &OperatorSystem,
    sampler: &dyn ManifoldSampler,
    eps_list: &[f64],
    pairs: usize,
    seed: u64,
    ball_scale_factor: f64,
) -> Result<VerificationReport> {
    if eps_list.is_empty() || eps_list.iter().any(|&e| e <= 0.0) {
        return Err(Error::OutOfRange("epsilon list must be positive".into()));
    }
    let half = (pairs / 2).max(1) as u64;
    // Global pool, shared across epsilons (with the per-epsilon cutoff).
    let global: Vec<Option<(f64, f64)>> = (0..half)
        .into_par_iter()
        .map(|i| {
            let a = sampler.state(derive_seed(seed, 2 * i));
            let b = sampler.state(derive_seed(seed, 2 * i + 1));
            let diff = a.operator().sub(b.operator());
            let dist = diff.norm();
            if dist < 1e-10 {
                return None;
            }
            let proj = sigma.projection_norm(&diff).expect("dims equal");
            Some((dist, proj))
        })
        .collect();
    let global: Vec<(f64, f64)> = global.into_iter().flatten().collect();
    // Local pairs: the same base seeds re-offset at each scale.
    let per_eps: Vec<Vec<(f64, f64)>> = eps_list
        .par_iter()
        .map(|&eps| {
            (0..half)
                .filter_map(|j| {
                    let (a, b) = sampler.local_pair(derive_seed(seed, 100_000 + j), eps);
                    let diff = a.operator().sub(b.operator());
                    let dist = diff.norm();
                    if dist < 1e-13 {
                        return None;
                    }
                    let proj = sigma.projection_norm(&diff).expect("dims equal");
                    Some((dist, proj))
                })
                .collect()
        })
        .collect();
    let mut estimates = Vec::with_capacity(eps_list.len());
    let mut used = global.len();
    for (&eps, locals) in eps_list.iter().zip(&per_eps) {
        used += locals.len();
        let mut worst = 0.0_f64;
        let mut seen = false;
        for &(dist, proj) in locals.iter() {
            if proj > 0.0 {
                worst = worst.max(dist / proj);
                seen = true;
            }
        }
        for &(dist, proj) in &global {
            if dist <= ball_scale_factor * eps && proj > 0.0 {
                worst = worst.max(dist / proj);
                seen = true;
            }
        }
        let c = if seen { 2.0 * worst } else { f64::NAN };
        estimates.push((eps, c));
    }
    if used == 0 {
        return Err(Error::DegenerateSampler);
    }
    let mut report = VerificationReport::new("separation", used, 0.0, seed);
    report.pass = estimates.iter().all(|(_, c)| c.is_finite());
    report.c_estimates = Some(estimates);
    Ok(report)
}

/// Noise-ball containment: sampled pairs whose outcome vectors are within
/// `2 epsilon` must be within `C epsilon` in state distance.
pub fn noise_ball_check(
    p: &Povm,
    sampler: &dyn ManifoldSampler,
    epsilon: f64,
    c: f64,
    trials: usize,
    seed: u64,
) -> Result<VerificationReport> {
    if epsilon <= 0.0 || c <= 0.0 {
        return Err(Error::OutOfRange("epsilon and C must be positive".into()));
    }
    let mut violations = 0usize;
    let mut premise_hits = 0usize;
    for t in 0..trials as u64 {
        let (a, b) = if t % 2 == 0 {
            (
                sampler.state(derive_seed(seed, 2 * t)),
                sampler.state(derive_seed(seed, 2 * t + 1)),
            )
        } else {
            sampler.local_pair(derive_seed(seed, 2 * t), epsilon)
        };
        let ha = measure(p, &a)?;
        let hb = measure(p, &b)?;
        let hdist: f64 = ha
            .outcomes
            .iter()
            .zip(&hb.outcomes)
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt();
        if hdist < 2.0 * epsilon {
            premise_hits += 1;
            let dist = a.operator().sub(b.operator()).norm();
            if dist > c * epsilon {
                violations += 1;
            }
        }
    }
    let mut report = VerificationReport::new("noise_ball", trials, 0.0, seed);
    report.violations = Some(violations);
    report.pass = violations == 0;
    if premise_hits == 0 {
        report.notes = "vacuous: no sampled pair met the outcome-closeness premise".into();
    }
    Ok(report)
}

/// Identity-fixing rotation generator moving the direction of `from`
/// toward the direction of `to` (both traceless) by their principal angle.
/// Rotating a system with it steers the projection kernel onto a chosen
/// difference direction; used by the adversarial stability tests.
pub fn rotation_aligning(
    n: usize,
    from: &HermitianOperator,
    to: &HermitianOperator,
) -> Result<nalgebra::DMatrix<f64>> {
    let basis = crate::linalg::hermitian_basis(n);
    let d = basis.len();
    let coords = |op: &HermitianOperator| -> Result<nalgebra::DVector<f64>> {
        let mut v = nalgebra::DVector::<f64>::zeros(d);
        for (i, b) in basis.iter().enumerate() {
            v[i] = hs_inner(b, op)?;
        }
        Ok(v)
    };
    let mut a = coords(from)?;
    let mut b = coords(to)?;
    if a[0].abs() > 1e-9 || b[0].abs() > 1e-9 {
        return Err(Error::GeneratorMovesIdentity {
            norm: a[0].abs().max(b[0].abs()),
        });
    }
    let na = a.norm();
    let nb = b.norm();
    if na < 1e-12 || nb < 1e-12 {
        return Err(Error::ZeroVector);
    }
    a /= na;
    b /= nb;
    let cos = a.dot(&b).clamp(-1.0, 1.0);
    let theta = cos.acos();
    // Orthonormal second leg of the rotation plane.
    let mut b_perp = b - &a * cos;
    let nperp = b_perp.norm();
    if nperp < 1e-12 {
        // Already aligned; zero generator.
        return Ok(nalgebra::DMatrix::<f64>::zeros(d, d));
    }
    b_perp /= nperp;
    let g = (&b_perp * a.transpose() - &a * b_perp.transpose()) * theta;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{rank_bounded_system, RankBoundedMode};
    use crate::linalg::{C64, CMatrix};

    fn pure_states(n: usize) -> FixedSpectrumManifold {
        FixedSpectrumManifold {
            spectrum: Spectrum::pure(n),
        }
    }

    #[test]
    fn injectivity_full_system_ratio_is_one() {
        let sampler = pure_states(3);
        let sigma = OperatorSystem::full(3);
        let r = check_injectivity(&sigma, &sampler, 200, 1, INJECTIVITY_THRESHOLD).unwrap();
        assert!(r.pass);
        let ratio = r.min_separation_ratio.unwrap();
        assert!((ratio - 1.0).abs() < 1e-9, "ratio {ratio}");
    }

    #[test]
    fn injectivity_trivial_system_fails() {
        let sampler = pure_states(2);
        let sigma = OperatorSystem::trivial(2);
        let r = check_injectivity(&sigma, &sampler, 100, 2, INJECTIVITY_THRESHOLD).unwrap();
        assert!(!r.pass);
        assert!(r.min_separation_ratio.unwrap() < 1e-9);
    }

    #[test]
    fn injectivity_rank_bounded_on_pure_states() {
        let (sigma, _) = rank_bounded_system(4, 1, RankBoundedMode::RandomCertified, 3).unwrap();
        let sampler = pure_states(4);
        let r = check_injectivity(&sigma, &sampler, 1000, 4, INJECTIVITY_THRESHOLD).unwrap();
        assert!(r.pass, "min ratio {:?}", r.min_separation_ratio);
    }

    #[test]
    fn injectivity_is_deterministic_and_monotone() {
        let sampler = pure_states(3);
        let sigma = OperatorSystem::full(3);
        let a = check_injectivity(&sigma, &sampler, 100, 7, 1e-7).unwrap();
        let b = check_injectivity(&sigma, &sampler, 100, 7, 1e-7).unwrap();
        assert_eq!(a.min_separation_ratio, b.min_separation_ratio);
        let c = check_injectivity(&sigma, &sampler, 200, 7, 1e-7).unwrap();
        assert!(c.min_separation_ratio.unwrap() <= a.min_separation_ratio.unwrap() + 1e-15);
    }

    #[test]
    fn immersion_full_system_saturates() {
        let sampler = pure_states(3);
        let sigma = OperatorSystem::full(3);
        let r = check_immersion(&sigma, &sampler, 50, 5, IMMERSION_THRESHOLD).unwrap();
        assert!(r.pass);
        assert!((r.min_tangent_singular_value.unwrap() - 1.0).abs() < 1e-9);
        assert!(r.steepness.unwrap() < 1e-6);
    }

    #[test]
    fn immersion_planted_missing_direction() {
        // span{1, sigma_z, sigma_x} on the Bloch sphere misses the sigma_y
        // tangent direction at the pole |0><0|.
        let basis = crate::linalg::hermitian_basis(2);
        // identity-first basis: [1/sqrt2, diag ladder (=sigma_z-like), X, Y]
        let sigma =
            OperatorSystem::from_span(2, &[basis[1].clone(), basis[2].clone()]).unwrap();
        let pole = DensityOperator::from_matrix(CMatrix::from_fn(2, 2, |i, j| {
            if i == 0 && j == 0 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
        .unwrap();
        let frame = tangent_basis_fixed_spectrum(&pole, &Spectrum::pure(2)).unwrap();
        let (s, l) = immersion_at_point(&sigma, &frame).unwrap();
        assert!(s < 1e-9, "singular value {s}");
        assert!((l - 1.0).abs() < 1e-9);
    }

    #[test]
    fn immersion_geometry_identity() {
        // s^2 + l^2 = 1 per point by construction of the Gram geometry.
        let sampler = pure_states(3);
        let (sigma, _) = rank_bounded_system(3, 1, RankBoundedMode::RandomCertified, 8).unwrap();
        for t in 0..10 {
            let (_, frame) = sampler.tangent_frame(derive_seed(9, t)).unwrap();
            let (s, l) = immersion_at_point(&sigma, &frame).unwrap();
            assert!((s * s + l * l - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn stability_full_system_passes() {
        let sampler = pure_states(2);
        let sigma = OperatorSystem::full(2);
        let r = stability_probe(&sigma, &sampler, 0.3, 5, 50, 11, 1e-7).unwrap();
        assert!(r.pass);
        // Rotated full system is the full system: ratios stay 1.
        assert!((r.min_separation_ratio.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn stability_adversarial_rotation_kills_separation() {
        // Non-immersive system on the Bloch sphere: span{1, sigma_z}. An
        // adversarial rotation aligned with a local difference direction
        // produces a near-collision pair at any delta.
        let basis = crate::linalg::hermitian_basis(2);
        let sigma = OperatorSystem::from_span(2, &[basis[1].clone()]).unwrap();
        let sampler = pure_states(2);
        let (a, b) = sampler.local_pair(3, 1e-3);
        let diff = a.operator().sub(b.operator());
        // Rotate the system so the projection kernel swallows the local
        // difference: align the retained direction away from it.
        let kernel_dir = diff.scale(1.0 / diff.norm());
        let retained = &sigma.basis()[1];
        // Rotate retained direction onto something orthogonal to diff.
        let mut ortho = basis[3].clone();
        let c = hs_inner(&ortho, &kernel_dir).unwrap();
        ortho = ortho.sub(&kernel_dir.scale(c));
        let g = rotation_aligning(2, retained, &ortho).unwrap();
        let rotated = rotate_system(&sigma, &g, 1.0).unwrap();
        let ratio = rotated.projection_norm(&diff).unwrap() / diff.norm();
        assert!(ratio < 1e-2, "adversarial rotation left ratio {ratio}");
    }

    #[test]
    fn separation_full_system_constant_two() {
        let sampler = pure_states(2);
        let sigma = OperatorSystem::full(2);
        let eps = [1e-1, 1e-2, 1e-3];
        let r = separation_probe(&sigma, &sampler, &eps, 400, 13, 10.0).unwrap();
        for (_, c) in r.c_estimates.unwrap() {
            assert!((c - 2.0).abs() < 1e-9, "C_est {c}");
        }
    }

    #[test]
    fn separation_embedding_bounded_vs_planted_blowup() {
        // Embedding: certified rank-bounded system on pure states of C^4.
        let (sigma, _) = rank_bounded_system(4, 1, RankBoundedMode::RandomCertified, 17).unwrap();
        let sampler = pure_states(4);
        let eps = [1e-1, 1e-2, 1e-3, 1e-4];
        let r = separation_probe(&sigma, &sampler, &eps, 600, 19, 10.0).unwrap();
        let cs: Vec<f64> = r.c_estimates.unwrap().iter().map(|(_, c)| *c).collect();
        let mut sorted = cs.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        let max = sorted.last().copied().unwrap();
        assert!(max / median <= 1.2, "embedding C_est spread {cs:?}");

        // Planted non-immersive system: span{1, sigma_z} on the Bloch
        // sphere. C_est blows up as epsilon shrinks.
        let basis = crate::linalg::hermitian_basis(2);
        let flat = OperatorSystem::from_span(2, &[basis[1].clone()]).unwrap();
        let sampler2 = pure_states(2);
        let r = separation_probe(&flat, &sampler2, &eps, 600, 23, 10.0).unwrap();
        let cs: Vec<(f64, f64)> = r.c_estimates.unwrap();
        let c_large = cs.first().unwrap().1;
        let c_small = cs.last().unwrap().1;
        assert!(
            c_small >= 10.0 * c_large,
            "no blow-up: C({:.0e})={}, C({:.0e})={}",
            cs.first().unwrap().0,
            c_large,
            cs.last().unwrap().0,
            c_small
        );
    }

    #[test]
    fn noise_ball_full_system_and_vacuous() {
        let sampler = pure_states(2);
        let sigma = OperatorSystem::full(2);
        let p = crate::opsys::system_to_povm(&sigma).unwrap();
        // Generous C above the inverse distortion of the induced map.
        let r = noise_ball_check(&p, &sampler, 1e-3, 60.0, 400, 29).unwrap();
        assert!(r.pass, "violations: {:?}", r.violations);

        // Epsilon above the manifold diameter: vacuous pass.
        let r = noise_ball_check(&p, &sampler, 10.0, 1.0, 100, 31).unwrap();
        assert!(r.pass);

        // Deliberately tiny C with a blind POVM: violations must appear.
        let blind = Povm::trivial(2);
        let r = noise_ball_check(&blind, &sampler, 1e-3, 1.0, 200, 37).unwrap();
        assert!(!r.pass);
        assert!(r.violations.unwrap() > 0);
    }

    #[test]
    fn report_serializes() {
        let sampler = pure_states(2);
        let sigma = OperatorSystem::full(2);
        let r = check_injectivity(&sigma, &sampler, 10, 41, 1e-7).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("injectivity"));
        let back: VerificationReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back.samples, r.samples);
    }
}
