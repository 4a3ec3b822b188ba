//! Acceptance suite: one pass/fail line per criterion, each pinned to its
//! stated tolerance and time budget. Criteria run sequentially inside a
//! single test so the wall-clock budgets are measured without contention.

use std::time::Instant;

use num_bigint::BigUint;

use tomotopo::bounds::{
    binom_parity, sigma, sigma_series_oracle, stiefel_bounds, upper_bob_up1, StiefelParams,
};
use tomotopo::constructions::{
    bob_up1_system, bob_up2_build, bob_up2_entries, bob_up2_reconstruct, bob_up2_system,
    bob_up2_values, phase_aligned_distance, rank_bounded_system, RankBoundedMode,
};
use tomotopo::linalg::{
    derive_seed, haar_unitary, hermitian_basis, random_hermitian, rng_from_seed, C64, CMatrix,
    HermitianOperator,
};
use tomotopo::manifolds::{
    bob_state, hermitian_tensor_power, lemtr_lhs, lemtr_rhs, sample_fixed_spectrum,
    tangent_basis_fixed_spectrum, tensor_power_differential, BobOrbitSpec, Spectrum,
};
use tomotopo::opsys::OperatorSystem;
use tomotopo::tables::{compute_table, diff_tables, parse_golden, TableKind};
use tomotopo::verify::{
    check_immersion, check_injectivity, separation_probe, BobOrbitManifold,
    FixedSpectrumManifold,
};

const GOLDEN_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/tables");

struct Criterion {
    number: u32,
    name: &'static str,
    budget_s: f64,
}

fn run_criterion(
    c: &Criterion,
    failures: &mut Vec<String>,
    body: impl FnOnce() -> Result<String, String>,
) {
    let start = Instant::now();
    let outcome = body();
    let elapsed = start.elapsed().as_secs_f64();
    match outcome {
        Ok(detail) => {
            if elapsed > c.budget_s {
                println!(
                    "criterion {:>2} [{}]: FAIL ({elapsed:.2}s over the {}s budget)",
                    c.number, c.name, c.budget_s
                );
                failures.push(format!("criterion {} exceeded budget", c.number));
            } else {
                println!(
                    "criterion {:>2} [{}]: PASS ({elapsed:.2}s) {detail}",
                    c.number, c.name
                );
            }
        }
        Err(msg) => {
            println!(
                "criterion {:>2} [{}]: FAIL ({elapsed:.2}s) {msg}",
                c.number, c.name
            );
            failures.push(format!("criterion {}: {msg}", c.number));
        }
    }
}

fn golden(kind: TableKind) -> Result<tomotopo::tables::Table, String> {
    let path = format!("{GOLDEN_DIR}/{}.txt", kind.name());
    let text = std::fs::read_to_string(&path).map_err(|e| format!("missing golden {path}: {e}"))?;
    parse_golden(kind, &text).map_err(|e| format!("golden parse: {e}"))
}

fn table_criterion(kind: TableKind) -> Result<String, String> {
    let computed = compute_table(kind);
    let gold = golden(kind)?;
    let diff = diff_tables(&computed, &gold);
    if diff.all_match {
        Ok(format!("{}/{} cells exact", diff.matched, diff.compared))
    } else {
        let bad: Vec<String> = diff
            .cells
            .iter()
            .filter(|c| {
                c.status != tomotopo::tables::CellStatus::Match
                    && c.status != tomotopo::tables::CellStatus::ReferenceOnly
            })
            .map(|c| format!("[{},{}] {:?} vs {:?}", c.row, c.col, c.computed, c.golden))
            .collect();
        Err(format!("mismatches: {}", bad.join("; ")))
    }
}

/// Exact big-integer binomial coefficient parity, the independent oracle.
fn bigint_parity(n: u64, k: u64) -> u8 {
    let mut c = BigUint::from(1u32);
    for i in 0..k {
        c = c * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    if (c % BigUint::from(2u32)) == BigUint::from(1u32) {
        1
    } else {
        0
    }
}

/// All partitions of `n` into unordered positive parts (descending).
fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 0 {
            out.push(prefix.clone());
            return;
        }
        for p in (1..=n.min(max)).rev() {
            prefix.push(p);
            rec(n - p, p, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

fn criterion_1() -> Result<String, String> {
    const EXPECTED: [i64; 16] = [2, 6, 6, 14, 14, 14, 14, 30, 30, 30, 30, 30, 30, 30, 30, 62];
    let t = compute_table(TableKind::Wn1);
    for (i, want) in EXPECTED.iter().enumerate() {
        let n = i as u64 + 2;
        let got = t
            .get("computed", &n.to_string())
            .ok_or_else(|| format!("missing cell n={n}"))?;
        if got != *want {
            return Err(format!("n={n}: computed {got}, expected {want}"));
        }
    }
    table_criterion(TableKind::Wn1)?;
    Ok("16/16 values exact".into())
}

fn criterion_3() -> Result<String, String> {
    let detail = table_criterion(TableKind::Stiefel)?;
    // The stated-formula column is exact for r < n/2 at the printed anchors.
    for (n, r, want) in [(17u64, 5u64, 302i64), (65, 17, 3518), (129, 17, 8126)] {
        let got = upper_bob_up1(n, r).map_err(|e| e.to_string())?;
        if got != want {
            return Err(format!("up1({n},{r}) formula {got} != {want}"));
        }
    }
    Ok(detail)
}

fn criterion_4() -> Result<String, String> {
    let detail = table_criterion(TableKind::Wnk)?;
    // Spot anchors under the documented column shift k = label - 1.
    let t = compute_table(TableKind::Wnk);
    for (label, want) in [(2i64, 14i64), (3, 19), (4, 22), (5, 23), (6, 24)] {
        let got = t.get("5", &label.to_string()).unwrap();
        if got != want {
            return Err(format!("row 5 label {label}: {got} != {want}"));
        }
    }
    let sb = stiefel_bounds(StiefelParams::new(10, 2).unwrap());
    if sb.max_non_immersion_dim != 51 {
        return Err(format!("(10,2) anchor: {}", sb.max_non_immersion_dim));
    }
    Ok(detail)
}

fn criterion_5() -> Result<String, String> {
    let mut sigma_cases = 0usize;
    for n in 1..=64u64 {
        for k in 1..=n {
            let s = StiefelParams::new(n, k).unwrap();
            if sigma(s) != sigma_series_oracle(s) {
                return Err(format!("sigma routes disagree at ({n},{k})"));
            }
            sigma_cases += 1;
        }
    }
    if sigma_cases != 2080 {
        return Err(format!("expected 2080 sigma cases, ran {sigma_cases}"));
    }
    let mut parity_cases = 0usize;
    for n in 0..=300u64 {
        for k in 0..=n {
            if binom_parity(n, k).unwrap() != bigint_parity(n, k) {
                return Err(format!("parity disagrees at ({n},{k})"));
            }
            parity_cases += 1;
        }
    }
    Ok(format!(
        "{sigma_cases} sigma cases and {parity_cases} parity cases agree"
    ))
}

fn criterion_6() -> Result<String, String> {
    let mut worst = 0.0_f64;
    for t in 0..1000u64 {
        let da = 2 + (t as usize % 5); // 2..6
        let db = 2 + ((t as usize / 5) % 5); // 2..6
        let rank = 1 + (t as usize % da.min(db));
        let spec = BobOrbitSpec::random(da, db, rank, derive_seed(61, t))
            .map_err(|e| e.to_string())?;
        let mut rng = rng_from_seed(derive_seed(62, t));
        let o = random_hermitian(da, &mut rng).into_entries();
        let s = random_hermitian(db, &mut rng).into_entries();
        let u = haar_unitary(db, derive_seed(63, t));
        let gap = (lemtr_lhs(&spec, &o, &s, &u) - lemtr_rhs(&spec, &o, &s, &u)).abs();
        worst = worst.max(gap);
        if gap > 1e-10 {
            return Err(format!("identity violated by {gap:.3e} at t={t}"));
        }
    }
    Ok(format!("1000 instances, worst gap {worst:.3e}"))
}

fn criterion_7() -> Result<String, String> {
    let mut worst = 0.0_f64;
    let mut trials = 0usize;
    // All (dB, r) pairs with dB <= 8; enough rounds per pair to reach 500.
    let combos: Vec<(usize, usize)> = (2..=8usize)
        .flat_map(|db| (1..=db).map(move |r| (db, r)))
        .collect();
    'outer: for round in 0..15u64 {
        for &(db, r) in &combos {
            if trials >= 500 {
                break 'outer;
            }
            let da = r.max(2);
            let spec = BobOrbitSpec::random(da, db, r, derive_seed(71, round * 64 + db as u64))
                .map_err(|e| e.to_string())?;
            let meas = bob_up2_build(&spec);
            let u = haar_unitary(db, derive_seed(72, round * 640 + (db * 9 + r) as u64));
            let values = bob_up2_values(&meas, &u).map_err(|e| e.to_string())?;
            let m_true = bob_up2_entries(&meas, &u).map_err(|e| e.to_string())?;
            let m_rec = bob_up2_reconstruct(&meas, &values).map_err(|e| e.to_string())?;
            let err = phase_aligned_distance(&m_rec, &m_true);
            worst = worst.max(err);
            if err > 1e-8 {
                return Err(format!("roundtrip error {err:.3e} at dB={db}, r={r}"));
            }
            trials += 1;
        }
    }
    // Planted leading-zero cases: cyclic shifts in the Schmidt right basis.
    let mut planted = 0usize;
    for db in [4usize, 6, 8] {
        let spec = BobOrbitSpec::random(3, db, 3, derive_seed(73, db as u64))
            .map_err(|e| e.to_string())?;
        let meas = bob_up2_build(&spec);
        let f = &spec.schmidt().right;
        for shift in 1..db {
            let mut shift_m = CMatrix::zeros(db, db);
            for j in 0..db {
                shift_m[((j + shift) % db, j)] = C64::new(1.0, 0.0);
            }
            let u = f * shift_m * f.adjoint();
            let values = bob_up2_values(&meas, &u).map_err(|e| e.to_string())?;
            let m_true = bob_up2_entries(&meas, &u).map_err(|e| e.to_string())?;
            let m_rec = bob_up2_reconstruct(&meas, &values).map_err(|e| e.to_string())?;
            let err = phase_aligned_distance(&m_rec, &m_true);
            worst = worst.max(err);
            if err > 1e-8 {
                return Err(format!("planted-zero error {err:.3e} at dB={db} shift={shift}"));
            }
            planted += 1;
        }
    }
    Ok(format!(
        "{trials} random + {planted} planted-zero roundtrips, worst error {worst:.3e}"
    ))
}

fn criterion_8() -> Result<String, String> {
    let mut spectra_checked = 0usize;
    for n in 2..=6usize {
        for parts in partitions(n) {
            let k = parts.len();
            // Distinct block values v_i proportional to k+1-i.
            let z: f64 = parts
                .iter()
                .enumerate()
                .map(|(i, &m)| m as f64 * (k - i) as f64)
                .sum();
            let mut values = Vec::new();
            for (i, &m) in parts.iter().enumerate() {
                for _ in 0..m {
                    values.push((k - i) as f64 / z);
                }
            }
            let s = Spectrum::new(values).map_err(|e| e.to_string())?;
            if s.multiplicities() != parts.as_slice() {
                return Err(format!("grouping drifted for {parts:?}"));
            }
            let expected = n * n - parts.iter().map(|m| m * m).sum::<usize>();
            let r_mult = s.max_multiplicity();
            let rank_cap = 2 * (n - r_mult);
            for trial in 0..3u64 {
                let rho = sample_fixed_spectrum(&s, derive_seed(81, spectra_checked as u64 * 7 + trial));
                let frame =
                    tangent_basis_fixed_spectrum(&rho, &s).map_err(|e| e.to_string())?;
                if frame.len() != expected {
                    return Err(format!(
                        "tangent count {} != {} for {parts:?}",
                        frame.len(),
                        expected
                    ));
                }
                // Rank bound for basis elements and random tangent combos.
                let mut rng = rng_from_seed(derive_seed(82, spectra_checked as u64 * 7 + trial));
                for b in frame.iter().take(6) {
                    if b.numerical_rank(1e-8) > rank_cap {
                        return Err(format!("tangent rank exceeds {rank_cap} for {parts:?}"));
                    }
                }
                if !frame.is_empty() {
                    let mut combo = HermitianOperator::zero(n);
                    for b in &frame {
                        combo = combo.add(&b.scale(tomotopo::linalg::standard_normal(&mut rng)));
                    }
                    let norm = combo.norm();
                    if norm > 1e-9 && combo.scale(1.0 / norm).numerical_rank(1e-8) > rank_cap {
                        return Err(format!("tangent combo rank exceeds {rank_cap}"));
                    }
                }
                // Orbit differences obey the same bound.
                let a = sample_fixed_spectrum(&s, derive_seed(83, spectra_checked as u64 * 7 + trial));
                let b = sample_fixed_spectrum(&s, derive_seed(84, spectra_checked as u64 * 7 + trial));
                let d = a.operator().sub(b.operator());
                if d.norm() > 1e-9 && d.numerical_rank(1e-8) > rank_cap {
                    return Err(format!("orbit difference rank exceeds {rank_cap}"));
                }
            }
            spectra_checked += 1;
        }
    }
    Ok(format!("{spectra_checked} multiplicity profiles checked"))
}

fn criterion_9() -> Result<String, String> {
    let mut details = Vec::new();

    // Rank-bounded system on pure states of C^4.
    let (rb, report) = rank_bounded_system(4, 1, RankBoundedMode::RandomCertified, 91)
        .map_err(|e| e.to_string())?;
    if !report.pass {
        return Err("rank-bounded certification failed".into());
    }
    let pure4 = FixedSpectrumManifold {
        spectrum: Spectrum::pure(4),
    };
    let inj = check_injectivity(&rb, &pure4, 10_000, 92, 1e-7).map_err(|e| e.to_string())?;
    if !inj.pass {
        return Err(format!(
            "rank-bounded injectivity ratio {:?}",
            inj.min_separation_ratio
        ));
    }
    let imm = check_immersion(&rb, &pure4, 100, 93, 1e-6).map_err(|e| e.to_string())?;
    if !imm.pass {
        return Err(format!(
            "rank-bounded immersion sv {:?}",
            imm.min_tangent_singular_value
        ));
    }
    details.push(format!(
        "rank-bounded(4,1): ratio {:.2e}, sv {:.2e}",
        inj.min_separation_ratio.unwrap(),
        imm.min_tangent_singular_value.unwrap()
    ));

    // Two-stage system on the maximally entangled orbit at dB = 4.
    let spec_up1 = BobOrbitSpec::maximally_entangled(4);
    let up1 = bob_up1_system(&spec_up1, 94).map_err(|e| e.to_string())?;
    let orbit4 = BobOrbitManifold {
        spec: spec_up1.clone(),
    };
    let inj = check_injectivity(&up1.system, &orbit4, 10_000, 95, 1e-7)
        .map_err(|e| e.to_string())?;
    if !inj.pass {
        return Err(format!("up1 injectivity ratio {:?}", inj.min_separation_ratio));
    }
    let imm = check_immersion(&up1.system, &orbit4, 100, 96, 1e-6).map_err(|e| e.to_string())?;
    if !imm.pass {
        return Err(format!("up1 immersion sv {:?}", imm.min_tangent_singular_value));
    }
    details.push(format!(
        "up1(dB=4,maxent): ratio {:.2e}, sv {:.2e}",
        inj.min_separation_ratio.unwrap(),
        imm.min_tangent_singular_value.unwrap()
    ));

    // Quadratic-form system at dB = 6, r = 3.
    let spec_up2 = BobOrbitSpec::random(3, 6, 3, 97).map_err(|e| e.to_string())?;
    let meas = bob_up2_build(&spec_up2);
    let sys = bob_up2_system(&meas).map_err(|e| e.to_string())?;
    let orbit6 = BobOrbitManifold {
        spec: spec_up2.clone(),
    };
    let inj = check_injectivity(&sys, &orbit6, 10_000, 98, 1e-7).map_err(|e| e.to_string())?;
    if !inj.pass {
        return Err(format!("up2 injectivity ratio {:?}", inj.min_separation_ratio));
    }
    let imm = check_immersion(&sys, &orbit6, 100, 99, 1e-6).map_err(|e| e.to_string())?;
    if !imm.pass {
        return Err(format!("up2 immersion sv {:?}", imm.min_tangent_singular_value));
    }
    // The immersion probe's tangent frames must match the orbit dimension.
    use tomotopo::verify::ManifoldSampler;
    let orbit_dim = 2 * 6 * 3 - 9 - 1;
    let (_, frame) = orbit6
        .tangent_frame(100)
        .ok_or_else(|| "orbit sampler gave no tangent frame".to_string())?;
    if frame.len() != orbit_dim {
        return Err(format!("orbit frame {} != {orbit_dim}", frame.len()));
    }
    details.push(format!(
        "up2(dB=6,r=3): ratio {:.2e}, sv {:.2e}",
        inj.min_separation_ratio.unwrap(),
        imm.min_tangent_singular_value.unwrap()
    ));

    Ok(details.join("; "))
}

fn criterion_10() -> Result<String, String> {
    let eps = [1e-1, 1e-2, 1e-3, 1e-4];

    // Full system: C_est identically two.
    let pure2 = FixedSpectrumManifold {
        spectrum: Spectrum::pure(2),
    };
    let full = OperatorSystem::full(2);
    let r = separation_probe(&full, &pure2, &eps, 600, 101, 10.0).map_err(|e| e.to_string())?;
    for (e, c) in r.c_estimates.unwrap() {
        if (c - 2.0).abs() > 1e-9 {
            return Err(format!("full system C({e:.0e}) = {c}, not 2"));
        }
    }

    // Planted non-immersive system: blow-up toward small scales.
    let basis = hermitian_basis(2);
    let flat = OperatorSystem::from_span(2, &[basis[1].clone()]).map_err(|e| e.to_string())?;
    let r = separation_probe(&flat, &pure2, &eps, 600, 102, 10.0).map_err(|e| e.to_string())?;
    let cs = r.c_estimates.unwrap();
    let c_large = cs.first().unwrap().1;
    let c_small = cs.last().unwrap().1;
    if !(c_small >= 10.0 * c_large) {
        return Err(format!(
            "no blow-up: C(largest)={c_large:.3}, C(smallest)={c_small:.3}"
        ));
    }

    // Embedding system: bounded spread.
    let (rb, _) = rank_bounded_system(4, 1, RankBoundedMode::RandomCertified, 103)
        .map_err(|e| e.to_string())?;
    let pure4 = FixedSpectrumManifold {
        spectrum: Spectrum::pure(4),
    };
    let r = separation_probe(&rb, &pure4, &eps, 1000, 104, 10.0).map_err(|e| e.to_string())?;
    let cs: Vec<f64> = r.c_estimates.unwrap().iter().map(|(_, c)| *c).collect();
    let mut sorted = cs.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let max = sorted.last().copied().unwrap();
    if max / median > 1.2 {
        return Err(format!("embedding spread {:.3} > 1.2 ({cs:?})", max / median));
    }
    Ok(format!(
        "full C=2 exact; planted blow-up {c_small:.1}/{c_large:.1}; embedding spread {:.3}",
        max / median
    ))
}

fn criterion_11() -> Result<String, String> {
    let mut worst = 0.0_f64;
    let mut count = 0usize;
    let mut rng = rng_from_seed(111);
    while count < 100 {
        for k in 1..=3u32 {
            for n in 2..=3usize {
                let rho_raw = random_hermitian(n, &mut rng);
                let rho = rho_raw.scale(0.5 / rho_raw.norm().max(1.0));
                let v_raw = random_hermitian(n, &mut rng);
                let v = v_raw.scale(1.0 / v_raw.norm());
                let closed =
                    tensor_power_differential(&rho, &v, k).map_err(|e| e.to_string())?;
                let h = 1e-5;
                let plus =
                    hermitian_tensor_power(&rho.add(&v.scale(h)), k).map_err(|e| e.to_string())?;
                let minus =
                    hermitian_tensor_power(&rho.sub(&v.scale(h)), k).map_err(|e| e.to_string())?;
                let fd = plus.sub(&minus).scale(1.0 / (2.0 * h));
                let rel = fd.sub(&closed).norm() / closed.norm().max(1e-12);
                worst = worst.max(rel);
                if rel > 1e-6 {
                    return Err(format!("k={k}, n={n}: relative error {rel:.3e}"));
                }
                count += 1;
            }
        }
    }
    Ok(format!("{count} derivative checks, worst relative error {worst:.3e}"))
}

/// Criterion 2 plus the shared table plumbing for criterion 1.
fn criterion_2() -> Result<String, String> {
    table_criterion(TableKind::Flag)
}

#[test]
fn acceptance() {
    let criteria = [
        Criterion { number: 1, name: "rank-one orbit table", budget_s: 1.0 },
        Criterion { number: 2, name: "flag table", budget_s: 1.0 },
        Criterion { number: 3, name: "stiefel table", budget_s: 5.0 },
        Criterion { number: 4, name: "general-rank table", budget_s: 5.0 },
        Criterion { number: 5, name: "cross oracles", budget_s: 10.0 },
        Criterion { number: 6, name: "trace identity", budget_s: 10.0 },
        Criterion { number: 7, name: "up2 roundtrip", budget_s: 60.0 },
        Criterion { number: 8, name: "tangent geometry", budget_s: 30.0 },
        Criterion { number: 9, name: "construction separation", budget_s: 300.0 },
        Criterion { number: 10, name: "stability dichotomy", budget_s: 120.0 },
        Criterion { number: 11, name: "k-copy differential", budget_s: 30.0 },
    ];
    let mut failures = Vec::new();
    for c in &criteria {
        let body: Box<dyn FnOnce() -> Result<String, String>> = match c.number {
            1 => Box::new(criterion_1),
            2 => Box::new(criterion_2),
            3 => Box::new(criterion_3),
            4 => Box::new(criterion_4),
            5 => Box::new(criterion_5),
            6 => Box::new(criterion_6),
            7 => Box::new(criterion_7),
            8 => Box::new(criterion_8),
            9 => Box::new(criterion_9),
            10 => Box::new(criterion_10),
            11 => Box::new(criterion_11),
            _ => unreachable!(),
        };
        run_criterion(c, &mut failures, body);
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
