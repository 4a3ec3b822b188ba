use tomotopo::constructions::*;
use tomotopo::linalg::*;
use tomotopo::manifolds::*;
use num_complex::Complex;
type C = Complex<f64>;

fn main() {
    let (round, db, r) = (1u64, 8usize, 6usize);
    let da = r.max(2);
    let spec = BobOrbitSpec::random(da, db, r, derive_seed(71, round * 64 + db as u64)).unwrap();
    let meas = bob_up2_build(&spec);
    let u = haar_unitary(db, derive_seed(72, round * 640 + (db * 9 + r) as u64));
    let m_true = bob_up2_entries(&meas, &u).unwrap();
    let g = bob_up2_forms(&meas, &m_true);
    let m_len = db * r;
    // replicate the recursion WITH per-step error tracking vs m_true
    let lead = g[0].re.max(0.0).sqrt();
    println!("lead = {lead:.4}");
    let mut m = vec![C::new(0.0, 0.0); m_len];
    m[0] = C::new(lead, 0.0);
    // true gauge: align m_true so its first entry is real positive
    let phase = m_true[0].conj() / C::new(m_true[0].norm(), 0.0);
    let m_al: Vec<C> = m_true.iter().map(|z| z * phase).collect();
    let m0 = 1usize;
    for l in m0..m_len {
        let gk = g[m0 + l - 1];
        let mut cross = C::new(0.0, 0.0);
        let k = m0 + l;
        let mut i = m0 + 1;
        while i <= k + 1 - i {
            let q = k + 1 - i;
            if i <= m_len && q <= m_len {
                cross += m[i - 1] * m[q - 1].conj();
            }
            i += 1;
        }
        let m_conj = (gk - cross) / C::new(lead, 0.0);
        m[l] = m_conj.conj();
        if l % 8 == 0 || l == m_len - 1 || l < 6 {
            let err = (m[l] - m_al[l]).norm();
            println!("step l={l}: entry err {err:.3e}");
        }
    }
}
