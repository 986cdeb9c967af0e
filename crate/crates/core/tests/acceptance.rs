//! Acceptance gate. Prints one line per criterion and exits nonzero if any
//! criterion fails.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use specweight::canonical_system::WeightProfile;
use specweight::inverse_spectral::{recover_weight, verify_spectral, Probe, RecoverOptions, RecoveryReport};
use specweight::krein_functions::{christoffel_darboux_residual, f_mu_unitarity};
use specweight::measures::Measure;
use specweight::muckenhoupt::{
    a2_norm, kernel_abs_integral, phi_average, phi_average_simplex, prop1_certificate, simplex_exp_integral,
    ScanFamily, N_MAX,
};
use specweight::wiener_hopf::{
    cholesky_factorize, default_y_grid, discretize_wiener_hopf, fmu_factorize, outer_pi, reverse_factorize,
    sakhnovich_audit, ConvolutionKernel, PiecewiseSymbol,
};
use specweight::wiener_hopf::fmu_factorize_symbol;
use std::f64::consts::PI;
use std::time::Instant;

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_probes(rng: &mut ChaCha8Rng, a: f64, k: usize) -> Vec<Probe> {
    (0..k)
        .map(|_| {
            let r = a * rng.random_range(0.2..1.0);
            let lam = c(rng.random_range(-3.0..3.0), rng.random_range(-1.0..1.0));
            let z = c(rng.random_range(-3.0..3.0), rng.random_range(-1.0..1.0));
            Probe::new(r, lam, z)
        })
        .collect()
}

fn sup_dev(w: &[f64], target: f64) -> f64 {
    w.iter().map(|x| (x - target).abs()).fold(0.0, f64::max)
}

fn atomic_measure() -> Measure {
    Measure::lebesgue(40.0).with_atom(2.0, 0.1).expect("valid atom")
}

fn atomic_recovery() -> specweight::Result<RecoveryReport> {
    recover_weight(&atomic_measure(), 2.0, &RecoverOptions::new(64, 96))
}

fn criterion_1() -> Outcome {
    let mu = Measure::lebesgue(40.0);
    let rep = recover_weight(&mu, PI, &RecoverOptions::new(64, 96)).map_err(|e| e.to_string())?;
    let dev = sup_dev(&rep.w, 1.0);
    let h = rep.weight_profile().map_err(|e| e.to_string())?;
    let probes = random_probes(&mut ChaCha8Rng::seed_from_u64(1), PI, 5);
    let v = verify_spectral(&mu, &h, &probes).map_err(|e| e.to_string())?;
    check(
        dev <= 1e-3 && v.max_residual <= 1e-6,
        format!("|w-1|inf = {dev:.2e} (<= 1e-3), verify residual = {:.2e} (<= 1e-6)", v.max_residual),
    )
}

fn criterion_2() -> Outcome {
    let mu = Measure::constant(2.0, 40.0).map_err(|e| e.to_string())?;
    let rep = recover_weight(&mu, PI, &RecoverOptions::new(64, 96)).map_err(|e| e.to_string())?;
    let dev = sup_dev(&rep.w, 0.5);
    check(dev <= 1e-3, format!("|w-0.5|inf = {dev:.2e} (<= 1e-3)"))
}

fn criterion_3() -> Outcome {
    let mu = atomic_measure();
    let rep = atomic_recovery().map_err(|e| e.to_string())?;
    let positive = rep.w.iter().all(|w| *w > 0.0);
    let h = rep.weight_profile().map_err(|e| e.to_string())?;
    let probes = random_probes(&mut ChaCha8Rng::seed_from_u64(3), 2.0, 5);
    let v = verify_spectral(&mu, &h, &probes).map_err(|e| e.to_string())?;
    let cert = prop1_certificate(&h, 6, &[0.5, 1.0, 1.5, 2.0]).map_err(|e| e.to_string())?;
    check(
        rep.is_monotone() && positive && v.max_residual <= 1e-4 && cert.satisfied,
        format!(
            "monotone = {}, positive = {positive}, verify residual = {:.2e} (<= 1e-4), a2 = {:.4} vs bound 2^{:.1}",
            rep.is_monotone(),
            v.max_residual,
            cert.a2_actual,
            cert.log2_bound
        ),
    )
}

fn criterion_4() -> Outcome {
    let a = 1.0;
    let tests = [
        WeightProfile::from_fn(a, 97, |x| x.exp()).map_err(|e| e.to_string())?,
        WeightProfile::from_fn(a, 128, |x| (2.0 * (5.0 * x).sin()).exp()).map_err(|e| e.to_string())?,
        WeightProfile::new(vec![0.0, 0.3, 0.55, 1.0], vec![2.0, 0.25, 7.0]).map_err(|e| e.to_string())?,
    ];
    let mut gap: f64 = 0.0;
    for w in &tests {
        for tau in [0.4, 0.77, 1.0] {
            for n in 1..=5 {
                let k = phi_average(w, tau, n).map_err(|e| e.to_string())?;
                let s = phi_average_simplex(w, tau, n).map_err(|e| e.to_string())?;
                gap = gap.max((k - s).abs());
            }
        }
    }
    let mut kernel_gap: f64 = 0.0;
    for n in 1..=N_MAX {
        for tau in [0.1, 1.0, 3.7] {
            kernel_gap = kernel_gap.max((kernel_abs_integral(tau, n) - 2.0).abs());
        }
    }
    let flat = WeightProfile::constant(2.0, 16, 1.0).map_err(|e| e.to_string())?;
    let mut vol_gap: f64 = 0.0;
    let mut fact = 1.0;
    for n in 1..=N_MAX {
        fact *= n as f64;
        for t in [0.5, 1.0, 2.0] {
            let v = simplex_exp_integral(&flat, t, n).map_err(|e| e.to_string())?;
            vol_gap = vol_gap.max((v * fact / t.powi(n as i32) - 1.0).abs());
        }
    }
    let mut gap_ok = true;
    let mut runs = 0;
    let atomic = atomic_recovery().and_then(|r| r.weight_profile()).map_err(|e| e.to_string())?;
    for w in tests.iter().chain([&flat, &atomic]) {
        let a = w.a();
        let cert = prop1_certificate(w, 8, &[0.25 * a, 0.5 * a, a]).map_err(|e| e.to_string())?;
        gap_ok &= cert.step_gap_holds;
        runs += 1;
    }
    check(
        gap <= 1e-6 && kernel_gap <= 1e-12 && vol_gap <= 1e-10 && gap_ok,
        format!(
            "kernel vs simplex = {gap:.2e} (<= 1e-6), |int|k| - 2| = {kernel_gap:.1e}, volume = {vol_gap:.1e} (<= 1e-10), gap bound on {runs} runs = {gap_ok}"
        ),
    )
}

fn criterion_5() -> Outcome {
    let fine = WeightProfile::from_fn(1.0, 1024, f64::sqrt).map_err(|e| e.to_string())?;
    let anchored = a2_norm(&fine, ScanFamily::AnchoredDyadic);
    let dev = (anchored.a2_norm - 4.0 / 3.0).abs();
    let coarse = WeightProfile::from_fn(1.0, 128, f64::sqrt).map_err(|e| e.to_string())?;
    let brute = a2_norm(&coarse, ScanFamily::CellAligned);
    let fast = a2_norm(&coarse, ScanFamily::AnchoredDyadic);
    let agree = (brute.a2_norm - fast.a2_norm).abs();
    check(
        dev <= 2e-2 && agree <= 1e-6,
        format!(
            "a2 = {:.5} (|.-4/3| = {dev:.2e} <= 2e-2), brute {:.8} vs fast {:.8} ({agree:.1e} <= 1e-6)",
            anchored.a2_norm, brute.a2_norm, fast.a2_norm
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let flat = WeightProfile::constant(2.0, 32, 1.0).map_err(|e| e.to_string())?;
    let mut flat_res: f64 = 0.0;
    for _ in 0..5 {
        let r = rng.random_range(0.1..4.0);
        let z = c(rng.random_range(-4.0..4.0), rng.random_range(-1.0..1.0));
        let l = c(rng.random_range(-4.0..4.0), rng.random_range(-1.0..1.0));
        flat_res = flat_res.max(christoffel_darboux_residual(&flat, r, z, l).map_err(|e| e.to_string())?);
    }
    let h = atomic_recovery().and_then(|r| r.weight_profile()).map_err(|e| e.to_string())?;
    let mut rough_res: f64 = 0.0;
    for _ in 0..5 {
        let r = rng.random_range(0.1..4.0);
        let z = c(rng.random_range(-4.0..4.0), rng.random_range(-1.0..1.0));
        let l = c(rng.random_range(-4.0..4.0), rng.random_range(-1.0..1.0));
        rough_res = rough_res.max(christoffel_darboux_residual(&h, r, z, l).map_err(|e| e.to_string())?);
    }
    let probes = [(1.0, c(0.3, 0.0)), (2.5, c(-1.2, 0.4)), (4.0, c(2.0, -0.3)), (3.0, c(0.0, 0.0))];
    let u = f_mu_unitarity(&h, &atomic_measure(), &probes).map_err(|e| e.to_string())?;
    check(
        flat_res <= 1e-8 && rough_res <= 1e-5 && u.relative_residual <= 1e-4,
        format!(
            "flat = {flat_res:.2e} (<= 1e-8), recovered = {rough_res:.2e} (<= 1e-5), unitarity = {:.2e} relative (<= 1e-4), {:.2e} absolute",
            u.relative_residual, u.residual
        ),
    )
}

fn criterion_7() -> Outcome {
    let (mu, a, n) = (0.75, 4.0, 128);
    let w = discretize_wiener_hopf(&ConvolutionKernel::sakhnovich(mu), a, n).map_err(|e| e.to_string())?;
    let chol = cholesky_factorize(&w.entries).map_err(|e| e.to_string())?;
    let rev = reverse_factorize(&w.entries).map_err(|e| e.to_string())?;
    let ev = w.eigenvalues();
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    let slack = 5.0 * w.h;
    let in_range = lo >= 1.0 - mu - slack && hi <= 1.0 + slack;
    check(
        chol.residual <= 1e-10 && chol.chain_preserved && rev.residual <= 1e-10 && rev.chain_preserved && in_range,
        format!(
            "cholesky = {:.1e}, reverse = {:.1e} (<= 1e-10), triangular = {}, spectrum [{lo:.4}, {hi:.4}] in [{:.4}, {:.4}]",
            chol.residual,
            rev.residual,
            chol.chain_preserved && rev.chain_preserved,
            1.0 - mu - slack,
            1.0 + slack
        ),
    )
}

fn criterion_8() -> Outcome {
    let y = c(0.0, 1e-4);
    let mut lines = Vec::new();
    let mut ok = true;
    for (mu, want, rejected) in [(0.75, 2.0, 0.5), (0.36, 1.25, 0.8)] {
        let p = outer_pi(mu, y).map_err(|e| e.to_string())?;
        let d = (p - want).norm();
        let far = (p - rejected).norm();
        let audit = sakhnovich_audit(mu, &default_y_grid(1e-4)).map_err(|e| e.to_string())?;
        ok &= d <= 1e-3 && far >= 10.0 * d.max(1e-3) && audit.pass;
        lines.push(format!("mu {mu}: Pi = {:.6} (target {want}, rejected {rejected}), audit {}", p.re, audit.pass));
    }
    check(ok, lines.join("; "))
}

fn criterion_9() -> Outcome {
    let flat = fmu_factorize(&Measure::lebesgue(40.0), 2.0, 32, 96).map_err(|e| e.to_string())?;
    let n = flat.a.nrows();
    let id_dev = (&flat.a - nalgebra::DMatrix::<f64>::identity(n, n)).abs().row_sum().max();
    let mut rows = Vec::new();
    for n in [16, 32, 64, 128] {
        let f = fmu_factorize_symbol(&PiecewiseSymbol::sakhnovich(0.5), 2.0, n, 96).map_err(|e| e.to_string())?;
        rows.push((n, f.residual, f.triangularity_defect));
    }
    let small = rows.iter().all(|r| r.1 <= 1e-2 && r.2 <= 1e-2);
    let monotone = rows.windows(2).all(|p| p[1].1 < p[0].1 && p[1].2 < p[0].2);
    let table: Vec<String> = rows.iter().map(|(n, r, d)| format!("n={n}: {r:.1e}/{d:.1e}")).collect();
    check(
        id_dev <= 1e-4 && small && monotone,
        format!("|A-I|inf = {id_dev:.1e} (<= 1e-4); residual/defect {}; monotone = {monotone}", table.join(", ")),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("identity round-trip", criterion_1),
        ("constant-symbol round-trip", criterion_2),
        ("atomic perturbation", criterion_3),
        ("Muckenhoupt identities", criterion_4),
        ("A2 closed form", criterion_5),
        ("Christoffel-Darboux", criterion_6),
        ("factorization", criterion_7),
        ("outer-function limit", criterion_8),
        ("F_mu factorization", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
