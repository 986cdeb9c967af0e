//! Closed-form example suite run by `specweight selftest`.

use crate::report::Report;
use crate::{Failure, SelftestArgs};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;
use specweight::canonical_system::{db_kernel, theta_at, type_profile, WeightProfile};
use specweight::inverse_spectral::{recover_weight, verify_spectral, Probe, RecoverOptions};
use specweight::krein_functions::{christoffel_darboux_residual, f_mu_unitarity, krein_from_theta};
use specweight::measures::{symmetrize, Measure, RawMeasure};
use specweight::muckenhoupt::{
    a2_norm, lemma1_bounds, phi_average, prop1_certificate, simplex_exp_integral, ScanFamily,
};
use specweight::toeplitz_pw::{assemble_toeplitz, rk_norm_sq, sinc_kernel};
use specweight::wiener_hopf::{
    cholesky_factorize, default_y_grid, discretize_wiener_hopf, fmu_factorize, outer_pi, sakhnovich_audit,
    ConvolutionKernel,
};
use std::f64::consts::PI;

type Check = Result<String, String>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn near(what: &str, got: f64, want: f64, tol: f64) -> Check {
    let d = (got - want).abs();
    if d <= tol {
        Ok(format!("{what} = {got:.9} (want {want}, off {d:.1e})"))
    } else {
        Err(format!("{what} = {got:.9}, want {want} within {tol:.0e} (off {d:.1e})"))
    }
}

fn all(parts: Vec<Check>) -> Check {
    let mut out = Vec::new();
    for p in parts {
        out.push(p?);
    }
    Ok(out.join("; "))
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn measures() -> Check {
    let leb = Measure::lebesgue(10.0);
    let atoms = Measure::lebesgue(10.0).scaled(0.0).with_atom(1.0, 0.5).map_err(err)?;
    let raw = RawMeasure { nodes: vec![], values: vec![], background: 1.0, atoms: vec![(2.0, 1.0)] };
    let sym = symmetrize(&raw).map_err(err)?;
    all(vec![
        near("int 1 dm on [-10,10]", leb.integrate(|_| c(1.0, 0.0)).re, 20.0, 1e-12),
        near("int x^2 d(atoms)", atoms.integrate(|x| c(x * x, 0.0)).re, 1.0, 1e-12),
        near("split atom mass", sym.atoms()[0].mass, 0.5, 0.0),
    ])
}

fn frame_bounds() -> Check {
    let one = Measure::lebesgue(40.0).estimate_frame_bounds(PI, 32).map_err(err)?;
    let two = Measure::lebesgue(40.0).scaled(2.0).estimate_frame_bounds(PI, 32).map_err(err)?;
    all(vec![
        near("c1(dm)", one.c1, 1.0, 1e-6),
        near("c2(dm)", one.c2, 1.0, 1e-6),
        near("c1(2dm)", two.c1, 2.0, 1e-6),
        near("c2(2dm)", two.c2, 2.0, 1e-6),
    ])
}

fn sinc_kernels() -> Check {
    all(vec![
        near("sinc(pi;0,0)", sinc_kernel(PI, c(0.0, 0.0), c(0.0, 0.0)).re, 1.0, 1e-15),
        near("sinc(pi;0,1)", sinc_kernel(PI, c(0.0, 0.0), c(1.0, 0.0)).norm(), 0.0, 1e-15),
        near("sinc(1;i,i)", sinc_kernel(1.0, c(0.0, 1.0), c(0.0, 1.0)).re, 2f64.sinh() / (2.0 * PI), 1e-14),
    ])
}

fn toeplitz() -> Check {
    let g = assemble_toeplitz(&Measure::lebesgue(40.0), 1.3, 12).map_err(err)?.gram;
    let n = g.nrows();
    let dev = (g - DMatrix::<f64>::identity(n, n)).abs().max();
    all(vec![
        near("|G - I| for dm", dev, 0.0, 1e-12),
        near("rk_norm_sq(3dm, 2)", rk_norm_sq(&Measure::lebesgue(40.0).scaled(3.0), 2.0, 16).map_err(err)?, 2.0 / (3.0 * PI), 1e-12),
    ])
}

fn canonical() -> Check {
    let (cw, r, z) = (2.5, 0.8, c(1.1, -0.4));
    let h = WeightProfile::constant(2.0, 8, cw).map_err(err)?;
    let th = theta_at(&h, r, z);
    let want = [(r * z).cos(), -(r * z).sin() * cw];
    let l = c(-0.3, 0.2);
    let k = db_kernel(&h, r, l, z);
    let sinc = sinc_kernel(r, l, z) * cw;
    let tp = type_profile(&[0.0, 0.5, 1.0, 2.0], &[1.0, 0.0, 1.0], &[1.0, 1.0, 1.0]).map_err(err)?;
    all(vec![
        near("theta(c) error", (th[0] - want[0]).norm() + (th[1] - want[1]).norm(), 0.0, 1e-12),
        near("k - c sinc", (k - sinc).norm(), 0.0, 1e-12),
        near("theta(z=0)", (theta_at(&h, 1.7, c(0.0, 0.0))[0] - 1.0).norm(), 0.0, 0.0),
        near("type(2) with a degenerate cell", tp.value(2.0), 1.5, 1e-12),
    ])
}

fn recovery() -> Check {
    let one = recover_weight(&Measure::lebesgue(40.0), PI, &RecoverOptions::new(32, 48)).map_err(err)?;
    let two = recover_weight(&Measure::lebesgue(40.0).scaled(2.0), PI, &RecoverOptions::new(32, 48)).map_err(err)?;
    let dev = |w: &[f64], t: f64| w.iter().map(|x| (x - t).abs()).fold(0.0, f64::max);
    let h = one.weight_profile().map_err(err)?;
    let probes = [
        Probe::new(1.0, c(0.0, 0.0), c(0.7, 0.0)),
        Probe::new(PI, c(0.0, 1.0), c(1.0, 1.0)),
        Probe::new(2.0, c(-1.0, 0.0), c(3.0, 0.0)),
    ];
    let v = verify_spectral(&Measure::lebesgue(40.0), &h, &probes).map_err(err)?;
    all(vec![
        near("|w - 1| for dm", dev(&one.w, 1.0), 0.0, 1e-4),
        near("|w - 0.5| for 2dm", dev(&two.w, 0.5), 0.0, 1e-3),
        near("verify residual", v.max_residual, 0.0, 1e-6),
    ])
}

fn muckenhoupt() -> Check {
    let flat = WeightProfile::constant(1.0, 32, 3.0).map_err(err)?;
    let step = WeightProfile::new(vec![0.0, 0.5, 1.0], vec![2.0, 0.5]).map_err(err)?;
    let root = WeightProfile::from_fn(1.0, 1024, f64::sqrt).map_err(err)?;
    let linear = WeightProfile::from_fn(1.0, 2048, f64::exp).map_err(err)?;
    let zero = WeightProfile::constant(1.0, 16, 1.0).map_err(err)?;
    let cert = prop1_certificate(&zero, 6, &[0.25, 0.5, 1.0]).map_err(err)?;
    let big = WeightProfile::constant(1.0, 4, 10f64.exp()).map_err(err)?;
    let violated = lemma1_bounds(&big, 1.0, 1.0, 1.0).map_err(err)?;
    all(vec![
        near("A2(const)", a2_norm(&flat, ScanFamily::Auto).a2_norm, 1.0, 1e-13),
        near("A2(step)", a2_norm(&step, ScanFamily::CellAligned).a2_norm, 25.0 / 16.0, 1e-12),
        near("A2(sqrt x) anchored", a2_norm(&root, ScanFamily::AnchoredDyadic).a2_norm, 4.0 / 3.0, 2e-2),
        near("simplex volume n=3", simplex_exp_integral(&zero, 0.5, 3).map_err(err)? * 6.0 / 0.125, 1.0, 1e-10),
        near("simplex phi=u, n=2", simplex_exp_integral(&linear, 1.0, 2).map_err(err)?, (-1f64).exp(), 1e-5),
        near("[1]_(1,3)", phi_average(&flat, 1.0, 3).map_err(err)? / 3f64.ln(), 2.0, 1e-12),
        near("[1]_(1,2)", phi_average(&flat, 1.0, 2).map_err(err)?, 0.0, 1e-12),
        near("b2 for phi = 0", cert.b2, 1.0, 1e-10),
        if cert.satisfied && cert.step_gap_holds { Ok("certificate holds".into()) } else { Err("certificate fails for phi = 0".into()) },
        if violated.holds { Err("phi = 10 with b = 4 not flagged".into()) } else { Ok("phi = 10 flagged".into()) },
    ])
}

fn krein() -> Check {
    let h = WeightProfile::constant(2.0, 16, 1.0).map_err(err)?;
    let z = c(0.7, 0.2);
    let fam = krein_from_theta(&h, z);
    let exp_err = fam
        .t_grid
        .iter()
        .zip(&fam.p)
        .map(|(t, p)| (p - (Complex64::i() * z * t).exp()).norm())
        .fold(0.0, f64::max);
    let cd = christoffel_darboux_residual(&h, 2.0, c(1.0, 0.0), c(0.0, 0.0)).map_err(err)?;
    let u = f_mu_unitarity(&h, &Measure::lebesgue(40.0), &[(1.0, c(0.2, 0.0)), (2.5, c(-1.0, 0.3)), (4.0, c(0.5, -0.2)), (0.5, c(0.0, 0.0))])
        .map_err(err)?;
    all(vec![
        near("|P_t - e^(itz)|", exp_err, 0.0, 1e-12),
        near("CD residual", cd, 0.0, 1e-8),
        near("unitarity residual", u.residual, 0.0, 1e-5),
    ])
}

fn factorization() -> Check {
    let id = discretize_wiener_hopf(&ConvolutionKernel::identity(), 1.0, 6).map_err(err)?;
    let f_id = cholesky_factorize(&id.entries).map_err(err)?;
    let d = cholesky_factorize(&DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0]))).map_err(err)?;
    let w = discretize_wiener_hopf(&ConvolutionKernel::sakhnovich(0.75), 4.0, 128).map_err(err)?;
    let f = cholesky_factorize(&w.entries).map_err(err)?;
    let ev = w.eigenvalues();
    let fmu = fmu_factorize(&Measure::lebesgue(40.0), 2.0, 16, 48).map_err(err)?;
    all(vec![
        near("|A - I| for delta", (f_id.a - DMatrix::<f64>::identity(6, 6)).abs().max(), 0.0, 0.0),
        near("A(diag(4,1))[0,0]", d.a[(0, 0)], 2.0, 0.0),
        near("Sakhnovich residual", f.residual, 0.0, 1e-10),
        if ev[0] >= 0.25 - 5.0 * w.h && ev[ev.len() - 1] <= 1.0 + 5.0 * w.h {
            Ok(format!("spectrum [{:.4}, {:.4}]", ev[0], ev[ev.len() - 1]))
        } else {
            Err(format!("spectrum [{}, {}] escapes [0.25 - 5h, 1 + 5h]", ev[0], ev[ev.len() - 1]))
        },
        near("|A - I| for F_mu with dm", (fmu.a - DMatrix::<f64>::identity(16, 16)).abs().max(), 0.0, 1e-4),
    ])
}

fn outer() -> Check {
    let audit = sakhnovich_audit(0.75, &default_y_grid(1e-4)).map_err(err)?;
    all(vec![
        near("Pi for mu = 0", (outer_pi(0.0, c(0.3, 0.7)).map_err(err)? - 1.0).norm(), 0.0, 1e-14),
        near("|Pi(5 + 1e-4 i)|", outer_pi(0.5, c(5.0, 1e-4)).map_err(err)?.norm(), 1.0, 1e-3),
        near("limit for mu = 0.75", audit.limit, 2.0, 1e-3),
    ])
}

#[derive(Serialize)]
struct Line {
    name: &'static str,
    pass: bool,
    detail: String,
}

pub fn run(args: &SelftestArgs) -> Result<bool, Failure> {
    let checks: [(&'static str, fn() -> Check); 10] = [
        ("measures", measures),
        ("frame bounds", frame_bounds),
        ("sinc kernels", sinc_kernels),
        ("Toeplitz operators", toeplitz),
        ("canonical systems", canonical),
        ("weight recovery", recovery),
        ("Muckenhoupt", muckenhoupt),
        ("Krein functions", krein),
        ("factorization", factorization),
        ("outer function", outer),
    ];
    let mut lines = Vec::new();
    for (name, f) in checks {
        let (pass, detail) = match f() {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        eprintln!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        lines.push(Line { name, pass, detail });
    }
    let failed = lines.iter().filter(|l| !l.pass).count();
    let summary = format!("{} of {} groups passed", lines.len() - failed, lines.len());
    let report = Report::new("selftest", failed == 0, summary, args, json!({}), &lines)?;
    eprintln!("selftest: {}", report.summary);
    report.emit(args.report.as_deref())?;
    Ok(report.ok())
}
