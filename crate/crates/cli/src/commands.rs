//! One function per subcommand. Each returns whether the run passed its
//! numerical checks.

use crate::io::{read_weight, write_csv, write_matrix, write_weight};
use crate::report::Report;
use crate::{
    A2Args, FactorizeArgs, Failure, Family, KernelKind, KreinArgs, Method, Prop1Args, RecoverArgs, SakhnovichArgs,
    VerifyArgs,
};
use anyhow::{anyhow, Context};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use specweight::inverse_spectral::{recover_weight, verify_spectral, Probe, RecoverOptions};
use specweight::krein_functions::{christoffel_darboux, krein_from_theta};
use specweight::measures::{build_measure, Measure, MeasureSpec};
use specweight::muckenhoupt::{a2_norm, lemma1_bounds, prop1_certificate, reverse_holder_probe, ScanFamily};
use specweight::toeplitz_pw::assemble_toeplitz;
use specweight::wiener_hopf::{
    cholesky_factorize, default_y_grid, discretize_wiener_hopf, fmu_factorize, fmu_factorize_symbol,
    reverse_factorize, sakhnovich_audit, ConvolutionKernel, PiecewiseSymbol, TriangularFactor,
};

type Outcome = Result<bool, Failure>;

const CD_TOL: f64 = 1e-5;
const FACTOR_TOL: f64 = 1e-10;
const FMU_TOL: f64 = 1e-2;

fn load_measure(path: &std::path::Path) -> Result<(Measure, MeasureSpec), Failure> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let spec = MeasureSpec::from_toml_str(&text)?;
    Ok((build_measure(&spec)?, spec))
}

fn positive(name: &str, v: f64) -> Result<(), Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Failure::Config(anyhow!("--{name} must be positive, got {v}")))
    }
}

fn finish(report: Report, path: Option<&std::path::Path>) -> Outcome {
    eprintln!("{}: {}", report.command, report.summary);
    report.emit(path)?;
    Ok(report.ok())
}

pub fn recover(args: &RecoverArgs) -> Outcome {
    positive("a", args.a)?;
    let (mu, spec) = load_measure(&args.measure)?;
    let opts = RecoverOptions { smoothing: args.smooth, ..RecoverOptions::new(args.cells, args.basis) };
    let rep = recover_weight(&mu, args.a, &opts)?;
    if let Some(p) = &args.out {
        write_weight(p, &rep.r_grid, &rep.w, Some(&rep.mass))?;
    }
    if let Some(p) = &args.dump_gram {
        write_matrix(p, &assemble_toeplitz(&mu, args.a, opts.basis_at(args.a, args.a))?.gram)?;
    }
    let d = &rep.diagnostics;
    let ok = d.nonpositive_cells.is_empty() && rep.is_monotone();
    let (lo, hi) = rep.w.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), w| (l.min(*w), h.max(*w)));
    let summary = format!(
        "w in [{lo:.6}, {hi:.6}] on {} cells, drift {:.2e}{}",
        rep.w.len(),
        d.drift.unwrap_or(f64::NAN),
        if d.under_resolved { " (under-resolved)" } else { "" }
    );
    let report = Report::new(
        "recover",
        ok,
        summary,
        &json!({ "args": args, "measure": spec }),
        json!({ "clamp": 1e-9, "drift": 1e-4, "drift_observed": d.drift }),
        &json!({
            "a": rep.a,
            "mass_at_a": rep.mass[rep.mass.len() - 1],
            "w_min": lo,
            "w_max": hi,
            "monotone": rep.is_monotone(),
            "diagnostics": d,
        }),
    )?;
    finish(report, args.report.as_deref())
}

fn random_probes(seed: u64, a: f64, k: usize) -> Vec<Probe> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k)
        .map(|_| {
            let r = a * rng.random_range(0.2..1.0);
            let l = Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-1.0..1.0));
            let z = Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-1.0..1.0));
            Probe::new(r, l, z)
        })
        .collect()
}

pub fn verify(args: &VerifyArgs) -> Outcome {
    let (mu, spec) = load_measure(&args.measure)?;
    let (h, drift) = match &args.weight {
        Some(p) => (read_weight(p)?, None),
        None => {
            positive("a", args.a)?;
            let rep = recover_weight(&mu, args.a, &RecoverOptions::new(args.cells, args.basis))?;
            (rep.weight_profile()?, rep.diagnostics.drift)
        }
    };
    if args.probes == 0 {
        return Err(Failure::Config(anyhow!("--probes must be at least 1")));
    }
    let v = verify_spectral(&mu, &h, &random_probes(args.seed, h.a(), args.probes))?;
    let ok = v.max_residual <= args.tol;
    let summary = format!("max residual {:.3e} over {} probes (tol {:.1e})", v.max_residual, args.probes, args.tol);
    let report = Report::new(
        "verify",
        ok,
        summary,
        &json!({ "args": args, "measure": spec }),
        json!({ "residual": args.tol, "drift_observed": drift }),
        &v,
    )?;
    finish(report, args.report.as_deref())
}

pub fn a2(args: &A2Args) -> Outcome {
    let w = read_weight(&args.weight)?;
    let family = match args.family {
        Family::Auto => ScanFamily::Auto,
        Family::CellAligned => ScanFamily::CellAligned,
        Family::AnchoredDyadic => ScanFamily::AnchoredDyadic,
    };
    let rep = a2_norm(&w, family);
    let holder = match args.p_max {
        Some(p_max) if p_max >= 1.0 => {
            let steps = ((p_max - 1.0) / 0.25).floor() as usize;
            let grid: Vec<f64> = (0..=steps).map(|k| 1.0 + 0.25 * k as f64).collect();
            Some(reverse_holder_probe(&w, &grid, 2.0)?)
        }
        Some(p) => return Err(Failure::Config(anyhow!("--p-max must be at least 1, got {p}"))),
        None => None,
    };
    let summary = format!(
        "A2 >= {:.6} on [{:.4}, {:.4}] ({} intervals)",
        rep.a2_norm, rep.argmax.0, rep.argmax.1, rep.intervals_scanned
    );
    let report = Report::new("a2", true, summary, args, json!({ "reverse_holder_c_max": 2.0 }), &json!({
        "a2": rep,
        "reverse_holder": holder,
    }))?;
    finish(report, args.report.as_deref())
}

pub fn prop1(args: &Prop1Args) -> Outcome {
    let w = read_weight(&args.weight)?;
    if args.radii == 0 {
        return Err(Failure::Config(anyhow!("--radii must be at least 1")));
    }
    let a = w.a();
    let r_grid: Vec<f64> = (1..=args.radii).map(|k| a * k as f64 / args.radii as f64).collect();
    let cert = prop1_certificate(&w, args.n_max, &r_grid)?;
    let lemma1 = lemma1_bounds(&w, a, cert.b1, cert.b2)?;
    let ok = cert.satisfied && cert.step_gap_holds && lemma1.holds;
    let summary = format!(
        "b1 {:.4}, b2 {:.4}, A2 {:.4} vs 2^{:.1}: {}",
        cert.b1,
        cert.b2,
        cert.a2_actual,
        cert.log2_bound,
        if ok { "certified" } else { "violated" }
    );
    let report = Report::new("prop1", ok, summary, args, json!({ "step_gap": "6 ln b" }), &json!({
        "r_grid": r_grid,
        "certificate": cert,
        "lemma1": lemma1,
    }))?;
    finish(report, args.report.as_deref())
}

pub fn krein(args: &KreinArgs) -> Outcome {
    let h = read_weight(&args.weight)?;
    let fams: Vec<_> = args.z.iter().map(|&z| krein_from_theta(&h, z)).collect();
    if let Some(p) = &args.out {
        let rows = fams.iter().flat_map(|f| {
            (0..f.t_grid.len()).map(move |k| {
                vec![f.z.re, f.z.im, f.t_grid[k], f.p[k].re, f.p[k].im, f.p_star[k].re, f.p_star[k].im]
            })
        });
        write_csv(p, &["z_re", "z_im", "t", "p_re", "p_im", "p_star_re", "p_star_im"], rows)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut cd = Vec::with_capacity(args.probes);
    for _ in 0..args.probes {
        let r = 2.0 * h.a() * rng.random_range(0.05..1.0);
        let z = Complex64::new(rng.random_range(-4.0..4.0), rng.random_range(-1.0..1.0));
        let l = Complex64::new(rng.random_range(-4.0..4.0), rng.random_range(-1.0..1.0));
        let rep = christoffel_darboux(&h, r, z, l)?;
        cd.push(json!({ "r": r, "z": z, "lambda": l, "residual": rep.residual }));
    }
    let worst = cd.iter().filter_map(|c| c["residual"].as_f64()).fold(0.0, f64::max);
    let ok = worst <= CD_TOL;
    let ends: Vec<_> = fams
        .iter()
        .map(|f| json!({ "z": f.z, "p_end": f.p[f.p.len() - 1], "p_star_end": f.p_star[f.p_star.len() - 1] }))
        .collect();
    let summary = format!("{} spectral points on [0, {}], CD residual {:.2e}", args.z.len(), 2.0 * h.a(), worst);
    let report = Report::new("krein", ok, summary, args, json!({ "christoffel_darboux": CD_TOL }), &json!({
        "values_at_end": ends,
        "christoffel_darboux": cd,
    }))?;
    finish(report, args.report.as_deref())
}

fn kernel_of(args: &FactorizeArgs) -> ConvolutionKernel {
    match (args.kernel, args.symbol) {
        (Some(KernelKind::Delta), _) => ConvolutionKernel::identity(),
        (Some(KernelKind::Sinc), _) => ConvolutionKernel::sakhnovich(args.mu),
        (Some(KernelKind::Exp), _) => ConvolutionKernel::exponential(args.c),
        (None, _) => ConvolutionKernel::from_symbol(PiecewiseSymbol::sakhnovich(args.mu)),
    }
}

fn factor_json(f: &TriangularFactor) -> serde_json::Value {
    json!({ "order": f.order, "residual": f.residual, "chain_preserved": f.chain_preserved })
}

pub fn factorize(args: &FactorizeArgs) -> Outcome {
    positive("a", args.a)?;
    if args.n == 0 {
        return Err(Failure::Config(anyhow!("--n must be at least 1")));
    }
    if !(0.0..1.0).contains(&args.mu) {
        return Err(Failure::Config(anyhow!("--mu must lie in [0, 1), got {}", args.mu)));
    }
    let w = discretize_wiener_hopf(&kernel_of(args), args.a, args.n)?;
    if let Some(p) = &args.dump_gram {
        write_matrix(p, &w.entries)?;
    }
    let ev = w.eigenvalues();
    let spectrum = (ev[0], ev[ev.len() - 1]);
    let (ok, summary, body, a) = match args.method {
        Method::Cholesky | Method::Reverse => {
            let f = if matches!(args.method, Method::Cholesky) {
                cholesky_factorize(&w.entries)?
            } else {
                reverse_factorize(&w.entries)?
            };
            let ok = f.residual <= FACTOR_TOL && f.chain_preserved;
            let summary = format!("n {}, residual {:.2e}, upper triangular {}", args.n, f.residual, f.chain_preserved);
            (ok, summary, factor_json(&f), f.a)
        }
        Method::Fmu => {
            let f = match (args.kernel, args.symbol) {
                (Some(KernelKind::Delta), _) => fmu_factorize(&Measure::lebesgue(40.0), args.a, args.n, args.basis)?,
                (Some(KernelKind::Sinc), _) | (None, Some(_)) => {
                    fmu_factorize_symbol(&PiecewiseSymbol::sakhnovich(args.mu), args.a, args.n, args.basis)?
                }
                _ => {
                    return Err(Failure::Config(anyhow!(
                        "--method fmu needs a piecewise-constant symbol (--kernel delta|sinc or --symbol sakh)"
                    )))
                }
            };
            let ok = f.residual <= FMU_TOL && f.triangularity_defect <= FMU_TOL;
            let summary = format!(
                "n {}, residual {:.2e}, triangularity defect {:.2e}",
                args.n, f.residual, f.triangularity_defect
            );
            let body = json!({
                "order": "adjoint_first",
                "residual": f.residual,
                "triangularity_defect": f.triangularity_defect,
                "column_norm_gap": f.column_norm_gap,
                "collocation_gap": f.collocation_gap,
                "weight_min": f.weight.weights().iter().copied().fold(f64::INFINITY, f64::min),
                "weight_max": f.weight.weights().iter().copied().fold(f64::NEG_INFINITY, f64::max),
            });
            (ok, summary, body, f.a)
        }
    };
    if let Some(p) = &args.out {
        write_matrix(p, &a)?;
    }
    let tol = if matches!(args.method, Method::Fmu) { FMU_TOL } else { FACTOR_TOL };
    let report = Report::new("factorize", ok, summary, args, json!({ "residual": tol }), &json!({
        "n": args.n,
        "h": w.h,
        "index_order": "row and column k is the cell [k h, (k+1) h); upper triangular preserves L2[0, r]",
        "spectrum": [spectrum.0, spectrum.1],
        "factor": body,
    }))?;
    finish(report, args.report.as_deref())
}

pub fn sakhnovich(args: &SakhnovichArgs) -> Outcome {
    if !(args.mu > 0.0 && args.mu < 1.0) {
        return Err(Failure::Config(anyhow!("--mu must lie in (0, 1), got {}", args.mu)));
    }
    positive("ymin", args.ymin)?;
    if args.ymin >= 0.1 {
        return Err(Failure::Config(anyhow!("--ymin must be below 0.1")));
    }
    let rep = sakhnovich_audit(args.mu, &default_y_grid(args.ymin))?;
    if let Some(p) = &args.out {
        write_csv(p, &["y", "pi"], rep.table.iter().map(|&(y, v)| vec![y, v]))?;
    }
    let verdict = if rep.indistinguishable {
        "indistinguishable"
    } else if rep.pass {
        "PASS"
    } else {
        "FAIL"
    };
    let summary = format!(
        "limit {:.6}; 1/sqrt(1-mu) = {:.6} (off {:.1e}), sqrt(1-mu) = {:.6} (off {:.1e}): {verdict}",
        rep.limit, rep.expected, rep.distance_expected, rep.rejected, rep.distance_rejected
    );
    let report = Report::new("sakhnovich", rep.pass, summary, args, json!({ "limit": rep.tolerance, "separation": 10.0 * rep.tolerance }), &rep)?;
    finish(report, args.report.as_deref())
}
