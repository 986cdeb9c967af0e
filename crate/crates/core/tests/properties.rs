use num_complex::Complex64;
use proptest::prelude::*;
use specweight::canonical_system::{db_kernel, theta_at, transfer_matrix, WeightProfile};
use specweight::krein_functions::{christoffel_darboux, f_mu_unitarity};
use specweight::measures::{symmetrize, Measure, RawMeasure};
use specweight::muckenhoupt::{a2_norm, ScanFamily};
use specweight::toeplitz_pw::rk_norm_sq;
use specweight::wiener_hopf::{cholesky_factorize, discretize_wiener_hopf, ConvolutionKernel};

fn cz(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn arb_weight(max_cells: usize) -> impl Strategy<Value = WeightProfile> {
    (0.5f64..3.0, prop::collection::vec(-2.0f64..2.0, 1..max_cells))
        .prop_map(|(a, phi)| WeightProfile::uniform(a, phi.iter().map(|p| p.exp()).collect()).unwrap())
}

fn arb_measure() -> impl Strategy<Value = Measure> {
    (
        0.5f64..2.0,
        prop::collection::vec((0.0f64..3.0, 0.1f64..3.0), 0..3),
        prop::collection::vec((0.1f64..10.0, 0.01f64..1.0), 0..3),
    )
        .prop_map(|(bg, bumps, atoms)| {
            let mut pieces = Vec::new();
            let mut at = 0.0;
            for (gap, v) in bumps {
                pieces.push((at, at + gap + 0.25, v));
                at += gap + 0.25;
            }
            let mu = if pieces.is_empty() { Measure::constant(bg, 40.0).unwrap() } else { Measure::piecewise(&pieces, bg).unwrap() };
            atoms.iter().fold(mu, |m, &(t, w)| m.with_atom(t, w).unwrap())
        })
}

fn probe_fn(k: f64) -> impl Fn(f64) -> Complex64 {
    move |x| cz((k * x).cos(), (0.5 * k * x).sin()) / (1.0 + x * x)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn integrate_is_linear(mu in arb_measure(), k1 in 0.0f64..3.0, k2 in 0.0f64..3.0, al in -2.0f64..2.0, be in -2.0f64..2.0) {
        let (f, g) = (probe_fn(k1), probe_fn(k2));
        let lhs = mu.integrate(|x| f(x) * al + g(x) * be);
        let rhs = mu.integrate(&f) * al + mu.integrate(&g) * be;
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }

    #[test]
    fn scaled_lebesgue_frame_bounds(c in 0.1f64..5.0, a in 0.5f64..4.0) {
        let fb = Measure::lebesgue(40.0).scaled(c).estimate_frame_bounds(a, 24).unwrap();
        prop_assert!((fb.c1 - c).abs() <= 1e-6 && (fb.c2 - c).abs() <= 1e-6);
    }

    #[test]
    fn symmetrize_is_idempotent(
        pts in prop::collection::vec((-5.0f64..5.0, 0.0f64..3.0), 2..6),
        bg in 0.1f64..2.0,
        atoms in prop::collection::vec((-6.0f64..6.0, 0.01f64..1.0), 0..3),
    ) {
        let mut pts = pts;
        pts.sort_by(|p, q| p.0.total_cmp(&q.0));
        pts.dedup_by(|p, q| (p.0 - q.0).abs() < 1e-3);
        let raw = RawMeasure {
            nodes: pts.iter().map(|p| p.0).collect(),
            values: pts.iter().map(|p| p.1).collect(),
            background: bg,
            atoms,
        };
        let once = symmetrize(&raw).unwrap();
        let twice = symmetrize(&once.to_raw()).unwrap();
        for k in [0.0, 0.7, 2.1] {
            let (a, b) = (once.integrate(probe_fn(k)), twice.integrate(probe_fn(k)));
            prop_assert!((a - b).norm() <= 1e-12, "k {}: {} vs {}", k, a, b);
        }
        for x in [-4.3, -1.0, 0.0, 0.2, 3.3] {
            prop_assert!((once.sigma(x) - twice.sigma(x)).abs() <= 1e-12);
        }
    }

    #[test]
    fn atoms_only_add_mass(mu in arb_measure(), t in 0.0f64..8.0, m in 0.01f64..2.0, k in 0.0f64..3.0) {
        let more = mu.clone().with_atom(t, m).unwrap();
        let f = probe_fn(k);
        let q0 = mu.integrate(|x| cz(f(x).norm_sqr(), 0.0)).re;
        let q1 = more.integrate(|x| cz(f(x).norm_sqr(), 0.0)).re;
        prop_assert!(q1 >= q0);
        let b0 = mu.estimate_frame_bounds(1.0, 16).unwrap();
        let b1 = more.estimate_frame_bounds(1.0, 16).unwrap();
        prop_assert!(b1.c2 >= b0.c2 - 1e-12);
        let r0 = rk_norm_sq(&mu, 1.0, 16).unwrap();
        let r1 = rk_norm_sq(&more, 1.0, 16).unwrap();
        prop_assert!(r1 <= r0 + 1e-12);
    }

    #[test]
    fn rk_norm_grows_with_r(mu in arb_measure(), r in 0.2f64..2.0, dr in 0.05f64..1.0) {
        let n = |r: f64| (24.0 * r).ceil() as usize + 8;
        let small = rk_norm_sq(&mu, r, n(r)).unwrap();
        let large = rk_norm_sq(&mu, r + dr, n(r + dr)).unwrap();
        prop_assert!(large >= small - 1e-10);
    }

    #[test]
    fn transfer_is_unimodular(w in 0.01f64..100.0, d in 0.0f64..2.0, re in -10.0f64..10.0, im in -2.0f64..2.0) {
        let m = transfer_matrix(w, d, cz(re, im));
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        prop_assert!((det - 1.0).norm() <= 1e-12 * m[0][0].norm().max(1.0).powi(2));
    }

    #[test]
    fn cumulative_transfer_is_unimodular(h in arb_weight(12), re in -5.0f64..5.0, im in -1.0f64..1.0) {
        let z = cz(re, im);
        let mut m = [[cz(1.0, 0.0), cz(0.0, 0.0)], [cz(0.0, 0.0), cz(1.0, 0.0)]];
        for i in 0..h.cells() {
            let t = transfer_matrix(h.weights()[i], h.width(i), z);
            m = [
                [t[0][0] * m[0][0] + t[0][1] * m[1][0], t[0][0] * m[0][1] + t[0][1] * m[1][1]],
                [t[1][0] * m[0][0] + t[1][1] * m[1][0], t[1][0] * m[0][1] + t[1][1] * m[1][1]],
            ];
        }
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let scale = m.iter().flatten().map(|x| x.norm()).fold(1.0, f64::max);
        prop_assert!((det - 1.0).norm() <= 1e-12 * scale * scale);
        let x = theta_at(&h, h.a(), cz(0.0, 0.0));
        prop_assert!((x[0] - 1.0).norm() < 1e-14 && x[1].norm() < 1e-14);
    }

    #[test]
    fn kernel_is_hermitian(h in arb_weight(10), fr in 0.1f64..1.0, l in (-4.0f64..4.0, -1.0f64..1.0), z in (-4.0f64..4.0, -1.0f64..1.0)) {
        let r = fr * h.a();
        let (l, z) = (cz(l.0, l.1), cz(z.0, z.1));
        let k1 = db_kernel(&h, r, l, z);
        let k2 = db_kernel(&h, r, z, l).conj();
        prop_assert!((k1 - k2).norm() <= 1e-10 * (1.0 + k1.norm()));
        prop_assert!(db_kernel(&h, r, cz(l.re, 0.0), cz(l.re, 0.0)).re >= 0.0);
    }

    #[test]
    fn a2_symmetry_and_scaling(h in arb_weight(24), c in 0.01f64..100.0) {
        let base = a2_norm(&h, ScanFamily::Auto).a2_norm;
        prop_assert!(base >= 1.0 - 1e-12);
        let inv = WeightProfile::new(h.grid().to_vec(), h.weights().iter().map(|w| 1.0 / w).collect()).unwrap();
        let scaled = WeightProfile::new(h.grid().to_vec(), h.weights().iter().map(|w| c * w).collect()).unwrap();
        prop_assert!((a2_norm(&inv, ScanFamily::Auto).a2_norm - base).abs() <= 1e-12 * base);
        prop_assert!((a2_norm(&scaled, ScanFamily::Auto).a2_norm - base).abs() <= 1e-12 * base);
    }

    #[test]
    fn gram_follows_min_law(h in arb_weight(8), k1 in 1usize..8, k2 in 1usize..8, l in (-3.0f64..3.0, -0.5f64..0.5), z in (-3.0f64..3.0, -0.5f64..0.5)) {
        let m = h.cells();
        let (k1, k2) = (k1.min(m), k2.min(m));
        let step = 2.0 * h.a() / m as f64;
        let (r1, r2) = (k1 as f64 * step, k2 as f64 * step);
        let (l, z) = (cz(l.0, l.1), cz(z.0, z.1));
        let u = f_mu_unitarity(&h, &Measure::lebesgue(40.0), &[(r1, l), (r2, z)]).unwrap();
        let cd = christoffel_darboux(&h, r1.min(r2), z, l).unwrap();
        prop_assert!((u.time_gram[0][1] - cd.rhs).norm() <= 1e-8 * (1.0 + cd.rhs.norm()));
    }

    #[test]
    fn cholesky_preserves_chain(mu in 0.0f64..0.95, a in 0.5f64..6.0, extra in 0usize..40) {
        let n = (2.0 * a).ceil() as usize + extra;
        let w = discretize_wiener_hopf(&ConvolutionKernel::sakhnovich(mu), a, n).unwrap();
        let f = cholesky_factorize(&w.entries).unwrap();
        prop_assert!(f.chain_preserved);
        prop_assert!(f.residual <= 1e-12);
    }
}
