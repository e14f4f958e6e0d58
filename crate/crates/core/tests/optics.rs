use fracsnap_core::optics::{
    device_point, emt_indices, optimize_stack, reference_stack, tmm_raw, FractalMixing, FreeParam, Grating, GratingKind,
    Layer, LayerStack, MaterialLibrary, OptimizeOptions, Polarization, RawLayer, ThicknessLink,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn lossy_layer() -> impl Strategy<Value = RawLayer> {
    (1.0f64..4.0, 0.0f64..2.0, 0.0f64..600.0).prop_map(|(n, k, d)| RawLayer { n: c(n, k), d })
}

fn lossless_layer() -> impl Strategy<Value = RawLayer> {
    (1.0f64..4.0, 1.0f64..600.0).prop_map(|(n, d)| RawLayer { n: c(n, 0.0), d })
}

fn pol() -> impl Strategy<Value = Polarization> {
    prop_oneof![Just(Polarization::Te), Just(Polarization::Tm)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn energy_is_conserved_in_lossy_stacks(
        layers in prop::collection::vec(lossy_layer(), 1..10),
        n_inc in 1.0f64..2.0,
        n_sub in 1.0f64..4.0,
        wavelength in 400.0f64..5000.0,
        aoi in 0.0f64..1.2,
        pol in pol(),
    ) {
        let r = tmm_raw(c(n_inc, 0.0), &layers, c(n_sub, 0.0), wavelength, pol, aoi).unwrap();
        let per_layer: f64 = r.layer_absorptance.iter().sum();
        prop_assert!((r.reflectance + r.transmittance + per_layer - 1.0).abs() < 1e-9);
        prop_assert!((per_layer - r.absorptance).abs() < 1e-12);
        for a in &r.layer_absorptance {
            prop_assert!(*a >= -1e-12);
        }
        prop_assert!((0.0..=1.0 + 1e-12).contains(&r.reflectance));
        prop_assert!((0.0..=1.0 + 1e-12).contains(&r.transmittance));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lossless_transmittance_is_reciprocal(
        layers in prop::collection::vec(lossless_layer(), 1..8),
        n_inc in 1.0f64..2.0,
        n_sub in 1.0f64..4.0,
        wavelength in 400.0f64..5000.0,
        aoi in 0.0f64..0.8,
        pol in pol(),
    ) {
        let fwd = tmm_raw(c(n_inc, 0.0), &layers, c(n_sub, 0.0), wavelength, pol, aoi).unwrap();
        // same tangential wavevector seen from the other side
        let s = n_inc * aoi.sin() / n_sub;
        prop_assume!(s < 0.99);
        let rev: Vec<RawLayer> = layers.iter().rev().copied().collect();
        let bwd = tmm_raw(c(n_sub, 0.0), &rev, c(n_inc, 0.0), wavelength, pol, s.asin()).unwrap();
        prop_assert!((fwd.transmittance - bwd.transmittance).abs() < 1e-10,
            "{} vs {}", fwd.transmittance, bwd.transmittance);
    }

    #[test]
    fn zero_thickness_layer_is_invisible(
        layers in prop::collection::vec(lossy_layer(), 1..8),
        at in 0usize..8,
        extra in (1.0f64..4.0, 0.0f64..2.0),
        wavelength in 400.0f64..5000.0,
        pol in pol(),
    ) {
        let base = tmm_raw(c(1.0, 0.0), &layers, c(3.5, 0.0), wavelength, pol, 0.3).unwrap();
        let mut more = layers.clone();
        more.insert(at.min(layers.len()), RawLayer { n: c(extra.0, extra.1), d: 0.0 });
        let ins = tmm_raw(c(1.0, 0.0), &more, c(3.5, 0.0), wavelength, pol, 0.3).unwrap();
        prop_assert!((base.reflectance - ins.reflectance).abs() < 1e-12);
        prop_assert!((base.transmittance - ins.transmittance).abs() < 1e-12);
        prop_assert!((base.absorptance - ins.absorptance).abs() < 1e-12);
    }
}

/// Quarter-wave layers map a load admittance `Y` to `n^2 / Y`.
#[test]
fn quarter_wave_mirror_matches_admittance_formula() {
    let (nh, nl, ns, lambda) = (2.1, 1.45, 1.52, 1550.0);
    for pairs in [1usize, 3, 6, 10] {
        let mut layers = Vec::new();
        for _ in 0..pairs {
            layers.push(RawLayer { n: c(nh, 0.0), d: lambda / (4.0 * nh) });
            layers.push(RawLayer { n: c(nl, 0.0), d: lambda / (4.0 * nl) });
        }
        let mut y = ns;
        for l in layers.iter().rev() {
            y = l.n.re * l.n.re / y;
        }
        let analytic = ((1.0 - y) / (1.0 + y)).powi(2);
        for pol in Polarization::BOTH {
            let r = tmm_raw(c(1.0, 0.0), &layers, c(ns, 0.0), lambda, pol, 0.0).unwrap();
            assert!((r.reflectance - analytic).abs() < 1e-6, "N={pairs}: {} vs {analytic}", r.reflectance);
        }
    }
    // closed form for the six-pair mirror
    let q = (nh / nl).powi(12) * ns;
    let closed = ((1.0 - q) / (1.0 + q)).powi(2);
    let mut layers = Vec::new();
    for _ in 0..6 {
        layers.push(RawLayer { n: c(nh, 0.0), d: lambda / (4.0 * nh) });
        layers.push(RawLayer { n: c(nl, 0.0), d: lambda / (4.0 * nl) });
    }
    let r = tmm_raw(c(1.0, 0.0), &layers, c(ns, 0.0), lambda, Polarization::Te, 0.0).unwrap();
    assert!((r.reflectance - closed).abs() < 1e-6);
}

#[test]
fn emt_end_points() {
    let metal = c(4.5, 4.0);
    let host = c(1.44, 0.0);
    let (p, t) = emt_indices(1.0, metal, host).unwrap();
    assert_eq!(p, metal * metal);
    assert_eq!(t, metal * metal);
    let (p, t) = emt_indices(0.0, metal, host).unwrap();
    assert_eq!(p, host * host);
    assert_eq!(t, host * host);
    let eps_m = c(-10.0, 2.0);
    let eps_h = c(2.1, 0.0);
    let (p, t) = emt_indices(0.5, eps_m.sqrt(), eps_h.sqrt()).unwrap();
    assert!((p - c(-3.95, 1.0)).norm() < 1e-12);
    assert!((t - 2.0 * eps_m * eps_h / (eps_m + eps_h)).norm() < 1e-12);
}

fn film_stack(fill_factor: f64, kind: GratingKind) -> LayerStack {
    let film = Layer {
        material: "nbtin".into(),
        thickness_nm: 9.0,
        grating: Some(Grating { fill_factor, kind, host: "sio2".into() }),
    };
    let layers = vec![Layer::plain("ta2o5", 180.0), Layer::plain("sio2", 260.0), film, Layer::plain("sio2", 260.0)];
    LayerStack::new("air", layers, "si").unwrap()
}

#[test]
fn grating_limits_match_homogeneous_layers() {
    let lib = MaterialLibrary::builtin();
    for (f, material) in [(1e-12, "sio2"), (1.0 - 1e-12, "nbtin")] {
        let mut plain = film_stack(0.5, GratingKind::Meander);
        plain.layers[2] = Layer::plain(material, 9.0);
        for kind in [GratingKind::Meander, GratingKind::Fractal] {
            let g = film_stack(f, kind);
            for lambda in [600.0, 1550.0, 4000.0] {
                for pol in Polarization::BOTH {
                    let a = device_point(&g, &lib, lambda, pol, FractalMixing::default()).unwrap();
                    let b = device_point(&plain, &lib, lambda, pol, FractalMixing::default()).unwrap();
                    assert!((a.reflectance - b.reflectance).abs() < 1e-9);
                    assert!((a.transmittance - b.transmittance).abs() < 1e-9);
                    assert!((a.a_total - b.a_total).abs() < 1e-9, "f={f} {kind:?} {lambda}");
                }
            }
        }
    }
}

/// Both mirror materials as one free thickness each, checked against an
/// exhaustive grid over the same box.
#[test]
fn two_parameter_optimum_matches_exhaustive_grid() {
    let lib = MaterialLibrary::builtin();
    let template = reference_stack(GratingKind::Fractal, 0.31);
    let g = template.grating_index().unwrap();
    let (defect_lo, defect_hi) = (g - 1, g + 1);
    let mirror = |m: &str| -> Vec<ThicknessLink> {
        template
            .layers
            .iter()
            .enumerate()
            .filter(|(i, l)| (*i < defect_lo || *i > defect_hi) && l.material == m)
            .map(|(layer, _)| ThicknessLink { layer, scale: 1.0, offset: 0.0 })
            .collect()
    };
    let (b_l, b_h) = ((200.0, 320.0), (130.0, 230.0));
    let params = [
        FreeParam { name: "low_nm".into(), links: mirror("sio2"), bounds: b_l },
        FreeParam { name: "high_nm".into(), links: mirror("ta2o5"), bounds: b_h },
    ];
    assert!(!params[0].links.is_empty() && !params[1].links.is_empty());
    let lambda = 1550.0;
    let eval = |tl: f64, th: f64| {
        let mut s = template.clone();
        for l in &params[0].links {
            s.layers[l.layer].thickness_nm = tl;
        }
        for l in &params[1].links {
            s.layers[l.layer].thickness_nm = th;
        }
        device_point(&s, &lib, lambda, Polarization::Te, FractalMixing::default()).unwrap().a_nanowire
    };
    let n = 101;
    let step = |b: (f64, f64)| (b.1 - b.0) / (n - 1) as f64;
    let (sl, sh) = (step(b_l), step(b_h));
    let mut best = (f64::NEG_INFINITY, 0, 0);
    for i in 0..n {
        for j in 0..n {
            let a = eval(b_l.0 + i as f64 * sl, b_h.0 + j as f64 * sh);
            if a > best.0 {
                best = (a, i, j);
            }
        }
    }
    let r = optimize_stack(&template, &lib, &params, lambda, Polarization::Te, FractalMixing::default(), &OptimizeOptions::default())
        .unwrap();
    assert!(r.achieved >= best.0 - 1e-9, "optimizer {} grid {}", r.achieved, best.0);
    let ci = ((r.params[0] - b_l.0) / sl).round() as i64;
    let cj = ((r.params[1] - b_h.0) / sh).round() as i64;
    assert!((ci - best.1 as i64).abs() <= 1 && (cj - best.2 as i64).abs() <= 1, "cell ({ci},{cj}) vs ({},{})", best.1, best.2);
}

#[test]
fn defect_optimum_near_reference_thickness() {
    let lib = MaterialLibrary::builtin();
    let template = reference_stack(GratingKind::Fractal, 0.31);
    let p = FreeParam::defect(&template, (300.0, 800.0)).unwrap();
    let r = optimize_stack(&template, &lib, &[p], 1550.0, Polarization::Te, FractalMixing::default(), &OptimizeOptions::default())
        .unwrap();
    assert!((r.params[0] - 529.0).abs() <= 30.0, "defect {}", r.params[0]);
    assert!(!r.degenerate);
}
