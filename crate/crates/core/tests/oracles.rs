mod common;

use cavsq::field::{phase_numeric_with, NumericMethod};
use cavsq::quad::QuadOptions;
use cavsq::{
    evolve, make_css, moments_from_band, phase_analytic, phase_numeric, squeezing_parameter,
    transient_field, BandEntry, DriveParams, EnsembleSpec, EvolveOptions, OverlapMode, PhaseBand,
    PhaseMode,
};
use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params(d: &Drive) -> DriveParams {
    DriveParams::new(d.kappa, d.delta, d.omega, d.beta0).unwrap()
}

fn random_drive(rng: &mut ChaCha8Rng) -> Drive {
    Drive::from_x(
        rng.gen_range(1.0..6.0),
        rng.gen_range(-4.0..4.0),
        rng.gen_range(0.0..1.0),
        rng.gen_range(0.0..2.0),
    )
}

#[test]
fn band_moments_match_dense_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for draw in 0..100 {
        let s = 0.5 * rng.gen_range(1..=12) as f64;
        let spec = EnsembleSpec::new(s).unwrap();
        let dim = spec.dim();
        // arbitrary entries with |weight| <= 1
        let offsets: Vec<Vec<BandEntry>> = (0..=2)
            .map(|d| {
                (0..dim.saturating_sub(d))
                    .map(|_| {
                        if d == 0 {
                            BandEntry::identity()
                        } else {
                            BandEntry {
                                phi: C::new(-rng.gen_range(0.0..2.0), rng.gen_range(-3.0..3.0)),
                                overlap: C::from_polar(
                                    rng.gen_range(0.2..1.0),
                                    rng.gen_range(-3.0..3.0),
                                ),
                            }
                        }
                    })
                    .collect()
            })
            .collect();
        let band = PhaseBand::from_offsets(offsets.clone());
        let got = moments_from_band(&spec, &make_css(&spec), &band).unwrap();

        // only |i - j| <= 2 enters first and second moments; fill the rest
        // with noise to show it is ignored
        let c = css_amplitudes(s);
        let rho = dense_rho(&c, |i, j| match j - i {
            d @ 0..=2 => offsets[d][i].weight(),
            _ => C::new(0.3, -0.7),
        });
        let want = dense_moments(&rho, s);
        let err = max_moment_diff(&want, &got);
        assert!(err < 1e-10 * (1.0 + s * s), "draw {draw}, S = {s}: {err:e}");

        if let Ok(r) = squeezing_parameter(&spec, &got) {
            let xi = xi2_eigen(&want, s);
            assert!(
                (r.xi2 - xi).abs() < 1e-10 * (1.0 + xi),
                "draw {draw}: {} vs {xi}",
                r.xi2
            );
        }
    }
}

#[test]
fn numeric_evolution_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let opts = EvolveOptions {
        phase: PhaseMode::Numeric,
        overlap: OverlapMode::On,
    };
    for draw in 0..20 {
        let s = 0.5 * rng.gen_range(1..=6) as f64;
        let d = random_drive(&mut rng);
        let t = rng.gen_range(0.0..10.0) / d.kappa;
        let spec = EnsembleSpec::new(s).unwrap();
        let got = evolve(&spec, &params(&d), t, opts).unwrap();
        let want = dense_moments(&brute_force_state(&d, s, t), s);
        let err = max_moment_diff(&want, &got.moments);
        assert!(err < 1e-10, "draw {draw}: {err:e}");
    }
}

#[test]
fn analytic_evolution_matches_steady_phase_route() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for draw in 0..50 {
        let s = 0.5 * rng.gen_range(1..=6) as f64;
        let d = random_drive(&mut rng);
        let t = rng.gen_range(0.0..40.0) / d.kappa;
        let spec = EnsembleSpec::new(s).unwrap();
        let got = evolve(&spec, &params(&d), t, EvolveOptions::default()).unwrap();
        let want = dense_moments(&steady_state(&d, s, t), s);
        let err = max_moment_diff(&want, &got.moments);
        assert!(err < 1e-10, "draw {draw}: {err:e}");
    }
}

#[test]
fn analytic_phase_is_steady_slope_times_t() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let d = random_drive(&mut rng);
        let m = rng.gen_range(-20..20) as f64;
        let n = m + rng.gen_range(1..=2) as f64;
        let t = rng.gen_range(0.0..50.0);
        let want = steady_slope(&d, m, n) * t;
        let got = phase_analytic(&params(&d), m, n, t);
        assert!(
            (got - want).norm() <= 1e-10 * (1.0 + want.norm()),
            "{got} vs {want}"
        );
    }
}

#[test]
fn closed_form_phase_matches_rk4() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let d = random_drive(&mut rng);
        let s = 2.0;
        let t = rng.gen_range(0.1..20.0) / d.kappa;
        let (alpha, phi) = integrate_phases(&d, s, t, rk4_steps(&d, s, t));
        let ms = projections(s);
        for i in 0..ms.len() {
            for j in i + 1..(i + 3).min(ms.len()) {
                let e = phase_numeric(&params(&d), ms[i], ms[j], t).unwrap();
                assert!((e.phi - phi[i][j]).norm() < 1e-9 * (1.0 + phi[i][j].norm()));
                let ov = overlap(alpha[i], alpha[j]);
                assert!((e.overlap - ov).norm() < 1e-10);
            }
        }
    }
}

#[test]
fn transient_field_matches_integration() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..200 {
        let d = random_drive(&mut rng);
        let m = rng.gen_range(-5..=5) as f64;
        let t = rng.gen_range(0.0..30.0) / d.kappa;
        // composite Gauss-Legendre of kappa beta0 exp(-a (t - s)) over [0, t]
        let a = d.rate(m);
        let gl = [
            (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
            (-0.538_469_310_105_683, 0.478_628_670_499_366_5),
            (0.0, 0.568_888_888_888_888_9),
            (0.538_469_310_105_683, 0.478_628_670_499_366_5),
            (0.906_179_845_938_664, 0.236_926_885_056_189_1),
        ];
        let panels = 400;
        let h = t / panels as f64;
        let mut sum = C::new(0.0, 0.0);
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            for (x, w) in gl {
                let u = mid + 0.5 * h * x;
                sum += (-a * (t - u)).exp() * (w * 0.5 * h);
            }
        }
        let want = sum * d.kappa * d.beta0;
        let got = transient_field(&params(&d), m, t).unwrap();
        assert!((got - want).norm() < 1e-10, "{got} vs {want}");
    }
}

#[test]
fn quadrature_and_closed_form_phases_agree() {
    let opts = QuadOptions::default();
    for (x, omega) in [(0.5, 0.2), (1.0, 0.05), (-3.0, 0.4)] {
        let p = DriveParams::with_x(4.0, x, omega, 1.0).unwrap();
        for (m, n) in [(-3.0, -2.0), (0.0, 2.0), (10.0, 11.0)] {
            for t in [0.01, 0.7, 12.0] {
                let a = phase_numeric_with(&p, m, n, t, NumericMethod::ClosedForm).unwrap();
                let b = phase_numeric_with(&p, m, n, t, NumericMethod::Quadrature(opts)).unwrap();
                assert!((a.phi - b.phi).norm() < 1e-10 * (1.0 + a.phi.norm()));
            }
        }
    }
}

#[test]
fn squeezing_parameter_matches_angle_scan() {
    let spec = EnsembleSpec::new(50.0).unwrap();
    for (x, omega, qx) in [(1.0, 0.2, 3.0), (1.0, 0.01, 8.0), (500.0, 0.2, 20.0)] {
        let p = DriveParams::with_x(4.0, x, omega, 1.0).unwrap();
        let t = cavsq::t_from_qx(&p, &spec, qx).unwrap();
        let ev = evolve(&spec, &p, t, EvolveOptions::default()).unwrap();
        let dm = DenseMoments {
            mean: ev.moments.mean,
            second: ev.moments.second,
        };
        let scan = xi2_angle_scan(&dm, 50.0);
        assert!(
            (ev.report.xi2 - scan).abs() < 1e-9,
            "{} vs {scan}",
            ev.report.xi2
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn state_invariants(
        twice in 1u32..=120,
        kappa in 0.5f64..8.0,
        x in -20.0f64..20.0,
        omega in 0.0f64..0.5,
        beta0 in 0.0f64..2.0,
        kt in 0.0f64..60.0,
        numeric in any::<bool>(),
    ) {
        let spec = EnsembleSpec::from_twice(twice).unwrap();
        let s = spec.spin();
        let p = DriveParams::with_x(kappa, x, omega, beta0).unwrap();
        let phase = if numeric { PhaseMode::Numeric } else { PhaseMode::Analytic };
        let band = PhaseBand::build(&spec, &p, kt / kappa, phase, OverlapMode::On).unwrap();
        for (d, row) in band.offsets().iter().enumerate() {
            for e in row {
                if d == 0 {
                    prop_assert!(e.phi.norm() < 1e-10);
                }
                prop_assert!(e.weight().norm() <= 1.0 + 1e-12);
            }
        }
        let amps = make_css(&spec);
        prop_assert!((amps.norm_sqr() - 1.0).abs() < 1e-10);
        let m = moments_from_band(&spec, &amps, &band).unwrap();
        prop_assert!((m.second[2][2] - s / 2.0).abs() <= 1e-10 * s);
        prop_assert!((m.casimir() - s * (s + 1.0)).abs() <= 1e-9 * s * s);
        if let Ok(r) = squeezing_parameter(&spec, &m) {
            prop_assert!(r.xi2 >= 0.0);
            prop_assert!(r.contrast <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn coherent_state_is_unsqueezed(twice in 1u32..=2000) {
        let spec = EnsembleSpec::from_twice(twice).unwrap();
        let p = DriveParams::with_x(4.0, 1.0, 0.2, 1.0).unwrap();
        let ev = evolve(&spec, &p, 0.0, EvolveOptions::default()).unwrap();
        prop_assert!((ev.report.xi2 - 1.0).abs() < 1e-9);
        prop_assert!((ev.report.contrast - 1.0).abs() < 1e-9);
    }
}
