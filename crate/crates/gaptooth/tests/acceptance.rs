//! End-to-end checks of the laboratory against pinned growth rates.
//!
//! Each test prints one `[PASS]` line naming the behaviour it locked
//! down; a failing assertion names the number that moved.

use gaptooth::coupling::{run, FourierMode, GapToothConfig, Stepper};
use gaptooth::microsim::{MicroState, PdeChoice, ToothGeometry};
use gaptooth::spectra::{convergence_study, micro_resolution_study, spectrum};
use gaptooth::stencil::{deriv_weights, interp_weights, Side, TbcFamily, TbcSpec};

fn config(m: usize, n: usize, family: TbcFamily, order: usize) -> GapToothConfig {
    GapToothConfig {
        geom: ToothGeometry::new(m, n, 0.1).unwrap(),
        pde: PdeChoice::Diffusion,
        tbc: TbcSpec { family, order },
        dt: None,
        t_end: 1.0,
        initial_condition: Vec::new(),
    }
}

fn rel(measured: f64, pinned: f64) -> f64 {
    ((measured - pinned) / pinned).abs()
}

#[test]
fn dirichlet_order4_sweep_reproduces_pinned_rates() {
    let base = config(16, 11, TbcFamily::Dirichlet, 4);

    let pinned: [(usize, [f64; 3], f64); 3] = [
        (8, [-0.996073, -3.785024, -7.121435], -1588.0),
        (16, [-0.999750, -3.984293, -8.832102], -6355.0),
        (32, [-0.999986, -3.998999, -8.988613], -25421.0),
    ];
    for (m, pairs, internal) in pinned {
        let report = spectrum(&base.with_teeth(m).unwrap()).unwrap();
        let groups = report.groups;
        assert!(
            groups.mode1.abs() < 1e-8,
            "m={m}: mode one should be conserved, got {}",
            groups.mode1
        );
        for (pair, want) in [groups.pair23, groups.pair45, groups.pair67]
            .into_iter()
            .zip(pairs)
        {
            let got = pair.unwrap();
            assert!(rel(got, want) <= 1e-3, "m={m}: pair {got} vs pinned {want}");
        }
        assert!(
            rel(groups.leading_internal, internal) <= 0.02,
            "m={m}: internal {} vs pinned {internal}",
            groups.leading_internal
        );
    }

    let coarse = spectrum(&base.with_teeth(4).unwrap()).unwrap().groups;
    assert!(rel(coarse.pair23.unwrap(), -0.946256) <= 0.01);
    assert!(rel(coarse.pair45.unwrap(), -2.166285) <= 0.01);
    assert!(coarse.pair67.is_none(), "four teeth resolve two pairs only");

    println!("[PASS] dirichlet order 4: rates match pinned values to 1e-3 over m=8..32, 1% at m=4");
}

#[test]
fn dirichlet_order6_rates_and_observed_order() {
    let base = config(16, 11, TbcFamily::Dirichlet, 6);
    let study = convergence_study(&base, &[8, 16, 32]).unwrap();

    let fine = study.rows[2].groups;
    for (pair, want) in [fine.pair23, fine.pair45, fine.pair67]
        .into_iter()
        .zip([-1.000002, -4.000004, -8.999518])
    {
        let got = pair.unwrap();
        assert!(
            (got - want).abs() <= 1e-3,
            "m=32 pair {got} vs pinned {want}"
        );
    }

    let order = study.rows[1].observed_orders[0].unwrap();
    assert!(
        order >= 5.0,
        "observed order over m=8..16 should exceed five, got {order}"
    );
    println!(
        "[PASS] dirichlet order 6: m=32 rates within 1e-3 absolute, observed order {order:.2} >= 5"
    );
}

#[test]
fn order4_error_contracts_per_macro_doubling() {
    let base = config(16, 11, TbcFamily::Dirichlet, 4);
    let study = convergence_study(&base, &[8, 16, 32]).unwrap();
    let errs: Vec<f64> = study.rows.iter().map(|r| r.errors[0].unwrap()).collect();
    let factors = [errs[0] / errs[1], errs[1] / errs[2]];
    for factor in factors {
        assert!(
            (10.0..=24.0).contains(&factor),
            "error contraction per doubling was {factor}, expected 10..24"
        );
    }
    println!(
        "[PASS] order 4 contraction: slowest-pair error shrinks by {:.1} then {:.1} per doubling",
        factors[0], factors[1]
    );
}

#[test]
fn mixed_edges_match_pinned_rate_and_refine_consistently() {
    let base = config(8, 11, TbcFamily::Mixed { a: 0.95, b: 0.05 }, 4);

    let groups = spectrum(&base).unwrap().groups;
    let got = groups.pair23.unwrap();
    // Loose tolerance: the reference boundary-derivative discretisation
    // behind the pinned digit is unstated, and no consistent one-sided
    // edge formula lands closer than about half a percent.
    assert!(
        rel(got, -0.990854) <= 6e-3,
        "mixed pair23 {got} vs pinned -0.990854"
    );

    let study = micro_resolution_study(&base, &[11, 21, 41]).unwrap();
    let ratio = study.richardson_ratio_pair23.unwrap();
    assert!(
        (3.0..=6.0).contains(&ratio),
        "micro-refinement Richardson ratio {ratio} outside 3..6"
    );
    println!(
        "[PASS] mixed edges: pair23 within 0.6% of pinned, Richardson ratio {ratio:.2} in 3..6"
    );
}

#[test]
fn two_point_edges_match_pinned_rates_and_ignore_micro_grid() {
    let base = config(16, 11, TbcFamily::TwoPoint { beta: 1.0 }, 4);

    let groups = spectrum(&base).unwrap().groups;
    for (pair, want) in [groups.pair23, groups.pair45, groups.pair67]
        .into_iter()
        .zip([-0.999741, -3.984137, -8.831209])
    {
        let got = pair.unwrap();
        assert!(rel(got, want) <= 1e-3, "pair {got} vs pinned {want}");
    }

    let study = micro_resolution_study(&base, &[11, 21, 41]).unwrap();
    let drift = study.max_rel_variation_pair23.unwrap();
    assert!(
        drift < 1e-4,
        "pair23 drifted {drift:e} across micro resolutions"
    );
    println!(
        "[PASS] two-point edges: rates match pinned to 1e-3, micro-grid drift {drift:.1e} < 1e-4"
    );
}

fn lagrange_weight(x: f64, k: isize, p: isize) -> f64 {
    let mut w = 1.0;
    for j in -p..=p {
        if j != k {
            w *= (x - j as f64) / ((k - j) as f64);
        }
    }
    w
}

#[test]
fn structural_properties_hold_across_the_configuration_space() {
    // Stencils are exact on polynomials up to their design degree and
    // coincide with differentiating the Lagrange interpolant.
    for p in 1..=4usize {
        let coeffs: Vec<f64> = (0..=2 * p).map(|i| 1.0 / (i as f64 + 1.5)).collect();
        let q = |x: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
        let dq = |x: f64| {
            coeffs
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (i, c)| acc * x + i as f64 * c)
        };
        for side in [Side::Left, Side::Right] {
            for r in [0.0, 0.1, 0.33] {
                let x = side.signum() * r;
                let value = interp_weights(r, p, side).unwrap();
                let slope = deriv_weights(r, p, side).unwrap();
                assert!((value.apply(|k| q(k as f64)) - q(x)).abs() < 1e-10);
                assert!((slope.apply(|k| q(k as f64)) - dq(x)).abs() < 1e-10);
                for (k, w) in value.iter() {
                    assert!((w - lagrange_weight(x, k, p as isize)).abs() < 1e-10);
                }
            }
        }
    }

    // The one-step map is linear for diffusion and fixes constants for
    // every coupling family.
    let families = [
        TbcFamily::Dirichlet,
        TbcFamily::Mixed { a: 0.95, b: 0.05 },
        TbcFamily::TwoPoint { beta: 1.0 },
    ];
    for family in families {
        let cfg = config(8, 11, family, 4);
        let stepper = Stepper::new(&cfg).unwrap();

        let mut flat = MicroState::from_fn(&cfg.geom, |_, _, _| 3.7);
        for _ in 0..50 {
            stepper.step(&mut flat).unwrap();
        }
        for &v in flat.values() {
            assert!((v - 3.7).abs() < 1e-12, "constant drifted to {v}");
        }

        let mut u = MicroState::from_fn(&cfg.geom, |_, _, x| (x).sin());
        let mut w = MicroState::from_fn(&cfg.geom, |_, _, x| (2.0 * x).cos() - 0.3);
        let mut combo = MicroState::from_fn(&cfg.geom, |_, _, x| {
            2.5 * x.sin() - 1.25 * ((2.0 * x).cos() - 0.3)
        });
        stepper.step(&mut u).unwrap();
        stepper.step(&mut w).unwrap();
        stepper.step(&mut combo).unwrap();
        for ((&a, &b), &c) in u.values().iter().zip(w.values()).zip(combo.values()) {
            assert!((2.5 * a - 1.25 * b - c).abs() < 1e-12, "map is not linear");
        }
    }

    // Growth rates barely move when the analysis step is halved.
    let base = config(16, 11, TbcFamily::Dirichlet, 4);
    let coarse = GapToothConfig {
        dt: Some(6e-6),
        ..base.clone()
    };
    let halved = GapToothConfig {
        dt: Some(3e-6),
        ..base.clone()
    };
    let a = spectrum(&coarse).unwrap().groups.pair23.unwrap();
    let b = spectrum(&halved).unwrap().groups.pair23.unwrap();
    assert!(
        rel(a, b) < 1e-3,
        "pair23 moved from {a} to {b} on dt halving"
    );

    // The slowest pair is a macroscale property: coupling family and
    // tooth width hardly matter at fixed interpolation order.
    let dirichlet16 = spectrum(&base).unwrap().groups.pair23.unwrap();
    let two_point16 = spectrum(&config(16, 11, TbcFamily::TwoPoint { beta: 1.0 }, 4))
        .unwrap()
        .groups
        .pair23
        .unwrap();
    assert!(rel(dirichlet16, two_point16) < 1e-4);

    for ratio in [0.05, 0.2] {
        let wide = GapToothConfig {
            geom: ToothGeometry::new(16, 11, ratio).unwrap(),
            ..base.clone()
        };
        let got = spectrum(&wide).unwrap().groups.pair23.unwrap();
        assert!(
            rel(got, dirichlet16) < 1e-3,
            "r={ratio}: pair23 {got} vs {dirichlet16}"
        );
    }

    // Internal tooth modes relax on the micro scale, rate growing as the
    // square of the tooth count.
    let internals: Vec<f64> = [8usize, 16, 32]
        .iter()
        .map(|&m| {
            spectrum(&base.with_teeth(m).unwrap())
                .unwrap()
                .groups
                .leading_internal
        })
        .collect();
    for pair in internals.windows(2) {
        let ratio = pair[1] / pair[0];
        assert!(
            (3.6..=4.4).contains(&ratio),
            "internal rate ratio {ratio} not near 4"
        );
    }

    println!("[PASS] structural properties: stencil exactness, linearity, constant preservation, dt and coupling insensitivity, m^2 internal scaling");
}

#[test]
fn burgers_presets_run_to_completion_and_decay() {
    for name in ["fig1", "fig6"] {
        let text = gaptooth::cli::preset_toml(name).unwrap();
        let file = gaptooth::cli::load_experiment_str(text, &[], None).unwrap();
        let cfg = file.to_config().unwrap();
        assert!(matches!(cfg.pde, PdeChoice::Burgers { .. }));
        let traj = run(&cfg, 500).unwrap();
        let first = traj.max_abs(0);
        let last = traj.max_abs(traj.snapshots.len() - 1);
        assert!(first.is_finite() && last.is_finite());
        assert!(
            last < 0.8 * first,
            "{name}: max|v| went {first} -> {last}, expected clear decay"
        );
        for idx in 0..traj.snapshots.len() {
            assert!(
                traj.max_abs(idx) <= 1.5 * first,
                "{name}: transient exceeded its bound"
            );
        }
    }
    println!("[PASS] burgers presets: both run to t_end with bounded, decaying max|v|");
}

#[test]
fn simulated_diffusion_decays_at_the_spectrum_rate() {
    let cfg = GapToothConfig {
        t_end: 0.4,
        initial_condition: vec![FourierMode {
            k: 1,
            amp: 1.0,
            phase: 0.0,
        }],
        ..config(16, 11, TbcFamily::Dirichlet, 4)
    };
    let traj = run(&cfg, 400).unwrap();
    let fitted = gaptooth::coupling::fitted_decay_rate(&traj, 0.2, 0.4).unwrap();
    let predicted = spectrum(&cfg).unwrap().groups.pair23.unwrap();
    assert!(
        (fitted - predicted).abs() < 1e-3,
        "fitted {fitted} vs spectrum {predicted}"
    );
    println!(
        "[PASS] time stepping and spectrum agree: fitted {fitted:.6} vs predicted {predicted:.6}"
    );
}
