use engine_model::{thermal_state, EngineParams};
use matrix_core::{hermitian_eigendecomposition, DensityOperator, OperatorMatrix, C64};
use propagation::{
    lindblad_generator, lindblad_samples, liouvillian_gap, propagate_lindblad, Bath,
    PropagationSettings,
};

fn gibbs(p: &EngineParams, bath: Bath) -> DensityOperator {
    thermal_state(&bath.hamiltonian(p), bath.temperature(p)).unwrap()
}

fn tilted_state(p: &EngineParams, bath: Bath) -> DensityOperator {
    // upper-level population 0.8 with a large coherence in the bath eigenbasis
    let e = hermitian_eigendecomposition(&bath.hamiltonian(p)).unwrap();
    let (lower, upper) = (e.vector(0), e.vector(1));
    let coh = C64::new(0.25, 0.2);
    let m = &(&OperatorMatrix::outer(&upper, &upper).scale_real(0.8)
        + &OperatorMatrix::outer(&lower, &lower).scale_real(0.2))
        + &(&OperatorMatrix::outer(&upper, &lower).scale(coh)
            + &OperatorMatrix::outer(&lower, &upper).scale(coh.conj()));
    DensityOperator::new(m).unwrap()
}

#[test]
fn gibbs_state_is_stationary() {
    let p = EngineParams::default();
    for bath in [Bath::Hot, Bath::Cold] {
        let rho = gibbs(&p, bath);
        for duration in [0.5, 5.0, 20.0] {
            let out = propagate_lindblad(bath, &p, &rho, duration, &Default::default()).unwrap();
            assert!(
                out.matrix().max_abs_diff(rho.matrix()) <= 1e-8,
                "{bath:?} {duration}"
            );
        }
        let g = lindblad_generator(&p, bath).unwrap();
        let image = g.apply(rho.matrix().as_slice());
        assert!(image.iter().all(|z| z.norm() <= 1e-9), "{bath:?}");
    }
}

#[test]
fn zero_rate_leaves_only_coherent_rotation() {
    let p = EngineParams {
        gamma_h: 0.0,
        gamma_c: 0.0,
        ..EngineParams::default()
    };
    for bath in [Bath::Hot, Bath::Cold] {
        let rho = tilted_state(&p, bath);
        let out = propagate_lindblad(bath, &p, &rho, 3.0, &Default::default()).unwrap();
        let u = matrix_core::hermitian_exponential(&bath.hamiltonian(&p), 3.0).unwrap();
        assert!(out.matrix().max_abs_diff(&rho.matrix().conjugate_by(&u)) <= 1e-10);
        // with the bath off, populations in the bath eigenbasis are exactly conserved
        let h = bath.hamiltonian(&p);
        assert!((out.expectation(&h) - rho.expectation(&h)).abs() <= 1e-12);
    }
}

#[test]
fn zero_duration_is_identity() {
    let p = EngineParams::default();
    let rho = tilted_state(&p, Bath::Hot);
    let out = propagate_lindblad(Bath::Hot, &p, &rho, 0.0, &Default::default()).unwrap();
    assert_eq!(out, rho);
}

#[test]
fn matches_two_level_closed_form() {
    let p = EngineParams::default();
    for bath in [Bath::Hot, Bath::Cold] {
        let rho = tilted_state(&p, bath);
        let e = hermitian_eigendecomposition(&bath.hamiltonian(&p)).unwrap();
        let (lower, upper) = (e.vector(0), e.vector(1));
        let gap = e.values[1] - e.values[0];
        let n = bath.occupation(&p);
        let gamma = bath.rate(&p);
        let lambda = liouvillian_gap(&p, bath);
        let p_eq = n / (2.0 * n + 1.0);
        let t = 5.0;
        let out = propagate_lindblad(bath, &p, &rho, t, &Default::default()).unwrap();

        let elem = |m: &OperatorMatrix, a: &[C64], b: &[C64]| {
            let mb = m.apply(b);
            a.iter().zip(&mb).map(|(x, y)| x.conj() * y).sum::<C64>()
        };
        let pu0 = elem(rho.matrix(), &upper, &upper).re;
        let pu = p_eq + (pu0 - p_eq) * (-gamma * (2.0 * n + 1.0) * t).exp();
        let c0 = elem(rho.matrix(), &upper, &lower);
        let c = c0 * C64::new(0.0, -gap * t).exp() * (-lambda * t).exp();
        assert!(
            (elem(out.matrix(), &upper, &upper).re - pu).abs() <= 1e-6,
            "{bath:?}"
        );
        assert!(
            (elem(out.matrix(), &upper, &lower) - c).norm() <= 1e-6,
            "{bath:?}"
        );
    }
}

#[test]
fn contraction_towards_gibbs_at_the_liouvillian_gap() {
    let p = EngineParams::default();
    for bath in [Bath::Hot, Bath::Cold] {
        let target = gibbs(&p, bath);
        let samples = lindblad_samples(
            bath,
            &p,
            &tilted_state(&p, bath),
            30.0,
            300,
            &Default::default(),
        )
        .unwrap();
        let distances: Vec<f64> = samples
            .iter()
            .map(|(_, rho)| rho.trace_distance(&target))
            .collect();
        for w in distances.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{bath:?}");
        }
        for (_, rho) in &samples {
            assert!((rho.matrix().trace().re - 1.0).abs() <= 1e-9);
        }
        // late-time log-linear fit; coherences dominate and decay at λ
        let tail: Vec<(f64, f64)> = samples[150..]
            .iter()
            .zip(&distances[150..])
            .map(|((t, _), d)| (*t, d.ln()))
            .collect();
        let n = tail.len() as f64;
        let mt = tail.iter().map(|x| x.0).sum::<f64>() / n;
        let my = tail.iter().map(|x| x.1).sum::<f64>() / n;
        let slope = tail.iter().map(|x| (x.0 - mt) * (x.1 - my)).sum::<f64>()
            / tail.iter().map(|x| (x.0 - mt).powi(2)).sum::<f64>();
        let lambda = liouvillian_gap(&p, bath);
        assert!(
            (-slope - lambda).abs() <= 0.02 * lambda,
            "{bath:?} {slope} vs {lambda}"
        );
        // C = d(0) suffices: d(t)e^{λt} never grows
        for ((t, _), d) in samples.iter().zip(&distances) {
            assert!(
                d * (lambda * t).exp() <= distances[0] * (1.0 + 1e-6),
                "{bath:?} t = {t}"
            );
        }
    }
}

#[test]
fn negative_duration_rejected() {
    let p = EngineParams::default();
    assert!(propagate_lindblad(
        Bath::Cold,
        &p,
        &gibbs(&p, Bath::Cold),
        -1.0,
        &Default::default()
    )
    .is_err());
}

#[test]
fn settings_validation() {
    let bad = PropagationSettings {
        lindblad_step: 0.0,
        ..PropagationSettings::default()
    };
    assert!(bad.validate().is_err());
    let bad = PropagationSettings {
        substeps_per_unit_time: 0,
        ..PropagationSettings::default()
    };
    assert!(bad.validate().is_err());
    assert!(PropagationSettings::default().validate().is_ok());
}

#[test]
fn long_isochores_keep_unit_trace() {
    // ~1.6e6 RK4 steps; repeated squaring alone drifts past 1e-10
    let p = EngineParams {
        gamma_h: 0.005,
        gamma_c: 0.005,
        ..EngineParams::default()
    };
    for bath in [Bath::Hot, Bath::Cold] {
        let rho = propagate_lindblad(
            bath,
            &p,
            &tilted_state(&p, bath),
            1600.0,
            &Default::default(),
        )
        .unwrap();
        assert!((rho.matrix().trace().re - 1.0).abs() <= 1e-13, "{bath:?}");
        let relaxed = (-liouvillian_gap(&p, bath) * 1600.0).exp();
        assert!(
            rho.trace_distance(&gibbs(&p, bath)) <= 2.0 * relaxed,
            "{bath:?}"
        );
    }
}
