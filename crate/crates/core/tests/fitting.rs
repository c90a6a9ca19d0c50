use cavity_cyclicity::fitting::*;
use cavity_cyclicity::presets;
use cavity_cyclicity::spin_model::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const TRIALS: usize = 200;

fn within(value: f64, truth: f64, sigma: f64, k: f64) -> bool {
    (value - truth).abs() <= k * sigma
}

fn relaxation_series(rng: &mut ChaCha8Rng, noise: f64) -> DataSeries {
    let (t1, c, p_ex) = (12.2, 390.0, 0.5);
    let t_rep = vec![1e-3, 5e-3, 15e-3, 50e-3, 200e-3];
    let n = Normal::new(0.0, noise).unwrap();
    let y: Vec<f64> = t_rep
        .iter()
        .map(|t| (1.0 + n.sample(rng)) / (1.0 / t1 + p_ex / (c * t)))
        .collect();
    let sigma = y.iter().map(|v| noise * v).collect();
    DataSeries::new(SeriesX::RepetitionTimeS(t_rep), y, Some(sigma)).unwrap()
}

#[test]
fn relaxation_recovery_and_coverage() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let first = fit_spin_relaxation(&relaxation_series(&mut rng, 0.1), 0.5).unwrap();
    assert!((first.t1_dark_s.unwrap() / 12.2 - 1.0).abs() < 0.15);
    assert!((first.cyclicity / 390.0 - 1.0).abs() < 0.15);

    let mut covered = 0;
    for _ in 0..TRIALS {
        let fit = fit_spin_relaxation(&relaxation_series(&mut rng, 0.1), 0.5).unwrap();
        let t1_ok = fit
            .t1_dark_s
            .zip(fit.t1_dark_sigma)
            .is_some_and(|(t, s)| within(t, 12.2, s, 3.0));
        if t1_ok && within(fit.cyclicity, 390.0, fit.cyclicity_sigma, 3.0) {
            covered += 1;
        }
    }
    assert!(covered as f64 >= 0.9 * TRIALS as f64, "{covered}/{TRIALS}");
}

#[test]
fn relaxation_residuals_are_orthogonal_to_the_design() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let data = relaxation_series(&mut rng, 0.2);
    let fit = fit_spin_relaxation(&data, 0.5).unwrap();
    let SeriesX::RepetitionTimeS(t) = &data.x else {
        unreachable!()
    };
    let sigma = data.sigma.as_ref().unwrap();
    let (mut s0, mut s1, mut scale) = (0.0, 0.0, 0.0f64);
    for i in 0..t.len() {
        let (x, r) = (1.0 / t[i], 1.0 / data.y[i]);
        let w = (data.y[i] * data.y[i] / sigma[i]).powi(2);
        let res = r - fit.intercept - fit.slope * x;
        s0 += w * res;
        s1 += w * res * x;
        scale = scale.max((w * r).abs()).max((w * r * x).abs());
    }
    assert!(
        s0.abs() < 1e-10 * scale && s1.abs() < 1e-10 * scale,
        "{s0} {s1}"
    );
}

struct C0Setup {
    params: IonCavityParams,
    coupling: CouplingMatrix,
    tensors: TensorPair,
    orientation: FieldOrientation,
}

fn c0_setup(c0: f64) -> C0Setup {
    let mut params = presets::ion_preset("ion2").unwrap().params;
    params.c0 = c0;
    C0Setup {
        params,
        coupling: presets::fitted_coupling(),
        tensors: presets::er_yso_site1(),
        orientation: presets::reference_orientation()
            .with_magnitude(112.0)
            .unwrap(),
    }
}

fn detuning_series(s: &C0Setup, rng: &mut ChaCha8Rng, noise: f64) -> DataSeries {
    let model = CyclicityModel::new(s.coupling, s.tensors.clone(), &s.params);
    let n = Normal::new(0.0, noise).unwrap();
    let d: Vec<f64> = [0.0, 0.5, 1.5, 3.0]
        .iter()
        .map(|k| k * s.params.kappa_hz)
        .collect();
    let y = d
        .iter()
        .map(|&v| model.detuned(&s.orientation, v).unwrap() * (1.0 + n.sample(rng)))
        .collect();
    DataSeries::new(SeriesX::DetuningHz(d), y, None).unwrap()
}

#[test]
fn c0_detuning_recovery_and_coverage() {
    let s = c0_setup(2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let opts = C0FitOptions::default();
    let first = fit_c0(
        &detuning_series(&s, &mut rng, 0.15),
        &s.params,
        &s.coupling,
        &s.tensors,
        &s.orientation,
        &opts,
    )
    .unwrap();
    assert!((0.5..=8.0).contains(&first.c0), "{}", first.c0);

    let mut covered = 0;
    for _ in 0..TRIALS {
        let data = detuning_series(&s, &mut rng, 0.15);
        let fit = fit_c0(
            &data,
            &s.params,
            &s.coupling,
            &s.tensors,
            &s.orientation,
            &opts,
        )
        .unwrap();
        if within(fit.c0, 2.0, fit.c0_sigma, 3.0) {
            covered += 1;
        }
    }
    assert!(covered as f64 >= 0.9 * TRIALS as f64, "{covered}/{TRIALS}");
}

#[test]
fn c0_from_field_magnitude_series() {
    let s = c0_setup(5.0);
    let model = CyclicityModel::new(s.coupling, s.tensors.clone(), &s.params);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = Normal::new(0.0, 0.1).unwrap();
    let b = vec![10.0, 30.0, 60.0, 100.0, 150.0, 200.0];
    let y = b
        .iter()
        .map(|&g| {
            let o = s.orientation.with_magnitude(g).unwrap();
            model.detuned(&o, 0.0).unwrap() * (1.0 + n.sample(&mut rng))
        })
        .collect();
    let data = DataSeries::new(SeriesX::FieldGauss(b), y, None).unwrap();
    let fit = fit_c0(
        &data,
        &s.params,
        &s.coupling,
        &s.tensors,
        &s.orientation,
        &C0FitOptions::default(),
    )
    .unwrap();
    assert!((fit.c0 - 5.0).abs() <= 2.0, "{}", fit.c0);
}

#[test]
fn c0_bootstrap_is_deterministic() {
    let s = c0_setup(2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let data = detuning_series(&s, &mut rng, 0.15);
    let opts = C0FitOptions {
        fit_purcell: false,
        bootstrap: Some(BootstrapOptions {
            resamples: 100,
            seed: 1,
        }),
    };
    let a = fit_c0(
        &data,
        &s.params,
        &s.coupling,
        &s.tensors,
        &s.orientation,
        &opts,
    )
    .unwrap();
    let b = fit_c0(
        &data,
        &s.params,
        &s.coupling,
        &s.tensors,
        &s.orientation,
        &opts,
    )
    .unwrap();
    assert_eq!(a, b);
    assert!(a.c0_sigma > 0.0 && a.c0_sigma.is_finite());
}

fn angle_series(rng: &mut ChaCha8Rng, noise: f64, scale: f64) -> DataSeries {
    let model = CyclicityModel::new(
        presets::fitted_coupling(),
        presets::er_yso_site1(),
        &presets::ion_preset("ion1").unwrap().params,
    );
    let n = Normal::new(0.0, noise).unwrap();
    let angles: Vec<(f64, f64)> = (0..12).map(|i| (15.0 * i as f64, 90.0)).collect();
    let y = angles
        .iter()
        .map(|&(p, t)| {
            let o = FieldOrientation::angles(p, t).unwrap();
            scale * model.resonant(&o).unwrap() * n.sample(rng).exp()
        })
        .collect();
    DataSeries::new(SeriesX::Orientation(angles), y, None).unwrap()
}

fn fit_angles(data: &DataSeries, opts: &AngleFitOptions) -> AngleFit {
    let p = presets::ion_preset("ion1").unwrap().params;
    fit_angle_model(
        data,
        &presets::er_yso_site1(),
        p.purcell_max,
        p.c0,
        presets::reference_orientation(),
        opts,
    )
    .unwrap()
}

#[test]
fn angle_recovery_and_coverage() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let opts = AngleFitOptions::default();
    let first = fit_angles(&angle_series(&mut rng, 0.1, 1.0), &opts);
    assert!((first.coupling.g_perp.norm() / 0.024 - 1.0).abs() < 0.2);

    let mut covered = 0;
    for _ in 0..TRIALS {
        let fit = fit_angles(&angle_series(&mut rng, 0.1, 1.0), &opts);
        let g = fit.report.get("g_perp_abs").unwrap();
        if within(g.value, 0.024, g.uncertainty, 3.0) {
            covered += 1;
        }
    }
    assert!(covered as f64 >= 0.9 * TRIALS as f64, "{covered}/{TRIALS}");
}

#[test]
fn angle_fit_ignores_overall_scale() {
    let opts = AngleFitOptions {
        fit_amplitude: true,
        bootstrap: None,
    };
    let base = fit_angles(
        &angle_series(&mut ChaCha8Rng::seed_from_u64(6), 0.1, 1.0),
        &opts,
    );
    let scaled = fit_angles(
        &angle_series(&mut ChaCha8Rng::seed_from_u64(6), 0.1, 3.7),
        &opts,
    );
    let (a, b) = (base.coupling.g_perp.norm(), scaled.coupling.g_perp.norm());
    assert!((a - b).abs() < 1e-6 * a, "{a} vs {b}");
    let shift = scaled.report.value("log_amplitude") - base.report.value("log_amplitude");
    assert!((shift - 3.7f64.ln()).abs() < 1e-6);
}
