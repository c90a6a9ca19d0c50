use cavity_cyclicity::fitting::{
    fit_angle_model, fit_c0, fit_spin_relaxation, AngleFitOptions, BootstrapOptions, C0FitOptions,
    DataSeries,
};

use crate::error::CliError;
use crate::output::Output;
use crate::scenario::Resolved;
use crate::FitKind;

pub struct FitFlags {
    pub bootstrap: Option<usize>,
    pub seed: u64,
    pub fit_amplitude: bool,
    pub fit_purcell: bool,
}

pub fn fit(
    kind: FitKind,
    data: &DataSeries,
    resolved: &Resolved,
    flags: &FitFlags,
    out: &mut Output,
) -> Result<(), CliError> {
    let bootstrap = flags.bootstrap.map(|resamples| BootstrapOptions {
        resamples,
        seed: flags.seed,
    });
    let p = &resolved.params;
    match kind {
        FitKind::Angle => {
            let opts = AngleFitOptions {
                fit_amplitude: flags.fit_amplitude,
                bootstrap,
            };
            let fit = fit_angle_model(
                data,
                &resolved.tensors,
                p.purcell_max,
                p.c0,
                resolved.coupling.reference,
                &opts,
            )?;
            out.json("fit_angle.json", &fit)?;
            println!(
                "|g_perp| = {:.5} ± {:.5}",
                fit.coupling.g_perp.norm(),
                fit.report.uncertainty("g_perp_abs")
            );
        }
        FitKind::C0 => {
            let opts = C0FitOptions {
                fit_purcell: flags.fit_purcell,
                bootstrap,
            };
            let fit = fit_c0(
                data,
                p,
                &resolved.coupling,
                &resolved.tensors,
                &resolved.scenario.orientation,
                &opts,
            )?;
            out.json("fit_c0.json", &fit)?;
            println!("C0 = {:.2} ± {:.2}", fit.c0, fit.c0_sigma);
        }
        FitKind::Relaxation => {
            let fit = fit_spin_relaxation(data, resolved.sim.p_ex)?;
            out.json("fit_relaxation.json", &fit)?;
            match fit.t1_dark_s.zip(fit.t1_dark_sigma) {
                Some((t, s)) => println!(
                    "T1,dark = {t:.3} ± {s:.3} s, C = {:.1} ± {:.1}",
                    fit.cyclicity, fit.cyclicity_sigma
                ),
                None => println!(
                    "T1,dark unresolved, C = {:.1} ± {:.1}",
                    fit.cyclicity, fit.cyclicity_sigma
                ),
            }
        }
    }
    Ok(())
}
