//! Acceptance gate: one PASS/FAIL line per criterion, with the tolerance
//! that decides it. Exits non-zero when any criterion fails.
//!
//! Run with `cargo test -p vaporlight --test acceptance`.

use num_complex::Complex64;
use std::path::PathBuf;
use std::time::Instant;

use vaporlight::dispersion::{
    analytic_susceptibility, eit_window, group_delay, propagate_pulse, MediumParams, Pulse,
    SusceptibilitySpectrum, TransferFunction,
};
use vaporlight::harness::{evaluate, fit_transparency_window, run_sweep, ExperimentKind, Scenario, SweepConfig};
use vaporlight::lambda_atom::{
    coherence_susceptibility, coherence_susceptibility_component, evolve_recorded, steady_state,
    AtomSpec, Circular, DensityMatrix, DriveConfig, Envelope, Level, Trajectory,
};
use vaporlight::maxwell_bloch::{simulate, storage_efficiency, MbOptions, SignalPulse, StorageProtocol};
use vaporlight::units::{carrier_from_wavelength, hz_to_rad, milligauss_to_tesla, per_cm3_to_per_m3, rad_to_hz, wavenumber};
use vaporlight::vapor::{
    isotope_density, kappa_from_density, killian_density, rabi_from_power, zeeman_shift, ConstantsTable, Isotope,
};

const LAMBDA: f64 = 794.979e-9;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn config(name: &str) -> SweepConfig {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "configs", &format!("{name}.toml")].iter().collect();
    SweepConfig::from_path(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn non_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0])
}

fn non_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] >= w[0])
}

/// Interior local maxima of `y` (strictly above both neighbours).
fn local_maxima(y: &[f64]) -> usize {
    y.windows(3).filter(|w| w[1] > w[0] && w[1] > w[2]).count()
}

fn c01_density() -> Outcome {
    let lo = killian_density(338.0).unwrap();
    let hi = killian_density(363.0).unwrap();
    outcome(
        rel(lo, 0.46e12) <= 0.10 && rel(hi, 3.0e12) <= 0.10,
        format!("338 K -> {lo:.3e}, 363 K -> {hi:.3e} cm^-3 (tol 10%)"),
    )
}

fn c02_rabi() -> Outcome {
    let d = &ConstantsTable::builtin().defaults;
    let strong = rad_to_hz(rabi_from_power(2.5e-3, 5e-3, d.saturation_intensity_w_m2, d.gamma()).unwrap());
    let weak = rad_to_hz(rabi_from_power(0.25e-3, 5e-3, d.saturation_intensity_w_m2, d.gamma()).unwrap());
    outcome(
        rel(strong, 12e6) <= 0.20 && rel(weak, 3.8e6) <= 0.20,
        format!("2.5 mW -> {:.2} MHz, 0.25 mW -> {:.2} MHz (tol 20%)", strong * 1e-6, weak * 1e-6),
    )
}

fn c03_window() -> Outcome {
    let n = isotope_density(killian_density(360.15).unwrap(), Isotope::Rb87);
    let gamma = AtomSpec::default().gamma;
    let p = MediumParams::from_density(n, LAMBDA, gamma, hz_to_rad(12e6), 0.04).unwrap();
    let k = wavenumber(LAMBDA);
    let hi = eit_window(&p, k);
    let lo = eit_window(&p.with_omega_c(hz_to_rad(3.8e6)), k);
    let ratio = hi / lo;
    let abs_hz = rad_to_hz(hi);
    outcome(
        (ratio - 9.97).abs() <= 0.01 && (30e3..=600e3).contains(&abs_hz),
        format!("ratio {ratio:.4} (9.97 +/- 0.01), window {:.1} kHz (in [30, 600] kHz)", abs_hz * 1e-3),
    )
}

fn c04_zeeman() -> Outcome {
    let z = rad_to_hz(zeeman_shift(milligauss_to_tesla(2.0)).unwrap());
    outcome(rel(z, 2.8e3) <= 0.02, format!("2 mG -> {z:.1} Hz (2.8 kHz +/- 2%)"))
}

fn c05_dark_state() -> Outcome {
    let atom = AtomSpec::default().with_gamma0(0.0);
    let om = c(0.5 * atom.gamma, 0.0);
    let drive = DriveConfig::constant(om, om, 0.0, 0.0);
    let rho = steady_state(&atom, &drive).unwrap();
    let density = per_cm3_to_per_m3(1e11);
    let kappa = kappa_from_density(1e11, LAMBDA);
    let chi = coherence_susceptibility(&rho, &atom, &drive, 0.0, density, LAMBDA).unwrap();
    let worst = chi.iter().map(|x| x.norm()).fold(0.0, f64::max) / kappa;
    let ee = rho.population(Level::Excited);
    outcome(
        ee <= 1e-6 && worst <= 1e-8,
        format!("rho_ee = {ee:.2e} (<= 1e-6), |chi|/kappa = {worst:.2e} (<= 1e-8)"),
    )
}

fn c06_analytic_numeric() -> Outcome {
    let atom = AtomSpec::default().with_gamma0(0.0);
    let g = atom.gamma;
    let omega_c = 0.8 * g;
    let probe = 1e-3 * omega_c;
    let kappa = kappa_from_density(1e11, LAMBDA);
    let params = MediumParams::for_atom(kappa, &atom, omega_c, 0.04, carrier_from_wavelength(LAMBDA)).unwrap();
    let mut worst = 0.0f64;
    for k in (-30..=30).filter(|k| *k != 0) {
        let delta = 0.1 * g * k as f64;
        let drive = DriveConfig::constant(c(probe, 0.0), c(omega_c, 0.0), 0.0, 0.0).with_raman_detuning(delta);
        let rho = steady_state(&atom, &drive).unwrap();
        let chi = coherence_susceptibility_component(&rho, &atom, &drive, 0.0, Circular::Plus, per_cm3_to_per_m3(1e11), LAMBDA)
            .unwrap();
        let reference = analytic_susceptibility(delta, &params);
        worst = worst.max((chi - reference).norm() / reference.norm());
    }
    let spectrum = SusceptibilitySpectrum::analytic(&params, 0.02 * params.omega_c, 401).unwrap();
    let delay = spectrum.delay_discrepancy(&params).unwrap();
    outcome(
        worst <= 0.05 && delay <= 1e-6,
        format!("susceptibility {worst:.1e} (<= 5e-2), group delay {delay:.1e} (<= 1e-6)"),
    )
}

fn c07_broadening() -> Outcome {
    let cfg = config("fig2a");
    let out = run_sweep(&cfg, None).unwrap();
    let width = out.column("width_ratio").unwrap();
    let delay = out.column("delay_s").unwrap();
    let n = delay.len();
    let last_change = rel(delay[n - 1], delay[n - 2]);
    let fit = fit_transparency_window(&out.to_csv());
    let fitted = fit.as_ref().map(|f| f.window_hz).unwrap_or(f64::NAN);
    outcome(
        out.exit_code() == 0
            && non_increasing(&width)
            && width[n - 1] <= 1.05
            && non_decreasing(&delay)
            && last_change <= 0.05
            && rel(fitted, 50e3) <= 0.10,
        format!(
            "width ratios {:?} (non-increasing, last <= 1.05); delays non-decreasing, last step {:.2}% (<= 5%); \
             fitted window {:.2} kHz (50 kHz +/- 10%)",
            width.iter().map(|w| (w * 1e3).round() / 1e3).collect::<Vec<_>>(),
            100.0 * last_change,
            fitted * 1e-3
        ),
    )
}

fn storage_eta(base: &Scenario, parameter: &str, value: f64) -> f64 {
    let s = base.clone().apply(parameter, value).unwrap();
    evaluate(ExperimentKind::Storage, &s).unwrap()[0]
}

fn c08_storage() -> Outcome {
    let cfg = config("fig2b");
    let base = Scenario::from_config(&cfg).unwrap();

    // Qualitative run: no field, no ground decoherence, 30 us pulse.
    let s = base.clone().apply("duration_us", 30.0).unwrap().apply("gamma0_hz", 0.0).unwrap();
    let protocol = s.storage_protocol().unwrap();
    let opts = s.mb_options();
    let run = simulate(&protocol, &s.cell, &s.atom, 0.0, &opts).unwrap();
    let leak = simulate(&s.leakage_protocol().unwrap(), &s.cell, &s.atom, 0.0, &opts).unwrap();
    let e = storage_efficiency(&run.trace, &protocol, &leak.trace).unwrap();
    let t_on = protocol.control_on();
    let (t_post, _) = run.trace.signal_peak(t_on, t_on + protocol.post_window()).unwrap();
    let (_, pre) = run.trace.signal_peak(0.0, protocol.control_off).unwrap();
    let recovered = e.eta > 0.0 && t_post >= t_on && pre > 0.0;

    let durations = [2.0, 5.0, 10.0, 30.0, 100.0];
    let eta_d: Vec<f64> = durations.iter().map(|&d| storage_eta(&base, "duration_us", d)).collect();
    let at30 = base.clone().apply("duration_us", 30.0).unwrap();
    let eta_g = [e.eta, eta_d[3], storage_eta(&at30, "gamma0_hz", 2000.0)];
    let eta_t = [storage_eta(&at30, "storage_us", 50.0), eta_d[3], storage_eta(&at30, "storage_us", 200.0)];
    let in_range = eta_d.iter().chain(&eta_g).chain(&eta_t).all(|x| (0.0..=1.0).contains(x));
    outcome(
        recovered && non_decreasing(&eta_d) && in_range && non_increasing(&eta_g) && non_increasing(&eta_t),
        format!(
            "recovered pulse eta {:.3} peaking {:.1} us after re-on; eta(duration) {:?}; \
             eta(gamma0 = 0, 500, 2000 Hz) {:?}; eta(T = 50, 130, 200 us) {:?} \
             (monotone, within [0, 1])",
            e.eta,
            (t_post - t_on) * 1e6,
            round3(&eta_d),
            round3(&eta_g),
            round3(&eta_t)
        ),
    )
}

fn round3(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| (x * 1e3).round() / 1e3).collect()
}

fn c09_rotation() -> Outcome {
    let cfg = config("fig3ai");
    let out = run_sweep(&cfg, None).unwrap();
    let b = out.values();
    let sig = out.column("signal_ideal").unwrap();
    let theta = out.column("delta_theta_rad").unwrap();
    let n = b.len();
    let mut even = 0.0f64;
    let mut odd = 0.0f64;
    for i in 0..n {
        let j = n - 1 - i;
        assert_eq!(b[i], -b[j], "symmetric field grid");
        even = even.max((sig[i] - sig[j]).abs());
        odd = odd.max((theta[i] + theta[j]).abs() / theta[i].abs().max(1e-300));
    }

    let mut with_signal = Scenario::from_config(&cfg).unwrap();
    with_signal.signal_fraction = 0.05;
    let at = |mg: f64| {
        evaluate(ExperimentKind::RotationSteady, &with_signal.clone().apply("b_mg", mg).unwrap()).unwrap()[3]
    };
    let (p, m) = (at(5.0), at(-5.0));
    let asym = (p - m).abs() / p.max(m);
    outcome(
        out.exit_code() == 0 && even <= 1e-8 && odd <= 1e-9 && asym > 1e-3,
        format!(
            "|I(B) - I(-B)|/I_total <= {even:.1e} (<= 1e-8); odd rotation mismatch {odd:.1e} (<= 1e-9); \
             with signal I(+5 mG)/I(-5 mG) differ by {:.0}%",
            100.0 * asym
        ),
    )
}

fn c10_sir() -> Outcome {
    let cfg = config("fig3bi");
    let out = run_sweep(&cfg, None).unwrap();
    let b = out.values();
    let sir = out.column("sir_peak").unwrap();
    let zero = b.iter().position(|x| *x == 0.0).unwrap();
    let ten = |v: f64| sir[b.iter().position(|x| *x == v).unwrap()];
    let neg_max = local_maxima(&sir[..=zero]);
    let pos_max = local_maxima(&sir[zero..]);
    outcome(
        out.exit_code() == 0 && sir[zero] <= 1e-10 && ten(10.0) > 1e-6 && ten(-10.0) > 1e-6 && neg_max >= 2 && pos_max >= 2,
        format!(
            "B = 0 -> {:.1e} (<= 1e-10 of control); B = +/-10 mG -> {:.3e}, {:.3e} (> 0); \
             local maxima {neg_max} (B < 0), {pos_max} (B > 0) (>= 2 each)",
            sir[zero],
            ten(-10.0),
            ten(10.0)
        ),
    )
}

fn c11_delay_density() -> Outcome {
    let cfg = config("fig4a");
    let out = run_sweep(&cfg, None).unwrap();
    let n = out.column("density_cm3").unwrap();
    let t = out.column("delay_s").unwrap();
    let span = n[n.len() - 1] / n[0];
    // Least-squares line through the origin.
    let slope = n.iter().zip(&t).map(|(a, b)| a * b).sum::<f64>() / n.iter().map(|a| a * a).sum::<f64>();
    let worst = n.iter().zip(&t).map(|(a, b)| rel(*b, slope * a)).fold(0.0, f64::max);
    outcome(
        out.exit_code() == 0 && span >= 10.0 && worst <= 0.05,
        format!("density span {span:.1}x (>= 10x), worst deviation from proportional fit {:.1e} (<= 5e-2)", worst),
    )
}

fn max_entry_diff(a: &Trajectory, b: &Trajectory) -> f64 {
    a.states
        .iter()
        .zip(&b.states)
        .map(|(x, y)| x.max_abs_diff(y))
        .fold(0.0, f64::max)
}

fn c12_hygiene() -> Outcome {
    // Step halving on a driven atom.
    let atom = AtomSpec::default();
    let g = atom.gamma;
    let mut drive = DriveConfig::constant(c(0.0, 0.0), c(0.6 * g, 0.0), 0.4 * g, 1e-7);
    drive.omega_plus = Envelope::function(move |t| {
        let x = (t - 0.5e-6) / 0.15e-6;
        c(1.5 * g * (-x * x).exp(), 0.2 * g * (-x * x).exp())
    });
    let rho0 = DensityMatrix::ground_mixture(0.3, 0.7).unwrap();
    let dt = 1e-6 / (1e-6 * 50.0 * 1.6 * g).ceil();
    let runs: Vec<Trajectory> = [1usize, 2, 4]
        .iter()
        .map(|k| evolve_recorded(&rho0, &atom, &drive, (0.0, 1e-6), dt / *k as f64, 8 * k).unwrap())
        .collect();
    let ratio = max_entry_diff(&runs[0], &runs[1]) / max_entry_diff(&runs[1], &runs[2]);
    let states_ok = runs.iter().flat_map(|r| &r.states).all(|s| s.check().is_ok());

    // Vacuum pass-through.
    let cfg = config("fig2b");
    let s = Scenario::from_config(&cfg).unwrap();
    let protocol = StorageProtocol::slowing(SignalPulse::new(5e-6, 0.1 * s.control_rabi), s.control_rabi, 30e-6);
    let opts = MbOptions { density_override: Some(0.0), ..s.mb_options() };
    let vac = simulate(&protocol, &s.cell, &s.atom, 0.0, &opts).unwrap();
    let scale = vac.input.iter().map(|f| f.0.norm().max(f.1.norm())).fold(0.0, f64::max);
    let vacuum = vac
        .input
        .iter()
        .zip(&vac.output)
        .map(|(a, b)| (a.0 - b.0).norm().max((a.1 - b.1).norm()))
        .fold(0.0, f64::max)
        / scale;

    // Medium run: invariants are checked inside the integrator; energy must not grow.
    let sim = simulate(&s.storage_protocol().unwrap(), &s.cell, &s.atom, 0.0, &s.mb_options()).unwrap();
    let mb_energy = sim.energy_out <= sim.energy_in * (1.0 + 1e-9);

    // Parseval bound on FFT propagations across the fig2a durations.
    let p = Scenario::from_config(&config("fig2a")).unwrap().medium_params().unwrap();
    let parseval = [2e-6, 5e-6, 10e-6, 30e-6, 100e-6].iter().all(|&d| {
        let pulse = Pulse::gaussian_for_medium(d, c(1.0, 0.0), group_delay(&p), 1.0).unwrap();
        let h = TransferFunction::for_pulse(&pulse, &p).unwrap();
        let r = propagate_pulse(&pulse, &h).unwrap();
        r.energy_out <= r.energy_in * (1.0 + 1e-12)
    });

    outcome(
        (ratio - 16.0).abs() <= 4.0 && states_ok && vacuum <= 1e-10 && mb_energy && parseval,
        format!(
            "step-halving ratio {ratio:.2} (16 +/- 4); states valid: {states_ok}; vacuum deviation {vacuum:.1e} (<= 1e-10); \
             Maxwell-Bloch energy ratio {:.4} (<= 1); Parseval bound: {parseval}",
            sim.energy_out / sim.energy_in
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 12] = [
        ("vapor density", c01_density),
        ("Rabi estimates", c02_rabi),
        ("window scaling", c03_window),
        ("Zeeman shift", c04_zeeman),
        ("dark-state transparency", c05_dark_state),
        ("analytic/numeric agreement", c06_analytic_numeric),
        ("pulse broadening and delay", c07_broadening),
        ("storage phenomenology", c08_storage),
        ("rotation symmetry", c09_rotation),
        ("switch-induced rotation", c10_sir),
        ("delay-density linearity", c11_delay_density),
        ("numerical hygiene", c12_hygiene),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.passed {
            failed += 1;
        }
        println!(
            "{} [{:>2}] {name}: {} ({:.1} s)",
            if result.passed { "PASS" } else { "FAIL" },
            i + 1,
            result.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed in {:.1} s", criteria.len() - failed, criteria.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
