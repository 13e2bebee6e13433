//! Acceptance gate. Each test checks one criterion at its stated tolerance
//! and prints a single PASS/FAIL line to the real stdout.

use std::io::Write;
use std::sync::OnceLock;
use std::time::Instant;

use mtsindy::dictionary::{BasisSpec, DesignMatrix};
use mtsindy::evaluation::nmse;
use mtsindy::inference::{run_gibbs, sample_alpha2_conditional, sample_sigma2_conditional};
use mtsindy::rng::rng_from_seed;
use mtsindy::signals::{Butterworth, FilterSpec};
use mtsindy::simulator::{rk4_integrate, simulate_dataset};
use mtsindy::{ChainConfig, ForcingSpec, Hyperparameters, OscillatorParams, SimulationConfig, TaskData};
use mtsindy_experiments::config::PAPER_SCALES;
use mtsindy_experiments::{
    reproduce_from_manifest, reproduce_paper, run_nmse_study, run_scenario_replicate, NmseSplit, ScenarioConfig,
    StudyResult,
};
use nalgebra::{DMatrix, DVector};

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let line = format!("criterion {id} [{}] {name}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    // Bypass the test harness capture so the line always shows.
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
}

fn paper_task(scale: f64, seed: u64, noise: f64) -> TaskData {
    let sim = SimulationConfig { measurement_noise_std: noise, ..Default::default() };
    let d = simulate_dataset(&OscillatorParams::default(), &ForcingSpec::new(scale, seed, 1e5), &sim).unwrap();
    TaskData::from_dataset(&d, &BasisSpec::default(), 1.0).unwrap()
}

#[test]
fn criterion_1_frozen_variance_gibbs_matches_gaussian_conditional() {
    let start = Instant::now();
    let task = paper_task(100.0, 11, 0.01);
    let alpha2 = vec![4.0, 1.0, 0.5, 2.0, 3.0, 0.25, 1.5];
    let sigma2 = 1e-4;
    let m = alpha2.len();

    // Oracle: dense normal equations through nalgebra.
    let n = task.n_samples();
    let d = DMatrix::from_row_slice(n, m, task.design().values());
    let r = DVector::from_iterator(n, task.target().iter().zip(task.force()).map(|(y, f)| y - f));
    let mut precision = d.transpose() * &d / sigma2;
    for j in 0..m {
        precision[(j, j)] += 1.0 / alpha2[j];
    }
    let cov = precision.clone().try_inverse().unwrap();
    let mean = &cov * (d.transpose() * r / sigma2);

    let cfg = ChainConfig {
        n_iterations: 20_001,
        n_burn_in: 1,
        seed: 99,
        fixed_alpha2: Some(alpha2),
        fixed_sigma2: Some(vec![sigma2]),
        ..Default::default()
    };
    let chain = run_gibbs(std::slice::from_ref(&task), &Hyperparameters::default(), &cfg).unwrap();
    let s = chain.n_draws() as f64;
    assert_eq!(chain.n_draws(), 20_000);

    let emp_mean = chain.posterior_mean_w();
    let mut worst_z: f64 = 0.0;
    for j in 0..m {
        let se = (cov[(j, j)] / s).sqrt();
        worst_z = worst_z.max((emp_mean[j] - mean[j]).abs() / se);
    }
    let mut emp_cov = DMatrix::<f64>::zeros(m, m);
    for w in &chain.w_draws {
        let dv = DVector::from_iterator(m, w.iter().zip(&emp_mean).map(|(a, b)| a - b));
        emp_cov += &dv * dv.transpose();
    }
    emp_cov /= s - 1.0;
    let rel_frob = (&emp_cov - &cov).norm() / cov.norm();
    let secs = start.elapsed().as_secs_f64();

    let pass = worst_z < 3.0 && rel_frob < 0.05 && secs < 10.0;
    report(
        1,
        "sampler-oracle equivalence",
        pass,
        &format!("max |mean err|/SE = {worst_z:.2} (< 3), cov rel Frobenius = {rel_frob:.4} (< 0.05), {secs:.1} s (< 10)"),
    );
    assert!(pass);
}

/// E[x] and E[1/x] of GIG(p, chi, psi) by trapezoidal quadrature in log x.
fn gig_moments_by_quadrature(p: f64, chi: f64, psi: f64) -> (f64, f64) {
    let mode = (p + (p * p + chi * psi).sqrt()) / psi;
    let u0 = mode.ln();
    let h = |u: f64| p * u - 0.5 * (chi * (-u).exp() + psi * u.exp());
    let h0 = h(u0);
    let (lo, hi, n) = (u0 - 3.0, u0 + 3.0, 600_000);
    let du = (hi - lo) / n as f64;
    let (mut z, mut ex, mut einv) = (0.0, 0.0, 0.0);
    for i in 0..=n {
        let u = lo + i as f64 * du;
        let wt = if i == 0 || i == n { 0.5 } else { 1.0 };
        let f = wt * (h(u) - h0).exp();
        z += f;
        ex += f * u.exp();
        einv += f * (-u).exp();
    }
    (ex / z, einv / z)
}

#[test]
fn criterion_2_conditional_samplers_match_closed_forms() {
    // Inverse-gamma: w_m = 0 gives InvGamma(a + 1/2, b); mean b / (a - 1/2) at a = 2, b = 1.
    let start = Instant::now();
    let hyper = Hyperparameters { a: 2.0, b: 1.0, lambda: 1.0 };
    let mut rng = rng_from_seed(2);
    let draws = 100_000;
    let mut total = 0.0;
    for _ in 0..draws {
        total += sample_alpha2_conditional(&[0.0], &hyper, &mut rng).unwrap()[0];
    }
    let ig_mean = total / draws as f64;
    let ig_expected = 1.0 / (2.0 - 0.5);
    let ig_err = (ig_mean / ig_expected - 1.0).abs();
    let ig_secs = start.elapsed().as_secs_f64();

    // GIG via the noise-variance conditional: N = 1000 gives p = -499, a
    // residual with SSE = 50 gives chi = 50, lambda = 1 gives psi = 2.
    let start = Instant::now();
    let basis = BasisSpec::from_labels(&["1"]).unwrap();
    let n = 1000;
    let zeros = vec![0.0; n];
    let design = DesignMatrix::from_states(&zeros, &zeros, &basis, "gig").unwrap();
    let target: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 0.05f64.sqrt() } else { -(0.05f64.sqrt()) }).collect();
    let task = TaskData::new(design, target, zeros.clone()).unwrap();
    assert!((task.sse(&[0.0]) - 50.0).abs() < 1e-10);
    let hyper = Hyperparameters { a: 1e-3, b: 1e-3, lambda: 1.0 };
    let (mut sx, mut sinv) = (0.0, 0.0);
    for _ in 0..draws {
        let x = sample_sigma2_conditional(&task, &[0.0], &hyper, &mut rng).unwrap();
        sx += x;
        sinv += 1.0 / x;
    }
    let (qx, qinv) = gig_moments_by_quadrature(-499.0, 50.0, 2.0);
    let ex_err = (sx / draws as f64 / qx - 1.0).abs();
    let einv_err = (sinv / draws as f64 / qinv - 1.0).abs();
    let gig_secs = start.elapsed().as_secs_f64();

    let pass = ig_err < 0.02 && ex_err < 0.01 && einv_err < 0.01 && ig_secs < 5.0 && gig_secs < 5.0;
    report(
        2,
        "conditional-distribution oracles",
        pass,
        &format!(
            "inv-gamma mean rel err {ig_err:.4} (< 0.02, {ig_secs:.2} s); GIG E[x] rel err {ex_err:.4}, E[1/x] rel err {einv_err:.4} (< 0.01, {gig_secs:.2} s)"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_3_simulation_fidelity() {
    let linear = OscillatorParams { m: 1.0, c: 0.0, k1: 1.0, k3: 0.0 };
    // Global error of the state after one period against (cos t, -sin t).
    let err = |dt: f64| {
        let steps = (2.0 * std::f64::consts::PI / dt).round() as usize;
        let dt = 2.0 * std::f64::consts::PI / steps as f64;
        let tr = rk4_integrate(&linear, &vec![0.0; steps + 1], dt, (1.0, 0.0)).unwrap();
        (tr.y[steps] - 1.0).abs().max(tr.ydot[steps].abs())
    };
    let (e4, e2, e1) = (err(4e-3), err(2e-3), err(1e-3));
    let (r1, r2) = (e4 / e2, e2 / e1);
    let order_ok = (r1 - 16.0).abs() <= 3.0 && (r2 - 16.0).abs() <= 3.0;

    let undamped = OscillatorParams { c: 0.0, ..OscillatorParams::default() };
    let n = 1_000_001;
    let tr = rk4_integrate(&undamped, &vec![0.0; n], 1e-5, (1.0, 0.0)).unwrap();
    let h0 = 0.5 + 0.25;
    let drift = tr
        .y
        .iter()
        .zip(&tr.ydot)
        .map(|(&y, &v)| ((0.5 * v * v + 0.5 * y * y + 0.25 * y.powi(4)) - h0).abs() / h0)
        .fold(0.0, f64::max);

    let mut worst_residual: f64 = 0.0;
    for &f in &PAPER_SCALES {
        let d = simulate_dataset(&OscillatorParams::default(), &ForcingSpec::new(f, 5, 1e5), &SimulationConfig::default())
            .unwrap();
        let p = OscillatorParams::default();
        let ss: f64 = (0..d.len())
            .map(|i| {
                let rhs = d.force[i] - p.c * d.ydot[i] - p.k1 * d.y[i] - p.k3 * d.y[i].powi(3);
                (d.yddot[i] - rhs).powi(2)
            })
            .sum();
        worst_residual = worst_residual.max((ss / d.len() as f64).sqrt());
    }

    let pass = order_ok && drift < 1e-6 && worst_residual < 1e-8;
    report(
        3,
        "simulation fidelity",
        pass,
        &format!(
            "RK4 error ratios {r1:.2}, {r2:.2} (16 +/- 3); energy drift {drift:.2e} (< 1e-6); ODE residual {worst_residual:.2e} RMS (< 1e-8)"
        ),
    );
    assert!(pass);
}

/// Steady-state amplitude ratio of a unit sinusoid through the filter,
/// measured over whole periods after the transient.
fn measured_gain(filter: &Butterworth<f64>, freq: f64, fs: f64, settle_s: f64) -> f64 {
    let per_period = fs / freq;
    let window = (per_period * (freq * 1.0).ceil()).round() as usize;
    let start = (settle_s * fs) as usize;
    let x: Vec<f64> = (0..start + window)
        .map(|i| (2.0 * std::f64::consts::PI * freq * i as f64 / fs).sin())
        .collect();
    let y = filter.apply(&x);
    let (mut a, mut b) = (0.0, 0.0);
    for (i, yi) in y.iter().enumerate().skip(start) {
        let ph = 2.0 * std::f64::consts::PI * freq * i as f64 / fs;
        a += yi * ph.sin();
        b += yi * ph.cos();
    }
    2.0 * (a * a + b * b).sqrt() / window as f64
}

#[test]
fn criterion_4_filter_fidelity() {
    let fs = 1e5;
    let filter = Butterworth::design(&FilterSpec::lowpass(3.0, 4), fs).unwrap();

    let dc = filter.apply(&vec![2.5f64; 300_000]);
    let dc_err = (dc[dc.len() - 1] / 2.5 - 1.0).abs();

    let at_cut = measured_gain(&filter, 3.0, fs, 3.0);
    let cut_err = (at_cut * 2f64.sqrt() - 1.0).abs();

    let at_30 = measured_gain(&filter, 30.0, fs, 3.0);
    let atten_db = -20.0 * at_30.log10();
    let design_db = -20.0 * filter.magnitude(30.0).log10();

    let pass = dc_err < 1e-6 && cut_err < 0.01 && atten_db >= 75.0 && design_db >= 75.0;
    report(
        4,
        "filter fidelity",
        pass,
        &format!(
            "DC gain err {dc_err:.1e} (< 1e-6); |H(3 Hz)|*sqrt2 - 1 = {cut_err:.2e} (< 0.01); attenuation at 30 Hz {atten_db:.1} dB measured, {design_db:.1} dB designed (>= 75)"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_5_high_excitation_recovery() {
    let cfg = ScenarioConfig::paper_single_task(1e3);
    // Order: y, ydot, y^2, ydot^2, y^3, ydot^3, 1.
    let mut signs_and_bounds = 0;
    let mut inactive_ok = 0;
    let mut worst = (0.0f64, 0.0f64);
    for r in 0..10 {
        let out = run_scenario_replicate(&cfg, r).unwrap();
        let w = out.summary.means();
        let signs = w[0] < 0.0 && w[1] < 0.0 && w[4] < 0.0;
        let ey = (w[0] + 1.0).abs();
        let ev = (w[1] + 0.2).abs();
        worst = (worst.0.max(ey), worst.1.max(ev));
        if signs && ey < 0.3 && ev < 0.1 {
            signs_and_bounds += 1;
        }
        let contains_zero = [2, 3, 5, 6].iter().all(|&j| {
            let t = &out.summary.terms[j];
            t.lower95() <= 0.0 && t.upper95() >= 0.0
        });
        if contains_zero {
            inactive_ok += 1;
        }
    }
    let pass = signs_and_bounds == 10 && inactive_ok >= 8;
    report(
        5,
        "high-excitation recovery",
        pass,
        &format!(
            "signs and bounds hold in {signs_and_bounds}/10 (max |w_y + 1| = {:.4}, max |w_ydot + 0.2| = {:.4}); inactive CIs contain 0 in {inactive_ok}/10 (>= 8)",
            worst.0, worst.1
        ),
    );
    assert!(pass);
}

fn study_r20() -> &'static StudyResult {
    static STUDY: OnceLock<StudyResult> = OnceLock::new();
    STUDY.get_or_init(|| {
        let cfg = ScenarioConfig { replicates: 20, ..ScenarioConfig::paper_multi_task() };
        let study = run_nmse_study(&cfg).unwrap();
        assert!(study.failures.is_empty(), "{:?}", study.failures);
        study
    })
}

/// Generalisation NMSE is scored on a fresh record per excitation level; the
/// in-sample value is printed alongside for reference.
const STUDY_SPLIT: NmseSplit = NmseSplit::HeldOut;

#[test]
fn criterion_6_multi_task_improvement() {
    let study = study_r20();
    let st = study.aggregate("ST", 1e2, STUDY_SPLIT).unwrap();
    let mt = study.aggregate("MT", 1e2, STUDY_SPLIT).unwrap();
    let nmse_ok = mt.mean <= st.mean && mt.std <= st.std;

    let mut wins = Vec::new();
    for f in [1e1, 1e2] {
        let st_cell = study.cell("ST", f);
        let mt_cell = study.cell("MT", f);
        let n = st_cell.iter().zip(&mt_cell).filter(|(s, m)| m.l2_distance < s.l2_distance).count();
        wins.push((n, st_cell.len()));
    }
    let recovery_ok = wins.iter().all(|&(n, total)| n as f64 >= 0.7 * total as f64);

    let st_tr = study.aggregate("ST", 1e2, NmseSplit::Train).unwrap();
    let mt_tr = study.aggregate("MT", 1e2, NmseSplit::Train).unwrap();
    let pass = nmse_ok && recovery_ok;
    report(
        6,
        "multi-task improvement",
        pass,
        &format!(
            "f=1e2 held-out NMSE MT {:.4} +/- {:.4} vs ST {:.4} +/- {:.4}; MT closer to truth in {}/{} (f=1e1) and {}/{} (f=1e2) replicates (>= 70%); [in-sample NMSE MT {:.4} +/- {:.4} vs ST {:.4} +/- {:.4}]",
            mt.mean, mt.std, st.mean, st.std, wins[0].0, wins[0].1, wins[1].0, wins[1].1, mt_tr.mean, mt_tr.std, st_tr.mean, st_tr.std
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_7_no_negative_transfer() {
    let study = study_r20();
    let check = |split| {
        let st = study.aggregate("ST", 1e3, split).unwrap();
        let mt = study.aggregate("MT", 1e3, split).unwrap();
        let pooled = ((st.std * st.std + mt.std * mt.std) / 2.0).sqrt();
        ((mt.mean - st.mean).abs(), pooled)
    };
    let (gap, pooled) = check(STUDY_SPLIT);
    let (gap_tr, pooled_tr) = check(NmseSplit::Train);
    let pass = gap <= pooled && gap_tr <= pooled_tr;
    report(
        7,
        "no negative transfer",
        pass,
        &format!(
            "f=1e3 |mean MT - mean ST| = {gap:.3e} vs pooled std {pooled:.3e} held-out; {gap_tr:.3e} vs {pooled_tr:.3e} in-sample"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_8_metric_exactness() {
    let z = [1.0f64, 2.0, 3.0];
    let perfect = nmse(&z, &z).unwrap().value;
    let at_mean = nmse(&z, &[2.0, 2.0, 2.0]).unwrap().value;
    let hand = nmse(&z, &[1.0, 2.0, 4.0]).unwrap().value;
    let pass = perfect.abs() < 1e-10 && (at_mean - 100.0).abs() < 1e-10 && (hand - 50.0).abs() < 1e-10;
    report(8, "metric exactness", pass, &format!("NMSE = {perfect}, {at_mean}, {hand} (expected 0, 100, 50 to 1e-10)"));
    assert!(pass);
}

fn files_with_bytes(root: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn criterion_9_reproduce_is_deterministic() {
    let base = ScenarioConfig { replicates: 3, ..ScenarioConfig::paper_multi_task() };
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let second = tmp.path().join("second");
    let manifest = reproduce_paper(&base, &first).unwrap();
    reproduce_from_manifest(&first.join("manifest.json"), &second).unwrap();

    let a = files_with_bytes(&first);
    let b = files_with_bytes(&second);
    let csv_a: Vec<_> = a.iter().filter(|(p, _)| p.ends_with(".csv")).collect();
    let csv_b: Vec<_> = b.iter().filter(|(p, _)| p.ends_with(".csv")).collect();
    let identical_csv = !csv_a.is_empty() && csv_a == csv_b;
    let identical_all = a == b;
    let structure = manifest.scenarios.len() == 4 && manifest.study.replicates == 3;
    let pass = identical_csv && identical_all && structure;
    report(
        9,
        "determinism",
        pass,
        &format!(
            "{} CSV files byte-identical: {identical_csv}; all {} files identical: {identical_all}",
            csv_a.len(),
            a.len()
        ),
    );
    assert!(pass);
}
