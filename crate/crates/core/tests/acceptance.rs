//! Acceptance suite: one PASS/FAIL line per criterion, details indented
//! above it. Exits non-zero when any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use nct::beam::{dispersion, resolve_stiffness, solve_wavenumbers, BeamSpec, ModeTable, Stiffness};
use nct::cli::config::{RunConfig, SWEEP_DENSITIES_PER_CM3, PER_CM3};
use nct::constants::{Constants, HBAR, K_B, M_RB87};
use nct::dynamics::{evolve, relaxation_time, EvolveOptions, StepControl};
use nct::gas::{lambda_db, solve_fugacity, t_bec, GasSpec};
use nct::potential::{vn_closed_form, vn_quadrature, PotentialSpec};
use nct::rates::{
    fj_convolution, fj_golden_rule, occupation_vs_time, rate_c5, rate_fgr, rate_quadrature_oracle, rate_series,
    thermalization_rate, RateInputs, J_CAP, SERIES_REL_TOL,
};
use nct::specfun::{integrate_adaptive_with, QuadControl, ZETA_3_2};

const C5: f64 = 6e-65;
const SEED: u64 = 0x5eed_2024;

struct Suite {
    failed: Vec<&'static str>,
}

impl Suite {
    fn note(&self, text: String) {
        println!("    {text}");
    }

    fn verdict(&mut self, id: &'static str, pass: bool, summary: String) {
        println!("criterion {id} {}: {summary}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(id);
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// |Γ_a/Γ_b - 1| from log values, safe when the rates underflow.
fn ln_rel(ln_a: f64, ln_b: f64) -> f64 {
    (ln_a - ln_b).exp_m1().abs()
}

fn inputs(n: f64, temperature: f64, potential: PotentialSpec) -> RateInputs {
    let modes = ModeTable::new(&BeamSpec::reference_tube(), 5).unwrap();
    let gas = solve_fugacity(&GasSpec::rubidium(n, temperature)).unwrap();
    RateInputs::new(modes, potential, gas).unwrap()
}

fn inputs_over_tbec(n: f64, ratio: f64) -> RateInputs {
    let tc = t_bec(n, M_RB87, Constants::SI);
    inputs(n, ratio * tc, PotentialSpec::c5(1e-9, C5).unwrap())
}

fn criterion_1(s: &mut Suite) {
    let start = Instant::now();
    let table = ModeTable::new(&BeamSpec::reference_tube(), 0).unwrap();
    let a0 = table.modes[0].osc_length;
    let direct = (HBAR / (2.0 * PI * 398e3 * 1e-15 * 1e-6)).sqrt();
    let secs = start.elapsed().as_secs_f64();
    let dev = rel(a0, 0.2e-9);
    s.note(format!("sqrt(hbar/(omega0 rho_c L)) = {direct:.6e} m, table value {a0:.6e} m"));
    s.verdict(
        "1",
        dev <= 0.03 && rel(a0, direct) < 1e-12 && secs < 1.0,
        format!("a0 = {:.4} nm vs 0.2 nm, rel dev {dev:.3e} (tol 3e-2), {secs:.3} s", a0 * 1e9),
    );
}

fn criterion_2(s: &mut Suite) {
    let start = Instant::now();
    let table = ModeTable::new(&BeamSpec::reference_tube(), 20).unwrap();
    let mut pass = true;
    let mut worst: f64 = 0.0;
    let mut worst_shift: f64 = 0.0;
    for (tc, ref_nm) in [(4.0, 270.0), (0.24, 66.0), (0.0, 0.46)] {
        let u20 = table.thermal_tip_displacement(tc, 20).unwrap() * 1e9;
        let u10 = table.thermal_tip_displacement(tc, 10).unwrap() * 1e9;
        let dev = rel(u20, ref_nm);
        let shift = rel(u20, u10);
        s.note(format!(
            "T_c = {tc} K: u = {u20:.4} nm vs {ref_nm} nm, rel dev {dev:.3e}; l_cut 10 -> 20 shift {shift:.3e}"
        ));
        pass &= dev <= 0.10 && shift < 0.01;
        worst = worst.max(dev);
        worst_shift = worst_shift.max(shift);
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 1.0;
    s.verdict(
        "2",
        pass,
        format!("max rel dev {worst:.3e} (tol 1e-1), max l_cut shift {worst_shift:.3e} (tol 1e-2), {secs:.3} s"),
    );
}

fn criterion_3(s: &mut Suite) {
    let ref_nk = [18.0, 54.0, 85.0, 250.0, 400.0];
    let ref_lambda_nm = [610.0, 357.0, 283.0, 165.0, 131.0];
    let c = Constants::SI;
    let mut worst: f64 = 0.0;
    let mut worst_identity: f64 = 0.0;
    for (k, &n_cm3) in SWEEP_DENSITIES_PER_CM3.iter().enumerate() {
        let n = n_cm3 * PER_CM3;
        let tc = t_bec(n, M_RB87, c);
        let lambda = lambda_db(tc, M_RB87, c).unwrap();
        let dev = rel(tc * 1e9, ref_nk[k]);
        let identity = rel(n * lambda.powi(3), ZETA_3_2);
        s.note(format!(
            "n = {n_cm3:e} cm^-3: T_BEC = {:.3} nK vs {} nK, rel dev {dev:.3e}; n lambda^3 = {:.9}; lambda_dB = {:.1} nm vs {} nm [NON-REPRODUCED]",
            tc * 1e9,
            ref_nk[k],
            n * lambda.powi(3),
            lambda * 1e9,
            ref_lambda_nm[k]
        ));
        worst = worst.max(dev);
        worst_identity = worst_identity.max(identity);
    }
    s.note(format!(
        "g_3/2(1) = {ZETA_3_2:.9}; quoted 2.61238 is its 6-digit rounding (diff {:.1e})",
        (ZETA_3_2 - 2.61238).abs()
    ));
    s.verdict(
        "3",
        worst <= 0.05 && worst_identity <= 1e-6,
        format!("T_BEC max rel dev {worst:.3e} (tol 5e-2), n lambda^3 vs g_3/2(1) max rel dev {worst_identity:.3e} (tol 1e-6)"),
    );
}

fn criterion_4(s: &mut Suite) {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut worst_zero: f64 = 0.0;
    for n in [3u32, 5, 7] {
        for q in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
            let a = vn_closed_form(n, q).unwrap();
            let b = vn_quadrature(n, q).unwrap();
            // relative, or absolute 1e-9 where |V| < 1e-3
            worst = worst.max((a - b).abs() / b.abs().max(1e-3));
        }
        let v0 = vn_closed_form(n, 0.0).unwrap();
        worst_zero = worst_zero.max(rel(v0, 1.0 / (n - 2) as f64));
    }
    let secs = start.elapsed().as_secs_f64();
    s.verdict(
        "4",
        worst <= 1e-6 && worst_zero <= 1e-12 && secs < 10.0,
        format!("closed form vs quadrature max dev {worst:.3e} (tol 1e-6), V_n(0) dev {worst_zero:.3e} (tol 1e-12), {secs:.3} s"),
    );
}

/// Series rates over the reference sweep, indexed [density][temperature].
fn sweep_inputs() -> (Vec<f64>, Vec<Vec<RateInputs>>) {
    let grid = RunConfig::default().sweep.grid();
    let rows = SWEEP_DENSITIES_PER_CM3
        .iter()
        .map(|&n| grid.iter().map(|&r| inputs_over_tbec(n * PER_CM3, r)).collect())
        .collect();
    (grid, rows)
}

fn criterion_5(s: &mut Suite) {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(SEED);
    let mut worst_fgr: f64 = 0.0;
    for _ in 0..100 {
        let n = 10f64.powf(rng.random_range(11.0..15.0)) * PER_CM3;
        let ratio = rng.random_range(1.05..10.0);
        let radius = rng.random_range(0.5e-9..3e-9);
        let c5 = C5 * rng.random_range(0.2..5.0);
        let tc = t_bec(n, M_RB87, Constants::SI);
        let inp = inputs(n, ratio * tc, PotentialSpec::c5(radius, c5).unwrap());
        let first = rate_series(&inp, 1, SERIES_REL_TOL).unwrap();
        let fgr = rate_fgr(&inp).unwrap();
        worst_fgr = worst_fgr.max(ln_rel(first.ln_value, fgr.ln_value));
    }
    let pass_a = worst_fgr <= 1e-12;
    s.note(format!(
        "5a: series(j_max = 1) vs golden rule, 100 draws: max rel dev {worst_fgr:.3e} (tol 1e-12) {}",
        if pass_a { "PASS" } else { "FAIL" }
    ));

    let (grid, rows) = sweep_inputs();
    let mut worst_oracle: f64 = 0.0;
    let mut worst_c5: (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (k, row) in rows.iter().enumerate() {
        for (i, inp) in row.iter().enumerate() {
            let series = rate_series(inp, J_CAP, SERIES_REL_TOL).unwrap();
            let oracle = rate_quadrature_oracle(inp, J_CAP).unwrap();
            let c5 = rate_c5(inp).unwrap();
            worst_oracle = worst_oracle.max(ln_rel(series.ln_value, oracle.ln_value));
            let d = ln_rel(series.ln_value, c5.ln_value);
            if d > worst_c5.0 {
                worst_c5 = (d, SWEEP_DENSITIES_PER_CM3[k], grid[i]);
            }
        }
    }
    let pass_b = worst_oracle <= 0.02;
    let pass_c = worst_c5.0 <= 0.01;
    s.note(format!(
        "5b: series vs quadrature oracle on the 5 x 20 grid: max rel dev {worst_oracle:.3e} (tol 2e-2) {}",
        if pass_b { "PASS" } else { "FAIL" }
    ));
    s.note(format!(
        "5c: series vs C5 closed form on the 5 x 20 grid: max rel dev {:.3e} at n = {:e} cm^-3, T/T_BEC = {:.3} (tol 1e-2) {}",
        worst_c5.0,
        worst_c5.1,
        worst_c5.2,
        if pass_c { "PASS" } else { "FAIL" }
    ));
    // where the gap comes from: the closed form uses the classical fugacity nλ³
    let mut worst_classical: f64 = 0.0;
    let mut worst_hot: f64 = 0.0;
    for row in &rows {
        for (i, inp) in row.iter().enumerate() {
            let classical = RateInputs::with_fugacity(
                inp.modes.clone(),
                inp.potential.clone(),
                inp.gas,
                nct::rates::FugacityMode::Classical,
            )
            .unwrap();
            let series = rate_series(&classical, J_CAP, SERIES_REL_TOL).unwrap();
            let c5 = rate_c5(inp).unwrap();
            let d = ln_rel(series.ln_value, c5.ln_value);
            worst_classical = worst_classical.max(d);
            if grid[i] >= 3.0 {
                let exact = rate_series(inp, J_CAP, SERIES_REL_TOL).unwrap();
                worst_hot = worst_hot.max(ln_rel(exact.ln_value, c5.ln_value));
            }
        }
    }
    s.note(format!(
        "5c detail: with the classical fugacity in the series the max dev is {worst_classical:.3e}; with the exact fugacity restricted to T/T_BEC >= 3 it is {worst_hot:.3e}"
    ));
    let secs = start.elapsed().as_secs_f64();
    s.verdict(
        "5",
        pass_a && pass_b && pass_c && secs < 60.0,
        format!(
            "5a {}, 5b {}, 5c {}, {secs:.2} s",
            if pass_a { "PASS" } else { "FAIL" },
            if pass_b { "PASS" } else { "FAIL" },
            if pass_c { "PASS" } else { "FAIL" }
        ),
    );
}

fn criterion_6(s: &mut Suite) {
    let (grid, rows) = sweep_inputs();
    let ln: Vec<Vec<f64>> = rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|inp| rate_series(inp, J_CAP, SERIES_REL_TOL).unwrap().ln_value)
                .collect()
        })
        .collect();
    let omega0 = rows[0][0].modes.modes[0].omega;
    let monotone = ln.iter().all(|c| c.windows(2).all(|w| w[1] > w[0]));
    let ordered = (0..grid.len()).all(|i| ln.windows(2).all(|p| p[1][i] > p[0][i]));
    let below = ln.iter().flatten().filter(|&&v| v < omega0.ln()).count();
    let above = ln.iter().flatten().filter(|&&v| v > omega0.ln()).count();
    let log10 = |v: f64| v / std::f64::consts::LN_10;
    let (lo, hi) = ln.iter().flatten().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    s.note(format!(
        "log10 rate spans [{:.2}, {:.2}], log10 omega0 = {:.3}; {below} points below, {above} above",
        log10(lo),
        log10(hi),
        log10(omega0.ln())
    ));
    s.verdict(
        "6",
        monotone && ordered && below > 0 && above > 0,
        format!("monotone in T/T_BEC: {monotone}, ordered by density: {ordered}, points below/above omega0: {below}/{above}"),
    );
}

fn criterion_7(s: &mut Suite) {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(SEED ^ 7);
    let mut zero_ok = true;
    let mut sign_ok = true;
    for _ in 0..100 {
        let n = 10f64.powf(rng.random_range(12.0..14.0)) * PER_CM3;
        let inp = inputs_over_tbec(n, rng.random_range(1.05..10.0));
        let beta_a = inp.beta();
        let beta_c = beta_a * 10f64.powf(rng.random_range(-3.0..3.0));
        let l = rng.random_range(0..=5usize);
        let g = thermalization_rate(&inp, l, beta_c).unwrap();
        sign_ok &= !g.is_nan() && g.signum() == (beta_a - beta_c).signum();
        for l in 0..=5 {
            zero_ok &= thermalization_rate(&inp, l, beta_a).unwrap() == 0.0;
        }
    }
    s.note(format!("gamma_l(beta_c = beta_a) == 0 exactly on 600 evaluations: {zero_ok}"));
    s.note(format!("sign(gamma_l) = sign(beta_a - beta_c) on 100 draws: {sign_ok}"));

    let inp = inputs_over_tbec(1e13 * PER_CM3, 2.0);
    let tau = relaxation_time(&inp).unwrap();
    let full = evolve(&inp, 4.0, 200.0 * tau, EvolveOptions::default()).unwrap();
    let monotone = full.t_eff.windows(2).all(|w| w[1] <= w[0]);
    let final_dev = rel(*full.t_eff.last().unwrap(), full.t_bath);
    s.note(format!(
        "4 K -> T_a = {:.4e} K over 200 tau (tau = {tau:.4e} s): monotone {monotone}, final rel dev {final_dev:.2e}, converged {}",
        full.t_bath, full.converged
    ));

    // step halving on a fixed-step run through the fast part of the transient
    let horizon = 10.0 * tau;
    let fixed = |h: f64| {
        evolve(
            &inp,
            4.0,
            horizon,
            EvolveOptions {
                step: StepControl::Fixed { step: h },
                samples: 11,
                ..EvolveOptions::default()
            },
        )
        .unwrap()
    };
    let coarse = fixed(tau / 20.0);
    let fine = fixed(tau / 40.0);
    let adaptive = evolve(
        &inp,
        4.0,
        horizon,
        EvolveOptions {
            samples: 11,
            ..EvolveOptions::default()
        },
    )
    .unwrap();
    let mut halving: f64 = 0.0;
    let mut vs_adaptive: f64 = 0.0;
    for k in 0..coarse.t_eff.len() {
        halving = halving.max(rel(coarse.t_eff[k], fine.t_eff[k]));
        // Richardson extrapolation for a fifth-order method
        let extrap = fine.t_eff[k] + (fine.t_eff[k] - coarse.t_eff[k]) / 31.0;
        vs_adaptive = vs_adaptive.max(rel(adaptive.t_eff[k], extrap));
    }
    s.note(format!(
        "T_eff over [0, 10 tau]: h = tau/20 vs tau/40 max rel diff {halving:.3e}; adaptive vs Richardson extrapolate {vs_adaptive:.3e}"
    ));
    let secs = start.elapsed().as_secs_f64();
    s.verdict(
        "7",
        zero_ok && sign_ok && monotone && full.converged && halving < 1e-4 && vs_adaptive < 1e-4 && secs < 30.0,
        format!("detailed balance {zero_ok}, signs {sign_ok}, monotone convergence {}, step halving {halving:.3e} (tol 1e-4), {secs:.2} s", monotone && full.converged),
    );
}

fn criterion_8(s: &mut Suite) {
    let start = Instant::now();
    let omega0 = 2.0 * PI * 398e3;
    // ħω₀/k_BT = 2
    let temperature = HBAR * omega0 / (2.0 * K_B);
    let inp = inputs(1e13 * PER_CM3, temperature, PotentialSpec::c5(1e-9, C5).unwrap());
    let r = inp.potential.radius;
    let thermal = (inp.beta() * M_RB87).sqrt();
    let mut worst: f64 = 0.0;
    for qbar in [0.05, 0.1, 0.15] {
        let q = qbar / r;
        let t_min = 100.0 * (thermal / q).max(2.0 * PI / omega0);
        for f in [1.0, 2.0, 4.0] {
            let t = f * t_min;
            let ratio = fj_convolution(&inp, 1, q, t).unwrap() / fj_golden_rule(&inp, 1, q, t).unwrap();
            worst = worst.max((ratio - 1.0).abs());
        }
    }
    s.note(format!("F_1 / golden-rule limit, qbar in {{0.05, 0.1, 0.15}}, t/t_min in {{1, 2, 4}}: max |ratio - 1| {worst:.3e} (tol 1e-2)"));
    for qbar in [0.3, 0.5] {
        let q = qbar / r;
        let t = 100.0 * (thermal / q).max(2.0 * PI / omega0);
        let ratio = fj_convolution(&inp, 1, q, t).unwrap() / fj_golden_rule(&inp, 1, q, t).unwrap();
        s.note(format!("off the spectral peak, qbar = {qbar}: ratio {ratio:.4} (information only)"));
    }

    let period = 2.0 * PI / omega0;
    let times: Vec<f64> = (0..10).map(|i| period * (100.0 + 100.0 * i as f64 / 9.0)).collect();
    let p: Vec<f64> = times.iter().map(|&t| occupation_vs_time(&inp, t, 3).unwrap()).collect();
    let (mt, mp) = (
        times.iter().sum::<f64>() / times.len() as f64,
        p.iter().sum::<f64>() / p.len() as f64,
    );
    let slope = times.iter().zip(&p).map(|(t, v)| (t - mt) * (v - mp)).sum::<f64>()
        / times.iter().map(|t| (t - mt).powi(2)).sum::<f64>();
    let fgr = rate_fgr(&inp).unwrap().value;
    let slope_dev = rel(slope, fgr);
    s.note(format!("long-time slope of p(t) {slope:.6e} /s vs golden rule {fgr:.6e} /s, rel dev {slope_dev:.3e} (tol 5e-2)"));
    let secs = start.elapsed().as_secs_f64();
    s.verdict(
        "8",
        worst <= 0.01 && slope_dev <= 0.05 && secs < 60.0,
        format!("max |F/F_GR - 1| {worst:.3e}, slope rel dev {slope_dev:.3e}, {secs:.2} s"),
    );
}

fn criterion_9(s: &mut Suite) {
    let spec = BeamSpec::reference_tube();
    let table = ModeTable::new(&spec, 5).unwrap();
    let len = spec.length;
    let ctrl = QuadControl {
        rel_tol: 1e-12,
        abs_tol: 1e-13,
        max_subdivisions: 1000,
    };
    let mut ortho: f64 = 0.0;
    let mut norm: f64 = 0.0;
    for l in 0..=5 {
        for m in 0..=l {
            let (al, am) = (table.modes[l].osc_length, table.modes[m].osc_length);
            let f = |x: f64| table.eigenmode(l, x * len).unwrap() * table.eigenmode(m, x * len).unwrap() / (al * am);
            let v = integrate_adaptive_with(f, 0.0, 1.0, ctrl).unwrap().value;
            if l == m {
                norm = norm.max((v - 1.0).abs());
            } else {
                ortho = ortho.max(v.abs());
            }
        }
    }
    let kappas = solve_wavenumbers(&spec, 5).unwrap();
    let asym = (3..=5)
        .map(|l| (kappas[l] * len - PI * (l as f64 + 0.5)).abs())
        .fold(0.0, f64::max);
    let omega0 = match spec.stiffness {
        Stiffness::GroundFrequency(w) => w,
        Stiffness::FlexuralRigidity(_) => unreachable!(),
    };
    let ei = resolve_stiffness(&spec).unwrap();
    let round_trip = rel(dispersion(ei, spec.rho_c, kappas[0]), omega0);
    s.note(format!("normalization residual {norm:.3e}, EI = {ei:.6e} N m^2"));
    s.verdict(
        "9",
        ortho < 1e-8 && asym < 0.01 && round_trip <= 1e-12,
        format!("orthogonality {ortho:.3e} (tol 1e-8), |kappa_l L - pi(l + 1/2)| for l >= 3 {asym:.3e} (tol 1e-2), dispersion round trip {round_trip:.3e} (tol 1e-12)"),
    );
}

fn main() {
    let mut suite = Suite { failed: Vec::new() };
    let criteria: [fn(&mut Suite); 9] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
    ];
    for c in criteria {
        c(&mut suite);
    }
    if suite.failed.is_empty() {
        println!("acceptance: all 9 criteria pass");
    } else {
        println!("acceptance: failing criteria {:?}", suite.failed);
        std::process::exit(1);
    }
}
