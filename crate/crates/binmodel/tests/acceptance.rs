//! Acceptance suite: one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use binmodel::batch::{predict_all, run_batch};
use binmodel::data::{data_dir, load_data_dir};
use binmodel::oracle::{compare, TokenEnsemble};
use binmodel_core::experiments::{observations, GLOBAL_PARAMS};
use binmodel_core::quad::{integrate_real, QuadSettings};
use binmodel_core::simplex::SimplexOptions;
use binmodel_core::{
    coherence_of, fit_params, from_db, ipd_discrimination_threshold, r_squared, solve_threshold, DetectionParams,
    ExperimentDef, ExperimentId, Family, FitBounds, FixedParams, Observation, Ordinate, PeripheryFilter, PhaseSpectrum,
    PreparedCondition, StimulusSpec, ThresholdVariable,
};

enum Verdict {
    Pass,
    Fail,
    NotEvaluated,
}

struct Outcome {
    verdict: Verdict,
    detail: String,
}

fn check(ok: bool, detail: String) -> Outcome {
    Outcome {
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        detail,
    }
}

fn curve(def: &ExperimentDef, condition: &str, params: &DetectionParams, filter: &PeripheryFilter) -> Vec<(f64, f64)> {
    def.sweep
        .iter()
        .map(|&x| {
            let c = PreparedCondition::new(&def.condition(condition, x).unwrap(), filter).unwrap();
            (x, solve_threshold(&c, params).unwrap().threshold)
        })
        .collect()
}

fn extrema(c: &[(f64, f64)], maxima: bool) -> Vec<f64> {
    let s = if maxima { 1.0 } else { -1.0 };
    c.windows(3)
        .filter(|w| s * (w[1].1 - w[0].1) > 0.0 && s * (w[1].1 - w[2].1) >= 0.0)
        .map(|w| {
            let h = w[1].0 - w[0].0;
            w[1].0 + 0.5 * h * (w[0].1 - w[2].1) / (w[0].1 - 2.0 * w[1].1 + w[2].1)
        })
        .collect()
}

fn ipd_thresholds() -> Outcome {
    let mut us: Vec<f64> = ExperimentId::ALL
        .iter()
        .map(|id| {
            ipd_discrimination_threshold(&id.table1_params())
                .unwrap()
                .microseconds()
        })
        .collect();
    us.sort_by(f64::total_cmp);
    let median = (us[3] + us[4]) / 2.0;
    let (min, max) = (us[0], us[7]);
    check(
        (min - 41.0).abs() <= 1.0 && (max - 117.0).abs() <= 1.0 && (median - 60.0).abs() <= 2.0,
        format!("min {min:.2} us, max {max:.2} us, median {median:.2} us"),
    )
}

fn mean_ipd_anchor(filter: &PeripheryFilter) -> Outcome {
    let spec = StimulusSpec::noise(PhaseSpectrum::WaveformItd(2.3e-3), 1.0, 900.0);
    let analytic = coherence_of(&spec, filter).unwrap().argument() / PI;
    let start = Instant::now();
    let cmp = compare(&TokenEnsemble::new(spec, 100, 2.0, 2024), filter).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let empirical = cmp.empirical.gamma.argument() / PI;
    let ipd = cmp.empirical.ipd_mean / PI;
    check(
        (analytic - 0.3).abs() <= 0.01 && (empirical - 0.3).abs() <= 0.01 && elapsed < 10.0,
        format!(
            "quadrature {analytic:.4} pi, oracle {empirical:.4} pi, mean instantaneous IPD {ipd:.4} pi, {elapsed:.2} s"
        ),
    )
}

/// Target stimulus of `family` at the threshold predicted with its per-study
/// parameters.
fn at_threshold(family: Family, x: f64, fixed: FixedParams, filter: &PeripheryFilter) -> StimulusSpec {
    let id: ExperimentId = family.name().parse().unwrap();
    let condition = binmodel_core::build_condition(family, x, &fixed).unwrap();
    let prepared = PreparedCondition::new(&condition, filter).unwrap();
    let t = solve_threshold(&prepared, &id.table1_params()).unwrap().threshold;
    match condition.variable {
        ThresholdVariable::SnrDb => condition.target.with_snr(from_db(t)),
        ThresholdVariable::DeltaRho => condition.target.with_rho(condition.reference.rho_n + t),
    }
}

fn oracle_equivalence(filter: &PeripheryFilter) -> Outcome {
    let d = FixedParams::default();
    let cases = [
        (Family::PollackTrittipoe, 0.5, d),
        (Family::RobinsonJeffress, 0.6, d.tone(0.0)),
        (Family::RobinsonJeffress, -0.4, d.tone(PI)),
        (Family::BernsteinTrahiotis2014, 0.9, d.bandwidth(100.0).tone(PI)),
        (Family::LangfordJeffress, 1.5, d.tone(PI)),
        (Family::LangfordJeffress, 3.0, d.tone(0.0)),
        (Family::VanDerHeijdenTrahiotis, 0.75, d.tone(PI)),
        (Family::RabinerEtAl, 4.0, d.tone(PI)),
        (Family::BernsteinTrahiotis2020, 1.0, d.bandwidth(900.0).rho(0.92)),
        (Family::BernsteinTrahiotis2020, 2.5, d.bandwidth(100.0).rho(1.0)),
        (Family::VanDeParKohlrausch, 100.0, d.noise_phase(PI).tone(0.0)),
        (Family::VanDeParKohlrausch, 1000.0, d.noise_phase(0.0).tone(PI)),
    ];
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for (i, (family, x, fixed)) in cases.iter().enumerate() {
        let spec = at_threshold(*family, *x, *fixed, filter);
        let cmp = compare(&TokenEnsemble::new(spec, 100, 2.0, 100 + i as u64), filter).unwrap();
        worst = worst.max(cmp.deviation / cmp.tolerance);
        if !cmp.pass {
            failures.push(format!(
                "{family}@{x}: |dg|={:.4} > {:.4}",
                cmp.deviation, cmp.tolerance
            ));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let families: std::collections::BTreeSet<_> = cases.iter().map(|c| c.0).collect();
    check(
        failures.is_empty() && families.len() == 8 && elapsed < 60.0,
        format!(
            "{} conditions over {} families, worst |dg|/tolerance {worst:.2}, {elapsed:.1} s{}",
            cases.len(),
            families.len(),
            if failures.is_empty() {
                String::new()
            } else {
                format!("; {}", failures.join(", "))
            }
        ),
    )
}

fn narrowband_limit(filter: &PeripheryFilter) -> Outcome {
    let mut worst: f64 = 0.0;
    for snr in [0.0, 0.5, 1.0, 2.0] {
        let spec = StimulusSpec::noise(PhaseSpectrum::Constant(0.0), 1.0, 1.0)
            .with_tone(PI)
            .with_snr(snr);
        let g = coherence_of(&spec, filter).unwrap().value();
        let expected = (1.0 - snr) / (1.0 + snr);
        worst = worst.max((g.re - expected).abs().max(g.im.abs()));
    }
    check(
        worst < 1e-3,
        format!("max deviation {worst:.2e} at snr in {{0, 0.5, 1, 2}}, 1 Hz band"),
    )
}

fn filter_sanity(filter: &PeripheryFilter) -> Outcome {
    let settings = QuadSettings::default().with_min_panels(4096);
    let area = integrate_real(|f| filter.power_response(f), 500.0 - 2.0e5, 500.0 + 2.0e5, &settings).unwrap();
    let b = filter.bandwidth_param();
    check(
        (area - 79.0).abs() <= 0.1 && (b - 80.47).abs() < 0.005,
        format!("integral {area:.4} Hz, b {b:.4} Hz"),
    )
}

fn wideband_slope(filter: &PeripheryFilter) -> Outcome {
    let def = ExperimentDef::builtin(ExperimentId::Bt2014);
    let at = |bw: f64| {
        let c =
            binmodel_core::build_condition(def.family, 1.0, &FixedParams::default().bandwidth(bw).tone(PI)).unwrap();
        solve_threshold(&PreparedCondition::new(&c, filter).unwrap(), &def.table1_params)
            .unwrap()
            .threshold
    };
    let (a, b, c) = (at(400.0), at(800.0), at(1600.0));
    let (s1, s2) = (a - b, b - c);
    check(
        (s1 - 3.0).abs() <= 0.3 && (s2 - 3.0).abs() <= 0.3,
        format!("{s1:.3} dB (400->800 Hz), {s2:.3} dB (800->1600 Hz) per octave"),
    )
}

fn oscillations(filter: &PeripheryFilter) -> Outcome {
    let fine: Vec<f64> = (0..=450).map(|i| i as f64 * 0.02).collect();
    let mut periods = Vec::new();
    let mut ok = true;
    for id in [ExperimentId::Lj1964, ExperimentId::Vht1999] {
        let def = ExperimentDef::builtin(id).with_sweep(fine.clone());
        for cond in ["S0", "Spi"] {
            let c = curve(&def, cond, &def.table1_params, filter);
            for maxima in [true, false] {
                let e = extrema(&c, maxima);
                let p = if e.len() >= 2 {
                    (e[e.len() - 1] - e[0]) / (e.len() - 1) as f64
                } else {
                    f64::NAN
                };
                ok &= e.len() >= 3 && (p - 2.0).abs() <= 0.05;
                periods.push(p);
            }
        }
    }
    let def = ExperimentDef::builtin(ExperimentId::Rab1966).with_sweep(fine);
    let rab = curve(&def, "Spi", &def.table1_params, filter);
    let drop = rab.windows(2).map(|w| w[0].1 - w[1].1).fold(0.0, f64::max);
    let monotone = drop <= 1e-6;
    let lo = periods.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = periods.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    check(
        ok && monotone,
        format!(
            "ITD periods {lo:.3}..{hi:.3} ms over 8 extremum series; envelope-ITD curve largest decrease {drop:.1e} dB"
        ),
    )
}

fn symmetry(filter: &PeripheryFilter) -> Outcome {
    let def = ExperimentDef::builtin(ExperimentId::Vpk1999);
    let mut grid = def.sweep.clone();
    grid.extend([2000.0, 5000.0]);
    let def = def.with_sweep(grid);
    let a = curve(&def, "N0Spi", &def.table1_params, filter);
    let b = curve(&def, "NpiS0", &def.table1_params, filter);
    let worst = a.iter().zip(&b).map(|(x, y)| (x.1 - y.1).abs()).fold(0.0, f64::max);
    check(
        worst < 1e-6,
        format!("max |N0Spi - NpiS0| {worst:.1e} dB over {} bandwidths", a.len()),
    )
}

fn r_squared_reproduction(filter: &PeripheryFilter) -> Outcome {
    let dir = data_dir();
    let data = match load_data_dir(&dir) {
        Ok(d) => d,
        Err(e) => return check(false, format!("data could not be read: {e}")),
    };
    let panels: std::collections::BTreeSet<_> = data.iter().map(|d| d.experiment).collect();
    if panels.is_empty() {
        // the pipeline itself: model output as data must give R² = 1
        let jobs: Vec<_> = ExperimentDef::all()
            .into_iter()
            .map(|d| (d.clone(), d.table1_params))
            .collect();
        let runs = run_batch(&jobs, filter);
        let mut worst: f64 = 1.0;
        for run in &runs {
            let rows: Vec<_> = run
                .points
                .iter()
                .map(|p| {
                    (
                        p.condition.as_str(),
                        p.sweep_value,
                        p.outcome.as_ref().unwrap().threshold,
                    )
                })
                .collect();
            let obs = observations(&run.def, rows.iter().copied(), filter).unwrap();
            let f = predict_all(&obs, &run.params);
            let y: Vec<f64> = obs.iter().map(|o| o.y).collect();
            worst = worst.min(r_squared(&y, &f).unwrap());
        }
        return Outcome {
            verdict: Verdict::NotEvaluated,
            detail: format!(
                "no digitized data in {} (0 of 8 panels); model-as-data R² >= {worst:.9} on all eight",
                dir.display()
            ),
        };
    }

    let start = Instant::now();
    let mut lines = Vec::new();
    let mut ok = true;
    let (mut py, mut pf, mut gf) = (Vec::new(), Vec::new(), Vec::new());
    for id in &panels {
        let def = ExperimentDef::builtin(*id);
        let rows: Vec<_> = data
            .iter()
            .filter(|d| d.experiment == *id)
            .map(|d| (d.condition.as_str(), d.x, d.y))
            .collect();
        let obs: Vec<Observation> = observations(&def, rows, filter).unwrap();
        let y: Vec<f64> = obs.iter().map(|o| o.y).collect();
        let f = predict_all(&obs, &def.table1_params);
        let r2 = r_squared(&y, &f).unwrap_or(f64::NAN);
        ok &= (r2 - id.table1_r_squared()).abs() <= 0.05;
        lines.push(format!("{id} {r2:.3}/{:.2}", id.table1_r_squared()));
        if def.ordinate == Ordinate::SnrDb {
            py.extend(&y);
            pf.extend(f);
            gf.extend(predict_all(&obs, &id.global_params()));
        }
    }
    let pooled = r_squared(&py, &pf).unwrap_or(f64::NAN);
    let global = r_squared(&py, &gf).unwrap_or(f64::NAN);
    ok &= pooled >= 0.95 && global >= 0.90 && start.elapsed().as_secs_f64() < 120.0;
    check(
        ok,
        format!(
            "{} of 8 panels digitized; {}; pooled {pooled:.3}, global {global:.3}",
            panels.len(),
            lines.join(", ")
        ),
    )
}

fn self_consistency(filter: &PeripheryFilter) -> Outcome {
    let start = Instant::now();
    let mut worst_rel: f64 = 0.0;
    let mut worst_r2: f64 = 1.0;
    for id in ExperimentId::ALL {
        let def = ExperimentDef::builtin(id);
        let truth = def.table1_params;
        let obs: Vec<Observation> = def
            .grid()
            .map(|(c, x)| {
                let condition = PreparedCondition::new(&def.condition(c, x).unwrap(), filter).unwrap();
                let y = solve_threshold(&condition, &truth).unwrap().threshold;
                Observation { condition, y }
            })
            .collect();
        let x0 = DetectionParams::new(
            GLOBAL_PARAMS.0,
            GLOBAL_PARAMS.1,
            truth.sigma_mon().map(|_| GLOBAL_PARAMS.2),
        )
        .unwrap();
        let fit = fit_params(&obs, &x0, &FitBounds::default(), &SimplexOptions::default()).unwrap();
        let rel = |a: f64, b: f64| (a - b).abs() / b;
        let mut r = rel(fit.params.rho_hat(), truth.rho_hat()).max(rel(fit.params.sigma_bin(), truth.sigma_bin()));
        if let (Some(a), Some(b)) = (fit.params.sigma_mon(), truth.sigma_mon()) {
            r = r.max(rel(a, b));
        }
        worst_rel = worst_rel.max(r);
        worst_r2 = worst_r2.min(fit.r_squared);
    }
    let elapsed = start.elapsed().as_secs_f64();
    check(
        worst_rel <= 0.02 && worst_r2 >= 1.0 - 1e-6,
        format!(
            "all eight experiments: worst relative error {worst_rel:.2e}, worst R² 1 - {:.1e}, {elapsed:.1} s",
            1.0 - worst_r2
        ),
    )
}

fn monotonicity(filter: &PeripheryFilter) -> Outcome {
    let mut conditions = 0;
    let mut worst_drop: f64 = 0.0;
    for def in ExperimentDef::all() {
        for (c, x) in def.grid() {
            let p = PreparedCondition::new(&def.condition(c, x).unwrap(), filter).unwrap();
            let grid: Vec<f64> = match p.variable() {
                ThresholdVariable::SnrDb => (0..=200).map(|i| -60.0 + 0.5 * i as f64).collect(),
                ThresholdVariable::DeltaRho => {
                    let (lo, hi) = p.bracket();
                    (0..=200).map(|i| lo + (hi - lo) * i as f64 / 200.0).collect()
                }
            };
            let d: Vec<f64> = grid
                .iter()
                .map(|&v| {
                    let (b, m) = p.dprime(v, &def.table1_params).unwrap();
                    b.hypot(m)
                })
                .collect();
            for w in d.windows(2) {
                worst_drop = worst_drop.max(w[0] - w[1]);
            }
            conditions += 1;
        }
    }
    check(
        worst_drop <= 0.0,
        format!("{conditions} built-in conditions, SNR -60..40 dB in 0.5 dB steps, largest decrease {worst_drop:.1e}"),
    )
}

fn main() -> ExitCode {
    let filter = PeripheryFilter::default();
    let criteria: [(&str, &dyn Fn() -> Outcome); 11] = [
        ("IPD discrimination range", &ipd_thresholds),
        ("mean-IPD anchor", &|| mean_ipd_anchor(&filter)),
        ("oracle equivalence", &|| oracle_equivalence(&filter)),
        ("narrowband closed form", &|| narrowband_limit(&filter)),
        ("filter sanity", &|| filter_sanity(&filter)),
        ("asymptotic slope", &|| wideband_slope(&filter)),
        ("oscillation structure", &|| oscillations(&filter)),
        ("N0Spi/NpiS0 symmetry", &|| symmetry(&filter)),
        ("R² reproduction", &|| r_squared_reproduction(&filter)),
        ("self-consistency fit", &|| self_consistency(&filter)),
        ("monotonicity suite", &|| monotonicity(&filter)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let tag = match outcome.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => {
                failed += 1;
                "FAIL"
            }
            Verdict::NotEvaluated => "NOT EVALUATED",
        };
        println!(
            "criterion {:>2} {tag:<13} {name}: {} [{:.2} s]",
            i + 1,
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
