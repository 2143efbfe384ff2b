//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Run with `cargo test -p weylsim-cli --test criteria`.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weylsim::asymptotics::{alpha, k_infinity, k_r_estimate, k_zero, regime_report, GrowthRegime, KrConfig};
use weylsim::chamber::integrate_over_chamber;
use weylsim::ensemble::{arcsine_quantile, default_k_list, estimate_dz, lln_check, rate_function, sample_h_ensemble, EmpiricalMeasure, McmcConfig};
use weylsim::kmgr::{default_quadrature_order, survival_kmgr, Kernel1D};
use weylsim::quadrature::GaussLegendre;
use weylsim::spectral::{
    eigenfunction, enumerate_indices, gamma_bound, principal_eigenfunction, principal_eigenvalue, survival_ratio_to_leading, survival_spectral, MultiIndex,
    SeriesBudget,
};
use weylsim::stochastic::{discretisation_allowance, simulate_survival, McConfig};
use weylsim::{ChamberPoint, ChamberSpec, WeylType};

type Criterion = (&'static str, fn() -> Verdict, Duration);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn interior_point(rng: &mut impl Rng, spec: &ChamberSpec, margin: f64) -> Vec<f64> {
    let w = spec.half_width() * margin;
    loop {
        let mut x: Vec<f64> = (0..spec.k).map(|_| rng.random_range(-w..w)).collect();
        if spec.weyl_type != WeylType::A {
            x.iter_mut().for_each(|v| *v = v.abs());
        }
        x.sort_by(f64::total_cmp);
        if spec.weyl_type == WeylType::D && rng.random::<bool>() {
            x[0] = -x[0];
        }
        if spec.contains(&x).unwrap() {
            return x;
        }
    }
}

/// (type, k) pairs with k ∈ {1, 2, 3}; type D starts at k = 2.
fn small_cases() -> Vec<(WeylType, usize)> {
    WeylType::ALL
        .into_iter()
        .flat_map(|z| (1..=3).map(move |k| (z, k)))
        .filter(|&(z, k)| !(z == WeylType::D && k == 1))
        .collect()
}

fn cross_route() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cases = small_cases();
    let (mut worst, mut failures, n) = (0.0f64, 0, 216);
    for i in 0..n {
        let (z, k) = cases[i % cases.len()];
        let r = rng.random_range(0.5..2.0);
        let t = r * r * rng.random_range(0.5..20.0);
        let spec = ChamberSpec::new(z, k, r).unwrap();
        let x = ChamberPoint::new(spec, interior_point(&mut rng, &spec, 0.95)).unwrap();
        let s = survival_spectral(&spec, t, &x, SeriesBudget::default_cutoff(&spec, t)).unwrap();
        let kern = Kernel1D::with_defaults(t, r).unwrap();
        let q = survival_kmgr(&spec, t, &x, &kern, default_quadrature_order(&spec, t)).unwrap();
        let ratio = (s.value - q.value).abs() / (s.error_bound + q.error_bound);
        worst = worst.max(ratio);
        if ratio > 1.0 {
            failures += 1;
        }
    }
    verdict(failures == 0, format!("{n} cases, {failures} outside bounds, worst gap/bound {worst:.3}"))
}

fn mc_concordance() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cases = small_cases();
    let (mut failures, mut worst, n) = (0, 0.0f64, 24);
    for i in 0..n {
        let (z, k) = cases[i % cases.len()];
        let r = rng.random_range(0.7..1.5);
        let t = r * r * rng.random_range(0.1..0.6);
        let spec = ChamberSpec::new(z, k, r).unwrap();
        let x = ChamberPoint::new(spec, interior_point(&mut rng, &spec, 0.8)).unwrap();
        let exact = survival_spectral(&spec, t, &x, SeriesBudget::default_cutoff(&spec, t)).unwrap();
        let mut cfg = McConfig::for_horizon(t, 100 + i as u64);
        cfg.paths = 100_000;
        cfg.dt = 1e-3;
        cfg.bridge_correction = true;
        let mc = simulate_survival(&spec, t, &x, &cfg).unwrap();
        let allowed = 3.0 * mc.std_error + discretisation_allowance(cfg.dt, r) + exact.error_bound;
        let ratio = (mc.value - exact.value).abs() / allowed;
        worst = worst.max(ratio);
        if ratio > 1.0 {
            failures += 1;
        }
    }
    verdict(
        failures == 0,
        format!("{n} cases at 1e5 paths, {failures} outside 3se + 0.1·√dt/r, worst gap/allowed {worst:.3}"),
    )
}

fn leading_term_audit() -> Verdict {
    let (mut failures, mut checked, mut worst) = (0, 0, 0.0f64);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (z, k) in small_cases() {
        let spec = ChamberSpec::new(z, k, 1.0).unwrap();
        for tau in [16.0, 20.0, 30.0] {
            let bound = (k as f64 * gamma_bound(tau).unwrap()).exp();
            for _ in 0..5 {
                let x = ChamberPoint::new(spec, interior_point(&mut rng, &spec, 0.95)).unwrap();
                let q = survival_ratio_to_leading(&spec, tau, &x, SeriesBudget::default_cutoff(&spec, tau)).unwrap();
                let dev = (q.value - 1.0).abs() + q.error_bound;
                worst = worst.max(dev / bound);
                checked += 1;
                if dev > bound {
                    failures += 1;
                }
            }
        }
    }
    verdict(
        failures == 0,
        format!("{checked} points, {failures} above e^(kγ), worst deviation/bound {worst:.3e}"),
    )
}

fn closed_form_principal() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for z in WeylType::ALL {
        for k in 1..=5 {
            if z == WeylType::D && k == 1 {
                continue;
            }
            let spec = ChamberSpec::new(z, k, 1.0).unwrap();
            let p = MultiIndex::principal(z, k);
            for _ in 0..10_000 {
                let x = interior_point(&mut rng, &spec, 0.999);
                let det = eigenfunction(&p, &x).unwrap().abs();
                let closed = principal_eigenfunction(z, &x).unwrap();
                if closed > 0.0 {
                    worst = worst.max((det - closed).abs() / closed);
                }
            }
        }
    }
    verdict(worst <= 1e-10, format!("max relative error {worst:.2e} (≤ 1e-10)"))
}

fn orthonormality() -> Verdict {
    let rule = GaussLegendre::new(40);
    let mut worst = 0.0f64;
    for z in WeylType::ALL {
        for k in 1..=2 {
            if z == WeylType::D && k == 1 {
                continue;
            }
            let spec = ChamberSpec::new(z, k, 1.0).unwrap();
            let idx: Vec<MultiIndex> = enumerate_indices(z, k, 200.0).into_iter().take(5).collect();
            for (i, a) in idx.iter().enumerate() {
                for b in &idx[i..] {
                    let ip = integrate_over_chamber(&spec, &rule, &|x: &[f64]| eigenfunction(a, x).unwrap() * eigenfunction(b, x).unwrap());
                    worst = worst.max((ip - if a == b { 1.0 } else { 0.0 }).abs());
                }
            }
        }
    }
    verdict(worst <= 1e-6, format!("max |<f_i, f_j> - δ_ij| = {worst:.2e} (≤ 1e-6)"))
}

fn classical_value() -> Verdict {
    let out = Command::new(env!("CARGO_BIN_EXE_weylsim"))
        .args(["survival", "--type", "A", "--k", "1", "--r", "1", "--x", "0", "--t", "10", "--format", "csv"])
        .output()
        .unwrap();
    let csv = String::from_utf8(out.stdout).unwrap();
    let value: f64 = csv
        .lines()
        .nth(1)
        .and_then(|l| l.split(',').nth(1))
        .and_then(|v| v.parse().ok())
        .unwrap_or(f64::NAN);
    verdict((value - 0.0085787).abs() <= 1e-6, format!("survival = {value:.9} (0.0085787 ± 1e-6)"))
}

fn regime_convergence() -> Verdict {
    let times = [50.0, 100.0, 200.0, 400.0];
    let rep = regime_report(WeylType::A, 2, GrowthRegime::Intermediate { beta: 0.3 }, &times, &[-0.1, 0.1]).unwrap();
    let dev: Vec<f64> = rep.rows.iter().map(|r| (r.ratio - 1.0).abs()).collect();
    let monotone = dev.windows(2).all(|w| w[1] <= w[0]);
    let last = rep.rows.last().unwrap().ratio;
    let ratios: Vec<String> = rep.rows.iter().map(|r| format!("{:.5}", r.ratio)).collect();
    verdict(
        monotone && (last - 1.0).abs() < 0.10,
        format!("ratios [{}], monotone toward 1: {monotone}", ratios.join(", ")),
    )
}

fn soft_transition() -> Verdict {
    let (z, k) = (WeylType::A, 2);
    let big = k_r_estimate(z, k, 4.0, &KrConfig::new(1_000_000, 8)).unwrap();
    let kinf = k_infinity(z, k);
    let r: f64 = 0.35;
    let small = k_r_estimate(z, k, r, &KrConfig::new(1_000_000, 9)).unwrap();
    let small_ref = k_zero(z, k) * (-principal_eigenvalue(z, k) / (r * r)).exp() * r.powf(-alpha(z, k));
    let ok_big = (big.value - kinf).abs() <= 2.0 * big.ci_halfwidth;
    let ok_small = (small.value - small_ref).abs() <= 2.0 * small.ci_halfwidth;
    verdict(
        ok_big && ok_small,
        format!(
            "r=4: {:.5} ± {:.5} vs K_inf {:.5}; r=0.35: {:.4e} ± {:.1e} vs {:.4e}",
            big.value, big.ci_halfwidth, kinf, small.value, small.ci_halfwidth, small_ref
        ),
    )
}

fn law_of_large_numbers() -> Verdict {
    let mut parts = Vec::new();
    let mut pass = true;
    for (z, limit, seed) in [(WeylType::A, 0.05, 10), (WeylType::C, 0.07, 11)] {
        let samples = sample_h_ensemble(z, 200, 50, &McmcConfig::defaults(200, seed)).unwrap();
        let rep = lln_check(z, &samples).unwrap();
        pass &= rep.ks_to_limit < limit;
        parts.push(format!("{z}: KS {:.4} (< {limit})", rep.ks_to_limit));
    }
    verdict(pass, parts.join("; "))
}

fn rate_consistency() -> Verdict {
    let d_a = estimate_dz(WeylType::A, &default_k_list()).unwrap().value;
    let k = 400;
    let rate = |atoms: Vec<f64>| {
        rate_function(WeylType::A, &EmpiricalMeasure::new(WeylType::A, atoms).unwrap(), d_a)
            .unwrap()
            .rate
    };
    let arcsine = rate((0..k).map(|i| arcsine_quantile((i as f64 + 0.5) / k as f64)).collect());
    let uniform = rate((0..k).map(|i| -1.0 + 2.0 * (i as f64 + 0.5) / k as f64).collect());
    let two_atom = rate(
        (0..k)
            .map(|i| {
                if i < k / 2 {
                    -0.9 - 1e-4 * i as f64 / k as f64
                } else {
                    0.9 + 1e-4 * i as f64 / k as f64
                }
            })
            .collect(),
    );
    verdict(
        arcsine.abs() < 0.03 && uniform > arcsine && two_atom > arcsine,
        format!("R(arcsine) {arcsine:.5}, R(uniform) {uniform:.5}, R(two-atom) {two_atom:.5}"),
    )
}

fn determinism() -> Verdict {
    let runs: [&[&str]; 7] = [
        &[
            "survival", "--type", "C", "--k", "2", "--t", "0.5", "--x", "0.2,0.7", "--method", "mc", "--paths", "20000",
        ],
        &[
            "survival",
            "--type",
            "A",
            "--k",
            "2",
            "--t",
            "1",
            "--x=-0.3,0.4",
            "--method",
            "all",
            "--paths",
            "20000",
        ],
        &[
            "endpoints",
            "--type",
            "A",
            "--k",
            "3",
            "--t",
            "0.5",
            "--x=-0.5,0,0.5",
            "--n",
            "200",
            "--paths",
            "20000",
            "--format",
            "csv",
        ],
        &["kr", "--type", "A", "--k", "2", "--r", "1", "--paths", "40000"],
        &["ensemble", "--type", "A", "--k", "30", "--n", "16", "--format", "csv"],
        &["ensemble", "--type", "C", "--k", "30", "--n", "16"],
        &[
            "asymptotics",
            "--type",
            "C",
            "--k",
            "2",
            "--regime",
            "diffusive",
            "--c",
            "1.5",
            "--times",
            "10,20",
            "--x",
            "0.1,0.3",
        ],
    ];
    let mut mismatched = Vec::new();
    for args in runs {
        let run = |threads: &str| {
            let out = Command::new(env!("CARGO_BIN_EXE_weylsim"))
                .args(args)
                .args(["--seed", "123", "--threads", threads])
                .output()
                .unwrap();
            assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
            out.stdout
        };
        if run("1") != run("8") {
            mismatched.push(args[0]);
        }
    }
    verdict(
        mismatched.is_empty(),
        format!("{} seeded runs, byte-identical under --threads 1 and 8; mismatches: {mismatched:?}", runs.len()),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("cross-route exactness", cross_route, Duration::from_secs(120)),
        ("Monte Carlo concordance", mc_concordance, Duration::from_secs(300)),
        ("leading-term bound audit", leading_term_audit, Duration::from_secs(60)),
        ("closed-form principal eigenfunction", closed_form_principal, Duration::from_secs(60)),
        ("orthonormality", orthonormality, Duration::from_secs(120)),
        ("one-dimensional classical value", classical_value, Duration::from_secs(5)),
        ("regime convergence", regime_convergence, Duration::from_secs(120)),
        ("soft transition constant", soft_transition, Duration::from_secs(600)),
        ("law of large numbers", law_of_large_numbers, Duration::from_secs(300)),
        ("rate-function consistency", rate_consistency, Duration::from_secs(60)),
        ("determinism across thread counts", determinism, Duration::from_secs(600)),
    ];
    let mut failed = 0;
    for (i, (name, check, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let elapsed = start.elapsed();
        let pass = v.pass && elapsed <= budget;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<38} {}  {}  [{:.1}s / {}s]",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("{} of 11 criteria passed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
