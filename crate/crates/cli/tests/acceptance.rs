//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! fails. Built without the libtest harness so the lines always print.

use std::path::Path;
use std::time::Instant;

use rand::Rng;

use persistence_core::gp_engine::{gp_persistence, DenseSampler};
use persistence_core::persistence_mc::{estimate_persistence, negativity_block_certificate, PersistencePolicy};
use persistence_core::poly_model::{CoefficientDistribution, RegularlyVaryingWeight, SlowlyVarying};
use persistence_core::rng::StreamKey;
use persistence_core::stats::Estimate;
use persistence_lab::run::csv_name;
use persistence_lab::{parse_config, run_experiment, RunReport, Subcommand};

fn run(text: &str, out: &Path) -> RunReport {
    let parsed = parse_config(text).unwrap_or_else(|e| panic!("{e}"));
    let mut cfg = parsed.config;
    cfg.output = out.to_path_buf();
    run_experiment(&cfg, &parsed.warnings).unwrap_or_else(|e| panic!("{e:#}"))
}

fn check<'a>(r: &'a RunReport, name: &str) -> &'a persistence_lab::report::Check {
    r.checks.iter().find(|c| c.name == name).unwrap_or_else(|| panic!("no check {name}"))
}

fn slope(r: &RunReport) -> Estimate {
    Estimate::new(r.fits[0]["slope"].as_f64().unwrap(), r.fits[0]["stderr"].as_f64().unwrap())
}

struct Ledger {
    failed: Vec<u32>,
}

impl Ledger {
    fn report(&mut self, id: u32, ok: bool, what: &str, started: Instant) {
        let tag = if ok { "PASS" } else { "FAIL" };
        println!("{tag} criterion {id}: {what} [{:.0} s]", started.elapsed().as_secs_f64());
        if !ok {
            self.failed.push(id);
        }
    }
}

const POLY_GRID: &str = "n_grid = [16, 32, 64, 128, 256]\ntrials = 200000\n";

/// poly-persistence to CSV, then `fit` on that CSV.
fn poly_then_fit(dir: &Path, tag: &str, model: &str, extra_fit: &str) -> (RunReport, RunReport) {
    let poly_dir = dir.join(format!("poly-{tag}"));
    let poly = run(&format!("subcommand = \"poly-persistence\"\n{POLY_GRID}{model}"), &poly_dir);
    let csv = poly_dir.join(csv_name(Subcommand::PolyPersistence));
    let fit = run(
        &format!("subcommand = \"fit\"\ninputs = [{:?}]\n{extra_fit}", csv.display().to_string()),
        &dir.join(format!("fit-{tag}")),
    );
    (poly, fit)
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let mut ledger = Ledger { failed: Vec::new() };

    // 1. b_0 from the sech process.
    let t = Instant::now();
    let gp0 = run(
        "subcommand = \"gp-exponent\"\nalpha = 0.0\ndt = 0.01\nt_grid = [5, 10, 15, 20]\ntrials = 200000\n",
        &dir.join("gp0"),
    );
    let b0 = gp0.fits[0]["b_hat"].as_f64().unwrap();
    let se0 = gp0.fits[0]["stderr"].as_f64().unwrap();
    ledger.report(1, (b0 - 0.1875).abs() <= 0.02, &format!("b̂_0 = {b0:.4} ± {se0:.4}, target 0.1875 ± 0.02"), t);

    // 2. Polynomial exponent at α = 0, Gaussian.
    let t = Instant::now();
    let (poly_g, fit_g) = poly_then_fit(dir, "gaussian", "", "");
    let sg = slope(&fit_g);
    ledger.report(
        2,
        (sg.value - 0.75).abs() <= 0.15,
        &format!("slope {:.4} ± {:.4}, target 0.75 ± 0.15", sg.value, sg.stderr),
        t,
    );

    // 3. Universality.
    let t = Instant::now();
    let (_, fit_r) = poly_then_fit(dir, "rademacher", "distribution = \"rademacher\"\n", "");
    let (_, fit_t) = poly_then_fit(dir, "student", "distribution = \"student_t\"\ndf = 5.0\nstandardize = true\n", "");
    let (sr, st) = (slope(&fit_r), slope(&fit_t));
    ledger.report(
        3,
        sr.overlaps95(&sg) && st.overlaps95(&sg),
        &format!(
            "rademacher {:.4} ± {:.4}, student_t(5) {:.4} ± {:.4}; 95% intervals against gaussian [{:.4}, {:.4}]",
            sr.value,
            sr.stderr,
            st.value,
            st.stderr,
            sg.ci95().0,
            sg.ci95().1
        ),
        t,
    );

    // 4. α = 2 cross-check against 2(b̂_2 + 3/16).
    let t = Instant::now();
    let gp2 = run(
        "subcommand = \"gp-exponent\"\nalpha = 2.0\ndt = 0.01\nt_grid = [5, 10, 15, 20]\ntrials = 200000\n",
        &dir.join("gp2"),
    );
    let b2 = gp2.fits[0]["b_hat"].as_f64().unwrap();
    let se2 = gp2.fits[0]["stderr"].as_f64().unwrap();
    let (_, fit_2) = poly_then_fit(
        dir,
        "alpha2",
        "alpha = 2.0\n",
        &format!("b_alpha = {b2}\nb_alpha_stderr = {se2}\nb_zero = 0.1875\nb_zero_stderr = 0.0\n"),
    );
    let s2 = slope(&fit_2);
    let pred = &fit_2.fits[0]["predicted"];
    ledger.report(
        4,
        check(&fit_2, "predicted_exponent").passed,
        &format!(
            "slope {:.4} ± {:.4} vs 2(b̂_2 + 3/16) = {:.4} ± {:.4} (b̂_2 = {b2:.4} ± {se2:.4})",
            s2.value,
            s2.stderr,
            pred["value"].as_f64().unwrap(),
            pred["stderr"].as_f64().unwrap()
        ),
        t,
    );

    // 5. Kac oracle.
    let t = Instant::now();
    let kac = run("subcommand = \"kac\"\nkac_degree = 50\nkac_trials = 1000000\n", &dir.join("kac"));
    let mc = check(&kac, "kac_monte_carlo");
    let drift = check(&kac, "kac_log_drift");
    ledger.report(5, mc.passed && drift.passed, &format!("{}; {}", mc.detail, drift.detail), t);

    // 6 and 7. Deterministic covariance checks (plus the Monte Carlo
    // ordering checks used by 9).
    let t = Instant::now();
    let cov = run("subcommand = \"covariance-check\"\nmc_trials = 100000\n", &dir.join("cov"));
    let conv = check(&cov, "convergence_ratio");
    ledger.report(6, conv.passed, &conv.detail, t);
    let sech = check(&cov, "sech_limit");
    let full = check(&cov, "sech_full_argument");
    ledger.report(7, sech.passed, &format!("{}; full-argument form: {}", sech.detail, full.detail), t);

    // 8. Oracle equivalence and the unknown rate on the criterion-2 workload.
    let t = Instant::now();
    let roots = run(
        "subcommand = \"root-count\"\nrandom_polys = 10000\nmax_degree = 12\ncoefficient_bound = 20\n",
        &dir.join("roots"),
    );
    let agree = check(&roots, "oracle_agreement");
    let (unknown, trials) = poly_g.results.iter().fold((0u64, 0u64), |(u, n), r| {
        (u + r["unknown"].as_u64().unwrap(), n + r["trials"].as_u64().unwrap())
    });
    let rate = unknown as f64 / trials as f64;
    ledger.report(
        8,
        agree.passed && rate < 1e-3,
        &format!("{}; certified unknown rate {rate:.2e} over {trials} criterion-2 trials", agree.detail),
        t,
    );

    // 9. Property suites.
    let t = Instant::now();
    let mut notes = Vec::new();
    let flat = RegularlyVaryingWeight::new(0.0, SlowlyVarying::Constant).unwrap();
    let odd_zero = (1..=15).step_by(2).all(|n| {
        estimate_persistence(n, &flat, &CoefficientDistribution::gaussian(), 1000, &PersistencePolicy::default(), 1)
            .map(|e| e.p_hat == 0.0)
            .unwrap_or(false)
    });
    notes.push(format!("odd degree ≡ 0: {odd_zero}"));

    let ordering = check(&cov, "slepian_order").passed && check(&cov, "maximal_inequality").passed;
    notes.push(format!("Slepian and maximal-inequality reports clean: {ordering}"));

    let key = StreamKey::new(2, "acceptance-white-noise", 0);
    let white = (1..=10usize).all(|m| {
        let s = DenseSampler::from_fn(m, |i, j| (i == j) as u8 as f64).unwrap();
        let p = gp_persistence(&s, m, 0.0, 200_000, &key.child(m as u64)).unwrap();
        let want = 0.5f64.powi(m as i32);
        (p.p_hat - want).abs() <= 3.0 * (want * (1.0 - want) / 200_000.0).sqrt()
    });
    notes.push(format!("white noise 2^−m within 3 SE for m ≤ 10: {white}"));

    let grid: Vec<f64> = (0..10_000).map(|k| -2.0 + 4.0 * (k as f64 + 0.5) / 10_000.0).collect();
    let key = StreamKey::new(3, "acceptance-certificate", 0);
    let mut certified = 0;
    for i in 0..1000u64 {
        let mut rng = key.rng(i);
        let eps: f64 = rng.random_range(0.02..0.1);
        let eta = rng.random_range(0.0..0.95) * (1.0 - eps).sqrt() / (1.0 + eps);
        let rho = rng.random_range(0.1..10.0);
        let alpha: f64 = rng.random_range(0.0..1.0);
        let w = RegularlyVaryingWeight::new(alpha, SlowlyVarying::Constant).unwrap();
        // (1 + 1/s)^α < 1 + ε once s > α/ε.
        let start = 2 * ((alpha / eps).ceil() as usize / 2 + 1);
        let end = start + 2 * rng.random_range(0..20usize);
        let xi: Vec<f64> = (0..=end)
            .map(|j| if j % 2 == 0 { -rho * rng.random_range(1.0..3.0) } else { -eta * rho * rng.random_range(0.0..1.0) })
            .collect();
        if negativity_block_certificate(rho, eta, eps, &w, &xi, start..=end, &grid) == Ok(true) {
            certified += 1;
        }
    }
    notes.push(format!("certificate true on {certified}/1000 valid patterns"));
    ledger.report(9, odd_zero && ordering && white && certified == 1000, &notes.join("; "), t);

    if ledger.failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {:?}", ledger.failed);
        std::process::exit(1);
    }
}
