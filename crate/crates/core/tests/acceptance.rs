//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary so
//! the lines always reach stdout; exits nonzero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use agemeasure::confidence::Mode;
use agemeasure::estimators::{estimate_constant, Design, Equations};
use agemeasure::harness::{builtin_configs, run_experiment, write_all, ExperimentConfig, ExperimentResult, RunOptions};
use agemeasure::pathfn::{int_pair, segment_for_model};
use agemeasure::{simulate, RateModel, TestFn};
use common::{mean_var, oracle_systems, random_log};
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new() -> Self {
        Self {
            pass: true,
            detail: String::new(),
        }
    }

    /// Records one check; `note` is kept either way.
    fn check(&mut self, ok: bool, note: impl AsRef<str>) {
        self.pass &= ok;
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        if !ok {
            self.detail.push_str("FAILED ");
        }
        self.detail.push_str(note.as_ref());
    }
}

struct Experiments {
    results: Vec<ExperimentResult>,
    constant_sweep: Duration,
}

fn run_builtin() -> Experiments {
    let mut results = Vec::new();
    let mut constant_sweep = Duration::ZERO;
    for cfg in builtin_configs().expect("builtin configs parse") {
        let start = Instant::now();
        let r = run_experiment(&cfg, &RunOptions::default()).expect("experiment runs");
        if cfg.name.contains("constant") {
            constant_sweep = start.elapsed();
        }
        results.push(r);
    }
    Experiments {
        results,
        constant_sweep,
    }
}

fn find<'a>(e: &'a Experiments, tag: &str) -> &'a ExperimentResult {
    e.results
        .iter()
        .find(|r| r.config.name.contains(tag))
        .expect("experiment present")
}

fn stat(r: &ExperimentResult, p: &str, k: u32) -> (f64, f64, f64) {
    let s = r.summary(p, k).expect("summary present");
    (s.bias.unwrap(), s.variance.unwrap(), s.mse.unwrap())
}

fn constant_sweep(e: &Experiments) -> Outcome {
    let r = find(e, "constant");
    let mut o = Outcome::new();
    let (bh, vh, _) = stat(r, "h", 1000);
    let (bb, vb, _) = stat(r, "b", 1000);
    let (bh4, _, _) = stat(r, "h", 10000);
    o.check(bh.abs() <= 0.015, format!("K=1000 |bias h| {:.5} <= 0.015", bh.abs()));
    o.check(
        (0.00008..=0.0007).contains(&vh),
        format!("var h {vh:.3e} in [8e-5, 7e-4]"),
    );
    o.check(bb.abs() <= 0.02, format!("|bias b| {:.5} <= 0.02", bb.abs()));
    o.check(
        (0.00013..=0.0012).contains(&vb),
        format!("var b {vb:.3e} in [1.3e-4, 1.2e-3]"),
    );
    o.check(
        bh4.abs() <= 0.005,
        format!("K=10000 |bias h| {:.5} <= 0.005", bh4.abs()),
    );
    let secs = e.constant_sweep.as_secs_f64();
    o.check(secs <= 300.0, format!("K-sweep {secs:.1}s <= 300s"));
    o
}

fn popdep_bias(e: &Experiments) -> Outcome {
    let r = find(e, "popdep");
    let mut o = Outcome::new();
    for p in ["lambda", "eta"] {
        let (b, _, _) = stat(r, p, 1000);
        o.check(b.abs() <= 0.006, format!("K=1000 |bias {p}| {:.5} <= 0.006", b.abs()));
    }
    o
}

fn agedep_bias(e: &Experiments) -> Outcome {
    let r = find(e, "agedep");
    let mut o = Outcome::new();
    for p in ["h1", "h2", "b1", "b2"] {
        let (b, v, _) = stat(r, p, 10000);
        o.check(
            b.abs() <= 0.01 && v <= 0.001,
            format!("{p}: |bias| {:.5}, var {v:.2e}", b.abs()),
        );
    }
    o
}

fn popage_bias(e: &Experiments) -> Outcome {
    let r = find(e, "popage");
    let mut o = Outcome::new();
    for p in ["alpha1", "alpha2", "gamma1", "gamma2"] {
        let (b, _, _) = stat(r, p, 10000);
        o.check(b.abs() <= 0.006, format!("{p}: |bias| {:.5}", b.abs()));
    }
    o
}

fn mse_monotone(e: &Experiments) -> Outcome {
    let mut o = Outcome::new();
    let mut checked = 0;
    for r in &e.results {
        for p in r.config.parameter_names() {
            let mses: Vec<f64> = [100, 1000, 10000].iter().map(|&k| stat(r, &p, k).2).collect();
            let ok = mses.windows(2).all(|w| w[1] < w[0]);
            checked += 1;
            if !ok {
                o.check(false, format!("{}:{p} {mses:?}", r.config.name));
            }
        }
    }
    o.check(o.pass, format!("{checked} parameter sweeps strictly decreasing"));
    o
}

fn integration_oracle() -> Outcome {
    let mut o = Outcome::new();
    let mut worst: f64 = 0.0;
    let mut worst_add: f64 = 0.0;
    let mut logs = 0;
    for seed in 0..50u64 {
        let (model, log) = random_log(10_000 + seed);
        assert!(log.carrying_capacity <= 50);
        let design = Design::of(&model).unwrap();
        let eq = Equations::assemble(&log, &design).unwrap();
        let oracle = oracle_systems(&log, &design, 1e-5);
        let h = vec![0.5; design.death.len()];
        let birth = eq.birth_system(&h).unwrap();
        let mut pairs: Vec<(f64, f64)> = Vec::new();
        for m in 0..design.death.len() {
            for i in 0..design.death.len() {
                pairs.push((eq.death.matrix[m][i], oracle.death_matrix[m][i]));
            }
            pairs.push((eq.death.rhs[m], oracle.death_rhs[m]));
        }
        for m in 0..design.birth.len() {
            for i in 0..design.birth.len() {
                pairs.push((birth.matrix[m][i], oracle.birth_matrix[m][i]));
            }
            let want = oracle.birth_base[m] + oracle.birth_coupling[m].iter().zip(&h).map(|(c, h)| c * h).sum::<f64>();
            pairs.push((birth.rhs[m], want));
        }
        worst = pairs.iter().map(|(a, b)| (a - b).abs()).fold(worst, f64::max);

        let path = segment_for_model(&log, &model).unwrap();
        let f = path.compile(&(TestFn::age_time(1) + TestFn::age_pow(2))).unwrap();
        let whole = path.integrate(|s| s.pair_poly(&f));
        for tau in path.breakpoints() {
            let split = path.integrate_over(0.0, tau, |s| s.pair_poly(&f))
                + path.integrate_over(tau, path.horizon(), |s| s.pair_poly(&f));
            worst_add = worst_add.max((split - whole).abs());
        }
        logs += 1;
    }
    o.check(
        worst <= 1e-4,
        format!("{logs} logs, max |entry - Riemann| {worst:.2e} <= 1e-4"),
    );
    o.check(
        worst_add <= 1e-12,
        format!("max additivity error {worst_add:.1e} <= 1e-12"),
    );
    o
}

fn pure_birth_equivalence() -> Outcome {
    let mut o = Outcome::new();
    let (b, k) = (0.4, 1000u32);
    let model = RateModel::Constant { h: 0.0, b };
    let mut worst: f64 = 0.0;
    let mut z = Vec::new();
    for seed in 0..500u64 {
        let ages = agemeasure::harness::sample_initial_ages(
            &agemeasure::harness::InitialAgeLaw::Uniform { lo: 0.0, hi: 1.0 },
            k,
            seed,
        );
        let log = simulate(&model, &ages, k, 1.0, seed).unwrap();
        let (_, b_hat) = estimate_constant(&log).unwrap();
        let path = segment_for_model(&log, &model).unwrap();
        let exposure = int_pair(&path, &TestFn::one(), 0).unwrap();
        let growth = (log.final_count() as f64 - log.initial_count() as f64) / k as f64;
        worst = worst.max((b_hat - growth / exposure).abs());
        z.push((k as f64 * exposure / b_hat).sqrt() * (b_hat - b));
    }
    let (mean, var) = mean_var(&z);
    let sigma = 1.0 / (z.len() as f64).sqrt();
    o.check(
        worst <= 1e-12,
        format!("max |b_hat - growth/exposure| {worst:.1e} <= 1e-12"),
    );
    o.check(
        mean.abs() <= 3.0 * sigma,
        format!("normalized mean {mean:.4} within ±{:.4}", 3.0 * sigma),
    );
    o.check(
        (0.8..=1.2).contains(&var),
        format!("normalized variance {var:.3} in [0.8, 1.2]"),
    );
    o
}

fn builtin(tag: &str) -> ExperimentConfig {
    builtin_configs()
        .unwrap()
        .into_iter()
        .find(|c| c.name.contains(tag))
        .unwrap()
}

fn interval_coverage() -> Outcome {
    let mut o = Outcome::new();
    let mut cfg = builtin("constant");
    cfg.replicates = 200;
    cfg.k_values = vec![1000];
    let r = run_experiment(&cfg, &RunOptions::default()).unwrap();
    for mode in Mode::ALL {
        let c = r.coverage_of("h", 1000, mode, 0.05).expect("coverage row");
        o.check(
            (180..=200).contains(&c.covered),
            format!("{mode} covers h in {}/{}", c.covered, c.n),
        );
    }

    let mut cfg = builtin("popdep");
    cfg.replicates = 100;
    cfg.k_values = vec![1000];
    let r = run_experiment(&cfg, &RunOptions::default()).unwrap();
    let (mut matched, mut higher) = (0, 0);
    for rep in &r.blocks[0].replicates {
        let get = |m: Mode| rep.intervals.iter().find(|c| c.parameter == "lambda" && c.mode == m);
        if let (Some(d), Some(p)) = (get(Mode::Direct), get(Mode::PlugIn)) {
            matched += 1;
            if d.lower > p.lower && d.upper > p.upper {
                higher += 1;
            }
        }
    }
    o.check(
        matched > 0 && higher == matched,
        format!("direct lambda interval higher on {higher}/{matched} matched samples"),
    );
    o
}

fn region_sanity() -> Outcome {
    let mut o = Outcome::new();
    let mut cfg = builtin("agedep");
    cfg.replicates = 50;
    cfg.k_values = vec![10000];
    if let Some(c) = cfg.confidence.as_mut() {
        c.region_samples = 50;
        c.alpha = vec![0.05];
    }
    let r = run_experiment(&cfg, &RunOptions::default()).unwrap();
    let (mut inside, mut direct, mut convex, mut plugin) = (0, 0, 0, 0);
    for rep in &r.blocks[0].replicates {
        for region in rep.regions.iter().filter(|g| g.names == ["h1", "h2"]) {
            match region.mode {
                Mode::Direct => {
                    direct += 1;
                    inside += region.contains([0.2, 0.4]) as usize;
                }
                Mode::PlugIn => {
                    plugin += 1;
                    convex += region.is_convex_along_grid_lines() as usize;
                }
            }
        }
    }
    o.check(
        direct == 50 && inside >= 45,
        format!("truth inside direct region {inside}/{direct} (need >= 45 of 50)"),
    );
    o.check(
        plugin == 50 && convex == plugin,
        format!("plug-in convex {convex}/{plugin}"),
    );
    o
}

fn simulator_exactness() -> Outcome {
    let mut o = Outcome::new();
    let (n0, c) = (20usize, 0.5);
    let model = RateModel::Constant { h: c, b: 0.0 };
    let mut counts = vec![0u64; n0 + 1];
    for seed in 0..2000 {
        counts[simulate(&model, &vec![0.5; n0], n0 as u32, 1.0, seed)
            .unwrap()
            .final_count()] += 1;
    }
    let law = statrs::distribution::Binomial::new((-c).exp(), n0 as u64).unwrap();
    let mut bins = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (i, &n) in counts.iter().enumerate() {
        obs += n as f64;
        exp += 2000.0 * law.pmf(i as u64);
        if exp >= 5.0 {
            bins.push((obs, exp));
            (obs, exp) = (0.0, 0.0);
        }
    }
    let last = bins.last_mut().unwrap();
    last.0 += obs;
    last.1 += exp;
    let stat: f64 = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let p = 1.0 - ChiSquared::new((bins.len() - 1) as f64).unwrap().cdf(stat);
    o.check(p > 0.01, format!("pure-death binomial p = {p:.3} > 0.01"));

    let (h, b, n) = (0.3, 0.5, 100u32);
    let finals: Vec<f64> = (0..1000)
        .map(|s| {
            simulate(&RateModel::Constant { h, b }, &vec![0.2; n as usize], n, 1.0, s)
                .unwrap()
                .final_count() as f64
        })
        .collect();
    let (mean, var) = mean_var(&finals);
    let want = n as f64 * (b - h).exp();
    let se = (var / finals.len() as f64).sqrt();
    o.check(
        (mean - want).abs() <= 3.0 * se,
        format!("birth-death mean {mean:.2} vs {want:.2} (3 SE = {:.2})", 3.0 * se),
    );

    let mut cfg = builtin("popage");
    cfg.replicates = 3;
    cfg.k_values = vec![100, 1000];
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut bytes = Vec::new();
    for (d, jobs) in dirs.iter().zip([1, 4]) {
        let r = run_experiment(
            &cfg,
            &RunOptions {
                jobs: Some(jobs),
                ..Default::default()
            },
        )
        .unwrap();
        let mut all = Vec::new();
        for p in write_all(&r, d.path()).unwrap() {
            all.extend(std::fs::read(p).unwrap());
        }
        bytes.push(all);
    }
    let log = |s| {
        simulate(&RateModel::Constant { h, b }, &vec![0.2; 50], 50, 1.0, s)
            .unwrap()
            .to_text()
    };
    o.check(bytes[0] == bytes[1] && log(3) == log(3), "byte-identical reruns");
    o
}

type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn main() {
    let start = Instant::now();
    let experiments = run_builtin();
    let criteria: Vec<(&str, Criterion<'_>)> = vec![
        (
            "constant-rate estimates, K sweep and runtime",
            Box::new(|| constant_sweep(&experiments)),
        ),
        (
            "population-linear estimates at K=1000",
            Box::new(|| popdep_bias(&experiments)),
        ),
        (
            "age-piecewise estimates at K=10000",
            Box::new(|| agedep_bias(&experiments)),
        ),
        (
            "population-age estimates at K=10000",
            Box::new(|| popage_bias(&experiments)),
        ),
        ("MSE strictly decreasing in K", Box::new(|| mse_monotone(&experiments))),
        ("integration oracle and additivity", Box::new(integration_oracle)),
        ("pure-birth equivalence and normality", Box::new(pure_birth_equivalence)),
        (
            "interval coverage and direct/plug-in ordering",
            Box::new(interval_coverage),
        ),
        ("2-D region coverage and plug-in convexity", Box::new(region_sanity)),
        ("simulator exactness and determinism", Box::new(simulator_exactness)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        failed += !o.pass as usize;
        let line = format!(
            "{} [{:>2}] {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
        println!("{line}");
    }
    println!(
        "acceptance: {}/{} passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
