//! Acceptance suite. One line per criterion; exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use eslab_core::diophantine::{golden, AlphaSpec, AlphaVector, Provenance};
use eslab_core::discrepancy::{discrepancy, sup_discrepancy, t3_lower_bound, Mode};
use eslab_core::fourier::{build_named_function, FunctionSpec, SparseFourierFunction};
use eslab_core::harness::{run_experiment, ExperimentConfig, ExperimentKind, Measure, Schedule};
use eslab_core::weights::{
    fit_log_kernel_constants, kernel_closed_form, kernel_direct, make_weights, BumpProfile, WeightScheme,
};
use eslab_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20240611;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn random_sobolev(delta: f64, r: f64) -> FunctionSpec {
    FunctionSpec::RandomSobolev {
        d: 1,
        delta,
        r,
        seed: Some(SEED),
    }
}

fn rates_config(scheme: WeightScheme, function: FunctionSpec, from: u32, to: u32) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Rates, Schedule::dyadic(from, to));
    cfg.scheme = Some(scheme);
    cfg.alpha = Some(AlphaSpec::Golden);
    cfg.function = Some(function);
    cfg.grid_size = Some(1024);
    cfg
}

fn slope_of(cfg: &ExperimentConfig) -> f64 {
    run_experiment(cfg).expect("experiment runs").fit.expect("fit present").slope
}

fn ac1() -> Outcome {
    const TOL: f64 = 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let ts: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
    let mut worst: f64 = 0.0;
    for scheme in [WeightScheme::Rectangular, WeightScheme::Triangular, WeightScheme::Binomial] {
        for n in [4u64, 16, 64, 256] {
            let w = make_weights(&scheme, n).unwrap();
            for &t in &ts {
                let a = kernel_direct(&w, t);
                let b = kernel_closed_form(&scheme, n, t).unwrap();
                worst = worst.max((a - b).norm());
            }
        }
    }
    outcome(worst <= TOL, format!("max |direct - closed| = {worst:.2e} (tol {TOL:.0e})"))
}

fn random_instance(rng: &mut ChaCha8Rng) -> (SparseFourierFunction, eslab_core::WeightSequence, AlphaVector, Vec<f64>) {
    let d = rng.random_range(1..=2usize);
    let terms = rng.random_range(1..=12usize);
    let mut entries = Vec::new();
    for _ in 0..terms {
        let m: Vec<i64> = (0..d).map(|_| rng.random_range(-64..=64i64)).collect();
        entries.push((m, Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)));
    }
    let real = rng.random_bool(0.5);
    let f = if real {
        SparseFourierFunction::real_from_half(d, entries).unwrap()
    } else {
        SparseFourierFunction::new(d, entries, false).unwrap()
    };
    let schemes = [
        WeightScheme::Rectangular,
        WeightScheme::Triangular,
        WeightScheme::BochnerRiesz { gamma: 1.5 },
        WeightScheme::Binomial,
        WeightScheme::SmoothBump { profile: BumpProfile::Exp },
        WeightScheme::Logarithmic,
        WeightScheme::two_sided(2.0, 2),
    ];
    let scheme = &schemes[rng.random_range(0..schemes.len())];
    let n = rng.random_range(1..=512u64);
    let w = make_weights(scheme, n).unwrap();
    let alpha = AlphaVector::new((0..d).map(|_| rng.random::<f64>()).collect(), Provenance::User).unwrap();
    let x: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
    (f, w, alpha, x)
}

fn ac2() -> Outcome {
    const SUM_TOL: f64 = 1e-12;
    const MODE_TOL: f64 = 1e-10;
    let mut worst_sum: f64 = 0.0;
    let cheap = [
        WeightScheme::Rectangular,
        WeightScheme::Triangular,
        WeightScheme::BochnerRiesz { gamma: 1.5 },
        WeightScheme::Binomial,
        WeightScheme::SmoothBump { profile: BumpProfile::Exp },
        WeightScheme::Logarithmic,
    ];
    for scheme in &cheap {
        for n in 1..=4096u64 {
            let w = make_weights(scheme, n).unwrap();
            worst_sum = worst_sum.max((w.total() - 1.0).abs());
        }
    }
    let mut two_sided_ns: Vec<u64> = (1..=64).collect();
    two_sided_ns.extend([100, 128, 255, 256, 511, 512, 1000, 1024, 2047, 2048, 3000, 4095, 4096]);
    for &n in &two_sided_ns {
        let w = make_weights(&WeightScheme::two_sided(2.0, 2), n).unwrap();
        worst_sum = worst_sum.max((w.total() - 1.0).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for _ in 0..20 {
        let len = rng.random_range(1..=50usize);
        let values: Vec<f64> = (0..len).map(|_| rng.random::<f64>() * 2.0 - 0.5).collect();
        let scheme = WeightScheme::Custom { n_min: -7, values };
        if let Ok(w) = make_weights(&scheme, 1) {
            worst_sum = worst_sum.max((w.total() - 1.0).abs());
        }
    }
    let mut worst_mode: f64 = 0.0;
    for _ in 0..200 {
        let (f, w, alpha, x) = random_instance(&mut rng);
        let a = discrepancy(&f, &w, &alpha, &x, Mode::Space).unwrap();
        let b = discrepancy(&f, &w, &alpha, &x, Mode::Freq).unwrap();
        worst_mode = worst_mode.max((a - b).norm());
    }
    outcome(
        worst_sum <= SUM_TOL && worst_mode <= MODE_TOL,
        format!("max |sum - 1| = {worst_sum:.2e}, max |space - freq| = {worst_mode:.2e}"),
    )
}

fn ac3() -> Outcome {
    const EACH: Duration = Duration::from_secs(60);
    let timed = |scheme| {
        let start = Instant::now();
        let slope = slope_of(&rates_config(scheme, random_sobolev(3.0, 64.0), 4, 14));
        (slope, start.elapsed())
    };
    let (rect, t_rect) = timed(WeightScheme::Rectangular);
    let (tri, t_tri) = timed(WeightScheme::Triangular);
    let pass = (-1.15..=-0.85).contains(&rect) && (-2.2..=-1.8).contains(&tri) && t_rect <= EACH && t_tri <= EACH;
    outcome(
        pass,
        format!(
            "rectangular slope {rect:.3} in [-1.15, -0.85] ({:.2}s), triangular slope {tri:.3} in [-2.2, -1.8] ({:.2}s), each under 60s",
            t_rect.as_secs_f64(),
            t_tri.as_secs_f64()
        ),
    )
}

fn ac4() -> Outcome {
    // schedule 2^2..2^7 squared: N = 2^4..2^14, measured against floor(sqrt N)
    let mut cfg = rates_config(WeightScheme::Binomial, random_sobolev(3.0, 64.0), 2, 7);
    cfg.square_schedule = true;
    let slope = slope_of(&cfg);
    outcome((-2.2..=-1.8).contains(&slope), format!("slope vs sqrt(N) {slope:.3} in [-2.2, -1.8]"))
}

fn ac5() -> Outcome {
    let mut cfg = rates_config(WeightScheme::two_sided(2.0, 2), random_sobolev(3.0, 64.0), 4, 14);
    cfg.measure = Some(Measure::SupUpper);
    cfg.delta = Some(3.0);
    cfg.sigma = Some(1.0);
    let rep = run_experiment(&cfg).unwrap();
    let spread = rep.ratio_spread();
    outcome(spread <= 3.0, format!("sup_upper N^2 / |f|_3 varies by {spread:.3} (limit 3)"))
}

fn ac6() -> Outcome {
    const BAND: f64 = 0.15;
    let mut details = Vec::new();
    let mut pass = true;
    for (theta, expect) in [(0.5, 1.0), (1.0, 1.0), (2.0, 2.0)] {
        let mut cfg = ExperimentConfig::new(ExperimentKind::L2sum, Schedule::dyadic(3, 9));
        cfg.alpha = Some(AlphaSpec::Golden);
        cfg.theta = Some(theta);
        cfg.sigma = Some(1.0);
        cfg.h = Some(0.38);
        let rep = run_experiment(&cfg).unwrap();
        let slope = rep.check_f64("slope").unwrap();
        let occ = rep.check_bool("occupancy_ok").unwrap();
        let maj = rep.check_bool("majorant_holds").unwrap();
        pass &= occ && maj && (slope - expect).abs() <= BAND;
        details.push(format!("theta={theta}: slope {slope:.3} (want {expect}), occupancy {occ}, majorant {maj}"));
    }
    outcome(pass, details.join("; "))
}

fn ac7() -> Outcome {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Sandwich, Schedule::dyadic(3, 7));
    cfg.scheme = Some(WeightScheme::two_sided(2.0, 2));
    cfg.grid_size = Some(4096);
    let rep = run_experiment(&cfg).unwrap();
    let ratio = rep.check_f64("k_over_h").unwrap();
    let positive = rep.check_bool("positive").unwrap();
    outcome(
        positive && ratio <= 50.0,
        format!(
            "h = {:.4}, k = {:.4}, k/h = {ratio:.3} (limit 50), kernel positive {positive}",
            rep.check_f64("h").unwrap(),
            rep.check_f64("k").unwrap()
        ),
    )
}

fn ac8() -> Outcome {
    let ns: Vec<u64> = (3..=10).map(|e| 1u64 << e).collect();
    let fit = fit_log_kernel_constants(&ns, 4096).unwrap();
    let ups: Vec<f64> = fit.per_n.iter().map(|p| p.1).collect();
    let lows: Vec<f64> = fit.per_n.iter().map(|p| p.2).collect();
    let spread = |v: &[f64]| v.iter().cloned().fold(f64::MIN, f64::max) / v.iter().cloned().fold(f64::MAX, f64::min);
    let bound_ok = fit.c_upper.is_finite() && fit.c_lower > 0.0 && spread(&ups) <= 3.0 && spread(&lows) <= 3.0;

    let mut cfg = rates_config(WeightScheme::Logarithmic, random_sobolev(1.0, 64.0), 3, 10);
    cfg.measure = Some(Measure::SupUpper);
    let rep = run_experiment(&cfg).unwrap();
    let variation = rep.ratio_spread();
    outcome(
        bound_ok && variation <= 3.0,
        format!(
            "c_upper = {:.3}, c_lower = {:.3} (per-N spreads {:.2}, {:.2}); sup_upper log(1+N) varies by {variation:.3} (limit 3)",
            fit.c_upper,
            fit.c_lower,
            spread(&ups),
            spread(&lows)
        ),
    )
}

fn ac9() -> Outcome {
    let g = golden();
    let mut pincer = true;
    for scheme in [WeightScheme::Rectangular, WeightScheme::Triangular, WeightScheme::two_sided(2.0, 2)] {
        let theta = scheme.nominal_theta().unwrap();
        for m in [1i64, 2, 3, 5, 8] {
            let f = build_named_function(&FunctionSpec::Monomial { m: vec![m] }, None, None).unwrap();
            for e in 4..=14 {
                let n = 1u64 << e;
                let w = make_weights(&scheme, n).unwrap();
                let sup = sup_discrepancy(&f, &w, &g, 2 * m as usize + 1).unwrap().sup_lower;
                let lower = t3_lower_bound(&f, &scheme, &g, &[m], &[n]).unwrap();
                pincer &= lower <= (n as f64).powf(theta) * sup * (1.0 + 1e-12);
            }
        }
    }
    let f = build_named_function(&FunctionSpec::Monomial { m: vec![1] }, None, None).unwrap();
    let ns: Vec<u64> = (1..=100_000).collect();
    let running = t3_lower_bound(&f, &WeightScheme::Triangular, &g, &[1], &ns).unwrap();
    let limit = 1.0 / (std::f64::consts::PI * g.components[0]).sin().powi(2);
    let frac = running / limit;
    outcome(
        pincer && frac >= 0.99,
        format!("pincer holds {pincer}; running max {running:.6} = {frac:.5} of 1/sin^2(pi alpha) = {limit:.6}"),
    )
}

fn ac10() -> Outcome {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Divergence, Schedule::dyadic(4, 14));
    cfg.scheme = Some(WeightScheme::two_sided(2.0, 2));
    cfg.alpha = Some(AlphaSpec::Golden);
    cfg.function = Some(FunctionSpec::T5 { d: 1, theta: 2.0, r: 4096.0 });
    cfg.grid_size = Some(8193);
    let t5 = run_experiment(&cfg).unwrap();

    let mut cfg = ExperimentConfig::new(ExperimentKind::Divergence, Schedule::dyadic(4, 14));
    cfg.scheme = Some(WeightScheme::two_sided(2.0, 2));
    cfg.alpha = Some(AlphaSpec::LiouvilleLike { sigma: 2.5 });
    cfg.function = Some(FunctionSpec::T6Resonant { delta: 3.0, count: 6 });
    cfg.grid_size = Some(16384);
    let t6 = run_experiment(&cfg).unwrap();

    let g5 = t5.check_f64("growth").unwrap();
    let g6 = t6.check_f64("growth").unwrap();
    let pass = g5 >= 2.0 && g6 >= 2.0;
    outcome(
        pass,
        format!(
            "t5 growth {g5:.3} (monotone {}), t6 growth {g6:.3} (monotone {}); need >= 2",
            t5.check_bool("monotone").unwrap(),
            t6.check_bool("monotone").unwrap()
        ),
    )
}

fn ac11() -> Outcome {
    let mut cfg = ExperimentConfig::new(
        ExperimentKind::Distribution,
        Schedule::List {
            values: vec![1_000, 10_000, 100_000],
        },
    );
    cfg.frequency = Some(vec![1, 1]);
    cfg.exponent = Some(0.5);
    cfg.seed = Some(SEED);
    let rep = run_experiment(&cfg).unwrap();
    let ks = rep.check_f64("ks").unwrap();
    outcome(ks <= 0.01, format!("KS distance {ks:.5} with 1e5 samples (limit 0.01)"))
}

fn ac12() -> Outcome {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Quadrature, Schedule::dyadic(4, 14));
    cfg.scheme = Some(WeightScheme::SmoothBump { profile: BumpProfile::Exp });
    cfg.alpha = Some(AlphaSpec::Golden);
    cfg.delta = Some(2.0);
    cfg.sigma = Some(1.0);
    cfg.r = Some(65536.0);
    cfg.measure = Some(Measure::WorstCase);
    let slope = slope_of(&cfg);
    outcome((-2.25..=-1.75).contains(&slope), format!("worst-case error slope {slope:.3} in [-2.25, -1.75]"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Option<Duration>); 12] = [
        ("AC1 kernel closed forms", ac1, Some(Duration::from_secs(5))),
        ("AC2 normalization and mode equivalence", ac2, Some(Duration::from_secs(30))),
        ("AC3 rectangular and triangular rates", ac3, None),
        ("AC4 binomial sqrt(N) scaling", ac4, Some(Duration::from_secs(120))),
        ("AC5 deterministic predictor", ac5, None),
        ("AC6 shell sums", ac6, None),
        ("AC7 two-sided sandwich", ac7, None),
        ("AC8 logarithmic means", ac8, None),
        ("AC9 lower-bound pincer", ac9, None),
        ("AC10 divergence witnesses", ac10, None),
        ("AC11 distribution identity", ac11, None),
        ("AC12 quadrature rate", ac12, None),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run, budget) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.starts_with(&format!("{f} "))) {
            continue;
        }
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = budget.is_none_or(|b| elapsed <= b);
        let pass = out.pass && in_time;
        if !pass {
            failed += 1;
        }
        let budget_note = budget.map(|b| format!(", limit {}s", b.as_secs())).unwrap_or_default();
        println!(
            "{} {name}: {} [{:.2}s{budget_note}]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
