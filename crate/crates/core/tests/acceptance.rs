//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use levelshare::assumptions::{check_a5_sparse, prefix_grid, sparse_set_at, Thresholds};
use levelshare::io::display_value;
use levelshare::simulate::{small_sample_demo, Injection, RatePoints};
use levelshare::{
    fit_rate, generate, keydiff, lemma1_check, level_loss, per_unit_diffs, run_convergence,
    share_loss, sparse_set, EpsilonSchedule, GeneratorSpec, LossSpec, Normalization,
    PairedSeries, RateField, Verdict, WeightSide,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    ok: bool,
    detail: String,
}

impl Outcome {
    fn new(ok: bool, detail: impl Into<String>) -> Self {
        Self {
            ok,
            detail: detail.into(),
        }
    }
}

fn criterion(number: u32, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let ok = outcome.ok && in_time;
    println!(
        "criterion {number:>2} {}: {name} ({}; {:.2}s of {:.0}s)",
        if ok { "PASS" } else { "FAIL" },
        outcome.detail,
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    ok
}

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Integer-valued series with exactly equal totals: targets in
/// `[100, 1e6]`, realized within +-50% of the target, the largest realized
/// value absorbing the residual.
fn equal_total_series(rng: &mut ChaCha8Rng) -> PairedSeries {
    let n = rng.random_range(2..=100);
    let target: Vec<f64> = (0..n)
        .map(|_| rng.random_range(100..=1_000_000) as f64)
        .collect();
    let mut realized: Vec<f64> = target
        .iter()
        .map(|&y| (y * (1.0 + rng.random_range(-0.5..0.5))).round())
        .collect();
    let sy: f64 = target.iter().sum();
    let sx: f64 = realized.iter().sum();
    let scale = sy / sx;
    for x in &mut realized {
        *x = (*x * scale).round().max(1.0);
    }
    let residual = sy - realized.iter().sum::<f64>();
    let largest = (0..n)
        .max_by(|&a, &b| realized[a].total_cmp(&realized[b]))
        .unwrap();
    realized[largest] += residual;
    assert!(realized[largest] > 0.0);
    let s = PairedSeries::from_values(realized, target).unwrap();
    assert_eq!(s.realized_total(), s.target_total());
    s
}

fn small_sample() -> Outcome {
    let demo = small_sample_demo();
    let tad_ok = demo.total_absolute_difference == [10.0, 10.0];
    let id = demo.index_of_dissimilarity.map(display_value);
    let id_ok = id == ["0.0004".to_string(), "0.0024".to_string()];
    Outcome::new(
        tad_ok && id_ok,
        format!(
            "TAD {:?}, ID {} / {}",
            demo.total_absolute_difference, id[0], id[1]
        ),
    )
}

fn lemma_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0_f64;
    let mut checks = 0usize;
    for _ in 0..1000 {
        let n = rng.random_range(1..=100);
        let mut draw = || loop {
            let v: f64 = rng.random_range(0.0..1e6);
            if v > 0.0 {
                break v;
            }
        };
        let realized: Vec<f64> = (0..n).map(|_| draw()).collect();
        let target: Vec<f64> = (0..n).map(|_| draw()).collect();
        let s = PairedSeries::from_values(realized, target).unwrap();
        for p in [0.5, 1.0, 2.0, 3.0] {
            for i in 0..n {
                let (lhs, rhs) = lemma1_check(&s, i, p).unwrap();
                worst = worst.max(relative(lhs, rhs));
                checks += 1;
            }
        }
    }
    Outcome::new(
        worst <= 1e-10,
        format!("{checks} unit checks, max relative discrepancy {worst:.2e}"),
    )
}

fn ape_coincidence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let spec = LossSpec::ape();
    let mut worst_rel = 0.0_f64;
    let mut worst_unit = 0.0_f64;
    for _ in 0..200 {
        let s = equal_total_series(&mut rng);
        let level = level_loss(&spec, &s, Normalization::Mean).unwrap().value;
        let share = share_loss(&spec, &s, Normalization::Mean).unwrap().value;
        worst_rel = worst_rel.max(relative(level, share));
        for d in per_unit_diffs(&spec, &s).unwrap().into_iter().flatten() {
            worst_unit = worst_unit.max(d.abs());
        }
    }
    Outcome::new(
        worst_rel <= 1e-12 && worst_unit <= 1e-12,
        format!("max relative {worst_rel:.2e}, max per-unit {worst_unit:.2e}"),
    )
}

fn keydiff_equal_totals() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut nonzero = 0;
    for _ in 0..200 {
        let s = equal_total_series(&mut rng);
        for p in [1.0, 2.0] {
            let spec = LossSpec::new(p, 0.0, WeightSide::Realized).unwrap();
            if keydiff(&spec, &s).unwrap() != 0.0 {
                nonzero += 1;
            }
        }
    }
    Outcome::new(nonzero == 0, format!("{nonzero} of 400 nonzero"))
}

fn compliant_points() -> RatePoints {
    let gen = GeneratorSpec::default().with_seed(2024);
    run_convergence(
        &gen,
        &LossSpec::absolute(),
        &[100, 1_000, 10_000, 100_000],
        100,
        &EpsilonSchedule::default(),
    )
    .unwrap()
}

fn convergence(points: &RatePoints) -> Outcome {
    let diff = points.medians(RateField::Diff);
    let key = points.medians(RateField::Keydiff);
    let shrink = diff[3].1 / diff[0].1;
    let decreasing = key.windows(2).all(|w| w[1].1 < w[0].1);
    Outcome::new(
        shrink <= 0.2 && decreasing,
        format!(
            "median |diff| ratio 1e5/1e2 = {shrink:.4}, median |keydiff| {:?}",
            key.iter().map(|(_, v)| format!("{v:.3e}")).collect::<Vec<_>>()
        ),
    )
}

fn rate_band(points: &RatePoints) -> Outcome {
    let fit = fit_rate(points, RateField::CError).unwrap();
    Outcome::new(
        (-0.65..=-0.35).contains(&fit.slope),
        format!("slope {:.3} ± {:.3}", fit.slope, fit.stderr),
    )
}

fn brute_force_sparse(s: &PairedSeries, threshold: f64, at_n: usize) -> Vec<usize> {
    let mut sx = 0.0;
    let mut sy = 0.0;
    for i in 0..at_n {
        sx += s.realized()[i];
        sy += s.target()[i];
    }
    let c = sx / sy;
    (0..at_n)
        .filter(|&i| (s.target()[i] - c * s.realized()[i]).abs() > threshold)
        .collect()
}

fn sparse_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let schedules = [
        EpsilonSchedule::new(1.0, 0.25).unwrap(),
        EpsilonSchedule::new(0.5, 0.5).unwrap(),
        EpsilonSchedule::new(5.0, 0.1).unwrap(),
    ];
    let mut mismatches = 0;
    let mut total_members = 0;
    for k in 0..500 {
        let eps = &schedules[k % 3];
        let n = rng.random_range(1..=1000);
        let target: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..20.0)).collect();
        let realized: Vec<f64> = target
            .iter()
            .map(|&y| {
                if rng.random_bool(0.3) {
                    y
                } else {
                    y * rng.random_range(0.8..1.25)
                }
            })
            .collect();
        let s = PairedSeries::from_values(realized, target).unwrap();
        let at_n = rng.random_range(1..=n);
        let got = sparse_set(&s, eps, at_n).unwrap();
        let want = brute_force_sparse(&s, eps.eps0 * (at_n as f64).powf(-eps.alpha), at_n);
        total_members += got.len();
        if got != want {
            mismatches += 1;
        }
        if sparse_set_at(&s, eps.at(at_n), at_n).unwrap() != got {
            mismatches += 1;
        }
    }
    Outcome::new(
        mismatches == 0,
        format!("{mismatches} mismatches, {total_members} members checked"),
    )
}

fn violating_regime() -> Outcome {
    let gen = GeneratorSpec {
        injection: Some(Injection {
            b: 0.05,
            beta: 0.0,
            shock_lo: 2.0,
            shock_hi: 10.0,
        }),
        ..GeneratorSpec::default()
    }
    .with_seed(8);
    let eps = EpsilonSchedule::default();
    let series = generate(&gen, 100_000).unwrap();
    let grid = prefix_grid(series.len(), 20);
    let a5 = check_a5_sparse(&series, &eps, &grid, &Thresholds::default()).unwrap();
    let fractions: Vec<f64> = a5.trajectory.iter().map(|p| p.fraction).collect();

    let points = run_convergence(&gen, &LossSpec::absolute(), &[100, 1_000, 10_000, 100_000], 20, &eps)
        .unwrap();
    let medians = points.medians(RateField::SparseFraction);
    let medians_ok = medians.windows(2).all(|w| w[1].1 >= w[0].1);
    Outcome::new(
        a5.verdict == Verdict::Fail && medians_ok,
        format!(
            "A5 {:?} (prefix fractions {:.3}..{:.3}), median sparse_fraction over n grid {:?}",
            a5.verdict,
            fractions[0],
            fractions[fractions.len() - 1],
            medians.iter().map(|(_, v)| format!("{v:.3}")).collect::<Vec<_>>()
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("experiment.toml");
    std::fs::write(
        &config,
        "seed = 99\nreplicates = 10\nn_grid = [100, 1000, 10000]\n\n\
         [[specs]]\np = 1.0\nq = 0.0\nweight_side = \"realized\"\n\n\
         [[specs]]\np = 2.0\nq = -1.0\nweight_side = \"target\"\n",
    )
    .unwrap();
    let run = |out: &Path, threads: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_levelshare"))
            .args(["simulate", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(out)
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .unwrap();
        assert!(status.status.success(), "{status:?}");
        std::fs::read(out.join("rate_points.csv")).unwrap()
    };
    let a = run(&dir.path().join("a"), "1");
    let b = run(&dir.path().join("b"), "4");
    Outcome::new(
        a == b && !a.is_empty(),
        format!("{} bytes, identical: {}", a.len(), a == b),
    )
}

fn compute_layout() -> Outcome {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests");
    let output = Command::new(env!("CARGO_BIN_EXE_levelshare"))
        .arg("compute")
        .arg("--input")
        .arg(root.join("data/estimates_a.csv"))
        .arg("--input")
        .arg(root.join("data/estimates_b.csv"))
        .output()
        .unwrap();
    let got = String::from_utf8(output.stdout).unwrap();
    let want = std::fs::read_to_string(root.join("golden/compute_two_inputs.txt")).unwrap();
    let header: Vec<&str> = got.lines().next().unwrap_or("").split_whitespace().collect();
    let layout_ok = header == ["Measure", "estimates_a", "estimates_b", "estimates_a/estimates_b"];
    Outcome::new(
        output.status.success() && got == want && layout_ok,
        format!("golden match: {}, header {:?}", got == want, header),
    )
}

fn main() {
    let secs = Duration::from_secs;
    let mut ok = true;
    ok &= criterion(1, "small-sample tables", secs(1), small_sample);
    ok &= criterion(2, "lemma identity suite", secs(5), lemma_identity);
    ok &= criterion(3, "APE level/share coincidence", secs(5), ape_coincidence);
    ok &= criterion(4, "keydiff zero at equal totals", secs(5), keydiff_equal_totals);

    let start = Instant::now();
    let points = compliant_points();
    let shared = start.elapsed();
    ok &= criterion(5, "convergence in the compliant regime", secs(300).saturating_sub(shared), || {
        convergence(&points)
    });
    ok &= criterion(6, "c_error rate band", secs(300).saturating_sub(shared), || {
        rate_band(&points)
    });
    println!("   (criteria 5 and 6 share one experiment: {:.2}s)", shared.as_secs_f64());

    ok &= criterion(7, "sparse set brute-force oracle", secs(10), sparse_oracle);
    ok &= criterion(8, "constant deviant fraction detected", secs(60), violating_regime);
    ok &= criterion(9, "simulate determinism", secs(60), determinism);
    ok &= criterion(10, "compute two-input layout golden file", secs(60), compute_layout);

    if !ok {
        eprintln!("acceptance: one or more criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
