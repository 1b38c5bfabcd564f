//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero if any
//! criterion fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use resicycle::config::PipelineConfig;
use resicycle::cycles::ResilienceCycle;
use resicycle::dynamics::{bootstrap_ks, fit_power_law, sample_power_law, BootstrapConfig};
use resicycle::metrics::{
    r1, r2, ri, score_all, score_cycle, RecoveryType, RestabDenominator, ToleranceConfig,
};
use resicycle::pipeline::{analyze_csv, Analysis};
use resicycle::preprocess::PerformanceSeries;
use resicycle::sensitivity::{sweep_rr, GridSpec};

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict {
            pass,
            detail: detail.into(),
        }
    }
}

fn bundled_csv() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/IXIC_2013-09-16_2018-04-16.csv")
}

fn real_analysis(tolerance: ToleranceConfig) -> Analysis {
    let cfg = PipelineConfig {
        tolerance,
        ..PipelineConfig::default()
    };
    analyze_csv(fs::File::open(bundled_csv()).unwrap(), "IXIC", &cfg).unwrap()
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn appendix_cycle() -> (ResilienceCycle, PerformanceSeries) {
    let series = PerformanceSeries::from_values("A", vec![0.3, 0.4, 0.1, 0.2, 0.3, 0.4]);
    (ResilienceCycle::from_series(&series, 1, 2, 5), series)
}

fn appendix_config(restab_denominator: RestabDenominator) -> ToleranceConfig {
    ToleranceConfig {
        p_rr: 0.01,
        p_et: 0.5,
        restab_denominator,
    }
}

fn criterion_1() -> Verdict {
    let started = Instant::now();
    let (cycle, series) = appendix_cycle();
    let s = score_cycle(
        0,
        &cycle,
        &series,
        &appendix_config(RestabDenominator::Appendix),
    )
    .unwrap();
    let elapsed = started.elapsed();
    let checks = [
        (s.r_m, 0.12),
        (s.r_e, 0.5),
        (s.s_f, 0.3),
        (s.s_r, 0.1),
        (s.r_d, 0.333),
        (s.r_s, 1.0),
        (s.ri, 0.020),
    ];
    let pass = checks.iter().all(|&(got, want)| within(got, want, 0.001))
        && elapsed < Duration::from_secs(1);
    Verdict::new(
        pass,
        format!(
            "R_m={:.4} R_e={:.4} S_f={:.4} S_r={:.4} R_d={:.4} R_s={:.4} RI={:.5} in {elapsed:?}",
            s.r_m, s.r_e, s.s_f, s.s_r, s.r_d, s.r_s, s.ri
        ),
    )
}

fn criterion_2() -> Verdict {
    let (cycle, series) = appendix_cycle();
    let s = score_cycle(0, &cycle, &series, &appendix_config(RestabDenominator::Eq4)).unwrap();
    Verdict::new(
        within(s.r_e, 1.0 / 3.0, 0.001) && within(s.ri, 0.02667, 0.001),
        format!("R_e={:.5} RI={:.5}", s.r_e, s.ri),
    )
}

fn criterion_3() -> Verdict {
    let base = ToleranceConfig::default();
    let analysis = real_analysis(base);
    let cycles = &analysis.cycles;
    let series = &analysis.series;
    let n = analysis.report.scores.len();

    let full = score_all(cycles, series, &ToleranceConfig { p_et: 1.0, ..base });
    let extinct = full.scores.iter().all(|s| s.ri == 0.0);

    let min_ratio = analysis
        .report
        .scores
        .iter()
        .map(|s| s.cycle.p_event / s.cycle.p_pre)
        .fold(f64::INFINITY, f64::min);
    let small = 0.5 * min_ratio;
    let at_zero = score_all(cycles, series, &ToleranceConfig { p_et: 0.0, ..base }).ri_values();
    let at_small = score_all(
        cycles,
        series,
        &ToleranceConfig {
            p_et: small,
            ..base
        },
    )
    .ri_values();
    let unchanged = at_zero == at_small;

    Verdict::new(
        n >= 10 && extinct && unchanged,
        format!(
            "{n} cycles; p_et=1 all zero: {extinct}; p_et=0 equals p_et={small:.4}: {unchanged}"
        ),
    )
}

fn criterion_4() -> Verdict {
    let cfg = ToleranceConfig::default();
    let analysis = real_analysis(cfg);
    let grid = GridSpec::new(0.0001, 0.002, 0.0001);
    let sweep = sweep_rr(&analysis.cycles, &analysis.series, &cfg, grid).unwrap();
    let mut worst: f64 = 0.0;
    let mut negative = 0;
    for (col, s) in analysis.report.scores.iter().enumerate() {
        let expected = 2.0 * (1.0 - s.r_e) * s.r_d * s.r_s;
        if expected < 0.0 {
            negative += 1;
        }
        for (g, rows) in sweep.main.grid.windows(2).zip(sweep.main.scores.windows(2)) {
            let slope = (rows[1][col] - rows[0][col]) / (g[1] - g[0]);
            worst = worst.max((slope - expected).abs());
        }
    }
    Verdict::new(
        sweep.row_count() == 20 && negative == 0 && worst <= 1e-9,
        format!(
            "{} rows x {} cycles; max |slope - 2(1-r_e)r_d r_s| = {worst:.2e}; negative slopes: {negative}",
            sweep.row_count(),
            sweep.columns.len()
        ),
    )
}

fn criterion_5() -> Verdict {
    let cfg = ToleranceConfig::default();
    let posts = [0.5, 0.65, 0.8, 0.9];
    let scored: Vec<(f64, RecoveryType)> = posts
        .iter()
        .map(|&p_post| {
            let cycle = ResilienceCycle {
                t_pre: 0,
                t_event: 4,
                t_post: 10,
                p_pre: 0.8,
                p_event: 0.5,
                p_post,
            };
            let series = PerformanceSeries::from_values("S", vec![0.8; 11]);
            let s = score_cycle(0, &cycle, &series, &cfg).unwrap();
            (s.ri, s.recovery_type)
        })
        .collect();
    let types: Vec<RecoveryType> = scored.iter().map(|s| s.1).collect();
    let ordered = scored.windows(2).all(|w| w[0].0 < w[1].0);
    let expected_types = [
        RecoveryType::Collapse,
        RecoveryType::Insufficient,
        RecoveryType::Leveled,
        RecoveryType::Adaptive,
    ];
    let parts: Vec<String> = scored
        .iter()
        .map(|(v, t)| format!("{}={v:.5}", t.as_str()))
        .collect();
    Verdict::new(ordered && types == expected_types, parts.join(" < "))
}

fn criterion_6() -> Verdict {
    let series = PerformanceSeries::from_values("S", vec![0.5, 0.4, 0.3, 0.9, 1.0, 1.0]);
    let cycle = ResilienceCycle::from_series(&series, 0, 2, 5);
    let cfg = ToleranceConfig::default();
    let (a, b) = (r1(&cycle, &series), r2(&cycle, &series));
    let value = ri(&cycle, &cfg).unwrap();
    let synthetic = a < 0.0 && b > 1.0 && value >= 0.0 && value.is_finite();

    let analysis = real_analysis(cfg);
    let mut r3: Vec<f64> = analysis.report.scores.iter().map(|s| s.r3).collect();
    r3.sort_by(f64::total_cmp);
    let median = r3[r3.len() / 2];
    let magnitude = (1e-4..=1e-2).contains(&median);
    Verdict::new(
        synthetic && magnitude,
        format!("synthetic R1={a:.4} R2={b:.4} RI={value:.4}; real-data R3 median={median:.3e}"),
    )
}

fn p_mean(values: &[f64], seed: u64) -> f64 {
    let fit = fit_power_law(values).unwrap();
    let cfg = BootstrapConfig {
        reps: 1000,
        seed,
        batch_size: 50,
    };
    bootstrap_ks(values, &fit, &cfg).unwrap().p_mean.unwrap()
}

fn criterion_7() -> Verdict {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2500);
    let large: Vec<f64> = (0..5000)
        .map(|_| sample_power_law(&mut rng, 2.5, 1.0))
        .collect();
    let alpha = fit_power_law(&large).unwrap().alpha;
    let recovered = (2.4..=2.6).contains(&alpha);

    let trials = 30u64;
    let model_pass = (0..trials)
        .filter(|&trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + trial);
            let values: Vec<f64> = (0..1000)
                .map(|_| sample_power_law(&mut rng, 2.5, 1.0))
                .collect();
            p_mean(&values, trial) > 0.05
        })
        .count();
    let misfit_rejected = (0..trials)
        .filter(|&trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + trial);
            let values: Vec<f64> = (0..2000)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z.abs()
                })
                .collect();
            p_mean(&values, trial) < 0.05
        })
        .count();
    let elapsed = started.elapsed();
    let pass = recovered
        && model_pass >= 28
        && misfit_rejected >= 20
        && elapsed < Duration::from_secs(120);
    Verdict::new(
        pass,
        format!(
            "alpha(n=5000)={alpha:.4}; Pareto n=1000 p_mean>0.05 in {model_pass}/30 (need 28); \
             half-normal n=2000 p_mean<0.05 in {misfit_rejected}/30 (need 20); {:.1}s (limit 120s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_8() -> Verdict {
    let started = Instant::now();
    let analysis = real_analysis(ToleranceConfig::default());
    let ri = analysis.report.ri_values();
    let nonnegative = ri.iter().all(|&v| v >= 0.0);
    let positive: Vec<f64> = ri.iter().copied().filter(|&v| v > 0.0).collect();
    let fit = fit_power_law(&positive).unwrap();
    let fit = bootstrap_ks(&positive, &fit, &BootstrapConfig::default()).unwrap();
    let elapsed = started.elapsed();
    let p = fit.p_mean;
    let mut detail = format!(
        "{} cycles, all RI >= 0: {nonnegative}; alpha={:.3} x_min={:.4} n_tail={} p_mean={:.3}; {:.2}s",
        ri.len(),
        fit.alpha,
        fit.x_min,
        fit.n_tail,
        p.unwrap_or(f64::NAN),
        elapsed.as_secs_f64()
    );
    if p.is_some_and(|p| p <= 0.05) {
        detail.push_str(" [warning: p_mean <= 0.05]");
    }
    Verdict::new(
        ri.len() >= 30 && nonnegative && p.is_some() && elapsed < Duration::from_secs(30),
        detail,
    )
}

fn run_cli(dir: &Path) -> bool {
    let input = bundled_csv();
    ["analyze", "fit", "sweep"].iter().all(|cmd| {
        Command::new(env!("CARGO_BIN_EXE_resicycle"))
            .arg(cmd)
            .arg("--input")
            .arg(&input)
            .arg("--out-dir")
            .arg(dir)
            .output()
            .map(|o| o.status.success())
            .unwrap_or(false)
    })
}

fn criterion_9() -> Verdict {
    let root = tempfile::tempdir().unwrap();
    let (a, b) = (root.path().join("a"), root.path().join("b"));
    if !(run_cli(&a) && run_cli(&b)) {
        return Verdict::new(false, "CLI run failed");
    }
    let mut names: Vec<_> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    let differing: Vec<String> = names
        .iter()
        .filter(|name| fs::read(a.join(name)).ok() != fs::read(b.join(name)).ok())
        .map(|name| name.to_string_lossy().into_owned())
        .collect();
    Verdict::new(
        differing.is_empty() && names.len() == 7,
        format!("{} files compared; differing: {differing:?}", names.len()),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("appendix worked cycle", criterion_1),
        ("restabilization eq4 mode", criterion_2),
        ("ET extinction", criterion_3),
        ("RR affinity", criterion_4),
        ("recovery-type ordering", criterion_5),
        ("comparator defects", criterion_6),
        ("power-law oracle", criterion_7),
        ("end-to-end real data", criterion_8),
        ("determinism", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let verdict = check();
        if !verdict.pass {
            failed += 1;
        }
        let status = if verdict.pass { "PASS" } else { "FAIL" };
        println!("criterion {} {status} {name}: {}", i + 1, verdict.detail);
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
