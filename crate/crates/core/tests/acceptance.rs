//! Acceptance suite. Prints one `[PASS]`/`[FAIL]` line per criterion and
//! exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use nsnr_core::harness::{
    correlation_table, lambda_grid, rmb_experiment, tune_lambda, verify, CorrelationTable, RmbSpec,
    RunHeader, ScenarioSpec, TableColumn, TuneResult, TuneSpec, VerifyConfig,
};
use nsnr_core::metrics::{d_frobenius, d_nsnr, d_spectral, nsnr_min};
use nsnr_core::randgen::{
    derive_trial_rng, mvn_sample, random_spd, wishart_sample, SeedSpec, TruthKind, WISHART_DOF,
};
use nsnr_core::{estimators::sample_covariance, EstimatorSpec, Execution, MetricKind, SpdMatrix};

const SAMPLE_SIZES: [usize; 4] = [50, 100, 150, 200];

struct Outcome {
    id: &'static str,
    title: &'static str,
    passed: bool,
    detail: String,
}

fn run(id: &'static str, title: &'static str, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let (passed, detail) = f();
    let outcome = Outcome {
        id,
        title,
        passed,
        detail,
    };
    println!(
        "[{}] {} {}: {}",
        if outcome.passed { "PASS" } else { "FAIL" },
        outcome.id,
        outcome.title,
        outcome.detail
    );
    outcome
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn fmt_row(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| format!("{x:.2}"))
        .collect::<Vec<_>>()
        .join("/")
}

fn sample_columns(truth: TruthKind) -> Vec<TableColumn> {
    SAMPLE_SIZES
        .iter()
        .map(|&n| TableColumn {
            label: format!("N={n}"),
            spec: ScenarioSpec::new(truth, n, EstimatorSpec::Sample),
        })
        .collect()
}

fn regularized_columns() -> Vec<TableColumn> {
    [
        EstimatorSpec::DiagonalLoading { lambda: 0.01 },
        EstimatorSpec::DiagonalLoading { lambda: 0.1 },
        EstimatorSpec::LedoitWolf,
    ]
    .into_iter()
    .map(|e| TableColumn {
        label: e.label(),
        spec: ScenarioSpec::new(TruthKind::ApproxLowRank, 200, e),
    })
    .collect()
}

fn tune_spec(n_trials: usize) -> TuneSpec {
    let mut base = ScenarioSpec::new(
        TruthKind::RandomLowRankPlusWishart,
        50,
        EstimatorSpec::KnowledgeAided {
            lambda: 0.0,
            prior: None,
        },
    );
    base.n_trials = n_trials;
    TuneSpec {
        lambda_grid: lambda_grid(0.02).expect("grid"),
        base,
    }
}

fn table(columns: &[TableColumn], exec: Execution) -> Result<CorrelationTable, String> {
    correlation_table(columns, exec).map_err(|e| e.to_string())
}

fn ac1_ac2() -> (Outcome, Outcome) {
    let start = Instant::now();
    let report = verify(&VerifyConfig::default(), Execution::Auto);
    let elapsed = start.elapsed();
    let ac1 = run("AC1", "closed form vs brute force", || match &report {
        Ok(r) => (
            r.pairs == 100
                && r.oracle_gap <= 1e-6
                && r.oracle_undercut <= 1e-9
                && elapsed < Duration::from_secs(120),
            format!(
                "pairs={} max |oracle-closed|={:.2e} max undercut={:.2e} runtime={:.2?}",
                r.pairs, r.oracle_gap, r.oracle_undercut, elapsed
            ),
        ),
        Err(e) => (false, e.to_string()),
    });
    let ac2 = run(
        "AC2",
        "worst-case target attains minimum",
        || match &report {
            Ok(r) => (
                r.target_gap <= 1e-9,
                format!("max |nsnr(s*)-nsnr_min|={:.2e}", r.target_gap),
            ),
            Err(e) => (false, e.to_string()),
        },
    );
    (ac1, ac2)
}

fn ac3() -> Outcome {
    run("AC3", "d_nsnr <= d_kl on 10^4 pairs", || {
        let start = Instant::now();
        let cfg = VerifyConfig {
            pairs: 10_000,
            oracle: None,
            ..VerifyConfig::default()
        };
        match verify(&cfg, Execution::Auto) {
            Ok(r) => {
                let elapsed = start.elapsed();
                (
                    r.pairs == 10_000
                        && r.bound_excess <= 1e-12
                        && elapsed < Duration::from_secs(30),
                    format!(
                        "max d_nsnr-d_kl={:.2e} runtime={elapsed:.2?}",
                        r.bound_excess
                    ),
                )
            }
            Err(e) => (false, e.to_string()),
        }
    })
}

fn ac4() -> Outcome {
    run("AC4", "golden values", || {
        let pair = |a: f64| {
            let c = SpdMatrix::from_diagonal(&[1.0, a, a * a]).unwrap();
            let c_hat = SpdMatrix::from_diagonal(&[1.0, a * a, a]).unwrap();
            (c, c_hat)
        };
        let mut ok = true;
        let mut notes = Vec::new();
        let (c, c_hat) = pair(0.1);
        let checks = [
            (
                "frobenius",
                d_frobenius(&c, &c_hat).unwrap(),
                0.09 * 2f64.sqrt(),
            ),
            ("spectral", d_spectral(&c, &c_hat).unwrap(), 0.09),
            ("nsnr_min", nsnr_min(&c, &c_hat).unwrap(), 400.0 / 10201.0),
            ("d_nsnr", d_nsnr(&c, &c_hat).unwrap(), 5.05f64.ln()),
        ];
        for (name, got, want) in checks {
            let err = (got - want).abs();
            ok &= err <= 1e-12;
            notes.push(format!("{name}={got:.10} (err {err:.1e})"));
        }
        // Symbolic identities at α = 0.01.
        let a = 0.01;
        let (c, c_hat) = pair(a);
        let k = 1.0 / (a * a);
        let sym = [
            d_frobenius(&c, &c_hat).unwrap() - 2f64.sqrt() * (a - a * a),
            d_spectral(&c, &c_hat).unwrap() - (a - a * a),
            nsnr_min(&c, &c_hat).unwrap() - 4.0 * k / (k + 1.0).powi(2),
            d_nsnr(&c, &c_hat).unwrap() - ((k + 1.0).powi(2) / (4.0 * k)).ln() / 2.0,
        ];
        let worst = sym.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        ok &= worst <= 1e-12;
        let grows = d_nsnr(&c, &c_hat).unwrap() > d_nsnr(&pair(0.1).0, &pair(0.1).1).unwrap();
        ok &= grows;
        notes.push(format!(
            "alpha=0.01 identity err {worst:.1e}, d grows={grows}"
        ));
        (ok, notes.join(", "))
    })
}

fn ac5(id_tab: &Result<CorrelationTable, String>, elapsed: Duration) -> Outcome {
    run("AC5", "identity truth correlations", || {
        let t = match id_tab {
            Ok(t) => t,
            Err(e) => return (false, e.clone()),
        };
        let kl = t.row(MetricKind::Kl).unwrap();
        let sym = t.row(MetricKind::SymKl).unwrap();
        let frob = t.row(MetricKind::Frobenius).unwrap();
        let spectral = t.row(MetricKind::Spectral).unwrap();
        let expected_kl = [0.81, 0.79, 0.84, 0.82];
        let expected_sym = [0.85, 0.83, 0.86, 0.85];
        let ok = (0..4).all(|i| {
            kl[i] >= 0.75
                && sym[i] >= 0.75
                && within(kl[i], expected_kl[i], 0.10)
                && within(sym[i], expected_sym[i], 0.10)
                && kl[i].min(sym[i]) > frob[i].max(spectral[i])
        }) && elapsed < Duration::from_secs(60);
        (
            ok,
            format!(
                "KL {} symKL {} Frobenius {} Spectral {} runtime={elapsed:.2?}",
                fmt_row(kl),
                fmt_row(sym),
                fmt_row(frob),
                fmt_row(spectral)
            ),
        )
    })
}

fn ac6(tab: &Result<CorrelationTable, String>, elapsed: Duration) -> Outcome {
    run("AC6", "low-rank truth correlations", || {
        let t = match tab {
            Ok(t) => t,
            Err(e) => return (false, e.clone()),
        };
        let kl = t.row(MetricKind::Kl).unwrap();
        let sym = t.row(MetricKind::SymKl).unwrap();
        let frob = t.row(MetricKind::Frobenius).unwrap();
        let spectral = t.row(MetricKind::Spectral).unwrap();
        let expected_kl = [0.82, 0.84, 0.81, 0.83];
        let ok = (0..4).all(|i| {
            frob[i] <= 0.30
                && spectral[i] <= 0.30
                && kl[i] >= 0.75
                && sym[i] >= 0.75
                && within(kl[i], expected_kl[i], 0.10)
        }) && elapsed < Duration::from_secs(60);
        (
            ok,
            format!(
                "KL {} symKL {} Frobenius {} Spectral {} runtime={elapsed:.2?}",
                fmt_row(kl),
                fmt_row(sym),
                fmt_row(frob),
                fmt_row(spectral)
            ),
        )
    })
}

fn ac7() -> Outcome {
    run("AC7", "regularized estimator correlations", || {
        let t = match table(&regularized_columns(), Execution::Auto) {
            Ok(t) => t,
            Err(e) => return (false, e),
        };
        let kl = t.row(MetricKind::Kl).unwrap();
        let frob = t.row(MetricKind::Frobenius).unwrap();
        let spectral = t.row(MetricKind::Spectral).unwrap();
        let ok = kl.iter().all(|&x| x >= 0.70)
            && within(kl[0], 0.83, 0.10)
            && within(kl[1], 0.85, 0.10)
            && within(kl[2], 0.76, 0.15)
            && frob.iter().chain(spectral).all(|&x| x <= 0.35);
        (
            ok,
            format!(
                "KL {} Frobenius {} Spectral {}",
                fmt_row(kl),
                fmt_row(frob),
                fmt_row(spectral)
            ),
        )
    })
}

fn ac8(tuned: &Result<TuneResult, String>) -> Outcome {
    run("AC8", "shrinkage tuning", || {
        let t = match tuned {
            Ok(t) => t,
            Err(e) => return (false, e.clone()),
        };
        let row = |m| t.row(m).unwrap();
        let (kl, sym, frob, spectral, oracle) = (
            row(MetricKind::Kl),
            row(MetricKind::SymKl),
            row(MetricKind::Frobenius),
            row(MetricKind::Spectral),
            row(MetricKind::NsnrDistance),
        );
        let step = 0.02 + 1e-9;
        let kl_side = [kl, sym]
            .iter()
            .all(|r| r.lambda_star <= 0.10 && r.mean_nsnr_min >= 0.65);
        let norm_side = [frob, spectral]
            .iter()
            .all(|r| r.lambda_star >= 0.25 && r.mean_nsnr_min <= 0.55);
        let oracle_match = (oracle.lambda_star - sym.lambda_star).abs() <= step;
        let rows = t
            .rows
            .iter()
            .map(|r| {
                format!(
                    "{} {:.2}/{:.2}",
                    r.metric.label(),
                    r.lambda_star,
                    r.mean_nsnr_min
                )
            })
            .collect::<Vec<_>>()
            .join(", ");
        (
            kl_side && norm_side && oracle_match,
            format!("{rows}; KL-side={kl_side} norm-side={norm_side} oracle-row={oracle_match}"),
        )
    })
}

fn ac9() -> Outcome {
    run("AC9", "sample-support rule of thumb", || {
        let start = Instant::now();
        let spec = RmbSpec {
            dim: 10,
            n_samples: 20,
            n_trials: 1000,
            master_seed: 0,
        };
        match rmb_experiment(&spec, Execution::Auto) {
            Ok(r) => {
                let elapsed = start.elapsed();
                (
                    (0.40..=0.70).contains(&r.mean_nsnr) && elapsed < Duration::from_secs(10),
                    format!("mean nsnr={:.4} runtime={elapsed:.2?}", r.mean_nsnr),
                )
            }
            Err(e) => (false, e.to_string()),
        }
    })
}

fn ac10(id_tab: &Result<CorrelationTable, String>, tuned: &Result<TuneResult, String>) -> Outcome {
    run("AC10", "determinism across worker counts", || {
        let (Ok(id_tab), Ok(tuned)) = (id_tab, tuned) else {
            return (false, "reference run failed".into());
        };
        let header = RunHeader::new("acceptance", 0);
        let mut ok = true;
        let mut notes = Vec::new();
        for workers in [1, 8] {
            let exec = Execution::with_workers(workers);
            let t = table(&sample_columns(TruthKind::Identity), exec).map(|t| t.to_csv(&header));
            let same_table = t.as_deref() == Ok(id_tab.to_csv(&header).as_str());
            let u = tune_lambda(&tune_spec(1000), exec)
                .map(|t| t.to_csv(&header) + &t.curve_csv(&header));
            let same_tune = u.ok().as_deref()
                == Some((tuned.to_csv(&header) + &tuned.curve_csv(&header)).as_str());
            ok &= same_table && same_tune;
            notes.push(format!(
                "workers={workers} table={same_table} tune={same_tune}"
            ));
        }
        (ok, notes.join(", "))
    })
}

fn relative_frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

fn ac11() -> Outcome {
    run("AC11", "sampler soundness", || {
        let draws = 100_000;
        let mut rng = derive_trial_rng(SeedSpec::new(11, 0));
        let c = random_spd(10, 0.1, 10.0, &mut rng).unwrap();
        let samples = mvn_sample(&c, draws, &mut rng).unwrap();
        let mvn_err = relative_frobenius(&sample_covariance(&samples), c.matrix());

        let mut acc = DMatrix::zeros(10, 10);
        for _ in 0..draws {
            acc += wishart_sample(&c, WISHART_DOF, &mut rng).unwrap();
        }
        let wishart_err = relative_frobenius(&(acc / draws as f64), c.matrix());
        (
            mvn_err <= 0.05 && wishart_err <= 0.05,
            format!("mvn rel err={mvn_err:.4}, wishart mean rel err={wishart_err:.4}"),
        )
    })
}

fn main() -> ExitCode {
    let mut outcomes = Vec::new();
    let (a1, a2) = ac1_ac2();
    outcomes.push(a1);
    outcomes.push(a2);
    outcomes.push(ac3());
    outcomes.push(ac4());

    let start = Instant::now();
    let id_tab = table(&sample_columns(TruthKind::Identity), Execution::Auto);
    outcomes.push(ac5(&id_tab, start.elapsed()));
    let start = Instant::now();
    let lr_tab = table(&sample_columns(TruthKind::ApproxLowRank), Execution::Auto);
    outcomes.push(ac6(&lr_tab, start.elapsed()));
    outcomes.push(ac7());

    let tuned = tune_lambda(&tune_spec(1000), Execution::Auto).map_err(|e| e.to_string());
    outcomes.push(ac8(&tuned));
    outcomes.push(ac9());
    outcomes.push(ac10(&id_tab, &tuned));
    outcomes.push(ac11());

    let failed: Vec<_> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| o.id)
        .collect();
    println!(
        "acceptance: {}/{} passed{}",
        outcomes.len() - failed.len(),
        outcomes.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("; failing: {}", failed.join(", "))
        }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
