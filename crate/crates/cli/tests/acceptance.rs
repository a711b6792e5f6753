//! End-to-end acceptance suite. Each test prints one PASS/FAIL line to
//! stderr, bypassing the harness capture, then asserts.

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use qnpr_cli::experiments::{dme_instance, entropy_checks, entropy_rows, fig3b_checks, fig3b_rows, load_dataset};
use qnpr_cli::{run, Check, Experiment, ExperimentConfig};
use qnpr_core::cv::{success_scaling_fit, QumodeGrid};
use qnpr_core::dataset::synthesize;
use qnpr_core::dme::{dme_step_exact, reference_predictions, run_pipeline_dme, theta_measure, DMEPlan, C64};
use qnpr_core::encoding::{
    embed_kernel_vector, feature_basis, gram, kernel_vector, EncodingSpec, DEFAULT_RANK_TOLERANCE,
};
use qnpr_core::spectrum::{
    apply_transform, build_training_state, classical_krr, overlap_unnormalized, quantum_vs_classical_scale,
    QueryState, SpectrumTransform,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, title: &str, elapsed: Duration, limit: Duration, checks: &[Check]) {
    let ok = checks.iter().all(|c| c.passed) && elapsed <= limit;
    let detail = checks
        .iter()
        .map(|c| format!("{}{}: {}", if c.passed { "" } else { "FAILED " }, c.name, c.detail))
        .collect::<Vec<_>>()
        .join("; ");
    let mut err = std::io::stderr().lock();
    let _ = writeln!(
        err,
        "criterion {id} {title}: {} ({:.1} s, limit {} s) {detail}",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    assert!(ok, "criterion {id} failed: {detail}");
}

#[test]
fn criterion_1_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let encodings = [EncodingSpec::coherent(), EncodingSpec::squeezed(1.0).unwrap(), EncodingSpec::raw_amplitude()];
    let (mut accepted, mut rejected, mut comparisons) = (0usize, 0usize, 0usize);
    let mut per_encoding = [0usize; 3];
    let mut worst: f64 = 0.0;
    for trial in 0..60u64 {
        let m = rng.random_range(2..=16);
        let n = rng.random_range(1..=4);
        let d = synthesize(1000 + trial, m + 1, n, 0.1).unwrap();
        let train = d.subset(&(0..m).collect::<Vec<_>>());
        let query: Vec<f64> = d.features.row(m).iter().copied().collect();
        for (e, spec) in encodings.iter().enumerate() {
            let k = gram(&train, spec).unwrap();
            // Exact rank deficiency is fine; eigenvalues between rounding
            // level and 1e-8 Tr K leave the numerical rank ambiguous.
            let ambiguous = k.entries.clone().symmetric_eigen().eigenvalues.iter().any(|&l| l.abs() > 1e-13 * k.trace && l < 1e-8 * k.trace);
            if ambiguous {
                rejected += 1;
                continue;
            }
            accepted += 1;
            per_encoding[e] += 1;
            let basis = feature_basis(&k, DEFAULT_RANK_TOLERANCE).unwrap();
            let t = build_training_state(&basis).unwrap();
            let kappa = kernel_vector(&train, &query, spec).unwrap();
            let qs = QueryState::new(&train.targets, &embed_kernel_vector(&kappa, &basis).unwrap()).unwrap();
            for chi in [1e-3, 1e-1, 1.0] {
                let quantum = overlap_unnormalized(&apply_transform(&t, &SpectrumTransform::ridge(chi)).unwrap(), &qs).unwrap();
                let scale = quantum_vs_classical_scale(&t, &train.targets, chi);
                let classical = scale.factor * classical_krr(&k, &train.targets, scale.chi_classical, &kappa).unwrap();
                worst = worst.max((quantum - classical).abs() / classical.abs().max(1e-300));
                comparisons += 1;
            }
        }
    }
    let checks = [
        Check::new(
            "instances",
            accepted >= 100 && per_encoding.iter().all(|&c| c > 0),
            format!("{accepted} accepted ({per_encoding:?} per encoding), {rejected} ill-conditioned rejected, {comparisons} comparisons"),
        ),
        Check::new("relative_error", worst <= 1e-9, format!("worst {worst:.3e}")),
    ];
    report(1, "oracle equivalence", start.elapsed(), Duration::from_secs(10), &checks);
}

#[test]
fn criterion_2_finite_squeezing_channel() {
    let start = Instant::now();
    let cfg = ExperimentConfig::preset(Experiment::VerifyInversion);
    assert_eq!(cfg.grid_points, 257);
    assert_eq!(cfg.chi_values, vec![0.0, 0.1, 1.0]);
    assert_eq!(cfg.s_values.first(), Some(&1.0));
    assert_eq!(cfg.s_values.last(), Some(&4.0));
    let out = run(&cfg).unwrap();
    let checks: Vec<Check> = out
        .checks
        .into_iter()
        .filter(|c| c.name == "grid_matches_analytic" || c.name == "ridge_limit_monotone" || c.name == "coarse_grid_flagged")
        .collect();
    assert_eq!(checks.len(), 3);
    report(2, "finite-squeezing channel", start.elapsed(), Duration::from_secs(30), &checks);
}

#[test]
fn criterion_3_success_rate_scaling() {
    let start = Instant::now();
    let cfg = ExperimentConfig::preset(Experiment::VerifyInversion);
    let d = load_dataset(&cfg).unwrap();
    let t = build_training_state(&feature_basis(&gram(&d, &cfg.encoding).unwrap(), DEFAULT_RANK_TOLERANCE).unwrap()).unwrap();
    let checks: Vec<Check> = [0.1, 1.0]
        .iter()
        .map(|&chi| {
            let (slope, _) = success_scaling_fit(&t, chi, &[8.0, 16.0, 32.0]).unwrap();
            Check::new(&format!("slope_chi_{chi}"), (slope + 4.0).abs() <= 0.1, format!("{slope:.4}"))
        })
        .collect();
    report(3, "success-rate scaling", start.elapsed(), Duration::from_secs(5), &checks);
}

#[test]
fn criterion_4_dme_law() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let dim = 4;
    let x = DMatrix::from_fn(dim, dim, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let a = DMatrix::from_fn(dim, dim, |_, _| rng.random::<f64>() - 0.5);
    let sigma = {
        let r = &a * a.transpose();
        let tr = r.trace();
        r / tr
    };
    let sig = sigma.map(|v| C64::new(v, 0.0));
    let comm = (&sig * &x - &x * &sig) * C64::i();
    let dev = |delta: f64| (dme_step_exact(&x, &sigma, delta, delta).unwrap() - &x - &comm * C64::from(delta)).norm();
    let steps = [0.04, 0.02, 0.01, 0.005];
    let ratios: Vec<f64> = steps.windows(2).map(|w| dev(w[0]) / dev(w[1])).collect();
    let step_ok = ratios.iter().all(|r| (r - 4.0).abs() <= 0.8);

    let cfg = ExperimentConfig::preset(Experiment::Fig3bScan);
    let inst = dme_instance(&cfg).unwrap();
    let s = cfg.s_values[0];
    let measure = theta_measure(s, &QumodeGrid::new(cfg.width_factor * s, cfg.grid_points).unwrap(), 129).unwrap();
    let reference = reference_predictions(&inst, s, cfg.chi, cfg.coupling).unwrap();
    let m = inst.basis.num_samples();
    let errs: Vec<f64> = (0..=9)
        .map(|k| {
            let plan = DMEPlan::new(1 << k, m, cfg.coupling, 0).unwrap();
            let out = run_pipeline_dme(&inst, &plan, cfg.chi, &measure).unwrap();
            out.predictions.iter().zip(&reference).map(|(p, r)| (p - r).abs()).fold(0.0, f64::max)
        })
        .collect();
    let monotone = errs.windows(2).all(|w| w[1] < w[0]);
    let last = *errs.last().unwrap();
    let checks = [
        Check::new("step_halving_ratios", step_ok, format!("{ratios:.4?}")),
        Check::new("exact_copy_monotone", monotone, errs.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(" ")),
        Check::new("exact_copy_512", last < 1e-3, format!("{last:.3e} at N_t=512, B=129")),
    ];
    report(4, "copy-interaction law", start.elapsed(), Duration::from_secs(120), &checks);
}

#[test]
fn criterion_5_copy_count_scan() {
    let start = Instant::now();
    let cfg = ExperimentConfig::preset(Experiment::Fig3bScan);
    assert_eq!((cfg.train_count, cfg.copies.len(), cfg.subset_sizes.clone()), (4, 20, vec![1, 2, 3, 4]));
    assert!(cfg.trials >= 100);
    let rows = fig3b_rows(&cfg).unwrap();
    report(5, "copy-count scan", start.elapsed(), Duration::from_secs(300), &fig3b_checks(&rows));
}

#[test]
fn criterion_6_entropy_scan() {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::preset(Experiment::EntropyScan);
    // Quarter-octave sweep over the preset's range.
    let mut counts: Vec<usize> = (4..=28).map(|k| 2f64.powf(k as f64 / 4.0).round() as usize).collect();
    counts.dedup();
    cfg.sample_counts = counts;
    let pool = load_dataset(&cfg).unwrap();
    let rows = entropy_rows(&cfg, &pool).unwrap();
    let mut checks = entropy_checks(&rows, &cfg.s_values);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("boston.csv");
    write_boston_format(&path);
    let text = format!("dataset = {}\ntarget = MEDV\ntrials = 3\n", path.display());
    let csv_cfg = ExperimentConfig::parse(&text, Experiment::EntropyScan).unwrap();
    let csv_rows = entropy_rows(&csv_cfg, &load_dataset(&csv_cfg).unwrap()).unwrap();
    checks.push(Check::new(
        "boston_format_csv",
        csv_rows.len() == csv_cfg.sample_counts.len() * csv_cfg.s_values.len(),
        format!("{} rows from a 506 x 14 table", csv_rows.len()),
    ));
    report(6, "entropy scan", start.elapsed(), Duration::from_secs(120), &checks);
}

fn write_boston_format(path: &Path) {
    const HEADER: &str = "CRIM,ZN,INDUS,CHAS,NOX,RM,AGE,DIS,RAD,TAX,PTRATIO,B,LSTAT,MEDV";
    let d = synthesize(506, 506, 13, 0.5).unwrap();
    let mut body = String::from(HEADER);
    body.push('\n');
    for i in 0..d.len() {
        let cells: Vec<String> = d.features.row(i).iter().map(|v| format!("{v:.6}")).collect();
        body.push_str(&format!("{},{:.6}\n", cells.join(","), 22.5 + 9.0 * d.targets[i]));
    }
    std::fs::write(path, body).unwrap();
}

#[test]
fn criterion_7_ion_gates() {
    let start = Instant::now();
    let out = run(&ExperimentConfig::preset(Experiment::IonVerify)).unwrap();
    report(7, "trapped-ion constructions", start.elapsed(), Duration::from_secs(180), &out.checks);
}

#[test]
fn criterion_8_determinism() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let small = [
        ("entropy-scan", "trials = 4\nsample_counts = 1,2,8,32\n"),
        ("fig3b-scan", "trials = 6\ncopies = 1..4\n"),
        ("verify-inversion", "s = 1,2\n"),
        ("predict", "shots = 5000\n"),
        ("ion-verify", ""),
    ];
    let mut checks = Vec::new();
    for (cmd, body) in small {
        let cfg_path = dir.path().join(format!("{cmd}.cfg"));
        std::fs::write(&cfg_path, body).unwrap();
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out_dir = dir.path().join(format!("{cmd}-{rep}"));
            let status = Command::new(env!("CARGO_BIN_EXE_qnpr"))
                .args([cmd, "--config", cfg_path.to_str().unwrap(), "--seed", "99", "--out", out_dir.to_str().unwrap()])
                .output()
                .unwrap();
            assert!(status.status.code().is_some_and(|c| c == 0 || c == 2), "{cmd}: {status:?}");
            let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out_dir)
                .unwrap()
                .map(|e| e.unwrap().path())
                .filter(|p| p.extension().is_some_and(|x| x == "csv"))
                .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
                .collect();
            files.sort();
            outputs.push(files);
        }
        let same = !outputs[0].is_empty() && outputs[0] == outputs[1];
        checks.push(Check::new(cmd, same, format!("{} csv files", outputs[0].len())));
    }
    report(8, "determinism", start.elapsed(), Duration::from_secs(120), &checks);
}
