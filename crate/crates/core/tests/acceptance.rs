//! Acceptance criteria AC1–AC10, one PASS/FAIL line each.
//!
//! Runs with a custom harness so the lines are printed on every run; the
//! process exits nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sgqt_core::bench::{run_experiment, ExperimentKind, ExperimentResult, ExperimentSpec};
use sgqt_core::measure::{MeasurementBackend, PhotonBudgetConfig};
use sgqt_core::qcore::{expectation, fidelity, DensityMatrix, PureState};
use sgqt_core::sgqt::{
    gradient_estimate, perturb, run_sgqt, GainSchedule, Perturbation, SgqtConfig,
};
use sgqt_core::sqt::{acquire_counts, mle_estimate, CountEntry, CountVector, TomographySet};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn noiseless_convergence() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut infidelities: Vec<f64> = (0..20)
        .map(|i| {
            let target = PureState::haar_random(1, &mut rng).density_matrix();
            let mut backend = MeasurementBackend::ideal(target.clone());
            let config = SgqtConfig::single_qubit(100, GainSchedule::standard(), 1000 + i);
            let run = run_sgqt(&config, &mut backend, &target).unwrap();
            1.0 - run.final_fidelity()
        })
        .collect();
    let elapsed = start.elapsed();
    let m = median(&mut infidelities);
    verdict(
        m <= 1e-3 && elapsed < Duration::from_secs(5),
        format!(
            "median infidelity {m:.2e} (≤ 1e-3), runtime {:.2}s (< 5s)",
            elapsed.as_secs_f64()
        ),
    )
}

/// Shared run for the low-count one-qubit criteria.
fn low_count_1q() -> (ExperimentResult, Duration) {
    let mut spec = ExperimentSpec::defaults(ExperimentKind::LowCount1q);
    spec.repetitions = 50;
    spec.iterations = 40;
    spec.checkpoints = vec![40];
    let start = Instant::now();
    let result = run_experiment(&spec).unwrap();
    (result, start.elapsed())
}

fn low_count_superiority(result: &ExperimentResult, elapsed: Duration) -> Verdict {
    let s = result.summary_for("sgqt").unwrap();
    let sgqt = s.sgqt_pooled.unwrap();
    let sqt = s.sqt_pooled.unwrap();
    let wins = s.sgqt_win_fraction.unwrap();
    verdict(
        sgqt.median > sqt.median && wins >= 0.7 && elapsed < Duration::from_secs(60),
        format!(
            "median F_sgqt {:.4} vs F_sqt {:.4} at {:.0} photons, SGQT wins {:.0}% of {} pairs (≥ 70%), runtime {:.1}s",
            sgqt.median,
            sqt.median,
            s.sgqt_photons_mean.unwrap(),
            100.0 * wins,
            s.pairs,
            elapsed.as_secs_f64()
        ),
    )
}

fn photon_efficiency(result: &ExperimentResult) -> Verdict {
    let target = result
        .summary_for("sgqt")
        .unwrap()
        .sgqt_pooled
        .unwrap()
        .median;
    let matched = result.spec.sqt_budgets.iter().find(|&&b| {
        let label = sgqt_core::bench::fixed_budget_label(b);
        result
            .summary_for(&label)
            .unwrap()
            .sqt_pooled
            .unwrap()
            .median
            >= target
    });
    let ladder: Vec<String> = result
        .spec
        .sqt_budgets
        .iter()
        .map(|&b| {
            let s = result
                .summary_for(&sgqt_core::bench::fixed_budget_label(b))
                .unwrap();
            format!("{b}:{:.4}", s.sqt_pooled.unwrap().median)
        })
        .collect();
    match matched {
        Some(&b) => verdict(
            b >= 5.0 * 280.0,
            format!(
                "SQT first matches SGQT median {target:.4} at {b} photons ({:.1}× 280, need ≥ 5×); ladder {}",
                b / 280.0,
                ladder.join(" ")
            ),
        ),
        None => verdict(
            true,
            format!("no SQT budget up to the ladder top matches {target:.4}; ladder {}", ladder.join(" ")),
        ),
    }
}

fn error_robustness() -> Verdict {
    let mut spec = ExperimentSpec::defaults(ExperimentKind::ErrorSweep1q);
    spec.repetitions = 50;
    spec.error_levels = vec![8.0];
    let result = run_experiment(&spec).unwrap();
    let s = result.summary_for("sigma=8").unwrap();
    let sgqt = s.sgqt_pooled.unwrap();
    let sqt = s.sqt_pooled.unwrap();
    let wins = s.sgqt_win_fraction.unwrap();
    verdict(
        sgqt.mean > sqt.mean && wins >= 0.8,
        format!(
            "σ=8°: mean F_sgqt {:.4} vs F_sqt {:.4}, reduction of means {:.2}, positive in {:.0}% of {} pairs (≥ 80%)",
            sgqt.mean,
            sqt.mean,
            s.infidelity_reduction.unwrap_or(f64::NAN),
            100.0 * wins,
            s.pairs
        ),
    )
}

fn two_qubit_convergence() -> Verdict {
    let mut spec = ExperimentSpec::defaults(ExperimentKind::TwoQubitSubsetSweep);
    spec.repetitions = 20;
    let result = run_experiment(&spec).unwrap();
    let stats = |m: usize| {
        result
            .summary_for(&format!("m={m}"))
            .unwrap()
            .sgqt_pooled
            .unwrap()
    };
    let m8 = stats(8).median;
    let means: Vec<(usize, f64)> = [2, 4, 6, 8].iter().map(|&m| (m, stats(m).mean)).collect();
    let m2_lowest = means.iter().all(|&(m, f)| m == 2 || f > means[0].1);
    verdict(
        m8 >= 0.99 && m2_lowest,
        format!(
            "|Ψ⁻⟩ |M|=8 median F {m8:.4} (≥ 0.99); mean F at k=100 by |M|: {}",
            means
                .iter()
                .map(|(m, f)| format!("{m}:{f:.4}"))
                .collect::<Vec<_>>()
                .join(" ")
        ),
    )
}

fn two_qubit_low_count() -> Verdict {
    let mut spec = ExperimentSpec::defaults(ExperimentKind::TwoQubitLowCount);
    spec.repetitions = 50;
    let result = run_experiment(&spec).unwrap();
    let s = result.summary_for("m=8").unwrap();
    let sgqt = s.sgqt_pooled.unwrap();
    let sqt = s.sqt_pooled.unwrap();
    let wins = s.sgqt_win_fraction.unwrap();
    verdict(
        sgqt.median > sqt.median && wins >= 0.7,
        format!(
            "median F_sgqt {:.4} vs F_sqt {:.4} at {:.0} photons, positive reduction in {:.0}% of {} pairs (≥ 70%)",
            sgqt.median,
            sqt.median,
            s.sgqt_photons_mean.unwrap(),
            100.0 * wins,
            s.pairs
        ),
    )
}

fn random_mixed(n_qubits: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let a = PureState::haar_random(n_qubits, rng).density_matrix();
    let b = PureState::haar_random(n_qubits, rng).density_matrix();
    let w: f64 = rng.random();
    DensityMatrix::mixture(&[(w, &a), (1.0 - w, &b)]).unwrap()
}

/// Derivative of `⟨φ(β)|ρ|φ(β)⟩` at β = 0 for `φ(β) = normalize(φ + βΔ)`.
fn directional_derivative(rho: &DensityMatrix, phi: &PureState, delta: &Perturbation) -> f64 {
    let d = delta.as_complex();
    let p = phi.amplitudes();
    let rho_phi = rho.elements() * p;
    let e = expectation(rho, phi).unwrap();
    2.0 * d.dotc(&rho_phi).re - 2.0 * e * d.dotc(p).re
}

fn gradient_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut worst = (f64::INFINITY, f64::NEG_INFINITY);
    let mut in_range = 0;
    for i in 0..20 {
        let n = 1 + i % 2;
        let rho = random_mixed(n, &mut rng);
        let phi = PureState::haar_random(n, &mut rng);
        let delta = Perturbation::random(phi.dim(), &mut rng);
        let exact = directional_derivative(&rho, &phi, &delta);
        let errors: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&beta| {
                let plus = expectation(&rho, &perturb(&phi, &delta, beta).unwrap()).unwrap();
                let minus = expectation(&rho, &perturb(&phi, &delta, -beta).unwrap()).unwrap();
                (gradient_estimate(plus, minus, beta).unwrap() - exact).abs()
            })
            .collect();
        let mut ok = true;
        for w in errors.windows(2) {
            let ratio = w[0] / w[1];
            worst = (worst.0.min(ratio), worst.1.max(ratio));
            ok &= (2.5..=6.0).contains(&ratio);
        }
        in_range += ok as usize;
    }
    verdict(
        in_range == 20,
        format!(
            "{in_range}/20 pairs with both halving ratios in [2.5, 6]; ratios span [{:.3}, {:.3}]",
            worst.0, worst.1
        ),
    )
}

fn exact_counts(rho: &DensityMatrix, set: &TomographySet) -> CountVector {
    CountVector {
        entries: set
            .projectors()
            .iter()
            .map(|p| CountEntry::exact(expectation(rho, p).unwrap()).unwrap())
            .collect(),
    }
}

fn mle_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut worst_fidelity = 1.0f64;
    for (n, count) in [(1, 20), (2, 10)] {
        let set = TomographySet::standard(n).unwrap();
        for _ in 0..count {
            let rho = PureState::haar_random(n, &mut rng).density_matrix();
            let est = mle_estimate(&exact_counts(&rho, &set), &set).unwrap().state;
            worst_fidelity = worst_fidelity.min(fidelity(&est, &rho).unwrap());
        }
    }
    let mut worst_eig = 0.0f64;
    let mut worst_trace = 0.0f64;
    for i in 0..1000 {
        let n = if i % 4 == 3 { 2 } else { 1 };
        let lambda = [3.5, 10.0, 100.0, 1000.0][(i / 4) % 4];
        let set = TomographySet::standard(n).unwrap();
        let rho = random_mixed(n, &mut rng);
        let mut backend = MeasurementBackend::new(
            rho,
            PhotonBudgetConfig::per_expectation(lambda).unwrap(),
            None,
            rng.random(),
        )
        .unwrap();
        let counts = acquire_counts(&mut backend, &set).unwrap();
        let est = mle_estimate(&counts, &set).unwrap().state;
        worst_eig = worst_eig.min(est.eigenvalues()[0]);
        worst_trace = worst_trace.max((est.trace() - 1.0).abs());
    }
    verdict(
        worst_fidelity >= 1.0 - 1e-6 && worst_eig >= -1e-10 && worst_trace <= 1e-10,
        format!(
            "exact-data fidelity ≥ {worst_fidelity:.10} (need ≥ 1 − 1e-6); 10³ noisy fits: min eigenvalue {worst_eig:.1e}, max |Tr−1| {worst_trace:.1e} (≤ 1e-10)"
        ),
    )
}

fn trajectory_text(result: &ExperimentResult) -> String {
    let mut out = String::new();
    for r in result.trajectory_rows() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.experiment,
            r.condition,
            r.trial,
            r.iteration,
            r.photons_cumulative,
            r.fidelity,
            r.alpha,
            r.beta,
            r.g
        ));
    }
    for s in &result.sqt {
        out.push_str(&format!("{s:?}\n"));
    }
    out
}

fn determinism() -> Verdict {
    let mut mismatched = Vec::new();
    for kind in ExperimentKind::ALL {
        let mut spec = ExperimentSpec::defaults(kind);
        spec.repetitions = 2;
        spec.iterations = 20;
        spec.checkpoints = if spec.checkpoints.is_empty() {
            vec![]
        } else {
            vec![20]
        };
        spec.sqt_budgets.truncate(2);
        spec.error_levels.truncate(2);
        spec.subset_sizes.truncate(2);
        let run_with = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| trajectory_text(&run_experiment(&spec).unwrap()))
        };
        let a = run_with(1);
        let b = run_with(4);
        let c = run_with(4);
        if a != b || b != c || a.is_empty() {
            mismatched.push(kind.name());
        }
    }
    verdict(
        mismatched.is_empty(),
        if mismatched.is_empty() {
            "all five kinds byte-identical across reruns and worker counts".to_string()
        } else {
            format!("differing outputs: {}", mismatched.join(", "))
        },
    )
}

fn gain_schedule() -> Verdict {
    let g = GainSchedule::standard();
    let mut worst = 0.0f64;
    for k in [0usize, 1, 10, 100] {
        let kf = k as f64;
        let alpha = 3.0 / (kf + 1.0).powf(0.602);
        let beta = 0.1 / (kf + 1.0).powf(0.101);
        worst = worst
            .max((g.alpha(k) - alpha).abs())
            .max((g.beta(k) - beta).abs());
    }
    let exact = g.alpha(0) == 3.0 && g.beta(0) == 0.1;
    verdict(
        exact && worst <= 1e-12,
        format!(
            "α_0 = {}, β_0 = {}; max closed-form deviation {worst:.1e} over k ∈ {{0, 1, 10, 100}}",
            g.alpha(0),
            g.beta(0)
        ),
    )
}

fn report(id: &str, title: &str, f: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let v = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        verdict(false, format!("panicked: {msg}"))
    });
    println!(
        "{id} {} {title}: {} [{:.1}s]",
        if v.pass { "PASS" } else { "FAIL" },
        v.detail,
        start.elapsed().as_secs_f64()
    );
    v.pass
}

fn main() {
    // `cargo test -- --list` and filtered runs expect a harness; honour a
    // filter by criterion id and ignore other flags.
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        return;
    }
    let filter: Vec<&String> = args.iter().filter(|a| !a.starts_with('-')).collect();
    let selected = |id: &str| filter.is_empty() || filter.iter().any(|f| f.as_str() == id);

    let mut results = Vec::new();
    let mut run = |id: &str, title: &str, f: &mut dyn FnMut() -> Verdict| {
        if selected(id) {
            results.push(report(id, title, f));
        }
    };
    run(
        "AC1",
        "noiseless one-qubit convergence",
        &mut noiseless_convergence,
    );
    let mut low_count = None;
    let mut shared = || low_count.get_or_insert_with(low_count_1q).clone();
    run("AC2", "low-count superiority", &mut || {
        let (r, t) = shared();
        low_count_superiority(&r, t)
    });
    run("AC3", "order-of-magnitude photon efficiency", &mut || {
        photon_efficiency(&shared().0)
    });
    run("AC4", "waveplate error robustness", &mut error_robustness);
    run("AC5", "two-qubit convergence", &mut two_qubit_convergence);
    run("AC6", "two-qubit low-count", &mut two_qubit_low_count);
    run("AC7", "SPSA gradient oracle", &mut gradient_oracle);
    run("AC8", "MLE oracle and physicality", &mut mle_oracle);
    run("AC9", "determinism", &mut determinism);
    run("AC10", "gain-schedule values", &mut gain_schedule);

    let failed = results.iter().filter(|p| !**p).count();
    println!(
        "\nacceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
