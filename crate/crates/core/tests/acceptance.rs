//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Pass criterion numbers as arguments to
//! run a subset, e.g. `cargo test --test acceptance -- 3 8`.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use adaptive_drift::compiler::{
    cost_epsilon, exact_moments, fixed_probabilities, fluctuation_probabilities, predicted_fidelity, trajectory_rng,
    ExactChannel, ProbabilityVector,
};
use adaptive_drift::harness::{self, shadow_bench, sweep_stepsize, trace_probabilities, RunConfig};
use adaptive_drift::hilbert::{evolve_exact, random, DensityMatrix, HilbertSpace};
use adaptive_drift::models::{initial_state, Boundary, Model, Term};
use adaptive_drift::{HamiltonianTermSet, ModelSpec, SamplingStrategy};
use rand::Rng;
use sha2::{Digest, Sha256};

struct Verdict {
    pass: bool,
    summary: String,
    details: Vec<String>,
}

impl Verdict {
    fn new(pass: bool, summary: impl Into<String>) -> Self {
        Self {
            pass,
            summary: summary.into(),
            details: Vec::new(),
        }
    }
}

fn random_instance<R: Rng>(rng: &mut R, n_qubits: usize, n_terms: usize) -> (HamiltonianTermSet, adaptive_drift::StateVector) {
    let space = HilbertSpace::qubits(n_qubits).unwrap();
    let terms = (0..n_terms)
        .map(|j| Term {
            label: format!("h{j}"),
            operator: random::hermitian(space.clone(), rng),
            weight: None,
        })
        .collect();
    let set = HamiltonianTermSet::new(space.clone(), terms).unwrap();
    let psi = random::haar_state(space, rng);
    (set, psi)
}

/// Euclidean projection onto `{p : Σp = 1, p_i ≥ lo}`.
fn project(v: &[f64], lo: f64) -> Vec<f64> {
    let n = v.len();
    let budget = 1.0 - lo * n as f64;
    let mut u: Vec<f64> = v.iter().map(|x| x - lo).collect();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cum += uk;
        let t = (cum - budget) / (k + 1) as f64;
        if uk - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - lo - theta).max(0.0) + lo).collect()
}

/// Projected gradient descent with Armijo backtracking on `Σ Δ_j² / p_j`.
fn simplex_minimizer(dev: &[f64]) -> Vec<f64> {
    let f = |p: &[f64]| dev.iter().zip(p).map(|(d, q)| d * d / q).sum::<f64>();
    let n = dev.len();
    let mut p = vec![1.0 / n as f64; n];
    let mut step = 1e-2;
    for _ in 0..200_000 {
        let g: Vec<f64> = dev.iter().zip(&p).map(|(d, q)| -d * d / (q * q)).collect();
        let fp = f(&p);
        let mut s = step * 4.0;
        let next = loop {
            let trial = project(&p.iter().zip(&g).map(|(q, gi)| q - s * gi).collect::<Vec<_>>(), 1e-12);
            let moved: f64 = trial.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum();
            if f(&trial) <= fp - 1e-4 / s * moved || s < 1e-18 {
                break trial;
            }
            s *= 0.5;
        };
        step = s;
        let change = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        p = next;
        if change < 1e-15 {
            break;
        }
    }
    p
}

fn criterion_1() -> Verdict {
    let mut rng = trajectory_rng(1001, 0);
    let mut worst_p = 0.0f64;
    let mut worst_cost = 0.0f64;
    for _ in 0..100 {
        let n_qubits = rng.random_range(2..=3);
        let n_terms = rng.random_range(2..=4);
        let (terms, psi) = random_instance(&mut rng, n_qubits, n_terms);
        let moments = exact_moments(&terms, &psi).unwrap();
        let update = fluctuation_probabilities(&moments, 1e-12).unwrap();
        let dev = &update.deviations;
        let numeric = simplex_minimizer(dev);
        for (a, b) in update.probabilities.as_slice().iter().zip(&numeric) {
            worst_p = worst_p.max((a - b).abs());
        }
        let cost = cost_epsilon(dev, &update.probabilities).unwrap();
        let sum: f64 = dev.iter().sum();
        worst_cost = worst_cost.max((cost - sum * sum).abs());
    }
    Verdict::new(
        worst_p <= 1e-6 && worst_cost <= 1e-9,
        format!("closed form vs projected gradient: max |Δp| = {worst_p:.2e} (≤ 1e-6), max |ε − (ΣΔ)²| = {worst_cost:.2e} (≤ 1e-9)"),
    )
}

/// `|F_channel − F_predicted|` of one channel step at each `τ`.
fn one_step_errors(terms: &HamiltonianTermSet, psi: &adaptive_drift::StateVector, taus: &[f64]) -> Vec<f64> {
    let probs = fixed_probabilities(terms, &SamplingStrategy::FixedQDrift).unwrap();
    let rho = DensityMatrix::from_pure(psi);
    taus.iter()
        .map(|&tau| {
            let channel = ExactChannel::new(terms, &probs, tau, 1).unwrap();
            let target = evolve_exact(terms.total(), psi, tau).unwrap();
            let f = channel.apply(&rho).unwrap().overlap_pure(&target).unwrap();
            (f - predicted_fidelity(psi, terms, &probs, tau, 1).unwrap()).abs()
        })
        .collect()
}

fn criterion_2() -> Verdict {
    let mut rng = trajectory_rng(1002, 0);
    let mut ratios = Vec::new();
    let mut fine = Vec::new();
    for _ in 0..20 {
        let (terms, psi) = random_instance(&mut rng, 2, 3);
        let terms = HamiltonianTermSet::from_operators(
            terms.space().clone(),
            terms.terms().iter().map(|t| (t.label.clone(), t.operator.matrix().clone())).collect(),
        )
        .unwrap();
        let errs = one_step_errors(&terms, &psi, &[0.04, 0.02, 0.01]);
        ratios.push(errs[0] / errs[1]);
        ratios.push(errs[1] / errs[2]);
        let errs = one_step_errors(&terms, &psi, &[1e-3, 5e-4]);
        fine.push(errs[0] / errs[1]);
    }
    let range = |v: &[f64]| {
        (
            v.iter().cloned().fold(f64::INFINITY, f64::min),
            v.iter().cloned().fold(0.0, f64::max),
        )
    };
    let (lo, hi) = range(&ratios);
    let outside = ratios.iter().filter(|r| !(4.0..=16.0).contains(*r)).count();
    let (flo, fhi) = range(&fine);
    let mut v = Verdict::new(
        outside == 0,
        format!("shrink factor per halving over 40 pairs in [{lo:.3}, {hi:.3}], {outside} outside [4, 16]"),
    );
    v.details.push(format!("same instances at τ = 1e-3 → 5e-4: factor in [{flo:.3}, {fhi:.3}] (τ³ remainder gives 8)"));
    v
}

fn criterion_3() -> Verdict {
    let spec = ModelSpec::new(Model::Mfim {
        chain_length: 2,
        j: 1.0,
        h_x: 0.5,
        h_z: 0.3,
        boundary: Boundary::Open,
    });
    let terms = spec.build().unwrap();
    let psi0 = initial_state(&spec).unwrap();
    let (t, n) = (1.0, 10);
    let probs = fixed_probabilities(&terms, &SamplingStrategy::FixedQDrift).unwrap();
    let channel = ExactChannel::new(&terms, &probs, t, n).unwrap();
    let mut rho = DensityMatrix::from_pure(&psi0);
    for _ in 0..n {
        rho = channel.apply(&rho).unwrap();
    }
    let exact = rho.overlap_pure(&evolve_exact(terms.total(), &psi0, t).unwrap()).unwrap();
    let pool = harness::thread_pool(0).unwrap();
    let stats =
        harness::monte_carlo_point(&terms, &psi0, &SamplingStrategy::FixedQDrift, t, n, 100_000, 1003, &pool).unwrap();
    let z = (stats.mean - exact).abs() / stats.std_error;
    Verdict::new(
        z < 3.0,
        format!(
            "10^5 trajectories {:.6} ± {:.1e} vs channel {exact:.6}: {z:.2} SE (< 3)",
            stats.mean, stats.std_error
        ),
    )
}

fn criterion_4() -> Verdict {
    let mut means = Vec::new();
    for strategy in [SamplingStrategy::adaptive(), SamplingStrategy::FixedQDrift] {
        let mut cfg = RunConfig::new(ModelSpec::benchmark_mfim(), strategy);
        cfg.t = 1.0;
        cfg.n_steps = 50;
        cfg.n_samples = 2000;
        cfg.master_seed = 1004;
        let r = harness::monte_carlo_fidelity(&cfg, 0).unwrap();
        let rec = &r.sweep_records()[0];
        means.push((rec.mean_fidelity, rec.std_error));
    }
    let (a, q) = (means[0], means[1]);
    let combined = (a.1 * a.1 + q.1 * q.1).sqrt();
    let margin = (a.0 - q.0) / combined;
    Verdict::new(
        margin > 3.0,
        format!(
            "MFIM N=50: adaptive {:.4} ± {:.1e}, qdrift {:.4} ± {:.1e}, gap {margin:.1} combined SE (> 3)",
            a.0, a.1, q.0, q.1
        ),
    )
}

fn criterion_5() -> Verdict {
    let mut details = Vec::new();
    let mut pass = true;
    let mut kerr_dev = BTreeMap::new();
    let models = [ModelSpec::benchmark_mfim(), ModelSpec::benchmark_kerr(), ModelSpec::benchmark_rabi()];
    for model in models {
        let mut strategies = vec![SamplingStrategy::adaptive(), SamplingStrategy::EqualWeight];
        if model.tag() == "kerr" {
            strategies.push(SamplingStrategy::FixedQDrift);
        }
        for strategy in strategies {
            let mut cfg = RunConfig::new(model.clone(), strategy.clone());
            cfg.n_samples = 2000;
            cfg.master_seed = 1005;
            let r = sweep_stepsize(&cfg, 0).unwrap();
            let fit = r.metadata.fit.unwrap();
            let dev = (1.0 - fit.intercept).abs();
            let means: Vec<String> = r.sweep_records().iter().map(|x| format!("{:.4}", x.mean_fidelity)).collect();
            let line = format!(
                "{} {}: F = [{}], intercept {:.4} ± {:.1e}, |1 − intercept| = {dev:.1e}",
                model.tag(),
                strategy.tag(),
                means.join(", "),
                fit.intercept,
                fit.intercept_se
            );
            if strategy.tag() == "qdrift" {
                details.push(line);
            } else {
                let ok = dev <= 5e-3 && fit.intercept_se < 5e-3;
                pass &= ok;
                details.push(format!("{} {line}", if ok { "ok  " } else { "MISS" }));
            }
            if model.tag() == "kerr" {
                kerr_dev.insert(strategy.tag(), dev);
            }
        }
    }
    let hard = kerr_dev["qdrift"];
    let others = kerr_dev["adaptive"].max(kerr_dev["equal"]);
    let ordering = hard > others;
    details.push(format!(
        "{} kerr hard-truncation deviation {hard:.3} vs max(adaptive, equal) {others:.3}",
        if ordering { "ok  " } else { "MISS" }
    ));
    let mut v = Verdict::new(
        pass && ordering,
        format!(
            "zero-step intercepts within 5e-3 of 1 with SE < 5e-3: {}; Kerr hard-truncation deviates most: {}",
            if pass { "yes" } else { "no" },
            if ordering { "yes" } else { "no" }
        ),
    );
    v.details = details;
    v
}

fn criterion_6() -> Verdict {
    let rabi = |g: f64| {
        let model = ModelSpec::new(Model::Rabi {
            omega: 1.0,
            omega_q: 1.0,
            g,
            fock_dim: 50,
        });
        let mut cfg = RunConfig::new(model, SamplingStrategy::adaptive());
        cfg.t = 1.0;
        cfg.n_steps = 50;
        cfg.master_seed = 1006;
        trace_probabilities(&cfg).unwrap()
    };
    let strong = rabi(0.8);
    let argmax: Vec<usize> = strong
        .trace_rows()
        .iter()
        .map(|r| ProbabilityVector::new(r.probabilities.clone()).unwrap().argmax())
        .collect();
    let shifts = argmax.windows(2).filter(|w| w[0] != w[1]).count();
    let weak = rabi(0.2);
    let worst_sum = weak
        .trace_rows()
        .iter()
        .map(|r| (r.probabilities.iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    let rows_ok = weak.trace_rows().len() == 50 && strong.trace_rows().len() == 50;
    Verdict::new(
        shifts >= 1 && worst_sum <= 1e-12 && rows_ok,
        format!("g=0.8: dominant term changes {shifts} times (≥ 1); g=0.2: max |Σp − 1| = {worst_sum:.1e} (≤ 1e-12)"),
    )
}

fn criterion_7() -> Verdict {
    let mut cfg = RunConfig::new(ModelSpec::benchmark_mfim(), SamplingStrategy::adaptive());
    cfg.master_seed = 1007;
    cfg.shadow_bench.n_shots = vec![1_000, 2_000, 5_000, 10_000, 20_000, 50_000];
    cfg.shadow_bench.repeats = 30;
    cfg.shadow_bench.mom_batches = 10;
    let r = shadow_bench(&cfg, 0).unwrap();
    let mut details = Vec::new();
    let mut accurate = true;
    for row in r.shadow_rows().iter().filter(|row| row.n_shots == 50_000) {
        let err = (row.deviation - row.exact_deviation).abs();
        let ok = err <= 0.05 * row.exact_deviation;
        accurate &= ok;
        details.push(format!(
            "{} ΔH_{}: estimate {:.4} (after noise floor {:.4}), exact {:.4}",
            if ok { "ok  " } else { "MISS" },
            row.term,
            row.deviation,
            row.floored_deviation,
            row.exact_deviation
        ));
    }
    let mut scaling = true;
    for s in &r.metadata.shot_scaling {
        let ok = (s.mean_slope + 0.5).abs() <= 0.1 && (s.variance_slope + 0.5).abs() <= 0.1;
        scaling &= ok;
        details.push(format!(
            "{} {}: SE slope {:.3} for ⟨H⟩, {:.3} for Var(H)",
            if ok { "ok  " } else { "MISS" },
            s.term,
            s.mean_slope,
            s.variance_slope
        ));
    }
    let mut v = Verdict::new(
        accurate && scaling,
        format!(
            "5·10^4 snapshots, K=10: all ΔH_j within 5% relative: {}; SE slopes within −0.5 ± 0.1: {}",
            if accurate { "yes" } else { "no" },
            if scaling { "yes" } else { "no" }
        ),
    );
    v.details = details;
    v
}

const DETERMINISM_CONFIGS: [(&str, &str); 6] = [
    (
        "run",
        "n_samples = 200\nn_steps = 20\nrecord_traces = true\n[model]\nkind = \"mfim\"\nchain_length = 4\nj = 1.0\nh_x = 0.5\nh_z = 0.3\n[strategy]\nkind = \"adaptive\"\n",
    ),
    (
        "run",
        "n_samples = 12\nn_steps = 5\n[model]\nkind = \"mfim\"\nchain_length = 4\nj = 1.0\nh_x = 0.5\nh_z = 0.3\n[strategy]\nkind = \"adaptive\"\n[strategy.shadows]\nn_shots = 200\nmom_batches = 10\n",
    ),
    (
        "sweep-steps",
        "n_samples = 100\nn_steps_list = [5, 10, 20]\n[model]\nkind = \"kerr\"\ndelta = 0.3\nkerr = 1.0\ndrive = 0.5\nfock_dim = 20\n[strategy]\nkind = \"qdrift\"\n",
    ),
    (
        "sweep-stepsize",
        "n_samples = 100\nstep_sizes = [0.1, 0.2, 0.25]\n[model]\nkind = \"rabi\"\nomega = 1.0\nomega_q = 1.0\ng = 0.8\nfock_dim = 20\n[strategy]\nkind = \"equal\"\n",
    ),
    (
        "trace-probs",
        "n_steps = 50\n[model]\nkind = \"rabi\"\nomega = 1.0\nomega_q = 1.0\ng = 0.8\nfock_dim = 50\n[strategy]\nkind = \"adaptive\"\n",
    ),
    (
        "shadow-bench",
        "[model]\nkind = \"mfim\"\nchain_length = 4\nj = 1.0\nh_x = 0.5\nh_z = 0.3\n[strategy]\nkind = \"adaptive\"\n[shadow_bench]\nn_shots = [200, 400]\nrepeats = 4\n",
    ),
];

fn digest_dir(dir: &Path) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let bytes = std::fs::read(&path).unwrap();
        let hex: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        out.insert(path.file_name().unwrap().to_string_lossy().into_owned(), hex);
    }
    out
}

fn criterion_8() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_adaptive-drift");
    let root = tempfile::tempdir().unwrap();
    let out_dir = root.path().join("out");
    let mut runs = Vec::new();
    for jobs in ["1", "8"] {
        if out_dir.exists() {
            std::fs::remove_dir_all(&out_dir).unwrap();
        }
        std::fs::create_dir(&out_dir).unwrap();
        for (k, (command, config)) in DETERMINISM_CONFIGS.iter().enumerate() {
            let cfg_path = root.path().join(format!("c{k}.toml"));
            std::fs::write(&cfg_path, config).unwrap();
            for format in ["csv", "json"] {
                let out = out_dir.join(format!("{k}-{command}.{format}"));
                let status = Command::new(bin)
                    .arg(command)
                    .arg("--config")
                    .arg(&cfg_path)
                    .args(["--seed", "1008", "--jobs", jobs, "--format", format, "--out"])
                    .arg(&out)
                    .status()
                    .unwrap();
                assert!(status.success(), "{command} failed");
            }
        }
        runs.push(digest_dir(&out_dir));
    }
    let files = runs[0].len();
    let same = runs[0] == runs[1];
    Verdict::new(
        same && files >= 2 * DETERMINISM_CONFIGS.len(),
        format!(
            "{} commands × 2 formats, {files} files: --jobs 1 and --jobs 8 byte-identical: {}",
            DETERMINISM_CONFIGS.len(),
            if same { "yes" } else { "no" }
        ),
    )
}

fn main() {
    type Check = fn() -> Verdict;
    let criteria: [(u32, &str, Check, Duration); 8] = [
        (1, "closed-form optimality", criterion_1, Duration::from_secs(30)),
        (2, "second-order fidelity law", criterion_2, Duration::from_secs(30)),
        (3, "channel/Monte-Carlo equivalence", criterion_3, Duration::from_secs(120)),
        (4, "MFIM strategy ordering", criterion_4, Duration::from_secs(300)),
        (5, "zero-step convergence", criterion_5, Duration::from_secs(1200)),
        (6, "Rabi dominant-term shift", criterion_6, Duration::from_secs(60)),
        (7, "shadow estimator calibration", criterion_7, Duration::from_secs(120)),
        (8, "determinism", criterion_8, Duration::from_secs(60)),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    let mut ran = 0;
    for (id, name, check, limit) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let verdict = check();
        let elapsed = start.elapsed();
        let in_time = elapsed < limit;
        let pass = verdict.pass && in_time;
        println!(
            "[{}] {id}. {name}: {} [{:.1} s, limit {} s]",
            if pass { "PASS" } else { "FAIL" },
            verdict.summary,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
        for d in &verdict.details {
            println!("       {d}");
        }
        if !pass {
            failed.push(id);
        }
    }
    println!("acceptance: {}/{ran} criteria passed", ran - failed.len());
    if !failed.is_empty() {
        println!("failed: {failed:?}");
        std::process::exit(1);
    }
}
