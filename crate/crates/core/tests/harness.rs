use adaptive_drift::compiler::{fixed_probabilities, ExactChannel};
use adaptive_drift::harness::{self, sweep_steps, sweep_stepsize, thread_pool, Format, RunConfig};
use adaptive_drift::hilbert::{evolve_exact, DensityMatrix};
use adaptive_drift::models::{initial_state, Model};
use adaptive_drift::{ModelSpec, SamplingStrategy};

fn combined(a: f64, b: f64) -> f64 {
    (a * a + b * b).sqrt()
}

#[test]
fn error_accumulates_with_steps() {
    let mut cfg = RunConfig::new(ModelSpec::benchmark_mfim(), SamplingStrategy::adaptive());
    cfg.n_steps_list = vec![50, 10];
    cfg.n_samples = 500;
    cfg.master_seed = 3;
    let r = sweep_steps(&cfg, 1).unwrap();
    let rec = r.sweep_records();
    assert_eq!(rec.len(), 2);
    assert_eq!((rec[0].abscissa, rec[1].abscissa), (10.0, 50.0));
    assert!(rec[1].mean_fidelity <= rec[0].mean_fidelity + 3.0 * combined(rec[0].std_error, rec[1].std_error));
}

#[test]
fn adaptive_fidelity_non_increasing_in_step_size() {
    let mut cfg = RunConfig::new(ModelSpec::benchmark_mfim(), SamplingStrategy::adaptive());
    cfg.n_samples = 500;
    cfg.master_seed = 11;
    let r = sweep_stepsize(&cfg, 1).unwrap();
    let rec = r.sweep_records();
    assert_eq!(rec.len(), 5);
    for w in rec.windows(2) {
        assert!(w[1].mean_fidelity <= w[0].mean_fidelity + 3.0 * combined(w[0].std_error, w[1].std_error));
    }
    assert!(r.metadata.fit.is_some());
    let ns: Vec<usize> = r.metadata.points.iter().map(|p| p.n_steps).collect();
    assert_eq!(ns, vec![100, 50, 33, 25, 20]);
}

/// Trajectory average against the iterated exact channel on a bosonic model,
/// where the strategies are far from the small-step regime.
fn channel_cross_check(spec: ModelSpec, strategy: SamplingStrategy, n_steps: usize, n_samples: usize) {
    let terms = spec.build().unwrap();
    let psi0 = initial_state(&spec).unwrap();
    let t = 1.0;
    let probs = fixed_probabilities(&terms, &strategy).unwrap();
    let channel = ExactChannel::new(&terms, &probs, t, n_steps).unwrap();
    let mut rho = DensityMatrix::from_pure(&psi0);
    for _ in 0..n_steps {
        rho = channel.apply(&rho).unwrap();
    }
    let target = evolve_exact(terms.total(), &psi0, t).unwrap();
    let exact = rho.overlap_pure(&target).unwrap();
    let pool = thread_pool(1).unwrap();
    let stats = harness::monte_carlo_point(&terms, &psi0, &strategy, t, n_steps, n_samples, 21, &pool).unwrap();
    assert!(
        (stats.mean - exact).abs() < 3.0 * stats.std_error,
        "{}: MC {} ± {} vs channel {exact}",
        spec.tag(),
        stats.mean,
        stats.std_error
    );
}

#[test]
fn kerr_trajectories_match_channel() {
    channel_cross_check(ModelSpec::benchmark_kerr(), SamplingStrategy::EqualWeight, 20, 4000);
    channel_cross_check(ModelSpec::benchmark_kerr(), SamplingStrategy::FixedQDrift, 20, 4000);
}

#[test]
fn rabi_trajectories_match_channel() {
    let spec = ModelSpec::new(Model::Rabi {
        omega: 1.0,
        omega_q: 1.0,
        g: 0.8,
        fock_dim: 12,
    });
    channel_cross_check(spec, SamplingStrategy::EqualWeight, 20, 4000);
}

#[test]
fn emitted_files_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::new(ModelSpec::benchmark_mfim(), SamplingStrategy::adaptive());
    cfg.n_samples = 50;
    cfg.n_steps = 10;
    cfg.record_traces = true;
    let mut bytes = Vec::new();
    for (k, jobs) in [1, 4].into_iter().enumerate() {
        let path = dir.path().join(format!("run{k}.csv"));
        let r = harness::monte_carlo_fidelity(&cfg, jobs).unwrap();
        let written = harness::emit(&r, Format::Csv, &path).unwrap();
        assert_eq!(written.len(), 3);
        bytes.push(written.iter().map(|p| std::fs::read(p).unwrap()).collect::<Vec<_>>());
    }
    assert_eq!(bytes[0], bytes[1]);
    let trace = String::from_utf8(bytes[0][1].clone()).unwrap();
    assert!(trace.starts_with("step,tau,sampled_index,p_1,p_2,p_3\n"));
    assert_eq!(trace.lines().count(), 11);
}
