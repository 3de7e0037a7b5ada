use clewa_core::rng::{stream_rng, Stream};
use clewa_core::{generate, make_learner, play, ConstraintModel, LearnerKind, ParamOverrides, RewardProcess};

fn trace(horizon: usize, seed: u64) -> clewa_core::EnvironmentTrace {
    let process = RewardProcess::IidBernoulli { means: vec![0.7, 0.5, 0.4, 0.2] };
    let model = ConstraintModel::new(vec![0.2, 0.4, 0.6, 0.9], 0.0).unwrap();
    generate(&process, &model, horizon, seed).unwrap()
}

fn assert_same_path(a: &clewa_core::Playthrough, b: &clewa_core::Playthrough) {
    assert_eq!(a.records.len(), b.records.len());
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!(x.sampled_action, y.sampled_action, "round {}", x.t);
        for (p, q) in x.distribution.probs().iter().zip(y.distribution.probs()) {
            assert!((p - q).abs() <= 1e-12, "round {}: {p} vs {q}", x.t);
        }
        assert_eq!(x.lambda_before, 0.0);
    }
}

#[test]
fn lewa_without_constraint_is_ewa() {
    let horizon = 10_000;
    let tr = trace(horizon, 3);
    let ov = ParamOverrides { eta: Some(0.02), ..Default::default() };
    let mut lewa = make_learner(LearnerKind::Lewa, 4, horizon, 0.0, &ov).unwrap();
    let mut ewa = make_learner(LearnerKind::Ewa, 4, horizon, 0.0, &ov).unwrap();
    let a = play(&mut lewa, &tr, &mut stream_rng(9, Stream::Learner)).unwrap();
    let b = play(&mut ewa, &tr, &mut stream_rng(9, Stream::Learner)).unwrap();
    assert_same_path(&a, &b);
}

#[test]
fn bandit_lewa_without_constraint_is_exp3() {
    let horizon = 10_000;
    let tr = trace(horizon, 4);
    let ov = ParamOverrides { eta: Some(0.005), gamma: Some(0.05), delta: Some(0.1), ..Default::default() };
    let mut lewa = make_learner(LearnerKind::BanditLewa, 4, horizon, 0.0, &ov).unwrap();
    let mut exp3 = make_learner(LearnerKind::Exp3, 4, horizon, 0.0, &ov).unwrap();
    let a = play(&mut lewa, &tr, &mut stream_rng(11, Stream::Learner)).unwrap();
    let b = play(&mut exp3, &tr, &mut stream_rng(11, Stream::Learner)).unwrap();
    assert_same_path(&a, &b);
}

#[test]
fn realized_regret_concentrates_around_regret() {
    // Azuma with increments in [-1, 1]: P(|gap| > sqrt(2 T ln(2/q))) <= q.
    let horizon = 10_000;
    let bound = (2.0 * horizon as f64 * (2.0f64 / 1e-6).ln()).sqrt();
    for seed in 0..20u64 {
        let tr = trace(horizon, seed);
        for kind in [LearnerKind::Lewa, LearnerKind::BanditLewa] {
            let mut learner = make_learner(kind, 4, horizon, 0.5, &ParamOverrides::default()).unwrap();
            let run = play(&mut learner, &tr, &mut stream_rng(seed, Stream::Learner)).unwrap();
            let expected = clewa_core::regret(&run.records, &tr).unwrap();
            let realized = clewa_core::realized_regret(&run.records, &tr).unwrap();
            assert!((expected - realized).abs() <= bound, "{kind} seed {seed}: {expected} vs {realized}");
        }
    }
}

#[test]
fn identical_seeds_give_identical_runs() {
    let horizon = 2_000;
    let tr = trace(horizon, 5);
    for kind in LearnerKind::ALL {
        let run = |seed| {
            let mut learner = make_learner(kind, 4, horizon, 0.5, &ParamOverrides::default()).unwrap();
            play(&mut learner, &tr, &mut stream_rng(seed, Stream::Learner)).unwrap().records
        };
        assert_eq!(run(1), run(1), "{kind}");
    }
}
