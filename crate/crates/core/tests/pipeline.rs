//! End-to-end checks across modules on small scenarios.

use musched::baseline::pftf_schedule;
use musched::harness::{evaluate_against_baseline, exhaustive_oracle, leaf_count, run_training, ExperimentConfig, Scenario};
use musched::mcts::{play_episode, PlayMode, RolloutEvaluator, SearchConfig};
use musched::radio::record::{read_environment, write_environment};
use musched::rng::{stream, tag};

fn tiny() -> (ExperimentConfig, Scenario) {
    let cfg = ExperimentConfig::tiny();
    let s = Scenario::new(&cfg).unwrap();
    (cfg, s)
}

#[test]
fn tiny_tree_has_27_leaves() {
    let (_, s) = tiny();
    assert_eq!(s.table.len(), 3);
    assert_eq!(leaf_count(s.table.len(), s.env.channel.n_subband()), 27);
}

#[test]
fn pftf_reaches_80_percent_of_oracle_on_tiny() {
    let (cfg, s) = tiny();
    let envs = s.pool(cfg.seed, &[tag::ORACLE_ENV, 80], 100).unwrap();
    let (mut base, mut best) = (0.0, 0.0);
    for env in &envs {
        let p = s.problem(env);
        let o = exhaustive_oracle(&p, 27).unwrap();
        let b = p.reward(&pftf_schedule(env, &s.model).unwrap()).unwrap();
        assert!(b <= o.reward + 1e-15, "baseline above the optimum");
        base += b;
        best += o.reward;
    }
    assert!(base >= 0.8 * best, "PFTF {base} vs oracle {best}");
}

#[test]
fn search_never_beats_the_oracle() {
    let (cfg, s) = tiny();
    let search = SearchConfig {
        n_simulations: 60,
        reuse_tree: true,
        ..cfg.search.clone()
    };
    for (i, env) in s.pool(cfg.seed, &[tag::ORACLE_ENV, 81], 20).unwrap().iter().enumerate() {
        let p = s.problem(env);
        let o = exhaustive_oracle(&p, 27).unwrap();
        let mut ev = RolloutEvaluator::new(stream(i as u64, &[1]));
        let rec = play_episode(&p, &mut ev, &search, PlayMode::SelfPlay, &mut stream(i as u64, &[2])).unwrap();
        assert!(rec.reward <= o.reward);
        assert_eq!(rec.steps.len(), 3);
    }
}

#[test]
fn environment_records_round_trip_through_scoring() {
    let (cfg, s) = tiny();
    for env in s.pool(cfg.seed, &[tag::ORACLE_ENV, 82], 5).unwrap() {
        let mut buf = Vec::new();
        write_environment(&env, &mut buf).unwrap();
        let back = read_environment(buf.as_slice()).unwrap();
        assert_eq!(back, env);
        let a = pftf_schedule(&env, &s.model).unwrap();
        assert_eq!(s.problem(&env).reward(&a).unwrap(), s.problem(&back).reward(&a).unwrap());
    }
}

#[test]
fn short_training_run_is_reproducible_and_scores() {
    let mut cfg = ExperimentConfig::tiny();
    cfg.training.n_iterations = 1;
    cfg.training.envs_per_iteration = 6;
    cfg.training.epochs = 2;
    cfg.training.holdout_envs = 5;
    cfg.search.n_simulations = 30;
    let mut seen = Vec::new();
    let a = run_training(&cfg, |m, _, _| {
        seen.push(m.iteration);
        Ok(())
    })
    .unwrap();
    let b = run_training(&cfg, |_, _, _| Ok(())).unwrap();
    assert_eq!(seen, vec![0, 1]);
    assert_eq!(a.params, b.params);
    assert_eq!(a.metrics.len(), 2);
    assert_eq!(a.metrics[1].dataset_size, 6 * 3);

    let s = Scenario::new(&cfg).unwrap();
    let pool = s.pool(cfg.seed, &[tag::EVAL_ENV], 8).unwrap();
    let report = evaluate_against_baseline(&cfg, &a.params, &pool).unwrap();
    assert_eq!(report.environments.len(), 8);
    assert!(report.environments.iter().all(|e| e.learned_reward >= 0.0 && e.baseline_reward >= 0.0));
}
