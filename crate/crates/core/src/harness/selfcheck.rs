use super::config::ExperimentConfig;
use super::oracle::exhaustive_oracle;
use super::pool::Scenario;
use crate::baseline::pftf_schedule;
use crate::error::{Error, Result};
use crate::mcts::{play_episode, PlayMode, RolloutEvaluator, SearchConfig};
use crate::mdp::{binomial, encode_features};
use crate::nn::{backward, read_checkpoint, write_checkpoint, Gradients, NetworkConfig, NetworkParameters, NetworkShape};
use crate::phy::evaluate_decision;
use crate::radio::EnvironmentState;
use crate::rng::{stream, tag};
use crate::Allocation;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

const N_ENVS: u64 = 4;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Allocation(msg()))
    }
}

fn envs(s: &Scenario, seed: u64) -> Result<Vec<EnvironmentState>> {
    s.pool(seed, &[tag::SELFCHECK], N_ENVS as usize)
}

fn check_actions(cfg: &ExperimentConfig, s: &Scenario) -> Result<String> {
    let n = cfg.scenario.n_user;
    let m = cfg.max_users_per_subband;
    let expected = binomial(n as u64 + 1, m as u64) as usize;
    ensure(s.table.len() == expected, || format!("{} actions, expected C({}, {m}) = {expected}", s.table.len(), n + 1))?;
    let mut prev: Option<Vec<usize>> = None;
    for (i, users) in s.table.iter().enumerate() {
        ensure(users.windows(2).all(|w| w[0] < w[1]), || format!("action {i} not strictly increasing"))?;
        ensure(s.table.index_of(users) == Some(i), || format!("index_of disagrees at {i}"))?;
        // the null user ranks after every real user
        let mut padded = users.to_vec();
        padded.resize(m, n);
        if let Some(p) = &prev {
            ensure(*p < padded, || format!("action {i} out of lexicographic order"))?;
        }
        prev = Some(padded);
    }
    Ok(format!("{expected} actions for {n} users, M = {m}"))
}

fn check_episodes(cfg: &ExperimentConfig, s: &Scenario, envs: &[EnvironmentState]) -> Result<String> {
    let mut rng = stream(cfg.seed, &[tag::SELFCHECK, 1]);
    let search = SearchConfig {
        n_simulations: 16,
        ..cfg.search.clone()
    };
    for env in envs {
        let problem = s.problem(env);
        let mut ev = RolloutEvaluator::new(stream(cfg.seed, &[tag::SELFCHECK, 2]));
        let rec = play_episode(&problem, &mut ev, &search, PlayMode::SelfPlay, &mut rng)?;
        ensure(rec.steps.len() == env.n_subband(), || "episode length differs from subband count".into())?;
        rec.allocation.validate(env.n_user(), env.n_subband(), cfg.max_users_per_subband)?;
        for step in &rec.steps {
            let sum: f64 = step.policy.iter().sum();
            ensure((sum - 1.0).abs() < 1e-9, || format!("search policy sums to {sum}"))?;
        }
        let again = problem.reward(&rec.allocation)?;
        ensure(again == rec.reward, || "reward is not reproducible".into())?;
    }
    Ok(format!("{} searched episodes", envs.len()))
}

fn check_reward(cfg: &ExperimentConfig, s: &Scenario, envs: &[EnvironmentState]) -> Result<String> {
    for env in envs {
        let empty = Allocation::empty(env.n_user(), env.n_subband());
        let r0 = evaluate_decision(env, &empty, &s.model)?.reward;
        ensure(r0 == 0.0, || format!("empty allocation scores {r0}"))?;
        let alloc = pftf_schedule(env, &s.model)?;
        alloc.validate(env.n_user(), env.n_subband(), cfg.max_users_per_subband)?;
        let out = evaluate_decision(env, &alloc, &s.model)?;
        ensure(out.reward.is_finite() && out.reward >= 0.0, || format!("reward {}", out.reward))?;
        for u in &out.users {
            ensure((0.0..=1.0).contains(&u.blep), || format!("BLEP {} outside [0, 1]", u.blep))?;
            ensure(u.rate_bps >= 0.0, || format!("negative rate {}", u.rate_bps))?;
        }
        let sum: f64 = out.users.iter().zip(&env.avg_rates).map(|(u, avg)| u.rate_bps / avg).sum();
        let expected = cfg.phy.reward_beta * sum;
        ensure((out.reward - expected).abs() <= 1e-12 * expected.max(1.0), || format!("reward {} != β·Σ R/R̄ = {expected}", out.reward))?;
    }
    Ok("empty decisions score 0, PFTF decisions valid, reward = β·Σ R/R̄".into())
}

fn check_network(cfg: &ExperimentConfig, s: &Scenario, envs: &[EnvironmentState]) -> Result<String> {
    let params = NetworkParameters::init(s.shape, &mut stream(cfg.seed, &[tag::SELFCHECK, 3]));
    for env in envs {
        let f = encode_features(env, &s.problem(env).root(), &cfg.features);
        ensure(f.tokens.data.iter().all(|v| v.is_finite()), || "non-finite feature".into())?;
        let p = params.predict(&f.tokens)?;
        let sum: f64 = p.policy.iter().sum();
        ensure(p.policy.len() == s.table.len(), || "policy length differs from action count".into())?;
        ensure((sum - 1.0).abs() < 1e-9 && p.policy.iter().all(|&x| x >= 0.0), || format!("policy sums to {sum}"))?;
        ensure(p.value >= 0.0 && p.value.is_finite(), || format!("value {}", p.value))?;
    }
    Ok(format!("{} parameters, policy on the simplex, value >= 0", s.shape.n_parameters()))
}

fn check_gradients(cfg: &ExperimentConfig, env: &EnvironmentState) -> Result<String> {
    let net = NetworkConfig {
        d_model: 8,
        n_heads: 2,
        d_ff: 8,
        head_hidden: 8,
        ..cfg.network.clone()
    };
    let s = Scenario::new(cfg)?;
    let shape = NetworkShape::new(cfg.scenario.n_user, env.n_subband(), cfg.max_users_per_subband, &net)?;
    let mut params = NetworkParameters::init(shape, &mut stream(cfg.seed, &[tag::SELFCHECK, 4]));
    let features = encode_features(env, &s.problem(env).root(), &cfg.features).tokens;
    let n_act = s.table.len();
    let dlogits: Vec<f64> = (0..n_act).map(|i| (i as f64 * 0.7).sin()).collect();
    let dvalue = 0.3;
    let objective = |p: &NetworkParameters| -> Result<f64> {
        let t = p.forward_trace(&features)?;
        Ok(t.logits.iter().zip(&dlogits).map(|(l, d)| l * d).sum::<f64>() + dvalue * t.prediction.value)
    };
    let trace = params.forward_trace(&features)?;
    let mut grads = Gradients::zeros(&shape);
    backward(&params, &trace, &dlogits, dvalue, &mut grads);
    let mut worst = 0.0f64;
    let h = 1e-6;
    for t in 0..params.tensors.len() {
        // a few entries per tensor keeps this quick
        let len = params.tensors[t].data.len();
        for idx in [0, len / 2, len - 1] {
            let orig = params.tensors[t].data[idx];
            params.tensors[t].data[idx] = orig + h;
            let up = objective(&params)?;
            params.tensors[t].data[idx] = orig - h;
            let down = objective(&params)?;
            params.tensors[t].data[idx] = orig;
            let numeric = (up - down) / (2.0 * h);
            let analytic = grads.tensors[t].data[idx];
            let err = (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-6);
            worst = worst.max(err);
        }
    }
    ensure(worst < 1e-4, || format!("worst relative error {worst:.3e}"))?;
    Ok(format!("worst relative error {worst:.2e}"))
}

fn check_checkpoint(cfg: &ExperimentConfig, s: &Scenario, envs: &[EnvironmentState]) -> Result<String> {
    let params = NetworkParameters::init(s.shape, &mut stream(cfg.seed, &[tag::SELFCHECK, 5]));
    let mut a = Vec::new();
    write_checkpoint(&params, None, &mut a)?;
    let back = read_checkpoint(a.as_slice())?;
    let mut b = Vec::new();
    write_checkpoint(&back.params, back.adam.as_ref(), &mut b)?;
    ensure(a == b, || "checkpoint bytes differ after a round trip".into())?;
    for env in envs {
        let x = s.greedy(&params, &cfg.features, env)?;
        let y = s.greedy(&back.params, &cfg.features, env)?;
        ensure(x == y, || "greedy decisions differ after a round trip".into())?;
    }
    Ok(format!("{} bytes, identical after reload", a.len()))
}

fn check_oracle(cfg: &ExperimentConfig) -> Result<String> {
    let tiny = ExperimentConfig {
        seed: cfg.seed,
        ..ExperimentConfig::tiny()
    };
    let s = Scenario::new(&tiny)?;
    let mut rng = stream(cfg.seed, &[tag::SELFCHECK, 6]);
    for env in envs(&s, cfg.seed)? {
        let problem = s.problem(&env);
        let best = exhaustive_oracle(&problem, tiny.evaluation.oracle_budget as u128)?;
        let base = problem.reward(&pftf_schedule(&env, &s.model)?)?;
        let mut ev = RolloutEvaluator::new(stream(cfg.seed, &[tag::SELFCHECK, 7]));
        let search = SearchConfig {
            temperature: 0.0,
            ..tiny.search.clone()
        };
        let rec = play_episode(&problem, &mut ev, &search, PlayMode::SelfPlay, &mut rng)?;
        ensure(best.reward >= base && best.reward >= rec.reward, || {
            format!("oracle {} below PFTF {base} or search {}", best.reward, rec.reward)
        })?;
    }
    Ok(format!("oracle dominates PFTF and search on {N_ENVS} tiny environments"))
}

/// Fast runtime checks of the structural invariants on environments drawn
/// from `cfg` (the oracle check always uses the tiny scenario).
pub fn run_selfcheck(cfg: &ExperimentConfig) -> Vec<CheckResult> {
    let setup = Scenario::new(cfg).and_then(|s| {
        let e = envs(&s, cfg.seed)?;
        Ok((s, e))
    });
    let (s, e) = match setup {
        Ok(x) => x,
        Err(err) => {
            return vec![CheckResult {
                name: "setup",
                passed: false,
                detail: err.to_string(),
            }]
        }
    };
    let checks: Vec<(&'static str, Result<String>)> = vec![
        ("action table", check_actions(cfg, &s)),
        ("episodes", check_episodes(cfg, &s, &e)),
        ("reward", check_reward(cfg, &s, &e)),
        ("network outputs", check_network(cfg, &s, &e)),
        ("gradient check", check_gradients(cfg, &e[0])),
        ("checkpoint round trip", check_checkpoint(cfg, &s, &e)),
        ("oracle dominance", check_oracle(cfg)),
    ];
    checks
        .into_iter()
        .map(|(name, r)| match r {
            Ok(detail) => CheckResult { name, passed: true, detail },
            Err(e) => CheckResult {
                name,
                passed: false,
                detail: e.to_string(),
            },
        })
        .collect()
}
