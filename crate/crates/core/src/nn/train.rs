use rand::seq::SliceRandom;
use rand::Rng;

use super::adam::AdamState;
use super::loss::log_softmax;
use super::model::backward;
use super::params::{Gradients, NetworkParameters};
use crate::error::{Error, Result};
use crate::tensor::Matrix;

/// One `(s, π, z)` record.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSample {
    pub features: Matrix,
    pub policy: Vec<f64>,
    pub value: f64,
}

/// Mean loss over `batch` and its gradient (written into `grads`).
///
/// The cross-entropy term uses the log-softmax of the logits, which equals
/// `−π·ln p` wherever `p` is above the log floor.
pub fn batch_loss_and_gradient(
    params: &NetworkParameters,
    batch: &[&TrainingSample],
    grads: &mut Gradients,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::config("empty training batch"));
    }
    grads.fill(0.0);
    let mut total = 0.0;
    for sample in batch {
        if sample.policy.len() != params.shape.n_actions {
            return Err(Error::Shape(format!(
                "policy target has {} entries, network has {} actions",
                sample.policy.len(),
                params.shape.n_actions
            )));
        }
        let trace = params.forward_trace(&sample.features)?;
        let log_p = log_softmax(&trace.logits);
        let pi_sum: f64 = sample.policy.iter().sum();
        let ce: f64 = -sample.policy.iter().zip(&log_p).map(|(t, l)| t * l).sum::<f64>();
        let v = trace.prediction.value;
        total += (sample.value - v).powi(2) + ce;
        let dlogits: Vec<f64> = trace
            .prediction
            .policy
            .iter()
            .zip(&sample.policy)
            .map(|(p, t)| p * pi_sum - t)
            .collect();
        backward(params, &trace, &dlogits, 2.0 * (v - sample.value), grads);
    }
    let inv = 1.0 / batch.len() as f64;
    grads.scale(inv);
    Ok(total * inv)
}

/// Shuffled mini-batch Adam for `epochs` passes; returns the mean training
/// loss of each epoch (measured on the fly, before each batch's update).
pub fn train<R: Rng + ?Sized>(
    params: &mut NetworkParameters,
    adam: &mut AdamState,
    dataset: &[TrainingSample],
    epochs: usize,
    batch_size: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if dataset.is_empty() {
        return Err(Error::config("empty training dataset"));
    }
    if batch_size == 0 {
        return Err(Error::config("batch size must be positive"));
    }
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut grads = Gradients::zeros(&params.shape);
    let mut history = Vec::with_capacity(epochs);
    for _ in 0..epochs {
        order.shuffle(rng);
        let mut sum = 0.0;
        for chunk in order.chunks(batch_size) {
            let batch: Vec<&TrainingSample> = chunk.iter().map(|&i| &dataset[i]).collect();
            let l = batch_loss_and_gradient(params, &batch, &mut grads)?;
            sum += l * batch.len() as f64;
            adam.step(params, &grads);
        }
        history.push(sum / dataset.len() as f64);
    }
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{loss, AdamConfig, NetworkConfig, NetworkShape};
    use crate::rng::stream;

    fn small() -> NetworkParameters {
        let shape = NetworkShape::new(2, 3, 2, &NetworkConfig {
            d_model: 8,
            head_hidden: 8,
            d_ff: 16,
            ..NetworkConfig::default()
        })
        .unwrap();
        NetworkParameters::init(shape, &mut stream(3, &[]))
    }

    fn sample(p: &NetworkParameters, seed: u64) -> TrainingSample {
        let mut rng = stream(seed, &[]);
        let s = &p.shape;
        let mut x = Matrix::zeros(s.n_tokens(), s.n_features);
        x.data.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
        let mut policy = vec![0.0; s.n_actions];
        policy[rng.random_range(0..s.n_actions)] = 1.0;
        TrainingSample {
            features: x,
            policy,
            value: rng.random_range(0.1..0.9),
        }
    }

    #[test]
    fn batch_loss_matches_public_loss() {
        let p = small();
        let a = sample(&p, 1);
        let b = sample(&p, 2);
        let mut g = Gradients::zeros(&p.shape);
        let l = batch_loss_and_gradient(&p, &[&a, &b], &mut g).unwrap();
        let direct: f64 = [&a, &b]
            .iter()
            .map(|s| {
                let pr = p.predict(&s.features).unwrap();
                loss(&pr.policy, pr.value, &s.policy, s.value)
            })
            .sum::<f64>()
            / 2.0;
        assert!((l - direct).abs() < 1e-12);
    }

    #[test]
    fn overfits_one_sample() {
        let mut p = small();
        let s = sample(&p, 5);
        let dataset = vec![s; 64];
        let mut adam = AdamState::new(
            AdamConfig {
                learning_rate: 1e-3,
                ..AdamConfig::default()
            },
            &p.shape,
        );
        let hist = train(&mut p, &mut adam, &dataset, 50, 16, &mut stream(6, &[])).unwrap();
        assert!(hist.last().unwrap() < &0.01, "final loss {hist:?}");
        assert!(hist.last().unwrap() <= &hist[0]);
    }

    #[test]
    fn training_is_deterministic() {
        let run = || {
            let mut p = small();
            let data: Vec<_> = (0..20).map(|i| sample(&p, 100 + i)).collect();
            let mut adam = AdamState::new(AdamConfig::default(), &p.shape);
            let h = train(&mut p, &mut adam, &data, 3, 8, &mut stream(7, &[])).unwrap();
            (p, adam, h)
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn rejects_empty_inputs() {
        let mut p = small();
        let mut adam = AdamState::new(AdamConfig::default(), &p.shape);
        assert!(train(&mut p, &mut adam, &[], 1, 4, &mut stream(1, &[])).is_err());
        let s = sample(&p, 1);
        assert!(train(&mut p, &mut adam, &[s], 1, 0, &mut stream(1, &[])).is_err());
    }
}
