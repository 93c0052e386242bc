/// Floor applied to probabilities before taking logs.
pub const LOG_FLOOR: f64 = 1e-9;

/// Max-shifted softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    out.iter_mut().for_each(|p| *p /= sum);
    out
}

pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|&l| (l - max).exp()).sum::<f64>().ln();
    logits.iter().map(|&l| l - lse).collect()
}

/// `ln(1 + eˣ)` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x + (-x).exp()
    } else {
        x.exp().ln_1p()
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `(z − v)² − Σ πₐ · ln max(pₐ, 10⁻⁹)`.
pub fn loss(p: &[f64], v: f64, pi: &[f64], z: f64) -> f64 {
    assert_eq!(p.len(), pi.len());
    let ce: f64 = p.iter().zip(pi).map(|(&p, &t)| -t * p.max(LOG_FLOOR).ln()).sum();
    (z - v).powi(2) + ce
}
