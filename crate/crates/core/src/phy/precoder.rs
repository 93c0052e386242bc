//! SLNR precoding and per-subband SINR.

use num_complex::Complex64;

use crate::alloc::Allocation;
use crate::error::{Error, Result};
use crate::linalg::{mat_vec, normalize, solve_hpd};
use crate::radio::ChannelTensor;

/// Unit-norm precoders `w_{k,j}`, defined for scheduled pairs only.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSet {
    pub n_user: usize,
    pub n_subband: usize,
    pub n_tx: usize,
    w: Vec<Complex64>,
    defined: Vec<bool>,
}

impl PrecoderSet {
    fn new(n_user: usize, n_subband: usize, n_tx: usize) -> Self {
        Self {
            n_user,
            n_subband,
            n_tx,
            w: vec![Complex64::new(0.0, 0.0); n_user * n_subband * n_tx],
            defined: vec![false; n_user * n_subband],
        }
    }

    pub fn get(&self, user: usize, subband: usize) -> Option<&[Complex64]> {
        let i = user * self.n_subband + subband;
        self.defined[i].then(|| &self.w[i * self.n_tx..(i + 1) * self.n_tx])
    }

    fn set(&mut self, user: usize, subband: usize, w: &[Complex64]) {
        let i = user * self.n_subband + subband;
        self.defined[i] = true;
        self.w[i * self.n_tx..(i + 1) * self.n_tx].copy_from_slice(w);
    }
}

/// `‖H w‖²` for a row-major `n_rx × n_tx` matrix.
pub fn received_power(h: &[Complex64], w: &[Complex64]) -> f64 {
    let n_tx = w.len();
    h.chunks_exact(n_tx)
        .map(|row| row.iter().zip(w).map(|(a, b)| a * b).sum::<Complex64>().norm_sqr())
        .sum()
}

/// `I + (1/σ²) Σ_{i ∈ others} H_iᴴ H_i`.
fn leakage_matrix(h: &ChannelTensor, subband: usize, others: &[usize], noise_var: f64) -> Vec<Complex64> {
    let n = h.n_tx;
    let mut a = vec![Complex64::new(0.0, 0.0); n * n];
    for d in 0..n {
        a[d * n + d] = Complex64::new(1.0, 0.0);
    }
    for &i in others {
        let hi = h.matrix(i, subband);
        for row in hi.chunks_exact(n) {
            for p in 0..n {
                for q in 0..n {
                    a[p * n + q] += row[p].conj() * row[q] / noise_var;
                }
            }
        }
    }
    a
}

/// SLNR precoder of `user` on `subband` against co-scheduled `co_users`
/// (`user` itself is skipped if present):
/// `w ∝ (I + (1/σ²) Σ_{i≠k} H_iᴴ H_i)⁻¹ H_kᴴ`, normalised to unit norm.
///
/// With one receive antenna this is the closed form; with several it is the
/// dominant generalised eigenvector, found by power iteration. A user with an
/// all-zero channel gets the first unit vector.
pub fn slnr_precoder(
    h: &ChannelTensor,
    user: usize,
    subband: usize,
    co_users: &[usize],
    noise_var: f64,
) -> Vec<Complex64> {
    let n = h.n_tx;
    let others: Vec<usize> = co_users.iter().copied().filter(|&i| i != user).collect();
    let a = leakage_matrix(h, subband, &others, noise_var);
    let hk = h.matrix(user, subband);

    let mut w: Vec<Complex64> = if h.n_rx == 1 {
        let rhs: Vec<Complex64> = hk.iter().map(|c| c.conj()).collect();
        solve_hpd(&a, &rhs, n).unwrap_or(rhs)
    } else {
        // B = H_kᴴ H_k, iterate v ← A⁻¹ B v
        let mut b = vec![Complex64::new(0.0, 0.0); n * n];
        for row in hk.chunks_exact(n) {
            for p in 0..n {
                for q in 0..n {
                    b[p * n + q] += row[p].conj() * row[q];
                }
            }
        }
        let mut v: Vec<Complex64> = (0..n)
            .map(|t| hk.chunks_exact(n).map(|row| row[t].conj()).sum())
            .collect();
        if !normalize(&mut v) {
            v = vec![Complex64::new(1.0, 0.0); n];
            normalize(&mut v);
        }
        for _ in 0..64 {
            let bv = mat_vec(&b, &v, n);
            let next = solve_hpd(&a, &bv, n).unwrap_or(bv);
            v = next;
            if !normalize(&mut v) {
                break;
            }
        }
        v
    };
    if !normalize(&mut w) {
        w = vec![Complex64::new(0.0, 0.0); n];
        w[0] = Complex64::new(1.0, 0.0);
    }
    w
}

fn check_shape(h: &ChannelTensor, alloc: &Allocation) -> Result<()> {
    if alloc.n_user() != h.n_user || alloc.n_subband() != h.n_subband {
        return Err(Error::Allocation(format!(
            "allocation {}x{} does not match channel {}x{}",
            alloc.n_user(),
            alloc.n_subband(),
            h.n_user,
            h.n_subband
        )));
    }
    Ok(())
}

/// Precoders for every scheduled `(k, j)`, the leakage sum running over the
/// users co-scheduled on subband `j` only.
pub fn compute_precoders(h: &ChannelTensor, alloc: &Allocation, noise_var: f64) -> Result<PrecoderSet> {
    check_shape(h, alloc)?;
    if !(noise_var > 0.0) {
        return Err(Error::config("noise variance must be positive"));
    }
    let mut set = PrecoderSet::new(h.n_user, h.n_subband, h.n_tx);
    for j in 0..h.n_subband {
        let users = alloc.users_on(j);
        for &k in &users {
            let w = slnr_precoder(h, k, j, &users, noise_var);
            set.set(k, j, &w);
        }
    }
    Ok(set)
}

/// SINR per `(user, subband)`, zero where the user is not scheduled.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrGrid {
    pub n_user: usize,
    pub n_subband: usize,
    pub values: Vec<f64>,
}

impl SinrGrid {
    pub fn get(&self, user: usize, subband: usize) -> f64 {
        self.values[user * self.n_subband + subband]
    }

    /// Values over the user's allocated subbands, in subband order.
    pub fn user_values(&self, user: usize, alloc: &Allocation) -> Vec<f64> {
        alloc.subbands_of(user).into_iter().map(|j| self.get(user, j)).collect()
    }
}

/// `SINR_{k,j} = ‖H_{k,j} w_{k,j}‖² / (σ² + Σ_{i≠k} ‖H_{k,j} w_{i,j}‖²)`, the
/// interference sum running over users co-scheduled on `j`.
pub fn compute_sinr(
    h: &ChannelTensor,
    precoders: &PrecoderSet,
    alloc: &Allocation,
    noise_var: f64,
) -> Result<SinrGrid> {
    check_shape(h, alloc)?;
    let mut values = vec![0.0; h.n_user * h.n_subband];
    for j in 0..h.n_subband {
        let users = alloc.users_on(j);
        for &k in &users {
            let hk = h.matrix(k, j);
            let wk = precoders
                .get(k, j)
                .ok_or_else(|| Error::Allocation(format!("no precoder for user {k} on subband {j}")))?;
            let signal = received_power(hk, wk);
            let interference: f64 = users
                .iter()
                .filter(|&&i| i != k)
                .map(|&i| {
                    let wi = precoders.get(i, j).expect("precoder defined for co-scheduled user");
                    received_power(hk, wi)
                })
                .sum();
            values[k * h.n_subband + j] = signal / (noise_var + interference);
        }
    }
    Ok(SinrGrid {
        n_user: h.n_user,
        n_subband: h.n_subband,
        values,
    })
}

/// SINRs of `users` co-scheduled on one subband, in the order given, with
/// SLNR precoders computed against each other.
pub fn subband_sinrs(h: &ChannelTensor, subband: usize, users: &[usize], noise_var: f64) -> Vec<f64> {
    let precoders: Vec<Vec<Complex64>> = users
        .iter()
        .map(|&k| slnr_precoder(h, k, subband, users, noise_var))
        .collect();
    users
        .iter()
        .enumerate()
        .map(|(a, &k)| {
            let hk = h.matrix(k, subband);
            let interference: f64 = precoders
                .iter()
                .enumerate()
                .filter(|&(b, _)| b != a)
                .map(|(_, w)| received_power(hk, w))
                .sum();
            received_power(hk, &precoders[a]) / (noise_var + interference)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn two_user_channel(h1: [Complex64; 2], h2: [Complex64; 2]) -> ChannelTensor {
        let mut h = ChannelTensor::zeros(2, 1, 1, 2);
        h.matrix_mut(0, 0).copy_from_slice(&h1);
        h.matrix_mut(1, 0).copy_from_slice(&h2);
        h
    }

    #[test]
    fn single_user_matched_filter() {
        let h = two_user_channel([c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]);
        let mut alloc = Allocation::empty(2, 1);
        alloc.set(0, 0, true);
        let p = compute_precoders(&h, &alloc, 1.0).unwrap();
        let w = p.get(0, 0).unwrap();
        assert!((w[0] - c(1.0, 0.0)).norm() < 1e-12 && w[1].norm() < 1e-12);
        assert!(p.get(1, 0).is_none());
        let s = compute_sinr(&h, &p, &alloc, 1.0).unwrap();
        assert!((s.get(0, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_pair_keeps_directions() {
        let h = two_user_channel([c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]);
        let mut alloc = Allocation::empty(2, 1);
        alloc.set(0, 0, true);
        alloc.set(1, 0, true);
        let sigma2 = 0.5;
        let p = compute_precoders(&h, &alloc, sigma2).unwrap();
        assert!((p.get(0, 0).unwrap()[0] - c(1.0, 0.0)).norm() < 1e-12);
        assert!((p.get(1, 0).unwrap()[1] - c(1.0, 0.0)).norm() < 1e-12);
        let s = compute_sinr(&h, &p, &alloc, sigma2).unwrap();
        assert!((s.get(0, 0) - 2.0).abs() < 1e-12);
        assert!((s.get(1, 0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn identical_channels_lose_to_single_user() {
        let hv = [c(0.8, 0.3), c(-0.2, 0.9)];
        let h = two_user_channel(hv, hv);
        let mut single = Allocation::empty(2, 1);
        single.set(0, 0, true);
        let mut pair = single.clone();
        pair.set(1, 0, true);
        let s1 = compute_sinr(&h, &compute_precoders(&h, &single, 1.0).unwrap(), &single, 1.0).unwrap();
        let s2 = compute_sinr(&h, &compute_precoders(&h, &pair, 1.0).unwrap(), &pair, 1.0).unwrap();
        assert!(s2.get(0, 0) < s1.get(0, 0));
    }

    #[test]
    fn multi_rx_precoder_is_unit_norm() {
        let mut h = ChannelTensor::zeros(2, 1, 2, 3);
        for (i, x) in h.data.iter_mut().enumerate() {
            *x = c((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos());
        }
        let w = slnr_precoder(&h, 0, 0, &[0, 1], 1.0);
        let n: f64 = w.iter().map(|x| x.norm_sqr()).sum();
        assert!((n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_mismatched_allocation() {
        let h = ChannelTensor::zeros(2, 1, 1, 2);
        assert!(compute_precoders(&h, &Allocation::empty(3, 1), 1.0).is_err());
    }
}
