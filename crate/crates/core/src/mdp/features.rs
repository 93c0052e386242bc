use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use super::episode::EpisodeState;
use crate::error::{Error, Result};
use crate::linalg::{inner, norm_sqr};
use crate::radio::EnvironmentState;
use crate::tensor::Matrix;

/// Per-token features before the pairwise block: assigned flag, current
/// subband flag, buffer, average rate, own channel power.
pub const SCALAR_FEATURES: usize = 5;

/// Normalisation constants for the scalar token features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    /// Average-rate feature is `(log10 R̄_k − rate_log10_offset) / rate_log10_scale`.
    pub rate_log10_offset: f64,
    pub rate_log10_scale: f64,
    /// Power feature is `(10·log10(‖H_{k,j}‖²/σ²) − snr_offset_db) / snr_scale_db`.
    pub snr_offset_db: f64,
    pub snr_scale_db: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            rate_log10_offset: 7.0,
            rate_log10_scale: 1.0,
            snr_offset_db: 15.0,
            snr_scale_db: 15.0,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rate_log10_scale > 0.0 && self.snr_scale_db > 0.0) {
            return Err(Error::config("features: scales must be positive"));
        }
        if !(self.rate_log10_offset.is_finite() && self.snr_offset_db.is_finite()) {
            return Err(Error::config("features: offsets must be finite"));
        }
        Ok(())
    }
}

/// `(|⟨a,b⟩|/(‖a‖‖b‖), Θ_H, φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairFeatures {
    pub magnitude: f64,
    /// Hermitian angle `arccos |⟨a,b⟩|/(‖a‖‖b‖)`, in `[0, π/2]`.
    pub hermitian_angle: f64,
    /// Kasner pseudo angle `arg ⟨a,b⟩`, in `(−π, π]`.
    pub pseudo_angle: f64,
}

impl PairFeatures {
    /// Convention for a zero vector or a vanishing inner product.
    pub const ORTHOGONAL: PairFeatures = PairFeatures {
        magnitude: 0.0,
        hermitian_angle: FRAC_PI_2,
        pseudo_angle: 0.0,
    };
}

/// Pairwise features with `⟨a, b⟩ = Σ aᵢ·conj(bᵢ)`.
///
/// A zero vector gives [`PairFeatures::ORTHOGONAL`]; so does an inner product
/// below `1e-12·‖a‖‖b‖`, which pins `φ = 0` for orthogonal pairs.
pub fn pairwise_channel_features(a: &[Complex64], b: &[Complex64]) -> PairFeatures {
    let scale = (norm_sqr(a) * norm_sqr(b)).sqrt();
    if !(scale > 0.0) {
        return PairFeatures::ORTHOGONAL;
    }
    let z = inner(a, b);
    let mag = z.norm() / scale;
    if mag < 1e-12 {
        return PairFeatures::ORTHOGONAL;
    }
    let mag = mag.min(1.0);
    let mut phase = z.arg();
    if phase <= -std::f64::consts::PI {
        phase = std::f64::consts::PI;
    }
    PairFeatures {
        magnitude: mag,
        hermitian_angle: mag.acos(),
        pseudo_angle: phase,
    }
}

/// Token grid flattened to `(N_user·N_subband) × F`, token `k·N_subband + j`.
///
/// Feature layout: `[assigned, current subband, buffer, average rate, power,
/// (|dot|, Θ_H, φ) for every user i]`, so `F = 5 + 3·N_user` and the self
/// pair is `(1, 0, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTensor {
    pub n_user: usize,
    pub n_subband: usize,
    pub tokens: Matrix,
}

impl FeatureTensor {
    pub fn n_features(&self) -> usize {
        self.tokens.cols
    }

    pub fn token(&self, user: usize, subband: usize) -> &[f64] {
        self.tokens.row(user * self.n_subband + subband)
    }
}

pub fn feature_width(n_user: usize) -> usize {
    SCALAR_FEATURES + 3 * n_user
}

/// Encodes many states of one environment; the state-independent part is
/// computed once.
#[derive(Debug, Clone)]
pub struct FeatureEncoder {
    n_user: usize,
    n_subband: usize,
    base: Matrix,
}

impl FeatureEncoder {
    /// Reads `h_est`, buffers and average rates only.
    pub fn new(env: &EnvironmentState, cfg: &FeatureConfig) -> Self {
        let (n_user, n_subband) = (env.n_user(), env.n_subband());
        let width = feature_width(n_user);
        let mut base = Matrix::zeros(n_user * n_subband, width);
        let sentinel_log = (1.0 + env.full_buffer_bits as f64).log2().max(1.0);
        for k in 0..n_user {
            let buffer = (1.0 + env.buffers.n_bits[k] as f64).log2() / sentinel_log;
            let rate = (env.avg_rates[k].log10() - cfg.rate_log10_offset) / cfg.rate_log10_scale;
            for j in 0..n_subband {
                let row = base.row_mut(k * n_subband + j);
                row[2] = buffer;
                row[3] = rate;
                let snr = env.h_est.subband_norm_sqr(k, j) / env.noise_variance;
                let snr_db = 10.0 * snr.max(1e-10).log10();
                row[4] = (snr_db - cfg.snr_offset_db) / cfg.snr_scale_db;
                let h_k = env.h_est.matrix(k, j);
                for i in 0..n_user {
                    let f = if i == k {
                        PairFeatures {
                            magnitude: 1.0,
                            hermitian_angle: 0.0,
                            pseudo_angle: 0.0,
                        }
                    } else {
                        pairwise_channel_features(h_k, env.h_est.matrix(i, j))
                    };
                    let o = SCALAR_FEATURES + 3 * i;
                    row[o] = f.magnitude;
                    row[o + 1] = f.hermitian_angle;
                    row[o + 2] = f.pseudo_angle;
                }
            }
        }
        Self { n_user, n_subband, base }
    }

    pub fn n_features(&self) -> usize {
        self.base.cols
    }

    pub fn encode(&self, state: &EpisodeState) -> FeatureTensor {
        let mut tokens = self.base.clone();
        self.write_dynamic(state, &mut tokens);
        FeatureTensor {
            n_user: self.n_user,
            n_subband: self.n_subband,
            tokens,
        }
    }

    fn write_dynamic(&self, state: &EpisodeState, tokens: &mut Matrix) {
        debug_assert_eq!(state.allocation.n_user(), self.n_user);
        for k in 0..self.n_user {
            for j in 0..self.n_subband {
                let row = tokens.row_mut(k * self.n_subband + j);
                row[0] = if state.allocation.get(k, j) { 1.0 } else { 0.0 };
                row[1] = if j == state.next_subband { 1.0 } else { 0.0 };
            }
        }
    }
}

/// One-shot convenience wrapper around [`FeatureEncoder`].
pub fn encode_features(env: &EnvironmentState, state: &EpisodeState, cfg: &FeatureConfig) -> FeatureTensor {
    FeatureEncoder::new(env, cfg).encode(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::ActionTable;
    use crate::radio::{sample_environment, EnvironmentConfig, ImpairmentConfig};
    use crate::rng::stream;
    use num_complex::Complex64 as C;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn env(seed: u64, snr_ce_db: Option<f64>) -> EnvironmentState {
        let cfg = EnvironmentConfig {
            impairments: ImpairmentConfig {
                snr_ce_db,
                ..ImpairmentConfig::default()
            },
            ..EnvironmentConfig::default()
        };
        sample_environment(&cfg, 1 << 20, &mut stream(seed, &[])).unwrap()
    }

    fn close(a: PairFeatures, b: (f64, f64, f64)) -> bool {
        (a.magnitude - b.0).abs() < 1e-12 && (a.hermitian_angle - b.1).abs() < 1e-7 && (a.pseudo_angle - b.2).abs() < 1e-12
    }

    #[test]
    fn pair_examples() {
        let a = [C::new(0.3, -1.2), C::new(2.0, 0.5)];
        assert!(close(pairwise_channel_features(&a, &a), (1.0, 0.0, 0.0)));
        let x = [C::new(1.0, 0.0), C::new(0.0, 0.0)];
        let y = [C::new(0.0, 0.0), C::new(0.0, 2.0)];
        assert!(close(pairwise_channel_features(&x, &y), (0.0, FRAC_PI_2, 0.0)));
        let f = pairwise_channel_features(&[C::new(1.0, 0.0)], &[C::new(0.0, 1.0)]);
        assert!(close(f, (1.0, 0.0, -FRAC_PI_2)));
        assert_eq!(pairwise_channel_features(&[C::new(0.0, 0.0)], &a[..1]), PairFeatures::ORTHOGONAL);
    }

    proptest! {
        #[test]
        fn pair_ranges(re in proptest::collection::vec(-5.0f64..5.0, 8)) {
            let a = [C::new(re[0], re[1]), C::new(re[2], re[3])];
            let b = [C::new(re[4], re[5]), C::new(re[6], re[7])];
            let f = pairwise_channel_features(&a, &b);
            prop_assert!((0.0..=1.0).contains(&f.magnitude));
            prop_assert!((0.0..=FRAC_PI_2 + 1e-12).contains(&f.hermitian_angle));
            prop_assert!(f.pseudo_angle > -PI && f.pseudo_angle <= PI);
            // swapping the arguments conjugates the inner product
            let g = pairwise_channel_features(&b, &a);
            prop_assert!((f.magnitude - g.magnitude).abs() < 1e-12);
            if f.magnitude > 1e-9 && f.pseudo_angle.abs() < PI - 1e-9 {
                prop_assert!((f.pseudo_angle + g.pseudo_angle).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn root_has_no_assignments() {
        let e = env(1, None);
        let f = encode_features(&e, &EpisodeState::root(4, 10), &FeatureConfig::default());
        assert_eq!(f.n_features(), 17);
        assert_eq!(f.tokens.rows, 40);
        assert!(f.tokens.is_finite());
        for t in 0..40 {
            assert_eq!(f.tokens.get(t, 0), 0.0);
            assert_eq!(f.tokens.get(t, 1), if t % 10 == 0 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn assignment_plane_tracks_state() {
        let e = env(2, None);
        let table = ActionTable::new(4, 2).unwrap();
        let s = EpisodeState::root(4, 10).step(table.index_of(&[1, 3]).unwrap(), &table).unwrap();
        let f = encode_features(&e, &s, &FeatureConfig::default());
        assert_eq!(f.token(1, 0)[0], 1.0);
        assert_eq!(f.token(3, 0)[0], 1.0);
        assert_eq!(f.token(0, 0)[0], 0.0);
        assert_eq!(f.token(2, 1)[1], 1.0);
        assert_eq!(f.token(2, 0)[1], 0.0);
    }

    #[test]
    fn identical_channels_give_unit_pair() {
        let mut e = env(3, None);
        let copy = e.h_est.matrix(0, 4).to_vec();
        e.h_est.matrix_mut(2, 4).copy_from_slice(&copy);
        let f = encode_features(&e, &EpisodeState::root(4, 10), &FeatureConfig::default());
        let o = SCALAR_FEATURES + 3 * 2;
        assert!((f.token(0, 4)[o] - 1.0).abs() < 1e-12);
        assert!(f.token(0, 4)[o + 1].abs() < 1e-6);
        assert!(f.token(0, 4)[o + 2].abs() < 1e-12);
        for k in 0..4 {
            let s = SCALAR_FEATURES + 3 * k;
            assert_eq!(&f.token(k, 7)[s..s + 3], &[1.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn ignores_true_channel() {
        let mut e = env(4, Some(5.0));
        let s = EpisodeState::root(4, 10);
        let before = encode_features(&e, &s, &FeatureConfig::default());
        for v in e.h_true.data.iter_mut() {
            *v = *v * C::new(0.3, 2.0) + C::new(1.0, -1.0);
        }
        assert_eq!(encode_features(&e, &s, &FeatureConfig::default()), before);
    }

    #[test]
    fn user_permutation_permutes_tokens_and_pairs() {
        let e = env(5, Some(10.0));
        let table = ActionTable::new(4, 2).unwrap();
        let s = EpisodeState::root(4, 10)
            .step(table.index_of(&[0, 2]).unwrap(), &table)
            .unwrap()
            .step(table.index_of(&[1]).unwrap(), &table)
            .unwrap();
        let perm = [2usize, 0, 3, 1]; // new user p ← old user perm[p]
        let mut pe = e.clone();
        let mut ps = s.clone();
        for p in 0..4 {
            let old = perm[p];
            pe.h_est.user_mut(p).copy_from_slice(e.h_est.user(old));
            pe.buffers.n_bits[p] = e.buffers.n_bits[old];
            pe.avg_rates[p] = e.avg_rates[old];
            for j in 0..10 {
                ps.allocation.set(p, j, s.allocation.get(old, j));
            }
        }
        let cfg = FeatureConfig::default();
        let f = encode_features(&e, &s, &cfg);
        let g = encode_features(&pe, &ps, &cfg);
        for p in 0..4 {
            for j in 0..10 {
                let (new, old) = (g.token(p, j), f.token(perm[p], j));
                assert_eq!(&new[..SCALAR_FEATURES], &old[..SCALAR_FEATURES]);
                for q in 0..4 {
                    let (a, b) = (SCALAR_FEATURES + 3 * q, SCALAR_FEATURES + 3 * perm[q]);
                    assert_eq!(&new[a..a + 3], &old[b..b + 3]);
                }
            }
        }
    }
}
