use rand::Rng;

use super::config::GeometryConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserPosition {
    /// Ground distance from the base station.
    pub distance_m: f64,
    /// Azimuth relative to the array boresight, radians.
    pub azimuth_rad: f64,
}

impl UserPosition {
    /// Distance including the antenna height difference.
    pub fn distance_3d(&self, geometry: &GeometryConfig) -> f64 {
        let dh = geometry.bs_height_m - geometry.user_height_m;
        (self.distance_m * self.distance_m + dh * dh).sqrt()
    }
}

/// Drops `n_user` users uniformly over the sector annulus
/// `min_distance_m ≤ d ≤ cell_radius_m`, `|azimuth| ≤ α/2`.
///
/// Area-uniform sampling makes `d²` uniform on `[d_min², R²]`. Per user the
/// draws are: `d²`, then azimuth.
pub fn sample_geometry<R: Rng + ?Sized>(
    config: &GeometryConfig,
    n_user: usize,
    rng: &mut R,
) -> Vec<UserPosition> {
    let r_min2 = config.min_distance_m * config.min_distance_m;
    let r_max2 = config.cell_radius_m * config.cell_radius_m;
    let half = config.sector_angle_deg.to_radians() / 2.0;
    (0..n_user)
        .map(|_| {
            let u: f64 = rng.random();
            let d = (r_min2 + u * (r_max2 - r_min2))
                .sqrt()
                .clamp(config.min_distance_m, config.cell_radius_m);
            let v: f64 = rng.random();
            let azimuth_rad = -half + v * 2.0 * half;
            UserPosition {
                distance_m: d,
                azimuth_rad,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn azimuth_within_sector() {
        let cfg = GeometryConfig::default();
        let mut rng = stream(3, &[]);
        let half = 32.5f64.to_radians();
        for p in sample_geometry(&cfg, 10_000, &mut rng) {
            assert!(p.azimuth_rad >= -half && p.azimuth_rad <= half);
            assert!(p.distance_m >= 35.0 && p.distance_m <= 500.0);
        }
    }

    #[test]
    fn degenerate_radius() {
        let cfg = GeometryConfig {
            min_distance_m: 500.0,
            ..GeometryConfig::default()
        };
        let mut rng = stream(4, &[]);
        for p in sample_geometry(&cfg, 100, &mut rng) {
            assert_eq!(p.distance_m, 500.0);
        }
    }

    #[test]
    fn squared_distance_passes_ks_against_uniform() {
        let cfg = GeometryConfig::default();
        let mut rng = stream(5, &[]);
        let n = 100_000;
        let (lo, hi) = (35.0f64 * 35.0, 500.0f64 * 500.0);
        let mut u: Vec<f64> = sample_geometry(&cfg, n, &mut rng)
            .iter()
            .map(|p| (p.distance_m * p.distance_m - lo) / (hi - lo))
            .collect();
        u.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let d = u
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let lo_gap = x - i as f64 / n as f64;
                let hi_gap = (i + 1) as f64 / n as f64 - x;
                lo_gap.max(hi_gap)
            })
            .fold(0.0, f64::max);
        // Kolmogorov critical value at the 1% level.
        let crit = 1.6276 / (n as f64).sqrt();
        assert!(d < crit, "KS statistic {d} >= {crit}");
    }
}
