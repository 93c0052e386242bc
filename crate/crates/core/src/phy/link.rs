use super::mi::MiBlepModel;
use super::tbs::TbsTable;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkAdaptation {
    /// 0 when no entry meets the target.
    pub tbs_bits: u64,
    pub mcs: Option<usize>,
    /// BLEP predicted from the SINRs link adaptation was given.
    pub predicted_blep: f64,
}

impl LinkAdaptation {
    pub const NONE: LinkAdaptation = LinkAdaptation {
        tbs_bits: 0,
        mcs: None,
        predicted_blep: 1.0,
    };
}

/// Arithmetic mean over allocated subbands of the per-subband MI for `mcs`.
pub fn mean_mutual_information(sinrs: &[f64], mcs: usize, table: &TbsTable, model: &MiBlepModel) -> f64 {
    assert!(!sinrs.is_empty(), "mean MI over an empty allocation");
    let order = table.modulation_order(mcs);
    sinrs.iter().map(|&s| model.mi(s, order)).sum::<f64>() / sinrs.len() as f64
}

/// Block error probability of a `tbs_bits` block on `size` subbands at the
/// given mean MI.
pub fn blep(mean_mi: f64, tbs_bits: u64, size: usize, table: &TbsTable, model: &MiBlepModel) -> f64 {
    model.blep_from_threshold(mean_mi, model.threshold(tbs_bits, size, table))
}

/// Largest TBS for `sinrs.len()` subbands whose predicted BLEP is below
/// `target`; ties go to the lowest MCS index.
pub fn link_adapt(sinrs: &[f64], table: &TbsTable, model: &MiBlepModel, target: f64) -> LinkAdaptation {
    let size = sinrs.len();
    if size == 0 {
        return LinkAdaptation::NONE;
    }
    // MI only depends on the modulation order: evaluate once per order
    let mut mi_by_order = [f64::NAN; 7];
    let mut best = LinkAdaptation::NONE;
    for mcs in 0..table.n_mcs() {
        let order = table.modulation_order(mcs) as usize;
        if mi_by_order[order].is_nan() {
            mi_by_order[order] = mean_mutual_information(sinrs, mcs, table, model);
        }
        let tbs = table.tbs(size, mcs);
        let p = blep(mi_by_order[order], tbs, size, table, model);
        if p < target && tbs > best.tbs_bits {
            best = LinkAdaptation {
                tbs_bits: tbs,
                mcs: Some(mcs),
                predicted_blep: p,
            };
        }
    }
    best
}

/// `R = (1 − BLEP) · min(TBS, N_bits) / T_TTI`.
pub fn user_rate(tbs_bits: u64, blep: f64, n_bits: u64, tti_s: f64) -> f64 {
    (1.0 - blep) * tbs_bits.min(n_bits) as f64 / tti_s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy::TbsConfig;

    fn table() -> TbsTable {
        TbsTable::synthetic(&TbsConfig::default(), 672, 10).unwrap()
    }

    #[test]
    fn rate_examples() {
        assert!((user_rate(1000, 0.1, 500, 1e-3) - 450_000.0).abs() < 1e-6);
        assert_eq!(user_rate(1000, 1.0, 500, 1e-3), 0.0);
        assert_eq!(user_rate(1000, 0.0, 0, 1e-3), 0.0);
    }

    #[test]
    fn mean_mi_anchors() {
        let (t, m) = (table(), MiBlepModel::default());
        let top = t.n_mcs() - 1;
        assert_eq!(mean_mutual_information(&[0.0, 0.0], top, &t, &m), 0.0);
        assert_eq!(mean_mutual_information(&[f64::INFINITY], top, &t, &m), 6.0);
        assert_eq!(mean_mutual_information(&[0.0, f64::INFINITY], top, &t, &m), 3.0);
    }

    #[test]
    fn adapt_extremes() {
        let (t, m) = (table(), MiBlepModel::default());
        assert_eq!(link_adapt(&[0.0; 3], &t, &m, 0.1).tbs_bits, 0);
        let best = link_adapt(&[1e9; 4], &t, &m, 0.1);
        assert_eq!(best.tbs_bits, t.tbs(4, t.n_mcs() - 1));
        assert_eq!(best.mcs, Some(t.n_mcs() - 1));
    }

    #[test]
    fn blep_nondecreasing_in_tbs() {
        let (t, m) = (table(), MiBlepModel::default());
        for size in 1..=4 {
            let mi = 2.3;
            let mut prev = 0.0;
            for mcs in 0..t.n_mcs() {
                let p = blep(mi, t.tbs(size, mcs), size, &t, &m);
                assert!((0.0..=1.0).contains(&p));
                assert!(p >= prev);
                prev = p;
            }
        }
    }
}
