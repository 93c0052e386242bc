//! Decision evaluation: SLNR precoding, SINR, MI-based link adaptation and
//! BLEP, user rates, proportional-fair utilities and the scalar reward.

mod evaluate;
mod link;
mod mi;
mod precoder;
mod tbs;

pub use evaluate::{evaluate_decision, DecisionOutcome, LinkModel, LinkResult, PhyConfig};
pub use link::{blep, link_adapt, mean_mutual_information, user_rate, LinkAdaptation};
pub use mi::{MiBlepConfig, MiBlepModel};
pub use precoder::{compute_precoders, compute_sinr, received_power, slnr_precoder, subband_sinrs, PrecoderSet, SinrGrid};
pub use tbs::{modulation_order, TbsConfig, TbsTable};
