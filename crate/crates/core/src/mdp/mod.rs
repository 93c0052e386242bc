//! The scheduling episode as a tree: one decision per subband, each decision
//! an unordered set of at most `M` users.

mod actions;
mod episode;
mod features;

pub use actions::{binomial, ActionTable};
pub use episode::EpisodeState;
pub use features::{
    encode_features, feature_width, pairwise_channel_features, FeatureConfig, FeatureEncoder, FeatureTensor, PairFeatures,
    SCALAR_FEATURES,
};
