//! Reference classifiers for reduced datasets: a gain-ratio decision tree
//! and a one-hidden-layer feed-forward network.

mod info;
mod mlp;
mod tree;

pub use info::{entropy, gain_ratio, split_score, SplitScore};
pub use mlp::{predict_mlp, softmax_rows, train_mlp, MlpConfig, MlpModel};
pub use tree::{predict_tree, train_tree, Node, TreeConfig, TreeModel};
