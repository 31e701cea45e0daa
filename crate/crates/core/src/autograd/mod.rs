//! Reverse-mode differentiation for the fixed 1-D convolutional graph:
//! layers, activations, losses, gradient reversal, RMSprop and initializers.

pub mod activation;
pub mod conv;
pub mod feature_map;
pub mod init;
pub mod loss;
pub mod optim;
pub mod reversal;

pub use activation::{leaky_relu, sigmoid, softmax_over_channels, Activation, LEAKY_SLOPE};
pub use conv::{conv1d_backward, conv1d_forward, conv1d_forward_traced, ConvGrads, ConvLayer, ConvTrace, ParamGrads};
pub use feature_map::FeatureMap;
pub use init::{init_he, init_he_seeded, init_xavier, init_xavier_seeded};
pub use loss::{binary_cross_entropy, cross_entropy, softmax_cross_entropy_logit_grad, LossValue, PROB_FLOOR};
pub use optim::{rmsprop_step, OptimizerState};
pub use reversal::{gradient_reversal, GradientReversal};
