//! A small feed-forward network library: convolution, max pooling, dense
//! layers, softmax cross-entropy and minibatch SGD, all in `f64`.

mod io;
mod network;
mod tensor;
mod train;

pub use io::{read_network, write_network, MODEL_MAGIC};
pub use network::{softmax, Activation, LayerSpec, Network, NetworkSpec};
pub use tensor::Tensor;
pub(crate) use tensor::argmax;
pub use train::{gradient_check, train_supervised, TrainConfig, GRADIENT_CHECK_STEP};

#[derive(Debug, thiserror::Error)]
pub enum NeuralError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("loss became non-finite in epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("label {0} is outside the output range")]
    LabelOutOfRange(usize),
    #[error("training requires a softmax output layer")]
    NotClassifier,
    #[error("malformed model file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
