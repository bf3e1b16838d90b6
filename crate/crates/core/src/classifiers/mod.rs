//! Sequence chunking and the two chunk classifiers: a one-vs-rest linear SVM over
//! flattened chunks and a tanh RNN over the frame sequence.

mod chunk;
mod evaluate;
mod persist;
mod rnn;
mod standardize;
mod svm;

pub use chunk::{chunk_sequence, ChunkSet};
pub use evaluate::{aggregate, evaluate, Aggregation, ChunkClassifier, EvalReport, RnnClassifier};
pub use persist::{load_model, model_from_bytes, model_to_bytes, save_model, Model, MODEL_MAGIC};
pub use rnn::{
    mean_loss, rnn_forward, rnn_gradient_check, rnn_gradient_check_detailed, rnn_init, rnn_loss_and_grad,
    rnn_train, softmax, GradCheck, RnnGrads, RnnModel, RnnTrainConfig, GRAD_CHECK_STEP, INIT_RANGE,
};
pub use standardize::Standardizer;
pub use svm::{argmax, svm_predict, svm_train, LinearModel, SvmConfig, SvmTrace};
