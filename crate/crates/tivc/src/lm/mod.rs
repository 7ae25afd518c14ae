//! Conditional codec language models: an autoregressive model for first-stage
//! codes and a non-autoregressive model for the residual stages, both built
//! on the same hand-rolled encoder-decoder transformer.

pub mod checkpoint;
pub mod model;
pub mod ops;
pub mod sample;
pub mod store;
pub mod train;

pub use checkpoint::{init_from, Checkpoint, InitMode};
pub use model::{Head, ModelKind, SeqModel};
pub use sample::{sample_convert, SampleOutcome};
pub use train::{
    build_default_vocab, load_code_pairs, masked_accuracy, text_corpus, train, CodePair, Task,
    TrainData, TrainReport,
};
