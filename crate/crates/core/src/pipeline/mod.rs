//! End-to-end driver: GAP ingestion, cross-validated training, fold-averaged
//! prediction, scoring and the hyperparameter ablation.

mod ablation;
mod config;
mod dataset;
mod gap;
mod model;
mod predict;
mod synth;
mod train;

pub use ablation::{ablation_grid, ablation_table, ablation_tsv, run_ablation, AblationCell, AblationRow, DEFAULT_SIZES};
pub use config::TrainConfig;
pub use dataset::{ingest_gap, Dataset};
pub use gap::{read_gap_tsv, write_gap_tsv};
pub use model::{batch_loss_on_tape, features_on_tape, model_grad_check, Model, Sampling};
pub use predict::{
    average_predictions, load_ensemble, predict_ensemble, read_predictions, save_ensemble, score_predictions,
    write_predictions, FoldSummary, ModelManifest, Prediction,
};
pub use synth::{signal_for, synth_corpus, synth_dataset, tiny_dataset, SynthCorpus};
pub use train::{cross_validate, kfold_split, labels_of, make_batches, train_fold, CvResult, EpochLog, FoldResult};
