//! Linear SVMs and per-band one-vs-all ensembles fused by majority vote.

mod ensemble;
mod svm;

pub use ensemble::{majority_vote, tally_votes, train_band_ensemble, BandEnsemble, Vote};
pub use svm::{train_svm, train_svm_detailed, LinearSvm, SvmTrainConfig, SvmTraining};
