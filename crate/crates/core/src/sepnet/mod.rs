//! Toy two-speaker time-domain separator built from gated attention blocks.

pub mod data;
pub mod io;
pub mod metrics;
mod model;
pub mod train;

pub use data::{synth_dataset, synth_mixture, MixtureSample};
pub use metrics::{pit_loss, si_snr, si_snr_improvement, si_snr_uncapped, Permutation, SI_SNR_CAP};
pub use model::{SepNet, SepNetConfig, SPEAKERS};
pub use train::{evaluate, grad_check_loss, loss_and_grads, train, train_toy, TrainOptions};
