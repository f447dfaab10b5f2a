//! Quantifying feature competition in supervised learning and its absence in
//! adversarial training.
//!
//! The crate has four layers:
//!
//! * [`info`] — exact entropy / mutual-information / conditional-MI over small
//!   dense joint distributions, plus a plug-in estimator for sampled features.
//! * [`competition`] — the analytic two-digit corruption task: the joint
//!   distribution induced by `(rho_l, rho_r)` and the learning-signal surface
//!   `I(Y_l; X_r | X_l)`.
//! * [`data`] / [`nn`] — a synthetic two-digit dataset generator (MNIST IDX or
//!   procedural glyphs) and a small reverse-mode training engine (twin-MLP
//!   encoder, logistic probe, autoencoder, GAN, WGAN).
//! * [`gansim`] — a discrete simulator of discriminator/generator incentives:
//!   confusion states, motivation bounds, lead scenarios, and balancing
//!   policies over abstract feature distributions.
//!
//! [`cli`] ties these together into reproducible, seeded experiment commands.
//!
//! With the default `parallel` feature, grid sweeps, fuzz batches, and large
//! matrix products fan out over rayon; results are bit-identical to the
//! sequential fallback because every work item owns its RNG stream and no
//! reduction order changes.

pub mod cli;
pub mod competition;
pub mod data;
pub mod gansim;
pub mod info;
pub mod nn;
pub mod par;
pub mod seed;
