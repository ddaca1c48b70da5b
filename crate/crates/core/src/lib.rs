//! Statistical similarity as a learnable quantity.
//!
//! The central object is the pairwise same-class probability
//! `S(x, x') = Σ_ω P(ω|x) P(ω|x')`: the probability that two feature vectors
//! belong to the same class. This crate provides
//!
//! - [`similarity`]: the exact form of `S` over known posteriors, a learned
//!   form backed by a pair-input perceptron, a Euclidean baseline, and a
//!   quadratic-form (adaptive metric) decision rule, all behind one
//!   [`similarity::SimilarityModel`] interface;
//! - [`mlp`]: a small multi-layer perceptron trained by per-sample gradient
//!   descent under a least-squares criterion, used as the trainable model of
//!   pairwise posterior probability;
//! - [`knn`]: nearest-prototype classification with error-driven prototype
//!   selection, parameterized over any similarity model;
//! - [`features`]: a handwritten-character feature pipeline (40×40
//!   normalization, slant correction, directional derivatives, skeleton maps,
//!   10×10 anti-aliased downsampling → 1000 values);
//! - [`clipworld`]: a synthetic 3D "paperclip" world with slant/tilt
//!   orthographic imaging, three view representations, and forced-choice
//!   trial construction.
//!
//! All numeric code is generic over the scalar type via [`num::Real`]
//! (`f32` or `f64`); the aliases below fix the common instantiations.

pub mod clipworld;
pub mod error;
pub mod features;
pub mod image;
pub mod knn;
pub mod mlp;
pub mod num;
pub mod similarity;

pub use error::{Error, Result};
pub use num::Real;

/// `f32` perceptron.
pub type Mlp32 = mlp::Mlp<f32>;
/// `f64` perceptron (what the experiment pipeline uses).
pub type Mlp64 = mlp::Mlp<f64>;
/// `f32` similarity model.
pub type SimilarityModel32 = similarity::SimilarityModel<f32>;
/// `f64` similarity model.
pub type SimilarityModel64 = similarity::SimilarityModel<f64>;
/// `f32` grayscale image.
pub type GrayImage32 = image::GrayImage<f32>;
/// `f64` grayscale image.
pub type GrayImage64 = image::GrayImage<f64>;
/// `f64` paperclip model.
pub type ClipModel64 = clipworld::ClipModel<f64>;
