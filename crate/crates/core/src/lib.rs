//! Critical spectrum of finite metric spaces.
//!
//! This crate computes and classifies the critical spectrum of a finite
//! metric space under discrete (chain-based) homotopy: for a scale `eps`,
//! an `eps`-chain is a point sequence whose consecutive distances are
//! strictly below `eps`, two chains are `eps`-homotopic when a sequence of
//! single-point insertions/removals joins them, and the covering space
//! `X_eps` is the space of homotopy classes of chains from a basepoint.
//! Scales at which the tower of covers `X_eps` changes are *critical
//! values*; they split into *homotopy* critical values (an essential loop
//! dies) and *refinement* critical values (an essential gap: a two-point
//! chain that cannot be refined to shorter hops).
//!
//! Modules follow the subsystem layout:
//!
//! * [`space`], [`generate`], [`io`] — finite metric spaces, exact sample
//!   generators for the reference spaces (circle, circle with gap, square
//!   boundary, Hawaiian earring truncation, Rapunzel combs), ingestion.
//! * [`chain`] — chains, basic moves, homotopy traces and the trace
//!   verifier (the proof checker all certificates reduce to).
//! * [`intrinsic`] — the eps-intrinsic metric `D_eps` and its sweep.
//! * [`graph`], [`presentation`], [`snf`], [`tietze`] — the eps-graph with
//!   its triangle 2-cells, spanning-tree presentations of `pi_eps`, integer
//!   Smith normal form, and presentation simplification.
//! * [`nullity`] — tiered nullity/refinability decisions with
//!   machine-checkable certificates.
//! * [`cover`] — explicit finite balls of the eps-cover with proof-producing
//!   state identification, chain lifting and the deck action.
//! * [`homology`] — sparse GF(2) persistence over the distance filtration
//!   (drives the spectrum scan).
//! * [`gaps`] — gap numbers, pre-essential gap certification, essential gap
//!   detection.
//! * [`spectrum`] — the full scan, classification, report and SVG diagram.
//! * [`oracle`] — definition-level brute force over chains and basic moves,
//!   kept independent of the algebraic machinery it cross-checks.

pub mod budget;
pub mod chain;
pub mod cover;
pub mod gaps;
pub mod generate;
pub mod graph;
pub mod homology;
pub mod intrinsic;
pub mod io;
pub mod nullity;
pub mod oracle;
pub mod presentation;
pub mod snf;
pub mod space;
pub mod spectrum;
pub mod svg;
pub mod tietze;

pub use chain::{BasicMove, Chain, HomotopyTrace};
pub use space::{FiniteMetricSpace, MetricError, Scale};
