//! Passivation of linear plants by parallel feedforward compensation, and
//! output synchronization of passive agents over signed digraphs.
//!
//! - [`lti`]: pole-residue systems, partial fractions, real realizations.
//! - [`passivity`]: frequency-grid positive-real checks and IFP index estimates.
//! - [`pfc_design`]: compensator gains that make a plant positive real.
//! - [`signed_graph`]: Laplacian analysis and the OFP radius of a signed graph.
//! - [`netsim`]: fixed-step simulation of coupled agents with compensators.
//!
//! [`scenarios`] bundles the reference networks; [`cli`] and [`io`] back the
//! `pfc-sync` binary.

pub mod error;
pub mod lti;
pub mod passivity;
pub mod pfc_design;
pub mod signed_graph;
pub mod netsim;

pub mod scenarios;
pub mod io;
pub mod cli;
pub mod testkit;
