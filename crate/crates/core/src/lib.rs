//! Polarization-diverse CV-QKD simulation with LMS MIMO equalization and
//! noise-aware (Q-MIMO) correction.

pub mod channel;
pub mod equalizer;
pub mod estimation;
pub mod harness;
pub mod keyrate;
pub mod linalg2;
pub mod qmimo;
pub mod txrx;
