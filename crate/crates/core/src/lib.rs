//! Quantum-query cryptanalysis of message authentication codes at desk scale.

pub mod func;
pub mod gf2;
pub mod qsim;
pub mod oracle;
pub mod mac;
pub mod games;
pub mod attacks;
pub mod verify;
pub mod experiments;
pub mod cli;
