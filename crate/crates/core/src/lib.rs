//! Numerical toolkit for bistochastic and unistochastic matrices, robust
//! Hadamard matrices, and the unitary certificates that connect them.

pub mod birkhoff;
pub mod entangle;
pub mod hadamard;
pub mod io;
pub mod matrix;
pub mod sampling;
pub mod unisto;
