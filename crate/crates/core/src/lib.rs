pub mod bessel;
pub mod cli;
pub mod cqes;
pub mod elements;
pub mod error;
pub mod fourier;
pub mod rotor;
pub mod spectrum;
pub mod sudden;
pub mod tdse;
