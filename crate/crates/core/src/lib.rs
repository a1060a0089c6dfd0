pub mod expr;
pub mod genfam;
pub mod jet;
pub mod persistence;
pub mod scenarios;
pub mod spectra;
pub mod svg;
pub mod cerf;
pub mod cli;
pub mod hodograph;
