pub mod cases;
pub mod config;
pub mod convergence;
pub mod errors;
pub mod output;
pub mod run;
