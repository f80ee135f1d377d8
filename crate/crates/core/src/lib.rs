pub mod config;
pub mod error;
pub mod io;
pub mod milp;
pub mod requirements;
pub mod solver;
pub mod system;
pub mod market;
pub mod pricing;
pub mod rtuc;
