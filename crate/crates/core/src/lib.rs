pub mod analog;
pub mod cli;
pub mod config;
pub mod consts;
pub mod detector;
pub mod noise;
pub mod patgen;
pub mod pulsegen;
pub mod qexp;
pub mod rng;
pub mod thermal;
pub mod timeline;
