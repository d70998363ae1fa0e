pub mod bounds;
pub mod candidate;
pub mod certify;
pub mod cli;
pub mod config;
pub mod laguerre;
pub mod rigor;
pub mod sdp;
pub mod sym;
