pub mod error;
pub mod linalg;
pub mod pencil;
pub mod region;
pub mod dh;
pub mod sdp;
pub mod solve;
pub mod fgm;
pub mod bcd;
pub mod bench;
pub mod cli;
