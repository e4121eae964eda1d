pub mod device;
pub mod fabric;
pub mod report;
