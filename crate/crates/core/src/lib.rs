pub mod analysis;
pub mod catalogue;
pub mod codec;
pub mod endpoint;
pub mod placement;
pub mod transfer;
