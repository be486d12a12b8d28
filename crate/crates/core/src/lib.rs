pub mod contours;
pub mod dint;
pub mod sim;
pub mod special;
pub mod dist;
pub mod geo;
pub mod kernels;
pub mod pfaffian;
pub mod quad;
