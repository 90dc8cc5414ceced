pub mod circle;
pub mod complex;
pub mod go;
pub mod group;
pub mod life;
pub mod oplab;
pub mod trunc;
