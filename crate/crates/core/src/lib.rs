pub mod capacity;
pub mod cantor;
pub mod circle;
pub mod cyclicity;
pub mod dirichlet;
pub mod disk;
pub mod error;
pub mod frank_wolfe;
pub mod gauss;
pub mod outer;
pub mod poly;
pub mod scalar;
pub mod special;
pub mod weight;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision aliases, the default working precision.
pub mod double {
    pub type CantorSpec = crate::cantor::CantorSpec<f64>;
    pub type CantorLevel = crate::cantor::CantorLevel<f64>;
    pub type DiscreteMeasure = crate::capacity::DiscreteMeasure<f64>;
    pub type Equilibrium = crate::capacity::Equilibrium<f64>;
    pub type BoundaryModulus = crate::outer::BoundaryModulus<f64>;
    pub type OuterFunction = crate::outer::OuterFunction<f64>;
    pub type SpectralOuter = crate::outer::SpectralOuter<f64>;
    pub type TaylorPoly = crate::poly::TaylorPoly<f64>;
    pub type DiskGrid = crate::disk::DiskGrid<f64>;
    pub type Arc = crate::circle::Arc<f64>;
}

/// Single-precision aliases.
pub mod single {
    pub type CantorSpec = crate::cantor::CantorSpec<f32>;
    pub type CantorLevel = crate::cantor::CantorLevel<f32>;
    pub type DiscreteMeasure = crate::capacity::DiscreteMeasure<f32>;
    pub type Equilibrium = crate::capacity::Equilibrium<f32>;
    pub type BoundaryModulus = crate::outer::BoundaryModulus<f32>;
    pub type OuterFunction = crate::outer::OuterFunction<f32>;
    pub type SpectralOuter = crate::outer::SpectralOuter<f32>;
    pub type TaylorPoly = crate::poly::TaylorPoly<f32>;
    pub type DiskGrid = crate::disk::DiskGrid<f32>;
    pub type Arc = crate::circle::Arc<f32>;
}
