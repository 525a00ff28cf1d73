//! Model Hamiltonians: the PT square well (finite differences and exact
//! matching), the Khare–Mandal family, and planted test matrices.

pub mod khare_mandal;
pub mod matching;
pub mod planted;
pub mod square_well;

pub use khare_mandal::{khare_mandal_verify, KhareMandalModel, KmVerification};
pub use matching::{square_well_matching, MatchingSolution, SearchRegion};
pub use planted::{build_planted, random_plan, PlantedBlock, PlantedPlan};
pub use square_well::{build_square_well, SquareWellModel};
