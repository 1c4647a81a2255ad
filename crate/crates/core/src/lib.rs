//! Chirality calculus for arrangements of finite projective cameras.
//!
//! * [`projective`] – points, cameras, homographies, depth and chirality signs.
//! * [`lp`] – polyhedral cones in R^4 and the max-epsilon feasibility LP.
//! * [`domain`] – the chiral domain of an arrangement: nonemptiness and
//!   membership.
//! * [`joint_image`] – the biquadratic inequalities on image tuples and
//!   membership in the chiral joint image.
//! * [`reconstruction`] – sign matrices, signing, and the cone test that
//!   decides whether a projective reconstruction can be made chiral.
//! * [`euclidean`] – the same question restricted to Euclidean cameras
//!   (twisted-pair homographies).
//! * [`oracle`] – sampling-based verifiers used to cross-check the closed
//!   forms.

pub mod domain;
pub mod euclidean;
pub mod joint_image;
pub mod lp;
pub mod oracle;
pub mod projective;
pub mod reconstruction;
mod simplex;

pub use euclidean::{EuclideanCamera, EuclideanUpgrade, TwistedPairSet};
pub use oracle::{GridHit, SampleReport};
pub use domain::{CameraArrangement, DomainClassification, DomainWitness, HalfspaceCone};
pub use joint_image::{CjiClassification, CjiStatus, EpipoleLabel, ImageTuple};
pub use lp::{ConeGenerators, FeasibilityProblem, FeasibilityResult, FeasibilityStatus, LpError};
pub use projective::{FiniteCamera, GeometryError, Homography, ImagePoint, ProjectivePoint, Sign};
pub use reconstruction::{ProjectiveReconstruction, SignMatrix, SignedReconstruction, UpgradeResult};

/// Numerical tolerances shared by the whole crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative band around zero for sign decisions.
    pub sign: f64,
    /// `|det G| > det * ||G||^3` for a camera to count as finite.
    pub det: f64,
    /// Linear-algebra residuals (center, projective equality).
    pub lin: f64,
    /// Normalized smallest singular value below which a tuple triangulates.
    pub tri: f64,
    /// Relative singular-value cutoff for rank decisions.
    pub rank: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            sign: 1e-9,
            det: 1e-12,
            lin: 1e-9,
            tri: 1e-7,
            rank: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn with_sign(sign: f64) -> Self {
        Self {
            sign,
            ..Self::default()
        }
    }
}
