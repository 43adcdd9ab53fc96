use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("projected degree {projected} exceeds the cap {cap}")]
    DegreeCapExceeded { projected: usize, cap: usize },

    #[error("activity undecided within the iterate budget; degrees {degrees:?}")]
    Inconclusive { degrees: Vec<Option<usize>> },

    #[error("root finding failed: {0}")]
    RootFindFailure(String),

    #[error("polynomial is identically zero")]
    ZeroPolynomial,

    #[error("iteration did not converge: {0}")]
    ConvergenceFailure(String),

    #[error("marked point is not active")]
    NotActive,

    #[error("point lies outside the Böttcher domain")]
    OutsideDomain,

    #[error("sample outside the Böttcher domain at t = {0}")]
    NotInDomain(String),

    #[error("scalar fields are defined on different windows")]
    WindowMismatch,

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("window meets the excluded disk around the origin")]
    WindowContainsOrigin,

    #[error("s = 0 is not a parameter of this family")]
    OriginUndefined,

    #[error("homogeneous lift (s, t) needs s t != 0")]
    DegenerateLift,

    #[error("Arakelov-Green function is singular on the diagonal")]
    DiagonalPole,

    #[error("probe {0} lies in the bounded locus")]
    ProbeInsideSet(String),

    #[error("degree is not a perfect power for this root order")]
    NoIntegerRootDegree,

    #[error("no polynomial solution")]
    NoSolution,

    #[error("series truncation too short: need {needed} terms, have {have}")]
    TruncationInsufficient { needed: usize, have: usize },

    #[error("marked points do not exhaust the critical points")]
    MarkedNotCritical,

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
