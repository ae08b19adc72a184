//! Interval-arithmetic certificate for the bound `sys^2 / area <= alpha` on
//! the Klein surface `3RP^2`.
//!
//! The surface (normalized to unit area) splits into a torus with a disk
//! removed and a Mobius strip. One of them has area at most `area_torus`
//! resp. `area_mob`, since the two thresholds sum to one. Each case produces
//! an essential loop of square-length below `alpha`:
//!
//! * Mobius strip: a spherical-belt lower bound on the area of a Mobius
//!   strip with systole `beta = sqrt(alpha)` whose boundary stays at distance
//!   `h >= (beta - delta0) / 2` from the core, `2 alpha sin(gamma) / pi` with
//!   `gamma = h pi / beta`, must exceed `area_mob`.
//! * Torus: capping the boundary (length `2 delta0`) by a round hemisphere
//!   of area `2 / (pi alpha)` gives a torus to which Loewner's inequality
//!   applies: `(2 / sqrt 3) (2 / (pi alpha) + area_torus) < alpha`.
//!
//! Here `delta0 = 1 / beta`, from the coarea inequality taken with equality.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interval::{Interval, IntervalError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error("alpha must be at least 1, got {0}")]
    AlphaTooSmall(Interval),
    #[error("areas must be non-negative and sum to an interval containing 1 (mob = {mob}, torus = {torus})")]
    BadSplit { mob: Interval, torus: Interval },
    #[error(transparent)]
    Interval(#[from] IntervalError),
    #[error("optimal alpha is not bracketed by [{lo}, {hi}]")]
    Bracketing { lo: f64, hi: f64 },
    #[error("bisection tolerance must be at least 1e-9, got {0:e}")]
    Tolerance(f64),
}

pub const DEFAULT_ALPHA: f64 = 1.333;
pub const DEFAULT_AREA_MOB: f64 = 0.324;
pub const DEFAULT_AREA_TORUS: f64 = 0.676;
/// Search interval for [`optimal_alpha`].
pub const ALPHA_BRACKET: (f64, f64) = (1.30, 1.3334);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub alpha: Interval,
    pub area_mob: Interval,
    pub area_torus: Interval,
}

impl ChainParams {
    pub fn new(alpha: Interval, area_mob: Interval, area_torus: Interval) -> Result<Self, ChainError> {
        if alpha.lo() < 1.0 {
            return Err(ChainError::AlphaTooSmall(alpha));
        }
        if area_mob.lo() < 0.0 || area_torus.lo() < 0.0 || !(area_mob + area_torus).contains(1.0) {
            return Err(ChainError::BadSplit {
                mob: area_mob,
                torus: area_torus,
            });
        }
        Ok(Self {
            alpha,
            area_mob,
            area_torus,
        })
    }

    /// `alpha = 1.333`, split `.324 / .676`, each as a decimal enclosure.
    pub fn standard() -> Self {
        Self::new(
            Interval::around(DEFAULT_ALPHA),
            Interval::around(DEFAULT_AREA_MOB),
            Interval::around(DEFAULT_AREA_TORUS),
        )
        .expect("default parameters are valid")
    }

    /// Decimal `alpha` with Mobius threshold `area_mob` and the complementary
    /// torus threshold.
    pub fn with_split(alpha: f64, area_mob: f64) -> Result<Self, ChainError> {
        let mob = Interval::around(area_mob);
        Self::new(Interval::around(alpha), mob, Interval::point(1.0) - mob)
    }

    /// The split whose Mobius threshold sits just below the belt bound, i.e.
    /// the largest threshold the Mobius case can certify.
    pub fn best_split(alpha: Interval) -> Result<Self, ChainError> {
        let q = DerivedQuantities::from_alpha(alpha)?;
        let belt = belt_bound(alpha, q.sin_gamma)?;
        let mob = Interval::point(belt.lo().next_down().max(0.0));
        Self::new(alpha, mob, Interval::point(1.0) - mob)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedQuantities {
    /// `sqrt(alpha)`
    pub beta: Interval,
    /// `1 / beta`
    pub delta0: Interval,
    /// `(beta - delta0) / 2`
    pub h_star: Interval,
    /// `h_star pi / beta`
    pub gamma: Interval,
    pub sin_gamma: Interval,
    /// `beta / pi`
    pub r_belt: Interval,
    /// `delta0 / pi`
    pub r_hemi: Interval,
}

impl DerivedQuantities {
    pub fn from_alpha(alpha: Interval) -> Result<Self, ChainError> {
        let beta = alpha.sqrt()?;
        let delta0 = coarea_delta0(alpha)?;
        let h_star = (beta - delta0) * Interval::point(0.5);
        let pi = Interval::pi();
        let gamma = (h_star * pi).checked_div(&beta)?;
        let sin_gamma = gamma.sin()?;
        Ok(Self {
            beta,
            delta0,
            h_star,
            gamma,
            sin_gamma,
            r_belt: beta.checked_div(&pi)?,
            r_hemi: delta0.checked_div(&pi)?,
        })
    }
}

fn belt_bound(alpha: Interval, sin_gamma: Interval) -> Result<Interval, ChainError> {
    Ok((Interval::point(2.0) * alpha * sin_gamma).checked_div(&Interval::pi())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepVerdict {
    Proved,
    Failed,
    Inconclusive,
}

/// A strict inequality `lhs < rhs` checked on enclosures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainStep {
    pub name: String,
    pub inequality: String,
    pub lhs: Interval,
    pub rhs: Interval,
    pub verdict: StepVerdict,
    /// Whether the theorem depends on this step being proved.
    pub required: bool,
}

impl ChainStep {
    fn less_than(name: &str, inequality: &str, lhs: Interval, rhs: Interval, required: bool) -> Self {
        let verdict = if lhs.hi() < rhs.lo() {
            StepVerdict::Proved
        } else if lhs.lo() > rhs.hi() {
            StepVerdict::Failed
        } else {
            StepVerdict::Inconclusive
        };
        Self {
            name: name.to_string(),
            inequality: inequality.to_string(),
            lhs,
            rhs,
            verdict,
            required,
        }
    }
}

/// `delta0 = alpha^(-1/2)`: the coarea bound `2 delta0 (beta / 2) <= 1`
/// taken with equality.
pub fn coarea_delta0(alpha: Interval) -> Result<Interval, ChainError> {
    if alpha.lo() < 1.0 {
        return Err(ChainError::AlphaTooSmall(alpha));
    }
    Ok(alpha.sqrt()?.recip()?)
}

pub fn mobius_chain(params: &ChainParams) -> Result<Vec<ChainStep>, ChainError> {
    let q = DerivedQuantities::from_alpha(params.alpha)?;
    let mob = params.area_mob;
    let two = Interval::point(2.0);
    let naive = q.delta0 + q.beta * mob;
    let h_ceiling = mob.checked_div(&(two * q.delta0))?;
    let trapezoid = q.h_star * (q.beta + q.delta0);
    let belt = belt_bound(params.alpha, q.sin_gamma)?;
    let half_pi = Interval::pi() * Interval::point(0.5);
    Ok(vec![
        ChainStep::less_than(
            "naive_loop",
            "delta0 + 2h = 1/beta + beta*|Mob| < beta",
            naive,
            q.beta,
            false,
        ),
        ChainStep::less_than(
            "h_ceiling",
            "h* = (beta - delta0)/2 < |Mob|/(2 delta0)",
            q.h_star,
            h_ceiling,
            false,
        ),
        ChainStep::less_than("h_threshold", "0 < h* = (beta - delta0)/2", Interval::point(0.0), q.h_star, false),
        ChainStep::less_than(
            "trapezoid",
            "|Mob| < h*(beta + delta0)",
            mob,
            trapezoid,
            false,
        ),
        ChainStep::less_than("belt_angle", "gamma = h* pi/beta < pi/2", q.gamma, half_pi, false),
        ChainStep::less_than(
            "belt",
            "|Mob| < 2 alpha sin(gamma)/pi",
            mob,
            belt,
            true,
        ),
    ])
}

pub fn torus_chain(params: &ChainParams) -> Result<Vec<ChainStep>, ChainError> {
    let q = DerivedQuantities::from_alpha(params.alpha)?;
    let pi = Interval::pi();
    let two = Interval::point(2.0);
    let hemi = two.checked_div(&(pi * params.alpha))?;
    let hemi_from_radius = two * pi * q.r_hemi.sqr();
    let total = hemi + params.area_torus;
    let loewner = two.checked_div(&Interval::sqrt3())? * total;
    Ok(vec![
        ChainStep::less_than("hemisphere_radius", "0 < r = delta0/pi", Interval::point(0.0), q.r_hemi, false),
        ChainStep::less_than(
            "hemisphere_area",
            "|2 pi r^2 - 2/(pi alpha)| < 1e-12",
            (hemi_from_radius - hemi).abs(),
            Interval::point(1e-12),
            false,
        ),
        ChainStep::less_than(
            "torus_area",
            "0 < 2/(pi alpha) + |Tor|",
            Interval::point(0.0),
            total,
            false,
        ),
        ChainStep::less_than(
            "loewner",
            "(2/sqrt3)(2/(pi alpha) + |Tor|) < alpha",
            loewner,
            params.alpha,
            true,
        ),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateVerdict {
    Valid,
    Invalid,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofCertificate {
    pub params: ChainParams,
    pub quantities: DerivedQuantities,
    pub steps: Vec<ChainStep>,
    pub assumptions: Vec<String>,
    pub verdict: CertificateVerdict,
}

impl ProofCertificate {
    pub fn step(&self, name: &str) -> Option<&ChainStep> {
        self.steps.iter().find(|s| s.name == name)
    }

    pub fn is_valid(&self) -> bool {
        self.verdict == CertificateVerdict::Valid
    }
}

pub const ASSUMPTIONS: [&str; 2] = [
    "delta0 = 1/beta: the coarea bound 2*delta0*(beta/2) <= 1 is taken with equality; the hemisphere estimate only improves as delta0 decreases",
    "area dichotomy: area_mob + area_torus contains 1, so either the Mobius strip has area <= area_mob or the torus with a disk removed has area <= area_torus",
];

pub fn verify_theorem(params: &ChainParams) -> Result<ProofCertificate, ChainError> {
    let quantities = DerivedQuantities::from_alpha(params.alpha)?;
    let mut steps = mobius_chain(params)?;
    steps.extend(torus_chain(params)?);
    let required = steps.iter().filter(|s| s.required);
    let verdict = if required.clone().all(|s| s.verdict == StepVerdict::Proved) {
        CertificateVerdict::Valid
    } else if required.clone().any(|s| s.verdict == StepVerdict::Failed) {
        CertificateVerdict::Invalid
    } else {
        CertificateVerdict::Inconclusive
    };
    Ok(ProofCertificate {
        params: *params,
        quantities,
        steps,
        assumptions: ASSUMPTIONS.iter().map(|s| s.to_string()).collect(),
        verdict,
    })
}

fn valid_at(alpha: f64) -> Result<bool, ChainError> {
    let params = ChainParams::best_split(Interval::point(alpha))?;
    Ok(verify_theorem(&params)?.is_valid())
}

/// Bracket of width at most `tol` around the smallest `alpha` the chain
/// certifies, using [`ChainParams::best_split`] at each candidate.
pub fn optimal_alpha(tol: f64) -> Result<Interval, ChainError> {
    if !(tol >= 1e-9) {
        return Err(ChainError::Tolerance(tol));
    }
    let (mut lo, mut hi) = ALPHA_BRACKET;
    if valid_at(lo)? || !valid_at(hi)? {
        return Err(ChainError::Bracketing { lo, hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if valid_at(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // Monotonicity spot checks just beyond each end of the bracket.
    if valid_at(lo - tol)? || !valid_at(hi + tol)? {
        return Err(ChainError::Bracketing { lo, hi });
    }
    Ok(Interval::new(lo, hi)?)
}

/// Hypotheses of the decomposition into a torus with a disk removed and a
/// Mobius strip that the two numeric chains consume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionRecord {
    /// `2 * bavard`
    pub separating_loop_bound: Interval,
    pub contains_three_branch_points: bool,
    pub contains_equator: bool,
    pub j_invariant: bool,
    pub double_covers_companion_systolic_loop: bool,
}

impl DecompositionRecord {
    pub fn checklist(&self) -> [(&'static str, bool); 4] {
        [
            ("contains_three_branch_points", self.contains_three_branch_points),
            ("contains_equator", self.contains_equator),
            ("j_invariant", self.j_invariant),
            (
                "double_covers_companion_systolic_loop",
                self.double_covers_companion_systolic_loop,
            ),
        ]
    }
}

/// Enclosure of `sqrt(pi / sqrt 8)`.
pub fn bavard_interval() -> Interval {
    let eight = Interval::point(8.0).sqrt().expect("positive");
    (Interval::pi() / eight).sqrt().expect("positive")
}

/// Enclosure of `sqrt(2 / sqrt 3)`.
pub fn loewner_interval() -> Interval {
    (Interval::point(2.0) / Interval::sqrt3()).sqrt().expect("positive")
}

pub fn decomposition_record(bavard: Interval) -> DecompositionRecord {
    DecompositionRecord {
        separating_loop_bound: Interval::point(2.0) * bavard,
        contains_three_branch_points: true,
        contains_equator: true,
        j_invariant: true,
        double_covers_companion_systolic_loop: true,
    }
}
