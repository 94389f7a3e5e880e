//! Upper bounds on `δ(nX mod 1, U[0,1))` and the exact distance for the
//! uniform-log family.
//!
//! Every bound is returned as a [`BoundReport`] carrying the hypotheses it
//! relied on and how each was established, so callers can tell a
//! machine-checked convexity certificate from a caller's claim.

mod exact;
mod fourier;
mod variation;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

pub use exact::{exact_delta_uniform, exact_uniform_params, folded_cdf_uniform, ExactUniformParams};
pub use fourier::{
    bound_fourier_closed, bound_fourier_parseval, bound_fourier_uniform_log, fourier_coeff_uniform_log,
    parseval_partial, uniform_log_tail_bound, zeta2_tail,
};
pub use variation::{
    bound_convex_eighth, bound_step_density, bound_tv_quarter, bound_tv_scaled, bound_tv_scaled_real,
    bound_uniform_log_tv, CONVEX_MONOTONE_CONSTANT,
};

use crate::density::{Segment, ShapeSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    StepDensity,
    TvQuarter,
    ConvexEighth,
    TvScaled,
    UniformLogClosed,
    FourierParseval,
    FourierClosed,
    ExactUniform,
}

impl BoundMethod {
    pub const ALL: [BoundMethod; 8] = [
        BoundMethod::StepDensity,
        BoundMethod::TvQuarter,
        BoundMethod::ConvexEighth,
        BoundMethod::TvScaled,
        BoundMethod::UniformLogClosed,
        BoundMethod::FourierParseval,
        BoundMethod::FourierClosed,
        BoundMethod::ExactUniform,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundMethod::StepDensity => "step_density",
            BoundMethod::TvQuarter => "tv_quarter",
            BoundMethod::ConvexEighth => "convex_eighth",
            BoundMethod::TvScaled => "tv_scaled",
            BoundMethod::UniformLogClosed => "uniform_log_closed",
            BoundMethod::FourierParseval => "fourier_parseval",
            BoundMethod::FourierClosed => "fourier_closed",
            BoundMethod::ExactUniform => "exact_uniform",
        }
    }
}

impl fmt::Display for BoundMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BoundMethod::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| {
            let names: Vec<&str> = BoundMethod::ALL.iter().map(|m| m.name()).collect();
            format!("unknown method '{s}', expected one of {}", names.join(", "))
        })
    }
}

/// How a hypothesis was established. Ordered from strongest to weakest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisStatus {
    /// Follows from the closed form of the input.
    Analytic,
    /// Claimed by the caller; spot-checked on a grid where possible.
    CallerAsserted,
    /// Inferred from a grid; not a certificate.
    GridEstimated,
}

impl HypothesisStatus {
    pub(crate) fn of_segment(seg: &Segment) -> HypothesisStatus {
        match seg.shape_source() {
            ShapeSource::Analytic => HypothesisStatus::Analytic,
            ShapeSource::Asserted => HypothesisStatus::CallerAsserted,
        }
    }

    fn label(self) -> &'static str {
        match self {
            HypothesisStatus::Analytic => "analytic",
            HypothesisStatus::CallerAsserted => "caller-asserted",
            HypothesisStatus::GridEstimated => "grid-estimated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Hypothesis {
    pub property: String,
    pub status: HypothesisStatus,
}

impl Hypothesis {
    pub fn new(property: impl Into<String>, status: HypothesisStatus) -> Hypothesis {
        Hypothesis {
            property: property.into(),
            status,
        }
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.property, self.status.label())
    }
}

/// An upper bound on (or, for `ExactUniform`, the value of) `δ(nX mod 1, U[0,1))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub method: BoundMethod,
    pub value: f64,
    pub hypotheses: Vec<Hypothesis>,
    /// Power or scale factor the bound refers to.
    pub n: f64,
    pub b: Option<f64>,
    pub notes: Vec<String>,
}

impl BoundReport {
    pub(crate) fn new(method: BoundMethod, value: f64, n: f64) -> BoundReport {
        BoundReport {
            method,
            value,
            hypotheses: Vec::new(),
            n,
            b: None,
            notes: Vec::new(),
        }
    }

    pub(crate) fn with_base(mut self, b: f64) -> BoundReport {
        self.b = Some(b);
        self
    }

    pub(crate) fn hypothesis(mut self, property: impl Into<String>, status: HypothesisStatus) -> BoundReport {
        self.hypotheses.push(Hypothesis::new(property, status));
        self
    }

    pub(crate) fn note(mut self, note: impl Into<String>) -> BoundReport {
        self.notes.push(note.into());
        self
    }

    /// Relabel the scale after the bound was computed on an already scaled density.
    pub fn with_scale(mut self, n: f64) -> BoundReport {
        self.n = n;
        self
    }

    /// Hypotheses rendered as `"property (status)"` strings.
    pub fn hypotheses_verified(&self) -> Vec<String> {
        self.hypotheses.iter().map(ToString::to_string).collect()
    }

    /// True when no hypothesis rests on a grid estimate.
    pub fn is_certified(&self) -> bool {
        self.hypotheses
            .iter()
            .all(|h| h.status != HypothesisStatus::GridEstimated)
    }
}
