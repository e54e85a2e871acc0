//! Bounds on the response at given times: the pole search, time sweeps,
//! closed-form reference values and the inverse volume-fraction estimate.

pub mod analytic;
mod engine;
pub mod inverse;
pub mod nelder_mead;

use rayon::prelude::*;

pub use engine::{minimize_objective, objective_value, Layout, ObjectiveTerm, Optimum, SearchSettings};

use crate::error::{Error, Result};
use crate::phase::{CompositePair, Side};
use crate::spectral::{SpectralConfig, StepLoading};
use crate::sum_rules::{InfoSet, Symmetry};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundSense {
    Upper,
    Lower,
}

/// The quantity being bounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    /// First response component under a loading along the first axis.
    Scalar12,
    /// `sin(alpha) sigma_12 + cos(alpha) sigma_13` (stress side).
    DirectionalF(f64),
    /// `sin(alpha) eps_12 + cos(alpha) eps_13` (strain side).
    DirectionalG(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundQuery {
    pub pair: CompositePair,
    pub info: InfoSet,
    pub loading: StepLoading,
    pub times: Vec<f64>,
    pub sense: BoundSense,
    pub target: Target,
    /// Fixed common orientation for directional targets under reflective
    /// symmetry; `None` lets the search pick it.
    pub orientation: Option<f64>,
}

impl BoundQuery {
    /// Scalar query with a unit step on the pair's side.
    pub fn scalar(pair: CompositePair, info: InfoSet, times: Vec<f64>, sense: BoundSense) -> Self {
        BoundQuery {
            loading: StepLoading::unit(pair.side()),
            pair,
            info,
            times,
            sense,
            target: Target::Scalar12,
            orientation: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.info.validate()?;
        self.loading.validate()?;
        if self.loading.side() != self.pair.side() {
            return Err(Error::SideMismatch { expected: self.pair.side(), found: self.loading.side() });
        }
        for w in self.times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Configuration("times must be strictly increasing".into()));
            }
        }
        if let Some(&t) = self.times.first() {
            if !(t >= 0.0) {
                return Err(Error::Configuration(format!("times must be non-negative, got {t}")));
            }
        }
        match self.target {
            Target::Scalar12 => {
                if self.loading.amplitude()[1] != 0.0 {
                    return Err(Error::Configuration(
                        "scalar bounds need a loading along the first axis".into(),
                    ));
                }
            }
            Target::DirectionalF(a) | Target::DirectionalG(a) => {
                let side = if matches!(self.target, Target::DirectionalF(_)) { Side::Stress } else { Side::Strain };
                if side != self.pair.side() {
                    return Err(Error::SideMismatch { expected: side, found: self.pair.side() });
                }
                if !a.is_finite() {
                    return Err(Error::InvalidParameter(format!("direction angle {a} is not finite")));
                }
            }
        }
        Ok(())
    }

    /// Response of pure phase 2 to the loading, in the target's direction
    /// norm: bounds are divided by this for reporting.
    pub fn reference(&self) -> f64 {
        let a = self.loading.amplitude();
        let norm = match self.target {
            Target::Scalar12 => a[0].abs(),
            _ => a[0].hypot(a[1]),
        };
        self.pair.response_scale() * norm
    }

    fn direction(&self) -> [f64; 2] {
        match self.target {
            Target::Scalar12 => [1.0, 0.0],
            Target::DirectionalF(a) | Target::DirectionalG(a) => [a.sin(), a.cos()],
        }
    }

    fn layout(&self) -> Layout {
        match (self.target, self.info.symmetry) {
            (Target::Scalar12, _) => Layout::Scalar,
            (_, Symmetry::Reflective) => Layout::Reflective { theta: self.orientation },
            (_, Symmetry::NonReflective) => Layout::Clock,
        }
    }

    /// The objective to minimize at `t`: the target for a lower bound, its
    /// negative for an upper bound.
    fn terms(&self, t: f64) -> Vec<ObjectiveTerm> {
        let sign = match self.sense {
            BoundSense::Lower => 1.0,
            BoundSense::Upper => -1.0,
        };
        let d = self.direction();
        vec![ObjectiveTerm::new(t, self.loading.amplitude(), [sign * d[0], sign * d[1]])]
    }

    fn with_sense(&self, sense: BoundSense) -> Self {
        BoundQuery { sense, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundRecord {
    pub time: f64,
    /// Bound on the target in physical units.
    pub value: f64,
    /// `value` divided by [`BoundQuery::reference`].
    pub normalized: f64,
    pub config: SpectralConfig,
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundSeries {
    pub sense: BoundSense,
    pub records: Vec<BoundRecord>,
}

/// Lower and upper bound at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedRecord {
    pub lower: BoundRecord,
    pub upper: BoundRecord,
}

impl PairedRecord {
    pub fn time(&self) -> f64 {
        self.lower.time
    }

    /// Normalized width of the bound interval.
    pub fn gap(&self) -> f64 {
        self.upper.normalized - self.lower.normalized
    }
}

fn record(query: &BoundQuery, t: f64, opt: &Optimum) -> BoundRecord {
    let value = match query.sense {
        BoundSense::Lower => opt.value,
        BoundSense::Upper => -opt.value,
    };
    BoundRecord { time: t, value, normalized: value / query.reference(), config: opt.config.clone(), theta: opt.theta }
}

fn optimize_warm(
    query: &BoundQuery,
    t: f64,
    settings: &SearchSettings,
    warm: Option<&Optimum>,
) -> Result<(BoundRecord, Optimum)> {
    let opt = minimize_objective(&query.pair, &query.info, &query.terms(t), query.layout(), settings, warm)
        .map_err(|e| match e {
            Error::Infeasible(msg) => Error::Infeasible(format!("at t = {t}: {msg}")),
            other => other,
        })?;
    Ok((record(query, t, &opt), opt))
}

/// Extremal value of the target at time `t`.
pub fn optimize_bound(query: &BoundQuery, t: f64, settings: &SearchSettings) -> Result<BoundRecord> {
    query.validate()?;
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    Ok(optimize_warm(query, t, settings, None)?.0)
}

/// Bounds at every time of the query. Chunks of consecutive times run in
/// parallel; within a chunk each search is seeded with the previous optimum.
pub fn sweep_bounds(query: &BoundQuery, settings: &SearchSettings) -> Result<BoundSeries> {
    query.validate()?;
    let chunk = settings.sweep_chunk.max(1);
    let parts: Vec<Result<Vec<BoundRecord>>> = query
        .times
        .par_chunks(chunk)
        .map(|times| {
            let mut warm: Option<Optimum> = None;
            let mut out = Vec::with_capacity(times.len());
            for &t in times {
                let (rec, opt) = optimize_warm(query, t, settings, warm.as_ref())?;
                out.push(rec);
                warm = Some(opt);
            }
            Ok(out)
        })
        .collect();
    let mut records = Vec::with_capacity(query.times.len());
    for p in parts {
        records.extend(p?);
    }
    Ok(BoundSeries { sense: query.sense, records })
}

/// Lower and upper sweeps of the same query (its `sense` is ignored).
pub fn sweep_paired(query: &BoundQuery, settings: &SearchSettings) -> Result<Vec<PairedRecord>> {
    let (lower, upper) = rayon::join(
        || sweep_bounds(&query.with_sense(BoundSense::Lower), settings),
        || sweep_bounds(&query.with_sense(BoundSense::Upper), settings),
    );
    Ok(lower?
        .records
        .into_iter()
        .zip(upper?.records)
        .map(|(lower, upper)| PairedRecord { lower, upper })
        .collect())
}
