//! Canonical phase distribution, truncated phase states and the
//! normalization that turns detection frequencies into phase densities.

use std::f64::consts::{PI, TAU};
use std::io::{Read, Write};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{pure_phase_density, FockVector, Mixture};

/// Maps an angle onto `[0, 2 pi)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// `theta_m = 2 pi m / (N+1)`.
pub fn comb_angle(m: usize, order: usize) -> f64 {
    TAU * m as f64 / (order + 1) as f64
}

/// `(N+1)^{-1/2} sum_{n<=N} exp(i n theta) |n>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncatedPhaseState {
    pub theta: f64,
    pub order: usize,
}

impl TruncatedPhaseState {
    pub fn amplitudes(&self) -> Vec<C64> {
        let scale = ((self.order + 1) as f64).sqrt().recip();
        (0..=self.order).map(|n| C64::from_polar(scale, n as f64 * self.theta)).collect()
    }

    pub fn to_fock(&self) -> FockVector {
        FockVector::from_normalized(self.amplitudes()).expect("phase states are normalized")
    }
}

pub fn truncated_phase_state(theta: f64, order: usize) -> TruncatedPhaseState {
    TruncatedPhaseState { theta, order }
}

/// `|<theta_m|psi>|^2`. Amplitudes of `state` above the phase-state order
/// do not contribute.
pub fn projection_probability(state: &FockVector, phase_state: &TruncatedPhaseState) -> f64 {
    phase_state.amplitudes().iter().enumerate().map(|(n, p)| p.conj() * state.amplitude(n)).sum::<C64>().norm_sqr()
}

/// Where a distribution's values came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Analytic,
    ExactSimulated,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    /// Radians.
    pub theta: f64,
    /// Probability density, 1/radian.
    pub value: f64,
    pub stderr: Option<f64>,
}

/// Sampled phase densities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseDistribution {
    pub points: Vec<PhasePoint>,
    pub provenance: Provenance,
}

const CSV_COMMENT: &str = "# theta in radians; value and stderr are densities in 1/radian";

impl PhaseDistribution {
    pub fn thetas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.theta).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    /// Periodic trapezoid rule over the sampled points, which must be sorted
    /// and lie in one `2 pi` period.
    pub fn trapezoid_integral(&self) -> f64 {
        let n = self.points.len();
        if n == 0 {
            return 0.0;
        }
        let mut total = 0.0;
        for k in 0..n {
            let a = &self.points[k];
            let b = &self.points[(k + 1) % n];
            let mut width = b.theta - a.theta;
            if k + 1 == n {
                width += TAU;
            }
            total += 0.5 * (a.value + b.value) * width;
        }
        total
    }

    /// Writes `theta,value,stderr` rows after a `#` comment line. Floats use
    /// the shortest representation that parses back to the same value.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{CSV_COMMENT}")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["theta", "value", "stderr"])?;
        for p in &self.points {
            let stderr = p.stderr.unwrap_or(0.0);
            w.write_record([p.theta.to_string(), p.value.to_string(), stderr.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    /// Reads the format written by [`write_csv`](Self::write_csv). A zero
    /// stderr reads back as `Some(0.0)`.
    pub fn read_csv<R: Read>(input: R, provenance: Provenance) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
        let mut points = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let field = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::Config(format!("bad number in csv record {}", line + 1)))
            };
            points.push(PhasePoint { theta: field(0)?, value: field(1)?, stderr: Some(field(2)?) });
        }
        Ok(Self { points, provenance })
    }
}

/// Canonical phase density of a pure or mixed state at one angle.
pub fn canonical_density<M: Mixture + ?Sized>(state: &M, theta: f64) -> f64 {
    state.components().iter().map(|(w, s)| w * pure_phase_density(s, theta)).sum()
}

/// `P(theta) = (1/2pi) |sum_n c_n* exp(i n theta)|^2`, weight-averaged over
/// mixture members.
pub fn canonical_distribution<M: Mixture + ?Sized>(state: &M, thetas: &[f64]) -> PhaseDistribution {
    let points = thetas
        .iter()
        .map(|&theta| PhasePoint { theta, value: canonical_density(state, theta), stderr: None })
        .collect();
    PhaseDistribution { points, provenance: Provenance::Analytic }
}

/// `n` equally spaced angles `2 pi k / n` on `[0, 2 pi)`.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}

/// `y_m = (N+1) P_m / (2 pi sum_k P_k)` for the `N+1` desired-event
/// probabilities; for four events this is `2 P_m / (pi sum P)`. The values
/// sum to `(N+1)/(2 pi)`, so a histogram of bin width `2 pi/(N+1)` has unit area.
pub fn normalize_counts(event_probs: &[f64]) -> Result<Vec<f64>> {
    if event_probs.len() < 2 {
        return Err(Error::Degenerate("need at least two event probabilities"));
    }
    if event_probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
        return Err(Error::Degenerate("event probabilities must be finite and non-negative"));
    }
    let total: f64 = event_probs.iter().sum();
    if total == 0.0 {
        return Err(Error::Degenerate("all event probabilities are zero"));
    }
    let bins = event_probs.len() as f64;
    Ok(event_probs.iter().map(|p| bins * p / (2.0 * PI * total)).collect())
}

/// [`normalize_counts`] applied to event tallies, with a delta-method
/// standard error `(N+1)/(2 pi) * sqrt(f (1 - f) / S)` per point, `f` being
/// the event's share of the `S` recorded desired events.
pub fn normalize_tallies(tallies: &[u64]) -> Result<Vec<(f64, f64)>> {
    let probs: Vec<f64> = tallies.iter().map(|&n| n as f64).collect();
    let y = normalize_counts(&probs)?;
    let total: f64 = probs.iter().sum();
    let scale = tallies.len() as f64 / TAU;
    Ok(y.into_iter()
        .zip(&probs)
        .map(|(value, &n)| {
            let f = n / total;
            (value, scale * (f * (1.0 - f) / total).sqrt())
        })
        .collect())
}
