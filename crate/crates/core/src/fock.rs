//! Single-mode states in the photon-number basis.
//!
//! Every constructor truncates at an explicit cutoff, checks that the
//! discarded tail carries less than [`TAIL_LIMIT`] of the probability, and
//! renormalizes what is kept.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest probability mass a constructor may discard above its cutoff.
pub const TAIL_LIMIT: f64 = 1e-6;

/// Tolerance on `sum |c_n|^2 = 1` for a constructed state.
pub const NORM_TOL: f64 = 1e-9;

/// Quadrature variance of the vacuum, with `X = (a + a†) / 2`.
pub const VACUUM_QUADRATURE_VARIANCE: f64 = 0.25;

/// Largest cutoff tried when a cutoff is chosen automatically.
pub const MAX_AUTO_CUTOFF: usize = 400;

/// A normalized pure state `sum_n c_n |n>` truncated at `n = cutoff`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    amps: Vec<C64>,
}

impl FockVector {
    /// Builds a state from raw amplitudes, rescaling them to unit norm.
    pub fn from_amplitudes(mut amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::Degenerate("empty amplitude list"));
        }
        let norm_sqr: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
        if !(norm_sqr > 0.0) || !norm_sqr.is_finite() {
            return Err(Error::NotNormalized(norm_sqr));
        }
        let scale = norm_sqr.sqrt().recip();
        amps.iter_mut().for_each(|c| *c *= scale);
        Ok(Self { amps })
    }

    /// Builds a state from amplitudes that must already be normalized.
    pub fn from_normalized(amps: Vec<C64>) -> Result<Self> {
        let norm_sqr: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
        if amps.is_empty() || (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm_sqr));
        }
        Ok(Self { amps })
    }

    pub fn vacuum() -> Self {
        Self { amps: vec![C64::new(1.0, 0.0)] }
    }

    pub fn cutoff(&self) -> usize {
        self.amps.len() - 1
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    /// `<n|psi>`, zero above the cutoff.
    pub fn amplitude(&self, n: usize) -> C64 {
        self.amps.get(n).copied().unwrap_or_default()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.amps.iter().enumerate().map(|(n, c)| n as f64 * c.norm_sqr()).sum()
    }

    /// Probability carried by number states above `n`.
    pub fn mass_above(&self, n: usize) -> f64 {
        self.amps.iter().skip(n + 1).map(|c| c.norm_sqr()).sum()
    }

    /// Zero-pads the amplitude list up to `cutoff`. Never truncates.
    pub fn padded(&self, cutoff: usize) -> Self {
        let mut amps = self.amps.clone();
        if amps.len() < cutoff + 1 {
            amps.resize(cutoff + 1, C64::default());
        }
        Self { amps }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &FockVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Minimum over quadrature angles of `Var(X_phi)`, where
    /// `X_phi = (a e^{-i phi} + a† e^{i phi}) / 2`. The vacuum gives 1/4.
    pub fn min_quadrature_variance(&self) -> f64 {
        let c = &self.amps;
        let mut a_mean = C64::default();
        let mut a2_mean = C64::default();
        for n in 0..c.len() {
            if n + 1 < c.len() {
                a_mean += c[n].conj() * c[n + 1] * ((n + 1) as f64).sqrt();
            }
            if n + 2 < c.len() {
                a2_mean += c[n].conj() * c[n + 2] * (((n + 1) * (n + 2)) as f64).sqrt();
            }
        }
        let number = self.mean_photon_number() - a_mean.norm_sqr();
        let anomalous = (a2_mean - a_mean * a_mean).norm();
        0.25 * (1.0 + 2.0 * number - 2.0 * anomalous)
    }
}

/// Squeezed-state parameters: displacement `alpha` and squeezing
/// `zeta = zeta_mag * exp(i phi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezedParams {
    pub alpha: C64,
    pub zeta_mag: f64,
    pub phi: f64,
}

impl SqueezedParams {
    pub fn new(alpha: C64, zeta_mag: f64, phi: f64) -> Result<Self> {
        if !(zeta_mag >= 0.0) || !phi.is_finite() || !alpha.is_finite() {
            return Err(Error::Config(format!("squeezing magnitude must be finite and non-negative, got {zeta_mag}")));
        }
        let params = Self { alpha, zeta_mag, phi };
        let t = params.t().norm();
        if t >= 1.0 {
            return Err(Error::InvalidSqueezing(t));
        }
        Ok(params)
    }

    /// Parameters from `t = exp(i phi) tanh|zeta|` directly.
    pub fn from_t(alpha: C64, t: C64) -> Result<Self> {
        let mag = t.norm();
        if !(mag < 1.0) {
            return Err(Error::InvalidSqueezing(mag));
        }
        let phi = if mag == 0.0 { 0.0 } else { t.arg() };
        Self::new(alpha, mag.atanh(), phi)
    }

    pub fn t(&self) -> C64 {
        C64::from_polar(self.zeta_mag.tanh(), self.phi)
    }

    /// Squeezing that makes the leading coefficients of the state follow
    /// `sqrt(C(n_binomial, n))` for `n << n_binomial`: `t = 1/2`,
    /// `alpha = (2/3) sqrt(n_binomial)`.
    pub fn binomial_head_match(n_binomial: usize) -> Self {
        let alpha = 2.0 / 3.0 * (n_binomial as f64).sqrt();
        Self::from_t(C64::new(alpha, 0.0), C64::new(0.5, 0.0)).expect("t = 0.5 is inside the unit disc")
    }

    /// Real `t` and `alpha` for which the coefficients `n_binomial - 2`,
    /// `n_binomial - 1` and `n_binomial` are exactly proportional to the
    /// binomial amplitudes. For `n_binomial = 3` this is `t = 1/2`,
    /// `alpha = (2 + sqrt 2) / 3`; other orders are solved by Newton
    /// iteration from that point.
    pub fn binomial_tail_match(n_binomial: usize) -> Result<Self> {
        if n_binomial < 2 {
            return Err(Error::Config("tail matching needs a binomial order of at least 2".into()));
        }
        if n_binomial == 3 {
            let alpha = (2.0 + 2f64.sqrt()) / 3.0;
            return Self::from_t(C64::new(alpha, 0.0), C64::new(0.5, 0.0));
        }
        let (t, alpha) = solve_tail_match(n_binomial)?;
        Self::from_t(C64::new(alpha, 0.0), C64::new(t, 0.0))
    }
}

fn tail_match_residual(n: usize, t: f64, alpha: f64) -> [f64; 2] {
    let g = squeezed_series(C64::new(alpha, 0.0), C64::new(t, 0.0), n);
    let top = g[n].re;
    let want1 = (n as f64).sqrt();
    let want2 = (binomial(n, 2)).sqrt();
    [g[n - 1].re / top - want1, g[n - 2].re / top - want2]
}

fn solve_tail_match(n: usize) -> Result<(f64, f64)> {
    let (mut t, mut alpha) = (0.5, (2.0 + 2f64.sqrt()) / 3.0 * (n as f64 / 3.0).sqrt());
    for _ in 0..100 {
        let r = tail_match_residual(n, t, alpha);
        if r[0].abs().max(r[1].abs()) < 1e-13 {
            return Ok((t, alpha));
        }
        let h = 1e-7;
        let rt = tail_match_residual(n, t + h, alpha);
        let ra = tail_match_residual(n, t, alpha + h);
        let j = [[(rt[0] - r[0]) / h, (ra[0] - r[0]) / h], [(rt[1] - r[1]) / h, (ra[1] - r[1]) / h]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 {
            break;
        }
        let dt = (j[1][1] * r[0] - j[0][1] * r[1]) / det;
        let da = (j[0][0] * r[1] - j[1][0] * r[0]) / det;
        t = (t - dt).clamp(1e-6, 1.0 - 1e-9);
        alpha -= da;
    }
    Err(Error::Degenerate("binomial tail matching did not converge"))
}

/// A mixed state: a convex combination of pure states.
#[derive(Clone, Debug, PartialEq)]
pub struct StateEnsemble {
    members: Vec<(f64, FockVector)>,
}

impl StateEnsemble {
    pub fn new(members: Vec<(f64, FockVector)>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Degenerate("empty ensemble"));
        }
        let total: f64 = members.iter().map(|(w, _)| *w).sum();
        if members.iter().any(|(w, _)| !(*w >= 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidWeights(total));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[(f64, FockVector)] {
        &self.members
    }
}

/// Anything that can be read as a weighted list of pure states.
pub trait Mixture {
    fn components(&self) -> Vec<(f64, &FockVector)>;
}

impl Mixture for FockVector {
    fn components(&self) -> Vec<(f64, &FockVector)> {
        vec![(1.0, self)]
    }
}

impl Mixture for StateEnsemble {
    fn components(&self) -> Vec<(f64, &FockVector)> {
        self.members.iter().map(|(w, s)| (*w, s)).collect()
    }
}

/// Either a pure or a mixed single-mode state.
#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Pure(FockVector),
    Mixed(StateEnsemble),
}

impl Mixture for State {
    fn components(&self) -> Vec<(f64, &FockVector)> {
        match self {
            State::Pure(s) => s.components(),
            State::Mixed(e) => e.components(),
        }
    }
}

impl From<FockVector> for State {
    fn from(s: FockVector) -> Self {
        State::Pure(s)
    }
}

impl From<StateEnsemble> for State {
    fn from(e: StateEnsemble) -> Self {
        State::Mixed(e)
    }
}

impl State {
    pub fn max_cutoff(&self) -> usize {
        self.components().iter().map(|(_, s)| s.cutoff()).max().unwrap_or(0)
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.components().iter().map(|(w, s)| w * s.mean_photon_number()).sum()
    }

    /// Weighted probability above number state `n`.
    pub fn mass_above(&self, n: usize) -> f64 {
        self.components().iter().map(|(w, s)| w * s.mass_above(n)).sum()
    }
}

fn check_tail(cutoff: usize, kept: f64) -> Result<()> {
    let tail = (1.0 - kept).max(0.0);
    if tail >= TAIL_LIMIT {
        return Err(Error::TailTooLarge { cutoff, tail, limit: TAIL_LIMIT });
    }
    Ok(())
}

/// Coherent state `|alpha>` truncated at `cutoff`.
pub fn coherent_state(alpha: C64, cutoff: usize) -> Result<FockVector> {
    let mut amps = Vec::with_capacity(cutoff + 1);
    let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..=cutoff {
        if n > 0 {
            c = c * alpha / (n as f64).sqrt();
        }
        amps.push(c);
    }
    check_tail(cutoff, amps.iter().map(|c| c.norm_sqr()).sum())?;
    FockVector::from_amplitudes(amps)
}

/// `g_n = (t/2)^{n/2} H_n[(alpha + t alpha*) / sqrt(2t)] / sqrt(n!)` for
/// `n = 0..=cutoff`, by the scaled Hermite recurrence
/// `g_{n+1} = a g_n / sqrt(n+1) - t sqrt(n/(n+1)) g_{n-1}`, `a = alpha + t alpha*`.
/// At `t = 0` this reduces to `alpha^n / sqrt(n!)`.
fn squeezed_series(alpha: C64, t: C64, cutoff: usize) -> Vec<C64> {
    let a = alpha + t * alpha.conj();
    let mut g = Vec::with_capacity(cutoff + 1);
    g.push(C64::new(1.0, 0.0));
    if cutoff >= 1 {
        g.push(a);
    }
    for n in 1..cutoff {
        let next = a * g[n] / ((n + 1) as f64).sqrt() - t * (n as f64 / (n + 1) as f64).sqrt() * g[n - 1];
        g.push(next);
    }
    g
}

/// Squeezed state `|alpha, zeta>` truncated at `cutoff`.
pub fn squeezed_state(params: SqueezedParams, cutoff: usize) -> Result<FockVector> {
    let t = params.t();
    if t.norm() >= 1.0 {
        return Err(Error::InvalidSqueezing(t.norm()));
    }
    if params.zeta_mag == 0.0 {
        return coherent_state(params.alpha, cutoff);
    }
    let alpha = params.alpha;
    let prefactor = (-0.5 * (alpha.norm_sqr() + t * alpha.conj() * alpha.conj())).exp() / params.zeta_mag.cosh().sqrt();
    let amps: Vec<C64> = squeezed_series(alpha, t, cutoff).into_iter().map(|g| prefactor * g).collect();
    check_tail(cutoff, amps.iter().map(|c| c.norm_sqr()).sum())?;
    FockVector::from_amplitudes(amps)
}

/// Binomial state `2^{-N/2} sum_n sqrt(C(N, n)) |n>`.
pub fn binomial_state(n: usize) -> FockVector {
    let scale = 2f64.powf(-(n as f64) / 2.0);
    let amps = (0..=n).map(|k| C64::new(scale * binomial(n, k).sqrt(), 0.0)).collect();
    FockVector::from_amplitudes(amps).expect("binomial amplitudes are non-zero")
}

/// Number state `|n>` padded with zeros up to `cutoff` (at least `n`).
pub fn number_state(n: usize, cutoff: usize) -> FockVector {
    let mut amps = vec![C64::default(); cutoff.max(n) + 1];
    amps[n] = C64::new(1.0, 0.0);
    FockVector { amps }
}

/// Applies `c_n -> exp(i n theta) c_n`.
pub fn phase_shift(state: &FockVector, theta: f64) -> FockVector {
    let amps = state.amps.iter().enumerate().map(|(n, c)| c * C64::from_polar(1.0, n as f64 * theta)).collect();
    FockVector { amps }
}

/// Physicists' Hermite polynomial `H_n(x)`.
pub fn hermite(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// [`hermite`] at a complex argument.
pub fn hermite_complex(n: usize, z: C64) -> C64 {
    let (mut prev, mut cur) = (C64::new(1.0, 0.0), 2.0 * z);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = 2.0 * z * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Binomial coefficient as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Probability below which the two highest retained amplitudes of an
/// automatically truncated state count as converged.
pub const AUTO_CUTOFF_FLOOR: f64 = 1e-32;

/// Smallest cutoff, searching upward from `start`, that `build` accepts and
/// whose two highest amplitudes carry less than [`AUTO_CUTOFF_FLOOR`]. The
/// acceptance bound alone leaves density errors near `sqrt(TAIL_LIMIT)`.
pub fn auto_cutoff<F>(start: usize, mut build: F) -> Result<FockVector>
where
    F: FnMut(usize) -> Result<FockVector>,
{
    let mut last = None;
    let mut accepted = None;
    for cutoff in start..=MAX_AUTO_CUTOFF {
        match build(cutoff) {
            Err(e @ Error::TailTooLarge { .. }) => last = Some(e),
            Ok(s) => {
                let top: f64 = s.amps.iter().rev().take(2).map(|c| c.norm_sqr()).sum();
                if cutoff > 0 && top < AUTO_CUTOFF_FLOOR {
                    return Ok(s);
                }
                accepted = Some(s);
            }
            Err(e) => return Err(e),
        }
    }
    match accepted {
        Some(s) => {
            log::warn!("amplitudes still above {AUTO_CUTOFF_FLOOR:e} at cutoff {MAX_AUTO_CUTOFF}");
            Ok(s)
        }
        None => Err(last.unwrap_or(Error::Degenerate("no admissible cutoff"))),
    }
}

/// Declarative description of a single-mode state, as read from JSON.
///
/// ```json
/// {"kind": "coherent", "mean_photons": 0.076}
/// {"kind": "coherent", "alpha": [0.2, 0.1], "cutoff": 8}
/// {"kind": "squeezed", "alpha": [1.138, 0.0], "t": [0.5, 0.0]}
/// {"kind": "squeezed", "alpha": [0.0, 0.0], "zeta_mag": 0.5493, "phi": 0.0}
/// {"kind": "squeezed_binomial_match", "n": 3}
/// {"kind": "binomial", "n": 3}
/// {"kind": "number", "n": 2}
/// {"kind": "custom", "amplitudes": [[1, 0], [0, 1]]}
/// {"kind": "ensemble", "members": [{"weight": 0.5, "state": {"kind": "number", "n": 0}}, ...]}
/// ```
///
/// Complex numbers are `[re, im]` pairs. A missing `cutoff` is chosen by
/// [`auto_cutoff`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Coherent {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mean_photons: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        phase: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cutoff: Option<usize>,
    },
    Squeezed {
        alpha: [f64; 2],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t: Option<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        zeta_mag: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        phi: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cutoff: Option<usize>,
    },
    SqueezedBinomialMatch {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cutoff: Option<usize>,
    },
    Binomial {
        n: usize,
    },
    Number {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cutoff: Option<usize>,
    },
    Custom {
        amplitudes: Vec<[f64; 2]>,
    },
    Ensemble {
        members: Vec<EnsembleMember>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleMember {
    pub weight: f64,
    pub state: StateSpec,
}

fn c64(pair: [f64; 2]) -> C64 {
    C64::new(pair[0], pair[1])
}

fn with_cutoff<F>(cutoff: Option<usize>, build: F) -> Result<FockVector>
where
    F: FnMut(usize) -> Result<FockVector>,
{
    let mut build = build;
    match cutoff {
        Some(c) => build(c),
        None => auto_cutoff(0, build),
    }
}

impl StateSpec {
    pub fn build(&self) -> Result<State> {
        match self {
            StateSpec::Ensemble { members } => {
                let mut built = Vec::with_capacity(members.len());
                for m in members {
                    match m.state.build()? {
                        State::Pure(s) => built.push((m.weight, s)),
                        State::Mixed(_) => return Err(Error::Config("nested ensembles are not supported".into())),
                    }
                }
                Ok(StateEnsemble::new(built)?.into())
            }
            other => other.build_pure().map(State::Pure),
        }
    }

    /// Builds a pure state; fails for ensembles.
    pub fn build_pure(&self) -> Result<FockVector> {
        match self {
            StateSpec::Coherent { alpha, mean_photons, phase, cutoff } => {
                let alpha = match (alpha, mean_photons) {
                    (Some(a), None) => c64(*a),
                    (None, Some(mean)) if *mean >= 0.0 => C64::from_polar(mean.sqrt(), phase.unwrap_or(0.0)),
                    _ => {
                        return Err(Error::Config(
                            "coherent state needs exactly one of `alpha` or non-negative `mean_photons`".into(),
                        ))
                    }
                };
                with_cutoff(*cutoff, |c| coherent_state(alpha, c))
            }
            StateSpec::Squeezed { alpha, t, zeta_mag, phi, cutoff } => {
                let params = match (t, zeta_mag) {
                    (Some(t), None) => SqueezedParams::from_t(c64(*alpha), c64(*t))?,
                    (None, Some(r)) => SqueezedParams::new(c64(*alpha), *r, phi.unwrap_or(0.0))?,
                    _ => return Err(Error::Config("squeezed state needs exactly one of `t` or `zeta_mag`".into())),
                };
                with_cutoff(*cutoff, |c| squeezed_state(params, c))
            }
            StateSpec::SqueezedBinomialMatch { n, cutoff } => {
                let params = SqueezedParams::binomial_tail_match(*n)?;
                with_cutoff(*cutoff, |c| squeezed_state(params, c))
            }
            StateSpec::Binomial { n } => Ok(binomial_state(*n)),
            StateSpec::Number { n, cutoff } => Ok(number_state(*n, cutoff.unwrap_or(*n))),
            StateSpec::Custom { amplitudes } => {
                FockVector::from_amplitudes(amplitudes.iter().copied().map(c64).collect())
            }
            StateSpec::Ensemble { .. } => {
                Err(Error::Config("an ensemble cannot be used where a pure state is required".into()))
            }
        }
    }
}

/// Canonical phase density `(1/2pi) |sum_n c_n* exp(i n theta)|^2` of a pure state.
pub(crate) fn pure_phase_density(state: &FockVector, theta: f64) -> f64 {
    let sum: C64 = state.amps.iter().enumerate().map(|(n, c)| c.conj() * C64::from_polar(1.0, n as f64 * theta)).sum();
    sum.norm_sqr() / (2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn vacuum_coherent() {
        let s = coherent_state(re(0.0), 3).unwrap();
        assert_eq!(s.amplitudes(), &[re(1.0), re(0.0), re(0.0), re(0.0)]);
    }

    #[test]
    fn weak_coherent_vacuum_amplitude() {
        // exp(-0.076 / 2)
        let s = coherent_state(re(0.076f64.sqrt()), 6).unwrap();
        assert_abs_diff_eq!(s.amplitude(0).re, 0.962713, epsilon = 1e-5);
    }

    #[test]
    fn coherent_mean_photon_number() {
        let s = coherent_state(re(0.5f64.sqrt()), 8).unwrap();
        assert_abs_diff_eq!(s.mean_photon_number(), 0.5, epsilon = 1e-6);
    }

    #[test]
    fn coherent_rejects_short_cutoff() {
        let err = coherent_state(re(2.0), 3).unwrap_err();
        assert!(matches!(err, Error::TailTooLarge { cutoff: 3, .. }));
    }

    #[test]
    fn zero_squeezing_is_coherent() {
        let p = SqueezedParams::new(re(0.3), 0.0, 0.7).unwrap();
        assert_eq!(squeezed_state(p, 8).unwrap(), coherent_state(re(0.3), 8).unwrap());
    }

    #[test]
    fn tiny_squeezing_approaches_coherent() {
        let p = SqueezedParams::from_t(C64::new(0.3, 0.2), C64::new(1e-12, 0.0)).unwrap();
        let s = squeezed_state(p, 10).unwrap();
        let c = coherent_state(C64::new(0.3, 0.2), 10).unwrap();
        for (a, b) in s.amplitudes().iter().zip(c.amplitudes()) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn squeezed_rejects_unit_t() {
        assert!(matches!(SqueezedParams::from_t(re(0.0), re(1.0)), Err(Error::InvalidSqueezing(_))));
        assert!(matches!(SqueezedParams::new(re(0.0), f64::INFINITY, 0.0), Err(Error::InvalidSqueezing(_))));
    }

    #[test]
    fn squeezed_tail_match_ratios() {
        let p = SqueezedParams::binomial_tail_match(3).unwrap();
        let s = squeezed_state(p, 40).unwrap();
        let c = s.amplitudes();
        assert_abs_diff_eq!((c[1] / c[3]).re, 3f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!((c[2] / c[3]).re, 3f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!((c[0] / c[3]).re, 1.0146, epsilon = 5e-4);
    }

    #[test]
    fn squeezed_matches_hermite_form() {
        // (t/2)^{n/2} H_n[(alpha + t alpha*)/sqrt(2t)] / sqrt(n!) with a complex t.
        let alpha = C64::new(0.7, -0.4);
        let t = C64::from_polar(0.45, 0.9);
        let p = SqueezedParams::from_t(alpha, t).unwrap();
        let s = squeezed_state(p, 30).unwrap();
        let x = (alpha + t * alpha.conj()) / (2.0 * t).sqrt();
        let mut direct: Vec<C64> = Vec::new();
        let mut fact = 1.0;
        for n in 0..=30 {
            if n > 0 {
                fact *= n as f64;
            }
            direct.push((t / 2.0).sqrt().powu(n as u32) * hermite_complex(n, x) / fact.sqrt());
        }
        let direct = FockVector::from_amplitudes(direct).unwrap();
        let overlap = s.inner(&direct).norm();
        assert_abs_diff_eq!(overlap, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn squeezed_vacuum_variance_is_one_third() {
        let p = SqueezedParams::from_t(re(0.0), re(0.5)).unwrap();
        let s = squeezed_state(p, 120).unwrap();
        assert_abs_diff_eq!(s.min_quadrature_variance() / VACUUM_QUADRATURE_VARIANCE, 1.0 / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn head_match_follows_binomial() {
        let n = 25;
        let s = squeezed_state(SqueezedParams::binomial_head_match(n), 80).unwrap();
        let c = s.amplitudes();
        for k in 1..=4 {
            let ratio = (c[k] / c[0]).re / binomial(n, k).sqrt();
            assert!((ratio - 1.0).abs() < 0.02, "n={k}: ratio {ratio}");
        }
    }

    #[test]
    fn tail_match_general_orders() {
        for n in [2usize, 4, 5] {
            let p = SqueezedParams::binomial_tail_match(n).unwrap();
            let s = squeezed_state(p, 80).unwrap();
            let c = s.amplitudes();
            assert_abs_diff_eq!((c[n - 1] / c[n]).re, (n as f64).sqrt(), epsilon = 1e-9);
            assert_abs_diff_eq!((c[n - 2] / c[n]).re, binomial(n, 2).sqrt(), epsilon = 1e-9);
        }
        assert!(SqueezedParams::binomial_tail_match(1).is_err());
    }

    #[test]
    fn binomial_states() {
        assert_eq!(binomial_state(0).amplitudes(), &[re(1.0)]);
        let b1 = binomial_state(1);
        assert_abs_diff_eq!(b1.amplitude(0).re, 0.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(b1.amplitude(1).re, 0.5f64.sqrt(), epsilon = 1e-15);
        let b3 = binomial_state(3);
        let want = [1.0, 3f64.sqrt(), 3f64.sqrt(), 1.0].map(|x| x / 8f64.sqrt());
        for (c, w) in b3.amplitudes().iter().zip(want) {
            assert_abs_diff_eq!(c.re, w, epsilon = 1e-15);
        }
        let b7 = binomial_state(7);
        for n in 0..=7 {
            assert_abs_diff_eq!(b7.amplitude(n).re, b7.amplitude(7 - n).re, epsilon = 1e-15);
        }
    }

    #[test]
    fn phase_shift_cases() {
        let b = binomial_state(3);
        assert_eq!(phase_shift(&b, 0.0), b);
        let flipped = phase_shift(&b, PI);
        for n in 0..=3 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert_abs_diff_eq!((flipped.amplitude(n) - sign * b.amplitude(n)).norm(), 0.0, epsilon = 1e-15);
        }
        let full = phase_shift(&b, 2.0 * PI);
        for n in 0..=3 {
            assert_abs_diff_eq!((full.amplitude(n) - b.amplitude(n)).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn hermite_values() {
        assert_eq!(hermite(0, 3.7), 1.0);
        let x = 1.70711;
        assert_abs_diff_eq!(hermite(3, x), 8.0 * x * x * x - 12.0 * x, epsilon = 1e-12);
        // numpy.polynomial.hermite.hermval(1.70711, [0, 0, 0, 1])
        assert_abs_diff_eq!(hermite(3, x), 19.313895001083445, epsilon = 1e-12);
        // leading terms (2x)^n - n(n-1)(2x)^{n-2}
        let approx = 20f64.powi(5) - 20.0 * 20f64.powi(3);
        assert!((hermite(5, 10.0) / approx - 1.0).abs() < 3e-3);
        // exact integers: H_4(2) = 16*16 - 48*4 + 12
        assert_eq!(hermite(4, 2.0), 76.0);
        for n in 1..10 {
            let lhs = hermite(n + 1, 3.0);
            let rhs = 6.0 * hermite(n, 3.0) - 2.0 * n as f64 * hermite(n - 1, 3.0);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn ensemble_validation() {
        let a = binomial_state(1);
        assert!(StateEnsemble::new(vec![(0.5, a.clone()), (0.4, a.clone())]).is_err());
        assert!(StateEnsemble::new(vec![(-0.5, a.clone()), (1.5, a.clone())]).is_err());
        assert!(StateEnsemble::new(vec![(0.25, a.clone()), (0.75, a)]).is_ok());
    }

    #[test]
    fn spec_round_trip() {
        let json = r#"{"kind":"ensemble","members":[
            {"weight":0.5,"state":{"kind":"coherent","mean_photons":0.076}},
            {"weight":0.5,"state":{"kind":"squeezed_binomial_match","n":3}}]}"#;
        let spec: StateSpec = serde_json::from_str(json).unwrap();
        let state = spec.build().unwrap();
        assert!(matches!(state, State::Mixed(_)));
        let again: StateSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(spec, again);
        let bad = r#"{"kind":"coherent","alpha":[1,0],"mean_photons":1}"#;
        let spec: StateSpec = serde_json::from_str(bad).unwrap();
        assert!(spec.build().is_err());
    }

    #[test]
    fn auto_cutoff_converges() {
        let spec = StateSpec::Coherent { alpha: None, mean_photons: Some(0.5), phase: None, cutoff: None };
        let s = spec.build_pure().unwrap();
        assert!(coherent_tail(0.5, s.cutoff()) < 1e-15);
        let top = s.amplitude(s.cutoff()).norm_sqr() + s.amplitude(s.cutoff() - 1).norm_sqr();
        assert!(top < AUTO_CUTOFF_FLOOR);
        let vac = StateSpec::Coherent { alpha: Some([0.0, 0.0]), mean_photons: None, phase: None, cutoff: None };
        assert_eq!(vac.build_pure().unwrap().cutoff(), 2);
        let sq = StateSpec::SqueezedBinomialMatch { n: 3, cutoff: None }.build_pure().unwrap();
        assert!(sq.amplitude(sq.cutoff()).norm_sqr() < AUTO_CUTOFF_FLOOR);
    }

    fn coherent_tail(mean: f64, cutoff: usize) -> f64 {
        let mut term = (-mean).exp();
        let mut kept = term;
        for n in 1..=cutoff {
            term *= mean / n as f64;
            kept += term;
        }
        1.0 - kept
    }
}
