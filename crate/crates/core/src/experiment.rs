//! End-to-end simulation of the multiport measurement: assemble the input,
//! evolve, extract the desired events, sweep the reference phase and compare
//! the synthesized points with the canonical distribution.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::{
    apply_efficiency, desired_event_index, invert_efficiency_report, DetectorModel, InversionReport,
    JointCountDistribution,
};
use crate::error::{Error, Result};
use crate::fock::{phase_shift, FockVector, Mixture, State, StateSpec};
use crate::optics::{
    dft_multiport, evolve_with, Engine, EvolveOptions, ModeTransform, MultiModeState, Occupation, DEFAULT_PHOTON_LIMIT,
};
use crate::phase::{
    canonical_density, canonical_distribution, comb_angle, normalize_counts, normalize_tallies, uniform_grid,
    wrap_angle, PhaseDistribution, PhasePoint, Provenance,
};

/// Name of the generator used by [`run_monte_carlo`], recorded in diagnostics.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.9), stream = setting << 32 | chunk";

/// Trials drawn from one RNG stream.
const CHUNK: u64 = 1 << 16;

fn default_order() -> usize {
    3
}
fn default_settings() -> usize {
    4
}
fn default_trials() -> u64 {
    100_000
}
fn default_max_photons() -> usize {
    DEFAULT_PHOTON_LIMIT
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// State measured, in input port 0.
    pub signal: StateSpec,
    /// Reference state, in input port 1.
    pub reference: StateSpec,
    /// Multiport order `N`; the device has `N + 1` ports.
    #[serde(default = "default_order", alias = "N")]
    pub order: usize,
    /// Reference-phase settings `K`, stepped by `(2 pi/(N+1))/K`.
    #[serde(default = "default_settings")]
    pub sweep_settings: usize,
    #[serde(default = "default_trials")]
    pub trials_per_setting: u64,
    #[serde(default)]
    pub detector: DetectorModel,
    #[serde(default)]
    pub correct_efficiency: bool,
    #[serde(default)]
    pub seed: u64,
    /// Input terms with more photons than this are dropped.
    #[serde(default = "default_max_photons")]
    pub max_photons: usize,
    #[serde(default)]
    pub engine: Engine,
}

impl ExperimentConfig {
    pub fn new(signal: StateSpec, reference: StateSpec) -> Self {
        Self {
            signal,
            reference,
            order: default_order(),
            sweep_settings: default_settings(),
            trials_per_setting: default_trials(),
            detector: DetectorModel::ideal(),
            correct_efficiency: false,
            seed: 0,
            max_photons: default_max_photons(),
            engine: Engine::default(),
        }
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(json)?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 1 {
            return Err(Error::Config("order must be at least 1".into()));
        }
        if self.sweep_settings < 1 {
            return Err(Error::Config("sweep_settings must be at least 1".into()));
        }
        if self.trials_per_setting < 1 {
            return Err(Error::Config("trials_per_setting must be at least 1".into()));
        }
        if self.max_photons < self.order {
            return Err(Error::Config(format!(
                "max_photons {} cannot hold the {} photons of a desired event",
                self.max_photons, self.order
            )));
        }
        self.detector.validate()
    }

    /// Reference-phase offsets `k (2 pi/(N+1))/K`, `k = 0..K`.
    pub fn phase_settings(&self) -> Vec<f64> {
        let step = TAU / (self.order + 1) as f64 / self.sweep_settings as f64;
        (0..self.sweep_settings).map(|k| k as f64 * step).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SettingResult {
    /// Reference phase offset.
    pub delta_theta: f64,
    /// Angle sampled by each desired event, indexed by the empty detector.
    pub thetas: Vec<f64>,
    /// Probability (exact) or frequency (Monte Carlo) of each desired event.
    pub event_probs: Vec<f64>,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stderr: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tallies: Option<Vec<u64>>,
    /// Total probability of the desired events.
    pub desired_rate: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Signal probability above `n = N`, which the measurement cannot see.
    pub signal_tail: f64,
    /// Largest input probability dropped by the photon budget over settings.
    pub dropped_mass: f64,
    pub max_photons: usize,
    pub engine: Engine,
    /// Set when detectors have unequal efficiencies.
    pub mixed_efficiency: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inversion: Option<InversionReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials_per_setting: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// `(N+1) K` points sorted by angle.
    pub points: PhaseDistribution,
    pub settings: Vec<SettingResult>,
    /// Mean desired-event probability per run.
    pub desired_event_rate: f64,
    pub diagnostics: Diagnostics,
}

impl SweepResult {
    pub fn raw_event_probs(&self) -> Vec<Vec<f64>> {
        self.settings.iter().map(|s| s.event_probs.clone()).collect()
    }
}

/// `4N`: the highest Fourier component of a phase distribution seen through
/// `N + 1` ports is `exp(i N theta)`; two samples per period over `N` periods
/// with a factor 2 margin.
pub fn minimum_point_count(order: usize) -> usize {
    4 * order
}

struct Prepared {
    signal: State,
    reference: State,
    device: ModeTransform,
    opts: EvolveOptions,
}

fn prepare(config: &ExperimentConfig) -> Result<Prepared> {
    config.validate()?;
    Ok(Prepared {
        signal: config.signal.build()?,
        reference: config.reference.build()?,
        device: dft_multiport(config.order)?,
        opts: EvolveOptions { photon_limit: config.max_photons, engine: config.engine },
    })
}

/// Ideal joint count distribution at one reference offset, weighted over
/// mixture members. Probabilities are physical: mass beyond the photon
/// budget is missing, not renormalized away. Also returns the dropped mass.
fn ideal_distribution(p: &Prepared, config: &ExperimentConfig, delta: f64) -> Result<(JointCountDistribution, f64)> {
    let vacuum = FockVector::vacuum();
    let mut probs: BTreeMap<Occupation, f64> = BTreeMap::new();
    let mut dropped_total = 0.0;
    for (ws, sig) in p.signal.components() {
        for (wr, rf) in p.reference.components() {
            // the pi offset cancels the (-1)^(N-n) sign of the multiport
            // amplitudes, so the reference enters as (-1)^k b_k
            let shifted = phase_shift(rf, PI + delta);
            let mut modes = vec![sig, &shifted];
            modes.extend(std::iter::repeat_n(&vacuum, config.order - 1));
            let (input, dropped) = MultiModeState::product_truncated(&modes, config.max_photons);
            let out = evolve_with(&input, &p.device, p.opts)?;
            let w = ws * wr;
            dropped_total += w * dropped;
            for (k, a) in out.terms() {
                *probs.entry(k.clone()).or_insert(0.0) += w * (1.0 - dropped) * a.norm_sqr();
            }
        }
    }
    Ok((JointCountDistribution::new(config.order + 1, probs)?, dropped_total))
}

fn signal_tail(p: &Prepared, order: usize) -> f64 {
    p.signal.components().iter().map(|(w, s)| w * s.mass_above(order)).sum()
}

fn merge_reports(acc: Option<InversionReport>, next: InversionReport) -> Option<InversionReport> {
    Some(match acc {
        None => next,
        Some(a) => InversionReport {
            max_cancellation: a.max_cancellation.max(next.max_cancellation),
            negative_mass: a.negative_mass.min(next.negative_mass),
            leakage: a.leakage.max(next.leakage),
        },
    })
}

fn event_thetas(order: usize, delta: f64) -> Vec<f64> {
    (0..=order).map(|m| wrap_angle(comb_angle(m, order) + delta)).collect()
}

fn assemble(settings: Vec<SettingResult>, provenance: Provenance, diagnostics: Diagnostics) -> SweepResult {
    let mut points: Vec<PhasePoint> = settings
        .iter()
        .flat_map(|s| {
            s.thetas.iter().enumerate().map(move |(m, &theta)| PhasePoint {
                theta,
                value: s.values[m],
                stderr: s.stderr.as_ref().map(|e| e[m]),
            })
        })
        .collect();
    points.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    let desired_event_rate = settings.iter().map(|s| s.desired_rate).sum::<f64>() / settings.len() as f64;
    SweepResult { points: PhaseDistribution { points, provenance }, settings, desired_event_rate, diagnostics }
}

/// Exact probabilities for every setting.
pub fn run_exact(config: &ExperimentConfig) -> Result<SweepResult> {
    let p = prepare(config)?;
    let per_setting: Vec<Result<(SettingResult, f64, Option<InversionReport>)>> = config
        .phase_settings()
        .into_par_iter()
        .map(|delta| {
            let (mut dist, dropped) = ideal_distribution(&p, config, delta)?;
            let mut report = None;
            if !config.detector.is_ideal() {
                dist = apply_efficiency(&dist, &config.detector)?;
                if config.correct_efficiency {
                    let (inv, r) = invert_efficiency_report(&dist, &config.detector)?;
                    dist = inv;
                    report = Some(r);
                }
            }
            let event_probs = dist.desired_event_probabilities();
            let values = normalize_counts(&event_probs)?;
            let setting = SettingResult {
                delta_theta: delta,
                thetas: event_thetas(config.order, delta),
                desired_rate: event_probs.iter().sum(),
                event_probs,
                values,
                stderr: None,
                tallies: None,
            };
            Ok((setting, dropped, report))
        })
        .collect();
    let mut settings = Vec::new();
    let mut diagnostics = Diagnostics {
        signal_tail: signal_tail(&p, config.order),
        max_photons: config.max_photons,
        engine: config.engine,
        mixed_efficiency: !config.detector.is_uniform(),
        ..Default::default()
    };
    for r in per_setting {
        let (s, dropped, report) = r?;
        diagnostics.dropped_mass = diagnostics.dropped_mass.max(dropped);
        if let Some(rep) = report {
            diagnostics.inversion = merge_reports(diagnostics.inversion.take(), rep);
        }
        settings.push(s);
    }
    Ok(assemble(settings, Provenance::ExactSimulated, diagnostics))
}

#[derive(Default)]
struct ChunkTally {
    desired: Vec<u64>,
    histogram: BTreeMap<Occupation, u64>,
}

struct Sampler<'a> {
    outcomes: Vec<&'a Occupation>,
    cdf: Vec<f64>,
    /// `thinning[d][c]`: registered-count distribution for `c` photons on detector `d`.
    thinning: Option<Vec<Vec<Binomial>>>,
    keep_histogram: bool,
}

impl<'a> Sampler<'a> {
    fn new(dist: &'a JointCountDistribution, model: &DetectorModel, keep_histogram: bool) -> Result<Self> {
        let mut acc = 0.0;
        let (outcomes, cdf) = dist
            .probs()
            .iter()
            .map(|(k, p)| {
                acc += p;
                (k, acc)
            })
            .unzip();
        let thinning = if model.is_ideal() {
            None
        } else {
            let max = dist.cutoff() as u64;
            let table = (0..dist.num_detectors())
                .map(|d| {
                    (0..=max)
                        .map(|c| Binomial::new(c, model.eta(d)).map_err(|e| Error::Config(e.to_string())))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Some(table)
        };
        Ok(Self { outcomes, cdf, thinning, keep_histogram })
    }

    fn run_chunk(&self, rng: &mut ChaCha8Rng, trials: u64, detectors: usize) -> ChunkTally {
        let mut tally = ChunkTally { desired: vec![0; detectors], histogram: BTreeMap::new() };
        let mut counts: Occupation = vec![0; detectors];
        for _ in 0..trials {
            let u: f64 = rng.random();
            let idx = self.cdf.partition_point(|&c| c <= u);
            // beyond the last entry lies the mass dropped by the photon
            // budget, which never yields a desired event
            let Some(ideal) = self.outcomes.get(idx) else {
                continue;
            };
            counts.copy_from_slice(ideal);
            if let Some(table) = &self.thinning {
                for (d, c) in counts.iter_mut().enumerate() {
                    if *c > 0 {
                        *c = table[d][*c as usize].sample(rng) as u32;
                    }
                }
            }
            if let Some(m) = desired_event_index(&counts) {
                tally.desired[m] += 1;
            }
            if self.keep_histogram {
                *tally.histogram.entry(counts.clone()).or_insert(0) += 1;
            }
        }
        tally
    }
}

fn sample_setting(dist: &JointCountDistribution, config: &ExperimentConfig, setting: usize) -> Result<ChunkTally> {
    let correcting = config.correct_efficiency && !config.detector.is_ideal();
    let sampler = Sampler::new(dist, &config.detector, correcting)?;
    let detectors = dist.num_detectors();
    let trials = config.trials_per_setting;
    let chunks = trials.div_ceil(CHUNK);
    let tallies: Vec<ChunkTally> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(((setting as u64) << 32) | c);
            let n = CHUNK.min(trials - c * CHUNK);
            sampler.run_chunk(&mut rng, n, detectors)
        })
        .collect();
    let mut total = ChunkTally { desired: vec![0; detectors], histogram: BTreeMap::new() };
    for t in tallies {
        for (a, b) in total.desired.iter_mut().zip(t.desired) {
            *a += b;
        }
        for (k, n) in t.histogram {
            *total.histogram.entry(k).or_insert(0) += n;
        }
    }
    Ok(total)
}

/// Draws `trials_per_setting` joint outcomes per setting from the exact
/// distribution, thins each count binomially, and tallies desired events.
/// Chunks of trials use independent ChaCha8 streams keyed by setting and
/// chunk, so the result does not depend on the thread count.
///
/// With `correct_efficiency` the observed joint histogram is inverted and
/// the corrected points carry no error estimate.
pub fn run_monte_carlo(config: &ExperimentConfig) -> Result<SweepResult> {
    let p = prepare(config)?;
    let mut settings = Vec::new();
    let mut diagnostics = Diagnostics {
        signal_tail: signal_tail(&p, config.order),
        max_photons: config.max_photons,
        engine: config.engine,
        mixed_efficiency: !config.detector.is_uniform(),
        rng: Some(RNG_ALGORITHM.into()),
        seed: Some(config.seed),
        trials_per_setting: Some(config.trials_per_setting),
        ..Default::default()
    };
    let trials = config.trials_per_setting as f64;
    for (k, delta) in config.phase_settings().into_iter().enumerate() {
        let (dist, dropped) = ideal_distribution(&p, config, delta)?;
        diagnostics.dropped_mass = diagnostics.dropped_mass.max(dropped);
        let tally = sample_setting(&dist, config, k)?;
        let raw: Vec<f64> = tally.desired.iter().map(|&n| n as f64 / trials).collect();
        let (event_probs, values, stderr) = if config.correct_efficiency && !config.detector.is_ideal() {
            let empirical = tally.histogram.iter().map(|(c, &n)| (c.clone(), n as f64 / trials)).collect();
            let empirical = JointCountDistribution::new(dist.num_detectors(), empirical)?;
            let (inv, report) = invert_efficiency_report(&empirical, &config.detector)?;
            diagnostics.inversion = merge_reports(diagnostics.inversion.take(), report);
            let probs = inv.desired_event_probabilities();
            let values = normalize_counts(&probs)?;
            (probs, values, None)
        } else {
            let (values, err) = normalize_tallies(&tally.desired)?.into_iter().unzip();
            (raw.clone(), values, Some(err))
        };
        settings.push(SettingResult {
            delta_theta: delta,
            thetas: event_thetas(config.order, delta),
            desired_rate: raw.iter().sum(),
            event_probs,
            values,
            stderr,
            tallies: Some(tally.desired),
        });
    }
    Ok(assemble(settings, Provenance::MonteCarlo, diagnostics))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DeviationMetrics {
    pub max_abs: f64,
    pub rms: f64,
    /// Largest `|y - P| / P` over points where `P > 0`.
    pub max_relative: f64,
}

fn deviation(pairs: impl Iterator<Item = (f64, f64)>) -> DeviationMetrics {
    let mut m = DeviationMetrics::default();
    let mut sq = 0.0;
    let mut n = 0usize;
    for (got, want) in pairs {
        let d = (got - want).abs();
        m.max_abs = m.max_abs.max(d);
        if want > 0.0 {
            m.max_relative = m.max_relative.max(d / want);
        }
        sq += d * d;
        n += 1;
    }
    if n > 0 {
        m.rms = (sq / n as f64).sqrt();
    }
    m
}

/// Deviation of the synthesized points from the canonical density of `truth`
/// at the same angles.
pub fn compare_to_canonical<M: Mixture + ?Sized>(result: &SweepResult, truth: &M) -> DeviationMetrics {
    deviation(result.points.points.iter().map(|p| (p.value, canonical_density(truth, p.theta))))
}

/// Pointwise deviation of `result` from `baseline`; both must sample the same
/// angles.
pub fn compare_results(result: &SweepResult, baseline: &SweepResult) -> Result<DeviationMetrics> {
    let (a, b) = (&result.points.points, &baseline.points.points);
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: b.len(), got: a.len() });
    }
    if a.iter().zip(b).any(|(x, y)| (x.theta - y.theta).abs() > 1e-12) {
        return Err(Error::Config("results sample different angles".into()));
    }
    Ok(deviation(a.iter().zip(b).map(|(x, y)| (x.value, y.value))))
}

/// Canonical density of the configured signal on `points` equally spaced
/// angles.
pub fn analytic_curve(config: &ExperimentConfig, points: usize) -> Result<PhaseDistribution> {
    let signal = config.signal.build()?;
    Ok(canonical_distribution(&signal, &uniform_grid(points)))
}
