//! Photodetection: zero/one/many classification, binomial loss on joint
//! count distributions, and the inverse transform that undoes it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::binomial;
use crate::optics::{MultiModeState, Occupation};

/// Inversion below this efficiency is refused by default.
pub const DEFAULT_ETA_MIN: f64 = 0.3;

/// Ratio of summed term magnitudes to the result above which inversion logs
/// a cancellation warning.
pub const CANCELLATION_WARN: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountClass {
    Zero,
    One,
    Many,
}

pub fn categorize(count: u32) -> CountClass {
    match count {
        0 => CountClass::Zero,
        1 => CountClass::One,
        _ => CountClass::Many,
    }
}

/// True when detector `zero` reads nothing and every other detector reads
/// exactly one photon.
pub fn is_desired_event(counts: &[u32], zero: usize) -> bool {
    counts.iter().enumerate().all(|(i, &c)| {
        let class = categorize(c);
        if i == zero {
            class == CountClass::Zero
        } else {
            class == CountClass::One
        }
    })
}

/// Index of the empty detector if `counts` is a desired event.
pub fn desired_event_index(counts: &[u32]) -> Option<usize> {
    let zero = counts.iter().position(|&c| c == 0)?;
    is_desired_event(counts, zero).then_some(zero)
}

/// Probability over joint photocount tuples.
#[derive(Clone, Debug, PartialEq)]
pub struct JointCountDistribution {
    num_detectors: usize,
    cutoff: u32,
    probs: BTreeMap<Occupation, f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointCountJson {
    counts: Vec<Occupation>,
    probs: Vec<f64>,
}

impl JointCountDistribution {
    /// Checks tuple lengths and non-negative probabilities; the cutoff is the
    /// largest single count present.
    pub fn new(num_detectors: usize, probs: BTreeMap<Occupation, f64>) -> Result<Self> {
        if num_detectors == 0 {
            return Err(Error::Degenerate("no detectors"));
        }
        for (k, &p) in &probs {
            if k.len() != num_detectors {
                return Err(Error::DimensionMismatch { expected: num_detectors, got: k.len() });
            }
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::Config(format!("probability {p} for counts {k:?}")));
            }
        }
        let total: f64 = probs.values().sum();
        if total > 1.0 + 1e-9 {
            return Err(Error::NotNormalized(total));
        }
        Ok(Self::unchecked(num_detectors, probs))
    }

    fn unchecked(num_detectors: usize, probs: BTreeMap<Occupation, f64>) -> Self {
        let cutoff = probs.keys().flat_map(|k| k.iter().copied()).max().unwrap_or(0);
        Self { num_detectors, cutoff, probs }
    }

    /// Photon-number statistics of an ideal measurement of every mode.
    pub fn from_state(state: &MultiModeState) -> Self {
        let probs = state.terms().iter().map(|(k, a)| (k.clone(), a.norm_sqr())).collect();
        Self::unchecked(state.num_modes(), probs)
    }

    pub fn point_mass(counts: Occupation) -> Self {
        let n = counts.len();
        Self::unchecked(n, BTreeMap::from([(counts, 1.0)]))
    }

    pub fn num_detectors(&self) -> usize {
        self.num_detectors
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn probs(&self) -> &BTreeMap<Occupation, f64> {
        &self.probs
    }

    pub fn probability(&self, counts: &[u32]) -> f64 {
        self.probs.get(counts).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    /// Sum of negative entries, which only inversion can produce.
    pub fn negative_mass(&self) -> f64 {
        self.probs.values().filter(|p| **p < 0.0).sum()
    }

    /// Probability of each desired event, indexed by the empty detector.
    pub fn desired_event_probabilities(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.num_detectors];
        for (k, &p) in &self.probs {
            if let Some(m) = desired_event_index(k) {
                out[m] += p;
            }
        }
        out
    }

    pub fn max_abs_difference(&self, other: &Self) -> f64 {
        self.probs
            .keys()
            .chain(other.probs.keys())
            .map(|k| (self.probability(k) - other.probability(k)).abs())
            .fold(0.0, f64::max)
    }

    /// `{"counts": [[m,n,p,q], ...], "probs": [...]}`.
    pub fn to_json(&self) -> String {
        let (counts, probs) = self.probs.iter().map(|(k, p)| (k.clone(), *p)).unzip();
        serde_json::to_string(&JointCountJson { counts, probs }).expect("serializable")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let raw: JointCountJson = serde_json::from_str(json)?;
        if raw.counts.len() != raw.probs.len() {
            return Err(Error::DimensionMismatch { expected: raw.counts.len(), got: raw.probs.len() });
        }
        let n = raw.counts.first().map_or(0, Vec::len);
        let mut probs = BTreeMap::new();
        for (k, p) in raw.counts.into_iter().zip(raw.probs) {
            *probs.entry(k).or_insert(0.0) += p;
        }
        Self::new(n, probs)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Efficiency {
    Uniform(f64),
    PerDetector(Vec<f64>),
}

/// One-photon detection efficiencies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorModel {
    pub eta: Efficiency,
    #[serde(default = "default_eta_min")]
    pub eta_min: f64,
}

fn default_eta_min() -> f64 {
    DEFAULT_ETA_MIN
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self::ideal()
    }
}

impl DetectorModel {
    pub fn ideal() -> Self {
        Self { eta: Efficiency::Uniform(1.0), eta_min: DEFAULT_ETA_MIN }
    }

    pub fn uniform(eta: f64) -> Result<Self> {
        let m = Self { eta: Efficiency::Uniform(eta), eta_min: DEFAULT_ETA_MIN };
        m.validate()?;
        Ok(m)
    }

    /// Distinct efficiencies per detector. The loss formula in the literature
    /// is stated for a common efficiency; this is an extension.
    pub fn per_detector(etas: Vec<f64>) -> Result<Self> {
        let m = Self { eta: Efficiency::PerDetector(etas), eta_min: DEFAULT_ETA_MIN };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |e: f64| !(0.0..=1.0).contains(&e);
        match &self.eta {
            Efficiency::Uniform(e) if bad(*e) => Err(Error::InvalidEfficiency(*e)),
            Efficiency::PerDetector(v) => match v.iter().find(|e| bad(**e)) {
                Some(e) => Err(Error::InvalidEfficiency(*e)),
                None if v.is_empty() => Err(Error::Degenerate("empty efficiency list")),
                None => Ok(()),
            },
            _ => Ok(()),
        }
    }

    pub fn eta(&self, detector: usize) -> f64 {
        match &self.eta {
            Efficiency::Uniform(e) => *e,
            Efficiency::PerDetector(v) => v[detector],
        }
    }

    fn etas(&self, num_detectors: usize) -> Result<Vec<f64>> {
        self.validate()?;
        if let Efficiency::PerDetector(v) = &self.eta {
            if v.len() != num_detectors {
                return Err(Error::DimensionMismatch { expected: num_detectors, got: v.len() });
            }
        }
        Ok((0..num_detectors).map(|i| self.eta(i)).collect())
    }

    pub fn is_uniform(&self) -> bool {
        match &self.eta {
            Efficiency::Uniform(_) => true,
            Efficiency::PerDetector(v) => v.windows(2).all(|w| w[0] == w[1]),
        }
    }

    pub fn is_ideal(&self) -> bool {
        match &self.eta {
            Efficiency::Uniform(e) => *e == 1.0,
            Efficiency::PerDetector(v) => v.iter().all(|e| *e == 1.0),
        }
    }
}

/// Replaces the count on `axis` by `k` with weight `C(s,k) x^k (1-x)^(s-k)`.
/// With `x = eta` this is photon loss; with `x = 1/eta` it is its inverse.
/// Returns the new map and, per output tuple, the summed term magnitudes.
fn bernoulli_axis(
    probs: &BTreeMap<Occupation, f64>,
    axis: usize,
    x: f64,
) -> (BTreeMap<Occupation, f64>, BTreeMap<Occupation, f64>) {
    let mut out = BTreeMap::new();
    let mut mag = BTreeMap::new();
    for (key, &p) in probs {
        let s = key[axis];
        for k in 0..=s {
            let c = binomial(s as usize, k as usize) * x.powi(k as i32) * (1.0 - x).powi((s - k) as i32) * p;
            let mut tgt = key.clone();
            tgt[axis] = k;
            *mag.entry(tgt.clone()).or_insert(0.0) += c.abs();
            *out.entry(tgt).or_insert(0.0) += c;
        }
    }
    (out, mag)
}

/// `P_c(m,n,p,q) = sum_{s>=m,...} C(s,m)...C(v,q) eta^(m+..) (1-eta)^(s-m+..) P_I(s,..)`,
/// evaluated one detector axis at a time.
pub fn apply_efficiency(ideal: &JointCountDistribution, model: &DetectorModel) -> Result<JointCountDistribution> {
    let etas = model.etas(ideal.num_detectors)?;
    let mut probs = ideal.probs.clone();
    for (axis, &eta) in etas.iter().enumerate() {
        if eta != 1.0 {
            probs = bernoulli_axis(&probs, axis, eta).0;
        }
    }
    probs.retain(|_, p| *p != 0.0);
    Ok(JointCountDistribution::unchecked(ideal.num_detectors, probs))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InversionReport {
    /// Largest ratio of summed term magnitudes to the result, over entries
    /// carrying at least 1e-12 of the total mass.
    pub max_cancellation: f64,
    /// Sum of negative entries in the result.
    pub negative_mass: f64,
    /// `1 - total` of the counted distribution: mass beyond the stored
    /// cutoff that the truncated inverse cannot see.
    pub leakage: f64,
}

/// Per-detector inverse: `p_s = sum_{m>=s} C(m,s) eta^-m (eta-1)^(m-s) q_m`.
pub fn invert_efficiency(counted: &JointCountDistribution, model: &DetectorModel) -> Result<JointCountDistribution> {
    invert_efficiency_report(counted, model).map(|(d, _)| d)
}

pub fn invert_efficiency_report(
    counted: &JointCountDistribution,
    model: &DetectorModel,
) -> Result<(JointCountDistribution, InversionReport)> {
    let etas = model.etas(counted.num_detectors)?;
    if let Some(&eta) = etas.iter().find(|&&e| e <= model.eta_min) {
        return Err(Error::UnstableInversion { eta, min: model.eta_min });
    }
    let mut probs = counted.probs.clone();
    // magnitudes are propagated through every axis so the ratio reflects the
    // full product-form sum
    let mut mags: BTreeMap<Occupation, f64> = probs.iter().map(|(k, p)| (k.clone(), p.abs())).collect();
    for (axis, &eta) in etas.iter().enumerate() {
        if eta == 1.0 {
            continue;
        }
        probs = bernoulli_axis(&probs, axis, 1.0 / eta).0;
        let (_, m) = bernoulli_axis(&mags, axis, 1.0 / eta);
        mags = m;
    }
    let total_mass = counted.total();
    let floor = 1e-12 * total_mass.abs().max(f64::MIN_POSITIVE);
    let max_cancellation = probs
        .iter()
        .filter(|(_, p)| p.abs() >= floor)
        .map(|(k, p)| mags.get(k).copied().unwrap_or(0.0) / p.abs())
        .fold(1.0, f64::max);
    if max_cancellation > CANCELLATION_WARN {
        log::warn!("efficiency inversion cancels by a factor {max_cancellation:.3e}");
    }
    probs.retain(|_, p| *p != 0.0);
    let out = JointCountDistribution::unchecked(counted.num_detectors, probs);
    let report =
        InversionReport { max_cancellation, negative_mass: out.negative_mass(), leakage: (1.0 - total_mass).max(0.0) };
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// The literal four-index sum over all ideal tuples.
    fn quadruple_sum(ideal: &JointCountDistribution, eta: f64) -> BTreeMap<Occupation, f64> {
        let c = ideal.cutoff();
        let mut out = BTreeMap::new();
        for m in 0..=c {
            for n in 0..=c {
                for p in 0..=c {
                    for q in 0..=c {
                        let mut acc = 0.0;
                        for (k, &pi) in ideal.probs() {
                            let (s, t, u, v) = (k[0], k[1], k[2], k[3]);
                            if s < m || t < n || u < p || v < q {
                                continue;
                            }
                            let kept = (m + n + p + q) as i32;
                            let lost = (s + t + u + v) as i32 - kept;
                            acc += binomial(s as usize, m as usize)
                                * binomial(t as usize, n as usize)
                                * binomial(u as usize, p as usize)
                                * binomial(v as usize, q as usize)
                                * eta.powi(kept)
                                * (1.0 - eta).powi(lost)
                                * pi;
                        }
                        if acc != 0.0 {
                            out.insert(vec![m, n, p, q], acc);
                        }
                    }
                }
            }
        }
        out
    }

    fn random_dist(raw: Vec<(Vec<u32>, f64)>) -> JointCountDistribution {
        let total: f64 = raw.iter().map(|r| r.1).sum();
        let mut probs = BTreeMap::new();
        for (k, w) in raw {
            *probs.entry(k).or_insert(0.0) += w / total;
        }
        JointCountDistribution::new(4, probs).unwrap()
    }

    fn dist_strategy(cutoff: u32) -> impl Strategy<Value = JointCountDistribution> {
        prop::collection::vec((prop::collection::vec(0..=cutoff, 4), 0.01f64..1.0), 1..40).prop_map(random_dist)
    }

    #[test]
    fn categories() {
        assert_eq!(categorize(0), CountClass::Zero);
        assert_eq!(categorize(1), CountClass::One);
        assert_eq!(categorize(3), CountClass::Many);
        assert_eq!(desired_event_index(&[1, 1, 0, 1]), Some(2));
        assert_eq!(desired_event_index(&[1, 2, 0, 1]), None);
        assert_eq!(desired_event_index(&[0, 0, 1, 1]), None);
    }

    #[test]
    fn ideal_detectors_are_identity() {
        let d = random_dist(vec![(vec![0, 1, 2, 3], 0.4), (vec![1, 1, 1, 1], 0.6)]);
        let m = DetectorModel::ideal();
        assert_eq!(apply_efficiency(&d, &m).unwrap(), d);
        assert_eq!(invert_efficiency(&d, &m).unwrap(), d);
    }

    #[test]
    fn three_photon_event_scales_by_eta_cubed() {
        for eta in [0.3, 0.6, 0.9] {
            let m = DetectorModel::uniform(eta).unwrap();
            let d = apply_efficiency(&JointCountDistribution::point_mass(vec![0, 1, 1, 1]), &m).unwrap();
            assert_abs_diff_eq!(d.probability(&[0, 1, 1, 1]), eta.powi(3), epsilon = 1e-15);
            let d = apply_efficiency(&JointCountDistribution::point_mass(vec![1, 1, 1, 1]), &m).unwrap();
            assert_abs_diff_eq!(d.probability(&[0, 1, 1, 1]), eta.powi(3) * (1.0 - eta), epsilon = 1e-15);
            assert_abs_diff_eq!(d.total(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn two_level_inversion() {
        let p = 0.37;
        let q = BTreeMap::from([(vec![0], 1.0 - 0.7 * p), (vec![1], 0.7 * p)]);
        let q = JointCountDistribution::new(1, q).unwrap();
        let back = invert_efficiency(&q, &DetectorModel::uniform(0.7).unwrap()).unwrap();
        assert_abs_diff_eq!(back.probability(&[0]), 1.0 - p, epsilon = 1e-15);
        assert_abs_diff_eq!(back.probability(&[1]), p, epsilon = 1e-15);
    }

    #[test]
    fn inversion_guard() {
        let d = JointCountDistribution::point_mass(vec![1, 0, 0, 0]);
        assert!(matches!(
            invert_efficiency(&d, &DetectorModel::uniform(0.3).unwrap()),
            Err(Error::UnstableInversion { .. })
        ));
        assert!(DetectorModel::uniform(1.2).is_err());
        assert!(DetectorModel::per_detector(vec![0.9, -0.1]).is_err());
        let three = DetectorModel::per_detector(vec![0.9; 3]).unwrap();
        assert!(matches!(apply_efficiency(&d, &three), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn uniform_scaling_cancels_in_normalization() {
        let p = [0.011, 0.023, 0.0071, 0.019];
        let eta3 = 0.6f64.powi(3);
        let a = crate::phase::normalize_counts(&p).unwrap();
        let b = crate::phase::normalize_counts(&p.map(|x| x * eta3)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-15);
        }
    }

    #[test]
    fn json_round_trip() {
        let d = random_dist(vec![(vec![0, 1, 1, 1], 0.3), (vec![2, 0, 1, 0], 0.7)]);
        let text = d.to_json();
        assert!(text.starts_with("{\"counts\":[[0,1,1,1]"));
        assert_eq!(JointCountDistribution::from_json(&text).unwrap(), d);
        assert!(JointCountDistribution::from_json(r#"{"counts":[[1]],"probs":[0.5,0.5]}"#).is_err());
        let m: DetectorModel = serde_json::from_str(r#"{"eta":[0.9,0.8,0.9,0.9]}"#).unwrap();
        assert!(!m.is_uniform());
        assert_eq!(m.eta_min, DEFAULT_ETA_MIN);
    }

    #[test]
    fn cancellation_report() {
        let d = random_dist(vec![(vec![0, 0, 0, 0], 0.5), (vec![3, 3, 3, 3], 0.5)]);
        let m = DetectorModel::uniform(0.5).unwrap();
        let counted = apply_efficiency(&d, &m).unwrap();
        let (back, report) = invert_efficiency_report(&counted, &m).unwrap();
        assert!(back.max_abs_difference(&d) < 1e-12);
        assert!(report.max_cancellation > 1.0);
        assert!(report.leakage < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn matches_quadruple_sum(d in dist_strategy(3), eta in 0.0f64..=1.0) {
            let fast = apply_efficiency(&d, &DetectorModel::uniform(eta).unwrap()).unwrap();
            let slow = quadruple_sum(&d, eta);
            for k in slow.keys().chain(fast.probs().keys()) {
                let want = slow.get(k).copied().unwrap_or(0.0);
                prop_assert!((fast.probability(k) - want).abs() < 1e-14);
            }
        }

        #[test]
        fn preserves_mass(d in dist_strategy(6), eta in 0.0f64..=1.0) {
            let out = apply_efficiency(&d, &DetectorModel::uniform(eta).unwrap()).unwrap();
            prop_assert!((out.total() - 1.0).abs() < 1e-12);
            prop_assert!(out.negative_mass() == 0.0);
        }

        #[test]
        fn round_trip(d in dist_strategy(6), eta in 0.5f64..=1.0) {
            let m = DetectorModel::uniform(eta).unwrap();
            let back = invert_efficiency(&apply_efficiency(&d, &m).unwrap(), &m).unwrap();
            prop_assert!(back.max_abs_difference(&d) < 1e-9);
        }

        #[test]
        fn round_trip_mixed_eta(d in dist_strategy(4), etas in prop::collection::vec(0.5f64..=1.0, 4)) {
            let m = DetectorModel::per_detector(etas).unwrap();
            let back = invert_efficiency(&apply_efficiency(&d, &m).unwrap(), &m).unwrap();
            prop_assert!(back.max_abs_difference(&d) < 1e-9);
        }

        #[test]
        fn all_detected_event_is_monotone(d in dist_strategy(3), lo in 0.0f64..1.0, hi in 0.0f64..1.0) {
            let (lo, hi) = if lo < hi { (lo, hi) } else { (hi, lo) };
            let pattern = [1u32, 1, 1, 1];
            let at = |eta: f64| apply_efficiency(&d, &DetectorModel::uniform(eta).unwrap()).unwrap().probability(&pattern);
            // the direct term alone is a lower bound
            prop_assert!(at(hi) >= hi.powi(4) * d.probability(&pattern) - 1e-15);
            prop_assert!(at(lo) >= lo.powi(4) * d.probability(&pattern) - 1e-15);
        }
    }
}
