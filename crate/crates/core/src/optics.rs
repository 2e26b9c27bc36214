//! Linear-optical networks and exact Fock-space evolution through them.
//!
//! A [`ModeTransform`] acts on input creation operators,
//! `a_j† -> sum_i M_ij a_i†`, so column `j` is the image of a photon entering
//! mode `j`. Networks compose element matrices in the order light meets them.
//!
//! The printed DFT coupling matrix `U_ij = w^{ij} / sqrt(N+1)` relates the
//! modes the other way round (`R† a_j† R = sum_i U_ij a_i†`); the physical
//! multiport therefore carries the state along `U†`, see [`dft_multiport`].

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{binomial, FockVector};

/// Residual allowed when a user-supplied matrix is checked for unitarity.
pub const UNITARY_TOL: f64 = 1e-10;

/// Default cap on the photon total of any term passed to an engine.
pub const DEFAULT_PHOTON_LIMIT: usize = 12;

/// Photon numbers per mode.
pub type Occupation = Vec<u32>;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// A unitary mode-coupling matrix with a global phase.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeTransform {
    matrix: DMatrix<C64>,
    global_phase: f64,
}

impl ModeTransform {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        Self::with_global_phase(matrix, 0.0)
    }

    pub fn with_global_phase(matrix: DMatrix<C64>, global_phase: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), got: matrix.ncols() });
        }
        let t = Self { matrix, global_phase };
        let residual = t.unitarity_residual();
        if !(residual < UNITARY_TOL) {
            return Err(Error::NotUnitary(residual));
        }
        Ok(t)
    }

    pub fn identity(num_modes: usize) -> Self {
        Self { matrix: DMatrix::identity(num_modes, num_modes), global_phase: 0.0 }
    }

    pub fn num_modes(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn global_phase(&self) -> f64 {
        self.global_phase
    }

    /// `exp(i gamma) M`.
    pub fn effective(&self) -> DMatrix<C64> {
        &self.matrix * C64::from_polar(1.0, self.global_phase)
    }

    pub fn adjoint(&self) -> Self {
        Self { matrix: self.matrix.adjoint(), global_phase: -self.global_phase }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &ModeTransform) -> Self {
        Self { matrix: &next.matrix * &self.matrix, global_phase: self.global_phase + next.global_phase }
    }

    /// `max |(M†M - I)_ij|`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.matrix.nrows();
        let prod = self.matrix.adjoint() * &self.matrix;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, j)] - target).norm());
            }
        }
        worst
    }

    /// Largest entrywise difference from `other` after removing one phase per
    /// output row (which also absorbs any global phase).
    pub fn residual_up_to_output_phases(&self, other: &ModeTransform) -> f64 {
        let a = self.effective();
        let b = other.effective();
        if a.shape() != b.shape() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..a.nrows() {
            let overlap: C64 = (0..a.ncols()).map(|j| b[(i, j)].conj() * a[(i, j)]).sum();
            let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { C64::new(1.0, 0.0) };
            for j in 0..a.ncols() {
                worst = worst.max((a[(i, j)] - phase * b[(i, j)]).norm());
            }
        }
        worst
    }

    /// Largest entrywise difference from `other` after removing one global phase.
    pub fn residual_up_to_global_phase(&self, other: &ModeTransform) -> f64 {
        let a = self.effective();
        let b = other.effective();
        if a.shape() != b.shape() {
            return f64::INFINITY;
        }
        let overlap: C64 = a.iter().zip(b.iter()).map(|(x, y)| y.conj() * x).sum();
        let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { C64::new(1.0, 0.0) };
        a.iter().zip(b.iter()).map(|(x, y)| (x - phase * y).norm()).fold(0.0, f64::max)
    }

    /// Row-major `[[ [re, im], ... ], ...]` export of `exp(i gamma) M`.
    pub fn to_rows(&self) -> Vec<Vec<[f64; 2]>> {
        let m = self.effective();
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
    }

    pub fn from_rows(rows: &[Vec<[f64; 2]>]) -> Result<Self> {
        let n = rows.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            for (j, z) in row.iter().enumerate() {
                m[(i, j)] = C64::new(z[0], z[1]);
            }
        }
        Self::new(m)
    }
}

/// Symmetric 50:50 beam splitter, `b† -> (b† + i c†)/sqrt 2`, `c† -> (i b† + c†)/sqrt 2`.
pub fn beam_splitter_matrix() -> ModeTransform {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    let q = I * FRAC_1_SQRT_2;
    ModeTransform { matrix: DMatrix::from_row_slice(2, 2, &[h, q, q, h]), global_phase: 0.0 }
}

/// `U_ij = w^{ij} / sqrt(N+1)` with `w = exp(-2 pi i / (N+1))`.
pub fn dft_transform(n: usize) -> Result<ModeTransform> {
    if n < 1 {
        return Err(Error::Config("DFT multiport order must be at least 1".into()));
    }
    let d = n + 1;
    let scale = (d as f64).sqrt().recip();
    let matrix = DMatrix::from_fn(d, d, |i, j| {
        // reduce the exponent first so large i*j stay exact
        let k = (i * j) % d;
        C64::from_polar(scale, -2.0 * PI * k as f64 / d as f64)
    });
    Ok(ModeTransform { matrix, global_phase: 0.0 })
}

/// Creation-operator map of the DFT multiport, `dft_transform(n)†`. A
/// detection pattern with detector `m` dark and one count elsewhere then
/// projects the signal onto the truncated phase state at `2 pi m / (N+1)`.
pub fn dft_multiport(n: usize) -> Result<ModeTransform> {
    Ok(dft_transform(n)?.adjoint())
}

/// One element of a network.
///
/// JSON form: `{"bs": [a, b]}`, `{"ps": [mode, theta]}` or `{"swap": [a, b]}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum NetworkElement {
    #[serde(rename = "bs")]
    BeamSplitter(usize, usize),
    #[serde(rename = "ps")]
    PhaseShifter(usize, f64),
    /// Waveguide crossing: exchanges the labels of two modes.
    #[serde(rename = "swap")]
    Swap(usize, usize),
}

impl NetworkElement {
    fn modes(&self) -> Vec<usize> {
        match *self {
            NetworkElement::BeamSplitter(a, b) | NetworkElement::Swap(a, b) => vec![a, b],
            NetworkElement::PhaseShifter(k, _) => vec![k],
        }
    }

    fn validate(&self, num_modes: usize) -> Result<()> {
        for index in self.modes() {
            if index >= num_modes {
                return Err(Error::ModeOutOfRange { index, num_modes });
            }
        }
        match *self {
            NetworkElement::BeamSplitter(a, b) | NetworkElement::Swap(a, b) if a == b => {
                Err(Error::DegenerateBeamSplitter(a))
            }
            NetworkElement::PhaseShifter(_, theta) if !theta.is_finite() => {
                Err(Error::Config("phase shift must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    fn embedded(&self, num_modes: usize) -> DMatrix<C64> {
        let mut m = DMatrix::identity(num_modes, num_modes);
        match *self {
            NetworkElement::BeamSplitter(a, b) => {
                let bs = beam_splitter_matrix().matrix;
                m[(a, a)] = bs[(0, 0)];
                m[(a, b)] = bs[(0, 1)];
                m[(b, a)] = bs[(1, 0)];
                m[(b, b)] = bs[(1, 1)];
            }
            NetworkElement::PhaseShifter(k, theta) => m[(k, k)] = C64::from_polar(1.0, theta),
            NetworkElement::Swap(a, b) => m.swap_rows(a, b),
        }
        m
    }
}

/// An ordered list of elements acting on `num_modes` modes.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    num_modes: usize,
    elements: Vec<NetworkElement>,
}

impl Network {
    pub fn new(num_modes: usize, elements: Vec<NetworkElement>) -> Result<Self> {
        for e in &elements {
            e.validate(num_modes)?;
        }
        Ok(Self { num_modes, elements })
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn elements(&self) -> &[NetworkElement] {
        &self.elements
    }

    /// Parses the element-list JSON; the mode count is the largest index + 1
    /// unless `num_modes` is given.
    pub fn from_json(json: &str, num_modes: Option<usize>) -> Result<Self> {
        let elements: Vec<NetworkElement> = serde_json::from_str(json)?;
        let inferred = elements.iter().flat_map(|e| e.modes()).max().map_or(0, |m| m + 1);
        Self::new(num_modes.unwrap_or(inferred), elements)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.elements).expect("network elements serialize")
    }
}

/// Eight-port interferometer: four 50:50 splitters on the
/// corners of a square with a `-i` shifter on one internal arm, the `-i`
/// reference-port shifter (plus `ref_phase`), and convenience shifters on
/// input 2 and outputs 1-3. Composes exactly to [`dft_multiport`]`(3)`.
pub fn eight_port_network(ref_phase: f64) -> Network {
    use NetworkElement::*;
    let minus_i = -FRAC_PI_2;
    Network::new(
        4,
        vec![
            PhaseShifter(1, minus_i + ref_phase),
            PhaseShifter(2, minus_i),
            BeamSplitter(0, 2),
            BeamSplitter(1, 3),
            PhaseShifter(3, minus_i),
            BeamSplitter(0, 3),
            BeamSplitter(1, 2),
            Swap(2, 3),
            PhaseShifter(1, -PI),
            PhaseShifter(2, minus_i),
            PhaseShifter(3, minus_i),
        ],
    )
    .expect("eight-port layout is valid")
}

/// Ordered product of the element matrices.
pub fn compose(network: &Network) -> ModeTransform {
    let n = network.num_modes;
    let matrix = network.elements.iter().fold(DMatrix::identity(n, n), |acc, e| e.embedded(n) * acc);
    ModeTransform { matrix, global_phase: 0.0 }
}

/// A pure state of several modes, stored sparsely by occupation tuple.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiModeState {
    num_modes: usize,
    terms: BTreeMap<Occupation, C64>,
}

impl MultiModeState {
    pub fn new(num_modes: usize, terms: BTreeMap<Occupation, C64>) -> Result<Self> {
        if let Some(bad) = terms.keys().find(|k| k.len() != num_modes) {
            return Err(Error::DimensionMismatch { expected: num_modes, got: bad.len() });
        }
        let state = Self { num_modes, terms };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized(norm));
        }
        Ok(state)
    }

    /// Single basis state `|occupation>`.
    pub fn basis(occupation: Occupation) -> Self {
        let num_modes = occupation.len();
        let mut terms = BTreeMap::new();
        terms.insert(occupation, C64::new(1.0, 0.0));
        Self { num_modes, terms }
    }

    pub fn vacuum(num_modes: usize) -> Self {
        Self::basis(vec![0; num_modes])
    }

    /// Tensor product of single-mode states.
    pub fn product(modes: &[&FockVector]) -> Self {
        Self::product_truncated(modes, usize::MAX).0
    }

    /// Tensor product keeping only terms with at most `max_total` photons,
    /// renormalized. Also returns the probability that was dropped.
    pub fn product_truncated(modes: &[&FockVector], max_total: usize) -> (Self, f64) {
        let mut terms: BTreeMap<Occupation, C64> = BTreeMap::new();
        terms.insert(Vec::new(), C64::new(1.0, 0.0));
        for state in modes {
            let mut next = BTreeMap::new();
            for (occ, amp) in &terms {
                let used: usize = occ.iter().map(|&n| n as usize).sum();
                for (n, c) in state.amplitudes().iter().enumerate() {
                    if used.saturating_add(n) > max_total {
                        break;
                    }
                    if c.norm_sqr() == 0.0 {
                        continue;
                    }
                    let mut o = occ.clone();
                    o.push(n as u32);
                    next.insert(o, amp * c);
                }
            }
            terms = next;
        }
        let kept: f64 = terms.values().map(|c| c.norm_sqr()).sum();
        let dropped = (1.0 - kept).max(0.0);
        if kept > 0.0 && dropped > 0.0 {
            let scale = kept.sqrt().recip();
            terms.values_mut().for_each(|c| *c *= scale);
        }
        (Self { num_modes: modes.len(), terms }, dropped)
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn terms(&self) -> &BTreeMap<Occupation, C64> {
        &self.terms
    }

    pub fn amplitude(&self, occupation: &[u32]) -> C64 {
        self.terms.get(occupation).copied().unwrap_or_default()
    }

    pub fn probability(&self, occupation: &[u32]) -> f64 {
        self.amplitude(occupation).norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn max_photons(&self) -> usize {
        self.terms.keys().map(total).max().unwrap_or(0)
    }

    /// Largest `|a - b|` over the union of both supports.
    pub fn max_amplitude_difference(&self, other: &MultiModeState) -> f64 {
        self.terms
            .keys()
            .chain(other.terms.keys())
            .map(|k| (self.amplitude(k) - other.amplitude(k)).norm())
            .fold(0.0, f64::max)
    }

    fn guard(&self, limit: usize) -> Result<()> {
        let total = self.max_photons();
        if total > limit {
            return Err(Error::PhotonLimit { total, limit });
        }
        Ok(())
    }
}

fn total(occ: &Occupation) -> usize {
    occ.iter().map(|&n| n as usize).sum()
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// All occupation tuples of `num_modes` modes with `total` photons, in
/// lexicographic order.
pub fn occupations(num_modes: usize, total: usize) -> Vec<Occupation> {
    fn rec(prefix: &mut Occupation, left: usize, remaining: u32, out: &mut Vec<Occupation>) {
        if left == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for n in 0..=remaining {
            prefix.push(n);
            rec(prefix, left - 1, remaining - n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if num_modes == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(&mut Vec::with_capacity(num_modes), num_modes, total as u32, &mut out);
    out
}

/// Matrix permanent: direct expansion up to dimension 4, Ryser's
/// inclusion-exclusion formula (Gray-code order) above.
pub fn permanent(m: &DMatrix<C64>) -> C64 {
    assert!(m.is_square(), "permanent of a non-square matrix");
    let n = m.nrows();
    match n {
        0 => C64::new(1.0, 0.0),
        1..=4 => permanent_direct(m, 0, &mut [false; 4]),
        _ => permanent_ryser(m),
    }
}

fn permanent_direct(m: &DMatrix<C64>, row: usize, used: &mut [bool; 4]) -> C64 {
    let n = m.nrows();
    if row == n {
        return C64::new(1.0, 0.0);
    }
    let mut sum = C64::default();
    for col in 0..n {
        if !used[col] {
            used[col] = true;
            sum += m[(row, col)] * permanent_direct(m, row + 1, used);
            used[col] = false;
        }
    }
    sum
}

fn permanent_ryser(m: &DMatrix<C64>) -> C64 {
    let n = m.nrows();
    let mut row_sums = vec![C64::default(); n];
    let mut total = C64::default();
    let mut gray: u64 = 0;
    for k in 1u64..(1u64 << n) {
        let next = k ^ (k >> 1);
        let changed = (gray ^ next).trailing_zeros() as usize;
        let added = next & (1 << changed) != 0;
        for (i, s) in row_sums.iter_mut().enumerate() {
            if added {
                *s += m[(i, changed)];
            } else {
                *s -= m[(i, changed)];
            }
        }
        gray = next;
        let prod: C64 = row_sums.iter().product();
        if next.count_ones() % 2 == 1 {
            total -= prod;
        } else {
            total += prod;
        }
    }
    if n % 2 == 1 {
        -total
    } else {
        total
    }
}

/// `<output| R |input>` computed from the permanent of the submatrix that
/// repeats row `i` `output_i` times and column `j` `input_j` times.
pub fn transition_amplitude(u: &DMatrix<C64>, input: &[u32], output: &[u32]) -> C64 {
    let rows: Vec<usize> = output.iter().enumerate().flat_map(|(i, &k)| std::iter::repeat_n(i, k as usize)).collect();
    let cols: Vec<usize> = input.iter().enumerate().flat_map(|(j, &k)| std::iter::repeat_n(j, k as usize)).collect();
    if rows.len() != cols.len() {
        return C64::default();
    }
    let sub = DMatrix::from_fn(rows.len(), cols.len(), |r, c| u[(rows[r], cols[c])]);
    let norm: f64 = input.iter().chain(output).map(|&k| factorial(k)).product();
    permanent(&sub) / norm.sqrt()
}

/// How [`evolve_with`] obtains transition amplitudes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    /// Expands `prod_j (sum_i M_ij a_i†)^{n_j}` monomial by monomial. Each
    /// coefficient equals the repeated-submatrix permanent; the expansion
    /// stays accurate at photon totals where Ryser's alternating sum cancels.
    #[default]
    Expansion,
    /// Evaluates every submatrix permanent with [`permanent`].
    Submatrix,
}

#[derive(Clone, Copy, Debug)]
pub struct EvolveOptions {
    pub photon_limit: usize,
    pub engine: Engine,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { photon_limit: DEFAULT_PHOTON_LIMIT, engine: Engine::default() }
    }
}

/// Exact image of `state` under `transform` with default options.
pub fn evolve(state: &MultiModeState, transform: &ModeTransform) -> Result<MultiModeState> {
    evolve_with(state, transform, EvolveOptions::default())
}

pub fn evolve_with(state: &MultiModeState, transform: &ModeTransform, opts: EvolveOptions) -> Result<MultiModeState> {
    if transform.num_modes() != state.num_modes {
        return Err(Error::DimensionMismatch { expected: state.num_modes, got: transform.num_modes() });
    }
    state.guard(opts.photon_limit)?;
    let u = transform.effective();
    let inputs: Vec<(&Occupation, &C64)> = state.terms.iter().collect();
    let contributions: Vec<Vec<(Occupation, C64)>> = inputs
        .par_iter()
        .map(|(occ, amp)| match opts.engine {
            Engine::Expansion => expand_term(&u, occ, **amp),
            Engine::Submatrix => occupations(state.num_modes, total(occ))
                .into_iter()
                .map(|out| {
                    let a = **amp * transition_amplitude(&u, occ, &out);
                    (out, a)
                })
                .collect(),
        })
        .collect();
    let mut terms: BTreeMap<Occupation, C64> = BTreeMap::new();
    for part in contributions {
        for (occ, amp) in part {
            *terms.entry(occ).or_default() += amp;
        }
    }
    terms.retain(|_, c| *c != C64::default());
    Ok(MultiModeState { num_modes: state.num_modes, terms })
}

/// Output amplitudes of one input basis term, scaled by `amp`.
fn expand_term(u: &DMatrix<C64>, input: &[u32], amp: C64) -> Vec<(Occupation, C64)> {
    let d = u.nrows();
    // Coefficients of monomials in the output creation operators.
    let mut poly: BTreeMap<Occupation, C64> = BTreeMap::new();
    poly.insert(vec![0; d], amp);
    for (j, &n_j) in input.iter().enumerate() {
        for _ in 0..n_j {
            let mut next: BTreeMap<Occupation, C64> = BTreeMap::new();
            for (mono, c) in &poly {
                for i in 0..d {
                    let coeff = u[(i, j)];
                    if coeff == C64::default() {
                        continue;
                    }
                    let mut m = mono.clone();
                    m[i] += 1;
                    *next.entry(m).or_default() += c * coeff;
                }
            }
            poly = next;
        }
    }
    let in_norm: f64 = input.iter().map(|&k| factorial(k)).product::<f64>().sqrt();
    poly.into_iter()
        .map(|(mono, c)| {
            let out_norm: f64 = mono.iter().map(|&k| factorial(k)).product::<f64>().sqrt();
            let scale = out_norm / in_norm;
            (mono, c * scale)
        })
        .collect()
}

/// Applies each element's own Fock-space action in turn. Independent of the
/// permanent machinery; used to cross-check `evolve(compose(network))`.
pub fn evolve_sequential(state: &MultiModeState, network: &Network) -> Result<MultiModeState> {
    evolve_sequential_with_limit(state, network, DEFAULT_PHOTON_LIMIT)
}

pub fn evolve_sequential_with_limit(
    state: &MultiModeState,
    network: &Network,
    photon_limit: usize,
) -> Result<MultiModeState> {
    if network.num_modes != state.num_modes {
        return Err(Error::DimensionMismatch { expected: state.num_modes, got: network.num_modes });
    }
    state.guard(photon_limit)?;
    let mut current = state.terms.clone();
    for element in &network.elements {
        current = match *element {
            NetworkElement::PhaseShifter(k, theta) => current
                .into_iter()
                .map(|(occ, c)| {
                    let phase = C64::from_polar(1.0, occ[k] as f64 * theta);
                    (occ, c * phase)
                })
                .collect(),
            NetworkElement::Swap(a, b) => current
                .into_iter()
                .map(|(mut occ, c)| {
                    occ.swap(a, b);
                    (occ, c)
                })
                .collect(),
            NetworkElement::BeamSplitter(a, b) => {
                let mut next: BTreeMap<Occupation, C64> = BTreeMap::new();
                for (occ, c) in current {
                    for (pa, pb, amp) in beam_splitter_fock(occ[a], occ[b]) {
                        let mut o = occ.clone();
                        o[a] = pa;
                        o[b] = pb;
                        *next.entry(o).or_default() += c * amp;
                    }
                }
                next
            }
        };
    }
    current.retain(|_, c| *c != C64::default());
    Ok(MultiModeState { num_modes: state.num_modes, terms: current })
}

/// Image of `|p, q>` under the symmetric beam splitter, from the binomial
/// expansion of `(b† + i c†)^p (i b† + c†)^q / sqrt(2^{p+q} p! q!)`.
fn beam_splitter_fock(p: u32, q: u32) -> Vec<(u32, u32, C64)> {
    let n = p + q;
    let mut coeffs = vec![C64::default(); n as usize + 1];
    for k in 0..=p {
        for l in 0..=q {
            // b^{k+l} c^{n-k-l}: i^{p-k} from (i c)^{p-k}, i^l from (i b)^l
            let c = binomial(p as usize, k as usize) * binomial(q as usize, l as usize);
            coeffs[(k + l) as usize] += I.powu(p - k + l) * c;
        }
    }
    let in_norm = (factorial(p) * factorial(q) * 2f64.powi(n as i32)).sqrt();
    coeffs
        .into_iter()
        .enumerate()
        .filter(|(_, c)| *c != C64::default())
        .map(|(out_a, c)| {
            let out_a = out_a as u32;
            let out_b = n - out_a;
            let scale = (factorial(out_a) * factorial(out_b)).sqrt() / in_norm;
            (out_a, out_b, c * scale)
        })
        .collect()
}
