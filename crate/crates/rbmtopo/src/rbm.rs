//! Complex-weight RBM networks over {0,1} visibles.
//!
//! The amplitude of a visible configuration `v` is
//!
//! ```text
//! Psi(v) = exp(log_scale + sum_i a_i v_i) * prod_j (1 + exp(theta_j)),
//! theta_j = b_j + sum_k W_kj v_k
//! ```
//!
//! with all parameters complex. Constructions in this crate arrange for
//! factors `1 + exp(theta_j)` to vanish exactly on configurations outside a
//! state's support; evaluation snaps those factors to an explicit zero
//! marker instead of returning a large negative log magnitude.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative magnitude below which a hidden factor counts as exactly zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-12;

/// Default cap on dense expansion (number of visibles).
pub const DEFAULT_DENSE_CAP: usize = 24;

/// A visible configuration. Bit 0 is the most significant position when a
/// configuration is mapped to a basis-state index (big-endian).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BitString {
    bits: Vec<u8>,
}

impl BitString {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidInput("bit values must be 0 or 1".into()));
        }
        Ok(BitString { bits })
    }

    pub fn zeros(n: usize) -> Self {
        BitString { bits: vec![0; n] }
    }

    pub fn ones(n: usize) -> Self {
        BitString { bits: vec![1; n] }
    }

    /// Decode a basis index, bit 0 most significant.
    pub fn from_index(index: usize, n: usize) -> Self {
        let bits = (0..n).map(|i| ((index >> (n - 1 - i)) & 1) as u8).collect();
        BitString { bits }
    }

    pub fn to_index(&self) -> usize {
        self.bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn parse(s: &str) -> Result<Self> {
        let bits: Result<Vec<u8>> = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Parse(format!("bad bit character {c:?}"))),
            })
            .collect();
        Ok(BitString { bits: bits? })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> u8 {
        self.bits[i]
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }
}

impl std::fmt::Display for BitString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// One hidden unit: bias plus sparse connections to visibles.
#[derive(Clone, Debug, PartialEq)]
pub struct HiddenUnit {
    pub bias: C64,
    /// (visible index, weight), sorted by index, one entry per index.
    pub weights: Vec<(usize, C64)>,
}

impl HiddenUnit {
    pub fn new(bias: C64, mut weights: Vec<(usize, C64)>) -> Self {
        weights.sort_by_key(|&(k, _)| k);
        // merge duplicate indices
        let mut merged: Vec<(usize, C64)> = Vec::with_capacity(weights.len());
        for (k, w) in weights {
            match merged.last_mut() {
                Some((k0, w0)) if *k0 == k => *w0 += w,
                _ => merged.push((k, w)),
            }
        }
        HiddenUnit { bias, weights: merged }
    }

    pub fn theta(&self, v: &BitString) -> C64 {
        let mut t = self.bias;
        for &(k, w) in &self.weights {
            if v.get(k) == 1 {
                t += w;
            }
        }
        t
    }
}

/// Amplitude in log form; `Zero` marks an exactly vanishing amplitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LogAmplitude {
    Zero,
    Finite(C64),
}

impl LogAmplitude {
    pub fn to_amplitude(self) -> C64 {
        match self {
            LogAmplitude::Zero => C64::new(0.0, 0.0),
            LogAmplitude::Finite(l) => l.exp(),
        }
    }
}

/// An RBM network with a global complex log-scale.
#[derive(Clone, Debug, PartialEq)]
pub struct RbmNetwork {
    n: usize,
    visible_bias: Vec<C64>,
    hidden: Vec<HiddenUnit>,
    log_scale: C64,
}

impl RbmNetwork {
    pub fn new(n: usize) -> Self {
        RbmNetwork {
            n,
            visible_bias: vec![C64::new(0.0, 0.0); n],
            hidden: Vec::new(),
            log_scale: C64::new(0.0, 0.0),
        }
    }

    pub fn n_visible(&self) -> usize {
        self.n
    }

    pub fn n_hidden(&self) -> usize {
        self.hidden.len()
    }

    pub fn hidden_units(&self) -> &[HiddenUnit] {
        &self.hidden
    }

    pub fn hidden_units_mut(&mut self) -> &mut [HiddenUnit] {
        &mut self.hidden
    }

    pub fn visible_biases(&self) -> &[C64] {
        &self.visible_bias
    }

    pub fn log_scale(&self) -> C64 {
        self.log_scale
    }

    pub fn add_visible_bias(&mut self, i: usize, b: C64) -> Result<()> {
        if i >= self.n {
            return Err(Error::DimensionMismatch(format!(
                "visible index {i} out of range for n={}",
                self.n
            )));
        }
        self.visible_bias[i] += b;
        Ok(())
    }

    pub fn add_log_scale(&mut self, s: C64) {
        self.log_scale += s;
    }

    pub fn add_hidden(&mut self, unit: HiddenUnit) -> Result<()> {
        if let Some(&(k, _)) = unit.weights.iter().find(|&&(k, _)| k >= self.n) {
            return Err(Error::DimensionMismatch(format!(
                "hidden weight index {k} out of range for n={}",
                self.n
            )));
        }
        self.hidden.push(unit);
        Ok(())
    }

    /// Total number of nonzero hidden-visible connections.
    pub fn weight_count(&self) -> usize {
        self.hidden.iter().map(|h| h.weights.len()).sum()
    }

    /// Fraction of present connections out of `n_hidden * n_visible`.
    pub fn sparsity(&self) -> f64 {
        let full = self.n * self.hidden.len();
        if full == 0 {
            0.0
        } else {
            self.weight_count() as f64 / full as f64
        }
    }

    pub fn log_amplitude(&self, v: &BitString) -> Result<LogAmplitude> {
        self.log_amplitude_with_tol(v, DEFAULT_ZERO_TOL)
    }

    /// Log amplitude with an explicit zero threshold. A hidden factor
    /// `1 + exp(theta)` is snapped to zero when `|1+e^theta| / (1+|e^theta|)`
    /// falls below `zero_tol`.
    pub fn log_amplitude_with_tol(&self, v: &BitString, zero_tol: f64) -> Result<LogAmplitude> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "configuration has {} bits, network has {} visibles",
                v.len(),
                self.n
            )));
        }
        let mut acc = self.log_scale;
        for (i, &b) in self.visible_bias.iter().enumerate() {
            if v.get(i) == 1 {
                acc += b;
            }
        }
        for unit in &self.hidden {
            let theta = unit.theta(v);
            // ln(1+e^theta), rearranged so the exponential never overflows
            if theta.re <= 0.0 {
                let u = theta.exp();
                let f = C64::new(1.0, 0.0) + u;
                if f.norm() < zero_tol * (1.0 + u.norm()) {
                    return Ok(LogAmplitude::Zero);
                }
                acc += f.ln();
            } else {
                let u = (-theta).exp();
                let f = C64::new(1.0, 0.0) + u;
                if f.norm() < zero_tol * (1.0 + u.norm()) {
                    return Ok(LogAmplitude::Zero);
                }
                acc += theta + f.ln();
            }
        }
        if !acc.re.is_finite() || !acc.im.is_finite() {
            return Err(Error::NonFinite(format!("log amplitude at {v}")));
        }
        Ok(LogAmplitude::Finite(acc))
    }

    pub fn amplitude(&self, v: &BitString) -> Result<C64> {
        Ok(self.log_amplitude(v)?.to_amplitude())
    }

    /// Expand all 2^n amplitudes. Fails when `n` exceeds `cap`.
    pub fn dense_state(&self, cap: usize) -> Result<DenseState> {
        if self.n > cap {
            return Err(Error::DenseCapExceeded { needed: self.n, cap });
        }
        let mut amps = Vec::with_capacity(1usize << self.n);
        for idx in 0..(1usize << self.n) {
            amps.push(self.amplitude(&BitString::from_index(idx, self.n))?);
        }
        Ok(DenseState { n: self.n, amps })
    }

    /// Pointwise product of amplitudes: same visibles, concatenated hiddens.
    pub fn compose(&self, other: &RbmNetwork) -> Result<RbmNetwork> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "compose of networks with {} and {} visibles",
                self.n, other.n
            )));
        }
        let mut out = self.clone();
        for (i, &b) in other.visible_bias.iter().enumerate() {
            out.visible_bias[i] += b;
        }
        out.hidden.extend(other.hidden.iter().cloned());
        out.log_scale += other.log_scale;
        Ok(out)
    }

    /// Product state on the disjoint union of visibles; `other`'s indices are
    /// shifted past `self`'s.
    pub fn tensor(&self, other: &RbmNetwork) -> RbmNetwork {
        let mut out = RbmNetwork::new(self.n + other.n);
        out.visible_bias[..self.n].copy_from_slice(&self.visible_bias);
        out.visible_bias[self.n..].copy_from_slice(&other.visible_bias);
        out.hidden.extend(self.hidden.iter().cloned());
        for unit in &other.hidden {
            let weights = unit
                .weights
                .iter()
                .map(|&(k, w)| (k + self.n, w))
                .collect();
            out.hidden.push(HiddenUnit { bias: unit.bias, weights });
        }
        out.log_scale = self.log_scale + other.log_scale;
        out
    }

    pub fn to_json_string(&self) -> Result<String> {
        let doc = RbmJson {
            n: self.n,
            visible_biases: self.visible_bias.iter().map(|c| (c.re, c.im)).collect(),
            hidden: self
                .hidden
                .iter()
                .map(|h| HiddenJson {
                    bias: (h.bias.re, h.bias.im),
                    weights: h.weights.iter().map(|&(k, w)| (k, w.re, w.im)).collect(),
                })
                .collect(),
            log_scale: (self.log_scale.re, self.log_scale.im),
            bit_order: "big_endian".into(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: RbmJson = serde_json::from_str(s)?;
        if doc.bit_order != "big_endian" {
            return Err(Error::Parse(format!(
                "unsupported bit_order {:?}; this tool writes big_endian",
                doc.bit_order
            )));
        }
        if doc.visible_biases.len() != doc.n {
            return Err(Error::Parse(format!(
                "visible_biases has {} entries for n={}",
                doc.visible_biases.len(),
                doc.n
            )));
        }
        let mut net = RbmNetwork::new(doc.n);
        for (i, (re, im)) in doc.visible_biases.into_iter().enumerate() {
            net.visible_bias[i] = C64::new(re, im);
        }
        for h in doc.hidden {
            let unit = HiddenUnit::new(
                C64::new(h.bias.0, h.bias.1),
                h.weights
                    .into_iter()
                    .map(|(k, re, im)| (k, C64::new(re, im)))
                    .collect(),
            );
            net.add_hidden(unit)?;
        }
        net.log_scale = C64::new(doc.log_scale.0, doc.log_scale.1);
        Ok(net)
    }
}

#[derive(Serialize, Deserialize)]
struct RbmJson {
    n: usize,
    visible_biases: Vec<(f64, f64)>,
    hidden: Vec<HiddenJson>,
    log_scale: (f64, f64),
    bit_order: String,
}

#[derive(Serialize, Deserialize)]
struct HiddenJson {
    bias: (f64, f64),
    weights: Vec<(usize, f64, f64)>,
}

/// A full amplitude vector over 2^n basis states (big-endian indexing).
#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    pub n: usize,
    pub amps: Vec<C64>,
}

impl DenseState {
    pub fn new(n: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != 1usize << n {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for n={}",
                amps.len(),
                n
            )));
        }
        Ok(DenseState { n, amps })
    }

    pub fn zero(n: usize) -> Self {
        DenseState { n, amps: vec![C64::new(0.0, 0.0); 1 << n] }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Number of amplitudes with magnitude above `tol * max|amp|`.
    pub fn support_size(&self, rel_tol: f64) -> usize {
        let max = self.amps.iter().map(|a| a.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            return 0;
        }
        self.amps.iter().filter(|a| a.norm() > rel_tol * max).count()
    }

    pub fn to_json_string(&self) -> Result<String> {
        let doc = DenseJson {
            n: self.n,
            amplitudes: self.amps.iter().map(|c| (c.re, c.im)).collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: DenseJson = serde_json::from_str(s)?;
        DenseState::new(
            doc.n,
            doc.amplitudes.into_iter().map(|(re, im)| C64::new(re, im)).collect(),
        )
    }
}

#[derive(Serialize, Deserialize)]
struct DenseJson {
    n: usize,
    amplitudes: Vec<(f64, f64)>,
}

/// |<a|b>|^2 / (|a|^2 |b|^2). Errors on zero-norm input.
pub fn fidelity(a: &DenseState, b: &DenseState) -> Result<f64> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch(format!(
            "fidelity of states on {} and {} visibles",
            a.n, b.n
        )));
    }
    let na = a.norm_sqr();
    let nb = b.norm_sqr();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroNorm("fidelity of a zero state".into()));
    }
    let mut ip = C64::new(0.0, 0.0);
    for (x, y) in a.amps.iter().zip(&b.amps) {
        ip += x.conj() * y;
    }
    Ok(ip.norm_sqr() / (na * nb))
}
