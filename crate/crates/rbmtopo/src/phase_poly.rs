//! Closed-form states: a phase polynomial over {0,1} visibles times a
//! product of affine parity indicators.
//!
//! The phase of a configuration v is alpha^(l(v)) * i^(q(v)) * (-1)^(c(v))
//! with alpha = e^{i pi/4}, where l is linear (coefficients mod 8, plus a
//! constant), q is quadratic (mod 4) and c is cubic (mod 2). Every parity
//! is an affine condition `sum_{i in support} v_i + constant = 0 (mod 2)`;
//! a violated parity kills the amplitude.
//!
//! Compilation maps each piece onto network fragments: parities become
//! parity units, linear terms become visible biases, quadratic terms become
//! pair-phase gadgets and cubic terms become three-site hyperedge gadgets.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write as _;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::gadgets::{hyperedge_phase, parity_gadget, two_body_phase};
use crate::gf2::BitMatrix;
use crate::rbm::{BitString, DenseState, HiddenUnit, RbmNetwork};

/// alpha^k for k = 0..7, alpha = e^{i pi/4}. Exact table so that eighth
/// roots of unity never pick up trig rounding.
const ALPHA_POW: [(f64, f64); 8] = [
    (1.0, 0.0),
    (FRAC_1_SQRT_2, FRAC_1_SQRT_2),
    (0.0, 1.0),
    (-FRAC_1_SQRT_2, FRAC_1_SQRT_2),
    (-1.0, 0.0),
    (-FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
    (0.0, -1.0),
    (FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
];

pub fn alpha_power(k: u8) -> C64 {
    let (re, im) = ALPHA_POW[(k % 8) as usize];
    C64::new(re, im)
}

/// Phase polynomial with per-degree moduli. Repeated indices in a pair or
/// triple fold down a degree (v_i^2 = v_i on bits), doubling the ladder
/// weight so the phase value is unchanged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhasePolynomial {
    n: usize,
    constant: u8,
    linear: Vec<u8>,
    quadratic: BTreeMap<(usize, usize), u8>,
    cubic: BTreeSet<(usize, usize, usize)>,
}

impl PhasePolynomial {
    pub fn new(n: usize) -> Self {
        PhasePolynomial {
            n,
            constant: 0,
            linear: vec![0; n],
            quadratic: BTreeMap::new(),
            cubic: BTreeSet::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn constant(&self) -> u8 {
        self.constant
    }

    pub fn linear(&self) -> &[u8] {
        &self.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), u8> {
        &self.quadratic
    }

    pub fn cubic(&self) -> &BTreeSet<(usize, usize, usize)> {
        &self.cubic
    }

    pub fn is_identity(&self) -> bool {
        self.constant == 0
            && self.linear.iter().all(|&c| c == 0)
            && self.quadratic.is_empty()
            && self.cubic.is_empty()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::DimensionMismatch(format!(
                "index {} out of range for {} visibles",
                i, self.n
            )));
        }
        Ok(())
    }

    pub fn add_constant(&mut self, c: u8) {
        self.constant = (self.constant + c) % 8;
    }

    /// Adds c (mod 8) to the linear coefficient of v_i.
    pub fn add_linear(&mut self, i: usize, c: u8) -> Result<()> {
        self.check_index(i)?;
        self.linear[i] = (self.linear[i] + c % 8) % 8;
        Ok(())
    }

    /// Adds c (mod 4) to the quadratic coefficient of v_i v_j. A repeated
    /// index folds to linear weight 2c.
    pub fn add_quadratic(&mut self, i: usize, j: usize, c: u8) -> Result<()> {
        self.check_index(i)?;
        self.check_index(j)?;
        if i == j {
            return self.add_linear(i, (2 * (c % 4)) % 8);
        }
        let key = (i.min(j), i.max(j));
        let e = self.quadratic.entry(key).or_insert(0);
        *e = (*e + c % 4) % 4;
        if *e == 0 {
            self.quadratic.remove(&key);
        }
        Ok(())
    }

    /// Toggles (mod 2) the cubic coefficient of v_i v_j v_k when c is odd.
    /// Repeated indices fold to quadratic weight 2c, or linear 4c when all
    /// three coincide.
    pub fn add_cubic(&mut self, i: usize, j: usize, k: usize, c: u8) -> Result<()> {
        self.check_index(i)?;
        self.check_index(j)?;
        self.check_index(k)?;
        let mut t = [i, j, k];
        t.sort_unstable();
        let [a, b, d] = t;
        if a == b && b == d {
            return self.add_linear(a, (4 * (c % 2)) % 8);
        }
        if a == b {
            return self.add_quadratic(a, d, (2 * (c % 2)) % 4);
        }
        if b == d {
            return self.add_quadratic(a, b, (2 * (c % 2)) % 4);
        }
        if c % 2 == 1 && !self.cubic.insert((a, b, d)) {
            self.cubic.remove(&(a, b, d));
        }
        Ok(())
    }

    /// Exponent of alpha for configuration v, mod 8.
    pub fn exponent(&self, v: &BitString) -> Result<u8> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "configuration has {} bits, polynomial has {}",
                v.len(),
                self.n
            )));
        }
        let mut e = self.constant as u32;
        for (i, &c) in self.linear.iter().enumerate() {
            e += c as u32 * v.get(i) as u32;
        }
        for (&(i, j), &c) in &self.quadratic {
            e += 2 * c as u32 * (v.get(i) & v.get(j)) as u32;
        }
        for &(i, j, k) in &self.cubic {
            e += 4 * (v.get(i) & v.get(j) & v.get(k)) as u32;
        }
        Ok((e % 8) as u8)
    }

    pub fn eval(&self, v: &BitString) -> Result<C64> {
        Ok(alpha_power(self.exponent(v)?))
    }

    /// True when every amplitude lies in {+-1, +-i}: no cubic terms and all
    /// linear coefficients (and the constant) even.
    pub fn is_pauli_like(&self) -> bool {
        self.cubic.is_empty()
            && self.constant % 2 == 0
            && self.linear.iter().all(|&c| c % 2 == 0)
    }
}

/// Affine parity condition `sum_{i in support} v_i + constant = 0 (mod 2)`.
/// Duplicate support indices cancel in pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineParity {
    support: Vec<usize>,
    constant: u8,
}

impl AffineParity {
    pub fn new(mut support: Vec<usize>, constant: u8) -> Self {
        support.sort_unstable();
        let mut dedup = Vec::with_capacity(support.len());
        for i in support {
            if dedup.last() == Some(&i) {
                dedup.pop();
            } else {
                dedup.push(i);
            }
        }
        AffineParity { support: dedup, constant: constant % 2 }
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn constant(&self) -> u8 {
        self.constant
    }

    /// Empty support: the condition no longer depends on v.
    pub fn is_degenerate(&self) -> bool {
        self.support.is_empty()
    }

    pub fn is_satisfied(&self, v: &BitString) -> bool {
        let mut s = self.constant;
        for &i in &self.support {
            s ^= v.get(i);
        }
        s == 0
    }
}

/// A phase polynomial restricted to the affine subspace cut out by parity
/// conditions. Amplitudes are unit-modulus on support and exactly zero off
/// it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedFormState {
    n: usize,
    phase: PhasePolynomial,
    parities: Vec<AffineParity>,
}

impl ClosedFormState {
    pub fn new(n: usize) -> Self {
        ClosedFormState {
            n,
            phase: PhasePolynomial::new(n),
            parities: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn phase(&self) -> &PhasePolynomial {
        &self.phase
    }

    pub fn phase_mut(&mut self) -> &mut PhasePolynomial {
        &mut self.phase
    }

    pub fn parities(&self) -> &[AffineParity] {
        &self.parities
    }

    pub fn add_parity(&mut self, p: AffineParity) -> Result<()> {
        if let Some(&max) = p.support().iter().max() {
            if max >= self.n {
                return Err(Error::DimensionMismatch(format!(
                    "parity index {} out of range for {} visibles",
                    max, self.n
                )));
            }
        }
        self.parities.push(p);
        Ok(())
    }

    pub fn eval(&self, v: &BitString) -> Result<C64> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "configuration has {} bits, state has {}",
                v.len(),
                self.n
            )));
        }
        for p in &self.parities {
            if !p.is_satisfied(v) {
                return Ok(C64::new(0.0, 0.0));
            }
        }
        self.phase.eval(v)
    }

    pub fn dense(&self, cap: usize) -> Result<DenseState> {
        if self.n > cap {
            return Err(Error::DenseCapExceeded { needed: self.n, cap });
        }
        let dim = 1usize << self.n;
        let mut amps = Vec::with_capacity(dim);
        for idx in 0..dim {
            amps.push(self.eval(&BitString::from_index(idx, self.n))?);
        }
        DenseState::new(self.n, amps)
    }

    /// Number of configurations satisfying all parities: 2^(n - rank) for a
    /// consistent system, 0 for an inconsistent one.
    pub fn support_size(&self) -> usize {
        let mut m = BitMatrix::zeros(0, self.n);
        let mut rhs = Vec::new();
        for p in &self.parities {
            let mut row = vec![0u8; self.n];
            for &i in p.support() {
                row[i] = 1;
            }
            m.push_row(&row);
            rhs.push(p.constant());
        }
        match m.solve(&rhs) {
            Ok(_) => {
                let mut e = m.clone();
                e.echelonize();
                1usize << (self.n - e.rank())
            }
            Err(_) => 0,
        }
    }

    /// Translates each piece into network fragments. The result reproduces
    /// eval exactly, configuration by configuration, not just up to scale:
    /// every fragment is individually normalized.
    pub fn compile_to_rbm(&self) -> Result<RbmNetwork> {
        let mut net = RbmNetwork::new(self.n);
        let i_pi = C64::new(0.0, std::f64::consts::PI);
        let i_pi_4 = C64::new(0.0, std::f64::consts::FRAC_PI_4);
        net.add_log_scale(i_pi_4 * self.phase.constant() as f64);
        for (i, &c) in self.phase.linear().iter().enumerate() {
            if c != 0 {
                net.add_visible_bias(i, i_pi_4 * c as f64)?;
            }
        }
        for (&(i, j), &c) in self.phase.quadratic() {
            two_body_phase(i, j, std::f64::consts::FRAC_PI_2 * c as f64)?.apply_to(&mut net)?;
        }
        for &(i, j, k) in self.phase.cubic() {
            hyperedge_phase(&[i, j, k], std::f64::consts::PI)?.apply_to(&mut net)?;
        }
        for p in &self.parities {
            if p.is_degenerate() {
                if p.constant() == 1 {
                    // Always-false condition: a weightless unit with bias
                    // i*pi contributes the factor 1 + e^{i pi} = 0 to every
                    // configuration, so the whole state is the zero state.
                    net.add_hidden(HiddenUnit::new(i_pi, Vec::new()))?;
                }
                continue;
            }
            parity_gadget(p.support(), p.constant())?.apply_to(&mut net)?;
        }
        Ok(net)
    }

    /// Text form, one declaration per line. Inverse of `parse`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n={}", self.n);
        if self.phase.constant() != 0 {
            let _ = writeln!(out, "const: {}", self.phase.constant());
        }
        for (i, &c) in self.phase.linear().iter().enumerate() {
            if c != 0 {
                let _ = writeln!(out, "lin: {} {}", i, c);
            }
        }
        for (&(i, j), &c) in self.phase.quadratic() {
            let _ = writeln!(out, "quad: {} {} {}", i, j, c);
        }
        for &(i, j, k) in self.phase.cubic() {
            let _ = writeln!(out, "cub: {} {} {} 1", i, j, k);
        }
        for p in &self.parities {
            let idx: Vec<String> = p.support().iter().map(|i| i.to_string()).collect();
            if p.constant() == 1 {
                let _ = writeln!(out, "parity: {} +1", idx.join(" "));
            } else {
                let _ = writeln!(out, "parity: {}", idx.join(" "));
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut state: Option<ClosedFormState> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse(format!("line {}: {}", lineno + 1, msg));
            if let Some(rest) = line.strip_prefix("n=") {
                if state.is_some() {
                    return Err(err("duplicate n= header".into()));
                }
                let n: usize = rest
                    .trim()
                    .parse()
                    .map_err(|_| err(format!("bad visible count {:?}", rest.trim())))?;
                state = Some(ClosedFormState::new(n));
                continue;
            }
            let st = state
                .as_mut()
                .ok_or_else(|| err("first declaration must be `n=<int>`".into()))?;
            let (tag, body) = line
                .split_once(':')
                .ok_or_else(|| err(format!("unrecognized declaration {:?}", line)))?;
            let fields: Vec<&str> = body.split_whitespace().collect();
            let parse_usize = |s: &str| -> Result<usize> {
                s.parse().map_err(|_| err(format!("bad index {:?}", s)))
            };
            let parse_coeff = |s: &str| -> Result<u8> {
                s.parse().map_err(|_| err(format!("bad coefficient {:?}", s)))
            };
            match tag.trim() {
                "const" => {
                    if fields.len() != 1 {
                        return Err(err("const takes one coefficient".into()));
                    }
                    st.phase.add_constant(parse_coeff(fields[0])?);
                }
                "lin" => {
                    if fields.len() != 2 {
                        return Err(err("lin takes index and coefficient".into()));
                    }
                    st.phase.add_linear(parse_usize(fields[0])?, parse_coeff(fields[1])?)?;
                }
                "quad" => {
                    if fields.len() != 3 {
                        return Err(err("quad takes two indices and a coefficient".into()));
                    }
                    st.phase.add_quadratic(
                        parse_usize(fields[0])?,
                        parse_usize(fields[1])?,
                        parse_coeff(fields[2])?,
                    )?;
                }
                "cub" => {
                    if fields.len() != 4 {
                        return Err(err("cub takes three indices and a coefficient".into()));
                    }
                    st.phase.add_cubic(
                        parse_usize(fields[0])?,
                        parse_usize(fields[1])?,
                        parse_usize(fields[2])?,
                        parse_coeff(fields[3])?,
                    )?;
                }
                "parity" => {
                    let mut constant = 0u8;
                    let mut idx = Vec::new();
                    for f in &fields {
                        if *f == "+1" {
                            constant ^= 1;
                        } else {
                            idx.push(parse_usize(f)?);
                        }
                    }
                    st.add_parity(AffineParity::new(idx, constant))?;
                }
                other => return Err(err(format!("unrecognized declaration {:?}", other))),
            }
        }
        state.ok_or_else(|| Error::Parse("empty closed-form input".into()))
    }
}

/// Ordered list of all monomials of degree <= 3 over n variables, constant
/// first. Shared between the fit's system builder and solution readout.
fn monomials(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for i in 0..n {
        out.push(vec![i]);
    }
    for i in 0..n {
        for j in i + 1..n {
            out.push(vec![i, j]);
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                out.push(vec![i, j, k]);
            }
        }
    }
    out
}

/// Finds a degree-<=3 polynomial p over the two-element field with
/// (-1)^{p(v)} = sign(v) on every listed configuration, by elimination.
/// The system is usually underdetermined; free coefficients come back zero,
/// which is safe because the callers pair the result with parity conditions
/// that annihilate everything outside the listed support.
pub fn fit_cubic_phase(support: &[BitString], signs: &[i8], n: usize) -> Result<PhasePolynomial> {
    if support.len() != signs.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} configurations but {} signs",
            support.len(),
            signs.len()
        )));
    }
    let mons = monomials(n);
    let mut m = BitMatrix::zeros(0, mons.len());
    let mut rhs = Vec::with_capacity(signs.len());
    for (v, &s) in support.iter().zip(signs) {
        if v.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "configuration has {} bits, expected {}",
                v.len(),
                n
            )));
        }
        if s != 1 && s != -1 {
            return Err(Error::InvalidInput(format!("sign must be +1 or -1, got {}", s)));
        }
        let mut row = vec![0u8; mons.len()];
        for (c, mono) in mons.iter().enumerate() {
            row[c] = mono.iter().fold(1u8, |acc, &i| acc & v.get(i));
        }
        m.push_row(&row);
        rhs.push(if s < 0 { 1 } else { 0 });
    }
    let sol = m.solve(&rhs).map_err(|(rank, bad_row)| Error::FitInfeasible {
        rank,
        rows: support.len(),
        bad_row,
    })?;
    let mut poly = PhasePolynomial::new(n);
    for (c, mono) in mons.iter().enumerate() {
        if sol[c] == 0 {
            continue;
        }
        match mono.as_slice() {
            [] => poly.add_constant(4),
            [i] => poly.add_linear(*i, 4)?,
            [i, j] => poly.add_quadratic(*i, *j, 2)?,
            [i, j, k] => poly.add_cubic(*i, *j, *k, 1)?,
            _ => unreachable!(),
        }
    }
    Ok(poly)
}

/// Parses `BITSTRING SIGN` lines (sign = +1 or -1, `#` comments allowed)
/// into a support list. All bitstrings must share one length.
pub fn parse_signed_support(text: &str) -> Result<(Vec<BitString>, Vec<i8>, usize)> {
    let mut support = Vec::new();
    let mut signs = Vec::new();
    let mut n = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse(format!("line {}: {}", lineno + 1, msg));
        let mut it = line.split_whitespace();
        let bits = it.next().unwrap();
        let sign = it
            .next()
            .ok_or_else(|| err("expected `BITSTRING SIGN`".into()))?;
        if it.next().is_some() {
            return Err(err("trailing fields after sign".into()));
        }
        let v = BitString::parse(bits).map_err(|e| err(e.to_string()))?;
        match n {
            None => n = Some(v.len()),
            Some(n0) if n0 != v.len() => {
                return Err(err(format!("bitstring length {} != {}", v.len(), n0)));
            }
            _ => {}
        }
        let s = match sign {
            "+1" | "+" | "1" => 1i8,
            "-1" | "-" => -1i8,
            other => return Err(err(format!("bad sign {:?}", other))),
        };
        support.push(v);
        signs.push(s);
    }
    let n = n.ok_or_else(|| Error::Parse("empty support input".into()))?;
    Ok((support, signs, n))
}
