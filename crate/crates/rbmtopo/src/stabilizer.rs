//! Signed Pauli strings, stabilizer generator sets, and circuit synthesis.
//!
//! A string is stored as i^t * prod_q X^{x_q} Z^{z_q} with t mod 4. Parsing
//! letters maps Y to (x, z) = (1, 1) with one factor of i, which keeps every
//! parsed operator Hermitian (t = x.z mod 2) while arithmetic stays plain
//! XOR and phase counting.
//!
//! Synthesis brings n independent commuting generators to the canonical set
//! {X_0, ..., X_{n-1}} by conjugating with H, S, CZ and CNOT and by row
//! multiplication. The stabilized state is then the inverse conjugation
//! applied to |+>^n, so the prepared circuit is the reversed, inverted gate
//! list.

use std::fmt;

use num_complex::Complex64 as C64;

use crate::clifford::{CliffordCircuit, Gate};
use crate::error::{Error, Result};
use crate::gf2::BitMatrix;
use crate::rbm::{DenseState, RbmNetwork};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliString {
    n: usize,
    x: Vec<u8>,
    z: Vec<u8>,
    /// power of i in front of prod X^x Z^z
    t: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString { n, x: vec![0; n], z: vec![0; n], t: 0 }
    }

    pub fn from_parts(x: Vec<u8>, z: Vec<u8>, t: u8) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::DimensionMismatch(format!(
                "x part has {} qubits, z part {}",
                x.len(),
                z.len()
            )));
        }
        if x.iter().chain(&z).any(|&b| b > 1) {
            return Err(Error::InvalidInput("x/z parts must be bits".into()));
        }
        Ok(PauliString { n: x.len(), x, z, t: t % 4 })
    }

    /// `[+-][IXYZ]+`, sign optional.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (t0, body) = match s.as_bytes().first() {
            Some(b'+') => (0u8, &s[1..]),
            Some(b'-') => (2u8, &s[1..]),
            _ => (0u8, s),
        };
        if body.is_empty() {
            return Err(Error::Parse("empty Pauli string".into()));
        }
        let mut x = Vec::with_capacity(body.len());
        let mut z = Vec::with_capacity(body.len());
        let mut t = t0;
        for ch in body.chars() {
            match ch.to_ascii_uppercase() {
                'I' => {
                    x.push(0);
                    z.push(0);
                }
                'X' => {
                    x.push(1);
                    z.push(0);
                }
                'Y' => {
                    x.push(1);
                    z.push(1);
                    t = (t + 1) % 4;
                }
                'Z' => {
                    x.push(0);
                    z.push(1);
                }
                other => {
                    return Err(Error::Parse(format!(
                        "bad Pauli letter {:?} (want I, X, Y or Z)",
                        other
                    )))
                }
            }
        }
        Ok(PauliString { n: x.len(), x, z, t })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_part(&self) -> &[u8] {
        &self.x
    }

    pub fn z_part(&self) -> &[u8] {
        &self.z
    }

    pub fn phase_power(&self) -> u8 {
        self.t
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().all(|&b| b == 0) && self.z.iter().all(|&b| b == 0)
    }

    /// Hermitian strings square to +1 and satisfy t = x.z (mod 2).
    pub fn is_hermitian(&self) -> bool {
        let xz: u8 = self.x.iter().zip(&self.z).map(|(&a, &b)| a & b).sum::<u8>() % 2;
        self.t % 2 == xz
    }

    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {} qubits",
                self.n, other.n
            )));
        }
        let mut t = (self.t + other.t) % 4;
        for q in 0..self.n {
            // Z^{z1} past X^{x2} costs (-1)^{z1 x2}
            t = (t + 2 * (self.z[q] & other.x[q])) % 4;
        }
        let x = self.x.iter().zip(&other.x).map(|(a, b)| a ^ b).collect();
        let z = self.z.iter().zip(&other.z).map(|(a, b)| a ^ b).collect();
        Ok(PauliString { n: self.n, x, z, t })
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let mut s = 0u8;
        for q in 0..self.n {
            s ^= (self.x[q] & other.z[q]) ^ (self.z[q] & other.x[q]);
        }
        s == 0
    }

    /// Conjugation P -> U P U^dagger for the Clifford gates used here.
    pub fn conjugate(&mut self, gate: Gate) -> Result<()> {
        let check = |q: usize| -> Result<()> {
            if q >= self.n {
                return Err(Error::DimensionMismatch(format!(
                    "qubit {} out of range for {} qubits",
                    q, self.n
                )));
            }
            Ok(())
        };
        match gate {
            Gate::H(q) => {
                check(q)?;
                self.t = (self.t + 2 * (self.x[q] & self.z[q])) % 4;
                std::mem::swap(&mut self.x[q], &mut self.z[q]);
            }
            Gate::S(q) => {
                check(q)?;
                self.t = (self.t + self.x[q]) % 4;
                self.z[q] ^= self.x[q];
            }
            Gate::Cz(a, b) => {
                check(a)?;
                check(b)?;
                self.t = (self.t + 2 * (self.x[a] & self.x[b])) % 4;
                self.z[a] ^= self.x[b];
                self.z[b] ^= self.x[a];
            }
            Gate::Cnot(c, t) => {
                check(c)?;
                check(t)?;
                self.x[t] ^= self.x[c];
                self.z[c] ^= self.z[t];
            }
            Gate::Ccz(..) | Gate::PostPlus(..) => {
                return Err(Error::Unsupported(format!(
                    "{:?} is not a Pauli-frame gate",
                    gate
                )));
            }
        }
        Ok(())
    }

    /// Applies the operator to a dense vector: |b> picks up i^t (-1)^{z.b}
    /// and moves to |b xor x>.
    pub fn apply_dense(&self, state: &DenseState) -> Result<DenseState> {
        if state.n != self.n {
            return Err(Error::DimensionMismatch(format!(
                "state has {} qubits, operator {}",
                state.n, self.n
            )));
        }
        let n = self.n;
        let mut xmask = 0usize;
        for (q, &b) in self.x.iter().enumerate() {
            if b == 1 {
                xmask |= 1 << (n - 1 - q);
            }
        }
        let phase = [
            C64::new(1.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(-1.0, 0.0),
            C64::new(0.0, -1.0),
        ][self.t as usize];
        let mut out = vec![C64::new(0.0, 0.0); state.amps.len()];
        for (idx, &a) in state.amps.iter().enumerate() {
            let mut zdot = 0u8;
            for (q, &b) in self.z.iter().enumerate() {
                if b == 1 {
                    zdot ^= ((idx >> (n - 1 - q)) & 1) as u8;
                }
            }
            let sign = if zdot == 1 { -1.0 } else { 1.0 };
            out[idx ^ xmask] += a * phase * sign;
        }
        DenseState::new(n, out)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ys: u8 = self
            .x
            .iter()
            .zip(&self.z)
            .map(|(&a, &b)| a & b)
            .sum::<u8>()
            % 4;
        let rem = (self.t + 4 - ys % 4) % 4;
        let sign = match rem {
            0 => "+",
            2 => "-",
            // non-Hermitian leftovers; printed explicitly rather than lied about
            1 => "+i",
            _ => "-i",
        };
        write!(f, "{}", sign)?;
        for q in 0..self.n {
            let ch = match (self.x[q], self.z[q]) {
                (0, 0) => 'I',
                (1, 0) => 'X',
                (1, 1) => 'Y',
                (0, 1) => 'Z',
                _ => unreachable!(),
            };
            write!(f, "{}", ch)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerGenerators {
    n: usize,
    gens: Vec<PauliString>,
}

impl StabilizerGenerators {
    pub fn new(gens: Vec<PauliString>) -> Result<Self> {
        let n = match gens.first() {
            Some(g) => g.n(),
            None => return Err(Error::InvalidInput("no generators given".into())),
        };
        for g in &gens {
            if g.n() != n {
                return Err(Error::DimensionMismatch(format!(
                    "generator widths differ: {} vs {}",
                    g.n(),
                    n
                )));
            }
            if !g.is_hermitian() {
                return Err(Error::InvalidInput(format!(
                    "generator {} is not Hermitian",
                    g
                )));
            }
            if g.is_identity() {
                return Err(Error::InvalidInput(
                    "identity operator cannot be a generator".into(),
                ));
            }
        }
        Ok(StabilizerGenerators { n, gens })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.gens
    }

    pub fn check_commuting(&self) -> Result<()> {
        for (i, a) in self.gens.iter().enumerate() {
            for b in &self.gens[i + 1..] {
                if !a.commutes_with(b) {
                    return Err(Error::InvalidInput(format!(
                        "generators {} and {} anticommute",
                        a, b
                    )));
                }
            }
        }
        Ok(())
    }

    /// Rank of the symplectic (x|z) matrix; equals the generator count for
    /// an independent set.
    pub fn symplectic_rank(&self) -> usize {
        let mut m = BitMatrix::zeros(0, 2 * self.n);
        for g in &self.gens {
            let mut row = Vec::with_capacity(2 * self.n);
            row.extend_from_slice(g.x_part());
            row.extend_from_slice(g.z_part());
            m.push_row(&row);
        }
        m.echelonize();
        m.rank()
    }

    pub fn check_independent(&self) -> Result<()> {
        let r = self.symplectic_rank();
        if r != self.gens.len() {
            return Err(Error::InvalidInput(format!(
                "generators are dependent: rank {} of {}",
                r,
                self.gens.len()
            )));
        }
        Ok(())
    }

    /// Text form: optional `n <int>` header then one signed string per line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut gens = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse(format!("line {}: {}", lineno + 1, msg));
            if let Some(rest) = line.strip_prefix("n ") {
                if n.is_some() || !gens.is_empty() {
                    return Err(err("n header must come first, once".into()));
                }
                n = Some(
                    rest.trim()
                        .parse()
                        .map_err(|_| err(format!("bad qubit count {:?}", rest.trim())))?,
                );
                continue;
            }
            let g = PauliString::parse(line).map_err(|e| err(e.to_string()))?;
            if let Some(n0) = n {
                if g.n() != n0 {
                    return Err(err(format!("string has {} qubits, header says {}", g.n(), n0)));
                }
            }
            gens.push(g);
        }
        let set = StabilizerGenerators::new(gens)?;
        if let Some(n0) = n {
            if set.n() != n0 {
                return Err(Error::Parse(format!(
                    "header says {} qubits, strings have {}",
                    n0,
                    set.n()
                )));
            }
        }
        Ok(set)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("n {}\n", self.n);
        for g in &self.gens {
            out.push_str(&g.to_string());
            out.push('\n');
        }
        out
    }
}

/// Synthesizes a preparation circuit for the state stabilized by n
/// independent commuting generators, inputs |+>^n.
///
/// Working copy rows are conjugated toward {+X_q}. For each qubit q: bring
/// some row with support on q to slot q (an H first if only Z support
/// exists), clear its own Y with an S, clear its other columns (S for Y,
/// CNOT for X, CZ for Z), then multiply the X_q leftovers out of the other
/// rows. Signs are fixed at the end with S pairs, and the recorded
/// conjugations are undone in reverse to give the preparation circuit.
pub fn synthesize_circuit(gens: &StabilizerGenerators) -> Result<CliffordCircuit> {
    let n = gens.n();
    if gens.generators().len() != n {
        return Err(Error::InvalidInput(format!(
            "need exactly {} generators for {} qubits, got {}",
            n,
            n,
            gens.generators().len()
        )));
    }
    gens.check_commuting()?;
    gens.check_independent()?;
    let mut rows: Vec<PauliString> = gens.generators().to_vec();
    let mut applied: Vec<Gate> = Vec::new();
    let conj_all = |rows: &mut Vec<PauliString>, applied: &mut Vec<Gate>, g: Gate| {
        for r in rows.iter_mut() {
            r.conjugate(g).expect("in-range gate");
        }
        applied.push(g);
    };
    for q in 0..n {
        let pick_x = (q..n).find(|&r| rows[r].x_part()[q] == 1);
        let pick = match pick_x {
            Some(r) => r,
            None => {
                let r = (q..n)
                    .find(|&r| rows[r].z_part()[q] == 1)
                    .ok_or_else(|| {
                        Error::Synthesis(format!(
                            "no remaining generator touches qubit {}; set is not maximal",
                            q
                        ))
                    })?;
                conj_all(&mut rows, &mut applied, Gate::H(q));
                r
            }
        };
        rows.swap(q, pick);
        if rows[q].z_part()[q] == 1 {
            conj_all(&mut rows, &mut applied, Gate::S(q));
        }
        // row q is now X on qubit q; sweep its other columns
        for j in 0..n {
            if j == q {
                continue;
            }
            if rows[q].x_part()[j] == 1 && rows[q].z_part()[j] == 1 {
                conj_all(&mut rows, &mut applied, Gate::S(j));
            }
        }
        for j in 0..n {
            if j != q && rows[q].x_part()[j] == 1 {
                conj_all(&mut rows, &mut applied, Gate::Cnot(q, j));
            }
        }
        for j in 0..n {
            if j != q && rows[q].z_part()[j] == 1 {
                conj_all(&mut rows, &mut applied, Gate::Cz(q, j));
            }
        }
        debug_assert!(rows[q].x_part().iter().enumerate().all(|(k, &b)| (k == q) == (b == 1)));
        debug_assert!(rows[q].z_part().iter().all(|&b| b == 0));
        // commutation with +-X_q forces z = 0 on qubit q elsewhere; clear
        // the x leftovers by row multiplication
        for r in 0..n {
            if r != q && rows[r].x_part()[q] == 1 {
                rows[r] = rows[r].mul(&rows[q])?;
            }
            debug_assert!(r == q || rows[r].z_part()[q] == 0);
        }
    }
    for (r, row) in rows.iter_mut().enumerate() {
        match row.phase_power() {
            0 => {}
            2 => {
                // S twice flips the sign of X_r and nothing else here
                for gate in [Gate::S(r), Gate::S(r)] {
                    row.conjugate(gate).expect("in-range gate");
                    applied.push(gate);
                }
            }
            t => {
                return Err(Error::Synthesis(format!(
                    "canonical row {} ended with non-Hermitian phase i^{}",
                    r, t
                )))
            }
        }
        debug_assert_eq!(row.phase_power(), 0);
    }
    // undo the conjugations in reverse on |+>^n
    let mut circuit = CliffordCircuit::new(n);
    for gate in applied.into_iter().rev() {
        match gate {
            Gate::S(q) => {
                for _ in 0..3 {
                    circuit.push(Gate::S(q))?;
                }
            }
            g => circuit.push(g)?,
        }
    }
    Ok(circuit)
}

/// Full Pauli-stabilizer pipeline: synthesize, lower, eliminate, compile.
pub fn stabilizer_state_to_rbm(gens: &StabilizerGenerators) -> Result<RbmNetwork> {
    let circuit = synthesize_circuit(gens)?;
    crate::clifford::circuit_to_rbm(&circuit)
}

/// Checks g|psi> = |psi> for every generator, within tol, on a dense state.
pub fn fixes_state(gens: &StabilizerGenerators, state: &DenseState, tol: f64) -> Result<bool> {
    let norm = state.norm_sqr().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroNorm("stabilizer check on zero state".into()));
    }
    for g in gens.generators() {
        let moved = g.apply_dense(state)?;
        let worst = moved
            .amps
            .iter()
            .zip(&state.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if worst > tol * norm {
            return Ok(false);
        }
    }
    Ok(true)
}
