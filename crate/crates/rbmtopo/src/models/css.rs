//! Code states whose support is the GF(2) span of X-type generator supports.
//!
//! Both builders follow the same route: collect the X-generator supports as
//! rows of a binary matrix, take a nullspace basis as parity checks, and emit
//! one parity unit per check. The oracle instead applies the stabilizer
//! projector `prod_g (1 + g)` to the all-zeros configuration, so the two
//! sides share no linear algebra.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::gadgets::parity_gadget;
use crate::gf2::{BitMatrix, RowSpace};
use crate::rbm::{BitString, DenseState, RbmNetwork};
use crate::stabilizer::{PauliString, StabilizerGenerators};

use super::{ModelBundle, ModelMeta, OracleSource};

/// Uniform superposition over the row space of `x_supports`, certified by
/// projector application on one side and row-space membership on the other.
struct CodeOracle {
    n: usize,
    x_supports: Vec<Vec<usize>>,
    row_space: RowSpace,
}

impl CodeOracle {
    fn new(n: usize, x_supports: Vec<Vec<usize>>) -> Self {
        let rows: Vec<Vec<u8>> = x_supports
            .iter()
            .map(|support| {
                let mut row = vec![0u8; n];
                for &q in support {
                    row[q] = 1;
                }
                row
            })
            .collect();
        Self {
            n,
            x_supports,
            row_space: RowSpace::new(&rows, n),
        }
    }
}

impl OracleSource for CodeOracle {
    fn n(&self) -> usize {
        self.n
    }

    fn amplitude(&self, v: &BitString) -> Result<C64> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "oracle expects {} bits, got {}",
                self.n,
                v.len()
            )));
        }
        let word: Vec<u8> = (0..self.n).map(|i| u8::from(v.get(i))).collect();
        Ok(if self.row_space.contains(&word) {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        })
    }

    /// Applies `prod_g (1 + X_support(g))` to `|0...0>`. Independent of the
    /// row-space bookkeeping used by `amplitude`; magnitudes differ by one
    /// global factor when generators are dependent, which fidelity ignores.
    fn dense(&self, cap: usize) -> Result<DenseState> {
        if self.n > cap {
            return Err(Error::DenseCapExceeded { needed: self.n, cap });
        }
        let dim = 1usize << self.n;
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[0] = C64::new(1.0, 0.0);
        for support in &self.x_supports {
            let mut mask = 0usize;
            for &q in support {
                mask |= 1usize << (self.n - 1 - q);
            }
            let prev = amps.clone();
            for (idx, amp) in amps.iter_mut().enumerate() {
                *amp += prev[idx ^ mask];
            }
        }
        let mut state = DenseState::zero(self.n);
        state.amps = amps;
        Ok(state)
    }
}

/// Shared tail: nullspace parity checks -> RBM, plus projector oracle.
fn code_bundle(
    name: &str,
    n: usize,
    x_supports: Vec<Vec<usize>>,
    n_interactions: usize,
    params: Vec<(String, usize)>,
) -> Result<ModelBundle> {
    let mut gen_matrix = BitMatrix::zeros(0, n);
    for support in &x_supports {
        let mut row = vec![0u8; n];
        for &q in support {
            row[q] = 1;
        }
        gen_matrix.push_row(&row);
    }
    let checks = gen_matrix.nullspace();
    let mut rbm = RbmNetwork::new(n);
    for check in &checks {
        let support: Vec<usize> = (0..n).filter(|&i| check[i] == 1).collect();
        parity_gadget(&support, 0)?.apply_to(&mut rbm)?;
    }
    let meta = ModelMeta {
        n_qubits: n,
        n_interactions,
        params,
    };
    Ok(ModelBundle {
        name: name.into(),
        rbm,
        oracle: Box::new(CodeOracle::new(n, x_supports)),
        meta,
    })
}

/// Qubit id of the horizontal edge leaving site `(x, y)` rightward.
fn toric_h(lx: usize, ly: usize, x: usize, y: usize) -> usize {
    2 * ((y % ly) * lx + (x % lx))
}

/// Qubit id of the vertical edge leaving site `(x, y)` upward.
fn toric_v(lx: usize, ly: usize, x: usize, y: usize) -> usize {
    2 * ((y % ly) * lx + (x % lx)) + 1
}

fn toric_star(lx: usize, ly: usize, x: usize, y: usize) -> Vec<usize> {
    vec![
        toric_h(lx, ly, x, y),
        toric_h(lx, ly, x + lx - 1, y),
        toric_v(lx, ly, x, y),
        toric_v(lx, ly, x, y + ly - 1),
    ]
}

fn toric_plaquette(lx: usize, ly: usize, x: usize, y: usize) -> Vec<usize> {
    vec![
        toric_h(lx, ly, x, y),
        toric_h(lx, ly, x, y + 1),
        toric_v(lx, ly, x, y),
        toric_v(lx, ly, x + 1, y),
    ]
}

/// Toric-code ground state on an `lx x ly` torus: `2*lx*ly` edge qubits,
/// uniform superposition over all products of vertex X-stars applied to
/// `|0...0>`. The representative state is the one reached by projecting the
/// all-zeros configuration; its support size is `2^(lx*ly - 1)`.
pub fn toric_code(lx: usize, ly: usize) -> Result<ModelBundle> {
    if lx < 2 || ly < 2 {
        return Err(Error::InvalidInput(format!(
            "toric: lattice sides must both be >= 2, got {lx} x {ly}"
        )));
    }
    let n = 2 * lx * ly;
    let mut x_supports = Vec::with_capacity(lx * ly);
    for y in 0..ly {
        for x in 0..lx {
            x_supports.push(toric_star(lx, ly, x, y));
        }
    }
    code_bundle(
        "toric",
        n,
        x_supports,
        2 * lx * ly,
        vec![("lx".into(), lx), ("ly".into(), ly)],
    )
}

/// Full stabilizer set fixing the representative toric ground state: all
/// independent stars and plaquettes plus the two Z-loops that the all-zeros
/// projection leaves at +1. Suitable for the circuit-synthesis pipeline.
pub fn toric_generators(lx: usize, ly: usize) -> Result<StabilizerGenerators> {
    if lx < 2 || ly < 2 {
        return Err(Error::InvalidInput(format!(
            "toric: lattice sides must both be >= 2, got {lx} x {ly}"
        )));
    }
    let n = 2 * lx * ly;
    let mut gens = Vec::new();
    let star_x = |support: &[usize]| {
        let mut xs = vec![0u8; n];
        for &q in support {
            xs[q] = 1;
        }
        PauliString::from_parts(xs, vec![0u8; n], 0)
    };
    let plaq_z = |support: &[usize]| {
        let mut zs = vec![0u8; n];
        for &q in support {
            zs[q] = 1;
        }
        PauliString::from_parts(vec![0u8; n], zs, 0)
    };
    // Drop the last star and last plaquette: each set multiplies to identity.
    for y in 0..ly {
        for x in 0..lx {
            if x == lx - 1 && y == ly - 1 {
                continue;
            }
            gens.push(star_x(&toric_star(lx, ly, x, y))?);
            gens.push(plaq_z(&toric_plaquette(lx, ly, x, y))?);
        }
    }
    // Z-loops winding each direction; the all-zeros state sits at +1.
    let loop_h: Vec<usize> = (0..lx).map(|x| toric_h(lx, ly, x, 0)).collect();
    let loop_v: Vec<usize> = (0..ly).map(|y| toric_v(lx, ly, 0, y)).collect();
    gens.push(plaq_z(&loop_h)?);
    gens.push(plaq_z(&loop_v)?);
    StabilizerGenerators::new(gens)
}

const HAAH_X_Q0: [(usize, usize, usize); 4] = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)];
const HAAH_X_Q1: [(usize, usize, usize); 4] = [(0, 0, 0), (1, 1, 0), (0, 1, 1), (1, 0, 1)];

fn haah_qubit(l: usize, x: usize, y: usize, z: usize, q: usize) -> usize {
    2 * ((z % l) * l * l + (y % l) * l + (x % l)) + q
}

/// X-generator support at cube `(x, y, z)`: first-species qubits at the four
/// `1 + x + y + z` offsets, second-species at the four `1 + xy + yz + zx`
/// offsets (positions taken positively).
fn haah_x_support(l: usize, x: usize, y: usize, z: usize) -> Vec<usize> {
    let mut support = Vec::with_capacity(8);
    for &(dx, dy, dz) in &HAAH_X_Q0 {
        support.push(haah_qubit(l, x + dx, y + dy, z + dz, 0));
    }
    for &(dx, dy, dz) in &HAAH_X_Q1 {
        support.push(haah_qubit(l, x + dx, y + dy, z + dz, 1));
    }
    support
}

/// Z-generator support at cube `(x, y, z)`: the species swap with offsets
/// negated, which makes every X/Z pair overlap on an even set.
fn haah_z_support(l: usize, x: usize, y: usize, z: usize) -> Vec<usize> {
    let mut support = Vec::with_capacity(8);
    for &(dx, dy, dz) in &HAAH_X_Q1 {
        support.push(haah_qubit(l, x + l - dx, y + l - dy, z + l - dz, 0));
    }
    for &(dx, dy, dz) in &HAAH_X_Q0 {
        support.push(haah_qubit(l, x + l - dx, y + l - dy, z + l - dz, 1));
    }
    support
}

/// Cubic-code ground state on an `l^3` torus with two qubits per site:
/// uniform superposition over products of the X-type cube generators applied
/// to `|0...0>`.
pub fn haah_code(l: usize) -> Result<ModelBundle> {
    if l < 2 {
        return Err(Error::InvalidInput(format!(
            "haah: torus side must be >= 2, got {l}"
        )));
    }
    let n = 2 * l * l * l;
    let mut x_supports = Vec::with_capacity(l * l * l);
    for z in 0..l {
        for y in 0..l {
            for x in 0..l {
                x_supports.push(haah_x_support(l, x, y, z));
            }
        }
    }
    code_bundle(
        "haah",
        n,
        x_supports,
        2 * l * l * l,
        vec![("l".into(), l)],
    )
}

/// Full cube-generator set (X and Z types, one of each per cube), exposed so
/// commutation and fixing properties can be checked independently.
pub fn haah_generators(l: usize) -> Result<StabilizerGenerators> {
    if l < 2 {
        return Err(Error::InvalidInput(format!(
            "haah: torus side must be >= 2, got {l}"
        )));
    }
    let n = 2 * l * l * l;
    let mut gens = Vec::new();
    for z in 0..l {
        for y in 0..l {
            for x in 0..l {
                let mut xs = vec![0u8; n];
                for q in haah_x_support(l, x, y, z) {
                    xs[q] = 1;
                }
                gens.push(PauliString::from_parts(xs, vec![0u8; n], 0)?);
                let mut zs = vec![0u8; n];
                for q in haah_z_support(l, x, y, z) {
                    zs[q] = 1;
                }
                gens.push(PauliString::from_parts(vec![0u8; n], zs, 0)?);
            }
        }
    }
    StabilizerGenerators::new(gens)
}

#[cfg(test)]
mod tests {
    use super::super::bundle_fidelity;
    use super::*;
    use crate::rbm::DEFAULT_DENSE_CAP;
    use crate::stabilizer::fixes_state;

    #[test]
    fn toric_two_by_two_matches_projector_oracle() {
        let bundle = toric_code(2, 2).unwrap();
        assert_eq!(bundle.meta.n_qubits, 8);
        assert!((bundle_fidelity(&bundle) - 1.0).abs() < 1e-12);
        assert!(bundle.rbm.n_hidden() <= bundle.hidden_bound());
    }

    #[test]
    fn toric_support_size_is_two_to_rank() {
        for (lx, ly) in [(2, 2), (3, 2)] {
            let bundle = toric_code(lx, ly).unwrap();
            let dense = bundle.rbm.dense_state(DEFAULT_DENSE_CAP).unwrap();
            // Stars multiply to identity, so the span has rank lx*ly - 1.
            let expect = 1usize << (lx * ly - 1);
            assert_eq!(dense.support_size(1e-9), expect, "{lx}x{ly}");
        }
    }

    #[test]
    fn toric_rejects_degenerate_lattice() {
        assert!(toric_code(1, 4).is_err());
        assert!(toric_code(2, 1).is_err());
    }

    #[test]
    fn toric_generators_fix_the_bundle_state() {
        let bundle = toric_code(2, 2).unwrap();
        let mut dense = bundle.oracle.dense(DEFAULT_DENSE_CAP).unwrap();
        let norm = dense.norm_sqr().sqrt();
        for amp in dense.amps.iter_mut() {
            *amp /= norm;
        }
        let gens = toric_generators(2, 2).unwrap();
        assert_eq!(gens.generators().len(), 8);
        gens.check_commuting().unwrap();
        gens.check_independent().unwrap();
        assert!(fixes_state(&gens, &dense, 1e-9).unwrap());
    }

    #[test]
    fn haah_generators_commute_and_fix_state() {
        for l in [2, 3] {
            let gens = haah_generators(l).unwrap();
            gens.check_commuting().unwrap();
        }
        let bundle = haah_code(2).unwrap();
        let mut dense = bundle.oracle.dense(DEFAULT_DENSE_CAP).unwrap();
        let norm = dense.norm_sqr().sqrt();
        for amp in dense.amps.iter_mut() {
            *amp /= norm;
        }
        let gens = haah_generators(2).unwrap();
        assert!(fixes_state(&gens, &dense, 1e-9).unwrap());
    }

    #[test]
    fn haah_l2_matches_oracle_with_expected_support() {
        let bundle = haah_code(2).unwrap();
        assert_eq!(bundle.meta.n_qubits, 16);
        assert!((bundle_fidelity(&bundle) - 1.0).abs() < 1e-12);
        let dense = bundle.rbm.dense_state(DEFAULT_DENSE_CAP).unwrap();
        assert_eq!(dense.support_size(1e-9), 32);
        assert!(bundle.rbm.n_hidden() <= bundle.hidden_bound());
    }

    #[test]
    fn haah_l3_builds_without_dense_oracle() {
        let bundle = haah_code(3).unwrap();
        assert_eq!(bundle.meta.n_qubits, 54);
        assert!(bundle.oracle.dense(DEFAULT_DENSE_CAP).is_err());
        // Spot-check: the all-zeros configuration and any single generator
        // support are in the code; a weight-1 configuration is not.
        let zeros = BitString::zeros(54);
        assert!((bundle.oracle.amplitude(&zeros).unwrap().re - 1.0).abs() < 1e-12);
        assert!((bundle.rbm.amplitude(&zeros).unwrap().norm() - 1.0).abs() < 1e-9);
        let mut one = vec![0u8; 54];
        one[7] = 1;
        let one = BitString::new(one).unwrap();
        assert!(bundle.oracle.amplitude(&one).unwrap().norm() < 1e-12);
        assert!(bundle.rbm.amplitude(&one).unwrap().norm() < 1e-9);
        let mut gen = vec![0u8; 54];
        for q in haah_x_support(3, 1, 2, 0) {
            gen[q] = 1;
        }
        let gen = BitString::new(gen).unwrap();
        assert!((bundle.oracle.amplitude(&gen).unwrap().re - 1.0).abs() < 1e-12);
        assert!((bundle.rbm.amplitude(&gen).unwrap().norm() - 1.0).abs() < 1e-9);
    }
}
