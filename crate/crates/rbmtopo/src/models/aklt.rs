//! Spin-1 AKLT chain in unary encoding: three bits per site, amplitude
//! proportional to the transfer-matrix trace `Tr(A_{a_1} ... A_{a_n})` with
//! `A_{-1} = X`, `A_0 = Y`, `A_{+1} = Z`.
//!
//! The RBM comes from a measurement-style circuit: one Bell bond per link,
//! then a fixed block per site that projects the two virtual legs onto the
//! unary triple. The block lands on a closed form only because its action on
//! non-unary rows is unconstrained; a weight-one indicator per triple kills
//! those rows afterwards.

use num_complex::Complex64 as C64;

use crate::clifford::{circuit_to_rbm, CliffordCircuit, Gate, WireInput};
use crate::error::{Error, Result};
use crate::gadgets::indicator_weight;
use crate::rbm::BitString;

use super::{ModelBundle, ModelMeta, OracleSource};

const MAT_X: [[C64; 2]; 2] = [
    [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
    [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
];
const MAT_Y: [[C64; 2]; 2] = [
    [C64::new(0.0, 0.0), C64::new(0.0, -1.0)],
    [C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
];
const MAT_Z: [[C64; 2]; 2] = [
    [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
    [C64::new(0.0, 0.0), C64::new(-1.0, 0.0)],
];

fn mat_mul(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Spin labels per site decoded from a unary triple, or `None` when any
/// triple does not have Hamming weight one.
fn decode_unary(v: &BitString, sites: usize) -> Option<Vec<usize>> {
    let mut spins = Vec::with_capacity(sites);
    for site in 0..sites {
        let triple = [v.get(3 * site), v.get(3 * site + 1), v.get(3 * site + 2)];
        let weight = triple.iter().filter(|&&b| b == 1).count();
        if weight != 1 {
            return None;
        }
        spins.push(triple.iter().position(|&b| b == 1).unwrap());
    }
    Some(spins)
}

struct AkltOracle {
    sites: usize,
}

impl OracleSource for AkltOracle {
    fn n(&self) -> usize {
        3 * self.sites
    }

    fn amplitude(&self, v: &BitString) -> Result<C64> {
        if v.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "oracle expects {} bits, got {}",
                self.n(),
                v.len()
            )));
        }
        let Some(spins) = decode_unary(v, self.sites) else {
            return Ok(C64::new(0.0, 0.0));
        };
        let mats = [&MAT_X, &MAT_Y, &MAT_Z];
        let mut prod = *mats[spins[0]];
        for &s in &spins[1..] {
            prod = mat_mul(&prod, mats[s]);
        }
        Ok(prod[0][0] + prod[1][1])
    }
}

/// Wires of site `i`: the left virtual leg (starts `|0>`, Bell-bonded to the
/// previous site), the right virtual leg, the third output bit, and one
/// post-selected ancilla.
fn site_wires(i: usize) -> (usize, usize, usize, usize) {
    (4 * i, 4 * i + 1, 4 * i + 2, 4 * i + 3)
}

/// Builds the chain circuit: Bell bonds first, then the per-site block.
///
/// The block realizes, on wires `(l, r) -> (w1, w2, w3)` with the ancilla
/// summed out,
/// `i^(2 w1 + 3 w2) (-1)^(l w1 + w1 r + r w2 + l w3) [l + r + w1 + w2 = 0 mod 2]`,
/// whose unary rows are exactly the spin projection table (`|100>` for spin
/// -1, `|010>` for 0, `|001>` for +1). Bonds attach each right leg to the
/// previous site's left leg so the row/column order of the transfer matrices
/// composes along the chain.
fn aklt_circuit(sites: usize) -> Result<CliffordCircuit> {
    let mut circuit = CliffordCircuit::new(4 * sites);
    for i in 0..sites {
        let (l, _, _, _) = site_wires(i);
        circuit.set_input(l, WireInput::Zero)?;
    }
    for i in 0..sites {
        let (_, r, _, _) = site_wires(i);
        let (l_prev, _, _, _) = site_wires((i + sites - 1) % sites);
        circuit.push(Gate::Cnot(r, l_prev))?;
    }
    for i in 0..sites {
        let (w1, w2, w3, anc) = site_wires(i);
        circuit.push(Gate::Cz(w1, w3))?;
        circuit.push(Gate::Cz(w1, anc))?;
        circuit.push(Gate::Cz(w2, anc))?;
        circuit.push(Gate::H(w1))?;
        circuit.push(Gate::Cz(w1, w2))?;
        circuit.push(Gate::Cz(w1, anc))?;
        circuit.push(Gate::H(w2))?;
        circuit.push(Gate::Cz(w2, anc))?;
        circuit.push(Gate::S(w1))?;
        circuit.push(Gate::S(w1))?;
        circuit.push(Gate::S(w2))?;
        circuit.push(Gate::S(w2))?;
        circuit.push(Gate::S(w2))?;
        circuit.push(Gate::PostPlus(anc))?;
    }
    Ok(circuit)
}

/// Periodic AKLT chain on `sites >= 3` sites, three visible bits per site.
/// Amplitudes on unary configurations equal the transfer-matrix trace up to
/// one global factor; non-unary configurations are exactly annihilated by a
/// weight-one indicator on each triple.
pub fn aklt_chain(sites: usize, periodic: bool) -> Result<ModelBundle> {
    if !periodic {
        return Err(Error::Unsupported(
            "aklt: only periodic boundary conditions are supported".into(),
        ));
    }
    if sites < 3 {
        return Err(Error::InvalidInput(format!(
            "aklt: need at least 3 sites, got {sites}"
        )));
    }
    let circuit = aklt_circuit(sites)?;
    let mut rbm = circuit_to_rbm(&circuit)?;
    debug_assert_eq!(rbm.n_visible(), 3 * sites);
    for site in 0..sites {
        let triple = [3 * site, 3 * site + 1, 3 * site + 2];
        indicator_weight(&triple, 1)?.apply_to(&mut rbm)?;
    }
    let meta = ModelMeta {
        n_qubits: 3 * sites,
        n_interactions: sites,
        params: vec![("sites".into(), sites)],
    };
    Ok(ModelBundle {
        name: "aklt".into(),
        rbm,
        oracle: Box::new(AkltOracle { sites }),
        meta,
    })
}
