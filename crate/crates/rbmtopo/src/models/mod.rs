//! Model builders: each produces a [`ModelBundle`] pairing an exact RBM
//! parameterization with an independent oracle for the same state.
//!
//! The oracle never shares code with the RBM construction it certifies:
//! product states use literal phase products, code states apply stabilizer
//! projectors, the spin chain contracts transfer matrices, and the loop
//! model counts cycles with union-find.

mod aklt;
mod css;
mod honeycomb;

pub use aklt::aklt_chain;
pub use css::{haah_code, haah_generators, toric_code, toric_generators};
pub use honeycomb::{ccz_model, double_semion, Honeycomb};

use std::fmt::Write as _;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::gadgets::{hyperedge_phase, indicator_weight, parity_gadget, two_body_phase};
use crate::rbm::{BitString, DenseState, RbmNetwork};

/// Multiplier in the resource bound `hidden <= BOUND_FACTOR * (interactions + qubits)`
/// that every bundle must satisfy.
pub const BOUND_FACTOR: usize = 8;

/// A collection of hyperedges (vertex subsets of size >= 1) over `n` vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    n: usize,
    edges: Vec<Vec<usize>>,
}

impl Hypergraph {
    /// Validates vertex ranges, rejects repeated vertices within an edge and
    /// duplicate edges (after sorting) across the collection.
    pub fn new(n: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen: std::collections::BTreeSet<Vec<usize>> = std::collections::BTreeSet::new();
        let mut normalized = Vec::with_capacity(edges.len());
        for (pos, mut edge) in edges.into_iter().enumerate() {
            if edge.is_empty() {
                return Err(Error::InvalidInput(format!("hyperedge {pos} is empty")));
            }
            edge.sort_unstable();
            if edge.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidInput(format!(
                    "hyperedge {pos} repeats a vertex: {edge:?}"
                )));
            }
            if let Some(&v) = edge.last() {
                if v >= n {
                    return Err(Error::InvalidInput(format!(
                        "hyperedge {pos} references vertex {v} but n = {n}"
                    )));
                }
            }
            if !seen.insert(edge.clone()) {
                return Err(Error::InvalidInput(format!(
                    "duplicate hyperedge {edge:?}"
                )));
            }
            normalized.push(edge);
        }
        Ok(Self { n, edges: normalized })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    /// Text format: first non-comment line `n <count>`, then one hyperedge
    /// per line as whitespace-separated vertex indices. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut toks = line.split_whitespace();
            if n.is_none() {
                let tag = toks.next().unwrap_or("");
                if tag != "n" {
                    return Err(Error::Parse(format!(
                        "line {}: expected header `n <count>`, found {raw:?}",
                        lineno + 1
                    )));
                }
                let count = toks
                    .next()
                    .ok_or_else(|| Error::Parse(format!("line {}: missing vertex count", lineno + 1)))?;
                if toks.next().is_some() {
                    return Err(Error::Parse(format!(
                        "line {}: trailing tokens after vertex count",
                        lineno + 1
                    )));
                }
                n = Some(count.parse().map_err(|_| {
                    Error::Parse(format!("line {}: bad vertex count {count:?}", lineno + 1))
                })?);
                continue;
            }
            let mut edge = Vec::new();
            for tok in line.split_whitespace() {
                edge.push(tok.parse::<usize>().map_err(|_| {
                    Error::Parse(format!("line {}: bad vertex index {tok:?}", lineno + 1))
                })?);
            }
            edges.push(edge);
        }
        let n = n.ok_or_else(|| Error::Parse("missing `n <count>` header".into()))?;
        Self::new(n, edges)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("n {}\n", self.n);
        for edge in &self.edges {
            let toks: Vec<String> = edge.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", toks.join(" "));
        }
        out
    }
}

/// Reference amplitudes for a model, independent of its RBM construction.
///
/// `amplitude` must work for any system size; `dense` is capped because it
/// materializes all `2^n` amplitudes.
pub trait OracleSource {
    fn n(&self) -> usize;

    fn amplitude(&self, v: &BitString) -> Result<C64>;

    fn dense(&self, cap: usize) -> Result<DenseState> {
        let n = self.n();
        if n > cap {
            return Err(Error::DenseCapExceeded { needed: n, cap });
        }
        let mut state = DenseState::zero(n);
        for idx in 0..(1usize << n) {
            state.amps[idx] = self.amplitude(&BitString::from_index(idx, n))?;
        }
        Ok(state)
    }
}

/// Lattice / size parameters recorded alongside a bundle for reporting.
#[derive(Debug, Clone)]
pub struct ModelMeta {
    pub n_qubits: usize,
    /// Interaction count entering the resource bound (edges, stabilizer
    /// generators, or sites depending on the model).
    pub n_interactions: usize,
    pub params: Vec<(String, usize)>,
}

impl ModelMeta {
    /// Hidden-unit budget `BOUND_FACTOR * (interactions + qubits)`.
    pub fn hidden_bound(&self) -> usize {
        BOUND_FACTOR * (self.n_interactions + self.n_qubits)
    }
}

/// An exact RBM together with the oracle certifying it.
pub struct ModelBundle {
    pub name: String,
    pub rbm: RbmNetwork,
    pub oracle: Box<dyn OracleSource>,
    pub meta: ModelMeta,
}

impl ModelBundle {
    pub fn hidden_bound(&self) -> usize {
        self.meta.hidden_bound()
    }
}

struct ProductPhaseOracle {
    hg: Hypergraph,
}

impl OracleSource for ProductPhaseOracle {
    fn n(&self) -> usize {
        self.hg.n()
    }

    fn amplitude(&self, v: &BitString) -> Result<C64> {
        if v.len() != self.hg.n() {
            return Err(Error::DimensionMismatch(format!(
                "oracle expects {} bits, got {}",
                self.hg.n(),
                v.len()
            )));
        }
        let mut sign = 1.0;
        for edge in self.hg.edges() {
            if edge.iter().all(|&i| v.get(i) == 1) {
                sign = -sign;
            }
        }
        Ok(C64::new(sign, 0.0))
    }
}

/// Uniform-magnitude state `prod_e (-1)^{v_i v_j}` over all `2^n` basis
/// configurations, one hidden unit per edge.
pub fn graph_state(graph: &Hypergraph) -> Result<ModelBundle> {
    for (pos, edge) in graph.edges().iter().enumerate() {
        if edge.len() != 2 {
            return Err(Error::InvalidInput(format!(
                "graph edge {pos} has {} vertices; expected exactly 2",
                edge.len()
            )));
        }
    }
    let mut rbm = RbmNetwork::new(graph.n());
    for edge in graph.edges() {
        two_body_phase(edge[0], edge[1], std::f64::consts::PI)?.apply_to(&mut rbm)?;
    }
    let meta = ModelMeta {
        n_qubits: graph.n(),
        n_interactions: graph.edges().len(),
        params: vec![
            ("n".into(), graph.n()),
            ("edges".into(), graph.edges().len()),
        ],
    };
    Ok(ModelBundle {
        name: "graph".into(),
        rbm,
        oracle: Box::new(ProductPhaseOracle { hg: graph.clone() }),
        meta,
    })
}

/// Uniform-magnitude state `prod_e (-1)^{prod_{i in e} v_i}`; each hyperedge
/// of size `k` costs at most `2k + 4` hidden units.
pub fn hypergraph_state(hg: &Hypergraph) -> Result<ModelBundle> {
    let mut rbm = RbmNetwork::new(hg.n());
    for edge in hg.edges() {
        hyperedge_phase(edge, std::f64::consts::PI)?.apply_to(&mut rbm)?;
    }
    let meta = ModelMeta {
        n_qubits: hg.n(),
        n_interactions: hg.edges().len(),
        params: vec![("n".into(), hg.n()), ("edges".into(), hg.edges().len())],
    };
    Ok(ModelBundle {
        name: "hypergraph".into(),
        rbm,
        oracle: Box::new(ProductPhaseOracle { hg: hg.clone() }),
        meta,
    })
}

struct DickeOracle {
    n: usize,
    k: usize,
}

impl OracleSource for DickeOracle {
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
        Ok(if v.weight() == self.k {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        })
    }
}

/// Equal-weight superposition of all `n`-bit configurations with exactly `k`
/// ones, realized by a single Hamming-weight indicator.
pub fn dicke_state(n: usize, k: usize) -> Result<ModelBundle> {
    if n == 0 {
        return Err(Error::InvalidInput("dicke: n must be >= 1".into()));
    }
    if k > n {
        return Err(Error::InvalidInput(format!(
            "dicke: k = {k} exceeds n = {n}"
        )));
    }
    let support: Vec<usize> = (0..n).collect();
    let rbm = indicator_weight(&support, k)?.into_network(n)?;
    let meta = ModelMeta {
        n_qubits: n,
        n_interactions: 1,
        params: vec![("n".into(), n), ("k".into(), k)],
    };
    Ok(ModelBundle {
        name: "dicke".into(),
        rbm,
        oracle: Box::new(DickeOracle { n, k }),
        meta,
    })
}

/// Corner qubits of plaquette `(x, y)` on an `lx x ly` torus of sites with
/// four corner qubits per site, in site-major order.
fn czx_plaquette(lx: usize, ly: usize, x: usize, y: usize) -> [usize; 4] {
    let site = |sx: usize, sy: usize| 4 * (sy * lx + sx);
    [
        site(x, y) + 3,
        site((x + 1) % lx, y) + 2,
        site(x, (y + 1) % ly) + 1,
        site((x + 1) % lx, (y + 1) % ly),
    ]
}

struct CzxOracle {
    lx: usize,
    ly: usize,
}

impl OracleSource for CzxOracle {
    fn n(&self) -> usize {
        4 * self.lx * self.ly
    }

    fn amplitude(&self, v: &BitString) -> Result<C64> {
        if v.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "oracle expects {} bits, got {}",
                self.n(),
                v.len()
            )));
        }
        for y in 0..self.ly {
            for x in 0..self.lx {
                let q = czx_plaquette(self.lx, self.ly, x, y);
                let b = v.get(q[0]);
                if q.iter().any(|&i| v.get(i) != b) {
                    return Ok(C64::new(0.0, 0.0));
                }
            }
        }
        Ok(C64::new(1.0, 0.0))
    }
}

/// Product of four-qubit GHZ blocks, one per plaquette of an `lx x ly` torus
/// with four corner qubits per site; three chained parity constraints pin
/// each plaquette to `|0000> + |1111>`.
pub fn czx_ground(lx: usize, ly: usize) -> Result<ModelBundle> {
    if lx == 0 || ly == 0 {
        return Err(Error::InvalidInput("czx: lattice sides must be >= 1".into()));
    }
    let n = 4 * lx * ly;
    let mut rbm = RbmNetwork::new(n);
    for y in 0..ly {
        for x in 0..lx {
            let q = czx_plaquette(lx, ly, x, y);
            for pair in q.windows(2) {
                parity_gadget(pair, 0)?.apply_to(&mut rbm)?;
            }
        }
    }
    let meta = ModelMeta {
        n_qubits: n,
        n_interactions: lx * ly,
        params: vec![("lx".into(), lx), ("ly".into(), ly)],
    };
    Ok(ModelBundle {
        name: "czx".into(),
        rbm,
        oracle: Box::new(CzxOracle { lx, ly }),
        meta,
    })
}

/// One registry row per buildable model.
#[derive(Debug, Clone, Copy)]
pub struct ModelInfo {
    pub name: &'static str,
    pub summary: &'static str,
    pub params: &'static str,
}

/// Every builder this crate ships, in the order `list-models` prints them.
pub fn registry() -> Vec<ModelInfo> {
    vec![
        ModelInfo {
            name: "graph",
            summary: "graph state: one pi pair-phase per edge (needs --hypergraph FILE with 2-vertex edges)",
            params: "--hypergraph FILE",
        },
        ModelInfo {
            name: "hypergraph",
            summary: "hypergraph state: one pi hyperedge phase per edge (needs --hypergraph FILE)",
            params: "--hypergraph FILE",
        },
        ModelInfo {
            name: "toric",
            summary: "toric code ground state on an lx x ly torus (2*lx*ly edge qubits)",
            params: "--lx INT --ly INT  (both >= 2)",
        },
        ModelInfo {
            name: "haah",
            summary: "cubic-code ground state on an l x l x l torus (2*l^3 qubits)",
            params: "--l INT  (>= 2)",
        },
        ModelInfo {
            name: "double-semion",
            summary: "loop superposition weighted (-1)^(number of loops) on an lx x ly honeycomb torus",
            params: "--lx INT --ly INT  (lx*ly >= 4)",
        },
        ModelInfo {
            name: "aklt",
            summary: "spin-1 AKLT chain in unary encoding, periodic boundary (3 bits per site)",
            params: "--sites INT  (>= 3)",
        },
        ModelInfo {
            name: "czx",
            summary: "product of plaquette GHZ blocks on an lx x ly torus (4 corner qubits per site)",
            params: "--lx INT --ly INT",
        },
        ModelInfo {
            name: "ccz",
            summary: "triple-phase state from CCZ on every honeycomb vertex triple (3*lx*ly edge qubits)",
            params: "--lx INT --ly INT",
        },
        ModelInfo {
            name: "dicke",
            summary: "uniform superposition of all n-bit strings with Hamming weight k",
            params: "--n INT --k INT",
        },
    ]
}

/// Size flags collected by the CLI; each named builder takes what it needs.
#[derive(Debug, Clone, Copy, Default)]
pub struct ModelParams {
    pub lx: Option<usize>,
    pub ly: Option<usize>,
    pub l: Option<usize>,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub sites: Option<usize>,
    pub periodic: bool,
}

fn need(value: Option<usize>, model: &str, flag: &str) -> Result<usize> {
    value.ok_or_else(|| Error::InvalidInput(format!("model {model:?} requires --{flag}")))
}

/// Dispatch a named builder from CLI-style parameters.
pub fn build_model(name: &str, params: &ModelParams) -> Result<ModelBundle> {
    match name {
        "toric" => toric_code(need(params.lx, name, "lx")?, need(params.ly, name, "ly")?),
        "haah" => haah_code(need(params.l, name, "l")?),
        "double-semion" => double_semion(need(params.lx, name, "lx")?, need(params.ly, name, "ly")?),
        "aklt" => aklt_chain(need(params.sites, name, "sites")?, params.periodic),
        "czx" => czx_ground(need(params.lx, name, "lx")?, need(params.ly, name, "ly")?),
        "ccz" => ccz_model(need(params.lx, name, "lx")?, need(params.ly, name, "ly")?),
        "dicke" => dicke_state(need(params.n, name, "n")?, need(params.k, name, "k")?),
        "graph" | "hypergraph" => Err(Error::InvalidInput(format!(
            "model {name:?} takes its structure from --hypergraph FILE"
        ))),
        other => Err(Error::InvalidInput(format!(
            "unknown model {other:?}; see list-models"
        ))),
    }
}

/// Fidelity between the bundle's RBM and its oracle over all amplitudes.
/// Test helper shared by the builder unit tests.
#[cfg(test)]
pub(crate) fn bundle_fidelity(bundle: &ModelBundle) -> f64 {
    use crate::rbm::DEFAULT_DENSE_CAP;
    let dense = bundle.rbm.dense_state(DEFAULT_DENSE_CAP).unwrap();
    let oracle = bundle.oracle.dense(DEFAULT_DENSE_CAP).unwrap();
    crate::rbm::fidelity(&dense, &oracle).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rbm::DEFAULT_DENSE_CAP;

    #[test]
    fn hypergraph_parse_round_trip() {
        let text = "# three vertices\nn 3\n0 1\n0 1 2\n";
        let hg = Hypergraph::parse(text).unwrap();
        assert_eq!(hg.n(), 3);
        assert_eq!(hg.edges(), &[vec![0, 1], vec![0, 1, 2]]);
        let again = Hypergraph::parse(&hg.to_text()).unwrap();
        assert_eq!(hg, again);
    }

    #[test]
    fn hypergraph_rejects_duplicates_and_range() {
        assert!(Hypergraph::new(3, vec![vec![0, 1], vec![1, 0]]).is_err());
        assert!(Hypergraph::new(3, vec![vec![0, 3]]).is_err());
        assert!(Hypergraph::new(3, vec![vec![1, 1]]).is_err());
        assert!(Hypergraph::new(3, vec![vec![]]).is_err());
    }

    #[test]
    fn graph_state_matches_oracle_and_hidden_count() {
        let hg = Hypergraph::new(4, vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]]).unwrap();
        let bundle = graph_state(&hg).unwrap();
        assert_eq!(bundle.rbm.n_hidden(), 4);
        assert!((bundle_fidelity(&bundle) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn graph_state_rejects_hyperedges() {
        let hg = Hypergraph::new(3, vec![vec![0, 1, 2]]).unwrap();
        assert!(graph_state(&hg).is_err());
    }

    #[test]
    fn hypergraph_state_mixed_edge_sizes() {
        let hg = Hypergraph::new(5, vec![vec![0], vec![1, 2], vec![0, 1, 2], vec![1, 2, 3, 4]])
            .unwrap();
        let bundle = hypergraph_state(&hg).unwrap();
        assert!((bundle_fidelity(&bundle) - 1.0).abs() < 1e-12);
        let bound: usize = hg.edges().iter().map(|e| 2 * e.len() + 4).sum();
        assert!(bundle.rbm.n_hidden() <= bound);
    }

    #[test]
    fn dicke_amplitudes_are_exact() {
        for n in 1..=6 {
            for k in 0..=n {
                let bundle = dicke_state(n, k).unwrap();
                let dense = bundle.rbm.dense_state(DEFAULT_DENSE_CAP).unwrap();
                for idx in 0..(1usize << n) {
                    let v = BitString::from_index(idx, n);
                    let expect = if v.weight() == k { 1.0 } else { 0.0 };
                    let got = dense.amps[idx];
                    assert!(
                        (got - C64::new(expect, 0.0)).norm() < 1e-10,
                        "n={n} k={k} idx={idx} got {got}"
                    );
                }
            }
        }
    }

    #[test]
    fn dicke_rejects_bad_k() {
        assert!(dicke_state(3, 4).is_err());
        assert!(dicke_state(0, 0).is_err());
    }

    #[test]
    fn czx_single_plaquette_is_ghz() {
        let bundle = czx_ground(1, 1).unwrap();
        assert_eq!(bundle.meta.n_qubits, 4);
        let dense = bundle.rbm.dense_state(DEFAULT_DENSE_CAP).unwrap();
        for idx in 0..16 {
            let expect = if idx == 0 || idx == 15 { 1.0 } else { 0.0 };
            assert!((dense.amps[idx] - C64::new(expect, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn czx_two_by_two_matches_oracle() {
        let bundle = czx_ground(2, 2).unwrap();
        assert_eq!(bundle.meta.n_qubits, 16);
        assert!((bundle_fidelity(&bundle) - 1.0).abs() < 1e-9);
        assert!(bundle.rbm.n_hidden() <= bundle.hidden_bound());
    }

    #[test]
    fn build_model_dispatch_and_registry_agree() {
        let infos = registry();
        assert!(infos.len() >= 8);
        let params = ModelParams {
            lx: Some(2),
            ly: Some(2),
            l: Some(2),
            n: Some(3),
            k: Some(1),
            sites: Some(3),
            periodic: true,
        };
        for info in &infos {
            match info.name {
                "graph" | "hypergraph" => assert!(build_model(info.name, &params).is_err()),
                _ => {
                    let bundle = build_model(info.name, &params).unwrap();
                    assert!(bundle.rbm.n_hidden() <= bundle.hidden_bound(), "{}", info.name);
                }
            }
        }
        assert!(build_model("nope", &params).is_err());
    }
}
