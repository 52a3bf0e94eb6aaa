//! Honeycomb-torus models: the loop superposition weighted by
//! `(-1)^(number of loops)` and the state produced by one CCZ per vertex
//! triple.
//!
//! The lattice is stored brick-wall style: cells `(x, y)` each own three
//! edges, and every vertex (two per cell) touches exactly three edges, so an
//! even-degree configuration decomposes into vertex-disjoint closed loops.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::phase_poly::{fit_cubic_phase, AffineParity, ClosedFormState};
use crate::rbm::BitString;

use super::{hypergraph_state, Hypergraph, ModelBundle, ModelMeta, OracleSource};

/// Brick-wall honeycomb torus with `lx x ly` cells, three edges per cell and
/// two trivalent vertices per cell.
#[derive(Debug, Clone, Copy)]
pub struct Honeycomb {
    lx: usize,
    ly: usize,
}

impl Honeycomb {
    pub fn new(lx: usize, ly: usize) -> Result<Self> {
        if lx == 0 || ly == 0 {
            return Err(Error::InvalidInput(
                "honeycomb: lattice sides must be >= 1".into(),
            ));
        }
        Ok(Self { lx, ly })
    }

    pub fn n_cells(&self) -> usize {
        self.lx * self.ly
    }

    pub fn n_edges(&self) -> usize {
        3 * self.n_cells()
    }

    pub fn n_vertices(&self) -> usize {
        2 * self.n_cells()
    }

    fn edge_id(&self, x: usize, y: usize, t: usize) -> usize {
        3 * ((y % self.ly) * self.lx + (x % self.lx)) + t
    }

    /// Vertices are numbered `2*cell` (species A) and `2*cell + 1`
    /// (species B); each touches exactly three edges.
    pub fn vertex_edges(&self, vid: usize) -> [usize; 3] {
        let cell = vid / 2;
        let x = cell % self.lx;
        let y = cell / self.lx;
        if vid % 2 == 0 {
            [
                self.edge_id(x, y, 0),
                self.edge_id(x + self.lx - 1, y, 1),
                self.edge_id(x, y + self.ly - 1, 2),
            ]
        } else {
            [
                self.edge_id(x, y, 0),
                self.edge_id(x, y, 1),
                self.edge_id(x, y, 2),
            ]
        }
    }

    /// The two endpoints of an edge, as vertex ids.
    pub fn edge_endpoints(&self, eid: usize) -> (usize, usize) {
        let cell = eid / 3;
        let t = eid % 3;
        let x = cell % self.lx;
        let y = cell / self.lx;
        let a_vertex = |ax: usize, ay: usize| 2 * ((ay % self.ly) * self.lx + (ax % self.lx));
        let b = 2 * cell + 1;
        match t {
            0 => (a_vertex(x, y), b),
            1 => (a_vertex(x + 1, y), b),
            _ => (a_vertex(x, y + 1), b),
        }
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

/// Number of closed loops in an even-degree edge configuration. On a
/// trivalent lattice every vertex has degree 0 or 2, so connected components
/// of the selected subgraph are exactly the loops.
fn loop_count(hc: &Honeycomb, v: &BitString) -> usize {
    let mut uf = UnionFind::new(hc.n_vertices());
    let mut touched = vec![false; hc.n_vertices()];
    for eid in 0..hc.n_edges() {
        if v.get(eid) == 1 {
            let (a, b) = hc.edge_endpoints(eid);
            uf.union(a, b);
            touched[a] = true;
            touched[b] = true;
        }
    }
    let mut roots = std::collections::BTreeSet::new();
    for vid in 0..hc.n_vertices() {
        if touched[vid] {
            let r = uf.find(vid);
            roots.insert(r);
        }
    }
    roots.len()
}

struct DoubleSemionOracle {
    hc: Honeycomb,
}

impl OracleSource for DoubleSemionOracle {
    fn n(&self) -> usize {
        self.hc.n_edges()
    }

    fn amplitude(&self, v: &BitString) -> Result<C64> {
        if v.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "oracle expects {} bits, got {}",
                self.n(),
                v.len()
            )));
        }
        for vid in 0..self.hc.n_vertices() {
            let deg = self
                .hc
                .vertex_edges(vid)
                .iter()
                .filter(|&&e| v.get(e) == 1)
                .count();
            if deg % 2 != 0 {
                return Ok(C64::new(0.0, 0.0));
            }
        }
        let sign = if loop_count(&self.hc, v) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        Ok(C64::new(sign, 0.0))
    }
}

/// All even-degree configurations, enumerated as the span of a cycle-space
/// basis (so the support is exact, not filtered from `2^edges`).
fn cycle_space(hc: &Honeycomb) -> Vec<BitString> {
    let n = hc.n_edges();
    let rows: Vec<Vec<u8>> = (0..hc.n_vertices())
        .map(|vid| {
            let mut row = vec![0u8; n];
            for e in hc.vertex_edges(vid) {
                row[e] = 1;
            }
            row
        })
        .collect();
    let mut mat = crate::gf2::BitMatrix::zeros(0, n);
    for row in &rows {
        mat.push_row(row);
    }
    let basis = mat.nullspace();
    let dim = basis.len();
    let mut configs = Vec::with_capacity(1 << dim);
    for combo in 0..(1usize << dim) {
        let mut word = vec![0u8; n];
        for (b, base) in basis.iter().enumerate() {
            if combo >> b & 1 == 1 {
                for (w, &x) in word.iter_mut().zip(base) {
                    *w ^= x;
                }
            }
        }
        configs.push(BitString::new(word).expect("binary word"));
    }
    configs
}

/// Ground state of the double-semion string-net on a honeycomb torus:
/// amplitude `(-1)^(number of loops)` on every even-degree edge
/// configuration, zero elsewhere. The sign structure is fitted to an exact
/// cubic phase polynomial and compiled together with one parity unit per
/// vertex.
pub fn double_semion(lx: usize, ly: usize) -> Result<ModelBundle> {
    let hc = Honeycomb::new(lx, ly)?;
    if hc.n_cells() < 4 {
        return Err(Error::InvalidInput(format!(
            "double-semion: needs at least 4 cells for a nondegenerate loop sector, got {}",
            hc.n_cells()
        )));
    }
    let n = hc.n_edges();
    let configs = cycle_space(&hc);
    // Cycle dimension is cells + 1; keep the fit enumeration tractable.
    if configs.len() > (1 << 16) {
        return Err(Error::Unsupported(format!(
            "double-semion: loop-sign fit over {} configurations is too large",
            configs.len()
        )));
    }
    let signs: Vec<i8> = configs
        .iter()
        .map(|v| if loop_count(&hc, v) % 2 == 0 { 1 } else { -1 })
        .collect();
    let phase = fit_cubic_phase(&configs, &signs, n)?;
    let mut state = ClosedFormState::new(n);
    *state.phase_mut() = phase;
    for vid in 0..hc.n_vertices() {
        state.add_parity(AffineParity::new(hc.vertex_edges(vid).to_vec(), 0))?;
    }
    let rbm = state.compile_to_rbm()?;
    let meta = ModelMeta {
        n_qubits: n,
        // One stabilizer per vertex plus one per plaquette.
        n_interactions: hc.n_vertices() + hc.n_cells(),
        params: vec![("lx".into(), lx), ("ly".into(), ly)],
    };
    Ok(ModelBundle {
        name: "double-semion".into(),
        rbm,
        oracle: Box::new(DoubleSemionOracle { hc }),
        meta,
    })
}

/// State reached from the uniform superposition by applying CCZ to the three
/// edges around every vertex. Repeated triples cancel in pairs because CCZ
/// squares to the identity; the remainder is a hypergraph phase state.
pub fn ccz_model(lx: usize, ly: usize) -> Result<ModelBundle> {
    let hc = Honeycomb::new(lx, ly)?;
    let mut counts: std::collections::BTreeMap<Vec<usize>, usize> = std::collections::BTreeMap::new();
    for vid in 0..hc.n_vertices() {
        let mut triple = hc.vertex_edges(vid).to_vec();
        triple.sort_unstable();
        *counts.entry(triple).or_insert(0) += 1;
    }
    let triples: Vec<Vec<usize>> = counts
        .into_iter()
        .filter(|&(_, c)| c % 2 == 1)
        .map(|(t, _)| t)
        .collect();
    let n_triples = triples.len();
    let hg = Hypergraph::new(hc.n_edges(), triples)?;
    let inner = hypergraph_state(&hg)?;
    let meta = ModelMeta {
        n_qubits: hc.n_edges(),
        n_interactions: n_triples.max(1),
        params: vec![("lx".into(), lx), ("ly".into(), ly)],
    };
    Ok(ModelBundle {
        name: "ccz".into(),
        rbm: inner.rbm,
        oracle: inner.oracle,
        meta,
    })
}
