//! Circuits over {H, S, CZ, CNOT, CCZ, PostPlus}, their lowering to a
//! deep network over binary variables, and the hidden-variable elimination
//! pass that turns the network back into a closed-form state.
//!
//! Lowering assigns one binary variable per wire segment. A wire's variable
//! is replaced whenever an H acts on it; the retired variable becomes a
//! hidden summation variable coupled to its successor by a (-1)^{x x'}
//! term. S adds i^x on the current variable, CZ adds (-1)^{x1 x2}, CCZ adds
//! (-1)^{x1 x2 x3}, and a terminal PostPlus marks the wire's last variable
//! hidden (a uniform sum, which is projection onto |+>). CNOT is sugar for
//! H CZ H on the target. A |0> input is |+> plus an auxiliary hidden
//! variable g coupled by (-1)^{g x}, which sums to a delta pinning the
//! wire's initial variable to 0.
//!
//! The amplitude of the lowered network on a visible assignment is
//! scale * sum over hidden assignments of i^L (-1)^Q (-1)^C with L linear
//! (mod 4, with constant), Q quadratic (mod 2) and C cubic (mod 2).

use std::collections::BTreeSet;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write as _;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::phase_poly::{AffineParity, ClosedFormState};
use crate::rbm::{BitString, DenseState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    H(usize),
    S(usize),
    Cz(usize, usize),
    Cnot(usize, usize),
    Ccz(usize, usize, usize),
    PostPlus(usize),
}

impl Gate {
    pub fn wires(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::S(q) | Gate::PostPlus(q) => vec![q],
            Gate::Cz(a, b) | Gate::Cnot(a, b) => vec![a, b],
            Gate::Ccz(a, b, c) => vec![a, b, c],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WireInput {
    Plus,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliffordCircuit {
    n_wires: usize,
    inputs: Vec<WireInput>,
    gates: Vec<Gate>,
}

impl CliffordCircuit {
    /// All wires start in |+>.
    pub fn new(n_wires: usize) -> Self {
        CliffordCircuit {
            n_wires,
            inputs: vec![WireInput::Plus; n_wires],
            gates: Vec::new(),
        }
    }

    pub fn n_wires(&self) -> usize {
        self.n_wires
    }

    pub fn inputs(&self) -> &[WireInput] {
        &self.inputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn set_input(&mut self, wire: usize, input: WireInput) -> Result<()> {
        if wire >= self.n_wires {
            return Err(Error::DimensionMismatch(format!(
                "wire {} out of range for {} wires",
                wire, self.n_wires
            )));
        }
        self.inputs[wire] = input;
        Ok(())
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        let wires = gate.wires();
        for &w in &wires {
            if w >= self.n_wires {
                return Err(Error::DimensionMismatch(format!(
                    "wire {} out of range for {} wires",
                    w, self.n_wires
                )));
            }
        }
        let mut sorted = wires.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != wires.len() {
            return Err(Error::InvalidInput(format!(
                "gate {:?} repeats a wire",
                gate
            )));
        }
        self.gates.push(gate);
        Ok(())
    }

    /// A projected wire must not be touched afterwards.
    pub fn validate(&self) -> Result<()> {
        let mut dead = vec![false; self.n_wires];
        for gate in &self.gates {
            for w in gate.wires() {
                if dead[w] {
                    return Err(Error::InvalidInput(format!(
                        "wire {} used after its projection",
                        w
                    )));
                }
            }
            if let Gate::PostPlus(q) = gate {
                dead[*q] = true;
            }
        }
        Ok(())
    }

    /// Wires that survive to the output, in wire order.
    pub fn output_wires(&self) -> Vec<usize> {
        let mut projected = vec![false; self.n_wires];
        for gate in &self.gates {
            if let Gate::PostPlus(q) = gate {
                projected[*q] = true;
            }
        }
        (0..self.n_wires).filter(|&w| !projected[w]).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "wires {}", self.n_wires);
        let all_plus = self.inputs.iter().all(|&i| i == WireInput::Plus);
        let all_zero = self.inputs.iter().all(|&i| i == WireInput::Zero);
        if all_zero && self.n_wires > 0 {
            let _ = writeln!(out, "inputs zero");
        } else if !all_plus {
            let toks: Vec<&str> = self
                .inputs
                .iter()
                .map(|&i| if i == WireInput::Plus { "plus" } else { "zero" })
                .collect();
            let _ = writeln!(out, "inputs {}", toks.join(" "));
        }
        for gate in &self.gates {
            let line = match *gate {
                Gate::H(q) => format!("H {}", q),
                Gate::S(q) => format!("S {}", q),
                Gate::Cz(a, b) => format!("CZ {} {}", a, b),
                Gate::Cnot(c, t) => format!("CNOT {} {}", c, t),
                Gate::Ccz(a, b, c) => format!("CCZ {} {} {}", a, b, c),
                Gate::PostPlus(q) => format!("POSTPLUS {}", q),
            };
            let _ = writeln!(out, "{}", line);
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut circuit: Option<CliffordCircuit> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse(format!("line {}: {}", lineno + 1, msg));
            let mut it = line.split_whitespace();
            let tag = it.next().unwrap().to_ascii_uppercase();
            let rest: Vec<&str> = it.collect();
            if tag == "WIRES" {
                if circuit.is_some() {
                    return Err(err("duplicate wires header".into()));
                }
                if rest.len() != 1 {
                    return Err(err("wires takes one count".into()));
                }
                let n: usize = rest[0]
                    .parse()
                    .map_err(|_| err(format!("bad wire count {:?}", rest[0])))?;
                circuit = Some(CliffordCircuit::new(n));
                continue;
            }
            let c = circuit
                .as_mut()
                .ok_or_else(|| err("first declaration must be `wires <n>`".into()))?;
            if tag == "INPUTS" {
                let parse_input = |s: &str| -> Result<WireInput> {
                    match s.to_ascii_lowercase().as_str() {
                        "plus" | "+" => Ok(WireInput::Plus),
                        "zero" | "0" => Ok(WireInput::Zero),
                        other => Err(err(format!("bad input kind {:?}", other))),
                    }
                };
                if rest.len() == 1 {
                    let kind = parse_input(rest[0])?;
                    for w in 0..c.n_wires {
                        c.inputs[w] = kind;
                    }
                } else if rest.len() == c.n_wires {
                    for (w, tok) in rest.iter().enumerate() {
                        c.inputs[w] = parse_input(tok)?;
                    }
                } else {
                    return Err(err(format!(
                        "inputs takes one kind or {} per-wire kinds",
                        c.n_wires
                    )));
                }
                continue;
            }
            let q = |k: usize| -> Result<usize> {
                rest.get(k)
                    .ok_or_else(|| err(format!("{} needs more wire arguments", tag)))?
                    .parse()
                    .map_err(|_| err(format!("bad wire index {:?}", rest[k])))
            };
            let arity_ok = |want: usize| -> Result<()> {
                if rest.len() != want {
                    return Err(err(format!("{} takes {} wire arguments", tag, want)));
                }
                Ok(())
            };
            let gate = match tag.as_str() {
                "H" => {
                    arity_ok(1)?;
                    Gate::H(q(0)?)
                }
                "S" => {
                    arity_ok(1)?;
                    Gate::S(q(0)?)
                }
                "CZ" => {
                    arity_ok(2)?;
                    Gate::Cz(q(0)?, q(1)?)
                }
                "CNOT" => {
                    arity_ok(2)?;
                    Gate::Cnot(q(0)?, q(1)?)
                }
                "CCZ" => {
                    arity_ok(3)?;
                    Gate::Ccz(q(0)?, q(1)?, q(2)?)
                }
                "POSTPLUS" => {
                    arity_ok(1)?;
                    Gate::PostPlus(q(0)?)
                }
                other => return Err(err(format!("unknown gate {:?}", other))),
            };
            c.push(gate).map_err(|e| err(e.to_string()))?;
        }
        let c = circuit.ok_or_else(|| Error::Parse("empty circuit input".into()))?;
        c.validate()?;
        Ok(c)
    }
}

/// Exact statevector over the surviving wires, gate by gate. Projections
/// are deferred to the end (they are terminal per wire) and applied
/// unnormalized: amp_out = <0| + <1| contraction of the projected wire.
pub fn dense_simulate(circuit: &CliffordCircuit, cap: usize) -> Result<DenseState> {
    circuit.validate()?;
    let n = circuit.n_wires();
    if n > cap {
        return Err(Error::DenseCapExceeded { needed: n, cap });
    }
    let dim = 1usize << n;
    let mask = |w: usize| 1usize << (n - 1 - w);
    let n_plus = circuit
        .inputs()
        .iter()
        .filter(|&&i| i == WireInput::Plus)
        .count();
    let base = FRAC_1_SQRT_2.powi(n_plus as i32);
    let mut amps = vec![C64::new(base, 0.0); dim];
    for (w, &input) in circuit.inputs().iter().enumerate() {
        if input == WireInput::Zero {
            for (idx, a) in amps.iter_mut().enumerate() {
                if idx & mask(w) != 0 {
                    *a = C64::new(0.0, 0.0);
                }
            }
        }
    }
    let mut projected = Vec::new();
    for gate in circuit.gates() {
        match *gate {
            Gate::H(q) => {
                let m = mask(q);
                for idx in 0..dim {
                    if idx & m == 0 {
                        let lo = amps[idx];
                        let hi = amps[idx | m];
                        amps[idx] = (lo + hi) * FRAC_1_SQRT_2;
                        amps[idx | m] = (lo - hi) * FRAC_1_SQRT_2;
                    }
                }
            }
            Gate::S(q) => {
                let m = mask(q);
                for (idx, a) in amps.iter_mut().enumerate() {
                    if idx & m != 0 {
                        *a *= C64::new(0.0, 1.0);
                    }
                }
            }
            Gate::Cz(a, b) => {
                let m = mask(a) | mask(b);
                for (idx, amp) in amps.iter_mut().enumerate() {
                    if idx & m == m {
                        *amp = -*amp;
                    }
                }
            }
            Gate::Cnot(c, t) => {
                let mc = mask(c);
                let mt = mask(t);
                for idx in 0..dim {
                    if idx & mc != 0 && idx & mt == 0 {
                        amps.swap(idx, idx | mt);
                    }
                }
            }
            Gate::Ccz(a, b, c) => {
                let m = mask(a) | mask(b) | mask(c);
                for (idx, amp) in amps.iter_mut().enumerate() {
                    if idx & m == m {
                        *amp = -*amp;
                    }
                }
            }
            Gate::PostPlus(q) => projected.push(q),
        }
    }
    // contract projected wires, highest wire first so lower masks stay valid
    projected.sort_unstable();
    let mut n_cur = n;
    for &w in projected.iter().rev() {
        let m = 1usize << (n_cur - 1 - w);
        let half = amps.len() / 2;
        let mut next = Vec::with_capacity(half);
        for out in 0..half {
            let low = out & (m - 1);
            let high = (out & !(m - 1)) << 1;
            let base = high | low;
            next.push(amps[base] + amps[base | m]);
        }
        amps = next;
        n_cur -= 1;
    }
    DenseState::new(n_cur, amps)
}

/// Lowered network: linear part mod 4 (plus constant), quadratic mod 2,
/// cubic mod 2, over one variable per wire segment. Variable ids increase
/// in introduction order.
#[derive(Debug, Clone)]
pub struct DbmNetwork {
    n_vars: usize,
    visible: Vec<usize>,
    hidden: Vec<usize>,
    lin: Vec<u8>,
    lin_const: u8,
    quad: BTreeSet<(usize, usize)>,
    cubic: BTreeSet<(usize, usize, usize)>,
}

impl DbmNetwork {
    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn visible(&self) -> &[usize] {
        &self.visible
    }

    pub fn hidden(&self) -> &[usize] {
        &self.hidden
    }

    pub fn snapshot(&self) -> DbmSnapshot {
        DbmSnapshot {
            n_vars: self.n_vars,
            visible: self.visible.clone(),
            remaining_hidden: self.hidden.clone(),
            lin: self.lin.clone(),
            lin_const: self.lin_const,
            quad: self.quad.clone(),
            cubic: self.cubic.clone(),
            parities: Vec::new(),
            scale: C64::new(1.0, 0.0),
        }
    }
}

/// One variable per wire segment; see module docs for the per-gate terms.
pub fn circuit_to_dbm(circuit: &CliffordCircuit) -> Result<DbmNetwork> {
    struct Lowering {
        cur: Vec<Option<usize>>,
        next_var: usize,
        retired: Vec<usize>,
        lin: Vec<u8>,
        quad: BTreeSet<(usize, usize)>,
        cubic: BTreeSet<(usize, usize, usize)>,
    }
    impl Lowering {
        fn var(&self, w: usize) -> usize {
            self.cur[w].expect("validated circuit")
        }
        fn toggle_quad(&mut self, a: usize, b: usize) {
            let key = (a.min(b), a.max(b));
            if !self.quad.insert(key) {
                self.quad.remove(&key);
            }
        }
        fn apply_h(&mut self, q: usize) {
            let old = self.var(q);
            let new = self.next_var;
            self.next_var += 1;
            self.lin.push(0);
            self.toggle_quad(old, new);
            self.retired.push(old);
            self.cur[q] = Some(new);
        }
    }

    circuit.validate()?;
    let n = circuit.n_wires();
    let mut lw = Lowering {
        cur: (0..n).map(Some).collect(),
        next_var: n,
        retired: Vec::new(),
        lin: vec![0; n],
        quad: BTreeSet::new(),
        cubic: BTreeSet::new(),
    };
    // auxiliary variables pinning |0> wires to 0, allocated before any gate
    // variables so they are eliminated first
    for (w, &input) in circuit.inputs().iter().enumerate() {
        if input == WireInput::Zero {
            let g = lw.next_var;
            lw.next_var += 1;
            lw.lin.push(0);
            lw.retired.push(g);
            lw.toggle_quad(g, w);
        }
    }
    let mut postplussed = Vec::new();
    for gate in circuit.gates() {
        match *gate {
            Gate::H(q) => lw.apply_h(q),
            Gate::S(q) => {
                let x = lw.var(q);
                lw.lin[x] = (lw.lin[x] + 1) % 4;
            }
            Gate::Cz(a, b) => {
                let (x, y) = (lw.var(a), lw.var(b));
                lw.toggle_quad(x, y);
            }
            Gate::Cnot(c, t) => {
                lw.apply_h(t);
                let (x, y) = (lw.var(c), lw.var(t));
                lw.toggle_quad(x, y);
                lw.apply_h(t);
            }
            Gate::Ccz(a, b, c) => {
                let mut t = [lw.var(a), lw.var(b), lw.var(c)];
                t.sort_unstable();
                let key = (t[0], t[1], t[2]);
                if !lw.cubic.insert(key) {
                    lw.cubic.remove(&key);
                }
            }
            Gate::PostPlus(q) => {
                postplussed.push(lw.var(q));
                lw.cur[q] = None;
            }
        }
    }
    let visible: Vec<usize> = (0..n).filter_map(|w| lw.cur[w]).collect();
    let mut hidden = lw.retired;
    hidden.extend(postplussed);
    hidden.sort_unstable();
    Ok(DbmNetwork {
        n_vars: lw.next_var,
        visible,
        hidden,
        lin: lw.lin,
        lin_const: 0,
        quad: lw.quad,
        cubic: lw.cubic,
    })
}

/// A partially eliminated network, still evaluable by brute force. Tracks
/// parity constraints already extracted and the exact scalar accumulated by
/// the eliminations so far.
#[derive(Debug, Clone)]
pub struct DbmSnapshot {
    pub n_vars: usize,
    pub visible: Vec<usize>,
    pub remaining_hidden: Vec<usize>,
    pub lin: Vec<u8>,
    pub lin_const: u8,
    pub quad: BTreeSet<(usize, usize)>,
    pub cubic: BTreeSet<(usize, usize, usize)>,
    /// (support over variable ids, constant bit)
    pub parities: Vec<(Vec<usize>, u8)>,
    pub scale: C64,
}

const I_POW: [(f64, f64); 4] = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];

impl DbmSnapshot {
    pub fn n_visible(&self) -> usize {
        self.visible.len()
    }

    pub fn total_vars(&self) -> usize {
        self.visible.len() + self.remaining_hidden.len()
    }

    /// Sums i^L (-1)^{Q+C} over the remaining hidden variables, applying
    /// parity indicators and the accumulated scale. Exponential in the
    /// hidden count; meant for small verification instances.
    pub fn brute_eval(&self, v: &BitString) -> Result<C64> {
        if v.len() != self.visible.len() {
            return Err(Error::DimensionMismatch(format!(
                "assignment has {} bits, network has {} visibles",
                v.len(),
                self.visible.len()
            )));
        }
        let mut vals = vec![0u8; self.n_vars];
        for (pos, &id) in self.visible.iter().enumerate() {
            vals[id] = v.get(pos);
        }
        for (support, constant) in &self.parities {
            let mut s = *constant;
            for &id in support {
                s ^= vals[id];
            }
            if s != 0 {
                return Ok(C64::new(0.0, 0.0));
            }
        }
        let h = self.remaining_hidden.len();
        let mut total = C64::new(0.0, 0.0);
        for assign in 0..1usize << h {
            for (k, &id) in self.remaining_hidden.iter().enumerate() {
                vals[id] = ((assign >> k) & 1) as u8;
            }
            let mut e = self.lin_const as u32;
            for (id, &c) in self.lin.iter().enumerate() {
                e += c as u32 * vals[id] as u32;
            }
            for &(a, b) in &self.quad {
                e += 2 * (vals[a] & vals[b]) as u32;
            }
            for &(a, b, c) in &self.cubic {
                e += 2 * (vals[a] & vals[b] & vals[c]) as u32;
            }
            let (re, im) = I_POW[(e % 4) as usize];
            total += C64::new(re, im);
        }
        Ok(total * self.scale)
    }

    fn toggle_quad(&mut self, a: usize, b: usize) {
        if a == b {
            // (-1)^{x x} = (-1)^x on bits
            self.lin[a] = (self.lin[a] + 2) % 4;
            return;
        }
        let key = (a.min(b), a.max(b));
        if !self.quad.insert(key) {
            self.quad.remove(&key);
        }
    }

    /// Adds mu * (sum_{y in s} y + c)^2 to L. On bits the square expands to
    /// mu(1+2c) sum y + 2 mu sum_{x<y} xy + mu c (mod 4).
    fn add_scaled_square(&mut self, s: &[usize], c: u8, mu: u8) {
        let mu = mu % 4;
        if mu == 0 {
            return;
        }
        let lin_coeff = (mu as u32 * (1 + 2 * c as u32) % 4) as u8;
        for &y in s {
            self.lin[y] = (self.lin[y] + lin_coeff) % 4;
        }
        if mu % 2 == 1 {
            for (k, &x) in s.iter().enumerate() {
                for &y in &s[k + 1..] {
                    self.toggle_quad(x, y);
                }
            }
        }
        self.lin_const = (self.lin_const + mu * (c % 2)) % 4;
    }
}

/// One hidden variable's worth of elimination.
#[derive(Debug, Clone)]
pub struct TraceStep {
    pub eliminated: usize,
    /// "1.1" parity extraction, "1.2" substitution, "2" odd linear weight
    pub case_label: &'static str,
    pub partner: Option<usize>,
    pub after: DbmSnapshot,
}

#[derive(Debug, Clone)]
pub struct Elimination {
    pub state: ClosedFormState,
    /// Exact prefactor: dbm sum = scale * state.eval, configuration-wise.
    pub scale: C64,
    pub trace: Vec<TraceStep>,
}

/// Removes hidden variables earliest-introduced first.
///
/// With lambda the hidden variable's linear weight and P its set of
/// quadratic partners: even lambda sums to 2 delta(P + lambda/2 mod 2),
/// which either becomes a parity constraint (all-visible P) or pins the
/// lowest-indexed hidden partner h_j, substituting h_j := L' in Q and
/// (L')^2 in L. Odd lambda sums to (1+i) i^{3(P+c0)^2} with c0 = 0 for
/// lambda = 1 and c0 = 1 for lambda = 3, re-expanded into L and Q.
pub fn eliminate(dbm: &DbmNetwork) -> Result<Elimination> {
    let mut work = dbm.snapshot();
    let is_hidden = {
        let mut v = vec![false; dbm.n_vars];
        for &h in &dbm.hidden {
            v[h] = true;
        }
        v
    };
    for &(a, b, c) in &work.cubic {
        if is_hidden[a] || is_hidden[b] || is_hidden[c] {
            return Err(Error::Unsupported(format!(
                "cubic term ({}, {}, {}) touches a hidden variable; an H or \
                 projection after a CCZ is outside the closed-form fragment",
                a, b, c
            )));
        }
    }
    let mut removed = vec![false; dbm.n_vars];
    let mut trace = Vec::new();
    let order = dbm.hidden.clone();
    for &h in &order {
        if removed[h] {
            continue;
        }
        removed[h] = true;
        work.remaining_hidden.retain(|&x| x != h);
        let lambda = work.lin[h] % 4;
        work.lin[h] = 0;
        let partners: Vec<usize> = work
            .quad
            .iter()
            .filter(|&&(a, b)| a == h || b == h)
            .map(|&(a, b)| if a == h { b } else { a })
            .collect();
        work.quad.retain(|&(a, b)| a != h && b != h);
        let (case_label, partner) = if lambda % 2 == 0 {
            let c0 = lambda / 2;
            let hidden_partner = partners
                .iter()
                .copied()
                .filter(|&y| is_hidden[y] && !removed[y])
                .min();
            match hidden_partner {
                None => {
                    // case 1.1: 2 delta over visibles only
                    if partners.is_empty() {
                        if c0 == 1 {
                            // delta(1) = 0: the whole state vanishes
                            work.parities.push((Vec::new(), 1));
                        }
                    } else {
                        work.parities.push((partners.clone(), c0));
                    }
                    work.scale *= 2.0;
                    ("1.1", None)
                }
                Some(hj) => {
                    // case 1.2: the delta pins h_j = L' = sum of the other
                    // partners + c0
                    removed[hj] = true;
                    work.remaining_hidden.retain(|&x| x != hj);
                    let s: Vec<usize> = partners.iter().copied().filter(|&y| y != hj).collect();
                    let lambda_j = work.lin[hj] % 4;
                    work.lin[hj] = 0;
                    let hj_partners: Vec<usize> = work
                        .quad
                        .iter()
                        .filter(|&&(a, b)| a == hj || b == hj)
                        .map(|&(a, b)| if a == hj { b } else { a })
                        .collect();
                    work.quad.retain(|&(a, b)| a != hj && b != hj);
                    for &y in &hj_partners {
                        for &x in &s {
                            work.toggle_quad(x, y);
                        }
                        if c0 == 1 {
                            work.lin[y] = (work.lin[y] + 2) % 4;
                        }
                    }
                    work.add_scaled_square(&s, c0, lambda_j);
                    work.scale *= 2.0;
                    ("1.2", Some(hj))
                }
            }
        } else {
            // case 2: factor (1+i) i^{3(P + c0)^2}
            let c0 = if lambda == 3 { 1 } else { 0 };
            work.add_scaled_square(&partners, c0, 3);
            work.scale *= C64::new(1.0, 1.0);
            ("2", None)
        };
        trace.push(TraceStep {
            eliminated: h,
            case_label,
            partner,
            after: work.clone(),
        });
    }
    // map variable ids to visible positions
    let mut pos = vec![usize::MAX; dbm.n_vars];
    for (p, &id) in work.visible.iter().enumerate() {
        pos[id] = p;
    }
    let mut state = ClosedFormState::new(work.visible.len());
    state.phase_mut().add_constant((2 * work.lin_const) % 8);
    for (id, &c) in work.lin.iter().enumerate() {
        if c != 0 {
            debug_assert!(pos[id] != usize::MAX);
            state.phase_mut().add_linear(pos[id], (2 * c) % 8)?;
        }
    }
    for &(a, b) in &work.quad {
        state.phase_mut().add_quadratic(pos[a], pos[b], 2)?;
    }
    for &(a, b, c) in &work.cubic {
        state.phase_mut().add_cubic(pos[a], pos[b], pos[c], 1)?;
    }
    for (support, constant) in &work.parities {
        let mapped: Vec<usize> = support.iter().map(|&id| pos[id]).collect();
        state.add_parity(AffineParity::new(mapped, *constant))?;
    }
    Ok(Elimination {
        state,
        scale: work.scale,
        trace,
    })
}

/// Full lowering pipeline: circuit -> network -> elimination -> compiled
/// connections, with the accumulated scalar folded into the log scale.
pub fn circuit_to_rbm(circuit: &CliffordCircuit) -> Result<crate::rbm::RbmNetwork> {
    let dbm = circuit_to_dbm(circuit)?;
    let elim = eliminate(&dbm)?;
    let mut net = elim.state.compile_to_rbm()?;
    net.add_log_scale(elim.scale.ln());
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rbm::fidelity;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_circuit(
        rng: &mut ChaCha8Rng,
        n: usize,
        len: usize,
        zero_inputs: bool,
    ) -> CliffordCircuit {
        let mut circ = CliffordCircuit::new(n);
        if zero_inputs {
            for w in 0..n {
                if rng.gen_bool(0.5) {
                    circ.set_input(w, WireInput::Zero).unwrap();
                }
            }
        }
        for _ in 0..len {
            let kinds = if n >= 2 { 4 } else { 2 };
            let gate = match rng.gen_range(0..kinds) {
                0 => Gate::H(rng.gen_range(0..n)),
                1 => Gate::S(rng.gen_range(0..n)),
                2 => {
                    let idx = rand::seq::index::sample(rng, n, 2).into_vec();
                    Gate::Cz(idx[0], idx[1])
                }
                _ => {
                    let idx = rand::seq::index::sample(rng, n, 2).into_vec();
                    Gate::Cnot(idx[0], idx[1])
                }
            };
            circ.push(gate).unwrap();
        }
        circ
    }

    #[test]
    fn empty_circuit_is_uniform() {
        let circ = CliffordCircuit::new(2);
        let dense = dense_simulate(&circ, 24).unwrap();
        for idx in 0..4 {
            let a = dense.amps[idx];
            assert!((a - c(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn cz_circuit_gives_graph_state_dbm() {
        let mut circ = CliffordCircuit::new(2);
        circ.push(Gate::Cz(0, 1)).unwrap();
        let dbm = circuit_to_dbm(&circ).unwrap();
        assert!(dbm.hidden().is_empty());
        assert_eq!(dbm.visible(), &[0, 1]);
        let snap = dbm.snapshot();
        assert!(snap.quad.contains(&(0, 1)));
        let dense = dense_simulate(&circ, 24).unwrap();
        assert!((dense.amps[3] - c(-0.5, 0.0)).norm() < 1e-15);
        assert!((dense.amps[0] - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn single_h_eliminates_to_zero_ket() {
        let mut circ = CliffordCircuit::new(1);
        circ.push(Gate::H(0)).unwrap();
        let dbm = circuit_to_dbm(&circ).unwrap();
        assert_eq!(dbm.hidden(), &[0]);
        let elim = eliminate(&dbm).unwrap();
        assert_eq!(elim.trace.len(), 1);
        assert_eq!(elim.trace[0].case_label, "1.1");
        let v0 = elim.state.eval(&BitString::parse("0").unwrap()).unwrap();
        let v1 = elim.state.eval(&BitString::parse("1").unwrap()).unwrap();
        assert!((v0 - c(1.0, 0.0)).norm() < 1e-15);
        assert!(v1.norm() < 1e-15);
        // H|+> = |0> exactly; the elimination reaches the same ray with
        // scale 2 instead
        let dense = dense_simulate(&circ, 24).unwrap();
        assert!((dense.amps[0] - c(1.0, 0.0)).norm() < 1e-12);
        assert!(dense.amps[1].norm() < 1e-15);
    }

    #[test]
    fn zero_input_pins_initial_variable() {
        let mut circ = CliffordCircuit::new(1);
        circ.set_input(0, WireInput::Zero).unwrap();
        let pipeline = circuit_to_rbm(&circ).unwrap().dense_state(24).unwrap();
        let dense = dense_simulate(&circ, 24).unwrap();
        assert!(fidelity(&pipeline, &dense).unwrap() > 1.0 - 1e-12);
        // and through an H, which turns |0> into |+>
        let mut circ2 = CliffordCircuit::new(1);
        circ2.set_input(0, WireInput::Zero).unwrap();
        circ2.push(Gate::H(0)).unwrap();
        let pipeline2 = circuit_to_rbm(&circ2).unwrap().dense_state(24).unwrap();
        let dense2 = dense_simulate(&circ2, 24).unwrap();
        assert!(fidelity(&pipeline2, &dense2).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn s_then_h_gives_one_plus_i_phases() {
        // HS|+> = ((1+i)|0> + (1-i)|1>)/2: the retired variable carries an
        // odd linear weight, so elimination must go through the odd case
        let mut circ = CliffordCircuit::new(1);
        circ.push(Gate::S(0)).unwrap();
        circ.push(Gate::H(0)).unwrap();
        let dbm = circuit_to_dbm(&circ).unwrap();
        let elim = eliminate(&dbm).unwrap();
        assert_eq!(elim.trace.len(), 1);
        assert_eq!(elim.trace[0].case_label, "2");
        assert!((elim.scale - c(1.0, 1.0)).norm() < 1e-15);
        let dense = dense_simulate(&circ, 24).unwrap();
        let compiled = circuit_to_rbm(&circ).unwrap().dense_state(24).unwrap();
        assert!(fidelity(&compiled, &dense).unwrap() > 1.0 - 1e-12);
        let a0 = dense.amps[0];
        let a1 = dense.amps[1];
        assert!((a0 - c(0.5, 0.5)).norm() < 1e-12);
        assert!((a1 - c(0.5, -0.5)).norm() < 1e-12);
    }

    #[test]
    fn h_s_h_pins_the_middle_segment() {
        // eliminating the first retired variable pins the second to zero,
        // which erases the S phase: HSH|+> = |+>
        let mut circ = CliffordCircuit::new(1);
        circ.push(Gate::H(0)).unwrap();
        circ.push(Gate::S(0)).unwrap();
        circ.push(Gate::H(0)).unwrap();
        let dbm = circuit_to_dbm(&circ).unwrap();
        let elim = eliminate(&dbm).unwrap();
        assert_eq!(elim.trace.len(), 1);
        assert_eq!(elim.trace[0].case_label, "1.2");
        assert_eq!(elim.trace[0].partner, Some(1));
        let dense = dense_simulate(&circ, 24).unwrap();
        let compiled = circuit_to_rbm(&circ).unwrap().dense_state(24).unwrap();
        assert!(fidelity(&compiled, &dense).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn ccz_pair_lowered_to_cubic_terms() {
        let mut circ = CliffordCircuit::new(5);
        circ.push(Gate::Ccz(0, 1, 2)).unwrap();
        circ.push(Gate::Ccz(2, 3, 4)).unwrap();
        let dbm = circuit_to_dbm(&circ).unwrap();
        assert!(dbm.hidden().is_empty());
        let snap = dbm.snapshot();
        assert_eq!(snap.cubic.len(), 2);
        assert!(snap.cubic.contains(&(0, 1, 2)));
        assert!(snap.cubic.contains(&(2, 3, 4)));
        let compiled = circuit_to_rbm(&circ).unwrap().dense_state(24).unwrap();
        let dense = dense_simulate(&circ, 24).unwrap();
        assert!(fidelity(&compiled, &dense).unwrap() > 1.0 - 1e-9);
        let elim = eliminate(&dbm).unwrap();
        assert!(elim.trace.is_empty());
    }

    #[test]
    fn repeated_ccz_cancels() {
        let mut circ = CliffordCircuit::new(3);
        circ.push(Gate::Ccz(0, 1, 2)).unwrap();
        circ.push(Gate::Ccz(2, 0, 1)).unwrap();
        let dbm = circuit_to_dbm(&circ).unwrap();
        assert!(dbm.snapshot().cubic.is_empty());
    }

    #[test]
    fn cubic_touching_hidden_is_rejected() {
        let mut circ = CliffordCircuit::new(3);
        circ.push(Gate::Ccz(0, 1, 2)).unwrap();
        circ.push(Gate::H(0)).unwrap();
        let dbm = circuit_to_dbm(&circ).unwrap();
        match eliminate(&dbm) {
            Err(Error::Unsupported(_)) => {}
            other => panic!("expected unsupported-structure error, got {:?}", other),
        }
    }

    #[test]
    fn postplus_contracts_like_dense_projection() {
        // CZ then project wire 1: <+|_1 CZ |+>|+> = (|0> + |1>)/2-ish ray
        let mut circ = CliffordCircuit::new(2);
        circ.push(Gate::Cz(0, 1)).unwrap();
        circ.push(Gate::PostPlus(1)).unwrap();
        let dense = dense_simulate(&circ, 24).unwrap();
        assert_eq!(dense.n, 1);
        let compiled = circuit_to_rbm(&circ).unwrap().dense_state(24).unwrap();
        assert!(fidelity(&compiled, &dense).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn wire_use_after_projection_is_rejected() {
        let mut circ = CliffordCircuit::new(2);
        circ.push(Gate::PostPlus(0)).unwrap();
        circ.push(Gate::H(0)).unwrap();
        assert!(circ.validate().is_err());
    }

    #[test]
    fn random_circuits_match_dense_simulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for trial in 0..60 {
            let n = rng.gen_range(2..=5);
            let len = rng.gen_range(0..=30);
            let circ = random_circuit(&mut rng, n, len, trial % 3 == 0);
            let compiled = circuit_to_rbm(&circ).unwrap().dense_state(24).unwrap();
            let dense = dense_simulate(&circ, 24).unwrap();
            let f = fidelity(&compiled, &dense).unwrap();
            assert!(f > 1.0 - 1e-9, "trial {} fidelity {}", trial, f);
        }
    }

    #[test]
    fn elimination_steps_preserve_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for trial in 0..40 {
            let n = rng.gen_range(1..=4);
            let len = rng.gen_range(0..=8);
            let circ = random_circuit(&mut rng, n, len, false);
            let dbm = circuit_to_dbm(&circ).unwrap();
            if dbm.n_vars() > 12 {
                continue;
            }
            let elim = eliminate(&dbm).unwrap();
            let mut prev = dbm.snapshot();
            for (k, step) in elim.trace.iter().enumerate() {
                for idx in 0..1usize << prev.n_visible() {
                    let v = BitString::from_index(idx, prev.n_visible());
                    let before = prev.brute_eval(&v).unwrap();
                    let after = step.after.brute_eval(&v).unwrap();
                    assert!(
                        (before - after).norm() < 1e-9 * (1.0 + before.norm()),
                        "trial {} step {} ({}) idx {}: {} vs {}",
                        trial,
                        k,
                        step.case_label,
                        idx,
                        before,
                        after
                    );
                }
                prev = step.after.clone();
            }
            // final snapshot agrees with the closed form times its scale
            for idx in 0..1usize << prev.n_visible() {
                let v = BitString::from_index(idx, prev.n_visible());
                let brute = prev.brute_eval(&v).unwrap();
                let closed = elim.state.eval(&v).unwrap() * elim.scale;
                assert!((brute - closed).norm() < 1e-9 * (1.0 + brute.norm()));
            }
        }
    }

    #[test]
    fn circuit_text_round_trip() {
        let mut circ = CliffordCircuit::new(3);
        circ.set_input(1, WireInput::Zero).unwrap();
        circ.push(Gate::H(0)).unwrap();
        circ.push(Gate::Cnot(0, 1)).unwrap();
        circ.push(Gate::Ccz(0, 1, 2)).unwrap();
        circ.push(Gate::PostPlus(2)).unwrap();
        let text = circ.to_text();
        let back = CliffordCircuit::parse(&text).unwrap();
        assert_eq!(circ, back);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = CliffordCircuit::parse("wires 2\nCZ 0\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{}", err);
        let err = CliffordCircuit::parse("wires 2\nCZ 1 1\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{}", err);
        let err = CliffordCircuit::parse("H 0\n").unwrap_err();
        assert!(err.to_string().contains("wires"), "{}", err);
    }
}
