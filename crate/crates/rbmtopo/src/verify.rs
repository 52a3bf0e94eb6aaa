//! Differential verification: compares an RBM against its model oracle,
//! checks elimination traces step by step, and accounts hidden-unit budgets.

use std::fmt;
use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::{eliminate, DbmNetwork};
use crate::error::{Error, Result};
use crate::models::ModelBundle;
use crate::rbm::BitString;

/// How the amplitudes entering a report were gathered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyMode {
    /// All `2^n` amplitudes.
    Dense,
    /// Seeded random configurations plus all-zeros and all-ones.
    Spot,
}

impl fmt::Display for VerifyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyMode::Dense => write!(f, "dense"),
            VerifyMode::Spot => write!(f, "spot"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    /// Fidelity must reach `1 - tol`.
    pub tol: f64,
    /// Aligned per-amplitude error must stay at or below this.
    pub tol_amp: f64,
    /// Visible counts above this use spot checks instead of dense states.
    pub dense_cap: usize,
    /// Random configurations drawn in spot mode.
    pub spot_samples: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            tol: 1e-9,
            tol_amp: 1e-6,
            dense_cap: crate::rbm::DEFAULT_DENSE_CAP,
            spot_samples: 10_000,
            seed: 0,
        }
    }
}

/// Outcome of one bundle check; `pass` holds exactly when the fidelity
/// reaches `1 - tol` and the aligned amplitude error stays within `tol_amp`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub model: String,
    pub n: usize,
    pub mode: VerifyMode,
    pub seed: u64,
    pub samples: usize,
    pub fidelity: f64,
    /// Largest `|rbm - scale * oracle|` after scaling on the reference
    /// configuration, relative to the largest aligned oracle magnitude.
    pub max_aligned_amp_error: f64,
    pub hidden_count: usize,
    /// Hidden-unit budget `8 * (interactions + qubits)` for the model.
    pub bound: usize,
    pub elapsed_seconds: f64,
    pub tol: f64,
    pub tol_amp: f64,
    pub pass: bool,
}

impl VerifyReport {
    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Two-column table for humans; JSON stays the machine interface.
    pub fn to_table(&self) -> String {
        let mut rows = vec![
            ("model", self.model.clone()),
            ("visible units", self.n.to_string()),
            ("mode", self.mode.to_string()),
            ("seed", self.seed.to_string()),
            ("amplitudes compared", self.samples.to_string()),
            ("fidelity", format!("{:.12}", self.fidelity)),
            (
                "max aligned amp error",
                format!("{:.3e}", self.max_aligned_amp_error),
            ),
            ("hidden units", self.hidden_count.to_string()),
            ("hidden bound", self.bound.to_string()),
            ("elapsed", format!("{:.3}s", self.elapsed_seconds)),
            ("result", if self.pass { "PASS".into() } else { "FAIL".into() }),
        ];
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in rows.drain(..) {
            out.push_str(&format!("{k:<width$}  {v}\n"));
        }
        out
    }
}

/// Fidelity and single-reference aligned error between paired amplitude
/// vectors. The reference is the largest-magnitude oracle amplitude, so the
/// numbers are invariant under a global phase or scale on either side.
fn compare_amplitudes(rbm: &[C64], oracle: &[C64]) -> Result<(f64, f64)> {
    if rbm.len() != oracle.len() || rbm.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "amplitude vectors of length {} vs {}",
            rbm.len(),
            oracle.len()
        )));
    }
    let norm_r: f64 = rbm.iter().map(|a| a.norm_sqr()).sum();
    let norm_o: f64 = oracle.iter().map(|a| a.norm_sqr()).sum();
    if norm_o == 0.0 {
        return Err(Error::ZeroNorm(
            "oracle amplitudes vanish on every compared configuration".into(),
        ));
    }
    if norm_r == 0.0 {
        return Err(Error::ZeroNorm(
            "network amplitudes vanish on every compared configuration".into(),
        ));
    }
    let overlap: C64 = rbm
        .iter()
        .zip(oracle)
        .map(|(a, b)| a.conj() * b)
        .sum();
    let fidelity = overlap.norm_sqr() / (norm_r * norm_o);

    let (ref_idx, ref_mag) = oracle
        .iter()
        .enumerate()
        .map(|(i, a)| (i, a.norm()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty");
    debug_assert!(ref_mag > 0.0);
    let scale = rbm[ref_idx] / oracle[ref_idx];
    let denom = scale.norm() * ref_mag;
    let max_err = rbm
        .iter()
        .zip(oracle)
        .map(|(a, b)| (a - scale * b).norm())
        .fold(0.0, f64::max);
    let rel_err = if denom > 0.0 {
        max_err / denom
    } else if max_err > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    Ok((fidelity, rel_err))
}

/// Compares the bundle's RBM against its oracle, densely when `n` fits the
/// cap and by seeded spot checks otherwise.
pub fn check_bundle(bundle: &ModelBundle, opts: &VerifyOptions) -> Result<VerifyReport> {
    let start = Instant::now();
    let n = bundle.rbm.n_visible();
    if bundle.oracle.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "network has {} visible units but oracle expects {}",
            n,
            bundle.oracle.n()
        )));
    }
    let (mode, samples, rbm_amps, oracle_amps) = if n <= opts.dense_cap {
        let dense = bundle.rbm.dense_state(opts.dense_cap)?;
        let oracle = bundle.oracle.dense(opts.dense_cap)?;
        let count = dense.amps.len();
        (VerifyMode::Dense, count, dense.amps, oracle.amps)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut configs = vec![BitString::zeros(n), BitString::ones(n)];
        for _ in 0..opts.spot_samples {
            let bits: Vec<u8> = (0..n).map(|_| u8::from(rng.gen::<bool>())).collect();
            configs.push(BitString::new(bits)?);
        }
        let mut rbm_amps = Vec::with_capacity(configs.len());
        let mut oracle_amps = Vec::with_capacity(configs.len());
        for v in &configs {
            rbm_amps.push(bundle.rbm.amplitude(v)?);
            oracle_amps.push(bundle.oracle.amplitude(v)?);
        }
        (VerifyMode::Spot, configs.len(), rbm_amps, oracle_amps)
    };
    let (fidelity, max_err) = compare_amplitudes(&rbm_amps, &oracle_amps)?;
    let pass = fidelity >= 1.0 - opts.tol && max_err <= opts.tol_amp;
    Ok(VerifyReport {
        model: bundle.name.clone(),
        n,
        mode,
        seed: opts.seed,
        samples,
        fidelity,
        max_aligned_amp_error: max_err,
        hidden_count: bundle.rbm.n_hidden(),
        bound: bundle.hidden_bound(),
        elapsed_seconds: start.elapsed().as_secs_f64(),
        tol: opts.tol,
        tol_amp: opts.tol_amp,
        pass,
    })
}

/// One elimination step checked against brute-force hidden sums.
#[derive(Debug, Clone, Serialize)]
pub struct TraceStepReport {
    pub step: usize,
    pub eliminated_var: usize,
    pub case_label: &'static str,
    pub max_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceReport {
    pub n_visible: usize,
    pub total_vars: usize,
    pub steps: Vec<TraceStepReport>,
    pub pass: bool,
}

/// Verifies that every elimination step preserves the summed network value
/// on all visible assignments. Brute-force in the variable count.
pub fn check_elimination_trace(dbm: &DbmNetwork) -> Result<TraceReport> {
    let total = dbm.n_vars();
    if total > 12 {
        return Err(Error::InvalidInput(format!(
            "brute-force trace check supports at most 12 variables, got {total}"
        )));
    }
    let n_visible = dbm.visible().len();
    let initial = dbm.snapshot();
    let reference: Vec<C64> = (0..(1usize << n_visible))
        .map(|idx| initial.brute_eval(&BitString::from_index(idx, n_visible)))
        .collect::<Result<_>>()?;
    let scale_ref = reference
        .iter()
        .map(|a| a.norm())
        .fold(1.0, f64::max);
    let elimination = eliminate(dbm)?;
    let mut steps = Vec::with_capacity(elimination.trace.len());
    let mut all_pass = true;
    for (k, step) in elimination.trace.iter().enumerate() {
        let mut max_error = 0.0f64;
        for (idx, want) in reference.iter().enumerate() {
            let got = step.after.brute_eval(&BitString::from_index(idx, n_visible))?;
            max_error = max_error.max((got - want).norm());
        }
        let pass = max_error <= 1e-9 * scale_ref;
        all_pass &= pass;
        steps.push(TraceStepReport {
            step: k,
            eliminated_var: step.eliminated,
            case_label: step.case_label,
            max_error,
            pass,
        });
    }
    Ok(TraceReport {
        n_visible,
        total_vars: total,
        steps,
        pass: all_pass,
    })
}

/// Hidden-unit accounting against the per-model budget. Informational:
/// `within_bound` is reported, never enforced here.
#[derive(Debug, Clone, Serialize)]
pub struct ResourceReport {
    pub model: String,
    pub n: usize,
    pub hidden_count: usize,
    pub weight_count: usize,
    pub sparsity: f64,
    pub n_interactions: usize,
    pub bound: usize,
    pub within_bound: bool,
}

impl ResourceReport {
    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_table(&self) -> String {
        let rows = vec![
            ("model", self.model.clone()),
            ("visible units", self.n.to_string()),
            ("hidden units", self.hidden_count.to_string()),
            ("nonzero weights", self.weight_count.to_string()),
            ("sparsity", format!("{:.4}", self.sparsity)),
            ("interactions", self.n_interactions.to_string()),
            ("hidden bound", self.bound.to_string()),
            (
                "within bound",
                if self.within_bound { "yes".into() } else { "NO".into() },
            ),
        ];
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in rows {
            out.push_str(&format!("{k:<width$}  {v}\n"));
        }
        out
    }
}

pub fn resource_report(bundle: &ModelBundle) -> ResourceReport {
    let bound = bundle.hidden_bound();
    let hidden = bundle.rbm.n_hidden();
    ResourceReport {
        model: bundle.name.clone(),
        n: bundle.rbm.n_visible(),
        hidden_count: hidden,
        weight_count: bundle.rbm.weight_count(),
        sparsity: bundle.rbm.sparsity(),
        n_interactions: bundle.meta.n_interactions,
        bound,
        within_bound: hidden <= bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{circuit_to_dbm, CliffordCircuit, Gate};
    use crate::models::{
        dicke_state, graph_state, toric_code, Hypergraph, ModelBundle, OracleSource,
    };

    fn graph_bundle() -> ModelBundle {
        let hg = Hypergraph::new(4, vec![vec![0, 1], vec![1, 2], vec![2, 3]]).unwrap();
        graph_state(&hg).unwrap()
    }

    #[test]
    fn graph_bundle_passes_densely() {
        let report = check_bundle(&graph_bundle(), &VerifyOptions::default()).unwrap();
        assert!(report.pass, "{report:?}");
        assert_eq!(report.mode, VerifyMode::Dense);
        assert!(report.fidelity > 1.0 - 1e-12);
        assert!(report.max_aligned_amp_error < 1e-10);
        assert_eq!(report.hidden_count, 3);
    }

    #[test]
    fn corrupted_weight_is_detected() {
        let mut bundle = graph_bundle();
        bundle.rbm.hidden_units_mut()[1].weights[0].1 += C64::new(0.01, 0.0);
        let report = check_bundle(&bundle, &VerifyOptions::default()).unwrap();
        assert!(!report.pass);
        assert!(report.fidelity < 1.0 - 1e-6, "fidelity {}", report.fidelity);
    }

    #[test]
    fn toric_two_by_two_passes() {
        let bundle = toric_code(2, 2).unwrap();
        let report = check_bundle(&bundle, &VerifyOptions::default()).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn global_phase_on_the_oracle_changes_nothing() {
        struct Rotated {
            inner: Box<dyn OracleSource>,
            phase: C64,
        }
        impl OracleSource for Rotated {
            fn n(&self) -> usize {
                self.inner.n()
            }
            fn amplitude(&self, v: &BitString) -> crate::error::Result<C64> {
                Ok(self.phase * self.inner.amplitude(v)?)
            }
        }
        let plain = graph_bundle();
        let base = check_bundle(&plain, &VerifyOptions::default()).unwrap();
        let rotated = ModelBundle {
            name: plain.name.clone(),
            rbm: plain.rbm.clone(),
            oracle: Box::new(Rotated {
                inner: plain.oracle,
                phase: C64::from_polar(1.0, 1.234),
            }),
            meta: plain.meta.clone(),
        };
        let report = check_bundle(&rotated, &VerifyOptions::default()).unwrap();
        assert_eq!(report.pass, base.pass);
        assert!((report.fidelity - base.fidelity).abs() < 1e-12);
        assert!((report.max_aligned_amp_error - base.max_aligned_amp_error).abs() < 1e-9);
    }

    #[test]
    fn spot_mode_engages_beyond_the_cap() {
        let bundle = graph_bundle();
        let opts = VerifyOptions {
            dense_cap: 2,
            spot_samples: 300,
            ..VerifyOptions::default()
        };
        let report = check_bundle(&bundle, &opts).unwrap();
        assert_eq!(report.mode, VerifyMode::Spot);
        assert_eq!(report.samples, 302);
        assert!(report.pass, "{report:?}");

        // Same seed, same numbers.
        let again = check_bundle(&bundle, &opts).unwrap();
        assert_eq!(report.fidelity.to_bits(), again.fidelity.to_bits());
        assert_eq!(
            report.max_aligned_amp_error.to_bits(),
            again.max_aligned_amp_error.to_bits()
        );
    }

    #[test]
    fn spot_mode_catches_corruption_too() {
        let mut bundle = graph_bundle();
        bundle.rbm.hidden_units_mut()[0].weights[0].1 += C64::new(0.01, 0.0);
        let opts = VerifyOptions {
            dense_cap: 2,
            spot_samples: 500,
            ..VerifyOptions::default()
        };
        let report = check_bundle(&bundle, &opts).unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn zero_oracle_norm_is_an_error() {
        struct NullOracle {
            n: usize,
        }
        impl OracleSource for NullOracle {
            fn n(&self) -> usize {
                self.n
            }
            fn amplitude(&self, _v: &BitString) -> crate::error::Result<C64> {
                Ok(C64::new(0.0, 0.0))
            }
        }
        let plain = graph_bundle();
        let broken = ModelBundle {
            name: "null".into(),
            rbm: plain.rbm.clone(),
            oracle: Box::new(NullOracle { n: 4 }),
            meta: plain.meta.clone(),
        };
        assert!(matches!(
            check_bundle(&broken, &VerifyOptions::default()),
            Err(Error::ZeroNorm(_))
        ));
    }

    #[test]
    fn elimination_trace_reports_every_step() {
        let mut circuit = CliffordCircuit::new(3);
        circuit.push(Gate::H(0)).unwrap();
        circuit.push(Gate::Cz(0, 1)).unwrap();
        circuit.push(Gate::S(1)).unwrap();
        circuit.push(Gate::H(1)).unwrap();
        circuit.push(Gate::Cnot(1, 2)).unwrap();
        let dbm = circuit_to_dbm(&circuit).unwrap();
        let report = check_elimination_trace(&dbm).unwrap();
        assert!(report.pass);
        assert!(!report.steps.is_empty());
        assert!(report.steps.iter().all(|s| s.pass));
    }

    #[test]
    fn trace_check_rejects_oversized_networks() {
        let mut circuit = CliffordCircuit::new(7);
        for q in 0..7 {
            circuit.push(Gate::H(q)).unwrap();
        }
        let dbm = circuit_to_dbm(&circuit).unwrap();
        assert!(dbm.n_vars() > 12);
        assert!(check_elimination_trace(&dbm).is_err());
    }

    #[test]
    fn resource_report_counts_graph_edges_exactly() {
        let bundle = graph_bundle();
        let report = resource_report(&bundle);
        assert_eq!(report.hidden_count, 3);
        assert_eq!(report.n_interactions, 3);
        assert!(report.within_bound);
        let dicke = dicke_state(5, 2).unwrap();
        let report = resource_report(&dicke);
        assert!(report.within_bound);
        assert!(report.to_table().contains("yes"));
    }

    #[test]
    fn report_serializes_with_stable_keys() {
        let report = check_bundle(&graph_bundle(), &VerifyOptions::default()).unwrap();
        let json = report.to_json_string().unwrap();
        for key in [
            "\"model\"",
            "\"fidelity\"",
            "\"max_aligned_amp_error\"",
            "\"hidden_count\"",
            "\"bound\"",
            "\"pass\"",
        ] {
            assert!(json.contains(key), "missing {key} in {json}");
        }
        let table = report.to_table();
        assert!(table.contains("PASS"));
    }
}
