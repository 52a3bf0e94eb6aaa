//! Closed-form gadgets: small blocks of hidden units whose product of
//! factors realizes an exact function of a few visible bits.
//!
//! Every gadget here is normalized so that, including its log-scale
//! contribution, the realized factor equals the target function exactly on
//! every configuration of its support. Zeros of a target are produced by a
//! hidden factor `1 + exp(theta)` vanishing identically, which evaluation
//! snaps to the exact-zero marker.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::rbm::{HiddenUnit, RbmNetwork};

#[derive(Clone, Debug, PartialEq)]
pub enum GadgetKind {
    /// Kronecker delta on the parity of the support.
    Parity { target: u8 },
    /// exp(i phi v_i v_j) on two visibles.
    PairPhase { phi: f64 },
    /// 2A cos(omega * s + phi0) + B as a function of the support sum s.
    CosPair { a: C64, b: C64, omega: f64, phi0: f64 },
    /// exp(i phi v_1 ... v_k) on k visibles.
    HyperedgePhase { phi: f64 },
    /// Kronecker delta [sum of support == m].
    Indicator { m: usize },
}

/// A gadget: sparse visible-bias shifts, hidden units, and a scale, all
/// addressed in the coordinates of the network it will be applied to.
#[derive(Clone, Debug)]
pub struct Gadget {
    pub kind: GadgetKind,
    pub support: Vec<usize>,
    pub visible_bias: Vec<(usize, C64)>,
    pub hidden: Vec<HiddenUnit>,
    pub log_scale: C64,
}

impl Gadget {
    pub fn n_hidden(&self) -> usize {
        self.hidden.len()
    }

    pub fn apply_to(&self, net: &mut RbmNetwork) -> Result<()> {
        for &(i, b) in &self.visible_bias {
            net.add_visible_bias(i, b)?;
        }
        for h in &self.hidden {
            net.add_hidden(h.clone())?;
        }
        net.add_log_scale(self.log_scale);
        Ok(())
    }

    /// Convenience: a fresh network on `n` visibles containing only this gadget.
    pub fn into_network(self, n: usize) -> Result<RbmNetwork> {
        let mut net = RbmNetwork::new(n);
        self.apply_to(&mut net)?;
        Ok(net)
    }
}

fn check_support(support: &[usize]) -> Result<()> {
    if support.is_empty() {
        return Err(Error::InvalidInput("gadget support must be non-empty".into()));
    }
    let mut seen = support.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != support.len() {
        return Err(Error::InvalidInput("gadget support has repeated indices".into()));
    }
    Ok(())
}

fn i_pi() -> C64 {
    C64::new(0.0, PI)
}

/// Delta on `(sum of support + target) mod 2 == 0`: one hidden unit with
/// weights i*pi, bias i*pi*target, scale -ln 2. The factor is 1 on matching
/// parities and exactly 0 otherwise.
pub fn parity_gadget(support: &[usize], target_parity: u8) -> Result<Gadget> {
    check_support(support)?;
    if target_parity > 1 {
        return Err(Error::InvalidInput("parity must be 0 or 1".into()));
    }
    let unit = HiddenUnit::new(
        i_pi() * target_parity as f64,
        support.iter().map(|&k| (k, i_pi())).collect(),
    );
    Ok(Gadget {
        kind: GadgetKind::Parity { target: target_parity },
        support: support.to_vec(),
        visible_bias: Vec::new(),
        hidden: vec![unit],
        log_scale: C64::new(-(2.0f64.ln()), 0.0),
    })
}

fn reduce_phase(phi: f64) -> f64 {
    let p = phi.rem_euclid(2.0 * PI);
    if p < 1e-14 || (2.0 * PI - p) < 1e-14 {
        0.0
    } else {
        p
    }
}

/// exp(i phi v_i v_j): one hidden unit plus visible biases and scale.
///
/// For generic phi the factor `e^{a(v_i+v_j)+c} (1 + e^{i pi (v_i+v_j) + b})`
/// equals (1, 1, e^{i phi}) on support sums (0, 1, 2) with
/// a = i phi/2, b = ln(i tan(phi/4)), c = -ln(1 + e^b). At phi = pi the
/// published Hadamard-block constants are used instead (weight i*pi, visible
/// bias -i*pi/2, hidden bias -i*pi/2), normalized into an exact (1,1,1,-1)
/// table by a +ln sqrt(2) scale shift.
pub fn two_body_phase(i: usize, j: usize, phi: f64) -> Result<Gadget> {
    check_support(&[i, j])?;
    let phi_r = reduce_phase(phi);
    let kind = GadgetKind::PairPhase { phi: phi_r };
    if phi_r == 0.0 {
        return Ok(Gadget {
            kind,
            support: vec![i, j],
            visible_bias: Vec::new(),
            hidden: Vec::new(),
            log_scale: C64::new(0.0, 0.0),
        });
    }
    if (phi_r - PI).abs() < 1e-12 {
        let half_ln2 = 0.5 * 2.0f64.ln();
        let unit = HiddenUnit::new(
            C64::new(0.0, -PI / 2.0),
            vec![(i, i_pi()), (j, i_pi())],
        );
        return Ok(Gadget {
            kind,
            support: vec![i, j],
            visible_bias: vec![
                (i, C64::new(0.0, -PI / 2.0)),
                (j, C64::new(0.0, -PI / 2.0)),
            ],
            hidden: vec![unit],
            log_scale: C64::new(-half_ln2, PI / 4.0),
        });
    }
    let a = C64::new(0.0, phi_r / 2.0);
    let x = C64::new(0.0, (phi_r / 4.0).tan());
    let b = x.ln();
    let c = -(C64::new(1.0, 0.0) + x).ln();
    if !b.re.is_finite() || !c.re.is_finite() {
        return Err(Error::Synthesis(format!("two-body phase degenerate at phi={phi_r}")));
    }
    let unit = HiddenUnit::new(b, vec![(i, i_pi()), (j, i_pi())]);
    Ok(Gadget {
        kind,
        support: vec![i, j],
        visible_bias: vec![(i, a), (j, a)],
        hidden: vec![unit],
        log_scale: c,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

/// Two hidden units realizing `2A cos(omega*s + phi0) + B` as a function of
/// the support sum `s`, exactly:
///
/// ```text
/// e^c (1 + e^{i omega s + b + i phi0})(1 + e^{-i omega s + b - i phi0})
///   = e^c (1 + e^{2b} + 2 e^b cos(omega s + phi0))
/// ```
///
/// with `e^b + e^{-b} = B/A` and `c = ln A - b`. Both quadratic branches
/// `e^b = (B ± sqrt(B^2-4A^2)) / 2A` produce the same factor.
pub fn cos_pair(
    support: &[usize],
    a: C64,
    b_shift: C64,
    omega: f64,
    phi0: f64,
    branch: Branch,
) -> Result<Gadget> {
    check_support(support)?;
    if a.norm() == 0.0 {
        return Err(Error::Synthesis("cos_pair requires A != 0".into()));
    }
    let disc = (b_shift * b_shift - 4.0 * a * a).sqrt();
    let y = match branch {
        Branch::Plus => (b_shift + disc) / (2.0 * a),
        Branch::Minus => (b_shift - disc) / (2.0 * a),
    };
    if y.norm() == 0.0 {
        return Err(Error::Synthesis("cos_pair bias branch degenerated to zero".into()));
    }
    let b = y.ln();
    let c = a.ln() - b;
    let w_plus = C64::new(0.0, omega);
    let unit1 = HiddenUnit::new(
        b + C64::new(0.0, phi0),
        support.iter().map(|&k| (k, w_plus)).collect(),
    );
    let unit2 = HiddenUnit::new(
        b - C64::new(0.0, phi0),
        support.iter().map(|&k| (k, -w_plus)).collect(),
    );
    Ok(Gadget {
        kind: GadgetKind::CosPair { a, b: b_shift, omega, phi0 },
        support: support.to_vec(),
        visible_bias: Vec::new(),
        hidden: vec![unit1, unit2],
        log_scale: c,
    })
}

/// The distinct values of cos(2*pi*u/(k+1)) for u = 1..k. These are the
/// points where a size-k indicator in the variable t = cos(...) must vanish;
/// the cosine pairs u and k+1-u, so only ceil(k/2) values are distinct.
fn distinct_cos_roots(k: usize) -> Vec<f64> {
    (1..=k.div_ceil(2))
        .map(|a| (2.0 * PI * a as f64 / (k as f64 + 1.0)).cos())
        .collect()
}

/// exp(i phi v_1 .. v_k) on a k-site support.
///
/// k = 1 is a visible bias, k = 2 delegates to [`two_body_phase`]. For
/// k = 3, phi = pi the explicit constants b = ln((1 + i sqrt 15)/4),
/// c = ln(2/3) - b are used behind a linear e^{i pi s} prefactor. The
/// general case builds the target g(t) = 1 + (e^{i phi} - 1) * f(t) in the
/// variable t = cos(2 pi (s-k)/(k+1)), where f is the Lagrange-style
/// indicator of s = k (deduplicated roots, normalized by t(k) - t(i)),
/// factors g over the complex numbers, and emits one cosine pair per linear
/// factor. Hidden cost: 2*ceil(k/2) <= 2k + 4.
pub fn hyperedge_phase(support: &[usize], phi: f64) -> Result<Gadget> {
    check_support(support)?;
    let k = support.len();
    let phi_r = reduce_phase(phi);
    let kind = GadgetKind::HyperedgePhase { phi: phi_r };
    if phi_r == 0.0 {
        return Ok(Gadget {
            kind,
            support: support.to_vec(),
            visible_bias: Vec::new(),
            hidden: Vec::new(),
            log_scale: C64::new(0.0, 0.0),
        });
    }
    if k == 1 {
        return Ok(Gadget {
            kind,
            support: support.to_vec(),
            visible_bias: vec![(support[0], C64::new(0.0, phi_r))],
            hidden: Vec::new(),
            log_scale: C64::new(0.0, 0.0),
        });
    }
    if k == 2 {
        let mut g = two_body_phase(support[0], support[1], phi_r)?;
        g.kind = kind;
        return Ok(g);
    }
    if k == 3 && (phi_r - PI).abs() < 1e-12 {
        return eq_two_gadget(support, Branch::Plus);
    }

    // general path: factor the indicator-lifted phase polynomial in t
    let rho = distinct_cos_roots(k);
    let omega = 2.0 * PI / (k as f64 + 1.0);
    let phi0 = -2.0 * PI * k as f64 / (k as f64 + 1.0);
    // denominator prod (t(k) - rho) with t(k) = 1
    let denom: f64 = rho.iter().map(|r| 1.0 - r).product();
    let lead = (C64::new(0.0, phi_r).exp() - 1.0) / denom;
    // expand lead * prod (t - rho_a), then add 1 to the constant term
    let mut coeffs = vec![C64::new(0.0, 0.0); rho.len() + 1];
    coeffs[0] = C64::new(1.0, 0.0);
    let mut deg = 0;
    for &r in &rho {
        // multiply by (t - r)
        for d in (0..=deg).rev() {
            let c = coeffs[d];
            coeffs[d + 1] += c;
            coeffs[d] = -C64::new(r, 0.0) * c;
        }
        deg += 1;
    }
    for c in coeffs.iter_mut() {
        *c *= lead;
    }
    coeffs[0] += 1.0;
    let roots = poly_roots(&coeffs)?;

    let mut gadget = Gadget {
        kind,
        support: support.to_vec(),
        visible_bias: Vec::new(),
        hidden: Vec::new(),
        log_scale: lead.ln(),
    };
    for r in roots {
        let cp = cos_pair(support, C64::new(0.5, 0.0), -r, omega, phi0, Branch::Plus)?;
        gadget.hidden.extend(cp.hidden);
        gadget.log_scale += cp.log_scale;
    }
    Ok(gadget)
}

/// The exact three-site sign gadget behind `hyperedge_phase(.., pi)`:
/// a linear e^{i pi s} prefactor times the cosine-pair factor
/// 1/3 + (4/3) cos(4 pi s/3 - pi/3), whose bias solves
/// e^b = (1 ± i sqrt 15)/4 and scale is ln(2/3) - b. Exposed with a branch
/// choice so both quadratic roots can be exercised.
pub fn eq_two_gadget(support: &[usize], branch: Branch) -> Result<Gadget> {
    check_support(support)?;
    if support.len() != 3 {
        return Err(Error::InvalidInput("three-site gadget needs a 3-site support".into()));
    }
    let cp = cos_pair(
        support,
        C64::new(2.0 / 3.0, 0.0),
        C64::new(1.0 / 3.0, 0.0),
        4.0 * PI / 3.0,
        -PI / 3.0,
        branch,
    )?;
    Ok(Gadget {
        kind: GadgetKind::HyperedgePhase { phi: PI },
        support: support.to_vec(),
        visible_bias: support.iter().map(|&k| (k, i_pi())).collect(),
        hidden: cp.hidden,
        log_scale: cp.log_scale,
    })
}

/// Delta on [sum of support == m], 0 <= m <= k.
///
/// Built as a product of cosine pairs vanishing at every achievable
/// t_m(s) = cos(2 pi (s-m)/(k+1)) except s = m, normalized to 1 there.
/// The (k, m) = (3, 1) case uses the explicit single-pair constants
/// (-1)^s * (-1/3 + (2/3) cos(4 pi s/3 - pi/3)).
pub fn indicator_weight(support: &[usize], m: usize) -> Result<Gadget> {
    check_support(support)?;
    let k = support.len();
    if m > k {
        return Err(Error::InvalidInput(format!(
            "indicator target {m} exceeds support size {k}"
        )));
    }
    let kind = GadgetKind::Indicator { m };
    if k == 3 && m == 1 {
        let cp = cos_pair(
            support,
            C64::new(1.0 / 3.0, 0.0),
            C64::new(-1.0 / 3.0, 0.0),
            4.0 * PI / 3.0,
            -PI / 3.0,
            Branch::Plus,
        )?;
        return Ok(Gadget {
            kind,
            support: support.to_vec(),
            visible_bias: support.iter().map(|&k| (k, i_pi())).collect(),
            hidden: cp.hidden,
            log_scale: cp.log_scale,
        });
    }
    let rho = distinct_cos_roots(k);
    let omega = 2.0 * PI / (k as f64 + 1.0);
    let phi0 = -2.0 * PI * m as f64 / (k as f64 + 1.0);
    let mut gadget = Gadget {
        kind,
        support: support.to_vec(),
        visible_bias: Vec::new(),
        hidden: Vec::new(),
        log_scale: C64::new(0.0, 0.0),
    };
    for &r in &rho {
        let cp = cos_pair(
            support,
            C64::new(0.5, 0.0),
            C64::new(-r, 0.0),
            omega,
            phi0,
            Branch::Plus,
        )?;
        gadget.hidden.extend(cp.hidden);
        // normalize each factor by its value 1 - rho at s = m
        gadget.log_scale += cp.log_scale - C64::new(1.0 - r, 0.0).ln();
    }
    Ok(gadget)
}

/// All roots of a complex polynomial (coefficients low to high degree),
/// via deterministic Durand-Kerner iteration with a Newton polish. The
/// residual of every root must reach 1e-12 relative to the coefficient
/// scale.
pub fn poly_roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let mut cs = coeffs.to_vec();
    while let Some(last) = cs.last() {
        if last.norm() == 0.0 && cs.len() > 1 {
            cs.pop();
        } else {
            break;
        }
    }
    let deg = cs.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = cs[deg];
    if lead.norm() == 0.0 {
        return Err(Error::Synthesis("zero polynomial has no roots".into()));
    }
    let monic: Vec<C64> = cs.iter().map(|c| c / lead).collect();
    let eval = |p: &[C64], z: C64| -> C64 {
        let mut v = C64::new(0.0, 0.0);
        for c in p.iter().rev() {
            v = v * z + c;
        }
        v
    };
    let dcoeffs: Vec<C64> = monic
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * i as f64)
        .collect();

    let seed = C64::new(0.4, 0.9);
    let mut z: Vec<C64> = (0..deg).map(|j| seed.powu(j as u32 + 1)).collect();
    for _ in 0..500 {
        let mut delta_max = 0.0f64;
        for j in 0..deg {
            let mut d = C64::new(1.0, 0.0);
            for l in 0..deg {
                if l != j {
                    d *= z[j] - z[l];
                }
            }
            if d.norm() == 0.0 {
                // perturb coincident iterates deterministically
                z[j] += C64::new(1e-8, 1e-8);
                continue;
            }
            let step = eval(&monic, z[j]) / d;
            z[j] -= step;
            delta_max = delta_max.max(step.norm() / (1.0 + z[j].norm()));
        }
        if delta_max < 1e-15 {
            break;
        }
    }
    // Newton polish
    for zj in z.iter_mut() {
        for _ in 0..8 {
            let d = eval(&dcoeffs, *zj);
            if d.norm() == 0.0 {
                break;
            }
            *zj -= eval(&monic, *zj) / d;
        }
    }
    let scale = monic.iter().map(|c| c.norm()).fold(0.0, f64::max);
    for &zj in &z {
        let res = eval(&monic, zj).norm();
        if !(res <= 1e-12 * scale * (1.0 + zj.norm()).powi(deg as i32)) {
            return Err(Error::Synthesis(format!(
                "root residual {res:.3e} did not polish below tolerance"
            )));
        }
    }
    // deterministic output order
    z.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rbm::{BitString, LogAmplitude};

    fn approx(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    /// Evaluate a gadget's factor on a configuration of `n` visibles.
    fn factor(g: &Gadget, n: usize, v: &BitString) -> C64 {
        g.clone().into_network(n).unwrap().amplitude(v).unwrap()
    }

    #[test]
    fn parity_gadget_is_exact_delta() {
        for k in 1..=4usize {
            for target in 0..2u8 {
                let support: Vec<usize> = (0..k).collect();
                let g = parity_gadget(&support, target).unwrap();
                let net = g.into_network(k).unwrap();
                for idx in 0..(1 << k) {
                    let v = BitString::from_index(idx, k);
                    let ok = (v.weight() as u8 + target) % 2 == 0;
                    if ok {
                        assert!(approx(net.amplitude(&v).unwrap(), C64::new(1.0, 0.0), 1e-14));
                    } else {
                        assert_eq!(net.log_amplitude(&v).unwrap(), LogAmplitude::Zero);
                    }
                }
            }
        }
    }

    #[test]
    fn two_body_truth_tables() {
        // (1,1,1,i), (1,1,1,-1), and a generic angle
        for phi in [PI / 2.0, PI, 0.3, 3.0 * PI / 2.0] {
            let g = two_body_phase(0, 1, phi).unwrap();
            assert!(g.n_hidden() <= 1);
            for idx in 0..4usize {
                let v = BitString::from_index(idx, 2);
                let want = if v.get(0) == 1 && v.get(1) == 1 {
                    C64::new(0.0, phi).exp()
                } else {
                    C64::new(1.0, 0.0)
                };
                assert!(
                    approx(factor(&g, 2, &v), want, 1e-13),
                    "phi={phi} idx={idx}"
                );
            }
        }
    }

    #[test]
    fn cos_pair_matches_closed_form_on_both_branches() {
        let a = C64::new(0.35, -0.2);
        let b = C64::new(-0.6, 0.45);
        let (omega, phi0) = (1.1, -0.4);
        let support = [0usize, 1, 2];
        let gp = cos_pair(&support, a, b, omega, phi0, Branch::Plus).unwrap();
        let gm = cos_pair(&support, a, b, omega, phi0, Branch::Minus).unwrap();
        for idx in 0..8usize {
            let v = BitString::from_index(idx, 3);
            let s = v.weight() as f64;
            let want = 2.0 * a * C64::new(omega * s + phi0, 0.0).cos() + b;
            let fp = factor(&gp, 3, &v);
            let fm = factor(&gm, 3, &v);
            assert!(approx(fp, want, 1e-13), "plus branch s={s}");
            assert!(approx(fm, want, 1e-13), "minus branch s={s}");
        }
    }

    #[test]
    fn three_site_sign_gadget_truth_table_both_branches() {
        for branch in [Branch::Plus, Branch::Minus] {
            let g = eq_two_gadget(&[0, 1, 2], branch).unwrap();
            // bias must be ln((1 ± i sqrt 15)/4) up to unit ordering
            for idx in 0..8usize {
                let v = BitString::from_index(idx, 3);
                let want = if v.weight() == 3 { -1.0 } else { 1.0 };
                assert!(
                    approx(factor(&g, 3, &v), C64::new(want, 0.0), 1e-10),
                    "branch {branch:?} idx {idx}"
                );
            }
        }
    }

    #[test]
    fn hyperedge_phase_truth_tables() {
        for k in 1..=6usize {
            for phi in [PI, 0.7] {
                let support: Vec<usize> = (0..k).collect();
                let g = hyperedge_phase(&support, phi).unwrap();
                assert!(g.n_hidden() <= 2 * k + 4, "k={k} hidden={}", g.n_hidden());
                for idx in 0..(1 << k) {
                    let v = BitString::from_index(idx, k);
                    let want = if v.weight() == k {
                        C64::new(0.0, phi).exp()
                    } else {
                        C64::new(1.0, 0.0)
                    };
                    assert!(
                        approx(factor(&g, k, &v), want, 1e-11),
                        "k={k} phi={phi} idx={idx}"
                    );
                }
            }
        }
    }

    #[test]
    fn hyperedge_phase_zero_angle_is_identity() {
        let g = hyperedge_phase(&[0, 1, 2, 3], 0.0).unwrap();
        assert_eq!(g.n_hidden(), 0);
        assert!(g.visible_bias.is_empty());
    }

    #[test]
    fn indicator_tables_with_exact_zeros() {
        for k in 1..=5usize {
            for m in 0..=k {
                let support: Vec<usize> = (0..k).collect();
                let g = indicator_weight(&support, m).unwrap();
                let net = g.into_network(k).unwrap();
                for idx in 0..(1 << k) {
                    let v = BitString::from_index(idx, k);
                    if v.weight() == m {
                        assert!(
                            approx(net.amplitude(&v).unwrap(), C64::new(1.0, 0.0), 1e-10),
                            "k={k} m={m} idx={idx}"
                        );
                    } else {
                        assert_eq!(
                            net.log_amplitude(&v).unwrap(),
                            LogAmplitude::Zero,
                            "k={k} m={m} idx={idx}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn poly_roots_known_factorization() {
        // (t - 1)(t - 2)(t + i) = t^3 + (i - 3) t^2 + (2 - 3i) t + 2i
        let coeffs = [
            C64::new(0.0, 2.0),
            C64::new(2.0, -3.0),
            C64::new(-3.0, 1.0),
            C64::new(1.0, 0.0),
        ];
        let roots = poly_roots(&coeffs).unwrap();
        let mut want = vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(0.0, -1.0)];
        want.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        for (r, w) in roots.iter().zip(&want) {
            assert!(approx(*r, *w, 1e-12));
        }
    }

    #[test]
    fn gadget_support_validation() {
        assert!(parity_gadget(&[], 0).is_err());
        assert!(parity_gadget(&[1, 1], 0).is_err());
        assert!(two_body_phase(2, 2, PI).is_err());
        assert!(indicator_weight(&[0, 1], 3).is_err());
    }
}
