//! Analytic A-OTOC evaluators: the finite-L closed form in the channel
//! moments, its thermodynamic limit, the two worked noise families, and the
//! extensive-noise classification.
//!
//! The finite-L bracket is evaluated directly in f64; every power that
//! appears stays inside f64 range for L <= 64 and k <= L, which is the
//! supported domain.

use crate::channel::{ChannelMoments, QubitChannel};
use crate::error::{Error, Result};
use num_complex::Complex64;

const RESIDUE_TOL: f64 = 1e-10;
const CLAMP_TOL: f64 = 1e-9;

/// System size and noisy-site count for the encode-noise-decode circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CircuitParams {
    l: usize,
    k: usize,
}

impl CircuitParams {
    pub fn new(l: usize, k: usize) -> Result<Self> {
        if l < 2 || l % 2 != 0 {
            return Err(Error::InvalidParam(format!("L must be even and >= 2, got {l}")));
        }
        if l > 64 {
            return Err(Error::InvalidParam(format!("L must be <= 64, got {l}")));
        }
        if k < 1 || k > l {
            return Err(Error::InvalidParam(format!("k must satisfy 1 <= k <= L, got k={k}, L={l}")));
        }
        Ok(Self { l, k })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

/// A-OTOC value, clamped to [0, 1] only after checking the overshoot is
/// numerical noise (<= 1e-9); larger violations signal a transcription bug
/// and surface as errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AotocValue {
    g: f64,
}

impl AotocValue {
    pub fn new_checked(raw: f64) -> Result<Self> {
        if raw < -CLAMP_TOL || raw > 1.0 + CLAMP_TOL {
            return Err(Error::NumericalContract(format!(
                "A-OTOC value {raw} outside [0,1] beyond tolerance"
            )));
        }
        Ok(Self { g: raw.clamp(0.0, 1.0) })
    }

    pub fn value(&self) -> f64 {
        self.g
    }
}

fn p2(e: i64) -> f64 {
    (e as f64).exp2()
}

fn real_part_checked(z: Complex64, what: &str) -> Result<f64> {
    if z.im.abs() > RESIDUE_TOL {
        return Err(Error::NumericalContract(format!(
            "{what}: imaginary residue {:.3e} exceeds {RESIDUE_TOL:.0e}",
            z.im
        )));
    }
    Ok(z.re)
}

/// Haar-averaged bipartite A-OTOC at finite L, as a nine-term bracket in the
/// channel moments with a 1/poly(2^L) prefactor.
pub fn g_finite(m: &ChannelMoments, p: &CircuitParams) -> Result<AotocValue> {
    let l = p.l() as i64;
    let k = p.k() as i64;
    let ku = p.k() as u32;
    let y = p2(l);
    let pref = -p2(-4 * k) * (p2(-l) - p2(-2 * l))
        / ((y - 3.0) * (y - 2.0) * (y + 1.0) * (y + 2.0) * (y + 3.0));

    let t1 = real_part_checked(m.t1, "Tr X")?;
    let m4 = real_part_checked(m.m4, "Tr(Tr1 X Tr2 X)")?;
    let m6 = real_part_checked(m.m6, "Tr(S X^2)")?;
    let m7 = real_part_checked(m.m7, "Tr(X^2)")?;
    let re_m2k = m.m2.powu(ku).re;
    let re_m5k = m.m5.powu(ku).re;

    let b = (p2(6 * l) - p2(4 * l + 2)) * t1.powi(2 * k as i32)
        - 6.0 * p2(k) * (p2(4 * l) - p2(2 * l + 2)) * re_m2k
        - p2(2 * k + 1) * (p2(4 * l) - p2(2 * l + 2)) * t1.powi(k as i32)
        - p2(k + 1) * (p2(4 * l) + 3.0 * p2(2 * l + 1)) * m4.powi(k as i32)
        + 5.0 * p2(2 * k + 2) * p2(2 * l) * re_m5k
        - p2(3 * k + 1) * (p2(2 * l) + 6.0) * m6.powi(k as i32)
        + p2(2 * k) * (p2(4 * l) - p2(2 * l + 2)) * m7.powi(k as i32)
        - p2(2 * k) * (p2(6 * l) - 3.0 * p2(4 * l + 2) + 22.0 * p2(2 * l)) * m.m8.powi(k as i32)
        + p2(5 * k) * (p2(4 * l) - 3.0 * p2(2 * l + 2) + 12.0) * m.m9.powi(k as i32);

    AotocValue::new_checked(pref * b)
}

/// Thermodynamic limit: ||X/2||_2^{2k} - (Tr X / 4)^{2k}.
pub fn g_thermo(m: &ChannelMoments, k: usize) -> Result<AotocValue> {
    if k < 1 {
        return Err(Error::InvalidParam("k must be >= 1".into()));
    }
    let t1 = real_part_checked(m.t1, "Tr X")?;
    AotocValue::new_checked((m.m8 / 4.0).powi(k as i32) - (t1 / 4.0).powi(2 * k as i32))
}

/// Unitary (Bloch rotation) noise: 1 - cos^{4k}(theta).
pub fn g_unitary_example(theta: f64, k: usize) -> Result<AotocValue> {
    if k < 1 {
        return Err(Error::InvalidParam("k must be >= 1".into()));
    }
    AotocValue::new_checked(1.0 - theta.cos().powi(4 * k as i32))
}

/// Depolarizing noise: (1 - 3p/2 + 3p^2/4)^k - (1 - 3p/4)^{2k}.
pub fn g_depol_example(p: f64, k: usize) -> Result<AotocValue> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParam(format!("p must be in [0,1], got {p}")));
    }
    if k < 1 {
        return Err(Error::InvalidParam("k must be >= 1".into()));
    }
    AotocValue::new_checked(
        (1.0 - 1.5 * p + 0.75 * p * p).powi(k as i32) - (1.0 - 0.75 * p).powi(2 * k as i32),
    )
}

/// Behavior of the A-OTOC under extensively scaling noise (k proportional
/// to L, L -> infinity).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtensiveLimit {
    /// Non-identity unitary noise: the A-OTOC saturates its maximum of 1.
    MaximalScrambling,
    /// Non-unitary noise: decoherence wins and the A-OTOC vanishes.
    VanishingAotoc,
    /// Identity channel: the circuit is the identity, nothing scrambles.
    NoEffect,
}

pub fn classify_extensive_limit(ch: &QubitChannel) -> ExtensiveLimit {
    if ch.is_identity() {
        ExtensiveLimit::NoEffect
    } else if ch.is_unitary_conjugation() {
        ExtensiveLimit::MaximalScrambling
    } else {
        ExtensiveLimit::VanishingAotoc
    }
}

/// Interior maximizer of the depolarizing curve p -> g_depol_example(p, k),
/// if one exists: dense grid scan (step 1e-4) refined by golden section to
/// |p - p*| <= 1e-8. Monotone cases (k = 1, 2) return None.
pub fn depol_peak(k: usize) -> Option<f64> {
    if k < 1 {
        return None;
    }
    let g = |p: f64| (1.0 - 1.5 * p + 0.75 * p * p).powi(k as i32) - (1.0 - 0.75 * p).powi(2 * k as i32);
    let n = 10_000usize;
    let mut best_i = 0usize;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=n {
        let v = g(i as f64 / n as f64);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    if best_i == 0 || best_i == n {
        return None;
    }
    let mut a = (best_i - 1) as f64 / n as f64;
    let mut b = (best_i + 1) as f64 / n as f64;
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - gr * (b - a);
    let mut d = a + gr * (b - a);
    while b - a > 1e-10 {
        if g(c) > g(d) {
            b = d;
            d = c;
            c = b - gr * (b - a);
        } else {
            a = c;
            c = d;
            d = a + gr * (b - a);
        }
    }
    Some(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{channel_moments, make_depolarizing, make_rotation, QubitChannel};
    use crate::testutil::random_mixed_unitary_channel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn finite_identity_channel_vanishes() {
        let m = channel_moments(&QubitChannel::identity());
        for (l, k) in [(2, 1), (4, 2), (8, 3), (16, 1), (64, 5)] {
            let g = g_finite(&m, &CircuitParams::new(l, k).unwrap()).unwrap();
            assert!(g.value().abs() < 1e-12, "L={l} k={k}: {}", g.value());
        }
    }

    #[test]
    fn finite_pinned_values() {
        // frozen from the exact Weingarten engine; see weingarten tests for
        // the independent cross-check
        let rot = make_rotation([0.0, 0.0, 1.0], FRAC_PI_2).unwrap();
        let g = g_finite(&channel_moments(&rot), &CircuitParams::new(8, 1).unwrap()).unwrap();
        assert!((g.value() - 0.9922027567096083).abs() < 1e-12);

        let dep = make_depolarizing(0.3).unwrap();
        let g = g_finite(&channel_moments(&dep), &CircuitParams::new(4, 1).unwrap()).unwrap();
        assert!((g.value() - 0.014711684980798868).abs() < 1e-12);

        let rot1 = make_rotation([0.0, 0.0, 1.0], 1.0).unwrap();
        let g = g_finite(&channel_moments(&rot1), &CircuitParams::new(6, 2).unwrap()).unwrap();
        assert!((g.value() - 0.9622708213901505).abs() < 1e-12);
    }

    #[test]
    fn thermo_equals_worked_examples_on_grids() {
        for i in 0..100 {
            let theta = i as f64 * FRAC_PI_2 / 99.0;
            for k in [1usize, 2, 5] {
                let ch = make_rotation([0.0, 0.0, 1.0], theta).unwrap();
                let a = g_thermo(&channel_moments(&ch), k).unwrap().value();
                let b = g_unitary_example(theta, k).unwrap().value();
                assert!((a - b).abs() < 1e-12, "theta={theta} k={k}");
            }
            let p = i as f64 / 99.0;
            for k in [1usize, 3, 8] {
                let ch = make_depolarizing(p).unwrap();
                let a = g_thermo(&channel_moments(&ch), k).unwrap().value();
                let b = g_depol_example(p, k).unwrap().value();
                assert!((a - b).abs() < 1e-12, "p={p} k={k}");
            }
        }
    }

    #[test]
    fn worked_example_values() {
        assert!(g_unitary_example(0.0, 3).unwrap().value().abs() < 1e-15);
        assert!((g_unitary_example(FRAC_PI_2, 1).unwrap().value() - 1.0).abs() < 1e-15);
        assert!((g_unitary_example(FRAC_PI_4, 2).unwrap().value() - 0.9375).abs() < 1e-15);
        assert!(g_depol_example(0.0, 4).unwrap().value().abs() < 1e-15);
        assert!((g_depol_example(1.0, 1).unwrap().value() - 0.1875).abs() < 1e-15);
        assert!(g_depol_example(1.0, 200).unwrap().value() < 1e-12);
        assert!(g_depol_example(1.2, 1).is_err());
    }

    #[test]
    fn thermo_identity_zero() {
        let m = channel_moments(&QubitChannel::identity());
        for k in 1..6 {
            assert!(g_thermo(&m, k).unwrap().value().abs() < 1e-12);
        }
    }

    #[test]
    fn finite_converges_to_thermo() {
        for (ch, label) in [
            (make_depolarizing(0.3).unwrap(), "depol"),
            (make_rotation([0.0, 0.0, 1.0], 0.7).unwrap(), "rot"),
        ] {
            let m = channel_moments(&ch);
            let gt = g_thermo(&m, 1).unwrap().value();
            let mut prev = f64::INFINITY;
            let mut gaps = Vec::new();
            for l in (4..=16).step_by(2) {
                let gf = g_finite(&m, &CircuitParams::new(l, 1).unwrap()).unwrap().value();
                let gap = (gf - gt).abs();
                assert!(gap < prev, "{label}: gap not decreasing at L={l}");
                gaps.push(gap);
                prev = gap;
            }
            // leading finite-size correction is ~ 2 G 2^{-L}: each L += 2
            // shrinks the gap by ~4x
            for w in gaps.windows(2) {
                let ratio = w[0] / w[1];
                assert!((3.0..5.0).contains(&ratio), "{label}: decay ratio {ratio}");
            }
            // the depolarizing gap is below 1e-6 by L=16 (its G is small)
            if label == "depol" {
                assert!(gaps.last().unwrap() < &1e-6);
            }
        }
    }

    #[test]
    fn bounded_on_random_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        for trial in 0..40 {
            let ch = random_mixed_unitary_channel(&mut rng);
            let m = channel_moments(&ch);
            let l = 2 * (1 + (trial % 6));
            let k = 1 + (trial % l.min(4));
            let g = g_finite(&m, &CircuitParams::new(l, k).unwrap()).unwrap().value();
            assert!((0.0..=1.0).contains(&g));
            let gt = g_thermo(&m, k).unwrap().value();
            assert!((0.0..=1.0).contains(&gt));
        }
    }

    #[test]
    fn classify_limits() {
        assert_eq!(
            classify_extensive_limit(&make_rotation([0.0, 0.0, 1.0], 0.3).unwrap()),
            ExtensiveLimit::MaximalScrambling
        );
        assert_eq!(
            classify_extensive_limit(&make_depolarizing(0.2).unwrap()),
            ExtensiveLimit::VanishingAotoc
        );
        assert_eq!(classify_extensive_limit(&QubitChannel::identity()), ExtensiveLimit::NoEffect);
        // extensive-noise values behind the classification, at k = L/2 = 15
        let rot = make_rotation([0.0, 0.0, 1.0], FRAC_PI_4).unwrap();
        assert!(g_thermo(&channel_moments(&rot), 15).unwrap().value() >= 0.999);
        let dep = make_depolarizing(0.5).unwrap();
        assert!(g_thermo(&channel_moments(&dep), 15).unwrap().value() <= 1e-3);
    }

    #[test]
    fn depol_peak_monotone_then_interior() {
        assert_eq!(depol_peak(1), None);
        assert_eq!(depol_peak(2), None);
        // grid-scan oracle pin for k = 3
        let p3 = depol_peak(3).unwrap();
        assert!((p3 - 0.49370717771).abs() < 1e-8, "p*(3) = {p3}");
        let mut prev = 1.0;
        for k in 3..=12 {
            let p = depol_peak(k).unwrap();
            assert!(p > 0.0 && p < 1.0);
            assert!(p < prev, "p*({k}) = {p} not below p*({}) = {prev}", k - 1);
            prev = p;
        }
    }

    #[test]
    fn depol_peak_is_a_maximum() {
        for k in [3usize, 5, 10] {
            let p = depol_peak(k).unwrap();
            let g = |p: f64| g_depol_example(p, k).unwrap().value();
            assert!(g(p) >= g(p - 1e-4));
            assert!(g(p) >= g(p + 1e-4));
        }
    }
}
