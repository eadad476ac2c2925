//! Single-qubit channels, their natural representation, and the scalar
//! moments the closed forms depend on.
//!
//! Channels are held in the Heisenberg picture as a Kraus list {K_i},
//! E(Q) = sum_i K_i Q K_i^dag. Admissible channels must be unital
//! (sum K_i K_i^dag = I, i.e. the Schrodinger-picture adjoint is trace
//! preserving) and trace preserving (sum K_i^dag K_i = I); both residuals
//! are checked to 1e-10 on construction.

use crate::error::{Error, Result};
use crate::tensor::{kron, swap_operator, CMatrix, C_ONE, C_ZERO};
use num_complex::Complex64;
use std::path::Path;

const CHANNEL_TOL: f64 = 1e-10;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::two_by_two(C_ZERO, C_ONE, C_ONE, C_ZERO)
}

pub fn pauli_y() -> CMatrix {
    CMatrix::two_by_two(C_ZERO, c(0.0, -1.0), c(0.0, 1.0), C_ZERO)
}

pub fn pauli_z() -> CMatrix {
    CMatrix::two_by_two(C_ONE, C_ZERO, C_ZERO, c(-1.0, 0.0))
}

/// A single-qubit CP map as a finite list of 2x2 Kraus matrices.
#[derive(Debug, Clone)]
pub struct QubitChannel {
    kraus: Vec<CMatrix>,
}

impl QubitChannel {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::BadChannel("empty Kraus list".into()));
        }
        for k in &kraus {
            if k.rows() != 2 || k.cols() != 2 {
                return Err(Error::BadChannel("Kraus matrices must be 2x2".into()));
            }
        }
        let mut tp = CMatrix::zeros(2, 2);
        let mut unital = CMatrix::zeros(2, 2);
        for k in &kraus {
            tp.add_assign_scaled(&k.dagger().matmul(k), C_ONE);
            unital.add_assign_scaled(&k.matmul(&k.dagger()), C_ONE);
        }
        let i2 = CMatrix::identity(2);
        let r_tp = tp.max_abs_diff(&i2);
        let r_un = unital.max_abs_diff(&i2);
        if r_tp > CHANNEL_TOL {
            return Err(Error::BadChannel(format!(
                "sum K^dag K != I (residual {r_tp:.3e}); channel must be trace preserving"
            )));
        }
        if r_un > CHANNEL_TOL {
            return Err(Error::BadChannel(format!(
                "sum K K^dag != I (residual {r_un:.3e}); channel must be unital"
            )));
        }
        Ok(Self { kraus })
    }

    pub fn identity() -> Self {
        Self { kraus: vec![CMatrix::identity(2)] }
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// True iff the natural representation equals the identity to 1e-10.
    pub fn is_identity(&self) -> bool {
        natural_rep(self).x.max_abs_diff(&CMatrix::identity(4)) <= CHANNEL_TOL
    }

    /// True iff the channel is conjugation by a single unitary. Equivalent to
    /// ||X||_2^2 = 4 (the triangle inequality on ||X/2|| saturates only for a
    /// one-element Kraus set up to gauge).
    pub fn is_unitary_conjugation(&self) -> bool {
        (channel_moments(self).m8 - 4.0).abs() <= CHANNEL_TOL
    }
}

/// Natural representation X = sum_i K_i (x) K_i^dag of a channel; a 4x4
/// matrix, independent of the Kraus gauge.
#[derive(Debug, Clone)]
pub struct NaturalRep {
    pub x: CMatrix,
}

pub fn natural_rep(ch: &QubitChannel) -> NaturalRep {
    let mut x = CMatrix::zeros(4, 4);
    for k in ch.kraus() {
        x.add_assign_scaled(&kron(k, &k.dagger()), C_ONE);
    }
    NaturalRep { x }
}

/// Kraus adjoint {K_i^dag}: the Schrodinger-picture counterpart of the
/// channel (and vice versa).
pub fn adjoint_channel(ch: &QubitChannel) -> QubitChannel {
    // adjoint of an admissible channel is admissible; skip revalidation
    QubitChannel { kraus: ch.kraus().iter().map(CMatrix::dagger).collect() }
}

/// The nine scalar invariants of the natural representation that the closed
/// forms consume. m2 and m5 may be complex (their real parts are taken after
/// raising to the k-th power); t1, m4, m6, m7 are real for admissible
/// channels and kept complex only to let the evaluator assert that.
#[derive(Debug, Clone, Copy)]
pub struct ChannelMoments {
    /// Tr X
    pub t1: Complex64,
    /// Tr[(Tr_1 X)^2]
    pub m2: Complex64,
    /// Tr(Tr_1 X * Tr_2 X)
    pub m4: Complex64,
    /// Tr[(E (x) id)(X)], the channel applied to the first tensor factor
    pub m5: Complex64,
    /// Tr(S X^2)
    pub m6: Complex64,
    /// Tr(X^2)
    pub m7: Complex64,
    /// ||X||_2^2 = Tr(X^dag X)
    pub m8: f64,
    /// purity of E^dag(I/2); identically 1/2 for admissible channels
    pub m9: f64,
}

pub fn channel_moments(ch: &QubitChannel) -> ChannelMoments {
    let x = natural_rep(ch).x;
    // partial traces over the first / second factor of C^2 (x) C^2
    let mut tr1 = CMatrix::zeros(2, 2);
    let mut tr2 = CMatrix::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            let mut acc1 = C_ZERO;
            let mut acc2 = C_ZERO;
            for a in 0..2 {
                acc1 += x.get(2 * a + i, 2 * a + j);
                acc2 += x.get(2 * i + a, 2 * j + a);
            }
            tr1.set(i, j, acc1);
            tr2.set(i, j, acc2);
        }
    }
    let mut e_first = CMatrix::zeros(4, 4);
    for k in ch.kraus() {
        let ke = kron(k, &CMatrix::identity(2));
        e_first.add_assign_scaled(&ke.matmul(&x).matmul(&ke.dagger()), C_ONE);
    }
    let x2 = x.matmul(&x);
    let mut q = CMatrix::zeros(2, 2);
    for k in ch.kraus() {
        q.add_assign_scaled(&k.dagger().matmul(k), C_ONE);
    }
    ChannelMoments {
        t1: x.trace(),
        m2: tr1.trace_product(&tr1),
        m4: tr1.trace_product(&tr2),
        m5: e_first.trace(),
        m6: swap_operator(2).trace_product(&x2),
        m7: x.trace_product(&x),
        m8: x.frobenius_norm_sq(),
        m9: q.trace_product(&q).re / 4.0,
    }
}

/// Depolarizing channel: full depolarization with probability p.
pub fn make_depolarizing(p: f64) -> Result<QubitChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParam(format!("depolarizing p must be in [0,1], got {p}")));
    }
    let s = (1.0 - 0.75 * p).sqrt();
    let w = p.sqrt() / 2.0;
    QubitChannel::new(vec![
        CMatrix::identity(2).scale(c(s, 0.0)),
        pauli_x().scale(c(w, 0.0)),
        pauli_y().scale(c(w, 0.0)),
        pauli_z().scale(c(w, 0.0)),
    ])
}

/// Unitary channel V = exp(i theta n.sigma), a Bloch-sphere rotation.
pub fn make_rotation(axis: [f64; 3], theta: f64) -> Result<QubitChannel> {
    let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidParam(format!("rotation axis must be a unit vector, |n| = {norm}")));
    }
    let mut h = pauli_x().scale(c(axis[0], 0.0));
    h.add_assign_scaled(&pauli_y(), c(axis[1], 0.0));
    h.add_assign_scaled(&pauli_z(), c(axis[2], 0.0));
    // exp(i theta H) = cos(theta) I + i sin(theta) H for H^2 = I
    let mut v = CMatrix::identity(2).scale(c(theta.cos(), 0.0));
    v.add_assign_scaled(&h, c(0.0, theta.sin()));
    QubitChannel::new(vec![v])
}

// ---------------------------------------------------------------------------
// Channel spec strings (CLI surface):
//   type=depolarizing p=0.3
//   type=rotation nx=0 ny=0 nz=1 theta=1.5707963
//   type=kraus file=<path>
// ---------------------------------------------------------------------------

/// Parse a channel spec string. Errors carry the column of the offending
/// token (1-based).
pub fn parse_channel_spec(spec: &str) -> Result<QubitChannel> {
    let mut fields = Vec::new();
    let mut col = 1usize;
    for tok in spec.split_whitespace() {
        let off = spec[col - 1..].find(tok).map(|i| col + i).unwrap_or(col);
        let (key, val) = tok.split_once('=').ok_or(Error::Parse {
            col: off,
            msg: format!("expected key=value, got '{tok}'"),
        })?;
        fields.push((key.to_string(), val.to_string(), off));
        col = off + tok.len();
    }
    let lookup = |key: &str| fields.iter().find(|(k, _, _)| k == key);
    let (ty, _, _) = lookup("type").ok_or(Error::Parse { col: 1, msg: "missing type=".into() })
        .map(|(_, v, o)| (v.clone(), (), *o))?;
    let parse_f64 = |key: &str| -> Result<f64> {
        let (_, v, off) = lookup(key).ok_or(Error::Parse {
            col: 1,
            msg: format!("missing {key}= for type={ty}"),
        })?;
        v.parse::<f64>().map_err(|_| Error::Parse {
            col: *off,
            msg: format!("cannot parse '{v}' as a number"),
        })
    };
    match ty.as_str() {
        "depolarizing" => make_depolarizing(parse_f64("p")?),
        "rotation" => {
            let axis = [parse_f64("nx")?, parse_f64("ny")?, parse_f64("nz")?];
            make_rotation(axis, parse_f64("theta")?)
        }
        "identity" => Ok(QubitChannel::identity()),
        "kraus" => {
            let (_, path, off) = lookup("file").ok_or(Error::Parse {
                col: 1,
                msg: "missing file= for type=kraus".into(),
            })?;
            let text = std::fs::read_to_string(Path::new(path)).map_err(|e| Error::Parse {
                col: *off,
                msg: format!("cannot read '{path}': {e}"),
            })?;
            parse_kraus_file(&text)
        }
        other => Err(Error::Parse { col: 1, msg: format!("unknown channel type '{other}'") }),
    }
}

/// Kraus file: whitespace-separated complex entries, one 2x2 matrix (four
/// entries, row-major) per blank-line-separated block. Complex entries look
/// like `0.5`, `-0.5i`, `0.3+0.1i`.
pub fn parse_kraus_file(text: &str) -> Result<QubitChannel> {
    let mut blocks: Vec<Vec<Complex64>> = Vec::new();
    let mut cur: Vec<Complex64> = Vec::new();
    let mut col = 0usize;
    for line in text.lines() {
        if line.trim().is_empty() {
            if !cur.is_empty() {
                blocks.push(std::mem::take(&mut cur));
            }
            continue;
        }
        for tok in line.split_whitespace() {
            col += 1;
            cur.push(parse_complex(tok).ok_or(Error::Parse {
                col,
                msg: format!("cannot parse complex entry '{tok}'"),
            })?);
        }
    }
    if !cur.is_empty() {
        blocks.push(cur);
    }
    let mut kraus = Vec::new();
    for b in blocks {
        if b.len() != 4 {
            return Err(Error::Parse {
                col,
                msg: format!("each Kraus block needs 4 entries, got {}", b.len()),
            });
        }
        kraus.push(CMatrix::from_vec(2, 2, b));
    }
    QubitChannel::new(kraus)
}

fn parse_complex(tok: &str) -> Option<Complex64> {
    let t = tok.trim();
    if let Some(body) = t.strip_suffix(['i', 'j']) {
        // find the split between real and imaginary parts: the last +/- that
        // is not an exponent sign and not the leading sign
        let bytes = body.as_bytes();
        let mut split = None;
        for i in (1..bytes.len()).rev() {
            let ch = bytes[i] as char;
            if (ch == '+' || ch == '-') && !matches!(bytes[i - 1] as char, 'e' | 'E') {
                split = Some(i);
                break;
            }
        }
        match split {
            Some(i) => {
                let re: f64 = body[..i].parse().ok()?;
                let im_str = &body[i..];
                let im: f64 = if im_str == "+" {
                    1.0
                } else if im_str == "-" {
                    -1.0
                } else {
                    im_str.parse().ok()?
                };
                Some(Complex64::new(re, im))
            }
            None => {
                let im: f64 = if body.is_empty() {
                    1.0
                } else if body == "-" {
                    -1.0
                } else {
                    body.parse().ok()?
                };
                Some(Complex64::new(0.0, im))
            }
        }
    } else {
        t.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::sample_haar_unitary;
    use crate::testutil::ABS_TOL;

    #[test]
    fn depolarizing_endpoints() {
        let id = make_depolarizing(0.0).unwrap();
        assert!(natural_rep(&id).x.max_abs_diff(&CMatrix::identity(4)) < ABS_TOL);
        let full = make_depolarizing(1.0).unwrap();
        assert!((channel_moments(&full).m8 - 1.0).abs() < ABS_TOL); // 4 - 6p + 3p^2 at p=1
        let half = make_depolarizing(0.5).unwrap();
        assert!((channel_moments(&half).t1.re / 4.0 - 0.625).abs() < ABS_TOL);
        assert!(make_depolarizing(1.5).is_err());
    }

    #[test]
    fn depolarizing_m8_formula() {
        for p in [0.1, 0.37, 0.8, 1.0] {
            let ch = make_depolarizing(p).unwrap();
            assert!((channel_moments(&ch).m8 - (4.0 - 6.0 * p + 3.0 * p * p)).abs() < ABS_TOL);
        }
    }

    #[test]
    fn rotation_basics() {
        let id = make_rotation([0.0, 0.0, 1.0], 0.0).unwrap();
        assert!(id.is_identity());
        for theta in [0.3, 1.2, std::f64::consts::FRAC_PI_2] {
            let ch = make_rotation([0.6, 0.0, 0.8], theta).unwrap();
            let m = channel_moments(&ch);
            assert!((m.m8 - 4.0).abs() < ABS_TOL); // ||X/2||_2 = 1
            let want = 4.0 * theta.cos().powi(2);
            assert!((m.t1 - c(want, 0.0)).norm() < ABS_TOL);
        }
        assert!(make_rotation([0.5, 0.0, 0.0], 0.3).is_err());
    }

    #[test]
    fn natural_rep_known_forms() {
        // depolarizing: X = (1-3p/4) I(x)I + p/4 sum_a sigma_a (x) sigma_a
        let p = 0.42;
        let ch = make_depolarizing(p).unwrap();
        let mut want = kron(&CMatrix::identity(2), &CMatrix::identity(2)).scale(c(1.0 - 0.75 * p, 0.0));
        for s in [pauli_x(), pauli_y(), pauli_z()] {
            want.add_assign_scaled(&kron(&s, &s), c(p / 4.0, 0.0));
        }
        assert!(natural_rep(&ch).x.max_abs_diff(&want) < ABS_TOL);

        // rotation: X = V (x) V^dag
        let rot = make_rotation([0.0, 1.0, 0.0], 0.9).unwrap();
        let v = &rot.kraus()[0];
        assert!(natural_rep(&rot).x.max_abs_diff(&kron(v, &v.dagger())) < ABS_TOL);
    }

    #[test]
    fn natural_rep_gauge_invariance() {
        // mixing the Kraus list by a unitary leaves X unchanged
        let ch = make_depolarizing(0.6).unwrap();
        let x0 = natural_rep(&ch).x;
        let u = sample_haar_unitary(4, 77);
        let mixed: Vec<CMatrix> = (0..4)
            .map(|i| {
                let mut acc = CMatrix::zeros(2, 2);
                for (j, k) in ch.kraus().iter().enumerate() {
                    acc.add_assign_scaled(k, u.get(i, j));
                }
                acc
            })
            .collect();
        let ch2 = QubitChannel::new(mixed).unwrap();
        assert!(natural_rep(&ch2).x.max_abs_diff(&x0) < 1e-12);
    }

    #[test]
    fn adjoint_involution_and_rotation() {
        let ch = make_rotation([0.0, 0.0, 1.0], 0.8).unwrap();
        let adj = adjoint_channel(&ch);
        let back = adjoint_channel(&adj);
        assert!(natural_rep(&back).x.max_abs_diff(&natural_rep(&ch).x) < 1e-12);
        let neg = make_rotation([0.0, 0.0, 1.0], -0.8).unwrap();
        assert!(natural_rep(&adj).x.max_abs_diff(&natural_rep(&neg).x) < ABS_TOL);

        let dep = make_depolarizing(0.5).unwrap();
        assert!(natural_rep(&adjoint_channel(&dep)).x.max_abs_diff(&natural_rep(&dep).x) < ABS_TOL);
    }

    #[test]
    fn identity_moments() {
        let m = channel_moments(&QubitChannel::identity());
        assert!((m.t1 - c(4.0, 0.0)).norm() < ABS_TOL);
        assert!((m.m2 - c(8.0, 0.0)).norm() < ABS_TOL);
        assert!((m.m4 - c(8.0, 0.0)).norm() < ABS_TOL);
        assert!((m.m5 - c(4.0, 0.0)).norm() < ABS_TOL);
        assert!((m.m6 - c(2.0, 0.0)).norm() < ABS_TOL);
        assert!((m.m7 - c(4.0, 0.0)).norm() < ABS_TOL);
        assert!((m.m8 - 4.0).abs() < ABS_TOL);
        assert!((m.m9 - 0.5).abs() < ABS_TOL);
    }

    /// Pauli-basis expansion oracle for the depolarizing channel: with
    /// X = a I(x)I + b sum_P P(x)P, a = 1-3p/4, b = p/4, every moment has a
    /// short closed form in (a, b).
    #[test]
    fn depolarizing_moments_vs_pauli_expansion() {
        let p = 0.4;
        let (a, b) = (1.0 - 0.75 * p, p / 4.0);
        let m = channel_moments(&make_depolarizing(p).unwrap());
        assert!((m.t1 - c(4.0 * a, 0.0)).norm() < ABS_TOL);
        assert!((m.m2 - c(8.0 * a * a, 0.0)).norm() < ABS_TOL);
        assert!((m.m4 - c(8.0 * a * a, 0.0)).norm() < ABS_TOL);
        // (E (x) id)(X) = a I + b(1-p) sum P(x)P, trace 4a
        assert!((m.m5 - c(4.0 * a, 0.0)).norm() < ABS_TOL);
        // X^2 = (a^2+3b^2) I + (2ab - 2b^2) sum P(x)P
        assert!((m.m6 - c(2.0 * a * a + 12.0 * a * b - 6.0 * b * b, 0.0)).norm() < ABS_TOL);
        assert!((m.m7 - c(4.0 * a * a + 12.0 * b * b, 0.0)).norm() < ABS_TOL);
        assert!((m.m8 - (4.0 * a * a + 12.0 * b * b)).abs() < ABS_TOL);
        assert!((m.m9 - 0.5).abs() < ABS_TOL);
    }

    #[test]
    fn trace_x_bounded_with_identity_extremum() {
        for ch in [
            make_depolarizing(0.3).unwrap(),
            make_rotation([1.0, 0.0, 0.0], 0.5).unwrap(),
            make_depolarizing(1.0).unwrap(),
        ] {
            let t1 = channel_moments(&ch).t1;
            assert!(t1.norm() <= 4.0 + ABS_TOL);
            assert!(t1.norm() < 4.0 - 1e-6); // non-identity channels stay below
        }
        assert!((channel_moments(&QubitChannel::identity()).t1.norm() - 4.0).abs() < ABS_TOL);
    }

    #[test]
    fn rejects_non_bistochastic_kraus() {
        // amplitude damping: CPTP but not unital
        let g: f64 = 0.3;
        let k0 = CMatrix::two_by_two(C_ONE, C_ZERO, C_ZERO, c((1.0 - g).sqrt(), 0.0));
        let k1 = CMatrix::two_by_two(C_ZERO, c(g.sqrt(), 0.0), C_ZERO, C_ZERO);
        assert!(matches!(QubitChannel::new(vec![k0, k1]), Err(Error::BadChannel(_))));
    }

    #[test]
    fn spec_strings_parse() {
        let ch = parse_channel_spec("type=depolarizing p=0.3").unwrap();
        assert!((channel_moments(&ch).t1.re - (4.0 - 3.0 * 0.3)).abs() < ABS_TOL);
        let ch = parse_channel_spec("type=rotation nx=0 ny=0 nz=1 theta=1.5707963267948966").unwrap();
        assert!(ch.is_unitary_conjugation());
        assert!(parse_channel_spec("type=depolarizing").is_err());
        match parse_channel_spec("type=depolarizing p=abc") {
            Err(Error::Parse { col, .. }) => assert!(col > 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn kraus_file_parses() {
        let text = "0.8660254037844386 0\n0 0.8660254037844386\n\n0 0.5\n0.5 0\n";
        let ch = parse_kraus_file(text).unwrap();
        assert_eq!(ch.kraus().len(), 2);
        let bad = parse_kraus_file("1 0 0\n");
        assert!(bad.is_err());
        assert_eq!(parse_complex("0.3+0.1i"), Some(c(0.3, 0.1)));
        assert_eq!(parse_complex("-0.5i"), Some(c(0.0, -0.5)));
        assert_eq!(parse_complex("1e-3-2e-4i"), Some(c(1e-3, -2e-4)));
        assert_eq!(parse_complex("i"), Some(c(0.0, 1.0)));
    }
}
