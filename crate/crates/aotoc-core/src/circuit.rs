//! Concrete-circuit engine: gate ensembles, brickwork scramblers, channel
//! application, and the exact / state-sampling A-OTOC evaluators.
//!
//! Fixed-circuit evaluators act in the Schrodinger picture throughout: the
//! circuit maps rho -> U^dag (E^dag)^{x k}(U rho U^dag) U with noise on
//! qubits 0..k-1. Its Haar average over U coincides with the closed forms
//! and the Weingarten engine (the channel and its adjoint have the same
//! moment set).

use crate::channel::{pauli_x, pauli_y, pauli_z, QubitChannel};
use crate::error::{Error, Result};
use crate::tensor::{kron, partial_trace, CMatrix, QubitRegisterLayout, Subsystem, C_ONE, C_ZERO};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::collections::BTreeMap;
use std::sync::OnceLock;

pub const DEFAULT_MAX_DENSE_L: usize = 8;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Stable seed derivation for independent work items.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut z = master ^ 0x9E37_79B9_7F4A_7C15;
    for &t in tags {
        z = splitmix(z ^ t.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    }
    splitmix(z)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn check_dense_guard(l: usize, max_l: usize) -> Result<()> {
    if l > max_l {
        return Err(Error::ResourceGuard { l, max: max_l });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Gate sampling
// ---------------------------------------------------------------------------

/// Haar-random d x d unitary: Ginibre matrix orthonormalized column by
/// column with positive-real normalization coefficients (the QR phase
/// convention that makes Q Haar distributed). Deterministic per seed.
pub fn sample_haar_unitary(d: usize, seed: u64) -> CMatrix {
    assert!(d >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g: Vec<Vec<Complex64>> = (0..d)
        .map(|_| {
            (0..d)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect()
        })
        .collect(); // g[j] = column j
    for j in 0..d {
        // two orthogonalization passes keep residuals at machine precision
        for _ in 0..2 {
            for i in 0..j {
                let (qi, vj) = {
                    let (a, b) = g.split_at_mut(j);
                    (&a[i], &mut b[0])
                };
                let proj: Complex64 = qi.iter().zip(vj.iter()).map(|(q, v)| q.conj() * v).sum();
                for (v, q) in vj.iter_mut().zip(qi.iter()) {
                    *v -= proj * q;
                }
            }
        }
        let norm: f64 = g[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for v in g[j].iter_mut() {
            *v /= norm;
        }
    }
    let mut u = CMatrix::zeros(d, d);
    for jcol in 0..d {
        for irow in 0..d {
            u.set(irow, jcol, g[jcol][irow]);
        }
    }
    u
}

fn clifford_generators() -> Vec<CMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let h = CMatrix::two_by_two(c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0));
    let ph = CMatrix::two_by_two(C_ONE, C_ZERO, C_ZERO, c(0.0, 1.0));
    let i2 = CMatrix::identity(2);
    let mut cnot = CMatrix::zeros(4, 4);
    cnot.set(0, 0, C_ONE);
    cnot.set(1, 1, C_ONE);
    cnot.set(2, 3, C_ONE);
    cnot.set(3, 2, C_ONE);
    vec![kron(&h, &i2), kron(&i2, &h), kron(&ph, &i2), kron(&i2, &ph), cnot]
}

fn canonical_phase(u: &CMatrix) -> CMatrix {
    for z in u.data() {
        if z.norm() > 1e-8 {
            return u.scale(z.conj() / z.norm());
        }
    }
    unreachable!("zero matrix cannot be unitary")
}

fn quantize_key(u: &CMatrix) -> Vec<i64> {
    u.data()
        .iter()
        .flat_map(|z| [(z.re * 1e6).round() as i64, (z.im * 1e6).round() as i64])
        .collect()
}

/// All 11,520 two-qubit Cliffords (mod global phase), enumerated once by
/// closure from {H, S on each qubit, CNOT} and ordered by canonical key, so
/// an index addresses the same element on every platform.
pub fn two_qubit_clifford_group() -> &'static [CMatrix] {
    static GROUP: OnceLock<Vec<CMatrix>> = OnceLock::new();
    GROUP.get_or_init(|| {
        let gens = clifford_generators();
        let mut seen: BTreeMap<Vec<i64>, CMatrix> = BTreeMap::new();
        let id = canonical_phase(&CMatrix::identity(4));
        let mut frontier = vec![id.clone()];
        seen.insert(quantize_key(&id), id);
        while let Some(u) = frontier.pop() {
            for g in &gens {
                let v = canonical_phase(&g.matmul(&u));
                let key = quantize_key(&v);
                if !seen.contains_key(&key) {
                    seen.insert(key, v.clone());
                    frontier.push(v);
                }
            }
        }
        assert_eq!(seen.len(), 11_520, "two-qubit Clifford group order");
        seen.into_values().collect()
    })
}

/// Uniformly random element of the 2-qubit Clifford group.
pub fn sample_two_qubit_clifford(seed: u64) -> CMatrix {
    let group = two_qubit_clifford_group();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    group[rng.gen_range(0..group.len())].clone()
}

/// exp[-i (pi/4 XX + pi/4 YY + J ZZ)], the dual-unitary core.
fn dual_unitary_core(j: f64) -> CMatrix {
    let mut out = CMatrix::identity(4);
    for (p, ang) in [
        (pauli_x(), std::f64::consts::FRAC_PI_4),
        (pauli_y(), std::f64::consts::FRAC_PI_4),
        (pauli_z(), j),
    ] {
        let pp = kron(&p, &p);
        let mut f = CMatrix::identity(4).scale(c(ang.cos(), 0.0));
        f.add_assign_scaled(&pp, c(0.0, -ang.sin()));
        out = out.matmul(&f);
    }
    out
}

/// Realignment of a two-qubit gate: R[(o1,i1),(o2,i2)] = g[(o1,o2),(i1,i2)].
/// Its singular values are the operator-Schmidt coefficients of g; a gate is
/// dual-unitary iff R is unitary.
pub fn reshuffle(g: &CMatrix) -> CMatrix {
    assert_eq!(g.rows(), 4);
    assert_eq!(g.cols(), 4);
    let mut r = CMatrix::zeros(4, 4);
    for o1 in 0..2 {
        for o2 in 0..2 {
            for i1 in 0..2 {
                for i2 in 0..2 {
                    r.set(o1 * 2 + i1, o2 * 2 + i2, g.get(o1 * 2 + o2, i1 * 2 + i2));
                }
            }
        }
    }
    r
}

/// Dual-unitary two-qubit gate with entangling parameter J in [0, pi/4]:
/// (u+ (x) u-) . exp[-i(pi/4 XX + pi/4 YY + J ZZ)] . (v- (x) v+), with the
/// four single-qubit dressings Haar sampled from the seed (identity when no
/// seed is given). J = pi/4 with identity dressings is SWAP up to phase.
pub fn make_dual_unitary_gate(j: f64, seed: Option<u64>) -> Result<CMatrix> {
    if !(0.0..=std::f64::consts::FRAC_PI_4 + 1e-12).contains(&j) {
        return Err(Error::InvalidParam(format!("dual-unitary J must be in [0, pi/4], got {j}")));
    }
    let core = dual_unitary_core(j);
    let gate = match seed {
        None => core,
        Some(s) => {
            let d: Vec<CMatrix> =
                (0..4).map(|i| sample_haar_unitary(2, derive_seed(s, &[0xD0, i]))).collect();
            kron(&d[0], &d[1]).matmul(&core).matmul(&kron(&d[2], &d[3]))
        }
    };
    let resid = reshuffle(&gate).unitarity_residual();
    if resid > 1e-10 {
        return Err(Error::NumericalContract(format!(
            "dual-unitarity residual {resid:.3e} exceeds 1e-10"
        )));
    }
    Ok(gate)
}

// ---------------------------------------------------------------------------
// Operator-space entangling power
// ---------------------------------------------------------------------------

/// Permutation of four dim-4 tensor factors swapping slots a and b.
fn factor_swap_256(a: usize, b: usize) -> CMatrix {
    let mut t = CMatrix::zeros(256, 256);
    for x in 0..256usize {
        let mut digits = [(x >> 6) & 3, (x >> 4) & 3, (x >> 2) & 3, x & 3];
        digits.swap(a, b);
        let y = (digits[0] << 6) | (digits[1] << 4) | (digits[2] << 2) | digits[3];
        t.set(y, x, C_ONE);
    }
    t
}

/// Operator-space entangling power of a two-qubit gate: the exact Haar
/// average, over normalized product operators O1 (x) O2, of the linear
/// entropy of the operator-Schmidt spectrum of g (O1 (x) O2) g^dag across
/// the qubit bipartition. Normalized so the maximum over two-qubit unitaries
/// is 1 (the raw average peaks at exactly 1/2); identity and SWAP give 0.
pub fn operator_entangling_power(g: &CMatrix) -> Result<f64> {
    if g.rows() != 4 || g.cols() != 4 {
        return Err(Error::DimMismatch(format!("expected a 4x4 gate, got {}x{}", g.rows(), g.cols())));
    }
    if g.unitarity_residual() > 1e-8 {
        return Err(Error::InvalidParam("operator_entangling_power requires a unitary gate".into()));
    }
    // Ad_g as a 16x16 matrix in the normalized Pauli product basis.
    let paulis = [CMatrix::identity(2), pauli_x(), pauli_y(), pauli_z()];
    let mut basis = Vec::with_capacity(16);
    for p1 in &paulis {
        for p2 in &paulis {
            basis.push(kron(p1, p2).scale(c(0.5, 0.0)));
        }
    }
    let gd = g.dagger();
    let mut w = CMatrix::zeros(16, 16);
    for (col, b) in basis.iter().enumerate() {
        let img = g.matmul(b).matmul(&gd);
        for (row, br) in basis.iter().enumerate() {
            let mut acc = C_ZERO;
            for (x, y) in br.data().iter().zip(img.data()) {
                acc += x.conj() * y;
            }
            w.set(row, col, acc);
        }
    }
    // Exact product-state average on (C^4)^(x2), two copies: factors ordered
    // (site1, site2, site1', site2'). S1 swaps the two site-1 factors.
    let ww = kron(&w, &w);
    let s1 = factor_swap_256(0, 2);
    let s2 = factor_swap_256(1, 3);
    let scale = 1.0 / 20.0; // D(D+1) with D = 4
    let mut pi1 = CMatrix::identity(256);
    pi1.add_assign_scaled(&s1, C_ONE);
    let mut pi2 = CMatrix::identity(256);
    pi2.add_assign_scaled(&s2, C_ONE);
    let m = ww.matmul(&pi1).matmul(&pi2).matmul(&ww.dagger()).matmul(&s1);
    let avg_purity = m.trace().re * scale * scale;
    let raw = 1.0 - avg_purity;
    // raw sits in [0, 1/2] up to rounding
    Ok((2.0 * raw).clamp(0.0, 1.0))
}

// ---------------------------------------------------------------------------
// Brickwork circuits
// ---------------------------------------------------------------------------

/// Which distribution the scrambler is drawn from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnsembleKind {
    GlobalHaar,
    BrickworkHaar,
    BrickworkClifford,
    BrickworkDualUnitary { j: f64 },
}

impl EnsembleKind {
    pub fn label(&self) -> String {
        match self {
            EnsembleKind::GlobalHaar => "global-haar".into(),
            EnsembleKind::BrickworkHaar => "brickwork-haar".into(),
            EnsembleKind::BrickworkClifford => "brickwork-clifford".into(),
            EnsembleKind::BrickworkDualUnitary { j } => format!("brickwork-dual-unitary(J={j})"),
        }
    }
}

/// A gate distribution plus its master seed; draws are pure functions of
/// (kind, seed, draw index).
#[derive(Debug, Clone, Copy)]
pub struct GateEnsemble {
    pub kind: EnsembleKind,
    pub seed: u64,
}

/// Layered nearest-neighbour circuit on an open chain. Layer 0 couples
/// (0,1),(2,3),...; layer 1 couples (1,2),(3,4),...; and so on, alternating.
#[derive(Debug, Clone)]
pub struct BrickworkCircuit {
    l: usize,
    layers: Vec<Vec<(usize, CMatrix)>>,
}

impl BrickworkCircuit {
    pub fn num_qubits(&self) -> usize {
        self.l
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Vec<(usize, CMatrix)>] {
        &self.layers
    }

    /// Dense matrix of the full circuit (layer 0 acts first).
    pub fn compose(&self) -> CMatrix {
        let mut u = CMatrix::identity(1 << self.l);
        for layer in &self.layers {
            for (q, gate) in layer {
                u = u.apply_local_left(gate, &[*q, *q + 1], self.l);
            }
        }
        u
    }
}

/// Build a brickwork circuit of `depth` layers (default 2L). Dual-unitary
/// ensembles repeat one sampled gate at every slot.
pub fn build_brickwork(
    l: usize,
    ensemble: &GateEnsemble,
    draw: u64,
    depth: Option<usize>,
) -> Result<BrickworkCircuit> {
    if l < 2 || l % 2 != 0 {
        return Err(Error::InvalidParam(format!("brickwork needs even L >= 2, got {l}")));
    }
    let depth = depth.unwrap_or(2 * l);
    let repeated = match ensemble.kind {
        EnsembleKind::GlobalHaar => {
            return Err(Error::InvalidParam("global-haar is not a brickwork ensemble".into()))
        }
        EnsembleKind::BrickworkDualUnitary { j } => {
            Some(make_dual_unitary_gate(j, Some(derive_seed(ensemble.seed, &[0xDA, draw])))?)
        }
        _ => None,
    };
    let mut layers = Vec::with_capacity(depth);
    for layer_idx in 0..depth {
        let start = layer_idx % 2;
        let mut layer = Vec::new();
        let mut q = start;
        let mut slot = 0u64;
        while q + 1 < l {
            let gate = match (&repeated, ensemble.kind) {
                (Some(g), _) => g.clone(),
                (None, EnsembleKind::BrickworkHaar) => sample_haar_unitary(
                    4,
                    derive_seed(ensemble.seed, &[0x4A, draw, layer_idx as u64, slot]),
                ),
                (None, EnsembleKind::BrickworkClifford) => sample_two_qubit_clifford(derive_seed(
                    ensemble.seed,
                    &[0xC1, draw, layer_idx as u64, slot],
                )),
                _ => unreachable!(),
            };
            layer.push((q, gate));
            q += 2;
            slot += 1;
        }
        layers.push(layer);
    }
    Ok(BrickworkCircuit { l, layers })
}

/// A scrambler for the encode-noise-decode circuit: either a dense unitary
/// or a brickwork circuit applied gate by gate.
pub enum Scrambler<'a> {
    Dense(&'a CMatrix),
    Brickwork(&'a BrickworkCircuit),
}

impl Scrambler<'_> {
    fn num_qubits(&self) -> Result<usize> {
        match self {
            Scrambler::Dense(u) => {
                let d = u.rows();
                if !u.is_square() || !d.is_power_of_two() {
                    return Err(Error::DimMismatch("scrambler must be square with dim 2^L".into()));
                }
                Ok(d.trailing_zeros() as usize)
            }
            Scrambler::Brickwork(b) => Ok(b.num_qubits()),
        }
    }

    fn conjugate(&self, rho: &CMatrix, l: usize, inverse: bool) -> CMatrix {
        match self {
            Scrambler::Dense(u) => {
                if inverse {
                    u.dagger().matmul(rho).matmul(u)
                } else {
                    u.matmul(rho).matmul(&u.dagger())
                }
            }
            Scrambler::Brickwork(b) => {
                let mut out = rho.clone();
                if inverse {
                    for layer in b.layers().iter().rev() {
                        for (q, g) in layer.iter().rev() {
                            let gd = g.dagger();
                            out = out.apply_local_left(&gd, &[*q, *q + 1], l);
                            out = out.apply_local_right(g, &[*q, *q + 1], l);
                        }
                    }
                } else {
                    for layer in b.layers() {
                        for (q, g) in layer {
                            out = out.apply_local_left(g, &[*q, *q + 1], l);
                            out = out.apply_local_right(&g.dagger(), &[*q, *q + 1], l);
                        }
                    }
                }
                out
            }
        }
    }
}

/// Schrodinger-picture action of the encode-noise-decode circuit:
/// rho -> U^dag (E^dag)^{x k}(U rho U^dag) U, noise on qubits 0..k-1.
pub fn apply_circuit_channel(
    rho: &CMatrix,
    u: &Scrambler,
    ch: &QubitChannel,
    k: usize,
) -> Result<CMatrix> {
    let l = u.num_qubits()?;
    if rho.rows() != (1 << l) || !rho.is_square() {
        return Err(Error::DimMismatch(format!(
            "state is {}x{}, scrambler acts on dim {}",
            rho.rows(),
            rho.cols(),
            1 << l
        )));
    }
    if k > l {
        return Err(Error::InvalidParam(format!("k = {k} exceeds L = {l}")));
    }
    let mut sigma = u.conjugate(rho, l, false);
    let adj: Vec<CMatrix> = ch.kraus().iter().map(CMatrix::dagger).collect();
    for q in 0..k {
        let mut next = CMatrix::zeros(sigma.rows(), sigma.cols());
        for (ka, k0) in adj.iter().zip(ch.kraus()) {
            let term = sigma.apply_local_left(ka, &[q], l).apply_local_right(k0, &[q], l);
            next.add_assign_scaled(&term, C_ONE);
        }
        sigma = next;
    }
    Ok(u.conjugate(&sigma, l, true))
}

// ---------------------------------------------------------------------------
// A-OTOC evaluators
// ---------------------------------------------------------------------------

/// Result of a sampling estimator.
#[derive(Debug, Clone, Copy)]
pub struct AotocEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n_circuits: usize,
    pub n_states: usize,
    pub seed: u64,
}

/// Exact bipartite A-OTOC of the circuit for a fixed scrambler, via the
/// operator-basis expansion of the swap formula:
/// G = (1/d^2) [ d_B sum_ab Tr(C(e_ab x I) C(e_ba x I)) - sum F F ] with
/// F[(cd),(ab)] = Tr((e_cd x I) C(e_ab x I)). Costs d_A^2 channel
/// applications on 2^L-dimensional matrices.
pub fn aotoc_exact(
    u: &Scrambler,
    ch: &QubitChannel,
    k: usize,
    layout: &QubitRegisterLayout,
    max_l: usize,
) -> Result<f64> {
    let l = layout.num_qubits();
    check_dense_guard(l, max_l)?;
    if u.num_qubits()? != l {
        return Err(Error::DimMismatch("scrambler size does not match layout".into()));
    }
    let d = layout.dim();
    let da = layout.dim_a();
    let db = layout.dim_b();
    let mut term1 = 0.0f64;
    let mut tb: Vec<CMatrix> = Vec::with_capacity(da * da);
    for a in 0..da {
        for b in 0..da {
            let mut p = CMatrix::zeros(d, d);
            for bb in 0..db {
                p.set(a * db + bb, b * db + bb, C_ONE);
            }
            let img = apply_circuit_channel(&p, u, ch, k)?;
            // C maps adjoints to adjoints, so the (b,a) image is img^dag and
            // Tr(C(e_ab x I) C(e_ba x I)) = ||img||_F^2.
            term1 += img.frobenius_norm_sq();
            tb.push(partial_trace(&img, layout, &Subsystem::B)?);
        }
    }
    let mut term2 = C_ZERO;
    for a in 0..da {
        for b in 0..da {
            // F[(cd),(ab)] = Tr_B(C(e_ab x I))[d,c]; the (dc),(ba) partner
            // contracts to a plain trace product.
            term2 += tb[a * da + b].trace_product(&tb[b * da + a]);
        }
    }
    let g = (db as f64 * term1 - term2.re) / (d as f64 * d as f64);
    if term2.im.abs() > 1e-9 * (1.0 + term2.re.abs()) {
        return Err(Error::NumericalContract(format!(
            "aotoc_exact imaginary residue {:.3e}",
            term2.im
        )));
    }
    Ok(g)
}

/// State-sampling estimator: Haar states |psi> on H_A, the circuit applied
/// to psi (x) I/d_B, and the linear-entropy combination
/// N_A [ S_L(Tr_B rho) - d_B (S_L(rho) - S_L^min) ] averaged over states.
pub fn aotoc_state_estimate(
    u: &Scrambler,
    ch: &QubitChannel,
    k: usize,
    layout: &QubitRegisterLayout,
    n_states: usize,
    seed: u64,
    max_l: usize,
) -> Result<AotocEstimate> {
    let l = layout.num_qubits();
    check_dense_guard(l, max_l)?;
    if n_states < 2 {
        return Err(Error::InvalidParam("n_states must be >= 2".into()));
    }
    let da = layout.dim_a();
    let db = layout.dim_b();
    let na = (da as f64 + 1.0) / da as f64;
    let sl_min = 1.0 - 1.0 / db as f64;
    let mut vals = Vec::with_capacity(n_states);
    for i in 0..n_states {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0x57A7E, i as u64]));
        let mut psi: Vec<Complex64> = (0..da)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        psi.iter_mut().for_each(|z| *z /= norm);
        let mut rho0 = CMatrix::zeros(layout.dim(), layout.dim());
        for a1 in 0..da {
            for a2 in 0..da {
                let v = psi[a1] * psi[a2].conj() / db as f64;
                for b in 0..db {
                    rho0.set(a1 * db + b, a2 * db + b, v);
                }
            }
        }
        let rho = apply_circuit_channel(&rho0, u, ch, k)?;
        let purity_full = rho.trace_product(&rho).re;
        let rho_a = partial_trace(&rho, layout, &Subsystem::B)?;
        let purity_a = rho_a.trace_product(&rho_a).re;
        let sl_full = 1.0 - purity_full;
        let sl_a = 1.0 - purity_a;
        vals.push(na * (sl_a - db as f64 * (sl_full - sl_min)));
    }
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok(AotocEstimate {
        value: mean,
        stderr: (var / n).sqrt(),
        n_circuits: 1,
        n_states,
        seed,
    })
}
