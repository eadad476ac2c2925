//! Exact Haar average of the bipartite A-OTOC via fourth-moment Weingarten
//! calculus over S4 — the ground-truth engine the closed form is validated
//! against.
//!
//! The averaged four-copy expression factorizes over qubits: every trace is
//! a product of per-qubit 16x16 traces, so the exact value costs O(24^2 * L)
//! scalar work after the 16x16 precomputation. An unfactorized dense
//! reference at L = 2 evaluates the same expression on literal 256x256
//! four-copy operators and is kept permanently as the conventions anchor.

use crate::channel::QubitChannel;
use crate::circuit::{aotoc_exact, derive_seed, sample_haar_unitary, AotocEstimate, Scrambler};
use crate::closed_form::{AotocValue, CircuitParams};
use crate::error::{Error, Result};
use crate::tensor::{kron, CMatrix, QubitRegisterLayout, C_ONE};
use num_complex::Complex64;
use std::sync::OnceLock;

const RESIDUE_TOL: f64 = 1e-10;

/// A permutation of the four Hilbert-space copies, stored as an image array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PermS4 {
    img: [u8; 4],
}

impl PermS4 {
    pub fn identity() -> Self {
        Self { img: [0, 1, 2, 3] }
    }

    pub fn from_images(img: [u8; 4]) -> Self {
        let mut seen = [false; 4];
        for &i in &img {
            assert!(i < 4 && !seen[i as usize], "not a permutation: {img:?}");
            seen[i as usize] = true;
        }
        Self { img }
    }

    pub fn image(&self, i: usize) -> usize {
        self.img[i] as usize
    }

    /// (self o other)(i) = self(other(i)).
    pub fn compose(&self, other: &PermS4) -> PermS4 {
        let mut img = [0u8; 4];
        for i in 0..4 {
            img[i] = self.img[other.img[i] as usize];
        }
        PermS4 { img }
    }

    pub fn inverse(&self) -> PermS4 {
        let mut img = [0u8; 4];
        for i in 0..4 {
            img[self.img[i] as usize] = i as u8;
        }
        PermS4 { img }
    }

    pub fn cycle_count(&self) -> usize {
        self.cycle_type().len()
    }

    /// Cycle lengths, longest first.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut seen = [false; 4];
        let mut lens = Vec::new();
        for start in 0..4 {
            if seen[start] {
                continue;
            }
            let mut n = 0;
            let mut j = start;
            while !seen[j] {
                seen[j] = true;
                j = self.img[j] as usize;
                n += 1;
            }
            lens.push(n);
        }
        lens.sort_unstable_by(|a, b| b.cmp(a));
        lens
    }
}

/// The 24 elements of S4 in lexicographic image order.
pub fn s4_elements() -> &'static [PermS4; 24] {
    static ELEMS: OnceLock<[PermS4; 24]> = OnceLock::new();
    ELEMS.get_or_init(|| {
        let mut out = Vec::with_capacity(24);
        for a in 0..4u8 {
            for b in 0..4u8 {
                for c in 0..4u8 {
                    for d in 0..4u8 {
                        let img = [a, b, c, d];
                        let mut seen = [false; 4];
                        if img.iter().all(|&x| !std::mem::replace(&mut seen[x as usize], true)) {
                            out.push(PermS4 { img });
                        }
                    }
                }
            }
        }
        out.try_into().unwrap()
    })
}

/// Integer partitions of 4, labelling the S4 irreps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionOf4 {
    Four,
    ThreeOne,
    TwoTwo,
    TwoOneOne,
    OneOneOneOne,
}

impl PartitionOf4 {
    pub fn all() -> [PartitionOf4; 5] {
        [Self::Four, Self::ThreeOne, Self::TwoTwo, Self::TwoOneOne, Self::OneOneOneOne]
    }

    pub fn parts(&self) -> &'static [usize] {
        match self {
            Self::Four => &[4],
            Self::ThreeOne => &[3, 1],
            Self::TwoTwo => &[2, 2],
            Self::TwoOneOne => &[2, 1, 1],
            Self::OneOneOneOne => &[1, 1, 1, 1],
        }
    }

    /// Irrep dimension, computed as the character at the identity.
    pub fn dim(&self) -> i64 {
        murnaghan_nakayama(self.parts(), &[1, 1, 1, 1])
    }
}

/// Character value by the Murnaghan-Nakayama rule, via beta numbers: a rim
/// hook of length r removed from lambda corresponds to a beta number b with
/// b - r >= 0 not already occupied, with sign (-1)^(occupied entries passed).
fn murnaghan_nakayama(lambda: &[usize], rho: &[usize]) -> i64 {
    if rho.is_empty() {
        return if lambda.iter().all(|&x| x == 0) { 1 } else { 0 };
    }
    let m = lambda.len().max(1);
    let mut beta: Vec<i64> = (0..m).map(|i| lambda.get(i).map_or(0, |&x| x as i64) + (m - 1 - i) as i64).collect();
    let r = rho[0] as i64;
    let rest = &rho[1..];
    let mut total = 0i64;
    for i in 0..m {
        let b = beta[i];
        if b < r || beta.contains(&(b - r)) {
            continue;
        }
        let height = beta.iter().filter(|&&x| x > b - r && x < b).count();
        let sign = if height % 2 == 0 { 1 } else { -1 };
        let old = beta[i];
        beta[i] = b - r;
        let mut sorted = beta.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let sub: Vec<usize> = sorted
            .iter()
            .enumerate()
            .map(|(j, &x)| (x - (m - 1 - j) as i64) as usize)
            .collect();
        total += sign * murnaghan_nakayama(&sub, rest);
        beta[i] = old;
    }
    total
}

/// chi_lambda(pi): class function of the cycle type of pi.
pub fn s4_character(lambda: PartitionOf4, pi: &PermS4) -> i64 {
    murnaghan_nakayama(lambda.parts(), &pi.cycle_type())
}

/// Tr Pi_lambda = (d_lambda / 24) * sum_sigma chi_lambda(sigma) d^{c(sigma)}.
pub fn projector_trace(lambda: PartitionOf4, d: f64) -> f64 {
    let sum: f64 = s4_elements()
        .iter()
        .map(|p| s4_character(lambda, p) as f64 * d.powi(p.cycle_count() as i32))
        .sum();
    lambda.dim() as f64 / 24.0 * sum
}

/// Gram matrix d^{c(pi^-1 sigma)} of the S4 permutation operators and its
/// inverse, the Weingarten matrix.
#[derive(Debug, Clone)]
pub struct WeingartenTable {
    pub d: f64,
    pub gram: Vec<Vec<f64>>,
    pub wg: Vec<Vec<f64>>,
}

pub fn weingarten_table(d: f64) -> Result<WeingartenTable> {
    if d < 4.0 {
        return Err(Error::InvalidParam(format!(
            "weingarten_table needs d >= 4 so every Tr Pi_lambda > 0, got {d}"
        )));
    }
    let elems = s4_elements();
    let gram: Vec<Vec<f64>> = elems
        .iter()
        .map(|p| {
            let pinv = p.inverse();
            elems.iter().map(|q| d.powi(pinv.compose(q).cycle_count() as i32)).collect()
        })
        .collect();
    let wg = invert(&gram)?;
    Ok(WeingartenTable { d, gram, wg })
}

/// Character-sum construction of the same table: the Fourier coefficient of
/// the Weingarten function on irrep lambda is d_lambda^2 / ((4!)^2 m_lambda)
/// with m_lambda = Tr Pi_lambda / d_lambda the Schur dimension.
pub fn weingarten_table_from_characters(d: f64) -> Result<Vec<Vec<f64>>> {
    if d < 4.0 {
        return Err(Error::InvalidParam("d >= 4 required".into()));
    }
    let elems = s4_elements();
    let coeff: Vec<(PartitionOf4, f64)> = PartitionOf4::all()
        .into_iter()
        .map(|lam| {
            let dl = lam.dim() as f64;
            (lam, dl * dl * dl / (576.0 * projector_trace(lam, d)))
        })
        .collect();
    Ok(elems
        .iter()
        .map(|p| {
            let pinv = p.inverse();
            elems
                .iter()
                .map(|q| {
                    let tau = pinv.compose(q);
                    coeff.iter().map(|(lam, c)| c * s4_character(*lam, &tau) as f64).sum()
                })
                .collect()
        })
        .collect())
}

fn invert(a: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = a.len();
    let mut aug: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| aug[i][col].abs().partial_cmp(&aug[j][col].abs()).unwrap())
            .unwrap();
        if aug[pivot][col].abs() < 1e-300 {
            return Err(Error::NumericalContract("singular Gram matrix".into()));
        }
        aug.swap(col, pivot);
        let p = aug[col][col];
        for x in aug[col].iter_mut() {
            *x /= p;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = aug[row][col];
            if f == 0.0 {
                continue;
            }
            for j in 0..2 * n {
                let v = aug[col][j];
                aug[row][j] -= f * v;
            }
        }
    }
    Ok(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Per-qubit 16x16 building blocks on the four copies of C^2.
pub struct SingleQubitFourCopyOps {
    /// permutation representations t_pi, indexed like s4_elements()
    pub t: Vec<CMatrix>,
    /// sum_ij K_i (x) K_j (x) K_i^dag (x) K_j^dag, the noisy-site factor
    pub x2: CMatrix,
    /// per-qubit factor of S13 S24
    pub s13s24: CMatrix,
    /// copies (1,2) swap factor
    pub s12: CMatrix,
    /// copies (3,4) swap factor
    pub s34: CMatrix,
}

fn perm_rep(p: &PermS4, local_dim: usize) -> CMatrix {
    let dim = local_dim.pow(4);
    let mut t = CMatrix::zeros(dim, dim);
    let stride = |i: usize| local_dim.pow(3 - i as u32);
    for x in 0..dim {
        let xs: Vec<usize> = (0..4).map(|i| (x / stride(i)) % local_dim).collect();
        let mut ys = [0usize; 4];
        for i in 0..4 {
            ys[p.image(i)] = xs[i];
        }
        let y: usize = (0..4).map(|i| ys[i] * stride(i)).sum();
        t.set(y, x, C_ONE);
    }
    t
}

pub fn four_copy_ops(ch: &QubitChannel) -> SingleQubitFourCopyOps {
    let t: Vec<CMatrix> = s4_elements().iter().map(|p| perm_rep(p, 2)).collect();
    let mut x2 = CMatrix::zeros(16, 16);
    for ki in ch.kraus() {
        for kj in ch.kraus() {
            x2.add_assign_scaled(&kron(&kron(ki, kj), &kron(&ki.dagger(), &kj.dagger())), C_ONE);
        }
    }
    SingleQubitFourCopyOps {
        t,
        x2,
        s13s24: perm_rep(&PermS4::from_images([2, 3, 0, 1]), 2),
        s12: perm_rep(&PermS4::from_images([1, 0, 2, 3]), 2),
        s34: perm_rep(&PermS4::from_images([0, 1, 3, 2]), 2),
    }
}

fn int_log2(x: f64) -> i64 {
    let l = x.log2().round();
    debug_assert!((x - l.exp2()).abs() < 1e-6 * x.max(1.0), "not a power of two: {x}");
    l as i64
}

/// Exact Haar-averaged bipartite A-OTOC for arbitrary (L, k) via the
/// per-qubit factorized fourth-moment average: right traces
/// Tr(O T_sigma) = Tr(X2 t_sigma)^k * 2^{(L-k) c(sigma)}, left traces
/// products of per-qubit factors where A-qubits carry the copies-(1,2) and
/// copies-(3,4) swaps and B-qubits carry the copies-(3,4) swap where
/// applicable.
pub fn haar_averaged_g_exact(ch: &QubitChannel, p: &CircuitParams) -> Result<AotocValue> {
    let l = p.l() as i64;
    let k = p.k() as u32;
    let half = l / 2;
    let d = (l as f64).exp2();
    let table = weingarten_table(d)?;
    let ops = four_copy_ops(ch);
    let elems = s4_elements();

    let rt: Vec<Complex64> = elems
        .iter()
        .enumerate()
        .map(|(i, sig)| {
            let q = ops.x2.trace_product(&ops.t[i]);
            q.powu(k) * (((l - k as i64) * sig.cycle_count() as i64) as f64).exp2()
        })
        .collect();

    let mut total = Complex64::new(0.0, 0.0);
    for (i, _pi) in elems.iter().enumerate() {
        let mut b = Complex64::new(0.0, 0.0);
        for (j, r) in rt.iter().enumerate() {
            b += table.wg[i][j] * r;
        }
        if b.im.abs() > RESIDUE_TOL * (1.0 + b.re.abs()) {
            return Err(Error::NumericalContract(format!(
                "Weingarten coefficient has imaginary residue {:.3e}",
                b.im
            )));
        }
        let base = ops.s13s24.matmul(&ops.t[i]);
        let fa1 = int_log2(base.matmul(&ops.s12).matmul(&ops.s34).trace().re);
        let fb1 = int_log2(base.matmul(&ops.s34).trace().re);
        let fb2 = int_log2(base.trace().re);
        let left = ((half + half * (fa1 + fb1)) as f64).exp2() - ((half * (fa1 + fb2)) as f64).exp2();
        total += b * left;
    }
    let g = total / (d * d);
    if g.im.abs() > RESIDUE_TOL {
        return Err(Error::NumericalContract(format!(
            "averaged A-OTOC has imaginary residue {:.3e}",
            g.im
        )));
    }
    AotocValue::new_checked(g.re)
}

/// Unfactorized reference at L = 2: builds the literal 256-dimensional
/// four-copy operators and contracts the averaged expression verbatim.
pub fn haar_averaged_g_dense_reference(ch: &QubitChannel, p: &CircuitParams) -> Result<AotocValue> {
    if p.l() != 2 {
        return Err(Error::InvalidParam("dense reference path is defined for L = 2".into()));
    }
    let k = p.k();
    let d = 4usize;
    let db = 2usize;
    let elems = s4_elements();
    let table = weingarten_table(d as f64)?;

    // Kraus of E^{(x) k} embedded on the two-qubit register
    let mut kraus_k: Vec<CMatrix> = vec![CMatrix::identity(1)];
    for _ in 0..k {
        kraus_k = kraus_k
            .iter()
            .flat_map(|base| ch.kraus().iter().map(move |kk| kron(base, kk)))
            .collect();
    }
    let pad = CMatrix::identity(1 << (2 - k));
    let lam: Vec<CMatrix> = kraus_k.iter().map(|m| kron(m, &pad)).collect();

    let mut o = CMatrix::zeros(256, 256);
    for a in &lam {
        for b in &lam {
            o.add_assign_scaled(&kron(&kron(a, b), &kron(&a.dagger(), &b.dagger())), C_ONE);
        }
    }

    let t: Vec<CMatrix> = elems.iter().map(|pm| perm_rep(pm, d)).collect();
    let s13s24 = perm_rep(&PermS4::from_images([2, 3, 0, 1]), d);
    let s34_full = perm_rep(&PermS4::from_images([0, 1, 3, 2]), d);

    // swaps of the A sub-registers of two copies; every copy index splits as
    // x = a*db + b with a the A (first-qubit) digit
    let sub_swap = |c1: usize, c2: usize| -> CMatrix {
        let mut m = CMatrix::zeros(256, 256);
        for x in 0..256usize {
            let mut xs = [(x >> 6) & 3, (x >> 4) & 3, (x >> 2) & 3, x & 3];
            let (a1, b1) = (xs[c1] / db, xs[c1] % db);
            let (a2, b2) = (xs[c2] / db, xs[c2] % db);
            xs[c1] = a2 * db + b1;
            xs[c2] = a1 * db + b2;
            let y = (xs[0] << 6) | (xs[1] << 4) | (xs[2] << 2) | xs[3];
            m.set(y, x, C_ONE);
        }
        m
    };
    let sa12 = sub_swap(0, 1);
    let sa34 = sub_swap(2, 3);

    let mut avg = CMatrix::zeros(256, 256);
    for (i, ti) in t.iter().enumerate() {
        let mut b = Complex64::new(0.0, 0.0);
        for (j, tj) in t.iter().enumerate() {
            b += table.wg[i][j] * o.trace_product(tj);
        }
        avg.add_assign_scaled(ti, b);
    }
    let mut m34 = s34_full.scale(Complex64::new(db as f64, 0.0));
    m34.add_assign_scaled(&sa34, -C_ONE);
    let right = sa12.matmul(&m34);
    let g = s13s24.matmul(&avg).trace_product(&right) / Complex64::new((d * d) as f64, 0.0);
    if g.im.abs() > RESIDUE_TOL {
        return Err(Error::NumericalContract(format!(
            "dense reference imaginary residue {:.3e}",
            g.im
        )));
    }
    AotocValue::new_checked(g.re)
}

/// Monte-Carlo route: mean and standard error of the exact fixed-circuit
/// A-OTOC over n globally Haar-random scramblers.
pub fn haar_mc_average_g(
    ch: &QubitChannel,
    p: &CircuitParams,
    n: usize,
    seed: u64,
    max_l: usize,
) -> Result<AotocEstimate> {
    if n < 2 {
        return Err(Error::InvalidParam("need at least 2 samples".into()));
    }
    let layout = QubitRegisterLayout::new(p.l())?;
    let mut vals = Vec::with_capacity(n);
    for i in 0..n {
        let u = sample_haar_unitary(layout.dim(), derive_seed(seed, &[0x6C, i as u64]));
        vals.push(aotoc_exact(&Scrambler::Dense(&u), ch, p.k(), &layout, max_l)?);
    }
    let nf = n as f64;
    let mean = vals.iter().sum::<f64>() / nf;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0);
    Ok(AotocEstimate { value: mean, stderr: (var / nf).sqrt(), n_circuits: n, n_states: 0, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{channel_moments, make_depolarizing, make_rotation, QubitChannel};
    use crate::closed_form::g_finite;
    use crate::testutil::random_mixed_unitary_channel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    #[test]
    fn s4_census() {
        let elems = s4_elements();
        assert_eq!(elems.len(), 24);
        let mut census: HashMap<Vec<usize>, usize> = HashMap::new();
        for p in elems {
            *census.entry(p.cycle_type()).or_default() += 1;
        }
        assert_eq!(census[&vec![1, 1, 1, 1]], 1);
        assert_eq!(census[&vec![2, 1, 1]], 6);
        assert_eq!(census[&vec![2, 2]], 3);
        assert_eq!(census[&vec![3, 1]], 8);
        assert_eq!(census[&vec![4]], 6);
        assert_eq!(PermS4::identity().cycle_count(), 4);
    }

    #[test]
    fn s4_group_axioms() {
        let elems = s4_elements();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        use rand::Rng;
        for _ in 0..50 {
            let a = &elems[rng.gen_range(0..24)];
            let b = &elems[rng.gen_range(0..24)];
            let c = &elems[rng.gen_range(0..24)];
            assert_eq!(a.compose(b).compose(c), a.compose(&b.compose(c)));
            assert_eq!(a.compose(&a.inverse()), PermS4::identity());
        }
    }

    #[test]
    fn characters_and_orthogonality() {
        let elems = s4_elements();
        for p in elems {
            assert_eq!(s4_character(PartitionOf4::Four, p), 1);
            let sign = if p.cycle_type().iter().map(|c| c - 1).sum::<usize>() % 2 == 0 { 1 } else { -1 };
            assert_eq!(s4_character(PartitionOf4::OneOneOneOne, p), sign);
        }
        let dims: Vec<i64> = PartitionOf4::all().iter().map(|l| l.dim()).collect();
        assert_eq!(dims, vec![1, 3, 2, 3, 1]);
        assert_eq!(dims.iter().map(|d| d * d).sum::<i64>(), 24);
        for la in PartitionOf4::all() {
            for lb in PartitionOf4::all() {
                let dot: i64 =
                    elems.iter().map(|p| s4_character(la, p) * s4_character(lb, p)).sum();
                assert_eq!(dot, if la == lb { 24 } else { 0 }, "{la:?} . {lb:?}");
            }
        }
    }

    #[test]
    fn projector_traces() {
        for d in [2.0f64, 3.0, 5.0] {
            let total: f64 = PartitionOf4::all().iter().map(|l| projector_trace(*l, d)).sum();
            assert!((total - d.powi(4)).abs() < 1e-9);
        }
        assert!(projector_trace(PartitionOf4::OneOneOneOne, 2.0).abs() < 1e-12);
        assert!((projector_trace(PartitionOf4::Four, 2.0) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn weingarten_inverts_gram() {
        let table = weingarten_table(16.0).unwrap();
        for i in 0..24 {
            for j in 0..24 {
                let dot: f64 = (0..24).map(|m| table.wg[i][m] * table.gram[m][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-10, "W.G[{i}][{j}] = {dot}");
            }
        }
        assert!(weingarten_table(2.0).is_err());
    }

    #[test]
    fn weingarten_symmetric_class_function_and_character_sum() {
        let elems = s4_elements();
        for d in [4.0f64, 16.0, 64.0] {
            let table = weingarten_table(d).unwrap();
            let chars = weingarten_table_from_characters(d).unwrap();
            let mut by_class: HashMap<Vec<usize>, f64> = HashMap::new();
            for i in 0..24 {
                for j in 0..24 {
                    assert!((table.wg[i][j] - table.wg[j][i]).abs() < 1e-12 * table.wg[i][j].abs().max(1e-3));
                    assert!(
                        (table.wg[i][j] - chars[i][j]).abs() < 1e-12 * (1.0 + chars[i][j].abs()),
                        "solve vs characters at d={d}"
                    );
                    let ty = elems[i].inverse().compose(&elems[j]).cycle_type();
                    let entry = by_class.entry(ty).or_insert(table.wg[i][j]);
                    assert!((table.wg[i][j] - *entry).abs() < 1e-12 * entry.abs().max(1e-6));
                }
            }
        }
    }

    #[test]
    fn weingarten_first_moment_identity() {
        // sum_sigma W[pi][sigma] d^{c(sigma)} equals 1 on the identity row
        // and 0 elsewhere (first column of W.G)
        let table = weingarten_table(16.0).unwrap();
        let elems = s4_elements();
        let id_idx = elems.iter().position(|p| *p == PermS4::identity()).unwrap();
        for (i, _) in elems.iter().enumerate() {
            let got: f64 = (0..24).map(|j| table.wg[i][j] * table.gram[j][id_idx]).sum();
            let want = if i == id_idx { 1.0 } else { 0.0 };
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn permutation_rep_homomorphism_all_pairs() {
        let ops = four_copy_ops(&QubitChannel::identity());
        let elems = s4_elements();
        for (i, a) in elems.iter().enumerate() {
            for (j, b) in elems.iter().enumerate() {
                let prod = ops.t[i].matmul(&ops.t[j]);
                let comp = a.compose(b);
                let idx = elems.iter().position(|p| *p == comp).unwrap();
                assert!(prod.max_abs_diff(&ops.t[idx]) < 1e-12);
            }
        }
    }

    #[test]
    fn x2_identity_channel_is_identity() {
        let ops = four_copy_ops(&QubitChannel::identity());
        assert!(ops.x2.max_abs_diff(&CMatrix::identity(16)) < 1e-12);
    }

    #[test]
    fn exact_average_identity_channel_vanishes() {
        for (l, k) in [(2usize, 1usize), (4, 2), (6, 3), (12, 1)] {
            let p = CircuitParams::new(l, k).unwrap();
            let g = haar_averaged_g_exact(&QubitChannel::identity(), &p).unwrap();
            assert!(g.value().abs() < 1e-12, "L={l} k={k}");
        }
    }

    #[test]
    fn factorized_matches_dense_reference_at_l2() {
        let mut rng = ChaCha8Rng::seed_from_u64(31415);
        let mut channels: Vec<QubitChannel> = (0..3).map(|_| random_mixed_unitary_channel(&mut rng)).collect();
        channels.push(make_depolarizing(0.45).unwrap());
        channels.push(make_rotation([0.0, 0.6, 0.8], 1.1).unwrap());
        for ch in &channels {
            for k in [1usize, 2] {
                let p = CircuitParams::new(2, k).unwrap();
                let fast = haar_averaged_g_exact(ch, &p).unwrap().value();
                let dense = haar_averaged_g_dense_reference(ch, &p).unwrap().value();
                assert!((fast - dense).abs() < 1e-10, "k={k}: {fast} vs {dense}");
            }
        }
    }

    #[test]
    fn oracle_agrees_with_closed_form() {
        let cases = [
            (make_depolarizing(0.3).unwrap(), 4usize, 1usize),
            (make_rotation([0.0, 0.0, 1.0], 1.0).unwrap(), 6, 2),
            (make_rotation([0.0, 0.0, 1.0], 0.7).unwrap(), 8, 1),
        ];
        for (ch, l, k) in cases {
            let p = CircuitParams::new(l, k).unwrap();
            let lemma = g_finite(&channel_moments(&ch), &p).unwrap().value();
            let oracle = haar_averaged_g_exact(&ch, &p).unwrap().value();
            assert!((lemma - oracle).abs() < 1e-9, "L={l} k={k}: {lemma} vs {oracle}");
        }
        // pinned: rotation pi/2 at L=8
        let rot = make_rotation([0.0, 0.0, 1.0], std::f64::consts::FRAC_PI_2).unwrap();
        let g = haar_averaged_g_exact(&rot, &CircuitParams::new(8, 1).unwrap()).unwrap().value();
        assert!((g - 0.9922027567096083).abs() < 1e-9);
    }

    #[test]
    fn oracle_handles_random_channels_at_larger_l() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..3 {
            let ch = random_mixed_unitary_channel(&mut rng);
            let p = CircuitParams::new(10, 2).unwrap();
            let lemma = g_finite(&channel_moments(&ch), &p).unwrap().value();
            let oracle = haar_averaged_g_exact(&ch, &p).unwrap().value();
            assert!((lemma - oracle).abs() < 1e-9);
        }
    }

    #[test]
    fn mc_route_consistent() {
        let p = CircuitParams::new(4, 1).unwrap();
        for ch in [
            make_depolarizing(0.3).unwrap(),
            make_rotation([0.0, 0.0, 1.0], std::f64::consts::FRAC_PI_2).unwrap(),
        ] {
            let exact = haar_averaged_g_exact(&ch, &p).unwrap().value();
            let mc = haar_mc_average_g(&ch, &p, 20, 2024, 8).unwrap();
            assert!(
                (mc.value - exact).abs() < 3.0 * mc.stderr,
                "mc {} +- {} vs exact {exact}",
                mc.value,
                mc.stderr
            );
            let lemma = g_finite(&channel_moments(&ch), &p).unwrap().value();
            assert!((mc.value - lemma).abs() < 3.0 * mc.stderr);
        }
        // identity channel: every draw is exactly zero
        let est = haar_mc_average_g(&QubitChannel::identity(), &p, 5, 1, 8).unwrap();
        assert!(est.value.abs() < 1e-12 && est.stderr < 1e-12);
    }
}
