//! Channel representations: Kraus lists, Choi operators, Stinespring
//! dilations, contraction, and Haar-random dilation sampling.
//!
//! Conventions fixed repo-wide: the Choi operator lives on the (out, in)
//! system pair, `C = sum_i vec(E_i) vec(E_i)^dag`; a dilation isometry has the
//! ancilla as its *first* output tensor factor, `V = sum_i |i>_anc (x) E_i`.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::rng::Rng;
use crate::tensor::{self, LabeledOperator, System};
use crate::tol;
use num_complex::Complex64;

/// Completely positive trace-preserving map given by Kraus operators.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    kraus: Vec<CMat>,
    d_in: usize,
    d_out: usize,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<CMat>, d_in: usize, d_out: usize) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidChannel("no Kraus operators".into()));
        }
        for e in &kraus {
            if e.dim() != (d_out, d_in) {
                return Err(Error::InvalidChannel(format!(
                    "Kraus operator is {}x{}, expected {}x{}",
                    e.dim().0,
                    e.dim().1,
                    d_out,
                    d_in
                )));
            }
        }
        let mut sum: CMat = ndarray::Array2::zeros((d_in, d_in));
        for e in &kraus {
            sum += &linalg::dagger(e).dot(e);
        }
        let dev = linalg::max_abs_diff(&sum, &linalg::identity(d_in));
        if dev > tol::KRAUS_COMPLETENESS {
            return Err(Error::InvalidChannel(format!(
                "sum E_i^dag E_i deviates from identity by {dev:.3e}"
            )));
        }
        Ok(QuantumChannel { kraus, d_in, d_out })
    }

    /// Identity channel on `C^d`.
    pub fn identity(d: usize) -> Self {
        QuantumChannel {
            kraus: vec![linalg::identity(d)],
            d_in: d,
            d_out: d,
        }
    }

    /// Unitary (or isometry) conjugation channel.
    pub fn from_isometry(v: &Isometry) -> Self {
        QuantumChannel {
            kraus: vec![v.mat().clone()],
            d_in: v.d_in(),
            d_out: v.d_out(),
        }
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    /// Number of stored Kraus operators (an upper bound on the Kraus rank).
    pub fn kraus_len(&self) -> usize {
        self.kraus.len()
    }

    /// Kraus rank = rank of the Choi operator.
    pub fn kraus_rank(&self) -> Result<usize> {
        let c = choi_from_kraus(self)?;
        let (vals, _) = linalg::eigh(c.op().mat())?;
        Ok(vals.iter().filter(|&&x| x > tol::CHOI_RANK_CUT).count())
    }

    /// Applies the channel to a density matrix.
    pub fn apply(&self, rho: &CMat) -> Result<CMat> {
        if rho.dim() != (self.d_in, self.d_in) {
            return Err(Error::Shape(format!(
                "state is {}x{}, channel input dim {}",
                rho.dim().0,
                rho.dim().1,
                self.d_in
            )));
        }
        let mut out: CMat = ndarray::Array2::zeros((self.d_out, self.d_out));
        for e in &self.kraus {
            out += &e.dot(rho).dot(&linalg::dagger(e));
        }
        Ok(out)
    }
}

/// Isometry `V: C^{d1} -> C^{d2}`, `V^dag V = I`.
#[derive(Debug, Clone)]
pub struct Isometry {
    mat: CMat,
}

impl Isometry {
    pub fn new(mat: CMat) -> Result<Self> {
        let (d2, d1) = mat.dim();
        if d1 > d2 {
            return Err(Error::InvalidIsometry(format!(
                "input dim {d1} exceeds output dim {d2}"
            )));
        }
        let dev = linalg::max_abs_diff(&linalg::dagger(&mat).dot(&mat), &linalg::identity(d1));
        if dev > tol::ISOMETRY {
            return Err(Error::InvalidIsometry(format!(
                "V^dag V deviates from identity by {dev:.3e}"
            )));
        }
        Ok(Isometry { mat })
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn d_in(&self) -> usize {
        self.mat.dim().1
    }

    pub fn d_out(&self) -> usize {
        self.mat.dim().0
    }
}

/// Choi operator on the labeled (out, in) pair.
#[derive(Debug, Clone)]
pub struct ChoiOperator {
    op: LabeledOperator,
    d_in: usize,
    d_out: usize,
}

impl ChoiOperator {
    /// Wraps a labeled operator as a Choi operator, checking PSD and trace
    /// preservation.
    pub fn new(op: LabeledOperator, d_out: usize, d_in: usize) -> Result<Self> {
        let min = linalg::min_eig(op.mat())?;
        if min < tol::CHOI_PSD_REJECT {
            return Err(Error::InvalidChoi(format!("min eigenvalue {min:.3e}")));
        }
        let out_label = op.rows()[0].label.clone();
        let marginal = op.partial_trace(&[&out_label])?;
        let dev = linalg::max_abs_diff(marginal.mat(), &linalg::identity(d_in));
        if dev > 1e-8 {
            return Err(Error::InvalidChoi(format!(
                "partial trace over output deviates from identity by {dev:.3e}"
            )));
        }
        Ok(ChoiOperator { op, d_in, d_out })
    }

    pub fn op(&self) -> &LabeledOperator {
        &self.op
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    /// The underlying operator with custom (out, in) labels.
    pub fn relabeled(&self, out: &str, input: &str) -> Result<LabeledOperator> {
        self.op.relabel(&[("out", out), ("in", input)])
    }
}

/// `C = sum_i vec(E_i) vec(E_i)^dag` on systems ("out", "in").
pub fn choi_from_kraus(ch: &QuantumChannel) -> Result<ChoiOperator> {
    let d = ch.d_out() * ch.d_in();
    let mut mat: CMat = ndarray::Array2::zeros((d, d));
    for e in ch.kraus() {
        let v = tensor::vec_flatten(e);
        mat += &linalg::outer(&v, &v);
    }
    let op = LabeledOperator::square(
        mat,
        vec![
            System::new("out", ch.d_out()),
            System::new("in", ch.d_in()),
        ],
    )?;
    ChoiOperator::new(op, ch.d_out(), ch.d_in())
}

/// Orthogonal Kraus operators from the eigendecomposition of a Choi operator.
pub fn kraus_from_choi(c: &ChoiOperator) -> Result<QuantumChannel> {
    let (vals, vecs) = linalg::eigh(c.op().mat())?;
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < tol::CHOI_PSD_REJECT {
        return Err(Error::InvalidChoi(format!("min eigenvalue {min:.3e}")));
    }
    let mut kraus = Vec::new();
    for (k, &lam) in vals.iter().enumerate() {
        if lam > tol::CHOI_RANK_CUT {
            let col = vecs.column(k).mapv(|z| z * lam.sqrt());
            kraus.push(tensor::unvec(&col.to_owned(), c.d_out(), c.d_in())?);
        }
    }
    QuantumChannel::new(kraus, c.d_in(), c.d_out())
}

/// Stinespring dilation `V = sum_i |i>_anc (x) E_i`, ancilla first.
pub fn stinespring_dilate(ch: &QuantumChannel) -> Result<Isometry> {
    let r = ch.kraus_len();
    let (d1, d2) = (ch.d_in(), ch.d_out());
    let mut v: CMat = ndarray::Array2::zeros((r * d2, d1));
    for (i, e) in ch.kraus().iter().enumerate() {
        for a in 0..d2 {
            for b in 0..d1 {
                v[(i * d2 + a, b)] = e[(a, b)];
            }
        }
    }
    Isometry::new(v)
}

/// Channel obtained by tracing out the leading ancilla factor of dimension
/// `anc_dim`; the Kraus operators are the ancilla blocks of `V`.
pub fn contract(v: &Isometry, anc_dim: usize) -> Result<QuantumChannel> {
    let (rows, d1) = v.mat().dim();
    if rows % anc_dim != 0 {
        return Err(Error::Shape(format!(
            "output dim {rows} not divisible by ancilla dim {anc_dim}"
        )));
    }
    let d2 = rows / anc_dim;
    let mut kraus = Vec::with_capacity(anc_dim);
    for i in 0..anc_dim {
        let mut e: CMat = ndarray::Array2::zeros((d2, d1));
        for a in 0..d2 {
            for b in 0..d1 {
                e[(a, b)] = v.mat()[(i * d2 + a, b)];
            }
        }
        kraus.push(e);
    }
    QuantumChannel::new(kraus, d1, d2)
}

/// Haar-random dilation of `ch` with ancilla dimension `r`:
/// `(U (x) I_{d2}) V_0` for Haar `U` and a fixed dilation `V_0` (zero-padded
/// when the Kraus rank is below `r`).
pub fn sample_random_dilation(ch: &QuantumChannel, r: usize, rng: &mut Rng) -> Result<Isometry> {
    let v0 = fixed_dilation(ch, r)?;
    let u = linalg::haar_unitary(r, rng)?;
    let big = linalg::kron_mat(&u, &linalg::identity(ch.d_out()));
    Isometry::new(big.dot(v0.mat()))
}

/// Deterministic base dilation with ancilla dimension `r` (zero Kraus blocks
/// appended when the channel has fewer than `r` Kraus operators).
pub fn fixed_dilation(ch: &QuantumChannel, r: usize) -> Result<Isometry> {
    let mut kraus = ch.kraus().to_vec();
    if kraus.len() > r {
        // Re-extract orthogonal Kraus operators; the rank may still be <= r.
        let reduced = kraus_from_choi(&choi_from_kraus(ch)?)?;
        kraus = reduced.kraus().to_vec();
        if kraus.len() > r {
            return Err(Error::InvalidChannel(format!(
                "Kraus rank {} exceeds ancilla dimension {r}",
                kraus.len()
            )));
        }
    }
    while kraus.len() < r {
        kraus.push(ndarray::Array2::zeros((ch.d_out(), ch.d_in())));
    }
    let (d1, d2) = (ch.d_in(), ch.d_out());
    let mut v: CMat = ndarray::Array2::zeros((r * d2, d1));
    for (i, e) in kraus.iter().enumerate() {
        for a in 0..d2 {
            for b in 0..d1 {
                v[(i * d2 + a, b)] = e[(a, b)];
            }
        }
    }
    Isometry::new(v)
}

/// Haar-random isometry: first `d1` columns of a Haar unitary on `C^{d2}`.
pub fn random_isometry(d1: usize, d2: usize, rng: &mut Rng) -> Result<Isometry> {
    if d1 > d2 {
        return Err(Error::InvalidIsometry(format!("d1={d1} > d2={d2}")));
    }
    let u = linalg::haar_unitary(d2, rng)?;
    let v = u.slice(ndarray::s![.., 0..d1]).to_owned();
    Isometry::new(v)
}

/// Random channel in QChan^r_{d1,d2}: contraction of a Haar-random isometry
/// into `C^r (x) C^{d2}`.
pub fn random_channel(d1: usize, d2: usize, r: usize, rng: &mut Rng) -> Result<QuantumChannel> {
    let v = random_isometry(d1, r * d2, rng)?;
    contract(&v, r)
}

/// Random density matrix (normalized Ginibre square).
pub fn random_density(d: usize, rng: &mut Rng) -> CMat {
    let g = linalg::ginibre(d, d, rng);
    let p = g.dot(&linalg::dagger(&g));
    let tr: Complex64 = p.diag().iter().sum();
    p.mapv(|z| z / tr.re)
}

// --- JSON serialization -----------------------------------------------------
//
// Format: {"d_in":INT,"d_out":INT,"kraus":[MATRIX,...]} where MATRIX is a list
// of rows and each entry is [re,im]. Numbers are written with 17 significant
// digits, which round-trips f64 exactly.

fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

/// Serializes a channel to the repo-wide JSON format.
pub fn channel_to_json(ch: &QuantumChannel) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "{{\"d_in\":{},\"d_out\":{},\"kraus\":[",
        ch.d_in(),
        ch.d_out()
    ));
    for (ki, e) in ch.kraus().iter().enumerate() {
        if ki > 0 {
            s.push(',');
        }
        s.push('[');
        for i in 0..e.dim().0 {
            if i > 0 {
                s.push(',');
            }
            s.push('[');
            for j in 0..e.dim().1 {
                if j > 0 {
                    s.push(',');
                }
                let z = e[(i, j)];
                s.push_str(&format!("[{},{}]", fmt_f64(z.re), fmt_f64(z.im)));
            }
            s.push(']');
        }
        s.push(']');
    }
    s.push_str("]}");
    s
}

#[derive(serde::Deserialize)]
struct ChannelJson {
    d_in: usize,
    d_out: usize,
    kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

/// Parses the repo-wide channel JSON format.
pub fn channel_from_json(s: &str) -> Result<QuantumChannel> {
    let parsed: ChannelJson =
        serde_json::from_str(s).map_err(|e| Error::ChannelJson(e.to_string()))?;
    let mut kraus = Vec::with_capacity(parsed.kraus.len());
    for m in &parsed.kraus {
        if m.len() != parsed.d_out {
            return Err(Error::ChannelJson(format!(
                "matrix has {} rows, expected {}",
                m.len(),
                parsed.d_out
            )));
        }
        let mut e: CMat = ndarray::Array2::zeros((parsed.d_out, parsed.d_in));
        for (i, row) in m.iter().enumerate() {
            if row.len() != parsed.d_in {
                return Err(Error::ChannelJson(format!(
                    "row has {} entries, expected {}",
                    row.len(),
                    parsed.d_in
                )));
            }
            for (j, &[re, im]) in row.iter().enumerate() {
                e[(i, j)] = Complex64::new(re, im);
            }
        }
        kraus.push(e);
    }
    QuantumChannel::new(kraus, parsed.d_in, parsed.d_out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, dagger, identity, max_abs, max_abs_diff};
    use crate::rng;
    use crate::tensor::vec_flatten;

    fn pauli() -> [CMat; 4] {
        let i = identity(2);
        let x = ndarray::array![[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]];
        let y = ndarray::array![[c(0., 0.), c(0., -1.)], [c(0., 1.), c(0., 0.)]];
        let z = ndarray::array![[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]];
        [i, x, y, z]
    }

    #[test]
    fn choi_of_identity_channel() {
        let ch = QuantumChannel::identity(2);
        let choi = choi_from_kraus(&ch).unwrap();
        let v = vec_flatten(&identity(2));
        let expect = linalg::outer(&v, &v);
        assert!(max_abs_diff(choi.op().mat(), &expect) < 1e-15);
        assert!((choi.op().trace().re - 2.0).abs() < 1e-12);
        assert_eq!(kraus_from_choi(&choi).unwrap().kraus_len(), 1);
    }

    #[test]
    fn choi_of_depolarizing_is_maximally_mixed() {
        let kraus = pauli().map(|p| p.mapv(|z| z * 0.5)).to_vec();
        let ch = QuantumChannel::new(kraus, 2, 2).unwrap();
        let choi = choi_from_kraus(&ch).unwrap();
        let expect = identity(4).mapv(|z| z * 0.5);
        assert!(max_abs_diff(choi.op().mat(), &expect) < 1e-12);
        let back = kraus_from_choi(&choi).unwrap();
        assert_eq!(back.kraus_len(), 4);
        for e in back.kraus() {
            let n: f64 = e.iter().map(|z| z.norm_sqr()).sum();
            assert!((n - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn random_channel_choi_is_trace_preserving() {
        let mut rng = rng::master(31);
        for (d1, d2, r) in [(2, 2, 2), (3, 2, 2), (2, 3, 4)] {
            let ch = random_channel(d1, d2, r, &mut rng).unwrap();
            let choi = choi_from_kraus(&ch).unwrap();
            let marg = choi.op().partial_trace(&["out"]).unwrap();
            assert!(max_abs_diff(marg.mat(), &identity(d1)) < 1e-10);
        }
    }

    #[test]
    fn choi_kraus_round_trip() {
        let mut rng = rng::master(32);
        for _ in 0..5 {
            let ch = random_channel(2, 2, 3, &mut rng).unwrap();
            let choi = choi_from_kraus(&ch).unwrap();
            let back = kraus_from_choi(&choi).unwrap();
            let choi2 = choi_from_kraus(&back).unwrap();
            assert!(max_abs_diff(choi.op().mat(), choi2.op().mat()) < 1e-9);
            // Orthogonality of extracted Kraus operators.
            for (i, a) in back.kraus().iter().enumerate() {
                for (j, b) in back.kraus().iter().enumerate() {
                    if i != j {
                        let ip: Complex64 = dagger(a).dot(b).diag().iter().sum();
                        assert!(ip.norm() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn dilation_contract_round_trip() {
        let mut rng = rng::master(33);
        let ch = random_channel(2, 2, 2, &mut rng).unwrap();
        let v = stinespring_dilate(&ch).unwrap();
        assert!(max_abs_diff(&dagger(v.mat()).dot(v.mat()), &identity(2)) < 1e-12);
        let back = contract(&v, ch.kraus_len()).unwrap();
        let c1 = choi_from_kraus(&ch).unwrap();
        let c2 = choi_from_kraus(&back).unwrap();
        assert!(max_abs_diff(c1.op().mat(), c2.op().mat()) < 1e-10);
    }

    #[test]
    fn dilation_of_identity_is_ket0_tensor_identity() {
        let ch = QuantumChannel::identity(3);
        let v = stinespring_dilate(&ch).unwrap();
        assert_eq!(v.mat().dim(), (3, 3));
        assert!(max_abs_diff(v.mat(), &identity(3)) < 1e-15);
    }

    #[test]
    fn contract_choi_is_partial_trace_of_dilation_projector() {
        // Choi of Contract(V) = tr_anc |V>><<V| , both sides computed
        // independently.
        let mut rng = rng::master(34);
        let v = random_isometry(2, 4, &mut rng).unwrap();
        let ch = contract(&v, 2).unwrap();
        let lhs = choi_from_kraus(&ch).unwrap();
        let vv = vec_flatten(v.mat());
        let proj = linalg::outer(&vv, &vv);
        let lop = LabeledOperator::square(
            proj,
            vec![
                System::new("anc", 2),
                System::new("out", 2),
                System::new("in", 2),
            ],
        )
        .unwrap();
        let rhs = lop.partial_trace(&["anc"]).unwrap();
        assert!(max_abs_diff(lhs.op().mat(), rhs.mat()) < 1e-12);
    }

    #[test]
    fn sample_dilation_marginal_matches_choi() {
        let mut rng = rng::master(35);
        let ch = random_channel(2, 2, 2, &mut rng).unwrap();
        for _ in 0..5 {
            let w = sample_random_dilation(&ch, 2, &mut rng).unwrap();
            let back = contract(&w, 2).unwrap();
            let c1 = choi_from_kraus(&ch).unwrap();
            let c2 = choi_from_kraus(&back).unwrap();
            assert!(max_abs_diff(c1.op().mat(), c2.op().mat()) < 1e-10);
        }
    }

    #[test]
    fn sample_dilation_deterministic_under_seed() {
        let ch = QuantumChannel::identity(2);
        let mut r1 = rng::master(99);
        let mut r2 = rng::master(99);
        let a = sample_random_dilation(&ch, 2, &mut r1).unwrap();
        let b = sample_random_dilation(&ch, 2, &mut r2).unwrap();
        assert!(max_abs_diff(a.mat(), b.mat()) == 0.0);
    }

    #[test]
    fn dilation_mc_mean_reproduces_choi() {
        // mean over samples of tr_anc |W>><<W| -> C within 5 stderr.
        let mut rng = rng::master(36);
        let ch = random_channel(2, 2, 2, &mut rng).unwrap();
        let target = choi_from_kraus(&ch).unwrap();
        let samples = 5000;
        let mut mean: CMat = ndarray::Array2::zeros((4, 4));
        let mut m2 = ndarray::Array2::<f64>::zeros((4, 4));
        for k in 0..samples {
            let w = sample_random_dilation(&ch, 2, &mut rng).unwrap();
            let vv = vec_flatten(w.mat());
            let proj = linalg::outer(&vv, &vv);
            let lop = LabeledOperator::square(
                proj,
                vec![
                    System::new("anc", 2),
                    System::new("out", 2),
                    System::new("in", 2),
                ],
            )
            .unwrap();
            let red = lop.partial_trace(&["anc"]).unwrap();
            let x = red.mat();
            // Welford over complex entries (re and im jointly via norm_sqr).
            let kf = (k + 1) as f64;
            for i in 0..4 {
                for j in 0..4 {
                    let delta = x[(i, j)] - mean[(i, j)];
                    mean[(i, j)] += delta / kf;
                    let delta2 = x[(i, j)] - mean[(i, j)];
                    m2[(i, j)] += (delta.conj() * delta2).re;
                }
            }
        }
        for i in 0..4 {
            for j in 0..4 {
                let stderr = (m2[(i, j)] / (samples as f64 - 1.0) / samples as f64)
                    .sqrt()
                    .max(1e-12);
                let dev = (mean[(i, j)] - target.op().mat()[(i, j)]).norm();
                assert!(dev <= 5.0 * stderr, "entry ({i},{j}): dev {dev:.2e} stderr {stderr:.2e}");
            }
        }
    }

    #[test]
    fn dilation_unitary_freedom() {
        // Two random dilations differ by a unitary on the ancilla: solve the
        // least-squares intertwiner and check the residual.
        let mut rng = rng::master(37);
        let ch = random_channel(2, 2, 2, &mut rng).unwrap();
        let v1 = sample_random_dilation(&ch, 2, &mut rng).unwrap();
        let v2 = sample_random_dilation(&ch, 2, &mut rng).unwrap();
        // V2 = (U (x) I) V1. Write both as anc-blocks: E2_i = sum_j U_ij E1_j.
        // Flatten to the linear system M U_vec = b over the 2x2 ancilla blocks.
        let c1 = contract(&v1, 2).unwrap();
        let c2 = contract(&v2, 2).unwrap();
        // Gram matrix in the block basis: G_jk = <E1_j, E1_k>.
        let mut g: CMat = ndarray::Array2::zeros((2, 2));
        let mut b: CMat = ndarray::Array2::zeros((2, 2));
        for j in 0..2 {
            for k in 0..2 {
                g[(j, k)] = dagger(&c1.kraus()[j])
                    .dot(&c1.kraus()[k])
                    .diag()
                    .iter()
                    .sum();
                b[(j, k)] = dagger(&c1.kraus()[j])
                    .dot(&c2.kraus()[k])
                    .diag()
                    .iter()
                    .sum();
            }
        }
        // U^T = G^{-1} B  (normal equations; G is PSD and full rank here).
        let ginv = linalg::pinv(&g, 1e-12).unwrap();
        let ut = ginv.dot(&b);
        let u = linalg::transpose(&ut);
        // Residual of V2 - (U (x) I) V1.
        let big = linalg::kron_mat(&u, &identity(2));
        let resid = max_abs_diff(v2.mat(), &big.dot(v1.mat()));
        assert!(resid < 1e-8, "residual {resid:.3e}");
        // And U is unitary.
        assert!(max_abs_diff(&dagger(&u).dot(&u), &identity(2)) < 1e-8);
    }

    #[test]
    fn apply_preserves_trace_and_identity() {
        let mut rng = rng::master(38);
        let ch = random_channel(3, 2, 2, &mut rng).unwrap();
        let rho = random_density(3, &mut rng);
        let out = ch.apply(&rho).unwrap();
        let tr: Complex64 = out.diag().iter().sum();
        assert!((tr.re - 1.0).abs() < 1e-12);
        assert!(tr.im.abs() < 1e-12);
        let id = QuantumChannel::identity(3);
        let same = id.apply(&rho).unwrap();
        assert!(max_abs_diff(&same, &rho) < 1e-15);
    }

    #[test]
    fn r1_dilation_is_base_dilation_up_to_phase() {
        let mut rng = rng::master(39);
        let ch = random_channel(2, 3, 1, &mut rng).unwrap();
        let v0 = fixed_dilation(&ch, 1).unwrap();
        let w = sample_random_dilation(&ch, 1, &mut rng).unwrap();
        // w = phase * v0
        let mut phase = None;
        for (a, b) in w.mat().iter().zip(v0.mat().iter()) {
            if b.norm() > 1e-9 {
                phase = Some(a / b);
                break;
            }
        }
        let phase = phase.unwrap();
        assert!((phase.norm() - 1.0).abs() < 1e-10);
        let scaled = v0.mat().mapv(|z| z * phase);
        assert!(max_abs_diff(w.mat(), &scaled) < 1e-10);
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let mut rng = rng::master(40);
        let ch = random_channel(2, 2, 2, &mut rng).unwrap();
        let s1 = channel_to_json(&ch);
        let back = channel_from_json(&s1).unwrap();
        for (a, b) in ch.kraus().iter().zip(back.kraus().iter()) {
            for (x, y) in a.iter().zip(b.iter()) {
                assert_eq!(x.re.to_bits(), y.re.to_bits());
                assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
        let s2 = channel_to_json(&back);
        assert_eq!(s1, s2);
    }

    #[test]
    fn json_rejects_malformed() {
        assert!(channel_from_json("{\"d_in\":2}").is_err());
        assert!(channel_from_json("not json").is_err());
    }

    #[test]
    fn amplitude_damping_like_dilation() {
        // r=2 channel: 4x2 isometry with V^dag V = I to 1e-12.
        let p: f64 = 0.3;
        let e0 = ndarray::array![
            [c(1., 0.), c(0., 0.)],
            [c(0., 0.), c((1.0 - p).sqrt(), 0.)]
        ];
        let e1 = ndarray::array![[c(0., 0.), c(p.sqrt(), 0.)], [c(0., 0.), c(0., 0.)]];
        let ch = QuantumChannel::new(vec![e0, e1], 2, 2).unwrap();
        let v = stinespring_dilate(&ch).unwrap();
        assert_eq!(v.mat().dim(), (4, 2));
        assert!(max_abs_diff(&dagger(v.mat()).dot(v.mat()), &identity(2)) < 1e-12);
        assert!(max_abs(v.mat()) <= 1.0 + 1e-12);
    }
}
