//! Canonical numerical Schur transform on `(C^d)^(x)n`.
//!
//! Construction: for each partition `lambda` build the group-algebra matrix
//! units `e^l_{t,t0} = (dimP_l/n!) sum_pi [p_l(pi)]_{t,t0} p(pi)` in the Young
//! orthogonal basis, orthonormalize the column space of `e^l_{t0,t0}` to get a
//! `Q_lambda` basis, and push it through `e^l_{t,t0}` for every standard
//! tableau `t`. The `P_lambda` register then carries exactly the Young
//! orthogonal basis, identically for every local dimension `d` — the property
//! the tester compiler relies on when it pairs `P` registers of different
//! local dimensions.

use super::young::{
    dim_sym, dim_unitary, irrep_matrix, partitions, symmetric_group, YoungDiagram,
};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::tensor::permutation_matrix;
use crate::tol;
use ndarray::{Array1, Array2};
use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// One irreducible block of the transform layout.
#[derive(Debug, Clone)]
pub struct SchurBlock {
    pub lambda: YoungDiagram,
    pub dim_p: usize,
    pub dim_q: usize,
    /// Start of the block in the Schur-ordered basis; indices inside the
    /// block are `offset + t*dim_q + q` (P-index major).
    pub offset: usize,
}

/// Unitary change of basis realizing the Schur-Weyl decomposition, plus the
/// block layout in canonical partition order.
#[derive(Debug, Clone)]
pub struct SchurTransform {
    n: usize,
    d: usize,
    unitary: CMat,
    layout: Vec<SchurBlock>,
}

/// Size caps for dense construction.
#[derive(Debug, Clone, Copy)]
pub struct SchurCaps {
    pub max_n: usize,
    pub max_dim: usize,
}

impl Default for SchurCaps {
    fn default() -> Self {
        SchurCaps {
            max_n: 4,
            max_dim: 4096,
        }
    }
}

impl SchurTransform {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// The transform unitary: `U[schur_index, computational_index]`.
    pub fn unitary(&self) -> &CMat {
        &self.unitary
    }

    pub fn layout(&self) -> &[SchurBlock] {
        &self.layout
    }

    pub fn total_dim(&self) -> usize {
        self.unitary.dim().0
    }

    pub fn block_for(&self, lambda: &YoungDiagram) -> Option<&SchurBlock> {
        self.layout.iter().find(|b| &b.lambda == lambda)
    }

    /// Conjugates an operator on the computational basis into the Schur basis.
    pub fn to_schur(&self, m: &CMat) -> CMat {
        self.unitary.dot(m).dot(&linalg::dagger(&self.unitary))
    }

    pub fn from_schur(&self, m: &CMat) -> CMat {
        linalg::dagger(&self.unitary).dot(m).dot(&self.unitary)
    }

    pub fn to_schur_vec(&self, v: &CVec) -> CVec {
        self.unitary.dot(v)
    }

    /// Extracts the diagonal block of `m_schur` for the given layout entry.
    pub fn block_of(&self, m_schur: &CMat, block: &SchurBlock) -> CMat {
        let size = block.dim_p * block.dim_q;
        m_schur
            .slice(ndarray::s![
                block.offset..block.offset + size,
                block.offset..block.offset + size
            ])
            .to_owned()
    }
}

fn build(n: usize, d: usize) -> Result<SchurTransform> {
    let total = d.pow(n as u32);
    let group = symmetric_group(n);
    let order = group.len() as f64;

    // Permutation operators p(pi) on (C^d)^(x)n.
    let dims = vec![d; n];
    let p_full: Vec<CMat> = group
        .iter()
        .map(|(perm, _)| permutation_matrix(&dims, perm))
        .collect::<Result<_>>()?;

    let parts = partitions(n, d);
    let mut layout = Vec::with_capacity(parts.len());
    let mut offset = 0usize;
    let mut basis: Vec<CVec> = Vec::with_capacity(total);

    for lambda in parts {
        let dim_p = dim_sym(&lambda);
        let dim_q = dim_unitary(&lambda, d);
        debug_assert!(dim_q > 0);
        // Irrep matrices for every group element.
        let irreps: Vec<Array2<f64>> = group
            .iter()
            .map(|(_, word)| irrep_matrix(&lambda, word))
            .collect::<Result<_>>()?;

        // e_{t,t0} = (dim_p/n!) sum_pi [p_l(pi)]_{t,t0} p(pi)
        let unit = |t: usize, t0: usize| -> CMat {
            let mut m: CMat = Array2::zeros((total, total));
            for (g, p) in p_full.iter().enumerate() {
                let w = irreps[g][(t, t0)];
                if w != 0.0 {
                    m.scaled_add(Complex64::new(w * dim_p as f64 / order, 0.0), p);
                }
            }
            m
        };

        let e00 = unit(0, 0);
        let q_basis = orthonormal_range(&e00, dim_q)?;
        for t in 0..dim_p {
            let et = unit(t, 0);
            for q in &q_basis {
                let b = et.dot(q);
                basis.push(b);
            }
        }
        layout.push(SchurBlock {
            lambda,
            dim_p,
            dim_q,
            offset,
        });
        offset += dim_p * dim_q;
    }

    if offset != total {
        return Err(Error::SchurLayout(format!(
            "block dimensions sum to {offset}, space has dimension {total}"
        )));
    }

    // U rows are the conjugated basis vectors.
    let mut unitary: CMat = Array2::zeros((total, total));
    for (row, b) in basis.iter().enumerate() {
        for col in 0..total {
            unitary[(row, col)] = b[col].conj();
        }
    }
    let dev = linalg::max_abs_diff(
        &unitary.dot(&linalg::dagger(&unitary)),
        &linalg::identity(total),
    );
    if dev > tol::SCHUR_UNITARITY {
        return Err(Error::SchurLayout(format!(
            "constructed transform deviates from unitarity by {dev:.3e}"
        )));
    }
    Ok(SchurTransform {
        n,
        d,
        unitary,
        layout,
    })
}

/// Orthonormal basis of the range of a rank-`rank` orthogonal projector, by
/// pivoted modified Gram-Schmidt over its columns (deterministic).
fn orthonormal_range(proj: &CMat, rank: usize) -> Result<Vec<CVec>> {
    let total = proj.dim().0;
    let mut residuals: Vec<CVec> = (0..total).map(|j| proj.column(j).to_owned()).collect();
    let mut picked: Vec<CVec> = Vec::with_capacity(rank);
    for _ in 0..rank {
        // Largest remaining residual (ties broken by index).
        let (best, norm) = residuals
            .iter()
            .enumerate()
            .map(|(i, r)| (i, r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()))
            .fold((0usize, -1.0f64), |acc, (i, nrm)| {
                if nrm > acc.1 {
                    (i, nrm)
                } else {
                    acc
                }
            });
        if norm < 1e-8 {
            return Err(Error::SchurLayout(format!(
                "projector rank deficient: residual {norm:.3e} while extracting basis"
            )));
        }
        let mut v = residuals[best].mapv(|z| z / norm);
        // Re-orthogonalize once for accuracy.
        for q in &picked {
            let ip: Complex64 = q.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
            v = &v - &q.mapv(|z| z * ip);
        }
        let nrm2 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let v = v.mapv(|z| z / nrm2);
        // Deflate all residuals.
        for r in residuals.iter_mut() {
            let ip: Complex64 = v.iter().zip(r.iter()).map(|(a, b)| a.conj() * b).sum();
            *r = &*r - &v.mapv(|z| z * ip);
        }
        picked.push(v);
    }
    Ok(picked)
}

fn cache() -> &'static Mutex<HashMap<(usize, usize), Arc<SchurTransform>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<SchurTransform>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Canonical Schur transform on `(C^d)^(x)n`, memoized per process.
pub fn schur_transform(n: usize, d: usize) -> Result<Arc<SchurTransform>> {
    schur_transform_with_caps(n, d, SchurCaps::default())
}

/// As [`schur_transform`], with explicit size caps. Exceeding the default
/// caps is allowed here but warns: the dense construction cost grows as
/// `n! * d^{2n}`.
pub fn schur_transform_with_caps(n: usize, d: usize, caps: SchurCaps) -> Result<Arc<SchurTransform>> {
    if n == 0 || d == 0 {
        return Err(Error::Shape("schur_transform requires n >= 1, d >= 1".into()));
    }
    let dim = d
        .checked_pow(n as u32)
        .ok_or_else(|| Error::Shape(format!("d^n overflow: d={d}, n={n}")))?;
    let defaults = SchurCaps::default();
    if n > defaults.max_n || dim > defaults.max_dim {
        if n > caps.max_n || dim > caps.max_dim {
            return Err(Error::SchurCap {
                n,
                dim,
                max_n: caps.max_n,
                max_dim: caps.max_dim,
            });
        }
        eprintln!(
            "warning: schur_transform(n={n}, d={d}) exceeds default caps (n<=4, d^n<=4096); dense construction may be slow"
        );
    }
    if let Some(t) = cache().lock().unwrap().get(&(n, d)) {
        return Ok(t.clone());
    }
    let t = Arc::new(build(n, d)?);
    cache().lock().unwrap().insert((n, d), t.clone());
    Ok(t)
}

/// `|I_{P_lambda}>> = sum_t |t>|t>` pairing the standard-tableaux bases of two
/// `P_lambda` registers (unnormalized; squared norm = dim P_lambda).
pub fn max_entangled_p(dim_p: usize) -> CVec {
    let mut v: CVec = Array1::zeros(dim_p * dim_p);
    for t in 0..dim_p {
        v[t * dim_p + t] = Complex64::ONE;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{haar_unitary, identity, kron_mat, max_abs_diff};
    use crate::rng;

    fn kron_power(u: &CMat, n: usize) -> CMat {
        let mut out = u.clone();
        for _ in 1..n {
            out = kron_mat(&out, u);
        }
        out
    }

    #[test]
    fn layout_small_cases() {
        let t = schur_transform(2, 2).unwrap();
        let shapes: Vec<(String, usize, usize)> = t
            .layout()
            .iter()
            .map(|b| (b.lambda.to_string(), b.dim_p, b.dim_q))
            .collect();
        assert_eq!(
            shapes,
            vec![("(2)".into(), 1, 3), ("(1,1)".into(), 1, 1)]
        );
        let t = schur_transform(3, 2).unwrap();
        let shapes: Vec<(String, usize, usize)> = t
            .layout()
            .iter()
            .map(|b| (b.lambda.to_string(), b.dim_p, b.dim_q))
            .collect();
        assert_eq!(
            shapes,
            vec![("(3)".into(), 1, 4), ("(2,1)".into(), 2, 2)]
        );
        assert_eq!(
            t.layout().iter().map(|b| b.dim_p * b.dim_q).sum::<usize>(),
            8
        );
    }

    #[test]
    fn transform_is_unitary() {
        for (n, d) in [(1, 2), (2, 2), (2, 3), (3, 2)] {
            let t = schur_transform(n, d).unwrap();
            let u = t.unitary();
            let dev = max_abs_diff(&u.dot(&linalg::dagger(u)), &identity(t.total_dim()));
            assert!(dev < 1e-10, "n={n} d={d}: {dev:.3e}");
        }
    }

    #[test]
    fn permutations_block_diagonalize_to_young_orthogonal() {
        // Conjugated p(pi) = direct sum of p_lambda(pi) (x) I_Q, with the
        // P factor exactly the Young orthogonal matrices.
        for (n, d) in [(2, 2), (3, 2), (3, 3)] {
            let t = schur_transform(n, d).unwrap();
            let group = symmetric_group(n);
            for (perm, word) in &group {
                let p = permutation_matrix(&vec![d; n], perm).unwrap();
                let conj = t.to_schur(&p);
                let mut expected: CMat = Array2::zeros(conj.dim());
                for b in t.layout() {
                    let ir = irrep_matrix(&b.lambda, word).unwrap();
                    let ir_c = ir.mapv(|x| Complex64::new(x, 0.0));
                    let blk = kron_mat(&ir_c, &identity(b.dim_q));
                    let size = b.dim_p * b.dim_q;
                    expected
                        .slice_mut(ndarray::s![
                            b.offset..b.offset + size,
                            b.offset..b.offset + size
                        ])
                        .assign(&blk);
                }
                let dev = max_abs_diff(&conj, &expected);
                assert!(dev < 1e-10, "n={n} d={d} perm={perm:?}: {dev:.3e}");
            }
        }
    }

    #[test]
    fn tensor_power_unitaries_block_diagonalize() {
        // Conjugated U^(x)n = direct sum of I_P (x) q_lambda(U).
        let mut rng = rng::master(70);
        for (n, d) in [(2, 2), (3, 2), (2, 3)] {
            let t = schur_transform(n, d).unwrap();
            for _ in 0..5 {
                let u = haar_unitary(d, &mut rng).unwrap();
                let un = kron_power(&u, n);
                let conj = t.to_schur(&un);
                for b in t.layout() {
                    let blk = t.block_of(&conj, b);
                    // Expected form I_P (x) q: extract q from the first P slot
                    // and compare all others.
                    let q0 = blk
                        .slice(ndarray::s![0..b.dim_q, 0..b.dim_q])
                        .to_owned();
                    let expect = kron_mat(&identity(b.dim_p), &q0);
                    let dev = max_abs_diff(&blk, &expect);
                    assert!(dev < 1e-10, "n={n} d={d} lambda={}: {dev:.3e}", b.lambda);
                }
                // Off-diagonal blocks must vanish.
                let mut rebuilt: CMat = Array2::zeros(conj.dim());
                for b in t.layout() {
                    let size = b.dim_p * b.dim_q;
                    rebuilt
                        .slice_mut(ndarray::s![
                            b.offset..b.offset + size,
                            b.offset..b.offset + size
                        ])
                        .assign(&t.block_of(&conj, b));
                }
                assert!(max_abs_diff(&conj, &rebuilt) < 1e-10);
            }
        }
    }

    #[test]
    fn p_basis_identical_across_local_dimension() {
        // For fixed lambda and n, the P-register matrices extracted from
        // transforms at different d agree entrywise.
        let n = 3;
        let group = symmetric_group(n);
        let t2 = schur_transform(n, 2).unwrap();
        let t3 = schur_transform(n, 3).unwrap();
        let t4 = schur_transform(n, 4).unwrap();
        for (perm, _) in &group {
            for (ta, tb) in [(&t2, &t3), (&t2, &t4), (&t3, &t4)] {
                for ba in ta.layout() {
                    let Some(bb) = tb.block_for(&ba.lambda) else {
                        continue;
                    };
                    let pa = permutation_matrix(&vec![ta.d(); n], perm).unwrap();
                    let pb = permutation_matrix(&vec![tb.d(); n], perm).unwrap();
                    let ca = ta.to_schur(&pa);
                    let cb = tb.to_schur(&pb);
                    // P-matrix entries by averaging over the Q diagonal.
                    let extract = |c: &CMat, b: &SchurBlock| -> CMat {
                        let mut m: CMat = Array2::zeros((b.dim_p, b.dim_p));
                        for t in 0..b.dim_p {
                            for t2 in 0..b.dim_p {
                                let mut acc = Complex64::ZERO;
                                for q in 0..b.dim_q {
                                    acc += c[(
                                        b.offset + t * b.dim_q + q,
                                        b.offset + t2 * b.dim_q + q,
                                    )];
                                }
                                m[(t, t2)] = acc / b.dim_q as f64;
                            }
                        }
                        m
                    };
                    let ma = extract(&ca, ba);
                    let mb = extract(&cb, bb);
                    let dev = max_abs_diff(&ma, &mb);
                    assert!(
                        dev < 1e-10,
                        "lambda={} d={}/{}: {dev:.3e}",
                        ba.lambda,
                        ta.d(),
                        tb.d()
                    );
                }
            }
        }
    }

    #[test]
    fn n_equals_one_is_trivial() {
        let t = schur_transform(1, 3).unwrap();
        assert_eq!(t.layout().len(), 1);
        assert_eq!(t.layout()[0].dim_p, 1);
        assert_eq!(t.layout()[0].dim_q, 3);
    }

    #[test]
    fn d_equals_one_is_trivial() {
        let t = schur_transform(3, 1).unwrap();
        assert_eq!(t.layout().len(), 1);
        assert_eq!(t.total_dim(), 1);
    }

    #[test]
    fn caps_enforced() {
        let r = schur_transform(5, 2);
        assert!(matches!(r, Err(Error::SchurCap { .. })));
        let r = schur_transform(4, 9); // 9^4 = 6561 > 4096
        assert!(matches!(r, Err(Error::SchurCap { .. })));
    }

    #[test]
    fn max_entangled_p_properties() {
        let v = max_entangled_p(2);
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        assert!((norm2 - 2.0).abs() < 1e-15);
        let v1 = max_entangled_p(1);
        assert_eq!(v1.len(), 1);
        assert!((v1[0] - Complex64::ONE).norm() < 1e-15);
        // Invariance under p (x) p for real orthogonal p: lambda=(2,1), n=3.
        let lam = YoungDiagram::new(vec![2, 1]).unwrap();
        let group = symmetric_group(3);
        let v = max_entangled_p(2);
        for (_, word) in &group {
            let p = irrep_matrix(&lam, word).unwrap();
            let pc = p.mapv(|x| Complex64::new(x, 0.0));
            let pp = kron_mat(&pc, &pc);
            let w = pp.dot(&v);
            let dev: f64 = w
                .iter()
                .zip(v.iter())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(dev < 1e-12);
        }
    }
}
