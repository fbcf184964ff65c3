//! Decomposition of `psi^(x)n` for bipartite `psi`: with the A factors grouped
//! before the B factors,
//! `psi^(x)n = (+)_{lambda |-_s n} |I_{P_lambda}>> (x) |psi_lambda>`,
//! `s = min(d1, d2)`, with `|psi_lambda>` in `Q^{d1}_lambda (x) Q^{d2}_lambda`
//! and the `P` registers paired in the Young orthogonal basis.

use super::transform::{max_entangled_p, schur_transform};
use super::young::{partitions, YoungDiagram};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::tensor::permute_tensor_factors;
use crate::tol;
use ndarray::{Array1, Array2};
use num_complex::Complex64;

/// One component of the decomposition.
#[derive(Debug, Clone)]
pub struct PowerComponent {
    pub lambda: YoungDiagram,
    pub dim_p: usize,
    pub dim_q1: usize,
    pub dim_q2: usize,
    /// `psi_lambda`, flattened row-major over (Q1, Q2).
    pub component: CVec,
}

impl PowerComponent {
    /// `psi_lambda` reshaped to a (dim Q1) x (dim Q2) matrix.
    pub fn as_matrix(&self) -> CMat {
        let mut m = Array2::zeros((self.dim_q1, self.dim_q2));
        for i in 0..self.dim_q1 {
            for j in 0..self.dim_q2 {
                m[(i, j)] = self.component[i * self.dim_q2 + j];
            }
        }
        m
    }

    /// `tr_{Q2}(|psi_lambda><psi_lambda|)` as an operator on Q1.
    pub fn trace_out_q2(&self) -> CMat {
        let m = self.as_matrix();
        m.dot(&linalg::dagger(&m))
    }
}

#[derive(Debug, Clone)]
pub struct PowerDecomposition {
    pub components: Vec<PowerComponent>,
    pub residual: f64,
}

impl PowerDecomposition {
    pub fn component_for(&self, lambda: &YoungDiagram) -> Option<&PowerComponent> {
        self.components.iter().find(|c| &c.lambda == lambda)
    }
}

fn vec_kron(a: &CVec, b: &CVec) -> CVec {
    let mut out = Array1::zeros(a.len() * b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            out[i * b.len() + j] = a[i] * b[j];
        }
    }
    out
}

/// Decomposes `psi^(x)n` for `psi` in `C^{d1} (x) C^{d2}`. Fails hard when the
/// reconstruction residual exceeds the tolerance (a basis-convention fault,
/// not a numerical warning).
pub fn bipartite_power_decompose(
    psi: &CVec,
    d1: usize,
    d2: usize,
    n: usize,
) -> Result<PowerDecomposition> {
    if psi.len() != d1 * d2 {
        return Err(Error::Shape(format!(
            "psi has length {}, expected {}",
            psi.len(),
            d1 * d2
        )));
    }
    let ta = schur_transform(n, d1)?;
    let tb = schur_transform(n, d2)?;

    // psi^(x)n on factors (A1 B1 A2 B2 ...), regrouped to (A1..An B1..Bn).
    let mut power = psi.clone();
    for _ in 1..n {
        power = vec_kron(&power, psi);
    }
    let mut dims = Vec::with_capacity(2 * n);
    let mut perm = Vec::with_capacity(2 * n);
    for j in 0..n {
        dims.push(d1);
        perm.push(j); // A_j -> position j
        dims.push(d2);
        perm.push(n + j); // B_j -> position n + j
    }
    let regrouped = permute_tensor_factors(&power, &dims, &perm)?;

    // Apply (U_A (x) U_B) via the reshape trick: vec(M) -> vec(U_A M U_B^T).
    let da_n = d1.pow(n as u32);
    let db_n = d2.pow(n as u32);
    let m = crate::tensor::unvec(&regrouped, da_n, db_n)?;
    let phi = ta
        .unitary()
        .dot(&m)
        .dot(&linalg::transpose(tb.unitary()));

    let s = d1.min(d2);
    let mut components = Vec::new();
    for lambda in partitions(n, s) {
        let ba = ta
            .block_for(&lambda)
            .ok_or_else(|| Error::SchurLayout(format!("{lambda} missing in A layout")))?;
        let bb = tb
            .block_for(&lambda)
            .ok_or_else(|| Error::SchurLayout(format!("{lambda} missing in B layout")))?;
        debug_assert_eq!(ba.dim_p, bb.dim_p);
        let dim_p = ba.dim_p;
        let mut comp: CVec = Array1::zeros(ba.dim_q * bb.dim_q);
        for q1 in 0..ba.dim_q {
            for q2 in 0..bb.dim_q {
                let mut acc = Complex64::ZERO;
                for t in 0..dim_p {
                    acc += phi[(
                        ba.offset + t * ba.dim_q + q1,
                        bb.offset + t * bb.dim_q + q2,
                    )];
                }
                comp[q1 * bb.dim_q + q2] = acc / dim_p as f64;
            }
        }
        components.push(PowerComponent {
            lambda,
            dim_p,
            dim_q1: ba.dim_q,
            dim_q2: bb.dim_q,
            component: comp,
        });
    }

    // Reconstruct and measure the residual over the whole space.
    let mut rebuilt: CMat = Array2::zeros((da_n, db_n));
    for c in &components {
        let ba = ta.block_for(&c.lambda).expect("present");
        let bb = tb.block_for(&c.lambda).expect("present");
        for t in 0..c.dim_p {
            for q1 in 0..c.dim_q1 {
                for q2 in 0..c.dim_q2 {
                    rebuilt[(
                        ba.offset + t * ba.dim_q + q1,
                        bb.offset + t * bb.dim_q + q2,
                    )] = c.component[q1 * c.dim_q2 + q2];
                }
            }
        }
    }
    let residual = phi
        .iter()
        .zip(rebuilt.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    if residual > tol::DECOMPOSE_RESIDUAL {
        return Err(Error::ConventionFault {
            residual,
            tol: tol::DECOMPOSE_RESIDUAL,
        });
    }
    Ok(PowerDecomposition {
        components,
        residual,
    })
}

/// Projector identity oracle: in the Schur (x) Schur basis, the simultaneous
/// permutation average `(1/n!) sum_pi p_A(pi) (x) p_B(pi)` equals
/// `(+)_lambda (1/dimP) |I_P>><<I_P| (x) I_{Q1} (x) I_{Q2}` (blocks paired at
/// equal lambda). Returns both sides for comparison in tests.
pub fn permutation_average_in_schur_basis(
    n: usize,
    d1: usize,
    d2: usize,
) -> Result<(CMat, CMat)> {
    use super::young::symmetric_group;
    let ta = schur_transform(n, d1)?;
    let tb = schur_transform(n, d2)?;
    let da_n = d1.pow(n as u32);
    let db_n = d2.pow(n as u32);
    let group = symmetric_group(n);
    let mut avg: CMat = Array2::zeros((da_n * db_n, da_n * db_n));
    for (perm, _) in &group {
        let pa = crate::tensor::permutation_matrix(&vec![d1; n], perm)?;
        let pb = crate::tensor::permutation_matrix(&vec![d2; n], perm)?;
        avg += &linalg::kron_mat(&pa, &pb);
    }
    avg.mapv_inplace(|z| z / group.len() as f64);
    let u = linalg::kron_mat(ta.unitary(), tb.unitary());
    let avg_schur = u.dot(&avg).dot(&linalg::dagger(&u));

    // Expected form.
    let s = d1.min(d2);
    let mut expected: CMat = Array2::zeros((da_n * db_n, da_n * db_n));
    for lambda in partitions(n, s) {
        let ba = ta.block_for(&lambda).expect("layout");
        let bb = tb.block_for(&lambda).expect("layout");
        let dim_p = ba.dim_p;
        let ip = max_entangled_p(dim_p);
        // Index (schurA, schurB) of the kron: schurA * db_n + schurB.
        for t1 in 0..dim_p {
            for t2 in 0..dim_p {
                for u1 in 0..dim_p {
                    for u2 in 0..dim_p {
                        let w = ip[t1 * dim_p + t2] * ip[u1 * dim_p + u2].conj()
                            / dim_p as f64;
                        if w == Complex64::ZERO {
                            continue;
                        }
                        for q1 in 0..ba.dim_q {
                            for q2 in 0..bb.dim_q {
                                let row = (ba.offset + t1 * ba.dim_q + q1) * db_n
                                    + (bb.offset + t2 * bb.dim_q + q2);
                                let col = (ba.offset + u1 * ba.dim_q + q1) * db_n
                                    + (bb.offset + u2 * bb.dim_q + q2);
                                expected[(row, col)] += w;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok((avg_schur, expected))
}
