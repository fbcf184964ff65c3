//! Haar twirling `E_U[U^(x)n x U^(x)n^dag]` over designated ancilla systems:
//! exactly via Schur blocks, and by Monte-Carlo as an independent oracle.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::rng::Rng;
use crate::schur::SchurTransform;
use crate::tensor::{kron, LabeledOperator};
use ndarray::Array2;
use num_complex::Complex64;

/// Exact Haar twirl over the `anc_labels` systems (each of dimension
/// `st.d()`, `st.n()` of them): conjugate into the ancilla Schur basis, kill
/// the cross-irrep blocks, and replace each `Q_lambda` factor by its
/// normalized trace tensored with identity (Schur's lemma). The output
/// commutes with `V^(x)n` on the ancillas for every unitary `V`.
pub fn exact_twirl(
    x: &LabeledOperator,
    anc_labels: &[&str],
    st: &SchurTransform,
) -> Result<LabeledOperator> {
    let n = st.n();
    let r = st.d();
    if anc_labels.len() != n {
        return Err(Error::SchurLayout(format!(
            "{} ancilla labels for a transform with n={n}",
            anc_labels.len()
        )));
    }
    for l in anc_labels {
        let d = x.dim_of(l)?;
        if d != r {
            return Err(Error::DimMismatch {
                label: l.to_string(),
                left: d,
                right: r,
            });
        }
    }
    let original_order: Vec<String> = x.rows().iter().map(|s| s.label.clone()).collect();
    let mut order: Vec<&str> = anc_labels.to_vec();
    for s in x.rows() {
        if !anc_labels.contains(&s.label.as_str()) {
            order.push(s.label.as_str());
        }
    }
    let xr = x.reorder_systems(&order)?;
    let anc_total = r.pow(n as u32);
    let rest: usize = xr.mat().dim().0 / anc_total;

    let u_full = linalg::kron_mat(st.unitary(), &linalg::identity(rest));
    let y = u_full.dot(xr.mat()).dot(&linalg::dagger(&u_full));

    let mut z: CMat = Array2::zeros(y.dim());
    for b in st.layout() {
        let (o, p, q) = (b.offset, b.dim_p, b.dim_q);
        for t in 0..p {
            for t2 in 0..p {
                for i in 0..rest {
                    for j in 0..rest {
                        // Average the Q diagonal.
                        let mut acc = Complex64::ZERO;
                        for c in 0..q {
                            acc += y[(
                                (o + t * q + c) * rest + i,
                                (o + t2 * q + c) * rest + j,
                            )];
                        }
                        acc /= q as f64;
                        for a in 0..q {
                            z[(
                                (o + t * q + a) * rest + i,
                                (o + t2 * q + a) * rest + j,
                            )] = acc;
                        }
                    }
                }
            }
        }
    }

    let back = linalg::dagger(&u_full).dot(&z).dot(&u_full);
    let out = LabeledOperator::square(back, xr.rows().to_vec())?;
    let order_refs: Vec<&str> = original_order.iter().map(|s| s.as_str()).collect();
    out.reorder_systems(&order_refs)
}

/// Monte-Carlo twirl: empirical mean of `U^(x)n x U^(x)n^dag` over Haar
/// samples, with entrywise standard errors.
pub fn mc_twirl(
    x: &LabeledOperator,
    anc_labels: &[&str],
    r: usize,
    samples: usize,
    rng: &mut Rng,
) -> Result<(LabeledOperator, Array2<f64>)> {
    for l in anc_labels {
        let d = x.dim_of(l)?;
        if d != r {
            return Err(Error::DimMismatch {
                label: l.to_string(),
                left: d,
                right: r,
            });
        }
    }
    let dim = x.mat().dim().0;
    let mut mean: CMat = Array2::zeros((dim, dim));
    let mut m2 = Array2::<f64>::zeros((dim, dim));
    for s in 0..samples {
        let u = linalg::haar_unitary(r, rng)?;
        // U on each ancilla, identity elsewhere, in x's system order.
        let mut w: Option<LabeledOperator> = None;
        for sys in x.rows() {
            let piece = if anc_labels.contains(&sys.label.as_str()) {
                LabeledOperator::square(u.clone(), vec![sys.clone()])?
            } else {
                LabeledOperator::identity(vec![sys.clone()])?
            };
            w = Some(match w {
                None => piece,
                Some(prev) => kron(&prev, &piece)?,
            });
        }
        let w = w.expect("at least one system");
        let y = w.mul(x)?.mul(&w.adjoint())?;
        let kf = (s + 1) as f64;
        for i in 0..dim {
            for j in 0..dim {
                let v = y.mat()[(i, j)];
                let delta = v - mean[(i, j)];
                mean[(i, j)] += delta / kf;
                let delta2 = v - mean[(i, j)];
                m2[(i, j)] += (delta.conj() * delta2).re;
            }
        }
    }
    let stderr = m2.mapv(|v| (v / (samples as f64 - 1.0) / samples as f64).sqrt());
    let mean_op = LabeledOperator::square(mean, x.rows().to_vec())?;
    Ok((mean_op, stderr))
}
