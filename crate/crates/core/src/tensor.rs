//! Labeled multi-system dense operators: tensor products, vectorization,
//! partial trace/transpose, system reordering and permutation operators.
//!
//! Flattening is row-major everywhere: `vec(|psi><phi|) = |psi> (x) |phi*>`,
//! and `<vec(A), vec(B)> = tr(A^dag B)`.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use ndarray::{Array1, Array2};
use num_complex::Complex64;

/// One tensor factor: a label and its dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct System {
    pub label: String,
    pub dim: usize,
}

impl System {
    pub fn new(label: impl Into<String>, dim: usize) -> Self {
        System {
            label: label.into(),
            dim,
        }
    }
}

pub fn systems(list: &[(&str, usize)]) -> Vec<System> {
    list.iter().map(|(l, d)| System::new(*l, *d)).collect()
}

fn dims_product(sys: &[System]) -> usize {
    sys.iter().map(|s| s.dim).product()
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

fn decode(mut flat: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = flat % dims[k];
        flat /= dims[k];
    }
}

fn check_distinct(sys: &[System]) -> Result<()> {
    for (i, a) in sys.iter().enumerate() {
        for b in &sys[i + 1..] {
            if a.label == b.label {
                return Err(Error::DuplicateLabel(a.label.clone()));
            }
        }
    }
    Ok(())
}

/// Dense complex matrix tagged with ordered lists of labeled tensor factors
/// for its row and column spaces.
#[derive(Debug, Clone)]
pub struct LabeledOperator {
    mat: CMat,
    rows: Vec<System>,
    cols: Vec<System>,
}

impl LabeledOperator {
    pub fn new(mat: CMat, rows: Vec<System>, cols: Vec<System>) -> Result<Self> {
        check_distinct(&rows)?;
        check_distinct(&cols)?;
        if dims_product(&rows) != mat.dim().0 || dims_product(&cols) != mat.dim().1 {
            return Err(Error::Shape(format!(
                "matrix is {}x{} but systems give {}x{}",
                mat.dim().0,
                mat.dim().1,
                dims_product(&rows),
                dims_product(&cols)
            )));
        }
        Ok(LabeledOperator { mat, rows, cols })
    }

    /// Square operator with identical row and column systems.
    pub fn square(mat: CMat, sys: Vec<System>) -> Result<Self> {
        let cols = sys.clone();
        Self::new(mat, sys, cols)
    }

    /// Identity operator on the given systems.
    pub fn identity(sys: Vec<System>) -> Result<Self> {
        let d = dims_product(&sys);
        Self::square(linalg::identity(d), sys)
    }

    /// Column vector (ket) on the given systems.
    pub fn ket(v: CVec, sys: Vec<System>) -> Result<Self> {
        let d = v.len();
        let mat = v.into_shape_with_order((d, 1)).expect("reshape ket");
        Self::new(mat, sys, vec![])
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn into_mat(self) -> CMat {
        self.mat
    }

    pub fn rows(&self) -> &[System] {
        &self.rows
    }

    pub fn cols(&self) -> &[System] {
        &self.cols
    }

    pub fn row_labels(&self) -> Vec<&str> {
        self.rows.iter().map(|s| s.label.as_str()).collect()
    }

    /// True when row and column system lists are identical.
    pub fn is_aligned(&self) -> bool {
        self.rows == self.cols
    }

    fn require_aligned(&self, what: &str) -> Result<()> {
        if !self.is_aligned() {
            return Err(Error::Shape(format!(
                "{what} requires identical row and column systems"
            )));
        }
        Ok(())
    }

    fn position(&self, label: &str) -> Result<usize> {
        self.rows
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.rows[self.position(label)?].dim)
    }

    pub fn has_label(&self, label: &str) -> bool {
        self.rows.iter().any(|s| s.label == label)
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.diag().iter().sum()
    }

    pub fn scale(&self, z: Complex64) -> Self {
        LabeledOperator {
            mat: self.mat.mapv(|x| x * z),
            rows: self.rows.clone(),
            cols: self.cols.clone(),
        }
    }

    pub fn adjoint(&self) -> Self {
        LabeledOperator {
            mat: linalg::dagger(&self.mat),
            rows: self.cols.clone(),
            cols: self.rows.clone(),
        }
    }

    /// Full transpose (swaps row and column spaces, no conjugation).
    pub fn transpose_full(&self) -> Self {
        LabeledOperator {
            mat: linalg::transpose(&self.mat),
            rows: self.cols.clone(),
            cols: self.rows.clone(),
        }
    }

    /// Matrix product; column systems of `self` must equal row systems of `rhs`.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Shape(
                "mul: column systems of lhs do not match row systems of rhs".into(),
            ));
        }
        Ok(LabeledOperator {
            mat: self.mat.dot(&rhs.mat),
            rows: self.rows.clone(),
            cols: rhs.cols.clone(),
        })
    }

    /// Sum; `rhs` is reordered to this operator's system order first.
    pub fn add(&self, rhs: &Self) -> Result<Self> {
        let aligned = rhs.aligned_like(self)?;
        Ok(LabeledOperator {
            mat: &self.mat + &aligned.mat,
            rows: self.rows.clone(),
            cols: self.cols.clone(),
        })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        let aligned = rhs.aligned_like(self)?;
        Ok(LabeledOperator {
            mat: &self.mat - &aligned.mat,
            rows: self.rows.clone(),
            cols: self.cols.clone(),
        })
    }

    /// Reorders systems to match `like`'s layout.
    pub fn aligned_like(&self, like: &Self) -> Result<Self> {
        if self.rows == like.rows && self.cols == like.cols {
            return Ok(self.clone());
        }
        let order: Vec<&str> = like.rows.iter().map(|s| s.label.as_str()).collect();
        self.reorder_systems(&order)
    }

    /// Renames systems according to `(old, new)` pairs.
    pub fn relabel(&self, map: &[(&str, &str)]) -> Result<Self> {
        let rename = |sys: &[System]| -> Vec<System> {
            sys.iter()
                .map(|s| {
                    let label = map
                        .iter()
                        .find(|(old, _)| *old == s.label)
                        .map(|(_, new)| new.to_string())
                        .unwrap_or_else(|| s.label.clone());
                    System::new(label, s.dim)
                })
                .collect()
        };
        LabeledOperator::new(self.mat.clone(), rename(&self.rows), rename(&self.cols))
    }

    /// Reorders tensor factors to the given label order (aligned square only).
    pub fn reorder_systems(&self, order: &[&str]) -> Result<Self> {
        self.require_aligned("reorder_systems")?;
        if order.len() != self.rows.len() {
            return Err(Error::Shape(format!(
                "reorder_systems: got {} labels for {} systems",
                order.len(),
                self.rows.len()
            )));
        }
        let old_dims: Vec<usize> = self.rows.iter().map(|s| s.dim).collect();
        let old_strides = strides(&old_dims);
        let mut new_sys = Vec::with_capacity(order.len());
        let mut old_pos = Vec::with_capacity(order.len());
        for label in order {
            let p = self.position(label)?;
            if old_pos.contains(&p) {
                return Err(Error::DuplicateLabel(label.to_string()));
            }
            old_pos.push(p);
            new_sys.push(self.rows[p].clone());
        }
        let new_dims: Vec<usize> = new_sys.iter().map(|s| s.dim).collect();
        let total = self.mat.dim().0;
        // map[new_flat] = old_flat
        let mut map = vec![0usize; total];
        let mut digits = vec![0usize; new_dims.len()];
        for (new_flat, slot) in map.iter_mut().enumerate() {
            decode(new_flat, &new_dims, &mut digits);
            let mut old_flat = 0;
            for (k, &dig) in digits.iter().enumerate() {
                old_flat += dig * old_strides[old_pos[k]];
            }
            *slot = old_flat;
        }
        let mut out = Array2::zeros((total, total));
        for i in 0..total {
            for j in 0..total {
                out[(i, j)] = self.mat[(map[i], map[j])];
            }
        }
        LabeledOperator::square(out, new_sys)
    }

    /// Splits one system of dimension `a*b` into two adjacent systems, the
    /// first (leading) factor of dimension `a`. Metadata only.
    pub fn split_system(&self, label: &str, first: (&str, usize), second: (&str, usize)) -> Result<Self> {
        self.require_aligned("split_system")?;
        let p = self.position(label)?;
        if self.rows[p].dim != first.1 * second.1 {
            return Err(Error::Shape(format!(
                "split_system: {} has dim {}, cannot split into {}*{}",
                label, self.rows[p].dim, first.1, second.1
            )));
        }
        let mut sys = self.rows.clone();
        sys.splice(
            p..p + 1,
            [System::new(first.0, first.1), System::new(second.0, second.1)],
        );
        LabeledOperator::square(self.mat.clone(), sys)
    }

    /// Merges two adjacent systems (`first` immediately before `second`) into
    /// one of dimension `dim(first)*dim(second)`. Metadata only.
    pub fn merge_systems(&self, first: &str, second: &str, new_label: &str) -> Result<Self> {
        self.require_aligned("merge_systems")?;
        let p = self.position(first)?;
        let q = self.position(second)?;
        if q != p + 1 {
            return Err(Error::Shape(format!(
                "merge_systems: {first} and {second} are not adjacent in order"
            )));
        }
        let mut sys = self.rows.clone();
        let dim = sys[p].dim * sys[q].dim;
        sys.splice(p..p + 2, [System::new(new_label, dim)]);
        LabeledOperator::square(self.mat.clone(), sys)
    }

    /// Partial trace over the given labels; remaining systems keep their order.
    pub fn partial_trace(&self, labels: &[&str]) -> Result<Self> {
        self.require_aligned("partial_trace")?;
        let mut traced = Vec::new();
        for l in labels {
            let p = self.position(l)?;
            if traced.contains(&p) {
                return Err(Error::DuplicateLabel(l.to_string()));
            }
            traced.push(p);
        }
        let kept: Vec<usize> = (0..self.rows.len()).filter(|p| !traced.contains(p)).collect();
        let dims: Vec<usize> = self.rows.iter().map(|s| s.dim).collect();
        let st = strides(&dims);
        let kept_sys: Vec<System> = kept.iter().map(|&p| self.rows[p].clone()).collect();
        let kept_dims: Vec<usize> = kept.iter().map(|&p| dims[p]).collect();
        let traced_dims: Vec<usize> = traced.iter().map(|&p| dims[p]).collect();
        let kept_total: usize = kept_dims.iter().product();
        let traced_total: usize = traced_dims.iter().product();

        let offsets = |positions: &[usize], sub_dims: &[usize]| -> Vec<usize> {
            let total: usize = sub_dims.iter().product();
            let mut out = vec![0usize; total];
            let mut digits = vec![0usize; sub_dims.len()];
            for (flat, slot) in out.iter_mut().enumerate() {
                decode(flat, sub_dims, &mut digits);
                *slot = digits
                    .iter()
                    .enumerate()
                    .map(|(k, &dig)| dig * st[positions[k]])
                    .sum();
            }
            out
        };
        let kept_off = offsets(&kept, &kept_dims);
        let traced_off = offsets(&traced, &traced_dims);

        let mut out: CMat = Array2::zeros((kept_total, kept_total));
        for t in 0..traced_total {
            let ot = traced_off[t];
            for (i, &oi) in kept_off.iter().enumerate() {
                for (j, &oj) in kept_off.iter().enumerate() {
                    out[(i, j)] += self.mat[(oi + ot, oj + ot)];
                }
            }
        }
        LabeledOperator::square(out, kept_sys)
    }

    /// Partial transpose on the given labels.
    pub fn partial_transpose(&self, labels: &[&str]) -> Result<Self> {
        self.require_aligned("partial_transpose")?;
        let mut flip = Vec::new();
        for l in labels {
            let p = self.position(l)?;
            if flip.contains(&p) {
                return Err(Error::DuplicateLabel(l.to_string()));
            }
            flip.push(p);
        }
        let dims: Vec<usize> = self.rows.iter().map(|s| s.dim).collect();
        let st = strides(&dims);
        let total = self.mat.dim().0;
        let flip_dims: Vec<usize> = flip.iter().map(|&p| dims[p]).collect();
        let kept: Vec<usize> = (0..dims.len()).filter(|p| !flip.contains(p)).collect();
        let kept_dims: Vec<usize> = kept.iter().map(|&p| dims[p]).collect();

        let offsets = |positions: &[usize], sub_dims: &[usize]| -> Vec<usize> {
            let tot: usize = sub_dims.iter().product();
            let mut out = vec![0usize; tot];
            let mut digits = vec![0usize; sub_dims.len()];
            for (flat, slot) in out.iter_mut().enumerate() {
                decode(flat, sub_dims, &mut digits);
                *slot = digits
                    .iter()
                    .enumerate()
                    .map(|(k, &dig)| dig * st[positions[k]])
                    .sum();
            }
            out
        };
        let kept_off = offsets(&kept, &kept_dims);
        let flip_off = offsets(&flip, &flip_dims);

        let mut out: CMat = Array2::zeros((total, total));
        for &okr in kept_off.iter() {
            for &okc in kept_off.iter() {
                for &sr in flip_off.iter() {
                    for &sc in flip_off.iter() {
                        out[(okr + sr, okc + sc)] = self.mat[(okr + sc, okc + sr)];
                    }
                }
            }
        }
        LabeledOperator::square(out, self.rows.clone())
    }

    /// Scalar content of a 1x1 operator.
    pub fn expect_scalar(&self) -> Result<Complex64> {
        if self.mat.dim() != (1, 1) {
            return Err(Error::Shape(format!(
                "expected scalar, operator is {}x{}",
                self.mat.dim().0,
                self.mat.dim().1
            )));
        }
        Ok(self.mat[(0, 0)])
    }
}

/// Tensor product; system lists are concatenated (labels must be disjoint).
pub fn kron(a: &LabeledOperator, b: &LabeledOperator) -> Result<LabeledOperator> {
    let mut rows = a.rows.clone();
    rows.extend(b.rows.iter().cloned());
    let mut cols = a.cols.clone();
    cols.extend(b.cols.iter().cloned());
    LabeledOperator::new(linalg::kron_mat(&a.mat, &b.mat), rows, cols)
}

/// Row-major flattening of a matrix into a vector.
pub fn vec_flatten(x: &CMat) -> CVec {
    let (r, c) = x.dim();
    let mut v = Array1::zeros(r * c);
    for i in 0..r {
        for j in 0..c {
            v[i * c + j] = x[(i, j)];
        }
    }
    v
}

/// Exact inverse of [`vec_flatten`].
pub fn unvec(v: &CVec, rows: usize, cols: usize) -> Result<CMat> {
    if v.len() != rows * cols {
        return Err(Error::Shape(format!(
            "unvec: vector length {} != {rows}x{cols}",
            v.len()
        )));
    }
    let mut m = Array2::zeros((rows, cols));
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = v[i * cols + j];
        }
    }
    Ok(m)
}

/// The unnormalized maximally entangled vector `sum_i |i>|i>` on `C^d (x) C^d`.
pub fn max_entangled(d: usize) -> CVec {
    vec_flatten(&linalg::identity(d))
}

fn check_perm(perm: &[usize]) -> Result<()> {
    let n = perm.len();
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidPermutation(format!("{perm:?}")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Reorders tensor factors of a vector: input factor `i` becomes output
/// factor `perm[i]`.
pub fn permute_tensor_factors(v: &CVec, dims: &[usize], perm: &[usize]) -> Result<CVec> {
    check_perm(perm)?;
    if dims.len() != perm.len() {
        return Err(Error::Shape("dims/perm length mismatch".into()));
    }
    let total: usize = dims.iter().product();
    if v.len() != total {
        return Err(Error::Shape(format!(
            "vector length {} != product of dims {total}",
            v.len()
        )));
    }
    let mut out_dims = vec![0usize; dims.len()];
    for (i, &p) in perm.iter().enumerate() {
        out_dims[p] = dims[i];
    }
    let out_strides = strides(&out_dims);
    let mut out = Array1::zeros(total);
    let mut digits = vec![0usize; dims.len()];
    for flat in 0..total {
        decode(flat, dims, &mut digits);
        let mut of = 0;
        for (i, &dig) in digits.iter().enumerate() {
            of += dig * out_strides[perm[i]];
        }
        out[of] = v[flat];
    }
    Ok(out)
}

/// Permutation matrix on mixed-dimension factors: input factor `i` is sent to
/// position `perm[i]`.
pub fn permutation_matrix(dims: &[usize], perm: &[usize]) -> Result<CMat> {
    check_perm(perm)?;
    if dims.len() != perm.len() {
        return Err(Error::Shape("dims/perm length mismatch".into()));
    }
    let total: usize = dims.iter().product();
    let mut out_dims = vec![0usize; dims.len()];
    for (i, &p) in perm.iter().enumerate() {
        out_dims[p] = dims[i];
    }
    let out_strides = strides(&out_dims);
    let mut m = Array2::zeros((total, total));
    let mut digits = vec![0usize; dims.len()];
    for flat in 0..total {
        decode(flat, dims, &mut digits);
        let mut of = 0;
        for (i, &dig) in digits.iter().enumerate() {
            of += dig * out_strides[perm[i]];
        }
        m[(of, flat)] = Complex64::ONE;
    }
    Ok(m)
}

/// `p(pi)` on `(C^d)^(x)n` with labels `S1..Sn`:
/// `p(pi)|psi_1..psi_n> = |psi_{pi^-1(1)}..psi_{pi^-1(n)}>`.
pub fn permutation_operator(n: usize, d: usize, perm: &[usize]) -> Result<LabeledOperator> {
    if perm.len() != n {
        return Err(Error::InvalidPermutation(format!(
            "expected length {n}, got {}",
            perm.len()
        )));
    }
    let dims = vec![d; n];
    let mat = permutation_matrix(&dims, perm)?;
    let sys: Vec<System> = (1..=n).map(|i| System::new(format!("S{i}"), d)).collect();
    LabeledOperator::square(mat, sys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, ginibre, identity, max_abs_diff};
    use crate::rng;

    fn lop(mat: CMat, sys: &[(&str, usize)]) -> LabeledOperator {
        LabeledOperator::square(mat, systems(sys)).unwrap()
    }

    #[test]
    fn kron_identities() {
        let a = LabeledOperator::identity(systems(&[("A", 2)])).unwrap();
        let b = LabeledOperator::identity(systems(&[("B", 3)])).unwrap();
        let k = kron(&a, &b).unwrap();
        assert!(max_abs_diff(k.mat(), &identity(6)) < 1e-15);
        assert_eq!(k.rows(), &systems(&[("A", 2), ("B", 3)])[..]);
    }

    #[test]
    fn kron_rejects_duplicate_label() {
        let a = LabeledOperator::identity(systems(&[("A", 2)])).unwrap();
        assert!(matches!(kron(&a, &a), Err(Error::DuplicateLabel(_))));
    }

    #[test]
    fn kron_bitflip_pair_maps_00_to_11() {
        // (X (x) X)|00> = |11>, checked by explicit 4x4 multiply.
        let x = ndarray::array![[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]];
        let xx = kron(&lop(x.clone(), &[("A", 2)]), &lop(x, &[("B", 2)])).unwrap();
        let e00: CVec = ndarray::arr1(&[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]);
        let out = xx.mat().dot(&e00);
        let e11: CVec = ndarray::arr1(&[c(0., 0.), c(0., 0.), c(0., 0.), c(1., 0.)]);
        assert!((0..4).all(|i| (out[i] - e11[i]).norm() < 1e-15));
    }

    #[test]
    fn vec_flatten_of_ketbra() {
        // vec(|0><1|) = |0> (x) |1>
        let mut m: CMat = Array2::zeros((2, 2));
        m[(0, 1)] = Complex64::ONE;
        let v = vec_flatten(&m);
        assert_eq!(v.len(), 4);
        assert!((v[1] - Complex64::ONE).norm() < 1e-15);
        assert!(v[0].norm() + v[2].norm() + v[3].norm() < 1e-15);
    }

    #[test]
    fn vec_flatten_identity_is_max_entangled() {
        let v = vec_flatten(&identity(2));
        // |00> + |11>
        assert!((v[0] - Complex64::ONE).norm() < 1e-15);
        assert!((v[3] - Complex64::ONE).norm() < 1e-15);
        assert!(v[1].norm() + v[2].norm() < 1e-15);
    }

    #[test]
    fn vec_inner_product_is_trace() {
        let mut rng = rng::master(11);
        let a = ginibre(3, 3, &mut rng);
        let b = ginibre(3, 3, &mut rng);
        let va = vec_flatten(&a);
        let vb = vec_flatten(&b);
        let lhs: Complex64 = va.iter().zip(vb.iter()).map(|(x, y)| x.conj() * y).sum();
        let rhs = linalg::dagger(&a).dot(&b).diag().iter().sum::<Complex64>();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn unvec_round_trip() {
        let mut rng = rng::master(12);
        for (r, cdim) in [(2, 3), (4, 1), (3, 3)] {
            let m = ginibre(r, cdim, &mut rng);
            let back = unvec(&vec_flatten(&m), r, cdim).unwrap();
            assert!(max_abs_diff(&m, &back) < 1e-15);
        }
    }

    #[test]
    fn partial_trace_of_product() {
        let mut rng = rng::master(13);
        let ra = ginibre(2, 2, &mut rng);
        let rho = ra.dot(&linalg::dagger(&ra));
        let sb = ginibre(3, 3, &mut rng);
        let sigma = sb.dot(&linalg::dagger(&sb));
        let prod = kron(&lop(rho.clone(), &[("A", 2)]), &lop(sigma.clone(), &[("B", 3)])).unwrap();
        let reduced = prod.partial_trace(&["B"]).unwrap();
        let tr_sigma = sigma.diag().iter().sum::<Complex64>();
        let expect = rho.mapv(|z| z * tr_sigma);
        assert!(max_abs_diff(reduced.mat(), &expect) < 1e-12);
    }

    #[test]
    fn partial_trace_of_max_entangled() {
        let v = max_entangled(2);
        let proj = linalg::outer(&v, &v);
        let op = lop(proj, &[("1", 2), ("2", 2)]);
        let reduced = op.partial_trace(&["2"]).unwrap();
        assert!(max_abs_diff(reduced.mat(), &identity(2)) < 1e-15);
    }

    #[test]
    fn partial_trace_over_everything_is_trace() {
        let mut rng = rng::master(14);
        let m = ginibre(4, 4, &mut rng);
        let op = lop(m.clone(), &[("A", 2), ("B", 2)]);
        let full = op.partial_trace(&["A", "B"]).unwrap();
        let scalar = full.expect_scalar().unwrap();
        let tr = m.diag().iter().sum::<Complex64>();
        assert!((scalar - tr).norm() < 1e-13);
    }

    #[test]
    fn partial_trace_of_padded_identity() {
        // tr_aux(X (x) I_k) = k * X
        let mut rng = rng::master(15);
        let x = ginibre(3, 3, &mut rng);
        let op = kron(
            &lop(x.clone(), &[("X", 3)]),
            &LabeledOperator::identity(systems(&[("aux", 4)])).unwrap(),
        )
        .unwrap();
        let red = op.partial_trace(&["aux"]).unwrap();
        assert!(max_abs_diff(red.mat(), &x.mapv(|z| z * 4.0)) < 1e-12);
    }

    #[test]
    fn partial_transpose_involution() {
        let mut rng = rng::master(16);
        let m = ginibre(8, 8, &mut rng);
        let op = lop(m.clone(), &[("A", 2), ("B", 2), ("C", 2)]);
        let twice = op
            .partial_transpose(&["B"])
            .unwrap()
            .partial_transpose(&["B"])
            .unwrap();
        assert!(max_abs_diff(twice.mat(), &m) < 1e-15);
        let full = op.partial_transpose(&["A", "B", "C"]).unwrap();
        assert!(max_abs_diff(full.mat(), &linalg::transpose(&m)) < 1e-15);
    }

    #[test]
    fn partial_transpose_of_product() {
        let mut rng = rng::master(17);
        let a = ginibre(2, 2, &mut rng);
        let b = ginibre(3, 3, &mut rng);
        let prod = kron(&lop(a.clone(), &[("A", 2)]), &lop(b.clone(), &[("B", 3)])).unwrap();
        let pt = prod.partial_transpose(&["B"]).unwrap();
        let expect = linalg::kron_mat(&a, &linalg::transpose(&b));
        assert!(max_abs_diff(pt.mat(), &expect) < 1e-15);
    }

    #[test]
    fn partial_transpose_of_max_entangled_is_swap() {
        let v = max_entangled(2);
        let proj = linalg::outer(&v, &v);
        let op = lop(proj, &[("1", 2), ("2", 2)]);
        let pt = op.partial_transpose(&["2"]).unwrap();
        let swap = permutation_matrix(&[2, 2], &[1, 0]).unwrap();
        assert!(max_abs_diff(pt.mat(), &swap) < 1e-15);
    }

    #[test]
    fn permutation_operator_identity_and_swap() {
        let id = permutation_operator(2, 3, &[0, 1]).unwrap();
        assert!(max_abs_diff(id.mat(), &identity(9)) < 1e-15);
        let swap = permutation_operator(2, 2, &[1, 0]).unwrap();
        // |01> -> |10>
        let mut v: CVec = Array1::zeros(4);
        v[1] = Complex64::ONE;
        let out = swap.mat().dot(&v);
        assert!((out[2] - Complex64::ONE).norm() < 1e-15);
    }

    #[test]
    fn permutation_operator_homomorphism_s3() {
        // p(pi) p(sigma) = p(pi o sigma) over all of S3, d=2.
        let perms: Vec<Vec<usize>> = vec![
            vec![0, 1, 2],
            vec![0, 2, 1],
            vec![1, 0, 2],
            vec![1, 2, 0],
            vec![2, 0, 1],
            vec![2, 1, 0],
        ];
        for p in &perms {
            for q in &perms {
                let comp: Vec<usize> = (0..3).map(|i| p[q[i]]).collect();
                let lhs = permutation_operator(3, 2, p)
                    .unwrap()
                    .mat()
                    .dot(permutation_operator(3, 2, q).unwrap().mat());
                let rhs = permutation_operator(3, 2, &comp).unwrap();
                assert!(max_abs_diff(&lhs, rhs.mat()) < 1e-14);
            }
        }
    }

    #[test]
    fn permutation_operator_is_unitary() {
        let p = permutation_operator(3, 2, &[2, 0, 1]).unwrap();
        let prod = linalg::dagger(p.mat()).dot(p.mat());
        assert!(max_abs_diff(&prod, &identity(8)) < 1e-15);
    }

    #[test]
    fn reorder_systems_round_trip() {
        let mut rng = rng::master(18);
        let m = ginibre(24, 24, &mut rng);
        let op = lop(m.clone(), &[("A", 2), ("B", 3), ("C", 4)]);
        let perm = op.reorder_systems(&["C", "A", "B"]).unwrap();
        assert_eq!(perm.rows(), &systems(&[("C", 4), ("A", 2), ("B", 3)])[..]);
        let back = perm.reorder_systems(&["A", "B", "C"]).unwrap();
        assert!(max_abs_diff(back.mat(), &m) < 1e-15);
        // Trace is invariant under reordering.
        assert!((perm.trace() - op.trace()).norm() < 1e-12);
    }

    #[test]
    fn reorder_matches_kron_swap() {
        let mut rng = rng::master(19);
        let a = ginibre(2, 2, &mut rng);
        let b = ginibre(3, 3, &mut rng);
        let ab = kron(&lop(a.clone(), &[("A", 2)]), &lop(b.clone(), &[("B", 3)])).unwrap();
        let ba = ab.reorder_systems(&["B", "A"]).unwrap();
        let expect = linalg::kron_mat(&b, &a);
        assert!(max_abs_diff(ba.mat(), &expect) < 1e-15);
    }

    #[test]
    fn split_and_merge_round_trip() {
        let mut rng = rng::master(20);
        let m = ginibre(6, 6, &mut rng);
        let op = lop(m.clone(), &[("AB", 6)]);
        let split = op.split_system("AB", ("A", 2), ("B", 3)).unwrap();
        assert_eq!(split.rows(), &systems(&[("A", 2), ("B", 3)])[..]);
        let merged = split.merge_systems("A", "B", "AB").unwrap();
        assert!(max_abs_diff(merged.mat(), &m) < 1e-15);
    }

    #[test]
    fn permute_tensor_factors_mixed_dims() {
        // |a>(x)|b> with dims (2,3) -> |b>(x)|a>
        let mut rng = rng::master(21);
        let a = linalg::random_unit_vector(2, &mut rng);
        let b = linalg::random_unit_vector(3, &mut rng);
        let mut ab: CVec = Array1::zeros(6);
        for i in 0..2 {
            for j in 0..3 {
                ab[i * 3 + j] = a[i] * b[j];
            }
        }
        let ba = permute_tensor_factors(&ab, &[2, 3], &[1, 0]).unwrap();
        for j in 0..3 {
            for i in 0..2 {
                assert!((ba[j * 2 + i] - b[j] * a[i]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn unknown_label_errors() {
        let op = LabeledOperator::identity(systems(&[("A", 2)])).unwrap();
        assert!(matches!(
            op.partial_trace(&["Z"]),
            Err(Error::UnknownLabel(_))
        ));
        assert!(matches!(
            op.partial_transpose(&["Z"]),
            Err(Error::UnknownLabel(_))
        ));
    }
}
