//! Parallel testers: link product, outcome distributions, and both directions
//! of the tester/algorithm correspondence.
//!
//! A parallel tester with `n` queries lives on systems `A1..An, B1..Bn`; the
//! probability of outcome `i` on channel `E` is `p_i = T_i * C_E^(x)n`
//! (link product over all systems, i.e. `tr(T_i^T C^(x)n)`).

use crate::channels::{self, QuantumChannel};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::rng::Rng;
use crate::tensor::{kron, LabeledOperator, System};
use crate::tol;
use num_complex::Complex64;

/// Reserved label for the completion outcome added by the compiler.
pub const BOT_LABEL: &str = "BOT";

pub fn a_label(j: usize) -> String {
    format!("A{j}")
}

pub fn b_label(j: usize) -> String {
    format!("B{j}")
}

fn purifier_label(j: usize) -> String {
    format!("P{j}")
}

/// Link product `X * Y = tr_shared(X^{T_shared} Y)`, operators extended by
/// identity on the union of their systems.
pub fn link_product(x: &LabeledOperator, y: &LabeledOperator) -> Result<LabeledOperator> {
    for sx in x.rows() {
        if let Ok(dy) = y.dim_of(&sx.label) {
            if dy != sx.dim {
                return Err(Error::DimMismatch {
                    label: sx.label.clone(),
                    left: sx.dim,
                    right: dy,
                });
            }
        }
    }
    let shared: Vec<String> = x
        .rows()
        .iter()
        .filter(|s| y.has_label(&s.label))
        .map(|s| s.label.clone())
        .collect();
    let shared_refs: Vec<&str> = shared.iter().map(|s| s.as_str()).collect();

    // Full overlap: scalar tr(X^T Y) without building extensions.
    if shared.len() == x.rows().len() && shared.len() == y.rows().len() {
        let ya = y.reorder_systems(&x.row_labels())?;
        let s: Complex64 = x
            .mat()
            .iter()
            .zip(ya.mat().iter())
            .map(|(a, b)| a * b)
            .sum();
        return LabeledOperator::square(ndarray::Array2::from_elem((1, 1), s), vec![]);
    }

    let x_excl: Vec<System> = x
        .rows()
        .iter()
        .filter(|s| !y.has_label(&s.label))
        .cloned()
        .collect();
    let y_excl: Vec<System> = y
        .rows()
        .iter()
        .filter(|s| !x.has_label(&s.label))
        .cloned()
        .collect();

    let x_ext = if y_excl.is_empty() {
        x.clone()
    } else {
        kron(x, &LabeledOperator::identity(y_excl.clone())?)?
    };
    let y_ext = if x_excl.is_empty() {
        y.clone()
    } else {
        kron(y, &LabeledOperator::identity(x_excl.clone())?)?
    };
    let order: Vec<&str> = x_ext.rows().iter().map(|s| s.label.as_str()).collect();
    let y_ext = y_ext.reorder_systems(&order)?;
    let product = x_ext.partial_transpose(&shared_refs)?.mul(&y_ext)?;
    if shared.is_empty() {
        return Ok(product);
    }
    product.partial_trace(&shared_refs)
}

/// Outcome-indexed positive operators on `(H_A (x) H_B)^(x)n` summing to
/// `rho_A (x) I_B`.
#[derive(Debug, Clone)]
pub struct ParallelTester {
    outcomes: Vec<(String, LabeledOperator)>,
    n: usize,
    d_a: usize,
    d_b: usize,
    rho_a: CMat,
}

impl ParallelTester {
    /// Validates the tester axioms and stores operators in the canonical
    /// system order `A1..An, B1..Bn`.
    pub fn new(outcomes: Vec<(String, LabeledOperator)>, n: usize, d_a: usize, d_b: usize) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::InvalidTester("no outcomes".into()));
        }
        let canonical = Self::canonical_systems(n, d_a, d_b);
        let order: Vec<&str> = canonical.iter().map(|s| s.label.as_str()).collect();
        let mut normalized = Vec::with_capacity(outcomes.len());
        let mut seen = std::collections::HashSet::new();
        for (label, op) in outcomes {
            if !seen.insert(label.clone()) {
                return Err(Error::InvalidTester(format!("duplicate outcome `{label}`")));
            }
            let op = op.reorder_systems(&order)?;
            if op.rows() != canonical.as_slice() {
                return Err(Error::InvalidTester(format!(
                    "outcome `{label}` has systems {:?}",
                    op.rows()
                )));
            }
            let herm = linalg::herm_dev(op.mat());
            if herm > 1e-8 {
                return Err(Error::InvalidTester(format!(
                    "outcome `{label}` deviates from Hermitian by {herm:.3e}"
                )));
            }
            let min = linalg::min_eig(op.mat())?;
            if min < tol::PSD_MIN_EIG {
                return Err(Error::InvalidTester(format!(
                    "outcome `{label}` has min eigenvalue {min:.3e}"
                )));
            }
            normalized.push((label, op));
        }
        let mut total = normalized[0].1.clone();
        for (_, op) in &normalized[1..] {
            total = total.add(op)?;
        }
        let b_labels: Vec<String> = (1..=n).map(b_label).collect();
        let b_refs: Vec<&str> = b_labels.iter().map(|s| s.as_str()).collect();
        let db_n = d_b.pow(n as u32) as f64;
        let rho_a = total
            .partial_trace(&b_refs)?
            .mat()
            .mapv(|z| z / db_n);
        let tr = rho_a.diag().iter().sum::<Complex64>();
        if (tr.re - 1.0).abs() > tol::TESTER_NORM || tr.im.abs() > tol::TESTER_NORM {
            return Err(Error::InvalidTester(format!(
                "tr(rho_A) = {tr} is not 1"
            )));
        }
        let expect = linalg::kron_mat(&rho_a, &linalg::identity(d_b.pow(n as u32)));
        let dev = linalg::max_abs_diff(total.mat(), &expect);
        if dev > tol::TESTER_NORM {
            return Err(Error::InvalidTester(format!(
                "sum of outcomes deviates from rho_A (x) I_B by {dev:.3e}"
            )));
        }
        Ok(ParallelTester {
            outcomes: normalized,
            n,
            d_a,
            d_b,
            rho_a,
        })
    }

    pub fn canonical_systems(n: usize, d_a: usize, d_b: usize) -> Vec<System> {
        let mut sys: Vec<System> = (1..=n).map(|j| System::new(a_label(j), d_a)).collect();
        sys.extend((1..=n).map(|j| System::new(b_label(j), d_b)));
        sys
    }

    pub fn outcomes(&self) -> &[(String, LabeledOperator)] {
        &self.outcomes
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn rho_a(&self) -> &CMat {
        &self.rho_a
    }

    /// Choi operator of `n` parallel queries, labeled to match this tester.
    pub fn choi_power(&self, ch: &QuantumChannel) -> Result<LabeledOperator> {
        if ch.d_in() != self.d_a || ch.d_out() != self.d_b {
            return Err(Error::Shape(format!(
                "channel is {}->{}, tester expects {}->{}",
                ch.d_in(),
                ch.d_out(),
                self.d_a,
                self.d_b
            )));
        }
        let choi = channels::choi_from_kraus(ch)?;
        let mut acc: Option<LabeledOperator> = None;
        for j in 1..=self.n {
            let labeled = choi.relabeled(&b_label(j), &a_label(j))?;
            acc = Some(match acc {
                None => labeled,
                Some(prev) => kron(&prev, &labeled)?,
            });
        }
        Ok(acc.expect("n >= 1"))
    }

    /// `p_i = T_i * C_E^(x)n`.
    pub fn outcome_distribution(&self, ch: &QuantumChannel) -> Result<Vec<(String, f64)>> {
        let choi_n = self.choi_power(ch)?;
        let mut probs = Vec::with_capacity(self.outcomes.len());
        for (label, op) in &self.outcomes {
            let p = link_product(op, &choi_n)?.expect_scalar()?;
            probs.push((label.clone(), p.re));
        }
        Ok(probs)
    }
}

/// Physical realization of a tester: an input state on the query inputs plus
/// a purifier register, and a POVM on the outputs plus the purifier.
#[derive(Debug, Clone)]
pub struct RealizedTester {
    /// Pure input state as a density operator on `A1..An, P1..Pn`.
    pub state: LabeledOperator,
    /// POVM elements on `B1..Bn, P1..Pn`.
    pub povm: Vec<(String, LabeledOperator)>,
    n: usize,
}

/// Builds the physical realization: state `(sqrt(rho_A)^T (x) I)|I>>` and the
/// POVM obtained by conjugating each `T_i^T` with the pseudo-inverse of
/// `sqrt(rho_A)^T (x) I_B`.
pub fn realize(t: &ParallelTester) -> Result<RealizedTester> {
    let n = t.n();
    let sqrt_rho_t = linalg::transpose(&linalg::sqrt_psd(t.rho_a())?);
    // State vector: vec(sqrt(rho_A)^T) on [P-block, A-block] pairs the
    // purifier with the query inputs.
    let s = crate::tensor::vec_flatten(&sqrt_rho_t);
    let density = linalg::outer(&s, &s);
    let mut sys: Vec<System> = (1..=n).map(|j| System::new(purifier_label(j), t.d_a())).collect();
    sys.extend((1..=n).map(|j| System::new(a_label(j), t.d_a())));
    let state = LabeledOperator::square(density, sys)?;

    let pinv_sqrt = linalg::pinv(&sqrt_rho_t, tol::PINV_REL_CUT)?;
    let p_systems: Vec<System> = (1..=n).map(|j| System::new(purifier_label(j), t.d_a())).collect();
    let pinv_op = LabeledOperator::square(pinv_sqrt, p_systems)?;
    let b_systems: Vec<System> = (1..=n).map(|j| System::new(b_label(j), t.d_b())).collect();
    let conj_full = kron(&pinv_op, &LabeledOperator::identity(b_systems)?)?;
    let order: Vec<&str> = conj_full.rows().iter().map(|s| s.label.as_str()).collect();

    let relabel: Vec<(String, String)> = (1..=n)
        .map(|j| (a_label(j), purifier_label(j)))
        .collect();
    let relabel_refs: Vec<(&str, &str)> = relabel
        .iter()
        .map(|(a, b)| (a.as_str(), b.as_str()))
        .collect();

    let mut povm = Vec::with_capacity(t.outcomes().len());
    for (label, op) in t.outcomes() {
        let tt = op.transpose_full().relabel(&relabel_refs)?;
        let tt = tt.reorder_systems(&order)?;
        let m = conj_full.mul(&tt)?.mul(&conj_full)?;
        povm.push((label.clone(), m));
    }
    Ok(RealizedTester { state, povm, n })
}

/// Simulates the realized tester on a channel with plain density-matrix
/// evolution and Born-rule probabilities. Independent of the link-product
/// path.
pub fn simulate_distribution(
    rt: &RealizedTester,
    ch: &QuantumChannel,
) -> Result<Vec<(String, f64)>> {
    let mut rho = rt.state.clone();
    for j in 1..=rt.n {
        rho = apply_channel_to_system(&rho, ch, &a_label(j), &b_label(j))?;
    }
    let mut probs = Vec::with_capacity(rt.povm.len());
    for (label, m) in &rt.povm {
        let aligned = rho.reorder_systems(&m.row_labels())?;
        let p = m.mul(&aligned)?.trace();
        probs.push((label.clone(), p.re));
    }
    Ok(probs)
}

/// Applies a channel to one labeled subsystem of a density operator,
/// replacing `label` (dim `d_in`) by `out_label` (dim `d_out`).
pub fn apply_channel_to_system(
    rho: &LabeledOperator,
    ch: &QuantumChannel,
    label: &str,
    out_label: &str,
) -> Result<LabeledOperator> {
    let d = rho.dim_of(label)?;
    if d != ch.d_in() {
        return Err(Error::DimMismatch {
            label: label.to_string(),
            left: d,
            right: ch.d_in(),
        });
    }
    let mut acc: Option<LabeledOperator> = None;
    for e in ch.kraus() {
        // Embed E on `label`, identity elsewhere, preserving system order.
        let mut full: Option<LabeledOperator> = None;
        for sys in rho.rows() {
            let piece = if sys.label == label {
                LabeledOperator::new(
                    e.clone(),
                    vec![System::new(out_label, ch.d_out())],
                    vec![System::new(label, ch.d_in())],
                )?
            } else {
                LabeledOperator::identity(vec![sys.clone()])?
            };
            full = Some(match full {
                None => piece,
                Some(prev) => kron(&prev, &piece)?,
            });
        }
        let full = full.expect("at least one system");
        let term = full.mul(rho)?.mul(&full.adjoint())?;
        acc = Some(match acc {
            None => term,
            Some(prev) => prev.add(&term)?,
        });
    }
    Ok(acc.expect("at least one Kraus operator"))
}

/// Builds the tester `T_i = E_i^T * rho` from a physical algorithm given by an
/// input state on the query inputs plus ancilla and a POVM on the outputs
/// plus ancilla. Shared (ancilla) labels are contracted by the link product.
pub fn from_algorithm(
    rho: &LabeledOperator,
    povm: &[(String, LabeledOperator)],
    n: usize,
    d_a: usize,
    d_b: usize,
) -> Result<ParallelTester> {
    let mut outcomes = Vec::with_capacity(povm.len());
    for (label, e) in povm {
        let t = link_product(&e.transpose_full(), rho)?;
        outcomes.push((label.clone(), t));
    }
    ParallelTester::new(outcomes, n, d_a, d_b)
}

/// Random valid tester: random `rho_A` and a random resolution of
/// `rho_A (x) I_B` into `k` PSD parts.
pub fn random_tester(
    n: usize,
    d_a: usize,
    d_b: usize,
    k_outcomes: usize,
    rng: &mut Rng,
) -> Result<ParallelTester> {
    if k_outcomes == 0 {
        return Err(Error::InvalidTester("k_outcomes must be >= 1".into()));
    }
    let da_n = d_a.pow(n as u32);
    let db_n = d_b.pow(n as u32);
    let full = da_n * db_n;
    let rho_a = channels::random_density(da_n, rng);
    let sqrt_s = linalg::kron_mat(&linalg::sqrt_psd(&rho_a)?, &linalg::identity(db_n));

    // Random POVM on the full space.
    let mut parts: Vec<CMat> = Vec::with_capacity(k_outcomes);
    let mut total: CMat = ndarray::Array2::zeros((full, full));
    for _ in 0..k_outcomes {
        let g = linalg::ginibre(full, full, rng);
        let p = g.dot(&linalg::dagger(&g));
        total += &p;
        parts.push(p);
    }
    let tot_inv_sqrt = {
        let (vals, vecs) = linalg::eigh(&total)?;
        let mut m: CMat = ndarray::Array2::zeros((full, full));
        for k in 0..vals.len() {
            let lam = vals[k].max(1e-300);
            let w = 1.0 / lam.sqrt();
            let col = vecs.column(k);
            for i in 0..full {
                for j in 0..full {
                    m[(i, j)] += col[i] * col[j].conj() * w;
                }
            }
        }
        m
    };
    let systems = ParallelTester::canonical_systems(n, d_a, d_b);
    let mut outcomes = Vec::with_capacity(k_outcomes);
    for (i, p) in parts.into_iter().enumerate() {
        let povm_el = tot_inv_sqrt.dot(&p).dot(&tot_inv_sqrt);
        let t = sqrt_s.dot(&povm_el).dot(&sqrt_s);
        let t = linalg::hermitian_part(&t);
        outcomes.push((
            format!("{i}"),
            LabeledOperator::square(t, systems.clone())?,
        ));
    }
    ParallelTester::new(outcomes, n, d_a, d_b)
}

// --- JSON serialization ------------------------------------------------------

fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

fn mat_json(m: &CMat) -> String {
    let mut s = String::from("[");
    for i in 0..m.dim().0 {
        if i > 0 {
            s.push(',');
        }
        s.push('[');
        for j in 0..m.dim().1 {
            if j > 0 {
                s.push(',');
            }
            let z = m[(i, j)];
            s.push_str(&format!("[{},{}]", fmt_f64(z.re), fmt_f64(z.im)));
        }
        s.push(']');
    }
    s.push(']');
    s
}

/// Tester JSON: system layout header plus outcome label -> matrix.
pub fn tester_to_json(t: &ParallelTester) -> String {
    let mut s = format!(
        "{{\"n\":{},\"d_a\":{},\"d_b\":{},\"systems\":[",
        t.n(),
        t.d_a(),
        t.d_b()
    );
    let sys = ParallelTester::canonical_systems(t.n(), t.d_a(), t.d_b());
    for (i, sy) in sys.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&format!("[\"{}\",{}]", sy.label, sy.dim));
    }
    s.push_str("],\"outcomes\":[");
    for (i, (label, op)) in t.outcomes().iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&format!("[\"{}\",{}]", label, mat_json(op.mat())));
    }
    s.push_str("]}");
    s
}

#[derive(serde::Deserialize)]
struct TesterJson {
    n: usize,
    d_a: usize,
    d_b: usize,
    #[allow(dead_code)]
    systems: Vec<(String, usize)>,
    outcomes: Vec<(String, Vec<Vec<[f64; 2]>>)>,
}

pub fn tester_from_json(s: &str) -> Result<ParallelTester> {
    let parsed: TesterJson =
        serde_json::from_str(s).map_err(|e| Error::ChannelJson(e.to_string()))?;
    let systems = ParallelTester::canonical_systems(parsed.n, parsed.d_a, parsed.d_b);
    let dim: usize = systems.iter().map(|s| s.dim).product();
    let mut outcomes = Vec::with_capacity(parsed.outcomes.len());
    for (label, rows) in &parsed.outcomes {
        if rows.len() != dim {
            return Err(Error::ChannelJson(format!(
                "outcome `{label}`: {} rows, expected {dim}",
                rows.len()
            )));
        }
        let mut m: CMat = ndarray::Array2::zeros((dim, dim));
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::ChannelJson(format!(
                    "outcome `{label}`: row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            for (j, &[re, im]) in row.iter().enumerate() {
                m[(i, j)] = Complex64::new(re, im);
            }
        }
        outcomes.push((label.clone(), LabeledOperator::square(m, systems.clone())?));
    }
    ParallelTester::new(outcomes, parsed.n, parsed.d_a, parsed.d_b)
}
