//! Compiler from a dilation-access parallel tester to a channel-access
//! parallel tester.
//!
//! Input: a tester `{T_i}` with `n` queries to isometry channels in
//! `ISO_{d1, r*d2}` (each query output factored as ancilla (x) out, ancilla
//! leading). The pipeline is
//!
//! 1. `symmetrize`: `Tbar_i = E_U[U^(x)n T_i U^(x)n^dag]` — an exact Haar
//!    twirl over the ancilla factors; `{Tbar_i}` is again a valid tester with
//!    the same `rho_A`.
//! 2. `project`: sandwich each `Tbar_i` between the maximally entangled pairs
//!    `|I_{P_lambda}>>` that couple the `P` registers of the AB and ancilla
//!    Schur decompositions, trace out `Q^r_lambda`, and re-expand along
//!    `I_{P_AB,lambda}`:
//!    `Ttil_i = (+)_{lambda |-_s n} I_P (x) tr_{Q^r}(<<I_P| Tbar_i |I_P>>)
//!              / (dimP_lambda dimQ^r_lambda)`, `s = min(r, d1 d2)`.
//! 3. `complete`: `Ttil_bot = rho'_A (x) I_B - sum_i Ttil_i` with `rho'_A` the
//!    permutation average of `rho_A`; positivity of the completion is a
//!    theorem, so a PSD violation is a construction fault.
//!
//! The compiled tester queries the channel itself, and for every channel of
//! Kraus rank <= r reproduces the Haar-dilation-averaged statistics of the
//! original tester exactly.

use crate::channels::{self, Isometry, QuantumChannel};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::rng::Rng;
use crate::schur::{partitions, schur_transform, symmetric_group, SchurTransform};
use crate::tensor::{permutation_matrix, LabeledOperator};
use crate::testers::{a_label, b_label, link_product, ParallelTester, BOT_LABEL};
use crate::tol;
use crate::twirl::exact_twirl;
use ndarray::Array2;
use num_complex::Complex64;
use serde::Serialize;
use std::sync::Arc;

fn anc_label(j: usize) -> String {
    format!("anc{j}")
}

fn out_label(j: usize) -> String {
    format!("O{j}")
}

fn ab_label(j: usize) -> String {
    format!("AB{j}")
}

/// Compiled tester: outcome operators on `A1..An, B1..Bn` (B of dimension
/// `d2`), the completion operator, and the symmetrized input marginal.
#[derive(Debug, Clone)]
pub struct CompiledTester {
    outcomes: Vec<(String, LabeledOperator)>,
    bot: Option<LabeledOperator>,
    rho_a: CMat,
    rho_prime: Option<CMat>,
    n: usize,
    d1: usize,
    d2: usize,
    r: usize,
    s: usize,
}

impl CompiledTester {
    pub fn outcomes(&self) -> &[(String, LabeledOperator)] {
        &self.outcomes
    }

    pub fn bot(&self) -> Option<&LabeledOperator> {
        self.bot.as_ref()
    }

    pub fn rho_prime(&self) -> Option<&CMat> {
        self.rho_prime.as_ref()
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.d1, self.d2, self.r)
    }

    /// The interleave-to-block regrouping used before the AB Schur transform:
    /// position of each original factor of `(A1 O1 .. An On)` in the grouped
    /// order `(A1..An, O1..On)` read per query pair.
    pub fn regroup_permutation(&self) -> Vec<usize> {
        let mut perm = Vec::with_capacity(2 * self.n);
        for j in 0..self.n {
            perm.push(j);
            perm.push(self.n + j);
        }
        perm
    }

    /// View as a parallel tester (outcomes plus the completion), validating
    /// the tester axioms.
    pub fn as_tester(&self) -> Result<ParallelTester> {
        let bot = self
            .bot
            .clone()
            .ok_or_else(|| Error::InvalidTester("compiled tester lacks completion".into()))?;
        let mut outcomes = self.outcomes.clone();
        outcomes.push((BOT_LABEL.to_string(), bot));
        ParallelTester::new(outcomes, self.n, self.d1, self.d2)
    }

    /// Exact outcome distribution (including the completion outcome) on a
    /// channel, computed by direct link products without revalidation.
    pub fn distribution_on(&self, ch: &QuantumChannel) -> Result<Vec<(String, f64)>> {
        let probe = ParallelTester::new(
            vec![(
                "all".into(),
                trivial_sum(self.n, self.d1, self.d2)?,
            )],
            self.n,
            self.d1,
            self.d2,
        )?;
        let choi_n = probe.choi_power(ch)?;
        let mut out = Vec::with_capacity(self.outcomes.len() + 1);
        for (label, op) in &self.outcomes {
            let p = link_product(op, &choi_n)?.expect_scalar()?;
            out.push((label.clone(), p.re));
        }
        if let Some(bot) = &self.bot {
            let p = link_product(bot, &choi_n)?.expect_scalar()?;
            out.push((BOT_LABEL.to_string(), p.re));
        }
        Ok(out)
    }
}

fn trivial_sum(n: usize, d1: usize, d2: usize) -> Result<LabeledOperator> {
    let da = d1.pow(n as u32);
    let db = d2.pow(n as u32);
    let sys = ParallelTester::canonical_systems(n, d1, d2);
    LabeledOperator::square(
        linalg::kron_mat(&linalg::identity(da).mapv(|z| z / da as f64), &linalg::identity(db)),
        sys,
    )
}

/// Stage 1: exact ancilla twirl of every outcome. The result is a valid
/// parallel tester for `ISO_{d1, r*d2}` with the same `rho_A`.
pub fn symmetrize(t: &ParallelTester, r: usize) -> Result<ParallelTester> {
    let n = t.n();
    if t.d_b() % r != 0 {
        return Err(Error::Shape(format!(
            "tester B dimension {} not divisible by ancilla dimension {r}",
            t.d_b()
        )));
    }
    let d2 = t.d_b() / r;
    let st = schur_transform(n, r)?;
    let anc_labels: Vec<String> = (1..=n).map(anc_label).collect();
    let anc_refs: Vec<&str> = anc_labels.iter().map(|s| s.as_str()).collect();
    let mut outcomes = Vec::with_capacity(t.outcomes().len());
    for (label, op) in t.outcomes() {
        let mut split = op.clone();
        for j in 1..=n {
            split = split.split_system(&b_label(j), (&anc_label(j), r), (&out_label(j), d2))?;
        }
        let twirled = exact_twirl(&split, &anc_refs, &st)?;
        let mut merged = twirled;
        for j in 1..=n {
            merged = merged.merge_systems(&anc_label(j), &out_label(j), &b_label(j))?;
        }
        outcomes.push((label.clone(), merged));
    }
    ParallelTester::new(outcomes, n, t.d_a(), t.d_b())
}

struct ProjectionContext {
    st_ab: Arc<SchurTransform>,
    st_anc: Arc<SchurTransform>,
    n: usize,
    d1: usize,
    d2: usize,
    r: usize,
    s: usize,
}

impl ProjectionContext {
    fn new(n: usize, d1: usize, d2: usize, r: usize) -> Result<Self> {
        let st_ab = schur_transform(n, d1 * d2)?;
        let st_anc = schur_transform(n, r)?;
        Ok(ProjectionContext {
            st_ab,
            st_anc,
            n,
            d1,
            d2,
            r,
            s: r.min(d1 * d2),
        })
    }

    /// Reorders a tester operator on `A1..An, B1..Bn` (B of dim r*d2) into the
    /// `[AB1..ABn, anc1..ancn]` frame with each `ABj = Aj (x) Oj` merged.
    fn to_grouped_frame(&self, op: &LabeledOperator) -> Result<LabeledOperator> {
        let n = self.n;
        let mut split = op.clone();
        for j in 1..=n {
            split = split.split_system(
                &b_label(j),
                (&anc_label(j), self.r),
                (&out_label(j), self.d2),
            )?;
        }
        let mut order: Vec<String> = Vec::with_capacity(3 * n);
        for j in 1..=n {
            order.push(a_label(j));
            order.push(out_label(j));
        }
        order.extend((1..=n).map(anc_label));
        let order_refs: Vec<&str> = order.iter().map(|s| s.as_str()).collect();
        let mut grouped = split.reorder_systems(&order_refs)?;
        for j in 1..=n {
            grouped = grouped.merge_systems(&a_label(j), &out_label(j), &ab_label(j))?;
        }
        Ok(grouped)
    }

    /// `tr_{Q^r_lambda}( <<I_P| M |I_P>> )` for every `lambda |-_s n`, where
    /// `M` is given in the `[AB^n, anc^n]` frame. Returns operators on
    /// `Q^{d1d2}_lambda`.
    fn sandwich_blocks(&self, grouped: &LabeledOperator) -> Result<Vec<(usize, CMat)>> {
        let anc_total = self.r.pow(self.n as u32);
        let u_full = linalg::kron_mat(self.st_ab.unitary(), self.st_anc.unitary());
        let y = u_full.dot(grouped.mat()).dot(&linalg::dagger(&u_full));
        let mut blocks = Vec::new();
        for lambda in partitions(self.n, self.s) {
            let ba = self
                .st_ab
                .block_for(&lambda)
                .ok_or_else(|| Error::SchurLayout(format!("{lambda} missing in AB layout")))?;
            let bb = self
                .st_anc
                .block_for(&lambda)
                .ok_or_else(|| Error::SchurLayout(format!("{lambda} missing in anc layout")))?;
            debug_assert_eq!(ba.dim_p, bb.dim_p);
            let dim_p = ba.dim_p;
            let (qa, qr) = (ba.dim_q, bb.dim_q);
            // Sandwich along both P registers, then trace the ancilla Q.
            let mut m: CMat = Array2::zeros((qa, qa));
            for q1 in 0..qa {
                for q2 in 0..qa {
                    let mut acc = Complex64::ZERO;
                    for c in 0..qr {
                        for t in 0..dim_p {
                            for t2 in 0..dim_p {
                                let row = (ba.offset + t * qa + q1) * anc_total
                                    + (bb.offset + t * qr + c);
                                let col = (ba.offset + t2 * qa + q2) * anc_total
                                    + (bb.offset + t2 * qr + c);
                                acc += y[(row, col)];
                            }
                        }
                    }
                    m[(q1, q2)] = acc;
                }
            }
            let idx = self
                .st_ab
                .layout()
                .iter()
                .position(|b| b.lambda == lambda)
                .expect("present");
            blocks.push((idx, m));
        }
        Ok(blocks)
    }

    /// Assembles `(+)_lambda I_P (x) N_lambda / (dimP dimQ^r)` in the AB Schur
    /// basis and maps it back to the computational basis on `A,B` systems.
    fn expand(&self, blocks: &[(usize, CMat)]) -> Result<LabeledOperator> {
        let total = (self.d1 * self.d2).pow(self.n as u32);
        let mut z: CMat = Array2::zeros((total, total));
        for (idx, m) in blocks {
            let ba = &self.st_ab.layout()[*idx];
            let lambda = &ba.lambda;
            let bb = self.st_anc.block_for(lambda).expect("anc block");
            let weight = 1.0 / (ba.dim_p as f64 * bb.dim_q as f64);
            for t in 0..ba.dim_p {
                for q1 in 0..ba.dim_q {
                    for q2 in 0..ba.dim_q {
                        z[(
                            ba.offset + t * ba.dim_q + q1,
                            ba.offset + t * ba.dim_q + q2,
                        )] = m[(q1, q2)] * weight;
                    }
                }
            }
        }
        let x = self.st_ab.from_schur(&z);
        // Wrap on merged AB systems, split back to (A, B), reorder canonical.
        let ab_systems: Vec<crate::tensor::System> = (1..=self.n)
            .map(|j| crate::tensor::System::new(ab_label(j), self.d1 * self.d2))
            .collect();
        let mut op = LabeledOperator::square(x, ab_systems)?;
        for j in 1..=self.n {
            op = op.split_system(&ab_label(j), (&a_label(j), self.d1), (&b_label(j), self.d2))?;
        }
        let canonical: Vec<String> = (1..=self.n)
            .map(a_label)
            .chain((1..=self.n).map(b_label))
            .collect();
        let refs: Vec<&str> = canonical.iter().map(|s| s.as_str()).collect();
        op.reorder_systems(&refs)
    }
}

/// Stage 2: project the symmetrized tester onto channel-access form. The
/// output lacks the completion outcome; see [`complete`].
pub fn project(tbar: &ParallelTester, r: usize, d1: usize, d2: usize) -> Result<CompiledTester> {
    let n = tbar.n();
    if tbar.d_a() != d1 || tbar.d_b() != r * d2 {
        return Err(Error::Shape(format!(
            "tester dims ({}, {}) do not match (d1, r*d2) = ({d1}, {})",
            tbar.d_a(),
            tbar.d_b(),
            r * d2
        )));
    }
    let ctx = ProjectionContext::new(n, d1, d2, r)?;
    let mut outcomes = Vec::with_capacity(tbar.outcomes().len());
    for (label, op) in tbar.outcomes() {
        let grouped = ctx.to_grouped_frame(op)?;
        let blocks = ctx.sandwich_blocks(&grouped)?;
        let projected = ctx.expand(&blocks)?;
        outcomes.push((label.clone(), projected));
    }
    Ok(CompiledTester {
        outcomes,
        bot: None,
        rho_a: tbar.rho_a().clone(),
        rho_prime: None,
        n,
        d1,
        d2,
        r,
        s: ctx.s,
    })
}

/// Stage 3: compute `rho'_A` by explicit permutation average and append the
/// completion operator `Ttil_bot = rho'_A (x) I_B - sum_i Ttil_i`. A PSD
/// violation beyond tolerance is a construction fault and fails hard.
pub fn complete(ct: CompiledTester) -> Result<CompiledTester> {
    let n = ct.n;
    let group = symmetric_group(n);
    let da = ct.d1.pow(n as u32);
    let mut rho_prime: CMat = Array2::zeros((da, da));
    for (perm, _) in &group {
        let p = permutation_matrix(&vec![ct.d1; n], perm)?;
        rho_prime += &p.dot(&ct.rho_a).dot(&linalg::dagger(&p));
    }
    rho_prime.mapv_inplace(|z| z / group.len() as f64);

    let db = ct.d2.pow(n as u32);
    let target = linalg::kron_mat(&rho_prime, &linalg::identity(db));
    let sys = ParallelTester::canonical_systems(n, ct.d1, ct.d2);
    let mut bot = LabeledOperator::square(target, sys)?;
    for (_, op) in &ct.outcomes {
        bot = bot.sub(op)?;
    }
    let min = linalg::min_eig(bot.mat())?;
    if min < tol::PSD_MIN_EIG {
        return Err(Error::NotPsd(min));
    }
    Ok(CompiledTester {
        bot: Some(bot),
        rho_prime: Some(rho_prime),
        ..ct
    })
}

/// Full pipeline: symmetrize, project, complete. The ancilla dimension `r`
/// must divide the tester's per-query output dimension.
pub fn compile(t: &ParallelTester, r: usize) -> Result<CompiledTester> {
    if t.d_b() % r != 0 {
        return Err(Error::Shape(format!(
            "tester B dimension {} not divisible by r={r}",
            t.d_b()
        )));
    }
    let d2 = t.d_b() / r;
    let tbar = symmetrize(t, r)?;
    let ct = project(&tbar, r, t.d_a(), d2)?;
    complete(ct)
}

/// Evaluates `Tbar_i * C_V^(x)n` through the Schur block formula:
/// `sum_lambda tr( tr_{Q^r}(<<I_P|Tbar_i^T|I_P>>) . tr_{Q^r}(|V_l><V_l|) )
///  / dimQ^r_lambda`,
/// with `|V_lambda>` from the tensor-power decomposition of `vec(V)`. This is
/// an exact identity against the direct link-product route.
pub fn prob_via_blocks(tbar_i: &LabeledOperator, v: &Isometry, r: usize, n: usize) -> Result<f64> {
    let rd2 = v.d_out();
    if rd2 % r != 0 {
        return Err(Error::Shape(format!(
            "isometry output dim {rd2} not divisible by r={r}"
        )));
    }
    let d2 = rd2 / r;
    let d1 = v.d_in();
    let ctx = ProjectionContext::new(n, d1, d2, r)?;
    let grouped = ctx.to_grouped_frame(&tbar_i.transpose_full())?;
    let blocks = ctx.sandwich_blocks(&grouped)?;

    // vec(V) lives on (anc, out, in); regroup to ((in, out), anc).
    let vv = crate::tensor::vec_flatten(v.mat());
    let psi = crate::tensor::permute_tensor_factors(&vv, &[r, d2, d1], &[2, 1, 0])?;
    let dec = crate::schur::bipartite_power_decompose(&psi, d1 * d2, r, n)?;

    let mut total = 0.0;
    for (idx, m) in &blocks {
        let lambda = &ctx.st_ab.layout()[*idx].lambda;
        let comp = dec
            .component_for(lambda)
            .ok_or_else(|| Error::SchurLayout(format!("{lambda} missing in decomposition")))?;
        let k = comp.trace_out_q2();
        let dim_qr = ctx.st_anc.block_for(lambda).expect("anc block").dim_q;
        let prod: Complex64 = m.dot(&k).diag().iter().sum();
        total += prod.re / dim_qr as f64;
    }
    Ok(total)
}

#[derive(Debug, Clone, Serialize)]
pub struct OutcomeCheck {
    pub label: String,
    /// Exact probability from the compiled tester on the channel.
    pub exact: f64,
    /// Monte-Carlo mean of the original tester over Haar dilations.
    pub mc_mean: f64,
    pub mc_stderr: f64,
    pub z: f64,
    /// Block formula value (Schur route) on the base dilation.
    pub block_formula: f64,
    /// Direct link-product value of the symmetrized tester on the base
    /// dilation.
    pub link_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidityCheck {
    pub min_eigenvalue: f64,
    pub hermiticity_dev: f64,
    pub normalization_dev: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremReport {
    pub n: usize,
    pub d1: usize,
    pub d2: usize,
    pub r: usize,
    pub s: usize,
    pub mc_samples: usize,
    /// Interleave-to-block regrouping recorded for reproducibility.
    pub regroup_permutation: Vec<usize>,
    /// Blocks (lambda, dimP, dimQ_ab, dimQ_anc) used by the projection.
    pub blocks: Vec<(String, usize, usize, usize)>,
    pub outcomes: Vec<OutcomeCheck>,
    pub validity: ValidityCheck,
    pub block_identity_max_dev: f64,
    pub max_abs_z: f64,
    pub pass: bool,
}

/// Validates the compiled tester, compares its exact probabilities against a
/// Monte-Carlo Haar-dilation average of the original tester, and checks the
/// exact Schur block formula against the direct link product on the base
/// dilation. PASS requires validity, all |z| <= 5, and the exact identities
/// to hold to 1e-8.
pub fn verify_theorem(
    t: &ParallelTester,
    compiled: &CompiledTester,
    ch: &QuantumChannel,
    mc_samples: usize,
    rng: &mut Rng,
) -> Result<TheoremReport> {
    let n = compiled.n;
    let (d1, d2, r) = (compiled.d1, compiled.d2, compiled.r);
    if ch.d_in() != d1 || ch.d_out() != d2 {
        return Err(Error::Shape(format!(
            "channel is {}->{}, compiled tester expects {d1}->{d2}",
            ch.d_in(),
            ch.d_out()
        )));
    }

    // Validity: Hermiticity, PSD, and normalization against rho'_A (x) I_B.
    let mut min_eig = f64::INFINITY;
    let mut herm = 0.0f64;
    let sys = ParallelTester::canonical_systems(n, d1, d2);
    let mut total = LabeledOperator::square(
        Array2::zeros((
            (d1 * d2).pow(n as u32),
            (d1 * d2).pow(n as u32),
        )),
        sys.clone(),
    )?;
    for (_, op) in &compiled.outcomes {
        min_eig = min_eig.min(linalg::min_eig(op.mat())?);
        herm = herm.max(linalg::herm_dev(op.mat()));
        total = total.add(op)?;
    }
    if let Some(bot) = &compiled.bot {
        min_eig = min_eig.min(linalg::min_eig(bot.mat())?);
        herm = herm.max(linalg::herm_dev(bot.mat()));
        total = total.add(bot)?;
    }
    let norm_dev = match &compiled.rho_prime {
        Some(rho_prime) => {
            let db = d2.pow(n as u32);
            let expect = linalg::kron_mat(rho_prime, &linalg::identity(db));
            linalg::max_abs_diff(total.mat(), &expect)
        }
        None => f64::INFINITY,
    };
    let validity = ValidityCheck {
        min_eigenvalue: min_eig,
        hermiticity_dev: herm,
        normalization_dev: norm_dev,
        ok: min_eig >= tol::PSD_MIN_EIG && herm <= 1e-8 && norm_dev <= tol::TESTER_NORM,
    };

    // Exact probabilities of the compiled tester.
    let exact = compiled.distribution_on(ch)?;

    // Exact identities on the base dilation: block formula vs link product vs
    // compiled probability.
    let tbar = symmetrize(t, r)?;
    let v0 = channels::fixed_dilation(ch, r)?;
    let iso_channel = QuantumChannel::from_isometry(&v0);
    let link_values = tbar.outcome_distribution(&iso_channel)?;
    let mut block_dev = 0.0f64;
    let mut per_outcome_exact: Vec<(String, f64, f64, f64)> = Vec::new();
    for ((label, op), (_, link_p)) in tbar.outcomes().iter().zip(link_values.iter()) {
        let block_p = prob_via_blocks(op, &v0, r, n)?;
        let exact_p = exact
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, p)| *p)
            .ok_or_else(|| Error::InvalidTester(format!("outcome `{label}` missing")))?;
        block_dev = block_dev
            .max((block_p - link_p).abs())
            .max((exact_p - link_p).abs());
        per_outcome_exact.push((label.clone(), exact_p, block_p, *link_p));
    }

    // Monte-Carlo over Haar dilations of the original tester.
    let labels: Vec<String> = t.outcomes().iter().map(|(l, _)| l.clone()).collect();
    let mut mean = vec![0.0f64; labels.len()];
    let mut m2 = vec![0.0f64; labels.len()];
    for k in 0..mc_samples {
        let w = channels::sample_random_dilation(ch, r, rng)?;
        let wch = QuantumChannel::from_isometry(&w);
        let probs = t.outcome_distribution(&wch)?;
        let kf = (k + 1) as f64;
        for (i, (_, p)) in probs.iter().enumerate() {
            let delta = p - mean[i];
            mean[i] += delta / kf;
            m2[i] += delta * (p - mean[i]);
        }
    }
    let stderr: Vec<f64> = m2
        .iter()
        .map(|&v| (v / (mc_samples as f64 - 1.0) / mc_samples as f64).sqrt())
        .collect();

    let mut outcomes = Vec::with_capacity(labels.len());
    let mut max_abs_z = 0.0f64;
    for (i, label) in labels.iter().enumerate() {
        let (_, exact_p, block_p, link_p) = per_outcome_exact
            .iter()
            .find(|(l, _, _, _)| l == label)
            .expect("labels align")
            .clone();
        let se = stderr[i].max(1e-12);
        let z = (exact_p - mean[i]) / se;
        max_abs_z = max_abs_z.max(z.abs());
        outcomes.push(OutcomeCheck {
            label: label.clone(),
            exact: exact_p,
            mc_mean: mean[i],
            mc_stderr: stderr[i],
            z,
            block_formula: block_p,
            link_value: link_p,
        });
    }

    let blocks = {
        let ctx = ProjectionContext::new(n, d1, d2, r)?;
        partitions(n, ctx.s)
            .iter()
            .map(|lam| {
                let ba = ctx.st_ab.block_for(lam).expect("ab block");
                let bb = ctx.st_anc.block_for(lam).expect("anc block");
                (lam.to_string(), ba.dim_p, ba.dim_q, bb.dim_q)
            })
            .collect()
    };

    let pass = validity.ok && max_abs_z <= 5.0 && block_dev <= tol::EXACT_IDENTITY;
    Ok(TheoremReport {
        n,
        d1,
        d2,
        r,
        s: compiled.s,
        mc_samples,
        regroup_permutation: compiled.regroup_permutation(),
        blocks,
        outcomes,
        validity,
        block_identity_max_dev: block_dev,
        max_abs_z,
        pass,
    })
}

/// Perturbs one entry of one outcome operator; the negative control for
/// [`verify_theorem`], which must then fail.
pub fn corrupt(ct: &CompiledTester, amount: f64) -> CompiledTester {
    let mut out = ct.clone();
    if let Some((_, op)) = out.outcomes.first_mut() {
        let mut m = op.mat().clone();
        let last = m.dim().1 - 1;
        m[(0, last)] += Complex64::new(amount, 0.0);
        *op = LabeledOperator::square(m, op.rows().to_vec()).expect("same shape");
    }
    out
}
