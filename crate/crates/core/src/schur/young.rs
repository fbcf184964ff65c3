//! Partitions, standard/semistandard tableaux, hook-length and Weyl dimension
//! formulas, and the Young orthogonal representation of the symmetric group.

use crate::error::{Error, Result};
use ndarray::Array2;

/// Partition of `n` with weakly decreasing positive parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct YoungDiagram {
    parts: Vec<usize>,
}

impl YoungDiagram {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() || parts.iter().any(|&p| p == 0) {
            return Err(Error::Shape("partition parts must be positive".into()));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Shape("partition parts must be weakly decreasing".into()));
        }
        Ok(YoungDiagram { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn rows(&self) -> usize {
        self.parts.len()
    }
}

impl std::fmt::Display for YoungDiagram {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// All partitions of `n` with at most `max_rows` rows, in descending
/// lexicographic order.
pub fn partitions(n: usize, max_rows: usize) -> Vec<YoungDiagram> {
    fn rec(n: usize, rows_left: usize, max_part: usize, prefix: &mut Vec<usize>, out: &mut Vec<YoungDiagram>) {
        if n == 0 {
            out.push(YoungDiagram {
                parts: prefix.clone(),
            });
            return;
        }
        if rows_left == 0 {
            return;
        }
        let hi = n.min(max_part);
        for p in (1..=hi).rev() {
            // Remaining must fit in rows_left-1 rows of size <= p.
            if n - p > (rows_left - 1) * p {
                continue;
            }
            prefix.push(p);
            rec(n - p, rows_left - 1, p, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, max_rows, n, &mut Vec::new(), &mut out);
    out
}

/// Standard Young tableau: cells filled with 1..n increasing along rows and
/// columns. Ordered canonically by their row-reading words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StandardTableau {
    rows: Vec<Vec<usize>>,
}

impl StandardTableau {
    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    /// (row, col) of entry `e`, 0-based.
    pub fn position(&self, e: usize) -> Option<(usize, usize)> {
        for (r, row) in self.rows.iter().enumerate() {
            if let Some(c) = row.iter().position(|&x| x == e) {
                return Some((r, c));
            }
        }
        None
    }

    /// Content (col - row) of the cell holding entry `e`.
    pub fn content(&self, e: usize) -> i64 {
        let (r, c) = self.position(e).expect("entry present");
        c as i64 - r as i64
    }

    fn reading_word(&self) -> Vec<usize> {
        self.rows.iter().flatten().cloned().collect()
    }

    /// Swaps entries `k` and `k+1`; returns None if the result is not standard.
    pub fn swapped(&self, k: usize) -> Option<StandardTableau> {
        let mut rows = self.rows.clone();
        let (r1, c1) = self.position(k)?;
        let (r2, c2) = self.position(k + 1)?;
        rows[r1][c1] = k + 1;
        rows[r2][c2] = k;
        let t = StandardTableau { rows };
        if t.is_standard() {
            Some(t)
        } else {
            None
        }
    }

    fn is_standard(&self) -> bool {
        for row in &self.rows {
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return false;
            }
        }
        for r in 1..self.rows.len() {
            for c in 0..self.rows[r].len() {
                if self.rows[r - 1][c] >= self.rows[r][c] {
                    return false;
                }
            }
        }
        true
    }
}

/// All standard tableaux of shape `lambda`, sorted by row-reading word.
pub fn standard_tableaux(lambda: &YoungDiagram) -> Vec<StandardTableau> {
    let n = lambda.n();
    let shape = lambda.parts();
    let mut out = Vec::new();
    let mut filled: Vec<Vec<usize>> = shape.iter().map(|&len| vec![0; len]).collect();
    // Row fill counts.
    fn rec(
        next: usize,
        n: usize,
        shape: &[usize],
        counts: &mut Vec<usize>,
        filled: &mut Vec<Vec<usize>>,
        out: &mut Vec<StandardTableau>,
    ) {
        if next > n {
            out.push(StandardTableau {
                rows: filled.clone(),
            });
            return;
        }
        for r in 0..shape.len() {
            let c = counts[r];
            if c >= shape[r] {
                continue;
            }
            // Cell above must already be filled (column-increasing).
            if r > 0 && counts[r - 1] <= c {
                continue;
            }
            filled[r][c] = next;
            counts[r] += 1;
            rec(next + 1, n, shape, counts, filled, out);
            counts[r] -= 1;
        }
    }
    let mut counts = vec![0usize; shape.len()];
    rec(1, n, shape, &mut counts, &mut filled, &mut out);
    out.sort_by_key(|t| t.reading_word());
    out
}

/// dim P_lambda by the hook length formula.
pub fn dim_sym(lambda: &YoungDiagram) -> usize {
    let parts = lambda.parts();
    let n = lambda.n();
    let col_len = |c: usize| parts.iter().filter(|&&p| p > c).count();
    let mut num: u128 = 1;
    for k in 2..=n {
        num *= k as u128;
    }
    let mut den: u128 = 1;
    for (r, &len) in parts.iter().enumerate() {
        for c in 0..len {
            let arm = len - c - 1;
            let leg = col_len(c) - r - 1;
            den *= (arm + leg + 1) as u128;
        }
    }
    (num / den) as usize
}

/// dim Q^d_lambda by the Weyl dimension formula (0 when rows exceed `d`).
pub fn dim_unitary(lambda: &YoungDiagram, d: usize) -> usize {
    if lambda.rows() > d {
        return 0;
    }
    let mut padded: Vec<i128> = lambda.parts().iter().map(|&p| p as i128).collect();
    padded.resize(d, 0);
    let mut num: i128 = 1;
    let mut den: i128 = 1;
    for i in 0..d {
        for j in i + 1..d {
            num *= padded[i] - padded[j] + j as i128 - i as i128;
            den *= j as i128 - i as i128;
        }
    }
    (num / den) as usize
}

/// Number of semistandard tableaux of shape `lambda` with entries in 1..=d
/// (weakly increasing rows, strictly increasing columns). Brute-force oracle
/// for `dim_unitary`.
pub fn count_semistandard(lambda: &YoungDiagram, d: usize) -> usize {
    let shape = lambda.parts().to_vec();
    fn rec(shape: &[usize], d: usize, r: usize, c: usize, grid: &mut Vec<Vec<usize>>) -> usize {
        if r == shape.len() {
            return 1;
        }
        let (nr, nc) = if c + 1 < shape[r] {
            (r, c + 1)
        } else {
            (r + 1, 0)
        };
        let lo = {
            let mut lo = 1;
            if c > 0 {
                lo = lo.max(grid[r][c - 1]);
            }
            if r > 0 {
                lo = lo.max(grid[r - 1][c] + 1);
            }
            lo
        };
        let mut total = 0;
        for v in lo..=d {
            grid[r][c] = v;
            total += rec(shape, d, nr, nc, grid);
        }
        total
    }
    let mut grid: Vec<Vec<usize>> = shape.iter().map(|&len| vec![0; len]).collect();
    if shape.is_empty() {
        return 1;
    }
    rec(&shape, d, 0, 0, &mut grid)
}

/// Young orthogonal (Young-Yamanouchi) matrix of the adjacent transposition
/// `(k, k+1)` on the standard-tableaux basis; real orthogonal symmetric.
pub fn young_orthogonal_matrix(lambda: &YoungDiagram, k: usize) -> Result<Array2<f64>> {
    let n = lambda.n();
    if k < 1 || k + 1 > n {
        return Err(Error::Shape(format!(
            "transposition ({k},{}) out of range for n={n}",
            k + 1
        )));
    }
    let tabs = standard_tableaux(lambda);
    let m = tabs.len();
    let mut mat = Array2::zeros((m, m));
    for (a, t) in tabs.iter().enumerate() {
        let dist = (t.content(k + 1) - t.content(k)) as f64;
        mat[(a, a)] = 1.0 / dist;
        if dist.abs() > 1.0 {
            let partner = t.swapped(k).expect("axial distance > 1 implies standard swap");
            let b = tabs
                .iter()
                .position(|u| *u == partner)
                .expect("partner tableau in list");
            mat[(b, a)] = (1.0 - 1.0 / (dist * dist)).sqrt();
        }
    }
    Ok(mat)
}

/// Permutations of {0..n-1} in one-line notation, each with a word in the
/// adjacent-transposition generators (1-based: entry `k` means swap of values
/// k and k+1) such that `pi = s_{w1} o s_{w2} o ... o s_{wm}` and hence
/// `p(pi) = p(s_{w1}) ... p(s_{wm})`.
pub fn symmetric_group(n: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let id: Vec<usize> = (0..n).collect();
    let mut seen = std::collections::HashMap::new();
    let mut queue = std::collections::VecDeque::new();
    seen.insert(id.clone(), Vec::<usize>::new());
    queue.push_back(id);
    while let Some(p) = queue.pop_front() {
        let word = seen[&p].clone();
        for k in 0..n.saturating_sub(1) {
            // Right-multiplying by s_k swaps positions k, k+1 of the one-line
            // notation: (p o s_k)(i) = p(s_k(i)).
            let mut q = p.clone();
            q.swap(k, k + 1);
            if !seen.contains_key(&q) {
                let mut w = word.clone();
                w.push(k + 1);
                seen.insert(q.clone(), w);
                queue.push_back(q);
            }
        }
    }
    let mut out: Vec<(Vec<usize>, Vec<usize>)> = seen.into_iter().collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// Irrep matrix `p_lambda(pi)` from a generator word.
pub fn irrep_matrix(lambda: &YoungDiagram, word: &[usize]) -> Result<Array2<f64>> {
    let m = standard_tableaux(lambda).len();
    let mut out = Array2::eye(m);
    for &k in word {
        let gen = young_orthogonal_matrix(lambda, k)?;
        out = out.dot(&gen);
    }
    Ok(out)
}
