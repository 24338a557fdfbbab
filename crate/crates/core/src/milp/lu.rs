//! Sparse LU factors of a simplex basis with product-form updates.
//!
//! `B = L U` up to row and column permutations, found by Markowitz pivoting
//! with a row-relative threshold. A basis change appends an eta column so
//! that `B_new⁻¹ = E⁻¹ B⁻¹`; the caller refactors after a bounded number of
//! them.

/// Pivot must be at least this fraction of the largest entry in its row.
const THRESHOLD: f64 = 0.1;
const ABS_PIVOT_TOL: f64 = 1e-11;
/// Columns or rows examined per pivot search once a candidate exists.
const SEARCH_LIMIT: usize = 4;
const ETA_DROP: f64 = 1e-14;

/// Basis positions that got no pivot, and rows that got none.
#[derive(Debug)]
pub(crate) struct Singular {
    pub positions: Vec<usize>,
    pub rows: Vec<usize>,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct BasisFactor {
    m: usize,
    // L as column etas in pivot order
    l_pivot: Vec<usize>,
    l_start: Vec<usize>,
    l_index: Vec<usize>,
    l_value: Vec<f64>,
    // U as one row per pivot, in pivot order; entries are indexed by position
    u_row: Vec<usize>,
    u_col: Vec<usize>,
    u_diag: Vec<f64>,
    u_start: Vec<usize>,
    u_index: Vec<usize>,
    u_value: Vec<f64>,
    // product-form updates
    eta_pos: Vec<usize>,
    eta_diag: Vec<f64>,
    eta_start: Vec<usize>,
    eta_index: Vec<usize>,
    eta_value: Vec<f64>,
}

struct Active {
    rows: Vec<Vec<(usize, f64)>>,
    cols: Vec<Vec<usize>>,
    row_live: Vec<bool>,
    col_live: Vec<bool>,
    row_bucket: Vec<Vec<usize>>,
    col_bucket: Vec<Vec<usize>>,
}

impl Active {
    fn entry(&self, i: usize, q: usize) -> (f64, f64) {
        let mut v = 0.0;
        let mut max = 0.0f64;
        for &(j, a) in &self.rows[i] {
            if j == q {
                v = a;
            }
            max = max.max(a.abs());
        }
        (v, max)
    }

    fn eligible(v: f64, row_max: f64) -> bool {
        v.abs() > ABS_PIVOT_TOL && v.abs() >= THRESHOLD * row_max
    }

    /// Markowitz search over the sparsest columns and rows.
    fn search(&mut self) -> Option<(usize, usize)> {
        let m = self.rows.len();
        // (cost, |pivot|, row, col)
        let mut best: Option<(usize, f64, usize, usize)> = None;
        let consider = |best: &mut Option<(usize, f64, usize, usize)>, cost: usize, v: f64, i: usize, q: usize| {
            let better = match best {
                None => true,
                Some((c, a, _, _)) => cost < *c || (cost == *c && v.abs() > *a),
            };
            if better {
                *best = Some((cost, v.abs(), i, q));
            }
        };
        let mut examined = 0;
        for cnt in 1..=m {
            let mut k = self.col_bucket[cnt].len();
            while k > 0 {
                k -= 1;
                let q = self.col_bucket[cnt][k];
                if !self.col_live[q] || self.cols[q].len() != cnt {
                    self.col_bucket[cnt].swap_remove(k);
                    continue;
                }
                for &i in &self.cols[q] {
                    let (v, max) = self.entry(i, q);
                    if Self::eligible(v, max) {
                        consider(&mut best, (self.rows[i].len() - 1) * (cnt - 1), v, i, q);
                    }
                }
                examined += 1;
                if let Some((c, ..)) = best {
                    if c <= (cnt - 1) * (cnt - 1) || examined >= SEARCH_LIMIT {
                        return best.map(|(_, _, i, q)| (i, q));
                    }
                }
            }
            let mut k = self.row_bucket[cnt].len();
            while k > 0 {
                k -= 1;
                let i = self.row_bucket[cnt][k];
                if !self.row_live[i] || self.rows[i].len() != cnt {
                    self.row_bucket[cnt].swap_remove(k);
                    continue;
                }
                let max = self.rows[i].iter().fold(0.0f64, |a, e| a.max(e.1.abs()));
                for &(q, v) in &self.rows[i] {
                    if Self::eligible(v, max) {
                        consider(&mut best, (cnt - 1) * (self.cols[q].len() - 1), v, i, q);
                    }
                }
                examined += 1;
                if let Some((c, ..)) = best {
                    if c <= (cnt - 1) * (cnt - 1) || examined >= SEARCH_LIMIT {
                        return best.map(|(_, _, i, q)| (i, q));
                    }
                }
            }
            if let Some((c, ..)) = best {
                if c <= cnt * cnt {
                    break;
                }
            }
        }
        if best.is_none() {
            // no entry passes the row threshold: take the largest left
            for i in (0..m).filter(|&i| self.row_live[i]) {
                for &(q, v) in &self.rows[i] {
                    if v.abs() > ABS_PIVOT_TOL && best.is_none_or(|b| v.abs() > b.1) {
                        best = Some((0, v.abs(), i, q));
                    }
                }
            }
        }
        best.map(|(_, _, i, q)| (i, q))
    }
}

impl BasisFactor {
    /// Factors the basis whose column at position `q` is `cols[q]`, given as
    /// `(row, value)` pairs without duplicates.
    pub(crate) fn factorize(m: usize, cols: &[Vec<(usize, f64)>]) -> Result<Self, Singular> {
        debug_assert_eq!(cols.len(), m);
        let mut a = Active {
            rows: vec![Vec::new(); m],
            cols: vec![Vec::new(); m],
            row_live: vec![true; m],
            col_live: vec![true; m],
            row_bucket: vec![Vec::new(); m + 1],
            col_bucket: vec![Vec::new(); m + 1],
        };
        for (q, col) in cols.iter().enumerate() {
            for &(i, v) in col {
                if v != 0.0 {
                    a.rows[i].push((q, v));
                    a.cols[q].push(i);
                }
            }
        }
        for q in 0..m {
            a.col_bucket[a.cols[q].len()].push(q);
        }
        for i in 0..m {
            a.row_bucket[a.rows[i].len()].push(i);
        }

        let mut f = BasisFactor {
            m,
            l_start: vec![0],
            u_start: vec![0],
            eta_start: vec![0],
            ..Default::default()
        };
        let mut slot = vec![usize::MAX; m];
        let mut pivots = 0;
        while pivots < m {
            let Some((p, q)) = a.search() else { break };
            pivots += 1;
            let prow = std::mem::take(&mut a.rows[p]);
            a.row_live[p] = false;
            a.col_live[q] = false;
            let piv = prow.iter().find(|e| e.0 == q).expect("pivot in its row").1;
            for &(j, _) in &prow {
                let c = &mut a.cols[j];
                if let Some(k) = c.iter().position(|&r| r == p) {
                    c.swap_remove(k);
                }
            }

            f.u_row.push(p);
            f.u_col.push(q);
            f.u_diag.push(piv);
            for &(j, v) in &prow {
                if j != q {
                    f.u_index.push(j);
                    f.u_value.push(v);
                }
            }
            f.u_start.push(f.u_index.len());

            f.l_pivot.push(p);
            let below = std::mem::take(&mut a.cols[q]);
            for &i in &below {
                let row = &mut a.rows[i];
                let k = row.iter().position(|e| e.0 == q).expect("column pattern matches rows");
                let l = row.swap_remove(k).1 / piv;
                f.l_index.push(i);
                f.l_value.push(l);
                for (k, &(j, _)) in row.iter().enumerate() {
                    slot[j] = k;
                }
                for &(j, v) in &prow {
                    if j == q {
                        continue;
                    }
                    match slot[j] {
                        usize::MAX => {
                            row.push((j, -l * v));
                            a.cols[j].push(i);
                        }
                        k => row[k].1 -= l * v,
                    }
                }
                for &(j, _) in row.iter() {
                    slot[j] = usize::MAX;
                }
                a.row_bucket[row.len()].push(i);
            }
            f.l_start.push(f.l_index.len());
            for &(j, _) in &prow {
                if j != q {
                    a.col_bucket[a.cols[j].len()].push(j);
                }
            }
        }
        if pivots < m {
            return Err(Singular {
                positions: (0..m).filter(|&q| a.col_live[q]).collect(),
                rows: (0..m).filter(|&i| a.row_live[i]).collect(),
            });
        }
        Ok(f)
    }

    pub(crate) fn num_updates(&self) -> usize {
        self.eta_pos.len()
    }

    pub(crate) fn update_nonzeros(&self) -> usize {
        self.eta_index.len()
    }

    pub(crate) fn factor_nonzeros(&self) -> usize {
        self.l_index.len() + self.u_index.len() + self.m
    }

    /// Solves `B x = v`; `v` is indexed by row, the result by position.
    pub(crate) fn ftran(&self, v: &mut Vec<f64>) {
        for k in 0..self.l_pivot.len() {
            let vp = v[self.l_pivot[k]];
            if vp != 0.0 {
                for t in self.l_start[k]..self.l_start[k + 1] {
                    v[self.l_index[t]] -= self.l_value[t] * vp;
                }
            }
        }
        let mut x = vec![0.0; self.m];
        for k in (0..self.u_row.len()).rev() {
            let mut s = v[self.u_row[k]];
            for t in self.u_start[k]..self.u_start[k + 1] {
                s -= self.u_value[t] * x[self.u_index[t]];
            }
            x[self.u_col[k]] = s / self.u_diag[k];
        }
        for e in 0..self.eta_pos.len() {
            let r = self.eta_pos[e];
            if x[r] != 0.0 {
                let xr = x[r] / self.eta_diag[e];
                x[r] = xr;
                for t in self.eta_start[e]..self.eta_start[e + 1] {
                    x[self.eta_index[t]] -= self.eta_value[t] * xr;
                }
            }
        }
        *v = x;
    }

    /// Solves `Bᵀ y = c`; `c` is indexed by position, the result by row.
    pub(crate) fn btran(&self, c: &mut Vec<f64>) {
        for e in (0..self.eta_pos.len()).rev() {
            let r = self.eta_pos[e];
            let mut s = c[r];
            for t in self.eta_start[e]..self.eta_start[e + 1] {
                s -= self.eta_value[t] * c[self.eta_index[t]];
            }
            c[r] = s / self.eta_diag[e];
        }
        let mut z = vec![0.0; self.m];
        for k in 0..self.u_row.len() {
            let zp = c[self.u_col[k]] / self.u_diag[k];
            z[self.u_row[k]] = zp;
            if zp != 0.0 {
                for t in self.u_start[k]..self.u_start[k + 1] {
                    c[self.u_index[t]] -= self.u_value[t] * zp;
                }
            }
        }
        for k in (0..self.l_pivot.len()).rev() {
            let mut s = 0.0;
            for t in self.l_start[k]..self.l_start[k + 1] {
                s += self.l_value[t] * z[self.l_index[t]];
            }
            z[self.l_pivot[k]] -= s;
        }
        *c = z;
    }

    /// Records that position `r` now holds the column whose `ftran` is `w`.
    pub(crate) fn update(&mut self, r: usize, w: &[f64]) {
        self.eta_pos.push(r);
        self.eta_diag.push(w[r]);
        for (i, &v) in w.iter().enumerate() {
            if i != r && v.abs() > ETA_DROP {
                self.eta_index.push(i);
                self.eta_value.push(v);
            }
        }
        self.eta_start.push(self.eta_index.len());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn dense_mul(cols: &[Vec<(usize, f64)>], x: &[f64], m: usize) -> Vec<f64> {
        let mut b = vec![0.0; m];
        for (q, col) in cols.iter().enumerate() {
            for &(i, v) in col {
                b[i] += v * x[q];
            }
        }
        b
    }

    fn dense_mul_t(cols: &[Vec<(usize, f64)>], y: &[f64]) -> Vec<f64> {
        cols.iter().map(|col| col.iter().map(|&(i, v)| v * y[i]).sum()).collect()
    }

    fn random_basis(m: usize, seed: u64) -> Vec<Vec<(usize, f64)>> {
        let mut rng = crate::seed::rng(seed);
        // permuted diagonal keeps it nonsingular; random extras add fill
        let mut perm: Vec<usize> = (0..m).collect();
        for i in (1..m).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        (0..m)
            .map(|q| {
                let mut col = vec![(perm[q], rng.gen_range(1.0..3.0))];
                for _ in 0..rng.gen_range(0..3) {
                    let i = rng.gen_range(0..m);
                    if col.iter().all(|e| e.0 != i) {
                        col.push((i, rng.gen_range(-1.0..1.0)));
                    }
                }
                col
            })
            .collect()
    }

    #[test]
    fn solves_match_products() {
        for seed in 0..30 {
            let m = 5 + seed as usize * 3;
            let cols = random_basis(m, seed);
            let f = BasisFactor::factorize(m, &cols).unwrap();
            let mut rng = crate::seed::rng(seed + 100);
            let b: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut x = b.clone();
            f.ftran(&mut x);
            let back = dense_mul(&cols, &x, m);
            assert!(back.iter().zip(&b).all(|(u, v)| (u - v).abs() < 1e-9), "ftran seed {seed}");
            let mut y = b.clone();
            f.btran(&mut y);
            let back = dense_mul_t(&cols, &y);
            assert!(back.iter().zip(&b).all(|(u, v)| (u - v).abs() < 1e-9), "btran seed {seed}");
        }
    }

    #[test]
    fn updates_track_column_replacement() {
        let m = 12;
        let mut cols = random_basis(m, 7);
        let mut f = BasisFactor::factorize(m, &cols).unwrap();
        let mut rng = crate::seed::rng(8);
        for step in 0..10 {
            let r = step % m;
            let new_col = vec![(rng.gen_range(0..m), 2.5), ((r + 1) % m, 0.3), (r, 1.7)];
            let mut dedup: Vec<(usize, f64)> = Vec::new();
            for e in new_col {
                if dedup.iter().all(|d| d.0 != e.0) {
                    dedup.push(e);
                }
            }
            let mut w = vec![0.0; m];
            for &(i, v) in &dedup {
                w[i] = v;
            }
            f.ftran(&mut w);
            if w[r].abs() < 1e-6 {
                continue;
            }
            f.update(r, &w);
            cols[r] = dedup;
            let b: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut x = b.clone();
            f.ftran(&mut x);
            let back = dense_mul(&cols, &x, m);
            assert!(back.iter().zip(&b).all(|(u, v)| (u - v).abs() < 1e-8));
            let mut y = b.clone();
            f.btran(&mut y);
            let back = dense_mul_t(&cols, &y);
            assert!(back.iter().zip(&b).all(|(u, v)| (u - v).abs() < 1e-8));
        }
    }

    #[test]
    fn singular_basis_reports_unpivoted() {
        // third column is the sum of the first two
        let cols = vec![vec![(0, 1.0), (1, 1.0)], vec![(1, 1.0), (2, 1.0)], vec![(0, 1.0), (1, 2.0), (2, 1.0)]];
        let s = BasisFactor::factorize(3, &cols).unwrap_err();
        assert_eq!((s.positions.len(), s.rows.len()), (1, 1));
        let empty = vec![vec![(0, 1.0)], vec![]];
        let s = BasisFactor::factorize(2, &empty).unwrap_err();
        assert_eq!((s.positions, s.rows), (vec![1], vec![1]));
    }
}
