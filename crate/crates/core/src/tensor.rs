//! Dense multi-index arrays of [`Expr`].
//!
//! Every slot is tagged with its index range (field coordinates `i, j, k`
//! running over `N`, or spatial directions `α, β` running over `n`) and its
//! variance, so that contractions between incompatible slots are rejected.

use rayon::prelude::*;
use symexpr::Expr;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Range {
    Coordinate,
    Spatial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variance {
    Upper,
    Lower,
}

impl Variance {
    pub fn flip(self) -> Self {
        match self {
            Variance::Upper => Variance::Lower,
            Variance::Lower => Variance::Upper,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Slot {
    pub range: Range,
    pub variance: Variance,
}

impl Slot {
    pub const UP: Slot = Slot { range: Range::Coordinate, variance: Variance::Upper };
    pub const DOWN: Slot = Slot { range: Range::Coordinate, variance: Variance::Lower };
    pub const SPATIAL_UP: Slot = Slot { range: Range::Spatial, variance: Variance::Upper };
    pub const SPATIAL_DOWN: Slot = Slot { range: Range::Spatial, variance: Variance::Lower };

    fn flipped(self) -> Slot {
        Slot { range: self.range, variance: self.variance.flip() }
    }
}

#[derive(Clone, PartialEq)]
pub struct Tensor {
    coords: usize,
    spatial: usize,
    slots: Vec<Slot>,
    dims: Vec<usize>,
    entries: Vec<Expr>,
}

impl std::fmt::Debug for Tensor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Tensor").field("slots", &self.slots).field("entries", &self.entries).finish()
    }
}

impl Tensor {
    /// Builds a tensor entry by entry; entries are evaluated in parallel.
    pub fn from_fn<F>(slots: &[Slot], coords: usize, spatial: usize, f: F) -> Self
    where
        F: Fn(&[usize]) -> Expr + Sync + Send,
    {
        let dims: Vec<usize> = slots
            .iter()
            .map(|s| match s.range {
                Range::Coordinate => coords,
                Range::Spatial => spatial,
            })
            .collect();
        let len: usize = dims.iter().product();
        let entries = (0..len).into_par_iter().map(|flat| f(&unflatten(flat, &dims))).collect();
        Tensor { coords, spatial, slots: slots.to_vec(), dims, entries }
    }

    pub fn zeros(slots: &[Slot], coords: usize, spatial: usize) -> Self {
        Self::from_fn(slots, coords, spatial, |_| Expr::zero())
    }

    pub fn scalar(value: Expr) -> Self {
        Tensor { coords: 0, spatial: 0, slots: Vec::new(), dims: Vec::new(), entries: vec![value] }
    }

    /// Kronecker delta `δ^i_j` on `n` coordinates.
    pub fn delta(n: usize) -> Self {
        Self::from_fn(&[Slot::UP, Slot::DOWN], n, 0, |ix| if ix[0] == ix[1] { Expr::one() } else { Expr::zero() })
    }

    /// A square coordinate matrix with the given slot tags.
    pub fn matrix(rows: Vec<Vec<Expr>>, row: Slot, col: Slot) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::NotSquare);
        }
        Ok(Tensor {
            coords: n,
            spatial: 0,
            slots: vec![row, col],
            dims: vec![n, n],
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of field coordinates `N`.
    pub fn coords(&self) -> usize {
        self.coords
    }

    pub fn spatial(&self) -> usize {
        self.spatial
    }

    pub fn entries(&self) -> &[Expr] {
        &self.entries
    }

    pub fn get(&self, index: &[usize]) -> &Expr {
        &self.entries[self.flat(index)]
    }

    pub fn set(&mut self, index: &[usize], value: Expr) {
        let k = self.flat(index);
        self.entries[k] = value;
    }

    /// Iterates over `(index tuple, entry)` in lexicographic index order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, &Expr)> + '_ {
        self.entries.iter().enumerate().map(|(k, e)| (unflatten(k, &self.dims), e))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Expr::is_zero)
    }

    /// Lexicographically first entry that is not identically zero.
    pub fn first_nonzero(&self) -> Option<(Vec<usize>, &Expr)> {
        self.iter().find(|(_, e)| !e.is_zero())
    }

    pub fn map<F>(&self, f: F) -> Tensor
    where
        F: Fn(&Expr) -> Expr + Sync + Send,
    {
        Tensor { entries: self.entries.par_iter().map(f).collect(), ..self.shell() }
    }

    pub fn try_map<F>(&self, f: F) -> Result<Tensor>
    where
        F: Fn(&Expr) -> Result<Expr> + Sync + Send,
    {
        let entries = self.entries.par_iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(Tensor { entries, ..self.shell() })
    }

    pub fn zip_with<F>(&self, other: &Tensor, f: F) -> Result<Tensor>
    where
        F: Fn(&Expr, &Expr) -> Expr + Sync + Send,
    {
        if self.slots != other.slots || self.dims != other.dims {
            return Err(Error::ShapeMismatch);
        }
        let entries = self.entries.par_iter().zip(other.entries.par_iter()).map(|(a, b)| f(a, b)).collect();
        Ok(Tensor { entries, ..self.shell() })
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: &Expr) -> Tensor {
        self.map(|e| e * c)
    }

    /// Sums over the paired slots, which must share a range and have
    /// opposite variance.
    pub fn contract(&self, a: usize, b: usize) -> Result<Tensor> {
        self.check_pair(a, b)?;
        if self.slots[a].variance == self.slots[b].variance {
            return Err(Error::SlotMismatch { a, b, reason: "contraction needs one upper and one lower index" });
        }
        let keep: Vec<usize> = (0..self.rank()).filter(|&s| s != a && s != b).collect();
        let slots: Vec<Slot> = keep.iter().map(|&s| self.slots[s]).collect();
        let n = self.dims[a];
        Ok(Tensor::from_fn(&slots, self.coords, self.spatial, |ix| {
            let mut full = vec![0; self.rank()];
            for (pos, &s) in keep.iter().enumerate() {
                full[s] = ix[pos];
            }
            (0..n)
                .map(|t| {
                    full[a] = t;
                    full[b] = t;
                    self.get(&full).clone()
                })
                .sum()
        }))
    }

    /// Tensor product; the slots of `other` follow those of `self`.
    pub fn outer(&self, other: &Tensor) -> Result<Tensor> {
        let (coords, spatial) = self.merged_ranges(other)?;
        let slots: Vec<Slot> = self.slots.iter().chain(&other.slots).copied().collect();
        let r = self.rank();
        Ok(Tensor::from_fn(&slots, coords, spatial, |ix| self.get(&ix[..r]) * other.get(&ix[r..])))
    }

    /// Reorders slots: slot `s` of the result is slot `order[s]` of `self`.
    pub fn permute(&self, order: &[usize]) -> Result<Tensor> {
        let mut seen = vec![false; self.rank()];
        if order.len() != self.rank()
            || order.iter().any(|&s| s >= self.rank() || std::mem::replace(&mut seen[s], true))
        {
            return Err(Error::InvalidInput("slot order is not a permutation".into()));
        }
        let slots: Vec<Slot> = order.iter().map(|&s| self.slots[s]).collect();
        Ok(Tensor::from_fn(&slots, self.coords, self.spatial, |ix| {
            let mut src = vec![0; ix.len()];
            for (pos, &s) in order.iter().enumerate() {
                src[s] = ix[pos];
            }
            self.get(&src).clone()
        }))
    }

    /// `t(.., a, .., b, ..) + t(.., b, .., a, ..)`
    pub fn symmetrize_pair(&self, a: usize, b: usize) -> Result<Tensor> {
        self.pair_combination(a, b, true)
    }

    /// `t(.., a, .., b, ..) − t(.., b, .., a, ..)`
    pub fn antisymmetrize_pair(&self, a: usize, b: usize) -> Result<Tensor> {
        self.pair_combination(a, b, false)
    }

    /// Sum over the cyclic permutations of the index values in the three
    /// named slots.
    pub fn cyclic_sum(&self, slots: [usize; 3]) -> Result<Tensor> {
        let [a, b, c] = slots;
        self.check_pair(a, b)?;
        self.check_pair(b, c)?;
        if a == c {
            return Err(Error::SlotMismatch { a, b: c, reason: "cyclic slots must be distinct" });
        }
        if self.slots[a] != self.slots[b] || self.slots[b] != self.slots[c] {
            return Err(Error::SlotMismatch { a, b: c, reason: "cyclic slots need equal range and variance" });
        }
        Ok(Tensor::from_fn(&self.slots, self.coords, self.spatial, |ix| {
            let mut sum = self.get(ix).clone();
            let mut j = ix.to_vec();
            for _ in 0..2 {
                let (x, y, z) = (j[a], j[b], j[c]);
                j[a] = y;
                j[b] = z;
                j[c] = x;
                sum = &sum + self.get(&j);
            }
            sum
        }))
    }

    /// Appends a lower coordinate slot holding `∂_k` of every entry.
    pub fn gradient(&self) -> Tensor {
        let mut slots = self.slots.clone();
        slots.push(Slot::DOWN);
        let r = self.rank();
        Tensor::from_fn(&slots, self.coords, self.spatial, |ix| self.get(&ix[..r]).diff(ix[r]))
    }

    /// Rank-2 product `(self · other)^i_k = self^i_s other^s_k`.
    pub fn matmul(&self, other: &Tensor) -> Result<Tensor> {
        if self.rank() != 2 || other.rank() != 2 {
            return Err(Error::NotSquare);
        }
        self.outer(other)?.contract(1, 2)
    }

    /// Square coordinate matrix as rows.
    pub fn rows(&self) -> Result<Vec<Vec<Expr>>> {
        let n = self.square_size()?;
        Ok((0..n).map(|i| self.entries[i * n..(i + 1) * n].to_vec()).collect())
    }

    pub fn transpose(&self) -> Result<Tensor> {
        self.square_size()?;
        self.permute(&[1, 0])
    }

    pub fn is_symmetric(&self) -> Result<bool> {
        let n = self.square_size()?;
        Ok((0..n).all(|i| (0..i).all(|j| self.get(&[i, j]) == self.get(&[j, i]))))
    }

    /// Exact determinant of a square rank-2 tensor.
    pub fn det(&self) -> Result<Expr> {
        Ok(det(&self.rows()?))
    }

    /// Adjugate over determinant. The result carries the opposite variance
    /// on both slots and is checked against the identity before return.
    pub fn invert(&self) -> Result<Tensor> {
        let rows = self.rows()?;
        let d = det(&rows);
        if d.is_zero() {
            return Err(Error::DegenerateMetric { direction: None });
        }
        let dinv = d.recip()?;
        let slots = [self.slots[1].flipped(), self.slots[0].flipped()];
        let inv = Tensor::from_fn(&slots, self.coords, self.spatial, |ix| {
            let (i, j) = (ix[0], ix[1]);
            let sign = if (i + j) % 2 == 0 { Expr::one() } else { Expr::from_int(-1) };
            &(&sign * &det(&minor(&rows, j, i))) * &dinv
        });
        let check = matrix_product(&rows, &inv.rows()?);
        for (i, row) in check.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                let want = if i == j { Expr::one() } else { Expr::zero() };
                if *e != want {
                    return Err(Error::Inconsistent(format!("inverse check failed at ({}, {})", i + 1, j + 1)));
                }
            }
        }
        Ok(inv)
    }

    fn square_size(&self) -> Result<usize> {
        if self.rank() != 2 || self.dims[0] != self.dims[1] {
            return Err(Error::NotSquare);
        }
        Ok(self.dims[0])
    }

    fn shell(&self) -> Tensor {
        Tensor {
            coords: self.coords,
            spatial: self.spatial,
            slots: self.slots.clone(),
            dims: self.dims.clone(),
            entries: Vec::new(),
        }
    }

    fn flat(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.dims.len());
        index.iter().zip(&self.dims).fold(0, |acc, (&i, &d)| {
            debug_assert!(i < d);
            acc * d + i
        })
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<()> {
        for s in [a, b] {
            if s >= self.rank() {
                return Err(Error::SlotOutOfRange { slot: s, rank: self.rank() });
            }
        }
        if a == b {
            return Err(Error::SlotMismatch { a, b, reason: "a slot cannot be paired with itself" });
        }
        if self.slots[a].range != self.slots[b].range {
            return Err(Error::SlotMismatch { a, b, reason: "index ranges differ" });
        }
        Ok(())
    }

    fn pair_combination(&self, a: usize, b: usize, plus: bool) -> Result<Tensor> {
        self.check_pair(a, b)?;
        if self.slots[a].variance != self.slots[b].variance {
            return Err(Error::SlotMismatch { a, b, reason: "swapped slots need equal variance" });
        }
        Ok(Tensor::from_fn(&self.slots, self.coords, self.spatial, |ix| {
            let mut sw = ix.to_vec();
            sw.swap(a, b);
            if plus {
                self.get(ix) + self.get(&sw)
            } else {
                self.get(ix) - self.get(&sw)
            }
        }))
    }

    fn merged_ranges(&self, other: &Tensor) -> Result<(usize, usize)> {
        let pick = |x: usize, y: usize, used_x: bool, used_y: bool| -> Result<usize> {
            match (used_x, used_y) {
                (true, true) if x != y => Err(Error::ShapeMismatch),
                (true, _) => Ok(x),
                (_, true) => Ok(y),
                _ => Ok(x.max(y)),
            }
        };
        let uses = |t: &Tensor, r: Range| t.slots.iter().any(|s| s.range == r);
        Ok((
            pick(self.coords, other.coords, uses(self, Range::Coordinate), uses(other, Range::Coordinate))?,
            pick(self.spatial, other.spatial, uses(self, Range::Spatial), uses(other, Range::Spatial))?,
        ))
    }
}

fn unflatten(mut flat: usize, dims: &[usize]) -> Vec<usize> {
    let mut ix = vec![0; dims.len()];
    for (slot, &d) in dims.iter().enumerate().rev() {
        ix[slot] = flat % d;
        flat /= d;
    }
    ix
}

fn minor(rows: &[Vec<Expr>], skip_row: usize, skip_col: usize) -> Vec<Vec<Expr>> {
    rows.iter()
        .enumerate()
        .filter(|&(i, _)| i != skip_row)
        .map(|(_, r)| r.iter().enumerate().filter(|&(j, _)| j != skip_col).map(|(_, e)| e.clone()).collect())
        .collect()
}

pub(crate) fn matrix_product(a: &[Vec<Expr>], b: &[Vec<Expr>]) -> Vec<Vec<Expr>> {
    let n = b.first().map_or(0, Vec::len);
    a.iter().map(|row| (0..n).map(|k| row.iter().zip(b).map(|(x, brow)| x * &brow[k]).sum()).collect()).collect()
}

/// Determinant by cofactor expansion up to 4×4 and fraction-free Bareiss
/// elimination beyond.
pub fn det(rows: &[Vec<Expr>]) -> Expr {
    match rows.len() {
        0 => Expr::one(),
        1 => rows[0][0].clone(),
        2 => &(&rows[0][0] * &rows[1][1]) - &(&rows[0][1] * &rows[1][0]),
        n if n <= 4 => (0..n)
            .filter(|&j| !rows[0][j].is_zero())
            .map(|j| {
                let t = &rows[0][j] * &det(&minor(rows, 0, j));
                if j % 2 == 0 {
                    t
                } else {
                    -t
                }
            })
            .sum(),
        _ => bareiss(rows.to_vec()),
    }
}

fn bareiss(mut m: Vec<Vec<Expr>>) -> Expr {
    let n = m.len();
    let mut sign = Expr::one();
    let mut prev = Expr::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return Expr::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = &(&m[i][j] * &m[k][k]) - &(&m[i][k] * &m[k][j]);
                m[i][j] = &t / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    &sign * &m[n - 1][n - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use symexpr::{parse, Vars};

    fn ex(s: &str) -> Expr {
        parse(s, &Vars::coordinates(3)).unwrap()
    }

    fn mat(rows: &[&[&str]]) -> Tensor {
        Tensor::matrix(rows.iter().map(|r| r.iter().map(|s| ex(s)).collect()).collect(), Slot::UP, Slot::UP).unwrap()
    }

    #[test]
    fn delta_trace() {
        assert_eq!(Tensor::delta(3).contract(0, 1).unwrap().get(&[]), &Expr::from_int(3));
    }

    #[test]
    fn contraction_needs_opposite_variance() {
        let g = mat(&[&["1", "0"], &["0", "1"]]);
        assert!(matches!(g.contract(0, 1), Err(Error::SlotMismatch { .. })));
        let t = Tensor::zeros(&[Slot::UP, Slot::SPATIAL_DOWN], 2, 2);
        assert!(matches!(t.contract(0, 1), Err(Error::SlotMismatch { .. })));
    }

    #[test]
    fn det_and_inverse_of_second_canonical_metric() {
        let g = mat(&[&["2*u2", "u1+u2"], &["u1+u2", "2*u1"]]);
        assert_eq!(g.det().unwrap(), ex("-(u1-u2)^2"));
        let inv = g.invert().unwrap();
        let d = ex("-(u1-u2)^2");
        assert_eq!(inv.get(&[0, 0]), &(&ex("2*u1") / &d));
        assert_eq!(inv.get(&[0, 1]), &(&ex("-(u1+u2)") / &d));
        assert_eq!(inv.slots(), &[Slot::DOWN, Slot::DOWN]);
    }

    #[test]
    fn inverse_of_constant_diagonal_metric() {
        let g = mat(&[&["1", "0"], &["0", "-1"]]);
        assert_eq!(g.invert().unwrap().entries(), g.entries());
    }

    #[test]
    fn degenerate_torus_metric_for_three_directions() {
        // g^{ij1} = u^i δ^{j1} + u^j δ^{i1}
        let g = mat(&[&["2*u1", "u2", "u3"], &["u2", "0", "0"], &["u3", "0", "0"]]);
        assert!(g.det().unwrap().is_zero());
        assert!(matches!(g.invert(), Err(Error::DegenerateMetric { .. })));
    }

    #[test]
    fn bareiss_matches_cofactor() {
        let n = 5;
        let rows: Vec<Vec<Expr>> = (0..n)
            .map(|i| {
                (0..n).map(|j| ex(&format!("u1^{} + {}*u2 - {}", (i + j) % 3, i * j + 1, (i + 2 * j) % 4))).collect()
            })
            .collect();
        let by_bareiss = bareiss(rows.clone());
        let by_cofactor: Expr = (0..n)
            .map(|j| {
                let t = &rows[0][j] * &det(&minor(&rows, 0, j));
                if j % 2 == 0 {
                    t
                } else {
                    -t
                }
            })
            .sum();
        assert_eq!(by_bareiss, by_cofactor);
    }

    #[test]
    fn cyclic_sum_of_single_entry() {
        let mut t = Tensor::zeros(&[Slot::UP, Slot::UP, Slot::UP], 3, 0);
        t.set(&[0, 1, 2], Expr::one());
        let c = t.cyclic_sum([0, 1, 2]).unwrap();
        let ones: Vec<Vec<usize>> = c.iter().filter(|(_, e)| e.is_one()).map(|(ix, _)| ix).collect();
        assert_eq!(ones, vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]]);
        assert_eq!(c.iter().filter(|(_, e)| !e.is_zero()).count(), 3);
    }

    #[test]
    fn symmetric_then_antisymmetric_vanishes() {
        let t = Tensor::from_fn(&[Slot::UP, Slot::UP, Slot::DOWN], 2, 0, |ix| {
            ex(&format!("u1^{} - {}*u2", ix[0], ix[1] + 2 * ix[2]))
        });
        assert!(t.symmetrize_pair(0, 1).unwrap().antisymmetrize_pair(0, 1).unwrap().is_zero());
    }

    #[test]
    fn permute_and_outer() {
        let v = Tensor::from_fn(&[Slot::UP], 2, 0, |ix| Expr::var(ix[0]));
        let w = Tensor::from_fn(&[Slot::DOWN], 2, 0, |ix| Expr::from_int(ix[0] as i64 + 1));
        let vw = v.outer(&w).unwrap();
        assert_eq!(vw.get(&[1, 0]), &ex("u2"));
        let wv = vw.permute(&[1, 0]).unwrap();
        assert_eq!(wv.get(&[0, 1]), &ex("u2"));
        assert_eq!(wv.slots(), &[Slot::DOWN, Slot::UP]);
        assert_eq!(vw.contract(0, 1).unwrap().get(&[]), &ex("u1 + 2*u2"));
    }
}
