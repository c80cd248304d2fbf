//! Exact integer lattice algebra: square matrices over an [`IntScalar`],
//! Bareiss determinants, Smith normal form, matrix orders and affine orbits
//! of `x -> Mx + z` on `Z^k`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Extended, IntScalar};

/// A vector of `Z^k`. Ordering is lexicographic.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector<T>(pub Vec<T>);

impl<T: IntScalar> Vector<T> {
    pub fn zero(k: usize) -> Self {
        Vector(vec![T::zero(); k])
    }

    pub fn unit(k: usize, i: usize) -> Self {
        let mut v = Self::zero(k);
        v.0[i] = T::one();
        v
    }

    pub fn from_i64s(values: &[i64]) -> Result<Self> {
        values
            .iter()
            .map(|&v| T::from_i64_c(v))
            .collect::<Result<_>>()
            .map(Vector)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|v| v.is_zero())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.add_c(b))
            .collect::<Result<_>>()
            .map(Vector)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.sub_c(b))
            .collect::<Result<_>>()
            .map(Vector)
    }

    pub fn neg(&self) -> Result<Self> {
        self.0
            .iter()
            .map(|a| a.neg_c())
            .collect::<Result<_>>()
            .map(Vector)
    }

    pub fn scale(&self, c: &T) -> Result<Self> {
        self.0
            .iter()
            .map(|a| a.mul_c(c))
            .collect::<Result<_>>()
            .map(Vector)
    }

    /// Largest absolute coordinate.
    pub fn max_norm(&self) -> Result<T> {
        let mut best = T::zero();
        for v in &self.0 {
            let a = v.abs_c()?;
            if a > best {
                best = a;
            }
        }
        Ok(best)
    }

    pub fn convert<U: IntScalar>(&self) -> Result<Vector<U>> {
        self.0
            .iter()
            .map(|v| v.convert())
            .collect::<Result<_>>()
            .map(Vector)
    }
}

impl<T: fmt::Display> fmt::Display for Vector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

impl<T: IntScalar> FromStr for Vector<T> {
    type Err = Error;

    /// Parses `(x1 x2 .. xk)`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let inner = t
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| Error::parse(0, "vector must be written as (x1 .. xk)"))?;
        let offset = s.find('(').unwrap_or(0) + 1;
        let mut out = Vec::new();
        let mut pos = 0;
        for tok in inner.split(' ') {
            if !tok.is_empty() {
                let v = tok
                    .parse::<T>()
                    .map_err(|_| Error::parse(offset + pos, format!("bad integer {tok:?}")))?;
                out.push(v);
            }
            pos += tok.len() + 1;
        }
        if out.is_empty() {
            return Err(Error::parse(offset, "empty vector"));
        }
        Ok(Vector(out))
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Square `k x k` integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    dim: usize,
    entries: Vec<T>,
}

impl<T: IntScalar> Matrix<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::NotSquare);
        }
        Ok(Matrix {
            dim,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&v| T::from_i64_c(v))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }

    pub fn zero(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Matrix {
            dim,
            entries: vec![T::zero(); dim * dim],
        }
    }

    pub fn scalar(dim: usize, c: T) -> Self {
        let mut m = Self::zero(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = c.clone();
        }
        m
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, T::one())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.entries[i * self.dim + j]
    }

    #[inline]
    fn at(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.entries[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.entries.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn is_identity(&self) -> bool {
        (0..self.dim).all(|i| {
            (0..self.dim).all(|j| {
                let v = self.get(i, j);
                if i == j {
                    v.is_one()
                } else {
                    v.is_zero()
                }
            })
        })
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|v| v.is_zero())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.add_c(b))
            .collect::<Result<_>>()?;
        Ok(Matrix {
            dim: self.dim,
            entries,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.sub_c(b))
            .collect::<Result<_>>()?;
        Ok(Matrix {
            dim: self.dim,
            entries,
        })
    }

    pub fn neg(&self) -> Result<Self> {
        let entries = self
            .entries
            .iter()
            .map(|a| a.neg_c())
            .collect::<Result<_>>()?;
        Ok(Matrix {
            dim: self.dim,
            entries,
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let n = self.dim;
        let mut out = Self::zero(n);
        for i in 0..n {
            for l in 0..n {
                let a = self.get(i, l);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let prod = a.mul_c(other.get(l, j))?;
                    let cell = out.at(i, j);
                    *cell = cell.add_c(&prod)?;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &Vector<T>) -> Result<Vector<T>> {
        check_dim(self.dim, v.dim())?;
        let mut out = Vec::with_capacity(self.dim);
        for i in 0..self.dim {
            let mut acc = T::zero();
            for j in 0..self.dim {
                acc = acc.add_c(&self.get(i, j).mul_c(&v.0[j])?)?;
            }
            out.push(acc);
        }
        Ok(Vector(out))
    }

    pub fn pow(&self, mut exp: u64) -> Result<Self> {
        let mut base = self.clone();
        let mut acc = Self::identity(self.dim);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// `E - self`.
    pub fn identity_minus(&self) -> Result<Self> {
        Self::identity(self.dim).sub(self)
    }

    pub fn convert<U: IntScalar>(&self) -> Result<Matrix<U>> {
        let entries = self
            .entries
            .iter()
            .map(|v| v.convert())
            .collect::<Result<_>>()?;
        Ok(Matrix {
            dim: self.dim,
            entries,
        })
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Result<T> {
        let n = self.dim;
        let mut a = self.clone();
        let mut negate = false;
        let mut prev = T::one();
        for k in 0..n.saturating_sub(1) {
            if a.get(k, k).is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !a.get(i, k).is_zero()) else {
                    return Ok(T::zero());
                };
                a.swap_rows(k, p);
                negate = !negate;
            }
            let pivot = a.get(k, k).clone();
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = a
                        .get(i, j)
                        .mul_c(&pivot)?
                        .sub_c(&a.get(i, k).mul_c(a.get(k, j))?)?;
                    *a.at(i, j) = num / prev.clone();
                }
            }
            prev = pivot;
        }
        let d = a.get(n - 1, n - 1).clone();
        if negate {
            d.neg_c()
        } else {
            Ok(d)
        }
    }

    pub fn is_unimodular(&self) -> Result<bool> {
        Ok(self.determinant()?.abs_c()?.is_one())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.dim {
                self.entries.swap(a * self.dim + j, b * self.dim + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.dim {
                self.entries.swap(i * self.dim + a, i * self.dim + b);
            }
        }
    }

    /// row_dst += c * row_src
    fn add_row_multiple(&mut self, dst: usize, src: usize, c: &T) -> Result<()> {
        for j in 0..self.dim {
            let delta = self.get(src, j).mul_c(c)?;
            let cell = self.at(dst, j);
            *cell = cell.add_c(&delta)?;
        }
        Ok(())
    }

    /// col_dst += c * col_src
    fn add_col_multiple(&mut self, dst: usize, src: usize, c: &T) -> Result<()> {
        for i in 0..self.dim {
            let delta = self.get(i, src).mul_c(c)?;
            let cell = self.at(i, dst);
            *cell = cell.add_c(&delta)?;
        }
        Ok(())
    }

    fn negate_row(&mut self, i: usize) -> Result<()> {
        for j in 0..self.dim {
            let cell = self.at(i, j);
            *cell = cell.neg_c()?;
        }
        Ok(())
    }

    fn negate_col(&mut self, j: usize) -> Result<()> {
        for i in 0..self.dim {
            let cell = self.at(i, j);
            *cell = cell.neg_c()?;
        }
        Ok(())
    }
}

impl<T: IntScalar> fmt::Display for Matrix<T> {
    /// Matrix literal: rows separated by `;`, entries by `,`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim {
            if i > 0 {
                f.write_str(";")?;
            }
            for j in 0..self.dim {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        Ok(())
    }
}

impl<T: IntScalar> FromStr for Matrix<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut rows = Vec::new();
        let mut pos = 0;
        for row in s.split(';') {
            let mut entries = Vec::new();
            let mut rpos = pos;
            for tok in row.split(',') {
                let trimmed = tok.trim();
                let v = trimmed
                    .parse::<T>()
                    .map_err(|_| Error::parse(rpos, format!("bad matrix entry {trimmed:?}")))?;
                entries.push(v);
                rpos += tok.len() + 1;
            }
            rows.push(entries);
            pos += row.len() + 1;
        }
        Self::from_rows(rows).map_err(|_| Error::parse(0, "matrix literal must be square"))
    }
}

/// `U * M * V = S` with `S` diagonal, nonnegative, `s_1 | s_2 | ...`.
/// The inverses of `U` and `V` are tracked alongside.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnfResult<T> {
    pub s: Matrix<T>,
    pub u: Matrix<T>,
    pub v: Matrix<T>,
    pub u_inv: Matrix<T>,
    pub v_inv: Matrix<T>,
}

impl<T: IntScalar> SnfResult<T> {
    pub fn diagonal(&self) -> Vec<T> {
        (0..self.s.dim())
            .map(|i| self.s.get(i, i).clone())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|d| !d.is_zero()).count()
    }
}

/// Smith normal form with the smallest-absolute-value pivot rule.
///
/// Each stage selects the first (row-major) entry of least nonzero absolute
/// value in the trailing block, clears its column by row operations, then
/// its row by column operations, and repeats until the pivot divides the
/// whole trailing block.
pub fn smith_normal_form<T: IntScalar>(m: &Matrix<T>) -> Result<SnfResult<T>> {
    let n = m.dim();
    let mut a = m.clone();
    let mut u = Matrix::identity(n);
    let mut u_inv = Matrix::identity(n);
    let mut v = Matrix::identity(n);
    let mut v_inv = Matrix::identity(n);

    // row_i += c row_j on A and U; column op col_j -= c col_i on U^-1
    let row_op = |a: &mut Matrix<T>,
                  u: &mut Matrix<T>,
                  u_inv: &mut Matrix<T>,
                  i: usize,
                  j: usize,
                  c: &T|
     -> Result<()> {
        a.add_row_multiple(i, j, c)?;
        u.add_row_multiple(i, j, c)?;
        u_inv.add_col_multiple(j, i, &c.neg_c()?)
    };
    // col_j += c col_i on A and V; row op row_i -= c row_j on V^-1
    let col_op = |a: &mut Matrix<T>,
                  v: &mut Matrix<T>,
                  v_inv: &mut Matrix<T>,
                  j: usize,
                  i: usize,
                  c: &T|
     -> Result<()> {
        a.add_col_multiple(j, i, c)?;
        v.add_col_multiple(j, i, c)?;
        v_inv.add_row_multiple(i, j, &c.neg_c()?)
    };

    for t in 0..n {
        loop {
            let mut best: Option<(usize, usize, T)> = None;
            for i in t..n {
                for j in t..n {
                    let x = a.get(i, j);
                    if x.is_zero() {
                        continue;
                    }
                    let ax = x.abs_c()?;
                    if best.as_ref().is_none_or(|(_, _, b)| ax < *b) {
                        best = Some((i, j, ax));
                    }
                }
            }
            let Some((pi, pj, _)) = best else {
                break;
            };
            a.swap_rows(t, pi);
            u.swap_rows(t, pi);
            u_inv.swap_cols(t, pi);
            a.swap_cols(t, pj);
            v.swap_cols(t, pj);
            v_inv.swap_rows(t, pj);

            let mut dirty = false;
            for i in t + 1..n {
                if a.get(i, t).is_zero() {
                    continue;
                }
                let q = a.get(i, t).clone() / a.get(t, t).clone();
                row_op(&mut a, &mut u, &mut u_inv, i, t, &q.neg_c()?)?;
                dirty |= !a.get(i, t).is_zero();
            }
            if dirty {
                continue;
            }
            for j in t + 1..n {
                if a.get(t, j).is_zero() {
                    continue;
                }
                let q = a.get(t, j).clone() / a.get(t, t).clone();
                col_op(&mut a, &mut v, &mut v_inv, j, t, &q.neg_c()?)?;
                dirty |= !a.get(t, j).is_zero();
            }
            if dirty {
                continue;
            }
            let pivot = a.get(t, t).clone();
            let offender =
                (t + 1..n).find(|&i| (t + 1..n).any(|j| !a.get(i, j).is_multiple_of(&pivot)));
            match offender {
                Some(i) => row_op(&mut a, &mut u, &mut u_inv, t, i, &T::one())?,
                None => break,
            }
        }
        if a.get(t, t).is_negative() {
            a.negate_row(t)?;
            u.negate_row(t)?;
            u_inv.negate_col(t)?;
        }
    }
    Ok(SnfResult {
        s: a,
        u,
        v,
        u_inv,
        v_inv,
    })
}

/// Order of `Z^k / Im(M)`: the product of the Smith invariants, or
/// `Infinite` when one of them vanishes.
pub fn cokernel_order<T: IntScalar>(m: &Matrix<T>) -> Result<Extended<T>> {
    let snf = smith_normal_form(m)?;
    let mut acc = T::one();
    for d in snf.diagonal() {
        if d.is_zero() {
            return Ok(Extended::Infinite);
        }
        acc = acc.mul_c(&d)?;
    }
    Ok(Extended::Finite(acc))
}

/// Least `t <= bound` with `M^t = E`.
pub fn matrix_order<T: IntScalar>(m: &Matrix<T>, bound: u64) -> Result<Option<u64>> {
    let mut p = m.clone();
    for t in 1..=bound {
        if p.is_identity() {
            return Ok(Some(t));
        }
        if t < bound {
            p = match p.mul(m) {
                Ok(next) => next,
                // entries of a finite-order matrix stay bounded
                Err(Error::Overflow(_)) => return Ok(None),
                Err(e) => return Err(e),
            };
        }
    }
    Ok(None)
}

/// The companion matrix of `x^4 + x^3 + x^2 + x + 1`, an element of order 5
/// in `GL(4, Z)`.
pub fn companion_cyclotomic_5<T: IntScalar>() -> Matrix<T> {
    Matrix::from_i64_rows(&[
        &[0, 0, 0, -1],
        &[1, 0, 0, -1],
        &[0, 1, 0, -1],
        &[0, 0, 1, -1],
    ])
    .expect("literal is square")
}

/// `[[0, 1], [-1, -1]]`, an element of order 3 in `GL(2, Z)`.
pub fn rotation_order_3<T: IntScalar>() -> Matrix<T> {
    Matrix::from_i64_rows(&[&[0, 1], &[-1, -1]]).expect("literal is square")
}

pub fn direct_sum<T: IntScalar>(blocks: &[Matrix<T>]) -> Result<Matrix<T>> {
    if blocks.is_empty() {
        return Err(Error::EmptyDirectSum);
    }
    let n: usize = blocks.iter().map(|b| b.dim()).sum();
    let mut out = Matrix::zero(n);
    let mut off = 0;
    for b in blocks {
        for i in 0..b.dim() {
            for j in 0..b.dim() {
                *out.at(off + i, off + j) = b.get(i, j).clone();
            }
        }
        off += b.dim();
    }
    Ok(out)
}

/// Points visited by `u -> Mu + z` starting at `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineOrbit<T> {
    pub points: Vec<Vector<T>>,
    /// `false` when the bound ran out before returning to the start.
    pub closed: bool,
}

impl<T> AffineOrbit<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn affine_step<T: IntScalar>(m: &Matrix<T>, z: &Vector<T>, x: &Vector<T>) -> Result<Vector<T>> {
    m.mul_vec(x)?.add(z)
}

pub fn affine_orbit<T: IntScalar>(
    m: &Matrix<T>,
    z: &Vector<T>,
    x: &Vector<T>,
    bound: usize,
) -> Result<AffineOrbit<T>> {
    check_dim(m.dim(), z.dim())?;
    check_dim(m.dim(), x.dim())?;
    let mut points = vec![x.clone()];
    let mut cur = x.clone();
    while points.len() <= bound {
        cur = affine_step(m, z, &cur)?;
        if &cur == x {
            return Ok(AffineOrbit {
                points,
                closed: true,
            });
        }
        if points.len() == bound {
            break;
        }
        points.push(cur.clone());
    }
    Ok(AffineOrbit {
        points,
        closed: false,
    })
}

/// Default orbit bound: four times the matrix order when known.
pub fn default_orbit_bound<T: IntScalar>(
    m: &Matrix<T>,
    order_bound: u64,
    fallback: usize,
) -> Result<usize> {
    Ok(match matrix_order(m, order_bound)? {
        Some(t) => 4 * t as usize,
        None => fallback,
    })
}

/// `E + M + ... + M^(len-1)`.
pub fn geometric_sum<T: IntScalar>(m: &Matrix<T>, len: u64) -> Result<Matrix<T>> {
    let mut acc = Matrix::zero(m.dim());
    let mut p = Matrix::identity(m.dim());
    for _ in 0..len {
        acc = acc.add(&p)?;
        p = p.mul(m)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    type M = Matrix<i64>;

    fn m(s: &str) -> M {
        s.parse().unwrap()
    }

    #[test]
    fn determinant_examples() {
        let rot = rotation_order_3::<i64>();
        assert_eq!(rot.identity_minus().unwrap().determinant().unwrap(), 3);
        let m4 = companion_cyclotomic_5::<i64>();
        assert_eq!(m4.sub(&M::identity(4)).unwrap().determinant().unwrap(), 5);
        assert_eq!(m4.determinant().unwrap(), 1);
        for k in 1..6 {
            assert_eq!(M::identity(k).determinant().unwrap(), 1);
        }
        assert_eq!(m("0,1;1,0").determinant().unwrap(), -1);
        assert_eq!(m("0,0;0,5").determinant().unwrap(), 0);
        assert_eq!(
            m("2,3,1;4,1,0;0,5,7").determinant().unwrap(),
            2 * 7 - 3 * 28 + 20
        );
    }

    #[test]
    fn determinant_overflow_is_reported() {
        let big = i64::MAX / 2;
        let a = M::from_rows(vec![vec![big, 1], vec![1, big]]).unwrap();
        assert!(matches!(a.determinant(), Err(Error::Overflow(_))));
        let b: Matrix<BigInt> = a.convert().unwrap();
        let expect = BigInt::from(big) * BigInt::from(big) - 1;
        assert_eq!(b.determinant().unwrap(), expect);
    }

    #[test]
    fn snf_examples() {
        let s = smith_normal_form(&m("2,0;0,6")).unwrap();
        assert_eq!(s.diagonal(), vec![2, 6]);
        let s = smith_normal_form(&m("1,-1;1,2")).unwrap();
        assert_eq!(s.diagonal().iter().product::<i64>().abs(), 3);
        let s = smith_normal_form(&m("0")).unwrap();
        assert_eq!(s.diagonal(), vec![0]);
        // needs the divisibility repair step
        let s = smith_normal_form(&m("2,0;0,3")).unwrap();
        assert_eq!(s.diagonal(), vec![1, 6]);
    }

    #[test]
    fn snf_is_deterministic_and_reconstructs() {
        let a = m("4,-2,6;1,3,-5;0,7,2");
        let s1 = smith_normal_form(&a).unwrap();
        let s2 = smith_normal_form(&a).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(s1.u.mul(&a).unwrap().mul(&s1.v).unwrap(), s1.s);
        assert!(s1.u.mul(&s1.u_inv).unwrap().is_identity());
        assert!(s1.v_inv.mul(&s1.v).unwrap().is_identity());
    }

    #[test]
    fn cokernel_examples() {
        let two_e = M::scalar(3, 2);
        assert_eq!(cokernel_order(&two_e).unwrap(), Extended::Finite(8));
        let rot = rotation_order_3::<i64>();
        assert_eq!(
            cokernel_order(&rot.identity_minus().unwrap()).unwrap(),
            Extended::Finite(3)
        );
        assert_eq!(cokernel_order(&m("0")).unwrap(), Extended::Infinite);
    }

    #[test]
    fn order_examples() {
        assert_eq!(
            matrix_order(&rotation_order_3::<i64>(), 10).unwrap(),
            Some(3)
        );
        assert_eq!(
            matrix_order(&companion_cyclotomic_5::<i64>(), 10).unwrap(),
            Some(5)
        );
        assert_eq!(matrix_order(&M::identity(3), 10).unwrap(), Some(1));
        assert_eq!(matrix_order(&m("2,1;1,1"), 50).unwrap(), None);
        assert_eq!(
            matrix_order(&companion_cyclotomic_5::<i64>(), 4).unwrap(),
            None
        );
    }

    #[test]
    fn companion_relation() {
        let m4 = companion_cyclotomic_5::<i64>();
        assert_eq!(m4.rows()[0], vec![0, 0, 0, -1]);
        assert!(geometric_sum(&m4, 5).unwrap().is_zero());
        assert!(geometric_sum(&rotation_order_3::<i64>(), 3)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn direct_sum_examples() {
        assert_eq!(direct_sum::<i64>(&[]), Err(Error::EmptyDirectSum));
        let e1 = M::identity(1);
        assert_eq!(direct_sum(std::slice::from_ref(&e1)).unwrap(), e1);
        let m4 = companion_cyclotomic_5::<i64>();
        let s = direct_sum(&[m4.clone(), m4]).unwrap();
        assert_eq!(s.dim(), 8);
        assert_eq!(s.sub(&M::identity(8)).unwrap().determinant().unwrap(), 25);
        for t in 1..4 {
            let blocks = vec![rotation_order_3::<i64>(); t];
            let s = direct_sum(&blocks).unwrap();
            assert_eq!(
                s.identity_minus().unwrap().determinant().unwrap(),
                3i64.pow(t as u32)
            );
        }
    }

    #[test]
    fn affine_orbit_examples() {
        let neg = M::scalar(2, -1);
        let zero = Vector::<i64>::zero(2);
        let o = affine_orbit(&neg, &zero, &zero, 8).unwrap();
        assert!(o.closed);
        assert_eq!(o.len(), 1);

        let x = Vector(vec![3, -1]);
        let z = x.scale(&2).unwrap();
        let o = affine_orbit(&neg, &z, &x, 8).unwrap();
        assert!(o.closed && o.len() == 1);

        let rot = rotation_order_3::<i64>();
        let z = Vector(vec![5, -2]);
        for x in [Vector(vec![0, 0]), Vector(vec![1, 7]), Vector(vec![-4, 2])] {
            let o = affine_orbit(&rot, &z, &x, 12).unwrap();
            assert!(o.closed);
            assert_eq!(3 % o.len(), 0);
        }

        // translation by a nonzero vector never returns
        let o = affine_orbit(&M::identity(2), &Vector(vec![1, 0]), &zero, 10).unwrap();
        assert!(!o.closed);
        assert_eq!(o.len(), 10);
    }

    #[test]
    fn literal_round_trip() {
        for s in ["0,1;-1,-1", "5", "1,0,0;0,-1,0;0,0,1"] {
            assert_eq!(m(s).to_string(), s);
        }
        assert!(" 0 , 1 ; -1 , -1 ".parse::<M>().is_ok());
        assert!(matches!("0,1;1".parse::<M>(), Err(Error::Parse { .. })));
        assert!(matches!(
            "0,x;1,1".parse::<M>(),
            Err(Error::Parse { position: 2, .. })
        ));
        let v: Vector<i64> = "(1 -2 3)".parse().unwrap();
        assert_eq!(v.to_string(), "(1 -2 3)");
    }
}
