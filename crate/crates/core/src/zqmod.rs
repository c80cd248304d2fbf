//! Finite abelian groups `G = (+)_i (Z_{p_i^r_i})^{d_i}`, their elements, and
//! block endomorphisms acting coordinatewise mod each prime power.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest modulus accepted for a single component.
pub const MAX_MODULUS: u64 = 1 << 31;

/// Exhaustive fixed-point search is used for blocks of at most this many elements.
pub const EXHAUSTIVE_LIMIT: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Component {
    pub p: u64,
    pub r: u32,
    pub d: usize,
}

impl Component {
    pub fn modulus(&self) -> u64 {
        self.p.pow(self.r)
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}:{}", self.p, self.r, self.d)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut i = 2;
    while i * i <= n {
        if n.is_multiple_of(i) {
            return false;
        }
        i += 1;
    }
    true
}

/// `a` is a unit in `Z_q`, `q = p^r`, iff `p` does not divide it.
pub fn is_unit(a: i64, q: u64, p: u64) -> bool {
    debug_assert!(q >= p && q.is_multiple_of(p));
    a.rem_euclid(p as i64) != 0
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Inverse of a unit mod `m`.
fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    (r0 == 1).then(|| t0.rem_euclid(m as i128) as u64)
}

/// Smallest `m >= 2` such that `m^e` and `1 - m^e` are units mod `p^r`.
///
/// Only residues mod `p` matter, so the search over `2..p^2` is exhaustive.
pub fn choose_m(p: u64, _r: u32, e: u32) -> Option<u64> {
    (2..p * p).find(|&m| {
        let me = pow_mod(m, e as u64, p);
        me != 0 && me != 1
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteAbelianGroup {
    components: Vec<Component>,
    offsets: Vec<usize>,
}

impl FiniteAbelianGroup {
    /// Validates and canonicalizes: sorted by `(p, r)`, equal `(p, r)` merged.
    pub fn new(mut components: Vec<Component>) -> Result<Self> {
        for c in &components {
            if !is_prime(c.p) {
                return Err(Error::InvalidGroup(format!("{} is not prime", c.p)));
            }
            if c.r == 0 || c.d == 0 {
                return Err(Error::InvalidGroup(format!(
                    "component {c} needs r >= 1 and d >= 1"
                )));
            }
            match c.p.checked_pow(c.r) {
                Some(q) if q <= MAX_MODULUS => {}
                _ => {
                    return Err(Error::InvalidGroup(format!(
                        "modulus {}^{} exceeds 2^31",
                        c.p, c.r
                    )))
                }
            }
        }
        components.sort_by_key(|c| (c.p, c.r));
        let mut merged: Vec<Component> = Vec::new();
        for c in components {
            match merged.last_mut() {
                Some(last) if last.p == c.p && last.r == c.r => last.d += c.d,
                _ => merged.push(c),
            }
        }
        let mut offsets = Vec::with_capacity(merged.len());
        let mut off = 0;
        for c in &merged {
            offsets.push(off);
            off += c.d;
        }
        Ok(FiniteAbelianGroup {
            components: merged,
            offsets,
        })
    }

    pub fn trivial() -> Self {
        FiniteAbelianGroup {
            components: Vec::new(),
            offsets: Vec::new(),
        }
    }

    /// `(Z_n)`, for a prime power `n`.
    pub fn cyclic(p: u64, r: u32) -> Result<Self> {
        Self::new(vec![Component { p, r, d: 1 }])
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn is_trivial(&self) -> bool {
        self.components.is_empty()
    }

    /// Number of coordinates of an element.
    pub fn rank(&self) -> usize {
        self.components.iter().map(|c| c.d).sum()
    }

    pub fn order(&self) -> Option<u128> {
        let mut acc: u128 = 1;
        for c in &self.components {
            for _ in 0..c.d {
                acc = acc.checked_mul(c.modulus() as u128)?;
            }
        }
        Some(acc)
    }

    /// Modulus of every coordinate, in coordinate order.
    pub fn coordinate_moduli(&self) -> Vec<u64> {
        self.components
            .iter()
            .flat_map(|c| std::iter::repeat_n(c.modulus(), c.d))
            .collect()
    }

    pub fn offset(&self, component: usize) -> usize {
        self.offsets[component]
    }

    pub fn zero(&self) -> GElement {
        GElement(vec![0; self.rank()])
    }

    pub fn element(&self, coords: &[i64]) -> Result<GElement> {
        if coords.len() != self.rank() {
            return Err(Error::GroupMismatch);
        }
        Ok(GElement(
            coords
                .iter()
                .zip(self.coordinate_moduli())
                .map(|(&c, q)| c.rem_euclid(q as i64) as u64)
                .collect(),
        ))
    }

    pub fn contains(&self, g: &GElement) -> bool {
        g.0.len() == self.rank()
            && g.0
                .iter()
                .zip(self.coordinate_moduli())
                .all(|(&c, q)| c < q)
    }

    fn check(&self, g: &GElement) -> Result<()> {
        if g.0.len() == self.rank() {
            Ok(())
        } else {
            Err(Error::GroupMismatch)
        }
    }

    pub fn add(&self, a: &GElement, b: &GElement) -> Result<GElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(GElement(
            a.0.iter()
                .zip(&b.0)
                .zip(self.coordinate_moduli())
                .map(|((&x, &y), q)| (x + y) % q)
                .collect(),
        ))
    }

    pub fn neg(&self, a: &GElement) -> Result<GElement> {
        self.check(a)?;
        Ok(GElement(
            a.0.iter()
                .zip(self.coordinate_moduli())
                .map(|(&x, q)| (q - x) % q)
                .collect(),
        ))
    }

    pub fn sub(&self, a: &GElement, b: &GElement) -> Result<GElement> {
        self.add(a, &self.neg(b)?)
    }

    /// Unit vectors, one per coordinate.
    pub fn generators(&self) -> Vec<GElement> {
        (0..self.rank())
            .map(|i| {
                let mut v = vec![0; self.rank()];
                v[i] = 1;
                GElement(v)
            })
            .collect()
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> GElement {
        GElement(
            self.coordinate_moduli()
                .into_iter()
                .map(|q| rng.gen_range(0..q))
                .collect(),
        )
    }

    /// Mixed-radix index of `g`, first coordinate least significant.
    pub fn index_of(&self, g: &GElement) -> u64 {
        let mut idx = 0u64;
        for (&c, q) in g.0.iter().zip(self.coordinate_moduli()).rev() {
            idx = idx * q + c;
        }
        idx
    }

    pub fn element_at(&self, mut idx: u64) -> GElement {
        GElement(
            self.coordinate_moduli()
                .into_iter()
                .map(|q| {
                    let c = idx % q;
                    idx /= q;
                    c
                })
                .collect(),
        )
    }

    /// All elements in index order. Intended for small groups.
    pub fn elements(&self) -> impl Iterator<Item = GElement> + '_ {
        let n = self.order().expect("group too large to enumerate") as u64;
        (0..n).map(move |i| self.element_at(i))
    }

    pub fn format_element(&self, g: &GElement) -> String {
        g.to_string()
    }

    /// Parses `[c1 c2 ..]`, reducing each coordinate.
    pub fn parse_element(&self, s: &str) -> Result<GElement> {
        let t = s.trim();
        let inner = t
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| Error::parse(0, "group element must be written as [c1 .. cn]"))?;
        let coords = inner
            .split_whitespace()
            .map(|tok| {
                tok.parse::<i64>()
                    .map_err(|_| Error::parse(0, format!("bad coordinate {tok:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        self.element(&coords)
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.is_empty() {
            return f.write_str("1");
        }
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for FiniteAbelianGroup {
    type Err = Error;

    /// Grammar: comma-separated `p^r:d`, whitespace ignored; `1` is the
    /// trivial group.
    fn from_str(s: &str) -> Result<Self> {
        // positions refer to the input with whitespace stripped
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(Error::parse(0, "empty group spec"));
        }
        if compact == "1" {
            return Ok(Self::trivial());
        }
        let mut comps = Vec::new();
        let mut pos = 0;
        for part in compact.split(',') {
            let bad = |msg: &str| {
                Error::parse(pos, format!("{msg} in component {part:?}; expected p^r:d"))
            };
            let (pr, d) = part.split_once(':').ok_or_else(|| bad("missing ':'"))?;
            let (p, r) = pr.split_once('^').ok_or_else(|| bad("missing '^'"))?;
            let p: u64 = p.parse().map_err(|_| bad("bad prime"))?;
            let r: u32 = r.parse().map_err(|_| bad("bad exponent"))?;
            let d: usize = d.parse().map_err(|_| bad("bad multiplicity"))?;
            let c = Component { p, r, d };
            Self::new(vec![c]).map_err(|e| Error::parse(pos, e.to_string()))?;
            comps.push(c);
            pos += part.len() + 1;
        }
        Self::new(comps)
    }
}

/// Element of a [`FiniteAbelianGroup`]: reduced residues, one per coordinate,
/// grouped by component in canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GElement(pub Vec<u64>);

impl GElement {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn coords(&self) -> &[u64] {
        &self.0
    }

    pub fn component<'a>(&'a self, group: &FiniteAbelianGroup, i: usize) -> &'a [u64] {
        let off = group.offset(i);
        &self.0[off..off + group.components()[i].d]
    }
}

impl fmt::Display for GElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("]")
    }
}

/// Square matrix over `Z_q`, `q = p^r`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModMatrix {
    dim: usize,
    p: u64,
    q: u64,
    entries: Vec<u64>,
}

impl ModMatrix {
    pub fn from_rows(p: u64, r: u32, rows: &[Vec<i64>]) -> Result<Self> {
        let q = p
            .checked_pow(r)
            .filter(|&q| q <= MAX_MODULUS)
            .ok_or_else(|| Error::InvalidGroup("modulus too large".into()))?;
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|row| row.len() != dim) {
            return Err(Error::NotSquare);
        }
        let entries = rows
            .iter()
            .flatten()
            .map(|&v| v.rem_euclid(q as i64) as u64)
            .collect();
        Ok(ModMatrix { dim, p, q, entries })
    }

    pub fn scalar(p: u64, r: u32, dim: usize, c: i64) -> Self {
        let q = p.pow(r);
        let mut entries = vec![0; dim * dim];
        let c = c.rem_euclid(q as i64) as u64;
        for i in 0..dim {
            entries[i * dim + i] = c;
        }
        ModMatrix { dim, p, q, entries }
    }

    pub fn identity(p: u64, r: u32, dim: usize) -> Self {
        Self::scalar(p, r, dim, 1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.entries.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    /// Rows with entries lifted to `(-q/2, q/2]`, for integer comparisons.
    pub fn signed_rows(&self) -> Vec<Vec<i64>> {
        let half = self.q / 2;
        self.rows()
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|v| {
                        if v > half {
                            v as i64 - self.q as i64
                        } else {
                            v as i64
                        }
                    })
                    .collect()
            })
            .collect()
    }

    fn same_ring(&self, other: &Self) -> Result<()> {
        if self.q != other.q || self.dim != other.dim {
            return Err(Error::GroupMismatch);
        }
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity_like(self)
    }

    fn identity_like(&self) -> Self {
        let mut entries = vec![0; self.dim * self.dim];
        for i in 0..self.dim {
            entries[i * self.dim + i] = 1 % self.q;
        }
        ModMatrix { entries, ..*self }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_ring(other)?;
        let n = self.dim;
        let mut entries = vec![0u64; n * n];
        for i in 0..n {
            for l in 0..n {
                let a = self.get(i, l);
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    entries[i * n + j] =
                        (entries[i * n + j] + mul_mod(a, other.get(l, j), self.q)) % self.q;
                }
            }
        }
        Ok(ModMatrix { entries, ..*self })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_ring(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| (a + self.q - b) % self.q)
            .collect();
        Ok(ModMatrix { entries, ..*self })
    }

    pub fn minus_identity(&self) -> Self {
        self.sub(&self.identity_like()).expect("same ring")
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = self.identity_like();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).expect("same ring");
            }
            base = base.mul(&base).expect("same ring");
            e >>= 1;
        }
        acc
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        (0..self.dim)
            .map(|i| {
                (0..self.dim).fold(0u64, |acc, j| {
                    (acc + mul_mod(self.get(i, j), v[j], self.q)) % self.q
                })
            })
            .collect()
    }

    /// Determinant reduced mod `p`.
    pub fn det_mod_p(&self) -> u64 {
        let p = self.p;
        let n = self.dim;
        let mut a: Vec<u64> = self.entries.iter().map(|&v| v % p).collect();
        let mut det = 1u64;
        for c in 0..n {
            let Some(piv) = (c..n).find(|&r| a[r * n + c] != 0) else {
                return 0;
            };
            if piv != c {
                for j in 0..n {
                    a.swap(piv * n + j, c * n + j);
                }
                det = (p - det) % p;
            }
            let pv = a[c * n + c];
            det = mul_mod(det, pv, p);
            let inv = inv_mod(pv, p).expect("nonzero mod prime");
            for r in c + 1..n {
                let f = mul_mod(a[r * n + c], inv, p);
                if f == 0 {
                    continue;
                }
                for j in c..n {
                    a[r * n + j] = (a[r * n + j] + p - mul_mod(f, a[c * n + j], p)) % p;
                }
            }
        }
        det
    }

    /// Invertible over `Z_q` iff invertible mod `p`.
    pub fn is_invertible(&self) -> bool {
        self.det_mod_p() != 0
    }

    /// Multiplicative order, if at most `bound`.
    pub fn order(&self, bound: u64) -> Option<u64> {
        let mut acc = self.clone();
        for t in 1..=bound {
            if acc.is_identity() {
                return Some(t);
            }
            acc = acc.mul(self).expect("same ring");
        }
        None
    }

    /// `x` with `A x = 0`, by trying every vector of `Z_q^d`.
    pub fn kernel_exhaustive(&self) -> Vec<Vec<u64>> {
        let total = self.q.pow(self.dim as u32);
        let mut out = Vec::new();
        let mut v = vec![0u64; self.dim];
        for _ in 0..total {
            if self.mul_vec(&v).iter().all(|&c| c == 0) {
                out.push(v.clone());
            }
            for c in v.iter_mut() {
                *c += 1;
                if *c < self.q {
                    break;
                }
                *c = 0;
            }
        }
        out.sort();
        out
    }

    /// Kernel of `A` over `Z_q` as generators `g_i` of cyclic factors of order
    /// `orders[i]`: every solution is a unique combination `sum c_i g_i`,
    /// `0 <= c_i < orders[i]`.
    ///
    /// Elimination over the local ring: the pivot is an entry of least
    /// `p`-valuation, so it divides its row and column.
    pub fn kernel_generators(&self) -> (Vec<Vec<u64>>, Vec<u64>) {
        let (n, p, q) = (self.dim, self.p, self.q);
        let val = |x: u64| -> u32 {
            if x == 0 {
                return u32::MAX;
            }
            let mut v = 0;
            let mut y = x;
            while y.is_multiple_of(p) {
                y /= p;
                v += 1;
            }
            v
        };
        let mut a = self.entries.clone();
        // column transform: x = Q y
        let mut qm = self.identity_like().entries;
        let mut vals = vec![u32::MAX; n];
        for t in 0..n {
            let mut best: Option<(usize, usize, u32)> = None;
            for i in t..n {
                for j in t..n {
                    let v = val(a[i * n + j]);
                    if v != u32::MAX && best.is_none_or(|(_, _, b)| v < b) {
                        best = Some((i, j, v));
                    }
                }
            }
            let Some((pi, pj, v)) = best else {
                break;
            };
            if pi != t {
                for j in 0..n {
                    a.swap(pi * n + j, t * n + j);
                }
            }
            if pj != t {
                for i in 0..n {
                    a.swap(i * n + pj, i * n + t);
                    qm.swap(i * n + pj, i * n + t);
                }
            }
            let pv = p.pow(v);
            let unit = a[t * n + t] / pv;
            let uinv = inv_mod(unit, q).expect("unit part");
            for j in 0..n {
                a[t * n + j] = mul_mod(a[t * n + j], uinv, q);
            }
            // pivot is now p^v
            for i in t + 1..n {
                let c = a[i * n + t] / pv;
                if c == 0 {
                    continue;
                }
                for j in 0..n {
                    a[i * n + j] = (a[i * n + j] + q - mul_mod(c, a[t * n + j], q)) % q;
                }
            }
            for j in t + 1..n {
                let c = a[t * n + j] / pv;
                if c == 0 {
                    continue;
                }
                for i in 0..n {
                    a[i * n + j] = (a[i * n + j] + q - mul_mod(c, a[i * n + t], q)) % q;
                    qm[i * n + j] = (qm[i * n + j] + q - mul_mod(c, qm[i * n + t], q)) % q;
                }
            }
            vals[t] = v;
        }
        let r = {
            let mut e = 0;
            let mut x = q;
            while x > 1 {
                x /= p;
                e += 1;
            }
            e
        };
        let mut gens = Vec::new();
        let mut orders = Vec::new();
        for (t, &v) in vals.iter().enumerate() {
            // y_t with p^v y_t = 0 mod p^r: y_t in p^(r-v) Z_q, a cyclic group of order p^v
            let e = v.min(r);
            if e == 0 {
                continue;
            }
            let step = p.pow(r - e);
            gens.push((0..n).map(|i| mul_mod(qm[i * n + t], step, q)).collect());
            orders.push(p.pow(e));
        }
        (gens, orders)
    }

    /// Full kernel enumerated from [`Self::kernel_generators`].
    pub fn kernel_by_elimination(&self) -> Vec<Vec<u64>> {
        let (gens, orders) = self.kernel_generators();
        let mut out = vec![vec![0u64; self.dim]];
        for (g, &ord) in gens.iter().zip(&orders) {
            let mut next = Vec::with_capacity(out.len() * ord as usize);
            for base in &out {
                let mut cur = base.clone();
                for _ in 0..ord {
                    next.push(cur.clone());
                    for (c, gi) in cur.iter_mut().zip(g) {
                        *c = (*c + gi) % self.q;
                    }
                }
            }
            out = next;
        }
        out.sort();
        out
    }

    pub fn kernel(&self) -> Vec<Vec<u64>> {
        let size = (self.q as u128).checked_pow(self.dim as u32);
        if size.is_some_and(|s| s <= EXHAUSTIVE_LIMIT as u128) {
            self.kernel_exhaustive()
        } else {
            self.kernel_by_elimination()
        }
    }

    pub fn block_diag(blocks: &[ModMatrix]) -> Result<ModMatrix> {
        let first = blocks.first().ok_or(Error::EmptyDirectSum)?;
        let n: usize = blocks.iter().map(|b| b.dim).sum();
        let mut entries = vec![0; n * n];
        let mut off = 0;
        for b in blocks {
            if b.q != first.q {
                return Err(Error::GroupMismatch);
            }
            for i in 0..b.dim {
                for j in 0..b.dim {
                    entries[(off + i) * n + off + j] = b.get(i, j);
                }
            }
            off += b.dim;
        }
        Ok(ModMatrix {
            dim: n,
            p: first.p,
            q: first.q,
            entries,
        })
    }
}

/// `F_2 = [[0,1],[1,1]]` over `Z_q`.
pub fn f2_block(p: u64, r: u32) -> ModMatrix {
    ModMatrix::from_rows(p, r, &[vec![0, 1], vec![1, 1]]).expect("literal")
}

/// `F_3 = [[0,0,1],[0,1,1],[1,1,1]]` over `Z_q`.
pub fn f3_block(p: u64, r: u32) -> ModMatrix {
    ModMatrix::from_rows(p, r, &[vec![0, 0, 1], vec![0, 1, 1], vec![1, 1, 1]]).expect("literal")
}

/// Endomorphism of `G` given by one `d x d` block per component.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GEndomorphism {
    blocks: Vec<ModMatrix>,
}

impl GEndomorphism {
    pub fn new(group: &FiniteAbelianGroup, blocks: Vec<ModMatrix>) -> Result<Self> {
        if blocks.len() != group.components().len() {
            return Err(Error::GroupMismatch);
        }
        for (b, c) in blocks.iter().zip(group.components()) {
            if b.dim != c.d || b.q != c.modulus() {
                return Err(Error::GroupMismatch);
            }
        }
        Ok(GEndomorphism { blocks })
    }

    pub fn identity(group: &FiniteAbelianGroup) -> Self {
        Self::scalar(group, |_| 1)
    }

    /// Scalar multiplication, with the scalar chosen per component.
    pub fn scalar(group: &FiniteAbelianGroup, m: impl Fn(&Component) -> i64) -> Self {
        GEndomorphism {
            blocks: group
                .components()
                .iter()
                .map(|c| ModMatrix::scalar(c.p, c.r, c.d, m(c)))
                .collect(),
        }
    }

    pub fn blocks(&self) -> &[ModMatrix] {
        &self.blocks
    }

    fn check(&self, group: &FiniteAbelianGroup) -> Result<()> {
        if self.blocks.len() != group.components().len()
            || self
                .blocks
                .iter()
                .zip(group.components())
                .any(|(b, c)| b.dim != c.d || b.q != c.modulus())
        {
            return Err(Error::GroupMismatch);
        }
        Ok(())
    }

    pub fn apply(&self, group: &FiniteAbelianGroup, g: &GElement) -> Result<GElement> {
        self.check(group)?;
        if g.0.len() != group.rank() {
            return Err(Error::GroupMismatch);
        }
        let mut out = Vec::with_capacity(g.0.len());
        for (i, b) in self.blocks.iter().enumerate() {
            out.extend(b.mul_vec(g.component(group, i)));
        }
        Ok(GElement(out))
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.blocks.len() != other.blocks.len() {
            return Err(Error::GroupMismatch);
        }
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.mul(b))
            .collect::<Result<_>>()?;
        Ok(GEndomorphism { blocks })
    }

    pub fn pow(&self, t: u64) -> Self {
        GEndomorphism {
            blocks: self.blocks.iter().map(|b| b.pow(t)).collect(),
        }
    }

    /// `self - id`.
    pub fn minus_identity(&self) -> Self {
        GEndomorphism {
            blocks: self.blocks.iter().map(|b| b.minus_identity()).collect(),
        }
    }

    /// Per-block determinant mod the block's prime.
    pub fn block_dets_mod_p(&self) -> Vec<u64> {
        self.blocks.iter().map(|b| b.det_mod_p()).collect()
    }

    /// For `Z_{p^r}`-modules of finite size, surjective iff bijective iff
    /// every block determinant is a unit.
    pub fn is_epimorphism(&self) -> bool {
        self.blocks.iter().all(|b| b.is_invertible())
    }

    pub fn is_identity(&self) -> bool {
        self.blocks.iter().all(|b| b.is_identity())
    }

    /// Elements of the kernel, componentwise cartesian product.
    pub fn kernel(&self, group: &FiniteAbelianGroup) -> Result<Vec<GElement>> {
        self.check(group)?;
        let mut out = vec![Vec::new()];
        for b in &self.blocks {
            let ker = b.kernel();
            let mut next = Vec::with_capacity(out.len() * ker.len());
            for prefix in &out {
                for v in &ker {
                    let mut e = prefix.clone();
                    e.extend_from_slice(v);
                    next.push(e);
                }
            }
            out = next;
        }
        Ok(out.into_iter().map(GElement).collect())
    }

    /// Some nonzero kernel element, found without enumerating the kernel.
    pub fn nonzero_kernel_element(&self, group: &FiniteAbelianGroup) -> Result<Option<GElement>> {
        self.check(group)?;
        for (i, b) in self.blocks.iter().enumerate() {
            let (gens, _) = b.kernel_generators();
            if let Some(g) = gens.into_iter().find(|g| g.iter().any(|&c| c != 0)) {
                let mut e = group.zero();
                let off = group.offset(i);
                e.0[off..off + b.dim].copy_from_slice(&g);
                return Ok(Some(e));
            }
        }
        Ok(None)
    }

    /// Epimorphicity by brute force over the image. Small groups only.
    pub fn is_surjective_bruteforce(&self, group: &FiniteAbelianGroup) -> Result<bool> {
        self.check(group)?;
        let n = group.order().ok_or(Error::Overflow("group order"))?;
        let mut hit = vec![false; n as usize];
        for g in group.elements() {
            hit[group.index_of(&self.apply(group, &g)?) as usize] = true;
        }
        Ok(hit.into_iter().all(|h| h))
    }
}

/// Block endomorphism with every block invertible.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GAutomorphism(GEndomorphism);

impl GAutomorphism {
    pub fn new(endo: GEndomorphism) -> Result<Self> {
        for (i, b) in endo.blocks.iter().enumerate() {
            if !b.is_invertible() {
                return Err(Error::NotInvertible(format!(
                    "block {i} has determinant divisible by {} (mod {})",
                    b.p, b.q
                )));
            }
        }
        Ok(GAutomorphism(endo))
    }

    pub fn from_blocks(group: &FiniteAbelianGroup, blocks: Vec<ModMatrix>) -> Result<Self> {
        Self::new(GEndomorphism::new(group, blocks)?)
    }

    pub fn identity(group: &FiniteAbelianGroup) -> Self {
        GAutomorphism(GEndomorphism::identity(group))
    }

    pub fn as_endomorphism(&self) -> &GEndomorphism {
        &self.0
    }

    pub fn blocks(&self) -> &[ModMatrix] {
        self.0.blocks()
    }

    pub fn apply(&self, group: &FiniteAbelianGroup, g: &GElement) -> Result<GElement> {
        self.0.apply(group, g)
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        Ok(GAutomorphism(self.0.compose(&other.0)?))
    }

    pub fn pow(&self, t: u64) -> Self {
        GAutomorphism(self.0.pow(t))
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_identity()
    }

    /// Multiplicative order; finite because `GL_d(Z_q)` is finite.
    pub fn order(&self, bound: u64) -> Option<u64> {
        let mut acc: u64 = 1;
        for b in self.blocks() {
            let o = b.order(bound)?;
            acc = num_integer::lcm(acc, o);
        }
        Some(acc)
    }

    pub fn inverse(&self) -> Self {
        let o = self.order(u64::MAX).expect("finite order");
        self.pow(o - 1)
    }

    pub fn fixed_points(&self, group: &FiniteAbelianGroup) -> Result<Vec<GElement>> {
        self.0.minus_identity().kernel(group)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn g(s: &str) -> FiniteAbelianGroup {
        s.parse().unwrap()
    }

    #[test]
    fn unit_examples() {
        assert!(is_unit(4, 25, 5));
        for p in [5u64, 7, 11, 13] {
            assert!(is_unit(-3, p, p));
        }
        assert!(!is_unit(6, 9, 3));
        assert!(!is_unit(0, 2, 2));
    }

    #[test]
    fn block_dets() {
        assert_eq!(f2_block(2, 1).det_mod_p(), 1);
        assert_eq!(f2_block(2, 1).minus_identity().det_mod_p(), 1);
        assert_eq!(f3_block(2, 1).minus_identity().det_mod_p(), 1);
        for r in 1..=4 {
            assert!(f2_block(2, r).minus_identity().is_invertible());
            assert!(f3_block(2, r).minus_identity().is_invertible());
        }
    }

    #[test]
    fn apply_examples() {
        let z2 = g("2^1:2");
        let f = GAutomorphism::from_blocks(&z2, vec![f2_block(2, 1)]).unwrap();
        assert_eq!(
            f.apply(&z2, &GElement(vec![1, 0])).unwrap(),
            GElement(vec![0, 1])
        );
        let id = GAutomorphism::identity(&z2);
        assert_eq!(
            id.apply(&z2, &GElement(vec![1, 1])).unwrap(),
            GElement(vec![1, 1])
        );
        let z5 = g("5^1:1");
        let two = GAutomorphism::new(GEndomorphism::scalar(&z5, |_| 2)).unwrap();
        assert_eq!(
            two.apply(&z5, &GElement(vec![3])).unwrap(),
            GElement(vec![1])
        );
        assert_eq!(
            two.apply(&z2, &GElement(vec![1, 0])),
            Err(Error::GroupMismatch)
        );
    }

    #[test]
    fn epimorphism_examples() {
        let z5 = g("5^1:1");
        assert!(GEndomorphism::scalar(&z5, |_| 1).is_epimorphism());
        let z2 = g("2^1:1");
        assert!(!GEndomorphism::scalar(&z2, |_| 2).is_epimorphism());
        assert!(GAutomorphism::new(GEndomorphism::scalar(&z2, |_| 2)).is_err());
    }

    #[test]
    fn powers_and_fixed_points() {
        let f2 = f2_block(2, 1);
        assert_eq!(f2.pow(5).rows(), vec![vec![1, 1], vec![1, 0]]);
        assert_eq!(f2.pow(5), f2.pow(2));
        let f3 = f3_block(2, 1);
        assert_eq!(f3.order(100), Some(7));
        let z2_3 = g("2^1:3");
        let f3a = GAutomorphism::from_blocks(&z2_3, vec![f3]).unwrap();
        for j in 1..=6 {
            assert_eq!(f3a.pow(j).fixed_points(&z2_3).unwrap(), vec![z2_3.zero()]);
        }
        let grp = g("2^1:1,3^1:1");
        assert_eq!(
            GAutomorphism::identity(&grp)
                .fixed_points(&grp)
                .unwrap()
                .len(),
            6
        );
    }

    #[test]
    fn kernel_methods_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (p, r, d) in [
            (2u64, 3u32, 3usize),
            (3, 2, 3),
            (5, 1, 4),
            (2, 1, 5),
            (7, 2, 2),
        ] {
            for _ in 0..20 {
                let rows: Vec<Vec<i64>> = (0..d)
                    .map(|_| (0..d).map(|_| rng.gen_range(-20..20)).collect())
                    .collect();
                let mut a = ModMatrix::from_rows(p, r, &rows).unwrap();
                if rng.gen_bool(0.3) {
                    // force a rank drop
                    a = a.mul(&ModMatrix::scalar(p, r, d, p as i64)).unwrap();
                }
                assert_eq!(a.kernel_exhaustive(), a.kernel_by_elimination(), "{a:?}");
            }
        }
    }

    #[test]
    fn choose_m_examples() {
        assert_eq!(choose_m(7, 1, 3), Some(3));
        assert_eq!(choose_m(5, 1, 2), Some(2));
        assert_eq!(choose_m(2, 3, 2), None);
        assert_eq!(choose_m(3, 2, 2), None);
        assert_eq!(choose_m(2, 1, 3), None);
        assert_eq!(choose_m(3, 1, 3), Some(2));
    }

    #[test]
    fn choose_m_ignores_exponent() {
        for p in (2..=50).filter(|&p| is_prime(p)) {
            for e in [2, 3] {
                let base = choose_m(p, 1, e);
                for r in 2..=4 {
                    assert_eq!(choose_m(p, r, e), base);
                }
                if let Some(m) = base {
                    let q = p.pow(2);
                    let me = pow_mod(m, e as u64, q) as i64;
                    assert!(is_unit(me, q, p) && is_unit(1 - me, q, p));
                }
            }
        }
    }

    #[test]
    fn group_spec_parsing() {
        let grp = g(" 2^2:2 , 3^2:3, 5^1:1");
        assert_eq!(grp.to_string(), "2^2:2,3^2:3,5^1:1");
        assert_eq!(grp.order(), Some(16 * 729 * 5));
        assert_eq!(g("3^1:1,2^1:1,3^1:2").to_string(), "2^1:1,3^1:3");
        assert_eq!(g("1").to_string(), "1");
        assert!(matches!(
            "".parse::<FiniteAbelianGroup>(),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            "4^1:1".parse::<FiniteAbelianGroup>(),
            Err(Error::Parse { position: 0, .. })
        ));
        assert!(matches!(
            "2^1:1,3^1".parse::<FiniteAbelianGroup>(),
            Err(Error::Parse { position: 6, .. })
        ));
        assert!("2^40:1".parse::<FiniteAbelianGroup>().is_err());
    }

    #[test]
    fn element_indexing() {
        let grp = g("2^1:1,3^1:2");
        let all: Vec<_> = grp.elements().collect();
        assert_eq!(all.len(), 18);
        for (i, e) in all.iter().enumerate() {
            assert_eq!(grp.index_of(e), i as u64);
            assert!(grp.contains(e));
        }
        assert_eq!(
            grp.parse_element("[1 -1 4]").unwrap(),
            GElement(vec![1, 2, 1])
        );
    }

    #[test]
    fn inverse_automorphism() {
        let grp = g("2^2:2,5^1:1");
        let f =
            GAutomorphism::from_blocks(&grp, vec![f2_block(2, 2), ModMatrix::scalar(5, 1, 1, 2)])
                .unwrap();
        assert!(f.compose(&f.inverse()).unwrap().is_identity());
    }
}
