//! Exhaustive ground truth on the finite quotients `G wr (Z_n)^k`.
//!
//! Elements are encoded as `t + P * (sum_x sigma[x] * |G|^x)` where `P = n^k`
//! is the number of positions, `t` the position index of the translation part
//! and `sigma[x]` the index of the fiber value at position `x`. Integer order
//! on these codes is the canonical order used for class representatives.

use petgraph::unionfind::UnionFind;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::verify::{classify_sigma_reidemeister, SigmaClass};
use crate::wreath::{WreathAutomorphism, WreathElement, WreathGroup};
use crate::zqmod::{FiniteAbelianGroup, GAutomorphism};

/// Largest quotient enumerated by union-find.
pub const DEFAULT_CAP: u64 = 2_000_000;
/// Largest quotient for the quadratic Burnside count.
pub const BURNSIDE_CAP: u64 = 5_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteElement {
    pub sigma: Vec<u32>,
    pub t: u32,
}

#[derive(Clone, Debug)]
pub struct FiniteWreath {
    base: FiniteAbelianGroup,
    n: u64,
    k: usize,
    g: usize,
    positions: usize,
    order: u64,
    add: Vec<u32>,
    neg: Vec<u32>,
}

impl FiniteWreath {
    pub fn new(base: FiniteAbelianGroup, n: u64, k: usize, cap: u64) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(Error::InvalidGroup(format!(
                "quotient needs n >= 1 and k >= 1, got n = {n}, k = {k}"
            )));
        }
        let too_big = |size: String| Error::CapExceeded { size, cap };
        let positions = n
            .checked_pow(k as u32)
            .filter(|&p| p <= cap)
            .ok_or_else(|| too_big(format!("{n}^{k} positions")))?;
        let g = base
            .order()
            .filter(|&g| g <= cap as u128)
            .ok_or_else(|| too_big(format!("|G| = {:?}", base.order())))? as u64;
        let order = g
            .checked_pow(positions as u32)
            .and_then(|s| s.checked_mul(positions))
            .filter(|&o| o <= cap)
            .ok_or_else(|| too_big(format!("{g}^{positions} * {positions}")))?;
        let g = g as usize;
        let elems: Vec<_> = base.elements().collect();
        let mut add = vec![0u32; g * g];
        for (i, a) in elems.iter().enumerate() {
            for (j, b) in elems.iter().enumerate() {
                add[i * g + j] = base.index_of(&base.add(a, b)?) as u32;
            }
        }
        let neg = elems
            .iter()
            .map(|a| Ok(base.index_of(&base.neg(a)?) as u32))
            .collect::<Result<Vec<_>>>()?;
        Ok(FiniteWreath {
            base,
            n,
            k,
            g,
            positions: positions as usize,
            order,
            add,
            neg,
        })
    }

    pub fn base(&self) -> &FiniteAbelianGroup {
        &self.base
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn positions(&self) -> usize {
        self.positions
    }

    pub fn position_coords(&self, mut idx: usize) -> Vec<u64> {
        let n = self.n as usize;
        (0..self.k)
            .map(|_| {
                let c = idx % n;
                idx /= n;
                c as u64
            })
            .collect()
    }

    pub fn position_index(&self, coords: &[i64]) -> usize {
        let n = self.n as i64;
        coords.iter().rev().fold(0usize, |acc, &c| {
            acc * n as usize + c.rem_euclid(n) as usize
        })
    }

    fn pos_add(&self, a: usize, b: usize) -> usize {
        let n = self.n as usize;
        let (mut a, mut b, mut out, mut place) = (a, b, 0, 1);
        for _ in 0..self.k {
            out += ((a % n + b % n) % n) * place;
            a /= n;
            b /= n;
            place *= n;
        }
        out
    }

    fn pos_neg(&self, a: usize) -> usize {
        let n = self.n as usize;
        let (mut a, mut out, mut place) = (a, 0, 1);
        for _ in 0..self.k {
            out += ((n - a % n) % n) * place;
            a /= n;
            place *= n;
        }
        out
    }

    pub fn encode(&self, x: &FiniteElement) -> u64 {
        let s = x
            .sigma
            .iter()
            .rev()
            .fold(0u64, |acc, &v| acc * self.g as u64 + v as u64);
        s * self.positions as u64 + x.t as u64
    }

    pub fn decode(&self, code: u64) -> FiniteElement {
        let p = self.positions as u64;
        let t = (code % p) as u32;
        let mut s = code / p;
        let sigma = (0..self.positions)
            .map(|_| {
                let v = (s % self.g as u64) as u32;
                s /= self.g as u64;
                v
            })
            .collect();
        FiniteElement { sigma, t }
    }

    pub fn identity(&self) -> FiniteElement {
        FiniteElement {
            sigma: vec![0; self.positions],
            t: 0,
        }
    }

    /// `(s1, t1)(s2, t2) = (s1 + alpha(t1) s2, t1 + t2)`.
    pub fn multiply(&self, a: &FiniteElement, b: &FiniteElement) -> FiniteElement {
        let mut sigma = a.sigma.clone();
        for (x, &v) in b.sigma.iter().enumerate() {
            if v != 0 {
                let y = self.pos_add(x, a.t as usize);
                sigma[y] = self.add[sigma[y] as usize * self.g + v as usize];
            }
        }
        FiniteElement {
            sigma,
            t: self.pos_add(a.t as usize, b.t as usize) as u32,
        }
    }

    pub fn inverse(&self, a: &FiniteElement) -> FiniteElement {
        let nt = self.pos_neg(a.t as usize);
        let mut sigma = vec![0; self.positions];
        for (x, &v) in a.sigma.iter().enumerate() {
            sigma[self.pos_add(x, nt)] = self.neg[v as usize];
        }
        FiniteElement {
            sigma,
            t: nt as u32,
        }
    }

    /// Point masses of the generators of `G` at every position, then the
    /// translation basis.
    pub fn generators(&self) -> Vec<FiniteElement> {
        let mut out = Vec::new();
        for a in self.base.generators() {
            let ai = self.base.index_of(&a) as u32;
            for x in 0..self.positions {
                let mut e = self.identity();
                e.sigma[x] = ai;
                out.push(e);
            }
        }
        for i in 0..self.k {
            let mut coords = vec![0i64; self.k];
            coords[i] = 1;
            out.push(FiniteElement {
                sigma: vec![0; self.positions],
                t: self.position_index(&coords) as u32,
            });
        }
        out
    }

    /// Image under `Sigma -> Sigma_n` (fibers summed over residues) and
    /// `Z^k -> (Z_n)^k`.
    pub fn reduce(&self, w: &WreathElement) -> Result<FiniteElement> {
        let mut e = self.identity();
        for (x, a) in w.sigma.iter() {
            let y = self.position_index(&x.0);
            let ai = self.base.index_of(a) as usize;
            e.sigma[y] = self.add[e.sigma[y] as usize * self.g + ai];
        }
        e.t = self.position_index(&w.z.0) as u32;
        Ok(e)
    }
}

/// Normalized automorphism `(F, M mod n, twist mod n)` of `G wr (Z_n)^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteAutomorphism {
    pub f: GAutomorphism,
    pub n: u64,
    pub m: Vec<Vec<u64>>,
    pub twist: Vec<u64>,
}

impl FiniteAutomorphism {
    pub fn identity(base: &FiniteAbelianGroup, n: u64, k: usize) -> Self {
        FiniteAutomorphism {
            f: GAutomorphism::identity(base),
            n,
            m: (0..k)
                .map(|i| (0..k).map(|j| u64::from(i == j)).collect())
                .collect(),
            twist: vec![0; k],
        }
    }

    pub fn k(&self) -> usize {
        self.twist.len()
    }

    fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        self.m
            .iter()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .fold(0u64, |acc, (a, b)| (acc + a * b) % self.n)
            })
            .collect()
    }

    /// Order of `M mod n`, if at most `bound`.
    pub fn matrix_order(&self, bound: u64) -> Option<u64> {
        let k = self.k();
        let n = self.n;
        let mul = |a: &Vec<Vec<u64>>, b: &Vec<Vec<u64>>| -> Vec<Vec<u64>> {
            (0..k)
                .map(|i| {
                    (0..k)
                        .map(|j| (0..k).fold(0, |acc, l| (acc + a[i][l] * b[l][j]) % n))
                        .collect()
                })
                .collect()
        };
        let id = FiniteAutomorphism::identity(&FiniteAbelianGroup::trivial(), n, k).m;
        let mut p = self.m.clone();
        for t in 1..=bound {
            if p == id {
                return Some(t);
            }
            p = mul(&p, &self.m);
        }
        None
    }
}

/// Reduction of `phi` modulo `n`.
pub fn descend(phi: &WreathAutomorphism, n: u64) -> Result<FiniteAutomorphism> {
    if n < 2 {
        return Err(Error::InvalidGroup(format!(
            "descent needs n >= 2, got {n}"
        )));
    }
    let r = |v: i64| v.rem_euclid(n as i64) as u64;
    Ok(FiniteAutomorphism {
        f: phi.f().clone(),
        n,
        m: phi
            .m()
            .rows()
            .iter()
            .map(|row| row.iter().map(|&v| r(v)).collect())
            .collect(),
        twist: phi.twist().0.iter().map(|&v| r(v)).collect(),
    })
}

/// `psi` as lookup tables on one quotient.
struct Bound<'a> {
    gamma: &'a FiniteWreath,
    f: Vec<u32>,
    linear: Vec<u32>,
    affine: Vec<u32>,
}

impl<'a> Bound<'a> {
    fn new(gamma: &'a FiniteWreath, psi: &FiniteAutomorphism) -> Result<Self> {
        if psi.n != gamma.n || psi.k() != gamma.k {
            return Err(Error::DimensionMismatch {
                expected: gamma.k,
                found: psi.k(),
            });
        }
        let base = &gamma.base;
        let f = base
            .elements()
            .map(|a| Ok(base.index_of(&psi.f.apply(base, &a)?) as u32))
            .collect::<Result<Vec<_>>>()?;
        let mut linear = Vec::with_capacity(gamma.positions);
        let mut affine = Vec::with_capacity(gamma.positions);
        for x in 0..gamma.positions {
            let mx = psi.mul_vec(&gamma.position_coords(x));
            let shifted: Vec<i64> = mx
                .iter()
                .zip(&psi.twist)
                .map(|(a, b)| (a + b) as i64)
                .collect();
            let mx: Vec<i64> = mx.iter().map(|&v| v as i64).collect();
            linear.push(gamma.position_index(&mx) as u32);
            affine.push(gamma.position_index(&shifted) as u32);
        }
        Ok(Bound {
            gamma,
            f,
            linear,
            affine,
        })
    }

    fn apply(&self, x: &FiniteElement) -> FiniteElement {
        let mut sigma = vec![0; self.gamma.positions];
        for (p, &v) in x.sigma.iter().enumerate() {
            sigma[self.affine[p] as usize] = self.f[v as usize];
        }
        FiniteElement {
            sigma,
            t: self.linear[x.t as usize],
        }
    }
}

/// `psi(x)` in the quotient.
pub fn apply(
    gamma: &FiniteWreath,
    psi: &FiniteAutomorphism,
    x: &FiniteElement,
) -> Result<FiniteElement> {
    Ok(Bound::new(gamma, psi)?.apply(x))
}

#[derive(Clone, Debug)]
pub struct TwistedClasses {
    pub count: u64,
    /// Least code in each class, increasing; class `i` has representative `i`.
    pub representatives: Vec<u64>,
    /// Class index of every element code.
    pub labels: Vec<u32>,
}

/// Components of `x ~ g x psi(g)^-1` over the generators, by union-find.
pub fn twisted_classes_bruteforce(
    gamma: &FiniteWreath,
    psi: &FiniteAutomorphism,
) -> Result<TwistedClasses> {
    let bound = Bound::new(gamma, psi)?;
    let n = gamma.order as usize;
    let mut uf = UnionFind::<u32>::new(n);
    for g in gamma.generators() {
        let h = gamma.inverse(&bound.apply(&g));
        let targets: Vec<u32> = (0..n as u64)
            .into_par_iter()
            .map(|i| {
                let x = gamma.decode(i);
                gamma.encode(&gamma.multiply(&gamma.multiply(&g, &x), &h)) as u32
            })
            .collect();
        for (i, &j) in targets.iter().enumerate() {
            uf.union(i as u32, j);
        }
    }
    let roots = uf.into_labeling();
    let mut class_of_root: HashMap<u32, u32> = HashMap::new();
    let mut representatives = Vec::new();
    let labels = roots
        .iter()
        .enumerate()
        .map(|(i, r)| {
            *class_of_root.entry(*r).or_insert_with(|| {
                representatives.push(i as u64);
                (representatives.len() - 1) as u32
            })
        })
        .collect();
    Ok(TwistedClasses {
        count: representatives.len() as u64,
        representatives,
        labels,
    })
}

/// `#{(g, x) : g x psi(g)^-1 = x} / |Gamma|`.
pub fn burnside_count(gamma: &FiniteWreath, psi: &FiniteAutomorphism, cap: u64) -> Result<u64> {
    if gamma.order > cap {
        return Err(Error::CapExceeded {
            size: gamma.order.to_string(),
            cap,
        });
    }
    let bound = Bound::new(gamma, psi)?;
    let all: Vec<FiniteElement> = (0..gamma.order).map(|i| gamma.decode(i)).collect();
    let pairs: u64 = all
        .par_iter()
        .map(|g| {
            let h = gamma.inverse(&bound.apply(g));
            all.iter()
                .filter(|x| gamma.multiply(&gamma.multiply(g, x), &h) == **x)
                .count() as u64
        })
        .sum();
    if !pairs.is_multiple_of(gamma.order) {
        return Err(Error::Internal(format!(
            "{pairs} fixed pairs is not a multiple of |Gamma| = {}",
            gamma.order
        )));
    }
    Ok(pairs / gamma.order)
}

/// Ordinary conjugacy classes mapped to themselves by `psi`.
pub fn fixed_conjugacy_classes(gamma: &FiniteWreath, psi: &FiniteAutomorphism) -> Result<u64> {
    let bound = Bound::new(gamma, psi)?;
    let conj = twisted_classes_bruteforce(
        gamma,
        &FiniteAutomorphism::identity(&gamma.base, gamma.n, gamma.k),
    )?;
    Ok(conj
        .representatives
        .iter()
        .enumerate()
        .filter(|(c, &r)| {
            let image = gamma.encode(&bound.apply(&gamma.decode(r)));
            conj.labels[image as usize] as usize == *c
        })
        .count() as u64)
}

/// Labels of the classes of `t ~ t + (E - M) s` on `(Z_n)^k`.
pub fn base_classes(gamma: &FiniteWreath, psi: &FiniteAutomorphism) -> Result<Vec<u32>> {
    let bound = Bound::new(gamma, psi)?;
    let mut uf = UnionFind::<u32>::new(gamma.positions);
    for i in 0..gamma.k {
        let mut coords = vec![0i64; gamma.k];
        coords[i] = 1;
        let e = gamma.position_index(&coords);
        let step = gamma.pos_add(e, gamma.pos_neg(bound.linear[e] as usize));
        for t in 0..gamma.positions {
            uf.union(t as u32, gamma.pos_add(t, step) as u32);
        }
    }
    let mut seen = HashMap::new();
    Ok(uf
        .into_labeling()
        .into_iter()
        .map(|r| {
            let next = seen.len() as u32;
            *seen.entry(r).or_insert(next)
        })
        .collect())
}

/// Whether `F^L - E` is onto for every orbit length `L` of every affine map
/// `u -> Mu + c` on `(Z_n)^k`.
pub fn quotient_epimorphic(gamma: &FiniteWreath, psi: &FiniteAutomorphism) -> Result<bool> {
    let bound = Bound::new(gamma, psi)?;
    let mut lengths = std::collections::BTreeSet::new();
    for c in 0..gamma.positions {
        let mut seen = vec![false; gamma.positions];
        for start in 0..gamma.positions {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut u = start;
            while !seen[u] {
                seen[u] = true;
                len += 1;
                u = gamma.pos_add(bound.linear[u] as usize, c);
            }
            lengths.insert(len as u64);
        }
    }
    Ok(lengths.into_iter().all(|l| {
        psi.f
            .pow(l)
            .as_endomorphism()
            .minus_identity()
            .is_epimorphism()
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PullbackVerdict {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PullbackReport {
    pub class_count: u64,
    pub base_class_count: u64,
    /// Every twisted class is the full preimage of one base class.
    pub cylinders: bool,
    pub preconditions_hold: bool,
    pub notes: Vec<String>,
    pub verdict: PullbackVerdict,
}

/// Exhaustive check that the twisted classes of `psi` are preimages of the
/// classes of `M mod n` under the projection to `(Z_n)^k`.
///
/// `lift` is the automorphism of `G wr Z^k` that `psi` descends from; its
/// summands must all be trivial for the check to be meaningful.
pub fn pullback_check(
    gamma: &FiniteWreath,
    psi: &FiniteAutomorphism,
    lift: Option<&WreathAutomorphism>,
) -> Result<PullbackReport> {
    let mut notes = Vec::new();
    if let Some(phi) = lift {
        let wreath = WreathGroup::new(gamma.base.clone(), phi.k())?;
        match classify_sigma_reidemeister(&wreath, phi, crate::verify::ORDER_BOUND) {
            Ok(SigmaClass::One) => {}
            Ok(SigmaClass::Infinite { orbit_length, .. }) => notes.push(format!(
                "lift has a nonzero fixed element on an orbit of length {orbit_length}"
            )),
            Err(e) => notes.push(format!("lift not classifiable: {e}")),
        }
    }
    if !quotient_epimorphic(gamma, psi)? {
        notes.push(format!(
            "F^L - E is singular for some orbit length mod {}",
            gamma.n
        ));
    }
    let classes = twisted_classes_bruteforce(gamma, psi)?;
    let base = base_classes(gamma, psi)?;
    let base_count = base.iter().map(|&b| b as u64 + 1).max().unwrap_or(0);
    let mut class_of_base: BTreeMap<u32, u32> = BTreeMap::new();
    let mut consistent = true;
    for (code, &label) in classes.labels.iter().enumerate() {
        let b = base[code % gamma.positions];
        if *class_of_base.entry(b).or_insert(label) != label {
            consistent = false;
            break;
        }
    }
    let cylinders = consistent && classes.count == base_count;
    let preconditions_hold = notes.is_empty();
    let verdict = match (preconditions_hold, cylinders) {
        (false, _) => PullbackVerdict::Inconclusive,
        (true, true) => PullbackVerdict::Holds,
        (true, false) => PullbackVerdict::Fails,
    };
    Ok(PullbackReport {
        class_count: classes.count,
        base_class_count: base_count,
        cylinders,
        preconditions_hold,
        notes,
        verdict,
    })
}

/// The three class counts of one quotient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleCount {
    pub union_find: u64,
    pub burnside: Option<u64>,
    pub fixed_classes: u64,
}

impl TripleCount {
    pub fn agree(&self) -> bool {
        self.union_find == self.fixed_classes && self.burnside.is_none_or(|b| b == self.union_find)
    }
}

/// Runs all three counts; Burnside is skipped above `burnside_cap`.
pub fn triple_count(
    gamma: &FiniteWreath,
    psi: &FiniteAutomorphism,
    burnside_cap: u64,
) -> Result<TripleCount> {
    let union_find = twisted_classes_bruteforce(gamma, psi)?.count;
    let burnside = if gamma.order <= burnside_cap {
        Some(burnside_count(gamma, psi, burnside_cap)?)
    } else {
        None
    };
    Ok(TripleCount {
        union_find,
        burnside,
        fixed_classes: fixed_conjugacy_classes(gamma, psi)?,
    })
}
