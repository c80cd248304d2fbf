//! The restricted wreath product `G wr Z^k = Sigma x| Z^k`, where
//! `Sigma = (+)_{x in Z^k} G_x` and `z in Z^k` acts by shifting coordinates.
//!
//! Automorphisms are restricted to the normalized shape `(F, M, twist)`:
//! `Z^k` is mapped to itself by `M`, and a point mass `a_x` goes to
//! `(F a)_{Mx + twist}`. A nonzero twist `w` realizes conjugation by the
//! translation `(0, w)` composed with the untwisted map.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::intlat::{affine_step, matrix_order};
use crate::zqmod::{FiniteAbelianGroup, GAutomorphism, GElement};
use crate::{IntMatrix, ZkVector};

pub const MAX_RANK: usize = 16;

/// Finitely supported map `Z^k -> G` with no zero values stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Support(BTreeMap<ZkVector, GElement>);

impl Support {
    pub fn new() -> Self {
        Support(BTreeMap::new())
    }

    pub fn point(x: ZkVector, a: GElement) -> Self {
        let mut s = Support::new();
        if !a.is_zero() {
            s.0.insert(x, a);
        }
        s
    }

    pub fn get(&self, x: &ZkVector) -> Option<&GElement> {
        self.0.get(x)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ZkVector, &GElement)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Adds `a` at `x`, dropping the entry if the sum is zero.
    pub fn add_at(&mut self, group: &FiniteAbelianGroup, x: ZkVector, a: &GElement) -> Result<()> {
        let sum = match self.0.get(&x) {
            Some(old) => group.add(old, a)?,
            None => a.clone(),
        };
        if sum.is_zero() {
            self.0.remove(&x);
        } else {
            self.0.insert(x, sum);
        }
        Ok(())
    }

    pub fn add(&self, group: &FiniteAbelianGroup, other: &Support) -> Result<Support> {
        let mut out = self.clone();
        for (x, a) in other.iter() {
            out.add_at(group, x.clone(), a)?;
        }
        Ok(out)
    }

    pub fn neg(&self, group: &FiniteAbelianGroup) -> Result<Support> {
        let mut out = BTreeMap::new();
        for (x, a) in self.iter() {
            out.insert(x.clone(), group.neg(a)?);
        }
        Ok(Support(out))
    }

    /// Largest coordinate spread of the support (0 for at most one point).
    pub fn diameter(&self) -> i64 {
        let Some((first, _)) = self.0.iter().next() else {
            return 0;
        };
        let k = first.dim();
        (0..k)
            .map(|i| {
                let (lo, hi) = self.0.keys().fold((i64::MAX, i64::MIN), |(lo, hi), x| {
                    (lo.min(x.0[i]), hi.max(x.0[i]))
                });
                hi - lo
            })
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (x, a)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{x}->{a}")?;
        }
        f.write_str("}")
    }
}

/// `alpha(z)`: translate every key by `z`.
pub fn shift(z: &ZkVector, s: &Support) -> Result<Support> {
    let mut out = BTreeMap::new();
    for (x, a) in s.iter() {
        out.insert(x.add(z)?, a.clone());
    }
    Ok(Support(out))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WreathElement {
    pub sigma: Support,
    pub z: ZkVector,
}

/// Something that maps point masses `a_x` to point masses.
pub trait PointAction {
    fn act_point(&self, x: &ZkVector, a: &GElement) -> Result<(ZkVector, GElement)>;
}

/// Normalized automorphism `(F, M, twist)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WreathAutomorphism {
    f: GAutomorphism,
    m: IntMatrix,
    twist: ZkVector,
}

impl WreathAutomorphism {
    /// Requires `|det M| = 1`; the twist starts at zero.
    pub fn new(f: GAutomorphism, m: IntMatrix) -> Result<Self> {
        let k = m.dim();
        if !(1..=MAX_RANK).contains(&k) {
            return Err(Error::RankOutOfRange(k));
        }
        if !m.is_unimodular()? {
            return Err(Error::NotUnimodular(m.determinant()?.to_string()));
        }
        Ok(WreathAutomorphism {
            f,
            m,
            twist: ZkVector::zero(k),
        })
    }

    pub fn identity(group: &FiniteAbelianGroup, k: usize) -> Result<Self> {
        Self::new(GAutomorphism::identity(group), IntMatrix::identity(k))
    }

    /// The same map composed with conjugation by the translation `twist`.
    pub fn with_twist(mut self, twist: ZkVector) -> Result<Self> {
        if twist.dim() != self.m.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.m.dim(),
                found: twist.dim(),
            });
        }
        self.twist = twist;
        Ok(self)
    }

    pub fn f(&self) -> &GAutomorphism {
        &self.f
    }

    pub fn m(&self) -> &IntMatrix {
        &self.m
    }

    pub fn twist(&self) -> &ZkVector {
        &self.twist
    }

    pub fn k(&self) -> usize {
        self.m.dim()
    }

    /// Order of `M` when at most `bound`, else `InfiniteOrder`.
    pub fn matrix_order(&self, bound: u64) -> Result<u64> {
        matrix_order(&self.m, bound)?.ok_or(Error::InfiniteOrder(bound))
    }
}

/// `F` applied fiberwise with the indexing map `x -> Mx + twist`.
pub struct FiberwiseAction<'a> {
    pub group: &'a FiniteAbelianGroup,
    pub phi: &'a WreathAutomorphism,
}

impl PointAction for FiberwiseAction<'_> {
    fn act_point(&self, x: &ZkVector, a: &GElement) -> Result<(ZkVector, GElement)> {
        Ok((
            affine_step(&self.phi.m, &self.phi.twist, x)?,
            self.phi.f.apply(self.group, a)?,
        ))
    }
}

/// Extends a point action additively to a finitely supported `sigma`.
pub fn act_on_support<A: PointAction>(
    action: &A,
    group: &FiniteAbelianGroup,
    s: &Support,
) -> Result<Support> {
    let mut out = Support::new();
    for (x, a) in s.iter() {
        let (y, b) = action.act_point(x, a)?;
        out.add_at(group, y, &b)?;
    }
    Ok(out)
}

/// The ambient group `G wr Z^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WreathGroup {
    base: FiniteAbelianGroup,
    k: usize,
}

impl WreathGroup {
    pub fn new(base: FiniteAbelianGroup, k: usize) -> Result<Self> {
        if !(1..=MAX_RANK).contains(&k) {
            return Err(Error::RankOutOfRange(k));
        }
        Ok(WreathGroup { base, k })
    }

    pub fn base(&self) -> &FiniteAbelianGroup {
        &self.base
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn identity(&self) -> WreathElement {
        WreathElement {
            sigma: Support::new(),
            z: ZkVector::zero(self.k),
        }
    }

    /// `(a_x, 0)`.
    pub fn point_mass(&self, x: ZkVector, a: GElement) -> WreathElement {
        WreathElement {
            sigma: Support::point(x, a),
            z: ZkVector::zero(self.k),
        }
    }

    pub fn translation(&self, z: ZkVector) -> WreathElement {
        WreathElement {
            sigma: Support::new(),
            z,
        }
    }

    fn check(&self, g: &WreathElement) -> Result<()> {
        if g.z.dim() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                found: g.z.dim(),
            });
        }
        for (x, a) in g.sigma.iter() {
            if x.dim() != self.k {
                return Err(Error::DimensionMismatch {
                    expected: self.k,
                    found: x.dim(),
                });
            }
            if !self.base.contains(a) {
                return Err(Error::GroupMismatch);
            }
        }
        Ok(())
    }

    /// `(s1, z1)(s2, z2) = (s1 + alpha(z1) s2, z1 + z2)`.
    pub fn multiply(&self, g: &WreathElement, h: &WreathElement) -> Result<WreathElement> {
        self.check(g)?;
        self.check(h)?;
        Ok(WreathElement {
            sigma: g.sigma.add(&self.base, &shift(&g.z, &h.sigma)?)?,
            z: g.z.add(&h.z)?,
        })
    }

    /// `(s, z)^-1 = (-alpha(-z) s, -z)`.
    pub fn inverse(&self, g: &WreathElement) -> Result<WreathElement> {
        self.check(g)?;
        let nz = g.z.neg()?;
        Ok(WreathElement {
            sigma: shift(&nz, &g.sigma)?.neg(&self.base)?,
            z: nz,
        })
    }

    pub fn apply_automorphism(
        &self,
        phi: &WreathAutomorphism,
        g: &WreathElement,
    ) -> Result<WreathElement> {
        self.check(g)?;
        if phi.k() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                found: phi.k(),
            });
        }
        let action = FiberwiseAction {
            group: &self.base,
            phi,
        };
        Ok(WreathElement {
            sigma: act_on_support(&action, &self.base, &g.sigma)?,
            z: phi.m.mul_vec(&g.z)?,
        })
    }

    /// `phi'` on `Sigma` alone.
    pub fn apply_to_support(&self, phi: &WreathAutomorphism, s: &Support) -> Result<Support> {
        act_on_support(
            &FiberwiseAction {
                group: &self.base,
                phi,
            },
            &self.base,
            s,
        )
    }

    /// `g x phi(g^-1)`.
    pub fn twisted_conjugate(
        &self,
        g: &WreathElement,
        x: &WreathElement,
        phi: &WreathAutomorphism,
    ) -> Result<WreathElement> {
        let gi = self.inverse(g)?;
        let gx = self.multiply(g, x)?;
        self.multiply(&gx, &self.apply_automorphism(phi, &gi)?)
    }

    pub fn random_vector<R: Rng + ?Sized>(&self, rng: &mut R, radius: i64) -> ZkVector {
        ZkVector::from_i64s(
            &(0..self.k)
                .map(|_| rng.gen_range(-radius..=radius))
                .collect::<Vec<_>>(),
        )
        .expect("i64")
    }

    /// Random element with up to `max_points` support points within `radius`.
    pub fn random_element<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        max_points: usize,
        radius: i64,
    ) -> WreathElement {
        let mut sigma = Support::new();
        for _ in 0..rng.gen_range(0..=max_points) {
            let x = self.random_vector(rng, radius);
            let a = self.base.random(rng);
            sigma.add_at(&self.base, x, &a).expect("same group");
        }
        WreathElement {
            sigma,
            z: self.random_vector(rng, radius),
        }
    }

    /// Text form `{(x1 .. xk)->[g..]; ...} | z=(z1 .. zk)`.
    pub fn format_element(&self, g: &WreathElement) -> String {
        format!("{} | z={}", g.sigma, g.z)
    }

    pub fn parse_element(&self, s: &str) -> Result<WreathElement> {
        let (sig, z) = s
            .rsplit_once('|')
            .ok_or_else(|| Error::parse(0, "missing '| z=(..)'"))?;
        let zpos = sig.len() + 1;
        let z = z
            .trim()
            .strip_prefix("z=")
            .ok_or_else(|| Error::parse(zpos, "expected z=(..)"))?
            .parse::<ZkVector>()
            .map_err(|_| Error::parse(zpos, "bad translation vector"))?;
        let body = sig
            .trim()
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| Error::parse(0, "support must be enclosed in braces"))?;
        let mut sigma = Support::new();
        let mut pos = sig.find('{').unwrap_or(0) + 1;
        for entry in body.split(';') {
            if !entry.trim().is_empty() {
                let (x, a) = entry
                    .split_once("->")
                    .ok_or_else(|| Error::parse(pos, "expected (x)->[g]"))?;
                let x: ZkVector = x
                    .parse()
                    .map_err(|_| Error::parse(pos, "bad support point"))?;
                let a = self
                    .base
                    .parse_element(a)
                    .map_err(|_| Error::parse(pos, "bad group element"))?;
                if x.dim() != self.k {
                    return Err(Error::parse(
                        pos,
                        format!("point has dimension {}, expected {}", x.dim(), self.k),
                    ));
                }
                if sigma.get(&x).is_some() {
                    return Err(Error::parse(pos, "duplicate support point"));
                }
                sigma.add_at(&self.base, x, &a)?;
            }
            pos += entry.len() + 1;
        }
        let g = WreathElement { sigma, z };
        self.check(&g)?;
        Ok(g)
    }
}

/// Tests `phi'(alpha(z) a_x) = alpha(Mz) phi'(a_x)` on random point masses.
pub fn check_compatibility_with<A: PointAction, R: Rng + ?Sized>(
    action: &A,
    m: &IntMatrix,
    group: &FiniteAbelianGroup,
    sample_count: usize,
    rng: &mut R,
) -> Result<bool> {
    let wreath = WreathGroup::new(group.clone(), m.dim())?;
    for _ in 0..sample_count.max(1) {
        let x = wreath.random_vector(rng, 8);
        let z = wreath.random_vector(rng, 8);
        let mut a = group.random(rng);
        if a.is_zero() && !group.is_trivial() {
            a = group.generators()[0].clone();
        }
        let (y1, b1) = action.act_point(&x.add(&z)?, &a)?;
        let (y0, b0) = action.act_point(&x, &a)?;
        let lhs = Support::point(y1, b1);
        let rhs = shift(&m.mul_vec(&z)?, &Support::point(y0, b0))?;
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn check_compatibility<R: Rng + ?Sized>(
    f: &GAutomorphism,
    m: &IntMatrix,
    group: &FiniteAbelianGroup,
    sample_count: usize,
    rng: &mut R,
) -> Result<bool> {
    let phi = WreathAutomorphism::new(f.clone(), m.clone())?;
    check_compatibility_with(
        &FiberwiseAction { group, phi: &phi },
        m,
        group,
        sample_count,
        rng,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zqmod::{f2_block, GEndomorphism};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(x: &[i64]) -> ZkVector {
        ZkVector::from_i64s(x).unwrap()
    }

    fn setup() -> (WreathGroup, WreathAutomorphism) {
        let g: FiniteAbelianGroup = "2^1:2".parse().unwrap();
        let f = GAutomorphism::from_blocks(&g, vec![f2_block(2, 1)]).unwrap();
        let phi = WreathAutomorphism::new(f, IntMatrix::scalar(2, -1)).unwrap();
        (WreathGroup::new(g, 2).unwrap(), phi)
    }

    #[test]
    fn shift_examples() {
        let (w, _) = setup();
        let a = w.base().generators()[0].clone();
        let s = Support::point(v(&[1, 2]), a.clone());
        assert_eq!(shift(&v(&[0, 0]), &s).unwrap(), s);
        assert_eq!(
            shift(&v(&[3, -1]), &s).unwrap(),
            Support::point(v(&[4, 1]), a)
        );
        let z = v(&[5, 5]);
        assert_eq!(
            shift(&z, &shift(&z.neg().unwrap(), &s).unwrap()).unwrap(),
            s
        );
    }

    #[test]
    fn conjugation_by_translation_is_shift() {
        let (w, _) = setup();
        let a = w.base().generators()[1].clone();
        let z = v(&[2, -3]);
        let y = v(&[1, 1]);
        let t = w.translation(z.clone());
        let lhs = w
            .multiply(
                &w.multiply(&t, &w.point_mass(y.clone(), a.clone())).unwrap(),
                &w.inverse(&t).unwrap(),
            )
            .unwrap();
        assert_eq!(lhs, w.point_mass(y.add(&z).unwrap(), a));
    }

    #[test]
    fn inverse_examples() {
        let (w, _) = setup();
        assert_eq!(w.inverse(&w.identity()).unwrap(), w.identity());
        let g3: FiniteAbelianGroup = "3^1:1".parse().unwrap();
        let w3 = WreathGroup::new(g3.clone(), 1).unwrap();
        let one = GElement(vec![1]);
        let inv = w3.inverse(&w3.point_mass(v(&[0]), one)).unwrap();
        assert_eq!(inv, w3.point_mass(v(&[0]), GElement(vec![2])));
    }

    #[test]
    fn case1_shape_action() {
        let (w, phi) = setup();
        let a = GElement(vec![1, 0]);
        let img = w
            .apply_automorphism(&phi, &w.point_mass(v(&[2, 1]), a.clone()))
            .unwrap();
        let fa = phi.f().apply(w.base(), &a).unwrap();
        assert_eq!(img, w.point_mass(v(&[-2, -1]), fa));
        let id = WreathAutomorphism::identity(w.base(), 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = w.random_element(&mut rng, 5, 4);
        assert_eq!(w.apply_automorphism(&id, &g).unwrap(), g);
    }

    #[test]
    fn twisted_conjugate_examples() {
        let (w, phi) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = w.random_element(&mut rng, 4, 3);
        assert_eq!(w.twisted_conjugate(&w.identity(), &x, &phi).unwrap(), x);
        let g = w.random_element(&mut rng, 4, 3);
        let id = WreathAutomorphism::identity(w.base(), 2).unwrap();
        let conj = w
            .multiply(&w.multiply(&g, &x).unwrap(), &w.inverse(&g).unwrap())
            .unwrap();
        assert_eq!(w.twisted_conjugate(&g, &x, &id).unwrap(), conj);
        // symmetric: g^-1 undoes g
        let y = w.twisted_conjugate(&g, &x, &phi).unwrap();
        assert_eq!(
            w.twisted_conjugate(&w.inverse(&g).unwrap(), &y, &phi)
                .unwrap(),
            x
        );
    }

    struct Corrupted<'a>(FiberwiseAction<'a>);

    impl PointAction for Corrupted<'_> {
        fn act_point(&self, x: &ZkVector, a: &GElement) -> Result<(ZkVector, GElement)> {
            let (y, b) = self.0.act_point(x, a)?;
            Ok((y.add(x)?, b))
        }
    }

    #[test]
    fn compatibility_checker() {
        let (w, phi) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(check_compatibility(phi.f(), phi.m(), w.base(), 50, &mut rng).unwrap());
        let id = GAutomorphism::identity(w.base());
        assert!(check_compatibility(&id, &IntMatrix::identity(2), w.base(), 50, &mut rng).unwrap());
        let bad = Corrupted(FiberwiseAction {
            group: w.base(),
            phi: &phi,
        });
        assert!(!check_compatibility_with(&bad, phi.m(), w.base(), 50, &mut rng).unwrap());
    }

    #[test]
    fn rejects_non_unimodular_and_large_rank() {
        let g: FiniteAbelianGroup = "5^1:1".parse().unwrap();
        let f = GAutomorphism::new(GEndomorphism::scalar(&g, |_| 2)).unwrap();
        assert!(matches!(
            WreathAutomorphism::new(f.clone(), IntMatrix::scalar(1, 2)),
            Err(Error::NotUnimodular(_))
        ));
        assert!(matches!(
            WreathAutomorphism::new(f, IntMatrix::identity(17)),
            Err(Error::RankOutOfRange(17))
        ));
        assert!(WreathGroup::new(g, 0).is_err());
    }

    #[test]
    fn text_round_trip() {
        let (w, _) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let g = w.random_element(&mut rng, 4, 5);
            let s = w.format_element(&g);
            assert_eq!(w.parse_element(&s).unwrap(), g, "{s}");
        }
        let e = w
            .parse_element("{(0 1)->[1 0]; (2 -1)->[0 1]} | z=(0 0)")
            .unwrap();
        assert_eq!(
            w.format_element(&e),
            "{(0 1)->[1 0]; (2 -1)->[0 1]} | z=(0 0)"
        );
        assert_eq!(w.format_element(&w.identity()), "{} | z=(0 0)");
        assert!(w.parse_element("{(0 1 2)->[1 0]} | z=(0 0)").is_err());
        assert!(w.parse_element("{(0 1)->[1 0]}").is_err());
    }
}
