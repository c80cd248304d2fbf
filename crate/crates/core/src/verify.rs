//! Certificates for the Reidemeister number of a normalized automorphism
//! `phi = (F, M, twist)` of `G wr Z^k`.
//!
//! `R(phi)` is the sum over representatives `z` of `Z^k / Im(E - M)` of
//! `R(tau_z o phi')`, where `tau_z o phi'` sends `a_x` to `(F a)_{Mx + z}`.
//! `Sigma` splits into the invariant summands `(+)_{x in orbit} G_x` over the
//! orbits of `x -> Mx + z`, and on an orbit of length `L` the map
//! `Id - tau_z o phi'` is onto iff `F^L - E` is invertible. So each summand
//! is 1 exactly when every realized orbit length passes that test; otherwise
//! a nonzero fixed element exists and the summand is infinite.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construct::{reidemeister_of_matrix, Construction};
use crate::error::{Error, Result};
use crate::intlat::{
    affine_orbit, geometric_sum, matrix_order, smith_normal_form, AffineOrbit, Vector,
};
use crate::scalar::{Extended, IntScalar};
use crate::wreath::{shift, Support, WreathAutomorphism, WreathGroup};
use crate::zqmod::{FiniteAbelianGroup, GAutomorphism, GElement, ModMatrix};
use crate::{BigIntMatrix, BigSnfResult, BigVector, IntMatrix, ZkVector};

/// Upper bound used when searching for the order of `M`.
pub const ORDER_BOUND: u64 = 10_000;

/// `R` of `x -> Mx` on `Z^k`: `|det(E - M)|`, or infinite when that vanishes.
pub fn reidemeister_zk(m: &IntMatrix) -> Result<Extended<u64>> {
    reidemeister_of_matrix(m)
}

/// `Z^k / Im(A)` for a nonsingular `A`, through its Smith form.
#[derive(Clone, Debug)]
pub struct Cokernel {
    snf: BigSnfResult,
    invariants: Vec<BigInt>,
}

impl Cokernel {
    pub fn new(a: &IntMatrix) -> Result<Self> {
        let snf = smith_normal_form(&a.convert::<BigInt>()?)?;
        let invariants = snf.diagonal();
        if invariants.iter().any(|d| d.is_zero()) {
            return Err(Error::InfiniteQuotient);
        }
        Ok(Cokernel { snf, invariants })
    }

    pub fn invariants(&self) -> &[BigInt] {
        &self.invariants
    }

    pub fn order(&self) -> BigInt {
        self.invariants.iter().product()
    }

    /// Coordinates of the class of `y` in `(+) Z/d_i`.
    pub fn class_of(&self, y: &ZkVector) -> Result<Vec<BigInt>> {
        let w = self.snf.u.mul_vec(&y.convert::<BigInt>()?)?;
        Ok(w.0
            .iter()
            .zip(&self.invariants)
            .map(|(c, d)| c.mod_floor(d))
            .collect())
    }

    /// `U^-1 w` for every `w` in the box `prod [0, d_i)`, last coordinate fastest.
    pub fn representatives(&self) -> Result<Vec<ZkVector>> {
        let k = self.invariants.len();
        let mut out = Vec::new();
        let mut w = vec![BigInt::zero(); k];
        loop {
            let rep = self.snf.u_inv.mul_vec(&Vector(w.clone()))?;
            out.push(rep.convert::<i64>()?);
            let mut i = k;
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                w[i] += 1;
                if w[i] < self.invariants[i] {
                    break;
                }
                w[i] = BigInt::zero();
            }
        }
    }
}

/// Representatives of the twisted classes of `x -> Mx` on `Z^k`.
pub fn coset_representatives(m: &IntMatrix) -> Result<Vec<ZkVector>> {
    Cokernel::new(&m.identity_minus()?)?.representatives()
}

/// Integer solutions of `A x = b` as `x0 + span(kernel)`.
struct Solutions {
    particular: BigVector,
    kernel: Vec<BigVector>,
}

fn solve(a: &BigIntMatrix, b: &BigVector) -> Result<Option<Solutions>> {
    let snf = smith_normal_form(a)?;
    let c = snf.u.mul_vec(b)?;
    let k = a.dim();
    let mut y = vec![BigInt::zero(); k];
    let mut kernel = Vec::new();
    for (i, (ci, yi)) in c.0.iter().zip(y.iter_mut()).enumerate() {
        let d = snf.s.get(i, i);
        if d.is_zero() {
            if !ci.is_zero() {
                return Ok(None);
            }
            let col: Vec<BigInt> = (0..k).map(|r| snf.v.get(r, i).clone()).collect();
            kernel.push(Vector(col));
        } else {
            let (q, r) = ci.div_rem(d);
            if !r.is_zero() {
                return Ok(None);
            }
            *yi = q;
        }
    }
    Ok(Some(Solutions {
        particular: snf.v.mul_vec(&Vector(y))?,
        kernel,
    }))
}

fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

/// A point whose orbit under `x -> Mx + z` has exactly `length` elements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitWitness {
    pub length: usize,
    pub point: ZkVector,
}

/// One witness point for every orbit length realized by `x -> Mx + z`,
/// where `order` is the order of `M`.
///
/// Points of period dividing `L` solve `(E - M^L) x = (E + M + .. + M^(L-1)) z`.
/// An orbit of exact length `L` exists iff no proper divisor's solution set
/// has full dimension inside the one for `L`; a witness is then found by
/// sampling the solution lattice, since the bad points lie on finitely many
/// lower-dimensional affine sublattices.
pub fn orbit_types(m: &IntMatrix, z: &ZkVector, order: u64) -> Result<Vec<OrbitWitness>> {
    let bm = m.convert::<BigInt>()?;
    let bz = z.convert::<BigInt>()?;
    let divs = divisors(order);
    let mut solved: Vec<(u64, Option<Solutions>)> = Vec::new();
    for &l in &divs {
        let a = bm.pow(l)?.identity_minus()?;
        let b = geometric_sum(&bm, l)?.mul_vec(&bz)?;
        solved.push((l, solve(&a, &b)?));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(order);
    let mut out = Vec::new();
    for (idx, (l, sol)) in solved.iter().enumerate() {
        let Some(sol) = sol else { continue };
        let dim = sol.kernel.len();
        let shadowed = solved[..idx]
            .iter()
            .any(|(l2, s2)| l % l2 == 0 && s2.as_ref().is_some_and(|s2| s2.kernel.len() == dim));
        if shadowed {
            continue;
        }
        let radius = 4 * divs.len() as i64 + 1;
        let mut found = None;
        for attempt in 0..2000 {
            let mut x = sol.particular.clone();
            if attempt > 0 || dim > 0 {
                for b in &sol.kernel {
                    let c = BigInt::from(rng.gen_range(-radius..=radius));
                    x = x.add(&b.scale(&c)?)?;
                }
            }
            let x = x.convert::<i64>()?;
            let orbit = affine_orbit(m, z, &x, *l as usize)?;
            if orbit.closed && orbit.len() == *l as usize {
                found = Some(x);
                break;
            }
            if dim == 0 {
                break;
            }
        }
        let point = found
            .ok_or_else(|| Error::Internal(format!("no witness for an orbit of length {l}")))?;
        out.push(OrbitWitness {
            length: *l as usize,
            point,
        });
    }
    Ok(out)
}

/// Evidence for epimorphicity of `Id - tau_z o phi'` on one orbit summand.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitVerdict {
    pub length: usize,
    pub point: ZkVector,
    /// Per component, `det(Id - T) mod p` of the assembled `(L d) x (L d)` matrix.
    pub cyclic_det_mod_p: Vec<u64>,
    /// Per component, `det(F^L - E) mod p`.
    pub power_det_mod_p: Vec<u64>,
    pub epimorphic: bool,
}

/// `Id - T` where `T` moves the fiber at orbit position `j` to `j + 1` by `F`.
pub fn cyclic_block_matrix(f: &ModMatrix, length: usize) -> ModMatrix {
    let d = f.dim();
    let n = d * length;
    let mut rows = vec![vec![0i64; n]; n];
    for (i, row) in rows.iter_mut().enumerate() {
        row[i] = 1;
    }
    for j in 0..length {
        let to = (j + 1) % length;
        for a in 0..d {
            for b in 0..d {
                let cell = &mut rows[to * d + a][j * d + b];
                *cell -= f.get(a, b) as i64;
            }
        }
    }
    let r = f.modulus().ilog(f.prime());
    ModMatrix::from_rows(f.prime(), r, &rows).expect("square")
}

pub fn orbit_epi_check(
    f: &GAutomorphism,
    m: &IntMatrix,
    z: &ZkVector,
    x: &ZkVector,
    bound: usize,
) -> Result<OrbitVerdict> {
    let orbit = affine_orbit(m, z, x, bound)?;
    if !orbit.closed {
        return Err(Error::OrbitNotClosed(bound));
    }
    let length = orbit.len();
    let cyclic: Vec<u64> = f
        .blocks()
        .iter()
        .map(|b| cyclic_block_matrix(b, length).det_mod_p())
        .collect();
    let power_endo = f.pow(length as u64).as_endomorphism().minus_identity();
    let power = power_endo.block_dets_mod_p();
    let by_cyclic = cyclic.iter().all(|&d| d != 0);
    let by_power = power_endo.is_epimorphism();
    if by_cyclic != by_power {
        return Err(Error::Internal(format!(
            "orbit length {length}: cyclic determinant test and F^L - E test disagree"
        )));
    }
    Ok(OrbitVerdict {
        length,
        point: x.clone(),
        cyclic_det_mod_p: cyclic,
        power_det_mod_p: power,
        epimorphic: by_power,
    })
}

/// A nonzero element of `Sigma` fixed by `tau_z o phi'`, supported on the
/// given orbit, if `F^L - E` is singular.
fn fixed_element_on_orbit(
    group: &FiniteAbelianGroup,
    f: &GAutomorphism,
    orbit: &AffineOrbit<i64>,
) -> Result<Option<Support>> {
    let l = orbit.len() as u64;
    let Some(v) = f
        .pow(l)
        .as_endomorphism()
        .minus_identity()
        .nonzero_kernel_element(group)?
    else {
        return Ok(None);
    };
    let mut sigma = Support::new();
    let mut cur: GElement = v;
    for x in &orbit.points {
        sigma.add_at(group, x.clone(), &cur)?;
        cur = f.apply(group, &cur)?;
    }
    Ok(Some(sigma))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepVerdict {
    TrivialClasses,
    InfiniteClasses,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepresentativeReport {
    pub z: ZkVector,
    pub orbits: Vec<OrbitVerdict>,
    pub verdict: RepVerdict,
    /// Nonzero fixed element of `tau_z o phi'` in support text form.
    pub fixed_witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub r_bar: Extended<u64>,
    pub matrix_order: u64,
    pub representatives: Vec<ZkVector>,
    pub per_rep: Vec<RepresentativeReport>,
    pub r_total: Extended<u64>,
}

fn check_representative(
    group: &FiniteAbelianGroup,
    phi: &WreathAutomorphism,
    z: &ZkVector,
    order: u64,
) -> Result<RepresentativeReport> {
    let bound = 4 * order as usize;
    let mut orbits = Vec::new();
    let mut witness = None;
    for w in orbit_types(phi.m(), z, order)? {
        let v = orbit_epi_check(phi.f(), phi.m(), z, &w.point, bound)?;
        if !v.epimorphic && witness.is_none() {
            let orbit = affine_orbit(phi.m(), z, &w.point, bound)?;
            let sigma = fixed_element_on_orbit(group, phi.f(), &orbit)?
                .ok_or_else(|| Error::Internal("singular F^L - E without kernel element".into()))?;
            let twisted = phi.clone().with_twist(z.clone())?;
            let wreath = WreathGroup::new(group.clone(), phi.k())?;
            if wreath.apply_to_support(&twisted, &sigma)? != sigma {
                return Err(Error::Internal("fixed-element witness is not fixed".into()));
            }
            witness = Some(sigma.to_string());
        }
        orbits.push(v);
    }
    let verdict = if witness.is_none() {
        RepVerdict::TrivialClasses
    } else {
        RepVerdict::InfiniteClasses
    };
    Ok(RepresentativeReport {
        z: z.clone(),
        orbits,
        verdict,
        fixed_witness: witness,
    })
}

/// Certifies `R(phi) = R(phi-bar)` by checking every twisted summand.
pub fn full_verify(c: &Construction) -> Result<VerificationReport> {
    let phi = &c.automorphism;
    let order = matrix_order(phi.m(), ORDER_BOUND)?.ok_or(Error::InfiniteOrder(ORDER_BOUND))?;
    let r_bar = reidemeister_zk(phi.m())?;
    if !r_bar.is_finite() {
        return Ok(VerificationReport {
            r_bar,
            matrix_order: order,
            representatives: Vec::new(),
            per_rep: Vec::new(),
            r_total: Extended::Infinite,
        });
    }
    let reps = coset_representatives(phi.m())?;
    if Extended::Finite(reps.len() as u64) != r_bar {
        return Err(Error::Internal(format!(
            "{} representatives for R = {r_bar}",
            reps.len()
        )));
    }
    let per_rep = reps
        .par_iter()
        .map(|z| check_representative(&c.group, phi, z, order))
        .collect::<Result<Vec<_>>>()?;
    let r_total = if per_rep
        .iter()
        .all(|r| r.verdict == RepVerdict::TrivialClasses)
    {
        r_bar.clone()
    } else {
        Extended::Infinite
    };
    Ok(VerificationReport {
        r_bar,
        matrix_order: order,
        representatives: reps,
        per_rep,
        r_total,
    })
}

/// `R(phi')` on `Sigma` for a finite-order `phi`: exactly 1 or infinite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SigmaClass {
    One,
    Infinite {
        orbit_length: usize,
        witness: Support,
    },
}

pub fn classify_sigma_reidemeister(
    wreath: &WreathGroup,
    phi: &WreathAutomorphism,
    orbit_budget: u64,
) -> Result<SigmaClass> {
    if !reidemeister_zk(phi.m())?.is_finite() {
        return Err(Error::InfiniteQuotient);
    }
    let order = phi.matrix_order(orbit_budget)?;
    let bound = (4 * order).min(orbit_budget.max(order)) as usize;
    let z = phi.twist();
    for w in orbit_types(phi.m(), z, order)? {
        let v = orbit_epi_check(phi.f(), phi.m(), z, &w.point, bound)?;
        if v.epimorphic {
            continue;
        }
        let orbit = affine_orbit(phi.m(), z, &w.point, bound)?;
        let witness = fixed_element_on_orbit(wreath.base(), phi.f(), &orbit)?
            .ok_or_else(|| Error::Internal("singular F^L - E without kernel element".into()))?;
        if wreath.apply_to_support(phi, &witness)? != witness {
            return Err(Error::Internal("fixed-element witness is not fixed".into()));
        }
        return Ok(SigmaClass::Infinite {
            orbit_length: v.length,
            witness,
        });
    }
    Ok(SigmaClass::One)
}

/// `count` distinct nonzero fixed elements of `phi'`, starting with `seed`.
///
/// Translates `alpha(n M^j e_1) seed` over the `M`-orbit of `e_1` are again
/// mapped to each other by `phi'`, so their sum is fixed. The multiplier `n`
/// runs over multiples of `(diam(seed) + 1)(ord(M) + 1)`, which keeps the
/// translates disjoint.
pub fn generate_fixed_elements(
    wreath: &WreathGroup,
    phi: &WreathAutomorphism,
    seed: &Support,
    count: usize,
) -> Result<Vec<Support>> {
    if seed.is_empty() {
        return Err(Error::NotFixed("zero element".into()));
    }
    if wreath.apply_to_support(phi, seed)? != *seed {
        return Err(Error::NotFixed(seed.to_string()));
    }
    let order = phi.matrix_order(ORDER_BOUND)?;
    let mut out = vec![seed.clone()];
    out.truncate(count);
    let k = phi.k();
    let e1 = ZkVector::unit(k, 0);
    let mut direction = vec![e1.clone()];
    loop {
        let next = phi.m().mul_vec(direction.last().expect("nonempty"))?;
        if next == e1 {
            break;
        }
        direction.push(next);
    }
    let step = (seed.diameter() + 1).mul_c(&(order as i64 + 1))?;
    let mut seen: std::collections::HashSet<Support> = out.iter().cloned().collect();
    let mut i: i64 = 0;
    while out.len() < count {
        i += 1;
        if i as usize > 4 * count + 16 {
            return Err(Error::Internal("fixed-element generator stalled".into()));
        }
        let n = step.mul_c(&i)?;
        let mut sigma = Support::new();
        for d in &direction {
            sigma = sigma.add(wreath.base(), &shift(&d.scale(&n)?, seed)?)?;
        }
        if sigma.is_empty() || seen.contains(&sigma) {
            continue;
        }
        if wreath.apply_to_support(phi, &sigma)? != sigma {
            return Err(Error::Internal("generated element is not fixed".into()));
        }
        seen.insert(sigma.clone());
        out.push(sigma);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{build_case1, build_case2, build_case3};
    use crate::intlat::{companion_cyclotomic_5, direct_sum, rotation_order_3};
    use crate::zqmod::{f2_block, f3_block, GEndomorphism};

    fn g(s: &str) -> FiniteAbelianGroup {
        s.parse().unwrap()
    }

    fn v(x: &[i64]) -> ZkVector {
        ZkVector::from_i64s(x).unwrap()
    }

    #[test]
    fn reidemeister_zk_examples() {
        assert_eq!(
            reidemeister_zk(&IntMatrix::scalar(4, -1)).unwrap(),
            Extended::Finite(16)
        );
        let m4 = companion_cyclotomic_5::<i64>();
        let m = direct_sum(&[m4.clone(), m4]).unwrap();
        assert_eq!(reidemeister_zk(&m).unwrap(), Extended::Finite(25));
        assert_eq!(
            reidemeister_zk(&IntMatrix::identity(3)).unwrap(),
            Extended::Infinite
        );
    }

    #[test]
    fn representatives_examples() {
        let reps = coset_representatives(&IntMatrix::scalar(1, -1)).unwrap();
        assert_eq!(reps, vec![v(&[0]), v(&[1])]);
        assert_eq!(coset_representatives(&rotation_order_3()).unwrap().len(), 3);
        assert_eq!(
            coset_representatives(&companion_cyclotomic_5())
                .unwrap()
                .len(),
            5
        );
        assert_eq!(
            coset_representatives(&IntMatrix::identity(2)).unwrap_err(),
            Error::InfiniteQuotient
        );
    }

    #[test]
    fn representatives_are_pairwise_inequivalent() {
        let m = direct_sum(&[rotation_order_3::<i64>(), IntMatrix::scalar(1, -1)]).unwrap();
        let a = m.identity_minus().unwrap();
        let ck = Cokernel::new(&a).unwrap();
        let reps = ck.representatives().unwrap();
        assert_eq!(reps.len(), 6);
        let classes: std::collections::HashSet<_> =
            reps.iter().map(|r| ck.class_of(r).unwrap()).collect();
        assert_eq!(classes.len(), 6);
        // adding an image vector keeps the class
        let img = a.mul_vec(&v(&[3, -2, 5])).unwrap();
        assert_eq!(
            ck.class_of(&reps[4].add(&img).unwrap()).unwrap(),
            ck.class_of(&reps[4]).unwrap()
        );
    }

    #[test]
    fn orbit_types_case1() {
        let neg = IntMatrix::scalar(2, -1);
        // z in 2Z^2: fixed point x = z/2 plus generic pairs
        let t = orbit_types(&neg, &v(&[2, 0]), 2).unwrap();
        assert_eq!(t.iter().map(|w| w.length).collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(t[0].point, v(&[1, 0]));
        // z odd: no fixed point
        let t = orbit_types(&neg, &v(&[1, 0]), 2).unwrap();
        assert_eq!(t.iter().map(|w| w.length).collect::<Vec<_>>(), vec![2]);
    }

    #[test]
    fn orbit_types_case3_lengths() {
        let m = companion_cyclotomic_5::<i64>();
        // only the trivial class has a fixed point; every class has free orbits
        for z in coset_representatives(&m).unwrap() {
            let t = orbit_types(&m, &z, 5).unwrap();
            let lengths: Vec<_> = t.iter().map(|w| w.length).collect();
            if z.is_zero() {
                assert_eq!(lengths, vec![1, 5]);
            } else {
                assert_eq!(lengths, vec![5]);
            }
        }
    }

    #[test]
    fn block_inverse_4x4() {
        // [[-E, F2], [F2, -E]] times the displayed inverse is E over Z
        let a = IntMatrix::from_i64_rows(&[
            &[-1, 0, 0, 1],
            &[0, -1, 1, 1],
            &[0, 1, -1, 0],
            &[1, 1, 0, -1],
        ])
        .unwrap();
        let inv = IntMatrix::from_i64_rows(&[
            &[-1, 1, 1, 0],
            &[1, 0, 0, 1],
            &[1, 0, -1, 1],
            &[0, 1, 1, 0],
        ])
        .unwrap();
        assert!(a.mul(&inv).unwrap().is_identity());
    }

    #[test]
    fn epi_check_examples() {
        let grp = g("2^1:2");
        let f = GAutomorphism::from_blocks(&grp, vec![f2_block(2, 1)]).unwrap();
        let neg = IntMatrix::scalar(1, -1);
        let v2 = orbit_epi_check(&f, &neg, &v(&[0]), &v(&[1]), 8).unwrap();
        assert_eq!(v2.length, 2);
        assert!(v2.epimorphic);

        let grp3 = g("2^1:3");
        let f3 = GAutomorphism::from_blocks(&grp3, vec![f3_block(2, 1)]).unwrap();
        let v1 = orbit_epi_check(&f3, &neg, &v(&[2]), &v(&[1]), 8).unwrap();
        assert_eq!(v1.length, 1);
        assert!(v1.epimorphic);
        assert_eq!(v1.power_det_mod_p, vec![1]);

        for r in 1..=3 {
            let grp = g(&format!("2^{r}:2"));
            let f = GAutomorphism::from_blocks(&grp, vec![f2_block(2, r)]).unwrap();
            let m4 = companion_cyclotomic_5::<i64>();
            let v5 = orbit_epi_check(&f, &m4, &v(&[0, 0, 0, 0]), &v(&[1, 0, 0, 0]), 20).unwrap();
            assert_eq!(v5.length, 5);
            assert!(v5.epimorphic);
        }

        let err = orbit_epi_check(&f, &IntMatrix::identity(1), &v(&[1]), &v(&[0]), 10).unwrap_err();
        assert_eq!(err, Error::OrbitNotClosed(10));
    }

    #[test]
    fn methods_agree_on_random_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (p, r, d) in [
            (2u64, 1u32, 2usize),
            (2, 2, 3),
            (3, 1, 2),
            (5, 1, 1),
            (7, 1, 3),
        ] {
            let grp = FiniteAbelianGroup::new(vec![crate::zqmod::Component { p, r, d }]).unwrap();
            let mut tried = 0;
            while tried < 15 {
                let rows: Vec<Vec<i64>> = (0..d)
                    .map(|_| (0..d).map(|_| rng.gen_range(0..20)).collect())
                    .collect();
                let Ok(f) = GAutomorphism::from_blocks(
                    &grp,
                    vec![ModMatrix::from_rows(p, r, &rows).unwrap()],
                ) else {
                    continue;
                };
                tried += 1;
                for l in 1..=6 {
                    let a = cyclic_block_matrix(&f.blocks()[0], l).det_mod_p() != 0;
                    let b = f
                        .pow(l as u64)
                        .as_endomorphism()
                        .minus_identity()
                        .is_epimorphism();
                    assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn verify_examples() {
        let c = build_case1(&g("5^1:1,3^1:2"), 2).unwrap();
        let rep = full_verify(&c).unwrap();
        assert_eq!(rep.r_total, Extended::Finite(4));
        assert_eq!(rep.representatives.len(), 4);
        let c = build_case2(&g("7^1:1"), 2).unwrap();
        assert_eq!(full_verify(&c).unwrap().r_total, Extended::Finite(3));
        let c = build_case3(&g("2^2:2"), 4).unwrap();
        assert_eq!(full_verify(&c).unwrap().r_total, Extended::Finite(5));
    }

    #[test]
    fn verify_detects_planted_failure() {
        let grp = g("2^1:1");
        let phi = WreathAutomorphism::new(GAutomorphism::identity(&grp), IntMatrix::scalar(1, -1))
            .unwrap();
        let c = Construction {
            group: grp,
            case: crate::construct::Case::Case1,
            automorphism: phi,
            predicted_r: Extended::Finite(2),
            block_layout: Vec::new(),
        };
        let rep = full_verify(&c).unwrap();
        assert_eq!(rep.r_bar, Extended::Finite(2));
        assert_eq!(rep.r_total, Extended::Infinite);
        assert!(rep
            .per_rep
            .iter()
            .all(|r| r.verdict == RepVerdict::InfiniteClasses && r.fixed_witness.is_some()));
    }

    #[test]
    fn sigma_dichotomy_examples() {
        let grp = g("2^1:1");
        let w = WreathGroup::new(grp.clone(), 1).unwrap();
        let phi = WreathAutomorphism::new(GAutomorphism::identity(&grp), IntMatrix::scalar(1, -1))
            .unwrap();
        match classify_sigma_reidemeister(&w, &phi, 100).unwrap() {
            SigmaClass::Infinite { witness, .. } => {
                assert!(!witness.is_empty());
                assert_eq!(w.apply_to_support(&phi, &witness).unwrap(), witness);
            }
            SigmaClass::One => panic!("identity fibers must give infinitely many classes"),
        }

        let z3 = g("3^1:1");
        let w3 = WreathGroup::new(z3.clone(), 1).unwrap();
        let minus = GAutomorphism::new(GEndomorphism::scalar(&z3, |_| -1)).unwrap();
        let rejected = WreathAutomorphism::new(minus.clone(), IntMatrix::identity(1)).unwrap();
        assert_eq!(
            classify_sigma_reidemeister(&w3, &rejected, 100).unwrap_err(),
            Error::InfiniteQuotient
        );
        let phi = WreathAutomorphism::new(minus, IntMatrix::scalar(1, -1)).unwrap();
        assert!(matches!(
            classify_sigma_reidemeister(&w3, &phi, 100).unwrap(),
            SigmaClass::Infinite {
                orbit_length: 2,
                ..
            }
        ));

        let c = build_case1(&g("2^1:2,5^1:1"), 2).unwrap();
        let w = WreathGroup::new(c.group.clone(), 2).unwrap();
        for z in coset_representatives(c.automorphism.m()).unwrap() {
            let phi = c.automorphism.clone().with_twist(z).unwrap();
            assert_eq!(
                classify_sigma_reidemeister(&w, &phi, 100).unwrap(),
                SigmaClass::One
            );
        }

        let shear = WreathAutomorphism::new(
            GAutomorphism::identity(&grp),
            IntMatrix::from_i64_rows(&[&[2, 1], &[1, 1]]).unwrap(),
        )
        .unwrap();
        let w2 = WreathGroup::new(grp, 2).unwrap();
        assert_eq!(
            classify_sigma_reidemeister(&w2, &shear, 50).unwrap_err(),
            Error::InfiniteOrder(50)
        );
    }

    #[test]
    fn fixed_element_generator() {
        let grp = g("2^1:1");
        let w = WreathGroup::new(grp.clone(), 1).unwrap();
        let phi = WreathAutomorphism::new(GAutomorphism::identity(&grp), IntMatrix::scalar(1, -1))
            .unwrap();
        let a0 = Support::point(v(&[0]), GElement(vec![1]));
        assert_eq!(
            generate_fixed_elements(&w, &phi, &a0, 1).unwrap(),
            vec![a0.clone()]
        );
        let many = generate_fixed_elements(&w, &phi, &a0, 5).unwrap();
        assert_eq!(many.len(), 5);
        // a_{nm} + a_{-nm}
        for s in &many[1..] {
            let pts: Vec<_> = s.iter().map(|(x, _)| x.0[0]).collect();
            assert_eq!(pts.len(), 2);
            assert_eq!(pts[0], -pts[1]);
        }
        let not_fixed = Support::point(v(&[1]), GElement(vec![1]));
        assert!(matches!(
            generate_fixed_elements(&w, &phi, &not_fixed, 3),
            Err(Error::NotFixed(_))
        ));
        assert!(generate_fixed_elements(&w, &phi, &Support::new(), 3).is_err());
    }

    #[test]
    fn odd_prime_scalar_powers() {
        for p in (3..=100u64).filter(|&p| crate::zqmod::is_prime(p)) {
            for l in (1..=9u32).step_by(2) {
                let val = ((p - 1) as u128).pow(l) % p as u128;
                assert_eq!((val + p as u128 - 1) % p as u128, (p - 2) as u128);
            }
        }
    }
}
