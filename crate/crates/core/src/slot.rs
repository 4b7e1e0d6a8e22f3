//! Exact arithmetic on vectors of slots, modeling BGV plaintexts after
//! batching, with multiplicative-depth and operation-count tracking.
//!
//! A plaintext is modeled directly as its vector of `d` slots, each an
//! element of GF(p^N) represented by N coefficients mod p. Addition,
//! multiplication, and coefficient extraction act slot-wise.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numt::{inv_mod, is_prime, multiplicative_order};

/// Ring geometry: cyclotomic index `m`, plaintext modulus `p`, slot degree
/// `N` (the multiplicative order of `p` mod `m`), slot count `d = (m-1)/N`,
/// and a monic irreducible slot modulus of degree `N` over Z_p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingParams {
    pub m: u64,
    pub p: u64,
    pub slot_degree: usize,
    pub slot_count: usize,
    /// Monic irreducible polynomial of degree `slot_degree`, little-endian,
    /// length `slot_degree + 1` with leading coefficient 1.
    pub modulus: Vec<u64>,
}

impl RingParams {
    pub fn new(m: u64, p: u64) -> Result<Arc<Self>> {
        if !is_prime(m) {
            return Err(Error::InvalidRing(format!("m={m} is not prime")));
        }
        if !is_prime(p) {
            return Err(Error::InvalidRing(format!("p={p} is not prime")));
        }
        if p.is_multiple_of(m) {
            return Err(Error::InvalidRing(format!("p={p} divides m={m}")));
        }
        let n_deg = multiplicative_order(p, m) as usize;
        let d = ((m - 1) as usize) / n_deg;
        debug_assert_eq!(d * n_deg, (m - 1) as usize);
        let modulus = find_irreducible(p, n_deg);
        debug_assert!(is_irreducible(&modulus, p));
        Ok(Arc::new(RingParams {
            m,
            p,
            slot_degree: n_deg,
            slot_count: d,
            modulus,
        }))
    }
}

/// One slot: an element of GF(p^N) as N coefficients mod p, little-endian.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub coeffs: Vec<u64>,
}

impl Slot {
    pub fn constant(c: u64, degree: usize, p: u64) -> Self {
        let mut coeffs = vec![0; degree];
        coeffs[0] = c % p;
        Slot { coeffs }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs[1..].iter().all(|&c| c == 0)
    }
}

/// A packed vector of `d` slots over a shared ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotVector {
    pub slots: Vec<Slot>,
    pub ring: Arc<RingParams>,
}

impl SlotVector {
    pub fn from_slots(slots: Vec<Slot>, ring: Arc<RingParams>) -> Self {
        assert_eq!(slots.len(), ring.slot_count, "expected d slots");
        for s in &slots {
            assert_eq!(s.coeffs.len(), ring.slot_degree);
            debug_assert!(s.coeffs.iter().all(|&c| c < ring.p));
        }
        SlotVector { slots, ring }
    }

    /// All slots set to the constant residue `c`.
    pub fn constant(c: u64, ring: &Arc<RingParams>) -> Self {
        let slot = Slot::constant(c, ring.slot_degree, ring.p);
        SlotVector {
            slots: vec![slot; ring.slot_count],
            ring: ring.clone(),
        }
    }

    pub fn zeros(ring: &Arc<RingParams>) -> Self {
        Self::constant(0, ring)
    }

    fn same_ring(&self, other: &SlotVector) -> Result<()> {
        if self.ring.m != other.ring.m || self.ring.p != other.ring.p {
            return Err(Error::RingMismatch);
        }
        Ok(())
    }
}

/// Homomorphic operation counters for one circuit evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub ct_ct_mults: u64,
    pub ct_pt_mults: u64,
    pub adds: u64,
    pub extractions: u64,
}

impl std::ops::AddAssign for OpCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.ct_ct_mults += rhs.ct_ct_mults;
        self.ct_pt_mults += rhs.ct_pt_mults;
        self.adds += rhs.adds;
        self.extractions += rhs.extractions;
    }
}

/// Accumulates operation counts for a circuit evaluation. Shared
/// subexpressions are charged once: the counters reflect the circuit that is
/// actually evaluated, not its tree expansion.
#[derive(Debug, Default)]
pub struct Tracker {
    pub counts: OpCounts,
}

impl Tracker {
    pub fn new() -> Self {
        Tracker::default()
    }
}

/// A slot vector together with its multiplicative depth: the length of the
/// longest chain of ciphertext-ciphertext multiplications that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrackedVector {
    pub value: SlotVector,
    pub depth: u32,
}

impl TrackedVector {
    /// Wraps a fresh input at depth 0.
    pub fn fresh(value: SlotVector) -> Self {
        TrackedVector { value, depth: 0 }
    }

    pub fn ring(&self) -> &Arc<RingParams> {
        &self.value.ring
    }

    /// Slot-wise sum. Depth is the max of the operands' depths.
    pub fn add(&self, other: &TrackedVector, t: &mut Tracker) -> Result<TrackedVector> {
        self.value.same_ring(&other.value)?;
        let p = self.ring().p;
        let slots = self
            .value
            .slots
            .iter()
            .zip(&other.value.slots)
            .map(|(a, b)| Slot {
                coeffs: a
                    .coeffs
                    .iter()
                    .zip(&b.coeffs)
                    .map(|(&x, &y)| (x + y) % p)
                    .collect(),
            })
            .collect();
        t.counts.adds += 1;
        Ok(TrackedVector {
            value: SlotVector {
                slots,
                ring: self.ring().clone(),
            },
            depth: self.depth.max(other.depth),
        })
    }

    /// Slot-wise difference, counted as an addition.
    pub fn sub(&self, other: &TrackedVector, t: &mut Tracker) -> Result<TrackedVector> {
        self.value.same_ring(&other.value)?;
        let p = self.ring().p;
        let slots = self
            .value
            .slots
            .iter()
            .zip(&other.value.slots)
            .map(|(a, b)| Slot {
                coeffs: a
                    .coeffs
                    .iter()
                    .zip(&b.coeffs)
                    .map(|(&x, &y)| (x + p - y) % p)
                    .collect(),
            })
            .collect();
        t.counts.adds += 1;
        Ok(TrackedVector {
            value: SlotVector {
                slots,
                ring: self.ring().clone(),
            },
            depth: self.depth.max(other.depth),
        })
    }

    /// Slot-wise product in GF(p^N). Depth is max + 1.
    pub fn mul(&self, other: &TrackedVector, t: &mut Tracker) -> Result<TrackedVector> {
        self.value.same_ring(&other.value)?;
        let ring = self.ring();
        let slots = self
            .value
            .slots
            .iter()
            .zip(&other.value.slots)
            .map(|(a, b)| Slot {
                coeffs: gf_mul(&a.coeffs, &b.coeffs, &ring.modulus, ring.p),
            })
            .collect();
        t.counts.ct_ct_mults += 1;
        Ok(TrackedVector {
            value: SlotVector {
                slots,
                ring: ring.clone(),
            },
            depth: self.depth.max(other.depth) + 1,
        })
    }

    /// Product with an untracked plaintext slot vector. Depth unchanged.
    pub fn mul_plain(&self, plain: &SlotVector, t: &mut Tracker) -> Result<TrackedVector> {
        self.value.same_ring(plain)?;
        let ring = self.ring();
        let slots = self
            .value
            .slots
            .iter()
            .zip(&plain.slots)
            .map(|(a, b)| Slot {
                coeffs: gf_mul(&a.coeffs, &b.coeffs, &ring.modulus, ring.p),
            })
            .collect();
        t.counts.ct_pt_mults += 1;
        Ok(TrackedVector {
            value: SlotVector {
                slots,
                ring: ring.clone(),
            },
            depth: self.depth,
        })
    }

    /// Product with a plaintext scalar constant. Depth unchanged.
    pub fn mul_scalar(&self, c: u64, t: &mut Tracker) -> TrackedVector {
        let p = self.ring().p;
        let c = c % p;
        let slots = self
            .value
            .slots
            .iter()
            .map(|a| Slot {
                coeffs: a.coeffs.iter().map(|&x| x * c % p).collect(),
            })
            .collect();
        t.counts.ct_pt_mults += 1;
        TrackedVector {
            value: SlotVector {
                slots,
                ring: self.ring().clone(),
            },
            depth: self.depth,
        }
    }

    /// Adds a plaintext scalar constant to every slot, counted as an add.
    pub fn add_scalar(&self, c: u64, t: &mut Tracker) -> TrackedVector {
        let p = self.ring().p;
        let c = c % p;
        let slots = self
            .value
            .slots
            .iter()
            .map(|a| {
                let mut coeffs = a.coeffs.clone();
                coeffs[0] = (coeffs[0] + c) % p;
                Slot { coeffs }
            })
            .collect();
        t.counts.adds += 1;
        TrackedVector {
            value: SlotVector {
                slots,
                ring: self.ring().clone(),
            },
            depth: self.depth,
        }
    }

    /// Computes `c - self` slot-wise for a plaintext constant `c`, counted
    /// as an add (negation is coefficient-wise and free of depth).
    pub fn scalar_minus(&self, c: u64, t: &mut Tracker) -> TrackedVector {
        let p = self.ring().p;
        let c = c % p;
        let slots = self
            .value
            .slots
            .iter()
            .map(|a| {
                let mut coeffs: Vec<u64> = a.coeffs.iter().map(|&x| (p - x) % p).collect();
                coeffs[0] = (coeffs[0] + c) % p;
                Slot { coeffs }
            })
            .collect();
        t.counts.adds += 1;
        TrackedVector {
            value: SlotVector {
                slots,
                ring: self.ring().clone(),
            },
            depth: self.depth,
        }
    }

    /// Coefficient extraction: slot j of the result is the constant slot
    /// holding coefficient `i` of slot j. Modeled as a linear map with no
    /// depth contribution; counted separately.
    pub fn ext(&self, i: usize, t: &mut Tracker) -> Result<TrackedVector> {
        let ring = self.ring();
        if i >= ring.slot_degree {
            return Err(Error::ExtIndexOutOfRange {
                index: i,
                degree: ring.slot_degree,
            });
        }
        let slots = self
            .value
            .slots
            .iter()
            .map(|s| Slot::constant(s.coeffs[i], ring.slot_degree, ring.p))
            .collect();
        t.counts.extractions += 1;
        Ok(TrackedVector {
            value: SlotVector {
                slots,
                ring: ring.clone(),
            },
            depth: self.depth,
        })
    }
}

/// Product of two GF(p^N) elements: polynomial product reduced mod the slot
/// modulus and mod p.
pub fn gf_mul(a: &[u64], b: &[u64], modulus: &[u64], p: u64) -> Vec<u64> {
    let n = modulus.len() - 1;
    if n == 1 {
        return vec![a[0] * b[0] % p];
    }
    let mut prod = vec![0u64; 2 * n - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    // reduce mod the monic modulus
    for k in (n..2 * n - 1).rev() {
        let c = prod[k];
        if c == 0 {
            continue;
        }
        prod[k] = 0;
        for (j, &fj) in modulus.iter().enumerate().take(n) {
            let idx = k - n + j;
            prod[idx] = (prod[idx] + c * (p - fj)) % p;
        }
    }
    prod.truncate(n);
    prod
}

/// Finds the monic irreducible polynomial of degree `n` over Z_p that comes
/// first when the non-leading coefficients are enumerated lexicographically
/// from the X^(n-1) coefficient down to the constant term.
pub fn find_irreducible(p: u64, n: usize) -> Vec<u64> {
    assert!(n >= 1);
    if n == 1 {
        // X itself: degree-1 polynomials are always irreducible.
        return vec![0, 1];
    }
    let total = (p as u128).pow(n as u32);
    let mut idx: u128 = 0;
    while idx < total {
        // idx encodes coefficients with the X^(n-1) coefficient most
        // significant, so enumeration is lexicographic in (c_{n-1},...,c_0).
        let mut coeffs = vec![0u64; n + 1];
        coeffs[n] = 1;
        let mut rem = idx;
        for c in coeffs.iter_mut().take(n) {
            *c = (rem % p as u128) as u64;
            rem /= p as u128;
        }
        if is_irreducible(&coeffs, p) {
            return coeffs;
        }
        idx += 1;
    }
    unreachable!("irreducible polynomials of every degree exist over Z_p");
}

/// Rabin irreducibility test for a monic polynomial over Z_p.
pub fn is_irreducible(f: &[u64], p: u64) -> bool {
    let n = f.len() - 1;
    if n == 0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    // X^(p^n) == X mod f, and gcd(X^(p^(n/q)) - X, f) = 1 for prime q | n.
    let x = vec![0u64, 1];
    let mut t = x.clone();
    for _ in 0..n {
        t = poly_powmod_p(&t, f, p);
    }
    if poly_normalize(&poly_sub(&t, &x, p)) != Vec::<u64>::new() {
        return false;
    }
    for q in crate::numt::prime_factors(n as u128) {
        let k = n / q as usize;
        let mut t = x.clone();
        for _ in 0..k {
            t = poly_powmod_p(&t, f, p);
        }
        let g = poly_gcd(&poly_sub(&t, &x, p), f, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

fn poly_sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect()
}

fn poly_normalize(a: &[u64]) -> Vec<u64> {
    let mut v = a.to_vec();
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn poly_mulmod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    let n = f.len() - 1;
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    for k in (n..prod.len()).rev() {
        let c = prod[k];
        if c == 0 {
            continue;
        }
        prod[k] = 0;
        for (j, &fj) in f.iter().enumerate().take(n) {
            let idx = k - n + j;
            prod[idx] = (prod[idx] + c * (p - fj)) % p;
        }
    }
    prod.truncate(n);
    prod
}

/// Raises a residue polynomial to the p-th power mod f.
fn poly_powmod_p(a: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut base = a.to_vec();
    let mut e = p;
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mulmod(&acc, &base, f, p);
        }
        base = poly_mulmod(&base, &base, f, p);
        e >>= 1;
    }
    acc
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = poly_normalize(a);
    let mut b = poly_normalize(b);
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    if a.is_empty() {
        return a;
    }
    // make monic
    let inv = inv_mod(*a.last().unwrap(), p);
    a.iter().map(|&c| c * inv % p).collect()
}

fn poly_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lead_inv = inv_mod(*b.last().unwrap(), p);
    while r.len() > db {
        let c = *r.last().unwrap() % p;
        let k = r.len() - 1;
        if c != 0 {
            let q = c * lead_inv % p;
            for (j, &bj) in b.iter().enumerate().take(db) {
                r[k - db + j] = (r[k - db + j] + q * (p - bj)) % p;
            }
        }
        r.pop();
        while r.last() == Some(&0) {
            r.pop();
        }
    }
    poly_normalize(&r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_ring() -> Arc<RingParams> {
        // p=7, m=3: ord_3(7)=1, so N=1 and d=2
        RingParams::new(3, 7).unwrap()
    }

    #[test]
    fn ring_construction() {
        let r = tiny_ring();
        assert_eq!(r.slot_degree, 1);
        assert_eq!(r.slot_count, 2);

        // p=11, m=5: 11 = 1 mod 5, N=1, d=4
        let r = RingParams::new(5, 11).unwrap();
        assert_eq!(r.slot_degree, 1);
        assert_eq!(r.slot_count, 4);

        // p=131, m=17293: N=3, d=5764
        let r = RingParams::new(17293, 131).unwrap();
        assert_eq!(r.slot_degree, 3);
        assert_eq!(r.slot_count, 5764);
        assert!(is_irreducible(&r.modulus, 131));
    }

    #[test]
    fn ring_rejects_bad_params() {
        assert!(RingParams::new(4, 7).is_err());
        assert!(RingParams::new(5, 9).is_err());
    }

    #[test]
    fn irreducible_degree_one() {
        assert_eq!(find_irreducible(2, 1), vec![0, 1]);
    }

    #[test]
    fn irreducible_degree_two_mod_7() {
        let f = find_irreducible(7, 2);
        assert_eq!(f.len(), 3);
        assert_eq!(f[2], 1);
        // exhaustive root check over Z_7
        for x in 0..7u64 {
            let v = (f[0] + f[1] * x + x * x) % 7;
            assert_ne!(v, 0, "root {x} found");
        }
        // first in lex order on (b, c): b=0, c=1 gives X^2+1 (irreducible
        // since -1 is a non-residue mod 7)
        assert_eq!(f, vec![1, 0, 1]);
    }

    #[test]
    fn irreducible_cubic_mod_131() {
        let f = find_irreducible(131, 3);
        assert!(is_irreducible(&f, 131));
        for x in 0..131u64 {
            let v = (f[0] + f[1] * x + f[2] * x * x % 131 + x * x % 131 * x) % 131;
            assert_ne!(v, 0);
        }
    }

    #[test]
    fn add_mod_p() {
        let ring = tiny_ring();
        let mut t = Tracker::new();
        let a = TrackedVector::fresh(SlotVector::from_slots(
            vec![Slot { coeffs: vec![3] }, Slot { coeffs: vec![6] }],
            ring.clone(),
        ));
        let b = TrackedVector::fresh(SlotVector::from_slots(
            vec![Slot { coeffs: vec![5] }, Slot { coeffs: vec![2] }],
            ring.clone(),
        ));
        let c = a.add(&b, &mut t).unwrap();
        assert_eq!(c.value.slots[0].coeffs, vec![1]);
        assert_eq!(c.value.slots[1].coeffs, vec![1]);
        assert_eq!(t.counts.adds, 1);
        assert_eq!(c.depth, 0);

        // identity
        let z = TrackedVector::fresh(SlotVector::zeros(&ring));
        let a2 = a.add(&z, &mut t).unwrap();
        assert_eq!(a2.value, a.value);
    }

    #[test]
    fn depth_rules() {
        let ring = tiny_ring();
        let mut t = Tracker::new();
        let mut a = TrackedVector::fresh(SlotVector::constant(2, &ring));
        let mut b = TrackedVector::fresh(SlotVector::constant(3, &ring));
        a.depth = 2;
        b.depth = 5;
        let s = a.add(&b, &mut t).unwrap();
        assert_eq!(s.depth, 5);
        let m = a.mul(&b, &mut t).unwrap();
        assert_eq!(m.depth, 6);
        assert_eq!(m.value.slots[0].coeffs, vec![6]);
        let mp = a.mul_scalar(5, &mut t);
        assert_eq!(mp.depth, 2);

        let mut c = TrackedVector::fresh(SlotVector::constant(1, &ring));
        let mut d = TrackedVector::fresh(SlotVector::constant(1, &ring));
        c.depth = 1;
        d.depth = 1;
        assert_eq!(c.mul(&d, &mut t).unwrap().depth, 2);
    }

    #[test]
    fn mul_identity_and_scalar() {
        let ring = tiny_ring();
        let mut t = Tracker::new();
        let a = TrackedVector::fresh(SlotVector::constant(4, &ring));
        let ones = TrackedVector::fresh(SlotVector::constant(1, &ring));
        let prod = a.mul(&ones, &mut t).unwrap();
        assert_eq!(prod.value, a.value);
        assert_eq!(prod.depth, 1);

        // 4 * 5 mod 7 = 6
        let scaled = a.mul_scalar(5, &mut t);
        assert_eq!(scaled.value.slots[0].coeffs, vec![6]);
        assert_eq!(scaled.depth, 0);
        assert_eq!(t.counts.ct_pt_mults, 1);
    }

    #[test]
    fn ext_reads_coefficient() {
        // N=3 ring: p=2, m=7 -> ord_7(2)=3, d=2
        let ring = RingParams::new(7, 2).unwrap();
        assert_eq!(ring.slot_degree, 3);
        let mut t = Tracker::new();
        let v = TrackedVector::fresh(SlotVector::from_slots(
            vec![
                Slot {
                    coeffs: vec![1, 0, 1],
                },
                Slot {
                    coeffs: vec![0, 1, 0],
                },
            ],
            ring.clone(),
        ));
        let e2 = v.ext(2, &mut t).unwrap();
        assert_eq!(e2.value.slots[0].coeffs, vec![1, 0, 0]);
        assert_eq!(e2.value.slots[1].coeffs, vec![0, 0, 0]);
        assert_eq!(e2.depth, 0);
        assert_eq!(t.counts.extractions, 1);
        assert!(v.ext(3, &mut t).is_err());

        // ext on constant slots is the identity on values
        let c = TrackedVector::fresh(SlotVector::constant(1, &ring));
        let e0 = c.ext(0, &mut t).unwrap();
        assert_eq!(e0.value, c.value);
    }

    #[test]
    fn ring_mismatch_rejected() {
        let r1 = tiny_ring();
        let r2 = RingParams::new(5, 11).unwrap();
        let mut t = Tracker::new();
        let a = TrackedVector::fresh(SlotVector::zeros(&r1));
        let b = TrackedVector::fresh(SlotVector::zeros(&r2));
        assert!(matches!(a.add(&b, &mut t), Err(Error::RingMismatch)));
    }

    #[test]
    fn gf_mul_matches_schoolbook() {
        // GF(131^3) with the searched modulus; spot-check associativity of
        // reduction against direct polynomial arithmetic for a known case.
        let p = 131u64;
        let f = find_irreducible(p, 3);
        let a = vec![3u64, 0, 1];
        let one = vec![1u64, 0, 0];
        assert_eq!(gf_mul(&a, &one, &f, p), a);
    }
}
