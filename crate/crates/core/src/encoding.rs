//! Base-B digit encoding of integers into slots, with the base decoupled
//! from the plaintext modulus, packing of long vectors into slot vectors,
//! and the (m, p) parameter search.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numt::{multiplicative_order, prime_factors};
use crate::slot::{RingParams, Slot, SlotVector};

/// Encoding geometry on top of a ring: integers are written as N base-B
/// digits per slot. `offset` is added before encoding so signed values map
/// to [0, B^N); `sum_width` is the largest number of encoded values ever
/// summed coefficient-wise (n - 2f for the trimmed sum).
#[derive(Debug, Clone)]
pub struct EncodingParams {
    pub ring: Arc<RingParams>,
    pub base: u64,
    pub offset: i64,
    pub sum_width: usize,
}

impl EncodingParams {
    pub fn new(ring: Arc<RingParams>, base: u64, offset: i64, sum_width: usize) -> Result<Self> {
        let p = ring.p;
        if base < 2 || base > p {
            return Err(Error::InvalidEncoding(format!(
                "need 2 <= B <= p, got B={base}, p={p}"
            )));
        }
        if p < 2 * base - 1 {
            return Err(Error::InvalidEncoding(format!(
                "need p >= 2B-1 for indicator interpolation, got B={base}, p={p}"
            )));
        }
        if p <= sum_width as u64 * (base - 1) {
            return Err(Error::InvalidEncoding(format!(
                "need p > sum_width*(B-1) so coefficient sums decode without \
                 wraparound, got p={p}, sum_width={sum_width}, B={base}"
            )));
        }
        if offset < 0 {
            return Err(Error::InvalidEncoding("offset must be non-negative".into()));
        }
        let enc = EncodingParams {
            ring,
            base,
            offset,
            sum_width,
        };
        if enc.capacity() <= offset as u64 {
            return Err(Error::InvalidEncoding(format!(
                "capacity B^N = {} cannot hold offset {offset}",
                enc.capacity()
            )));
        }
        Ok(enc)
    }

    /// B^N, the number of encodable shifted values.
    pub fn capacity(&self) -> u64 {
        self.base.pow(self.ring.slot_degree as u32)
    }

    pub fn digit_count(&self) -> usize {
        self.ring.slot_degree
    }

    /// Encodes a non-negative integer as base-B digits, least significant
    /// digit in coefficient 0.
    pub fn encode_int(&self, a: u64) -> Result<Slot> {
        if a >= self.capacity() {
            return Err(Error::ValueOutOfRange {
                value: a as i64,
                capacity: self.capacity(),
            });
        }
        let mut coeffs = vec![0u64; self.digit_count()];
        let mut rem = a;
        for c in coeffs.iter_mut() {
            *c = rem % self.base;
            rem /= self.base;
        }
        Ok(Slot { coeffs })
    }

    /// Inverse of `encode_int`, extended to coefficient-wise sums: coeffs
    /// lifted to [0, p) are combined as sum of c_i * B^i.
    pub fn decode_slot(&self, s: &Slot) -> u64 {
        let mut acc = 0u64;
        for (i, &c) in s.coeffs.iter().enumerate() {
            acc += c * self.base.pow(i as u32);
        }
        acc
    }

    /// Encodes a signed value by shifting with the offset.
    pub fn encode_value(&self, x: i64) -> Result<Slot> {
        let shifted = x + self.offset;
        if shifted < 0 {
            return Err(Error::ValueOutOfRange {
                value: x,
                capacity: self.capacity(),
            });
        }
        self.encode_int(shifted as u64)
    }

    pub fn decode_value(&self, s: &Slot) -> i64 {
        self.decode_slot(s) as i64 - self.offset
    }
}

/// A length-D integer vector packed positionally into ceil(D/d) slot
/// vectors: value j lands in slot vector j / d, slot j mod d. Positions at
/// or beyond D hold the encoding of raw value 0.
#[derive(Debug, Clone)]
pub struct PackedBatch {
    pub vectors: Vec<SlotVector>,
    pub dim: usize,
}

pub fn pack(values: &[i64], enc: &EncodingParams) -> Result<PackedBatch> {
    let d = enc.ring.slot_count;
    let pad = enc.encode_value(0)?;
    let chunks = values.len().div_ceil(d).max(1);
    let mut vectors = Vec::with_capacity(chunks);
    for chunk in 0..chunks {
        let mut slots = Vec::with_capacity(d);
        for j in 0..d {
            let idx = chunk * d + j;
            slots.push(if idx < values.len() {
                enc.encode_value(values[idx])?
            } else {
                pad.clone()
            });
        }
        vectors.push(SlotVector::from_slots(slots, enc.ring.clone()));
    }
    Ok(PackedBatch {
        vectors,
        dim: values.len(),
    })
}

pub fn unpack(batch: &PackedBatch, enc: &EncodingParams) -> Vec<i64> {
    decode_packed(&batch.vectors, batch.dim, enc, 1)
}

/// Decodes `dim` values from packed slot vectors that hold a coefficient-wise
/// sum of `width` encodings, removing the accumulated offsets.
pub fn decode_packed(
    vectors: &[SlotVector],
    dim: usize,
    enc: &EncodingParams,
    width: u64,
) -> Vec<i64> {
    let d = enc.ring.slot_count;
    (0..dim)
        .map(|j| {
            let s = &vectors[j / d].slots[j % d];
            enc.decode_slot(s) as i64 - width as i64 * enc.offset
        })
        .collect()
}

/// Input to the (m, p) parameter search.
#[derive(Debug, Clone)]
pub struct ParamSpec {
    /// Number of distinct raw values to represent (B^N must reach it).
    pub range: u64,
    /// Offset added before encoding (pins the signed/unsigned convention).
    pub offset: i64,
    /// Fixed base, or None to take the minimal B with B^N >= range.
    pub base: Option<u64>,
    pub n: usize,
    pub f: usize,
    /// Desired slot degree N (digit count).
    pub slot_degree: usize,
    /// Minimum number of slots d.
    pub min_slots: usize,
    pub max_p: u64,
    pub max_m: u64,
}

impl ParamSpec {
    /// Spec for delta-bit signed quantized values in
    /// [-(2^(delta-1)-1), 2^(delta-1)-1].
    pub fn from_precision(delta: u32, n: usize, f: usize, slot_degree: usize) -> Self {
        let half = (1u64 << (delta - 1)) - 1;
        ParamSpec {
            range: 2 * half + 1,
            offset: half as i64,
            base: None,
            n,
            f,
            slot_degree,
            min_slots: 1,
            max_p: 100_000,
            max_m: 10_000_000,
        }
    }
}

/// Searches for the cheapest (p, m) prime pair admitting the requested slot
/// degree and all encoding invariants: primes p ascending, and for each p
/// the smallest prime m dividing p^N - 1 with ord_m(p) = N and enough slots.
pub fn param_search(spec: &ParamSpec) -> Result<EncodingParams> {
    if spec.range < 1 || spec.n < 1 || 2 * spec.f >= spec.n {
        return Err(Error::InvalidEncoding(format!(
            "infeasible spec: range={}, n={}, f={}",
            spec.range, spec.n, spec.f
        )));
    }
    let n_deg = spec.slot_degree as u32;
    let base = match spec.base {
        Some(b) => b,
        None => {
            let mut b = 2u64;
            while b.checked_pow(n_deg).is_none_or(|c| c < spec.range) {
                b += 1;
            }
            b
        }
    };
    if base.checked_pow(n_deg).is_none_or(|c| c < spec.range) {
        return Err(Error::InvalidEncoding(format!(
            "base {base} with N={n_deg} cannot represent {} values",
            spec.range
        )));
    }
    let sum_width = spec.n - 2 * spec.f;
    let p_min = (2 * base - 1)
        .max(sum_width as u64 * (base - 1) + 1)
        .max(spec.n as u64)
        .max(2);
    let mut p = p_min.saturating_sub(1);
    loop {
        p += 1;
        if p > spec.max_p {
            return Err(Error::SearchExhausted {
                max_p: spec.max_p,
                max_m: spec.max_m,
            });
        }
        if !crate::numt::is_prime(p) {
            continue;
        }
        let pn = (p as u128).pow(n_deg) - 1;
        let mut candidates: Vec<u64> = prime_factors(pn)
            .into_iter()
            .filter(|&m| m <= spec.max_m as u128)
            .map(|m| m as u64)
            .collect();
        candidates.sort_unstable();
        for m in candidates {
            if m == 2 && n_deg > 1 {
                continue;
            }
            if (m - 1) % n_deg as u64 != 0 {
                continue;
            }
            if multiplicative_order(p, m) != n_deg as u64 {
                continue;
            }
            let d = ((m - 1) / n_deg as u64) as usize;
            if d < spec.min_slots {
                continue;
            }
            let ring = RingParams::new(m, p)?;
            return EncodingParams::new(ring, base, spec.offset, sum_width);
        }
    }
}
