//! Homomorphic operators built from slot arithmetic: Lagrange indicator
//! polynomials, the lexicographic slot-wise less-than, pairwise comparison
//! with index tie-breaking, ranks, trimmed sum, and median, plus cost
//! reporting.

use crate::encoding::EncodingParams;
use crate::error::{Error, Result};
use crate::numt::inv_mod;
use crate::slot::{OpCounts, SlotVector, TrackedVector, Tracker};

/// Unique polynomial of degree < len(points) through the given points mod p.
pub fn lagrange_interpolate(points: &[u64], values: &[u64], p: u64) -> Result<Vec<u64>> {
    assert_eq!(points.len(), values.len());
    let k = points.len();
    if k as u64 > p {
        return Err(Error::TooManyPoints(k, p));
    }
    for i in 0..k {
        for j in i + 1..k {
            if points[i] % p == points[j] % p {
                return Err(Error::DuplicatePoints);
            }
        }
    }
    // full = prod (X - x_i)
    let mut full = vec![1u64];
    for &x in points {
        let neg_x = (p - x % p) % p;
        let mut next = vec![0u64; full.len() + 1];
        for (i, &c) in full.iter().enumerate() {
            next[i] = (next[i] + c * neg_x) % p;
            next[i + 1] = (next[i + 1] + c) % p;
        }
        full = next;
    }
    let mut acc = vec![0u64; k];
    for i in 0..k {
        if values[i].is_multiple_of(p) {
            continue;
        }
        // q = full / (X - x_i) by synthetic division
        let xi = points[i] % p;
        let mut q = vec![0u64; k];
        let mut carry = 0u64;
        for j in (0..k).rev() {
            carry = (full[j + 1] + carry * xi) % p;
            q[j] = carry;
        }
        // denominator = q(x_i)
        let mut denom = 0u64;
        for j in (0..k).rev() {
            denom = (denom * xi + q[j]) % p;
        }
        let scale = values[i] % p * inv_mod(denom, p) % p;
        for j in 0..k {
            acc[j] = (acc[j] + q[j] * scale) % p;
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndicatorKind {
    Zero { base: u64 },
    Neg { base: u64 },
    Btw { n: usize, f: usize },
}

/// A Lagrange indicator polynomial over Z_p, exact on its stated domain.
#[derive(Debug, Clone)]
pub struct IndicatorPoly {
    pub coeffs: Vec<u64>,
    pub kind: IndicatorKind,
    pub p: u64,
}

impl IndicatorPoly {
    /// 1 at 0 and 0 elsewhere on [-(B-1), B-1]; degree <= 2B-2.
    pub fn zero(base: u64, p: u64) -> Result<Self> {
        Self::sign_indicator(base, p, IndicatorKind::Zero { base })
    }

    /// 1 on [-(B-1), -1] and 0 on [0, B-1]; degree <= 2B-2.
    pub fn neg(base: u64, p: u64) -> Result<Self> {
        Self::sign_indicator(base, p, IndicatorKind::Neg { base })
    }

    fn sign_indicator(base: u64, p: u64, kind: IndicatorKind) -> Result<Self> {
        if p < 2 * base - 1 {
            return Err(Error::InvalidEncoding(format!(
                "need p >= 2B-1 distinct interpolation points, got B={base}, p={p}"
            )));
        }
        let mut points = Vec::new();
        let mut values = Vec::new();
        for c in -(base as i64 - 1)..=(base as i64 - 1) {
            points.push(c.rem_euclid(p as i64) as u64);
            let v = match kind {
                IndicatorKind::Zero { .. } => u64::from(c == 0),
                IndicatorKind::Neg { .. } => u64::from(c < 0),
                IndicatorKind::Btw { .. } => unreachable!(),
            };
            values.push(v);
        }
        let coeffs = lagrange_interpolate(&points, &values, p)?;
        Ok(IndicatorPoly { coeffs, kind, p })
    }

    /// 1 on the rank window {f, ..., n-f-1} and 0 on the rest of
    /// {0, ..., n-1}; degree <= n-1.
    pub fn btw(n: usize, f: usize, p: u64) -> Result<Self> {
        if (p as usize) < n {
            return Err(Error::ModulusTooSmallForRanks { p, n });
        }
        let points: Vec<u64> = (0..n as u64).collect();
        let values: Vec<u64> = (0..n)
            .map(|r| u64::from(r >= f && r < n - f))
            .collect();
        let coeffs = lagrange_interpolate(&points, &values, p)?;
        Ok(IndicatorPoly {
            coeffs,
            kind: IndicatorKind::Btw { n, f },
            p,
        })
    }

    /// Cleartext evaluation at a residue, for tests and oracles.
    pub fn eval(&self, x: u64) -> u64 {
        let mut acc = 0u64;
        for &c in self.coeffs.iter().rev() {
            acc = (acc * (x % self.p) + c) % self.p;
        }
        acc
    }

    /// Highest power with a nonzero coefficient.
    pub fn effective_degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|&c| c != 0)
            .unwrap_or(0)
    }
}

/// Evaluates a polynomial on a tracked vector of constant slots. Powers come
/// from a balanced product tree (depth ceil(log2 deg)); the coefficient
/// combination uses plaintext multiplications and adds only.
pub fn apply_poly(x: &TrackedVector, poly: &IndicatorPoly, t: &mut Tracker) -> TrackedVector {
    let deg = poly.effective_degree();
    if deg == 0 {
        return TrackedVector::fresh(SlotVector::constant(poly.coeffs[0], x.ring()));
    }
    let mut powers: Vec<Option<TrackedVector>> = vec![None; deg + 1];
    powers[1] = Some(x.clone());
    for k in 2..=deg {
        let lo = powers[k / 2].as_ref().unwrap().clone();
        let hi = powers[k - k / 2].as_ref().unwrap();
        powers[k] = Some(lo.mul(hi, t).expect("same ring"));
    }
    let mut acc: Option<TrackedVector> = None;
    for (k, &c) in poly.coeffs.iter().enumerate().take(deg + 1).skip(1) {
        if c == 0 {
            continue;
        }
        let pw = powers[k].as_ref().unwrap();
        let term = if c == 1 {
            pw.clone()
        } else {
            pw.mul_scalar(c, t)
        };
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term, t).expect("same ring"),
        });
    }
    let mut out = acc.expect("deg >= 1 has a nonzero coefficient");
    if poly.coeffs[0] != 0 {
        out = out.add_scalar(poly.coeffs[0], t);
    }
    out
}

/// Slot-wise Zero indicator on constant slots holding values in
/// [-(B-1), B-1].
pub fn zero_op(x: &TrackedVector, base: u64, t: &mut Tracker) -> Result<TrackedVector> {
    let poly = IndicatorPoly::zero(base, x.ring().p)?;
    Ok(apply_poly(x, &poly, t))
}

/// Slot-wise Neg indicator on constant slots holding values in
/// [-(B-1), B-1].
pub fn neg_op(x: &TrackedVector, base: u64, t: &mut Tracker) -> Result<TrackedVector> {
    let poly = IndicatorPoly::neg(base, x.ring().p)?;
    Ok(apply_poly(x, &poly, t))
}

/// Extracts all digit positions of an encoded vector once, for reuse.
fn extract_digits(v: &TrackedVector, n_digits: usize, t: &mut Tracker) -> Result<Vec<TrackedVector>> {
    (0..n_digits).map(|i| v.ext(i, t)).collect()
}

/// Lexicographic less-than over pre-extracted digits. Digit differences and
/// Zero terms are computed once; the equality suffix products are built by
/// one descending accumulation.
fn lt_digits(
    dv: &[TrackedVector],
    dw: &[TrackedVector],
    zero: &IndicatorPoly,
    neg: &IndicatorPoly,
    t: &mut Tracker,
) -> Result<TrackedVector> {
    let n_digits = dv.len();
    let diffs: Vec<TrackedVector> = dv
        .iter()
        .zip(dw)
        .map(|(a, b)| a.sub(b, t))
        .collect::<Result<_>>()?;
    // result starts with the most significant digit's Neg term (its equality
    // product is empty)
    let mut result = apply_poly(&diffs[n_digits - 1], neg, t);
    let mut suffix: Option<TrackedVector> = None;
    for i in (0..n_digits - 1).rev() {
        let z = apply_poly(&diffs[i + 1], zero, t);
        suffix = Some(match suffix {
            None => z,
            Some(s) => s.mul(&z, t)?,
        });
        let ng = apply_poly(&diffs[i], neg, t);
        let term = ng.mul(suffix.as_ref().unwrap(), t)?;
        result = result.add(&term, t)?;
    }
    Ok(result)
}

/// Slot-wise less-than on base-B digit encodings: slot j of the result is 1
/// iff decode(v_j) < decode(w_j), else 0.
pub fn lt(
    v: &TrackedVector,
    w: &TrackedVector,
    enc: &EncodingParams,
    t: &mut Tracker,
) -> Result<TrackedVector> {
    let n_digits = enc.digit_count();
    let zero = IndicatorPoly::zero(enc.base, enc.ring.p)?;
    let neg = IndicatorPoly::neg(enc.base, enc.ring.p)?;
    let dv = extract_digits(v, n_digits, t)?;
    let dw = extract_digits(w, n_digits, t)?;
    lt_digits(&dv, &dw, &zero, &neg, t)
}

/// Pairwise comparison with index tie-breaking: LT(v, w) when i >= j, else
/// 1 - LT(w, v), so equal values appearing later in the list are flagged.
pub fn comp(
    v: &TrackedVector,
    w: &TrackedVector,
    i: usize,
    j: usize,
    enc: &EncodingParams,
    t: &mut Tracker,
) -> Result<TrackedVector> {
    if i >= j {
        lt(v, w, enc, t)
    } else {
        Ok(lt(w, v, enc, t)?.scalar_minus(1, t))
    }
}

/// Slot-wise ranks of n encoded inputs: each slot's ranks are a permutation
/// of {0, ..., n-1}, ties broken by input index. One less-than evaluation is
/// shared by the two comparisons of each unordered pair.
pub fn ranks(
    inputs: &[TrackedVector],
    enc: &EncodingParams,
    t: &mut Tracker,
) -> Result<Vec<TrackedVector>> {
    let n = inputs.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if (enc.ring.p as usize) < n {
        return Err(Error::ModulusTooSmallForRanks { p: enc.ring.p, n });
    }
    let n_digits = enc.digit_count();
    let zero = IndicatorPoly::zero(enc.base, enc.ring.p)?;
    let neg = IndicatorPoly::neg(enc.base, enc.ring.p)?;
    let digits: Vec<Vec<TrackedVector>> = inputs
        .iter()
        .map(|v| extract_digits(v, n_digits, t))
        .collect::<Result<_>>()?;
    let mut rk: Vec<TrackedVector> = (0..n)
        .map(|_| TrackedVector::fresh(SlotVector::zeros(&enc.ring)))
        .collect();
    for a in 0..n {
        for b in a + 1..n {
            // Comp(v_a, v_b; a, b) = 1 - LT(v_b, v_a), and
            // Comp(v_b, v_a; b, a) = LT(v_b, v_a): one LT serves both.
            let lt_ba = lt_digits(&digits[b], &digits[a], &zero, &neg, t)?;
            rk[a] = rk[a].add(&lt_ba.scalar_minus(1, t), t)?;
            rk[b] = rk[b].add(&lt_ba, t)?;
        }
    }
    Ok(rk)
}

/// Homomorphic trimmed sum: selects, per slot, the inputs whose rank lies in
/// {f, ..., n-f-1} and sums them. The decoded result equals the cleartext
/// coordinate-wise trimmed sum.
pub fn hts(
    inputs: &[TrackedVector],
    f: usize,
    enc: &EncodingParams,
    t: &mut Tracker,
) -> Result<TrackedVector> {
    let n = inputs.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if 2 * f >= n {
        return Err(Error::InvalidTrim { n, f });
    }
    if enc.sum_width < n - 2 * f {
        return Err(Error::InvalidEncoding(format!(
            "sum_width {} cannot absorb {} summed values",
            enc.sum_width,
            n - 2 * f
        )));
    }
    let rk = ranks(inputs, enc, t)?;
    let btw = IndicatorPoly::btw(n, f, enc.ring.p)?;
    let mut acc: Option<TrackedVector> = None;
    for (rk_i, v_i) in rk.iter().zip(inputs) {
        let sel = apply_poly(rk_i, &btw, t);
        let term = sel.mul(v_i, t)?;
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term, t)?,
        });
    }
    Ok(acc.expect("n >= 1"))
}

/// Homomorphic coordinate-wise median: the trimmed sum with f = floor(n/2),
/// which selects exactly the middle rank. Odd n only.
pub fn hmed(
    inputs: &[TrackedVector],
    enc: &EncodingParams,
    t: &mut Tracker,
) -> Result<TrackedVector> {
    let n = inputs.len();
    if n.is_multiple_of(2) {
        return Err(Error::EvenMedian(n));
    }
    hts(inputs, n / 2, enc, t)
}

/// Measured multiplicative depth and operation counts of one trimmed-sum
/// circuit evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostReport {
    pub depth: u32,
    pub counts: OpCounts,
    pub n: usize,
    pub f: usize,
    pub base: u64,
    pub digits: usize,
    pub p: u64,
}

impl CostReport {
    pub fn to_kv_lines(&self) -> String {
        format!(
            "n={}\nf={}\nB={}\nN={}\np={}\ndepth={}\nct_ct_mults={}\nct_pt_mults={}\nadds={}\nextractions={}\n",
            self.n,
            self.f,
            self.base,
            self.digits,
            self.p,
            self.depth,
            self.counts.ct_ct_mults,
            self.counts.ct_pt_mults,
            self.counts.adds,
            self.counts.extractions
        )
    }
}

/// Runs the trimmed-sum circuit on fresh zero encodings and reports the
/// measured depth and counters.
pub fn cost_report(n: usize, f: usize, enc: &EncodingParams) -> Result<CostReport> {
    let zero_slot = enc.encode_value(0)?;
    let slots = vec![zero_slot; enc.ring.slot_count];
    let input = TrackedVector::fresh(SlotVector::from_slots(slots, enc.ring.clone()));
    let inputs = vec![input; n];
    let mut t = Tracker::new();
    let out = hts(&inputs, f, enc, &mut t)?;
    Ok(CostReport {
        depth: out.depth,
        counts: t.counts,
        n,
        f,
        base: enc.base,
        digits: enc.digit_count(),
        p: enc.ring.p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::pack;
    use crate::slot::RingParams;
    use std::sync::Arc;

    fn enc(m: u64, p: u64, base: u64, sum_width: usize) -> EncodingParams {
        let ring = RingParams::new(m, p).unwrap();
        EncodingParams::new(ring, base, 0, sum_width).unwrap()
    }

    /// encodes one integer per input into a d-slot vector (value replicated)
    fn encode_all(vals: &[i64], e: &EncodingParams) -> Vec<TrackedVector> {
        vals.iter()
            .map(|&v| {
                let s = e.encode_value(v).unwrap();
                TrackedVector::fresh(SlotVector::from_slots(
                    vec![s; e.ring.slot_count],
                    e.ring.clone(),
                ))
            })
            .collect()
    }

    fn decode_first(v: &TrackedVector, e: &EncodingParams) -> i64 {
        e.decode_slot(&v.value.slots[0]) as i64
    }

    #[test]
    fn lagrange_basics() {
        // points {0,1}, values {1,0} over Z_7: 1 - X
        assert_eq!(
            lagrange_interpolate(&[0, 1], &[1, 0], 7).unwrap(),
            vec![1, 6]
        );
        // constant values give a degree-0 polynomial
        let c = lagrange_interpolate(&[0, 1, 2], &[4, 4, 4], 7).unwrap();
        assert_eq!(c, vec![4, 0, 0]);
        // Zero for B=2 over points {-1, 0, 1}: 1 - X^2
        let z = IndicatorPoly::zero(2, 5).unwrap();
        assert_eq!(z.coeffs, vec![1, 0, 4]);
        // duplicates rejected
        assert!(lagrange_interpolate(&[1, 1], &[0, 0], 7).is_err());
        assert!(lagrange_interpolate(&[0, 1, 2], &[0, 0, 0], 2).is_err());
    }

    #[test]
    fn indicators_exact_on_domain() {
        let (base, p) = (7u64, 61u64);
        let z = IndicatorPoly::zero(base, p).unwrap();
        let ng = IndicatorPoly::neg(base, p).unwrap();
        for c in -(base as i64 - 1)..=(base as i64 - 1) {
            let r = c.rem_euclid(p as i64) as u64;
            assert_eq!(z.eval(r), u64::from(c == 0), "Zero({c})");
            assert_eq!(ng.eval(r), u64::from(c < 0), "Neg({c})");
        }
        assert!(z.effective_degree() <= 2 * base as usize - 2);
        // p < 2B-1 rejected
        assert!(IndicatorPoly::zero(7, 11).is_err());
    }

    #[test]
    fn btw_exact_on_domain() {
        for n in 1..=15usize {
            for f in 0..n.div_ceil(2) {
                if 2 * f >= n {
                    continue;
                }
                let b = IndicatorPoly::btw(n, f, 61).unwrap();
                for r in 0..n {
                    assert_eq!(
                        b.eval(r as u64),
                        u64::from(r >= f && r < n - f),
                        "Btw(n={n}, f={f}) at {r}"
                    );
                }
                assert!(b.effective_degree() < n);
            }
        }
    }

    #[test]
    fn zero_neg_ops_on_tracked_constants() {
        // N=3 ring, p=61, B=7
        let e = enc(13, 61, 7, 1);
        let mut t = Tracker::new();
        for c in -6i64..=6 {
            let r = c.rem_euclid(61) as u64;
            let x = TrackedVector::fresh(SlotVector::constant(r, &e.ring));
            let z = zero_op(&x, 7, &mut t).unwrap();
            let n = neg_op(&x, 7, &mut t).unwrap();
            assert_eq!(z.value.slots[0].coeffs[0], u64::from(c == 0));
            assert_eq!(n.value.slots[0].coeffs[0], u64::from(c < 0));
            // degree-13-point interpolation evaluates in 4 ct-ct levels
            assert_eq!(z.depth, 4);
        }
    }

    #[test]
    fn lt_exhaustive_small() {
        // B=3, N=2, p=23, d=1: all pairs in [0, 9)^2
        let e = enc(3, 23, 3, 5);
        let mut t = Tracker::new();
        for a in 0..9i64 {
            for b in 0..9i64 {
                let va = &encode_all(&[a], &e)[0];
                let vb = &encode_all(&[b], &e)[0];
                let r = lt(va, vb, &e, &mut t).unwrap();
                assert_eq!(
                    r.value.slots[0].coeffs[0],
                    u64::from(a < b),
                    "lt({a},{b})"
                );
                assert!(r.value.slots[0].is_constant());
            }
        }
    }

    #[test]
    fn lt_examples_b7() {
        let e = enc(13, 61, 7, 1);
        let mut t = Tracker::new();
        let v3 = &encode_all(&[3], &e)[0];
        let v52 = &encode_all(&[52], &e)[0];
        assert_eq!(lt(v3, v52, &e, &mut t).unwrap().value.slots[0].coeffs[0], 1);
        assert_eq!(lt(v52, v3, &e, &mut t).unwrap().value.slots[0].coeffs[0], 0);
        // irreflexive
        assert_eq!(lt(v52, v52, &e, &mut t).unwrap().value.slots[0].coeffs[0], 0);
    }

    #[test]
    fn lt_packed_slots() {
        // B=4, N=2, d=2 ring
        let ring = RingParams::new(5, 19).unwrap();
        assert_eq!((ring.slot_degree, ring.slot_count), (2, 2));
        let e = EncodingParams::new(ring, 4, 0, 1).unwrap();
        let mut t = Tracker::new();
        let mk = |vals: &[i64]| {
            let b = pack(vals, &e).unwrap();
            TrackedVector::fresh(b.vectors[0].clone())
        };
        let r = lt(&mk(&[5, 2]), &mk(&[2, 2]), &e, &mut t).unwrap();
        assert_eq!(
            r.value.slots.iter().map(|s| s.coeffs[0]).collect::<Vec<_>>(),
            vec![0, 0]
        );
        let r = lt(&mk(&[1, 9]), &mk(&[5, 3]), &e, &mut t).unwrap();
        assert_eq!(
            r.value.slots.iter().map(|s| s.coeffs[0]).collect::<Vec<_>>(),
            vec![1, 0]
        );
    }

    #[test]
    fn comp_tie_breaking() {
        let e = enc(13, 61, 7, 1);
        let mut t = Tracker::new();
        let x = &encode_all(&[5], &e)[0];
        // diagonal
        assert_eq!(
            comp(x, x, 0, 0, &e, &mut t).unwrap().value.slots[0].coeffs[0],
            0
        );
        // equal values, earlier index vs later duplicate
        assert_eq!(
            comp(x, x, 0, 2, &e, &mut t).unwrap().value.slots[0].coeffs[0],
            1
        );
        let v2 = &encode_all(&[2], &e)[0];
        let v5 = &encode_all(&[5], &e)[0];
        assert_eq!(
            comp(v2, v5, 1, 0, &e, &mut t).unwrap().value.slots[0].coeffs[0],
            1
        );
    }

    #[test]
    fn ranks_examples() {
        let e = enc(13, 61, 7, 4);
        let mut t = Tracker::new();
        let inputs = encode_all(&[5, 2, 5, 1], &e);
        let rk = ranks(&inputs, &e, &mut t).unwrap();
        let got: Vec<u64> = rk.iter().map(|r| r.value.slots[0].coeffs[0]).collect();
        assert_eq!(got, vec![1, 2, 0, 3]);

        let inputs = encode_all(&[5, 5], &e);
        let rk = ranks(&inputs, &e, &mut t).unwrap();
        let got: Vec<u64> = rk.iter().map(|r| r.value.slots[0].coeffs[0]).collect();
        assert_eq!(got, vec![1, 0]);

        let inputs = encode_all(&[9], &e);
        let rk = ranks(&inputs, &e, &mut t).unwrap();
        assert_eq!(rk[0].value.slots[0].coeffs[0], 0);
    }

    #[test]
    fn hts_scalar_examples() {
        let e = enc(13, 61, 7, 4);
        let mut t = Tracker::new();
        let inputs = encode_all(&[5, 2, 5, 1], &e);
        let out = hts(&inputs, 1, &e, &mut t).unwrap();
        assert_eq!(decode_first(&out, &e), 7);
        let out = hts(&inputs, 0, &e, &mut t).unwrap();
        assert_eq!(decode_first(&out, &e), 13);

        // permutation invariance
        let perm = encode_all(&[1, 5, 2, 5], &e);
        let out = hts(&perm, 1, &e, &mut t).unwrap();
        assert_eq!(decode_first(&out, &e), 7);

        // invalid f
        assert!(hts(&inputs, 2, &e, &mut t).is_err());
    }

    #[test]
    fn hmed_examples() {
        let e = enc(13, 61, 7, 5);
        let mut t = Tracker::new();
        let inputs = encode_all(&[3, 1, 4, 1, 5], &e);
        let out = hmed(&inputs, &e, &mut t).unwrap();
        assert_eq!(decode_first(&out, &e), 3);

        let inputs = encode_all(&[7, 7, 7], &e);
        let out = hmed(&inputs, &e, &mut t).unwrap();
        assert_eq!(decode_first(&out, &e), 7);

        let one = encode_all(&[42], &e);
        let out = hmed(&one, &e, &mut t).unwrap();
        assert_eq!(decode_first(&out, &e), 42);

        let even = encode_all(&[1, 2], &e);
        assert!(matches!(hmed(&even, &e, &mut t), Err(Error::EvenMedian(2))));
    }

    #[test]
    fn cost_report_depth_ordering_in_base() {
        // p=61 admits B in {2..=31}; depth grows with ceil(log2(2B-1))
        let ring = RingParams::new(13, 61).unwrap();
        let mut last = 0;
        for base in [2u64, 3, 7, 16, 31] {
            let e = EncodingParams::new(ring.clone(), base, 0, 2).unwrap();
            let rep = cost_report(4, 1, &e).unwrap();
            assert!(rep.depth >= last, "depth decreased at B={base}");
            last = rep.depth;
            assert!(rep.depth as u64 <= rep.counts.ct_ct_mults);
        }
    }

    #[test]
    fn cost_report_deterministic() {
        let e = enc(13, 61, 7, 2);
        let a = cost_report(4, 1, &e).unwrap();
        let b = cost_report(4, 1, &e).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn hts_respects_sum_width() {
        let e = enc(13, 61, 7, 2);
        let inputs = encode_all(&[1, 2, 3, 4, 5], &e);
        let mut t = Tracker::new();
        // n - 2f = 3 > sum_width = 2
        assert!(hts(&inputs, 1, &e, &mut t).is_err());
    }

    fn _assert_send_sync<T: Send + Sync>() {}

    #[test]
    fn values_are_shareable_across_threads() {
        _assert_send_sync::<TrackedVector>();
        _assert_send_sync::<SlotVector>();
        _assert_send_sync::<Arc<RingParams>>();
    }
}
