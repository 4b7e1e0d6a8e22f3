//! Cleartext reference aggregators: coordinate-wise trimmed sum, trimmed
//! mean, and median. These serve as ground truth for the homomorphic
//! circuits and as the fast aggregation path in the simulator.

use num_traits::{Num, NumCast, ToPrimitive};

use crate::error::{Error, Result};

fn check_rect<T>(rows: &[Vec<T>]) -> Result<usize> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let dim = rows[0].len();
    for r in rows {
        assert_eq!(r.len(), dim, "rows must be rectangular");
    }
    Ok(dim)
}

/// Coordinate-wise trimmed sum: per coordinate, sort the column, drop the
/// smallest and largest f entries, and sum the n - 2f that remain.
pub fn cwts<T>(rows: &[Vec<T>], f: usize) -> Result<Vec<T>>
where
    T: Num + Copy + PartialOrd,
{
    let dim = check_rect(rows)?;
    let n = rows.len();
    if 2 * f >= n {
        return Err(Error::InvalidTrim { n, f });
    }
    let mut out = Vec::with_capacity(dim);
    let mut col: Vec<T> = Vec::with_capacity(n);
    for j in 0..dim {
        col.clear();
        col.extend(rows.iter().map(|r| r[j]));
        col.sort_by(|a, b| a.partial_cmp(b).expect("comparable values"));
        let mut acc = T::zero();
        for &v in &col[f..n - f] {
            acc = acc + v;
        }
        out.push(acc);
    }
    Ok(out)
}

/// Coordinate-wise trimmed mean: cwts / (n - 2f), always real-valued.
pub fn cwtm<T>(rows: &[Vec<T>], f: usize) -> Result<Vec<f64>>
where
    T: Num + Copy + PartialOrd + ToPrimitive,
{
    let sums = cwts(rows, f)?;
    let w = (rows.len() - 2 * f) as f64;
    Ok(sums
        .iter()
        .map(|s| <f64 as NumCast>::from(*s).expect("finite value") / w)
        .collect())
}

/// Coordinate-wise median: per coordinate, the sorted column's entry at
/// index floor(n/2). Exact middle for odd n.
pub fn cwmed<T>(rows: &[Vec<T>]) -> Result<Vec<T>>
where
    T: Num + Copy + PartialOrd,
{
    let dim = check_rect(rows)?;
    let n = rows.len();
    let mut out = Vec::with_capacity(dim);
    let mut col: Vec<T> = Vec::with_capacity(n);
    for j in 0..dim {
        col.clear();
        col.extend(rows.iter().map(|r| r[j]));
        col.sort_by(|a, b| a.partial_cmp(b).expect("comparable values"));
        out.push(col[n / 2]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(cols: &[i64]) -> Vec<Vec<i64>> {
        cols.iter().map(|&v| vec![v]).collect()
    }

    #[test]
    fn cwts_examples() {
        assert_eq!(cwts(&rows(&[5, 2, 5, 1]), 1).unwrap(), vec![7]);
        // f = 0 is the column sum
        assert_eq!(cwts(&rows(&[5, 2, 5, 1]), 0).unwrap(), vec![13]);
        // n = 3, f = 1 is the median
        assert_eq!(cwts(&rows(&[9, -4, 3]), 1).unwrap(), vec![3]);
        assert!(cwts(&rows(&[1, 2]), 1).is_err());
        assert!(cwts::<i64>(&[], 0).is_err());
    }

    #[test]
    fn cwts_multi_coordinate() {
        let m = vec![vec![1, 10], vec![3, -10], vec![2, 0]];
        assert_eq!(cwts(&m, 1).unwrap(), vec![2, 0]);
        assert_eq!(cwts(&m, 0).unwrap(), vec![6, 0]);
    }

    #[test]
    fn cwtm_examples() {
        assert_eq!(cwtm(&rows(&[5, 2, 5, 1]), 1).unwrap(), vec![3.5]);
        // idempotent on identical rows
        let m = vec![vec![4.0, -1.5]; 5];
        assert_eq!(cwtm(&m, 2).unwrap(), vec![4.0, -1.5]);
        // f = 0 is the arithmetic mean
        assert_eq!(cwtm(&rows(&[1, 2, 3, 6]), 0).unwrap(), vec![3.0]);
    }

    #[test]
    fn cwmed_examples() {
        assert_eq!(cwmed(&rows(&[3, 1, 4, 1, 5])).unwrap(), vec![3]);
        assert_eq!(cwmed(&[vec![7.0, -2.0]]).unwrap(), vec![7.0, -2.0]);
        // odd n: median equals trimmed mean with the maximal f
        let m = rows(&[9, 2, 5, 1, 7]);
        assert_eq!(
            cwmed(&m).unwrap(),
            cwtm(&m, 2).unwrap().iter().map(|&x| x as i64).collect::<Vec<_>>()
        );
    }

    #[test]
    fn cwts_bounded_by_honest_rows() {
        // corrupting f rows keeps cwts within the honest rows' span
        let honest = [1i64, 2, 3, 4];
        let m = rows(&[1, 2, 3, 4, 1_000_000]);
        let f = 1;
        let out = cwts(&m, f).unwrap()[0];
        let w = (m.len() - 2 * f) as i64;
        let lo = honest.iter().min().unwrap() * w;
        let hi = honest.iter().max().unwrap() * w;
        assert!(out >= lo && out <= hi);
    }
}
