use crate::error::{invalid, Result};
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// Ballot numbers `alpha[h][k] = C(h,k) - C(h,k-1)` for `k <= h/2` and their
/// partial sums `beta[h][p] = sum_{k <= (h-2-p)/2} alpha[h][k]` for `p <= h-2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTable {
    h_max: usize,
    alpha: Vec<Vec<BigUint>>,
    beta: Vec<Vec<BigUint>>,
}

impl CoeffTable {
    pub fn new(h_max: usize) -> Result<Self> {
        if h_max < 2 {
            return invalid(format!("coefficient tables need h_max >= 2, got {h_max}"));
        }
        let mut alpha: Vec<Vec<BigUint>> = vec![vec![BigUint::one()]];
        for h in 1..=h_max {
            let prev = &alpha[h - 1];
            let row: Vec<BigUint> = (0..=h / 2)
                .map(|k| {
                    let same = prev.get(k).cloned().unwrap_or_default();
                    let left = if k > 0 { prev[k - 1].clone() } else { BigUint::zero() };
                    same + left
                })
                .collect();
            alpha.push(row);
        }
        let beta = (0..=h_max)
            .map(|h| {
                if h < 2 {
                    return Vec::new();
                }
                (0..=h - 2)
                    .map(|p| {
                        let top = (h - 2 - p) / 2;
                        alpha[h][..=top].iter().sum()
                    })
                    .collect()
            })
            .collect();
        Ok(Self { h_max, alpha, beta })
    }

    pub fn h_max(&self) -> usize {
        self.h_max
    }

    pub fn alpha(&self, h: usize, k: usize) -> &BigUint {
        &self.alpha[h][k]
    }

    pub fn beta(&self, h: usize, p: usize) -> &BigUint {
        &self.beta[h][p]
    }

    pub fn alpha_row(&self, h: usize) -> &[BigUint] {
        &self.alpha[h]
    }

    pub fn beta_row(&self, h: usize) -> &[BigUint] {
        &self.beta[h]
    }

    pub fn beta_f64(&self, h: usize, p: usize) -> f64 {
        self.beta[h][p].to_f64().unwrap_or(f64::INFINITY)
    }
}

/// `C(r, h)` for `h = 0..=h_max`, by `C(r,h) = C(r,h-1) (r-h+1) / h`.
///
/// For a non-negative integer `r` every entry past `h = r` is exactly zero.
pub fn gen_binomials(r: f64, h_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(h_max + 1);
    let mut c = 1.0;
    out.push(c);
    for h in 1..=h_max {
        c = c * (r - h as f64 + 1.0) / h as f64;
        out.push(c);
    }
    out
}

/// Exact integer binomial `C(n, k)`.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_values() {
        let t = CoeffTable::new(6).unwrap();
        assert_eq!(t.alpha(4, 1), &BigUint::from(3u32));
        assert_eq!(t.beta(3, 0), &BigUint::from(1u32));
        assert_eq!(t.beta(3, 1), &BigUint::from(1u32));
        for h in 0..=6 {
            assert_eq!(t.alpha(h, 0), &BigUint::one());
        }
    }

    /// Counts `+-1` paths of length `h` that stay non-negative and end at `h - 2k`.
    fn ballot_by_enumeration(h: usize, k: usize) -> u64 {
        let mut count = 0;
        for word in 0u64..(1 << h) {
            let mut height = 0i64;
            let mut ok = true;
            for i in 0..h {
                height += if word >> i & 1 == 1 { 1 } else { -1 };
                ok &= height >= 0;
            }
            if ok && height == (h as i64 - 2 * k as i64) {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn alpha_counts_ballot_paths() {
        let t = CoeffTable::new(12).unwrap();
        for h in 2..=12 {
            for k in 0..=h / 2 {
                assert_eq!(t.alpha(h, k), &BigUint::from(ballot_by_enumeration(h, k)), "h={h} k={k}");
            }
        }
    }

    #[test]
    fn alpha_is_binomial_difference_and_beta_telescopes() {
        let t = CoeffTable::new(60).unwrap();
        for h in 2..=60usize {
            for k in 1..=h / 2 {
                assert_eq!(t.alpha(h, k) + binomial(h, k - 1), binomial(h, k));
            }
            for p in 0..=h - 2 {
                assert_eq!(t.beta(h, p), &binomial(h, (h - 2 - p) / 2));
                assert!(t.beta(h, p) > &BigUint::zero());
            }
        }
    }

    #[test]
    fn rejects_tiny_table() {
        assert!(CoeffTable::new(1).is_err());
    }

    #[test]
    fn integer_binomials_terminate() {
        let c = gen_binomials(3.0, 8);
        assert_eq!(&c[..4], &[1.0, 3.0, 3.0, 1.0]);
        assert!(c[4..].iter().all(|&x| x == 0.0));
    }

    proptest! {
        #[test]
        fn pascal_recursion(h in 1usize..40) {
            let t = CoeffTable::new(41).unwrap();
            for k in 1..=h.div_ceil(2) {
                let same = t.alpha_row(h).get(k).cloned().unwrap_or_default();
                prop_assert_eq!(t.alpha(h + 1, k), &(same + t.alpha(h, k - 1)));
            }
        }

        #[test]
        fn generalized_binomials_sum_to_power(r in -0.9f64..3.0, x in -0.5f64..0.5) {
            let c = gen_binomials(r, 200);
            let mut series = 0.0;
            for h in (0..=200).rev() {
                series = series * x + c[h];
            }
            prop_assert!((series - (1.0 + x).powf(r)).abs() < 1e-13);
        }
    }
}
