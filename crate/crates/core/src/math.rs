use num_bigint::BigUint;
use num_traits::One;

/// Binomial coefficient as a big integer.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::default();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for j in 0..k {
        acc *= n - j;
        acc /= j + 1;
    }
    acc
}

/// Binomial coefficient in machine integers; panics on overflow.
pub fn binomial_u64(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc * (n - j) as u128 / (j + 1) as u128;
    }
    u64::try_from(acc).expect("binomial overflow")
}

/// Row `m` of Pascal's triangle.
pub fn binomial_row(m: usize) -> Vec<BigUint> {
    (0..=m).map(|k| binomial(m, k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pascal() {
        assert_eq!(binomial_u64(5, 2), 10);
        assert_eq!(binomial_u64(4, 7), 0);
        assert_eq!(binomial(64, 32).to_string(), "1832624140942590534");
        for m in 1..20 {
            let row = binomial_row(m);
            let prev = binomial_row(m - 1);
            for k in 1..m {
                assert_eq!(row[k], &prev[k - 1] + &prev[k]);
            }
        }
    }
}
