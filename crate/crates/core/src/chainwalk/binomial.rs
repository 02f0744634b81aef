use crate::error::{Error, Result};

/// Sum of the `k` largest binomial coefficients `C(t, i)`; `2^t` once `k > t`.
pub fn f_largest_binomials(k: u32, t: u32) -> Result<u128> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    if t > 126 {
        return Err(Error::InvalidParameter(format!("t = {t} overflows 128 bits")));
    }
    let mut row: Vec<u128> = vec![1];
    for _ in 0..t {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(1);
        next.extend(row.windows(2).map(|p| p[0] + p[1]));
        next.push(1);
        row = next;
    }
    row.sort_unstable_by(|a, b| b.cmp(a));
    Ok(row.iter().take(k as usize).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(f_largest_binomials(1, 4).unwrap(), 6);
        assert_eq!(f_largest_binomials(2, 2).unwrap(), 3);
        assert_eq!(f_largest_binomials(3, 3).unwrap(), 7);
        assert_eq!(f_largest_binomials(5, 4).unwrap(), 16);
        assert_eq!(f_largest_binomials(9, 4).unwrap(), 16);
        assert_eq!(f_largest_binomials(2, 10).unwrap(), 252 + 210);
        assert!(f_largest_binomials(0, 3).is_err());
        assert_eq!(f_largest_binomials(127, 126).unwrap(), 1u128 << 126);
        assert!(f_largest_binomials(1, 127).is_err());
    }
}
