use crate::error::{Error, Result};

/// Largest row dimension the segmented backend accepts: `2^15 * 255^2 < 2^31`.
pub const MAX_INNER_DIM: usize = 1 << 15;

/// Split of the transform length into an `n1 x n2` matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NttPlan {
    pub n: usize,
    pub n1: usize,
    pub n2: usize,
}

impl NttPlan {
    /// `n1 <= n2`, `n1` as large as possible but at most `2^15`.
    pub fn new(n: usize) -> Result<Self> {
        if !n.is_power_of_two() || n < 4 {
            return Err(Error::Parameter(format!(
                "transform length {n} must be a power of two >= 4"
            )));
        }
        let log_n = n.trailing_zeros();
        let n1 = (1usize << (log_n / 2)).min(MAX_INNER_DIM);
        Ok(Self { n, n1, n2: n / n1 })
    }
}

pub fn build_ntt_plan(n: usize) -> Result<NttPlan> {
    NttPlan::new(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits() {
        let p = |n| {
            let p = NttPlan::new(n).unwrap();
            (p.n1, p.n2)
        };
        assert_eq!(p(1 << 16), (256, 256));
        assert_eq!(p(1 << 15), (128, 256));
        assert_eq!(p(4), (2, 2));
        assert_eq!(p(8), (2, 4));
        assert!(NttPlan::new(2).is_err());
        assert!(NttPlan::new(12).is_err());
    }
}
