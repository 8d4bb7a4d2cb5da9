use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Concave, nondecreasing map from the number of qualifying agents to the
/// number employed, with `C(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CorrectionFunction {
    /// `n ↦ min(n, cap)`.
    Cap { cap: u32 },
    /// Linear interpolation through `(0, 0)` and the given `(n, value)`
    /// points, constant after the last one.
    Piecewise { breakpoints: Vec<(u32, f64)> },
}

impl CorrectionFunction {
    pub fn cap(cap: u32) -> Self {
        CorrectionFunction::Cap { cap }
    }

    pub fn validate(&self) -> Result<()> {
        let CorrectionFunction::Piecewise { breakpoints } = self else {
            return Ok(());
        };
        let mut prev = (0u32, 0.0f64);
        let mut prev_slope = f64::INFINITY;
        for &(x, y) in breakpoints {
            if x <= prev.0 {
                return Err(Error::InvalidCorrection(format!(
                    "breakpoints must have strictly increasing positive n, got {x} after {}",
                    prev.0
                )));
            }
            if !y.is_finite() {
                return Err(Error::InvalidCorrection(format!("value {y} at n = {x}")));
            }
            let slope = (y - prev.1) / f64::from(x - prev.0);
            if slope < 0.0 {
                return Err(Error::InvalidCorrection(format!(
                    "decreasing between n = {} and n = {x}",
                    prev.0
                )));
            }
            if slope > prev_slope + 1e-12 {
                return Err(Error::InvalidCorrection(format!(
                    "not concave at n = {}",
                    prev.0
                )));
            }
            prev = (x, y);
            prev_slope = slope;
        }
        Ok(())
    }

    pub fn eval(&self, n: u32) -> f64 {
        match self {
            CorrectionFunction::Cap { cap } => f64::from(n.min(*cap)),
            CorrectionFunction::Piecewise { breakpoints } => {
                let mut prev = (0u32, 0.0f64);
                for &(x, y) in breakpoints {
                    if n <= x {
                        let t = f64::from(n - prev.0) / f64::from(x - prev.0);
                        return prev.1 + t * (y - prev.1);
                    }
                    prev = (x, y);
                }
                prev.1
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cap_clips() {
        let c = CorrectionFunction::cap(2);
        assert_eq!(c.eval(0), 0.0);
        assert_eq!(c.eval(1), 1.0);
        assert_eq!(c.eval(5), 2.0);
    }

    #[test]
    fn piecewise_interpolates_and_flattens() {
        let c = CorrectionFunction::Piecewise {
            breakpoints: vec![(2, 1.6), (4, 2.0)],
        };
        c.validate().unwrap();
        assert_eq!(c.eval(0), 0.0);
        assert!((c.eval(1) - 0.8).abs() < 1e-12);
        assert!((c.eval(3) - 1.8).abs() < 1e-12);
        assert_eq!(c.eval(10), 2.0);
    }

    #[test]
    fn convex_or_decreasing_breakpoints_are_rejected() {
        let convex = CorrectionFunction::Piecewise {
            breakpoints: vec![(1, 0.5), (2, 2.0)],
        };
        assert!(convex.validate().is_err());
        let decreasing = CorrectionFunction::Piecewise {
            breakpoints: vec![(1, 1.0), (2, 0.5)],
        };
        assert!(decreasing.validate().is_err());
        let unordered = CorrectionFunction::Piecewise {
            breakpoints: vec![(2, 1.0), (2, 1.5)],
        };
        assert!(unordered.validate().is_err());
    }

    #[test]
    fn serde_uses_kind_tag() {
        let c: CorrectionFunction = serde_json::from_str(r#"{"kind":"cap","cap":3}"#).unwrap();
        assert_eq!(c, CorrectionFunction::cap(3));
        let p: CorrectionFunction =
            serde_json::from_str(r#"{"kind":"piecewise","breakpoints":[[1,1.0],[3,2.0]]}"#)
                .unwrap();
        assert_eq!(p.eval(3), 2.0);
    }
}
