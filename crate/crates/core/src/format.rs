//! Fixed float formatting shared by every CSV writer.

/// C-style `%.12e`, e.g. `1.000000000000e+00`.
pub fn sci(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// Sentinel written where a value sits at the double-precision floor.
pub const FLOOR: &str = "floor";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf() {
        assert_eq!(sci(1.0), "1.000000000000e+00");
        assert_eq!(sci(-2.5e-7), "-2.500000000000e-07");
        assert_eq!(sci(6.02214076e123), "6.022140760000e+123");
        assert_eq!(sci(0.0), "0.000000000000e+00");
    }
}
