//! Deterministic text formatting shared by the CSV and JSON emitters.

/// Twelve significant digits in scientific notation.
pub fn fmt12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    format!("{x:.11e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt12(std::f64::consts::PI), "3.14159265359e0");
        assert_eq!(fmt12(-1234.5), "-1.23450000000e3");
        assert_eq!(fmt12(0.0), "0");
    }
}
