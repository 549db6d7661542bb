//! Canonical text forms for floating-point output.

/// Seventeen significant digits in scientific notation; round-trips every
/// finite `f64`.
pub fn real(x: f64) -> String {
    if x == 0.0 {
        // avoid "-0"
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}
