//! Fixed float formatting shared by all text outputs.

/// Scientific notation with 17 significant digits; round-trips every `f64`.
pub fn sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}
