//! Fixed float formatting for CSV artifacts.

/// Formats `x` with 6 significant digits and a `.` decimal separator.
///
/// Plain notation is used for decimal exponents in `-5..6`, scientific
/// notation otherwise. Trailing zeros are kept so column widths stay stable.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let exp: i32 = sci.rsplit_once('e').and_then(|(_, e)| e.parse().ok()).unwrap_or(0);
    if (-5..6).contains(&exp) {
        format!("{:.*}", (5 - exp) as usize, x)
    } else {
        sci
    }
}
