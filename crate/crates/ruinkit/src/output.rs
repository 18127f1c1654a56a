//! Locale-independent numeric formatting.
//!
//! Every number the binary prints goes through [`fmt10`]: ten significant
//! digits, `.` as the decimal separator, ties rounded to even. Identical
//! inputs therefore produce byte-identical files on any machine.

/// Formats `x` with ten significant digits.
///
/// Values in `[1e-4, 1e10)` use plain decimal notation; everything else uses
/// scientific notation with nine fractional digits. Rust's formatter rounds
/// the exact binary value half-to-even, which is what we want, so no
/// correction pass is needed.
pub fn fmt10(x: f64) -> String {
    if x == 0.0 {
        return "0.000000000".to_owned();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let mag = x.abs();
    if (1e-4..1e10).contains(&mag) {
        let prec = (9 - mag.log10().floor() as i64).max(0) as usize;
        format!("{x:.prec$}")
    } else {
        format!("{x:.9e}")
    }
}

/// One CSV line from already-formatted cells.
pub fn csv_line(cells: &[String]) -> String {
    cells.join(",")
}

/// One CSV line of numbers, each through [`fmt10`].
pub fn csv_numbers(values: &[f64]) -> String {
    let cells: Vec<String> = values.iter().map(|&v| fmt10(v)).collect();
    csv_line(&cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_significant_digits_across_magnitudes() {
        assert_eq!(fmt10(3.414213562373095), "3.414213562");
        assert_eq!(fmt10(-200.0), "-200.0000000");
        assert_eq!(fmt10(0.0938035568116204), "0.09380355681");
        assert_eq!(fmt10(14.64466094067262), "14.64466094");
        assert_eq!(fmt10(1e-4), "0.0001000000000");
        assert_eq!(fmt10(250.0), "250.0000000");
    }

    #[test]
    fn zero_and_extremes() {
        assert_eq!(fmt10(0.0), "0.000000000");
        assert_eq!(fmt10(-0.0), "0.000000000");
        assert_eq!(fmt10(9.5e-5), "9.500000000e-5");
        assert_eq!(fmt10(1.2345678912345e13), "1.234567891e13");
        assert_eq!(fmt10(-3.2e-12), "-3.200000000e-12");
    }

    #[test]
    fn ties_round_to_even() {
        // 2500000000.5 is exactly representable, so the formatter sees a true
        // tie and resolves it downward to the even neighbor.
        assert_eq!(fmt10(2500000000.5), "2500000000");
        assert_eq!(fmt10(2500000001.5), "2500000002");
    }

    #[test]
    fn csv_rows_are_plain_joins() {
        assert_eq!(csv_numbers(&[0.5, -1.0]), "0.5000000000,-1.000000000");
    }
}
