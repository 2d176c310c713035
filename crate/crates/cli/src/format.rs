//! Locale-independent number formatting and CSV assembly.

/// `x` rounded to `digits` significant digits in plain decimal notation
/// (scientific below `1e-4`).
pub fn sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "NaN".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    if x.abs() < 1e-4 {
        return format!("{:.*e}", digits - 1, x);
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding can carry into a new leading digit (9.999996 -> 10.00000)
    let reparsed: f64 = s.parse().expect("formatted float");
    if reparsed.abs() >= 10f64.powi(magnitude as i32 + 1) && decimals > 0 {
        format!("{x:.prec$}", prec = decimals - 1)
    } else {
        s
    }
}

/// Six significant digits, the CSV convention.
pub fn num(x: f64) -> String {
    sig(x, 6)
}

#[derive(Debug, Default)]
pub struct Csv {
    out: String,
}

impl Csv {
    pub fn with_header(columns: &[&str]) -> Self {
        let mut csv = Csv::default();
        csv.row(columns.iter().map(|c| c.to_string()));
        csv
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) {
        let fields: Vec<String> = fields.into_iter().collect();
        self.out.push_str(&fields.join(","));
        self.out.push('\n');
    }

    pub fn finish(self) -> String {
        self.out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(num(5.833_123_4), "5.83312");
        assert_eq!(num(529.12), "529.120");
        assert_eq!(num(5_110.234_56), "5110.23");
        assert_eq!(num(-0.111_111_1), "-0.111111");
        assert_eq!(num(0.0), "0");
        assert_eq!(num(9.999_999_9), "10.0000");
        assert_eq!(num(1234567.0), "1234567");
        assert_eq!(num(2.5e-7), "2.50000e-7");
        assert_eq!(num(f64::NAN), "NaN");
    }

    #[test]
    fn csv_rows() {
        let mut c = Csv::with_header(&["a", "b"]);
        c.row(["1".to_string(), num(0.5)]);
        assert_eq!(c.finish(), "a,b\n1,0.500000\n");
    }
}
