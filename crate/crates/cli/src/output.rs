//! Numeric formatting and table/CSV rendering.

use ordexp::mcrisk::RiskRow;
use ordexp::EstimateReport;

/// Format with a fixed number of significant digits (decimal notation in a
/// sane magnitude window, scientific outside it). Deterministic for equal
/// bit patterns, which the byte-identical-output contract relies on.
pub fn format_sig(x: f64, digits: usize) -> String {
    let digits = digits.clamp(1, 17);
    if x == 0.0 {
        return format!("{:.*}", digits - 1, 0.0);
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..9).contains(&mag) {
        let dec = (digits as i32 - 1 - mag).max(0) as usize;
        format!("{:.*}", dec, x)
    } else {
        format!("{:.*e}", digits - 1, x)
    }
}

/// Left-pad cells into aligned columns (first column left-justified).
pub fn render_table(header: &[String], rows: &[Vec<String>]) -> String {
    let ncol = header.len();
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    let mut emit = |cells: &[String]| {
        for (i, cell) in cells.iter().enumerate() {
            if i == 0 {
                out.push_str(&format!("{:<width$}", cell, width = widths[0]));
            } else {
                out.push_str(&format!("  {:>width$}", cell, width = widths[i]));
            }
        }
        while out.ends_with(' ') {
            out.pop();
        }
        out.push('\n');
    };
    emit(header);
    let _ = ncol;
    for row in rows {
        emit(row);
    }
    out
}

/// The documented simulation CSV: columns in fixed order.
pub fn risk_rows_to_csv(
    rows: &[RiskRow<f64>],
    p1: usize,
    p2: usize,
    mu1: f64,
    mu2: f64,
    k: f64,
    digits: usize,
) -> String {
    let mut out = String::from("eta,p1,p2,mu1,mu2,k,loss,estimator,risk,rri,mc_se,reps,seed\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            format_sig(r.eta, digits),
            p1,
            p2,
            format_sig(mu1, digits),
            format_sig(mu2, digits),
            format_sig(k, digits),
            r.loss,
            r.estimator,
            format_sig(r.risk, digits),
            format_sig(r.rri, digits),
            format_sig(r.mc_se, digits),
            r.reps,
            r.seed,
        ));
    }
    out
}

/// Estimate reports as CSV lines.
pub fn estimates_to_csv(reports: &[EstimateReport<f64>], digits: usize) -> String {
    let mut out = String::from("loss,estimator,multiplier,value,truncation_active\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.loss,
            r.estimator,
            format_sig(r.multiplier, digits),
            format_sig(r.value, digits),
            r.truncation_active,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_sig(6622.875, 6), "6622.88");
        assert_eq!(format_sig(0.0128586, 6), "0.0128586");
        assert_eq!(format_sig(0.05, 6), "0.0500000");
        assert_eq!(format_sig(90000.0, 6), "90000.0");
        assert_eq!(format_sig(1.0e-7, 6), "1.00000e-7");
        assert_eq!(format_sig(0.0, 3), "0.00");
        // The integer part is never truncated, even past the digit budget.
        assert_eq!(format_sig(-12345.678, 4), "-12346");
    }

    #[test]
    fn table_alignment() {
        let t = render_table(
            &["loss".into(), "d01".into()],
            &[vec!["squared".into(), "6622.88".into()]],
        );
        assert!(t.contains("squared"));
        assert!(t.lines().count() == 2);
    }
}
