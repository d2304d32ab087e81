//! Human-readable benchmark summary.

use std::fmt::Write;

use binned_income::eval::{AccuracyMetrics, ErrorMetricsReport};

/// `1234567.891` as `$1,234,567.89`.
pub fn cents(v: f64) -> String {
    let rounded = format!("{:.2}", v.abs());
    let (whole, frac) = rounded.split_once('.').expect("two decimals");
    let mut grouped = String::new();
    for (i, c) in whole.chars().enumerate() {
        if i > 0 && (whole.len() - i) % 3 == 0 {
            grouped.push(',');
        }
        grouped.push(c);
    }
    let sign = if v < 0.0 && rounded != "0.00" { "-" } else { "" };
    format!("{sign}${grouped}.{frac}")
}

fn metric_cells(m: Option<&AccuracyMetrics>) -> String {
    match m {
        Some(m) => format!(
            "{:>6} {:>9.3} {:>9.3} {:>12}",
            m.n,
            m.bias,
            m.rmse,
            m.reliability.map_or("n/a".to_string(), |r| format!("{:.2}", 100.0 * r))
        ),
        None => format!("{:>6} {:>9} {:>9} {:>12}", 0, "n/a", "n/a", "n/a"),
    }
}

pub fn render(report: &ErrorMetricsReport) -> String {
    let mean_scored = report.statistic == "mean";
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} tables, {} scored by every method; statistic {}; {} thread(s)",
        report.datasets, report.common_datasets, report.statistic, report.threads
    );
    for (title, common) in [("all scored tables", false), ("tables every method scored", true)] {
        let _ = writeln!(s, "\n{title}");
        let _ = write!(
            s,
            "{:<16} {:>6} {:>9} {:>9} {:>12} {:>9} {:>10}",
            "method", "n", "bias %", "RMSE %", "reliab. %", "failures", "runtime s"
        );
        if mean_scored {
            let _ = write!(s, " {:>16}", "avg estimate");
        }
        s.push('\n');
        for m in &report.methods {
            let metrics = if common { m.common.as_ref() } else { m.all.as_ref() };
            let _ = write!(
                s,
                "{:<16} {} {:>9} {:>10.3}",
                m.method,
                metric_cells(metrics),
                m.failures,
                m.runtime_seconds
            );
            if mean_scored {
                let scored: Vec<f64> = report
                    .rows
                    .iter()
                    .filter(|r| r.method == m.method && r.percent_error.is_some())
                    .filter_map(|r| r.estimate)
                    .collect();
                let avg = if scored.is_empty() {
                    "n/a".to_string()
                } else {
                    cents(scored.iter().sum::<f64>() / scored.len() as f64)
                };
                let _ = write!(s, " {avg:>16}");
            }
            s.push('\n');
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::cents;

    #[test]
    fn currency() {
        assert_eq!(cents(137_811.0), "$137,811.00");
        assert_eq!(cents(1_234_567.891), "$1,234,567.89");
        assert_eq!(cents(999.999), "$1,000.00");
        assert_eq!(cents(12.5), "$12.50");
        assert_eq!(cents(-0.001), "$0.00");
        assert_eq!(cents(-4321.0), "-$4,321.00");
    }
}
