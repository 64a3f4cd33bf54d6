//! CSV and JSON rendering at a fixed 9 significant digits.

use std::fmt::Write;

use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::spectra::SpectralCurve;

pub const SIGNIFICANT_DIGITS: usize = 9;

/// Rounds to 9 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

fn sci(x: f64) -> String {
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
}

/// One row per grid point, one `<label>_psd_m2_per_hz` column per curve.
///
/// All curves must share the first curve's grid.
pub fn budget_csv(curves: &[SpectralCurve]) -> String {
    let mut out = String::from("frequency_hz");
    for c in curves {
        write!(out, ",{}_psd_m2_per_hz", c.label).unwrap();
    }
    out.push('\n');
    let Some(first) = curves.first() else {
        return out;
    };
    for (i, f) in first.frequencies.iter().enumerate() {
        out.push_str(&sci(*f));
        for c in curves {
            out.push(',');
            out.push_str(&sci(c.values[i]));
        }
        out.push('\n');
    }
    out
}

pub fn budget_json(curves: &[SpectralCurve]) -> String {
    let mut columns = Map::new();
    for c in curves {
        columns.insert(format!("{}_psd_m2_per_hz", c.label), serde_json::to_value(&c.values).unwrap());
    }
    let value = serde_json::json!({
        "frequency_hz": curves.first().map(|c| c.frequencies.clone()).unwrap_or_default(),
        "curves": columns,
    });
    render_json(&value)
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| Number::from_f64(round_sig(x)))
            .map(Value::Number)
            .unwrap_or(Value::Null),
        Value::Array(items) => Value::Array(items.into_iter().map(round_value).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

/// Pretty JSON with every float rounded to 9 significant digits.
pub fn render_json(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(&round_value(value.clone())).unwrap();
    text.push('\n');
    text
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    render_json(&serde_json::to_value(value).expect("report serializes"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::InterferometerConfig;
    use crate::spectra::{budget, CurveLabel, FrequencyGrid};

    #[test]
    fn rounding() {
        assert_eq!(round_sig(1.234_567_891_23e-38), 1.234_567_89e-38);
        assert_eq!(round_sig(0.0), 0.0);
        assert_eq!(round_sig(-2.000_000_000_4), -2.0);
    }

    #[test]
    fn csv_header_and_rows() {
        let grid = FrequencyGrid::from_points(vec![100.0, 200.0]).unwrap();
        let curves = budget(&InterferometerConfig::default(), &grid).unwrap();
        let csv = budget_csv(&curves);
        let mut lines = csv.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("frequency_hz,fmSQL_psd_m2_per_hz,hoSQL_psd_m2_per_hz,shot_psd_m2_per_hz"));
        assert_eq!(header.split(',').count(), 1 + CurveLabel::BUDGET.len());
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "1.00000000e2");
        assert_eq!(row[1], "1.06850465e-38");
        assert_eq!(lines.count(), 1);
    }

    #[test]
    fn json_numbers_are_rounded() {
        let v = serde_json::json!({"a": 0.123_456_789_123, "b": [1, 2.000_000_000_01], "c": null});
        let text = render_json(&v);
        assert!(text.contains("0.123456789"));
        assert!(!text.contains("0.123456789123"));
        assert!(text.contains("\"c\": null"));
    }
}
