//! CSV and JSON emission. Both are byte-stable for identical curves.

use std::collections::BTreeMap;
use std::fmt::Write;

use osc_povm::analysis::Curve;
use osc_povm::RegimeFlag;
use serde::Serialize;

/// 17 significant digits, enough to round-trip any f64.
pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn column(label: &str, unit: &str) -> String {
    if unit.is_empty() {
        label.to_string()
    } else {
        format!("{label} [{unit}]")
    }
}

/// Comment lines with flags and scalars, a header row, then one row per x.
/// All curves must share the x grid of the first.
pub fn to_csv(curves: &[Curve]) -> String {
    let mut out = String::new();
    let Some(first) = curves.first() else { return out };
    debug_assert!(curves.iter().all(|c| c.x == first.x));
    for c in curves {
        for f in &c.meta.flags {
            writeln!(out, "# {} flag: {f}", c.meta.model).unwrap();
        }
        for (k, v) in &c.meta.scalars {
            writeln!(out, "# {} {k} = {}", c.meta.model, float(*v)).unwrap();
        }
    }
    let mut header = vec![field(&column(&first.meta.x_label, &first.meta.x_unit))];
    header.extend(curves.iter().map(|c| field(&format!("{}:{}", c.meta.model, column(&c.meta.y_label, &c.meta.y_unit)))));
    writeln!(out, "{}", header.join(",")).unwrap();
    for (i, x) in first.x.iter().enumerate() {
        let mut row = vec![float(*x)];
        row.extend(curves.iter().map(|c| float(c.y[i])));
        writeln!(out, "{}", row.join(",")).unwrap();
    }
    out
}

#[derive(Serialize)]
struct Meta<'a> {
    x_label: &'a str,
    x_unit: &'a str,
    y_label: &'a str,
    y_unit: &'a str,
    model: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    normalization: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    scalars: &'a BTreeMap<String, f64>,
}

#[derive(Serialize)]
struct Doc<'a> {
    meta: Meta<'a>,
    x: &'a [f64],
    y: &'a [f64],
    flags: &'a [RegimeFlag],
}

/// A JSON array with one {meta, x, y, flags} object per curve.
pub fn to_json(curves: &[Curve]) -> String {
    let docs: Vec<Doc> = curves
        .iter()
        .map(|c| Doc {
            meta: Meta {
                x_label: &c.meta.x_label,
                x_unit: &c.meta.x_unit,
                y_label: &c.meta.y_label,
                y_unit: &c.meta.y_unit,
                model: &c.meta.model,
                normalization: c.meta.normalization,
                scalars: &c.meta.scalars,
            },
            x: &c.x,
            y: &c.y,
            flags: &c.meta.flags,
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&docs).expect("curves serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use osc_povm::analysis::CurveMeta;

    fn curve(model: &str, y: Vec<f64>) -> Curve {
        let mut meta = CurveMeta::new("L", "eV^-1", "P", "", model);
        meta.flags.push(RegimeFlag::Dispersion { parameter: 0.5 });
        meta.scalars.insert("k".into(), 0.1);
        Curve::new(vec![1.0, 2.0], y, meta).unwrap()
    }

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            assert_eq!(s.split('e').next().unwrap().trim_start_matches('-').len(), 18);
        }
    }

    #[test]
    fn csv_layout() {
        let csv = to_csv(&[curve("a", vec![0.5, 0.25]), curve("b,c", vec![1.0, 2.0])]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# a flag: dispersion: mu*t/sigma^2 = 5.000e-1");
        assert_eq!(lines[1], "# a k = 1.0000000000000001e-1");
        assert_eq!(lines[4], "L [eV^-1],a:P,\"b,c:P\"");
        assert_eq!(lines[5], "1.0000000000000000e0,5.0000000000000000e-1,1.0000000000000000e0");
        assert_eq!(lines.len(), 7);
    }

    #[test]
    fn json_schema() {
        let v: serde_json::Value = serde_json::from_str(&to_json(&[curve("a", vec![0.5, 0.25])])).unwrap();
        let doc = &v[0];
        assert_eq!(doc["meta"]["model"], "a");
        assert_eq!(doc["meta"]["scalars"]["k"], 0.1);
        assert_eq!(doc["x"][1], 2.0);
        assert_eq!(doc["y"][1], 0.25);
        assert_eq!(doc["flags"][0]["kind"], "dispersion");
        let keys: Vec<&String> = doc.as_object().unwrap().keys().collect();
        assert_eq!(keys.len(), 4);
    }
}
