//! Metric rows and their CSV / JSON serialization. Floats are always
//! written with 17 significant digits so reports round-trip exactly.

use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};

/// 17 significant digits in scientific notation; non-finite values are
/// spelled out.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// `f64` wrapper that serializes as a JSON number with 17 significant
/// digits (`null` when not finite).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sig17(pub f64);

impl Serialize for Sig17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let n: serde_json::Number = format_float(self.0).parse().map_err(serde::ser::Error::custom)?;
        n.serialize(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub t: usize,
    pub mechanism: String,
    pub metric: String,
    pub value: f64,
    pub stderr: Option<f64>,
    pub n_samples: Option<usize>,
}

impl MetricRow {
    pub fn exact(t: usize, mechanism: impl Into<String>, metric: impl Into<String>, value: f64) -> Self {
        MetricRow { t, mechanism: mechanism.into(), metric: metric.into(), value, stderr: None, n_samples: None }
    }

    pub fn estimated(
        t: usize,
        mechanism: impl Into<String>,
        metric: impl Into<String>,
        value: f64,
        stderr: f64,
        n_samples: usize,
    ) -> Self {
        MetricRow {
            t,
            mechanism: mechanism.into(),
            metric: metric.into(),
            value,
            stderr: Some(stderr),
            n_samples: Some(n_samples),
        }
    }
}

impl Serialize for MetricRow {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("MetricRow", 6)?;
        st.serialize_field("t", &self.t)?;
        st.serialize_field("mechanism", &self.mechanism)?;
        st.serialize_field("metric", &self.metric)?;
        st.serialize_field("value", &Sig17(self.value))?;
        st.serialize_field("stderr", &self.stderr.map(Sig17))?;
        st.serialize_field("n_samples", &self.n_samples)?;
        st.end()
    }
}

pub const CSV_HEADER: &str = "t,mechanism,metric,value,stderr,n_samples";

/// CSV with an optional `# provenance=<hash>` first line.
pub fn rows_to_csv(rows: &[MetricRow], provenance: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(p) = provenance {
        out.push_str(&format!("# provenance={p}\n"));
    }
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.t,
            r.mechanism,
            r.metric,
            format_float(r.value),
            r.stderr.map(format_float).unwrap_or_default(),
            r.n_samples.map(|n| n.to_string()).unwrap_or_default()
        ));
    }
    out
}

struct JsonReport<'a> {
    provenance: Option<&'a str>,
    rows: &'a [MetricRow],
}

impl Serialize for JsonReport<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(2))?;
        m.serialize_entry("provenance", &self.provenance)?;
        m.serialize_entry("rows", self.rows)?;
        m.end()
    }
}

pub fn rows_to_json(rows: &[MetricRow], provenance: Option<&str>) -> String {
    let mut s = serde_json::to_string_pretty(&JsonReport { provenance, rows }).expect("rows serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2.5e-300, 123456.789, 0.0] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_float(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn csv_and_json_layout() {
        let rows = vec![
            MetricRow::exact(0, "linkmirage", "ud_l1", 0.25),
            MetricRow::estimated(1, "static-baseline", "anti_inference", 0.5, 0.01, 100),
        ];
        let csv = rows_to_csv(&rows, Some("abc"));
        assert_eq!(
            csv,
            "# provenance=abc\nt,mechanism,metric,value,stderr,n_samples\n0,linkmirage,ud_l1,2.5000000000000000e-1,,\n1,static-baseline,anti_inference,5.0000000000000000e-1,1.0000000000000000e-2,100\n"
        );
        let json = rows_to_json(&rows, None);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["rows"][0]["value"].to_string(), "2.5000000000000000e-1");
        assert!(v["rows"][0]["stderr"].is_null());
    }
}
