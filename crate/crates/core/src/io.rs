//! Text formats: matrix literals, matrix JSON, and trace export.
//!
//! Entries are always row-major, `[c11, c12, c13, c21, …, c33]`. Numbers
//! are written in shortest round-trip form.

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geodesic::{geodesic_point, GeodesicParams, TracePoint};
use crate::lorentz::{boost, rotation, GroupElement};

/// Shortest decimal that parses back to `x`; `inf`, `-inf`, `NaN` otherwise.
pub fn format_number(x: f64) -> String {
    if x.is_finite() {
        ryu::Buffer::new().format_finite(x).to_owned()
    } else {
        x.to_string()
    }
}

fn parse_error(position: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        position,
        message: message.into(),
    }
}

/// Splits on whitespace and commas, keeping byte offsets.
fn tokens(s: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in s.char_indices() {
        let sep = ch.is_whitespace() || ch == ',';
        match (sep, start) {
            (true, Some(b)) => {
                out.push((b, &s[b..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(b) = start {
        out.push((b, &s[b..]));
    }
    out
}

fn number(tok: (usize, &str)) -> Result<f64> {
    let v: f64 = tok
        .1
        .parse()
        .map_err(|_| parse_error(tok.0, format!("'{}' is not a number", tok.1)))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(parse_error(tok.0, format!("'{}' is not finite", tok.1)))
    }
}

fn named_args(toks: &[(usize, &str)], want: usize, name: &str, end: usize) -> Result<Vec<f64>> {
    let args = &toks[1..];
    if args.len() != want {
        let pos = args.get(want).map_or(end, |t| t.0);
        return Err(parse_error(
            pos,
            format!("'{name}' takes {want} argument(s), found {}", args.len()),
        ));
    }
    args.iter().map(|&t| number(t)).collect()
}

/// Parses a matrix literal: `identity`, `rotation ω`, `boost t`,
/// `geodesic β φ t`, a JSON array of 9 numbers, or 9 numbers separated by
/// whitespace or commas. The result is validated at `tol`.
pub fn parse_matrix(s: &str, tol: f64) -> Result<GroupElement> {
    let trimmed = s.trim_start();
    let offset = s.len() - trimmed.len();
    if trimmed.starts_with('[') {
        let values: Vec<f64> = serde_json::from_str(trimmed).map_err(|e| {
            let col = e.column().saturating_sub(1);
            let pos = if e.line() <= 1 { offset + col } else { s.len() };
            parse_error(pos, e.to_string())
        })?;
        return from_entries(&values, s.len(), tol);
    }

    let toks = tokens(s);
    let Some(&(pos0, head)) = toks.first() else {
        return Err(parse_error(0, "empty matrix literal"));
    };
    match head.to_ascii_lowercase().as_str() {
        "identity" | "e" => {
            named_args(&toks, 0, "identity", s.len())?;
            Ok(GroupElement::identity())
        }
        "rotation" => Ok(rotation(named_args(&toks, 1, "rotation", s.len())?[0])),
        "boost" => Ok(boost(named_args(&toks, 1, "boost", s.len())?[0])),
        "geodesic" => {
            let a = named_args(&toks, 3, "geodesic", s.len())?;
            Ok(geodesic_point(&GeodesicParams::new(a[0], a[1], a[2])?))
        }
        _ if head.parse::<f64>().is_ok() => {
            if toks.len() != 9 {
                let pos = toks.get(9).map_or(s.len(), |t| t.0);
                return Err(parse_error(pos, format!("expected 9 numbers, found {}", toks.len())));
            }
            let values = toks.iter().map(|&t| number(t)).collect::<Result<Vec<_>>>()?;
            from_entries(&values, s.len(), tol)
        }
        _ => Err(parse_error(pos0, format!("unknown matrix constructor '{head}'"))),
    }
}

fn from_entries(values: &[f64], end: usize, tol: f64) -> Result<GroupElement> {
    let entries: [f64; 9] = values
        .try_into()
        .map_err(|_| parse_error(end, format!("expected 9 numbers, found {}", values.len())))?;
    GroupElement::from_row_major(&entries, tol)
}

/// `{"entries": [...9], "residuals": {...}}` with the validation report.
pub fn matrix_json(c: &GroupElement, tol: f64) -> Value {
    json!({
        "entries": c.to_row_major().to_vec(),
        "residuals": c.validate(tol),
    })
}

pub const TRACE_HEADER: [&str; 13] = [
    "t", "c11", "c12", "c13", "c21", "c22", "c23", "c31", "c32", "c33", "hx", "hy", "ht",
];

/// One trace row in [`TRACE_HEADER`] order; `(hx, hy, ht)` is the first
/// column `(c21, c31, c11)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub t: f64,
    pub c11: f64,
    pub c12: f64,
    pub c13: f64,
    pub c21: f64,
    pub c22: f64,
    pub c23: f64,
    pub c31: f64,
    pub c32: f64,
    pub c33: f64,
    pub hx: f64,
    pub hy: f64,
    pub ht: f64,
}

impl From<&TracePoint> for TraceRow {
    fn from(p: &TracePoint) -> Self {
        let e = p.element.to_row_major();
        TraceRow {
            t: p.t,
            c11: e[0],
            c12: e[1],
            c13: e[2],
            c21: e[3],
            c22: e[4],
            c23: e[5],
            c31: e[6],
            c32: e[7],
            c33: e[8],
            hx: p.base.x,
            hy: p.base.y,
            ht: p.base.t,
        }
    }
}

impl TraceRow {
    pub fn values(&self) -> [f64; 13] {
        [
            self.t, self.c11, self.c12, self.c13, self.c21, self.c22, self.c23, self.c31, self.c32, self.c33, self.hx,
            self.hy, self.ht,
        ]
    }
}

pub fn trace_csv(points: &[TracePoint]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRACE_HEADER).expect("in-memory write");
    for p in points {
        let row = TraceRow::from(p);
        w.write_record(row.values().iter().map(|v| format_number(*v)))
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

pub fn trace_json(points: &[TracePoint]) -> Value {
    Value::Array(
        points
            .iter()
            .map(|p| serde_json::to_value(TraceRow::from(p)).expect("plain struct"))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Execution;
    use crate::geodesic::geodesic_trace;
    use crate::lorentz::DEFAULT_TOL;

    #[test]
    fn shortest_round_trip_numbers() {
        assert_eq!(format_number(0.1), "0.1");
        assert_eq!(format_number(1.0), "1.0");
        assert_eq!(format_number(1e-20), "1e-20");
        for x in [std::f64::consts::PI, 1.0 / 3.0, -2.5e300, 5e-324] {
            assert_eq!(format_number(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn named_constructors() {
        assert_eq!(parse_matrix("identity", DEFAULT_TOL).unwrap(), GroupElement::identity());
        assert_eq!(parse_matrix("  boost 1", DEFAULT_TOL).unwrap(), boost(1.0));
        assert_eq!(parse_matrix("rotation 0.5", DEFAULT_TOL).unwrap(), rotation(0.5));
        let g = parse_matrix("geodesic 0.5 1.2 0.8", DEFAULT_TOL).unwrap();
        assert_eq!(g, geodesic_point(&GeodesicParams::new(0.5, 1.2, 0.8).unwrap()));
    }

    #[test]
    fn raw_forms_agree() {
        let c = boost(0.7) * rotation(1.1);
        let text: Vec<String> = c.to_row_major().iter().map(|v| format_number(*v)).collect();
        let ws = parse_matrix(&text.join(" "), DEFAULT_TOL).unwrap();
        let js = parse_matrix(&format!("[{}]", text.join(",")), DEFAULT_TOL).unwrap();
        assert_eq!(ws, c);
        assert_eq!(js, c);
    }

    #[test]
    fn malformed_literals_report_position() {
        match parse_matrix("1 0 0 0 1 0 0 0", DEFAULT_TOL) {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 15),
            other => panic!("{other:?}"),
        }
        match parse_matrix("1 0 0 0 x 0 0 0 1", DEFAULT_TOL) {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 8),
            other => panic!("{other:?}"),
        }
        match parse_matrix("[1, 0, 0]", DEFAULT_TOL) {
            Err(Error::Parse { .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_matrix("boost", DEFAULT_TOL) {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 5),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_matrix("spin 1", DEFAULT_TOL),
            Err(Error::Parse { position: 0, .. })
        ));
        assert!(matches!(
            parse_matrix("2 0 0 0 1 0 0 0 1", DEFAULT_TOL),
            Err(Error::Invalid(_))
        ));
    }

    #[test]
    fn matrix_json_has_residuals() {
        let v = matrix_json(&boost(1.0), DEFAULT_TOL);
        assert_eq!(v["entries"].as_array().unwrap().len(), 9);
        assert!(v["residuals"]["accepted"].as_bool().unwrap());
    }

    #[test]
    fn trace_csv_layout() {
        let p = GeodesicParams::new(0.0, 0.0, 1.0).unwrap();
        let trace = geodesic_trace(&p, 2, Execution::Sequential).unwrap();
        let csv = trace_csv(&trace);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,c11,c12,c13,c21,c22,c23,c31,c32,c33,hx,hy,ht");
        assert_eq!(lines.len(), 4);
        let last: Vec<f64> = lines[3].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(last[0], 1.0);
        assert_eq!(last[12], last[1]);
        assert_eq!(last[10], last[4]);
        let js = trace_json(&trace);
        assert_eq!(js.as_array().unwrap().len(), 3);
        assert_eq!(js[2]["ht"].as_f64().unwrap(), last[12]);
    }
}
