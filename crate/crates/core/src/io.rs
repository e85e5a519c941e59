//! CSV and JSON output. Every float is written with 17 significant digits so
//! that it parses back to the same `f64`.
//!
//! Column schemas:
//!
//! | file     | columns                                 |
//! |----------|-----------------------------------------|
//! | samples  | `re,im,time,steps,censored`             |
//! | ecdf     | `x,ecdf`                                |
//! | survival | `t,survivors,n_total`                   |
//! | field    | `x,y,value`                             |

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::sampler::{ExitSample, SurvivalCurve};

/// `v` with 17 significant digits; `nan`, `inf`, `-inf` for non-finite.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

pub fn write_samples_csv<W: Write>(mut w: W, samples: &[ExitSample]) -> io::Result<()> {
    writeln!(w, "re,im,time,steps,censored")?;
    for s in samples {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_f64(s.position.x),
            fmt_f64(s.position.y),
            fmt_f64(s.time),
            s.steps,
            u8::from(s.censored)
        )?;
    }
    Ok(())
}

pub fn write_ecdf_csv<W: Write>(mut w: W, points: &[(f64, f64)]) -> io::Result<()> {
    writeln!(w, "x,ecdf")?;
    for &(x, f) in points {
        writeln!(w, "{},{}", fmt_f64(x), fmt_f64(f))?;
    }
    Ok(())
}

pub fn write_survival_csv<W: Write>(mut w: W, curve: &SurvivalCurve) -> io::Result<()> {
    writeln!(w, "t,survivors,n_total")?;
    for (t, s) in curve.times.iter().zip(&curve.survivors) {
        writeln!(w, "{},{},{}", fmt_f64(*t), s, curve.n_total)?;
    }
    Ok(())
}

pub fn write_field_csv<W: Write>(
    mut w: W,
    points: impl IntoIterator<Item = (Point, f64)>,
) -> io::Result<()> {
    writeln!(w, "x,y,value")?;
    for (p, v) in points {
        writeln!(w, "{},{},{}", fmt_f64(p.x), fmt_f64(p.y), fmt_f64(v))?;
    }
    Ok(())
}

/// Indented JSON whose floats carry 17 significant digits.
struct ExactFloats<'a>(PrettyFormatter<'a>);

impl Formatter for ExactFloats<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format!("{value:.16e}").as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFloats(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json_string(value)?)?;
    Ok(())
}

/// Creates `path` and hands a buffered writer to `body`.
pub fn write_file(path: &Path, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

/// Numeric CSV table: header and rows. `nan`/`inf` cells parse to the
/// matching floats.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

pub fn read_table(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or(Error::EmptyInput)?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let rows = lines
        .enumerate()
        .map(|(k, line)| {
            let row: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Precondition(format!("{}: bad number on row {}", path.display(), k + 2)))?;
            if row.len() != header.len() {
                return Err(Error::Precondition(format!(
                    "{}: row {} has {} cells, header has {}",
                    path.display(),
                    k + 2,
                    row.len(),
                    header.len()
                )));
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(Table { header, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [std::f64::consts::PI, 1e-300, -2.5, 0.1 + 0.2, 1.0 / 3.0] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(f64::NAN), "nan");
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn json_uses_full_precision() {
        let s = to_json_string(&serde_json::json!({ "a": 0.1, "b": [1.0, 2], "c": null })).unwrap();
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["a"].as_f64(), Some(0.1));
        assert_eq!(v["b"][1], 2);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let s = ExitSample {
            position: Point::new(0.1, -0.7),
            time: f64::NAN,
            steps: 12,
            censored: true,
        };
        write_file(&path, |w| write_samples_csv(w, &[s, s])).unwrap();
        let t = read_table(&path).unwrap();
        assert_eq!(t.header, ["re", "im", "time", "steps", "censored"]);
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.column("re").unwrap(), vec![0.1, 0.1]);
        assert!(t.column("time").unwrap()[0].is_nan());
        assert_eq!(t.column("censored").unwrap()[1], 1.0);
        assert!(t.column("missing").is_none());
    }
}
