use std::fmt::Write as _;
use std::io;
use std::path::Path;

use uniformizer::C64;

pub const CONVENTIONS: &str = "# conventions: lambda(z) = 1/(1-|z|^2); lambda-areas are integrals of lambda^2 d^2z (curvature -4); \
geodesic lengths are 2 arccosh(|tr|/2) (curvature -1); complex values are (re, im) column pairs";

/// Rows of text cells written as RFC-4180 CSV after a conventions line.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Shortest round-trip text, in exponent form outside [1e-4, 1e15).
    pub fn num(v: f64) -> String {
        let a = v.abs();
        if v == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
            format!("{v}")
        } else {
            format!("{v:e}")
        }
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        let mut buf = Vec::new();
        buf.extend_from_slice(CONVENTIONS.as_bytes());
        buf.extend_from_slice(b"\r\n");
        {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(&mut buf);
            w.write_record(&self.header)?;
            for r in &self.rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        std::fs::write(path, buf)
    }
}

/// Points as small circles in the disc, y axis pointing up.
pub fn svg_points(points: &[C64], radius: f64, colour: &str) -> String {
    let mut s = String::new();
    s.push_str(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"-1.05 -1.05 2.1 2.1\" width=\"800\" height=\"800\">\n\
         <circle cx=\"0\" cy=\"0\" r=\"1\" fill=\"none\" stroke=\"black\" stroke-width=\"0.004\"/>\n",
    );
    let _ = writeln!(s, "<g fill=\"{colour}\" stroke=\"none\">");
    for z in points {
        let _ = writeln!(s, "<circle cx=\"{:.6}\" cy=\"{:.6}\" r=\"{radius}\"/>", z.re, -z.im);
    }
    s.push_str("</g>\n</svg>\n");
    s
}
