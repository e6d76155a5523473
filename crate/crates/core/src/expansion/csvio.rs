//! Grid-sample CSV files.
//!
//! ```text
//! # qorient-grid domain=S2 band_limit=8
//! theta,phi,weight,value
//! 0.3,0.0,0.12,1.5
//! ```
//!
//! The comment line is optional. Without it the domain is inferred from the
//! angle columns and the band-limit from the standard grid with the same
//! nodes, if there is one.

use std::io::{Read, Write};

use super::grid::{build_grid, Domain, QuadratureGrid};
use crate::error::{Error, Result};

/// Samples of one or more scalar functions on a quadrature grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSamples {
    pub grid: QuadratureGrid,
    pub columns: Vec<String>,
    /// `values[c][k]`: column `c` at node `k`.
    pub values: Vec<Vec<f64>>,
}

impl GridSamples {
    pub fn new(grid: QuadratureGrid, column: &str, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), found: values.len() });
        }
        Ok(Self { grid, columns: vec![column.to_string()], values: vec![values] })
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().position(|c| c == name).map(|i| self.values[i].as_slice())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# qorient-grid domain={} band_limit={}", self.grid.domain(), self.grid.band_limit())?;
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = self.grid.domain().angle_names().to_vec();
        header.push("weight");
        header.extend(self.columns.iter().map(String::as_str));
        w.write_record(&header)?;
        let arity = self.grid.domain().arity();
        for k in 0..self.grid.len() {
            let mut rec: Vec<String> = self.grid.nodes()[k][..arity].iter().map(|x| format!("{x:e}")).collect();
            rec.push(format!("{:e}", self.grid.weights()[k]));
            rec.extend(self.values.iter().map(|col| format!("{:e}", col[k])));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Parse a grid-sample CSV. `band_limit` is used when the file carries
    /// no header comment.
    pub fn read_csv<R: Read>(mut input: R, band_limit: Option<usize>) -> Result<Self> {
        let mut text = String::new();
        input.read_to_string(&mut text)?;
        let (mut declared_domain, mut declared_limit) = (None, band_limit);
        let mut body = text.as_str();
        while let Some(rest) = body.strip_prefix('#') {
            let (line, tail) = rest.split_once('\n').unwrap_or((rest, ""));
            for kv in line.split_whitespace() {
                match kv.split_once('=') {
                    Some(("domain", v)) => declared_domain = Some(v.parse::<Domain>()?),
                    Some(("band_limit", v)) => {
                        declared_limit =
                            Some(v.parse().map_err(|_| Error::Parse(format!("bad band_limit {v:?}")))?)
                    }
                    _ => {}
                }
            }
            body = tail;
        }

        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(body.as_bytes());
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let domain = match declared_domain {
            Some(d) => d,
            None => infer_domain(&header)?,
        };
        let names = domain.angle_names();
        if header.len() < names.len() + 2
            || header[..names.len()].iter().zip(names).any(|(h, n)| h != n)
            || header[names.len()] != "weight"
        {
            return Err(Error::Parse(format!(
                "{domain} grid CSV needs columns {},weight,<values…>; got {}",
                names.join(","),
                header.join(",")
            )));
        }
        let arity = names.len();
        let ncols = header.len() - arity - 1;
        let (mut nodes, mut weights, mut values) = (Vec::new(), Vec::new(), vec![Vec::new(); ncols]);
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let nums: Vec<f64> = rec
                .iter()
                .map(|s| s.parse::<f64>().map_err(|_| Error::Parse(format!("row {}: not a number: {s:?}", line + 1))))
                .collect::<Result<_>>()?;
            if nums.len() != header.len() {
                return Err(Error::Parse(format!("row {}: expected {} fields", line + 1, header.len())));
            }
            let mut node = [0.0; 3];
            node[..arity].copy_from_slice(&nums[..arity]);
            nodes.push(node);
            weights.push(nums[arity]);
            for (c, v) in values.iter_mut().zip(&nums[arity + 1..]) {
                c.push(*v);
            }
        }
        let limit = match declared_limit {
            Some(l) => l,
            None => infer_band_limit(domain, &nodes, &weights).ok_or_else(|| {
                Error::Parse("grid CSV has no band_limit and does not match a standard grid".into())
            })?,
        };
        let grid = QuadratureGrid::from_parts(domain, nodes, weights, limit)?;
        Ok(Self { grid, columns: header[arity + 1..].to_vec(), values })
    }
}

fn infer_domain(header: &[String]) -> Result<Domain> {
    [Domain::SO3, Domain::S2, Domain::S1]
        .into_iter()
        .find(|d| d.angle_names().iter().zip(header).all(|(n, h)| n == h) && header.len() > d.arity())
        .ok_or_else(|| Error::Parse(format!("cannot infer domain from columns {}", header.join(","))))
}

fn infer_band_limit(domain: Domain, nodes: &[[f64; 3]], weights: &[f64]) -> Option<usize> {
    (0..=256).find(|&l| {
        let g = build_grid(domain, l).expect("standard grid");
        g.len() == nodes.len()
            && g.nodes().iter().zip(nodes).all(|(a, b)| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-9))
            && g.weights().iter().zip(weights).all(|(a, b)| (a - b).abs() < 1e-9 * a.abs().max(1.0))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_with_header() {
        let g = build_grid(Domain::S2, 6).unwrap();
        let vals: Vec<f64> = (0..g.len()).map(|k| (k as f64).sin()).collect();
        let s = GridSamples::new(g, "value", vals).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let back = GridSamples::read_csv(buf.as_slice(), None).unwrap();
        assert_eq!(back.grid.band_limit(), 6);
        assert_eq!(back.columns, vec!["value"]);
        for (a, b) in back.values[0].iter().zip(&s.values[0]) {
            assert!((a - b).abs() <= 1e-15 * b.abs().max(1.0));
        }
    }

    #[test]
    fn band_limit_inferred_without_comment() {
        let g = build_grid(Domain::SO3, 3).unwrap();
        let s = GridSamples::new(g, "f", vec![1.0; 4 * 2 * 4]).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let stripped = text.split_once('\n').unwrap().1;
        let back = GridSamples::read_csv(stripped.as_bytes(), None).unwrap();
        assert_eq!(back.grid.domain(), Domain::SO3);
        assert_eq!(back.grid.band_limit(), 3);
    }

    #[test]
    fn malformed_rejected() {
        let bad = "theta,phi,weight,value\n0.1,0.2,abc,1\n";
        assert!(matches!(GridSamples::read_csv(bad.as_bytes(), Some(0)), Err(Error::Parse(_))));
        let wrong = "x,y\n1,2\n";
        assert!(GridSamples::read_csv(wrong.as_bytes(), Some(0)).is_err());
    }
}
