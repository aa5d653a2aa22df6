//! Flat row-major serialization of field tables.
//!
//! CSV: a header line `q,m,kind` (kind is `real` or `complex`) followed by
//! one value per line (`re,im` for complex tables).
//!
//! Binary (little endian): `u32 q`, `u32 m`, `u8 kind` (0 real, 1 complex),
//! then `q^m` `f64` values (interleaved `re, im` for complex).

use std::fmt::Write as _;

use num_complex::Complex64;

use super::function::{ComplexFunction, FieldFunction};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Table {
    Real(FieldFunction),
    Complex(ComplexFunction),
}

impl Table {
    fn header(&self) -> (usize, usize, &'static str) {
        match self {
            Table::Real(f) => (f.q(), f.m(), "real"),
            Table::Complex(f) => (f.q(), f.m(), "complex"),
        }
    }

    pub fn to_csv(&self) -> String {
        let (q, m, kind) = self.header();
        let mut out = format!("{q},{m},{kind}\n");
        match self {
            Table::Real(f) => f.values().iter().for_each(|v| writeln!(out, "{v}").unwrap()),
            Table::Complex(f) => {
                f.values().iter().for_each(|z| writeln!(out, "{},{}", z.re, z.im).unwrap())
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty table".into()))?;
        let fields: Vec<&str> = header.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!("header needs 3 fields, got `{header}`")));
        }
        let q: usize = fields[0].parse().map_err(|_| Error::Parse(format!("bad q `{}`", fields[0])))?;
        let m: usize = fields[1].parse().map_err(|_| Error::Parse(format!("bad m `{}`", fields[1])))?;
        let num = |s: &str, line: usize| {
            s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("line {line}: bad number `{s}`")))
        };
        match fields[2] {
            "real" => {
                let values = lines.enumerate().map(|(i, l)| num(l, i + 2)).collect::<Result<Vec<_>>>()?;
                Ok(Table::Real(FieldFunction::from_values(q, m, values)?))
            }
            "complex" => {
                let values = lines
                    .enumerate()
                    .map(|(i, l)| {
                        let (re, im) = l
                            .split_once(',')
                            .ok_or_else(|| Error::Parse(format!("line {}: expected re,im", i + 2)))?;
                        Ok(Complex64::new(num(re, i + 2)?, num(im, i + 2)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Table::Complex(ComplexFunction::from_values(q, m, values)?))
            }
            other => Err(Error::Parse(format!("unknown kind `{other}`"))),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let (q, m, _) = self.header();
        let mut out = Vec::new();
        out.extend_from_slice(&(q as u32).to_le_bytes());
        out.extend_from_slice(&(m as u32).to_le_bytes());
        match self {
            Table::Real(f) => {
                out.push(0);
                f.values().iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes()));
            }
            Table::Complex(f) => {
                out.push(1);
                for z in f.values() {
                    out.extend_from_slice(&z.re.to_le_bytes());
                    out.extend_from_slice(&z.im.to_le_bytes());
                }
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 9 {
            return Err(Error::Parse("truncated header".into()));
        }
        let q = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
        let m = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let body = &bytes[9..];
        if !body.len().is_multiple_of(8) {
            return Err(Error::Parse("body is not a whole number of f64 values".into()));
        }
        let floats: Vec<f64> =
            body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        match bytes[8] {
            0 => Ok(Table::Real(FieldFunction::from_values(q, m, floats)?)),
            1 => {
                let values = floats.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
                Ok(Table::Complex(ComplexFunction::from_values(q, m, values)?))
            }
            k => Err(Error::Parse(format!("unknown kind byte {k}"))),
        }
    }
}
