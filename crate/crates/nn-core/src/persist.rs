//! Versioned plain-text model persistence.
//!
//! Layout per network:
//! ```text
//! densenet 1
//! layers <L>
//! layer <out> <in> <activation>
//! <out rows of weights, one line each>
//! <one line of biases>
//! ...
//! ```
//! Numbers are written with 17 significant digits, which round-trips f64
//! exactly.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::activation::Activation;
use crate::error::{NnError, Result};
use crate::net::{DenseNet, Layer};

pub const DENSENET_FORMAT_VERSION: u32 = 1;

/// Line-oriented cursor with position tracking for parse errors. Shared by the
/// operator-model envelope format, which embeds densenet blocks.
pub struct LineReader<'a> {
    iter: std::str::Lines<'a>,
    pub line: usize,
}

impl<'a> LineReader<'a> {
    pub fn new(text: &'a str) -> Self {
        Self { iter: text.lines(), line: 0 }
    }

    pub fn next_line(&mut self) -> Result<&'a str> {
        loop {
            let raw = self
                .iter
                .next()
                .ok_or_else(|| self.error("unexpected end of file"))?;
            self.line += 1;
            let trimmed = raw.trim();
            if !trimmed.is_empty() {
                return Ok(trimmed);
            }
        }
    }

    /// Read a line of the form `<tag> <fields...>`; returns the fields.
    pub fn tagged(&mut self, tag: &str) -> Result<Vec<&'a str>> {
        let line = self.next_line()?;
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some(t) if t == tag => Ok(parts.collect()),
            Some(other) => Err(self.error(&format!("expected '{tag}', found '{other}'"))),
            None => Err(self.error(&format!("expected '{tag}'"))),
        }
    }

    pub fn error(&self, message: &str) -> NnError {
        NnError::ParseError { line: self.line, message: message.into() }
    }

    pub fn parse_usize(&self, token: &str) -> Result<usize> {
        token.parse().map_err(|_| self.error(&format!("bad integer '{token}'")))
    }

    pub fn parse_f64(&self, token: &str) -> Result<f64> {
        token.parse().map_err(|_| self.error(&format!("bad number '{token}'")))
    }
}

pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_densenet(out: &mut String, net: &DenseNet) {
    let _ = writeln!(out, "densenet {DENSENET_FORMAT_VERSION}");
    let _ = writeln!(out, "layers {}", net.layers().len());
    for l in net.layers() {
        let (rows, cols) = l.weights().dim();
        let _ = writeln!(out, "layer {rows} {cols} {}", l.activation().tag());
        for r in 0..rows {
            let line: Vec<String> = (0..cols).map(|c| format_f64(l.weights()[[r, c]])).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        let line: Vec<String> = l.biases().iter().map(|&b| format_f64(b)).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
}

pub fn read_densenet(r: &mut LineReader) -> Result<DenseNet> {
    let fields = r.tagged("densenet")?;
    let version = fields.first().map(|t| r.parse_usize(t)).transpose()?.unwrap_or(0);
    if version != DENSENET_FORMAT_VERSION as usize {
        return Err(r.error(&format!("unsupported densenet format version {version}")));
    }
    let fields = r.tagged("layers")?;
    let n_layers =
        r.parse_usize(fields.first().ok_or_else(|| r.error("missing layer count"))?)?;
    if n_layers == 0 {
        return Err(r.error("network must have at least one layer"));
    }
    let mut layers = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        let fields = r.tagged("layer")?;
        if fields.len() != 3 {
            return Err(r.error("layer header needs '<out> <in> <activation>'"));
        }
        let rows = r.parse_usize(fields[0])?;
        let cols = r.parse_usize(fields[1])?;
        let act = Activation::from_tag(fields[2])
            .ok_or_else(|| r.error(&format!("unknown activation '{}'", fields[2])))?;
        let mut weights = Array2::zeros((rows, cols));
        for i in 0..rows {
            let line = r.next_line()?;
            let mut count = 0;
            for (j, tok) in line.split_whitespace().enumerate() {
                if j >= cols {
                    return Err(r.error("too many weights in row"));
                }
                weights[[i, j]] = r.parse_f64(tok)?;
                count += 1;
            }
            if count != cols {
                return Err(r.error(&format!("expected {cols} weights, found {count}")));
            }
        }
        let line = r.next_line()?;
        let bias_vals: Vec<f64> =
            line.split_whitespace().map(|t| r.parse_f64(t)).collect::<Result<_>>()?;
        if bias_vals.len() != rows {
            return Err(r.error(&format!("expected {rows} biases, found {}", bias_vals.len())));
        }
        layers.push(Layer { weights, biases: Array1::from_vec(bias_vals), activation: act });
    }
    DenseNet::from_layers(layers)
}

pub fn save_densenet(path: &Path, net: &DenseNet) -> Result<()> {
    let mut text = String::new();
    write_densenet(&mut text, net);
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_densenet(path: &Path) -> Result<DenseNet> {
    let text = std::fs::read_to_string(path)?;
    read_densenet(&mut LineReader::new(&text))
}
