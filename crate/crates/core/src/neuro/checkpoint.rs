//! Plain-text network checkpoints.
//!
//! ```text
//! rsrn-mlp v1
//! layer_sizes 2 3 1
//! hidden_activation relu
//! output_activation tanh
//! weights 0
//! <one line per output unit, space separated>
//! biases 0
//! <one line>
//! ...
//! end
//! ```
//!
//! Values are written with 17 significant digits so that reading a
//! checkpoint back reproduces every parameter bit for bit.

use std::fmt::Write as _;

use super::mlp::{Activation, Mlp};
use crate::error::{Error, Result};

pub const FORMAT_TAG: &str = "rsrn-mlp v1";

pub fn to_text(net: &Mlp) -> String {
    let mut s = String::new();
    writeln!(s, "{FORMAT_TAG}").unwrap();
    let sizes: Vec<String> = net.layer_sizes().iter().map(usize::to_string).collect();
    writeln!(s, "layer_sizes {}", sizes.join(" ")).unwrap();
    writeln!(s, "hidden_activation {}", net.hidden_activation().name()).unwrap();
    writeln!(s, "output_activation {}", net.output_activation().name()).unwrap();
    for l in 0..net.n_layers() {
        let n_in = net.layer_sizes()[l];
        writeln!(s, "weights {l}").unwrap();
        for row in net.weights(l).chunks_exact(n_in) {
            write_row(&mut s, row);
        }
        writeln!(s, "biases {l}").unwrap();
        write_row(&mut s, net.biases(l));
    }
    s.push_str("end\n");
    s
}

fn write_row(s: &mut String, row: &[f64]) {
    for (k, v) in row.iter().enumerate() {
        if k > 0 {
            s.push(' ');
        }
        write!(s, "{v:.16e}").unwrap();
    }
    s.push('\n');
}

pub fn from_text(text: &str) -> Result<Mlp> {
    let mut lines = text.lines().enumerate();
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| Error::Checkpoint(format!("unexpected end of file, expected {what}")))
    };
    let bad = |line: usize, msg: String| Error::Checkpoint(format!("line {}: {msg}", line + 1));

    let (n, tag) = next("format tag")?;
    if tag.trim() != FORMAT_TAG {
        return Err(bad(n, format!("unsupported format tag `{tag}`")));
    }
    let (n, line) = next("layer_sizes")?;
    let sizes = line
        .strip_prefix("layer_sizes ")
        .ok_or_else(|| bad(n, "expected layer_sizes".into()))?
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|e| bad(n, e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let mut activation = |key: &str| -> Result<Activation> {
        let (n, line) = next(key)?;
        let name = line
            .strip_prefix(key)
            .map(str::trim)
            .ok_or_else(|| bad(n, format!("expected {key}")))?;
        Activation::from_name(name).ok_or_else(|| bad(n, format!("unknown activation `{name}`")))
    };
    let hidden = activation("hidden_activation")?;
    let output = activation("output_activation")?;
    let mut net = Mlp::zeros(&sizes, hidden, output)?;

    for l in 0..net.n_layers() {
        let (n_in, n_out) = (sizes[l], sizes[l + 1]);
        let (n, line) = next("weights header")?;
        if line.trim() != format!("weights {l}") {
            return Err(bad(n, format!("expected `weights {l}`")));
        }
        let mut w = Vec::with_capacity(n_in * n_out);
        for _ in 0..n_out {
            let (n, line) = next("weight row")?;
            w.extend(parse_row(line, n_in).map_err(|m| bad(n, m))?);
        }
        net.weights_mut(l).copy_from_slice(&w);
        let (n, line) = next("biases header")?;
        if line.trim() != format!("biases {l}") {
            return Err(bad(n, format!("expected `biases {l}`")));
        }
        let (n, line) = next("bias row")?;
        let b = parse_row(line, n_out).map_err(|m| bad(n, m))?;
        net.biases_mut(l).copy_from_slice(&b);
    }
    let (n, line) = next("end")?;
    if line.trim() != "end" {
        return Err(bad(n, "expected `end`".into()));
    }
    Ok(net)
}

fn parse_row(line: &str, expected: usize) -> std::result::Result<Vec<f64>, String> {
    let vals = line
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if vals.len() != expected {
        return Err(format!("expected {expected} values, found {}", vals.len()));
    }
    if vals.iter().any(|v| !v.is_finite()) {
        return Err("non-finite parameter".into());
    }
    Ok(vals)
}
