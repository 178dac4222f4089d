//! Evaluation trajectory traces.
//!
//! A trace is a text file with a tag line, a column header and one record
//! per environment step:
//!
//! ```text
//! # rsrn-trace v1 agents=3
//! step,x_0,y_0,...,vx_0,vy_0,...,ax_0,ay_0,...,r_0,...
//! 0,0.12,-0.4,...
//! ```
//!
//! Numbers are written in shortest round-trip decimal form.

use std::fmt::Write as _;

use crate::trainer::TraceStep;

pub const TRACE_TAG: &str = "# rsrn-trace v1";

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum TraceError {
    #[error("bad trace header: {0}")]
    Header(String),
    #[error("record {index}: {message}")]
    Record { index: usize, message: String },
    #[error("trace has no records")]
    Empty,
}

fn header(n: usize) -> String {
    let mut cols = vec!["step".to_string()];
    for prefix in [("x", "y"), ("vx", "vy"), ("ax", "ay")] {
        for i in 0..n {
            cols.push(format!("{}_{i}", prefix.0));
            cols.push(format!("{}_{i}", prefix.1));
        }
    }
    cols.extend((0..n).map(|i| format!("r_{i}")));
    cols.join(",")
}

pub fn write_trace(steps: &[TraceStep]) -> String {
    let n = steps.first().map_or(0, |s| s.positions.len());
    let mut out = format!("{TRACE_TAG} agents={n}\n{}\n", header(n));
    for (t, s) in steps.iter().enumerate() {
        write!(out, "{t}").unwrap();
        for v in s.positions.iter().chain(&s.velocities).chain(&s.actions).flatten().chain(&s.rewards) {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceStep>, TraceError> {
    let mut lines = text.lines();
    let tag = lines.next().ok_or_else(|| TraceError::Header("empty file".into()))?;
    let n: usize = tag
        .strip_prefix(TRACE_TAG)
        .and_then(|rest| rest.trim().strip_prefix("agents="))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| TraceError::Header(format!("unrecognised tag line `{tag}`")))?;
    let cols = lines.next().ok_or_else(|| TraceError::Header("missing column header".into()))?;
    if cols != header(n) {
        return Err(TraceError::Header("column header does not match agent count".into()));
    }
    let width = 1 + 7 * n;
    let mut steps = Vec::new();
    for (index, line) in lines.enumerate() {
        let bad = |message: String| TraceError::Record { index, message };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != width {
            return Err(bad(format!("expected {width} fields, found {}", fields.len())));
        }
        let step: usize = fields[0].parse().map_err(|_| bad(format!("bad step index `{}`", fields[0])))?;
        if step != index {
            return Err(bad(format!("step index {step} out of sequence")));
        }
        let vals = fields[1..]
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| bad(format!("bad number `{f}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let pairs = |k: usize| -> Vec<[f64; 2]> { vals[k * 2 * n..(k + 1) * 2 * n].chunks_exact(2).map(|c| [c[0], c[1]]).collect() };
        steps.push(TraceStep {
            positions: pairs(0),
            velocities: pairs(1),
            actions: pairs(2),
            rewards: vals[6 * n..].to_vec(),
        });
    }
    if steps.is_empty() {
        return Err(TraceError::Empty);
    }
    Ok(steps)
}

/// Fixed-width rendering: one header line, then one line per step with
/// every agent's position and individual reward.
pub fn render(steps: &[TraceStep]) -> String {
    let n = steps.first().map_or(0, |s| s.positions.len());
    let mut out = format!("{:>5}", "step");
    for i in 0..n {
        write!(out, " {:>10} {:>10}", format!("x_{i}"), format!("y_{i}")).unwrap();
    }
    for i in 0..n {
        write!(out, " {:>8}", format!("r_{i}")).unwrap();
    }
    out.push('\n');
    for (t, s) in steps.iter().enumerate() {
        write!(out, "{t:>5}").unwrap();
        for p in &s.positions {
            write!(out, " {:>10.5} {:>10.5}", p[0], p[1]).unwrap();
        }
        for r in &s.rewards {
            write!(out, " {r:>8.5}").unwrap();
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn still(n_steps: usize) -> Vec<TraceStep> {
        (0..n_steps)
            .map(|_| TraceStep {
                positions: vec![[0.1, -0.2], [0.5, 0.5]],
                velocities: vec![[0.0; 2]; 2],
                actions: vec![[0.0; 2]; 2],
                rewards: vec![0.75, 0.0],
            })
            .collect()
    }

    #[test]
    fn stationary_world_renders_constant_lines() {
        let text = write_trace(&still(25));
        let steps = parse_trace(&text).unwrap();
        assert_eq!(steps, still(25));
        let out = render(&steps);
        let body: Vec<&str> = out.lines().skip(1).collect();
        assert_eq!(body.len(), 25);
        let strip = |l: &str| l.split_whitespace().skip(1).collect::<Vec<_>>().join(" ");
        assert!(body.iter().all(|l| strip(l) == strip(body[0])));
    }

    #[test]
    fn truncated_record_is_named() {
        let text = write_trace(&still(5));
        let mut lines: Vec<&str> = text.lines().collect();
        let cut = &lines[5][..lines[5].len() / 2];
        lines[5] = cut;
        let err = parse_trace(&lines[..6].join("\n")).unwrap_err();
        assert!(matches!(err, TraceError::Record { index: 3, .. }), "{err}");
        assert!(err.to_string().starts_with("record 3"));
    }

    #[test]
    fn header_errors() {
        assert!(matches!(parse_trace(""), Err(TraceError::Header(_))));
        assert!(matches!(parse_trace("# something else\n"), Err(TraceError::Header(_))));
        let text = write_trace(&still(1));
        let only_header: String = text.lines().take(2).collect::<Vec<_>>().join("\n");
        assert_eq!(parse_trace(&only_header), Err(TraceError::Empty));
    }
}
