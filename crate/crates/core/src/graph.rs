//! Reward-sharing relational networks.
//!
//! A [`RelationalNetwork`] is a dense weighted digraph over the agents.
//! `weight(i, j)` is how much agent `i`'s training signal depends on agent
//! `j`'s individual reward, so row `i` is the weight vector that drives agent
//! `i`. The matrix is not required to be symmetric.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The six built-in network structures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Every agent only cares about itself (identity matrix).
    Survivalist,
    /// Every agent cares about everyone (all-ones matrix).
    Communitarian,
    /// Agents 1 and 2 care about themselves and about agent 3; agent 3 only
    /// about itself.
    Authoritarian,
    /// Everyone cares only about agent 3.
    CollapsedAuthoritarian,
    /// Each agent cares about itself and its successor on the cycle 1→2→3→1.
    Tribal,
    /// Each agent cares only about its successor on the cycle.
    CollapsedTribal,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Survivalist,
        Preset::Communitarian,
        Preset::Authoritarian,
        Preset::CollapsedAuthoritarian,
        Preset::Tribal,
        Preset::CollapsedTribal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Survivalist => "survivalist",
            Preset::Communitarian => "communitarian",
            Preset::Authoritarian => "authoritarian",
            Preset::CollapsedAuthoritarian => "collapsed_authoritarian",
            Preset::Tribal => "tribal",
            Preset::CollapsedTribal => "collapsed_tribal",
        }
    }

    fn three_agent_rows(self) -> Option<[[f64; 3]; 3]> {
        match self {
            Preset::Survivalist | Preset::Communitarian => None,
            Preset::Authoritarian => Some([[1., 0., 1.], [0., 1., 1.], [0., 0., 1.]]),
            Preset::CollapsedAuthoritarian => Some([[0., 0., 1.], [0., 0., 1.], [0., 0., 1.]]),
            Preset::Tribal => Some([[1., 1., 0.], [0., 1., 1.], [1., 0., 1.]]),
            Preset::CollapsedTribal => Some([[0., 1., 0.], [0., 0., 1.], [1., 0., 0.]]),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// Dense relational weight matrix, immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationalNetwork {
    n_agents: usize,
    // row-major, n_agents * n_agents
    weights: Vec<f64>,
}

impl RelationalNetwork {
    pub fn preset(preset: Preset, n_agents: usize) -> Result<Self> {
        if n_agents == 0 {
            return Err(Error::EmptyNetwork);
        }
        match preset {
            Preset::Survivalist => Ok(Self::from_fn(n_agents, |i, j| if i == j { 1.0 } else { 0.0 })),
            Preset::Communitarian => Ok(Self::from_fn(n_agents, |_, _| 1.0)),
            other => {
                if n_agents != 3 {
                    return Err(Error::PresetSize {
                        name: other.name(),
                        n_agents,
                    });
                }
                let rows = other.three_agent_rows().expect("3-agent preset");
                Ok(Self::from_fn(3, |i, j| rows[i][j]))
            }
        }
    }

    /// Looks a preset up by its snake_case name.
    pub fn named(name: &str, n_agents: usize) -> Result<Self> {
        Self::preset(name.parse()?, n_agents)
    }

    /// Validates and copies a row-major matrix.
    pub fn from_matrix<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyNetwork);
        }
        let mut weights = Vec::with_capacity(n * n);
        for (row, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != n {
                return Err(Error::NotSquare {
                    row,
                    len: r.len(),
                    expected: n,
                });
            }
            if r.iter().any(|w| !w.is_finite()) {
                return Err(Error::NonFinite("relational weight matrix"));
            }
            weights.extend_from_slice(r);
        }
        Ok(Self { n_agents: n, weights })
    }

    fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let weights = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| f(i, j)).collect();
        Self { n_agents: n, weights }
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    /// Weight vector driving agent `i` (0-indexed).
    pub fn row(&self, i: usize) -> Result<&[f64]> {
        if i >= self.n_agents {
            return Err(Error::AgentIndex {
                index: i,
                n_agents: self.n_agents,
            });
        }
        Ok(&self.weights[i * self.n_agents..(i + 1) * self.n_agents])
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n_agents + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.weights.chunks_exact(self.n_agents)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(net: &RelationalNetwork) -> Vec<Vec<f64>> {
        net.to_rows()
    }

    #[test]
    fn preset_tables() {
        let m = |p| rows(&RelationalNetwork::preset(p, 3).unwrap());
        assert_eq!(m(Preset::Survivalist), vec![vec![1., 0., 0.], vec![0., 1., 0.], vec![0., 0., 1.]]);
        assert_eq!(m(Preset::Communitarian), vec![vec![1.; 3]; 3]);
        assert_eq!(m(Preset::CollapsedAuthoritarian), vec![vec![0., 0., 1.]; 3]);
        assert_eq!(m(Preset::Authoritarian), vec![vec![1., 0., 1.], vec![0., 1., 1.], vec![0., 0., 1.]]);
        assert_eq!(m(Preset::Tribal), vec![vec![1., 1., 0.], vec![0., 1., 1.], vec![1., 0., 1.]]);
        assert_eq!(m(Preset::CollapsedTribal), vec![vec![0., 1., 0.], vec![0., 0., 1.], vec![1., 0., 0.]]);
    }

    #[test]
    fn identity_and_all_ones_for_any_size() {
        for n in 1..=8 {
            let s = RelationalNetwork::preset(Preset::Survivalist, n).unwrap();
            let c = RelationalNetwork::preset(Preset::Communitarian, n).unwrap();
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(s.weight(i, j), if i == j { 1.0 } else { 0.0 });
                    assert_eq!(c.weight(i, j), 1.0);
                }
            }
        }
    }

    #[test]
    fn three_agent_presets_reject_other_sizes() {
        for p in [Preset::Authoritarian, Preset::CollapsedAuthoritarian, Preset::Tribal, Preset::CollapsedTribal] {
            assert!(matches!(RelationalNetwork::preset(p, 4), Err(Error::PresetSize { .. })));
            assert!(RelationalNetwork::preset(p, 2).is_err());
        }
        assert!(matches!(RelationalNetwork::named("anarchist", 3), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn composite_identities() {
        let s = RelationalNetwork::preset(Preset::Survivalist, 3).unwrap();
        let t = RelationalNetwork::preset(Preset::Tribal, 3).unwrap();
        let ct = RelationalNetwork::preset(Preset::CollapsedTribal, 3).unwrap();
        let a = RelationalNetwork::preset(Preset::Authoritarian, 3).unwrap();
        let ca = RelationalNetwork::preset(Preset::CollapsedAuthoritarian, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(t.weight(i, j), s.weight(i, j) + ct.weight(i, j));
                if i < 2 {
                    assert_eq!(a.weight(i, j), s.weight(i, j) + ca.weight(i, j));
                }
            }
        }
        assert_eq!(a.row(2).unwrap(), ca.row(2).unwrap());
        // not symmetric
        assert_eq!(t.weight(0, 1), 1.0);
        assert_eq!(t.weight(1, 0), 0.0);
    }

    #[test]
    fn binary_entries() {
        for p in Preset::ALL {
            let net = RelationalNetwork::preset(p, 3).unwrap();
            assert!(net.rows().flatten().all(|&w| w == 0.0 || w == 1.0), "{p}");
        }
    }

    #[test]
    fn from_matrix_validation() {
        let one = RelationalNetwork::from_matrix(&[vec![1.0]]).unwrap();
        assert_eq!(one.n_agents(), 1);
        let ragged: Vec<Vec<f64>> = vec![vec![1., 0.], vec![0., 1., 0.]];
        assert!(matches!(RelationalNetwork::from_matrix(&ragged), Err(Error::NotSquare { row: 1, .. })));
        assert!(RelationalNetwork::from_matrix(&[[0.0, f64::NAN], [1.0, 0.0]]).is_err());
        let mutual = RelationalNetwork::from_matrix(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert_eq!(mutual.row(0).unwrap(), &[0.0, 1.0]);
        assert!(RelationalNetwork::from_matrix::<Vec<f64>>(&[]).is_err());
    }

    #[test]
    fn row_lookup() {
        let s = RelationalNetwork::preset(Preset::Survivalist, 3).unwrap();
        assert_eq!(s.row(2).unwrap(), &[0., 0., 1.]);
        let c = RelationalNetwork::preset(Preset::Communitarian, 3).unwrap();
        assert_eq!(c.row(0).unwrap(), &[1., 1., 1.]);
        let ct = RelationalNetwork::preset(Preset::CollapsedTribal, 3).unwrap();
        assert_eq!(ct.row(1).unwrap(), &[0., 0., 1.]);
        assert!(matches!(s.row(3), Err(Error::AgentIndex { index: 3, n_agents: 3 })));
    }

    #[test]
    fn preset_names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
    }
}
