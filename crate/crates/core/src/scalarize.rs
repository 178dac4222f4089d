//! Scalarization of a joint individual-reward vector into per-agent
//! relational rewards.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::RelationalNetwork;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Scalarization {
    #[serde(rename = "wsm")]
    WeightedSum,
    #[default]
    #[serde(rename = "wpm")]
    WeightedProduct,
}

impl Scalarization {
    pub fn apply(self, rewards: &[f64], weights: &[f64]) -> Result<f64> {
        match self {
            Scalarization::WeightedSum => wsm(rewards, weights),
            Scalarization::WeightedProduct => wpm(rewards, weights),
        }
    }
}

impl fmt::Display for Scalarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scalarization::WeightedSum => "wsm",
            Scalarization::WeightedProduct => "wpm",
        })
    }
}

impl FromStr for Scalarization {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "wsm" => Ok(Scalarization::WeightedSum),
            "wpm" => Ok(Scalarization::WeightedProduct),
            other => Err(format!("unknown scalarization `{other}` (expected wsm or wpm)")),
        }
    }
}

fn check(rewards: &[f64], weights: &[f64]) -> Result<()> {
    if rewards.len() != weights.len() {
        return Err(Error::LengthMismatch {
            context: "scalarization",
            left: rewards.len(),
            right: weights.len(),
        });
    }
    if rewards.iter().chain(weights).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("scalarization input"));
    }
    Ok(())
}

/// Weighted sum `Σ_j w_j r_j`.
pub fn wsm(rewards: &[f64], weights: &[f64]) -> Result<f64> {
    check(rewards, weights)?;
    Ok(rewards.iter().zip(weights).map(|(r, w)| w * r).sum())
}

/// Weighted product `Π_j r_j^{w_j}`.
///
/// A zero exponent always contributes a factor of exactly one, including
/// `0^0`, so agents with no relation never affect the result. A zero reward
/// under a positive weight makes the whole product exactly zero.
pub fn wpm(rewards: &[f64], weights: &[f64]) -> Result<f64> {
    check(rewards, weights)?;
    let mut acc = 1.0;
    for (j, (&r, &w)) in rewards.iter().zip(weights).enumerate() {
        if r < 0.0 {
            return Err(Error::NegativeReward { index: j, value: r });
        }
        if w == 0.0 {
            continue;
        }
        if r == 0.0 {
            if w < 0.0 {
                return Err(Error::ZeroToNegativePower(j));
            }
            acc = 0.0;
            continue;
        }
        acc *= if w == 1.0 { r } else { r.powf(w) };
    }
    Ok(acc)
}

/// Relational reward of every agent: entry `i` scalarizes `rewards` through
/// row `i` of `net`.
pub fn relational_rewards(rewards: &[f64], net: &RelationalNetwork, method: Scalarization) -> Result<Vec<f64>> {
    if rewards.len() != net.n_agents() {
        return Err(Error::LengthMismatch {
            context: "relational rewards",
            left: rewards.len(),
            right: net.n_agents(),
        });
    }
    net.rows().map(|w| method.apply(rewards, w)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Preset;
    use proptest::prelude::*;

    const R: [f64; 3] = [0.5, 0.2, 0.9];

    #[test]
    fn weighted_sum_examples() {
        assert_eq!(wsm(&R, &[0., 0., 1.]).unwrap(), 0.9);
        assert!((wsm(&R, &[1., 1., 1.]).unwrap() - 1.6).abs() < 1e-12);
        assert_eq!(wsm(&[0.; 3], &[3., -2., 0.5]).unwrap(), 0.0);
    }

    #[test]
    fn weighted_product_examples() {
        assert_eq!(wpm(&R, &[0., 0., 1.]).unwrap(), 0.9);
        assert!((wpm(&R, &[1., 1., 1.]).unwrap() - 0.09).abs() < 1e-12);
        assert_eq!(wpm(&[0.5, 0.0, 0.9], &[1., 1., 1.]).unwrap(), 0.0);
        assert_eq!(wpm(&[1., 1., 1.], &[1., 1., 1.]).unwrap(), 1.0);
        // strangers' zero rewards are neutral
        assert_eq!(wpm(&[0.0, 0.7, 0.0], &[0., 1., 0.]).unwrap(), 0.7);
    }

    #[test]
    fn error_paths() {
        assert!(matches!(wsm(&R, &[1., 1.]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(wpm(&[0.0, 1.0], &[-1.0, 1.0]), Err(Error::ZeroToNegativePower(0))));
        assert!(wpm(&[f64::NAN, 1.0], &[1.0, 1.0]).is_err());
        assert!(wsm(&[1.0, 1.0], &[f64::INFINITY, 1.0]).is_err());
        assert!(matches!(wpm(&[-0.1, 1.0], &[1.0, 1.0]), Err(Error::NegativeReward { index: 0, .. })));
        let net = RelationalNetwork::preset(Preset::Communitarian, 3).unwrap();
        assert!(relational_rewards(&[1.0, 1.0], &net, Scalarization::WeightedSum).is_err());
    }

    #[test]
    fn network_examples() {
        let surv = RelationalNetwork::preset(Preset::Survivalist, 3).unwrap();
        for m in [Scalarization::WeightedSum, Scalarization::WeightedProduct] {
            assert_eq!(relational_rewards(&R, &surv, m).unwrap(), R.to_vec());
        }
        let comm = RelationalNetwork::preset(Preset::Communitarian, 3).unwrap();
        let out = relational_rewards(&R, &comm, Scalarization::WeightedProduct).unwrap();
        assert!(out.iter().all(|&v| v == out[0]));
        assert!((out[0] - 0.09).abs() < 1e-12);
        let ct = RelationalNetwork::preset(Preset::CollapsedTribal, 3).unwrap();
        assert_eq!(
            relational_rewards(&[0.1, 0.2, 0.3], &ct, Scalarization::WeightedProduct).unwrap(),
            vec![0.2, 0.3, 0.1]
        );
    }

    #[test]
    fn method_names() {
        assert_eq!("wpm".parse::<Scalarization>().unwrap(), Scalarization::WeightedProduct);
        assert_eq!(Scalarization::WeightedSum.to_string(), "wsm");
        assert_eq!(Scalarization::default(), Scalarization::WeightedProduct);
        assert!("chebyshev".parse::<Scalarization>().is_err());
    }

    fn positive_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.01f64..1.0, n)
    }

    proptest! {
        #[test]
        fn all_ones_matches_fold(r in positive_vec(5)) {
            let ones = [1.0; 5];
            let prod: f64 = r.iter().fold(1.0, |a, b| a * b);
            let sum: f64 = r.iter().fold(0.0, |a, b| a + b);
            prop_assert!((wpm(&r, &ones).unwrap() - prod).abs() <= 1e-12 * prod.abs());
            prop_assert!((wsm(&r, &ones).unwrap() - sum).abs() <= 1e-12 * sum.abs());
        }

        #[test]
        fn permutation_networks_permute(r in positive_vec(4), perm in Just((0..4).collect::<Vec<usize>>()).prop_shuffle()) {
            let rows: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| if perm[i] == j { 1.0 } else { 0.0 }).collect()).collect();
            let net = RelationalNetwork::from_matrix(&rows).unwrap();
            for m in [Scalarization::WeightedSum, Scalarization::WeightedProduct] {
                let out = relational_rewards(&r, &net, m).unwrap();
                for i in 0..4 {
                    prop_assert_eq!(out[i].to_bits(), r[perm[i]].to_bits());
                }
            }
        }

        #[test]
        fn entry_depends_only_on_its_row(r in positive_vec(3), w in prop::collection::vec(0.0f64..2.0, 9), k_row in prop::collection::vec(0.0f64..2.0, 3)) {
            let rows: Vec<Vec<f64>> = w.chunks(3).map(<[f64]>::to_vec).collect();
            let mut altered = rows.clone();
            altered[1] = k_row;
            let a = RelationalNetwork::from_matrix(&rows).unwrap();
            let b = RelationalNetwork::from_matrix(&altered).unwrap();
            for m in [Scalarization::WeightedSum, Scalarization::WeightedProduct] {
                let ra = relational_rewards(&r, &a, m).unwrap();
                let rb = relational_rewards(&r, &b, m).unwrap();
                prop_assert_eq!(ra[0].to_bits(), rb[0].to_bits());
                prop_assert_eq!(ra[2].to_bits(), rb[2].to_bits());
            }
        }
    }
}
