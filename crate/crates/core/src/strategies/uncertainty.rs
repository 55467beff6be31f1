//! Uncertainty and committee-disagreement scores.

use crate::data::ClassDistribution;
use crate::error::{Error, Result};

/// `1 - p_hat[allocated class]`.
pub fn least_confidence(p_hat: &ClassDistribution) -> f64 {
    1.0 - p_hat.get(p_hat.allocate())
}

/// Entropy in nats, `-Σ p ln p` with `0 ln 0 = 0`.
pub fn shannon_entropy(p_hat: &ClassDistribution) -> f64 {
    entropy(p_hat.probs())
}

fn entropy(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.ln())
        .sum::<f64>()
}

/// Entropy of the committee's vote shares.
pub fn qbc_vote_entropy(votes: &[usize], n_classes: usize) -> Result<f64> {
    if votes.len() < 2 {
        return Err(Error::EmptyCommittee(votes.len()));
    }
    let mut shares = vec![0.0; n_classes];
    for &v in votes {
        if v >= n_classes {
            return Err(Error::LabelOutOfRange {
                label: v,
                n_classes,
            });
        }
        shares[v] += 1.0;
    }
    let c = votes.len() as f64;
    shares.iter_mut().for_each(|s| *s /= c);
    Ok(entropy(&shares))
}

/// Mean Kullback-Leibler divergence of each member from the consensus
/// (member mean), with member probabilities floored at `floor`.
pub fn qbc_avg_kl(members: &[ClassDistribution], floor: f64) -> Result<f64> {
    if members.len() < 2 {
        return Err(Error::EmptyCommittee(members.len()));
    }
    let k = members[0].n_classes();
    if let Some(m) = members.iter().find(|m| m.n_classes() != k) {
        return Err(Error::ShapeMismatch(format!(
            "committee members disagree on class count: {k} vs {}",
            m.n_classes()
        )));
    }
    let c = members.len() as f64;
    let consensus: Vec<f64> = (0..k)
        .map(|j| members.iter().map(|m| m.get(j)).sum::<f64>() / c)
        .collect();
    let total: f64 = members
        .iter()
        .map(|m| {
            m.probs()
                .iter()
                .zip(&consensus)
                .filter(|(&p, _)| p > 0.0)
                .map(|(&p, &q)| p * (p.max(floor).ln() - q.max(floor).ln()))
                .sum::<f64>()
        })
        .sum();
    // Rounding can leave tiny negatives for identical members.
    Ok((total / c).max(0.0))
}
