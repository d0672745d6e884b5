//! A ramp scheme with finite share domains and infinitely many secrets.
//!
//! The dealer picks a secret `s ≥ 1` with probability `2^-s` and a threshold `t > s`
//! with probability `2^-(t-s)`. Participant `i ≤ t` gets a uniform integer from
//! `{1, ..., i}`; participant `i > t` gets `s`. Every infinite set sees the secret as
//! the eventual value of its shares, while any finite set leaves every secret
//! possible.
//!
//! # Sampling
//!
//! `s` and `t - s` are geometric, read from [`rng::BitStream`] (count of leading
//! 1-bits plus one). A uniform share in `{1..i}` takes the next 64-bit word `w` and
//! returns `1 + ⌊w · i / 2^64⌋`, off from uniform by at most `i / 2^64`.
//!
//! # Posterior
//!
//! For observations `{i ↦ v_i}` with largest index `M`, the likelihood given
//! `(s, t)` is `L(s, t) = Π_{i ≤ t} [v_i ≤ i]/i · Π_{i > t} [v_i = s]`, constant
//! `C = Π 1/i` once `t ≥ M`. Hence the unnormalized weight of `s` is
//!
//! ```text
//! w(s) = Σ_{t=s+1}^{M-1} 2^-t L(s, t) + C · 2^{1 - max(M, s+1)},
//! ```
//!
//! so `w(s) = C · 2^-s` for `s ≥ M` and the total is
//! `Z = Σ_{s<M} w(s) + C · 2^{1 - max(M, 1)}`. Everything is exact.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::RngCore;

use crate::classifier::format_rational;
use crate::error::{Error, Result};
use crate::rng::{self, BitStream, Stream};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TailDealing {
    pub secret: u64,
    pub threshold: u64,
    /// Shares of participants `1..=N`.
    pub shares: Vec<u64>,
}

impl TailDealing {
    pub fn to_text(&self) -> String {
        let mut out = format!("secret {}\nthreshold {}\n", self.secret, self.threshold);
        for (i, v) in self.shares.iter().enumerate() {
            out.push_str(&format!("share {} {v}\n", i + 1));
        }
        out
    }
}

fn uniform_upto(rng: &mut impl RngCore, i: u64) -> u64 {
    1 + ((rng.next_u64() as u128 * i as u128) >> 64) as u64
}

/// Draws one dealing, revealing the first `prefix` shares.
pub fn sample_with(bits: &mut BitStream<&mut Stream>, prefix: usize) -> TailDealing {
    let secret = bits.geometric();
    let threshold = secret + bits.geometric();
    let shares = (1..=prefix as u64)
        .map(|i| {
            if i <= threshold {
                uniform_upto(bits.inner(), i)
            } else {
                secret
            }
        })
        .collect();
    TailDealing {
        secret,
        threshold,
        shares,
    }
}

pub fn sample(prefix: usize, seed: u64) -> Result<TailDealing> {
    if prefix == 0 {
        return Err(Error::InvalidArgument(
            "prefix length must be at least 1".into(),
        ));
    }
    let mut rng = rng::stream(seed);
    Ok(sample_with(&mut BitStream::new(&mut rng), prefix))
}

/// `samples` independent dealings over the chunked substreams of `seed`.
pub fn sample_many(samples: usize, prefix: usize, seed: u64) -> Vec<TailDealing> {
    rng::par_samples(samples, seed, |rng| {
        sample_with(&mut BitStream::new(rng), prefix)
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Posterior {
    pub cap: u64,
    /// `P(s | obs)` for `s = 1..=cap`.
    pub probabilities: Vec<BigRational>,
    /// `P(s > cap | obs)`.
    pub tail_mass: BigRational,
    /// `P(obs)`.
    pub observation_probability: BigRational,
}

impl Posterior {
    pub fn probability(&self, secret: u64) -> Option<&BigRational> {
        self.probabilities.get(secret.checked_sub(1)? as usize)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, p) in self.probabilities.iter().enumerate() {
            out.push_str(&format!("{} {}\n", i + 1, format_rational(p)));
        }
        out.push_str(&format!("tail {}\n", format_rational(&self.tail_mass)));
        out
    }
}

fn pow2_inv(k: u64) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << k)
}

/// Exact posterior of the secret given observed shares `{index ↦ value}`.
pub fn conditional_secret_distribution(
    observed: &BTreeMap<u64, u64>,
    cap: u64,
) -> Result<Posterior> {
    for (&i, &v) in observed {
        if i == 0 || v == 0 || v > i {
            return Err(Error::ImpossibleObservation { index: i, value: v });
        }
    }
    let largest_value = observed.values().copied().max().unwrap_or(0);
    if cap == 0 || cap < largest_value {
        return Err(Error::InvalidArgument(format!(
            "secret cap {cap} is below the largest observed share {largest_value}"
        )));
    }
    let m = observed.keys().copied().max().unwrap_or(0);
    let c = observed
        .keys()
        .fold(BigRational::one(), |acc, &i| acc / BigInt::from(i));
    let likelihood = |s: u64, t: u64| -> BigRational {
        let mut l = BigRational::one();
        for (&i, &v) in observed {
            if i <= t {
                l /= BigInt::from(i);
            } else if v != s {
                return BigRational::zero();
            }
        }
        l
    };
    let weight = |s: u64| -> BigRational {
        if s >= m {
            return &c * pow2_inv(s);
        }
        let mut w = &c * pow2_inv(m - 1);
        for t in s + 1..m {
            let l = likelihood(s, t);
            if !l.is_zero() {
                w += l * pow2_inv(t);
            }
        }
        w
    };
    let head = m.saturating_sub(1);
    let mut z = &c * pow2_inv(m.max(1) - 1);
    let mut weights = BTreeMap::new();
    for s in 1..=head.max(cap) {
        let w = weight(s);
        if s <= head {
            z += &w;
        }
        weights.insert(s, w);
    }
    let probabilities: Vec<BigRational> = (1..=cap).map(|s| &weights[&s] / &z).collect();
    let head_tail: BigRational = (cap + 1..=head).map(|s| weights[&s].clone()).sum();
    let rest = &c * pow2_inv(m.max(cap + 1) - 1);
    Ok(Posterior {
        cap,
        probabilities,
        tail_mass: (head_tail + rest) / &z,
        observation_probability: z,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recovery {
    Secret(u64),
    Undetermined,
}

/// Reads the secret as the value of the last `run_length` shares when they agree.
///
/// On a finite prefix this can be wrong: a run of `r` equal uniform shares past the
/// threshold region has probability at most about `2^-r` once the indices exceed
/// the run values. A `run_length` of zero never decides.
pub fn eventual_value_recover(shares: &[u64], run_length: usize) -> Recovery {
    if run_length == 0 || shares.len() < run_length {
        return Recovery::Undetermined;
    }
    let tail = &shares[shares.len() - run_length..];
    if tail.iter().all(|&x| x == tail[0]) {
        Recovery::Secret(tail[0])
    } else {
        Recovery::Undetermined
    }
}
