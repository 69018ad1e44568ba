//! Lens spaces `K = S^{2n+1} / Gamma` and flat line-bundle data.
//!
//! The cyclic group `Gamma` of order `mu` acts on the unit sphere in
//! `C^{n+1}` through coordinate rotations `exp(2 pi i nu_j / mu)` with every
//! `nu_j` a unit mod `mu`. A flat bundle is a list of integer characters of
//! `Gamma`, one per rank-one summand.

use crate::{Error, Result};

/// Extended-Euclid modular inverse: the unique `tau` in `1..=mu` with
/// `tau * nu == 1 (mod mu)`.
pub fn mod_inverse(nu: i64, mu: i64) -> Result<i64> {
    if mu < 1 {
        return Err(Error::Domain(format!("modulus must be positive, got {mu}")));
    }
    let (mut r0, mut r1) = (mu, nu.rem_euclid(mu));
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return Err(Error::NonCoprime { nu, mu });
    }
    Ok(a_mu(t0, mu))
}

/// The representative of `w` modulo `mu` lying in `1..=mu` (so multiples of
/// `mu` map to `mu`, not 0).
pub fn a_mu(w: i64, mu: i64) -> i64 {
    let r = w.rem_euclid(mu);
    if r == 0 {
        mu
    } else {
        r
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// The pair `(mu; nu_1..nu_{n+1})` defining a lens space, with the inverses
/// `tau_j` cached at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LensSpace {
    n: usize,
    mu: i64,
    nu: Vec<i64>,
    tau: Vec<i64>,
}

impl LensSpace {
    /// Validates `n >= 1`, `mu >= 1`, `nu.len() == n + 1` and that every
    /// `nu_j` is a unit mod `mu`.
    pub fn new(n: usize, mu: i64, nu: &[i64]) -> Result<LensSpace> {
        if n < 1 {
            return Err(Error::Domain(format!("need n >= 1, got {n}")));
        }
        if mu < 1 {
            return Err(Error::Domain(format!("need mu >= 1, got {mu}")));
        }
        if nu.len() != n + 1 {
            return Err(Error::Domain(format!(
                "need {} rotation parameters for n = {n}, got {}",
                n + 1,
                nu.len()
            )));
        }
        for &v in nu {
            if gcd(v, mu) != 1 {
                return Err(Error::NonCoprime { nu: v, mu });
            }
        }
        let tau = nu
            .iter()
            .map(|&v| mod_inverse(v, mu))
            .collect::<Result<Vec<_>>>()?;
        Ok(LensSpace {
            n,
            mu,
            nu: nu.to_vec(),
            tau,
        })
    }

    /// The sphere `S^{2n+1}` itself (`mu = 1`).
    pub fn sphere(n: usize) -> LensSpace {
        LensSpace::new(n, 1, &vec![1; n + 1]).expect("sphere parameters are valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mu(&self) -> i64 {
        self.mu
    }

    pub fn nu(&self) -> &[i64] {
        &self.nu
    }

    /// Cached inverses `tau_j` in `1..=mu` with `tau_j nu_j == 1 (mod mu)`.
    pub fn tau(&self) -> &[i64] {
        &self.tau
    }

    /// Reduce a character label into `0..mu`.
    pub fn reduce_u(&self, u: i64) -> i64 {
        u.rem_euclid(self.mu)
    }
}

/// Holonomy data of a flat bundle: the characters of its rank-one summands,
/// reduced mod `mu` at construction (`u = mu` is the trivial character).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatBundle {
    us: Vec<i64>,
}

impl FlatBundle {
    pub fn new(lens: &LensSpace, us: &[i64]) -> Result<FlatBundle> {
        if us.is_empty() {
            return Err(Error::Domain(
                "a flat bundle needs at least one rank-one summand".into(),
            ));
        }
        Ok(FlatBundle {
            us: us.iter().map(|&u| lens.reduce_u(u)).collect(),
        })
    }

    pub fn line(lens: &LensSpace, u: i64) -> FlatBundle {
        FlatBundle {
            us: vec![lens.reduce_u(u)],
        }
    }

    pub fn rank(&self) -> usize {
        self.us.len()
    }

    /// Reduced characters of the summands.
    pub fn us(&self) -> &[i64] {
        &self.us
    }
}
