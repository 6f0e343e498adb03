//! Hitting probabilities, the Doob transform and the offspring laws derived from a
//! skip-free increment law.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::increments::IncrementLaw;
use crate::samplers::OffspringLaw;

const ROOT_TOL: f64 = 1e-12;
const SUM_TOL: f64 = 1e-10;

fn require_skip_free(law: &IncrementLaw) -> Result<()> {
    if law.is_skip_free() {
        Ok(())
    } else {
        Err(Error::NotSkipFree)
    }
}

/// `ψ(x) = Σ_{k≥-1} p_k x^{k+1} − x`, evaluated by Horner's rule from the top power.
fn psi(law: &IncrementLaw, x: f64) -> f64 {
    let top = law.max_value();
    let mut acc = 0.0;
    for k in (-1..=top).rev() {
        acc = acc * x + law.prob(k);
    }
    acc - x
}

fn psi_prime(law: &IncrementLaw, x: f64) -> f64 {
    let top = law.max_value();
    let mut acc = 0.0;
    for k in (0..=top).rev() {
        acc = acc * x + (k + 1) as f64 * law.prob(k);
    }
    acc - 1.0
}

/// Probability that the walk started at 0 ever hits −1.
pub fn hitting_prob_c(law: &IncrementLaw) -> Result<f64> {
    require_skip_free(law)?;
    if law.mean() <= 0.0 {
        return Ok(1.0);
    }
    let p_minus = law.prob(-1);
    if p_minus == 0.0 {
        return Ok(0.0);
    }
    let mut hi = 0.5;
    while psi(law, 1.0 - hi) >= 0.0 {
        hi *= 0.5;
        if hi < 1e-300 {
            return Ok(1.0);
        }
    }
    let (mut lo, mut hi) = (0.0, 1.0 - hi);
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        if psi(law, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut c = 0.5 * (lo + hi);
    for _ in 0..3 {
        let d = psi_prime(law, c);
        if d == 0.0 {
            break;
        }
        let next = c - psi(law, c) / d;
        if !(next > lo - ROOT_TOL && next < hi + ROOT_TOL) {
            break;
        }
        c = next;
    }
    Ok(c)
}

/// Law of the walk conditioned to hit −1: `p̂_k = p_k c^k`.
pub fn doob_transform(law: &IncrementLaw) -> Result<IncrementLaw> {
    require_skip_free(law)?;
    if law.mean() <= 0.0 {
        return Err(Error::InvalidLaw("doob transform needs a positive mean".into()));
    }
    let c = hitting_prob_c(law)?;
    let atoms: Vec<(i64, f64)> = law.atoms().iter().map(|&(k, p)| (k, p * c.powi(k as i32))).collect();
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    if (total - 1.0).abs() > SUM_TOL {
        return Err(Error::InvalidLaw(format!("doob transform sums to {total}")));
    }
    let out = IncrementLaw::new(atoms.into_iter().map(|(k, p)| (k, p / total)).collect())?;
    debug_assert!(out.mean() < 0.0);
    Ok(out)
}

/// `π(k) = P[X_0 = k − 1]`.
pub fn offspring_from_increment(law: &IncrementLaw) -> Result<OffspringLaw> {
    require_skip_free(law)?;
    OffspringLaw::new(law.atoms().iter().map(|&(v, p)| ((v + 1) as usize, p)).collect())
}

fn normalized(atoms: Vec<(usize, f64)>) -> Result<OffspringLaw> {
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    if (total - 1.0).abs() > SUM_TOL {
        return Err(Error::InvalidLaw(format!("derived law sums to {total}")));
    }
    OffspringLaw::new(atoms.into_iter().map(|(k, p)| (k, p / total)).collect())
}

/// `π̃(k) = c^{k−1} P[X_0 = k−1]` and `π̄(k) = P[X_0 ≥ k] c^k`.
pub fn derive_pis(law: &IncrementLaw) -> Result<(OffspringLaw, OffspringLaw)> {
    require_skip_free(law)?;
    if law.mean() <= 0.0 {
        return Err(Error::InvalidLaw("derived laws need a positive mean".into()));
    }
    let c = hitting_prob_c(law)?;
    let tilde = law
        .atoms()
        .iter()
        .map(|&(v, p)| ((v + 1) as usize, c.powi(v as i32) * p))
        .collect();
    let bar = (0..=law.max_value())
        .map(|k| {
            let tail: f64 = law.atoms().iter().filter(|a| a.0 >= k).map(|a| a.1).sum();
            (k as usize, tail * c.powi(k as i32))
        })
        .collect();
    Ok((normalized(tilde)?, normalized(bar)?))
}

/// `P[τ < ∞, S_τ = j, X_{τ−1} = k] = P[X_0 = k] c^{k−j}` for the first weak upper record τ.
pub fn weak_record_joint(law: &IncrementLaw, j: i64, k: i64) -> Result<f64> {
    if !(0 <= j && j <= k) {
        return Err(Error::InvalidArgument(format!("need 0 <= j <= k, got j={j} k={k}")));
    }
    let c = hitting_prob_c(law)?;
    Ok(law.prob(k) * c.powi((k - j) as i32))
}

/// Exact probability of `{τ = n ≤ depth, S_τ = j, X_{τ−1} = k}` together with the mass of
/// paths not yet absorbed at `depth`.
pub fn weak_record_enumerate(law: &IncrementLaw, j: i64, k: i64, depth: usize) -> Result<(f64, f64)> {
    require_skip_free(law)?;
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    // mass[d] = probability of being at level -d (d ≥ 1) without having recorded
    let mut mass = vec![0.0; depth + 2];
    let mut hit = 0.0;
    for &(x, p) in law.atoms() {
        if x >= 0 {
            if x == j && x == k {
                hit += p;
            }
        } else {
            mass[1] += p;
        }
    }
    for _ in 1..depth {
        let mut next = vec![0.0; depth + 2];
        for (d, &m) in mass.iter().enumerate().skip(1) {
            if m == 0.0 {
                continue;
            }
            for &(x, p) in law.atoms() {
                let level = x - d as i64;
                if level >= 0 {
                    if level == j && x == k {
                        hit += m * p;
                    }
                } else {
                    next[(-level) as usize] += m * p;
                }
            }
        }
        mass = next;
    }
    Ok((hit, mass.iter().sum()))
}

#[derive(Clone, Debug, Serialize)]
pub struct DerivedLaws {
    pub base: IncrementLaw,
    pub mean: f64,
    pub c: f64,
    pub doob: Option<IncrementLaw>,
    pub doob_mean: Option<f64>,
    pub offspring: OffspringLaw,
    pub offspring_size_biased: Option<OffspringLaw>,
    pub pi_tilde: Option<OffspringLaw>,
    pub pi_bar: Option<OffspringLaw>,
}

pub fn derived_laws(law: &IncrementLaw) -> Result<DerivedLaws> {
    let c = hitting_prob_c(law)?;
    let offspring = offspring_from_increment(law)?;
    let hat = crate::samplers::size_biased(&offspring).ok();
    let (doob, pis) = if law.mean() > 0.0 {
        (Some(doob_transform(law)?), Some(derive_pis(law)?))
    } else {
        (None, None)
    };
    Ok(DerivedLaws {
        base: law.clone(),
        mean: law.mean(),
        c,
        doob_mean: doob.as_ref().map(|d| d.mean()),
        doob,
        offspring,
        offspring_size_biased: hat,
        pi_tilde: pis.as_ref().map(|p| p.0.clone()),
        pi_bar: pis.map(|p| p.1),
    })
}
