//! Lower bounds on positive values and the wrappers that turn additive
//! approximators into relative ones and back.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::model::{Metric, Pomdp};
use crate::rat::{self, Rat};

/// Guarantee declared by an approximator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ApproxKind {
    /// `mu >= v >= mu - k`.
    KAdditive(Rat),
    /// `mu >= v >= (1 - eps) mu` for the `eps` it is called with.
    Ptas,
}

type Estimate<'a> = dyn Fn(&Pomdp, &Metric, Option<&Rat>) -> Result<Rat> + 'a;

/// A value estimator with a declared contract. The callable receives the
/// model, the metric and, for schemes, the requested `eps`.
pub struct Approximator<'a> {
    kind: ApproxKind,
    estimate: Box<Estimate<'a>>,
}

impl fmt::Debug for Approximator<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Approximator").field("kind", &self.kind).finish_non_exhaustive()
    }
}

impl<'a> Approximator<'a> {
    pub fn new(kind: ApproxKind, estimate: impl Fn(&Pomdp, &Metric, Option<&Rat>) -> Result<Rat> + 'a) -> Self {
        Approximator { kind, estimate: Box::new(estimate) }
    }

    pub fn kind(&self) -> &ApproxKind {
        &self.kind
    }

    pub fn call(&self, m: &Pomdp, metric: &Metric, eps: Option<&Rat>) -> Result<Rat> {
        (self.estimate)(m, metric, eps)
    }

    fn additive_k(&self) -> Result<&Rat> {
        match &self.kind {
            ApproxKind::KAdditive(k) if !k.is_negative() => Ok(k),
            ApproxKind::KAdditive(_) => Err(Error::InvalidArgument("additive slack k must be >= 0".into())),
            ApproxKind::Ptas => Err(Error::InvalidArgument("expected an additive approximator".into())),
        }
    }
}

/// Smallest value a policy can have under `metric` once it has any positive
/// value: `nu^h zeta`, `(beta nu)^h zeta`, or `(beta nu)^|S| zeta` for the
/// infinite discounted criterion. `nu` and `zeta` are the least nonzero
/// transition probability and reward over reachable states.
pub fn positive_value_lower_bound(m: &Pomdp, metric: &Metric) -> Result<Rat> {
    lower_bound(m, metric)?
        .ok_or_else(|| Error::InvalidArgument("no reachable nonzero reward, every value is 0".into()))
}

/// `None` when no reachable state carries a nonzero reward.
fn lower_bound(m: &Pomdp, metric: &Metric) -> Result<Option<Rat>> {
    metric.validate()?;
    if !m.rewards_nonnegative() {
        return Err(Error::InvalidArgument("lower bound needs nonnegative rewards".into()));
    }
    let reach = m.reachable();
    let mut nu: Option<Rat> = None;
    let mut zeta: Option<Rat> = None;
    for s in (0..m.n_states()).filter(|&s| reach[s]) {
        for a in 0..m.n_actions() {
            for (_, p) in m.row(s, a) {
                if !p.is_zero() && nu.as_ref().is_none_or(|n| p < n) {
                    nu = Some(p.clone());
                }
            }
            let r = m.reward(s, a);
            if !r.is_zero() && zeta.as_ref().is_none_or(|z| r < z) {
                zeta = Some(r.clone());
            }
        }
    }
    let Some(zeta) = zeta else {
        return Ok(None);
    };
    // a model without transitions collects its reward at step 0 only
    let nu = nu.unwrap_or_else(Rat::one);
    let base = metric.gamma() * nu;
    let exp = match metric {
        Metric::FiniteTotal { horizon } | Metric::FiniteDiscounted { horizon, .. } => *horizon,
        Metric::InfiniteDiscounted { .. } => m.n_states(),
        Metric::Average => return Err(Error::Unsupported("no positive lower bound for the average criterion".into())),
    };
    Ok(Some(rat::powi(&base, exp as i64) * zeta))
}

/// Same structure, every reward multiplied by `theta`.
pub fn scale_rewards(m: &Pomdp, theta: &Rat) -> Result<Pomdp> {
    if !theta.is_positive() {
        return Err(Error::InvalidArgument(format!("scale factor must be positive, got {}", rat::fmt(theta))));
    }
    Ok(m.map_rewards(|r| r * theta))
}

fn least_int_above(x: &Rat) -> Rat {
    Rat::from_integer(rat::least_int_above(x).max(BigInt::one()))
}

/// Scale rewards past the additive slack and ask whether the estimate is
/// positive. With a correct `k`-additive approximator this equals `val > 0`.
/// Models without a reachable nonzero reward are answered without a call.
pub fn decide_positivity_via_kadditive(a: &Approximator<'_>, m: &Pomdp, metric: &Metric) -> Result<bool> {
    let k = a.additive_k()?;
    let Some(delta) = lower_bound(m, metric)? else {
        return Ok(false);
    };
    let theta = least_int_above(&(k / &delta));
    let v = a.call(&scale_rewards(m, &theta)?, metric, None)?;
    Ok(v.is_positive())
}

/// Relative approximation from an additive one: 0 on zero-value models,
/// otherwise `a(theta m) / theta` with `theta` the least integer above
/// `k / (eps delta)`.
pub fn kadditive_to_ptas(a: &Approximator<'_>, m: &Pomdp, eps: &Rat, metric: &Metric) -> Result<Rat> {
    if !eps.is_positive() {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    if !decide_positivity_via_kadditive(a, m, metric)? {
        return Ok(Rat::zero());
    }
    let k = a.additive_k()?;
    let delta = positive_value_lower_bound(m, metric)?;
    let theta = least_int_above(&(k / (eps * &delta)));
    Ok(a.call(&scale_rewards(m, &theta)?, metric, None)? / theta)
}

/// Additive approximation from a relative scheme: probe with `eps = 1/2`,
/// then rerun with `eps = min(k / (4v), 1/2)`, which is below `k / (2v)`.
pub fn ptas_to_kadditive(a: &Approximator<'_>, m: &Pomdp, k: &Rat, metric: &Metric) -> Result<Rat> {
    if a.kind != ApproxKind::Ptas {
        return Err(Error::InvalidArgument("expected an approximation scheme".into()));
    }
    if !k.is_positive() {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    let half = rat::rat(1, 2);
    let v = a.call(m, metric, Some(&half))?;
    if v.is_zero() {
        return Ok(v);
    }
    let eps = (k / (v * rat::int(4))).min(half);
    a.call(m, metric, Some(&eps))
}
