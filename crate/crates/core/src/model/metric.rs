use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::rat::{self, Rat};

/// Performance criterion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Metric {
    /// Expected total reward over steps `0..horizon`.
    FiniteTotal { horizon: usize },
    /// Expected `beta^i`-weighted reward over steps `0..horizon`.
    FiniteDiscounted { beta: Rat, horizon: usize },
    /// Expected `beta^i`-weighted reward over all steps.
    InfiniteDiscounted { beta: Rat },
    /// Long-run average reward per step.
    Average,
}

impl Metric {
    pub fn total(horizon: usize) -> Self {
        Metric::FiniteTotal { horizon }
    }

    pub fn discounted(beta: Rat, horizon: usize) -> Result<Self> {
        check_beta(&beta)?;
        Ok(Metric::FiniteDiscounted { beta, horizon })
    }

    pub fn infinite_discounted(beta: Rat) -> Result<Self> {
        check_beta(&beta)?;
        Ok(Metric::InfiniteDiscounted { beta })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Metric::FiniteDiscounted { beta, .. } | Metric::InfiniteDiscounted { beta } => check_beta(beta),
            _ => Ok(()),
        }
    }

    pub fn horizon(&self) -> Option<usize> {
        match self {
            Metric::FiniteTotal { horizon } | Metric::FiniteDiscounted { horizon, .. } => Some(*horizon),
            _ => None,
        }
    }

    /// Discount factor; 1 for undiscounted criteria.
    pub fn gamma(&self) -> Rat {
        match self {
            Metric::FiniteDiscounted { beta, .. } | Metric::InfiniteDiscounted { beta } => beta.clone(),
            _ => Rat::one(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.horizon().is_some()
    }

    pub fn describe(&self) -> String {
        match self {
            Metric::FiniteTotal { horizon } => format!("total(h={horizon})"),
            Metric::FiniteDiscounted { beta, horizon } => {
                format!("discounted(beta={}, h={horizon})", rat::fmt(beta))
            }
            Metric::InfiniteDiscounted { beta } => format!("discounted(beta={})", rat::fmt(beta)),
            Metric::Average => "average".to_string(),
        }
    }
}

fn check_beta(beta: &Rat) -> Result<()> {
    if !beta.is_positive() || beta >= &Rat::one() {
        return Err(Error::InvalidArgument(format!(
            "discount must lie strictly between 0 and 1, got {}",
            rat::fmt(beta)
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};

    #[test]
    fn beta_range() {
        assert!(Metric::discounted(rat(1, 2), 3).is_ok());
        assert!(Metric::discounted(int(1), 3).is_err());
        assert!(Metric::infinite_discounted(int(0)).is_err());
        assert!(Metric::FiniteDiscounted { beta: int(2), horizon: 1 }.validate().is_err());
        assert_eq!(Metric::total(4).gamma(), int(1));
        assert_eq!(Metric::Average.horizon(), None);
    }
}
