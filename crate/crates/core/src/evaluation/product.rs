use crate::error::Result;
use crate::model::{FiniteMemoryPolicy, Labels, Pomdp, StationaryPolicy};

/// Fold a finite-memory policy into the model.
///
/// Product state `(s, q)` has index `s * |M| + q` and observation
/// `o(s) * |M| + q`. Product action `a * |M| + q'` plays `a` and moves the
/// memory to `q'`. The returned stationary policy realizes the transducer.
pub fn finite_memory_cross_product(m: &Pomdp, p: &FiniteMemoryPolicy) -> Result<(Pomdp, StationaryPolicy)> {
    p.check_domain(m)?;
    let k = p.n_memory();
    let mut prod = Pomdp::new(m.n_states() * k, m.n_actions() * k, m.n_obs() * k, m.initial() * k + p.initial_memory());
    for s in 0..m.n_states() {
        for q in 0..k {
            let ps = s * k + q;
            prod.set_obs(ps, m.obs(s) * k + q);
            for a in 0..m.n_actions() {
                for q2 in 0..k {
                    let pa = a * k + q2;
                    for (s2, t) in m.row(s, a) {
                        prod.set_prob(ps, pa, s2 * k + q2, t.clone());
                    }
                    prod.set_reward(ps, pa, m.reward(s, a).clone());
                }
            }
        }
    }
    if let Some(l) = m.labels() {
        let pair = |names: &[String], n: usize| -> Vec<String> {
            (0..n * k).map(|i| format!("{}|m{}", names[i / k], i % k)).collect()
        };
        prod.set_labels(Labels {
            states: pair(&l.states, m.n_states()),
            actions: pair(&l.actions, m.n_actions()),
            observations: pair(&l.observations, m.n_obs()),
        });
    }
    let act = (0..m.n_obs() * k)
        .map(|po| {
            let (a, q2) = p.step(po / k, po % k);
            a * k + q2
        })
        .collect();
    Ok((prod, StationaryPolicy::new(act)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::finite_horizon_performance;
    use crate::model::{Metric, Policy};
    use crate::rat::{int, rat};

    fn coin() -> Pomdp {
        let mut m = Pomdp::new(2, 2, 1, 0);
        for a in 0..2 {
            m.set_prob(0, a, 0, rat(1, 2));
            m.set_prob(0, a, 1, rat(1, 2));
            m.set_forced(1, 1);
        }
        m.set_reward(0, 1, int(1));
        m.set_reward(1, 0, int(2));
        m
    }

    #[test]
    fn single_memory_is_isomorphic() {
        let m = coin();
        let p = FiniteMemoryPolicy::from_stationary(&StationaryPolicy::new(vec![1]));
        let (prod, pi) = finite_memory_cross_product(&m, &p).unwrap();
        assert_eq!(prod, m);
        assert_eq!(pi, StationaryPolicy::new(vec![1]));
    }

    #[test]
    fn alternating_memory_matches_direct() {
        let m = coin();
        // alternate actions 1, 0, 1, ...
        let p = FiniteMemoryPolicy::new(2, 0, vec![vec![(1, 1), (0, 0)]]).unwrap();
        let (prod, pi) = finite_memory_cross_product(&m, &p).unwrap();
        assert_eq!(prod.n_states(), 4);
        for h in 0..6 {
            let metric = Metric::total(h);
            let direct = finite_horizon_performance(&m, &Policy::FiniteMemory(p.clone()), &metric).unwrap();
            let folded = finite_horizon_performance(&prod, &Policy::Stationary(pi.clone()), &metric).unwrap();
            assert_eq!(direct, folded, "h={h}");
        }
    }
}
