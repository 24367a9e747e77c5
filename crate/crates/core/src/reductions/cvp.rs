use num_traits::One;

use crate::error::{Error, Result};
use crate::model::{Circuit, FluentCpt, GateKind, Labels, Metric, Parent, Pomdp, Tbn, TbnReward};
use crate::rat::{self, Rat};
use crate::reductions::{Bound, Claim, GadgetModel, GadgetOutput, PolicyClass};

/// Exponent `|C| + k + 1` of the paying reward.
pub fn cvp_reward_exponent(c: &Circuit, k_gap: u64) -> u64 {
    c.len() as u64 + k_gap + 1
}

fn single_output(c: &Circuit) -> Result<usize> {
    match c.outputs() {
        [o] => Ok(*o),
        outs => Err(Error::InvalidArgument(format!(
            "circuit value instances need exactly one output, found {}",
            outs.len()
        ))),
    }
}

/// Fully observable MDP over (gate, parity) pairs, walking from the output
/// gate back to an input gate. Player-chosen predecessors at OR (even
/// parity) and AND (odd parity), fair coins at AND (even) and OR (odd), NOT
/// flips the parity. Input gates whose value differs from the parity pay
/// `2^(|C|+k+1)` and move to the sink.
///
/// State `2g + p` is gate `g` with parity `p`; state `2|G|` is the sink.
pub fn cvp_to_mdp(c: &Circuit, k_gap: u64) -> Result<GadgetOutput> {
    let out = single_output(c)?;
    if let Some(g) = c.gates().iter().find(|g| g.kind == GateKind::Input) {
        return Err(Error::InvalidArgument(format!(
            "gate {:?} is a free input; circuit value instances use CONST gates",
            g.name
        )));
    }
    let n = c.len();
    let sink = 2 * n;
    let reward = rat::pow2(cvp_reward_exponent(c, k_gap));
    let half = rat::rat(1, 2);
    let mut m = Pomdp::new(2 * n + 1, 2, 2 * n + 1, 2 * out);
    let mut names = Vec::with_capacity(2 * n + 1);
    for (g, gate) in c.gates().iter().enumerate() {
        for p in 0..2 {
            let s = 2 * g + p;
            names.push(format!("{}/{p}", gate.name));
            let chooses = matches!((gate.kind, p), (GateKind::Or, 0) | (GateKind::And, 1));
            match gate.kind {
                GateKind::And | GateKind::Or if chooses => {
                    for a in 0..2 {
                        m.set_prob(s, a, 2 * gate.inputs[a] + p, Rat::one());
                    }
                }
                GateKind::And | GateKind::Or => {
                    for a in 0..2 {
                        m.add_prob(s, a, 2 * gate.inputs[0] + p, half.clone());
                        m.add_prob(s, a, 2 * gate.inputs[1] + p, half.clone());
                    }
                }
                GateKind::Not => m.set_forced(s, 2 * gate.inputs[0] + (1 - p)),
                GateKind::Const(v) => {
                    m.set_forced(s, sink);
                    if v as usize != p {
                        for a in 0..2 {
                            m.set_reward(s, a, reward.clone());
                        }
                    }
                }
                GateKind::Input => unreachable!("rejected above"),
            }
        }
    }
    for s in 0..=sink {
        m.set_obs(s, s);
    }
    m.set_forced(sink, sink);
    names.push("sink".into());
    m.set_labels(Labels { states: names.clone(), actions: vec!["0".into(), "1".into()], observations: names });
    let h = 2 * n + 1;
    let metric = Metric::total(h);
    let gap = rat::int(2 * k_gap as i64);
    Ok(GadgetOutput {
        model: GadgetModel::Pomdp(m),
        recommended_horizon: h,
        recommended_metric: metric.clone(),
        claims: vec![Claim {
            class: PolicyClass::Stationary,
            metric,
            yes: Bound::Eq(reward.clone()),
            no: Bound::Le(reward - gap),
        }],
        ssat_layout: None,
    })
}

/// Fluent roles in a circuit-simulating 2TBN.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TbnCircuitLayout {
    /// Fluent of every `Input` gate, in declaration order.
    pub inputs: Vec<usize>,
    /// Fluent of every gate.
    pub gate: Vec<usize>,
    /// Fluent holding each declared output bit.
    pub outputs: Vec<usize>,
}

/// 2TBN that evaluates `r` in one step: source gates are persistent input
/// fluents read asynchronously, every other gate is a deterministic fluent
/// over synchronous parents, and one identity fluent copies each output.
/// Constant gates start at their value.
pub fn circuit_to_2tbn(r: &Circuit) -> Result<(Tbn, TbnCircuitLayout)> {
    let n = r.len();
    let mut fluents: Vec<String> = r.gates().iter().map(|g| format!("g_{}", g.name)).collect();
    let mut cpts = Vec::with_capacity(n + r.outputs().len());
    let mut initial = vec![false; n];
    for (i, g) in r.gates().iter().enumerate() {
        let parent = |j: usize| {
            if r.gate(j).kind.is_source() {
                Parent::Current(j)
            } else {
                Parent::Next(j)
            }
        };
        let cpt = match g.kind {
            GateKind::Const(v) => {
                initial[i] = v;
                FluentCpt::deterministic(vec![Parent::Current(i)], |b| b[0])
            }
            GateKind::Input => FluentCpt::deterministic(vec![Parent::Current(i)], |b| b[0]),
            GateKind::Not => FluentCpt::deterministic(vec![parent(g.inputs[0])], |b| !b[0]),
            GateKind::And => FluentCpt::deterministic(vec![parent(g.inputs[0]), parent(g.inputs[1])], |b| b[0] && b[1]),
            GateKind::Or => FluentCpt::deterministic(vec![parent(g.inputs[0]), parent(g.inputs[1])], |b| b[0] || b[1]),
        };
        cpts.push(cpt);
    }
    let mut outputs = Vec::with_capacity(r.outputs().len());
    for (k, &o) in r.outputs().iter().enumerate() {
        outputs.push(fluents.len());
        fluents.push(format!("out{k}"));
        cpts.push(FluentCpt::deterministic(vec![Parent::Next(o)], |b| b[0]));
        initial.push(false);
    }
    let t = Tbn::new(fluents, vec![cpts], initial, TbnReward::Zero)?;
    let layout = TbnCircuitLayout { inputs: r.input_gates(), gate: (0..n).collect(), outputs };
    Ok((t, layout))
}
