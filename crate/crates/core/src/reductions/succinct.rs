use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::gate_type as ty;
use crate::model::{
    Circuit, CircuitBuilder, FluentCpt, Gate, GateKind, Metric, Parent, SuccinctCircuitInstance, SuccinctReward, Tbn,
    TbnReward,
};
use crate::rat::{self, Rat};
use crate::reductions::{Bound, Claim, GadgetModel, GadgetOutput, PolicyClass};

/// Type code of a circuit gate.
fn type_code(kind: GateKind) -> Result<usize> {
    Ok(match kind {
        GateKind::And => ty::AND,
        GateKind::Or => ty::OR,
        GateKind::Not => ty::NOT,
        GateKind::Const(false) => ty::CONST0,
        GateKind::Const(true) => ty::CONST1,
        GateKind::Input => {
            return Err(Error::InvalidArgument("succinct instances describe circuits without free inputs".into()))
        }
    })
}

/// Neighbor table of a circuit under the succinct numbering: gate 0 is the
/// sink, the output gate is 1, the other gates follow in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuccinctGate {
    /// Neighbors 0..4 (two predecessors, two successors; 0 when missing).
    pub neighbors: [usize; 4],
    pub type_code: usize,
}

/// Describe `c` (normalized to out-degree at most 2) by a sum-of-products
/// multiplexer `S`. Returns the instance and the succinct index of every
/// gate of the normalized circuit, plus that circuit.
///
/// Besides `S(i, k) = (j, type of j)` for real gates, the sink answers
/// `S(0, 0) = (1, type of gate 1)` so the output gate's type can be read.
pub fn synthesize_succinct_instance(c: &Circuit) -> Result<(SuccinctCircuitInstance, Vec<usize>, Circuit)> {
    let out = match c.outputs() {
        [o] => *o,
        outs => {
            return Err(Error::InvalidArgument(format!(
                "circuit value instances need exactly one output, found {}",
                outs.len()
            )))
        }
    };
    let c = c.normalize_out_degree();
    let n = c.len();
    let mut index = vec![0usize; n];
    index[out] = 1;
    let mut next = 2;
    for (g, slot) in index.iter_mut().enumerate() {
        if g != out {
            *slot = next;
            next += 1;
        }
    }
    let mut table: BTreeMap<usize, SuccinctGate> = BTreeMap::new();
    for (g, gate) in c.gates().iter().enumerate() {
        let mut neighbors = [0usize; 4];
        for (k, &p) in gate.inputs.iter().enumerate() {
            neighbors[k] = index[p];
        }
        table.insert(index[g], SuccinctGate { neighbors, type_code: type_code(gate.kind)? });
    }
    for (g, gate) in c.gates().iter().enumerate() {
        for &p in &gate.inputs {
            let slot = table.get_mut(&index[p]).expect("every gate is numbered");
            let free = slot.neighbors[2..].iter().position(|&x| x == 0).expect("out-degree normalized to 2");
            slot.neighbors[2 + free] = index[g];
        }
    }
    let width = (usize::BITS - n.leading_zeros()).max(1) as usize;
    let type_of = |j: usize| {
        if j == 0 {
            ty::SINK
        } else {
            table[&j].type_code
        }
    };
    let mut rows: Vec<(usize, usize, usize, usize)> = Vec::new();
    rows.push((0, 0, 1, type_of(1)));
    for k in 1..4 {
        rows.push((0, k, 0, ty::SINK));
    }
    for (&i, gate) in &table {
        for k in 0..4 {
            let j = gate.neighbors[k];
            rows.push((i, k, j, type_of(j)));
        }
    }
    let s = multiplexer(width, &rows)?;
    Ok((SuccinctCircuitInstance::new(s, width)?, index, c))
}

/// Sum-of-products circuit over inputs (i bits, k bits) that outputs
/// (j bits, type bits) for the listed rows and (0, SINK) elsewhere.
fn multiplexer(width: usize, rows: &[(usize, usize, usize, usize)]) -> Result<Circuit> {
    let mut b = CircuitBuilder::new();
    let ins: Vec<usize> = (0..width + 2).map(|_| b.input()).collect();
    let negs: Vec<usize> = ins.iter().map(|&x| b.not(x)).collect();
    let listed: Vec<usize> = rows.iter().map(|&(i, k, _, _)| i | k << width).collect();
    let minterm = |b: &mut CircuitBuilder, code: usize| {
        let lits: Vec<usize> = (0..width + 2).map(|q| if code >> q & 1 == 1 { ins[q] } else { negs[q] }).collect();
        b.and_all(&lits)
    };
    let mut terms: Vec<(usize, usize)> = Vec::new();
    for &(i, k, j, t) in rows {
        let word = j | t << width;
        if word != 0 {
            terms.push((minterm(&mut b, i | k << width), word));
        }
    }
    // unlisted addresses default to type SINK
    let default_t = ty::SINK << width;
    let unlisted: Vec<usize> = (0..1usize << (width + 2)).filter(|code| !listed.contains(code)).collect();
    for code in unlisted {
        terms.push((minterm(&mut b, code), default_t));
    }
    let mut outs = Vec::with_capacity(width + ty::BITS);
    for bit in 0..width + ty::BITS {
        let wires: Vec<usize> = terms.iter().filter(|(_, w)| w >> bit & 1 == 1).map(|(g, _)| *g).collect();
        outs.push(b.or_all(&wires));
    }
    b.finish(outs)
}

/// Rebuild the described circuit by walking predecessors from gate 1.
/// Returns the circuit (gate names `n<index>`) and the succinct index of
/// each of its gates.
pub fn decode_succinct_instance(s: &SuccinctCircuitInstance) -> Result<(Circuit, Vec<usize>)> {
    let malformed = |msg: String| Error::InvalidArgument(format!("malformed succinct instance: {msg}"));
    let (first, t_first) = s.query(0, 0)?;
    if first != 1 {
        return Err(malformed("S(0, 0) must name gate 1".into()));
    }
    let mut order: Vec<(usize, usize)> = vec![(1, t_first)];
    let mut position: BTreeMap<usize, usize> = BTreeMap::from([(1, 0)]);
    let mut preds: Vec<Vec<usize>> = Vec::new();
    let mut k = 0;
    while k < order.len() {
        let (i, t) = order[k];
        let arity = match t {
            ty::AND | ty::OR => 2,
            ty::NOT => 1,
            ty::CONST0 | ty::CONST1 => 0,
            other => return Err(malformed(format!("gate {i} has type code {other}"))),
        };
        let mut ins = Vec::with_capacity(arity);
        for sel in 0..arity {
            let (j, tj) = s.query(i, sel)?;
            if j == 0 {
                return Err(malformed(format!("gate {i} lacks predecessor {sel}")));
            }
            let pos = match position.get(&j) {
                Some(&p) => {
                    if order[p].1 != tj {
                        return Err(malformed(format!("gate {j} reported with two types")));
                    }
                    p
                }
                None => {
                    order.push((j, tj));
                    position.insert(j, order.len() - 1);
                    order.len() - 1
                }
            };
            ins.push(pos);
        }
        preds.push(ins);
        k += 1;
    }
    let gates = order
        .iter()
        .zip(preds)
        .map(|(&(i, t), inputs)| Gate {
            name: format!("n{i}"),
            kind: match t {
                ty::AND => GateKind::And,
                ty::OR => GateKind::Or,
                ty::NOT => GateKind::Not,
                ty::CONST0 => GateKind::Const(false),
                _ => GateKind::Const(true),
            },
            inputs,
        })
        .collect();
    let c = Circuit::new(gates, vec![0])?;
    Ok((c, order.iter().map(|&(i, _)| i).collect()))
}

/// Reward size of the succinct gadget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExponentMode {
    /// Reward `2^(2^(|S| + k + 1))`, available only bitwise.
    Production,
    /// Reward `2^w`, small enough to materialize.
    Test(u64),
}

/// Fluent roles of the succinct circuit-value 2TBN.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuccinctCvpLayout {
    /// Gate index bits, least significant first.
    pub index: Vec<usize>,
    pub parity: usize,
    /// Gate type bits, least significant first.
    pub types: [usize; 3],
    pub random: usize,
    /// Neighbor selector fed to `S`.
    pub select: usize,
    /// Bit index at which the paying reward has its single 1 bit.
    pub reward_bit: BigUint,
}

impl SuccinctCvpLayout {
    pub fn gate_of(&self, state: &[bool]) -> usize {
        self.index.iter().enumerate().fold(0, |acc, (b, &f)| acc | (state[f] as usize) << b)
    }

    pub fn type_of(&self, state: &[bool]) -> usize {
        self.types.iter().enumerate().fold(0, |acc, (b, &f)| acc | (state[f] as usize) << b)
    }
}

/// See [`succinct_cvp_to_2tbn_with_layout`].
pub fn succinct_cvp_to_2tbn(s: &SuccinctCircuitInstance, k_gap: u64, mode: ExponentMode) -> Result<GadgetOutput> {
    Ok(succinct_cvp_to_2tbn_with_layout(s, k_gap, mode)?.0)
}

fn type_bits(code: usize) -> [bool; 3] {
    [code & 1 == 1, code & 2 == 2, code & 4 == 4]
}

fn decode_type(bits: &[bool]) -> usize {
    bits.iter().enumerate().fold(0, |acc, (b, &x)| acc | (x as usize) << b)
}

/// Player picks the predecessor.
fn chooses(t: usize, p: bool) -> bool {
    (t == ty::OR && !p) || (t == ty::AND && p)
}

/// A coin picks the predecessor.
fn randomizes(t: usize, p: bool) -> bool {
    (t == ty::OR && p) || (t == ty::AND && !p)
}

fn moves(t: usize) -> bool {
    matches!(t, ty::AND | ty::OR | ty::NOT)
}

#[cfg(test)]
fn pays(t: usize, p: bool) -> bool {
    (t == ty::CONST1 && !p) || (t == ty::CONST0 && p)
}

/// 2TBN over fluents (gate index, parity, type, coin, selector, gates of
/// `S`) that walks the described circuit exactly like [`cvp_to_mdp`]
/// walks the explicit one. `S` is embedded gate by gate; its index inputs
/// read the current gate, its selector input reads the next-step selector.
///
/// [`cvp_to_mdp`]: crate::reductions::cvp_to_mdp
pub fn succinct_cvp_to_2tbn_with_layout(
    s: &SuccinctCircuitInstance,
    k_gap: u64,
    mode: ExponentMode,
) -> Result<(GadgetOutput, SuccinctCvpLayout)> {
    let l = s.width;
    let sc = &s.circuit;
    let (first, t_first) = s.query(0, 0)?;
    if first != 1 {
        return Err(Error::InvalidArgument("S(0, 0) must name gate 1, the output gate".into()));
    }
    let mut fluents: Vec<String> = (1..=l).map(|c| format!("i{c}")).collect();
    let parity = fluents.len();
    fluents.push("p".into());
    let types = [parity + 1, parity + 2, parity + 3];
    fluents.extend(["t1".to_string(), "t2".into(), "t3".into()]);
    let random = fluents.len();
    fluents.push("r".into());
    let select = fluents.len();
    fluents.push("sel".into());
    let zero = fluents.len();
    fluents.push("k2".into());
    let mut gate_fluent = vec![None; sc.len()];
    for (g, gate) in sc.gates().iter().enumerate() {
        if gate.kind != GateKind::Input {
            gate_fluent[g] = Some(fluents.len());
            fluents.push(format!("s_{}", gate.name));
        }
    }
    let inputs = sc.input_gates();
    // parent through which a gate of S is read in the next slice
    let wire = |g: usize| -> Parent {
        match gate_fluent[g] {
            Some(f) => Parent::Next(f),
            None => {
                let pos = inputs.iter().position(|&x| x == g).expect("input gate");
                if pos < l {
                    Parent::Current(pos)
                } else if pos == l {
                    Parent::Next(select)
                } else {
                    Parent::Next(zero)
                }
            }
        }
    };
    let tcur: Vec<Parent> = types.iter().map(|&f| Parent::Current(f)).collect();
    let outs = sc.outputs();
    let mut actions = Vec::with_capacity(2);
    for a in 0..2usize {
        let mut cpts: Vec<FluentCpt> = Vec::with_capacity(fluents.len());
        for &out in &outs[..l] {
            let mut parents = tcur.clone();
            parents.push(wire(out));
            cpts.push(FluentCpt::deterministic(parents, |b| moves(decode_type(&b[..3])) && b[3]));
        }
        let mut parents = tcur.clone();
        parents.push(Parent::Current(parity));
        cpts.push(FluentCpt::deterministic(parents, |b| {
            let t = decode_type(&b[..3]);
            if t == ty::NOT {
                !b[3]
            } else {
                b[3]
            }
        }));
        for bit in 0..3 {
            let mut parents = tcur.clone();
            parents.push(wire(outs[l + bit]));
            cpts.push(FluentCpt::deterministic(parents, move |b| {
                let t = decode_type(&b[..3]);
                if moves(t) {
                    b[3]
                } else {
                    type_bits(ty::SINK)[bit]
                }
            }));
        }
        // coin
        let mut parents = tcur.clone();
        parents.push(Parent::Current(parity));
        let coin = (0..16)
            .map(|row| {
                let b = crate::model::tbn::row_bits(row, 4);
                if randomizes(decode_type(&b[..3]), b[3]) {
                    rat::rat(1, 2)
                } else {
                    Rat::one()
                }
            })
            .collect();
        cpts.push(FluentCpt::new(parents, coin));
        // selector
        let mut parents = tcur.clone();
        parents.push(Parent::Current(parity));
        parents.push(Parent::Next(random));
        cpts.push(FluentCpt::deterministic(parents, move |b| {
            let (t, p, r) = (decode_type(&b[..3]), b[3], b[4]);
            if chooses(t, p) {
                a == 1
            } else if randomizes(t, p) {
                r
            } else {
                false
            }
        }));
        cpts.push(FluentCpt::new(vec![], vec![Rat::zero()]));
        for gate in sc.gates() {
            let parents: Vec<Parent> = gate.inputs.iter().map(|&g| wire(g)).collect();
            let cpt = match gate.kind {
                GateKind::Input => continue,
                GateKind::And => FluentCpt::deterministic(parents, |b| b[0] && b[1]),
                GateKind::Or => FluentCpt::deterministic(parents, |b| b[0] || b[1]),
                GateKind::Not => FluentCpt::deterministic(parents, |b| !b[0]),
                GateKind::Const(v) => FluentCpt::deterministic(parents, move |_| v),
            };
            cpts.push(cpt);
        }
        actions.push(cpts);
    }
    let mut initial = vec![false; fluents.len()];
    initial[0] = true;
    for (bit, &f) in types.iter().enumerate() {
        initial[f] = type_bits(t_first)[bit];
    }
    initial[random] = true;

    let (reward_bit, index_bits) = match mode {
        ExponentMode::Production => {
            let e = sc.len() as u64 + k_gap + 1;
            (BigUint::one() << e, e as usize + 2)
        }
        ExponentMode::Test(w) => (BigUint::from(w), (u64::BITS - w.leading_zeros()).max(1) as usize),
    };
    let reward = reward_circuit(fluents.len(), parity, types, &reward_bit, index_bits)?;
    let tbn = Tbn::new(fluents, actions, initial, TbnReward::Circuit(reward))?;
    let h = 2 * (1usize << l) + 1;
    let metric = Metric::total(h);
    let claims = match mode {
        ExponentMode::Production => Vec::new(),
        ExponentMode::Test(w) => {
            let r = rat::pow2(w);
            vec![Claim {
                class: PolicyClass::Stationary,
                metric: metric.clone(),
                no: Bound::Le(&r - rat::int(2 * k_gap as i64)),
                yes: Bound::Eq(r),
            }]
        }
    };
    let layout = SuccinctCvpLayout { index: (0..l).collect(), parity, types, random, select, reward_bit };
    let out = GadgetOutput {
        model: GadgetModel::Tbn(tbn),
        recommended_horizon: h,
        recommended_metric: metric,
        claims,
        ssat_layout: None,
    };
    Ok((out, layout))
}

/// Outputs 1 exactly on bit index `target` of states whose gate pays.
fn reward_circuit(
    n_fluents: usize,
    parity: usize,
    types: [usize; 3],
    target: &BigUint,
    index_bits: usize,
) -> Result<SuccinctReward> {
    let mut b = CircuitBuilder::new();
    let state: Vec<usize> = (0..n_fluents).map(|_| b.input()).collect();
    let _action = b.input();
    let index: Vec<usize> = (0..index_bits).map(|_| b.input()).collect();
    let mut lits = Vec::with_capacity(index_bits);
    for (q, &w) in index.iter().enumerate() {
        lits.push(if target.bit(q as u64) { w } else { b.not(w) });
    }
    let at_target = b.and_all(&lits);
    let code = |b: &mut CircuitBuilder, code: usize| {
        let l: Vec<usize> = (0..3)
            .map(|bit| {
                let w = state[types[bit]];
                if code >> bit & 1 == 1 {
                    w
                } else {
                    b.not(w)
                }
            })
            .collect();
        b.and_all(&l)
    };
    let one = code(&mut b, ty::CONST1);
    let zero = code(&mut b, ty::CONST0);
    let p = state[parity];
    let np = b.not(p);
    let even_one = b.and(one, np);
    let odd_zero = b.and(zero, p);
    let paying = b.or(even_one, odd_zero);
    let out = b.and(paying, at_target);
    let circuit = b.finish(vec![out])?;
    SuccinctReward::new(circuit, n_fluents, 1, index_bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TbnReward;

    fn or_of_constants() -> Circuit {
        let mut b = CircuitBuilder::new();
        let t = b.constant(true);
        let f = b.constant(false);
        let o = b.or(t, f);
        b.finish(vec![o]).unwrap()
    }

    #[test]
    fn multiplexer_reproduces_table() {
        let c = or_of_constants();
        let (s, index, c) = synthesize_succinct_instance(&c).unwrap();
        assert_eq!(s.width, 2);
        let out = c.outputs()[0];
        assert_eq!(s.query(0, 0).unwrap(), (1, ty::OR));
        let preds = &c.gate(out).inputs;
        assert_eq!(s.query(1, 0).unwrap(), (index[preds[0]], ty::CONST1));
        assert_eq!(s.query(1, 1).unwrap(), (index[preds[1]], ty::CONST0));
        assert_eq!(s.query(1, 2).unwrap(), (0, ty::SINK));
        assert_eq!(s.query(index[preds[0]], 2).unwrap(), (1, ty::OR));
    }

    #[test]
    fn decode_inverts_synthesis() {
        let c = or_of_constants();
        let (s, index, c) = synthesize_succinct_instance(&c).unwrap();
        let (d, idx) = decode_succinct_instance(&s).unwrap();
        assert_eq!(d.len(), c.len());
        for (g, gate) in d.gates().iter().enumerate() {
            let orig = index.iter().position(|&x| x == idx[g]).unwrap();
            assert_eq!(gate.kind, c.gate(orig).kind);
        }
        assert_eq!(d.eval(&[]).unwrap(), c.eval(&[]).unwrap());
    }

    #[test]
    fn coin_cpt_matches_rule() {
        let (s, _, _) = synthesize_succinct_instance(&or_of_constants()).unwrap();
        let (g, layout) = succinct_cvp_to_2tbn_with_layout(&s, 1, ExponentMode::Test(5)).unwrap();
        let t = g.tbn().unwrap();
        let cpt = &t.model(0, layout.random);
        for row in 0..16 {
            let b = crate::model::tbn::row_bits(row, 4);
            let code = decode_type(&b[..3]);
            let want = if randomizes(code, b[3]) { rat::rat(1, 2) } else { Rat::one() };
            assert_eq!(cpt.cpt[row], want);
        }
    }

    #[test]
    fn production_reward_bit() {
        let (s, _, _) = synthesize_succinct_instance(&or_of_constants()).unwrap();
        let (g, layout) = succinct_cvp_to_2tbn_with_layout(&s, 1, ExponentMode::Production).unwrap();
        let t = g.tbn().unwrap();
        let TbnReward::Circuit(r) = t.reward_spec() else { panic!("circuit reward expected") };
        let e = s.circuit.len() as u64 + 2;
        assert_eq!(layout.reward_bit, BigUint::one() << e);
        let mut state = vec![false; t.n_fluents()];
        // CONST1 at even parity pays
        for (bit, &f) in layout.types.iter().enumerate() {
            state[f] = type_bits(ty::CONST1)[bit];
        }
        assert!(r.bit(&state, 0, &layout.reward_bit).unwrap());
        assert!(!r.bit(&state, 0, &(&layout.reward_bit - 1u32)).unwrap());
        assert!(!r.bit(&state, 0, &BigUint::zero()).unwrap());
        state[layout.parity] = true;
        assert!(!r.bit(&state, 0, &layout.reward_bit).unwrap());
        for code in 0..8 {
            for p in [false, true] {
                for (bit, &f) in layout.types.iter().enumerate() {
                    state[f] = type_bits(code)[bit];
                }
                state[layout.parity] = p;
                assert_eq!(r.bit(&state, 1, &layout.reward_bit).unwrap(), pays(code, p));
            }
        }
    }
}
