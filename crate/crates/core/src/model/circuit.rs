use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    And,
    Or,
    Not,
    Const(bool),
    /// Free input wire, bound at evaluation time in declaration order.
    Input,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::And | GateKind::Or => 2,
            GateKind::Not => 1,
            GateKind::Const(_) | GateKind::Input => 0,
        }
    }

    pub fn is_source(self) -> bool {
        self.arity() == 0
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateKind::And => write!(f, "AND"),
            GateKind::Or => write!(f, "OR"),
            GateKind::Not => write!(f, "NOT"),
            GateKind::Const(b) => write!(f, "CONST {}", *b as u8),
            GateKind::Input => write!(f, "INPUT"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Gate {
    pub name: String,
    pub kind: GateKind,
    pub inputs: Vec<usize>,
}

/// A Boolean circuit: gates reference earlier or later gates by index, and
/// the references must form a DAG.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Circuit {
    gates: Vec<Gate>,
    outputs: Vec<usize>,
    order: Vec<usize>,
}

impl Circuit {
    pub fn new(gates: Vec<Gate>, outputs: Vec<usize>) -> Result<Self> {
        let mut names = HashMap::new();
        for (i, g) in gates.iter().enumerate() {
            if names.insert(g.name.as_str(), i).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate gate id {:?}", g.name)));
            }
            if g.inputs.len() != g.kind.arity() {
                return Err(Error::InvalidArgument(format!(
                    "gate {:?} ({}) has {} inputs, expected {}",
                    g.name,
                    g.kind,
                    g.inputs.len(),
                    g.kind.arity()
                )));
            }
            if let Some(&bad) = g.inputs.iter().find(|&&j| j >= gates.len()) {
                return Err(Error::InvalidArgument(format!("gate {:?} references unknown gate {bad}", g.name)));
            }
        }
        if let Some(&bad) = outputs.iter().find(|&&o| o >= gates.len()) {
            return Err(Error::InvalidArgument(format!("output references unknown gate {bad}")));
        }
        let order = topo_order(&gates)?;
        Ok(Circuit { gates, outputs, order })
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, i: usize) -> &Gate {
        &self.gates[i]
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    /// Gate indices with every gate after all of its inputs.
    pub fn topological_order(&self) -> &[usize] {
        &self.order
    }

    /// Indices of `Input` gates in declaration order.
    pub fn input_gates(&self) -> Vec<usize> {
        (0..self.gates.len()).filter(|&i| self.gates[i].kind == GateKind::Input).collect()
    }

    pub fn n_inputs(&self) -> usize {
        self.gates.iter().filter(|g| g.kind == GateKind::Input).count()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.gates.iter().position(|g| g.name == name)
    }

    /// Value of every gate given the input bits.
    pub fn gate_values(&self, inputs: &[bool]) -> Result<Vec<bool>> {
        let input_gates = self.input_gates();
        if inputs.len() != input_gates.len() {
            return Err(Error::InvalidArgument(format!(
                "circuit has {} inputs, got {}",
                input_gates.len(),
                inputs.len()
            )));
        }
        let mut val = vec![false; self.gates.len()];
        for (k, &g) in input_gates.iter().enumerate() {
            val[g] = inputs[k];
        }
        for &i in &self.order {
            let g = &self.gates[i];
            val[i] = match g.kind {
                GateKind::And => val[g.inputs[0]] && val[g.inputs[1]],
                GateKind::Or => val[g.inputs[0]] || val[g.inputs[1]],
                GateKind::Not => !val[g.inputs[0]],
                GateKind::Const(b) => b,
                GateKind::Input => val[i],
            };
        }
        Ok(val)
    }

    /// Output bits in declared order.
    pub fn eval(&self, inputs: &[bool]) -> Result<Vec<bool>> {
        let val = self.gate_values(inputs)?;
        Ok(self.outputs.iter().map(|&o| val[o]).collect())
    }

    /// Number of gates reading each gate.
    pub fn out_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.gates.len()];
        for g in &self.gates {
            for &j in &g.inputs {
                deg[j] += 1;
            }
        }
        deg
    }

    /// Longest path, in gates, from any source to each gate (sources have 0).
    pub fn depths(&self) -> Vec<usize> {
        let mut d = vec![0; self.gates.len()];
        for &i in &self.order {
            d[i] = self.gates[i].inputs.iter().map(|&j| d[j] + 1).max().unwrap_or(0);
        }
        d
    }

    /// Equivalent circuit in which no gate feeds more than two gates.
    ///
    /// A gate with too many readers hands all but its own slot to a pair of
    /// double-negation copies; copies that are still overloaded split again.
    pub fn normalize_out_degree(&self) -> Circuit {
        let mut gates = self.gates.clone();
        let mut fresh = 0usize;
        let mut name = |gates: &Vec<Gate>| loop {
            let n = format!("_dup{fresh}");
            fresh += 1;
            if !gates.iter().any(|g| g.name == n) {
                return n;
            }
        };
        loop {
            let mut readers: Vec<Vec<(usize, usize)>> = vec![Vec::new(); gates.len()];
            for (i, g) in gates.iter().enumerate() {
                for (slot, &j) in g.inputs.iter().enumerate() {
                    readers[j].push((i, slot));
                }
            }
            let Some(over) = (0..gates.len()).find(|&j| readers[j].len() > 2) else {
                break;
            };
            let inv = gates.len();
            gates.push(Gate { name: name(&gates), kind: GateKind::Not, inputs: vec![over] });
            let left = gates.len();
            gates.push(Gate { name: name(&gates), kind: GateKind::Not, inputs: vec![inv] });
            let right = gates.len();
            gates.push(Gate { name: name(&gates), kind: GateKind::Not, inputs: vec![inv] });
            let rs = &readers[over];
            let half = rs.len().div_ceil(2);
            for (k, &(reader, slot)) in rs.iter().enumerate() {
                gates[reader].inputs[slot] = if k < half { left } else { right };
            }
        }
        Circuit::new(gates, self.outputs.clone()).expect("normalization preserves validity")
    }
}

fn topo_order(gates: &[Gate]) -> Result<Vec<usize>> {
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; gates.len()];
    let mut order = Vec::with_capacity(gates.len());
    for root in 0..gates.len() {
        if state[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        state[root] = 1;
        while let Some(&mut (g, ref mut next)) = stack.last_mut() {
            if *next < gates[g].inputs.len() {
                let j = gates[g].inputs[*next];
                *next += 1;
                match state[j] {
                    0 => {
                        state[j] = 1;
                        stack.push((j, 0));
                    }
                    1 => return Err(Error::Cycle(format!("gate {:?} depends on itself", gates[j].name))),
                    _ => {}
                }
            } else {
                state[g] = 2;
                order.push(g);
                stack.pop();
            }
        }
    }
    Ok(order)
}

/// Incremental construction with generated gate names.
#[derive(Debug, Default, Clone)]
pub struct CircuitBuilder {
    gates: Vec<Gate>,
}

impl CircuitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, kind: GateKind, inputs: Vec<usize>) -> usize {
        let i = self.gates.len();
        self.gates.push(Gate { name: format!("g{i}"), kind, inputs });
        i
    }

    pub fn input(&mut self) -> usize {
        self.push(GateKind::Input, vec![])
    }

    pub fn constant(&mut self, b: bool) -> usize {
        self.push(GateKind::Const(b), vec![])
    }

    pub fn not(&mut self, a: usize) -> usize {
        self.push(GateKind::Not, vec![a])
    }

    pub fn and(&mut self, a: usize, b: usize) -> usize {
        self.push(GateKind::And, vec![a, b])
    }

    pub fn or(&mut self, a: usize, b: usize) -> usize {
        self.push(GateKind::Or, vec![a, b])
    }

    /// Conjunction of any number of wires (constant 1 when empty).
    pub fn and_all(&mut self, wires: &[usize]) -> usize {
        match wires {
            [] => self.constant(true),
            [w] => *w,
            [w, rest @ ..] => {
                let r = self.and_all(rest);
                self.and(*w, r)
            }
        }
    }

    /// Disjunction of any number of wires (constant 0 when empty).
    pub fn or_all(&mut self, wires: &[usize]) -> usize {
        match wires {
            [] => self.constant(false),
            [w] => *w,
            [w, rest @ ..] => {
                let r = self.or_all(rest);
                self.or(*w, r)
            }
        }
    }

    pub fn xor(&mut self, a: usize, b: usize) -> usize {
        let either = self.or(a, b);
        let both = self.and(a, b);
        let not_both = self.not(both);
        self.and(either, not_both)
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn finish(self, outputs: Vec<usize>) -> Result<Circuit> {
        Circuit::new(self.gates, outputs)
    }
}

/// Three-input adder with outputs `(carry, sum)`.
pub fn full_adder() -> Circuit {
    let mut b = CircuitBuilder::new();
    let x = b.input();
    let y = b.input();
    let z = b.input();
    let xy = b.xor(x, y);
    let sum = b.xor(xy, z);
    let and_xy = b.and(x, y);
    let and_c = b.and(xy, z);
    let carry = b.or(and_xy, and_c);
    b.finish(vec![carry, sum]).expect("adder is acyclic")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gate(name: &str, kind: GateKind, inputs: Vec<usize>) -> Gate {
        Gate { name: name.into(), kind, inputs }
    }

    #[test]
    fn or_of_constants() {
        let c = Circuit::new(
            vec![
                gate("a", GateKind::Const(true), vec![]),
                gate("b", GateKind::Const(false), vec![]),
                gate("o", GateKind::Or, vec![0, 1]),
            ],
            vec![2],
        )
        .unwrap();
        assert_eq!(c.eval(&[]).unwrap(), vec![true]);
    }

    #[test]
    fn arity_and_cycles_rejected() {
        let bad = Circuit::new(vec![gate("n", GateKind::Not, vec![])], vec![0]);
        assert!(matches!(bad, Err(Error::InvalidArgument(_))));
        let cyc = Circuit::new(vec![gate("n", GateKind::Not, vec![0])], vec![0]);
        assert!(matches!(cyc, Err(Error::Cycle(_))));
        let fwd =
            Circuit::new(vec![gate("n", GateKind::Not, vec![1]), gate("c", GateKind::Const(false), vec![])], vec![0])
                .unwrap();
        assert_eq!(fwd.eval(&[]).unwrap(), vec![true]);
    }

    #[test]
    fn adder_truth_table() {
        let c = full_adder();
        for bits in 0..8u32 {
            let ins: Vec<bool> = (0..3).map(|k| bits >> k & 1 == 1).collect();
            let total = ins.iter().filter(|b| **b).count();
            assert_eq!(c.eval(&ins).unwrap(), vec![total >= 2, total % 2 == 1]);
        }
    }

    #[test]
    fn out_degree_normalization_preserves_function() {
        let mut b = CircuitBuilder::new();
        let x = b.input();
        let y = b.input();
        let gates: Vec<usize> = (0..5).map(|k| if k % 2 == 0 { b.and(x, y) } else { b.or(x, y) }).collect();
        let all = b.or_all(&gates);
        let c = b.finish(vec![all]).unwrap();
        assert!(c.out_degrees().iter().any(|&d| d > 2));
        let n = c.normalize_out_degree();
        assert!(n.out_degrees().iter().all(|&d| d <= 2));
        for bits in 0..4u32 {
            let ins = [bits & 1 == 1, bits & 2 == 2];
            assert_eq!(c.eval(&ins).unwrap(), n.eval(&ins).unwrap());
        }
    }
}
