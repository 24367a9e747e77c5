//! End-to-end checks: compile a source instance, compute its ground truth
//! and the exact oracle value of the gadget, and compare with the claims.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::One;

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::io;
use crate::model::{Circuit, Cnf, Metric, ObservabilityClass, Pomdp, SsatFormula, SuccinctCircuitInstance};
use crate::oracles::{
    assignment_index, brute_force_stationary_value_pruned, brute_force_time_dependent_value, circuit_eval,
    exact_history_value, expand_2tbn, expand_2tbn_reachable, sat_enumerate, ssat_value,
};
use crate::rat::{self, Rat};
use crate::reductions::{
    amplify_uomdp, circuit_to_2tbn, cvp_reward_exponent, cvp_to_mdp, decode_succinct_instance, epsilon_gap_gadget,
    infinite_horizon_sat_gadget, ssat_repeat, ssat_to_pomdp, succinct_cvp_to_2tbn_with_layout, threesat_to_pomdp,
    threesat_to_uomdp, Claim, ExponentMode, GadgetOutput, PolicyClass,
};

/// A problem instance in one of the supported source formats.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Cnf(Cnf),
    Ssat(SsatFormula),
    Circuit(Circuit),
    Succinct(SuccinctCircuitInstance),
}

/// Sniff the format: `SUCCINCT v1` header, netlist keywords, DIMACS with
/// quantifier lines, or plain DIMACS.
pub fn parse_source(text: &str) -> Result<Source> {
    let first =
        text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('#') && !l.starts_with('c')).unwrap_or("");
    if first == "SUCCINCT v1" {
        return io::parse_succinct(text).map(Source::Succinct);
    }
    if first.starts_with("gate ") || first.starts_with("output ") {
        return io::parse_circuit(text).map(Source::Circuit);
    }
    let quantified = text.lines().map(str::trim).any(|l| l.starts_with("e ") || l.starts_with("r "));
    if quantified {
        io::parse_ssat(text).map(Source::Ssat)
    } else {
        io::parse_cnf(text).map(Source::Cnf)
    }
}

/// Which compiler to run on a source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Construction {
    Sat3,
    Gap(Rat),
    Uomdp,
    Amplify(Option<Rat>),
    Inf,
    Ssat { c: u32, k: usize },
    Cvp { gap: u64 },
    Tbn,
    SuccinctCvp { gap: u64, exponent: Option<u64> },
}

impl Construction {
    pub fn default_for(src: &Source) -> Construction {
        match src {
            Source::Cnf(_) => Construction::Sat3,
            Source::Ssat(_) => Construction::Ssat { c: 1, k: 1 },
            Source::Circuit(_) => Construction::Cvp { gap: 1 },
            Source::Succinct(_) => Construction::SuccinctCvp { gap: 1, exponent: None },
        }
    }
}

/// One compared quantity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub claim: String,
    pub value: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub construction: String,
    pub instance: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "construction: {}", self.construction)?;
        writeln!(f, "instance: {}", self.instance)?;
        for c in &self.checks {
            writeln!(f, "claim: {}", c.claim)?;
            writeln!(f, "oracle value: {}", c.value)?;
            writeln!(f, "{}", if c.pass { "PASS" } else { "FAIL" })?;
        }
        Ok(())
    }
}

/// Exact optimum over a policy class. Time-dependent values of
/// unobservable models come from the history oracle, which coincides with
/// them there and avoids enumerating action sequences.
pub fn oracle_value(m: &Pomdp, class: PolicyClass, metric: &Metric, caps: &Caps) -> Result<Rat> {
    Ok(match class {
        PolicyClass::Stationary => brute_force_stationary_value_pruned(m, metric, caps)?.value,
        PolicyClass::TimeDependent if m.observability() == ObservabilityClass::Unobservable => {
            exact_history_value(m, metric, caps)?.value
        }
        PolicyClass::TimeDependent => brute_force_time_dependent_value(m, metric, caps)?.value,
        PolicyClass::History => exact_history_value(m, metric, caps)?.value,
    })
}

fn check_claims(m: &Pomdp, claims: &[Claim], yes: bool, caps: &Caps) -> Result<Vec<Check>> {
    claims
        .iter()
        .map(|claim| {
            let v = oracle_value(m, claim.class, &claim.metric, caps)?;
            Ok(Check { claim: claim.to_string(), value: rat::fmt(&v), pass: claim.check(yes, &v) })
        })
        .collect()
}

fn pomdp_of(g: &GadgetOutput) -> Result<&Pomdp> {
    g.pomdp().ok_or_else(|| Error::InvalidArgument("gadget is not a flat POMDP".into()))
}

fn yes_no(yes: bool, yes_text: &str, no_text: &str) -> String {
    if yes { yes_text } else { no_text }.to_string()
}

/// Compile `src` with `how` and check every claim of the result.
pub fn verify_source(src: &Source, how: &Construction, caps: &Caps) -> Result<Report> {
    let mismatch = || Error::InvalidArgument(format!("construction {how:?} does not apply to this source"));
    match (src, how) {
        (Source::Cnf(phi), _) => {
            let sat = sat_enumerate(phi, caps)?.satisfiable;
            let (name, g) = match how {
                Construction::Sat3 => ("sat3".to_string(), threesat_to_pomdp(phi)),
                Construction::Gap(eps) => (format!("sat3 gap eps={}", rat::fmt(eps)), epsilon_gap_gadget(phi, eps)?),
                Construction::Uomdp => ("uomdp".to_string(), threesat_to_uomdp(phi)),
                Construction::Amplify(None) => ("sat3 amplified".to_string(), amplify_uomdp(phi, None)?),
                Construction::Amplify(Some(b)) => {
                    (format!("sat3 amplified discount={}", rat::fmt(b)), amplify_uomdp(phi, Some(b))?)
                }
                Construction::Inf => ("inf".to_string(), infinite_horizon_sat_gadget(phi)),
                _ => return Err(mismatch()),
            };
            let checks = check_claims(pomdp_of(&g)?, &g.claims, sat, caps)?;
            Ok(Report { construction: name, instance: yes_no(sat, "satisfiable", "unsatisfiable"), checks })
        }
        (Source::Ssat(phi), Construction::Ssat { c, k }) => {
            let v = ssat_value(phi, caps)?;
            let err = Rat::one() / rat::pow2(*c as u64);
            let yes = if v > &Rat::one() - &err {
                true
            } else if v < err {
                false
            } else {
                return Ok(Report {
                    construction: format!("ssat c={c} k={k}"),
                    instance: format!("satisfaction probability {} lies outside the promise", rat::fmt(&v)),
                    checks: Vec::new(),
                });
            };
            let g = ssat_repeat(&ssat_to_pomdp(phi), *k, *c)?;
            let checks = check_claims(pomdp_of(&g)?, &g.claims, yes, caps)?;
            Ok(Report {
                construction: format!("ssat c={c} k={k}"),
                instance: format!("satisfaction probability {}", rat::fmt(&v)),
                checks,
            })
        }
        (Source::Circuit(c), Construction::Cvp { gap }) => {
            let yes = circuit_eval(c)?[0];
            let g = cvp_to_mdp(c, *gap)?;
            let checks = check_claims(pomdp_of(&g)?, &g.claims, yes, caps)?;
            Ok(Report { construction: format!("cvp gap={gap}"), instance: yes_no(yes, "value 1", "value 0"), checks })
        }
        (Source::Circuit(c), Construction::Tbn) => Ok(Report {
            construction: "tbn".into(),
            instance: format!("{} gates, {} inputs", c.len(), c.n_inputs()),
            checks: circuit_tbn_checks(c, caps)?,
        }),
        (Source::Succinct(s), Construction::SuccinctCvp { gap, exponent }) => {
            let (c, index) = decode_succinct_instance(s)?;
            let yes = circuit_eval(&c)?[0];
            let w = exponent.unwrap_or_else(|| cvp_reward_exponent(&c, *gap));
            let st = succinct_structure(s, &c, &index, *gap, w, caps)?;
            let mut checks = vec![Check {
                claim: format!("expanded 2TBN lumps onto the {}-gate explicit MDP", c.len()),
                value: format!("{} expanded states, {} mismatches", st.expanded_states, st.mismatches.len()),
                pass: st.mismatches.is_empty(),
            }];
            let (g, _) = succinct_cvp_to_2tbn_with_layout(s, *gap, ExponentMode::Test(w))?;
            let (m, _) = expand_2tbn_reachable(g.tbn().expect("2TBN gadget"), caps)?;
            checks.extend(check_claims(&m, &g.claims, yes, caps)?);
            Ok(Report {
                construction: format!("succinct-cvp gap={gap} exponent={w}"),
                instance: yes_no(yes, "value 1", "value 0"),
                checks,
            })
        }
        _ => Err(mismatch()),
    }
}

/// One-step agreement between the circuit 2TBN and direct evaluation, for
/// every input assignment, plus the fluent budget.
pub fn circuit_tbn_checks(c: &Circuit, caps: &Caps) -> Result<Vec<Check>> {
    let (t, layout) = circuit_to_2tbn(c)?;
    let m = expand_2tbn(&t, caps)?;
    let mut agree = 0usize;
    let n_in = c.n_inputs();
    for x in 0..1usize << n_in {
        let inputs: Vec<bool> = (0..n_in).map(|b| x >> b & 1 == 1).collect();
        let mut state = t.initial().to_vec();
        for (k, &f) in layout.inputs.iter().enumerate() {
            state[f] = inputs[k];
        }
        let row = m.row(assignment_index(&state), 0);
        let want = c.eval(&inputs)?;
        let ok = match row {
            [(next, p)] if p.is_one() => {
                let bits = crate::oracles::index_assignment(*next, t.n_fluents());
                layout.outputs.iter().zip(&want).all(|(&f, &w)| bits[f] == w)
            }
            _ => false,
        };
        agree += ok as usize;
    }
    let total = 1usize << n_in;
    Ok(vec![
        Check {
            claim: "one step reproduces every output with probability 1".into(),
            value: format!("{agree}/{total} input assignments agree"),
            pass: agree == total,
        },
        Check {
            claim: format!("at most {} fluents", 2 * c.len()),
            value: format!("{} fluents", t.n_fluents()),
            pass: t.n_fluents() <= 2 * c.len(),
        },
    ])
}

/// Outcome of lumping the expanded succinct 2TBN onto the explicit
/// (gate, parity) MDP.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureReport {
    pub expanded_states: usize,
    pub explicit_reachable: usize,
    pub mismatches: Vec<String>,
}

/// Expand the test-mode 2TBN of `s` (reward `2^w`) over its reachable
/// assignments and project each onto (gate, parity) of `c`, where gate `g`
/// of `c` has succinct index `index[g]`. Every projected row must equal the
/// corresponding row of `cvp_to_mdp(c)` and every reward must equal its
/// explicit reward with the payout rescaled to `2^w`. The projected
/// states must be exactly the explicit model's reachable states.
pub fn succinct_structure(
    s: &SuccinctCircuitInstance,
    c: &Circuit,
    index: &[usize],
    k_gap: u64,
    w: u64,
    caps: &Caps,
) -> Result<StructureReport> {
    let (g, layout) = succinct_cvp_to_2tbn_with_layout(s, k_gap, ExponentMode::Test(w))?;
    let t = g.tbn().expect("2TBN gadget");
    let (big, states) = expand_2tbn_reachable(t, caps)?;
    let cvp = cvp_to_mdp(c, k_gap)?;
    let small = pomdp_of(&cvp)?;
    let sink = 2 * c.len();
    let rescale = rat::pow2(w) / rat::pow2(cvp_reward_exponent(c, k_gap));
    let gate_of: BTreeMap<usize, usize> = index.iter().enumerate().map(|(g, &i)| (i, g)).collect();
    let mut mismatches = Vec::new();
    let project = |x: &[bool]| -> Option<usize> {
        let i = layout.gate_of(x);
        if i == 0 {
            return Some(sink);
        }
        gate_of.get(&i).map(|&g| 2 * g + x[layout.parity] as usize)
    };
    let mut image = vec![false; small.n_states()];
    for (x, bits) in states.iter().enumerate() {
        let Some(px) = project(bits) else {
            mismatches.push(format!("state {x} names gate {} outside the circuit", layout.gate_of(bits)));
            continue;
        };
        image[px] = true;
        for a in 0..big.n_actions() {
            let mut lumped: BTreeMap<usize, Rat> = BTreeMap::new();
            for (y, p) in big.row(x, a) {
                match project(&states[*y]) {
                    Some(py) => *lumped.entry(py).or_default() += p,
                    None => mismatches.push(format!("successor {y} of state {x} leaves the circuit")),
                }
            }
            let want: BTreeMap<usize, Rat> = small.row(px, a).iter().cloned().collect();
            if lumped != want {
                mismatches.push(format!("state {x} (explicit {px}), action {a}: rows differ"));
            }
            let expected = small.reward(px, a) * &rescale;
            if *big.reward(x, a) != expected {
                mismatches.push(format!(
                    "state {x} (explicit {px}), action {a}: reward {} vs {}",
                    rat::fmt(big.reward(x, a)),
                    rat::fmt(&expected)
                ));
            }
        }
    }
    if project(&states[0]) != Some(small.initial()) {
        mismatches.push("initial states differ".into());
    }
    let reach = small.reachable();
    if image != reach {
        mismatches.push("projected states differ from the explicit reachable set".into());
    }
    Ok(StructureReport {
        expanded_states: big.n_states(),
        explicit_reachable: reach.iter().filter(|&&r| r).count(),
        mismatches,
    })
}
