use std::collections::HashSet;
use std::fmt::Write;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::model::{Labels, Pomdp};
use crate::rat;

use super::{content_lines, no_more, num, ratio};

/// Text form: header, sizes, one `obs` line per state, then every nonzero
/// transition and reward. Labels travel as `#label` comments.
pub fn serialize_pomdp(m: &Pomdp) -> String {
    let mut out = String::from("POMDP v1\n");
    if let Some(l) = m.labels() {
        for (kind, names) in [("state", &l.states), ("action", &l.actions), ("obs", &l.observations)] {
            for (i, name) in names.iter().enumerate() {
                writeln!(out, "#label {kind} {i} {name}").unwrap();
            }
        }
    }
    writeln!(out, "states {}", m.n_states()).unwrap();
    writeln!(out, "actions {}", m.n_actions()).unwrap();
    writeln!(out, "observations {}", m.n_obs()).unwrap();
    writeln!(out, "initial {}", m.initial()).unwrap();
    for s in 0..m.n_states() {
        writeln!(out, "obs {s} {}", m.obs(s)).unwrap();
    }
    for s in 0..m.n_states() {
        for a in 0..m.n_actions() {
            for (s2, p) in m.row(s, a) {
                writeln!(out, "T {a} {s} {s2} {}", rat::fmt(p)).unwrap();
            }
        }
    }
    for s in 0..m.n_states() {
        for a in 0..m.n_actions() {
            let r = m.reward(s, a);
            if !r.is_zero() {
                writeln!(out, "R {s} {a} {}", rat::fmt(r)).unwrap();
            }
        }
    }
    out
}

fn parse_labels(text: &str, m: &Pomdp) -> Result<Option<Labels>> {
    let mut labels = Labels {
        states: (0..m.n_states()).map(|s| format!("s{s}")).collect(),
        actions: (0..m.n_actions()).map(|a| format!("a{a}")).collect(),
        observations: (0..m.n_obs()).map(|o| format!("o{o}")).collect(),
    };
    let mut any = false;
    for (ln, raw) in text.lines().enumerate() {
        let Some(rest) = raw.trim().strip_prefix("#label ") else {
            continue;
        };
        let ln = ln + 1;
        let mut toks = rest.splitn(3, ' ');
        let kind = toks.next().unwrap_or("");
        let i: usize = num(ln, toks.next(), "label index")?;
        let name = toks.next().unwrap_or("").to_string();
        let slot = match kind {
            "state" => labels.states.get_mut(i),
            "action" => labels.actions.get_mut(i),
            "obs" => labels.observations.get_mut(i),
            _ => return Err(Error::parse(ln, format!("unknown label kind {kind:?}"))),
        };
        *slot.ok_or_else(|| Error::parse(ln, format!("label index {i} out of range")))? = name;
        any = true;
    }
    Ok(any.then_some(labels))
}

/// Inverse of [`serialize_pomdp`]. The loaded model must pass validation.
pub fn parse_pomdp(text: &str) -> Result<Pomdp> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, "POMDP v1")) => {}
        Some((ln, _)) => return Err(Error::parse(ln, "expected header \"POMDP v1\"")),
        None => return Err(Error::parse(1, "empty file")),
    }
    let mut sizes = [None::<usize>; 4];
    let keys = ["states", "actions", "observations", "initial"];
    let mut m: Option<Pomdp> = None;
    let mut seen_t = HashSet::new();
    let mut seen_r = HashSet::new();
    let mut last = 1;
    for (ln, line) in lines {
        last = ln;
        let mut toks = line.split_whitespace();
        let key = toks.next().unwrap_or("");
        if let Some(k) = keys.iter().position(|&x| x == key) {
            if m.is_some() || sizes[k].is_some() {
                return Err(Error::parse(ln, format!("{key} must appear once, before the body")));
            }
            sizes[k] = Some(num(ln, toks.next(), key)?);
            no_more(ln, toks)?;
            continue;
        }
        if m.is_none() {
            let [Some(n), Some(a), Some(k), Some(s0)] = sizes else {
                return Err(Error::parse(ln, "states, actions, observations and initial must come first"));
            };
            m = Some(Pomdp::new(n, a, k, s0));
        }
        let model = m.as_mut().expect("model created above");
        let (n, na) = (model.n_states(), model.n_actions());
        let state = |ln: usize, t: Option<&str>| -> Result<usize> {
            let s: usize = num(ln, t, "state")?;
            if s >= n {
                return Err(Error::parse(ln, format!("state {s} out of range 0..{n}")));
            }
            Ok(s)
        };
        let action = |ln: usize, t: Option<&str>| -> Result<usize> {
            let a: usize = num(ln, t, "action")?;
            if a >= na {
                return Err(Error::parse(ln, format!("action {a} out of range 0..{na}")));
            }
            Ok(a)
        };
        match key {
            "obs" => {
                let s = state(ln, toks.next())?;
                let o: usize = num(ln, toks.next(), "observation")?;
                model.set_obs(s, o);
            }
            "T" => {
                let a = action(ln, toks.next())?;
                let s = state(ln, toks.next())?;
                let s2 = state(ln, toks.next())?;
                let p = ratio(ln, toks.next())?;
                if !seen_t.insert((a, s, s2)) {
                    return Err(Error::parse(ln, format!("duplicate transition T {a} {s} {s2}")));
                }
                model.set_prob(s, a, s2, p);
            }
            "R" => {
                let s = state(ln, toks.next())?;
                let a = action(ln, toks.next())?;
                let r = ratio(ln, toks.next())?;
                if !seen_r.insert((s, a)) {
                    return Err(Error::parse(ln, format!("duplicate reward R {s} {a}")));
                }
                model.set_reward(s, a, r);
            }
            other => return Err(Error::parse(ln, format!("unknown keyword {other:?}"))),
        }
        no_more(ln, toks)?;
    }
    let mut m = match m {
        Some(m) => m,
        None => {
            let [Some(n), Some(a), Some(k), Some(s0)] = sizes else {
                return Err(Error::parse(last, "incomplete header"));
            };
            Pomdp::new(n, a, k, s0)
        }
    };
    let violations = m.validate();
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(Error::InvalidModel(list.join("; ")));
    }
    if let Some(l) = parse_labels(text, &m)? {
        m.set_labels(l);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};

    #[test]
    fn self_loop_round_trip() {
        let mut m = Pomdp::new(1, 1, 1, 0);
        m.set_forced(0, 0);
        m.set_reward(0, 0, rat(2, 4));
        let text = serialize_pomdp(&m);
        assert_eq!(text, "POMDP v1\nstates 1\nactions 1\nobservations 1\ninitial 0\nobs 0 0\nT 0 0 0 1/1\nR 0 0 1/2\n");
        let back = parse_pomdp(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(serialize_pomdp(&back), text);
    }

    #[test]
    fn row_sum_violation() {
        let text = "POMDP v1\nstates 2\nactions 1\nobservations 1\ninitial 0\nT 0 0 1 1/3\n";
        let e = parse_pomdp(text).unwrap_err();
        assert!(e.to_string().contains("row-sum"), "{e}");
    }

    #[test]
    fn duplicates_and_ranges() {
        let head = "POMDP v1\nstates 2\nactions 1\nobservations 1\ninitial 0\n";
        assert!(parse_pomdp(&format!("{head}T 0 0 1 1\nT 0 0 1 1\n")).is_err());
        assert!(parse_pomdp(&format!("{head}T 0 0 2 1\n")).is_err());
        assert!(parse_pomdp(&format!("{head}R 0 1 1\n")).is_err());
        assert!(parse_pomdp(&format!("{head}T 0 0 1 0.5\n")).is_err());
        assert!(parse_pomdp("states 1\n").is_err());
    }

    #[test]
    fn labels_survive() {
        let mut m = Pomdp::new(2, 1, 2, 0);
        m.set_forced(0, 1);
        m.set_obs(1, 1);
        m.set_reward(1, 0, int(1));
        m.set_labels(Labels {
            states: vec!["start".into(), "goal state".into()],
            actions: vec!["go".into()],
            observations: vec!["o0".into(), "o1".into()],
        });
        let back = parse_pomdp(&serialize_pomdp(&m)).unwrap();
        assert_eq!(back.state_label(1), Some("goal state"));
        assert_eq!(back, m);
    }
}
