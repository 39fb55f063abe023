//! Line-oriented text form of a circuit.
//!
//! ```text
//! QUBITS 3
//! CBITS 2
//! H 0
//! CNOT 0 1
//! MEASURE 1 -> c0 Z
//! COND c0 : X 2
//! DELAY 2 150ns
//! ```
//!
//! `#` starts a comment. Floats are written in shortest round-trip form so
//! `parse_text(&to_text(c)) == c` holds exactly.

use super::cond::CondParser;
use super::{Basis, Circuit, Gate, GateOp, Instruction, NoiseOp, Topology};
use std::fmt::Write;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn gate_text(op: &GateOp) -> String {
    let mut s = match op.gate {
        Gate::Rx(t) | Gate::Ry(t) | Gate::Rz(t) => format!("{}({})", op.gate.name(), t),
        g => g.name().to_string(),
    };
    for q in &op.qubits {
        write!(s, " {q}").unwrap();
    }
    s
}

pub fn to_text(circuit: &Circuit) -> String {
    let mut out = String::new();
    writeln!(out, "QUBITS {}", circuit.num_qubits).unwrap();
    writeln!(out, "CBITS {}", circuit.num_cbits).unwrap();
    if let Some(t) = &circuit.topology {
        write!(out, "TOPOLOGY {}", t.num_qubits).unwrap();
        for (a, b) in t.edges() {
            write!(out, " {a}-{b}").unwrap();
        }
        out.push('\n');
    }
    for inst in &circuit.instructions {
        let line = match inst {
            Instruction::Gate(op) => gate_text(op),
            Instruction::Measure { qubit, cbit, basis } => {
                format!("MEASURE {qubit} -> c{cbit} {}", if *basis == Basis::X { "X" } else { "Z" })
            }
            Instruction::Reset { qubit } => format!("RESET {qubit}"),
            Instruction::Delay { qubit, duration_ns } => format!("DELAY {qubit} {duration_ns}ns"),
            Instruction::Conditional { cond, ops } => {
                let body: Vec<String> = ops.iter().map(gate_text).collect();
                format!("COND {cond} : {}", body.join("; "))
            }
            Instruction::Barrier { qubits } => {
                let mut s = "BARRIER".to_string();
                for q in qubits {
                    write!(s, " {q}").unwrap();
                }
                s
            }
            Instruction::Noise(n) => match n {
                NoiseOp::Idle { qubit, duration_ns, t1_us, tphi_us } => {
                    format!("IDLE {qubit} {duration_ns}ns t1={t1_us}us tphi={tphi_us}us")
                }
                NoiseOp::PhaseFlip { qubit, p } => format!("PHASEFLIP {qubit} {p}"),
                NoiseOp::Depolarize { qubits, p } => {
                    let qs: Vec<String> = qubits.iter().map(|q| q.to_string()).collect();
                    format!("DEPOLARIZE {} {p}", qs.join(" "))
                }
                NoiseOp::ReadoutError { cbit, p00, p11 } => format!("READOUT c{cbit} {p00} {p11}"),
            },
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

struct LineCtx {
    line: usize,
}

impl LineCtx {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { line: self.line, message: message.into() })
    }

    fn usize(&self, s: &str) -> Result<usize, ParseError> {
        s.parse().or_else(|_| self.err(format!("expected an index, found `{s}`")))
    }

    fn float(&self, s: &str) -> Result<f64, ParseError> {
        s.parse().or_else(|_| self.err(format!("expected a number, found `{s}`")))
    }

    fn cbit(&self, s: &str) -> Result<usize, ParseError> {
        match s.strip_prefix('c') {
            Some(rest) => self.usize(rest),
            None => self.err(format!("expected a classical bit like `c0`, found `{s}`")),
        }
    }

    fn with_suffix<'a>(&self, s: &'a str, suffix: &str) -> Result<&'a str, ParseError> {
        s.strip_suffix(suffix).map_or_else(|| self.err(format!("expected `{suffix}` suffix on `{s}`")), Ok)
    }

    fn keyed<'a>(&self, s: &'a str, key: &str, suffix: &str) -> Result<f64, ParseError> {
        let v = s.strip_prefix(key).map_or_else(|| self.err(format!("expected `{key}` in `{s}`")), Ok)?;
        self.float(self.with_suffix(v, suffix)?)
    }

    fn gate(&self, words: &[&str]) -> Result<GateOp, ParseError> {
        let Some((&head, rest)) = words.split_first() else {
            return self.err("empty gate");
        };
        let upper = head.to_ascii_uppercase();
        let rotation = |name: &str| -> Result<Option<f64>, ParseError> {
            match upper.strip_prefix(name) {
                Some(arg) => {
                    let inner = arg
                        .strip_prefix('(')
                        .and_then(|a| a.strip_suffix(')'))
                        .map_or_else(|| self.err(format!("malformed rotation `{head}`")), Ok)?;
                    Ok(Some(self.float(inner)?))
                }
                None => Ok(None),
            }
        };
        let gate = if let Some(t) = rotation("RX")? {
            Gate::Rx(t)
        } else if let Some(t) = rotation("RY")? {
            Gate::Ry(t)
        } else if let Some(t) = rotation("RZ")? {
            Gate::Rz(t)
        } else {
            match upper.as_str() {
                "I" => Gate::I,
                "X" => Gate::X,
                "Y" => Gate::Y,
                "Z" => Gate::Z,
                "H" => Gate::H,
                "S" => Gate::S,
                "SDG" => Gate::Sdg,
                "CNOT" | "CX" => Gate::Cnot,
                "CZ" => Gate::Cz,
                _ => return self.err(format!("unknown gate `{head}`")),
            }
        };
        let qubits = rest.iter().map(|w| self.usize(w)).collect::<Result<Vec<_>, _>>()?;
        if qubits.len() != gate.arity() {
            return self.err(format!("{} takes {} qubit(s)", gate.name(), gate.arity()));
        }
        Ok(GateOp { gate, qubits })
    }
}

pub fn parse_text(src: &str) -> Result<Circuit, ParseError> {
    let mut num_qubits = None;
    let mut num_cbits = None;
    let mut topology = None;
    let mut instructions = Vec::new();

    for (idx, raw) in src.lines().enumerate() {
        let ctx = LineCtx { line: idx + 1 };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        let head = words[0].to_ascii_uppercase();
        match head.as_str() {
            "QUBITS" if words.len() == 2 => num_qubits = Some(ctx.usize(words[1])?),
            "CBITS" if words.len() == 2 => num_cbits = Some(ctx.usize(words[1])?),
            "TOPOLOGY" if words.len() >= 2 => {
                let n = ctx.usize(words[1])?;
                let mut t = Topology::new(n, &[]);
                for e in &words[2..] {
                    let (a, b) = e.split_once('-').map_or_else(|| ctx.err(format!("bad edge `{e}`")), Ok)?;
                    t.add_edge(ctx.usize(a)?, ctx.usize(b)?);
                }
                topology = Some(t);
            }
            "MEASURE" => {
                if words.len() != 5 || words[2] != "->" {
                    return ctx.err("expected `MEASURE <q> -> c<k> <X|Z>`");
                }
                let basis = match words[4].to_ascii_uppercase().as_str() {
                    "X" => Basis::X,
                    "Z" => Basis::Z,
                    other => return ctx.err(format!("unsupported basis `{other}`")),
                };
                instructions.push(Instruction::Measure { qubit: ctx.usize(words[1])?, cbit: ctx.cbit(words[3])?, basis });
            }
            "RESET" if words.len() == 2 => instructions.push(Instruction::Reset { qubit: ctx.usize(words[1])? }),
            "DELAY" if words.len() == 3 => instructions.push(Instruction::Delay {
                qubit: ctx.usize(words[1])?,
                duration_ns: ctx.float(ctx.with_suffix(words[2], "ns")?)?,
            }),
            "BARRIER" => {
                let qubits = words[1..].iter().map(|w| ctx.usize(w)).collect::<Result<_, _>>()?;
                instructions.push(Instruction::Barrier { qubits });
            }
            "COND" => {
                let rest = line[4..].trim();
                let (cond_src, body) = rest.split_once(':').map_or_else(|| ctx.err("expected `COND <expr> : <gates>`"), Ok)?;
                let cond = CondParser::parse(cond_src.trim()).or_else(|m| ctx.err(m))?;
                let ops = body
                    .split(';')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|g| ctx.gate(&g.split_whitespace().collect::<Vec<_>>()))
                    .collect::<Result<Vec<_>, _>>()?;
                instructions.push(Instruction::Conditional { cond, ops });
            }
            "IDLE" if words.len() == 5 => instructions.push(Instruction::Noise(NoiseOp::Idle {
                qubit: ctx.usize(words[1])?,
                duration_ns: ctx.float(ctx.with_suffix(words[2], "ns")?)?,
                t1_us: ctx.keyed(words[3], "t1=", "us")?,
                tphi_us: ctx.keyed(words[4], "tphi=", "us")?,
            })),
            "PHASEFLIP" if words.len() == 3 => instructions.push(Instruction::Noise(NoiseOp::PhaseFlip {
                qubit: ctx.usize(words[1])?,
                p: ctx.float(words[2])?,
            })),
            "DEPOLARIZE" if words.len() >= 3 => {
                let qubits = words[1..words.len() - 1].iter().map(|w| ctx.usize(w)).collect::<Result<_, _>>()?;
                let p = ctx.float(words[words.len() - 1])?;
                instructions.push(Instruction::Noise(NoiseOp::Depolarize { qubits, p }));
            }
            "READOUT" if words.len() == 4 => instructions.push(Instruction::Noise(NoiseOp::ReadoutError {
                cbit: ctx.cbit(words[1])?,
                p00: ctx.float(words[2])?,
                p11: ctx.float(words[3])?,
            })),
            _ => instructions.push(Instruction::Gate(ctx.gate(&words)?)),
        }
    }

    let ctx = LineCtx { line: 0 };
    let num_qubits = num_qubits.map_or_else(|| ctx.err("missing QUBITS header"), Ok)?;
    let num_cbits = num_cbits.unwrap_or(0);
    Ok(Circuit { num_qubits, num_cbits, instructions, topology })
}
