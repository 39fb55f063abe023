use clap::{Args, ValueEnum};
use ffwd::circuit::{Gate, GateOp, Topology};
use ffwd::protocols::{
    build_entanglement_swap, build_fanout, build_ghz_adaptive, build_tele_cnot, build_teleport, BellMode, BellState,
    FanoutLayout, GhzPlan, ProtocolCircuit, TeleCnotLayout,
};
use ffwd::suite::{TELEPORT_CHAIN, TELEPORT_INPUT};
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolKind {
    Ghz,
    TeleCnot,
    Fanout,
    Teleport,
    Swap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Unitary,
    Adaptive,
}

/// Protocol selection shared by `run` and `emit-circuit`.
#[derive(Debug, Clone, Args, Serialize)]
pub struct ProtocolArgs {
    #[arg(long, value_enum)]
    pub protocol: ProtocolKind,
    /// GHZ size, or number of fan-out targets.
    #[arg(long)]
    pub n: Option<usize>,
    /// Bell-pair preparation of the teleported CNOT.
    #[arg(long, value_enum, default_value = "adaptive")]
    pub mode: ModeArg,
    /// Input state. Teleport: zero, one, plus, minus, plus-i, minus-i.
    /// Swap: two bits such as 10. Teleported CNOT and fan-out: a bitstring
    /// over the logical inputs, control first.
    #[arg(long)]
    pub input: Option<String>,
    /// Drop every feed-forward correction.
    #[arg(long)]
    pub no_corrections: bool,
    /// Ignore the device coupling map and lay qubits out on a line.
    #[arg(long)]
    pub free_layout: bool,
}

/// A built protocol. `base` has no input preparation and is what the branch
/// oracle verifies (its Choi state covers every input); `pc` carries the
/// requested input.
pub struct Built {
    pub base: ProtocolCircuit,
    pub pc: ProtocolCircuit,
    pub target: Option<String>,
}

fn parse_bits(s: &str, len: usize) -> Result<Vec<bool>, CliError> {
    if s.len() != len || !s.chars().all(|c| c == '0' || c == '1') {
        return Err(CliError::usage(format!("input must be {len} bits of 0/1, got `{s}`")));
    }
    Ok(s.chars().map(|c| c == '1').collect())
}

fn teleport_prep(name: &str) -> Result<Vec<Gate>, CliError> {
    Ok(match name {
        "zero" | "0" => vec![],
        "one" | "1" => vec![Gate::X],
        "plus" | "+" => vec![Gate::H],
        "minus" | "-" => vec![Gate::X, Gate::H],
        "plus-i" => vec![Gate::H, Gate::S],
        "minus-i" => vec![Gate::H, Gate::Sdg],
        other => return Err(CliError::usage(format!("unknown teleport input `{other}`"))),
    })
}

fn basis_input(pc: &ProtocolCircuit, input: Option<&str>) -> Result<ProtocolCircuit, CliError> {
    let Some(s) = input else { return Ok(pc.clone()) };
    let bits = parse_bits(s, pc.inputs.len())?;
    let index = bits.iter().enumerate().fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i));
    Ok(pc.with_basis_input(index))
}

impl ProtocolArgs {
    pub fn build(&self, device: &Topology) -> Result<Built, CliError> {
        let topo = (!self.free_layout).then_some(device);
        let mut target = None;
        let (base, pc) = match self.protocol {
            ProtocolKind::Ghz => {
                let n = self.n.unwrap_or(3);
                let plan = if self.free_layout { GhzPlan::line(n) } else { GhzPlan::ring(n, device.num_qubits)? };
                target = Some(format!("GHZ_{n}"));
                let pc = build_ghz_adaptive(&plan, topo)?;
                (pc.clone(), pc)
            }
            ProtocolKind::TeleCnot => {
                let mode = match self.mode {
                    ModeArg::Unitary => BellMode::Unitary,
                    ModeArg::Adaptive => BellMode::Adaptive,
                };
                let pc = build_tele_cnot(&TeleCnotLayout::default_for(mode), mode, topo)?;
                let with = basis_input(&pc, self.input.as_deref())?;
                (pc, with)
            }
            ProtocolKind::Fanout => {
                let n = self.n.unwrap_or(2);
                let layout = if self.free_layout { FanoutLayout::fresh(n) } else { FanoutLayout::standard(n) };
                let pc = build_fanout(&layout, topo)?;
                let with = basis_input(&pc, self.input.as_deref())?;
                (pc, with)
            }
            ProtocolKind::Teleport => {
                let pc = build_teleport(TELEPORT_INPUT, &TELEPORT_CHAIN, TELEPORT_CHAIN[3], topo)?;
                let name = self.input.as_deref().unwrap_or("zero");
                let ops: Vec<GateOp> =
                    teleport_prep(name)?.into_iter().map(|g| GateOp::one(g, TELEPORT_INPUT)).collect();
                target = Some(name.to_string());
                let with = pc.with_input(&ops);
                (pc, with)
            }
            ProtocolKind::Swap => {
                let bits = parse_bits(self.input.as_deref().unwrap_or("00"), 2)?;
                let bits = [bits[0], bits[1]];
                target = Some(BellState::from_input(bits).to_string());
                let pc = build_entanglement_swap(&TELEPORT_CHAIN, bits, topo)?;
                (pc.clone(), pc)
            }
        };
        let strip = |pc: ProtocolCircuit| {
            if self.no_corrections {
                ProtocolCircuit { rule: Default::default(), ..pc }
            } else {
                pc
            }
        };
        Ok(Built { base: strip(base), pc: strip(pc), target })
    }
}
