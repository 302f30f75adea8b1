use popqc_core::qasm::serialize_gates;
use popqc_core::synth::GeneratorParams;

use crate::args::{GenerateArgs, SynthArgs};
use crate::common::{exit, write_output, CliResult, Failure};

pub fn params(synth: &SynthArgs, gates: usize) -> CliResult<GeneratorParams> {
    if synth.qubits == 0 {
        return Err(Failure::new(exit::USAGE, "--qubits must be at least 1"));
    }
    if !(0.0..=1.0).contains(&synth.density) {
        return Err(Failure::new(exit::USAGE, "--density must lie in [0, 1]"));
    }
    Ok(GeneratorParams::new(synth.qubits, gates, synth.density, synth.seed))
}

pub fn run(args: GenerateArgs) -> CliResult {
    let gates = params(&args.synth, args.gates)?.generate();
    write_output(args.output.as_deref(), &serialize_gates(args.synth.qubits, &gates))
}
