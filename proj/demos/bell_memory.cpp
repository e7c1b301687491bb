// Bell-state memory: the E1 cycle (two SWAP applications) keeps the singlet
// alive while computational-basis states decohere.

#include <cstdio>

#include "pse/model.hpp"
#include "pse/propagate.hpp"
#include "pse/pulses.hpp"

int main() {
  pse::CouplingEnsembleSpec spec;
  spec.n_qubits = 2;
  spec.n_bath = 4;
  spec.j_cap = 1.0;
  spec.beta_cap = 1.0;
  spec.k_exchange = 1.0;
  spec.seed = 7;
  const pse::SpinBathModel model = pse::sample_couplings(spec);
  const pse::HermitianOperator h0 = pse::build_H0(model);
  const pse::PulseSequence e1 = pse::epr_cycle("E1", 0.01);

  const auto schedule = pse::log_schedule(4000, 25);
  std::printf("%10s %16s %16s\n", "N", "loss(EPR1)", "loss(|00>)");
  const auto singlet =
      pse::run_sequence(e1, h0, pse::initial_state(pse::named_state("EPR1", 2), model),
                        schedule, 4, model.dim_bath());
  const auto comp =
      pse::run_sequence(e1, h0, pse::initial_state(pse::named_state("00", 2), model),
                        schedule, 4, model.dim_bath());
  for (std::size_t i = 0; i < schedule.size(); i += 3)
    std::printf("%10ld %16.6e %16.6e\n", schedule[i], 1.0 - singlet.fidelity[i],
                1.0 - comp.fidelity[i]);
  return 0;
}
