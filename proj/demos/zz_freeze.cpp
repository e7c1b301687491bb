// Minimal example: engineer |0> as a pointer state of a spin qubit coupled to
// a six-spin bath, and compare against free evolution.

#include <cstdio>

#include "pse/model.hpp"
#include "pse/propagate.hpp"
#include "pse/pulses.hpp"

int main() {
  pse::CouplingEnsembleSpec spec;
  spec.n_qubits = 1;
  spec.n_bath = 6;
  spec.j_cap = 1.0;
  spec.seed = 42;
  const pse::SpinBathModel model = pse::sample_couplings(spec);
  const pse::HermitianOperator h0 = pse::build_H0(model);

  const auto schedule = pse::log_schedule(5000, 25);
  const auto plus_z = pse::named_state("+Z", 1);
  const auto plus_x = pse::named_state("+X", 1);

  const pse::PulseSequence zz = pse::named_qubit_cycle("ZZ", 0.01);
  const pse::PulseSequence free_run = pse::free_evolution_cycle(2, 0.01);

  std::printf("# ZZ cycle at tau = 0.01/J, n_B = 6 (A = %.3f)\n",
              pse::coupling_strength_A(model, 0));
  std::printf("%10s %14s %14s %14s\n", "N", "loss(ZZ,+Z)", "loss(ZZ,+X)",
              "loss(free,+Z)");
  const auto t1 = pse::run_sequence(zz, h0, pse::initial_state(plus_z, model),
                                    schedule, 2, model.dim_bath());
  const auto t2 = pse::run_sequence(zz, h0, pse::initial_state(plus_x, model),
                                    schedule, 2, model.dim_bath());
  const auto t3 = pse::run_sequence(free_run, h0, pse::initial_state(plus_z, model),
                                    schedule, 2, model.dim_bath());
  for (std::size_t i = 0; i < schedule.size(); i += 3)
    std::printf("%10ld %14.6e %14.6e %14.6e\n", schedule[i], 1.0 - t1.fidelity[i],
                1.0 - t2.fidelity[i], 1.0 - t3.fidelity[i]);
  return 0;
}
