#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pdempc::verify {

struct CheckRow {
  int criterion = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

CheckRow criterion_operator_identities();  // 1
CheckRow criterion_feedthrough();          // 2
CheckRow criterion_lyapunov();             // 3
CheckRow criterion_reactor_resolvent();    // 4
CheckRow criterion_output_feedback();      // 5
CheckRow criterion_qp_equivalence();       // 6
CheckRow criterion_wave_scenario();        // 7
CheckRow criterion_reactor_scenario();     // 8
CheckRow criterion_determinism();          // 9

/// All criteria in order. A criterion that throws is reported as failed.
std::vector<CheckRow> run_acceptance();

void print_table(std::ostream& out, const std::vector<CheckRow>& rows);
bool all_passed(const std::vector<CheckRow>& rows);

}  // namespace pdempc::verify
