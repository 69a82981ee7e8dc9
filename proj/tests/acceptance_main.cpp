#include <iostream>

#include "verify/acceptance.hpp"

int main() {
  const auto rows = pdempc::verify::run_acceptance();
  pdempc::verify::print_table(std::cout, rows);
  return pdempc::verify::all_passed(rows) ? 0 : 1;
}
