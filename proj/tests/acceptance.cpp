// One PASS/FAIL line per acceptance criterion; exit status reflects all of them.

#include <iostream>

#include <codedgraph/verify.hpp>

int main() {
  codedgraph::Acceptance acceptance(codedgraph::default_threads());
  bool ok = true;
  for (const auto& c : acceptance.run_all(&std::cout)) ok = ok && c.pass;
  std::cout << (ok ? "acceptance: all criteria passed" : "acceptance: FAILED") << std::endl;
  return ok ? 0 : 1;
}
