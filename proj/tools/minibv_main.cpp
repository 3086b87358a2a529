// minibv: a small QF_BV SMT solver (bit-blasting + CDCL SAT) speaking
// the SMT-LIB v2 subset documented in smt2.h. Reads from a file
// argument or stdin.
#include <fstream>
#include <iostream>

#include "minibv/smt2.h"

int main(int argc, char ** argv)
{
  std::ios::sync_with_stdio(false);
  if (argc > 2) {
    std::cerr << "usage: minibv [file.smt2]\n";
    return 64;
  }
  if (argc == 2) {
    std::ifstream f(argv[1]);
    if (!f) {
      std::cerr << "minibv: cannot open " << argv[1] << "\n";
      return 66;
    }
    return minibv::run_smt2(f, std::cout);
  }
  return minibv::run_smt2(std::cin, std::cout);
}
