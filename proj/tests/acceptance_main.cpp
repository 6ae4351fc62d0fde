// Standalone verification runner: one line per check, nonzero exit when any
// check fails. Optional argv[1] restricts to one group (bell, measures,
// table, sim, hierarchy, bound).

#include <cstdio>
#include <cstring>

#include "qnl/selfcheck.hpp"

int main(int argc, char** argv) {
  qnl::SelfCheckOpts opt;
  if (argc > 1) opt.only = argv[1];
  int failed = 0;
  auto rows = qnl::run_selfcheck(opt, [&](const qnl::CheckRow& r) {
    std::printf("[%s] %2d %-24s %s | expected %s (tol %s) [%.1fs]\n",
                r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.measured.c_str(),
                r.expected.c_str(), r.tol.c_str(), r.seconds);
    std::fflush(stdout);
    if (!r.pass) ++failed;
  });
  if (rows.empty()) {
    std::fprintf(stderr, "no checks matched group '%s'\n", opt.only.c_str());
    return 2;
  }
  std::printf("%zu/%zu checks passed\n", rows.size() - failed, rows.size());
  return failed == 0 ? 0 : 1;
}
