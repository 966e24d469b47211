#ifndef QCM_SELFTEST_HPP
#define QCM_SELFTEST_HPP

#include <ostream>

namespace qcm {

// Fast headless invariant sweep, one PASS/FAIL line per check. Returns true
// when every check passed. Runs in a few seconds; meant as a smoke test for
// a fresh build or an unfamiliar machine, not as the full test suite.
bool selftest_run(std::ostream& out);

}  // namespace qcm

#endif
