// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <iostream>
#include <string>
#include <vector>

#include "hol/verify.hpp"

using namespace hol;

namespace {

struct Criterion {
  int id;
  std::string suite;
  double limit_s;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {{1, "levels", 5},  {2, "dyadic-sum", 1}, {3, "oinarov", 5},
                                           {4, "hardy", 60},  {5, "p-inf", 10},     {6, "bracket", 30},
                                           {7, "gamma", 10},  {8, "min", 30},       {9, "bands", 300}};
  const VerifyConfig cfg;
  std::vector<std::string> first;
  bool all = true;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    SuiteResult r;
    std::string error;
    try {
      r = run_suite(c.suite, cfg);
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = error.empty() && r.pass && secs < c.limit_s;
    all = all && pass;
    first.push_back(error.empty() ? r.report.dump() : error);
    std::cout << (pass ? "PASS " : "FAIL ") << c.id << " " << c.suite << ": " << (error.empty() ? r.summary : error)
              << " [" << secs << " s, limit " << c.limit_s << " s]" << std::endl;
  }

  // every report again with the same seed, compared byte for byte
  int differing = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::string again;
    try {
      again = run_suite(criteria[i].suite, cfg).report.dump();
    } catch (const std::exception& e) {
      again = e.what();
    }
    if (again != first[i]) {
      ++differing;
      std::cout << "  report of " << criteria[i].suite << " changed between runs" << std::endl;
    }
  }
  const bool det = differing == 0;
  all = all && det;
  std::cout << (det ? "PASS " : "FAIL ") << "10 determinism: " << criteria.size() - differing << "/" << criteria.size()
            << " JSON reports byte-identical across two runs" << std::endl;
  return all ? 0 : 1;
}
