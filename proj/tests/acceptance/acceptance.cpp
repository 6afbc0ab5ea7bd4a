// One line per acceptance criterion; nonzero exit if any fails.
#include <CLI11.hpp>

#include <cstdio>

#include "msq/error.hpp"
#include "msq/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  bool quick = false, full_only = false;
  std::string work_dir = "acceptance_runs";
  std::vector<int> only;
  app.add_flag("--quick", quick, "Criteria 1-10 and 13 at quick scale");
  app.add_flag("--full-only", full_only, "Full-scale criteria 11 and 12");
  app.add_option("--only", only, "Explicit criterion numbers");
  app.add_option("--work-dir", work_dir, "Directory for reference runs");
  CLI11_PARSE(app, argc, argv);

  msq::VerifyOptions opt;
  opt.work_dir = work_dir;
  opt.only = only;
  if (full_only && only.empty()) opt.only = {11, 12};
  opt.on_result = [](const msq::CriterionResult& r) {
    std::printf("%s\n", r.line().c_str());
    std::fflush(stdout);
  };
  try {
    auto results = msq::verify(opt);
    int failed = 0;
    for (const auto& r : results) failed += r.pass ? 0 : 1;
    std::printf("%zu/%zu criteria passed\n", results.size() - static_cast<std::size_t>(failed), results.size());
    return failed ? msq::kExitAcceptance : msq::kExitOk;
  } catch (const msq::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return msq::exit_code(e.kind());
  }
}
