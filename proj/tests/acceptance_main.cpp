// Acceptance harness: runs the verification criteria and prints one
// pass/fail line per criterion. Exit code 0 only when every requested
// criterion passes.

#include <cstdio>
#include <cstring>
#include <string>

#include "gapforge/verify.hpp"

int main(int argc, char** argv) {
    std::string suite = "all";
    int single = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) single = std::atoi(argv[++i]);
        else if (std::strcmp(argv[i], "--suite") == 0 && i + 1 < argc) suite = argv[++i];
        else {
            std::fprintf(stderr, "usage: acceptance [--criterion N | --suite NAME]\n");
            return 2;
        }
    }
    std::vector<int> ids = single > 0 ? std::vector<int>{single} : gapforge::criteria_for_suite(suite);
    if (ids.empty()) {
        std::fprintf(stderr, "unknown suite: %s\n", suite.c_str());
        return 2;
    }
    bool ok = true;
    for (int id : ids) {
        gapforge::CriterionResult r = gapforge::run_criterion(id);
        std::printf("[%s] criterion %2d: %s (%.1fs) %s\n", r.pass ? "PASS" : "FAIL", r.index,
                    r.name.c_str(), r.seconds, r.details.c_str());
        std::fflush(stdout);
        ok = ok && r.pass;
    }
    return ok ? 0 : 1;
}
