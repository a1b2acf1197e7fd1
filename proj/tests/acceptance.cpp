#include "etahardy/verify.hpp"

#include <chrono>
#include <cstdio>

using namespace etahardy;

int main()
{
    SuiteConfig config;
    int failed = 0;
    for (int i = 1; i <= 11; ++i) {
        auto start = std::chrono::steady_clock::now();
        CheckResult r = run_check(criterion_check(i), config);
        double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s criterion %d (%s, %.1fs): %s\n", r.passed ? "PASS" : "FAIL", i, r.name.c_str(), seconds,
                    r.detail.c_str());
        std::fflush(stdout);
        failed += !r.passed;
    }
    std::printf("%d of 11 criteria passed\n", 11 - failed);
    return failed == 0 ? 0 : 1;
}
