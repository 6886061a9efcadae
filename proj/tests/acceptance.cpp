// Runs the shipped battery and prints one line per criterion.
#include "opplab/acceptance.hpp"

#include <cstdio>
#include <fstream>

int main(int argc, char** argv) {
    nlohmann::json cfg = opplab::default_battery_config();
    if (argc > 1) {
        std::ifstream in(argv[1]);
        if (!in) {
            std::fprintf(stderr, "cannot open %s\n", argv[1]);
            return 2;
        }
        cfg = nlohmann::json::parse(in);
    }
    auto summary = opplab::run_battery(cfg, [](const opplab::CriterionResult& r) {
        std::printf("criterion %2d %-17s %s  %s  [%.1f s]\n", r.id, r.name.c_str(), r.pass ? "PASS" : "FAIL",
                    r.summary.c_str(), r.seconds);
        std::fflush(stdout);
    });
    int passed = 0;
    for (const auto& r : summary.results) passed += r.pass;
    std::printf("%d/%zu criteria passed\n", passed, summary.results.size());
    return summary.all_pass() ? 0 : 1;
}
