#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <filesystem>
#include <string>

#include "support/clipath.hpp"

std::string g_cli_path;

int main(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg.rfind("--cli=", 0) == 0) g_cli_path = arg.substr(6);
    }
    if (g_cli_path.empty() && argc > 0) {
        // Default to the CLI binary built next to this test runner.
        const auto sibling = std::filesystem::path(argv[0]).parent_path() / "capmsize";
        if (std::filesystem::exists(sibling)) g_cli_path = sibling.string();
    }
    doctest::Context context;
    context.applyCommandLine(argc, argv);
    return context.run();
}
