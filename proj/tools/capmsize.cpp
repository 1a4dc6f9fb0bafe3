#include "capmsize/cli.hpp"

int main(int argc, char** argv) { return capmsize::run_cli(argc, argv); }
