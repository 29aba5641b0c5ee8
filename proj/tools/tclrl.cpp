#include "tclrl/cli.hpp"

int main(int argc, char** argv) { return tclrl::run_cli(argc, argv); }
