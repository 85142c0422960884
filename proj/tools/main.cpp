#include "smc/cli.hpp"

int main(int argc, char** argv) { return smc::cli_main(argc, argv); }
