#include "riskdiv/cli.hpp"

int main(int argc, char** argv) { return riskdiv::cli::run(argc, argv); }
