#include "noisefridge/cli/commands.hpp"

int main(int argc, char** argv) { return noisefridge::cli::run_cli(argc, argv); }
