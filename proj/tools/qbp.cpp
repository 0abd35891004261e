#include "qbp/cli/commands.hpp"

int main(int argc, char** argv) { return qbp::cli::cli_main(argc, argv); }
