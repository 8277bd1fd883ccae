#include "r1oe/cli.hpp"

int main(int argc, char** argv) { return r1oe::cli::cli_main(argc, argv); }
