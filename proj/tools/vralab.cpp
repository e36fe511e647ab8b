#include "vralab/harness/cli.hpp"

int main(int argc, char** argv) { return vralab::harness::cli_main(argc, argv); }
