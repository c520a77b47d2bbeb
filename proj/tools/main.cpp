#include "gpsinfer/cli.hpp"

int main(int argc, char** argv) { return gpsinfer::run_subcommand(argc, argv); }
