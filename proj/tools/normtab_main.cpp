#include "normtab/cli.hpp"

int main(int argc, char** argv) { return normtab::run_cli(argc, argv); }
