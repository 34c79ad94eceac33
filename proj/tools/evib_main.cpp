#include "evib/cli_commands.hpp"

int main(int argc, char** argv) { return evib::run_cli(argc, argv); }
